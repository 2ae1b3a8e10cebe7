fn main() {
    // Die quietly on closed pipes instead of panicking mid-print.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    std::process::exit(dirac_lab::cli::run(std::env::args_os()));
}
