//! Command-line driver.
//!
//! Exit codes are stable for scripting: 0 on success, 1 for validation
//! problems (flags, document shape, class membership on load), 2 for
//! numerical failures discovered during computation.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::direct;
use crate::doc::{load_tolerance, Document, Report};
use crate::error::{Error, Result};
use crate::inverse;
use crate::jalgebra::Signature;
use crate::mat;
use crate::potential::{self, DiracPotential};
use crate::snode;
use crate::taylor;

#[derive(Parser)]
#[command(
    name = "dirac-lab",
    about = "Forward and inverse solvers for discrete Dirac systems",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GenArgs {
    /// RNG seed; identical seeds give byte-identical output files.
    #[arg(long)]
    seed: u64,
    /// Top index r; the sequence has r + 1 coefficients.
    #[arg(long)]
    r: usize,
    #[arg(long)]
    m1: usize,
    #[arg(long)]
    m2: usize,
    /// Spectral-norm cap in (0, 1).
    #[arg(long, default_value_t = 0.8)]
    max_norm: f64,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args)]
struct ForwardArgs {
    /// Input document of kind schur or potential.
    #[arg(long, short)]
    input: PathBuf,
    /// Output Taylor document.
    #[arg(long, short)]
    output: PathBuf,
    /// Also dump the S-node blocks (S, Pi, A) to this path.
    #[arg(long)]
    dump_snode: Option<PathBuf>,
    /// Validation tolerance; defaults to DIRAC_LAB_TOL or 1e-9.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct InvertArgs {
    /// Input Taylor document.
    #[arg(long, short)]
    input: PathBuf,
    /// Output potential document.
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct RoundtripArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    r: usize,
    #[arg(long)]
    m1: usize,
    #[arg(long)]
    m2: usize,
    #[arg(long, default_value_t = 0.8)]
    max_norm: f64,
    /// Pass threshold on the blockwise relative deviation.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Write the machine-readable report here.
    #[arg(long)]
    json_report: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Input potential document.
    #[arg(long, short)]
    input: PathBuf,
    /// Residual threshold for the identity suite.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Validation tolerance for loading; defaults to DIRAC_LAB_TOL or 1e-9.
    #[arg(long)]
    load_tol: Option<f64>,
    /// Evaluation points as "re,im"; repeatable. Defaults to a built-in grid
    /// in the upper half-plane avoiding +-i.
    #[arg(long = "z")]
    z_points: Vec<String>,
    #[arg(long)]
    json_report: Option<PathBuf>,
}

#[derive(Args)]
struct SzegoArgs {
    /// Input document of kind schur or potential; the output is the other.
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random strictly contractive Schur sequence.
    Gen(GenArgs),
    /// Potential (or Schur sequence) -> Taylor coefficients.
    Forward(ForwardArgs),
    /// Taylor coefficients -> potential.
    Invert(InvertArgs),
    /// Generate, run forward then inverse, and compare.
    Roundtrip(RoundtripArgs),
    /// Run the identity suite on a potential.
    Verify(VerifyArgs),
    /// Convert between Schur-sequence and potential documents.
    Szego(SzegoArgs),
}

/// Parse and execute; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Forward(args) => cmd_forward(args),
        Command::Invert(args) => cmd_invert(args),
        Command::Roundtrip(args) => cmd_roundtrip(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Szego(args) => cmd_szego(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn cmd_gen(args: GenArgs) -> Result<i32> {
    let sig = Signature::new(args.m1, args.m2)?;
    let seq = potential::random_schur(args.seed, args.r, sig, args.max_norm)?;
    Document::from_schur(&seq)?.write(&args.output)?;
    println!(
        "wrote schur document with {} coefficients to {}",
        seq.len(),
        args.output.display()
    );
    Ok(0)
}

/// Load a potential from either document kind, converting a Schur sequence
/// through the bijection when needed.
fn load_as_potential(path: &Path, tol: f64) -> Result<DiracPotential> {
    let doc = Document::read(path)?;
    match doc.kind.as_str() {
        "schur" => {
            let seq = doc.to_schur()?;
            Ok(potential::schur_to_dirac(&seq)?.0)
        }
        "potential" => doc.to_potential(tol),
        other => Err(Error::Document(format!(
            "expected schur or potential, found kind '{other}'"
        ))),
    }
}

fn cmd_forward(args: ForwardArgs) -> Result<i32> {
    let tol = load_tolerance(args.tol);
    let pot = load_as_potential(&args.input, tol)?;
    let data = taylor::taylor_algebraic(&pot)?;
    Document::from_taylor(&data)?.write(&args.output)?;
    println!(
        "wrote taylor document with {} coefficients to {}",
        data.len(),
        args.output.display()
    );
    if let Some(snode_path) = args.dump_snode {
        let node = snode::build_snode(&pot)?;
        let residual = node.operator_identity_residual();
        if residual > 1e-9 {
            return Err(Error::Document(format!(
                "operator identity residual {residual:.3e} on emitted S-node exceeds 1e-9"
            )));
        }
        Document::from_snode(&node)?.write(&snode_path)?;
        println!(
            "wrote snode document (identity residual {residual:.3e}) to {}",
            snode_path.display()
        );
    }
    Ok(0)
}

fn cmd_invert(args: InvertArgs) -> Result<i32> {
    let doc = Document::read(&args.input)?;
    let data = doc.to_taylor()?;
    let (pot, trace) = inverse::recover_potential(&data)?;
    for level in &trace.levels {
        println!(
            "level {:>3}: min eig(S) = {: >13.6e}, identity residual = {:.3e}, j-unitarity = {:.3e}",
            level.level, level.s_min_eig, level.identity_residual, level.junitarity_residual
        );
    }
    Document::from_potential(&pot)?.write(&args.output)?;
    println!(
        "wrote potential document with {} matrices to {}",
        pot.len(),
        args.output.display()
    );
    let _ = args.tol;
    Ok(0)
}

fn cmd_roundtrip(args: RoundtripArgs) -> Result<i32> {
    let sig = Signature::new(args.m1, args.m2)?;
    let seq = potential::random_schur(args.seed, args.r, sig, args.max_norm)?;
    let (pot, _) = potential::schur_to_dirac(&seq)?;
    let data = taylor::taylor_algebraic(&pot)?;
    let (recovered, _) = inverse::recover_potential(&data)?;

    let mut worst_block = 0.0f64;
    for (a, b) in recovered.matrices().iter().zip(pot.matrices()) {
        let rel = mat::frob(&(a.entries() - b.entries())) / mat::frob(b.entries()).max(1.0);
        worst_block = worst_block.max(rel);
    }
    let back = potential::dirac_to_schur(&pot)?;
    let mut worst_schur = 0.0f64;
    for (a, b) in back.coefficients().iter().zip(seq.coefficients()) {
        worst_schur = worst_schur.max((a - b).iter().map(|x| x.norm()).fold(0.0, f64::max));
    }

    let mut report = Report::new(sig);
    report.push_max("roundtrip blockwise relative deviation", worst_block, args.tol);
    report.push_max("szego bijection elementwise deviation", worst_schur, 1e-9);
    report.print();
    if let Some(path) = args.json_report {
        report.write(&path)?;
    }
    Ok(if report.pass { 0 } else { 2 })
}

fn parse_z(text: &str) -> Result<Complex64> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::BadParameter(format!(
            "expected z as \"re,im\", got '{text}'"
        )));
    }
    let re: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| Error::BadParameter(format!("bad real part in '{text}'")))?;
    let im: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| Error::BadParameter(format!("bad imaginary part in '{text}'")))?;
    Ok(Complex64::new(re, im))
}

fn cmd_verify(args: VerifyArgs) -> Result<i32> {
    let load_tol = load_tolerance(args.load_tol);
    let doc = Document::read(&args.input)?;
    let pot = doc.to_potential(load_tol)?;
    let sig = pot.sig();
    let grid = if args.z_points.is_empty() {
        direct::default_z_grid()
    } else {
        args.z_points
            .iter()
            .map(|s| parse_z(s))
            .collect::<Result<Vec<_>>>()?
    };

    let mut report = Report::new(sig);
    let node = snode::build_snode(&pot)?;
    report.push_max("operator identity A S - S A* = i Pi j Pi*",
        node.operator_identity_residual(), args.tol);
    report.push_max("similarity K E = E A", node.similarity_residual(), args.tol);
    report.push_max("K - K* = i Gamma j Gamma*", node.k_identity_residual(), args.tol);
    report.push_min("min eigenvalue of S", mat::min_eigenvalue(node.s()), 0.0);
    report.push_max(
        "transfer j-form at sample points",
        node.transfer_jform_residual(Complex64::new(0.3, 0.5), Complex64::new(-0.2, 0.9))?,
        args.tol,
    );

    let top = pot.len() - 1;
    for &z in &grid {
        let tag = format!("z = {z}");
        report.push_max(
            &format!("j-form of W ({tag})"),
            direct::j_form_residual(&pot, z),
            args.tol,
        );
        report.push_min(
            &format!("inverse semidefiniteness gap ({tag})"),
            direct::inverse_semidefiniteness_gap(&pot, z)?,
            -args.tol,
        );
        report.push_max(
            &format!("summation formula ({tag})"),
            direct::summation_identity_check(&pot, z, top)?,
            args.tol,
        );
        report.push_max(
            &format!("transfer representation of W ({tag})"),
            snode::check_fundamental_representation(&pot, z)?,
            args.tol,
        );
        // Closed-form resolvent row: defining equation and contraction.
        let row = snode::resolvent_row(&node, z)?;
        let lambda = Complex64::new(0.5, 0.0) / z;
        let defect = &row * (node.a() - mat::eye(node.a().nrows()) * lambda)
            - node.phi2().adjoint();
        report.push_max(
            &format!("resolvent row defining equation ({tag})"),
            mat::frob(&defect) / mat::frob(&row).max(1.0),
            args.tol,
        );
        let contraction = snode::resolvent_row_contraction(&node, z)?;
        let one = Complex64::new(1.0, 0.0);
        let qhat = (one - mat::I * z) / (one + mat::I * z);
        let expected = mat::eye(sig.m2()) * (mat::I * (one - qhat.powu(pot.len() as u32)));
        report.push_max(
            &format!("resolvent contraction closed form ({tag})"),
            mat::frob(&(&contraction - &expected)) / mat::frob(&expected).max(1.0),
            args.tol,
        );
        // Weyl value stays in the closed unit ball.
        let phi = direct::weyl_mobius(&pot, z, &direct::canonical_parameter(sig))?;
        report.push_max(
            &format!("Weyl non-expansiveness ({tag})"),
            mat::spectral_norm(&phi) - 1.0,
            args.tol,
        );
    }
    report.print();
    if let Some(path) = args.json_report {
        report.write(&path)?;
    }
    if report.pass {
        Ok(0)
    } else {
        eprintln!("identity suite failed");
        Ok(2)
    }
}

fn cmd_szego(args: SzegoArgs) -> Result<i32> {
    let tol = load_tolerance(args.tol);
    let doc = Document::read(&args.input)?;
    match doc.kind.as_str() {
        "schur" => {
            let seq = doc.to_schur()?;
            let (pot, _) = potential::schur_to_dirac(&seq)?;
            Document::from_potential(&pot)?.write(&args.output)?;
            println!("wrote potential document to {}", args.output.display());
        }
        "potential" => {
            let pot = doc.to_potential(tol)?;
            let seq = potential::dirac_to_schur(&pot)?;
            Document::from_schur(&seq)?.write(&args.output)?;
            println!("wrote schur document to {}", args.output.display());
        }
        other => {
            return Err(Error::Document(format!(
                "expected schur or potential, found kind '{other}'"
            )))
        }
    }
    Ok(0)
}
