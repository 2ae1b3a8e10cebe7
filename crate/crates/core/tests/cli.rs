//! End-to-end tests of the dirac-lab binary: exit codes, determinism, and
//! the document pipeline.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dirac-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

struct TempDir(PathBuf);

impl TempDir {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!(
            "dirac-lab-test-{tag}-{}-{:?}",
            std::process::id(),
            std::thread::current().id()
        ));
        std::fs::create_dir_all(&dir).unwrap();
        TempDir(dir)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn gen(dir: &TempDir, name: &str, seed: u64, r: usize, m1: usize, m2: usize, norm: f64) -> PathBuf {
    let path = dir.path(name);
    let out = run(&[
        "gen",
        "--seed",
        &seed.to_string(),
        "--r",
        &r.to_string(),
        "--m1",
        &m1.to_string(),
        "--m2",
        &m2.to_string(),
        "--max-norm",
        &norm.to_string(),
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "gen failed: {out:?}");
    path
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn gen_is_deterministic_and_validates_flags() {
    let dir = TempDir::new("gen");
    let a = gen(&dir, "a.json", 7, 5, 2, 1, 0.8);
    let b = gen(&dir, "b.json", 7, 5, 2, 1, 0.8);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let doc = read_json(&a);
    assert_eq!(doc["kind"], "schur");
    assert_eq!(doc["data"].as_array().unwrap().len(), 6);
    assert_eq!(doc["data"][0].as_array().unwrap().len(), 2);
    assert_eq!(doc["data"][0][0].as_array().unwrap().len(), 1);

    let out = run(&[
        "gen", "--seed", "1", "--r", "2", "--m1", "1", "--m2", "1", "--max-norm", "1.2",
        "--output", dir.path("c.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn forward_invert_pipeline_round_trips() {
    let dir = TempDir::new("pipeline");
    let schur = gen(&dir, "seq.json", 7, 5, 2, 1, 0.6);

    let taylor = dir.path("taylor.json");
    let snode = dir.path("snode.json");
    let out = run(&[
        "forward",
        "--input",
        schur.to_str().unwrap(),
        "--output",
        taylor.to_str().unwrap(),
        "--dump-snode",
        snode.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "forward failed: {out:?}");
    assert_eq!(read_json(&taylor)["kind"], "taylor");
    let snode_doc = read_json(&snode);
    assert_eq!(snode_doc["kind"], "snode");
    assert_eq!(snode_doc["data"].as_array().unwrap().len(), 3);

    let recovered = dir.path("recovered.json");
    let out = run(&[
        "invert",
        "--input",
        taylor.to_str().unwrap(),
        "--output",
        recovered.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "invert failed: {out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("min eig(S)"));

    // Convert the generated sequence independently and compare documents.
    let potential = dir.path("potential.json");
    let out = run(&[
        "szego",
        "--input",
        schur.to_str().unwrap(),
        "--output",
        potential.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let direct = read_json(&potential);
    let via_taylor = read_json(&recovered);
    let a = direct["data"].as_array().unwrap();
    let b = via_taylor["data"].as_array().unwrap();
    assert_eq!(a.len(), b.len());
    for (ma, mb) in a.iter().zip(b) {
        for (ra, rb) in ma.as_array().unwrap().iter().zip(mb.as_array().unwrap()) {
            for (ea, eb) in ra.as_array().unwrap().iter().zip(rb.as_array().unwrap()) {
                for idx in 0..2 {
                    let va = ea[idx].as_f64().unwrap();
                    let vb = eb[idx].as_f64().unwrap();
                    assert!((va - vb).abs() < 1e-8 * va.abs().max(1.0));
                }
            }
        }
    }

    // Forward from the potential document gives the same Taylor data.
    let taylor2 = dir.path("taylor2.json");
    let out = run(&[
        "forward",
        "--input",
        potential.to_str().unwrap(),
        "--output",
        taylor2.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        std::fs::read(&taylor).unwrap(),
        std::fs::read(&taylor2).unwrap()
    );
}

#[test]
fn szego_round_trips_through_documents() {
    let dir = TempDir::new("szego");
    let schur = gen(&dir, "seq.json", 3, 4, 1, 2, 0.7);
    let potential = dir.path("potential.json");
    let back = dir.path("back.json");
    assert_eq!(
        run(&["szego", "--input", schur.to_str().unwrap(), "--output", potential.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        run(&["szego", "--input", potential.to_str().unwrap(), "--output", back.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let orig = read_json(&schur);
    let round = read_json(&back);
    assert_eq!(round["kind"], "schur");
    let a = orig["data"].as_array().unwrap();
    let b = round["data"].as_array().unwrap();
    for (ma, mb) in a.iter().zip(b) {
        for (ra, rb) in ma.as_array().unwrap().iter().zip(mb.as_array().unwrap()) {
            for (ea, eb) in ra.as_array().unwrap().iter().zip(rb.as_array().unwrap()) {
                for idx in 0..2 {
                    let va = ea[idx].as_f64().unwrap();
                    let vb = eb[idx].as_f64().unwrap();
                    assert!((va - vb).abs() < 1e-9);
                }
            }
        }
    }
}

#[test]
fn invert_rejects_expansive_leading_coefficient() {
    let dir = TempDir::new("reject");
    // Hand-built Taylor document with |phi_0| > 1.
    let text = r#"{"kind":"taylor","m1":1,"m2":1,"data":[[[[1.5e0,0.0e0]]]]}"#;
    let input = dir.path("bad.json");
    std::fs::write(&input, text).unwrap();
    let out = run(&[
        "invert",
        "--input",
        input.to_str().unwrap(),
        "--output",
        dir.path("out.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("level 0"), "stderr: {err}");
}

#[test]
fn verify_passes_valid_and_rejects_perturbed() {
    let dir = TempDir::new("verify");
    let schur = gen(&dir, "seq.json", 5, 5, 1, 1, 0.6);
    let potential = dir.path("potential.json");
    run(&["szego", "--input", schur.to_str().unwrap(), "--output", potential.to_str().unwrap()]);

    let report = dir.path("report.json");
    let out = run(&[
        "verify",
        "--input",
        potential.to_str().unwrap(),
        "--json-report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "verify failed: {out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("PASS"));
    assert!(!text.contains("FAIL"));
    let rep = read_json(&report);
    assert_eq!(rep["kind"], "report");
    assert_eq!(rep["pass"], true);

    // Break j-unitarity by 1e-3: rejected at load time with exit 1.
    let mut doc = read_json(&potential);
    let entry = doc["data"][0][0][0][0].as_f64().unwrap();
    doc["data"][0][0][0][0] = serde_json::json!(entry + 1e-3);
    let broken = dir.path("broken.json");
    std::fs::write(&broken, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = run(&["verify", "--input", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_honors_tolerance_env_var() {
    let dir = TempDir::new("envtol");
    let schur = gen(&dir, "seq.json", 5, 3, 1, 1, 0.6);
    let potential = dir.path("potential.json");
    run(&["szego", "--input", schur.to_str().unwrap(), "--output", potential.to_str().unwrap()]);
    let mut doc = read_json(&potential);
    let entry = doc["data"][0][0][0][0].as_f64().unwrap();
    doc["data"][0][0][0][0] = serde_json::json!(entry + 1e-6);
    let nudged = dir.path("nudged.json");
    std::fs::write(&nudged, serde_json::to_string(&doc).unwrap()).unwrap();

    // Default tolerance rejects the perturbation.
    let out = run(&["verify", "--input", nudged.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    // A loose env tolerance lets it load (the identity suite may still fail,
    // which is a numerical exit, not a validation one).
    let out = bin()
        .args(["verify", "--input", nudged.to_str().unwrap()])
        .env("DIRAC_LAB_TOL", "1e-3")
        .output()
        .unwrap();
    assert_ne!(out.status.code(), Some(1));
}

#[test]
fn roundtrip_command_reports() {
    let dir = TempDir::new("roundtrip");
    let report = dir.path("report.json");
    let out = run(&[
        "roundtrip",
        "--seed", "3", "--r", "6", "--m1", "2", "--m2", "1", "--max-norm", "0.6",
        "--json-report", report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "roundtrip failed: {out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("roundtrip blockwise relative deviation"));
    let rep = read_json(&report);
    assert_eq!(rep["pass"], true);

    // Degenerate single-step case.
    let out = run(&[
        "roundtrip", "--seed", "1", "--r", "0", "--m1", "1", "--m2", "1", "--max-norm", "0.5",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn unknown_kind_is_a_validation_error() {
    let dir = TempDir::new("kind");
    let schur = gen(&dir, "seq.json", 2, 2, 1, 1, 0.5);
    let out = run(&[
        "invert",
        "--input",
        schur.to_str().unwrap(),
        "--output",
        dir.path("out.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}
