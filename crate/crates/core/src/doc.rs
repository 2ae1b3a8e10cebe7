//! JSON interchange documents.
//!
//! Every document is a flat object {"kind", "m1", "m2", "data"} where data
//! is an array of matrices, a matrix is an array of rows, and every scalar
//! is a [re, im] pair. Floats are always written with 17 significant digits
//! so that emit -> parse -> emit is byte-identical; field order is fixed by
//! the struct layout.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jalgebra::{JUnitaryPositive, Signature};
use crate::mat::{self, CMat};
use crate::potential::{DiracPotential, SchurSequence};
use crate::snode::SNode;
use crate::taylor::TaylorData;

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

/// Validation tolerance for documents: the default can be overridden by the
/// DIRAC_LAB_TOL environment variable, and that in turn by an explicit flag.
pub fn load_tolerance(flag: Option<f64>) -> f64 {
    flag.or_else(|| {
        std::env::var("DIRAC_LAB_TOL")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(crate::jalgebra::DEFAULT_TOL)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub kind: String,
    pub m1: usize,
    pub m2: usize,
    pub data: Vec<JsonMatrix>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportCheck {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub kind: String,
    pub m1: usize,
    pub m2: usize,
    pub pass: bool,
    pub checks: Vec<ReportCheck>,
}

impl Report {
    pub fn new(sig: Signature) -> Self {
        Report {
            kind: "report".into(),
            m1: sig.m1(),
            m2: sig.m2(),
            pass: true,
            checks: Vec::new(),
        }
    }

    /// Record a residual-style check: passes when value <= threshold.
    pub fn push_max(&mut self, name: &str, value: f64, threshold: f64) {
        let pass = value.is_finite() && value <= threshold;
        self.pass &= pass;
        self.checks.push(ReportCheck {
            name: name.into(),
            value,
            threshold,
            pass,
        });
    }

    /// Record a lower-bound check: passes when value >= threshold.
    pub fn push_min(&mut self, name: &str, value: f64, threshold: f64) {
        let pass = value.is_finite() && value >= threshold;
        self.pass &= pass;
        self.checks.push(ReportCheck {
            name: name.into(),
            value,
            threshold,
            pass,
        });
    }

    pub fn print(&self) {
        for check in &self.checks {
            println!(
                "{} {:<40} {: >13.6e} (threshold {:.1e})",
                if check.pass { "PASS" } else { "FAIL" },
                check.name,
                check.value,
                check.threshold
            );
        }
    }
}

/// serde_json formatter printing every float with 17 significant digits.
struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }
}

fn to_canonical_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter);
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(out)
}

pub fn matrix_to_json(m: &CMat) -> Result<JsonMatrix> {
    if !mat::all_finite(m) {
        return Err(Error::Document("non-finite entry in matrix".into()));
    }
    Ok((0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect())
}

pub fn matrix_from_json(j: &JsonMatrix) -> Result<CMat> {
    let nrows = j.len();
    if nrows == 0 {
        return Err(Error::Document("empty matrix".into()));
    }
    let ncols = j[0].len();
    if ncols == 0 || j.iter().any(|row| row.len() != ncols) {
        return Err(Error::Document("ragged or empty matrix rows".into()));
    }
    let m = CMat::from_fn(nrows, ncols, |i, k| Complex64::new(j[i][k][0], j[i][k][1]));
    if !mat::all_finite(&m) {
        return Err(Error::Document("non-finite entry in matrix".into()));
    }
    Ok(m)
}

fn matrices_to_json(ms: &[&CMat]) -> Result<Vec<JsonMatrix>> {
    ms.iter().map(|m| matrix_to_json(m)).collect()
}

impl Document {
    pub fn sig(&self) -> Result<Signature> {
        Signature::new(self.m1, self.m2)
    }

    pub fn from_schur(seq: &SchurSequence) -> Result<Self> {
        let refs: Vec<&CMat> = seq.coefficients().iter().collect();
        Ok(Document {
            kind: "schur".into(),
            m1: seq.sig().m1(),
            m2: seq.sig().m2(),
            data: matrices_to_json(&refs)?,
        })
    }

    pub fn from_potential(pot: &DiracPotential) -> Result<Self> {
        let mats: Vec<&CMat> = pot.matrices().iter().map(|c| c.entries()).collect();
        Ok(Document {
            kind: "potential".into(),
            m1: pot.sig().m1(),
            m2: pot.sig().m2(),
            data: matrices_to_json(&mats)?,
        })
    }

    pub fn from_taylor(data: &TaylorData) -> Result<Self> {
        let refs: Vec<&CMat> = data.coefficients().iter().collect();
        Ok(Document {
            kind: "taylor".into(),
            m1: data.sig().m1(),
            m2: data.sig().m2(),
            data: matrices_to_json(&refs)?,
        })
    }

    /// S-node dump: the S, Pi and A blocks in that order.
    pub fn from_snode(node: &SNode) -> Result<Self> {
        Ok(Document {
            kind: "snode".into(),
            m1: node.sig().m1(),
            m2: node.sig().m2(),
            data: matrices_to_json(&[node.s(), node.pi(), node.a()])?,
        })
    }

    pub fn to_schur(&self) -> Result<SchurSequence> {
        if self.kind != "schur" {
            return Err(Error::Document(format!(
                "expected a schur document, found kind '{}'",
                self.kind
            )));
        }
        let sig = self.sig()?;
        let rho = self
            .data
            .iter()
            .map(matrix_from_json)
            .collect::<Result<Vec<_>>>()?;
        SchurSequence::new(sig, rho)
    }

    pub fn to_potential(&self, tol: f64) -> Result<DiracPotential> {
        if self.kind != "potential" {
            return Err(Error::Document(format!(
                "expected a potential document, found kind '{}'",
                self.kind
            )));
        }
        let sig = self.sig()?;
        let cs = self
            .data
            .iter()
            .map(|j| {
                let m = matrix_from_json(j)?;
                JUnitaryPositive::with_tol(m, sig, tol)
            })
            .collect::<Result<Vec<_>>>()?;
        DiracPotential::new(sig, cs)
    }

    pub fn to_taylor(&self) -> Result<TaylorData> {
        if self.kind != "taylor" {
            return Err(Error::Document(format!(
                "expected a taylor document, found kind '{}'",
                self.kind
            )));
        }
        let sig = self.sig()?;
        let phi = self
            .data
            .iter()
            .map(matrix_from_json)
            .collect::<Result<Vec<_>>>()?;
        TaylorData::new(sig, phi)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        to_canonical_json(self)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

impl Report {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        to_canonical_json(self)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }
}
