//! Dirac potentials, Schur coefficient sequences, and the bijection between
//! them.
//!
//! A Dirac potential is a finite sequence {C_k} of positive j-unitary
//! matrices driving the recursion y_{k+1} = (I + i z j C_k) y_k. A Schur
//! sequence is a finite sequence {rho_k} of strictly contractive m1 x m2
//! matrices driving the Szego recurrence. The two are in bijection through
//! the j-unitary chain
//!
//!   U_0 = I,  U_{k+1} = U_k (i Ct_k j),  C_k = j U_{k+1} U_{k+1}* j,
//!
//! where Ct_k is the Halmos extension of rho_k; the inverse direction reads
//! Ct_k = (j U_k* C_k U_k j)^{1/2} and peels rho_k off by Halmos
//! decomposition.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::jalgebra::{self, JUnitaryPositive, Signature};
use crate::mat::{self, CMat};

/// Finite sequence of strictly contractive m1 x m2 Schur coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurSequence {
    sig: Signature,
    rho: Vec<CMat>,
}

impl SchurSequence {
    pub fn new(sig: Signature, rho: Vec<CMat>) -> Result<Self> {
        for (k, r) in rho.iter().enumerate() {
            if r.nrows() != sig.m1() || r.ncols() != sig.m2() {
                return Err(Error::Dimension {
                    what: "Schur coefficient",
                    expected: format!("{}x{}", sig.m1(), sig.m2()),
                    got: format!("{}x{} at index {k}", r.nrows(), r.ncols()),
                });
            }
            let norm = mat::spectral_norm(r);
            if !norm.is_finite() || norm >= 1.0 {
                return Err(Error::NotContractive { norm });
            }
        }
        Ok(SchurSequence { sig, rho })
    }

    pub fn sig(&self) -> Signature {
        self.sig
    }

    pub fn coefficients(&self) -> &[CMat] {
        &self.rho
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }
}

/// Finite sequence {C_k} of positive j-unitary matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracPotential {
    sig: Signature,
    c: Vec<JUnitaryPositive>,
}

impl DiracPotential {
    pub fn new(sig: Signature, c: Vec<JUnitaryPositive>) -> Result<Self> {
        for (k, ck) in c.iter().enumerate() {
            if ck.sig() != sig {
                return Err(Error::Dimension {
                    what: "potential matrix",
                    expected: format!("signature ({}, {})", sig.m1(), sig.m2()),
                    got: format!(
                        "signature ({}, {}) at index {k}",
                        ck.sig().m1(),
                        ck.sig().m2()
                    ),
                });
            }
        }
        Ok(DiracPotential { sig, c })
    }

    /// The identity potential C_k = I of the given length.
    pub fn trivial(sig: Signature, len: usize) -> Self {
        DiracPotential {
            sig,
            c: vec![JUnitaryPositive::identity(sig); len],
        }
    }

    pub fn sig(&self) -> Signature {
        self.sig
    }

    pub fn matrices(&self) -> &[JUnitaryPositive] {
        &self.c
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    /// Restriction to the first `len` matrices.
    pub fn truncate(&self, len: usize) -> Self {
        DiracPotential {
            sig: self.sig,
            c: self.c[..len.min(self.c.len())].to_vec(),
        }
    }
}

/// The j-unitary chain U_0 = I, ..., U_{r+1} accumulated by the bijection.
#[derive(Debug, Clone, PartialEq)]
pub struct UChain {
    sig: Signature,
    u: Vec<CMat>,
}

impl UChain {
    pub fn sig(&self) -> Signature {
        self.sig
    }

    /// U_0 ... U_{r+1}; U_0 is the identity.
    pub fn links(&self) -> &[CMat] {
        &self.u
    }
}

/// Map a Schur sequence to the Dirac potential it generates, together with
/// the accumulated chain {U_k}:
///
///   Ct_k = halmos_extension(rho_k),  U_{k+1} = U_k (i Ct_k j),
///   C_k  = j U_{k+1} U_{k+1}* j.
pub fn schur_to_dirac(seq: &SchurSequence) -> Result<(DiracPotential, UChain)> {
    let sig = seq.sig();
    let j = sig.matrix();
    let mut u = vec![mat::eye(sig.m())];
    let mut c = Vec::with_capacity(seq.len());
    for rho in seq.coefficients() {
        let ext = jalgebra::halmos_extension(rho)?;
        let u_next = u.last().unwrap() * (ext.entries() * &j * mat::I);
        let ck = &j * (&u_next * u_next.adjoint()) * &j;
        c.push(JUnitaryPositive::with_tol(mat::herm_part(&ck), sig, 1e-8)?);
        u.push(u_next);
    }
    Ok((DiracPotential::new(sig, c)?, UChain { sig, u }))
}

/// Inverse of [`schur_to_dirac`]: peel the Schur coefficients off a
/// potential by Ct_k = (j U_k* C_k U_k j)^{1/2} followed by Halmos
/// decomposition, rebuilding the chain as it goes.
pub fn dirac_to_schur(pot: &DiracPotential) -> Result<SchurSequence> {
    let sig = pot.sig();
    let j = sig.matrix();
    let mut u = mat::eye(sig.m());
    let mut rho = Vec::with_capacity(pot.len());
    // The conjugation by U_k cancels factors of size ||U_k||, so roundoff in
    // the intermediates grows with the chain. Class checks on them are
    // deliberately loose; positivity of the conjugated matrix is the hard
    // gate that rejects inputs outside the class.
    for ck in pot.matrices() {
        let conjugated = mat::herm_part(&(&j * u.adjoint() * ck.entries() * &u * &j));
        let root = jalgebra::hermitian_power_with_tol(&conjugated, 0.5, 1e-2)?;
        let tilde = JUnitaryPositive::with_tol(root, sig, 1e-2)?;
        let rho_k = jalgebra::halmos_decompose_with_tol(&tilde, 1e-2)?;
        // Rebuild the chain factor from the extracted coefficient so the
        // accumulated chain retraces the forward construction.
        let clean = jalgebra::halmos_extension(&rho_k)?;
        u = &u * (clean.entries() * &j * mat::I);
        rho.push(rho_k);
    }
    SchurSequence::new(sig, rho)
}

/// Deterministic random Schur sequence: complex Gaussian entries, rescaled
/// onto the ball of spectral norm `max_norm` whenever they land outside it.
pub fn random_schur(seed: u64, r: usize, sig: Signature, max_norm: f64) -> Result<SchurSequence> {
    if !(max_norm > 0.0 && max_norm < 1.0) {
        return Err(Error::BadParameter(format!(
            "max_norm must lie in (0, 1), got {max_norm}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let mut rho = Vec::with_capacity(r + 1);
    for _ in 0..=r {
        let mut m = CMat::zeros(sig.m1(), sig.m2());
        for i in 0..sig.m1() {
            for j in 0..sig.m2() {
                let re: f64 = normal.sample(&mut rng);
                let im: f64 = normal.sample(&mut rng);
                m[(i, j)] = Complex64::new(re, im);
            }
        }
        let norm = mat::spectral_norm(&m);
        if norm > max_norm {
            m *= Complex64::new(max_norm / norm, 0.0);
        }
        rho.push(m);
    }
    SchurSequence::new(sig, rho)
}

/// One Szego step: X_{k+1} = Ct_k diag(lambda I_{m1}, I_{m2}) X_k,
/// with Ct_k the Halmos extension of rho_k.
pub fn szego_step(rho: &CMat, x: &CMat, lambda: Complex64) -> Result<CMat> {
    let ext = jalgebra::halmos_extension(rho)?;
    let sig = ext.sig();
    if x.nrows() != sig.m() {
        return Err(Error::Dimension {
            what: "Szego step state",
            expected: format!("{} rows", sig.m()),
            got: format!("{} rows", x.nrows()),
        });
    }
    let lam = CMat::from_fn(sig.m(), sig.m(), |i, j| {
        if i != j {
            Complex64::new(0.0, 0.0)
        } else if i < sig.m1() {
            lambda
        } else {
            Complex64::new(1.0, 0.0)
        }
    });
    Ok(ext.entries() * lam * x)
}

/// One Dirac step: y_{k+1} = (I + i z j C_k) y_k.
pub fn dirac_step(ck: &JUnitaryPositive, y: &CMat, z: Complex64) -> Result<CMat> {
    let sig = ck.sig();
    if y.nrows() != sig.m() {
        return Err(Error::Dimension {
            what: "Dirac step state",
            expected: format!("{} rows", sig.m()),
            got: format!("{} rows", y.nrows()),
        });
    }
    let factor = mat::eye(sig.m()) + sig.matrix() * ck.entries() * (mat::I * z);
    Ok(factor * y)
}

/// Transform Szego solutions into Dirac solutions:
///
///   y_k(z) = (i + z)^k U_k (I + i z j) X_k(lambda),  lambda = (z - i)/(z + i).
///
/// `xs[k]` must hold X_k evaluated at that lambda. The output satisfies the
/// Dirac recursion with C_k = j U_{k+1} U_{k+1}* j.
pub fn transform_solution(chain: &UChain, xs: &[CMat], z: Complex64) -> Result<Vec<CMat>> {
    if (z + mat::I).norm() == 0.0 {
        return Err(Error::BadPoint("z = -i is outside the transform domain".into()));
    }
    if xs.len() > chain.links().len() {
        return Err(Error::Dimension {
            what: "Szego solution sequence",
            expected: format!("at most {} entries", chain.links().len()),
            got: format!("{} entries", xs.len()),
        });
    }
    let sig = chain.sig();
    let shear = mat::eye(sig.m()) + sig.matrix() * (mat::I * z);
    let mut out = Vec::with_capacity(xs.len());
    let mut power = Complex64::new(1.0, 0.0);
    for (k, x) in xs.iter().enumerate() {
        out.push(&chain.links()[k] * &shear * x * power);
        power *= mat::I + z;
    }
    Ok(out)
}
