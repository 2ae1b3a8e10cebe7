//! j-metric linear algebra.
//!
//! The indefinite metric is fixed by the signature matrix
//! j = diag(I_{m1}, -I_{m2}). This module provides fractional powers of
//! Hermitian positive matrices (which preserve positivity and j-unitarity),
//! the Halmos extension of a strict contraction and its inverse, and the
//! beta/gamma row factorizations
//!
//!   C = 2 beta* beta - j,  beta j beta* =  I_{m1},
//!   C = j + 2 gamma* gamma, gamma j gamma* = -I_{m2},
//!
//! where beta and gamma are the top and bottom block rows of C^{1/2}.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mat::{self, CMat};

/// Default relative tolerance for class-membership checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Margin excluding spectral norms within 1e-12 of 1 from the contractive class.
const CONTRACTION_MARGIN: f64 = 1e-12;

/// Block sizes (m1, m2) of the indefinite metric j = diag(I_{m1}, -I_{m2}).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature {
    m1: usize,
    m2: usize,
}

impl Signature {
    pub fn new(m1: usize, m2: usize) -> Result<Self> {
        if m1 == 0 || m2 == 0 {
            return Err(Error::InvalidSignature { m1, m2 });
        }
        Ok(Signature { m1, m2 })
    }

    pub fn m1(&self) -> usize {
        self.m1
    }

    pub fn m2(&self) -> usize {
        self.m2
    }

    /// Total order m = m1 + m2.
    pub fn m(&self) -> usize {
        self.m1 + self.m2
    }

    /// The signature matrix diag(I_{m1}, -I_{m2}).
    pub fn matrix(&self) -> CMat {
        CMat::from_fn(self.m(), self.m(), |i, j| {
            if i != j {
                Complex64::new(0.0, 0.0)
            } else if i < self.m1 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(-1.0, 0.0)
            }
        })
    }

    /// Selector [I_{m1} 0] of the first block row.
    pub fn upper_selector(&self) -> CMat {
        mat::hcat(&[&mat::eye(self.m1), &CMat::zeros(self.m1, self.m2)])
    }

    /// Selector [0 I_{m2}] of the second block row.
    pub fn lower_selector(&self) -> CMat {
        mat::hcat(&[&CMat::zeros(self.m2, self.m1), &mat::eye(self.m2)])
    }
}

/// An m x m Hermitian positive-definite matrix C with C j C = j.
///
/// Construction validates all three class properties to a relative tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct JUnitaryPositive {
    sig: Signature,
    entries: CMat,
}

impl JUnitaryPositive {
    /// Validate with the default tolerance.
    pub fn new(entries: CMat, sig: Signature) -> Result<Self> {
        Self::with_tol(entries, sig, DEFAULT_TOL)
    }

    /// Validate with an explicit relative tolerance.
    pub fn with_tol(entries: CMat, sig: Signature, tol: f64) -> Result<Self> {
        let m = sig.m();
        if entries.nrows() != m || entries.ncols() != m {
            return Err(Error::Dimension {
                what: "j-unitary positive matrix",
                expected: format!("{m}x{m}"),
                got: format!("{}x{}", entries.nrows(), entries.ncols()),
            });
        }
        if !mat::all_finite(&entries) {
            return Err(Error::Document("non-finite matrix entry".into()));
        }
        let scale = mat::frob(&entries).max(1.0);
        let herm = mat::hermiticity_residual(&entries);
        if herm > tol {
            return Err(Error::NotHermitian {
                residual: herm,
                tol,
            });
        }
        // The j-unitarity residual is quadratic in C, so it is measured
        // relative to ||C||^2.
        let j = sig.matrix();
        let resid = mat::frob(&(&entries * &j * &entries - &j)) / (scale * scale);
        if resid > tol {
            return Err(Error::NotJUnitary {
                residual: resid,
                tol,
            });
        }
        // Positivity. Class members have reciprocal eigenvalue pairs, so for
        // large norms the smallest eigenvalue sits below the eigensolver's
        // absolute noise floor. A Hermitian j-unitary matrix is positive
        // exactly when both diagonal blocks are, and those blocks are >= I
        // for class members, which keeps the test well above the noise.
        if scale <= 1e6 {
            let min_eig = mat::min_eigenvalue(&entries);
            if min_eig <= 0.0 {
                return Err(Error::NotPositiveDefinite { min_eig });
            }
        } else {
            let c11 = mat::block(&entries, 0, 0, sig.m1(), sig.m1());
            let c22 = mat::block(&entries, sig.m1(), sig.m1(), sig.m2(), sig.m2());
            let min_block = mat::min_eigenvalue(&c11).min(mat::min_eigenvalue(&c22));
            if min_block <= 0.0 {
                return Err(Error::NotPositiveDefinite { min_eig: min_block });
            }
        }
        Ok(JUnitaryPositive { sig, entries })
    }

    /// The identity matrix, which is trivially in the class.
    pub fn identity(sig: Signature) -> Self {
        JUnitaryPositive {
            sig,
            entries: mat::eye(sig.m()),
        }
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn sig(&self) -> Signature {
        self.sig
    }

    /// Principal square root; stays in the class.
    pub fn sqrt(&self) -> CMat {
        // Invariants were validated at construction, so the power cannot fail.
        hermitian_power(&self.entries, 0.5).expect("validated matrix has a square root")
    }
}

/// C^s for Hermitian positive-definite C, via unitary eigendecomposition.
///
/// The input is Hermitian-symmetrized before decomposing to suppress roundoff
/// drift. Fails if the input is non-Hermitian beyond the default tolerance or
/// has a non-positive eigenvalue. If C is j-unitary, so is the result.
pub fn hermitian_power(c: &CMat, s: f64) -> Result<CMat> {
    hermitian_power_with_tol(c, s, DEFAULT_TOL)
}

pub fn hermitian_power_with_tol(c: &CMat, s: f64, tol: f64) -> Result<CMat> {
    if c.nrows() != c.ncols() {
        return Err(Error::Dimension {
            what: "hermitian power",
            expected: "square matrix".into(),
            got: format!("{}x{}", c.nrows(), c.ncols()),
        });
    }
    let herm = mat::hermiticity_residual(c);
    if herm > tol {
        return Err(Error::NotHermitian {
            residual: herm,
            tol,
        });
    }
    let (mut vals, vecs) = mat::hermitian_eigen(c);
    let n = c.nrows();
    // Eigenvalues are computed to absolute accuracy eps * ||C||. Class
    // members with reciprocal eigenvalue pairs can have true eigenvalues
    // below that floor; for nonnegative powers those directions contribute
    // nothing at entry level, so values inside the noise band are clamped
    // rather than rejected. Negative powers must fail instead.
    let noise = 1e-12 * mat::frob(c).max(1.0) * n as f64;
    if vals[0] <= 0.0 {
        if s >= 0.0 && vals[0] > -noise {
            for v in vals.iter_mut() {
                if *v < noise {
                    *v = noise;
                }
            }
        } else {
            return Err(Error::NotPositiveDefinite { min_eig: vals[0] });
        }
    }
    let d = CMat::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(vals[i].powf(s), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let powered = &vecs * d * vecs.adjoint();
    Ok(mat::herm_part(&powered))
}

/// Halmos extension of a strict contraction rho (m1 x m2):
///
///   D H,  H = [[I, rho], [rho*, I]],
///   D = diag((I - rho rho*)^{-1/2}, (I - rho* rho)^{-1/2}).
///
/// The result is positive and j-unitary for the signature (m1, m2).
pub fn halmos_extension(rho: &CMat) -> Result<JUnitaryPositive> {
    let sig = Signature::new(rho.nrows(), rho.ncols())?;
    let norm = mat::spectral_norm(rho);
    if !norm.is_finite() || norm >= 1.0 - CONTRACTION_MARGIN {
        return Err(Error::NotContractive { norm });
    }
    let (m1, m2) = (sig.m1(), sig.m2());
    let gram1 = mat::eye(m1) - rho * rho.adjoint();
    let gram2 = mat::eye(m2) - rho.adjoint() * rho;
    let d1 = hermitian_power(&gram1, -0.5)?;
    let d2 = hermitian_power(&gram2, -0.5)?;
    let h = mat::block2x2(&mat::eye(m1), rho, &rho.adjoint(), &mat::eye(m2));
    let d = mat::block2x2(&d1, &CMat::zeros(m1, m2), &CMat::zeros(m2, m1), &d2);
    // D and H commute, so D H is Hermitian up to roundoff; symmetrize.
    let extension = mat::herm_part(&(d * h));
    JUnitaryPositive::with_tol(extension, sig, 1e-8)
}

/// Inverse of the Halmos extension: the strict contraction rho with
/// `halmos_extension(rho) == c`, read off the block partition as
/// rho = c11^{-1} c12.
///
/// Fails if the reconstruction `halmos_extension(rho)` does not reproduce
/// the input within `DEFAULT_TOL` relative error, which signals an input
/// outside the positive j-unitary class.
pub fn halmos_decompose(c: &JUnitaryPositive) -> Result<CMat> {
    halmos_decompose_with_tol(c, DEFAULT_TOL)
}

pub fn halmos_decompose_with_tol(c: &JUnitaryPositive, tol: f64) -> Result<CMat> {
    let sig = c.sig();
    let (m1, m2) = (sig.m1(), sig.m2());
    let c11 = mat::block(c.entries(), 0, 0, m1, m1);
    let c12 = mat::block(c.entries(), 0, m1, m1, m2);
    // c11 = (I - rho rho*)^{-1/2} is Hermitian positive definite.
    let chol = mat::herm_part(&c11)
        .cholesky()
        .ok_or(Error::Singular("upper-left block of Halmos decomposition"))?;
    let rho = chol.solve(&c12);
    let norm = mat::spectral_norm(&rho);
    if !norm.is_finite() || norm >= 1.0 {
        return Err(Error::NotContractive { norm });
    }
    let rebuilt = halmos_extension(&rho)?;
    let residual =
        mat::frob(&(rebuilt.entries() - c.entries())) / mat::frob(c.entries()).max(1.0);
    if residual > tol {
        return Err(Error::DecompositionResidual { residual, tol });
    }
    Ok(rho)
}

/// Row factors beta = [I 0] C^{1/2} (m1 x m) and gamma = [0 I] C^{1/2} (m2 x m),
/// satisfying C = 2 beta* beta - j = j + 2 gamma* gamma and
/// beta j beta* = I, gamma j gamma* = -I.
pub fn beta_gamma(c: &JUnitaryPositive) -> Result<(CMat, CMat)> {
    let sig = c.sig();
    let root = hermitian_power(c.entries(), 0.5)?;
    let beta = mat::block(&root, 0, 0, sig.m1(), sig.m());
    let gamma = mat::block(&root, sig.m1(), 0, sig.m2(), sig.m());
    Ok((beta, gamma))
}
