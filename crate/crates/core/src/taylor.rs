//! Taylor coefficients of the Weyl function in the disk variable.
//!
//! The disk variable zeta is attached to the spectral variable by
//! z = i (1 - zeta)/(1 + zeta), which maps the open unit disk onto the upper
//! half-plane with zeta = 0 going to z = i. The first r+1 coefficients of
//! phi(z(zeta)) at zeta = 0 are shared by every Weyl function of the system
//! on [0, r] and determine the potential.
//!
//! Two routes are provided: an algebraic one reading the coefficients off
//! the Pi block of the S-node, and a numeric one sampling the interval Weyl
//! function on a small circle and applying the discrete Cauchy integral.
//! Circle sampling is used instead of finite differences because the
//! interval form stays regular at z = i and the error decays exponentially
//! in the sample count for analytic functions.

use num_complex::Complex64;

use crate::direct;
use crate::error::{Error, Result};
use crate::jalgebra::Signature;
use crate::mat::{self, CMat};
use crate::potential::DiracPotential;
use crate::snode;

/// Taylor coefficients phi_0 ... phi_r of the disk-variable Weyl function;
/// each block is m2 x m1.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorData {
    sig: Signature,
    phi: Vec<CMat>,
}

impl TaylorData {
    pub fn new(sig: Signature, phi: Vec<CMat>) -> Result<Self> {
        for (k, p) in phi.iter().enumerate() {
            if p.nrows() != sig.m2() || p.ncols() != sig.m1() {
                return Err(Error::Dimension {
                    what: "Taylor coefficient",
                    expected: format!("{}x{}", sig.m2(), sig.m1()),
                    got: format!("{}x{} at index {k}", p.nrows(), p.ncols()),
                });
            }
        }
        Ok(TaylorData { sig, phi })
    }

    pub fn zeros(sig: Signature, len: usize) -> Self {
        TaylorData {
            sig,
            phi: vec![CMat::zeros(sig.m2(), sig.m1()); len],
        }
    }

    pub fn sig(&self) -> Signature {
        self.sig
    }

    pub fn coefficients(&self) -> &[CMat] {
        &self.phi
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    /// The first `len` coefficients.
    pub fn truncate(&self, len: usize) -> Self {
        TaylorData {
            sig: self.sig,
            phi: self.phi[..len.min(self.phi.len())].to_vec(),
        }
    }

    /// Data extended by one further coefficient.
    pub fn extended(&self, next: CMat) -> Result<Self> {
        let mut phi = self.phi.clone();
        phi.push(next);
        TaylorData::new(self.sig, phi)
    }
}

/// z = i (1 - zeta)/(1 + zeta); maps the open unit disk onto C+.
pub fn disk_to_halfplane(zeta: Complex64) -> Result<Complex64> {
    let denom = Complex64::new(1.0, 0.0) + zeta;
    if denom.norm() == 0.0 {
        return Err(Error::BadPoint("zeta = -1 maps to infinity".into()));
    }
    Ok(mat::I * (Complex64::new(1.0, 0.0) - zeta) / denom)
}

/// Invert the cumulative-sum layout of the Pi block: given
/// Phi_{r,1} = -[phi_0; phi_0+phi_1; ...], recover the phi_k exactly by
/// telescoping.
pub fn taylor_from_phi_stack(phi1: &CMat, sig: Signature) -> Result<TaylorData> {
    let m2 = sig.m2();
    if phi1.ncols() != sig.m1() || !phi1.nrows().is_multiple_of(m2) || phi1.nrows() == 0 {
        return Err(Error::Dimension {
            what: "Phi stack",
            expected: format!("nonempty k*{} x {}", m2, sig.m1()),
            got: format!("{}x{}", phi1.nrows(), phi1.ncols()),
        });
    }
    let levels = phi1.nrows() / m2;
    let mut phi = Vec::with_capacity(levels);
    phi.push(-mat::block(phi1, 0, 0, m2, sig.m1()));
    for k in 1..levels {
        let prev = mat::block(phi1, (k - 1) * m2, 0, m2, sig.m1());
        let cur = mat::block(phi1, k * m2, 0, m2, sig.m1());
        phi.push(prev - cur);
    }
    TaylorData::new(sig, phi)
}

/// Algebraic route: coefficients read off the S-node of the potential.
pub fn taylor_algebraic(pot: &DiracPotential) -> Result<TaylorData> {
    let node = snode::build_snode(pot)?;
    taylor_from_phi_stack(&node.phi1(), pot.sig())
}

/// Default sampling radius for [`taylor_numeric`].
pub const DEFAULT_RADIUS: f64 = 0.1;
/// Default sample count for [`taylor_numeric`].
pub const DEFAULT_SAMPLES: usize = 64;

/// Numeric route with the canonical parameter.
pub fn taylor_numeric(pot: &DiracPotential, radius: f64, samples: usize) -> Result<TaylorData> {
    taylor_numeric_with_param(
        pot,
        radius,
        samples,
        &direct::canonical_parameter(pot.sig()),
    )
}

/// Numeric route: sample the interval Weyl function at
/// zeta_j = radius e^{2 pi i j / samples}, then recover the coefficients by
/// the inverse discrete Fourier transform divided by radius^k. Coefficients
/// beyond index r are not determined by the interval and are discarded.
pub fn taylor_numeric_with_param(
    pot: &DiracPotential,
    radius: f64,
    samples: usize,
    param: &CMat,
) -> Result<TaylorData> {
    let sig = pot.sig();
    if !(radius > 0.0 && radius < 1.0) {
        return Err(Error::BadParameter(format!(
            "sampling radius must lie in (0, 1), got {radius}"
        )));
    }
    if samples < 2 * pot.len() {
        return Err(Error::BadParameter(format!(
            "need at least {} samples for {} coefficients, got {samples}",
            2 * pot.len(),
            pot.len()
        )));
    }
    let mut values = Vec::with_capacity(samples);
    for jdx in 0..samples {
        let angle = 2.0 * std::f64::consts::PI * jdx as f64 / samples as f64;
        let zeta = Complex64::from_polar(radius, angle);
        let z = disk_to_halfplane(zeta)?;
        values.push(direct::weyl_mobius_interval(pot, z, param)?);
    }
    let mut phi = Vec::with_capacity(pot.len());
    for k in 0..pot.len() {
        let mut acc = CMat::zeros(sig.m2(), sig.m1());
        for (jdx, value) in values.iter().enumerate() {
            let angle = -2.0 * std::f64::consts::PI * (jdx * k) as f64 / samples as f64;
            acc += value * Complex64::from_polar(1.0, angle);
        }
        phi.push(acc / Complex64::new(samples as f64 * radius.powi(k as i32), 0.0));
    }
    TaylorData::new(sig, phi)
}
