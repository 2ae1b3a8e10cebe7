//! Direct problems: fundamental solutions and Weyl functions on an interval.
//!
//! The fundamental solution is the normalized product
//! W_{r+1}(z) = (I + i z j C_r) ... (I + i z j C_0), W_0 = I. Its inverse is
//! never formed by elimination: the identity
//! W(z)^{-1} = (1 + z^2)^{-r-1} j W(zbar)* j supplies it as a single product.
//! Weyl functions arise from the Moebius transformation of W^{-1} against a
//! parameter with property-j (P*P > 0, P*jP >= 0); the interval form
//!
//!   phi = -[0 I] W(zbar)* P ([I 0] W(zbar)* P)^{-1}
//!
//! stays regular at z = i, where det W vanishes, and is the variant used by
//! the inverse problems.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::jalgebra::Signature;
use crate::mat::{self, CMat};
use crate::potential::DiracPotential;

/// Value of the fundamental solution after `steps` factors: W_steps(z).
#[derive(Debug, Clone)]
pub struct FundamentalValue {
    sig: Signature,
    steps: usize,
    z: Complex64,
    w: CMat,
}

impl FundamentalValue {
    pub fn sig(&self) -> Signature {
        self.sig
    }

    /// Number of factors applied; equals r + 1 for a potential C_0 ... C_r.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn value(&self) -> &CMat {
        &self.w
    }

    /// W(z)^{-1} from the product identity; rejects z = +-i where W is singular.
    pub fn inverse(&self, pot: &DiracPotential) -> Result<CMat> {
        if (self.z - mat::I).norm() == 0.0 || (self.z + mat::I).norm() == 0.0 {
            return Err(Error::BadPoint("W is singular at z = +-i".into()));
        }
        let j = self.sig.matrix();
        let wc = fundamental_solution(pot, self.z.conj());
        let scale = (Complex64::new(1.0, 0.0) + self.z * self.z).powu(self.steps as u32);
        Ok(&j * wc.value().adjoint() * &j / scale)
    }
}

/// W_{r+1}(z) for the whole potential, accumulated factor by factor.
/// z = +-i is allowed; the value is singular there.
pub fn fundamental_solution(pot: &DiracPotential, z: Complex64) -> FundamentalValue {
    let seq = fundamental_sequence(pot, z);
    FundamentalValue {
        sig: pot.sig(),
        steps: pot.len(),
        z,
        w: seq.last().unwrap().clone(),
    }
}

/// All partial products W_0 = I, W_1, ..., W_{r+1}.
pub fn fundamental_sequence(pot: &DiracPotential, z: Complex64) -> Vec<CMat> {
    let sig = pot.sig();
    let j = sig.matrix();
    let mut out = Vec::with_capacity(pot.len() + 1);
    out.push(mat::eye(sig.m()));
    for ck in pot.matrices() {
        let factor = mat::eye(sig.m()) + &j * ck.entries() * (mat::I * z);
        out.push(&factor * out.last().unwrap());
    }
    out
}

/// Canonical constant parameter [I_{m1}; 0]: nonsingular with property-j
/// and nonsingular at z = i.
pub fn canonical_parameter(sig: Signature) -> CMat {
    mat::vcat(&[&mat::eye(sig.m1()), &CMat::zeros(sig.m2(), sig.m1())])
}

/// Deterministic random parameter [A; K A] with ||K|| <= max_contraction < 1,
/// which has property-j since P* j P = A* (I - K* K) A.
pub fn random_parameter(seed: u64, sig: Signature, max_contraction: f64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let mut draw = |rows: usize, cols: usize| {
        CMat::from_fn(rows, cols, |_, _| {
            let re: f64 = normal.sample(&mut rng);
            let im: f64 = normal.sample(&mut rng);
            Complex64::new(re, im)
        })
    };
    let mut a = mat::eye(sig.m1()) + draw(sig.m1(), sig.m1()) * Complex64::new(0.25, 0.0);
    // Keep A safely nonsingular.
    let gram = a.adjoint() * &a;
    if mat::min_eigenvalue(&gram) < 1e-2 {
        a = mat::eye(sig.m1());
    }
    let mut k = draw(sig.m2(), sig.m1());
    let norm = mat::spectral_norm(&k);
    if norm > max_contraction {
        k *= Complex64::new(max_contraction / norm, 0.0);
    }
    let lower = &k * &a;
    mat::vcat(&[&a, &lower])
}

fn mobius_quotient(sig: Signature, n: &CMat) -> Result<CMat> {
    let den = mat::block(n, 0, 0, sig.m1(), sig.m1());
    let num = mat::block(n, sig.m1(), 0, sig.m2(), sig.m1());
    let lu = den.adjoint().lu();
    let solved = lu
        .solve(&num.adjoint())
        .ok_or(Error::Singular("Moebius denominator block"))?;
    Ok(solved.adjoint())
}

/// Weyl function value on the interval, in the form regular at z = i:
///
///   phi = -[0 I] W_{r+1}(zbar)* P ([I 0] W_{r+1}(zbar)* P)^{-1}.
pub fn weyl_mobius_interval(pot: &DiracPotential, z: Complex64, param: &CMat) -> Result<CMat> {
    let sig = pot.sig();
    if param.nrows() != sig.m() || param.ncols() != sig.m1() {
        return Err(Error::Dimension {
            what: "Weyl parameter",
            expected: format!("{}x{}", sig.m(), sig.m1()),
            got: format!("{}x{}", param.nrows(), param.ncols()),
        });
    }
    let wc = fundamental_solution(pot, z.conj());
    let n = wc.value().adjoint() * param;
    Ok(-mobius_quotient(sig, &n)?)
}

/// Weyl function value on the interval via the Moebius transformation of
/// W^{-1}, with the inverse supplied by the product identity. Undefined at
/// z = +-i. Equals [`weyl_mobius_interval`] with the parameter j P.
pub fn weyl_mobius(pot: &DiracPotential, z: Complex64, param: &CMat) -> Result<CMat> {
    if (z - mat::I).norm() == 0.0 || (z + mat::I).norm() == 0.0 {
        return Err(Error::BadPoint("Moebius transform undefined at z = +-i".into()));
    }
    let j = pot.sig().matrix();
    weyl_mobius_interval(pot, z, &(&j * param))
}

/// Finite-interval approximation to the Weyl function of the semiaxis
/// problem, evaluated with the canonical parameter at the largest available
/// level. Its first r+1 disk-variable Taylor coefficients are exact.
pub fn semiaxis_weyl_approx(pot: &DiracPotential, z: Complex64) -> Result<CMat> {
    if z.im <= 0.0 {
        return Err(Error::BadPoint(format!(
            "semiaxis Weyl approximation needs Im z > 0, got {z}"
        )));
    }
    weyl_mobius(pot, z, &canonical_parameter(pot.sig()))
}

/// Diagnostics for membership of a candidate value in the Weyl disk N(r, z).
#[derive(Debug, Clone, Copy)]
pub struct DiskMembership {
    /// Smallest eigenvalue of q^{r+1} [I phi*] W_{r+1}* j W_{r+1} [I; phi];
    /// >= -tol exactly when phi lies in the closed disk.
    pub form_min_eig: f64,
    /// Magnitude of the quadratic form's largest intermediate, the noise
    /// floor for `form_min_eig`.
    pub form_scale: f64,
    /// Smallest eigenvalue of the slack in the partial-sum bound
    /// sum_{k<=r} q^k [I phi*] W_k* C_k W_k [I; phi] <= (1+|z|^2)/(2 Im z) (I - phi* phi).
    pub sum_gap_min_eig: f64,
    /// Largest term magnitude entering the partial sum.
    pub sum_scale: f64,
}

impl DiskMembership {
    /// Membership up to `tol` relative to each functional's own scale.
    pub fn is_member(&self, tol: f64) -> bool {
        self.form_min_eig >= -tol * self.form_scale.max(1.0)
            && self.sum_gap_min_eig >= -tol * self.sum_scale.max(1.0)
    }
}

/// Evaluate the two disk-membership functionals for phi at level r
/// (using C_0 ... C_r). Requires z in the open upper half-plane, z != i.
pub fn weyl_disk_membership(
    pot: &DiracPotential,
    phi: &CMat,
    level: usize,
    z: Complex64,
) -> Result<DiskMembership> {
    let sig = pot.sig();
    if z.im <= 0.0 || (z - mat::I).norm() == 0.0 {
        return Err(Error::BadPoint(format!(
            "disk membership needs z in C+ with z != i, got {z}"
        )));
    }
    if level >= pot.len() {
        return Err(Error::Dimension {
            what: "disk level",
            expected: format!("< {}", pot.len()),
            got: level.to_string(),
        });
    }
    let truncated = pot.truncate(level + 1);
    let j = sig.matrix();
    let v = mat::vcat(&[&mat::eye(sig.m1()), phi]);
    let q = 1.0 / (1.0 + z.norm_sqr());

    let ws = fundamental_sequence(&truncated, z);
    let w_top = ws.last().unwrap();
    let wv_top = w_top * &v;
    let form = wv_top.adjoint() * &j * &wv_top * Complex64::new(q.powi(level as i32 + 1), 0.0);
    let form_min_eig = mat::min_eigenvalue(&form);
    // Noise floor: the evaluation passes through W v, whose rounding is
    // proportional to ||W||, not to the (possibly tiny) product.
    let vnorm = mat::frob(&v);
    let form_scale = q.powi(level as i32 + 1) * (mat::frob(w_top) * vnorm).powi(2);

    let mut lhs = CMat::zeros(sig.m1(), sig.m1());
    let mut sum_scale: f64 = 0.0;
    for (k, ck) in truncated.matrices().iter().enumerate() {
        let wv = &ws[k] * &v;
        let qk = q.powi(k as i32);
        lhs += wv.adjoint() * ck.entries() * &wv * Complex64::new(qk, 0.0);
        sum_scale =
            sum_scale.max(qk * (mat::frob(&ws[k]) * vnorm).powi(2) * mat::frob(ck.entries()));
    }
    let bound = (mat::eye(sig.m1()) - phi.adjoint() * phi)
        * Complex64::new((1.0 + z.norm_sqr()) / (2.0 * z.im), 0.0);
    let sum_gap_min_eig = mat::min_eigenvalue(&(bound - lhs));

    Ok(DiskMembership {
        form_min_eig,
        form_scale,
        sum_gap_min_eig,
        sum_scale,
    })
}

/// Relative residual of the summation formula
///
///   sum_{k=0}^r q^k W_k* C_k W_k
///     = (1+|z|^2)/(i(zbar - z)) (j - q^{r+1} W_{r+1}* j W_{r+1})
///
/// evaluated over C_0 ... C_r. Rejects real z, where the right side is
/// singular.
pub fn summation_identity_check(pot: &DiracPotential, z: Complex64, level: usize) -> Result<f64> {
    if z.im == 0.0 {
        return Err(Error::BadPoint("summation identity needs Im z != 0".into()));
    }
    if level >= pot.len() {
        return Err(Error::Dimension {
            what: "summation level",
            expected: format!("< {}", pot.len()),
            got: level.to_string(),
        });
    }
    let truncated = pot.truncate(level + 1);
    let sig = pot.sig();
    let j = sig.matrix();
    let q = 1.0 / (1.0 + z.norm_sqr());
    let ws = fundamental_sequence(&truncated, z);

    let mut lhs = CMat::zeros(sig.m(), sig.m());
    let mut scale: f64 = 1.0;
    for (k, ck) in truncated.matrices().iter().enumerate() {
        let qk = q.powi(k as i32);
        lhs += ws[k].adjoint() * ck.entries() * &ws[k] * Complex64::new(qk, 0.0);
        scale = scale.max(qk * mat::frob(&ws[k]).powi(2) * mat::frob(ck.entries()));
    }
    let w_top = ws.last().unwrap();
    let q_top = q.powi(level as i32 + 1);
    let tail = &j - w_top.adjoint() * &j * w_top * Complex64::new(q_top, 0.0);
    let factor = Complex64::new(1.0 + z.norm_sqr(), 0.0) / (mat::I * (z.conj() - z));
    let rhs = tail * factor;
    scale = scale.max(factor.norm() * q_top * mat::frob(w_top).powi(2));
    Ok(mat::frob(&(&lhs - &rhs)) / scale)
}

/// Relative residual of the j-form identity
/// W_{r+1}(zbar)* j W_{r+1}(z) = (1 + z^2)^{r+1} j, scaled by the magnitude
/// of the product on the left.
pub fn j_form_residual(pot: &DiracPotential, z: Complex64) -> f64 {
    let j = pot.sig().matrix();
    let w = fundamental_solution(pot, z);
    let wc = fundamental_solution(pot, z.conj());
    let scale = (mat::frob(w.value()) * mat::frob(wc.value()))
        .max((1.0 + z.norm_sqr()).powi(pot.len() as i32));
    let target = &j * (Complex64::new(1.0, 0.0) + z * z).powu(pot.len() as u32);
    mat::frob(&(wc.value().adjoint() * &j * w.value() - target)) / scale
}

/// Smallest eigenvalue of (W^{-1})* j W^{-1} - (1 - 2 Im z + |z|^2)^{-r-1} j,
/// which is nonnegative for z in C+, z != i.
pub fn inverse_semidefiniteness_gap(pot: &DiracPotential, z: Complex64) -> Result<f64> {
    let j = pot.sig().matrix();
    let w = fundamental_solution(pot, z);
    let winv = w.inverse(pot)?;
    let c = (1.0 - 2.0 * z.im + z.norm_sqr()).powi(-(pot.len() as i32));
    let gap = winv.adjoint() * &j * &winv - &j * Complex64::new(c, 0.0);
    Ok(mat::min_eigenvalue(&gap))
}

/// Default evaluation grid in the open upper half-plane avoiding +-i.
pub fn default_z_grid() -> Vec<Complex64> {
    vec![
        Complex64::new(0.3, 0.4),
        Complex64::new(1.0, 1.0),
        Complex64::new(-0.7, 0.2),
        Complex64::new(0.0, 2.2),
        Complex64::new(0.0, 1.8),
    ]
}
