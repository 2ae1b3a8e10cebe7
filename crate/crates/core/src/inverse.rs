//! Inverse problem: recover the potential from Taylor data.
//!
//! The recovery runs level by level. From the coefficients the stack
//! Phi_{k,1} = -[phi_0; phi_0+phi_1; ...] is assembled next to the identity
//! stack, the unique Hermitian solution S_k of
//! A_k S_k - S_k A_k* = i Pi_k j Pi_k* is formed by block substitution on
//! the triangular Toeplitz A_k, and the gamma Gram matrix is projected out:
//!
//!   gamma(k)* gamma(k) = Pi_k* S_k^{-1} P* (P S_k^{-1} P*)^{-1} P S_k^{-1} Pi_k,
//!   C_k = j + 2 gamma(k)* gamma(k).
//!
//! S_k also has a displacement structure driven directly by the
//! coefficients: S = I - L L* with L the block lower-triangular Toeplitz of
//! the phi's. The sign conventions were fixed against the Sylvester solver;
//! in expanded form
//!
//!   s_00 = I - phi_0 phi_0*,  s_{0,p} = -phi_0 phi_p*,
//!   s_{k+1,p+1} = s_{kp} - phi_{k+1} phi_{p+1}*.
//!
//! Positivity of S_r is the admissibility criterion: recovery fails fast at
//! the first level where it is lost, with no attempt at regularization.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jalgebra::{JUnitaryPositive, Signature};
use crate::mat::{self, CMat};
use crate::potential::DiracPotential;
use crate::taylor::TaylorData;

/// The cumulative stack Phi_{k,1} = -[phi_0; phi_0+phi_1; ...; phi_0+...+phi_k].
pub fn phi_stack(data: &TaylorData, level: usize) -> Result<CMat> {
    if level >= data.len() {
        return Err(Error::Dimension {
            what: "phi stack level",
            expected: format!("< {}", data.len()),
            got: level.to_string(),
        });
    }
    let sig = data.sig();
    let mut out = CMat::zeros((level + 1) * sig.m2(), sig.m1());
    let mut partial = CMat::zeros(sig.m2(), sig.m1());
    for k in 0..=level {
        partial += &data.coefficients()[k];
        out.view_mut((k * sig.m2(), 0), (sig.m2(), sig.m1()))
            .copy_from(&(-&partial));
    }
    Ok(out)
}

/// Pi_k = [Phi_{k,1}, identity stack].
pub fn assemble_pi(data: &TaylorData, level: usize) -> Result<CMat> {
    let sig = data.sig();
    let phi1 = phi_stack(data, level)?;
    let ones: Vec<CMat> = (0..=level).map(|_| mat::eye(sig.m2())).collect();
    let refs: Vec<&CMat> = ones.iter().collect();
    Ok(mat::hcat(&[&phi1, &mat::vcat(&refs)]))
}

/// Unique Hermitian solution of A S - S A* = i Pi j Pi* for the triangular
/// Toeplitz generator, by blockwise substitution: the (k, p) block satisfies
///
///   s_{kp} = -(Pi j Pi*)_{kp} - sum_{q<k} s_{qp} - sum_{q<p} s_{kq},
///
/// swept in lexicographic block order with running prefix sums.
pub fn solve_identity(pi: &CMat, sig: Signature) -> Result<CMat> {
    let m2 = sig.m2();
    if pi.ncols() != sig.m() || !pi.nrows().is_multiple_of(m2) || pi.nrows() == 0 {
        return Err(Error::Dimension {
            what: "node data",
            expected: format!("nonempty k*{} x {}", m2, sig.m()),
            got: format!("{}x{}", pi.nrows(), pi.ncols()),
        });
    }
    let levels = pi.nrows() / m2;
    let j = sig.matrix();
    let njpj = -(pi * &j * pi.adjoint());
    let n = levels * m2;
    let mut s = CMat::zeros(n, n);
    // col_sums[p] accumulates sum_{q<k} s_{qp} as rows complete.
    let mut col_sums = vec![CMat::zeros(m2, m2); levels];
    for k in 0..levels {
        let mut row_prefix = CMat::zeros(m2, m2);
        for (p, col_sum) in col_sums.iter().enumerate() {
            let base = mat::block(&njpj, k * m2, p * m2, m2, m2);
            let skp = base - col_sum - &row_prefix;
            s.view_mut((k * m2, p * m2), (m2, m2)).copy_from(&skp);
            row_prefix += &skp;
        }
        for (p, col_sum) in col_sums.iter_mut().enumerate() {
            *col_sum += mat::block(&s, k * m2, p * m2, m2, m2);
        }
    }
    Ok(s)
}

/// S assembled directly from the displacement structure: S = I - L L* with
/// L the block lower-triangular Toeplitz whose (k, q) block is phi_{k-q}.
pub fn structured_s(data: &TaylorData) -> CMat {
    let sig = data.sig();
    let (m1, m2) = (sig.m1(), sig.m2());
    let levels = data.len();
    let mut l = CMat::zeros(levels * m2, levels * m1);
    for k in 0..levels {
        for q in 0..=k {
            l.view_mut((k * m2, q * m1), (m2, m1))
                .copy_from(&data.coefficients()[k - q]);
        }
    }
    mat::eye(levels * m2) - &l * l.adjoint()
}

/// Diagnostics collected at one recovery level.
#[derive(Debug, Clone)]
pub struct RecoveryLevel {
    pub level: usize,
    /// Cumulative coefficient stack used at this level.
    pub phi1: CMat,
    /// Solution of the operator identity at this level.
    pub s: CMat,
    /// Recovered Gram matrix gamma(k)* gamma(k).
    pub gram: CMat,
    /// Recovered potential matrix.
    pub c: CMat,
    /// Smallest eigenvalue of S_k.
    pub s_min_eig: f64,
    /// Relative residual of the operator identity for (A, S_k, Pi_k).
    pub identity_residual: f64,
    /// Relative j-unitarity residual of the recovered C_k.
    pub junitarity_residual: f64,
}

/// Full per-level trace of a recovery run.
#[derive(Debug, Clone)]
pub struct RecoveryTrace {
    pub levels: Vec<RecoveryLevel>,
}

/// Class tolerance applied to recovered potential matrices.
pub const RECOVERY_TOL: f64 = 1e-6;

/// Recover the potential from Taylor data, level by level. Fails with the
/// offending level if some S_k is not positive definite (inadmissible data)
/// or a recovered matrix lands outside the positive j-unitary class.
pub fn recover_potential(data: &TaylorData) -> Result<(DiracPotential, RecoveryTrace)> {
    let sig = data.sig();
    let j = sig.matrix();
    let m2 = sig.m2();
    let mut cs = Vec::with_capacity(data.len());
    let mut trace = Vec::with_capacity(data.len());
    for level in 0..data.len() {
        let pi = assemble_pi(data, level)?;
        let s = solve_identity(&pi, sig)?;
        let s_min_eig = mat::min_eigenvalue(&s);
        if s_min_eig <= 0.0 {
            return Err(Error::InadmissibleTaylor {
                level,
                min_eig: s_min_eig,
            });
        }
        let chol = mat::herm_part(&s)
            .cholesky()
            .ok_or(Error::InadmissibleTaylor {
                level,
                min_eig: s_min_eig,
            })?;
        // v = P S^{-1} Pi and d = P S^{-1} P* read off the last block row.
        let sinv_pi = chol.solve(&pi);
        let rows = (level + 1) * m2;
        let v = mat::block(&sinv_pi, rows - m2, 0, m2, sig.m());
        let mut selector = CMat::zeros(rows, m2);
        selector
            .view_mut((rows - m2, 0), (m2, m2))
            .copy_from(&mat::eye(m2));
        let sinv_sel = chol.solve(&selector);
        let d = mat::block(&sinv_sel, rows - m2, 0, m2, m2);
        let dchol = mat::herm_part(&d)
            .cholesky()
            .ok_or(Error::InadmissibleTaylor {
                level,
                min_eig: mat::min_eigenvalue(&d),
            })?;
        let gram = mat::herm_part(&(v.adjoint() * dchol.solve(&v)));
        let c = &j + &gram * Complex64::new(2.0, 0.0);
        let scale = mat::frob(&c).max(1.0);
        let junit = mat::frob(&(&c * &j * &c - &j)) / (scale * scale);
        let cmat = JUnitaryPositive::with_tol(c.clone(), sig, RECOVERY_TOL).map_err(|e| {
            Error::RecoveryBreakdown {
                level,
                source: Box::new(e),
            }
        })?;
        // Identity residual for the trace.
        let a = crate::snode::build_a(level + 1, m2);
        let lhs = &a * &s - &s * a.adjoint();
        let rhs = &pi * &j * pi.adjoint() * mat::I;
        let identity_residual =
            mat::frob(&(lhs - rhs)) / mat::frob(&pi).powi(2).max(1.0);
        trace.push(RecoveryLevel {
            level,
            phi1: phi_stack(data, level)?,
            s,
            gram,
            c,
            s_min_eig,
            identity_residual,
            junitarity_residual: junit,
        });
        cs.push(cmat);
    }
    Ok((DiracPotential::new(sig, cs)?, RecoveryTrace { levels: trace }))
}

/// Largest index p such that the coefficients agree (elementwise, within
/// `tol`) for every k <= p; -1 when they already differ at index 0.
pub fn borg_marchenko_compare(a: &TaylorData, b: &TaylorData, tol: f64) -> Result<isize> {
    if a.sig() != b.sig() {
        return Err(Error::Dimension {
            what: "Taylor data signatures",
            expected: format!("({}, {})", a.sig().m1(), a.sig().m2()),
            got: format!("({}, {})", b.sig().m1(), b.sig().m2()),
        });
    }
    let mut agree: isize = -1;
    for (k, (pa, pb)) in a
        .coefficients()
        .iter()
        .zip(b.coefficients())
        .enumerate()
    {
        let diff = (pa - pb).iter().map(|x| x.norm()).fold(0.0, f64::max);
        if diff > tol {
            break;
        }
        agree = k as isize;
    }
    Ok(agree)
}

/// One-step admissibility of a continuation: whether the structured S of the
/// data extended by `phi_next` stays positive definite.
pub fn continuation_check(data: &TaylorData, phi_next: &CMat) -> Result<bool> {
    let base = structured_s(data);
    if mat::min_eigenvalue(&base) <= 0.0 {
        return Err(Error::InadmissibleTaylor {
            level: data.len().saturating_sub(1),
            min_eig: mat::min_eigenvalue(&base),
        });
    }
    let extended = data.extended(phi_next.clone())?;
    Ok(mat::min_eigenvalue(&structured_s(&extended)) > 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{random_schur, schur_to_dirac};
    use crate::taylor::{taylor_algebraic, taylor_from_phi_stack};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample_potential(seed: u64, r: usize, m1: usize, m2: usize, norm: f64) -> DiracPotential {
        let sig = Signature::new(m1, m2).unwrap();
        let seq = random_schur(seed, r, sig, norm).unwrap();
        schur_to_dirac(&seq).unwrap().0
    }

    fn random_taylor(seed: u64, sig: Signature, levels: usize, scale: f64) -> TaylorData {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = StandardNormal;
        let phi = (0..levels)
            .map(|_| {
                CMat::from_fn(sig.m2(), sig.m1(), |_, _| {
                    let re: f64 = normal.sample(&mut rng);
                    let im: f64 = normal.sample(&mut rng);
                    Complex64::new(re * scale, im * scale)
                })
            })
            .collect();
        TaylorData::new(sig, phi).unwrap()
    }

    #[test]
    fn phi_stack_round_trip() {
        let sig = Signature::new(2, 1).unwrap();
        let data = random_taylor(3, sig, 5, 0.3);
        let stack = phi_stack(&data, 4).unwrap();
        let back = taylor_from_phi_stack(&stack, sig).unwrap();
        for (a, b) in back.coefficients().iter().zip(data.coefficients()) {
            assert!(mat::frob(&(a - b)) < 1e-14);
        }

        // Single-coefficient case: the stack is -phi_0.
        let single = data.truncate(1);
        let stack = phi_stack(&single, 0).unwrap();
        assert!(mat::frob(&(&stack + &data.coefficients()[0])) < 1e-15);
    }

    #[test]
    fn solver_reproduces_trivial_node() {
        let sig = Signature::new(2, 1).unwrap();
        let data = TaylorData::zeros(sig, 4);
        let pi = assemble_pi(&data, 3).unwrap();
        let s = solve_identity(&pi, sig).unwrap();
        assert!(mat::frob(&(&s - mat::eye(4))) < 1e-14);
        // Direct residual oracle.
        let a = crate::snode::build_a(4, 1);
        let j = sig.matrix();
        let resid = &a * &s - &s * a.adjoint() - &pi * &j * pi.adjoint() * mat::I;
        assert!(mat::frob(&resid) < 1e-14);
    }

    #[test]
    fn solver_scalar_level_zero() {
        // S_0 = 1 - |phi_0|^2.
        let sig = Signature::new(1, 1).unwrap();
        let phi0 = c(0.3, -0.4);
        let data = TaylorData::new(sig, vec![CMat::from_element(1, 1, phi0)]).unwrap();
        let pi = assemble_pi(&data, 0).unwrap();
        let s = solve_identity(&pi, sig).unwrap();
        assert!((s[(0, 0)].re - (1.0 - 0.25)).abs() < 1e-14);
        assert!(s[(0, 0)].im.abs() < 1e-15);
    }

    #[test]
    fn solver_contract_on_random_data() {
        let sig = Signature::new(2, 2).unwrap();
        let data = random_taylor(7, sig, 6, 0.25);
        let pi = assemble_pi(&data, 5).unwrap();
        let s = solve_identity(&pi, sig).unwrap();
        assert!(mat::hermiticity_residual(&s) < 1e-12);
        let a = crate::snode::build_a(6, 2);
        let j = sig.matrix();
        let resid = &a * &s - &s * a.adjoint() - &pi * &j * pi.adjoint() * mat::I;
        assert!(mat::frob(&resid) < 1e-10 * mat::frob(&pi).powi(2).max(1.0));
    }

    #[test]
    fn structured_matches_solver() {
        // The sign and boundary conventions of the displacement structure
        // are pinned by elementwise agreement with the Sylvester solution.
        for (seed, m1, m2, levels) in [(1, 1, 1, 16), (2, 2, 1, 12), (3, 1, 2, 12), (4, 2, 2, 9)] {
            let sig = Signature::new(m1, m2).unwrap();
            let data = random_taylor(seed, sig, levels, 0.2);
            let pi = assemble_pi(&data, levels - 1).unwrap();
            let by_solver = solve_identity(&pi, sig).unwrap();
            let by_structure = structured_s(&data);
            assert!(
                mat::frob(&(&by_solver - &by_structure)) < 1e-10,
                "structures disagree for seed {seed}"
            );
        }
    }

    #[test]
    fn structured_corner_cases() {
        let sig = Signature::new(1, 1).unwrap();
        let zero = TaylorData::zeros(sig, 5);
        assert!(mat::frob(&(structured_s(&zero) - mat::eye(5))) == 0.0);

        let phi0 = c(0.6, 0.2);
        let data = TaylorData::new(sig, vec![CMat::from_element(1, 1, phi0)]).unwrap();
        let s = structured_s(&data);
        assert!((s[(0, 0)].re - (1.0 - phi0.norm_sqr())).abs() < 1e-15);
    }

    #[test]
    fn recover_trivial_data() {
        let sig = Signature::new(2, 1).unwrap();
        let data = TaylorData::zeros(sig, 5);
        let (pot, trace) = recover_potential(&data).unwrap();
        for ck in pot.matrices() {
            assert!(mat::frob(&(ck.entries() - mat::eye(3))) < 1e-12);
        }
        for level in &trace.levels {
            assert!(level.s_min_eig > 0.99);
            assert!(level.identity_residual < 1e-12);
        }
    }

    #[test]
    fn recovery_round_trip() {
        for (seed, m1, m2, r) in [(1, 1, 1, 6), (2, 2, 1, 6), (3, 1, 2, 6), (4, 2, 2, 5), (5, 3, 1, 6)] {
            let pot = sample_potential(seed, r, m1, m2, 0.7);
            let data = taylor_algebraic(&pot).unwrap();
            let (back, _) = recover_potential(&data).unwrap();
            for (a, b) in back.matrices().iter().zip(pot.matrices()) {
                let rel = mat::frob(&(a.entries() - b.entries())) / mat::frob(b.entries());
                assert!(rel < 1e-8, "seed {seed}: relative deviation {rel:.3e}");
            }
        }
    }

    #[test]
    fn dual_round_trip() {
        let pot = sample_potential(11, 6, 2, 1, 0.7);
        let data = taylor_algebraic(&pot).unwrap();
        let (back, _) = recover_potential(&data).unwrap();
        let again = taylor_algebraic(&back).unwrap();
        for (a, b) in again.coefficients().iter().zip(data.coefficients()) {
            assert!(mat::frob(&(a - b)) < 1e-8);
        }
    }

    #[test]
    fn monotone_consistency() {
        // Recovery from a coefficient prefix equals the prefix of the
        // recovery from everything.
        let pot = sample_potential(13, 7, 1, 2, 0.7);
        let data = taylor_algebraic(&pot).unwrap();
        let (full, _) = recover_potential(&data).unwrap();
        let (part, _) = recover_potential(&data.truncate(4)).unwrap();
        for (a, b) in part.matrices().iter().zip(full.matrices()) {
            assert!(mat::frob(&(a.entries() - b.entries())) < 1e-12 * mat::frob(b.entries()));
        }
    }

    #[test]
    fn nesting_of_solutions() {
        let sig = Signature::new(2, 1).unwrap();
        let data = random_taylor(17, sig, 6, 0.3);
        let pi5 = assemble_pi(&data, 5).unwrap();
        let s5 = solve_identity(&pi5, sig).unwrap();
        let pi3 = assemble_pi(&data, 3).unwrap();
        let s3 = solve_identity(&pi3, sig).unwrap();
        assert!(mat::frob(&(mat::block(&s5, 0, 0, 4, 4) - &s3)) < 1e-14);
    }

    #[test]
    fn inadmissible_data_rejected_at_level_zero() {
        let sig = Signature::new(1, 1).unwrap();
        let data = TaylorData::new(sig, vec![CMat::from_element(1, 1, c(1.2, 0.0))]).unwrap();
        match recover_potential(&data) {
            Err(Error::InadmissibleTaylor { level, min_eig }) => {
                assert_eq!(level, 0);
                assert!(min_eig < 0.0);
            }
            other => panic!("expected inadmissible error, got {other:?}"),
        }
    }

    #[test]
    fn inadmissible_at_later_level() {
        // Start from genuine data, then corrupt a later coefficient badly.
        let pot = sample_potential(19, 4, 1, 1, 0.6);
        let data = taylor_algebraic(&pot).unwrap();
        let mut phi = data.coefficients().to_vec();
        phi[3] = CMat::from_element(1, 1, c(5.0, 0.0));
        let bad = TaylorData::new(pot.sig(), phi).unwrap();
        match recover_potential(&bad) {
            Err(Error::InadmissibleTaylor { level, .. }) => assert_eq!(level, 3),
            other => panic!("expected inadmissible error, got {other:?}"),
        }
    }

    #[test]
    fn borg_marchenko_agreement_index() {
        let sig = Signature::new(2, 1).unwrap();
        let data = random_taylor(23, sig, 7, 0.25);
        assert_eq!(borg_marchenko_compare(&data, &data, 1e-12).unwrap(), 6);

        let mut phi = data.coefficients().to_vec();
        phi[3] += CMat::from_element(1, 2, c(0.05, 0.0));
        let other = TaylorData::new(sig, phi).unwrap();
        assert_eq!(borg_marchenko_compare(&data, &other, 1e-9).unwrap(), 2);

        let mut phi = data.coefficients().to_vec();
        phi[0] += CMat::from_element(1, 2, c(0.05, 0.0));
        let other = TaylorData::new(sig, phi).unwrap();
        assert_eq!(borg_marchenko_compare(&data, &other, 1e-9).unwrap(), -1);
    }

    #[test]
    fn borg_marchenko_recovered_prefix_agrees() {
        // Two Schur sequences differing only from index 4 onward give Taylor
        // data agreeing through index 3 and recovered potentials agreeing
        // for k <= 3.
        let sig = Signature::new(1, 1).unwrap();
        let seq_a = random_schur(31, 6, sig, 0.6).unwrap();
        let mut rho = seq_a.coefficients().to_vec();
        rho[4] = CMat::from_element(1, 1, c(-0.35, 0.2));
        let seq_b = crate::potential::SchurSequence::new(sig, rho).unwrap();

        let pot_a = schur_to_dirac(&seq_a).unwrap().0;
        let pot_b = schur_to_dirac(&seq_b).unwrap().0;
        let ta = taylor_algebraic(&pot_a).unwrap();
        let tb = taylor_algebraic(&pot_b).unwrap();
        let p = borg_marchenko_compare(&ta, &tb, 1e-9).unwrap();
        assert_eq!(p, 3);

        let (ra, _) = recover_potential(&ta).unwrap();
        let (rb, _) = recover_potential(&tb).unwrap();
        for k in 0..=p as usize {
            let diff = mat::frob(&(ra.matrices()[k].entries() - rb.matrices()[k].entries()));
            assert!(diff < 1e-8 * mat::frob(ra.matrices()[k].entries()));
        }
    }

    #[test]
    fn continuation_examples() {
        let sig = Signature::new(1, 1).unwrap();
        let zeros = TaylorData::zeros(sig, 4);
        let ok = continuation_check(&zeros, &CMat::zeros(1, 1)).unwrap();
        assert!(ok);

        // For all-zero data the extended S is I minus |phi|^2 in one corner,
        // so the admissibility threshold sits exactly at |phi_next| = 1.
        let near_edge = CMat::from_element(1, 1, c(0.999, 0.0));
        assert!(continuation_check(&zeros, &near_edge).unwrap());
        let too_big = CMat::from_element(1, 1, c(1.001, 0.0));
        assert!(!continuation_check(&zeros, &too_big).unwrap());

        // A coefficient taken from genuine longer data continues admissibly.
        let pot = sample_potential(37, 5, 1, 1, 0.6);
        let data = taylor_algebraic(&pot).unwrap();
        let head = data.truncate(5);
        let next = data.coefficients()[5].clone();
        assert!(continuation_check(&head, &next).unwrap());
    }
}
