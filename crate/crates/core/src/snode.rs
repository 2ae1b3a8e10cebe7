//! The symmetric S-node associated with a potential on an interval.
//!
//! The node is the triple (A, S, Pi) satisfying the operator identity
//! A S - S A* = i Pi j Pi* with S = S* nonsingular. A is the block
//! lower-triangular Toeplitz matrix with -(i/2) I_{m2} on the diagonal and
//! -i I_{m2} below. S and Pi are produced from the gamma factors of the
//! potential through a similarity E between A and the matrix K built
//! directly from the gammas:
//!
//!   K = E A E^{-1},   S = E^{-1} (E*)^{-1},   Pi = E^{-1} Gamma.
//!
//! E is block lower triangular and constructed level by level; all leading
//! sections are kept because the inverse problem and the truncation
//! identities need every level. S^{-1} is always formed as E* E, never by
//! inverting S. The transfer matrix function w_A(lambda) =
//! I - i j Pi* S^{-1} (A - lambda I)^{-1} Pi reproduces the fundamental
//! solution via W_{r+1}(z) = (1 + i z)^{r+1} w_A((2z)^{-1}).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jalgebra::{self, Signature};
use crate::mat::{self, CMat};
use crate::potential::DiracPotential;

/// The gamma row factors of a potential, stacked per level.
#[derive(Debug, Clone)]
pub struct GammaStack {
    sig: Signature,
    blocks: Vec<CMat>,
}

impl GammaStack {
    pub fn from_potential(pot: &DiracPotential) -> Result<Self> {
        let mut blocks = Vec::with_capacity(pot.len());
        for ck in pot.matrices() {
            let (_, gamma) = jalgebra::beta_gamma(ck)?;
            blocks.push(gamma);
        }
        Ok(GammaStack {
            sig: pot.sig(),
            blocks,
        })
    }

    pub fn sig(&self) -> Signature {
        self.sig
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// gamma(k), an m2 x m block.
    pub fn block(&self, k: usize) -> &CMat {
        &self.blocks[k]
    }

    /// Left m2 x m1 part of gamma(k).
    pub fn gamma1(&self, k: usize) -> CMat {
        mat::block(&self.blocks[k], 0, 0, self.sig.m2(), self.sig.m1())
    }

    /// Right m2 x m2 part of gamma(k).
    pub fn gamma2(&self, k: usize) -> CMat {
        mat::block(&self.blocks[k], 0, self.sig.m1(), self.sig.m2(), self.sig.m2())
    }

    /// The full stack Gamma_r of shape m2(r+1) x m.
    pub fn stacked(&self) -> CMat {
        let refs: Vec<&CMat> = self.blocks.iter().collect();
        mat::vcat(&refs)
    }

    /// Stack of the first `levels` blocks.
    pub fn stacked_upto(&self, levels: usize) -> CMat {
        let refs: Vec<&CMat> = self.blocks[..levels].iter().collect();
        mat::vcat(&refs)
    }
}

/// Block lower-triangular Toeplitz generator: entry (k, p) is
/// -(i/2) I for p = k, -i I for p < k, 0 above the diagonal.
pub fn build_a(levels: usize, m2: usize) -> CMat {
    let n = levels * m2;
    CMat::from_fn(n, n, |i, j| {
        let (bi, bj) = (i / m2, j / m2);
        if i % m2 != j % m2 {
            Complex64::new(0.0, 0.0)
        } else if bi == bj {
            Complex64::new(0.0, -0.5)
        } else if bj < bi {
            Complex64::new(0.0, -1.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// K built row by row from the gammas: block row k is
/// i gamma(k) j [gamma(0)* ... gamma(k-1)* gamma(k)*/2 0 ... 0].
pub fn build_k(gamma: &GammaStack) -> CMat {
    let sig = gamma.sig();
    let (m2, levels) = (sig.m2(), gamma.len());
    let j = sig.matrix();
    let mut out = CMat::zeros(levels * m2, levels * m2);
    for k in 0..levels {
        let lead = gamma.block(k) * &j * mat::I;
        for p in 0..=k {
            let mut entry = &lead * gamma.block(p).adjoint();
            if p == k {
                entry *= Complex64::new(0.5, 0.0);
            }
            out.view_mut((k * m2, p * m2), (m2, m2)).copy_from(&entry);
        }
    }
    out
}

/// All leading sections E_0 ... E_r of the similarity between K and A,
/// normalized so that E_r^{-1} applied to the gamma2 stack gives the stack
/// of identities.
pub fn build_e(gamma: &GammaStack) -> Result<Vec<CMat>> {
    let sig = gamma.sig();
    let (m2, levels) = (sig.m2(), gamma.len());
    let j = sig.matrix();
    if levels == 0 {
        return Err(Error::Dimension {
            what: "gamma stack",
            expected: "at least one level".into(),
            got: "empty".into(),
        });
    }
    let mut sections = Vec::with_capacity(levels);
    let mut e_minus = gamma.gamma2(0);
    sections.push(e_minus.clone());
    for r in 1..levels {
        let prev = &sections[r - 1];
        let step = gamma.block(r) * &j * gamma.block(r - 1).adjoint();
        e_minus = -(&step * &e_minus);
        if e_minus.clone().lu().determinant().norm() == 0.0 {
            return Err(Error::Singular("corner block of the similarity"));
        }
        let x_r = if r == 1 {
            gamma.gamma2(1) - &e_minus
        } else {
            // The shifted Toeplitz block A_{r-2} - (i/2) I is -i times the
            // all-ones block lower triangle, whose inverse is the bidiagonal
            // i (I - N) with N the block subdiagonal shift.
            let gsub = gamma.stacked_upto(r);
            let mut lhs = gamma.block(r) * &j * gsub.adjoint() * prev;
            for p in 0..r {
                let mut view = lhs.view_mut((0, p * m2), (m2, m2));
                let add = &e_minus;
                for ii in 0..m2 {
                    for jj in 0..m2 {
                        view[(ii, jj)] += add[(ii, jj)];
                    }
                }
            }
            // x_tilde = i * lhs[:, :(r-1)m2] * i (I - N) = -lhs (I - N)
            let head = mat::block(&lhs, 0, 0, m2, (r - 1) * m2);
            let mut x_tilde = -head.clone();
            for p in 1..r - 1 {
                let shifted = mat::block(&head, 0, p * m2, m2, m2);
                let mut view = x_tilde.view_mut((0, (p - 1) * m2), (m2, m2));
                for ii in 0..m2 {
                    for jj in 0..m2 {
                        view[(ii, jj)] += shifted[(ii, jj)];
                    }
                }
            }
            let mut corner = gamma.gamma2(r) - &e_minus;
            for p in 0..r - 1 {
                corner -= mat::block(&x_tilde, 0, p * m2, m2, m2);
            }
            mat::hcat(&[&corner, &x_tilde])
        };
        let mut section = CMat::zeros((r + 1) * m2, (r + 1) * m2);
        section.view_mut((0, 0), (r * m2, r * m2)).copy_from(prev);
        section.view_mut((r * m2, 0), (m2, r * m2)).copy_from(&x_r);
        section
            .view_mut((r * m2, r * m2), (m2, m2))
            .copy_from(&e_minus);
        sections.push(section);
    }
    Ok(sections)
}

/// Solve E Y = B for block lower-triangular E with invertible diagonal
/// blocks of size `block`.
pub fn solve_block_lower(e: &CMat, rhs: &CMat, block: usize) -> Result<CMat> {
    let levels = e.nrows() / block;
    let mut y = CMat::zeros(rhs.nrows(), rhs.ncols());
    for k in 0..levels {
        let mut acc = mat::block(rhs, k * block, 0, block, rhs.ncols());
        for q in 0..k {
            acc -= mat::block(e, k * block, q * block, block, block)
                * mat::block(&y, q * block, 0, block, rhs.ncols());
        }
        let diag = mat::block(e, k * block, k * block, block, block);
        let solved = diag
            .lu()
            .solve(&acc)
            .ok_or(Error::Singular("diagonal block of E"))?;
        y.view_mut((k * block, 0), (block, rhs.ncols()))
            .copy_from(&solved);
    }
    Ok(y)
}

/// The symmetric S-node (A, S, Pi) of a potential, together with the
/// similarity sections and the K matrix.
#[derive(Debug, Clone)]
pub struct SNode {
    sig: Signature,
    gamma: GammaStack,
    e_sections: Vec<CMat>,
    a: CMat,
    k: CMat,
    s: CMat,
    pi: CMat,
}

pub fn build_snode(pot: &DiracPotential) -> Result<SNode> {
    let sig = pot.sig();
    let gamma = GammaStack::from_potential(pot)?;
    let e_sections = build_e(&gamma)?;
    let e_top = e_sections.last().unwrap();
    let a = build_a(pot.len(), sig.m2());
    let k = build_k(&gamma);
    let pi = solve_block_lower(e_top, &gamma.stacked(), sig.m2())?;
    let f = solve_block_lower(e_top, &mat::eye(e_top.nrows()), sig.m2())?;
    let s = mat::herm_part(&(&f * f.adjoint()));
    Ok(SNode {
        sig,
        gamma,
        e_sections,
        a,
        k,
        s,
        pi,
    })
}

impl SNode {
    pub fn sig(&self) -> Signature {
        self.sig
    }

    /// Number of levels r + 1.
    pub fn levels(&self) -> usize {
        self.e_sections.len()
    }

    pub fn gamma(&self) -> &GammaStack {
        &self.gamma
    }

    pub fn a(&self) -> &CMat {
        &self.a
    }

    pub fn k_matrix(&self) -> &CMat {
        &self.k
    }

    pub fn s(&self) -> &CMat {
        &self.s
    }

    pub fn pi(&self) -> &CMat {
        &self.pi
    }

    pub fn e_sections(&self) -> &[CMat] {
        &self.e_sections
    }

    pub fn e_top(&self) -> &CMat {
        self.e_sections.last().unwrap()
    }

    /// S^{-1} = E* E, never formed by inverting S.
    pub fn s_inverse(&self) -> CMat {
        let e = self.e_top();
        e.adjoint() * e
    }

    /// Left m2(r+1) x m1 block of Pi.
    pub fn phi1(&self) -> CMat {
        mat::block(&self.pi, 0, 0, self.pi.nrows(), self.sig.m1())
    }

    /// Right m2(r+1) x m2 block of Pi; a stack of identities by construction.
    pub fn phi2(&self) -> CMat {
        mat::block(&self.pi, 0, self.sig.m1(), self.pi.nrows(), self.sig.m2())
    }

    /// Apply (A_level - lambda I)^{-1} to B by forward substitution on the
    /// triangular Toeplitz structure: row k reads
    /// (-i/2 - lambda) X_k - i sum_{q<k} X_q = B_k.
    pub fn resolvent_apply(&self, level: usize, lambda: Complex64, b: &CMat) -> Result<CMat> {
        let m2 = self.sig.m2();
        let pivot = Complex64::new(0.0, -0.5) - lambda;
        if pivot.norm() == 0.0 {
            return Err(Error::BadPoint(
                "lambda = -i/2 is in the spectrum of A".into(),
            ));
        }
        let mut x = CMat::zeros(b.nrows(), b.ncols());
        let mut running = CMat::zeros(m2, b.ncols());
        for k in 0..=level {
            let mut acc = mat::block(b, k * m2, 0, m2, b.ncols());
            if k > 0 {
                acc += &running * mat::I;
            }
            let xk = acc / pivot;
            running += &xk;
            x.view_mut((k * m2, 0), (m2, b.ncols())).copy_from(&xk);
        }
        Ok(x)
    }

    /// Apply (K_level - lambda I)^{-1} to B by block forward substitution on
    /// the block lower-triangular K.
    pub fn k_resolvent_apply(&self, level: usize, lambda: Complex64, b: &CMat) -> Result<CMat> {
        let m2 = self.sig.m2();
        if (lambda + Complex64::new(0.0, 0.5)).norm() == 0.0 {
            return Err(Error::BadPoint(
                "lambda = -i/2 is the spectrum of the node generator".into(),
            ));
        }
        let mut x = CMat::zeros(b.nrows(), b.ncols());
        for k in 0..=level {
            let mut acc = mat::block(b, k * m2, 0, m2, b.ncols());
            for q in 0..k {
                acc -= mat::block(&self.k, k * m2, q * m2, m2, m2)
                    * mat::block(&x, q * m2, 0, m2, b.ncols());
            }
            let pivot = mat::block(&self.k, k * m2, k * m2, m2, m2)
                - mat::eye(m2) * lambda;
            let xk = pivot
                .lu()
                .solve(&acc)
                .ok_or(Error::BadPoint("lambda is in the spectrum of K".into()))?;
            x.view_mut((k * m2, 0), (m2, b.ncols())).copy_from(&xk);
        }
        Ok(x)
    }

    /// Transfer matrix function w_A at the top level.
    pub fn transfer_matrix(&self, lambda: Complex64) -> Result<CMat> {
        self.transfer_matrix_at_level(self.levels() - 1, lambda)
    }

    /// Transfer matrix function of the leading section at `level`
    /// (levels are 0-based; level r uses A_r, S_r, Pi_r).
    ///
    /// Evaluated through the exact rearrangement
    /// Pi* S^{-1} (A - lambda I)^{-1} Pi = Gamma* (K - lambda I)^{-1} Gamma,
    /// which follows from S^{-1} = E* E, Pi = E^{-1} Gamma and the
    /// similarity K = E A E^{-1}. This keeps every intermediate at the
    /// natural scale of the gamma products instead of passing through the
    /// much larger E* E.
    pub fn transfer_matrix_at_level(&self, level: usize, lambda: Complex64) -> Result<CMat> {
        let sig = self.sig;
        let gamma_sub = self.gamma.stacked_upto(level + 1);
        let resolved = self.k_resolvent_apply(level, lambda, &gamma_sub)?;
        let j = sig.matrix();
        Ok(mat::eye(sig.m()) - &j * gamma_sub.adjoint() * resolved * mat::I)
    }

    /// Residual of the operator identity A S - S A* - i Pi j Pi*, relative
    /// to the magnitudes of its terms.
    pub fn operator_identity_residual(&self) -> f64 {
        let j = self.sig.matrix();
        let lhs = &self.a * &self.s - &self.s * self.a.adjoint();
        let rhs = &self.pi * &j * self.pi.adjoint() * mat::I;
        let scale = (mat::frob(&self.a) * mat::frob(&self.s))
            .max(mat::frob(&self.pi).powi(2))
            .max(1.0);
        mat::frob(&(lhs - rhs)) / scale
    }

    /// Residual of the similarity K E = E A, relative to the term magnitudes.
    pub fn similarity_residual(&self) -> f64 {
        let e = self.e_top();
        let lhs = &self.k * e;
        let rhs = e * &self.a;
        let scale = (mat::frob(&self.k) * mat::frob(e))
            .max(mat::frob(e) * mat::frob(&self.a))
            .max(1.0);
        mat::frob(&(lhs - rhs)) / scale
    }

    /// Residual of K - K* = i Gamma j Gamma*.
    pub fn k_identity_residual(&self) -> f64 {
        let j = self.sig.matrix();
        let gamma = self.gamma.stacked();
        let lhs = &self.k - self.k.adjoint();
        let rhs = &gamma * &j * gamma.adjoint() * mat::I;
        let scale = mat::frob(&self.k).max(mat::frob(&gamma).powi(2)).max(1.0);
        mat::frob(&(lhs - rhs)) / scale
    }

    /// Residual of the j-form identity of the transfer matrix,
    ///
    ///   w(lambda)* j w(mu) - j
    ///     + i (mu - conj(lambda)) Pi* (A* - conj(lambda) I)^{-1} S^{-1} (A - mu I)^{-1} Pi,
    ///
    /// relative to the term magnitudes. The correction term is evaluated in
    /// the rearranged form Gamma* (K* - conj(lambda) I)^{-1} (K - mu I)^{-1} Gamma.
    pub fn transfer_jform_residual(&self, lambda: Complex64, mu: Complex64) -> Result<f64> {
        let j = self.sig.matrix();
        let level = self.levels() - 1;
        let wl = self.transfer_matrix(lambda)?;
        let wm = self.transfer_matrix(mu)?;
        let lhs = wl.adjoint() * &j * &wm - &j;
        let gamma = self.gamma.stacked();
        let xl = self.k_resolvent_apply(level, lambda, &gamma)?;
        let xm = self.k_resolvent_apply(level, mu, &gamma)?;
        let corr = xl.adjoint() * xm * ((mu - lambda.conj()) * mat::I);
        let scale = (mat::frob(&wl) * mat::frob(&wm)).max(mat::frob(&corr)).max(1.0);
        Ok(mat::frob(&(lhs + corr)) / scale)
    }
}

/// Closed form of the row Phi_2* (A - (2z)^{-1} I)^{-1}:
///
///   -(2z/(1+iz)) [qhat^r, qhat^{r-1}, ..., I],  qhat = (1-iz)/(1+iz).
///
/// Rejects z = 0 (the resolvent argument is unbounded) and z = i (the
/// resolvent point hits the spectrum of A).
pub fn resolvent_row(node: &SNode, z: Complex64) -> Result<CMat> {
    let m2 = node.sig().m2();
    let levels = node.levels();
    let one = Complex64::new(1.0, 0.0);
    if z.norm() == 0.0 {
        return Err(Error::BadPoint("resolvent row needs z != 0".into()));
    }
    let denom = one + mat::I * z;
    if denom.norm() == 0.0 {
        return Err(Error::BadPoint(
            "z = i puts (2z)^{-1} in the spectrum of A".into(),
        ));
    }
    let qhat = (one - mat::I * z) / denom;
    let lead = -(2.0 * z) / denom;
    let mut out = CMat::zeros(m2, levels * m2);
    let mut power = one;
    for k in (0..levels).rev() {
        let block = mat::eye(m2) * (lead * power);
        out.view_mut((0, k * m2), (m2, m2)).copy_from(&block);
        power *= qhat;
    }
    Ok(out)
}

/// The contraction of [`resolvent_row`] with the identity stack, which has
/// the closed form i (1 - qhat^{r+1}) I.
pub fn resolvent_row_contraction(node: &SNode, z: Complex64) -> Result<CMat> {
    let row = resolvent_row(node, z)?;
    Ok(&row * node.phi2())
}

/// Relative residual of the transfer-matrix representation of the
/// fundamental solution, W_{r+1}(z) = (1 + i z)^{r+1} w_A((2z)^{-1}).
pub fn check_fundamental_representation(pot: &DiracPotential, z: Complex64) -> Result<f64> {
    if z.norm() == 0.0 || (z - mat::I).norm() == 0.0 || (z + mat::I).norm() == 0.0 {
        return Err(Error::BadPoint(
            "representation check needs z outside {0, i, -i}".into(),
        ));
    }
    let node = build_snode(pot)?;
    let w = crate::direct::fundamental_solution(pot, z);
    let lambda = Complex64::new(0.5, 0.0) / z;
    let transfer = node.transfer_matrix(lambda)?;
    let scale = (Complex64::new(1.0, 0.0) + mat::I * z).powu(pot.len() as u32);
    let diff = w.value() - transfer * scale;
    Ok(mat::frob(&diff) / mat::frob(w.value()).max(1.0))
}
