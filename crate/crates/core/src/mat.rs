//! Small helpers on dense complex matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Dense complex matrix used throughout the crate.
pub type CMat = DMatrix<Complex64>;

pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Frobenius norm.
pub fn frob(m: &CMat) -> f64 {
    m.norm()
}

/// Hermitian part (m + m*)/2.
pub fn herm_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// ‖m − m*‖ / max(1, ‖m‖).
pub fn hermiticity_residual(m: &CMat) -> f64 {
    frob(&(m - m.adjoint())) / frob(m).max(1.0)
}

/// Eigenvalues and eigenvectors of the Hermitian part of `m`.
/// Returns (eigenvalues ascending, eigenvector columns).
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let sym = herm_part(m);
    let eig = sym.symmetric_eigen();
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let vals: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let n = m.nrows();
    let mut vecs = CMat::zeros(n, n);
    for (col, &i) in idx.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &CMat) -> f64 {
    let (vals, _) = hermitian_eigen(m);
    vals[0]
}

/// Largest singular value, computed as sqrt of the top eigenvalue of m* m.
pub fn spectral_norm(m: &CMat) -> f64 {
    let gram = m.adjoint() * m;
    let (vals, _) = hermitian_eigen(&gram);
    vals.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// True when every entry is finite.
pub fn all_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Identity matrix of order n.
pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Real matrix literal, row-major.
pub fn real_mat(nrows: usize, ncols: usize, data: &[f64]) -> CMat {
    assert_eq!(data.len(), nrows * ncols);
    CMat::from_row_slice(
        nrows,
        ncols,
        &data.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>(),
    )
}

/// Owned copy of a rectangular block.
pub fn block(m: &CMat, row0: usize, col0: usize, nrows: usize, ncols: usize) -> CMat {
    m.view((row0, col0), (nrows, ncols)).into_owned()
}

/// Horizontal concatenation. All inputs must share a row count.
pub fn hcat(parts: &[&CMat]) -> CMat {
    let nrows = parts[0].nrows();
    let ncols: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut out = CMat::zeros(nrows, ncols);
    let mut at = 0;
    for p in parts {
        assert_eq!(p.nrows(), nrows);
        out.view_mut((0, at), (nrows, p.ncols())).copy_from(*p);
        at += p.ncols();
    }
    out
}

/// Vertical concatenation. All inputs must share a column count.
pub fn vcat(parts: &[&CMat]) -> CMat {
    let ncols = parts[0].ncols();
    let nrows: usize = parts.iter().map(|p| p.nrows()).sum();
    let mut out = CMat::zeros(nrows, ncols);
    let mut at = 0;
    for p in parts {
        assert_eq!(p.ncols(), ncols);
        out.view_mut((at, 0), (p.nrows(), ncols)).copy_from(*p);
        at += p.nrows();
    }
    out
}

/// 2x2 block assembly [[a, b], [c, d]].
pub fn block2x2(a: &CMat, b: &CMat, c: &CMat, d: &CMat) -> CMat {
    vcat(&[&hcat(&[a, b]), &hcat(&[c, d])])
}
