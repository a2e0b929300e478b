//! Dense complex linear algebra helpers shared by the cell solver and the
//! fiber computations.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn frobenius_sq(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest entry of the anti-Hermitian part `(M - M*)/2`.
pub fn anti_hermitian_defect(m: &CMat) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max(((m[(i, j)] - m[(j, i)].conj()) * 0.5).norm());
        }
    }
    worst
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * c64(0.5, 0.0)
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut values: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Ascending eigenvalues and the matching orthonormal eigenvectors (columns).
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Largest singular value.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().fold(0.0, |acc, &s| acc.max(s))
}

/// Largest eigenvalue of a Hermitian positive semidefinite matrix, clamped at 0.
pub fn psd_max_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigenvalues(m).last().copied().unwrap_or(0.0).max(0.0)
}

/// Largest eigenvalue of a Hermitian positive semidefinite operator given by
/// its action, by Lanczos with full reorthogonalization. Stops once the Ritz
/// residual is below `rel_tol` times the Ritz value.
pub fn lanczos_top_eigenvalue<F: FnMut(&CVec) -> CVec>(dim: usize, mut apply: F, rel_tol: f64) -> f64 {
    if dim == 0 {
        return 0.0;
    }
    let golden = 0.618_033_988_749_894_9;
    let mut v = CVec::from_fn(dim, |i, _| {
        let t = (i + 1) as f64;
        c64(0.5 + (t * golden).fract(), (t * std::f64::consts::SQRT_2).fract() - 0.5)
    });
    v /= c64(v.norm(), 0.0);
    let mut basis: Vec<CVec> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut theta = 0.0;
    for j in 0..dim {
        let mut w = apply(&v);
        let a = v.dotc(&w).re;
        w.axpy(c64(-a, 0.0), &v, ONE);
        if let (Some(prev), Some(&b)) = (basis.last(), beta.last()) {
            w.axpy(c64(-b, 0.0), prev, ONE);
        }
        basis.push(v.clone());
        alpha.push(a);
        for _ in 0..2 {
            for q in &basis {
                let c = q.dotc(&w);
                w.axpy(-c, q, ONE);
            }
        }
        let b = w.norm();
        let size = j + 1;
        let last = b <= f64::MIN_POSITIVE || size == dim;
        if last || (size >= 6 && size % 3 == 0) {
            let mut t = DMatrix::<f64>::zeros(size, size);
            for i in 0..size {
                t[(i, i)] = alpha[i];
                if i + 1 < size {
                    t[(i, i + 1)] = beta[i];
                    t[(i + 1, i)] = beta[i];
                }
            }
            let eig = t.symmetric_eigen();
            let (top, &value) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .expect("nonempty");
            theta = value;
            let residual = b * eig.eigenvectors[(size - 1, top)].abs();
            if last || residual <= rel_tol * theta.abs() {
                break;
            }
        }
        beta.push(b);
        v = w / c64(b, 0.0);
    }
    theta.max(0.0)
}

const LANCZOS_TOL: f64 = 1e-11;

/// Largest singular value of `x` through Lanczos on `x^* x`.
pub fn operator_norm(x: &CMat) -> f64 {
    if x.iter().all(|v| *v == ZERO) {
        return 0.0;
    }
    let dim = x.ncols();
    if dim <= 8 {
        return spectral_norm(x);
    }
    lanczos_top_eigenvalue(dim, |v| x.ad_mul(&(x * v)), LANCZOS_TOL).sqrt()
}

pub fn inverse(m: &CMat) -> Result<CMat> {
    m.clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Numerical(format!("singular {}x{} matrix", m.nrows(), m.ncols())))
}

/// Inverse of a Hermitian positive definite matrix through Cholesky.
pub fn hpd_inverse(m: &CMat) -> Result<CMat> {
    hermitian_part(m)
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::Positivity("matrix is not positive definite".into()))
}

/// Square root of a Hermitian PSD matrix; eigenvalues within `-clamp_rel * |M|`
/// of zero are set to zero.
pub fn psd_sqrt(m: &CMat, clamp_rel: f64) -> Result<CMat> {
    let (values, vectors) = hermitian_eigen(m);
    let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut roots = Vec::with_capacity(values.len());
    for v in values {
        if v < -clamp_rel * scale {
            return Err(Error::Positivity(format!(
                "eigenvalue {v:.3e} below the clamping window of a PSD square root"
            )));
        }
        roots.push(c64(v.max(0.0).sqrt(), 0.0));
    }
    let diag = CMat::from_diagonal(&CVec::from_vec(roots));
    Ok(&vectors * diag * vectors.adjoint())
}
