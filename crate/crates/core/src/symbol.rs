//! Homogeneous constant-coefficient symbols `b(xi) = sum_{|alpha| = p} b_alpha xi^alpha`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{c64, hermitian_eigenvalues, CMat, ZERO};

pub const DEFAULT_SPHERE_SAMPLES: usize = 2048;
/// Rank tolerance, relative to `alpha_1^{1/2}`.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    /// `p * e_axis` in dimension `dim`.
    pub fn axis(dim: usize, axis: usize, power: u32) -> Self {
        let mut e = vec![0; dim];
        e[axis] = power;
        MultiIndex(e)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `xi^alpha = prod_j xi_j^{alpha_j}`.
    pub fn monomial(&self, xi: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(xi)
            .map(|(&a, &x)| x.powi(a as i32))
            .product()
    }
}

/// Every multi-index of dimension `dim` with `|beta| <= order`.
pub fn multi_indices_up_to(dim: usize, order: u32) -> Vec<MultiIndex> {
    fn rec(dim: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if prefix.len() == dim {
            out.push(MultiIndex(prefix.clone()));
            return;
        }
        for a in 0..=left {
            prefix.push(a);
            rec(dim, left - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, order, &mut Vec::new(), &mut out);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct DifferentialSymbol {
    order: u32,
    dim: usize,
    rows: usize,
    cols: usize,
    terms: Vec<(MultiIndex, CMat)>,
}

impl DifferentialSymbol {
    /// `rows = m`, `cols = n`; every term must be homogeneous of the same order.
    pub fn new(dim: usize, rows: usize, cols: usize, terms: Vec<(MultiIndex, CMat)>) -> Result<Self> {
        if dim == 0 || cols == 0 || rows < cols {
            return Err(Error::Validation(format!(
                "symbol needs d >= 1 and m >= n >= 1 (got d={dim}, m={rows}, n={cols})"
            )));
        }
        let Some(order) = terms.first().map(|(a, _)| a.order()) else {
            return Err(Error::Validation("symbol has no terms".into()));
        };
        if order == 0 {
            return Err(Error::Validation("symbol order must be at least 1".into()));
        }
        for (alpha, b) in &terms {
            if alpha.dim() != dim {
                return Err(Error::Validation(format!(
                    "multi-index {:?} has dimension {}, expected {dim}",
                    alpha.entries(),
                    alpha.dim()
                )));
            }
            if alpha.order() != order {
                return Err(Error::Validation(format!(
                    "symbol is not homogeneous: |alpha| = {} and {}",
                    alpha.order(),
                    order
                )));
            }
            if b.nrows() != rows || b.ncols() != cols {
                return Err(Error::Validation(format!(
                    "coefficient for {:?} is {}x{}, expected {rows}x{cols}",
                    alpha.entries(),
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        if terms.iter().all(|(_, b)| b.iter().all(|z| *z == ZERO)) {
            return Err(Error::Validation("all symbol coefficients vanish".into()));
        }
        // merge repeated multi-indices
        let mut merged: Vec<(MultiIndex, CMat)> = Vec::new();
        for (alpha, b) in terms {
            match merged.iter_mut().find(|(a, _)| *a == alpha) {
                Some((_, acc)) => *acc += b,
                None => merged.push((alpha, b)),
            }
        }
        merged.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(DifferentialSymbol {
            order,
            dim,
            rows,
            cols,
            terms: merged,
        })
    }

    /// `b(D) = D = -i grad`, acting on scalar functions (`m = d`, `n = 1`).
    pub fn gradient(dim: usize) -> Self {
        Self::axis_powers(dim, 1)
    }

    /// `b(D) = (D_1^p, ..., D_d^p)^T` acting on scalar functions.
    pub fn axis_powers(dim: usize, order: u32) -> Self {
        let terms = (0..dim)
            .map(|j| {
                let mut b = CMat::zeros(dim, 1);
                b[(j, 0)] = c64(1.0, 0.0);
                (MultiIndex::axis(dim, j, order), b)
            })
            .collect();
        Self::new(dim, dim, 1, terms).expect("preset symbol is valid")
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `m`
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// `n`
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn terms(&self) -> &[(MultiIndex, CMat)] {
        &self.terms
    }

    pub fn evaluate(&self, xi: &[f64]) -> CMat {
        let mut out = CMat::zeros(self.rows, self.cols);
        for (alpha, b) in &self.terms {
            let w = alpha.monomial(xi);
            if w != 0.0 {
                out += b * c64(w, 0.0);
            }
        }
        out
    }

    /// Sampled `(alpha_0, alpha_1)`: extreme eigenvalues of `b(theta)^* b(theta)`
    /// over the unit sphere.
    pub fn ellipticity_bounds(&self, sphere_samples: usize) -> Result<(f64, f64)> {
        let (lo, hi) = self.sampled_gram_range(sphere_samples);
        if !(hi > 0.0) || lo.max(0.0).sqrt() <= DEFAULT_RANK_TOL * hi.sqrt() {
            return Err(Error::DegenerateSymbol(format!(
                "b(theta) loses rank on the sphere (alpha_0 = {lo:.3e}, alpha_1 = {hi:.3e})"
            )));
        }
        Ok((lo, hi))
    }

    /// True iff the smallest singular value of `b(theta)` exceeds `tol` at
    /// every sampled direction.
    pub fn check_rank(&self, sphere_samples: usize, tol: f64) -> bool {
        sphere_points(self.dim, sphere_samples).iter().all(|theta| {
            let b = self.evaluate(theta);
            let gram = b.adjoint() * &b;
            hermitian_eigenvalues(&gram)[0].max(0.0).sqrt() > tol
        })
    }

    fn sampled_gram_range(&self, sphere_samples: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for theta in sphere_points(self.dim, sphere_samples) {
            let b = self.evaluate(&theta);
            let ev = hermitian_eigenvalues(&(b.adjoint() * &b));
            lo = lo.min(ev[0]);
            hi = hi.max(ev[ev.len() - 1]);
        }
        (lo, hi)
    }
}

/// Deterministic quasi-uniform directions on `S^{d-1}`: `{+1, -1}` for
/// `d = 1`, equispaced angles for `d = 2`, a Fibonacci sphere for `d = 3`
/// and normalized Halton points otherwise.
pub fn sphere_points(dim: usize, count: usize) -> Vec<Vec<f64>> {
    let count = count.max(1);
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|j| {
                    let z = 1.0 - 2.0 * (j as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let t = golden * j as f64;
                    vec![r * t.cos(), r * t.sin(), z]
                })
                .collect()
        }
        _ => {
            const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
            (1..=count)
                .map(|j| {
                    let mut v: Vec<f64> = (0..dim)
                        .map(|i| {
                            let u = halton(j as u64, PRIMES[i % PRIMES.len()]);
                            2.0 * u - 1.0
                        })
                        .collect();
                    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
                    v.iter_mut().for_each(|x| *x /= n);
                    v
                })
                .collect()
        }
    }
}

fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}
