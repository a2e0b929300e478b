//! Periodic Hermitian coefficient fields given by truncated Fourier series
//! `g(x) = sum_z g_z exp(i <s(z), x>)`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{FrequencyWindow, Lattice};
use crate::linalg::{c64, hermitian_eigenvalues, max_abs, CMat, ZERO};

/// Grid resolution per axis for positivity certification.
pub const DEFAULT_CHECK_RESOLUTION: usize = 64;
const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldBounds {
    /// `max_x lambda_max(g(x))`
    pub norm_g: f64,
    /// `max_x lambda_max(g(x)^{-1})`
    pub norm_ginv: f64,
    /// `1 / norm_ginv`
    pub lower: f64,
    pub resolution: usize,
}

#[derive(Debug, Clone)]
pub struct PeriodicMatrixField {
    lattice: Lattice,
    size: usize,
    window: FrequencyWindow,
    coeffs: Vec<CMat>,
    bounds: OnceLock<FieldBounds>,
}

impl PeriodicMatrixField {
    /// Builds a field from explicit coefficients; missing frequencies are zero.
    /// Hermitian symmetry `g_{-z} = g_z^*` must hold to round-off and `g` must
    /// be positive definite on the check grid.
    pub fn from_coefficients(
        lattice: Lattice,
        size: usize,
        entries: Vec<(Vec<i64>, CMat)>,
    ) -> Result<Self> {
        let field = Self::assemble(lattice, size, entries)?;
        let scale = field.coeffs.iter().map(max_abs).fold(0.0, f64::max).max(1.0);
        for (i, z) in field.window.points().iter().enumerate() {
            let neg: Vec<i64> = z.iter().map(|c| -c).collect();
            let j = field.window.index_of(&neg).expect("window is symmetric");
            let defect = max_abs(&(&field.coeffs[i] - field.coeffs[j].adjoint()));
            if defect > HERMITIAN_TOL * scale {
                return Err(Error::Validation(format!(
                    "coefficients violate g_(-z) = g_z^* at z = {z:?} (defect {defect:.3e})"
                )));
            }
        }
        field.bounds()?;
        Ok(field)
    }

    pub fn constant(lattice: Lattice, value: CMat) -> Result<Self> {
        let size = value.nrows();
        let zero = vec![0; lattice.dim()];
        Self::from_coefficients(lattice, size, vec![(zero, value)])
    }

    /// `g(x) = (a + b cos <s^1, x>) * I_size`; on `Gamma = Z` this is `a + b cos 2 pi x`.
    pub fn cosine(lattice: Lattice, size: usize, a: f64, b: f64) -> Result<Self> {
        let dim = lattice.dim();
        let id = CMat::identity(size, size);
        let mut e1 = vec![0i64; dim];
        e1[0] = 1;
        let minus: Vec<i64> = e1.iter().map(|c| -c).collect();
        Self::from_coefficients(
            lattice,
            size,
            vec![
                (vec![0; dim], &id * c64(a, 0.0)),
                (e1, &id * c64(0.5 * b, 0.0)),
                (minus, &id * c64(0.5 * b, 0.0)),
            ],
        )
    }

    /// Coefficients from samples on the uniform cell grid `x = sum_i (j_i / M) n_i`,
    /// listed with the first axis running fastest.
    pub fn from_grid_samples(
        lattice: Lattice,
        samples: &[CMat],
        per_axis: usize,
        support: usize,
    ) -> Result<Self> {
        let dim = lattice.dim();
        if !per_axis.is_multiple_of(2) || per_axis < 2 * support + 2 {
            return Err(Error::Validation(format!(
                "grid of {per_axis} points per axis cannot resolve support {support} (need even and >= {})",
                2 * support + 2
            )));
        }
        if samples.len() != per_axis.pow(dim as u32) {
            return Err(Error::Validation(format!(
                "expected {} samples, got {}",
                per_axis.pow(dim as u32),
                samples.len()
            )));
        }
        let size = samples[0].nrows();
        for (idx, g) in samples.iter().enumerate() {
            if g.nrows() != size || g.ncols() != size {
                return Err(Error::Validation("samples have inconsistent shapes".into()));
            }
            let defect = max_abs(&(g - g.adjoint()));
            if defect > 1e-10 * max_abs(g).max(1.0) {
                return Err(Error::Validation(format!(
                    "sample {idx} is not Hermitian (defect {defect:.3e})"
                )));
            }
            let ev = hermitian_eigenvalues(g);
            if ev[0] <= 0.0 {
                return Err(Error::Positivity(format!(
                    "sample {idx} has smallest eigenvalue {:.3e}",
                    ev[0]
                )));
            }
        }
        let window = FrequencyWindow::new(dim, support);
        let nodes = grid_indices(dim, per_axis);
        let total = samples.len() as f64;
        let mut raw: Vec<CMat> = window
            .points()
            .iter()
            .map(|z| {
                let mut acc = CMat::zeros(size, size);
                for (j, g) in nodes.iter().zip(samples) {
                    let phase = -2.0 * PI * phase_fraction(z, j, per_axis);
                    acc += g * Complex64::from_polar(1.0, phase);
                }
                acc / c64(total, 0.0)
            })
            .collect();
        // enforce exact Hermitian symmetry
        let sym: Vec<CMat> = window
            .points()
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let neg: Vec<i64> = z.iter().map(|c| -c).collect();
                let j = window.index_of(&neg).expect("window is symmetric");
                (&raw[i] + raw[j].adjoint()) * c64(0.5, 0.0)
            })
            .collect();
        raw = sym;
        let entries = window.points().iter().cloned().zip(raw).collect();
        Self::from_coefficients(lattice, size, entries)
    }

    fn assemble(lattice: Lattice, size: usize, entries: Vec<(Vec<i64>, CMat)>) -> Result<Self> {
        let dim = lattice.dim();
        if size == 0 {
            return Err(Error::Validation("field size must be positive".into()));
        }
        let mut support = 0usize;
        for (z, g) in &entries {
            if z.len() != dim {
                return Err(Error::Validation(format!(
                    "frequency {z:?} has dimension {}, lattice has {dim}",
                    z.len()
                )));
            }
            if g.nrows() != size || g.ncols() != size {
                return Err(Error::Validation(format!(
                    "coefficient at {z:?} is {}x{}, expected {size}x{size}",
                    g.nrows(),
                    g.ncols()
                )));
            }
            support = support.max(z.iter().map(|c| c.unsigned_abs() as usize).max().unwrap_or(0));
        }
        let window = FrequencyWindow::new(dim, support);
        let mut coeffs = vec![CMat::zeros(size, size); window.len()];
        for (z, g) in entries {
            let i = window.index_of(&z).expect("support covers every entry");
            coeffs[i] += g;
        }
        Ok(PeriodicMatrixField {
            lattice,
            size,
            window,
            coeffs,
            bounds: OnceLock::new(),
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Fourier support `N_g`.
    pub fn support(&self) -> usize {
        self.window.order()
    }

    pub fn window(&self) -> &FrequencyWindow {
        &self.window
    }

    pub fn coefficients(&self) -> &[CMat] {
        &self.coeffs
    }

    /// `g_z`, zero outside the support.
    pub fn coefficient(&self, z: &[i64]) -> CMat {
        match self.window.index_of(z) {
            Some(i) => self.coeffs[i].clone(),
            None => CMat::zeros(self.size, self.size),
        }
    }

    pub fn mean(&self) -> CMat {
        self.coeffs[0].clone()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().skip(1).all(|g| g.iter().all(|v| *v == ZERO))
    }

    pub fn evaluate(&self, x: &[f64]) -> CMat {
        let mut out = CMat::zeros(self.size, self.size);
        for (z, g) in self.window.points().iter().zip(&self.coeffs) {
            let s = self.lattice.dual_vector(z);
            let phase: f64 = s.iter().zip(x).map(|(a, b)| a * b).sum();
            out += g * Complex64::from_polar(1.0, phase);
        }
        out
    }

    /// Values on the uniform cell grid with `per_axis` points per axis (first
    /// axis fastest), evaluated through exact phase fractions.
    pub fn grid_values(&self, per_axis: usize) -> Vec<CMat> {
        grid_indices(self.lattice.dim(), per_axis)
            .iter()
            .map(|j| {
                let mut out = CMat::zeros(self.size, self.size);
                for (z, g) in self.window.points().iter().zip(&self.coeffs) {
                    let phase = 2.0 * PI * phase_fraction(z, j, per_axis);
                    out += g * Complex64::from_polar(1.0, phase);
                }
                out
            })
            .collect()
    }

    /// Cell grid point `sum_i (j_i / per_axis) n_i`.
    pub fn grid_point(&self, j: &[usize], per_axis: usize) -> Vec<f64> {
        let frac: Vec<f64> = j.iter().map(|&c| c as f64 / per_axis as f64).collect();
        let b = self.lattice.basis();
        (0..self.lattice.dim())
            .map(|r| (0..frac.len()).map(|c| b[(r, c)] * frac[c]).sum())
            .collect()
    }

    /// Bounds on the default check grid, computed once.
    pub fn bounds(&self) -> Result<FieldBounds> {
        if let Some(b) = self.bounds.get() {
            return Ok(*b);
        }
        let b = self.bounds_with(DEFAULT_CHECK_RESOLUTION)?;
        Ok(*self.bounds.get_or_init(|| b))
    }

    /// `(|g|_inf, |g^{-1}|_inf, c)` estimated on a grid of `resolution` points per axis.
    pub fn bounds_with(&self, resolution: usize) -> Result<FieldBounds> {
        let resolution = resolution.max(8);
        let mut hi = 0.0f64;
        let mut lo = f64::INFINITY;
        for (idx, g) in self.grid_values(resolution).iter().enumerate() {
            let ev = hermitian_eigenvalues(g);
            if ev[0] <= 0.0 {
                return Err(Error::Positivity(format!(
                    "g is not positive definite at grid node {idx} (smallest eigenvalue {:.3e})",
                    ev[0]
                )));
            }
            lo = lo.min(ev[0]);
            hi = hi.max(ev[ev.len() - 1]);
        }
        Ok(FieldBounds {
            norm_g: hi,
            norm_ginv: 1.0 / lo,
            lower: lo,
            resolution,
        })
    }

    /// `(|cell|^{-1} int g^{-1})^{-1}` by the uniform-grid rule.
    pub fn harmonic_mean(&self, per_axis: usize) -> Result<CMat> {
        let values = self.grid_values(per_axis);
        let mut acc = CMat::zeros(self.size, self.size);
        for g in &values {
            acc += crate::linalg::hpd_inverse(g)?;
        }
        acc /= c64(values.len() as f64, 0.0);
        crate::linalg::hpd_inverse(&acc)
    }
}

/// A general (not necessarily Hermitian) matrix-valued trigonometric
/// polynomial on the cell, e.g. the corrector `Lambda` or `g(b(D) Lambda + 1)`.
#[derive(Debug, Clone)]
pub struct MatrixSeries {
    lattice: Lattice,
    rows: usize,
    cols: usize,
    window: FrequencyWindow,
    coeffs: Vec<CMat>,
}

impl MatrixSeries {
    pub fn new(lattice: Lattice, window: FrequencyWindow, coeffs: Vec<CMat>) -> Self {
        assert_eq!(window.len(), coeffs.len(), "one coefficient per frequency");
        let (rows, cols) = coeffs.first().map_or((0, 0), |c| (c.nrows(), c.ncols()));
        MatrixSeries {
            lattice,
            rows,
            cols,
            window,
            coeffs,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn window(&self) -> &FrequencyWindow {
        &self.window
    }

    pub fn coefficients(&self) -> &[CMat] {
        &self.coeffs
    }

    pub fn coefficient(&self, z: &[i64]) -> CMat {
        match self.window.index_of(z) {
            Some(i) => self.coeffs[i].clone(),
            None => CMat::zeros(self.rows, self.cols),
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> CMat {
        let mut out = CMat::zeros(self.rows, self.cols);
        for (z, c) in self.window.points().iter().zip(&self.coeffs) {
            let s = self.lattice.dual_vector(z);
            let phase: f64 = s.iter().zip(x).map(|(a, b)| a * b).sum();
            out += c * Complex64::from_polar(1.0, phase);
        }
        out
    }

    /// `|cell|^{-1} int |F|^2_F dx`, by Parseval.
    pub fn mean_square(&self) -> f64 {
        self.coeffs.iter().map(crate::linalg::frobenius_sq).sum()
    }
}

pub(crate) fn grid_indices(dim: usize, per_axis: usize) -> Vec<Vec<usize>> {
    let total = per_axis.pow(dim as u32);
    (0..total)
        .map(|mut idx| {
            let mut j = vec![0usize; dim];
            for c in j.iter_mut() {
                *c = idx % per_axis;
                idx /= per_axis;
            }
            j
        })
        .collect()
}

/// `<s(z), x_j> / 2 pi` for the grid node `x_j`, reduced modulo 1.
fn phase_fraction(z: &[i64], j: &[usize], per_axis: usize) -> f64 {
    let m = per_axis as i64;
    let num: i64 = z.iter().zip(j).map(|(&a, &b)| a * b as i64).sum();
    num.rem_euclid(m) as f64 / per_axis as f64
}
