//! Truncated Bloch fibers `A(k) = b(D+k)^* g b(D+k)` and `A0(k)`, their
//! lowest eigenvalues, and the spectral germ.

use crate::error::{Error, Result};
use crate::lattice::FrequencyWindow;
use crate::linalg::{hermitian_eigenvalues, hpd_inverse, CMat};
use crate::problem::Problem;
use crate::symbol::DifferentialSymbol;

/// Above this ratio to the lowest eigenvalue the direct dense values are used.
const INVERSE_ROUTE_SPAN: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiberKind {
    Full,
    Effective,
}

#[derive(Debug, Clone)]
pub struct FiberOperator {
    k: Vec<f64>,
    window: FrequencyWindow,
    kind: FiberKind,
    n: usize,
    /// `b(s(z)+k)` per window frequency.
    symbols: Vec<CMat>,
    /// `|s(z)+k|^p` per window frequency.
    scales: Vec<f64>,
    matrix: CMat,
}

/// `b(s(z)+k)` and `|s(z)+k|^p` over the window.
pub(crate) fn shifted_symbols(
    problem: &Problem,
    window: &FrequencyWindow,
    k: &[f64],
) -> (Vec<CMat>, Vec<f64>) {
    let lattice = problem.lattice();
    let p = problem.order() as i32;
    window
        .points()
        .iter()
        .map(|z| {
            let xi: Vec<f64> = lattice.dual_vector(z).iter().zip(k).map(|(s, k)| s + k).collect();
            let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            (problem.symbol().evaluate(&xi), r.powi(p))
        })
        .unzip()
}

pub(crate) fn check_k(problem: &Problem, k: &[f64]) -> Result<()> {
    if k.len() != problem.dim() {
        return Err(Error::Validation(format!(
            "dimension mismatch: k has d = {}, lattice has d = {}",
            k.len(),
            problem.dim()
        )));
    }
    Ok(())
}

pub fn assemble_fiber(problem: &Problem, k: &[f64], order: usize) -> Result<FiberOperator> {
    check_k(problem, k)?;
    let field = problem.field();
    if order < field.support() {
        return Err(Error::Validation(format!(
            "truncation N = {order} is below the field support N_g = {}",
            field.support()
        )));
    }
    let window = FrequencyWindow::new(problem.dim(), order);
    let (symbols, scales) = shifted_symbols(problem, &window, k);
    let n = problem.symbol().cols();
    let len = window.len();
    let mut matrix = CMat::zeros(n * len, n * len);
    for i in 0..len {
        let left = symbols[i].adjoint();
        for j in 0..len {
            let Some(q) = field.window().index_of_difference(window.point(i), window.point(j)) else {
                continue;
            };
            let block = &left * &field.coefficients()[q] * &symbols[j];
            matrix.view_mut((i * n, j * n), (n, n)).copy_from(&block);
        }
    }
    Ok(FiberOperator {
        k: k.to_vec(),
        window,
        kind: FiberKind::Full,
        n,
        symbols,
        scales,
        matrix,
    })
}

pub fn assemble_effective_fiber(
    problem: &Problem,
    g0: &CMat,
    k: &[f64],
    order: usize,
) -> Result<FiberOperator> {
    check_k(problem, k)?;
    let window = FrequencyWindow::new(problem.dim(), order);
    let (symbols, scales) = shifted_symbols(problem, &window, k);
    let n = problem.symbol().cols();
    let mut matrix = CMat::zeros(n * window.len(), n * window.len());
    for (i, b) in symbols.iter().enumerate() {
        matrix
            .view_mut((i * n, i * n), (n, n))
            .copy_from(&(b.adjoint() * g0 * b));
    }
    Ok(FiberOperator {
        k: k.to_vec(),
        window,
        kind: FiberKind::Effective,
        n,
        symbols,
        scales,
        matrix,
    })
}

impl FiberOperator {
    pub fn k(&self) -> &[f64] {
        &self.k
    }

    pub fn order(&self) -> usize {
        self.window.order()
    }

    pub fn window(&self) -> &FrequencyWindow {
        &self.window
    }

    pub fn kind(&self) -> FiberKind {
        self.kind
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn symbols(&self) -> &[CMat] {
        &self.symbols
    }

    pub fn block(&self, i: usize, j: usize) -> CMat {
        self.matrix
            .view((i * self.n, j * self.n), (self.n, self.n))
            .into_owned()
    }

    /// The smallest `count` eigenvalues, ascending.
    pub fn eigenvalues(&self, count: usize) -> Result<Vec<f64>> {
        if count > self.size() {
            return Err(Error::Validation(format!(
                "requested {count} eigenvalues of a {} x {} fiber",
                self.size(),
                self.size()
            )));
        }
        let mut values = match self.kind {
            FiberKind::Effective => {
                let mut all = Vec::with_capacity(self.size());
                for i in 0..self.window.len() {
                    all.extend(hermitian_eigenvalues(&self.block(i, i)));
                }
                all.sort_by(f64::total_cmp);
                all
            }
            FiberKind::Full => {
                let mut all = hermitian_eigenvalues(&self.matrix);
                if let Some(low) = self.lowest_by_inverse() {
                    let floor = low[0];
                    for (v, l) in all.iter_mut().zip(low) {
                        if l <= INVERSE_ROUTE_SPAN * floor {
                            *v = l;
                        }
                    }
                }
                all
            }
        };
        values.truncate(count);
        Ok(values)
    }

    /// Eigenvalues of `A = D Ã D` with `D = |s(z)+k|^p` from the top of the
    /// spectrum of `D^{-1} Ã^{-1} D^{-1}`. Keeps relative accuracy near the
    /// bottom of the spectrum when `k != 0`.
    fn lowest_by_inverse(&self) -> Option<Vec<f64>> {
        if self.scales.contains(&0.0) {
            return None;
        }
        let n = self.n;
        let d: Vec<f64> = (0..self.size()).map(|i| self.scales[i / n]).collect();
        let tilde = CMat::from_fn(self.size(), self.size(), |i, j| self.matrix[(i, j)] / (d[i] * d[j]));
        let inv = hpd_inverse(&tilde).ok()?;
        let h = CMat::from_fn(self.size(), self.size(), |i, j| inv[(i, j)] / (d[i] * d[j]));
        let mut mu = hermitian_eigenvalues(&h);
        mu.reverse();
        Some(mu.into_iter().map(|m| 1.0 / m).collect())
    }
}

/// `S(theta) = b(theta)^* g0 b(theta)`.
pub fn germ(symbol: &DifferentialSymbol, g0: &CMat, theta: &[f64]) -> Result<CMat> {
    let norm = theta.iter().map(|t| t * t).sum::<f64>().sqrt();
    if theta.len() != symbol.dim() || (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("theta must be a unit {}-vector", symbol.dim())));
    }
    let b = symbol.evaluate(theta);
    Ok(b.adjoint() * g0 * b)
}

/// The germ with its nondegeneracy check `S(theta) >= c_*`.
pub fn spectral_germ(problem: &Problem, g0: &CMat, theta: &[f64]) -> Result<CMat> {
    let s = germ(problem.symbol(), g0, theta)?;
    let lowest = hermitian_eigenvalues(&s)[0];
    let c_star = problem.c_star();
    if lowest < c_star * (1.0 - 1e-10) {
        return Err(Error::Certification(format!(
            "germ nondegeneracy violated: lowest eigenvalue {lowest:.6e} < c_* = {c_star:.6e}"
        )));
    }
    Ok(s)
}

#[derive(Debug, Clone)]
pub struct ThresholdReport {
    pub theta: Vec<f64>,
    pub t: Vec<f64>,
    /// Eigenvalues `gamma_l` of the germ.
    pub gamma: Vec<f64>,
    /// `lambda_l(t) / t^{2p}` for each `t`.
    pub ratios: Vec<Vec<f64>>,
    /// `max_l |lambda_l(t)/t^{2p} - gamma_l|` for each `t`.
    pub errors: Vec<f64>,
    /// Constant of the bound `error <= C t`, fitted on the two largest `t`.
    pub constant: f64,
    /// Fitted exponent of `error ~ t^q`; `None` when the errors vanish.
    pub order: Option<f64>,
}

const THRESHOLD_EXACT: f64 = 1e-10;
const THRESHOLD_SLACK: f64 = 1.05;

pub fn germ_threshold_check(
    problem: &Problem,
    g0: &CMat,
    theta: &[f64],
    t_list: &[f64],
    order: usize,
) -> Result<ThresholdReport> {
    let r0 = problem.lattice().packing_radius();
    if t_list.is_empty() || t_list.iter().any(|&t| !(t > 0.0 && t < r0)) {
        return Err(Error::Domain(format!("every t must satisfy 0 < t < r0 = {r0}")));
    }
    let mut t: Vec<f64> = t_list.to_vec();
    t.sort_by(|a, b| b.total_cmp(a));
    let s = spectral_germ(problem, g0, theta)?;
    let gamma = hermitian_eigenvalues(&s);
    let n = gamma.len();
    let p2 = 2 * problem.order() as i32;
    let mut ratios = Vec::with_capacity(t.len());
    let mut errors = Vec::with_capacity(t.len());
    for &ti in &t {
        let k: Vec<f64> = theta.iter().map(|c| c * ti).collect();
        let lambda = assemble_fiber(problem, &k, order)?.eigenvalues(n)?;
        let r: Vec<f64> = lambda.iter().map(|l| l / ti.powi(p2)).collect();
        let err = r.iter().zip(&gamma).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        ratios.push(r);
        errors.push(err);
    }
    let scale = gamma.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let exact = errors.iter().all(|&e| e <= THRESHOLD_EXACT * scale);
    let constant = if t.len() >= 2 {
        (errors[0] / t[0]).max(errors[1] / t[1])
    } else {
        errors[0] / t[0]
    };
    let order_fit = if exact || t.len() < 2 {
        None
    } else {
        let xs: Vec<f64> = t.iter().map(|v| v.ln()).collect();
        let ys: Vec<f64> = errors.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
        Some(ols_slope(&xs, &ys))
    };
    if !exact {
        for (i, (&ti, &e)) in t.iter().zip(&errors).enumerate().skip(2) {
            if e > THRESHOLD_SLACK * constant * ti + THRESHOLD_EXACT * scale {
                return Err(Error::Certification(format!(
                    "threshold expansion: error {e:.3e} at t = {ti} (index {i}) exceeds C t = {:.3e}",
                    constant * ti
                )));
            }
        }
    }
    Ok(ThresholdReport {
        theta: theta.to_vec(),
        t,
        gamma,
        ratios,
        errors,
        constant,
        order: order_fit,
    })
}

pub(crate) fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::solve_cell;
    use crate::field::PeriodicMatrixField;
    use crate::lattice::Lattice;
    use crate::linalg::{anti_hermitian_defect, c64, max_abs};
    use std::f64::consts::PI;

    fn cosine(p: u32) -> Problem {
        let field = PeriodicMatrixField::cosine(Lattice::cubic(1), 1, 2.0, 1.0).unwrap();
        Problem::new(field, DifferentialSymbol::axis_powers(1, p)).unwrap()
    }

    fn unit(p: u32) -> Problem {
        let field = PeriodicMatrixField::constant(Lattice::cubic(1), CMat::identity(1, 1)).unwrap();
        Problem::new(field, DifferentialSymbol::axis_powers(1, p)).unwrap()
    }

    #[test]
    fn unit_field_fiber_is_diagonal() {
        let fiber = assemble_fiber(&unit(1), &[0.3], 4).unwrap();
        for (i, z) in fiber.window().points().iter().enumerate() {
            let expected = (2.0 * PI * z[0] as f64 + 0.3).powi(2);
            assert!((fiber.matrix()[(i, i)].re - expected).abs() < 1e-12);
        }
        let low = fiber.eigenvalues(1).unwrap();
        assert!((low[0] - 0.09).abs() < 1e-14);
    }

    /// Galerkin matrix entries `int g conj(phi_i)'' ... ` assembled by quadrature.
    #[test]
    fn cosine_fiber_matches_quadrature() {
        let problem = cosine(1);
        let fiber = assemble_fiber(&problem, &[0.0], 8).unwrap();
        let nodes = 256;
        for (i, zi) in fiber.window().points().iter().enumerate() {
            for (j, zj) in fiber.window().points().iter().enumerate() {
                let (si, sj) = (2.0 * PI * zi[0] as f64, 2.0 * PI * zj[0] as f64);
                let mut acc = c64(0.0, 0.0);
                for q in 0..nodes {
                    let x = q as f64 / nodes as f64;
                    let g = 2.0 + (2.0 * PI * x).cos();
                    let phase = c64(0.0, (sj - si) * x).exp();
                    acc += phase * (g * si * sj);
                }
                acc /= nodes as f64;
                assert!((fiber.matrix()[(i, j)] - acc).norm() < 1e-10);
            }
        }
        assert!(anti_hermitian_defect(fiber.matrix()) < 1e-12);
        assert!(fiber.eigenvalues(1).unwrap()[0].abs() < 1e-10);
    }

    #[test]
    fn effective_zero_block() {
        let problem = cosine(1);
        let g0 = CMat::from_element(1, 1, c64(3f64.sqrt(), 0.0));
        let fiber = assemble_effective_fiber(&problem, &g0, &[0.1], 4).unwrap();
        assert!((fiber.block(0, 0)[(0, 0)].re - 3f64.sqrt() * 0.01).abs() < 1e-15);
        let at_zero = assemble_effective_fiber(&problem, &g0, &[0.0], 4).unwrap();
        assert_eq!(at_zero.block(0, 0)[(0, 0)], c64(0.0, 0.0));
    }

    #[test]
    fn lowest_band_near_germ() {
        let problem = cosine(1);
        let e1 = |k: f64| assemble_fiber(&problem, &[k], 16).unwrap().eigenvalues(1).unwrap()[0] / (k * k);
        // Richardson extrapolation of the ratio to k = 0
        let (a, b) = (e1(0.05), e1(0.025));
        let limit = 2.0 * b - a;
        assert!((limit - 3f64.sqrt()).abs() < 1e-3);
        assert!((a / 3f64.sqrt() - 1.0).abs() <= 5.0 * 0.05);
    }

    #[test]
    fn germ_examples() {
        let problem = cosine(1);
        let g0 = CMat::from_element(1, 1, c64(3f64.sqrt(), 0.0));
        let s = spectral_germ(&problem, &g0, &[1.0]).unwrap();
        assert!((s[(0, 0)].re - 3f64.sqrt()).abs() < 1e-15);
        assert!(matches!(spectral_germ(&problem, &g0, &[0.5]), Err(Error::Domain(_))));
    }

    #[test]
    fn threshold_ratios_approach_sqrt3() {
        for p in [1u32, 2] {
            let problem = cosine(p);
            let sol = solve_cell(&problem, 16, 1e-12).unwrap();
            let r0 = problem.lattice().packing_radius();
            let t: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|c| c * r0).collect();
            let report = germ_threshold_check(&problem, sol.g0(), &[1.0], &t, 16).unwrap();
            assert!(report.order.unwrap() >= 0.9, "p={p} {report:?}");
            assert!(report.errors[2] < report.errors[0]);
        }
    }

    #[test]
    fn threshold_exact_for_constant_field() {
        let problem = unit(2);
        let g0 = CMat::identity(1, 1);
        let report = germ_threshold_check(&problem, &g0, &[1.0], &[0.3, 0.1], 4).unwrap();
        assert!(report.order.is_none());
        assert!(report.errors.iter().all(|&e| e < 1e-12));
        assert!(max_abs(&g0) == 1.0);
    }
}
