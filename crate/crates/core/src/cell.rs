//! Periodic cell problem `b(D)^* g (b(D) Lambda + 1_m) = 0`, the effective
//! matrix and the a priori checks on both.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{MatrixSeries, PeriodicMatrixField};
use crate::lattice::FrequencyWindow;
use crate::linalg::{
    anti_hermitian_defect, c64, frobenius_sq, hermitian_eigenvalues, hermitian_part, hpd_inverse,
    max_abs, CMat, CVec,
};
use crate::problem::Problem;
use crate::symbol::multi_indices_up_to;

pub const DEFAULT_CELL_TOL: f64 = 1e-10;
/// Largest system solved by the dense reference path.
pub const DENSE_LIMIT: usize = 4000;
const VOIGT_REUSS_TOL: f64 = 1e-8;
const UNDER_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellSolver {
    /// Preconditioned conjugate gradients with a convolution matrix action.
    Iterative,
    /// Dense Cholesky on the assembled system.
    Dense,
}

#[derive(Debug, Clone, Copy)]
pub struct CellOptions {
    pub order: usize,
    pub tol: f64,
    pub solver: CellSolver,
    pub max_iterations: Option<usize>,
}

impl CellOptions {
    pub fn new(order: usize) -> Self {
        CellOptions {
            order,
            tol: DEFAULT_CELL_TOL,
            solver: CellSolver::Iterative,
            max_iterations: None,
        }
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn solver(mut self, solver: CellSolver) -> Self {
        self.solver = solver;
        self
    }
}

#[derive(Debug, Clone)]
pub struct CellSolution {
    problem: Problem,
    order: usize,
    lambda: MatrixSeries,
    residual: f64,
    iterations: usize,
    g_tilde: MatrixSeries,
    g0: CMat,
}

impl CellSolution {
    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Fourier coefficients of `Lambda` (`n x m`) on the window `|z_i| <= N`;
    /// the zero coefficient is exactly zero.
    pub fn lambda(&self) -> &MatrixSeries {
        &self.lambda
    }

    /// Largest relative residual of the Galerkin systems over all columns.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// `g(b(D) Lambda + 1_m)`, supported on `|z_i| <= N + N_g`.
    pub fn g_tilde(&self) -> &MatrixSeries {
        &self.g_tilde
    }

    pub fn g0(&self) -> &CMat {
        &self.g0
    }
}

pub fn solve_cell(problem: &Problem, order: usize, tol: f64) -> Result<CellSolution> {
    solve_cell_with(problem, CellOptions::new(order).tol(tol))
}

pub fn solve_cell_with(problem: &Problem, opts: CellOptions) -> Result<CellSolution> {
    let field = problem.field();
    if opts.order < field.support() {
        return Err(Error::Validation(format!(
            "truncation N = {} is below the field support N_g = {}",
            opts.order,
            field.support()
        )));
    }
    let system = CellSystem::new(problem, opts.order);
    let m = problem.symbol().rows();
    let budget = opts.max_iterations.unwrap_or((10 * system.unknowns()).max(1000));

    let columns: Vec<Result<(CVec, f64, usize)>> = (0..m)
        .into_par_iter()
        .map(|j| {
            let rhs = system.rhs(j);
            let (x, iters) = match opts.solver {
                CellSolver::Iterative => system.pcg(&rhs, opts.tol, budget)?,
                CellSolver::Dense => (system.dense_solve(&rhs)?, 0),
            };
            let res = system.relative_residual(&x, &rhs);
            Ok((x, res, iters))
        })
        .collect();

    let n = problem.symbol().cols();
    let window = system.window.clone();
    let mut lambda = vec![CMat::zeros(n, m); window.len()];
    let mut residual = 0.0f64;
    let mut iterations = 0usize;
    for (j, col) in columns.into_iter().enumerate() {
        let (x, res, iters) = col?;
        residual = residual.max(res);
        iterations = iterations.max(iters);
        for i in 1..window.len() {
            for a in 0..n {
                lambda[i][(a, j)] = x[(i - 1) * n + a];
            }
        }
    }
    if residual > opts.tol {
        return Err(Error::Convergence {
            iterations,
            residual,
        });
    }

    let g_tilde = assemble_g_tilde(field, &system, &lambda);
    let raw_g0 = g_tilde.coefficients()[0].clone();
    let scale = max_abs(&raw_g0).max(f64::MIN_POSITIVE);
    if anti_hermitian_defect(&raw_g0) > 1e-10 * scale {
        return Err(Error::Numerical(format!(
            "effective matrix is not Hermitian (defect {:.3e})",
            anti_hermitian_defect(&raw_g0)
        )));
    }
    let g0 = hermitian_part(&raw_g0);
    if hermitian_eigenvalues(&g0)[0] <= 0.0 {
        return Err(Error::Numerical(
            "effective matrix is not positive definite; cell solve is unreliable".into(),
        ));
    }
    Ok(CellSolution {
        problem: problem.clone(),
        order: opts.order,
        lambda: MatrixSeries::new(problem.lattice().clone(), window, lambda),
        residual,
        iterations,
        g_tilde,
        g0,
    })
}

/// `g0 = g_0 + sum_{z != 0} g_{-z} b(s(z)) Lambda_z`, the zero coefficient of `g_tilde`.
pub fn effective_matrix(sol: &CellSolution) -> CMat {
    sol.g0.clone()
}

fn assemble_g_tilde(field: &PeriodicMatrixField, system: &CellSystem, lambda: &[CMat]) -> MatrixSeries {
    let m = field.size();
    let big = FrequencyWindow::new(field.lattice().dim(), system.window.order() + field.support());
    let mut coeffs = vec![CMat::zeros(m, m); big.len()];
    for (zq, gq) in field.window().points().iter().zip(field.coefficients()) {
        coeffs[big.index_of(zq).expect("support fits")] += gq;
    }
    for i in 1..system.window.len() {
        let flux = &system.symbols[i] * &lambda[i]; // m x m
        let zi = system.window.point(i);
        for (zq, gq) in field.window().points().iter().zip(field.coefficients()) {
            let z: Vec<i64> = zi.iter().zip(zq).map(|(a, b)| a + b).collect();
            coeffs[big.index_of(&z).expect("sum fits the enlarged window")] += gq * &flux;
        }
    }
    MatrixSeries::new(field.lattice().clone(), big, coeffs)
}

/// The Galerkin system on nonzero frequencies `0 < |z|_inf <= N`.
pub(crate) struct CellSystem<'a> {
    problem: &'a Problem,
    window: FrequencyWindow,
    /// `b(s(z))` for every window frequency.
    symbols: Vec<CMat>,
    /// For each window index, the pairs `(field index q, window index of z - z_q)`.
    stencil: Vec<Vec<(usize, usize)>>,
    block_inverses: Vec<CMat>,
}

impl<'a> CellSystem<'a> {
    pub(crate) fn new(problem: &'a Problem, order: usize) -> Self {
        let lattice = problem.lattice();
        let window = FrequencyWindow::new(lattice.dim(), order);
        let symbols: Vec<CMat> = window
            .points()
            .iter()
            .map(|z| problem.symbol().evaluate(&lattice.dual_vector(z)))
            .collect();
        let field = problem.field();
        let stencil = window
            .points()
            .iter()
            .map(|z| {
                field
                    .window()
                    .points()
                    .iter()
                    .enumerate()
                    .filter_map(|(q, zq)| window.index_of_difference(z, zq).map(|j| (q, j)))
                    .collect()
            })
            .collect();
        let g_mean = field.mean();
        let block_inverses = symbols
            .iter()
            .enumerate()
            .map(|(i, b)| {
                if i == 0 {
                    CMat::zeros(b.ncols(), b.ncols())
                } else {
                    hpd_inverse(&(b.adjoint() * &g_mean * b)).expect("diagonal blocks are HPD")
                }
            })
            .collect();
        CellSystem {
            problem,
            window,
            symbols,
            stencil,
            block_inverses,
        }
    }

    fn n(&self) -> usize {
        self.problem.symbol().cols()
    }

    pub(crate) fn unknowns(&self) -> usize {
        self.n() * (self.window.len() - 1)
    }

    /// `-b(s(z))^* g_z e_j` for every nonzero `z` in the window.
    pub(crate) fn rhs(&self, column: usize) -> CVec {
        let n = self.n();
        let field = self.problem.field();
        let mut out = CVec::zeros(self.unknowns());
        for i in 1..self.window.len() {
            let g = field.coefficient(self.window.point(i));
            let v = -(self.symbols[i].adjoint() * g.column(column));
            out.rows_mut((i - 1) * n, n).copy_from(&v);
        }
        out
    }

    /// Matrix action by convolution with the field coefficients.
    pub(crate) fn apply(&self, x: &CVec) -> CVec {
        let n = self.n();
        let m = self.problem.symbol().rows();
        let coeffs = self.problem.field().coefficients();
        let mut w: Vec<CVec> = Vec::with_capacity(self.window.len());
        w.push(CVec::zeros(m));
        for i in 1..self.window.len() {
            w.push(&self.symbols[i] * x.rows((i - 1) * n, n));
        }
        let mut out = CVec::zeros(self.unknowns());
        for i in 1..self.window.len() {
            let mut v = CVec::zeros(m);
            for &(q, j) in &self.stencil[i] {
                if j != 0 {
                    v.gemv(c64(1.0, 0.0), &coeffs[q], &w[j], c64(1.0, 0.0));
                }
            }
            out.rows_mut((i - 1) * n, n)
                .copy_from(&(self.symbols[i].adjoint() * v));
        }
        out
    }

    pub(crate) fn assemble_dense(&self) -> CMat {
        let n = self.n();
        let size = self.unknowns();
        let mut k = CMat::zeros(size, size);
        let field = self.problem.field();
        for i in 1..self.window.len() {
            for j in 1..self.window.len() {
                let Some(q) = field
                    .window()
                    .index_of_difference(self.window.point(i), self.window.point(j))
                else {
                    continue;
                };
                let block =
                    self.symbols[i].adjoint() * &field.coefficients()[q] * &self.symbols[j];
                k.view_mut(((i - 1) * n, (j - 1) * n), (n, n)).copy_from(&block);
            }
        }
        k
    }

    fn precondition(&self, r: &CVec) -> CVec {
        let n = self.n();
        let mut out = CVec::zeros(r.len());
        for i in 1..self.window.len() {
            out.rows_mut((i - 1) * n, n)
                .copy_from(&(&self.block_inverses[i] * r.rows((i - 1) * n, n)));
        }
        out
    }

    pub(crate) fn relative_residual(&self, x: &CVec, rhs: &CVec) -> f64 {
        let b = rhs.norm();
        if b == 0.0 {
            return (self.apply(x)).norm();
        }
        (rhs - self.apply(x)).norm() / b
    }

    fn pcg(&self, rhs: &CVec, tol: f64, budget: usize) -> Result<(CVec, usize)> {
        let size = rhs.len();
        let mut x = CVec::zeros(size);
        let b_norm = rhs.norm();
        if b_norm == 0.0 {
            return Ok((x, 0));
        }
        let mut total = 0usize;
        // restarts guard against drift between the recursive and true residual
        for _ in 0..4 {
            let mut r = rhs - self.apply(&x);
            if r.norm() <= tol * b_norm {
                return Ok((x, total));
            }
            let mut z = self.precondition(&r);
            let mut p = z.clone();
            let mut rz = r.dotc(&z);
            while total < budget {
                total += 1;
                let ap = self.apply(&p);
                let curvature = p.dotc(&ap);
                if curvature.re <= 0.0 {
                    return Err(Error::Numerical("cell operator lost positivity".into()));
                }
                let alpha = rz / curvature;
                x.axpy(alpha, &p, c64(1.0, 0.0));
                r.axpy(-alpha, &ap, c64(1.0, 0.0));
                if r.norm() <= 0.1 * tol * b_norm {
                    break;
                }
                z = self.precondition(&r);
                let rz_next = r.dotc(&z);
                let beta = rz_next / rz;
                rz = rz_next;
                p = &z + &p * beta;
            }
            if total >= budget {
                break;
            }
        }
        let res = self.relative_residual(&x, rhs);
        if res <= tol {
            Ok((x, total))
        } else {
            Err(Error::Convergence {
                iterations: total,
                residual: res,
            })
        }
    }

    fn dense_solve(&self, rhs: &CVec) -> Result<CVec> {
        if self.unknowns() > DENSE_LIMIT {
            return Err(Error::Validation(format!(
                "dense cell solve limited to {DENSE_LIMIT} unknowns, got {}",
                self.unknowns()
            )));
        }
        let k = self.assemble_dense();
        let chol = hermitian_part(&k)
            .cholesky()
            .ok_or_else(|| Error::Numerical("cell system is not positive definite".into()))?;
        Ok(chol.solve(rhs))
    }
}

#[derive(Debug, Clone)]
pub struct VoigtReussReport {
    /// Arithmetic mean of `g`.
    pub g_over: CMat,
    /// Harmonic mean of `g`.
    pub g_under: CMat,
    pub holds: bool,
    /// Smallest eigenvalue of `g0 - g_under`.
    pub lower_margin: f64,
    /// Smallest eigenvalue of `g_over - g0`.
    pub upper_margin: f64,
    pub quadrature_resolution: usize,
}

/// Grid resolution per axis for cell means of non-polynomial integrands.
pub fn quadrature_resolution(dim: usize, support: usize) -> usize {
    let floor = if dim <= 2 { 64 } else { 32 };
    (4 * (2 * support + 1)).max(floor)
}

pub fn voigt_reuss(field: &PeriodicMatrixField, g0: &CMat) -> Result<VoigtReussReport> {
    let res = quadrature_resolution(field.lattice().dim(), field.support());
    let g_over = field.mean();
    let g_under = field.harmonic_mean(res)?;
    let lower_margin = hermitian_eigenvalues(&(g0 - &g_under))[0];
    let upper_margin = hermitian_eigenvalues(&(&g_over - g0))[0];
    Ok(VoigtReussReport {
        holds: lower_margin >= -VOIGT_REUSS_TOL && upper_margin >= -VOIGT_REUSS_TOL,
        g_over,
        g_under,
        lower_margin,
        upper_margin,
        quadrature_resolution: res,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialCase {
    /// `g0` equals the arithmetic mean: `b(D)^*` annihilates every column of `g`.
    Over,
    /// `g0` equals the harmonic mean: `g_tilde` is constant.
    Under,
    None,
}

impl SpecialCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpecialCase::Over => "OVER",
            SpecialCase::Under => "UNDER",
            SpecialCase::None => "NONE",
        }
    }
}

/// Classifies the solution. The arithmetic-mean case is checked first, so a
/// constant field reports `Over`.
pub fn detect_special_cases(sol: &CellSolution) -> SpecialCase {
    let problem = sol.problem();
    let field = problem.field();
    let lattice = field.lattice();
    let g_scale = field.coefficients().iter().map(max_abs).fold(0.0, f64::max);
    let over = field.window().points().iter().zip(field.coefficients()).all(|(z, g)| {
        let b = problem.symbol().evaluate(&lattice.dual_vector(z));
        max_abs(&(b.adjoint() * g)) <= 1e-10 * max_abs(&b).max(1.0) * g_scale
    });
    if over {
        return SpecialCase::Over;
    }
    // inside the Galerkin window, b(s)^* g_tilde_z = 0 holds to solver
    // tolerance; g_tilde is constant there exactly in the harmonic-mean case
    let g_tilde = sol.g_tilde();
    let g0_scale = max_abs(sol.g0());
    let lambda_window = sol.lambda().window();
    let under = lambda_window
        .points()
        .iter()
        .skip(1)
        .all(|z| max_abs(&g_tilde.coefficient(z)) <= UNDER_TOL * g0_scale);
    if under {
        SpecialCase::Under
    } else {
        SpecialCase::None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaCertificates {
    pub norm_l2: f64,
    pub norm_b_l2: f64,
    pub norm_hp: f64,
    pub bound_l2: f64,
    pub bound_b_l2: f64,
    pub bound_hp: f64,
}

impl LambdaCertificates {
    pub fn holds(&self) -> bool {
        self.norm_l2 <= self.bound_l2 && self.norm_b_l2 <= self.bound_b_l2 && self.norm_hp <= self.bound_hp
    }

    /// Smallest relative slack `1 - norm / bound` over the three bounds.
    pub fn margin(&self) -> f64 {
        [
            1.0 - self.norm_l2 / self.bound_l2,
            1.0 - self.norm_b_l2 / self.bound_b_l2,
            1.0 - self.norm_hp / self.bound_hp,
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    }
}

/// Measures `|Lambda|_{L2}`, `|b(D) Lambda|_{L2}`, `|Lambda|_{H^p}` over the cell
/// by Parseval and compares them with the a priori bounds
/// `|cell|^{1/2} C_Lambda^(1)`, `|cell|^{1/2} C_Lambda^(2)`, `|cell|^{1/2} C_Lambda`.
pub fn lambda_norm_certificates(sol: &CellSolution) -> Result<LambdaCertificates> {
    let cert = lambda_norms(sol);
    if cert.holds() {
        Ok(cert)
    } else {
        Err(Error::Certification(format!(
            "corrector norms exceed their a priori bounds: {cert:?}"
        )))
    }
}

pub fn lambda_norms(sol: &CellSolution) -> LambdaCertificates {
    let problem = sol.problem();
    let lattice = problem.lattice();
    let symbol = problem.symbol();
    let p = symbol.order();
    let m = symbol.rows() as f64;
    let volume = lattice.cell_volume();
    let two_r0 = 2.0 * lattice.packing_radius();
    let bounds = problem.bounds();
    let alpha0 = problem.alpha0();
    let betas = multi_indices_up_to(lattice.dim(), p);

    let mut l2 = 0.0;
    let mut b_l2 = 0.0;
    let mut hp = 0.0;
    let window = sol.lambda().window();
    for (z, lam) in window.points().iter().zip(sol.lambda().coefficients()).skip(1) {
        let s = lattice.dual_vector(z);
        let f = frobenius_sq(lam);
        l2 += f;
        b_l2 += frobenius_sq(&(symbol.evaluate(&s) * lam));
        hp += f * betas.iter().map(|beta| beta.monomial(&s).powi(2)).sum::<f64>();
    }
    let c2 = (m * bounds.norm_g * bounds.norm_ginv).sqrt();
    let c1 = c2 / (alpha0.sqrt() * two_r0.powi(p as i32));
    let weight: f64 = betas
        .iter()
        .map(|beta| two_r0.powi(-2 * (p as i32 - beta.order() as i32)))
        .sum();
    let c_hp = c2 / alpha0.sqrt() * weight.sqrt();
    let root_volume = volume.sqrt();
    LambdaCertificates {
        norm_l2: (volume * l2).sqrt(),
        norm_b_l2: (volume * b_l2).sqrt(),
        norm_hp: (volume * hp).sqrt(),
        bound_l2: root_volume * c1,
        bound_b_l2: root_volume * c2,
        bound_hp: root_volume * c_hp,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;
    use crate::linalg::identity;
    use crate::symbol::DifferentialSymbol;
    use std::f64::consts::PI;

    fn cosine_problem(p: u32) -> Problem {
        let field = PeriodicMatrixField::cosine(Lattice::cubic(1), 1, 2.0, 1.0).unwrap();
        Problem::new(field, DifferentialSymbol::axis_powers(1, p)).unwrap()
    }

    fn laminate_problem(lattice: Lattice) -> Problem {
        let field = PeriodicMatrixField::cosine(lattice, 2, 2.0, 1.0).unwrap();
        Problem::new(field, DifferentialSymbol::gradient(2)).unwrap()
    }

    /// Fourier coefficient of `sqrt(3) / (2 + cos 2 pi x) - 1` by a fine trapezoid rule.
    fn flux_coefficient(z: i64) -> f64 {
        let n = 4096;
        let mut acc = 0.0;
        for j in 0..n {
            let x = j as f64 / n as f64;
            let f = 3f64.sqrt() / (2.0 + (2.0 * PI * x).cos()) - 1.0;
            acc += f * (2.0 * PI * z as f64 * x).cos();
        }
        acc / n as f64
    }

    #[test]
    fn constant_field_has_zero_corrector() {
        let g = CMat::from_row_slice(2, 2, &[c64(3.0, 0.0), c64(0.5, 0.5), c64(0.5, -0.5), c64(2.0, 0.0)]);
        let field = PeriodicMatrixField::constant(Lattice::cubic(2), g.clone()).unwrap();
        let problem = Problem::new(field, DifferentialSymbol::gradient(2)).unwrap();
        let sol = solve_cell(&problem, 3, 1e-12).unwrap();
        assert!(sol.lambda().coefficients().iter().all(|c| max_abs(c) == 0.0));
        assert!(max_abs(&(sol.g0() - g)) < 1e-14);
        assert_eq!(detect_special_cases(&sol), SpecialCase::Over);
    }

    #[test]
    fn one_dimensional_corrector_matches_closed_form() {
        for p in [1u32, 2] {
            let sol = solve_cell(&cosine_problem(p), 16, 1e-13).unwrap();
            let window = sol.lambda().window();
            for (z, lam) in window.points().iter().zip(sol.lambda().coefficients()).skip(1) {
                let b = (2.0 * PI * z[0] as f64).powi(p as i32);
                let expected = flux_coefficient(z[0]) / b;
                assert!((lam[(0, 0)] - c64(expected, 0.0)).norm() < 1e-9, "p={p} z={z:?}");
            }
            assert!((sol.g0()[(0, 0)].re - 3f64.sqrt()).abs() < 1e-10);
            assert!(sol.g0()[(0, 0)].im.abs() < 1e-14);
            assert_eq!(detect_special_cases(&sol), SpecialCase::Under);
        }
    }

    #[test]
    fn dense_and_iterative_agree() {
        let problem = laminate_problem(Lattice::from_columns(&[vec![1.0, 0.2], vec![0.0, 1.1]]).unwrap());
        let a = solve_cell(&problem, 5, 1e-12).unwrap();
        let b = solve_cell_with(&problem, CellOptions::new(5).tol(1e-12).solver(CellSolver::Dense)).unwrap();
        assert!(max_abs(&(a.g0() - b.g0())) < 1e-10);
        assert!(b.residual() < 1e-12);
    }

    #[test]
    fn laminate_effective_matrix_is_diagonal_means() {
        let sol = solve_cell(&laminate_problem(Lattice::cubic(2)), 12, 1e-12).unwrap();
        let expected = CMat::from_row_slice(2, 2, &[c64(3f64.sqrt(), 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(2.0, 0.0)]);
        assert!(max_abs(&(sol.g0() - &expected)) < 1e-10, "{} vs {}", sol.g0(), expected);
        for (z, lam) in sol.lambda().window().points().iter().zip(sol.lambda().coefficients()) {
            if z[1] != 0 {
                assert!(max_abs(lam) < 1e-12);
            }
        }
        let vr = voigt_reuss(sol.problem().field(), sol.g0()).unwrap();
        assert!(vr.holds);
        assert_eq!(detect_special_cases(&sol), SpecialCase::None);
    }

    #[test]
    fn certificates_hold_for_cosine() {
        for p in [1u32, 2] {
            let sol = solve_cell(&cosine_problem(p), 16, 1e-12).unwrap();
            let cert = lambda_norm_certificates(&sol).unwrap();
            assert!(cert.margin() > 0.0);
        }
    }

    #[test]
    fn truncation_doubling_changes_g0_little() {
        let problem = laminate_problem(Lattice::from_columns(&[vec![1.0, 0.3], vec![0.1, 0.9]]).unwrap());
        let a = solve_cell(&problem, 6, 1e-12).unwrap();
        let b = solve_cell(&problem, 12, 1e-12).unwrap();
        assert!(max_abs(&(a.g0() - b.g0())) < 1e-6 * max_abs(b.g0()), "{} {}", a.g0(), b.g0());
    }

    #[test]
    fn truncation_below_support_is_rejected() {
        let field = PeriodicMatrixField::from_coefficients(
            Lattice::cubic(1),
            1,
            vec![
                (vec![0], identity(1) * c64(3.0, 0.0)),
                (vec![2], identity(1) * c64(0.5, 0.0)),
                (vec![-2], identity(1) * c64(0.5, 0.0)),
            ],
        )
        .unwrap();
        let problem = Problem::new(field, DifferentialSymbol::gradient(1)).unwrap();
        assert!(matches!(solve_cell(&problem, 1, 1e-10), Err(Error::Validation(_))));
    }
}
