//! Fiber resolvents of `A(k)` and `A0(k)`, the error operators measured
//! against them, and their action on finite sums of plane waves.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::bloch::{assemble_fiber, check_k, FiberOperator};
use crate::cell::{CellSolution, SpecialCase};
use crate::error::{Error, Result};
use crate::lattice::{FrequencyWindow, Lattice};
use crate::linalg::{c64, inverse, lanczos_top_eigenvalue, operator_norm, CMat, CVec};
use crate::problem::Problem;
use crate::symbol::multi_indices_up_to;

const CONDITION_LIMIT: f64 = 1e14;

/// `zeta = |zeta| e^{i phi}` with `0 < phi < 2 pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    modulus: f64,
    phase: f64,
}

impl SpectralPoint {
    pub fn new(modulus: f64, phase: f64) -> Result<Self> {
        if !(modulus > 0.0 && modulus.is_finite()) {
            return Err(Error::Domain(format!("|zeta| must be positive, got {modulus}")));
        }
        if !(phase > 0.0 && phase < 2.0 * PI) {
            return Err(Error::Domain(format!("phase must lie in (0, 2 pi), got {phase}")));
        }
        Ok(SpectralPoint { modulus, phase })
    }

    /// `zeta = -1`.
    pub fn minus_one() -> Self {
        SpectralPoint { modulus: 1.0, phase: PI }
    }

    pub fn modulus(&self) -> f64 {
        self.modulus
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(self.modulus, self.phase)
    }

    pub fn conj(&self) -> Self {
        SpectralPoint {
            modulus: self.modulus,
            phase: 2.0 * PI - self.phase,
        }
    }

    /// `c(phi)`.
    pub fn sector_constant(&self) -> f64 {
        sector_constant(self.phase).expect("phase validated on construction")
    }
}

/// `|sin phi|^{-1}` for `phi` in `(0, pi/2)` or `(3pi/2, 2pi)`, else `1`.
pub fn sector_constant(phase: f64) -> Result<f64> {
    if !(phase > 0.0 && phase < 2.0 * PI) {
        return Err(Error::Domain(format!("phase must lie in (0, 2 pi), got {phase}")));
    }
    if !(PI / 2.0..=1.5 * PI).contains(&phase) {
        Ok(1.0 / phase.sin().abs())
    } else {
        Ok(1.0)
    }
}

/// Whether the sharp cutoff to the scaled Brillouin zone keeps frequency `xi`.
pub fn smoothing_passes(lattice: &Lattice, eps: f64, xi: &[f64]) -> bool {
    let scaled: Vec<f64> = xi.iter().map(|v| v * eps).collect();
    lattice.in_brillouin(&scaled)
}

pub fn corrector_removal_allowed(p: u32, d: usize, tag: SpecialCase) -> bool {
    2 * p as usize > d || tag == SpecialCase::Under
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrectorVariant {
    /// Corrector acting on the zero block only, i.e. after the cutoff.
    Smoothed,
    /// Corrector acting on every block, without the cutoff.
    Plain,
}

/// Full and effective fibers at one quasimomentum, together with the cell
/// data the error operators need.
#[derive(Debug, Clone)]
pub struct FiberPair<'a> {
    sol: &'a CellSolution,
    full: FiberOperator,
    n: usize,
    m: usize,
    constant: bool,
    /// `|s(z)+k|^{2p}` per scalar unknown.
    rho2p: Vec<f64>,
    /// `b(s(z)+k)^* g0 b(s(z)+k)` per window frequency.
    effective_blocks: Vec<CMat>,
}

pub fn fiber_pair<'a>(sol: &'a CellSolution, k: &[f64], order: usize) -> Result<FiberPair<'a>> {
    FiberPair::new(sol, k, order)
}

impl<'a> FiberPair<'a> {
    pub fn new(sol: &'a CellSolution, k: &[f64], order: usize) -> Result<Self> {
        let problem = sol.problem();
        let full = assemble_fiber(problem, k, order)?;
        let n = problem.symbol().cols();
        let m = problem.symbol().rows();
        let p = problem.order() as i32;
        let lattice = problem.lattice();
        let rho2p = full
            .window()
            .points()
            .iter()
            .flat_map(|z| {
                let r2: f64 = lattice
                    .dual_vector(z)
                    .iter()
                    .zip(k)
                    .map(|(s, k)| (s + k) * (s + k))
                    .sum();
                std::iter::repeat_n(r2.powi(p), n)
            })
            .collect();
        let g0 = sol.g0();
        let effective_blocks = full.symbols().iter().map(|b| b.adjoint() * g0 * b).collect();
        Ok(FiberPair {
            sol,
            constant: problem.field().is_constant(),
            full,
            n,
            m,
            rho2p,
            effective_blocks,
        })
    }

    pub fn k(&self) -> &[f64] {
        self.full.k()
    }

    pub fn window(&self) -> &FrequencyWindow {
        self.full.window()
    }

    pub fn full(&self) -> &FiberOperator {
        &self.full
    }

    fn size(&self) -> usize {
        self.full.size()
    }

    fn scaling(&self, w: Complex64) -> Vec<f64> {
        let a = w.norm();
        self.rho2p.iter().map(|r| (r + a).sqrt()).collect()
    }

    /// `(A(k) - w)^{-1}` via the equilibrated matrix `D^{-1}(A - w)D^{-1}`
    /// with `D = (|s(z)+k|^{2p} + |w|)^{1/2}`.
    pub fn full_resolvent(&self, w: Complex64) -> Result<CMat> {
        if self.constant {
            let blocks: Vec<CMat> = (0..self.window().len()).map(|i| self.full.block(i, i)).collect();
            return self.block_resolvent(&blocks, w);
        }
        let d = self.scaling(w);
        let a = self.full.matrix();
        let size = self.size();
        let mut eq = CMat::from_fn(size, size, |i, j| a[(i, j)] / (d[i] * d[j]));
        for (i, di) in d.iter().enumerate() {
            eq[(i, i)] -= w / (di * di);
        }
        let inv = inverse(&eq)?;
        let cond = crate::linalg::max_abs(&inv) * crate::linalg::max_abs(&eq);
        if !cond.is_finite() || cond > CONDITION_LIMIT {
            return Err(Error::Numerical(format!(
                "shifted fiber is ill-conditioned (estimate {cond:.3e})"
            )));
        }
        Ok(CMat::from_fn(size, size, |i, j| inv[(i, j)] / (d[i] * d[j])))
    }

    /// `(A0(k) - w)^{-1}`, block diagonal.
    pub fn effective_resolvent(&self, w: Complex64) -> Result<CMat> {
        self.block_resolvent(&self.effective_blocks, w)
    }

    fn block_resolvent(&self, blocks: &[CMat], w: Complex64) -> Result<CMat> {
        let n = self.n;
        let mut out = CMat::zeros(self.size(), self.size());
        for (i, block) in blocks.iter().enumerate() {
            let shifted = block - CMat::identity(n, n) * w;
            out.view_mut((i * n, i * n), (n, n)).copy_from(&inverse(&shifted)?);
        }
        Ok(out)
    }

    /// `|(A(k) - w)^{-1} - (A0(k) - w)^{-1}|`.
    pub fn resolvent_gap(&self, w: Complex64) -> Result<f64> {
        let r = self.full_resolvent(w)?;
        let r0 = self.effective_resolvent(w)?;
        Ok(operator_norm(&(r - r0)))
    }

    /// `|(A(k) - w)^{-1} - (A0(k) - w)^{-1} P|` with `P` the zero-block projection.
    pub fn projected_resolvent_gap(&self, w: Complex64) -> Result<f64> {
        let r = self.full_resolvent(w)?;
        let mut r0p = CMat::zeros(self.size(), self.size());
        let n = self.n;
        let r0 = self.effective_resolvent(w)?;
        r0p.view_mut((0, 0), (n, n)).copy_from(&r0.view((0, 0), (n, n)));
        Ok(operator_norm(&(r - r0p)))
    }

    /// `|A(k)^{1/2} [(A - w)^{-1} - (A0 - w)^{-1} - Lambda b(D+k) (A0 - w)^{-1} Q]|`,
    /// `Q = P` for the smoothed corrector and `Q = I` for the plain one.
    pub fn energy_gap(&self, w: Complex64, variant: CorrectorVariant) -> Result<f64> {
        let r = self.full_resolvent(w)?;
        let r0 = self.effective_resolvent(w)?;
        self.energy_gap_from(&r, &r0, w, variant)
    }

    pub(crate) fn energy_gap_from(&self, r: &CMat, r0: &CMat, w: Complex64, variant: CorrectorVariant) -> Result<f64> {
        let mut y = r - r0;
        y -= self.corrector_matrix(r0, variant);
        let d = self.scaling(w);
        let a = self.full.matrix();
        let size = self.size();
        let a_eq = CMat::from_fn(size, size, |i, j| a[(i, j)] / (d[i] * d[j]));
        let z = CMat::from_fn(size, size, |i, j| y[(i, j)] * d[i]);
        if z.iter().all(|v| *v == c64(0.0, 0.0)) {
            return Ok(0.0);
        }
        let top = lanczos_top_eigenvalue(size, |v| z.ad_mul(&(&a_eq * (&z * v))), 1e-11);
        Ok(top.sqrt())
    }

    /// `Lambda b(D+k) R0 Q` on the window; products outside it are dropped.
    fn corrector_matrix(&self, r0: &CMat, variant: CorrectorVariant) -> CMat {
        let (n, m) = (self.n, self.m);
        let window = self.window();
        let lambda = self.sol.lambda();
        let symbols = self.full.symbols();
        let mut out = CMat::zeros(self.size(), self.size());
        let sources = match variant {
            CorrectorVariant::Smoothed => 1,
            CorrectorVariant::Plain => window.len(),
        };
        for j in 0..sources {
            let flux = &symbols[j] * r0.view((j * n, j * n), (n, n)); // m x n
            let zj = window.point(j);
            for (zl, lam) in lambda.window().points().iter().zip(lambda.coefficients()).skip(1) {
                let target: Vec<i64> = zl.iter().zip(zj).map(|(a, b)| a + b).collect();
                if let Some(i) = window.index_of(&target) {
                    let block = lam * &flux;
                    let mut view = out.view_mut((i * n, j * n), (n, n));
                    view += block;
                }
            }
        }
        debug_assert_eq!(m, lambda.cols());
        out
    }

    /// `|g b(D+k)(A - w)^{-1} - g_tilde b(D+k)(A0 - w)^{-1} P - g0 b(D+k)(A0 - w)^{-1} (I - P)|`
    /// with outputs on the window enlarged by the field support.
    pub fn flux_gap(&self, w: Complex64) -> Result<f64> {
        let r = self.full_resolvent(w)?;
        let r0 = self.effective_resolvent(w)?;
        self.flux_gap_from(&r, &r0)
    }

    pub(crate) fn flux_gap_from(&self, r: &CMat, r0: &CMat) -> Result<f64> {
        let (n, m) = (self.n, self.m);
        let window = self.window();
        let problem = self.sol.problem();
        let field = problem.field();
        let out_window = FrequencyWindow::new(problem.dim(), window.order() + field.support());
        let symbols = self.full.symbols();
        let len = window.len();
        let rows = out_window.len() * m;
        let mut flux = CMat::zeros(rows, len * n);
        // g (b(D+k) R), one column at a time
        let targets: Vec<Vec<(usize, usize)>> = (0..len)
            .map(|i| {
                field
                    .window()
                    .points()
                    .iter()
                    .enumerate()
                    .map(|(q, zq)| {
                        let target: Vec<i64> = window.point(i).iter().zip(zq).map(|(a, b)| a + b).collect();
                        (q, out_window.index_of(&target).expect("enlarged window"))
                    })
                    .collect()
            })
            .collect();
        let coeffs = field.coefficients();
        let mut br = vec![c64(0.0, 0.0); m];
        for c in 0..len * n {
            let r_col = &r.as_slice()[c * len * n..(c + 1) * len * n];
            let f_col = &mut flux.as_mut_slice()[c * rows..(c + 1) * rows];
            for i in 0..len {
                let b = &symbols[i];
                for (a, slot) in br.iter_mut().enumerate() {
                    *slot = (0..n).map(|e| b[(a, e)] * r_col[i * n + e]).sum();
                }
                for &(q, t) in &targets[i] {
                    let g = &coeffs[q];
                    for a in 0..m {
                        f_col[t * m + a] += (0..m).map(|e| g[(a, e)] * br[e]).sum::<Complex64>();
                    }
                }
            }
        }
        let g0 = self.sol.g0();
        let g_tilde = self.sol.g_tilde();
        let zero_flux = &symbols[0] * r0.view((0, 0), (n, n));
        for (t, z) in out_window.points().iter().enumerate() {
            let gt = g_tilde.coefficient(z);
            let mut view = flux.view_mut((t * m, 0), (m, n));
            view -= gt * &zero_flux;
        }
        for i in 1..len {
            let block = g0 * (&symbols[i] * r0.view((i * n, i * n), (n, n)));
            let t = out_window.index_of(window.point(i)).expect("nested windows");
            let mut view = flux.view_mut((t * m, i * n), (m, n));
            view -= block;
        }
        Ok(operator_norm(&flux))
    }

    /// All fiber gaps at one shift, sharing the two resolvents.
    pub fn gaps(&self, w: Complex64) -> Result<FiberGaps> {
        let r = self.full_resolvent(w)?;
        let r0 = self.effective_resolvent(w)?;
        Ok(FiberGaps {
            resolvent: operator_norm(&(&r - &r0)),
            energy: self.energy_gap_from(&r, &r0, w, CorrectorVariant::Smoothed)?,
            flux: self.flux_gap_from(&r, &r0)?,
            energy_plain: self.energy_gap_from(&r, &r0, w, CorrectorVariant::Plain)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberGaps {
    pub resolvent: f64,
    pub energy: f64,
    pub flux: f64,
    pub energy_plain: f64,
}

/// Shift `w = zeta eps^{2p}` of the unscaled fiber.
pub fn fiber_shift(zeta: SpectralPoint, eps: f64, p: u32) -> Complex64 {
    zeta.value() * eps.powi(2 * p as i32)
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("eps must be positive, got {eps}")))
    }
}

pub fn fiber_resolvent_gap(sol: &CellSolution, k: &[f64], order: usize, zeta: SpectralPoint, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    FiberPair::new(sol, k, order)?.resolvent_gap(fiber_shift(zeta, eps, sol.problem().order()))
}

pub fn fiber_energy_gap(sol: &CellSolution, k: &[f64], order: usize, zeta: SpectralPoint, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    FiberPair::new(sol, k, order)?
        .energy_gap(fiber_shift(zeta, eps, sol.problem().order()), CorrectorVariant::Smoothed)
}

pub fn fiber_flux_gap(sol: &CellSolution, k: &[f64], order: usize, zeta: SpectralPoint, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    FiberPair::new(sol, k, order)?.flux_gap(fiber_shift(zeta, eps, sol.problem().order()))
}

/// A finite sum `sum_j c_j e^{i <xi_j, x>}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWaveSum {
    terms: Vec<(Vec<f64>, CVec)>,
}

const FREQUENCY_MERGE_TOL: f64 = 1e-9;

fn same_frequency(a: &[f64], b: &[f64]) -> bool {
    let scale = 1.0 + a.iter().map(|v| v.abs()).fold(0.0, f64::max);
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= FREQUENCY_MERGE_TOL * scale)
}

impl PlaneWaveSum {
    pub fn new(terms: Vec<(Vec<f64>, CVec)>) -> Result<Self> {
        if let Some((xi, c)) = terms.first() {
            for (other, a) in &terms[1..] {
                if other.len() != xi.len() || a.len() != c.len() {
                    return Err(Error::Validation("plane waves must share d and amplitude size".into()));
                }
            }
        }
        for (i, (a, _)) in terms.iter().enumerate() {
            if terms[..i].iter().any(|(b, _)| same_frequency(a, b)) {
                return Err(Error::Validation(format!("repeated frequency {a:?}")));
            }
        }
        Ok(PlaneWaveSum { terms })
    }

    pub fn empty() -> Self {
        PlaneWaveSum { terms: Vec::new() }
    }

    pub fn single(xi: Vec<f64>, amplitude: CVec) -> Self {
        PlaneWaveSum {
            terms: vec![(xi, amplitude)],
        }
    }

    pub fn terms(&self) -> &[(Vec<f64>, CVec)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `scale * c` at frequency `xi`, merging with an existing term.
    pub fn accumulate(&mut self, xi: &[f64], c: &CVec, scale: Complex64) {
        if let Some((_, a)) = self.terms.iter_mut().find(|(f, _)| same_frequency(f, xi)) {
            *a += c * scale;
        } else {
            self.terms.push((xi.to_vec(), c * scale));
        }
    }

    /// `self + scale * other`.
    pub fn add_scaled(&self, other: &PlaneWaveSum, scale: Complex64) -> PlaneWaveSum {
        let mut out = self.clone();
        for (xi, c) in &other.terms {
            out.accumulate(xi, c, scale);
        }
        out
    }

    /// Mean-square norm `(sum_j |c_j|^2)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.norm_squared()).sum::<f64>().sqrt()
    }

    /// `(sum_j sum_{|beta| <= p} xi_j^{2 beta} |c_j|^2)^{1/2}`.
    pub fn hp_norm(&self, p: u32) -> f64 {
        let Some((xi, _)) = self.terms.first() else {
            return 0.0;
        };
        let betas = multi_indices_up_to(xi.len(), p);
        self.terms
            .iter()
            .map(|(xi, c)| {
                let weight: f64 = betas.iter().map(|b| b.monomial(xi).powi(2)).sum();
                weight * c.norm_squared()
            })
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolventKind {
    Full,
    Effective,
}

fn check_input(problem: &Problem, input: &PlaneWaveSum) -> Result<()> {
    for (xi, c) in input.terms() {
        check_k(problem, xi)?;
        if c.len() != problem.symbol().cols() {
            return Err(Error::Validation(format!(
                "dimension mismatch: amplitude has n = {}, symbol has n = {}",
                c.len(),
                problem.symbol().cols()
            )));
        }
    }
    Ok(())
}

fn effective_amplitude(problem: &Problem, g0: &CMat, xi: &[f64], c: &CVec, zeta: Complex64) -> Result<CVec> {
    let b = problem.symbol().evaluate(xi);
    let n = b.ncols();
    let shifted = b.adjoint() * g0 * &b - CMat::identity(n, n) * zeta;
    Ok(inverse(&shifted)? * c)
}

/// `(A_eps - zeta)^{-1}` or `(A0 - zeta)^{-1}` applied to a plane-wave sum.
pub fn apply_resolvent(
    kind: ResolventKind,
    input: &PlaneWaveSum,
    zeta: SpectralPoint,
    eps: f64,
    sol: &CellSolution,
    order: usize,
) -> Result<PlaneWaveSum> {
    check_eps(eps)?;
    let problem = sol.problem();
    check_input(problem, input)?;
    let z = zeta.value();
    let mut out = PlaneWaveSum::empty();
    match kind {
        ResolventKind::Effective => {
            for (xi, c) in input.terms() {
                let u = effective_amplitude(problem, sol.g0(), xi, c, z)?;
                out.accumulate(xi, &u, c64(1.0, 0.0));
            }
        }
        ResolventKind::Full => {
            let lattice = problem.lattice();
            let n = problem.symbol().cols();
            let scale = eps.powi(2 * problem.order() as i32);
            let w = z * scale;
            for (xi, c) in input.terms() {
                let scaled: Vec<f64> = xi.iter().map(|v| v * eps).collect();
                let (zi, k) = lattice.reduce(&scaled);
                let pair = FiberPair::new(sol, &k, order)?;
                let Some(index) = pair.window().index_of(&zi) else {
                    return Err(Error::Truncation { frequency: xi.clone() });
                };
                let r = pair.full_resolvent(w)?;
                let u = r.columns(index * n, n) * c * c64(scale, 0.0);
                for (i, zo) in pair.window().points().iter().enumerate() {
                    let amp: CVec = u.rows(i * n, n).into_owned();
                    if amp.iter().all(|v| *v == c64(0.0, 0.0)) {
                        continue;
                    }
                    let freq: Vec<f64> = lattice
                        .dual_vector(zo)
                        .iter()
                        .zip(&k)
                        .map(|(s, k)| (s + k) / eps)
                        .collect();
                    out.accumulate(&freq, &amp, c64(1.0, 0.0));
                }
            }
        }
    }
    Ok(out)
}

/// `Lambda^eps b(D) (A0 - zeta)^{-1}`, with the cutoff to the scaled
/// Brillouin zone for the smoothed variant.
pub fn apply_corrector(
    variant: CorrectorVariant,
    input: &PlaneWaveSum,
    zeta: SpectralPoint,
    eps: f64,
    sol: &CellSolution,
) -> Result<PlaneWaveSum> {
    check_eps(eps)?;
    let problem = sol.problem();
    check_input(problem, input)?;
    let lattice = problem.lattice();
    let z = zeta.value();
    let lambda = sol.lambda();
    let mut out = PlaneWaveSum::empty();
    for (xi, c) in input.terms() {
        if variant == CorrectorVariant::Smoothed && !smoothing_passes(lattice, eps, xi) {
            continue;
        }
        let u0 = effective_amplitude(problem, sol.g0(), xi, c, z)?;
        let flux = problem.symbol().evaluate(xi) * u0;
        for (zl, lam) in lambda.window().points().iter().zip(lambda.coefficients()).skip(1) {
            let freq: Vec<f64> = lattice
                .dual_vector(zl)
                .iter()
                .zip(xi)
                .map(|(s, x)| x + s / eps)
                .collect();
            out.accumulate(&freq, &(lam * &flux), c64(1.0, 0.0));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::solve_cell;
    use crate::field::PeriodicMatrixField;
    use crate::linalg::psd_sqrt;
    use crate::symbol::DifferentialSymbol;

    fn cosine_sol(p: u32, order: usize) -> CellSolution {
        let field = PeriodicMatrixField::cosine(Lattice::cubic(1), 1, 2.0, 1.0).unwrap();
        let problem = Problem::new(field, DifferentialSymbol::axis_powers(1, p)).unwrap();
        solve_cell(&problem, order, 1e-12).unwrap()
    }

    fn constant_sol() -> CellSolution {
        let g = CMat::from_row_slice(2, 2, &[c64(2.0, 0.0), c64(0.3, 0.1), c64(0.3, -0.1), c64(1.5, 0.0)]);
        let field = PeriodicMatrixField::constant(Lattice::cubic(2), g).unwrap();
        let problem = Problem::new(field, DifferentialSymbol::gradient(2)).unwrap();
        solve_cell(&problem, 2, 1e-12).unwrap()
    }

    /// Brute-force energy norm through an eigendecomposition square root.
    fn dense_energy_gap(sol: &CellSolution, k: &[f64], order: usize, w: Complex64) -> f64 {
        let pair = FiberPair::new(sol, k, order).unwrap();
        let a = pair.full().matrix().clone();
        let size = a.nrows();
        let r = inverse(&(&a - CMat::identity(size, size) * w)).unwrap();
        let r0 = pair.effective_resolvent(w).unwrap();
        let y = &r - &r0 - pair.corrector_matrix(&r0, CorrectorVariant::Smoothed);
        let root = psd_sqrt(&a, 1e-10).unwrap();
        operator_norm(&(root * y))
    }

    #[test]
    fn sector_constant_values() {
        assert_eq!(sector_constant(PI).unwrap(), 1.0);
        assert!((sector_constant(PI / 4.0).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(sector_constant(1.5 * PI).unwrap(), 1.0);
        assert!((sector_constant(PI / 6.0).unwrap() - 2.0).abs() < 1e-14);
        assert!(sector_constant(0.0).is_err());
        assert!(sector_constant(2.0 * PI).is_err());
    }

    #[test]
    fn smoothing_cutoff() {
        let lattice = Lattice::cubic(1);
        assert!(smoothing_passes(&lattice, 0.1, &[30.0]));
        assert!(smoothing_passes(&lattice, 0.1, &[0.0]));
        assert!(!smoothing_passes(&lattice, 0.1, &[10.0 * PI]));
    }

    #[test]
    fn removal_conditions() {
        assert!(corrector_removal_allowed(1, 1, SpecialCase::None));
        assert!(!corrector_removal_allowed(1, 3, SpecialCase::None));
        assert!(corrector_removal_allowed(1, 3, SpecialCase::Under));
    }

    #[test]
    fn constant_field_gaps_vanish() {
        let sol = constant_sol();
        for k in [[0.0, 0.0], [0.4, -1.1], [PI, 0.2]] {
            let pair = FiberPair::new(&sol, &k, 2).unwrap();
            let gaps = pair.gaps(c64(-0.01, 0.0)).unwrap();
            assert_eq!(gaps.resolvent, 0.0);
            assert_eq!(gaps.energy, 0.0);
            assert_eq!(gaps.flux, 0.0);
            assert_eq!(gaps.energy_plain, 0.0);
        }
    }

    #[test]
    fn conjugate_shift_symmetry() {
        let sol = cosine_sol(1, 16);
        let zeta = SpectralPoint::new(1.0, 2.0).unwrap();
        for k in [0.0, 0.3, -1.2] {
            let a = fiber_resolvent_gap(&sol, &[k], 16, zeta, 0.1).unwrap();
            let b = fiber_resolvent_gap(&sol, &[k], 16, zeta.conj(), 0.1).unwrap();
            assert!((a - b).abs() <= 1e-10 * a.max(1.0));
        }
    }

    #[test]
    fn gap_depends_on_product_only() {
        let sol = cosine_sol(2, 16);
        let zeta = SpectralPoint::new(0.7, 2.5).unwrap();
        let t: f64 = 1.7;
        let eps = 0.08;
        let a = fiber_resolvent_gap(&sol, &[0.2], 16, zeta, eps).unwrap();
        let moved = SpectralPoint::new(zeta.modulus() * t.powi(4), zeta.phase()).unwrap();
        let b = fiber_resolvent_gap(&sol, &[0.2], 16, moved, eps / t).unwrap();
        assert!((a - b).abs() <= 1e-10 * a);
    }

    #[test]
    fn resolvent_gap_converges_in_truncation() {
        let coarse = cosine_sol(1, 16);
        let fine = cosine_sol(1, 64);
        let zeta = SpectralPoint::minus_one();
        let a = fiber_resolvent_gap(&coarse, &[0.0], 16, zeta, 0.1).unwrap();
        let b = fiber_resolvent_gap(&fine, &[0.0], 64, zeta, 0.1).unwrap();
        assert!((a - b).abs() < 0.01 * b);
    }

    #[test]
    fn energy_gap_matches_dense_oracle() {
        let coarse = cosine_sol(1, 16);
        let fine = cosine_sol(1, 32);
        let zeta = SpectralPoint::minus_one();
        let w = fiber_shift(zeta, 0.1, 1);
        let a = fiber_energy_gap(&coarse, &[0.2], 16, zeta, 0.1).unwrap();
        let b = dense_energy_gap(&fine, &[0.2], 32, w);
        assert!((a - b).abs() < 0.01 * b, "{a} {b}");
    }

    #[test]
    fn flux_gap_converges_in_truncation() {
        let coarse = cosine_sol(1, 16);
        let fine = cosine_sol(1, 32);
        let zeta = SpectralPoint::minus_one();
        let a = fiber_flux_gap(&coarse, &[0.2], 16, zeta, 0.1).unwrap();
        let b = fiber_flux_gap(&fine, &[0.2], 32, zeta, 0.1).unwrap();
        assert!((a - b).abs() < 0.01 * b, "{a} {b}");
        for z in coarse.g_tilde().window().points().iter().skip(1) {
            assert!(crate::linalg::max_abs(&coarse.g_tilde().coefficient(z)) < 1e-8);
        }
    }

    #[test]
    fn effective_plane_wave() {
        let sol = cosine_sol(1, 16);
        let input = PlaneWaveSum::single(vec![2.0], CVec::from_element(1, c64(1.0, 0.0)));
        let out = apply_resolvent(ResolventKind::Effective, &input, SpectralPoint::minus_one(), 0.1, &sol, 16).unwrap();
        let expected = 1.0 / (3f64.sqrt() * 4.0 + 1.0);
        assert!((out.terms()[0].1[0] - c64(expected, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn full_equals_effective_for_constant_field() {
        let sol = constant_sol();
        let input = PlaneWaveSum::new(vec![
            (vec![1.0, 2.0], CVec::from_element(1, c64(1.0, 0.5))),
            (vec![-7.0, 0.3], CVec::from_element(1, c64(0.0, 2.0))),
        ])
        .unwrap();
        let zeta = SpectralPoint::minus_one();
        let full = apply_resolvent(ResolventKind::Full, &input, zeta, 0.125, &sol, 2).unwrap();
        let eff = apply_resolvent(ResolventKind::Effective, &input, zeta, 0.125, &sol, 2).unwrap();
        assert!(full.add_scaled(&eff, c64(-1.0, 0.0)).l2_norm() < 1e-13);
        let k = apply_corrector(CorrectorVariant::Plain, &input, zeta, 0.125, &sol).unwrap();
        assert_eq!(k.l2_norm(), 0.0);
    }

    #[test]
    fn plane_wave_rates() {
        let sol = cosine_sol(1, 16);
        let zeta = SpectralPoint::minus_one();
        let input = PlaneWaveSum::single(vec![1.0], CVec::from_element(1, c64(1.0, 0.0)));
        let mut l2 = Vec::new();
        let mut hp = Vec::new();
        for eps in [0.1, 0.05, 0.025] {
            let full = apply_resolvent(ResolventKind::Full, &input, zeta, eps, &sol, 16).unwrap();
            let eff = apply_resolvent(ResolventKind::Effective, &input, zeta, eps, &sol, 16).unwrap();
            let smooth = apply_corrector(CorrectorVariant::Smoothed, &input, zeta, eps, &sol).unwrap();
            let plain = apply_corrector(CorrectorVariant::Plain, &input, zeta, eps, &sol).unwrap();
            assert!(smooth.add_scaled(&plain, c64(-1.0, 0.0)).l2_norm() == 0.0);
            let diff = full.add_scaled(&eff, c64(-1.0, 0.0));
            l2.push(diff.l2_norm());
            hp.push(diff.add_scaled(&smooth, c64(-eps, 0.0)).hp_norm(1));
        }
        let ratio = l2[0] / l2[1];
        assert!((1.6..2.5).contains(&ratio), "{l2:?}");
        assert!(hp[2] < hp[1] && hp[1] < hp[0], "{hp:?}");
        let slope = (hp[0] / hp[2]).ln() / 4f64.ln();
        assert!(slope > 0.8, "{hp:?}");
    }
}
