//! Sweeps of the fiber error metrics over `eps`, `zeta` and `k`, with
//! log-log rate fits.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cell::{solve_cell, CellSolution};
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::operator_norm;
use crate::resolvent::{fiber_shift, sector_constant, CorrectorVariant, FiberPair, SpectralPoint};
use crate::symbol::sphere_points;

pub const DEFAULT_K_RESOLUTION: usize = 16;
pub const SLOPE_THRESHOLD: f64 = 0.9;
pub const DOUBLING_TOLERANCE: f64 = 0.02;
/// Number of best candidates refined by local search.
const REFINE_STARTS: usize = 2;
const REFINE_MAX_EVALS: usize = 40;
const REFINE_SHRINK_LEVELS: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Resolvent,
    Energy,
    Flux,
    NoSmoothing,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Resolvent, Metric::Energy, Metric::Flux, Metric::NoSmoothing];

    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Resolvent => "RESOLVENT",
            Metric::Energy => "ENERGY",
            Metric::Flux => "FLUX",
            Metric::NoSmoothing => "NO_SMOOTHING",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Validation(format!("unknown metric {name}")))
    }

    /// Power of `eps` that carries a fiber gap to the full-space operator norm.
    pub fn eps_power(&self, p: u32) -> i32 {
        match self {
            Metric::Resolvent => 2 * p as i32,
            _ => p as i32,
        }
    }

    /// Dominant power of `|zeta|` in the error bound.
    pub fn modulus_exponent(&self, p: u32) -> f64 {
        let base = 1.0 / (2.0 * p as f64);
        match self {
            Metric::Resolvent => base - 1.0,
            _ => base - 0.5,
        }
    }

    /// `c(phi)^2 eps |zeta|^{q}`, the shape of the bound.
    pub fn envelope(&self, p: u32, zeta: SpectralPoint, eps: f64) -> f64 {
        zeta.sector_constant().powi(2) * eps * zeta.modulus().powf(self.modulus_exponent(p))
    }
}

fn fiber_gap(pair: &FiberPair, w: Complex64, metric: Metric) -> Result<f64> {
    match metric {
        Metric::Resolvent => pair.resolvent_gap(w),
        Metric::Energy => pair.energy_gap(w, CorrectorVariant::Smoothed),
        Metric::Flux => pair.flux_gap(w),
        Metric::NoSmoothing => pair.energy_gap(w, CorrectorVariant::Plain),
    }
}

fn fiber_gaps(pair: &FiberPair, w: Complex64, metrics: &[Metric]) -> Result<Vec<f64>> {
    if metrics.len() == 1 {
        return Ok(vec![fiber_gap(pair, w, metrics[0])?]);
    }
    let r = pair.full_resolvent(w)?;
    let r0 = pair.effective_resolvent(w)?;
    metrics
        .iter()
        .map(|m| match m {
            Metric::Resolvent => Ok(operator_norm(&(&r - &r0))),
            Metric::Energy => pair.energy_gap_from(&r, &r0, w, CorrectorVariant::Smoothed),
            Metric::Flux => pair.flux_gap_from(&r, &r0),
            Metric::NoSmoothing => pair.energy_gap_from(&r, &r0, w, CorrectorVariant::Plain),
        })
        .collect()
}

/// `2^{-2}, ..., 2^{-7}`.
pub fn default_eps_grid() -> Vec<f64> {
    (2..=7).map(|j| 0.5f64.powi(j)).collect()
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub eps_grid: Vec<f64>,
    pub k_resolution: usize,
    pub order: usize,
    /// Local search from the best grid points.
    pub refine: bool,
}

impl SweepOptions {
    pub fn new(order: usize) -> Self {
        SweepOptions {
            eps_grid: default_eps_grid(),
            k_resolution: DEFAULT_K_RESOLUTION,
            order,
            refine: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.eps_grid.is_empty() || self.eps_grid.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return Err(Error::Validation("eps grid must be nonempty and positive".into()));
        }
        if self.eps_grid.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Validation("eps grid must be strictly descending".into()));
        }
        if self.k_resolution == 0 {
            return Err(Error::Validation("k resolution must be positive".into()));
        }
        Ok(())
    }
}

/// Quasimomenta over which the fiber gaps are maximized: the Brillouin grid
/// plus radial shells `r0 2^{-j/2}` reaching below `eps_min / 8`.
pub fn k_candidates(lattice: &Lattice, k_resolution: usize, eps_min: f64) -> Vec<Vec<f64>> {
    let mut out = lattice.brillouin_grid(k_resolution);
    let r0 = lattice.packing_radius();
    let directions = sphere_points(lattice.dim(), (k_resolution / 2).max(4));
    let mut j = 1;
    loop {
        let radius = r0 * 0.5f64.powf(j as f64 / 2.0);
        if radius < eps_min / 8.0 {
            break;
        }
        for dir in &directions {
            out.push(dir.iter().map(|c| c * radius).collect());
        }
        j += 1;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    /// Every value vanishes identically.
    Exact,
    Rate { slope: f64, stderr: f64 },
    /// Fewer than three points.
    Unfitted,
}

impl Verdict {
    pub fn passes(&self, threshold: f64) -> bool {
        match self {
            Verdict::Exact => true,
            Verdict::Rate { slope, .. } => *slope >= threshold,
            Verdict::Unfitted => false,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Exact => "EXACT",
            Verdict::Rate { .. } => "RATE",
            Verdict::Unfitted => "UNFITTED",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ErrorSweep {
    pub problem: String,
    pub metric: Metric,
    pub zeta: SpectralPoint,
    pub eps_grid: Vec<f64>,
    pub k_resolution: usize,
    pub order: usize,
    /// Scaled sup over `k` per `eps`.
    pub values: Vec<f64>,
    /// Maximizing quasimomentum per `eps`.
    pub argmax: Vec<Vec<f64>>,
    pub verdict: Verdict,
    /// Unscaled fiber maxima with their quasimomenta.
    raw: Vec<(f64, Vec<f64>)>,
    candidates: Vec<Vec<f64>>,
    /// Unscaled fiber gaps `[k][eps]` over the candidates.
    grid_values: Vec<Vec<f64>>,
}

impl ErrorSweep {
    pub fn slope(&self) -> Option<f64> {
        match self.verdict {
            Verdict::Rate { slope, .. } => Some(slope),
            _ => None,
        }
    }

    pub fn passes(&self) -> bool {
        self.verdict.passes(SLOPE_THRESHOLD)
    }

    /// Largest relative difference of the values to those of `other`.
    pub fn max_relative_change(&self, other: &ErrorSweep) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| {
                if a == b {
                    0.0
                } else {
                    (a - b).abs() / a.abs().max(b.abs())
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Ordinary least squares of `log value` against `log eps`; returns the slope
/// and its standard error.
pub fn fit_rate(eps_grid: &[f64], values: &[f64]) -> Result<(f64, f64)> {
    if eps_grid.len() != values.len() || values.len() < 3 {
        return Err(Error::Fit("need at least three (eps, value) pairs".into()));
    }
    if let Some(v) = values.iter().chain(eps_grid).find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::Fit(format!("cannot fit a nonpositive value {v}")));
    }
    let xs: Vec<f64> = eps_grid.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = (rss / (n - 2.0) / sxx).sqrt();
    Ok((slope, stderr))
}

fn verdict_for(eps_grid: &[f64], values: &[f64]) -> Result<Verdict> {
    if values.iter().all(|&v| v == 0.0) {
        return Ok(Verdict::Exact);
    }
    if values.len() < 3 {
        return Ok(Verdict::Unfitted);
    }
    let (slope, stderr) = fit_rate(eps_grid, values)?;
    Ok(Verdict::Rate { slope, stderr })
}

pub fn sweep(metric: Metric, sol: &CellSolution, zeta: SpectralPoint, opts: &SweepOptions) -> Result<ErrorSweep> {
    Ok(sweep_many(&[metric], sol, zeta, opts)?.remove(0))
}

/// Several metrics over one candidate set, sharing the fiber resolvents.
pub fn sweep_many(
    metrics: &[Metric],
    sol: &CellSolution,
    zeta: SpectralPoint,
    opts: &SweepOptions,
) -> Result<Vec<ErrorSweep>> {
    opts.validate()?;
    let lattice = sol.problem().lattice();
    let eps_min = *opts.eps_grid.last().expect("validated");
    let candidates = k_candidates(lattice, opts.k_resolution, eps_min);
    sweep_over(metrics, sol, zeta, opts, &candidates)
}

/// Fiber gaps `[k][eps][metric]` over a candidate set.
fn gap_table(
    metrics: &[Metric],
    sol: &CellSolution,
    shifts: &[Complex64],
    order: usize,
    candidates: &[Vec<f64>],
) -> Result<Vec<Vec<Vec<f64>>>> {
    candidates
        .par_iter()
        .map(|k| {
            let pair = FiberPair::new(sol, k, order)?;
            shifts.iter().map(|&w| fiber_gaps(&pair, w, metrics)).collect()
        })
        .collect()
}

fn shifts_for(sol: &CellSolution, zeta: SpectralPoint, eps_grid: &[f64]) -> Vec<Complex64> {
    let p = sol.problem().order();
    eps_grid.iter().map(|&e| fiber_shift(zeta, e, p)).collect()
}

/// Best `(value, k)` per `eps` for one metric: grid maximum, then local search
/// from the best `starts` grid points, never below `floor`.
#[allow(clippy::too_many_arguments)]
fn maximize(
    sol: &CellSolution,
    metric: Metric,
    mi: usize,
    shifts: &[Complex64],
    eps_grid: &[f64],
    order: usize,
    candidates: &[Vec<f64>],
    table: &[Vec<Vec<f64>>],
    search: Option<Search>,
    floor: Option<&[(f64, Vec<f64>)]>,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let mut out = Vec::with_capacity(shifts.len());
    for (ei, &w) in shifts.iter().enumerate() {
        let mut ranked: Vec<(f64, usize)> = table.iter().enumerate().map(|(ki, row)| (row[ei][mi], ki)).collect();
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut best = match ranked.first() {
            Some(&(v, ki)) => (v, candidates[ki].clone()),
            None => (0.0, vec![0.0; sol.problem().dim()]),
        };
        if let Some(search) = search {
            if best.0 > 0.0 {
                let starts: Vec<(f64, usize)> = ranked.iter().take(search.starts).copied().collect();
                let refined: Vec<(f64, Vec<f64>)> = starts
                    .par_iter()
                    .map(|&(v, ki)| refine(sol, metric, w, order, &candidates[ki], v, eps_grid[ei], search))
                    .collect::<Result<_>>()?;
                for r in refined {
                    if r.0 > best.0 {
                        best = r;
                    }
                }
            }
        }
        if let Some(prior) = floor {
            if prior[ei].0 > best.0 {
                best = prior[ei].clone();
            }
        }
        out.push(best);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
struct Search {
    starts: usize,
    /// Initial step relative to `max(|k|, eps)`.
    step: f64,
    max_evals: usize,
    shrink_levels: u32,
}

const GRID_SEARCH: Search = Search {
    starts: REFINE_STARTS,
    step: 0.3,
    max_evals: REFINE_MAX_EVALS,
    shrink_levels: REFINE_SHRINK_LEVELS,
};

const POLISH_SEARCH: Search = Search {
    starts: 1,
    step: 0.05,
    max_evals: 16,
    shrink_levels: 5,
};

#[allow(clippy::too_many_arguments)]
fn assemble(
    metric: Metric,
    sol: &CellSolution,
    zeta: SpectralPoint,
    eps_grid: &[f64],
    k_resolution: usize,
    order: usize,
    candidates: &[Vec<f64>],
    column: Vec<Vec<f64>>,
    best: Vec<(f64, Vec<f64>)>,
) -> Result<ErrorSweep> {
    let p = sol.problem().order();
    let values: Vec<f64> = best
        .iter()
        .zip(eps_grid)
        .map(|((v, _), e)| v * e.powi(metric.eps_power(p)))
        .collect();
    let verdict = verdict_for(eps_grid, &values)?;
    Ok(ErrorSweep {
        problem: String::new(),
        metric,
        zeta,
        eps_grid: eps_grid.to_vec(),
        k_resolution,
        order,
        values,
        argmax: best.iter().map(|(_, k)| k.clone()).collect(),
        verdict,
        raw: best,
        candidates: candidates.to_vec(),
        grid_values: column,
    })
}

/// Sweep with an explicit candidate set.
pub fn sweep_over(
    metrics: &[Metric],
    sol: &CellSolution,
    zeta: SpectralPoint,
    opts: &SweepOptions,
    candidates: &[Vec<f64>],
) -> Result<Vec<ErrorSweep>> {
    opts.validate()?;
    let shifts = shifts_for(sol, zeta, &opts.eps_grid);
    let table = gap_table(metrics, sol, &shifts, opts.order, candidates)?;
    let search = opts.refine.then_some(GRID_SEARCH);
    metrics
        .iter()
        .enumerate()
        .map(|(mi, &metric)| {
            let best = maximize(sol, metric, mi, &shifts, &opts.eps_grid, opts.order, candidates, &table, search, None)?;
            let column = table.iter().map(|row| row.iter().map(|v| v[mi]).collect()).collect();
            assemble(metric, sol, zeta, &opts.eps_grid, opts.k_resolution, opts.order, candidates, column, best)
        })
        .collect()
}

/// Compass search for a local maximum of the fiber gap inside the zone.
#[allow(clippy::too_many_arguments)]
fn refine(
    sol: &CellSolution,
    metric: Metric,
    w: Complex64,
    order: usize,
    start: &[f64],
    start_value: f64,
    eps: f64,
    search: Search,
) -> Result<(f64, Vec<f64>)> {
    let lattice = sol.problem().lattice();
    let norm = start.iter().map(|v| v * v).sum::<f64>().sqrt();
    let h0 = search.step * norm.max(eps);
    let mut h = h0;
    let mut k = start.to_vec();
    let mut best = start_value;
    let mut evals = 0;
    let floor = h0 * 0.5f64.powi(search.shrink_levels as i32);
    while h > floor && evals < search.max_evals {
        let mut improved: Option<(f64, Vec<f64>)> = None;
        for axis in 0..k.len() {
            for sign in [1.0, -1.0] {
                let mut trial = k.clone();
                trial[axis] += sign * h;
                if !lattice.in_brillouin(&trial) {
                    continue;
                }
                evals += 1;
                let v = fiber_gap(&FiberPair::new(sol, &trial, order)?, w, metric)?;
                if v > improved.as_ref().map_or(best, |(b, _)| *b) {
                    improved = Some((v, trial));
                }
            }
        }
        match improved {
            Some((v, trial)) => {
                best = v;
                k = trial;
            }
            None => h *= 0.5,
        }
    }
    Ok((best, k))
}

fn check_compatible(sweeps: &[ErrorSweep]) -> Result<&ErrorSweep> {
    let first = sweeps
        .first()
        .ok_or_else(|| Error::Validation("no sweeps to recheck".into()))?;
    for s in sweeps {
        if s.eps_grid != first.eps_grid
            || s.zeta != first.zeta
            || s.order != first.order
            || s.k_resolution != first.k_resolution
        {
            return Err(Error::Validation("sweeps differ in grid, zeta or truncation".into()));
        }
    }
    Ok(first)
}

/// Reruns sweeps with twice the k resolution. The doubled candidate set
/// contains the original one, so only new quasimomenta are evaluated.
pub fn k_doubling(sweeps: &[ErrorSweep], sol: &CellSolution) -> Result<Vec<ErrorSweep>> {
    let first = check_compatible(sweeps)?;
    let metrics: Vec<Metric> = sweeps.iter().map(|s| s.metric).collect();
    let resolution = 2 * first.k_resolution;
    let eps_min = *first.eps_grid.last().expect("nonempty grid");
    let fresh: Vec<Vec<f64>> = k_candidates(sol.problem().lattice(), resolution, eps_min)
        .into_iter()
        .filter(|k| !first.candidates.iter().any(|c| same_point(c, k)))
        .collect();
    let shifts = shifts_for(sol, first.zeta, &first.eps_grid);
    let table = gap_table(&metrics, sol, &shifts, first.order, &fresh)?;
    sweeps
        .iter()
        .enumerate()
        .map(|(mi, s)| {
            let best = maximize(
                sol,
                s.metric,
                mi,
                &shifts,
                &s.eps_grid,
                s.order,
                &fresh,
                &table,
                Some(GRID_SEARCH),
                Some(&s.raw),
            )?;
            let mut candidates = s.candidates.clone();
            candidates.extend(fresh.iter().cloned());
            let mut column = s.grid_values.clone();
            column.extend(table.iter().map(|row| row.iter().map(|v| v[mi]).collect()));
            let mut out = assemble(s.metric, sol, s.zeta, &s.eps_grid, resolution, s.order, &candidates, column, best)?;
            out.problem = s.problem.clone();
            Ok(out)
        })
        .collect()
}

fn same_point(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x.abs()))
}

/// Reruns sweeps with the cell problem and fibers at twice the truncation,
/// evaluated at the original maximizers and polished by a short local search.
pub fn truncation_doubling(sweeps: &[ErrorSweep], sol: &CellSolution, cell_tol: f64) -> Result<Vec<ErrorSweep>> {
    let first = check_compatible(sweeps)?;
    let metrics: Vec<Metric> = sweeps.iter().map(|s| s.metric).collect();
    let order = 2 * first.order;
    let fine = solve_cell(sol.problem(), order.max(sol.order()), cell_tol)?;
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    for s in sweeps {
        for k in &s.argmax {
            if !candidates.iter().any(|c| same_point(c, k)) {
                candidates.push(k.clone());
            }
        }
    }
    let shifts = shifts_for(&fine, first.zeta, &first.eps_grid);
    let table = gap_table(&metrics, &fine, &shifts, order, &candidates)?;
    sweeps
        .iter()
        .enumerate()
        .map(|(mi, s)| {
            let best = maximize(
                &fine,
                s.metric,
                mi,
                &shifts,
                &s.eps_grid,
                order,
                &candidates,
                &table,
                Some(POLISH_SEARCH),
                None,
            )?;
            let column = table.iter().map(|row| row.iter().map(|v| v[mi]).collect()).collect();
            let mut out = assemble(s.metric, &fine, s.zeta, &s.eps_grid, s.k_resolution, order, &candidates, column, best)?;
            out.problem = s.problem.clone();
            Ok(out)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorRow {
    pub phase: f64,
    pub sector_constant: f64,
    pub value: f64,
    pub envelope: f64,
    /// `value / c(phi)^2`.
    pub normalized: f64,
}

#[derive(Debug, Clone)]
pub struct SectorTable {
    pub metric: Metric,
    pub modulus: f64,
    pub eps: f64,
    pub rows: Vec<SectorRow>,
}

impl SectorTable {
    pub fn is_exact(&self) -> bool {
        self.rows.iter().all(|r| r.value == 0.0)
    }

    /// `max / min` of the normalized values.
    pub fn spread(&self) -> f64 {
        if self.is_exact() {
            return 1.0;
        }
        let max = self.rows.iter().map(|r| r.normalized).fold(0.0, f64::max);
        let min = self.rows.iter().map(|r| r.normalized).fold(f64::INFINITY, f64::min);
        max / min
    }

    /// `max normalized / normalized at phi = pi`, when the grid contains `pi`.
    pub fn relative_to_pi(&self) -> Option<f64> {
        let at_pi = self
            .rows
            .iter()
            .find(|r| (r.phase - std::f64::consts::PI).abs() < 1e-12)?
            .normalized;
        let max = self.rows.iter().map(|r| r.normalized).fold(0.0, f64::max);
        Some(if max == 0.0 { 1.0 } else { max / at_pi })
    }
}

pub fn sector_sweep(
    metric: Metric,
    sol: &CellSolution,
    modulus: f64,
    phases: &[f64],
    eps: f64,
    k_resolution: usize,
    order: usize,
) -> Result<SectorTable> {
    let p = sol.problem().order();
    let opts = SweepOptions {
        eps_grid: vec![eps],
        k_resolution,
        order,
        refine: true,
    };
    let mut rows = Vec::with_capacity(phases.len());
    for &phase in phases {
        let c = sector_constant(phase)?;
        let zeta = SpectralPoint::new(modulus, phase)?;
        let value = sweep(metric, sol, zeta, &opts)?.values[0];
        rows.push(SectorRow {
            phase,
            sector_constant: c,
            value,
            envelope: metric.envelope(p, zeta, eps),
            normalized: value / (c * c),
        });
    }
    Ok(SectorTable {
        metric,
        modulus,
        eps,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusRow {
    pub modulus: f64,
    pub value: f64,
    pub envelope: f64,
}

#[derive(Debug, Clone)]
pub struct ModulusTable {
    pub metric: Metric,
    pub phase: f64,
    pub eps: f64,
    pub rows: Vec<ModulusRow>,
    pub predicted_exponent: f64,
    /// Fitted power of `|zeta|` over the moduli `>= 1`; `None` when exact or underdetermined.
    pub fitted_exponent: Option<f64>,
}

impl ModulusTable {
    pub fn is_exact(&self) -> bool {
        self.rows.iter().all(|r| r.value == 0.0)
    }
}

pub fn modulus_sweep(
    metric: Metric,
    sol: &CellSolution,
    phase: f64,
    moduli: &[f64],
    eps: f64,
    k_resolution: usize,
    order: usize,
) -> Result<ModulusTable> {
    let p = sol.problem().order();
    let opts = SweepOptions {
        eps_grid: vec![eps],
        k_resolution,
        order,
        refine: true,
    };
    let mut rows = Vec::with_capacity(moduli.len());
    for &modulus in moduli {
        let zeta = SpectralPoint::new(modulus, phase)?;
        let value = sweep(metric, sol, zeta, &opts)?.values[0];
        rows.push(ModulusRow {
            modulus,
            value,
            envelope: metric.envelope(p, zeta, eps),
        });
    }
    let fit_rows: Vec<&ModulusRow> = rows.iter().filter(|r| r.modulus >= 1.0 && r.value > 0.0).collect();
    let fitted_exponent = if fit_rows.len() >= 2 {
        let xs: Vec<f64> = fit_rows.iter().map(|r| r.modulus.ln()).collect();
        let ys: Vec<f64> = fit_rows.iter().map(|r| r.value.ln()).collect();
        Some(crate::bloch::ols_slope(&xs, &ys))
    } else {
        None
    };
    Ok(ModulusTable {
        metric,
        phase,
        eps,
        rows,
        predicted_exponent: metric.modulus_exponent(p),
        fitted_exponent,
    })
}
