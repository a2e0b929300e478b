
use hihom::bloch::{assemble_fiber, germ, germ_threshold_check, spectral_germ};
use hihom::cell::{detect_special_cases, lambda_norms, solve_cell, voigt_reuss, CellSolution};
use hihom::experiments::{
    k_doubling, modulus_sweep, sector_sweep, sweep_many, truncation_doubling, ErrorSweep, Metric, SweepOptions,
    DOUBLING_TOLERANCE, SLOPE_THRESHOLD,
};
use hihom::linalg::hermitian_eigenvalues;
use hihom::resolvent::{
    apply_corrector, apply_resolvent, corrector_removal_allowed, CorrectorVariant, PlaneWaveSum, ResolventKind,
};
use hihom::symbol::sphere_points;
use hihom::Problem;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{matrix_json, vector_json, Config};
use crate::error::CliError;
use crate::output::{csv_table, num, OutDir};

const DEFAULT_BANDS: usize = 4;
const DEFAULT_T_FRACTIONS: [f64; 3] = [0.1, 0.05, 0.025];
const THRESHOLD_ORDER_MIN: f64 = 0.9;

pub struct Context {
    pub config: Config,
    pub problem: Problem,
    pub order: usize,
    pub out: OutDir,
}

impl Context {
    fn cell(&self) -> Result<CellSolution, CliError> {
        Ok(solve_cell(&self.problem, self.order, self.config.cell_tol()?)?)
    }

    fn say(&self, line: impl AsRef<str>) {
        if !self.out.quiet {
            println!("{}", line.as_ref());
        }
    }
}

pub fn cell_solve(ctx: &Context) -> Result<(), CliError> {
    let sol = ctx.cell()?;
    let problem = &ctx.problem;
    let vr = voigt_reuss(problem.field(), sol.g0())?;
    let certs = lambda_norms(&sol);
    let bounds = problem.bounds();
    let doc = json!({
        "command": "cell-solve",
        "truncation": ctx.order,
        "seed": ctx.config.seed,
        "g0": matrix_json(sol.g0()),
        "residual": sol.residual(),
        "iterations": sol.iterations(),
        "special_case": detect_special_cases(&sol).as_str(),
        "alpha0": problem.alpha0(),
        "alpha1": problem.alpha1(),
        "c_star": problem.c_star(),
        "bounds": {
            "norm_g": bounds.norm_g,
            "norm_ginv": bounds.norm_ginv,
            "lower": bounds.lower,
            "resolution": bounds.resolution,
        },
        "voigt_reuss": {
            "holds": vr.holds,
            "lower_margin": vr.lower_margin,
            "upper_margin": vr.upper_margin,
            "g_over": matrix_json(&vr.g_over),
            "g_under": matrix_json(&vr.g_under),
            "quadrature_resolution": vr.quadrature_resolution,
        },
        "certificates": {
            "holds": certs.holds(),
            "norm_l2": certs.norm_l2,
            "norm_b_l2": certs.norm_b_l2,
            "norm_hp": certs.norm_hp,
            "bound_l2": certs.bound_l2,
            "bound_b_l2": certs.bound_b_l2,
            "bound_hp": certs.bound_hp,
        },
    });
    ctx.out.write_json("g0.json", &doc)?;
    let g0 = sol.g0();
    for i in 0..g0.nrows() {
        let row: Vec<String> = (0..g0.ncols()).map(|j| format!("{:.10}", g0[(i, j)].re)).collect();
        ctx.say(format!("g0[{i}] = {}", row.join(" ")));
    }
    if !vr.holds {
        return Err(CliError::Check(format!(
            "Voigt-Reuss bracket violated (margins {:.3e}, {:.3e})",
            vr.lower_margin, vr.upper_margin
        )));
    }
    if !certs.holds() {
        return Err(CliError::Check(format!("corrector norm bounds violated: {certs:?}")));
    }
    Ok(())
}

fn default_path(dim: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![0.0], vec![0.5]],
        2 => vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![0.5, 0.5], vec![0.0, 0.0]],
        _ => {
            let mut path = vec![vec![0.0; dim]];
            for i in 0..dim {
                let mut v = path.last().unwrap().clone();
                v[i] = 0.5;
                path.push(v);
            }
            path.push(vec![0.0; dim]);
            path
        }
    }
}

pub fn bands(ctx: &Context) -> Result<(), CliError> {
    let sol = ctx.cell()?;
    let problem = &ctx.problem;
    let dim = problem.dim();
    let vertices = ctx.config.grids.k_path.clone().unwrap_or_else(|| default_path(dim));
    if vertices.len() < 2 || vertices.iter().any(|v| v.len() != dim) {
        return Err(CliError::Config(format!(
            "dimension mismatch: k_path needs at least two vertices with d = {dim} coordinates"
        )));
    }
    let count = ctx.config.grids.bands.unwrap_or(DEFAULT_BANDS).max(1);
    let per_segment = ctx.config.k_resolution();
    let dual = problem.lattice().dual_basis();
    let to_k = |f: &[f64]| -> Vec<f64> { (0..dim).map(|i| (0..dim).map(|j| dual[(i, j)] * f[j]).sum()).collect() };
    let mut points: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut arc = 0.0;
    for (s, pair) in vertices.windows(2).enumerate() {
        let (a, b) = (to_k(&pair[0]), to_k(&pair[1]));
        let length = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let start = if s == 0 { 0 } else { 1 };
        for i in start..=per_segment {
            let t = i as f64 / per_segment as f64;
            let k: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + t * (y - x)).collect();
            points.push((arc + t * length, k));
        }
        arc += length;
    }
    let n = problem.symbol().cols();
    let p2 = 2 * problem.order() as i32;
    let rows = points
        .par_iter()
        .map(|(t, k)| -> Result<Vec<String>, CliError> {
            let eig = assemble_fiber(problem, k, ctx.order)?.eigenvalues(count)?;
            let norm = k.iter().map(|v| v * v).sum::<f64>().sqrt();
            let predicted = if norm == 0.0 {
                vec![0.0; n]
            } else {
                let theta: Vec<f64> = k.iter().map(|v| v / norm).collect();
                hermitian_eigenvalues(&germ(problem.symbol(), sol.g0(), &theta)?)
                    .into_iter()
                    .map(|g| g * norm.powi(p2))
                    .collect()
            };
            let mut row = vec![num(*t)];
            row.extend(k.iter().map(|v| num(*v)));
            row.extend(eig.iter().map(|v| num(*v)));
            row.extend(predicted.iter().map(|v| num(*v)));
            Ok(row)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut header: Vec<String> = vec!["t".into()];
    header.extend((0..dim).map(|i| format!("k{i}")));
    header.extend((1..=count).map(|j| format!("lambda{j}")));
    header.extend((1..=n).map(|j| format!("germ{j}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    ctx.out.write("bands.csv", &csv_table(&header, &rows))?;
    ctx.say(format!("{} quasimomenta, {count} bands", rows.len()));
    Ok(())
}

pub fn germ_check(ctx: &Context) -> Result<(), CliError> {
    let sol = ctx.cell()?;
    let problem = &ctx.problem;
    let dim = problem.dim();
    let r0 = problem.lattice().packing_radius();
    let thetas = match &ctx.config.grids.theta {
        Some(list) => list
            .iter()
            .map(|v| {
                let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                if v.len() != dim || norm == 0.0 {
                    Err(CliError::Config(format!("dimension mismatch: theta {v:?} must be a nonzero d = {dim} vector")))
                } else {
                    Ok(v.iter().map(|c| c / norm).collect())
                }
            })
            .collect::<Result<Vec<Vec<f64>>, CliError>>()?,
        None => sphere_points(dim, 8),
    };
    let fractions = ctx.config.grids.t.clone().unwrap_or_else(|| DEFAULT_T_FRACTIONS.to_vec());
    let t: Vec<f64> = fractions.iter().map(|f| f * r0).collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut min_ratio = f64::INFINITY;
    for theta in &thetas {
        let s = spectral_germ(problem, sol.g0(), theta);
        if let Ok(s) = &s {
            min_ratio = min_ratio.min(hermitian_eigenvalues(s)[0] / problem.c_star());
        }
        match germ_threshold_check(problem, sol.g0(), theta, &t, ctx.order) {
            Ok(r) => {
                let ok = r.order.is_none_or(|q| q >= THRESHOLD_ORDER_MIN);
                if !ok {
                    failures.push(format!("threshold order {:.3} at theta {theta:?}", r.order.unwrap()));
                }
                rows.push(json!({
                    "theta": theta,
                    "t": r.t,
                    "gamma": r.gamma,
                    "ratios": r.ratios,
                    "errors": r.errors,
                    "constant": r.constant,
                    "order": r.order,
                    "pass": ok,
                }));
            }
            Err(e) if e.is_validation() => return Err(e.into()),
            Err(e) => {
                failures.push(format!("theta {theta:?}: {e}"));
                rows.push(json!({ "theta": theta, "error": e.to_string(), "pass": false }));
            }
        }
    }
    let doc = json!({
        "command": "germ-check",
        "truncation": ctx.order,
        "seed": ctx.config.seed,
        "r0": r0,
        "c_star": problem.c_star(),
        "min_germ_over_c_star": min_ratio,
        "rows": rows,
        "pass": failures.is_empty(),
    });
    ctx.out.write_json("germ.json", &doc)?;
    ctx.say(format!("{} directions, min germ / c* = {min_ratio:.6}", thetas.len()));
    match failures.first() {
        None => Ok(()),
        Some(f) => Err(CliError::Check(f.clone())),
    }
}

fn sum_json(sum: &PlaneWaveSum, p: u32) -> Value {
    let terms: Vec<Value> = sum
        .terms()
        .iter()
        .map(|(xi, c)| json!({ "xi": xi, "amplitude": vector_json(c) }))
        .collect();
    json!({ "terms": terms, "l2_norm": sum.l2_norm(), "hp_norm": sum.hp_norm(p) })
}

pub fn solve(ctx: &Context) -> Result<(), CliError> {
    let sol = ctx.cell()?;
    let (eps, input, kinds) = ctx.config.input()?;
    let zeta = ctx.config.zeta()?;
    let p = ctx.problem.order();
    let mut outputs = serde_json::Map::new();
    let mut full = None;
    let mut effective = None;
    for kind in &kinds {
        let sum = match kind.as_str() {
            "full" => apply_resolvent(ResolventKind::Full, &input, zeta, eps, &sol, ctx.order)?,
            "effective" => apply_resolvent(ResolventKind::Effective, &input, zeta, eps, &sol, ctx.order)?,
            "corrector" => apply_corrector(CorrectorVariant::Smoothed, &input, zeta, eps, &sol)?,
            "corrector_plain" => apply_corrector(CorrectorVariant::Plain, &input, zeta, eps, &sol)?,
            other => {
                return Err(CliError::Config(format!(
                    "unknown output kind '{other}' (expected full, effective, corrector, corrector_plain)"
                )))
            }
        };
        outputs.insert(kind.clone(), sum_json(&sum, p));
        match kind.as_str() {
            "full" => full = Some(sum),
            "effective" => effective = Some(sum),
            _ => {}
        }
    }
    let difference = match (&full, &effective) {
        (Some(f), Some(e)) => Some(f.add_scaled(e, hihom::linalg::c64(-1.0, 0.0)).l2_norm()),
        _ => None,
    };
    let doc = json!({
        "command": "solve",
        "truncation": ctx.order,
        "seed": ctx.config.seed,
        "eps": eps,
        "zeta": { "modulus": zeta.modulus(), "phase": zeta.phase() },
        "input": sum_json(&input, p),
        "outputs": outputs,
        "difference_l2": difference,
    });
    ctx.out.write_json("solve.json", &doc)?;
    if let Some(d) = difference {
        ctx.say(format!("|full - effective| = {d:.6e}"));
    }
    Ok(())
}

fn metrics(config: &Config) -> Result<Vec<Metric>, CliError> {
    match &config.metrics {
        None => Ok(Metric::ALL.to_vec()),
        Some(names) => Ok(names.iter().map(|n| Metric::parse(n)).collect::<Result<Vec<_>, _>>()?),
    }
}

pub fn verify(ctx: &Context) -> Result<(), CliError> {
    let sol = ctx.cell()?;
    let problem = &ctx.problem;
    let p = problem.order();
    let zeta = ctx.config.zeta()?;
    let metrics = metrics(&ctx.config)?;
    let mut opts = SweepOptions::new(ctx.order);
    if let Some(eps) = &ctx.config.grids.eps {
        opts.eps_grid = eps.clone();
    }
    opts.k_resolution = ctx.config.k_resolution();
    let sweeps = sweep_many(&metrics, &sol, zeta, &opts)?;
    let (kd, nd): (Option<Vec<ErrorSweep>>, Option<Vec<ErrorSweep>>) = if ctx.config.doubling {
        (Some(k_doubling(&sweeps, &sol)?), Some(truncation_doubling(&sweeps, &sol, ctx.config.cell_tol()?)?))
    } else {
        (None, None)
    };
    let removal = corrector_removal_allowed(p, problem.dim(), detect_special_cases(&sol));
    let sector_eps = ctx.config.grids.sector_eps.unwrap_or(1.0 / 16.0);
    let mut table = serde_json::Map::new();
    let mut failures = Vec::new();
    for (i, s) in sweeps.iter().enumerate() {
        let name = s.metric.as_str();
        let required = s.metric != Metric::NoSmoothing || removal;
        let mut rows: Vec<Vec<String>> = s
            .eps_grid
            .iter()
            .zip(&s.values)
            .map(|(&eps, &v)| {
                vec![
                    name.to_string(),
                    num(eps),
                    num(zeta.phase()),
                    num(zeta.modulus()),
                    num(v),
                    num(s.metric.envelope(p, zeta, eps)),
                ]
            })
            .collect();
        let mut ok = s.passes();
        let mut entry = json!({
            "verdict": s.verdict.label(),
            "slope": s.slope(),
            "stderr": match s.verdict { hihom::experiments::Verdict::Rate { stderr, .. } => Some(stderr), _ => None },
            "values": s.values,
            "eps": s.eps_grid,
            "required": required,
        });
        if let (Some(kd), Some(nd)) = (&kd, &nd) {
            let dk = s.max_relative_change(&kd[i]);
            let dn = s.max_relative_change(&nd[i]);
            ok &= dk < DOUBLING_TOLERANCE && dn < DOUBLING_TOLERANCE;
            entry["k_doubling_change"] = json!(dk);
            entry["n_doubling_change"] = json!(dn);
        }
        if let Some(phases) = &ctx.config.grids.phases {
            let t = sector_sweep(s.metric, &sol, zeta.modulus(), phases, sector_eps, opts.k_resolution, ctx.order)?;
            for r in &t.rows {
                rows.push(vec![
                    name.to_string(),
                    num(sector_eps),
                    num(r.phase),
                    num(t.modulus),
                    num(r.value),
                    num(r.envelope),
                ]);
            }
            entry["sector_spread"] = json!(t.spread());
        }
        if let Some(moduli) = &ctx.config.grids.moduli {
            let t = modulus_sweep(s.metric, &sol, zeta.phase(), moduli, sector_eps, opts.k_resolution, ctx.order)?;
            for r in &t.rows {
                rows.push(vec![
                    name.to_string(),
                    num(sector_eps),
                    num(t.phase),
                    num(r.modulus),
                    num(r.value),
                    num(r.envelope),
                ]);
            }
            entry["modulus_exponent_fitted"] = json!(t.fitted_exponent);
            entry["modulus_exponent_predicted"] = json!(t.predicted_exponent);
        }
        entry["pass"] = json!(ok);
        if required && !ok {
            failures.push(match s.slope() {
                Some(slope) if slope < SLOPE_THRESHOLD => {
                    format!("{name} slope {slope:.3} below {SLOPE_THRESHOLD}")
                }
                _ if !s.passes() => format!("{name} verdict {}", s.verdict.label()),
                _ => format!("{name} changes by more than {DOUBLING_TOLERANCE} under doubling"),
            });
        }
        let header = ["metric", "eps", "phase", "modulus", "value", "bound_envelope"];
        ctx.out.write(&format!("sweep_{}.csv", name.to_lowercase()), &csv_table(&header, &rows))?;
        ctx.say(format!(
            "{name:<13} {:<8} slope {}",
            s.verdict.label(),
            s.slope().map_or("-".to_string(), |v| format!("{v:.4}"))
        ));
        table.insert(name.to_string(), entry);
    }
    let doc = json!({
        "command": "verify",
        "truncation": ctx.order,
        "seed": ctx.config.seed,
        "k_resolution": opts.k_resolution,
        "zeta": { "modulus": zeta.modulus(), "phase": zeta.phase() },
        "slope_threshold": SLOPE_THRESHOLD,
        "corrector_removal_allowed": removal,
        "metrics": table,
        "pass": failures.is_empty(),
    });
    ctx.out.write_json("verdict.json", &doc)?;
    match failures.first() {
        None => Ok(()),
        Some(f) => Err(CliError::Check(f.clone())),
    }
}

pub fn report(ctx: &Context) -> Result<(), CliError> {
    cell_solve(ctx)?;
    bands(ctx)?;
    germ_check(ctx)?;
    verify(ctx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_paths_start_at_origin() {
        for d in 1..=3 {
            let path = default_path(d);
            assert!(path[0].iter().all(|&c| c == 0.0));
            assert!(path.iter().all(|v| v.len() == d));
        }
        assert_eq!(default_path(2).len(), 4);

    }
}
