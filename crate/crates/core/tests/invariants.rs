use std::f64::consts::PI;

use hihom::bloch::assemble_fiber;
use hihom::cell::solve_cell;
use hihom::linalg::{c64, spectral_norm};
use hihom::presets;
use hihom::resolvent::FiberPair;
use hihom::symbol::DEFAULT_SPHERE_SAMPLES;

#[test]
fn effective_matrix_converges_in_truncation_on_shipped_examples() {
    for (name, problem) in presets::shipped().unwrap() {
        let n = if problem.dim() == 1 { 8 } else { 6 };
        let coarse = solve_cell(&problem, n, 1e-13).unwrap();
        let fine = solve_cell(&problem, 2 * n, 1e-13).unwrap();
        let change = spectral_norm(&(coarse.g0() - fine.g0()));
        assert!(change <= 1e-6 * spectral_norm(fine.g0()), "{name}: {change:e}");
    }
}

#[test]
fn ellipticity_sampling_converges_on_shipped_examples() {
    for (name, problem) in presets::shipped().unwrap() {
        let (a0, a1) = problem.symbol().ellipticity_bounds(DEFAULT_SPHERE_SAMPLES).unwrap();
        let (b0, b1) = problem.symbol().ellipticity_bounds(2 * DEFAULT_SPHERE_SAMPLES).unwrap();
        assert!((a0 - b0).abs() < 0.01 * b0 && (a1 - b1).abs() < 0.01 * b1, "{name}");
    }
}

#[test]
fn reported_residual_matches_dense_recomputation() {
    for (name, problem) in presets::shipped().unwrap() {
        let order = if problem.dim() == 1 { 10 } else { 4 };
        let sol = solve_cell(&problem, order, 1e-12).unwrap();
        let dim = problem.dim();
        let fiber = assemble_fiber(&problem, &vec![0.0; dim], order).unwrap();
        let window = fiber.window();
        let (n, m) = (problem.symbol().cols(), problem.symbol().rows());
        let mut worst = 0.0f64;
        for col in 0..m {
            let mut r_norm = 0.0;
            let mut rhs_norm = 0.0;
            for (i, z) in window.points().iter().enumerate().skip(1) {
                let b = problem.symbol().evaluate(&problem.lattice().dual_vector(z));
                let rhs = b.adjoint() * problem.field().coefficient(z).column(col);
                let mut acc = rhs.clone();
                for (j, w) in window.points().iter().enumerate().skip(1) {
                    acc += fiber.block(i, j) * sol.lambda().coefficient(w).column(col);
                }
                r_norm += acc.norm_squared();
                rhs_norm += rhs.norm_squared();
            }
            if rhs_norm > 0.0 {
                worst = worst.max((r_norm / rhs_norm).sqrt());
            }
        }
        assert_eq!(n, sol.lambda().rows(), "{name}");
        assert!(worst <= 1e-10 && (worst - sol.residual()).abs() <= 1e-10, "{name}: {worst:e} vs {:e}", sol.residual());
    }
}

#[test]
fn fiber_spectrum_is_shift_covariant() {
    let problem = presets::cosine1d(1, 2.0, 1.0).unwrap();
    let k = 0.7;
    let order = 16;
    let base = assemble_fiber(&problem, &[k], order).unwrap().eigenvalues(8).unwrap();
    let shifted = assemble_fiber(&problem, &[k + 2.0 * PI], order).unwrap().eigenvalues(8).unwrap();
    for (a, b) in base.iter().zip(&shifted) {
        assert!((a - b).abs() <= 0.01 * a, "{a} vs {b}");
    }
}

#[test]
fn projected_and_plain_effective_resolvents_differ_by_bounded_amount() {
    let problem = presets::cosine1d(1, 2.0, 1.0).unwrap();
    let sol = solve_cell(&problem, 16, 1e-12).unwrap();
    let r0 = problem.lattice().packing_radius();
    let bound = 1.0 / (problem.c_star() * r0.powi(2));
    for eps in [0.25, 0.0625, 0.015625] {
        let w = c64(-eps * eps, 0.0);
        for k in [0.0, 0.5, -1.7, PI] {
            let pair = FiberPair::new(&sol, &[k], 16).unwrap();
            let plain = pair.resolvent_gap(w).unwrap();
            let projected = pair.projected_resolvent_gap(w).unwrap();
            assert!((plain - projected).abs() <= bound * (1.0 + 1e-9), "eps {eps} k {k}");
        }
    }
}

