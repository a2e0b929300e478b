mod common;

use hihom::bloch::assemble_fiber;
use hihom::cell::{solve_cell, voigt_reuss};
use hihom::linalg::spectral_norm;
use hihom::{Lattice, PeriodicMatrixField};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn packing_radius_ignores_rotation_and_relabeling(
        a in 0.6f64..1.6, b in 0.6f64..1.6, shear in -0.3f64..0.3,
        angle in 0.0f64..std::f64::consts::TAU, u in -2i64..=2,
    ) {
        let basis = DMatrix::from_row_slice(2, 2, &[a, shear, 0.0, b]);
        let r0 = Lattice::new(basis.clone()).unwrap().packing_radius();
        let (s, c) = angle.sin_cos();
        let rot = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let unimodular = DMatrix::from_row_slice(2, 2, &[1.0, u as f64, 0.0, 1.0]);
        let rotated = Lattice::new(&rot * &basis).unwrap().packing_radius();
        let relabeled = Lattice::new(&basis * unimodular).unwrap().packing_radius();
        prop_assert!((rotated - r0).abs() <= 1e-12 * r0);
        prop_assert!((relabeled - r0).abs() <= 1e-12 * r0);
    }

    #[test]
    fn symbol_is_homogeneous(seed in any::<u64>(), t in 0.0f64..10.0, x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let mut rng = common::rng(seed);
        let sym = common::random_symbol(&mut rng, 2, 3, 2);
        let base = sym.evaluate(&[x, y]);
        let scaled = sym.evaluate(&[t * x, t * y]);
        let diff = spectral_norm(&(&scaled - &base * hihom::linalg::c64(t, 0.0)));
        prop_assert!(diff <= 1e-12 * (t * spectral_norm(&base)).max(1e-300));
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn fiber_eigenvalues_respect_lower_bound(seed in any::<u64>(), fx in -0.5f64..0.5, fy in -0.5f64..0.5) {
        let mut rng = common::rng(seed);
        let problem = common::random_problem(&mut rng);
        let lattice = problem.lattice();
        let frac = [fx, fy];
        let k: Vec<f64> = (0..problem.dim())
            .map(|i| (0..problem.dim()).map(|j| lattice.dual_basis()[(i, j)] * frac[j]).sum())
            .collect();
        let k = lattice.reduce(&k).1;
        let kk = k.iter().map(|v| v * v).sum::<f64>().sqrt();
        let n = problem.symbol().cols();
        let eig = assemble_fiber(&problem, &k, 3).unwrap().eigenvalues(n).unwrap();
        let floor = problem.c_star() * kk.powi(2 * problem.order() as i32);
        prop_assert!(eig[0] >= floor * (1.0 - 1e-8) - 1e-12);
    }

    #[test]
    fn galerkin_eigenvalues_decrease_with_truncation(seed in any::<u64>(), f in -0.5f64..0.5) {
        let mut rng = common::rng(seed);
        let problem = common::random_problem(&mut rng);
        let k: Vec<f64> = (0..problem.dim()).map(|i| f * problem.lattice().dual_basis()[(i, 0)]).collect();
        let count = problem.symbol().cols() + 2;
        let coarse = assemble_fiber(&problem, &k, 2).unwrap().eigenvalues(count).unwrap();
        let fine = assemble_fiber(&problem, &k, 4).unwrap().eigenvalues(count).unwrap();
        for (c, f) in coarse.iter().zip(&fine) {
            prop_assert!(*f <= c * (1.0 + 1e-9) + 1e-12);
        }
    }

    #[test]
    fn kernel_at_zero_quasimomentum(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let problem = common::random_problem(&mut rng);
        let n = problem.symbol().cols();
        let eig = assemble_fiber(&problem, &vec![0.0; problem.dim()], 3).unwrap().eigenvalues(n + 1).unwrap();
        let r0 = problem.lattice().packing_radius();
        let gap = problem.c_star() * (2.0 * r0).powi(2 * problem.order() as i32);
        for e in &eig[..n] {
            prop_assert!(e.abs() <= 1e-9 * gap);
        }
        prop_assert!(eig[n] >= gap * (1.0 - 1e-8));
    }

    #[test]
    fn voigt_reuss_brackets_random_fields(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let problem = common::random_problem(&mut rng);
        let order = if problem.dim() == 1 { 12 } else { 5 };
        let sol = solve_cell(&problem, order, 1e-12).unwrap();
        let report = voigt_reuss(problem.field(), sol.g0()).unwrap();
        prop_assert!(report.holds, "{:?}", report);
    }

    #[test]
    fn grid_samples_round_trip(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let lattice = Lattice::cubic(2);
        let field = common::random_field(&mut rng, lattice.clone(), 2, 0.5);
        let samples = field.grid_values(8);
        let back = PeriodicMatrixField::from_grid_samples(lattice, &samples, 8, 1).unwrap();
        for z in field.window().points() {
            let d = spectral_norm(&(field.coefficient(z) - back.coefficient(z)));
            prop_assert!(d <= 1e-12);
        }
    }
}

fn rotation3(a: f64, b: f64, c: f64) -> DMatrix<f64> {
    let rx = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, a.cos(), -a.sin(), 0.0, a.sin(), a.cos()]);
    let ry = DMatrix::from_row_slice(3, 3, &[b.cos(), 0.0, b.sin(), 0.0, 1.0, 0.0, -b.sin(), 0.0, b.cos()]);
    let rz = DMatrix::from_row_slice(3, 3, &[c.cos(), -c.sin(), 0.0, c.sin(), c.cos(), 0.0, 0.0, 0.0, 1.0]);
    rz * ry * rx
}

proptest! {
    #![proptest_config(config(16))]

    #[test]
    fn packing_radius_ignores_rotation_in_three_dimensions(
        diag in proptest::collection::vec(0.7f64..1.4, 3),
        off in proptest::collection::vec(-0.2f64..0.2, 3),
        angles in proptest::collection::vec(0.0f64..std::f64::consts::TAU, 3),
    ) {
        let basis = DMatrix::from_row_slice(3, 3, &[diag[0], off[0], off[1], 0.0, diag[1], off[2], 0.0, 0.0, diag[2]]);
        let r0 = Lattice::new(basis.clone()).unwrap().packing_radius();
        let rotated = Lattice::new(rotation3(angles[0], angles[1], angles[2]) * &basis).unwrap().packing_radius();
        let mut swapped = basis.clone();
        swapped.swap_columns(0, 2);
        let swapped = Lattice::new(swapped).unwrap().packing_radius();
        prop_assert!((rotated - r0).abs() <= 1e-10 * r0);
        prop_assert!((swapped - r0).abs() <= 1e-10 * r0);
    }

    #[test]
    fn brillouin_grid_stays_in_zone(
        a in 0.6f64..1.6, b in 0.6f64..1.6, shear in -0.4f64..0.4, res in 2usize..10,
    ) {
        let lattice = Lattice::new(DMatrix::from_row_slice(2, 2, &[a, shear, 0.0, b])).unwrap();
        let r1 = lattice.brillouin_radius_estimate(res);
        for k in lattice.brillouin_grid(res) {
            prop_assert!(lattice.in_brillouin(&k));
            prop_assert!(k.iter().map(|v| v * v).sum::<f64>().sqrt() <= r1);
        }
    }

    #[test]
    fn quadratic_form_is_bracketed(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let problem = common::random_problem(&mut rng);
        let fiber = assemble_fiber(&problem, &vec![0.0; problem.dim()], 2).unwrap();
        let n = problem.symbol().cols();
        let u = common::random_matrix(&mut rng, fiber.size(), 1, 1.0);
        let form = (u.adjoint() * fiber.matrix() * &u)[(0, 0)].re;
        let p2 = 2 * problem.order() as i32;
        let weight: f64 = fiber
            .window()
            .points()
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let s = problem.lattice().dual_vector(z);
                let amp: f64 = (0..n).map(|c| u[(i * n + c, 0)].norm_sqr()).sum();
                s.iter().map(|v| v * v).sum::<f64>().powi(p2 / 2) * amp
            })
            .sum();
        let lower = problem.c_star() * weight;
        let upper = problem.alpha1() * problem.bounds().norm_g * weight;
        prop_assert!(form >= lower * (1.0 - 1e-10));
        prop_assert!(form <= upper * (1.0 + 1e-10));
    }

    #[test]
    fn evaluation_is_hermitian(seed in any::<u64>(), x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let mut rng = common::rng(seed);
        let field = common::random_field(&mut rng, Lattice::cubic(2), 3, 0.5);
        let g = field.evaluate(&[x, y]);
        prop_assert!(hihom::linalg::anti_hermitian_defect(&g) <= 1e-12 * spectral_norm(&g));
    }

    #[test]
    fn effective_matrix_ignores_basis_column_order(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let basis = vec![vec![1.1, 0.2], vec![-0.1, 0.9]];
        let lattice = Lattice::from_columns(&basis).unwrap();
        let field = common::random_field(&mut rng, lattice, 2, 0.5);
        let swapped_lattice = Lattice::from_columns(&[basis[1].clone(), basis[0].clone()]).unwrap();
        let entries = field
            .window()
            .points()
            .iter()
            .map(|z| (vec![z[1], z[0]], field.coefficient(z)))
            .collect();
        let swapped = PeriodicMatrixField::from_coefficients(swapped_lattice, 2, entries).unwrap();
        let symbol = common::random_symbol(&mut rng, 2, 2, 1);
        let a = solve_cell(&hihom::Problem::new(field, symbol.clone()).unwrap(), 5, 1e-13).unwrap();
        let b = solve_cell(&hihom::Problem::new(swapped, symbol).unwrap(), 5, 1e-13).unwrap();
        prop_assert!(spectral_norm(&(a.g0() - b.g0())) <= 1e-10 * spectral_norm(a.g0()));
    }
}
