#![allow(dead_code)]

use hihom::linalg::{c64, CMat};
use hihom::symbol::DEFAULT_SPHERE_SAMPLES;
use hihom::{DifferentialSymbol, Lattice, MultiIndex, PeriodicMatrixField, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, scale: f64) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        c64(rng.random_range(-scale..scale), rng.random_range(-scale..scale))
    })
}

/// Hermitian positive trigonometric polynomial with frequencies in `{-1,0,1}^d`.
/// The mean is shifted so that `g(x) >= floor` everywhere.
pub fn random_field<R: Rng>(rng: &mut R, lattice: Lattice, size: usize, floor: f64) -> PeriodicMatrixField {
    let dim = lattice.dim();
    let mut entries = Vec::new();
    let mut spread = 0.0;
    let mut z = vec![-1i64; dim];
    loop {
        // keep one representative of each pair {z, -z}
        let positive = z.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0);
        if positive {
            let c = random_matrix(rng, size, size, 0.5);
            spread += 2.0 * c.norm();
            let neg: Vec<i64> = z.iter().map(|v| -v).collect();
            entries.push((neg, c.adjoint()));
            entries.push((z.clone(), c));
        }
        let Some(pos) = z.iter().position(|&c| c < 1) else { break };
        z[pos] += 1;
        for c in &mut z[..pos] {
            *c = -1;
        }
    }
    let a = random_matrix(rng, size, size, 0.5);
    let mean = &a * a.adjoint() + CMat::identity(size, size) * c64(spread + floor, 0.0);
    entries.push((vec![0; dim], mean));
    PeriodicMatrixField::from_coefficients(lattice, size, entries).expect("random field is valid")
}

/// First-order symbol `b(xi) = sum_j xi_j B_j` with random `m x n` blocks,
/// resampled until it has full rank on the sphere.
pub fn random_symbol<R: Rng>(rng: &mut R, dim: usize, m: usize, n: usize) -> DifferentialSymbol {
    loop {
        let terms = (0..dim).map(|j| (MultiIndex::axis(dim, j, 1), random_matrix(rng, m, n, 1.0))).collect();
        let sym = DifferentialSymbol::new(dim, m, n, terms).expect("random symbol is valid");
        if sym.check_rank(DEFAULT_SPHERE_SAMPLES, 1e-3) {
            return sym;
        }
    }
}

/// Random problem with `d <= 2`, `m <= 3`.
pub fn random_problem<R: Rng>(rng: &mut R) -> Problem {
    let dim = rng.random_range(1..=2usize);
    let m = rng.random_range(1..=3usize);
    let n = rng.random_range(1..=m);
    let basis = if dim == 1 {
        vec![vec![rng.random_range(0.5..2.0)]]
    } else {
        vec![
            vec![rng.random_range(0.7..1.5), rng.random_range(-0.3..0.3)],
            vec![rng.random_range(-0.3..0.3), rng.random_range(0.7..1.5)],
        ]
    };
    let lattice = Lattice::from_columns(&basis).expect("random basis is regular");
    let field = random_field(rng, lattice, m, 0.5);
    let symbol = random_symbol(rng, dim, m, n);
    Problem::new(field, symbol).expect("random problem is valid")
}

/// `1 / mean(1/g)` for scalar `g = a + b cos 2 pi x` by the periodic trapezoid rule.
pub fn harmonic_mean_1d(a: f64, b: f64, points: usize) -> f64 {
    let s: f64 = (0..points)
        .map(|j| 1.0 / (a + b * (2.0 * std::f64::consts::PI * j as f64 / points as f64).cos()))
        .sum();
    points as f64 / s
}
