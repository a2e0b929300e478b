//! Built-in problems shared by the command line front end and the test suites.

use crate::error::Result;
use crate::linalg::{c64, CMat};
use crate::{DifferentialSymbol, Lattice, PeriodicMatrixField, Problem};

/// `b(D) = D^p` on the unit lattice with `g = a + b cos 2 pi x`.
pub fn cosine1d(p: u32, a: f64, b: f64) -> Result<Problem> {
    let field = PeriodicMatrixField::cosine(Lattice::cubic(1), 1, a, b)?;
    Problem::new(field, DifferentialSymbol::axis_powers(1, p))
}

/// Gradient symbol on the unit square lattice with `g = (a + b cos 2 pi x1) I_2`.
pub fn laminate2d(a: f64, b: f64) -> Result<Problem> {
    let field = PeriodicMatrixField::cosine(Lattice::cubic(2), 2, a, b)?;
    Problem::new(field, DifferentialSymbol::gradient(2))
}

/// Gradient symbol with a constant coefficient matrix.
pub fn constant(value: CMat) -> Result<Problem> {
    let dim = value.nrows();
    let field = PeriodicMatrixField::constant(Lattice::cubic(dim), value)?;
    Problem::new(field, DifferentialSymbol::gradient(dim))
}

/// A genuinely two-dimensional coupled field on the unit square:
/// `g11 = 2 + cos 2 pi x1`, `g22 = 2 + cos 2 pi x2 / 2`, `g12 = g21 = 0.4 cos 2 pi (x1 + x2)`.
pub fn coupled2d() -> Result<Problem> {
    let entry = |i: usize, j: usize, v: f64| {
        let mut m = CMat::zeros(2, 2);
        m[(i, j)] = c64(v, 0.0);
        if i != j {
            m[(j, i)] = c64(v, 0.0);
        }
        m
    };
    let terms = vec![
        (vec![0, 0], entry(0, 0, 2.0) + entry(1, 1, 2.0)),
        (vec![1, 0], entry(0, 0, 0.5)),
        (vec![-1, 0], entry(0, 0, 0.5)),
        (vec![0, 1], entry(1, 1, 0.25)),
        (vec![0, -1], entry(1, 1, 0.25)),
        (vec![1, 1], entry(0, 1, 0.2)),
        (vec![-1, -1], entry(0, 1, 0.2)),
    ];
    let field = PeriodicMatrixField::from_coefficients(Lattice::cubic(2), 2, terms)?;
    Problem::new(field, DifferentialSymbol::gradient(2))
}

/// The examples every certificate is checked against.
pub fn shipped() -> Result<Vec<(&'static str, Problem)>> {
    let diag = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c64(1.5, 0.0), c64(0.75, 0.0)]));
    Ok(vec![
        ("cosine1d_p1", cosine1d(1, 2.0, 1.0)?),
        ("cosine1d_p2", cosine1d(2, 2.0, 1.0)?),
        ("laminate2d", laminate2d(2.0, 1.0)?),
        ("coupled2d", coupled2d()?),
        ("constant2d", constant(diag)?),
    ])
}
