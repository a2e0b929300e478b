//! Period lattice, its dual, the cell and the central Brillouin zone.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Enumeration window used for the packing radius and Brillouin membership.
pub const DEFAULT_ENUM_BOUND: i64 = 4;
const GUARD_ENUM_BOUND: i64 = 8;
const DETERMINANT_TOL: f64 = 1e-10;
/// Relative margin under which a point is treated as lying on a Brillouin face.
const BOUNDARY_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    dim: usize,
    basis: DMatrix<f64>,
    dual_basis: DMatrix<f64>,
    cell_volume: f64,
    packing_radius: f64,
}

impl Lattice {
    /// Builds a lattice from a `d x d` matrix whose columns generate it.
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        let dim = basis.nrows();
        if dim == 0 || basis.ncols() != dim {
            return Err(Error::Geometry(format!(
                "basis must be a non-empty square matrix, got {}x{}",
                basis.nrows(),
                basis.ncols()
            )));
        }
        if basis.iter().any(|v| !v.is_finite()) {
            return Err(Error::Geometry("basis has non-finite entries".into()));
        }
        let det = basis.determinant();
        let scale = basis.column_iter().map(|c| c.norm()).product::<f64>();
        if det.abs() < DETERMINANT_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Geometry(format!("singular basis (determinant {det:.3e})")));
        }
        let dual_basis = dual_basis_of(&basis)?;
        let mut lattice = Lattice {
            dim,
            basis,
            dual_basis,
            cell_volume: det.abs(),
            packing_radius: 0.0,
        };
        let r0 = lattice.packing_radius_with(DEFAULT_ENUM_BOUND);
        let guard = lattice.packing_radius_with(GUARD_ENUM_BOUND);
        if (r0 - guard).abs() > 1e-12 * guard {
            return Err(Error::Geometry(format!(
                "shortest dual vector lies outside the enumeration window ({r0} vs {guard}); basis too anisotropic"
            )));
        }
        lattice.packing_radius = r0;
        Ok(lattice)
    }

    /// Lattice generated by the given basis columns.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let dim = columns.len();
        if columns.iter().any(|c| c.len() != dim) {
            return Err(Error::Geometry(format!(
                "expected {dim} basis columns of length {dim}"
            )));
        }
        Self::new(DMatrix::from_fn(dim, dim, |r, c| columns[c][r]))
    }

    /// The integer lattice `Z^d`.
    pub fn cubic(dim: usize) -> Self {
        Self::new(DMatrix::identity(dim, dim)).expect("identity basis is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn dual_basis(&self) -> &DMatrix<f64> {
        &self.dual_basis
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }

    /// Volume of the Brillouin zone, `(2 pi)^d / |cell|`.
    pub fn brillouin_volume(&self) -> f64 {
        (2.0 * PI).powi(self.dim as i32) / self.cell_volume
    }

    /// Radius of the largest ball inside the closed Brillouin zone.
    pub fn packing_radius(&self) -> f64 {
        self.packing_radius
    }

    /// Half the shortest nonzero dual vector among `|z_i| <= enum_bound`.
    pub fn packing_radius_with(&self, enum_bound: i64) -> f64 {
        let bound = enum_bound.max(1);
        let mut best = f64::INFINITY;
        for z in integer_box(self.dim, bound) {
            if z.iter().all(|&c| c == 0) {
                continue;
            }
            best = best.min(norm(&self.dual_vector(&z)));
        }
        0.5 * best
    }

    pub fn lattice_vector(&self, l: &[i64]) -> Vec<f64> {
        combine(&self.basis, l)
    }

    /// `s(z) = sum_i z_i s^i`.
    pub fn dual_vector(&self, z: &[i64]) -> Vec<f64> {
        combine(&self.dual_basis, z)
    }

    /// Coordinates of `k` in the dual basis.
    pub fn dual_coordinates(&self, k: &[f64]) -> Vec<f64> {
        // <k, n_j> = 2 pi f_j
        (0..self.dim)
            .map(|j| {
                (0..self.dim).map(|r| k[r] * self.basis[(r, j)]).sum::<f64>() / (2.0 * PI)
            })
            .collect()
    }

    /// Strict membership in the open central Brillouin zone, checked against
    /// every nonzero dual vector in the default enumeration window.
    pub fn in_brillouin(&self, k: &[f64]) -> bool {
        self.in_brillouin_with(k, DEFAULT_ENUM_BOUND)
    }

    pub fn in_brillouin_with(&self, k: &[f64], enum_bound: i64) -> bool {
        integer_box(self.dim, enum_bound.max(1)).all(|z| {
            if z.iter().all(|&c| c == 0) {
                return true;
            }
            let s = self.dual_vector(&z);
            let s2 = dot(&s, &s);
            // |k| < |k - s|  <=>  2<k,s> < |s|^2
            s2 - 2.0 * dot(k, &s) > BOUNDARY_MARGIN * s2
        })
    }

    /// Splits `xi = s(z) + k` with `k` in the closed Brillouin zone.
    ///
    /// Fractional dual coordinates are rounded to the nearest integer (ties
    /// toward zero), then the remainder is pulled to the Voronoi cell of the
    /// origin by a short descent over neighbouring dual vectors.
    pub fn reduce(&self, xi: &[f64]) -> (Vec<i64>, Vec<f64>) {
        let frac = self.dual_coordinates(xi);
        let mut z: Vec<i64> = frac.iter().map(|&f| round_ties_toward_zero(f)).collect();
        let mut k = sub(xi, &self.dual_vector(&z));
        let neighbours: Vec<Vec<i64>> = integer_box(self.dim, 1)
            .filter(|d| d.iter().any(|&c| c != 0))
            .collect();
        loop {
            let current = dot(&k, &k);
            let mut best: Option<(f64, &Vec<i64>)> = None;
            for step in &neighbours {
                let cand = sub(&k, &self.dual_vector(step));
                let n2 = dot(&cand, &cand);
                if n2 < current * (1.0 - 1e-14) && best.is_none_or(|(b, _)| n2 < b) {
                    best = Some((n2, step));
                }
            }
            match best {
                Some((_, step)) => {
                    for (zi, di) in z.iter_mut().zip(step) {
                        *zi += di;
                    }
                    k = sub(xi, &self.dual_vector(&z));
                }
                None => break,
            }
        }
        (z, k)
    }

    /// Truncated frequency set `|z_i| <= order` with `z = 0` first.
    pub fn frequency_set(&self, order: usize) -> Vec<(Vec<i64>, Vec<f64>)> {
        FrequencyWindow::new(self.dim, order)
            .points()
            .iter()
            .map(|z| (z.clone(), self.dual_vector(z)))
            .collect()
    }

    /// Sample of the closed Brillouin zone. The box `[-1/2, 1/2]^d` in dual
    /// coordinates is gridded with spacing `1/resolution`, each point is
    /// folded back to the zone, and points strictly inside are kept. `k = 0`
    /// is always present and comes first.
    pub fn brillouin_grid(&self, resolution: usize) -> Vec<Vec<f64>> {
        let res = resolution.max(1) as i64;
        let half = res / 2;
        let mut out: Vec<Vec<f64>> = vec![vec![0.0; self.dim]];
        for j in integer_box(self.dim, half) {
            if j.iter().all(|&c| c == 0) {
                continue;
            }
            let frac: Vec<f64> = j.iter().map(|&c| c as f64 / res as f64).collect();
            let k = combine_real(&self.dual_basis, &frac);
            let (_, folded) = self.reduce(&k);
            if self.in_brillouin(&folded)
                && !out.iter().any(|p| dist2(p, &folded) < 1e-24)
            {
                out.push(folded);
            }
        }
        out
    }

    /// Grid estimate of half the Brillouin-zone diameter (diagnostics only).
    pub fn brillouin_radius_estimate(&self, resolution: usize) -> f64 {
        self.brillouin_grid(resolution)
            .iter()
            .map(|k| norm(k))
            .fold(0.0, f64::max)
    }
}

fn dual_basis_of(basis: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    // S^T N = 2 pi I  =>  S = 2 pi N^{-T}
    let inv = basis
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Geometry("singular basis".into()))?;
    Ok(inv.transpose() * (2.0 * PI))
}

/// Dense indexing of the cube `|z_i| <= order` in a deterministic order:
/// by max-norm, then squared Euclidean norm, then lexicographically. Every
/// window is a prefix of the next larger one.
#[derive(Debug, Clone)]
pub struct FrequencyWindow {
    dim: usize,
    order: usize,
    points: Vec<Vec<i64>>,
    lookup: Vec<usize>,
}

impl FrequencyWindow {
    pub fn new(dim: usize, order: usize) -> Self {
        let mut points: Vec<Vec<i64>> = integer_box(dim, order as i64).collect();
        points.sort_by(|a, b| {
            let key = |z: &Vec<i64>| {
                (
                    z.iter().map(|c| c.abs()).max().unwrap_or(0),
                    z.iter().map(|c| c * c).sum::<i64>(),
                )
            };
            key(a).cmp(&key(b)).then_with(|| a.cmp(b))
        });
        let side = 2 * order + 1;
        let mut lookup = vec![usize::MAX; side.pow(dim as u32)];
        for (i, z) in points.iter().enumerate() {
            lookup[dense_offset(z, order)] = i;
        }
        FrequencyWindow {
            dim,
            order,
            points,
            lookup,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn point(&self, index: usize) -> &[i64] {
        &self.points[index]
    }

    pub fn index_of(&self, z: &[i64]) -> Option<usize> {
        let n = self.order as i64;
        if z.len() != self.dim || z.iter().any(|&c| c.abs() > n) {
            return None;
        }
        Some(self.lookup[dense_offset(z, self.order)])
    }

    /// Index of `a - b`, if it lies in the window.
    pub fn index_of_difference(&self, a: &[i64], b: &[i64]) -> Option<usize> {
        let n = self.order as i64;
        let mut offset = 0usize;
        let side = 2 * self.order + 1;
        for i in (0..self.dim).rev() {
            let c = a[i] - b[i];
            if c.abs() > n {
                return None;
            }
            offset = offset * side + (c + n) as usize;
        }
        Some(self.lookup[offset])
    }
}

fn dense_offset(z: &[i64], order: usize) -> usize {
    let side = 2 * order + 1;
    let n = order as i64;
    z.iter()
        .rev()
        .fold(0usize, |acc, &c| acc * side + (c + n) as usize)
}

/// All integer vectors with `|z_i| <= bound`, in odometer order.
pub(crate) fn integer_box(dim: usize, bound: i64) -> impl Iterator<Item = Vec<i64>> {
    let side = (2 * bound + 1) as usize;
    let total = side.pow(dim as u32);
    (0..total).map(move |mut idx| {
        let mut z = vec![0i64; dim];
        for c in z.iter_mut() {
            *c = (idx % side) as i64 - bound;
            idx /= side;
        }
        z
    })
}

fn round_ties_toward_zero(f: f64) -> i64 {
    let r = f.round();
    if (f - f.trunc()).abs() == 0.5 {
        f.trunc() as i64
    } else {
        r as i64
    }
}

fn combine(m: &DMatrix<f64>, coeffs: &[i64]) -> Vec<f64> {
    let c: Vec<f64> = coeffs.iter().map(|&v| v as f64).collect();
    combine_real(m, &c)
}

fn combine_real(m: &DMatrix<f64>, coeffs: &[f64]) -> Vec<f64> {
    let v = m * DVector::from_column_slice(coeffs);
    v.iter().copied().collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn skew() -> Lattice {
        Lattice::from_columns(&[vec![1.0, 0.0], vec![0.5, 1.0]]).unwrap()
    }

    #[test]
    fn dual_basis_examples() {
        let l1 = Lattice::cubic(1);
        assert_relative_eq!(l1.dual_basis()[(0, 0)], 2.0 * PI, epsilon = 1e-14);

        let l = skew();
        let s = l.dual_basis();
        assert_relative_eq!(s[(0, 0)], 2.0 * PI, epsilon = 1e-13);
        assert_relative_eq!(s[(1, 0)], -PI, epsilon = 1e-13);
        assert_relative_eq!(s[(0, 1)], 0.0, epsilon = 1e-13);
        assert_relative_eq!(s[(1, 1)], 2.0 * PI, epsilon = 1e-13);

        let id = Lattice::cubic(2);
        let expect = DMatrix::<f64>::identity(2, 2) * (2.0 * PI);
        assert!((id.dual_basis() - expect).abs().max() < 1e-14);
    }

    #[test]
    fn biorthogonality() {
        let l = Lattice::from_columns(&[vec![1.0, 0.2, 0.0], vec![0.3, 1.1, 0.1], vec![0.0, -0.4, 0.9]])
            .unwrap();
        let prod = l.dual_basis().transpose() * l.basis();
        let expect = DMatrix::<f64>::identity(3, 3) * (2.0 * PI);
        assert!((prod - expect).abs().max() <= 1e-12 * 2.0 * PI);
    }

    #[test]
    fn singular_basis_rejected() {
        let err = Lattice::from_columns(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap_err();
        assert!(matches!(err, Error::Geometry(_)));
    }

    #[test]
    fn packing_radius_examples() {
        assert_relative_eq!(Lattice::cubic(1).packing_radius(), PI, epsilon = 1e-14);
        assert_relative_eq!(Lattice::cubic(3).packing_radius(), PI, epsilon = 1e-14);
        let l2 = Lattice::from_columns(&[vec![2.0]]).unwrap();
        assert_relative_eq!(l2.packing_radius(), PI / 2.0, epsilon = 1e-14);
        // brute force over |z_i| <= 4: dual vectors 2pi(z1, z2 - z1/2)
        let mut best = f64::INFINITY;
        for z1 in -4i64..=4 {
            for z2 in -4i64..=4 {
                if z1 == 0 && z2 == 0 {
                    continue;
                }
                let v = [2.0 * PI * z1 as f64, 2.0 * PI * (z2 as f64 - 0.5 * z1 as f64)];
                best = best.min((v[0] * v[0] + v[1] * v[1]).sqrt());
            }
        }
        assert_relative_eq!(best / 2.0, PI, epsilon = 1e-12);
        assert_relative_eq!(skew().packing_radius(), best / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn brillouin_membership() {
        let l = Lattice::cubic(1);
        assert!(l.in_brillouin(&[3.0]));
        assert!(l.in_brillouin(&[0.0]));
        assert!(!l.in_brillouin(&[PI]));
        assert!(!l.in_brillouin(&[-PI]));
        assert!(skew().in_brillouin(&[0.0, 0.0]));
    }

    #[test]
    fn frequency_set_ordering() {
        let l = Lattice::cubic(1);
        let f = l.frequency_set(1);
        let zs: Vec<i64> = f.iter().map(|(z, _)| z[0]).collect();
        assert_eq!(zs, vec![0, -1, 1]);
        assert_relative_eq!(f[1].1[0], -2.0 * PI);
        assert_relative_eq!(f[2].1[0], 2.0 * PI);

        let f2 = Lattice::cubic(2).frequency_set(1);
        assert_eq!(f2.len(), 9);
        assert_eq!(f2[0].0, vec![0, 0]);

        let f3: Vec<i64> = l.frequency_set(3).iter().map(|(z, _)| z[0]).collect();
        assert_eq!(f3, vec![0, -1, 1, -2, 2, -3, 3]);
    }

    #[test]
    fn frequency_windows_are_nested() {
        for dim in 1..=3 {
            for n in 0..4 {
                let small = FrequencyWindow::new(dim, n);
                let big = FrequencyWindow::new(dim, n + 1);
                assert_eq!(small.points(), &big.points()[..small.len()]);
                for (i, z) in big.points().iter().enumerate() {
                    assert_eq!(big.index_of(z), Some(i));
                }
            }
        }
    }

    #[test]
    fn brillouin_grid_examples() {
        let l = Lattice::cubic(1);
        let g = l.brillouin_grid(4);
        assert_eq!(g[0], vec![0.0]);
        assert!(g.iter().all(|k| k[0] > -PI && k[0] < PI));
        assert_eq!(l.brillouin_grid(1), vec![vec![0.0]]);
        let l2 = Lattice::cubic(2);
        let g2 = l2.brillouin_grid(8);
        assert!(g2.iter().all(|k| l2.in_brillouin(k)));
        assert_eq!(g2.len(), 49);
    }

    #[test]
    fn brillouin_volume_matches_grid_estimate() {
        // Monte-Carlo-free check: count a fine grid of the fundamental box
        // that lands strictly inside the zone after folding.
        for l in [Lattice::cubic(2), skew()] {
            let res = 200usize;
            let mut inside = 0usize;
            let box_volume = l.dual_basis().determinant().abs();
            for i in 0..res {
                for j in 0..res {
                    let f = [
                        (i as f64 + 0.5) / res as f64 - 0.5,
                        (j as f64 + 0.5) / res as f64 - 0.5,
                    ];
                    let k = combine_real(l.dual_basis(), &f);
                    let (_, folded) = l.reduce(&k);
                    if l.in_brillouin(&folded) {
                        inside += 1;
                    }
                }
            }
            let est = box_volume * inside as f64 / (res * res) as f64;
            assert!((est * l.cell_volume() / (2.0 * PI).powi(2) - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn reduction_lands_in_closed_zone() {
        let l = skew();
        for &xi in &[[10.0, -3.0], [0.1, 0.2], [-25.0, 40.0], [3.1, 3.1]] {
            let (z, k) = l.reduce(&xi);
            let back = l.dual_vector(&z);
            assert_relative_eq!(back[0] + k[0], xi[0], epsilon = 1e-12);
            assert_relative_eq!(back[1] + k[1], xi[1], epsilon = 1e-12);
            let s_all = l.frequency_set(2);
            for (_, s) in s_all.iter().skip(1) {
                assert!(norm(&k) <= norm(&sub(&k, s)) + 1e-12);
            }
        }
        let c = Lattice::cubic(1);
        // tie at half a dual vector rounds toward zero
        assert_eq!(c.reduce(&[PI]).0, vec![0]);
        assert_eq!(c.reduce(&[-PI]).0, vec![0]);
    }
}
