use crate::error::{Error, Result};
use crate::field::{FieldBounds, PeriodicMatrixField};
use crate::lattice::Lattice;
use crate::symbol::{DifferentialSymbol, DEFAULT_RANK_TOL, DEFAULT_SPHERE_SAMPLES};

/// A coefficient field paired with a symbol, with the sampled constants
/// that enter the a priori bounds.
#[derive(Debug, Clone)]
pub struct Problem {
    field: PeriodicMatrixField,
    symbol: DifferentialSymbol,
    alpha0: f64,
    alpha1: f64,
    bounds: FieldBounds,
}

impl Problem {
    pub fn new(field: PeriodicMatrixField, symbol: DifferentialSymbol) -> Result<Self> {
        Self::with_sphere_samples(field, symbol, DEFAULT_SPHERE_SAMPLES)
    }

    pub fn with_sphere_samples(
        field: PeriodicMatrixField,
        symbol: DifferentialSymbol,
        sphere_samples: usize,
    ) -> Result<Self> {
        if symbol.dim() != field.lattice().dim() {
            return Err(Error::Validation(format!(
                "dimension mismatch: symbol has d = {}, lattice has d = {}",
                symbol.dim(),
                field.lattice().dim()
            )));
        }
        if symbol.rows() != field.size() {
            return Err(Error::Validation(format!(
                "dimension mismatch: symbol has m = {}, field has m = {}",
                symbol.rows(),
                field.size()
            )));
        }
        let (alpha0, alpha1) = symbol.ellipticity_bounds(sphere_samples)?;
        if !symbol.check_rank(sphere_samples, DEFAULT_RANK_TOL * alpha1.sqrt()) {
            return Err(Error::DegenerateSymbol("b(theta) is rank deficient".into()));
        }
        let bounds = field.bounds()?;
        Ok(Problem {
            field,
            symbol,
            alpha0,
            alpha1,
            bounds,
        })
    }

    pub fn field(&self) -> &PeriodicMatrixField {
        &self.field
    }

    pub fn symbol(&self) -> &DifferentialSymbol {
        &self.symbol
    }

    pub fn lattice(&self) -> &Lattice {
        self.field.lattice()
    }

    pub fn dim(&self) -> usize {
        self.symbol.dim()
    }

    /// Order `p` of the symbol.
    pub fn order(&self) -> u32 {
        self.symbol.order()
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn bounds(&self) -> FieldBounds {
        self.bounds
    }

    /// `c_* = alpha_0 / |g^{-1}|_inf`, the lower bound of the form and of the germ.
    pub fn c_star(&self) -> f64 {
        self.alpha0 / self.bounds.norm_ginv
    }
}
