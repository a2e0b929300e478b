use std::path::Path;

use hihom::linalg::{c64, CMat, CVec};
use hihom::resolvent::{PlaneWaveSum, SpectralPoint};
use hihom::{DifferentialSymbol, Lattice, MultiIndex, PeriodicMatrixField, Problem};
use serde::Deserialize;

use crate::error::CliError;

/// A real number or a decimal string (used where the exact digits matter).
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Value(f64),
    Text(String),
}

impl Number {
    pub fn value(&self, what: &str) -> Result<f64, CliError> {
        match self {
            Number::Value(v) => Ok(*v),
            Number::Text(s) => s
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{what}: cannot parse '{s}' as a number"))),
        }
    }
}

/// A complex entry: either a bare real or `[re, im]`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(&self) -> num_complex::Complex64 {
        match self {
            Entry::Real(v) => c64(*v, 0.0),
            Entry::Complex([re, im]) => c64(*re, *im),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Basis vectors of the period lattice; defaults to the unit cube.
    #[serde(default)]
    pub lattice: Option<Vec<Vec<f64>>>,
    pub symbol: SymbolConfig,
    pub field: FieldConfig,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub zeta: Option<ZetaConfig>,
    #[serde(default)]
    pub metrics: Option<Vec<String>>,
    #[serde(default)]
    pub doubling: bool,
    #[serde(default)]
    pub input: Option<InputConfig>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<String>,
}

fn default_truncation() -> usize {
    8
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SymbolConfig {
    Preset {
        preset: String,
        dim: usize,
        #[serde(default = "one")]
        order: u32,
    },
    Explicit {
        dim: usize,
        rows: usize,
        cols: usize,
        terms: Vec<SymbolTerm>,
    },
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, Deserialize)]
pub struct SymbolTerm {
    pub alpha: Vec<u32>,
    pub matrix: Vec<Vec<Entry>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FieldConfig {
    Preset {
        preset: String,
        #[serde(default = "default_a")]
        a: f64,
        #[serde(default = "default_b")]
        b: f64,
    },
    Table {
        size: usize,
        coefficients: Vec<Coefficient>,
    },
}

fn default_a() -> f64 {
    2.0
}

fn default_b() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
pub struct Coefficient {
    pub z: Vec<i64>,
    pub matrix: Vec<Vec<Entry>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    pub k_resolution: Option<usize>,
    pub eps: Option<Vec<f64>>,
    pub phases: Option<Vec<f64>>,
    pub moduli: Option<Vec<f64>>,
    /// Epsilon at which the phase and modulus sweeps are taken.
    pub sector_eps: Option<f64>,
    /// Vertices of the band path in dual coordinates.
    pub k_path: Option<Vec<Vec<f64>>>,
    pub bands: Option<usize>,
    pub theta: Option<Vec<Vec<f64>>>,
    /// Threshold parameters as fractions of the packing radius.
    pub t: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub cell: Option<Number>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ZetaConfig {
    pub modulus: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct InputConfig {
    pub eps: f64,
    pub terms: Vec<InputTerm>,
    #[serde(default = "default_kinds")]
    pub kinds: Vec<String>,
}

fn default_kinds() -> Vec<String> {
    vec!["full".into(), "effective".into(), "corrector".into()]
}

#[derive(Debug, Clone, Deserialize)]
pub struct InputTerm {
    pub xi: Vec<f64>,
    pub amplitude: Vec<Entry>,
}

pub fn load(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn matrix(rows: &[Vec<Entry>], what: &str) -> Result<CMat, CliError> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(CliError::Config(format!("{what}: matrix must be a non-empty rectangular array")));
    }
    Ok(CMat::from_fn(r, c, |i, j| rows[i][j].value()))
}

impl Config {
    pub fn dim(&self) -> usize {
        match &self.symbol {
            SymbolConfig::Preset { dim, .. } | SymbolConfig::Explicit { dim, .. } => *dim,
        }
    }

    pub fn lattice(&self) -> Result<Lattice, CliError> {
        match &self.lattice {
            None => Ok(Lattice::cubic(self.dim())),
            Some(cols) => Ok(Lattice::from_columns(cols)?),
        }
    }

    pub fn symbol(&self) -> Result<DifferentialSymbol, CliError> {
        match &self.symbol {
            SymbolConfig::Preset { preset, dim, order } => match preset.as_str() {
                "grad" => Ok(DifferentialSymbol::gradient(*dim)),
                "Dp" => Ok(DifferentialSymbol::axis_powers(*dim, *order)),
                other => Err(CliError::Config(format!("unknown symbol preset '{other}' (expected grad or Dp)"))),
            },
            SymbolConfig::Explicit { dim, rows, cols, terms } => {
                let terms = terms
                    .iter()
                    .map(|t| Ok((MultiIndex::new(t.alpha.clone()), matrix(&t.matrix, "symbol term")?)))
                    .collect::<Result<Vec<_>, CliError>>()?;
                Ok(DifferentialSymbol::new(*dim, *rows, *cols, terms)?)
            }
        }
    }

    pub fn field(&self) -> Result<PeriodicMatrixField, CliError> {
        let lattice = self.lattice()?;
        match &self.field {
            FieldConfig::Preset { preset, a, b } => match preset.as_str() {
                "cosine1d" => {
                    if lattice.dim() != 1 {
                        return Err(CliError::Config(format!(
                            "dimension mismatch: cosine1d needs d = 1, lattice has d = {}",
                            lattice.dim()
                        )));
                    }
                    Ok(PeriodicMatrixField::cosine(lattice, 1, *a, *b)?)
                }
                "laminate2d" => {
                    if lattice.dim() != 2 {
                        return Err(CliError::Config(format!(
                            "dimension mismatch: laminate2d needs d = 2, lattice has d = {}",
                            lattice.dim()
                        )));
                    }
                    Ok(PeriodicMatrixField::cosine(lattice, 2, *a, *b)?)
                }
                other => Err(CliError::Config(format!(
                    "unknown field preset '{other}' (expected cosine1d or laminate2d)"
                ))),
            },
            FieldConfig::Table { size, coefficients } => {
                let mut entries = Vec::with_capacity(coefficients.len());
                for c in coefficients {
                    let m = matrix(&c.matrix, "field coefficient")?;
                    if m.nrows() != *size || m.ncols() != *size {
                        return Err(CliError::Config(format!(
                            "dimension mismatch: coefficient at z = {:?} is {}x{}, field size m = {size}",
                            c.z,
                            m.nrows(),
                            m.ncols()
                        )));
                    }
                    entries.push((c.z.clone(), m));
                }
                Ok(PeriodicMatrixField::from_coefficients(lattice, *size, entries)?)
            }
        }
    }

    pub fn problem(&self) -> Result<Problem, CliError> {
        let symbol = self.symbol()?;
        let field = self.field()?;
        Ok(Problem::new(field, symbol)?)
    }

    pub fn cell_tol(&self) -> Result<f64, CliError> {
        let tol = match &self.tolerances.cell {
            Some(n) => n.value("tolerances.cell")?,
            None => hihom::cell::DEFAULT_CELL_TOL,
        };
        if tol > 0.0 && tol < 1.0 {
            Ok(tol)
        } else {
            Err(CliError::Config(format!("tolerances.cell must lie in (0, 1), got {tol}")))
        }
    }

    pub fn zeta(&self) -> Result<SpectralPoint, CliError> {
        match &self.zeta {
            None => Ok(SpectralPoint::minus_one()),
            Some(z) => Ok(SpectralPoint::new(z.modulus, z.phase)?),
        }
    }

    pub fn k_resolution(&self) -> usize {
        self.grids.k_resolution.unwrap_or(hihom::experiments::DEFAULT_K_RESOLUTION)
    }

    pub fn input(&self) -> Result<(f64, PlaneWaveSum, Vec<String>), CliError> {
        let Some(input) = &self.input else {
            return Err(CliError::Config("solve needs an 'input' section".into()));
        };
        let terms = input
            .terms
            .iter()
            .map(|t| (t.xi.clone(), CVec::from_iterator(t.amplitude.len(), t.amplitude.iter().map(Entry::value))))
            .collect();
        Ok((input.eps, PlaneWaveSum::new(terms)?, input.kinds.clone()))
    }
}

/// Serializable complex matrix as nested `[re, im]` pairs.
pub fn matrix_json(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn vector_json(v: &CVec) -> Vec<[f64; 2]> {
    v.iter().map(|c| [c.re, c.im]).collect()
}

