//! TOML configuration: a p.c.f. structure with its harmonic structure, a
//! carpet generator, and run settings.
//!
//! ```toml
//! preset = "sg2"            # or a [structure] table
//!
//! [structure]
//! name = "gasket"
//! boundary = [["0", "0"], ["1", "0"], ["0", "1"]]
//! maps = [
//!   { ratio = "1/2", fixed_point = ["0", "0"] },
//!   { linear = [["1/2", "0"], ["0", "1/2"]], shift = ["1/2", "0"] },
//! ]
//!
//! [harmonic]
//! d = [[-2, 1, 1], [1, -2, 1], [1, 1, -2]]
//! r = "3/5"                 # one value for all maps, a list, or omitted to solve
//!
//! [measure]
//! weights = ["1/3", "1/3", "1/3"]
//!
//! [basis]
//! boundary = [[1, 0, 0], [0, 1, 0]]
//!
//! [run]
//! levels = [4, 6, 8]
//! epsilons = [0.01]
//!
//! [carpet]
//! preset = "carpet-2d"      # or dim, l and cells / pattern
//! ```

use serde::Deserialize;

use crate::carpet::{carpet_by_name, CarpetGenerator};
use crate::error::{Error, Result};
use crate::harmonic::{solve_renormalization_scalar, HarmonicStructure};
use crate::linalg::Matrix;
use crate::scalar::{parse_rational, Rational};
use crate::structure::presets::{self, PcfPreset};
use crate::structure::{AffineMap, PcfStructure, SelfSimilarWeights};

/// A rational written as a string (`"3/5"`, `"0.25"`), an integer, or a float
/// (read through its decimal form).
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum RationalValue {
    Int(i64),
    Float(f64),
    Text(String),
}

impl RationalValue {
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            Self::Int(i) => Ok(Rational::from_integer((*i).into())),
            Self::Float(f) => parse_rational(&f.to_string()),
            Self::Text(s) => parse_rational(s),
        }
    }
}

fn rationals(v: &[RationalValue]) -> Result<Vec<Rational>> {
    v.iter().map(RationalValue::to_rational).collect()
}

fn rational_rows(v: &[Vec<RationalValue>]) -> Result<Vec<Vec<Rational>>> {
    v.iter().map(|r| rationals(r)).collect()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSection {
    pub ratio: Option<RationalValue>,
    pub fixed_point: Option<Vec<RationalValue>>,
    pub linear: Option<Vec<Vec<RationalValue>>>,
    pub shift: Option<Vec<RationalValue>>,
}

impl MapSection {
    fn build(&self, index: usize) -> Result<AffineMap> {
        match (&self.ratio, &self.fixed_point, &self.linear, &self.shift) {
            (Some(r), Some(p), None, None) => Ok(AffineMap::similarity(r.to_rational()?, &rationals(p)?)),
            (Some(r), None, None, Some(b)) => Ok(AffineMap::scaled_shift(r.to_rational()?, rationals(b)?)),
            (None, None, Some(a), Some(b)) => {
                Ok(AffineMap { linear: rational_rows(a)?, shift: rationals(b)? })
            }
            _ => Err(Error::Parse(format!(
                "map {index}: give ratio with fixed_point, ratio with shift, or linear with shift"
            ))),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureSection {
    pub name: Option<String>,
    pub boundary: Vec<Vec<RationalValue>>,
    pub maps: Vec<MapSection>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum WeightSpec {
    Uniform(RationalValue),
    PerMap(Vec<RationalValue>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicSection {
    pub d: Vec<Vec<RationalValue>>,
    pub r: Option<WeightSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSection {
    pub weights: Vec<RationalValue>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSection {
    pub boundary: Vec<Vec<RationalValue>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub levels: Option<Vec<usize>>,
    pub epsilons: Option<Vec<f64>>,
    pub output: Option<String>,
    pub vertex_cap: Option<u64>,
    pub cg_tolerance: Option<f64>,
    pub cg_max_iterations: Option<usize>,
    pub threshold: Option<f64>,
    pub shrink: Option<Vec<u32>>,
}

impl RunSection {
    /// Checks `levels ≥ 1` and `epsilons ⊂ (0, 1)`.
    pub fn validate(&self) -> Result<()> {
        if let Some(levels) = &self.levels {
            if levels.is_empty() || levels.contains(&0) {
                return Err(Error::Invalid("run.levels must be a nonempty list of levels >= 1".into()));
            }
        }
        if let Some(eps) = &self.epsilons {
            if let Some(e) = eps.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
                return Err(Error::Invalid(format!("epsilon {e} is outside (0, 1)")));
            }
        }
        if let Some(t) = self.cg_tolerance {
            if !(t > 0.0) {
                return Err(Error::Invalid(format!("cg_tolerance {t} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarpetSection {
    pub preset: Option<String>,
    pub name: Option<String>,
    pub dim: Option<usize>,
    pub l: Option<usize>,
    pub cells: Option<Vec<Vec<usize>>>,
    /// 2D only: rows of `#`/`.` from top to bottom.
    pub pattern: Option<Vec<String>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub preset: Option<String>,
    pub structure: Option<StructureSection>,
    pub harmonic: Option<HarmonicSection>,
    pub measure: Option<MeasureSection>,
    pub basis: Option<BasisSection>,
    #[serde(default)]
    pub run: RunSection,
    pub carpet: Option<CarpetSection>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.run.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// The p.c.f. setup described by the file. A `[harmonic]`, `[measure]`
    /// or `[basis]` table overrides the corresponding part of a preset.
    pub fn pcf(&self) -> Result<PcfPreset> {
        let base = match (&self.preset, &self.structure) {
            (Some(_), Some(_)) => return Err(Error::Parse("give either preset or [structure], not both".into())),
            (Some(name), None) => Some(presets::by_name(name)?),
            (None, Some(_)) => None,
            (None, None) => return Err(Error::Parse("config names no structure (preset or [structure])".into())),
        };
        let structure = match (&self.structure, &base) {
            (Some(s), _) => {
                let maps = s.maps.iter().enumerate().map(|(i, m)| m.build(i)).collect::<Result<Vec<_>>>()?;
                PcfStructure::new(s.name.clone().unwrap_or_else(|| "custom".into()), maps, rational_rows(&s.boundary)?)?
            }
            (None, Some(b)) => b.structure.clone(),
            (None, None) => unreachable!(),
        };
        let n_maps = structure.symbol_count();
        let n0 = structure.boundary_count();
        let harmonic = match (&self.harmonic, &base) {
            (Some(h), _) => {
                let d = Matrix::from_rows(rational_rows(&h.d)?)?;
                let r = match &h.r {
                    Some(WeightSpec::Uniform(v)) => vec![v.to_rational()?; n_maps],
                    Some(WeightSpec::PerMap(v)) => rationals(v)?,
                    None => {
                        let sol = solve_renormalization_scalar(&structure, &d, 0.5, 1e-12, 200)?;
                        vec![sol.exact.ok_or_else(|| {
                            Error::Structure(format!(
                                "no exact rational r found (estimate {}); give r explicitly",
                                sol.estimate
                            ))
                        })?; n_maps]
                    }
                };
                HarmonicStructure::new(d, r)?
            }
            (None, Some(b)) => b.harmonic.clone(),
            (None, None) => return Err(Error::Parse("a custom [structure] needs a [harmonic] table".into())),
        };
        let weights = match (&self.measure, &base) {
            (Some(m), _) => SelfSimilarWeights::new(rationals(&m.weights)?)?,
            (None, Some(b)) => b.weights.clone(),
            (None, None) => SelfSimilarWeights::uniform(n_maps),
        };
        if weights.theta().len() != n_maps {
            return Err(Error::Invalid(format!("{} measure weights for {n_maps} maps", weights.theta().len())));
        }
        let basis = match &self.basis {
            Some(b) => rational_rows(&b.boundary)?,
            None => (0..n0 - 1)
                .map(|k| (0..n0).map(|i| Rational::from_integer(((i == k) as i64).into())).collect())
                .collect(),
        };
        if let Some(v) = basis.iter().find(|v| v.len() != n0) {
            return Err(Error::Invalid(format!("basis vector has {} entries, expected {n0}", v.len())));
        }
        Ok(PcfPreset { structure, harmonic, weights, basis })
    }

    pub fn carpet(&self) -> Result<CarpetGenerator> {
        let c = self.carpet.as_ref().ok_or_else(|| Error::Parse("config has no [carpet] table".into()))?;
        if let Some(p) = &c.preset {
            if c.cells.is_some() || c.pattern.is_some() {
                return Err(Error::Parse("give either carpet.preset or its cells, not both".into()));
            }
            return carpet_by_name(p);
        }
        let name = c.name.clone().unwrap_or_else(|| "custom".into());
        match (&c.cells, &c.pattern) {
            (Some(cells), None) => {
                let dim = c.dim.ok_or_else(|| Error::Parse("carpet.dim is required with cells".into()))?;
                let l = c.l.ok_or_else(|| Error::Parse("carpet.l is required with cells".into()))?;
                CarpetGenerator::new(name, dim, l, cells.clone())
            }
            (None, Some(rows)) => {
                let rows: Vec<&str> = rows.iter().map(String::as_str).collect();
                CarpetGenerator::from_pattern(name, &rows)
            }
            _ => Err(Error::Parse("carpet needs preset, cells, or pattern".into())),
        }
    }
}
