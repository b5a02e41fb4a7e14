//! Generators for lower-bound and special-class configurations.
//!
//! Every generator returns a [`GeneratedInstance`]: the family itself plus the
//! quantities the construction guarantees, which [`GeneratedInstance::check`]
//! recomputes with the counting module.

mod planar;
mod random;
mod space;
mod special;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use serde_json::{json, Value};

use crate::bounds::ExponentTuple;
use crate::counting::{count_flags_dp, count_to_f64};
use crate::error::{Error, Result};
use crate::family::LayeredFamily;

pub use planar::{elekes_grid_2d, flag_lower_bound_construction, lift_to_flats, PlaneFrame};
pub use random::random_nested_family;
pub use space::{disjoint_copies, disjoint_copies_of, grid_construction_3d, parallel_bundle_3d};
pub use special::{
    legendrian_family, legendrian_instance, lightlike_family, lightlike_instance, pythagorean_directions,
};

/// A guaranteed quantity: either its exact value or a lower bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Prediction {
    Exact(BigUint),
    AtLeast(BigUint),
}

impl Prediction {
    pub fn exact(v: u64) -> Self {
        Prediction::Exact(BigUint::from(v))
    }

    pub fn value(&self) -> &BigUint {
        match self {
            Prediction::Exact(v) | Prediction::AtLeast(v) => v,
        }
    }

    pub fn holds_for(&self, actual: &BigUint) -> bool {
        match self {
            Prediction::Exact(v) => v == actual,
            Prediction::AtLeast(v) => actual >= v,
        }
    }

    fn scaled(&self, factor: u64) -> Self {
        match self {
            Prediction::Exact(v) => Prediction::Exact(v * factor),
            Prediction::AtLeast(v) => Prediction::AtLeast(v * factor),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Prediction::Exact(v) => json!({ "exact": v.to_string() }),
            Prediction::AtLeast(v) => json!({ "at_least": v.to_string() }),
        }
    }
}

impl fmt::Display for Prediction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prediction::Exact(v) => write!(f, "= {v}"),
            Prediction::AtLeast(v) => write!(f, ">= {v}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GeneratedInstance {
    pub family: LayeredFamily,
    /// Keys are `size_<level>` and `flags`.
    pub predicted: BTreeMap<String, Prediction>,
    /// Measured or recorded real-valued constants, e.g. `witness_constant`.
    pub constants: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredictionCheck {
    pub name: String,
    pub predicted: Prediction,
    pub actual: BigUint,
}

impl PredictionCheck {
    pub fn ok(&self) -> bool {
        self.predicted.holds_for(&self.actual)
    }
}

impl GeneratedInstance {
    pub(crate) fn new(family: LayeredFamily) -> Self {
        GeneratedInstance { family, predicted: BTreeMap::new(), constants: BTreeMap::new() }
    }

    pub(crate) fn predict(mut self, name: &str, p: Prediction) -> Self {
        self.predicted.insert(name.to_string(), p);
        self
    }

    pub(crate) fn predict_sizes(mut self) -> Self {
        for (i, s) in self.family.sizes().into_iter().enumerate() {
            self.predicted.insert(format!("size_{i}"), Prediction::exact(s as u64));
        }
        self
    }

    /// Recomputes every predicted quantity.
    pub fn check(&self) -> Result<Vec<PredictionCheck>> {
        let sizes = self.family.sizes();
        let mut flags = None;
        self.predicted
            .iter()
            .map(|(name, p)| {
                let actual = if name == "flags" {
                    flags.get_or_insert_with(|| count_flags_dp(&self.family)).clone()
                } else if let Some(i) = name.strip_prefix("size_").and_then(|s| s.parse::<usize>().ok()) {
                    BigUint::from(*sizes.get(i).ok_or(Error::InvalidIndex(i))?)
                } else {
                    return Err(Error::InvalidParameters(format!("unknown prediction {name:?}")));
                };
                Ok(PredictionCheck { name: name.clone(), predicted: p.clone(), actual })
            })
            .collect()
    }

    pub fn predicted_json(&self) -> Value {
        let predicted: serde_json::Map<String, Value> =
            self.predicted.iter().map(|(k, v)| (k.clone(), v.to_json())).collect();
        json!({ "predicted": predicted, "constants": self.constants })
    }

    /// `count / term` for a reference term, stored under `name`.
    pub fn record_constant(&mut self, name: &str, count: &BigUint, term: f64) {
        self.constants.insert(name.to_string(), count_to_f64(count) / term);
    }
}

/// A named construction with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum ConstructionSpec {
    Elekes2d { k: u64, l: u64 },
    LiftedElekes { k: u64, l: u64, d: usize, i: usize },
    FlagLowerBound { tuple: ExponentTuple, sizes: Vec<u64> },
    Grid3d { k: u64, l: u64 },
    ParallelBundle3d { n: u64, b: u64 },
    DisjointCopies { base: Box<ConstructionSpec>, copies: u64, separation: Option<i64> },
    Lightlike { directions: usize, per_direction: usize },
    Legendrian { grid_side: usize, lines_per_point: usize },
}

pub const CONSTRUCTION_KINDS: [&str; 8] = [
    "elekes-2d",
    "lifted-elekes",
    "flag-lower-bound",
    "grid-3d",
    "parallel-bundle-3d",
    "disjoint-copies",
    "lightlike",
    "legendrian",
];

fn param<'a>(params: &'a BTreeMap<String, String>, names: &[&str]) -> Result<&'a str> {
    names
        .iter()
        .find_map(|n| params.get(*n))
        .map(String::as_str)
        .ok_or_else(|| Error::InvalidParameters(format!("missing parameter {}", names[0])))
}

fn num<T: std::str::FromStr>(params: &BTreeMap<String, String>, names: &[&str]) -> Result<T> {
    let raw = param(params, names)?;
    raw.trim()
        .parse()
        .map_err(|_| Error::InvalidParameters(format!("parameter {} is not a valid number: {raw:?}", names[0])))
}

impl ConstructionSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ConstructionSpec::Elekes2d { .. } => "elekes-2d",
            ConstructionSpec::LiftedElekes { .. } => "lifted-elekes",
            ConstructionSpec::FlagLowerBound { .. } => "flag-lower-bound",
            ConstructionSpec::Grid3d { .. } => "grid-3d",
            ConstructionSpec::ParallelBundle3d { .. } => "parallel-bundle-3d",
            ConstructionSpec::DisjointCopies { .. } => "disjoint-copies",
            ConstructionSpec::Lightlike { .. } => "lightlike",
            ConstructionSpec::Legendrian { .. } => "legendrian",
        }
    }

    /// Parses a kind name and `key=value` parameters. `disjoint-copies` takes
    /// `base=<kind>`, `copies`, an optional `separation`, and the base parameters.
    pub fn from_params(kind: &str, params: &BTreeMap<String, String>) -> Result<Self> {
        Ok(match kind {
            "elekes-2d" => ConstructionSpec::Elekes2d { k: num(params, &["k"])?, l: num(params, &["l"])? },
            "lifted-elekes" => ConstructionSpec::LiftedElekes {
                k: num(params, &["k"])?,
                l: num(params, &["l"])?,
                d: num(params, &["d"])?,
                i: num(params, &["i"])?,
            },
            "flag-lower-bound" => {
                let tuple: ExponentTuple = param(params, &["tuple"])?.parse()?;
                let sizes = param(params, &["sizes"])?
                    .split(',')
                    .map(|s| s.trim().parse().map_err(|_| Error::InvalidParameters(format!("bad size {s:?}"))))
                    .collect::<Result<Vec<u64>>>()?;
                ConstructionSpec::FlagLowerBound { tuple, sizes }
            }
            "grid-3d" => ConstructionSpec::Grid3d { k: num(params, &["k"])?, l: num(params, &["l"])? },
            "parallel-bundle-3d" => {
                ConstructionSpec::ParallelBundle3d { n: num(params, &["N", "n"])?, b: num(params, &["b"])? }
            }
            "disjoint-copies" => {
                let base = param(params, &["base"])?;
                if base == "disjoint-copies" {
                    return Err(Error::InvalidParameters("disjoint-copies cannot nest".into()));
                }
                ConstructionSpec::DisjointCopies {
                    base: Box::new(Self::from_params(base, params)?),
                    copies: num(params, &["copies"])?,
                    separation: params.contains_key("separation").then(|| num(params, &["separation"])).transpose()?,
                }
            }
            "lightlike" => ConstructionSpec::Lightlike {
                directions: num(params, &["directions"])?,
                per_direction: num(params, &["per_direction", "lines_per_direction"])?,
            },
            "legendrian" => ConstructionSpec::Legendrian {
                grid_side: num(params, &["g", "grid_side"])?,
                lines_per_point: num(params, &["r", "lines_per_point"])?,
            },
            other => {
                return Err(Error::InvalidParameters(format!(
                    "unknown construction {other:?}; expected one of {}",
                    CONSTRUCTION_KINDS.join(", ")
                )))
            }
        })
    }

    pub fn build(&self, seed: u64) -> Result<GeneratedInstance> {
        match self {
            ConstructionSpec::Elekes2d { k, l } => elekes_grid_2d(*k, *l),
            ConstructionSpec::LiftedElekes { k, l, d, i } => lift_to_flats(&elekes_grid_2d(*k, *l)?, *d, *i, seed),
            ConstructionSpec::FlagLowerBound { tuple, sizes } => {
                flag_lower_bound_construction(tuple, sizes, tuple.len(), seed)
            }
            ConstructionSpec::Grid3d { k, l } => grid_construction_3d(*k, *l),
            ConstructionSpec::ParallelBundle3d { n, b } => parallel_bundle_3d(*n, *b),
            ConstructionSpec::DisjointCopies { base, copies, separation } => {
                disjoint_copies(base, *copies, *separation, seed)
            }
            ConstructionSpec::Lightlike { directions, per_direction } => {
                lightlike_instance(*directions, *per_direction, seed)
            }
            ConstructionSpec::Legendrian { grid_side, lines_per_point } => {
                legendrian_instance(*grid_side, *lines_per_point, seed)
            }
        }
    }

    /// Parameters as `key=value` pairs in a stable order.
    pub fn params(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        match self {
            ConstructionSpec::Elekes2d { k, l } | ConstructionSpec::Grid3d { k, l } => {
                put("k", k.to_string());
                put("l", l.to_string());
            }
            ConstructionSpec::LiftedElekes { k, l, d, i } => {
                put("k", k.to_string());
                put("l", l.to_string());
                put("d", d.to_string());
                put("i", i.to_string());
            }
            ConstructionSpec::FlagLowerBound { tuple, sizes } => {
                put("tuple", tuple.to_string());
                put("sizes", sizes.iter().map(u64::to_string).collect::<Vec<_>>().join(","));
            }
            ConstructionSpec::ParallelBundle3d { n, b } => {
                put("N", n.to_string());
                put("b", b.to_string());
            }
            ConstructionSpec::DisjointCopies { base, copies, separation } => {
                m = base.params();
                m.insert("base".into(), base.kind().into());
                m.insert("copies".into(), copies.to_string());
                if let Some(s) = separation {
                    m.insert("separation".into(), s.to_string());
                }
            }
            ConstructionSpec::Lightlike { directions, per_direction } => {
                put("directions", directions.to_string());
                put("per_direction", per_direction.to_string());
            }
            ConstructionSpec::Legendrian { grid_side, lines_per_point } => {
                put("g", grid_side.to_string());
                put("r", lines_per_point.to_string());
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn parse_and_roundtrip_params() {
        let spec = ConstructionSpec::from_params("parallel-bundle-3d", &params(&[("N", "12"), ("b", "3")])).unwrap();
        assert_eq!(spec, ConstructionSpec::ParallelBundle3d { n: 12, b: 3 });
        assert_eq!(ConstructionSpec::from_params(spec.kind(), &spec.params()).unwrap(), spec);

        let copies = ConstructionSpec::from_params(
            "disjoint-copies",
            &params(&[("base", "grid-3d"), ("k", "1"), ("l", "1"), ("copies", "3")]),
        )
        .unwrap();
        assert_eq!(ConstructionSpec::from_params(copies.kind(), &copies.params()).unwrap(), copies);

        let flb =
            ConstructionSpec::from_params("flag-lower-bound", &params(&[("tuple", "(0,1,0)"), ("sizes", "1,5,1")]))
                .unwrap();
        assert_eq!(ConstructionSpec::from_params(flb.kind(), &flb.params()).unwrap(), flb);
    }

    #[test]
    fn parse_errors() {
        assert!(ConstructionSpec::from_params("nope", &params(&[])).is_err());
        assert!(ConstructionSpec::from_params("grid-3d", &params(&[("k", "2")])).is_err());
        assert!(ConstructionSpec::from_params("grid-3d", &params(&[("k", "x"), ("l", "1")])).is_err());
    }

    #[test]
    fn built_predictions_hold() {
        let spec = ConstructionSpec::ParallelBundle3d { n: 4, b: 2 };
        let inst = spec.build(0).unwrap();
        let checks = inst.check().unwrap();
        assert!(checks.iter().all(PredictionCheck::ok));
        assert!(checks.iter().any(|c| c.name == "flags" && c.actual == BigUint::from(8u32)));
        let js = inst.predicted_json();
        assert_eq!(js["predicted"]["flags"]["exact"], "8");
    }
}
