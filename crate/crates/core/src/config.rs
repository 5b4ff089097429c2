//! Plain-text (TOML) form of a model on a box.
//!
//! ```toml
//! dim = 1
//! half_side = 500      # or `side = 1000` for boxes that are not centred cubes
//! variant = "diagonal" # rank-one-site | polymer-block | matrix-valued | dimer | diagonal
//! rank = 2
//! hopping = 0.0
//! seed = 7
//!
//! [disorder]
//! kind = "uniform"     # or "piecewise-linear" with knots = [[x, y], ...]
//! a = 0.0
//! b = 1.0
//! ```

use serde::{Deserialize, Serialize};

use crate::disorder::DisorderLaw;
use crate::error::{Error, Result};
use crate::lattice::{LatticeBox, ModelSpec, Variant};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawDisorder {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub knots: Option<Vec<(f64, f64)>>,
}

/// Model keys as they appear in a config file, before validation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawModel {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_side: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hopping: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disorder: Option<RawDisorder>,
}

/// A validated model, box and campaign seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub spec: ModelSpec,
    pub lattice: LatticeBox,
    pub seed: u64,
}

fn required<T: Copy>(value: Option<T>, field: &str) -> Result<T> {
    value.ok_or_else(|| Error::config(field, "missing"))
}

fn parse_variant(name: &str, rank: Option<usize>, dim: usize) -> Result<Variant> {
    let need_rank = || required(rank, "rank");
    let variant = match name {
        "rank-one-site" => Variant::RankOneSite,
        "dimer" => Variant::Dimer,
        "matrix-valued" => Variant::MatrixValued { m: need_rank()? },
        "diagonal" => Variant::Diagonal { m: need_rank()? },
        "polymer-block" => {
            let r = need_rank()?;
            let k = (1..=r)
                .find(|k| k.pow(dim as u32) >= r)
                .filter(|k| k.pow(dim as u32) == r)
                .ok_or_else(|| {
                    Error::config(
                        "rank",
                        format!("{r} is not a perfect power of dimension {dim}"),
                    )
                })?;
            Variant::PolymerBlock { k }
        }
        other => {
            return Err(Error::config(
                "variant",
                format!(
                    "unknown variant `{other}` (expected rank-one-site, polymer-block, \
                     matrix-valued, dimer or diagonal)"
                ),
            ))
        }
    };
    if let Some(r) = rank {
        if r != variant.rank(dim) {
            return Err(Error::config(
                "rank",
                format!(
                    "{name} in dimension {dim} has rank {}, not {r}",
                    variant.rank(dim)
                ),
            ));
        }
    }
    Ok(variant)
}

fn parse_disorder(raw: Option<&RawDisorder>) -> Result<DisorderLaw> {
    let raw = raw.ok_or_else(|| Error::config("disorder", "missing section"))?;
    let kind = raw.kind.as_deref().unwrap_or("uniform");
    match kind {
        "uniform" => {
            let a = required(raw.a, "disorder.a")?;
            let b = required(raw.b, "disorder.b")?;
            DisorderLaw::uniform(a, b).map_err(|e| Error::config("disorder.b", e.to_string()))
        }
        "piecewise-linear" => {
            let knots = raw
                .knots
                .clone()
                .ok_or_else(|| Error::config("disorder.knots", "missing"))?;
            DisorderLaw::piecewise_linear(knots)
                .map_err(|e| Error::config("disorder.knots", e.to_string()))
        }
        other => Err(Error::config(
            "disorder.kind",
            format!("unknown kind `{other}` (expected uniform or piecewise-linear)"),
        )),
    }
}

impl ModelConfig {
    pub fn from_raw(raw: &RawModel) -> Result<Self> {
        let dim = required(raw.dim, "dim")?;
        if !(1..=3).contains(&dim) {
            return Err(Error::config("dim", format!("{dim} not in 1..=3")));
        }
        let variant_name = raw
            .variant
            .as_deref()
            .ok_or_else(|| Error::config("variant", "missing"))?;
        let variant = parse_variant(variant_name, raw.rank, dim)?;
        let hopping = required(raw.hopping, "hopping")?;
        let disorder = parse_disorder(raw.disorder.as_ref())?;
        let spec = ModelSpec::new(variant, dim, hopping, disorder)
            .map_err(|e| Error::config("variant", e.to_string()))?;
        let lattice = match (raw.side, raw.half_side) {
            (Some(side), _) => LatticeBox::with_side(dim, side),
            (None, Some(l)) => LatticeBox::cube(dim, l),
            (None, None) => return Err(Error::config("half_side", "missing")),
        }
        .map_err(|e| Error::config("half_side", e.to_string()))?;
        let field = if raw.side.is_some() {
            "side"
        } else {
            "half_side"
        };
        spec.check_box(&lattice)
            .map_err(|e| Error::config(field, e.to_string()))?;
        Ok(ModelConfig {
            spec,
            lattice,
            seed: raw.seed.unwrap_or(DEFAULT_SEED),
        })
    }

    pub fn to_raw(&self) -> RawModel {
        let (kind, a, b, knots) = match &self.spec.disorder {
            DisorderLaw::Uniform { a, b } => ("uniform", Some(*a), Some(*b), None),
            DisorderLaw::PiecewiseLinear { knots } => {
                ("piecewise-linear", None, None, Some(knots.clone()))
            }
        };
        let (half_side, side) = match self.lattice.half_side() {
            Some(l) => (Some(l), None),
            None => (None, Some(self.lattice.side())),
        };
        RawModel {
            dim: Some(self.lattice.dim()),
            half_side,
            side,
            variant: Some(self.spec.variant.name().to_string()),
            rank: Some(self.spec.rank),
            hopping: Some(self.spec.hopping),
            seed: Some(self.seed),
            disorder: Some(RawDisorder {
                kind: Some(kind.to_string()),
                a,
                b,
                knots,
            }),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawModel =
            toml::from_str(text).map_err(|e| Error::config("<file>", e.to_string()))?;
        Self::from_raw(&raw)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&self.to_raw()).expect("model config is always representable as TOML")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
dim = 1
half_side = 500
variant = "diagonal"
rank = 2
hopping = 0.0
seed = 42

[disorder]
kind = "uniform"
a = 0.0
b = 1.0
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ModelConfig::from_toml_str(EXAMPLE).unwrap();
        assert_eq!(cfg.spec.variant, Variant::Diagonal { m: 2 });
        assert_eq!(cfg.lattice.site_count(), 1001);
        assert_eq!(cfg.seed, 42);
        let again = ModelConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn missing_bound_names_the_field() {
        let text = EXAMPLE.replace("b = 1.0", "");
        match ModelConfig::from_toml_str(&text) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "disorder.b"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn polymer_rank_gives_block_side() {
        let text = r#"
dim = 2
side = 6
variant = "polymer-block"
rank = 9
hopping = 1.0
[disorder]
a = -1.0
b = 1.0
"#;
        let cfg = ModelConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.spec.variant, Variant::PolymerBlock { k: 3 });
        assert_eq!(cfg.seed, DEFAULT_SEED);
        let bad = text.replace("rank = 9", "rank = 8");
        assert!(ModelConfig::from_toml_str(&bad).is_err());
    }

    #[test]
    fn dimer_needs_even_side() {
        let text = r#"
dim = 1
half_side = 10
variant = "dimer"
hopping = 1.0
[disorder]
a = 0.0
b = 1.0
"#;
        match ModelConfig::from_toml_str(text) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "half_side"),
            other => panic!("unexpected {other:?}"),
        }
        let ok = text.replace("half_side = 10", "side = 20");
        assert_eq!(ModelConfig::from_toml_str(&ok).unwrap().lattice.side(), 20);
    }
}
