//! JSON bundles: a constructed set together with everything needed to
//! rebuild or re-verify it.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::example36::Example36;
use crate::gf::Field;
use crate::model::ModelManifest;
use crate::mps::MpsFrame;
use crate::pg::{PointSet, ProjSpace};

/// A point set by field descriptor, dimension and ranks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetRecord {
    pub field: String,
    pub dim: usize,
    pub ranks: Vec<u64>,
}

impl SetRecord {
    pub fn from_set(set: &PointSet) -> Self {
        SetRecord {
            field: set.space().field().descriptor(),
            dim: set.space().dim(),
            ranks: set.ranks().to_vec(),
        }
    }

    pub fn to_set(&self) -> Result<PointSet> {
        let field = Arc::new(Field::from_descriptor(&self.field)?);
        PointSet::new(ProjSpace::new(field, self.dim), self.ranks.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BundleKind {
    Example36,
    Mps,
}

/// `sets` always holds `b`, the blocking set of the represented space, and
/// `bbar`; example bundles add `btilde`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub kind: BundleKind,
    pub config: serde_json::Value,
    pub model: ModelManifest,
    pub frame: serde_json::Value,
    pub sets: BTreeMap<String, SetRecord>,
}

/// Ranks describing a cone frame.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MpsFrameManifest {
    pub x: u64,
    pub x_pg: u64,
    pub s: usize,
    pub omega: Vec<u64>,
    pub theta: Vec<u64>,
    /// Generator rows of `Gamma'`.
    pub gamma_prime: Vec<Vec<u32>>,
}

impl MpsFrameManifest {
    pub fn of(frame: &MpsFrame) -> Self {
        let amb = frame.ambient();
        MpsFrameManifest {
            x: frame.x_index(),
            x_pg: frame.model().pg().rank(frame.x_point()),
            s: frame.s(),
            omega: amb.point_ranks_of(frame.omega()),
            theta: amb.point_ranks_of(frame.theta()),
            gamma_prime: frame.gamma_prime().rows().to_vec(),
        }
    }
}

impl Bundle {
    pub fn from_example(ex: &Example36) -> Result<Self> {
        let mut sets = BTreeMap::new();
        sets.insert("b".to_string(), SetRecord::from_set(&ex.b));
        sets.insert("bbar".to_string(), SetRecord::from_set(&ex.bbar));
        sets.insert("btilde".to_string(), SetRecord::from_set(&ex.btilde));
        Ok(Bundle {
            kind: BundleKind::Example36,
            config: serde_json::json!({ "q": ex.frame.q, "seed": ex.frame.seed }),
            model: ex.frame.model.manifest(),
            frame: serde_json::to_value(ex.manifest())?,
            sets,
        })
    }

    pub fn from_mps(
        frame: &MpsFrame,
        config: serde_json::Value,
        bbar: &PointSet,
        b: &PointSet,
    ) -> Result<Self> {
        let mut sets = BTreeMap::new();
        sets.insert("b".to_string(), SetRecord::from_set(b));
        sets.insert("bbar".to_string(), SetRecord::from_set(bbar));
        Ok(Bundle {
            kind: BundleKind::Mps,
            config,
            model: frame.model().manifest(),
            frame: serde_json::to_value(MpsFrameManifest::of(frame))?,
            sets,
        })
    }

    pub fn set(&self, name: &str) -> Result<PointSet> {
        self.sets
            .get(name)
            .ok_or_else(|| Error::Parse(format!("bundle has no set {name:?}")))?
            .to_set()
    }

    /// `q` and `seed` of an example bundle.
    pub fn example_params(&self) -> Result<(u32, u64)> {
        if self.kind != BundleKind::Example36 {
            return Err(Error::Precondition("not an example bundle".into()));
        }
        let get = |k: &str| {
            self.config
                .get(k)
                .and_then(serde_json::Value::as_u64)
                .ok_or_else(|| Error::Parse(format!("bundle config lacks {k:?}")))
        };
        let q = u32::try_from(get("q")?).map_err(|_| Error::Parse("q out of range".into()))?;
        Ok((q, get("seed")?))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_record_round_trip() {
        let space = ProjSpace::new(Arc::new(Field::new(3, 2, None).unwrap()), 2);
        let set = PointSet::new(space, vec![4, 9, 80]).unwrap();
        let rec = SetRecord::from_set(&set);
        assert_eq!(rec.to_set().unwrap(), set);
        let bad = SetRecord {
            field: "2 1 1 1".into(),
            dim: 2,
            ranks: vec![7],
        };
        assert!(bad.to_set().is_err());
    }
}
