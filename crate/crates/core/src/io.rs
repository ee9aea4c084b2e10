//! JSON forms of quivers and seeds, and the built-in presets.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::laurent::LaurentPoly;
use crate::quiver::{Quiver, QuiverError};
use crate::seed::{LabelledSeed, SeedError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("frozen vertex {0} out of range")]
    FrozenIndex(usize),
    #[error(transparent)]
    Quiver(#[from] QuiverError),
    #[error(transparent)]
    Seed(#[from] SeedError),
    #[error("cluster entry {index}: {message}")]
    Cluster { index: usize, message: String },
}

/// `{"n": 2, "b": [[0, 1], [-1, 0]], "frozen": [3]}`; frozen vertices are one-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuiverJson {
    pub n: usize,
    pub b: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub frozen: Vec<usize>,
}

/// A quiver with cluster strings over `x1..x{ambient}`; the ambient rank
/// defaults to the number of vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedJson {
    pub quiver: QuiverJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambient: Option<usize>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AnyJson {
    Seed(SeedJson),
    Quiver(QuiverJson),
}

impl QuiverJson {
    pub fn from_quiver(q: &Quiver) -> Self {
        QuiverJson { n: q.n(), b: q.rows(), frozen: q.frozen_vertices().iter().map(|v| v + 1).collect() }
    }

    pub fn to_quiver(&self) -> Result<Quiver, IoError> {
        if self.b.len() != self.n {
            return Err(QuiverError::Shape(self.b.len()).into());
        }
        let frozen = self
            .frozen
            .iter()
            .map(|&v| if v >= 1 && v <= self.n { Ok(v - 1) } else { Err(IoError::FrozenIndex(v)) })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Quiver::new(self.b.clone())?.with_frozen(&frozen)?)
    }
}

impl SeedJson {
    pub fn from_seed(s: &LabelledSeed) -> Self {
        SeedJson {
            quiver: QuiverJson::from_quiver(s.quiver()),
            cluster: Some(s.cluster().iter().map(|p| p.to_string()).collect()),
            ambient: Some(s.ambient()),
        }
    }

    pub fn to_seed(&self) -> Result<LabelledSeed, IoError> {
        let q = self.quiver.to_quiver()?;
        let Some(cluster) = &self.cluster else {
            return Ok(LabelledSeed::initial(q));
        };
        let m = self.ambient.unwrap_or(q.n());
        let cluster = cluster
            .iter()
            .enumerate()
            .map(|(index, s)| {
                LaurentPoly::parse(s, m).map_err(|e| IoError::Cluster { index: index + 1, message: e.to_string() })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LabelledSeed::new(q, cluster)?)
    }
}

/// Preset names, in the order they are listed.
pub const PRESETS: &[&str] = &["A1", "A2", "A3", "A1xA2", "A2tilde-noncyclic", "kronecker2", "markov3"];

/// Quivers given by arrow lists `(tail, head, multiplicity)`, one-based.
pub fn preset(name: &str) -> Option<Quiver> {
    let (n, arrows): (usize, &[(usize, usize, i64)]) = match name {
        "A1" => (1, &[]),
        "A2" => (2, &[(1, 2, 1)]),
        "A3" | "A3-linear" => (3, &[(1, 2, 1), (2, 3, 1)]),
        "A1xA2" => (3, &[(2, 3, 1)]),
        "A2tilde-noncyclic" | "A2tilde" => (3, &[(1, 2, 1), (1, 3, 1), (2, 3, 1)]),
        "kronecker2" | "kronecker" => (2, &[(1, 2, 2)]),
        "markov3" | "markov" => (3, &[(1, 2, 3), (2, 3, 3), (3, 1, 3)]),
        _ => return None,
    };
    let zero_based: Vec<_> = arrows.iter().map(|&(t, h, m)| (t - 1, h - 1, m)).collect();
    Some(Quiver::from_arrows(n, &zero_based).expect("preset quivers are valid"))
}

pub fn parse_json(text: &str) -> Result<LabelledSeed, IoError> {
    match serde_json::from_str::<AnyJson>(text)? {
        AnyJson::Seed(s) => s.to_seed(),
        AnyJson::Quiver(q) => Ok(LabelledSeed::initial(q.to_quiver()?)),
    }
}

/// A preset name, or a path to a quiver or seed JSON file.
pub fn load(source: &str) -> Result<LabelledSeed, IoError> {
    if let Some(q) = preset(source) {
        return Ok(LabelledSeed::initial(q));
    }
    let path = Path::new(source);
    if !path.exists() {
        return Err(IoError::UnknownPreset(source.to_string()));
    }
    let text = std::fs::read_to_string(path).map_err(|e| IoError::Read { path: source.to_string(), source: e })?;
    parse_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        for name in PRESETS {
            let q = preset(name).unwrap();
            assert_eq!(QuiverJson::from_quiver(&q).to_quiver().unwrap(), q);
        }
        assert_eq!(preset("markov3").unwrap().max_multiplicity(), 3);
        assert!(preset("E9").is_none());
    }

    #[test]
    fn json_round_trip() {
        let s = LabelledSeed::initial(preset("A2").unwrap().principal_coefficients()).mutate(0).unwrap();
        let text = serde_json::to_string(&SeedJson::from_seed(&s)).unwrap();
        assert_eq!(parse_json(&text).unwrap(), s);
        let q = parse_json(r#"{"n": 2, "b": [[0, 1], [-1, 0]]}"#).unwrap();
        assert_eq!(q, LabelledSeed::initial(preset("A2").unwrap()));
    }

    #[test]
    fn json_errors() {
        assert!(matches!(parse_json(r#"{"n": 2, "b": [[0, 1], [1, 0]]}"#), Err(IoError::Quiver(_))));
        assert!(matches!(parse_json(r#"{"n": 2, "b": [[0, 1], [-1, 0]], "frozen": [5]}"#), Err(IoError::FrozenIndex(5))));
        let bad = r#"{"quiver": {"n": 1, "b": [[0]]}, "cluster": ["x7"]}"#;
        assert!(matches!(parse_json(bad), Err(IoError::Cluster { index: 1, .. })));
        assert!(matches!(load("no-such-preset"), Err(IoError::UnknownPreset(_))));
    }
}
