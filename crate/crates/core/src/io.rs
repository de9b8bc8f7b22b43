//! JSON file formats for shapes, states and hypergraphs.
//!
//! Units are labelled from 1 in every file. A state file holds a shape and
//! either a complex `matrix` (rows of `[re, im]` pairs) or a `probabilities`
//! vector for classical shapes:
//!
//! ```json
//! {"shape": {"sizes": [2, 2], "kinds": "quantum"},
//!  "matrix": [[[0.5, 0], [0, 0], [0, 0], [0.5, 0]], ...]}
//! ```
//!
//! A hypergraph file gives `N` and either `generators` (maximal sets, closed
//! downward on load) or the full downward-closed `sets` list.

use std::path::Path;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hierarchy::Hypergraph;
use crate::linalg::{c, CMatrix};
use crate::shape::{SystemShape, UnitSet};
use crate::state::DensityMatrix;

#[derive(Serialize, Deserialize)]
pub struct StateFile {
    pub shape: SystemShape,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
pub struct HypergraphFile {
    #[serde(rename = "N")]
    pub n_units: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sets: Option<Vec<Vec<usize>>>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, origin: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{origin}: {e}")))
}

impl StateFile {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        if rho.shape().is_classical() {
            return StateFile {
                shape: rho.shape().clone(),
                matrix: None,
                probabilities: Some(rho.diagonal()),
            };
        }
        let m = rho.matrix();
        let rows = (0..m.nrows())
            .map(|r| (0..m.ncols()).map(|col| [m[(r, col)].re, m[(r, col)].im]).collect())
            .collect();
        StateFile {
            shape: rho.shape().clone(),
            matrix: Some(rows),
            probabilities: None,
        }
    }

    pub fn into_state(self) -> Result<DensityMatrix> {
        match (self.matrix, self.probabilities) {
            (Some(rows), None) => {
                let d = rows.len();
                if let Some(bad) = rows.iter().position(|r| r.len() != d) {
                    return Err(Error::Parse(format!("matrix row {} has {} entries, expected {d}", bad + 1, rows[bad].len())));
                }
                let m = CMatrix::from_fn(d, d, |r, col| c(rows[r][col][0], rows[r][col][1]));
                DensityMatrix::new(self.shape, m)
            }
            (None, Some(p)) => DensityMatrix::from_probabilities(self.shape, &p),
            _ => Err(Error::Parse("state needs exactly one of \"matrix\" or \"probabilities\"".into())),
        }
    }
}

fn to_unit_sets(n_units: usize, lists: &[Vec<usize>]) -> Result<Vec<UnitSet>> {
    lists
        .iter()
        .map(|l| {
            l.iter()
                .map(|&i| {
                    if i == 0 || i > n_units {
                        Err(Error::InvalidHypergraph(format!("unit label {i} outside 1..={n_units}")))
                    } else {
                        Ok(i - 1)
                    }
                })
                .collect::<Result<Vec<usize>>>()
                .map(UnitSet::from_indices)
        })
        .collect()
}

impl HypergraphFile {
    pub fn from_hypergraph(u: &Hypergraph) -> Self {
        HypergraphFile {
            n_units: u.n_units(),
            generators: Some(u.maximal_sets().iter().map(|s| s.iter().map(|i| i + 1).collect()).collect()),
            sets: None,
        }
    }

    pub fn into_hypergraph(self) -> Result<Hypergraph> {
        match (self.generators, self.sets) {
            (Some(g), None) => Hypergraph::from_generators(self.n_units, &to_unit_sets(self.n_units, &g)?),
            (None, Some(s)) => Hypergraph::new(self.n_units, &to_unit_sets(self.n_units, &s)?, false),
            _ => Err(Error::Parse("hypergraph needs exactly one of \"generators\" or \"sets\"".into())),
        }
    }
}

pub fn state_from_json(text: &str) -> Result<DensityMatrix> {
    parse::<StateFile>(text, "state")?.into_state()
}

pub fn state_to_json(rho: &DensityMatrix) -> String {
    serde_json::to_string_pretty(&StateFile::from_state(rho)).expect("state serializes")
}

pub fn read_state(path: &Path) -> Result<DensityMatrix> {
    parse::<StateFile>(&read(path)?, &path.display().to_string())?.into_state()
}

pub fn hypergraph_from_json(text: &str) -> Result<Hypergraph> {
    parse::<HypergraphFile>(text, "hypergraph")?.into_hypergraph()
}

pub fn read_hypergraph(path: &Path) -> Result<Hypergraph> {
    parse::<HypergraphFile>(&read(path)?, &path.display().to_string())?.into_hypergraph()
}

pub fn shape_from_json(text: &str) -> Result<SystemShape> {
    parse(text, "shape")
}

pub fn read_shape(path: &Path) -> Result<SystemShape> {
    parse(&read(path)?, &path.display().to_string())
}

/// `serialize_with` adapter writing a state in the file format.
pub fn serialize_state<S: Serializer>(rho: &DensityMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    StateFile::from_state(rho).serialize(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::ghz_state;

    #[test]
    fn state_round_trip() {
        let rho = ghz_state(3);
        let back = state_from_json(&state_to_json(&rho)).unwrap();
        assert_eq!(back, rho);
    }

    #[test]
    fn classical_state_uses_probabilities() {
        let rho = DensityMatrix::from_probabilities(SystemShape::bits(2), &[0.5, 0.0, 0.0, 0.5]).unwrap();
        let text = state_to_json(&rho);
        assert!(text.contains("probabilities"));
        assert_eq!(state_from_json(&text).unwrap(), rho);
    }

    #[test]
    fn hypergraph_generators_are_one_based() {
        let u = hypergraph_from_json(r#"{"N": 3, "generators": [[1, 2], [2, 3], [1, 3]]}"#).unwrap();
        assert_eq!(u, Hypergraph::k_local(3, 2).unwrap());
        assert!(hypergraph_from_json(r#"{"N": 3, "generators": [[0, 1]]}"#).is_err());
        let file = HypergraphFile::from_hypergraph(&u);
        assert_eq!(file.into_hypergraph().unwrap(), u);
    }

    #[test]
    fn bad_inputs_are_reported() {
        assert!(matches!(state_from_json("{"), Err(Error::Parse(_))));
        let not_psd = r#"{"shape": {"sizes": [2], "kinds": "quantum"}, "matrix": [[[1.5,0],[0,0]],[[0,0],[-0.5,0]]]}"#;
        assert!(matches!(state_from_json(not_psd), Err(Error::NotPositive(_))));
        assert!(shape_from_json(r#"{"sizes": [2, 0], "kinds": "classical"}"#).is_err());
        assert!(shape_from_json(r#"{"sizes": [2, 3], "kinds": ["classical", "quantum"]}"#).is_ok());
    }
}
