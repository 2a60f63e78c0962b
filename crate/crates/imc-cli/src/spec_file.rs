//! Chain specification files.
//!
//! A chain spec is a TOML document with state labels, one local model for
//! the initial state and one per transition row. Each model is either an
//! explicit vertex list or a linear-vacuous mixture:
//!
//! ```toml
//! metadata = "binary example"
//! states = ["a", "b"]
//!
//! [initial]
//! linear_vacuous = { p = [0.5, 0.5], eps = 0.5 }
//!
//! [[rows]]
//! linear_vacuous = { p = [0.5, 0.5], eps = 0.5 }
//!
//! [[rows]]
//! vertices = [[0.75, 0.25], [0.25, 0.75]]
//! ```
//!
//! Parsing validates every vector against the mass-function invariants;
//! parse -> serialize -> parse is lossless.

use imc_core::{CredalSet64, ImpreciseMarkovChain64, LowerTransitionOperator64, MassFunction64};
use serde::{Deserialize, Serialize};

/// A linear-vacuous mixture specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearVacuousSpec {
    /// Center mass function.
    pub p: Vec<f64>,
    /// Mixing weight toward the vacuous model, in [0, 1].
    pub eps: f64,
}

/// One local model: exactly one of the two encodings must be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// Explicit vertex list.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<f64>>>,
    /// Linear-vacuous encoding.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linear_vacuous: Option<LinearVacuousSpec>,
}

/// The on-disk chain specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpecFile {
    /// Free-form description.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metadata: Option<String>,
    /// State labels; the dimension of every model.
    pub states: Vec<String>,
    /// Marginal model for the first state.
    pub initial: ModelSpec,
    /// Transition rows, one per state, in state order.
    pub rows: Vec<ModelSpec>,
}

impl ModelSpec {
    fn build(&self, dim: usize, what: &str) -> Result<CredalSet64, String> {
        match (&self.vertices, &self.linear_vacuous) {
            (Some(vertices), None) => {
                if vertices.is_empty() {
                    return Err(format!("{what}: vertex list is empty"));
                }
                let mass: Result<Vec<MassFunction64>, String> = vertices
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        if v.len() != dim {
                            return Err(format!(
                                "{what}: vertex {i} has {} entries, expected {dim}",
                                v.len()
                            ));
                        }
                        MassFunction64::new(v.clone())
                            .map_err(|e| format!("{what}: vertex {i}: {e}"))
                    })
                    .collect();
                CredalSet64::from_vertices(mass?).map_err(|e| format!("{what}: {e}"))
            }
            (None, Some(lv)) => {
                if lv.p.len() != dim {
                    return Err(format!(
                        "{what}: linear_vacuous p has {} entries, expected {dim}",
                        lv.p.len()
                    ));
                }
                let p = MassFunction64::new(lv.p.clone())
                    .map_err(|e| format!("{what}: linear_vacuous p: {e}"))?;
                CredalSet64::linear_vacuous(&p, lv.eps).map_err(|e| format!("{what}: {e}"))
            }
            (Some(_), Some(_)) => Err(format!(
                "{what}: give either `vertices` or `linear_vacuous`, not both"
            )),
            (None, None) => Err(format!(
                "{what}: missing model (need `vertices` or `linear_vacuous`)"
            )),
        }
    }
}

impl ChainSpecFile {
    /// Parses and validates a spec document.
    pub fn parse(text: &str) -> Result<Self, String> {
        let spec: ChainSpecFile =
            toml::from_str(text).map_err(|e| format!("spec parse error: {e}"))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Serializes back to TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    fn validate(&self) -> Result<(), String> {
        if self.states.is_empty() {
            return Err("spec: `states` must be nonempty".into());
        }
        if self.rows.len() != self.states.len() {
            return Err(format!(
                "spec: {} rows for {} states",
                self.rows.len(),
                self.states.len()
            ));
        }
        self.build_chain().map(|_| ())
    }

    /// Builds the in-memory chain.
    pub fn build_chain(&self) -> Result<ImpreciseMarkovChain64, String> {
        let dim = self.states.len();
        let initial = self.initial.build(dim, "initial")?;
        let rows: Result<Vec<CredalSet64>, String> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| r.build(dim, &format!("rows[{i}] (state {})", self.states[i])))
            .collect();
        let operator = LowerTransitionOperator64::new(rows?).map_err(|e| e.to_string())?;
        ImpreciseMarkovChain64::new(self.states.clone(), initial, operator)
            .map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BINARY: &str = r#"
metadata = "binary example, eps = 0.5"
states = ["a", "b"]

[initial]
linear_vacuous = { p = [0.5, 0.5], eps = 0.5 }

[[rows]]
linear_vacuous = { p = [0.5, 0.5], eps = 0.5 }

[[rows]]
linear_vacuous = { p = [0.5, 0.5], eps = 0.5 }
"#;

    #[test]
    fn parse_build_and_round_trip() {
        let spec = ChainSpecFile::parse(BINARY).unwrap();
        let chain = spec.build_chain().unwrap();
        assert_eq!(chain.states(), ["a", "b"]);
        let again = ChainSpecFile::parse(&spec.to_toml()).unwrap();
        assert_eq!(spec, again);
    }

    #[test]
    fn rejects_broken_mass_function() {
        let bad = r#"
states = ["a", "b"]
[initial]
vertices = [[0.5, 0.4]]
[[rows]]
vertices = [[0.5, 0.5]]
[[rows]]
vertices = [[0.5, 0.5]]
"#;
        let err = ChainSpecFile::parse(bad).unwrap_err();
        assert!(err.contains("initial"), "{err}");
    }

    #[test]
    fn rejects_missing_and_double_models() {
        let missing = r#"
states = ["a"]
[initial]
[[rows]]
vertices = [[1.0]]
"#;
        assert!(ChainSpecFile::parse(missing).is_err());

        let double = r#"
states = ["a"]
[initial]
vertices = [[1.0]]
linear_vacuous = { p = [1.0], eps = 0.0 }
[[rows]]
vertices = [[1.0]]
"#;
        assert!(ChainSpecFile::parse(double).is_err());
    }

    #[test]
    fn rejects_row_count_mismatch() {
        let short = r#"
states = ["a", "b"]
[initial]
vertices = [[0.5, 0.5]]
[[rows]]
vertices = [[0.5, 0.5]]
"#;
        let err = ChainSpecFile::parse(short).unwrap_err();
        assert!(err.contains("1 rows for 2 states"), "{err}");
    }

    #[test]
    fn vertex_encoding_round_trips_floats_exactly() {
        let spec = ChainSpecFile {
            metadata: None,
            states: vec!["a".into(), "b".into()],
            initial: ModelSpec {
                vertices: Some(vec![vec![0.1 + 0.2, 1.0 - (0.1 + 0.2)]]),
                linear_vacuous: None,
            },
            rows: vec![
                ModelSpec {
                    vertices: Some(vec![vec![0.9, 0.1], vec![0.2, 0.8]]),
                    linear_vacuous: None,
                },
                ModelSpec {
                    vertices: Some(vec![vec![1.0 / 3.0, 2.0 / 3.0]]),
                    linear_vacuous: None,
                },
            ],
        };
        let again = ChainSpecFile::parse(&spec.to_toml()).unwrap();
        assert_eq!(spec, again);
    }
}
