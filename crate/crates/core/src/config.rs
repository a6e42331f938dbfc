//! Protocol description files.
//!
//! ```json
//! {
//!   "graph": "paper:rearranged",
//!   "start_vertex": 1,
//!   "coin_dims": [3, 3],
//!   "steps": [
//!     {"coin_subsystem": 1, "coin_kind": "identity", "dim": 3},
//!     {"coin_subsystem": 2, "coin_kind": "fourier", "dim": 3}
//!   ],
//!   "position_basis": "computational",
//!   "coin1_basis": "fourier",
//!   "recovery": [
//!     {"position": 1, "coin1_outcome": 0,
//!      "matrix": [[[0,0],[1,0],[0,0]], [[1,0],[0,0],[0,0]], [[0,0],[1,0],[0,0]]]}
//!   ]
//! }
//! ```
//!
//! `graph` is a builtin name or an inline graph object. `recovery` may also
//! be the string `"synthesize"`, which fills every proportional-unitary
//! branch with its synthesized inverse.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coins::{computational_basis, conjugate_fourier_basis, fourier_basis, CoinKind};
use crate::error::{Error, Result};
use crate::graphshift::{builtin_graph, EdgeLabeledGraph};
use crate::hilbert::{OperatorMatrix, SpaceShape};
use crate::protocol::ProtocolSpec;
use crate::verify::synthesize_recovery_table;
use crate::walk::WalkStep;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphSource {
    Builtin(String),
    Inline(EdgeLabeledGraph),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepFile {
    pub coin_subsystem: usize,
    pub coin_kind: String,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoveryEntry {
    pub position: usize,
    pub coin1_outcome: usize,
    /// Row-major rows of `[re, im]` pairs.
    pub matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RecoverySource {
    Mode(String),
    Table(Vec<RecoveryEntry>),
}

impl Default for RecoverySource {
    fn default() -> Self {
        RecoverySource::Table(Vec::new())
    }
}

fn computational() -> String {
    "computational".to_string()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolFile {
    pub graph: GraphSource,
    pub start_vertex: usize,
    pub coin_dims: [usize; 2],
    pub steps: Vec<StepFile>,
    #[serde(default = "computational")]
    pub position_basis: String,
    pub coin1_basis: String,
    #[serde(default)]
    pub recovery: RecoverySource,
}

fn recovery_matrix(entry: &RecoveryEntry, bob_dim: usize) -> Result<OperatorMatrix> {
    let rows = entry.matrix.len();
    if rows != bob_dim || entry.matrix.iter().any(|r| r.len() != bob_dim) {
        return Err(Error::InvalidProtocol(format!(
            "recovery for ({}, {}) must be {bob_dim}x{bob_dim}, got {rows} rows of lengths {:?}",
            entry.position,
            entry.coin1_outcome,
            entry.matrix.iter().map(Vec::len).collect::<Vec<_>>()
        )));
    }
    let m = DMatrix::from_fn(bob_dim, bob_dim, |i, j| {
        let [re, im] = entry.matrix[i][j];
        Complex64::new(re, im)
    });
    OperatorMatrix::from_matrix(m)
}

impl ProtocolFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_spec(&self, name: &str) -> Result<ProtocolSpec> {
        let graph = match &self.graph {
            GraphSource::Builtin(n) => builtin_graph(n)?,
            GraphSource::Inline(g) => g.clone(),
        };
        let [d1, d2] = self.coin_dims;
        let shape = SpaceShape::new(vec![graph.n_vertices(), d1, d2])?;
        if self.position_basis != "computational" {
            return Err(Error::InvalidProtocol(format!(
                "position basis {:?} is not supported; use \"computational\"",
                self.position_basis
            )));
        }
        let coin1_basis = match self.coin1_basis.as_str() {
            "fourier" => fourier_basis(d1)?,
            "fourier-conjugate" => conjugate_fourier_basis(d1)?,
            "computational" => computational_basis(d1)?,
            other => {
                return Err(Error::InvalidProtocol(format!(
                    "unknown coin1 basis {other:?}"
                )))
            }
        };
        let steps = self
            .steps
            .iter()
            .map(|s| {
                Ok(WalkStep::new(
                    s.coin_subsystem,
                    CoinKind::from_name(&s.coin_kind, s.dim)?,
                    graph.clone(),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut spec = ProtocolSpec {
            name: name.to_string(),
            shape,
            start_vertex: self.start_vertex,
            steps,
            coin1_basis_name: self.coin1_basis.clone(),
            coin1_basis,
            recovery_table: BTreeMap::new(),
        };
        // Validate before synthesis so bad steps surface as step errors.
        spec.validate()?;
        match &self.recovery {
            RecoverySource::Mode(m) if m == "synthesize" => {
                synthesize_recovery_table(&mut spec)?;
            }
            RecoverySource::Mode(m) => {
                return Err(Error::InvalidProtocol(format!(
                    "unknown recovery mode {m:?}"
                )))
            }
            RecoverySource::Table(entries) => {
                for e in entries {
                    let op = recovery_matrix(e, d2)?;
                    if spec
                        .recovery_table
                        .insert((e.position, e.coin1_outcome), op)
                        .is_some()
                    {
                        return Err(Error::InvalidProtocol(format!(
                            "duplicate recovery entry ({}, {})",
                            e.position, e.coin1_outcome
                        )));
                    }
                }
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}
