//! JSON instance files: `{ "kind", "seed", "payload", "metadata" }`.
//!
//! Matrices are arrays of rows. The payload is kept as raw JSON and parsed
//! against the schema of its kind on demand.

use std::fmt;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use sparsefit::reductions::{ExactCoverInstance, Max3LinInstance, WeightedGraph};
use sparsefit::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Kind {
    SparseReg,
    RobustReg,
    SparsePca,
    ExactCover,
    Graph,
    Max3lin,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::SparseReg => "sparse_reg",
            Kind::RobustReg => "robust_reg",
            Kind::SparsePca => "sparse_pca",
            Kind::ExactCover => "exact_cover",
            Kind::Graph => "graph",
            Kind::Max3lin => "max3lin",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub generator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub kind: Kind,
    pub seed: u64,
    pub payload: Value,
    #[serde(default)]
    pub metadata: Metadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparseRegPayload {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub k: usize,
    pub eps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Nonzero values for the finite-alphabet solver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted_x: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobustRegPayload {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    /// Rows to ignore.
    pub k: usize,
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Ground-truth corrupted rows, when planted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrupted: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparsePcaPayload {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub k: usize,
    pub eps: f64,
    #[serde(default = "one_u32")]
    pub alphabet_bound: u32,
    #[serde(default = "ten")]
    pub repeats: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactCoverPayload {
    pub universe: usize,
    pub sets: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphPayload {
    pub vertices: usize,
    /// `[u, v, weight]` triples.
    pub edges: Vec<[u64; 3]>,
    pub k: usize,
    #[serde(rename = "W")]
    pub w: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Equation {
    pub vars: [usize; 3],
    pub rhs: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Max3LinPayload {
    pub vars: usize,
    pub equations: Vec<Equation>,
    pub bound: i64,
    pub eps: f64,
}

fn default_eps() -> f64 {
    0.1
}

fn one_u32() -> u32 {
    1
}

fn ten() -> usize {
    10
}

/// A parsed, validated payload.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    SparseReg(SparseRegPayload),
    RobustReg(RobustRegPayload),
    SparsePca(SparsePcaPayload),
    ExactCover(ExactCoverPayload),
    Graph(GraphPayload),
    Max3lin(Max3LinPayload),
}

pub fn matrix(rows: &[Vec<f64>]) -> Result<Matrix> {
    if rows.is_empty() {
        bail!("matrix has no rows");
    }
    Ok(Matrix::from_rows(rows)?)
}

pub fn rows_of(a: &Matrix) -> Vec<Vec<f64>> {
    a.to_rows()
}

impl SparseRegPayload {
    pub fn matrix(&self) -> Result<Matrix> {
        matrix(&self.a)
    }
}

impl RobustRegPayload {
    pub fn matrix(&self) -> Result<Matrix> {
        matrix(&self.a)
    }
}

impl SparsePcaPayload {
    pub fn matrix(&self) -> Result<Matrix> {
        matrix(&self.a)
    }
}

impl ExactCoverPayload {
    pub fn instance(&self) -> Result<ExactCoverInstance> {
        Ok(ExactCoverInstance::new(self.universe, self.sets.clone())?)
    }
}

impl GraphPayload {
    pub fn graph(&self) -> Result<WeightedGraph> {
        let edges: Vec<(usize, usize, u64)> = self.edges.iter().map(|e| (e[0] as usize, e[1] as usize, e[2])).collect();
        Ok(WeightedGraph::from_edges(self.vertices, &edges)?)
    }
}

impl Max3LinPayload {
    pub fn instance(&self) -> Result<Max3LinInstance> {
        let eqs = self.equations.iter().map(|e| (e.vars, e.rhs)).collect();
        Ok(Max3LinInstance::new(self.vars, eqs, self.bound)?)
    }
}

impl InstanceFile {
    pub fn new(kind: Kind, seed: u64, payload: &impl Serialize, generator: &str) -> Result<Self> {
        let file = InstanceFile {
            kind,
            seed,
            payload: serde_json::to_value(payload)?,
            metadata: Metadata {
                generator: generator.to_string(),
                note: None,
            },
        };
        file.parse()?;
        Ok(file)
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.metadata.note = Some(note.into());
        self
    }

    /// Parse and validate the payload against the schema of `kind`.
    pub fn parse(&self) -> Result<Payload> {
        let v = self.payload.clone();
        let p = match self.kind {
            Kind::SparseReg => {
                let p: SparseRegPayload = serde_json::from_value(v).context("sparse_reg payload")?;
                let a = p.matrix()?;
                check_len("b", a.rows(), p.b.len())?;
                if let Some(x) = &p.planted_x {
                    check_len("planted_x", a.cols(), x.len())?;
                }
                Payload::SparseReg(p)
            }
            Kind::RobustReg => {
                let p: RobustRegPayload = serde_json::from_value(v).context("robust_reg payload")?;
                let a = p.matrix()?;
                check_len("b", a.rows(), p.b.len())?;
                if p.corrupted.as_ref().is_some_and(|c| c.iter().any(|&i| i >= a.rows())) {
                    bail!("corrupted row index out of range");
                }
                Payload::RobustReg(p)
            }
            Kind::SparsePca => {
                let p: SparsePcaPayload = serde_json::from_value(v).context("sparse_pca payload")?;
                let a = p.matrix()?;
                check_len("A columns", a.rows(), a.cols())?;
                Payload::SparsePca(p)
            }
            Kind::ExactCover => {
                let p: ExactCoverPayload = serde_json::from_value(v).context("exact_cover payload")?;
                p.instance()?;
                Payload::ExactCover(p)
            }
            Kind::Graph => {
                let p: GraphPayload = serde_json::from_value(v).context("graph payload")?;
                p.graph()?;
                if p.k == 0 || p.vertices % p.k != 0 {
                    bail!("{} vertices cannot be cut into {} equal blocks", p.vertices, p.k);
                }
                Payload::Graph(p)
            }
            Kind::Max3lin => {
                let p: Max3LinPayload = serde_json::from_value(v).context("max3lin payload")?;
                p.instance()?;
                Payload::Max3lin(p)
            }
        };
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let file: InstanceFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        file.parse().with_context(|| format!("validating {}", path.display()))?;
        Ok(file)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n").with_context(|| format!("writing {}", path.display()))
    }
}

fn check_len(what: &str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        bail!("{what} has length {actual}, expected {expected}");
    }
    Ok(())
}
