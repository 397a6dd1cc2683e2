//! Seeded instance generation for every kind, plus named presets.

use anyhow::{bail, Result};

use sparsefit::instances::{
    alphabet_instance, corrupted_regression, planted_lp_instance, planted_sparse, random_exact_cover, random_graph,
    random_max3lin, random_psd,
};

use crate::instance_file::{
    rows_of, Equation, ExactCoverPayload, GraphPayload, InstanceFile, Kind, Max3LinPayload, RobustRegPayload,
    SparsePcaPayload, SparseRegPayload,
};

/// Generator knobs; `None` falls back to the per-kind default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GenParams {
    /// Rows, vertices, universe size or variable count, by kind.
    pub n: Option<usize>,
    /// Columns, PSD rank, set count or equation count, by kind.
    pub d: Option<usize>,
    pub k: Option<usize>,
    pub eps: Option<f64>,
    pub c: Option<f64>,
    /// Clique weight threshold.
    pub w: Option<u64>,
    pub preset: Option<String>,
}

pub const PRESETS: &[(&str, Kind)] = &[
    ("counterexample", Kind::RobustReg),
    ("planted_lp", Kind::RobustReg),
    ("binary", Kind::SparseReg),
    ("triangle", Kind::Graph),
    ("trivial", Kind::ExactCover),
];

pub fn generate(kind: Kind, p: &GenParams, seed: u64) -> Result<InstanceFile> {
    if let Some(name) = &p.preset {
        return preset(kind, name, seed);
    }
    match kind {
        Kind::SparseReg => {
            let (n, d, k) = (p.n.unwrap_or(16), p.d.unwrap_or(10), p.k.unwrap_or(2));
            let inst = planted_sparse::<f64>(n, d, k, seed)?;
            let payload = SparseRegPayload {
                a: rows_of(&inst.a),
                b: inst.b,
                k,
                eps: p.eps.unwrap_or(0.1),
                c: p.c,
                alphabet: None,
                planted_x: Some(inst.x.to_dense()),
            };
            InstanceFile::new(kind, seed, &payload, "planted_sparse")
        }
        Kind::RobustReg => {
            let (n, d, k) = (p.n.unwrap_or(14), p.d.unwrap_or(3), p.k.unwrap_or(2));
            let inst = corrupted_regression::<f64>(n, d, k, 10.0, seed)?;
            let payload = RobustRegPayload {
                a: rows_of(&inst.a),
                b: inst.b,
                k,
                eps: p.eps.unwrap_or(0.1),
                corrupted: Some(inst.corrupted),
            };
            InstanceFile::new(kind, seed, &payload, "corrupted_regression")
        }
        Kind::SparsePca => {
            let (n, r) = (p.n.unwrap_or(8), p.d.unwrap_or(4));
            let payload = SparsePcaPayload {
                a: rows_of(&random_psd::<f64>(n, r, seed)),
                k: p.k.unwrap_or(2),
                eps: p.eps.unwrap_or(0.25),
                alphabet_bound: 1,
                repeats: 10,
            };
            InstanceFile::new(kind, seed, &payload, "random_psd")
        }
        Kind::ExactCover => {
            let inst = random_exact_cover(p.n.unwrap_or(4), p.d.unwrap_or(4), seed)?;
            let payload = ExactCoverPayload {
                universe: inst.universe,
                sets: inst.sets,
            };
            InstanceFile::new(kind, seed, &payload, "random_exact_cover")
        }
        Kind::Graph => {
            let n = p.n.unwrap_or(6);
            let g = random_graph(n, 0.6, &[1, 2, 3], seed)?;
            let payload = GraphPayload {
                vertices: n,
                edges: g.edges().into_iter().map(|(u, v, w)| [u as u64, v as u64, w]).collect(),
                k: p.k.unwrap_or(3),
                w: p.w.unwrap_or(6),
            };
            InstanceFile::new(kind, seed, &payload, "random_graph")
        }
        Kind::Max3lin => {
            let inst = random_max3lin(p.n.unwrap_or(5), p.d.unwrap_or(8), 2, seed)?;
            let payload = Max3LinPayload {
                vars: inst.vars,
                equations: inst.equations.iter().map(|&(vars, rhs)| Equation { vars, rhs }).collect(),
                bound: inst.bound,
                eps: p.eps.unwrap_or(0.25),
            };
            InstanceFile::new(kind, seed, &payload, "random_max3lin")
        }
    }
}

fn preset(kind: Kind, name: &str, seed: u64) -> Result<InstanceFile> {
    match PRESETS.iter().find(|(n, _)| *n == name) {
        None => bail!("unknown preset {name:?}"),
        Some(&(_, k)) if k != kind => bail!("preset {name:?} is a {k} instance, not {kind}"),
        Some(_) => {}
    }
    match name {
        "counterexample" => {
            let payload = RobustRegPayload {
                a: vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 2.0], vec![1.0, 3.0]],
                b: vec![10.0, 0.0, 0.0, 0.0],
                k: 1,
                eps: 0.1,
                corrupted: Some(vec![0]),
            };
            Ok(InstanceFile::new(kind, seed, &payload, "preset")?.with_note("points (0,10), (1,0), (2,0), (3,0) as rows [1, x]"))
        }
        "planted_lp" => {
            let inst = planted_lp_instance::<f64>(60, 4, 5, 1.0, seed)?;
            let payload = RobustRegPayload {
                a: rows_of(&inst.a),
                b: inst.b,
                k: 5,
                eps: 0.1,
                corrupted: Some(inst.corrupted),
            };
            InstanceFile::new(kind, seed, &payload, "planted_lp_instance")
        }
        "binary" => {
            let inst = alphabet_instance::<f64>(12, 14, 4, 3, &[1], seed)?;
            let payload = SparseRegPayload {
                a: rows_of(&inst.a),
                b: inst.b,
                k: 4,
                eps: 0.1,
                c: None,
                alphabet: Some(vec![1.0]),
                planted_x: Some(inst.x.to_dense()),
            };
            InstanceFile::new(kind, seed, &payload, "alphabet_instance")
        }
        "triangle" => {
            let payload = GraphPayload {
                vertices: 3,
                edges: vec![[0, 1, 1], [0, 2, 1], [1, 2, 1]],
                k: 3,
                w: 3,
            };
            InstanceFile::new(kind, seed, &payload, "preset")
        }
        "trivial" => {
            let payload = ExactCoverPayload {
                universe: 1,
                sets: vec![vec![0]],
            };
            InstanceFile::new(kind, seed, &payload, "preset")
        }
        _ => unreachable!("preset table and match agree"),
    }
}
