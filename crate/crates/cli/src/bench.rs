//! Benchmark suites: a JSON list of instances (files or inline generator
//! specs) crossed with solvers, reported as CSV sorted by instance id.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Deserialize;

use crate::generate::{generate, GenParams};
use crate::instance_file::{InstanceFile, Kind};
use crate::solve::{solve, RunReport, SolveOptions};

pub const CSV_HEADER: [&str; 11] = [
    "instance_id",
    "solver",
    "n",
    "d",
    "k",
    "eps",
    "candidates",
    "residual",
    "value",
    "wall_ms",
    "verdict",
];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSpec {
    pub kind: Kind,
    pub seed: u64,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub preset: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteEntry {
    pub id: String,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub generate: Option<GenSpec>,
    /// Overrides the suite-level solver list.
    #[serde(default)]
    pub solvers: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Suite {
    /// Solvers run on every entry without its own list; empty means each
    /// kind's default solver.
    #[serde(default)]
    pub solvers: Vec<String>,
    #[serde(default)]
    pub entries: Vec<SuiteEntry>,
}

impl Suite {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing suite {}", path.display()))
    }
}

fn materialize(entry: &SuiteEntry, base: &Path) -> Result<InstanceFile> {
    match (&entry.path, &entry.generate) {
        (Some(p), None) => InstanceFile::load(&base.join(p)),
        (None, Some(g)) => generate(
            g.kind,
            &GenParams {
                n: g.n,
                d: g.d,
                k: g.k,
                eps: g.eps,
                preset: g.preset.clone(),
                ..GenParams::default()
            },
            g.seed,
        ),
        _ => anyhow::bail!("suite entry {:?} needs exactly one of `path` and `generate`", entry.id),
    }
}

/// Run every (entry, solver) pair concurrently; the result is ordered by
/// instance id, then by the entry's solver order.
pub fn run_suite(suite: &Suite, base: &Path, opts: &SolveOptions) -> Result<Vec<RunReport>> {
    let mut jobs = Vec::new();
    for entry in &suite.entries {
        let file = materialize(entry, base).with_context(|| format!("suite entry {:?}", entry.id))?;
        let solvers: Vec<Option<String>> = match (&entry.solvers, suite.solvers.is_empty()) {
            (Some(list), _) => list.iter().cloned().map(Some).collect(),
            (None, false) => suite.solvers.iter().cloned().map(Some).collect(),
            (None, true) => vec![None],
        };
        for (order, solver) in solvers.into_iter().enumerate() {
            jobs.push((entry.id.clone(), order, file.clone(), solver));
        }
    }
    let mut reports: Vec<(String, usize, RunReport)> = jobs
        .into_par_iter()
        .map(|(id, order, file, solver)| {
            let o = SolveOptions { solver, ..opts.clone() };
            solve(&file, &id, &o).map(|r| (id, order, r)).with_context(|| "benchmark job failed")
        })
        .collect::<Result<_>>()?;
    reports.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.cmp(&y.1)));
    Ok(reports.into_iter().map(|(_, _, r)| r).collect())
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_csv<W: Write>(reports: &[RunReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in reports {
        w.write_record([
            r.instance_id.clone(),
            r.solver.clone(),
            r.n.to_string(),
            r.d.to_string(),
            r.k.to_string(),
            opt(r.eps),
            opt(r.candidates),
            opt(r.residual),
            opt(r.value),
            format!("{:.3}", r.wall_ms),
            r.verdict.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
