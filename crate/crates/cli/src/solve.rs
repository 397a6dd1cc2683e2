//! Solver dispatch and oracle certification.
//!
//! Verdicts: `violated` when a claim the solver always makes is refuted
//! (sparsity, mask size, a residual below the exhaustive optimum, a wrong
//! decision, a missed deterministic planted bound); `certified` when the
//! oracle or the planted ground truth confirms the solver's guarantee;
//! `uncertified` otherwise.

use std::fmt;
use std::time::Instant;

use anyhow::{bail, Result};
use itertools::Itertools;
use serde::{Deserialize, Serialize};

use sparsefit::ann::AnnBackend;
use sparsefit::baselines::{
    altmin_robust, brute_exact_cover, brute_min_weight_clique, brute_robust_reg, brute_sparse_pca, brute_sparse_reg,
    greedy_robust, CliqueScope, DEFAULT_BRUTE_CAP,
};
use sparsefit::instances::count_alphabet_solutions;
use sparsefit::planted::{solve_planted_robust, PlantedInstance, DEFAULT_TAU};
use sparsefit::reductions::{clique_gadget, exact_cover_to_robust, max3lin_to_robust};
use sparsefit::robust_reg::{robust_decision, solve_robust_regression, RobustInstance};
use sparsefit::sparse_pca::{solve_sparse_pca, solve_sparse_pca_alphabet, GeoBackend, PcaInstance, PcaOptions};
use sparsefit::sparse_reg::{solve_finite_alphabet, solve_sparse_regression, KeyMode, SparseRegInstance, SparseRegOptions};
use sparsefit::{Error, Matrix, RobustResult};

use crate::instance_file::{InstanceFile, Kind, Payload};

/// Largest brute-force enumeration `--oracle auto` will run.
pub const AUTO_ORACLE_LIMIT: u128 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    Uncertified,
    Violated,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Certified => "certified",
            Verdict::Uncertified => "uncertified",
            Verdict::Violated => "violated",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum OracleMode {
    On,
    Off,
    #[default]
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Backend {
    Exact,
    Hashed,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveOptions {
    pub solver: Option<String>,
    pub seed: Option<u64>,
    pub eps: Option<f64>,
    pub k: Option<usize>,
    pub c: Option<f64>,
    pub backend: Option<Backend>,
    pub repeats: Option<usize>,
    pub oracle: OracleMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance_id: String,
    pub kind: Kind,
    pub solver: String,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub eps: Option<f64>,
    pub candidates: Option<u128>,
    pub residual: Option<f64>,
    pub value: Option<f64>,
    pub decision: Option<bool>,
    /// Support of the solution, or the ignored rows for robust regression.
    pub support: Vec<usize>,
    /// Dense solution vector (`x` for regression, `u` for PCA).
    pub solution: Option<Vec<f64>>,
    pub oracle_value: Option<f64>,
    pub oracle_decision: Option<bool>,
    pub wall_ms: f64,
    pub verdict: Verdict,
    pub note: Option<String>,
}

/// Solver ids accepted for each kind; the first is the default.
pub fn solvers_for(kind: Kind) -> &'static [&'static str] {
    match kind {
        Kind::SparseReg => &["mitm", "finite", "brute"],
        Kind::RobustReg | Kind::Max3lin => &["mitm", "greedy", "altmin", "planted", "brute"],
        Kind::SparsePca => &["bfp", "alphabet", "brute"],
        Kind::ExactCover => &["reduction", "brute"],
        Kind::Graph => &["gadget", "robust_gadget", "brute"],
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn residual_on(a: &Matrix, x: &[f64], b: &[f64], ignored: &[usize]) -> Result<f64> {
    let ax = a.matvec(x)?;
    Ok(ax
        .iter()
        .zip(b)
        .enumerate()
        .filter(|(i, _)| !ignored.contains(i))
        .map(|(_, (p, q))| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt())
}

struct Run {
    report: RunReport,
    oracle: OracleMode,
}

impl Run {
    fn wants_oracle(&self, count: u128) -> bool {
        match self.oracle {
            OracleMode::On => true,
            OracleMode::Off => false,
            OracleMode::Auto => count <= AUTO_ORACLE_LIMIT,
        }
    }

    fn note(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        self.report.note = Some(match self.report.note.take() {
            Some(prev) => format!("{prev}; {msg}"),
            None => msg,
        });
    }

    fn violate(&mut self, msg: impl Into<String>) {
        self.report.verdict = Verdict::Violated;
        self.note(msg);
    }

    fn certify(&mut self) {
        if self.report.verdict != Verdict::Violated {
            self.report.verdict = Verdict::Certified;
        }
    }
}

fn timed<R>(f: impl FnOnce() -> R) -> (R, f64) {
    let start = Instant::now();
    let r = f();
    (r, start.elapsed().as_secs_f64() * 1e3)
}

/// Run one solver on one instance.
pub fn solve(file: &InstanceFile, instance_id: &str, opts: &SolveOptions) -> Result<RunReport> {
    let payload = file.parse()?;
    let solver = opts.solver.clone().unwrap_or_else(|| solvers_for(file.kind)[0].to_string());
    if !solvers_for(file.kind).contains(&solver.as_str()) {
        bail!("solver {solver:?} does not apply to {} instances (choose from {:?})", file.kind, solvers_for(file.kind));
    }
    let mut run = Run {
        report: RunReport {
            instance_id: instance_id.to_string(),
            kind: file.kind,
            solver: solver.clone(),
            n: 0,
            d: 0,
            k: 0,
            eps: None,
            candidates: None,
            residual: None,
            value: None,
            decision: None,
            support: Vec::new(),
            solution: None,
            oracle_value: None,
            oracle_decision: None,
            wall_ms: 0.0,
            verdict: Verdict::Uncertified,
            note: None,
        },
        oracle: opts.oracle,
    };
    let seed = opts.seed.unwrap_or(file.seed);
    match payload {
        Payload::SparseReg(p) => sparse_reg(&mut run, &p, &solver, opts, seed)?,
        Payload::RobustReg(p) => {
            let mut inst = RobustInstance::new(p.matrix()?, p.b.clone(), opts.k.unwrap_or(p.k))?.with_eps(opts.eps.unwrap_or(p.eps));
            inst.delta = 0.0;
            robust_reg(&mut run, &inst, p.corrupted.as_deref(), &solver, opts, seed)?
        }
        Payload::Max3lin(p) => {
            let eps = opts.eps.unwrap_or(p.eps);
            let mut inst = max3lin_to_robust::<f64>(&p.instance()?, eps)?;
            if let Some(k) = opts.k {
                inst.k = k;
            }
            robust_reg(&mut run, &inst, None, &solver, opts, seed)?;
            run.report.eps = Some(eps);
        }
        Payload::SparsePca(p) => {
            let inst = PcaInstance::new(p.matrix()?, opts.k.unwrap_or(p.k), opts.eps.unwrap_or(p.eps))?
                .with_repeats(opts.repeats.unwrap_or(p.repeats))
                .with_alphabet_bound(p.alphabet_bound);
            sparse_pca(&mut run, &inst, &solver, opts, seed)?
        }
        Payload::ExactCover(p) => {
            let inst = p.instance()?;
            run.report.n = inst.universe;
            run.report.d = inst.sets.len();
            run.report.k = inst.sets.len();
            let oracle = run.wants_oracle(1u128 << inst.sets.len().min(127)) || solver == "brute";
            let truth = if oracle { Some(brute_exact_cover(&inst)?) } else { None };
            let decision = if solver == "brute" {
                run.report.candidates = Some(1u128 << inst.sets.len());
                truth.expect("brute solver computes the oracle")
            } else {
                let robust = exact_cover_to_robust::<f64>(&inst)?.with_delta(0.0);
                run.report.candidates = Some(binomial(robust.n(), robust.k));
                let (d, ms) = timed(|| robust_decision(&robust, DEFAULT_BRUTE_CAP));
                run.report.wall_ms = ms;
                d?
            };
            decide(&mut run, decision, truth);
        }
        Payload::Graph(p) => {
            let g = p.graph()?;
            run.report.n = p.vertices;
            run.report.d = p.vertices;
            run.report.k = p.k;
            let oracle = run.wants_oracle(binomial(p.vertices, p.k)) || solver == "brute";
            let best = if oracle { Some(brute_min_weight_clique(&g, p.k, CliqueScope::OnePerBlock)?) } else { None };
            let truth = best.map(|b| b.is_some_and(|w| w <= p.w));
            let decision = match solver.as_str() {
                "brute" => {
                    run.report.candidates = Some(binomial(p.vertices, p.k));
                    run.report.value = best.flatten().map(|w| w as f64);
                    truth.expect("brute solver computes the oracle")
                }
                "gadget" => {
                    let gad = clique_gadget::<f64>(&g, p.k, p.w, false, None)?;
                    run.report.candidates = Some(binomial(p.vertices, p.k));
                    let (r, ms) = timed(|| brute_sparse_reg(&gad.a, &gad.b, p.k, DEFAULT_BRUTE_CAP));
                    let (z, r) = r?;
                    run.report.wall_ms = ms;
                    run.report.residual = Some(r);
                    run.report.value = Some(gad.delta);
                    run.report.support = z.support().to_vec();
                    run.report.solution = Some(z.to_dense());
                    r <= gad.delta * (1.0 + 1e-6)
                }
                _ => {
                    let gad = clique_gadget::<f64>(&g, p.k, p.w, true, None)?;
                    run.report.candidates = Some(binomial(gad.a.rows(), p.k));
                    let (s, ms) = timed(|| brute_robust_reg(&gad.a, &gad.b, p.k, DEFAULT_BRUTE_CAP));
                    let s = s?;
                    run.report.wall_ms = ms;
                    run.report.residual = Some(s.residual);
                    run.report.value = Some(gad.delta);
                    run.report.support = s.ignored();
                    run.report.solution = Some(s.x.clone());
                    s.residual <= gad.delta * (1.0 + 1e-6)
                }
            };
            decide(&mut run, decision, truth);
        }
    }
    Ok(run.report)
}

fn decide(run: &mut Run, decision: bool, truth: Option<bool>) {
    run.report.decision = Some(decision);
    run.report.oracle_decision = truth;
    match truth {
        Some(t) if t == decision => run.certify(),
        Some(t) => run.violate(format!("decision {decision} but the oracle says {t}")),
        None => {}
    }
}

fn sparse_reg(run: &mut Run, p: &crate::instance_file::SparseRegPayload, solver: &str, opts: &SolveOptions, seed: u64) -> Result<()> {
    let a = p.matrix()?;
    let k = opts.k.unwrap_or(p.k);
    let eps = opts.eps.unwrap_or(p.eps);
    let c = opts.c.or(p.c).unwrap_or(2.0);
    let bnorm = norm(&p.b);
    let r = &mut run.report;
    (r.n, r.d, r.k, r.eps) = (a.rows(), a.cols(), k, Some(eps));

    let count = binomial(a.cols(), k);
    let opt = if run.wants_oracle(count) || solver == "brute" {
        match brute_sparse_reg(&a, &p.b, k, DEFAULT_BRUTE_CAP) {
            Ok((_, r)) => Some(r),
            Err(Error::Capacity { .. }) => {
                run.note("oracle skipped: enumeration too large");
                None
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    run.report.oracle_value = opt;
    let planted_ok = match &p.planted_x {
        Some(x) => residual_on(&a, x, &p.b, &[])? <= 1e-9 * bnorm.max(1.0),
        None => false,
    };

    match solver {
        "mitm" => {
            let backend = match opts.backend.unwrap_or(Backend::Exact) {
                Backend::Exact => AnnBackend::Exact,
                Backend::Hashed => AnnBackend::Hashed,
            };
            let inst = SparseRegInstance::new(a.clone(), p.b.clone(), k, eps)?.with_c(c);
            let sopts = SparseRegOptions { backend, ..SparseRegOptions::default() };
            let (sol, ms) = timed(|| solve_sparse_regression(&inst, &sopts, seed));
            let sol = sol?;
            let residual = residual_on(&a, &sol.z.to_dense(), &p.b, &[])?;
            let r = &mut run.report;
            r.wall_ms = ms;
            r.candidates = Some(sol.stats.candidates as u128);
            r.residual = Some(residual);
            r.support = sol.z.support().to_vec();
            r.solution = Some(sol.z.to_dense());
            if sol.z.nnz() > k {
                run.violate(format!("solution has {} nonzeros", sol.z.nnz()));
            }
            if let Some(o) = opt {
                if residual < o - 1e-9 * (1.0 + bnorm) {
                    run.violate("residual below the exhaustive optimum");
                }
            }
            if planted_ok {
                if residual <= eps * bnorm * (1.0 + 1e-12) {
                    run.certify();
                } else if backend == AnnBackend::Exact {
                    run.violate("planted bound eps·‖b‖ missed with the exact backend");
                } else {
                    run.note("planted bound missed (hashed backend is probabilistic)");
                }
            } else if let Some(o) = opt {
                if residual <= o + eps * bnorm {
                    run.certify();
                }
            }
        }
        "finite" => {
            let alphabet = p.alphabet.clone().unwrap_or_else(|| vec![1.0]);
            let integral = a.is_integral() && p.b.iter().chain(&alphabet).all(|v| v.fract() == 0.0);
            let mode = if integral { KeyMode::Integer } else { KeyMode::Quantized(1e-9 * a.max_abs().max(1.0)) };
            let (sol, ms) = timed(|| solve_finite_alphabet(&a, &p.b, k, &alphabet, mode));
            run.report.wall_ms = ms;
            match sol {
                Err(Error::NoCollision) => run.note("no alphabet solution found"),
                Err(e) => return Err(e.into()),
                Ok(sol) => {
                    let x = sol.x.to_dense();
                    let residual = residual_on(&a, &x, &p.b, &[])?;
                    let r = &mut run.report;
                    r.candidates = Some(sol.table_size as u128);
                    r.residual = Some(residual);
                    r.support = sol.x.support().to_vec();
                    r.solution = Some(x.clone());
                    if sol.x.nnz() > k || !sol.x.values().iter().all(|v| alphabet.contains(v)) {
                        run.violate("solution leaves the alphabet or the sparsity bound");
                    } else if integral && residual != 0.0 {
                        run.violate("integer solution does not reproduce b exactly");
                    }
                    let unique = || {
                        let per = (alphabet.len() as u128 + 1).saturating_pow(k as u32);
                        run.wants_oracle(count.saturating_mul(per))
                            && count_alphabet_solutions(&a, &p.b, k, &alphabet, 2) == 1
                    };
                    if p.planted_x.as_ref() == Some(&x) || unique() {
                        run.certify();
                    }
                }
            }
        }
        _ => {
            let (res, ms) = timed(|| brute_sparse_reg(&a, &p.b, k, DEFAULT_BRUTE_CAP));
            let (z, residual) = res?;
            let r = &mut run.report;
            r.wall_ms = ms;
            r.candidates = Some(count);
            r.residual = Some(residual);
            r.support = z.support().to_vec();
            r.solution = Some(z.to_dense());
            run.certify();
        }
    }
    Ok(())
}

fn robust_reg(
    run: &mut Run,
    inst: &RobustInstance<f64>,
    corrupted: Option<&[usize]>,
    solver: &str,
    opts: &SolveOptions,
    seed: u64,
) -> Result<()> {
    let (a, b, k) = (&inst.a, &inst.b, inst.k);
    let bnorm = norm(b);
    let r = &mut run.report;
    (r.n, r.d, r.k, r.eps) = (a.rows(), a.cols(), k, Some(inst.eps));
    let count = binomial(a.rows(), k);
    let opt = if run.wants_oracle(count) || solver == "brute" {
        match brute_robust_reg(a, b, k, DEFAULT_BRUTE_CAP) {
            Ok(s) => Some(s.residual),
            Err(Error::Capacity { .. }) => {
                run.note("oracle skipped: enumeration too large");
                None
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    run.report.oracle_value = opt;

    let (sol, ms): (Result<RobustResult>, f64) = match solver {
        "mitm" => {
            let backend = match opts.backend.unwrap_or(Backend::Exact) {
                Backend::Exact => AnnBackend::Exact,
                Backend::Hashed => AnnBackend::Hashed,
            };
            let sopts = SparseRegOptions { backend, ..SparseRegOptions::default() };
            let (s, ms) = timed(|| solve_robust_regression(inst, &sopts, seed));
            (s.map_err(Into::into), ms)
        }
        "greedy" => {
            let (s, ms) = timed(|| greedy_robust(inst));
            (s.map_err(Into::into), ms)
        }
        "altmin" => {
            let (s, ms) = timed(|| {
                let init = greedy_robust(inst)?.keep_mask;
                altmin_robust(inst, &init, opts.repeats.unwrap_or(20)).map(|t| t.final_solution)
            });
            (s.map_err(Into::into), ms)
        }
        "planted" => {
            let (s, ms) = timed(|| {
                PlantedInstance::new(a.clone(), b.clone(), k).and_then(|p| solve_planted_robust(&p, DEFAULT_TAU))
            });
            match s {
                Err(Error::RecoveryFailed(msg)) => {
                    run.report.wall_ms = ms;
                    run.note(format!("recovery failed: {msg}"));
                    return Ok(());
                }
                other => (other.map_err(Into::into), ms),
            }
        }
        _ => {
            let (s, ms) = timed(|| brute_robust_reg(a, b, k, DEFAULT_BRUTE_CAP));
            run.report.candidates = Some(count);
            (s.map_err(Into::into), ms)
        }
    };
    let sol = sol?;
    let ignored = sol.ignored();
    let residual = residual_on(a, &sol.x, b, &ignored)?;
    let r = &mut run.report;
    r.wall_ms = ms;
    r.residual = Some(residual);
    r.support = ignored.clone();
    r.solution = Some(sol.x.clone());

    let expected_zeros = if solver == "planted" { ignored.len().min(k) } else { k };
    if ignored.len() != expected_zeros {
        run.violate(format!("mask ignores {} rows, expected {k}", ignored.len()));
    }
    if let Some(o) = opt {
        if residual < o - 1e-9 * (1.0 + bnorm) {
            run.violate("residual below the exhaustive optimum");
        }
    }
    match solver {
        "brute" => run.certify(),
        "greedy" | "altmin" => {
            if opt.is_some_and(|o| residual <= o + inst.eps * bnorm) {
                run.certify();
            }
        }
        "planted" => {
            if corrupted == Some(ignored.as_slice()) && residual <= 1e-6 * bnorm {
                run.certify();
            } else if let Some(o) = opt {
                if residual <= o + 1e-6 * bnorm {
                    run.certify();
                }
            }
        }
        _ => {
            if corrupted == Some(ignored.as_slice()) {
                run.certify();
            } else if let Some(o) = opt {
                if residual <= o + inst.eps * bnorm {
                    run.certify();
                }
            }
        }
    }
    Ok(())
}

fn alphabet_opt(a: &Matrix, k: usize, l: u32) -> f64 {
    let n = a.rows();
    let l = l as i64;
    let mut best = 0.0f64;
    for support in (0..n).combinations(k.min(n)) {
        for vals in (0..support.len()).map(|_| -l..=l).multi_cartesian_product() {
            let mut v = 0.0;
            for (p, &i) in support.iter().enumerate() {
                for (q, &j) in support.iter().enumerate() {
                    v += (vals[p] * vals[q]) as f64 * a[(i, j)];
                }
            }
            best = best.max(v);
        }
    }
    best
}

fn sparse_pca(run: &mut Run, inst: &PcaInstance<f64>, solver: &str, opts: &SolveOptions, seed: u64) -> Result<()> {
    let n = inst.n();
    let r = &mut run.report;
    (r.n, r.d, r.k, r.eps) = (n, n, inst.k, Some(inst.eps));
    let count = binomial(n, inst.k);
    let backend = match opts.backend {
        None => GeoBackend::Auto,
        Some(Backend::Exact) => GeoBackend::Exact,
        Some(Backend::Hashed) => GeoBackend::Approximate,
    };
    let popts = PcaOptions { backend, ..PcaOptions::default() };
    match solver {
        "alphabet" => {
            let l = inst.alphabet_bound;
            let per = (2 * l as u128 + 1).saturating_pow(inst.k as u32);
            let opt = run.wants_oracle(count.saturating_mul(per)).then(|| alphabet_opt(&inst.a, inst.k, l));
            let (sol, ms) = timed(|| solve_sparse_pca_alphabet(inst, &popts, seed));
            let sol = sol?;
            let r = &mut run.report;
            r.wall_ms = ms;
            r.oracle_value = opt;
            r.value = Some(sol.value);
            r.support = sol.u.support().to_vec();
            r.solution = Some(sol.u.to_dense());
            let bound = 2.0 * l as f64;
            if sol.u.nnz() > inst.k || !sol.u.values().iter().all(|v| v.fract() == 0.0 && v.abs() <= bound) {
                run.violate("output leaves the relaxed alphabet or the sparsity bound");
            }
            if opt.is_some_and(|o| sol.value >= (1.0 - inst.eps) * o) {
                run.certify();
            }
        }
        _ => {
            let opt = if run.wants_oracle(count) || solver == "brute" {
                Some(brute_sparse_pca(&inst.a, inst.k, DEFAULT_BRUTE_CAP)?.value)
            } else {
                None
            };
            let (sol, ms) = if solver == "brute" {
                timed(|| brute_sparse_pca(&inst.a, inst.k, DEFAULT_BRUTE_CAP))
            } else {
                timed(|| solve_sparse_pca(inst, &popts, seed))
            };
            let sol = sol?;
            let r = &mut run.report;
            r.wall_ms = ms;
            r.oracle_value = opt;
            r.value = Some(sol.value);
            r.support = sol.u.support().to_vec();
            r.solution = Some(sol.u.to_dense());
            if solver == "brute" {
                r.candidates = Some(count);
            }
            let unit = inst.k == 0 || (sol.norm - 1.0).abs() <= 1e-9;
            if sol.u.nnz() > inst.k || !unit {
                run.violate("output is not a unit k-sparse vector");
            }
            if let Some(o) = opt {
                if sol.value > o + 1e-9 * (1.0 + o.abs()) {
                    run.violate("value above the exhaustive optimum");
                } else if sol.value >= (1.0 - inst.eps) * o {
                    run.certify();
                }
            }
        }
    }
    Ok(())
}

/// Process exit status for a batch of reports: 1 iff any is violated.
pub fn exit_status<'a>(reports: impl IntoIterator<Item = &'a RunReport>) -> u8 {
    u8::from(reports.into_iter().any(|r| r.verdict == Verdict::Violated))
}
