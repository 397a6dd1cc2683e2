//! Offline checks of instance files and saved run reports.

use anyhow::{bail, Result};
use itertools::Itertools;

use sparsefit::numlin::least_squares_residual;
use sparsefit::sparse_pca::factor_psd;

use crate::instance_file::{InstanceFile, Payload};
use crate::solve::RunReport;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Validate the payload and any embedded ground truth. Returns a summary.
pub fn verify_instance(file: &InstanceFile) -> Result<String> {
    match file.parse()? {
        Payload::SparseReg(p) => {
            let a = p.matrix()?;
            if let Some(x) = &p.planted_x {
                let ax = a.matvec(x)?;
                let gap = norm(&ax.iter().zip(&p.b).map(|(u, v)| u - v).collect_vec());
                if gap > 1e-9 * norm(&p.b).max(1.0) {
                    bail!("planted_x does not reproduce b (gap {gap:e})");
                }
                let nnz = x.iter().filter(|&&v| v != 0.0).count();
                if nnz > p.k {
                    bail!("planted_x has {nnz} nonzeros, k = {}", p.k);
                }
            }
            Ok(format!("sparse_reg {}x{} k={}", a.rows(), a.cols(), p.k))
        }
        Payload::RobustReg(p) => {
            let a = p.matrix()?;
            if let Some(c) = &p.corrupted {
                if c.len() > p.k {
                    bail!("{} corrupted rows exceed k = {}", c.len(), p.k);
                }
                let kept: Vec<usize> = (0..a.rows()).filter(|i| !c.contains(i)).collect();
                let b: Vec<f64> = kept.iter().map(|&i| p.b[i]).collect();
                let (_, r) = least_squares_residual(&a.select_rows(&kept), &b)?;
                if r > 1e-9 * norm(&p.b).max(1.0) {
                    bail!("rows outside the corrupted set are not consistent (residual {r:e})");
                }
            }
            Ok(format!("robust_reg {}x{} k={}", a.rows(), a.cols(), p.k))
        }
        Payload::SparsePca(p) => {
            let a = p.matrix()?;
            factor_psd(&a)?;
            Ok(format!("sparse_pca {}x{} k={}", a.rows(), a.cols(), p.k))
        }
        Payload::ExactCover(p) => Ok(format!("exact_cover |X|={} |S|={}", p.universe, p.sets.len())),
        Payload::Graph(p) => Ok(format!("graph N={} edges={} k={} W={}", p.vertices, p.edges.len(), p.k, p.w)),
        Payload::Max3lin(p) => Ok(format!("max3lin vars={} equations={}", p.vars, p.equations.len())),
    }
}

/// Recompute the residual or value a report claims from its solution vector.
pub fn verify_report(file: &InstanceFile, report: &RunReport) -> Result<String> {
    if report.kind != file.kind {
        bail!("report is for a {} instance, file is {}", report.kind, file.kind);
    }
    let Some(x) = &report.solution else {
        return Ok("report carries no solution vector; nothing to recompute".into());
    };
    let close = |claimed: f64, actual: f64| (claimed - actual).abs() <= 1e-9 * (1.0 + actual.abs());
    match file.parse()? {
        Payload::SparseReg(p) => {
            let ax = p.matrix()?.matvec(x)?;
            let r = norm(&ax.iter().zip(&p.b).map(|(u, v)| u - v).collect_vec());
            match report.residual {
                Some(c) if close(c, r) => Ok(format!("residual {r} confirmed")),
                other => bail!("claimed residual {other:?}, recomputed {r}"),
            }
        }
        Payload::RobustReg(p) => {
            let ax = p.matrix()?.matvec(x)?;
            let r = norm(
                &ax.iter()
                    .zip(&p.b)
                    .enumerate()
                    .filter(|(i, _)| !report.support.contains(i))
                    .map(|(_, (u, v))| u - v)
                    .collect_vec(),
            );
            match report.residual {
                Some(c) if close(c, r) => Ok(format!("masked residual {r} confirmed")),
                other => bail!("claimed residual {other:?}, recomputed {r}"),
            }
        }
        Payload::SparsePca(p) => {
            let a = p.matrix()?;
            let ax = a.matvec(x)?;
            let v: f64 = ax.iter().zip(x).map(|(u, w)| u * w).sum();
            match report.value {
                Some(c) if close(c, v) => Ok(format!("value {v} confirmed")),
                other => bail!("claimed value {other:?}, recomputed {v}"),
            }
        }
        _ => Ok("decision reports are checked by rerunning `solve`".into()),
    }
}
