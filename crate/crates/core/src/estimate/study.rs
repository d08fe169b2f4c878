//! Convergence study over a ladder of point counts, with CSV and JSON
//! output.

use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;

use super::{estimate, Estimate, Method, Rules};
use crate::error::{domain, Error, Result};
use crate::lattice::{is_prime, load_or_construct};
use crate::model::BrownianFactor;
use crate::preintegrate::{Target, TargetKind};
use crate::weights::{full_product_weights, product_weights, WeightSpec};

/// The prime ladder 101 … 128021, roughly doubling.
pub fn full_ladder() -> Vec<u64> {
    vec![
        101, 251, 503, 997, 1999, 4001, 8009, 16001, 32003, 64007, 128021,
    ]
}

/// Exact CSV header.
pub const CSV_HEADER: &str = "method,target,x,m,N,L,mean,stderr,seconds";

/// One line of study output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub method: Method,
    pub target: TargetKind,
    pub x: f64,
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub mean: f64,
    pub stderr: f64,
    pub seconds: f64,
}

impl From<&Estimate> for StudyRow {
    fn from(e: &Estimate) -> Self {
        Self {
            method: e.method,
            target: e.target.kind,
            x: e.target.x,
            m: e.m,
            n: e.n,
            l: e.l,
            mean: e.mean,
            stderr: e.stderr,
            seconds: e.seconds,
        }
    }
}

impl StudyRow {
    /// The row with wall time zeroed unless `timings` is set, so that
    /// output files are reproducible byte for byte by default.
    pub fn reported(&self, timings: bool) -> StudyRow {
        StudyRow {
            seconds: if timings { self.seconds } else { 0.0 },
            ..self.clone()
        }
    }

    pub fn csv_line(&self, timings: bool) -> String {
        let r = self.reported(timings);
        format!(
            "{},{},{:.16e},{},{},{},{:.16e},{:.16e},{:.16e}",
            r.method, r.target, r.x, r.m, r.n, r.l, r.mean, r.stderr, r.seconds
        )
    }
}

fn io_error(e: std::io::Error) -> Error {
    domain("output", e.to_string())
}

/// Header plus one line per row.
pub fn write_csv<W: Write>(mut out: W, rows: &[StudyRow], timings: bool) -> Result<()> {
    writeln!(out, "{CSV_HEADER}").map_err(io_error)?;
    for r in rows {
        writeln!(out, "{}", r.csv_line(timings)).map_err(io_error)?;
    }
    Ok(())
}

/// A JSON array of records with the CSV field names.
pub fn write_json<W: Write>(mut out: W, rows: &[StudyRow], timings: bool) -> Result<()> {
    let rows: Vec<StudyRow> = rows.iter().map(|r| r.reported(timings)).collect();
    serde_json::to_writer_pretty(&mut out, &rows).map_err(|e| domain("output", e.to_string()))?;
    writeln!(out).map_err(io_error)
}

/// Where the lattice rules of a study come from.
#[derive(Debug, Clone, Default)]
pub struct StudyConfig {
    /// Directory of cached generating vectors; none disables caching.
    pub cache_dir: Option<PathBuf>,
    /// Weights for the d-dimensional rule; product weights when unset.
    pub preint_weights: Option<WeightSpec>,
    /// Weights for the (d+1)-dimensional rule; product weights when unset.
    pub plain_weights: Option<WeightSpec>,
}

/// Runs every method at every ladder point.
///
/// Rows come out ordered by N, then by method in the order MC, QMC,
/// MCPreint, QMCPreint. Methods that cannot handle the target (the plain
/// ones for the pdf) are skipped. `on_row` sees each row as soon as it is
/// ready.
pub fn convergence_study(
    target: Target,
    factor: &BrownianFactor,
    ladder: &[u64],
    l: usize,
    seed: u64,
    methods: &[Method],
    config: &StudyConfig,
    mut on_row: impl FnMut(&StudyRow),
) -> Result<Vec<StudyRow>> {
    if ladder.is_empty() {
        return Err(domain("ladder", "must not be empty"));
    }
    if let Some(&bad) = ladder.iter().find(|&&n| !is_prime(n)) {
        return Err(domain(
            "ladder",
            format!("entries must be prime, got {bad}"),
        ));
    }
    let mut methods: Vec<Method> = methods
        .iter()
        .copied()
        .filter(|m| m.supports(target.kind))
        .collect();
    methods.sort();
    methods.dedup();
    if methods.is_empty() {
        return Err(Error::UnsupportedTarget(target.kind.name()));
    }
    let preint_weights = config
        .preint_weights
        .clone()
        .unwrap_or_else(|| product_weights(factor));
    let plain_weights = config
        .plain_weights
        .clone()
        .unwrap_or_else(|| full_product_weights(factor));
    let cache = config.cache_dir.as_deref();

    let mut rows = Vec::with_capacity(ladder.len() * methods.len());
    for &n in ladder {
        let rules = Rules {
            preint: if methods.contains(&Method::QmcPreint) {
                Some(load_or_construct(cache, n, &preint_weights)?)
            } else {
                None
            },
            plain: if methods.contains(&Method::Qmc) {
                Some(load_or_construct(cache, n, &plain_weights)?)
            } else {
                None
            },
        };
        for &method in &methods {
            let e = estimate(method, target, factor, &rules, n as usize, l, seed)?;
            let row = StudyRow::from(&e);
            on_row(&row);
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Least-squares slope of ln(value) against ln(n).
pub fn loglog_slope(n: &[f64], value: &[f64]) -> f64 {
    let k = n.len().min(value.len()) as f64;
    let xs: Vec<f64> = n.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = value.iter().map(|v| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
