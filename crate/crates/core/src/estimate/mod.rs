//! The four estimators and the machinery they share.
//!
//! | method      | integrand              | points                              |
//! |-------------|------------------------|-------------------------------------|
//! | `MC`        | g on R^{d+1}           | L groups of N i.i.d. normals        |
//! | `QMC`       | g on R^{d+1}           | (d+1)-dim lattice, L random shifts  |
//! | `MCPreint`  | P₀g on R^d             | L groups of N i.i.d. normals        |
//! | `QMCPreint` | P₀g on R^d             | d-dim lattice, L random shifts      |
//!
//! Every method uses L·N integrand evaluations. The reported error is the
//! standard error of the L group (or shift) means. Per-group sums use a
//! fixed pairwise order, and each point's random numbers are addressed by
//! index, so results are bit-identical however many threads run.

mod chebyshev;
mod study;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use chebyshev::{pdf_curve, ChebyshevInterpolant, PdfCurve};
pub use study::{
    convergence_study, full_ladder, loglog_slope, write_csv, write_json, StudyConfig, StudyRow,
    CSV_HEADER,
};

use crate::error::{domain, Error, Result};
use crate::lattice::{sample_shifts, GaussianStream, LatticeRule};
use crate::model::{clamped_exp, BrownianFactor, PathScratch};
use crate::preintegrate::{Section, Target, TargetKind};
use crate::summation::pairwise_sum;

/// Estimation method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "MC")]
    Mc,
    #[serde(rename = "QMC")]
    Qmc,
    #[serde(rename = "MCPreint")]
    McPreint,
    #[serde(rename = "QMCPreint")]
    QmcPreint,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Mc, Method::Qmc, Method::McPreint, Method::QmcPreint];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mc => "MC",
            Method::Qmc => "QMC",
            Method::McPreint => "MCPreint",
            Method::QmcPreint => "QMCPreint",
        }
    }

    pub fn is_preintegrated(self) -> bool {
        matches!(self, Method::McPreint | Method::QmcPreint)
    }

    pub fn is_lattice(self) -> bool {
        matches!(self, Method::Qmc | Method::QmcPreint)
    }

    /// Whether the method can estimate `kind`; the plain methods would
    /// need to evaluate a Dirac delta for the pdf.
    pub fn supports(self, kind: TargetKind) -> bool {
        self.is_preintegrated() || kind != TargetKind::Pdf
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "mc" => Ok(Method::Mc),
            "qmc" => Ok(Method::Qmc),
            "mcpreint" => Ok(Method::McPreint),
            "qmcpreint" => Ok(Method::QmcPreint),
            _ => Err(domain("method", format!("unknown method {s:?}"))),
        }
    }
}

/// Result of one estimator run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub method: Method,
    pub target: Target,
    pub m: usize,
    /// Points per shift or group.
    pub n: usize,
    /// Shift or group count.
    pub l: usize,
    pub mean: f64,
    pub stderr: f64,
    pub seconds: f64,
}

/// A function on R^dim integrated against the standard Gaussian.
pub trait Integrand: Sync {
    /// Per-worker buffers.
    type Scratch: Send;

    fn dim(&self) -> usize;

    fn scratch(&self) -> Self::Scratch;

    fn eval(&self, y: &[f64], scratch: &mut Self::Scratch) -> Result<f64>;
}

/// P₀g for a target, undiscounted.
pub struct Preintegrated<'a> {
    factor: &'a BrownianFactor,
    target: Target,
}

impl<'a> Preintegrated<'a> {
    pub fn new(factor: &'a BrownianFactor, target: Target) -> Self {
        Self { factor, target }
    }
}

impl Integrand for Preintegrated<'_> {
    type Scratch = Section;

    fn dim(&self) -> usize {
        self.factor.dim()
    }

    fn scratch(&self) -> Section {
        Section::empty(self.factor)
    }

    fn eval(&self, y: &[f64], section: &mut Section) -> Result<f64> {
        section.reset_unchecked(self.factor, y);
        section.preintegrated(self.target)
    }
}

/// The raw integrand g on R^{d+1}: `max(K − φ, 0)` or `ind(φ ≤ x)`.
pub struct Payoff<'a> {
    factor: &'a BrownianFactor,
    target: Target,
}

impl<'a> Payoff<'a> {
    pub fn new(factor: &'a BrownianFactor, target: Target) -> Result<Self> {
        if target.kind == TargetKind::Pdf {
            return Err(Error::UnsupportedTarget("pdf"));
        }
        Ok(Self { factor, target })
    }
}

impl Integrand for Payoff<'_> {
    type Scratch = (PathScratch, Vec<f64>);

    fn dim(&self) -> usize {
        self.factor.m()
    }

    fn scratch(&self) -> Self::Scratch {
        (self.factor.scratch(), vec![0.0; self.factor.m()])
    }

    fn eval(&self, y: &[f64], (scratch, exponents): &mut Self::Scratch) -> Result<f64> {
        let x = self.target.x;
        if x <= 0.0 {
            return Ok(0.0);
        }
        self.factor
            .exponents_into(y[0], &y[1..], exponents, scratch);
        let p = self.factor.params();
        let sum: f64 = exponents.iter().map(|&e| clamped_exp(e)).sum();
        let phi = p.s0 / p.m as f64 * sum;
        Ok(match self.target.kind {
            TargetKind::Price => (x - phi).max(0.0),
            _ => {
                if phi <= x {
                    1.0
                } else {
                    0.0
                }
            }
        })
    }
}

/// Constant integrand; checks that the rules carry equal weights summing
/// to one.
pub struct Constant {
    pub dim: usize,
    pub value: f64,
}

impl Integrand for Constant {
    type Scratch = ();

    fn dim(&self) -> usize {
        self.dim
    }

    fn scratch(&self) {}

    fn eval(&self, _: &[f64], _: &mut ()) -> Result<f64> {
        Ok(self.value)
    }
}

/// Mean over groups (shifts for the lattice rules) and its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupStats {
    pub group_means: Vec<f64>,
    pub mean: f64,
    pub stderr: f64,
}

impl GroupStats {
    pub fn from_group_means(group_means: Vec<f64>) -> Self {
        let l = group_means.len() as f64;
        let mean = pairwise_sum(&group_means) / l;
        let dev: Vec<f64> = group_means
            .iter()
            .map(|q| (q - mean) * (q - mean))
            .collect();
        let stderr = if group_means.len() > 1 {
            (pairwise_sum(&dev) / (l * (l - 1.0))).sqrt()
        } else {
            0.0
        };
        Self {
            group_means,
            mean,
            stderr,
        }
    }
}

fn check_l(l: usize) -> Result<()> {
    if l < 2 {
        return Err(domain(
            "l",
            format!("need at least 2 shifts or groups, got {l}"),
        ));
    }
    Ok(())
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(domain("n", "need at least one point per group"));
    }
    Ok(())
}

/// Averages `integrand` over the lattice rule under `l` random shifts.
pub fn qmc_integrate<I: Integrand>(
    integrand: &I,
    rule: &LatticeRule,
    l: usize,
    seed: u64,
) -> Result<GroupStats> {
    check_l(l)?;
    let dim = integrand.dim();
    if rule.dim() != dim {
        return Err(Error::DimensionMismatch {
            what: "lattice rule",
            expected: dim,
            got: rule.dim(),
        });
    }
    let n = rule.n;
    let means = sample_shifts(l, dim, seed)
        .iter()
        .map(|shift| {
            let values = (0..n)
                .into_par_iter()
                .map_init(
                    || (integrand.scratch(), vec![0.0; dim]),
                    |(scratch, y), k| {
                        rule.gaussian_point_into(k, shift, y);
                        integrand.eval(y, scratch)
                    },
                )
                .collect::<Result<Vec<f64>>>()?;
            Ok(pairwise_sum(&values) / n as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(GroupStats::from_group_means(means))
}

/// Averages `integrand` over `l` groups of `n` i.i.d. Gaussian points.
///
/// The mean is the mean of the group means, as for the lattice rules, but
/// the standard error is that of all l·n samples: the samples are
/// independent, and the pooled estimate is far less noisy than one built
/// from a handful of group means.
pub fn mc_integrate<I: Integrand>(
    integrand: &I,
    n: usize,
    l: usize,
    seed: u64,
) -> Result<GroupStats> {
    check_l(l)?;
    check_n(n)?;
    let dim = integrand.dim();
    let groups = (0..l)
        .map(|group| {
            let values = (0..n)
                .into_par_iter()
                .map_init(
                    || {
                        (
                            GaussianStream::new(seed, group, dim),
                            integrand.scratch(),
                            vec![0.0; dim],
                        )
                    },
                    |(stream, scratch, y), k| {
                        stream.point_into(k, y);
                        integrand.eval(y, scratch)
                    },
                )
                .collect::<Result<Vec<f64>>>()?;
            let mean = pairwise_sum(&values) / n as f64;
            let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
            Ok((mean, pairwise_sum(&dev)))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let mut stats = GroupStats::from_group_means(groups.iter().map(|g| g.0).collect());
    // Total sum of squares = within-group + between-group parts.
    let between: Vec<f64> = groups
        .iter()
        .map(|(m, ss)| ss + n as f64 * (m - stats.mean) * (m - stats.mean))
        .collect();
    let total = (l * n) as f64;
    stats.stderr = if total > 1.0 {
        (pairwise_sum(&between) / ((total - 1.0) * total)).sqrt()
    } else {
        0.0
    };
    Ok(stats)
}

fn finish(
    method: Method,
    target: Target,
    factor: &BrownianFactor,
    n: usize,
    l: usize,
    stats: GroupStats,
    start: Instant,
) -> Estimate {
    let scale = if target.kind == TargetKind::Price {
        factor.params().discount()
    } else {
        1.0
    };
    Estimate {
        method,
        target,
        m: factor.m(),
        n,
        l,
        mean: scale * stats.mean,
        stderr: scale * stats.stderr,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Lattice rule with preintegration; `rule` has dimension d.
pub fn qmc_preint_estimate(
    target: Target,
    factor: &BrownianFactor,
    rule: &LatticeRule,
    l: usize,
    seed: u64,
) -> Result<Estimate> {
    let start = Instant::now();
    let stats = qmc_integrate(&Preintegrated::new(factor, target), rule, l, seed)?;
    Ok(finish(
        Method::QmcPreint,
        target,
        factor,
        rule.n as usize,
        l,
        stats,
        start,
    ))
}

/// Monte Carlo with preintegration, `l` groups of `n` points.
pub fn mc_preint_estimate(
    target: Target,
    factor: &BrownianFactor,
    n: usize,
    l: usize,
    seed: u64,
) -> Result<Estimate> {
    let start = Instant::now();
    let stats = mc_integrate(&Preintegrated::new(factor, target), n, l, seed)?;
    Ok(finish(Method::McPreint, target, factor, n, l, stats, start))
}

/// Plain lattice rule on the full d+1 coordinates; `rule` has dimension d+1.
pub fn qmc_estimate(
    target: Target,
    factor: &BrownianFactor,
    rule: &LatticeRule,
    l: usize,
    seed: u64,
) -> Result<Estimate> {
    let start = Instant::now();
    let stats = qmc_integrate(&Payoff::new(factor, target)?, rule, l, seed)?;
    Ok(finish(
        Method::Qmc,
        target,
        factor,
        rule.n as usize,
        l,
        stats,
        start,
    ))
}

/// Plain Monte Carlo, `l` groups of `n` points.
pub fn mc_estimate(
    target: Target,
    factor: &BrownianFactor,
    n: usize,
    l: usize,
    seed: u64,
) -> Result<Estimate> {
    let start = Instant::now();
    let stats = mc_integrate(&Payoff::new(factor, target)?, n, l, seed)?;
    Ok(finish(Method::Mc, target, factor, n, l, stats, start))
}

/// Lattice rules for the two lattice methods at one modulus.
#[derive(Debug, Clone, Default)]
pub struct Rules {
    /// Dimension d, for `QMCPreint`.
    pub preint: Option<LatticeRule>,
    /// Dimension d+1, for `QMC`.
    pub plain: Option<LatticeRule>,
}

/// Runs `method` with `n` points per shift or group. Lattice methods take
/// their rule from `rules`.
pub fn estimate(
    method: Method,
    target: Target,
    factor: &BrownianFactor,
    rules: &Rules,
    n: usize,
    l: usize,
    seed: u64,
) -> Result<Estimate> {
    let missing = || domain("rules", format!("no lattice rule supplied for {method}"));
    let check = |rule: &LatticeRule| {
        if rule.n as usize != n {
            Err(domain(
                "rules",
                format!("rule has n = {}, expected {n}", rule.n),
            ))
        } else {
            Ok(())
        }
    };
    match method {
        Method::Mc => mc_estimate(target, factor, n, l, seed),
        Method::McPreint => mc_preint_estimate(target, factor, n, l, seed),
        Method::Qmc => {
            let rule = rules.plain.as_ref().ok_or_else(missing)?;
            check(rule)?;
            qmc_estimate(target, factor, rule, l, seed)
        }
        Method::QmcPreint => {
            let rule = rules.preint.as_ref().ok_or_else(missing)?;
            check(rule)?;
            qmc_preint_estimate(target, factor, rule, l, seed)
        }
    }
}

/// E[X] for the discrete average, (S0/m) Σ_k e^{R(k+1)T/m}.
pub fn expected_average(factor: &BrownianFactor) -> f64 {
    let p = factor.params();
    let m = p.m as f64;
    (0..p.m)
        .map(|k| p.s0 / m * clamped_exp(p.r * (k + 1) as f64 * p.t_expiry / m))
        .sum()
}
