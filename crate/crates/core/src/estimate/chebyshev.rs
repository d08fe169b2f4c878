//! Chebyshev interpolation of the density on an interval.
//!
//! Nodes are Chebyshev points of the second kind mapped to [lo, hi]; the
//! interpolant is evaluated with the barycentric formula (weights
//! (−1)^j, halved at both ends) and integrated with the Clenshaw–Curtis
//! rule on the same nodes, which is exact for the interpolating polynomial.

use std::f64::consts::PI;

use super::{qmc_preint_estimate, Estimate};
use crate::error::{domain, Result};
use crate::lattice::LatticeRule;
use crate::model::BrownianFactor;
use crate::preintegrate::Target;

/// Polynomial interpolant through values at Chebyshev points.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevInterpolant {
    lo: f64,
    hi: f64,
    nodes: Vec<f64>,
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl ChebyshevInterpolant {
    /// The `count` nodes on [lo, hi], in increasing order.
    pub fn nodes(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(domain(
                "interval",
                format!("need lo < hi, got [{lo}, {hi}]"),
            ));
        }
        if count < 2 {
            return Err(domain(
                "nodes",
                format!("need at least 2 nodes, got {count}"),
            ));
        }
        let last = (count - 1) as f64;
        Ok((0..count)
            .map(|j| {
                if j == 0 {
                    lo
                } else if j == count - 1 {
                    hi
                } else {
                    let t = -(PI * j as f64 / last).cos();
                    0.5 * (lo + hi) + 0.5 * (hi - lo) * t
                }
            })
            .collect())
    }

    /// Interpolant through `values` at [`ChebyshevInterpolant::nodes`].
    pub fn new(lo: f64, hi: f64, values: Vec<f64>) -> Result<Self> {
        let nodes = Self::nodes(lo, hi, values.len())?;
        let last = values.len() - 1;
        let weights = (0..=last)
            .map(|j| {
                let w = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == last {
                    0.5 * w
                } else {
                    w
                }
            })
            .collect();
        Ok(Self {
            lo,
            hi,
            nodes,
            values,
            weights,
        })
    }

    /// Interpolates `f` sampled at the nodes.
    pub fn from_fn(lo: f64, hi: f64, count: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = Self::nodes(lo, hi, count)?.into_iter().map(f).collect();
        Self::new(lo, hi, values)
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn node_points(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value of the interpolant at x (meant for x in [lo, hi]).
    pub fn eval(&self, x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&xj, &fj), &wj) in self.nodes.iter().zip(&self.values).zip(&self.weights) {
            let diff = x - xj;
            if diff == 0.0 {
                return fj;
            }
            let c = wj / diff;
            num += c * fj;
            den += c;
        }
        num / den
    }

    /// ∫_lo^hi of the interpolant.
    pub fn integral(&self) -> f64 {
        let w = clenshaw_curtis_weights(self.nodes.len() - 1);
        0.5 * (self.hi - self.lo) * w.iter().zip(&self.values).map(|(w, f)| w * f).sum::<f64>()
    }
}

/// Clenshaw–Curtis weights on [−1, 1] for the nodes cos(jπ/n), j = 0..n.
/// Symmetric, so they apply equally to the increasing ordering.
fn clenshaw_curtis_weights(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut w = vec![0.0; n + 1];
    if n == 1 {
        return vec![1.0, 1.0];
    }
    let mut v = vec![1.0; n - 1];
    let theta = |i: usize| PI * i as f64 / nf;
    if n % 2 == 0 {
        w[0] = 1.0 / (nf * nf - 1.0);
        w[n] = w[0];
        for k in 1..n / 2 {
            let kf = k as f64;
            for (i, vi) in v.iter_mut().enumerate() {
                *vi -= 2.0 * (2.0 * kf * theta(i + 1)).cos() / (4.0 * kf * kf - 1.0);
            }
        }
        for (i, vi) in v.iter_mut().enumerate() {
            *vi -= (nf * theta(i + 1)).cos() / (nf * nf - 1.0);
        }
    } else {
        w[0] = 1.0 / (nf * nf);
        w[n] = w[0];
        for k in 1..=(n - 1) / 2 {
            let kf = k as f64;
            for (i, vi) in v.iter_mut().enumerate() {
                *vi -= 2.0 * (2.0 * kf * theta(i + 1)).cos() / (4.0 * kf * kf - 1.0);
            }
        }
    }
    for (i, vi) in v.into_iter().enumerate() {
        w[i + 1] = 2.0 * vi / nf;
    }
    w
}

/// Density estimates at the Chebyshev nodes and their interpolant.
#[derive(Debug, Clone)]
pub struct PdfCurve {
    pub estimates: Vec<Estimate>,
    pub interpolant: ChebyshevInterpolant,
}

/// Lattice-with-preintegration density estimates at `node_count`
/// Chebyshev points on [x_lo, x_hi], all with the same rule and shifts.
pub fn pdf_curve(
    factor: &BrownianFactor,
    x_lo: f64,
    x_hi: f64,
    node_count: usize,
    rule: &LatticeRule,
    l: usize,
    seed: u64,
) -> Result<PdfCurve> {
    let nodes = ChebyshevInterpolant::nodes(x_lo, x_hi, node_count)?;
    let estimates = nodes
        .iter()
        .map(|&x| qmc_preint_estimate(Target::pdf(x), factor, rule, l, seed))
        .collect::<Result<Vec<_>>>()?;
    let interpolant =
        ChebyshevInterpolant::new(x_lo, x_hi, estimates.iter().map(|e| e.mean).collect())?;
    Ok(PdfCurve {
        estimates,
        interpolant,
    })
}
