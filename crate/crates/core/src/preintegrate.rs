//! Closed-form integration over the first Gaussian coordinate.
//!
//! For fixed remaining coordinates `y ∈ R^d`, the map `y0 ↦ φ(y0, y)` is a
//! positive combination of increasing exponentials, hence a strictly
//! increasing bijection onto (0, ∞). For every threshold `x > 0` there is a
//! unique boundary `ξ(x, y)` with `φ(ξ, y) = x`, and the indicator
//! `ind(x − φ)` is the indicator of `y0 ≤ ξ`. Integrating it (or the put
//! payoff) against the standard normal density over `y0` gives
//!
//! * cdf:   Φ(ξ)
//! * pdf:   ρ(ξ) / ∂₀φ(ξ, y)
//! * price: K Φ(ξ) − Σ_k c_k(y) e^{a_k²/2} Φ(ξ − a_k),
//!
//! where `a_k = σ A_{k,0}` and `c_k(y) = (S0/m) exp(drift_k + σ Σ_{i≥1} A_{k,i} y_i)`.
//! The last line uses `∫_{−∞}^{t} e^{a u} ρ(u) du = e^{a²/2} Φ(t − a)`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{clamped_exp, BrownianFactor, MarketParams, PathScratch};
use crate::normal;
use crate::quadrature;

/// Doublings allowed per side while bracketing the root.
pub const MAX_BRACKET_DOUBLINGS: usize = 60;
/// Newton/bisection iteration cap.
pub const MAX_ROOT_ITERATIONS: usize = 100;
/// Residual tolerance factor: `|φ(ξ) − x| ≤ ROOT_TOLERANCE · max(1, x)`.
pub const ROOT_TOLERANCE: f64 = 1e-12;

/// Which expectation is being estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    /// Asian put value, payoff max(K − X, 0).
    Price,
    /// P[X ≤ x].
    Cdf,
    /// Density of X at x.
    Pdf,
}

impl TargetKind {
    pub fn name(self) -> &'static str {
        match self {
            TargetKind::Price => "price",
            TargetKind::Cdf => "cdf",
            TargetKind::Pdf => "pdf",
        }
    }
}

impl std::fmt::Display for TargetKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A target together with its threshold (the strike for `Price`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub kind: TargetKind,
    pub x: f64,
}

impl Target {
    pub fn price(params: &MarketParams) -> Self {
        Self {
            kind: TargetKind::Price,
            x: params.strike,
        }
    }

    pub fn cdf(x: f64) -> Self {
        Self {
            kind: TargetKind::Cdf,
            x,
        }
    }

    pub fn pdf(x: f64) -> Self {
        Self {
            kind: TargetKind::Pdf,
            x,
        }
    }
}

/// Solution of φ(ξ, y) = x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootResult {
    pub xi: f64,
    /// ∂φ/∂y0 at (ξ, y); strictly positive.
    pub dphi0_at_xi: f64,
    pub iterations: usize,
}

/// The one-dimensional section `y0 ↦ φ(y0, y)` for fixed `y`, stored as
/// `scale · Σ_k exp(base_k + slope_k · y0)`.
///
/// Building a section costs one O(m·d) pass over the factor; every later
/// evaluation is O(m). Buffers are reused by [`Section::reset`], so one
/// section per worker thread is enough.
#[derive(Debug, Clone)]
pub struct Section {
    scale: f64,
    base: Vec<f64>,
    slope: Vec<f64>,
    scratch: PathScratch,
}

impl Section {
    pub fn new(factor: &BrownianFactor, y: &[f64]) -> Result<Self> {
        let mut s = Self::empty(factor);
        s.reset(factor, y)?;
        Ok(s)
    }

    /// Section with allocated buffers but no coordinates loaded.
    pub fn empty(factor: &BrownianFactor) -> Self {
        let m = factor.m();
        Self {
            scale: factor.params().s0 / m as f64,
            base: vec![0.0; m],
            slope: (0..m).map(|k| factor.sigma_row(k)[0]).collect(),
            scratch: factor.scratch(),
        }
    }

    /// Reloads the section for new remaining coordinates `y` (length d).
    pub fn reset(&mut self, factor: &BrownianFactor, y: &[f64]) -> Result<()> {
        if y.len() != factor.dim() {
            return Err(Error::DimensionMismatch {
                what: "preintegration coordinates",
                expected: factor.dim(),
                got: y.len(),
            });
        }
        self.reset_unchecked(factor, y);
        Ok(())
    }

    #[inline]
    pub(crate) fn reset_unchecked(&mut self, factor: &BrownianFactor, y: &[f64]) {
        factor.exponents_into(0.0, y, &mut self.base, &mut self.scratch);
    }

    /// φ(y0, y).
    pub fn value(&self, y0: f64) -> f64 {
        let s: f64 = self
            .base
            .iter()
            .zip(&self.slope)
            .map(|(b, a)| clamped_exp(b + a * y0))
            .sum();
        self.scale * s
    }

    /// (φ, ∂φ/∂y0) at (y0, y).
    pub fn value_and_derivative(&self, y0: f64) -> (f64, f64) {
        let mut v = 0.0;
        let mut dv = 0.0;
        for (b, a) in self.base.iter().zip(&self.slope) {
            let e = clamped_exp(b + a * y0);
            v += e;
            dv += a * e;
        }
        (self.scale * v, self.scale * dv)
    }

    /// Solves φ(ξ, y) = x by safeguarded Newton iteration.
    ///
    /// The bracket starts at [−1, 1] and is doubled outward until it
    /// contains the root. Newton steps are taken on `ln φ − ln x` (convex
    /// in y0, so steps from the right of the root approach it
    /// monotonically); a step is replaced by bisection when it leaves the
    /// bracket or fails to cut the residual |φ − x| by at least 10%.
    pub fn solve(&self, x: f64) -> Result<RootResult> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(domain(
                "x",
                format!("threshold must be positive and finite, got {x}"),
            ));
        }
        let tol = ROOT_TOLERANCE * x.max(1.0);
        let residual = |t: f64| self.value(t) - x;

        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        let mut r_lo = residual(lo);
        let mut doublings = 0;
        while r_lo > 0.0 {
            if doublings == MAX_BRACKET_DOUBLINGS {
                return Err(Error::SolverFailure {
                    lo,
                    hi,
                    iterations: 0,
                });
            }
            hi = lo;
            lo *= 2.0;
            r_lo = residual(lo);
            doublings += 1;
        }
        let mut r_hi = residual(hi);
        doublings = 0;
        while r_hi < 0.0 {
            if doublings == MAX_BRACKET_DOUBLINGS {
                return Err(Error::SolverFailure {
                    lo,
                    hi,
                    iterations: 0,
                });
            }
            lo = hi;
            hi *= 2.0;
            r_hi = residual(hi);
            doublings += 1;
        }

        let mut t = hi;
        let (mut p, mut dp) = self.value_and_derivative(t);
        let mut r = p - x;
        let mut iterations = 0;
        loop {
            if r.abs() <= tol {
                return Ok(RootResult {
                    xi: t,
                    dphi0_at_xi: dp,
                    iterations,
                });
            }
            if iterations == MAX_ROOT_ITERATIONS {
                return Err(Error::SolverFailure { lo, hi, iterations });
            }
            iterations += 1;
            if r > 0.0 {
                hi = t;
            } else {
                lo = t;
            }

            let newton = t - (p.ln() - x.ln()) * p / dp;
            if newton > lo && newton < hi && newton.is_finite() {
                let (pn, dpn) = self.value_and_derivative(newton);
                let rn = pn - x;
                if rn.abs() <= 0.9 * r.abs() {
                    t = newton;
                    p = pn;
                    dp = dpn;
                    r = rn;
                    continue;
                }
                if rn > 0.0 {
                    hi = newton;
                } else {
                    lo = newton;
                }
            }
            let mid = 0.5 * (lo + hi);
            if !(mid > lo && mid < hi) {
                return Err(Error::SolverFailure { lo, hi, iterations });
            }
            t = mid;
            (p, dp) = self.value_and_derivative(t);
            r = p - x;
        }
    }

    /// Φ(ξ(x, y)), or 0 for x ≤ 0.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        Ok(normal::cdf(self.solve(x)?.xi))
    }

    /// ρ(ξ) / ∂₀φ(ξ, y), or 0 for x ≤ 0.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        let root = self.solve(x)?;
        let v = normal::pdf(root.xi) / root.dphi0_at_xi;
        Ok(if v.is_finite() { v.max(0.0) } else { 0.0 })
    }

    /// Undiscounted conditional put value ∫_{−∞}^{ξ} (K − φ) ρ dy0, clamped
    /// to [0, K].
    pub fn put(&self, strike: f64) -> Result<f64> {
        if strike <= 0.0 {
            return Ok(0.0);
        }
        let xi = self.solve(strike)?.xi;
        let mut carry = 0.0;
        for (b, a) in self.base.iter().zip(&self.slope) {
            carry += clamped_exp(b + 0.5 * a * a) * normal::cdf(xi - a);
        }
        let v = strike * normal::cdf(xi) - self.scale * carry;
        Ok(v.clamp(0.0, strike))
    }

    /// P₀g for the given target.
    pub fn preintegrated(&self, target: Target) -> Result<f64> {
        match target.kind {
            TargetKind::Price => self.put(target.x),
            TargetKind::Cdf => self.cdf(target.x),
            TargetKind::Pdf => self.pdf(target.x),
        }
    }
}

/// Solves φ(ξ, y) = x for the remaining coordinates `y` (length d).
pub fn solve_xi(factor: &BrownianFactor, x: f64, y: &[f64]) -> Result<RootResult> {
    Section::new(factor, y)?.solve(x)
}

/// Preintegrated indicator, Φ(ξ(x, y)).
pub fn preint_cdf(factor: &BrownianFactor, x: f64, y: &[f64]) -> Result<f64> {
    Section::new(factor, y)?.cdf(x)
}

/// Preintegrated Dirac, ρ(ξ)/∂₀φ(ξ, y).
pub fn preint_pdf(factor: &BrownianFactor, x: f64, y: &[f64]) -> Result<f64> {
    Section::new(factor, y)?.pdf(x)
}

/// Preintegrated (undiscounted) put payoff with strike K from the factor's
/// market parameters.
pub fn preint_price(factor: &BrownianFactor, y: &[f64]) -> Result<f64> {
    Section::new(factor, y)?.put(factor.params().strike)
}

/// Absolute tolerance of [`reference_preintegrate`].
pub const REFERENCE_TOLERANCE: f64 = 1e-12;

/// P₀g by adaptive quadrature of ∫_{−∞}^{ξ} θ(y0, y) ρ(y0) dy0, with θ = K − φ
/// for the price and θ ≡ 1 for the cdf. Independent of the closed forms
/// above except for the shared root ξ; used to check them.
pub fn reference_preintegrate(factor: &BrownianFactor, target: Target, y: &[f64]) -> Result<f64> {
    let section = Section::new(factor, y)?;
    if target.x <= 0.0 {
        return Ok(0.0);
    }
    let xi = section.solve(target.x)?.xi;
    let q = match target.kind {
        TargetKind::Price => quadrature::integrate_lower_half_line(
            |t| (target.x - section.value(t)) * normal::pdf(t),
            xi,
            REFERENCE_TOLERANCE,
            4000,
        )?,
        TargetKind::Cdf => {
            quadrature::integrate_lower_half_line(normal::pdf, xi, REFERENCE_TOLERANCE, 4000)?
        }
        TargetKind::Pdf => return Err(Error::UnsupportedTarget("pdf")),
    };
    Ok(q.value)
}
