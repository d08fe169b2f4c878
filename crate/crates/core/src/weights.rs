//! Weight parameters for the lattice construction.
//!
//! Two families are provided:
//!
//! * product weights `γ_η = ∏_{η_i≠0} Λ_i^{4/3}`, the simplified choice used
//!   for all experiments;
//! * product-and-order-dependent (POD) weights obtained by minimising the
//!   shifted-lattice error bound for the norm estimates of the three
//!   preintegrated integrands,
//!   `γ*_η = (A_η / [2 C₂ ζ(1+δ)]^{|η|})^{2(1−δ)/(3−2δ)}`.
//!
//! The POD weights need the constants below: `Λ_i`, `κ_β = sup |He_β| ρ`,
//! `Ω_q`, `B_{q,η}`, `Z`, `I_{1,i}` and `I_{2,i}`. The constant C₂ of the
//! lattice error bound has no known numerical value; it is an explicit input
//! (default 1) and only shifts the profile across orders |η|.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::BrownianFactor;
use crate::normal;
use crate::preintegrate::TargetKind;

/// Largest Hermite index tabulated for κ_β.
pub const BETA_MAX: usize = 10;
/// Highest interaction order carried by POD weights.
pub const DEFAULT_MAX_ORDER: usize = 10;
/// Default C₂ placeholder.
pub const DEFAULT_C2: f64 = 1.0;
/// Default δ for POD weights.
pub const DEFAULT_DELTA: f64 = 0.25;

/// One product-and-order-dependent term `order[|η|] · ∏_{η_i≠0} dims[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PodTerm {
    /// Indexed by the order |η| = 0..=max_order.
    pub order: Vec<f64>,
    /// Indexed by coordinate, one entry per dimension.
    pub dims: Vec<f64>,
}

impl PodTerm {
    fn value(&self, eta: &[bool]) -> f64 {
        let mut order = 0;
        let mut prod = 1.0;
        for (i, _) in eta.iter().enumerate().filter(|(_, &on)| on) {
            order += 1;
            prod *= self.dims[i];
        }
        self.order.get(order).map_or(0.0, |g| g * prod)
    }
}

/// POD weights `γ_η = (Σ_t term_t(η))^exponent`.
///
/// A single term with exponent 1 is plain POD. Several terms arise for the
/// price, whose norm bound is a sum of two POD expressions; the exact weight
/// is kept by [`PodWeights::gamma`], and [`PodWeights::majorant_terms`]
/// gives POD terms whose sum dominates it (for exponent ≤ 1,
/// `(x + y)^p ≤ x^p + y^p`), which is what the lattice construction uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PodWeights {
    pub terms: Vec<PodTerm>,
    pub exponent: f64,
}

impl PodWeights {
    /// Plain POD weights `Γ_{|η|} ∏ β_i`.
    pub fn new(order_factors: Vec<f64>, dim_factors: Vec<f64>) -> Self {
        Self {
            terms: vec![PodTerm {
                order: order_factors,
                dims: dim_factors,
            }],
            exponent: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.terms.first().map_or(0, |t| t.dims.len())
    }

    pub fn max_order(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.order.len().saturating_sub(1))
            .min()
            .unwrap_or(0)
    }

    pub fn gamma(&self, eta: &[bool]) -> f64 {
        let s: f64 = self.terms.iter().map(|t| t.value(eta)).sum();
        s.powf(self.exponent)
    }

    /// Terms with the exponent pushed inside; exact for one term.
    pub fn majorant_terms(&self) -> Vec<PodTerm> {
        let p = self.exponent;
        self.terms
            .iter()
            .map(|t| PodTerm {
                order: t.order.iter().map(|g| g.powf(p)).collect(),
                dims: t.dims.iter().map(|b| b.powf(p)).collect(),
            })
            .collect()
    }
}

/// Weight parameters γ_η for subsets η ⊆ {1..d}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightSpec {
    Product { factors: Vec<f64> },
    Pod(PodWeights),
}

impl WeightSpec {
    pub fn product(factors: Vec<f64>) -> Self {
        WeightSpec::Product { factors }
    }

    pub fn dim(&self) -> usize {
        match self {
            WeightSpec::Product { factors } => factors.len(),
            WeightSpec::Pod(p) => p.dim(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            WeightSpec::Product { .. } => "product",
            WeightSpec::Pod(_) => "pod",
        }
    }

    /// γ_η for η ∈ {0,1}^d.
    pub fn gamma(&self, eta: &[bool]) -> f64 {
        match self {
            WeightSpec::Product { factors } => eta
                .iter()
                .zip(factors)
                .filter(|(&on, _)| on)
                .map(|(_, g)| g)
                .product(),
            WeightSpec::Pod(p) => p.gamma(eta),
        }
    }

    /// Checks that every factor is finite and non-negative.
    pub fn validate(&self) -> Result<()> {
        let ok = |v: &f64| v.is_finite() && *v >= 0.0;
        let good = match self {
            WeightSpec::Product { factors } => factors.iter().all(ok),
            WeightSpec::Pod(p) => {
                p.exponent.is_finite()
                    && p.exponent > 0.0
                    && !p.terms.is_empty()
                    && p.terms.iter().all(|t| {
                        t.dims.len() == p.dim() && t.order.iter().all(ok) && t.dims.iter().all(ok)
                    })
            }
        };
        if good {
            Ok(())
        } else {
            Err(domain("weights", "factors must be finite and non-negative"))
        }
    }

    /// Stable 64-bit FNV-1a digest of the weights, used to name cache files.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv1a::default();
        match self {
            WeightSpec::Product { factors } => {
                h.write(b"product");
                factors
                    .iter()
                    .for_each(|v| h.write(&v.to_bits().to_le_bytes()));
            }
            WeightSpec::Pod(p) => {
                h.write(b"pod");
                h.write(&p.exponent.to_bits().to_le_bytes());
                for t in &p.terms {
                    h.write(b"|");
                    t.order
                        .iter()
                        .for_each(|v| h.write(&v.to_bits().to_le_bytes()));
                    h.write(b"/");
                    t.dims
                        .iter()
                        .for_each(|v| h.write(&v.to_bits().to_le_bytes()));
                }
            }
        }
        h.0
    }
}

struct Fnv1a(u64);

impl Default for Fnv1a {
    fn default() -> Self {
        Self(0xcbf2_9ce4_8422_2325)
    }
}

impl Fnv1a {
    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }
}

/// Product weights `γ_j = Λ_j^{4/3}` for the coordinates j = 1..d that
/// remain after preintegration.
pub fn product_weights(factor: &BrownianFactor) -> WeightSpec {
    WeightSpec::product(
        factor.lambda()[1..]
            .iter()
            .map(|l| l.powf(4.0 / 3.0))
            .collect(),
    )
}

/// Product weights `Λ_i^{4/3}` for all d+1 coordinates i = 0..d, used by
/// the plain lattice rule that does not preintegrate.
pub fn full_product_weights(factor: &BrownianFactor) -> WeightSpec {
    WeightSpec::product(factor.lambda().iter().map(|l| l.powf(4.0 / 3.0)).collect())
}

/// Probabilist's Hermite polynomial He_β(v).
pub fn hermite(beta: usize, v: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, v);
    if beta == 0 {
        return prev;
    }
    for k in 1..beta {
        (prev, cur) = (cur, v * cur - k as f64 * prev);
    }
    cur
}

/// κ_β = sup_v |He_β(v)| ρ(v), for β ≤ [`BETA_MAX`].
///
/// Dense scan of [−20, 20] with step 1e−3, then golden-section refinement
/// around the best grid point to a bracket width of 1e−10.
pub fn kappa_beta(beta: usize) -> Result<f64> {
    if beta > BETA_MAX {
        return Err(domain(
            "beta",
            format!("must be at most {BETA_MAX}, got {beta}"),
        ));
    }
    let f = |v: f64| hermite(beta, v).abs() * normal::pdf(v);
    const STEPS: i32 = 40_000;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for k in 0..=STEPS {
        let v = f64::from(k - STEPS / 2) * 1e-3;
        let fv = f(v);
        if fv > best.0 {
            best = (fv, v);
        }
    }
    let (mut lo, mut hi) = (best.1 - 1e-3, best.1 + 1e-3);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > 1e-10 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    Ok(best.0.max(fc).max(fd).max(f(0.5 * (lo + hi))))
}

/// Riemann ζ(s) for real s > 1: the first nine terms summed directly, the
/// rest by Euler–Maclaurin with six Bernoulli corrections (error far below
/// 1e−12 for s ∈ (1, 3]).
pub fn zeta(s: f64) -> Result<f64> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(domain("s", format!("zeta needs s > 1, got {s}")));
    }
    const N: f64 = 10.0;
    // B_{2k} / (2k)!
    const B: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30_240.0,
        -1.0 / 1_209_600.0,
        1.0 / 47_900_160.0,
        -691.0 / 1_307_674_368_000.0,
    ];
    let mut sum: f64 = (1..10).map(|n| (n as f64).powf(-s)).sum();
    sum += N.powf(1.0 - s) / (s - 1.0) + 0.5 * N.powf(-s);
    // Rising factorial s(s+1)…(s+2k−2) times N^{−s−2k+1}.
    let mut rising = s;
    let mut power = N.powf(-s - 1.0);
    for (k, b) in B.iter().enumerate() {
        sum += b * rising * power;
        let j = 2.0 * k as f64;
        rising *= (s + j + 1.0) * (s + j + 2.0);
        power /= N * N;
    }
    Ok(sum)
}

/// I_{1,i} = ∫ e^{2Λ|y|} ρ(y) dy = 2 e^{2Λ²} Φ(2Λ).
pub fn i1(lambda: f64) -> f64 {
    2.0 * (2.0 * lambda * lambda).exp() * normal::cdf(2.0 * lambda)
}

/// I_{2,i} = ∫ e^{2Λ_i|y|} ψ_i(y) dy = 1 + 1/(2i) for the exponential ψ_i.
pub fn i2(i: usize) -> f64 {
    1.0 + 0.5 / i as f64
}

/// Exponential weight function ψ(y) = Λ₀ e^{−2Λ₀|y|}.
pub fn psi(lambda0: f64, y: f64) -> f64 {
    lambda0 * (-2.0 * lambda0 * y.abs()).exp()
}

/// The inner function θ of the preintegrated integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theta {
    /// θ ≡ 1 (cdf and pdf).
    One,
    /// θ = x − φ (price, with x = K); the bound does not depend on the sign.
    XMinusPhi,
}

/// Ω_q for the given θ and threshold range [a, b].
pub fn omega_q(q: u8, theta: Theta, x_range: (f64, f64)) -> Result<f64> {
    let (a, b) = x_range;
    match (theta, q) {
        (Theta::One, 0) | (Theta::XMinusPhi, 1) => Ok(1.0),
        (Theta::One, 1) => {
            if a > 0.0 {
                Ok(1.0 / a)
            } else {
                Err(domain(
                    "x range",
                    format!("lower end must be positive, got {a}"),
                ))
            }
        }
        (Theta::XMinusPhi, 0) => Ok(b),
        _ => Err(domain("q", format!("must be 0 or 1, got {q}"))),
    }
}

/// Constants entering the norm bounds of the preintegrated integrands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryConstants {
    /// κ_β for β = 0..=BETA_MAX.
    pub kappa: Vec<f64>,
    /// Λ_i for i = 0..=d.
    pub lambda: Vec<f64>,
    pub lambda0: f64,
    pub z_mean: f64,
    /// I_{1,i} for i = 0..=d.
    pub i1: Vec<f64>,
    /// I_{2,i} for i = 1..=d (index i−1).
    pub i2: Vec<f64>,
    pub delta: f64,
    pub c2: f64,
    /// Threshold range [a, b].
    pub x_range: (f64, f64),
    /// d, the number of coordinates after preintegration.
    pub dim: usize,
}

impl TheoryConstants {
    pub fn new(factor: &BrownianFactor, delta: f64, c2: f64, x_range: (f64, f64)) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(domain(
                "delta",
                format!("must lie in (0, 1/2), got {delta}"),
            ));
        }
        if !(c2 > 0.0) || !c2.is_finite() {
            return Err(domain(
                "c2",
                format!("must be positive and finite, got {c2}"),
            ));
        }
        let (a, b) = x_range;
        if !(a.is_finite() && b.is_finite() && a <= b) {
            return Err(domain("x range", format!("need a ≤ b, got [{a}, {b}]")));
        }
        let kappa = (0..=BETA_MAX).map(kappa_beta).collect::<Result<Vec<_>>>()?;
        let d = factor.dim();
        Ok(Self {
            kappa,
            lambda: factor.lambda().to_vec(),
            lambda0: factor.lambda0(),
            z_mean: factor.z_mean(),
            i1: factor.lambda().iter().map(|&l| i1(l)).collect(),
            i2: (1..=d).map(i2).collect(),
            delta,
            c2,
            x_range,
            dim: d,
        })
    }

    /// max_{β ≤ n} κ_β.
    fn kappa_max(&self, n: usize) -> Result<f64> {
        if n > BETA_MAX {
            return Err(domain("order", format!("needs κ_β beyond β = {BETA_MAX}")));
        }
        Ok(self.kappa[..=n].iter().copied().fold(0.0, f64::max))
    }

    /// ln of the η-independent part of √B_{q,η} for |η| = order:
    /// ln[K Ω (2d+3)^{2ℓ+2q−1} / M^{ℓ+q}].
    fn ln_sqrt_b_order(&self, q: u8, order: usize, theta: Theta) -> Result<f64> {
        let n = order + q as usize;
        if n == 0 {
            return Err(domain("eta", "B needs |η| + q ≥ 1"));
        }
        let kmax = self.kappa_max(n - 1)?;
        let omega = omega_q(q, theta, self.x_range)?;
        let scale = 2.0 * self.dim as f64 + 3.0;
        let m = self.lambda0.min(1.0);
        Ok(kmax.ln() + omega.ln() + (2 * n - 1) as f64 * scale.ln() - n as f64 * m.ln())
    }

    /// The exponent 2(1−δ)/(3−2δ).
    pub fn pod_exponent(&self) -> f64 {
        2.0 * (1.0 - self.delta) / (3.0 - 2.0 * self.delta)
    }

    /// 2 C₂ ζ(1+δ).
    pub fn order_divisor(&self) -> Result<f64> {
        Ok(2.0 * self.c2 * zeta(1.0 + self.delta)?)
    }
}

/// B_{q,η} for η ∈ {0,1}^d (η_j ↔ coordinate j+1).
pub fn b_constant(q: u8, eta: &[bool], theta: Theta, constants: &TheoryConstants) -> Result<f64> {
    if eta.len() != constants.dim {
        return Err(Error::DimensionMismatch {
            what: "multi-index",
            expected: constants.dim,
            got: eta.len(),
        });
    }
    let order = eta.iter().filter(|&&on| on).count();
    let ln_prod: f64 = eta
        .iter()
        .zip(&constants.lambda[1..])
        .filter(|(&on, _)| on)
        .map(|(_, l)| l.ln())
        .sum();
    Ok((2.0 * (constants.ln_sqrt_b_order(q, order, theta)? + ln_prod)).exp())
}

/// ln(8^n n!)
fn ln_eight_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum::<f64>() + n as f64 * 8f64.ln()
}

/// POD weights minimising the lattice error bound for the given target,
/// truncated at interaction order `max_order` (orders above carry weight 0).
pub fn pod_weights(
    target: TargetKind,
    constants: &TheoryConstants,
    max_order: usize,
) -> Result<WeightSpec> {
    let d = constants.dim;
    let max_order = max_order.min(d).min(BETA_MAX);
    let ln_div = constants.order_divisor()?.ln();
    let lam = &constants.lambda[1..];
    let lam_sq: Vec<f64> = lam.iter().map(|l| l * l).collect();

    // A-space POD term (8^{ℓ−1}(ℓ−1)!)² B_{0,η} (cdf, price) or
    // (8^ℓ ℓ!)² B_{1,η} (pdf), each divided by (2C₂ζ)^ℓ.
    let hermite_term = |theta: Theta, q: u8, zero: f64| -> Result<PodTerm> {
        let mut order = vec![zero];
        for l in 1..=max_order {
            let fact = if q == 0 {
                ln_eight_factorial(l - 1)
            } else {
                ln_eight_factorial(l)
            };
            let ln = 2.0 * (fact + constants.ln_sqrt_b_order(q, l, theta)?) - l as f64 * ln_div;
            order.push(ln.exp());
        }
        Ok(PodTerm {
            order,
            dims: lam_sq.clone(),
        })
    };

    let terms = match target {
        TargetKind::Cdf => vec![hermite_term(Theta::One, 0, 1.0)?],
        TargetKind::Pdf => {
            let b10 = (2.0 * constants.ln_sqrt_b_order(1, 0, Theta::One)?).exp();
            vec![hermite_term(Theta::One, 1, b10)?]
        }
        TargetKind::Price => {
            // 2Z² ∏_{i=0}^d I_{1,i} · ∏_{η_i≠0} Λ_i² I_{2,i} / I_{1,i}
            let base =
                2.0 * constants.z_mean * constants.z_mean * constants.i1.iter().product::<f64>();
            let first = PodTerm {
                order: (0..=max_order)
                    .map(|l| (base.ln() - l as f64 * ln_div).exp())
                    .collect(),
                dims: (0..d)
                    .map(|j| lam_sq[j] * constants.i2[j] / constants.i1[j + 1])
                    .collect(),
            };
            let mut second = hermite_term(Theta::XMinusPhi, 0, 0.0)?;
            second.order.iter_mut().skip(1).for_each(|g| *g *= 2.0);
            vec![first, second]
        }
    };
    let spec = WeightSpec::Pod(PodWeights {
        terms,
        exponent: constants.pod_exponent(),
    });
    spec.validate()
        .map_err(|_| domain("weights", "POD weights overflow for these parameters"))?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{pca_factor, MarketParams};

    fn constants(m: usize, delta: f64) -> TheoryConstants {
        let f = pca_factor(&MarketParams::with_steps(m)).unwrap();
        TheoryConstants::new(&f, delta, 1.0, (100.0, 100.0)).unwrap()
    }

    #[test]
    fn hermite_recurrence() {
        for v in [-1.3, 0.0, 0.7, 2.0] {
            assert_eq!(hermite(0, v), 1.0);
            assert_eq!(hermite(1, v), v);
            assert!((hermite(2, v) - (v * v - 1.0)).abs() < 1e-15);
            assert!((hermite(3, v) - (v * v * v - 3.0 * v)).abs() < 1e-14);
            let h4 = v.powi(4) - 6.0 * v * v + 3.0;
            assert!((hermite(4, v) - h4).abs() < 1e-13);
        }
    }

    #[test]
    fn kappa_values() {
        assert!((kappa_beta(0).unwrap() - normal::FRAC_1_SQRT_2PI).abs() < 1e-12);
        assert!((kappa_beta(1).unwrap() - normal::pdf(1.0)).abs() < 1e-12);
        // Even β peak at v = 0 with |He_β(0)| = (β−1)!!.
        assert!((kappa_beta(2).unwrap() - normal::FRAC_1_SQRT_2PI).abs() < 1e-12);
        assert!((kappa_beta(4).unwrap() - 3.0 * normal::FRAC_1_SQRT_2PI).abs() < 1e-12);
        // High-precision root of the derivative of He_3 ρ.
        assert!((kappa_beta(3).unwrap() - 0.550_587_839_500_819_38).abs() < 1e-12);
        assert!((kappa_beta(9).unwrap() - 115.091_261_873_377_48).abs() < 1e-9);
        assert!(kappa_beta(BETA_MAX + 1).is_err());
    }

    #[test]
    fn zeta_values() {
        use std::f64::consts::PI;
        assert!((zeta(2.0).unwrap() - PI * PI / 6.0).abs() < 1e-13);
        assert!((zeta(1.5).unwrap() - 2.612_375_348_685_488_3).abs() < 1e-12);
        assert!((zeta(1.25).unwrap() - 4.595_111_825_842_943_4).abs() < 1e-12);
        assert!((zeta(1.000_001).unwrap() - 1_000_000.577_298_004_4).abs() < 1e-6);
        assert!(zeta(1.0).is_err());
    }

    #[test]
    fn product_weight_example() {
        let f = pca_factor(&MarketParams::default()).unwrap();
        let w = product_weights(&f);
        assert_eq!(w.dim(), 255);
        let want = (0.2 * 2.003_906_25f64.sqrt() / 3.0).powf(4.0 / 3.0);
        let mut eta = vec![false; 255];
        assert_eq!(w.gamma(&eta), 1.0);
        eta[0] = true;
        assert!((w.gamma(&eta) - want).abs() < 1e-15);
        eta[1] = true;
        let g1 = w.gamma(&eta);
        eta[0] = false;
        let g2 = w.gamma(&eta);
        assert!((g1 - want * g2).abs() < 1e-16);
    }

    #[test]
    fn omega_cases() {
        let r = (80.0, 120.0);
        assert_eq!(omega_q(0, Theta::One, r).unwrap(), 1.0);
        assert_eq!(omega_q(1, Theta::One, r).unwrap(), 1.0 / 80.0);
        assert_eq!(omega_q(0, Theta::XMinusPhi, r).unwrap(), 120.0);
        assert_eq!(omega_q(1, Theta::XMinusPhi, r).unwrap(), 1.0);
        assert!(omega_q(1, Theta::One, (0.0, 1.0)).is_err());
    }

    #[test]
    fn b_constant_single_dimension() {
        // d = 1 by hand: B_{0,e1} = (κ0 · 1 · 5 / M · Λ1)².
        let c = constants(2, 0.25);
        let m = c.lambda0.min(1.0);
        let want = (c.kappa[0] * 5.0 / m * c.lambda[1]).powi(2);
        let got = b_constant(0, &[true], Theta::One, &c).unwrap();
        assert!((got / want - 1.0).abs() < 1e-13);
        // θ = x − φ, q = 0 picks up Ω = b = 100.
        let got = b_constant(0, &[true], Theta::XMinusPhi, &c).unwrap();
        assert!((got / (want * 1e4) - 1.0).abs() < 1e-13);
        // q = 1, η = e1: κ-max over β ≤ 1, (2d+3)³, M², Ω = 1/a.
        let k = c.kappa[0].max(c.kappa[1]);
        let want = (k / 100.0 * 125.0 / (m * m) * c.lambda[1]).powi(2);
        let got = b_constant(1, &[true], Theta::One, &c).unwrap();
        assert!((got / want - 1.0).abs() < 1e-13);
        assert!(b_constant(0, &[false], Theta::One, &c).is_err());
    }

    #[test]
    fn cdf_pod_matches_direct_formula_for_all_subsets() {
        let c = constants(3, 0.25);
        let w = pod_weights(TargetKind::Cdf, &c, DEFAULT_MAX_ORDER).unwrap();
        let p = 2.0 * 0.75 / 2.5;
        let div = 2.0 * zeta(1.25).unwrap();
        for eta in [[false, false], [true, false], [false, true], [true, true]] {
            let l = eta.iter().filter(|&&b| b).count();
            let a = if l == 0 {
                1.0
            } else {
                let f = 8f64.powi(l as i32 - 1) * (1..l).product::<usize>() as f64;
                f * f * b_constant(0, &eta, Theta::One, &c).unwrap()
            };
            let want = (a / div.powi(l as i32)).powf(p);
            let got = w.gamma(&eta);
            assert!((got / want - 1.0).abs() < 1e-12, "{eta:?}: {got} vs {want}");
        }
    }

    #[test]
    fn price_pod_exact_and_majorant() {
        let c = constants(3, 0.25);
        let spec = pod_weights(TargetKind::Price, &c, DEFAULT_MAX_ORDER).unwrap();
        let WeightSpec::Pod(w) = &spec else { panic!() };
        let p = c.pod_exponent();
        let div = c.order_divisor().unwrap();
        let base = 2.0 * c.z_mean * c.z_mean * c.i1.iter().product::<f64>();
        assert!((w.gamma(&[false, false]) / base.powf(p) - 1.0).abs() < 1e-12);

        let eta = [true, false];
        let first = base * c.lambda[1].powi(2) * c.i2[0] / c.i1[1];
        let second = 2.0 * b_constant(0, &eta, Theta::XMinusPhi, &c).unwrap();
        let want = ((first + second) / div).powf(p);
        assert!((w.gamma(&eta) / want - 1.0).abs() < 1e-12);

        let maj: f64 = w.majorant_terms().iter().map(|t| t.value(&eta)).sum();
        assert!(maj >= w.gamma(&eta));
    }

    #[test]
    fn c2_scaling() {
        let f = pca_factor(&MarketParams::with_steps(4)).unwrap();
        let a = TheoryConstants::new(&f, 0.3, 1.0, (100.0, 100.0)).unwrap();
        let b = TheoryConstants::new(&f, 0.3, 5.0, (100.0, 100.0)).unwrap();
        let wa = pod_weights(TargetKind::Cdf, &a, 3).unwrap();
        let wb = pod_weights(TargetKind::Cdf, &b, 3).unwrap();
        let p = a.pod_exponent();
        for eta in [
            [true, false, false],
            [true, true, false],
            [true, true, true],
        ] {
            let l = eta.iter().filter(|&&x| x).count() as f64;
            let ratio = wb.gamma(&eta) / wa.gamma(&eta);
            assert!((ratio / 5f64.powf(-l * p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pdf_zero_order_is_b10() {
        let c = constants(4, 0.25);
        let w = pod_weights(TargetKind::Pdf, &c, 4).unwrap();
        let want = b_constant(1, &[false; 3], Theta::One, &c)
            .unwrap()
            .powf(c.pod_exponent());
        assert!((w.gamma(&[false; 3]) / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_scale_pod_weights_are_finite() {
        let c = constants(256, 0.25);
        for t in [TargetKind::Price, TargetKind::Cdf, TargetKind::Pdf] {
            pod_weights(t, &c, DEFAULT_MAX_ORDER).unwrap();
        }
    }
}
