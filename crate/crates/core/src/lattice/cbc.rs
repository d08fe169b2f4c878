//! Component-by-component construction of generating vectors.
//!
//! The quality criterion is the shift-averaged squared worst-case error in
//! the weighted Korobov space of smoothness one,
//!
//! ```text
//! E²(z) = (1/n) Σ_k Σ_{∅≠u} γ_u ∏_{j∈u} ω({k z_j / n}),
//! ```
//!
//! with kernel ω(t) = 2π² B₂(t) = 2π²(t² − t + 1/6) by default. For product
//! weights the inner sum is `∏_j (1 + γ_j ω) − 1`; for POD weights it is
//! `Σ_ℓ Γ_ℓ e_ℓ(k)` with `e_ℓ` the elementary symmetric polynomials of
//! `β_j ω({k z_j / n})`.
//!
//! Both forms are linear in the kernel of the coordinate being added, so
//! with the first s−1 components fixed the criterion for candidate z is
//!
//! ```text
//! E²_s(z) = E²_{s−1} + (1/n) Σ_k q_k ω({k z / n})
//! ```
//!
//! for a per-point vector q. The sum over k is a matrix–vector product with
//! the kernel matrix `ω({k z / n})`, which for prime n becomes a cyclic
//! correlation after reindexing both k and z by powers of a primitive root.
//! The fast path evaluates it with an FFT in O(n log n); the direct path
//! evaluates it entry by entry in O(n²).

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{is_prime, primitive_root, LatticeRule};
use crate::error::{domain, Error, Result};
use crate::summation::neumaier_sum;
use crate::weights::{PodTerm, WeightSpec};

/// A one-periodic shift-invariant kernel ω, called as `kernel(r, n)` for
/// ω(r/n) with 0 ≤ r < n so it can avoid the rounding of r/n.
pub type Kernel = fn(u64, u64) -> f64;

/// ω(r/n) = 2π²B₂(r/n), evaluated as (π²/3)(6r(r − n) + n²)/n².
///
/// The numerator is an exact integer for n below about 3.8·10⁷, which
/// keeps the small low-dimensional criteria accurate to a few ulps.
pub fn bernoulli_kernel(r: u64, n: u64) -> f64 {
    let (r, n) = (r as f64, n as f64);
    PI * PI / 3.0 * ((6.0 * r * (r - n) + n * n) / (n * n))
}

/// How the per-candidate criteria are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbcPath {
    /// Primitive-root reindexing and FFT correlation, O(n log n).
    Fast,
    /// Entry-by-entry kernel sums, O(n²).
    Direct,
}

/// Relative tolerance within which two candidates count as tied; the
/// smaller candidate then wins.
pub const TIE_TOLERANCE: f64 = 1e-10;

struct PodState {
    gamma: Vec<f64>,
    beta: Vec<f64>,
    /// e_ℓ(k) at index ℓ·n + k, ℓ = 0..=order.
    e: Vec<f64>,
}

enum State {
    /// p_k − 1 with p_k = ∏_j (1 + γ_j ω_j(k)); kept as the difference to
    /// avoid cancellation when the weights are small.
    Product {
        gamma: Vec<f64>,
        excess: Vec<f64>,
    },
    Pod(Vec<PodState>),
}

struct Criterion {
    n: usize,
    omega: Vec<f64>,
    state: State,
}

impl Criterion {
    fn new(n: u64, weights: &WeightSpec, kernel: Kernel) -> Result<Self> {
        check_modulus(n)?;
        weights.validate()?;
        let omega = (0..n).map(|r| kernel(r, n)).collect();
        let n = n as usize;
        let state = match weights {
            WeightSpec::Product { factors } => State::Product {
                gamma: factors.clone(),
                excess: vec![0.0; n],
            },
            WeightSpec::Pod(p) => State::Pod(
                p.majorant_terms()
                    .into_iter()
                    .map(|PodTerm { order, dims }| {
                        let mut e = vec![0.0; order.len() * n];
                        e[..n].fill(1.0);
                        PodState {
                            gamma: order,
                            beta: dims,
                            e,
                        }
                    })
                    .collect(),
            ),
        };
        Ok(Self { n, omega, state })
    }

    /// Current E² of the components added so far.
    fn value(&self) -> f64 {
        let n = self.n;
        let total = match &self.state {
            State::Product { excess, .. } => neumaier_sum(excess.iter().copied()),
            State::Pod(terms) => neumaier_sum((0..n).flat_map(|k| {
                terms.iter().flat_map(move |t| {
                    t.gamma
                        .iter()
                        .enumerate()
                        .skip(1)
                        .map(move |(l, g)| g * t.e[l * n + k])
                })
            })),
        };
        total / n as f64
    }

    /// q_k for coordinate s: E²_s(z) − E²_{s−1} = (1/n) Σ_k q_k ω(k z / n).
    fn increment_weights(&self, s: usize) -> Vec<f64> {
        let n = self.n;
        match &self.state {
            State::Product { gamma, excess } => {
                excess.iter().map(|x| gamma[s] * (1.0 + x)).collect()
            }
            State::Pod(terms) => {
                let mut q = vec![0.0; n];
                for t in terms {
                    let b = t.beta[s];
                    for (l, g) in t.gamma.iter().enumerate().skip(1) {
                        let prev = &t.e[(l - 1) * n..l * n];
                        for (qk, ek) in q.iter_mut().zip(prev) {
                            *qk += b * g * ek;
                        }
                    }
                }
                q
            }
        }
    }

    /// Appends coordinate s with generator z.
    fn push(&mut self, s: usize, z: u64) {
        let n = self.n;
        let zu = z as usize;
        match &mut self.state {
            State::Product { gamma, excess } => {
                let g = gamma[s];
                for (k, x) in excess.iter_mut().enumerate() {
                    let w = self.omega[k * zu % n];
                    *x += g * w * (1.0 + *x);
                }
            }
            State::Pod(terms) => {
                for t in terms {
                    let b = t.beta[s];
                    let top = t.gamma.len() - 1;
                    for k in 0..n {
                        let w = b * self.omega[k * zu % n];
                        for l in (1..=top).rev() {
                            t.e[l * n + k] += w * t.e[(l - 1) * n + k];
                        }
                    }
                }
            }
        }
    }
}

/// Precomputed FFT of the reindexed kernel for the fast path.
struct Circulant {
    n: usize,
    /// g^a mod n for a = 0..n−2.
    powers: Vec<usize>,
    kernel_hat: Vec<Complex<f64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Σ_{r=1}^{n−1} ω(r/n).
    kernel_sum: f64,
}

impl Circulant {
    fn new(n: u64, omega: &[f64]) -> Self {
        let g = primitive_root(n);
        let n = n as usize;
        let len = n - 1;
        let mut powers = Vec::with_capacity(len);
        let mut p = 1usize;
        for _ in 0..len {
            powers.push(p);
            p = p * g as usize % n;
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let mut kernel_hat: Vec<Complex<f64>> = powers
            .iter()
            .map(|&r| Complex::new(omega[r], 0.0))
            .collect();
        forward.process(&mut kernel_hat);
        Self {
            n,
            powers,
            kernel_hat,
            forward,
            inverse,
            kernel_sum: neumaier_sum(omega[1..].iter().copied()),
        }
    }

    /// Σ_k q_k ω(k z / n) for z = 1..n−1, indexed z − 1.
    fn scores(&self, q: &[f64], omega0: f64) -> Vec<f64> {
        let n = self.n;
        let len = n - 1;
        // Removing the mean of q first keeps the FFT's absolute roundoff
        // proportional to the spread of q rather than to its size.
        let mean = neumaier_sum(q[1..].iter().copied()) / len as f64;
        let mut buf: Vec<Complex<f64>> = self
            .powers
            .iter()
            .map(|&k| Complex::new(q[k] - mean, 0.0))
            .collect();
        self.forward.process(&mut buf);
        for (b, w) in buf.iter_mut().zip(&self.kernel_hat) {
            *b = b.conj() * w;
        }
        self.inverse.process(&mut buf);
        let constant = q[0] * omega0 + mean * self.kernel_sum;
        let mut out = vec![0.0; len];
        for (b, c) in buf.iter().enumerate() {
            // Candidate z = g^b: k z = g^{a+b}.
            out[self.powers[b] - 1] = constant + c.re / len as f64;
        }
        out
    }
}

fn direct_scores(q: &[f64], omega: &[f64]) -> Vec<f64> {
    let n = q.len();
    // Compensated, since the terms are O(1) while the score can be O(1/n).
    (1..n)
        .map(|z| neumaier_sum(q.iter().enumerate().map(|(k, qk)| qk * omega[k * z % n])))
        .collect()
}

fn check_modulus(n: u64) -> Result<()> {
    if n < 2 || !is_prime(n) {
        return Err(domain("n", format!("modulus must be prime, got {n}")));
    }
    if n > u32::MAX as u64 {
        return Err(domain("n", format!("modulus too large, got {n}")));
    }
    Ok(())
}

fn check_dims(d: usize, weights: &WeightSpec) -> Result<()> {
    if weights.dim() < d {
        return Err(Error::DimensionMismatch {
            what: "weights",
            expected: d,
            got: weights.dim(),
        });
    }
    Ok(())
}

fn check_vector(z: &[u64], n: u64) -> Result<()> {
    match z.iter().find(|&&zj| zj == 0 || zj >= n) {
        Some(bad) => Err(domain(
            "z",
            format!("entries must lie in 1..{n}, got {bad}"),
        )),
        None => Ok(()),
    }
}

/// E²(z) with the default kernel.
pub fn criterion(z: &[u64], n: u64, weights: &WeightSpec) -> Result<f64> {
    criterion_with_kernel(z, n, weights, bernoulli_kernel)
}

/// E²(z) for an arbitrary shift-invariant kernel.
pub fn criterion_with_kernel(
    z: &[u64],
    n: u64,
    weights: &WeightSpec,
    kernel: Kernel,
) -> Result<f64> {
    check_dims(z.len(), weights)?;
    let mut c = Criterion::new(n, weights, kernel)?;
    check_vector(z, n)?;
    for (s, &zs) in z.iter().enumerate() {
        c.push(s, zs);
    }
    Ok(c.value().max(0.0))
}

/// E² of `prefix` extended by each candidate z ∈ {1..n−1}, indexed z − 1.
pub fn candidate_criteria(
    prefix: &[u64],
    n: u64,
    weights: &WeightSpec,
    path: CbcPath,
) -> Result<Vec<f64>> {
    let s = prefix.len();
    check_dims(s + 1, weights)?;
    let mut c = Criterion::new(n, weights, bernoulli_kernel)?;
    check_vector(prefix, n)?;
    for (j, &zj) in prefix.iter().enumerate() {
        c.push(j, zj);
    }
    let q = c.increment_weights(s);
    let raw = match path {
        CbcPath::Fast => Circulant::new(n, &c.omega).scores(&q, c.omega[0]),
        CbcPath::Direct => direct_scores(&q, &c.omega),
    };
    let base = c.value();
    Ok(raw.iter().map(|r| base + r / c.n as f64).collect())
}

/// CBC construction of a d-dimensional rule with the fast path.
pub fn cbc_construct(d: usize, n: u64, weights: &WeightSpec) -> Result<LatticeRule> {
    cbc_construct_with(d, n, weights, bernoulli_kernel, CbcPath::Fast)
}

/// CBC construction with the O(d n²) reference path.
pub fn cbc_construct_direct(d: usize, n: u64, weights: &WeightSpec) -> Result<LatticeRule> {
    cbc_construct_with(d, n, weights, bernoulli_kernel, CbcPath::Direct)
}

/// CBC construction with an explicit kernel and evaluation path.
///
/// For each coordinate the candidate minimising the criterion is chosen;
/// candidates within [`TIE_TOLERANCE`] (relative) of the minimum count as
/// tied and the smallest wins, so the result does not depend on roundoff
/// in the fast path.
pub fn cbc_construct_with(
    d: usize,
    n: u64,
    weights: &WeightSpec,
    kernel: Kernel,
    path: CbcPath,
) -> Result<LatticeRule> {
    check_dims(d, weights)?;
    let mut c = Criterion::new(n, weights, kernel)?;
    let circulant = match path {
        CbcPath::Fast if d > 0 => Some(Circulant::new(n, &c.omega)),
        _ => None,
    };
    let mut z = Vec::with_capacity(d);
    for s in 0..d {
        let q = c.increment_weights(s);
        let scores = match &circulant {
            Some(circ) => circ.scores(&q, c.omega[0]),
            None => direct_scores(&q, &c.omega),
        };
        let base = c.value();
        let totals: Vec<f64> = scores.iter().map(|r| base + r / c.n as f64).collect();
        let best = pick_smallest_minimum(&totals);
        let zs = best as u64 + 1;
        c.push(s, zs);
        z.push(zs);
    }
    Ok(LatticeRule {
        n,
        z,
        criterion_value: c.value().max(0.0),
        weights: weights.clone(),
    })
}

fn pick_smallest_minimum(values: &[f64]) -> usize {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = TIE_TOLERANCE * min.abs();
    values
        .iter()
        .position(|&v| v <= min + tol)
        .expect("at least one candidate")
}
