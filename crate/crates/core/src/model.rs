//! Discretised Black–Scholes average price as a function of Gaussian inputs.
//!
//! The Brownian path on `m` uniform timesteps is generated from `m` i.i.d.
//! standard normals through the explicit principal-components factor of its
//! covariance. The arithmetic average of the asset price is then
//!
//! ```text
//! φ(y) = (1/m) Σ_k S0 · exp((R − σ²/2)(k+1)T/m + σ A_k · y)
//! ```
//!
//! Column 0 of the factor is strictly positive, so φ is strictly increasing
//! in `y[0]`, which is what makes preintegration over that coordinate work.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Exponents are clamped to this magnitude before `exp`.
pub const EXPONENT_CLAMP: f64 = 700.0;

/// Black–Scholes economy and Asian put contract.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    /// Initial asset price S0.
    pub s0: f64,
    /// Risk-free rate R.
    pub r: f64,
    /// Volatility σ.
    pub sigma: f64,
    /// Expiry T.
    pub t_expiry: f64,
    /// Strike K.
    pub strike: f64,
    /// Number of averaging timesteps, `m = d + 1`.
    pub m: usize,
}

impl Default for MarketParams {
    fn default() -> Self {
        Self {
            s0: 100.0,
            r: 0.1,
            sigma: 0.2,
            t_expiry: 1.0,
            strike: 100.0,
            m: 256,
        }
    }
}

impl MarketParams {
    /// Default contract with a different timestep count.
    pub fn with_steps(m: usize) -> Self {
        Self {
            m,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive_finite("s0", self.s0)?;
        positive_finite("sigma", self.sigma)?;
        positive_finite("t_expiry", self.t_expiry)?;
        if !self.r.is_finite() {
            return Err(domain("r", format!("must be finite, got {}", self.r)));
        }
        if !self.strike.is_finite() {
            return Err(domain(
                "strike",
                format!("must be finite, got {}", self.strike),
            ));
        }
        if self.m == 0 {
            return Err(domain("m", "timestep count must be at least 1"));
        }
        Ok(())
    }

    /// Dimension left after preintegrating one coordinate.
    pub fn dim(&self) -> usize {
        self.m - 1
    }

    /// Discount factor e^{−RT}.
    pub fn discount(&self) -> f64 {
        (-self.r * self.t_expiry).exp()
    }
}

fn positive_finite(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(domain(
            name,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

/// From this many timesteps on, σ A y is computed by FFT instead of the
/// dense product.
pub const FFT_THRESHOLD: usize = 64;

/// σ A y as a sine transform.
///
/// With w_i = σ τ_d y_i / sin χ_i,
/// `(σ A y)_k = Σ_i w_i sin(π (k+1)(2i+1)/(2m+1))`, which is the imaginary
/// part of entry k+1 of an unnormalised inverse DFT of length 2(2m+1)
/// applied to the sequence holding w_i at the odd positions 2i+1.
#[derive(Clone)]
struct SineTransform {
    fft: Arc<dyn Fft<f64>>,
    scale: Vec<f64>,
}

impl std::fmt::Debug for SineTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SineTransform")
            .field("len", &self.fft.len())
            .finish()
    }
}

/// Per-worker buffers for [`BrownianFactor::exponents_into`].
#[derive(Debug, Clone, Default)]
pub struct PathScratch {
    buf: Vec<Complex<f64>>,
    work: Vec<Complex<f64>>,
}

/// PCA factor of the discrete Brownian covariance together with the
/// constants derived from it.
///
/// Immutable once built; evaluation methods take `&self` and the struct is
/// shared freely between worker threads.
#[derive(Debug, Clone)]
pub struct BrownianFactor {
    params: MarketParams,
    /// A, row-major m×m.
    a: Vec<f64>,
    /// σ·A, row-major m×m.
    sigma_a: Vec<f64>,
    /// (R − σ²/2)(k+1)T/m for each row k.
    drift: Vec<f64>,
    tau_d: f64,
    chi: Vec<f64>,
    lambda: Vec<f64>,
    z_mean: f64,
    transform: Option<SineTransform>,
}

/// Builds the PCA factor
/// `A[k][i] = τ_d · sin(2(k+1)χ_i) / sin(χ_i)` with
/// `τ_d = √(T/((d+1)(2d+3)))` and `χ_i = π(2i+1)/(2(2d+3))`.
pub fn pca_factor(params: &MarketParams) -> Result<BrownianFactor> {
    params.validate()?;
    let m = params.m;
    let d = m - 1;
    let two_d_3 = (2 * d + 3) as f64;
    let tau_d = (params.t_expiry / (m as f64 * two_d_3)).sqrt();
    let chi: Vec<f64> = (0..m)
        .map(|i| PI * (2 * i + 1) as f64 / (2.0 * two_d_3))
        .collect();

    let mut a = vec![0.0; m * m];
    for k in 0..m {
        let row = &mut a[k * m..(k + 1) * m];
        for (i, entry) in row.iter_mut().enumerate() {
            *entry = tau_d * (2.0 * (k + 1) as f64 * chi[i]).sin() / chi[i].sin();
        }
    }
    let sigma_a = a.iter().map(|v| params.sigma * v).collect();

    let mu = params.r - 0.5 * params.sigma * params.sigma;
    let drift: Vec<f64> = (0..m)
        .map(|k| mu * (k + 1) as f64 * params.t_expiry / m as f64)
        .collect();

    let lambda0 = params.sigma * tau_d * two_d_3;
    let lambda = (0..m).map(|i| lambda0 / (2 * i + 1) as f64).collect();
    let z_mean = drift.iter().map(|c| params.s0 * c.exp()).sum::<f64>() / m as f64;

    let transform = (m >= FFT_THRESHOLD).then(|| SineTransform {
        fft: FftPlanner::new().plan_fft_inverse(2 * (2 * m + 1)),
        scale: chi.iter().map(|c| params.sigma * tau_d / c.sin()).collect(),
    });

    Ok(BrownianFactor {
        params: *params,
        a,
        sigma_a,
        drift,
        tau_d,
        chi,
        lambda,
        z_mean,
        transform,
    })
}

impl BrownianFactor {
    pub fn params(&self) -> &MarketParams {
        &self.params
    }

    /// Number of timesteps m.
    pub fn m(&self) -> usize {
        self.params.m
    }

    /// Dimension after preintegration, d = m − 1.
    pub fn dim(&self) -> usize {
        self.params.m - 1
    }

    /// Factor entry A[k][i].
    pub fn a(&self, k: usize, i: usize) -> f64 {
        self.a[k * self.params.m + i]
    }

    /// Row k of A.
    pub fn row(&self, k: usize) -> &[f64] {
        let m = self.params.m;
        &self.a[k * m..(k + 1) * m]
    }

    /// Row k of σ·A.
    pub fn sigma_row(&self, k: usize) -> &[f64] {
        let m = self.params.m;
        &self.sigma_a[k * m..(k + 1) * m]
    }

    /// Drift term (R − σ²/2)(k+1)T/m of row k.
    pub fn drift(&self, k: usize) -> f64 {
        self.drift[k]
    }

    pub fn tau_d(&self) -> f64 {
        self.tau_d
    }

    pub fn chi(&self) -> &[f64] {
        &self.chi
    }

    /// Per-coordinate derivative bounds Λ_i = σ τ_d (2d+3)/(2i+1), i = 0..=d.
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// Λ_0 = σ τ_d (2d+3).
    pub fn lambda0(&self) -> f64 {
        self.lambda[0]
    }

    /// Z = (1/m) Σ_k S0 exp((R − σ²/2)(k+1)T/m), the value of φ at y = 0.
    pub fn z_mean(&self) -> f64 {
        self.z_mean
    }

    /// Exponent of row k (without the S0/m factor): drift + σ A_k · y.
    #[inline]
    pub fn row_exponent(&self, k: usize, y: &[f64]) -> f64 {
        self.drift[k] + dot(self.sigma_row(k), y)
    }

    fn check_len(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.params.m {
            return Err(Error::DimensionMismatch {
                what: "phi input",
                expected: self.params.m,
                got: y.len(),
            });
        }
        Ok(())
    }

    /// Buffers for [`BrownianFactor::exponents_into`].
    pub fn scratch(&self) -> PathScratch {
        match &self.transform {
            Some(t) => PathScratch {
                buf: vec![Complex::default(); t.fft.len()],
                work: vec![Complex::default(); t.fft.get_inplace_scratch_len()],
            },
            None => PathScratch::default(),
        }
    }

    /// Writes `drift_k + σ A_k · (y0, rest)` for every row k into `out`.
    ///
    /// Uses the sine transform for m ≥ [`FFT_THRESHOLD`] (O(m log m)) and
    /// the dense rows otherwise.
    pub fn exponents_into(
        &self,
        y0: f64,
        rest: &[f64],
        out: &mut [f64],
        scratch: &mut PathScratch,
    ) {
        let m = self.params.m;
        debug_assert_eq!(rest.len(), m - 1);
        debug_assert_eq!(out.len(), m);
        match &self.transform {
            Some(t) => {
                let buf = &mut scratch.buf;
                buf.fill(Complex::default());
                buf[1] = Complex::new(t.scale[0] * y0, 0.0);
                for (i, (&yi, &si)) in rest.iter().zip(&t.scale[1..]).enumerate() {
                    buf[2 * i + 3] = Complex::new(si * yi, 0.0);
                }
                t.fft.process_with_scratch(buf, &mut scratch.work);
                for (k, o) in out.iter_mut().enumerate() {
                    *o = self.drift[k] + buf[k + 1].im;
                }
            }
            None => {
                for (k, o) in out.iter_mut().enumerate() {
                    let row = self.sigma_row(k);
                    *o = self.drift[k] + row[0] * y0 + dot(&row[1..], rest);
                }
            }
        }
    }

    /// Average asset price φ(y) for y ∈ R^m.
    pub fn phi(&self, y: &[f64]) -> Result<f64> {
        self.check_len(y)?;
        Ok(self.phi_unchecked(y))
    }

    #[inline]
    pub(crate) fn phi_unchecked(&self, y: &[f64]) -> f64 {
        let m = self.params.m;
        let sum: f64 = (0..m).map(|k| clamped_exp(self.row_exponent(k, y))).sum();
        self.params.s0 / m as f64 * sum
    }

    /// Mixed derivative D^η φ(y) for a multi-index η of length m:
    /// `(1/m) Σ_k (Π_i (σA_{k,i})^{η_i}) S0 exp(...)`.
    pub fn dphi(&self, eta: &[u32], y: &[f64]) -> Result<f64> {
        self.check_len(y)?;
        if eta.len() != self.params.m {
            return Err(Error::DimensionMismatch {
                what: "multi-index",
                expected: self.params.m,
                got: eta.len(),
            });
        }
        let m = self.params.m;
        let mut sum = 0.0;
        for k in 0..m {
            let srow = self.sigma_row(k);
            let coeff: f64 = eta
                .iter()
                .zip(srow)
                .filter(|(&e, _)| e != 0)
                .map(|(&e, &s)| s.powi(e as i32))
                .product();
            sum += coeff * clamped_exp(self.row_exponent(k, y));
        }
        Ok(self.params.s0 / m as f64 * sum)
    }
}

#[inline]
pub(crate) fn clamped_exp(x: f64) -> f64 {
    x.clamp(-EXPONENT_CLAMP, EXPONENT_CLAMP).exp()
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four independent accumulators let the compiler vectorise the loop.
    let mut acc = [0.0f64; 4];
    let chunks_a = a.chunks_exact(4);
    let chunks_b = b.chunks_exact(4);
    let rem_a = chunks_a.remainder();
    let rem_b = chunks_b.remainder();
    for (ca, cb) in chunks_a.zip(chunks_b) {
        for j in 0..4 {
            acc[j] += ca[j] * cb[j];
        }
    }
    let mut tail = 0.0;
    for (x, y) in rem_a.iter().zip(rem_b) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[cfg(test)]
mod tests {
    use super::*;

    fn covariance_error(m: usize, t: f64) -> f64 {
        let params = MarketParams {
            t_expiry: t,
            ..MarketParams::with_steps(m)
        };
        let f = pca_factor(&params).unwrap();
        let mut worst: f64 = 0.0;
        for j in 0..m {
            for k in 0..m {
                let aat: f64 = (0..m).map(|i| f.a(j, i) * f.a(k, i)).sum();
                let sigma = t * (j.min(k) + 1) as f64 / m as f64;
                worst = worst.max((aat - sigma).abs());
            }
        }
        worst
    }

    #[test]
    fn one_step_factor_is_sqrt_t() {
        let f = pca_factor(&MarketParams::with_steps(1)).unwrap();
        assert!((f.a(0, 0) - 1.0).abs() < 1e-15);
        let f = pca_factor(&MarketParams {
            t_expiry: 4.0,
            ..MarketParams::with_steps(1)
        })
        .unwrap();
        assert!((f.a(0, 0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn three_step_covariance() {
        assert!(covariance_error(3, 1.0) < 1e-12);
    }

    #[test]
    fn factor_reproduces_covariance() {
        for m in [1, 2, 4, 16, 64] {
            assert!(covariance_error(m, 1.0) < 1e-10, "m = {m}");
            assert!(covariance_error(m, 2.5) < 2.5e-10, "m = {m}");
        }
    }

    #[test]
    fn first_column_positive_and_chi_in_range() {
        for m in [1, 2, 5, 64, 256] {
            let f = pca_factor(&MarketParams::with_steps(m)).unwrap();
            for k in 0..m {
                assert!(f.a(k, 0) > 0.0);
            }
            assert!(f.chi().iter().all(|&c| c > 0.0 && c < PI / 2.0));
        }
    }

    #[test]
    fn lambda_decreasing_and_bounded() {
        let p = MarketParams::default();
        // Λ0² = σ²T(2d+3)/(d+1): σ√(3T) for one step, then within
        // (σ√(2T), σ√(2.5T)] from two steps on.
        let one = pca_factor(&MarketParams { m: 1, ..p }).unwrap();
        assert!((one.lambda0() - p.sigma * (3.0 * p.t_expiry).sqrt()).abs() < 1e-15);
        for m in [2, 16, 256, 1000] {
            let f = pca_factor(&MarketParams { m, ..p }).unwrap();
            let l = f.lambda();
            assert!(l.windows(2).all(|w| w[1] < w[0]));
            let lo = p.sigma * (2.0 * p.t_expiry).sqrt();
            let hi = p.sigma * (2.5 * p.t_expiry).sqrt();
            assert!(l[0] > lo && l[0] <= hi * (1.0 + 1e-15), "m={m} Λ0={}", l[0]);
        }
    }

    #[test]
    fn sine_transform_matches_dense_rows() {
        for m in [FFT_THRESHOLD, 100, 256, 300] {
            let f = pca_factor(&MarketParams::with_steps(m)).unwrap();
            assert!(f.transform.is_some());
            let y: Vec<f64> = (0..m).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
            let mut out = vec![0.0; m];
            let mut scratch = f.scratch();
            f.exponents_into(y[0], &y[1..], &mut out, &mut scratch);
            for (k, o) in out.iter().enumerate() {
                let dense = f.row_exponent(k, &y);
                assert!(
                    (o - dense).abs() < 1e-13 * (1.0 + dense.abs()),
                    "m={m} k={k}"
                );
            }
        }
    }

    #[test]
    fn phi_at_origin_is_z() {
        let f = pca_factor(&MarketParams::with_steps(16)).unwrap();
        let v = f.phi(&[0.0; 16]).unwrap();
        assert!((v - f.z_mean()).abs() < 1e-13 * v);
        let f = pca_factor(&MarketParams::with_steps(1)).unwrap();
        assert!((f.phi(&[0.0]).unwrap() - 100.0 * 0.08f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn zero_multi_index_is_phi() {
        let f = pca_factor(&MarketParams::with_steps(4)).unwrap();
        let y = [0.3, -1.0, 0.2, 0.9];
        assert_eq!(f.dphi(&[0; 4], &y).unwrap(), f.phi(&y).unwrap());
    }

    #[test]
    fn rejects_bad_params() {
        let bad = [
            MarketParams {
                s0: 0.0,
                ..Default::default()
            },
            MarketParams {
                sigma: -0.1,
                ..Default::default()
            },
            MarketParams {
                t_expiry: 0.0,
                ..Default::default()
            },
            MarketParams {
                m: 0,
                ..Default::default()
            },
            MarketParams {
                r: f64::NAN,
                ..Default::default()
            },
        ];
        for p in bad {
            assert!(pca_factor(&p).is_err(), "{p:?}");
        }
        let f = pca_factor(&MarketParams::with_steps(3)).unwrap();
        assert!(f.phi(&[0.0; 2]).is_err());
    }
}
