//! Rank-1 lattice rules: construction, shifted point sets and the map to
//! Gaussian space.
//!
//! A rank-1 lattice rule with prime modulus n and generating vector
//! z ∈ {1..n−1}^d uses the points `frac(k z / n)`, k = 0..n−1. Adding a
//! uniform random shift Δ modulo one gives an unbiased estimator; the
//! spread of the estimates over independent shifts measures the error.

mod cbc;
pub mod rng;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use cbc::{
    bernoulli_kernel, candidate_criteria, cbc_construct, cbc_construct_direct, cbc_construct_with,
    criterion, criterion_with_kernel, CbcPath, Kernel, TIE_TOLERANCE,
};
pub use rng::{sample_shifts, GaussianStream};

pub use crate::normal::inverse_cdf as inverse_normal_cdf;

use crate::error::{domain, Error, Result};
use crate::normal;
use crate::weights::WeightSpec;

/// Smallest uniform fed to the inverse normal cdf; only reached by the
/// unshifted origin.
pub const UNIFORM_FLOOR: f64 = 1.0 / 18_446_744_073_709_551_616.0;

/// A rank-1 lattice rule and the weights it was constructed for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeRule {
    pub n: u64,
    pub z: Vec<u64>,
    /// E²(z) at construction.
    pub criterion_value: f64,
    pub weights: WeightSpec,
}

impl LatticeRule {
    pub fn dim(&self) -> usize {
        self.z.len()
    }

    /// Writes `frac(k z / n + Δ)` into `out`.
    #[inline]
    pub fn point_into(&self, k: u64, shift: &[f64], out: &mut [f64]) {
        let inv = 1.0 / self.n as f64;
        for ((o, &zj), &dj) in out.iter_mut().zip(&self.z).zip(shift) {
            let r = (k * zj % self.n) as f64 * inv;
            let v = r + dj;
            *o = if v >= 1.0 { v - 1.0 } else { v };
        }
    }

    /// Writes Φ⁻¹ of the shifted point into `out`.
    #[inline]
    pub fn gaussian_point_into(&self, k: u64, shift: &[f64], out: &mut [f64]) {
        self.point_into(k, shift, out);
        for v in out.iter_mut() {
            *v = normal::inverse_cdf_unchecked(v.max(UNIFORM_FLOOR));
        }
    }
}

/// All n points of a shifted rule, row-major n × d.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedPointSet {
    pub n: usize,
    pub dim: usize,
    pub points: Vec<f64>,
    pub shift: Vec<f64>,
    /// Seed the shift was drawn with, if any.
    pub seed: Option<u64>,
}

impl ShiftedPointSet {
    pub fn point(&self, k: usize) -> &[f64] {
        &self.points[k * self.dim..(k + 1) * self.dim]
    }
}

/// Materialises the shifted point set of `rule`.
pub fn generate_points(rule: &LatticeRule, shift: &[f64]) -> Result<ShiftedPointSet> {
    if shift.len() != rule.dim() {
        return Err(Error::DimensionMismatch {
            what: "shift",
            expected: rule.dim(),
            got: shift.len(),
        });
    }
    if let Some(bad) = shift.iter().find(|d| !(0.0..1.0).contains(*d)) {
        return Err(domain(
            "shift",
            format!("entries must lie in [0, 1), got {bad}"),
        ));
    }
    let dim = rule.dim();
    let n = rule.n as usize;
    let mut points = vec![0.0; n * dim];
    if dim > 0 {
        for (k, row) in points.chunks_exact_mut(dim).enumerate() {
            rule.point_into(k as u64, shift, row);
        }
    }
    Ok(ShiftedPointSet {
        n,
        dim,
        points,
        shift: shift.to_vec(),
        seed: None,
    })
}

/// Deterministic trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut f = 3u64;
    while f * f <= n {
        if n % f == 0 {
            return false;
        }
        f += 2;
    }
    true
}

fn pow_mod(mut base: u64, mut exp: u64, n: u64) -> u64 {
    let mut acc = 1u64 % n;
    base %= n;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = (acc as u128 * base as u128 % n as u128) as u64;
        }
        base = (base as u128 * base as u128 % n as u128) as u64;
        exp >>= 1;
    }
    acc
}

/// Smallest primitive root modulo the prime n.
pub fn primitive_root(n: u64) -> u64 {
    debug_assert!(is_prime(n));
    if n == 2 {
        return 1;
    }
    let phi = n - 1;
    let mut factors = Vec::new();
    let mut rest = phi;
    let mut f = 2;
    while f * f <= rest {
        if rest % f == 0 {
            factors.push(f);
            while rest % f == 0 {
                rest /= f;
            }
        }
        f += 1;
    }
    if rest > 1 {
        factors.push(rest);
    }
    (2..n)
        .find(|&g| factors.iter().all(|&q| pow_mod(g, phi / q, n) != 1))
        .expect("a prime modulus has a primitive root")
}

/// Largest prime ≤ n, if any.
pub fn previous_prime(n: u64) -> Option<u64> {
    (2..=n).rev().find(|&p| is_prime(p))
}

/// File name for the cached generating vector of modulus n and `weights`.
pub fn cache_file_name(n: u64, weights: &WeightSpec) -> String {
    format!(
        "gv-{}-n{}-d{}-{:016x}.txt",
        weights.kind_name(),
        n,
        weights.dim(),
        weights.fingerprint()
    )
}

/// Writes the cache file: `n d`, then z, then the criterion value.
pub fn write_cache(path: &Path, rule: &LatticeRule) -> Result<()> {
    let mut text = format!("{} {}\n", rule.n, rule.dim());
    let z: Vec<String> = rule.z.iter().map(u64::to_string).collect();
    text.push_str(&z.join(" "));
    text.push('\n');
    let _ = writeln!(text, "{:.16e}", rule.criterion_value);
    std::fs::write(path, text).map_err(|e| cache_error(path, e.to_string()))
}

/// Contents of a cache file.
#[derive(Debug, Clone, PartialEq)]
pub struct CachedVector {
    pub n: u64,
    pub z: Vec<u64>,
    pub criterion_value: f64,
}

fn cache_error(path: &Path, reason: impl Into<String>) -> Error {
    Error::Cache {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

/// Parses a cache file written by [`write_cache`].
pub fn read_cache(path: &Path) -> Result<CachedVector> {
    let text = std::fs::read_to_string(path).map_err(|e| cache_error(path, e.to_string()))?;
    let mut lines = text.lines();
    let bad = |what: &str| cache_error(path, format!("malformed {what}"));
    let header: Vec<u64> = lines
        .next()
        .ok_or_else(|| bad("header"))?
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad("header"))?;
    let [n, d] = header[..] else {
        return Err(bad("header"));
    };
    let z: Vec<u64> = lines
        .next()
        .unwrap_or("")
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad("generating vector"))?;
    if z.len() as u64 != d || z.iter().any(|&zj| zj == 0 || zj >= n) {
        return Err(bad("generating vector"));
    }
    let criterion_value = lines
        .next()
        .ok_or_else(|| bad("criterion"))?
        .trim()
        .parse()
        .map_err(|_| bad("criterion"))?;
    Ok(CachedVector {
        n,
        z,
        criterion_value,
    })
}

/// Relative tolerance for accepting a cached criterion value.
pub const CACHE_TOLERANCE: f64 = 1e-12;

/// Loads the rule for (n, weights) from `cache_dir` if a matching file
/// exists and its criterion recomputes to the stored value; otherwise runs
/// the fast CBC construction and, with a cache directory, stores it.
pub fn load_or_construct(
    cache_dir: Option<&Path>,
    n: u64,
    weights: &WeightSpec,
) -> Result<LatticeRule> {
    let d = weights.dim();
    let path: Option<PathBuf> = cache_dir.map(|dir| dir.join(cache_file_name(n, weights)));
    if let Some(path) = path.as_deref().filter(|p| p.exists()) {
        if let Ok(cached) = read_cache(path) {
            if cached.n == n && cached.z.len() == d {
                let value = criterion(&cached.z, n, weights)?;
                let scale = value.abs().max(f64::MIN_POSITIVE);
                if (value - cached.criterion_value).abs() <= CACHE_TOLERANCE * scale {
                    return Ok(LatticeRule {
                        n,
                        z: cached.z,
                        criterion_value: value,
                        weights: weights.clone(),
                    });
                }
            }
        }
    }
    let rule = cbc_construct(d, n, weights)?;
    if let Some(path) = path {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| cache_error(dir, e.to_string()))?;
        }
        write_cache(&path, &rule)?;
    }
    Ok(rule)
}
