//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.
//!
//! Used for the reference (oracle) evaluations: the preintegrated integrals
//! done the slow way and the weight-function moment identities. Not on any
//! hot path.

// Tabulated nodes and weights are kept digit for digit.
#![allow(clippy::excessive_precision)]

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub intervals: usize,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Piece {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Piece {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[a, b]` until the summed Kronrod–Gauss error
/// estimate drops below `abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Result<Quadrature> {
    let mut heap = BinaryHeap::new();
    let first = gk15(&f, a, b);
    let mut total_err = first.error;
    heap.push(first);
    while total_err > abs_tol {
        if heap.len() >= max_intervals {
            return Err(Error::OracleFailure {
                estimate: total_err,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            return Err(Error::OracleFailure {
                estimate: total_err,
                intervals: heap.len() + 1,
            });
        }
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        heap.push(left);
        heap.push(right);
        // Resum rather than update incrementally so roundoff in the running
        // total cannot keep the loop alive.
        total_err = heap.iter().map(|p| p.error).sum();
    }
    let mut pieces: Vec<Piece> = heap.into_vec();
    pieces.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = crate::summation::neumaier_sum(pieces.iter().map(|p| p.value));
    Ok(Quadrature {
        value,
        error_estimate: total_err,
        intervals: pieces.len(),
    })
}

/// ∫_{-∞}^{upper} f(t) dt via the substitution t = upper − s/(1−s).
pub fn integrate_lower_half_line<F: Fn(f64) -> f64>(
    f: F,
    upper: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Result<Quadrature> {
    integrate(
        |s| {
            let one_minus = 1.0 - s;
            let t = upper - s / one_minus;
            let v = f(t);
            if v == 0.0 {
                0.0
            } else {
                v / (one_minus * one_minus)
            }
        },
        0.0,
        1.0,
        abs_tol,
        max_intervals,
    )
}

/// ∫_{-∞}^{∞} f(t) dt, split at 0.
pub fn integrate_real_line<F: Fn(f64) -> f64>(
    f: F,
    abs_tol: f64,
    max_intervals: usize,
) -> Result<Quadrature> {
    let left = integrate_lower_half_line(&f, 0.0, 0.5 * abs_tol, max_intervals)?;
    let right = integrate_lower_half_line(|t| f(-t), 0.0, 0.5 * abs_tol, max_intervals)?;
    Ok(Quadrature {
        value: left.value + right.value,
        error_estimate: left.error_estimate + right.error_estimate,
        intervals: left.intervals + right.intervals,
    })
}
