use preint_qmc::model::{pca_factor, MarketParams};
use proptest::prelude::*;

fn covariance_error(m: usize, t: f64) -> f64 {
    let f = pca_factor(&MarketParams {
        t_expiry: t,
        ..MarketParams::with_steps(m)
    })
    .unwrap();
    let mut worst = 0.0f64;
    for j in 0..m {
        for k in 0..m {
            let got: f64 = (0..m).map(|i| f.a(j, i) * f.a(k, i)).sum();
            let want = t * (j.min(k) + 1) as f64 / m as f64;
            worst = worst.max((got - want).abs());
        }
    }
    worst
}

#[test]
fn factor_reproduces_brownian_covariance() {
    for m in [1, 2, 4, 16, 64, 256] {
        for t in [1.0, 2.5] {
            let err = covariance_error(m, t);
            assert!(err <= 1e-10 * t, "m={m} T={t}: {err:e}");
        }
    }
}

#[test]
fn three_step_covariance_matrix() {
    let f = pca_factor(&MarketParams::with_steps(3)).unwrap();
    let want = [[1.0, 1.0, 1.0], [1.0, 2.0, 2.0], [1.0, 2.0, 3.0]];
    for j in 0..3 {
        for k in 0..3 {
            let got: f64 = (0..3).map(|i| f.a(j, i) * f.a(k, i)).sum();
            assert!((got - want[j][k] / 3.0).abs() < 1e-12);
        }
    }
}

#[test]
fn phi_matches_extended_precision_value() {
    // 40-digit evaluation of the average for m = 3, y = (0.5, −0.2, 0.1).
    let f = pca_factor(&MarketParams::with_steps(3)).unwrap();
    let v = f.phi(&[0.5, -0.2, 0.1]).unwrap();
    let want = 113.179_305_332_999_696_85;
    assert!((v / want - 1.0).abs() < 1e-13, "{v}");
}

#[test]
fn mixed_derivative_matches_finite_differences() {
    let f = pca_factor(&MarketParams::with_steps(2)).unwrap();
    let h = 1e-3;
    let p = |a: f64, b: f64| f.phi(&[a, b]).unwrap();
    let fd = (p(h, h) - p(h, -h) - p(-h, h) + p(-h, -h)) / (4.0 * h * h);
    let exact = f.dphi(&[1, 1], &[0.0, 0.0]).unwrap();
    assert!((fd / exact - 1.0).abs() < 1e-5, "{fd} vs {exact}");
}

#[test]
fn phi_limits_in_first_coordinate() {
    // Move y0 until the flattest path exponent has shifted by 40.
    for m in [1usize, 16, 256] {
        let f = pca_factor(&MarketParams::with_steps(m)).unwrap();
        let slope = (0..m)
            .map(|k| f.sigma_row(k)[0])
            .fold(f64::INFINITY, f64::min);
        assert!(slope > 0.0);
        let mut y = vec![0.0; m];
        y[0] = -40.0 / slope;
        assert!(f.phi(&y).unwrap() < 1e-8 * f.z_mean(), "m={m}");
        y[0] = 40.0 / slope;
        assert!(f.phi(&y).unwrap() > 1e8 * f.z_mean(), "m={m}");
    }
}

#[test]
fn phi_rejects_wrong_length() {
    let f = pca_factor(&MarketParams::with_steps(4)).unwrap();
    assert!(f.phi(&[0.0; 3]).is_err());
    assert!(f.dphi(&[0; 3], &[0.0; 4]).is_err());
}

fn gaussian_vec(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-4.0f64..4.0, m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn phi_increasing_in_first_coordinate(y in gaussian_vec(16)) {
        let f = pca_factor(&MarketParams::with_steps(16)).unwrap();
        let mut up = y.clone();
        up[0] += 1e-3;
        prop_assert!(f.phi(&up).unwrap() > f.phi(&y).unwrap());
        let mut e0 = vec![0u32; 16];
        e0[0] = 1;
        prop_assert!(f.dphi(&e0, &y).unwrap() > 0.0);
    }

    #[test]
    fn derivative_bound(y in gaussian_vec(8), eta in prop::collection::vec(0u32..3, 8)) {
        let f = pca_factor(&MarketParams::with_steps(8)).unwrap();
        let bound: f64 = eta.iter().zip(f.lambda()).map(|(&e, l)| l.powi(e as i32)).product();
        let d = f.dphi(&eta, &y).unwrap().abs();
        prop_assert!(d <= bound * f.phi(&y).unwrap() * (1.0 + 1e-12));
    }
}
