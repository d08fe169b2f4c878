use preint_qmc::model::{pca_factor, MarketParams};
use preint_qmc::normal;
use preint_qmc::preintegrate::TargetKind;
use preint_qmc::quadrature::integrate_real_line;
use preint_qmc::weights::{
    i1, i2, kappa_beta, pod_weights, product_weights, psi, TheoryConstants, DEFAULT_MAX_ORDER,
};
use preint_qmc::WeightSpec;

fn unit(d: usize, i: usize) -> Vec<bool> {
    (0..d).map(|j| j == i).collect()
}

/// Far out the growth factor overflows while the density underflows; the
/// true product there is negligible.
fn tame(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

#[test]
fn i1_matches_quadrature() {
    let f = pca_factor(&MarketParams::default()).unwrap();
    for &lambda in f.lambda().iter().take(20).chain([0.05, 0.5, 1.0].iter()) {
        let g = |y: f64| tame((2.0 * lambda * y.abs()).exp() * normal::pdf(y));
        let q = integrate_real_line(g, 1e-13, 4000).unwrap();
        let closed = i1(lambda);
        assert!(closed > 1.0);
        assert!(
            (q.value - closed).abs() <= 1e-10 * closed.max(1.0),
            "Λ={lambda}: {} vs {closed}",
            q.value
        );
    }
}

#[test]
fn i2_matches_quadrature() {
    for m in [2usize, 16, 256] {
        let f = pca_factor(&MarketParams::with_steps(m)).unwrap();
        let l0 = f.lambda0();
        for i in 1..m.min(12) {
            let li = f.lambda()[i];
            let g = |y: f64| tame((2.0 * li * y.abs()).exp() * psi(l0, y));
            let q = integrate_real_line(g, 1e-13, 4000).unwrap();
            assert!((q.value - i2(i)).abs() <= 1e-10, "m={m} i={i}: {}", q.value);
        }
    }
}

#[test]
fn psi_is_normalised() {
    for m in [1usize, 16, 256] {
        let l0 = pca_factor(&MarketParams::with_steps(m)).unwrap().lambda0();
        let q = integrate_real_line(|y| psi(l0, y), 1e-14, 4000).unwrap();
        assert!((q.value - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn kappa_low_orders() {
    let k0 = kappa_beta(0).unwrap();
    assert!((k0 - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() <= 1e-12);
    assert!((kappa_beta(1).unwrap() - normal::pdf(1.0)).abs() <= 1e-12);
    // |v² − 1|ρ(v) peaks at v = 0 with value ρ(0), beating the outer
    // maxima at v² = 3 where it is 2ρ(√3).
    assert!((kappa_beta(2).unwrap() - k0).abs() <= 1e-12);
    assert!(kappa_beta(11).is_err());
}

#[test]
fn product_weights_decay_like_power() {
    let f = pca_factor(&MarketParams::default()).unwrap();
    let WeightSpec::Product { factors } = product_weights(&f) else {
        panic!("expected product weights");
    };
    assert_eq!(factors.len(), 255);
    assert!(factors.windows(2).all(|w| w[1] < w[0]));
    let want = (0.2 * 2.003_906_25f64.sqrt() / 3.0).powf(4.0 / 3.0);
    assert!((factors[0] - want).abs() <= 1e-14 * want);
    // j^{4/3} γ_j tends to a constant.
    let tail: Vec<f64> = [100usize, 200, 254]
        .iter()
        .map(|&j| factors[j] * ((j + 1) as f64).powf(4.0 / 3.0))
        .collect();
    assert!((tail[2] / tail[0] - 1.0).abs() < 0.01);
}

#[test]
fn pod_tends_to_product_as_delta_vanishes() {
    let f = pca_factor(&MarketParams::with_steps(32)).unwrap();
    let c = TheoryConstants::new(&f, 1e-6, 1.0, (100.0, 100.0)).unwrap();
    let w = pod_weights(TargetKind::Cdf, &c, DEFAULT_MAX_ORDER).unwrap();
    let d = f.dim();
    let lam = &f.lambda()[1..];
    for (i, j) in [(0, 1), (0, 10), (3, 30), (15, 16)] {
        let got = w.gamma(&unit(d, i)) / w.gamma(&unit(d, j));
        let want = (lam[i] / lam[j]).powf(4.0 / 3.0);
        assert!(
            (got / want - 1.0).abs() <= 1e-3,
            "({i},{j}): {got} vs {want}"
        );
    }
}

#[test]
fn pod_weights_scale_with_c2() {
    let f = pca_factor(&MarketParams::with_steps(8)).unwrap();
    let delta = 0.25;
    let a = pod_weights(
        TargetKind::Cdf,
        &TheoryConstants::new(&f, delta, 1.0, (90.0, 110.0)).unwrap(),
        4,
    )
    .unwrap();
    let b = pod_weights(
        TargetKind::Cdf,
        &TheoryConstants::new(&f, delta, 3.0, (90.0, 110.0)).unwrap(),
        4,
    )
    .unwrap();
    let p = 2.0 * (1.0 - delta) / (3.0 - 2.0 * delta);
    let eta = [true, false, true, true, false, false, false];
    let ratio = b.gamma(&eta) / a.gamma(&eta);
    assert!((ratio - 3f64.powf(-3.0 * p)).abs() <= 1e-12 * ratio);
    assert_eq!(a.gamma(&[false; 7]), 1.0);
}
