use preint_qmc::model::{pca_factor, BrownianFactor, MarketParams};
use preint_qmc::preintegrate::{
    preint_cdf, preint_pdf, preint_price, reference_preintegrate, solve_xi, Section, Target,
};
use preint_qmc::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn factor(m: usize) -> BrownianFactor {
    pca_factor(&MarketParams::with_steps(m)).unwrap()
}

fn random_y(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

#[test]
fn root_residuals_over_many_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for m in [2usize, 16, 64] {
        let f = factor(m);
        let mut y0y = vec![0.0; m];
        for _ in 0..10_000 {
            let y = random_y(&mut rng, m - 1);
            let x = 100.0 * (rng.sample::<f64, _>(StandardNormal) * 0.5).exp();
            let root = solve_xi(&f, x, &y).unwrap();
            y0y[0] = root.xi;
            y0y[1..].copy_from_slice(&y);
            let residual = (f.phi(&y0y).unwrap() - x).abs();
            assert!(
                residual <= 1e-11 * x.max(1.0),
                "m={m} x={x} residual={residual:e}"
            );
            assert!(root.dphi0_at_xi > 0.0);
        }
    }
}

#[test]
fn solver_rejects_non_positive_thresholds() {
    let f = factor(4);
    for x in [0.0, -3.0] {
        assert!(matches!(
            solve_xi(&f, x, &[0.0; 3]),
            Err(Error::Domain { .. })
        ));
        assert_eq!(preint_cdf(&f, x, &[0.0; 3]).unwrap(), 0.0);
        assert_eq!(preint_pdf(&f, x, &[0.0; 3]).unwrap(), 0.0);
    }
}

#[test]
fn closed_form_price_matches_quadrature() {
    let f = factor(16);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let target = Target::price(f.params());
    for _ in 0..1000 {
        let y = random_y(&mut rng, 15);
        let closed = preint_price(&f, &y).unwrap();
        let reference = reference_preintegrate(&f, target, &y).unwrap();
        assert!(
            (closed - reference).abs() <= 1e-10,
            "{closed} vs {reference}"
        );
    }
}

#[test]
fn closed_form_cdf_matches_quadrature() {
    let f = factor(16);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..200 {
        let y = random_y(&mut rng, 15);
        let x = 60.0 + 100.0 * rng.random::<f64>();
        let closed = preint_cdf(&f, x, &y).unwrap();
        let reference = reference_preintegrate(&f, Target::cdf(x), &y).unwrap();
        assert!((closed - reference).abs() <= 1e-10);
    }
}

#[test]
fn put_call_parity_of_the_section() {
    // Call minus put equals the conditional mean minus the strike.
    let f = factor(16);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let strike = 100.0;
    for _ in 0..50 {
        let y = random_y(&mut rng, 15);
        let section = Section::new(&f, &y).unwrap();
        let put = section.put(strike).unwrap();
        let mean = preint_qmc::quadrature::integrate_real_line(
            |t| section.value(t) * preint_qmc::normal::pdf(t),
            1e-11,
            4000,
        )
        .unwrap()
        .value;
        let xi = section.solve(strike).unwrap().xi;
        let call = preint_qmc::quadrature::integrate_lower_half_line(
            |t| (section.value(-t) - strike).max(0.0) * preint_qmc::normal::pdf(t),
            -xi,
            1e-11,
            4000,
        )
        .unwrap()
        .value;
        assert!(
            (call - (mean - strike + put)).abs() < 1e-8,
            "{call} {mean} {put}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn cdf_monotone_and_bounded(y in prop::collection::vec(-3.0f64..3.0, 15), x in 20.0f64..300.0) {
        let f = factor(16);
        let a = preint_cdf(&f, x, &y).unwrap();
        let b = preint_cdf(&f, x * 1.01, &y).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b >= a);
    }

    #[test]
    fn pdf_is_derivative_of_cdf(y in prop::collection::vec(-3.0f64..3.0, 15), x in 60.0f64..160.0) {
        let f = factor(16);
        let h = 1e-4;
        let fd = (preint_cdf(&f, x + h, &y).unwrap() - preint_cdf(&f, x - h, &y).unwrap()) / (2.0 * h);
        let pdf = preint_pdf(&f, x, &y).unwrap();
        prop_assert!(pdf >= 0.0);
        prop_assert!((pdf - fd).abs() <= 1e-6, "{} vs {}", pdf, fd);
    }

    #[test]
    fn price_within_strike(y in prop::collection::vec(-6.0f64..6.0, 15)) {
        let f = factor(16);
        let p = preint_price(&f, &y).unwrap();
        prop_assert!((0.0..=f.params().strike).contains(&p));
    }
}
