use frontlab_core::drift::{blocking_criterion, DriftTerm, Verdict, TRACE_CONSTANT};
use frontlab_core::{make_cubic, BlockingConstants};
use proptest::prelude::*;

fn sharp_concentration(k: f64, eps: f64) -> f64 {
    eps / k * k.exp_m1()
}

/// `∫_a^b k` by composite Simpson with many panels.
fn integral_of_k(d: &DriftTerm, a: f64, b: f64) -> f64 {
    let n = 20_000;
    let h = (b - a) / n as f64;
    let mut s = d.k(a) + d.k(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * d.k(a + i as f64 * h);
    }
    s * h / 3.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn log_psi_differences_give_the_drift_integral(
        amplitude in 0.0f64..5.0,
        x0 in 0.2f64..3.0,
        u in 0.0f64..1.0,
        v in 0.0f64..1.0,
    ) {
        let d = DriftTerm::gaussian_bump(amplitude, x0, None, None).unwrap();
        let (a, b) = (-x0 - 0.5 + (x0 + 1.0) * u.min(v), -x0 - 0.5 + (x0 + 1.0) * u.max(v));
        prop_assert!(d.psi(a) > 0.0 && d.psi(b) > 0.0);
        let lhs = d.log_psi(b) - d.log_psi(a);
        prop_assert!((lhs + integral_of_k(&d, a, b)).abs() < 1e-9, "{} vs {}", lhs, -integral_of_k(&d, a, b));
    }

    #[test]
    fn mollified_concentration_converges_to_the_sharp_form(k in 0.5f64..25.0, eps in 1e-4f64..1.0) {
        let exact = sharp_concentration(k, eps);
        let mut last = f64::INFINITY;
        for divisor in [5.0, 10.0, 25.0, 50.0, 100.0, 1000.0] {
            let d = DriftTerm::mollified_indicator(k, eps, eps / divisor).unwrap();
            let err = ((d.concentration_integral() - exact) / exact).abs();
            prop_assert!(err < last, "not monotone at eps/{}: {} after {}", divisor, err, last);
            last = err;
        }
    }

    /// The mollifier spreads each edge of `(K/ε) χ_[-ε-s,-s]` symmetrically
    /// over `2s` and adds flat margins of width `s`, so the first-order
    /// effect of smoothing is the margins: `s + (ε/K)(e^K - 1) + s e^K`.
    #[test]
    fn mollified_concentration_matches_the_shifted_sharp_form(k in 0.5f64..10.0, eps in 1e-4f64..1.0) {
        let s = eps / 100.0;
        let d = DriftTerm::mollified_indicator(k, eps, s).unwrap();
        let matched = s + sharp_concentration(k, eps) + s * k.exp();
        let err = ((d.concentration_integral() - matched) / matched).abs();
        prop_assert!(err < 1e-3, "relative error {}", err);
    }

    #[test]
    fn delta_matches_its_closed_form(k in 0.5f64..25.0, eps in 1e-4f64..1.0, norm in 0.1f64..10.0) {
        let nl = make_cubic(0.25).unwrap();
        let c = BlockingConstants::compute(&nl).unwrap();
        let d = DriftTerm::sharp_indicator(k, eps).unwrap().with_psi_normalization(norm).unwrap();
        let r = blocking_criterion(&c, &d, TRACE_CONSTANT);
        let conc = sharp_concentration(k, eps);
        let expected = c.alpha * norm.sqrt() / (c.norm_f_double_prime * (2.0 + TRACE_CONSTANT.max(conc.sqrt())));
        prop_assert!(((r.delta - expected) / expected).abs() < 1e-9);
    }
}

#[test]
fn verdict_is_monotone_in_the_amplitude() {
    let nl = make_cubic(0.25).unwrap();
    let c = BlockingConstants::compute(&nl).unwrap();
    // For large K the right-hand side tends to eps (1/K + 1/100), so only
    // eps below about 1.6e-4 / 0.11 ~ 1.4e-3 can certify at all.
    for eps in [1e-4, 3e-4, 5e-4] {
        let mut certified = false;
        let mut last_rhs = f64::INFINITY;
        for i in 0..200 {
            let k = 0.5 * i as f64 + 0.5;
            let d = DriftTerm::mollified_indicator(k, eps, eps / 100.0).unwrap();
            let r = blocking_criterion(&c, &d, TRACE_CONSTANT);
            if certified {
                assert_eq!(r.verdict, Verdict::BlockingCertified, "lost certification at K = {k}, eps = {eps}");
            }
            certified |= r.verdict == Verdict::BlockingCertified;
            assert!(r.rhs < last_rhs, "rhs not decreasing at K = {k}, eps = {eps}");
            last_rhs = r.rhs;
        }
        assert!(certified, "never certified for eps = {eps}");
    }
}
