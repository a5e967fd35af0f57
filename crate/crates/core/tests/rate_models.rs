use proptest::prelude::*;
use purebirth::{ModelSpec, RateModel};

fn mixing(n: u64, lambda: f64, p: f64) -> RateModel {
    ModelSpec::hypergeometric(n, lambda, p).build().unwrap()
}

proptest! {
    #[test]
    fn mixing_rates_are_symmetric(n in 2u64..5000, lambda in 0.01f64..100.0, p in 0.001f64..=1.0) {
        let m = mixing(n, lambda, p);
        for k in m.transient_states() {
            prop_assert_eq!(m.rate_at(k).unwrap(), m.rate_at(n - k).unwrap());
            prop_assert!(m.rate_at(k).unwrap() > 0.0);
        }
        prop_assert_eq!(m.rate_at(n).unwrap(), 0.0);
    }

    #[test]
    fn rates_scale_linearly(n in 2u64..500, lambda in 0.01f64..100.0, p in 0.001f64..=1.0) {
        let full = mixing(n, lambda, p);
        let unit_p = mixing(n, lambda, 1.0);
        let unit_lambda = mixing(n, 1.0, p);
        for k in full.transient_states() {
            let r = full.rate_at(k).unwrap();
            let tol = 4.0 * f64::EPSILON * r;
            prop_assert!((r - p * unit_p.rate_at(k).unwrap()).abs() <= tol);
            prop_assert!((r - lambda * unit_lambda.rate_at(k).unwrap()).abs() <= tol);
        }
    }

    #[test]
    fn yule_matches_mixing_with_scaled_contact_rate(n in 2u64..3000, mu in 0.01f64..10.0, p in 0.001f64..=1.0) {
        let yule = ModelSpec::yule(n, mu, p).build().unwrap();
        let mix = mixing(n, n as f64 * mu, p);
        for k in 1..=n {
            prop_assert_eq!(yule.rate_at(k).unwrap(), mix.rate_at(k).unwrap());
        }
    }

    #[test]
    fn mixing_peak_is_at_half_population(n in 2u64..2000, lambda in 0.1f64..10.0, p in 0.01f64..=1.0) {
        let m = mixing(n, lambda, p);
        let max = m.transient_states().map(|k| m.rate_at(k).unwrap()).fold(0.0, f64::max);
        prop_assert_eq!(m.rate_at(n / 2).unwrap(), max);
        prop_assert_eq!(m.rate_at(n.div_ceil(2)).unwrap(), max);
    }

    #[test]
    fn power_law_rates_positive_below_cap(c in 0.01f64..100.0, e in -3.0f64..3.0, cap in 2u64..500) {
        let m = ModelSpec::power_law(c, e, Some(cap)).build().unwrap();
        for k in m.transient_states() {
            prop_assert!(m.rate_at(k).unwrap() > 0.0);
        }
        prop_assert_eq!(m.rate_at(cap).unwrap(), 0.0);
        prop_assert!(m.rate_at(cap + 1).is_err());
    }
}

#[test]
fn models_are_shareable_across_threads() {
    let m = std::sync::Arc::new(mixing(1000, 2.0, 0.31));
    let handles: Vec<_> = (0..4)
        .map(|i| {
            let m = m.clone();
            std::thread::spawn(move || m.rate_at(1 + i * 100).unwrap())
        })
        .collect();
    for (i, h) in handles.into_iter().enumerate() {
        assert_eq!(h.join().unwrap(), m.rate_at(1 + i as u64 * 100).unwrap());
    }
}
