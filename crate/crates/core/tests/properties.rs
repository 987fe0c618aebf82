use approx::assert_relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;

use fracdisp::dispersion::{h1_polynomial, hb_frank};
use fracdisp::measure::{fmt17, AtomicMeasure};
use fracdisp::scatdata::{AtomicSpectrum, ScatteringDensity};
use fracdisp::schrlimit::{coeff_alpha, sobolev_distance, SobolevParams};
use fracdisp::specfun::{frank_constant, omega};

fn measure() -> impl Strategy<Value = AtomicMeasure> {
    prop::collection::vec((-20.0..20.0f64, -3.0..3.0f64), 0..12)
        .prop_map(|atoms| AtomicMeasure::new("m", atoms).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fmt17_round_trips(x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
        prop_assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn measure_files_round_trip(m in measure()) {
        prop_assert_eq!(&AtomicMeasure::from_json(&m.to_json()).unwrap(), &m);
        prop_assert_eq!(&AtomicMeasure::from_csv("m", &m.to_csv()).unwrap(), &m);
    }

    #[test]
    fn spectrum_json_round_trips(k in 1.5..6.0f64, re in prop::collection::vec(-2.0..2.0f64, 1..6), im in -1.0..1.0f64) {
        let n_max = fracdisp::scatdata::largest_inside(k);
        let coeffs = re.iter().enumerate().map(|(i, &r)| (i as i64 % (n_max + 1), Complex64::new(r, im)));
        let a = AtomicSpectrum::new(k, coeffs).unwrap();
        prop_assert_eq!(AtomicSpectrum::from_json(&a.to_json()).unwrap(), a);
    }

    #[test]
    fn sobolev_distance_is_a_metric(mu in measure(), nu in measure(), rho in measure()) {
        let p = SobolevParams::new(-0.75).unwrap();
        let d_mn = sobolev_distance(&mu, &nu, p).unwrap();
        let d_nm = sobolev_distance(&nu, &mu, p).unwrap();
        prop_assert!(d_mn >= 0.0);
        prop_assert!((d_mn - d_nm).abs() <= 1e-9 * (1.0 + d_mn));
        prop_assert!(sobolev_distance(&mu, &mu, p).unwrap() <= 1e-7 * (1.0 + mu.total_variation()));
        let d_mr = sobolev_distance(&mu, &rho, p).unwrap();
        let d_rn = sobolev_distance(&rho, &nu, p).unwrap();
        prop_assert!(d_mn <= d_mr + d_rn + 1e-9);
    }

    #[test]
    fn alpha_is_even_and_vanishes_at_two_mod_four(r in 1i64..5000, b in 0.05..0.95f64) {
        prop_assert_eq!(coeff_alpha(r, b).unwrap(), coeff_alpha(-r, b).unwrap());
        if r % 4 == 2 {
            prop_assert_eq!(coeff_alpha(r, b).unwrap(), 0.0);
        } else {
            prop_assert!(coeff_alpha(r, b).unwrap() > 0.0);
        }
    }
}

#[test]
fn frank_constant_is_half_omega() {
    for b in [0.1, 0.25, 0.5, 0.75, 0.9] {
        assert_relative_eq!(frank_constant(b).unwrap(), 0.5 * omega(b).unwrap(), max_relative = 1e-14);
    }
}

#[test]
fn h1_has_no_linear_term_for_real_even_data() {
    let p = h1_polynomial(&ScatteringDensity::parabola(2.0).unwrap()).unwrap();
    assert!(p.c1.abs() < 1e-12);
    assert!(p.argmin().abs() < 1e-9);
}

#[test]
fn hb_is_positive_for_shifted_bumps() {
    for c in [-0.5, 0.0, 0.5] {
        let f = ScatteringDensity::bump(2.0, c, 1.0).unwrap();
        let v = hb_frank(&f, 0.5, 1.0).unwrap();
        assert!(v.is_finite() && v > 0.0);
    }
}
