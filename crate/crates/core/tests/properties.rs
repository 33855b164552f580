use hamburger::jacobi::{self, JacobiMatrix};
use hamburger::measures::{self, Measure};
use hamburger::moments;
use hamburger::num;
use hamburger::PrecisionConfig;
use proptest::prelude::*;
use rug::{Complex, Rational};

fn rat(num: i64, den: u32) -> Rational {
    Rational::from((num, den.max(1)))
}

prop_compose! {
    fn jacobi_matrix(max_n: usize)(n in 2..=max_n)(
        q in prop::collection::vec(-200i64..=200, n),
        b in prop::collection::vec(10i64..=300, n - 1),
    ) -> JacobiMatrix {
        JacobiMatrix::new(
            q.into_iter().map(|x| rat(x, 100)).collect(),
            b.into_iter().map(|x| rat(x, 100)).collect(),
            PrecisionConfig::default(),
        )
        .unwrap()
    }
}

prop_compose! {
    fn atomic_measure()(n in 3usize..=8)(
        pts in prop::collection::btree_set(-50i64..=50, n),
        wts in prop::collection::vec(1i64..=20, n),
    ) -> Measure {
        Measure::atomic(
            pts.into_iter().map(|x| rat(x, 10)).collect(),
            wts.into_iter().map(Rational::from).collect(),
            PrecisionConfig::rational(),
        )
        .unwrap()
    }
}

fn close(a: &Rational, b: &Rational, tol: f64) -> bool {
    let d = Rational::from(a - b).abs();
    let scale = Rational::from(a.abs_ref()).max(Rational::from(1));
    (d / scale).to_f64() <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn round_trip_recovers_coefficients(j in jacobi_matrix(8)) {
        let n = j.len();
        let s = moments::jacobi_to_moments(&j, 2 * n - 1).unwrap();
        let back = moments::moments_to_jacobi(&s, n).unwrap();
        for (x, y) in j.q().iter().zip(back.q()).chain(j.b().iter().zip(back.b())) {
            prop_assert!(close(x, y, 1e-40), "{x} vs {y}");
        }
    }

    #[test]
    fn hankel_determinants_of_matrix_moments_are_positive(j in jacobi_matrix(6)) {
        let n = j.len();
        let s = moments::jacobi_to_moments(&j, 2 * n - 2).unwrap().with_precision(PrecisionConfig::rational());
        prop_assert!(moments::validate_positive(&s, n - 1).unwrap());
    }

    #[test]
    fn weyl_radii_do_not_increase(j in jacobi_matrix(30), re in -3.0f64..3.0, im in 0.05f64..3.0) {
        let z = Complex::with_val(256, (re, im));
        let orders: Vec<usize> = (1..=j.len()).collect();
        let r = jacobi::weyl_radii(&j, &z, &orders).unwrap();
        for w in r.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn pi_is_real_on_conjugate_pairs(j in jacobi_matrix(10), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let z = Complex::with_val(256, (re, im));
        let zc = Complex::with_val(256, z.conj_ref());
        let a = jacobi::pi_eval(&j, &z, j.len()).unwrap();
        let b = jacobi::pi_eval(&j, &zc, j.len()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(x.real(), y.real());
            prop_assert_eq!(x.imag(), &Complex::with_val(256, -y).imag().clone());
        }
    }

    #[test]
    fn spectrum_is_a_probability_measure(j in jacobi_matrix(8)) {
        let mu = jacobi::truncation_spectrum(&j, j.len()).unwrap();
        prop_assert_eq!(mu.atom_count(), Some(j.len()));
        let mass = mu.mass().unwrap();
        prop_assert!(close(&mass, &Rational::from(1), 1e-60));
    }

    #[test]
    fn normalize_gives_unit_mass(mu in atomic_measure()) {
        let (norm, c) = measures::normalize(&mu).unwrap();
        prop_assert_eq!(norm.mass().unwrap(), Rational::from(1));
        prop_assert_eq!(c, mu.mass().unwrap());
    }

    #[test]
    fn power_lifts_compose(mu in atomic_measure(), a in -3i32..=3, b in -3i32..=3) {
        let (step, _) = measures::power_reweight(&measures::power_reweight(&mu, a).unwrap().0, b).unwrap();
        let (once, _) = measures::power_reweight(&mu, a + b).unwrap();
        prop_assert_eq!(step.atoms().unwrap(), once.atoms().unwrap());
    }

    #[test]
    fn exact_and_float_stieltjes_agree(mu in atomic_measure()) {
        let n = mu.atom_count().unwrap() - 1;
        let exact = measures::measure_to_jacobi(&mu, n).unwrap();
        let float = measures::measure_to_jacobi(&mu.clone().with_precision(PrecisionConfig::default()), n).unwrap();
        for (x, y) in exact.q().iter().zip(float.q()).chain(exact.b().iter().zip(float.b())) {
            prop_assert!(close(x, y, 1e-50), "{x} vs {y}");
        }
    }

    #[test]
    fn jacobi_json_round_trip(j in jacobi_matrix(8)) {
        let text = serde_json::to_string(&j.to_json()).unwrap();
        let back = JacobiMatrix::from_json(&serde_json::from_str(&text).unwrap(), PrecisionConfig::default()).unwrap();
        for (x, y) in j.q().iter().zip(back.q()).chain(j.b().iter().zip(back.b())) {
            prop_assert!(close(x, y, 1e-70));
        }
    }

    #[test]
    fn exact_decimal_round_trip(n in -1_000_000i64..1_000_000, d in 1u32..10_000) {
        let r = rat(n, d);
        prop_assert_eq!(num::parse_decimal(&num::format_exact(&r)).unwrap(), r);
    }
}
