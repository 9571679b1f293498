use collider_core::fixtures::{self, AGE, PROTEINURIA, SBP, SODIUM};
use collider_core::{analytic_collider_coef, sign_flip_boundary};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]
    #[test]
    fn closed_form_matches_population_regression(
        beta1 in -5.0f64..5.0,
        alpha1 in -5.0f64..5.0,
        alpha2 in -5.0f64..5.0,
        beta2 in 0.0f64..3.0,
    ) {
        let sem = fixtures::sodium_with(beta1, beta2, alpha1, alpha2);
        let fit = sem.population_ols(SBP, &[SODIUM, AGE, PROTEINURIA]).unwrap();
        let got = fit.coef(SODIUM).unwrap();
        prop_assert!((got - analytic_collider_coef(beta1, alpha1, alpha2)).abs() < 1e-9, "{}", got);
    }

    #[test]
    fn decreasing_in_alpha(beta1 in 0.01f64..10.0, a in 0.01f64..10.0, da in 0.001f64..5.0) {
        prop_assert!(analytic_collider_coef(beta1, a + da, a + da) < analytic_collider_coef(beta1, a, a));
    }
}

#[test]
fn sign_flip_at_square_root_of_effect() {
    for beta1 in [0.25, 1.0, 1.05, 2.0, 5.0] {
        let root = sign_flip_boundary(beta1).unwrap();
        assert!((root - f64::sqrt(beta1)).abs() < 1e-9, "{beta1}: {root}");
    }
    assert!(sign_flip_boundary(-1.0).is_err());
}

#[test]
fn reference_cells() {
    assert!((analytic_collider_coef(1.05, 2.8, 2.0) + 0.91).abs() < 1e-12);
    assert!((analytic_collider_coef(1.0, 2.0, 2.0) + 0.6).abs() < 1e-12);
    assert!((analytic_collider_coef(2.0, 1.0, 1.0) - 0.5).abs() < 1e-12);
    assert!((analytic_collider_coef(5.0, 0.5, 0.5) - 3.8).abs() < 1e-12);
    assert!((analytic_collider_coef(1.0, 5.0, 5.0) + 12.0 / 13.0).abs() < 1e-12);
}
