//! Identities that tie several modules together.

use kwidth_core::analysis::{classify, decay_sweep, lr_error, sup_error, SweepOptions, DEFAULT_GRID};
use kwidth_core::approximant::{build, n_from_dim, PiecewiseApproximant, COEFF_TOL};
use kwidth_core::operator::{apply_original, apply_reference, closed_form_power_pair, OperatorParams, TestFunction};
use kwidth_core::specfun::hs_norm_squared;
use kwidth_core::spectral::hs_check;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(5))]

    #[test]
    fn original_and_tilde_variables_agree(
        alpha in 0.2f64..0.8,
        nu in 0.6f64..2.0,
        mu in 0.5f64..2.0,
        x in 0.05f64..0.95,
    ) {
        let params = OperatorParams::new(alpha).unwrap();
        let f = TestFunction::power_pair(nu, mu).unwrap();
        let direct = apply_original(&f, x, params, 1e-12).unwrap();
        let transformed = apply_reference(&f, 1.0 - x, params, 1e-12).unwrap();
        prop_assert!((direct - transformed).abs() <= 1e-9 * (1.0 + direct.abs()));
    }
}

#[test]
fn closed_form_tracks_reference_across_the_branch_switch() {
    let params = OperatorParams::from_beta(0.4).unwrap();
    let f = TestFunction::power_pair(1.3, 0.9).unwrap();
    for i in 1..=40 {
        let u = i as f64 / 40.0;
        let closed = closed_form_power_pair(u, 0.4, 1.3, 0.9).unwrap();
        let reference = apply_reference(&f, u, params, 1e-12).unwrap();
        assert!((closed - reference).abs() <= 1e-9, "u = {u}: {closed} vs {reference}");
    }
}

#[test]
fn nystrom_sum_matches_closed_norm_for_several_orders() {
    for alpha in [0.3, 0.5, 0.8] {
        let check = hs_check(alpha, 256, 40).unwrap();
        assert_eq!(check.closed_form, hs_norm_squared(alpha).unwrap());
        assert!(check.relative_gap < 0.02, "alpha = {alpha}: {}", check.relative_gap);
    }
}

#[test]
fn approximant_survives_serialisation_and_keeps_its_error() {
    let params = OperatorParams::new(0.5).unwrap();
    let f = TestFunction::power_pair(1.0, 2.0 / 3.0).unwrap();
    let phi = build(&f, params, 4, COEFF_TOL).unwrap();
    let restored = PiecewiseApproximant::from_json(&phi.to_json()).unwrap();
    assert_eq!(n_from_dim(restored.dimension()), 4);
    let a = sup_error(&f, &phi, params, DEFAULT_GRID).unwrap();
    let b = sup_error(&f, &restored, params, DEFAULT_GRID).unwrap();
    assert_eq!(a.total, b.total);
}

#[test]
fn sweep_rows_agree_with_direct_measurements() {
    let params = OperatorParams::new(0.5).unwrap();
    let f = TestFunction::power_pair(1.0, 2.0 / 3.0).unwrap();
    let regime = classify(0.5, 2.0, 3.0);
    let opts = SweepOptions::default();
    let rows = decay_sweep(&f, params, &regime, 3..=4, &opts).unwrap();
    for row in &rows {
        let phi = build(&f, params, row.n, opts.build.tol).unwrap();
        let direct = lr_error(&f, &phi, params, 3.0, opts.lr_tol).unwrap();
        assert_eq!(direct.total, row.error);
        let summed: f64 = direct.per_interval.iter().map(|&(_, e)| e).sum();
        assert!((summed.powf(1.0 / 3.0) - direct.total).abs() <= 1e-12 * direct.total);
    }
}
