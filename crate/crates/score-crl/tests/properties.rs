//! Runs the registered property suite through the standard test runner and
//! checks that the suite actually detects breakage (mutation sanity).

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use score_crl::graph::sample_erdos_renyi;
use score_crl::linalg;
use score_crl::mixing::{LinearEncoder, LinearMix, Mixing};
use score_crl::proptests;

#[test]
fn full_property_suite_passes() {
    let report = proptests::run_property_suite(None);
    print!("{}", report.render());
    assert!(report.all_passed(), "property suite reported failures");
}

#[test]
fn suite_filter_unknown_name_runs_nothing() {
    let report = proptests::run_property_suite(Some("no_such_case"));
    assert!(report.results.is_empty());
}

/// Mutation sanity: a sign-flipped pull-back must fail the score-difference
/// transformation check, and the counterexample seed is reportable.
#[test]
fn broken_pullback_sign_is_detected() {
    let mut failing_seed = None;
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let _ = sample_erdos_renyi(4, 0.5, &mut rng);
        let mix = LinearMix::sample(4, 12, &mut rng).unwrap();
        let enc = LinearEncoder::new(mix.pinv().clone()).unwrap();
        let mixing = Mixing::Linear(mix);
        let mut max_resid = 0.0f64;
        for _ in 0..20 {
            let delta = DVector::from_fn(4, |_, _| rng.random_range(-2.0..2.0));
            let z = DVector::from_fn(4, |_, _| rng.random_range(-2.0..2.0));
            let pushed = mixing.score_diff_pushforward(&delta, &z).unwrap();
            // Deliberately flip the sign of the pull-back.
            let back = -enc.score_diff_pullback(&pushed);
            max_resid = max_resid.max((back - &delta).norm());
        }
        if max_resid > 1e-8 {
            failing_seed = Some(seed);
            break;
        }
    }
    let seed = failing_seed.expect("sign flip must violate the transform identity");
    println!("sign-flip mutation detected with counterexample seed {seed}");
}

/// The linear-algebra helpers shared by the suite keep their contracts.
#[test]
fn principal_angle_helpers_are_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let m = linalg::standard_normal_matrix(12, 3, &mut rng);
    let basis = linalg::psd_column_basis(&(&m * m.transpose()), 1e-9);
    assert_eq!(basis.ncols(), 3);
    assert_eq!(linalg::intersection_dim(&basis, &basis, 0.999), 3);
}
