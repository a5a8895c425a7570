//! The two statistical-diversity checkers: the score-difference rank
//! condition (full-rank variant) and the per-parent diversity condition for
//! soft interventions.
//!
//! Run with: cargo run --release --example assumption_checks

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use score_crl::graph::Dag;
use score_crl::scm::{
    check_assumption_full_rank, check_assumption_rank_two, EnvironmentSet, InterventionPolicy,
    InterventionType, LinearGaussianScm, QuadraticScm, Scm, ScmFamily,
};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let dag = Dag::complete(4);

    // Linear-Gaussian score differences have rank <= 2; quadratic models
    // reach the full |Pa+(target)|.
    for (name, scm, family) in [
        (
            "linear",
            Scm::Linear(LinearGaussianScm::sample(dag.clone(), &mut rng)),
            ScmFamily::Linear,
        ),
        (
            "quadratic",
            Scm::Quadratic(QuadraticScm::sample(dag.clone(), &mut rng)),
            ScmFamily::Quadratic,
        ),
    ] {
        let env_set = EnvironmentSet::atomic(
            scm,
            InterventionType::Soft,
            &InterventionPolicy::defaults(family),
            &mut rng,
        )
        .unwrap();
        println!("{name} model:");
        for m in 1..=4 {
            let check = check_assumption_full_rank(&env_set, m, 20_000, 0.01, &mut rng).unwrap();
            println!(
                "  env {m}: rank(R_Z) = {} vs |Pa+| = {} -> {}",
                check.rank,
                check.pa_plus,
                if check.pass {
                    "full rank"
                } else {
                    "rank deficient"
                }
            );
        }
    }

    // Soft interventions that only change the noise violate the per-parent
    // diversity condition (the score-change ratio is a constant).
    let scm = Scm::Linear(LinearGaussianScm::sample(dag, &mut rng));
    let halving = InterventionPolicy::defaults(ScmFamily::Linear);
    let noise_only = InterventionPolicy {
        soft_mechanism_scale: 1.0,
        soft_noise_multiplier: 2.0,
        ..halving
    };
    for (name, policy) in [("halved mechanism", halving), ("noise-only", noise_only)] {
        let env_set =
            EnvironmentSet::atomic(scm.clone(), InterventionType::Soft, &policy, &mut rng).unwrap();
        let m = 4;
        let verdict = check_assumption_rank_two(&env_set, m, 400, &mut rng).unwrap();
        println!("{name}: per-parent diversity {verdict:?}");
    }
}
