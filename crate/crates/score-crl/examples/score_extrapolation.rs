//! Intervention extrapolation without CRL: the observed score difference of
//! an unseen double intervention equals the sum of its single-intervention
//! score differences.
//!
//! Run with: cargo run --release --example score_extrapolation

use score_crl::harness::{run_extrapolation, ExperimentConfig};

fn main() {
    let config = ExperimentConfig::from_toml_str(
        r#"
[experiment]
n = 5
d = 20
n_samples = 2000
graph_density = 0.5
n_graphs = 3
master_seed = 4

[scm]
family = "linear"
intervention = "hard"

[mixing]
family = "linear"

[score]
mode = "oracle"

[algorithm]
name = "lscalei"
"#,
    )
    .unwrap();

    let records = run_extrapolation(&config, None).unwrap();
    println!("pairs checked: {}", records.len());
    let max = records
        .iter()
        .map(|r| r.max_residual)
        .fold(0.0f64, f64::max);
    println!("worst residual across all pairs and samples: {max:.3e}");
    for r in records.iter().take(5) {
        println!(
            "  graph {} envs ({}, {}): max {:.2e} mean {:.2e}",
            r.graph_index, r.env_a, r.env_b, r.max_residual, r.mean_residual
        );
    }
}
