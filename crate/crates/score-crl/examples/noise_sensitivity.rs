//! Score-noise sensitivity: multiplicative noise on the exact scores with
//! variance swept over three decades; graph and latent errors grow with the
//! noise while the SNR axis falls.
//!
//! Run with: cargo run --release --example noise_sensitivity

use score_crl::harness::{run_sweep, ExperimentConfig, SweepAxis};

fn main() {
    let base = ExperimentConfig::from_toml_str(
        r#"
[experiment]
n = 5
d = 25
n_samples = 10000
graph_density = 0.5
n_graphs = 10
master_seed = 1

[scm]
family = "linear"
intervention = "hard"

[mixing]
family = "linear"

[score]
mode = "noisy"
noise_var = 0.001

[algorithm]
name = "lscalei"
"#,
    )
    .unwrap();

    let points = run_sweep(&base, SweepAxis::NoiseVar, &[1e-4, 1e-3, 1e-2], None, None).unwrap();
    println!(
        "{:>10} {:>9} {:>8} {:>10}",
        "noise_var", "snr_db", "shd", "l_norm"
    );
    for p in &points {
        let shd = p
            .summary
            .aggregates
            .iter()
            .find(|a| a.metric == "shd")
            .unwrap()
            .mean;
        let l_norm = p
            .summary
            .aggregates
            .iter()
            .find(|a| a.metric == "l_norm")
            .unwrap()
            .mean;
        println!(
            "{:>10.0e} {:>9.2} {:>8.3} {:>10.4}",
            p.value,
            p.mean_snr_db.unwrap(),
            shd,
            l_norm
        );
    }
}
