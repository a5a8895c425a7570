//! Observed-space score-difference providers: the exact oracle, the empirical
//! Gaussian (precision-matrix) estimator, and the controlled-noise model,
//! together with dimensionality reduction, intervention extrapolation, and the
//! on-disk dataset dump format.

use crate::linalg;
use crate::mixing::{Mixing, MixingError};
use crate::scm::{EnvironmentSet, ScmError};
use crate::seeding;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error(transparent)]
    Scm(#[from] ScmError),
    #[error(transparent)]
    Mixing(#[from] MixingError),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("observational sample covariance has rank < {needed} (cannot reduce dimension)")]
    RankDeficientSamples { needed: usize },
    #[error("{mode} scores require linear mixing")]
    NeedsLinearMixing { mode: &'static str },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("dump manifest error: {0}")]
    Manifest(String),
}

/// How score differences are produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreMode {
    /// Exact scores from the ground-truth model.
    Oracle,
    /// Per-environment sample precision matrices (linear-Gaussian only).
    GaussianEstimate,
    /// Oracle scores with multiplicative noise `s · (1 + ξ)`, `ξ ~ N(0, σ²)`,
    /// redrawn per evaluation.
    Noisy { noise_var: f64 },
}

/// Score differences for one environment pair, evaluated row-wise at the
/// observational samples. The convention is `diffs = s^a − s^b`.
#[derive(Debug, Clone)]
pub struct ScoreDiffBlock {
    pub env_a: usize,
    pub env_b: usize,
    pub diffs: DMatrix<f64>,
}

/// Score-difference evaluations at the observational samples, plus the
/// samples themselves, in either full `d`-dimensional or reduced coordinates.
#[derive(Debug, Clone)]
pub struct ScoreDiffDataset {
    /// Coordinate dimension of `x` and all diff blocks.
    pub dim: usize,
    /// Observational samples, one row per sample.
    pub x: DMatrix<f64>,
    pub blocks: Vec<ScoreDiffBlock>,
    /// Orthonormal reduction basis (`d × n`) when the data was reduced.
    pub basis: Option<DMatrix<f64>>,
    /// Empirical signal-to-noise ratio in dB for noisy-mode datasets.
    pub snr_db: Option<f64>,
}

impl ScoreDiffDataset {
    pub fn block(&self, env_a: usize, env_b: usize) -> Option<&ScoreDiffBlock> {
        self.blocks
            .iter()
            .find(|b| b.env_a == env_a && b.env_b == env_b)
    }

    pub fn n_samples(&self) -> usize {
        self.x.nrows()
    }
}

/// Everything a CRL algorithm consumes for one experiment: the score
/// differences plus the per-environment observed samples (reduced when the
/// dataset is reduced).
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub dataset: ScoreDiffDataset,
    /// Observed samples per environment, index-aligned with the environment
    /// set; in the same coordinates as `dataset.x`.
    pub env_observed: Vec<DMatrix<f64>>,
}

/// Exact observed-space score difference for one environment pair evaluated
/// at observed samples `x` (which must lie in the image of the mixing):
/// rows are `[J_g(z)†]ᵀ · (s^a(z) − s^b(z))` with `z = g⁻¹(x)`.
pub fn oracle_score_diff(
    env_set: &EnvironmentSet,
    mixing: &Mixing,
    pair: (usize, usize),
    x: &DMatrix<f64>,
) -> Result<DMatrix<f64>, ScoreError> {
    let z = mixing.inverse_batch(x)?;
    oracle_score_diff_at_latents(env_set, mixing, pair, &z)
}

/// Same as [`oracle_score_diff`] but takes the latent evaluation points
/// directly (equal to `g⁻¹(x)` for in-image samples).
pub fn oracle_score_diff_at_latents(
    env_set: &EnvironmentSet,
    mixing: &Mixing,
    (a, b): (usize, usize),
    z: &DMatrix<f64>,
) -> Result<DMatrix<f64>, ScoreError> {
    let diffs_z = env_set.latent_score_diffs(a, b, z)?;
    match mixing {
        Mixing::Linear(lin) => Ok(diffs_z * lin.pinv()),
        Mixing::TanhGlm(_) => {
            let n_s = z.nrows();
            let d = mixing.observed_dim();
            let mut out = DMatrix::zeros(n_s, d);
            for s in 0..n_s {
                let zs = z.row(s).transpose();
                let dx = mixing.score_diff_pushforward(&diffs_z.row(s).transpose(), &zs)?;
                out.row_mut(s).copy_from(&dx.transpose());
            }
            Ok(out)
        }
    }
}

/// Exact per-environment observed scores under linear mixing:
/// `S_X = S_Z · G†` row-wise (the log-volume term vanishes for linear maps).
pub fn observed_scores_linear(
    env_set: &EnvironmentSet,
    mixing: &Mixing,
    env: usize,
    z_eval: &DMatrix<f64>,
) -> Result<DMatrix<f64>, ScoreError> {
    let Mixing::Linear(lin) = mixing else {
        return Err(ScoreError::NeedsLinearMixing {
            mode: "per-environment observed",
        });
    };
    let sz = env_set.env(env)?.latent_scores(z_eval)?;
    Ok(sz * lin.pinv())
}

/// Empirical Gaussian score difference: per environment, the sample
/// covariance is estimated from that environment's samples and
/// pseudo-inverted; the difference of `−Θ̂·x` evaluations is taken at the
/// observational samples.
pub fn gaussian_score_diff(
    x_env_a: &DMatrix<f64>,
    x_env_b: &DMatrix<f64>,
    x_eval: &DMatrix<f64>,
) -> Result<DMatrix<f64>, ScoreError> {
    let dim = x_eval.ncols();
    for xs in [x_env_a, x_env_b] {
        if xs.ncols() != dim {
            return Err(ScoreError::ShapeMismatch(format!(
                "environment samples have dim {}, evaluation points have dim {dim}",
                xs.ncols()
            )));
        }
        if xs.nrows() < dim {
            return Err(ScoreError::TooFewSamples {
                needed: dim,
                got: xs.nrows(),
            });
        }
    }
    let theta_a = linalg::pseudo_inverse(&linalg::covariance_mle(x_env_a));
    let theta_b = linalg::pseudo_inverse(&linalg::covariance_mle(x_env_b));
    // s^a − s^b = (Θ̂_b − Θ̂_a) · x, row-wise.
    Ok(x_eval * (theta_b - theta_a).transpose())
}

/// Multiplies every score entry by `1 + σ·η` with standard normal `η` drawn
/// fresh per evaluation. Returns the perturbed matrix together with the
/// accumulated signal and noise energies for SNR reporting.
pub fn perturb_scores<R: Rng + ?Sized>(
    scores: &DMatrix<f64>,
    noise_var: f64,
    rng: &mut R,
) -> (DMatrix<f64>, f64, f64) {
    let sigma = noise_var.sqrt();
    let mut signal = 0.0;
    let mut noise = 0.0;
    let perturbed = scores.map(|s| {
        let eta: f64 = rng.sample(StandardNormal);
        let xi = sigma * eta;
        signal += s * s;
        noise += (s * xi) * (s * xi);
        s * (1.0 + xi)
    });
    (perturbed, signal, noise)
}

/// Orthonormal basis of the top-`n` column space of the observational sample
/// second moment; samples and score differences are re-expressed in it.
pub fn reduce_dimension(
    x: &DMatrix<f64>,
    diffs: &[&DMatrix<f64>],
    n: usize,
) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>, DMatrix<f64>), ScoreError> {
    if x.nrows() < n {
        return Err(ScoreError::TooFewSamples {
            needed: n,
            got: x.nrows(),
        });
    }
    let moment = linalg::second_moment(x);
    let (vals, vecs) = linalg::sym_eig_desc(&moment);
    if vals[n - 1] <= 1e-12 * vals[0].max(1e-300) {
        return Err(ScoreError::RankDeficientSamples { needed: n });
    }
    let basis = vecs.columns(0, n).into_owned();
    let x_red = x * &basis;
    let diffs_red = diffs.iter().map(|d| *d * &basis).collect();
    Ok((x_red, diffs_red, basis))
}

/// Additivity of single-intervention score differences: the score difference
/// of the unseen double intervention versus observational equals the
/// elementwise sum of the single-node differences.
pub fn extrapolate_score_diff(
    d1: &DMatrix<f64>,
    d2: &DMatrix<f64>,
) -> Result<DMatrix<f64>, ScoreError> {
    if d1.shape() != d2.shape() {
        return Err(ScoreError::ShapeMismatch(format!(
            "{:?} vs {:?}",
            d1.shape(),
            d2.shape()
        )));
    }
    Ok(d1 + d2)
}

/// Builds the score-difference dataset for the requested environment pairs.
///
/// `latents[k]` holds the latent samples of environment `k`; evaluation points
/// are always the observational samples (`latents[0]`). When `reduce` is set
/// (linear mixing only) everything is expressed in the top-`n` basis of the
/// observational samples. The noisy mode draws its perturbations from a
/// dedicated stream of `seed`.
pub fn build_dataset(
    env_set: &EnvironmentSet,
    mixing: &Mixing,
    mode: ScoreMode,
    latents: &[DMatrix<f64>],
    pairs: &[(usize, usize)],
    reduce: bool,
    seed: u64,
) -> Result<PreparedData, ScoreError> {
    let n = env_set.n_nodes();
    if latents.len() != env_set.n_envs() {
        return Err(ScoreError::ShapeMismatch(format!(
            "{} latent blocks for {} environments",
            latents.len(),
            env_set.n_envs()
        )));
    }
    if reduce && !mixing.is_linear() {
        return Err(ScoreError::NeedsLinearMixing {
            mode: "reduced-dimension",
        });
    }
    match mode {
        ScoreMode::GaussianEstimate | ScoreMode::Noisy { .. } if !mixing.is_linear() => {
            let name = if matches!(mode, ScoreMode::GaussianEstimate) {
                "gaussian-estimate"
            } else {
                "noisy"
            };
            return Err(ScoreError::NeedsLinearMixing { mode: name });
        }
        _ => {}
    }

    let z_obs = &latents[0];
    let x_obs = mixing.forward_batch(z_obs)?;

    // Reduction basis from the observational samples.
    let basis = if reduce {
        let moment = linalg::second_moment(&x_obs);
        let (vals, vecs) = linalg::sym_eig_desc(&moment);
        if vals[n - 1] <= 1e-12 * vals[0].max(1e-300) {
            return Err(ScoreError::RankDeficientSamples { needed: n });
        }
        Some(vecs.columns(0, n).into_owned())
    } else {
        None
    };

    let project = |m: &DMatrix<f64>| -> DMatrix<f64> {
        match &basis {
            Some(b) => m * b,
            None => m.clone(),
        }
    };

    let env_observed: Vec<DMatrix<f64>> = latents
        .iter()
        .map(|z| Ok(project(&mixing.forward_batch(z)?)))
        .collect::<Result<_, ScoreError>>()?;

    let x_eval = env_observed[0].clone();
    let mut snr_db = None;

    let blocks = match mode {
        ScoreMode::Oracle => {
            let mut blocks = Vec::with_capacity(pairs.len());
            for &(a, b) in pairs {
                let full = oracle_score_diff_at_latents(env_set, mixing, (a, b), z_obs)?;
                blocks.push(ScoreDiffBlock {
                    env_a: a,
                    env_b: b,
                    diffs: project(&full),
                });
            }
            blocks
        }
        ScoreMode::GaussianEstimate => {
            let mut blocks = Vec::with_capacity(pairs.len());
            for &(a, b) in pairs {
                let diffs = gaussian_score_diff(&env_observed[a], &env_observed[b], &x_eval)?;
                blocks.push(ScoreDiffBlock {
                    env_a: a,
                    env_b: b,
                    diffs,
                });
            }
            blocks
        }
        ScoreMode::Noisy { noise_var } => {
            // Perturb the per-environment observed scores, then difference.
            let envs_in_use: Vec<usize> = {
                let mut v: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
                v.sort_unstable();
                v.dedup();
                v
            };
            let mut perturbed = vec![None; env_set.n_envs()];
            let mut signal = 0.0;
            let mut noise = 0.0;
            for &e in &envs_in_use {
                let scores = observed_scores_linear(env_set, mixing, e, z_obs)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seeding::derive_seed(
                    seed,
                    &[seeding::NOISE_STREAM, e as u64],
                ));
                let (p, s2, n2) = perturb_scores(&scores, noise_var, &mut rng);
                signal += s2;
                noise += n2;
                perturbed[e] = Some(p);
            }
            if noise > 0.0 {
                snr_db = Some(10.0 * (signal / noise).log10());
            }
            let mut blocks = Vec::with_capacity(pairs.len());
            for &(a, b) in pairs {
                let da = perturbed[a].as_ref().expect("perturbed scores for env a");
                let db = perturbed[b].as_ref().expect("perturbed scores for env b");
                blocks.push(ScoreDiffBlock {
                    env_a: a,
                    env_b: b,
                    diffs: project(&(da - db)),
                });
            }
            blocks
        }
    };

    let dim = x_eval.ncols();
    Ok(PreparedData {
        dataset: ScoreDiffDataset {
            dim,
            x: x_eval,
            blocks,
            basis,
            snr_db,
        },
        env_observed,
    })
}

#[derive(Serialize, Deserialize)]
struct DumpManifest {
    layout: String,
    dim: usize,
    n_samples: usize,
    x_file: String,
    basis_file: Option<String>,
    pairs: Vec<DumpPair>,
}

#[derive(Serialize, Deserialize)]
struct DumpPair {
    env_a: usize,
    env_b: usize,
    file: String,
}

fn write_matrix_le(path: &Path, m: &DMatrix<f64>) -> Result<(), ScoreError> {
    let mut file = std::fs::File::create(path)?;
    let mut buf = Vec::with_capacity(m.nrows() * m.ncols() * 8);
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            buf.extend_from_slice(&m[(r, c)].to_le_bytes());
        }
    }
    file.write_all(&buf)?;
    Ok(())
}

fn read_matrix_le(path: &Path, rows: usize, cols: usize) -> Result<DMatrix<f64>, ScoreError> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    if buf.len() != rows * cols * 8 {
        return Err(ScoreError::Manifest(format!(
            "{} has {} bytes, expected {}",
            path.display(),
            buf.len(),
            rows * cols * 8
        )));
    }
    let mut m = DMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            let off = (r * cols + c) * 8;
            m[(r, c)] = f64::from_le_bytes(buf[off..off + 8].try_into().unwrap());
        }
    }
    Ok(m)
}

impl ScoreDiffDataset {
    /// Dumps the dataset as row-major little-endian f64 matrices, one file
    /// per environment pair, with a JSON manifest naming the environments.
    pub fn write_dump(&self, dir: &Path) -> Result<(), ScoreError> {
        std::fs::create_dir_all(dir)?;
        write_matrix_le(&dir.join("x.f64le"), &self.x)?;
        let basis_file = match &self.basis {
            Some(b) => {
                write_matrix_le(&dir.join("basis.f64le"), b)?;
                Some("basis.f64le".to_string())
            }
            None => None,
        };
        let mut pairs = Vec::new();
        for block in &self.blocks {
            let file = format!("diff_{}_{}.f64le", block.env_a, block.env_b);
            write_matrix_le(&dir.join(&file), &block.diffs)?;
            pairs.push(DumpPair {
                env_a: block.env_a,
                env_b: block.env_b,
                file,
            });
        }
        let manifest = DumpManifest {
            layout: "row-major little-endian f64".to_string(),
            dim: self.dim,
            n_samples: self.x.nrows(),
            x_file: "x.f64le".to_string(),
            basis_file,
            pairs,
        };
        let json = serde_json::to_string_pretty(&manifest)
            .map_err(|e| ScoreError::Manifest(e.to_string()))?;
        std::fs::write(dir.join("manifest.json"), json)?;
        Ok(())
    }

    pub fn read_dump(dir: &Path) -> Result<Self, ScoreError> {
        let json = std::fs::read_to_string(dir.join("manifest.json"))?;
        let manifest: DumpManifest =
            serde_json::from_str(&json).map_err(|e| ScoreError::Manifest(e.to_string()))?;
        let x = read_matrix_le(
            &dir.join(&manifest.x_file),
            manifest.n_samples,
            manifest.dim,
        )?;
        let basis = match &manifest.basis_file {
            Some(f) => {
                // The basis has d rows; infer d from the file length.
                let bytes = std::fs::metadata(dir.join(f))?.len() as usize;
                let d = bytes / (8 * manifest.dim);
                Some(read_matrix_le(&dir.join(f), d, manifest.dim)?)
            }
            None => None,
        };
        let mut blocks = Vec::new();
        for pair in &manifest.pairs {
            let diffs = read_matrix_le(&dir.join(&pair.file), manifest.n_samples, manifest.dim)?;
            blocks.push(ScoreDiffBlock {
                env_a: pair.env_a,
                env_b: pair.env_b,
                diffs,
            });
        }
        Ok(ScoreDiffDataset {
            dim: manifest.dim,
            x,
            blocks,
            basis,
            snr_db: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{sample_erdos_renyi, Dag};
    use crate::mixing::LinearMix;
    use crate::scm::{
        apply_intervention, Coupling, EnvironmentSet, InterventionPolicy, InterventionType,
        LinearGaussianScm, Scm, ScmFamily,
    };

    fn linear_setup(
        seed: u64,
        n: usize,
        d: usize,
        itype: InterventionType,
    ) -> (EnvironmentSet, Mixing) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dag = sample_erdos_renyi(n, 0.5, &mut rng);
        let scm = Scm::Linear(LinearGaussianScm::sample(dag, &mut rng));
        let policy = InterventionPolicy::defaults(ScmFamily::Linear);
        let env_set = EnvironmentSet::atomic(scm, itype, &policy, &mut rng).unwrap();
        let mixing = Mixing::Linear(LinearMix::sample(n, d, &mut rng).unwrap());
        (env_set, mixing)
    }

    #[test]
    fn same_env_pair_gives_zero_diff() {
        let (env_set, mixing) = linear_setup(1, 3, 8, InterventionType::Hard);
        let latents = env_set.sample_all_latents(50, 7).unwrap();
        let x = mixing.forward_batch(&latents[0]).unwrap();
        let d = oracle_score_diff(&env_set, &mixing, (0, 0), &x).unwrap();
        assert!(d.norm() < 1e-12);
    }

    #[test]
    fn oracle_rows_live_in_parent_row_span() {
        // Each diff row lies in span{[G†_i]ᵀ : i ∈ Pa⁺(target)}.
        let (env_set, mixing) = linear_setup(2, 4, 10, InterventionType::Hard);
        let latents = env_set.sample_all_latents(40, 3).unwrap();
        let x = mixing.forward_batch(&latents[0]).unwrap();
        let Mixing::Linear(lin) = &mixing else {
            unreachable!()
        };
        for m in 1..=4usize {
            let target = env_set.oracle_targets()[m - 1];
            let pa_plus = env_set.base.dag().parents_plus(target);
            let diffs = oracle_score_diff(&env_set, &mixing, (m, 0), &x).unwrap();
            // Span basis: columns are [G†_i]ᵀ for i in Pa⁺.
            let span = DMatrix::from_fn(10, pa_plus.len(), |r, c| lin.pinv()[(pa_plus[c], r)]);
            let proj = &span * linalg::pseudo_inverse(&span);
            for s in 0..diffs.nrows() {
                let row = diffs.row(s).transpose();
                let resid = (&row - &proj * &row).norm();
                assert!(
                    resid < 1e-8 * row.norm().max(1.0),
                    "row outside span: {resid}"
                );
            }
        }
    }

    #[test]
    fn two_node_chain_hard_root_rows_align_with_pinv_row() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let dag = Dag::chain(2);
        let scm = Scm::Linear(LinearGaussianScm::sample(dag, &mut rng));
        let policy = InterventionPolicy::defaults(ScmFamily::Linear);
        let env_set =
            EnvironmentSet::atomic(scm, InterventionType::Hard, &policy, &mut rng).unwrap();
        let mixing = Mixing::Linear(LinearMix::sample(2, 6, &mut rng).unwrap());
        let Mixing::Linear(lin) = &mixing else {
            unreachable!()
        };
        let latents = env_set.sample_all_latents(30, 11).unwrap();
        let x = mixing.forward_batch(&latents[0]).unwrap();
        let m = env_set
            .oracle_targets()
            .iter()
            .position(|&t| t == 0)
            .unwrap()
            + 1;
        let diffs = oracle_score_diff(&env_set, &mixing, (m, 0), &x).unwrap();
        let dir = lin.pinv().row(0).transpose();
        for s in 0..diffs.nrows() {
            let row = diffs.row(s).transpose();
            let align = row.dot(&dir).abs() / (row.norm() * dir.norm());
            assert!(align > 1.0 - 1e-9, "row not proportional to [G†_0]ᵀ");
        }
    }

    #[test]
    fn gaussian_estimate_converges_to_oracle() {
        let (env_set, mixing) = linear_setup(3, 3, 3, InterventionType::Hard);
        let latents = env_set.sample_all_latents(400_000, 13).unwrap();
        let env_x: Vec<DMatrix<f64>> = latents
            .iter()
            .map(|z| mixing.forward_batch(z).unwrap())
            .collect();
        let est = gaussian_score_diff(&env_x[1], &env_x[0], &env_x[0]).unwrap();
        let exact = oracle_score_diff(&env_set, &mixing, (1, 0), &env_x[0]).unwrap();
        let rel = (&est - &exact).norm() / exact.norm();
        assert!(rel < 0.02, "relative deviation {rel}");
    }

    #[test]
    fn gaussian_estimate_identical_samples_zero() {
        let (env_set, mixing) = linear_setup(4, 3, 3, InterventionType::Hard);
        let latents = env_set.sample_all_latents(500, 17).unwrap();
        let x = mixing.forward_batch(&latents[0]).unwrap();
        let d = gaussian_score_diff(&x, &x, &x).unwrap();
        assert!(d.norm() < 1e-10);
    }

    #[test]
    fn gaussian_estimate_rejects_tiny_sample() {
        let x = DMatrix::<f64>::zeros(2, 5);
        assert!(matches!(
            gaussian_score_diff(&x, &x, &x),
            Err(ScoreError::TooFewSamples { needed: 5, got: 2 })
        ));
    }

    #[test]
    fn zero_noise_matches_oracle() {
        let (env_set, mixing) = linear_setup(6, 3, 5, InterventionType::Hard);
        let latents = env_set.sample_all_latents(100, 19).unwrap();
        let pairs: Vec<(usize, usize)> = (1..=3).map(|m| (m, 0)).collect();
        let oracle = build_dataset(
            &env_set,
            &mixing,
            ScoreMode::Oracle,
            &latents,
            &pairs,
            true,
            0,
        )
        .unwrap();
        let noisy = build_dataset(
            &env_set,
            &mixing,
            ScoreMode::Noisy { noise_var: 0.0 },
            &latents,
            &pairs,
            true,
            0,
        )
        .unwrap();
        for (a, b) in oracle.dataset.blocks.iter().zip(&noisy.dataset.blocks) {
            assert!((&a.diffs - &b.diffs).norm() < 1e-10);
        }
    }

    #[test]
    fn noise_snr_tracks_sigma() {
        let (env_set, mixing) = linear_setup(7, 3, 5, InterventionType::Hard);
        let latents = env_set.sample_all_latents(2000, 23).unwrap();
        let pairs: Vec<(usize, usize)> = (1..=3).map(|m| (m, 0)).collect();
        let mut prev = f64::INFINITY;
        for noise_var in [1e-4, 1e-3, 1e-2] {
            let data = build_dataset(
                &env_set,
                &mixing,
                ScoreMode::Noisy { noise_var },
                &latents,
                &pairs,
                true,
                5,
            )
            .unwrap();
            let snr = data.dataset.snr_db.unwrap();
            let analytic = -10.0 * noise_var.log10();
            assert!(
                (snr - analytic).abs() < 1.0,
                "snr {snr} vs analytic {analytic}"
            );
            assert!(snr < prev);
            prev = snr;
        }
    }

    #[test]
    fn reduction_round_trips_samples() {
        let (env_set, mixing) = linear_setup(8, 4, 50, InterventionType::Hard);
        let latents = env_set.sample_all_latents(300, 29).unwrap();
        let x = mixing.forward_batch(&latents[0]).unwrap();
        let d1 = oracle_score_diff(&env_set, &mixing, (1, 0), &x).unwrap();
        let (x_red, diffs_red, basis) = reduce_dimension(&x, &[&d1], 4).unwrap();
        assert_eq!(x_red.ncols(), 4);
        // basis · reduced ≈ original.
        let recon = &x_red * basis.transpose();
        assert!((recon - &x).norm() < 1e-9 * x.norm());
        let recon_d = &diffs_red[0] * basis.transpose();
        assert!((recon_d - &d1).norm() < 1e-9 * d1.norm().max(1.0));
    }

    #[test]
    fn reduction_square_case_is_rotation() {
        let (env_set, mixing) = linear_setup(9, 3, 3, InterventionType::Hard);
        let latents = env_set.sample_all_latents(200, 31).unwrap();
        let x = mixing.forward_batch(&latents[0]).unwrap();
        let (x_red, _, basis) = reduce_dimension(&x, &[], 3).unwrap();
        assert!((basis.transpose() * &basis - DMatrix::identity(3, 3)).norm() < 1e-10);
        assert!((&x_red * basis.transpose() - &x).norm() < 1e-9 * x.norm());
    }

    #[test]
    fn reduction_detects_rank_deficiency() {
        // Samples spanning only 2 directions cannot be reduced to 3.
        let mut x = DMatrix::zeros(50, 5);
        for s in 0..50 {
            x[(s, 0)] = s as f64;
            x[(s, 1)] = 1.0 - s as f64;
        }
        assert!(matches!(
            reduce_dimension(&x, &[], 3),
            Err(ScoreError::RankDeficientSamples { needed: 3 })
        ));
    }

    #[test]
    fn extrapolation_matches_double_intervention_oracle() {
        let (env_set, mixing) = linear_setup(10, 4, 12, InterventionType::Hard);
        let latents = env_set.sample_all_latents(60, 37).unwrap();
        let x = mixing.forward_batch(&latents[0]).unwrap();
        let d1 = oracle_score_diff(&env_set, &mixing, (1, 0), &x).unwrap();
        let d2 = oracle_score_diff(&env_set, &mixing, (2, 0), &x).unwrap();
        let sum = extrapolate_score_diff(&d1, &d2).unwrap();

        // Build the double-intervention model explicitly.
        let spec1 = *env_set.spec(1).unwrap();
        let spec2 = *env_set.spec(2).unwrap();
        let double =
            apply_intervention(&apply_intervention(&env_set.base, &spec1).unwrap(), &spec2)
                .unwrap();
        let n_s = x.nrows();
        let mut direct = DMatrix::zeros(n_s, 12);
        for s in 0..n_s {
            let z = latents[0].row(s).transpose();
            let dz = double.latent_score(&z).unwrap()
                - env_set.env(0).unwrap().latent_score(&z).unwrap();
            let dx = mixing.score_diff_pushforward(&dz, &z).unwrap();
            direct.row_mut(s).copy_from(&dx.transpose());
        }
        let resid = (&sum - &direct).norm();
        assert!(resid < 1e-8, "extrapolation residual {resid}");

        // Commutativity and the zero case.
        assert_eq!(
            extrapolate_score_diff(&d1, &d2).unwrap(),
            extrapolate_score_diff(&d2, &d1).unwrap()
        );
        let zero = DMatrix::zeros(n_s, 12);
        assert_eq!(extrapolate_score_diff(&d1, &zero).unwrap(), d1);
        let bad = DMatrix::zeros(3, 3);
        assert!(extrapolate_score_diff(&d1, &bad).is_err());
    }

    #[test]
    fn dump_round_trip() {
        let (env_set, mixing) = linear_setup(11, 3, 7, InterventionType::Soft);
        let latents = env_set.sample_all_latents(25, 41).unwrap();
        let pairs: Vec<(usize, usize)> = (1..=3).map(|m| (m, 0)).collect();
        let data = build_dataset(
            &env_set,
            &mixing,
            ScoreMode::Oracle,
            &latents,
            &pairs,
            true,
            0,
        )
        .unwrap();
        let dir = std::env::temp_dir().join("score_crl_dump_test");
        let _ = std::fs::remove_dir_all(&dir);
        data.dataset.write_dump(&dir).unwrap();
        let back = ScoreDiffDataset::read_dump(&dir).unwrap();
        assert_eq!(back.dim, data.dataset.dim);
        assert_eq!(back.x, data.dataset.x);
        assert_eq!(back.blocks.len(), data.dataset.blocks.len());
        for (a, b) in back.blocks.iter().zip(&data.dataset.blocks) {
            assert_eq!(a.env_a, b.env_a);
            assert_eq!(a.diffs, b.diffs);
        }
        assert_eq!(back.basis.unwrap(), data.dataset.basis.unwrap());
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn uncoupled_pairs_dataset_builds_for_tanh() {
        use crate::mixing::TanhGlmMix;
        use crate::scm::QuadraticScm;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let dag = sample_erdos_renyi(3, 0.5, &mut rng);
        let scm = Scm::Quadratic(QuadraticScm::sample(dag, &mut rng));
        let policy = InterventionPolicy::defaults(ScmFamily::Quadratic);
        let env_set =
            EnvironmentSet::atomic_pairs(scm, &policy, Coupling::Coupled, &mut rng).unwrap();
        let latents = env_set.sample_all_latents(40, 43).unwrap();
        let pooled = DMatrix::from_fn(latents.len() * 40, 3, |r, c| latents[r / 40][(r % 40, c)]);
        let mixing =
            Mixing::TanhGlm(TanhGlmMix::sample_calibrated(3, 9, &pooled, &mut rng).unwrap());
        let pairs: Vec<(usize, usize)> = (1..=3)
            .map(|m| (m, env_set.second_set_env(m).unwrap()))
            .collect();
        let data = build_dataset(
            &env_set,
            &mixing,
            ScoreMode::Oracle,
            &latents,
            &pairs,
            false,
            0,
        )
        .unwrap();
        assert_eq!(data.dataset.dim, 9);
        assert_eq!(data.dataset.blocks.len(), 3);
        assert!(data.dataset.basis.is_none());
    }
}
