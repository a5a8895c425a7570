//! Configuration-driven experiment harness: generates the synthetic models,
//! runs the selected algorithm over many graphs, aggregates metrics, and
//! writes deterministic CSV outputs.

pub mod config;

pub use config::{AlgorithmName, ConfigError, ExperimentConfig, MixingFamily, ScoreModeName};

use crate::graph::sample_erdos_renyi;
use crate::gscalei::{self, GscaleError, GscaleInput, UncoupledInput};
use crate::linalg;
use crate::lscalei::{self, CrlEstimate, LscaleError, LscaleOptions};
use crate::metrics::{self, MetricReport, MetricsError};
use crate::mixing::{LinearMix, Mixing, MixingError, TanhGlmMix};
use crate::scm::{
    apply_intervention, Coupling, EnvironmentSet, InterventionType, LinearGaussianScm,
    QuadraticScm, Scm, ScmError, ScmFamily,
};
use crate::scores::{self, ScoreError, ScoreMode};
use crate::seeding;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("graph {graph}: {source}")]
    Graph {
        graph: usize,
        #[source]
        source: Box<HarnessError>,
    },
    #[error(transparent)]
    Scm(#[from] ScmError),
    #[error(transparent)]
    Mixing(#[from] MixingError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Lscale(#[from] LscaleError),
    #[error(transparent)]
    Gscale(#[from] GscaleError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("sweep needs at least one value")]
    EmptySweep,
    #[error("extrapolation report needs a linear-Gaussian SCM with linear mixing")]
    ExtrapolationNeedsLinear,
    #[error("thread pool error: {0}")]
    ThreadPool(String),
}

/// Metrics and bookkeeping for one graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub graph_index: usize,
    pub seed: u64,
    pub metrics: MetricReport,
    pub snr_db: Option<f64>,
    /// Wall-clock seconds; recorded in the manifest only, never in the CSVs,
    /// so outputs stay bit-identical across reruns.
    pub wall_time_secs: f64,
}

/// Mean and standard error (sample std over sqrt of count) of one metric.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Aggregate {
    pub metric: &'static str,
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub records: Vec<RunRecord>,
    pub aggregates: Vec<Aggregate>,
    pub config_hash: String,
}

fn aggregate(name: &'static str, values: &[f64]) -> Aggregate {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let std_error = if values.len() > 1 {
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
        (var / k).sqrt()
    } else {
        0.0
    };
    Aggregate {
        metric: name,
        mean,
        std_error,
    }
}

fn summarize(records: Vec<RunRecord>, config_hash: String) -> RunSummary {
    let get = |f: fn(&MetricReport) -> f64| -> Vec<f64> {
        records.iter().map(|r| f(&r.metrics)).collect()
    };
    let aggregates = vec![
        aggregate("mcc", &get(|m| m.mcc)),
        aggregate("shd", &get(|m| m.shd as f64)),
        aggregate("shd_tc", &get(|m| m.shd_tc as f64)),
        aggregate("l_scale", &get(|m| m.l_scale)),
        aggregate("l_pa", &get(|m| m.l_pa)),
        aggregate("l_sur", &get(|m| m.l_sur)),
        aggregate("l_norm", &get(|m| m.l_norm)),
    ];
    RunSummary {
        records,
        aggregates,
        config_hash,
    }
}

/// The synthetic instance for one graph index: model, environments, mixing,
/// and per-environment latent samples.
pub struct GraphInstance {
    pub seed: u64,
    pub env_set: EnvironmentSet,
    pub mixing: Mixing,
    pub latents: Vec<DMatrix<f64>>,
}

/// Deterministically generates the instance for `graph_index`.
pub fn build_instance(
    config: &ExperimentConfig,
    graph_index: usize,
) -> Result<GraphInstance, HarnessError> {
    use rand::SeedableRng;
    let seed = seeding::derive_seed(
        config.experiment.master_seed,
        &[seeding::GRAPH_STREAM, graph_index as u64],
    );
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dag = sample_erdos_renyi(
        config.experiment.n,
        config.experiment.graph_density,
        &mut rng,
    );
    let scm = match config.scm.family {
        ScmFamily::Linear => Scm::Linear(LinearGaussianScm::sample(dag, &mut rng)),
        ScmFamily::Quadratic => Scm::Quadratic(QuadraticScm::sample(dag, &mut rng)),
    };
    let policy = config.intervention_policy();
    let env_set = if config.scm.environments_per_node == 2 {
        EnvironmentSet::atomic_pairs(scm, &policy, config.scm.coupling, &mut rng)?
    } else {
        EnvironmentSet::atomic(scm, config.scm.intervention, &policy, &mut rng)?
    };
    let latents = env_set.sample_all_latents(config.experiment.n_samples, seed)?;
    let mixing = match config.mixing.family {
        MixingFamily::Linear => Mixing::Linear(LinearMix::sample(
            config.experiment.n,
            config.experiment.d,
            &mut rng,
        )?),
        MixingFamily::TanhGlm => {
            let n = config.experiment.n;
            let rows: usize = latents.iter().map(|m| m.nrows()).sum();
            let mut pooled = DMatrix::zeros(rows, n);
            let mut at = 0;
            for block in &latents {
                pooled.rows_mut(at, block.nrows()).copy_from(block);
                at += block.nrows();
            }
            Mixing::TanhGlm(TanhGlmMix::sample_calibrated(
                n,
                config.experiment.d,
                &pooled,
                &mut rng,
            )?)
        }
    };
    Ok(GraphInstance {
        seed,
        env_set,
        mixing,
        latents,
    })
}

/// Effective latent-to-estimate transform `Ẑ = HG·Z` for metric evaluation.
fn effective_transform(
    encoder: &DMatrix<f64>,
    mixing: &Mixing,
    basis: Option<&DMatrix<f64>>,
) -> DMatrix<f64> {
    let g = match mixing {
        Mixing::Linear(m) => m.matrix(),
        Mixing::TanhGlm(m) => m.matrix(),
    };
    match basis {
        Some(b) => encoder * (b.transpose() * g),
        None => encoder * g,
    }
}

/// Builds the coupled-pair score-difference input for a GSCALE-I fit.
pub fn build_coupled_input(
    env_set: &EnvironmentSet,
    mixing: &Mixing,
    mode: ScoreMode,
    latents: &[DMatrix<f64>],
    noise_seed: u64,
) -> Result<GscaleInput, HarnessError> {
    let n = env_set.n_nodes();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for m in 1..=n {
        pairs.push((m, env_set.second_set_env(m)?));
    }
    for m in 1..=n {
        pairs.push((m, 0));
    }
    let data = scores::build_dataset(env_set, mixing, mode, latents, &pairs, false, noise_seed)?;
    let coupled_diffs: Vec<DMatrix<f64>> = data.dataset.blocks[..n]
        .iter()
        .map(|b| b.diffs.clone())
        .collect();
    let obs_int_diffs: Vec<DMatrix<f64>> = data.dataset.blocks[n..]
        .iter()
        .map(|b| b.diffs.clone())
        .collect();
    Ok(GscaleInput {
        x_obs: data.dataset.x,
        coupled_diffs,
        obs_int_diffs,
    })
}

/// Builds the all-pairings score-difference input for the uncoupled search.
pub fn build_uncoupled_input(
    env_set: &EnvironmentSet,
    mixing: &Mixing,
    mode: ScoreMode,
    latents: &[DMatrix<f64>],
    noise_seed: u64,
) -> Result<UncoupledInput, HarnessError> {
    let n = env_set.n_nodes();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for m in 1..=n {
        for k in 1..=n {
            pairs.push((m, env_set.second_set_env(k)?));
        }
    }
    for m in 1..=n {
        pairs.push((m, 0));
    }
    for k in 1..=n {
        pairs.push((env_set.second_set_env(k)?, 0));
    }
    let data = scores::build_dataset(env_set, mixing, mode, latents, &pairs, false, noise_seed)?;
    let mut cross = vec![vec![DMatrix::zeros(0, 0); n]; n];
    let mut idx = 0;
    for m in 0..n {
        for k in 0..n {
            cross[m][k] = data.dataset.blocks[idx].diffs.clone();
            idx += 1;
        }
    }
    let obs_int_diffs: Vec<DMatrix<f64>> = (0..n)
        .map(|m| data.dataset.blocks[idx + m].diffs.clone())
        .collect();
    let obs_int_tilde_diffs: Vec<DMatrix<f64>> = (0..n)
        .map(|k| data.dataset.blocks[idx + n + k].diffs.clone())
        .collect();
    Ok(UncoupledInput {
        x_obs: data.dataset.x,
        cross_diffs: cross,
        obs_int_diffs,
        obs_int_tilde_diffs,
    })
}

/// Alignment for structural metrics: `alignment[latent] = estimate row`,
/// derived from the hidden intervention order (evaluation-only).
fn oracle_alignment(env_set: &EnvironmentSet) -> Vec<usize> {
    let targets = env_set.oracle_targets();
    let mut inv = vec![0usize; targets.len()];
    for (row, &t) in targets.iter().enumerate() {
        inv[t] = row;
    }
    inv
}

struct GraphOutput {
    record: RunRecord,
    estimate: CrlEstimate,
    trace: Option<Vec<gscalei::TraceRow>>,
    dataset: Option<crate::scores::ScoreDiffDataset>,
    instance: GraphInstance,
}

fn run_single_graph(
    config: &ExperimentConfig,
    graph_index: usize,
    keep_dataset: bool,
) -> Result<GraphOutput, HarnessError> {
    let started = std::time::Instant::now();
    let instance = build_instance(config, graph_index)?;
    let n = config.experiment.n;
    let env_set = &instance.env_set;
    let mixing = &instance.mixing;
    let latents = &instance.latents;
    let mode = config.score_mode();
    let noise_seed =
        seeding::derive_seed(instance.seed, &[seeding::NOISE_STREAM, graph_index as u64]);

    let lambda_graph = config.lambda_graph();
    let (estimate, snr_db, trace, dataset) = match config.algorithm.name {
        AlgorithmName::Lscalei | AlgorithmName::LscaleiFullrank => {
            let pairs: Vec<(usize, usize)> = (1..=n).map(|m| (m, 0)).collect();
            let data =
                scores::build_dataset(env_set, mixing, mode, latents, &pairs, true, noise_seed)?;
            let opts = LscaleOptions {
                lambda_graph,
                lambda_eigv: config.algorithm.lambda_eigv,
                unmix: config.scm.intervention == InterventionType::Hard
                    && config.algorithm.name == AlgorithmName::Lscalei,
            };
            let (est, _) = match config.algorithm.name {
                AlgorithmName::Lscalei => {
                    let covs: Vec<DMatrix<f64>> = (1..=n)
                        .map(|e| linalg::covariance_mle(&data.env_observed[e]))
                        .collect();
                    lscalei::run_lscalei(
                        &data.dataset,
                        if opts.unmix { Some(&covs) } else { None },
                        &opts,
                    )?
                }
                _ => lscalei::run_lscalei_full_rank(&data.dataset, &opts)?,
            };
            let hg = effective_transform(&est.encoder, mixing, data.dataset.basis.as_ref());
            let snr = data.dataset.snr_db;
            let alignment = oracle_alignment(env_set);
            let report = metrics::evaluate(
                &latents[0],
                &est.latents,
                env_set.base.dag(),
                &est.graph,
                &hg,
                Some(&alignment),
            )?;
            (
                (est, report),
                snr,
                None,
                if keep_dataset {
                    Some(data.dataset)
                } else {
                    None
                },
            )
        }
        AlgorithmName::Gscalei => {
            let gcfg = config.gscale_config();
            let algo_seed =
                seeding::derive_seed(instance.seed, &[seeding::ALGO_STREAM, graph_index as u64]);
            let fit = match config.scm.coupling {
                Coupling::Coupled => {
                    let input = build_coupled_input(env_set, mixing, mode, latents, noise_seed)?;
                    use rand::SeedableRng;
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(algo_seed);
                    gscalei::fit_coupled(&input, &gcfg, &mut rng)?
                }
                Coupling::Uncoupled => {
                    let input = build_uncoupled_input(env_set, mixing, mode, latents, noise_seed)?;
                    gscalei::fit_uncoupled(&input, &gcfg, algo_seed)?.fit
                }
            };
            let hg = effective_transform(&fit.estimate.encoder, mixing, None);
            let alignment = oracle_alignment(env_set);
            let report = metrics::evaluate(
                &latents[0],
                &fit.estimate.latents,
                env_set.base.dag(),
                &fit.estimate.graph,
                &hg,
                Some(&alignment),
            )?;
            let dataset = if keep_dataset {
                let pairs: Vec<(usize, usize)> = (1..=n)
                    .map(|m| Ok((m, env_set.second_set_env(m)?)))
                    .collect::<Result<_, ScmError>>()?;
                Some(
                    scores::build_dataset(
                        env_set, mixing, mode, latents, &pairs, false, noise_seed,
                    )?
                    .dataset,
                )
            } else {
                None
            };
            ((fit.estimate, report), None, Some(fit.trace), dataset)
        }
    };
    let ((estimate, report), snr_db, trace, dataset) = (estimate, snr_db, trace, dataset);
    Ok(GraphOutput {
        record: RunRecord {
            config_hash: config.hash(),
            graph_index,
            seed: instance.seed,
            metrics: report,
            snr_db,
            wall_time_secs: started.elapsed().as_secs_f64(),
        },
        estimate,
        trace,
        dataset,
        instance,
    })
}

fn with_pool<T: Send>(
    workers: Option<usize>,
    run: impl FnOnce() -> T + Send,
) -> Result<T, HarnessError> {
    match workers {
        None => Ok(run()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| HarnessError::ThreadPool(e.to_string()))?;
            Ok(pool.install(run))
        }
    }
}

/// Runs the configured experiment over all graphs, optionally writing
/// `runs.csv`, `aggregate.csv`, `manifest.json`, and the enabled dumps into
/// `out_dir`. Results are independent of the worker count.
pub fn run_experiment(
    config: &ExperimentConfig,
    out_dir: Option<&Path>,
    workers: Option<usize>,
) -> Result<RunSummary, HarnessError> {
    config.validate()?;
    let started = std::time::Instant::now();
    let dumps =
        config.output.dump_score_diffs || config.output.dump_models || config.output.write_traces;
    let outputs: Vec<GraphOutput> = with_pool(workers, || {
        (0..config.experiment.n_graphs)
            .into_par_iter()
            .map(|g| {
                run_single_graph(config, g, config.output.dump_score_diffs).map_err(|e| {
                    HarnessError::Graph {
                        graph: g,
                        source: Box::new(e),
                    }
                })
            })
            .collect::<Result<Vec<_>, _>>()
    })??;

    let mut outputs = outputs;
    outputs.sort_by_key(|o| o.record.graph_index);

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        if dumps {
            for out in &outputs {
                let gdir = dir.join(format!("graph_{:03}", out.record.graph_index));
                if config.output.dump_models {
                    std::fs::create_dir_all(&gdir)?;
                    let model = serde_json::json!({
                        "seed": out.record.seed,
                        "dag": out.instance.env_set.base.dag(),
                        "scm": out.instance.env_set.base,
                        "mixing": out.instance.mixing,
                        "intervention_specs": (1..out.instance.env_set.n_envs())
                            .map(|k| out.instance.env_set.spec(k).cloned())
                            .collect::<Vec<_>>(),
                        "estimated_graph": out.estimate.graph,
                        "encoder": out.estimate.encoder.as_slice(),
                    });
                    std::fs::write(
                        gdir.join("model.json"),
                        serde_json::to_string_pretty(&model)
                            .map_err(|e| ConfigError::Parse(e.to_string()))?,
                    )?;
                }
                if config.output.dump_score_diffs {
                    if let Some(dataset) = &out.dataset {
                        dataset.write_dump(&gdir.join("score_diffs"))?;
                    }
                }
                if config.output.write_traces {
                    if let Some(trace) = &out.trace {
                        std::fs::create_dir_all(&gdir)?;
                        let mut csv = String::from("step,loss,recon_loss,dt_deviation\n");
                        for row in trace {
                            csv.push_str(&format!(
                                "{},{},{},{}\n",
                                row.step, row.loss, row.recon_loss, row.dt_deviation
                            ));
                        }
                        std::fs::write(gdir.join("trace.csv"), csv)?;
                    }
                }
            }
        }
    }

    let records: Vec<RunRecord> = outputs.into_iter().map(|o| o.record).collect();
    let summary = summarize(records, config.hash());

    if let Some(dir) = out_dir {
        write_runs_csv(&summary.records, &dir.join("runs.csv"))?;
        write_aggregate_csv(&summary.aggregates, &dir.join("aggregate.csv"))?;
        let manifest = serde_json::json!({
            "config": config,
            "config_hash": summary.config_hash,
            "n_graphs": summary.records.len(),
            "wall_time_secs": started.elapsed().as_secs_f64(),
            "outputs": ["runs.csv", "aggregate.csv"],
        });
        std::fs::write(
            dir.join("manifest.json"),
            serde_json::to_string_pretty(&manifest)
                .map_err(|e| ConfigError::Parse(e.to_string()))?,
        )?;
    }
    Ok(summary)
}

pub const RUNS_CSV_HEADER: &str =
    "config_hash,graph_index,seed,mcc,shd,shd_tc,l_scale,l_pa,l_sur,l_norm,snr_db";

fn write_runs_csv(records: &[RunRecord], path: &Path) -> Result<(), HarnessError> {
    let mut csv = String::from(RUNS_CSV_HEADER);
    csv.push('\n');
    for r in records {
        let snr = r.snr_db.map(|v| v.to_string()).unwrap_or_default();
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.config_hash,
            r.graph_index,
            r.seed,
            r.metrics.csv_row(),
            snr
        ));
    }
    std::fs::write(path, csv)?;
    Ok(())
}

fn write_aggregate_csv(aggregates: &[Aggregate], path: &Path) -> Result<(), HarnessError> {
    let mut csv = String::from("metric,mean,std_error\n");
    for a in aggregates {
        csv.push_str(&format!("{},{},{}\n", a.metric, a.mean, a.std_error));
    }
    std::fs::write(path, csv)?;
    Ok(())
}

/// Sweepable configuration axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    NSamples,
    NoiseVar,
    ObservedDim,
    Density,
}

impl std::str::FromStr for SweepAxis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "n-samples" | "n_samples" => Ok(SweepAxis::NSamples),
            "noise-var" | "noise_var" => Ok(SweepAxis::NoiseVar),
            "observed-dim" | "d" => Ok(SweepAxis::ObservedDim),
            "density" => Ok(SweepAxis::Density),
            other => Err(format!("unknown sweep axis `{other}`")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    pub summary: RunSummary,
    pub mean_snr_db: Option<f64>,
}

/// Runs one experiment per axis value; for noise sweeps the per-run SNR is
/// averaged into an extra column.
pub fn run_sweep(
    base: &ExperimentConfig,
    axis: SweepAxis,
    values: &[f64],
    out_dir: Option<&Path>,
    workers: Option<usize>,
) -> Result<Vec<SweepPoint>, HarnessError> {
    if values.is_empty() {
        return Err(HarnessError::EmptySweep);
    }
    let mut points = Vec::new();
    for &value in values {
        let mut config = base.clone();
        match axis {
            SweepAxis::NSamples => config.experiment.n_samples = value as usize,
            SweepAxis::NoiseVar => {
                config.score.mode = ScoreModeName::Noisy;
                config.score.noise_var = value;
            }
            SweepAxis::ObservedDim => config.experiment.d = value as usize,
            SweepAxis::Density => config.experiment.graph_density = value,
        }
        config.validate()?;
        let summary = run_experiment(&config, None, workers)?;
        let snrs: Vec<f64> = summary.records.iter().filter_map(|r| r.snr_db).collect();
        let mean_snr_db = if snrs.is_empty() {
            None
        } else {
            Some(snrs.iter().sum::<f64>() / snrs.len() as f64)
        };
        points.push(SweepPoint {
            value,
            summary,
            mean_snr_db,
        });
    }
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        let mut csv = String::from("axis,value,snr_db,metric,mean,std_error\n");
        let axis_name = match axis {
            SweepAxis::NSamples => "n-samples",
            SweepAxis::NoiseVar => "noise-var",
            SweepAxis::ObservedDim => "observed-dim",
            SweepAxis::Density => "density",
        };
        for point in &points {
            let snr = point.mean_snr_db.map(|v| v.to_string()).unwrap_or_default();
            for a in &point.summary.aggregates {
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    axis_name, point.value, snr, a.metric, a.mean, a.std_error
                ));
            }
        }
        std::fs::write(dir.join("sweep.csv"), csv)?;
    }
    Ok(points)
}

/// Residuals of the intervention-extrapolation identity for one node pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtrapolationRecord {
    pub graph_index: usize,
    pub env_a: usize,
    pub env_b: usize,
    pub max_residual: f64,
    pub mean_residual: f64,
}

/// For every pair of single-node interventional environments, compares the
/// extrapolated score difference of the unseen double intervention with the
/// directly constructed one, over the observational samples.
pub fn run_extrapolation(
    config: &ExperimentConfig,
    out_dir: Option<&Path>,
) -> Result<Vec<ExtrapolationRecord>, HarnessError> {
    config.validate()?;
    if config.scm.family != ScmFamily::Linear || config.mixing.family != MixingFamily::Linear {
        return Err(HarnessError::ExtrapolationNeedsLinear);
    }
    let n = config.experiment.n;
    let mode = config.score_mode();
    let mut records = Vec::new();
    for g in 0..config.experiment.n_graphs {
        let instance = build_instance(config, g)?;
        let noise_seed = seeding::derive_seed(instance.seed, &[seeding::NOISE_STREAM, g as u64]);
        let pairs: Vec<(usize, usize)> = (1..=n).map(|m| (m, 0)).collect();
        let data = scores::build_dataset(
            &instance.env_set,
            &instance.mixing,
            mode,
            &instance.latents,
            &pairs,
            false,
            noise_seed,
        )?;
        for a in 1..=n {
            for b in (a + 1)..=n {
                let d1 = &data.dataset.block(a, 0).expect("block a").diffs;
                let d2 = &data.dataset.block(b, 0).expect("block b").diffs;
                let sum = scores::extrapolate_score_diff(d1, d2)?;
                // Direct construction of the double-intervention model.
                let double = apply_intervention(
                    &apply_intervention(
                        &instance.env_set.base,
                        instance.env_set.spec(a).expect("spec a"),
                    )?,
                    instance.env_set.spec(b).expect("spec b"),
                )?;
                let dz = double.latent_scores(&instance.latents[0])?
                    - instance
                        .env_set
                        .env(0)?
                        .latent_scores(&instance.latents[0])?;
                let Mixing::Linear(lin) = &instance.mixing else {
                    unreachable!()
                };
                let direct = dz * lin.pinv();
                let resid = (&sum - &direct).abs();
                let max_residual = resid.max();
                let mean_residual = resid.sum() / (resid.nrows() * resid.ncols()) as f64;
                records.push(ExtrapolationRecord {
                    graph_index: g,
                    env_a: a,
                    env_b: b,
                    max_residual,
                    mean_residual,
                });
            }
        }
    }
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        let mut csv = String::from("graph_index,env_a,env_b,max_residual,mean_residual\n");
        for r in &records {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                r.graph_index, r.env_a, r.env_b, r.max_residual, r.mean_residual
            ));
        }
        std::fs::write(dir.join("extrapolation.csv"), csv)?;
    }
    Ok(records)
}
