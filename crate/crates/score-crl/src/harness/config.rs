//! Experiment configuration: a single TOML file with nested blocks, validated
//! field by field.

use crate::gscalei::{GscaleConfig, LossNorm};
use crate::scm::{Coupling, InterventionPolicy, InterventionType, ScmFamily};
use crate::scores::ScoreMode;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config field `{field}`: {message}")]
    Invalid {
        field: &'static str,
        message: String,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MixingFamily {
    Linear,
    TanhGlm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmName {
    Lscalei,
    LscaleiFullrank,
    Gscalei,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentBlock {
    pub n: usize,
    pub d: usize,
    pub n_samples: usize,
    pub graph_density: f64,
    pub n_graphs: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScmBlock {
    pub family: ScmFamily,
    pub intervention: InterventionType,
    #[serde(default = "default_envs_per_node")]
    pub environments_per_node: usize,
    #[serde(default = "default_coupling")]
    pub coupling: Coupling,
    #[serde(default)]
    pub hard_noise_multiplier: Option<f64>,
    #[serde(default)]
    pub pair_noise_multipliers: Option<(f64, f64)>,
    #[serde(default)]
    pub soft_mechanism_scale: Option<f64>,
    #[serde(default)]
    pub soft_noise_multiplier: Option<f64>,
}

fn default_envs_per_node() -> usize {
    1
}

fn default_coupling() -> Coupling {
    Coupling::Coupled
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixingBlock {
    pub family: MixingFamily,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreBlock {
    pub mode: ScoreModeName,
    #[serde(default)]
    pub noise_var: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreModeName {
    Oracle,
    GaussianEstimate,
    Noisy,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmBlock {
    pub name: AlgorithmName,
    #[serde(default)]
    pub lambda_graph: Option<f64>,
    #[serde(default = "default_lambda_eigv")]
    pub lambda_eigv: f64,
}

fn default_lambda_eigv() -> f64 {
    0.01
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GscaleBlock {
    pub steps: usize,
    pub learning_rate: f64,
    pub lambda_recon: f64,
    pub epsilon: f64,
    pub loss: LossName,
    pub early_stop_window: usize,
    pub early_stop_tol: f64,
    pub restarts: usize,
    pub restart_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossName {
    Frobenius,
    EntrywiseL1,
}

impl Default for GscaleBlock {
    fn default() -> Self {
        GscaleBlock {
            steps: 30_000,
            learning_rate: 1e-3,
            lambda_recon: 1.0,
            epsilon: 1e-6,
            loss: LossName::Frobenius,
            early_stop_window: 500,
            early_stop_tol: 1e-9,
            restarts: 3,
            restart_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub dump_score_diffs: bool,
    pub dump_models: bool,
    pub write_traces: bool,
}

/// The full experiment configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentBlock,
    pub scm: ScmBlock,
    pub mixing: MixingBlock,
    pub score: ScoreBlock,
    pub algorithm: AlgorithmBlock,
    #[serde(default)]
    pub gscalei: GscaleBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let e = &self.experiment;
        if e.n < 1 {
            return Err(invalid("experiment.n", "need at least one latent node"));
        }
        if e.d < e.n {
            return Err(invalid(
                "experiment.d",
                format!("observed dimension {} below latent dimension {}", e.d, e.n),
            ));
        }
        if e.n_samples < 2 {
            return Err(invalid("experiment.n_samples", "need at least 2 samples"));
        }
        if !(0.0..=1.0).contains(&e.graph_density) {
            return Err(invalid("experiment.graph_density", "must lie in [0, 1]"));
        }
        if e.n_graphs < 1 {
            return Err(invalid("experiment.n_graphs", "need at least one graph"));
        }
        if !(1..=2).contains(&self.scm.environments_per_node) {
            return Err(invalid("scm.environments_per_node", "must be 1 or 2"));
        }
        if self.score.mode == ScoreModeName::Noisy && self.score.noise_var < 0.0 {
            return Err(invalid("score.noise_var", "must be nonnegative"));
        }
        if self.score.mode == ScoreModeName::GaussianEstimate {
            if self.scm.family != ScmFamily::Linear {
                return Err(invalid(
                    "score.mode",
                    "gaussian-estimate scores need a linear-Gaussian SCM",
                ));
            }
            if self.mixing.family != MixingFamily::Linear {
                return Err(invalid(
                    "score.mode",
                    "gaussian-estimate scores need linear mixing",
                ));
            }
        }
        if self.score.mode == ScoreModeName::Noisy && self.mixing.family != MixingFamily::Linear {
            return Err(invalid(
                "score.mode",
                "noisy scores need linear mixing (closed-form observed scores)",
            ));
        }
        match self.algorithm.name {
            AlgorithmName::Lscalei | AlgorithmName::LscaleiFullrank => {
                if self.mixing.family != MixingFamily::Linear {
                    return Err(invalid("algorithm.name", "LSCALE-I needs linear mixing"));
                }
                if self.scm.environments_per_node != 1 {
                    return Err(invalid(
                        "scm.environments_per_node",
                        "LSCALE-I uses one environment per node",
                    ));
                }
            }
            AlgorithmName::Gscalei => {
                if self.mixing.family != MixingFamily::TanhGlm {
                    return Err(invalid("algorithm.name", "GSCALE-I needs tanh-glm mixing"));
                }
                if self.scm.environments_per_node != 2 {
                    return Err(invalid(
                        "scm.environments_per_node",
                        "GSCALE-I uses two environments per node",
                    ));
                }
                if self.scm.intervention != InterventionType::Hard {
                    return Err(invalid(
                        "scm.intervention",
                        "GSCALE-I uses hard interventions",
                    ));
                }
                if self.scm.coupling == Coupling::Uncoupled && e.n > 7 {
                    return Err(invalid(
                        "scm.coupling",
                        "uncoupled recovery is exhaustive and limited to n <= 7",
                    ));
                }
            }
        }
        if let Some(l) = self.algorithm.lambda_graph {
            if l < 0.0 {
                return Err(invalid("algorithm.lambda_graph", "must be nonnegative"));
            }
        }
        if self.algorithm.lambda_eigv <= 0.0 || self.algorithm.lambda_eigv >= 1.0 {
            return Err(invalid("algorithm.lambda_eigv", "must lie in (0, 1)"));
        }
        if self.gscalei.steps == 0 {
            return Err(invalid("gscalei.steps", "need at least one step"));
        }
        if self.gscalei.learning_rate <= 0.0 {
            return Err(invalid("gscalei.learning_rate", "must be positive"));
        }
        if self.gscalei.lambda_recon <= 0.0 {
            return Err(invalid("gscalei.lambda_recon", "must be positive"));
        }
        if self.gscalei.epsilon <= 0.0 {
            return Err(invalid("gscalei.epsilon", "must be positive"));
        }
        Ok(())
    }

    /// Intervention policy with config overrides on the family defaults.
    pub fn intervention_policy(&self) -> InterventionPolicy {
        let mut policy = InterventionPolicy::defaults(self.scm.family);
        if let Some(v) = self.scm.hard_noise_multiplier {
            policy.hard_noise_multiplier = v;
        }
        if let Some(v) = self.scm.pair_noise_multipliers {
            policy.pair_noise_multipliers = v;
        }
        if let Some(v) = self.scm.soft_mechanism_scale {
            policy.soft_mechanism_scale = v;
        }
        if let Some(v) = self.scm.soft_noise_multiplier {
            policy.soft_noise_multiplier = v;
        }
        policy
    }

    pub fn score_mode(&self) -> ScoreMode {
        match self.score.mode {
            ScoreModeName::Oracle => ScoreMode::Oracle,
            ScoreModeName::GaussianEstimate => ScoreMode::GaussianEstimate,
            ScoreModeName::Noisy => ScoreMode::Noisy {
                noise_var: self.score.noise_var,
            },
        }
    }

    /// Graph threshold: explicit config value or the per-mode default.
    pub fn lambda_graph(&self) -> f64 {
        if let Some(l) = self.algorithm.lambda_graph {
            return l;
        }
        let noisy = self.score.mode != ScoreModeName::Oracle;
        match (self.algorithm.name, self.scm.family, self.scm.intervention) {
            (AlgorithmName::Gscalei, _, _) => {
                if noisy {
                    0.5
                } else {
                    0.01
                }
            }
            (_, ScmFamily::Quadratic, _) => {
                if noisy {
                    0.1
                } else {
                    0.001
                }
            }
            (_, ScmFamily::Linear, InterventionType::Hard) => {
                if noisy {
                    0.1
                } else {
                    0.002
                }
            }
            (_, ScmFamily::Linear, InterventionType::Soft) => {
                if noisy {
                    0.001
                } else {
                    0.0001
                }
            }
        }
    }

    pub fn gscale_config(&self) -> GscaleConfig {
        GscaleConfig {
            lambda_recon: self.gscalei.lambda_recon,
            epsilon: self.gscalei.epsilon,
            steps: self.gscalei.steps,
            learning_rate: self.gscalei.learning_rate,
            loss_norm: match self.gscalei.loss {
                LossName::Frobenius => LossNorm::Frobenius,
                LossName::EntrywiseL1 => LossNorm::EntrywiseL1,
            },
            lambda_graph: self.lambda_graph(),
            early_stop_window: self.gscalei.early_stop_window,
            early_stop_tol: self.gscalei.early_stop_tol,
            restarts: self.gscalei.restarts,
            restart_tol: self.gscalei.restart_tol,
            ..GscaleConfig::default()
        }
    }

    /// Stable 64-bit FNV-1a hash of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in json.as_bytes() {
            hash ^= u64::from(*byte);
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{hash:016x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const LINEAR_HARD_TOML: &str = r#"
[experiment]
n = 5
d = 100
n_samples = 50000
graph_density = 0.5
n_graphs = 50
master_seed = 1

[scm]
family = "linear"
intervention = "hard"

[mixing]
family = "linear"

[score]
mode = "oracle"

[algorithm]
name = "lscalei"
"#;

    #[test]
    fn parses_and_validates() {
        let config = ExperimentConfig::from_toml_str(LINEAR_HARD_TOML).unwrap();
        assert_eq!(config.experiment.n, 5);
        assert_eq!(config.lambda_graph(), 0.002);
        assert_eq!(config.hash().len(), 16);
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = ExperimentConfig::from_toml_str(LINEAR_HARD_TOML).unwrap();
        let b = ExperimentConfig::from_toml_str(LINEAR_HARD_TOML).unwrap();
        assert_eq!(a.hash(), b.hash());
        let mut c = a.clone();
        c.experiment.master_seed = 2;
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn rejects_gaussian_estimate_on_quadratic() {
        let toml = LINEAR_HARD_TOML
            .replace(
                "family = \"linear\"\nintervention",
                "family = \"quadratic\"\nintervention",
            )
            .replace("mode = \"oracle\"", "mode = \"gaussian-estimate\"");
        let err = ExperimentConfig::from_toml_str(&toml).unwrap_err();
        assert!(err.to_string().contains("score.mode"), "{err}");
    }

    #[test]
    fn rejects_gscalei_with_linear_mixing() {
        let toml = LINEAR_HARD_TOML.replace("name = \"lscalei\"", "name = \"gscalei\"");
        let err = ExperimentConfig::from_toml_str(&toml).unwrap_err();
        assert!(err.to_string().contains("algorithm.name"), "{err}");
    }

    #[test]
    fn rejects_bad_density() {
        let toml = LINEAR_HARD_TOML.replace("graph_density = 0.5", "graph_density = 1.5");
        let err = ExperimentConfig::from_toml_str(&toml).unwrap_err();
        assert!(err.to_string().contains("graph_density"), "{err}");
    }

    #[test]
    fn soft_default_threshold() {
        let toml = LINEAR_HARD_TOML.replace("intervention = \"hard\"", "intervention = \"soft\"");
        let config = ExperimentConfig::from_toml_str(&toml).unwrap();
        assert_eq!(config.lambda_graph(), 0.0001);
    }
}
