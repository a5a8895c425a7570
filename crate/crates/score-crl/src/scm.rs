//! Latent structural causal models: linear-Gaussian and quadratic
//! additive-noise mechanisms, interventions, exact ancestral sampling, exact
//! scores and log densities, and the statistical-diversity checkers.

use crate::graph::Dag;
use crate::linalg;
use crate::seeding;
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScmError {
    #[error("intervention target {0} out of range for {1} nodes")]
    TargetOutOfRange(usize, usize),
    #[error("environment index {0} out of range ({1} environments)")]
    EnvOutOfRange(usize, usize),
    #[error("quadratic score undefined: parent vector of node {0} is exactly zero")]
    SingularScorePoint(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("environment sets are not paired (single atomic set)")]
    NotPaired,
}

/// Model family of the latent SCM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScmFamily {
    Linear,
    Quadratic,
}

/// Intervention type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterventionType {
    Hard,
    Soft,
}

/// Whether two interventional environment sets share their target order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coupling {
    Coupled,
    Uncoupled,
}

/// Linear-Gaussian SCM: `Z_i = A_i · Z + N_i`, `N_i ~ N(0, σ_i²)`, with
/// `A_{i,j} ≠ 0` only for `j ∈ Pa(i)`. Node labels `(0, …, n-1)` are assumed
/// to be a valid causal order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearGaussianScm {
    pub dag: Dag,
    pub weights: DMatrix<f64>,
    pub noise_vars: DVector<f64>,
}

impl LinearGaussianScm {
    /// Samples edge weights from Unif(±[0.5, 1.5]) and noise variances from
    /// Unif([0.5, 1.5]).
    pub fn sample<R: Rng + ?Sized>(dag: Dag, rng: &mut R) -> Self {
        let n = dag.n();
        let mut weights = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in dag.parents(i) {
                let mag = rng.random_range(0.5..1.5);
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                weights[(i, j)] = sign * mag;
            }
        }
        let noise_vars = DVector::from_fn(n, |_, _| rng.random_range(0.5..1.5));
        LinearGaussianScm {
            dag,
            weights,
            noise_vars,
        }
    }

    /// Exact covariance `(I − A)⁻¹ · diag(σ²) · (I − A)⁻ᵀ`.
    pub fn covariance(&self) -> DMatrix<f64> {
        let n = self.dag.n();
        let inv = (DMatrix::identity(n, n) - &self.weights)
            .try_inverse()
            .expect("I - A is unit lower-triangular");
        let d = DMatrix::from_diagonal(&self.noise_vars);
        &inv * d * inv.transpose()
    }

    pub fn precision(&self) -> DMatrix<f64> {
        self.covariance()
            .try_inverse()
            .expect("covariance is positive definite")
    }
}

/// Quadratic additive-noise SCM: `Z_i = c_i · sqrt(Z_Pa(i)ᵀ · Q_i · Z_Pa(i)) + N_i`
/// with `Q_i` symmetric positive-definite and mechanism scale `c_i` (1
/// observationally, 1/2 under the soft intervention, 0 under a hard one).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadraticScm {
    pub dag: Dag,
    /// Per-node PD matrix of size `|Pa(i)| × |Pa(i)|` (empty for roots).
    pub q_mats: Vec<DMatrix<f64>>,
    pub mech_scale: DVector<f64>,
    pub noise_vars: DVector<f64>,
}

impl QuadraticScm {
    /// Samples each `Q_i` as a moderate-strength positive-definite matrix:
    /// diagonal scales from Unif([0.5, 1.5]), off-diagonals from a Wishart
    /// correlation shrunk by 0.4 (keeping `Q ≽ 0.6·diag` positive definite),
    /// everything scaled by 0.49 so the mechanism stays comparable to but
    /// below the noise level. Noise variances come from Unif([0.5, 1.5]).
    pub fn sample<R: Rng + ?Sized>(dag: Dag, rng: &mut R) -> Self {
        let n = dag.n();
        let mut q_mats = Vec::with_capacity(n);
        for i in 0..n {
            let k = dag.parents(i).len();
            let m = linalg::standard_normal_matrix(k, k, rng);
            let base = m.transpose() * &m + DMatrix::identity(k, k) * 0.5;
            let corr = DMatrix::from_fn(k, k, |a, b| {
                base[(a, b)] / (base[(a, a)] * base[(b, b)]).sqrt()
            });
            let scales: Vec<f64> = (0..k).map(|_| rng.random_range(0.5..1.5)).collect();
            let q = DMatrix::from_fn(k, k, |a, b| {
                let coupling = if a == b { 1.0 } else { 0.4 * corr[(a, b)] };
                0.49 * coupling * (scales[a] * scales[b]).sqrt()
            });
            q_mats.push(q);
        }
        let noise_vars = DVector::from_fn(n, |_, _| rng.random_range(0.5..1.5));
        QuadraticScm {
            dag,
            q_mats,
            mech_scale: DVector::from_element(n, 1.0),
            noise_vars,
        }
    }

    fn parent_vec(&self, i: usize, z: &DVector<f64>) -> DVector<f64> {
        let pa = self.dag.parents(i);
        DVector::from_fn(pa.len(), |k, _| z[pa[k]])
    }

    /// Mechanism value `c_i · sqrt(zᵀ Q_i z)` (0 for roots or removed
    /// mechanisms).
    pub fn mech(&self, i: usize, z: &DVector<f64>) -> f64 {
        if self.mech_scale[i] == 0.0 || self.dag.parents(i).is_empty() {
            return 0.0;
        }
        let zp = self.parent_vec(i, z);
        self.mech_scale[i] * (zp.dot(&(&self.q_mats[i] * &zp))).sqrt()
    }

    /// Gradient of the mechanism of node `i` with respect to its parent
    /// vector; errors at the non-differentiable point `z_Pa(i) = 0`.
    fn mech_grad_wrt_parents(&self, i: usize, z: &DVector<f64>) -> Result<DVector<f64>, ScmError> {
        let zp = self.parent_vec(i, z);
        let qz = &self.q_mats[i] * &zp;
        let quad = zp.dot(&qz);
        if quad <= 0.0 {
            return Err(ScmError::SingularScorePoint(i));
        }
        Ok(qz * (self.mech_scale[i] / quad.sqrt()))
    }
}

/// A latent SCM of either family; each environment of an
/// [`EnvironmentSet`] is one of these with modified mechanisms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Scm {
    Linear(LinearGaussianScm),
    Quadratic(QuadraticScm),
}

impl Scm {
    pub fn family(&self) -> ScmFamily {
        match self {
            Scm::Linear(_) => ScmFamily::Linear,
            Scm::Quadratic(_) => ScmFamily::Quadratic,
        }
    }

    pub fn dag(&self) -> &Dag {
        match self {
            Scm::Linear(m) => &m.dag,
            Scm::Quadratic(m) => &m.dag,
        }
    }

    pub fn n(&self) -> usize {
        self.dag().n()
    }

    pub fn noise_vars(&self) -> &DVector<f64> {
        match self {
            Scm::Linear(m) => &m.noise_vars,
            Scm::Quadratic(m) => &m.noise_vars,
        }
    }

    /// Conditional mean of node `i` given the rest of `z`.
    fn conditional_mean(&self, i: usize, z: &DVector<f64>) -> f64 {
        match self {
            Scm::Linear(m) => m.weights.row(i).transpose().dot(z),
            Scm::Quadratic(m) => m.mech(i, z),
        }
    }

    /// Ancestral sampling in causal order; returns an `n_s × n` matrix.
    pub fn sample_latent<R: Rng + ?Sized>(&self, n_s: usize, rng: &mut R) -> DMatrix<f64> {
        let n = self.n();
        let std: Vec<f64> = self.noise_vars().iter().map(|v| v.sqrt()).collect();
        let mut out = DMatrix::zeros(n_s, n);
        let mut z = DVector::zeros(n);
        for s in 0..n_s {
            for i in 0..n {
                let noise: f64 = rng.sample(StandardNormal);
                z[i] = self.conditional_mean(i, &z) + std[i] * noise;
            }
            out.row_mut(s).copy_from(&z.transpose());
        }
        out
    }

    /// Exact score `∇_z log p(z)` of this model's latent density.
    pub fn latent_score(&self, z: &DVector<f64>) -> Result<DVector<f64>, ScmError> {
        let n = self.n();
        if z.len() != n {
            return Err(ScmError::DimensionMismatch {
                expected: n,
                got: z.len(),
            });
        }
        match self {
            Scm::Linear(m) => Ok(-(m.precision() * z)),
            Scm::Quadratic(m) => {
                // [s(z)]_i = r_i(n_i) - sum_{j in Ch(i)} d mech_j / d z_i * r_j(n_j)
                // with r_i(u) = -u / sigma_i^2 for Gaussian noise.
                let mut r = DVector::zeros(n);
                for i in 0..n {
                    let ni = z[i] - m.mech(i, z);
                    r[i] = -ni / m.noise_vars[i];
                }
                let mut score = r.clone();
                for j in 0..n {
                    if m.mech_scale[j] == 0.0 {
                        continue;
                    }
                    let pa = m.dag.parents(j);
                    if pa.is_empty() {
                        continue;
                    }
                    let grad = m.mech_grad_wrt_parents(j, z)?;
                    for (k, &i) in pa.iter().enumerate() {
                        score[i] -= grad[k] * r[j];
                    }
                }
                Ok(score)
            }
        }
    }

    /// Exact scores for a whole sample batch (one row per sample). For the
    /// linear family the precision matrix is computed once.
    pub fn latent_scores(&self, z: &DMatrix<f64>) -> Result<DMatrix<f64>, ScmError> {
        let n = self.n();
        if z.ncols() != n {
            return Err(ScmError::DimensionMismatch {
                expected: n,
                got: z.ncols(),
            });
        }
        match self {
            Scm::Linear(m) => {
                let theta = m.precision();
                Ok(-(z * theta))
            }
            Scm::Quadratic(_) => {
                let mut out = DMatrix::zeros(z.nrows(), n);
                for s in 0..z.nrows() {
                    let score = self.latent_score(&z.row(s).transpose())?;
                    out.row_mut(s).copy_from(&score.transpose());
                }
                Ok(out)
            }
        }
    }

    /// Exact log density as a sum of normalized conditional Gaussian
    /// log-densities.
    pub fn latent_log_density(&self, z: &DVector<f64>) -> Result<f64, ScmError> {
        let n = self.n();
        if z.len() != n {
            return Err(ScmError::DimensionMismatch {
                expected: n,
                got: z.len(),
            });
        }
        let mut total = 0.0;
        for i in 0..n {
            let var = self.noise_vars()[i];
            let resid = z[i] - self.conditional_mean(i, z);
            total += -0.5 * ((2.0 * std::f64::consts::PI * var).ln() + resid * resid / var);
        }
        Ok(total)
    }
}

/// Which node an intervention replaces and with what mechanism. Noise
/// variances are absolute replacements, so re-applying a spec is idempotent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterventionSpec {
    pub target: usize,
    pub kind: InterventionKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterventionKind {
    /// Removes parent dependence; the target becomes `N(0, noise_var)`.
    Hard { noise_var: f64 },
    /// Rescales the mechanism and replaces the noise variance.
    Soft {
        mechanism_scale: f64,
        noise_var: f64,
    },
}

/// Variance multipliers and mechanism scales for the intervention recipes.
/// All values are relative to the base model's noise variances and exposed in
/// the experiment config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterventionPolicy {
    /// Hard-intervention noise multiplier for single atomic sets.
    pub hard_noise_multiplier: f64,
    /// Noise multipliers for the two hard mechanisms of a coupled/uncoupled
    /// environment pair.
    pub pair_noise_multipliers: (f64, f64),
    /// Mechanism scale under soft interventions.
    pub soft_mechanism_scale: f64,
    /// Soft-intervention noise multiplier.
    pub soft_noise_multiplier: f64,
}

impl InterventionPolicy {
    /// Defaults per family: hard interventions shrink the noise to σ²/4 for
    /// linear models and inflate it to 5σ² for quadratic ones; a pair of hard
    /// interventions uses (σ²/4, 4σ²); soft interventions halve the mechanism
    /// and replace the noise variance (σ²/4 linear, 5σ² quadratic). The noise
    /// replacement keeps soft interventions on root nodes non-vacuous, which
    /// every encoder-estimation stage needs.
    pub fn defaults(family: ScmFamily) -> Self {
        match family {
            ScmFamily::Linear => InterventionPolicy {
                hard_noise_multiplier: 0.25,
                pair_noise_multipliers: (0.25, 4.0),
                soft_mechanism_scale: 0.5,
                soft_noise_multiplier: 0.25,
            },
            ScmFamily::Quadratic => InterventionPolicy {
                hard_noise_multiplier: 5.0,
                pair_noise_multipliers: (0.25, 4.0),
                soft_mechanism_scale: 0.5,
                soft_noise_multiplier: 5.0,
            },
        }
    }

    pub fn spec(
        &self,
        base: &Scm,
        target: usize,
        itype: InterventionType,
        pair_slot: Option<usize>,
    ) -> InterventionSpec {
        let base_var = base.noise_vars()[target];
        let kind = match itype {
            InterventionType::Hard => {
                let mult = match pair_slot {
                    None => self.hard_noise_multiplier,
                    Some(0) => self.pair_noise_multipliers.0,
                    Some(_) => self.pair_noise_multipliers.1,
                };
                InterventionKind::Hard {
                    noise_var: mult * base_var,
                }
            }
            InterventionType::Soft => InterventionKind::Soft {
                mechanism_scale: self.soft_mechanism_scale,
                noise_var: self.soft_noise_multiplier * base_var,
            },
        };
        InterventionSpec { target, kind }
    }
}

/// Applies an intervention, returning the modified model.
pub fn apply_intervention(scm: &Scm, spec: &InterventionSpec) -> Result<Scm, ScmError> {
    let n = scm.n();
    if spec.target >= n {
        return Err(ScmError::TargetOutOfRange(spec.target, n));
    }
    let i = spec.target;
    let mut out = scm.clone();
    match (&mut out, spec.kind) {
        (Scm::Linear(m), InterventionKind::Hard { noise_var }) => {
            m.weights.row_mut(i).fill(0.0);
            m.noise_vars[i] = noise_var;
        }
        (
            Scm::Linear(m),
            InterventionKind::Soft {
                mechanism_scale,
                noise_var,
            },
        ) => {
            let scaled = m.weights.row(i) * mechanism_scale;
            m.weights.row_mut(i).copy_from(&scaled);
            m.noise_vars[i] = noise_var;
        }
        (Scm::Quadratic(m), InterventionKind::Hard { noise_var }) => {
            m.mech_scale[i] = 0.0;
            m.noise_vars[i] = noise_var;
        }
        (
            Scm::Quadratic(m),
            InterventionKind::Soft {
                mechanism_scale,
                noise_var,
            },
        ) => {
            m.mech_scale[i] = mechanism_scale;
            m.noise_vars[i] = noise_var;
        }
    }
    Ok(out)
}

/// Observational environment plus one or two atomic interventional
/// environments per node. Environment 0 is observational; environments
/// `1..=n` form the first atomic set, `n+1..=2n` (when present) the second.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvironmentSet {
    pub base: Scm,
    envs: Vec<Scm>,
    specs: Vec<Option<InterventionSpec>>,
    targets: Vec<usize>,
    targets_tilde: Option<Vec<usize>>,
    pub coupling: Coupling,
}

impl EnvironmentSet {
    /// One atomic interventional environment per node, targets in a uniformly
    /// random hidden order.
    pub fn atomic<R: Rng + ?Sized>(
        base: Scm,
        itype: InterventionType,
        policy: &InterventionPolicy,
        rng: &mut R,
    ) -> Result<Self, ScmError> {
        let n = base.n();
        let mut targets: Vec<usize> = (0..n).collect();
        targets.shuffle(rng);
        let mut envs = vec![base.clone()];
        let mut specs = vec![None];
        for &t in &targets {
            let spec = policy.spec(&base, t, itype, None);
            envs.push(apply_intervention(&base, &spec)?);
            specs.push(Some(spec));
        }
        Ok(EnvironmentSet {
            base,
            envs,
            specs,
            targets,
            targets_tilde: None,
            coupling: Coupling::Coupled,
        })
    }

    /// Two hard interventional environments per node. `Coupled` shares the
    /// hidden target order between the two sets; `Uncoupled` draws an
    /// independent order for the second set.
    pub fn atomic_pairs<R: Rng + ?Sized>(
        base: Scm,
        policy: &InterventionPolicy,
        coupling: Coupling,
        rng: &mut R,
    ) -> Result<Self, ScmError> {
        let n = base.n();
        let mut targets: Vec<usize> = (0..n).collect();
        targets.shuffle(rng);
        let targets_tilde = match coupling {
            Coupling::Coupled => targets.clone(),
            Coupling::Uncoupled => {
                let mut t: Vec<usize> = (0..n).collect();
                t.shuffle(rng);
                t
            }
        };
        let mut envs = vec![base.clone()];
        let mut specs = vec![None];
        for &t in &targets {
            let spec = policy.spec(&base, t, InterventionType::Hard, Some(0));
            envs.push(apply_intervention(&base, &spec)?);
            specs.push(Some(spec));
        }
        for &t in &targets_tilde {
            let spec = policy.spec(&base, t, InterventionType::Hard, Some(1));
            envs.push(apply_intervention(&base, &spec)?);
            specs.push(Some(spec));
        }
        Ok(EnvironmentSet {
            base,
            envs,
            specs,
            targets,
            targets_tilde: Some(targets_tilde),
            coupling,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.base.n()
    }

    pub fn n_envs(&self) -> usize {
        self.envs.len()
    }

    pub fn has_second_set(&self) -> bool {
        self.targets_tilde.is_some()
    }

    pub fn env(&self, idx: usize) -> Result<&Scm, ScmError> {
        self.envs
            .get(idx)
            .ok_or(ScmError::EnvOutOfRange(idx, self.envs.len()))
    }

    pub fn spec(&self, idx: usize) -> Option<&InterventionSpec> {
        self.specs.get(idx).and_then(|s| s.as_ref())
    }

    /// Index of the `m`-th environment (1-based) of the second atomic set.
    pub fn second_set_env(&self, m: usize) -> Result<usize, ScmError> {
        if self.targets_tilde.is_none() {
            return Err(ScmError::NotPaired);
        }
        Ok(self.n_nodes() + m)
    }

    /// Hidden intervention targets of the first atomic set. Evaluation-only:
    /// the algorithms never see these.
    pub fn oracle_targets(&self) -> &[usize] {
        &self.targets
    }

    /// Hidden targets of the second atomic set (evaluation-only).
    pub fn oracle_targets_tilde(&self) -> Option<&[usize]> {
        self.targets_tilde.as_deref()
    }

    /// The true coupling `π` pairing first-set environment `m` with
    /// second-set environment `π(m)` (evaluation-only).
    pub fn oracle_coupling(&self) -> Option<Vec<usize>> {
        let tilde = self.targets_tilde.as_ref()?;
        Some(
            self.targets
                .iter()
                .map(|&t| {
                    tilde
                        .iter()
                        .position(|&u| u == t)
                        .expect("targets cover [n]")
                })
                .collect(),
        )
    }

    pub fn sample_latent<R: Rng + ?Sized>(
        &self,
        env_idx: usize,
        n_s: usize,
        rng: &mut R,
    ) -> Result<DMatrix<f64>, ScmError> {
        Ok(self.env(env_idx)?.sample_latent(n_s, rng))
    }

    pub fn latent_score(&self, env_idx: usize, z: &DVector<f64>) -> Result<DVector<f64>, ScmError> {
        self.env(env_idx)?.latent_score(z)
    }

    /// `s^a(z) − s^b(z)`.
    pub fn latent_score_diff(
        &self,
        env_a: usize,
        env_b: usize,
        z: &DVector<f64>,
    ) -> Result<DVector<f64>, ScmError> {
        Ok(self.latent_score(env_a, z)? - self.latent_score(env_b, z)?)
    }

    /// Batch form of [`Self::latent_score_diff`], one row per sample.
    pub fn latent_score_diffs(
        &self,
        env_a: usize,
        env_b: usize,
        z: &DMatrix<f64>,
    ) -> Result<DMatrix<f64>, ScmError> {
        Ok(self.env(env_a)?.latent_scores(z)? - self.env(env_b)?.latent_scores(z)?)
    }

    /// Latent samples for every environment, one derived RNG stream per
    /// environment so each dataset is independently reproducible.
    pub fn sample_all_latents(&self, n_s: usize, seed: u64) -> Result<Vec<DMatrix<f64>>, ScmError> {
        use rand::SeedableRng;
        (0..self.n_envs())
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(seeding::derive_seed(
                    seed,
                    &[seeding::ENV_STREAM, k as u64],
                ));
                self.sample_latent(k, n_s, &mut rng)
            })
            .collect()
    }
}

/// Result of the full-rank (score-difference rank) check for one environment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FullRankCheck {
    pub env: usize,
    pub rank: usize,
    pub pa_plus: usize,
    pub pass: bool,
}

/// Numerical rank of the latent score-difference correlation matrix
/// `R_Z^m = E[(s^m − s)(s^m − s)ᵀ]` under the observational measure, using
/// eigenvalue threshold `lambda_eigv` relative to the top eigenvalue, checked
/// against `|Pa⁺(I^m)|`.
pub fn check_assumption_full_rank<R: Rng + ?Sized>(
    env_set: &EnvironmentSet,
    m: usize,
    n_s: usize,
    lambda_eigv: f64,
    rng: &mut R,
) -> Result<FullRankCheck, ScmError> {
    let obs = env_set.env(0)?.sample_latent(n_s, rng);
    let diffs = env_set.latent_score_diffs(m, 0, &obs)?;
    let r = diffs.transpose() * &diffs / n_s as f64;
    let (vals, _) = linalg::sym_eig_desc(&r);
    let top = vals[0].max(0.0);
    let rank = vals
        .iter()
        .filter(|&&v| v > lambda_eigv * top && v > 0.0)
        .count();
    let target = env_set.oracle_targets()[m - 1];
    let pa_plus = env_set.base.dag().parents_plus(target).len();
    Ok(FullRankCheck {
        env: m,
        rank,
        pa_plus,
        pass: rank == pa_plus,
    })
}

/// Per-parent verdicts of the statistical-diversity check for environment
/// `m`: the ratio of the score-difference coordinates of a parent and the
/// target must not be a constant function of `z`.
pub fn check_assumption_rank_two<R: Rng + ?Sized>(
    env_set: &EnvironmentSet,
    m: usize,
    n_probe: usize,
    rng: &mut R,
) -> Result<Vec<(usize, bool)>, ScmError> {
    let target = env_set.oracle_targets()[m - 1];
    let parents = env_set.base.dag().parents(target);
    let obs = env_set.env(0)?.sample_latent(n_probe, rng);
    let diffs = env_set.latent_score_diffs(m, 0, &obs)?;
    let mut ratios: Vec<Vec<f64>> = vec![Vec::new(); parents.len()];
    for s in 0..n_probe {
        let d = diffs.row(s);
        if d[target].abs() < 1e-9 {
            continue;
        }
        for (k, &p) in parents.iter().enumerate() {
            ratios[k].push(d[p] / d[target]);
        }
    }
    let verdict = parents
        .iter()
        .zip(&ratios)
        .map(|(&p, r)| {
            if r.len() < 2 {
                return (p, false);
            }
            let max = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = r.iter().cloned().fold(f64::INFINITY, f64::min);
            let scale = r.iter().map(|x| x.abs()).fold(0.0f64, f64::max).max(1.0);
            (p, (max - min) / scale > 1e-6)
        })
        .collect();
    Ok(verdict)
}
