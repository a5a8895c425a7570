//! GSCALE-I: causal latent estimation for general (tanh-GLM-parameterized)
//! transformations from coupled interventional environment pairs.
//!
//! The encoder parameter `H ∈ R^{n×d}` defines `Ẑ = H·arctanh(X)` with
//! decoder `X̂ = tanh(H†·Ẑ)`. Stage G1 minimizes the deviation of the score
//! change matrix `D_t(h)` from identity plus a reconstruction penalty; stage
//! G2 thresholds observational-vs-interventional score changes into parent
//! sets. The uncoupled variant searches all pairings exhaustively and keeps
//! the feasible one with the smallest loss.

use crate::graph::Dag;
use crate::linalg;
use crate::lscalei::{acyclic_repair, CrlEstimate, EstimateMode};
use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GscaleError {
    #[error("observed samples outside (-1, 1): arctanh undefined")]
    OutsideDomain,
    #[error("loss became non-finite at step {0} (arctanh domain violation or divergence)")]
    NonFiniteLoss(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("uncoupled search supports at most {max} nodes, got {got}")]
    TooManyNodes { max: usize, got: usize },
    #[error("no coupling candidate satisfied the constraints (best infeasible loss {best_loss:.3e} at permutation {best_perm:?})")]
    NoFeasibleCoupling {
        best_loss: f64,
        best_perm: Vec<usize>,
    },
    #[error("encoder is numerically rank-deficient")]
    RankDeficientEncoder,
}

/// Norm applied to `D_t(h) − I` in the training objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossNorm {
    Frobenius,
    EntrywiseL1,
}

/// Optimizer contract: momentum-free adaptive per-coordinate step scaling
/// with early stopping.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GscaleConfig {
    /// Reconstruction weight λ.
    pub lambda_recon: f64,
    /// Smoothing constant inside `|x| ≈ sqrt(x² + ε²)` during training.
    pub epsilon: f64,
    pub steps: usize,
    pub learning_rate: f64,
    pub loss_norm: LossNorm,
    /// Graph threshold λ_G on the entries of `D(h)`.
    pub lambda_graph: f64,
    /// Stop when the best loss has not improved by `early_stop_tol` over
    /// this many steps.
    pub early_stop_window: usize,
    pub early_stop_tol: f64,
    pub rms_decay: f64,
    pub rms_eps: f64,
    /// Record a trace row every this many steps.
    pub trace_every: usize,
    /// Re-initialize and refit up to this many times while the achieved loss
    /// stays above `restart_tol` (permutation local minima leave the loss
    /// near an integer; good perfect-score fits reach ~1e-6).
    pub restarts: usize,
    pub restart_tol: f64,
}

impl Default for GscaleConfig {
    fn default() -> Self {
        GscaleConfig {
            lambda_recon: 1.0,
            epsilon: 1e-6,
            steps: 30_000,
            learning_rate: 1e-3,
            loss_norm: LossNorm::Frobenius,
            lambda_graph: 0.01,
            early_stop_window: 500,
            early_stop_tol: 1e-9,
            rms_decay: 0.99,
            rms_eps: 1e-8,
            trace_every: 100,
            restarts: 3,
            restart_tol: 1e-3,
        }
    }
}

/// One row of the training trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub loss: f64,
    pub recon_loss: f64,
    pub dt_deviation: f64,
}

/// Result of a coupled fit.
#[derive(Debug, Clone)]
pub struct GscaleFit {
    pub estimate: CrlEstimate,
    pub loss: f64,
    pub dt: DMatrix<f64>,
    pub trace: Vec<TraceRow>,
}

/// Result of the uncoupled search.
#[derive(Debug, Clone)]
pub struct UncoupledFit {
    pub fit: GscaleFit,
    /// Selected pairing: first-set environment `m` couples with second-set
    /// environment `coupling[m]`.
    pub coupling: Vec<usize>,
}

/// Inputs for a coupled GSCALE-I fit: observational samples plus, per node
/// pair, the observed-space score difference of the two coupled environments
/// evaluated at the observational samples. The observational-vs-
/// interventional diffs feed stage G2.
#[derive(Debug, Clone)]
pub struct GscaleInput {
    pub x_obs: DMatrix<f64>,
    pub coupled_diffs: Vec<DMatrix<f64>>,
    pub obs_int_diffs: Vec<DMatrix<f64>>,
}

fn smooth_abs(x: f64, eps: f64) -> f64 {
    (x * x + eps * eps).sqrt()
}

fn smooth_abs_grad(x: f64, eps: f64) -> f64 {
    let denom = (x * x + eps * eps).sqrt();
    if denom == 0.0 {
        0.0
    } else {
        x / denom
    }
}

/// Shared forward quantities for one encoder parameter.
struct Forward {
    p: DMatrix<f64>,     // H† (d×n)
    m_inv: DMatrix<f64>, // (H Hᵀ)^{-1}
    t: DMatrix<f64>,     // U Hᵀ (n_s×n)
    x_hat: DMatrix<f64>, // tanh(T Pᵀ)
    c: DMatrix<f64>,     // 1 − x_hat²
}

fn forward_pass(h: &DMatrix<f64>, u: &DMatrix<f64>) -> Result<Forward, GscaleError> {
    let m = h * h.transpose();
    let Some(m_inv) = m.try_inverse() else {
        return Err(GscaleError::RankDeficientEncoder);
    };
    let p = h.transpose() * &m_inv;
    let t = u * h.transpose();
    let v = &t * p.transpose();
    let x_hat = v.map(f64::tanh);
    let c = x_hat.map(|x| 1.0 - x * x);
    Ok(Forward {
        p,
        m_inv,
        t,
        x_hat,
        c,
    })
}

/// Score change matrix: column `j` holds the per-coordinate mean absolute
/// pulled-back differences of `diffs[j]`. `epsilon = None` uses the exact
/// absolute value (reporting); `Some(ε)` the smooth surrogate (training).
pub fn compute_dt(
    h: &DMatrix<f64>,
    x_obs: &DMatrix<f64>,
    diffs: &[DMatrix<f64>],
    epsilon: Option<f64>,
) -> Result<DMatrix<f64>, GscaleError> {
    if x_obs.iter().any(|v| v.abs() >= 1.0) {
        return Err(GscaleError::OutsideDomain);
    }
    let u = x_obs.map(f64::atanh);
    let fwd = forward_pass(h, &u)?;
    Ok(dt_from_forward(&fwd, diffs, epsilon))
}

fn dt_from_forward(fwd: &Forward, diffs: &[DMatrix<f64>], epsilon: Option<f64>) -> DMatrix<f64> {
    let n = fwd.p.ncols();
    let n_s = fwd.c.nrows() as f64;
    let mut dt = DMatrix::zeros(n, diffs.len());
    for (j, delta) in diffs.iter().enumerate() {
        let w = fwd.c.component_mul(delta) * &fwd.p; // n_s × n
        for i in 0..n {
            let col = w.column(i);
            let total: f64 = match epsilon {
                Some(eps) => col.iter().map(|&v| smooth_abs(v, eps)).sum(),
                None => col.iter().map(|&v| v.abs()).sum(),
            };
            dt[(i, j)] = total / n_s;
        }
    }
    dt
}

#[derive(Debug, Clone, Copy)]
pub struct LossParts {
    pub total: f64,
    pub score: f64,
    pub recon: f64,
}

/// Loss and analytic gradient of the smoothed objective
/// `‖D_t(h) − I_target‖ + λ·E‖h⁻¹(h(X)) − X‖²` with respect to `H`.
/// `targets[j]` names the identity row for pair `j` (so column `j` of the
/// score-change matrix is compared against `e_{targets[j]}`).
fn loss_and_grad(
    h: &DMatrix<f64>,
    u: &DMatrix<f64>,
    x: &DMatrix<f64>,
    diffs: &[DMatrix<f64>],
    targets: &[usize],
    cfg: &GscaleConfig,
) -> Result<(LossParts, DMatrix<f64>), GscaleError> {
    let n = h.nrows();
    let d = h.ncols();
    let n_s = x.nrows();
    let n_s_f = n_s as f64;
    let eps = cfg.epsilon;

    let fwd = forward_pass(h, u)?;
    let Forward {
        p,
        m_inv,
        t,
        x_hat,
        c,
    } = &fwd;

    // Per-pair pulled-back diffs and the score-change matrix.
    let w_blocks: Vec<DMatrix<f64>> = diffs
        .iter()
        .map(|delta| c.component_mul(delta) * p)
        .collect();
    let mut a = DMatrix::zeros(n, diffs.len());
    for (j, w) in w_blocks.iter().enumerate() {
        for i in 0..n {
            a[(i, j)] = w.column(i).iter().map(|&v| smooth_abs(v, eps)).sum::<f64>() / n_s_f;
        }
    }

    // Score loss and its adjoint on `a`.
    let mut score_loss = 0.0;
    let mut a_bar = DMatrix::zeros(n, diffs.len());
    for (j, &target) in targets.iter().enumerate() {
        for i in 0..n {
            let dev = a[(i, j)] - if i == target { 1.0 } else { 0.0 };
            match cfg.loss_norm {
                LossNorm::Frobenius => {
                    score_loss += dev * dev;
                    a_bar[(i, j)] = 2.0 * dev;
                }
                LossNorm::EntrywiseL1 => {
                    score_loss += smooth_abs(dev, eps);
                    a_bar[(i, j)] = smooth_abs_grad(dev, eps);
                }
            }
        }
    }

    // Reconstruction loss.
    let resid = x_hat - x;
    let recon_loss = cfg.lambda_recon * resid.norm_squared() / n_s_f;
    let total = score_loss + recon_loss;
    if !total.is_finite() {
        return Err(GscaleError::NonFiniteLoss(0));
    }

    // Reverse pass.
    let mut p_bar = DMatrix::zeros(d, n);
    let mut c_bar = DMatrix::<f64>::zeros(n_s, d);
    for (j, w) in w_blocks.iter().enumerate() {
        // w̄[s,i] = ā_{i,j}·φ'(w[s,i]) / n_s
        let mut w_bar = DMatrix::zeros(n_s, n);
        for i in 0..n {
            let scale = a_bar[(i, j)] / n_s_f;
            if scale == 0.0 {
                continue;
            }
            for s in 0..n_s {
                w_bar[(s, i)] = scale * smooth_abs_grad(w[(s, i)], eps);
            }
        }
        let cd = c.component_mul(&diffs[j]); // n_s × d
        p_bar += cd.transpose() * &w_bar;
        c_bar += (w_bar * p.transpose()).component_mul(&diffs[j]);
    }

    // Reconstruction and tanh chain.
    let mut xh_bar = resid * (2.0 * cfg.lambda_recon / n_s_f);
    // c = 1 − x̂²  ⇒  x̄ₕ −= 2·x̂ ⊙ c̄
    xh_bar -= 2.0 * x_hat.component_mul(&c_bar);
    let v_bar = c.component_mul(&xh_bar); // dtanh = c
    p_bar += v_bar.transpose() * t;
    let t_bar = v_bar * p; // n_s × n
    let mut h_bar = t_bar.transpose() * u; // n × d

    // P = Hᵀ M⁻¹ with M = H Hᵀ.
    h_bar += m_inv * p_bar.transpose();
    let m_bar = -(p.transpose() * &p_bar * m_inv);
    h_bar += (&m_bar + m_bar.transpose()) * h;

    Ok((
        LossParts {
            total,
            score: score_loss,
            recon: recon_loss,
        },
        h_bar,
    ))
}

/// Compares the analytic gradient against central finite differences of the
/// smoothed objective at `h`; returns the maximum relative entry error.
pub fn gradient_check(
    h: &DMatrix<f64>,
    x: &DMatrix<f64>,
    diffs: &[DMatrix<f64>],
    targets: &[usize],
    cfg: &GscaleConfig,
) -> Result<f64, GscaleError> {
    if x.iter().any(|v| v.abs() >= 1.0) {
        return Err(GscaleError::OutsideDomain);
    }
    let u = x.map(f64::atanh);
    let (_, grad) = loss_and_grad(h, &u, x, diffs, targets, cfg)?;
    let step = 1e-6;
    let mut max_rel: f64 = 0.0;
    for i in 0..h.nrows() {
        for j in 0..h.ncols() {
            let mut hp = h.clone();
            let mut hm = h.clone();
            hp[(i, j)] += step;
            hm[(i, j)] -= step;
            let lp = loss_value(&hp, x, diffs, targets, cfg, false)?.total;
            let lm = loss_value(&hm, x, diffs, targets, cfg, false)?.total;
            let fd = (lp - lm) / (2.0 * step);
            let rel = (grad[(i, j)] - fd).abs() / grad[(i, j)].abs().max(1e-3);
            max_rel = max_rel.max(rel);
        }
    }
    Ok(max_rel)
}

/// Evaluates the objective without gradients, optionally with exact `|·|`.
pub fn loss_value(
    h: &DMatrix<f64>,
    x: &DMatrix<f64>,
    diffs: &[DMatrix<f64>],
    targets: &[usize],
    cfg: &GscaleConfig,
    exact_abs: bool,
) -> Result<LossParts, GscaleError> {
    if x.iter().any(|v| v.abs() >= 1.0) {
        return Err(GscaleError::OutsideDomain);
    }
    let u = x.map(f64::atanh);
    let fwd = forward_pass(h, &u)?;
    let eps = if exact_abs { None } else { Some(cfg.epsilon) };
    let a = dt_from_forward(&fwd, diffs, eps);
    let mut score = 0.0;
    for (j, &target) in targets.iter().enumerate() {
        for i in 0..a.nrows() {
            let dev = a[(i, j)] - if i == target { 1.0 } else { 0.0 };
            score += match cfg.loss_norm {
                LossNorm::Frobenius => dev * dev,
                LossNorm::EntrywiseL1 => {
                    if exact_abs {
                        dev.abs()
                    } else {
                        smooth_abs(dev, cfg.epsilon)
                    }
                }
            };
        }
    }
    let resid = &fwd.x_hat - x;
    let recon = cfg.lambda_recon * resid.norm_squared() / x.nrows() as f64;
    Ok(LossParts {
        total: score + recon,
        score,
        recon,
    })
}

/// Permutes encoder rows so the dominant entries of the score-change matrix
/// land on the requested targets (assignment on `D_t`), removing the
/// permutation ambiguity that otherwise leaves the optimizer in a local
/// minimum with one misassigned column.
fn align_rows_to_targets(
    h: &DMatrix<f64>,
    u: &DMatrix<f64>,
    diffs: &[DMatrix<f64>],
    targets: &[usize],
) -> DMatrix<f64> {
    let Ok(fwd) = forward_pass(h, u) else {
        return h.clone();
    };
    let dt = dt_from_forward(&fwd, diffs, None);
    let n = h.nrows();
    // weights[t][i]: gain of assigning encoder row i to coordinate t; columns
    // of D_t are compared on a log scale so one huge entry cannot dominate
    // the whole assignment.
    let mut weights = DMatrix::zeros(n, n);
    for (j, &target) in targets.iter().enumerate() {
        for i in 0..n {
            weights[(target, i)] += (dt[(i, j)].max(1e-12)).ln();
        }
    }
    let (_, perm) = crate::metrics::best_assignment(&weights);
    let mut aligned = DMatrix::zeros(n, h.ncols());
    for t in 0..n {
        aligned.row_mut(t).copy_from(&h.row(perm[t]));
    }
    aligned
}

/// Whitening-style initialization: the top-`n` right singular vectors of the
/// observational `arctanh` samples, rescaled so that the column maxima of the
/// initial score-change matrix average to one (`D_t(αH) = D_t(H)/α`). The
/// rescaling puts the score term on the identity's scale from the start.
fn initial_encoder(u: &DMatrix<f64>, n: usize, diffs: &[DMatrix<f64>]) -> DMatrix<f64> {
    let svd = u.clone().svd(false, true);
    let vt = svd.v_t.as_ref().expect("svd with v_t");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap()
    });
    let mut h = DMatrix::zeros(n, u.ncols());
    for (row, &i) in idx.iter().take(n).enumerate() {
        h.row_mut(row).copy_from(&vt.row(i));
    }
    if let Ok(fwd) = forward_pass(&h, u) {
        let dt = dt_from_forward(&fwd, diffs, None);
        let mut scale = 0.0;
        for j in 0..dt.ncols() {
            scale += dt.column(j).iter().fold(0.0f64, |acc, &v| acc.max(v));
        }
        scale /= dt.ncols().max(1) as f64;
        if scale.is_finite() && scale > 0.0 {
            h *= scale;
        }
    }
    h
}

struct FitOutcome {
    h: DMatrix<f64>,
    loss: f64,
    trace: Vec<TraceRow>,
}

/// RMS-style gradient descent with early stopping; returns the best-loss
/// iterate.
fn fit_from(
    h0: DMatrix<f64>,
    u: &DMatrix<f64>,
    x: &DMatrix<f64>,
    diffs: &[DMatrix<f64>],
    targets: &[usize],
    cfg: &GscaleConfig,
) -> Result<FitOutcome, GscaleError> {
    let mut h = h0;
    let mut rms = DMatrix::<f64>::zeros(h.nrows(), h.ncols());
    let mut best_h = h.clone();
    let mut best_loss = f64::INFINITY;
    let mut best_step = 0usize;
    let mut trace = Vec::new();
    for step in 0..cfg.steps {
        let (parts, grad) = loss_and_grad(&h, u, x, diffs, targets, cfg).map_err(|e| match e {
            GscaleError::NonFiniteLoss(_) => GscaleError::NonFiniteLoss(step),
            other => other,
        })?;
        if !parts.total.is_finite() || !grad.iter().all(|g| g.is_finite()) {
            return Err(GscaleError::NonFiniteLoss(step));
        }
        if parts.total < best_loss - cfg.early_stop_tol {
            best_step = step;
        }
        if parts.total < best_loss {
            best_loss = parts.total;
            best_h.copy_from(&h);
        }
        if step % cfg.trace_every == 0 {
            trace.push(TraceRow {
                step,
                loss: parts.total,
                recon_loss: parts.recon,
                dt_deviation: parts.score,
            });
        }
        if step - best_step >= cfg.early_stop_window {
            break;
        }
        for i in 0..h.nrows() {
            for j in 0..h.ncols() {
                let g = grad[(i, j)];
                rms[(i, j)] = cfg.rms_decay * rms[(i, j)] + (1.0 - cfg.rms_decay) * g * g;
                h[(i, j)] -= cfg.learning_rate * g / (rms[(i, j)].sqrt() + cfg.rms_eps);
            }
        }
    }
    let final_parts = loss_value(&best_h, x, diffs, targets, cfg, false)?;
    trace.push(TraceRow {
        step: cfg.steps,
        loss: final_parts.total,
        recon_loss: final_parts.recon,
        dt_deviation: final_parts.score,
    });
    Ok(FitOutcome {
        h: best_h,
        loss: final_parts.total,
        trace,
    })
}

/// Stage G2: latent graph from thresholded observational-vs-interventional
/// score changes under the fitted encoder, with the same acyclicity repair as
/// LSCALE-I.
pub fn stage_g2_graph(
    h: &DMatrix<f64>,
    x_obs: &DMatrix<f64>,
    obs_int_diffs: &[DMatrix<f64>],
    lambda_graph: f64,
) -> Result<Dag, GscaleError> {
    let stats = compute_dt(h, x_obs, obs_int_diffs, None)?;
    Ok(acyclic_repair(&stats, lambda_graph))
}

/// Stage G1 + G2 for a known (or candidate) coupling. `rng` drives the one
/// re-initialization attempted if the first fit diverges.
pub fn fit_coupled<R: Rng + ?Sized>(
    input: &GscaleInput,
    cfg: &GscaleConfig,
    rng: &mut R,
) -> Result<GscaleFit, GscaleError> {
    let n = input.coupled_diffs.len();
    if input.x_obs.iter().any(|v| v.abs() >= 1.0) {
        return Err(GscaleError::OutsideDomain);
    }
    for delta in input.coupled_diffs.iter().chain(&input.obs_int_diffs) {
        if delta.shape() != input.x_obs.shape() {
            return Err(GscaleError::ShapeMismatch(format!(
                "diff block {:?} vs samples {:?}",
                delta.shape(),
                input.x_obs.shape()
            )));
        }
    }
    let u = input.x_obs.map(f64::atanh);
    let targets: Vec<usize> = (0..n).collect();
    let h0 = initial_encoder(&u, n, &input.coupled_diffs);
    let mut best: Option<FitOutcome> = None;
    for attempt in 0..=cfg.restarts {
        let mut start = if attempt == 0 {
            h0.clone()
        } else {
            // Fresh random rotation of the whitening rows plus a small jitter.
            let q = {
                let raw = linalg::standard_normal_matrix(n, n, rng);
                let qr = raw.qr();
                qr.q()
            };
            &q * &h0 + linalg::standard_normal_matrix(n, u.ncols(), rng) * 1e-3
        };
        start = align_rows_to_targets(&start, &u, &input.coupled_diffs, &targets);
        match fit_from(start, &u, &input.x_obs, &input.coupled_diffs, &targets, cfg) {
            Ok(out) => {
                let done = out.loss <= cfg.restart_tol;
                if best.as_ref().is_none_or(|b| out.loss < b.loss) {
                    best = Some(out);
                }
                if done {
                    break;
                }
            }
            Err(GscaleError::NonFiniteLoss(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    let Some(outcome) = best else {
        return Err(GscaleError::NonFiniteLoss(0));
    };
    let dt = compute_dt(&outcome.h, &input.x_obs, &input.coupled_diffs, None)?;
    let graph = stage_g2_graph(
        &outcome.h,
        &input.x_obs,
        &input.obs_int_diffs,
        cfg.lambda_graph,
    )?;
    let latents = &u * outcome.h.transpose();
    Ok(GscaleFit {
        estimate: CrlEstimate {
            encoder: outcome.h,
            graph,
            latents,
            mode: EstimateMode::General,
        },
        loss: outcome.loss,
        dt,
        trace: outcome.trace,
    })
}

/// Largest `n` accepted by the exhaustive coupling search.
pub const MAX_UNCOUPLED_NODES: usize = 7;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn rec(n: usize, current: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if current.len() == n {
            out.push(current.clone());
            return;
        }
        for k in 0..n {
            if !used[k] {
                used[k] = true;
                current.push(k);
                rec(n, current, used, out);
                current.pop();
                used[k] = false;
            }
        }
    }
    rec(n, &mut current, &mut used, &mut out);
    out
}

fn indicator(m: &DMatrix<f64>, lambda: f64) -> DMatrix<bool> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] >= lambda)
}

/// Feasibility of a candidate per the uncoupled constraints: the indicator of
/// `D(h)` must match the column-permuted indicator of `D̃(h)`, have a full
/// diagonal, and contain no 2-cycles.
fn coupling_feasible(d_ind: &DMatrix<bool>, d_tilde_ind: &DMatrix<bool>, perm: &[usize]) -> bool {
    let n = d_ind.nrows();
    for m in 0..n {
        for i in 0..n {
            if d_ind[(i, m)] != d_tilde_ind[(i, perm[m])] {
                return false;
            }
        }
    }
    for i in 0..n {
        if !d_ind[(i, i)] {
            return false;
        }
        for m in 0..n {
            if i != m && d_ind[(i, m)] && d_ind[(m, i)] {
                return false;
            }
        }
    }
    true
}

/// Inputs for the uncoupled search: cross-pair diffs for every first/second
/// environment combination plus the observational diffs of both sets.
#[derive(Debug, Clone)]
pub struct UncoupledInput {
    pub x_obs: DMatrix<f64>,
    /// `cross_diffs[m][k]`: score difference of first-set env `m` vs
    /// second-set env `k`, at the observational samples.
    pub cross_diffs: Vec<Vec<DMatrix<f64>>>,
    /// Observational-vs-first-set diffs (for `D(h)` and stage G2).
    pub obs_int_diffs: Vec<DMatrix<f64>>,
    /// Observational-vs-second-set diffs (for `D̃(h)`).
    pub obs_int_tilde_diffs: Vec<DMatrix<f64>>,
}

/// Exhaustive coupling recovery: fits every candidate pairing, checks the
/// indicator constraints at threshold λ_G, and returns the feasible candidate
/// with the smallest achieved loss.
pub fn fit_uncoupled(
    input: &UncoupledInput,
    cfg: &GscaleConfig,
    seed: u64,
) -> Result<UncoupledFit, GscaleError> {
    use rand::SeedableRng;
    let n = input.cross_diffs.len();
    if n > MAX_UNCOUPLED_NODES {
        return Err(GscaleError::TooManyNodes {
            max: MAX_UNCOUPLED_NODES,
            got: n,
        });
    }
    let candidates = permutations(n);
    let fits: Vec<(Vec<usize>, Result<(GscaleFit, bool), GscaleError>)> = candidates
        .into_par_iter()
        .map(|perm| {
            let coupled: Vec<DMatrix<f64>> = (0..n)
                .map(|m| input.cross_diffs[m][perm[m]].clone())
                .collect();
            let gin = GscaleInput {
                x_obs: input.x_obs.clone(),
                coupled_diffs: coupled,
                obs_int_diffs: input.obs_int_diffs.clone(),
            };
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(crate::seeding::derive_seed(
                seed,
                &[
                    crate::seeding::ALGO_STREAM,
                    perm.iter().fold(0, |acc, &p| acc * 16 + p as u64),
                ],
            ));
            let result = fit_coupled(&gin, cfg, &mut rng).and_then(|fit| {
                let d = compute_dt(
                    &fit.estimate.encoder,
                    &input.x_obs,
                    &input.obs_int_diffs,
                    None,
                )?;
                let d_tilde = compute_dt(
                    &fit.estimate.encoder,
                    &input.x_obs,
                    &input.obs_int_tilde_diffs,
                    None,
                )?;
                let feasible = coupling_feasible(
                    &indicator(&d, cfg.lambda_graph),
                    &indicator(&d_tilde, cfg.lambda_graph),
                    &perm,
                );
                Ok((fit, feasible))
            });
            (perm, result)
        })
        .collect();

    let mut best_feasible: Option<(f64, Vec<usize>, GscaleFit)> = None;
    let mut best_any = (f64::INFINITY, vec![0usize; n]);
    for (perm, result) in fits {
        let (fit, feasible) = result?;
        if fit.loss < best_any.0 {
            best_any = (fit.loss, perm.clone());
        }
        if feasible && best_feasible.as_ref().is_none_or(|(l, _, _)| fit.loss < *l) {
            best_feasible = Some((fit.loss, perm, fit));
        }
    }
    match best_feasible {
        Some((_, coupling, fit)) => Ok(UncoupledFit { fit, coupling }),
        None => Err(GscaleError::NoFeasibleCoupling {
            best_loss: best_any.0,
            best_perm: best_any.1,
        }),
    }
}

/// Node-level identification from a single coupled pair: minimizes the
/// single-column objective `‖[D_t(h)]_{:,target} − e_target‖²` (plus
/// reconstruction) and returns the fitted encoder.
pub fn partial_identify_node<R: Rng + ?Sized>(
    x_obs: &DMatrix<f64>,
    pair_diff: &DMatrix<f64>,
    target_coord: usize,
    n: usize,
    cfg: &GscaleConfig,
    rng: &mut R,
) -> Result<(DMatrix<f64>, f64), GscaleError> {
    if x_obs.iter().any(|v| v.abs() >= 1.0) {
        return Err(GscaleError::OutsideDomain);
    }
    let u = x_obs.map(f64::atanh);
    let diffs = vec![pair_diff.clone()];
    let targets = vec![target_coord];
    let h0 = initial_encoder(&u, n, &diffs);
    let mut best: Option<FitOutcome> = None;
    for attempt in 0..=cfg.restarts {
        let start = if attempt == 0 {
            align_rows_to_targets(&h0, &u, &diffs, &targets)
        } else {
            let q = {
                let raw = linalg::standard_normal_matrix(n, n, rng);
                raw.qr().q()
            };
            let rotated = &q * &h0 + linalg::standard_normal_matrix(n, u.ncols(), rng) * 1e-3;
            align_rows_to_targets(&rotated, &u, &diffs, &targets)
        };
        match fit_from(start, &u, x_obs, &diffs, &targets, cfg) {
            Ok(out) => {
                let done = out.loss <= cfg.restart_tol;
                if best.as_ref().is_none_or(|b| out.loss < b.loss) {
                    best = Some(out);
                }
                if done {
                    break;
                }
            }
            Err(GscaleError::NonFiniteLoss(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    let Some(outcome) = best else {
        return Err(GscaleError::NonFiniteLoss(0));
    };
    Ok((outcome.h, outcome.loss))
}
