//! Evaluation metrics: mean correlation coefficient with optimal matching,
//! structural Hamming distance, effective-transform errors, and the
//! normalized latent error.

use crate::graph::{relation_matrices, transitive_closure, Dag, GraphError};
use crate::linalg;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("column {0} has zero variance")]
    ZeroVarianceColumn(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("zero-norm reference latents")]
    ZeroNorm,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// All metrics for one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub mcc: f64,
    pub shd: usize,
    pub shd_tc: usize,
    pub l_scale: f64,
    pub l_pa: f64,
    pub l_sur: f64,
    pub l_norm: f64,
    /// Matching with `corr(Z_i, Ẑ_{perm[i]})` maximal in total.
    pub permutation: Vec<usize>,
}

impl MetricReport {
    pub const CSV_HEADER: &'static str = "mcc,shd,shd_tc,l_scale,l_pa,l_sur,l_norm";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.mcc, self.shd, self.shd_tc, self.l_scale, self.l_pa, self.l_sur, self.l_norm
        )
    }
}

/// Absolute Pearson correlation matrix `C[i][j] = |corr(Z_i, Ẑ_j)|`.
fn abs_corr_matrix(z: &DMatrix<f64>, z_hat: &DMatrix<f64>) -> Result<DMatrix<f64>, MetricsError> {
    if z.nrows() != z_hat.nrows() || z.ncols() != z_hat.ncols() {
        return Err(MetricsError::ShapeMismatch(format!(
            "{:?} vs {:?}",
            z.shape(),
            z_hat.shape()
        )));
    }
    if z.nrows() < 2 {
        return Err(MetricsError::TooFewSamples(z.nrows()));
    }
    let n = z.ncols();
    let mut c = DMatrix::zeros(n, n);
    for i in 0..n {
        let zi = z.column(i).into_owned();
        for j in 0..n {
            let zj = z_hat.column(j).into_owned();
            let r = linalg::pearson(&zi, &zj);
            if r.is_nan() {
                let col = if zi.iter().all(|&v| v == zi[0]) { i } else { j };
                return Err(MetricsError::ZeroVarianceColumn(col));
            }
            c[(i, j)] = r.abs();
        }
    }
    Ok(c)
}

/// Exact maximum-weight assignment over permutations via subset DP.
/// Returns `(best total, perm)` with `perm[i]` the column assigned to row `i`.
pub(crate) fn best_assignment(c: &DMatrix<f64>) -> (f64, Vec<usize>) {
    let n = c.nrows();
    let full = 1usize << n;
    // dp[mask] = best total assigning rows 0..popcount(mask) to columns in mask.
    let mut dp = vec![f64::NEG_INFINITY; full];
    let mut choice = vec![usize::MAX; full];
    dp[0] = 0.0;
    for mask in 0..full {
        if dp[mask] == f64::NEG_INFINITY {
            continue;
        }
        let row = (mask as u32).count_ones() as usize;
        if row == n {
            continue;
        }
        for col in 0..n {
            if mask >> col & 1 == 1 {
                continue;
            }
            let next = mask | (1 << col);
            let val = dp[mask] + c[(row, col)];
            if val > dp[next] {
                dp[next] = val;
                choice[next] = col;
            }
        }
    }
    let mut perm = vec![0usize; n];
    let mut mask = full - 1;
    for row in (0..n).rev() {
        let col = choice[mask];
        perm[row] = col;
        mask &= !(1 << col);
    }
    (dp[full - 1], perm)
}

/// Mean correlation coefficient: the best-permutation mean of absolute
/// Pearson correlations between true and estimated latent components.
pub fn mcc(z: &DMatrix<f64>, z_hat: &DMatrix<f64>) -> Result<(f64, Vec<usize>), MetricsError> {
    let c = abs_corr_matrix(z, z_hat)?;
    let n = c.nrows();
    let (total, perm) = best_assignment(&c);
    Ok((total / n as f64, perm))
}

/// Structural Hamming distance after relabeling: with `perm`, node `i` of
/// `g1` is compared against node `perm[i]` of `g2`. Flips count once.
pub fn shd(g1: &Dag, g2: &Dag, perm: Option<&[usize]>) -> Result<usize, MetricsError> {
    let n = g1.n();
    if g2.n() != n {
        return Err(MetricsError::ShapeMismatch(format!(
            "{} vs {} nodes",
            n,
            g2.n()
        )));
    }
    let identity: Vec<usize> = (0..n).collect();
    let map = perm.unwrap_or(&identity);
    if map.len() != n {
        return Err(MetricsError::ShapeMismatch(format!(
            "permutation of length {}",
            map.len()
        )));
    }
    let mut dist = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let e1 = (g1.is_parent(i, j), g1.is_parent(j, i));
            let e2 = (g2.is_parent(map[i], map[j]), g2.is_parent(map[j], map[i]));
            if e1 != e2 {
                dist += 1;
            }
        }
    }
    Ok(dist)
}

/// Applies the MCC alignment to the effective transform `M = H·G`: rows are
/// permuted so row `i` matches `Z_i`, then rescaled by the diagonal entry.
fn align_effective_transform(hg: &DMatrix<f64>, perm: &[usize]) -> DMatrix<f64> {
    let n = hg.nrows();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m.row_mut(i).copy_from(&hg.row(perm[i]));
    }
    for i in 0..n {
        let d = m[(i, i)];
        if d.abs() > 1e-12 {
            let scaled = m.row(i) / d;
            m.row_mut(i).copy_from(&scaled);
        }
    }
    m
}

/// Effective-transform errors: spectral norms of the aligned, row-rescaled
/// `H·G` minus identity (`l_scale`) and of its entries outside `Pa⁺`
/// (`l_pa`) and outside `sur⁺` (`l_sur`).
pub fn effective_transform_errors(hg: &DMatrix<f64>, dag: &Dag, perm: &[usize]) -> (f64, f64, f64) {
    let n = hg.nrows();
    let aligned = align_effective_transform(hg, perm);
    let rel = relation_matrices(dag);
    let l_scale = linalg::spectral_norm(&(&aligned - DMatrix::identity(n, n)));
    let mask = |allowed: &DMatrix<f64>| {
        DMatrix::from_fn(n, n, |i, j| aligned[(i, j)] * (1.0 - allowed[(i, j)]))
    };
    let l_pa = linalg::spectral_norm(&mask(&rel.pa));
    let l_sur = linalg::spectral_norm(&mask(&rel.sur));
    (l_scale, l_pa, l_sur)
}

/// Normalized latent error `‖Z − Ẑ‖_F / ‖Z‖_F` after permutation, sign, and
/// per-component least-squares scale alignment.
pub fn normalized_latent_error(
    z: &DMatrix<f64>,
    z_hat: &DMatrix<f64>,
    perm: &[usize],
) -> Result<f64, MetricsError> {
    if z.shape() != z_hat.shape() {
        return Err(MetricsError::ShapeMismatch(format!(
            "{:?} vs {:?}",
            z.shape(),
            z_hat.shape()
        )));
    }
    let z_norm = z.norm();
    if z_norm == 0.0 {
        return Err(MetricsError::ZeroNorm);
    }
    let mut residual_sq = 0.0;
    for i in 0..z.ncols() {
        let zi = z.column(i);
        let zh = z_hat.column(perm[i]);
        let denom = zh.dot(&zh);
        let alpha = if denom > 0.0 {
            zi.dot(&zh) / denom
        } else {
            0.0
        };
        residual_sq += (zi - zh * alpha).norm_squared();
    }
    Ok(residual_sq.sqrt() / z_norm)
}

/// Full report given true latents/graph and an estimate. `hg` is the
/// effective transform with `Ẑ = hg · Z` row convention (`hg[m][j]` is the
/// coefficient of `Z_j` in `Ẑ_m`).
///
/// MCC always reports its own best matching. Structural metrics (SHD and the
/// effective-transform errors) align with `alignment` when supplied —
/// synthetic evaluations supply the true intervention order, so that
/// theory-permitted latent mixing cannot masquerade as graph errors — and
/// fall back to the MCC matching otherwise.
pub fn evaluate(
    z: &DMatrix<f64>,
    z_hat: &DMatrix<f64>,
    g_true: &Dag,
    g_hat: &Dag,
    hg: &DMatrix<f64>,
    alignment: Option<&[usize]>,
) -> Result<MetricReport, MetricsError> {
    let (mcc_val, mcc_perm) = mcc(z, z_hat)?;
    let perm: Vec<usize> = alignment
        .map(|p| p.to_vec())
        .unwrap_or_else(|| mcc_perm.clone());
    let shd_val = shd(g_true, g_hat, Some(&perm))?;
    let shd_tc_val = shd(
        &transitive_closure(g_true),
        &transitive_closure(g_hat),
        Some(&perm),
    )?;
    let (l_scale, l_pa, l_sur) = effective_transform_errors(hg, g_true, &perm);
    let l_norm = normalized_latent_error(z, z_hat, &perm)?;
    Ok(MetricReport {
        mcc: mcc_val,
        shd: shd_val,
        shd_tc: shd_tc_val,
        l_scale,
        l_pa,
        l_sur,
        l_norm,
        permutation: perm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::sample_erdos_renyi;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn standard_samples(seed: u64, n_s: usize, n: usize) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        linalg::standard_normal_matrix(n_s, n, &mut rng)
    }

    #[test]
    fn identical_latents_give_one() {
        let z = standard_samples(1, 500, 4);
        let (v, perm) = mcc(&z, &z).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert_eq!(perm, vec![0, 1, 2, 3]);
    }

    #[test]
    fn permuted_scaled_latents_give_one() {
        let z = standard_samples(2, 500, 3);
        // Ẑ = P·Λ·Z with permutation (1, 2, 0) and scales (2, -0.5, 3).
        let mut z_hat = DMatrix::zeros(500, 3);
        z_hat.set_column(1, &(z.column(0) * 2.0));
        z_hat.set_column(2, &(z.column(1) * -0.5));
        z_hat.set_column(0, &(z.column(2) * 3.0));
        let (v, perm) = mcc(&z, &z_hat).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert_eq!(perm, vec![1, 2, 0]);
    }

    #[test]
    fn cubic_distortion_mcc_value() {
        // corr(Z, Z³ + 0.1 Z) = 3.1 / sqrt(15.61) ≈ 0.7846 for Z ~ N(0,1).
        let z = standard_samples(3, 2_000_000, 1);
        let z_hat = z.map(|v| v * v * v + 0.1 * v);
        let (v, _) = mcc(&z, &z_hat).unwrap();
        assert!((v - 0.786).abs() < 0.01, "mcc {v}");
    }

    #[test]
    fn zero_variance_column_rejected() {
        let z = standard_samples(4, 100, 2);
        let mut z_hat = z.clone();
        z_hat.column_mut(1).fill(3.3);
        assert!(matches!(
            mcc(&z, &z_hat),
            Err(MetricsError::ZeroVarianceColumn(1))
        ));
    }

    #[test]
    fn assignment_matches_exhaustive_search() {
        fn exhaustive(c: &DMatrix<f64>) -> f64 {
            let n = c.nrows();
            let mut perm: Vec<usize> = (0..n).collect();
            let mut best = f64::NEG_INFINITY;
            // Heap's algorithm.
            fn heap(k: usize, perm: &mut Vec<usize>, c: &DMatrix<f64>, best: &mut f64) {
                if k == 1 {
                    let total: f64 = perm.iter().enumerate().map(|(i, &j)| c[(i, j)]).sum();
                    if total > *best {
                        *best = total;
                    }
                    return;
                }
                for i in 0..k {
                    heap(k - 1, perm, c, best);
                    if k.is_multiple_of(2) {
                        perm.swap(i, k - 1);
                    } else {
                        perm.swap(0, k - 1);
                    }
                }
            }
            heap(n, &mut perm, c, &mut best);
            best
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 2..=6 {
            for _ in 0..20 {
                let c = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>());
                let (total, perm) = best_assignment(&c);
                let manual: f64 = perm.iter().enumerate().map(|(i, &j)| c[(i, j)]).sum();
                assert!((total - manual).abs() < 1e-12);
                assert!((total - exhaustive(&c)).abs() < 1e-12, "n={n}");
            }
        }
    }

    #[test]
    fn shd_basics() {
        let chain = Dag::chain(3);
        assert_eq!(shd(&chain, &chain, None).unwrap(), 0);
        assert_eq!(shd(&chain, &Dag::empty(3), None).unwrap(), 2);
        // Flipping one edge costs 1.
        let flipped = Dag::from_edges(3, &[(1, 0), (1, 2)]).unwrap();
        assert_eq!(shd(&chain, &flipped, None).unwrap(), 1);
        assert!(shd(&chain, &Dag::empty(4), None).is_err());
    }

    #[test]
    fn shd_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let g1 = sample_erdos_renyi(5, 0.5, &mut rng);
            let g2 = sample_erdos_renyi(5, 0.5, &mut rng);
            assert_eq!(shd(&g1, &g2, None).unwrap(), shd(&g2, &g1, None).unwrap());
        }
    }

    #[test]
    fn transform_errors_vanish_for_inverse() {
        let g = sample_erdos_renyi(4, 0.5, &mut ChaCha8Rng::seed_from_u64(7));
        let hg = DMatrix::identity(4, 4);
        let perm: Vec<usize> = (0..4).collect();
        let (ls, lp, lsur) = effective_transform_errors(&hg, &g, &perm);
        assert!(ls < 1e-12 && lp < 1e-12 && lsur < 1e-12);
    }

    #[test]
    fn transform_errors_vanish_for_permuted_scaling() {
        let g = sample_erdos_renyi(3, 0.5, &mut ChaCha8Rng::seed_from_u64(8));
        // Ẑ = P·Λ·Z: row 0 of HG reads Z_2 scaled, etc.
        let mut hg = DMatrix::zeros(3, 3);
        hg[(0, 2)] = 2.0;
        hg[(1, 0)] = -1.5;
        hg[(2, 1)] = 0.7;
        // Ẑ_{perm[i]} matches Z_i: perm = (1, 2, 0).
        let perm = vec![1, 2, 0];
        let (ls, _, _) = effective_transform_errors(&hg, &g, &perm);
        assert!(ls < 1e-12, "l_scale {ls}");
    }

    #[test]
    fn l_pa_zero_iff_support_within_parents() {
        let g = Dag::chain(3);
        let mut hg = DMatrix::identity(3, 3);
        hg[(1, 0)] = 0.4; // mixing with the parent: allowed
        let perm = vec![0, 1, 2];
        let (_, lp, _) = effective_transform_errors(&hg, &g, &perm);
        assert!(lp < 1e-12);
        hg[(0, 2)] = 0.3; // mixing with a non-parent: flagged
        let (_, lp, _) = effective_transform_errors(&hg, &g, &perm);
        assert!(lp > 0.2);
    }

    #[test]
    fn latent_error_alignment() {
        let z = standard_samples(9, 400, 3);
        let perm = vec![0, 1, 2];
        assert!(normalized_latent_error(&z, &z, &perm).unwrap() < 1e-12);
        let scaled = &z * 2.0;
        assert!(normalized_latent_error(&z, &scaled, &perm).unwrap() < 1e-12);
    }

    #[test]
    fn latent_error_noise_scaling_law() {
        // Ẑ = Z + ε·W gives error ≈ ε·‖W‖/‖Z‖ (≈ ε for standard normals).
        let z = standard_samples(10, 20_000, 3);
        let w = standard_samples(11, 20_000, 3);
        let eps = 0.05;
        let z_hat = &z + &w * eps;
        let perm = vec![0, 1, 2];
        let err = normalized_latent_error(&z, &z_hat, &perm).unwrap();
        assert!((err - eps).abs() < 0.005, "err {err}");
    }

    #[test]
    fn zero_reference_rejected() {
        let z = DMatrix::zeros(10, 2);
        let z_hat = standard_samples(12, 10, 2);
        assert!(matches!(
            normalized_latent_error(&z, &z_hat, &[0, 1]),
            Err(MetricsError::ZeroNorm)
        ));
    }
}
