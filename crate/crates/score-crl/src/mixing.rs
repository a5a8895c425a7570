//! Latent-to-observed transformations (linear and tanh-GLM), their Jacobians
//! and pseudo-inverses, and encoder parameterizations with the score-difference
//! push-forward / pull-back maps.

use crate::linalg;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Saturation cap used when calibrating tanh-GLM mixings.
const TANH_SATURATION: f64 = 0.999;

#[derive(Debug, Error)]
pub enum MixingError {
    #[error("observed dimension {d} must be at least the latent dimension {n}")]
    DimensionOrder { d: usize, n: usize },
    #[error("mixing matrix is numerically rank-deficient (min singular value {0:.3e})")]
    RankDeficient(f64),
    #[error("input outside the tanh-GLM domain: |x_{0}| >= 1")]
    OutsideDomain(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Linear mixing `X = G · Z` with `G ∈ R^{d×n}` of full column rank.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearMix {
    g: DMatrix<f64>,
    g_pinv: DMatrix<f64>,
}

impl LinearMix {
    pub fn new(g: DMatrix<f64>) -> Result<Self, MixingError> {
        let (d, n) = (g.nrows(), g.ncols());
        if d < n {
            return Err(MixingError::DimensionOrder { d, n });
        }
        let smin = linalg::min_singular_value(&g);
        if smin <= 1e-6 {
            return Err(MixingError::RankDeficient(smin));
        }
        let g_pinv = linalg::pseudo_inverse(&g);
        Ok(LinearMix { g, g_pinv })
    }

    /// Samples i.i.d. standard normal entries, resampling until the smallest
    /// singular value exceeds 1e-6.
    pub fn sample<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<Self, MixingError> {
        if d < n {
            return Err(MixingError::DimensionOrder { d, n });
        }
        loop {
            let g = linalg::standard_normal_matrix(d, n, rng);
            if let Ok(mix) = LinearMix::new(g) {
                return Ok(mix);
            }
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn pinv(&self) -> &DMatrix<f64> {
        &self.g_pinv
    }
}

/// tanh-GLM mixing `X = tanh(G · Z)` with full-column-rank `G`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TanhGlmMix {
    g: DMatrix<f64>,
    g_pinv: DMatrix<f64>,
}

impl TanhGlmMix {
    pub fn new(g: DMatrix<f64>) -> Result<Self, MixingError> {
        let lin = LinearMix::new(g)?;
        Ok(TanhGlmMix {
            g: lin.g,
            g_pinv: lin.g_pinv,
        })
    }

    /// Samples `G` and rescales it so that `max |G·z|` over the reference
    /// latent batch stays below `arctanh(0.999)`, keeping the inverse
    /// well-conditioned on the data.
    pub fn sample_calibrated<R: Rng + ?Sized>(
        n: usize,
        d: usize,
        reference_latents: &DMatrix<f64>,
        rng: &mut R,
    ) -> Result<Self, MixingError> {
        let lin = LinearMix::sample(n, d, rng)?;
        let mut g = lin.g;
        let pre = reference_latents * g.transpose();
        let max_abs = pre.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
        let cap = TANH_SATURATION.atanh();
        if max_abs > cap {
            g *= cap / max_abs;
        }
        TanhGlmMix::new(g)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn pinv(&self) -> &DMatrix<f64> {
        &self.g_pinv
    }

    /// Jacobian `J_g(z) = diag(1 − tanh²(G·z)) · G`.
    pub fn jacobian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let pre = &self.g * z;
        let mut j = self.g.clone();
        for (i, mut row) in j.row_iter_mut().enumerate() {
            let c = 1.0 - pre[i].tanh().powi(2);
            row *= c;
        }
        j
    }
}

/// The mixing transform of an experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Mixing {
    Linear(LinearMix),
    TanhGlm(TanhGlmMix),
}

impl Mixing {
    pub fn latent_dim(&self) -> usize {
        match self {
            Mixing::Linear(m) => m.g.ncols(),
            Mixing::TanhGlm(m) => m.g.ncols(),
        }
    }

    pub fn observed_dim(&self) -> usize {
        match self {
            Mixing::Linear(m) => m.g.nrows(),
            Mixing::TanhGlm(m) => m.g.nrows(),
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, Mixing::Linear(_))
    }

    pub fn forward(&self, z: &DVector<f64>) -> Result<DVector<f64>, MixingError> {
        if z.len() != self.latent_dim() {
            return Err(MixingError::DimensionMismatch {
                expected: self.latent_dim(),
                got: z.len(),
            });
        }
        Ok(match self {
            Mixing::Linear(m) => &m.g * z,
            Mixing::TanhGlm(m) => (&m.g * z).map(f64::tanh),
        })
    }

    /// Row-wise forward map of an `n_s × n` latent sample matrix.
    pub fn forward_batch(&self, z: &DMatrix<f64>) -> Result<DMatrix<f64>, MixingError> {
        if z.ncols() != self.latent_dim() {
            return Err(MixingError::DimensionMismatch {
                expected: self.latent_dim(),
                got: z.ncols(),
            });
        }
        Ok(match self {
            Mixing::Linear(m) => z * m.g.transpose(),
            Mixing::TanhGlm(m) => (z * m.g.transpose()).map(f64::tanh),
        })
    }

    pub fn inverse(&self, x: &DVector<f64>) -> Result<DVector<f64>, MixingError> {
        if x.len() != self.observed_dim() {
            return Err(MixingError::DimensionMismatch {
                expected: self.observed_dim(),
                got: x.len(),
            });
        }
        match self {
            Mixing::Linear(m) => Ok(&m.g_pinv * x),
            Mixing::TanhGlm(m) => {
                for (i, &v) in x.iter().enumerate() {
                    if v.abs() >= 1.0 {
                        return Err(MixingError::OutsideDomain(i));
                    }
                }
                Ok(&m.g_pinv * x.map(f64::atanh))
            }
        }
    }

    pub fn inverse_batch(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>, MixingError> {
        match self {
            Mixing::Linear(m) => Ok(x * m.g_pinv.transpose()),
            Mixing::TanhGlm(m) => {
                if let Some(i) = x.iter().position(|v| v.abs() >= 1.0) {
                    return Err(MixingError::OutsideDomain(i % x.nrows()));
                }
                Ok(x.map(f64::atanh) * m.g_pinv.transpose())
            }
        }
    }

    /// Pushes a latent score difference forward to observed space:
    /// `[J_g(z)†]ᵀ · diff`, evaluated at `x = forward(z)`.
    pub fn score_diff_pushforward(
        &self,
        latent_diff: &DVector<f64>,
        z: &DVector<f64>,
    ) -> Result<DVector<f64>, MixingError> {
        if latent_diff.len() != self.latent_dim() {
            return Err(MixingError::DimensionMismatch {
                expected: self.latent_dim(),
                got: latent_diff.len(),
            });
        }
        match self {
            Mixing::Linear(m) => Ok(m.g_pinv.transpose() * latent_diff),
            Mixing::TanhGlm(m) => {
                let j = m.jacobian(z);
                let smin = linalg::min_singular_value(&j);
                if smin <= 1e-12 {
                    return Err(MixingError::RankDeficient(smin));
                }
                let j_pinv = linalg::pseudo_inverse(&j);
                Ok(j_pinv.transpose() * latent_diff)
            }
        }
    }
}

/// Linear encoder `Ẑ = H · X` with the Moore-Penrose decoder `H†`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearEncoder {
    h: DMatrix<f64>,
    h_pinv: DMatrix<f64>,
}

impl LinearEncoder {
    pub fn new(h: DMatrix<f64>) -> Result<Self, MixingError> {
        let smin = linalg::min_singular_value(&h);
        if smin <= 1e-12 {
            return Err(MixingError::RankDeficient(smin));
        }
        let h_pinv = linalg::pseudo_inverse(&h);
        Ok(LinearEncoder { h, h_pinv })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn encode_batch(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        x * self.h.transpose()
    }

    /// Pulls an observed score difference back through the decoder:
    /// `[J_{H†}]ᵀ · diff = [H†]ᵀ · diff`.
    pub fn score_diff_pullback(&self, observed_diff: &DVector<f64>) -> DVector<f64> {
        self.h_pinv.transpose() * observed_diff
    }

    /// Batch pull-back: one row per sample.
    pub fn score_diff_pullback_batch(&self, observed_diffs: &DMatrix<f64>) -> DMatrix<f64> {
        observed_diffs * &self.h_pinv
    }
}

/// tanh-GLM encoder `Ẑ = H · arctanh(X)` with decoder `X̂ = tanh(H† · Ẑ)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TanhGlmEncoder {
    h: DMatrix<f64>,
    h_pinv: DMatrix<f64>,
}

impl TanhGlmEncoder {
    pub fn new(h: DMatrix<f64>) -> Result<Self, MixingError> {
        let lin = LinearEncoder::new(h)?;
        Ok(TanhGlmEncoder {
            h: lin.h,
            h_pinv: lin.h_pinv,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn encode_batch(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>, MixingError> {
        if let Some(i) = x.iter().position(|v| v.abs() >= 1.0) {
            return Err(MixingError::OutsideDomain(i % x.nrows()));
        }
        Ok(x.map(f64::atanh) * self.h.transpose())
    }

    pub fn decode_batch(&self, z_hat: &DMatrix<f64>) -> DMatrix<f64> {
        (z_hat * self.h_pinv.transpose()).map(f64::tanh)
    }

    /// Pulls an observed score difference back through the decoder Jacobian
    /// at `ẑ = encode(x)`: `[H†]ᵀ · (1 − x̂²) ⊙ diff` with
    /// `x̂ = tanh(H†·H·arctanh(x))`.
    pub fn score_diff_pullback(
        &self,
        observed_diff: &DVector<f64>,
        x: &DVector<f64>,
    ) -> Result<DVector<f64>, MixingError> {
        for (i, &v) in x.iter().enumerate() {
            if v.abs() >= 1.0 {
                return Err(MixingError::OutsideDomain(i));
            }
        }
        let z_hat = &self.h * x.map(f64::atanh);
        let x_hat = (&self.h_pinv * z_hat).map(f64::tanh);
        let weighted = DVector::from_fn(observed_diff.len(), |i, _| {
            (1.0 - x_hat[i] * x_hat[i]) * observed_diff[i]
        });
        Ok(self.h_pinv.transpose() * weighted)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::sample_erdos_renyi;
    use crate::scm::{LinearGaussianScm, Scm};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_mixes(seed: u64, n: usize, d: usize) -> (Mixing, Mixing, DMatrix<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dag = sample_erdos_renyi(n, 0.5, &mut rng);
        let scm = Scm::Linear(LinearGaussianScm::sample(dag, &mut rng));
        let z = scm.sample_latent(500, &mut rng);
        let lin = Mixing::Linear(LinearMix::sample(n, d, &mut rng).unwrap());
        let tanh = Mixing::TanhGlm(TanhGlmMix::sample_calibrated(n, d, &z, &mut rng).unwrap());
        (lin, tanh, z)
    }

    #[test]
    fn sample_has_full_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = LinearMix::sample(5, 100, &mut rng).unwrap();
        assert_eq!(m.matrix().nrows(), 100);
        assert_eq!(m.matrix().ncols(), 5);
        assert_eq!(linalg::numerical_rank(m.matrix(), 1e-10), 5);

        let sq = LinearMix::sample(3, 3, &mut rng).unwrap();
        assert!(sq.matrix().clone().try_inverse().is_some());

        let scalar = LinearMix::sample(1, 1, &mut rng).unwrap();
        assert!(scalar.matrix()[(0, 0)] != 0.0);
    }

    #[test]
    fn wide_matrix_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            LinearMix::sample(5, 3, &mut rng),
            Err(MixingError::DimensionOrder { d: 3, n: 5 })
        ));
    }

    #[test]
    fn round_trip_both_families() {
        let (lin, tanh, z) = random_mixes(1, 4, 20);
        for mix in [&lin, &tanh] {
            for s in 0..z.nrows() {
                let zi = z.row(s).transpose();
                let x = mix.forward(&zi).unwrap();
                let back = mix.inverse(&x).unwrap();
                assert!((back - &zi).norm() < 1e-9, "round trip");
            }
        }
    }

    #[test]
    fn tanh_forward_of_zero_is_zero() {
        let (_, tanh, _) = random_mixes(2, 3, 8);
        let x = tanh.forward(&DVector::zeros(3)).unwrap();
        assert_eq!(x.norm(), 0.0);
    }

    #[test]
    fn tanh_inverse_rejects_saturated_input() {
        let (_, tanh, _) = random_mixes(3, 3, 8);
        let mut x = DVector::zeros(8);
        x[2] = 1.0;
        assert!(matches!(
            tanh.inverse(&x),
            Err(MixingError::OutsideDomain(2))
        ));
    }

    #[test]
    fn linear_pullback_of_pushforward_is_identity() {
        // G^T · pushforward(delta) = delta for linear mixing.
        let (lin, _, _) = random_mixes(4, 4, 15);
        let Mixing::Linear(m) = &lin else {
            unreachable!()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let delta = linalg::standard_normal_matrix(4, 1, &mut rng)
                .column(0)
                .into_owned();
            let z = linalg::standard_normal_matrix(4, 1, &mut rng)
                .column(0)
                .into_owned();
            let pushed = lin.score_diff_pushforward(&delta, &z).unwrap();
            let back = m.matrix().transpose() * pushed;
            assert_relative_eq!(back, delta, epsilon = 1e-9);
        }
    }

    #[test]
    fn zero_latent_diff_pushes_to_zero() {
        let (lin, tanh, _) = random_mixes(5, 3, 9);
        let z = DVector::from_vec(vec![0.3, -0.2, 0.8]);
        for mix in [&lin, &tanh] {
            let pushed = mix.score_diff_pushforward(&DVector::zeros(3), &z).unwrap();
            assert!(pushed.norm() < 1e-14);
        }
    }

    #[test]
    fn scalar_tanh_pushforward_is_inverse_derivative() {
        let g = DMatrix::from_element(1, 1, 0.8);
        let mix = Mixing::TanhGlm(TanhGlmMix::new(g).unwrap());
        let z = DVector::from_element(1, 0.4);
        let delta = DVector::from_element(1, 1.0);
        let pushed = mix.score_diff_pushforward(&delta, &z).unwrap();
        let gprime = 0.8 * (1.0 - (0.8f64 * 0.4).tanh().powi(2));
        assert_relative_eq!(pushed[0], 1.0 / gprime, epsilon = 1e-12);
    }

    #[test]
    fn tanh_jacobian_matches_finite_differences() {
        let (_, tanh, _) = random_mixes(6, 3, 7);
        let Mixing::TanhGlm(m) = &tanh else {
            unreachable!()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let z = linalg::standard_normal_matrix(3, 1, &mut rng)
                .column(0)
                .into_owned()
                * 0.5;
            let j = m.jacobian(&z);
            let h = 1e-6;
            for k in 0..3 {
                let mut zp = z.clone();
                let mut zm = z.clone();
                zp[k] += h;
                zm[k] -= h;
                let fd = (tanh.forward(&zp).unwrap() - tanh.forward(&zm).unwrap()) / (2.0 * h);
                let col = j.column(k).into_owned();
                assert!(
                    (col.clone() - &fd).norm() / col.norm().max(1.0) < 1e-6,
                    "jacobian column {k}"
                );
            }
        }
    }

    #[test]
    fn pullback_through_true_encoder_recovers_latent_diff() {
        // Push a latent diff to observed space, pull it back through the true
        // encoder; both mix families.
        let n = 4;
        let d = 12;
        let (lin, tanh, z) = random_mixes(9, n, d);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..30 {
            let delta = linalg::standard_normal_matrix(n, 1, &mut rng)
                .column(0)
                .into_owned();
            let zi = z.row(rng.random_range(0..z.nrows())).transpose();

            let Mixing::Linear(lm) = &lin else {
                unreachable!()
            };
            let enc = LinearEncoder::new(lm.pinv().clone()).unwrap();
            let pushed = lin.score_diff_pushforward(&delta, &zi).unwrap();
            let back = enc.score_diff_pullback(&pushed);
            assert!((back - &delta).norm() < 1e-8, "linear pull-back");

            let Mixing::TanhGlm(tm) = &tanh else {
                unreachable!()
            };
            let enc = TanhGlmEncoder::new(tm.pinv().clone()).unwrap();
            let x = tanh.forward(&zi).unwrap();
            let pushed = tanh.score_diff_pushforward(&delta, &zi).unwrap();
            let back = enc.score_diff_pullback(&pushed, &x).unwrap();
            assert!((back - &delta).norm() < 1e-8, "tanh pull-back");
        }
    }

    #[test]
    fn scaled_encoder_scales_pullback() {
        // Pull-back under A·h equals A^{-T} times the pull-back under h.
        let n = 3;
        let d = 10;
        let (_, tanh, z) = random_mixes(11, n, d);
        let Mixing::TanhGlm(tm) = &tanh else {
            unreachable!()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a = loop {
            let cand = linalg::standard_normal_matrix(n, n, &mut rng);
            if cand.determinant().abs() > 0.3 {
                break cand;
            }
        };
        let h = tm.pinv().clone();
        let enc = TanhGlmEncoder::new(h.clone()).unwrap();
        let enc_scaled = TanhGlmEncoder::new(&a * &h).unwrap();
        let a_inv_t = a.try_inverse().unwrap().transpose();
        for _ in 0..20 {
            let diff = linalg::standard_normal_matrix(d, 1, &mut rng)
                .column(0)
                .into_owned();
            let zi = z.row(rng.random_range(0..z.nrows())).transpose();
            let x = tanh.forward(&zi).unwrap();
            let p1 = enc.score_diff_pullback(&diff, &x).unwrap();
            let p2 = enc_scaled.score_diff_pullback(&diff, &x).unwrap();
            assert!((&a_inv_t * p1 - p2).norm() < 1e-9);
        }
    }
}
