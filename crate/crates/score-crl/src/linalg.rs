//! Shared dense linear algebra: the one pseudo-inverse definition used across
//! the crate, orthonormal column bases, principal angles, and subspace
//! intersections.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// Relative singular-value cutoff used by [`pseudo_inverse`] and rank queries.
pub const PINV_REL_CUTOFF: f64 = 1e-10;

/// Moore-Penrose pseudo-inverse via SVD. Singular values below
/// `PINV_REL_CUTOFF` times the largest are treated as zero.
pub fn pseudo_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd with u");
    let vt = svd.v_t.as_ref().expect("svd with v_t");
    let smax = svd.singular_values.max();
    let cutoff = PINV_REL_CUTOFF * smax;
    let mut sinv = DMatrix::zeros(vt.nrows(), u.ncols());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff {
            sinv[(i, i)] = 1.0 / s;
        }
    }
    vt.transpose() * sinv * u.transpose()
}

/// Numerical rank with singular values compared against `rel_tol * s_max`.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.max();
    if smax <= 0.0 {
        return 0;
    }
    svd.singular_values
        .iter()
        .filter(|&&s| s > rel_tol * smax)
        .count()
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Smallest singular value.
pub fn min_singular_value(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values.min()
}

/// Flips `v` so its largest-magnitude entry is positive. Resolves the sign
/// ambiguity of eigenvectors and singular vectors deterministically.
pub fn canonical_sign(v: &mut DVector<f64>) {
    let mut best = 0usize;
    let mut best_abs = f64::NEG_INFINITY;
    for (i, &x) in v.iter().enumerate() {
        if x.abs() > best_abs {
            best_abs = x.abs();
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.neg_mut();
    }
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues sorted descending,
/// eigenvectors sign-canonicalized.
pub fn sym_eig_desc(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = m.clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let mut vals = DVector::zeros(n);
    let mut vecs = DMatrix::zeros(n, n);
    for (k, &i) in idx.iter().enumerate() {
        vals[k] = eig.eigenvalues[i];
        let mut col = eig.eigenvectors.column(i).into_owned();
        canonical_sign(&mut col);
        vecs.set_column(k, &col);
    }
    (vals, vecs)
}

/// Unit top eigenvector of a symmetric PSD matrix together with its eigenvalue.
pub fn top_eigenvector(m: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let (vals, vecs) = sym_eig_desc(m);
    (vals[0], vecs.column(0).into_owned())
}

/// Orthonormal basis of the column space of a symmetric PSD matrix, keeping
/// eigenvectors whose eigenvalue exceeds `rel_tol` times the largest.
pub fn psd_column_basis(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let (vals, vecs) = sym_eig_desc(m);
    let top = vals[0].max(0.0);
    let rank = vals
        .iter()
        .filter(|&&v| v > rel_tol * top && v > 0.0)
        .count();
    vecs.columns(0, rank).into_owned()
}

/// Cosines of the principal angles between the subspaces spanned by the
/// orthonormal bases `b1` and `b2`, sorted descending.
pub fn principal_cosines(b1: &DMatrix<f64>, b2: &DMatrix<f64>) -> Vec<f64> {
    if b1.ncols() == 0 || b2.ncols() == 0 {
        return Vec::new();
    }
    let prod = b1.transpose() * b2;
    let svd = prod.svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Dimension of the intersection of two subspaces: the number of principal
/// cosines at least `cos_threshold`.
pub fn intersection_dim(b1: &DMatrix<f64>, b2: &DMatrix<f64>, cos_threshold: f64) -> usize {
    principal_cosines(b1, b2)
        .iter()
        .filter(|&&c| c >= cos_threshold)
        .count()
}

/// Orthonormal basis (in the ambient space) of the intersection of two
/// subspaces given by orthonormal bases, via principal vectors.
pub fn subspace_intersection(
    b1: &DMatrix<f64>,
    b2: &DMatrix<f64>,
    cos_threshold: f64,
) -> DMatrix<f64> {
    if b1.ncols() == 0 || b2.ncols() == 0 {
        return DMatrix::zeros(b1.nrows(), 0);
    }
    let prod = b1.transpose() * b2;
    let svd = prod.clone().svd(true, false);
    let u = svd.u.as_ref().expect("svd with u");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap()
    });
    let keep: Vec<usize> = idx
        .into_iter()
        .filter(|&i| svd.singular_values[i] >= cos_threshold)
        .collect();
    let mut basis = DMatrix::zeros(b1.nrows(), keep.len());
    for (k, &i) in keep.iter().enumerate() {
        let mut col = b1 * u.column(i).into_owned();
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
        canonical_sign(&mut col);
        basis.set_column(k, &col);
    }
    basis
}

/// Centered maximum-likelihood covariance (divide by sample count) of row-wise
/// samples.
pub fn covariance_mle(samples: &DMatrix<f64>) -> DMatrix<f64> {
    let n = samples.nrows() as f64;
    let mean = samples.row_mean();
    let mut centered = samples.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    centered.transpose() * centered / n
}

/// Uncentered second-moment matrix of row-wise samples.
pub fn second_moment(samples: &DMatrix<f64>) -> DMatrix<f64> {
    let n = samples.nrows() as f64;
    samples.transpose() * samples / n
}

/// Matrix with i.i.d. standard normal entries.
pub fn standard_normal_matrix<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Pearson correlation of two equal-length sample vectors. Returns NaN when
/// either vector is constant up to floating-point roundoff.
pub fn pearson(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let ma = a.mean();
    let mb = b.mean();
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for i in 0..a.len() {
        let da = a[i] - ma;
        let db = b[i] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    let len = a.len() as f64;
    let tol_a = 1e-13 * ma.abs().max(1e-300) * len.sqrt();
    let tol_b = 1e-13 * mb.abs().max(1e-300) * len.sqrt();
    if va.sqrt() <= tol_a || vb.sqrt() <= tol_b || va <= 0.0 || vb <= 0.0 {
        return f64::NAN;
    }
    cov / (va.sqrt() * vb.sqrt())
}
