//! Classical multidimensional scaling and the matrix-comparison metrics used
//! to score a fusion against ground truth.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{FusionError, Result};
use crate::types::{DissimilarityMatrix, SquareMatrix};

/// Convergence tolerance handed to the symmetric eigen-solver.
pub const EIGEN_TOL: f64 = 1e-12;
/// Iteration cap of the symmetric eigen-solver.
pub const EIGEN_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct MdsResult {
    /// `N x k`, row-major.
    pub coordinates: Vec<Vec<f64>>,
    /// Top-`k` eigenvalues, descending (before clamping).
    pub eigenvalues: Vec<f64>,
    /// Share of the absolute spectrum carried by negative eigenvalues.
    pub negative_mass: f64,
}

impl MdsResult {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Pairwise Euclidean distances between the embedded points.
    pub fn distances(&self) -> DissimilarityMatrix {
        let c = &self.coordinates;
        DissimilarityMatrix::from_upper(c.len(), |i, j| {
            c[i].iter().zip(&c[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
        })
    }
}

/// Classical (Torgerson) MDS into `k` dimensions.
///
/// Double-centres the squared distances, `B = -1/2 J D^2 J`, keeps the `k`
/// algebraically largest eigenpairs and scales each eigenvector by the square
/// root of its eigenvalue (negative eigenvalues give a zero column). Each
/// column's sign is fixed so its largest-magnitude entry is positive.
///
/// The eigen-solve is nalgebra's symmetric tridiagonal QR with implicit
/// Wilkinson shifts, run to [`EIGEN_TOL`] with at most [`EIGEN_MAX_ITER`]
/// iterations.
pub fn classical_mds(d: &DissimilarityMatrix, k: usize) -> Result<MdsResult> {
    let n = d.n();
    if k == 0 || k >= n {
        return Err(FusionError::InvalidParameter(format!(
            "target dimension must satisfy 1 <= k < N (k = {k}, N = {n})"
        )));
    }
    let sq = DMatrix::from_fn(n, n, |i, j| d.get(i, j) * d.get(i, j));
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand));

    let eig = SymmetricEigen::try_new(b, EIGEN_TOL, EIGEN_MAX_ITER).ok_or(FusionError::ConvergenceFailure)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let total_abs: f64 = eig.eigenvalues.iter().map(|v| v.abs()).sum();
    let neg_abs: f64 = eig.eigenvalues.iter().filter(|v| **v < 0.0).map(|v| v.abs()).sum();
    let negative_mass = if total_abs > 0.0 { neg_abs / total_abs } else { 0.0 };

    let mut coordinates = vec![vec![0.0; k]; n];
    let mut eigenvalues = Vec::with_capacity(k);
    for (col, &idx) in order.iter().take(k).enumerate() {
        let lambda = eig.eigenvalues[idx];
        eigenvalues.push(lambda);
        let scale = lambda.max(0.0).sqrt();
        let v = eig.eigenvectors.column(idx);
        let mut pivot = 0;
        for i in 1..n {
            if v[i].abs() > v[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            coordinates[i][col] = sign * scale * v[i];
        }
    }
    Ok(MdsResult {
        coordinates,
        eigenvalues,
        negative_mass,
    })
}

fn frob_dot(a: &SquareMatrix, b: &SquareMatrix) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).sum()
}

/// `min_alpha |alpha A - B|_F / |B|_F`, attained at `alpha = <A,B> / <A,A>`.
pub fn scale_aligned_error(a: &SquareMatrix, b: &SquareMatrix) -> Result<f64> {
    if a.n() != b.n() {
        return Err(FusionError::SizeMismatch { expected: b.n(), found: a.n() });
    }
    let bb = frob_dot(b, b);
    if bb == 0.0 {
        return Err(FusionError::ZeroMatrix);
    }
    let aa = frob_dot(a, a);
    let alpha = if aa > 0.0 { frob_dot(a, b) / aa } else { 0.0 };
    let resid: f64 = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (alpha * x - y).powi(2))
        .sum();
    Ok((resid / bb).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationMethod {
    Pearson,
    Spearman,
}

fn upper_triangle(m: &SquareMatrix) -> Vec<f64> {
    let n = m.n();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        out.extend_from_slice(&m.row(i)[i + 1..]);
    }
    out
}

/// Ranks starting at 1; tied values share their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && x[idx[end]] == x[idx[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(FusionError::ConstantInput);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Correlation between the strict upper triangles of two matrices.
pub fn offdiag_correlation(a: &SquareMatrix, b: &SquareMatrix, method: CorrelationMethod) -> Result<f64> {
    if a.n() != b.n() {
        return Err(FusionError::SizeMismatch { expected: a.n(), found: b.n() });
    }
    if a.n() < 3 {
        return Err(FusionError::InvalidParameter("correlation needs N >= 3".into()));
    }
    let (x, y) = (upper_triangle(a), upper_triangle(b));
    match method {
        CorrelationMethod::Pearson => pearson(&x, &y),
        CorrelationMethod::Spearman => pearson(&average_ranks(&x), &average_ranks(&y)),
    }
}

/// The three comparison scores of a fusion against a reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub scale_aligned_error: f64,
    pub pearson: f64,
    pub spearman: f64,
}

pub fn compare(fused: &SquareMatrix, reference: &SquareMatrix) -> Result<Comparison> {
    Ok(Comparison {
        scale_aligned_error: scale_aligned_error(fused, reference)?,
        pearson: offdiag_correlation(fused, reference, CorrelationMethod::Pearson)?,
        spearman: offdiag_correlation(fused, reference, CorrelationMethod::Spearman)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Seed;
    use proptest::prelude::*;
    use rand::Rng;

    fn euclid(points: &[Vec<f64>]) -> DissimilarityMatrix {
        DissimilarityMatrix::from_upper(points.len(), |i, j| {
            points[i].iter().zip(&points[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
        })
    }

    fn rel_frob(a: &DissimilarityMatrix, b: &DissimilarityMatrix) -> f64 {
        let num: f64 = a.matrix().as_slice().iter().zip(b.matrix().as_slice()).map(|(x, y)| (x - y).powi(2)).sum();
        let den: f64 = b.matrix().as_slice().iter().map(|y| y * y).sum();
        (num / den).sqrt()
    }

    #[test]
    fn collinear_points() {
        let d = euclid(&[vec![0.0], vec![1.0], vec![2.0]]);
        let r = classical_mds(&d, 1).unwrap();
        let out = r.distances();
        assert!((out.get(0, 1) - 1.0).abs() < 1e-12);
        assert!((out.get(1, 2) - 1.0).abs() < 1e-12);
        assert!((out.get(0, 2) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn equilateral_triangle() {
        let d = DissimilarityMatrix::from_upper(3, |_, _| 1.0);
        let r = classical_mds(&d, 2).unwrap();
        let out = r.distances();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert!((out.get(i, j) - 1.0).abs() < 1e-9);
        }
        for (col, lambda) in r.eigenvalues.iter().enumerate() {
            let sq: f64 = r.coordinates.iter().map(|row| row[col] * row[col]).sum();
            assert!((sq - lambda).abs() < 1e-9);
        }
    }

    #[test]
    fn sign_convention_and_errors() {
        let d = euclid(&[vec![0.0], vec![1.0], vec![5.0]]);
        let r = classical_mds(&d, 1).unwrap();
        let col: Vec<f64> = r.coordinates.iter().map(|c| c[0]).collect();
        let pivot = col.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        assert!(pivot > 0.0);
        assert!(classical_mds(&d, 0).is_err());
        assert!(classical_mds(&d, 3).is_err());
    }

    #[test]
    fn non_euclidean_input_reports_negative_mass() {
        // a 4-cycle with a shortcut violates Euclidean realisability
        let d = crate::types::validate_dissimilarity(
            SquareMatrix::from_rows(&[
                vec![0.0, 1.0, 2.0, 1.0],
                vec![1.0, 0.0, 1.0, 2.0],
                vec![2.0, 1.0, 0.0, 0.1],
                vec![1.0, 2.0, 0.1, 0.0],
            ])
            .unwrap(),
        )
        .unwrap();
        let r = classical_mds(&d, 2).unwrap();
        assert!(r.negative_mass > 0.0);
    }

    #[test]
    fn scale_aligned_error_examples() {
        let b = euclid(&[vec![0.0, 1.0], vec![2.0, 0.0], vec![1.0, 1.0]]);
        let bm = b.matrix();
        assert!(scale_aligned_error(bm, bm).unwrap() < 1e-15);
        assert!(scale_aligned_error(&b.scaled(2.0).matrix().clone(), bm).unwrap() < 1e-15);
        let a = SquareMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let c = SquareMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(scale_aligned_error(&a, &c).unwrap(), 1.0);
        assert_eq!(scale_aligned_error(&c, &SquareMatrix::zeros(2)), Err(FusionError::ZeroMatrix));
    }

    #[test]
    fn correlation_examples() {
        let mut rng = Seed(5).rng();
        let pts: Vec<Vec<f64>> = (0..6).map(|_| vec![rng.random(), rng.random()]).collect();
        let a = euclid(&pts);
        let am = a.matrix();
        assert!((offdiag_correlation(am, am, CorrelationMethod::Pearson).unwrap() - 1.0).abs() < 1e-12);
        assert!((offdiag_correlation(am, am, CorrelationMethod::Spearman).unwrap() - 1.0).abs() < 1e-12);
        let neg = SquareMatrix::from_fn(6, |i, j| 3.0 - am.get(i, j));
        assert!((offdiag_correlation(am, &neg, CorrelationMethod::Pearson).unwrap() + 1.0).abs() < 1e-12);
        let flat = SquareMatrix::from_fn(6, |_, _| 1.0);
        assert_eq!(offdiag_correlation(am, &flat, CorrelationMethod::Pearson), Err(FusionError::ConstantInput));
    }

    #[test]
    fn hand_ranked_four_by_four() {
        // upper triangles (1, 4, 2, 3, 6, 5) and (2, 2, 7, 1, 3, 9);
        // ranks (1, 4, 2, 3, 6, 5) and (2.5, 2.5, 5, 1, 4, 6) give 6 / sqrt(17.5 * 17)
        let sym = |u: [f64; 6]| {
            SquareMatrix::from_rows(&[
                vec![0.0, u[0], u[1], u[2]],
                vec![u[0], 0.0, u[3], u[4]],
                vec![u[1], u[3], 0.0, u[5]],
                vec![u[2], u[4], u[5], 0.0],
            ])
            .unwrap()
        };
        let a = sym([1.0, 4.0, 2.0, 3.0, 6.0, 5.0]);
        let b = sym([2.0, 2.0, 7.0, 1.0, 3.0, 9.0]);
        let rho = offdiag_correlation(&a, &b, CorrelationMethod::Spearman).unwrap();
        assert!((rho - 6.0 / (17.5f64 * 17.0).sqrt()).abs() < 1e-12);
        assert!((rho - 0.3478626213914691).abs() < 1e-12);
        assert_eq!(average_ranks(&[2.0, 2.0, 7.0, 1.0, 3.0, 9.0]), vec![2.5, 2.5, 5.0, 1.0, 4.0, 6.0]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn mds_reproduces_euclidean_point_clouds(seed in any::<u64>(), n in 6usize..50, k in 1usize..=5) {
            let mut rng = Seed(seed).rng();
            let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..k).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
            let d = euclid(&pts);
            let r = classical_mds(&d, k).unwrap();
            prop_assert!(rel_frob(&r.distances(), &d) < 1e-8);
        }

        #[test]
        fn scale_error_invariant_under_rescaling(seed in any::<u64>(), c in 0.01f64..100.0) {
            let mut rng = Seed(seed).rng();
            let a = SquareMatrix::from_fn(5, |_, _| rng.random_range(0.0..1.0));
            let b = SquareMatrix::from_fn(5, |_, _| rng.random_range(0.0..1.0));
            let ac = SquareMatrix::from_fn(5, |i, j| c * a.get(i, j));
            let e1 = scale_aligned_error(&a, &b).unwrap();
            let e2 = scale_aligned_error(&ac, &b).unwrap();
            prop_assert!((e1 - e2).abs() < 1e-10);
        }

        #[test]
        fn correlation_invariant_under_simultaneous_permutation(seed in any::<u64>(), shift in 1usize..7) {
            let mut rng = Seed(seed).rng();
            let n = 7;
            let pa: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random(), rng.random()]).collect();
            let pb: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random(), rng.random()]).collect();
            let (a, b) = (euclid(&pa), euclid(&pb));
            let perm: Vec<usize> = (0..n).map(|i| (i * 3 + shift) % n).collect();
            for method in [CorrelationMethod::Pearson, CorrelationMethod::Spearman] {
                let r1 = offdiag_correlation(a.matrix(), b.matrix(), method).unwrap();
                let r2 = offdiag_correlation(a.select(&perm).matrix(), b.select(&perm).matrix(), method).unwrap();
                prop_assert!((r1 - r2).abs() < 1e-12);
            }
        }
    }
}
