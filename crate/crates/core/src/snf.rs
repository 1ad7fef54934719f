//! Similarity network fusion, used as the comparison baseline.
//!
//! Each view's distance matrix becomes an affinity kernel
//! `W_ij = exp(-D_ij^2 / Sigma_ij)`, then a row-normalised full kernel `P`
//! and a nearest-neighbour sparse kernel `S`. The fusion loop cross-diffuses
//! `P^l <- S^l (mean of the other P) (S^l)^T` and finally averages the `P`s.

use crate::error::{FusionError, Result};
use crate::types::{DissimilarityMatrix, SimilarityKind, SimilarityMatrix, SquareMatrix};

/// How the `P` matrices are refreshed within one fusion step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateOrder {
    /// Views are updated in ascending order; later views see the already
    /// updated lower-index matrices.
    #[default]
    Sequential,
    /// Every view is updated from the previous step's matrices.
    Synchronous,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnfConfig {
    pub beta: f64,
    pub kappa: f64,
    pub iterations: usize,
    pub symmetrize_each_step: bool,
    pub update_order: UpdateOrder,
}

impl Default for SnfConfig {
    fn default() -> Self {
        SnfConfig {
            beta: 0.5,
            kappa: 0.1,
            iterations: 20,
            symmetrize_each_step: false,
            update_order: UpdateOrder::Sequential,
        }
    }
}

impl SnfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(FusionError::InvalidParameter(format!("beta must be > 0, got {}", self.beta)));
        }
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            return Err(FusionError::InvalidParameter(format!(
                "kappa must lie in (0, 1], got {}",
                self.kappa
            )));
        }
        if self.iterations == 0 {
            return Err(FusionError::InvalidParameter("iterations must be >= 1".into()));
        }
        Ok(())
    }
}

/// Number of points in each neighbourhood: `floor(kappa N)`, at least one.
pub fn neighbor_count(n: usize, kappa: f64) -> usize {
    // absorb representation error such as 0.1 * 30 = 3.0000000000000004
    let raw = (kappa * n as f64 + 1e-9).floor() as usize;
    raw.clamp(1, n)
}

/// The `floor(kappa N)` nearest points to `i`, starting with `i` itself and
/// then ordered by increasing distance, ties to the lower index.
pub fn neighbor_set(d: &DissimilarityMatrix, i: usize, kappa: f64) -> Vec<usize> {
    let n = d.n();
    let k = neighbor_count(n, kappa);
    let row = d.row(i);
    let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
    others.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
    let mut out = Vec::with_capacity(k);
    out.push(i);
    out.extend(others.into_iter().take(k - 1));
    out
}

fn neighbor_means(d: &DissimilarityMatrix, kappa: f64) -> Vec<f64> {
    let denom = kappa * d.n() as f64;
    (0..d.n())
        .map(|i| neighbor_set(d, i, kappa).iter().map(|&k| d.get(i, k)).sum::<f64>() / denom)
        .collect()
}

/// Local bandwidth `Sigma_ij`.
pub fn sigma(d: &DissimilarityMatrix, i: usize, j: usize, beta: f64, kappa: f64) -> f64 {
    let denom = kappa * d.n() as f64;
    let mean = |p: usize| neighbor_set(d, p, kappa).iter().map(|&k| d.get(p, k)).sum::<f64>() / denom;
    beta / 3.0 * (mean(i) + mean(j) + d.get(i, j))
}

/// Affinity kernel `W`.
pub fn to_similarity(d: &DissimilarityMatrix, beta: f64, kappa: f64) -> SimilarityMatrix {
    let means = neighbor_means(d, kappa);
    let w = SquareMatrix::from_fn(d.n(), |i, j| {
        let dij = d.get(i, j);
        if dij == 0.0 {
            return 1.0;
        }
        let s = beta / 3.0 * (means[i] + means[j] + dij);
        (-dij * dij / s).exp()
    });
    SimilarityMatrix::new(SimilarityKind::Affinity, w)
}

/// Full kernel `P`: off-diagonal entries of each row share one half, the
/// diagonal holds the other half.
pub fn full_kernel(w: &SimilarityMatrix) -> Result<SimilarityMatrix> {
    let n = w.n();
    let mut p = SquareMatrix::zeros(n);
    for i in 0..n {
        let row = w.row(i);
        let total: f64 = row.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, v)| v).sum();
        if !(total > 0.0) {
            return Err(FusionError::ZeroRowSum { row: i });
        }
        for j in 0..n {
            p.set(i, j, if i == j { 0.5 } else { row[j] / (2.0 * total) });
        }
    }
    Ok(SimilarityMatrix::new(SimilarityKind::Full, p))
}

/// Sparse kernel `S`, supported on each point's nearest neighbours (self excluded).
pub fn sparse_kernel(
    w: &SimilarityMatrix,
    d: &DissimilarityMatrix,
    kappa: f64,
) -> Result<SimilarityMatrix> {
    let n = w.n();
    if d.n() != n {
        return Err(FusionError::SizeMismatch { expected: n, found: d.n() });
    }
    let mut s = SquareMatrix::zeros(n);
    for i in 0..n {
        let nbrs: Vec<usize> = neighbor_set(d, i, kappa).into_iter().filter(|&k| k != i).collect();
        if nbrs.is_empty() {
            return Err(FusionError::EmptyNeighborhood { row: i });
        }
        let total: f64 = nbrs.iter().map(|&k| w.get(i, k)).sum();
        if !(total > 0.0) {
            return Err(FusionError::ZeroRowSum { row: i });
        }
        s.set(i, i, 0.5);
        for &j in &nbrs {
            s.set(i, j, w.get(i, j) / (2.0 * total));
        }
    }
    Ok(SimilarityMatrix::new(SimilarityKind::Sparse, s))
}

fn symmetrized(m: &SquareMatrix) -> SquareMatrix {
    SquareMatrix::from_fn(m.n(), |i, j| 0.5 * (m.get(i, j) + m.get(j, i)))
}

fn mean_of_others(ps: &[SquareMatrix], skip: usize) -> SquareMatrix {
    let n = ps[0].n();
    let scale = 1.0 / (ps.len() - 1) as f64;
    SquareMatrix::from_fn(n, |i, j| {
        ps.iter()
            .enumerate()
            .filter(|&(k, _)| k != skip)
            .map(|(_, p)| p.get(i, j))
            .sum::<f64>()
            * scale
    })
}

/// Intermediate kernels of a fusion run, kept for inspection.
#[derive(Debug, Clone)]
pub struct SnfRun {
    pub affinity: Vec<SimilarityMatrix>,
    pub full: Vec<SimilarityMatrix>,
    pub sparse: Vec<SimilarityMatrix>,
    /// `P` matrices after the final step.
    pub diffused: Vec<SquareMatrix>,
    pub fused: SimilarityMatrix,
}

/// Fuses `m >= 2` distance matrices into one similarity matrix.
pub fn snf_fuse(views: &[DissimilarityMatrix], config: &SnfConfig) -> Result<SimilarityMatrix> {
    Ok(snf_fuse_traced(views, config)?.fused)
}

pub fn snf_fuse_traced(views: &[DissimilarityMatrix], config: &SnfConfig) -> Result<SnfRun> {
    config.validate()?;
    if views.len() < 2 {
        return Err(FusionError::TooFewViews(views.len()));
    }
    let n = views[0].n();
    if let Some(bad) = views.iter().find(|v| v.n() != n) {
        return Err(FusionError::SizeMismatch { expected: n, found: bad.n() });
    }
    let affinity: Vec<_> = views
        .iter()
        .map(|d| to_similarity(d, config.beta, config.kappa))
        .collect();
    let full = affinity.iter().map(full_kernel).collect::<Result<Vec<_>>>()?;
    let sparse = affinity
        .iter()
        .zip(views)
        .map(|(w, d)| sparse_kernel(w, d, config.kappa))
        .collect::<Result<Vec<_>>>()?;
    let s_t: Vec<SquareMatrix> = sparse.iter().map(|s| s.matrix().transpose()).collect();

    let mut ps: Vec<SquareMatrix> = full.iter().map(|p| p.matrix().clone()).collect();
    for _ in 0..config.iterations {
        let snapshot = match config.update_order {
            UpdateOrder::Synchronous => Some(ps.clone()),
            UpdateOrder::Sequential => None,
        };
        for l in 0..ps.len() {
            let avg = mean_of_others(snapshot.as_deref().unwrap_or(&ps), l);
            let mut next = sparse[l].matrix().matmul(&avg).matmul(&s_t[l]);
            if config.symmetrize_each_step {
                next = symmetrized(&next);
            }
            ps[l] = next;
        }
    }
    let m = ps.len() as f64;
    let fused = SquareMatrix::from_fn(n, |i, j| ps.iter().map(|p| p.get(i, j)).sum::<f64>() / m);
    Ok(SnfRun {
        affinity,
        full,
        sparse,
        diffused: ps,
        fused: SimilarityMatrix::new(SimilarityKind::Fused, fused),
    })
}
