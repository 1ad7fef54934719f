//! Shared domain types: multi-channel time series, dissimilarity and
//! similarity matrices, delay parameters and the seeded generator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{FusionError, Result};

/// Relative tolerance used when validating symmetry and zero diagonals.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// One sensor: `len` samples, each a point in `dim`-dimensional real space.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    name: Option<String>,
    dim: usize,
    data: Vec<f64>,
}

impl Channel {
    /// Scalar channel from a slice of samples.
    pub fn scalar(samples: &[f64]) -> Self {
        Channel {
            name: None,
            dim: 1,
            data: samples.to_vec(),
        }
    }

    /// Vector-valued channel; `samples` are flattened row-major (`len * dim`).
    pub fn vector(dim: usize, samples: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(FusionError::InvalidParameter("channel dimension must be >= 1".into()));
        }
        if !samples.len().is_multiple_of(dim) {
            return Err(FusionError::DimensionMismatch {
                expected: dim,
                found: samples.len() % dim,
            });
        }
        Ok(Channel {
            name: None,
            dim,
            data: samples,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn sample(&self, t: usize) -> &[f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }
}

/// `m` channels sharing a common sample count `T >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiTimeSeries {
    channels: Vec<Channel>,
    len: usize,
}

impl MultiTimeSeries {
    pub fn new(channels: Vec<Channel>) -> Result<Self> {
        let first = channels.first().ok_or(FusionError::EmptyInput)?;
        let len = first.len();
        if len == 0 {
            return Err(FusionError::EmptyInput);
        }
        for ch in &channels {
            if ch.len() != len {
                return Err(FusionError::SizeMismatch {
                    expected: len,
                    found: ch.len(),
                });
            }
            if let Some(pos) = ch.data.iter().position(|v| !v.is_finite()) {
                return Err(FusionError::NonFiniteEntry {
                    row: pos / ch.dim,
                    col: pos % ch.dim,
                });
            }
        }
        Ok(MultiTimeSeries { channels, len })
    }

    /// Convenience constructor for scalar channels.
    pub fn from_scalars(series: &[Vec<f64>]) -> Result<Self> {
        Self::new(series.iter().map(|s| Channel::scalar(s)).collect())
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn channel(&self, i: usize) -> Result<&Channel> {
        self.channels.get(i).ok_or(FusionError::IndexOutOfRange {
            index: i,
            len: self.channels.len(),
        })
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    /// Number of samples `T`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Channel names, falling back to `ch{i}` for unnamed channels.
    pub fn names(&self) -> Vec<String> {
        self.channels
            .iter()
            .enumerate()
            .map(|(i, c)| c.name().map(str::to_owned).unwrap_or_else(|| format!("ch{i}")))
            .collect()
    }
}

/// Euclidean distance between samples `t1` and `t2` of channel `i`.
pub fn channel_distance(ts: &MultiTimeSeries, i: usize, t1: usize, t2: usize) -> Result<f64> {
    let ch = ts.channel(i)?;
    for t in [t1, t2] {
        if t >= ts.len() {
            return Err(FusionError::IndexOutOfRange {
                index: t,
                len: ts.len(),
            });
        }
    }
    Ok(sample_distance(ch, t1, t2))
}

#[inline]
pub(crate) fn sample_distance(ch: &Channel, t1: usize, t2: usize) -> f64 {
    if ch.dim == 1 {
        return (ch.data[t1] - ch.data[t2]).abs();
    }
    ch.sample(t1)
        .iter()
        .zip(ch.sample(t2))
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Dense `n x n` row-major storage shared by the matrix newtypes.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Builds a matrix from rows; fails if the rows do not form a square.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(FusionError::NonSquare {
                    rows: n,
                    cols: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(SquareMatrix { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        SquareMatrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.n.max(1))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &SquareMatrix) -> Self {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            let out_row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let b_row = &other.data[k * n..(k + 1) * n];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        SquareMatrix { n, data: out }
    }
}

/// Symmetric, non-negative, zero-diagonal `N x N` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix(SquareMatrix);

impl DissimilarityMatrix {
    /// Builds from the strict upper triangle; `f(i, j)` is only called for `i < j`.
    pub(crate) fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in i + 1..n {
                let v = f(i, j);
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        DissimilarityMatrix(m)
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.0.row(i)
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.0
    }

    pub fn max_entry(&self) -> f64 {
        self.0.data.iter().copied().fold(0.0, f64::max)
    }

    /// Multiplies every entry by `c >= 0`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut m = self.0.clone();
        m.data.iter_mut().for_each(|v| *v *= c);
        DissimilarityMatrix(m)
    }

    /// Sub-matrix on the given index list, in that order.
    pub fn select(&self, idx: &[usize]) -> Self {
        DissimilarityMatrix(SquareMatrix::from_fn(idx.len(), |a, b| self.get(idx[a], idx[b])))
    }
}

/// Checks a square matrix against the dissimilarity invariants, averaging
/// out asymmetry no larger than `1e-12` relative to the largest entry.
pub fn validate_dissimilarity(m: SquareMatrix) -> Result<DissimilarityMatrix> {
    let n = m.n;
    if m.data.len() != n * n {
        return Err(FusionError::NonSquare {
            rows: n,
            cols: m.data.len() / n.max(1),
        });
    }
    for i in 0..n {
        for j in 0..n {
            let v = m.get(i, j);
            if !v.is_finite() {
                return Err(FusionError::NonFiniteEntry { row: i, col: j });
            }
            if v < 0.0 {
                return Err(FusionError::NegativeEntry {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    let tol = SYMMETRY_TOL * m.max_abs();
    for i in 0..n {
        let d = m.get(i, i);
        if d > tol {
            return Err(FusionError::NonzeroDiagonal { index: i, value: d });
        }
        for j in i + 1..n {
            let gap = (m.get(i, j) - m.get(j, i)).abs();
            if gap > tol {
                return Err(FusionError::AsymmetryTooLarge { row: i, col: j, gap });
            }
        }
    }
    let mut out = m;
    for i in 0..n {
        out.set(i, i, 0.0);
        for j in i + 1..n {
            let (a, b) = (out.get(i, j), out.get(j, i));
            if a != b {
                let avg = 0.5 * (a + b);
                out.set(i, j, avg);
                out.set(j, i, avg);
            }
        }
    }
    Ok(DissimilarityMatrix(out))
}

/// Which stage of similarity network fusion a matrix belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimilarityKind {
    /// Affinity kernel `W`.
    Affinity,
    /// Row-normalised full kernel `P`.
    Full,
    /// Nearest-neighbour sparse kernel `S`.
    Sparse,
    /// Averaged output of the fusion loop.
    Fused,
}

/// Non-negative `N x N` similarity matrix tagged with its kind.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    kind: SimilarityKind,
    m: SquareMatrix,
}

impl SimilarityMatrix {
    pub(crate) fn new(kind: SimilarityKind, m: SquareMatrix) -> Self {
        debug_assert!(m.data.iter().all(|v| v.is_finite() && *v >= 0.0));
        SimilarityMatrix { kind, m }
    }

    /// Wraps an arbitrary matrix, checking finiteness and non-negativity.
    pub fn try_new(kind: SimilarityKind, m: SquareMatrix) -> Result<Self> {
        for i in 0..m.n {
            for j in 0..m.n {
                let v = m.get(i, j);
                if !v.is_finite() {
                    return Err(FusionError::NonFiniteEntry { row: i, col: j });
                }
                if v < 0.0 {
                    return Err(FusionError::NegativeEntry { row: i, col: j, value: v });
                }
            }
        }
        Ok(SimilarityMatrix { kind, m })
    }

    pub fn kind(&self) -> SimilarityKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.m.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m.get(i, j)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.m.row(i)
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> SquareMatrix {
        self.m
    }
}

/// Behaviour of windows that run past the end of the series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Only windows fully inside the series are valid.
    #[default]
    Truncate,
    /// Indices are taken modulo `T`; every start time is valid.
    Wrap,
}

/// Which vectors are projected after a vector is marked in the Gram-Schmidt tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProjectionScope {
    /// Only vectors not yet marked (classical Gram-Schmidt order).
    #[default]
    UnmarkedOnly,
    /// Every vector other than the one just marked, including earlier marked ones.
    AllVectors,
}

/// Delay `tau`, window length `d`, orthogonality `lambda` and boundary handling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayParams {
    tau: usize,
    d: usize,
    lambda: f64,
    boundary: Boundary,
    scope: ProjectionScope,
}

impl DelayParams {
    pub fn new(tau: usize, d: usize, lambda: f64) -> Result<Self> {
        if tau == 0 {
            return Err(FusionError::InvalidParameter("tau must be >= 1".into()));
        }
        if d == 0 {
            return Err(FusionError::InvalidParameter("d must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(FusionError::InvalidParameter(format!(
                "lambda must lie in [0, 1], got {lambda}"
            )));
        }
        Ok(DelayParams {
            tau,
            d,
            lambda,
            boundary: Boundary::default(),
            scope: ProjectionScope::default(),
        })
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_scope(mut self, scope: ProjectionScope) -> Self {
        self.scope = scope;
        self
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn scope(&self) -> ProjectionScope {
        self.scope
    }
}

/// Seed for the artifact-wide generator (ChaCha8 keyed by `seed_from_u64`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Seed(pub u64);

impl Seed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> SquareMatrix {
        SquareMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn zero_matrix_is_valid() {
        let d = validate_dissimilarity(SquareMatrix::zeros(2)).unwrap();
        assert_eq!(d.n(), 2);
    }

    #[test]
    fn two_point_metric_is_valid() {
        let d = validate_dissimilarity(m(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        assert_eq!(d.get(0, 1), 1.0);
    }

    #[test]
    fn asymmetric_is_rejected() {
        let err = validate_dissimilarity(m(&[&[0.0, 1.0], &[2.0, 0.0]])).unwrap_err();
        assert!(matches!(err, FusionError::AsymmetryTooLarge { .. }));
    }

    #[test]
    fn other_validation_errors() {
        assert!(matches!(
            SquareMatrix::from_rows(&[vec![0.0, 1.0]]).unwrap_err(),
            FusionError::NonSquare { .. }
        ));
        assert!(matches!(
            validate_dissimilarity(m(&[&[0.0, -1.0], &[-1.0, 0.0]])).unwrap_err(),
            FusionError::NegativeEntry { .. }
        ));
        assert!(matches!(
            validate_dissimilarity(m(&[&[0.5, 1.0], &[1.0, 0.0]])).unwrap_err(),
            FusionError::NonzeroDiagonal { .. }
        ));
    }

    #[test]
    fn tiny_asymmetry_is_averaged_and_idempotent() {
        let a = 1.0 + 4e-13;
        let d = validate_dissimilarity(m(&[&[0.0, 1.0], &[a, 0.0]])).unwrap();
        assert_eq!(d.get(0, 1), d.get(1, 0));
        let again = validate_dissimilarity(d.matrix().clone()).unwrap();
        assert_eq!(again, d);
    }

    #[test]
    fn channel_distance_examples() {
        let ts = MultiTimeSeries::new(vec![
            Channel::scalar(&[0.0, 3.0, 4.0]),
            Channel::vector(2, vec![0.0, 0.0, 3.0, 4.0, 1.0, 1.0]).unwrap(),
        ])
        .unwrap();
        assert_eq!(channel_distance(&ts, 0, 0, 1).unwrap(), 3.0);
        assert_eq!(channel_distance(&ts, 1, 0, 1).unwrap(), 5.0);
        assert_eq!(channel_distance(&ts, 1, 2, 2).unwrap(), 0.0);
        assert!(matches!(
            channel_distance(&ts, 2, 0, 0),
            Err(FusionError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            channel_distance(&ts, 0, 0, 3),
            Err(FusionError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn channel_distance_is_a_metric_on_small_series() {
        let ts = MultiTimeSeries::new(vec![Channel::vector(
            2,
            vec![0.0, 0.0, 1.5, -2.0, 3.0, 1.0, -0.5, 0.25, 2.0, 2.0],
        )
        .unwrap()])
        .unwrap();
        let n = ts.len();
        for a in 0..n {
            for b in 0..n {
                let dab = channel_distance(&ts, 0, a, b).unwrap();
                assert_eq!(dab, channel_distance(&ts, 0, b, a).unwrap());
                for c in 0..n {
                    let dac = channel_distance(&ts, 0, a, c).unwrap();
                    let dcb = channel_distance(&ts, 0, c, b).unwrap();
                    assert!(dab <= dac + dcb + 1e-12);
                }
            }
        }
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let err = MultiTimeSeries::from_scalars(&[vec![1.0, 2.0], vec![1.0]]).unwrap_err();
        assert!(matches!(err, FusionError::SizeMismatch { .. }));
    }

    #[test]
    fn delay_params_validation() {
        assert!(DelayParams::new(0, 1, 0.0).is_err());
        assert!(DelayParams::new(1, 0, 0.0).is_err());
        assert!(DelayParams::new(1, 1, 1.5).is_err());
        assert!(DelayParams::new(1, 1, 1.0).is_ok());
    }

    #[test]
    fn seeded_rng_is_reproducible() {
        use rand::Rng;
        let a: Vec<u64> = (0..4).map({
            let mut r = Seed(9).rng();
            move |_| r.random()
        }).collect();
        let b: Vec<u64> = (0..4).map({
            let mut r = Seed(9).rng();
            move |_| r.random()
        }).collect();
        assert_eq!(a, b);
    }
}
