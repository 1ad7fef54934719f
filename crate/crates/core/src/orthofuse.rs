//! Gram-Schmidt tensor and the joint delay embedding (JDE) and joint
//! distance learning (JDL) fusions.
//!
//! The tensor `N_lambda(V)` repeatedly marks the unmarked vector of largest
//! norm and removes a `lambda` fraction of its component from the other
//! vectors, then returns the root-sum-square of the final norms. At
//! `lambda = 0` it is the plain root-sum-square; at `lambda = 1` it
//! orthogonalises the set fully, so channels that move together are
//! counted once.

use crate::embedding::{fill_difference_vectors, WindowIndexPlan};
use crate::error::{FusionError, Result};
use crate::types::{
    sample_distance, Boundary, DelayParams, DissimilarityMatrix, MultiTimeSeries, ProjectionScope,
};

/// Record of one Gram-Schmidt tensor evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct GsTrace {
    /// Original indices in the order they were marked.
    pub marking_order: Vec<usize>,
    /// Vectors after all replacements, in original order.
    pub final_vectors: Vec<Vec<f64>>,
    pub value: f64,
}

/// Evaluates `N_lambda(V)`.
pub fn gs_tensor(vectors: &[Vec<f64>], lambda: f64, scope: ProjectionScope) -> Result<f64> {
    Ok(gs_tensor_trace(vectors, lambda, scope)?.value)
}

/// Evaluates `N_lambda(V)` and returns the marking order and final vectors.
pub fn gs_tensor_trace(
    vectors: &[Vec<f64>],
    lambda: f64,
    scope: ProjectionScope,
) -> Result<GsTrace> {
    let first = vectors.first().ok_or(FusionError::EmptyInput)?;
    let dim = first.len();
    if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
        return Err(FusionError::DimensionMismatch {
            expected: dim,
            found: v.len(),
        });
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(FusionError::InvalidParameter(format!(
            "lambda must lie in [0, 1], got {lambda}"
        )));
    }
    let mut buf: Vec<f64> = vectors.iter().flatten().copied().collect();
    let mut order = Vec::with_capacity(vectors.len());
    let value = gs_tensor_in_place(&mut buf, vectors.len(), dim, lambda, scope, Some(&mut order));
    Ok(GsTrace {
        marking_order: order,
        final_vectors: if dim == 0 {
            vec![Vec::new(); vectors.len()]
        } else {
            buf.chunks(dim).map(<[f64]>::to_vec).collect()
        },
        value,
    })
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Core loop over `m` row-major vectors of length `dim` stored in `buf`.
pub(crate) fn gs_tensor_in_place(
    buf: &mut [f64],
    m: usize,
    dim: usize,
    lambda: f64,
    scope: ProjectionScope,
    mut order: Option<&mut Vec<usize>>,
) -> f64 {
    if lambda == 0.0 || dim == 0 {
        if let Some(o) = order.as_deref_mut() {
            // with nothing projected the marking order is just a sort by norm
            let mut idx: Vec<usize> = (0..m).collect();
            let norms: Vec<f64> = (0..m)
                .map(|i| {
                    let v = &buf[i * dim..(i + 1) * dim];
                    dot(v, v)
                })
                .collect();
            idx.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
            o.extend(idx);
        }
        return buf.iter().map(|v| v * v).sum::<f64>().sqrt();
    }

    let mut sq_norms: Vec<f64> = buf.chunks(dim).map(|v| dot(v, v)).collect();
    let mut marked = vec![false; m];
    let mut pivot = vec![0.0; dim];
    for _ in 0..m {
        // ties resolve to the lowest index because only a strictly larger norm replaces
        let mut star = usize::MAX;
        for i in 0..m {
            if !marked[i] && (star == usize::MAX || sq_norms[i] > sq_norms[star]) {
                star = i;
            }
        }
        marked[star] = true;
        if let Some(o) = order.as_deref_mut() {
            o.push(star);
        }
        let star_sq = sq_norms[star];
        if star_sq == 0.0 {
            continue;
        }
        pivot.copy_from_slice(&buf[star * dim..(star + 1) * dim]);
        for i in 0..m {
            if i == star || (scope == ProjectionScope::UnmarkedOnly && marked[i]) {
                continue;
            }
            let w = &mut buf[i * dim..(i + 1) * dim];
            let coef = lambda * dot(w, &pivot) / star_sq;
            if coef == 0.0 {
                continue;
            }
            for (x, p) in w.iter_mut().zip(&pivot) {
                *x -= coef * p;
            }
            sq_norms[i] = dot(w, w);
        }
    }
    sq_norms.iter().sum::<f64>().sqrt()
}

/// Fused distance between the joint windows at `t1` and `t2`.
pub fn jde_distance(ts: &MultiTimeSeries, params: &DelayParams, t1: usize, t2: usize) -> Result<f64> {
    let plan = WindowIndexPlan::new(params, ts.len())?;
    plan.check(t1)?;
    plan.check(t2)?;
    if t1 == t2 {
        return Ok(0.0);
    }
    let mut buf = vec![0.0; ts.n_channels() * params.d()];
    fill_difference_vectors(ts, &plan, t1, t2, &mut buf);
    Ok(gs_tensor_in_place(
        &mut buf,
        ts.n_channels(),
        params.d(),
        params.lambda(),
        params.scope(),
        None,
    ))
}

/// Pairwise JDE distances over the given window start times.
pub fn jde_matrix(
    ts: &MultiTimeSeries,
    params: &DelayParams,
    starts: &[usize],
) -> Result<DissimilarityMatrix> {
    let plan = WindowIndexPlan::new(params, ts.len())?;
    for &t in starts {
        plan.check(t)?;
    }
    let (m, d) = (ts.n_channels(), params.d());
    let mut buf = vec![0.0; m * d];
    Ok(DissimilarityMatrix::from_upper(starts.len(), |a, b| {
        if starts[a] == starts[b] {
            return 0.0;
        }
        fill_difference_vectors(ts, &plan, starts[a], starts[b], &mut buf);
        gs_tensor_in_place(&mut buf, m, d, params.lambda(), params.scope(), None)
    }))
}

/// JDE over every valid window of the series.
pub fn jde_matrix_all(ts: &MultiTimeSeries, params: &DelayParams) -> Result<DissimilarityMatrix> {
    let plan = WindowIndexPlan::new(params, ts.len())?;
    jde_matrix(ts, params, &plan.starts())
}

/// Entrywise root-sum-of-squares of per-sensor dissimilarities.
pub fn jdl_matrix(inputs: &[DissimilarityMatrix]) -> Result<DissimilarityMatrix> {
    let n = inputs.first().ok_or(FusionError::EmptyInput)?.n();
    if let Some(bad) = inputs.iter().find(|m| m.n() != n) {
        return Err(FusionError::SizeMismatch {
            expected: n,
            found: bad.n(),
        });
    }
    Ok(DissimilarityMatrix::from_upper(n, |i, j| {
        inputs
            .iter()
            .map(|m| {
                let v = m.get(i, j);
                v * v
            })
            .sum::<f64>()
            .sqrt()
    }))
}

/// Per-sensor dissimilarity matrices over the given start times.
///
/// With `window = None` each matrix holds raw sample distances at the start
/// times. With `Some(params)` channel `i`'s matrix holds the norm of its
/// difference vector under `params` (`lambda` and scope are ignored).
pub fn per_sensor_matrices(
    ts: &MultiTimeSeries,
    starts: &[usize],
    window: Option<&DelayParams>,
) -> Result<Vec<DissimilarityMatrix>> {
    let raw;
    let params = match window {
        Some(p) => p,
        None => {
            raw = DelayParams::new(1, 1, 0.0)?.with_boundary(Boundary::Truncate);
            &raw
        }
    };
    let plan = WindowIndexPlan::new(params, ts.len())?;
    for &t in starts {
        plan.check(t)?;
    }
    Ok(ts
        .channels()
        .iter()
        .map(|ch| {
            DissimilarityMatrix::from_upper(starts.len(), |a, b| {
                (0..plan.d())
                    .map(|j| {
                        let v = sample_distance(ch, plan.index(starts[a], j), plan.index(starts[b], j));
                        v * v
                    })
                    .sum::<f64>()
                    .sqrt()
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Seed;
    use proptest::prelude::*;
    use rand::Rng;

    const UNMARKED: ProjectionScope = ProjectionScope::UnmarkedOnly;
    const ALL: ProjectionScope = ProjectionScope::AllVectors;

    fn v(rows: &[&[f64]]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| r.to_vec()).collect()
    }

    #[test]
    fn orthogonal_pair_is_fixed() {
        for scope in [UNMARKED, ALL] {
            for lambda in [0.0, 0.3, 1.0] {
                let n = gs_tensor(&v(&[&[1.0, 0.0], &[0.0, 1.0]]), lambda, scope).unwrap();
                assert_eq!(n, 2f64.sqrt());
            }
        }
    }

    #[test]
    fn collinear_pair_collapses() {
        let n = gs_tensor(&v(&[&[2.0, 0.0], &[1.0, 0.0]]), 1.0, UNMARKED).unwrap();
        assert_eq!(n, 2.0);
    }

    #[test]
    fn worked_examples() {
        // frozen from a step-by-step transcription of the marking algorithm
        let unmarked = gs_tensor(&v(&[&[2.0, 0.0], &[1.0, 1.0]]), 0.5, UNMARKED).unwrap();
        assert!((unmarked - 2.29128784747792).abs() < 1e-12);
        let all = gs_tensor(&v(&[&[2.0, 0.0], &[1.0, 1.0]]), 0.5, ALL).unwrap();
        assert!((all - 2.1563858652847827).abs() < 1e-12);
        // the literal scope dips below the full-orthogonalisation value sqrt(5)
        assert!(all < 5f64.sqrt());
    }

    #[test]
    fn trace_records_marking_order() {
        let t = gs_tensor_trace(&v(&[&[1.0, 0.0], &[3.0, 0.0], &[0.0, 2.0]]), 1.0, UNMARKED).unwrap();
        assert_eq!(t.marking_order, vec![1, 2, 0]);
        assert_eq!(t.final_vectors[0], vec![0.0, 0.0]);
        let rss: f64 = t.final_vectors.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
        assert_eq!(rss, t.value);

        let tie = gs_tensor_trace(&v(&[&[1.0, 0.0], &[0.0, 1.0]]), 1.0, UNMARKED).unwrap();
        assert_eq!(tie.marking_order, vec![0, 1]);
    }

    #[test]
    fn errors() {
        assert_eq!(gs_tensor(&[], 0.5, UNMARKED), Err(FusionError::EmptyInput));
        assert!(matches!(
            gs_tensor(&v(&[&[1.0], &[1.0, 2.0]]), 0.5, UNMARKED),
            Err(FusionError::DimensionMismatch { .. })
        ));
        let a = DissimilarityMatrix::from_upper(2, |_, _| 1.0);
        let b = DissimilarityMatrix::from_upper(3, |_, _| 1.0);
        assert!(matches!(jdl_matrix(&[a, b]), Err(FusionError::SizeMismatch { .. })));
    }

    #[test]
    fn zero_vectors_are_harmless() {
        let n = gs_tensor(&v(&[&[0.0, 0.0], &[0.0, 0.0]]), 1.0, ALL).unwrap();
        assert_eq!(n, 0.0);
    }

    #[test]
    fn jdl_examples() {
        let a = DissimilarityMatrix::from_upper(2, |_, _| 3.0);
        let b = DissimilarityMatrix::from_upper(2, |_, _| 4.0);
        assert_eq!(jdl_matrix(&[a.clone(), b]).unwrap().get(0, 1), 5.0);
        assert_eq!(jdl_matrix(std::slice::from_ref(&a)).unwrap(), a);
    }

    #[test]
    fn jde_examples() {
        let constant = MultiTimeSeries::from_scalars(&[vec![2.0; 8], vec![-1.0; 8]]).unwrap();
        let p = DelayParams::new(1, 3, 0.7).unwrap();
        let m = jde_matrix_all(&constant, &p).unwrap();
        assert_eq!(m.max_entry(), 0.0);

        let x = vec![0.0, 1.5, -2.0, 4.0, 0.5];
        let single = MultiTimeSeries::from_scalars(std::slice::from_ref(&x)).unwrap();
        let p1 = DelayParams::new(1, 1, 0.9).unwrap();
        let m = jde_matrix_all(&single, &p1).unwrap();
        for a in 0..5 {
            for b in 0..5 {
                assert_eq!(m.get(a, b), (x[a] - x[b]).abs());
            }
        }
        assert_eq!(jde_distance(&single, &p1, 2, 2).unwrap(), 0.0);
    }

    #[test]
    fn jde_single_channel_ignores_lambda() {
        let ts = MultiTimeSeries::from_scalars(&[vec![0.0, 1.0, 4.0, 9.0, 16.0]]).unwrap();
        for lambda in [0.0, 0.4, 1.0] {
            let p = DelayParams::new(1, 2, lambda).unwrap();
            assert_eq!(jde_distance(&ts, &p, 0, 2).unwrap(), 80f64.sqrt());
        }
    }

    #[test]
    fn jdl_equals_unit_window_jde_on_random_series() {
        let mut rng = Seed(11).rng();
        let series: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..20).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect();
        let ts = MultiTimeSeries::from_scalars(&series).unwrap();
        let p = DelayParams::new(1, 1, 0.0).unwrap();
        let starts: Vec<usize> = (0..20).collect();
        let jde = jde_matrix(&ts, &p, &starts).unwrap();
        let jdl = jdl_matrix(&per_sensor_matrices(&ts, &starts, None).unwrap()).unwrap();
        assert_eq!(jde, jdl);
    }

    fn vec_set() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (1usize..6, 1usize..6).prop_flat_map(|(m, dim)| {
            prop::collection::vec(prop::collection::vec(-5.0f64..5.0, dim), m)
        })
    }

    proptest! {
        #[test]
        fn lambda_zero_is_root_sum_square(vs in vec_set()) {
            let rss = vs.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert_eq!(gs_tensor(&vs, 0.0, UNMARKED).unwrap(), rss);
            prop_assert_eq!(gs_tensor(&vs, 0.0, ALL).unwrap(), rss);
        }

        #[test]
        fn never_exceeds_lambda_zero(vs in vec_set(), lambda in 0.0f64..=1.0, all in any::<bool>()) {
            let scope = if all { ALL } else { UNMARKED };
            let n0 = gs_tensor(&vs, 0.0, scope).unwrap();
            prop_assert!(gs_tensor(&vs, lambda, scope).unwrap() <= n0 + 1e-9);
        }

        #[test]
        fn duplicate_pair_collapses(w in prop::collection::vec(-5.0f64..5.0, 1..6)) {
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            let n = gs_tensor(&[w.clone(), w], 1.0, UNMARKED).unwrap();
            prop_assert_eq!(n, norm);
        }

        #[test]
        fn two_vectors_monotone_in_lambda(a in prop::collection::vec(-5.0f64..5.0, 3), b in prop::collection::vec(-5.0f64..5.0, 3), l1 in 0.0f64..=1.0, l2 in 0.0f64..=1.0) {
            let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
            let vs = vec![a, b];
            prop_assert!(gs_tensor(&vs, hi, UNMARKED).unwrap() <= gs_tensor(&vs, lo, UNMARKED).unwrap() + 1e-12);
        }

        #[test]
        fn permutation_invariant(vs in vec_set(), lambda in 0.0f64..=1.0) {
            // continuous random inputs have distinct intermediate norms almost surely
            let mut rev = vs.clone();
            rev.reverse();
            let a = gs_tensor(&vs, lambda, UNMARKED).unwrap();
            let b = gs_tensor(&rev, lambda, UNMARKED).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b));
        }

        #[test]
        fn jde_matrix_is_a_dissimilarity(series in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 10), 1..4), lambda in 0.0f64..=1.0) {
            let ts = MultiTimeSeries::from_scalars(&series).unwrap();
            let p = DelayParams::new(1, 3, lambda).unwrap();
            let m = jde_matrix_all(&ts, &p).unwrap();
            prop_assert!(crate::types::validate_dissimilarity(m.matrix().clone()).is_ok());
        }
    }
}
