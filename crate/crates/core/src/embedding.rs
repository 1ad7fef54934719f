//! Sliding-window (delay) embeddings of single channels, the joint delay
//! embedding of all channels, and the per-channel difference vectors that
//! feed the Gram-Schmidt tensor.
//!
//! A window of channel `i` starting at time `t` is the list of samples
//! `x_i(t), x_i(t + tau), ..., x_i(t + (d - 1) tau)`. The joint window stacks
//! one such row per channel into an `m x d` grid.

use crate::error::{FusionError, Result};
use crate::types::{sample_distance, Boundary, DelayParams, MultiTimeSeries};

/// Valid window start times for a series of length `len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowIndexPlan {
    tau: usize,
    d: usize,
    len: usize,
    boundary: Boundary,
    n_windows: usize,
}

impl WindowIndexPlan {
    pub fn new(params: &DelayParams, len: usize) -> Result<Self> {
        let span = (params.d() - 1) * params.tau();
        let n_windows = match params.boundary() {
            Boundary::Wrap => len,
            Boundary::Truncate => {
                if len < span + 1 {
                    return Err(FusionError::WindowOutOfRange { start: 0, len });
                }
                len - span
            }
        };
        Ok(WindowIndexPlan {
            tau: params.tau(),
            d: params.d(),
            len,
            boundary: params.boundary(),
            n_windows,
        })
    }

    pub fn n_windows(&self) -> usize {
        self.n_windows
    }

    /// All valid start times, ascending.
    pub fn starts(&self) -> Vec<usize> {
        (0..self.n_windows).collect()
    }

    pub fn check(&self, t: usize) -> Result<()> {
        if t < self.n_windows {
            Ok(())
        } else {
            Err(FusionError::WindowOutOfRange {
                start: t,
                len: self.len,
            })
        }
    }

    /// Sample index of the `j`-th element of the window starting at `t`.
    #[inline]
    pub fn index(&self, t: usize, j: usize) -> usize {
        let raw = t + j * self.tau;
        match self.boundary {
            Boundary::Truncate => raw,
            Boundary::Wrap => raw % self.len,
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }
}

/// The `d` samples of channel `i` in the window starting at `t`.
pub fn sliding_window<'a>(
    ts: &'a MultiTimeSeries,
    i: usize,
    params: &DelayParams,
    t: usize,
) -> Result<Vec<&'a [f64]>> {
    let ch = ts.channel(i)?;
    let plan = WindowIndexPlan::new(params, ts.len())?;
    plan.check(t)?;
    Ok((0..plan.d).map(|j| ch.sample(plan.index(t, j))).collect())
}

/// The joint window at `t`: row `i` is the sliding window of channel `i`.
pub fn joint_window<'a>(
    ts: &'a MultiTimeSeries,
    params: &DelayParams,
    t: usize,
) -> Result<Vec<Vec<&'a [f64]>>> {
    (0..ts.n_channels())
        .map(|i| sliding_window(ts, i, params, t))
        .collect()
}

/// Per-channel vectors of coordinate-wise sample distances between the
/// windows at `t1` and `t2`. Entry `j` of vector `i` is the distance between
/// channel-`i` samples at `t1 + j tau` and `t2 + j tau`.
pub fn difference_vectors(
    ts: &MultiTimeSeries,
    params: &DelayParams,
    t1: usize,
    t2: usize,
) -> Result<Vec<Vec<f64>>> {
    let plan = WindowIndexPlan::new(params, ts.len())?;
    plan.check(t1)?;
    plan.check(t2)?;
    let mut buf = vec![0.0; ts.n_channels() * plan.d];
    fill_difference_vectors(ts, &plan, t1, t2, &mut buf);
    Ok(buf.chunks(plan.d).map(<[f64]>::to_vec).collect())
}

/// Writes the difference vectors row-major into `buf` (`m * d` entries).
/// Start times must already be checked against `plan`.
pub(crate) fn fill_difference_vectors(
    ts: &MultiTimeSeries,
    plan: &WindowIndexPlan,
    t1: usize,
    t2: usize,
    buf: &mut [f64],
) {
    let d = plan.d;
    for (ch, row) in ts.channels().iter().zip(buf.chunks_mut(d)) {
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = sample_distance(ch, plan.index(t1, j), plan.index(t2, j));
        }
    }
}
