//! Multi-sensor time-series fusion by joint delay embedding and a partial
//! Gram-Schmidt distance, with the JDL and SNF baselines, classical MDS and
//! Vietoris-Rips persistence for inspecting the fused matrices.
//!
//! ```
//! use geofusion::orthofuse::jde_matrix_all;
//! use geofusion::synth::{make_experiment, ExperimentKind};
//! use geofusion::types::{Boundary, DelayParams, Seed};
//!
//! let e = make_experiment(ExperimentKind::Projections, Seed(7))?;
//! let p = DelayParams::new(1, 10, 1.0)?.with_boundary(Boundary::Wrap);
//! let fused = jde_matrix_all(&e.series, &p)?;
//! assert_eq!(fused.n(), e.truth.n());
//! # Ok::<(), geofusion::error::FusionError>(())
//! ```
//!
//! A longer walkthrough lives in the `book/` directory of the repository.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]
pub mod embedding;
pub mod error;
pub mod orthofuse;
pub mod types;
pub mod snf;
pub mod synth;
pub mod geomtools;
pub mod ingest;
pub mod io;
pub mod persistence;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/delay-embeddings.md")]
    mod delay_embeddings {}
    #[doc = include_str!("../../../book/src/gram-schmidt.md")]
    mod gram_schmidt {}
    #[doc = include_str!("../../../book/src/baselines.md")]
    mod baselines {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/persistence.md")]
    mod persistence {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
