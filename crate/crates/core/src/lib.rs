//! Online two-thinning of uniform point streams on [0,1)^d.
//!
//! The crate keeps a running table of Haar-basis coefficients of the kept
//! points and uses it to bias accept/reject decisions toward balance,
//! driving the rectangle discrepancy of the output sequence far below the
//! Monte-Carlo rate. It also ships exact and lattice-based discrepancy
//! metrics used to measure the effect.
//!
//! The crate is `no_std` (with `alloc`): all IO, file formats and the
//! command-line harness live in the companion `haarthin` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod disc;
pub mod dyadic;
pub mod error;
pub mod haar;
pub mod points;
pub mod rng;
pub mod strategy;
pub mod table;

pub use disc::{
    brute_disc_oracle, interval_disc_1d, lattice_disc, lattice_disc_naive, rect_bias, DiscMethod,
    DiscReport,
};
pub use dyadic::{decompose_lattice, lattice_sandwich, DyadicInterval, RectSpec, MAX_LEVEL};
pub use error::Error;
pub use haar::{
    decompose_dyadic, enumerate_shapes, haar_eval, locate_nonzero, shape_count, BasisTerm, HaarId,
    Shape,
};
pub use points::{PointSet, PointsView};
pub use rng::{SeedStream, StreamRole};
pub use strategy::{
    greedy_keep_prob, haar_keep_prob, monte_carlo_keep_prob, run, CandidateSource, DecisionRecord,
    DensityValue, Engine, GreedyConvention, RunOutput, StrategyConfig, StrategyKind, UniformSource,
};
pub use table::{recompute_oracle, CoefficientTable, DEFAULT_ENTRY_CAP};
