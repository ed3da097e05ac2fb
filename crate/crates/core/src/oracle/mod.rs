//! Independent verification by Chebyshev collocation.
//!
//! The boundary eigenvalue problem is discretized on a Lobatto grid, the
//! polynomial dependence on `lambda` is recovered by sampling, and the
//! resulting matrix polynomial is solved through its first companion form.
//! Nothing here uses the perturbation formulas; [`track_split`] only
//! consumes a [`SplittingResult`](crate::perturbation::SplittingResult) to
//! match branches.

mod collocate;
mod track;

pub use collocate::{
    collocate, spectrum, spectrum_with, DiscreteProblem, SpectrumSettings, Window,
};
pub use track::{track_split, DriftMode, DriftRecord, TrackSettings};
