//! Two-qubit quantum correlations: measures, state families, and Monte Carlo
//! surveys over the mixed-state space.
//!
//! The crate is layered bottom-up. `linalg` holds the small dense complex
//! kernels (nothing here is bigger than 4x4), `qstate` the validated density
//! matrix type plus the named state families, `measures` the correlation
//! quantities, `sampling` the random-state ensembles, and `survey` the
//! campaign driver that the `qcorr` binary exposes as subcommands.

// Index loops over fixed 3- and 4-dimensional tensors read better than
// iterator chains; applies crate-wide.
#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod linalg;
pub mod measures;
pub mod qstate;
pub mod sampling;
pub mod survey;

pub use linalg::{C64, ComplexMatrix};
pub use measures::{MeasureRecord, OptimizerSettings};
pub use qstate::{BlochForm, DensityMatrix};
pub use sampling::RngStream;
pub use survey::{Ensemble, SurveyConfig};
