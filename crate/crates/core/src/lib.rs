//! Sharp regression discontinuity and difference-in-discontinuities
//! estimation for geographic borders.
//!
//! The running variable is a signed distance to the border, positive on the
//! treated side. A sharp RD on one period estimates the jump in outcomes at
//! the border. When the border also carries time-invariant jumps (other
//! policies, sorting of residents), that RD mixes them with the treatment
//! effect; differencing the post-period jump against the pre-period jump
//! removes them. With a panel this is a sharp RD on `y_1 - y_0`
//! ([`estimate_diff_disc_fd`]); without one, the pooled interaction
//! regression ([`estimate_diff_disc_pooled_repeated`]) gives the same
//! number.
//!
//! Modules:
//! - [`panel`]: data model, validation, first differences, CSV ingestion.
//! - [`local`]: kernels, one-sided local polynomial fits, bandwidths.
//! - [`estimators`]: sharp RD, both diff-in-disc forms, robust inference.
//! - [`dgp`]: simulated panels and the Monte Carlo harness.
//! - [`cli`]: the `diffdisc` command-line tool.

pub mod cli;
pub mod dgp;
pub mod error;
pub mod estimators;
pub mod local;
pub mod panel;

pub use error::{Error, Result};
pub use estimators::{
    estimate_diff_disc_fd, estimate_diff_disc_pooled, estimate_diff_disc_pooled_repeated,
    estimate_sharp_rd, DiffDiscEstimate, EstimatorConfig, PooledCoefficients, RdEstimate,
};
pub use local::{BandwidthSpec, KernelKind, Side};
pub use panel::{CrossSection, Observation, PanelDataset};
