//! Analytic and Monte Carlo distributions of the maximum of weakly
//! correlated Gaussian variables, with timing-graph ingestion for
//! path-based statistical static timing analysis.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corrections;
pub mod error;
pub mod format;
pub mod gumbel;
pub mod montecarlo;
pub mod normal;
pub mod quad;
pub mod timing_graph;

pub use corrections::{
    corrected_cdf, corrected_mean, corrected_pdf, correlation_sum, validity_check, CorrelationSum,
    EpsilonMatrix, Order, ValidityReport,
};
pub use error::{Error, Result};
pub use gumbel::{
    gumbel_cdf, gumbel_moments, gumbel_pdf, scaling_constants, GumbelMoments, GumbelParams,
};
pub use montecarlo::{McConfig, McResult};
