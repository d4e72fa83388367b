//! Exponential income-distribution fitting.
//!
//! Fits one- and two-parameter (truncated) exponential models to empirical
//! CDF data by nonlinear least squares, tests the fit with a parametric
//! bootstrap Kolmogorov–Smirnov procedure, and reports the Lorenz curve and
//! Gini index of the fitted model.
//!
//! Bootstrap replicates run on rayon when the `parallel` feature (default)
//! is enabled, sequentially otherwise. Results are identical either way.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dataset;
pub mod dist;
pub mod error;
pub mod fit;
pub mod gof;
pub mod inequality;
pub mod simplex;

pub use dataset::{EcdfDataset, EcdfPoint};
pub use dist::{ExpModel, ModelKind};
pub use error::{Error, Result};
pub use fit::{fit, FitConfig, FitResult};
pub use gof::{bootstrap_test, ks_statistic, GofConfig, GofResult};
pub use inequality::{gini, lorenz, InequalityReport};
