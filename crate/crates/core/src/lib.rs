//! An exponential-kernel bivariate copula
//!
//! ```text
//! C(u, v) = uv + δ (1 − e^{α(u−u²)}) (1 − e^{α(v−v²)}),   |δ| ≤ δ*(α)
//! ```
//!
//! together with its dependence measures and properties, and the bivariate
//! Rayleigh distribution built on it.
//!
//! * [`copula`]: parameter validation, CDF, density, conditional inversion, sampling
//! * [`dependence`]: closed-form and quadrature measures, range table, PQD/TP₂/tail checks
//! * [`brd`]: joint and conditional Rayleigh forms, product moments, sampling
//! * [`inference`]: marginal and joint maximum likelihood, KS tests, AIC/BIC
//! * [`io`]: CSV ingestion and JSON reports
//! * [`special`]: erf, erfi, ln Γ and the Kolmogorov distribution

// `!(x > 0.0)` guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod brd;
pub mod copula;
pub mod dependence;
pub mod error;
pub mod inference;
pub mod io;
pub mod optim;
pub mod quadrature;
pub mod special;

pub use brd::{BrdParams, MomentOrder};
pub use copula::{CopulaParams, UnitSquarePoint};
pub use dependence::{DependenceReport, Method, Table1Row};
pub use error::{Error, Result};
pub use inference::{FitResult, KsReport, ObservationSet};
pub use io::{CsvSchema, RunReport};
pub use quadrature::QuadratureSpec;
pub use special::AccuracyBudget;

/// Library version reported in run reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
