//! Deviation and risk measures on finite probability spaces.
//!
//! The crate covers general, convex and star-shaped deviation measures, a
//! seeded audit of their axioms, acceptance sets and ray envelopes, the
//! risk/deviation correspondence and dual representations over VaR and ES.
//!
//! ```
//! use stardev::{measures::sd, RandomVariable};
//!
//! let x = RandomVariable::uniform(vec![-1.0, 1.0]).unwrap();
//! assert_eq!(sd(&x), 1.0);
//! ```

// `!(x > 0.0)` is used deliberately so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod axioms;
pub mod cli;
pub mod duality;
pub mod envelopes;
pub mod error;
pub mod measures;
pub mod report;
pub mod space;

pub use axioms::{audit_deviation, check_risk_axioms, AuditConfig, AuditReport, Property};
pub use error::{Error, Result};
pub use measures::{catalog, parse_catalog_id, CatalogEntry, DeviationFunctional, Functional, RiskFunctional};
pub use space::{empirical_from_samples, ProbSpace, RandomVariable};
