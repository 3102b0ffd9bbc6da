//! Abelian integrals over real ovals of hyperelliptic levels `y^2 = 2 D(x, t)`
//! and the two-dimensional region integrals of the Lotka-Volterra cases.

pub mod catalog;
pub mod family;
pub mod quadrature;
pub mod region;

pub use catalog::{generating_i, generating_j, GeneratingSpec, Term};
pub use family::{AnnulusInterval, Family, FamilyKind, Kind, Moment, MomentOptions, Oval};
pub use quadrature::{integrate, QuadOptions, QuadResult};
pub use region::{c4_generating_i, lv_generating_i, C4Spec, LVRegionSpec};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegralError {
    #[error("case {0} has no hyperelliptic generating function here")]
    Unsupported(String),
    #[error("parameter b is required for case {0}")]
    MissingParameter(String),
    #[error("parameter b = {b} is outside the supported range for {case}: {reason}")]
    BadParameter { case: String, b: String, reason: String },
    #[error("t = {t} is within {margin:e} of the annulus endpoint {endpoint}")]
    OvalDegenerate { t: f64, endpoint: f64, margin: f64 },
    #[error("no oval around the center at level t = {t}")]
    NoOval { t: f64 },
    #[error("moment x^{k} has a pole on or inside the oval (x_lo = {x_lo})")]
    Pole { k: i32, x_lo: f64 },
    #[error("quadrature did not converge; achieved error estimate {achieved:e}")]
    NonConvergence { achieved: f64 },
    #[error("boundary of the region not located: {0}")]
    BoundaryNotFound(String),
    #[error("weight list is invalid: {0}")]
    BadWeights(String),
}
