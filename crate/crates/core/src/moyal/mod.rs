//! Exact Weyl calculus on polynomial symbols: the Moyal product, weighted
//! exponentials `e^{mβ0}`, conjugation and the expansion polynomials.

mod coeff;
mod hj;
mod poly;
mod verify;
mod weighted;

pub use coeff::{q, Coeff, QC};
pub use hj::{eq4_rhs, eval_r5, eval_r8, order4_rhs};
pub use poly::{HPoly, Poly};
pub use verify::{
    check_eq4, linear_fixture, random_beta, random_poly, run_identity_suite, verify_order4_display,
    verify_order4_display_with, IdentityCheck, SuiteConfig, SuiteReport,
};
pub use weighted::{
    conjugate, conjugate_series, conjugate_with, star, star_inverse, star_inverse_with, star_with, Generator,
    Orientation, WeightedPoly, MAX_STAR_ORDER,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoyalError {
    #[error("operands carry different exponent generators")]
    GeneratorMismatch,
    #[error("leading term must be the constant 1")]
    NotNormalized,
    #[error("truncation order {k} exceeds the engine limit {max}")]
    OrderTooHigh { k: usize, max: usize },
}
