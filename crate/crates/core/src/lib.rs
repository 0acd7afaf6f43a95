//! Bohr–Sommerfeld quasi-eigenvalues for one-dimensional PT-symmetric
//! h-pseudodifferential operators with real principal symbol.
//!
//! The numeric pipeline (`classical` → `homology` → `bsaction` → `quantize`)
//! is generic over [`scalar::Real`]; `moyal` works in exact complex
//! rationals, and `oracle` discretizes the operator for an independent
//! spectrum.

pub mod bsaction;
pub mod classical;
pub mod homology;
pub mod moyal;
pub mod oracle;
pub mod quantize;
pub mod scalar;
pub mod symbol;

pub use bsaction::{ActionContext, ActionError, ActionOptions, ActionSeries, S2Form, S2Terms};
pub use classical::{ClassicalError, HamiltonFlow, Orbit, WellConfig};
pub use homology::BetaField;
pub use moyal::{HPoly, MoyalError, Poly, WeightedPoly, QC};
pub use oracle::{GridOperator, OracleError, SpectralMatch};
pub use quantize::{bs_roots, QuantizeError, QuasiEigenvalue, RootOptions};
pub use scalar::Real;
pub use symbol::{parse_expr, Expr, PhasePoint, SymbolError, SymbolSeries};

pub type PhasePoint64 = PhasePoint<f64>;
pub type Orbit64 = Orbit<f64>;
pub type WellConfig64 = WellConfig<f64>;
pub type BetaField64 = BetaField<f64>;
pub type ActionContext64 = ActionContext<f64>;
pub type ActionSeries64 = ActionSeries<f64>;
pub type QuasiEigenvalue64 = QuasiEigenvalue<f64>;
pub type GridOperator64 = GridOperator<f64>;
pub type SpectralMatch64 = SpectralMatch<f64>;
/// Exact polynomial symbols.
pub type QPoly = Poly<QC>;
pub type QHPoly = HPoly<QC>;
