//! Phase-space expressions, jets, and Weyl symbol series.

mod expr;
mod jet;
mod parse;
mod program;
mod series;

pub use expr::{Expr, Var};
pub use jet::{eval_jet, Jet, JetExpr, MAX_JET_ORDER};
pub use parse::parse_expr;
pub use program::Program;
pub use series::{check_pt_symmetry, symmetric_samples, CoeffViolation, PtReport, SymbolSeries};

use crate::scalar::Real;

/// A point `(x, ξ)` of phase space.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct PhasePoint<F> {
    pub x: F,
    pub xi: F,
}

impl<F: Real> PhasePoint<F> {
    pub fn new(x: F, xi: F) -> Self {
        PhasePoint { x, xi }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.xi.is_finite()
    }

    pub fn dist(&self, other: &Self) -> F {
        (self.x - other.x).hypot(self.xi - other.xi)
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SymbolError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier '{name}' at {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("division by zero at (x, xi) = ({x}, {xi})")]
    DivisionByZero { x: f64, xi: f64 },
    #[error("jet order {0} not supported (max 3)")]
    InvalidOrder(usize),
    #[error("symbol series needs at least p0")]
    EmptySeries,
    #[error("principal symbol not real at ({x}, {xi}): imaginary part {imag}")]
    ComplexPrincipal { x: f64, xi: f64, imag: f64 },
}
