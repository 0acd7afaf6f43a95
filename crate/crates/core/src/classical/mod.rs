//! Classical dynamics of the principal symbol: periodic orbits of the Hamilton
//! flow on a well, loop integrals along them and energy derivatives.

mod flow;
mod orbit;
mod quad;

pub use flow::{HamiltonFlow, Knot};
pub use orbit::{action_s0, d_de, default_delta_e, find_orbit, orbit_average, orbit_average_expr, Orbit, WellConfig};
pub use quad::GaussLegendre;

use thiserror::Error;

use crate::symbol::SymbolError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassicalError {
    #[error("energy {energy} is outside the well window [{lo}, {hi}]")]
    OutsideWindow { energy: f64, lo: f64, hi: f64 },
    #[error("orbit at E = {energy} did not return to its seed within t = {max_period}")]
    NoReturn { energy: f64, max_period: f64 },
    #[error("projection onto the level set p0 = {energy} failed (residual {residual:e})")]
    LevelProjection { energy: f64, residual: f64 },
    #[error("critical point of p0 near ({x}, {xi}) at E = {energy} (|grad p0| = {grad:e})")]
    CriticalPoint { energy: f64, x: f64, xi: f64, grad: f64 },
    #[error("orbit at E = {energy} does not close (gap {gap:e})")]
    NotClosed { energy: f64, gap: f64 },
    #[error("orbit at E = {energy} is not a simple loop (tangent turns {turns} times)")]
    NotSimple { energy: f64, turns: f64 },
    #[error("integrator step size underflow at t = {t} on E = {energy}")]
    StepUnderflow { energy: f64, t: f64 },
    #[error(transparent)]
    Symbol(#[from] SymbolError),
}
