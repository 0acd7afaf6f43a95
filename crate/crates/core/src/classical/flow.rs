//! Hamilton flow of a real principal symbol and an embedded Dormand–Prince
//! 5(4) integrator.

use std::sync::Arc;

use super::ClassicalError;
use crate::scalar::Real;
use crate::symbol::{Expr, Jet, JetExpr, PhasePoint, SymbolError};

/// State, velocity and acceleration at one accepted step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Knot<F> {
    pub t: F,
    pub y: [F; 2],
    pub dy: [F; 2],
    pub ddy: [F; 2],
}

impl<F: Real> Knot<F> {
    pub fn point(&self) -> PhasePoint<F> {
        PhasePoint::new(self.y[0], self.y[1])
    }
}

/// Hamilton flow `ẋ = ∂ξ p0`, `ξ̇ = −∂x p0`.
#[derive(Clone, Debug)]
pub struct HamiltonFlow<F> {
    p0: Arc<JetExpr<F>>,
}

impl<F: Real> HamiltonFlow<F> {
    pub fn new(p0: &Expr) -> Result<Self, SymbolError> {
        Ok(HamiltonFlow { p0: Arc::new(JetExpr::new(p0, 2)?) })
    }

    pub fn jets(&self) -> &JetExpr<F> {
        &self.p0
    }

    pub fn energy(&self, pt: PhasePoint<F>) -> Result<F, SymbolError> {
        Ok(self.p0.value(pt)?.re)
    }

    pub fn jet(&self, pt: PhasePoint<F>, order: usize) -> Result<Jet<F>, SymbolError> {
        Ok(self.p0.eval(pt, order)?.re())
    }

    pub fn velocity(&self, y: [F; 2]) -> Result<[F; 2], SymbolError> {
        let pt = PhasePoint::new(y[0], y[1]);
        let dx = self.p0.partial(1, 0).eval(pt)?.re;
        let dxi = self.p0.partial(0, 1).eval(pt)?.re;
        Ok([dxi, -dx])
    }

    /// Velocity and its time derivative along the flow.
    pub fn velocity_accel(&self, y: [F; 2]) -> Result<([F; 2], [F; 2]), SymbolError> {
        let j = self.jet(PhasePoint::new(y[0], y[1]), 2)?;
        let v = [j.dxi(), -j.dx()];
        let a = [
            j.get(1, 1) * v[0] + j.get(0, 2) * v[1],
            -(j.get(2, 0) * v[0] + j.get(1, 1) * v[1]),
        ];
        Ok((v, a))
    }

    pub(crate) fn knot(&self, t: F, y: [F; 2], dir: F) -> Result<Knot<F>, SymbolError> {
        let (v, a) = self.velocity_accel(y)?;
        Ok(Knot { t, y, dy: [dir * v[0], dir * v[1]], ddy: a })
    }

    /// `Φ_t(pt)` for either sign of `t`, kept on the level set of `pt`.
    pub fn evolve(&self, pt: PhasePoint<F>, t: F, rk_tol: F) -> Result<PhasePoint<F>, ClassicalError> {
        if t == F::zero() {
            return Ok(pt);
        }
        let dir = if t > F::zero() { F::one() } else { -F::one() };
        let stepper = Stepper { flow: self, tol: rk_tol, dir, energy: self.energy(pt)?, crit_tol: F::lit(1e-12) };
        let knots = stepper.run([pt.x, pt.xi], t.abs(), |_| Ok(Control::Continue))?;
        Ok(knots[knots.len() - 1].point())
    }

    /// Newton projection onto `{p0 = energy}` along `∇p0`.
    pub fn project(&self, y: [F; 2], energy: F, crit_tol: F) -> Result<[F; 2], ClassicalError> {
        let mut y = y;
        let scale = F::one() + energy.abs();
        let target = F::epsilon() * F::lit(16.0) * scale;
        let mut resid = F::infinity();
        for _ in 0..60 {
            let j = self.jet(PhasePoint::new(y[0], y[1]), 1)?;
            resid = j.value() - energy;
            let g2 = j.dx() * j.dx() + j.dxi() * j.dxi();
            if resid.abs() <= target {
                return Ok(y);
            }
            if g2.sqrt() < crit_tol {
                return Err(ClassicalError::CriticalPoint {
                    energy: energy.to_f64().unwrap_or(f64::NAN),
                    x: y[0].to_f64().unwrap_or(f64::NAN),
                    xi: y[1].to_f64().unwrap_or(f64::NAN),
                    grad: g2.sqrt().to_f64().unwrap_or(f64::NAN),
                });
            }
            let s = resid / g2;
            y = [y[0] - s * j.dx(), y[1] - s * j.dxi()];
            if !(y[0].is_finite() && y[1].is_finite()) {
                break;
            }
        }
        // a couple of ulps above target is still a converged projection
        if resid.abs() <= target * F::lit(64.0) {
            return Ok(y);
        }
        Err(ClassicalError::LevelProjection {
            energy: energy.to_f64().unwrap_or(f64::NAN),
            residual: resid.to_f64().unwrap_or(f64::NAN),
        })
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// What the step visitor wants next.
pub(crate) enum Control {
    Continue,
    Stop,
}

pub(crate) struct Stepper<'a, F> {
    pub flow: &'a HamiltonFlow<F>,
    pub tol: F,
    /// +1 forward in time, −1 backward.
    pub dir: F,
    /// Level set to project onto after each accepted step.
    pub energy: F,
    pub crit_tol: F,
}

impl<'a, F: Real> Stepper<'a, F> {
    fn f(&self, y: [F; 2]) -> Result<[F; 2], ClassicalError> {
        let v = self.flow.velocity(y)?;
        Ok([self.dir * v[0], self.dir * v[1]])
    }

    /// One DP5(4) step; returns the 5th-order solution and the scaled error.
    fn step(&self, y: [F; 2], k1: [F; 2], h: F) -> Result<([F; 2], F), ClassicalError> {
        let l = F::lit;
        let comb = |terms: &[(f64, [F; 2])]| {
            let mut out = y;
            for &(c, k) in terms {
                out[0] += h * l(c) * k[0];
                out[1] += h * l(c) * k[1];
            }
            out
        };
        let _ = (C2, C3, C4, C5);
        let k2 = self.f(comb(&[(A21, k1)]))?;
        let k3 = self.f(comb(&[(A31, k1), (A32, k2)]))?;
        let k4 = self.f(comb(&[(A41, k1), (A42, k2), (A43, k3)]))?;
        let k5 = self.f(comb(&[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]))?;
        let k6 = self.f(comb(&[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]))?;
        let y5 = comb(&[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
        let k7 = self.f(y5)?;
        let mut err = F::zero();
        for i in 0..2 {
            let e = h
                * (l(E1) * k1[i] + l(E3) * k3[i] + l(E4) * k4[i] + l(E5) * k5[i] + l(E6) * k6[i] + l(E7) * k7[i]);
            let sc = self.tol + self.tol * y[i].abs().max(y5[i].abs());
            err = err.max((e / sc).abs());
        }
        Ok((y5, err))
    }

    /// Integrate from `y0` at t = 0 up to `t_end` (exactly, when reached),
    /// handing every accepted knot to `visit`. Returns the knots.
    pub fn run(
        &self,
        y0: [F; 2],
        t_end: F,
        mut visit: impl FnMut(&[Knot<F>]) -> Result<Control, ClassicalError>,
    ) -> Result<Vec<Knot<F>>, ClassicalError> {
        let mut knots = vec![self.flow.knot(F::zero(), y0, self.dir)?];
        let v0 = self.f(y0)?;
        let speed = v0[0].hypot(v0[1]);
        if speed < self.crit_tol {
            return Err(self.critical(y0, speed));
        }
        let size = F::one() + y0[0].abs().max(y0[1].abs());
        let mut h = (self.tol.powf(F::lit(0.2)) * size / speed).min(t_end);
        let mut t = F::zero();
        let mut y = y0;
        let mut k1 = v0;
        let h_min = t_end * F::epsilon() * F::lit(64.0);
        while t < t_end {
            let last = t + h >= t_end;
            let hh = if last { t_end - t } else { h };
            let (ynew, err) = self.step(y, k1, hh)?;
            if err <= F::one() && ynew[0].is_finite() && ynew[1].is_finite() {
                t = if last { t_end } else { t + hh };
                y = self.flow.project(ynew, self.energy, self.crit_tol)?;
                let knot = self.flow.knot(t, y, self.dir)?;
                let sp = knot.dy[0].hypot(knot.dy[1]);
                if sp < self.crit_tol {
                    return Err(self.critical(y, sp));
                }
                k1 = knot.dy;
                knots.push(knot);
                if let Control::Stop = visit(&knots)? {
                    break;
                }
            }
            let fac = if err == F::zero() {
                F::lit(5.0)
            } else {
                (F::lit(0.9) * err.powf(F::lit(-0.2))).max(F::lit(0.2)).min(F::lit(5.0))
            };
            if !last || err > F::one() {
                h = hh * fac;
            }
            if h < h_min {
                return Err(ClassicalError::StepUnderflow {
                    energy: self.energy.to_f64().unwrap_or(f64::NAN),
                    t: t.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(knots)
    }

    fn critical(&self, y: [F; 2], grad: F) -> ClassicalError {
        ClassicalError::CriticalPoint {
            energy: self.energy.to_f64().unwrap_or(f64::NAN),
            x: y[0].to_f64().unwrap_or(f64::NAN),
            xi: y[1].to_f64().unwrap_or(f64::NAN),
            grad: grad.to_f64().unwrap_or(f64::NAN),
        }
    }
}

/// Quintic Hermite interpolation between two knots.
pub(crate) fn hermite<F: Real>(a: &Knot<F>, b: &Knot<F>, t: F) -> [F; 2] {
    let dt = b.t - a.t;
    let s = (t - a.t) / dt;
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;
    let l = F::lit;
    let h0 = F::one() - l(10.0) * s3 + l(15.0) * s4 - l(6.0) * s5;
    let h1 = s - l(6.0) * s3 + l(8.0) * s4 - l(3.0) * s5;
    let h2 = l(0.5) * (s2 - l(3.0) * s3 + l(3.0) * s4 - s5);
    let h3 = F::one() - h0;
    let h4 = -l(4.0) * s3 + l(7.0) * s4 - l(3.0) * s5;
    let h5 = l(0.5) * (s3 - l(2.0) * s4 + s5);
    let mut out = [F::zero(); 2];
    for i in 0..2 {
        out[i] = h0 * a.y[i] + h1 * dt * a.dy[i] + h2 * dt * dt * a.ddy[i] + h3 * b.y[i] + h4 * dt * b.dy[i]
            + h5 * dt * dt * b.ddy[i];
    }
    out
}
