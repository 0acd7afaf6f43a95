//! The real action series `S0 + h S1 + h² S2` on a well.

use serde::Serialize;
use thiserror::Error;

use crate::classical::{action_s0, default_delta_e, find_orbit, ClassicalError, HamiltonFlow, Orbit, WellConfig};
use crate::homology::{double_bracket_term, BetaField, DEFAULT_LOOP_NODES, DEFAULT_STENCIL};
use crate::scalar::Real;
use crate::symbol::{Program, SymbolSeries};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ActionError {
    #[error(transparent)]
    Orbit(#[from] ClassicalError),
    #[error("loop integral of Im p1 at E = {energy} is {value:e}; the transport equation for beta0 has no periodic solution")]
    NotSolvable { energy: f64, value: f64 },
}

impl From<crate::symbol::SymbolError> for ActionError {
    fn from(e: crate::symbol::SymbolError) -> Self {
        ActionError::Orbit(e.into())
    }
}

/// Sign pattern of the energy-derivative terms of `S2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum S2Form {
    /// `(1/24) d/dE ∮Δ − ∮(Re p2 − ½{{β0,p0},β0}) − ½ d/dE ∮(Re p1)²`.
    #[default]
    Nominal,
    /// Both energy-derivative terms with the opposite sign:
    /// `−(1/24) d/dE ∮Δ − ∮(Re p2 − ½{{β0,p0},β0}) + ½ d/dE ∮(Re p1)²`.
    Calibrated,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActionOptions<F> {
    /// Energy step of `d/dE`; `None` picks the window default.
    pub delta_e: Option<F>,
    /// Uniform nodes for the bracket loop integral.
    pub loop_nodes: usize,
    pub stencil: F,
    pub s2_form: S2Form,
    /// Largest accepted `|∮ Im p1 dt|`.
    pub solvability_tol: F,
}

impl<F: Real> Default for ActionOptions<F> {
    fn default() -> Self {
        ActionOptions {
            delta_e: None,
            loop_nodes: DEFAULT_LOOP_NODES,
            stencil: F::lit(DEFAULT_STENCIL),
            s2_form: S2Form::Nominal,
            solvability_tol: F::lit(1e-8),
        }
    }
}

/// The three pieces of `S2`, each already carrying its own prefactor from the
/// nominal formula: `delta = (1/24) d/dE ∮Δ`, `p1_sq = ½ d/dE ∮(Re p1)²`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct S2Terms<F> {
    pub delta: F,
    pub re_p2: F,
    pub double_bracket: F,
    pub p1_sq: F,
}

impl<F: Real> S2Terms<F> {
    pub fn combine(&self, form: S2Form) -> F {
        let half = F::lit(0.5);
        let middle = -(self.re_p2 - half * self.double_bracket);
        match form {
            S2Form::Nominal => self.delta + middle - self.p1_sq,
            S2Form::Calibrated => -self.delta + middle + self.p1_sq,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ActionSeries<F> {
    pub energy: F,
    pub period: F,
    pub s0: F,
    pub s1: F,
    pub s2: F,
    pub s3: F,
    pub terms: S2Terms<F>,
    /// `∮ Im p1 dt`, zero for PT-symmetric series.
    pub im_p1_loop: F,
    /// Largest imaginary part dropped from a real loop integral.
    pub im_residue: F,
}

impl<F: Real> ActionSeries<F> {
    /// `S_h(E) = S0 + h S1 + h² S2`.
    pub fn eval(&self, h: F) -> F {
        self.s0 + h * (self.s1 + h * self.s2)
    }
}

/// Compiled symbols and settings shared by every energy of one problem.
#[derive(Debug)]
pub struct ActionContext<F> {
    flow: HamiltonFlow<F>,
    p1: Program<F>,
    p2: Program<F>,
    re_p1_zero: bool,
    re_p2_zero: bool,
    beta: BetaField<F>,
    cfg: WellConfig<F>,
    opts: ActionOptions<F>,
}

impl<F: Real> ActionContext<F> {
    pub fn new(series: &SymbolSeries, cfg: WellConfig<F>, opts: ActionOptions<F>) -> Result<Self, ActionError> {
        let flow = HamiltonFlow::new(series.principal())?;
        let p1e = series.coeff(1);
        let p2e = series.coeff(2);
        let p1 = Program::compile(&p1e);
        let p2 = Program::compile(&p2e);
        let real_zero = |p: &Program<F>| p.constant().is_some_and(|c| c.re == F::zero());
        let beta = BetaField::with_flow(flow.clone(), &p1e, cfg.clone())?.with_stencil(opts.stencil);
        Ok(ActionContext { re_p1_zero: real_zero(&p1), re_p2_zero: real_zero(&p2), flow, p1, p2, beta, cfg, opts })
    }

    pub fn config(&self) -> &WellConfig<F> {
        &self.cfg
    }

    pub fn options(&self) -> &ActionOptions<F> {
        &self.opts
    }

    pub fn flow(&self) -> &HamiltonFlow<F> {
        &self.flow
    }

    pub fn beta(&self) -> &BetaField<F> {
        &self.beta
    }

    pub fn delta_e(&self) -> F {
        self.opts.delta_e.unwrap_or_else(|| default_delta_e(&self.cfg))
    }

    /// Energy margin the derivative and stencil evaluations need inside the
    /// well window.
    pub fn margin(&self) -> F {
        F::lit(2.0) * (self.delta_e() + self.opts.stencil)
    }

    pub fn orbit(&self, energy: F) -> Result<Orbit<F>, ActionError> {
        Ok(find_orbit(&self.flow, energy, &self.cfg)?)
    }

    fn loop_p1(&self, orb: &Orbit<F>) -> Result<num_complex::Complex<F>, ActionError> {
        Ok(orb.integrate(|_, pt| self.p1.eval(pt))?)
    }

    /// `∮ Δ dt` and `∮ (Re p1)² dt` on one orbit.
    fn curvature_loops(&self, orb: &Orbit<F>) -> Result<(F, F), ActionError> {
        let d = orb.integrate(|_, pt| {
            let j = self.flow.jet(pt, 2)?;
            Ok::<_, ClassicalError>(j.get(2, 0) * j.get(0, 2) - j.get(1, 1) * j.get(1, 1))
        })?;
        let q = if self.re_p1_zero {
            F::zero()
        } else {
            orb.integrate(|_, pt| {
                let r = self.p1.eval(pt)?.re;
                Ok::<_, ClassicalError>(r * r)
            })?
        };
        Ok((d, q))
    }

    /// `(d/dE ∮Δ, d/dE ∮(Re p1)²)` from one shared set of four orbits.
    fn curvature_derivatives(&self, energy: F) -> Result<(F, F), ActionError> {
        let delta = self.delta_e();
        for e in [energy - delta, energy + delta] {
            if !self.cfg.contains(e) {
                return Err(ClassicalError::OutsideWindow {
                    energy: e.to_f64().unwrap_or(f64::NAN),
                    lo: self.cfg.e_min.to_f64().unwrap_or(f64::NAN),
                    hi: self.cfg.e_max.to_f64().unwrap_or(f64::NAN),
                }
                .into());
            }
        }
        let half = delta * F::lit(0.5);
        let at = |e: F| -> Result<(F, F), ActionError> { self.curvature_loops(&self.orbit(e)?) };
        let (wp, wm, np, nm) = (at(energy + delta)?, at(energy - delta)?, at(energy + half)?, at(energy - half)?);
        let rich = |wp: F, wm: F, np: F, nm: F| {
            let wide = (wp - wm) / (delta + delta);
            let narrow = (np - nm) / delta;
            (F::lit(4.0) * narrow - wide) / F::lit(3.0)
        };
        Ok((rich(wp.0, wm.0, np.0, nm.0), rich(wp.1, wm.1, np.1, nm.1)))
    }

    /// `S1 = π − ∮ Re p1 dt`.
    pub fn s1(&self, orb: &Orbit<F>) -> Result<F, ActionError> {
        Ok(F::PI() - self.loop_p1(orb)?.re)
    }

    /// `(1/24) d/dE ∮ Δ dt`.
    pub fn delta_term(&self, energy: F) -> Result<F, ActionError> {
        Ok(self.curvature_derivatives(energy)?.0 / F::lit(24.0))
    }

    pub fn s2_terms(&self, orb: &Orbit<F>) -> Result<S2Terms<F>, ActionError> {
        let (dd, dq) = self.curvature_derivatives(orb.energy())?;
        let re_p2 = if self.re_p2_zero { F::zero() } else { orb.integrate(|_, pt| Ok::<_, ClassicalError>(self.p2.eval(pt)?.re))? };
        let db = double_bracket_term(&self.beta, orb, self.opts.loop_nodes)?;
        Ok(S2Terms { delta: dd / F::lit(24.0), re_p2, double_bracket: db, p1_sq: F::lit(0.5) * dq })
    }

    /// `S0`, `S1` and the `β0` solvability residue; the cheap part of the series.
    pub fn leading(&self, orb: &Orbit<F>) -> Result<(F, F, F), ActionError> {
        let s0 = action_s0(orb)?;
        let p1 = self.loop_p1(orb)?;
        Ok((s0, F::PI() - p1.re, p1.im))
    }

    /// `d/dE S1 = −d/dE ∮ Re p1 dt`.
    pub fn s1_slope(&self, energy: F) -> Result<F, ActionError> {
        if self.re_p1_zero {
            return Ok(F::zero());
        }
        crate::classical::d_de(
            |e| -> Result<F, ActionError> { self.s1(&self.orbit(e)?) },
            energy,
            self.delta_e(),
            &self.cfg,
        )
    }

    pub fn series_on(&self, orb: &Orbit<F>) -> Result<ActionSeries<F>, ActionError> {
        let energy = orb.energy();
        let (s0, s1, im1) = self.leading(orb)?;
        if im1.abs() > self.opts.solvability_tol {
            return Err(ActionError::NotSolvable {
                energy: energy.to_f64().unwrap_or(f64::NAN),
                value: im1.to_f64().unwrap_or(f64::NAN),
            });
        }
        let im2 = if self.re_p2_zero && self.p2.is_zero() {
            F::zero()
        } else {
            orb.integrate(|_, pt| Ok::<_, ClassicalError>(self.p2.eval(pt)?.im))?
        };
        let terms = self.s2_terms(orb)?;
        Ok(ActionSeries {
            energy,
            period: orb.period(),
            s0,
            s1,
            s2: terms.combine(self.opts.s2_form),
            s3: F::zero(),
            terms,
            im_p1_loop: im1,
            im_residue: im1.abs().max(im2.abs()),
        })
    }

    pub fn series(&self, energy: F) -> Result<ActionSeries<F>, ActionError> {
        self.series_on(&self.orbit(energy)?)
    }
}

/// `S1 = π − ∮ Re p1 dt` on `orb`.
pub fn action_s1<F: Real>(series: &SymbolSeries, orb: &Orbit<F>) -> Result<F, ActionError> {
    let p1 = Program::<F>::compile(&series.coeff(1));
    Ok(F::PI() - orb.integrate(|_, pt| Ok::<_, ClassicalError>(p1.eval(pt)?.re))?)
}

/// `(1/24) d/dE ∮ Δ dt` with `Δ = p0_xx p0_ξξ − p0_xξ²`.
pub fn delta_term<F: Real>(ctx: &ActionContext<F>, energy: F) -> Result<F, ActionError> {
    ctx.delta_term(energy)
}

pub fn action_s2<F: Real>(ctx: &ActionContext<F>, energy: F) -> Result<F, ActionError> {
    Ok(ctx.s2_terms(&ctx.orbit(energy)?)?.combine(ctx.options().s2_form))
}

pub fn action_series<F: Real>(ctx: &ActionContext<F>, energy: F) -> Result<ActionSeries<F>, ActionError> {
    ctx.series(energy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::PhasePoint;
    use std::f64::consts::PI;

    fn ctx(srcs: &[&str]) -> ActionContext<f64> {
        let s = SymbolSeries::parse(srcs).unwrap();
        ActionContext::new(&s, WellConfig::new(PhasePoint::new(0.0, 1.0), 0.2, 3.0), ActionOptions::default()).unwrap()
    }

    #[test]
    fn harmonic_series() {
        let a = ctx(&["xi^2 + x^2"]).series(1.0).unwrap();
        assert!((a.s0 - PI).abs() < 1e-9 && (a.s1 - PI).abs() < 1e-12);
        assert!(a.s2.abs() < 1e-7 && a.s3 == 0.0);
        assert!((a.period - PI).abs() < 1e-9);
    }

    #[test]
    fn shifted_harmonic_series() {
        let c = ctx(&["xi^2 + x^2", "i*x"]);
        for e in [0.7, 1.0, 1.9] {
            let a = c.series(e).unwrap();
            assert!((a.s1 - PI).abs() < 1e-10);
            assert!((a.s2 + PI / 4.0).abs() < 1e-6, "E={e}: {}", a.s2);
            assert!(a.im_residue < 1e-9);
        }
    }

    #[test]
    fn s1_examples() {
        let c = ctx(&["xi^2 + x^2", "1"]);
        let orb = c.orbit(1.0).unwrap();
        assert!((c.s1(&orb).unwrap() - (PI - orb.period())).abs() < 1e-10);
        let s = SymbolSeries::parse(&["xi^2 + x^2", "x"]).unwrap();
        assert!((action_s1(&s, &orb).unwrap() - PI).abs() < 1e-10);
        assert!(c.series(1.0).unwrap().s2.abs() < 1e-6);
    }

    #[test]
    fn harmonic_delta_term_vanishes() {
        let c = ctx(&["xi^2 + x^2"]);
        assert!(delta_term(&c, 1.0).unwrap().abs() < 1e-8);
        assert!(delta_term(&c, 2.3).unwrap().abs() < 1e-8);
    }

    #[test]
    fn quartic_delta_term_matches_closed_scaling() {
        // ∮ 24x² dt = 48 C E^{1/4} with C = ∫₀¹ u²/√(1 − u⁴) du
        let f = |v: f64| {
            let u = 1.0 - v * v;
            2.0 * u * u / ((1.0 + u) * (1.0 + u * u)).sqrt()
        };
        let n = 4000;
        let c: f64 = (0..n).map(|k| f((k as f64 + 0.5) / n as f64)).sum::<f64>() / n as f64;
        let cx = ctx(&["xi^2 + x^4"]);
        for e in [0.8f64, 1.5] {
            let want = 0.5 * c * e.powf(-0.75);
            let got = delta_term(&cx, e).unwrap();
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
    }

    #[test]
    fn s2_forms_differ_only_in_derivative_terms() {
        let t = S2Terms { delta: 1.0, re_p2: 2.0, double_bracket: 4.0, p1_sq: 8.0 };
        assert_eq!(t.combine(S2Form::Nominal), 1.0 - 2.0 + 2.0 - 8.0);
        assert_eq!(t.combine(S2Form::Calibrated), -1.0 - 2.0 + 2.0 + 8.0);
    }

    #[test]
    fn window_violation_is_reported() {
        let c = ctx(&["xi^2 + x^2"]);
        assert!(matches!(c.series(0.2), Err(ActionError::Orbit(ClassicalError::OutsideWindow { .. }))));
    }
}
