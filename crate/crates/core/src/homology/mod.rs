//! Homological equation `{β, p0} = q` along the closed orbits: loop-integral
//! compatibility, the off-orbit field `β0` and the bracket terms built on it.

use std::collections::HashMap;
use std::sync::RwLock;

use serde::Serialize;

use crate::classical::{find_orbit, ClassicalError, HamiltonFlow, Orbit, WellConfig};
use crate::scalar::Real;
use crate::symbol::{Expr, JetExpr, PhasePoint, Program, SymbolSeries};

/// Result of a loop-integral test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LoopCheck<F> {
    pub value: F,
    pub tol: F,
    pub passed: bool,
}

impl<F: Real> LoopCheck<F> {
    fn new(value: F, tol: F) -> Self {
        LoopCheck { value, tol, passed: value.abs() <= tol }
    }
}

/// `∮ q dt` and whether it vanishes to `tol`.
pub fn solvability_check<F: Real>(
    q: impl Fn(PhasePoint<F>) -> Result<F, ClassicalError>,
    orb: &Orbit<F>,
    tol: F,
) -> Result<LoopCheck<F>, ClassicalError> {
    let v = orb.integrate(|_, pt| q(pt))?;
    Ok(LoopCheck::new(v, tol))
}

/// [`solvability_check`] for the real part of an expression.
pub fn solvability_check_expr<F: Real>(q: &Expr, orb: &Orbit<F>, tol: F) -> Result<LoopCheck<F>, ClassicalError> {
    let prog = Program::<F>::compile(q);
    solvability_check(|pt| Ok(prog.eval(pt)?.re), orb, tol)
}

/// Default number of uniform loop nodes for the bracket integrals.
pub const DEFAULT_LOOP_NODES: usize = 64;

/// Default stencil step for derivatives of `β0`.
pub const DEFAULT_STENCIL: f64 = 1e-3;

/// `β0(ρ) = ∫₀^T (1 − t/T) Im p1(Φ_t ρ) dt` on the orbit through each point,
/// so that `{β0, p0} = Im p1`.
#[derive(Debug)]
pub struct BetaField<F> {
    flow: HamiltonFlow<F>,
    p1: JetExpr<F>,
    im_zero: bool,
    cfg: WellConfig<F>,
    stencil: F,
    cache: RwLock<HashMap<(i64, i64), F>>,
}

const KEY_SCALE: f64 = 1e12;

impl<F: Real> BetaField<F> {
    pub fn new(series: &SymbolSeries, cfg: WellConfig<F>) -> Result<Self, ClassicalError> {
        let flow = HamiltonFlow::new(series.principal())?;
        Self::with_flow(flow, &series.coeff(1), cfg)
    }

    pub fn with_flow(flow: HamiltonFlow<F>, p1: &Expr, cfg: WellConfig<F>) -> Result<Self, ClassicalError> {
        let p1 = JetExpr::new(p1, 1)?;
        let im_zero = p1.partial(0, 0).constant().is_some_and(|c| c.im == F::zero());
        Ok(BetaField { flow, p1, im_zero, cfg, stencil: F::lit(DEFAULT_STENCIL), cache: RwLock::new(HashMap::new()) })
    }

    pub fn with_stencil(mut self, stencil: F) -> Self {
        self.stencil = stencil;
        self.clear_cache();
        self
    }

    pub fn stencil(&self) -> F {
        self.stencil
    }

    pub fn flow(&self) -> &HamiltonFlow<F> {
        &self.flow
    }

    pub fn config(&self) -> &WellConfig<F> {
        &self.cfg
    }

    pub fn clear_cache(&self) {
        self.cache.write().unwrap_or_else(|e| e.into_inner()).clear();
    }

    pub fn cached_len(&self) -> usize {
        self.cache.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn im_p1(&self, pt: PhasePoint<F>) -> Result<F, ClassicalError> {
        Ok(self.p1.value(pt)?.im)
    }

    /// `Re p1` and `Im p1` with their first partials.
    pub fn p1_jet(&self, pt: PhasePoint<F>) -> Result<crate::symbol::Jet<num_complex::Complex<F>>, ClassicalError> {
        Ok(self.p1.eval(pt, 1)?)
    }

    fn key(pt: PhasePoint<F>) -> Option<(i64, i64)> {
        let x = pt.x.to_f64()?;
        let xi = pt.xi.to_f64()?;
        Some(((x * KEY_SCALE).round() as i64, (xi * KEY_SCALE).round() as i64))
    }

    /// `β0` at `rho`, integrating over the orbit through `rho`.
    pub fn value(&self, rho: PhasePoint<F>) -> Result<F, ClassicalError> {
        if self.im_zero {
            return Ok(F::zero());
        }
        let key = Self::key(rho);
        if let Some(k) = key {
            if let Some(v) = self.cache.read().unwrap_or_else(|e| e.into_inner()).get(&k) {
                return Ok(*v);
            }
        }
        let v = self.compute(rho)?;
        if let Some(k) = key {
            self.cache.write().unwrap_or_else(|e| e.into_inner()).insert(k, v);
        }
        Ok(v)
    }

    /// `β0` at `rho` without touching the cache.
    pub fn compute(&self, rho: PhasePoint<F>) -> Result<F, ClassicalError> {
        let orb = self.orbit_through(rho)?;
        beta0_on_orbit(&orb, |pt| self.im_p1(pt))
    }

    pub fn orbit_through(&self, rho: PhasePoint<F>) -> Result<Orbit<F>, ClassicalError> {
        let e = self.flow.energy(rho)?;
        let cfg = WellConfig { seed: rho, ..self.cfg.clone() };
        find_orbit(&self.flow, e, &cfg)
    }

    /// `(∂x β0, ∂ξ β0)` by Richardson-extrapolated central differences.
    pub fn gradient(&self, rho: PhasePoint<F>) -> Result<[F; 2], ClassicalError> {
        if self.im_zero {
            return Ok([F::zero(); 2]);
        }
        let j = self.flow.jet(rho, 1)?;
        let g = j.dx().hypot(j.dxi());
        let s = self.stencil / g.max(F::one());
        let half = s * F::lit(0.5);
        let mut out = [F::zero(); 2];
        for (axis, o) in out.iter_mut().enumerate() {
            let shift = |d: F| {
                if axis == 0 {
                    PhasePoint::new(rho.x + d, rho.xi)
                } else {
                    PhasePoint::new(rho.x, rho.xi + d)
                }
            };
            let wide = (self.value(shift(s))? - self.value(shift(-s))?) / (s + s);
            let narrow = (self.value(shift(half))? - self.value(shift(-half))?) / s;
            *o = (F::lit(4.0) * narrow - wide) / F::lit(3.0);
        }
        Ok(out)
    }
}

/// `∫₀^T (1 − t/T) q(Φ_t ρ0) dt` on a given orbit.
pub fn beta0_on_orbit<F: Real>(
    orb: &Orbit<F>,
    q: impl Fn(PhasePoint<F>) -> Result<F, ClassicalError>,
) -> Result<F, ClassicalError> {
    let t_per = orb.period();
    orb.integrate(|t, pt| Ok::<_, ClassicalError>((F::one() - t / t_per) * q(pt)?))
}

/// `β0(rho)` for a series, building the field on the fly.
pub fn solve_beta0<F: Real>(
    series: &SymbolSeries,
    cfg: &WellConfig<F>,
    rho: PhasePoint<F>,
) -> Result<F, ClassicalError> {
    BetaField::new(series, cfg.clone())?.compute(rho)
}

/// Poisson bracket `{f, g} = ∂ξf ∂xg − ∂xf ∂ξg` from gradients `[∂x, ∂ξ]`.
pub fn bracket<F: Real>(df: [F; 2], dg: [F; 2]) -> F {
    df[1] * dg[0] - df[0] * dg[1]
}

/// `∮ {{β0, p0}, β0} dt = ∮ {Im p1, β0} dt` on `m` uniform nodes.
pub fn double_bracket_term<F: Real>(bf: &BetaField<F>, orb: &Orbit<F>, m: usize) -> Result<F, ClassicalError> {
    if bf.im_zero {
        return Ok(F::zero());
    }
    orb.integrate_uniform(m, |_, pt| {
        let j = bf.p1_jet(pt)?.im();
        if j.dx() == F::zero() && j.dxi() == F::zero() {
            return Ok::<_, ClassicalError>(F::zero());
        }
        Ok(bracket([j.dx(), j.dxi()], bf.gradient(pt)?))
    })
}

/// `∮ (Im p2 − {β0, Re p1}) dt`, the compatibility integral for `β1`.
pub fn beta1_compat_check<F: Real>(
    series: &SymbolSeries,
    bf: &BetaField<F>,
    orb: &Orbit<F>,
    m: usize,
    tol: F,
) -> Result<LoopCheck<F>, ClassicalError> {
    let p2 = Program::<F>::compile(&series.coeff(2));
    let v = orb.integrate_uniform(m, |_, pt| {
        let im2 = p2.eval(pt)?.im;
        let re1 = bf.p1_jet(pt)?.re();
        if re1.dx() == F::zero() && re1.dxi() == F::zero() {
            return Ok::<_, ClassicalError>(im2);
        }
        Ok(im2 - bracket(bf.gradient(pt)?, [re1.dx(), re1.dxi()]))
    })?;
    Ok(LoopCheck::new(v, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::orbit_average;
    use crate::symbol::parse_expr;
    use std::f64::consts::PI;

    fn cfg(lo: f64, hi: f64) -> WellConfig<f64> {
        WellConfig::new(PhasePoint::new(0.0, 1.0), lo, hi)
    }

    fn field(p0: &str, p1: &str) -> BetaField<f64> {
        BetaField::new(&SymbolSeries::parse(&[p0, p1]).unwrap(), cfg(0.2, 3.0)).unwrap()
    }

    #[test]
    fn harmonic_beta0_is_half_xi() {
        let bf = field("xi^2 + x^2", "i*x");
        assert!((bf.value(PhasePoint::new(0.0, 1.0)).unwrap() - 0.5).abs() < 1e-10);
        assert!(bf.value(PhasePoint::new(1.0, 0.0)).unwrap().abs() < 1e-10);
        let p = PhasePoint::new(0.6, -0.9);
        assert!((bf.value(p).unwrap() + 0.45).abs() < 1e-10);
        let g = bf.gradient(p).unwrap();
        assert!(g[0].abs() < 1e-7 && (g[1] - 0.5).abs() < 1e-7, "{g:?}");
        let zero = field("xi^2 + x^2", "1");
        assert_eq!(zero.value(p).unwrap(), 0.0);
    }

    #[test]
    fn cache_reproduces_fresh_values() {
        let bf = field("xi^2 + x^4", "i*(x + x^3)");
        let p = PhasePoint::new(0.3, 0.8);
        let a = bf.value(p).unwrap();
        assert_eq!(bf.cached_len(), 1);
        assert!((bf.value(p).unwrap() - a).abs() == 0.0);
        assert!((bf.compute(p).unwrap() - a).abs() < 1e-9);
    }

    #[test]
    fn solvability_examples() {
        let fl = HamiltonFlow::new(&parse_expr("xi^2 + x^2").unwrap()).unwrap();
        let orb = find_orbit(&fl, 1.0, &cfg(0.2, 3.0)).unwrap();
        let odd = solvability_check_expr(&parse_expr("x").unwrap(), &orb, 1e-9).unwrap();
        assert!(odd.passed);
        let sq = solvability_check_expr(&parse_expr("x^2").unwrap(), &orb, 1e-9).unwrap();
        assert!(!sq.passed && (sq.value - PI / 2.0).abs() < 1e-9);
        assert!(solvability_check(|_| Ok(0.0), &orb, 0.0).unwrap().passed);
    }

    #[test]
    fn harmonic_double_bracket() {
        let bf = field("xi^2 + x^2", "i*x");
        let orb = bf.orbit_through(PhasePoint::new(0.0, 1.0)).unwrap();
        let v = double_bracket_term(&bf, &orb, 32).unwrap();
        assert!((v + PI / 2.0).abs() < 1e-7, "{v}");
        let zero = field("xi^2 + x^2", "0");
        assert_eq!(double_bracket_term(&zero, &orb, 32).unwrap(), 0.0);
    }

    #[test]
    fn stencil_halving_is_stable() {
        let a = field("xi^2 + x^4", "i*x");
        let orb = a.orbit_through(PhasePoint::new(0.0, 1.0)).unwrap();
        let v1 = double_bracket_term(&a, &orb, 48).unwrap();
        let b = field("xi^2 + x^4", "i*x").with_stencil(5e-4);
        let v2 = double_bracket_term(&b, &orb, 48).unwrap();
        assert!((v1 - v2).abs() < 1e-5, "{v1} {v2}");
    }

    #[test]
    fn beta0_solves_transport_equation() {
        let bf = field("xi^2 + x^4 + x^2/2", "i*(x + sin(x)/3)");
        let rho = PhasePoint::new(0.2, 1.1);
        let orb = bf.orbit_through(rho).unwrap();
        let dt = 1e-4;
        for k in 0..6 {
            let t = 0.3 + 0.41 * k as f64;
            let up = bf.compute(orb.point_at(t + dt)).unwrap();
            let dn = bf.compute(orb.point_at(t - dt)).unwrap();
            let d = (up - dn) / (2.0 * dt);
            let q = bf.im_p1(orb.point_at(t)).unwrap();
            assert!((d + q).abs() < 1e-5, "t={t}: {d} vs {q}");
        }
        let b0 = bf.compute(rho).unwrap();
        let bt = bf.compute(orb.point_at(orb.period())).unwrap();
        assert!((b0 - bt).abs() < 1e-6);
    }

    #[test]
    fn beta0_is_reflection_even_on_symmetric_orbit() {
        let bf = field("xi^2 + x^4", "i*x^3");
        let orb = bf.orbit_through(PhasePoint::new(0.0, 1.0)).unwrap();
        let t_per = orb.period();
        for k in 1..5 {
            let s = t_per * k as f64 / 11.0;
            let a = bf.compute(orb.point_at(s)).unwrap();
            let b = bf.compute(orb.point_at(t_per - s)).unwrap();
            assert!((a - b).abs() < 1e-6, "{a} {b}");
        }
    }

    #[test]
    fn beta1_examples() {
        let s = SymbolSeries::parse(&["xi^2 + x^2", "i*x", "0"]).unwrap();
        let bf = BetaField::new(&s, cfg(0.2, 3.0)).unwrap();
        let orb = bf.orbit_through(PhasePoint::new(0.0, 1.0)).unwrap();
        assert!(beta1_compat_check(&s, &bf, &orb, 32, 1e-9).unwrap().passed);
        let s3 = SymbolSeries::parse(&["xi^2 + x^2", "i*x", "i*x^3"]).unwrap();
        let c = beta1_compat_check(&s3, &bf, &orb, 32, 1e-9).unwrap();
        assert!(c.passed, "{c:?}");
        let brute = orbit_average(&orb, |p| p.x.powi(3));
        assert!((c.value - brute).abs() < 1e-9);
        let sx = SymbolSeries::parse(&["xi^2 + x^2", "i*x", "x^2"]).unwrap();
        assert_eq!(beta1_compat_check(&sx, &bf, &orb, 32, 1e-9).unwrap().value, 0.0);
    }
}
