use std::ops::{AddAssign, Mul};

use num_traits::Zero;

use super::flow::{hermite, Control, HamiltonFlow, Knot, Stepper};
use super::quad::GaussLegendre;
use super::ClassicalError;
use crate::scalar::Real;
use crate::symbol::{Expr, PhasePoint, Program, SymbolError};

/// Where the well lives and how hard to work for its orbits.
#[derive(Clone, Debug, PartialEq)]
pub struct WellConfig<F> {
    /// Any point inside the well's basin of the level curves.
    pub seed: PhasePoint<F>,
    pub e_min: F,
    pub e_max: F,
    /// Relative and absolute tolerance of the integrator.
    pub rk_tol: F,
    /// Largest accepted `|p0 − E|` along the orbit.
    pub level_tol: F,
    /// Largest accepted relative closure gap `|Φ_T ρ0 − ρ0|`.
    pub closure_tol: F,
    pub max_period: F,
    /// Gradients of `p0` below this count as a critical point.
    pub critical_tol: F,
    /// Gauss–Legendre nodes per integrator step.
    pub panel_nodes: usize,
}

impl<F: Real> WellConfig<F> {
    pub fn new(seed: PhasePoint<F>, e_min: F, e_max: F) -> Self {
        WellConfig {
            seed,
            e_min,
            e_max,
            rk_tol: F::lit(1e-12),
            level_tol: F::lit(1e-9),
            closure_tol: F::lit(1e-8),
            max_period: F::lit(1e3),
            critical_tol: F::lit(1e-6),
            panel_nodes: 6,
        }
    }

    pub fn contains(&self, e: F) -> bool {
        e >= self.e_min && e <= self.e_max
    }

    pub fn width(&self) -> F {
        self.e_max - self.e_min
    }
}

/// One closed orbit `γ_E` of the Hamilton flow.
#[derive(Clone, Debug)]
pub struct Orbit<F> {
    flow: HamiltonFlow<F>,
    energy: F,
    period: F,
    knots: Vec<Knot<F>>,
    closure_gap: F,
    level_dev: F,
    turns: F,
    rule: GaussLegendre<F>,
}

impl<F: Real> Orbit<F> {
    pub fn flow(&self) -> &HamiltonFlow<F> {
        &self.flow
    }

    pub fn energy(&self) -> F {
        self.energy
    }

    pub fn period(&self) -> F {
        self.period
    }

    pub fn omega(&self) -> F {
        F::TAU() / self.period
    }

    pub fn seed(&self) -> PhasePoint<F> {
        self.knots[0].point()
    }

    pub fn knots(&self) -> &[Knot<F>] {
        &self.knots
    }

    pub fn closure_gap(&self) -> F {
        self.closure_gap
    }

    pub fn level_deviation(&self) -> F {
        self.level_dev
    }

    /// Signed number of tangent turns, `−1` for clockwise loops.
    pub fn turns(&self) -> F {
        self.turns
    }

    /// Same orbit with `n` Gauss–Legendre nodes per step.
    pub fn with_panel_nodes(&self, n: usize) -> Self {
        Orbit { rule: GaussLegendre::new(n), ..self.clone() }
    }

    /// `Φ_t ρ0`, periodic in `t`.
    pub fn point_at(&self, t: F) -> PhasePoint<F> {
        let mut t = t % self.period;
        if t < F::zero() {
            t += self.period;
        }
        let i = self.knots.partition_point(|k| k.t <= t).clamp(1, self.knots.len() - 1);
        let y = hermite(&self.knots[i - 1], &self.knots[i], t);
        PhasePoint::new(y[0], y[1])
    }

    /// `∫₀^T f(t, Φ_t ρ0) dt` by Gauss–Legendre on every integrator step.
    pub fn integrate<T, E>(&self, mut f: impl FnMut(F, PhasePoint<F>) -> Result<T, E>) -> Result<T, E>
    where
        T: Copy + Zero + AddAssign + Mul<F, Output = T>,
    {
        let mut acc = T::zero();
        for w in self.knots.windows(2) {
            let dt = w[1].t - w[0].t;
            let mut panel = T::zero();
            for (s, wt) in self.rule.nodes.iter().zip(&self.rule.weights) {
                let t = w[0].t + *s * dt;
                let y = hermite(&w[0], &w[1], t);
                panel += f(t, PhasePoint::new(y[0], y[1]))? * *wt;
            }
            acc += panel * dt;
        }
        Ok(acc)
    }

    /// `m` equally spaced samples `(t_k, Φ_{t_k} ρ0)`, `t_k = kT/m`.
    pub fn uniform_samples(&self, m: usize) -> Vec<(F, PhasePoint<F>)> {
        let dt = self.period / F::from_usize_lossy(m);
        let mut out = Vec::with_capacity(m);
        let mut i = 1;
        for k in 0..m {
            let t = dt * F::from_usize_lossy(k);
            while i + 1 < self.knots.len() && self.knots[i].t < t {
                i += 1;
            }
            let y = hermite(&self.knots[i - 1], &self.knots[i], t);
            out.push((t, PhasePoint::new(y[0], y[1])));
        }
        out
    }

    /// Trapezoid rule on `m` uniform nodes, spectrally accurate for smooth
    /// periodic integrands.
    pub fn integrate_uniform<T, E>(
        &self,
        m: usize,
        mut f: impl FnMut(F, PhasePoint<F>) -> Result<T, E>,
    ) -> Result<T, E>
    where
        T: Copy + Zero + AddAssign + Mul<F, Output = T>,
    {
        let dt = self.period / F::from_usize_lossy(m);
        let mut acc = T::zero();
        for (t, pt) in self.uniform_samples(m) {
            acc += f(t, pt)?;
        }
        Ok(acc * dt)
    }
}

fn lossy<F: Real>(v: F) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Locate the closed orbit of `flow` on `{p0 = energy}` through the
/// projection of the configured seed.
pub fn find_orbit<F: Real>(flow: &HamiltonFlow<F>, energy: F, cfg: &WellConfig<F>) -> Result<Orbit<F>, ClassicalError> {
    if !cfg.contains(energy) {
        return Err(ClassicalError::OutsideWindow { energy: lossy(energy), lo: lossy(cfg.e_min), hi: lossy(cfg.e_max) });
    }
    let y0 = flow.project([cfg.seed.x, cfg.seed.xi], energy, cfg.critical_tol)?;
    let stepper = Stepper { flow, tol: cfg.rk_tol, dir: F::one(), energy, crit_tol: cfg.critical_tol };
    let v0 = flow.velocity(y0)?;
    let n = {
        let s = v0[0].hypot(v0[1]);
        [v0[0] / s, v0[1] / s]
    };
    let section = |y: [F; 2]| (y[0] - y0[0]) * n[0] + (y[1] - y0[1]) * n[1];
    let mut far = F::zero();
    let mut closed = false;
    let mut knots = stepper.run(y0, cfg.max_period, |ks| {
        let k = ks.len() - 1;
        let y = ks[k].y;
        let d = (y[0] - y0[0]).hypot(y[1] - y0[1]);
        far = far.max(d);
        if k >= 2 && section(ks[k - 1].y) < F::zero() && section(y) >= F::zero() && d < far * F::lit(0.25) {
            closed = true;
            return Ok(Control::Stop);
        }
        Ok(Control::Continue)
    })?;
    if !closed {
        return Err(ClassicalError::NoReturn { energy: lossy(energy), max_period: lossy(cfg.max_period) });
    }

    // refine the crossing on the interpolant
    let k = knots.len() - 1;
    let (a, b) = (knots[k - 1], knots[k]);
    let g = |t: F| section(hermite(&a, &b, t));
    let (mut lo, mut hi) = (a.t, b.t);
    let (mut glo, mut ghi) = (g(lo), g(hi));
    let mut period = hi;
    for _ in 0..200 {
        let mut t = hi - ghi * (hi - lo) / (ghi - glo);
        if !(t > lo && t < hi) {
            t = F::lit(0.5) * (lo + hi);
        }
        let gt = g(t);
        period = t;
        if gt == F::zero() || (hi - lo) <= F::epsilon() * F::lit(4.0) * hi {
            break;
        }
        if gt < F::zero() {
            lo = t;
            glo = gt;
            ghi *= F::lit(0.5);
        } else {
            hi = t;
            ghi = gt;
            glo *= F::lit(0.5);
        }
    }

    // land the final step exactly on T
    knots.truncate(k);
    let last = knots[k - 1];
    if period > last.t {
        let tail = stepper.run(last.y, period - last.t, |_| Ok(Control::Continue))?;
        for mut kn in tail.into_iter().skip(1) {
            kn.t = if kn.t == period - last.t { period } else { kn.t + last.t };
            knots.push(kn);
        }
    } else {
        period = last.t;
    }

    let end = knots[knots.len() - 1].y;
    let scale = F::one() + y0[0].abs().max(y0[1].abs());
    let gap = (end[0] - y0[0]).hypot(end[1] - y0[1]);
    if gap > cfg.closure_tol * scale {
        return Err(ClassicalError::NotClosed { energy: lossy(energy), gap: lossy(gap) });
    }

    let mut turn = F::zero();
    for w in knots.windows(2) {
        let (u, v) = (w[0].dy, w[1].dy);
        turn += (u[0] * v[1] - u[1] * v[0]).atan2(u[0] * v[0] + u[1] * v[1]);
    }
    let turns = turn / F::TAU();
    if (turns.abs() - F::one()).abs() > F::lit(0.25) {
        return Err(ClassicalError::NotSimple { energy: lossy(energy), turns: lossy(turns) });
    }

    let mut level_dev = F::zero();
    for kn in &knots {
        level_dev = level_dev.max((flow.energy(kn.point())? - energy).abs());
    }
    if level_dev > cfg.level_tol * (F::one() + energy.abs()) {
        return Err(ClassicalError::LevelProjection { energy: lossy(energy), residual: lossy(level_dev) });
    }

    Ok(Orbit {
        flow: flow.clone(),
        energy,
        period,
        knots,
        closure_gap: gap,
        level_dev,
        turns,
        rule: GaussLegendre::new(cfg.panel_nodes),
    })
}

/// `S0(E) = ∮ ξ dx`.
pub fn action_s0<F: Real>(orbit: &Orbit<F>) -> Result<F, ClassicalError> {
    let dxi = orbit.flow.jets().partial(0, 1);
    Ok(orbit.integrate(|_, pt| Ok::<_, SymbolError>(pt.xi * dxi.eval(pt)?.re))?)
}

/// `∫₀^T f(Φ_t ρ0) dt`.
pub fn orbit_average<F: Real>(orbit: &Orbit<F>, f: impl Fn(PhasePoint<F>) -> F) -> F {
    orbit.integrate(|_, pt| Ok::<_, ()>(f(pt))).unwrap_or_else(|_| F::nan())
}

/// [`orbit_average`] of a symbol, complex valued.
pub fn orbit_average_expr<F: Real>(orbit: &Orbit<F>, f: &Expr) -> Result<num_complex::Complex<F>, SymbolError> {
    let prog = Program::<F>::compile(f);
    orbit.integrate(|_, pt| prog.eval(pt))
}

/// Step used for energy derivatives when none is given.
pub fn default_delta_e<F: Real>(cfg: &WellConfig<F>) -> F {
    F::lit(1e-4).max(F::lit(1e-3) * cfg.width())
}

/// Central difference of `g` at `energy` with one Richardson step.
pub fn d_de<F: Real, E: From<ClassicalError>>(
    mut g: impl FnMut(F) -> Result<F, E>,
    energy: F,
    delta: F,
    cfg: &WellConfig<F>,
) -> Result<F, E> {
    if !cfg.contains(energy - delta) || !cfg.contains(energy + delta) {
        let bad = if cfg.contains(energy - delta) { energy + delta } else { energy - delta };
        return Err(ClassicalError::OutsideWindow { energy: lossy(bad), lo: lossy(cfg.e_min), hi: lossy(cfg.e_max) }.into());
    }
    let half = delta * F::lit(0.5);
    let wide = (g(energy + delta)? - g(energy - delta)?) / (delta + delta);
    let narrow = (g(energy + half)? - g(energy - half)?) / delta;
    Ok((F::lit(4.0) * narrow - wide) / F::lit(3.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::parse_expr;
    use std::f64::consts::PI;

    fn flow(src: &str) -> HamiltonFlow<f64> {
        HamiltonFlow::new(&parse_expr(src).unwrap()).unwrap()
    }

    fn well(lo: f64, hi: f64) -> WellConfig<f64> {
        WellConfig::new(PhasePoint::new(0.0, 1.0), lo, hi)
    }

    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
    }

    #[test]
    fn harmonic_period_and_action() {
        let fl = flow("xi^2 + x^2");
        let cfg = well(0.1, 3.0);
        for e in [0.5, 1.0, 2.0] {
            let orb = find_orbit(&fl, e, &cfg).unwrap();
            assert!((orb.period() - PI).abs() < 1e-8, "T = {}", orb.period());
            assert!((action_s0(&orb).unwrap() - PI * e).abs() < 1e-8);
            assert!(orb.level_deviation() < 1e-11);
            assert!((orb.turns().abs() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn quartic_period_matches_quadrature() {
        let fl = flow("xi^2 + x^4");
        let orb = find_orbit(&fl, 1.0, &well(0.2, 2.0)).unwrap();
        // x = 1 − u² removes the endpoint singularity of 1/√(1 − x⁴)
        let f = |u: f64| {
            let x = 1.0 - u * u;
            2.0 / ((1.0 + x) * (1.0 + x * x)).sqrt()
        };
        let t = 4.0 * 0.5 * simpson(&f, 0.0, 1.0, 1e-13);
        assert!((orb.period() - t).abs() < 1e-6, "{} vs {}", orb.period(), t);
    }

    #[test]
    fn harmonic_orbit_averages() {
        let fl = flow("xi^2 + x^2");
        let orb = find_orbit(&fl, 1.0, &well(0.1, 3.0)).unwrap();
        assert!(orbit_average(&orb, |p| p.x).abs() < 1e-10);
        assert!((orbit_average(&orb, |p| p.x * p.x) - PI / 2.0).abs() < 1e-9);
        let c = orbit_average_expr(&orb, &parse_expr("x^2 + i*xi^2").unwrap()).unwrap();
        assert!((c.re - PI / 2.0).abs() < 1e-9 && (c.im - PI / 2.0).abs() < 1e-9);
        let u = orb.integrate_uniform(32, |_, p| Ok::<_, ()>(p.x * p.x)).unwrap();
        assert!((u - PI / 2.0).abs() < 1e-10);
    }

    #[test]
    fn action_derivative_is_period() {
        let fl = flow("xi^2 + x^4 + x^2/2");
        let cfg = well(0.1, 3.0);
        let s0 = |e: f64| -> Result<f64, ClassicalError> { action_s0(&find_orbit(&fl, e, &cfg)?) };
        let e = 1.3;
        let d = d_de(s0, e, default_delta_e(&cfg), &cfg).unwrap();
        let t = find_orbit(&fl, e, &cfg).unwrap().period();
        assert!((d - t).abs() < 1e-6 * t, "{d} vs {t}");
    }

    #[test]
    fn orbit_is_periodic_and_interpolates() {
        let fl = flow("xi^2 + x^2");
        let orb = find_orbit(&fl, 1.0, &well(0.1, 3.0)).unwrap();
        for k in 0..17 {
            let t = k as f64 * 0.37;
            // exact solution through (0, 1): x = sin 2t, ξ = cos 2t
            let p = orb.point_at(t);
            assert!((p.x - (2.0 * t).sin()).abs() < 1e-9 && (p.xi - (2.0 * t).cos()).abs() < 1e-9);
        }
        assert!(orb.closure_gap() < 1e-9);
    }

    #[test]
    fn errors_are_reported() {
        let fl = flow("xi^2 + x^2");
        let cfg = well(-0.5, 1.0);
        assert!(matches!(find_orbit(&fl, 2.0, &cfg), Err(ClassicalError::OutsideWindow { .. })));
        assert!(matches!(find_orbit(&fl, 0.0, &cfg), Err(ClassicalError::CriticalPoint { .. })));
        assert!(find_orbit(&fl, -0.4, &cfg).is_err());
        let err = d_de(|e| -> Result<f64, ClassicalError> { Ok(e) }, 0.99, 0.1, &cfg).unwrap_err();
        assert!(matches!(err, ClassicalError::OutsideWindow { .. }));
    }
}
