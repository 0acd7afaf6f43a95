//! Roots of the quantization condition `S_h(E_n) = 2πnh`.

use serde::Serialize;
use thiserror::Error;

use crate::bsaction::{ActionContext, ActionError};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantizeError {
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error("h must be positive and finite, got {0}")]
    InvalidH(f64),
    #[error("search window [{lo}, {hi}] needs a margin of {margin} inside the well window [{well_lo}, {well_hi}]")]
    Window { lo: f64, hi: f64, margin: f64, well_lo: f64, well_hi: f64 },
    #[error("S_h is not monotone on [{lo}, {hi}]")]
    NonMonotone { lo: f64, hi: f64 },
    #[error("root n = {n} did not converge (residual {residual:e} after {iterations} iterations)")]
    NoConvergence { n: i64, residual: f64, iterations: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuasiEigenvalue<F> {
    pub n: i64,
    pub energy: F,
    pub h: F,
    /// `|S_h(E) − 2πnh|`.
    pub bs_residual: F,
    /// Highest power of `h` in `S_h`.
    pub order: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootOptions<F> {
    pub root_tol: F,
    pub max_iter: usize,
}

impl<F: Real> Default for RootOptions<F> {
    fn default() -> Self {
        RootOptions { root_tol: F::lit(1e-10), max_iter: 40 }
    }
}

fn lossy<F: Real>(v: F) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// All quasi-eigenvalues `E_n(h)` with `E_n ∈ [lo, hi]`, sorted by `n`.
///
/// Brackets with `S0 + h S1`, whose slope is the period, then refines on the
/// full series by secant steps.
pub fn bs_roots<F: Real>(
    ctx: &ActionContext<F>,
    h: F,
    window: (F, F),
    opts: &RootOptions<F>,
) -> Result<Vec<QuasiEigenvalue<F>>, QuantizeError> {
    if !(h > F::zero() && h.is_finite()) {
        return Err(QuantizeError::InvalidH(lossy(h)));
    }
    let (lo, hi) = window;
    let cfg = ctx.config();
    let margin = ctx.margin();
    if !(lo <= hi) || lo < cfg.e_min + margin || hi > cfg.e_max - margin {
        return Err(QuantizeError::Window {
            lo: lossy(lo),
            hi: lossy(hi),
            margin: lossy(margin),
            well_lo: lossy(cfg.e_min),
            well_hi: lossy(cfg.e_max),
        });
    }
    let quantum = F::TAU() * h;
    let full = |e: F| -> Result<F, QuantizeError> { Ok(ctx.series(e)?.eval(h)) };
    let (s_lo, s_hi) = (full(lo)?, full(hi)?);
    if s_hi < s_lo {
        return Err(QuantizeError::NonMonotone { lo: lossy(lo), hi: lossy(hi) });
    }
    let n_lo = (s_lo / quantum).ceil().to_i64().unwrap_or(0);
    let n_hi = (s_hi / quantum).floor().to_i64().unwrap_or(-1);

    // S0 + h S1 and its slope T + h S1'
    let slope1 = |e: F| -> Result<F, QuantizeError> {
        let s1p = ctx.s1_slope(e)?;
        Ok(ctx.orbit(e)?.period() + h * s1p)
    };
    let cheap = |e: F| -> Result<F, QuantizeError> {
        let (s0, s1, _) = ctx.leading(&ctx.orbit(e)?)?;
        Ok(s0 + h * s1)
    };

    let mut roots: Vec<QuasiEigenvalue<F>> = Vec::new();
    for n in n_lo..=n_hi {
        let target = quantum * F::from_i64(n).unwrap_or_else(F::zero);
        // bracket on the leading part
        let (mut a, mut b) = (lo, hi);
        if let Some(prev) = roots.last() {
            a = prev.energy;
        }
        let (ga, gb) = (cheap(a)? - target, cheap(b)? - target);
        let mut e = if ga >= F::zero() {
            a
        } else if gb <= F::zero() {
            b
        } else {
            let (mut ga, mut gb) = (ga, gb);
            let mut e = a;
            for _ in 0..200 {
                let mut m = a - ga * (b - a) / (gb - ga);
                if !(m > a && m < b) {
                    m = F::lit(0.5) * (a + b);
                }
                let gm = cheap(m)? - target;
                e = m;
                if gm.abs() <= opts.root_tol || (b - a) < F::epsilon() * F::lit(8.0) * (F::one() + m.abs()) {
                    break;
                }
                if gm < F::zero() {
                    a = m;
                    ga = gm;
                    gb *= F::lit(0.5);
                } else {
                    b = m;
                    gb = gm;
                    ga *= F::lit(0.5);
                }
            }
            e
        };

        // refine on the full series
        let mut slope = slope1(e)?;
        if !(slope > F::zero()) {
            return Err(QuantizeError::NonMonotone { lo: lossy(lo), hi: lossy(hi) });
        }
        let mut r = full(e)? - target;
        let mut prev: Option<(F, F)> = None;
        let mut iterations = 0;
        while r.abs() > opts.root_tol {
            if iterations >= opts.max_iter {
                return Err(QuantizeError::NoConvergence { n, residual: lossy(r.abs()), iterations });
            }
            iterations += 1;
            if let Some((ep, rp)) = prev {
                let s = (r - rp) / (e - ep);
                if s > F::zero() && s.is_finite() {
                    slope = s;
                }
            }
            let next = (e - r / slope).max(lo).min(hi);
            if next == e {
                return Err(QuantizeError::NoConvergence { n, residual: lossy(r.abs()), iterations });
            }
            prev = Some((e, r));
            e = next;
            r = full(e)? - target;
        }
        roots.push(QuasiEigenvalue { n, energy: e, h, bs_residual: r.abs(), order: 2 });
    }
    for w in roots.windows(2) {
        if !(w[1].energy > w[0].energy) {
            return Err(QuantizeError::NonMonotone { lo: lossy(w[0].energy), hi: lossy(w[1].energy) });
        }
    }
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bsaction::ActionOptions;
    use crate::classical::WellConfig;
    use crate::symbol::{PhasePoint, SymbolSeries};

    fn ctx(srcs: &[&str], lo: f64, hi: f64) -> ActionContext<f64> {
        let s = SymbolSeries::parse(srcs).unwrap();
        ActionContext::new(&s, WellConfig::new(PhasePoint::new(0.0, 1.0), lo, hi), ActionOptions::default()).unwrap()
    }

    #[test]
    fn harmonic_roots() {
        let c = ctx(&["xi^2 + x^2"], 0.01, 1.1);
        let roots = bs_roots(&c, 0.1, (0.05, 1.0), &RootOptions::default()).unwrap();
        let ns: Vec<i64> = roots.iter().map(|r| r.n).collect();
        assert_eq!(ns, vec![1, 2, 3, 4, 5]);
        for r in &roots {
            assert!((r.energy - (2 * r.n - 1) as f64 * 0.1).abs() < 1e-10, "{r:?}");
            assert!(r.bs_residual <= 1e-10);
        }
    }

    #[test]
    fn shifted_harmonic_roots() {
        let c = ctx(&["xi^2 + x^2", "i*x"], 0.01, 1.1);
        let roots = bs_roots(&c, 0.1, (0.05, 1.0), &RootOptions::default()).unwrap();
        assert_eq!(roots.len(), 5);
        for r in &roots {
            let want = (2 * r.n - 1) as f64 * 0.1 + 0.0025;
            assert!((r.energy - want).abs() < 1e-8, "{r:?}");
        }
    }

    #[test]
    fn empty_and_invalid_windows() {
        let c = ctx(&["xi^2 + x^2"], 0.01, 1.1);
        assert!(bs_roots(&c, 0.1, (0.02, 0.09), &RootOptions::default()).unwrap().is_empty());
        assert!(matches!(bs_roots(&c, 0.1, (0.0, 0.5), &RootOptions::default()), Err(QuantizeError::Window { .. })));
        assert!(matches!(bs_roots(&c, -0.1, (0.05, 0.5), &RootOptions::default()), Err(QuantizeError::InvalidH(_))));
    }

    #[test]
    fn halving_h_doubles_count() {
        let c = ctx(&["xi^2 + x^4"], 0.05, 2.2);
        let a = bs_roots(&c, 0.1, (0.1, 2.0), &RootOptions::default()).unwrap();
        let b = bs_roots(&c, 0.05, (0.1, 2.0), &RootOptions::default()).unwrap();
        assert!((b.len() as i64 - 2 * a.len() as i64).abs() <= 1, "{} {}", a.len(), b.len());
        for r in &b {
            let s = c.series(r.energy).unwrap().eval(0.05);
            assert!((s - std::f64::consts::TAU * 0.05 * r.n as f64).abs() <= 1e-10);
        }
    }
}
