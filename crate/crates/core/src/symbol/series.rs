use serde::Serialize;

use super::{parse_expr, Expr, PhasePoint, SymbolError};
use crate::scalar::Real;

/// Weyl symbol `p0 + h p1 + h² p2 + …` as a list of phase-space expressions.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolSeries {
    coeffs: Vec<Expr>,
}

impl SymbolSeries {
    pub fn new(coeffs: Vec<Expr>) -> Result<Self, SymbolError> {
        if coeffs.is_empty() {
            return Err(SymbolError::EmptySeries);
        }
        Ok(SymbolSeries { coeffs })
    }

    /// Parse `[p0, p1, …]`.
    pub fn parse(srcs: &[&str]) -> Result<Self, SymbolError> {
        Self::new(srcs.iter().map(|s| parse_expr(s)).collect::<Result<_, _>>()?)
    }

    /// Highest h-power supplied.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    /// `p_j`, or zero past the supplied order.
    pub fn coeff(&self, j: usize) -> Expr {
        self.coeffs.get(j).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn principal(&self) -> &Expr {
        &self.coeffs[0]
    }

    /// Checks that `p0` is real at every sample.
    pub fn check_real_principal<F: Real>(&self, samples: &[PhasePoint<F>], tol: F) -> Result<(), SymbolError> {
        for &pt in samples {
            let v = self.coeffs[0].eval(pt)?;
            if v.im.abs() > tol {
                return Err(SymbolError::ComplexPrincipal {
                    x: pt.x.to_f64().unwrap_or(f64::NAN),
                    xi: pt.xi.to_f64().unwrap_or(f64::NAN),
                    imag: v.im.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(())
    }
}

/// Worst PT violation found for one coefficient `p_j`.
#[derive(Clone, Debug, Serialize)]
pub struct CoeffViolation {
    pub index: usize,
    pub worst: f64,
    pub witness: Option<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PtReport {
    pub tol: f64,
    pub coefficients: Vec<CoeffViolation>,
}

impl PtReport {
    pub fn passed(&self) -> bool {
        self.coefficients.iter().all(|c| c.worst <= self.tol)
    }

    /// First failing coefficient and its witness point.
    pub fn first_failure(&self) -> Option<&CoeffViolation> {
        self.coefficients.iter().find(|c| c.worst > self.tol)
    }
}

/// Checks `p_j(−x, ξ) = conj p_j(x, ξ)` for every coefficient at every sample.
///
/// A sample where a coefficient cannot be evaluated counts as an infinite
/// violation.
pub fn check_pt_symmetry<F: Real>(s: &SymbolSeries, samples: &[PhasePoint<F>], tol: F) -> PtReport {
    let coefficients = s
        .coeffs
        .iter()
        .enumerate()
        .map(|(index, e)| {
            let mut worst = 0.0f64;
            let mut witness = None;
            for &pt in samples {
                let mirrored = PhasePoint::new(-pt.x, pt.xi);
                let gap = match (e.eval(mirrored), e.eval(pt)) {
                    (Ok(a), Ok(b)) => (a - b.conj()).norm().to_f64().unwrap_or(f64::INFINITY),
                    _ => f64::INFINITY,
                };
                if gap > worst || witness.is_none() && gap.is_nan() {
                    worst = gap;
                    witness = Some((pt.x.to_f64().unwrap_or(f64::NAN), pt.xi.to_f64().unwrap_or(f64::NAN)));
                }
            }
            CoeffViolation { index, worst, witness }
        })
        .collect();
    PtReport { tol: tol.to_f64().unwrap_or(0.0), coefficients }
}

/// Deterministic sample grid on `[-r, r]²`, avoiding the `x = 0` axis where
/// PT symmetry is vacuous.
pub fn symmetric_samples<F: Real>(r: F, per_axis: usize) -> Vec<PhasePoint<F>> {
    let n = per_axis.max(2);
    let step = (r + r) / F::from_usize_lossy(n);
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let x = -r + step * (F::from_usize_lossy(i) + F::lit(0.5));
            let xi = -r + step * (F::from_usize_lossy(j) + F::lit(0.37));
            out.push(PhasePoint::new(x, xi));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples() -> Vec<PhasePoint<f64>> {
        symmetric_samples(2.0, 9)
    }

    #[test]
    fn pt_symmetric_series_passes() {
        let s = SymbolSeries::parse(&["xi^2 + x^2", "i*x"]).unwrap();
        let r = check_pt_symmetry(&s, &samples(), 1e-12);
        assert!(r.passed());
    }

    #[test]
    fn real_odd_subprincipal_fails_with_witness() {
        let s = SymbolSeries::parse(&["xi^2 + x^2", "x"]).unwrap();
        let r = check_pt_symmetry(&s, &samples(), 1e-12);
        assert!(!r.passed());
        let bad = r.first_failure().unwrap();
        assert_eq!(bad.index, 1);
        let (x, _) = bad.witness.unwrap();
        assert!(x != 0.0);
        assert!((bad.worst - 2.0 * x.abs()).abs() < 1e-12);
    }

    #[test]
    fn zero_subprincipal_has_zero_violation() {
        let s = SymbolSeries::parse(&["xi^2 + x^2", "0"]).unwrap();
        let r = check_pt_symmetry(&s, &samples(), 1e-12);
        assert!(r.passed());
        assert_eq!(r.coefficients[1].worst, 0.0);
    }

    #[test]
    fn empty_series_rejected() {
        assert!(matches!(SymbolSeries::new(vec![]), Err(SymbolError::EmptySeries)));
    }

    #[test]
    fn complex_principal_detected() {
        let s = SymbolSeries::parse(&["xi^2 + i*x"]).unwrap();
        assert!(s.check_real_principal(&samples(), 1e-12).is_err());
        let s = SymbolSeries::parse(&["xi^2 + x^4"]).unwrap();
        assert!(s.check_real_principal(&samples(), 1e-12).is_ok());
    }
}
