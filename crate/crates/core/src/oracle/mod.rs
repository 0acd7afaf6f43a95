//! Finite-difference spectra of the quantized operator and their comparison
//! with quasi-eigenvalues.

mod eig;

pub use eig::{dense_eigenvalues, tridiagonal_ql};

use num_complex::Complex;
use thiserror::Error;

use crate::quantize::QuasiEigenvalue;
use crate::scalar::Real;
use crate::symbol::{Expr, PhasePoint, Program, SymbolError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("eigensolver did not converge (index {index}, {iterations} iterations)")]
    NoConvergence { iterations: usize, index: usize },
    #[error("complex orthogonal rotation broke down at index {index}")]
    Breakdown { index: usize },
    #[error("grid needs at least {min} points, got {n}")]
    TooFewPoints { n: usize, min: usize },
    #[error("half-width must be positive, got {0}")]
    BadHalfWidth(f64),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
}

/// Smallest accepted grid.
pub const MIN_POINTS: usize = 64;

/// Matrices up to this size fall back to the dense solver.
pub const DENSE_LIMIT: usize = 800;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorForm {
    /// `(hD)² + V(x)`, real symmetric.
    SelfAdjoint,
    /// `(hD)² + V(x) + ih W(x)`, complex symmetric.
    Schrodinger,
    /// `(hD)² + p(x) hD + q(x)`, nonsymmetric.
    QForm,
}

/// Tridiagonal discretization on `n` points `x_i = −L + i dx`,
/// `dx = 2L/(n − 1)`, with zero Dirichlet data just outside.
#[derive(Clone, Debug)]
pub struct GridOperator<F> {
    pub half_width: F,
    pub n: usize,
    pub h: F,
    pub dx: F,
    pub form: OperatorForm,
    pub diag: Vec<Complex<F>>,
    /// `sup[i]` sits at `(i, i + 1)`.
    pub sup: Vec<Complex<F>>,
    /// `sub[i]` sits at `(i + 1, i)`.
    pub sub: Vec<Complex<F>>,
    pub warnings: Vec<String>,
}

fn grid<F: Real>(l: F, n: usize) -> Result<(F, Vec<F>), OracleError> {
    if n < MIN_POINTS {
        return Err(OracleError::TooFewPoints { n, min: MIN_POINTS });
    }
    if !(l > F::zero() && l.is_finite()) {
        return Err(OracleError::BadHalfWidth(l.to_f64().unwrap_or(f64::NAN)));
    }
    let dx = (l + l) / F::from_usize_lossy(n - 1);
    Ok((dx, (0..n).map(|i| -l + dx * F::from_usize_lossy(i)).collect()))
}

fn sample<F: Real>(e: &Expr, xs: &[F]) -> Result<Vec<Complex<F>>, OracleError> {
    let p = Program::<F>::compile(e);
    xs.iter().map(|&x| Ok(p.eval(PhasePoint::new(x, F::zero()))?)).collect()
}

fn parity_warning<F: Real>(name: &str, e: &Expr, xs: &[F]) -> Result<Option<String>, OracleError> {
    let p = Program::<F>::compile(e);
    let mut worst = F::zero();
    for &x in xs.iter().step_by((xs.len() / 16).max(1)) {
        let a = p.eval(PhasePoint::new(x, F::zero()))?;
        let b = p.eval(PhasePoint::new(-x, F::zero()))?;
        worst = worst.max((a - b).norm() / (F::one() + a.norm()));
    }
    Ok((worst > F::lit(1e-10)).then(|| format!("{name}(x) is not even (relative defect {worst:e})")))
}

/// `(hD)² + p(x) hD + q(x)` with central differences. `p ≡ 0` gives the
/// real symmetric form.
pub fn build_matrix<F: Real>(p: &Expr, q: &Expr, h: F, l: F, n: usize) -> Result<GridOperator<F>, OracleError> {
    let (dx, xs) = grid(l, n)?;
    let mut warnings = Vec::new();
    warnings.extend(parity_warning("p", p, &xs)?);
    warnings.extend(parity_warning("q", q, &xs)?);
    let pv = sample(p, &xs)?;
    let qv = sample(q, &xs)?;
    let a = h * h / (dx * dx);
    let lap = Complex::new(-a, F::zero());
    let first = Complex::new(F::zero(), h / (dx + dx));
    let diag: Vec<_> = qv.iter().map(|v| v + a + a).collect();
    let p_zero = pv.iter().all(|v| v.norm() == F::zero());
    // p hD u = −ih p (u_{i+1} − u_{i−1}) / (2dx)
    let sup: Vec<_> = (0..n - 1).map(|i| lap - first * pv[i]).collect();
    let sub: Vec<_> = (0..n - 1).map(|i| lap + first * pv[i + 1]).collect();
    let form = if p_zero && qv.iter().all(|v| v.im == F::zero()) { OperatorForm::SelfAdjoint } else { OperatorForm::QForm };
    Ok(GridOperator { half_width: l, n, h, dx, form, diag, sup, sub, warnings })
}

/// `(hD)² + V(x) + ih W(x)`.
pub fn build_schrodinger<F: Real>(v: &Expr, w: &Expr, h: F, l: F, n: usize) -> Result<GridOperator<F>, OracleError> {
    let (dx, xs) = grid(l, n)?;
    let vv = sample(v, &xs)?;
    let wv = sample(w, &xs)?;
    let a = h * h / (dx * dx);
    let i = Complex::new(F::zero(), F::one());
    let diag: Vec<_> = vv.iter().zip(&wv).map(|(v, w)| v + a + a + i * w * h).collect();
    let off = vec![Complex::new(-a, F::zero()); n - 1];
    let form = if diag.iter().all(|d| d.im == F::zero()) { OperatorForm::SelfAdjoint } else { OperatorForm::Schrodinger };
    Ok(GridOperator { half_width: l, n, h, dx, form, diag, sup: off.clone(), sub: off, warnings: Vec::new() })
}

/// Double `start` until `Re V(±L) ≥ e_max + 5`, at most `limit`.
pub fn choose_half_width<F: Real>(v: &Expr, e_max: F, start: F, limit: F) -> Result<F, OracleError> {
    let p = Program::<F>::compile(v);
    let mut l = start;
    while l < limit {
        let lo = p.eval(PhasePoint::new(-l, F::zero()))?.re;
        let hi = p.eval(PhasePoint::new(l, F::zero()))?.re;
        if lo.min(hi) >= e_max + F::lit(5.0) {
            break;
        }
        l = l + l;
    }
    Ok(l.min(limit))
}

impl<F: Real> GridOperator<F> {
    pub fn to_dense(&self) -> Vec<Vec<Complex<F>>> {
        let mut a = vec![vec![Complex::new(F::zero(), F::zero()); self.n]; self.n];
        for i in 0..self.n {
            a[i][i] = self.diag[i];
            if i + 1 < self.n {
                a[i][i + 1] = self.sup[i];
                a[i + 1][i] = self.sub[i];
            }
        }
        a
    }

    /// Off-diagonal of the symmetric matrix similar to this one.
    fn symmetric_offdiag(&self) -> Vec<Complex<F>> {
        self.sup
            .iter()
            .zip(&self.sub)
            .map(|(u, l)| if u == l { *u } else { (u * l).sqrt() })
            .collect()
    }

    /// Every eigenvalue, unsorted.
    pub fn spectrum(&self) -> Result<Vec<Complex<F>>, OracleError> {
        match tridiagonal_ql(&self.diag, &self.symmetric_offdiag()) {
            Ok(v) => Ok(v),
            Err(e) if self.n <= DENSE_LIMIT => dense_eigenvalues(&self.to_dense()).map_err(|_| e),
            Err(e) => Err(e),
        }
    }
}

/// Eigenvalues with real part in `[lo, hi]`, sorted by real part.
pub fn eigenvalues<F: Real>(g: &GridOperator<F>, window: (F, F)) -> Result<Vec<Complex<F>>, OracleError> {
    let (lo, hi) = window;
    if !(lo <= hi) {
        return Ok(Vec::new());
    }
    let mut v: Vec<_> = g.spectrum()?.into_iter().filter(|z| z.re >= lo && z.re <= hi).collect();
    v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap_or(std::cmp::Ordering::Equal));
    Ok(v)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatchPair<F> {
    pub n: i64,
    pub e_bs: F,
    pub e_oracle: Complex<F>,
    pub gap: F,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralMatch<F> {
    pub pairs: Vec<MatchPair<F>>,
    pub max_gap: F,
    /// Largest `|Im|` among matched oracle eigenvalues.
    pub max_imag: F,
    /// Oracle position minus quasi-eigenvalue position.
    pub offset: i64,
    pub unmatched_bs: usize,
    pub unmatched_oracle: usize,
    pub tol: F,
}

impl<F: Real> SpectralMatch<F> {
    pub fn within_tol(&self) -> bool {
        self.max_gap <= self.tol
    }

    pub fn csv_header() -> &'static str {
        "n,E_bs,Re_E_oracle,Im_E_oracle,gap"
    }

    /// Rows with 15 significant digits.
    pub fn csv_rows(&self) -> Vec<String> {
        self.pairs
            .iter()
            .map(|p| {
                format!(
                    "{},{},{},{},{}",
                    p.n,
                    fmt15(p.e_bs),
                    fmt15(p.e_oracle.re),
                    fmt15(p.e_oracle.im),
                    fmt15(p.gap)
                )
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::csv_header());
        s.push('\n');
        for r in self.csv_rows() {
            s.push_str(&r);
            s.push('\n');
        }
        s
    }
}

/// Scientific notation with 15 significant digits.
pub fn fmt15<F: Real>(v: F) -> String {
    format!("{:.14e}", v.to_f64().unwrap_or(f64::NAN))
}

/// Pair quasi-eigenvalues with oracle eigenvalues by sorted position, trying
/// index offsets in `−2..=2` and keeping the one with the smallest mean gap.
pub fn compare_spectra<F: Real>(bs: &[QuasiEigenvalue<F>], eig: &[Complex<F>], tol: F) -> SpectralMatch<F> {
    let mut best: Option<(F, i64)> = None;
    for off in -2i64..=2 {
        let mut sum = F::zero();
        let mut count = 0usize;
        for (i, q) in bs.iter().enumerate() {
            let j = i as i64 + off;
            if j >= 0 && (j as usize) < eig.len() {
                sum += (eig[j as usize].re - q.energy).abs();
                count += 1;
            }
        }
        if count == 0 {
            continue;
        }
        let mean = sum / F::from_usize_lossy(count);
        // prefer more pairs when the mean is tied
        if best.is_none_or(|(m, _)| mean < m) {
            best = Some((mean, off));
        }
    }
    let offset = best.map_or(0, |b| b.1);
    let mut pairs = Vec::new();
    for (i, q) in bs.iter().enumerate() {
        let j = i as i64 + offset;
        if j >= 0 && (j as usize) < eig.len() {
            let z = eig[j as usize];
            pairs.push(MatchPair { n: q.n, e_bs: q.energy, e_oracle: z, gap: (z.re - q.energy).abs() });
        }
    }
    let max_gap = pairs.iter().map(|p| p.gap).fold(F::zero(), F::max);
    let max_imag = pairs.iter().map(|p| p.e_oracle.im.abs()).fold(F::zero(), F::max);
    SpectralMatch {
        unmatched_bs: bs.len() - pairs.len(),
        unmatched_oracle: eig.len() - pairs.len(),
        pairs,
        max_gap,
        max_imag,
        offset,
        tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::parse_expr;

    fn e(s: &str) -> Expr {
        parse_expr(s).unwrap()
    }

    fn qe(n: i64, energy: f64) -> QuasiEigenvalue<f64> {
        QuasiEigenvalue { n, energy, h: 0.1, bs_residual: 0.0, order: 2 }
    }

    #[test]
    fn harmonic_ground_state() {
        let g = build_matrix::<f64>(&e("0"), &e("x^2"), 0.1, 6.0, 2000).unwrap();
        assert_eq!(g.form, OperatorForm::SelfAdjoint);
        let ev = eigenvalues(&g, (0.0, 1.0)).unwrap();
        assert!((ev[0].re - 0.1).abs() < 2e-4);
        for (k, z) in ev.iter().enumerate() {
            assert!((z.re - (2 * k + 1) as f64 * 0.1).abs() < 1e-3 && z.im.abs() < 1e-12);
        }
    }

    #[test]
    fn particle_in_a_box() {
        let (h, l, n) = (0.1, 1.0, 400);
        let g = build_matrix::<f64>(&e("0"), &e("0"), h, l, n).unwrap();
        let ev = eigenvalues(&g, (0.0, 0.5)).unwrap();
        let width = 2.0 * (l + g.dx);
        for (k, z) in ev.iter().enumerate() {
            let kk = (k + 1) as f64;
            let want = h * h * kk * kk * std::f64::consts::PI.powi(2) / (width * width);
            assert!((z.re - want).abs() < 1e-4 * kk * kk, "{} {}", z.re, want);
        }
    }

    #[test]
    fn second_order_grid_convergence() {
        let low = |n: usize| {
            let g = build_matrix::<f64>(&e("0"), &e("x^2 + x^4/4"), 0.2, 5.0, n).unwrap();
            eigenvalues(&g, (0.0, 0.8)).unwrap()
        };
        let (a, b, c) = (low(300), low(600), low(1200));
        for k in 0..2 {
            let r = (a[k].re - b[k].re) / (b[k].re - c[k].re);
            assert!(r > 3.5 && r < 4.5, "ratio {r}");
        }
    }

    #[test]
    fn shifted_harmonic_is_real_and_shifted() {
        let g = build_schrodinger::<f64>(&e("x^2"), &e("x"), 0.1, 8.0, 2000).unwrap();
        assert_eq!(g.form, OperatorForm::Schrodinger);
        let ev = eigenvalues(&g, (0.0, 1.0)).unwrap();
        assert_eq!(ev.len(), 5);
        for (k, z) in ev.iter().enumerate() {
            let want = (2 * k + 1) as f64 * 0.1 + 0.0025;
            assert!((z.re - want).abs() < 3e-4 && z.im.abs() < 1e-6, "{z} vs {want}");
        }
    }

    #[test]
    fn q_form_matches_its_gauge_partner() {
        let (h, l, n) = (0.1, 6.0, 1500);
        let q = build_matrix::<f64>(&e("0.2*cos(x)"), &e("x^2"), h, l, n).unwrap();
        assert_eq!(q.form, OperatorForm::QForm);
        assert!(q.warnings.is_empty());
        let p = build_schrodinger::<f64>(&e("x^2 - 0.01*cos(x)^2"), &e("-0.1*sin(x)"), h, l, n).unwrap();
        let a = eigenvalues(&q, (0.0, 1.0)).unwrap();
        let b = eigenvalues(&p, (0.0, 1.0)).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 2e-4, "{x} {y}");
        }
        // the spectrum is closed under conjugation
        for z in &a {
            assert!(a.iter().any(|w| (w - z.conj()).norm() < 1e-8));
        }
        let odd = build_matrix::<f64>(&e("x"), &e("x^2"), h, l, 200).unwrap();
        assert_eq!(odd.warnings.len(), 1);
    }

    #[test]
    fn small_q_form_uses_dense_path_consistently() {
        let g = build_matrix::<f64>(&e("0.3"), &e("x^2"), 0.2, 5.0, 120).unwrap();
        let mut dense = dense_eigenvalues(&g.to_dense()).unwrap();
        let mut tri = g.spectrum().unwrap();
        let key = |a: &Complex<f64>, b: &Complex<f64>| a.re.partial_cmp(&b.re).unwrap();
        dense.sort_by(key);
        tri.sort_by(key);
        for (a, b) in dense.iter().zip(&tri).take(10) {
            assert!((a - b).norm() < 1e-8, "{a} {b}");
        }
    }

    #[test]
    fn empty_window_and_bad_grids() {
        let g = build_matrix::<f64>(&e("0"), &e("x^2"), 0.1, 6.0, 100).unwrap();
        assert!(eigenvalues(&g, (-5.0, -1.0)).unwrap().is_empty());
        assert!(eigenvalues(&g, (1.0, 0.0)).unwrap().is_empty());
        assert!(matches!(build_matrix::<f64>(&e("0"), &e("x^2"), 0.1, 6.0, 10), Err(OracleError::TooFewPoints { .. })));
        assert!(matches!(build_matrix::<f64>(&e("0"), &e("x^2"), 0.1, -1.0, 100), Err(OracleError::BadHalfWidth(_))));
    }

    #[test]
    fn half_width_doubles_until_walls_are_high() {
        let l = choose_half_width::<f64>(&e("x^2"), 1.0, 1.0, 64.0).unwrap();
        assert_eq!(l, 4.0);
    }

    #[test]
    fn pairing_and_csv() {
        let bs: Vec<_> = (1..=4).map(|n| qe(n, (2 * n - 1) as f64 * 0.1)).collect();
        let same: Vec<_> = bs.iter().map(|q| Complex::new(q.energy, 0.0)).collect();
        let m = compare_spectra(&bs, &same, 1e-12);
        assert_eq!(m.max_gap, 0.0);
        assert!(m.within_tol());
        // an extra low eigenvalue forces offset +1
        let mut shifted = vec![Complex::new(-0.3, 0.0)];
        shifted.extend(same.iter().map(|z| z + 1e-5));
        let m = compare_spectra(&bs, &shifted, 2e-4);
        assert_eq!(m.offset, 1);
        assert_eq!(m.pairs.len(), 4);
        assert!(m.max_gap < 2e-5 && m.unmatched_oracle == 1);
        let csv = m.to_csv();
        assert!(csv.starts_with("n,E_bs,Re_E_oracle,Im_E_oracle,gap\n1,1.00000000000000e-1,"));
        assert_eq!(csv, compare_spectra(&bs, &shifted, 2e-4).to_csv());
    }
}
