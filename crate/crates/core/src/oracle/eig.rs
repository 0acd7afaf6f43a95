//! Eigenvalues of complex tridiagonal and dense matrices.

use num_complex::Complex;
use num_traits::Zero;

use super::OracleError;
use crate::scalar::Real;

type C<F> = Complex<F>;

/// Root of `r` with the sign that makes `|g + r|` largest.
fn aligned<F: Real>(r: C<F>, g: C<F>) -> C<F> {
    if (g * r.conj()).re >= F::zero() {
        r
    } else {
        -r
    }
}

/// Implicit QL on a complex symmetric tridiagonal matrix with diagonal `d`
/// and off-diagonal `e` (`e[i]` couples `i` and `i + 1`).
///
/// The rotations are complex orthogonal rather than unitary, so a rotation
/// whose norm vanishes is reported as a breakdown.
pub fn tridiagonal_ql<F: Real>(d: &[C<F>], e: &[C<F>]) -> Result<Vec<C<F>>, OracleError> {
    let n = d.len();
    let mut d = d.to_vec();
    let mut e: Vec<C<F>> = e.iter().copied().chain(std::iter::repeat(C::zero())).take(n).collect();
    if n == 0 {
        return Ok(d);
    }
    e[n - 1] = C::zero();
    let eps = F::epsilon();
    let two = F::lit(2.0);
    let one = C::new(F::one(), F::zero());
    let mut total = 0usize;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].norm() + d[m + 1].norm();
                if e[m].norm() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            total += 1;
            if iter > 60 {
                return Err(OracleError::NoConvergence { iterations: total, index: l });
            }
            let mut g = (d[l + 1] - d[l]) / (e[l] * two);
            let mut r = (g * g + one).sqrt();
            g = d[m] - d[l] + e[l] / (g + aligned(r, g));
            let (mut s, mut c, mut p) = (one, one, C::zero());
            let mut early = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = (f * f + g * g).sqrt();
                e[i + 1] = r;
                if r.norm() <= F::min_positive_value() * F::lit(1e3) {
                    if f.norm() + g.norm() > F::zero() && !(f.is_zero() || g.is_zero()) {
                        return Err(OracleError::Breakdown { index: i });
                    }
                    d[i + 1] -= p;
                    e[m] = C::zero();
                    early = true;
                    break;
                }
                if r.norm() < eps * (f.norm() + g.norm()) {
                    return Err(OracleError::Breakdown { index: i });
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + c * b * two;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = C::zero();
        }
    }
    Ok(d)
}

/// Eigenvalues of a general square matrix (row-major) by Householder
/// reduction to Hessenberg form and shifted QR.
pub fn dense_eigenvalues<F: Real>(a: &[Vec<C<F>>]) -> Result<Vec<C<F>>, OracleError> {
    let n = a.len();
    let mut h: Vec<Vec<C<F>>> = a.to_vec();
    hessenberg(&mut h);
    let eps = F::epsilon();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return Ok(out);
    }
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    loop {
        if hi == 0 {
            out.push(h[0][0]);
            break;
        }
        // find the start of the active unreduced block
        let mut l = hi;
        while l > 0 {
            let s = h[l][l].norm() + h[l - 1][l - 1].norm();
            if h[l][l - 1].norm() <= eps * s {
                h[l][l - 1] = C::zero();
                break;
            }
            l -= 1;
        }
        if l == hi {
            out.push(h[hi][hi]);
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if iter > 60 {
            return Err(OracleError::NoConvergence { iterations: total, index: hi });
        }
        let mu = if iter.is_multiple_of(11) {
            // exceptional shift
            h[hi][hi] + C::new(h[hi][hi - 1].norm() * F::lit(0.75), F::zero())
        } else {
            wilkinson(h[hi - 1][hi - 1], h[hi - 1][hi], h[hi][hi - 1], h[hi][hi])
        };
        for k in l..=hi {
            h[k][k] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (a0, b0) = (h[k][k], h[k + 1][k]);
            let r = (a0.norm_sqr() + b0.norm_sqr()).sqrt();
            let (c, s) = if r == F::zero() { (C::new(F::one(), F::zero()), C::zero()) } else { (a0 / r, b0 / r) };
            for j in k..=hi {
                let (u, v) = (h[k][j], h[k + 1][j]);
                h[k][j] = c.conj() * u + s.conj() * v;
                h[k + 1][j] = -s * u + c * v;
            }
            rots.push((c, s));
        }
        for (idx, k) in (l..hi).enumerate() {
            let (c, s) = rots[idx];
            let top = (k + 2).min(hi);
            for row in h.iter_mut().take(top + 1).skip(l) {
                let (u, v) = (row[k], row[k + 1]);
                row[k] = c * u + s * v;
                row[k + 1] = -s.conj() * u + c.conj() * v;
            }
        }
        for k in l..=hi {
            h[k][k] += mu;
        }
    }
    Ok(out)
}

fn wilkinson<F: Real>(a: C<F>, b: C<F>, c: C<F>, d: C<F>) -> C<F> {
    let half = F::lit(0.5);
    let tr = (a + d) * half;
    let det = a * d - b * c;
    let disc = (tr * tr - det).sqrt();
    let (l1, l2) = (tr + disc, tr - disc);
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn hessenberg<F: Real>(h: &mut [Vec<C<F>>]) {
    let n = h.len();
    for k in 0..n.saturating_sub(2) {
        let alpha2: F = (k + 1..n).map(|i| h[i][k].norm_sqr()).fold(F::zero(), |s, v| s + v);
        let alpha = alpha2.sqrt();
        if alpha == F::zero() {
            continue;
        }
        let x0 = h[k + 1][k];
        let phase = if x0.norm() == F::zero() { C::new(F::one(), F::zero()) } else { x0 / x0.norm() };
        let mut v: Vec<C<F>> = (k + 1..n).map(|i| h[i][k]).collect();
        v[0] += phase * alpha;
        let vn2: F = v.iter().map(|z| z.norm_sqr()).fold(F::zero(), |s, t| s + t);
        if vn2 == F::zero() {
            continue;
        }
        let two = F::lit(2.0);
        // H ← (I − 2vv*/v*v) H
        for j in 0..n {
            let mut dot = C::zero();
            for (idx, i) in (k + 1..n).enumerate() {
                dot += v[idx].conj() * h[i][j];
            }
            let f = dot * (two / vn2);
            for (idx, i) in (k + 1..n).enumerate() {
                h[i][j] -= v[idx] * f;
            }
        }
        // H ← H (I − 2vv*/v*v)
        for row in h.iter_mut() {
            let mut dot = C::zero();
            for (idx, i) in (k + 1..n).enumerate() {
                dot += row[i] * v[idx];
            }
            let f = dot * (two / vn2);
            for (idx, i) in (k + 1..n).enumerate() {
                row[i] -= f * v[idx].conj();
            }
        }
        for row in h.iter_mut().skip(k + 2) {
            row[k] = C::zero();
        }
    }
}
