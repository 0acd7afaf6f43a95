use std::sync::Arc;

use super::coeff::Coeff;
use super::poly::{HPoly, Poly};
use super::MoyalError;

/// Highest `h`-power the star engine expands to.
pub const MAX_STAR_ORDER: usize = 4;

/// Sign of `ih/2` in the Moyal expansion. `Standard` gives `x # ξ = xξ + ih/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Orientation {
    #[default]
    Standard,
    /// Negative control: the opposite sign of `ih/2`.
    Flipped,
}

/// The exponent `β0` shared by every weighted factor, with its gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator<C> {
    beta: Poly<C>,
    dx: Poly<C>,
    dxi: Poly<C>,
}

impl<C: Coeff> Generator<C> {
    pub fn new(beta: Poly<C>) -> Arc<Self> {
        Arc::new(Generator { dx: beta.dx(), dxi: beta.dxi(), beta })
    }

    pub fn beta(&self) -> &Poly<C> {
        &self.beta
    }
}

/// `e^{m β0} · body`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedPoly<C> {
    pub weight: i32,
    pub body: HPoly<C>,
    pub generator: Arc<Generator<C>>,
}

impl<C: Coeff> WeightedPoly<C> {
    pub fn new(weight: i32, body: HPoly<C>, generator: Arc<Generator<C>>) -> Self {
        WeightedPoly { weight, body, generator }
    }

    /// Weight-0 element.
    pub fn plain(body: HPoly<C>, generator: Arc<Generator<C>>) -> Self {
        Self::new(0, body, generator)
    }

    /// `e^{β0}` itself.
    pub fn exp(generator: Arc<Generator<C>>, k: usize) -> Self {
        Self::new(1, HPoly::from_poly(Poly::one(), k), generator)
    }

    pub fn order(&self) -> usize {
        self.body.order()
    }

    fn weighted_d(&self, body: &HPoly<C>, axis: usize) -> HPoly<C> {
        let (d, g) = if axis == 0 { ((1, 0), &self.generator.dx) } else { ((0, 1), &self.generator.dxi) };
        let plain = body.deriv(d.0, d.1);
        if self.weight == 0 || g.is_zero() {
            return plain;
        }
        plain.add(&body.mul_poly(&g.scale(&C::ratio(self.weight as i64, 1))))
    }

    /// `∂x (e^{mβ}P) = e^{mβ}(m ∂xβ P + ∂x P)`.
    pub fn dx(&self) -> Self {
        Self::new(self.weight, self.weighted_d(&self.body, 0), self.generator.clone())
    }

    pub fn dxi(&self) -> Self {
        Self::new(self.weight, self.weighted_d(&self.body, 1), self.generator.clone())
    }

    /// Bodies of `∂x^i ∂ξ^j` for `i + j ≤ k`, indexed `[i][j]`.
    fn jet_table(&self, k: usize) -> Vec<Vec<HPoly<C>>> {
        let mut t: Vec<Vec<HPoly<C>>> = Vec::with_capacity(k + 1);
        for i in 0..=k {
            let mut row = Vec::with_capacity(k + 1 - i);
            for j in 0..=(k - i) {
                let d = if i == 0 && j == 0 {
                    self.body.clone()
                } else if i == 0 {
                    self.weighted_d(&row[j - 1], 1)
                } else {
                    self.weighted_d(&t[i - 1][j], 0)
                };
                row.push(d);
            }
            t.push(row);
        }
        t
    }
}

fn truncate<C: Coeff>(p: &HPoly<C>, k: usize) -> HPoly<C> {
    HPoly::from_coeffs(p.coeffs().iter().take(k + 1).cloned().collect(), k)
}

fn binomial(n: usize, k: usize) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i as i64 + 1))
}

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}

/// Weyl product `a # b` modulo `h^{k+1}`.
pub fn star<C: Coeff>(a: &WeightedPoly<C>, b: &WeightedPoly<C>, k: usize) -> Result<WeightedPoly<C>, MoyalError> {
    star_with(a, b, k, Orientation::Standard)
}

pub fn star_with<C: Coeff>(
    a: &WeightedPoly<C>,
    b: &WeightedPoly<C>,
    k: usize,
    orient: Orientation,
) -> Result<WeightedPoly<C>, MoyalError> {
    if !Arc::ptr_eq(&a.generator, &b.generator) && a.generator != b.generator {
        return Err(MoyalError::GeneratorMismatch);
    }
    if k > MAX_STAR_ORDER {
        return Err(MoyalError::OrderTooHigh { k, max: MAX_STAR_ORDER });
    }
    let k = k.min(a.order()).min(b.order());
    let ta = a.jet_table(k);
    let tb = b.jet_table(k);
    let half_i = C::imag_unit()
        * match orient {
            Orientation::Standard => C::ratio(1, 2),
            Orientation::Flipped => C::ratio(-1, 2),
        };
    let mut out = HPoly::zero(k);
    let mut pow = C::one();
    for n in 0..=k {
        let room = k - n;
        let mut inner = HPoly::zero(room);
        for j in 0..=n {
            let sign = if j % 2 == 0 { 1 } else { -1 };
            let prod = truncate(&ta[n - j][j], room).mul(&truncate(&tb[j][n - j], room));
            inner = inner.add(&prod.scale(&C::ratio(sign * binomial(n, j), 1)));
        }
        let c = pow.clone() * C::ratio(1, factorial(n));
        let lifted = HPoly::from_coeffs(inner.coeffs().to_vec(), k).shift(n);
        out = out.add(&lifted.scale(&c));
        pow = pow * half_i.clone();
    }
    Ok(WeightedPoly::new(a.weight + b.weight, out, a.generator.clone()))
}

/// `c` with `b # c = 1` modulo `h^{k+1}`, for `b = e^{mβ}(1 + O(h))`.
pub fn star_inverse<C: Coeff>(b: &WeightedPoly<C>, k: usize) -> Result<WeightedPoly<C>, MoyalError> {
    star_inverse_with(b, k, Orientation::Standard)
}

pub fn star_inverse_with<C: Coeff>(
    b: &WeightedPoly<C>,
    k: usize,
    orient: Orientation,
) -> Result<WeightedPoly<C>, MoyalError> {
    if b.body.coeff(0) != &Poly::one() {
        return Err(MoyalError::NotNormalized);
    }
    let k = k.min(b.order());
    let mut c = WeightedPoly::new(-b.weight, HPoly::from_poly(Poly::one(), k), b.generator.clone());
    for n in 1..=k {
        let r = star_with(b, &c, n, orient)?;
        let mut body = c.body.clone();
        body.set(n, r.body.coeff(n).neg());
        c.body = body;
    }
    Ok(c)
}

/// `e^{β0} # p # (e^{β0})^{-1}` modulo `h^{k+1}`.
pub fn conjugate<C: Coeff>(beta0: &Poly<C>, p: &HPoly<C>, k: usize) -> Result<HPoly<C>, MoyalError> {
    conjugate_with(beta0, p, k, Orientation::Standard)
}

pub fn conjugate_with<C: Coeff>(
    beta0: &Poly<C>,
    p: &HPoly<C>,
    k: usize,
    orient: Orientation,
) -> Result<HPoly<C>, MoyalError> {
    let k = k.min(p.order());
    let g = Generator::new(beta0.clone());
    let b = WeightedPoly::exp(g.clone(), k);
    let binv = star_inverse_with(&b, k, orient)?;
    let pw = WeightedPoly::plain(truncate(p, k), g);
    let r = star_with(&star_with(&b, &pw, k, orient)?, &binv, k, orient)?;
    debug_assert_eq!(r.weight, 0);
    Ok(r.body)
}

/// `e^{g} # p # e^{g}^{-1}` for a weight-0 normalized `e^{g}` given as a series.
pub fn conjugate_series<C: Coeff>(
    b: &WeightedPoly<C>,
    p: &WeightedPoly<C>,
    k: usize,
    orient: Orientation,
) -> Result<WeightedPoly<C>, MoyalError> {
    let binv = star_inverse_with(b, k, orient)?;
    star_with(&star_with(b, p, k, orient)?, &binv, k, orient)
}
