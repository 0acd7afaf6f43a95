use std::collections::BTreeMap;
use std::fmt;

use super::coeff::Coeff;

/// Bivariate polynomial `Σ c_ab x^a ξ^b`; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<C> {
    terms: BTreeMap<(u32, u32), C>,
}

impl<C: Coeff> Default for Poly<C> {
    fn default() -> Self {
        Poly::zero()
    }
}

impl<C: Coeff> Poly<C> {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn constant(c: C) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn x() -> Self {
        Self::monomial(1, 0, C::one())
    }

    pub fn xi() -> Self {
        Self::monomial(0, 1, C::one())
    }

    pub fn monomial(a: u32, b: u32, c: C) -> Self {
        let mut p = Self::zero();
        p.add_term(a, b, c);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ((u32, u32), C)>) -> Self {
        let mut p = Self::zero();
        for ((a, b), c) in terms {
            p.add_term(a, b, c);
        }
        p
    }

    pub fn add_term(&mut self, a: u32, b: u32, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry((a, b)) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().clone() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &C)> {
        self.terms.iter()
    }

    pub fn get(&self, a: u32, b: u32) -> C {
        self.terms.get(&(a, b)).cloned().unwrap_or_else(C::zero)
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|(a, b)| a + b).max()
    }

    /// Constant term if the polynomial is constant.
    pub fn as_constant(&self) -> Option<C> {
        match self.terms.len() {
            0 => Some(C::zero()),
            1 => self.terms.get(&(0, 0)).cloned(),
            _ => None,
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self::from_terms(self.terms.iter().map(|(k, v)| (*k, v.clone() * c.clone())))
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for ((a, b), c) in &o.terms {
            out.add_term(*a, *b, c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for ((a, b), c) in &o.terms {
            out.add_term(*a, *b, -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Poly { terms: self.terms.iter().map(|(k, v)| (*k, -v.clone())).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for ((a1, b1), c1) in &self.terms {
            for ((a2, b2), c2) in &o.terms {
                out.add_term(a1 + a2, b1 + b2, c1.clone() * c2.clone());
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// `∂x^a ∂ξ^b`.
    pub fn deriv(&self, da: u32, db: u32) -> Self {
        let mut out = Self::zero();
        for ((a, b), c) in &self.terms {
            if *a < da || *b < db {
                continue;
            }
            let mut f: i64 = 1;
            for k in 0..da {
                f *= (a - k) as i64;
            }
            for k in 0..db {
                f *= (b - k) as i64;
            }
            out.add_term(a - da, b - db, c.clone() * C::ratio(f, 1));
        }
        out
    }

    pub fn dx(&self) -> Self {
        self.deriv(1, 0)
    }

    pub fn dxi(&self) -> Self {
        self.deriv(0, 1)
    }

    /// `{f, g} = ∂ξf ∂xg − ∂xf ∂ξg`.
    pub fn bracket(&self, g: &Self) -> Self {
        self.dxi().mul(&g.dx()).sub(&self.dx().mul(&g.dxi()))
    }

    /// Substitute `(x, ξ) ↦ (x + u, ξ + v)` with polynomial shifts.
    pub fn compose_shift(&self, u: &Self, v: &Self) -> Self {
        let xs = Self::x().add(u);
        let xis = Self::xi().add(v);
        let mut out = Self::zero();
        for ((a, b), c) in &self.terms {
            out = out.add(&xs.pow(*a).mul(&xis.pow(*b)).scale(c));
        }
        out
    }
}

impl<C: Coeff> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((a, b), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", c.render())?;
            if *a > 0 {
                write!(f, "*x^{a}")?;
            }
            if *b > 0 {
                write!(f, "*xi^{b}")?;
            }
        }
        Ok(())
    }
}

/// Polynomial in `h` with [`Poly`] coefficients, truncated after `h^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct HPoly<C> {
    coeffs: Vec<Poly<C>>,
}

impl<C: Coeff> HPoly<C> {
    pub fn zero(k: usize) -> Self {
        HPoly { coeffs: vec![Poly::zero(); k + 1] }
    }

    pub fn from_poly(p: Poly<C>, k: usize) -> Self {
        let mut out = Self::zero(k);
        out.coeffs[0] = p;
        out
    }

    pub fn from_coeffs(mut coeffs: Vec<Poly<C>>, k: usize) -> Self {
        coeffs.resize(k + 1, Poly::zero());
        HPoly { coeffs }
    }

    /// Truncation order `K`: arithmetic is modulo `h^{K+1}`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of `h^j`; `j` must not exceed the truncation order.
    pub fn coeff(&self, j: usize) -> &Poly<C> {
        &self.coeffs[j]
    }

    pub fn coeffs(&self) -> &[Poly<C>] {
        &self.coeffs
    }

    pub fn set(&mut self, j: usize, p: Poly<C>) {
        if j < self.coeffs.len() {
            self.coeffs[j] = p;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Poly::is_zero)
    }

    pub fn map(&self, f: impl Fn(&Poly<C>) -> Poly<C>) -> Self {
        HPoly { coeffs: self.coeffs.iter().map(f).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        let k = self.order().min(o.order());
        HPoly { coeffs: (0..=k).map(|j| self.coeffs[j].add(&o.coeffs[j])).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let k = self.order().min(o.order());
        HPoly { coeffs: (0..=k).map(|j| self.coeffs[j].sub(&o.coeffs[j])).collect() }
    }

    pub fn scale(&self, c: &C) -> Self {
        self.map(|p| p.scale(c))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let k = self.order().min(o.order());
        let mut out = Self::zero(k);
        for i in 0..=k {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=(k - i) {
                if o.coeffs[j].is_zero() {
                    continue;
                }
                out.coeffs[i + j] = out.coeffs[i + j].add(&self.coeffs[i].mul(&o.coeffs[j]));
            }
        }
        out
    }

    pub fn mul_poly(&self, p: &Poly<C>) -> Self {
        self.map(|c| c.mul(p))
    }

    /// Multiply by `h^j`, dropping what falls past the truncation order.
    pub fn shift(&self, j: usize) -> Self {
        let k = self.order();
        let mut out = Self::zero(k);
        for i in 0..=k {
            if i + j <= k {
                out.coeffs[i + j] = self.coeffs[i].clone();
            }
        }
        out
    }

    pub fn deriv(&self, a: u32, b: u32) -> Self {
        self.map(|p| p.deriv(a, b))
    }

    pub fn bracket(&self, o: &Self) -> Self {
        self.deriv(0, 1).mul(&o.deriv(1, 0)).sub(&self.deriv(1, 0).mul(&o.deriv(0, 1)))
    }

    /// Monomials with nonzero coefficient as `(h-power, a, b, coefficient)`.
    pub fn support(&self) -> Vec<(usize, u32, u32, C)> {
        let mut out = Vec::new();
        for (j, p) in self.coeffs.iter().enumerate() {
            for ((a, b), c) in p.terms() {
                out.push((j, *a, *b, c.clone()));
            }
        }
        out
    }
}

impl<C: Coeff> fmt::Display for HPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, p) in self.coeffs.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "h^{j}*({p})")?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
