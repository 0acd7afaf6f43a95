use num_complex::Complex;

use super::{Expr, PhasePoint, Program, SymbolError};
use crate::scalar::Real;

/// Highest derivative order carried by a [`Jet`].
pub const MAX_JET_ORDER: usize = 3;

/// Value and mixed partials `∂x^a ∂ξ^b` (`a + b ≤ order`) at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<T> {
    order: usize,
    d: [[T; MAX_JET_ORDER + 1]; MAX_JET_ORDER + 1],
}

impl<T: Copy + num_traits::Zero> Jet<T> {
    pub fn zero(order: usize) -> Self {
        Jet { order, d: [[T::zero(); MAX_JET_ORDER + 1]; MAX_JET_ORDER + 1] }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `∂x^a ∂ξ^b`; zero outside the computed order.
    pub fn get(&self, a: usize, b: usize) -> T {
        if a + b > self.order {
            T::zero()
        } else {
            self.d[a][b]
        }
    }

    pub fn value(&self) -> T {
        self.d[0][0]
    }

    pub fn dx(&self) -> T {
        self.get(1, 0)
    }

    pub fn dxi(&self) -> T {
        self.get(0, 1)
    }

    pub fn map<U: Copy + num_traits::Zero>(&self, f: impl Fn(T) -> U) -> Jet<U> {
        let mut out = Jet::zero(self.order);
        for a in 0..=self.order {
            for b in 0..=(self.order - a) {
                out.d[a][b] = f(self.d[a][b]);
            }
        }
        out
    }
}

impl<F: Real> Jet<Complex<F>> {
    pub fn re(&self) -> Jet<F> {
        self.map(|c| c.re)
    }

    pub fn im(&self) -> Jet<F> {
        self.map(|c| c.im)
    }
}

/// Derivative programs of one expression, built once by symbolic
/// differentiation and evaluated many times.
#[derive(Clone, Debug)]
pub struct JetExpr<F> {
    order: usize,
    progs: Vec<Vec<Program<F>>>,
}

impl<F: Real> JetExpr<F> {
    pub fn new(e: &Expr, order: usize) -> Result<Self, SymbolError> {
        if order > MAX_JET_ORDER {
            return Err(SymbolError::InvalidOrder(order));
        }
        let mut progs = Vec::with_capacity(order + 1);
        let mut dx = e.clone();
        for a in 0..=order {
            let mut row = Vec::with_capacity(order + 1 - a);
            let mut cur = dx.clone();
            for b in 0..=(order - a) {
                row.push(Program::compile(&cur));
                if b < order - a {
                    cur = cur.diff(super::Var::Xi);
                }
            }
            progs.push(row);
            if a < order {
                dx = dx.diff(super::Var::X);
            }
        }
        Ok(JetExpr { order, progs })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Program for `∂x^a ∂ξ^b`.
    pub fn partial(&self, a: usize, b: usize) -> &Program<F> {
        &self.progs[a][b]
    }

    /// True when the expression itself folded to zero.
    pub fn is_zero(&self) -> bool {
        self.progs[0][0].is_zero()
    }

    pub fn eval(&self, pt: PhasePoint<F>, order: usize) -> Result<Jet<Complex<F>>, SymbolError> {
        if order > self.order {
            return Err(SymbolError::InvalidOrder(order));
        }
        let mut jet = Jet::zero(order);
        for a in 0..=order {
            for b in 0..=(order - a) {
                jet.d[a][b] = self.progs[a][b].eval(pt)?;
            }
        }
        Ok(jet)
    }

    pub fn value(&self, pt: PhasePoint<F>) -> Result<Complex<F>, SymbolError> {
        self.progs[0][0].eval(pt)
    }
}

/// Value and partials of `e` at `pt` up to total order `order ≤ 3`.
pub fn eval_jet<F: Real>(e: &Expr, pt: PhasePoint<F>, order: usize) -> Result<Jet<Complex<F>>, SymbolError> {
    JetExpr::new(e, order)?.eval(pt, order)
}
