use std::fmt;

use num_complex::Complex;

use super::{PhasePoint, SymbolError};
use crate::scalar::{cast_complex, Real};

/// Phase-space coordinate an expression can be differentiated against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Xi,
}

/// Expression tree over `x`, `xi` with complex constants.
///
/// The smart constructors fold constants and drop additive zeros and
/// multiplicative ones, which keeps derivative trees small. Nothing else is
/// simplified.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    X,
    Xi,
    Const(Complex<f64>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
}

impl Expr {
    pub fn zero() -> Self {
        Expr::Const(Complex::new(0.0, 0.0))
    }

    pub fn one() -> Self {
        Expr::real(1.0)
    }

    pub fn real(v: f64) -> Self {
        Expr::Const(Complex::new(v, 0.0))
    }

    pub fn imag_unit() -> Self {
        Expr::Const(Complex::new(0.0, 1.0))
    }

    pub fn as_const(&self) -> Option<Complex<f64>> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.re == 0.0 && c.im == 0.0)
    }

    fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if c.re == 1.0 && c.im == 0.0)
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(p), Some(q)) => Expr::Const(p + q),
            _ if a.is_zero() => b,
            _ if b.is_zero() => a,
            _ => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(p), Some(q)) => Expr::Const(p - q),
            _ if b.is_zero() => a,
            _ if a.is_zero() => Expr::neg(b),
            _ => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(p), Some(q)) => Expr::Const(p * q),
            _ if a.is_zero() || b.is_zero() => Expr::zero(),
            _ if a.is_one() => b,
            _ if b.is_one() => a,
            _ => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(p), Some(q)) if q.norm_sqr() != 0.0 => Expr::Const(p / q),
            _ if a.is_zero() => Expr::zero(),
            _ if b.is_one() => a,
            _ => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn pow(a: Expr, n: u32) -> Expr {
        match n {
            0 => Expr::one(),
            1 => a,
            _ => match a.as_const() {
                Some(c) => Expr::Const(c.powu(n)),
                None => Expr::Pow(Box::new(a), n),
            },
        }
    }

    pub fn sin(a: Expr) -> Expr {
        match a.as_const() {
            Some(c) => Expr::Const(c.sin()),
            None => Expr::Sin(Box::new(a)),
        }
    }

    pub fn cos(a: Expr) -> Expr {
        match a.as_const() {
            Some(c) => Expr::Const(c.cos()),
            None => Expr::Cos(Box::new(a)),
        }
    }

    pub fn exp(a: Expr) -> Expr {
        match a.as_const() {
            Some(c) => Expr::Const(c.exp()),
            None => Expr::Exp(Box::new(a)),
        }
    }

    pub fn scale(c: Complex<f64>, a: Expr) -> Expr {
        Expr::mul(Expr::Const(c), a)
    }

    /// Symbolic partial derivative.
    pub fn diff(&self, var: Var) -> Expr {
        match self {
            Expr::X => Expr::real(if var == Var::X { 1.0 } else { 0.0 }),
            Expr::Xi => Expr::real(if var == Var::Xi { 1.0 } else { 0.0 }),
            Expr::Const(_) => Expr::zero(),
            Expr::Add(a, b) => Expr::add(a.diff(var), b.diff(var)),
            Expr::Sub(a, b) => Expr::sub(a.diff(var), b.diff(var)),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.diff(var), (**b).clone()),
                Expr::mul((**a).clone(), b.diff(var)),
            ),
            Expr::Div(a, b) => {
                let num = Expr::sub(
                    Expr::mul(a.diff(var), (**b).clone()),
                    Expr::mul((**a).clone(), b.diff(var)),
                );
                Expr::div(num, Expr::pow((**b).clone(), 2))
            }
            Expr::Neg(a) => Expr::neg(a.diff(var)),
            Expr::Pow(a, n) => {
                let da = a.diff(var);
                if da.is_zero() {
                    return Expr::zero();
                }
                Expr::mul(
                    Expr::scale(Complex::new(*n as f64, 0.0), Expr::pow((**a).clone(), n - 1)),
                    da,
                )
            }
            Expr::Sin(a) => Expr::mul(Expr::cos((**a).clone()), a.diff(var)),
            Expr::Cos(a) => Expr::neg(Expr::mul(Expr::sin((**a).clone()), a.diff(var))),
            Expr::Exp(a) => Expr::mul(Expr::exp((**a).clone()), a.diff(var)),
        }
    }

    /// Mixed partial `∂x^a ∂ξ^b`.
    pub fn partial(&self, a: usize, b: usize) -> Expr {
        let mut e = self.clone();
        for _ in 0..a {
            e = e.diff(Var::X);
        }
        for _ in 0..b {
            e = e.diff(Var::Xi);
        }
        e
    }

    /// Tree-walking evaluation. For repeated evaluation compile a
    /// [`Program`](super::Program) instead.
    pub fn eval<F: Real>(&self, pt: PhasePoint<F>) -> Result<Complex<F>, SymbolError> {
        Ok(match self {
            Expr::X => Complex::new(pt.x, F::zero()),
            Expr::Xi => Complex::new(pt.xi, F::zero()),
            Expr::Const(c) => cast_complex(*c),
            Expr::Add(a, b) => a.eval(pt)? + b.eval(pt)?,
            Expr::Sub(a, b) => a.eval(pt)? - b.eval(pt)?,
            Expr::Mul(a, b) => a.eval(pt)? * b.eval(pt)?,
            Expr::Div(a, b) => {
                let num = a.eval(pt)?;
                let den = b.eval(pt)?;
                if den.re == F::zero() && den.im == F::zero() {
                    return Err(SymbolError::DivisionByZero {
                        x: pt.x.to_f64().unwrap_or(f64::NAN),
                        xi: pt.xi.to_f64().unwrap_or(f64::NAN),
                    });
                }
                num / den
            }
            Expr::Neg(a) => -a.eval(pt)?,
            Expr::Pow(a, n) => a.eval(pt)?.powu(*n),
            Expr::Sin(a) => a.eval(pt)?.sin(),
            Expr::Cos(a) => a.eval(pt)?.cos(),
            Expr::Exp(a) => a.eval(pt)?.exp(),
        })
    }

    /// True when the tree mentions `xi` anywhere.
    pub fn depends_on(&self, var: Var) -> bool {
        match self {
            Expr::X => var == Var::X,
            Expr::Xi => var == Var::Xi,
            Expr::Const(_) => false,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.depends_on(var) || b.depends_on(var)
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) => a.depends_on(var),
        }
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add(self, rhs)
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul(self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

fn write_real(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
        write!(f, "(-{})", -v)
    } else {
        write!(f, "{}", v)
    }
}

/// Prints in the input grammar, fully parenthesised, so that the output
/// re-parses to an expression that evaluates identically.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::X => write!(f, "x"),
            Expr::Xi => write!(f, "xi"),
            Expr::Const(c) => match (c.re != 0.0, c.im != 0.0) {
                (_, false) => write_real(f, c.re),
                (false, true) => {
                    write!(f, "(")?;
                    write_real(f, c.im)?;
                    write!(f, "*i)")
                }
                (true, true) => {
                    write!(f, "(")?;
                    write_real(f, c.re)?;
                    write!(f, "+")?;
                    write_real(f, c.im)?;
                    write!(f, "*i)")
                }
            },
            Expr::Add(a, b) => write!(f, "({} + {})", a, b),
            Expr::Sub(a, b) => write!(f, "({} - {})", a, b),
            Expr::Mul(a, b) => write!(f, "({} * {})", a, b),
            Expr::Div(a, b) => write!(f, "({} / {})", a, b),
            Expr::Neg(a) => write!(f, "(-{})", a),
            Expr::Pow(a, n) => write!(f, "({})^{}", a, n),
            Expr::Sin(a) => write!(f, "sin({})", a),
            Expr::Cos(a) => write!(f, "cos({})", a),
            Expr::Exp(a) => write!(f, "exp({})", a),
        }
    }
}
