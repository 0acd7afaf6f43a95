use num_complex::Complex;

use super::{Expr, PhasePoint, SymbolError};
use crate::scalar::{cast_complex, Real};

#[derive(Clone, Copy, Debug)]
enum Op<F> {
    X,
    Xi,
    Const(Complex<F>),
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Pow(u32),
    Sin,
    Cos,
    Exp,
}

const INLINE_STACK: usize = 32;

/// Postfix form of an [`Expr`] for fast repeated evaluation.
#[derive(Clone, Debug)]
pub struct Program<F> {
    ops: Vec<Op<F>>,
    depth: usize,
    constant: Option<Complex<F>>,
}

impl<F: Real> Program<F> {
    pub fn compile(e: &Expr) -> Self {
        let mut ops = Vec::new();
        let mut depth = 0;
        let mut cur = 0;
        emit(e, &mut ops, &mut cur, &mut depth);
        let constant = e.as_const().map(cast_complex);
        Program { ops, depth, constant }
    }

    /// `Some(c)` when the program is the constant `c`.
    pub fn constant(&self) -> Option<Complex<F>> {
        self.constant
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.constant, Some(c) if c.re == F::zero() && c.im == F::zero())
    }

    pub fn eval(&self, pt: PhasePoint<F>) -> Result<Complex<F>, SymbolError> {
        if let Some(c) = self.constant {
            return Ok(c);
        }
        if self.depth <= INLINE_STACK {
            let mut stack = [Complex::new(F::zero(), F::zero()); INLINE_STACK];
            self.run(pt, &mut stack)
        } else {
            let mut stack = vec![Complex::new(F::zero(), F::zero()); self.depth];
            self.run(pt, &mut stack)
        }
    }

    fn run(&self, pt: PhasePoint<F>, stack: &mut [Complex<F>]) -> Result<Complex<F>, SymbolError> {
        let mut sp = 0usize;
        for op in &self.ops {
            match *op {
                Op::X => {
                    stack[sp] = Complex::new(pt.x, F::zero());
                    sp += 1;
                }
                Op::Xi => {
                    stack[sp] = Complex::new(pt.xi, F::zero());
                    sp += 1;
                }
                Op::Const(c) => {
                    stack[sp] = c;
                    sp += 1;
                }
                Op::Add => {
                    sp -= 1;
                    stack[sp - 1] += stack[sp];
                }
                Op::Sub => {
                    sp -= 1;
                    stack[sp - 1] -= stack[sp];
                }
                Op::Mul => {
                    sp -= 1;
                    stack[sp - 1] *= stack[sp];
                }
                Op::Div => {
                    sp -= 1;
                    let den = stack[sp];
                    if den.re == F::zero() && den.im == F::zero() {
                        return Err(SymbolError::DivisionByZero {
                            x: pt.x.to_f64().unwrap_or(f64::NAN),
                            xi: pt.xi.to_f64().unwrap_or(f64::NAN),
                        });
                    }
                    stack[sp - 1] = if den.im == F::zero() {
                        stack[sp - 1].unscale(den.re)
                    } else {
                        stack[sp - 1] / den
                    };
                }
                Op::Neg => stack[sp - 1] = -stack[sp - 1],
                Op::Pow(n) => stack[sp - 1] = stack[sp - 1].powu(n),
                Op::Sin => stack[sp - 1] = real_fast(stack[sp - 1], F::sin, Complex::sin),
                Op::Cos => stack[sp - 1] = real_fast(stack[sp - 1], F::cos, Complex::cos),
                Op::Exp => stack[sp - 1] = real_fast(stack[sp - 1], F::exp, Complex::exp),
            }
        }
        Ok(stack[0])
    }
}

fn real_fast<F: Real>(z: Complex<F>, re: fn(F) -> F, cx: fn(Complex<F>) -> Complex<F>) -> Complex<F> {
    if z.im == F::zero() {
        Complex::new(re(z.re), F::zero())
    } else {
        cx(z)
    }
}

fn emit<F: Real>(e: &Expr, ops: &mut Vec<Op<F>>, cur: &mut usize, max: &mut usize) {
    let push = |ops: &mut Vec<Op<F>>, op: Op<F>, cur: &mut usize, max: &mut usize| {
        ops.push(op);
        *cur += 1;
        *max = (*max).max(*cur);
    };
    match e {
        Expr::X => push(ops, Op::X, cur, max),
        Expr::Xi => push(ops, Op::Xi, cur, max),
        Expr::Const(c) => push(ops, Op::Const(cast_complex(*c)), cur, max),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            emit(a, ops, cur, max);
            emit(b, ops, cur, max);
            ops.push(match e {
                Expr::Add(..) => Op::Add,
                Expr::Sub(..) => Op::Sub,
                Expr::Mul(..) => Op::Mul,
                _ => Op::Div,
            });
            *cur -= 1;
        }
        Expr::Neg(a) => {
            emit(a, ops, cur, max);
            ops.push(Op::Neg);
        }
        Expr::Pow(a, n) => {
            emit(a, ops, cur, max);
            ops.push(Op::Pow(*n));
        }
        Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) => {
            emit(a, ops, cur, max);
            ops.push(match e {
                Expr::Sin(_) => Op::Sin,
                Expr::Cos(_) => Op::Cos,
                _ => Op::Exp,
            });
        }
    }
}
