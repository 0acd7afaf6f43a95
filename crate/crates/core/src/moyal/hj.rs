//! Order-`h³` and order-`h⁴` polynomials of the conjugation expansion, as
//! displayed, together with the right-hand sides they assemble into.

use super::coeff::Coeff;
use super::poly::{HPoly, Poly};

struct Parts<C> {
    bx: Poly<C>,
    bxi: Poly<C>,
    bxx: Poly<C>,
    bxixi: Poly<C>,
    bxxi: Poly<C>,
    bxxx: Poly<C>,
    bxixixi: Poly<C>,
    bxxxi: Poly<C>,
    bxxixi: Poly<C>,
    al: Poly<C>,
    ax: Poly<C>,
    axi: Poly<C>,
}

impl<C: Coeff> Parts<C> {
    fn new(beta: &Poly<C>, alpha: &Poly<C>) -> Self {
        Parts {
            bx: beta.deriv(1, 0),
            bxi: beta.deriv(0, 1),
            bxx: beta.deriv(2, 0),
            bxixi: beta.deriv(0, 2),
            bxxi: beta.deriv(1, 1),
            bxxx: beta.deriv(3, 0),
            bxixixi: beta.deriv(0, 3),
            bxxxi: beta.deriv(2, 1),
            bxxixi: beta.deriv(1, 2),
            al: alpha.clone(),
            ax: alpha.deriv(1, 0),
            axi: alpha.deriv(0, 1),
        }
    }
}

fn k<C: Coeff>(n: i64) -> C {
    C::ratio(n, 1)
}

/// Sum of products, each scaled by an integer.
fn sum<C: Coeff>(terms: &[(i64, &[&Poly<C>])]) -> Poly<C> {
    let mut out = Poly::zero();
    for (c, fs) in terms {
        let mut p = Poly::constant(k(*c));
        for f in fs.iter() {
            p = p.mul(f);
        }
        out = out.add(&p);
    }
    out
}

pub fn eval_r5<C: Coeff>(beta: &Poly<C>, alpha: &Poly<C>) -> Poly<C> {
    let s = Parts::new(beta, alpha);
    let axx = alpha.deriv(2, 0);
    let axixi = alpha.deriv(0, 2);
    let axxi = alpha.deriv(1, 1);
    let f1 = sum(&[(1, &[&s.bxi, &s.bxi]), (-1, &[&s.bxixi])]);
    let g1 = sum(&[(2, &[&s.ax, &s.bx]), (1, &[&s.al, &s.bxx]), (1, &[&axx]), (1, &[&s.al, &s.bx, &s.bx])]);
    let f2 = sum(&[(1, &[&s.bx, &s.bx]), (-1, &[&s.bxx])]);
    let g2 = sum(&[(2, &[&s.axi, &s.bxi]), (1, &[&s.al, &s.bxixi]), (1, &[&axixi]), (1, &[&s.al, &s.bxi, &s.bxi])]);
    let f3 = sum(&[(1, &[&s.bx, &s.bxi]), (-1, &[&s.bxxi])]);
    let g3 = sum(&[
        (1, &[&axxi]),
        (1, &[&s.axi, &s.bx]),
        (1, &[&s.ax, &s.bxi]),
        (1, &[&s.al, &s.bx, &s.bxi]),
        (1, &[&s.al, &s.bxxi]),
    ]);
    f1.mul(&g1).add(&f2.mul(&g2)).sub(&f3.mul(&g3).scale(&k(2)))
}

pub fn eval_r8<C: Coeff>(beta: &Poly<C>, alpha: &Poly<C>) -> Poly<C> {
    let s = Parts::new(beta, alpha);
    let axx = alpha.deriv(2, 0);
    let axixi = alpha.deriv(0, 2);
    let axxi = alpha.deriv(1, 1);
    let axxx = alpha.deriv(3, 0);
    let axixixi = alpha.deriv(0, 3);
    let axxxi = alpha.deriv(2, 1);
    let axxixi = alpha.deriv(1, 2);
    let f5 = sum(&[
        (3, &[&s.axi, &s.bxixi]),
        (1, &[&s.al, &s.bxixixi]),
        (3, &[&s.bxi, &axixi]),
        (1, &[&axixixi]),
        (3, &[&s.axi, &s.bxi, &s.bxi]),
        (3, &[&s.al, &s.bxi, &s.bxixi]),
        (1, &[&s.al, &s.bxi, &s.bxi]),
    ]);
    let f5t = sum(&[
        (3, &[&s.ax, &s.bxx]),
        (1, &[&s.al, &s.bxxx]),
        (3, &[&s.bx, &axx]),
        (1, &[&axxx]),
        (3, &[&s.ax, &s.bx, &s.bx]),
        (3, &[&s.al, &s.bx, &s.bxx]),
        (1, &[&s.al, &s.bx, &s.bx]),
    ]);
    let g5_tail = sum(&[(2, &[&s.ax, &s.bx]), (1, &[&s.al, &s.bxx]), (1, &[&axx]), (1, &[&s.al, &s.bx, &s.bx])]);
    let g5 = sum(&[
        (2, &[&s.bx, &axxi]),
        (2, &[&s.ax, &s.bxxi]),
        (1, &[&s.axi, &s.bxx]),
        (1, &[&s.al, &s.bxxxi]),
        (1, &[&axxxi]),
        (1, &[&s.axi, &s.bx, &s.bx]),
        (2, &[&s.al, &s.bx, &s.bxxi]),
    ])
    .add(&g5_tail.mul(&s.bxi));
    let g5t_tail =
        sum(&[(2, &[&s.axi, &s.bxi]), (1, &[&s.al, &s.bxixi]), (1, &[&axixi]), (1, &[&s.al, &s.bxi, &s.bxi])]);
    let g5t = sum(&[
        (2, &[&s.bxi, &axxi]),
        (2, &[&s.axi, &s.bxxi]),
        (1, &[&s.ax, &s.bxixi]),
        (1, &[&s.al, &s.bxxixi]),
        (1, &[&axxixi]),
        (1, &[&s.ax, &s.bxi, &s.bxi]),
        (2, &[&s.al, &s.bxi, &s.bxxi]),
    ])
    .add(&g5t_tail.mul(&s.bx));
    let m1 = sum(&[(3, &[&s.bx, &s.bxx]), (-1, &[&s.bxxx]), (-1, &[&s.bx, &s.bx, &s.bx])]);
    let m2 = sum(&[(3, &[&s.bxi, &s.bxixi]), (-1, &[&s.bxixixi]), (-1, &[&s.bxi, &s.bxi, &s.bxi])]);
    let m3 = sum(&[(2, &[&s.bxi, &s.bxxi]), (-1, &[&s.bxxixi]), (-1, &[&s.bx, &s.bxi, &s.bxi]), (1, &[&s.bx, &s.bxixi])]);
    let m4 = sum(&[(2, &[&s.bx, &s.bxxi]), (-1, &[&s.bxxxi]), (-1, &[&s.bxi, &s.bx, &s.bx]), (1, &[&s.bxi, &s.bxx])]);
    f5.mul(&m1).sub(&f5t.mul(&m2)).add(&g5.mul(&m3).scale(&k(3))).sub(&g5t.mul(&m4).scale(&k(3)))
}

fn lift<C: Coeff>(p: &Poly<C>, kk: usize) -> HPoly<C> {
    HPoly::from_poly(p.clone(), kk)
}

/// Apply a map linear in its polynomial argument to every `h`-coefficient.
fn graded<C: Coeff>(p: &HPoly<C>, f: impl Fn(&Poly<C>) -> Poly<C>) -> HPoly<C> {
    p.map(f)
}

/// `p − ih{β0,p} + (h²/2){{β0,p},β0} + i(h³/8) R5 + (h⁴/48) R8` with `α = {β0, p}`.
pub fn eq4_rhs<C: Coeff>(beta0: &Poly<C>, p: &HPoly<C>) -> HPoly<C> {
    let kk = p.order();
    let i = C::imag_unit();
    let b = lift(beta0, kk);
    let alpha = b.bracket(p);
    let t1 = alpha.shift(1).scale(&(-i.clone()));
    let t2 = alpha.bracket(&b).shift(2).scale(&C::ratio(1, 2));
    let t3 = graded(&alpha, |a| eval_r5(beta0, a)).shift(3).scale(&(i * C::ratio(1, 8)));
    let t4 = graded(&alpha, |a| eval_r8(beta0, a)).shift(4).scale(&C::ratio(1, 48));
    p.add(&t1).add(&t2).add(&t3).add(&t4)
}

/// Right side of the general order-`h⁴` display for
/// `B3 B2 B1 B0 P B0⁻¹ B1⁻¹ B2⁻¹ B3⁻¹`.
pub fn order4_rhs<C: Coeff>(betas: &[Poly<C>; 4], p: &HPoly<C>) -> HPoly<C> {
    let kk = p.order();
    let i = C::imag_unit();
    let b: Vec<HPoly<C>> = betas.iter().map(|x| lift(x, kk)).collect();
    let alpha = b[0].bracket(p);
    let mut out = p.clone();
    for (j, bj) in b.iter().enumerate() {
        out = out.sub(&bj.bracket(p).shift(1 + j).scale(&i));
    }
    for j in 0..2 {
        out = out.sub(&b[j + 1].bracket(&alpha).shift(3 + j));
    }
    for j in 0..2 {
        out = out.add(&b[j].bracket(p).bracket(&b[j]).shift(2 + 2 * j).scale(&C::ratio(1, 2)));
    }
    out = out.add(&graded(&alpha, |a| eval_r5(&betas[0], a)).shift(3).scale(&(i.clone() * C::ratio(1, 8))));
    out = out.add(&graded(&alpha, |a| eval_r8(&betas[0], a)).shift(4).scale(&C::ratio(1, 48)));
    out.sub(&b[1].bracket(&alpha.bracket(&b[0])).shift(4).scale(&(i * C::ratio(1, 2))))
}
