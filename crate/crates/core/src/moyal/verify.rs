//! Identity suite for the star engine and the conjugation expansions.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::coeff::{q, Coeff, QC};
use super::hj::{eq4_rhs, order4_rhs};
use super::poly::{HPoly, Poly};
use super::weighted::{conjugate_series, conjugate_with, star_inverse_with, star_with, Generator, Orientation, WeightedPoly};
use super::MoyalError;

/// One exact identity and what is left of it.
#[derive(Clone, Debug)]
pub struct IdentityCheck {
    pub name: String,
    pub residual: HPoly<QC>,
}

impl IdentityCheck {
    pub fn new(name: impl Into<String>, residual: HPoly<QC>) -> Self {
        IdentityCheck { name: name.into(), residual }
    }

    pub fn passed(&self) -> bool {
        self.residual.is_zero()
    }

    /// Number of nonzero monomials in the residual.
    pub fn residual_terms(&self) -> usize {
        self.residual.support().len()
    }

    /// Lowest `h`-power with a nonzero residual.
    pub fn first_order(&self) -> Option<usize> {
        self.residual.coeffs().iter().position(|p| !p.is_zero())
    }

    /// Largest coefficient magnitude in the residual.
    pub fn max_residual(&self) -> f64 {
        self.residual.support().iter().map(|t| t.3.magnitude()).fold(0.0, f64::max)
    }

    /// Residual monomials as `h^j x^a xi^b: c`, lowest order first.
    pub fn offending_monomials(&self, limit: usize) -> Vec<String> {
        self.residual
            .support()
            .into_iter()
            .take(limit)
            .map(|(j, a, b, c)| format!("h^{j} x^{a} xi^{b}: {}", c.render()))
            .collect()
    }
}

#[derive(Clone, Debug, Default)]
pub struct SuiteReport {
    pub checks: Vec<IdentityCheck>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(IdentityCheck::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteConfig {
    pub instances: usize,
    pub seed: u64,
    pub orientation: Orientation,
    pub max_degree: u32,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { instances: 20, seed: 0x5eed, orientation: Orientation::Standard, max_degree: 3 }
    }
}

/// Sparse polynomial of total degree ≤ `deg` with small rational coefficients.
pub fn random_poly(rng: &mut impl Rng, deg: u32, complex: bool) -> Poly<QC> {
    let mut p = Poly::zero();
    for a in 0..=deg {
        for b in 0..=(deg - a) {
            if rng.gen_bool(0.4) {
                continue;
            }
            let re = q(rng.gen_range(-3..=3), rng.gen_range(1..=3));
            let im = if complex && rng.gen_bool(0.5) { q(rng.gen_range(-3..=3), rng.gen_range(1..=3)) } else { q(0, 1) };
            p.add_term(a, b, re + QC::imag_unit() * im);
        }
    }
    p
}

/// Real polynomial with no constant term (constants drop out of every bracket).
pub fn random_beta(rng: &mut impl Rng, deg: u32) -> Poly<QC> {
    let mut p = random_poly(rng, deg, false);
    p.add_term(0, 0, -p.get(0, 0));
    if p.is_zero() {
        p = Poly::xi().scale(&q(1, 2));
    }
    p
}

fn plain(p: Poly<QC>, k: usize) -> WeightedPoly<QC> {
    WeightedPoly::plain(HPoly::from_poly(p, k), Generator::new(Poly::zero()))
}

/// `conjugate(β0, p)` against the displayed expansion.
pub fn check_eq4(beta0: &Poly<QC>, p: &HPoly<QC>, orient: Orientation) -> Result<IdentityCheck, MoyalError> {
    let lhs = conjugate_with(beta0, p, p.order(), orient)?;
    Ok(IdentityCheck::new(format!("conjugation expansion, beta0 = {beta0}, p = {p}"), lhs.sub(&eq4_rhs(beta0, p))))
}

/// Left side of the general order-`h⁴` display minus its right side.
pub fn verify_order4_display(betas: &[Poly<QC>; 4], p: &HPoly<QC>) -> Result<HPoly<QC>, MoyalError> {
    verify_order4_display_with(betas, p, Orientation::Standard)
}

pub fn verify_order4_display_with(betas: &[Poly<QC>; 4], p: &HPoly<QC>, orient: Orientation) -> Result<HPoly<QC>, MoyalError> {
    let k = p.order().min(4);
    let g = Generator::new(betas[0].clone());
    let b0 = WeightedPoly::exp(g.clone(), k);
    let b0inv = star_inverse_with(&b0, k, orient)?;
    let mut cur = star_with(&star_with(&b0, &WeightedPoly::plain(p.clone(), g.clone()), k, orient)?, &b0inv, k, orient)?;
    for (j, beta) in betas.iter().enumerate().skip(1) {
        // e^{h^j β_j} as a truncated series
        let mut series = HPoly::from_poly(Poly::one(), k);
        let mut term = HPoly::from_poly(Poly::one(), k);
        let step = HPoly::from_poly(beta.clone(), k).shift(j);
        for n in 1..=k {
            term = term.mul(&step).scale(&q(1, n as i64));
            if term.is_zero() {
                break;
            }
            series = series.add(&term);
        }
        let bj = WeightedPoly::plain(series, g.clone());
        cur = conjugate_series(&bj, &cur, k, orient)?;
    }
    Ok(cur.body.sub(&order4_rhs(betas, p)))
}

/// Run every identity of the engine on seeded random instances.
pub fn run_identity_suite(cfg: &SuiteConfig) -> Result<SuiteReport, MoyalError> {
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let o = cfg.orientation;
    let k = 4;
    let d = cfg.max_degree;
    let mut checks = Vec::new();

    // x # ξ = xξ + ih/2
    let xs = star_with(&plain(Poly::x(), k), &plain(Poly::xi(), k), k, o)?;
    let mut want = HPoly::from_poly(Poly::x().mul(&Poly::xi()), k);
    want.set(1, Poly::constant(QC::imag_unit() * q(1, 2)));
    checks.push(IdentityCheck::new("x # xi = x xi + ih/2", xs.body.sub(&want)));

    for n in 0..cfg.instances {
        let a = plain(random_poly(&mut rng, d, true), k);
        let b = plain(random_poly(&mut rng, d, true), k);
        let c = plain(random_poly(&mut rng, d, true), k);
        let one = plain(Poly::one(), k);
        let left = star_with(&star_with(&a, &b, k, o)?, &c, k, o)?;
        let right = star_with(&a, &star_with(&b, &c, k, o)?, k, o)?;
        checks.push(IdentityCheck::new(format!("associativity #{n}"), left.body.sub(&right.body)));
        let u1 = star_with(&one, &a, k, o)?;
        let u2 = star_with(&a, &one, k, o)?;
        checks.push(IdentityCheck::new(format!("unit #{n}"), u1.body.sub(&a.body).add(&u2.body.sub(&a.body))));

        // a#b − b#a = ih(∂x a ∂ξ b − ∂ξ a ∂x b) + O(h³)
        let ab = star_with(&a, &b, k, o)?.body;
        let ba = star_with(&b, &a, k, o)?.body;
        let comm = ab.sub(&ba);
        let (pa, pb) = (a.body.coeff(0), b.body.coeff(0));
        let pois = pa.dx().mul(&pb.dxi()).sub(&pa.dxi().mul(&pb.dx())).scale(&QC::imag_unit());
        let mut r = HPoly::zero(2);
        r.set(0, comm.coeff(0).clone());
        r.set(1, comm.coeff(1).sub(&pois));
        r.set(2, comm.coeff(2).clone());
        checks.push(IdentityCheck::new(format!("commutator bracket #{n}"), r));

        let beta = random_beta(&mut rng, d);
        let g = Generator::new(beta.clone());
        let e = WeightedPoly::exp(g, k);
        let inv = star_inverse_with(&e, k, o)?;
        let prod = star_with(&e, &inv, k, o)?;
        checks.push(IdentityCheck::new(
            format!("inverse #{n}"),
            prod.body.sub(&HPoly::from_poly(Poly::one(), k)),
        ));

        let p = HPoly::from_poly(random_poly(&mut rng, d, true), k);
        let mut c = check_eq4(&beta, &p, o)?;
        c.name = format!("conjugation expansion #{n}");
        checks.push(c);

        // reality of the h¹ term when {β0, p0} = Im p1
        let p0 = random_poly(&mut rng, d, false);
        let re1 = random_poly(&mut rng, d, false);
        let p1 = re1.add(&beta.bracket(&p0).scale(&QC::imag_unit()));
        let full = HPoly::from_coeffs(vec![p0, p1], k);
        let conj = conjugate_with(&beta, &full, k, o)?;
        let h1 = conj.coeff(1);
        let imag = Poly::from_terms(h1.terms().map(|(m, v)| (*m, QC::new(v.im.clone(), q(0, 1).re))));
        checks.push(IdentityCheck::new(format!("first-order reality #{n}"), HPoly::from_poly(imag, 0)));

        // real p is a fixed point of conjugation by e^0
        let real = HPoly::from_poly(random_poly(&mut rng, d, false), k);
        let fixed = conjugate_with(&Poly::zero(), &real, k, o)?;
        checks.push(IdentityCheck::new(format!("trivial conjugation #{n}"), fixed.sub(&real)));
    }

    for n in 0..cfg.instances.min(5) {
        let betas = [random_beta(&mut rng, 2), random_beta(&mut rng, 2), random_beta(&mut rng, 2), random_beta(&mut rng, 2)];
        let p = HPoly::from_coeffs((0..=k).map(|_| random_poly(&mut rng, 2, true)).collect(), k);
        let r = verify_order4_display_with(&betas, &p, o)?;
        checks.push(IdentityCheck::new(format!("order-4 display #{n}"), r));
    }
    Ok(SuiteReport { checks })
}

/// The reference pair `β0 = ξ/2`, `p = x`, for which the expansion stops at `h`.
pub fn linear_fixture<C: Coeff>() -> (Poly<C>, Poly<C>) {
    (Poly::xi().scale(&C::ratio(1, 2)), Poly::x())
}
