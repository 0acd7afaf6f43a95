use num_complex::Complex;
use num_traits::Zero;
use proptest::prelude::*;

use ptbs::bsaction::{ActionContext, ActionOptions};
use ptbs::classical::{action_s0, d_de, find_orbit, HamiltonFlow, WellConfig};
use ptbs::homology::BetaField;
use ptbs::moyal::{conjugate, q, Coeff, star, Generator, HPoly, Poly, WeightedPoly, QC};
use ptbs::quantize::{bs_roots, RootOptions};
use ptbs::symbol::{check_pt_symmetry, eval_jet, parse_expr, symmetric_samples, PhasePoint, SymbolSeries};

const SMOOTH: &[&str] = &[
    "xi^2 + x^2",
    "xi^2 + x^4 - x*xi/3",
    "sin(x)*xi^3 + exp(x/2)",
    "cos(x*xi) + i*x^3",
    "(1 + x^2)/(2 + xi^2)",
    "exp(-x^2)*sin(xi)",
];

fn point() -> impl Strategy<Value = (f64, f64)> {
    (-1.5f64..1.5, -1.5f64..1.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn jets_are_linear(i in 0..SMOOTH.len(), j in 0..SMOOTH.len(), a in -3.0f64..3.0, (x, xi) in point()) {
        let e1 = parse_expr(SMOOTH[i]).unwrap();
        let e2 = parse_expr(SMOOTH[j]).unwrap();
        let comb = ptbs::Expr::scale(Complex::new(a, 0.0), e1.clone()) + e2.clone();
        let pt = PhasePoint::new(x, xi);
        let (jc, j1, j2) = (eval_jet(&comb, pt, 3).unwrap(), eval_jet(&e1, pt, 3).unwrap(), eval_jet(&e2, pt, 3).unwrap());
        for p in 0..=3 {
            for r in 0..=(3 - p) {
                let want = j1.get(p, r) * a + j2.get(p, r);
                prop_assert!((jc.get(p, r) - want).norm() <= 1e-9 * (1.0 + want.norm()));
            }
        }
    }

    #[test]
    fn jets_match_finite_differences(i in 0..SMOOTH.len(), (x, xi) in point()) {
        let e = parse_expr(SMOOTH[i]).unwrap();
        let pt = PhasePoint::new(x, xi);
        let jet = eval_jet(&e, pt, 2).unwrap();
        let f = |dx: f64, dxi: f64| eval_jet(&e, PhasePoint::new(x + dx, xi + dxi), 0).unwrap().value();
        let d = |s: f64, ax: (f64, f64)| (f(s * ax.0, s * ax.1) - f(-s * ax.0, -s * ax.1)) / (2.0 * s);
        let rich = |ax: (f64, f64)| (d(0.5e-4, ax) * 4.0 - d(1e-4, ax)) / 3.0;
        for (ax, want) in [((1.0, 0.0), jet.dx()), ((0.0, 1.0), jet.dxi())] {
            let got = rich(ax);
            prop_assert!((got - want).norm() <= 1e-6 * (1.0 + want.norm()), "{} vs {}", got, want);
        }
        let s = 1e-3;
        let dxx = (f(s, 0.0) - f(0.0, 0.0) * 2.0 + f(-s, 0.0)) / (s * s);
        prop_assert!((dxx - jet.get(2, 0)).norm() <= 1e-4 * (1.0 + jet.get(2, 0).norm()));
    }

    #[test]
    fn pt_symmetric_parts_have_parity(c1 in -2.0f64..2.0, c2 in -2.0f64..2.0, c3 in -2.0f64..2.0) {
        let p1 = format!("{c1}*x^2*xi + i*({c2}*x + {c3}*sin(x)*xi^2)");
        let s = SymbolSeries::parse(&["xi^2 + x^2", &p1]).unwrap();
        let samples = symmetric_samples(1.5, 5);
        prop_assert!(check_pt_symmetry(&s, &samples, 1e-12).passed());
        let e = parse_expr(&p1).unwrap();
        for p in &samples {
            let a: Complex<f64> = eval_jet(&e, *p, 0).unwrap().value();
            let b: Complex<f64> = eval_jet(&e, PhasePoint::new(-p.x, p.xi), 0).unwrap().value();
            prop_assert!((a.re - b.re).abs() < 1e-12 && (a.im + b.im).abs() < 1e-12);
        }
    }
}

fn rational_poly() -> impl Strategy<Value = Poly<QC>> {
    prop::collection::vec((0u32..=3, 0u32..=3, -3i64..=3, 1i64..=3, -2i64..=2), 0..6).prop_map(|terms| {
        let mut p = Poly::zero();
        for (a, b, n, d, im) in terms {
            if a + b <= 3 {
                p.add_term(a, b, q(n, d) + q(im, d) * QC::imag_unit());
            }
        }
        p
    })
}

fn real_poly() -> impl Strategy<Value = Poly<QC>> {
    prop::collection::vec((0u32..=3, 0u32..=3, -3i64..=3, 1i64..=3), 0..5).prop_map(|terms| {
        let mut p = Poly::zero();
        for (a, b, n, d) in terms {
            if a + b <= 3 {
                p.add_term(a, b, q(n, d));
            }
        }
        p
    })
}

fn plain(p: Poly<QC>) -> WeightedPoly<QC> {
    WeightedPoly::plain(HPoly::from_poly(p, 4), Generator::new(Poly::zero()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn star_is_associative_with_unit(a in rational_poly(), b in rational_poly(), c in rational_poly()) {
        let (a, b, c) = (plain(a), plain(b), plain(c));
        let l = star(&star(&a, &b, 4).unwrap(), &c, 4).unwrap();
        let r = star(&a, &star(&b, &c, 4).unwrap(), 4).unwrap();
        prop_assert_eq!(l.body, r.body);
        let one = plain(Poly::one());
        prop_assert_eq!(&star(&one, &a, 4).unwrap().body, &a.body);
        prop_assert_eq!(&star(&a, &one, 4).unwrap().body, &a.body);
    }

    #[test]
    fn commutator_is_poisson_bracket(a in rational_poly(), b in rational_poly()) {
        let (pa, pb) = (a.clone(), b.clone());
        let (a, b) = (plain(a), plain(b));
        let d = star(&a, &b, 4).unwrap().body.sub(&star(&b, &a, 4).unwrap().body);
        prop_assert!(d.coeff(0).is_zero() && d.coeff(2).is_zero());
        let pois = pa.dx().mul(&pb.dxi()).sub(&pa.dxi().mul(&pb.dx())).scale(&QC::imag_unit());
        prop_assert_eq!(d.coeff(1), &pois);
    }

    #[test]
    fn first_order_term_is_real_when_transport_holds(beta in real_poly(), p0 in real_poly(), re1 in real_poly()) {
        let i = QC::imag_unit();
        let p1 = re1.add(&beta.bracket(&p0).scale(&i));
        let full = HPoly::from_coeffs(vec![p0, p1], 4);
        let c = conjugate(&beta, &full, 4).unwrap();
        prop_assert!(c.coeff(1).terms().all(|(_, v)| v.im.is_zero()));
    }

    #[test]
    fn real_symbols_are_fixed_by_trivial_conjugation(p in real_poly()) {
        let h = HPoly::from_poly(p, 4);
        prop_assert_eq!(conjugate(&Poly::zero(), &h, 4).unwrap(), h);
    }
}

const WELLS: &[&str] = &["xi^2 + x^2", "xi^2 + x^4", "xi^2 + x^2 + x^4/2"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn flow_conserves_energy_and_reverses(w in 0..WELLS.len(), e in 0.3f64..2.5) {
        let flow = HamiltonFlow::new(&parse_expr(WELLS[w]).unwrap()).unwrap();
        let cfg = WellConfig::new(PhasePoint::new(0.0, 1.0), 0.1, 3.0);
        let orb = find_orbit(&flow, e, &cfg).unwrap();
        prop_assert!(orb.level_deviation() <= 10.0 * cfg.rk_tol);
        prop_assert!((orb.omega() * orb.period() - std::f64::consts::TAU).abs() < 1e-14);
        let end = flow.evolve(orb.seed(), orb.period(), cfg.rk_tol).unwrap();
        let back = flow.evolve(end, -orb.period(), cfg.rk_tol).unwrap();
        prop_assert!(back.dist(&orb.seed()) <= 10.0 * cfg.closure_tol);
        let s0 = action_s0(&orb).unwrap();
        let s0_dense = action_s0(&orb.with_panel_nodes(12)).unwrap();
        prop_assert!((s0 - s0_dense).abs() < 1e-8);
        let knots = orb.knots();
        prop_assert!(knots[0].t == 0.0 && knots.windows(2).all(|k| k[1].t > k[0].t));
    }

    #[test]
    fn action_derivative_is_period(w in 0..WELLS.len(), e in 0.4f64..2.4) {
        let flow = HamiltonFlow::new(&parse_expr(WELLS[w]).unwrap()).unwrap();
        let cfg = WellConfig::new(PhasePoint::new(0.0, 1.0), 0.1, 3.0);
        let s0 = |e: f64| -> Result<f64, ptbs::ClassicalError> { action_s0(&find_orbit(&flow, e, &cfg)?) };
        let d = d_de(s0, e, 1e-3, &cfg).unwrap();
        let t = find_orbit(&flow, e, &cfg).unwrap().period();
        prop_assert!((d - t).abs() < 1e-5, "{} vs {}", d, t);
    }
}

#[test]
fn quasi_eigenvalues_interlace_and_reproduce_the_condition() {
    let s = SymbolSeries::parse(&["xi^2 + x^4", "i*x"]).unwrap();
    let ctx = ActionContext::new(&s, WellConfig::new(PhasePoint::new(0.0, 1.0), 0.05, 1.6), ActionOptions::default()).unwrap();
    for h in [0.2, 0.1] {
        let roots = bs_roots(&ctx, h, (0.1, 1.5), &RootOptions::default()).unwrap();
        assert!(roots.windows(2).all(|r| r[1].energy > r[0].energy && r[1].n == r[0].n + 1));
        for r in &roots {
            let sh = ctx.series(r.energy).unwrap().eval(h);
            assert!((sh - std::f64::consts::TAU * h * r.n as f64).abs() <= 1e-10);
        }
    }
}

#[test]
fn action_coefficients_are_smooth_in_energy() {
    let s = SymbolSeries::parse(&["xi^2 + x^4 + x^2/2", "i*x"]).unwrap();
    let ctx = ActionContext::new(&s, WellConfig::new(PhasePoint::new(0.0, 1.0), 0.3, 2.2), ActionOptions::default()).unwrap();
    let es: Vec<f64> = (0..9).map(|k| 0.8 + 0.1 * k as f64).collect();
    let rows: Vec<_> = es.iter().map(|&e| ctx.series(e).unwrap()).collect();
    for pick in [|a: &ptbs::ActionSeries<f64>| a.s0, |a: &ptbs::ActionSeries<f64>| a.s1, |a: &ptbs::ActionSeries<f64>| a.s2] {
        let ys: Vec<f64> = rows.iter().map(pick).collect();
        let r = quartic_fit_residual(&es, &ys);
        assert!(r <= 1e-4);
    }
    for r in &rows {
        assert!(r.s3 == 0.0 && r.im_residue <= 1e-9, "E = {}: residue {:e}", r.energy, r.im_residue);
    }
}

fn quartic_fit_residual(xs: &[f64], ys: &[f64]) -> f64 {
    let m = 5;
    let mut a = vec![vec![0.0; m + 1]; m];
    for (x, y) in xs.iter().zip(ys) {
        let pw: Vec<f64> = (0..m).map(|k| x.powi(k as i32)).collect();
        for r in 0..m {
            for c in 0..m {
                a[r][c] += pw[r] * pw[c];
            }
            a[r][m] += pw[r] * y;
        }
    }
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()).unwrap();
        a.swap(col, piv);
        for r in 0..m {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=m {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let coef: Vec<f64> = (0..m).map(|r| a[r][m] / a[r][r]).collect();
    xs.iter()
        .zip(ys)
        .map(|(x, y)| (coef.iter().enumerate().map(|(k, c)| c * x.powi(k as i32)).sum::<f64>() - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn beta_field_is_shareable_across_threads() {
    let s = SymbolSeries::parse(&["xi^2 + x^4", "i*x^3"]).unwrap();
    let bf = BetaField::new(&s, WellConfig::new(PhasePoint::new(0.0, 1.0), 0.1, 3.0)).unwrap();
    let pts: Vec<_> = (0..6).map(|k| PhasePoint::new(0.1 * k as f64, 0.9)).collect();
    let serial: Vec<f64> = pts.iter().map(|p| bf.compute(*p).unwrap()).collect();
    std::thread::scope(|sc| {
        for _ in 0..3 {
            sc.spawn(|| {
                for (p, want) in pts.iter().zip(&serial) {
                    assert!((bf.value(*p).unwrap() - want).abs() < 1e-9);
                }
            });
        }
    });
    assert_eq!(bf.cached_len(), pts.len());
}
