//! The four subcommands. Each returns a human summary plus the data table in
//! both CSV and JSON form.

use serde::Serialize;
use serde_json::json;

use ptbs::bsaction::{ActionContext, ActionError};
use ptbs::classical::ClassicalError;
use ptbs::homology::solvability_check;
use ptbs::moyal::{run_identity_suite, Orientation, SuiteConfig};
use ptbs::oracle::{build_matrix, build_schrodinger, choose_half_width, compare_spectra, eigenvalues, fmt15, OracleError};
use ptbs::quantize::{bs_roots, QuantizeError};
use ptbs::symbol::{check_pt_symmetry, symmetric_samples, Program};

use crate::config::{OracleOperator, RunConfig};

/// Failure classes, each with a fixed exit code.
#[derive(Debug)]
pub enum Failure {
    Verification(String),
    Config(String),
    Orbit(String),
    Eigensolver(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Config(_) => 2,
            Failure::Orbit(_) => 3,
            Failure::Eigensolver(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Verification(m) | Failure::Config(m) | Failure::Orbit(m) | Failure::Eigensolver(m) => m,
        }
    }
}

pub struct Output {
    pub summary: String,
    pub csv: String,
    pub json: serde_json::Value,
    /// Set when the command ran to completion but a check failed.
    pub failed: bool,
}

fn action_failure(e: ActionError) -> Failure {
    match e {
        ActionError::NotSolvable { .. } => Failure::Verification(e.to_string()),
        ActionError::Orbit(ClassicalError::OutsideWindow { .. }) => Failure::Config(e.to_string()),
        ActionError::Orbit(_) => Failure::Orbit(e.to_string()),
    }
}

fn at_energy(energy: f64) -> impl Fn(ActionError) -> Failure {
    move |e| match action_failure(e) {
        Failure::Orbit(m) => Failure::Orbit(format!("orbit failure at E = {energy}: {m}")),
        other => other,
    }
}

fn quantize_failure(h: f64, e: QuantizeError) -> Failure {
    match e {
        QuantizeError::Action(a) => action_failure(a),
        QuantizeError::InvalidH(_) | QuantizeError::Window { .. } => Failure::Config(e.to_string()),
        _ => Failure::Orbit(format!("h = {h}: {e}")),
    }
}

fn oracle_failure(e: OracleError) -> Failure {
    match e {
        OracleError::NoConvergence { .. } | OracleError::Breakdown { .. } => Failure::Eigensolver(e.to_string()),
        _ => Failure::Config(format!("oracle: {e}")),
    }
}

/// Action context whose well window is the search window padded by the
/// derivative margin.
pub fn context(cfg: &RunConfig) -> Result<ActionContext<f64>, Failure> {
    let series = cfg.series().map_err(Failure::Config)?;
    let opts = cfg.action_options();
    let mut pad = 0.0;
    loop {
        let ctx = ActionContext::new(&series, cfg.well(pad), opts.clone()).map_err(action_failure)?;
        let need = ctx.margin();
        if pad >= need {
            return Ok(ctx);
        }
        pad = need * (1.0 + 1e-9);
    }
}

fn energy_grid(cfg: &RunConfig) -> Vec<f64> {
    let w = &cfg.window;
    if w.grid == 1 {
        return vec![w.e_min];
    }
    let step = (w.e_max - w.e_min) / (w.grid - 1) as f64;
    (0..w.grid).map(|k| if k + 1 == w.grid { w.e_max } else { w.e_min + step * k as f64 }).collect()
}

fn csv(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut out = format!("{header}\n");
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct ActionRow {
    energy: f64,
    s0: f64,
    s1: f64,
    s2: f64,
    period: f64,
}

pub fn actions(cfg: &RunConfig) -> Result<Output, Failure> {
    let ctx = context(cfg)?;
    let mut rows = Vec::new();
    for e in energy_grid(cfg) {
        let a = ctx.series(e).map_err(at_energy(e))?;
        rows.push(ActionRow { energy: e, s0: a.s0, s1: a.s1, s2: a.s2, period: a.period });
    }
    let summary = format!(
        "actions: {} energies on [{}, {}], S2 form {:?}",
        rows.len(),
        cfg.window.e_min,
        cfg.window.e_max,
        cfg.problem.s2_form
    );
    let table = csv(
        "E,S0,S1,S2,T",
        rows.iter()
            .map(|r| [r.energy, r.s0, r.s1, r.s2, r.period].map(fmt15).join(",")),
    );
    Ok(Output { summary, csv: table, json: json!(rows), failed: false })
}

#[derive(Serialize)]
struct RootRow {
    h: f64,
    n: i64,
    energy: f64,
    bs_residual: f64,
}

fn require_h(cfg: &RunConfig) -> Result<Vec<f64>, Failure> {
    let hs = cfg.h_values();
    if hs.is_empty() {
        return Err(Failure::Config("window.h or window.h_list is required".into()));
    }
    Ok(hs)
}

pub fn quantize(cfg: &RunConfig) -> Result<Output, Failure> {
    let hs = require_h(cfg)?;
    let ctx = context(cfg)?;
    let window = (cfg.window.e_min, cfg.window.e_max);
    let mut rows = Vec::new();
    let mut summary = String::from("quantize:");
    for &h in &hs {
        let roots = bs_roots(&ctx, h, window, &cfg.root_options()).map_err(|e| quantize_failure(h, e))?;
        summary.push_str(&format!("\n  h = {h}: {} quasi-eigenvalues", roots.len()));
        rows.extend(roots.iter().map(|r| RootRow { h, n: r.n, energy: r.energy, bs_residual: r.bs_residual }));
    }
    let table = csv(
        "h,n,E,bs_residual",
        rows.iter()
            .map(|r| format!("{},{},{},{}", fmt15(r.h), r.n, fmt15(r.energy), fmt15(r.bs_residual))),
    );
    Ok(Output { summary, csv: table, json: json!(rows), failed: false })
}

#[derive(Serialize)]
struct CheckRow {
    check: String,
    residual: f64,
    passed: bool,
    detail: Vec<String>,
}

pub fn verify(cfg: Option<&RunConfig>, flip_star: bool) -> Result<Output, Failure> {
    let suite = SuiteConfig {
        orientation: if flip_star { Orientation::Flipped } else { Orientation::Standard },
        ..SuiteConfig::default()
    };
    let report = run_identity_suite(&suite).map_err(|e| Failure::Verification(e.to_string()))?;
    let mut rows: Vec<CheckRow> = report
        .checks
        .iter()
        .map(|c| CheckRow {
            check: c.name.clone(),
            residual: c.max_residual(),
            passed: c.passed(),
            detail: c.offending_monomials(4),
        })
        .collect();
    if let Some(cfg) = cfg {
        let series = cfg.series().map_err(Failure::Config)?;
        let pt = check_pt_symmetry(&series, &symmetric_samples(2.0, 9), 1e-12);
        rows.push(CheckRow {
            check: "pt_symmetry".into(),
            residual: pt.coefficients.iter().map(|c| c.worst).fold(0.0, f64::max),
            passed: pt.passed(),
            detail: pt
                .first_failure()
                .map(|f| {
                    let (x, xi) = f.witness.unwrap_or((f64::NAN, f64::NAN));
                    vec![format!("p{} at (x, xi) = ({x}, {xi})", f.index)]
                })
                .unwrap_or_default(),
        });
        let ctx = context(cfg)?;
        let im_p1 = Program::<f64>::compile(&series.coeff(1));
        let tol = cfg.tolerances.solvability_tol;
        for e in energy_grid(cfg) {
            let orb = ctx.orbit(e).map_err(at_energy(e))?;
            let c = solvability_check(|pt| Ok(im_p1.eval(pt)?.im), &orb, tol)
                .map_err(|err| at_energy(e)(err.into()))?;
            rows.push(CheckRow {
                check: format!("solvability E={}", fmt15(e)),
                residual: c.value.abs(),
                passed: c.passed,
                detail: Vec::new(),
            });
        }
    }
    let failed: Vec<&CheckRow> = rows.iter().filter(|r| !r.passed).collect();
    let mut summary = format!("verify: {} checks, {} failed", rows.len(), failed.len());
    if flip_star {
        summary.push_str(" (star orientation flipped)");
    }
    const SHOWN: usize = 5;
    for r in failed.iter().take(SHOWN) {
        summary.push_str(&format!("\n  FAIL {} residual {:e}", r.check, r.residual));
        for d in &r.detail {
            summary.push_str(&format!("\n    {d}"));
        }
    }
    if failed.len() > SHOWN {
        summary.push_str(&format!("\n  ... {} more failures in the data table", failed.len() - SHOWN));
    }
    let any_failed = !failed.is_empty();
    let table = csv(
        "check,residual,passed",
        rows.iter().map(|r| format!("{},{},{}", r.check, fmt15(r.residual), r.passed)),
    );
    Ok(Output { summary, csv: table, json: json!(rows), failed: any_failed })
}

#[derive(Serialize)]
struct OracleRow {
    n: i64,
    e_bs: f64,
    re_e_oracle: f64,
    im_e_oracle: f64,
    gap: f64,
}

#[derive(Serialize)]
struct OracleBlock {
    h: f64,
    half_width: f64,
    points: usize,
    max_gap: f64,
    max_imag: f64,
    offset: i64,
    within_tol: bool,
    pairs: Vec<OracleRow>,
}

pub fn oracle(cfg: &RunConfig) -> Result<Output, Failure> {
    let oc = cfg.oracle.as_ref().ok_or_else(|| Failure::Config("missing [oracle] section".into()))?;
    let op = oc.operator().map_err(Failure::Config)?;
    let hs = require_h(cfg)?;
    let ctx = context(cfg)?;
    let (lo, hi) = (cfg.window.e_min, cfg.window.e_max);
    let slack = 0.1 * (hi - lo);
    let l = match oc.half_width {
        Some(l) => l,
        None => choose_half_width(op.potential(), hi + slack, 1.0, 64.0).map_err(oracle_failure)?,
    };
    let mut blocks = Vec::new();
    let mut summary = String::from("oracle:");
    for &h in &hs {
        let roots = bs_roots(&ctx, h, (lo, hi), &cfg.root_options()).map_err(|e| quantize_failure(h, e))?;
        let g = match &op {
            OracleOperator::Schrodinger { v, w } => build_schrodinger(v, w, h, l, oc.points),
            OracleOperator::FirstOrder { p, q } => build_matrix(p, q, h, l, oc.points),
        }
        .map_err(oracle_failure)?;
        for w in &g.warnings {
            summary.push_str(&format!("\n  warning: {w}"));
        }
        let ev = eigenvalues(&g, (lo - slack, hi + slack)).map_err(oracle_failure)?;
        let m = compare_spectra(&roots, &ev, oc.tol);
        summary.push_str(&format!(
            "\n  h = {h}: {} pairs, max gap {:e}, max |Im| {:e}, {} tolerance {:e}",
            m.pairs.len(),
            m.max_gap,
            m.max_imag,
            if m.within_tol() { "within" } else { "outside" },
            oc.tol
        ));
        blocks.push(OracleBlock {
            h,
            half_width: l,
            points: oc.points,
            max_gap: m.max_gap,
            max_imag: m.max_imag,
            offset: m.offset,
            within_tol: m.within_tol(),
            pairs: m
                .pairs
                .iter()
                .map(|p| OracleRow { n: p.n, e_bs: p.e_bs, re_e_oracle: p.e_oracle.re, im_e_oracle: p.e_oracle.im, gap: p.gap })
                .collect(),
        });
    }
    for pair in blocks.windows(2) {
        summary.push_str(&format!(
            "\n  gap ratio h = {} -> {}: {:.6}",
            pair[0].h,
            pair[1].h,
            pair[0].max_gap / pair[1].max_gap
        ));
    }
    let table = csv(
        "h,n,E_bs,Re_E_oracle,Im_E_oracle,gap",
        blocks.iter().flat_map(|b| {
            b.pairs.iter().map(move |p| {
                format!(
                    "{},{},{},{},{},{}",
                    fmt15(b.h),
                    p.n,
                    fmt15(p.e_bs),
                    fmt15(p.re_e_oracle),
                    fmt15(p.im_e_oracle),
                    fmt15(p.gap)
                )
            })
        }),
    );
    Ok(Output { summary, csv: table, json: json!(blocks), failed: false })
}
