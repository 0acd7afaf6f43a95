//! Run configuration: one TOML file with `[problem]`, `[window]`,
//! `[tolerances]`, `[oracle]` and `[output]` sections.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use ptbs::bsaction::{ActionOptions, S2Form};
use ptbs::classical::WellConfig;
use ptbs::quantize::RootOptions;
use ptbs::symbol::{parse_expr, Expr, PhasePoint, SymbolSeries};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Problem,
    pub window: Window,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub oracle: Option<OracleConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub p0: String,
    #[serde(default)]
    pub p1: Option<String>,
    #[serde(default)]
    pub p2: Option<String>,
    /// Phase-space point near the well bottom used to seed orbits.
    #[serde(default = "default_seed")]
    pub seed: [f64; 2],
    #[serde(default)]
    pub s2_form: S2FormName,
}

fn default_seed() -> [f64; 2] {
    [0.0, 1.0]
}

#[derive(Debug, Default, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum S2FormName {
    #[default]
    Nominal,
    Calibrated,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub e_min: f64,
    pub e_max: f64,
    pub h: Option<f64>,
    pub h_list: Option<Vec<f64>>,
    /// Number of energies in the `actions` table.
    #[serde(default = "default_grid")]
    pub grid: usize,
}

fn default_grid() -> usize {
    11
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub rk_tol: f64,
    pub level_tol: f64,
    pub closure_tol: f64,
    pub critical_tol: f64,
    pub max_period: f64,
    pub root_tol: f64,
    pub max_iter: usize,
    #[serde(rename = "deltaE", alias = "delta_e")]
    pub delta_e: Option<f64>,
    pub stencil: f64,
    pub loop_nodes: usize,
    pub solvability_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let well = WellConfig::<f64>::new(PhasePoint::new(0.0, 1.0), 0.0, 1.0);
        let action = ActionOptions::<f64>::default();
        let roots = RootOptions::<f64>::default();
        Tolerances {
            rk_tol: well.rk_tol,
            level_tol: well.level_tol,
            closure_tol: well.closure_tol,
            critical_tol: well.critical_tol,
            max_period: well.max_period,
            root_tol: roots.root_tol,
            max_iter: roots.max_iter,
            delta_e: action.delta_e,
            stencil: action.stencil,
            loop_nodes: action.loop_nodes,
            solvability_tol: action.solvability_tol,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default)]
    pub form: OracleForm,
    /// Schrödinger form `(hD)² + V + ih W`.
    pub v: Option<String>,
    pub w: Option<String>,
    /// First-order form `(hD)² + p hD + q`.
    pub p: Option<String>,
    pub q: Option<String>,
    #[serde(alias = "L")]
    pub half_width: Option<f64>,
    #[serde(default = "default_points", alias = "n")]
    pub points: usize,
    #[serde(default = "default_match_tol")]
    pub tol: f64,
}

fn default_points() -> usize {
    2000
}

fn default_match_tol() -> f64 {
    3e-4
}

#[derive(Debug, Default, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum OracleForm {
    #[default]
    Schrodinger,
    FirstOrder,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub format: Option<Format>,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, Copy, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Oracle operator with parsed coefficients.
pub enum OracleOperator {
    Schrodinger { v: Expr, w: Expr },
    FirstOrder { p: Expr, q: Expr },
}

impl OracleOperator {
    /// Real potential used to size the box.
    pub fn potential(&self) -> &Expr {
        match self {
            OracleOperator::Schrodinger { v, .. } => v,
            OracleOperator::FirstOrder { q, .. } => q,
        }
    }
}

pub fn load(path: &Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<RunConfig, String> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| e.to_string())?;
    cfg.validate()?;
    Ok(cfg)
}

fn expr(field: &str, src: &str) -> Result<Expr, String> {
    parse_expr(src).map_err(|e| format!("{field}: {e}"))
}

fn positive(field: &str, v: f64) -> Result<(), String> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(format!("{field} must be positive and finite, got {v}"))
    }
}

impl RunConfig {
    fn validate(&self) -> Result<(), String> {
        self.series()?;
        let w = &self.window;
        if !(w.e_min.is_finite() && w.e_max.is_finite() && w.e_min < w.e_max) {
            return Err(format!("window: need e_min < e_max, got [{}, {}]", w.e_min, w.e_max));
        }
        if w.h.is_some() && w.h_list.is_some() {
            return Err("window: give either h or h_list, not both".into());
        }
        for h in self.h_values() {
            positive("window.h", h)?;
        }
        if w.grid == 0 {
            return Err("window.grid must be at least 1".into());
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("rk_tol", t.rk_tol),
            ("level_tol", t.level_tol),
            ("closure_tol", t.closure_tol),
            ("critical_tol", t.critical_tol),
            ("max_period", t.max_period),
            ("root_tol", t.root_tol),
            ("stencil", t.stencil),
            ("solvability_tol", t.solvability_tol),
        ] {
            positive(&format!("tolerances.{name}"), v)?;
        }
        if let Some(d) = t.delta_e {
            positive("tolerances.deltaE", d)?;
        }
        if t.max_iter == 0 || t.loop_nodes < 4 {
            return Err("tolerances: max_iter must be positive and loop_nodes at least 4".into());
        }
        if let Some(o) = &self.oracle {
            o.operator()?;
            if let Some(l) = o.half_width {
                positive("oracle.half_width", l)?;
            }
            positive("oracle.tol", o.tol)?;
        }
        Ok(())
    }

    pub fn series(&self) -> Result<SymbolSeries, String> {
        let p = &self.problem;
        let mut coeffs = vec![expr("problem.p0", &p.p0)?];
        if p.p1.is_some() || p.p2.is_some() {
            coeffs.push(expr("problem.p1", p.p1.as_deref().unwrap_or("0"))?);
        }
        if let Some(p2) = &p.p2 {
            coeffs.push(expr("problem.p2", p2)?);
        }
        SymbolSeries::new(coeffs).map_err(|e| e.to_string())
    }

    /// `h` values in the order given.
    pub fn h_values(&self) -> Vec<f64> {
        match (&self.window.h, &self.window.h_list) {
            (Some(h), _) => vec![*h],
            (None, Some(l)) => l.clone(),
            (None, None) => Vec::new(),
        }
    }

    pub fn well(&self, pad: f64) -> WellConfig<f64> {
        let t = &self.tolerances;
        let seed = PhasePoint::new(self.problem.seed[0], self.problem.seed[1]);
        let mut w = WellConfig::new(seed, self.window.e_min - pad, self.window.e_max + pad);
        w.rk_tol = t.rk_tol;
        w.level_tol = t.level_tol;
        w.closure_tol = t.closure_tol;
        w.critical_tol = t.critical_tol;
        w.max_period = t.max_period;
        w
    }

    pub fn action_options(&self) -> ActionOptions<f64> {
        let t = &self.tolerances;
        ActionOptions {
            delta_e: t.delta_e,
            loop_nodes: t.loop_nodes,
            stencil: t.stencil,
            s2_form: match self.problem.s2_form {
                S2FormName::Nominal => S2Form::Nominal,
                S2FormName::Calibrated => S2Form::Calibrated,
            },
            solvability_tol: t.solvability_tol,
        }
    }

    pub fn root_options(&self) -> RootOptions<f64> {
        RootOptions { root_tol: self.tolerances.root_tol, max_iter: self.tolerances.max_iter }
    }
}

impl OracleConfig {
    pub fn operator(&self) -> Result<OracleOperator, String> {
        let form = self.form;
        fn need<'a>(name: &str, v: &'a Option<String>, form: OracleForm) -> Result<&'a str, String> {
            v.as_deref().ok_or_else(|| format!("oracle.{name} is required for form {form:?}"))
        }
        match self.form {
            OracleForm::Schrodinger => Ok(OracleOperator::Schrodinger {
                v: expr("oracle.v", need("v", &self.v, form)?)?,
                w: expr("oracle.w", self.w.as_deref().unwrap_or("0"))?,
            }),
            OracleForm::FirstOrder => Ok(OracleOperator::FirstOrder {
                p: expr("oracle.p", self.p.as_deref().unwrap_or("0"))?,
                q: expr("oracle.q", need("q", &self.q, form)?)?,
            }),
        }
    }
}
