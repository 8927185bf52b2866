//! The `qmlab` command line.

pub mod args;
pub mod render;

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use clap::Parser;
use qmlab_core::bounds::{km_bound, min2_bound, min3_bound, min3_via_system};
use qmlab_core::corner::{corner_constant, gamma_from_q, optimal_unit_corner};
use qmlab_core::lp_blowup::solve_blowup_lp_with;
use qmlab_core::pasting::{interval_example, p_sweep, sharp_example, PasteExample, PasteVariant};
use qmlab_core::power::{alpha_branches, q_alpha, q_tilde};
use qmlab_core::pwl::{concave_envelope, energy, pointwise_min, quasimin_constant, QmMode};
use qmlab_core::tables::{table1, table2};
use qmlab_core::{PiecewiseLinearFn, QmError, ToleranceConfig};
use serde::Serialize;
use serde_json::{json, Value};

use args::{BoundCmd, Cli, Command, CornerCmd, FnCmd, FnInput, ModeArg, PasteCmd, PowerCmd, TolArgs, VariantArg};
use render::{render, Output};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Systems with more functions than this have no closed form to compare
/// against; their LP output is marked exploratory.
const VERIFIED_LP_N: usize = 3;

#[derive(Debug)]
enum Failure {
    Invalid(String),
    Numerical(String),
}

impl From<QmError> for Failure {
    fn from(e: QmError) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

type Res<T> = Result<T, Failure>;

fn to_value<T: Serialize>(v: &T) -> Res<Value> {
    serde_json::to_value(v).map_err(|e| Failure::Invalid(e.to_string()))
}

fn tolerances(t: &TolArgs) -> Res<ToleranceConfig> {
    let mut cfg = ToleranceConfig::default();
    if let Some(v) = t.tol_root {
        cfg.root_abs_tol = v;
    }
    if let Some(v) = t.tol_opt {
        cfg.opt_rel_tol = v;
    }
    if let Some(v) = t.tol_lp {
        cfg.lp_feas_tol = v;
    }
    if let Some(v) = t.max_iter {
        cfg.max_iter = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn read_fn(path: &Path) -> Res<PiecewiseLinearFn> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    PiecewiseLinearFn::from_json(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

/// Loads the input functions, restricted to `--interval` when given.
fn load(input: &FnInput, count: usize) -> Res<Vec<PiecewiseLinearFn>> {
    if input.input.len() != count {
        return Err(Failure::Invalid(format!("expected {count} --input file(s), got {}", input.input.len())));
    }
    let fs: Vec<PiecewiseLinearFn> = input.input.iter().map(|p| read_fn(p)).collect::<Res<_>>()?;
    match &input.interval {
        None => Ok(fs),
        Some(iv) if iv.len() == 2 => fs.iter().map(|f| Ok(f.restrict(iv[0], iv[1])?)).collect(),
        Some(_) => Err(Failure::Invalid("--interval takes two numbers a,b".into())),
    }
}

fn paste_record(ex: &PasteExample) -> Res<Value> {
    Ok(json!({
        "achieved_energy": ex.achieved_energy,
        "claimed_bound": ex.claimed_bound,
        "a_term": ex.a_term,
        "reflected": ex.reflected,
        "omega1": to_value(&ex.omega1)?,
        "u": to_value(&ex.u)?,
        "u1": to_value(&ex.u1)?,
        "u2": to_value(&ex.u2)?,
    }))
}

fn execute(cmd: &Command, cfg: &ToleranceConfig) -> Res<Output> {
    let rec = |v: Value| Ok(Output::Record(v));
    match cmd {
        Command::Corner(c) => match *c {
            CornerCmd::Q { gamma, p } => {
                let c = corner_constant(gamma, p)?;
                rec(json!({ "Q": c.q, "k": c.k }))
            }
            CornerCmd::Gamma { q, p } => rec(json!({ "gamma": gamma_from_q(q, p, cfg)? })),
            CornerCmd::Optimal { gamma, p } => {
                let c = optimal_unit_corner(gamma, p)?;
                let e = energy(&c.to_pwl()?, p, 0.0, 1.0)?;
                rec(json!({
                    "gamma": c.gamma,
                    "x0": c.x0,
                    "one_minus_x0": c.one_minus_x0,
                    "alpha": c.alpha,
                    "energy": e,
                }))
            }
        },
        Command::Power(c) => match *c {
            PowerCmd::Qalpha { alpha, p } => rec(json!({ "Q_alpha": q_alpha(alpha, p)? })),
            PowerCmd::Branches { q, p } => rec(to_value(&alpha_branches(q, p, cfg)?)?),
            PowerCmd::Qtilde { q1, q2, p } => rec(to_value(&q_tilde(q1, q2, p, cfg)?)?),
        },
        Command::Bound(c) => match *c {
            BoundCmd::Km { q1, q2 } => rec(json!({ "bound": km_bound(q1, q2)? })),
            BoundCmd::Min2 { q1, q2 } => rec(json!({ "bound": min2_bound(q1, q2)? })),
            BoundCmd::Min3 { q1, q2, q3 } => rec(json!({ "bound": min3_bound(q1, q2, q3)? })),
            BoundCmd::System { q1, q2, q3 } => rec(to_value(&min3_via_system(q1, q2, q3)?)?),
        },
        Command::Lp { q, relaxed } => {
            let sol = solve_blowup_lp_with(q, *relaxed, cfg)?;
            let multipliers: Vec<Value> = sol
                .multipliers
                .iter()
                .map(|(ineq, v)| json!({ "inequality": ineq.to_string(), "multiplier": v }))
                .collect();
            rec(json!({
                "bound": sol.bound,
                "n": q.len(),
                "status": if q.len() > VERIFIED_LP_N { "exploratory" } else { "verified" },
                "multipliers": multipliers,
            }))
        }
        Command::Blowup { q1, q2, p } => {
            let r = q_tilde(*q1, *q2, *p, cfg)?;
            rec(json!({
                "lower": r.q_tilde,
                "upper": min2_bound(*q1, *q2)?,
                "km": km_bound(*q1, *q2)?,
                "lb1": r.lb1,
                "lb2": r.lb2,
            }))
        }
        Command::Paste(c) => match c {
            PasteCmd::Sharp { q1, q2, p } => rec(paste_record(&sharp_example(*q1, *q2, *p, cfg)?)?),
            PasteCmd::Interval { q1, q2, p, variant } => {
                let v = match variant {
                    VariantArg::Standard => PasteVariant::Standard,
                    VariantArg::Second => PasteVariant::Second,
                };
                rec(paste_record(&interval_example(*q1, *q2, *p, v, cfg)?)?)
            }
            PasteCmd::Sweep { q1, q2, p } => rec(to_value(&p_sweep(*q1, *q2, p, cfg)?)?),
        },
        Command::Fn(c) => match c {
            FnCmd::Energy { input, p } => {
                let f = &load(input, 1)?[0];
                let (a, b) = f.domain();
                rec(json!({ "energy": energy(f, *p, a, b)? }))
            }
            FnCmd::Qconst { input, p, mode } => {
                let f = &load(input, 1)?[0];
                let m = match mode {
                    ModeArg::Free => QmMode::Free,
                    ModeArg::Super => QmMode::Super,
                };
                rec(json!({ "Q": quasimin_constant(f, *p, m, cfg)? }))
            }
            FnCmd::Min { input, .. } => {
                let fs = load(input, 2)?;
                rec(to_value(&pointwise_min(&fs[0], &fs[1])?)?)
            }
            FnCmd::Envelope { input, .. } => {
                let f = &load(input, 1)?[0];
                let (a, b) = f.domain();
                rec(to_value(&concave_envelope(f, a, b)?)?)
            }
        },
        Command::Table { name } => Ok(Output::Rows(if name == "1" { table1(cfg)? } else { table2(cfg)? })),
    }
}

/// Parses `argv`, runs the command and writes its output; returns the exit
/// code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let result = tolerances(&cli.tol)
        .and_then(|cfg| execute(&cli.command, &cfg))
        .and_then(|out| render(&out, cli.format).map_err(Failure::Invalid));
    let text = match result {
        Ok(t) => t,
        Err(Failure::Invalid(m)) => {
            eprintln!("error: {m}");
            return EXIT_INVALID;
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            return EXIT_NUMERICAL;
        }
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = fs::write(path, text) {
                eprintln!("error: {}: {e}", path.display());
                return EXIT_INVALID;
            }
        }
        None => print!("{text}"),
    }
    EXIT_OK
}
