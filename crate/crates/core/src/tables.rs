//! The two tables of lower bounds for the blowup of `min{u₁, u₂}` with
//! `Q₁ = Q₂ = Q`: from optimized pairs of one-corner functions, and from the
//! two extremal power-type functions.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corner::gamma_from_q;
use crate::error::{QmError, Result};
use crate::numerics::{maximize_2d, ToleranceConfig};
use crate::power::{q_tilde, qt_closed_form_p2};
use crate::pwl::{energy, pointwise_max, PiecewiseLinearFn};

/// The `Q` rows shared by both tables.
pub const TABLE_Q: [f64; 6] = [1.001, 1.01, 1.125, 2.0, 10.0, 100.0];
/// The `p` columns shared by both tables.
pub const TABLE_P: [f64; 3] = [1.2, 2.0, 100.0];

/// Extra room below `−ln(γ − 1)` for the log-corner search.
const LOG_MARGIN: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowKind {
    Table1,
    Table2,
    QtColumn,
    UpperBound,
}

impl fmt::Display for RowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowKind::Table1 => "table1",
            RowKind::Table2 => "table2",
            RowKind::QtColumn => "qt-column",
            RowKind::UpperBound => "upper-bound",
        })
    }
}

/// One table cell. `p` is absent for the `p`-independent upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    #[serde(rename = "Q")]
    pub q: f64,
    pub p: Option<f64>,
    pub value: f64,
    pub kind: RowKind,
}

fn check(q: f64, p: f64) -> Result<()> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(QmError::param(format!("Q = {q} must be finite and > 1")));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(QmError::param(format!("p = {p} must be finite and > 1")));
    }
    Ok(())
}

/// The reflection `z ↦ 1 − u(1 − z)` of a unit one-corner function with
/// quotient `gamma`, whose steep part ends at `z` (corner `1 − z`).
fn reflected_corner(gamma: f64, z: f64) -> Result<PiecewiseLinearFn> {
    let alpha = 1.0 / (1.0 + (gamma - 1.0) * z);
    PiecewiseLinearFn::new(vec![0.0, z, 1.0], vec![0.0, alpha * gamma * z, 1.0])
}

/// Energy of the minimum of two unit one-corner functions with quotient
/// `gamma` and corners at `1 − z1`, `1 − z2`.
///
/// Computed on the reflection, where the minimum becomes a maximum and the
/// corners sit at `z1`, `z2`; these may be far below the resolution of `f64`
/// near 1.
pub fn corner_pair_energy(gamma: f64, z1: f64, z2: f64, p: f64) -> Result<f64> {
    let w = pointwise_max(&reflected_corner(gamma, z1)?, &reflected_corner(gamma, z2)?)?;
    energy(&w, p, 0.0, 1.0)
}

/// Largest energy of `min{u₁, u₂}` over pairs of unit one-corner functions
/// with the quotient `γ(Q, p)`; the chord energy is 1, so this bounds the
/// blowup from below.
pub fn table1_row(q: f64, p: f64, cfg: &ToleranceConfig) -> Result<TableRow> {
    check(q, p)?;
    let gamma = gamma_from_q(q, p, cfg)?;
    // Search over θ = ln z; the optimal z scale like 1/γ when γ is large.
    let lo = -((gamma - 1.0).max(1.0).ln() + LOG_MARGIN);
    let f = |t1: f64, t2: f64| corner_pair_energy(gamma, t1.exp(), t2.exp(), p).unwrap_or(f64::NAN);
    let m = maximize_2d(f, [(lo, 0.0), (lo, 0.0)], cfg)?;
    Ok(TableRow { q, p: Some(p), value: m.value, kind: RowKind::Table1 })
}

/// `Q̃(Q, Q, p)`.
pub fn table2_row(q: f64, p: f64, cfg: &ToleranceConfig) -> Result<TableRow> {
    check(q, p)?;
    let value = q_tilde(q, q, p, cfg)?.q_tilde;
    Ok(TableRow { q, p: Some(p), value, kind: RowKind::Table2 })
}

/// The explicit `p = 2` lower bound `Q + max{bound1, bound2}` for `Q̃(Q, Q, 2)`.
pub fn qt_column_row(q: f64) -> Result<TableRow> {
    let b = qt_closed_form_p2(q, q)?;
    Ok(TableRow { q, p: Some(2.0), value: q + b.bound1.max(b.bound2), kind: RowKind::QtColumn })
}

/// `2Q²/(Q + 1)`.
pub fn upper_bound_row(q: f64) -> Result<TableRow> {
    let value = crate::bounds::min2_bound(q, q)?;
    Ok(TableRow { q, p: None, value, kind: RowKind::UpperBound })
}

/// Evaluates `f` on every `(Q, p)` cell, one thread per `Q`, and returns
/// the rows in table order.
fn grid<F>(f: F, cfg: &ToleranceConfig) -> Result<Vec<Vec<TableRow>>>
where
    F: Fn(f64, f64, &ToleranceConfig) -> Result<TableRow> + Sync,
{
    std::thread::scope(|s| {
        let handles: Vec<_> = TABLE_Q
            .iter()
            .map(|&q| {
                let f = &f;
                s.spawn(move || TABLE_P.iter().map(|&p| f(q, p, cfg)).collect::<Result<Vec<_>>>())
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("table worker panicked")).collect()
    })
}

/// All Table 1 cells, row by row, each row followed by its upper bound.
pub fn table1(cfg: &ToleranceConfig) -> Result<Vec<TableRow>> {
    let cells = grid(table1_row, cfg)?;
    let mut out = Vec::new();
    for (row, &q) in cells.into_iter().zip(&TABLE_Q) {
        out.extend(row);
        out.push(upper_bound_row(q)?);
    }
    Ok(out)
}

/// All Table 2 cells, row by row, each row followed by its upper bound and
/// the explicit `p = 2` bound.
pub fn table2(cfg: &ToleranceConfig) -> Result<Vec<TableRow>> {
    let cells = grid(table2_row, cfg)?;
    let mut out = Vec::new();
    for (row, &q) in cells.into_iter().zip(&TABLE_Q) {
        out.extend(row);
        out.push(upper_bound_row(q)?);
        out.push(qt_column_row(q)?);
    }
    Ok(out)
}
