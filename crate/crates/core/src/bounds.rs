//! Closed-form upper bounds for the quasisuperminimizing constant of the
//! minimum of two or three quasisuperminimizers.

use serde::Serialize;

use crate::error::{QmError, Result};
use crate::numerics::solve_dense_linear;

fn check_q(qs: &[f64]) -> Result<()> {
    for &q in qs {
        if !(q >= 1.0 && q.is_finite()) {
            return Err(QmError::param(format!("Q = {q} must be finite and >= 1")));
        }
    }
    Ok(())
}

/// The classical bound `min{Q₁Q₂, Q₁ + Q₂}`.
pub fn km_bound(q1: f64, q2: f64) -> Result<f64> {
    check_q(&[q1, q2])?;
    Ok((q1 * q2).min(q1 + q2))
}

/// `(Q₁ + Q₂ − 2) Q₁Q₂ / (Q₁Q₂ − 1)`, and 1 when both constants are 1.
pub fn min2_bound(q1: f64, q2: f64) -> Result<f64> {
    check_q(&[q1, q2])?;
    if q1 == 1.0 && q2 == 1.0 {
        return Ok(1.0);
    }
    if q1 == 1.0 || q2 == 1.0 {
        return Ok(q1.max(q2));
    }
    // In terms of a = Q₁−1, b = Q₂−1 (exact by Sterbenz) to avoid cancellation;
    // ordered so the result is bitwise symmetric.
    let (q1, q2) = (q1.min(q2), q1.max(q2));
    let (a, b) = (q1 - 1.0, q2 - 1.0);
    Ok((a + b) * q1 * q2 / (a * b + a + b))
}

/// `Q₁Q₂Q₃/P · (R₁ + R₂ + R₃)` with
/// `P = 2Q₁Q₂Q₃ − Q₁Q₂ − Q₂Q₃ − Q₃Q₁ + 1` and
/// `R_i = (Q_j−1)(Q_k−1)(Q_j+Q_k−2)/(Q_jQ_k−1)`.
///
/// When one constant is 1 this is the two-function bound of the other two;
/// when two are 1 it is the third.
pub fn min3_bound(q1: f64, q2: f64, q3: f64) -> Result<f64> {
    check_q(&[q1, q2, q3])?;
    let rest: Vec<f64> = [q1, q2, q3].iter().copied().filter(|&v| v != 1.0).collect();
    match rest.len() {
        0 => return Ok(1.0),
        1 => return Ok(rest[0]),
        2 => return min2_bound(rest[0], rest[1]),
        _ => {}
    }
    // With a_i = Q_i − 1 every term below is positive:
    // P = a₁a₂ + a₂a₃ + a₃a₁ + 2a₁a₂a₃, R_i = a_j a_k (a_j + a_k)/(a_j a_k + a_j + a_k).
    let a = [q1 - 1.0, q2 - 1.0, q3 - 1.0];
    let p = a[0] * a[1] + a[1] * a[2] + a[2] * a[0] + 2.0 * a[0] * a[1] * a[2];
    let r: f64 = (0..3)
        .map(|i| {
            let (x, y) = (a[(i + 1) % 3], a[(i + 2) % 3]);
            x * y * (x + y) / (x * y + x + y)
        })
        .sum();
    Ok(q1 * q2 * q3 / p * r)
}

/// Solution of the cancellation system for three functions.
///
/// `x` are the multipliers of the tests against `v` alone, `x_pair[i][j]`
/// those of the tests against `min{u_j, v}` for `u_i`, and `x_hat[i]` those
/// against the minimum of all other functions and `v`. `y_i` is the common
/// value `(1 − Q_j) x_{jk} = (1 − Q_k) x_{kj}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripleSystemReport {
    pub x: [f64; 3],
    pub y: [f64; 3],
    pub x_pair: [[f64; 3]; 3],
    pub x_hat: [f64; 3],
    /// Coefficient of `|v'|^p` where all three functions lie below `v`.
    pub q_a0: f64,
    /// Coefficient where only `u_k` lies above `v`, indexed by `k`.
    pub q_a1: [f64; 3],
    /// Coefficient where only the minimum `u_i` lies below `v`, indexed by `i`.
    pub q_a2: [f64; 3],
}

/// Three-function bound through the reduced linear system
/// `(SR − I) x = S c`, `y = c − R x`, with `S_i = Q_i/(Q_i − 1)`.
pub fn min3_via_system(q1: f64, q2: f64, q3: f64) -> Result<TripleSystemReport> {
    let q = [q1, q2, q3];
    for &v in &q {
        if !(v > 1.0 && v.is_finite()) {
            return Err(QmError::param(format!("Q = {v} must be finite and > 1")));
        }
    }
    let s: Vec<f64> = q.iter().map(|v| v / (v - 1.0)).collect();
    let sm = [[0.0, s[2], s[1]], [s[2], 0.0, s[0]], [s[1], s[0], 0.0]];
    let rm = [[q[0], 1.0, 1.0], [1.0, q[1], 1.0], [1.0, 1.0, q[2]]];
    let mut a = vec![vec![0.0; 3]; 3];
    let mut rhs = vec![0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            a[i][j] = (0..3).map(|l| sm[i][l] * rm[l][j]).sum::<f64>() - if i == j { 1.0 } else { 0.0 };
        }
        rhs[i] = (0..3).map(|l| sm[i][l] * q[l]).sum();
    }
    let xv = solve_dense_linear(&a, &rhs)?;
    let x = [xv[0], xv[1], xv[2]];
    let mut y = [0.0; 3];
    for i in 0..3 {
        y[i] = q[i] - (0..3).map(|j| rm[i][j] * x[j]).sum::<f64>();
    }

    // x_{ab} = y_c / (1 − Q_a) with c the remaining index.
    let mut x_pair = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            if a != b {
                let c = 3 - a - b;
                x_pair[a][b] = y[c] / (1.0 - q[a]);
            }
        }
    }
    // x̂_i from the cancellation of u_j's gradient: x_j + x_{jk} = Q_i (x_{ij} + x̂_i).
    let mut x_hat = [0.0; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        x_hat[i] = (x[j] + x_pair[j][k]) / q[i] - x_pair[i][j];
    }

    let q_a0: f64 = (0..3).map(|i| q[i] * x[i]).sum();
    let mut q_a1 = [0.0; 3];
    let mut q_a2 = [0.0; 3];
    for k in 0..3 {
        q_a1[k] = q_a0 - q[k] * x[k] + x[k];
    }
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        q_a2[i] = q[i] * (x[i] + x_pair[i][j] + x_pair[i][k] + x_hat[i]);
    }
    Ok(TripleSystemReport { x, y, x_pair, x_hat, q_a0, q_a1, q_a2 })
}

/// The interval `(Q₁ + Q₂ − 2, Q₁ + Q₂ − 1)` that strictly contains the
/// two-function bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sandwich {
    pub lower: f64,
    pub upper: f64,
}

pub fn min2_sandwich(q1: f64, q2: f64) -> Result<Sandwich> {
    if !(q1 > 1.0 && q2 > 1.0 && q1.is_finite() && q2.is_finite()) {
        return Err(QmError::param("need Q1, Q2 finite and > 1"));
    }
    Ok(Sandwich { lower: q1 + q2 - 2.0, upper: q1 + q2 - 1.0 })
}
