//! One-corner functions: the optimal quasiminimizing constant `Q(γ, p)` of
//! a convex function with two slopes in ratio `γ`, its inverse, the optimal
//! unit one-corner function, and zig-zag functions built from two slopes.
//!
//! All formulas are written in terms of `L = ln γ` so that they stay finite
//! and accurate both for `γ → 1` (where the closed forms are 0/0) and for
//! `γ^p` far beyond the range of `f64`.

use serde::{Deserialize, Serialize};

use crate::error::{QmError, Result};
use crate::numerics::stable::{exp_m1_m_x, ln_1p_m_x, ln_expm1};
use crate::numerics::{find_root_bracketed, ToleranceConfig};
use crate::pwl::PiecewiseLinearFn;

/// Above this `p·ln γ` the constants are assembled from logarithms.
const LOG_DOMAIN: f64 = 600.0;

/// Optimal constant `Q` of a one-corner function together with the shape
/// parameter `k`: the ratio `a/b` of the two sides of the interval `(−a, b)`
/// around the corner on which the constant is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerConstants {
    pub k: f64,
    #[serde(rename = "Q")]
    pub q: f64,
}

/// A convex one-corner function: slope `alpha` left of `corner`, slope
/// `gamma·alpha` right of it, value `offset` at the corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneCornerSpec {
    pub gamma: f64,
    pub corner: f64,
    pub alpha: f64,
    pub offset: f64,
}

impl OneCornerSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 1.0 && self.gamma.is_finite()) {
            return Err(QmError::param("gamma must be finite and > 1"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(QmError::param("alpha must be finite and > 0"));
        }
        if !(self.corner.is_finite() && self.offset.is_finite()) {
            return Err(QmError::param("corner and offset must be finite"));
        }
        Ok(())
    }

    /// The function on `[lo, hi]`; the corner must lie strictly inside.
    pub fn to_pwl(&self, lo: f64, hi: f64) -> Result<PiecewiseLinearFn> {
        self.validate()?;
        if !(lo < self.corner && self.corner < hi) {
            return Err(QmError::param("corner must lie strictly inside the domain"));
        }
        let left = self.offset - self.alpha * (self.corner - lo);
        let right = self.offset + self.gamma * self.alpha * (hi - self.corner);
        PiecewiseLinearFn::new(vec![lo, self.corner, hi], vec![left, self.offset, right])
    }
}

/// The convex one-corner function on `[0, 1]` with `u(0) = 0`, `u(1) = 1`
/// and the largest energy allowed by its constant: slope `alpha` on
/// `(0, x0)` and `gamma·alpha` on `(x0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitCorner {
    pub gamma: f64,
    pub x0: f64,
    /// `1 − x0`, kept separately because `x0` approaches 1 for large `γ`.
    pub one_minus_x0: f64,
    pub alpha: f64,
}

impl UnitCorner {
    pub fn to_pwl(&self) -> Result<PiecewiseLinearFn> {
        if self.gamma == 1.0 {
            return PiecewiseLinearFn::linear(0.0, 0.0, 1.0, 1.0);
        }
        PiecewiseLinearFn::new(vec![0.0, self.x0, 1.0], vec![0.0, self.alpha * self.x0, 1.0])
    }
}

/// The two power exponents tangent to the optimal one-corner function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangencyExponents {
    pub alpha_low: f64,
    pub alpha_high: f64,
}

fn check_gamma_p(gamma: f64, p: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(QmError::param(format!("p = {p} must be finite and > 1")));
    }
    if !(gamma >= 1.0 && gamma.is_finite()) {
        return Err(QmError::param(format!("gamma = {gamma} must be finite and >= 1")));
    }
    Ok(())
}

/// Shared intermediate quantities for a corner with quotient `γ = 1 + h`.
struct CornerParts {
    h: f64,
    /// `ln γ`.
    l: f64,
    /// `ln(γ^p − 1)`.
    ln_e: f64,
    /// `ln α` for the optimal unit corner.
    ln_alpha: f64,
    /// `(γ^p − 1 − p(γ − 1)) / (γ^p − 1)`.
    d_over_e: f64,
}

fn parts(gamma: f64, p: f64) -> CornerParts {
    let h = gamma - 1.0;
    let l = h.ln_1p();
    let pl = p * l;
    let ln_e = ln_expm1(pl);
    // α = (p−1)/p · (γ^p − 1)/(γ^p − γ), and γ^p − γ = γ (γ^{p−1} − 1).
    let ln_alpha = ((p - 1.0) / p).ln() + ln_e - l - ln_expm1((p - 1.0) * l);
    let d_over_e = if pl > LOG_DOMAIN {
        1.0 - p * h * (-ln_e).exp()
    } else {
        // γ^p − 1 − p(γ−1) = (e^{pL} − 1 − pL) + p (L − h), both terms free
        // of cancellation for small h.
        (exp_m1_m_x(pl) + p * ln_1p_m_x(h)) / pl.exp_m1()
    };
    CornerParts { h, l, ln_e, ln_alpha, d_over_e }
}

/// Optimal quasiminimizing constant `Q` and shape parameter `k` of a convex
/// one-corner function whose slopes have quotient `gamma`.
///
/// `Q = (p−1)^{p−1}(γ^p−1)^p / (p^p (γ^p−γ)^{p−1} (γ−1))`, evaluated as
/// `α^{p−1} (γ^p − 1)/(p(γ − 1))` with `α` the lower slope of the optimal
/// unit corner. At `γ = 1` the limits `Q = 1`, `k = 1` are returned.
pub fn corner_constant(gamma: f64, p: f64) -> Result<CornerConstants> {
    check_gamma_p(gamma, p)?;
    if gamma == 1.0 {
        return Ok(CornerConstants { k: 1.0, q: 1.0 });
    }
    let c = parts(gamma, p);
    let ln_q = (p - 1.0) * c.ln_alpha + c.ln_e - p.ln() - c.h.ln();
    let q = if p * c.l > LOG_DOMAIN {
        ln_q.exp()
    } else {
        c.ln_alpha.exp().powf(p - 1.0) * (p * c.l).exp_m1() / (p * c.h)
    };
    let k = (p - 1.0) * c.h / c.d_over_e - 1.0;
    Ok(CornerConstants { k, q: q.max(1.0) })
}

/// The form of `Q(γ, p)` that keeps `k` explicit:
/// `(γ^p + k)(1 + k)^{p−1} / (γ + k)^p`.
pub fn corner_constant_via_k(gamma: f64, p: f64) -> Result<f64> {
    let cc = corner_constant(gamma, p)?;
    let k = cc.k;
    let l = gamma.ln();
    // Factor γ^p out of the first bracket and γ^p out of (γ+k)^p.
    let ln_q = p * l + (k * (-p * l).exp()).ln_1p() + (p - 1.0) * k.ln_1p()
        - p * (gamma.ln() + (k / gamma).ln_1p());
    Ok(ln_q.exp())
}

/// The unique `γ ≥ 1` with `corner_constant(γ, p).q == q`.
///
/// `Q(γ, p)` is strictly increasing in `γ` and satisfies
/// `Q ≤ γ^{p−1} ≤ p^p Q/(p−1)^{p−1}`, which brackets the root; the search
/// runs in `ln γ` so that huge quotients are resolved to full relative
/// precision.
pub fn gamma_from_q(q: f64, p: f64, cfg: &ToleranceConfig) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(QmError::param(format!("p = {p} must be finite and > 1")));
    }
    if !(q >= 1.0 && q.is_finite()) {
        return Err(QmError::param(format!("Q = {q} must be finite and >= 1")));
    }
    if q == 1.0 {
        return Ok(1.0);
    }
    let ln_q = q.ln();
    let t_lo = ln_q / (p - 1.0);
    let t_hi = (p * p.ln() - (p - 1.0) * (p - 1.0).ln() + ln_q) / (p - 1.0);
    let f = |t: f64| {
        let gamma = t.exp();
        match corner_constant(gamma, p) {
            Ok(cc) => cc.q.ln() - ln_q,
            Err(_) => f64::NAN,
        }
    };
    // The sandwich is sharp only in the limits, so the ends already bracket;
    // a small widening guards against rounding at the ends.
    let t = find_root_bracketed(f, 0.5 * t_lo, 1.01 * t_hi + 1e-12, cfg)?;
    Ok(t.exp())
}

/// The optimal convex one-corner function on `[0, 1]` with quotient `gamma`.
///
/// Its corner sits at `x0 = k/(k+1)` and its lower slope is
/// `α = 1/(γ + x0(1 − γ))`, which makes `u(1) = 1`.
pub fn optimal_unit_corner(gamma: f64, p: f64) -> Result<UnitCorner> {
    check_gamma_p(gamma, p)?;
    if gamma == 1.0 {
        return Ok(UnitCorner { gamma, x0: 0.5, one_minus_x0: 0.5, alpha: 1.0 });
    }
    let c = parts(gamma, p);
    // 1 − x0 = 1/(k+1) = D / ((p−1)(γ^p−1)(γ−1)).
    let one_minus_x0 = c.d_over_e / ((p - 1.0) * c.h);
    let x0 = 1.0 - one_minus_x0;
    let alpha = c.ln_alpha.exp();
    Ok(UnitCorner { gamma, x0, one_minus_x0, alpha })
}

/// The exponents `α < 1 < αγ` with `Q_α = Q_{αγ} = Q(γ, p)`: the powers
/// `x^α` tangent to the two slopes of the optimal unit corner.
pub fn tangency_exponents(gamma: f64, p: f64) -> Result<TangencyExponents> {
    let u = optimal_unit_corner(gamma, p)?;
    Ok(TangencyExponents { alpha_low: u.alpha, alpha_high: u.alpha * gamma })
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// Best quasiminimizing constant of a strictly increasing zig-zag function
/// whose segment slopes alternate between two values.
///
/// `corners` are the abscissae between consecutive segments. The constant
/// equals the one-corner constant for the quotient of the two slopes and
/// does not depend on where the corners are.
pub fn zigzag_constant(slopes: &[f64], corners: &[f64], p: f64) -> Result<f64> {
    let (lo, hi) = zigzag_slopes(slopes, corners)?;
    Ok(corner_constant(hi / lo, p)?.q)
}

fn zigzag_slopes(slopes: &[f64], corners: &[f64]) -> Result<(f64, f64)> {
    if slopes.len() < 2 {
        return Err(QmError::param("a zig-zag needs at least two segments"));
    }
    if corners.len() + 1 != slopes.len() {
        return Err(QmError::param("need exactly one corner between consecutive slopes"));
    }
    if corners.iter().any(|c| !c.is_finite()) || corners.windows(2).any(|w| w[0] >= w[1]) {
        return Err(QmError::param("corners must be finite and strictly increasing"));
    }
    if slopes.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(QmError::param("slopes must be positive and finite"));
    }
    let (a, b) = (slopes[0], slopes[1]);
    if same(a, b) {
        return Err(QmError::param("slopes must take two distinct values"));
    }
    for (i, s) in slopes.iter().enumerate() {
        let expect = if i % 2 == 0 { a } else { b };
        if !same(*s, expect) {
            return Err(QmError::param("slopes must alternate between two values"));
        }
    }
    Ok((a.min(b), a.max(b)))
}

/// The zig-zag with the given slopes and corners on `[lo, hi]`, starting at 0.
pub fn zigzag_function(slopes: &[f64], corners: &[f64], lo: f64, hi: f64) -> Result<PiecewiseLinearFn> {
    zigzag_slopes(slopes, corners)?;
    if !(lo < corners[0] && *corners.last().unwrap() < hi) {
        return Err(QmError::param("corners must lie strictly inside the domain"));
    }
    let mut xs = vec![lo];
    xs.extend_from_slice(corners);
    xs.push(hi);
    PiecewiseLinearFn::from_slopes(xs, 0.0, slopes)
}
