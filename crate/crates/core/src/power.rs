//! Power-type quasiminimizers `x^α` on `(0, 1)` and the blowup of their
//! minimum.
//!
//! `x^α` has optimal quasiminimizing constant `Q_α = α^p/(p(α−1)+1)`. For
//! every `Q > 1` there are two exponents `1 − 1/p < α' < 1 < α` with
//! `Q_α' = Q_α = Q`. The minimum of `x^{α₁}` and the reflected
//! `1 − (1 − x)^{α₂}` has energy `Q̃` strictly above both constants, which
//! gives an explicit lower bound for the blowup.

use serde::{Deserialize, Serialize};

use crate::corner::{corner_constant, optimal_unit_corner};
use crate::error::{QmError, Result};
use crate::numerics::stable::{exp_m1_m_x, ln_1p_m_x, softplus};
use crate::numerics::{find_root_bracketed, ToleranceConfig};

/// `x^α` or its reflection `1 − (1 − x)^α`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PowerForm {
    Increasing,
    Reflected,
}

/// A power-type quasiminimizer on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerQM {
    pub alpha: f64,
    pub form: PowerForm,
    pub p: f64,
}

impl PowerQM {
    pub fn new(alpha: f64, form: PowerForm, p: f64) -> Result<Self> {
        q_alpha(alpha, p)?;
        Ok(PowerQM { alpha, form, p })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let pw = |t: f64| if t <= 0.0 { 0.0 } else { (self.alpha * t.ln()).exp() };
        match self.form {
            PowerForm::Increasing => pw(x),
            PowerForm::Reflected => 1.0 - pw(1.0 - x),
        }
    }

    /// Optimal quasiminimizing constant, the same for both forms.
    pub fn constant(&self) -> f64 {
        q_alpha(self.alpha, self.p).expect("validated on construction")
    }
}

/// `Q_α = α^p / (p(α − 1) + 1)`.
pub fn q_alpha(alpha: f64, p: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(QmError::param(format!("p = {p} must be finite and > 1")));
    }
    if !alpha.is_finite() {
        return Err(QmError::param("alpha must be finite"));
    }
    let denom = p * (alpha - 1.0) + 1.0;
    if !(denom > 0.0) {
        return Err(QmError::param(format!("alpha = {alpha} must exceed 1 - 1/p")));
    }
    if alpha == 1.0 {
        return Ok(1.0);
    }
    let la = alpha.ln();
    if p * la.abs() > 600.0 {
        Ok((p * la - denom.ln()).exp())
    } else {
        Ok(alpha.powf(p) / denom)
    }
}

/// The two exponents with a given constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaBranches {
    /// The exponent in `(1 − 1/p, 1)`.
    pub alpha_prime: f64,
    /// The exponent above 1.
    pub alpha: f64,
    /// `p(α' − 1) + 1`, the energy exponent of `x^{α'}`.
    pub beta_prime: f64,
    /// `p(α − 1) + 1`.
    pub beta: f64,
}

/// `ln Q_α` with `α = 1 + (e^s − 1)/p`, i.e. `s = ln(p(α − 1) + 1)`.
///
/// Written as `p(ln(1+u) − u) + (e^s − 1 − s)` with `u = (e^s − 1)/p`, which
/// avoids the cancellation of the naive `p ln α − s` near `s = 0`.
fn ln_q_of_s(s: f64, p: f64) -> f64 {
    let u = s.exp_m1() / p;
    if s.abs() < 1.0 {
        p * ln_1p_m_x(u) + exp_m1_m_x(s)
    } else {
        p * u.ln_1p() - s
    }
}

/// Both roots of `Q_α = q`, found in the coordinate `s = ln(p(α−1)+1)`.
///
/// In that coordinate `ln Q_α` is strictly decreasing for `s < 0` and
/// strictly increasing for `s > 0`, and both branches reach every value,
/// so each root is bracketed by doubling `|s|` from 1.
pub fn alpha_branches(q: f64, p: f64, cfg: &ToleranceConfig) -> Result<AlphaBranches> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(QmError::param(format!("p = {p} must be finite and > 1")));
    }
    if !(q > 1.0 && q.is_finite()) {
        return Err(QmError::param(format!("Q = {q} must be finite and > 1")));
    }
    let ln_q = q.ln();
    let g = |s: f64| ln_q_of_s(s, p) - ln_q;
    let bracket = |dir: f64| -> Result<f64> {
        let mut s = dir;
        for _ in 0..64 {
            if g(s) > 0.0 {
                return Ok(s);
            }
            s *= 2.0;
        }
        Err(QmError::NonConvergence { solver: "alpha_branches", iterations: 64 })
    };
    let s_lo = find_root_bracketed(g, bracket(-1.0)?, 0.0, cfg)?;
    let s_hi = find_root_bracketed(g, 0.0, bracket(1.0)?, cfg)?;
    Ok(AlphaBranches {
        alpha_prime: 1.0 + s_lo.exp_m1() / p,
        alpha: 1.0 + s_hi.exp_m1() / p,
        beta_prime: s_lo.exp(),
        beta: s_hi.exp(),
    })
}

/// `x^{α₁} + (1 − x)^{α₂} − 1` at `x = 1/(1 + e^{−t})`.
///
/// Whichever of the two powers is nearer 1 goes through `expm1`, so the
/// residual keeps full relative accuracy even when `x` or `1 − x` is far
/// below machine epsilon.
fn crossing_residual(t: f64, alpha1: f64, alpha2: f64) -> f64 {
    let a = -alpha1 * softplus(-t);
    let b = -alpha2 * softplus(t);
    if a >= b {
        a.exp_m1() + b.exp()
    } else {
        a.exp() + b.exp_m1()
    }
}

/// The crossing in logit coordinates: returns `t` with `x0 = 1/(1+e^{−t})`.
fn crossing_logit(alpha1: f64, alpha2: f64, cfg: &ToleranceConfig) -> Result<f64> {
    if !(alpha1 > 1.0 && alpha1.is_finite() && alpha2 > 0.0 && alpha2 < 1.0) {
        return Err(QmError::param("need alpha1 > 1 > alpha2 > 0"));
    }
    let f = |t: f64| crossing_residual(t, alpha1, alpha2);
    // Walk ε = 1e-3, 1e-4, ... toward each end until the residual has the
    // sign it takes near that end. The end signs only show up below the
    // tangency points x1 and 1 − x2, which can be astronomically small.
    let find_end = |sign: f64| -> Option<f64> {
        let mut eps: f64 = 1e-3;
        while eps >= 1e-300 {
            let t = sign * (eps.ln() - (-eps).ln_1p());
            let v = f(t);
            if v != 0.0 && v.signum() == -sign {
                return Some(t);
            }
            eps *= 0.1;
        }
        None
    };
    let (Some(t_lo), Some(t_hi)) = (find_end(1.0), find_end(-1.0)) else {
        return Err(QmError::NonConvergence { solver: "crossing_x0", iterations: 298 });
    };
    find_root_bracketed(f, t_lo, t_hi, cfg)
}

/// The unique `x0 ∈ (0, 1)` with `x0^{α₁} + (1 − x0)^{α₂} = 1`, the
/// crossing of `x^{α₁}` and `1 − (1 − x)^{α₂}`.
pub fn crossing_x0(alpha1: f64, alpha2: f64, cfg: &ToleranceConfig) -> Result<f64> {
    let t = crossing_logit(alpha1, alpha2, cfg)?;
    Ok(1.0 / (1.0 + (-t).exp()))
}

/// Energy of `min{x^{α₁}, 1 − (1 − x)^{α₂}}` and the quantities around it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlowupReport {
    pub alpha1: f64,
    pub alpha2: f64,
    pub x0: f64,
    pub one_minus_x0: f64,
    /// Where `x^{α₁}` meets the line `α₂ x`.
    pub x1: f64,
    /// Where the reflected power meets the line of slope `α₁` through (1, 1).
    pub x2: f64,
    pub one_minus_x2: f64,
    pub q_tilde: f64,
    /// Lower bound for `q_tilde − Q₂`.
    pub lb1: f64,
    /// Lower bound for `q_tilde − Q₁`.
    pub lb2: f64,
}

/// `Q̃ = Q₁ x0^{p(α₁−1)+1} + Q₂ (1 − x0)^{p(α₂−1)+1}`, the energy of the
/// minimum of the increasing power for `Q₁` and the reflected power for
/// `Q₂`, together with the two explicit lower bounds for the blowup.
pub fn q_tilde(q1: f64, q2: f64, p: f64, cfg: &ToleranceConfig) -> Result<BlowupReport> {
    let b1 = alpha_branches(q1, p, cfg)?;
    let b2 = alpha_branches(q2, p, cfg)?;
    let (alpha1, alpha2) = (b1.alpha, b2.alpha_prime);
    let t = crossing_logit(alpha1, alpha2, cfg)?;
    let ln_x0 = -softplus(-t);
    let ln_1m_x0 = -softplus(t);
    let q_tilde = q1 * (b1.beta * ln_x0).exp() + q2 * (b2.beta_prime * ln_1m_x0).exp();

    // α₁ − 1 and α₂ − 1 straight from the branch exponents avoid rounding
    // when the exponents are close to 1.
    let a1m1 = (b1.beta - 1.0) / p;
    let a2m1 = (b2.beta_prime - 1.0) / p;
    let ln_a1 = a1m1.ln_1p();
    let ln_a2 = a2m1.ln_1p();
    let x1 = (ln_a2 / a1m1).exp();
    let one_minus_x2 = (ln_a1 / a2m1).exp();
    let lb1 = (q1 - 1.0) * ((p + 1.0 / a1m1) * ln_a2).exp();
    let lb2 = (q2 - 1.0) * ((p + 1.0 / a2m1) * ln_a1).exp();
    Ok(BlowupReport {
        alpha1,
        alpha2,
        x0: ln_x0.exp(),
        one_minus_x0: ln_1m_x0.exp(),
        x1,
        x2: 1.0 - one_minus_x2,
        one_minus_x2,
        q_tilde,
        lb1,
        lb2,
    })
}

/// The two explicit `p = 2` lower bounds for `Q̃ − Q₂`:
/// `(Q₁−1)(Q₂ ± √(Q₂²−Q₂))^{1 ∓ √(Q₁/(Q₁−1))}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QtBounds {
    pub bound1: f64,
    pub bound2: f64,
}

pub fn qt_closed_form_p2(q1: f64, q2: f64) -> Result<QtBounds> {
    if !(q1 > 1.0 && q2 > 1.0 && q1.is_finite() && q2.is_finite()) {
        return Err(QmError::param("need Q1, Q2 finite and > 1"));
    }
    let r = (q2 * q2 - q2).sqrt();
    let s = (q1 / (q1 - 1.0)).sqrt();
    Ok(QtBounds {
        bound1: (q1 - 1.0) * (q2 + r).powf(1.0 - s),
        bound2: (q1 - 1.0) * (q2 - r).powf(1.0 + s),
    })
}

/// `Q + (Q − 1)/e`, a lower bound for `Q̃(Q, Q)` at `p = 2`.
pub fn equal_q_e_bound(q: f64) -> Result<f64> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(QmError::param(format!("Q = {q} must be finite and > 1")));
    }
    Ok(q + (q - 1.0) / std::f64::consts::E)
}

/// Exponents of the power pair written through the one-corner quotients:
/// `α₁ = (p−1)/p · (γ₁^p−1)/(γ₁^{p−1}−1)` is the upper tangent exponent for
/// `γ₁` and `α₂ = (p−1)/p · (γ₂^p−1)/(γ₂^p−γ₂)` the lower one for `γ₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaExponents {
    pub alpha1: f64,
    pub alpha2: f64,
}

pub fn gamma_parametrized_exponents(gamma1: f64, gamma2: f64, p: f64) -> Result<GammaExponents> {
    if !(gamma1 > 1.0 && gamma2 > 1.0) {
        return Err(QmError::param("need gamma1, gamma2 > 1"));
    }
    let u1 = optimal_unit_corner(gamma1, p)?;
    let u2 = optimal_unit_corner(gamma2, p)?;
    Ok(GammaExponents { alpha1: u1.alpha * gamma1, alpha2: u2.alpha })
}

/// The one-corner constant of the quotient, as used to pair exponents.
pub fn gamma_constant(gamma: f64, p: f64) -> Result<f64> {
    Ok(corner_constant(gamma, p)?.q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn q_alpha_values() {
        assert_eq!(q_alpha(1.0, 7.0).unwrap(), 1.0);
        assert!((q_alpha(2.0, 2.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!((q_alpha(0.75, 2.0).unwrap() - 1.125).abs() < 1e-15);
        assert!((q_alpha(1.5, 2.0).unwrap() - 1.125).abs() < 1e-15);
        assert!(q_alpha(0.5, 2.0).is_err());
        assert!(q_alpha(0.4, 2.0).is_err());
    }

    #[test]
    fn branches_p2() {
        let b = alpha_branches(1.125, 2.0, &cfg()).unwrap();
        assert!((b.alpha_prime - 0.75).abs() < 1e-13);
        assert!((b.alpha - 1.5).abs() < 1e-13);
        let b = alpha_branches(2.0, 2.0, &cfg()).unwrap();
        let r2 = 2f64.sqrt();
        assert!((b.alpha_prime - (2.0 - r2)).abs() < 1e-13);
        assert!((b.alpha - (2.0 + r2)).abs() < 1e-12);
        let b = alpha_branches(1.0 + 1e-10, 3.0, &cfg()).unwrap();
        assert!((b.alpha - 1.0).abs() < 1e-4 && (b.alpha_prime - 1.0).abs() < 1e-4);
        assert!(alpha_branches(1.0, 2.0, &cfg()).is_err());
    }

    #[test]
    fn branches_reproduce_q() {
        for &(q, p) in &[(1.001, 1.2), (2.0, 100.0), (100.0, 1.2), (100.0, 100.0), (10.0, 3.0)] {
            let b = alpha_branches(q, p, &cfg()).unwrap();
            assert!(rel(q_alpha(b.alpha, p).unwrap(), q) < 1e-12, "({q},{p})");
            assert!(rel(q_alpha(b.alpha_prime, p).unwrap(), q) < 1e-12, "({q},{p})");
            assert!(1.0 - 1.0 / p < b.alpha_prime && b.alpha_prime < 1.0 && b.alpha > 1.0);
        }
    }

    #[test]
    fn crossing_example() {
        let f = |x: f64| x.powf(1.5) + (1.0 - x).powf(0.75) - 1.0;
        let (mut lo, mut hi) = (0.01, 0.99);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x0 = crossing_x0(1.5, 0.75, &cfg()).unwrap();
        assert!((x0 - 0.5 * (lo + hi)).abs() < 1e-12);
        assert!(9.0 / 16.0 < x0 && x0 < 65.0 / 81.0);
        assert!(f(x0).abs() < 1e-12);
    }

    #[test]
    fn crossing_rejects_bad_exponents() {
        assert!(crossing_x0(1.0, 0.5, &cfg()).is_err());
        assert!(crossing_x0(1.5, 1.0, &cfg()).is_err());
    }

    #[test]
    fn table_values() {
        let cases = [
            (2.0, 2.0, 2.619135721),
            (1.125, 100.0, 1.188165836),
            (10.0, 2.0, 17.67321156),
            (100.0, 100.0, 196.5955633),
        ];
        for (q, p, expect) in cases {
            let r = q_tilde(q, q, p, &cfg()).unwrap();
            assert!(rel(r.q_tilde, expect) < 1e-9, "({q},{p}): {}", r.q_tilde);
        }
    }

    #[test]
    fn far_crossing() {
        // For p = 1.2 and Q = 100 the crossing sits about 3e-13 below 1.
        let r = q_tilde(100.0, 100.0, 1.2, &cfg()).unwrap();
        assert!(r.one_minus_x0 > 1e-13 && r.one_minus_x0 < 1e-12);
        assert!(rel(r.q_tilde, 195.716826024) < 1e-10, "{}", r.q_tilde);
    }

    #[test]
    fn report_ordering() {
        let r = q_tilde(2.0, 3.0, 2.0, &cfg()).unwrap();
        assert!(0.0 < r.x1 && r.x1 < r.x0 && r.x0 < r.x2 && r.x2 < 1.0);
        assert!(r.q_tilde > 3.0 + r.lb1 && r.q_tilde > 2.0 + r.lb2);
    }

    #[test]
    fn qt_column() {
        let b = qt_closed_form_p2(2.0, 2.0).unwrap();
        assert!(rel(2.0 + b.bound1, 2.601317394) < 1e-9);
        let b = qt_closed_form_p2(1.001, 1.001).unwrap();
        assert!(rel(1.001 + b.bound1, 1.001373803) < 1e-9);
        let b = qt_closed_form_p2(1.0 + 1e-12, 2.0).unwrap();
        assert!(b.bound1 < 1e-11);
    }

    #[test]
    fn e_bound() {
        assert!((equal_q_e_bound(2.0).unwrap() - 2.367879441171442).abs() < 1e-14);
        assert!(equal_q_e_bound(1.0).is_err());
        let q = q_tilde(10.0, 10.0, 2.0, &cfg()).unwrap().q_tilde;
        assert!(q > equal_q_e_bound(10.0).unwrap());
    }

    #[test]
    fn gamma_exponents() {
        let e = gamma_parametrized_exponents(2.0, 2.0, 2.0).unwrap();
        assert!((e.alpha1 - 1.5).abs() < 1e-15 && (e.alpha2 - 0.75).abs() < 1e-15);
        for &(g1, g2, p) in &[(1.5, 3.0, 1.7), (10.0, 1.1, 5.0)] {
            let e = gamma_parametrized_exponents(g1, g2, p).unwrap();
            let b1 = alpha_branches(gamma_constant(g1, p).unwrap(), p, &cfg()).unwrap();
            let b2 = alpha_branches(gamma_constant(g2, p).unwrap(), p, &cfg()).unwrap();
            assert!(rel(e.alpha1, b1.alpha) < 1e-10);
            assert!(rel(e.alpha2, b2.alpha_prime) < 1e-10);
        }
    }

    #[test]
    fn power_qm_eval() {
        let u = PowerQM::new(2.0, PowerForm::Increasing, 2.0).unwrap();
        assert_eq!(u.eval(0.5), 0.25);
        assert!((u.constant() - 4.0 / 3.0).abs() < 1e-15);
        let v = PowerQM::new(0.75, PowerForm::Reflected, 2.0).unwrap();
        assert_eq!(v.eval(1.0), 1.0);
        assert_eq!(v.eval(0.0), 0.0);
        assert!(PowerQM::new(0.4, PowerForm::Increasing, 2.0).is_err());
    }
}
