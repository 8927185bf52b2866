//! Constructions showing that the blowup `Q₁Q₂` of the pasting lemma is
//! attained, or nearly so.
//!
//! Given `u₂` on `Ω₂ = (0, 1)` and `u₁` on `Ω₁ ⊂ Ω₂`, the pasted function is
//! `u₂` off `Ω₁` and `min{u₁, u₂}` on `Ω₁`. All examples have boundary
//! values 0 and 1 (or 1 and 0), so the minimizer `v` has unit energy and
//! the energy of the pasted function is a lower bound for its constant.

use serde::Serialize;

use crate::corner::{gamma_from_q, optimal_unit_corner, UnitCorner};
use crate::error::{QmError, Result};
use crate::numerics::ToleranceConfig;
use crate::pwl::{energy, pointwise_min, PiecewiseLinearFn};

const PASTE_TOL: f64 = 1e-12;

/// One pasting construction and the energy it attains.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PasteExample {
    pub u1: PiecewiseLinearFn,
    pub u2: PiecewiseLinearFn,
    pub u: PiecewiseLinearFn,
    pub omega1: Vec<(f64, f64)>,
    pub achieved_energy: f64,
    pub claimed_bound: f64,
    /// Energy of `u₂` off `Ω₁`, for the connected examples.
    pub a_term: Option<f64>,
    /// Whether the functions are the decreasing mirror images `x ↦ f(1 − x)`.
    pub reflected: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PasteVariant {
    /// Lower bound `Q₁(Q₂ − 1) + 1`.
    Standard,
    /// Lower bound `Q₂(Q₁ + 1)/2`, reflecting when the energy of `u₂` is
    /// concentrated left of the corner.
    Second,
}

/// `u₂` off `omega1`, `min{u₁, u₂}` on it.
///
/// `omega1` is a list of disjoint open intervals inside the domain of `u2`,
/// each contained in the domain of `u1`.
pub fn paste(u2: &PiecewiseLinearFn, u1: &PiecewiseLinearFn, omega1: &[(f64, f64)]) -> Result<PiecewiseLinearFn> {
    let (lo, hi) = u2.domain();
    let mut ivs = omega1.to_vec();
    ivs.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in ivs.windows(2) {
        if w[1].0 < w[0].1 {
            return Err(QmError::param("intervals of Ω₁ must be disjoint"));
        }
    }

    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    let append = |f: &PiecewiseLinearFn, xs: &mut Vec<f64>, ys: &mut Vec<f64>| {
        for (&x, &y) in f.breakpoints().iter().zip(f.values()) {
            if xs.last().is_some_and(|&l| x <= l) {
                continue;
            }
            xs.push(x);
            ys.push(y);
        }
    };

    let mut cursor = lo;
    for &(a, b) in &ivs {
        if !(a < b && lo <= a && b <= hi) {
            return Err(QmError::DomainViolation { a, b, lo, hi });
        }
        let inner = pointwise_min(&u1.restrict(a, b)?, &u2.restrict(a, b)?)?;
        for x in [a, b] {
            let (outer, got) = (u2.eval(x), inner.eval(x));
            if (outer - got).abs() > PASTE_TOL * outer.abs().max(1.0) {
                return Err(QmError::DiscontinuousPaste { at: x, inner: got, outer });
            }
        }
        if a > cursor {
            append(&u2.restrict(cursor, a)?, &mut xs, &mut ys);
        }
        append(&inner, &mut xs, &mut ys);
        cursor = b;
    }
    if cursor < hi {
        append(&u2.restrict(cursor, hi)?, &mut xs, &mut ys);
    }
    Ok(PiecewiseLinearFn::new(xs, ys)?.simplified())
}

/// The optimal unit corner for `q`, or the identity when `q = 1`.
fn unit_corner_for(q: f64, p: f64, cfg: &ToleranceConfig) -> Result<UnitCorner> {
    let gamma = if q == 1.0 { 1.0 } else { gamma_from_q(q, p, cfg)? };
    optimal_unit_corner(gamma, p)
}

/// Below this `1 − x₀` the corner is placed from the left end instead, so
/// that the short steep segment is resolved in floating point.
const NEAR_END: f64 = 1e-6;

/// The convex one-corner function of `c` carried onto `[a, b]` with end
/// values `ya`, `yb`; a decreasing copy when `yb < ya`.
fn corner_piece(c: &UnitCorner, a: f64, ya: f64, b: f64, yb: f64) -> Result<PiecewiseLinearFn> {
    if c.gamma == 1.0 {
        return PiecewiseLinearFn::linear(a, ya, b, yb);
    }
    let (xc, yc) = if yb >= ya {
        (a + (b - a) * c.x0, ya + (yb - ya) * c.alpha * c.x0)
    } else {
        (a + (b - a) * c.one_minus_x0, yb + (ya - yb) * c.alpha * c.x0)
    };
    if !(a < xc && xc < b) {
        return Err(QmError::param("corner not representable in floating point; p is too close to 1"));
    }
    PiecewiseLinearFn::new(vec![a, xc, b], vec![ya, yc, yb])
}

fn check(q1: f64, q2: f64, p: f64, strict: bool) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(QmError::param(format!("p = {p} must be finite and > 1")));
    }
    for q in [q1, q2] {
        let ok = if strict { q > 1.0 } else { q >= 1.0 };
        if !(ok && q.is_finite()) {
            let rel = if strict { ">" } else { ">=" };
            return Err(QmError::param(format!("Q = {q} must be finite and {rel} 1")));
        }
    }
    Ok(())
}

/// The disconnected example: `Ω₁ = (0, x₀) ∪ (x₀, 1)` around the corner of
/// the optimal `u₂`, with `u₁` an optimal corner for `Q₁` on each piece.
/// The pasted function has energy exactly `Q₁Q₂`.
pub fn sharp_example(q1: f64, q2: f64, p: f64, cfg: &ToleranceConfig) -> Result<PasteExample> {
    check(q1, q2, p, true)?;
    let c2 = unit_corner_for(q2, p, cfg)?;
    let c1 = unit_corner_for(q1, p, cfg)?;
    let u2 = corner_piece(&c2, 0.0, 0.0, 1.0, 1.0)?;
    let (x0, y0) = (u2.breakpoints()[1], u2.values()[1]);
    let left = corner_piece(&c1, 0.0, 0.0, x0, y0)?;
    let right = corner_piece(&c1, x0, y0, 1.0, 1.0)?;
    let mut xs = left.breakpoints().to_vec();
    let mut ys = left.values().to_vec();
    xs.extend_from_slice(&right.breakpoints()[1..]);
    ys.extend_from_slice(&right.values()[1..]);
    let u1 = PiecewiseLinearFn::new(xs, ys)?;
    let omega1 = vec![(0.0, x0), (x0, 1.0)];
    let u = paste(&u2, &u1, &omega1)?;
    let achieved_energy = energy(&u, p, 0.0, 1.0)?;
    Ok(PasteExample { u1, u2, u, omega1, achieved_energy, claimed_bound: q1 * q2, a_term: None, reflected: false })
}

/// The connected example: `u₁` replaces `u₂` on the steep side of its
/// corner (the usual choice) or on the shallow side.
///
/// The energy is `Q₁Q₂ − A(Q₁ − 1)` with `A` the energy of `u₂` off `Ω₁`.
pub fn interval_example(
    q1: f64,
    q2: f64,
    p: f64,
    variant: PasteVariant,
    cfg: &ToleranceConfig,
) -> Result<PasteExample> {
    check(q1, q2, p, false)?;
    let c2 = unit_corner_for(q2, p, cfg)?;
    // Energy of the optimal u₂ on the shallow side of its corner.
    let a_shallow = if q2 == 1.0 { 0.0 } else { c2.alpha.powf(p) * c2.x0 };
    let shallow = variant == PasteVariant::Second && a_shallow > q2 / 2.0;
    connected_example(q1, q2, p, variant, shallow, cfg)
}

fn connected_example(
    q1: f64,
    q2: f64,
    p: f64,
    variant: PasteVariant,
    shallow: bool,
    cfg: &ToleranceConfig,
) -> Result<PasteExample> {
    let c2 = unit_corner_for(q2, p, cfg)?;
    let c1 = unit_corner_for(q1, p, cfg)?;
    let claimed_bound = match variant {
        PasteVariant::Standard => q1 * (q2 - 1.0) + 1.0,
        PasteVariant::Second => q2 * (q1 + 1.0) / 2.0,
    };

    let (u2, interval, a_term, reflected) = if q2 == 1.0 {
        // u₂(x) = x and Ω₁ = (0, 1).
        (PiecewiseLinearFn::linear(0.0, 0.0, 1.0, 1.0)?, (0.0, 1.0), 0.0, false)
    } else {
        let a_shallow = c2.alpha.powf(p) * c2.x0;
        let near_end = |c: &UnitCorner| c.gamma > 1.0 && c.one_minus_x0 < NEAR_END;
        // The decreasing orientation x ↦ u₂(1 − x) keeps a short steep
        // segment next to 0, where it is resolved exactly.
        let reflected = shallow || near_end(&c2) || near_end(&c1);
        let u2 = if reflected {
            corner_piece(&c2, 0.0, 1.0, 1.0, 0.0)?
        } else {
            corner_piece(&c2, 0.0, 0.0, 1.0, 1.0)?
        };
        let xc = u2.breakpoints()[1];
        let interval = match (reflected, shallow) {
            (false, false) => (xc, 1.0),
            (true, false) => (0.0, xc),
            (true, true) => (xc, 1.0),
            (false, true) => unreachable!(),
        };
        let a_term = if shallow { q2 - a_shallow } else { a_shallow };
        (u2, interval, a_term, reflected)
    };

    let (a, b) = interval;
    let u1 = corner_piece(&c1, a, u2.eval(a), b, u2.eval(b))?;
    let omega1 = vec![interval];
    let u = paste(&u2, &u1, &omega1)?;
    let achieved_energy = energy(&u, p, 0.0, 1.0)?;
    Ok(PasteExample { u1, u2, u, omega1, achieved_energy, claimed_bound, a_term: Some(a_term), reflected })
}

/// One row of the `p → 1` sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub a_term: f64,
    pub achieved_energy: f64,
}

/// The standard connected example across several exponents. As `p → 1`
/// the term `A` tends to 0 and the energy to `Q₁Q₂`.
pub fn p_sweep(q1: f64, q2: f64, p_list: &[f64], cfg: &ToleranceConfig) -> Result<Vec<SweepRow>> {
    p_list
        .iter()
        .map(|&p| {
            let ex = interval_example(q1, q2, p, PasteVariant::Standard, cfg)?;
            Ok(SweepRow { p, a_term: ex.a_term.unwrap_or(0.0), achieved_energy: ex.achieved_energy })
        })
        .collect()
}

/// Window around a component `(x1, x2)` of `Ω₁` in which a rescaled
/// connected example fits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Placement {
    /// The rescaled `(0, 1)`: `(x1 − kδ, x1 + δ)`.
    pub window: (f64, f64),
    /// The rescaled `(x₀, 1)`: `(x1, x1 + δ)`.
    pub inner: (f64, f64),
    /// Whether the construction is to be mirrored by `x ↦ 1 − x`; then the
    /// window refers to the mirrored component `(1 − x2, 1 − x1)`.
    pub reflected: bool,
}

/// Places a connected example with corner ratio `k = x₀/(1 − x₀)` at the
/// left end of the component `(x1, x2) ⊊ (0, 1)`, so that the window lies
/// inside `(0, x2)`.
pub fn placement_window(x1: f64, x2: f64, k: f64) -> Result<Placement> {
    if !(0.0 <= x1 && x1 < x2 && x2 <= 1.0) || (x1 == 0.0 && x2 == 1.0) {
        return Err(QmError::param("need a proper subinterval (x1, x2) of (0, 1)"));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(QmError::param("k must be positive and finite"));
    }
    let (x1, x2, reflected) = if x1 > 0.0 { (x1, x2, false) } else { (1.0 - x2, 1.0, true) };
    let delta = 0.5 * (x1 / k).min(x2 - x1);
    Ok(Placement { window: (x1 - k * delta, x1 + delta), inner: (x1, x1 + delta), reflected })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::min2_bound;
    use crate::pwl::{quasimin_constant, QmMode};

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn identity_paste() {
        let u2 = PiecewiseLinearFn::new(vec![0.0, 0.5, 1.0], vec![0.0, 0.2, 1.0]).unwrap();
        let u = paste(&u2, &u2, &[(0.2, 0.7)]).unwrap();
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            assert!((u.eval(x) - u2.eval(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn discontinuous_paste() {
        let u2 = PiecewiseLinearFn::linear(0.0, 0.0, 1.0, 1.0).unwrap();
        let u1 = PiecewiseLinearFn::linear(0.0, -1.0, 1.0, 1.0).unwrap();
        let err = paste(&u2, &u1, &[(0.0, 0.5)]).unwrap_err();
        assert!(matches!(err, QmError::DiscontinuousPaste { at, .. } if at == 0.0));
    }

    #[test]
    fn sharp_values() {
        let ex = sharp_example(1.125, 1.125, 2.0, &cfg()).unwrap();
        assert!(rel(ex.achieved_energy, 81.0 / 64.0) < 1e-12);
        let ex = sharp_example(2.0, 3.0, 2.0, &cfg()).unwrap();
        assert!(rel(ex.achieved_energy, 6.0) < 1e-12);
        assert!(min2_bound(2.0, 3.0).unwrap() < 6.0);
        assert!(sharp_example(1.0, 2.0, 2.0, &cfg()).is_err());
    }

    #[test]
    fn sharp_pieces_carry_their_constants() {
        let ex = sharp_example(1.5, 2.5, 3.0, &cfg()).unwrap();
        for &(a, b) in &ex.omega1 {
            let piece = ex.u1.restrict(a, b).unwrap();
            let q = quasimin_constant(&piece, 3.0, QmMode::Super, &cfg()).unwrap();
            assert!(rel(q, 1.5) < 1e-8, "{q}");
        }
        let q = quasimin_constant(&ex.u2, 3.0, QmMode::Super, &cfg()).unwrap();
        assert!(rel(q, 2.5) < 1e-8);
        let q = quasimin_constant(&ex.u, 3.0, QmMode::Super, &cfg()).unwrap();
        assert!(rel(q, 3.75) < 1e-6, "{q}");
    }

    #[test]
    fn interval_worked_example() {
        let ex = interval_example(1.125, 1.125, 2.0, PasteVariant::Standard, &cfg()).unwrap();
        assert!((ex.a_term.unwrap() - 0.375).abs() < 1e-14);
        assert!(rel(ex.achieved_energy, 39.0 / 32.0) < 1e-13);
        assert!(ex.achieved_energy > ex.claimed_bound);
        assert_eq!(ex.omega1.len(), 1);
        assert!((ex.omega1[0].0 - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn interval_trivial_q1() {
        for v in [PasteVariant::Standard, PasteVariant::Second] {
            let ex = interval_example(1.0, 2.5, 2.0, v, &cfg()).unwrap();
            assert!(rel(ex.achieved_energy, 2.5) < 1e-12);
        }
        let ex = interval_example(3.0, 1.0, 2.0, PasteVariant::Standard, &cfg()).unwrap();
        assert!(rel(ex.achieved_energy, 3.0) < 1e-12);
    }

    #[test]
    fn interval_energy_identity() {
        for &(q1, q2, p) in &[(2.0, 3.0, 2.0), (1.1, 7.0, 1.5), (5.0, 1.2, 4.0)] {
            for v in [PasteVariant::Standard, PasteVariant::Second] {
                let ex = interval_example(q1, q2, p, v, &cfg()).unwrap();
                let a = ex.a_term.unwrap();
                assert!(rel(ex.achieved_energy, q1 * q2 - a * (q1 - 1.0)) < 1e-12);
                assert!(ex.achieved_energy > ex.claimed_bound);
                assert!(ex.achieved_energy <= q1 * q2 * (1.0 + 1e-12));
                assert!(ex.achieved_energy > q2);
            }
        }
    }

    #[test]
    fn energy_can_fall_below_q1() {
        // Q₂ − A < 1 here, so Q₂ + (Q₁−1)(Q₂−A) < Q₁.
        let ex = interval_example(5.0, 1.2, 4.0, PasteVariant::Standard, &cfg()).unwrap();
        assert!(ex.achieved_energy < 5.0);
    }

    #[test]
    fn shallow_side_mirrors() {
        let ex = connected_example(2.0, 1.5, 3.0, PasteVariant::Second, true, &cfg()).unwrap();
        let a = ex.a_term.unwrap();
        assert!(ex.reflected);
        assert!(ex.u.eval(0.0) > ex.u.eval(1.0));
        assert_eq!(ex.omega1[0].1, 1.0);
        assert!(rel(ex.achieved_energy, 3.0 - a) < 1e-12);
        // The steep side is the right choice here: the shallow one loses.
        let std = interval_example(2.0, 1.5, 3.0, PasteVariant::Second, &cfg()).unwrap();
        assert!(!std.reflected && std.achieved_energy > ex.achieved_energy);
    }

    #[test]
    fn near_one_uses_reflection() {
        let ex = interval_example(2.0, 2.0, 1.01, PasteVariant::Standard, &cfg()).unwrap();
        assert!(ex.reflected);
        let a = ex.a_term.unwrap();
        assert!(rel(ex.achieved_energy, 4.0 - a) < 1e-10);
    }

    #[test]
    fn sweep_trend() {
        let rows = p_sweep(2.0, 2.0, &[1.01, 1.1, 1.5, 2.0, 5.0], &cfg()).unwrap();
        for w in rows.windows(2) {
            assert!(w[0].achieved_energy > w[1].achieved_energy);
            assert!(w[0].a_term < w[1].a_term);
        }
        assert!(rows.iter().all(|r| r.achieved_energy <= 4.0));
        assert!(rows[0].achieved_energy > 3.9);
        let flat = p_sweep(1.0, 3.0, &[1.5, 2.0, 4.0], &cfg()).unwrap();
        assert!(flat.iter().all(|r| rel(r.achieved_energy, 3.0) < 1e-12));
    }

    #[test]
    fn placement() {
        let pl = placement_window(0.4, 0.6, 2.0).unwrap();
        assert!(pl.window.0 > 0.0 && pl.inner.1 < 0.6 && !pl.reflected);
        assert!(rel((pl.inner.0 - pl.window.0) / (pl.window.1 - pl.inner.0), 2.0) < 1e-14);
        let pl = placement_window(0.0, 0.3, 2.0).unwrap();
        assert!(pl.reflected && pl.inner.0 == 0.7);
        assert!(placement_window(0.0, 1.0, 2.0).is_err());
    }
}
