//! Continuous piecewise linear functions on a closed interval, their
//! p-energies, pointwise minima, concave envelopes and empirical best
//! quasiminimizing constants.

use serde::{Deserialize, Serialize};

use crate::error::{QmError, Result};
use crate::numerics::{maximize_2d, ToleranceConfig};
use crate::power::PowerForm;

/// Relative tolerance under which two abscissae are treated as one point.
const MERGE_TOL: f64 = 1e-14;

/// Above this `p·|ln|slope||` the powers are formed in the log domain.
const LOG_DOMAIN: f64 = 600.0;

/// A continuous function, affine between consecutive breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPwl")]
pub struct PiecewiseLinearFn {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawPwl {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawPwl> for PiecewiseLinearFn {
    type Error = QmError;

    fn try_from(raw: RawPwl) -> Result<Self> {
        PiecewiseLinearFn::new(raw.breakpoints, raw.values)
    }
}

/// Which comparison function defines the constant in [`quasimin_constant`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QmMode {
    /// Arbitrary perturbations: the competitor is the chord.
    Free,
    /// Nonnegative perturbations: the competitor is the least concave majorant.
    Super,
}

/// Energies of a function and of its chord over one interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    pub interval: (f64, f64),
    pub energy: f64,
    pub chord_energy: f64,
    pub ratio: f64,
}

impl PiecewiseLinearFn {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(QmError::InvalidFunction("need at least two breakpoints".into()));
        }
        if breakpoints.len() != values.len() {
            return Err(QmError::InvalidFunction(format!(
                "{} breakpoints but {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(QmError::InvalidFunction("coordinates must be finite".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(QmError::InvalidFunction(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(PiecewiseLinearFn { breakpoints, values })
    }

    /// The function starting at `(x0, y0)` with the given segment slopes
    /// between consecutive `breakpoints` (so `slopes.len() + 1` of them).
    pub fn from_slopes(breakpoints: Vec<f64>, y0: f64, slopes: &[f64]) -> Result<Self> {
        if slopes.len() + 1 != breakpoints.len() {
            return Err(QmError::InvalidFunction(
                "need exactly one slope per segment".into(),
            ));
        }
        let mut values = Vec::with_capacity(breakpoints.len());
        values.push(y0);
        for (i, s) in slopes.iter().enumerate() {
            let prev = values[i];
            values.push(prev + s * (breakpoints[i + 1] - breakpoints[i]));
        }
        PiecewiseLinearFn::new(breakpoints, values)
    }

    /// The affine function through `(a, ya)` and `(b, yb)`.
    pub fn linear(a: f64, ya: f64, b: f64, yb: f64) -> Result<Self> {
        PiecewiseLinearFn::new(vec![a, b], vec![ya, yb])
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| QmError::InvalidFunction(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("finite coordinates always serialize")
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn segments(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().unwrap())
    }

    pub fn slope(&self, i: usize) -> f64 {
        let x = &self.breakpoints;
        (self.values[i + 1] - self.values[i]) / (x[i + 1] - x[i])
    }

    pub fn slopes(&self) -> Vec<f64> {
        (0..self.segments()).map(|i| self.slope(i)).collect()
    }

    /// Index of the segment containing `x`, clamped to the domain.
    fn segment_of(&self, x: f64) -> usize {
        let k = self.breakpoints.partition_point(|&b| b <= x);
        k.clamp(1, self.segments()) - 1
    }

    /// Value at `x`; outside the domain the end segments are extended.
    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segment_of(x);
        let (x0, x1) = (self.breakpoints[i], self.breakpoints[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        if x == x1 {
            return y1;
        }
        y0 + (y1 - y0) * ((x - x0) / (x1 - x0))
    }

    fn check_interval(&self, a: f64, b: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if !(a < b && lo <= a && b <= hi) {
            return Err(QmError::DomainViolation { a, b, lo, hi });
        }
        Ok(())
    }

    /// The restriction to `[a, b]`.
    pub fn restrict(&self, a: f64, b: f64) -> Result<Self> {
        self.check_interval(a, b)?;
        // A cut that is not a breakpoint absorbs breakpoints within the
        // merge tolerance; genuine breakpoints are kept however close.
        let cut_a = !self.breakpoints.contains(&a);
        let cut_b = !self.breakpoints.contains(&b);
        let mut xs = vec![a];
        let mut ys = vec![self.eval(a)];
        for (&x, &y) in self.breakpoints.iter().zip(&self.values) {
            if x > a && x < b && !(cut_a && near(x, a, b - a)) && !(cut_b && near(x, b, b - a)) {
                xs.push(x);
                ys.push(y);
            }
        }
        xs.push(b);
        ys.push(self.eval(b));
        PiecewiseLinearFn::new(xs, ys)
    }

    /// `x ↦ f(lo + hi − x)`: the mirror image on the same domain.
    pub fn reflect(&self) -> Self {
        let (lo, hi) = self.domain();
        self.reflect_through(lo + hi)
    }

    /// `x ↦ f(s − x)` on `[s − hi, s − lo]`.
    pub fn reflect_through(&self, s: f64) -> Self {
        let xs = self.breakpoints.iter().rev().map(|x| s - x).collect();
        let ys = self.values.iter().rev().copied().collect();
        PiecewiseLinearFn { breakpoints: xs, values: ys }
    }

    /// `x ↦ mu·f((x − c)/lambda) + d`, i.e. the graph mapped by
    /// `(x, y) ↦ (lambda·x + c, mu·y + d)`.
    pub fn affine_map(&self, lambda: f64, c: f64, mu: f64, d: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(QmError::param("horizontal scale must be positive and finite"));
        }
        let xs = self.breakpoints.iter().map(|x| lambda * x + c).collect();
        let ys = self.values.iter().map(|y| mu * y + d).collect();
        PiecewiseLinearFn::new(xs, ys)
    }

    /// Drops breakpoints where the slope does not change.
    pub fn simplified(&self) -> Self {
        let mut xs = vec![self.breakpoints[0]];
        let mut ys = vec![self.values[0]];
        let n = self.breakpoints.len();
        for k in 1..n - 1 {
            let (xp, yp) = (*xs.last().unwrap(), *ys.last().unwrap());
            let (x, y) = (self.breakpoints[k], self.values[k]);
            let (xn, yn) = (self.breakpoints[k + 1], self.values[k + 1]);
            let s1 = (y - yp) / (x - xp);
            let s2 = (yn - y) / (xn - x);
            if (s1 - s2).abs() > 1e-14 * s1.abs().max(s2.abs()) {
                xs.push(x);
                ys.push(y);
            }
        }
        xs.push(self.breakpoints[n - 1]);
        ys.push(self.values[n - 1]);
        PiecewiseLinearFn { breakpoints: xs, values: ys }
    }

    /// +1 if nondecreasing, −1 if nonincreasing, 0 if both slopes occur.
    fn monotonicity(&self) -> i8 {
        let s = self.slopes();
        let up = s.iter().any(|&v| v > 0.0);
        let down = s.iter().any(|&v| v < 0.0);
        match (up, down) {
            (true, true) => 0,
            (false, true) => -1,
            _ => 1,
        }
    }
}

fn near(x: f64, y: f64, width: f64) -> bool {
    (x - y).abs() <= MERGE_TOL * width.abs().max(x.abs()).max(y.abs())
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(QmError::param(format!("exponent p = {p} must be finite and > 1")));
    }
    Ok(())
}

/// `|s|^p · len`, formed in the log domain when the power would overflow.
pub(crate) fn power_term(s: f64, p: f64, len: f64) -> f64 {
    if s == 0.0 || len == 0.0 {
        return 0.0;
    }
    let ls = s.abs().ln();
    if p * ls.abs() > LOG_DOMAIN {
        (p * ls + len.ln()).exp()
    } else {
        s.abs().powf(p) * len
    }
}

/// `∫_a^b |f'|^p`.
pub fn energy(f: &PiecewiseLinearFn, p: f64, a: f64, b: f64) -> Result<f64> {
    check_p(p)?;
    f.check_interval(a, b)?;
    Ok(energy_unchecked(f, p, a, b))
}

fn energy_unchecked(f: &PiecewiseLinearFn, p: f64, a: f64, b: f64) -> f64 {
    let x = &f.breakpoints;
    let first = f.segment_of(a);
    let mut sum = 0.0;
    for i in first..f.segments() {
        if x[i] >= b {
            break;
        }
        let len = x[i + 1].min(b) - x[i].max(a);
        if len > 0.0 {
            sum += power_term(f.slope(i), p, len);
        }
    }
    sum
}

/// Energy of the linear interpolant of `f` between `a` and `b`.
pub fn chord_energy(f: &PiecewiseLinearFn, p: f64, a: f64, b: f64) -> Result<f64> {
    check_p(p)?;
    f.check_interval(a, b)?;
    Ok(chord_from_values(f.eval(a), f.eval(b), p, b - a))
}

fn chord_from_values(ya: f64, yb: f64, p: f64, len: f64) -> f64 {
    power_term((yb - ya) / len, p, len)
}

/// Energy, chord energy and their ratio over `(a, b)`.
pub fn energy_report(f: &PiecewiseLinearFn, p: f64, a: f64, b: f64) -> Result<EnergyReport> {
    let energy = energy(f, p, a, b)?;
    let chord_energy = chord_energy(f, p, a, b)?;
    let ratio = if chord_energy > 0.0 {
        energy / chord_energy
    } else if energy > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };
    Ok(EnergyReport { interval: (a, b), energy, chord_energy, ratio })
}

/// Union of two sorted abscissa lists. A point of one list closer than the
/// relative tolerance to a point of the other is dropped; points of the same
/// list are always kept, however close.
fn merge_breakpoints(xs: &[f64], ys: &[f64], width: f64) -> Vec<f64> {
    let mut all: Vec<(f64, u8)> = xs.iter().map(|&x| (x, 1)).chain(ys.iter().map(|&y| (y, 2))).collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, u8)> = Vec::with_capacity(all.len());
    for (x, tag) in all {
        match out.last_mut() {
            Some((last, tags)) if *last == x || (near(x, *last, width) && *tags & tag == 0) => *tags |= tag,
            _ => out.push((x, tag)),
        }
    }
    out.into_iter().map(|(x, _)| x).collect()
}

fn same_domain(f: &PiecewiseLinearFn, g: &PiecewiseLinearFn) -> Result<()> {
    let (fa, fb) = f.domain();
    let (ga, gb) = g.domain();
    let w = fb - fa;
    if !(near(fa, ga, w) && near(fb, gb, w)) {
        return Err(QmError::DomainMismatch);
    }
    Ok(())
}

fn pointwise_select(
    f: &PiecewiseLinearFn,
    g: &PiecewiseLinearFn,
    pick_min: bool,
) -> Result<PiecewiseLinearFn> {
    same_domain(f, g)?;
    let (lo, hi) = f.domain();
    let w = hi - lo;
    let mut grid = merge_breakpoints(&f.breakpoints, &g.breakpoints, w);
    *grid.first_mut().unwrap() = lo;
    *grid.last_mut().unwrap() = hi;

    let mut xs = Vec::with_capacity(2 * grid.len());
    for win in grid.windows(2) {
        let (x0, x1) = (win[0], win[1]);
        xs.push(x0);
        let d0 = f.eval(x0) - g.eval(x0);
        let d1 = f.eval(x1) - g.eval(x1);
        if d0 * d1 < 0.0 {
            let xc = x0 + (x1 - x0) * (d0 / (d0 - d1));
            if !near(xc, x0, w) && !near(xc, x1, w) {
                xs.push(xc);
            }
        }
    }
    xs.push(hi);
    let ys = xs
        .iter()
        .map(|&x| {
            let (a, b) = (f.eval(x), g.eval(x));
            // Ties keep the left function.
            if pick_min {
                if b < a { b } else { a }
            } else if b > a {
                b
            } else {
                a
            }
        })
        .collect();
    PiecewiseLinearFn::new(xs, ys)
}

/// `min{f, g}` on the common domain.
pub fn pointwise_min(f: &PiecewiseLinearFn, g: &PiecewiseLinearFn) -> Result<PiecewiseLinearFn> {
    pointwise_select(f, g, true)
}

/// `max{f, g}` on the common domain.
pub fn pointwise_max(f: &PiecewiseLinearFn, g: &PiecewiseLinearFn) -> Result<PiecewiseLinearFn> {
    pointwise_select(f, g, false)
}

/// Upper hull of points sorted by abscissa (monotone chain).
fn upper_hull(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for &p in pts {
        while hull.len() >= 2 {
            let o = hull[hull.len() - 2];
            let a = hull[hull.len() - 1];
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Least concave majorant of `f` on `[a, b]`.
///
/// In one dimension this is the solution of the obstacle problem with
/// obstacle `f` and boundary values `f(a)`, `f(b)`, for every `p > 1`.
pub fn concave_envelope(f: &PiecewiseLinearFn, a: f64, b: f64) -> Result<PiecewiseLinearFn> {
    f.check_interval(a, b)?;
    let r = f.restrict(a, b)?;
    let pts: Vec<(f64, f64)> = r.breakpoints.iter().copied().zip(r.values.iter().copied()).collect();
    let hull = upper_hull(&pts);
    let (xs, ys) = hull.into_iter().unzip();
    PiecewiseLinearFn::new(xs, ys)
}

/// Envelope energy on `(a, b)` without building intermediate functions.
fn envelope_energy(f: &PiecewiseLinearFn, p: f64, a: f64, b: f64, buf: &mut Vec<(f64, f64)>) -> f64 {
    buf.clear();
    buf.push((a, f.eval(a)));
    let first = f.segment_of(a);
    for k in first + 1..f.breakpoints.len() {
        let x = f.breakpoints[k];
        if x >= b {
            break;
        }
        if x > a {
            buf.push((x, f.values[k]));
        }
    }
    buf.push((b, f.eval(b)));
    let hull = upper_hull(buf);
    hull.windows(2)
        .map(|w| {
            let len = w[1].0 - w[0].0;
            if len > 0.0 {
                power_term((w[1].1 - w[0].1) / len, p, len)
            } else {
                0.0
            }
        })
        .sum()
}

/// Ratio of energy to competitor energy on `(a, b)`. Degenerate intervals
/// and 0/0 forms count as 1.
fn interval_ratio(
    f: &PiecewiseLinearFn,
    p: f64,
    mode: QmMode,
    a: f64,
    b: f64,
    buf: &mut Vec<(f64, f64)>,
) -> f64 {
    if !(b - a > 0.0) {
        return 1.0;
    }
    let e = energy_unchecked(f, p, a, b);
    let c = match mode {
        QmMode::Free => chord_from_values(f.eval(a), f.eval(b), p, b - a),
        QmMode::Super => envelope_energy(f, p, a, b, buf),
    };
    if c > 0.0 {
        e / c
    } else if e > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

/// Best quasiminimizing (`Free`) or quasisuperminimizing (`Super`)
/// constant of `f` on its domain.
///
/// The supremum over subintervals `(a, b)` is taken over every pair of
/// breakpoints and, for each pair of segments, over a continuous 2-D
/// refinement of the endpoints `a` and `b` inside those segments. This is
/// exact for functions where the ratio is unimodal on each segment pair,
/// which covers one-corner and zig-zag functions. For general input it is a
/// numerical estimate.
pub fn quasimin_constant(
    f: &PiecewiseLinearFn,
    p: f64,
    mode: QmMode,
    cfg: &ToleranceConfig,
) -> Result<f64> {
    check_p(p)?;
    cfg.validate()?;

    let slopes = f.slopes();
    match mode {
        QmMode::Free => {
            if f.monotonicity() == 0 {
                return Err(QmError::NotQuasiminimizer);
            }
        }
        QmMode::Super => {
            // A descent followed later by an ascent traps a valley below a
            // level chord, whose concave majorant can have zero energy.
            let mut seen_down = false;
            for &s in &slopes {
                if s < 0.0 {
                    seen_down = true;
                } else if s > 0.0 && seen_down {
                    return Err(QmError::NotQuasiminimizer);
                }
            }
        }
    }

    // The constant is invariant under y ↦ μy; normalizing the steepest
    // slope to 1 keeps |slope|^p representable for large p.
    let smax = slopes.iter().fold(0.0_f64, |m, s| m.max(s.abs()));
    if smax == 0.0 {
        return Ok(1.0);
    }
    let g = f.affine_map(1.0, 0.0, 1.0 / smax, 0.0)?.simplified();
    let x = g.breakpoints.clone();
    let n = g.segments();
    let mut buf = Vec::with_capacity(x.len() + 2);

    let mut best = 1.0_f64;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let r = interval_ratio(&g, p, mode, x[i], x[j], &mut buf);
            if r.is_infinite() {
                return Err(QmError::NotQuasiminimizer);
            }
            best = best.max(r);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let bounds = [(x[i], x[i + 1]), (x[j], x[j + 1])];
            let m = maximize_2d(
                |a, b| {
                    let mut local = Vec::with_capacity(x.len() + 2);
                    interval_ratio(&g, p, mode, a, b, &mut local)
                },
                bounds,
                cfg,
            )?;
            if m.value.is_infinite() {
                return Err(QmError::NotQuasiminimizer);
            }
            best = best.max(m.value);
        }
    }
    Ok(best)
}

/// Samples `x^α` (increasing form) or `1 − (1 − x)^α` (reflected form) on
/// `[0, 1]` at `n + 1` nodes.
///
/// Nodes are graded as `(i/n)^m` toward the endpoint where the derivative
/// is singular, with `m = max(1, 4/α)` for `α < 1`, so the energy of the
/// sample converges despite the blowup of the derivative.
pub fn sample_to_pwl(alpha: f64, form: PowerForm, n: usize) -> Result<PiecewiseLinearFn> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(QmError::InvalidExponent(alpha));
    }
    if n < 2 {
        return Err(QmError::param("need at least two sample intervals"));
    }
    let m = if alpha < 1.0 { (4.0 / alpha).max(1.0) } else { 1.0 };
    let t: Vec<f64> = (0..=n)
        .map(|i| {
            if i == n {
                1.0
            } else {
                (i as f64 / n as f64).powf(m)
            }
        })
        .collect();
    match form {
        PowerForm::Increasing => {
            let ys = t.iter().map(|&s| if s == 0.0 { 0.0 } else { s.powf(alpha) }).collect();
            PiecewiseLinearFn::new(t, ys)
        }
        PowerForm::Reflected => {
            let mut xs: Vec<f64> = Vec::with_capacity(t.len());
            let mut ys: Vec<f64> = Vec::with_capacity(t.len());
            for &s in t.iter().rev() {
                let x = 1.0 - s;
                let y = 1.0 - if s == 0.0 { 0.0 } else { s.powf(alpha) };
                match xs.last() {
                    Some(&last) if x <= last => {
                        // 1 − s rounds to a previous node when s is tiny;
                        // keep the node closest to 1 only.
                        *xs.last_mut().unwrap() = x;
                        *ys.last_mut().unwrap() = y;
                    }
                    _ => {
                        xs.push(x);
                        ys.push(y);
                    }
                }
            }
            *xs.last_mut().unwrap() = 1.0;
            *ys.last_mut().unwrap() = 1.0;
            PiecewiseLinearFn::new(xs, ys)
        }
    }
}
