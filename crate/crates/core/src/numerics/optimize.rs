use super::ToleranceConfig;
use crate::error::{QmError, Result};

/// Side length of the coarse scan grid used by [`maximize_2d`].
pub const GRID_SIZE: usize = 64;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes a unimodal `f` on `[lo, hi]` by golden-section search.
///
/// Returns the best point seen and its value. The interval is shrunk until
/// it is narrower than a few ulps of its midpoint or `max_iter` steps have
/// run, whichever comes first; for non-unimodal `f` the result is a local
/// maximum.
pub fn golden_section_max<F>(f: F, lo: f64, hi: f64, cfg: &ToleranceConfig) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let (mut best_x, mut best_f) = if fc >= fd { (c, fc) } else { (d, fd) };
    let (fa, fb) = (f(a), f(b));
    if fa > best_f {
        best_x = a;
        best_f = fa;
    }
    if fb > best_f {
        best_x = b;
        best_f = fb;
    }
    for _ in 0..cfg.max_iter {
        if (b - a) <= 4.0 * f64::EPSILON * (a.abs() + b.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            if fc > best_f {
                best_x = c;
                best_f = fc;
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            if fd > best_f {
                best_x = d;
                best_f = fd;
            }
        }
    }
    (best_x, best_f)
}

/// Result of [`maximize_2d`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum2d {
    pub argmax: (f64, f64),
    pub value: f64,
    /// Number of coordinate sweeps used by the refinement stage.
    pub sweeps: usize,
}

/// Maximizes `f` over the box `[lo1, hi1] × [lo2, hi2]`.
///
/// A cell-centred `GRID_SIZE × GRID_SIZE` scan picks the start point. The
/// refinement then alternates golden-section line searches along each axis
/// inside a local bracket, followed by a pattern step along the net move of
/// the sweep. Brackets grow when the optimum lands on their edge and shrink
/// to a few times the last move otherwise. Only strict improvements are
/// accepted, so the returned value is never below any scanned node.
pub fn maximize_2d<F>(f: F, bounds: [(f64, f64); 2], cfg: &ToleranceConfig) -> Result<Maximum2d>
where
    F: Fn(f64, f64) -> f64,
{
    for &(lo, hi) in &bounds {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(QmError::param(format!("invalid box side [{lo}, {hi}]")));
        }
    }
    let lo = [bounds[0].0, bounds[1].0];
    let hi = [bounds[0].1, bounds[1].1];
    let width = [hi[0] - lo[0], hi[1] - lo[1]];
    let eval = |x: [f64; 2]| {
        let v = f(x[0], x[1]);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };

    let node = |k: usize, i: usize| lo[k] + width[k] * (i as f64 + 0.5) / GRID_SIZE as f64;
    let mut x = [node(0, 0), node(1, 0)];
    let mut fx = eval(x);
    for i in 0..GRID_SIZE {
        for j in 0..GRID_SIZE {
            let y = [node(0, i), node(1, j)];
            let fy = eval(y);
            if fy > fx {
                x = y;
                fx = fy;
            }
        }
    }

    let tiny = |k: usize, at: f64| 1e3 * f64::EPSILON * (width[k] + at.abs()).max(f64::MIN_POSITIVE);
    let mut h = [width[0] / GRID_SIZE as f64, width[1] / GRID_SIZE as f64];
    for sweep in 1..=cfg.max_iter {
        let start = x;
        let f_start = fx;
        let mut edge_hit = false;
        for k in 0..2 {
            if width[k] == 0.0 {
                continue;
            }
            let a = (x[k] - h[k]).max(lo[k]);
            let b = (x[k] + h[k]).min(hi[k]);
            let line = |t: f64| {
                let mut y = x;
                y[k] = t;
                eval(y)
            };
            let (t, ft) = golden_section_max(line, a, b, cfg);
            let moved = if ft > fx { t - x[k] } else { 0.0 };
            // On a flat ridge the line search may stop at a bracket edge
            // without gaining anything; only a real gain keeps the search going.
            let gained = ft - fx > cfg.opt_rel_tol * fx.abs().max(f64::MIN_POSITIVE);
            if ft > fx {
                x[k] = t;
                fx = ft;
            }
            let span = b - a;
            let at_edge = (t - a).abs() <= 1e-3 * span && a > lo[k]
                || (b - t).abs() <= 1e-3 * span && b < hi[k];
            if at_edge && gained {
                edge_hit = true;
                h[k] = (2.0 * h[k]).min(width[k]);
            } else {
                h[k] = (4.0 * moved.abs()).max(tiny(k, x[k]));
            }
        }

        let dir = [x[0] - start[0], x[1] - start[1]];
        if dir[0] != 0.0 || dir[1] != 0.0 {
            let mut tmax = f64::INFINITY;
            for k in 0..2 {
                if dir[k] > 0.0 {
                    tmax = tmax.min((hi[k] - x[k]) / dir[k]);
                } else if dir[k] < 0.0 {
                    tmax = tmax.min((lo[k] - x[k]) / dir[k]);
                }
            }
            if tmax > 0.0 {
                let along = |t: f64| eval([x[0] + t * dir[0], x[1] + t * dir[1]]);
                let (t, ft) = golden_section_max(along, 0.0, tmax, cfg);
                if ft > fx {
                    x = [
                        (x[0] + t * dir[0]).clamp(lo[0], hi[0]),
                        (x[1] + t * dir[1]).clamp(lo[1], hi[1]),
                    ];
                    fx = eval(x).max(fx);
                }
            }
        }

        let change = (fx - f_start).abs();
        if !edge_hit && change <= cfg.opt_rel_tol * fx.abs().max(f64::MIN_POSITIVE) {
            return Ok(Maximum2d { argmax: (x[0], x[1]), value: fx, sweeps: sweep });
        }
    }
    Err(QmError::NonConvergence { solver: "maximize_2d", iterations: cfg.max_iter })
}
