use super::ToleranceConfig;
use crate::error::{QmError, Result};

/// Finds a root of `f` in `[lo, hi]` given a sign change at the ends.
///
/// Brent's method: inverse quadratic interpolation and secant steps guarded
/// by bisection, so the bracket always shrinks and the sign change is kept.
/// Stops once the bracket is narrower than `root_abs_tol` (or a few ulps of
/// the root when that is larger) and returns the bracket end with the
/// smaller residual.
pub fn find_root_bracketed<F>(f: F, lo: f64, hi: f64, cfg: &ToleranceConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(lo < hi) {
        return Err(QmError::param(format!("empty bracket [{lo}, {hi}]")));
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(QmError::NoSignChange { lo, hi });
    }

    let (mut c, mut fc) = (b, fb);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..cfg.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = (2.0 * f64::EPSILON * b.abs()).max(0.5 * cfg.root_abs_tol);
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if fb.is_nan() {
            return Err(QmError::NonConvergence {
                solver: "find_root_bracketed",
                iterations: cfg.max_iter,
            });
        }
    }
    Err(QmError::NonConvergence {
        solver: "find_root_bracketed",
        iterations: cfg.max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        let flo = f(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) > 0.0) == (flo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn linear_root() {
        let x = find_root_bracketed(|x| x - 0.5, 0.0, 1.0, &cfg()).unwrap();
        assert!((x - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn sqrt_two() {
        let x = find_root_bracketed(|x| x * x - 2.0, 1.0, 2.0, &cfg()).unwrap();
        assert!((x - std::f64::consts::SQRT_2).abs() <= 1e-12);
    }

    #[test]
    fn power_crossing_matches_bisection() {
        let f = |x: f64| x.powf(1.5) + (1.0 - x).powf(0.75) - 1.0;
        assert!(f(0.01) < 0.0 && f(0.99) > 0.0);
        let oracle = bisect(f, 0.01, 0.99);
        let x = find_root_bracketed(f, 0.01, 0.99, &cfg()).unwrap();
        assert!((x - oracle).abs() <= 1e-12);
        assert!(9.0 / 16.0 < x && x < 65.0 / 81.0);
    }

    #[test]
    fn no_sign_change() {
        let err = find_root_bracketed(|x| x * x + 1.0, -1.0, 1.0, &cfg()).unwrap_err();
        assert!(matches!(err, QmError::NoSignChange { .. }));
    }

    #[test]
    fn iteration_cap() {
        let mut c = cfg();
        c.max_iter = 2;
        c.root_abs_tol = 1e-15;
        let err = find_root_bracketed(|x| x.powi(3) - 0.3, 0.0, 1.0, &c).unwrap_err();
        assert!(matches!(err, QmError::NonConvergence { .. }));
    }

    #[test]
    fn residual_no_worse_than_ends() {
        let f = |x: f64| (x - 0.3).sinh() * 5.0;
        let x = find_root_bracketed(f, -2.0, 2.0, &cfg()).unwrap();
        let w = cfg().root_abs_tol;
        assert!(f(x).abs() <= f(x - w).abs().max(f(x + w).abs()));
    }
}
