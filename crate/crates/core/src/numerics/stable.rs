//! Elementary functions evaluated without catastrophic cancellation.

/// `ln(e^t - 1)` for `t > 0`, finite for arbitrarily large `t`.
pub fn ln_expm1(t: f64) -> f64 {
    if t > 1.0 {
        t + (-(-t).exp()).ln_1p()
    } else {
        t.exp_m1().ln()
    }
}

/// `e^t - 1 - t`.
pub fn exp_m1_m_x(t: f64) -> f64 {
    if t.abs() < 0.1 {
        // Taylor series; terms fall by at least a factor 10 each step.
        let mut term = t * t / 2.0;
        let mut sum = term;
        let mut k = 3.0;
        while term.abs() > f64::EPSILON * sum.abs() * 1e-2 {
            term *= t / k;
            sum += term;
            k += 1.0;
        }
        sum
    } else {
        t.exp_m1() - t
    }
}

/// `ln(1 + h) - h` for `h > -1`.
pub fn ln_1p_m_x(h: f64) -> f64 {
    if h.abs() < 0.1 {
        // -h^2/2 + h^3/3 - ...
        let mut pow = h * h;
        let mut sum = -pow / 2.0;
        let mut k = 3.0;
        loop {
            pow *= -h;
            let term = -pow / k;
            sum += term;
            if term.abs() <= f64::EPSILON * sum.abs() * 1e-2 {
                break;
            }
            k += 1.0;
        }
        sum
    } else {
        h.ln_1p() - h
    }
}

/// `x^a` for `x >= 0`, `a > 0`, with `0^a = 0`.
pub fn pow_nonneg(x: f64, a: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        (a * x.ln()).exp()
    }
}

/// `ln(1 + e^t)` without overflow.
pub fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_expm1_matches_naive_in_safe_range() {
        for &t in &[1e-6_f64, 0.01, 0.5, 1.0, 3.0, 20.0] {
            let naive = t.exp_m1().ln();
            assert!((ln_expm1(t) - naive).abs() <= 1e-14 * naive.abs().max(1.0), "t={t}");
        }
        assert!((ln_expm1(1000.0) - 1000.0).abs() < 1e-12);
    }

    #[test]
    fn second_order_remainders() {
        // Leading Taylor terms.
        let t = 1e-5_f64;
        let expect = t * t / 2.0 + t * t * t / 6.0 + t.powi(4) / 24.0;
        assert!((exp_m1_m_x(t) - expect).abs() < 1e-15 * expect);
        let h = 1e-5_f64;
        let expect = -h * h / 2.0 + h * h * h / 3.0 - h.powi(4) / 4.0;
        assert!((ln_1p_m_x(h) - expect).abs() < 1e-15 * expect.abs());
        for &x in &[0.05_f64, -0.05, 0.3, 2.0] {
            assert!((exp_m1_m_x(x) - (x.exp() - 1.0 - x)).abs() < 1e-15);
            assert!((ln_1p_m_x(x) - (x.ln_1p() - x)).abs() < 1e-15);
        }
    }

    #[test]
    fn softplus_and_pow() {
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-16);
        assert_eq!(softplus(800.0), 800.0);
        assert!(softplus(-800.0) >= 0.0);
        assert_eq!(pow_nonneg(0.0, 0.3), 0.0);
        assert!((pow_nonneg(4.0, 0.5) - 2.0).abs() < 1e-15);
    }
}
