use proptest::prelude::*;
use qmlab_core::bounds::{km_bound, min2_bound, min2_sandwich, min3_bound};
use qmlab_core::corner::{corner_constant, gamma_from_q, optimal_unit_corner};
use qmlab_core::lp_blowup::solve_blowup_lp;
use qmlab_core::power::{alpha_branches, crossing_x0, q_alpha, q_tilde};
use qmlab_core::pwl::{chord_energy, concave_envelope, energy, pointwise_max, pointwise_min};
use qmlab_core::{PiecewiseLinearFn, ToleranceConfig};

fn cfg() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// A random piecewise linear function on `[0, 1]`.
fn pwl() -> impl Strategy<Value = PiecewiseLinearFn> {
    (1usize..8)
        .prop_flat_map(|n| (prop::collection::vec(0.05f64..1.0, n), prop::collection::vec(-3.0f64..3.0, n + 1)))
        .prop_map(|(steps, ys)| {
            let total: f64 = steps.iter().sum();
            let mut xs = vec![0.0];
            let mut acc = 0.0;
            for s in &steps {
                acc += s / total;
                xs.push(acc);
            }
            *xs.last_mut().unwrap() = 1.0;
            PiecewiseLinearFn::new(xs, ys).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn corner_q_increases_in_gamma(p in 1.05f64..20.0, g in 1.001f64..50.0, f in 1.001f64..3.0) {
        let a = corner_constant(g, p).unwrap().q;
        let b = corner_constant(g * f, p).unwrap().q;
        prop_assert!(1.0 < a && a < b);
    }

    #[test]
    fn gamma_from_q_inverts(p in 1.1f64..10.0, g in 1.01f64..30.0) {
        let q = corner_constant(g, p).unwrap().q;
        let back = gamma_from_q(q, p, &cfg()).unwrap();
        prop_assert!(rel(back, g) < 1e-8, "{back} vs {g}");
    }

    #[test]
    fn unit_corner_energy_is_q(p in 1.1f64..10.0, g in 1.01f64..30.0) {
        let c = optimal_unit_corner(g, p).unwrap();
        let f = c.to_pwl().unwrap();
        let e = energy(&f, p, 0.0, 1.0).unwrap();
        prop_assert!(rel(e, corner_constant(g, p).unwrap().q) < 1e-10);
        prop_assert!((f.eval(1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn min2_chain(a in 1.0001f64..100.0, b in 1.0001f64..100.0) {
        let m = min2_bound(a, b).unwrap();
        let s = min2_sandwich(a, b).unwrap();
        prop_assert_eq!(m, min2_bound(b, a).unwrap());
        prop_assert!(a.max(b) <= m && m <= km_bound(a, b).unwrap());
        prop_assert!(s.lower < m && m < s.upper);
    }

    #[test]
    fn min3_symmetric_and_below_iterated(a in 1.0001f64..50.0, b in 1.0001f64..50.0, c in 1.0001f64..50.0) {
        let m = min3_bound(a, b, c).unwrap();
        for perm in [(b, c, a), (c, a, b), (b, a, c)] {
            prop_assert!(rel(min3_bound(perm.0, perm.1, perm.2).unwrap(), m) < 1e-13);
        }
        let iterated = min2_bound(min2_bound(a, b).unwrap(), c).unwrap();
        prop_assert!(m <= iterated * (1.0 + 1e-13));
        prop_assert!(m >= a.max(b).max(c));
    }

    #[test]
    fn q_tilde_between_max_and_min2(a in 1.01f64..50.0, b in 1.01f64..50.0, p in 1.2f64..8.0) {
        let r = q_tilde(a, b, p, &cfg()).unwrap();
        prop_assert!(r.q_tilde > a.max(b));
        prop_assert!(r.q_tilde < min2_bound(a, b).unwrap());
    }

    #[test]
    fn alpha_branches_solve_q(q in 1.001f64..50.0, p in 1.1f64..10.0) {
        let br = alpha_branches(q, p, &cfg()).unwrap();
        prop_assert!(rel(q_alpha(br.alpha, p).unwrap(), q) < 1e-10);
        prop_assert!(rel(q_alpha(br.alpha_prime, p).unwrap(), q) < 1e-10);
        let x0 = crossing_x0(br.alpha, br.alpha_prime, &cfg()).unwrap();
        prop_assert!(0.0 < x0 && x0 <= 1.0);
        let r = q_tilde(q, q, p, &cfg()).unwrap();
        prop_assert!((r.x0 - x0).abs() < 1e-12);
        prop_assert!(r.one_minus_x0 > 0.0);
        // x0 may round to 1, so take x0^α through ln(1 − (1 − x0)).
        let lhs = (br.alpha * (-r.one_minus_x0).ln_1p()).exp() + r.one_minus_x0.powf(br.alpha_prime);
        prop_assert!((lhs - 1.0).abs() < 1e-10, "residual {}", lhs - 1.0);
    }

    #[test]
    fn energy_dominates_chord(f in pwl(), p in 1.1f64..6.0) {
        let e = energy(&f, p, 0.0, 1.0).unwrap();
        let c = chord_energy(&f, p, 0.0, 1.0).unwrap();
        prop_assert!(e >= c * (1.0 - 1e-12));
    }

    #[test]
    fn energy_is_additive(f in pwl(), p in 1.1f64..6.0, s in 0.01f64..0.99) {
        let whole = energy(&f, p, 0.0, 1.0).unwrap();
        let parts = energy(&f, p, 0.0, s).unwrap() + energy(&f, p, s, 1.0).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-10 * whole.max(1.0));
    }

    #[test]
    fn min_and_max_bracket(f in pwl(), g in pwl(), x in 0.0f64..1.0) {
        let lo = pointwise_min(&f, &g).unwrap();
        let hi = pointwise_max(&f, &g).unwrap();
        let (a, b) = (f.eval(x), g.eval(x));
        prop_assert!((lo.eval(x) - a.min(b)).abs() < 1e-12);
        prop_assert!((hi.eval(x) - a.max(b)).abs() < 1e-12);
    }

    #[test]
    fn envelope_is_concave_majorant(f in pwl(), x in 0.0f64..1.0) {
        let env = concave_envelope(&f, 0.0, 1.0).unwrap();
        prop_assert!(env.eval(x) >= f.eval(x) - 1e-12);
        let s = env.slopes();
        prop_assert!(s.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn reflect_is_involution(f in pwl(), x in 0.0f64..1.0) {
        let r = f.reflect().reflect();
        prop_assert!((r.eval(x) - f.eval(x)).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip(f in pwl()) {
        let back = PiecewiseLinearFn::from_json(&f.to_json()).unwrap();
        prop_assert_eq!(back, f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lp_matches_closed_forms(a in 1.0001f64..100.0, b in 1.0001f64..100.0, c in 1.0001f64..100.0) {
        let two = solve_blowup_lp(&[a, b], &cfg()).unwrap().bound;
        prop_assert!(rel(two, min2_bound(a, b).unwrap()) < 1e-9);
        let three = solve_blowup_lp(&[a, b, c], &cfg()).unwrap().bound;
        prop_assert!(rel(three, min3_bound(a, b, c).unwrap()) < 1e-9);
    }

    #[test]
    fn lp_is_monotone_in_count(a in 1.01f64..20.0, b in 1.01f64..20.0, c in 1.01f64..20.0, d in 1.01f64..20.0) {
        let three = solve_blowup_lp(&[a, b, c], &cfg()).unwrap().bound;
        let four = solve_blowup_lp(&[a, b, c, d], &cfg()).unwrap().bound;
        prop_assert!(four >= three * (1.0 - 1e-9));
    }
}
