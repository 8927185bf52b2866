//! Blowup bound for `min{u₁, …, u_N}` via a linear program over the
//! family of test inequalities.
//!
//! For each function `u_i` and each subset `S` of the other indices, testing
//! the quasisuperminimizing inequality of `u_i` with
//! `φ = (min{u_s : s ∈ S} ∧ v − u_i)₊` gives one inequality. Its set of
//! integration is the union of the orderings of `(u₁, …, u_N, v)` in which
//! `u_i` lies below `v` and below every `u_s`, `s ∈ S`. A nonnegative
//! combination of these inequalities in which, on every ordering, the
//! gradient of the minimum appears with total weight 1 and the gradients of
//! all other `u_j` cancel, bounds the energy of the minimum by a multiple of
//! the energy of `v`. The smallest such multiple is a linear program.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::error::{QmError, Result};
use crate::numerics::{solve_lp, LinearProgram, ToleranceConfig};

const MAX_N: usize = 6;

/// One test inequality: function index `i` (0-based) and the subset `S`,
/// stored as a bit mask over the function indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Inequality {
    pub i: usize,
    pub mask: u32,
}

impl Inequality {
    pub fn subset(&self) -> Vec<usize> {
        (0..32).filter(|b| self.mask & (1 << b) != 0).collect()
    }
}

impl fmt::Display for Inequality {
    /// `E(1|2,3)`: function 1 tested against `min{u2, u3, v}`, 1-based.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.subset().iter().map(|s| (s + 1).to_string()).collect();
        write!(f, "E({}|{})", self.i + 1, s.join(","))
    }
}

/// One ordering of the functions and `v`: `perm` lists the function
/// indices from smallest to largest and `vpos` of them lie below `v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Region {
    pub perm: Vec<usize>,
    pub vpos: usize,
}

impl Region {
    fn rank(&self, n: usize) -> Vec<usize> {
        let mut r = vec![0; n];
        for (pos, &f) in self.perm.iter().enumerate() {
            r[f] = pos;
        }
        r
    }
}

/// A gradient appearing in an inequality: one of the `u_j` or `v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FnRef {
    U(usize),
    V,
}

impl fmt::Display for FnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FnRef::U(j) => write!(f, "u{}", j + 1),
            FnRef::V => write!(f, "v"),
        }
    }
}

/// One row of the coverage table: `inequality` integrates over `region`
/// with `|u_lhs'|^p` on the left and `Q_{q_index} |rhs'|^p` on the right.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageEntry {
    pub region: Region,
    pub inequality: Inequality,
    pub lhs_fn: usize,
    pub rhs_fn: FnRef,
    pub q_index: usize,
}

fn check_n(n: usize) -> Result<()> {
    if !(2..=MAX_N).contains(&n) {
        return Err(QmError::param(format!("N = {n} must be between 2 and {MAX_N}")));
    }
    Ok(())
}

/// All `N·2^{N−1}` inequalities, by function index and then by subset mask
/// in increasing binary order.
pub fn enumerate_inequalities(n: usize) -> Result<Vec<Inequality>> {
    check_n(n)?;
    let mut out = Vec::with_capacity(n << (n - 1));
    for i in 0..n {
        for mask in 0u32..(1 << n) {
            if mask & (1 << i) == 0 {
                out.push(Inequality { i, mask });
            }
        }
    }
    Ok(out)
}

/// Permutations of `0..n` in lexicographic order.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        let Some(k) = (0..n - 1).rev().find(|&k| cur[k] < cur[k + 1]) else {
            return out;
        };
        let l = (k + 1..n).rev().find(|&l| cur[k] < cur[l]).unwrap();
        cur.swap(k, l);
        cur[k + 1..].reverse();
    }
}

/// All `N!·N` orderings in which at least the minimum lies below `v`.
pub fn enumerate_regions(n: usize) -> Result<Vec<Region>> {
    check_n(n)?;
    let mut out = Vec::new();
    for perm in permutations(n) {
        for vpos in 1..=n {
            out.push(Region { perm: perm.clone(), vpos });
        }
    }
    Ok(out)
}

/// If `ineq` integrates over `region`, the gradient on its right-hand side.
fn covers(ineq: &Inequality, region: &Region, rank: &[usize]) -> Option<FnRef> {
    let ri = rank[ineq.i];
    if ri >= region.vpos {
        return None;
    }
    let mut lowest: Option<usize> = None;
    for s in ineq.subset() {
        if rank[s] < ri {
            return None;
        }
        if lowest.map_or(true, |l| rank[s] < rank[l]) {
            lowest = Some(s);
        }
    }
    match lowest {
        Some(s) if rank[s] < region.vpos => Some(FnRef::U(s)),
        _ => Some(FnRef::V),
    }
}

/// Which inequality integrates over which ordering, and with which
/// gradients on each side.
pub fn region_coverage(n: usize) -> Result<Vec<CoverageEntry>> {
    let ineqs = enumerate_inequalities(n)?;
    let mut out = Vec::new();
    for region in enumerate_regions(n)? {
        let rank = region.rank(n);
        for ineq in &ineqs {
            if let Some(rhs_fn) = covers(ineq, &region, &rank) {
                out.push(CoverageEntry {
                    region: region.clone(),
                    inequality: *ineq,
                    lhs_fn: ineq.i,
                    rhs_fn,
                    q_index: ineq.i,
                });
            }
        }
    }
    Ok(out)
}

/// Optimal multipliers and the resulting bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupLpSolution {
    pub bound: f64,
    pub multipliers: Vec<(Inequality, f64)>,
}

impl BlowupLpSolution {
    pub fn multiplier(&self, i: usize, subset: &[usize]) -> Option<f64> {
        let mask = subset.iter().fold(0u32, |m, s| m | (1 << s));
        self.multipliers
            .iter()
            .find(|(e, _)| e.i == i && e.mask == mask)
            .map(|(_, v)| *v)
    }
}

/// Smallest blowup constant certified by the inequality family, with the
/// default exact-cancellation constraints.
pub fn solve_blowup_lp(q: &[f64], cfg: &ToleranceConfig) -> Result<BlowupLpSolution> {
    solve_blowup_lp_with(q, false, cfg)
}

/// As [`solve_blowup_lp`]; with `relaxed` the cancellation constraints are
/// one-sided (left-hand excess of any `u_j` gradient is allowed, and the
/// minimum's weight may exceed 1), which is still a valid certificate.
pub fn solve_blowup_lp_with(q: &[f64], relaxed: bool, cfg: &ToleranceConfig) -> Result<BlowupLpSolution> {
    let n = q.len();
    check_n(n)?;
    for &v in q {
        if !(v >= 1.0 && v.is_finite()) {
            return Err(QmError::param(format!("Q = {v} must be finite and >= 1")));
        }
    }
    let ineqs = enumerate_inequalities(n)?;
    let nv = ineqs.len();
    let t = nv;

    let mut objective = vec![0.0; nv + 1];
    objective[t] = 1.0;
    let mut lp = LinearProgram::new(objective);
    let mut seen: HashSet<(Vec<u64>, u64, bool)> = HashSet::new();
    let mut push = |lp: &mut LinearProgram, row: Vec<f64>, rhs: f64, eq: bool| {
        let key = (row.iter().map(|v| v.to_bits()).collect(), rhs.to_bits(), eq);
        if seen.insert(key) {
            if eq {
                lp.equalities.push((row, rhs));
            } else {
                lp.inequalities.push((row, rhs));
            }
        }
    };

    for region in enumerate_regions(n)? {
        let rank = region.rank(n);
        // Net coefficient (LHS − RHS) of each u-gradient, and of v on the RHS.
        let mut net = vec![vec![0.0; nv + 1]; n];
        let mut vrow = vec![0.0; nv + 1];
        for (col, ineq) in ineqs.iter().enumerate() {
            let Some(rhs) = covers(ineq, &region, &rank) else {
                continue;
            };
            net[ineq.i][col] += 1.0;
            match rhs {
                FnRef::U(j) => net[j][col] -= q[ineq.i],
                FnRef::V => vrow[col] += q[ineq.i],
            }
        }
        let m = region.perm[0];
        for (pos, &j) in region.perm.iter().enumerate().take(region.vpos) {
            let rhs = if pos == 0 { 1.0 } else { 0.0 };
            debug_assert!(pos > 0 || j == m);
            let row = std::mem::take(&mut net[j]);
            if relaxed {
                let neg: Vec<f64> = row.iter().map(|v| -v).collect();
                push(&mut lp, neg, -rhs, false);
            } else {
                push(&mut lp, row, rhs, true);
            }
        }
        vrow[t] = -1.0;
        push(&mut lp, vrow, 0.0, false);
    }

    let sol = solve_lp(&lp, cfg)?;
    let multipliers = ineqs.iter().zip(&sol.x).map(|(e, v)| (*e, *v)).collect();
    Ok(BlowupLpSolution { bound: sol.objective, multipliers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{min2_bound, min3_bound, min3_via_system};

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn counts() {
        assert_eq!(enumerate_inequalities(2).unwrap().len(), 4);
        assert_eq!(enumerate_inequalities(3).unwrap().len(), 12);
        assert_eq!(enumerate_inequalities(4).unwrap().len(), 32);
        assert_eq!(enumerate_regions(3).unwrap().len(), 18);
        assert!(enumerate_inequalities(1).is_err());
        assert!(enumerate_inequalities(7).is_err());
    }

    #[test]
    fn ordering_and_display() {
        let e = enumerate_inequalities(3).unwrap();
        assert_eq!(e[0], Inequality { i: 0, mask: 0 });
        assert_eq!(e[1], Inequality { i: 0, mask: 0b010 });
        assert_eq!(e[3].to_string(), "E(1|2,3)");
        assert_eq!(e[4].to_string(), "E(2|)");
    }

    #[test]
    fn two_function_coverage() {
        // Orderings with u1 < u2: the tests of u1 against v and against
        // min{u2, v}, and of u2 against v, cover the region where both lie
        // below v; only u1's tests cover the region where u2 is above v.
        let cov = region_coverage(2).unwrap();
        let both: Vec<_> = cov
            .iter()
            .filter(|c| c.region.perm == vec![0, 1] && c.region.vpos == 2)
            .map(|c| (c.inequality.to_string(), c.rhs_fn))
            .collect();
        assert_eq!(
            both,
            vec![
                ("E(1|)".to_string(), FnRef::V),
                ("E(1|2)".to_string(), FnRef::U(1)),
                ("E(2|)".to_string(), FnRef::V),
            ]
        );
        let low: Vec<_> = cov
            .iter()
            .filter(|c| c.region.perm == vec![0, 1] && c.region.vpos == 1)
            .map(|c| (c.inequality.to_string(), c.rhs_fn))
            .collect();
        assert_eq!(low, vec![("E(1|)".to_string(), FnRef::V), ("E(1|2)".to_string(), FnRef::V)]);
    }

    #[test]
    fn every_region_is_covered_by_the_plain_test() {
        for n in 2..=4 {
            let cov = region_coverage(n).unwrap();
            for region in enumerate_regions(n).unwrap() {
                let m = region.perm[0];
                assert!(cov.iter().any(|c| c.region == region && c.inequality == Inequality { i: m, mask: 0 }));
            }
        }
    }

    #[test]
    fn two_functions_match_closed_form() {
        for &(a, b) in &[(2.0, 2.0), (1.125, 1.125), (1.5, 30.0), (1.0001, 99.0)] {
            let s = solve_blowup_lp(&[a, b], &cfg()).unwrap();
            assert!(rel(s.bound, min2_bound(a, b).unwrap()) < 1e-10, "({a},{b}): {}", s.bound);
        }
    }

    #[test]
    fn three_functions_match_closed_form() {
        let s = solve_blowup_lp(&[2.0, 2.0, 2.0], &cfg()).unwrap();
        assert!((s.bound - 3.2).abs() < 1e-10);
        let s = solve_blowup_lp(&[2.0, 3.0, 4.0], &cfg()).unwrap();
        assert!(rel(s.bound, min3_bound(2.0, 3.0, 4.0).unwrap()) < 1e-10);
    }

    #[test]
    fn three_function_multipliers() {
        let q = [2.0, 3.0, 4.0];
        let s = solve_blowup_lp(&q, &cfg()).unwrap();
        let r = min3_via_system(q[0], q[1], q[2]).unwrap();
        for i in 0..3 {
            assert!((s.multiplier(i, &[]).unwrap() - r.x[i]).abs() < 1e-9);
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            assert!((s.multiplier(i, &[j]).unwrap() - r.x_pair[i][j]).abs() < 1e-9);
            assert!((s.multiplier(i, &[j, k]).unwrap() - r.x_hat[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn relaxed_is_no_worse() {
        let q = [1.5, 2.5, 6.0];
        let exact = solve_blowup_lp(&q, &cfg()).unwrap().bound;
        let relaxed = solve_blowup_lp_with(&q, true, &cfg()).unwrap().bound;
        assert!(relaxed <= exact * (1.0 + 1e-10));
        assert!(relaxed >= 6.0 * (1.0 - 1e-10));
    }

    #[test]
    fn four_functions_sit_between_max_and_iterated() {
        let q = [1.5, 2.0, 3.0, 5.0];
        let s = solve_blowup_lp(&q, &cfg()).unwrap();
        let it = min2_bound(min2_bound(min2_bound(1.5, 2.0).unwrap(), 3.0).unwrap(), 5.0).unwrap();
        assert!(s.bound >= 5.0 && s.bound <= it * (1.0 + 1e-9), "{} vs {it}", s.bound);
    }

    #[test]
    fn rejects_bad_q() {
        assert!(solve_blowup_lp(&[0.5, 2.0], &cfg()).is_err());
        assert!(solve_blowup_lp(&[2.0], &cfg()).is_err());
    }
}
