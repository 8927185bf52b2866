use super::{LuDecomposition, ToleranceConfig};
use crate::error::{QmError, Result};

/// A linear program `minimize c·x` subject to `A_eq x = b_eq`,
/// `A_le x ≤ b_le` and `x ≥ lower_bounds` (entries may be `-∞`).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub equalities: Vec<(Vec<f64>, f64)>,
    pub inequalities: Vec<(Vec<f64>, f64)>,
    pub lower_bounds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

impl LinearProgram {
    /// A program over `n` variables, all bounded below by zero.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            equalities: Vec::new(),
            inequalities: Vec::new(),
            lower_bounds: vec![0.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.objective.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim();
        if n == 0 {
            return Err(QmError::param("linear program has no variables"));
        }
        if self.lower_bounds.len() != n {
            return Err(QmError::param("lower_bounds length differs from objective"));
        }
        let rows = self.equalities.iter().chain(&self.inequalities);
        for (row, rhs) in rows {
            if row.len() != n {
                return Err(QmError::param("constraint row length differs from objective"));
            }
            if !rhs.is_finite() || row.iter().any(|v| !v.is_finite()) {
                return Err(QmError::param("constraint entries must be finite"));
            }
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(QmError::param("objective entries must be finite"));
        }
        if self.lower_bounds.iter().any(|&l| l.is_nan() || l == f64::INFINITY) {
            return Err(QmError::param("lower bounds must be finite or -inf"));
        }
        Ok(())
    }

    /// Largest violation of any constraint or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let dot = |row: &[f64]| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let eq = self.equalities.iter().map(|(r, b)| (dot(r) - b).abs());
        let le = self.inequalities.iter().map(|(r, b)| (dot(r) - b).max(0.0));
        let lb = self.lower_bounds.iter().zip(x).map(|(l, v)| (l - v).max(0.0));
        eq.chain(le).chain(lb).fold(0.0, f64::max)
    }
}

/// How an original variable is expressed through standard-form columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    Shifted { col: usize, lb: f64 },
    Split { pos: usize, neg: usize },
}

/// Standard form `A x = b`, `x ≥ 0`, `b ≥ 0`, stored by columns, with the
/// current basis. The basis matrix is refactorized at every step, so the
/// iterates carry no accumulated rounding.
struct Revised {
    cols: Vec<Vec<f64>>,
    b: Vec<f64>,
    basis: Vec<usize>,
}

impl Revised {
    fn factor(&self) -> Result<LuDecomposition> {
        let m = self.b.len();
        let bm: Vec<Vec<f64>> = (0..m).map(|r| self.basis.iter().map(|&j| self.cols[j][r]).collect()).collect();
        LuDecomposition::new(&bm)
    }

    fn basic_values(&self) -> Result<Vec<f64>> {
        self.factor()?.solve(&self.b)
    }

    /// Primal simplex with Bland's rule over the columns `0..usable`.
    fn optimize(&mut self, cost: &[f64], usable: usize, max_pivots: usize) -> Result<()> {
        let cscale = cost[..usable].iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        for _ in 0..max_pivots {
            let lu = self.factor()?;
            let xb = lu.solve(&self.b)?;
            let cb: Vec<f64> = self.basis.iter().map(|&j| cost[j]).collect();
            let y = lu.solve_transpose(&cb)?;
            let mut in_basis = vec![false; self.cols.len()];
            self.basis.iter().for_each(|&j| in_basis[j] = true);
            let entering = (0..usable).filter(|&j| !in_basis[j]).find(|&j| {
                let col = &self.cols[j];
                let norm = col.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
                cost[j] - dot(&y, col) < -1e-11 * cscale * norm
            });
            let Some(q) = entering else {
                return Ok(());
            };
            let w = lu.solve(&self.cols[q])?;
            let wmax = w.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let piv_tol = 1e-9 * wmax;
            let mut best: Option<(usize, f64)> = None;
            for (r, &wr) in w.iter().enumerate() {
                if wr <= piv_tol {
                    continue;
                }
                let ratio = xb[r].max(0.0) / wr;
                best = match best {
                    None => Some((r, ratio)),
                    Some((br, bratio)) => {
                        let tie = (ratio - bratio).abs() <= 1e-12 * (1.0 + bratio.abs());
                        if (ratio < bratio && !tie) || (tie && self.basis[r] < self.basis[br]) {
                            Some((r, ratio))
                        } else {
                            Some((br, bratio))
                        }
                    }
                };
            }
            let Some((pr, _)) = best else {
                return Err(QmError::Unbounded);
            };
            self.basis[pr] = q;
        }
        Err(QmError::NonConvergence { solver: "solve_lp", iterations: max_pivots })
    }

    fn drop_row(&mut self, r: usize) {
        for col in &mut self.cols {
            col.remove(r);
        }
        self.b.remove(r);
        self.basis.remove(r);
    }
}

/// Solves a [`LinearProgram`] by the two-phase revised simplex method.
///
/// Bland's smallest-index rule guarantees termination on degenerate
/// problems, and pivots smaller than `1e-9` of the largest entry of the
/// pivot column are never taken. The pivot budget is `max_iter` times the
/// number of rows plus columns of the standard form.
pub fn solve_lp(lp: &LinearProgram, cfg: &ToleranceConfig) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.dim();

    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0;
    for &lb in &lp.lower_bounds {
        if lb == f64::NEG_INFINITY {
            maps.push(VarMap::Split { pos: ncols, neg: ncols + 1 });
            ncols += 2;
        } else {
            maps.push(VarMap::Shifted { col: ncols, lb });
            ncols += 1;
        }
    }
    let n_struct = ncols;
    let n_slack = lp.inequalities.len();
    let n_std = n_struct + n_slack;

    let to_std = |row: &[f64], rhs: f64| {
        let mut out = vec![0.0; n_std];
        let mut b = rhs;
        for (j, m) in maps.iter().enumerate() {
            match *m {
                VarMap::Shifted { col, lb } => {
                    out[col] = row[j];
                    b -= row[j] * lb;
                }
                VarMap::Split { pos, neg } => {
                    out[pos] = row[j];
                    out[neg] = -row[j];
                }
            }
        }
        (out, b)
    };

    // Each row with the column that can start in the basis, if any.
    let mut rows: Vec<(Vec<f64>, f64, Option<usize>)> = Vec::new();
    for (row, rhs) in &lp.equalities {
        let (r, b) = to_std(row, *rhs);
        rows.push((r, b, None));
    }
    for (k, (row, rhs)) in lp.inequalities.iter().enumerate() {
        let (mut r, b) = to_std(row, *rhs);
        r[n_struct + k] = 1.0;
        rows.push((r, b, Some(n_struct + k)));
    }
    for (r, b, start) in rows.iter_mut() {
        if *b < 0.0 {
            r.iter_mut().for_each(|v| *v = -*v);
            *b = -*b;
            *start = None;
        }
    }

    let mut c_std = vec![0.0; n_std];
    for (j, m) in maps.iter().enumerate() {
        match *m {
            VarMap::Shifted { col, .. } => c_std[col] = lp.objective[j],
            VarMap::Split { pos, neg } => {
                c_std[pos] = lp.objective[j];
                c_std[neg] = -lp.objective[j];
            }
        }
    }

    let m = rows.len();
    if m == 0 {
        // Only bounds: every objective coefficient must push toward a bound.
        if c_std.iter().any(|&c| c < 0.0) {
            return Err(QmError::Unbounded);
        }
        let x = recover(&maps, &vec![0.0; n_std]);
        let objective = dot(&lp.objective, &x);
        return Ok(LpSolution { x, objective });
    }

    // Columns: structural and slack, then one artificial per row without a
    // starting column.
    let mut cols: Vec<Vec<f64>> = (0..n_std).map(|j| rows.iter().map(|r| r.0[j]).collect()).collect();
    let mut basis = Vec::with_capacity(m);
    for (r, row) in rows.iter().enumerate() {
        match row.2 {
            Some(j) => basis.push(j),
            None => {
                let mut e = vec![0.0; m];
                e[r] = 1.0;
                basis.push(cols.len());
                cols.push(e);
            }
        }
    }
    let total = cols.len();
    let b: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let bmax = b.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let max_pivots = cfg.max_iter.saturating_mul(m + total).max(cfg.max_iter);
    let mut s = Revised { cols, b, basis };

    // Phase 1: minimize the sum of artificials.
    if total > n_std {
        let mut c1 = vec![0.0; total];
        c1[n_std..].iter_mut().for_each(|v| *v = 1.0);
        s.optimize(&c1, total, max_pivots)?;
        let xb = s.basic_values()?;
        let infeas: f64 = s.basis.iter().zip(&xb).map(|(&j, v)| c1[j] * v).sum();
        if infeas > cfg.lp_feas_tol * (1.0 + bmax) {
            return Err(QmError::Infeasible);
        }

        // Drive artificials out of the basis; rows where that is impossible
        // are linearly dependent and are dropped.
        let mut r = 0;
        while r < s.basis.len() {
            if s.basis[r] < n_std {
                r += 1;
                continue;
            }
            let mut e = vec![0.0; s.b.len()];
            e[r] = 1.0;
            let z = s.factor()?.solve_transpose(&e)?;
            let in_basis: Vec<usize> = s.basis.clone();
            let pick = (0..n_std)
                .filter(|j| !in_basis.contains(j))
                .map(|j| (j, dot(&z, &s.cols[j]).abs()))
                .filter(|&(_, v)| v > 1e-9)
                .max_by(|a, b| a.1.total_cmp(&b.1));
            match pick {
                Some((j, _)) => {
                    s.basis[r] = j;
                    r += 1;
                }
                None => s.drop_row(r),
            }
        }
    }

    // Phase 2 on the structural and slack columns only.
    let mut c2 = c_std.clone();
    c2.resize(total, 0.0);
    s.optimize(&c2, n_std, max_pivots)?;

    let xb = s.basic_values()?;
    let mut xs = vec![0.0; n_std];
    for (&j, v) in s.basis.iter().zip(xb) {
        xs[j] = v.max(0.0);
    }
    let x = recover(&maps, &xs);
    let objective = dot(&lp.objective, &x);
    Ok(LpSolution { x, objective })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn recover(maps: &[VarMap], xs: &[f64]) -> Vec<f64> {
    maps.iter()
        .map(|m| match *m {
            VarMap::Shifted { col, lb } => lb + xs[col],
            VarMap::Split { pos, neg } => xs[pos] - xs[neg],
        })
        .collect()
}
