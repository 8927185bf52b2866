//! Numeric kernels shared by every other module: bracketed root finding,
//! box-constrained 2-D maximization, dense linear solves and a small dense
//! simplex solver, plus a few cancellation-free elementary functions.

mod linalg;
mod lp;
mod optimize;
mod root;
pub mod stable;

pub use linalg::{solve_dense_linear, LuDecomposition};
pub use lp::{solve_lp, LinearProgram, LpSolution};
pub use optimize::{golden_section_max, maximize_2d, Maximum2d, GRID_SIZE};
pub use root::find_root_bracketed;

use serde::{Deserialize, Serialize};

use crate::error::{QmError, Result};

/// Tolerances and iteration caps shared by all solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Final bracket width for root finding.
    pub root_abs_tol: f64,
    /// Relative objective change that ends a 2-D refinement.
    pub opt_rel_tol: f64,
    /// Feasibility tolerance for linear solves and linear programs.
    pub lp_feas_tol: f64,
    /// Iteration cap per solver. The simplex solver scales it by problem size.
    pub max_iter: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            root_abs_tol: 1e-12,
            opt_rel_tol: 1e-9,
            lp_feas_tol: 1e-10,
            max_iter: 200,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let tols = [self.root_abs_tol, self.opt_rel_tol, self.lp_feas_tol];
        if tols.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(QmError::param("tolerances must be finite and strictly positive"));
        }
        if self.max_iter == 0 {
            return Err(QmError::param("max_iter must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        let cfg = ToleranceConfig::default();
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.max_iter, 200);
    }

    #[test]
    fn rejects_bad_tolerances() {
        let mut cfg = ToleranceConfig::default();
        cfg.root_abs_tol = 0.0;
        assert!(cfg.validate().is_err());
        cfg = ToleranceConfig::default();
        cfg.max_iter = 0;
        assert!(cfg.validate().is_err());
        cfg = ToleranceConfig::default();
        cfg.lp_feas_tol = f64::NAN;
        assert!(cfg.validate().is_err());
    }
}
