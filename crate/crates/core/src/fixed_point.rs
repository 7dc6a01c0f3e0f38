//! Deterministic-equivalent fixed point `(r_k, t_k)` at a real point `s`.
//!
//! With `Q(s) = I + p0 s R0 + Σ r_k R_k` the system is
//!
//! ```text
//! t_k = tr[R_k Q^{-1}] / N_k
//! r_k = p_k / (z + p_k t_k)
//! ```
//!
//! The composite map `r -> r(t(r))` is order preserving, so Picard iteration
//! started from a lower or upper bound moves monotonically toward the unique
//! solution and never leaves the region where `Q` is positive definite.

use crate::error::{Error, Result};
use crate::linalg::{self, CCholesky, CMatrix, C64};
use crate::scenario::Scenario;

pub const MAX_ITER: usize = 10_000;
pub const TOLERANCE: f64 = 1e-12;
/// Extra sweeps after reaching tolerance, kept while the residual shrinks.
const POLISH_SWEEPS: usize = 8;

#[derive(Debug, Clone)]
pub struct FixedPointSolution {
    pub s: f64,
    pub z: f64,
    pub r: Vec<f64>,
    pub t: Vec<f64>,
    pub q: CMatrix,
    pub residual: f64,
    pub iterations: usize,
    chol: CCholesky,
}

impl FixedPointSolution {
    pub fn logdet_q(&self) -> f64 {
        linalg::logdet_chol(&self.chol)
    }

    /// `Q^{-1} B` via the stored Cholesky factor.
    pub fn solve_q(&self, b: &CMatrix) -> CMatrix {
        self.chol.solve(b)
    }
}

/// Builds `Q(s)` for a given `r`.
pub fn q_matrix(sc: &Scenario, s: f64, r: &[f64]) -> CMatrix {
    let mut q = linalg::identity(sc.m) + &sc.r0 * C64::new(sc.p0 * s, 0.0);
    for (b, &rk) in sc.blocks.iter().zip(r) {
        q += &b.r * C64::new(rk, 0.0);
    }
    q
}

fn t_of_r(sc: &Scenario, s: f64, r: &[f64]) -> Result<(Vec<f64>, CMatrix, CCholesky)> {
    let q = q_matrix(sc, s, r);
    let chol = linalg::cholesky(&q).ok_or(Error::QNotPositiveDefinite { s })?;
    let t = sc
        .blocks
        .iter()
        .map(|b| linalg::trace_re(&chol.solve(&b.r)) / b.n as f64)
        .collect();
    Ok((t, q, chol))
}

fn r_of_t(sc: &Scenario, t: &[f64]) -> Vec<f64> {
    let z = sc.z();
    sc.blocks
        .iter()
        .zip(t)
        .map(|(b, &tk)| if b.p == 0.0 { 0.0 } else { b.p / (z + b.p * tk) })
        .collect()
}

fn residual(r: &[f64], r_new: &[f64]) -> f64 {
    r.iter()
        .zip(r_new)
        .map(|(&a, &b)| (a - b).abs() / a.abs().max(1.0))
        .fold(0.0, f64::max)
}

/// Solves the fixed point at `s`, optionally warm-started from `init`.
///
/// Without `init`, `s >= 0` starts from the `Q = I` lower bound and `s < 0`
/// from the `s = 0` solution, which bounds the answer from above. A converged
/// solution at any other point is also a safe start.
pub fn solve_fixed_point(sc: &Scenario, s: f64, init: Option<&[f64]>) -> Result<FixedPointSolution> {
    if !s.is_finite() {
        return Err(Error::InvalidArgument(format!("s = {s} is not finite")));
    }
    let k = sc.k();
    let mut r: Vec<f64> = match init {
        Some(r0) if r0.len() == k => r0.to_vec(),
        Some(r0) => {
            return Err(Error::InvalidArgument(format!(
                "initial r has length {}, expected {k}",
                r0.len()
            )))
        }
        None if s >= 0.0 || k == 0 => {
            let t0: Vec<f64> = sc
                .blocks
                .iter()
                .map(|b| linalg::trace_re(&b.r) / b.n as f64)
                .collect();
            r_of_t(sc, &t0)
        }
        None => solve_fixed_point(sc, 0.0, None)?.r,
    };

    let mut last_res = f64::INFINITY;
    for iter in 1..=MAX_ITER {
        let (t, q, chol) = t_of_r(sc, s, &r)?;
        let r_new = r_of_t(sc, &t);
        let res = residual(&r, &r_new);
        if res <= TOLERANCE {
            return Ok(polish(sc, s, r, t, q, chol, res, iter));
        }
        let step = if res > last_res { 0.5 } else { 1.0 };
        for (rk, nk) in r.iter_mut().zip(&r_new) {
            *rk += step * (nk - *rk);
        }
        last_res = res;
    }
    Err(Error::NonConvergence {
        what: "fixed point",
        iterations: MAX_ITER,
        residual: last_res,
    })
}

#[allow(clippy::too_many_arguments)]
fn polish(
    sc: &Scenario,
    s: f64,
    mut r: Vec<f64>,
    mut t: Vec<f64>,
    mut q: CMatrix,
    mut chol: CCholesky,
    mut res: f64,
    mut iterations: usize,
) -> FixedPointSolution {
    for _ in 0..POLISH_SWEEPS {
        if res == 0.0 {
            break;
        }
        let cand = r_of_t(sc, &t);
        let Ok((t2, q2, chol2)) = t_of_r(sc, s, &cand) else { break };
        let res2 = residual(&cand, &r_of_t(sc, &t2));
        if res2 >= res {
            break;
        }
        (r, t, q, chol, res) = (cand, t2, q2, chol2, res2);
        iterations += 1;
    }
    FixedPointSolution {
        s,
        z: sc.z(),
        r,
        t,
        q,
        residual: res,
        iterations,
        chol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ReceiverMode;

    #[test]
    fn no_blocks() {
        let sc = Scenario::iid(3, 2.0, &[], ReceiverMode::Mmse).unwrap();
        let fp = solve_fixed_point(&sc, -0.1, None).unwrap();
        assert!(fp.r.is_empty() && fp.t.is_empty());
        assert!((fp.q[(0, 0)].re - 0.8).abs() < 1e-15);
    }

    #[test]
    fn golden_ratio_case() {
        let sc = Scenario::iid(2, 2.0, &[(2, 1.0)], ReceiverMode::Mmse).unwrap();
        let fp = solve_fixed_point(&sc, 0.0, None).unwrap();
        let g = (5f64.sqrt() - 1.0) / 2.0;
        assert!((fp.r[0] - g).abs() < 1e-12);
        assert!((fp.t[0] - g).abs() < 1e-12);
        assert!(fp.residual <= TOLERANCE);
    }

    #[test]
    fn zero_power_block() {
        let sc = Scenario::iid(2, 2.0, &[(2, 0.0)], ReceiverMode::Mmse).unwrap();
        let fp = solve_fixed_point(&sc, 0.0, None).unwrap();
        assert_eq!(fp.r[0], 0.0);
        assert!((fp.t[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zf_unit_solution() {
        let sc = Scenario::iid(4, 1.0, &[(2, 1.0)], ReceiverMode::Zf).unwrap();
        let fp = solve_fixed_point(&sc, 0.0, None).unwrap();
        assert!((fp.t[0] - 1.0).abs() < 1e-12);
        assert!((fp.r[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_s_reports_q() {
        let sc = Scenario::iid(2, 2.0, &[], ReceiverMode::Mmse).unwrap();
        assert!(matches!(
            solve_fixed_point(&sc, -0.6, None),
            Err(Error::QNotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn bad_init_length() {
        let sc = Scenario::iid(2, 2.0, &[(1, 1.0)], ReceiverMode::Mmse).unwrap();
        assert!(solve_fixed_point(&sc, 0.0, Some(&[0.1, 0.2])).is_err());
    }
}
