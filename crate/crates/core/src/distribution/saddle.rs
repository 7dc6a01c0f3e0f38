use crate::error::{Error, Result};
use crate::fixed_point::FixedPointSolution;
use crate::ld_stats::{LdModel, LdPoint};
use crate::scenario::Scenario;

/// Upper end of the search in `s`. Small SINR targets need `s0 ~ 1/γ`.
pub const S_MAX: f64 = 1e8;
pub const MAX_ITER: usize = 200;
pub const REL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SaddleResult {
    pub gamma: f64,
    pub s0: f64,
    pub ld: LdPoint,
}

struct Probe {
    fp: FixedPointSolution,
    /// `dI(s)/M - γ`, decreasing in `s`.
    phi: f64,
}

impl LdModel {
    fn probe(&self, gamma: f64, s: f64, init: Option<&[f64]>) -> Result<Probe> {
        let fp = self.fixed_point(s, init)?;
        let phi = self.info_deriv(&fp) / self.m() as f64 - gamma;
        Ok(Probe { fp, phi })
    }

    /// Lowest feasible `s` reached by bisection between a feasible `hi` and an
    /// infeasible `lo`, together with the solution there.
    pub(crate) fn feasibility_edge(&self, mut lo: f64, mut hi: FixedPointSolution) -> FixedPointSolution {
        while hi.s - lo > 1e-13 * hi.s.abs().max(1e-3) {
            let mid = 0.5 * (lo + hi.s);
            match self.fixed_point(mid, Some(&hi.r)) {
                Ok(fp) => hi = fp,
                Err(_) => lo = mid,
            }
        }
        hi
    }

    /// Solves `γ = I'_erg(s0)/M` for the unique real `s0`.
    pub fn solve_saddle(&self, gamma: f64) -> Result<SaddleResult> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidArgument(format!("gamma = {gamma} must be positive")));
        }
        let origin = self.probe(gamma, 0.0, None)?;
        if origin.phi == 0.0 {
            return self.finish(gamma, origin.fp);
        }
        let (mut lo, mut hi) = if origin.phi > 0.0 {
            (origin, self.bracket_up(gamma)?)
        } else {
            (self.bracket_down(gamma)?, origin)
        };

        for _ in 0..MAX_ITER {
            // Newton from the endpoint with the smaller residual.
            let base = if lo.phi.abs() < hi.phi.abs() { &lo } else { &hi };
            let newton = self
                .delta_d2i(&base.fp)
                .ok()
                .map(|dd2| base.fp.s - base.phi / dd2)
                .filter(|s| *s > lo.fp.s && *s < hi.fp.s);
            let s = newton.unwrap_or(0.5 * (lo.fp.s + hi.fp.s));
            let init = if s > base.fp.s { lo.fp.r.clone() } else { hi.fp.r.clone() };
            let p = self.probe(gamma, s, Some(&init))?;
            if p.phi.abs() <= REL_TOLERANCE * gamma {
                return self.finish(gamma, p.fp);
            }
            if p.phi > 0.0 {
                lo = p;
            } else {
                hi = p;
            }
            if hi.fp.s - lo.fp.s <= 4.0 * f64::EPSILON * lo.fp.s.abs().max(hi.fp.s.abs()) {
                break;
            }
        }
        Err(Error::NonConvergence {
            what: "saddle point",
            iterations: MAX_ITER,
            residual: lo.phi.abs().min(hi.phi.abs()),
        })
    }

    /// `γ < γ_erg`: double `s` until `dI/M` drops below `γ`.
    fn bracket_up(&self, gamma: f64) -> Result<Probe> {
        let mut s = 1.0;
        let mut init: Option<Vec<f64>> = None;
        while s <= S_MAX {
            let p = self.probe(gamma, s, init.as_deref())?;
            if p.phi <= 0.0 {
                return Ok(p);
            }
            init = Some(p.fp.r.clone());
            s *= 2.0;
        }
        Err(Error::GammaOutOfRange {
            gamma,
            reason: "requires s beyond the search limit",
        })
    }

    /// `γ > γ_erg`: step to negative `s`, halving toward the last feasible
    /// point whenever `Q(s)` stops being positive definite.
    fn bracket_down(&self, gamma: f64) -> Result<Probe> {
        let scale = 1.0 / self.scenario().p0;
        let mut feasible_s = 0.0;
        let mut feasible_r = self.origin().r.clone();
        let mut infeasible: Option<f64> = None;
        let mut s = -0.25 * scale;
        loop {
            match self.probe(gamma, s, Some(&feasible_r)) {
                Ok(p) if p.phi >= 0.0 => return Ok(p),
                Ok(p) => {
                    feasible_s = s;
                    feasible_r = p.fp.r;
                    s = match infeasible {
                        Some(bad) => 0.5 * (bad + s),
                        None => 2.0 * s,
                    };
                }
                Err(Error::QNotPositiveDefinite { .. }) | Err(Error::NonConvergence { .. }) => {
                    infeasible = Some(s);
                    s = 0.5 * (s + feasible_s);
                }
                Err(e) => return Err(e),
            }
            if let Some(bad) = infeasible {
                if (feasible_s - bad).abs() <= 1e-14 * bad.abs().max(1e-300) {
                    return Err(Error::GammaOutOfRange {
                        gamma,
                        reason: "above the supremum of dI/M on the admissible domain",
                    });
                }
            }
            if s < -S_MAX {
                return Err(Error::GammaOutOfRange {
                    gamma,
                    reason: "requires s beyond the search limit",
                });
            }
        }
    }

    fn finish(&self, gamma: f64, fp: FixedPointSolution) -> Result<SaddleResult> {
        let ld = self.point_at(fp)?;
        Ok(SaddleResult { gamma, s0: ld.s, ld })
    }
}

/// Free-function form of [`LdModel::solve_saddle`].
pub fn solve_saddle(sc: &Scenario, gamma: f64) -> Result<SaddleResult> {
    LdModel::new(sc)?.solve_saddle(gamma)
}
