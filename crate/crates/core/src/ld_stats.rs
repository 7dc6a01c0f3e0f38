//! Large-deviations quantities at a point `s`: ergodic information, its first
//! two derivatives, the CLT variance `v1` and the curvature term `v2`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fixed_point::{solve_fixed_point, FixedPointSolution};
use crate::linalg::{self, CMatrix};
use crate::scenario::Scenario;

#[derive(Debug, Clone)]
pub struct LdPoint {
    pub s: f64,
    /// `I_erg(s)` in nats.
    pub i_erg: f64,
    /// `I'_erg(s) = p0 tr[R0 Q^{-1}]`, not divided by M.
    pub di: f64,
    /// `I''_erg(s) = M δI''`.
    pub d2i: f64,
    pub v1: f64,
    /// `-ln|δI''|`.
    pub v2: f64,
    pub fixed_point: FixedPointSolution,
}

impl LdPoint {
    /// Per-antenna second derivative `δI'' = I''_erg / M`.
    pub fn delta_d2i(&self, m: usize) -> f64 {
        self.d2i / m as f64
    }
}

/// Π and Σ matrices over the interferer blocks, plus the signal row/column.
///
/// `Pi2[a][b] = tr[R_a Q(s)^{-1} R_b Q(s)^{-1}] / N_a`. These are not
/// symmetric unless the `N_a` agree; `N_a Pi2[a][b]` is.
#[derive(Debug, Clone)]
pub struct PiSigma {
    pub pi2: DMatrix<f64>,
    pub pi0: DMatrix<f64>,
    pub pi1: DMatrix<f64>,
    pub sigma2: DVector<f64>,
    pub sigma0: DVector<f64>,
    pub sigma1: DVector<f64>,
    /// `Π₂,0j = tr[R_0 Q^{-1} R_j Q^{-1}] / M`.
    pub pi2_row0: DVector<f64>,
    /// `Π₂,j0 = tr[R_j Q^{-1} R_0 Q^{-1}] / N_j`.
    pub pi2_col0: DVector<f64>,
    pub pi2_00: f64,
}

fn sigma_sq(sc: &Scenario, t: &[f64]) -> Vec<f64> {
    let z = sc.z();
    sc.blocks
        .iter()
        .zip(t)
        .map(|(b, &tk)| (b.p / (z + b.p * tk)).powi(2))
        .collect()
}

fn pi_sigma_from(sc: &Scenario, at_s: &FixedPointSolution, at_0: &FixedPointSolution) -> PiSigma {
    let k = sc.k();
    let m = sc.m as f64;
    let x0 = at_s.solve_q(&sc.r0);
    let xs: Vec<CMatrix> = sc.blocks.iter().map(|b| at_s.solve_q(&b.r)).collect();
    let ys: Vec<CMatrix> = sc.blocks.iter().map(|b| at_0.solve_q(&b.r)).collect();
    let n = |a: usize| sc.blocks[a].n as f64;

    let pi2 = DMatrix::from_fn(k, k, |a, b| linalg::trace_product(&xs[a], &xs[b]) / n(a));
    let pi0 = DMatrix::from_fn(k, k, |a, b| linalg::trace_product(&ys[a], &ys[b]) / n(a));
    let pi1 = DMatrix::from_fn(k, k, |a, b| linalg::trace_product(&ys[a], &xs[b]) / n(a));

    let s2 = sigma_sq(sc, &at_s.t);
    let s0 = sigma_sq(sc, &at_0.t);
    PiSigma {
        pi2,
        pi0,
        pi1,
        sigma1: DVector::from_fn(k, |a, _| (s2[a] * s0[a]).sqrt()),
        sigma2: DVector::from_vec(s2),
        sigma0: DVector::from_vec(s0),
        pi2_row0: DVector::from_fn(k, |j, _| linalg::trace_product(&x0, &xs[j]) / m),
        pi2_col0: DVector::from_fn(k, |j, _| linalg::trace_product(&xs[j], &x0) / n(j)),
        pi2_00: linalg::trace_product(&x0, &x0) / m,
    }
}

/// `I - Π diag(σ)`.
fn fluctuation(pi: &DMatrix<f64>, sigma: &DVector<f64>) -> DMatrix<f64> {
    let k = pi.nrows();
    DMatrix::from_fn(k, k, |a, b| if a == b { 1.0 } else { 0.0 } - pi[(a, b)] * sigma[b])
}

fn ln_det_checked(a: &DMatrix<f64>, s: f64) -> Result<f64> {
    let det = linalg::det_real(a);
    if det > 0.0 && det.is_finite() {
        Ok(det.ln())
    } else {
        Err(Error::SingularFluctuation { s, det })
    }
}

fn v1_from(ps: &PiSigma, s: f64) -> Result<f64> {
    if ps.pi2.nrows() == 0 {
        return Ok(0.0);
    }
    let a = ln_det_checked(&fluctuation(&ps.pi2, &ps.sigma2), s)?;
    let b = ln_det_checked(&fluctuation(&ps.pi0, &ps.sigma0), s)?;
    let c = ln_det_checked(&fluctuation(&ps.pi1, &ps.sigma1), s)?;
    Ok(-a - b + 2.0 * c)
}

/// Per-antenna second derivative `δI''(s)`.
///
/// Implicit differentiation of the fixed point gives
/// `r' = p0 Σ₂ (I - Π₂Σ₂)^{-1} Π₂,·0`, so the trailing factor carries the
/// `1/N_j` normalization of `Π₂,j0`.
fn delta_d2i_from(sc: &Scenario, ps: &PiSigma, s: f64) -> Result<f64> {
    let p0 = sc.p0;
    if sc.k() == 0 {
        return Ok(-p0 * p0 * ps.pi2_00);
    }
    let f = fluctuation(&ps.pi2, &ps.sigma2);
    let det = linalg::det_real(&f);
    if !(det > 0.0 && det.is_finite()) {
        return Err(Error::SingularFluctuation { s, det });
    }
    let y = f
        .lu()
        .solve(&ps.pi2_col0)
        .ok_or(Error::SingularFluctuation { s, det })?;
    let cross: f64 = (0..sc.k()).map(|j| ps.pi2_row0[j] * ps.sigma2[j] * y[j]).sum();
    Ok(-p0 * p0 * (ps.pi2_00 + cross))
}

fn ergodic_info_from(sc: &Scenario, fp: &FixedPointSolution) -> Result<f64> {
    let z = sc.z();
    let mut i = fp.logdet_q();
    for ((b, &r), &t) in sc.blocks.iter().zip(&fp.r).zip(&fp.t) {
        let n = b.n as f64;
        let arg = z + b.p * t;
        if !(arg > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "log argument z + p t = {arg} is not positive"
            )));
        }
        i += n * arg.ln() - n * r * t;
    }
    Ok(i)
}

fn ergodic_info_deriv_from(sc: &Scenario, fp: &FixedPointSolution) -> f64 {
    sc.p0 * linalg::trace_re(&fp.solve_q(&sc.r0))
}

/// Evaluator that caches the `s = 0` fixed point shared by every quantity.
#[derive(Debug, Clone)]
pub struct LdModel {
    scenario: Scenario,
    origin: FixedPointSolution,
    i0: f64,
    di0: f64,
}

impl LdModel {
    pub fn new(sc: &Scenario) -> Result<Self> {
        let origin = solve_fixed_point(sc, 0.0, None)?;
        let i0 = ergodic_info_from(sc, &origin)?;
        let di0 = ergodic_info_deriv_from(sc, &origin);
        Ok(LdModel {
            scenario: sc.clone(),
            origin,
            i0,
            di0,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn m(&self) -> usize {
        self.scenario.m
    }

    pub fn origin(&self) -> &FixedPointSolution {
        &self.origin
    }

    /// `I_erg(0)`.
    pub fn i0(&self) -> f64 {
        self.i0
    }

    /// `γ_erg = I'_erg(0) / M`.
    pub fn ergodic_sinr(&self) -> f64 {
        self.di0 / self.scenario.m as f64
    }

    /// Fixed point at `s`, warm-started from `init` or from a bound.
    pub fn fixed_point(&self, s: f64, init: Option<&[f64]>) -> Result<FixedPointSolution> {
        if s == 0.0 {
            return Ok(self.origin.clone());
        }
        let init = init.or(if s < 0.0 { Some(&self.origin.r[..]) } else { None });
        solve_fixed_point(&self.scenario, s, init)
    }

    pub fn info(&self, fp: &FixedPointSolution) -> Result<f64> {
        ergodic_info_from(&self.scenario, fp)
    }

    pub fn info_deriv(&self, fp: &FixedPointSolution) -> f64 {
        ergodic_info_deriv_from(&self.scenario, fp)
    }

    pub fn pi_sigma(&self, fp: &FixedPointSolution) -> PiSigma {
        pi_sigma_from(&self.scenario, fp, &self.origin)
    }

    /// Per-antenna `δI''` at an already solved fixed point.
    pub fn delta_d2i(&self, fp: &FixedPointSolution) -> Result<f64> {
        let ps = self.pi_sigma(fp);
        delta_d2i_from(&self.scenario, &ps, fp.s)
    }

    /// All quantities at `s`.
    pub fn point(&self, s: f64, init: Option<&[f64]>) -> Result<LdPoint> {
        let fp = self.fixed_point(s, init)?;
        self.point_at(fp)
    }

    pub fn point_at(&self, fp: FixedPointSolution) -> Result<LdPoint> {
        let sc = &self.scenario;
        let s = fp.s;
        let ps = self.pi_sigma(&fp);
        let v1 = if s == 0.0 { 0.0 } else { v1_from(&ps, s)? };
        let dd2 = delta_d2i_from(sc, &ps, s)?;
        Ok(LdPoint {
            s,
            i_erg: self.info(&fp)?,
            di: self.info_deriv(&fp),
            d2i: sc.m as f64 * dd2,
            v1,
            v2: -dd2.abs().ln(),
            fixed_point: fp,
        })
    }

    /// `ln E[e^{-M s γ}] ≈ -(I_erg(s) - I_erg(0)) + v1(s)/2`.
    pub fn log_mgf(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(0.0);
        }
        let fp = self.fixed_point(s, None)?;
        Ok(-(self.info(&fp)? - self.i0) + 0.5 * self.v1_at(&fp)?)
    }

    /// `v1(s)` alone.
    pub fn variance_v1(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(0.0);
        }
        self.v1_at(&self.fixed_point(s, None)?)
    }

    pub fn v1_at(&self, fp: &FixedPointSolution) -> Result<f64> {
        if fp.s == 0.0 {
            return Ok(0.0);
        }
        v1_from(&self.pi_sigma(fp), fp.s)
    }
}

/// `I_erg(s) = ln det Q + Σ N_k ln(z + p_k t_k) - Σ N_k r_k t_k`.
pub fn ergodic_info(sc: &Scenario, s: f64) -> Result<f64> {
    let fp = solve_fixed_point(sc, s, None)?;
    ergodic_info_from(sc, &fp)
}

/// `I'_erg(s) = p0 tr[R0 Q(s)^{-1}]`, not divided by M.
pub fn ergodic_info_deriv(sc: &Scenario, s: f64) -> Result<f64> {
    let fp = solve_fixed_point(sc, s, None)?;
    Ok(ergodic_info_deriv_from(sc, &fp))
}

pub fn pi_sigma(sc: &Scenario, s0: f64) -> Result<PiSigma> {
    let model = LdModel::new(sc)?;
    let fp = model.fixed_point(s0, None)?;
    Ok(model.pi_sigma(&fp))
}

pub fn variance_v1(sc: &Scenario, s0: f64) -> Result<f64> {
    LdModel::new(sc)?.variance_v1(s0)
}

/// Returns `(I''_erg, v2)` with `I''_erg = M δI''` and `v2 = -ln|δI''|`.
pub fn second_deriv_v2(sc: &Scenario, s0: f64) -> Result<(f64, f64)> {
    let model = LdModel::new(sc)?;
    let fp = model.fixed_point(s0, None)?;
    let dd2 = model.delta_d2i(&fp)?;
    Ok((sc.m as f64 * dd2, -dd2.abs().ln()))
}

pub fn log_mgf(sc: &Scenario, s: f64) -> Result<f64> {
    LdModel::new(sc)?.log_mgf(s)
}

pub fn ergodic_sinr(sc: &Scenario) -> Result<f64> {
    Ok(LdModel::new(sc)?.ergodic_sinr())
}
