//! Fast paths for single-antenna interferers that share one correlation matrix.

use crate::error::{Error, Result};

/// Leading-order density shape for iid single-antenna interferers of equal
/// power `rho`: `e^{-Kγ/ρ} γ^M / (z + γ)^K`. Unnormalized.
pub fn pdf_closed_form_iid(gamma: f64, m: usize, k: usize, rho: f64, z: f64) -> f64 {
    ln_closed_form(gamma, m as f64, k as f64, rho, z).exp()
}

fn ln_closed_form(gamma: f64, m: f64, k: f64, rho: f64, z: f64) -> f64 {
    if gamma <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let damp = if k == 0.0 { 0.0 } else { -k * gamma / rho };
    damp + m * gamma.ln() - k * (z + gamma).ln()
}

/// Normalized version of [`pdf_closed_form_iid`].
#[derive(Debug, Clone, Copy)]
pub struct ClosedFormDensity {
    m: f64,
    k: f64,
    rho: f64,
    z: f64,
    /// Log of the maximum, subtracted before exponentiating.
    ln_peak: f64,
    ln_norm: f64,
    mode: f64,
}

impl ClosedFormDensity {
    pub fn pdf(&self, gamma: f64) -> f64 {
        (ln_closed_form(gamma, self.m, self.k, self.rho, self.z) - self.ln_peak - self.ln_norm).exp()
    }

    /// Location of the maximum.
    pub fn mode(&self) -> f64 {
        self.mode
    }
}

/// Normalizes the closed-form shape on `(0, ∞)`.
pub fn closed_form_iid_normalized(m: usize, k: usize, rho: f64, z: f64) -> Result<ClosedFormDensity> {
    if k == 0 {
        return Err(Error::UnnormalizableOnHalfLine(
            "no interferers: the shape grows like γ^M".into(),
        ));
    }
    if !(rho > 0.0 && rho.is_finite()) || !(z >= 0.0) {
        return Err(Error::InvalidArgument(format!("need rho > 0 and z >= 0, got {rho}, {z}")));
    }
    let (mf, kf) = (m as f64, k as f64);
    if z == 0.0 && mf - kf <= -1.0 {
        return Err(Error::UnnormalizableOnHalfLine(format!(
            "γ^{} is not integrable at 0",
            mf - kf
        )));
    }
    // d/dγ ln f = -K/ρ + M/γ - K/(z+γ) = 0  →  (K/ρ) γ² + (K/ρ z + K - M) γ - M z = 0.
    let a = kf / rho;
    let b = kf / rho * z + kf - mf;
    let c = -mf * z;
    let mode = if z == 0.0 {
        ((mf - kf) / a).max(0.0)
    } else {
        (-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a)
    };
    let scale = if mode > 0.0 { mode } else { rho / kf };
    let ln_peak = ln_closed_form(scale, mf, kf, rho, z);
    let f = |g: f64| (ln_closed_form(g, mf, kf, rho, z) - ln_peak).exp();
    // γ = scale · τ/(1-τ) maps (0, 1) onto (0, ∞).
    let out = quadrature::double_exponential::integrate(
        |tau: f64| {
            let one_minus = 1.0 - tau;
            let g = scale * tau / one_minus;
            f(g) * scale / (one_minus * one_minus)
        },
        0.0,
        1.0,
        1e-13,
    );
    if !(out.integral > 0.0 && out.integral.is_finite()) {
        return Err(Error::UnnormalizableOnHalfLine(format!(
            "normalization integral is {}",
            out.integral
        )));
    }
    Ok(ClosedFormDensity {
        m: mf,
        k: kf,
        rho,
        z,
        ln_peak,
        ln_norm: out.integral.ln(),
        mode,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialCaseSolution {
    pub r: f64,
    pub t: f64,
    pub i_erg: f64,
    /// `γ(s) = p0 t(s)`.
    pub gamma: f64,
    pub iterations: usize,
}

const SC_MAX_ITER: usize = 10_000;
const SC_TOLERANCE: f64 = 1e-12;

/// Scalar fixed point for K single-antenna interferers sharing correlation
/// eigenvalues `r_eigs`, channel variance `1/K`:
///
/// ```text
/// r = (1/K) Σ_k p_k / (z + p_k t)
/// t = (1/K) Σ_i R_i / (1 + R_i (p0 s + r))
/// I = Σ_i ln(1 + R_i (p0 s + r)) + Σ_k ln(z + p_k t) - K r t
/// ```
pub fn solve_special_case(
    r_eigs: &[f64],
    powers: &[f64],
    p0: f64,
    z: f64,
    s: f64,
) -> Result<SpecialCaseSolution> {
    let k = powers.len();
    if k == 0 {
        return Err(Error::InvalidArgument("at least one interferer is required".into()));
    }
    if r_eigs.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::InvalidArgument("correlation eigenvalues must be >= 0".into()));
    }
    if z == 0.0 && powers.iter().any(|&p| !(p > 0.0)) {
        return Err(Error::InvalidArgument("zero forcing needs positive powers".into()));
    }
    let kf = k as f64;
    let t_of = |r: f64| -> Option<f64> {
        let mut acc = 0.0;
        for &ri in r_eigs {
            let d = 1.0 + ri * (p0 * s + r);
            if !(d > 0.0) {
                return None;
            }
            acc += ri / d;
        }
        Some(acc / kf)
    };
    let r_of = |t: f64| -> f64 {
        powers
            .iter()
            .map(|&p| if p == 0.0 { 0.0 } else { p / (z + p * t) })
            .sum::<f64>()
            / kf
    };
    let infeasible = || Error::QNotPositiveDefinite { s };

    // Lower bound for s >= 0: t at r = 0, s = 0.
    let mut r = if s >= 0.0 {
        r_of(r_eigs.iter().sum::<f64>() / kf)
    } else {
        solve_special_case(r_eigs, powers, p0, z, 0.0)?.r
    };
    let mut last = f64::INFINITY;
    for iter in 1..=SC_MAX_ITER {
        let t = t_of(r).ok_or_else(infeasible)?;
        let r_new = r_of(t);
        let res = (r_new - r).abs() / r.abs().max(1.0);
        if res <= SC_TOLERANCE {
            let x = p0 * s + r;
            let i_erg = r_eigs.iter().map(|&ri| (1.0 + ri * x).ln()).sum::<f64>()
                + powers.iter().map(|&p| (z + p * t).ln()).sum::<f64>()
                - kf * r * t;
            return Ok(SpecialCaseSolution {
                r,
                t,
                i_erg,
                gamma: p0 * t,
                iterations: iter,
            });
        }
        let step = if res > last { 0.5 } else { 1.0 };
        r += step * (r_new - r);
        last = res;
    }
    Err(Error::NonConvergence {
        what: "special-case fixed point",
        iterations: SC_MAX_ITER,
        residual: last,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_interference_power() {
        let eigs = [0.5, 1.5];
        let sol = solve_special_case(&eigs, &[0.0, 0.0], 2.0, 1.0, 0.3).unwrap();
        assert_eq!(sol.r, 0.0);
        let want = (0.5 / (1.0 + 0.5 * 0.6) + 1.5 / (1.0 + 1.5 * 0.6)) / 2.0;
        assert!((sol.t - want).abs() < 1e-15);
    }

    #[test]
    fn k_zero_is_unnormalizable() {
        assert!(matches!(
            closed_form_iid_normalized(3, 0, 1.0, 1.0),
            Err(Error::UnnormalizableOnHalfLine(_))
        ));
    }

    #[test]
    fn zf_shape_is_gamma() {
        let (m, k, rho) = (6, 2, 1.5);
        let d = closed_form_iid_normalized(m, k, rho, 0.0).unwrap();
        assert!((d.mode() - (m - k) as f64 * rho / k as f64).abs() < 1e-12);
        // Gamma(shape M-K+1, rate K/ρ) density.
        let shape = (m - k + 1) as f64;
        let rate = k as f64 / rho;
        for &g in &[0.3, 2.0, 5.0] {
            let want = (shape * rate.ln() + (shape - 1.0) * f64::ln(g) - rate * g
                - libm::lgamma(shape))
            .exp();
            assert!((d.pdf(g) - want).abs() < 1e-11 * want.max(1.0), "g = {g}");
        }
    }
}
