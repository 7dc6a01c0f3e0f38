use std::f64::consts::PI;

use super::saddle::S_MAX;
use crate::error::{Error, Result};
use crate::ld_stats::LdModel;

const QUAD_TOLERANCE: f64 = 1e-11;

/// Saddle-point density normalized to unit mass.
///
/// Integration runs in `s` rather than γ: with `γ(s) = I'_erg(s)/M`,
/// `pdf(γ) |dγ/ds| = pdf(γ) e^{-v2}`, so the integrand is smooth and the
/// γ-range `(0, ∞)` maps onto `(s_edge, ∞)`.
#[derive(Debug, Clone)]
pub struct SaddleDensity {
    model: LdModel,
    s_edge: f64,
    mass_neg: f64,
    mass_pos: f64,
}

impl SaddleDensity {
    pub fn new(model: LdModel) -> Result<Self> {
        let s_edge = find_edge(&model)?;
        let mut d = SaddleDensity {
            model,
            s_edge,
            mass_neg: 0.0,
            mass_pos: 0.0,
        };
        d.mass_neg = d.integrate_finite(s_edge, 0.0);
        d.mass_pos = d.integrate_to_infinity(0.0);
        let total = d.mass_neg + d.mass_pos;
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::UnnormalizableOnHalfLine(format!(
                "saddle-point density has total mass {total}"
            )));
        }
        Ok(d)
    }

    pub fn model(&self) -> &LdModel {
        &self.model
    }

    /// Lower end of the admissible `s` domain.
    pub fn s_edge(&self) -> f64 {
        self.s_edge
    }

    /// `∫ pdf dγ` of the unnormalized saddle-point density over `(0, ∞)`.
    pub fn normalizer(&self) -> f64 {
        self.mass_neg + self.mass_pos
    }

    /// `pdf(γ) dγ/ds` as a function of `s`; zero where the expansion breaks down.
    pub fn weight(&self, s: f64) -> f64 {
        let m = self.model.m() as f64;
        match self.model.point(s, None) {
            Ok(p) => {
                let gamma = p.di / m;
                let ln_w = 0.5 * (m / (2.0 * PI)).ln() + m * s * gamma
                    - (p.i_erg - self.model.i0())
                    + 0.5 * (p.v1 - p.v2);
                if ln_w.is_finite() {
                    ln_w.exp()
                } else {
                    0.0
                }
            }
            Err(_) => 0.0,
        }
    }

    fn integrate_finite(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        quadrature::double_exponential::integrate(|s| self.weight(s), a, b, QUAD_TOLERANCE).integral
    }

    fn integrate_to_infinity(&self, a: f64) -> f64 {
        quadrature::double_exponential::integrate(
            |tau: f64| {
                let one_minus = 1.0 - tau;
                self.weight(a + tau / one_minus) / (one_minus * one_minus)
            },
            0.0,
            1.0,
            QUAD_TOLERANCE,
        )
        .integral
    }

    /// `∫_0^γ pdf dγ'` of the unnormalized density.
    pub fn raw_cdf(&self, gamma: f64) -> Result<f64> {
        let s0 = self.model.solve_saddle(gamma)?.s0;
        Ok(if s0 >= 0.0 {
            self.integrate_to_infinity(s0)
        } else {
            self.normalizer() - self.integrate_finite(self.s_edge, s0)
        })
    }

    pub fn pdf(&self, gamma: f64) -> Result<f64> {
        Ok(self.model.pdf(gamma)? / self.normalizer())
    }

    pub fn cdf(&self, gamma: f64) -> Result<f64> {
        Ok((self.raw_cdf(gamma)? / self.normalizer()).clamp(0.0, 1.0))
    }
}

/// Bisects for the most negative `s` at which the fixed point still exists.
fn find_edge(model: &LdModel) -> Result<f64> {
    let mut good = model.origin().clone();
    let mut s = -0.25 / model.scenario().p0;
    loop {
        match model.fixed_point(s, Some(&good.r)) {
            Ok(fp) => {
                good = fp;
                s *= 2.0;
                if s < -S_MAX {
                    return Err(Error::UnnormalizableOnHalfLine(
                        "no lower edge of the admissible s domain found".into(),
                    ));
                }
            }
            Err(Error::QNotPositiveDefinite { .. }) | Err(Error::NonConvergence { .. }) => {
                return Ok(model.feasibility_edge(s, good).s);
            }
            Err(e) => return Err(e),
        }
    }
}
