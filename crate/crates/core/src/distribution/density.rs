use std::f64::consts::{LN_10, PI};

use super::saddle::SaddleResult;
use crate::error::Result;
use crate::ld_stats::LdModel;
use crate::scenario::Scenario;
use crate::special;

impl LdModel {
    /// `ln` of the saddle-point density at an already solved saddle.
    pub fn ln_pdf_at(&self, sr: &SaddleResult) -> f64 {
        let m = self.m() as f64;
        let ld = &sr.ld;
        0.5 * (m / (2.0 * PI)).ln() + m * sr.s0 * sr.gamma - (ld.i_erg - self.i0())
            + 0.5 * (ld.v1 + ld.v2)
    }

    /// Saddle-point density of γ, per unit linear γ.
    ///
    /// `√(M/2π) exp(M s0 γ - ΔI_erg(s0) + (v1 + v2)/2)`. This is not exactly
    /// normalized; see [`super::SaddleDensity`] for the normalized variant.
    pub fn pdf(&self, gamma: f64) -> Result<f64> {
        let sr = self.solve_saddle(gamma)?;
        Ok(self.ln_pdf_at(&sr).exp())
    }

    /// `ln` of the tail term shared by both branches of the outage formula.
    pub fn ln_cdf_tail_at(&self, sr: &SaddleResult) -> f64 {
        let m = self.m() as f64;
        let ld = &sr.ld;
        let s0 = sr.s0;
        let x = ld.d2i.abs().sqrt() * s0.abs();
        m * s0 * sr.gamma - (ld.i_erg - self.i0()) - 0.5 * s0 * s0 * ld.d2i + 0.5 * ld.v1
            + special::ln_q(x)
    }

    /// Outage probability from the Q-function interpolation at a solved saddle.
    pub fn cdf_at(&self, sr: &SaddleResult) -> f64 {
        if sr.s0 == 0.0 {
            return 0.5;
        }
        let tail = self.ln_cdf_tail_at(sr).exp().min(1.0);
        if sr.s0 > 0.0 {
            tail
        } else {
            1.0 - tail
        }
    }

    /// Outage probability `P(γ' < γ)`.
    pub fn cdf(&self, gamma: f64) -> Result<f64> {
        let sr = self.solve_saddle(gamma)?;
        Ok(self.cdf_at(&sr))
    }
}

/// Density of `10 log10 γ` given the linear-domain density at γ.
pub fn pdf_db_from_linear(pdf_linear: f64, gamma: f64) -> f64 {
    pdf_linear * gamma * LN_10 / 10.0
}

pub fn pdf(sc: &Scenario, gamma: f64) -> Result<f64> {
    LdModel::new(sc)?.pdf(gamma)
}

pub fn cdf(sc: &Scenario, gamma: f64) -> Result<f64> {
    LdModel::new(sc)?.cdf(gamma)
}
