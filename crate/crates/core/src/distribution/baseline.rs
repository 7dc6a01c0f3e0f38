use std::f64::consts::LN_10;

use crate::error::Result;
use crate::ld_stats::LdModel;
use crate::scenario::Scenario;
use crate::special;

/// Log-normal reference: `10 log10 γ ~ N(γ_dB_erg, σ²_dB)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBaseline {
    pub gamma_erg: f64,
    /// Variance of γ from the curvature of the log-MGF at 0.
    pub variance: f64,
    pub gamma_db_erg: f64,
    pub sigma2_db: f64,
}

impl GaussianBaseline {
    pub fn pdf_db(&self, gamma_db: f64) -> f64 {
        let sd = self.sigma2_db.sqrt();
        special::phi((gamma_db - self.gamma_db_erg) / sd) / sd
    }

    /// Density per unit linear γ.
    pub fn pdf(&self, gamma: f64) -> f64 {
        if gamma <= 0.0 {
            return 0.0;
        }
        self.pdf_db(10.0 * gamma.log10()) * 10.0 / (gamma * LN_10)
    }

    pub fn cdf(&self, gamma: f64) -> f64 {
        if gamma <= 0.0 {
            return 0.0;
        }
        let x = (10.0 * gamma.log10() - self.gamma_db_erg) / self.sigma2_db.sqrt();
        special::q_function(-x)
    }

    /// `γ` at which the dB-domain normal reaches probability `p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let x = normal_quantile(p);
        10f64.powf((self.gamma_db_erg + x * self.sigma2_db.sqrt()) / 10.0)
    }
}

/// Inverse standard normal CDF by bisection on `Q`.
fn normal_quantile(p: f64) -> f64 {
    let (mut lo, mut hi) = (-40.0, 40.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if 1.0 - special::q_function(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

impl LdModel {
    /// `Var γ = (ln g)''(0) / M²` by a central difference with `h = 1e-4/M`.
    pub fn gaussian_baseline(&self) -> Result<GaussianBaseline> {
        let m = self.m() as f64;
        let h = 1e-4 / m;
        let curvature = (self.log_mgf(h)? + self.log_mgf(-h)?) / (h * h);
        let variance = curvature / (m * m);
        let gamma_erg = self.ergodic_sinr();
        let k = 10.0 / LN_10;
        Ok(GaussianBaseline {
            gamma_erg,
            variance,
            gamma_db_erg: 10.0 * gamma_erg.log10(),
            sigma2_db: k * k * variance / (gamma_erg * gamma_erg),
        })
    }
}

pub fn gaussian_baseline(sc: &Scenario) -> Result<GaussianBaseline> {
    LdModel::new(sc)?.gaussian_baseline()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_inverts_cdf() {
        let b = GaussianBaseline {
            gamma_erg: 2.0,
            variance: 0.5,
            gamma_db_erg: 10.0 * 2f64.log10(),
            sigma2_db: 4.0,
        };
        for &p in &[1e-6, 0.2, 0.5, 0.9] {
            assert!((b.cdf(b.quantile(p)) - p).abs() < 1e-9 * p.max(1e-3));
        }
    }
}
