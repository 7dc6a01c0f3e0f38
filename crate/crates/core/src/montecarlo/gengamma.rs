use crate::error::{Error, Result};
use crate::special::ln_gamma;

use super::McSummary;

const BETA_MIN: f64 = 0.05;
const BETA_MAX: f64 = 50.0;
const BETA_GRID: usize = 400;
const LN_K_MIN: f64 = -9.2; // k ≈ 1e-4
const LN_K_MAX: f64 = 13.8; // k ≈ 1e6

/// Generalized Gamma law with density `∝ γ^{kβ-1} e^{-(γ/θ)^β}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenGammaFit {
    pub k: f64,
    pub theta: f64,
    pub beta: f64,
}

impl GenGammaFit {
    pub fn pdf(&self, gamma: f64) -> f64 {
        if gamma <= 0.0 {
            return 0.0;
        }
        let u = gamma / self.theta;
        (self.beta.ln() - self.theta.ln() + (self.k * self.beta - 1.0) * u.ln()
            - u.powf(self.beta)
            - ln_gamma(self.k))
        .exp()
    }

    /// Raw moment `E γ^n = θ^n Γ(k + n/β) / Γ(k)`.
    pub fn moment(&self, n: f64) -> f64 {
        (n * self.theta.ln() + ln_gamma(self.k + n / self.beta) - ln_gamma(self.k)).exp()
    }
}

/// `ln(m_n / m_1^n)`, scale-free.
fn ln_ratio(k: f64, beta: f64, n: f64) -> f64 {
    (n - 1.0) * ln_gamma(k) + ln_gamma(k + n / beta) - n * ln_gamma(k + 1.0 / beta)
}

/// Solves `ln_ratio(k, β, 2) = target` for `k`; the ratio falls in `k`.
fn solve_k(beta: f64, target: f64) -> Option<f64> {
    let f = |lnk: f64| ln_ratio(lnk.exp(), beta, 2.0) - target;
    let (mut lo, mut hi) = (LN_K_MIN, LN_K_MAX);
    if f(lo) < 0.0 || f(hi) > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Some((0.5 * (lo + hi)).exp())
}

/// Three-moment fit from raw moments `m1, m2, m3`.
pub fn fit_from_moments(m1: f64, m2: f64, m3: f64) -> Result<GenGammaFit> {
    if !(m1 > 0.0 && m2 > 0.0 && m3 > 0.0) || ![m1, m2, m3].iter().all(|x| x.is_finite()) {
        return Err(Error::FitFailure("moments must be finite and positive".into()));
    }
    let r2 = (m2 / (m1 * m1)).ln();
    let r3 = (m3 / (m1 * m1 * m1)).ln();
    if !(r2 > 1e-10) {
        return Err(Error::FitFailure(format!(
            "relative variance {:e} too small to fit",
            r2.exp_m1()
        )));
    }
    let g = |beta: f64| solve_k(beta, r2).map(|k| (k, ln_ratio(k, beta, 3.0) - r3));

    let ln_lo = BETA_MIN.ln();
    let step = (BETA_MAX.ln() - ln_lo) / (BETA_GRID - 1) as f64;
    let grid: Vec<(f64, Option<(f64, f64)>)> = (0..BETA_GRID)
        .map(|i| {
            let beta = (ln_lo + i as f64 * step).exp();
            (beta, g(beta))
        })
        .collect();

    let mut best: Option<GenGammaFit> = None;
    let mut best_err = f64::INFINITY;
    for w in grid.windows(2) {
        let ((b0, Some((_, f0))), (b1, Some((_, f1)))) = (w[0], w[1]) else { continue };
        if f0 == 0.0 || f0.signum() != f1.signum() {
            let (mut lo, mut hi, flo) = (b0.ln(), b1.ln(), f0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                match g(mid.exp()) {
                    Some((_, fm)) if fm.signum() == flo.signum() && fm != 0.0 => lo = mid,
                    Some(_) => hi = mid,
                    None => break,
                }
                if hi - lo < 1e-14 {
                    break;
                }
            }
            let beta = (0.5 * (lo + hi)).exp();
            if let Some((k, err)) = g(beta) {
                if err.abs() < best_err {
                    best_err = err.abs();
                    let theta = m1 * (ln_gamma(k) - ln_gamma(k + 1.0 / beta)).exp();
                    best = Some(GenGammaFit { k, theta, beta });
                }
            }
        }
    }
    best.ok_or_else(|| {
        Error::FitFailure(format!("no beta in [{BETA_MIN}, {BETA_MAX}] matches the moments"))
    })
}

/// Fits the generalized Gamma law to the sample moments of a Monte Carlo run.
pub fn fit_generalized_gamma(mc: &McSummary) -> Result<GenGammaFit> {
    let (m1, m2, m3) = mc.raw_moments();
    fit_from_moments(m1, m2, m3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_gamma_moments() {
        // Gamma(3, 1): m1 = 3, m2 = 12, m3 = 60.
        let fit = fit_from_moments(3.0, 12.0, 60.0).unwrap();
        assert!((fit.beta - 1.0).abs() < 1e-6, "{fit:?}");
        assert!((fit.k - 3.0).abs() < 1e-5);
        assert!((fit.theta - 1.0).abs() < 1e-5);
    }

    #[test]
    fn exact_weibull_moments() {
        // Weibull shape 2, scale 1: E X^n = Γ(1 + n/2).
        let m = |n: f64| libm::tgamma(1.0 + n / 2.0);
        let fit = fit_from_moments(m(1.0), m(2.0), m(3.0)).unwrap();
        assert!((fit.beta - 2.0).abs() < 1e-5);
        assert!((fit.k - 1.0).abs() < 1e-5);
        for n in [1.0, 2.0, 3.0] {
            assert!((fit.moment(n) / m(n) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_moments_fail() {
        assert!(matches!(fit_from_moments(1.0, 1.0, 1.0), Err(Error::FitFailure(_))));
        assert!(fit_from_moments(-1.0, 1.0, 1.0).is_err());
    }
}
