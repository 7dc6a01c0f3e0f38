//! Problem instances: array size, powers, receive correlation per transmitter.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};

/// Eigenvalues below this (after construction) are treated as quadrature noise.
pub const PSD_TOLERANCE: f64 = 1e-10;
/// Smallest accepted angle spread in degrees.
pub const MIN_ANGLE_SPREAD_DEG: f64 = 0.1;
/// Relative trace tolerance for `tr R = M`.
pub const TRACE_TOLERANCE: f64 = 1e-9;

const AOA_PANELS: usize = 256;
const AOA_NODES_PER_PANEL: usize = 16;
/// Gaussian weight is below e^{-72} beyond this many spreads.
const AOA_TRUNCATION_SPREADS: f64 = 12.0;

/// How a receive-correlation matrix is produced.
#[derive(Debug, Clone, PartialEq)]
pub enum CorrelationSpec {
    Identity,
    /// Uniform linear array, truncated-Gaussian angular density on [-π, π].
    GaussianAoa {
        theta_deg: f64,
        sigma_as_deg: f64,
        spacing_wavelengths: f64,
    },
    Explicit(CMatrix),
}

impl CorrelationSpec {
    /// Gaussian AoA spec with the default half-wavelength spacing.
    pub fn aoa(theta_deg: f64, sigma_as_deg: f64) -> Self {
        CorrelationSpec::GaussianAoa {
            theta_deg,
            sigma_as_deg,
            spacing_wavelengths: 0.5,
        }
    }
}

/// Builds the M×M correlation matrix for `spec`.
///
/// For `GaussianAoa` the entries are
/// `R_ab ∝ ∫ exp(2πi (a-b) d sin φ) exp(-(φ-θ)²/(2σ²)) dφ` over `[-π, π]`,
/// normalized to a unit diagonal. The integral uses composite Gauss-Legendre
/// (4096 nodes) on the part of `[-π, π]` within 12σ of θ.
pub fn build_correlation(spec: &CorrelationSpec, m: usize) -> Result<CMatrix> {
    if m == 0 {
        return Err(Error::InvalidCorrelation("M must be at least 1".into()));
    }
    match spec {
        CorrelationSpec::Identity => Ok(linalg::identity(m)),
        CorrelationSpec::GaussianAoa {
            theta_deg,
            sigma_as_deg,
            spacing_wavelengths,
        } => {
            if !(sigma_as_deg.is_finite() && *sigma_as_deg >= MIN_ANGLE_SPREAD_DEG) {
                return Err(Error::InvalidCorrelation(format!(
                    "angle spread {sigma_as_deg} deg is below the minimum {MIN_ANGLE_SPREAD_DEG} deg"
                )));
            }
            if !theta_deg.is_finite() || !spacing_wavelengths.is_finite() {
                return Err(Error::InvalidCorrelation("non-finite angle or spacing".into()));
            }
            let r = aoa_toeplitz(
                theta_deg.to_radians(),
                sigma_as_deg.to_radians(),
                *spacing_wavelengths,
                m,
            );
            repair_psd(r, true)
        }
        CorrelationSpec::Explicit(mat) => {
            if mat.nrows() != m || mat.ncols() != m {
                return Err(Error::InvalidCorrelation(format!(
                    "explicit matrix is {}x{}, expected {m}x{m}",
                    mat.nrows(),
                    mat.ncols()
                )));
            }
            if mat.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
                return Err(Error::InvalidCorrelation("explicit matrix has non-finite entries".into()));
            }
            let scale = mat.iter().map(|x| x.norm()).fold(1.0, f64::max);
            if linalg::hermitian_defect(mat) > 1e-12 * scale {
                return Err(Error::InvalidCorrelation("explicit matrix is not Hermitian".into()));
            }
            repair_psd(linalg::hermitian_part(mat), false)
        }
    }
}

fn aoa_toeplitz(theta: f64, sigma: f64, spacing: f64, m: usize) -> CMatrix {
    let lo = (theta - AOA_TRUNCATION_SPREADS * sigma).max(-PI);
    let hi = (theta + AOA_TRUNCATION_SPREADS * sigma).min(PI);
    let rule = GaussLegendre::new(NonZeroUsize::new(AOA_NODES_PER_PANEL).unwrap());
    let width = (hi - lo) / AOA_PANELS as f64;

    // c[d] = ∫ exp(2πi d spacing sin φ) w(φ) dφ for lags d = 0..m-1.
    let mut c = vec![C64::new(0.0, 0.0); m];
    for panel in 0..AOA_PANELS {
        let a = lo + panel as f64 * width;
        for &(x, w) in rule.as_node_weight_pairs() {
            let phi = a + 0.5 * width * (x + 1.0);
            let u = (phi - theta) / sigma;
            let weight = 0.5 * width * w * (-0.5 * u * u).exp();
            let k = 2.0 * PI * spacing * phi.sin();
            for (d, cd) in c.iter_mut().enumerate() {
                *cd += C64::from_polar(weight, k * d as f64);
            }
        }
    }
    let c0 = c[0].re;
    CMatrix::from_fn(m, m, |a, b| {
        if a == b {
            C64::new(1.0, 0.0)
        } else if a > b {
            c[a - b] / c0
        } else {
            (c[b - a] / c0).conj()
        }
    })
}

/// Clips eigenvalues in `(-PSD_TOLERANCE, 0)`; errors on anything more negative.
fn repair_psd(r: CMatrix, unit_diagonal: bool) -> Result<CMatrix> {
    let (vals, _) = linalg::eigh(&r);
    let min = vals.first().copied().unwrap_or(0.0);
    if min < -PSD_TOLERANCE {
        return Err(Error::InvalidCorrelation(format!(
            "matrix is not positive semidefinite (min eigenvalue {min:e})"
        )));
    }
    if min >= 0.0 {
        return Ok(r);
    }
    let mut clipped = linalg::hermitian_fn(&r, |x| x.max(0.0));
    if unit_diagonal {
        let d: Vec<f64> = (0..clipped.nrows()).map(|i| clipped[(i, i)].re.sqrt()).collect();
        for i in 0..clipped.nrows() {
            for j in 0..clipped.ncols() {
                clipped[(i, j)] /= d[i] * d[j];
            }
            clipped[(i, i)] = C64::new(1.0, 0.0);
        }
    }
    Ok(clipped)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiverMode {
    Mmse,
    Zf,
}

impl ReceiverMode {
    /// Regularization constant: 1 for MMSE, 0 for ZF.
    pub fn z(self) -> f64 {
        match self {
            ReceiverMode::Mmse => 1.0,
            ReceiverMode::Zf => 0.0,
        }
    }
}

/// A group of `n` co-located transmit antennas sharing power and correlation.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfererBlock {
    pub n: usize,
    pub p: f64,
    pub r: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub m: usize,
    pub p0: f64,
    pub r0: CMatrix,
    pub blocks: Vec<InterfererBlock>,
    pub mode: ReceiverMode,
}

impl Scenario {
    /// Uncorrelated scenario with `(N_k, p_k)` blocks, validated.
    pub fn iid(m: usize, p0: f64, blocks: &[(usize, f64)], mode: ReceiverMode) -> Result<Self> {
        let sc = Scenario {
            m,
            p0,
            r0: linalg::identity(m),
            blocks: blocks
                .iter()
                .map(|&(n, p)| InterfererBlock {
                    n,
                    p,
                    r: linalg::identity(m),
                })
                .collect(),
            mode,
        };
        validate_scenario(sc, &ValidationOptions::default())
    }

    pub fn k(&self) -> usize {
        self.blocks.len()
    }

    pub fn z(&self) -> f64 {
        self.mode.z()
    }

    /// Total transmit antennas including the signal: `1 + Σ N_k`.
    pub fn n_total(&self) -> usize {
        1 + self.blocks.iter().map(|b| b.n).sum::<usize>()
    }

    /// Load ratios `N_k / M`.
    pub fn n_ratios(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.n as f64 / self.m as f64).collect()
    }

    pub fn with_mode(&self, mode: ReceiverMode) -> Self {
        Scenario { mode, ..self.clone() }
    }

    pub fn with_p0(&self, p0: f64) -> Self {
        Scenario { p0, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ValidationOptions {
    /// Rescale correlation matrices whose trace is off instead of rejecting them.
    pub auto_normalize_trace: bool,
}

/// Checks every scenario invariant and returns the (possibly trace-normalized)
/// scenario.
pub fn validate_scenario(mut sc: Scenario, opts: &ValidationOptions) -> Result<Scenario> {
    let m = sc.m;
    if m == 0 {
        return Err(Error::InvalidScenario("M must be at least 1".into()));
    }
    if !(sc.p0.is_finite() && sc.p0 > 0.0) {
        return Err(Error::InvalidScenario(format!("p0 = {} must be positive", sc.p0)));
    }
    for (k, b) in sc.blocks.iter().enumerate() {
        if b.n == 0 {
            return Err(Error::InvalidScenario(format!("block {} has N = 0", k + 1)));
        }
        let ok = match sc.mode {
            ReceiverMode::Mmse => b.p.is_finite() && b.p >= 0.0,
            ReceiverMode::Zf => b.p.is_finite() && b.p > 0.0,
        };
        if !ok {
            return Err(Error::InvalidScenario(format!(
                "block {} has invalid power {} for {:?}",
                k + 1,
                b.p,
                sc.mode
            )));
        }
    }
    if sc.mode == ReceiverMode::Zf && m < sc.n_total() {
        return Err(Error::InvalidScenario(format!(
            "zero forcing needs M >= N_tot, got M = {m} < {}",
            sc.n_total()
        )));
    }

    let target = m as f64;
    let check = |index: usize, r: &mut CMatrix| -> Result<()> {
        if r.nrows() != m || r.ncols() != m {
            return Err(Error::InvalidScenario(format!(
                "correlation matrix {index} is {}x{}, expected {m}x{m}",
                r.nrows(),
                r.ncols()
            )));
        }
        let scale = r.iter().map(|x| x.norm()).fold(1.0, f64::max);
        if linalg::hermitian_defect(r) > 1e-12 * scale {
            return Err(Error::InvalidScenario(format!(
                "correlation matrix {index} is not Hermitian"
            )));
        }
        let min = linalg::min_eigenvalue(r);
        if min < -PSD_TOLERANCE {
            return Err(Error::InvalidScenario(format!(
                "correlation matrix {index} is not positive semidefinite (min eigenvalue {min:e})"
            )));
        }
        let tr = linalg::trace_re(r);
        if (tr - target).abs() > TRACE_TOLERANCE * target {
            if opts.auto_normalize_trace && tr > 0.0 {
                *r *= C64::new(target / tr, 0.0);
            } else {
                return Err(Error::TraceMismatch {
                    index,
                    trace: tr,
                    expected: target,
                });
            }
        }
        Ok(())
    };

    check(0, &mut sc.r0)?;
    let min0 = linalg::min_eigenvalue(&sc.r0);
    if min0 <= 1e-12 {
        return Err(Error::SignalCorrelationSingular { min_eigenvalue: min0 });
    }
    for (k, b) in sc.blocks.iter_mut().enumerate() {
        check(k + 1, &mut b.r)?;
    }
    Ok(sc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_spec() {
        let r = build_correlation(&CorrelationSpec::Identity, 3).unwrap();
        assert_eq!(r, linalg::identity(3));
    }

    #[test]
    fn zero_spacing_gives_all_ones() {
        let spec = CorrelationSpec::GaussianAoa {
            theta_deg: 17.0,
            sigma_as_deg: 25.0,
            spacing_wavelengths: 0.0,
        };
        let r = build_correlation(&spec, 2).unwrap();
        for x in r.iter() {
            assert!((x - C64::new(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn small_spread_is_rejected() {
        assert!(build_correlation(&CorrelationSpec::aoa(0.0, 0.05), 2).is_err());
        assert!(build_correlation(&CorrelationSpec::aoa(0.0, -1.0), 2).is_err());
    }

    #[test]
    fn explicit_checks() {
        let bad = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1.0, 0.0), C64::new(0.3, 0.2), C64::new(0.3, 0.2), C64::new(1.0, 0.0)],
        );
        assert!(build_correlation(&CorrelationSpec::Explicit(bad), 2).is_err());
        let wrong_size = linalg::identity(3);
        assert!(build_correlation(&CorrelationSpec::Explicit(wrong_size), 2).is_err());
    }

    #[test]
    fn zf_dimension_boundary() {
        assert!(Scenario::iid(2, 1.0, &[(1, 1.0)], ReceiverMode::Zf).is_ok());
        assert!(Scenario::iid(2, 1.0, &[(2, 1.0)], ReceiverMode::Zf).is_err());
        assert!(Scenario::iid(2, 1.0, &[(2, 1.0)], ReceiverMode::Mmse).is_ok());
    }

    #[test]
    fn singular_r0_rejected() {
        let mut r0 = CMatrix::zeros(4, 4);
        for i in 0..3 {
            r0[(i, i)] = C64::new(4.0 / 3.0, 0.0);
        }
        let sc = Scenario {
            m: 4,
            p0: 1.0,
            r0,
            blocks: vec![],
            mode: ReceiverMode::Mmse,
        };
        let err = validate_scenario(sc, &ValidationOptions::default()).unwrap_err();
        assert!(matches!(err, Error::SignalCorrelationSingular { .. }));
        assert!(err.to_string().contains("R0 not positive definite"));
    }

    #[test]
    fn trace_normalization_is_opt_in() {
        let sc = Scenario {
            m: 2,
            p0: 1.0,
            r0: linalg::identity(2) * C64::new(2.0, 0.0),
            blocks: vec![],
            mode: ReceiverMode::Mmse,
        };
        assert!(matches!(
            validate_scenario(sc.clone(), &ValidationOptions::default()),
            Err(Error::TraceMismatch { index: 0, .. })
        ));
        let fixed = validate_scenario(sc, &ValidationOptions { auto_normalize_trace: true }).unwrap();
        assert!((linalg::trace_re(&fixed.r0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn zero_power_allowed_only_for_mmse() {
        assert!(Scenario::iid(2, 2.0, &[(2, 0.0)], ReceiverMode::Mmse).is_ok());
        assert!(Scenario::iid(4, 2.0, &[(2, 0.0)], ReceiverMode::Zf).is_err());
    }
}
