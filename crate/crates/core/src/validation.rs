//! Internal-consistency checks run by the `validate` command and the
//! acceptance suite.

use crate::distribution::SaddleDensity;
use crate::error::{Error, Result};
use crate::fixed_point::solve_fixed_point;
use crate::ld_stats::LdModel;
use crate::montecarlo::{map_samples, mmse_sinr, zf_sinr, ChannelSampler};
use crate::scenario::{ReceiverMode, Scenario};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        CheckResult { name, passed, detail }
    }

    fn from_result(name: &'static str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((passed, detail)) => CheckResult::new(name, passed, detail),
            Err(e) => CheckResult::new(name, false, format!("error: {e}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Channel draws for the per-sample MMSE/ZF dominance check.
    pub dominance_samples: usize,
    /// Points on the γ grid for the cdf-vs-integrated-pdf check.
    pub grid_points: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: 7,
            dominance_samples: 20_000,
            grid_points: 40,
        }
    }
}

pub const NORMALIZATION_TOL: f64 = 1e-3;
pub const CDF_VS_PDF_TOL: f64 = 0.01;
pub const DI_FD_TOL: f64 = 1e-6;
pub const D2I_FD_TOL: f64 = 1e-4;
pub const UNIQUENESS_TOL: f64 = 1e-9;
pub const ZF_LIMIT_TOL: f64 = 1e-6;

/// Runs every check; individual failures are reported, not returned as errors.
pub fn run_suite(sc: &Scenario, opts: &SuiteOptions) -> Result<Vec<CheckResult>> {
    let model = LdModel::new(sc)?;
    let mut out = Vec::new();
    out.push(CheckResult::from_result("pdf_normalization", check_normalization(&model)));
    out.push(CheckResult::from_result("cdf_vs_integrated_pdf", check_cdf_vs_pdf(&model, opts)));
    out.push(CheckResult::from_result("cdf_at_ergodic_is_half", check_cdf_half(&model)));
    out.push(CheckResult::from_result("v1_zero_at_origin", check_v1_origin(&model)));
    out.push(CheckResult::from_result("v1_nonnegative", check_v1_nonneg(&model)));
    out.push(CheckResult::from_result("d2i_negative", check_d2i_negative(&model)));
    out.push(CheckResult::from_result("di_finite_difference", check_di_fd(&model)));
    out.push(CheckResult::from_result("d2i_finite_difference", check_d2i_fd(&model)));
    out.push(CheckResult::from_result("saddle_sign_law", check_sign_law(&model)));
    out.push(CheckResult::from_result("log_mgf_shape", check_log_mgf(&model)));
    out.push(CheckResult::from_result("fixed_point_uniqueness", check_uniqueness(sc, opts)));
    if zf_possible(sc) {
        out.push(CheckResult::from_result("zf_limit_of_mmse", check_zf_limit(sc)));
        out.push(CheckResult::from_result("mmse_dominates_zf", check_dominance(sc, opts)));
    }
    out.push(CheckResult::from_result("laplace_tail_consistency", check_laplace(&model)));
    Ok(out)
}

fn zf_possible(sc: &Scenario) -> bool {
    sc.m >= sc.n_total() && sc.blocks.iter().all(|b| b.p > 0.0)
}

/// γ grid between the 1e-4 and 1 - 1e-4 points of the Gaussian baseline.
pub fn default_gamma_grid(model: &LdModel, points: usize) -> Result<Vec<f64>> {
    let b = model.gaussian_baseline()?;
    let (lo, hi) = (b.quantile(1e-4).ln(), b.quantile(1.0 - 1e-4).ln());
    let n = points.max(2);
    Ok((0..n)
        .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
        .collect())
}

fn check_normalization(model: &LdModel) -> Result<(bool, String)> {
    let d = SaddleDensity::new(model.clone())?;
    let z = d.normalizer();
    Ok(((z - 1.0).abs() <= NORMALIZATION_TOL, format!("integral = {z:.6}")))
}

fn check_cdf_vs_pdf(model: &LdModel, opts: &SuiteOptions) -> Result<(bool, String)> {
    let d = SaddleDensity::new(model.clone())?;
    let mut worst: f64 = 0.0;
    let mut at = f64::NAN;
    for g in default_gamma_grid(model, opts.grid_points)? {
        let diff = (model.cdf(g)? - d.raw_cdf(g)?).abs();
        if diff > worst {
            worst = diff;
            at = g;
        }
    }
    Ok((worst <= CDF_VS_PDF_TOL, format!("max |cdf - int pdf| = {worst:.4} at gamma = {at:.4}")))
}

fn check_cdf_half(model: &LdModel) -> Result<(bool, String)> {
    let c = model.cdf(model.ergodic_sinr())?;
    Ok((c == 0.5, format!("cdf(gamma_erg) = {c}")))
}

fn check_v1_origin(model: &LdModel) -> Result<(bool, String)> {
    let p = model.point(0.0, None)?;
    Ok((p.v1 == 0.0, format!("v1(0) = {}", p.v1)))
}

fn s_grid() -> Vec<f64> {
    (0..=20).map(|i| 0.1 * i as f64).collect()
}

fn check_v1_nonneg(model: &LdModel) -> Result<(bool, String)> {
    let mut min = f64::INFINITY;
    for s in s_grid() {
        min = min.min(model.variance_v1(s)?);
    }
    Ok((min >= -1e-12, format!("min v1 on s in [0, 2] = {min:e}")))
}

fn check_d2i_negative(model: &LdModel) -> Result<(bool, String)> {
    let mut max = f64::NEG_INFINITY;
    for s in s_grid() {
        max = max.max(model.point(s, None)?.d2i);
    }
    Ok((max < 0.0, format!("max I'' on s in [0, 2] = {max:e}")))
}

fn info_at(model: &LdModel, s: f64) -> Result<f64> {
    model.info(&model.fixed_point(s, None)?)
}

fn check_di_fd(model: &LdModel) -> Result<(bool, String)> {
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for s in [0.0, 0.3] {
        let fd = (info_at(model, s + h)? - info_at(model, s - h)?) / (2.0 * h);
        let di = model.point(s, None)?.di;
        worst = worst.max((di - fd).abs() / di.abs());
    }
    Ok((worst <= DI_FD_TOL, format!("max relative error = {worst:.2e}")))
}

fn check_d2i_fd(model: &LdModel) -> Result<(bool, String)> {
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for s in [0.0, 0.3] {
        let di = |x: f64| -> Result<f64> { Ok(model.info_deriv(&model.fixed_point(x, None)?)) };
        let fd = (di(s + h)? - di(s - h)?) / (2.0 * h);
        let d2 = model.point(s, None)?.d2i;
        worst = worst.max((d2 - fd).abs() / d2.abs());
    }
    Ok((worst <= D2I_FD_TOL, format!("max relative error = {worst:.2e}")))
}

fn check_sign_law(model: &LdModel) -> Result<(bool, String)> {
    let g0 = model.ergodic_sinr();
    let mut bad = 0;
    let mut tested = 0;
    for f in [0.1, 0.3, 0.6, 0.9, 0.99, 1.01, 1.1, 1.5, 2.0, 3.0] {
        match model.solve_saddle(f * g0) {
            Ok(sr) => {
                tested += 1;
                let ok = if f < 1.0 { sr.s0 > 0.0 } else { sr.s0 < 0.0 };
                if !ok {
                    bad += 1;
                }
            }
            Err(Error::GammaOutOfRange { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok((bad == 0 && tested > 0, format!("{tested} targets, {bad} violations")))
}

fn check_log_mgf(model: &LdModel) -> Result<(bool, String)> {
    let vals: Vec<f64> = s_grid()
        .into_iter()
        .map(|s| model.log_mgf(s))
        .collect::<Result<_>>()?;
    let nonpos = vals.iter().all(|&v| v <= 1e-14);
    let decreasing = vals.windows(2).all(|w| w[1] <= w[0] + 1e-14);
    let convex = vals.windows(3).all(|w| w[0] - 2.0 * w[1] + w[2] >= -1e-12);
    Ok((
        nonpos && decreasing && convex,
        format!("nonpositive {nonpos}, nonincreasing {decreasing}, convex {convex}"),
    ))
}

fn check_uniqueness(sc: &Scenario, opts: &SuiteOptions) -> Result<(bool, String)> {
    let s = 0.5;
    let reference = solve_fixed_point(sc, s, None)?;
    let k = sc.k();
    let mut worst: f64 = 0.0;
    let starts = map_samples(20, 1, opts.seed, |rng| {
        (0..k)
            .map(|j| {
                let u: f64 = rand::Rng::random(rng);
                let p = sc.blocks[j].p;
                let cap = if sc.mode == ReceiverMode::Zf { 4.0 * reference.r[j] } else { p };
                u * cap
            })
            .collect::<Vec<f64>>()
    });
    for init in &starts {
        let fp = solve_fixed_point(sc, s, Some(init))?;
        for (a, b) in fp.r.iter().zip(&reference.r).chain(fp.t.iter().zip(&reference.t)) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok((worst <= UNIQUENESS_TOL, format!("20 starts, max deviation {worst:.2e}")))
}

/// ZF fixed point against the `p_k → ∞` limit of MMSE, estimated by Richardson
/// extrapolation from the two largest scale factors (the error is `O(1/c)`).
fn check_zf_limit(sc: &Scenario) -> Result<(bool, String)> {
    let zf = solve_fixed_point(&sc.with_mode(ReceiverMode::Zf), 0.0, None)?;
    let scaled = |c: f64| -> Result<Vec<f64>> {
        let mut m = sc.with_mode(ReceiverMode::Mmse);
        for b in &mut m.blocks {
            b.p *= c;
        }
        Ok(solve_fixed_point(&m, 0.0, None)?.r)
    };
    let factors = [1e2, 1e4, 1e6];
    let rs: Vec<Vec<f64>> = factors.iter().map(|&c| scaled(c)).collect::<Result<_>>()?;
    let err = |r: &[f64]| -> f64 {
        r.iter().zip(&zf.r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    let errs: Vec<f64> = rs.iter().map(|r| err(r)).collect();
    let (c1, c2) = (factors[1], factors[2]);
    let limit: Vec<f64> = rs[1]
        .iter()
        .zip(&rs[2])
        .map(|(r1, r2)| (c2 * r2 - c1 * r1) / (c2 - c1))
        .collect();
    let lim_err = err(&limit);
    let shrinking = errs.windows(2).all(|w| w[1] <= w[0]);
    Ok((
        lim_err <= ZF_LIMIT_TOL && shrinking,
        format!(
            "errors at 1e2/1e4/1e6: {:.1e} / {:.1e} / {:.1e}, extrapolated {lim_err:.1e}",
            errs[0], errs[1], errs[2]
        ),
    ))
}

fn check_dominance(sc: &Scenario, opts: &SuiteOptions) -> Result<(bool, String)> {
    let mmse_sc = sc.with_mode(ReceiverMode::Mmse);
    let sampler = ChannelSampler::new(sc);
    let gaps = map_samples(opts.dominance_samples, 8, opts.seed, |rng| {
        let (g0, h0) = sampler.sample(rng);
        let zf = zf_sinr(sc, &g0, &h0).ok()?;
        Some(mmse_sinr(&mmse_sc, &g0, &h0) - zf)
    });
    let min = gaps.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    Ok((min >= -1e-12, format!("min (mmse - zf) = {min:e}")))
}

/// For `x = |s0| √|I''| >= 5` the Q-function form reduces to
/// `pdf / (M |s0|)`.
fn check_laplace(model: &LdModel) -> Result<(bool, String)> {
    let g0 = model.ergodic_sinr();
    let m = model.m() as f64;
    let mut worst: f64 = 0.0;
    let mut tested = 0;
    for f in [0.02, 0.05, 0.1, 0.2, 0.3, 2.5, 4.0, 6.0] {
        let sr = match model.solve_saddle(f * g0) {
            Ok(sr) => sr,
            Err(Error::GammaOutOfRange { .. }) | Err(Error::SingularFluctuation { .. }) => continue,
            Err(e) => return Err(e),
        };
        let x = sr.ld.d2i.abs().sqrt() * sr.s0.abs();
        if x < 5.0 {
            continue;
        }
        tested += 1;
        let tail = model.ln_cdf_tail_at(&sr);
        let leading = model.ln_pdf_at(&sr) - (m * sr.s0.abs()).ln();
        worst = worst.max(((tail - leading).exp() - 1.0).abs());
    }
    Ok((worst <= 0.05, format!("{tested} tail points with x >= 5, max relative gap {worst:.3}")))
}
