use anyhow::{Context, Result};
use rayon::prelude::*;
use serde_json::{json, Value};
use sinrld_core::validation::{run_suite, SuiteOptions};
use sinrld_core::{
    fit_generalized_gamma, run_mc, Error, LdModel, McSummary, SaddleDensity, Scenario,
};

use crate::config::{Command, RunConfig};
use crate::output::{Cell, Table};

/// Probability left outside an automatically chosen γ range, per side.
const AUTO_TAIL: f64 = 1e-5;

pub struct Outcome {
    pub table: Table,
    /// Set by `validate` when a check fails.
    pub failures: usize,
}

impl From<Table> for Outcome {
    fn from(table: Table) -> Self {
        Outcome { table, failures: 0 }
    }
}

fn warn(msg: impl AsRef<str>) {
    eprintln!("warning: {}", msg.as_ref());
}

fn describe(sc: &Scenario) -> String {
    format!("M = {}, K = {}, p0 = {}, {:?}", sc.m, sc.k(), sc.p0, sc.mode)
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Outcome> {
    let sc = cfg.scenario.build()?;
    let ctx = || format!("{} ({})", cmd.name(), describe(&sc));
    let model = LdModel::new(&sc).with_context(ctx)?;
    let out = match cmd {
        Command::Pdf => density_table(cfg, &model, false).map(Outcome::from),
        Command::Cdf => density_table(cfg, &model, true).map(Outcome::from),
        Command::Ber => ber_table(cfg, &sc).map(Outcome::from),
        Command::Mc => mc_table(cfg, &sc).map(Outcome::from),
        Command::Compare => compare_table(cfg, &sc, &model).map(Outcome::from),
        Command::Validate => validate_table(&sc, cfg),
    };
    out.with_context(ctx)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn from_db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

/// dB value where a nondecreasing `cdf` crosses `p`.
fn cdf_crossing(cdf: &dyn Fn(f64) -> Result<f64>, p: f64, start_db: f64) -> Result<f64> {
    let (mut lo, mut hi) = (start_db - 10.0, start_db + 10.0);
    while cdf(from_db(lo))? > p {
        lo -= 10.0;
        if lo < start_db - 200.0 {
            break;
        }
    }
    while cdf(from_db(hi))? < p {
        hi += 10.0;
        if hi > start_db + 200.0 {
            break;
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if cdf(from_db(mid))? < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Range holding all but `AUTO_TAIL` of the normalized saddle-point mass on
/// each side; falls back to the log-normal baseline.
fn auto_range(model: &LdModel) -> Result<(f64, f64)> {
    let center = db(model.ergodic_sinr());
    if let Ok(d) = SaddleDensity::new(model.clone()) {
        let cdf = |g: f64| match d.cdf(g) {
            Err(Error::GammaOutOfRange { .. }) => Ok(1.0),
            r => Ok(r?),
        };
        if let (Ok(lo), Ok(hi)) =
            (cdf_crossing(&cdf, AUTO_TAIL, center), cdf_crossing(&cdf, 1.0 - AUTO_TAIL, center))
        {
            return Ok((lo, hi));
        }
    }
    warn("normalized density unavailable, grid range taken from the log-normal baseline");
    let b = model.gaussian_baseline()?;
    Ok((db(b.quantile(AUTO_TAIL)), db(b.quantile(1.0 - AUTO_TAIL))))
}

fn grid_db(cfg: &RunConfig, model: &LdModel) -> Result<Vec<f64>> {
    let g = &cfg.grid;
    let (lo, hi) = match (g.gamma_db_min, g.gamma_db_max) {
        (Some(lo), Some(hi)) => (lo, hi),
        (lo, hi) => {
            let (alo, ahi) = auto_range(model)?;
            (lo.unwrap_or(alo), hi.unwrap_or(ahi))
        }
    };
    Ok(linspace(lo, hi, g.points))
}

/// Raw saddle-point pdf or cdf, with the limits beyond the reachable range.
fn ld_value(model: &LdModel, gamma: f64, cdf: bool) -> Result<f64> {
    let r = if cdf { model.cdf(gamma) } else { model.pdf(gamma) };
    match r {
        Err(Error::GammaOutOfRange { .. }) => Ok(if cdf { 1.0 } else { 0.0 }),
        r => Ok(r?),
    }
}

fn density_table(cfg: &RunConfig, model: &LdModel, cdf: bool) -> Result<Table> {
    let grid = grid_db(cfg, model)?;
    let values = grid
        .par_iter()
        .map(|&x| ld_value(model, from_db(x), cdf))
        .collect::<Result<Vec<f64>>>()?;
    let mut t = Table::new(&["gamma_db", "gamma_linear", if cdf { "cdf" } else { "pdf" }]);
    for (&x, v) in grid.iter().zip(values) {
        t.push(vec![x.into(), from_db(x).into(), v.into()]);
    }
    Ok(t)
}

fn ber_table(cfg: &RunConfig, sc: &Scenario) -> Result<Table> {
    let mods = cfg.modulations()?;
    let sweep = &cfg.ber;
    let with_mc = sweep.monte_carlo && cfg.mc.samples > 0;
    if sweep.monte_carlo && !with_mc {
        warn("mc.samples = 0, Monte Carlo BER columns left empty");
    }
    let mut t = Table::new(&["p0_db", "p0", "modulation", "ber_ld", "ber_mc", "ber_mc_se"]);
    for p0_db in linspace(sweep.p0_db_min, sweep.p0_db_max, sweep.points) {
        let scp = sc.with_p0(from_db(p0_db));
        let model = LdModel::new(&scp)?;
        let mc = if with_mc { Some(run_mc(&scp, &cfg.mc.to_core(None), &mods)?) } else { None };
        for (i, &m) in mods.iter().enumerate() {
            let est = mc.as_ref().map(|s| &s.ber[i]);
            t.push(vec![
                p0_db.into(),
                scp.p0.into(),
                Cell::Text(m.to_string()),
                model.ber(m)?.into(),
                est.map(|e| e.ber).into(),
                est.map(|e| e.std_error).into(),
            ]);
        }
    }
    Ok(t)
}

fn mc_summary_json(mc: &McSummary) -> Value {
    let fit = match fit_generalized_gamma(mc) {
        Ok(f) => json!({ "k": f.k, "theta": f.theta, "beta": f.beta }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    json!({
        "samples_requested": mc.samples_requested,
        "samples_used": mc.samples_used,
        "mean": mc.mean,
        "variance": mc.variance,
        "third_central": mc.third_central,
        "std_error_of_mean": mc.std_error_of_mean(),
        "ber": mc.ber.iter().map(|b| json!({
            "modulation": b.modulation.to_string(),
            "ber": b.ber,
            "std_error": b.std_error,
        })).collect::<Vec<_>>(),
        "generalized_gamma": fit,
    })
}

fn require_samples(cfg: &RunConfig) -> Result<()> {
    if cfg.mc.samples == 0 {
        anyhow::bail!("mc.samples must be positive for this command");
    }
    Ok(())
}

fn mc_table(cfg: &RunConfig, sc: &Scenario) -> Result<Table> {
    require_samples(cfg)?;
    let range = match (cfg.grid.gamma_db_min, cfg.grid.gamma_db_max) {
        (Some(lo), Some(hi)) => Some((lo, hi)),
        _ => None,
    };
    let mods = cfg.modulations()?;
    let mc = run_mc(sc, &cfg.mc.to_core(range), &mods)?;
    let h = &mc.histogram;
    let mut t = Table::new(&["bin_lo_db", "bin_hi_db", "bin_center_db", "mass", "density_db"]);
    let centers = h.bin_centers_db();
    let dens = h.density_db();
    for i in 0..h.masses.len() {
        t.push(vec![
            h.edges_db[i].into(),
            h.edges_db[i + 1].into(),
            centers[i].into(),
            h.masses[i].into(),
            dens[i].into(),
        ]);
    }
    t.summary = Some(mc_summary_json(&mc));
    Ok(t)
}

fn compare_table(cfg: &RunConfig, sc: &Scenario, model: &LdModel) -> Result<Table> {
    let grid = grid_db(cfg, model)?;
    let gammas: Vec<f64> = grid.iter().map(|&x| from_db(x)).collect();
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);

    let norm = match SaddleDensity::new(model.clone()) {
        Ok(d) => Some(d),
        Err(e) => {
            warn(format!("normalized saddle-point density unavailable: {e}"));
            None
        }
    };
    let base = model.gaussian_baseline()?;
    let mc = if cfg.mc.samples > 0 {
        Some(run_mc(sc, &cfg.mc.to_core(Some((lo, hi))), &[])?)
    } else {
        warn("mc.samples = 0, generalized-Gamma and Monte Carlo columns left empty");
        None
    };
    let fit = match mc.as_ref().map(fit_generalized_gamma) {
        Some(Ok(f)) => Some(f),
        Some(Err(e)) => {
            warn(format!("generalized-Gamma fit failed: {e}"));
            None
        }
        None => None,
    };

    let ld = gammas
        .par_iter()
        .map(|&g| {
            let pdf = ld_value(model, g, false)?;
            let cdf = ld_value(model, g, true)?;
            let ncdf = match &norm {
                Some(d) => match d.cdf(g) {
                    Err(Error::GammaOutOfRange { .. }) => Some(1.0),
                    r => Some(r?),
                },
                None => None,
            };
            Ok((pdf, cdf, ncdf))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut t = Table::new(&[
        "gamma_db",
        "gamma_linear",
        "pdf_ld",
        "pdf_ld_norm",
        "pdf_gaussian",
        "pdf_gengamma",
        "pdf_mc",
        "cdf_ld",
        "cdf_ld_norm",
        "cdf_gaussian",
        "cdf_mc",
    ]);
    for ((&x, &g), &(pdf, cdf, ncdf)) in grid.iter().zip(&gammas).zip(&ld) {
        t.push(vec![
            x.into(),
            g.into(),
            pdf.into(),
            norm.as_ref().map(|d| pdf / d.normalizer()).into(),
            base.pdf(g).into(),
            fit.map(|f| f.pdf(g)).into(),
            mc.as_ref().map(|m| m.histogram.pdf_linear(g)).into(),
            cdf.into(),
            ncdf.into(),
            base.cdf(g).into(),
            mc.as_ref().map(|m| m.ecdf(g)).into(),
        ]);
    }

    let mut summary = json!({
        "gamma_erg": model.ergodic_sinr(),
        "ld_normalizer": norm.as_ref().map(|d| d.normalizer()),
        "gaussian": { "gamma_db_erg": base.gamma_db_erg, "sigma2_db": base.sigma2_db },
        "generalized_gamma": fit.map(|f| json!({ "k": f.k, "theta": f.theta, "beta": f.beta })),
    });
    if let Some(m) = &mc {
        let cdf_ld: Vec<f64> = ld.iter().map(|v| v.1).collect();
        let mut ks = json!({
            "ld": m.ks_distance_tabulated(&gammas, &cdf_ld),
            "gaussian": m.ks_distance(|g| base.cdf(g)),
        });
        if norm.is_some() {
            let ncdf: Vec<f64> = ld.iter().map(|v| v.2.unwrap_or(f64::NAN)).collect();
            ks["ld_norm"] = json!(m.ks_distance_tabulated(&gammas, &ncdf));
        }
        summary["ks_vs_mc"] = ks;
        summary["mc"] = json!({ "samples_used": m.samples_used, "mean": m.mean, "variance": m.variance });
    }
    t.summary = Some(summary);
    Ok(t)
}

fn validate_table(sc: &Scenario, cfg: &RunConfig) -> Result<Outcome> {
    let opts = SuiteOptions { seed: cfg.mc.seed, ..SuiteOptions::default() };
    let results = run_suite(sc, &opts)?;
    let mut t = Table::new(&["check", "passed", "detail"]);
    let mut failures = 0;
    for r in &results {
        eprintln!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
        failures += usize::from(!r.passed);
        t.push(vec![
            Cell::Text(r.name.into()),
            Cell::Text(r.passed.to_string()),
            Cell::Text(r.detail.clone()),
        ]);
    }
    eprintln!("{} of {} checks passed", results.len() - failures, results.len());
    Ok(Outcome { table: t, failures })
}
