//! TOML run configuration. Parsing is strict: unknown keys are errors.

use std::path::Path;

use anyhow::{bail, Context, Result};
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use sinrld_core::{
    build_correlation, validate_scenario, CMatrix, CorrelationSpec, InterfererBlock, McConfig,
    Modulation, ReceiverMode, Scenario, ValidationOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Pdf,
    Cdf,
    Ber,
    Mc,
    Compare,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Pdf => "pdf",
            Command::Cdf => "cdf",
            Command::Ber => "ber",
            Command::Mc => "mc",
            Command::Compare => "compare",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional; must agree with the subcommand when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub mc: McSection,
    #[serde(default = "default_modulations")]
    pub modulations: Vec<String>,
    #[serde(default)]
    pub ber: BerSweep,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_modulations() -> Vec<String> {
    vec!["BPSK".into()]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Receiver {
    Mmse,
    Zf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub m: usize,
    pub p0: f64,
    pub receiver: Receiver,
    #[serde(default)]
    pub r0: CorrelationConfig,
    #[serde(default)]
    pub interferers: Vec<InterfererConfig>,
    #[serde(default)]
    pub auto_normalize_trace: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfererConfig {
    #[serde(default = "one")]
    pub n: usize,
    pub p: f64,
    #[serde(default)]
    pub correlation: CorrelationConfig,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CorrelationConfig {
    #[default]
    Identity,
    Aoa {
        theta_deg: f64,
        sigma_deg: f64,
        #[serde(default = "half")]
        spacing: f64,
    },
    Explicit {
        re: Vec<Vec<f64>>,
        #[serde(default)]
        im: Option<Vec<Vec<f64>>>,
    },
}

fn half() -> f64 {
    0.5
}

/// γ grid in dB. Missing bounds are chosen from the distribution itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_db_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_db_max: Option<f64>,
}

fn default_points() -> usize {
    201
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { points: default_points(), gamma_db_min: None, gamma_db_max: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "one_u64")]
    pub seed: u64,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
    #[serde(default = "default_streams")]
    pub streams: usize,
}

fn default_samples() -> usize {
    100_000
}
fn one_u64() -> u64 {
    1
}
fn default_bins() -> usize {
    200
}
fn default_streams() -> usize {
    16
}

impl Default for McSection {
    fn default() -> Self {
        McSection {
            samples: default_samples(),
            seed: 1,
            histogram_bins: default_bins(),
            streams: default_streams(),
        }
    }
}

impl McSection {
    pub fn to_core(&self, range_db: Option<(f64, f64)>) -> McConfig {
        McConfig {
            samples: self.samples,
            seed: self.seed,
            histogram_bins: self.histogram_bins,
            streams: self.streams,
            histogram_range_db: range_db,
        }
    }
}

/// p0 sweep in dB for the `ber` command; interference powers stay fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BerSweep {
    #[serde(default)]
    pub p0_db_min: f64,
    #[serde(default = "default_p0_db_max")]
    pub p0_db_max: f64,
    #[serde(default = "default_ber_points")]
    pub points: usize,
    /// Add Monte Carlo BER columns.
    #[serde(default = "yes")]
    pub monte_carlo: bool,
}

fn default_p0_db_max() -> f64 {
    20.0
}
fn default_ber_points() -> usize {
    11
}
fn yes() -> bool {
    true
}

impl Default for BerSweep {
    fn default() -> Self {
        BerSweep {
            p0_db_min: 0.0,
            p0_db_max: default_p0_db_max(),
            points: default_ber_points(),
            monte_carlo: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Not echoed into output headers, so the destination does not change
    /// the bytes written.
    #[serde(default, skip_serializing)]
    pub path: Option<String>,
    #[serde(default)]
    pub format: Format,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| anyhow::anyhow!("invalid config: {}", e.message().trim()).context(e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn modulations(&self) -> Result<Vec<Modulation>> {
        self.modulations
            .iter()
            .map(|s| s.parse::<Modulation>().with_context(|| format!("modulations: '{s}'")))
            .collect()
    }

    pub fn check(&self) -> Result<()> {
        if self.grid.points < 2 {
            bail!("grid.points must be at least 2");
        }
        if let (Some(lo), Some(hi)) = (self.grid.gamma_db_min, self.grid.gamma_db_max) {
            if !(lo < hi) {
                bail!("grid.gamma_db_min must be below grid.gamma_db_max");
            }
        }
        if self.ber.points < 1 || !(self.ber.p0_db_min <= self.ber.p0_db_max) {
            bail!("ber: need points >= 1 and p0_db_min <= p0_db_max");
        }
        self.modulations()?;
        Ok(())
    }
}

fn correlation(c: &CorrelationConfig, m: usize, what: &str) -> Result<CMatrix> {
    let spec = match c {
        CorrelationConfig::Identity => CorrelationSpec::Identity,
        CorrelationConfig::Aoa { theta_deg, sigma_deg, spacing } => CorrelationSpec::GaussianAoa {
            theta_deg: *theta_deg,
            sigma_as_deg: *sigma_deg,
            spacing_wavelengths: *spacing,
        },
        CorrelationConfig::Explicit { re, im } => {
            let rows = re.len();
            if re.iter().any(|r| r.len() != rows) {
                bail!("{what}: explicit matrix must be square");
            }
            if let Some(im) = im {
                if im.len() != rows || im.iter().any(|r| r.len() != rows) {
                    bail!("{what}: re and im must have the same shape");
                }
            }
            let mat = CMatrix::from_fn(rows, rows, |i, j| {
                Complex::new(re[i][j], im.as_ref().map_or(0.0, |im| im[i][j]))
            });
            CorrelationSpec::Explicit(mat)
        }
    };
    build_correlation(&spec, m).with_context(|| format!("{what} correlation"))
}

impl ScenarioConfig {
    pub fn build(&self) -> Result<Scenario> {
        let mode = match self.receiver {
            Receiver::Mmse => ReceiverMode::Mmse,
            Receiver::Zf => ReceiverMode::Zf,
        };
        let blocks = self
            .interferers
            .iter()
            .enumerate()
            .map(|(k, b)| {
                Ok(InterfererBlock {
                    n: b.n,
                    p: b.p,
                    r: correlation(&b.correlation, self.m, &format!("interferer {}", k + 1))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let sc = Scenario { m: self.m, p0: self.p0, r0: correlation(&self.r0, self.m, "r0")?, blocks, mode };
        let opts = ValidationOptions { auto_normalize_trace: self.auto_normalize_trace };
        validate_scenario(sc, &opts).context("invalid scenario")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MMSE_M2: &str = r#"
        [scenario]
        m = 2
        p0 = 2.0
        receiver = "mmse"
        [[scenario.interferers]]
        p = 1.0
    "#;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = RunConfig::parse(MMSE_M2).unwrap();
        assert_eq!(c.grid, GridConfig::default());
        assert_eq!(c.mc.samples, 100_000);
        assert_eq!(c.modulations, vec!["BPSK".to_string()]);
        let sc = c.scenario.build().unwrap();
        assert_eq!((sc.m, sc.k(), sc.n_total()), (2, 1, 2));
    }

    #[test]
    fn unknown_keys_are_named() {
        for (text, key) in [
            (format!("{MMSE_M2}\n[grid]\npoints = 5\nstep = 1\n"), "step"),
            (format!("{MMSE_M2}\nfoo = 1\n"), "foo"),
            (MMSE_M2.replace("p = 1.0", "p = 1.0\npower = 2"), "power"),
            (
                MMSE_M2.replace("p0 = 2.0", "p0 = 2.0\nr0 = { kind = \"aoa\", theta_deg = 0, sigma_deg = 5, width = 1 }"),
                "width",
            ),
        ] {
            let err = format!("{:#}", RunConfig::parse(&text).unwrap_err());
            assert!(err.contains(key), "{err}");
        }
    }

    #[test]
    fn explicit_correlation() {
        let text = MMSE_M2.replace(
            "p0 = 2.0",
            "p0 = 2.0\nr0 = { kind = \"explicit\", re = [[1.0, 0.5], [0.5, 1.0]], im = [[0.0, 0.1], [-0.1, 0.0]] }",
        );
        let sc = RunConfig::parse(&text).unwrap().scenario.build().unwrap();
        assert_eq!(sc.r0[(0, 1)], Complex::new(0.5, 0.1));
        let bad = MMSE_M2.replace("p0 = 2.0", "p0 = 2.0\nr0 = { kind = \"explicit\", re = [[1.0, 0.5]] }");
        assert!(RunConfig::parse(&bad).unwrap().scenario.build().is_err());
    }

    #[test]
    fn bad_modulation_is_rejected() {
        let text = format!("modulations = [\"8-PSK\"]\n{MMSE_M2}");
        assert!(RunConfig::parse(&text).unwrap().check().is_err());
    }
}
