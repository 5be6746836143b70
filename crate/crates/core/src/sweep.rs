//! Monte Carlo sweeps over transmit power, array size and spacing.
//!
//! Trial `t` draws its path set from `trial_seed(seed, t)`. The same path set
//! is evaluated by every architecture and at every point of the sweep axis, so
//! curves differ only through the quantity being swept. Trials run on the
//! rayon pool and are reduced in trial order, which keeps the output
//! byte-identical for any thread count.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarks::{
    eval_fd_ula, eval_fd_upa, eval_hps_upa, eval_hrp_upa, eval_random_baseline, Architecture, ArchitectureResult,
    PowerModel,
};
use crate::channel::{link_constant, multipath_channel, sample_paths, trial_seed, LinkBudget};
use crate::circuit::DEFAULT_FIXED_RESISTANCE;
use crate::config::{load_impedance_override, DipoleConfig, GeometryConfig, Invalid, Validate};
use crate::em_model::{assemble_impedance, ArrayGeometry, PartitionedImpedance};
use crate::error::{Error, Result};
use crate::solver::BaselineConfig;

/// Stream offset separating baseline draws from channel draws.
const BASELINE_STREAM: u64 = 0xB45E_11AE_0000_0001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    PmaxDbm,
    NParasitic,
    NActive,
    DxOverLambda,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::PmaxDbm => "pmax_dbm",
            SweepAxis::NParasitic => "n_parasitic",
            SweepAxis::NActive => "n_active",
            SweepAxis::DxOverLambda => "dx_over_lambda",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathDistribution {
    /// `α ~ CN(0, 1)`, `θ ~ U[−π, π]`.
    GaussianUniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub paths: usize,
    pub distribution: PathDistribution,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            paths: 4,
            distribution: PathDistribution::GaussianUniform,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub geometry: GeometryConfig,
    pub dipole: DipoleConfig,
    pub link: LinkBudget,
    pub power: PowerModel,
    pub fixed_resistance: f64,
    /// Transmit power when it is not the swept quantity, dBm.
    pub pmax_dbm: f64,
    pub sweep: AxisConfig,
    pub trials: usize,
    pub seed: u64,
    pub architectures: Vec<Architecture>,
    pub channel: ChannelConfig,
    pub baseline: BaselineConfig,
    /// Impedance matrix file replacing the dipole model; geometry must match.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub impedance_file: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            geometry: GeometryConfig::default(),
            dipole: DipoleConfig::default(),
            link: LinkBudget::default(),
            power: PowerModel::default(),
            fixed_resistance: DEFAULT_FIXED_RESISTANCE,
            pmax_dbm: 10.0,
            sweep: AxisConfig {
                axis: SweepAxis::PmaxDbm,
                values: (-10..=30).map(f64::from).collect(),
            },
            trials: 500,
            seed: 1,
            architectures: vec![
                Architecture::HrpUpa,
                Architecture::FdUla,
                Architecture::FdUpa,
                Architecture::HpsUpa,
            ],
            channel: ChannelConfig::default(),
            baseline: BaselineConfig::default(),
            impedance_file: None,
        }
    }
}

fn as_count(v: f64) -> Option<usize> {
    (v >= 0.0 && v.fract() == 0.0 && v <= 1e6).then_some(v as usize)
}

impl Validate for SweepConfig {
    fn check(&self) -> std::result::Result<(), Invalid> {
        self.geometry.check()?;
        self.dipole.check()?;
        let values = &self.sweep.values;
        if values.is_empty() {
            return Err(Invalid::new("values", "sweep values must be non-empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Invalid::new("values", "sweep values must be finite"));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Invalid::new("values", "sweep values must be strictly increasing"));
        }
        match self.sweep.axis {
            SweepAxis::NParasitic | SweepAxis::NActive => {
                if values.iter().any(|&v| as_count(v).is_none()) {
                    return Err(Invalid::new("values", "element counts must be non-negative integers"));
                }
                if self.sweep.axis == SweepAxis::NActive && values[0] < 1.0 {
                    return Err(Invalid::new("values", "at least one active element is required"));
                }
            }
            SweepAxis::DxOverLambda => {
                if values[0] <= 0.0 {
                    return Err(Invalid::new("values", "spacings must be positive"));
                }
            }
            SweepAxis::PmaxDbm => {}
        }
        if self.impedance_file.is_some() && self.sweep.axis != SweepAxis::PmaxDbm {
            return Err(Invalid::new("impedance_file", "an impedance file fixes the geometry; sweep pmax_dbm only"));
        }
        if self.trials == 0 {
            return Err(Invalid::new("trials", "at least one trial is required"));
        }
        if self.architectures.is_empty() {
            return Err(Invalid::new("architectures", "select at least one architecture"));
        }
        if self.channel.paths == 0 {
            return Err(Invalid::new("paths", "at least one path is required"));
        }
        if !self.pmax_dbm.is_finite() {
            return Err(Invalid::new("pmax_dbm", "must be finite"));
        }
        if !(self.fixed_resistance >= 0.0) {
            return Err(Invalid::new("fixed_resistance", "must be non-negative"));
        }
        self.link.validate().map_err(|e| Invalid::new("link", e.to_string()))?;
        self.power.validate().map_err(|e| Invalid::new("power", e.to_string()))?;
        self.baseline.validate().map_err(|e| Invalid::new("baseline", e.to_string()))?;
        Ok(())
    }
}

/// Averages for one (axis value, architecture) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub architecture: Architecture,
    pub mean_se: f64,
    pub mean_ee: f64,
    /// `10 log10` of the mean linear SNR.
    pub mean_snr_db: f64,
    /// Successful trials.
    pub trials: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn failure_rate(&self) -> f64 {
        let failures: usize = self.rows.iter().map(|r| r.failures).sum();
        let total: usize = self.rows.iter().map(|r| r.failures + r.trials).sum();
        if total == 0 {
            0.0
        } else {
            failures as f64 / total as f64
        }
    }

    pub fn row(&self, axis_value: f64, arch: Architecture) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.architecture == arch && r.axis_value == axis_value)
    }

    /// Mean SE of `arch` in axis order.
    pub fn series(&self, arch: Architecture) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.architecture == arch)
            .map(|r| (r.axis_value, r.mean_se))
            .collect()
    }
}

struct Point {
    value: f64,
    geometry: GeometryConfig,
    p_max: f64,
}

fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

fn points(config: &SweepConfig) -> Vec<Point> {
    config
        .sweep
        .values
        .iter()
        .map(|&value| {
            let mut geometry = config.geometry;
            let mut pmax_dbm = config.pmax_dbm;
            match config.sweep.axis {
                SweepAxis::PmaxDbm => pmax_dbm = value,
                SweepAxis::NParasitic => geometry.n_parasitic = value as usize,
                SweepAxis::NActive => geometry.n_active = value as usize,
                SweepAxis::DxOverLambda => geometry.dx_over_lambda = value,
            }
            Point {
                value,
                geometry,
                p_max: dbm_to_watts(pmax_dbm),
            }
        })
        .collect()
}

fn evaluate(
    arch: Architecture,
    z: &PartitionedImpedance,
    ch: &crate::channel::ChannelRealization,
    link: f64,
    p_max: f64,
    config: &SweepConfig,
    trial: u64,
) -> Result<ArchitectureResult> {
    match arch {
        Architecture::HrpUpa => eval_hrp_upa(z, ch, link, p_max, &config.power, config.fixed_resistance),
        Architecture::FdUla => eval_fd_ula(z, ch, link, p_max, &config.power),
        Architecture::FdUpa => eval_fd_upa(z, ch, link, p_max, &config.power),
        Architecture::HpsUpa => eval_hps_upa(z, ch, link, p_max, &config.power),
        Architecture::RandomBaseline => eval_random_baseline(
            z,
            ch,
            link,
            p_max,
            &config.power,
            &config.baseline,
            trial_seed(config.seed ^ BASELINE_STREAM, trial),
        ),
    }
}

/// Runs every trial at every axis point for the selected architectures.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.check().map_err(|inv| Error::Config(format!("`{}`: {}", inv.key, inv.message)))?;
    let dipole = config.dipole.spec()?;
    let link = link_constant(&config.link, &dipole);
    let needs_parasitics = config.architectures.iter().any(|a| a.uses_parasitics());
    let mut impedance_cache: HashMap<(usize, usize, u64), PartitionedImpedance> = HashMap::new();
    let mut rows = Vec::new();

    for point in points(config) {
        let mut geom = point.geometry.build(&dipole)?;
        if !needs_parasitics {
            geom = geom.actives_only();
        }
        let key = (geom.n_active, geom.n_parasitic_per_active, point.geometry.dx_over_lambda.to_bits());
        if !impedance_cache.contains_key(&key) {
            let z = match load_impedance_override(&config.impedance_file, &geom)? {
                Some(z) if needs_parasitics => z,
                Some(z) => z.actives_only(),
                None => assemble_impedance(&geom)?,
            };
            impedance_cache.insert(key, z);
        }
        let z = &impedance_cache[&key];
        let results: Vec<Vec<Result<ArchitectureResult>>> = (0..config.trials as u64)
            .into_par_iter()
            .map(|trial| {
                let paths = match sample_paths(config.channel.paths, trial_seed(config.seed, trial)) {
                    Ok(p) => p,
                    Err(e) => return config.architectures.iter().map(|_| Err(clone_err(&e))).collect(),
                };
                let ch = multipath_channel(&paths, &geom);
                config
                    .architectures
                    .iter()
                    .map(|&arch| evaluate(arch, z, &ch, link, point.p_max, config, trial))
                    .collect()
            })
            .collect();
        for (k, &arch) in config.architectures.iter().enumerate() {
            let (mut se, mut ee, mut snr, mut ok, mut failed) = (0.0, 0.0, 0.0, 0usize, 0usize);
            for (trial, per_trial) in results.iter().enumerate() {
                match &per_trial[k] {
                    Ok(r) => {
                        se += r.se;
                        ee += r.ee;
                        snr += r.snr;
                        ok += 1;
                    }
                    Err(e) => {
                        log::warn!("{} = {}: {arch} trial {trial} failed: {e}", config.sweep.axis.name(), point.value);
                        failed += 1;
                    }
                }
            }
            let n = ok as f64;
            rows.push(SweepRow {
                axis_value: point.value,
                architecture: arch,
                mean_se: se / n,
                mean_ee: ee / n,
                mean_snr_db: 10.0 * (snr / n).log10(),
                trials: ok,
                failures: failed,
            });
        }
        log::info!("{} = {} done", config.sweep.axis.name(), point.value);
    }
    Ok(SweepResult {
        axis: config.sweep.axis,
        rows,
    })
}

fn clone_err(e: &Error) -> Error {
    Error::Domain(e.to_string())
}

pub const CSV_HEADER: &str = "axis,axis_value,architecture,mean_se_bps_hz,mean_ee_bps_hz_w,mean_snr_db,trials,failures";

/// CSV text with the resolved config and seed echoed as `#` comments.
pub fn format_sweep_csv(result: &SweepResult, config: &SweepConfig) -> Result<String> {
    let echo = serde_json::to_string(config).map_err(|e| Error::Config(e.to_string()))?;
    let mut out = String::new();
    let _ = writeln!(out, "# parasim sweep");
    let _ = writeln!(out, "# seed: {}", config.seed);
    let _ = writeln!(out, "# config: {echo}");
    let _ = writeln!(out, "{CSV_HEADER}");
    for r in &result.rows {
        let _ = writeln!(
            out,
            "{},{},{},{:.9},{:.9},{:.6},{},{}",
            result.axis.name(),
            r.axis_value,
            r.architecture,
            r.mean_se,
            r.mean_ee,
            r.mean_snr_db,
            r.trials,
            r.failures
        );
    }
    Ok(out)
}

pub fn write_sweep_csv(result: &SweepResult, config: &SweepConfig, mut out: impl Write) -> Result<()> {
    out.write_all(format_sweep_csv(result, config)?.as_bytes())?;
    Ok(())
}

/// Shorthand for geometry at one axis point, exposed for tests and tools.
pub fn geometry_at(config: &SweepConfig, axis_value: f64) -> Result<ArrayGeometry> {
    let point = points(&SweepConfig {
        sweep: AxisConfig {
            axis: config.sweep.axis,
            values: vec![axis_value],
        },
        ..config.clone()
    })
    .remove(0);
    point.geometry.build(&config.dipole.spec()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbm_conversion() {
        assert!((dbm_to_watts(10.0) - 0.01).abs() < 1e-15);
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_unsorted_values() {
        let mut c = SweepConfig::default();
        c.sweep.values = vec![1.0, 1.0];
        assert_eq!(c.check().unwrap_err().key, "values");
    }

    #[test]
    fn rejects_fractional_counts() {
        let mut c = SweepConfig::default();
        c.sweep = AxisConfig {
            axis: SweepAxis::NParasitic,
            values: vec![0.0, 1.5],
        };
        assert!(c.check().is_err());
    }

    #[test]
    fn axis_moves_the_right_field() {
        let mut c = SweepConfig::default();
        c.sweep = AxisConfig {
            axis: SweepAxis::NActive,
            values: vec![3.0],
        };
        assert_eq!(geometry_at(&c, 3.0).unwrap().n_active, 3);
    }
}
