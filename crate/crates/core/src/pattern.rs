//! Angular beam-pattern tables.
//!
//! `MaxGain` reports, for a single active element, the largest gain reachable
//! towards each angle: with the closed-form loads (exact and approximate
//! pattern) and with the numerical oracle. `FixedLoad` drives the actives with
//! voltage sources under a fixed load set and reports the resulting
//! line-of-sight pattern normalized to its peak.

use std::fmt::Write as _;
use std::path::PathBuf;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{LoadConfig, LoadedArray, DEFAULT_FIXED_RESISTANCE};
use crate::config::{load_impedance_override, DipoleConfig, GeometryConfig, Invalid, Validate};
use crate::em_model::assemble_impedance;
use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::solver::{approx_beam_pattern, closed_form_reactance_los, numerical_oracle_los, ApproxObjective, OracleConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternMode {
    #[serde(alias = "max-gain")]
    MaxGain,
    #[serde(alias = "fixed-load")]
    FixedLoad,
}

impl std::str::FromStr for PatternMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "maxgain" => Ok(PatternMode::MaxGain),
            "fixedload" => Ok(PatternMode::FixedLoad),
            other => Err(Error::Config(format!("unknown pattern mode `{other}` (maxgain|fixedload)"))),
        }
    }
}

/// Angles in degrees, `start..=stop` with `step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThetaGrid {
    pub start_deg: f64,
    pub stop_deg: f64,
    pub step_deg: f64,
}

impl Default for ThetaGrid {
    fn default() -> Self {
        Self {
            start_deg: -90.0,
            stop_deg: 90.0,
            step_deg: 1.0,
        }
    }
}

impl ThetaGrid {
    /// Grid angles in radians.
    pub fn radians(&self) -> Vec<f64> {
        let n = ((self.stop_deg - self.start_deg) / self.step_deg + 1e-9).floor() as usize + 1;
        (0..n)
            .map(|k| (self.start_deg + k as f64 * self.step_deg).to_radians())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatternConfig {
    pub geometry: GeometryConfig,
    pub dipole: DipoleConfig,
    pub fixed_resistance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<PatternMode>,
    pub theta: ThetaGrid,
    pub oracle: OracleConfig,
    /// Skip the oracle column in `MaxGain` mode.
    pub skip_oracle: bool,
    /// `FixedLoad` reactances in canonical parasitic order, ohms.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reactances: Option<Vec<f64>>,
    /// `FixedLoad` source voltages as `[re, im]`; all ones when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub voltages: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub impedance_file: Option<PathBuf>,
}

impl Default for PatternConfig {
    fn default() -> Self {
        Self {
            geometry: GeometryConfig {
                n_active: 1,
                ..GeometryConfig::default()
            },
            dipole: DipoleConfig::default(),
            fixed_resistance: DEFAULT_FIXED_RESISTANCE,
            mode: None,
            theta: ThetaGrid::default(),
            oracle: OracleConfig::default(),
            skip_oracle: false,
            reactances: None,
            voltages: None,
            impedance_file: None,
        }
    }
}

impl Validate for PatternConfig {
    fn check(&self) -> std::result::Result<(), Invalid> {
        self.geometry.check()?;
        self.dipole.check()?;
        let t = &self.theta;
        if !(t.step_deg > 0.0) || !(t.stop_deg >= t.start_deg) || !t.start_deg.is_finite() || !t.stop_deg.is_finite()
        {
            return Err(Invalid::new("theta", "need start_deg <= stop_deg and step_deg > 0"));
        }
        if !(self.fixed_resistance >= 0.0) {
            return Err(Invalid::new("fixed_resistance", "must be non-negative"));
        }
        self.oracle.validate().map_err(|e| Invalid::new("oracle", e.to_string()))?;
        let n_loads = self.geometry.n_active * self.geometry.n_parasitic;
        if let Some(x) = &self.reactances {
            if x.len() != n_loads {
                return Err(Invalid::new(
                    "reactances",
                    format!("expected {n_loads} reactances, got {}", x.len()),
                ));
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Invalid::new("reactances", "reactances must be finite"));
            }
        }
        if let Some(v) = &self.voltages {
            if v.len() != self.geometry.n_active {
                return Err(Invalid::new(
                    "voltages",
                    format!("expected {} voltages, got {}", self.geometry.n_active, v.len()),
                ));
            }
        }
        if self.mode == Some(PatternMode::MaxGain) && self.geometry.n_active != 1 {
            return Err(Invalid::new("n_active", "maxgain mode needs a single active element"));
        }
        Ok(())
    }
}

/// Column names plus one row per angle.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternTable {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl PatternTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self, config: &PatternConfig) -> Result<String> {
        let echo = serde_json::to_string(config).map_err(|e| Error::Config(e.to_string()))?;
        let mut out = String::new();
        let _ = writeln!(out, "# parasim pattern");
        let _ = writeln!(out, "# seed: {}", config.oracle.seed);
        let _ = writeln!(out, "# config: {echo}");
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.9}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        Ok(out)
    }
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Evaluates the pattern table over `theta_grid` (radians).
pub fn run_pattern(theta_grid: &[f64], config: &PatternConfig) -> Result<PatternTable> {
    config.check().map_err(|inv| Error::Config(format!("`{}`: {}", inv.key, inv.message)))?;
    let mode = config.mode.unwrap_or(PatternMode::MaxGain);
    let geom = config.geometry.build(&config.dipole.spec()?)?;
    let z = match load_impedance_override(&config.impedance_file, &geom)? {
        Some(z) => z,
        None => assemble_impedance(&geom)?,
    };
    match mode {
        PatternMode::MaxGain => {
            if geom.n_active != 1 {
                return Err(Error::Domain("maxgain mode needs a single active element".into()));
            }
            let rows = theta_grid
                .par_iter()
                .map(|&theta| {
                    let closed = closed_form_reactance_los(theta, &z, &geom, config.fixed_resistance)?;
                    let exact = LoadedArray::new(&z, &closed.loads)?.beam_pattern(theta, &geom)?;
                    let approx_w = ApproxObjective::new(&z, &closed.loads).w_matrix;
                    let approx = approx_beam_pattern(theta, &approx_w, &z, &geom)?;
                    let mut row = vec![theta.to_degrees(), db(exact), db(approx)];
                    if !config.skip_oracle {
                        let oracle = OracleConfig {
                            fixed_resistance: config.fixed_resistance,
                            ..config.oracle
                        };
                        row.push(db(numerical_oracle_los(theta, &z, &geom, &oracle)?.gain));
                    }
                    Ok(row)
                })
                .collect::<Result<Vec<_>>>()?;
            let mut columns = vec!["theta_deg", "closed_form_db", "closed_form_approx_db"];
            if !config.skip_oracle {
                columns.push("oracle_db");
            }
            Ok(PatternTable { columns, rows })
        }
        PatternMode::FixedLoad => {
            let loads = match &config.reactances {
                Some(x) => LoadConfig::from_canonical(config.fixed_resistance, x, geom.n_parasitic_per_active, geom.n_active)?,
                None => LoadConfig::open_circuit(geom.n_parasitic_per_active, geom.n_active, config.fixed_resistance),
            };
            let v_a = match &config.voltages {
                Some(v) => CVector::from_iterator(v.len(), v.iter().map(|[re, im]| Complex64::new(*re, *im))),
                None => CVector::from_element(geom.n_active, Complex64::new(1.0, 0.0)),
            };
            let array = LoadedArray::new(&z, &loads)?;
            let i_a = array.currents_from_voltages(&v_a)?;
            let gains = theta_grid
                .iter()
                .map(|&theta| array.pattern_gain(theta, &geom, &i_a))
                .collect::<Result<Vec<_>>>()?;
            let peak = gains.iter().copied().fold(0.0, f64::max);
            let rows = theta_grid
                .iter()
                .zip(&gains)
                .map(|(&theta, &g)| vec![theta.to_degrees(), g, db(g / peak)])
                .collect();
            Ok(PatternTable {
                columns: vec!["theta_deg", "gain", "normalized_db"],
                rows,
            })
        }
    }
}
