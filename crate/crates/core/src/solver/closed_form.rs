use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::lorentzian::zeta;
use crate::channel::{steering_x, ChannelRealization};
use crate::circuit::{LoadConfig, OPEN_CIRCUIT_REACTANCE};
use crate::em_model::{ArrayGeometry, PartitionedImpedance};
use crate::error::{Error, Result};

/// Magnitude below which an active channel coefficient is treated as zero.
const DEGENERATE_ROW: f64 = 1e-12;

/// Circle phases `φ_i` maximizing `|χ₁ + Σ χ₂,ᵢ|`, with `χ₁ = 1 − (ζ/2) Σ s_i c_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormPhases {
    /// In `(−π, π]`.
    pub phases: Vec<f64>,
    /// Elements with `s_i c_i = 0`; their phase is set to zero.
    pub uncoupled: Vec<bool>,
    pub chi1: Complex64,
}

/// Loads chosen in closed form, with the elements that needed a fallback.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormLoads {
    pub loads: LoadConfig,
    /// Canonical order; set where the load is the open-circuit sentinel.
    pub open_circuit: Vec<bool>,
    /// Rows whose active channel vanished and were left open-circuited.
    pub degenerate_rows: Vec<bool>,
}

fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

fn chi1(zeta: f64, s: &[Complex64], c: &[Complex64]) -> Complex64 {
    let sum: Complex64 = s.iter().zip(c).map(|(s, c)| s * c).sum();
    Complex64::new(1.0, 0.0) - sum * (0.5 * zeta)
}

/// Phases aligning every `χ₂,ᵢ = −(ζ/2) s_i c_i e^{jφ_i}` with `χ₁`.
pub fn unit_phases(zeta: f64, s: &[Complex64], c: &[Complex64]) -> ClosedFormPhases {
    let chi1 = chi1(zeta, s, c);
    let mut phases = Vec::with_capacity(s.len());
    let mut uncoupled = Vec::with_capacity(s.len());
    for (s, c) in s.iter().zip(c) {
        let sc = s * c;
        if sc == Complex64::new(0.0, 0.0) {
            phases.push(0.0);
            uncoupled.push(true);
        } else {
            phases.push(wrap_phase(chi1.arg() - sc.arg() + PI));
            uncoupled.push(false);
        }
    }
    ClosedFormPhases {
        phases,
        uncoupled,
        chi1,
    }
}

/// `X_i = −X_P − cot((∠(s_i c_i) − ∠χ₁)/2)/ζ`.
fn cot_reactances(zeta: f64, x_p: f64, s: &[Complex64], c: &[Complex64]) -> (Vec<f64>, Vec<bool>) {
    let chi1 = chi1(zeta, s, c);
    s.iter()
        .zip(c)
        .map(|(s, c)| {
            let sc = s * c;
            if sc == Complex64::new(0.0, 0.0) {
                return (-x_p, false);
            }
            let half = 0.5 * (sc.arg() - chi1.arg());
            let sin = half.sin();
            if sin.abs() < 1e-12 {
                (OPEN_CIRCUIT_REACTANCE, true)
            } else {
                (-x_p - half.cos() / sin / zeta, false)
            }
        })
        .unzip()
}

fn single_active(z: &PartitionedImpedance, geom: &ArrayGeometry) -> Result<()> {
    if z.n_active != 1 || geom.n_active != 1 {
        return Err(Error::Domain("line-of-sight closed form needs a single active element".into()));
    }
    if z.n_parasitic_per_active != geom.n_parasitic_per_active {
        return Err(Error::Dimension("impedance and geometry disagree on N_P".into()));
    }
    Ok(())
}

/// Optimal circle phases of the approximate single-active beam pattern at `theta1`.
pub fn closed_form_phase(
    theta1: f64,
    z: &PartitionedImpedance,
    geom: &ArrayGeometry,
    fixed_resistance: f64,
) -> Result<ClosedFormPhases> {
    single_active(z, geom)?;
    let Some(zp) = z.parasitic_self_impedance() else {
        return Ok(unit_phases(0.0, &[], &[]));
    };
    let s: Vec<Complex64> = steering_x(theta1, geom).iter().copied().collect();
    Ok(unit_phases(zeta(zp, fixed_resistance), &s, &z.row_coupling(0)))
}

/// Reactances steering the single-active beam towards `theta1`.
pub fn closed_form_reactance_los(
    theta1: f64,
    z: &PartitionedImpedance,
    geom: &ArrayGeometry,
    fixed_resistance: f64,
) -> Result<ClosedFormLoads> {
    single_active(z, geom)?;
    let np = z.n_parasitic_per_active;
    let Some(zp) = z.parasitic_self_impedance() else {
        return Ok(ClosedFormLoads {
            loads: LoadConfig::new(fixed_resistance, DMatrix::zeros(0, 1))?,
            open_circuit: Vec::new(),
            degenerate_rows: vec![false],
        });
    };
    let s: Vec<Complex64> = steering_x(theta1, geom).iter().copied().collect();
    let (x, open) = cot_reactances(zeta(zp, fixed_resistance), zp.im, &s, &z.row_coupling(0));
    Ok(ClosedFormLoads {
        loads: LoadConfig::from_canonical(fixed_resistance, &x, np, 1)?,
        open_circuit: open,
        degenerate_rows: vec![false],
    })
}

/// Row-by-row reactances maximizing each `|[h_eff]_j|` under the diagonal approximation.
///
/// Row `j` only sees `h_A,j`, its own parasitic channel `h_P,j` and its own
/// coupling vector `z_m,j,j`.
pub fn closed_form_reactance_hybrid(
    ch: &ChannelRealization,
    z: &PartitionedImpedance,
    fixed_resistance: f64,
) -> Result<ClosedFormLoads> {
    let na = z.n_active;
    let np = z.n_parasitic_per_active;
    if ch.h_a.len() != na || ch.h_p.len() != na * np {
        return Err(Error::Dimension(format!(
            "channel has {}+{} entries, array has {na}+{}",
            ch.h_a.len(),
            ch.h_p.len(),
            na * np
        )));
    }
    let Some(zp) = z.parasitic_self_impedance() else {
        return Ok(ClosedFormLoads {
            loads: LoadConfig::new(fixed_resistance, DMatrix::zeros(0, na))?,
            open_circuit: Vec::new(),
            degenerate_rows: vec![false; na],
        });
    };
    let zeta = zeta(zp, fixed_resistance);
    let mut x = Vec::with_capacity(na * np);
    let mut open = Vec::with_capacity(na * np);
    let mut degenerate = Vec::with_capacity(na);
    for j in 0..na {
        let h_a = ch.h_a[j];
        if h_a.norm() < DEGENERATE_ROW {
            x.extend(std::iter::repeat_n(OPEN_CIRCUIT_REACTANCE, np));
            open.extend(std::iter::repeat_n(true, np));
            degenerate.push(true);
            continue;
        }
        let s: Vec<Complex64> = ch.h_p_row(j, np).iter().map(|h| h / h_a).collect();
        let (row_x, row_open) = cot_reactances(zeta, zp.im, &s, &z.row_coupling(j));
        x.extend(row_x);
        open.extend(row_open);
        degenerate.push(false);
    }
    Ok(ClosedFormLoads {
        loads: LoadConfig::from_canonical(fixed_resistance, &x, np, na)?,
        open_circuit: open,
        degenerate_rows: degenerate,
    })
}
