//! Multiport circuit quantities of a loaded hybrid array.
//!
//! With parasitic loads `Z_R` the parasitic currents follow the actives as
//! `i_P = −(Z_P + Z_R)⁻¹ Z_m i_A`. Everything the transmitter sees can then be
//! written in terms of `i_A` alone through an effective channel
//! `h_eff = h_A − Z_mᵀ (Z_P + Z_R)⁻¹ h_P` and an effective impedance `Z_eff`
//! whose quadratic form is the radiated power. The unilateral approximation
//! (receiver does not load the transmitter) is assumed throughout.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channel::{los_channel, steering_x, ChannelRealization};
use crate::em_model::{real_part, ArrayGeometry, PartitionedImpedance};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

/// Reactance used to represent an open-circuited parasitic port, ohms.
pub const OPEN_CIRCUIT_REACTANCE: f64 = 1e9;
/// Default series resistance of every parasitic load, ohms.
pub const DEFAULT_FIXED_RESISTANCE: f64 = 0.05;
/// Largest accepted 1-norm condition number of `Z_P + Z_R`.
pub const MAX_CONDITION: f64 = 1e12;

/// Parasitic loads `Z_R,ij = R + jX_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadConfig {
    pub fixed_resistance: f64,
    /// `N_P × N_A`; column `j` holds the row of parasitics owned by active `j`.
    pub reactances: DMatrix<f64>,
}

impl LoadConfig {
    pub fn new(fixed_resistance: f64, reactances: DMatrix<f64>) -> Result<Self> {
        if !(fixed_resistance >= 0.0) || !fixed_resistance.is_finite() {
            return Err(Error::Domain(format!(
                "fixed load resistance must be non-negative (got {fixed_resistance})"
            )));
        }
        if reactances.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("load reactances must be finite".into()));
        }
        Ok(Self {
            fixed_resistance,
            reactances,
        })
    }

    pub fn open_circuit(n_parasitic: usize, n_active: usize, fixed_resistance: f64) -> Self {
        Self {
            fixed_resistance,
            reactances: DMatrix::from_element(n_parasitic, n_active, OPEN_CIRCUIT_REACTANCE),
        }
    }

    /// Builds loads from reactances in canonical parasitic order.
    pub fn from_canonical(
        fixed_resistance: f64,
        reactances: &[f64],
        n_parasitic: usize,
        n_active: usize,
    ) -> Result<Self> {
        if reactances.len() != n_parasitic * n_active {
            return Err(Error::Dimension(format!(
                "{} reactances given for {n_active} rows of {n_parasitic} parasitics",
                reactances.len()
            )));
        }
        Self::new(
            fixed_resistance,
            DMatrix::from_column_slice(n_parasitic, n_active, reactances),
        )
    }

    /// Reactances in canonical parasitic order.
    pub fn canonical(&self) -> Vec<f64> {
        self.reactances.as_slice().to_vec()
    }

    /// Diagonal of `Z_R` in canonical order.
    pub fn impedances(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.reactances
            .iter()
            .map(move |&x| Complex64::new(self.fixed_resistance, x))
    }

    fn check(&self, z: &PartitionedImpedance) -> Result<()> {
        if self.reactances.nrows() != z.n_parasitic_per_active || self.reactances.ncols() != z.n_active {
            return Err(Error::Dimension(format!(
                "loads are {}x{} but the array has {} parasitics per active and {} actives",
                self.reactances.nrows(),
                self.reactances.ncols(),
                z.n_parasitic_per_active,
                z.n_active
            )));
        }
        Ok(())
    }
}

/// Effective channel and impedance seen by the active ports.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveSystem {
    pub h_eff: CVector,
    /// Hermitian up to rounding; `i* Z_eff i` is the radiated power.
    pub z_eff: CMatrix,
}

/// Active currents and loads chosen by a beamformer, with what they achieve.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingSolution {
    pub i_a: CVector,
    pub loads: LoadConfig,
    pub snr: f64,
    pub radiated_power: f64,
}

/// A hybrid array with a fixed load configuration.
///
/// `(Z_P + Z_R)⁻¹` and `(Z_P + Z_R)⁻¹ Z_m` are computed once on construction
/// and reused by every evaluation; the struct is immutable afterwards and can
/// be shared between threads.
#[derive(Debug, Clone)]
pub struct LoadedArray<'a> {
    z: &'a PartitionedImpedance,
    loads: LoadConfig,
    inverse: CMatrix,
    transfer: CMatrix,
    condition: f64,
}

impl<'a> LoadedArray<'a> {
    pub fn new(z: &'a PartitionedImpedance, loads: &LoadConfig) -> Result<Self> {
        loads.check(z)?;
        let mut network = z.z_p.clone();
        for (k, zr) in loads.impedances().enumerate() {
            network[(k, k)] += zr;
        }
        let (inverse, condition) = linalg::inverse_and_condition(&network);
        let inverse = match inverse {
            Some(inv) if condition < MAX_CONDITION => inv,
            _ => return Err(Error::Resonance { condition }),
        };
        let transfer = &inverse * &z.z_m;
        Ok(Self {
            z,
            loads: loads.clone(),
            inverse,
            transfer,
            condition,
        })
    }

    pub fn impedance(&self) -> &PartitionedImpedance {
        self.z
    }

    pub fn loads(&self) -> &LoadConfig {
        &self.loads
    }

    /// 1-norm condition number of `Z_P + Z_R`.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    fn check_actives(&self, v: &CVector) -> Result<()> {
        if v.len() != self.z.n_active {
            return Err(Error::Dimension(format!(
                "active vector has length {}, array has {} actives",
                v.len(),
                self.z.n_active
            )));
        }
        Ok(())
    }

    pub fn parasitic_currents(&self, i_a: &CVector) -> Result<CVector> {
        self.check_actives(i_a)?;
        Ok(-(&self.transfer * i_a))
    }

    /// `[i_A; i_P]` in canonical element order.
    pub fn full_currents(&self, i_a: &CVector) -> Result<CVector> {
        let i_p = self.parasitic_currents(i_a)?;
        Ok(CVector::from_iterator(
            i_a.len() + i_p.len(),
            i_a.iter().chain(i_p.iter()).copied(),
        ))
    }

    pub fn effective_channel(&self, ch: &ChannelRealization) -> Result<CVector> {
        if ch.h_a.len() != self.z.n_active || ch.h_p.len() != self.z.n_parasitic_total() {
            return Err(Error::Dimension(format!(
                "channel has {}+{} entries, array has {}+{}",
                ch.h_a.len(),
                ch.h_p.len(),
                self.z.n_active,
                self.z.n_parasitic_total()
            )));
        }
        Ok(&ch.h_a - self.z.z_m.transpose() * (&self.inverse * &ch.h_p))
    }

    /// `Re Z_A + B* Re Z_P B − Re Z_mᵀ B − B* Re Z_m` with `B = (Z_P + Z_R)⁻¹ Z_m`.
    pub fn effective_impedance(&self) -> CMatrix {
        let re_a = linalg::to_complex(&real_part(&self.z.z_a));
        let re_p = linalg::to_complex(&real_part(&self.z.z_p));
        let re_m = linalg::to_complex(&real_part(&self.z.z_m));
        let b = &self.transfer;
        let b_adj = b.adjoint();
        re_a + &b_adj * re_p * b - re_m.transpose() * b - b_adj * re_m
    }

    pub fn effective_system(&self, ch: &ChannelRealization) -> Result<EffectiveSystem> {
        Ok(EffectiveSystem {
            h_eff: self.effective_channel(ch)?,
            z_eff: self.effective_impedance(),
        })
    }

    /// `[i_A; i_P]* Re{Z_TX} [i_A; i_P]`, evaluated block by block.
    pub fn radiated_power(&self, i_a: &CVector) -> Result<f64> {
        let i_p = self.parasitic_currents(i_a)?;
        let re_a = linalg::to_complex(&real_part(&self.z.z_a));
        let re_p = linalg::to_complex(&real_part(&self.z.z_p));
        let re_m = linalg::to_complex(&real_part(&self.z.z_m));
        let power = linalg::quadratic_form(i_a, &re_a, i_a)
            + i_a.dotc(&(re_m.transpose() * &i_p))
            + i_p.dotc(&(&re_m * i_a))
            + linalg::quadratic_form(&i_p, &re_p, &i_p);
        Ok(power.re)
    }

    /// `γ²/σ² · |i_Aᵀ h_eff|²`.
    pub fn snr(&self, i_a: &CVector, ch: &ChannelRealization, link: f64) -> Result<f64> {
        self.check_actives(i_a)?;
        let h_eff = self.effective_channel(ch)?;
        Ok(link * i_a.dot(&h_eff).norm_sqr())
    }

    /// Active currents drawn by voltage sources `v_A` at the active ports.
    pub fn currents_from_voltages(&self, v_a: &CVector) -> Result<CVector> {
        self.check_actives(v_a)?;
        let input = &self.z.z_a - self.z.z_m.transpose() * &self.transfer;
        let (inv, condition) = linalg::inverse_and_condition(&input);
        match inv {
            Some(inv) if condition < MAX_CONDITION => Ok(inv * v_a),
            _ => Err(Error::Resonance { condition }),
        }
    }

    /// Single-active far-field pattern `|1 − a_Pᵀ(θ)(Z_P + Z_R)⁻¹ z_m|²`.
    pub fn beam_pattern(&self, theta: f64, geom: &ArrayGeometry) -> Result<f64> {
        if self.z.n_active != 1 || geom.n_active != 1 {
            return Err(Error::Domain("beam pattern is defined for a single active element".into()));
        }
        let a_p = steering_x(theta, geom);
        let response = a_p.dot(&self.transfer.column(0));
        Ok((Complex64::new(1.0, 0.0) - response).norm_sqr())
    }

    /// `|i_Aᵀ h_eff(θ)|²` for a unit line-of-sight channel.
    pub fn pattern_gain(&self, theta: f64, geom: &ArrayGeometry, i_a: &CVector) -> Result<f64> {
        let h_eff = self.effective_channel(&los_channel(theta, geom))?;
        Ok(i_a.dot(&h_eff).norm_sqr())
    }
}

/// SNR from the full current vector: `γ²/σ² · |i_TXᵀ h|²`.
pub fn snr_from_full_current(i_tx: &CVector, ch: &ChannelRealization, link: f64) -> f64 {
    link * i_tx.dot(&ch.h()).norm_sqr()
}

pub fn parasitic_currents(z: &PartitionedImpedance, loads: &LoadConfig, i_a: &CVector) -> Result<CVector> {
    LoadedArray::new(z, loads)?.parasitic_currents(i_a)
}

pub fn beam_pattern(theta: f64, z: &PartitionedImpedance, loads: &LoadConfig, geom: &ArrayGeometry) -> Result<f64> {
    LoadedArray::new(z, loads)?.beam_pattern(theta, geom)
}

pub fn effective_channel(z: &PartitionedImpedance, loads: &LoadConfig, ch: &ChannelRealization) -> Result<CVector> {
    LoadedArray::new(z, loads)?.effective_channel(ch)
}

pub fn effective_impedance(z: &PartitionedImpedance, loads: &LoadConfig) -> Result<CMatrix> {
    Ok(LoadedArray::new(z, loads)?.effective_impedance())
}

pub fn radiated_power(z: &PartitionedImpedance, loads: &LoadConfig, i_a: &CVector) -> Result<f64> {
    LoadedArray::new(z, loads)?.radiated_power(i_a)
}

pub fn snr(
    z: &PartitionedImpedance,
    loads: &LoadConfig,
    i_a: &CVector,
    ch: &ChannelRealization,
    link: f64,
) -> Result<f64> {
    LoadedArray::new(z, loads)?.snr(i_a, ch, link)
}

pub fn currents_from_voltages(z: &PartitionedImpedance, loads: &LoadConfig, v_a: &CVector) -> Result<CVector> {
    LoadedArray::new(z, loads)?.currents_from_voltages(v_a)
}
