//! Transmit architectures compared against the hybrid parasitic array.
//!
//! * `HrpUpa`: `N_A` RF chains, each driving one row of a planar array whose
//!   other `N_P` elements are reactively loaded parasitics.
//! * `FdUla`: the same `N_A` actives with the parasitics removed.
//! * `FdUpa`: every element of the planar array has its own RF chain.
//! * `HpsUpa`: sub-connected phase shifters, one sub-panel (row) per RF chain.
//! * `RandomBaseline`: the hybrid array with the best of a few random loads.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::circuit::{BeamformingSolution, LoadedArray};
use crate::em_model::{real_part, PartitionedImpedance};
use crate::error::{Error, Result};
use crate::linalg::{to_complex, CMatrix, CVector};
use crate::solver::{
    closed_form_reactance_hybrid, optimal_active_current, optimal_current, random_search_baseline, BaselineConfig,
    ClosedFormLoads,
};

/// Static power draw of the transmitter hardware.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerModel {
    /// Watts per RF chain.
    pub p_rfc: f64,
    /// Watts per phase shifter.
    pub p_ps: f64,
    /// Watts per varactor.
    pub p_var: f64,
    /// Phase-shifter network insertion loss, dB.
    pub insertion_loss_db: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        Self {
            p_rfc: 0.240,
            p_ps: 0.030,
            p_var: 0.0,
            insertion_loss_db: 2.3,
        }
    }
}

impl PowerModel {
    /// Linear insertion-loss factor `ε = 10^{loss/10}`.
    pub fn epsilon(&self) -> f64 {
        10f64.powf(self.insertion_loss_db / 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [self.p_rfc, self.p_ps, self.p_var, self.insertion_loss_db];
        if fields.iter().any(|v| !(v >= &0.0) || !v.is_finite()) {
            return Err(Error::Config("power model entries must be finite and non-negative".into()));
        }
        Ok(())
    }

    /// Total consumed power of `arch` for the given array size and radiated power.
    pub fn total_power(&self, arch: Architecture, n_active: usize, n_parasitic: usize, p_max: f64) -> f64 {
        let na = n_active as f64;
        let np = n_parasitic as f64;
        match arch {
            Architecture::HrpUpa | Architecture::RandomBaseline => p_max + na * self.p_rfc + na * np * self.p_var,
            Architecture::FdUla => p_max + na * self.p_rfc,
            Architecture::FdUpa => p_max + na * (np + 1.0) * self.p_rfc,
            Architecture::HpsUpa => self.epsilon() * p_max + na * self.p_rfc + na * (np + 1.0) * self.p_ps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Architecture {
    HrpUpa,
    FdUla,
    FdUpa,
    HpsUpa,
    RandomBaseline,
}

impl Architecture {
    pub const ALL: [Architecture; 5] = [
        Architecture::HrpUpa,
        Architecture::FdUla,
        Architecture::FdUpa,
        Architecture::HpsUpa,
        Architecture::RandomBaseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Architecture::HrpUpa => "hrp-upa",
            Architecture::FdUla => "fd-ula",
            Architecture::FdUpa => "fd-upa",
            Architecture::HpsUpa => "hps-upa",
            Architecture::RandomBaseline => "random-baseline",
        }
    }

    /// Whether the architecture needs the parasitic impedance blocks.
    pub fn uses_parasitics(self) -> bool {
        self != Architecture::FdUla
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArchitectureResult {
    pub snr: f64,
    /// bps/Hz.
    pub se: f64,
    /// Watts.
    pub p_total: f64,
    /// bps/Hz/W.
    pub ee: f64,
}

/// `SE = log2(1 + SNR)` and `EE = SE / P_total`.
pub fn metrics(snr: f64, p_total: f64) -> ArchitectureResult {
    let se = snr.ln_1p() / std::f64::consts::LN_2;
    ArchitectureResult {
        snr,
        se,
        p_total,
        ee: se / p_total,
    }
}

fn matched_snr(h: &CVector, z: &CMatrix, link: f64, p_max: f64) -> Result<f64> {
    let i = optimal_current(h, z, p_max)?;
    Ok(link * i.dot(h).norm_sqr())
}

/// Closed-form loads followed by the optimal active currents.
pub fn hrp_upa_solution(
    z: &PartitionedImpedance,
    ch: &ChannelRealization,
    link: f64,
    p_max: f64,
    fixed_resistance: f64,
) -> Result<(BeamformingSolution, ClosedFormLoads)> {
    let closed = closed_form_reactance_hybrid(ch, z, fixed_resistance)?;
    let array = LoadedArray::new(z, &closed.loads)?;
    let eff = array.effective_system(ch)?;
    let i_a = optimal_active_current(&eff, p_max)?;
    let solution = BeamformingSolution {
        snr: link * i_a.dot(&eff.h_eff).norm_sqr(),
        radiated_power: array.radiated_power(&i_a)?,
        i_a,
        loads: closed.loads.clone(),
    };
    Ok((solution, closed))
}

pub fn eval_hrp_upa(
    z: &PartitionedImpedance,
    ch: &ChannelRealization,
    link: f64,
    p_max: f64,
    power: &PowerModel,
    fixed_resistance: f64,
) -> Result<ArchitectureResult> {
    let (solution, _) = hrp_upa_solution(z, ch, link, p_max, fixed_resistance)?;
    let p_total = power.total_power(Architecture::HrpUpa, z.n_active, z.n_parasitic_per_active, p_max);
    Ok(metrics(solution.snr, p_total))
}

/// Actives only; any parasitic blocks of `z` and `ch.h_p` are ignored.
pub fn eval_fd_ula(
    z: &PartitionedImpedance,
    ch: &ChannelRealization,
    link: f64,
    p_max: f64,
    power: &PowerModel,
) -> Result<ArchitectureResult> {
    let snr = matched_snr(&ch.h_a, &to_complex(&real_part(&z.z_a)), link, p_max)?;
    Ok(metrics(snr, power.total_power(Architecture::FdUla, z.n_active, 0, p_max)))
}

pub fn eval_fd_upa(
    z: &PartitionedImpedance,
    ch: &ChannelRealization,
    link: f64,
    p_max: f64,
    power: &PowerModel,
) -> Result<ArchitectureResult> {
    let snr = matched_snr(&ch.h(), &to_complex(&real_part(&z.full())), link, p_max)?;
    let p_total = power.total_power(Architecture::FdUpa, z.n_active, z.n_parasitic_per_active, p_max);
    Ok(metrics(snr, p_total))
}

/// `N_A × N_TX` phase-shifter matrix: row `j` applies `e^{−j∠h_k}` to active
/// `j` and to every element of its parasitic row.
pub fn hps_precoder(ch: &ChannelRealization, n_active: usize, n_parasitic: usize) -> CMatrix {
    let h = ch.h();
    let mut f = CMatrix::zeros(n_active, h.len());
    for j in 0..n_active {
        let cols = std::iter::once(j).chain((0..n_parasitic).map(|i| n_active + j * n_parasitic + i));
        for k in cols {
            f[(j, k)] = Complex64::from_polar(1.0, -h[k].arg());
        }
    }
    f
}

pub fn eval_hps_upa(
    z: &PartitionedImpedance,
    ch: &ChannelRealization,
    link: f64,
    p_max: f64,
    power: &PowerModel,
) -> Result<ArchitectureResult> {
    let (na, np) = (z.n_active, z.n_parasitic_per_active);
    let f = hps_precoder(ch, na, np);
    let h_eff = &f * ch.h();
    let z_eff = f.conjugate() * to_complex(&real_part(&z.full())) * f.transpose();
    let snr = matched_snr(&h_eff, &z_eff, link, p_max)?;
    Ok(metrics(snr, power.total_power(Architecture::HpsUpa, na, np, p_max)))
}

pub fn eval_random_baseline(
    z: &PartitionedImpedance,
    ch: &ChannelRealization,
    link: f64,
    p_max: f64,
    power: &PowerModel,
    config: &BaselineConfig,
    seed: u64,
) -> Result<ArchitectureResult> {
    let solution = random_search_baseline(ch, z, link, p_max, config, seed)?;
    let p_total = power.total_power(Architecture::RandomBaseline, z.n_active, z.n_parasitic_per_active, p_max);
    Ok(metrics(solution.snr, p_total))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_identities() {
        let m = metrics(0.0, 1.0);
        assert_eq!((m.se, m.ee), (0.0, 0.0));
        assert!((metrics(1.0, 1.0).se - 1.0).abs() < 1e-15);
        let m = metrics(1023.0, 2.0);
        assert!((m.se - 10.0).abs() < 1e-12);
        assert!((m.ee - 5.0).abs() < 1e-12);
    }

    #[test]
    fn power_totals() {
        let pm = PowerModel::default();
        let p = 0.01;
        assert!((pm.total_power(Architecture::HrpUpa, 6, 2, p) - 1.45).abs() < 1e-12);
        assert!((pm.total_power(Architecture::FdUla, 6, 2, p) - 1.45).abs() < 1e-12);
        assert!((pm.total_power(Architecture::FdUpa, 6, 2, p) - 4.33).abs() < 1e-12);
        assert!((pm.total_power(Architecture::HpsUpa, 6, 2, p) - 1.997).abs() < 1e-3);
        assert!((pm.epsilon() - 1.698).abs() < 1e-3);
    }

    #[test]
    fn power_totals_are_affine_in_pmax() {
        let pm = PowerModel::default();
        for arch in Architecture::ALL {
            let slope = pm.total_power(arch, 4, 3, 2.0) - pm.total_power(arch, 4, 3, 1.0);
            let expected = if arch == Architecture::HpsUpa { pm.epsilon() } else { 1.0 };
            assert!((slope - expected).abs() < 1e-12, "{arch}");
        }
    }

    #[test]
    fn architecture_names_round_trip() {
        for arch in Architecture::ALL {
            let json = serde_json::to_string(&arch).unwrap();
            assert_eq!(json, format!("\"{}\"", arch.name()));
            assert_eq!(serde_json::from_str::<Architecture>(&json).unwrap(), arch);
        }
    }
}
