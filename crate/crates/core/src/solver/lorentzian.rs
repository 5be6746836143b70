use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channel::steering_x;
use crate::circuit::{LoadConfig, OPEN_CIRCUIT_REACTANCE};
use crate::em_model::{ArrayGeometry, PartitionedImpedance};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// `ζ = 1 / (Re Z_P + R)` for identical parasitic elements.
pub fn zeta(z_p_self: Complex64, fixed_resistance: f64) -> f64 {
    1.0 / (z_p_self.re + fixed_resistance)
}

/// A load weight `w = 1/(Z_P + R + jX)` written as `ζ cos ϕ e^{jϕ}`.
///
/// `varphi = ∠w` lies in `[−π/2, π/2]` and `phi = 2 varphi` is the phase of
/// `w/ζ − 1/2` on the Lorentzian circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianWeight {
    pub zeta: f64,
    pub varphi: f64,
    pub phi: f64,
}

impl LorentzianWeight {
    pub fn from_varphi(zeta: f64, varphi: f64) -> Self {
        Self {
            zeta,
            varphi,
            phi: 2.0 * varphi,
        }
    }

    /// From the circle phase `φ ∈ (−π, π]`.
    pub fn from_phi(zeta: f64, phi: f64) -> Self {
        Self {
            zeta,
            varphi: 0.5 * phi,
            phi,
        }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(self.zeta * self.varphi.cos(), self.varphi)
    }
}

/// A reactance produced from a weight; `open_circuit` marks the sentinel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reactance {
    pub ohms: f64,
    pub open_circuit: bool,
}

/// Weight of a single parasitic loaded with `R + jX`.
pub fn weight_from_reactance(reactance: f64, z_p_self: Complex64, fixed_resistance: f64) -> LorentzianWeight {
    let w = (z_p_self + Complex64::new(fixed_resistance, reactance)).inv();
    LorentzianWeight::from_varphi(zeta(z_p_self, fixed_resistance), w.arg())
}

/// Weights of every parasitic in canonical order, using the mean self impedance.
pub fn reactance_to_weight(loads: &LoadConfig, z: &PartitionedImpedance) -> Vec<LorentzianWeight> {
    let Some(zp) = z.parasitic_self_impedance() else {
        return Vec::new();
    };
    loads
        .reactances
        .iter()
        .map(|&x| weight_from_reactance(x, zp, loads.fixed_resistance))
        .collect()
}

/// `X = −Im Z_P − tan(∠w)/ζ`; `|∠w| = π/2` maps to the open-circuit sentinel.
pub fn weight_to_reactance(weight: &LorentzianWeight, z_p_self: Complex64) -> Reactance {
    if FRAC_PI_2 - weight.varphi.abs() < 1e-12 {
        return Reactance {
            ohms: OPEN_CIRCUIT_REACTANCE,
            open_circuit: true,
        };
    }
    Reactance {
        ohms: -z_p_self.im - weight.varphi.tan() / weight.zeta,
        open_circuit: false,
    }
}

/// Diagonal approximation `Z_P ≈ D_P` with `W = (D_P + Z_R)⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxObjective {
    pub d_p: CMatrix,
    pub e_p: CMatrix,
    pub w_matrix: CMatrix,
}

impl ApproxObjective {
    pub fn new(z: &PartitionedImpedance, loads: &LoadConfig) -> Self {
        let d_p = CMatrix::from_diagonal(&z.z_p.diagonal());
        let e_p = &z.z_p - &d_p;
        let w = d_p
            .diagonal()
            .iter()
            .zip(loads.impedances())
            .map(|(&d, zr)| (d + zr).inv())
            .collect::<Vec<_>>();
        Self {
            d_p,
            e_p,
            w_matrix: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(w)),
        }
    }
}

/// `Ĝ(θ, W) = |1 − a_Pᵀ W z_m|²` for a single active element.
pub fn approx_beam_pattern(
    theta: f64,
    w_matrix: &CMatrix,
    z: &PartitionedImpedance,
    geom: &ArrayGeometry,
) -> Result<f64> {
    if z.n_active != 1 || geom.n_active != 1 {
        return Err(Error::Domain("approximate beam pattern needs a single active element".into()));
    }
    let a_p = steering_x(theta, geom);
    let response = a_p.dot(&(w_matrix * z.z_m.column(0)));
    Ok((Complex64::new(1.0, 0.0) - response).norm_sqr())
}
