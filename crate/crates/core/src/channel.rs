//! Steering vectors, geometric multipath channels and the link budget.
//!
//! Angles are azimuths in the xy plane measured from the y axis. The channel
//! of the hybrid array is `h = [h_A; h_P]` with
//! `h_A = L^{-1/2} Σ α_ℓ a_y(θ_ℓ)` and `h_P = L^{-1/2} Σ α_ℓ a_y(θ_ℓ) ⊗ a_x(θ_ℓ)`,
//! so `h_P` follows the canonical parasitic order (row by row, x-ascending).

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::em_model::{parasitic_offsets, ArrayGeometry, DipoleSpec};
use crate::error::{Error, Result};
use crate::linalg::CVector;

/// Complex gains and departure angles of a narrowband multipath channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub gains: Vec<Complex64>,
    /// Radians, in `[−π, π]`.
    pub angles: Vec<f64>,
}

impl PathSet {
    pub fn new(gains: Vec<Complex64>, angles: Vec<f64>) -> Result<Self> {
        if gains.is_empty() || gains.len() != angles.len() {
            return Err(Error::Domain(format!(
                "path set needs L >= 1 matching gains and angles (got {} gains, {} angles)",
                gains.len(),
                angles.len()
            )));
        }
        if gains.iter().any(|g| !g.re.is_finite() || !g.im.is_finite()) || angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::Domain("path gains and angles must be finite".into()));
        }
        Ok(Self { gains, angles })
    }

    /// A single unit-gain path, i.e. a line-of-sight channel.
    pub fn line_of_sight(theta: f64) -> Self {
        Self {
            gains: vec![Complex64::new(1.0, 0.0)],
            angles: vec![theta],
        }
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }
}

/// Channel seen by the active (`h_a`) and parasitic (`h_p`) elements.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h_a: CVector,
    pub h_p: CVector,
}

impl ChannelRealization {
    /// Full channel `[h_a; h_p]` in canonical element order.
    pub fn h(&self) -> CVector {
        CVector::from_iterator(
            self.h_a.len() + self.h_p.len(),
            self.h_a.iter().chain(self.h_p.iter()).copied(),
        )
    }

    /// Channel of parasitic row `row` (length `n_parasitic`).
    pub fn h_p_row(&self, row: usize, n_parasitic: usize) -> &[Complex64] {
        &self.h_p.as_slice()[row * n_parasitic..(row + 1) * n_parasitic]
    }
}

/// `a_x(θ)`: parasitic-row steering vector with offsets −⌊N_P/2⌋…−1, 1…⌈N_P/2⌉.
pub fn steering_x(theta: f64, geom: &ArrayGeometry) -> CVector {
    let step = 2.0 * PI * geom.dx / geom.wavelength() * theta.sin();
    let offsets = parasitic_offsets(geom.n_parasitic_per_active);
    CVector::from_iterator(offsets.len(), offsets.iter().map(|&m| Complex64::from_polar(1.0, m as f64 * step)))
}

/// `a_y(θ)`: active-column steering vector, first entry exactly one.
pub fn steering_y(theta: f64, geom: &ArrayGeometry) -> CVector {
    let step = -2.0 * PI * geom.dy / geom.wavelength() * theta.cos();
    CVector::from_fn(geom.n_active, |k, _| {
        if k == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::from_polar(1.0, k as f64 * step)
        }
    })
}

pub fn multipath_channel(paths: &PathSet, geom: &ArrayGeometry) -> ChannelRealization {
    let na = geom.n_active;
    let np = geom.n_parasitic_per_active;
    let mut h_a = CVector::zeros(na);
    let mut h_p = CVector::zeros(na * np);
    for (&alpha, &theta) in paths.gains.iter().zip(&paths.angles) {
        let ay = steering_y(theta, geom);
        let ax = steering_x(theta, geom);
        h_a += &ay * alpha;
        for (row, &y) in ay.iter().enumerate() {
            for (i, &x) in ax.iter().enumerate() {
                h_p[row * np + i] += alpha * y * x;
            }
        }
    }
    let norm = 1.0 / (paths.len() as f64).sqrt();
    ChannelRealization {
        h_a: h_a * Complex64::from(norm),
        h_p: h_p * Complex64::from(norm),
    }
}

/// Line-of-sight channel towards `theta` with unit gain.
pub fn los_channel(theta: f64, geom: &ArrayGeometry) -> ChannelRealization {
    multipath_channel(&PathSet::line_of_sight(theta), geom)
}

/// Draws `L` paths with `α ~ CN(0, 1)` and `θ ~ U[−π, π]`.
///
/// The generator is ChaCha8 seeded with `seed`; for each path in turn it
/// draws Re α, Im α (standard normals scaled by 1/√2), then θ.
pub fn sample_paths(n_paths: usize, seed: u64) -> Result<PathSet> {
    if n_paths == 0 {
        return Err(Error::Domain("at least one path is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gains = Vec::with_capacity(n_paths);
    let mut angles = Vec::with_capacity(n_paths);
    for _ in 0..n_paths {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        gains.push(Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2);
        angles.push(rng.random_range(-PI..=PI));
    }
    Ok(PathSet { gains, angles })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial seed `splitmix64(seed ⊕ splitmix64(trial))`.
///
/// Trials can then run in any order or in parallel and still see the same
/// channel.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    splitmix64(seed ^ splitmix64(trial))
}

/// Large-scale link parameters. Only the ratio γ²/σ² is ever formed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkBudget {
    /// Transmitter-receiver distance, meters.
    pub range: f64,
    /// Hz.
    pub bandwidth: f64,
    /// Kelvin.
    pub antenna_temperature: f64,
    /// Ohms.
    pub radiation_resistance: f64,
    /// J/K.
    pub boltzmann: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            range: 250.0,
            bandwidth: 20e6,
            antenna_temperature: 300.0,
            radiation_resistance: 95.5,
            boltzmann: 1.38e-23,
        }
    }
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.range,
            self.bandwidth,
            self.antenna_temperature,
            self.radiation_resistance,
            self.boltzmann,
        ];
        if fields.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(Error::Domain(format!("link budget fields must be positive: {self:?}")))
        }
    }
}

/// `γ²/σ² = (λ/(4πr))² · R_r / (4 k_B T_A BW)`, in 1/A².
pub fn link_constant(budget: &LinkBudget, spec: &DipoleSpec) -> f64 {
    let spreading = spec.wavelength() / (4.0 * PI * budget.range);
    spreading * spreading * budget.radiation_resistance
        / (4.0 * budget.boltzmann * budget.antenna_temperature * budget.bandwidth)
}
