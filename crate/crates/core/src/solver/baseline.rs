use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::active_current::optimal_active_current;
use crate::channel::ChannelRealization;
use crate::circuit::{BeamformingSolution, LoadConfig, LoadedArray, DEFAULT_FIXED_RESISTANCE};
use crate::em_model::PartitionedImpedance;
use crate::error::{Error, Result};

/// Random reactance search used as a stand-in for iterative pattern-matching
/// designs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    /// Number of reactance draws.
    pub budget: usize,
    pub reactance_min: f64,
    pub reactance_max: f64,
    pub fixed_resistance: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            budget: 16,
            reactance_min: -1000.0,
            reactance_max: 1000.0,
            fixed_resistance: DEFAULT_FIXED_RESISTANCE,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::Config("baseline budget must be at least 1".into()));
        }
        if !(self.reactance_min < self.reactance_max) {
            return Err(Error::Config("baseline reactance box must be non-empty".into()));
        }
        if !(self.fixed_resistance >= 0.0) {
            return Err(Error::Config("fixed resistance must be non-negative".into()));
        }
        Ok(())
    }
}

/// Best of `budget` uniform reactance draws, each paired with the optimal
/// active currents for the resulting effective system.
///
/// Draws come from one ChaCha8 stream seeded with `seed`, `N_A·N_P` values per
/// draw in canonical order, so a smaller budget evaluates a prefix of a larger
/// one. Draws that hit a resonance or an indefinite effective impedance are
/// skipped; the call fails only if every draw does.
pub fn random_search_baseline(
    ch: &ChannelRealization,
    z: &PartitionedImpedance,
    link: f64,
    p_max: f64,
    config: &BaselineConfig,
    seed: u64,
) -> Result<BeamformingSolution> {
    config.validate()?;
    let (np, na) = (z.n_parasitic_per_active, z.n_active);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<BeamformingSolution> = None;
    let mut last_err = None;
    for _ in 0..config.budget {
        let x: Vec<f64> = (0..np * na)
            .map(|_| rng.random_range(config.reactance_min..=config.reactance_max))
            .collect();
        let attempt = (|| {
            let loads = LoadConfig::from_canonical(config.fixed_resistance, &x, np, na)?;
            let array = LoadedArray::new(z, &loads)?;
            let eff = array.effective_system(ch)?;
            let i_a = optimal_active_current(&eff, p_max)?;
            Ok::<_, Error>(BeamformingSolution {
                snr: link * i_a.dot(&eff.h_eff).norm_sqr(),
                radiated_power: array.radiated_power(&i_a)?,
                i_a,
                loads,
            })
        })();
        match attempt {
            Ok(sol) => {
                if best.as_ref().is_none_or(|b| sol.snr > b.snr) {
                    best = Some(sol);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.expect("budget >= 1"))
}
