use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{steering_x, trial_seed};
use crate::circuit::{LoadConfig, LoadedArray, DEFAULT_FIXED_RESISTANCE};
use crate::em_model::{ArrayGeometry, PartitionedImpedance};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Settings of the multistart coordinate search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub starts: usize,
    pub reactance_min: f64,
    pub reactance_max: f64,
    /// Golden-section stopping width, ohms.
    pub tolerance: f64,
    /// Grid points of the coarse scan preceding each line search.
    pub coarse_points: usize,
    pub max_sweeps: usize,
    pub fixed_resistance: f64,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            starts: 64,
            reactance_min: -1000.0,
            reactance_max: 1000.0,
            tolerance: 1e-3,
            coarse_points: 65,
            max_sweeps: 100,
            fixed_resistance: DEFAULT_FIXED_RESISTANCE,
            seed: 0,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 || self.coarse_points < 3 || self.max_sweeps == 0 {
            return Err(Error::Config(
                "oracle needs starts >= 1, coarse_points >= 3 and max_sweeps >= 1".into(),
            ));
        }
        if !(self.reactance_min < self.reactance_max) || !(self.tolerance > 0.0) {
            return Err(Error::Config("oracle reactance box must be non-empty with positive tolerance".into()));
        }
        if !(self.fixed_resistance >= 0.0) {
            return Err(Error::Config("fixed resistance must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub loads: LoadConfig,
    /// Exact beam-pattern gain at `loads`.
    pub gain: f64,
}

struct Problem<'a> {
    z: &'a PartitionedImpedance,
    a: CVector,
    z_m: CVector,
    config: &'a OracleConfig,
}

impl Problem<'_> {
    fn network_inverse(&self, x: &[f64]) -> Option<CMatrix> {
        let mut m = self.z.z_p.clone();
        for (k, &xk) in x.iter().enumerate() {
            m[(k, k)] += Complex64::new(self.config.fixed_resistance, xk);
        }
        m.lu().try_inverse()
    }

    fn gain(&self, x: &[f64]) -> f64 {
        match self.network_inverse(x) {
            Some(inv) => (Complex64::new(1.0, 0.0) - self.a.dot(&(inv * &self.z_m))).norm_sqr(),
            None => 0.0,
        }
    }

    /// Maximizes over coordinate `i` with the others fixed; returns the new gain.
    fn line_search(&self, x: &mut [f64], i: usize, current: f64) -> f64 {
        let Some(inv) = self.network_inverse(x) else {
            return current;
        };
        // Changing X_i by t is a rank-one update of the network, so the
        // response along the coordinate is a Möbius function of t.
        let y = &inv * &self.z_m;
        let r0 = self.a.dot(&y);
        let u = (self.a.transpose() * &inv)[i];
        let uv = u * y[i];
        let m = inv[(i, i)];
        let x0 = x[i];
        let eval = |xi: f64| {
            let jt = Complex64::new(0.0, xi - x0);
            let r = r0 - jt * uv / (Complex64::new(1.0, 0.0) + jt * m);
            (Complex64::new(1.0, 0.0) - r).norm_sqr()
        };
        let (lo, hi) = (self.config.reactance_min, self.config.reactance_max);
        let k_max = self.config.coarse_points - 1;
        let step = (hi - lo) / k_max as f64;
        let (mut best_k, mut best_g) = (0, f64::NEG_INFINITY);
        for k in 0..=k_max {
            let g = eval(lo + step * k as f64);
            if g > best_g {
                best_k = k;
                best_g = g;
            }
        }
        let mut a = lo + step * best_k.saturating_sub(1) as f64;
        let mut b = lo + step * (best_k + 1).min(k_max) as f64;
        let mut c = b - INV_PHI * (b - a);
        let mut d = a + INV_PHI * (b - a);
        let (mut gc, mut gd) = (eval(c), eval(d));
        while b - a > self.config.tolerance {
            if gc >= gd {
                b = d;
                d = c;
                gd = gc;
                c = b - INV_PHI * (b - a);
                gc = eval(c);
            } else {
                a = c;
                c = d;
                gc = gd;
                d = a + INV_PHI * (b - a);
                gd = eval(d);
            }
        }
        let mut candidates = [(best_k as f64 * step + lo, best_g), (c, gc), (d, gd)];
        candidates.sort_by(|p, q| q.1.total_cmp(&p.1));
        let (xi, gi) = candidates[0];
        if gi > current {
            x[i] = xi;
            gi
        } else {
            current
        }
    }

    /// Line search along the last sweep's displacement `x − prev`.
    fn pattern_move(&self, x: &mut Vec<f64>, prev: &[f64], current: f64) -> f64 {
        let d: Vec<f64> = x.iter().zip(prev).map(|(a, b)| a - b).collect();
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < self.config.tolerance {
            return current;
        }
        let (lo, hi) = (self.config.reactance_min, self.config.reactance_max);
        let base = x.clone();
        let at = |s: f64| -> Vec<f64> { base.iter().zip(&d).map(|(b, v)| (b + s * v).clamp(lo, hi)).collect() };
        let f = |s: f64| self.gain(&at(s));
        let (mut best_s, mut best_g) = (0.0, current);
        let mut s = 1.0;
        while s <= 1e6 {
            let g = f(s);
            if g > best_g {
                best_s = s;
                best_g = g;
                s *= 2.0;
            } else {
                break;
            }
        }
        let (mut a, mut b) = (0.5 * best_s, 2.0 * best_s.max(0.5));
        let tol = self.config.tolerance / norm;
        let mut c = b - INV_PHI * (b - a);
        let mut e = a + INV_PHI * (b - a);
        let (mut gc, mut ge) = (f(c), f(e));
        while b - a > tol {
            if gc >= ge {
                b = e;
                e = c;
                ge = gc;
                c = b - INV_PHI * (b - a);
                gc = f(c);
            } else {
                a = c;
                c = e;
                gc = ge;
                e = a + INV_PHI * (b - a);
                ge = f(e);
            }
        }
        for (s, g) in [(c, gc), (e, ge)] {
            if g > best_g {
                best_s = s;
                best_g = g;
            }
        }
        if best_g > current {
            *x = at(best_s);
            best_g
        } else {
            current
        }
    }

    fn run(&self, start: usize) -> (Vec<f64>, f64) {
        let n = self.z_m.len();
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(self.config.seed, start as u64));
        let mut x: Vec<f64> = (0..n)
            .map(|_| rng.random_range(self.config.reactance_min..=self.config.reactance_max))
            .collect();
        let mut g = self.gain(&x);
        for _ in 0..self.config.max_sweeps {
            let before = g;
            let prev = x.clone();
            for i in 0..n {
                g = self.line_search(&mut x, i, g);
            }
            if n > 1 {
                g = self.pattern_move(&mut x, &prev, g);
            }
            if g - before <= 1e-12 * g {
                break;
            }
        }
        let g = self.gain(&x);
        (x, g)
    }
}

/// Multistart coordinate-wise maximization of the exact single-active beam
/// pattern at `theta1` over reactances in the configured box.
///
/// Each start draws a uniform point from the box with its own seeded stream,
/// then sweeps the coordinates with a coarse scan followed by golden-section
/// refinement. Each sweep ends with a line search along the sweep's net
/// displacement, which lets the search follow ridges that are not aligned
/// with the axes. Sweeps stop once they no longer improve the gain. Starts run in
/// parallel; the best one (lowest index on ties) is returned.
pub fn numerical_oracle_los(
    theta1: f64,
    z: &PartitionedImpedance,
    geom: &ArrayGeometry,
    config: &OracleConfig,
) -> Result<OracleResult> {
    config.validate()?;
    if z.n_active != 1 || geom.n_active != 1 {
        return Err(Error::Domain("numerical oracle needs a single active element".into()));
    }
    if z.n_parasitic_per_active > 6 {
        return Err(Error::Domain("numerical oracle supports at most 6 parasitic elements".into()));
    }
    let problem = Problem {
        z,
        a: steering_x(theta1, geom),
        z_m: z.z_m.column(0).into_owned(),
        config,
    };
    let np = z.n_parasitic_per_active;
    let (x, _) = (0..config.starts)
        .into_par_iter()
        .map(|s| problem.run(s))
        .collect::<Vec<_>>()
        .into_iter()
        .fold((Vec::new(), f64::NEG_INFINITY), |best, run| if run.1 > best.1 { run } else { best });
    let loads = LoadConfig::from_canonical(config.fixed_resistance, &x, np, 1)?;
    let gain = LoadedArray::new(z, &loads)?.beam_pattern(theta1, geom)?;
    Ok(OracleResult { loads, gain })
}
