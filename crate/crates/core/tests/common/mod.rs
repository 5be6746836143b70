#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use parasim::channel::{multipath_channel, sample_paths, ChannelRealization};
use parasim::circuit::LoadConfig;
use parasim::em_model::{assemble_impedance, ArrayGeometry, DipoleSpec, PartitionedImpedance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ETA: f64 = 376.730313668;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub fn crel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Composite Simpson integral of `f` over `[a, b]` with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> Complex64, a: f64, b: f64, n: usize) -> Complex64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += f(a + i as f64 * h) * w;
    }
    s * (h / 3.0)
}

fn sinc_k(k: f64, r: f64) -> f64 {
    if r == 0.0 {
        k
    } else {
        (k * r).sin() / r
    }
}

/// Mutual impedance of two parallel side-by-side dipoles of length `l` at
/// distance `d`, wavenumber `k`, integrated with Simpson's rule.
pub fn mutual_oracle(l: f64, k: f64, d: f64, n: usize) -> Complex64 {
    let h = l / 2.0;
    let s2 = (k * h).sin().powi(2);
    let ch = (k * h).cos();
    let f = |z: f64| {
        let r0 = (d * d + z * z).sqrt();
        let r1 = (d * d + (z - h).powi(2)).sqrt();
        let r2 = (d * d + (z + h).powi(2)).sqrt();
        let g = |r: f64| Complex64::from_polar(1.0 / r, -k * r);
        (g(r1) + g(r2) - g(r0) * (2.0 * ch)) * (k * (h - z.abs())).sin()
    };
    // The integrand has a kink at z = 0.
    let integral = simpson(f, -h, 0.0, n) + simpson(f, 0.0, h, n);
    c(0.0, ETA / (4.0 * PI * s2)) * integral
}

/// Self impedance: filament resistance plus reactance at distance `radius`.
pub fn self_oracle(l: f64, k: f64, radius: f64, n: usize) -> Complex64 {
    let h = l / 2.0;
    let s2 = (k * h).sin().powi(2);
    let ch = (k * h).cos();
    let f = |z: f64| {
        let v = sinc_k(k, (z - h).abs()) + sinc_k(k, (z + h).abs()) - 2.0 * ch * sinc_k(k, z.abs());
        Complex64::from(v * (k * (h - z.abs())).sin())
    };
    let r = ETA / (4.0 * PI * s2) * (simpson(f, -h, 0.0, n) + simpson(f, 0.0, h, n)).re;
    let x = mutual_oracle(l, k, radius, n).im;
    c(r, x)
}

pub fn dipole() -> DipoleSpec {
    DipoleSpec::default()
}

pub fn array(na: usize, np: usize, dx: f64, dy: f64) -> (ArrayGeometry, PartitionedImpedance) {
    let geom = ArrayGeometry::in_wavelengths(na, np, dx, dy, dipole()).unwrap();
    let z = assemble_impedance(&geom).unwrap();
    (geom, z)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_loads(rng: &mut ChaCha8Rng, np: usize, na: usize) -> LoadConfig {
    let x: Vec<f64> = (0..np * na).map(|_| rng.random_range(-300.0..300.0)).collect();
    LoadConfig::from_canonical(0.05, &x, np, na).unwrap()
}

pub fn random_currents(rng: &mut ChaCha8Rng, n: usize) -> parasim::linalg::CVector {
    parasim::linalg::CVector::from_fn(n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn random_channel(seed: u64, paths: usize, geom: &ArrayGeometry) -> ChannelRealization {
    multipath_channel(&sample_paths(paths, seed).unwrap(), geom)
}
