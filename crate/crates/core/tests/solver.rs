mod common;

use std::f64::consts::PI;

use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use parasim::channel::{los_channel, steering_x};
use parasim::circuit::{EffectiveSystem, LoadConfig, LoadedArray};
use parasim::em_model::PartitionedImpedance;
use parasim::linalg::{CMatrix, CVector};
use parasim::solver::*;
use rand::Rng;

fn z_p_self(z: &PartitionedImpedance) -> Complex64 {
    z.parasitic_self_impedance().unwrap()
}

/// `Ĝ` for circle phases `φ`, written out directly.
fn g_hat(theta: f64, phases: &[f64], z: &PartitionedImpedance, geom: &parasim::em_model::ArrayGeometry) -> f64 {
    let zeta = zeta(z_p_self(z), 0.05);
    let a = steering_x(theta, geom);
    let mut s = c(1.0, 0.0);
    for (i, &phi) in phases.iter().enumerate() {
        let w = (c(1.0, 0.0) + Complex64::from_polar(1.0, phi)) * (zeta / 2.0);
        s -= a[i] * w * z.z_m[(i, 0)];
    }
    s.norm_sqr()
}

#[test]
fn closed_form_phases_dominate_random_phases() {
    let mut r = rng(10);
    for np in [1, 2, 4] {
        let (geom, z) = array(1, np, 0.4, 0.5);
        for deg in [0.0f64, 30.0, 60.0] {
            let theta = deg.to_radians();
            let best = closed_form_phase(theta, &z, &geom, 0.05).unwrap();
            let g_best = g_hat(theta, &best.phases, &z, &geom);
            for _ in 0..100_000 {
                let phases: Vec<f64> = (0..np).map(|_| r.random_range(-PI..PI)).collect();
                assert!(g_hat(theta, &phases, &z, &geom) <= g_best * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn closed_form_phases_align_every_term() {
    for np in [1, 2, 3, 4, 6] {
        let (geom, z) = array(1, np, 0.4, 0.5);
        let zeta = zeta(z_p_self(&z), 0.05);
        for k in 0..37 {
            let theta = (-90.0 + 5.0 * k as f64).to_radians();
            let p = closed_form_phase(theta, &z, &geom, 0.05).unwrap();
            let a = steering_x(theta, &geom);
            for i in 0..np {
                assert!(p.phases[i] > -PI && p.phases[i] <= PI);
                let chi2 = -(a[i] * z.z_m[(i, 0)]) * (zeta / 2.0) * Complex64::from_polar(1.0, p.phases[i]);
                assert!((p.chi1.conj() * chi2).arg().abs() < 1e-10);
            }
        }
    }
}

#[test]
fn phase_periodicity_leaves_weight_unchanged() {
    let w = LorentzianWeight::from_phi(0.0137, 0.8);
    let shifted = LorentzianWeight::from_phi(0.0137, 0.8 + 2.0 * PI);
    let half = |w: LorentzianWeight| (c(1.0, 0.0) + Complex64::from_polar(1.0, w.phi)) * (w.zeta / 2.0);
    assert!((half(w) - half(shifted)).norm() < 1e-15);
    assert!((half(w) - w.value()).norm() < 1e-15);
}

#[test]
fn los_reactance_is_the_mapped_phase() {
    for np in [1, 2, 4] {
        let (geom, z) = array(1, np, 0.4, 0.5);
        let zp = z_p_self(&z);
        let zeta = zeta(zp, 0.05);
        for k in 0..19 {
            let theta = (-85.0 + 9.5 * k as f64).to_radians();
            let phases = closed_form_phase(theta, &z, &geom, 0.05).unwrap();
            let closed = closed_form_reactance_los(theta, &z, &geom, 0.05).unwrap();
            for (i, &phi) in phases.phases.iter().enumerate() {
                let mapped = weight_to_reactance(&LorentzianWeight::from_phi(zeta, phi), zp);
                let got = closed.loads.reactances[(i, 0)];
                assert!((got - mapped.ohms).abs() < 1e-9 * (1.0 + got.abs()), "{got} vs {}", mapped.ohms);
            }
        }
    }
}

#[test]
fn common_term_is_the_parasitic_self_reactance() {
    let (geom, z) = array(1, 2, 0.4, 0.5);
    let zp = z_p_self(&z);
    let zeta = zeta(zp, 0.05);
    let theta = 0.4;
    let closed = closed_form_reactance_los(theta, &z, &geom, 0.05).unwrap();
    let p = closed_form_phase(theta, &z, &geom, 0.05).unwrap();
    for (i, &phi) in p.phases.iter().enumerate() {
        let tunable = -(phi / 2.0).tan() / zeta;
        assert!((closed.loads.reactances[(i, 0)] - (-zp.im + tunable)).abs() < 1e-9);
    }
}

#[test]
fn hybrid_closed_form_reduces_to_line_of_sight() {
    for np in [1, 2, 4] {
        let (geom, z) = array(1, np, 0.4, 0.5);
        for k in 0..13 {
            let theta = (-60.0 + 10.0 * k as f64).to_radians();
            let los = closed_form_reactance_los(theta, &z, &geom, 0.05).unwrap();
            let hyb = closed_form_reactance_hybrid(&los_channel(theta, &geom), &z, 0.05).unwrap();
            for (a, b) in los.loads.canonical().iter().zip(hyb.loads.canonical()) {
                assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
            }
        }
    }
}

#[test]
fn hybrid_rows_dominate_random_reactances() {
    let (geom, z) = array(4, 2, 0.4, 0.5);
    let zp = z_p_self(&z);
    let mut r = rng(11);
    for t in 0..5 {
        let ch = random_channel(100 + t, 4, &geom);
        let closed = closed_form_reactance_hybrid(&ch, &z, 0.05).unwrap();
        // Row objective under the diagonal approximation: |h_A,j − h_P,jᵀ W_j z_m,j,j|².
        let row_gain = |j: usize, x: &[f64]| {
            let mut s = ch.h_a[j];
            for i in 0..2 {
                let w = (zp + c(0.05, x[i])).inv();
                s -= ch.h_p[j * 2 + i] * w * z.z_m[(j * 2 + i, j)];
            }
            s.norm_sqr()
        };
        for j in 0..4 {
            let best = row_gain(j, &[closed.loads.reactances[(0, j)], closed.loads.reactances[(1, j)]]);
            for _ in 0..10_000 {
                let x = [r.random_range(-2000.0..2000.0), r.random_range(-2000.0..2000.0)];
                assert!(row_gain(j, &x) <= best * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn vanishing_active_channel_falls_back_to_open_circuit() {
    let (geom, z) = array(2, 2, 0.4, 0.5);
    let mut ch = random_channel(1, 3, &geom);
    ch.h_a[1] = c(0.0, 0.0);
    let closed = closed_form_reactance_hybrid(&ch, &z, 0.05).unwrap();
    assert_eq!(closed.degenerate_rows, vec![false, true]);
    assert_eq!(closed.loads.reactances[(0, 1)], parasim::circuit::OPEN_CIRCUIT_REACTANCE);
    assert!(closed.open_circuit[2] && closed.open_circuit[3]);
}

#[test]
fn single_parasitic_closed_form_beats_a_dense_grid() {
    let (geom, z) = array(1, 1, 0.4, 0.5);
    let theta = 30f64.to_radians();
    let closed = closed_form_reactance_los(theta, &z, &geom, 0.05).unwrap();
    let g_closed = LoadedArray::new(&z, &closed.loads).unwrap().beam_pattern(theta, &geom).unwrap();
    let a = steering_x(theta, &geom)[0];
    let (zm, zpp) = (z.z_m[(0, 0)], z.z_p[(0, 0)]);
    let n = 1_000_000;
    let mut best = 0.0f64;
    for k in 0..=n {
        let x = -1000.0 + 2000.0 * k as f64 / n as f64;
        best = best.max((c(1.0, 0.0) - a * zm / (zpp + c(0.05, x))).norm_sqr());
    }
    let x = closed.loads.reactances[(0, 0)];
    assert!(x.abs() < 1000.0, "closed form at {x} Ω");
    assert!(rel(best, g_closed) < 1e-6, "{best} vs {g_closed}");
}

#[test]
fn approximation_is_exact_without_off_diagonal_terms() {
    let (geom, z) = array(1, 1, 0.4, 0.5);
    let loads = LoadConfig::from_canonical(0.05, &[-37.0], 1, 1).unwrap();
    let w = ApproxObjective::new(&z, &loads).w_matrix;
    for k in 0..10 {
        let theta = -1.4 + 0.3 * k as f64;
        let exact = LoadedArray::new(&z, &loads).unwrap().beam_pattern(theta, &geom).unwrap();
        assert!(rel(approx_beam_pattern(theta, &w, &z, &geom).unwrap(), exact) < 1e-12);
    }
    let zero = CMatrix::zeros(1, 1);
    assert_eq!(approx_beam_pattern(0.3, &zero, &z, &geom).unwrap(), 1.0);
}

#[test]
fn approx_objective_splits_the_parasitic_block() {
    let (_, z) = array(1, 3, 0.4, 0.5);
    let loads = LoadConfig::from_canonical(0.05, &[1.0, -50.0, 300.0], 3, 1).unwrap();
    let obj = ApproxObjective::new(&z, &loads);
    assert_eq!(&obj.d_p + &obj.e_p, z.z_p);
    let mut d_plus_r = obj.d_p.clone();
    for (k, zr) in loads.impedances().enumerate() {
        d_plus_r[(k, k)] += zr;
    }
    let prod = &obj.w_matrix * d_plus_r;
    assert!((prod - CMatrix::identity(3, 3)).norm() < 1e-14);
    for k in 0..3 {
        assert_eq!(obj.e_p[(k, k)], c(0.0, 0.0));
    }
}

fn random_system(r: &mut impl Rng, na: usize) -> EffectiveSystem {
    let (geom, z) = array(na, 2, 0.4, 0.5);
    let x: Vec<f64> = (0..2 * na).map(|_| r.random_range(-300.0..300.0)).collect();
    let loads = LoadConfig::from_canonical(0.05, &x, 2, na).unwrap();
    let ch = random_channel(r.random(), 4, &geom);
    LoadedArray::new(&z, &loads).unwrap().effective_system(&ch).unwrap()
}

fn on_boundary(i: &CVector, z: &CMatrix, p: f64) -> CVector {
    let power = i.dotc(&(z * i)).re;
    i * Complex64::from((p / power).sqrt())
}

#[test]
fn optimal_current_is_tight_and_dominant() {
    let mut r = rng(12);
    for _ in 0..100 {
        let eff = random_system(&mut r, 4);
        let p = 0.01;
        let i = optimal_active_current(&eff, p).unwrap();
        let power = i.dotc(&(&eff.z_eff * &i)).re;
        assert!(rel(power, p) < 1e-9);
        let best = i.dot(&eff.h_eff).norm_sqr();
        for _ in 0..1000 {
            let trial = on_boundary(&random_currents(&mut r, 4), &eff.z_eff, p);
            assert!(trial.dot(&eff.h_eff).norm_sqr() <= best * (1.0 + 1e-9));
        }
    }
}

#[test]
fn optimal_current_satisfies_kkt_by_finite_differences() {
    let mut r = rng(13);
    for _ in 0..20 {
        let eff = random_system(&mut r, 4);
        let i = optimal_active_current(&eff, 1.0).unwrap();
        let n = i.len();
        let to_c = |x: &[f64]| CVector::from_fn(n, |k, _| c(x[k], x[n + k]));
        let f = |x: &[f64]| to_c(x).dot(&eff.h_eff).norm_sqr();
        let g = |x: &[f64]| {
            let v = to_c(x);
            v.dotc(&(&eff.z_eff * &v)).re
        };
        let x0: Vec<f64> = i.iter().map(|v| v.re).chain(i.iter().map(|v| v.im)).collect();
        let step = 1e-4 * x0.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let grad = |h: &dyn Fn(&[f64]) -> f64| -> Vec<f64> {
            (0..2 * n)
                .map(|k| {
                    let mut p = x0.clone();
                    let mut m = x0.clone();
                    p[k] += step;
                    m[k] -= step;
                    (h(&p) - h(&m)) / (2.0 * step)
                })
                .collect()
        };
        let gf = grad(&f);
        let gg = grad(&g);
        let dot: f64 = gf.iter().zip(&gg).map(|(a, b)| a * b).sum();
        let gg2: f64 = gg.iter().map(|v| v * v).sum();
        let lambda = dot / gg2;
        let resid: f64 = gf.iter().zip(&gg).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = gf.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(resid / norm < 1e-8, "{}", resid / norm);
    }
}

#[test]
fn without_parasitics_the_optimum_is_the_fully_digital_one() {
    let (geom, z) = array(4, 0, 0.4, 0.5);
    let ch = random_channel(77, 4, &geom);
    let loads = LoadConfig::open_circuit(0, 4, 0.05);
    let eff = LoadedArray::new(&z, &loads).unwrap().effective_system(&ch).unwrap();
    let re_a = z.z_a.map(|v| c(v.re, 0.0));
    assert!((&eff.z_eff - &re_a).norm() == 0.0);
    let (p, link) = (0.01, 5.36e4);
    let i = optimal_active_current(&eff, p).unwrap();
    let snr = link * i.dot(&ch.h_a).norm_sqr();
    let inv = re_a.clone().try_inverse().unwrap();
    let want = link * p * ch.h_a.dotc(&(inv * &ch.h_a)).re;
    assert!(rel(snr, want) < 1e-10);
}

#[test]
fn oracle_matches_a_grid_for_one_parasitic() {
    let (geom, z) = array(1, 1, 0.4, 0.5);
    let config = OracleConfig {
        starts: 8,
        ..OracleConfig::default()
    };
    for deg in [0.0f64, 20.0, 60.0, 90.0] {
        let theta = deg.to_radians();
        let oracle = numerical_oracle_los(theta, &z, &geom, &config).unwrap();
        let mut best = 0.0f64;
        for k in 0..=200_000 {
            let x = -1000.0 + 2000.0 * k as f64 / 200_000.0;
            let loads = LoadConfig::from_canonical(0.05, &[x], 1, 1).unwrap();
            best = best.max(LoadedArray::new(&z, &loads).unwrap().beam_pattern(theta, &geom).unwrap());
        }
        assert!(oracle.gain >= best * (1.0 - 1e-8), "{deg}°: {} vs {best}", oracle.gain);
    }
}

#[test]
fn oracle_is_deterministic_and_monotone_in_starts() {
    let (geom, z) = array(1, 2, 0.4, 0.5);
    let base = OracleConfig {
        starts: 4,
        seed: 3,
        ..OracleConfig::default()
    };
    let a = numerical_oracle_los(0.7, &z, &geom, &base).unwrap();
    let b = numerical_oracle_los(0.7, &z, &geom, &base).unwrap();
    assert_eq!(a, b);
    let mut last = a.gain;
    for starts in [8, 16, 32] {
        let g = numerical_oracle_los(0.7, &z, &geom, &OracleConfig { starts, ..base }).unwrap().gain;
        assert!(g >= last);
        last = g;
    }
}

#[test]
fn baseline_budget_one_is_its_first_draw() {
    let (geom, z) = array(2, 2, 0.4, 0.5);
    let ch = random_channel(5, 4, &geom);
    let config = BaselineConfig {
        budget: 1,
        ..BaselineConfig::default()
    };
    let one = random_search_baseline(&ch, &z, 1.0, 0.01, &config, 42).unwrap();
    let again = random_search_baseline(&ch, &z, 1.0, 0.01, &config, 42).unwrap();
    assert_eq!(one, again);
    let more = random_search_baseline(&ch, &z, 1.0, 0.01, &BaselineConfig { budget: 8, ..config }, 42).unwrap();
    assert!(more.snr >= one.snr);
    assert!(rel(one.radiated_power, 0.01) < 1e-9);
}

#[test]
fn large_baseline_budget_approaches_the_single_parasitic_optimum() {
    let (geom, z) = array(1, 1, 0.4, 0.5);
    let ch = los_channel(0.2, &geom);
    // Power-constrained SNR on a dense reactance grid over the same box.
    let mut best = 0.0f64;
    for k in 0..=200_000 {
        let x = -1000.0 + 2000.0 * k as f64 / 200_000.0;
        let loads = LoadConfig::from_canonical(0.05, &[x], 1, 1).unwrap();
        let eff = LoadedArray::new(&z, &loads).unwrap().effective_system(&ch).unwrap();
        best = best.max(eff.h_eff[0].norm_sqr() / eff.z_eff[(0, 0)].re);
    }
    let config = BaselineConfig {
        budget: 20_000,
        ..BaselineConfig::default()
    };
    let found = random_search_baseline(&ch, &z, 1.0, 1.0, &config, 9).unwrap();
    assert!(found.snr <= best * (1.0 + 1e-6));
    assert!(found.snr > 0.999 * best, "{} vs {best}", found.snr);
}

#[test]
fn lorentzian_locus_holds_for_any_reactance() {
    let (_, z) = array(1, 2, 0.4, 0.5);
    let loads = LoadConfig::new(0.05, DMatrix::from_row_slice(2, 1, &[-1e5, 1e5])).unwrap();
    for w in reactance_to_weight(&loads, &z) {
        let v = w.value() / w.zeta - 0.5;
        assert!((v.norm() - 0.5).abs() < 1e-12);
        assert!(w.value().re >= 0.0);
    }
}

#[test]
fn closed_form_tracks_the_oracle_for_two_parasitics() {
    let (geom, z) = array(1, 2, 0.4, 0.5);
    let config = OracleConfig {
        starts: 32,
        reactance_min: -1e4,
        reactance_max: 1e4,
        coarse_points: 401,
        seed: 7,
        ..OracleConfig::default()
    };
    let mut within = 0;
    for k in 0..181 {
        let theta = (-90.0 + k as f64).to_radians();
        let closed = closed_form_reactance_los(theta, &z, &geom, 0.05).unwrap();
        let g = LoadedArray::new(&z, &closed.loads).unwrap().beam_pattern(theta, &geom).unwrap();
        let oracle = numerical_oracle_los(theta, &z, &geom, &config).unwrap();
        if 10.0 * (oracle.gain / g).log10() <= 0.5 {
            within += 1;
        }
    }
    assert!(within as f64 >= 0.95 * 181.0, "{within}/181");
}
