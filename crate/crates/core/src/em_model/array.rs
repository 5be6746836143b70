//! Planar hybrid array layout and the partitioned impedance matrix.
//!
//! Active dipoles sit on the y axis at pitch `dy`. Each active element owns a
//! row of `N_P` parasitic dipoles along x at pitch `dx`, with ⌊N_P/2⌋ on the
//! negative side and ⌈N_P/2⌉ on the positive side. The canonical element order
//! is all actives by row, then the parasitics row by row, x-ascending.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dipole::{dipole_mutual_impedance, dipole_self_impedance, DipoleSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub n_active: usize,
    pub n_parasitic_per_active: usize,
    /// Parasitic pitch along x, meters.
    pub dx: f64,
    /// Active pitch along y, meters.
    pub dy: f64,
    pub dipole: DipoleSpec,
}

impl ArrayGeometry {
    pub fn new(
        n_active: usize,
        n_parasitic_per_active: usize,
        dx: f64,
        dy: f64,
        dipole: DipoleSpec,
    ) -> Result<Self> {
        let geom = Self {
            n_active,
            n_parasitic_per_active,
            dx,
            dy,
            dipole,
        };
        geom.validate()?;
        Ok(geom)
    }

    /// Same as [`ArrayGeometry::new`] with spacings given in carrier wavelengths.
    pub fn in_wavelengths(
        n_active: usize,
        n_parasitic_per_active: usize,
        dx_over_lambda: f64,
        dy_over_lambda: f64,
        dipole: DipoleSpec,
    ) -> Result<Self> {
        let lambda = dipole.wavelength();
        Self::new(
            n_active,
            n_parasitic_per_active,
            dx_over_lambda * lambda,
            dy_over_lambda * lambda,
            dipole,
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.dipole.validate()?;
        if self.n_active == 0 {
            return Err(Error::Geometry("at least one active element is required".into()));
        }
        if self.n_parasitic_per_active > 0 && !(self.dx > 0.0 && self.dx.is_finite()) {
            return Err(Error::Geometry(format!(
                "parasitic pitch dx must be positive (got {})",
                self.dx
            )));
        }
        if self.n_active > 1 && !(self.dy > 0.0 && self.dy.is_finite()) {
            return Err(Error::Geometry(format!(
                "active pitch dy must be positive (got {})",
                self.dy
            )));
        }
        Ok(())
    }

    pub fn n_parasitic_total(&self) -> usize {
        self.n_active * self.n_parasitic_per_active
    }

    pub fn n_elements(&self) -> usize {
        self.n_active * (1 + self.n_parasitic_per_active)
    }

    pub fn wavelength(&self) -> f64 {
        self.dipole.wavelength()
    }

    /// Signed x-offsets (in units of `dx`) of the parasitics in one row, ascending.
    pub fn parasitic_offsets(&self) -> Vec<i64> {
        parasitic_offsets(self.n_parasitic_per_active)
    }

    /// Integer grid coordinates `(x index, row)` of every element in canonical order.
    pub fn grid_coordinates(&self) -> Vec<(i64, i64)> {
        let offsets = self.parasitic_offsets();
        let rows = 0..self.n_active as i64;
        rows.clone()
            .map(|row| (0, row))
            .chain(rows.flat_map(|row| offsets.iter().map(move |&m| (m, row))))
            .collect()
    }

    /// Element centers in meters, canonical order.
    pub fn positions(&self) -> Vec<[f64; 2]> {
        self.grid_coordinates()
            .into_iter()
            .map(|(m, row)| [m as f64 * self.dx, row as f64 * self.dy])
            .collect()
    }

    /// The same array with every parasitic element removed.
    pub fn actives_only(&self) -> Self {
        Self {
            n_parasitic_per_active: 0,
            ..*self
        }
    }
}

pub(crate) fn parasitic_offsets(n_parasitic: usize) -> Vec<i64> {
    let below = (n_parasitic / 2) as i64;
    let above = n_parasitic.div_ceil(2) as i64;
    (-below..0).chain(1..=above).collect()
}

/// Impedance matrix of a hybrid array split into active/parasitic blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedImpedance {
    pub n_active: usize,
    pub n_parasitic_per_active: usize,
    /// Active-active block, `N_A × N_A`.
    pub z_a: DMatrix<Complex64>,
    /// Parasitic-active block, `N_A·N_P × N_A`.
    pub z_m: DMatrix<Complex64>,
    /// Parasitic-parasitic block, `N_A·N_P × N_A·N_P`.
    pub z_p: DMatrix<Complex64>,
}

impl PartitionedImpedance {
    /// Splits a full matrix in canonical order.
    pub fn from_full(full: &DMatrix<Complex64>, n_active: usize, n_parasitic_per_active: usize) -> Result<Self> {
        let n = n_active * (1 + n_parasitic_per_active);
        if full.nrows() != n || full.ncols() != n {
            return Err(Error::Dimension(format!(
                "{}x{} matrix cannot hold n_active={n_active}, n_parasitic={n_parasitic_per_active} (needs {n}x{n})",
                full.nrows(),
                full.ncols()
            )));
        }
        let np = n - n_active;
        Ok(Self {
            n_active,
            n_parasitic_per_active,
            z_a: full.view((0, 0), (n_active, n_active)).into_owned(),
            z_m: full.view((n_active, 0), (np, n_active)).into_owned(),
            z_p: full.view((n_active, n_active), (np, np)).into_owned(),
        })
    }

    /// Reassembles `Z_TX = [[Z_A, Z_mᵀ], [Z_m, Z_P]]`.
    pub fn full(&self) -> DMatrix<Complex64> {
        let na = self.n_active;
        let n = self.n_elements();
        let mut full = DMatrix::zeros(n, n);
        full.view_mut((0, 0), (na, na)).copy_from(&self.z_a);
        full.view_mut((na, 0), (n - na, na)).copy_from(&self.z_m);
        full.view_mut((0, na), (na, n - na)).copy_from(&self.z_m.transpose());
        full.view_mut((na, na), (n - na, n - na)).copy_from(&self.z_p);
        full
    }

    pub fn n_parasitic_total(&self) -> usize {
        self.n_active * self.n_parasitic_per_active
    }

    pub fn n_elements(&self) -> usize {
        self.n_active * (1 + self.n_parasitic_per_active)
    }

    /// Actives-only view: the same `Z_A` with no parasitic blocks.
    pub fn actives_only(&self) -> Self {
        Self {
            n_active: self.n_active,
            n_parasitic_per_active: 0,
            z_a: self.z_a.clone(),
            z_m: DMatrix::zeros(0, self.n_active),
            z_p: DMatrix::zeros(0, 0),
        }
    }

    /// Coupling vector between active `row` and the parasitics of its own row.
    pub fn row_coupling(&self, row: usize) -> Vec<Complex64> {
        let np = self.n_parasitic_per_active;
        (0..np).map(|i| self.z_m[(row * np + i, row)]).collect()
    }

    /// Mean parasitic self impedance (all parasitics are assumed identical).
    pub fn parasitic_self_impedance(&self) -> Option<Complex64> {
        let n = self.z_p.nrows();
        (n > 0).then(|| self.z_p.diagonal().iter().sum::<Complex64>() / n as f64)
    }

    /// Checks reciprocity, positive self resistance and passivity.
    pub fn validate(&self, symmetry_tol: f64) -> Result<()> {
        let full = self.full();
        let scale = full.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let asym = (&full - full.transpose()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if asym > symmetry_tol * scale {
            return Err(Error::Format(format!(
                "matrix is not symmetric (max |Z - Zᵀ| = {asym:.3e})"
            )));
        }
        if let Some(bad) = full.diagonal().iter().position(|z| !(z.re > 0.0)) {
            return Err(Error::Format(format!(
                "self resistance of element {bad} is not positive"
            )));
        }
        let min_eig = min_real_part_eigenvalue(&full);
        let re_norm = real_part(&full).norm();
        if min_eig < -1e-8 * re_norm {
            return Err(Error::NotPositiveDefinite {
                what: "real part of the impedance matrix (non-passive array)",
                min_eigenvalue: min_eig,
            });
        }
        Ok(())
    }
}

pub(crate) fn real_part(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    m.map(|z| z.re)
}

/// Smallest eigenvalue of the symmetric part of `Re Z`.
pub fn min_real_part_eigenvalue(z: &DMatrix<Complex64>) -> f64 {
    if z.is_empty() {
        return 0.0;
    }
    let re = real_part(z);
    let sym = (&re + re.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.min()
}

/// Full impedance matrix for dipoles at arbitrary side-by-side positions (meters).
pub fn impedance_from_positions(spec: &DipoleSpec, positions: &[[f64; 2]]) -> Result<DMatrix<Complex64>> {
    let n = positions.len();
    let z_self = dipole_self_impedance(spec)?;
    let mut full = DMatrix::from_element(n, n, z_self);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (positions[i][0] - positions[j][0]).hypot(positions[i][1] - positions[j][1]);
            if d == 0.0 {
                return Err(Error::Geometry(format!("elements {i} and {j} share a position")));
            }
            let z = dipole_mutual_impedance(spec, d)?;
            full[(i, j)] = z;
            full[(j, i)] = z;
        }
    }
    Ok(full)
}

/// Builds `Z_TX` for the planar hybrid array, partitioned into its blocks.
pub fn assemble_impedance(geom: &ArrayGeometry) -> Result<PartitionedImpedance> {
    geom.validate()?;
    let coords = geom.grid_coordinates();
    let n = coords.len();
    let z_self = dipole_self_impedance(&geom.dipole)?;
    // Mutual terms depend only on the grid offset, so each is integrated once.
    let mut cache: HashMap<(u64, u64), Complex64> = HashMap::new();
    let mut full = DMatrix::from_element(n, n, z_self);
    for i in 0..n {
        for j in (i + 1)..n {
            let key = (coords[i].0.abs_diff(coords[j].0), coords[i].1.abs_diff(coords[j].1));
            let z = match cache.get(&key) {
                Some(&z) => z,
                None => {
                    let d = (key.0 as f64 * geom.dx).hypot(key.1 as f64 * geom.dy);
                    if d == 0.0 {
                        return Err(Error::Geometry(format!("elements {i} and {j} share a position")));
                    }
                    let z = dipole_mutual_impedance(&geom.dipole, d)?;
                    cache.insert(key, z);
                    z
                }
            };
            full[(i, j)] = z;
            full[(j, i)] = z;
        }
    }
    PartitionedImpedance::from_full(&full, geom.n_active, geom.n_parasitic_per_active)
}
