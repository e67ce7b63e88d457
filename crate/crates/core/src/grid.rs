//! Periodic grids and complex fields sampled on them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NlsError, Result};

/// Periodic box `[−L/2, L/2)^d`, `d ∈ {1, 2}`, with power-of-two sample counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    lengths: Vec<f64>,
    counts: Vec<usize>,
}

impl Grid {
    pub fn new(lengths: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        if lengths.is_empty() || lengths.len() > 2 || lengths.len() != counts.len() {
            return Err(NlsError::InvalidParameter(format!(
                "grid needs 1 or 2 dimensions with matching lengths/counts, got {} and {}",
                lengths.len(),
                counts.len()
            )));
        }
        for (&l, &n) in lengths.iter().zip(&counts) {
            if !(l.is_finite() && l > 0.0) {
                return Err(NlsError::InvalidParameter(format!("box length must be positive, got {l}")));
            }
            if n < 2 || !n.is_power_of_two() {
                return Err(NlsError::InvalidParameter(format!(
                    "sample count must be a power of two ≥ 2, got {n}"
                )));
            }
        }
        Ok(Self { lengths, counts })
    }

    pub fn line(length: f64, count: usize) -> Result<Self> {
        Self::new(vec![length], vec![count])
    }

    pub fn plane(lengths: [f64; 2], counts: [usize; 2]) -> Result<Self> {
        Self::new(lengths.to_vec(), counts.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Total number of samples.
    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.counts[axis] as f64
    }

    /// Volume element h^d of the plain-sum quadrature.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    /// Sample coordinates along one axis.
    pub fn coords(&self, axis: usize) -> Vec<f64> {
        let h = self.spacing(axis);
        let x0 = -0.5 * self.lengths[axis];
        (0..self.counts[axis]).map(|i| x0 + i as f64 * h).collect()
    }

    /// Angular wavenumbers in FFT order along one axis.
    pub fn wavenumbers(&self, axis: usize) -> Vec<f64> {
        let n = self.counts[axis];
        let dk = 2.0 * std::f64::consts::PI / self.lengths[axis];
        (0..n)
            .map(|i| {
                let m = if i < n / 2 || (i == n / 2 && n == 1) {
                    i as isize
                } else {
                    i as isize - n as isize
                };
                m as f64 * dk
            })
            .collect()
    }

    /// Index of the Nyquist mode along an axis.
    pub fn nyquist(&self, axis: usize) -> usize {
        self.counts[axis] / 2
    }

    /// All sample points in row-major order, padded to two coordinates.
    pub fn points(&self) -> Vec<[f64; 2]> {
        match self.dim() {
            1 => self.coords(0).into_iter().map(|x| [x, 0.0]).collect(),
            _ => {
                let xs = self.coords(0);
                let ys = self.coords(1);
                let mut out = Vec::with_capacity(self.len());
                for &x in &xs {
                    for &y in &ys {
                        out.push([x, y]);
                    }
                }
                out
            }
        }
    }

    /// Mask of samples within `fraction` of the box edge along any axis.
    pub fn boundary_mask(&self, fraction: f64) -> Vec<bool> {
        let edge = |x: f64, l: f64| x.abs() >= 0.5 * l * (1.0 - 2.0 * fraction);
        self.points()
            .iter()
            .map(|p| (0..self.dim()).any(|a| edge(p[a], self.lengths[a])))
            .collect()
    }

    pub fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(NlsError::GridMismatch(format!(
                "{:?}/{:?} vs {:?}/{:?}",
                self.lengths, self.counts, other.lengths, other.counts
            )));
        }
        Ok(())
    }
}

/// Complex samples of u(t, ·) on a grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub values: Vec<Complex64>,
    pub time: f64,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<Complex64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(NlsError::GridMismatch(format!(
                "field has {} values, grid has {} samples",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values, time })
    }

    pub fn zeros(grid: &Grid, time: f64) -> Self {
        Self {
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            grid: grid.clone(),
            time,
        }
    }

    /// Samples `f(x)` at every grid point.
    pub fn from_fn<F: Fn([f64; 2]) -> Complex64>(grid: &Grid, time: f64, f: F) -> Self {
        Self {
            values: grid.points().into_iter().map(f).collect(),
            grid: grid.clone(),
            time,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm(&self.values)
    }

    /// Discrete L² norm (plain sum × h^d).
    pub fn l2_norm(&self) -> f64 {
        l2_norm(&self.values, self.grid.cell_volume())
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Field {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
            time: self.time,
        })
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Field {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            time: self.time,
        })
    }
}

pub fn sup_norm(values: &[Complex64]) -> f64 {
    values.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

pub fn l2_norm(values: &[Complex64], cell: f64) -> f64 {
    (values.iter().map(|z| z.norm_sqr()).sum::<f64>() * cell).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::line(10.0, 100).is_err());
        assert!(Grid::line(-1.0, 64).is_err());
        assert!(Grid::new(vec![1.0; 3], vec![8; 3]).is_err());
    }

    #[test]
    fn coordinates_and_wavenumbers() {
        let g = Grid::line(8.0, 8).unwrap();
        assert_eq!(g.coords(0), vec![-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
        let k = g.wavenumbers(0);
        let dk = 2.0 * std::f64::consts::PI / 8.0;
        assert_eq!(k[1], dk);
        assert_eq!(k[4], -4.0 * dk);
        assert_eq!(k[7], -dk);
    }

    #[test]
    fn plane_points_row_major() {
        let g = Grid::plane([4.0, 8.0], [4, 8]).unwrap();
        let p = g.points();
        assert_eq!(p.len(), 32);
        assert_eq!(p[1], [-2.0, -3.0]);
        assert_eq!(p[8], [-1.0, -4.0]);
    }
}
