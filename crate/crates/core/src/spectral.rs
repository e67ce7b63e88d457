//! FFT-based operators on a periodic grid: free propagator, gradient,
//! Laplacian and Sobolev norms.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlannerScalar};

use crate::grid::{Field, Grid};

/// Transform plans and wavenumber tables for one grid.
pub struct Spectral {
    grid: Grid,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
    /// |k|² per Fourier coefficient, row-major.
    k2: Vec<f64>,
    /// Per-axis wavenumbers with the Nyquist mode zeroed (first derivatives).
    k_deriv: Vec<Vec<f64>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: &Grid) -> Self {
        // scalar plans: identical arithmetic on every CPU and a smaller norm bias per transform
        let mut planner = FftPlannerScalar::new();
        let forward = grid.counts().iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = grid.counts().iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        let ks: Vec<Vec<f64>> = (0..grid.dim()).map(|a| grid.wavenumbers(a)).collect();
        let k2 = match grid.dim() {
            1 => ks[0].iter().map(|k| k * k).collect(),
            _ => {
                let mut out = Vec::with_capacity(grid.len());
                for kx in &ks[0] {
                    for ky in &ks[1] {
                        out.push(kx * kx + ky * ky);
                    }
                }
                out
            }
        };
        let k_deriv = ks
            .iter()
            .enumerate()
            .map(|(a, k)| {
                let mut k = k.clone();
                k[grid.nyquist(a)] = 0.0;
                k
            })
            .collect();
        Self {
            grid: grid.clone(),
            forward,
            inverse,
            k2,
            k_deriv,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn k2(&self) -> &[f64] {
        &self.k2
    }

    fn transform(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        let counts = self.grid.counts();
        match counts.len() {
            1 => plans[0].process(data),
            _ => {
                let (n0, n1) = (counts[0], counts[1]);
                // rows (axis 1) are contiguous
                plans[1].process(data);
                let mut col = vec![Complex64::new(0.0, 0.0); n0 * n1];
                for i in 0..n0 {
                    for j in 0..n1 {
                        col[j * n0 + i] = data[i * n1 + j];
                    }
                }
                plans[0].process(&mut col);
                for i in 0..n0 {
                    for j in 0..n1 {
                        data[i * n1 + j] = col[j * n0 + i];
                    }
                }
            }
        }
    }

    /// Unnormalized forward DFT in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    /// Inverse DFT in place, normalized so that `inverse(forward(u)) = u`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
        let s = 1.0 / data.len() as f64;
        for z in data.iter_mut() {
            *z *= s;
        }
    }

    /// Fourier multiplier e^{−i|k|²t} of the free flow over time `t`.
    pub fn propagator(&self, t: f64) -> Vec<Complex64> {
        self.k2.iter().map(|k2| Complex64::from_polar(1.0, -k2 * t)).collect()
    }

    /// Applies a Fourier multiplier to physical-space samples in place.
    pub fn apply_multiplier(&self, data: &mut [Complex64], mult: &[Complex64]) {
        self.forward(data);
        for (z, m) in data.iter_mut().zip(mult) {
            *z *= m;
        }
        self.inverse(data);
    }

    /// e^{itΔ} applied to samples in place.
    pub fn propagate_in_place(&self, data: &mut [Complex64], t: f64) {
        if t == 0.0 {
            return;
        }
        let m = self.propagator(t);
        self.apply_multiplier(data, &m);
    }

    pub fn laplacian(&self, data: &[Complex64]) -> Vec<Complex64> {
        let mut w = data.to_vec();
        self.forward(&mut w);
        for (z, k2) in w.iter_mut().zip(&self.k2) {
            *z *= -k2;
        }
        self.inverse(&mut w);
        w
    }

    /// Spectral gradient, one component per axis (Nyquist mode dropped).
    pub fn gradient(&self, data: &[Complex64]) -> Vec<Vec<Complex64>> {
        let mut hat = data.to_vec();
        self.forward(&mut hat);
        self.gradient_from_hat(&hat)
    }

    fn gradient_from_hat(&self, hat: &[Complex64]) -> Vec<Vec<Complex64>> {
        let counts = self.grid.counts();
        (0..self.grid.dim())
            .map(|axis| {
                let mut w = hat.to_vec();
                for (idx, z) in w.iter_mut().enumerate() {
                    let i = if self.grid.dim() == 1 {
                        idx
                    } else if axis == 0 {
                        idx / counts[1]
                    } else {
                        idx % counts[1]
                    };
                    *z *= Complex64::new(0.0, self.k_deriv[axis][i]);
                }
                self.inverse(&mut w);
                w
            })
            .collect()
    }

    /// ‖∇u‖²₂ via Parseval (|k|² weights).
    pub fn grad_norm_sq(&self, data: &[Complex64]) -> f64 {
        let mut hat = data.to_vec();
        self.forward(&mut hat);
        self.grad_norm_sq_hat(&hat)
    }

    fn grad_norm_sq_hat(&self, hat: &[Complex64]) -> f64 {
        let n = hat.len() as f64;
        let sum: f64 = hat.iter().zip(&self.k2).map(|(z, k2)| k2 * z.norm_sqr()).sum();
        sum * self.grid.cell_volume() / n
    }

    /// (‖u‖²₂ + ‖∇u‖²₂)^{1/2}.
    pub fn h1_norm(&self, data: &[Complex64]) -> f64 {
        let l2sq: f64 = data.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume();
        (l2sq + self.grad_norm_sq(data)).sqrt()
    }

    /// Zeroes modes beyond two thirds of the maximal wavenumber on each axis.
    pub fn dealias(&self, data: &mut [Complex64]) {
        self.forward(data);
        self.dealias_hat(data);
        self.inverse(data);
    }

    /// [`Spectral::dealias`] on Fourier coefficients.
    pub fn dealias_hat(&self, hat: &mut [Complex64]) {
        let counts = self.grid.counts();
        let keep = |i: usize, n: usize| {
            let m = if i <= n / 2 { i } else { n - i };
            m <= n / 3
        };
        for (idx, z) in hat.iter_mut().enumerate() {
            let ok = if counts.len() == 1 {
                keep(idx, counts[0])
            } else {
                keep(idx / counts[1], counts[0]) && keep(idx % counts[1], counts[1])
            };
            if !ok {
                *z = Complex64::new(0.0, 0.0);
            }
        }
    }
}

/// Exact free evolution u ↦ e^{itΔ}u, i.e. the Fourier multiplier e^{−i|k|²t}.
pub fn free_propagate(field: &Field, t: f64) -> Field {
    let sp = Spectral::new(&field.grid);
    let mut values = field.values.clone();
    sp.propagate_in_place(&mut values, t);
    Field {
        grid: field.grid.clone(),
        values,
        time: field.time + t,
    }
}
