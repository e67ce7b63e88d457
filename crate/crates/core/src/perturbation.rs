//! Perturbation form η = u − W around an analytic background W = Σⱼ Wⱼ of exact
//! solutions, the source term H = f(W) − Σⱼ f(Wⱼ), and the backward Duhamel
//! (Picard) iteration for η.
//!
//! Only η is ever transformed; W and its derivatives are evaluated pointwise, so
//! kink backgrounds with nonzero limits live happily on periodic grids.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{NlsError, Result};
use crate::evolution::{check_blowup, EvolutionConfig};
use crate::grid::{l2_norm, Field, Grid};
use crate::metrics::fit_exponential_rate;
use crate::nonlinearity::Nonlinearity;
use crate::spectral::Spectral;
use crate::trains::{TrainSpec, WaveSpec};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Analytic background built from the members of a finite train.
#[derive(Debug, Clone)]
pub struct BackgroundW {
    train: TrainSpec,
    grid: Grid,
    points: Vec<[f64; 2]>,
}

/// W and H sampled on the grid at one time.
#[derive(Debug, Clone)]
pub struct BackgroundSample {
    pub time: f64,
    pub w: Vec<Complex64>,
    pub h: Vec<Complex64>,
}

impl BackgroundW {
    pub fn new(train: TrainSpec, grid: &Grid) -> Result<Self> {
        if train.is_infinite() {
            return Err(NlsError::InfiniteTrain);
        }
        if train.members().any(|w| w.dim() != grid.dim()) {
            return Err(NlsError::GridMismatch("background and grid dimensions differ".into()));
        }
        Ok(Self {
            points: grid.points(),
            grid: grid.clone(),
            train,
        })
    }

    pub fn train(&self) -> &TrainSpec {
        &self.train
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn members(&self) -> Vec<&WaveSpec> {
        self.train.members().collect()
    }

    /// W(t) on the grid.
    pub fn field(&self, t: f64) -> Result<Field> {
        let members = self.members();
        let values = self
            .points
            .par_iter()
            .map(|&p| members.iter().map(|w| w.value(t, p)).sum())
            .collect();
        Field::new(self.grid.clone(), values, t)
    }

    /// W(t) and H(t) on the grid. H = Σⱼ (g(|W|²) − g(|Wⱼ|²)) Wⱼ, with each
    /// increment evaluated from the sum of the other components.
    pub fn sample(&self, t: f64, nl: &Nonlinearity) -> Result<BackgroundSample> {
        let members = self.members();
        let pairs: Result<Vec<(Complex64, Complex64)>> = self
            .points
            .par_iter()
            .map(|&p| {
                let vals: Vec<Complex64> = members.iter().map(|w| w.value(t, p)).collect();
                source_at(&vals, nl)
            })
            .collect();
        let (w, h) = pairs?.into_iter().unzip();
        Ok(BackgroundSample { time: t, w, h })
    }

    /// iW_t + ΔW + Σⱼ f(Wⱼ): zero up to the profile residuals.
    pub fn analytic_residual(&self, t: f64, nl: &Nonlinearity) -> Result<Vec<Complex64>> {
        let members = self.members();
        self.points
            .par_iter()
            .map(|&p| {
                let mut acc = Complex64::new(0.0, 0.0);
                for w in &members {
                    let e = w.eval(t, p);
                    acc += I * e.dt + e.laplacian + nl.eval_f(e.value)?;
                }
                Ok(acc)
            })
            .collect()
    }
}

fn source_at(vals: &[Complex64], nl: &Nonlinearity) -> Result<(Complex64, Complex64)> {
    let w: Complex64 = vals.iter().sum();
    let mut h = Complex64::new(0.0, 0.0);
    if vals.len() > 1 {
        for (j, wj) in vals.iter().enumerate() {
            let rest: Complex64 = vals.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| v).sum();
            let ds = 2.0 * (wj.conj() * rest).re + rest.norm_sqr();
            h += nl.g_increment(wj.norm_sqr(), ds)? * wj;
        }
    }
    Ok((w, h))
}

/// F(η) = f(W + η) − Σⱼ f(Wⱼ) = g(|W+η|²)η + (g(|W+η|²) − g(|W|²))W + H.
fn forcing(w: Complex64, h: Complex64, eta: Complex64, nl: &Nonlinearity) -> Result<Complex64> {
    let s = w.norm_sqr();
    let ds = 2.0 * (w.conj() * eta).re + eta.norm_sqr();
    Ok(nl.g((s + ds).max(0.0))? * eta + nl.g_increment(s, ds)? * w + h)
}

fn forcing_all(bg: &BackgroundSample, eta: &[Complex64], nl: &Nonlinearity, out: &mut [Complex64]) -> Result<()> {
    out.par_iter_mut()
        .zip(eta.par_iter())
        .zip(bg.w.par_iter().zip(bg.h.par_iter()))
        .try_for_each(|((o, e), (w, h))| {
            *o = forcing(*w, *h, *e, nl)?;
            Ok(())
        })
}

/// H(t) = f(Σⱼ Wⱼ) − Σⱼ f(Wⱼ) on the grid.
pub fn source_h(w: &BackgroundW, t: f64, nl: &Nonlinearity) -> Result<Field> {
    let s = w.sample(t, nl)?;
    Field::new(w.grid.clone(), s.h, t)
}

/// Norm series of an η run.
#[derive(Debug, Clone)]
pub struct PerturbationTrajectory {
    pub times: Vec<f64>,
    pub l2: Vec<f64>,
    pub h1: Vec<f64>,
    /// ‖∇η‖₂.
    pub grad: Vec<f64>,
    pub sup: Vec<f64>,
    /// Boundary amplitude of η over its peak.
    pub boundary_ratio: Vec<f64>,
    pub snapshots: Vec<Field>,
    pub final_field: Field,
    pub steps: usize,
}

/// Outer fraction of the box watched for contamination.
pub const BOUNDARY_FRACTION: f64 = 0.05;
/// Largest tolerated boundary amplitude of η relative to its peak.
pub const BOUNDARY_TOLERANCE: f64 = 1e-6;
/// Peaks below this are too small for the boundary ratio to mean anything.
pub const BOUNDARY_FLOOR: f64 = 1e-14;
/// Edge amplitudes at this level are accumulated transform roundoff, not leakage.
pub const BOUNDARY_NOISE: f64 = 1e-13;

struct EtaStepper<'a> {
    w: &'a BackgroundW,
    nl: &'a Nonlinearity,
    sp: &'a Spectral,
    half: Vec<Complex64>,
    dt: f64,
    start: BackgroundSample,
    k: Vec<Complex64>,
    mid: Vec<Complex64>,
}

impl<'a> EtaStepper<'a> {
    fn new(w: &'a BackgroundW, nl: &'a Nonlinearity, sp: &'a Spectral, dt: f64, t: f64) -> Result<Self> {
        let n = w.grid.len();
        Ok(Self {
            half: sp.propagator(0.5 * dt),
            start: w.sample(t, nl)?,
            w,
            nl,
            sp,
            dt,
            k: vec![Complex64::new(0.0, 0.0); n],
            mid: vec![Complex64::new(0.0, 0.0); n],
        })
    }

    /// Half free flow, midpoint rule for ∂ₜη = iF(η), half free flow.
    fn step(&mut self, eta: &mut [Complex64], t: f64) -> Result<()> {
        let dt = self.dt;
        self.sp.apply_multiplier(eta, &self.half);
        if (self.start.time - t).abs() > 1e-12 * dt.abs().max(1e-300) {
            self.start = self.w.sample(t, self.nl)?;
        }
        forcing_all(&self.start, eta, self.nl, &mut self.k)?;
        for ((m, e), k) in self.mid.iter_mut().zip(eta.iter()).zip(&self.k) {
            *m = e + 0.5 * dt * I * k;
        }
        let midpoint = self.w.sample(t + 0.5 * dt, self.nl)?;
        forcing_all(&midpoint, &self.mid, self.nl, &mut self.k)?;
        for (e, k) in eta.iter_mut().zip(&self.k) {
            *e += dt * I * k;
        }
        self.start = self.w.sample(t + dt, self.nl)?;
        self.sp.apply_multiplier(eta, &self.half);
        Ok(())
    }
}

/// Split-step evolution of η with W evaluated analytically at the substep times.
pub fn evolve_perturbation(
    eta0: &Field,
    w: &BackgroundW,
    nl: &Nonlinearity,
    cfg: &EvolutionConfig,
) -> Result<PerturbationTrajectory> {
    w.grid.ensure_same(&eta0.grid)?;
    let (whole, rem) = cfg.schedule(eta0.time)?;
    let sp = Spectral::new(&w.grid);
    let mask = w.grid.boundary_mask(BOUNDARY_FRACTION);
    let t0 = eta0.time;
    let mut eta = eta0.clone();
    let mut out = PerturbationTrajectory {
        times: Vec::new(),
        l2: Vec::new(),
        h1: Vec::new(),
        grad: Vec::new(),
        sup: Vec::new(),
        boundary_ratio: Vec::new(),
        snapshots: Vec::new(),
        final_field: eta0.clone(),
        steps: 0,
    };
    let cell = w.grid.cell_volume();
    let observe = |eta: &Field, out: &mut PerturbationTrajectory| -> Result<()> {
        let l2 = l2_norm(&eta.values, cell);
        let g2 = sp.grad_norm_sq(&eta.values);
        let peak = eta.sup_norm();
        let edge = eta
            .values
            .iter()
            .zip(&mask)
            .filter(|(_, m)| **m)
            .fold(0.0f64, |a, (z, _)| a.max(z.norm()));
        let ratio = if peak > BOUNDARY_FLOOR { edge / peak } else { 0.0 };
        if ratio > BOUNDARY_TOLERANCE && edge > BOUNDARY_NOISE {
            return Err(NlsError::BoundaryContamination { time: eta.time, ratio });
        }
        out.times.push(eta.time);
        out.l2.push(l2);
        out.h1.push((l2 * l2 + g2).sqrt());
        out.grad.push(g2.sqrt());
        out.sup.push(peak);
        out.boundary_ratio.push(ratio);
        if cfg.observers.keep_fields {
            out.snapshots.push(eta.clone());
        }
        Ok(())
    };
    observe(&eta, &mut out)?;
    let mut stepper = EtaStepper::new(w, nl, &sp, cfg.dt, t0)?;
    for k in 1..=whole {
        let t = t0 + (k - 1) as f64 * cfg.dt;
        stepper.step(&mut eta.values, t)?;
        eta.time = if k == whole && rem == 0.0 { cfg.t_end } else { t0 + k as f64 * cfg.dt };
        check_blowup(&eta.values, t)?;
        out.steps += 1;
        if k % cfg.snapshot_stride == 0 || (k == whole && rem == 0.0) {
            observe(&eta, &mut out)?;
        }
    }
    if rem != 0.0 {
        let t = eta.time;
        let mut tail = EtaStepper::new(w, nl, &sp, rem, t)?;
        tail.step(&mut eta.values, t)?;
        eta.time = cfg.t_end;
        check_blowup(&eta.values, t)?;
        out.steps += 1;
        observe(&eta, &mut out)?;
    }
    out.final_field = eta;
    Ok(out)
}

/// Outcome of the Picard iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PicardStatus {
    Contracting,
    /// ρ > 1 on two consecutive iterates (or non-finite iterates).
    NoContraction,
}

/// Per-iterate diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct PicardIterate {
    pub k: usize,
    /// ρ_{k−1} = d_k / d_{k−1}; undefined for k = 1 or below the roundoff floor.
    pub ratio: Option<f64>,
    /// d_k = sup_τ ‖η⁽ᵏ⁾ − η⁽ᵏ⁻¹⁾‖₂.
    pub diff_sup_l2: f64,
    pub sup_l2: f64,
    pub sup_h1: f64,
}

#[derive(Debug, Clone)]
pub struct PicardResult {
    pub iterates: Vec<PicardIterate>,
    /// ρ_k for k = 1 … (computed above the roundoff floor).
    pub contraction_ratios: Vec<f64>,
    pub status: PicardStatus,
    /// Residual ‖i∂ₜu + Δu + f(u)‖₂ of u = W + η⁽ᴷ⁾ at interior times.
    pub residual_times: Vec<f64>,
    pub residual: Vec<f64>,
    /// ‖H(τ)‖₂ on the time grid (increasing τ).
    pub source_times: Vec<f64>,
    pub source_l2: Vec<f64>,
    /// Estimate of ∫_{T_max}^∞ ‖H‖₂ from the decay of ‖H‖₂ near T_max.
    pub tail_estimate: f64,
    /// Snapshots of the last iterate (increasing time), every `stride` levels.
    pub snapshots: Vec<Field>,
}

/// Refinement of the τ-grid next to t₀, where the components overlap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct Grading {
    /// First step at t₀.
    pub h_min: f64,
    /// Growth rate λ: h ← h(1 + λh), i.e. h ≈ h_min e^{λ(τ−t₀)} until it reaches dt.
    pub rate: f64,
}

/// Options of [`picard_iterate`] beyond the window and iterate count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    /// Keep a snapshot of the last iterate every this many time levels (0 = none).
    pub snapshot_stride: usize,
    /// Differences below this fraction of d₁ are treated as converged.
    pub roundoff_floor: f64,
    /// Uniform grid of step dt when absent.
    pub grading: Option<Grading>,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            snapshot_stride: 0,
            roundoff_floor: 1e-12,
            grading: None,
        }
    }
}

/// Increasing quadrature nodes from t₀ to T_max.
pub fn time_levels(t0: f64, t_max: f64, dt: f64, grading: Option<Grading>) -> Result<Vec<f64>> {
    if !(t_max > t0) {
        return Err(NlsError::InvalidParameter(format!("T_max = {t_max} must exceed t0 = {t0}")));
    }
    if !(dt > 0.0) {
        return Err(NlsError::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let Some(g) = grading else {
        let levels = ((t_max - t0) / dt).round().max(1.0) as usize;
        let h = (t_max - t0) / levels as f64;
        return Ok((0..=levels).map(|m| if m == levels { t_max } else { t0 + m as f64 * h }).collect());
    };
    if !(g.h_min > 0.0 && g.h_min <= dt && g.rate >= 0.0) {
        return Err(NlsError::InvalidParameter(format!(
            "grading needs 0 < h_min ≤ dt and rate ≥ 0, got {g:?}"
        )));
    }
    let mut out = vec![t0];
    let mut t = t0;
    let mut h = g.h_min;
    while t < t_max {
        let mut step = h.min(t_max - t);
        if t_max - (t + step) < 0.5 * step {
            step = t_max - t;
        }
        t = if step == t_max - t { t_max } else { t + step };
        out.push(t);
        h = (h * (1.0 + g.rate * h)).min(dt);
    }
    Ok(out)
}

/// Weights of the derivative at `xc` of the interpolant through `xs`.
fn derivative_weights(xs: &[f64], xc: f64) -> Vec<f64> {
    (0..xs.len())
        .map(|j| {
            let den: f64 = (0..xs.len()).filter(|&l| l != j).map(|l| xs[j] - xs[l]).product();
            let num: f64 = (0..xs.len())
                .filter(|&k| k != j)
                .map(|k| {
                    (0..xs.len())
                        .filter(|&l| l != j && l != k)
                        .map(|l| xc - xs[l])
                        .product::<f64>()
                })
                .sum();
            num / den
        })
        .collect()
}

/// η⁽ᵏ⁺¹⁾(t) = −i∫ₜ^{T_max} e^{i(t−τ)Δ} F(η⁽ᵏ⁾)(τ) dτ with η⁽⁰⁾ = 0, trapezoid in τ.
///
/// All iterates are advanced together in one backward sweep over the time grid,
/// so memory stays at a few fields per iterate.
#[allow(clippy::too_many_arguments)]
pub fn picard_iterate(
    w: &BackgroundW,
    nl: &Nonlinearity,
    t0: f64,
    t_max: f64,
    n_iter: usize,
    grid: &Grid,
    dt: f64,
    opts: PicardOptions,
) -> Result<PicardResult> {
    w.grid.ensure_same(grid)?;
    if n_iter == 0 {
        return Err(NlsError::InvalidParameter("need n_iter ≥ 1".into()));
    }
    let taus = time_levels(t0, t_max, dt, opts.grading)?;
    let levels = taus.len() - 1;
    let n = grid.len();
    let sp = Spectral::new(grid);
    let zero = Complex64::new(0.0, 0.0);
    let norm_scale = grid.cell_volume() / n as f64;
    let k2 = sp.k2().to_vec();

    // Fourier coefficients of η⁽ᵏ⁾ at the current level (k = 1..K) and F⁽ᵏ⁻¹⁾ at the previous one.
    let mut eta_hat = vec![vec![zero; n]; n_iter];
    let mut f_prev = vec![vec![zero; n]; n_iter];
    let mut f_cur = vec![vec![zero; n]; n_iter];
    let mut eta_phys = vec![vec![zero; n]; n_iter + 1];
    let mut diff_sup = vec![0.0f64; n_iter];
    let mut sup_l2 = vec![0.0f64; n_iter];
    let mut sup_h1 = vec![0.0f64; n_iter];
    let mut source_l2 = vec![0.0f64; levels + 1];

    // residual ring, earliest time first: (τ, ζ̂ = e^{−iτΔ}η̂, pulled-back forcing)
    let mut ring: std::collections::VecDeque<(f64, Vec<Complex64>, Vec<Complex64>)> = Default::default();
    let mut residual_pts: Vec<(f64, f64)> = Vec::new();
    let mut snapshots = Vec::new();
    let mut buf = vec![zero; n];
    let mut back = Vec::new();
    let mut back_h = f64::NAN;

    for m in (0..=levels).rev() {
        let t = taus[m];
        let h = if m < levels { taus[m + 1] - t } else { 0.0 };
        if m < levels && h != back_h {
            back = sp.propagator(-h);
            back_h = h;
        }
        let bg = w.sample(t, nl)?;
        source_l2[m] = l2_norm(&bg.h, grid.cell_volume());
        // η⁽⁰⁾ = 0
        for k in 1..=n_iter {
            // F⁽ᵏ⁻¹⁾(τ_m) from η⁽ᵏ⁻¹⁾(τ_m), already advanced for k − 1
            forcing_all(&bg, &eta_phys[k - 1], nl, &mut buf)?;
            f_cur[k - 1].copy_from_slice(&buf);
            sp.forward(&mut f_cur[k - 1]);
            let e = &mut eta_hat[k - 1];
            if m < levels {
                for ((z, p), (fp, fc)) in e.iter_mut().zip(&back).zip(f_prev[k - 1].iter().zip(&f_cur[k - 1])) {
                    *z = p * (*z - I * (0.5 * h) * fp) - I * (0.5 * h) * fc;
                }
            }
            let mut phys = e.clone();
            sp.inverse(&mut phys);
            let l2sq: f64 = e.iter().map(|z| z.norm_sqr()).sum::<f64>() * norm_scale;
            let g2: f64 = e.iter().zip(&k2).map(|(z, k)| k * z.norm_sqr()).sum::<f64>() * norm_scale;
            sup_l2[k - 1] = sup_l2[k - 1].max(l2sq.sqrt());
            sup_h1[k - 1] = sup_h1[k - 1].max((l2sq + g2).sqrt());
            let d = if k == 1 {
                l2sq.sqrt()
            } else {
                let diff: Vec<Complex64> = phys.iter().zip(&eta_phys[k - 1]).map(|(a, b)| a - b).collect();
                l2_norm(&diff, grid.cell_volume())
            };
            diff_sup[k - 1] = diff_sup[k - 1].max(d);
            eta_phys[k] = phys;
        }
        std::mem::swap(&mut f_prev, &mut f_cur);
        let last = &eta_phys[n_iter];
        if !last.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            diff_sup[n_iter - 1] = f64::INFINITY;
            break;
        }

        // residual bookkeeping on the last iterate
        forcing_all(&bg, last, nl, &mut buf)?;
        let a = w.analytic_residual(t, nl)?;
        for (b, a) in buf.iter_mut().zip(&a) {
            *b += a;
        }
        let pull = sp.propagator(-t);
        let mut zeta = last.clone();
        sp.forward(&mut zeta);
        let mut rhs = buf.clone();
        sp.forward(&mut rhs);
        for ((z, r), p) in zeta.iter_mut().zip(rhs.iter_mut()).zip(&pull) {
            *z *= p;
            *r *= p;
        }
        ring.push_front((t, zeta, rhs));
        if ring.len() > 5 {
            ring.pop_back();
        }
        if ring.len() == 5 {
            let xs: Vec<f64> = ring.iter().map(|r| r.0).collect();
            let wts = derivative_weights(&xs, xs[2]);
            let rhs_c = &ring[2].2;
            let mut sq = 0.0;
            for i in 0..n {
                let dz: Complex64 = (0..5).map(|j| wts[j] * ring[j].1[i]).sum();
                sq += (I * dz + rhs_c[i]).norm_sqr();
            }
            residual_pts.push((xs[2], (sq * norm_scale).sqrt()));
        }
        if opts.snapshot_stride > 0 && m % opts.snapshot_stride == 0 {
            snapshots.push(Field::new(grid.clone(), last.clone(), t)?);
        }
    }
    snapshots.reverse();
    residual_pts.reverse();

    let floor = opts.roundoff_floor * diff_sup[0];
    let mut iterates = Vec::with_capacity(n_iter);
    let mut ratios = Vec::new();
    let mut status = PicardStatus::Contracting;
    let mut above_one = 0;
    for k in 1..=n_iter {
        let ratio = (k >= 2 && diff_sup[k - 2] > floor && diff_sup[k - 1] > floor)
            .then(|| diff_sup[k - 1] / diff_sup[k - 2]);
        if !diff_sup[k - 1].is_finite() {
            status = PicardStatus::NoContraction;
        }
        if let Some(r) = ratio {
            ratios.push(r);
            if !(r <= 1.0) {
                above_one += 1;
                if above_one >= 2 {
                    status = PicardStatus::NoContraction;
                }
            } else {
                above_one = 0;
            }
        }
        iterates.push(PicardIterate {
            k,
            ratio,
            diff_sup_l2: diff_sup[k - 1],
            sup_l2: sup_l2[k - 1],
            sup_h1: sup_h1[k - 1],
        });
    }

    Ok(PicardResult {
        iterates,
        contraction_ratios: ratios,
        status,
        residual_times: residual_pts.iter().map(|p| p.0).collect(),
        residual: residual_pts.iter().map(|p| p.1).collect(),
        tail_estimate: tail_estimate(&taus, &source_l2),
        source_times: taus,
        source_l2,
        snapshots,
    })
}

/// ‖H(T)‖/rate from an exponential fit over the last quarter of the window.
fn tail_estimate(times: &[f64], values: &[f64]) -> f64 {
    let start = times.len() - (times.len() / 4).max(3).min(times.len());
    let (t, v): (Vec<f64>, Vec<f64>) = times[start..]
        .iter()
        .zip(&values[start..])
        .filter(|(_, v)| **v > 0.0)
        .map(|(t, v)| (*t, *v))
        .unzip();
    let last = *values.last().unwrap_or(&0.0);
    if last == 0.0 {
        return 0.0;
    }
    match fit_exponential_rate(&t, &v) {
        Ok(fit) if fit.rate > 0.0 => last / fit.rate,
        _ => f64::INFINITY,
    }
}

/// Time derivative of ζ at snapshot `i` (4th order inside, 2nd order next to the ends).
fn time_derivative(zeta: &[Vec<Complex64>], i: usize, h: f64, out: &mut [Complex64]) {
    let n = zeta.len();
    if i >= 2 && i + 2 < n {
        for (j, o) in out.iter_mut().enumerate() {
            *o = (zeta[i - 2][j] - 8.0 * zeta[i - 1][j] + 8.0 * zeta[i + 1][j] - zeta[i + 2][j]) / (12.0 * h);
        }
    } else {
        for (j, o) in out.iter_mut().enumerate() {
            *o = (zeta[i + 1][j] - zeta[i - 1][j]) / (2.0 * h);
        }
    }
}

fn uniform_spacing(snapshots: &[Field]) -> Result<f64> {
    if snapshots.len() < 3 {
        return Err(NlsError::InsufficientData(format!(
            "residual needs at least 3 snapshots, got {}",
            snapshots.len()
        )));
    }
    let h = snapshots[1].time - snapshots[0].time;
    for s in snapshots.windows(2) {
        s[0].grid.ensure_same(&s[1].grid)?;
        if ((s[1].time - s[0].time) - h).abs() > 1e-9 * h.abs() || h == 0.0 {
            return Err(NlsError::InvalidParameter("residual needs uniformly spaced snapshots".into()));
        }
    }
    Ok(h)
}

/// ‖i∂ₜu + Δu + f(u)‖₂ at every interior snapshot. ∂ₜ acts on the
/// interaction-picture field e^{−itΔ}u, so the linear part is exact;
/// `nl = None` drops the nonlinearity.
pub fn nls_residual(snapshots: &[Field], nl: Option<&Nonlinearity>) -> Result<Vec<(f64, f64)>> {
    residual_with(snapshots, |s, _| match nl {
        Some(nl) => s.values.iter().map(|z| nl.eval_f(*z)).collect(),
        None => Ok(vec![Complex64::new(0.0, 0.0); s.values.len()]),
    })
}

/// Residual of u = W + η from η snapshots, with W_t and ΔW taken analytically.
pub fn perturbation_residual(snapshots: &[Field], w: &BackgroundW, nl: &Nonlinearity) -> Result<Vec<(f64, f64)>> {
    residual_with(snapshots, |s, _| {
        let bg = w.sample(s.time, nl)?;
        let mut f = vec![Complex64::new(0.0, 0.0); s.values.len()];
        forcing_all(&bg, &s.values, nl, &mut f)?;
        let a = w.analytic_residual(s.time, nl)?;
        Ok(f.iter().zip(&a).map(|(x, y)| x + y).collect())
    })
}

/// Shared driver: `rhs` returns everything but i∂ₜ + Δ of the transformed unknown.
fn residual_with<R>(snapshots: &[Field], mut rhs: R) -> Result<Vec<(f64, f64)>>
where
    R: FnMut(&Field, usize) -> Result<Vec<Complex64>>,
{
    let h = uniform_spacing(snapshots)?;
    let grid = &snapshots[0].grid;
    let sp = Spectral::new(grid);
    let zeta: Vec<Vec<Complex64>> = snapshots
        .iter()
        .map(|s| {
            let mut z = s.values.clone();
            sp.forward(&mut z);
            for (z, p) in z.iter_mut().zip(sp.propagator(-s.time)) {
                *z *= p;
            }
            z
        })
        .collect();
    let scale = grid.cell_volume() / grid.len() as f64;
    let mut dz = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut out = Vec::with_capacity(snapshots.len() - 2);
    for i in 1..snapshots.len() - 1 {
        time_derivative(&zeta, i, h, &mut dz);
        let mut r = rhs(&snapshots[i], i)?;
        sp.forward(&mut r);
        let pull = sp.propagator(-snapshots[i].time);
        let sq: f64 = dz
            .iter()
            .zip(&r)
            .zip(&pull)
            .map(|((d, r), p)| (I * d + r * p).norm_sqr())
            .sum();
        out.push((snapshots[i].time, (sq * scale).sqrt()));
    }
    Ok(out)
}
