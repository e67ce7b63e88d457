//! Conserved quantities, distances between fields, discrete Strichartz norms
//! and exponential-rate fits.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NlsError, Result};
use crate::grid::Field;
use crate::nonlinearity::Nonlinearity;
use crate::spectral::Spectral;

/// Per-snapshot diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub time: f64,
    pub mass: f64,
    pub energy: f64,
    /// One entry per space dimension.
    pub momentum: Vec<f64>,
    pub l2_dist: Option<f64>,
    pub h1_dist: Option<f64>,
    pub sup_norm: f64,
}

impl MetricRecord {
    pub fn is_finite(&self) -> bool {
        self.mass.is_finite()
            && self.energy.is_finite()
            && self.momentum.iter().all(|p| p.is_finite())
            && self.l2_dist.is_none_or(f64::is_finite)
            && self.h1_dist.is_none_or(f64::is_finite)
            && self.sup_norm.is_finite()
    }
}

/// M = ½‖u‖², E = ½‖∇u‖² − ∫F(|u|), P = Im∫ū∇u.
pub fn conserved(field: &Field, nl: &Nonlinearity) -> Result<MetricRecord> {
    conserved_with(&Spectral::new(&field.grid), field, nl)
}

/// [`conserved`] reusing transform plans.
pub fn conserved_with(sp: &Spectral, field: &Field, nl: &Nonlinearity) -> Result<MetricRecord> {
    field.grid.ensure_same(sp.grid())?;
    let cell = field.grid.cell_volume();
    let u = &field.values;
    let mass = 0.5 * u.iter().map(|z| z.norm_sqr()).sum::<f64>() * cell;
    let mut potential = 0.0;
    for z in u {
        potential += nl.eval_F(z.norm())?;
    }
    let energy = 0.5 * sp.grad_norm_sq(u) - potential * cell;
    let momentum = sp
        .gradient(u)
        .iter()
        .map(|g| u.iter().zip(g).map(|(a, b)| (a.conj() * b).im).sum::<f64>() * cell)
        .collect();
    Ok(MetricRecord {
        time: field.time,
        mass,
        energy,
        momentum,
        l2_dist: None,
        h1_dist: None,
        sup_norm: field.sup_norm(),
    })
}

/// Norms of a difference u − ref.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distances {
    pub l2: f64,
    pub h1: f64,
    pub sup: f64,
}

pub fn distances(u: &Field, reference: &Field) -> Result<Distances> {
    distances_with(&Spectral::new(&u.grid), u, reference)
}

pub fn distances_with(sp: &Spectral, u: &Field, reference: &Field) -> Result<Distances> {
    let diff = u.sub(reference)?;
    Ok(norms_with(sp, &diff.values))
}

/// L², H¹ and sup norms of raw samples on the spectral grid.
pub fn norms_with(sp: &Spectral, values: &[Complex64]) -> Distances {
    let cell = sp.grid().cell_volume();
    let l2sq = values.iter().map(|z| z.norm_sqr()).sum::<f64>() * cell;
    Distances {
        l2: l2sq.sqrt(),
        h1: (l2sq + sp.grad_norm_sq(values)).sqrt(),
        sup: crate::grid::sup_norm(values),
    }
}

/// Exponents (q, r) with 2/q + d/r = d/2; infinity is `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissiblePair {
    pub q: f64,
    pub r: f64,
}

/// Lower limit of q in two dimensions (the endpoint q = 2 is excluded).
pub const Q1_PLANE: f64 = 2.1;

/// The anchor (∞, 2) followed by `count − 1` pairs evenly spaced in 1/r.
pub fn admissible_pairs(d: usize, count: usize) -> Vec<AdmissiblePair> {
    let mut out = vec![AdmissiblePair {
        q: f64::INFINITY,
        r: 2.0,
    }];
    if count <= 1 || d == 0 {
        return out;
    }
    let df = d as f64;
    // θ = 1/r ranges over [θ_min, ½]; q = 2/(d(½ − θ))
    let (theta_min, steps) = match d {
        1 => (0.0, count - 1),
        2 => ((1.0 - 2.0 / Q1_PLANE) / 2.0, count),
        _ => (0.5 - 1.0 / df, count - 1),
    };
    for j in 1..count {
        let theta = 0.5 - (0.5 - theta_min) * j as f64 / steps as f64;
        let r = if theta <= 0.0 { f64::INFINITY } else { 1.0 / theta };
        let q = 2.0 / (df * (0.5 - theta));
        out.push(AdmissiblePair { q, r });
    }
    out
}

fn lr_norm(values: &[Complex64], cell: f64, r: f64) -> f64 {
    if r.is_infinite() {
        crate::grid::sup_norm(values)
    } else {
        (values.iter().map(|z| z.norm().powf(r)).sum::<f64>() * cell).powf(1.0 / r)
    }
}

/// max over the supplied pairs of the discrete L^q_t L^r_x norm (time trapezoid
/// over the snapshot times). A lower bound of the full Strichartz norm.
pub fn strichartz_norm(snapshots: &[Field], pairs: &[AdmissiblePair]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(NlsError::InsufficientData("empty admissible pair set".into()));
    }
    if snapshots.is_empty() {
        return Err(NlsError::InsufficientData("no snapshots".into()));
    }
    let mut best = 0.0f64;
    for pair in pairs {
        let spatial: Vec<f64> = snapshots
            .iter()
            .map(|f| lr_norm(&f.values, f.grid.cell_volume(), pair.r))
            .collect();
        let value = if pair.q.is_infinite() {
            spatial.iter().copied().fold(0.0, f64::max)
        } else if snapshots.len() == 1 {
            0.0
        } else {
            let mut integral = 0.0;
            for (w, f) in spatial.windows(2).zip(snapshots.windows(2)) {
                let dt = (f[1].time - f[0].time).abs();
                integral += 0.5 * dt * (w[0].powf(pair.q) + w[1].powf(pair.q));
            }
            integral.powf(1.0 / pair.q)
        };
        best = best.max(value);
    }
    Ok(best)
}

/// Per-pair discrete L^q_t L^r_x norms over the growing windows [t₀, tᵢ];
/// row i holds one value per pair.
pub fn strichartz_running(snapshots: &[Field], pairs: &[AdmissiblePair]) -> Result<Vec<Vec<f64>>> {
    if pairs.is_empty() {
        return Err(NlsError::InsufficientData("empty admissible pair set".into()));
    }
    let mut acc = vec![0.0f64; pairs.len()];
    let mut prev: Option<(f64, Vec<f64>)> = None;
    let mut out = Vec::with_capacity(snapshots.len());
    for f in snapshots {
        let spatial: Vec<f64> = pairs
            .iter()
            .map(|p| lr_norm(&f.values, f.grid.cell_volume(), p.r))
            .collect();
        let mut row = Vec::with_capacity(pairs.len());
        for (j, pair) in pairs.iter().enumerate() {
            if pair.q.is_infinite() {
                acc[j] = acc[j].max(spatial[j]);
                row.push(acc[j]);
            } else {
                if let Some((t, s)) = &prev {
                    acc[j] += 0.5 * (f.time - t).abs() * (s[j].powf(pair.q) + spatial[j].powf(pair.q));
                }
                row.push(acc[j].powf(1.0 / pair.q));
            }
        }
        out.push(row);
        prev = Some((f.time, spatial));
    }
    Ok(out)
}

/// Column label of a pair, e.g. `s_q4_rinf`.
pub fn pair_label(p: &AdmissiblePair) -> String {
    let fmt = |x: f64| if x.is_infinite() { "inf".to_string() } else { format!("{}", (x * 1e6).round() / 1e6) };
    format!("s_q{}_r{}", fmt(p.q), fmt(p.r))
}

/// Least-squares fit of ln(values) against times; `rate` is the negated slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_exponential_rate(times: &[f64], values: &[f64]) -> Result<RateFit> {
    if times.len() != values.len() || times.len() < 3 {
        return Err(NlsError::InsufficientData(format!(
            "rate fit needs at least 3 matching points, got {} times and {} values",
            times.len(),
            values.len()
        )));
    }
    if let Some(&bad) = values.iter().find(|v| !(**v > 0.0)) {
        return Err(NlsError::OutOfDomain {
            value: bad,
            min: 0.0,
            max: f64::INFINITY,
        });
    }
    let n = times.len() as f64;
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let tm = times.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let stt: f64 = times.iter().map(|t| (t - tm).powi(2)).sum();
    let sty: f64 = times.iter().zip(&ys).map(|(t, y)| (t - tm) * (y - ym)).sum();
    if stt == 0.0 {
        return Err(NlsError::InsufficientData("rate fit needs distinct times".into()));
    }
    let slope = sty / stt;
    let intercept = ym - slope * tm;
    let ss_tot: f64 = ys.iter().map(|y| (y - ym).powi(2)).sum();
    let ss_res: f64 = times
        .iter()
        .zip(&ys)
        .map(|(t, y)| (y - intercept - slope * t).powi(2))
        .sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(RateFit {
        rate: -slope,
        intercept,
        r_squared,
    })
}

/// Limits of the exponential-decay window of a distance series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayWindow {
    /// Skip values above this fraction of the peak (post-interaction transient).
    pub below_peak: f64,
    /// Skip values under this absolute level (roundoff).
    pub floor: f64,
    /// Skip times within this distance of the last time (start of a backward run).
    pub end_margin: f64,
}

impl Default for DecayWindow {
    fn default() -> Self {
        Self {
            below_peak: 1e-2,
            floor: 1e-12,
            end_margin: 0.5,
        }
    }
}

/// Decay fit with the points actually used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowedFit {
    pub fit: RateFit,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// Exponential fit of the decaying part of a series after its peak.
pub fn fit_decay_window(times: &[f64], values: &[f64], window: DecayWindow) -> Result<WindowedFit> {
    if times.len() != values.len() || times.is_empty() {
        return Err(NlsError::InsufficientData("empty or mismatched series".into()));
    }
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let t_last = times[order[order.len() - 1]];
    let (peak_at, peak) = order
        .iter()
        .map(|&i| (times[i], values[i]))
        .fold((f64::NAN, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    let (ts, vs): (Vec<f64>, Vec<f64>) = order
        .iter()
        .map(|&i| (times[i], values[i]))
        .filter(|&(t, v)| {
            t >= peak_at && t <= t_last - window.end_margin && v <= window.below_peak * peak && v >= window.floor
        })
        .unzip();
    let fit = fit_exponential_rate(&ts, &vs)?;
    Ok(WindowedFit { fit, times: ts, values: vs })
}

/// Action S = E + (ω₀ + |v₀|²/4)M + v₀·P used as a scalar diagnostic.
pub fn action(record: &MetricRecord, omega0: f64, v0: &[f64]) -> f64 {
    let v2: f64 = v0.iter().map(|v| v * v).sum();
    let vp: f64 = v0.iter().zip(&record.momentum).map(|(v, p)| v * p).sum();
    record.energy + (omega0 + 0.25 * v2) * record.mass + vp
}
