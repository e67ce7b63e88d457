//! Strang split-step solver: half free flow, exact nonlinear phase, half free flow.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NlsError, Result};
use crate::grid::{Field, Grid};
use crate::metrics::{conserved_with, norms_with, MetricRecord};
use crate::nonlinearity::Nonlinearity;
use crate::spectral::Spectral;
use crate::trains::{sum_profile, TrainSpec};

/// Sup-norm above which a run is declared blown up.
pub const BLOWUP_THRESHOLD: f64 = 1e6;
/// Steps between blowup checks when no snapshot is due.
const BLOWUP_CHECK_STRIDE: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    /// Signed step; negative integrates backward.
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub dealias: bool,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    #[serde(default)]
    pub observers: Observers,
}

fn default_stride() -> usize {
    1
}

/// What is recorded at each snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observers {
    /// Mass, energy, momentum and sup norm.
    #[serde(default = "yes")]
    pub conserved: bool,
    /// Keep the snapshot fields in memory.
    #[serde(default = "yes")]
    pub keep_fields: bool,
}

fn yes() -> bool {
    true
}

impl Default for Observers {
    fn default() -> Self {
        Self {
            conserved: true,
            keep_fields: true,
        }
    }
}

impl EvolutionConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            dealias: false,
            snapshot_stride: 1,
            observers: Observers::default(),
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.snapshot_stride = stride;
        self
    }

    pub fn with_observers(mut self, observers: Observers) -> Self {
        self.observers = observers;
        self
    }

    /// Whole steps and the fractional remainder to reach `t_end` from `t_start`.
    pub fn schedule(&self, t_start: f64) -> Result<(usize, f64)> {
        if !(self.dt.is_finite() && self.dt != 0.0) {
            return Err(NlsError::InvalidParameter(format!("dt must be finite and nonzero, got {}", self.dt)));
        }
        if self.snapshot_stride == 0 {
            return Err(NlsError::InvalidParameter("snapshot_stride must be positive".into()));
        }
        let steps = (self.t_end - t_start) / self.dt;
        if !(steps > 0.0) {
            return Err(NlsError::InvalidParameter(format!(
                "cannot reach t_end = {} from {} with dt = {}",
                self.t_end, t_start, self.dt
            )));
        }
        let mut whole = (steps + 1e-9).floor() as usize;
        let mut rem = (self.t_end - t_start) - whole as f64 * self.dt;
        if rem.abs() <= 1e-12 * self.dt.abs() {
            rem = 0.0;
        }
        if whole == 0 && rem == 0.0 {
            whole = 1;
        }
        Ok((whole, rem))
    }
}

/// Snapshots and per-snapshot metrics of one run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: Grid,
    pub times: Vec<f64>,
    pub snapshots: Vec<Field>,
    pub records: Vec<MetricRecord>,
    pub final_field: Field,
    pub steps: usize,
    /// Largest nonlinear phase |g(|u|²)dt| met in a step.
    pub max_phase: f64,
}

impl Trajectory {
    /// Whether the per-step nonlinear phase stayed below π.
    pub fn phase_resolved(&self) -> bool {
        self.max_phase < std::f64::consts::PI
    }
}

/// Strang stepper holding the field in the interaction picture.
///
/// The state is v̂ = e^{i|k|²s}û, with s the accumulated free-flow time, so each
/// half free flow only advances s and the multiplier e^{−i|k|²s} is rebuilt from
/// the exact angle at every use. Reusing one rounded multiplier would instead bias
/// the discrete mass by up to one ulp per step.
pub struct StrangStepper<'a> {
    sp: &'a Spectral,
    nl: &'a Nonlinearity,
    hat: Vec<Complex64>,
    /// Free-flow time as a whole number of half steps plus a remainder.
    halves: u64,
    half: f64,
    extra: f64,
    dealias: bool,
    max_phase: f64,
    work: Vec<Complex64>,
}

impl<'a> StrangStepper<'a> {
    pub fn new(sp: &'a Spectral, nl: &'a Nonlinearity, dt: f64, dealias: bool, u: &[Complex64]) -> Self {
        let mut hat = u.to_vec();
        sp.forward(&mut hat);
        Self {
            sp,
            nl,
            hat,
            halves: 0,
            half: 0.5 * dt,
            extra: 0.0,
            dealias,
            max_phase: 0.0,
            work: vec![Complex64::new(0.0, 0.0); u.len()],
        }
    }

    pub fn max_phase(&self) -> f64 {
        self.max_phase
    }

    fn clock(&self) -> f64 {
        self.halves as f64 * self.half + self.extra
    }

    /// Physical samples at the current clock.
    pub fn values(&self) -> Vec<Complex64> {
        let mut u = self.hat.clone();
        rotate(&mut u, self.sp.k2(), -self.clock());
        self.sp.inverse(&mut u);
        u
    }

    /// One step of the configured size.
    pub fn step(&mut self) -> Result<()> {
        self.halves += 1;
        self.kick(2.0 * self.half)?;
        self.halves += 1;
        Ok(())
    }

    /// One step of arbitrary size `h` (used for the fractional last step).
    pub fn step_by(&mut self, h: f64) -> Result<()> {
        self.extra += 0.5 * h;
        self.kick(h)?;
        self.extra += 0.5 * h;
        Ok(())
    }

    /// Exact nonlinear phase rotation over `h` at the current clock.
    fn kick(&mut self, h: f64) -> Result<()> {
        let s = self.clock();
        let k2 = self.sp.k2();
        self.work.copy_from_slice(&self.hat);
        rotate(&mut self.work, k2, -s);
        self.sp.inverse(&mut self.work);
        for z in self.work.iter_mut() {
            let phase = self.nl.g(z.norm_sqr())? * h;
            self.max_phase = self.max_phase.max(phase.abs());
            *z *= Complex64::from_polar(1.0, phase);
        }
        self.sp.forward(&mut self.work);
        rotate(&mut self.work, k2, s);
        if self.dealias {
            self.sp.dealias_hat(&mut self.work);
        }
        std::mem::swap(&mut self.hat, &mut self.work);
        Ok(())
    }
}

/// ẑ ↦ e^{i|k|²s} ẑ.
fn rotate(hat: &mut [Complex64], k2: &[f64], s: f64) {
    if s == 0.0 {
        return;
    }
    for (z, k) in hat.iter_mut().zip(k2) {
        *z *= Complex64::from_polar(1.0, k * s);
    }
}

/// Single Strang step of size `dt`.
pub fn step_strang(field: &Field, dt: f64, nl: &Nonlinearity) -> Result<Field> {
    let sp = Spectral::new(&field.grid);
    let mut stepper = StrangStepper::new(&sp, nl, dt, false, &field.values);
    stepper.step()?;
    let out = Field {
        grid: field.grid.clone(),
        values: stepper.values(),
        time: field.time + dt,
    };
    check_blowup(&out.values, field.time)?;
    Ok(out)
}

pub(crate) fn check_blowup(u: &[Complex64], last_good: f64) -> Result<()> {
    let bad = u
        .iter()
        .any(|z| !(z.re.is_finite() && z.im.is_finite()) || z.norm() > BLOWUP_THRESHOLD);
    if bad {
        return Err(NlsError::NumericalBlowup { time: last_good });
    }
    Ok(())
}

/// Evolves to `cfg.t_end`, snapshotting every `snapshot_stride` steps and at the end.
pub fn evolve(field: &Field, nl: &Nonlinearity, cfg: &EvolutionConfig) -> Result<Trajectory> {
    evolve_observed(field, nl, cfg, |_| Ok(None))
}

/// [`evolve`] with a per-snapshot reference field for distance records.
pub fn evolve_observed<R>(field: &Field, nl: &Nonlinearity, cfg: &EvolutionConfig, mut reference: R) -> Result<Trajectory>
where
    R: FnMut(f64) -> Result<Option<Field>>,
{
    if !field.is_finite() {
        return Err(NlsError::NumericalBlowup { time: field.time });
    }
    let (whole, rem) = cfg.schedule(field.time)?;
    let t0 = field.time;
    let sp = Spectral::new(&field.grid);
    let mut stepper = StrangStepper::new(&sp, nl, cfg.dt, cfg.dealias, &field.values);
    let mut u = field.clone();
    let mut traj = Trajectory {
        grid: field.grid.clone(),
        times: Vec::new(),
        snapshots: Vec::new(),
        records: Vec::new(),
        final_field: field.clone(),
        steps: 0,
        max_phase: 0.0,
    };
    let mut observe = |u: &Field, traj: &mut Trajectory| -> Result<()> {
        traj.times.push(u.time);
        let mut rec = if cfg.observers.conserved {
            conserved_with(&sp, u, nl)?
        } else {
            MetricRecord {
                time: u.time,
                mass: f64::NAN,
                energy: f64::NAN,
                momentum: Vec::new(),
                l2_dist: None,
                h1_dist: None,
                sup_norm: u.sup_norm(),
            }
        };
        if let Some(r) = reference(u.time)? {
            let d = norms_with(&sp, &u.sub(&r)?.values);
            rec.l2_dist = Some(d.l2);
            rec.h1_dist = Some(d.h1);
        }
        traj.records.push(rec);
        if cfg.observers.keep_fields {
            traj.snapshots.push(u.clone());
        }
        Ok(())
    };
    observe(&u, &mut traj)?;
    for k in 1..=whole {
        let last = u.time;
        stepper.step()?;
        traj.steps += 1;
        let snap = k % cfg.snapshot_stride == 0 || k == whole;
        if snap || k % BLOWUP_CHECK_STRIDE == 0 {
            u.values = stepper.values();
            u.time = if k == whole && rem == 0.0 { cfg.t_end } else { t0 + k as f64 * cfg.dt };
            check_blowup(&u.values, last)?;
            if k % cfg.snapshot_stride == 0 || (k == whole && rem == 0.0) {
                observe(&u, &mut traj)?;
            }
        }
    }
    if rem != 0.0 {
        let last = u.time;
        stepper.step_by(rem)?;
        u.values = stepper.values();
        u.time = cfg.t_end;
        check_blowup(&u.values, last)?;
        traj.steps += 1;
        observe(&u, &mut traj)?;
    }
    traj.max_phase = stepper.max_phase();
    traj.final_field = u;
    Ok(traj)
}

/// How the backward runs are integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    /// u itself, with u(Tⁿ) = R(Tⁿ).
    #[default]
    Direct,
    /// η = u − R around the analytic profile, with η(Tⁿ) = 0.
    Perturbation,
}

/// Step size, snapshot stride and formulation of the backward runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackwardConfig {
    /// Step magnitude (sign is applied internally).
    pub dt: f64,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    #[serde(default)]
    pub formulation: Formulation,
}

/// One backward run from Tⁿ down to T₀.
#[derive(Debug, Clone)]
pub struct BackwardRun {
    pub t_final: f64,
    /// Snapshot times, decreasing from Tⁿ to T₀.
    pub times: Vec<f64>,
    pub h1_dist: Vec<f64>,
    pub l2_dist: Vec<f64>,
    /// u_n(T₀).
    pub initial: Field,
}

/// Solves backward from u_n(Tⁿ) = R(Tⁿ) to T₀ for every Tⁿ and records ‖u_n − R‖.
pub fn backward_scheme(
    train: &TrainSpec,
    nl: &Nonlinearity,
    times: &[f64],
    t0: f64,
    grid: &Grid,
    cfg: &BackwardConfig,
) -> Result<Vec<BackwardRun>> {
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(NlsError::InvalidParameter("final times must be increasing".into()));
    }
    if times.first().is_none_or(|&t| t <= t0) {
        return Err(NlsError::InvalidParameter("T0 must lie below every final time".into()));
    }
    if !(cfg.dt > 0.0) {
        return Err(NlsError::InvalidParameter(format!("dt magnitude must be positive, got {}", cfg.dt)));
    }
    times
        .iter()
        .map(|&tn| {
            backward_run(train, nl, tn, t0, grid, cfg)
                .map_err(|e| e.context(format!("backward run from T = {tn}")))
        })
        .collect()
}

fn backward_run(
    train: &TrainSpec,
    nl: &Nonlinearity,
    tn: f64,
    t0: f64,
    grid: &Grid,
    cfg: &BackwardConfig,
) -> Result<BackwardRun> {
    let ecfg = EvolutionConfig {
        dt: -cfg.dt,
        t_end: t0,
        dealias: false,
        snapshot_stride: cfg.snapshot_stride,
        observers: Observers {
            conserved: false,
            keep_fields: false,
        },
    };
    match cfg.formulation {
        Formulation::Direct => {
            let start = sum_profile(train, tn, grid)?;
            let traj = evolve_observed(&start, nl, &ecfg, |t| sum_profile(train, t, grid).map(Some))?;
            Ok(BackwardRun {
                t_final: tn,
                times: traj.times,
                h1_dist: traj.records.iter().map(|r| r.h1_dist.unwrap_or(f64::NAN)).collect(),
                l2_dist: traj.records.iter().map(|r| r.l2_dist.unwrap_or(f64::NAN)).collect(),
                initial: traj.final_field,
            })
        }
        Formulation::Perturbation => {
            let w = crate::perturbation::BackgroundW::new(train.clone(), grid)?;
            let eta0 = Field::zeros(grid, tn);
            let traj = crate::perturbation::evolve_perturbation(&eta0, &w, nl, &ecfg)?;
            let background = w.field(t0)?;
            Ok(BackwardRun {
                t_final: tn,
                times: traj.times,
                h1_dist: traj.h1.clone(),
                l2_dist: traj.l2.clone(),
                initial: background.add(&traj.final_field)?,
            })
        }
    }
}
