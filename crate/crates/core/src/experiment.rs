//! Experiment runner: turns a validated [`ExperimentConfig`] into runs of the
//! schemes, writes CSV/JSON/binary artifacts plus a manifest, and evaluates the
//! pass/fail checks attached to each experiment.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::config::{
    build_untruncated, finish_train, set_path, ExperimentConfig, TrainConfig, ExperimentKind, ProfileTarget, VerifyBlock,
};
use crate::error::{NlsError, Result};
use crate::evolution::{
    backward_scheme, evolve, evolve_observed, BackwardConfig, EvolutionConfig, Observers,
};
use crate::grid::{Field, Grid};
use crate::io::{save_profile, save_snapshots, Table};
use crate::metrics::{
    admissible_pairs, conserved, distances, fit_decay_window, fit_exponential_rate, pair_label,
    strichartz_running,
};
use crate::nonlinearity::{Nonlinearity, NonlinearityKind};
use crate::perturbation::{evolve_perturbation, picard_iterate, BackgroundW, PicardOptions, PicardStatus};
use crate::profiles::{
    gp_kink, ground_state_power_1d, ground_state_shoot, kink_profile, power_exponent, Profile, RadialGrid,
};
use crate::spectral::free_propagate;
use crate::trains::{
    exponent_window, sum_profile, ExponentWindow, validate_theorem1, validate_theorem2, validate_theorem3, validate_theorem4,
    TrainSpec, WaveSpec,
};

/// Number of admissible pairs in the Strichartz columns.
pub const STRICHARTZ_PAIRS: usize = 5;

/// One pass/fail property with the measured value and its threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    /// `<`, `>`, `<=`, `in` (threshold is then the half-width around `center`) or `holds`.
    pub relation: String,
    pub pass: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            relation: "<".into(),
            pass: value < threshold,
        }
    }

    pub fn above(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            relation: ">".into(),
            pass: value > threshold,
        }
    }

    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold: hi,
            relation: format!("in [{lo}, {hi}]"),
            pass: value >= lo && value <= hi,
        }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            threshold: 1.0,
            relation: "holds".into(),
            pass: ok,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
}

/// Outcome of one experiment.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub experiment: String,
    /// Scalar results, also the columns of sweep tables.
    pub headline: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub files: Vec<FileEntry>,
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: &'a str,
    version: &'static str,
    config: &'a ExperimentConfig,
    wall_time_s: f64,
    files: &'a [FileEntry],
}

/// Artifact writer rooted at the output directory.
struct Outputs {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn table(&mut self, name: &str, table: &Table) -> Result<()> {
        let path = self.dir.join(name);
        table.save(&path)?;
        self.files.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.dir.join(name);
        let text = serde_json::to_string_pretty(value).map_err(|e| NlsError::Format(e.to_string()))?;
        std::fs::write(&path, text)?;
        self.files.push(path);
        Ok(())
    }

    fn profile(&mut self, name: &str, p: &Profile) -> Result<()> {
        let path = self.dir.join(name);
        save_profile(&path, p)?;
        self.files.push(path);
        Ok(())
    }

    fn snapshots(&mut self, sub: &str, fields: &[Field]) -> Result<()> {
        let dir = self.dir.join(sub);
        let index = save_snapshots(&dir, fields)?;
        for i in 0..fields.len() {
            self.files.push(dir.join(format!("snap_{i:05}.nlsf")));
        }
        self.files.push(index);
        Ok(())
    }

    fn checks(&mut self, name: &str, checks: &[Check]) -> Result<()> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| NlsError::Format(e.to_string()))?;
        let csv_err = |e: csv::Error| NlsError::Format(e.to_string());
        w.write_record(["name", "value", "threshold", "relation", "pass"]).map_err(csv_err)?;
        for c in checks {
            w.write_record([
                c.name.clone(),
                crate::io::format_number(c.value),
                crate::io::format_number(c.threshold),
                c.relation.clone(),
                c.pass.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        self.files.push(path);
        Ok(())
    }

    fn entries(&self) -> Vec<FileEntry> {
        self.files
            .iter()
            .map(|p| FileEntry {
                path: p.strip_prefix(&self.dir).unwrap_or(p).display().to_string(),
                bytes: std::fs::metadata(p).map(|m| m.len()).unwrap_or(0),
            })
            .collect()
    }
}

struct Outcome {
    headline: BTreeMap<String, f64>,
    checks: Vec<Check>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            headline: BTreeMap::new(),
            checks: Vec::new(),
        }
    }

    fn put(&mut self, key: impl Into<String>, value: f64) {
        self.headline.insert(key.into(), value);
    }
}

/// Runs the configured experiment, writing artifacts into `out`.
pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<RunReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut o = Outputs::new(out)?;
    let outcome = match cfg.experiment {
        ExperimentKind::Profile => run_profile(cfg, &mut o),
        ExperimentKind::Evolve => run_evolve(cfg, &mut o),
        ExperimentKind::MultiSolitonBackward => run_backward(cfg, &mut o),
        ExperimentKind::InfiniteTrainPicard => run_picard(cfg, &mut o),
        ExperimentKind::KinkTrain => run_kink_train(cfg, &mut o),
        ExperimentKind::Verify => run_verify(cfg, &mut o),
    }
    .map_err(|e| e.context(format!("experiment `{}`", cfg.experiment.name())))?;
    o.checks("checks.csv", &outcome.checks)?;
    let mut report = RunReport {
        experiment: cfg.experiment.name().into(),
        headline: outcome.headline,
        checks: outcome.checks,
        files: Vec::new(),
        wall_time_s: 0.0,
    };
    o.json("summary.json", &SummaryView::of(&report))?;
    report.wall_time_s = start.elapsed().as_secs_f64();
    report.files = o.entries();
    let manifest = Manifest {
        experiment: cfg.experiment.name(),
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        wall_time_s: report.wall_time_s,
        files: &report.files,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| NlsError::Format(e.to_string()))?;
    std::fs::write(out.join("manifest.json"), text)?;
    Ok(report)
}

/// Summary file content: results and verdicts, without timings.
#[derive(Serialize)]
struct SummaryView<'a> {
    experiment: &'a str,
    status: &'static str,
    headline: &'a BTreeMap<String, f64>,
    results: BTreeMap<&'a str, &'static str>,
    checks: &'a [Check],
}

impl<'a> SummaryView<'a> {
    fn of(r: &'a RunReport) -> Self {
        Self {
            experiment: &r.experiment,
            status: if r.passed() { "pass" } else { "fail" },
            headline: &r.headline,
            results: r
                .checks
                .iter()
                .map(|c| (c.name.as_str(), if c.pass { "pass" } else { "fail" }))
                .collect(),
            checks: &r.checks,
        }
    }
}

/// One sweep row.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub ok: bool,
    pub error: Option<String>,
    pub report: Option<RunReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub parameter: String,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn column(&self, key: &str) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.report.as_ref().and_then(|x| x.headline.get(key).copied()).unwrap_or(f64::NAN))
            .collect()
    }
}

/// Runs the experiment once per value of the scalar at `parameter` (a dotted
/// path into the JSON config). Rows run concurrently on the rayon pool; failing
/// rows are recorded, not fatal.
pub fn sweep(config: &Value, parameter: &str, values: &[f64], out: &Path) -> Result<SweepReport> {
    if values.is_empty() {
        return Err(NlsError::Config {
            path: parameter.into(),
            message: "sweep needs at least one value".into(),
        });
    }
    // resolve the path once so a bad parameter is a config error, not a row failure
    let mut probe = config.clone();
    set_path(&mut probe, parameter, values[0])?;
    ExperimentConfig::from_value(probe)?;
    std::fs::create_dir_all(out)?;
    let rows: Vec<SweepRow> = values
        .par_iter()
        .enumerate()
        .map(|(i, &v)| {
            let attempt = || -> Result<RunReport> {
                let mut c = config.clone();
                set_path(&mut c, parameter, v)?;
                let cfg = ExperimentConfig::from_value(c)?;
                run(&cfg, &out.join(format!("row_{i:03}")))
            };
            match attempt() {
                Ok(report) => SweepRow {
                    value: v,
                    ok: true,
                    error: None,
                    report: Some(report),
                },
                Err(e) => SweepRow {
                    value: v,
                    ok: false,
                    error: Some(e.to_string()),
                    report: None,
                },
            }
        })
        .collect();
    let report = SweepReport {
        parameter: parameter.into(),
        rows,
    };
    let keys: std::collections::BTreeSet<String> = report
        .rows
        .iter()
        .filter_map(|r| r.report.as_ref())
        .flat_map(|r| r.headline.keys().cloned())
        .collect();
    let mut table = Table::new(
        ["value".to_string(), "ok".to_string(), "pass".to_string()]
            .into_iter()
            .chain(keys.iter().cloned()),
    );
    for row in &report.rows {
        let mut cells = vec![
            row.value,
            if row.ok { 1.0 } else { 0.0 },
            if row.report.as_ref().is_some_and(|r| r.passed()) { 1.0 } else { 0.0 },
        ];
        for k in &keys {
            cells.push(row.report.as_ref().and_then(|r| r.headline.get(k).copied()).unwrap_or(f64::NAN));
        }
        table.push(cells);
    }
    table.save(&out.join("sweep.csv"))?;
    let text = serde_json::to_string_pretty(&report).map_err(|e| NlsError::Format(e.to_string()))?;
    std::fs::write(out.join("sweep.json"), text)?;
    Ok(report)
}

fn relative_drift(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        (b - a).abs()
    } else {
        ((b - a) / a).abs()
    }
}

fn run_profile(cfg: &ExperimentConfig, o: &mut Outputs) -> Result<Outcome> {
    let nl = cfg.nonlinearity()?;
    let grid = cfg.grid()?;
    let block = cfg.profile.expect("validated");
    let mut out = Outcome::new();
    let profile = match block.target {
        ProfileTarget::GroundState => {
            let omega = block.omega.unwrap_or(1.0);
            out.put("omega", omega);
            let d = cfg.dim();
            match (power_exponent(nl), d) {
                (Some(alpha), 1) => {
                    let p = ground_state_power_1d(alpha, omega, &grid)?;
                    if block.cross_check {
                        let r_max = 0.5 * grid.lengths()[0];
                        let shot = ground_state_shoot(nl, omega, 1, RadialGrid { r_max, count: 4001 })?;
                        let gap = shot
                            .sample_coords()
                            .iter()
                            .zip(shot.values())
                            .map(|(&r, &v)| (v - p.value(r)).abs())
                            .fold(0.0, f64::max);
                        out.put("shooting_gap", gap);
                        out.checks.push(Check::below("shooting agreement", gap, 1e-8));
                    }
                    p
                }
                _ => {
                    let r_max = 0.5 * grid.lengths()[0];
                    ground_state_shoot(nl, omega, d, RadialGrid { r_max, count: grid.counts()[0] / 2 + 1 })?
                }
            }
        }
        ProfileTarget::Kink => {
            let kc = nl.kink_constants()?;
            let [hb, integral] = nl.kink_residuals(&kc)?;
            out.put("omega0", kc.omega0);
            out.put("b", kc.b);
            out.put("hprime_at_b", kc.hprime_at_b);
            out.put("h_of_b", hb);
            out.put("integral_h", integral);
            out.checks.push(Check::below("kink constants residual", hb.abs().max(integral.abs()), 1e-10));
            kink_profile(nl, &kc, &grid)?
        }
        ProfileTarget::GpKink => {
            let p = gp_kink(block.c, &grid)?;
            let lo = p.limit_minus_inf().norm();
            let hi = p.limit_plus_inf().norm();
            out.put("c", block.c);
            out.put("modulus_minus_inf", lo);
            out.put("modulus_plus_inf", hi);
            out.checks
                .push(Check::below("|phi(±inf)| = 1", (lo - 1.0).abs().max((hi - 1.0).abs()), 1e-10));
            p
        }
    };
    let residual = if profile.residual().is_nan() { profile.stationary_residual(nl) } else { profile.residual() };
    out.put("residual", residual);
    out.put("decay_rate", profile.decay_rate_a());
    let threshold = if matches!(block.target, ProfileTarget::GroundState) { 1e-10 } else { 1e-8 };
    out.checks.push(Check::below("stationary residual", residual, threshold));
    let mut table = Table::new(["x", "re", "im"]);
    let coords = profile.sample_coords();
    for (i, &x) in coords.iter().enumerate() {
        let z = match profile.complex_values() {
            Some(c) => c[i],
            None => Complex64::new(profile.values()[i], 0.0),
        };
        table.push(vec![x, z.re, z.im]);
    }
    o.table("profile.csv", &table)?;
    o.profile("profile.nlsp", &profile)?;
    Ok(out)
}

fn train_of(cfg: &ExperimentConfig, members: Option<usize>) -> Result<TrainSpec> {
    let nl = cfg.nonlinearity()?;
    let t = cfg.train.as_ref().expect("validated");
    let untruncated = build_untruncated(t, nl, cfg.dim())?;
    finish_train(untruncated, t, nl, members)
}

fn run_evolve(cfg: &ExperimentConfig, o: &mut Outputs) -> Result<Outcome> {
    let nl = cfg.nonlinearity()?;
    let grid = cfg.grid()?;
    let train = train_of(cfg, None)?;
    let block = cfg.evolution.expect("validated");
    let ecfg = EvolutionConfig {
        observers: Observers {
            conserved: true,
            keep_fields: true,
        },
        ..block.to_config()
    };
    let u0 = sum_profile(&train, 0.0, &grid)?;
    let traj = evolve_observed(&u0, nl, &ecfg, |t| sum_profile(&train, t, &grid).map(Some))?;
    let pairs = admissible_pairs(grid.dim(), STRICHARTZ_PAIRS);
    let diffs: Vec<Field> = traj
        .snapshots
        .iter()
        .map(|s| s.sub(&sum_profile(&train, s.time, &grid)?))
        .collect::<Result<_>>()?;
    let strichartz = strichartz_running(&diffs, &pairs)?;
    let mut header = vec!["t".to_string(), "mass".into(), "energy".into(), "px".into()];
    if grid.dim() == 2 {
        header.push("py".into());
    }
    header.extend(["l2_dist".to_string(), "h1_dist".into(), "sup".into()]);
    header.extend(pairs.iter().map(pair_label));
    let mut table = Table::new(header);
    for (rec, s) in traj.records.iter().zip(&strichartz) {
        let mut row = vec![rec.time, rec.mass, rec.energy];
        row.extend(&rec.momentum);
        row.extend([rec.l2_dist.unwrap_or(f64::NAN), rec.h1_dist.unwrap_or(f64::NAN), rec.sup_norm]);
        row.extend(s);
        table.push(row);
    }
    o.table("metrics.csv", &table)?;
    if block.save_snapshots {
        o.snapshots("snapshots", &traj.snapshots)?;
    }
    let first = &traj.records[0];
    let last = traj.records.last().expect("at least the initial record");
    let mut out = Outcome::new();
    let dm = relative_drift(first.mass, last.mass);
    let de = relative_drift(first.energy, last.energy);
    let dp = first
        .momentum
        .iter()
        .zip(&last.momentum)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    out.put("mass_drift", dm);
    out.put("energy_drift", de);
    out.put("momentum_drift", dp);
    out.put("l2_error_final", last.l2_dist.unwrap_or(f64::NAN));
    out.put("h1_error_final", last.h1_dist.unwrap_or(f64::NAN));
    out.put("strichartz", strichartz.last().map_or(f64::NAN, |r| r.iter().copied().fold(0.0, f64::max)));
    out.put("steps", traj.steps as f64);
    out.checks.push(Check::below("relative mass drift", dm, 1e-12));
    out.checks.push(Check::below("relative energy drift", de, 1e-5));
    out.checks.push(Check::below("momentum drift", dp, 1e-8));
    out.checks.push(Check::holds("phase resolved", traj.phase_resolved()));
    Ok(out)
}

fn run_backward(cfg: &ExperimentConfig, o: &mut Outputs) -> Result<Outcome> {
    let nl = cfg.nonlinearity()?;
    let grid = cfg.grid()?;
    let train = train_of(cfg, None)?;
    let block = cfg.backward.clone().expect("validated");
    let t1 = validate_theorem1(&train)?;
    o.json("theorem1.json", &t1)?;
    let runs = backward_scheme(
        &train,
        nl,
        &block.final_times,
        block.t0,
        &grid,
        &BackwardConfig {
            dt: block.dt,
            snapshot_stride: block.snapshot_stride,
            formulation: block.formulation,
        },
    )?;
    let mut out = Outcome::new();
    out.put("v_star", t1.v_star);
    let mut fits = Table::new(["t_final", "rate", "intercept", "r_squared", "points"]);
    for run in &runs {
        let mut table = Table::new(["t", "l2_dist", "h1_dist"]);
        for i in (0..run.times.len()).rev() {
            table.push(vec![run.times[i], run.l2_dist[i], run.h1_dist[i]]);
        }
        o.table(&format!("backward_T{}.csv", run.t_final), &table)?;
        match fit_decay_window(&run.times, &run.h1_dist, block.window) {
            Ok(w) => {
                fits.push(vec![run.t_final, w.fit.rate, w.fit.intercept, w.fit.r_squared, w.times.len() as f64]);
                out.checks.push(Check::above(format!("T={} r^2", run.t_final), w.fit.r_squared, 0.9));
                out.checks.push(Check::above(format!("T={} decay rate", run.t_final), w.fit.rate, 0.0));
            }
            Err(e) => {
                fits.push(vec![run.t_final, f64::NAN, f64::NAN, f64::NAN, 0.0]);
                out.checks.push(Check::holds(format!("T={} rate fit ({e})", run.t_final), false));
            }
        }
    }
    o.table("rate_fits.csv", &fits)?;
    if let Some(last) = fits.rows.last() {
        out.put("rate", last[1]);
        out.put("r_squared", last[3]);
    }
    let mut cauchy = Table::new(["t_n", "t_n1", "l2_diff"]);
    let mut diffs = Vec::new();
    for w in runs.windows(2) {
        let d = w[1].initial.sub(&w[0].initial)?.l2_norm();
        diffs.push(d);
        cauchy.push(vec![w[0].t_final, w[1].t_final, d]);
    }
    o.table("cauchy.csv", &cauchy)?;
    if let Some(&d) = diffs.last() {
        out.put("cauchy_last", d);
    }
    if diffs.len() >= 2 {
        out.checks
            .push(Check::holds("Cauchy table strictly decreasing", diffs.windows(2).all(|w| w[1] < w[0])));
    }
    Ok(out)
}

fn run_picard(cfg: &ExperimentConfig, o: &mut Outputs) -> Result<Outcome> {
    let nl = cfg.nonlinearity()?;
    let grid = cfg.grid()?;
    let tcfg = cfg.train.as_ref().expect("validated");
    let block = cfg.picard.clone().expect("validated");
    let mut out = Outcome::new();

    let untruncated = build_untruncated(tcfg, nl, cfg.dim())?;
    // the conditions are checked on the truncated train before any boost
    let plain = TrainConfig {
        center: false,
        meeting_time: None,
        velocity_shift: 0.0,
        ..tcfg.clone()
    };
    let truncated = finish_train(untruncated.clone(), &plain, nl, None)?;
    let params = truncated.params();
    let v_sharp = tcfg.family.as_ref().map(|f| f.v_sharp);
    let t2 = validate_theorem2(&truncated, params.alpha, params.r0, params.a, v_sharp)?;
    o.json("theorem2.json", &t2)?;
    out.put("components_truncated", truncated.components().len() as f64);
    out.put("tail_bound", truncated.tail_bound().unwrap_or(f64::NAN));
    out.checks.push(Check::holds("uniform bound", t2.uniform_bound.pass));
    out.checks.push(Check::holds("integrability", t2.integrability.pass));
    out.checks.push(Check::holds("high relative speeds", t2.speeds.pass));
    out.checks.push(Check::holds("gradient bound", t2.gradient.pass));

    let train = finish_train(untruncated, tcfg, nl, block.members)?;
    out.put("components_realized", train.components().len() as f64);
    let w = BackgroundW::new(train, &grid)?;
    let opts = PicardOptions {
        snapshot_stride: block.snapshot_stride,
        roundoff_floor: block.roundoff_floor,
        grading: block.grading,
    };
    let res = picard_iterate(&w, nl, block.t0, block.t_max, block.iterations, &grid, block.dt, opts)?;
    let mut table = Table::new(["k", "ratio", "sup_l2", "sup_h1", "diff_sup_l2"]);
    for it in &res.iterates {
        table.push(vec![it.k as f64, it.ratio.unwrap_or(f64::NAN), it.sup_l2, it.sup_h1, it.diff_sup_l2]);
    }
    o.table("contraction.csv", &table)?;
    let mut rt = Table::new(["t", "residual"]);
    for (t, r) in res.residual_times.iter().zip(&res.residual) {
        rt.push(vec![*t, *r]);
    }
    o.table("residual.csv", &rt)?;
    let mut st = Table::new(["t", "source_l2"]);
    for (t, s) in res.source_times.iter().zip(&res.source_l2) {
        st.push(vec![*t, *s]);
    }
    o.table("source.csv", &st)?;
    if !res.snapshots.is_empty() {
        o.snapshots("eta", &res.snapshots)?;
    }
    let contracting = res.status == PicardStatus::Contracting;
    let max_ratio = res.contraction_ratios.iter().copied().fold(0.0, f64::max);
    let max_residual = res
        .residual
        .iter()
        .fold(0.0f64, |a, &b| if b.is_nan() { f64::INFINITY } else { a.max(b) });
    out.put("contracting", if contracting { 1.0 } else { 0.0 });
    out.put("max_ratio", if res.contraction_ratios.is_empty() { f64::NAN } else { max_ratio });
    out.put("max_residual", max_residual);
    out.put("tail_estimate", res.tail_estimate);
    out.put("levels", res.source_times.len() as f64);
    out.checks.push(Check::holds("contracting", contracting));
    out.checks.push(Check::below("max contraction ratio (k ≥ 2)", max_ratio, 0.5));
    out.checks.push(Check::below("NLS residual of W + eta", max_residual, 1e-4));
    Ok(out)
}

fn run_kink_train(cfg: &ExperimentConfig, o: &mut Outputs) -> Result<Outcome> {
    let nl = cfg.nonlinearity()?;
    let grid = cfg.grid()?;
    let train = train_of(cfg, None)?;
    let block = cfg.kink_train.clone().expect("validated");
    let mut out = Outcome::new();
    let t3 = validate_theorem3(&train);
    out.put("v_star", t3.v_star);
    out.checks.push(Check::holds("velocities strictly increasing", t3.strictly_increasing));
    o.json("theorem3.json", &t3)?;
    if let NonlinearityKind::DoublePower { alpha, beta } = nl.kind {
        let t4 = validate_theorem4(&train, alpha, beta, None);
        out.put(
            "exponent_window_ok",
            if exponent_window(alpha, beta) == ExponentWindow::Outside { 0.0 } else { 1.0 },
        );
        o.json("theorem4.json", &t4)?;
    }
    let w = BackgroundW::new(train, &grid)?;
    let mut sups = Vec::new();
    for &t0 in &block.restart_times {
        let ecfg = EvolutionConfig {
            observers: Observers {
                conserved: false,
                keep_fields: false,
            },
            ..EvolutionConfig::new(block.dt, block.t_end).with_stride(block.snapshot_stride)
        };
        let traj = evolve_perturbation(&Field::zeros(&grid, t0), &w, nl, &ecfg)
            .map_err(|e| e.context(format!("restart at t0 = {t0}")))?;
        let mut table = Table::new(["t", "l2", "h1", "grad", "sup", "boundary_ratio"]);
        for i in 0..traj.times.len() {
            table.push(vec![
                traj.times[i],
                traj.l2[i],
                traj.h1[i],
                traj.grad[i],
                traj.sup[i],
                traj.boundary_ratio[i],
            ]);
        }
        o.table(&format!("eta_t0_{t0}.csv"), &table)?;
        let sup_h1 = traj.h1.iter().copied().fold(0.0, f64::max);
        let sup_grad = traj.grad.iter().copied().fold(0.0, f64::max);
        out.put(format!("sup_h1_t0_{t0}"), sup_h1);
        out.put(format!("sup_grad_t0_{t0}"), sup_grad);
        out.checks.push(Check::holds(format!("t0={t0}: eta bounded"), sup_h1.is_finite()));
        out.checks.push(Check::holds(format!("t0={t0}: gradient series finite"), traj.grad.iter().all(|g| g.is_finite())));
        sups.push(sup_h1);
    }
    if sups.len() >= 2 {
        out.checks.push(Check::holds(
            "sup H1 strictly decreasing in t0",
            sups.windows(2).all(|w| w[1] < w[0]),
        ));
    }
    Ok(out)
}

/// Quick property suite; all sizes come from the `verify` block.
fn run_verify(cfg: &ExperimentConfig, o: &mut Outputs) -> Result<Outcome> {
    let v: VerifyBlock = cfg.verify.unwrap_or_default();
    let mut out = Outcome::new();
    let c = &mut out.checks;

    // nonlinearity
    let cubic = Nonlinearity::power(2.0)?;
    let dp = Nonlinearity::double_power(1.0, 2.0)?;
    c.push(Check::below("f(2) = 8 for the cubic power", (cubic.eval_f(Complex64::new(2.0, 0.0))? - 8.0).norm(), 1e-14));
    c.push(Check::below("F(1) = 1/12 for DP(1,2)", (dp.eval_F(1.0)? - 1.0 / 12.0).abs(), 1e-14));
    let kc = dp.kink_constants()?;
    c.push(Check::below(
        "DP(1,2) kink constants (2/9, 2/3)",
        (kc.omega0 - 2.0 / 9.0).abs().max((kc.b - 2.0 / 3.0).abs()),
        1e-10,
    ));

    // profiles
    let mut worst: f64 = 0.0;
    for alpha in [1.0, 2.0, 3.0] {
        for omega in [0.25f64, 1.0, 4.0] {
            let g = Grid::line(120.0 / omega.sqrt(), 4096)?;
            worst = worst.max(ground_state_power_1d(alpha, omega, &g)?.residual());
        }
    }
    c.push(Check::below("power ground-state residuals", worst, 1e-10));
    let closed = ground_state_power_1d(2.0, 1.0, &Grid::line(80.0, 2048)?)?;
    let shot = ground_state_shoot(&cubic, 1.0, 1, RadialGrid { r_max: 40.0, count: 4001 })?;
    let gap = shot
        .sample_coords()
        .iter()
        .zip(shot.values())
        .map(|(&r, &x)| (x - closed.value(r)).abs())
        .fold(0.0, f64::max);
    c.push(Check::below("shooting vs closed form", gap, 1e-8));
    let kink = kink_profile(&dp, &kc, &Grid::line(120.0, 4096)?)?;
    c.push(Check::below("kink residual", kink.residual(), 1e-8));
    let mut gp_gap: f64 = 0.0;
    for speed in [0.0, 0.5, 1.0] {
        let p = gp_kink(speed, &Grid::line(60.0, 1024)?)?;
        gp_gap = gp_gap
            .max((p.limit_minus_inf().norm() - 1.0).abs())
            .max((p.limit_plus_inf().norm() - 1.0).abs());
    }
    c.push(Check::below("GP kink |phi(±inf)| = 1", gp_gap, 1e-10));

    // evolution of a boosted soliton
    let grid = Grid::line(v.length, v.count)?;
    let profile = std::sync::Arc::new(ground_state_power_1d(2.0, 1.0, &grid)?);
    let train = TrainSpec::new(
        vec![WaveSpec::new(profile, 0.0, [0.0, 0.0], [4.0, 0.0])],
        None,
        None,
        crate::trains::TrainParams::new(2.0, 1),
    )?;
    let u0 = sum_profile(&train, 0.0, &grid)?;
    let ecfg = EvolutionConfig::new(v.dt, v.t_end).with_stride(((0.05 / v.dt).round() as usize).max(1));
    let traj = evolve_observed(&u0, &cubic, &ecfg, |t| sum_profile(&train, t, &grid).map(Some))?;
    let mut table = Table::new(["t", "mass", "energy", "px", "l2_dist", "h1_dist", "sup"]);
    for r in &traj.records {
        table.push(vec![
            r.time,
            r.mass,
            r.energy,
            r.momentum[0],
            r.l2_dist.unwrap_or(f64::NAN),
            r.h1_dist.unwrap_or(f64::NAN),
            r.sup_norm,
        ]);
    }
    o.table("soliton_metrics.csv", &table)?;
    let (first, last) = (&traj.records[0], traj.records.last().expect("records"));
    c.push(Check::below("soliton L2 error", last.l2_dist.unwrap_or(f64::NAN), 1e-5));
    c.push(Check::below("relative mass drift", relative_drift(first.mass, last.mass), 1e-12));
    c.push(Check::below("relative energy drift", relative_drift(first.energy, last.energy), 1e-5));
    c.push(Check::below("momentum drift", (first.momentum[0] - last.momentum[0]).abs(), 1e-8));
    c.push(Check::below("momentum P = v M", (first.momentum[0] - 4.0 * first.mass).abs(), 1e-10));
    let back = evolve(&traj.final_field, &cubic, &EvolutionConfig::new(-v.dt, 0.0).with_stride(usize::MAX))?;
    let round_trip = distances(&back.final_field, &u0)?.l2;
    c.push(Check::below("time-reversal round trip", round_trip, 1e-10));

    let mut conv = Table::new(["dt", "l2_error"]);
    let mut errors = Vec::new();
    for dt in [1e-2, 5e-3, 2.5e-3] {
        let run = evolve(&u0, &cubic, &EvolutionConfig::new(dt, v.t_end).with_stride(usize::MAX))?;
        let e = distances(&run.final_field, &sum_profile(&train, v.t_end, &grid)?)?.l2;
        conv.push(vec![dt, e]);
        errors.push(e);
    }
    o.table("convergence.csv", &conv)?;
    for (i, w) in errors.windows(2).enumerate() {
        c.push(Check::within(format!("error ratio per dt halving #{}", i + 1), w[0] / w[1], 3.5, 4.5));
    }

    // free propagation
    let gauss = Field::from_fn(&grid, 0.0, |p| Complex64::new((-p[0] * p[0]).exp(), 0.0));
    let mut g_gap: f64 = 0.0;
    let mut unitarity: f64 = 0.0;
    let mut dispersion = Table::new(["t", "sup", "exact"]);
    for k in 1..=10 {
        let t = 0.1 * k as f64;
        let u = free_propagate(&gauss, t);
        let exact = (1.0 + 16.0 * t * t).powf(-0.25);
        g_gap = g_gap.max((u.sup_norm() - exact).abs());
        unitarity = unitarity.max((u.l2_norm() - gauss.l2_norm()).abs() / gauss.l2_norm());
        dispersion.push(vec![t, u.sup_norm(), exact]);
    }
    o.table("dispersion.csv", &dispersion)?;
    c.push(Check::below("Gaussian dispersive decay", g_gap, 1e-8));
    c.push(Check::below("free propagator unitary", unitarity, 1e-13));

    // exponential fit on seeded synthetic data
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let times: Vec<f64> = (0..40).map(|i| 0.1 * i as f64).collect();
    let values: Vec<f64> = times
        .iter()
        .map(|t| 5.0 * (-2.0 * t).exp() * (1.0 + 0.01 * rng.gen_range(-1.0..1.0)))
        .collect();
    let fit = fit_exponential_rate(&times, &values)?;
    c.push(Check::within("noisy exponential rate", fit.rate, 1.9, 2.1));

    // trains and perturbation
    let conserved0 = conserved(&u0, &cubic)?;
    out.headline.insert("soliton_mass".into(), conserved0.mass);
    let pairs_ok = (1..=3).all(|d| {
        admissible_pairs(d, STRICHARTZ_PAIRS)
            .iter()
            .all(|p| (2.0 / p.q + d as f64 / p.r - d as f64 / 2.0).abs() < 1e-12)
    });
    out.checks.push(Check::holds("admissible pairs on the line 2/q + d/r = d/2", pairs_ok));
    let kgrid = Grid::line(120.0, 2048)?;
    let kink = std::sync::Arc::new(kink_profile(&dp, &kc, &Grid::line(200.0, 8192)?)?);
    let kink_train = TrainSpec::new(
        Vec::new(),
        Some(WaveSpec::new(kink, 0.0, [0.0, 0.0], [0.0, 0.0])),
        None,
        crate::trains::TrainParams::new(1.0, 1),
    )?;
    let bw = BackgroundW::new(kink_train, &kgrid)?;
    let eta = evolve_perturbation(&Field::zeros(&kgrid, 0.0), &bw, &dp, &EvolutionConfig::new(1e-2, 1.0).with_stride(10))?;
    let eta_max = eta.l2.iter().copied().fold(0.0, f64::max);
    out.checks.push(Check::below("stationary kink: |eta| stays zero", eta_max, 1e-8));

    out.headline.insert("checks".into(), out.checks.len() as f64);
    out.headline.insert("failed".into(), out.checks.iter().filter(|c| !c.pass).count() as f64);
    out.headline.insert("gaussian_gap".into(), g_gap);
    out.headline.insert("round_trip".into(), round_trip);
    out.headline.insert("fitted_rate".into(), fit.rate);
    Ok(out)
}
