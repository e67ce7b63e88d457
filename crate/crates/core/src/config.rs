//! JSON experiment configuration.
//!
//! Deserialization errors carry the path of the offending field
//! (`train.pair.v_star`), and [`ExperimentConfig::validate`] checks that the
//! blocks an experiment needs are present.

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{NlsError, Result};
use crate::evolution::{EvolutionConfig, Formulation};
use crate::grid::Grid;
use crate::metrics::DecayWindow;
use crate::nonlinearity::{Nonlinearity, NonlinearityKind};
use crate::perturbation::Grading;
use crate::profiles::{gp_kink, kink_profile, Profile};
use crate::trains::{
    generate_train_params, ground_state, leading_exponent, truncate_train, TrainFamily, TrainParams, TrainSpec,
    WaveSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Profile,
    Evolve,
    MultiSolitonBackward,
    InfiniteTrainPicard,
    KinkTrain,
    Verify,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Profile => "profile",
            Self::Evolve => "evolve",
            Self::MultiSolitonBackward => "multi_soliton_backward",
            Self::InfiniteTrainPicard => "infinite_train_picard",
            Self::KinkTrain => "kink_train",
            Self::Verify => "verify",
        }
    }

    /// Top-level blocks the experiment cannot run without.
    fn required_blocks(self) -> &'static [&'static str] {
        match self {
            Self::Profile => &["nonlinearity", "grid", "profile"],
            Self::Evolve => &["nonlinearity", "grid", "train", "evolution"],
            Self::MultiSolitonBackward => &["nonlinearity", "grid", "train", "backward"],
            Self::InfiniteTrainPicard => &["nonlinearity", "grid", "train", "picard"],
            Self::KinkTrain => &["nonlinearity", "grid", "train", "kink_train"],
            Self::Verify => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub nonlinearity: Option<Nonlinearity>,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub evolution: Option<EvolutionBlock>,
    #[serde(default)]
    pub train: Option<TrainConfig>,
    #[serde(default)]
    pub profile: Option<ProfileBlock>,
    #[serde(default)]
    pub backward: Option<BackwardBlock>,
    #[serde(default)]
    pub picard: Option<PicardBlock>,
    #[serde(default)]
    pub kink_train: Option<KinkTrainBlock>,
    #[serde(default)]
    pub verify: Option<VerifyBlock>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Seed of the synthetic noise used by the verify suite.
    #[serde(default)]
    pub seed: u64,
}

fn default_output() -> PathBuf {
    PathBuf::from("nlslab-out")
}

/// Square periodic box of side `length` with `count` samples per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub length: f64,
    pub count: usize,
    #[serde(default = "one")]
    pub dim: usize,
}

fn one() -> usize {
    1
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid> {
        match self.dim {
            1 => Grid::line(self.length, self.count),
            2 => Grid::plane([self.length; 2], [self.count; 2]),
            d => Err(NlsError::Config {
                path: "grid.dim".into(),
                message: format!("dimension must be 1 or 2, got {d}"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionBlock {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "one")]
    pub snapshot_stride: usize,
    #[serde(default)]
    pub dealias: bool,
    /// Also write every snapshot as an NLSF file.
    #[serde(default)]
    pub save_snapshots: bool,
}

impl EvolutionBlock {
    pub fn to_config(&self) -> EvolutionConfig {
        EvolutionConfig {
            dealias: self.dealias,
            ..EvolutionConfig::new(self.dt, self.t_end).with_stride(self.snapshot_stride)
        }
    }
}

/// A scalar (first axis only) or a full planar vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Vec2 {
    Scalar(f64),
    Pair([f64; 2]),
}

impl Default for Vec2 {
    fn default() -> Self {
        Vec2::Scalar(0.0)
    }
}

impl Vec2 {
    pub fn get(self) -> [f64; 2] {
        match self {
            Vec2::Scalar(x) => [x, 0.0],
            Vec2::Pair(p) => p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentConfig {
    pub omega: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub x0: Vec2,
    #[serde(default)]
    pub v: Vec2,
}

/// End kink; the profile comes from the nonlinearity (Gross–Pitaevskii uses `c`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KinkConfig {
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub v: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub c: f64,
    /// Width of the window the kink profile is sampled on.
    #[serde(default = "default_kink_window")]
    pub window: f64,
}

fn default_kink_window() -> f64 {
    200.0
}

/// Two equal solitons with velocities ∓v⋆/2 that meet at x = 0 at `collision_time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub omega: f64,
    pub v_star: f64,
    #[serde(default)]
    pub collision_time: f64,
}

/// Train block: exactly one of `components`, `family`, `pair`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    #[serde(default)]
    pub components: Option<Vec<ComponentConfig>>,
    #[serde(default)]
    pub family: Option<TrainFamily>,
    #[serde(default)]
    pub pair: Option<PairConfig>,
    #[serde(default)]
    pub left_kink: Option<KinkConfig>,
    #[serde(default)]
    pub right_kink: Option<KinkConfig>,
    #[serde(default = "default_r0")]
    pub r0: f64,
    #[serde(default = "default_a")]
    pub a: f64,
    /// Truncation tolerance for infinite families.
    #[serde(default)]
    pub eps_tail: Option<f64>,
    /// Place every member at x = 0 at this time.
    #[serde(default)]
    pub meeting_time: Option<f64>,
    /// Galilean boost added to every velocity (after `center`).
    #[serde(default)]
    pub velocity_shift: f64,
    /// Boost so that the extreme velocities are symmetric about 0.
    #[serde(default)]
    pub center: bool,
}

fn default_r0() -> f64 {
    2.0
}

fn default_a() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileTarget {
    GroundState,
    Kink,
    GpKink,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileBlock {
    pub target: ProfileTarget,
    #[serde(default)]
    pub omega: Option<f64>,
    /// GP kink speed.
    #[serde(default)]
    pub c: f64,
    /// Compare closed-form ground states against shooting.
    #[serde(default = "yes")]
    pub cross_check: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackwardBlock {
    pub final_times: Vec<f64>,
    #[serde(default)]
    pub t0: f64,
    pub dt: f64,
    #[serde(default = "default_backward_stride")]
    pub snapshot_stride: usize,
    #[serde(default = "default_formulation")]
    pub formulation: Formulation,
    #[serde(default)]
    pub window: DecayWindow,
}

fn default_backward_stride() -> usize {
    50
}

fn default_formulation() -> Formulation {
    Formulation::Perturbation
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardBlock {
    #[serde(default)]
    pub t0: f64,
    pub t_max: f64,
    pub iterations: usize,
    pub dt: f64,
    #[serde(default)]
    pub grading: Option<Grading>,
    #[serde(default = "default_floor")]
    pub roundoff_floor: f64,
    /// Number of leading components realized on the grid (all when absent).
    #[serde(default)]
    pub members: Option<usize>,
    #[serde(default)]
    pub snapshot_stride: usize,
}

fn default_floor() -> f64 {
    1e-12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KinkTrainBlock {
    /// η(t₀) = 0 restarts; each run ends at `t_end`.
    pub restart_times: Vec<f64>,
    pub t_end: f64,
    pub dt: f64,
    #[serde(default = "default_backward_stride")]
    pub snapshot_stride: usize,
}

/// Sizes of the verify suite's checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyBlock {
    #[serde(default = "default_vlength")]
    pub length: f64,
    #[serde(default = "default_vcount")]
    pub count: usize,
    #[serde(default = "default_vdt")]
    pub dt: f64,
    #[serde(default = "default_vt")]
    pub t_end: f64,
}

fn default_vlength() -> f64 {
    100.0
}
fn default_vcount() -> usize {
    2048
}
fn default_vdt() -> f64 {
    1e-3
}
fn default_vt() -> f64 {
    1.0
}

impl Default for VerifyBlock {
    fn default() -> Self {
        Self {
            length: default_vlength(),
            count: default_vcount(),
            dt: default_vdt(),
            t_end: default_vt(),
        }
    }
}

fn config_error(path: impl Into<String>, message: impl Into<String>) -> NlsError {
    NlsError::Config {
        path: path.into(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    /// Parses and validates a JSON config.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| config_error("", e.to_string()))?;
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let cfg: Self = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            config_error(if path == "." { String::new() } else { path }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error("", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let present = |name: &str| match name {
            "nonlinearity" => self.nonlinearity.is_some(),
            "grid" => self.grid.is_some(),
            "evolution" => self.evolution.is_some(),
            "train" => self.train.is_some(),
            "profile" => self.profile.is_some(),
            "backward" => self.backward.is_some(),
            "picard" => self.picard.is_some(),
            "kink_train" => self.kink_train.is_some(),
            _ => true,
        };
        for block in self.experiment.required_blocks() {
            if !present(block) {
                return Err(config_error(
                    *block,
                    format!("missing block required by experiment `{}`", self.experiment.name()),
                ));
            }
        }
        if let Some(nl) = &self.nonlinearity {
            nl.validate().map_err(|e| config_error("nonlinearity", e.to_string()))?;
        }
        if let Some(g) = &self.grid {
            g.build().map_err(|e| config_error("grid", e.to_string()))?;
        }
        if let Some(t) = &self.train {
            let sources = [t.components.is_some(), t.family.is_some(), t.pair.is_some()];
            if sources.iter().filter(|&&s| s).count() != 1 {
                return Err(config_error("train", "give exactly one of `components`, `family`, `pair`"));
            }
        }
        if let Some(e) = &self.evolution {
            if !(e.dt != 0.0 && e.dt.is_finite()) || e.snapshot_stride == 0 {
                return Err(config_error("evolution", "dt must be finite and nonzero, snapshot_stride ≥ 1"));
            }
        }
        Ok(())
    }

    pub fn nonlinearity(&self) -> Result<&Nonlinearity> {
        self.nonlinearity.as_ref().ok_or_else(|| config_error("nonlinearity", "missing"))
    }

    pub fn grid(&self) -> Result<Grid> {
        self.grid.as_ref().ok_or_else(|| config_error("grid", "missing"))?.build()
    }

    pub fn dim(&self) -> usize {
        self.grid.map_or(1, |g| g.dim)
    }
}

/// Sets the scalar at a dotted path (`train.pair.v_star`) of a JSON config.
pub fn set_path(config: &mut Value, path: &str, value: f64) -> Result<()> {
    let mut cur = config;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let here = parts[..=i].join(".");
        cur = match cur {
            Value::Object(map) => map
                .get_mut(*part)
                .ok_or_else(|| config_error(here.clone(), "no such field"))?,
            Value::Array(items) => {
                let idx: usize = part.parse().map_err(|_| config_error(here.clone(), "expected an array index"))?;
                items
                    .get_mut(idx)
                    .ok_or_else(|| config_error(here.clone(), "index out of range"))?
            }
            _ => return Err(config_error(here, "path descends into a scalar")),
        };
    }
    if !cur.is_number() {
        return Err(config_error(path, "sweep parameter must be a number"));
    }
    *cur = serde_json::Number::from_f64(value)
        .map(Value::Number)
        .ok_or_else(|| config_error(path, format!("{value} is not a finite number")))?;
    Ok(())
}

fn kink_spec(nl: &Nonlinearity, k: &KinkConfig) -> Result<WaveSpec> {
    let window = Grid::line(k.window, 8192)?;
    let profile: Profile = match nl.kind {
        NonlinearityKind::GrossPitaevskii => gp_kink(k.c, &window)?,
        _ => kink_profile(nl, &nl.kink_constants()?, &window)?,
    };
    Ok(WaveSpec::new(Arc::new(profile), k.gamma, [k.x0, 0.0], [k.v, 0.0]))
}

fn train_params(nl: &Nonlinearity, d: usize, t: &TrainConfig) -> TrainParams {
    let (a1, a2) = nl.exponents();
    TrainParams {
        r0: t.r0,
        a: t.a,
        alpha2: a2,
        ..TrainParams::new(leading_exponent(nl).or(a1).unwrap_or(1.0), d)
    }
}

/// Train described by the config, before any truncation or member selection.
pub fn build_untruncated(t: &TrainConfig, nl: &Nonlinearity, d: usize) -> Result<TrainSpec> {
    let params = train_params(nl, d, t);
    let left = t.left_kink.as_ref().map(|k| kink_spec(nl, k)).transpose()?;
    let right = t.right_kink.as_ref().map(|k| kink_spec(nl, k)).transpose()?;
    if let Some(family) = &t.family {
        let train = generate_train_params(family, nl, params)?;
        if left.is_some() || right.is_some() {
            return TrainSpec::new(train.components().to_vec(), left, right, params);
        }
        return Ok(train);
    }
    let comps = if let Some(pair) = &t.pair {
        let p = ground_state(nl, pair.omega, d)?;
        let v = 0.5 * pair.v_star;
        vec![
            WaveSpec::new(p.clone(), 0.0, [v * pair.collision_time, 0.0], [-v, 0.0]),
            WaveSpec::new(p, 0.0, [-v * pair.collision_time, 0.0], [v, 0.0]),
        ]
    } else {
        let list = t.components.as_deref().unwrap_or_default();
        let mut out = Vec::with_capacity(list.len());
        for c in list {
            let p = ground_state(nl, c.omega, d)?;
            out.push(WaveSpec::new(p, c.gamma, c.x0.get(), c.v.get()));
        }
        out
    };
    TrainSpec::new(comps, left, right, params)
}

/// Applies truncation, member selection, boosts and then the meeting time.
pub fn finish_train(mut train: TrainSpec, t: &TrainConfig, nl: &Nonlinearity, members: Option<usize>) -> Result<TrainSpec> {
    if let Some(eps) = t.eps_tail {
        if train.is_infinite() || train.family().is_some() {
            train = truncate_train(&train, nl, eps)?;
        }
    }
    if let Some(n) = members {
        train = train.take(n)?;
    }
    let mut shift = t.velocity_shift;
    if t.center {
        let vs: Vec<f64> = train.members().map(|w| w.v[0] + w.c).collect();
        let lo = vs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo.is_finite() {
            shift -= 0.5 * (lo + hi);
        }
    }
    if shift != 0.0 {
        train = train.with_velocity_shift(shift)?;
    }
    if let Some(tm) = t.meeting_time {
        train = train.with_meeting_time(tm)?;
    }
    Ok(train)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_grid_is_reported_by_path() {
        let err = ExperimentConfig::from_json_str(
            r#"{"experiment": "evolve", "nonlinearity": {"kind": "power", "alpha": 2.0},
                "train": {"pair": {"omega": 1.0, "v_star": 4.0}}, "evolution": {"dt": 0.01, "t_end": 1.0}}"#,
        )
        .unwrap_err();
        match err {
            NlsError::Config { path, .. } => assert_eq!(path, "grid"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn type_errors_carry_field_path() {
        let err = ExperimentConfig::from_json_str(
            r#"{"experiment": "evolve", "grid": {"length": "wide", "count": 64}}"#,
        )
        .unwrap_err();
        match err {
            NlsError::Config { path, .. } => assert_eq!(path, "grid.length"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn set_path_replaces_numbers_only() {
        let mut v: Value = serde_json::json!({"train": {"pair": {"v_star": 8.0}}, "name": "x"});
        set_path(&mut v, "train.pair.v_star", 16.0).unwrap();
        assert_eq!(v["train"]["pair"]["v_star"], 16.0);
        assert!(set_path(&mut v, "name", 1.0).is_err());
        assert!(set_path(&mut v, "train.nope", 1.0).is_err());
    }
}
