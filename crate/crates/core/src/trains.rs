//! Soliton trains: boosted components, their superposition and the
//! admissibility conditions for finite, infinite and kink–soliton trains.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NlsError, Result};
use crate::grid::{Field, Grid};
use crate::nonlinearity::Nonlinearity;
use crate::profiles::{
    ground_state_power_1d, ground_state_shoot, power_exponent, rescale_power_ground_state, Profile,
    ProfileKind, RadialGrid,
};

/// One moving component: profile plus (ω, γ, x₀, v) and intrinsic velocity c.
#[derive(Debug, Clone)]
pub struct WaveSpec {
    pub profile: Arc<Profile>,
    pub omega: f64,
    pub gamma: f64,
    pub x0: [f64; 2],
    pub v: [f64; 2],
    pub c: f64,
}

/// Value, time derivative, gradient and Laplacian of a boosted component.
#[derive(Debug, Clone, Copy)]
pub struct WavePoint {
    pub value: Complex64,
    pub dt: Complex64,
    pub grad: [Complex64; 2],
    pub laplacian: Complex64,
    pub extrapolated: bool,
}

impl WaveSpec {
    pub fn new(profile: Arc<Profile>, gamma: f64, x0: [f64; 2], v: [f64; 2]) -> Self {
        Self {
            omega: profile.omega(),
            c: profile.intrinsic_velocity(),
            profile,
            gamma,
            x0,
            v,
        }
    }

    pub fn dim(&self) -> usize {
        self.profile.dim()
    }

    pub fn is_kink(&self) -> bool {
        self.profile.kind() == ProfileKind::Kink
    }

    fn speed(&self) -> [f64; 2] {
        [self.v[0] + self.c, self.v[1]]
    }

    fn v2(&self) -> f64 {
        self.v[0] * self.v[0] + self.v[1] * self.v[1]
    }

    /// Phase ½v·x − ¼|v|²t + ωt + γ.
    pub fn phase(&self, t: f64, p: [f64; 2]) -> f64 {
        0.5 * (self.v[0] * p[0] + self.v[1] * p[1]) - 0.25 * self.v2() * t + self.omega * t + self.gamma
    }

    /// Full evaluation of φ(x − (v+c)t − x₀) e^{iθ} with analytic derivatives.
    pub fn eval(&self, t: f64, p: [f64; 2]) -> WavePoint {
        let d = self.dim();
        let s = self.speed();
        let xi = [p[0] - s[0] * t - self.x0[0], p[1] - s[1] * t - self.x0[1]];
        let (pt, g) = self.profile.eval_point(xi, d);
        let e = Complex64::from_polar(1.0, self.phase(t, p));
        let i = Complex64::new(0.0, 1.0);
        let phi = pt.value;
        let v_dot_grad = g[0] * self.v[0] + g[1] * self.v[1];
        let s_dot_grad = g[0] * s[0] + g[1] * s[1];
        WavePoint {
            value: phi * e,
            dt: (-s_dot_grad + i * (self.omega - 0.25 * self.v2()) * phi) * e,
            grad: [
                (g[0] + i * 0.5 * self.v[0] * phi) * e,
                (g[1] + i * 0.5 * self.v[1] * phi) * e,
            ],
            laplacian: (pt.laplacian + i * v_dot_grad - 0.25 * self.v2() * phi) * e,
            extrapolated: pt.extrapolated,
        }
    }

    pub fn value(&self, t: f64, p: [f64; 2]) -> Complex64 {
        let d = self.dim();
        let s = self.speed();
        let xi = [p[0] - s[0] * t - self.x0[0], p[1] - s[1] * t - self.x0[1]];
        let (pt, _) = self.profile.eval_point(xi, d);
        pt.value * Complex64::from_polar(1.0, self.phase(t, p))
    }

    /// The same wave re-parameterized so that sampling at `t` equals sampling
    /// `self` at `t + s`.
    pub fn translate_time(&self, s: f64) -> Self {
        let sp = self.speed();
        Self {
            x0: [self.x0[0] + sp[0] * s, self.x0[1] + sp[1] * s],
            gamma: self.gamma + (self.omega - 0.25 * self.v2()) * s,
            ..self.clone()
        }
    }
}

/// Boosted soliton R(t, x) = φ(x − vt − x₀) e^{i(½v·x − ¼|v|²t + ωt + γ)}.
pub fn boost_soliton(spec: &WaveSpec, t: f64, x: [f64; 2]) -> Result<Complex64> {
    if spec.profile.kind() != ProfileKind::GroundState {
        return Err(NlsError::InvalidParameter("boost_soliton needs a ground-state profile".into()));
    }
    Ok(spec.value(t, x))
}

/// Boosted kink φ_K(x − (c+v)t − x₀) e^{i(½vx − ¼v²t + ωt + γ)}.
pub fn boost_kink(spec: &WaveSpec, t: f64, x: [f64; 2]) -> Result<Complex64> {
    if spec.profile.kind() != ProfileKind::Kink {
        return Err(NlsError::InvalidParameter("boost_kink needs a kink profile".into()));
    }
    Ok(spec.value(t, x))
}

/// Admissibility parameters shared by the train validators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    pub alpha: f64,
    pub d: usize,
    #[serde(default = "default_r0")]
    pub r0: f64,
    #[serde(default = "default_a")]
    pub a: f64,
    /// Exponent α₂ of the nonlinearity (gradient-bound condition).
    #[serde(default)]
    pub alpha2: Option<f64>,
}

fn default_r0() -> f64 {
    2.0
}

fn default_a() -> f64 {
    0.5
}

impl TrainParams {
    pub fn new(alpha: f64, d: usize) -> Self {
        Self {
            alpha,
            d,
            r0: default_r0(),
            a: default_a(),
            alpha2: None,
        }
    }

    /// Exponent 1/α − d/(2r₀) of the integrability sum.
    pub fn integrability_exponent(&self) -> f64 {
        1.0 / self.alpha - self.d as f64 / (2.0 * self.r0)
    }

    /// Exponent 1/α − d/4 of the gradient sum.
    pub fn gradient_exponent(&self) -> f64 {
        1.0 / self.alpha - self.d as f64 / 4.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainLength {
    Finite(usize),
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PhaseRule {
    #[default]
    Zero,
    /// γⱼ taken from the list; missing entries are 0.
    Supplied(Vec<f64>),
}

/// Geometric family ωⱼ = ω₁ ratio^{j−1}, vⱼ₊₁ = vⱼ + v♯/√ωⱼ₊₁, xⱼ = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainFamily {
    pub omega_ratio: f64,
    pub omega1: f64,
    pub v_sharp: f64,
    #[serde(default)]
    pub phases: PhaseRule,
    pub n: TrainLength,
}

impl TrainFamily {
    pub fn omega(&self, j: usize) -> f64 {
        self.omega1 * self.omega_ratio.powi(j as i32 - 1)
    }

    /// Velocities v₁ … v_n of the recurrence (v₁ = 0).
    pub fn velocities(&self, n: usize) -> Vec<f64> {
        let mut v = Vec::with_capacity(n);
        let mut cur = 0.0;
        for j in 1..=n {
            if j > 1 {
                cur += self.v_sharp / self.omega(j).sqrt();
            }
            v.push(cur);
        }
        v
    }

    fn phase(&self, j: usize) -> f64 {
        match &self.phases {
            PhaseRule::Zero => 0.0,
            PhaseRule::Supplied(list) => list.get(j - 1).copied().unwrap_or(0.0),
        }
    }
}

/// Derived admissibility quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Derived {
    pub omega_star: f64,
    pub v_star_t1: f64,
    pub v_star_t2: f64,
    pub big_v_star: f64,
    pub integrability_sum: f64,
    pub r0: f64,
    pub a: f64,
}

#[derive(Debug, Clone)]
pub struct TrainSpec {
    components: Vec<WaveSpec>,
    left_kink: Option<WaveSpec>,
    right_kink: Option<WaveSpec>,
    params: TrainParams,
    family: Option<TrainFamily>,
    tail_bound: Option<f64>,
    derived: Derived,
}

fn japanese(v: [f64; 2]) -> f64 {
    (1.0 + v[0] * v[0] + v[1] * v[1]).sqrt()
}

fn vdist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

impl TrainSpec {
    pub fn new(
        components: Vec<WaveSpec>,
        left_kink: Option<WaveSpec>,
        right_kink: Option<WaveSpec>,
        params: TrainParams,
    ) -> Result<Self> {
        if components.iter().any(|c| c.is_kink()) {
            return Err(NlsError::InvalidParameter(
                "kinks may only appear at the ends of a train".into(),
            ));
        }
        for k in left_kink.iter().chain(&right_kink) {
            if !k.is_kink() || k.dim() != 1 {
                return Err(NlsError::InvalidParameter("end components must be 1-d kinks".into()));
            }
        }
        for w in &components {
            if !(w.omega > 0.0) || (w.omega - w.profile.omega()).abs() > 1e-12 * w.omega {
                return Err(NlsError::InvalidParameter(format!(
                    "component omega {} must be positive and match its profile ({})",
                    w.omega,
                    w.profile.omega()
                )));
            }
        }
        if left_kink.is_some() || right_kink.is_some() {
            let vs: Vec<f64> = left_kink
                .iter()
                .chain(&components)
                .chain(&right_kink)
                .map(|w| w.v[0])
                .collect();
            if vs.windows(2).any(|w| w[1] <= w[0]) {
                return Err(NlsError::InvalidParameter(
                    "kink trains need strictly increasing velocities".into(),
                ));
            }
        }
        let mut spec = Self {
            components,
            left_kink,
            right_kink,
            params,
            family: None,
            tail_bound: None,
            derived: Derived {
                omega_star: 0.0,
                v_star_t1: 0.0,
                v_star_t2: 0.0,
                big_v_star: 0.0,
                integrability_sum: 0.0,
                r0: params.r0,
                a: params.a,
            },
        };
        spec.derived = spec.compute_derived();
        Ok(spec)
    }

    fn compute_derived(&self) -> Derived {
        let members: Vec<&WaveSpec> = self.members().collect();
        let omega_star = 0.5 * self.components.iter().map(|w| w.omega).fold(f64::INFINITY, f64::min);
        let mut v1 = f64::INFINITY;
        let mut v2 = f64::INFINITY;
        for (j, a) in members.iter().enumerate() {
            for (k, b) in members.iter().enumerate() {
                if j == k {
                    continue;
                }
                let dv = vdist(a.v, b.v);
                v1 = v1.min(dv);
                v2 = v2.min(a.omega.sqrt() * dv);
            }
        }
        let p = self.params;
        Derived {
            omega_star,
            v_star_t1: v1,
            v_star_t2: v2,
            big_v_star: members
                .iter()
                .map(|w| japanese(w.v) * w.omega.powf(p.gradient_exponent()))
                .sum(),
            integrability_sum: members.iter().map(|w| w.omega.powf(p.integrability_exponent())).sum(),
            r0: p.r0,
            a: p.a,
        }
    }

    /// Left kink, components, right kink in order.
    pub fn members(&self) -> impl Iterator<Item = &WaveSpec> {
        self.left_kink.iter().chain(&self.components).chain(&self.right_kink)
    }

    pub fn components(&self) -> &[WaveSpec] {
        &self.components
    }
    pub fn left_kink(&self) -> Option<&WaveSpec> {
        self.left_kink.as_ref()
    }
    pub fn right_kink(&self) -> Option<&WaveSpec> {
        self.right_kink.as_ref()
    }
    pub fn params(&self) -> TrainParams {
        self.params
    }
    pub fn family(&self) -> Option<&TrainFamily> {
        self.family.as_ref()
    }
    pub fn tail_bound(&self) -> Option<f64> {
        self.tail_bound
    }
    pub fn derived(&self) -> Derived {
        self.derived
    }
    pub fn is_infinite(&self) -> bool {
        matches!(self.family, Some(TrainFamily { n: TrainLength::Infinite, .. })) && self.tail_bound.is_none()
    }

    /// Same train with every component shifted in time by `s`.
    pub fn translate_time(&self, s: f64) -> Self {
        Self {
            components: self.components.iter().map(|w| w.translate_time(s)).collect(),
            left_kink: self.left_kink.as_ref().map(|w| w.translate_time(s)),
            right_kink: self.right_kink.as_ref().map(|w| w.translate_time(s)),
            ..self.clone()
        }
    }

    /// Adds `w` to every velocity along the first axis (Galilean boost of the train).
    pub fn with_velocity_shift(&self, w: f64) -> Result<Self> {
        let shift = |s: &WaveSpec| WaveSpec {
            v: [s.v[0] + w, s.v[1]],
            ..s.clone()
        };
        let mut out = Self::new(
            self.components.iter().map(shift).collect(),
            self.left_kink.as_ref().map(shift),
            self.right_kink.as_ref().map(shift),
            self.params,
        )?;
        out.family = self.family.clone();
        out.tail_bound = self.tail_bound;
        Ok(out)
    }

    /// Replaces positions so that every component passes x = 0 at time `t_meet`.
    pub fn with_meeting_time(&self, t_meet: f64) -> Result<Self> {
        let place = |s: &WaveSpec| WaveSpec {
            x0: [-(s.v[0] + s.c) * t_meet, -s.v[1] * t_meet],
            ..s.clone()
        };
        let mut out = Self::new(
            self.components.iter().map(place).collect(),
            self.left_kink.as_ref().map(place),
            self.right_kink.as_ref().map(place),
            self.params,
        )?;
        out.family = self.family.clone();
        out.tail_bound = self.tail_bound;
        Ok(out)
    }

    /// First `n` components (kinks kept).
    pub fn take(&self, n: usize) -> Result<Self> {
        let mut out = Self::new(
            self.components.iter().take(n).cloned().collect(),
            self.left_kink.clone(),
            self.right_kink.clone(),
            self.params,
        )?;
        out.family = self.family.clone();
        out.tail_bound = self.tail_bound;
        Ok(out)
    }
}

/// R(t, ·) = Σⱼ Rⱼ(t, ·) (kinks included) sampled on the grid.
pub fn sum_profile(train: &TrainSpec, t: f64, grid: &Grid) -> Result<Field> {
    if train.is_infinite() {
        return Err(NlsError::InfiniteTrain);
    }
    check_dims(train, grid)?;
    let members: Vec<&WaveSpec> = train.members().collect();
    Ok(Field::from_fn(grid, t, |p| members.iter().map(|w| w.value(t, p)).sum()))
}

fn check_dims(train: &TrainSpec, grid: &Grid) -> Result<()> {
    if train.members().any(|w| w.dim() != grid.dim()) {
        return Err(NlsError::GridMismatch("train and grid dimensions differ".into()));
    }
    Ok(())
}

/// Boundary magnitude of one localized component relative to its peak.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryWarning {
    pub component: usize,
    pub ratio: f64,
}

/// Localized components whose boundary value exceeds 1e−10 of their peak.
pub fn boundary_report(train: &TrainSpec, t: f64, grid: &Grid) -> Vec<BoundaryWarning> {
    let mask = grid.boundary_mask(0.0);
    let points = grid.points();
    train
        .components()
        .iter()
        .enumerate()
        .filter_map(|(j, w)| {
            let peak = w.profile.value(0.0).abs();
            let edge = points
                .iter()
                .zip(&mask)
                .filter(|(_, m)| **m)
                .map(|(p, _)| w.value(t, *p).norm())
                .fold(0.0f64, f64::max);
            let ratio = edge / peak;
            (ratio > 1e-10).then_some(BoundaryWarning { component: j, ratio })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Theorem1Report {
    pub omega_star: f64,
    /// +∞ when fewer than two components (unconstrained).
    pub v_star: f64,
    pub unconstrained: bool,
    pub colliding: bool,
    pub ground_states_only: bool,
    pub admissible: bool,
}

/// ω⋆ = ½ min ωⱼ, v⋆ = min |vⱼ − v_k|.
pub fn validate_theorem1(train: &TrainSpec) -> Result<Theorem1Report> {
    if train.components.is_empty() || train.left_kink.is_some() || train.right_kink.is_some() {
        return Err(NlsError::InvalidParameter(
            "finite multi-soliton validation needs N ≥ 1 components and no kinks".into(),
        ));
    }
    let d = train.derived;
    let ground_states_only = train.components.iter().all(|w| w.profile.kind() == ProfileKind::GroundState);
    let colliding = d.v_star_t1 == 0.0;
    Ok(Theorem1Report {
        omega_star: d.omega_star,
        v_star: d.v_star_t1,
        unconstrained: d.v_star_t1.is_infinite(),
        colliding,
        ground_states_only,
        admissible: ground_states_only && !colliding,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct UniformBound {
    pub constants: Vec<f64>,
    pub c_max: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Integrability {
    pub exponent: f64,
    pub partial_sums: Vec<f64>,
    pub tail_bound: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Speeds {
    pub v_star: f64,
    pub threshold: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GradientBound {
    pub exponent: f64,
    pub partial_sum: f64,
    /// Whether the tail of the generated family converges.
    pub convergent: Option<bool>,
    /// The bound is only needed when α < α₂/(2+α₂).
    pub required: bool,
    pub bracket: &'static str,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Theorem2Report {
    pub uniform_bound: UniformBound,
    pub integrability: Integrability,
    pub speeds: Speeds,
    pub gradient: GradientBound,
    pub alpha_1_5: Option<f64>,
    pub r0: f64,
    pub a: f64,
    pub pass: bool,
}

/// Checks the four infinite-train conditions on the stored components (and the
/// geometric tail for generated families). `v_sharp` is the speed threshold.
pub fn validate_theorem2(
    train: &TrainSpec,
    alpha: f64,
    r0: f64,
    a: f64,
    v_sharp: Option<f64>,
) -> Result<Theorem2Report> {
    let d = train.params.d;
    if !(r0 > 1.0f64.max(d as f64 * alpha / 2.0)) {
        return Err(NlsError::InvalidParameter(format!(
            "r0 = {r0} must exceed max(1, d*alpha/2) = {}",
            1.0f64.max(d as f64 * alpha / 2.0)
        )));
    }
    if !(a > 0.0 && a < 1.0) {
        return Err(NlsError::InvalidParameter(format!("a = {a} must lie in (0, 1)")));
    }
    let params = TrainParams {
        alpha,
        r0,
        a,
        ..train.params
    };
    // (i) |φ| + ω^{−1/2}|∇φ| ≤ C ω^{1/α} e^{−a√ω|x|}
    let constants: Vec<f64> = train
        .components
        .iter()
        .map(|w| uniform_constant(&w.profile, alpha, a))
        .collect();
    let c_max = constants.iter().copied().fold(0.0, f64::max);
    let uniform_bound = UniformBound {
        pass: constants.iter().all(|c| c.is_finite()),
        constants,
        c_max,
    };
    // (ii) Σ ωⱼ^{1/α − d/(2r₀)}
    let e = params.integrability_exponent();
    let mut partial_sums = Vec::new();
    let mut acc = 0.0;
    for w in train.members() {
        acc += w.omega.powf(e);
        partial_sums.push(acc);
    }
    let geometric = train.family.as_ref();
    let tail_bound = geometric.map(|f| {
        let q = f.omega_ratio.powf(e);
        let n = train.components.len();
        if e > 0.0 {
            f.omega1.powf(e) * q.powi(n as i32) / (1.0 - q)
        } else {
            f64::INFINITY
        }
    });
    let integrability = Integrability {
        exponent: e,
        pass: e > 0.0 && acc.is_finite() && tail_bound.is_none_or(|t| t.is_finite()),
        partial_sums,
        tail_bound,
    };
    // (iii) v⋆ = inf √ωⱼ |v_k − vⱼ|
    let members: Vec<&WaveSpec> = train.members().collect();
    let mut v_star = f64::INFINITY;
    for (j, p) in members.iter().enumerate() {
        for (k, q) in members.iter().enumerate() {
            if j != k {
                v_star = v_star.min(p.omega.sqrt() * vdist(p.v, q.v));
            }
        }
    }
    let speeds = Speeds {
        v_star,
        threshold: v_sharp,
        pass: v_sharp.map_or(v_star > 0.0, |s| v_star >= s * (1.0 - 1e-12)),
    };
    // (iv) V⋆ = Σ ⟨vⱼ⟩ ωⱼ^{1/α − d/4}
    let ge = params.gradient_exponent();
    let partial: f64 = members.iter().map(|w| japanese(w.v) * w.omega.powf(ge)).sum();
    let alpha2 = params.alpha2.unwrap_or(f64::INFINITY);
    let limit = if alpha2.is_infinite() { 1.0 } else { alpha2 / (2.0 + alpha2) };
    let required = alpha < limit;
    // generated family: ⟨vⱼ⟩ ~ ratio^{−j/2}, so terms behave like ratio^{j(e − 1/2)}
    let convergent = geometric.map(|_| ge - 0.5 > 0.0);
    let gradient = GradientBound {
        exponent: ge,
        partial_sum: partial,
        convergent,
        required,
        bracket: "sqrt(1+|v|^2)",
        pass: !required || (partial.is_finite() && convergent.unwrap_or(true)),
    };
    let pass = uniform_bound.pass && integrability.pass && speeds.pass && gradient.pass;
    Ok(Theorem2Report {
        uniform_bound,
        integrability,
        speeds,
        gradient,
        alpha_1_5: None,
        r0,
        a,
        pass,
    })
}

fn uniform_constant(p: &Profile, alpha: f64, a: f64) -> f64 {
    let w = p.omega();
    let scale = w.powf(1.0 / alpha);
    let coords = p.sample_coords();
    coords
        .iter()
        .map(|&x| {
            let pt = p.eval(x);
            let lhs = pt.value.norm() + pt.d1.norm() / w.sqrt();
            lhs / (scale * (-a * w.sqrt() * x.abs()).exp())
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentWindow {
    /// 0 < α < 4/3
    Small,
    /// 4/3 ≤ α < √2 < β = 2/α
    Intermediate,
    Outside,
}

#[derive(Debug, Clone, Serialize)]
pub struct Theorem4Report {
    pub window: ExponentWindow,
    pub left_kink_present: bool,
    pub train: Option<Theorem2Report>,
    pub admissible: bool,
}

/// Exponent window for infinite kink–soliton trains.
pub fn exponent_window(alpha: f64, beta: f64) -> ExponentWindow {
    if alpha > 0.0 && alpha < 4.0 / 3.0 {
        ExponentWindow::Small
    } else if (4.0 / 3.0..2f64.sqrt()).contains(&alpha)
        && (beta - 2.0 / alpha).abs() <= 1e-9 * beta
        && beta > 2f64.sqrt()
    {
        ExponentWindow::Intermediate
    } else {
        ExponentWindow::Outside
    }
}

/// Exponent window plus the infinite-train conditions with the kink counted as j = 0.
pub fn validate_theorem4(train: &TrainSpec, alpha: f64, beta: f64, v_sharp: Option<f64>) -> Theorem4Report {
    let window = exponent_window(alpha, beta);
    let left = train.left_kink.is_some();
    let p = train.params;
    let report = validate_theorem2(train, alpha, p.r0, p.a, v_sharp).ok();
    let admissible = window != ExponentWindow::Outside && left && report.as_ref().is_some_and(|r| r.pass);
    Theorem4Report {
        window,
        left_kink_present: left,
        train: report,
        admissible,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Theorem3Report {
    pub strictly_increasing: bool,
    pub v_star: f64,
    pub kinks: usize,
}

/// Ordering condition v₀ < v₁ < … < v_{N+1} for finite kink–soliton trains.
pub fn validate_theorem3(train: &TrainSpec) -> Theorem3Report {
    let vs: Vec<f64> = train.members().map(|w| w.v[0]).collect();
    Theorem3Report {
        strictly_increasing: vs.windows(2).all(|w| w[1] > w[0]),
        v_star: train.derived.v_star_t1,
        kinks: train.left_kink.iter().count() + train.right_kink.iter().count(),
    }
}

/// Ground state for (nl, ω, d): closed form for 1-d powers, rescaled shooting for
/// other power cases, direct shooting otherwise.
pub fn ground_state(nl: &Nonlinearity, omega: f64, d: usize) -> Result<Arc<Profile>> {
    let width = 1.0 / omega.sqrt();
    match (power_exponent(nl), d) {
        (Some(alpha), 1) => {
            let grid = Grid::line(128.0 * width, 4096)?;
            Ok(Arc::new(ground_state_power_1d(alpha, omega, &grid)?))
        }
        (Some(alpha), _) => {
            let unit = ground_state_shoot(nl, 1.0, d, RadialGrid { r_max: 50.0, count: 5001 })?;
            Ok(Arc::new(rescale_power_ground_state(&unit, alpha, omega)))
        }
        _ => Ok(Arc::new(ground_state_shoot(
            nl,
            omega,
            d,
            RadialGrid {
                r_max: 50.0 * width,
                count: 5001,
            },
        )?)),
    }
}

/// Exponent α used by the admissibility formulas (lowest power of g).
pub fn leading_exponent(nl: &Nonlinearity) -> Option<f64> {
    nl.exponents().0
}

/// Builds the generated family; infinite families stay unrealized until truncated.
pub fn generate_train_params(family: &TrainFamily, nl: &Nonlinearity, params: TrainParams) -> Result<TrainSpec> {
    if !(family.omega_ratio > 0.0 && family.omega_ratio < 1.0) {
        return Err(NlsError::InvalidParameter(format!(
            "omega_ratio must lie in (0, 1), got {}",
            family.omega_ratio
        )));
    }
    if !(family.omega1 > 0.0 && family.v_sharp > 0.0) {
        return Err(NlsError::InvalidParameter("omega1 and v_sharp must be positive".into()));
    }
    let n = match family.n {
        TrainLength::Finite(0) => {
            return Err(NlsError::InvalidParameter("a train needs at least one component".into()))
        }
        TrainLength::Finite(n) => n,
        TrainLength::Infinite => 0,
    };
    let mut spec = realize_family(family, nl, params, n)?;
    spec.family = Some(family.clone());
    Ok(spec)
}

fn realize_family(family: &TrainFamily, nl: &Nonlinearity, params: TrainParams, n: usize) -> Result<TrainSpec> {
    let vs = family.velocities(n);
    let mut comps = Vec::with_capacity(n);
    for j in 1..=n {
        let profile = ground_state(nl, family.omega(j), params.d)?;
        comps.push(WaveSpec::new(profile, family.phase(j), [0.0, 0.0], [vs[j - 1], 0.0]));
    }
    TrainSpec::new(comps, None, None, params)
}

/// Smallest N whose integrability tail Σ_{j>N} ωⱼ^{1/α − d/(2r₀)} is below `eps_tail`.
pub fn truncation_size(family: &TrainFamily, params: TrainParams, eps_tail: f64) -> Result<(usize, f64)> {
    if !(eps_tail > 0.0) {
        return Err(NlsError::InvalidParameter(format!("eps_tail must be positive, got {eps_tail}")));
    }
    let e = params.integrability_exponent();
    if !(e > 0.0) {
        return Err(NlsError::InvalidParameter(format!(
            "integrability exponent {e} is not positive: the sum diverges"
        )));
    }
    let q = family.omega_ratio.powf(e);
    let tail = |n: usize| family.omega1.powf(e) * q.powi(n as i32) / (1.0 - q);
    let mut n = 1;
    while tail(n) >= eps_tail {
        n += 1;
        if n > 100_000 {
            return Err(NlsError::InvalidParameter("truncation does not terminate".into()));
        }
    }
    Ok((n, tail(n)))
}

/// Realizes the first N components of an infinite family, N from the tail budget.
pub fn truncate_train(train: &TrainSpec, nl: &Nonlinearity, eps_tail: f64) -> Result<TrainSpec> {
    let family = train
        .family
        .clone()
        .ok_or_else(|| NlsError::InvalidParameter("truncation needs a generated family".into()))?;
    let (n, tail) = truncation_size(&family, train.params, eps_tail)?;
    let mut spec = realize_family(&family, nl, train.params, n)?;
    spec.family = Some(family);
    spec.tail_bound = Some(tail);
    Ok(spec)
}
