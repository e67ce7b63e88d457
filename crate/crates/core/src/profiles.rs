//! Stationary profiles: ground states of −Δφ + ωφ − f(φ) = 0 and kinks.
//!
//! Sampled profiles store (φ, φ', φ'') at every node, with φ'' taken from the
//! stationary equation, and are evaluated by quintic Hermite interpolation.
//! Outside the sampled window they continue with the linearized exponential
//! tails.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NlsError, Result};
use crate::grid::Grid;
use crate::nonlinearity::{KinkConstants, Nonlinearity, NonlinearityKind};
use crate::numerics::{Advance, Dopri5};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    GroundState,
    Kink,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum ClosedForm {
    /// ((α+2)ω/2)^{1/α} sech^{2/α}(α√ω x/2)
    PowerSech { alpha: f64, omega: f64 },
    /// √((2−c²)/2) tanh(x√(2−c²)/2) + ic/√2
    GpKink { c: f64 },
}

/// Sample layout: a signed line `origin + i·spacing` or radii `i·spacing`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Geometry {
    Line { origin: f64, spacing: f64 },
    Radial { spacing: f64 },
}

/// Radial sampling `r_i = i·r_max/(count−1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    pub r_max: f64,
    pub count: usize,
}

impl RadialGrid {
    pub fn spacing(&self) -> f64 {
        self.r_max / (self.count - 1) as f64
    }
}

/// Value, first derivative (d/dx or d/dr) and Laplacian of a profile at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub value: Complex64,
    pub d1: Complex64,
    pub laplacian: Complex64,
    pub extrapolated: bool,
}

#[derive(Debug, Clone)]
pub struct Profile {
    kind: ProfileKind,
    omega: f64,
    dim: usize,
    geometry: Geometry,
    values: Vec<f64>,
    slopes: Vec<f64>,
    curvatures: Vec<f64>,
    complex_values: Option<Vec<Complex64>>,
    closed_form: Option<ClosedForm>,
    limit_minus_inf: Complex64,
    limit_plus_inf: Complex64,
    decay_rate_a: f64,
    left_rate: f64,
    residual: f64,
    nl: Option<Nonlinearity>,
}

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn creal(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

impl Profile {
    pub fn kind(&self) -> ProfileKind {
        self.kind
    }
    pub fn omega(&self) -> f64 {
        self.omega
    }
    /// Spatial dimension of the stationary problem.
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn geometry(&self) -> Geometry {
        self.geometry
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }
    pub fn complex_values(&self) -> Option<&[Complex64]> {
        self.complex_values.as_deref()
    }
    pub fn closed_form(&self) -> Option<ClosedForm> {
        self.closed_form
    }
    pub fn limit_minus_inf(&self) -> Complex64 {
        self.limit_minus_inf
    }
    pub fn limit_plus_inf(&self) -> Complex64 {
        self.limit_plus_inf
    }
    /// Decay rate fitted on the outermost samples.
    pub fn decay_rate_a(&self) -> f64 {
        self.decay_rate_a
    }
    /// Sup of the stationary residual recorded at construction.
    pub fn residual(&self) -> f64 {
        self.residual
    }
    pub fn is_complex(&self) -> bool {
        self.complex_values.is_some()
    }

    /// Intrinsic velocity carried by the closed form (GP kinks), 0 otherwise.
    pub fn intrinsic_velocity(&self) -> f64 {
        match self.closed_form {
            Some(ClosedForm::GpKink { c }) => c,
            _ => 0.0,
        }
    }

    /// Sample coordinates (signed for lines, radii for radial profiles).
    pub fn sample_coords(&self) -> Vec<f64> {
        let n = self.values.len().max(self.complex_values.as_ref().map_or(0, |v| v.len()));
        match self.geometry {
            Geometry::Line { origin, spacing } => (0..n).map(|i| origin + i as f64 * spacing).collect(),
            Geometry::Radial { spacing } => (0..n).map(|i| i as f64 * spacing).collect(),
        }
    }

    /// Evaluates at a signed coordinate (d = 1) or radius (d ≥ 2).
    pub fn eval(&self, x: f64) -> ProfilePoint {
        if let Some(cf) = self.closed_form {
            return eval_closed_form(cf, x);
        }
        match self.geometry {
            Geometry::Line { origin, spacing } => self.eval_line(x, origin, spacing),
            Geometry::Radial { spacing } => self.eval_radial(x.abs(), spacing),
        }
    }

    /// Real part of the profile value.
    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).value.re
    }

    /// Evaluates at a point of the plane or line (radial profiles use |x|).
    pub fn eval_point(&self, p: [f64; 2], d: usize) -> (ProfilePoint, [Complex64; 2]) {
        if d == 1 {
            let pt = self.eval(p[0]);
            return (pt, [pt.d1, czero()]);
        }
        let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
        let pt = self.eval(r);
        if r == 0.0 {
            return (pt, [czero(), czero()]);
        }
        (pt, [pt.d1 * (p[0] / r), pt.d1 * (p[1] / r)])
    }

    fn second_derivative(&self, phi: f64, dphi: f64, r: f64) -> f64 {
        let Some(nl) = &self.nl else { return f64::NAN };
        let f = nl.f_real(phi).unwrap_or(f64::NAN);
        let lap = self.omega * phi - f;
        match self.geometry {
            Geometry::Radial { .. } if self.dim > 1 => {
                if r == 0.0 {
                    lap / self.dim as f64
                } else {
                    lap - (self.dim as f64 - 1.0) / r * dphi
                }
            }
            _ => lap,
        }
    }

    fn laplacian_from(&self, phi: f64, dphi: f64, d2: f64, r: f64) -> f64 {
        match self.geometry {
            Geometry::Radial { .. } if self.dim > 1 => {
                if r == 0.0 {
                    self.dim as f64 * d2
                } else {
                    d2 + (self.dim as f64 - 1.0) / r * dphi
                }
            }
            _ => {
                let _ = phi;
                d2
            }
        }
    }

    fn hermite(&self, i: usize, t: f64, h: f64) -> (f64, f64, f64) {
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (p0, p1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let (c0, c1) = (self.curvatures[i] * h * h, self.curvatures[i + 1] * h * h);
        let (t2, t3, t4, t5) = (t * t, t * t * t, t.powi(4), t.powi(5));
        let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
        let h3 = 0.5 * (t3 - 2.0 * t4 + t5);
        let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        let h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
        let d0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
        let d1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
        let d2 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4);
        let d3 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4);
        let d4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
        let d5 = 30.0 * t2 - 60.0 * t3 + 30.0 * t4;
        let s0 = -60.0 * t + 180.0 * t2 - 120.0 * t3;
        let s1 = -36.0 * t + 96.0 * t2 - 60.0 * t3;
        let s2 = 0.5 * (2.0 - 18.0 * t + 36.0 * t2 - 20.0 * t3);
        let s3 = 0.5 * (6.0 * t - 24.0 * t2 + 20.0 * t3);
        let s4 = -24.0 * t + 84.0 * t2 - 60.0 * t3;
        let s5 = 60.0 * t - 180.0 * t2 + 120.0 * t3;
        let v = h0 * y0 + h1 * p0 + h2 * c0 + h3 * c1 + h4 * p1 + h5 * y1;
        let dv = (d0 * y0 + d1 * p0 + d2 * c0 + d3 * c1 + d4 * p1 + d5 * y1) / h;
        let sv = (s0 * y0 + s1 * p0 + s2 * c0 + s3 * c1 + s4 * p1 + s5 * y1) / (h * h);
        (v, dv, sv)
    }

    fn eval_line(&self, x: f64, origin: f64, h: f64) -> ProfilePoint {
        let n = self.values.len();
        let last = origin + (n - 1) as f64 * h;
        if x < origin || x > last {
            return self.eval_tail(x, origin, last);
        }
        let s = (x - origin) / h;
        let i = (s.floor() as usize).min(n - 2);
        let (v, dv, d2) = self.hermite(i, s - i as f64, h);
        ProfilePoint {
            value: creal(v),
            d1: creal(dv),
            laplacian: creal(d2),
            extrapolated: false,
        }
    }

    fn eval_radial(&self, r: f64, h: f64) -> ProfilePoint {
        let n = self.values.len();
        let last = (n - 1) as f64 * h;
        if r > last {
            return self.eval_tail(r, 0.0, last);
        }
        let s = r / h;
        let i = (s.floor() as usize).min(n - 2);
        let (v, dv, d2) = self.hermite(i, s - i as f64, h);
        ProfilePoint {
            value: creal(v),
            d1: creal(dv),
            laplacian: creal(self.laplacian_from(v, dv, d2, r)),
            extrapolated: false,
        }
    }

    fn eval_tail(&self, x: f64, first: f64, last: f64) -> ProfilePoint {
        let n = self.values.len();
        let d = self.dim as f64;
        if x > last {
            // decaying tail φ_last (r_last/r)^{(d−1)/2} e^{−κ(r−r_last)}
            let k = self.omega.sqrt();
            let m = 0.5 * (d - 1.0);
            let base = self.values[n - 1];
            let shape = (last / x).powf(m) * (-k * (x - last)).exp();
            let v = base * shape;
            let dv = v * (-k - m / x);
            let d2 = v * ((k + m / x).powi(2) + m / (x * x));
            let lap = if self.dim > 1 { d2 + (d - 1.0) / x * dv } else { d2 };
            ProfilePoint {
                value: creal(v),
                d1: creal(dv),
                laplacian: creal(lap),
                extrapolated: true,
            }
        } else {
            match self.kind {
                ProfileKind::Kink => {
                    // approach to the left limit b at the rate √h'(b)
                    let b = self.limit_minus_inf.re;
                    let k = self.left_rate;
                    let gap = (b - self.values[0]) * (k * (x - first)).exp();
                    ProfilePoint {
                        value: creal(b - gap),
                        d1: creal(-k * gap),
                        laplacian: creal(-k * k * gap),
                        extrapolated: true,
                    }
                }
                ProfileKind::GroundState => {
                    // even extension of a line-sampled ground state
                    let mut p = self.eval_tail(-x, first, last);
                    p.d1 = -p.d1;
                    p
                }
            }
        }
    }

    /// Sup over interior samples of the stationary residual
    /// −Δφ + ωφ − f(φ) (closed forms analytic, sampled ones by an 8th-order stencil).
    pub fn stationary_residual(&self, nl: &Nonlinearity) -> f64 {
        if let Some(cf) = self.closed_form {
            return match cf {
                ClosedForm::GpKink { c } => self
                    .sample_coords()
                    .iter()
                    .map(|&x| {
                        let p = eval_closed_form(cf, x);
                        // −φ'' + icφ' − f(φ) for the travelling kink (ω = 0)
                        let f = nl.eval_f(p.value).unwrap_or(creal(f64::NAN));
                        (-p.laplacian + Complex64::new(0.0, c) * p.d1 - f).norm()
                    })
                    .fold(0.0, f64::max),
                ClosedForm::PowerSech { .. } => self
                    .sample_coords()
                    .iter()
                    .map(|&x| {
                        let p = eval_closed_form(cf, x);
                        let f = nl.f_real(p.value.re).unwrap_or(f64::NAN);
                        (-p.laplacian.re + self.omega * p.value.re - f).abs()
                    })
                    .fold(0.0, f64::max),
            };
        }
        fd_residual(
            &self.values,
            self.sample_coords(),
            match self.geometry {
                Geometry::Line { spacing, .. } | Geometry::Radial { spacing } => spacing,
            },
            self.dim,
            matches!(self.geometry, Geometry::Radial { .. }),
            self.omega,
            nl,
        )
    }

    fn finish_sampled(mut self, nl: &Nonlinearity) -> Self {
        let coords = self.sample_coords();
        self.curvatures = coords
            .iter()
            .zip(self.values.iter().zip(&self.slopes))
            .map(|(&r, (&v, &dv))| self.second_derivative(v, dv, r))
            .collect();
        self.residual = self.stationary_residual(nl);
        self.decay_rate_a = fitted_decay(&self.values, &coords);
        self
    }

    /// Builds a sampled profile from imported values (derivatives by finite differences).
    pub fn from_samples(
        kind: ProfileKind,
        omega: f64,
        dim: usize,
        geometry: Geometry,
        values: Vec<f64>,
    ) -> Result<Self> {
        if values.len() < 9 {
            return Err(NlsError::InsufficientData("profile needs at least 9 samples".into()));
        }
        let h = match geometry {
            Geometry::Line { spacing, .. } | Geometry::Radial { spacing } => spacing,
        };
        let slopes = fd_derivative(&values, h, 1);
        let curvatures = fd_derivative(&values, h, 2);
        let n = values.len();
        let (lm, lp) = match kind {
            ProfileKind::GroundState => (0.0, 0.0),
            ProfileKind::Kink => (values[0], values[n - 1]),
        };
        let coords: Vec<f64> = match geometry {
            Geometry::Line { origin, spacing } => (0..n).map(|i| origin + i as f64 * spacing).collect(),
            Geometry::Radial { spacing } => (0..n).map(|i| i as f64 * spacing).collect(),
        };
        let left_rate = if kind == ProfileKind::Kink {
            let k = 8.min(n - 1);
            ((lm - values[k]).abs().ln() - (lm - values[1]).abs().ln()).abs() / ((k - 1) as f64 * h)
        } else {
            omega.sqrt()
        };
        Ok(Self {
            kind,
            omega,
            dim,
            geometry,
            decay_rate_a: fitted_decay(&values, &coords),
            values,
            slopes,
            curvatures,
            complex_values: None,
            closed_form: None,
            limit_minus_inf: creal(lm),
            limit_plus_inf: creal(lp),
            left_rate: if left_rate.is_finite() { left_rate } else { omega.sqrt() },
            residual: f64::NAN,
            nl: None,
        })
    }

    /// Complex GP kink rebuilt from imported samples; evaluation uses the closed form.
    pub fn gp_from_samples(c: f64, geometry: Geometry, values: Vec<Complex64>) -> Result<Self> {
        let Geometry::Line { origin, spacing } = geometry else {
            return Err(NlsError::Format("GP kink samples must be on a line".into()));
        };
        let mut p = gp_kink_on(c, origin, spacing, values.len())?;
        p.values = values.iter().map(|z| z.re).collect();
        p.complex_values = Some(values);
        Ok(p)
    }
}

fn fitted_decay(values: &[f64], coords: &[f64]) -> f64 {
    let n = values.len();
    if n < 10 {
        return f64::NAN;
    }
    let (i, j) = (n - 1, n - 1 - n / 20.max(1));
    let (a, b) = (values[i].abs(), values[j].abs());
    if a <= 0.0 || b <= 0.0 || a == b {
        return f64::NAN;
    }
    -(a.ln() - b.ln()) / (coords[i] - coords[j])
}

fn eval_closed_form(cf: ClosedForm, x: f64) -> ProfilePoint {
    match cf {
        ClosedForm::PowerSech { alpha, omega } => {
            let p = 2.0 / alpha;
            let k = 0.5 * alpha * omega.sqrt();
            let a = ((alpha + 2.0) * omega / 2.0).powf(1.0 / alpha);
            let z = k * x;
            let sech = 1.0 / z.cosh();
            let th = z.tanh();
            let sp = sech.powf(p);
            let v = a * sp;
            let d1 = -a * p * k * sp * th;
            let d2 = a * p * k * k * sp * (p - (p + 1.0) * sech * sech);
            ProfilePoint {
                value: creal(v),
                d1: creal(d1),
                laplacian: creal(d2),
                extrapolated: false,
            }
        }
        ClosedForm::GpKink { c } => {
            let s = 2.0 - c * c;
            let amp = (s / 2.0).sqrt();
            let k = s.sqrt() / 2.0;
            let th = (k * x).tanh();
            let sech2 = 1.0 - th * th;
            ProfilePoint {
                value: Complex64::new(amp * th, c / 2f64.sqrt()),
                d1: creal(amp * k * sech2),
                laplacian: creal(-2.0 * amp * k * k * th * sech2),
                extrapolated: false,
            }
        }
    }
}

const FD1: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
const FD2: [f64; 5] = [-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];

/// Centered 8th-order first or second derivative, lower order near the ends.
fn fd_derivative(v: &[f64], h: f64, order: usize) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            if i >= 4 && i + 4 < n {
                if order == 1 {
                    (1..=4).map(|k| FD1[k - 1] * (v[i + k] - v[i - k])).sum::<f64>() / h
                } else {
                    (FD2[0] * v[i] + (1..=4).map(|k| FD2[k] * (v[i + k] + v[i - k])).sum::<f64>()) / (h * h)
                }
            } else {
                let i = i.clamp(1, n - 2);
                if order == 1 {
                    (v[i + 1] - v[i - 1]) / (2.0 * h)
                } else {
                    (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h)
                }
            }
        })
        .collect()
}

fn fd_residual(
    values: &[f64],
    coords: Vec<f64>,
    h: f64,
    dim: usize,
    radial: bool,
    omega: f64,
    nl: &Nonlinearity,
) -> f64 {
    let n = values.len();
    let d1 = fd_derivative(values, h, 1);
    let d2 = fd_derivative(values, h, 2);
    let mut worst = 0.0f64;
    for i in 4..n.saturating_sub(4) {
        let r = coords[i];
        let mut lap = d2[i];
        if radial && dim > 1 {
            lap += (dim as f64 - 1.0) / r * d1[i];
        }
        let f = nl.f_real(values[i]).unwrap_or(f64::NAN);
        let res = (-lap + omega * values[i] - f).abs();
        worst = if res.is_nan() { f64::NAN } else { worst.max(res) };
    }
    worst
}

fn line_params(grid: &Grid) -> Result<(f64, f64, usize)> {
    if grid.dim() != 1 {
        return Err(NlsError::InvalidParameter("profile grids are one-dimensional".into()));
    }
    Ok((-0.5 * grid.lengths()[0], grid.spacing(0), grid.counts()[0]))
}

/// Closed-form ground state of the 1-d power equation, sampled on `grid`.
pub fn ground_state_power_1d(alpha: f64, omega: f64, grid: &Grid) -> Result<Profile> {
    if !(alpha > 0.0 && omega > 0.0) {
        return Err(NlsError::InvalidParameter(format!(
            "need alpha > 0 and omega > 0, got ({alpha}, {omega})"
        )));
    }
    let (origin, spacing, n) = line_params(grid)?;
    let cf = ClosedForm::PowerSech { alpha, omega };
    let coords: Vec<f64> = (0..n).map(|i| origin + i as f64 * spacing).collect();
    let pts: Vec<ProfilePoint> = coords.iter().map(|&x| eval_closed_form(cf, x)).collect();
    let values: Vec<f64> = pts.iter().map(|p| p.value.re).collect();
    let peak = eval_closed_form(cf, 0.0).value.re;
    let boundary = values[0].max(eval_closed_form(cf, -origin).value.re);
    if boundary > 1e-12 * peak {
        return Err(NlsError::Truncation {
            boundary,
            threshold: 1e-12 * peak,
        });
    }
    let nl = Nonlinearity::power(alpha)?;
    let mut p = Profile {
        kind: ProfileKind::GroundState,
        omega,
        dim: 1,
        geometry: Geometry::Line { origin, spacing },
        slopes: pts.iter().map(|p| p.d1.re).collect(),
        curvatures: pts.iter().map(|p| p.laplacian.re).collect(),
        decay_rate_a: fitted_decay(&values, &coords),
        values,
        complex_values: None,
        closed_form: Some(cf),
        limit_minus_inf: czero(),
        limit_plus_inf: czero(),
        left_rate: omega.sqrt(),
        residual: 0.0,
        nl: Some(nl.clone()),
    };
    p.residual = p.stationary_residual(&nl);
    Ok(p)
}

/// Outcome of one shooting trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shot {
    /// φ crosses zero.
    Over,
    /// φ' turns positive before reaching zero.
    Under,
}

struct Shooter<'a> {
    nl: &'a Nonlinearity,
    omega: f64,
    d: usize,
    r_max: f64,
}

impl Shooter<'_> {
    fn rhs(&self, r: f64, y: &[f64; 2]) -> [f64; 2] {
        let f = self.nl.f_real(y[0]).unwrap_or(f64::NAN);
        let damp = if self.d > 1 { (self.d as f64 - 1.0) / r * y[1] } else { 0.0 };
        [y[1], -damp + self.omega * y[0] - f]
    }

    fn start(&self, p: f64) -> (f64, [f64; 2]) {
        let r0 = 1e-3 * (1.0f64).min(1.0 / self.omega.sqrt());
        // φ = p + a r² + c r⁴ from Δr^k = k(k+d−2) r^{k−2}
        let d = self.d as f64;
        let a = (self.omega * p - self.nl.f_real(p).unwrap_or(f64::NAN)) / (2.0 * d);
        let slope = self.omega - self.nl.f_prime_real(p).unwrap_or(f64::NAN);
        let c = slope * a / (4.0 * (d + 2.0));
        let r2 = r0 * r0;
        (r0, [p + a * r2 + c * r2 * r2, 2.0 * a * r0 + 4.0 * c * r2 * r0])
    }

    fn classify(&self, p: f64) -> Result<Shot> {
        let (mut r, mut y) = self.start(p);
        if y[1] > 0.0 {
            return Ok(Shot::Under);
        }
        let mut ode = Dopri5::with_tolerance(1e-12, 1e-12);
        ode.h = 1e-3;
        let mut hit = None;
        let out = ode.advance(
            &mut |r, y| self.rhs(r, y),
            &mut r,
            &mut y,
            self.r_max,
            &mut |_, y| {
                if y[0] < 0.0 {
                    hit = Some(Shot::Over);
                    true
                } else if y[1] > 0.0 {
                    hit = Some(Shot::Under);
                    true
                } else {
                    false
                }
            },
        )?;
        Ok(match (out, hit) {
            (Advance::Stopped, Some(s)) => s,
            _ => {
                // sign of the growing mode of the linearization about 0
                let k = (self.omega - self.nl.g(y[0] * y[0]).unwrap_or(0.0)).max(1e-300).sqrt();
                if y[0] + y[1] / k >= 0.0 {
                    Shot::Under
                } else {
                    Shot::Over
                }
            }
        })
    }

    /// Samples the trajectory from φ(0) = p at radii i·h up to the first radius where
    /// φ drops below `floor`; returns (values, slopes).
    fn sample(&self, p: f64, h: f64, n: usize, floor: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let (mut r, mut y) = self.start(p);
        let mut values = vec![p];
        let mut slopes = vec![0.0];
        let mut ode = Dopri5::with_tolerance(1e-15, 1e-15);
        ode.h = (r * 0.5).min(1e-3);
        for i in 1..n {
            let target = i as f64 * h;
            ode.advance(&mut |r, y| self.rhs(r, y), &mut r, &mut y, target, &mut |_, _| false)?;
            values.push(y[0]);
            slopes.push(y[1]);
            if y[0] < floor || y[1] > 0.0 {
                break;
            }
        }
        Ok((values, slopes))
    }
}

/// Ground state of −φ'' − ((d−1)/r)φ' + ωφ − f(φ) = 0 by shooting on φ(0).
///
/// The decaying tail beyond the matching radius is produced by integrating the
/// Riccati variable w = φ'/φ inward from `r_max`, which is stable where direct
/// shooting is not.
pub fn ground_state_shoot(nl: &Nonlinearity, omega: f64, d: usize, grid: RadialGrid) -> Result<Profile> {
    if !(omega > 0.0) || d == 0 || grid.count < 16 || !(grid.r_max > 0.0) {
        return Err(NlsError::InvalidParameter(format!(
            "shooting needs omega > 0, d ≥ 1 and a radial grid with ≥ 16 points (omega = {omega}, d = {d})"
        )));
    }
    let sh = Shooter {
        nl,
        omega,
        d,
        r_max: grid.r_max,
    };
    let s_max = 1e3f64.min(nl.s_max().sqrt());
    // scan φ(0) upward for the first undershoot → overshoot transition
    let mut p = 1e-4f64.min(s_max);
    let mut prev = sh.classify(p)?;
    let mut bracket = None;
    while p < s_max {
        let next = (p * 1.02).min(s_max);
        let cur = sh.classify(next)?;
        if prev == Shot::Under && cur == Shot::Over {
            bracket = Some((p, next));
            break;
        }
        prev = cur;
        p = next;
        if next >= s_max {
            break;
        }
    }
    let (mut lo, mut hi) = bracket.ok_or_else(|| {
        NlsError::NoGroundState(format!("no undershoot/overshoot bracket for phi(0) in (0, {s_max}]"))
    })?;
    while hi - lo > 1e-13 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match sh.classify(mid)? {
            Shot::Under => lo = mid,
            Shot::Over => hi = mid,
        }
    }
    let p0 = 0.5 * (lo + hi);
    let h = grid.spacing();
    let n = grid.count;
    // matching radius: shooting is trusted while the bracketing trajectories agree
    let (v_lo, _) = sh.sample(lo, h, n, -1.0)?;
    let (v_hi, _) = sh.sample(hi, h, n, -1.0)?;
    // match as early as the inward Riccati integration allows: the shooting
    // trajectory is most accurate where φ is still large
    let mut attempt = Err(NlsError::NoGroundState("no admissible matching radius".into()));
    for frac in [0.1, 1e-2, 1e-3] {
        attempt = stitch(&sh, nl, p0, h, n, frac, &v_lo, &v_hi);
        if attempt.is_ok() {
            break;
        }
    }
    let (values, slopes) = attempt?;
    if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(NlsError::NoGroundState("profile lost positivity".into()));
    }
    let nl_owned = nl.clone();
    let base = Profile {
        kind: ProfileKind::GroundState,
        omega,
        dim: d,
        geometry: Geometry::Radial { spacing: h },
        values,
        slopes,
        curvatures: Vec::new(),
        complex_values: None,
        closed_form: None,
        limit_minus_inf: czero(),
        limit_plus_inf: czero(),
        decay_rate_a: f64::NAN,
        left_rate: omega.sqrt(),
        residual: f64::NAN,
        nl: Some(nl_owned),
    };
    let profile = if d == 1 { mirror_to_line(base) } else { base };
    Ok(profile.finish_sampled(nl))
}

#[allow(clippy::too_many_arguments)]
fn stitch(
    sh: &Shooter<'_>,
    nl: &Nonlinearity,
    p0: f64,
    h: f64,
    n: usize,
    frac: f64,
    v_lo: &[f64],
    v_hi: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (mut values, mut slopes) = sh.sample(p0, h, n, frac * p0)?;
    let mut m = values.len() - 1;
    while m > 4 {
        let agree = m < v_lo.len()
            && m < v_hi.len()
            && (v_lo[m] - v_hi[m]).abs() < 1e-11 * p0
            && slopes[m] < 0.0
            && values[m] > 0.0;
        if agree {
            break;
        }
        m -= 1;
    }
    values.truncate(m + 1);
    slopes.truncate(m + 1);
    if m + 1 < n {
        let (tail_v, tail_s) = riccati_tail(nl, sh.omega, sh.d, h, m, n, values[m])?;
        if tail_v.iter().chain(&tail_s).any(|v| !v.is_finite()) {
            return Err(NlsError::BlowupInShooting("non-finite Riccati tail".into()));
        }
        values.extend(tail_v);
        slopes.extend(tail_s);
    }
    Ok((values, slopes))
}

/// Tail samples at indices m+1..n−1 from the Riccati variable w = φ'/φ and L = ln φ.
fn riccati_tail(
    nl: &Nonlinearity,
    omega: f64,
    d: usize,
    h: f64,
    m: usize,
    n: usize,
    phi_m: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let r_m = m as f64 * h;
    let r_max = (n - 1) as f64 * h;
    let damp = |r: f64| if d > 1 { (d as f64 - 1.0) / r } else { 0.0 };
    let run = |l_end: f64| -> Result<(Vec<f64>, Vec<f64>)> {
        let w_end = -(omega - nl.g((2.0 * l_end).exp()).unwrap_or(0.0)).max(0.0).sqrt() - 0.5 * damp(r_max);
        let mut rhs = |r: f64, y: &[f64; 2]| -> [f64; 2] {
            let gg = nl.g((2.0 * y[1]).exp()).unwrap_or(f64::NAN);
            [-damp(r) * y[0] + omega - gg - y[0] * y[0], y[0]]
        };
        let mut ode = Dopri5::with_tolerance(1e-14, 1e-14);
        ode.h = h.min(1e-2);
        let mut r = r_max;
        let mut y = [w_end, l_end];
        let mut ws = vec![0.0; n];
        let mut ls = vec![0.0; n];
        ws[n - 1] = y[0];
        ls[n - 1] = y[1];
        for i in (m..n - 1).rev() {
            ode.advance(&mut rhs, &mut r, &mut y, i as f64 * h, &mut |_, _| false)?;
            ws[i] = y[0];
            ls[i] = y[1];
        }
        Ok((ws, ls))
    };
    // secant on L(r_max) until L(r_m) matches ln φ(r_m)
    let target = phi_m.ln();
    let mut x0 = target - omega.sqrt() * (r_max - r_m);
    let (mut ws, mut ls) = run(x0)?;
    let mut f0 = ls[m] - target;
    let mut x1 = x0 - f0;
    for _ in 0..60 {
        if f0.abs() < 1e-14 {
            break;
        }
        let (w1, l1) = run(x1)?;
        let f1 = l1[m] - target;
        ws = w1;
        ls = l1;
        if f1.abs() < 1e-14 || f1 == f0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        x0 = x1;
        f0 = f1;
        x1 = x2;
    }
    let vals: Vec<f64> = (m + 1..n).map(|i| ls[i].exp()).collect();
    let slopes: Vec<f64> = (m + 1..n).zip(&vals).map(|(i, v)| ws[i] * v).collect();
    Ok((vals, slopes))
}

fn mirror_to_line(p: Profile) -> Profile {
    let Geometry::Radial { spacing } = p.geometry else { return p };
    let n = p.values.len();
    let mut values = Vec::with_capacity(2 * n - 1);
    let mut slopes = Vec::with_capacity(2 * n - 1);
    for i in (1..n).rev() {
        values.push(p.values[i]);
        slopes.push(-p.slopes[i]);
    }
    values.extend_from_slice(&p.values);
    slopes.extend_from_slice(&p.slopes);
    Profile {
        geometry: Geometry::Line {
            origin: -((n - 1) as f64) * spacing,
            spacing,
        },
        values,
        slopes,
        ..p
    }
}

/// H(s) = ω₀s²/2 − F(s) evaluated stably near both ends by integrating h.
fn first_integral(nl: &Nonlinearity, kc: &KinkConstants, s: f64) -> f64 {
    let h = |x: f64| kc.omega0 * x - nl.f_real(x).unwrap_or(f64::NAN);
    if s <= 0.5 * kc.b {
        gauss_legendre(h, 0.0, s)
    } else {
        -gauss_legendre(h, s, kc.b)
    }
}

fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    // 10-point rule on 4 panels
    const X: [f64; 5] = [
        0.148_874_338_981_631_2,
        0.433_395_394_129_247_2,
        0.679_409_568_299_024_4,
        0.865_063_366_688_984_5,
        0.973_906_528_517_171_7,
    ];
    const W: [f64; 5] = [
        0.295_524_224_714_752_9,
        0.269_266_719_309_996_4,
        0.219_086_362_515_982_04,
        0.149_451_349_150_580_6,
        0.066_671_344_308_688_14,
    ];
    let panels = 4;
    let w = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * w;
        let c = lo + 0.5 * w;
        let half = 0.5 * w;
        for k in 0..5 {
            total += W[k] * (f(c - half * X[k]) + f(c + half * X[k])) * half;
        }
    }
    total
}

/// Kink profile from φ' = −√(2H(φ)), anchored at φ(0) = b/2.
///
/// Both half-lines are integrated in logarithmic variables, ln(b − φ) to the
/// left and ln φ to the right, which keeps the exponential approach to the
/// limits well conditioned.
pub fn kink_profile(nl: &Nonlinearity, kc: &KinkConstants, grid: &Grid) -> Result<Profile> {
    let (origin, spacing, n) = line_params(grid)?;
    let b = kc.b;
    let big_h = |s: f64| -> Result<f64> {
        let v = first_integral(nl, kc, s);
        if v < 0.0 {
            if v > -1e-14 * b * b {
                return Ok(0.0);
            }
            return Err(NlsError::FirstIntegralNegative { value: v, phi: s });
        }
        Ok(v)
    };
    // validate positivity of H on (0, b) before integrating
    for i in 1..200 {
        big_h(b * i as f64 / 200.0)?;
    }
    let coords: Vec<f64> = (0..n).map(|i| origin + i as f64 * spacing).collect();
    let mut values = vec![0.0; n];
    let anchor = b / 2.0;
    let mut err = None;
    let i0 = coords.partition_point(|&x| x < 0.0);
    // right: y = ln φ, y' = −√(2H(φ))/φ
    {
        let mut rhs = |_x: f64, y: &[f64; 1]| -> [f64; 1] {
            let phi = y[0].exp();
            match big_h(phi) {
                Ok(hv) => [-(2.0 * hv).sqrt() / phi],
                Err(e) => {
                    err.get_or_insert(e);
                    [f64::NAN]
                }
            }
        };
        let mut ode = Dopri5::with_tolerance(1e-13, 1e-13);
        ode.h = spacing.min(1e-2);
        let (mut x, mut y) = (0.0, [anchor.ln()]);
        for i in i0..n {
            ode.advance(&mut rhs, &mut x, &mut y, coords[i], &mut |_, _| false)?;
            values[i] = y[0].exp();
        }
    }
    if let Some(e) = err.take() {
        return Err(e);
    }
    // left: y = ln(b − φ), y' = √(2H(φ))/(b − φ)
    {
        let mut rhs = |_x: f64, y: &[f64; 1]| -> [f64; 1] {
            let gap = y[0].exp();
            match big_h(b - gap) {
                Ok(hv) => [(2.0 * hv).sqrt() / gap],
                Err(e) => {
                    err.get_or_insert(e);
                    [f64::NAN]
                }
            }
        };
        let mut ode = Dopri5::with_tolerance(1e-13, 1e-13);
        ode.h = spacing.min(1e-2);
        let (mut x, mut y) = (0.0, [(b - anchor).ln()]);
        for i in (0..i0).rev() {
            ode.advance(&mut rhs, &mut x, &mut y, coords[i], &mut |_, _| false)?;
            values[i] = b - y[0].exp();
        }
    }
    if let Some(e) = err.take() {
        return Err(e);
    }
    let slopes: Vec<f64> = values
        .iter()
        .map(|&v| -(2.0 * first_integral(nl, kc, v).max(0.0)).sqrt())
        .collect();
    let base = Profile {
        kind: ProfileKind::Kink,
        omega: kc.omega0,
        dim: 1,
        geometry: Geometry::Line { origin, spacing },
        values,
        slopes,
        curvatures: Vec::new(),
        complex_values: None,
        closed_form: None,
        limit_minus_inf: creal(b),
        limit_plus_inf: czero(),
        decay_rate_a: f64::NAN,
        left_rate: kc.hprime_at_b.sqrt(),
        residual: f64::NAN,
        nl: Some(nl.clone()),
    };
    Ok(base.finish_sampled(nl))
}

fn gp_kink_on(c: f64, origin: f64, spacing: f64, n: usize) -> Result<Profile> {
    if !(c.abs() < 2f64.sqrt()) {
        return Err(NlsError::SpeedAboveSound(c.abs()));
    }
    let cf = ClosedForm::GpKink { c };
    let coords: Vec<f64> = (0..n).map(|i| origin + i as f64 * spacing).collect();
    let complex: Vec<Complex64> = coords.iter().map(|&x| eval_closed_form(cf, x).value).collect();
    let amp = ((2.0 - c * c) / 2.0).sqrt();
    let im = c / 2f64.sqrt();
    let nl = Nonlinearity::gross_pitaevskii();
    let mut p = Profile {
        kind: ProfileKind::Kink,
        omega: 0.0,
        dim: 1,
        geometry: Geometry::Line { origin, spacing },
        values: complex.iter().map(|z| z.re).collect(),
        slopes: coords.iter().map(|&x| eval_closed_form(cf, x).d1.re).collect(),
        curvatures: coords.iter().map(|&x| eval_closed_form(cf, x).laplacian.re).collect(),
        complex_values: Some(complex),
        closed_form: Some(cf),
        limit_minus_inf: Complex64::new(-amp, im),
        limit_plus_inf: Complex64::new(amp, im),
        decay_rate_a: (2.0 - c * c).sqrt(),
        left_rate: (2.0 - c * c).sqrt(),
        residual: 0.0,
        nl: Some(nl.clone()),
    };
    p.residual = p.stationary_residual(&nl);
    Ok(p)
}

/// Gross–Pitaevskii kink with intrinsic velocity c, |c| < √2 (the speed of sound).
pub fn gp_kink(c: f64, grid: &Grid) -> Result<Profile> {
    let (origin, spacing, n) = line_params(grid)?;
    gp_kink_on(c, origin, spacing, n)
}

/// Is the nonlinearity a pure power (closed-form/scaling ground states available)?
pub fn power_exponent(nl: &Nonlinearity) -> Option<f64> {
    match nl.kind {
        NonlinearityKind::Power { alpha } => Some(alpha),
        _ => None,
    }
}

/// Rescales a power-law ground state: φ_ω(x) = (ω/ω₁)^{1/α} φ₁(√(ω/ω₁) x).
pub fn rescale_power_ground_state(p: &Profile, alpha: f64, omega: f64) -> Profile {
    let lam = omega / p.omega;
    let amp = lam.powf(1.0 / alpha);
    let stretch = lam.sqrt();
    let geometry = match p.geometry {
        Geometry::Line { origin, spacing } => Geometry::Line {
            origin: origin / stretch,
            spacing: spacing / stretch,
        },
        Geometry::Radial { spacing } => Geometry::Radial {
            spacing: spacing / stretch,
        },
    };
    let closed_form = p.closed_form.map(|cf| match cf {
        ClosedForm::PowerSech { alpha, .. } => ClosedForm::PowerSech { alpha, omega },
        other => other,
    });
    Profile {
        omega,
        geometry,
        values: p.values.iter().map(|v| v * amp).collect(),
        slopes: p.slopes.iter().map(|v| v * amp * stretch).collect(),
        curvatures: p.curvatures.iter().map(|v| v * amp * lam).collect(),
        closed_form,
        decay_rate_a: p.decay_rate_a * stretch,
        left_rate: p.left_rate * stretch,
        residual: p.residual * amp * lam,
        ..p.clone()
    }
}
