//! Phase-covariant nonlinearities f(z) = g(|z|²) z.
//!
//! Besides pointwise evaluation this module checks the energy-subcritical /
//! focusing conditions and solves for the constants (ω₀, b) that make a kink
//! exist: h(b) = 0, h'(b) > 0 and ∫₀ᵇ h = 0 with h(s) = ω₀ s − f(s).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NlsError, Result};
use crate::numerics::{adaptive_simpson, brent};

/// Largest b scanned when looking for kink constants.
pub const KINK_S_MAX: f64 = 1e3;
const FOCUSING_GRID_POINTS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonlinearityKind {
    /// g(s) = s^{α/2}
    Power { alpha: f64 },
    /// g(s) = s^{α/2} − s^{β/2}
    DoublePower { alpha: f64, beta: f64 },
    /// g(s) = 1 − s
    #[serde(alias = "gp")]
    GrossPitaevskii,
    /// Piecewise-linear g through the points (s_i, g_i), s_0 = 0.
    /// Exponents are declared, not inferred.
    Tabulated {
        s: Vec<f64>,
        g: Vec<f64>,
        #[serde(default)]
        alpha1: Option<f64>,
        #[serde(default)]
        alpha2: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nonlinearity {
    #[serde(flatten)]
    pub kind: NonlinearityKind,
    #[serde(default = "default_dimension")]
    pub dimension_hint: usize,
    /// Intermediate exponent carried as metadata for train admissibility reports.
    #[serde(default)]
    pub alpha_1_5: Option<f64>,
}

fn default_dimension() -> usize {
    1
}

/// Result of the subcritical / focusing check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assumption1Report {
    pub subcritical: bool,
    pub focusing: bool,
    pub s0_witness: Option<f64>,
    pub alpha2: Option<f64>,
    pub alpha_max: f64,
    pub alpha_1_5: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinkConstants {
    pub omega0: f64,
    pub b: f64,
    pub hprime_at_b: f64,
}

/// α_max(d): ∞ for d ≤ 2, 4/(d−2) otherwise.
pub fn alpha_max(d: usize) -> f64 {
    if d <= 2 {
        f64::INFINITY
    } else {
        4.0 / (d as f64 - 2.0)
    }
}

impl Nonlinearity {
    pub fn new(kind: NonlinearityKind) -> Result<Self> {
        let nl = Self {
            kind,
            dimension_hint: 1,
            alpha_1_5: None,
        };
        nl.validate()?;
        Ok(nl)
    }

    pub fn power(alpha: f64) -> Result<Self> {
        Self::new(NonlinearityKind::Power { alpha })
    }

    pub fn double_power(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(NonlinearityKind::DoublePower { alpha, beta })
    }

    pub fn gross_pitaevskii() -> Self {
        Self {
            kind: NonlinearityKind::GrossPitaevskii,
            dimension_hint: 1,
            alpha_1_5: None,
        }
    }

    pub fn tabulated(s: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        Self::new(NonlinearityKind::Tabulated {
            s,
            g,
            alpha1: None,
            alpha2: None,
        })
    }

    pub fn with_dimension(mut self, d: usize) -> Self {
        self.dimension_hint = d;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(NlsError::InvalidParameter(m));
        match &self.kind {
            NonlinearityKind::Power { alpha } => {
                if !(alpha.is_finite() && *alpha > 0.0) {
                    return bad(format!("power exponent must be positive, got {alpha}"));
                }
            }
            NonlinearityKind::DoublePower { alpha, beta } => {
                if !(alpha.is_finite() && beta.is_finite() && *alpha > 0.0 && alpha < beta) {
                    return bad(format!("double power needs 0 < alpha < beta, got ({alpha}, {beta})"));
                }
            }
            NonlinearityKind::GrossPitaevskii => {}
            NonlinearityKind::Tabulated { s, g, .. } => {
                if s.len() < 2 || s.len() != g.len() {
                    return bad("tabulated g needs at least two (s, g) pairs of equal length".into());
                }
                if s[0] != 0.0 || s.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("tabulated s must start at 0 and increase strictly".into());
                }
                if g[0] != 0.0 {
                    return bad("tabulated g must vanish at s = 0".into());
                }
                if g.iter().any(|v| !v.is_finite()) {
                    return bad("tabulated g must be finite".into());
                }
            }
        }
        if self.dimension_hint == 0 {
            return bad("dimension_hint must be at least 1".into());
        }
        Ok(())
    }

    /// g(s) for s = |z|² ≥ 0.
    pub fn g(&self, s: f64) -> Result<f64> {
        if s < 0.0 {
            return Err(NlsError::NegativeArgument(s));
        }
        Ok(match &self.kind {
            NonlinearityKind::Power { alpha } => s.powf(alpha / 2.0),
            NonlinearityKind::DoublePower { alpha, beta } => s.powf(alpha / 2.0) - s.powf(beta / 2.0),
            NonlinearityKind::GrossPitaevskii => 1.0 - s,
            NonlinearityKind::Tabulated { s: xs, g, .. } => {
                let (i, w) = locate(xs, s)?;
                g[i] + w * (g[i + 1] - g[i])
            }
        })
    }

    /// g'(s); one-sided slope of the segment for tabulated kinds.
    pub fn g_prime(&self, s: f64) -> Result<f64> {
        if s < 0.0 {
            return Err(NlsError::NegativeArgument(s));
        }
        Ok(match &self.kind {
            NonlinearityKind::Power { alpha } => 0.5 * alpha * s.powf(alpha / 2.0 - 1.0),
            NonlinearityKind::DoublePower { alpha, beta } => {
                0.5 * alpha * s.powf(alpha / 2.0 - 1.0) - 0.5 * beta * s.powf(beta / 2.0 - 1.0)
            }
            NonlinearityKind::GrossPitaevskii => -1.0,
            NonlinearityKind::Tabulated { s: xs, g, .. } => {
                let (i, _) = locate(xs, s)?;
                (g[i + 1] - g[i]) / (xs[i + 1] - xs[i])
            }
        })
    }

    /// g(s + ds) − g(s) without cancellation when |ds| ≪ s.
    pub fn g_increment(&self, s: f64, ds: f64) -> Result<f64> {
        let t = (s + ds).max(0.0);
        let power_inc = |p: f64| -> f64 {
            if p == 1.0 {
                t - s
            } else if p == 0.5 {
                let den = t.sqrt() + s.sqrt();
                if den > 0.0 {
                    (t - s) / den
                } else {
                    0.0
                }
            } else if s > 0.0 && ds.abs() < 0.5 * s {
                s.powf(p) * (p * (ds / s).ln_1p()).exp_m1()
            } else {
                t.powf(p) - s.powf(p)
            }
        };
        Ok(match &self.kind {
            NonlinearityKind::Power { alpha } => power_inc(alpha / 2.0),
            NonlinearityKind::DoublePower { alpha, beta } => power_inc(alpha / 2.0) - power_inc(beta / 2.0),
            NonlinearityKind::GrossPitaevskii => -(t - s),
            NonlinearityKind::Tabulated { .. } => self.g(t)? - self.g(s)?,
        })
    }

    /// f(z) = g(|z|²) z.
    pub fn eval_f(&self, z: Complex64) -> Result<Complex64> {
        Ok(z * self.g(z.norm_sqr())?)
    }

    /// Real restriction f(r) = g(r²) r.
    pub fn f_real(&self, r: f64) -> Result<f64> {
        Ok(self.g(r * r)? * r)
    }

    /// d/dr of f(r) = g(r²) + 2r² g'(r²).
    pub fn f_prime_real(&self, r: f64) -> Result<f64> {
        let s = r * r;
        if s == 0.0 {
            return self.g(0.0);
        }
        Ok(self.g(s)? + 2.0 * s * self.g_prime(s)?)
    }

    /// F(r) = ∫₀^r f(τ) dτ for r ≥ 0.
    #[allow(non_snake_case)]
    pub fn eval_F(&self, r: f64) -> Result<f64> {
        if r < 0.0 {
            return Err(NlsError::NegativeArgument(r));
        }
        Ok(match &self.kind {
            NonlinearityKind::Power { alpha } => r.powf(alpha + 2.0) / (alpha + 2.0),
            NonlinearityKind::DoublePower { alpha, beta } => {
                r.powf(alpha + 2.0) / (alpha + 2.0) - r.powf(beta + 2.0) / (beta + 2.0)
            }
            NonlinearityKind::GrossPitaevskii => 0.5 * r * r - 0.25 * r.powi(4),
            NonlinearityKind::Tabulated { s: xs, .. } => {
                let top = *xs.last().unwrap();
                if r * r > top {
                    return Err(NlsError::OutOfDomain {
                        value: r * r,
                        min: 0.0,
                        max: top,
                    });
                }
                // integrate piece by piece so every panel sees a smooth integrand
                let mut total = 0.0;
                let mut lo = 0.0;
                for &knot in xs.iter().skip(1) {
                    let hi = knot.sqrt().min(r);
                    if hi > lo {
                        total += adaptive_simpson(
                            |t| self.g(t * t).unwrap_or(0.0) * t,
                            lo,
                            hi,
                            1e-12,
                        );
                    }
                    if hi >= r {
                        break;
                    }
                    lo = hi;
                }
                total
            }
        })
    }

    /// G(s) = ∫₀ˢ g(σ) dσ = 2 F(√s).
    #[allow(non_snake_case)]
    pub fn eval_G(&self, s: f64) -> Result<f64> {
        if s < 0.0 {
            return Err(NlsError::NegativeArgument(s));
        }
        Ok(2.0 * self.eval_F(s.sqrt())?)
    }

    /// Declared exponents (α₁, α₂).
    pub fn exponents(&self) -> (Option<f64>, Option<f64>) {
        match &self.kind {
            NonlinearityKind::Power { alpha } => (Some(*alpha), Some(*alpha)),
            NonlinearityKind::DoublePower { alpha, beta } => (Some(*alpha), Some(*beta)),
            NonlinearityKind::GrossPitaevskii => (Some(2.0), Some(2.0)),
            NonlinearityKind::Tabulated { alpha1, alpha2, .. } => (*alpha1, *alpha2),
        }
    }

    /// Domain of g: s ∈ [0, s_max].
    pub fn s_max(&self) -> f64 {
        match &self.kind {
            NonlinearityKind::Tabulated { s, .. } => *s.last().unwrap(),
            _ => f64::INFINITY,
        }
    }

    /// Subcriticality against α_max(d) and a logarithmic search for G(s₀) > ω s₀.
    pub fn check_assumption1(&self, omega: f64, d: usize) -> Assumption1Report {
        let a_max = alpha_max(d);
        let (_, alpha2) = self.exponents();
        let subcritical = alpha2.is_some_and(|a| a < a_max);
        let (lo, hi) = (1e-6f64, 1e6f64.min(self.s_max()));
        let mut witness = None;
        if hi > lo {
            let step = (hi / lo).ln() / (FOCUSING_GRID_POINTS - 1) as f64;
            for i in 0..FOCUSING_GRID_POINTS {
                let s = lo * (step * i as f64).exp();
                if let Ok(gs) = self.eval_G(s) {
                    if gs > omega * s {
                        witness = Some(s);
                        break;
                    }
                }
            }
        }
        Assumption1Report {
            subcritical,
            focusing: witness.is_some(),
            s0_witness: witness,
            alpha2,
            alpha_max: a_max,
            alpha_1_5: self.alpha_1_5,
        }
    }

    /// Solves h(b) = 0, ∫₀ᵇ h = 0 with ω₀ = g(b²) eliminated, accepting the first
    /// root with ω₀ > 0 and h'(b) > 0.
    pub fn kink_constants(&self) -> Result<KinkConstants> {
        // φ(b) = ∫₀ᵇ h with ω₀ = g(b²): ½ g(b²) b² − F(b)
        let phi = |b: f64| -> f64 {
            match (self.g(b * b), self.eval_F(b)) {
                (Ok(g), Ok(f)) => 0.5 * g * b * b - f,
                _ => f64::NAN,
            }
        };
        let b_hi = KINK_S_MAX.min(self.s_max().sqrt());
        let b_lo = 1e-6;
        let n = 20_000;
        let ratio = (b_hi / b_lo).powf(1.0 / n as f64);
        let mut prev_b = b_lo;
        let mut prev = phi(prev_b);
        for i in 1..=n {
            let b = b_lo * ratio.powi(i as i32);
            let cur = phi(b);
            if prev.is_finite() && cur.is_finite() && prev != 0.0 && prev.signum() != cur.signum() {
                let root = brent(phi, prev_b, b, 1e-14)?;
                let omega0 = self.g(root * root)?;
                let hprime = omega0 - self.f_prime_real(root)?;
                if omega0 > 0.0 && hprime > 0.0 {
                    let kc = KinkConstants {
                        omega0,
                        b: root,
                        hprime_at_b: hprime,
                    };
                    let res = self.kink_residuals(&kc)?;
                    if res.iter().all(|r| r.abs() < 1e-10) {
                        return Ok(kc);
                    }
                }
            }
            prev_b = b;
            prev = cur;
        }
        Err(NlsError::NoKink(format!(
            "no b in (0, {b_hi}] with h(b) = 0, h'(b) > 0, ∫h = 0 and omega0 > 0"
        )))
    }

    /// Residuals (h(b), ∫₀ᵇ h) of kink constants, the integral by quadrature.
    pub fn kink_residuals(&self, kc: &KinkConstants) -> Result<[f64; 2]> {
        let h_b = kc.omega0 * kc.b - self.f_real(kc.b)?;
        let integral = adaptive_simpson(
            |s| kc.omega0 * s - self.f_real(s).unwrap_or(f64::NAN),
            0.0,
            kc.b,
            1e-13,
        );
        Ok([h_b, integral])
    }
}

fn locate(xs: &[f64], s: f64) -> Result<(usize, f64)> {
    let top = *xs.last().unwrap();
    if s > top || s.is_nan() {
        return Err(NlsError::OutOfDomain {
            value: s,
            min: 0.0,
            max: top,
        });
    }
    let i = match xs.binary_search_by(|v| v.partial_cmp(&s).unwrap()) {
        Ok(i) => i.min(xs.len() - 2),
        Err(i) => i - 1,
    };
    Ok((i, (s - xs[i]) / (xs[i + 1] - xs[i])))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_f_examples() {
        let p2 = Nonlinearity::power(2.0).unwrap();
        assert_eq!(p2.eval_f(c(2.0, 0.0)).unwrap(), c(8.0, 0.0));
        assert_eq!(p2.eval_f(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        let dp = Nonlinearity::double_power(1.0, 2.0).unwrap();
        assert_eq!(dp.eval_f(c(1.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert_eq!(dp.eval_f(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn eval_big_f_examples() {
        let p2 = Nonlinearity::power(2.0).unwrap();
        assert_eq!(p2.eval_F(1.0).unwrap(), 0.25);
        assert_eq!(p2.eval_F(0.0).unwrap(), 0.0);
        let dp = Nonlinearity::double_power(1.0, 2.0).unwrap();
        assert!((dp.eval_F(1.0).unwrap() - 1.0 / 12.0).abs() < 1e-15);
        assert!(matches!(p2.eval_F(-1.0), Err(NlsError::NegativeArgument(_))));
    }

    #[test]
    fn tabulated_matches_cubic_and_rejects_out_of_range() {
        let s: Vec<f64> = (0..=400).map(|i| i as f64 * 0.025).collect();
        let tab = Nonlinearity::tabulated(s.clone(), s.clone()).unwrap();
        // g(s) = s is the cubic nonlinearity: F(r) = r⁴/4
        for r in [0.3, 1.0, 2.5, 3.1] {
            let f = tab.eval_F(r).unwrap();
            assert!((f - r.powi(4) / 4.0).abs() < 1e-10 * r.powi(4), "r={r}");
        }
        assert!(matches!(
            tab.eval_f(c(4.0, 0.0)),
            Err(NlsError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(Nonlinearity::power(0.0).is_err());
        assert!(Nonlinearity::double_power(2.0, 1.0).is_err());
        assert!(Nonlinearity::tabulated(vec![0.0, 1.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn assumption1_examples() {
        let p2 = Nonlinearity::power(2.0).unwrap();
        let rep = p2.check_assumption1(1.0, 1);
        assert!(rep.subcritical && rep.focusing);
        // G(s) = s²/2 > s iff s > 2
        assert!(rep.s0_witness.unwrap() > 2.0);
        let p6 = Nonlinearity::power(6.0).unwrap();
        assert!(!p6.check_assumption1(1.0, 3).subcritical);
        let dp = Nonlinearity::double_power(1.0, 2.0).unwrap();
        let rep = dp.check_assumption1(0.1, 1);
        assert!(rep.focusing);
        // independent oracle: G(s) − ωs = (2/3)s^{3/2} − s²/2 − 0.1 s
        let s0 = rep.s0_witness.unwrap();
        assert!(2.0 / 3.0 * s0.powf(1.5) - 0.5 * s0 * s0 - 0.1 * s0 > 0.0);
    }

    #[test]
    fn defocusing_gp_is_not_focusing_for_large_omega() {
        let gp = Nonlinearity::gross_pitaevskii();
        // G(s) = s − s²/2 < ω s for ω ≥ 1
        assert!(!gp.check_assumption1(1.0, 1).focusing);
    }

    /// Oracle for DP(1,2): eliminate ω₀ = b − b² and bisect b³/6 − b⁴/4 on (0.1, 1).
    fn dp12_oracle() -> (f64, f64) {
        let (mut lo, mut hi) = (0.1f64, 1.0f64);
        let q = |b: f64| b.powi(3) / 6.0 - b.powi(4) / 4.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if q(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let b = 0.5 * (lo + hi);
        (b - b * b, b)
    }

    #[test]
    fn kink_constants_double_power() {
        let dp = Nonlinearity::double_power(1.0, 2.0).unwrap();
        let kc = dp.kink_constants().unwrap();
        let (w_oracle, b_oracle) = dp12_oracle();
        assert!((kc.b - b_oracle).abs() < 1e-12);
        assert!((kc.omega0 - w_oracle).abs() < 1e-12);
        assert!((kc.b - 2.0 / 3.0).abs() < 1e-12);
        assert!((kc.omega0 - 2.0 / 9.0).abs() < 1e-12);
        assert!((kc.hprime_at_b - 2.0 / 9.0).abs() < 1e-10);
        let res = dp.kink_residuals(&kc).unwrap();
        assert!(res[0].abs() < 1e-10 && res[1].abs() < 1e-10);
        // the earlier zero of h at s = 1/3 has h' < 0 and is not the kink constant
        assert!(kc.omega0 - dp.f_prime_real(1.0 / 3.0).unwrap() < 0.0);
    }

    #[test]
    fn no_kink_for_power_and_gp() {
        for alpha in [1.0, 2.0, 3.0, 4.5] {
            let p = Nonlinearity::power(alpha).unwrap();
            assert!(matches!(p.kink_constants(), Err(NlsError::NoKink(_))));
        }
        assert!(matches!(
            Nonlinearity::gross_pitaevskii().kink_constants(),
            Err(NlsError::NoKink(_))
        ));
    }

    #[test]
    fn config_round_trip() {
        let nl: Nonlinearity =
            serde_json::from_str(r#"{"kind": "double_power", "alpha": 1.0, "beta": 2.0}"#).unwrap();
        assert_eq!(nl.kind, NonlinearityKind::DoublePower { alpha: 1.0, beta: 2.0 });
        let back: Nonlinearity = serde_json::from_str(&serde_json::to_string(&nl).unwrap()).unwrap();
        assert_eq!(back, nl);
    }
}
