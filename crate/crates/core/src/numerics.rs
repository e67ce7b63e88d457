//! Small scalar numerics: Brent root bracketing, adaptive Simpson quadrature
//! and a Dormand–Prince 5(4) integrator with step control.

use crate::error::{NlsError, Result};

/// Brent's method on a sign-changing bracket `[a, b]`, absolute tolerance `tol` on x.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(NlsError::InvalidParameter(format!(
            "brent: no sign change on [{a}, {b}]"
        )));
    }
    let (mut c, mut fc) = (b, fb);
    let (mut d, mut e) = (b - a, b - a);
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // inverse quadratic interpolation, falling back to secant
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Err(NlsError::InvalidParameter("brent: iteration limit".into()))
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to relative tolerance `rel_tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // absolute target from a coarse magnitude estimate, floored to avoid chasing zero
    let scale = ((b - a) / 6.0 * (fa.abs() + 4.0 * fm.abs() + fb.abs())).max(1e-300);
    simpson_rec(&f, a, b, fa, fm, fb, whole, rel_tol * scale, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // stop at the requested accuracy or once the correction is at roundoff level
    if depth == 0 || delta.abs() <= 15.0 * tol || delta.abs() <= 64.0 * f64::EPSILON * (left.abs() + right.abs())
    {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Outcome of [`Dopri5::advance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Advance {
    Reached,
    Stopped,
}

/// Dormand–Prince 5(4) with an embedded error estimate; state dimension `N`.
#[derive(Debug, Clone)]
pub struct Dopri5 {
    pub atol: f64,
    pub rtol: f64,
    /// Step size suggestion carried between calls (magnitude only).
    pub h: f64,
    pub h_min: f64,
    pub max_steps: usize,
    /// Bound on |y| beyond which integration aborts.
    pub blowup: f64,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            atol: 1e-12,
            rtol: 1e-12,
            h: 1e-3,
            h_min: 1e-14,
            max_steps: 2_000_000,
            blowup: 1e12,
        }
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

impl Dopri5 {
    pub fn with_tolerance(atol: f64, rtol: f64) -> Self {
        Self {
            atol,
            rtol,
            ..Self::default()
        }
    }

    /// Integrates from `*t` to `t_target` (either direction), updating `t` and `y`.
    /// `stop` is evaluated after every accepted step; returning `true` halts early.
    pub fn advance<const N: usize, F, S>(
        &mut self,
        f: &mut F,
        t: &mut f64,
        y: &mut [f64; N],
        t_target: f64,
        stop: &mut S,
    ) -> Result<Advance>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
        S: FnMut(f64, &[f64; N]) -> bool,
    {
        let dir = if t_target >= *t { 1.0 } else { -1.0 };
        let mut steps = 0usize;
        while (t_target - *t) * dir > 1e-15 * t_target.abs().max(1.0) {
            steps += 1;
            if steps > self.max_steps {
                return Err(NlsError::BlowupInShooting(format!(
                    "step limit reached at t = {}",
                    *t
                )));
            }
            let remaining = (t_target - *t).abs();
            let h_abs = self.h.min(remaining);
            let last = h_abs >= remaining;
            let h = dir * h_abs;
            let mut k = [[0.0; N]; 7];
            k[0] = f(*t, y);
            for s in 1..7 {
                let mut ys = *y;
                for (i, yi) in ys.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += A[s][j] * kj[i];
                    }
                    *yi += h * acc;
                }
                k[s] = f(*t + C[s] * h, &ys);
            }
            let mut y_new = *y;
            let mut err = 0.0;
            for i in 0..N {
                let mut acc = 0.0;
                let mut e = 0.0;
                for s in 0..6 {
                    acc += A[6][s] * k[s][i];
                }
                for s in 0..7 {
                    e += E[s] * k[s][i];
                }
                y_new[i] = y[i] + h * acc;
                let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err += (h * e / sc).powi(2);
            }
            let err = (err / N as f64).sqrt();
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite() || v.abs() > self.blowup) {
                if h_abs <= self.h_min {
                    return Err(NlsError::BlowupInShooting(format!("non-finite state at t = {}", *t)));
                }
                self.h = h_abs * 0.2;
                continue;
            }
            if err <= 1.0 {
                *t = if last { t_target } else { *t + h };
                *y = y_new;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || fac < 1.0 {
                    self.h = h_abs * fac;
                }
                if stop(*t, y) {
                    return Ok(Advance::Stopped);
                }
            } else {
                if h_abs <= self.h_min {
                    return Err(NlsError::BlowupInShooting(format!(
                        "step size underflow at t = {}",
                        *t
                    )));
                }
                self.h = h_abs * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            }
        }
        Ok(Advance::Reached)
    }
}
