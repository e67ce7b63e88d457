//! Stationary profiles checked against closed forms and independent shooting.

use nlslab::grid::Grid;
use nlslab::nonlinearity::Nonlinearity;
use nlslab::profiles::{
    gp_kink, ground_state_power_1d, ground_state_shoot, kink_profile, ProfileKind, RadialGrid,
};
use nlslab::NlsError;

fn sech_profile(alpha: f64, omega: f64, x: f64) -> f64 {
    ((alpha + 2.0) * omega / 2.0).powf(1.0 / alpha) * (1.0 / (alpha * omega.sqrt() * x / 2.0).cosh()).powf(2.0 / alpha)
}

#[test]
fn cubic_ground_state_height_and_residual() {
    let grid = Grid::line(80.0, 2048).unwrap();
    let p = ground_state_power_1d(2.0, 1.0, &grid).unwrap();
    assert!((p.value(0.0) - 2f64.sqrt()).abs() < 1e-15);
    assert!(p.residual() < 1e-10, "residual {}", p.residual());
    // independent finite-difference oracle on a fine stencil
    let h = 1e-4;
    for &x in &[-3.0, -0.7, 0.0, 0.4, 2.5, 6.0] {
        let f = |x: f64| sech_profile(2.0, 1.0, x);
        let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        assert!((-d2 + f(x) - f(x).powi(3)).abs() < 1e-6);
    }
    let p4 = ground_state_power_1d(2.0, 4.0, &grid).unwrap();
    assert!((p4.value(0.0) - 2.0 * 2f64.sqrt()).abs() < 1e-14);
}

#[test]
fn power_ground_state_scaling() {
    let grid = Grid::line(120.0, 4096).unwrap();
    for alpha in [1.0, 2.0, 3.0] {
        let one = ground_state_power_1d(alpha, 1.0, &grid).unwrap();
        for omega in [0.25, 4.0] {
            let p = ground_state_power_1d(alpha, omega, &grid).unwrap();
            for &x in &[0.0, 0.3, -1.7, 4.2] {
                let lhs = p.value(x);
                let rhs = omega.powf(1.0 / alpha) * one.value(omega.sqrt() * x);
                assert!((lhs - rhs).abs() < 1e-12, "alpha={alpha} omega={omega} x={x}");
            }
        }
    }
}

#[test]
fn power_ground_state_residuals_small() {
    for alpha in [1.0, 2.0, 3.0] {
        for omega in [0.25f64, 1.0, 4.0] {
            let l = 120.0 / omega.sqrt();
            let grid = Grid::line(l, 4096).unwrap();
            let p = ground_state_power_1d(alpha, omega, &grid).unwrap();
            assert!(p.residual() < 1e-10, "alpha={alpha} omega={omega}: {}", p.residual());
        }
    }
}

#[test]
fn truncated_grid_rejected() {
    let grid = Grid::line(20.0, 512).unwrap();
    assert!(matches!(
        ground_state_power_1d(2.0, 1.0, &grid),
        Err(NlsError::Truncation { .. })
    ));
}

#[test]
fn shooting_matches_closed_form_in_one_dimension() {
    for alpha in [1.0, 2.0, 3.0] {
        let nl = Nonlinearity::power(alpha).unwrap();
        for omega in [0.25f64, 1.0, 4.0] {
            let r_max = 40.0 / omega.sqrt();
            let shot = ground_state_shoot(&nl, omega, 1, RadialGrid { r_max, count: 4001 }).unwrap();
            let mut worst = 0.0f64;
            for i in 0..=400 {
                let x = -r_max + 2.0 * r_max * i as f64 / 400.0;
                worst = worst.max((shot.value(x) - sech_profile(alpha, omega, x)).abs());
            }
            assert!(worst < 1e-8, "alpha={alpha} omega={omega}: {worst:e}");
            assert!(shot.residual() < 1e-8, "residual {}", shot.residual());
        }
    }
}

/// Independent fixed-step RK4 shooting for the radial cubic equation in d = 3.
fn rk4_height_3d() -> f64 {
    let classify = |p: f64| -> bool {
        // true = overshoot
        let h = 1e-3;
        let mut r = 1e-6;
        let (mut u, mut v) = (p, 0.0);
        let rhs = |r: f64, u: f64, v: f64| (v, -2.0 / r * v + u - u * u * u);
        while r < 20.0 {
            let (k1u, k1v) = rhs(r, u, v);
            let (k2u, k2v) = rhs(r + h / 2.0, u + h / 2.0 * k1u, v + h / 2.0 * k1v);
            let (k3u, k3v) = rhs(r + h / 2.0, u + h / 2.0 * k2u, v + h / 2.0 * k2v);
            let (k4u, k4v) = rhs(r + h, u + h * k3u, v + h * k3v);
            u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            r += h;
            if u < 0.0 {
                return true;
            }
            if v > 0.0 {
                return false;
            }
        }
        false
    };
    let (mut lo, mut hi) = (3.0, 6.0);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if classify(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn cubic_ground_state_in_three_dimensions() {
    let nl = Nonlinearity::power(2.0).unwrap();
    let p = ground_state_shoot(&nl, 1.0, 3, RadialGrid { r_max: 30.0, count: 3001 }).unwrap();
    let oracle = rk4_height_3d();
    let height = p.value(0.0);
    assert!((height - 4.3374).abs() < 1e-4, "height {height}");
    assert!((height - oracle).abs() < 1e-6, "height {height} oracle {oracle}");
    assert!(p.residual() < 1e-8, "residual {}", p.residual());
    // nodeless and decreasing
    let v = p.values();
    assert!(v.iter().all(|&x| x > 0.0));
    assert!(v.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn double_power_ground_state() {
    let nl = Nonlinearity::double_power(1.0, 2.0).unwrap();
    let omega = 0.1;
    let p = ground_state_shoot(&nl, omega, 1, RadialGrid { r_max: 150.0, count: 6001 }).unwrap();
    // first integral oracle: (2/3)p − p²/2 = ω gives the height
    let height = (4.0 / 3.0 - (16.0 / 9.0 - 8.0 * omega).sqrt()) / 2.0;
    assert!((p.value(0.0) - height).abs() < 1e-9, "{} vs {height}", p.value(0.0));
    assert!(p.residual() < 1e-8, "residual {}", p.residual());
    for &x in &[0.5, 3.0, 20.0] {
        assert!((p.value(x) - p.value(-x)).abs() < 1e-14);
        assert!(p.value(x) > 0.0);
    }
}

#[test]
fn double_power_kink_matches_logistic_oracle() {
    let nl = Nonlinearity::double_power(1.0, 2.0).unwrap();
    let kc = nl.kink_constants().unwrap();
    let l = 80.0 / kc.omega0.sqrt();
    let grid = Grid::line(l, 8192).unwrap();
    let p = kink_profile(&nl, &kc, &grid).unwrap();
    assert_eq!(p.kind(), ProfileKind::Kink);
    assert!((p.value(0.0) - 1.0 / 3.0).abs() < 1e-12);
    assert!(p.residual() < 1e-8, "residual {}", p.residual());
    let v = p.values();
    // strictly decreasing wherever b − φ is representable next to b
    assert!(v.windows(2).all(|w| w[1] <= w[0]));
    assert!(v
        .windows(2)
        .filter(|w| kc.b - w[0] > 1e-12)
        .all(|w| w[1] < w[0]));
    assert!((v[0] - kc.b).abs() < 1e-10);
    assert!(v[v.len() - 1] < 1e-10);
    // H(s) = s²(s − 2/3)²/4 makes the kink logistic: φ = b/(1 + e^{bx/√2})
    let b = 2.0 / 3.0;
    for &x in &[-30.0, -4.0, -0.5, 0.0, 1.3, 12.0, 40.0] {
        let oracle = b / (1.0 + (b * x / 2f64.sqrt()).exp());
        assert!((p.value(x) - oracle).abs() < 1e-11, "x={x}: {} vs {oracle}", p.value(x));
    }
}

#[test]
fn kink_tails_follow_linear_rates() {
    let nl = Nonlinearity::double_power(1.0, 2.0).unwrap();
    let kc = nl.kink_constants().unwrap();
    let grid = Grid::line(60.0, 2048).unwrap();
    let p = kink_profile(&nl, &kc, &grid).unwrap();
    let b = kc.b;
    // outside the window: continuation with rates √h'(b) and √ω₀
    for &x in &[-45.0, 45.0] {
        let oracle = b / (1.0 + (b * x / 2f64.sqrt()).exp());
        let pt = p.eval(x);
        assert!(pt.extrapolated);
        assert!((pt.value.re - oracle).abs() < 1e-12);
    }
}

#[test]
fn gp_kink_examples() {
    let grid = Grid::line(60.0, 1024).unwrap();
    let k0 = gp_kink(0.0, &grid).unwrap();
    for &x in &[-3.0, 0.0, 0.7, 5.0] {
        let z = k0.eval(x).value;
        assert!((z.re - (x / 2f64.sqrt()).tanh()).abs() < 1e-15);
        assert_eq!(z.im, 0.0);
    }
    for c in [0.0, 0.5, 1.0] {
        let k = gp_kink(c, &grid).unwrap();
        assert!((k.limit_minus_inf().norm() - 1.0).abs() < 1e-10);
        assert!((k.limit_plus_inf().norm() - 1.0).abs() < 1e-10);
        assert!((k.eval(1e3).value.norm() - 1.0).abs() < 1e-10);
        assert!((k.eval(-1e3).value.norm() - 1.0).abs() < 1e-10);
        assert!(k.residual() < 1e-12, "c={c}: {}", k.residual());
    }
    assert!(matches!(gp_kink(2f64.sqrt(), &grid), Err(NlsError::SpeedAboveSound(_))));
}
