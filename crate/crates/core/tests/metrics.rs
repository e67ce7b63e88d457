//! Conserved quantities, distances, Strichartz proxies and rate fits.

use num_complex::Complex64;
use nlslab::grid::{Field, Grid};
use nlslab::metrics::{
    admissible_pairs, conserved, distances, fit_decay_window, fit_exponential_rate, strichartz_norm,
    strichartz_running, AdmissiblePair, DecayWindow,
};
use nlslab::nonlinearity::Nonlinearity;

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

#[test]
fn cubic_soliton_mass_and_momentum() {
    let grid = Grid::line(80.0, 2048).unwrap();
    let cubic = Nonlinearity::power(2.0).unwrap();
    let phi = Field::from_fn(&grid, 0.0, |p| Complex64::new(2f64.sqrt() * sech(p[0]), 0.0));
    let r = conserved(&phi, &cubic).unwrap();
    assert!((r.mass - 2.0).abs() < 1e-12, "mass {}", r.mass);
    // energy oracle: rectangle rule on the closed-form derivative
    let h = grid.spacing(0);
    let oracle: f64 = grid
        .coords(0)
        .iter()
        .map(|&x| {
            let d = -2f64.sqrt() * sech(x) * x.tanh();
            let u = 2f64.sqrt() * sech(x);
            (0.5 * d * d - 0.25 * u.powi(4)) * h
        })
        .sum();
    assert!((r.energy - oracle).abs() < 1e-10);
    let boosted = Field::from_fn(&grid, 0.0, |p| Complex64::from_polar(2f64.sqrt() * sech(p[0]), 2.0 * p[0]));
    let rb = conserved(&boosted, &cubic).unwrap();
    assert!((rb.momentum[0] - 8.0).abs() < 1e-10, "P = {}", rb.momentum[0]);
    assert!((rb.momentum[0] - 4.0 * rb.mass).abs() < 1e-10);
}

#[test]
fn plane_wave_perturbation_distances() {
    let l = 20.0;
    let grid = Grid::line(l, 256).unwrap();
    let k = 2.0 * std::f64::consts::PI * 3.0 / l;
    let eps = 1e-3;
    let base = Field::from_fn(&grid, 0.0, |p| Complex64::new((-p[0] * p[0]).exp(), 0.0));
    let bumped = Field::from_fn(&grid, 0.0, |p| base_value(p[0]) + eps * Complex64::from_polar(1.0, k * p[0]));
    let d = distances(&bumped, &base).unwrap();
    assert!((d.l2 - eps * l.sqrt()).abs() < 1e-14);
    assert!((d.h1 - eps * (l * (1.0 + k * k)).sqrt()).abs() < 1e-13);
    assert!((d.sup - eps).abs() < 1e-15);
    assert_eq!(distances(&base, &base).unwrap().h1, 0.0);
    let back = distances(&base, &bumped).unwrap();
    assert_eq!(back, d);
}

fn base_value(x: f64) -> Complex64 {
    Complex64::new((-x * x).exp(), 0.0)
}

#[test]
fn admissible_pair_examples() {
    let has = |d: usize, q: f64, r: f64| {
        admissible_pairs(d, 7)
            .iter()
            .any(|p| (p.q == q || (p.q - q).abs() < 1e-12) && (p.r == r || (p.r - r).abs() < 1e-12))
    };
    assert!(has(1, f64::INFINITY, 2.0));
    assert!(has(1, 4.0, f64::INFINITY));
    assert!(!has(2, 2.0, f64::INFINITY));
    assert!(has(3, 2.0, 6.0));
}

#[test]
fn strichartz_examples() {
    let grid = Grid::line(10.0, 64).unwrap();
    let zero: Vec<Field> = (0..5).map(|i| Field::zeros(&grid, 0.1 * i as f64)).collect();
    assert_eq!(strichartz_norm(&zero, &admissible_pairs(1, 4)).unwrap(), 0.0);

    let still: Vec<Field> = (0..5)
        .map(|i| Field::from_fn(&grid, 0.25 * i as f64, |p| Complex64::new((-p[0] * p[0]).exp(), 0.0)))
        .collect();
    let energy_pair = [AdmissiblePair { q: f64::INFINITY, r: 2.0 }];
    let s = strichartz_norm(&still, &energy_pair).unwrap();
    assert!((s - still[0].l2_norm()).abs() < 1e-15);

    let pairs = admissible_pairs(1, 5);
    let few = strichartz_norm(&still, &pairs[..2]).unwrap();
    let all = strichartz_norm(&still, &pairs).unwrap();
    assert!(all >= few);

    let running = strichartz_running(&still, &pairs).unwrap();
    assert_eq!(running.len(), still.len());
    for w in running.windows(2) {
        assert!(w[0].iter().zip(&w[1]).all(|(a, b)| b >= a));
    }
    let last_max = running.last().unwrap().iter().copied().fold(0.0, f64::max);
    assert!((last_max - all).abs() < 1e-12 * all);
}

#[test]
fn exponential_fit_examples() {
    let fit = fit_exponential_rate(&[0.0, 1.0, 2.0], &[1.0, (-3f64).exp(), (-6f64).exp()]).unwrap();
    assert!((fit.rate - 3.0).abs() < 1e-12);
    assert!((fit.r_squared - 1.0).abs() < 1e-12);
    let flat = fit_exponential_rate(&[0.0, 1.0, 2.0, 3.0], &[2.0; 4]).unwrap();
    assert!(flat.rate.abs() < 1e-14);
    assert!(fit_exponential_rate(&[0.0], &[1.0]).is_err());
    assert!(fit_exponential_rate(&[0.0, 1.0], &[1.0, -1.0]).is_err());
}

#[test]
fn decay_window_keeps_the_exponential_stretch() {
    // rise, exponential decay, then a roundoff floor
    let times: Vec<f64> = (0..=100).map(|i| 0.1 * i as f64).collect();
    let values: Vec<f64> = times
        .iter()
        .map(|&t| if t < 1.0 { t } else { ((-2.0 * (t - 1.0)).exp()).max(1e-14) })
        .collect();
    let w = fit_decay_window(&times, &values, DecayWindow::default()).unwrap();
    assert!((w.fit.rate - 2.0).abs() < 1e-9, "rate {}", w.fit.rate);
    assert!(w.values.iter().all(|&v| v >= 1e-12 && v <= 1e-2));
    assert!(*w.times.last().unwrap() <= 10.0 - 0.5);
}
