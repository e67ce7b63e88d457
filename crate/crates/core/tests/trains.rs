//! Soliton and kink trains: superposition, admissibility reports, generated
//! families and truncation.

use std::sync::Arc;

use num_complex::Complex64;
use nlslab::grid::Grid;
use nlslab::nonlinearity::Nonlinearity;
use nlslab::profiles::{ground_state_power_1d, kink_profile};
use nlslab::trains::{
    boost_kink, boost_soliton, exponent_window, generate_train_params, ground_state, sum_profile, truncate_train,
    truncation_size, validate_theorem1, validate_theorem2, validate_theorem3, validate_theorem4, ExponentWindow,
    PhaseRule, TrainFamily, TrainLength, TrainParams, TrainSpec, WaveSpec,
};

fn cubic() -> Nonlinearity {
    Nonlinearity::power(2.0).unwrap()
}

fn soliton(omega: f64, x0: f64, v: f64) -> WaveSpec {
    WaveSpec::new(ground_state(&cubic(), omega, 1).unwrap(), 0.0, [x0, 0.0], [v, 0.0])
}

fn family(v_sharp: f64, n: TrainLength) -> TrainFamily {
    TrainFamily {
        omega_ratio: 0.25,
        omega1: 1.0,
        v_sharp,
        phases: PhaseRule::Zero,
        n,
    }
}

#[test]
fn identity_boost_returns_profile() {
    let grid = Grid::line(60.0, 1024).unwrap();
    let p = Arc::new(ground_state_power_1d(2.0, 1.0, &grid).unwrap());
    let w = WaveSpec::new(p.clone(), 0.0, [0.0, 0.0], [0.0, 0.0]);
    for &x in &[-2.0, 0.0, 0.7, 5.0] {
        assert_eq!(boost_soliton(&w, 0.0, [x, 0.0]).unwrap(), Complex64::new(p.value(x), 0.0));
    }
    let moving = WaveSpec::new(p.clone(), 0.4, [1.0, 0.0], [3.0, 0.0]);
    for &(t, x) in &[(0.5, 2.0), (1.3, -1.0), (2.0, 7.0)] {
        let r = boost_soliton(&moving, t, [x, 0.0]).unwrap();
        assert!((r.norm() - p.value(x - 3.0 * t - 1.0)).abs() < 1e-14);
    }
    let dp = Nonlinearity::double_power(1.0, 2.0).unwrap();
    let k = Arc::new(kink_profile(&dp, &dp.kink_constants().unwrap(), &Grid::line(200.0, 8192).unwrap()).unwrap());
    let kw = WaveSpec::new(k.clone(), 0.0, [0.0, 0.0], [0.0, 0.0]);
    assert_eq!(boost_kink(&kw, 0.0, [1.5, 0.0]).unwrap(), Complex64::new(k.value(1.5), 0.0));
    assert!(boost_kink(&moving, 0.0, [0.0, 0.0]).is_err());
    assert!(boost_soliton(&kw, 0.0, [0.0, 0.0]).is_err());
}

#[test]
fn boosted_mass_is_invariant() {
    let grid = Grid::line(80.0, 2048).unwrap();
    let still = TrainSpec::new(vec![soliton(1.0, 0.0, 0.0)], None, None, TrainParams::new(2.0, 1)).unwrap();
    let moving = TrainSpec::new(vec![soliton(1.0, -3.0, 5.0)], None, None, TrainParams::new(2.0, 1)).unwrap();
    let m = |u: &nlslab::grid::Field| 0.5 * u.l2_norm().powi(2);
    let a = m(&sum_profile(&still, 0.0, &grid).unwrap());
    let b = m(&sum_profile(&moving, 1.1, &grid).unwrap());
    assert!((a - b).abs() < 1e-10);
}

#[test]
fn sum_profile_is_superposition() {
    let grid = Grid::line(60.0, 1024).unwrap();
    let a = soliton(1.0, 4.0, -1.0);
    let b = soliton(1.0, -4.0, 1.0);
    let single = TrainSpec::new(vec![a.clone()], None, None, TrainParams::new(2.0, 1)).unwrap();
    let pair = TrainSpec::new(vec![a.clone(), b.clone()], None, None, TrainParams::new(2.0, 1)).unwrap();
    let s = sum_profile(&single, 0.3, &grid).unwrap();
    for (z, p) in s.values.iter().zip(grid.points()) {
        assert_eq!(*z, boost_soliton(&a, 0.3, p).unwrap());
    }
    // at x = 0 and t = 0 both sit at distance 4 with opposite phases e^{∓i·0}
    let u = sum_profile(&pair, 0.0, &grid).unwrap();
    let mid = grid.counts()[0] / 2;
    assert_eq!(grid.coords(0)[mid], 0.0);
    let phi4 = a.profile.value(4.0);
    assert!((u.values[mid] - Complex64::new(2.0 * phi4, 0.0)).norm() < 1e-14);
}

#[test]
fn theorem1_examples() {
    let train = TrainSpec::new(
        vec![soliton(1.0, 0.0, -3.0), soliton(4.0, 0.0, 5.0)],
        None,
        None,
        TrainParams::new(2.0, 1),
    )
    .unwrap();
    let r = validate_theorem1(&train).unwrap();
    assert!((r.omega_star - 0.5).abs() < 1e-15);
    assert!((r.v_star - 8.0).abs() < 1e-15);
    assert!(r.ground_states_only);

    let one = TrainSpec::new(vec![soliton(1.0, 0.0, 0.0)], None, None, TrainParams::new(2.0, 1)).unwrap();
    let r1 = validate_theorem1(&one).unwrap();
    assert!(r1.unconstrained && r1.v_star.is_infinite());

    let same = TrainSpec::new(
        vec![soliton(1.0, -5.0, 2.0), soliton(1.0, 5.0, 2.0)],
        None,
        None,
        TrainParams::new(2.0, 1),
    )
    .unwrap();
    let r2 = validate_theorem1(&same).unwrap();
    assert_eq!(r2.v_star, 0.0);
    assert!(!r2.admissible);
}

#[test]
fn generated_family_matches_recurrence_and_speed_condition() {
    let t = generate_train_params(&family(10.0, TrainLength::Finite(3)), &cubic(), TrainParams::new(2.0, 1)).unwrap();
    let omegas: Vec<f64> = t.components().iter().map(|c| c.omega).collect();
    let vs: Vec<f64> = t.components().iter().map(|c| c.v[0]).collect();
    assert_eq!(omegas, vec![1.0, 0.25, 0.0625]);
    assert_eq!(vs, vec![0.0, 20.0, 60.0]);
    for j in 0..3 {
        for k in 0..3 {
            if j != k {
                assert!(omegas[j].min(omegas[k]).sqrt() * (vs[k] - vs[j]).abs() >= 10.0 - 1e-12);
            }
        }
    }
    let single = generate_train_params(&family(10.0, TrainLength::Finite(1)), &cubic(), TrainParams::new(2.0, 1)).unwrap();
    assert_eq!(single.components().len(), 1);
    assert!(validate_theorem1(&single).unwrap().unconstrained);
}

#[test]
fn theorem2_partial_sums_follow_the_geometric_oracle() {
    let t = generate_train_params(&family(20.0, TrainLength::Finite(6)), &cubic(), TrainParams::new(2.0, 1)).unwrap();
    let r = validate_theorem2(&t, 2.0, 2.0, 0.5, Some(20.0)).unwrap();
    assert!((r.integrability.exponent - 0.25).abs() < 1e-15);
    // Σ_{j=1}^{6} ωⱼ^{1/4} with ωⱼ = 4^{−(j−1)}
    let oracle: f64 = (1..=6).map(|j| 4f64.powf(-(j as f64 - 1.0) / 4.0)).sum();
    let last = *r.integrability.partial_sums.last().unwrap();
    assert!((last - oracle).abs() < 1e-12, "{last} vs {oracle}");
    let bound = 1.0 / (1.0 - 4f64.powf(-0.25));
    assert!(r.integrability.partial_sums.windows(2).all(|w| w[1] > w[0]));
    assert!(r.integrability.partial_sums.iter().all(|&s| s < bound));
    // the power scaling makes the profile constants identical across j
    let c = &r.uniform_bound.constants;
    assert!(c.iter().all(|x| (x - c[0]).abs() < 1e-9 * c[0]));
    assert!(r.pass);
}

#[test]
fn theorem2_single_component_is_unconstrained() {
    let t = TrainSpec::new(vec![soliton(1.0, 0.0, 3.0)], None, None, TrainParams::new(2.0, 1)).unwrap();
    let r = validate_theorem2(&t, 2.0, 2.0, 0.5, None).unwrap();
    assert!(r.speeds.v_star.is_infinite());
    // V⋆ = ⟨v₁⟩ ω₁^{1/α − d/4}
    let expect = (1.0f64 + 9.0).sqrt();
    assert!((t.derived().big_v_star - expect).abs() < 1e-12);
    assert!(validate_theorem2(&t, 2.0, 1.0, 0.5, None).is_err());
    assert!(validate_theorem2(&t, 2.0, 2.0, 1.5, None).is_err());
}

#[test]
fn theorem4_exponent_windows() {
    assert_eq!(exponent_window(1.0, 2.0), ExponentWindow::Small);
    assert_eq!(exponent_window(1.4, 2.0 / 1.4), ExponentWindow::Intermediate);
    assert_eq!(exponent_window(1.5, 2.0), ExponentWindow::Outside);
    assert_eq!(exponent_window(1.4, 2.0), ExponentWindow::Outside);
}

#[test]
fn kink_trains_need_increasing_velocities() {
    let dp = Nonlinearity::double_power(1.0, 2.0).unwrap();
    let kink = Arc::new(kink_profile(&dp, &dp.kink_constants().unwrap(), &Grid::line(200.0, 8192).unwrap()).unwrap());
    let sol = |v: f64| WaveSpec::new(ground_state(&dp, 0.1, 1).unwrap(), 0.0, [0.0, 0.0], [v, 0.0]);
    let left = |v: f64| Some(WaveSpec::new(kink.clone(), 0.0, [0.0, 0.0], [v, 0.0]));
    let good = TrainSpec::new(vec![sol(-6.0), sol(6.0)], left(-18.0), None, TrainParams::new(1.0, 1)).unwrap();
    let r3 = validate_theorem3(&good);
    assert!(r3.strictly_increasing);
    assert_eq!(r3.kinks, 1);
    let r4 = validate_theorem4(&good, 1.0, 2.0, None);
    assert_eq!(r4.window, ExponentWindow::Small);
    assert!(r4.left_kink_present);
    assert!(TrainSpec::new(vec![sol(-6.0), sol(6.0)], left(0.0), None, TrainParams::new(1.0, 1)).is_err());
    // kinks are not allowed in the interior
    let interior = vec![WaveSpec::new(kink.clone(), 0.0, [0.0, 0.0], [0.0, 0.0])];
    assert!(TrainSpec::new(interior, None, None, TrainParams::new(1.0, 1)).is_err());
}

#[test]
fn truncation_size_against_brute_force_tail() {
    let params = TrainParams::new(2.0, 1);
    let fam = family(20.0, TrainLength::Infinite);
    let (n, tail) = truncation_size(&fam, params, 1e-3).unwrap();
    // brute-force tail Σ_{j>N} 4^{−(j−1)/4}
    let brute = |n: usize| (n + 1..=4000).map(|j| 4f64.powf(-(j as f64 - 1.0) / 4.0)).sum::<f64>();
    assert!(brute(n) < 1e-3 && brute(n - 1) >= 1e-3);
    assert!((tail - brute(n)).abs() < 1e-12);
    assert_eq!(n, 24);
    let full: f64 = brute(0);
    assert_eq!(truncation_size(&fam, params, full * 1.01).unwrap().0, 1);
    let mut prev = 0;
    for k in 0..20 {
        let (m, _) = truncation_size(&fam, params, 0.5f64.powi(k)).unwrap();
        assert!(m >= prev);
        prev = m;
    }
    let inf = generate_train_params(&fam, &cubic(), params).unwrap();
    assert!(inf.is_infinite());
    assert!(sum_profile(&inf, 0.0, &Grid::line(10.0, 64).unwrap()).is_err());
    let t = truncate_train(&inf, &cubic(), 1e-3).unwrap();
    assert_eq!(t.components().len(), 24);
    assert!(!t.is_infinite());
}
