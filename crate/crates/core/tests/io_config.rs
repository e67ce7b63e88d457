//! Binary formats, CSV tables and config parsing/validation.

use num_complex::Complex64;
use serde_json::json;
use nlslab::config::{set_path, ExperimentConfig, ExperimentKind};
use nlslab::grid::{Field, Grid};
use nlslab::io::{load_snapshots, read_field, read_profile, save_snapshots, write_field, write_profile, Table};
use nlslab::nonlinearity::Nonlinearity;
use nlslab::profiles::{gp_kink, ground_state_power_1d, ground_state_shoot, kink_profile, RadialGrid};
use nlslab::NlsError;

#[test]
fn profiles_round_trip_bit_exactly() {
    let dp = Nonlinearity::double_power(1.0, 2.0).unwrap();
    let profiles = vec![
        ground_state_power_1d(2.0, 1.0, &Grid::line(60.0, 512).unwrap()).unwrap(),
        kink_profile(&dp, &dp.kink_constants().unwrap(), &Grid::line(120.0, 1024).unwrap()).unwrap(),
        gp_kink(0.5, &Grid::line(60.0, 512).unwrap()).unwrap(),
        ground_state_shoot(&Nonlinearity::power(2.0).unwrap(), 1.0, 3, RadialGrid { r_max: 20.0, count: 801 }).unwrap(),
    ];
    for p in &profiles {
        let mut bytes = Vec::new();
        write_profile(&mut bytes, p).unwrap();
        assert_eq!(&bytes[..4], b"NLSP");
        let q = read_profile(&mut bytes.as_slice()).unwrap();
        assert_eq!(q.kind(), p.kind());
        assert_eq!(q.dim(), p.dim());
        assert_eq!(q.sample_coords(), p.sample_coords());
        assert_eq!(q.values(), p.values());
        assert_eq!(q.complex_values(), p.complex_values());
        // the file stores samples only; the loaded profile interpolates through them
        let coords = p.sample_coords();
        for i in (0..coords.len()).step_by(97) {
            let stored = match p.complex_values() {
                Some(c) => c[i],
                None => Complex64::new(p.values()[i], 0.0),
            };
            assert!((q.eval(coords[i]).value - stored).norm() < 1e-14);
        }
    }
}

#[test]
fn fields_round_trip_and_truncation_is_an_error() {
    let grid = Grid::plane([10.0, 20.0], [16, 32]).unwrap();
    let f = Field::from_fn(&grid, 1.25, |p| Complex64::new(p[0].sin(), p[1] * 0.1));
    let mut bytes = Vec::new();
    write_field(&mut bytes, &f).unwrap();
    let g = read_field(&mut bytes.as_slice()).unwrap();
    assert_eq!(g.values, f.values);
    assert_eq!(g.time, 1.25);
    assert_eq!(g.grid, f.grid);
    bytes.truncate(bytes.len() - 3);
    assert!(read_field(&mut bytes.as_slice()).is_err());
}

#[test]
fn snapshot_index_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Grid::line(10.0, 32).unwrap();
    let snaps: Vec<Field> = (0..3)
        .map(|i| Field::from_fn(&grid, i as f64 * 0.5, |p| Complex64::new(p[0] + i as f64, 0.0)))
        .collect();
    let index = save_snapshots(dir.path(), &snaps).unwrap();
    let back = load_snapshots(&index).unwrap();
    assert_eq!(back.len(), 3);
    for (a, b) in back.iter().zip(&snaps) {
        assert_eq!(a.values, b.values);
        assert_eq!(a.time, b.time);
    }
}

#[test]
fn csv_tables_use_seventeen_digit_scientific_notation() {
    let mut t = Table::new(["t", "value"]);
    t.push(vec![0.1, 1.0 / 3.0]);
    t.push(vec![-2.5e-300, f64::NAN]);
    let mut out = Vec::new();
    t.write(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,value");
    assert_eq!(lines[1], "1.0000000000000001e-1,3.3333333333333331e-1");
    let back = Table::read(text.as_bytes()).unwrap();
    assert_eq!(back.column("t").unwrap(), vec![0.1, -2.5e-300]);
    assert!(back.column("value").unwrap()[1].is_nan());
    assert!(back.column("missing").is_none());
}

fn evolve_config() -> serde_json::Value {
    json!({
        "experiment": "evolve",
        "nonlinearity": {"kind": "power", "alpha": 2.0},
        "grid": {"length": 40.0, "count": 256},
        "train": {"pair": {"omega": 1.0, "v_star": 4.0}},
        "evolution": {"dt": 0.01, "t_end": 0.5}
    })
}

#[test]
fn configs_parse_and_report_paths() {
    let cfg = ExperimentConfig::from_value(evolve_config()).unwrap();
    assert_eq!(cfg.experiment, ExperimentKind::Evolve);
    assert_eq!(cfg.grid().unwrap().counts(), &[256]);
    assert_eq!(cfg.seed, 0);

    let mut missing = evolve_config();
    missing.as_object_mut().unwrap().remove("evolution");
    match ExperimentConfig::from_value(missing).unwrap_err() {
        NlsError::Config { path, .. } => assert_eq!(path, "evolution"),
        e => panic!("{e:?}"),
    }

    let mut unknown = evolve_config();
    unknown["grid"]["spacing"] = json!(0.1);
    match ExperimentConfig::from_value(unknown).unwrap_err() {
        NlsError::Config { path, .. } => assert!(path.starts_with("grid"), "{path}"),
        e => panic!("{e:?}"),
    }

    let mut two_sources = evolve_config();
    two_sources["train"]["components"] = json!([{"omega": 1.0}]);
    assert!(matches!(ExperimentConfig::from_value(two_sources), Err(NlsError::Config { .. })));

    let mut bad_count = evolve_config();
    bad_count["grid"]["count"] = json!(300);
    match ExperimentConfig::from_value(bad_count).unwrap_err() {
        NlsError::Config { path, .. } => assert_eq!(path, "grid"),
        e => panic!("{e:?}"),
    }
}

#[test]
fn set_path_targets_nested_numbers() {
    let mut v = evolve_config();
    set_path(&mut v, "train.pair.v_star", 16.0).unwrap();
    assert_eq!(v["train"]["pair"]["v_star"], json!(16.0));
    set_path(&mut v, "evolution.dt", 5e-3).unwrap();
    assert_eq!(ExperimentConfig::from_value(v.clone()).unwrap().evolution.unwrap().dt, 5e-3);
    assert!(matches!(set_path(&mut v, "train.pair.speed", 1.0), Err(NlsError::Config { .. })));
    assert!(matches!(set_path(&mut v, "train.pair", 1.0), Err(NlsError::Config { .. })));
}
