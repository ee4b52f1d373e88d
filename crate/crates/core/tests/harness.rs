use svcauction_core::harness::{
    designated_buyer, load_config, payoff_surface, run_band_sweep, to_csv_string, write_csv, GridSpec,
};
use svcauction_core::{generate_instance, Error, ScenarioConfig};

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    let config = ScenarioConfig::reference().with_seed(42).with_bands(6);
    std::fs::write(&path, config.to_json()).unwrap();
    assert_eq!(load_config(&path).unwrap(), config);
}

#[test]
fn missing_field_is_named() {
    let mut value: serde_json::Value = serde_json::from_str(&ScenarioConfig::reference().to_json()).unwrap();
    value.as_object_mut().unwrap().remove("interference_range_m");
    let err = ScenarioConfig::from_json(&value.to_string()).unwrap_err();
    assert!(matches!(err, Error::Schema(_)));
    assert!(err.to_string().contains("interference_range_m"), "{err}");
}

#[test]
fn sweep_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = ScenarioConfig::reference();
    write_csv(&run_band_sweep(&c, &[1, 2, 3], 4).unwrap(), &a).unwrap();
    write_csv(&run_band_sweep(&c, &[3, 2, 1], 4).unwrap(), &b).unwrap();
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().count(), 1 + 12);
}

#[test]
fn sweep_shape() {
    let r = run_band_sweep(&ScenarioConfig::reference(), &[1, 2, 3, 4, 5, 6], 5).unwrap();
    for w in r.means.windows(2) {
        assert!(w[1].p1_throughput_mbps >= w[0].p1_throughput_mbps);
    }
    for m in &r.means {
        assert!(m.auction_throughput_mbps <= m.p1_throughput_mbps);
    }
    let means = to_csv_string(&r.means_table()).unwrap();
    assert_eq!(means.lines().count(), 7);
}

#[test]
fn coarse_surface_peaks_at_truth() {
    let inst = generate_instance(&ScenarioConfig::reference()).unwrap();
    let buyer = designated_buyer(&inst).unwrap();
    let s = payoff_surface(&inst, buyer, GridSpec::with_points(9)).unwrap();
    assert_eq!(s.cells.len(), 81);
    assert!(s.truthful_utility() + 1e-9 >= s.max_utility());
}
