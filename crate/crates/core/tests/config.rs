use fran_sdcp::config::{load_config, parse_config, ConfigError, SweepVariable};
use fran_sdcp::model::{CompressionMode, CycleConvention, UplinkNumerator};
use fran_sdcp::sim::CouplingMode;
use fran_sdcp::stp::RateFormula;

#[test]
fn empty_object_gives_reference_values() {
    let c = parse_config("{}").unwrap();
    assert!((c.network.cluster_param() - 1e-4).abs() < 1e-18);
    assert_eq!(c.network.pathloss_exponent, 4.0);
    assert_eq!(c.network.bandwidth, 5e6);
    assert_eq!(c.network.power_control, 0.8);
    assert_eq!(c.network.max_tx_power, 0.2);
    assert_eq!(
        (c.hardware.ues_per_fn, c.hardware.fns_per_fap, c.hardware.faps),
        (4, 2, 1)
    );
    assert_eq!(c.task.packet_bits, 2048.0);
    assert_eq!(c.task.compression_ratio, 0.6);
    assert_eq!(c.tau.db(), 0.0);
    assert_eq!(
        (
            c.hardware.ue_speed,
            c.hardware.fn_speed,
            c.hardware.fap_dd_speed,
            c.hardware.fap_cp_speed
        ),
        (1e9, 5e9, 24e9, 24e9)
    );
    assert_eq!(
        (
            c.task.cycles_compress_ue,
            c.task.cycles_compress_fn,
            c.task.cycles_decompress,
            c.task.cycles_compute
        ),
        (1e5, 1e5, 1e5, 1.5e5)
    );
    assert_eq!(c.flags.cycle_convention, CycleConvention::PerTask);
    assert_eq!(c.flags.formula_mode, RateFormula::default());
    assert_eq!(c.flags.coupling_mode, CouplingMode::WeightedSum);
    assert_eq!(c.flags.uplink_numerator, UplinkNumerator::default());
    assert!(!c.flags.thinned_arrivals);
    assert_eq!(c.sweep.variable, SweepVariable::Rho);
}

#[test]
fn full_document() {
    let c = parse_config(
        r#"{
            "network": {"fn_density": 1e-5, "power_control": 0.5},
            "task": {"gen_rate": 300, "target_latency": 0.005},
            "hardware": {"backhaul_capacity": 2e7},
            "tau": {"linear": 2.0},
            "modes": ["local", {"hybrid": 0.25}],
            "sweep": {"variable": "psi", "values": [200, 300, 400]},
            "mc": {"seed": 9, "step_tasks": 20000},
            "flags": {"cycle_convention": "per_bit", "coupling_mode": "routing_mixture", "thinned_arrivals": true}
        }"#,
    )
    .unwrap();
    assert_eq!(c.network.fn_density, 1e-5);
    assert_eq!(c.tau.value(), 2.0);
    assert_eq!(c.modes, vec![CompressionMode::Local, CompressionMode::Hybrid(0.25)]);
    assert_eq!(c.sweep.variable, SweepVariable::Psi);
    assert_eq!(c.mc_config().coupling_mode, CouplingMode::RoutingMixture);
    assert_eq!(c.flags.cycle_convention, CycleConvention::PerBit);
}

#[test]
fn validation_errors() {
    for doc in [
        r#"{"task": {"compression_ratio": 1.2}}"#,
        r#"{"network": {"cluster_param": 1e-4, "fn_density": 1e-5}}"#,
        r#"{"modes": []}"#,
        r#"{"modes": [{"hybrid": 1.5}]}"#,
        r#"{"sweep": {"variable": "rho", "values": [0.003, 0.002]}}"#,
        r#"{"sweep": {"variable": "beta", "values": [0.5, 1.5]}}"#,
        r#"{"mc": {"batches": 1}}"#,
        r#"{"hardware": {"backhaul_capacity": -1}}"#,
    ] {
        match parse_config(doc) {
            Err(ConfigError::Validation(_)) => {}
            other => panic!("{doc}: {other:?}"),
        }
    }
}

#[test]
fn parse_errors_name_the_key() {
    match parse_config(r#"{"task": {"gamma_ratio": 0.5}}"#) {
        Err(e @ ConfigError::Parse { line: 1, .. }) => assert!(e.to_string().contains("gamma_ratio"), "{e}"),
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        parse_config("{\n\"tau\": \n"),
        Err(ConfigError::Parse { line: 3, .. })
    ));
    assert!(matches!(
        parse_config(r#"{"tau": {"db": 1, "linear": 2}}"#),
        Err(ConfigError::Parse { .. })
    ));
}

#[test]
fn files() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.json");
    std::fs::write(&p, r#"{"tau": {"db": 3}}"#).unwrap();
    assert_eq!(load_config(&p).unwrap().tau.value(), 10f64.powf(0.3));
    assert!(matches!(
        load_config(&dir.path().join("missing.json")),
        Err(ConfigError::Io(_))
    ));
}
