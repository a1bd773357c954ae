use fran_sdcp::geometry::NetworkParams;
use fran_sdcp::model::{derive_service_rates, CompressionMode, CycleConvention, HardwareProfile, TaskProfile};
use fran_sdcp::queueing::{mg1_sojourn_cdf, mm1_sojourn_cdf, Mg1Fap, Mm1Stage};
use fran_sdcp::sim::*;
use fran_sdcp::stp::SirThreshold;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Kolmogorov-Smirnov distance of thinned samples against `cdf`.
fn ks_distance(samples: &[f64], thin: usize, cdf: impl Fn(f64) -> f64) -> (f64, usize) {
    let mut xs: Vec<f64> = samples.iter().step_by(thin).copied().collect();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max);
    (d, xs.len())
}

#[test]
fn mm1_sojourns_follow_exponential_law() {
    let (lambda, mu) = (800.0, 1000.0);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let s = simulate_sojourns_mm1(lambda, mu, 50_000, 2_000_000, &mut rng).unwrap();
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    assert!((mean * (mu - lambda) - 1.0).abs() < 0.03, "mean {mean}");
    let stage = Mm1Stage::new(lambda, mu).unwrap();
    let (d, n) = ks_distance(&s, 400, |t| mm1_sojourn_cdf(&stage, t).unwrap());
    assert!(d < 1.63 / (n as f64).sqrt(), "KS {d} over {n}");
}

#[test]
fn mg1_sojourns_follow_closed_form() {
    let fap = Mg1Fap::new(1600.0, 2.4e5, 1.6e5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let s = simulate_sojourns_mg1(&fap, 10_000, 1_000_000, &mut rng).unwrap();
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    assert!((mean / fap.mean_sojourn() - 1.0).abs() < 0.01);
    let (d, n) = ks_distance(&s, 10, |t| mg1_sojourn_cdf(&fap, t).unwrap());
    assert!(d < 1.63 / (n as f64).sqrt(), "KS {d} over {n}");

    // Heavier load, where waiting dominates.
    let fap = Mg1Fap::new(2.0, 5.0, 4.0).unwrap();
    let s = simulate_sojourns_mg1(&fap, 20_000, 4_000_000, &mut rng).unwrap();
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    assert!(
        (mean / fap.mean_sojourn() - 1.0).abs() < 0.03,
        "{mean} vs {}",
        fap.mean_sojourn()
    );
    let (d, n) = ks_distance(&s, 400, |t| mg1_sojourn_cdf(&fap, t).unwrap());
    assert!(d < 1.63 / (n as f64).sqrt(), "KS {d} over {n}");
}

#[test]
fn estimates_are_seed_stable() {
    let cfg = McConfig {
        seed: 5,
        stp_iterations: 2000,
        step_tasks: 100_000,
        ..McConfig::default()
    };
    let net = NetworkParams::reference();
    let tau = SirThreshold::from_db(0.0).unwrap();
    assert_eq!(mc_stp(&net, tau, &cfg).unwrap(), mc_stp(&net, tau, &cfg).unwrap());
    let other = McConfig { seed: 6, ..cfg };
    assert_ne!(
        mc_stp(&net, tau, &cfg).unwrap().point,
        mc_stp(&net, tau, &other).unwrap().point
    );

    let (task, hw) = (TaskProfile::reference(), HardwareProfile::reference());
    let rates = derive_service_rates(&task, &hw, CycleConvention::PerTask);
    let mode = CompressionMode::Hybrid(0.4);
    let delays = DelayBudget::new(mode, &task, &hw, 1e7, Default::default());
    let grid = [1e-3, 2e-3];
    let a = mc_step(mode, &rates, &delays, &grid, &cfg).unwrap();
    let b = mc_step(mode, &rates, &delays, &grid, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn step_estimate_is_zero_below_the_delay_floor() {
    let cfg = McConfig {
        seed: 1,
        step_tasks: 50_000,
        ..McConfig::default()
    };
    let (task, hw) = (TaskProfile::reference(), HardwareProfile::reference());
    let rates = derive_service_rates(&task, &hw, CycleConvention::PerTask);
    for mode in [
        CompressionMode::Local,
        CompressionMode::Edge,
        CompressionMode::Hybrid(0.5),
    ] {
        for coupling_mode in [CouplingMode::WeightedSum, CouplingMode::RoutingMixture] {
            let delays = DelayBudget::new(mode, &task, &hw, 1e7, Default::default());
            let below = 0.999 * delays.uplink_local.min(delays.uplink_edge) + 0.999 * delays.backhaul;
            let cfg = McConfig { coupling_mode, ..cfg };
            let e = mc_step(mode, &rates, &delays, &[below], &cfg).unwrap();
            assert_eq!(e[0].point, 0.0);
        }
    }
}

#[test]
fn mc_stp_tracks_threshold() {
    let cfg = McConfig {
        seed: 3,
        stp_iterations: 4000,
        ..McConfig::default()
    };
    let net = NetworkParams::reference();
    let taus: Vec<SirThreshold> = [-3.0, 0.0, 3.0, 6.0]
        .iter()
        .map(|&d| SirThreshold::from_db(d).unwrap())
        .collect();
    let est = mc_stp_many(&net, &taus, &cfg).unwrap();
    assert!(est.windows(2).all(|w| w[1].point <= w[0].point));
    assert!(est.iter().all(|e| e.half_width_99 > 0.0 && e.half_width_99 < 0.05));
}

#[test]
fn invalid_configurations_are_rejected() {
    let net = NetworkParams::reference();
    let tau = SirThreshold::from_db(0.0).unwrap();
    let bad = McConfig {
        batches: 1,
        ..McConfig::default()
    };
    assert!(mc_stp(&net, tau, &bad).is_err());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(simulate_sojourns_mm1(2.0, 1.0, 0, 10, &mut rng).is_err());
}
