//! Monte Carlo counterparts of the analytic pipeline: spatial SIR
//! simulation for the STP, Lindley-recursion queue simulation for the STEP,
//! and their product for the SDCP.
//!
//! Every random stream is a ChaCha8 stream derived from the user seed and a
//! fixed label, so results do not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{domain, Result};
use crate::geometry::{sample_scene, NetworkParams};
use crate::model::{
    backhaul_delay, derive_service_rates, uplink_delay, CompressionMode, HardwareProfile, ServiceRates, TaskProfile,
    UplinkNumerator,
};
use crate::queueing::{Mg1Fap, Mm1Stage};
use crate::sdcp::AnalysisOptions;
use crate::stp::{ergodic_uplink_rate, SirThreshold};

/// Two-sided 99% standard-normal quantile.
pub const Z99: f64 = 2.575_829_303_548_901;

const STREAM_STP: u64 = 1;
const STREAM_UE: u64 = 2;
const STREAM_FN: u64 = 3;
const STREAM_FAP: u64 = 4;
const STREAM_ROUTE: u64 = 5;

/// Scenes per parallel work unit in the STP simulation.
const STP_CHUNK: usize = 256;

fn stream(seed: u64, label: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((label << 32) | chunk);
    rng
}

/// How the hybrid-mode compression delay is assembled in simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingMode {
    /// `beta * T_fn + (1 - beta) * T_ue` with both queues at full load.
    #[default]
    WeightedSum,
    /// Each task is routed to the fog node with probability `beta`; the two
    /// queues see thinned arrival streams.
    RoutingMixture,
}

impl CouplingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::WeightedSum => "weighted_sum",
            Self::RoutingMixture => "routing_mixture",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McConfig {
    /// Interference scenes for the STP estimate.
    pub stp_iterations: usize,
    /// Tagged tasks for the STEP estimate, warmup included.
    pub step_tasks: usize,
    pub seed: u64,
    pub coupling_mode: CouplingMode,
    /// Leading fraction of tagged tasks discarded from the statistics.
    pub warmup_fraction: f64,
    /// Batches for the batch-means confidence interval of the STEP.
    pub batches: usize,
    /// Simulation window radius in metres; `None` uses 20 mean FN spacings.
    pub window_radius: Option<f64>,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            stp_iterations: 10_000,
            step_tasks: 1_000_000,
            seed: 0,
            coupling_mode: CouplingMode::WeightedSum,
            warmup_fraction: 0.1,
            batches: 100,
            window_radius: None,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.stp_iterations < 100 || self.step_tasks < 100 {
            return domain(format!(
                "Monte Carlo runs need at least 100 iterations (stp_iterations={}, step_tasks={})",
                self.stp_iterations, self.step_tasks
            ));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return domain(format!(
                "warmup_fraction must lie in [0, 1) (got {})",
                self.warmup_fraction
            ));
        }
        if self.batches < 2 || self.batches > self.measured_tasks() {
            return domain(format!(
                "batches must lie in [2, {}] (got {})",
                self.measured_tasks(),
                self.batches
            ));
        }
        if let Some(r) = self.window_radius {
            if !(r > 0.0) || !r.is_finite() {
                return domain(format!("window_radius must be positive (got {r})"));
            }
        }
        Ok(())
    }

    pub fn warmup_tasks(&self) -> usize {
        (self.warmup_fraction * self.step_tasks as f64).floor() as usize
    }

    pub fn measured_tasks(&self) -> usize {
        self.step_tasks - self.warmup_tasks()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateWithCi {
    pub point: f64,
    pub half_width_99: f64,
    pub n_effective: usize,
}

impl EstimateWithCi {
    pub fn lower(&self) -> f64 {
        (self.point - self.half_width_99).max(0.0)
    }

    pub fn upper(&self) -> f64 {
        (self.point + self.half_width_99).min(1.0)
    }

    pub fn contains(&self, x: f64) -> bool {
        (x - self.point).abs() <= self.half_width_99
    }
}

/// Distance from `p` to the farther end of the 99% Wilson score interval.
fn wilson_half_width(p: f64, n: usize) -> f64 {
    let n = n as f64;
    let z2 = Z99 * Z99;
    let scale = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / scale;
    let h = Z99 / scale * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    (p - (centre - h)).max(centre + h - p)
}

/// Student-t 0.995 quantile with `nu` degrees of freedom.
fn t99(nu: usize) -> f64 {
    StudentsT::new(0.0, 1.0, nu as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.995)
}

/// STP estimate at a single threshold.
pub fn mc_stp(params: &NetworkParams, tau: SirThreshold, cfg: &McConfig) -> Result<EstimateWithCi> {
    Ok(mc_stp_many(params, &[tau], cfg)?[0])
}

/// STP estimates at several thresholds from one set of scenes.
pub fn mc_stp_many(params: &NetworkParams, taus: &[SirThreshold], cfg: &McConfig) -> Result<Vec<EstimateWithCi>> {
    params.validate()?;
    cfg.validate()?;
    let window = cfg.window_radius.unwrap_or_else(|| params.default_window_radius());
    let n = cfg.stp_iterations;
    let chunks = n.div_ceil(STP_CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = stream(cfg.seed, STREAM_STP, chunk as u64);
            let scenes = STP_CHUNK.min(n - chunk * STP_CHUNK);
            let mut hits = vec![0u64; taus.len()];
            for _ in 0..scenes {
                let sir = sample_scene(params, window, &mut rng)?.sir(params);
                for (h, tau) in hits.iter_mut().zip(taus) {
                    *h += u64::from(sir > tau.value());
                }
            }
            Ok(hits)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..taus.len())
        .map(|i| {
            let hits: u64 = counts.iter().map(|c| c[i]).sum();
            let p = hits as f64 / n as f64;
            EstimateWithCi {
                point: p,
                half_width_99: Z99 * (p * (1.0 - p) / n as f64).sqrt(),
                n_effective: n,
            }
        })
        .collect())
}

/// Single-server FIFO queue by the Lindley recursion, starting empty.
/// Returns the sojourn times of tasks `warmup..warmup + n`.
fn lindley<R, S>(arrival_rate: f64, warmup: usize, n: usize, rng: &mut R, mut service: S) -> Vec<f64>
where
    R: Rng + ?Sized,
    S: FnMut(&mut R) -> f64,
{
    let mut out = Vec::with_capacity(n);
    let mut wait = 0.0_f64;
    for k in 0..warmup + n {
        let s = service(rng);
        if k >= warmup {
            out.push(wait + s);
        }
        let gap = if arrival_rate > 0.0 {
            rng.sample::<f64, _>(Exp1) / arrival_rate
        } else {
            f64::INFINITY
        };
        wait = (wait + s - gap).max(0.0);
    }
    out
}

/// M/M/1 sojourn times after discarding `warmup` tasks.
pub fn simulate_sojourns_mm1<R: Rng + ?Sized>(
    arrival_rate: f64,
    service_rate: f64,
    warmup: usize,
    n: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    Mm1Stage::new(arrival_rate, service_rate)?;
    Ok(lindley(arrival_rate, warmup, n, rng, |r| {
        r.sample::<f64, _>(Exp1) / service_rate
    }))
}

/// M/G/1 sojourn times with `Exp(mu_dd) + Exp(mu_cp)` service after
/// discarding `warmup` tasks.
pub fn simulate_sojourns_mg1<R: Rng + ?Sized>(fap: &Mg1Fap, warmup: usize, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    let (md, mc) = (fap.mu_dd(), fap.mu_cp());
    Ok(lindley(fap.arrival_rate(), warmup, n, rng, |r| {
        r.sample::<f64, _>(Exp1) / md + r.sample::<f64, _>(Exp1) / mc
    }))
}

/// Deterministic transmission delays of one task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelayBudget {
    /// Uplink delay of a task compressed at its UE.
    pub uplink_local: f64,
    /// Uplink delay of a task sent uncompressed to its fog node.
    pub uplink_edge: f64,
    /// Uplink delay charged to every task of the analysed mode.
    pub uplink_mode: f64,
    pub backhaul: f64,
}

impl DelayBudget {
    pub fn new(
        mode: CompressionMode,
        task: &TaskProfile,
        hw: &HardwareProfile,
        rate: f64,
        numerator: UplinkNumerator,
    ) -> Self {
        Self {
            uplink_local: uplink_delay(CompressionMode::Local, task, rate, numerator),
            uplink_edge: uplink_delay(CompressionMode::Edge, task, rate, numerator),
            uplink_mode: uplink_delay(mode, task, rate, numerator),
            backhaul: backhaul_delay(task, hw),
        }
    }

    /// Deterministic part of the end-to-end delay under the weighted-sum
    /// coupling.
    pub fn floor(&self) -> f64 {
        self.uplink_mode + self.backhaul
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return domain("latency grid is empty");
    }
    if grid.iter().any(|x| x.is_nan()) || grid.windows(2).any(|w| w[1] < w[0]) {
        return domain("latency grid must be ascending");
    }
    Ok(())
}

/// STEP estimates for end-to-end latency targets `rho_grid` (s).
pub fn mc_step(
    mode: CompressionMode,
    rates: &ServiceRates,
    delays: &DelayBudget,
    rho_grid: &[f64],
    cfg: &McConfig,
) -> Result<Vec<EstimateWithCi>> {
    mode.validate()?;
    cfg.validate()?;
    check_grid(rho_grid)?;
    let beta = mode.beta();
    let (warm, n) = (cfg.warmup_tasks(), cfg.measured_tasks());
    let fap = Mg1Fap::new(rates.lambda_fap, rates.mu_dd, rates.mu_cp)?;
    let (lambda_ue, lambda_fn) = match cfg.coupling_mode {
        CouplingMode::WeightedSum => (rates.lambda_ue, rates.lambda_fn),
        CouplingMode::RoutingMixture => ((1.0 - beta) * rates.lambda_ue, beta * rates.lambda_fn),
    };
    let seed = cfg.seed;
    let queue = |label: u64, lambda: f64, mu: f64, used: bool| -> Result<Vec<f64>> {
        if !used {
            return Ok(Vec::new());
        }
        simulate_sojourns_mm1(lambda, mu, warm, n, &mut stream(seed, label, 0))
    };
    let ((ue, fn_), fap_sojourns) = rayon::join(
        || {
            rayon::join(
                || queue(STREAM_UE, lambda_ue, rates.mu_uc, beta < 1.0),
                || queue(STREAM_FN, lambda_fn, rates.mu_nc, beta > 0.0),
            )
        },
        || simulate_sojourns_mg1(&fap, warm, n, &mut stream(seed, STREAM_FAP, 0)),
    );
    let (ue, fn_, fap_sojourns) = (ue?, fn_?, fap_sojourns?);

    let totals: Vec<f64> = match cfg.coupling_mode {
        CouplingMode::WeightedSum => (0..n)
            .map(|k| {
                let dc = match mode {
                    CompressionMode::Local => ue[k],
                    CompressionMode::Edge => fn_[k],
                    CompressionMode::Hybrid(0.0) => ue[k],
                    CompressionMode::Hybrid(1.0) => fn_[k],
                    CompressionMode::Hybrid(b) => b * fn_[k] + (1.0 - b) * ue[k],
                };
                delays.floor() + dc + fap_sojourns[k]
            })
            .collect(),
        CouplingMode::RoutingMixture => {
            let mut routes = stream(seed, STREAM_ROUTE, 0);
            (0..n)
                .map(|k| {
                    let to_fn = if beta == 0.0 {
                        false
                    } else if beta == 1.0 {
                        true
                    } else {
                        routes.random::<f64>() < beta
                    };
                    let (up, dc) = if to_fn {
                        (delays.uplink_edge, fn_[k])
                    } else {
                        (delays.uplink_local, ue[k])
                    };
                    up + delays.backhaul + dc + fap_sojourns[k]
                })
                .collect()
        }
    };
    Ok(batch_estimates(&totals, rho_grid, cfg.batches))
}

/// Fraction of `totals` at or below each grid value, with the 99% half-width
/// taken as the larger of the batch-means and Wilson half-widths. Batch means
/// account for the serial correlation of successive sojourn times.
fn batch_estimates(totals: &[f64], grid: &[f64], batches: usize) -> Vec<EstimateWithCi> {
    let n = totals.len();
    let per_batch: Vec<(usize, Vec<usize>)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut chunk = totals[b * n / batches..(b + 1) * n / batches].to_vec();
            chunk.sort_unstable_by(f64::total_cmp);
            let counts = grid.iter().map(|&x| chunk.partition_point(|&t| t <= x)).collect();
            (chunk.len(), counts)
        })
        .collect();
    let t = t99(batches - 1);
    (0..grid.len())
        .map(|i| {
            let hits: usize = per_batch.iter().map(|(_, c)| c[i]).sum();
            let p = hits as f64 / n as f64;
            let props: Vec<f64> = per_batch.iter().map(|(m, c)| c[i] as f64 / *m as f64).collect();
            let mean = props.iter().sum::<f64>() / batches as f64;
            let var = props.iter().map(|q| (q - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
            let bm = t * (var / batches as f64).sqrt();
            EstimateWithCi {
                point: p,
                half_width_99: bm.max(wilson_half_width(p, n)),
                n_effective: n,
            }
        })
        .collect()
}

/// Product of two independent estimates; the half-width follows the delta
/// method.
pub fn product_estimate(a: &EstimateWithCi, b: &EstimateWithCi) -> EstimateWithCi {
    EstimateWithCi {
        point: a.point * b.point,
        half_width_99: (b.point * a.half_width_99).hypot(a.point * b.half_width_99),
        n_effective: a.n_effective.min(b.n_effective),
    }
}

/// SDCP estimates over end-to-end latency targets `rho_grid` (s). The
/// deterministic delays use the analytic ergodic uplink rate.
#[allow(clippy::too_many_arguments)]
pub fn mc_sdcp(
    mode: CompressionMode,
    network: &NetworkParams,
    task: &TaskProfile,
    hw: &HardwareProfile,
    tau: SirThreshold,
    options: &AnalysisOptions,
    rho_grid: &[f64],
    cfg: &McConfig,
) -> Result<Vec<EstimateWithCi>> {
    task.validate()?;
    hw.validate()?;
    let rate = ergodic_uplink_rate(network, options.rate_formula, &options.quadrature)?;
    let rates = derive_service_rates(task, hw, options.cycle_convention);
    let delays = DelayBudget::new(mode, task, hw, rate, options.uplink_numerator);
    let stp = mc_stp(network, tau, cfg)?;
    let steps = mc_step(mode, &rates, &delays, rho_grid, cfg)?;
    Ok(steps.iter().map(|s| product_estimate(&stp, s)).collect())
}
