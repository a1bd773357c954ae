//! Successful task execution probability (STEP) in closed form for the three
//! compression modes, the successful data compression probability (SDCP)
//! built on it, and the search for the SDCP-maximising offloading ratio.
//!
//! The hybrid-mode compression delay is the weighted sum
//! `beta * T_fn + (1 - beta) * T_ue` of the two (independent, exponential)
//! M/M/1 sojourn times, so the STEP is the CDF at `varrho'` of
//! `Exp(sigma_N / beta) + Exp(sigma_U / (1 - beta)) + T_fap`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::NetworkParams;
use crate::model::{
    backhaul_delay, derive_service_rates, uplink_delay, validate_stability, ArrivalModel, CompressionMode,
    CycleConvention, HardwareProfile, ServiceRates, TaskProfile, UplinkNumerator,
};
use crate::numerics::QuadratureSpec;
use crate::queueing::Mg1Fap;
use crate::stp::{ergodic_uplink_rate, stp_approx, RateFormula, SirThreshold};

/// Relative distance to the resonance `(1-beta) sigma_N = beta sigma_U`
/// inside which the hybrid form is evaluated at `beta +- RESONANCE_STEP`.
pub const RESONANCE_BAND: f64 = 1e-9;
pub const RESONANCE_STEP: f64 = 1e-7;

/// Parameters of one STEP evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInputs {
    /// `mu_uc - lambda_ue`, 1/s.
    pub sigma_u: f64,
    /// `mu_nc - lambda_fn`, 1/s.
    pub sigma_n: f64,
    pub fap: Mg1Fap,
    pub beta: f64,
    /// Residual latency budget `varrho'`, s.
    pub rho_prime: f64,
}

impl StepInputs {
    pub fn new(sigma_u: f64, sigma_n: f64, fap: Mg1Fap, beta: f64, rho_prime: f64) -> Result<Self> {
        if !(sigma_u > 0.0) || !(sigma_n > 0.0) {
            return Err(Error::Stability(format!(
                "compression queues need positive sojourn rates (sigma_u={sigma_u}, sigma_n={sigma_n})"
            )));
        }
        if !(0.0..=1.0).contains(&beta) {
            return domain(format!("beta must lie in [0, 1] (got {beta})"));
        }
        if rho_prime.is_nan() {
            return domain("residual budget is NaN");
        }
        Ok(Self {
            sigma_u,
            sigma_n,
            fap,
            beta,
            rho_prime,
        })
    }

    /// Builds the inputs from service rates for a given mode.
    pub fn from_rates(
        rates: &ServiceRates,
        mode: CompressionMode,
        arrivals: ArrivalModel,
        rho_prime: f64,
    ) -> Result<Self> {
        mode.validate()?;
        let (lambda_ue, lambda_fn) = rates.compression_arrivals(mode, arrivals);
        let fap = Mg1Fap::new(rates.lambda_fap, rates.mu_dd, rates.mu_cp)?;
        Self::new(
            rates.mu_uc - lambda_ue,
            rates.mu_nc - lambda_fn,
            fap,
            mode.beta(),
            rho_prime,
        )
    }

    fn with_beta(self, beta: f64) -> Self {
        Self { beta, ..self }
    }
}

/// `A(a, b, c, x) = 2b / (2c + ba) * e^{-cx/b} (e^{(2c+ba) x / (2b)} - 1)`,
/// i.e. `int_0^x e^{(a/2) t} e^{-(c/b)(x - t)} dt`.
pub fn a_func(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    if !(b > 0.0) {
        return domain(format!("A(a, b, c, x) requires b > 0 (got {b})"));
    }
    if !(x >= 0.0) {
        return domain(format!("A(a, b, c, x) requires x >= 0 (got {x})"));
    }
    if !(c > 0.0) {
        return domain(format!("A(a, b, c, x) requires c > 0 (got {c})"));
    }
    let rate = c / b;
    let two_c = 2.0 * c;
    let ba = b * a;
    if (two_c + ba).abs() < 1e-9 * two_c.max(ba.abs()) {
        return Ok(x * (-rate * x).exp());
    }
    let d = rate + 0.5 * a;
    // Both branches equal (e^{ax/2} - e^{-cx/b}) / d without overflow.
    Ok(if d >= 0.0 {
        (0.5 * a * x).exp() * -(-d * x).exp_m1() / d
    } else {
        (-rate * x).exp() * (d * x).exp_m1() / d
    })
}

/// `P(T_fap <= x)` without clamping.
fn fap_cdf(fap: &Mg1Fap, x: f64) -> f64 {
    let (s, sp) = (fap.varsigma(), fap.varsigma_prime());
    fap.prefactor() * ((0.5 * sp * x).exp_m1() * 2.0 / sp - (0.5 * s * x).exp_m1() * 2.0 / s)
}

fn finish(value: f64) -> Result<f64> {
    if !(-1e-8..=1.0 + 1e-8).contains(&value) {
        return Err(Error::NumericalInconsistency(format!("STEP evaluated to {value}")));
    }
    Ok(value.clamp(0.0, 1.0))
}

/// `P(Exp(sigma) + T_fap < x)`.
fn single_stage(fap: &Mg1Fap, sigma: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let k = fap.prefactor();
    let conv = a_func(fap.varsigma(), 1.0, sigma, x)? - a_func(fap.varsigma_prime(), 1.0, sigma, x)?;
    finish(fap_cdf(fap, x) + k * conv)
}

/// STEP for local compression (`beta = 0`).
pub fn step_local(inp: &StepInputs) -> Result<f64> {
    single_stage(&inp.fap, inp.sigma_u, inp.rho_prime)
}

/// STEP for edge compression (`beta = 1`): the local form with `sigma_N`.
pub fn step_edge(inp: &StepInputs) -> Result<f64> {
    single_stage(&inp.fap, inp.sigma_n, inp.rho_prime)
}

fn hybrid_closed_form(inp: &StepInputs) -> Result<f64> {
    let x = inp.rho_prime;
    let beta = inp.beta;
    let beta_hat = 1.0 - beta;
    let (su, sn) = (inp.sigma_u, inp.sigma_n);
    let fap = &inp.fap;
    let (s, sp) = (fap.varsigma(), fap.varsigma_prime());
    let k = fap.prefactor();

    // The two mixing weights are r_n / (r_n - r_u) and r_u / (r_n - r_u).
    // Near resonance they grow large and must differ by exactly 1, so both
    // share one denominator.
    let (r_u, r_n) = (su / beta_hat, sn / beta);
    let ue_term = a_func(s, beta_hat, su, x)? - a_func(sp, beta_hat, su, x)?;
    let fn_term = a_func(sp, beta, sn, x)? - a_func(s, beta, sn, x)?;
    Ok(fap_cdf(fap, x) + k * (r_n * ue_term + r_u * fn_term) / (r_n - r_u))
}

/// STEP for hybrid compression with `0 < beta < 1`.
pub fn step_hybrid(inp: &StepInputs) -> Result<f64> {
    let beta = inp.beta;
    if !(beta > 0.0 && beta < 1.0) {
        return domain(format!("step_hybrid requires 0 < beta < 1 (got {beta})"));
    }
    if !(inp.rho_prime > 0.0) {
        return Ok(0.0);
    }
    if inp.rho_prime.is_infinite() {
        return Ok(1.0);
    }
    let (ue, fn_) = ((1.0 - beta) * inp.sigma_n, beta * inp.sigma_u);
    if (ue - fn_).abs() <= RESONANCE_BAND * ue.max(fn_) {
        let lo = (beta - RESONANCE_STEP).max(0.5 * beta);
        let hi = (beta + RESONANCE_STEP).min(0.5 * (1.0 + beta));
        let a = hybrid_closed_form(&inp.with_beta(lo))?;
        let b = hybrid_closed_form(&inp.with_beta(hi))?;
        return finish(0.5 * (a + b));
    }
    finish(hybrid_closed_form(inp)?)
}

/// Dispatches on the mode; hybrid with `beta` exactly 0 or 1 uses the
/// endpoint forms.
pub fn step_for_inputs(mode: CompressionMode, inp: &StepInputs) -> Result<f64> {
    match mode {
        CompressionMode::Local => step_local(inp),
        CompressionMode::Edge => step_edge(inp),
        CompressionMode::Hybrid(0.0) => step_local(inp),
        CompressionMode::Hybrid(1.0) => step_edge(inp),
        CompressionMode::Hybrid(b) => step_hybrid(&inp.with_beta(b)),
    }
}

/// STEP for a mode given service rates and the residual budget `rho_prime`.
pub fn step(mode: CompressionMode, rates: &ServiceRates, rho_prime: f64, arrivals: ArrivalModel) -> Result<f64> {
    let inp = StepInputs::from_rates(rates, mode, arrivals, rho_prime)?;
    step_for_inputs(mode, &inp)
}

/// Modelling switches shared by the analytic and simulated pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub cycle_convention: CycleConvention,
    pub rate_formula: RateFormula,
    pub uplink_numerator: UplinkNumerator,
    pub arrivals: ArrivalModel,
    pub quadrature: QuadratureSpec,
}

/// Every intermediate of one SDCP evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SdcpBreakdown {
    pub stp: f64,
    pub step: f64,
    pub sdcp: f64,
    pub uplink_rate: f64,
    pub uplink_delay: f64,
    pub backhaul_delay: f64,
    pub rho_prime: f64,
}

/// SDCP evaluator for one network and SIR threshold. The STP and uplink
/// rate depend on neither the task nor the mode and are computed once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdcpAnalysis {
    pub network: NetworkParams,
    pub tau: SirThreshold,
    pub options: AnalysisOptions,
    stp: f64,
    uplink_rate: f64,
}

impl SdcpAnalysis {
    pub fn new(network: NetworkParams, tau: SirThreshold, options: AnalysisOptions) -> Result<Self> {
        network.validate()?;
        options.quadrature.validate()?;
        let stp = stp_approx(tau, &network)?;
        let uplink_rate = ergodic_uplink_rate(&network, options.rate_formula, &options.quadrature)?;
        Ok(Self {
            network,
            tau,
            options,
            stp,
            uplink_rate,
        })
    }

    pub fn stp(&self) -> f64 {
        self.stp
    }

    pub fn uplink_rate(&self) -> f64 {
        self.uplink_rate
    }

    pub fn service_rates(&self, task: &TaskProfile, hw: &HardwareProfile) -> Result<ServiceRates> {
        task.validate()?;
        hw.validate()?;
        let rates = derive_service_rates(task, hw, self.options.cycle_convention);
        if let Err(violations) = validate_stability(&rates) {
            // Under thinned arrivals a compression queue that is never used
            // may be overloaded at the nominal rate; StepInputs re-checks.
            let fatal: Vec<String> = violations
                .iter()
                .filter(|v| self.options.arrivals == ArrivalModel::Full || v.queue == "fap")
                .map(ToString::to_string)
                .collect();
            if !fatal.is_empty() {
                return Err(Error::Stability(fatal.join("; ")));
            }
        }
        Ok(rates)
    }

    pub fn evaluate(&self, mode: CompressionMode, task: &TaskProfile, hw: &HardwareProfile) -> Result<SdcpBreakdown> {
        let rates = self.service_rates(task, hw)?;
        let up = uplink_delay(mode, task, self.uplink_rate, self.options.uplink_numerator);
        let bh = backhaul_delay(task, hw);
        let rho_prime = task.target_latency - up - bh;
        let step_value = step(mode, &rates, rho_prime, self.options.arrivals)?;
        Ok(SdcpBreakdown {
            stp: self.stp,
            step: step_value,
            sdcp: self.stp * step_value,
            uplink_rate: self.uplink_rate,
            uplink_delay: up,
            backhaul_delay: bh,
            rho_prime,
        })
    }

    pub fn sdcp(&self, mode: CompressionMode, task: &TaskProfile, hw: &HardwareProfile) -> Result<f64> {
        Ok(self.evaluate(mode, task, hw)?.sdcp)
    }

    /// Offloading ratio maximising the hybrid-mode SDCP.
    pub fn optimize_beta(&self, task: &TaskProfile, hw: &HardwareProfile, search: &BetaSearch) -> Result<BetaOptimum> {
        let (beta, _) = maximize_unit_interval(
            |b| Ok(self.evaluate(CompressionMode::Hybrid(b), task, hw)?.step),
            search,
        )?;
        let best = self.evaluate(CompressionMode::Hybrid(beta), task, hw)?;
        Ok(BetaOptimum {
            beta,
            sdcp: best.sdcp,
            step: best.step,
        })
    }
}

/// SDCP of one configuration: approximate STP times STEP.
pub fn sdcp(
    mode: CompressionMode,
    network: &NetworkParams,
    task: &TaskProfile,
    hw: &HardwareProfile,
    tau: SirThreshold,
    options: &AnalysisOptions,
) -> Result<f64> {
    SdcpAnalysis::new(*network, tau, *options)?.sdcp(mode, task, hw)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BetaSearch {
    pub grid_points: usize,
    pub refine_tol: f64,
    /// Objective values within this distance count as tied; ties go to the
    /// larger `beta`.
    pub tie_tol: f64,
}

impl Default for BetaSearch {
    fn default() -> Self {
        Self {
            grid_points: 41,
            refine_tol: 1e-4,
            tie_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaOptimum {
    pub beta: f64,
    pub sdcp: f64,
    pub step: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Coarse grid over `[0, 1]`, then golden-section refinement inside the
/// bracket around the best grid point. Returns `(argmax, max)`.
pub fn maximize_unit_interval<F>(f: F, search: &BetaSearch) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    if search.grid_points < 3 {
        return domain(format!("grid_points must be at least 3 (got {})", search.grid_points));
    }
    if !(search.refine_tol > 0.0) || !(search.tie_tol >= 0.0) {
        return domain("refine_tol must be positive and tie_tol non-negative");
    }
    let n = search.grid_points;
    let grid: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let values = grid.iter().map(|&b| f(b)).collect::<Result<Vec<_>>>()?;
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let best = values
        .iter()
        .rposition(|&v| v >= top - search.tie_tol)
        .expect("grid is non-empty");
    if best == 0 || best == n - 1 {
        return Ok((grid[best], values[best]));
    }

    let (mut lo, mut hi) = (grid[best - 1], grid[best + 1]);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > search.refine_tol {
        if f2 >= f1 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        }
    }
    let (x, fx) = if f2 >= f1 { (x2, f2) } else { (x1, f1) };
    let (gx, gf) = (grid[best], values[best]);
    if fx > gf + search.tie_tol || (fx >= gf - search.tie_tol && x > gx) {
        Ok((x, fx))
    } else {
        Ok((gx, gf))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate_1d;
    use crate::queueing::mg1_sojourn_pdf;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reference_inputs(beta: f64, rho_prime: f64) -> StepInputs {
        let fap = Mg1Fap::new(1600.0, 2.4e5, 1.6e5).unwrap();
        StepInputs::new(9800.0, 49_200.0, fap, beta, rho_prime).unwrap()
    }

    /// Random stable configuration with delays on the millisecond scale.
    fn random_inputs(rng: &mut ChaCha8Rng) -> StepInputs {
        let mu_dd = rng.random_range(2e3..2e4);
        let mu_cp = rng.random_range(2e3..2e4);
        let cap = 1.0 / (1.0 / mu_dd + 1.0 / mu_cp);
        let lambda = rng.random_range(0.05..0.9) * cap;
        let fap = Mg1Fap::new(lambda, mu_dd, mu_cp).unwrap();
        StepInputs::new(
            rng.random_range(200.0..3000.0),
            rng.random_range(200.0..3000.0),
            fap,
            0.5,
            rng.random_range(1e-3..6e-3),
        )
        .unwrap()
    }

    /// Direct two-dimensional quadrature of
    /// `P(beta Y + (1-beta) X + T < rho')` with `X ~ Exp(sigma_u)`,
    /// `Y ~ Exp(sigma_n)`, `T` the FAP sojourn.
    fn step_by_quadrature(inp: &StepInputs) -> f64 {
        let spec = QuadratureSpec::with_tolerances(1e-12, 1e-10);
        let (b, x0) = (inp.beta, inp.rho_prime);
        let outer = |t: f64| {
            let left = x0 - t;
            let inner = |x: f64| {
                let rest = left - (1.0 - b) * x;
                -(-inp.sigma_n * rest / b).exp_m1() * inp.sigma_u * (-inp.sigma_u * x).exp()
            };
            let upper = left / (1.0 - b);
            let v = if upper > 0.0 {
                integrate_1d(inner, 0.0, upper, &spec).unwrap()
            } else {
                0.0
            };
            v * mg1_sojourn_pdf(&inp.fap, t).unwrap()
        };
        integrate_1d(outer, 0.0, x0, &spec).unwrap()
    }

    #[test]
    fn a_func_zero_and_limit() {
        assert_eq!(a_func(-500.0, 0.6, 300.0, 0.0).unwrap(), 0.0);
        let (b, c, x): (f64, f64, f64) = (0.5, 200.0, 0.003);
        let a_res = -2.0 * c / b;
        let limit = x * (-c * x / b).exp();
        for delta in [1e-12, -1e-12] {
            let v = a_func(a_res + delta / b, b, c, x).unwrap();
            assert!((v / limit - 1.0).abs() < 1e-6);
        }
        // Just outside the switch band the general branch must agree too.
        let v = a_func(a_res * (1.0 + 1e-7), b, c, x).unwrap();
        assert!((v / limit - 1.0).abs() < 1e-6);
        assert!(a_func(1.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn a_func_matches_convolution_quadrature() {
        let (a, b, c, x) = (-500.0, 0.6, 300.0, 0.002);
        let spec = QuadratureSpec::with_tolerances(1e-15, 1e-13);
        let oracle = integrate_1d(|t: f64| (0.5 * a * t).exp() * (-(c / b) * (x - t)).exp(), 0.0, x, &spec).unwrap();
        assert!((a_func(a, b, c, x).unwrap() - oracle).abs() < 1e-9);
        let printed = 2.0 * b / (2.0 * c + b * a) * (-c * x / b).exp() * (((2.0 * c + b * a) / (2.0 * b)) * x).exp_m1();
        assert_relative_eq!(a_func(a, b, c, x).unwrap(), printed, max_relative = 1e-12);
    }

    #[test]
    fn zero_budget_gives_zero() {
        for beta in [0.0, 0.3, 1.0] {
            let inp = reference_inputs(beta, 0.0);
            assert_eq!(step_local(&inp).unwrap(), 0.0);
            assert_eq!(step_edge(&inp).unwrap(), 0.0);
            let neg = reference_inputs(beta, -1e-3);
            assert_eq!(step_local(&neg).unwrap(), 0.0);
        }
        assert_eq!(step_hybrid(&reference_inputs(0.3, -1.0)).unwrap(), 0.0);
    }

    #[test]
    fn large_budget_gives_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let mut inp = random_inputs(&mut rng);
            inp.rho_prime = 10.0;
            for beta in [0.2, 0.7] {
                inp.beta = beta;
                assert!((step_hybrid(&inp).unwrap() - 1.0).abs() < 1e-6);
            }
            assert!((step_local(&inp).unwrap() - 1.0).abs() < 1e-6);
            assert!((step_edge(&inp).unwrap() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn endpoint_forms_match_hybrid_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let inp = random_inputs(&mut rng);
            let local = step_local(&inp).unwrap();
            let edge = step_edge(&inp).unwrap();
            let near0 = step_hybrid(&inp.with_beta(1e-10)).unwrap();
            let near1 = step_hybrid(&inp.with_beta(1.0 - 1e-10)).unwrap();
            assert!((near0 - local).abs() < 1e-7, "{near0} vs {local}");
            assert!((near1 - edge).abs() < 1e-7, "{near1} vs {edge}");
        }
    }

    #[test]
    fn instant_compression_reduces_to_fap_cdf() {
        let mut inp = reference_inputs(0.0, 2e-5);
        inp.sigma_u = 1e12;
        let expected = crate::queueing::mg1_sojourn_cdf(&inp.fap, 2e-5).unwrap();
        assert!((step_local(&inp).unwrap() - expected).abs() < 1e-6);
    }

    #[test]
    fn hybrid_matches_double_integral() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..10 {
            let mut inp = random_inputs(&mut rng);
            inp.beta = rng.random_range(0.05..0.95);
            let closed = step_hybrid(&inp).unwrap();
            let oracle = step_by_quadrature(&inp);
            assert!(
                (closed - oracle).abs() < 1e-6,
                "beta={} closed {closed} oracle {oracle}",
                inp.beta
            );
        }
    }

    #[test]
    fn local_matches_single_integral() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let spec = QuadratureSpec::with_tolerances(1e-13, 1e-11);
        for _ in 0..10 {
            let inp = random_inputs(&mut rng);
            let x0 = inp.rho_prime;
            let oracle = integrate_1d(
                |t: f64| -(-inp.sigma_u * (x0 - t)).exp_m1() * mg1_sojourn_pdf(&inp.fap, t).unwrap(),
                0.0,
                x0,
                &spec,
            )
            .unwrap();
            assert!((step_local(&inp).unwrap() - oracle).abs() < 1e-9);
        }
    }

    #[test]
    fn resonance_is_continuous() {
        let fap = Mg1Fap::new(500.0, 5e3, 4e3).unwrap();
        // (1 - beta) sigma_n = beta sigma_u at beta = 0.4 with these rates.
        let inp = StepInputs::new(1500.0, 1000.0, fap, 0.4, 3e-3).unwrap();
        let at = step_hybrid(&inp).unwrap();
        let near = step_hybrid(&inp.with_beta(0.4 + 1e-5)).unwrap();
        assert!(at.is_finite());
        assert!((at - near).abs() < 1e-5, "{at} vs {near}");
        let oracle = step_by_quadrature(&inp);
        assert!((at - oracle).abs() < 1e-6, "{at} vs {oracle}");
    }

    #[test]
    fn dispatch_identities() {
        let inp = reference_inputs(0.0, 3e-4);
        let rates = ServiceRates {
            mu_uc: 1e4,
            mu_nc: 5e4,
            mu_dd: 2.4e5,
            mu_cp: 1.6e5,
            lambda_ue: 200.0,
            lambda_fn: 800.0,
            lambda_fap: 1600.0,
        };
        let full = ArrivalModel::Full;
        let h0 = step(CompressionMode::Hybrid(0.0), &rates, 3e-4, full).unwrap();
        let h1 = step(CompressionMode::Hybrid(1.0), &rates, 3e-4, full).unwrap();
        assert_eq!(h0, step(CompressionMode::Local, &rates, 3e-4, full).unwrap());
        assert_eq!(h1, step(CompressionMode::Edge, &rates, 3e-4, full).unwrap());
        assert_eq!(h0, step_local(&inp).unwrap());
    }

    #[test]
    fn monotone_in_budget() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let inp = random_inputs(&mut rng);
        for mode in [
            CompressionMode::Local,
            CompressionMode::Edge,
            CompressionMode::Hybrid(0.35),
        ] {
            let mut prev = 0.0;
            for i in 0..100 {
                let x = 1e-4 * i as f64;
                let v = step_for_inputs(mode, &StepInputs { rho_prime: x, ..inp }).unwrap();
                assert!(
                    v >= prev - 1e-12 && (0.0..=1.0).contains(&v),
                    "{mode} at {x}: {v} < {prev}"
                );
                prev = v;
            }
        }
    }

    #[test]
    fn golden_section_finds_interior_peak() {
        let (b, v) = maximize_unit_interval(|x| Ok(-(x - 0.3137f64).powi(2)), &BetaSearch::default()).unwrap();
        assert!((b - 0.3137).abs() < 1e-4);
        assert!(v <= 0.0);
    }

    #[test]
    fn flat_objective_prefers_larger_beta() {
        let (b, _) = maximize_unit_interval(|_| Ok(0.5), &BetaSearch::default()).unwrap();
        assert_eq!(b, 1.0);
        let plateau = |x: f64| Ok(if x <= 0.6 { 1.0 } else { 0.0 });
        let (b, v) = maximize_unit_interval(plateau, &BetaSearch::default()).unwrap();
        assert_eq!(v, 1.0);
        assert!((b - 0.6).abs() <= 1e-4 && b <= 0.6);
    }

    #[test]
    fn endpoint_maximum_returned() {
        let (b, _) = maximize_unit_interval(|x| Ok(-x), &BetaSearch::default()).unwrap();
        assert_eq!(b, 0.0);
    }
}
