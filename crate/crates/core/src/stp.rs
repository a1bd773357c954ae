//! Successful transmission probability `P(SIR > tau)` of the tagged uplink,
//! exact (four nested integrals) and approximate (interferers placed at
//! their fog nodes), plus the average ergodic rate that converts packet
//! sizes into uplink delays.

use std::cell::Cell;
use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::NetworkParams;
use crate::numerics::{gamma_fn, gen_exp_integral, integrate_1d, QuadratureSpec};

/// Below this power-control factor the approximate STP has not been
/// cross-checked against simulation.
pub const VALIDATED_MIN_POWER_CONTROL: f64 = 0.05;

/// Linear SIR threshold.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct SirThreshold(f64);

impl SirThreshold {
    pub fn linear(tau: f64) -> Result<Self> {
        if !(tau > 0.0) || tau.is_nan() {
            return domain(format!("SIR threshold must be positive (got {tau})"));
        }
        Ok(Self(tau))
    }

    pub fn from_db(db: f64) -> Result<Self> {
        Self::linear(10f64.powf(db / 10.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn db(self) -> f64 {
        10.0 * self.0.log10()
    }
}

/// First error raised inside a nested integrand; the integrand itself must
/// return a plain `f64`.
#[derive(Default)]
struct ErrorSlot(Cell<Option<Error>>);

impl ErrorSlot {
    fn unwrap_or_record(&self, r: Result<f64>) -> f64 {
        match r {
            Ok(v) => v,
            Err(e) => {
                let prev = self.0.take();
                self.0.set(prev.or(Some(e)));
                0.0
            }
        }
    }

    fn check<T>(&self, value: Result<T>) -> Result<T> {
        match self.0.take() {
            Some(e) => Err(e),
            None => value,
        }
    }
}

#[derive(Clone, Copy)]
struct KernelShape {
    half_alpha: f64,
    eps: f64,
    tau: f64,
}

impl KernelShape {
    fn new(tau: f64, params: &NetworkParams) -> Self {
        Self {
            half_alpha: 0.5 * params.pathloss_exponent,
            eps: params.power_control,
            tau,
        }
    }

    #[inline]
    fn pow_half_alpha(&self, x: f64) -> f64 {
        if self.half_alpha == 2.0 {
            x * x
        } else {
            x.powf(self.half_alpha)
        }
    }

    /// `1 - H` at normalised squared distances: `v = c|Y_0|^2`, `x = c|X_k|^2`.
    /// The integrand `tau q^(a/2) / (d^(a/2) + tau q^(a/2))` is the complement
    /// of the kernel's, so no cancellation occurs for distant interferers.
    fn outage(&self, v: f64, x: f64, spec: &QuadratureSpec) -> Result<f64> {
        let slot = ErrorSlot::default();
        let v_part = v.powf(1.0 - self.eps);
        let sqrt_x = x.sqrt();
        let over_u = |u: f64| {
            let tq = self.tau * self.pow_half_alpha(u.powf(self.eps) * v_part);
            let cross = 2.0 * sqrt_x * u.sqrt();
            let base = x + u;
            let over_y = |y: f64| {
                let d = (base - cross * y.cos()).max(0.0);
                let dp = self.pow_half_alpha(d);
                tq / (dp + tq)
            };
            slot.unwrap_or_record(integrate_1d(over_y, 0.0, PI, spec))
        };
        let total = if x > 0.0 && x < 1.0 {
            integrate_1d(over_u, 0.0, x, spec).and_then(|a| Ok(a + integrate_1d(over_u, x, 1.0, spec)?))
        } else {
            integrate_1d(over_u, 0.0, 1.0, spec)
        };
        slot.check(total).map(|t| t / PI)
    }

    /// `int_0^inf (1 - H(v, x)) dx` in normalised units, truncated where the
    /// integrand provably falls below 1e-12 and closed with its leading-order
    /// tail.
    fn outage_area(&self, v: f64, spec: &QuadratureSpec) -> Result<f64> {
        let slot = ErrorSlot::default();
        let strength = self.tau * self.pow_half_alpha(v.powf(1.0 - self.eps));
        // For x > 1: 1 - H <= strength / (sqrt(x) - 1)^alpha.
        let cutoff = (1.0 + (strength / 1e-12).powf(0.5 / self.half_alpha)).powi(2);
        let f = |x: f64| slot.unwrap_or_record(self.outage(v, x, spec));
        let mut total = 0.0;
        let mut lower = 0.0;
        for upper in [1.0, 4.0] {
            let upper = f64::min(upper, cutoff);
            if upper > lower {
                total += integrate_1d(f, lower, upper, spec)?;
                lower = upper;
            }
        }
        if cutoff > lower {
            let g = |s: f64| {
                let x = s.exp();
                f(x) * x
            };
            total += integrate_1d(g, lower.ln(), cutoff.ln(), spec)?;
        }
        let tail = strength / (1.0 + self.eps * self.half_alpha) * cutoff.powf(1.0 - self.half_alpha)
            / (self.half_alpha - 1.0);
        slot.check(Ok(total + tail))
    }
}

/// `H(v, x)` of the exact STP. `v` is the tagged distance normalised by the
/// cluster radius (`c |Y_0|^2`), `x` the raw squared distance (m^2) to the
/// interfering fog node.
pub fn h_kernel(v: f64, x: f64, tau: f64, params: &NetworkParams, spec: &QuadratureSpec) -> Result<f64> {
    params.validate()?;
    if !(v > 0.0 && v <= 1.0) {
        return domain(format!("h_kernel requires v in (0, 1] (got {v})"));
    }
    if !(x >= 0.0) {
        return domain(format!("h_kernel requires x >= 0 (got {x})"));
    }
    if !(tau >= 0.0) {
        return domain(format!("h_kernel requires tau >= 0 (got {tau})"));
    }
    if tau == 0.0 || x.is_infinite() {
        return Ok(1.0);
    }
    let shape = KernelShape::new(tau, params);
    Ok(1.0 - shape.outage(v, params.cluster_param() * x, spec)?)
}

/// Exact STP: `int_0^1 exp(-pi lambda_N int_0^inf (1 - H(v, x)) dx) dv`.
pub fn stp_exact(tau: SirThreshold, params: &NetworkParams, spec: &QuadratureSpec) -> Result<f64> {
    params.validate()?;
    spec.validate()?;
    let shape = KernelShape::new(tau.value(), params);
    let slot = ErrorSlot::default();
    // pi * lambda_N * dx = c * dx = d(cx), so the normalised area enters directly.
    let integrand = |v: f64| (-slot.unwrap_or_record(shape.outage_area(v, spec))).exp();
    let value = slot.check(integrate_1d(integrand, 0.0, 1.0, spec))?;
    Ok(value.clamp(0.0, 1.0))
}

/// `zeta = 2 pi^2 lambda_N tau^(2/alpha) / (c alpha (1 + eps) sin(2 pi / alpha))`.
///
/// With `c = pi lambda_N` the density cancels and the expression reduces to
/// `2 pi tau^(2/alpha) / (alpha (1 + eps) sin(2 pi / alpha))`, which is what
/// is evaluated. The `v^(1-eps)` factor stays in the outer integral.
pub fn zeta(tau: f64, params: &NetworkParams) -> Result<f64> {
    let alpha = params.pathloss_exponent;
    if !(alpha > 2.0) {
        return domain(format!("zeta requires alpha > 2 (got {alpha})"));
    }
    if !(tau >= 0.0) {
        return domain(format!("zeta requires tau >= 0 (got {tau})"));
    }
    let eps = params.power_control;
    Ok(2.0 * PI * tau.powf(2.0 / alpha) / (alpha * (1.0 + eps) * (2.0 * PI / alpha).sin()))
}

/// `int_0^1 exp(-zeta v^(1/a)) dv` with `a = 1/(1-eps)`, i.e.
/// `Gamma(a+1) zeta^(-a) P(a, zeta)`.
fn stretched_exp_mean(a: f64, z: f64) -> Result<f64> {
    if z == 0.0 {
        return Ok(1.0);
    }
    if z < 500.0 {
        // exp(-z) * sum_n z^n / ((a+1)(a+2)...(a+n)): positive terms only.
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut n = 0.0;
        loop {
            n += 1.0;
            term *= z / (a + n);
            sum += term;
            if term < 1e-17 * sum && n > z - a {
                break;
            }
        }
        Ok((-z).exp() * sum)
    } else {
        Ok(gamma_fn(a + 1.0)? * z.powf(-a) - a * gen_exp_integral(1.0 - a, z)?)
    }
}

/// Approximate STP (interfering users moved onto their fog nodes).
///
/// For `eps < 1` this is `zeta^(1/(eps-1)) Gamma(1 + 1/(1-eps)) -
/// E_{eps/(eps-1)}(zeta) / (1 - eps)`, the closed form of
/// `int_0^1 exp(-zeta v^(1-eps)) dv`; for `eps = 1` it is `exp(-zeta)`.
pub fn stp_approx(tau: SirThreshold, params: &NetworkParams) -> Result<f64> {
    params.validate()?;
    let z = zeta(tau.value(), params)?;
    let eps = params.power_control;
    let value = if eps == 1.0 {
        (-z).exp()
    } else {
        stretched_exp_mean(1.0 / (1.0 - eps), z)?
    };
    if !(-1e-9..=1.0 + 1e-9).contains(&value) {
        return Err(Error::NumericalInconsistency(format!(
            "approximate STP evaluated to {value} at tau={}, eps={eps}",
            tau.value()
        )));
    }
    Ok(value.clamp(0.0, 1.0))
}

/// The approximate-STP expression exactly as typeset,
/// `E_{eps/(eps-1)}(zeta) + zeta^(1/(eps-1)) Gamma(1 + 1/(1-eps))`.
/// Kept for comparison only: it is not a probability.
pub fn stp_approx_as_printed(tau: SirThreshold, params: &NetworkParams) -> Result<f64> {
    let z = zeta(tau.value(), params)?;
    let eps = params.power_control;
    if eps == 1.0 {
        return Ok((-z).exp());
    }
    Ok(gen_exp_integral(eps / (eps - 1.0), z)? + z.powf(1.0 / (eps - 1.0)) * gamma_fn(1.0 + 1.0 / (1.0 - eps))?)
}

/// Whether `stp_approx` at these parameters lies in the range that has been
/// checked against simulation.
pub fn stp_approx_validated(params: &NetworkParams) -> bool {
    params.power_control >= VALIDATED_MIN_POWER_CONTROL
}

/// How the uplink rate integral is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RateFormula {
    /// `B int_0^inf log2(1 + t) P(SIR > t) dt`.
    #[default]
    PaperAsWritten,
    /// `B E[log2(1 + SIR)] = B / ln 2 int_0^inf P(SIR > t) / (1 + t) dt`.
    StandardErgodic,
}

impl RateFormula {
    pub fn as_str(self) -> &'static str {
        match self {
            RateFormula::PaperAsWritten => "paper_as_written",
            RateFormula::StandardErgodic => "standard_ergodic",
        }
    }
}

/// Rate integral for an arbitrary SIR complementary CDF.
pub fn ergodic_rate_from_ccdf<F>(bandwidth: f64, ccdf: F, formula: RateFormula, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let slot = ErrorSlot::default();
    let value = match formula {
        RateFormula::PaperAsWritten => integrate_1d(
            |t| (1.0 + t).log2() * slot.unwrap_or_record(ccdf(t)),
            0.0,
            f64::INFINITY,
            spec,
        ),
        RateFormula::StandardErgodic => {
            integrate_1d(|t| slot.unwrap_or_record(ccdf(t)) / (1.0 + t), 0.0, f64::INFINITY, spec).map(|v| v / LN_2)
        }
    };
    slot.check(value).map(|v| bandwidth * v)
}

/// Average ergodic uplink rate (bit/s) built on the approximate STP.
pub fn ergodic_uplink_rate(params: &NetworkParams, formula: RateFormula, spec: &QuadratureSpec) -> Result<f64> {
    params.validate()?;
    let eps = params.power_control;
    // P(SIR > t) decays like t^(-2 / (alpha (1 - eps))); the printed integral
    // weights it by log2(1 + t) and diverges unless that exponent exceeds one.
    if formula == RateFormula::PaperAsWritten && eps < 1.0 && 2.0 / (params.pathloss_exponent * (1.0 - eps)) <= 1.0 {
        return Err(Error::NonConvergence {
            lower: 0.0,
            upper: f64::INFINITY,
            estimated_error: f64::INFINITY,
            subdivisions: 0,
        });
    }
    let ccdf = |t: f64| {
        if t == 0.0 {
            Ok(1.0)
        } else {
            stp_approx(SirThreshold(t), params)
        }
    };
    ergodic_rate_from_ccdf(params.bandwidth, ccdf, formula, spec)
}
