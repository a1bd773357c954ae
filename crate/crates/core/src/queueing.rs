//! Sojourn-time distributions: M/M/1 for the compression stages and the
//! M/G/1 queue at the fog access point, whose service is decompression
//! followed by computing (a two-stage hypo-exponential).

use crate::error::{domain, Error, Result};

/// Relative gap between the two service rates below which the
/// hypo-exponential density switches to its Erlang-2 limit.
pub const ERLANG_SWITCH: f64 = 1e-9;

/// An M/M/1 compression stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mm1Stage {
    arrival_rate: f64,
    service_rate: f64,
}

impl Mm1Stage {
    /// A zero arrival rate is allowed and means the server is never shared.
    pub fn new(arrival_rate: f64, service_rate: f64) -> Result<Self> {
        if !(arrival_rate >= 0.0) || !arrival_rate.is_finite() {
            return domain(format!(
                "arrival rate must be finite and non-negative (got {arrival_rate})"
            ));
        }
        if !(service_rate > arrival_rate) || !service_rate.is_finite() {
            return Err(Error::Stability(format!(
                "M/M/1 stage needs service rate {service_rate} > arrival rate {arrival_rate}"
            )));
        }
        Ok(Self {
            arrival_rate,
            service_rate,
        })
    }

    pub fn arrival_rate(&self) -> f64 {
        self.arrival_rate
    }

    pub fn service_rate(&self) -> f64 {
        self.service_rate
    }

    /// `sigma = mu - Lambda`, the rate of the exponential sojourn time.
    pub fn sojourn_param(&self) -> f64 {
        self.service_rate - self.arrival_rate
    }
}

pub fn mm1_sojourn_cdf(stage: &Mm1Stage, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return domain(format!("sojourn time must be non-negative (got {t})"));
    }
    Ok(-(-stage.sojourn_param() * t).exp_m1())
}

/// Density of `Exp(mu_dd) + Exp(mu_cp)`.
pub fn hypoexp_pdf(mu_dd: f64, mu_cp: f64, x: f64) -> Result<f64> {
    if !(mu_dd > 0.0) || !(mu_cp > 0.0) {
        return domain(format!("service rates must be positive (got {mu_dd}, {mu_cp})"));
    }
    if !(x >= 0.0) {
        return domain(format!("service time must be non-negative (got {x})"));
    }
    let gap = mu_dd - mu_cp;
    if gap.abs() <= ERLANG_SWITCH * mu_dd.max(mu_cp) {
        let mu = 0.5 * (mu_dd + mu_cp);
        return Ok(mu * mu * x * (-mu * x).exp());
    }
    // mu_dd mu_cp / (mu_dd - mu_cp) * (e^{-mu_cp x} - e^{-mu_dd x}), written so
    // the difference of exponentials keeps full precision.
    let (slow, fast) = if mu_dd > mu_cp { (mu_cp, mu_dd) } else { (mu_dd, mu_cp) };
    let diff = (-slow * x).exp() * -(-(fast - slow) * x).exp_m1();
    Ok(mu_dd * mu_cp / gap.abs() * diff)
}

/// The M/G/1 queue at a fog access point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mg1Fap {
    arrival_rate: f64,
    mu_dd: f64,
    mu_cp: f64,
    mu_hat: f64,
    rho: f64,
    eta: f64,
}

impl Mg1Fap {
    pub fn new(arrival_rate: f64, mu_dd: f64, mu_cp: f64) -> Result<Self> {
        if !(mu_dd > 0.0) || !(mu_cp > 0.0) || !mu_dd.is_finite() || !mu_cp.is_finite() {
            return domain(format!("FAP service rates must be positive (got {mu_dd}, {mu_cp})"));
        }
        if !(arrival_rate > 0.0) || !arrival_rate.is_finite() {
            return Err(Error::Stability(format!(
                "FAP arrival rate must be positive (got {arrival_rate}); use hypoexp_pdf for an empty queue"
            )));
        }
        let rho = arrival_rate * (1.0 / mu_dd + 1.0 / mu_cp);
        if !(rho < 1.0) {
            return Err(Error::Stability(format!("FAP utilisation rho = {rho} >= 1")));
        }
        let mu_hat = mu_dd + mu_cp;
        let eta = ((arrival_rate + mu_hat).powi(2) - 4.0 * mu_dd * mu_cp).sqrt();
        Ok(Self {
            arrival_rate,
            mu_dd,
            mu_cp,
            mu_hat,
            rho,
            eta,
        })
    }

    pub fn arrival_rate(&self) -> f64 {
        self.arrival_rate
    }

    pub fn mu_dd(&self) -> f64 {
        self.mu_dd
    }

    pub fn mu_cp(&self) -> f64 {
        self.mu_cp
    }

    pub fn mu_hat(&self) -> f64 {
        self.mu_hat
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `varsigma = Lambda - mu_hat - eta` (the faster-decaying exponent, doubled).
    pub fn varsigma(&self) -> f64 {
        self.arrival_rate - self.mu_hat - self.eta
    }

    /// `varsigma' = Lambda - mu_hat + eta`.
    pub fn varsigma_prime(&self) -> f64 {
        self.arrival_rate - self.mu_hat + self.eta
    }

    /// `K = mu_dd mu_cp (1 - rho) / eta`, the prefactor of every sojourn formula.
    pub fn prefactor(&self) -> f64 {
        self.mu_dd * self.mu_cp * (1.0 - self.rho) / self.eta
    }

    /// Mean sojourn by the Pollaczek–Khinchin formula.
    pub fn mean_sojourn(&self) -> f64 {
        let es = 1.0 / self.mu_dd + 1.0 / self.mu_cp;
        let es2 =
            2.0 * (1.0 / (self.mu_dd * self.mu_dd) + 1.0 / (self.mu_dd * self.mu_cp) + 1.0 / (self.mu_cp * self.mu_cp));
        es + self.arrival_rate * es2 / (2.0 * (1.0 - self.rho))
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) {
        return domain(format!("sojourn time must be non-negative (got {t})"));
    }
    Ok(())
}

/// `K e^{(Lambda - mu_hat) t / 2} (e^{eta t / 2} - e^{-eta t / 2})`.
pub fn mg1_sojourn_pdf(fap: &Mg1Fap, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(fap.prefactor() * (0.5 * fap.varsigma_prime() * t).exp() * -(-fap.eta() * t).exp_m1())
}

/// `K [ (e^{s' t/2} - 1) 2/s' - (e^{s t/2} - 1) 2/s ]` with `s, s'` the two
/// exponents; both are negative under stability.
pub fn mg1_sojourn_cdf(fap: &Mg1Fap, t: f64) -> Result<f64> {
    check_time(t)?;
    if t.is_infinite() {
        return Ok(1.0);
    }
    let (s, sp) = (fap.varsigma(), fap.varsigma_prime());
    let value = fap.prefactor() * ((0.5 * sp * t).exp_m1() * 2.0 / sp - (0.5 * s * t).exp_m1() * 2.0 / s);
    Ok(value.clamp(0.0, 1.0))
}

/// Laplace transform of the sojourn density from the Pollaczek–Khinchin
/// transform with hypo-exponential service.
pub fn mg1_sojourn_laplace(fap: &Mg1Fap, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return domain(format!("Laplace argument must be non-negative (got {s})"));
    }
    let (lambda, md, mc) = (fap.arrival_rate(), fap.mu_dd(), fap.mu_cp());
    // The common factor s is divided out analytically; the constant term of
    // the denominator cancels against lambda md mc.
    let slack = md * mc - lambda * (md + mc);
    Ok(slack / (s * s + s * (md + mc - lambda) + slack))
}
