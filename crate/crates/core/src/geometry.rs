//! Spatial model: fog nodes on a Poisson point process, each with its users
//! scattered uniformly in a disk of radius `1/sqrt(c)` (a Matern cluster
//! process with `c = pi * lambda_N`).
//!
//! Samplers place the target fog node at the origin and materialise exactly
//! one interfering user per foreign fog node; the other members of each
//! cluster transmit on orthogonal resources and never interfere.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Radius of the default simulation window, in mean nearest-neighbour spacings.
pub const DEFAULT_WINDOW_SPACINGS: f64 = 20.0;
/// Smallest window accepted by [`sample_scene`], in the same units.
pub const MIN_WINDOW_SPACINGS: f64 = 10.0;

/// Radio and deployment parameters of the uplink.
///
/// The cluster parameter is always derived as `c = pi * fn_density`, so the
/// identity between the two holds by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    /// Fog-node density `lambda_N`, nodes per m^2.
    pub fn_density: f64,
    /// Pathloss exponent `alpha`.
    pub pathloss_exponent: f64,
    /// Fractional channel-inversion factor `epsilon`.
    pub power_control: f64,
    /// Maximum UE transmit power `p`, W. Cancels out of the SIR.
    pub max_tx_power: f64,
    /// Subchannel bandwidth `B`, Hz.
    pub bandwidth: f64,
    /// Fog access point density. Accepted for completeness; no formula uses it.
    pub fap_density: Option<f64>,
}

impl NetworkParams {
    pub fn new(
        fn_density: f64,
        pathloss_exponent: f64,
        power_control: f64,
        max_tx_power: f64,
        bandwidth: f64,
    ) -> Result<Self> {
        let params = Self {
            fn_density,
            pathloss_exponent,
            power_control,
            max_tx_power,
            bandwidth,
            fap_density: None,
        };
        params.validate()?;
        Ok(params)
    }

    /// Builds the parameters from the cluster parameter `c` (per m^2).
    pub fn from_cluster_param(
        cluster_param: f64,
        pathloss_exponent: f64,
        power_control: f64,
        max_tx_power: f64,
        bandwidth: f64,
    ) -> Result<Self> {
        Self::new(
            cluster_param / PI,
            pathloss_exponent,
            power_control,
            max_tx_power,
            bandwidth,
        )
    }

    /// Reference deployment: `c = 1e-4 m^-2`, `alpha = 4`, `epsilon = 0.8`,
    /// `B = 5 MHz`, `p = 0.2 W`.
    pub fn reference() -> Self {
        Self::from_cluster_param(1e-4, 4.0, 0.8, 0.2, 5e6).expect("reference parameters are valid")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fn_density > 0.0) || !self.fn_density.is_finite() {
            return domain(format!("fog-node density must be positive (got {})", self.fn_density));
        }
        if !(self.pathloss_exponent > 2.0) || !self.pathloss_exponent.is_finite() {
            return domain(format!(
                "pathloss exponent must exceed 2 (got {})",
                self.pathloss_exponent
            ));
        }
        if !(0.0..=1.0).contains(&self.power_control) {
            return domain(format!(
                "power-control factor must lie in [0, 1] (got {})",
                self.power_control
            ));
        }
        if !(self.max_tx_power > 0.0) || !self.max_tx_power.is_finite() {
            return domain(format!(
                "max transmit power must be positive (got {})",
                self.max_tx_power
            ));
        }
        if !(self.bandwidth > 0.0) || !self.bandwidth.is_finite() {
            return domain(format!("bandwidth must be positive (got {})", self.bandwidth));
        }
        if let Some(d) = self.fap_density {
            if !(d > 0.0) || !d.is_finite() {
                return domain(format!("fog access point density must be positive (got {d})"));
            }
        }
        Ok(())
    }

    /// `c = pi * lambda_N`.
    pub fn cluster_param(&self) -> f64 {
        PI * self.fn_density
    }

    /// Cluster radius `1/sqrt(c)`, m.
    pub fn cluster_radius(&self) -> f64 {
        1.0 / self.cluster_param().sqrt()
    }

    /// `1 / sqrt(pi * lambda_N)`, the spacing unit used to size windows.
    pub fn mean_spacing(&self) -> f64 {
        1.0 / (PI * self.fn_density).sqrt()
    }

    pub fn default_window_radius(&self) -> f64 {
        DEFAULT_WINDOW_SPACINGS * self.mean_spacing()
    }
}

/// Squared distances from the origin of the points of a homogeneous PPP
/// restricted to a disk.
pub fn sample_ppp<R: Rng + ?Sized>(density: f64, window_radius: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(density > 0.0) || !density.is_finite() {
        return domain(format!("PPP density must be positive (got {density})"));
    }
    if !(window_radius > 0.0) || !window_radius.is_finite() {
        return domain(format!("window radius must be positive (got {window_radius})"));
    }
    let r2 = window_radius * window_radius;
    let count = poisson_count(density * PI * r2, rng);
    Ok((0..count).map(|_| uniform_open(rng) * r2).collect())
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    let dist = Poisson::new(mean).expect("Poisson mean is positive and finite");
    dist.sample(rng) as usize
}

/// Uniform on `(0, 1]`, so squared distances are never exactly zero.
fn uniform_open<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// One foreign fog node and its single interfering user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interferer {
    /// `|X_k|^2`, m^2.
    pub fn_distance_sq: f64,
    /// `R_k^2`, squared distance from the interferer to its own fog node, m^2.
    pub own_fn_distance_sq: f64,
    /// Angle between the interferer's offset and the fog node's direction.
    pub angle: f64,
    /// Small-scale fade, unit-mean exponential.
    pub fade: f64,
}

impl Interferer {
    /// `|Y_k|^2 = |X_k|^2 + R_k^2 - 2 |X_k| R_k cos(angle)`.
    pub fn distance_sq(&self) -> f64 {
        let d = self.fn_distance_sq + self.own_fn_distance_sq
            - 2.0 * (self.fn_distance_sq * self.own_fn_distance_sq).sqrt() * self.angle.cos();
        d.max(f64::MIN_POSITIVE)
    }
}

/// The uplink seen by the target fog node at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceScene {
    /// `|Y_0|^2`, uniform on `(0, 1/c]`.
    pub tagged_distance_sq: f64,
    pub tagged_fade: f64,
    pub interferers: Vec<Interferer>,
}

impl InterferenceScene {
    /// Uplink SIR under fractional channel inversion.
    ///
    /// The transmit power `p` multiplies numerator and denominator alike and
    /// is left out, so the samples do not depend on it at all.
    pub fn sir(&self, params: &NetworkParams) -> f64 {
        let half_alpha = 0.5 * params.pathloss_exponent;
        let eps = params.power_control;
        let signal = self.tagged_fade * self.tagged_distance_sq.powf(-half_alpha * (1.0 - eps));
        let interference: f64 = self
            .interferers
            .iter()
            .map(|k| k.fade * k.own_fn_distance_sq.powf(half_alpha * eps) * k.distance_sq().powf(-half_alpha))
            .sum();
        if interference > 0.0 {
            signal / interference
        } else {
            f64::INFINITY
        }
    }
}

/// Samples one interference scene in a disk of radius `window_radius`.
pub fn sample_scene<R: Rng + ?Sized>(
    params: &NetworkParams,
    window_radius: f64,
    rng: &mut R,
) -> Result<InterferenceScene> {
    params.validate()?;
    let min_window = MIN_WINDOW_SPACINGS * params.mean_spacing();
    if !(window_radius >= min_window) {
        return domain(format!(
            "window radius {window_radius} m is below the minimum {min_window} m for density {}",
            params.fn_density
        ));
    }
    let cluster_r2 = 1.0 / params.cluster_param();
    let fns = sample_ppp(params.fn_density, window_radius, rng)?;
    let tagged_distance_sq = uniform_open(rng) * cluster_r2;
    let tagged_fade: f64 = rng.sample(Exp1);
    let interferers = fns
        .into_iter()
        .map(|fn_distance_sq| Interferer {
            fn_distance_sq,
            own_fn_distance_sq: uniform_open(rng) * cluster_r2,
            angle: rng.random::<f64>() * 2.0 * PI,
            fade: rng.sample(Exp1),
        })
        .collect();
    Ok(InterferenceScene {
        tagged_distance_sq,
        tagged_fade,
        interferers,
    })
}

/// Positions of a full Matern cluster process in a disk: each parent hosts
/// `users_per_node` offspring uniform in its cluster disk. Used to check the
/// marginal user density.
pub fn sample_cluster_users<R: Rng + ?Sized>(
    params: &NetworkParams,
    users_per_node: usize,
    window_radius: f64,
    rng: &mut R,
) -> Result<Vec<(f64, f64)>> {
    params.validate()?;
    let radius = params.cluster_radius();
    let parents = sample_ppp(params.fn_density, window_radius, rng)?;
    let mut users = Vec::with_capacity(parents.len() * users_per_node);
    for d2 in parents {
        let theta = rng.random::<f64>() * 2.0 * PI;
        let (px, py) = (d2.sqrt() * theta.cos(), d2.sqrt() * theta.sin());
        for _ in 0..users_per_node {
            let r = radius * uniform_open(rng).sqrt();
            let phi = rng.random::<f64>() * 2.0 * PI;
            users.push((px + r * phi.cos(), py + r * phi.sin()));
        }
    }
    Ok(users)
}
