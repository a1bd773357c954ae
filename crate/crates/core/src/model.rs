//! Task, hardware and compression-mode bookkeeping: service-rate derivation,
//! arrival aggregation, stability, and the deterministic delay components.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Per-UE task profile. Every UE is identical.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TaskProfile {
    /// Task size `kappa`, bits.
    pub packet_bits: f64,
    /// Compressed/uncompressed size ratio `gamma`, in (0, 1].
    pub compression_ratio: f64,
    /// Poisson task generation rate `psi`, tasks/s per UE.
    pub gen_rate: f64,
    /// CPU cycles for compression at the UE.
    pub cycles_compress_ue: f64,
    /// CPU cycles for compression at the fog node.
    pub cycles_compress_fn: f64,
    /// CPU cycles for decompression at the fog access point.
    pub cycles_decompress: f64,
    /// CPU cycles for computing the task at the fog access point.
    pub cycles_compute: f64,
    /// End-to-end latency target `varrho`, s.
    pub target_latency: f64,
}

impl TaskProfile {
    pub fn reference() -> Self {
        Self {
            packet_bits: 2048.0,
            compression_ratio: 0.6,
            gen_rate: 200.0,
            cycles_compress_ue: 1e5,
            cycles_compress_fn: 1e5,
            cycles_decompress: 1e5,
            cycles_compute: 1.5e5,
            target_latency: 4e-3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("packet_bits", self.packet_bits)?;
        if !(self.compression_ratio > 0.0 && self.compression_ratio <= 1.0) {
            return domain(format!(
                "compression_ratio must lie in (0, 1] (got {})",
                self.compression_ratio
            ));
        }
        positive("gen_rate", self.gen_rate)?;
        positive("cycles_compress_ue", self.cycles_compress_ue)?;
        positive("cycles_compress_fn", self.cycles_compress_fn)?;
        positive("cycles_decompress", self.cycles_decompress)?;
        positive("cycles_compute", self.cycles_compute)?;
        positive("target_latency", self.target_latency)
    }
}

impl Default for TaskProfile {
    fn default() -> Self {
        Self::reference()
    }
}

/// Processing speeds, backhaul capacity and population counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HardwareProfile {
    /// UE compression speed, cycles/s.
    pub ue_speed: f64,
    /// Fog-node compression speed, cycles/s.
    pub fn_speed: f64,
    /// Fog-access-point decompression speed, cycles/s.
    pub fap_dd_speed: f64,
    /// Fog-access-point compute speed, cycles/s.
    pub fap_cp_speed: f64,
    /// Fog node to access point backhaul capacity, bit/s.
    pub backhaul_capacity: f64,
    /// UEs per fog node, `M_U`.
    pub ues_per_fn: u32,
    /// Fog nodes per access point, `M_N`.
    pub fns_per_fap: u32,
    /// Number of access points, `M_A`.
    pub faps: u32,
}

impl HardwareProfile {
    /// 1 / 5 / 24 / 24 GHz, 10 Mbit/s backhaul, `M_U = 4`, `M_N = 2`, `M_A = 1`.
    pub fn reference() -> Self {
        Self {
            ue_speed: 1e9,
            fn_speed: 5e9,
            fap_dd_speed: 24e9,
            fap_cp_speed: 24e9,
            backhaul_capacity: 10e6,
            ues_per_fn: 4,
            fns_per_fap: 2,
            faps: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("ue_speed", self.ue_speed)?;
        positive("fn_speed", self.fn_speed)?;
        positive("fap_dd_speed", self.fap_dd_speed)?;
        positive("fap_cp_speed", self.fap_cp_speed)?;
        positive("backhaul_capacity", self.backhaul_capacity)?;
        for (name, n) in [
            ("ues_per_fn", self.ues_per_fn),
            ("fns_per_fap", self.fns_per_fap),
            ("faps", self.faps),
        ] {
            if n == 0 {
                return domain(format!("{name} must be at least 1"));
            }
        }
        Ok(())
    }
}

impl Default for HardwareProfile {
    fn default() -> Self {
        Self::reference()
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return domain(format!("{name} must be positive and finite (got {v})"));
    }
    Ok(())
}

/// Where tasks are compressed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CompressionMode {
    /// Every task is compressed at its UE.
    Local,
    /// Every task is uploaded uncompressed and compressed at the fog node.
    Edge,
    /// A fraction `beta` of tasks is compressed at the fog node.
    Hybrid(f64),
}

impl CompressionMode {
    pub fn hybrid(beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return domain(format!("compression offloading ratio must lie in [0, 1] (got {beta})"));
        }
        Ok(Self::Hybrid(beta))
    }

    /// Effective offloading ratio: 0 for local, 1 for edge.
    pub fn beta(self) -> f64 {
        match self {
            Self::Local => 0.0,
            Self::Edge => 1.0,
            Self::Hybrid(b) => b,
        }
    }

    pub fn validate(self) -> Result<()> {
        if let Self::Hybrid(b) = self {
            Self::hybrid(b)?;
        }
        Ok(())
    }
}

impl fmt::Display for CompressionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Local => f.write_str("local"),
            Self::Edge => f.write_str("edge"),
            Self::Hybrid(b) => write!(f, "hybrid({b})"),
        }
    }
}

/// How CPU-cycle counts scale with the task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CycleConvention {
    /// Cycle counts are per bit and multiply the (compressed) task size.
    PerBit,
    /// Cycle counts are per task.
    #[default]
    PerTask,
}

impl CycleConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::PerBit => "per_bit",
            Self::PerTask => "per_task",
        }
    }
}

/// Arrival rates seen by the two compression queues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ArrivalModel {
    /// UE queue sees `psi` and fog-node queue `M_U psi` regardless of `beta`.
    #[default]
    Full,
    /// UE queue sees `(1 - beta) psi`, fog-node queue `beta M_U psi`.
    Thinned,
}

/// Which uplink-delay numerator is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum UplinkNumerator {
    /// `beta kappa + (1 - beta) gamma kappa`: offloaded tasks travel uncompressed.
    #[default]
    PerMode,
    /// `beta gamma kappa + (1 - beta) kappa`, as typeset in the rate-based
    /// delay expression.
    Eq16,
}

impl UplinkNumerator {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::PerMode => "per_mode",
            Self::Eq16 => "eq16",
        }
    }
}

/// Service rates (tasks/s) and aggregated arrival rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ServiceRates {
    pub mu_uc: f64,
    pub mu_nc: f64,
    pub mu_dd: f64,
    pub mu_cp: f64,
    pub lambda_ue: f64,
    pub lambda_fn: f64,
    pub lambda_fap: f64,
}

/// Service rates are the reciprocals of the per-task processing times
/// `size * cycles / speed`.
pub fn derive_service_rates(task: &TaskProfile, hw: &HardwareProfile, convention: CycleConvention) -> ServiceRates {
    let (raw, compressed) = match convention {
        CycleConvention::PerBit => (task.packet_bits, task.compression_ratio * task.packet_bits),
        CycleConvention::PerTask => (1.0, 1.0),
    };
    let lambda_ue = task.gen_rate;
    let lambda_fn = f64::from(hw.ues_per_fn) * lambda_ue;
    ServiceRates {
        mu_uc: hw.ue_speed / (raw * task.cycles_compress_ue),
        mu_nc: hw.fn_speed / (raw * task.cycles_compress_fn),
        mu_dd: hw.fap_dd_speed / (compressed * task.cycles_decompress),
        mu_cp: hw.fap_cp_speed / (raw * task.cycles_compute),
        lambda_ue,
        lambda_fn,
        lambda_fap: f64::from(hw.fns_per_fap) * lambda_fn,
    }
}

impl ServiceRates {
    pub fn rho_fap(&self) -> f64 {
        self.lambda_fap * (1.0 / self.mu_dd + 1.0 / self.mu_cp)
    }

    /// Compression-queue arrival rates `(UE, fog node)` for a mode.
    pub fn compression_arrivals(&self, mode: CompressionMode, arrivals: ArrivalModel) -> (f64, f64) {
        match arrivals {
            ArrivalModel::Full => (self.lambda_ue, self.lambda_fn),
            ArrivalModel::Thinned => {
                let b = mode.beta();
                ((1.0 - b) * self.lambda_ue, b * self.lambda_fn)
            }
        }
    }
}

/// One violated stability inequality. `margin = service - load`, so
/// `margin <= 0` for every violation (for the FAP, `margin = 1 - rho`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityViolation {
    pub queue: &'static str,
    pub service: f64,
    pub load: f64,
    pub margin: f64,
}

impl fmt::Display for StabilityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} queue unstable: service {} vs load {} (margin {})",
            self.queue, self.service, self.load, self.margin
        )
    }
}

/// Checks `mu_uc > lambda_ue`, `mu_nc > lambda_fn` and `rho < 1` at the FAP.
pub fn validate_stability(rates: &ServiceRates) -> std::result::Result<(), Vec<StabilityViolation>> {
    let mut out = Vec::new();
    if !(rates.mu_uc > rates.lambda_ue) {
        out.push(StabilityViolation {
            queue: "ue_compression",
            service: rates.mu_uc,
            load: rates.lambda_ue,
            margin: rates.mu_uc - rates.lambda_ue,
        });
    }
    if !(rates.mu_nc > rates.lambda_fn) {
        out.push(StabilityViolation {
            queue: "fn_compression",
            service: rates.mu_nc,
            load: rates.lambda_fn,
            margin: rates.mu_nc - rates.lambda_fn,
        });
    }
    let rho = rates.rho_fap();
    if !(rho < 1.0) {
        out.push(StabilityViolation {
            queue: "fap",
            service: 1.0,
            load: rho,
            margin: 1.0 - rho,
        });
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// Backhaul delay `M_U gamma kappa / C_bh`; every mode ships compressed data.
pub fn backhaul_delay(task: &TaskProfile, hw: &HardwareProfile) -> f64 {
    f64::from(hw.ues_per_fn) * task.compression_ratio * task.packet_bits / hw.backhaul_capacity
}

/// Average uplink delay at `rate` bit/s.
pub fn uplink_delay(mode: CompressionMode, task: &TaskProfile, rate: f64, numerator: UplinkNumerator) -> f64 {
    let raw = task.packet_bits;
    let compressed = task.compression_ratio * task.packet_bits;
    match (mode, numerator) {
        (CompressionMode::Local, _) => compressed / rate,
        (CompressionMode::Edge, _) => raw / rate,
        (CompressionMode::Hybrid(b), UplinkNumerator::PerMode) => b * (raw / rate) + (1.0 - b) * (compressed / rate),
        (CompressionMode::Hybrid(b), UplinkNumerator::Eq16) => (b * compressed + (1.0 - b) * raw) / rate,
    }
}

/// Time left for compression, decompression and computing:
/// `varrho - uplink - backhaul`. May be negative.
pub fn residual_threshold(
    mode: CompressionMode,
    task: &TaskProfile,
    hw: &HardwareProfile,
    rate: f64,
    numerator: UplinkNumerator,
) -> f64 {
    task.target_latency - uplink_delay(mode, task, rate, numerator) - backhaul_delay(task, hw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn per_task_reference_rates() {
        let r = derive_service_rates(
            &TaskProfile::reference(),
            &HardwareProfile::reference(),
            CycleConvention::PerTask,
        );
        assert_eq!(r.mu_uc, 1e4);
        assert_eq!(r.mu_nc, 5e4);
        assert_eq!(r.mu_dd, 2.4e5);
        assert_relative_eq!(r.mu_cp, 1.6e5, max_relative = 1e-15);
        assert_eq!(r.lambda_fn, 800.0);
        assert_eq!(r.lambda_fap, 1600.0);
        assert!(validate_stability(&r).is_ok());
    }

    #[test]
    fn per_bit_reference_rates_are_unstable() {
        let r = derive_service_rates(
            &TaskProfile::reference(),
            &HardwareProfile::reference(),
            CycleConvention::PerBit,
        );
        assert_relative_eq!(r.mu_uc, 1e9 / (2048.0 * 1e5), max_relative = 1e-15);
        assert!((r.mu_uc - 4.883).abs() < 1e-3);
        let v = validate_stability(&r).unwrap_err();
        assert!(v.iter().any(|x| x.queue == "ue_compression" && x.margin < 0.0));
    }

    #[test]
    fn gamma_identity_for_decompression() {
        let task = TaskProfile {
            compression_ratio: 1.0,
            ..TaskProfile::reference()
        };
        let hw = HardwareProfile::reference();
        let r = derive_service_rates(&task, &hw, CycleConvention::PerBit);
        assert_eq!(r.mu_dd, hw.fap_dd_speed / (task.packet_bits * task.cycles_decompress));
    }

    #[test]
    fn conventions_agree_for_unit_tasks() {
        let task = TaskProfile {
            packet_bits: 1.0,
            compression_ratio: 1.0,
            ..TaskProfile::reference()
        };
        let hw = HardwareProfile::reference();
        assert_eq!(
            derive_service_rates(&task, &hw, CycleConvention::PerBit),
            derive_service_rates(&task, &hw, CycleConvention::PerTask)
        );
    }

    #[test]
    fn stability_boundary_is_strict() {
        let mut r = derive_service_rates(
            &TaskProfile::reference(),
            &HardwareProfile::reference(),
            CycleConvention::PerTask,
        );
        r.mu_uc = r.lambda_ue;
        let v = validate_stability(&r).unwrap_err();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].margin, 0.0);
    }

    #[test]
    fn backhaul_reference() {
        let task = TaskProfile::reference();
        let hw = HardwareProfile::reference();
        assert_eq!(backhaul_delay(&task, &hw), 0.49152e-3);
        let single = HardwareProfile { ues_per_fn: 1, ..hw };
        let raw = TaskProfile {
            compression_ratio: 1.0,
            ..task
        };
        assert_eq!(backhaul_delay(&raw, &single), raw.packet_bits / hw.backhaul_capacity);
        let fast = HardwareProfile {
            backhaul_capacity: 2.0 * hw.backhaul_capacity,
            ..hw
        };
        assert_eq!(backhaul_delay(&task, &fast), 0.5 * backhaul_delay(&task, &hw));
    }

    #[test]
    fn uplink_endpoints_and_midpoint() {
        let task = TaskProfile::reference();
        let rate = 7.5e6;
        let n = UplinkNumerator::PerMode;
        assert_eq!(
            uplink_delay(CompressionMode::Hybrid(0.0), &task, rate, n),
            uplink_delay(CompressionMode::Local, &task, rate, n)
        );
        assert_eq!(
            uplink_delay(CompressionMode::Hybrid(1.0), &task, rate, n),
            uplink_delay(CompressionMode::Edge, &task, rate, n)
        );
        let mid = uplink_delay(CompressionMode::Hybrid(0.5), &task, rate, n);
        assert_relative_eq!(mid, 0.5 * (2048.0 + 0.6 * 2048.0) / 7.5e6, max_relative = 1e-15);
        assert!((mid - 0.2185e-3).abs() < 1e-7);
    }

    #[test]
    fn uplink_is_affine_in_beta() {
        let task = TaskProfile::reference();
        let rate = 3.3e6;
        let lo = uplink_delay(CompressionMode::Local, &task, rate, UplinkNumerator::PerMode);
        let hi = uplink_delay(CompressionMode::Edge, &task, rate, UplinkNumerator::PerMode);
        for b in [0.1, 0.25, 0.5, 0.75, 0.9] {
            let v = uplink_delay(CompressionMode::Hybrid(b), &task, rate, UplinkNumerator::PerMode);
            assert_relative_eq!(v, lo + b * (hi - lo), max_relative = 1e-14);
        }
    }

    #[test]
    fn eq16_numerator_swaps_weights() {
        let task = TaskProfile::reference();
        let a = uplink_delay(CompressionMode::Hybrid(0.3), &task, 1e6, UplinkNumerator::Eq16);
        let b = uplink_delay(CompressionMode::Hybrid(0.7), &task, 1e6, UplinkNumerator::PerMode);
        assert_relative_eq!(a, b, max_relative = 1e-14);
    }

    #[test]
    fn residual_threshold_arithmetic() {
        let task = TaskProfile {
            target_latency: 4e-3,
            ..TaskProfile::reference()
        };
        let hw = HardwareProfile::reference();
        let mode = CompressionMode::Hybrid(0.5);
        let rate = 7.5e6;
        let up = 0.5 * (2048.0 + 0.6 * 2048.0) / 7.5e6;
        let bh = 4.0 * 0.6 * 2048.0 / 10e6;
        let got = residual_threshold(mode, &task, &hw, rate, UplinkNumerator::PerMode);
        assert!(((got - (4e-3 - up - bh)) / got).abs() <= 1e-15);
        // 3.28998 ms when the uplink delay is first rounded to 0.2185 ms.
        assert!((got - 3.28998e-3).abs() < 1e-7);

        let exact = TaskProfile {
            target_latency: uplink_delay(mode, &task, rate, UplinkNumerator::PerMode) + backhaul_delay(&task, &hw),
            ..task
        };
        assert!(residual_threshold(mode, &exact, &hw, rate, UplinkNumerator::PerMode).abs() < 1e-18);
        let ideal = HardwareProfile {
            backhaul_capacity: f64::INFINITY,
            ..hw
        };
        assert_eq!(
            residual_threshold(mode, &task, &ideal, f64::INFINITY, UplinkNumerator::PerMode),
            4e-3
        );
    }

    #[test]
    fn backhaul_is_mode_independent() {
        let task = TaskProfile::reference();
        let hw = HardwareProfile::reference();
        let rate = 5e6;
        let bh = backhaul_delay(&task, &hw);
        for mode in [
            CompressionMode::Local,
            CompressionMode::Edge,
            CompressionMode::Hybrid(0.4),
        ] {
            let lhs = residual_threshold(mode, &task, &hw, rate, UplinkNumerator::PerMode);
            let rhs = task.target_latency - uplink_delay(mode, &task, rate, UplinkNumerator::PerMode) - bh;
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn thinned_arrivals() {
        let r = derive_service_rates(
            &TaskProfile::reference(),
            &HardwareProfile::reference(),
            CycleConvention::PerTask,
        );
        assert_eq!(
            r.compression_arrivals(CompressionMode::Hybrid(0.25), ArrivalModel::Full),
            (200.0, 800.0)
        );
        assert_eq!(
            r.compression_arrivals(CompressionMode::Hybrid(0.25), ArrivalModel::Thinned),
            (150.0, 200.0)
        );
    }
}
