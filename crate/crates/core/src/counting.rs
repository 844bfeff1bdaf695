//! Analytic photocount statistics.
//!
//! With `⟨n⟩ = αN` detected out of `N` emitted photons and `σ²` the
//! scintillation index, the normalized count variance splits into a quantum
//! term and a turbulence term:
//!
//! | source          | quantum term   | turbulence term |
//! |-----------------|----------------|-----------------|
//! | Fock, `N` fixed | `(1 - α)/⟨n⟩`  | `σ² (1 - 1/N)`  |
//! | Poisson `⟨N⟩`   | `1/⟨n⟩`        | `σ²`            |
//!
//! Both follow from `⟨n²⟩ = ⟨n⟩ + ⟨n(n-1)⟩` with `⟨n(n-1)⟩ = α² N(N-1)(1+σ²)`
//! (Fock) or `α² ⟨N⟩² (1+σ²)` (Poisson).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::error::{domain, Error, Result};
use crate::source::{PhotonStatistics, SourceKind};

/// Largest detector-to-beam area ratio accepted as a "small" detector.
pub const SMALL_DETECTOR_LIMIT: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionConfig {
    /// Quantum efficiency in `[0, 1]`.
    pub eta_q: f64,
    /// Collecting area, m².
    pub area: f64,
    /// Transverse detector position, m.
    #[serde(default)]
    pub center: [f64; 2],
}

impl DetectionConfig {
    pub fn on_axis(eta_q: f64, area: f64) -> Self {
        Self { eta_q, area, center: [0.0, 0.0] }
    }

    pub fn radius(&self) -> f64 {
        (self.area / PI).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eta_q) {
            return Err(Error::Config(format!("eta_q must lie in [0, 1], got {}", self.eta_q)));
        }
        if !(self.area > 0.0 && self.area.is_finite()) {
            return Err(Error::Config(format!("detector area must be > 0, got {}", self.area)));
        }
        Ok(())
    }

    /// Checks `area/(πR²) <= SMALL_DETECTOR_LIMIT`.
    pub fn check_small(&self, radius_sq: f64) -> Result<()> {
        let fill = self.area / (PI * radius_sq);
        if fill > SMALL_DETECTOR_LIMIT {
            return Err(Error::Validity(format!(
                "detector area is {fill:.3} of the beam area πR² (limit {SMALL_DETECTOR_LIMIT})"
            )));
        }
        Ok(())
    }
}

/// Detected fraction `α = η_q A_d exp(-r_d²/R²) / (πR²)` for a small detector.
///
/// Equivalently `α = η ħω0/(πR²)` with `η = η_q A_d / (ħω0)`.
pub fn alpha(det: &DetectionConfig, radius_sq: f64) -> Result<f64> {
    if !(radius_sq > 0.0) {
        return Err(domain(format!("R² must be > 0, got {radius_sq}")));
    }
    det.check_small(radius_sq)?;
    let offset = det.center[0] * det.center[0] + det.center[1] * det.center[1];
    Ok(det.eta_q * det.area / (PI * radius_sq) * (-offset / radius_sq).exp())
}

/// `⟨n⟩ = α N` (or `α ⟨N⟩`).
/// Counts per unit time-integrated intensity, `η = η_q A_d / (ħ ω0)`, in J⁻¹·m².
///
/// Multiplying the on-axis fluence `N ħω0 / (πR²)` by `η` gives `α N`.
pub fn photocount_conversion(det: &DetectionConfig, omega0: f64) -> Result<f64> {
    if !(omega0 > 0.0) {
        return Err(domain(format!("omega0 must be > 0, got {omega0}")));
    }
    Ok(det.eta_q * det.area / (HBAR * omega0))
}

pub fn mean_counts(alpha: f64, photons: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(domain(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    Ok(alpha * photons)
}

/// Normalized count variance and its two parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceTerms {
    /// Photon-discreteness (shot / sub-shot) term.
    pub shot: f64,
    /// Turbulence (scintillation) term.
    pub scint: f64,
}

impl VarianceTerms {
    pub fn total(&self) -> f64 {
        self.shot + self.scint
    }
}

/// `(1 - α)/(αN) + σ² (1 - 1/N)` for a photon-number (Fock) source.
pub fn normalized_variance_fock(alpha: f64, n: u64, sigma2: f64) -> Result<VarianceTerms> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if n == 0 {
        return Err(domain("N must be >= 1"));
    }
    if !(sigma2 >= 0.0) {
        return Err(domain(format!("sigma² must be >= 0, got {sigma2}")));
    }
    let n = n as f64;
    Ok(VarianceTerms { shot: (1.0 - alpha) / (alpha * n), scint: sigma2 * (1.0 - 1.0 / n) })
}

/// `1/⟨n⟩ + σ²` for a Poisson source.
pub fn normalized_variance_poisson(mean_n: f64, sigma2: f64) -> Result<VarianceTerms> {
    if !(mean_n > 0.0) {
        return Err(domain(format!("mean count must be > 0, got {mean_n}")));
    }
    if !(sigma2 >= 0.0) {
        return Err(domain(format!("sigma² must be >= 0, got {sigma2}")));
    }
    Ok(VarianceTerms { shot: 1.0 / mean_n, scint: sigma2 })
}

/// Second factorial moment `⟨n(n-1)⟩`.
pub fn second_factorial_moment(alpha: f64, source: &PhotonStatistics, sigma2: f64) -> f64 {
    match *source {
        PhotonStatistics::Fock { n } => {
            let n = n as f64;
            alpha * alpha * n * (n - 1.0).max(0.0) * (1.0 + sigma2)
        }
        PhotonStatistics::Poisson { mean } => alpha * alpha * mean * mean * (1.0 + sigma2),
    }
}

/// Count statistics, analytic or sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountStats {
    pub mean: f64,
    pub variance: f64,
    pub normalized_variance: f64,
    pub alpha: f64,
    pub shot_term: f64,
    pub scint_term: f64,
    pub source_kind: SourceKind,
}

impl CountStats {
    /// Closed-form statistics for detected fraction `alpha` and index `sigma2`.
    pub fn analytic(alpha: f64, source: &PhotonStatistics, sigma2: f64) -> Result<Self> {
        let mean = mean_counts(alpha, source.mean())?;
        let terms = match *source {
            PhotonStatistics::Fock { n } => normalized_variance_fock(alpha, n, sigma2)?,
            PhotonStatistics::Poisson { .. } => normalized_variance_poisson(mean, sigma2)?,
        };
        let nv = terms.total();
        Ok(Self {
            mean,
            variance: nv * mean * mean,
            normalized_variance: nv,
            alpha,
            shot_term: terms.shot,
            scint_term: terms.scint,
            source_kind: source.kind(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn conversion_turns_fluence_into_alpha_n() {
        let det = DetectionConfig::on_axis(0.5, PI * 0.05 * 0.05);
        let omega0 = crate::constants::C * crate::constants::wavenumber(0.8e-6);
        let (r2, n) = (0.163, 1e4);
        let fluence = n * HBAR * omega0 / (PI * r2);
        let counts = photocount_conversion(&det, omega0).unwrap() * fluence;
        assert!((counts / (alpha(&det, r2).unwrap() * n) - 1.0).abs() < 1e-12);
        assert!(photocount_conversion(&det, 0.0).is_err());
    }

    #[test]
    fn alpha_reference_values() {
        let area = PI * 0.05 * 0.05;
        assert_eq!(alpha(&DetectionConfig::on_axis(0.0, area), 0.163).unwrap(), 0.0);
        let a = alpha(&DetectionConfig::on_axis(0.5, area), 0.163).unwrap();
        assert!((a / 7.67e-3 - 1.0).abs() < 1e-3, "{a}");
        let half = alpha(&DetectionConfig::on_axis(0.5, area), 0.326).unwrap();
        assert!((a / half - 2.0).abs() < 1e-14);
        assert!(matches!(alpha(&DetectionConfig::on_axis(0.5, area), 0.01), Err(Error::Validity(_))));
    }

    #[test]
    fn off_axis_detector_follows_gaussian_profile() {
        let det = DetectionConfig { eta_q: 1.0, area: 1e-4, center: [0.2, 0.0] };
        let on = alpha(&DetectionConfig::on_axis(1.0, 1e-4), 0.04).unwrap();
        assert!((alpha(&det, 0.04).unwrap() / on - (-1.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn mean_counts_examples() {
        assert_eq!(mean_counts(1.0, 7.0).unwrap(), 7.0);
        assert!((mean_counts(7.67e-3, 1e4).unwrap() - 76.7).abs() < 1e-9);
        assert_eq!(mean_counts(0.3, 0.0).unwrap(), 0.0);
        assert!(mean_counts(1.5, 1.0).is_err());
    }

    #[test]
    fn fock_examples() {
        assert_eq!(normalized_variance_fock(1.0, 50, 0.0).unwrap().total(), 0.0);
        let single = normalized_variance_fock(0.3, 1, 0.8).unwrap();
        assert_eq!(single.scint, 0.0);
        assert!((single.shot - 0.7 / 0.3).abs() < 1e-15);
        let t = normalized_variance_fock(0.1, 100, 0.5).unwrap();
        assert!((t.shot - 0.09).abs() < 1e-15);
        assert!((t.scint - 0.495).abs() < 1e-15);
        assert!((t.total() - 0.585).abs() < 1e-14);
        assert!(normalized_variance_fock(0.0, 10, 0.1).is_err());
    }

    #[test]
    fn poisson_examples() {
        assert!((normalized_variance_poisson(10.0, 0.0).unwrap().total() - 0.1).abs() < 1e-15);
        assert!((normalized_variance_poisson(10.0, 0.5).unwrap().total() - 0.6).abs() < 1e-15);
        assert!(normalized_variance_poisson(0.0, 0.5).is_err());
    }

    #[test]
    fn factorial_moment_examples() {
        assert_eq!(second_factorial_moment(0.4, &PhotonStatistics::Fock { n: 1 }, 0.7), 0.0);
        assert_eq!(second_factorial_moment(0.5, &PhotonStatistics::Fock { n: 2 }, 0.0), 0.5);
        let p = second_factorial_moment(0.1, &PhotonStatistics::Poisson { mean: 10.0 }, 0.3);
        assert!((p - 1.3).abs() < 1e-14);
    }

    #[test]
    fn small_alpha_shot_limit() {
        let n = 1_000_000;
        let a = 1e-4;
        let t = normalized_variance_fock(a, n, 0.0).unwrap();
        let mean = a * n as f64;
        assert!((t.shot * mean - 1.0).abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn decomposition_and_factorial_identity(
            a in 1e-4f64..1.0, n in 1u64..10_000, s2 in 0.0f64..3.0, poisson in any::<bool>(),
        ) {
            let source = if poisson {
                PhotonStatistics::Poisson { mean: n as f64 }
            } else {
                PhotonStatistics::Fock { n }
            };
            let stats = CountStats::analytic(a, &source, s2).unwrap();
            prop_assert!((stats.shot_term + stats.scint_term - stats.normalized_variance).abs()
                <= 1e-12 * stats.normalized_variance.max(1e-300));
            // ⟨n²⟩ - ⟨n⟩² = ⟨n⟩ + ⟨n(n-1)⟩ - ⟨n⟩²
            let m = stats.mean;
            let var = m + second_factorial_moment(a, &source, s2) - m * m;
            prop_assert!((var - stats.variance).abs() <= 1e-9 * (m * m).max(m));
        }

        #[test]
        fn poisson_exceeds_fock_by_closed_form(a in 1e-4f64..1.0, n in 1u64..10_000, s2 in 0.0f64..3.0) {
            let mean = a * n as f64;
            let fock = normalized_variance_fock(a, n, s2).unwrap().total();
            let poisson = normalized_variance_poisson(mean, s2).unwrap().total();
            let gap = a / mean + s2 / n as f64;
            prop_assert!(((poisson - fock) - gap).abs() <= 1e-12 * poisson);
            prop_assert!(poisson > fock);
        }

        #[test]
        fn monotone_in_sigma_and_alpha(a in 1e-3f64..0.99, n in 1u64..1000, s2 in 0.0f64..2.0) {
            let base = normalized_variance_fock(a, n, s2).unwrap();
            prop_assert!(normalized_variance_fock(a, n, s2 + 0.1).unwrap().total() >= base.total());
            prop_assert!(normalized_variance_fock(a + 0.01, n, s2).unwrap().shot < base.shot);
        }
    }
}
