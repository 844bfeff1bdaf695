//! Single-photon pulse source.
//!
//! The emitted mode is a Gaussian of aperture radius `r0` and pulse length
//! `rz`. Its phase-space density is not written out explicitly in the beam
//! law; it follows from requiring that ballistic flight reproduces both the
//! initial radius `R²(t0) = r0²/2` and the diffraction term of `R²(t)`:
//!
//! * position: Gaussian, per-axis variance `r0²/4`;
//! * momentum: Gaussian, per-axis variance `1/r0²`, plus a random tilt `a`
//!   with per-axis variance `2/λc²`.
//!
//! The total momentum variance is then `1/r0² + 2/λc² = 1/r1²`, and
//! `x(L) = x0 + q L/q0` has variance `r0²/4 + L²/(q0² r1²)`, which is half of
//! the diffraction-limited `R²`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::constants::{wavenumber, C};
use crate::error::{config, domain, Result};

/// Photon-number statistics per counting interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PhotonStatistics {
    /// Exactly `n` photons per interval (photon-number state).
    Fock { n: u64 },
    /// Poisson-distributed photon number with the given mean (attenuated laser).
    Poisson { mean: f64 },
}

impl PhotonStatistics {
    pub fn mean(&self) -> f64 {
        match *self {
            PhotonStatistics::Fock { n } => n as f64,
            PhotonStatistics::Poisson { mean } => mean,
        }
    }

    pub fn kind(&self) -> SourceKind {
        match self {
            PhotonStatistics::Fock { .. } => SourceKind::Fock,
            PhotonStatistics::Poisson { .. } => SourceKind::Poisson,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Fock,
    Poisson,
}

impl std::fmt::Display for SourceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SourceKind::Fock => "fock",
            SourceKind::Poisson => "poisson",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceConfig {
    /// Aperture radius r0, m.
    pub r0: f64,
    /// Pulse length rz, m.
    pub rz: f64,
    /// Pulse centre at emission, m.
    #[serde(default)]
    pub z0: f64,
    pub wavelength: f64,
    /// Transverse coherence length λc, m; `f64::INFINITY` for a coherent source.
    pub lambda_c: f64,
    pub photon_stat: PhotonStatistics,
    pub pulses_per_interval: u64,
    /// Counting interval T_p, s.
    pub t_p: f64,
}

impl SourceConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("r0", self.r0), ("rz", self.rz), ("wavelength", self.wavelength), ("t_p", self.t_p)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(config(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if !(self.lambda_c > 0.0) {
            return Err(config(format!("lambda_c must be > 0 or inf, got {}", self.lambda_c)));
        }
        if self.r0 < 10.0 * self.wavelength {
            return Err(config("paraxial model needs r0 >> wavelength (r0 >= 10 wavelengths)"));
        }
        if self.pulses_per_interval == 0 {
            return Err(config("pulses_per_interval must be >= 1"));
        }
        let separation = C * self.t_p / self.pulses_per_interval as f64;
        if self.rz * 10.0 > separation {
            return Err(config(format!("pulses overlap: rz = {} m vs pulse separation {separation:.3e} m", self.rz)));
        }
        if let PhotonStatistics::Poisson { mean } = self.photon_stat {
            if !(mean >= 0.0 && mean.is_finite()) {
                return Err(config("Poisson mean photon number must be >= 0"));
            }
        }
        Ok(())
    }

    pub fn q0(&self) -> f64 {
        wavenumber(self.wavelength)
    }

    pub fn omega0(&self) -> f64 {
        C * self.q0()
    }

    pub fn r1_sq(&self) -> f64 {
        self.r0 * self.r0 / (1.0 + 2.0 * self.r0 * self.r0 / (self.lambda_c * self.lambda_c))
    }

    /// Coherence length giving `(r1/r0)² = ratio`, for `ratio ∈ (0, 1]`.
    pub fn lambda_c_for_ratio(r0: f64, ratio: f64) -> Result<f64> {
        if !(ratio > 0.0 && ratio <= 1.0) {
            return Err(domain(format!("(r1/r0)² must lie in (0, 1], got {ratio}")));
        }
        if ratio == 1.0 {
            return Ok(f64::INFINITY);
        }
        Ok(r0 * (2.0 * ratio / (1.0 - ratio)).sqrt())
    }
}

/// Transverse phase-space coordinates of a photon plus its longitudinal
/// position and time.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhotonState {
    pub x: f64,
    pub y: f64,
    pub qx: f64,
    pub qy: f64,
    pub z: f64,
    pub t: f64,
}

impl PhotonState {
    pub fn r_perp_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    /// `|q⊥| < 0.1 q0`.
    pub fn is_paraxial(&self, q0: f64) -> bool {
        (self.qx * self.qx + self.qy * self.qy).sqrt() < 0.1 * q0
    }
}

/// Squared partial-coherence radius `r1² = r0² / (1 + 2 r0²/λc²)`.
pub fn reduced_radius_sq(r0: f64, lambda_c: f64) -> Result<f64> {
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(domain(format!("r0 must be > 0, got {r0}")));
    }
    if !(lambda_c > 0.0) {
        return Err(domain(format!("lambda_c must be > 0 or inf, got {lambda_c}")));
    }
    Ok(r0 * r0 / (1.0 + 2.0 * r0 * r0 / (lambda_c * lambda_c)))
}

/// Random transmitter tilt with `⟨a_x²⟩ = ⟨a_y²⟩ = 2/λc²`; zero for a
/// coherent source.
pub fn sample_tilt<R: Rng + ?Sized>(lambda_c: f64, rng: &mut R) -> [f64; 2] {
    if lambda_c.is_infinite() {
        return [0.0, 0.0];
    }
    let s = 2f64.sqrt() / lambda_c;
    let ax: f64 = rng.sample(StandardNormal);
    let ay: f64 = rng.sample(StandardNormal);
    [s * ax, s * ay]
}

/// Draws a photon at the aperture, tilted by `tilt`.
pub fn sample_initial_photon<R: Rng + ?Sized>(cfg: &SourceConfig, tilt: [f64; 2], rng: &mut R) -> PhotonState {
    let sx = 0.5 * cfg.r0;
    let sq = 1.0 / cfg.r0;
    let n: [f64; 4] = [
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    ];
    PhotonState { x: sx * n[0], y: sx * n[1], qx: sq * n[2] + tilt[0], qy: sq * n[3] + tilt[1], z: cfg.z0, t: 0.0 }
}

/// Normalized mode function Φ(r), m^(-3/2).
pub fn mode_amplitude(cfg: &SourceConfig, r: [f64; 3]) -> f64 {
    let rp2 = r[0] * r[0] + r[1] * r[1];
    let dz = r[2] - cfg.z0;
    (2.0 / PI).powf(0.75) / (cfg.r0 * cfg.r0 * cfg.rz).sqrt()
        * (-rp2 / (cfg.r0 * cfg.r0) - dz * dz / (cfg.rz * cfg.rz)).exp()
}

/// Photon number emitted in one counting interval.
pub fn sample_interval_photon_count<R: Rng + ?Sized>(stat: &PhotonStatistics, rng: &mut R) -> u64 {
    match *stat {
        PhotonStatistics::Fock { n } => n,
        PhotonStatistics::Poisson { mean } if mean <= 0.0 => 0,
        PhotonStatistics::Poisson { mean } => {
            let draw: f64 = Poisson::new(mean).expect("mean > 0").sample(rng);
            draw as u64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::stats::Moments;
    use proptest::prelude::*;
    use std::f64::consts::E;

    pub(crate) fn cfg(lambda_c: f64) -> SourceConfig {
        SourceConfig {
            r0: 0.01,
            rz: 0.3,
            z0: 0.0,
            wavelength: 0.8e-6,
            lambda_c,
            photon_stat: PhotonStatistics::Fock { n: 100 },
            pulses_per_interval: 100,
            t_p: 1e-2,
        }
    }

    #[test]
    fn reduced_radius_limits() {
        let r0 = 0.01;
        assert_eq!(reduced_radius_sq(r0, f64::INFINITY).unwrap(), r0 * r0);
        let half = reduced_radius_sq(r0, (2.0f64).sqrt() * r0).unwrap();
        assert!((half / (r0 * r0) - 0.5).abs() < 1e-15);
        let lc = 1e-5;
        assert!((reduced_radius_sq(r0, lc).unwrap() / (lc * lc / 2.0) - 1.0).abs() < 1e-5);
        assert!(reduced_radius_sq(0.0, 1.0).is_err());
        assert!(reduced_radius_sq(1.0, -1.0).is_err());
        let lc = SourceConfig::lambda_c_for_ratio(r0, 0.5).unwrap();
        assert!((reduced_radius_sq(r0, lc).unwrap() / (r0 * r0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn coherent_tilt_is_zero() {
        let mut rng = stream(1);
        for _ in 0..100 {
            assert_eq!(sample_tilt(f64::INFINITY, &mut rng), [0.0, 0.0]);
        }
    }

    #[test]
    fn tilt_variance_and_characteristic_function() {
        let lc = 0.02;
        let mut rng = stream(2);
        let mut var = Moments::default();
        let mut cf = Moments::default();
        for _ in 0..100_000 {
            let a = sample_tilt(lc, &mut rng);
            var.push(a[0] * a[0]);
            // ⟨exp(i a·r)⟩ at r = (λc, 0): imaginary part averages to zero.
            cf.push((a[0] * lc).cos());
        }
        assert!((var.mean() / (2.0 / (lc * lc)) - 1.0).abs() < 0.02, "{}", var.mean());
        assert!((cf.mean() / (-1.0f64).exp() - 1.0).abs() < 0.01, "{}", cf.mean());
    }

    #[test]
    fn initial_phase_space_moments() {
        for lc in [f64::INFINITY, 0.01 * 2f64.sqrt()] {
            let c = cfg(lc);
            let mut rng = stream(3);
            let mut tilt_rng = stream(4);
            let (mut xv, mut qv) = (Moments::default(), Moments::default());
            for _ in 0..100_000 {
                let tilt = sample_tilt(lc, &mut tilt_rng);
                let p = sample_initial_photon(&c, tilt, &mut rng);
                xv.push(p.x * p.x);
                qv.push(p.qx * p.qx);
                assert_eq!(p.z, c.z0);
                assert!(p.is_paraxial(c.q0()));
            }
            assert!((xv.mean() / (c.r0 * c.r0 / 4.0) - 1.0).abs() < 0.02);
            assert!((qv.mean() * c.r1_sq() - 1.0).abs() < 0.02, "{}", qv.mean() * c.r1_sq());
        }
    }

    #[test]
    fn mode_peak_and_profile() {
        let c = cfg(f64::INFINITY);
        let peak = mode_amplitude(&c, [0.0, 0.0, c.z0]);
        let expected = (2.0 / PI).powf(0.75) / (c.r0 * c.r0 * c.rz).sqrt();
        assert!((peak / expected - 1.0).abs() < 1e-15);
        let edge = mode_amplitude(&c, [c.r0, 0.0, c.z0]);
        assert!((edge / peak - 1.0 / E).abs() < 1e-15);
    }

    #[test]
    fn mode_is_normalized() {
        // |Φ|² factorizes; integrate each axis with the midpoint rule over ±8σ.
        let c = cfg(f64::INFINITY);
        let axis = |width: f64| {
            let n = 4000;
            let lim = 8.0 * width;
            let h = 2.0 * lim / n as f64;
            (0..n)
                .map(|k| {
                    let u = -lim + (k as f64 + 0.5) * h;
                    (-2.0 * u * u / (width * width)).exp() * h
                })
                .sum::<f64>()
        };
        let norm = (2.0 / PI).powf(1.5) / (c.r0 * c.r0 * c.rz);
        let total = norm * axis(c.r0) * axis(c.r0) * axis(c.rz);
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn interval_photon_counts() {
        let mut rng = stream(5);
        assert_eq!(sample_interval_photon_count(&PhotonStatistics::Fock { n: 100 }, &mut rng), 100);
        assert_eq!(sample_interval_photon_count(&PhotonStatistics::Poisson { mean: 0.0 }, &mut rng), 0);
        let m: Moments = (0..10_000)
            .map(|_| sample_interval_photon_count(&PhotonStatistics::Poisson { mean: 10.0 }, &mut rng) as f64)
            .collect();
        assert!((m.mean() / 10.0 - 1.0).abs() < 0.05);
        assert!((m.variance() / 10.0 - 1.0).abs() < 0.05);
    }

    #[test]
    fn config_validation() {
        assert!(cfg(f64::INFINITY).validate().is_ok());
        let mut c = cfg(f64::INFINITY);
        c.rz = 1e4;
        assert!(c.validate().is_err());
        let mut c = cfg(f64::INFINITY);
        c.r0 = 1e-6;
        assert!(c.validate().is_err());
        assert!(SourceConfig::lambda_c_for_ratio(0.01, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn r1_monotone_and_bounded(r0 in 1e-3f64..1.0, a in 1e-4f64..10.0, b in 1e-4f64..10.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let r_lo = reduced_radius_sq(r0, lo).unwrap();
            let r_hi = reduced_radius_sq(r0, hi).unwrap();
            prop_assert!(r_lo <= r_hi);
            prop_assert!(r_hi <= r0 * r0);
        }
    }
}
