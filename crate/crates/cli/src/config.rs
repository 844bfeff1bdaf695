//! The experiment file.
//!
//! ```toml
//! [turbulence]
//! cn2 = 1e-14
//! inner_scale = 0.005
//! model = "tatarskii"
//!
//! [source]
//! r0 = 0.01
//! rz = 0.3
//! wavelength = 0.8e-6
//! coherence_ratio = 1.0
//! photon_stat = "fock"
//! photons = 100
//! pulses_per_interval = 100
//! t_p = 1e-3
//!
//! [path]
//! length = 5000.0
//! force = "white_noise"
//!
//! [detector]
//! eta_q = 0.5
//! radius = 0.01
//!
//! [experiment]
//! seed = 1
//! realizations = 100
//! probes = 10000
//! ```
//!
//! All lengths are metres and times seconds. Unknown keys are errors.

use serde::{Deserialize, Serialize};

use photoscint::counting::{DetectionConfig, SMALL_DETECTOR_LIMIT};
use photoscint::montecarlo::{default_slab_count, ExperimentConfig, MediumConfig, TiltMode};
use photoscint::source::{PhotonStatistics, SourceConfig};
use photoscint::turbulence::{LowFrequency, SpectrumModel, TurbulenceSpec};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub turbulence: TurbulenceSection,
    pub source: SourceSection,
    pub path: PathSection,
    pub detector: DetectorSection,
    pub experiment: ExperimentSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TurbulenceSection {
    pub cn2: f64,
    pub inner_scale: f64,
    #[serde(default = "infinity")]
    pub outer_scale: f64,
    #[serde(default)]
    pub model: SpectrumModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhotonStatKind {
    Fock,
    Poisson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub r0: f64,
    pub rz: f64,
    #[serde(default)]
    pub z0: f64,
    pub wavelength: f64,
    /// Transverse coherence length; give this or `coherence_ratio`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_c: Option<f64>,
    /// `(r1/r0)²` in `(0, 1]`; give this or `lambda_c`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coherence_ratio: Option<f64>,
    pub photon_stat: PhotonStatKind,
    /// `N` for Fock, `⟨N⟩` for Poisson, per counting interval.
    pub photons: f64,
    pub pulses_per_interval: u64,
    pub t_p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForceKind {
    WhiteNoise,
    FrozenScreens,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LowFrequencyKind {
    #[default]
    Truncated,
    Compensated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSection {
    pub length: f64,
    /// Distances for `beam`; defaults to `[length]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<f64>>,
    pub force: ForceKind,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    /// Defaults to a quarter of the inner scale.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_spacing: Option<f64>,
    /// Defaults to slabs of thickness `max(L0, length/64)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slabs: Option<usize>,
    #[serde(default)]
    pub low_frequency: LowFrequencyKind,
    #[serde(default = "default_levels")]
    pub subharmonic_levels: u32,
    #[serde(default = "yes")]
    pub wrap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    pub eta_q: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area: Option<f64>,
    #[serde(default)]
    pub center: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default)]
    pub seed: u64,
    pub realizations: usize,
    #[serde(default = "default_probes")]
    pub probes: usize,
    #[serde(default)]
    pub tilt_mode: TiltMode,
    /// `scint` sweep; defaults to `[turbulence.cn2]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cn2_values: Option<Vec<f64>>,
    /// `scint` sweep over `(r1/r0)²`; defaults to the source's value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coherence_ratios: Option<Vec<f64>>,
    /// `count` draws probabilities from a Gamma ensemble with this mean
    /// instead of tracing photons.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic_alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic_sigma2: Option<f64>,
    /// Largest tolerated fraction of realizations with too few hits.
    #[serde(default = "default_degenerate_limit")]
    pub degenerate_limit: f64,
}

fn infinity() -> f64 {
    f64::INFINITY
}
fn default_steps() -> usize {
    100
}
fn default_grid_n() -> usize {
    256
}
fn default_levels() -> u32 {
    8
}
fn default_probes() -> usize {
    10_000
}
fn default_degenerate_limit() -> f64 {
    0.25
}
fn yes() -> bool {
    true
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Config = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(m) => bad(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.source.lambda_c.is_some() == self.source.coherence_ratio.is_some() {
            return Err(bad("source: give exactly one of lambda_c and coherence_ratio"));
        }
        if self.detector.radius.is_some() == self.detector.area.is_some() {
            return Err(bad("detector: give exactly one of radius and area"));
        }
        if !(self.experiment.degenerate_limit >= 0.0 && self.experiment.degenerate_limit <= 1.0) {
            return Err(bad("experiment.degenerate_limit must lie in [0, 1]"));
        }
        if let Some(d) = &self.path.distances {
            if d.is_empty() || d.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
                return Err(bad("path.distances must be a non-empty list of finite values >= 0"));
            }
        }
        for c in self.cn2_values() {
            self.turbulence(c)?;
        }
        for r in self.coherence_ratios()? {
            let cfg = self.experiment(self.turbulence.cn2, r)?;
            cfg.validate().map_err(|e| bad(e.to_string()))?;
        }
        self.check_small_detector()
    }

    pub fn cn2_values(&self) -> Vec<f64> {
        self.experiment.cn2_values.clone().unwrap_or_else(|| vec![self.turbulence.cn2])
    }

    pub fn coherence_ratios(&self) -> Result<Vec<f64>, CliError> {
        match &self.experiment.coherence_ratios {
            Some(r) if r.is_empty() => Err(bad("experiment.coherence_ratios is empty")),
            Some(r) => Ok(r.clone()),
            None => Ok(vec![self.source_ratio()?]),
        }
    }

    fn source_ratio(&self) -> Result<f64, CliError> {
        match (self.source.coherence_ratio, self.source.lambda_c) {
            (Some(r), _) => Ok(r),
            (None, Some(lc)) => {
                let r0 = self.source.r0;
                Ok(1.0 / (1.0 + 2.0 * r0 * r0 / (lc * lc)))
            }
            (None, None) => Err(bad("source: missing coherence")),
        }
    }

    pub fn distances(&self) -> Vec<f64> {
        self.path.distances.clone().unwrap_or_else(|| vec![self.path.length])
    }

    pub fn turbulence(&self, cn2: f64) -> Result<TurbulenceSpec, CliError> {
        let t = &self.turbulence;
        TurbulenceSpec::new(cn2, t.inner_scale, t.outer_scale, t.model).map_err(|e| bad(format!("turbulence: {e}")))
    }

    pub fn photon_statistics(&self) -> Result<PhotonStatistics, CliError> {
        let n = self.source.photons;
        match self.source.photon_stat {
            PhotonStatKind::Fock if n >= 1.0 && n.fract() == 0.0 => Ok(PhotonStatistics::Fock { n: n as u64 }),
            PhotonStatKind::Fock => Err(bad(format!("source.photons must be a positive integer for fock, got {n}"))),
            PhotonStatKind::Poisson if n > 0.0 && n.is_finite() => Ok(PhotonStatistics::Poisson { mean: n }),
            PhotonStatKind::Poisson => Err(bad(format!("source.photons must be > 0, got {n}"))),
        }
    }

    pub fn detector(&self) -> DetectionConfig {
        let d = &self.detector;
        let area = d.area.unwrap_or_else(|| std::f64::consts::PI * d.radius.unwrap_or(0.0).powi(2));
        DetectionConfig { eta_q: d.eta_q, area, center: d.center }
    }

    /// Library configuration for one `(cn2, (r1/r0)²)` grid point.
    pub fn experiment(&self, cn2: f64, coherence_ratio: f64) -> Result<ExperimentConfig, CliError> {
        let s = &self.source;
        let lambda_c = match (s.coherence_ratio, s.lambda_c, &self.experiment.coherence_ratios) {
            (None, Some(lc), None) => lc,
            _ => SourceConfig::lambda_c_for_ratio(s.r0, coherence_ratio).map_err(|e| bad(format!("source: {e}")))?,
        };
        let turbulence = self.turbulence(cn2)?;
        let p = &self.path;
        let medium = match p.force {
            ForceKind::WhiteNoise => MediumConfig::WhiteNoise { steps: p.steps },
            ForceKind::FrozenScreens => MediumConfig::FrozenScreens {
                grid_n: p.grid_n,
                grid_spacing: p.grid_spacing.unwrap_or(self.turbulence.inner_scale / 4.0),
                slabs: p.slabs.unwrap_or_else(|| default_slab_count(p.length, self.turbulence.outer_scale)),
                low_frequency: match p.low_frequency {
                    LowFrequencyKind::Truncated => LowFrequency::Truncated,
                    LowFrequencyKind::Compensated => LowFrequency::Compensated { levels: p.subharmonic_levels },
                },
            },
        };
        Ok(ExperimentConfig {
            turbulence,
            source: SourceConfig {
                r0: s.r0,
                rz: s.rz,
                z0: s.z0,
                wavelength: s.wavelength,
                lambda_c,
                photon_stat: self.photon_statistics()?,
                pulses_per_interval: s.pulses_per_interval,
                t_p: s.t_p,
            },
            detector: self.detector(),
            path_length: p.length,
            medium,
            realizations: self.experiment.realizations,
            probes_per_realization: self.experiment.probes,
            master_seed: self.experiment.seed,
            tilt_mode: self.experiment.tilt_mode,
            wrap: p.wrap,
        })
    }

    /// The detector must be small against the narrowest beam any command
    /// can produce at the farthest configured distance.
    fn check_small_detector(&self) -> Result<(), CliError> {
        let far = self.distances().into_iter().fold(self.path.length, f64::max);
        let cn2 = self.cn2_values().into_iter().fold(f64::INFINITY, f64::min);
        let ratio = self.coherence_ratios()?.into_iter().fold(0.0, f64::max);
        let cfg = self.experiment(cn2, ratio)?;
        let r2 = cfg.beam().radius_sq_at_distance(far);
        cfg.detector.check_small(r2).map_err(|_| {
            bad(format!(
                "detector: area {:.3e} m² is not small against the beam (πR² = {:.3e} m² at {far} m); need A/πR² <= {SMALL_DETECTOR_LIMIT}",
                cfg.detector.area,
                std::f64::consts::PI * r2
            ))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[turbulence]
cn2 = 1e-14
inner_scale = 0.004
model = "tatarskii"

[source]
r0 = 0.01
rz = 0.3
wavelength = 0.8e-6
coherence_ratio = 0.5
photon_stat = "poisson"
photons = 20.5
pulses_per_interval = 10
t_p = 1e-3

[path]
length = 1000.0
force = "frozen_screens"

[detector]
eta_q = 0.9
area = 1e-6

[experiment]
realizations = 4
"#;

    #[test]
    fn defaults_are_filled_in() {
        let cfg = Config::from_toml(BASE).unwrap();
        let exp = cfg.experiment(1e-14, 0.5).unwrap();
        let MediumConfig::FrozenScreens { grid_n, grid_spacing, slabs, low_frequency } = exp.medium else {
            panic!("expected screens");
        };
        assert_eq!(grid_n, 256);
        assert_eq!(grid_spacing, 0.001);
        assert_eq!(slabs, 64);
        assert_eq!(low_frequency, LowFrequency::Truncated);
        assert_eq!(exp.probes_per_realization, 10_000);
        assert_eq!(cfg.distances(), vec![1000.0]);
        assert_eq!(cfg.cn2_values(), vec![1e-14]);
        assert!((exp.source.r1_sq() / 1e-4 - 0.5).abs() < 1e-12);
        assert_eq!(exp.source.photon_stat, PhotonStatistics::Poisson { mean: 20.5 });
    }

    #[test]
    fn toml_round_trip() {
        let cfg = Config::from_toml(BASE).unwrap();
        assert_eq!(Config::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn lambda_c_is_used_directly() {
        let text = BASE.replace("coherence_ratio = 0.5", "lambda_c = 0.02");
        let cfg = Config::from_toml(&text).unwrap();
        let ratio = cfg.coherence_ratios().unwrap()[0];
        assert_eq!(cfg.experiment(1e-14, ratio).unwrap().source.lambda_c, 0.02);
        assert!((ratio - 1.0 / 1.5).abs() < 1e-12);
    }

    #[test]
    fn fock_needs_an_integer_photon_number() {
        let text = BASE.replace("\"poisson\"", "\"fock\"");
        assert!(matches!(Config::from_toml(&text), Err(CliError::Config(_))));
    }

    #[test]
    fn thin_slabs_are_rejected() {
        let text = BASE
            .replace("model = \"tatarskii\"", "model = \"von_karman\"\nouter_scale = 50.0")
            .replace("force = \"frozen_screens\"", "force = \"frozen_screens\"\nslabs = 40");
        assert!(Config::from_toml(&text).is_err());
        let ok = text.replace("slabs = 40", "slabs = 20");
        assert!(Config::from_toml(&ok).is_ok());
    }

    #[test]
    fn unknown_section_is_rejected() {
        let text = format!("{BASE}\n[extras]\nx = 1\n");
        assert!(matches!(Config::from_toml(&text), Err(CliError::Config(_))));
    }
}
