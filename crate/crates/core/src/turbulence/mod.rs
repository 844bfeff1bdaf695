//! Refractive-index turbulence: spectrum, bulk parameters and frozen screens.
//!
//! The index fluctuations are Gaussian with spatial spectrum
//!
//! ```text
//! ψ(g) = 0.033 Cn² exp[-(g l0 / 2π)²] / (g² + L0⁻²)^(11/6)
//! ```
//!
//! (von Kármán). Dropping the `L0⁻²` term gives the Tatarskii form. Along a
//! straight ray the spectrum enters the beam spread only through
//! `T = 0.558 Cn² l0^(-1/3)`, which equals `(π²/3) ∫ g³ ψ(g) dg` for the
//! Tatarskii spectrum.

mod screen;

pub use screen::{
    read_dump, spectral_weights, synthesize_screen, write_dump, Kick, LowFrequency, PhaseScreen, PlacedScreen,
    ScreenParams, ScreenStack, ScreenSynthesizer, SubharmonicLevel, DUMP_MAGIC,
};

use serde::{Deserialize, Serialize};

use crate::constants::C;
use crate::error::{config, domain, Result};

/// Which spectral form to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumModel {
    #[default]
    VonKarman,
    Tatarskii,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurbulenceSpec {
    /// Index structure constant Cn², m^(-2/3).
    pub cn2: f64,
    /// Inner scale l0, m.
    pub inner_scale: f64,
    /// Outer scale L0, m. `f64::INFINITY` is allowed.
    pub outer_scale: f64,
    pub model: SpectrumModel,
}

impl TurbulenceSpec {
    pub fn new(cn2: f64, inner_scale: f64, outer_scale: f64, model: SpectrumModel) -> Result<Self> {
        let spec = Self { cn2, inner_scale, outer_scale, model };
        spec.validate()?;
        Ok(spec)
    }

    /// Tatarskii spectrum (no outer scale).
    pub fn tatarskii(cn2: f64, inner_scale: f64) -> Result<Self> {
        Self::new(cn2, inner_scale, f64::INFINITY, SpectrumModel::Tatarskii)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cn2 >= 0.0 && self.cn2.is_finite()) {
            return Err(config(format!("cn2 must be finite and >= 0, got {}", self.cn2)));
        }
        if !(self.inner_scale > 0.0 && self.inner_scale.is_finite()) {
            return Err(config(format!("inner scale must be > 0, got {}", self.inner_scale)));
        }
        if !(self.outer_scale > self.inner_scale) {
            return Err(config(format!(
                "outer scale ({}) must exceed inner scale ({})",
                self.outer_scale, self.inner_scale
            )));
        }
        Ok(())
    }

    /// `L0⁻²` as it enters the spectrum: zero for Tatarskii or infinite L0.
    pub fn outer_wavenumber_sq(&self) -> f64 {
        match self.model {
            SpectrumModel::Tatarskii => 0.0,
            SpectrumModel::VonKarman => self.outer_scale.powi(-2),
        }
    }

    /// Same turbulence, different strength.
    pub fn with_cn2(&self, cn2: f64) -> Self {
        Self { cn2, ..*self }
    }

    pub fn psi(&self, g: f64) -> Result<f64> {
        spectrum_psi(self, g)
    }

    /// Spectrum evaluated without domain checks; `g = 0` gives `+inf` for the
    /// power-law form.
    pub(crate) fn psi_unchecked(&self, g: f64) -> f64 {
        if self.cn2 == 0.0 {
            return 0.0;
        }
        let cutoff = g * self.inner_scale / std::f64::consts::TAU;
        0.033 * self.cn2 * (-cutoff * cutoff).exp() / (g * g + self.outer_wavenumber_sq()).powf(11.0 / 6.0)
    }
}

/// Spectral density ψ(g) of the index fluctuations, m³.
pub fn spectrum_psi(spec: &TurbulenceSpec, g: f64) -> Result<f64> {
    if !(g >= 0.0) {
        return Err(domain(format!("spatial frequency must be >= 0, got {g}")));
    }
    if g == 0.0 && spec.outer_wavenumber_sq() == 0.0 {
        return Err(domain("power-law spectrum is singular at g = 0"));
    }
    Ok(spec.psi_unchecked(g))
}

/// Turbulence parameter `T = 0.558 Cn² l0^(-1/3)`, 1/m.
pub fn turbulence_t(spec: &TurbulenceSpec) -> Result<f64> {
    if !(spec.inner_scale > 0.0) {
        return Err(domain(format!("inner scale must be > 0, got {}", spec.inner_scale)));
    }
    Ok(0.558 * spec.cn2 * spec.inner_scale.powf(-1.0 / 3.0))
}

/// Momentum diffusion coefficient `d_f = 3 c q0² T`, m⁻² s⁻¹.
///
/// With `⟨F(t1)F(t2)⟩ = 2 d_f δ(t1 - t2)` per axis and paraxial motion the
/// position variance grows as `(c/q0)² 2 d_f t³/3 = 2 (ct)³ T`, the turbulent
/// part of the mean beam radius.
pub fn force_diffusion_coefficient(t_param: f64, q0: f64) -> Result<f64> {
    if !(t_param >= 0.0) {
        return Err(domain(format!("T must be >= 0, got {t_param}")));
    }
    if !(q0 > 0.0) {
        return Err(domain(format!("q0 must be > 0, got {q0}")));
    }
    Ok(3.0 * C * q0 * q0 * t_param)
}
