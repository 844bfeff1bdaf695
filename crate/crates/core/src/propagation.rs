//! Ray propagation and the analytic mean-intensity law.
//!
//! Rays move paraxially: transverse velocity `c q⊥/q0`, longitudinal
//! momentum pinned at `q0`. The turbulent force is either white noise
//! (reproduces the ensemble beam spread, carries no correlations between
//! photons) or a frozen stack of screens shared by every photon of a
//! realization.
//!
//! The ensemble mean intensity of a single-photon pulse is
//!
//! ```text
//! ⟨I⟩ = sqrt(2/π) c ħω0 / (π R² rz) · exp(-r⊥²/R² - 2 z_eff²/rz²)
//! R²  = (r0²/2) {1 + [2 c t / (q0 r0 r1)]² + 8 (c t)³ T / r0²}
//! ```

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::constants::{C, HBAR};
use crate::error::{domain, Result};
use crate::source::PhotonState;
use crate::turbulence::ScreenStack;

/// Random force acting on the rays.
#[derive(Debug, Clone, PartialEq)]
pub enum ForceModel {
    /// Independent Gaussian kicks, `⟨F(t1)F(t2)⟩ = 2 d_f δ(t1 - t2)` per axis.
    WhiteNoiseDiffusion {
        d_f: f64,
    },
    FrozenScreens(ScreenStack),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathConfig {
    /// Propagation distance, m.
    pub length: f64,
    /// Sub-steps for the white-noise integrator.
    pub steps: usize,
    pub force: ForceModel,
}

/// Squared mean beam radius after propagation time `t_z`, m².
pub fn beam_radius_squared(t_z: f64, r0: f64, r1: f64, q0: f64, t_param: f64) -> Result<f64> {
    if !(t_z >= 0.0) {
        return Err(domain(format!("propagation time must be >= 0, got {t_z}")));
    }
    let l = C * t_z;
    let diffraction = 2.0 * l / (q0 * r0 * r1);
    Ok(0.5 * r0 * r0 * (1.0 + diffraction * diffraction + 8.0 * l * l * l * t_param / (r0 * r0)))
}

/// Parameters of the analytic beam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamAnalytic {
    pub r0: f64,
    pub r1_sq: f64,
    pub q0: f64,
    pub t_param: f64,
    pub rz: f64,
    pub z0: f64,
}

/// The three additive contributions to `R²`, m².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusTerms {
    pub initial: f64,
    pub diffraction: f64,
    pub turbulence: f64,
}

impl RadiusTerms {
    pub fn total(&self) -> f64 {
        self.initial + self.diffraction + self.turbulence
    }
}

impl BeamAnalytic {
    pub fn terms_at_distance(&self, distance: f64) -> RadiusTerms {
        let half = 0.5 * self.r0 * self.r0;
        let d = 2.0 * distance / (self.q0 * self.r0 * self.r1_sq.sqrt());
        RadiusTerms { initial: half, diffraction: half * d * d, turbulence: 4.0 * distance.powi(3) * self.t_param }
    }

    /// `R²` after travelling `distance` metres.
    pub fn radius_sq_at_distance(&self, distance: f64) -> f64 {
        self.terms_at_distance(distance).total()
    }

    pub fn radius_sq(&self, t_z: f64) -> Result<f64> {
        beam_radius_squared(t_z, self.r0, self.r1_sq.sqrt(), self.q0, self.t_param)
    }

    /// Longitudinal offset from the pulse centre.
    pub fn z_eff(&self, z: f64, t_z: f64) -> f64 {
        z - self.z0 - C * t_z
    }

    /// Mean intensity of an `n_photons` pulse at `r` and time `t_z` after
    /// emission, W/m².
    pub fn mean_intensity(&self, r: [f64; 3], t_z: f64, n_photons: f64) -> Result<f64> {
        let r2 = self.radius_sq(t_z)?;
        let omega0 = C * self.q0;
        let z_eff = self.z_eff(r[2], t_z);
        let rp2 = r[0] * r[0] + r[1] * r[1];
        Ok(n_photons * (2.0 / std::f64::consts::PI).sqrt() * C * HBAR * omega0 / (std::f64::consts::PI * r2 * self.rz)
            * (-rp2 / r2 - 2.0 * z_eff * z_eff / (self.rz * self.rz)).exp())
    }
}

/// Free flight over `dz` metres.
pub fn propagate_ballistic(state: PhotonState, dz: f64, q0: f64) -> PhotonState {
    PhotonState {
        x: state.x + state.qx / q0 * dz,
        y: state.y + state.qy / q0 * dz,
        z: state.z + dz,
        t: state.t + dz / C,
        ..state
    }
}

/// White-noise propagation over `length` in `steps` sub-steps.
///
/// Each sub-step is half a free flight, a Gaussian kick of per-axis variance
/// `2 d_f Δt`, and the other half. Placing the kick mid-step makes the
/// discrete position variance `(n³/3 - n/12) Δ³` instead of `n³Δ³/3`, so the
/// `t³` law is met to `1/(4n²)`.
pub fn propagate_diffusive<R: Rng + ?Sized>(
    state: PhotonState,
    length: f64,
    steps: usize,
    d_f: f64,
    q0: f64,
    rng: &mut R,
) -> PhotonState {
    let steps = steps.max(1);
    let dz = length / steps as f64;
    let sigma = (2.0 * d_f * dz / C).sqrt();
    let mut s = state;
    for _ in 0..steps {
        s = propagate_ballistic(s, 0.5 * dz, q0);
        if sigma > 0.0 {
            let kx: f64 = rng.sample(StandardNormal);
            let ky: f64 = rng.sample(StandardNormal);
            s.qx += sigma * kx;
            s.qy += sigma * ky;
        }
        s = propagate_ballistic(s, 0.5 * dz, q0);
    }
    s
}

/// Result of tracing one ray through a screen stack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Traced {
    pub state: PhotonState,
    /// Screens at which the ray was outside the primary grid cell.
    pub wraps: u32,
}

/// Deterministic propagation through a frozen stack over `length` metres.
///
/// Screen positions are measured from the starting point; each screen with
/// `z <= length` is applied as a thin kick `q0 ∇S`.
pub fn propagate_screens(state: PhotonState, stack: &ScreenStack, length: f64, q0: f64, wrap: bool) -> Result<Traced> {
    let mut s = state;
    let mut travelled = 0.0;
    let mut wraps = 0;
    for placed in stack.screens.iter().take_while(|p| p.z <= length) {
        s = propagate_ballistic(s, placed.z - travelled, q0);
        travelled = placed.z;
        let kick = placed.screen.kick(s.x, s.y, q0, wrap)?;
        s.qx += kick.dq[0];
        s.qy += kick.dq[1];
        wraps += kick.wrapped as u32;
    }
    s = propagate_ballistic(s, length - travelled, q0);
    Ok(Traced { state: s, wraps })
}

/// Dispatches on the force model.
pub fn propagate<R: Rng + ?Sized>(
    state: PhotonState,
    path: &PathConfig,
    q0: f64,
    wrap: bool,
    rng: &mut R,
) -> Result<Traced> {
    match &path.force {
        ForceModel::WhiteNoiseDiffusion { d_f } => {
            Ok(Traced { state: propagate_diffusive(state, path.length, path.steps, *d_f, q0, rng), wraps: 0 })
        }
        ForceModel::FrozenScreens(stack) => propagate_screens(state, stack, path.length, q0, wrap),
    }
}
