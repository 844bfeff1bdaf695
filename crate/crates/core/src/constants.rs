//! Physical constants (SI).

/// Speed of light in vacuum, m/s.
pub const C: f64 = 299_792_458.0;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Vacuum wavenumber `2π/λ`, 1/m.
pub fn wavenumber(wavelength: f64) -> f64 {
    std::f64::consts::TAU / wavelength
}
