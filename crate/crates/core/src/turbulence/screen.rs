//! Spectral synthesis of frozen refractive-index screens.
//!
//! A slab of thickness `Δz` is collapsed onto a thin screen carrying the
//! integrated index fluctuation `S(x, y) = ∫ n dz` (metres). Its 2-D spectrum
//! is `Φ_S(g) = 2π Δz ψ(g)`. A ray crossing the screen picks up the transverse
//! momentum `Δq = q0 ∇S`.
//!
//! The periodic grid part is complex white noise shaped by `sqrt(Φ_S) Δg` and
//! inverse-transformed. With [`LowFrequency::Compensated`] the cells next to
//! the origin carry the slope-weighted cell integral of `Φ_S`, and the missing
//! central cell is filled by nested 3×3 subharmonic levels. Those are kept as
//! explicit plane waves and evaluated at the unwrapped ray position, so they
//! never wrap.

use std::f64::consts::TAU;
use std::io::{Read, Write};
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::TurbulenceSpec;
use crate::error::{config, Error, Result};
use crate::rng::{self, Domain};

/// File magic of the screen dump format.
pub const DUMP_MAGIC: &[u8; 4] = b"TPSC";

/// Cells with `max(|kx|, |ky|)` up to this index use cell integrals in
/// compensated mode.
const NEAR_ORIGIN_CELLS: i64 = 3;
/// Midpoint subdivisions per axis for cell integrals.
const CELL_QUADRATURE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum LowFrequency {
    /// Grid frequencies only; content below `2π/(n Δx)` is lost.
    #[default]
    Truncated,
    /// Cell-integrated weights near the origin plus `levels` subharmonic
    /// levels, each a factor of three finer in frequency.
    Compensated { levels: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreenParams {
    /// Samples per axis, a power of two.
    pub grid_n: usize,
    /// Sample spacing, m.
    pub grid_spacing: f64,
    /// Thickness of the slab the screen represents, m.
    pub slab_thickness: f64,
    #[serde(default)]
    pub low_frequency: LowFrequency,
}

impl ScreenParams {
    pub fn validate(&self, spec: &TurbulenceSpec) -> Result<()> {
        if self.grid_n < 4 || !self.grid_n.is_power_of_two() {
            return Err(config(format!("grid_n must be a power of two >= 4, got {}", self.grid_n)));
        }
        if !(self.grid_spacing > 0.0) {
            return Err(config("grid_spacing must be > 0"));
        }
        if self.grid_spacing > spec.inner_scale / 2.0 {
            return Err(config(format!(
                "grid_spacing {} m does not resolve the inner scale (need <= l0/2 = {} m)",
                self.grid_spacing,
                spec.inner_scale / 2.0
            )));
        }
        if !(self.slab_thickness > 0.0 && self.slab_thickness.is_finite()) {
            return Err(config("slab_thickness must be finite and > 0"));
        }
        Ok(())
    }

    pub fn extent(&self) -> f64 {
        self.grid_n as f64 * self.grid_spacing
    }

    /// Largest scale represented, including subharmonic levels.
    pub fn effective_extent(&self) -> f64 {
        match self.low_frequency {
            LowFrequency::Truncated => self.extent(),
            LowFrequency::Compensated { levels } => self.extent() * 3f64.powi(levels as i32),
        }
    }

    /// True when scales up to the outer scale are not represented.
    pub fn low_frequency_truncated(&self, spec: &TurbulenceSpec) -> bool {
        self.effective_extent() < spec.outer_scale
    }
}

fn signed_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// `∫ |g|² Φ_S d²g / |g_c|²` over the square cell of side `h` centred at
/// `(cx, cy)`, i.e. the weight that reproduces the cell's gradient variance.
fn slope_weighted_cell(spec: &TurbulenceSpec, dz: f64, cx: f64, cy: f64, h: f64) -> f64 {
    let m = CELL_QUADRATURE;
    let step = h / m as f64;
    let mut acc = 0.0;
    for a in 0..m {
        let gx = cx + (a as f64 + 0.5) * step - h / 2.0;
        for b in 0..m {
            let gy = cy + (b as f64 + 0.5) * step - h / 2.0;
            let g2 = gx * gx + gy * gy;
            acc += g2 * TAU * dz * spec.psi_unchecked(g2.sqrt());
        }
    }
    acc * step * step / (cx * cx + cy * cy)
}

/// Variance carried by each grid frequency, row-major `[ky * n + kx]`.
///
/// In truncated mode this is the midpoint rule `Φ_S(g) Δg²` with the zero
/// frequency removed.
pub fn spectral_weights(spec: &TurbulenceSpec, params: &ScreenParams) -> Vec<f64> {
    let n = params.grid_n;
    let dg = TAU / params.extent();
    let dz = params.slab_thickness;
    let mut w = vec![0.0; n * n];
    for iy in 0..n {
        let ky = signed_index(iy, n);
        for ix in 0..n {
            let kx = signed_index(ix, n);
            if kx == 0 && ky == 0 {
                continue;
            }
            let near = kx.abs().max(ky.abs()) <= NEAR_ORIGIN_CELLS;
            w[iy * n + ix] = match params.low_frequency {
                LowFrequency::Compensated { .. } if near => {
                    slope_weighted_cell(spec, dz, kx as f64 * dg, ky as f64 * dg, dg)
                }
                _ => {
                    let g = dg * ((kx * kx + ky * ky) as f64).sqrt();
                    TAU * dz * spec.psi_unchecked(g) * dg * dg
                }
            };
        }
    }
    w
}

/// One subharmonic level: nine plane waves at `(jx, jy) · dg`, `jx, jy ∈
/// {-1, 0, 1}`, the centre one absent.
#[derive(Debug, Clone, PartialEq)]
pub struct SubharmonicLevel {
    pub dg: f64,
    /// Complex amplitudes indexed `(jy + 1) * 3 + (jx + 1)`; the field is the
    /// real part of their plane-wave sum.
    pub coeffs: [Complex64; 9],
}

impl SubharmonicLevel {
    fn phasors(&self, x: f64, y: f64) -> ([Complex64; 3], [Complex64; 3]) {
        let ex = Complex64::from_polar(1.0, self.dg * x);
        let ey = Complex64::from_polar(1.0, self.dg * y);
        ([ex.conj(), Complex64::new(1.0, 0.0), ex], [ey.conj(), Complex64::new(1.0, 0.0), ey])
    }

    fn value(&self, x: f64, y: f64) -> f64 {
        let (px, py) = self.phasors(x, y);
        let mut s = 0.0;
        for jy in 0..3 {
            for jx in 0..3 {
                s += (self.coeffs[jy * 3 + jx] * px[jx] * py[jy]).re;
            }
        }
        s
    }

    /// Central difference with step `h` along each axis.
    fn gradient(&self, x: f64, y: f64, h: f64) -> [f64; 2] {
        let (px, py) = self.phasors(x, y);
        let s = (self.dg * h).sin() / h;
        let d = [-s, 0.0, s];
        let mut g = [0.0; 2];
        for jy in 0..3 {
            for jx in 0..3 {
                let z = self.coeffs[jy * 3 + jx] * px[jx] * py[jy];
                // Re(z · i d) = -Im(z) d
                g[0] -= z.im * d[jx];
                g[1] -= z.im * d[jy];
            }
        }
        g
    }
}

/// Momentum kick from one screen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kick {
    /// Transverse momentum change, 1/m.
    pub dq: [f64; 2],
    /// The position was outside the primary grid cell and was wrapped.
    pub wrapped: bool,
}

/// A synthesized screen: a periodic grid centred on the optical axis plus
/// optional subharmonic plane waves.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseScreen {
    n: usize,
    spacing: f64,
    /// Row-major `[iy * n + ix]`, m.
    values: Vec<f64>,
    subharmonics: Vec<SubharmonicLevel>,
}

impl PhaseScreen {
    /// Wraps explicit grid values (no subharmonics).
    pub fn from_values(n: usize, spacing: f64, values: Vec<f64>) -> Result<Self> {
        if n < 4 || values.len() != n * n {
            return Err(config(format!("expected {n}x{n} values, got {}", values.len())));
        }
        if !(spacing > 0.0) {
            return Err(config("grid spacing must be > 0"));
        }
        Ok(Self { n, spacing, values, subharmonics: Vec::new() })
    }

    pub fn grid_n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn subharmonics(&self) -> &[SubharmonicLevel] {
        &self.subharmonics
    }

    pub fn extent(&self) -> f64 {
        self.n as f64 * self.spacing
    }

    /// Lower-left corner of the primary cell; the grid spans
    /// `[-extent/2, extent/2)` on both axes.
    fn origin(&self) -> f64 {
        -0.5 * self.extent()
    }

    fn node(&self, ix: i64, iy: i64) -> f64 {
        let n = self.n as i64;
        let ix = ix.rem_euclid(n) as usize;
        let iy = iy.rem_euclid(n) as usize;
        self.values[iy * self.n + ix]
    }

    fn central_gradient(&self, ix: i64, iy: i64) -> [f64; 2] {
        let h2 = 2.0 * self.spacing;
        [(self.node(ix + 1, iy) - self.node(ix - 1, iy)) / h2, (self.node(ix, iy + 1) - self.node(ix, iy - 1)) / h2]
    }

    /// Cell index, fractional offsets, and whether the point lies outside the
    /// primary cell.
    fn locate(&self, x: f64, y: f64, halo: i64, wrap: bool) -> Result<(i64, i64, f64, f64, bool)> {
        let u = (x - self.origin()) / self.spacing;
        let v = (y - self.origin()) / self.spacing;
        let (i0, j0) = (u.floor(), v.floor());
        if !i0.is_finite() || !j0.is_finite() {
            return Err(Error::OutOfGrid { x, y });
        }
        let (i0, j0) = (i0 as i64, j0 as i64);
        let n = self.n as i64;
        let inside = |i: i64| i - halo >= 0 && i + 1 + halo < n;
        let wrapped = !(inside(i0) && inside(j0));
        if wrapped && !wrap {
            return Err(Error::OutOfGrid { x, y });
        }
        Ok((i0, j0, u - i0 as f64, v - j0 as f64, wrapped))
    }

    /// Bilinearly interpolated `S(x, y)` including subharmonics, m.
    pub fn value_at(&self, x: f64, y: f64, wrap: bool) -> Result<f64> {
        let (i0, j0, fu, fv, _) = self.locate(x, y, 0, wrap)?;
        let grid = (1.0 - fu) * (1.0 - fv) * self.node(i0, j0)
            + fu * (1.0 - fv) * self.node(i0 + 1, j0)
            + (1.0 - fu) * fv * self.node(i0, j0 + 1)
            + fu * fv * self.node(i0 + 1, j0 + 1);
        Ok(grid + self.subharmonics.iter().map(|l| l.value(x, y)).sum::<f64>())
    }

    /// `∇S` at `(x, y)`: central differences at the four surrounding nodes,
    /// bilinearly interpolated.
    pub fn gradient_at(&self, x: f64, y: f64, wrap: bool) -> Result<([f64; 2], bool)> {
        let (i0, j0, fu, fv, wrapped) = self.locate(x, y, 1, wrap)?;
        let g00 = self.central_gradient(i0, j0);
        let g10 = self.central_gradient(i0 + 1, j0);
        let g01 = self.central_gradient(i0, j0 + 1);
        let g11 = self.central_gradient(i0 + 1, j0 + 1);
        let w = [(1.0 - fu) * (1.0 - fv), fu * (1.0 - fv), (1.0 - fu) * fv, fu * fv];
        let mut g = [0.0; 2];
        for a in 0..2 {
            g[a] = w[0] * g00[a] + w[1] * g10[a] + w[2] * g01[a] + w[3] * g11[a];
        }
        for level in &self.subharmonics {
            let s = level.gradient(x, y, self.spacing);
            g[0] += s[0];
            g[1] += s[1];
        }
        Ok((g, wrapped))
    }

    /// Transverse momentum kick `q0 ∇S` for a ray at `(x, y)`.
    pub fn kick(&self, x: f64, y: f64, q0: f64, wrap: bool) -> Result<Kick> {
        let (g, wrapped) = self.gradient_at(x, y, wrap)?;
        Ok(Kick { dq: [q0 * g[0], q0 * g[1]], wrapped })
    }
}

/// Reusable synthesizer: precomputed spectral amplitudes and FFT plan.
pub struct ScreenSynthesizer {
    params: ScreenParams,
    amplitudes: Vec<f64>,
    subharmonic_amplitudes: Vec<(f64, [f64; 9])>,
    fft: Arc<dyn Fft<f64>>,
    truncated: bool,
}

impl std::fmt::Debug for ScreenSynthesizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScreenSynthesizer").field("params", &self.params).finish_non_exhaustive()
    }
}

impl ScreenSynthesizer {
    pub fn new(spec: &TurbulenceSpec, params: ScreenParams) -> Result<Self> {
        spec.validate()?;
        params.validate(spec)?;
        let amplitudes = spectral_weights(spec, &params).into_iter().map(f64::sqrt).collect();
        let mut subharmonic_amplitudes = Vec::new();
        if let LowFrequency::Compensated { levels } = params.low_frequency {
            let dg0 = TAU / params.extent();
            for p in 1..=levels {
                let dg = dg0 / 3f64.powi(p as i32);
                let mut amp = [0.0; 9];
                for jy in -1i64..=1 {
                    for jx in -1i64..=1 {
                        if jx == 0 && jy == 0 {
                            continue;
                        }
                        let w = slope_weighted_cell(spec, params.slab_thickness, jx as f64 * dg, jy as f64 * dg, dg);
                        amp[((jy + 1) * 3 + (jx + 1)) as usize] = w.sqrt();
                    }
                }
                subharmonic_amplitudes.push((dg, amp));
            }
        }
        let fft = FftPlanner::new().plan_fft_inverse(params.grid_n);
        Ok(Self { params, amplitudes, subharmonic_amplitudes, fft, truncated: params.low_frequency_truncated(spec) })
    }

    pub fn params(&self) -> &ScreenParams {
        &self.params
    }

    /// Whether scales up to L0 are missing from the synthesized screens.
    pub fn low_frequency_truncated(&self) -> bool {
        self.truncated
    }

    /// Variance of `S` per screen implied by the spectral weights, m².
    pub fn field_variance(&self) -> f64 {
        let grid: f64 = self.amplitudes.iter().map(|a| a * a).sum();
        let sub: f64 = self.subharmonic_amplitudes.iter().flat_map(|(_, a)| a.iter()).map(|a| a * a).sum();
        grid + sub
    }

    pub fn synthesize(&self, seed: u64) -> PhaseScreen {
        let n = self.params.grid_n;
        let mut rng = rng::stream(seed);
        let mut buf: Vec<Complex64> = self
            .amplitudes
            .iter()
            .map(|&a| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(a * re, a * im)
            })
            .collect();
        // Rows (x), then columns (y) via transposition.
        self.fft.process(&mut buf);
        transpose(&mut buf, n);
        self.fft.process(&mut buf);
        transpose(&mut buf, n);
        let values = buf.iter().map(|z| z.re).collect();

        let subharmonics = self
            .subharmonic_amplitudes
            .iter()
            .map(|(dg, amp)| {
                let mut coeffs = [Complex64::new(0.0, 0.0); 9];
                for (c, &a) in coeffs.iter_mut().zip(amp) {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    *c = Complex64::new(a * re, a * im);
                }
                SubharmonicLevel { dg: *dg, coeffs }
            })
            .collect();
        PhaseScreen { n, spacing: self.params.grid_spacing, values, subharmonics }
    }
}

fn transpose(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

/// Synthesizes one screen from scratch. Prefer [`ScreenSynthesizer`] when
/// generating many screens with the same parameters.
pub fn synthesize_screen(spec: &TurbulenceSpec, params: ScreenParams, seed: u64) -> Result<PhaseScreen> {
    Ok(ScreenSynthesizer::new(spec, params)?.synthesize(seed))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacedScreen {
    /// Distance from the source, m.
    pub z: f64,
    pub screen: PhaseScreen,
}

/// The frozen atmosphere of one realization: screens ordered by distance.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScreenStack {
    pub screens: Vec<PlacedScreen>,
    pub realization_seed: u64,
    pub low_frequency_truncated: bool,
}

impl ScreenStack {
    /// Screens at arbitrary positions (sorted by `z`).
    pub fn from_screens(mut screens: Vec<PlacedScreen>) -> Self {
        screens.sort_by(|a, b| a.z.total_cmp(&b.z));
        Self { screens, realization_seed: 0, low_frequency_truncated: false }
    }

    /// `n_slabs` contiguous slabs from the source, each collapsed to a screen
    /// at its centre. Slab `k` is seeded from `(realization_seed, k)`.
    pub fn synthesize(synth: &ScreenSynthesizer, n_slabs: usize, realization_seed: u64) -> Self {
        let dz = synth.params.slab_thickness;
        let screens = (0..n_slabs)
            .into_par_iter()
            .map(|k| PlacedScreen {
                z: (k as f64 + 0.5) * dz,
                screen: synth.synthesize(rng::derive_seed(realization_seed, Domain::Slab, k as u64)),
            })
            .collect();
        Self { screens, realization_seed, low_frequency_truncated: synth.low_frequency_truncated() }
    }

    pub fn len(&self) -> usize {
        self.screens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.screens.is_empty()
    }
}

/// Writes the grid part of a screen: `"TPSC"`, `grid_n` as little-endian
/// u32, spacing as little-endian f64, then `n²` little-endian f64 values in
/// row-major order. Subharmonic waves are not stored.
pub fn write_dump<W: Write>(screen: &PhaseScreen, mut w: W) -> std::io::Result<()> {
    w.write_all(DUMP_MAGIC)?;
    w.write_all(&(screen.n as u32).to_le_bytes())?;
    w.write_all(&screen.spacing.to_le_bytes())?;
    for v in &screen.values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_dump<R: Read>(mut r: R) -> Result<PhaseScreen> {
    let io = |e: std::io::Error| Error::Format(e.to_string());
    let mut header = [0u8; 16];
    r.read_exact(&mut header).map_err(io)?;
    if &header[..4] != DUMP_MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let n = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let spacing = f64::from_le_bytes(header[8..16].try_into().unwrap());
    let mut values = vec![0.0; n * n];
    let mut word = [0u8; 8];
    for v in &mut values {
        r.read_exact(&mut word).map_err(io)?;
        *v = f64::from_le_bytes(word);
    }
    PhaseScreen::from_values(n, spacing, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::turbulence::SpectrumModel;

    fn spec() -> TurbulenceSpec {
        TurbulenceSpec::new(1e-14, 5e-3, 10.0, SpectrumModel::VonKarman).unwrap()
    }

    fn params(n: usize) -> ScreenParams {
        ScreenParams { grid_n: n, grid_spacing: 1.25e-3, slab_thickness: 100.0, low_frequency: LowFrequency::Truncated }
    }

    #[test]
    fn rejects_unresolved_or_odd_grids() {
        let s = spec();
        let mut p = params(64);
        p.grid_spacing = 3e-3;
        assert!(matches!(ScreenSynthesizer::new(&s, p), Err(Error::Config(_))));
        assert!(ScreenSynthesizer::new(&s, params(48)).is_err());
    }

    #[test]
    fn zero_strength_gives_zero_field() {
        let s = spec().with_cn2(0.0);
        let p = ScreenParams { low_frequency: LowFrequency::Compensated { levels: 4 }, ..params(32) };
        let screen = synthesize_screen(&s, p, 9).unwrap();
        assert!(screen.values().iter().all(|&v| v == 0.0));
        assert_eq!(screen.kick(0.001, -0.002, 1e7, true).unwrap().dq, [0.0, 0.0]);
    }

    #[test]
    fn equal_seeds_bit_identical() {
        let synth = ScreenSynthesizer::new(&spec(), params(64)).unwrap();
        assert_eq!(synth.synthesize(5), synth.synthesize(5));
        assert_ne!(synth.synthesize(5).values(), synth.synthesize(6).values());
    }

    #[test]
    fn truncation_flag() {
        let s = spec();
        // 64 * 1.25 mm = 8 cm < L0 = 10 m
        assert!(ScreenSynthesizer::new(&s, params(64)).unwrap().low_frequency_truncated());
        let p = ScreenParams { low_frequency: LowFrequency::Compensated { levels: 6 }, ..params(64) };
        // 8 cm * 729 = 58 m
        assert!(!ScreenSynthesizer::new(&s, p).unwrap().low_frequency_truncated());
    }

    #[test]
    fn linear_ramp_kick_is_exact() {
        let n = 16;
        let dx = 1e-3;
        let slope = 2.5e-7;
        let mut values = vec![0.0; n * n];
        for iy in 0..n {
            for ix in 0..n {
                values[iy * n + ix] = slope * (ix as f64 * dx - 0.5 * n as f64 * dx);
            }
        }
        let screen = PhaseScreen::from_values(n, dx, values).unwrap();
        let q0 = 7.853981633974483e6;
        for &(x, y) in &[(0.0, 0.0), (1.3e-3, -2.7e-3), (-4.05e-3, 3.3e-3)] {
            let k = screen.kick(x, y, q0, false).unwrap();
            assert!((k.dq[0] / (q0 * slope) - 1.0).abs() < 1e-12, "{:?}", k);
            assert!(k.dq[1].abs() < 1e-12 * q0 * slope);
            assert!(!k.wrapped);
        }
        assert!(matches!(screen.kick(0.0075, 0.0, q0, false), Err(Error::OutOfGrid { .. })));
        assert!(screen.kick(0.0075, 0.0, q0, true).unwrap().wrapped);
    }

    #[test]
    fn constant_field_has_no_kick() {
        let screen = PhaseScreen::from_values(8, 1e-3, vec![3.7e-6; 64]).unwrap();
        for &(x, y) in &[(0.0, 0.0), (0.1, -0.3), (1e3, 2e3)] {
            assert_eq!(screen.kick(x, y, 1e7, true).unwrap().dq, [0.0, 0.0]);
        }
    }

    #[test]
    fn subharmonic_gradient_is_central_difference() {
        let synth = ScreenSynthesizer::new(
            &spec(),
            ScreenParams { low_frequency: LowFrequency::Compensated { levels: 3 }, ..params(16) },
        )
        .unwrap();
        let screen = synth.synthesize(1);
        let level = &screen.subharmonics()[1];
        let (x, y, h) = (0.37, -1.2, screen.spacing());
        let g = level.gradient(x, y, h);
        let fd = (level.value(x + h, y) - level.value(x - h, y)) / (2.0 * h);
        assert!((g[0] - fd).abs() <= 1e-9 * fd.abs().max(1e-30));
        let fd = (level.value(x, y + h) - level.value(x, y - h)) / (2.0 * h);
        assert!((g[1] - fd).abs() <= 1e-9 * fd.abs().max(1e-30));
    }

    #[test]
    fn dump_round_trip() {
        let screen = synthesize_screen(&spec(), params(16), 3).unwrap();
        let mut bytes = Vec::new();
        write_dump(&screen, &mut bytes).unwrap();
        assert_eq!(bytes.len(), 16 + 8 * 256);
        assert_eq!(&bytes[..4], b"TPSC");
        let back = read_dump(bytes.as_slice()).unwrap();
        assert_eq!(back.values(), screen.values());
        assert_eq!(back.spacing(), screen.spacing());
        bytes[0] = b'X';
        assert!(read_dump(bytes.as_slice()).is_err());
    }
}
