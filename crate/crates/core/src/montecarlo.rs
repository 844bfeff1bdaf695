//! Ensembles over frozen atmospheres.
//!
//! One realization is one counting interval: a single screen stack (or, for
//! the white-noise model, independent kicks) shared by every photon emitted
//! during the interval. The per-photon detection probability of that
//! realization is estimated by tracing probe photons; its spread over
//! realizations is the scintillation index, and counts are then sampled
//! interval by interval from it.
//!
//! Every random draw comes from a stream derived from
//! `(master_seed, realization index, ...)`, and reductions run in
//! realization order, so results do not depend on the worker count.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counting::{CountStats, DetectionConfig};
use crate::error::{config, Error, Result};
use crate::propagation::{propagate, propagate_diffusive, BeamAnalytic, ForceModel, PathConfig};
use crate::rng::{self, Domain};
use crate::source::{sample_initial_photon, sample_interval_photon_count, sample_tilt, PhotonStatistics, SourceConfig};
use crate::stats::{normalized_variance, Moments};
use crate::turbulence::{
    force_diffusion_coefficient, turbulence_t, LowFrequency, ScreenParams, ScreenStack, ScreenSynthesizer,
    TurbulenceSpec,
};

/// Probes per independent random stream inside one realization.
const PROBE_BLOCK: usize = 1024;
/// Realizations with fewer hits than this give an unreliable `p_hat`.
pub const MIN_RELIABLE_HITS: u64 = 10;
const BOOTSTRAP_RESAMPLES: usize = 400;

/// When the transmitter tilt is redrawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TiltMode {
    /// Fresh tilt for every pulse (fast phase screen).
    #[default]
    PerPulse,
    /// One tilt for the whole counting interval (slow phase screen).
    PerInterval,
}

/// How the turbulent medium is represented.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "model")]
pub enum MediumConfig {
    /// Independent Gaussian kicks calibrated to `T`.
    WhiteNoise { steps: usize },
    /// Frozen screens; `slabs` equal slabs cover the path.
    FrozenScreens { grid_n: usize, grid_spacing: f64, slabs: usize, low_frequency: LowFrequency },
}

/// Slab count giving thickness `max(L0, L/64)`, rounded so slabs tile the path.
pub fn default_slab_count(length: f64, outer_scale: f64) -> usize {
    let by_outer = if outer_scale.is_finite() { (length / outer_scale).floor() as usize } else { 64 };
    by_outer.clamp(1, 64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub turbulence: TurbulenceSpec,
    pub source: SourceConfig,
    pub detector: DetectionConfig,
    /// Propagation distance, m.
    pub path_length: f64,
    pub medium: MediumConfig,
    pub realizations: usize,
    pub probes_per_realization: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub tilt_mode: TiltMode,
    /// Wrap rays that leave the screen grid (periodic screens).
    #[serde(default = "default_wrap")]
    pub wrap: bool,
}

fn default_wrap() -> bool {
    true
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.turbulence.validate()?;
        self.source.validate()?;
        self.detector.validate()?;
        if !(self.path_length >= 0.0 && self.path_length.is_finite()) {
            return Err(config(format!("path length must be >= 0, got {}", self.path_length)));
        }
        if self.realizations < 2 {
            return Err(config("need at least 2 realizations"));
        }
        if self.probes_per_realization < 100 {
            return Err(config("need at least 100 probes per realization"));
        }
        match self.medium {
            MediumConfig::WhiteNoise { steps } if steps < 1 => return Err(config("steps must be >= 1")),
            MediumConfig::FrozenScreens { .. } if self.path_length > 0.0 => {
                self.screen_params(self.path_length)?.validate(&self.turbulence)?;
            }
            _ => {}
        }
        Ok(())
    }

    /// Screen parameters for a path of `length` metres.
    pub fn screen_params(&self, length: f64) -> Result<ScreenParams> {
        let MediumConfig::FrozenScreens { grid_n, grid_spacing, slabs, low_frequency } = self.medium else {
            return Err(config("medium is not frozen screens"));
        };
        if slabs == 0 {
            return Err(config("slabs must be >= 1"));
        }
        let slab_thickness = length / slabs as f64;
        if self.turbulence.outer_scale.is_finite() && slab_thickness < self.turbulence.outer_scale {
            return Err(config(format!(
                "slab thickness {slab_thickness:.3} m is below the outer scale {} m; slabs would not be independent",
                self.turbulence.outer_scale
            )));
        }
        Ok(ScreenParams { grid_n, grid_spacing, slab_thickness, low_frequency })
    }

    pub fn t_param(&self) -> f64 {
        turbulence_t(&self.turbulence).unwrap_or(0.0)
    }

    pub fn beam(&self) -> BeamAnalytic {
        BeamAnalytic {
            r0: self.source.r0,
            r1_sq: self.source.r1_sq(),
            q0: self.source.q0(),
            t_param: self.t_param(),
            rz: self.source.rz,
            z0: self.source.z0,
        }
    }

    pub fn realization_seed(&self, index: usize) -> u64 {
        rng::derive_seed(self.master_seed, Domain::Realization, index as u64)
    }
}

/// Outcome of one frozen realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealizationResult {
    /// `η_q · hits / probes`.
    pub p_hat: f64,
    pub hits: u64,
    pub probes: u64,
    pub wrap_count: u64,
}

impl RealizationResult {
    pub fn degenerate(&self) -> bool {
        self.hits < MIN_RELIABLE_HITS
    }
}

/// A configured experiment over one path length.
#[derive(Debug)]
pub struct Experiment {
    cfg: ExperimentConfig,
    length: f64,
    synth: Option<ScreenSynthesizer>,
    d_f: f64,
}

impl Experiment {
    pub fn new(cfg: ExperimentConfig) -> Result<Self> {
        let length = cfg.path_length;
        Self::with_length(cfg, length)
    }

    /// Same configuration, different path length.
    pub fn with_length(cfg: ExperimentConfig, length: f64) -> Result<Self> {
        cfg.validate()?;
        let d_f = force_diffusion_coefficient(cfg.t_param(), cfg.source.q0())?;
        let synth = match cfg.medium {
            MediumConfig::FrozenScreens { .. } if length > 0.0 => {
                Some(ScreenSynthesizer::new(&cfg.turbulence, cfg.screen_params(length)?)?)
            }
            _ => None,
        };
        Ok(Self { cfg, length, synth, d_f })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn low_frequency_truncated(&self) -> bool {
        self.synth.as_ref().is_some_and(|s| s.low_frequency_truncated())
    }

    /// Largest transverse scale the screens represent, if screens are used.
    pub fn screen_extent(&self) -> Option<f64> {
        self.synth.as_ref().map(|s| s.params().effective_extent())
    }

    /// The random force of realization `index`.
    pub fn path(&self, index: usize) -> PathConfig {
        let force = match (&self.cfg.medium, &self.synth) {
            (MediumConfig::WhiteNoise { .. }, _) => ForceModel::WhiteNoiseDiffusion { d_f: self.d_f },
            (MediumConfig::FrozenScreens { slabs, .. }, Some(synth)) => {
                ForceModel::FrozenScreens(ScreenStack::synthesize(synth, *slabs, self.cfg.realization_seed(index)))
            }
            (MediumConfig::FrozenScreens { .. }, None) => ForceModel::FrozenScreens(ScreenStack::default()),
        };
        let steps = match self.cfg.medium {
            MediumConfig::WhiteNoise { steps } => steps,
            _ => 1,
        };
        PathConfig { length: self.length, steps, force }
    }

    /// Traces `count` probes through `path`, calling `visit` with each final
    /// state. Blocks of probes use independent streams.
    fn trace_probes<T, F>(&self, index: usize, path: &PathConfig, count: usize, visit: F) -> Result<(Vec<T>, u64)>
    where
        T: Send,
        F: Fn(&crate::source::PhotonState) -> T + Sync,
    {
        let seed = self.cfg.realization_seed(index);
        let src = &self.cfg.source;
        let q0 = src.q0();
        let interval_tilt = match self.cfg.tilt_mode {
            TiltMode::PerInterval => Some(sample_tilt(src.lambda_c, &mut rng::child_stream(seed, Domain::Photons, 0))),
            TiltMode::PerPulse => None,
        };
        let blocks = count.div_ceil(PROBE_BLOCK);
        let per_block: Vec<Result<(Vec<T>, u64)>> = (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut rng = rng::child_stream(seed, Domain::Probes, b as u64);
                let n = PROBE_BLOCK.min(count - b * PROBE_BLOCK);
                let mut out = Vec::with_capacity(n);
                let mut wraps = 0u64;
                for _ in 0..n {
                    let tilt = interval_tilt.unwrap_or_else(|| sample_tilt(src.lambda_c, &mut rng));
                    let photon = sample_initial_photon(src, tilt, &mut rng);
                    let traced = propagate(photon, path, q0, self.cfg.wrap, &mut rng)?;
                    wraps += traced.wraps as u64;
                    out.push(visit(&traced.state));
                }
                Ok((out, wraps))
            })
            .collect();
        let mut all = Vec::with_capacity(count);
        let mut wraps = 0;
        for block in per_block {
            let (states, w) = block?;
            all.extend(states);
            wraps += w;
        }
        Ok((all, wraps))
    }

    /// Detection probability of realization `index`.
    pub fn estimate_detection_probability(&self, index: usize) -> Result<RealizationResult> {
        let path = self.path(index);
        self.detection_probability_on(index, &path)
    }

    fn detection_probability_on(&self, index: usize, path: &PathConfig) -> Result<RealizationResult> {
        let det = &self.cfg.detector;
        let rd2 = det.radius() * det.radius();
        let count = self.cfg.probes_per_realization;
        let (flags, wrap_count) = self.trace_probes(index, path, count, |s| {
            let dx = s.x - det.center[0];
            let dy = s.y - det.center[1];
            dx * dx + dy * dy <= rd2
        })?;
        let hits = flags.into_iter().filter(|&h| h).count() as u64;
        Ok(RealizationResult { p_hat: det.eta_q * hits as f64 / count as f64, hits, probes: count as u64, wrap_count })
    }

    /// All realizations, in index order.
    pub fn run(&self) -> Result<Vec<RealizationResult>> {
        (0..self.cfg.realizations).into_par_iter().map(|i| self.estimate_detection_probability(i)).collect()
    }

    /// Per-axis transverse position variance at the end of the path, with a
    /// standard error from the spread of realization means.
    pub fn position_variance(&self) -> Result<(f64, f64)> {
        let per_realization: Vec<f64> = (0..self.cfg.realizations)
            .into_par_iter()
            .map(|i| {
                let path = self.path(i);
                let (xs, _) =
                    self.trace_probes(i, &path, self.cfg.probes_per_realization, |s| 0.5 * (s.x * s.x + s.y * s.y))?;
                Ok(xs.iter().sum::<f64>() / xs.len() as f64)
            })
            .collect::<Result<_>>()?;
        let m: Moments = per_realization.into_iter().collect();
        Ok((m.mean(), m.std_error()))
    }

    /// Counts for `intervals` realizations obtained by tracing every emitted
    /// photon individually (validation path for [`simulate_count_statistics`]).
    pub fn retraced_counts(&self, intervals: usize) -> Result<Vec<u64>> {
        let det = &self.cfg.detector;
        let rd2 = det.radius() * det.radius();
        let stat = self.cfg.source.photon_stat;
        (0..intervals)
            .into_par_iter()
            .map(|i| {
                let path = self.path(i);
                let n = sample_interval_photon_count(
                    &stat,
                    &mut rng::child_stream(self.cfg.realization_seed(i), Domain::Counts, 0),
                );
                let (flags, _) = self.trace_probes(i, &path, n as usize, |s| {
                    let dx = s.x - det.center[0];
                    let dy = s.y - det.center[1];
                    dx * dx + dy * dy <= rd2
                })?;
                let mut eff = rng::child_stream(self.cfg.realization_seed(i), Domain::Counts, 1);
                Ok(flags.into_iter().filter(|&hit| hit && eff.gen::<f64>() < det.eta_q).count() as u64)
            })
            .collect()
    }
}

/// Runs `f` on a pool of `workers` threads (`0` = rayon default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Scintillation index estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScintillationEstimate {
    /// Debiased `σ²`.
    pub sigma2: f64,
    /// Bootstrap standard error over realizations.
    pub stderr: f64,
    /// `Var(p_hat)/Mean(p_hat)²` before removing probe noise.
    pub raw: f64,
    pub mean_p: f64,
    pub realizations: usize,
    /// Realizations with fewer than [`MIN_RELIABLE_HITS`] hits.
    pub degenerate: usize,
}

fn debiased_sigma2(results: &[RealizationResult], eta_q: f64) -> Option<(f64, f64, f64)> {
    let m: Moments = results.iter().map(|r| r.p_hat).collect();
    let mean = m.mean();
    if !(mean > 0.0) || results.len() < 2 {
        return None;
    }
    // E[p̂(η - p̂)/(n - 1)] = Var(p̂ | p) = p(η - p)/n.
    let noise = results.iter().map(|r| r.p_hat * (eta_q - r.p_hat) / (r.probes.max(2) - 1) as f64).sum::<f64>()
        / results.len() as f64;
    let raw = m.variance() / (mean * mean);
    Some((raw - noise / (mean * mean), raw, noise / (mean * mean)))
}

/// `σ² = Var(p̂)/Mean(p̂)²` minus the binomial probe noise
/// `Mean(p̂(η_q - p̂)/(probes - 1))/Mean(p̂)²`.
///
/// The standard error is a bootstrap over realizations, floored at the
/// chi-square spread `noise·sqrt(2/(n-1))` of the probe-noise variance so
/// that a few unluckily similar realizations cannot make it vanish.
pub fn estimate_scintillation_index(results: &[RealizationResult], eta_q: f64) -> Result<ScintillationEstimate> {
    let (sigma2, raw, noise) = debiased_sigma2(results, eta_q)
        .ok_or_else(|| Error::Degenerate("mean detection probability is zero".into()))?;
    let n = results.len();
    let mean_p = results.iter().map(|r| r.p_hat).sum::<f64>() / n as f64;
    let mut rng = rng::child_stream(n as u64, Domain::Bootstrap, 0);
    let mut resample = vec![results[0]; n];
    let boot: Moments = (0..BOOTSTRAP_RESAMPLES)
        .filter_map(|_| {
            for slot in resample.iter_mut() {
                *slot = results[rng.gen_range(0..n)];
            }
            debiased_sigma2(&resample, eta_q).map(|(s, _, _)| s)
        })
        .collect();
    Ok(ScintillationEstimate {
        sigma2,
        stderr: boot.variance().sqrt().max(noise * (2.0 / (n - 1) as f64).sqrt()),
        raw,
        mean_p,
        realizations: n,
        degenerate: results.iter().filter(|r| r.degenerate()).count(),
    })
}

/// `count` detection probabilities `α·X` with `X ~ Gamma` of mean 1 and
/// variance `sigma2`, clamped to 1. A stand-in ensemble with known moments.
pub fn synthetic_probabilities(alpha: f64, sigma2: f64, count: usize, seed: u64) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha <= 1.0) || !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(config(format!("need 0 < alpha <= 1 and sigma2 >= 0, got {alpha}, {sigma2}")));
    }
    if sigma2 == 0.0 {
        return Ok(vec![alpha; count]);
    }
    let gamma = Gamma::new(1.0 / sigma2, sigma2).map_err(|e| config(e.to_string()))?;
    let mut rng = rng::child_stream(seed, Domain::Realization, 0);
    Ok((0..count).map(|_| (alpha * gamma.sample(&mut rng)).min(1.0)).collect())
}

/// Sampled count statistics paired with the closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampledCounts {
    pub mean: f64,
    pub variance: f64,
    pub normalized_variance: f64,
    /// Delta-method standard error of `normalized_variance`.
    pub stderr: f64,
    pub intervals: usize,
    /// `Var(p)/Mean(p)²` of the probabilities the counts were drawn from.
    pub sigma2: f64,
    /// Closed form evaluated with the ensemble's own `α = Mean(p)` and `σ²`.
    pub analytic: CountStats,
}

/// Counts per interval: `N` from the source statistics, then
/// `n ~ Binomial(N, p_i)` with `p_i` the interval's detection probability.
pub fn sample_counts(source: &PhotonStatistics, probabilities: &[f64], seed: u64) -> Vec<u64> {
    probabilities
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let mut rng = rng::child_stream(seed, Domain::Counts, i as u64);
            let n = sample_interval_photon_count(source, &mut rng);
            if n == 0 || p <= 0.0 {
                0
            } else {
                Binomial::new(n, p.min(1.0)).expect("valid binomial").sample(&mut rng)
            }
        })
        .collect()
}

/// Samples one interval per entry of `probabilities` and reduces them.
pub fn simulate_count_statistics(source: &PhotonStatistics, probabilities: &[f64], seed: u64) -> Result<SampledCounts> {
    let counts: Vec<f64> = sample_counts(source, probabilities, seed).into_iter().map(|n| n as f64).collect();
    summarize_counts(source, probabilities, &counts)
}

/// Reduces sampled counts and pairs them with the closed form.
pub fn summarize_counts(source: &PhotonStatistics, probabilities: &[f64], counts: &[f64]) -> Result<SampledCounts> {
    let m: Moments = counts.iter().copied().collect();
    let (nv, stderr) =
        normalized_variance(counts).ok_or_else(|| Error::Degenerate("no counts were recorded".into()))?;
    let pm: Moments = probabilities.iter().copied().collect();
    let alpha = pm.mean();
    let sigma2 = if alpha > 0.0 { pm.variance() / (alpha * alpha) } else { 0.0 };
    Ok(SampledCounts {
        mean: m.mean(),
        variance: m.variance(),
        normalized_variance: nv,
        stderr,
        intervals: counts.len(),
        sigma2,
        analytic: CountStats::analytic(alpha, source, sigma2)?,
    })
}

/// One row of the beam-spread table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSpreadRow {
    pub distance: f64,
    pub r2_analytic: f64,
    /// Turbulent part of `R²`.
    pub r2_turbulence: f64,
    pub var_mc: f64,
    pub stderr: f64,
    /// `var_mc / (R²/2)`.
    pub ratio: f64,
}

/// Sampled per-axis position variance against `R²/2` at each distance.
///
/// Each distance is an independent run with the same seeds; frozen screens
/// are re-tiled into the configured number of slabs per distance.
pub fn run_beam_spread_experiment(cfg: &ExperimentConfig, distances: &[f64]) -> Result<Vec<BeamSpreadRow>> {
    let beam = cfg.beam();
    distances
        .iter()
        .map(|&d| {
            if !(d >= 0.0) {
                return Err(config(format!("distance must be >= 0, got {d}")));
            }
            let exp = Experiment::with_length(cfg.clone(), d)?;
            let (var_mc, stderr) = exp.position_variance()?;
            let terms = beam.terms_at_distance(d);
            let r2 = terms.total();
            Ok(BeamSpreadRow {
                distance: d,
                r2_analytic: r2,
                r2_turbulence: terms.turbulence,
                var_mc,
                stderr,
                ratio: var_mc / (0.5 * r2),
            })
        })
        .collect()
}

/// Position variance of `count` independent white-noise photons, without the
/// realization machinery; used for quick checks of the diffusion model.
pub fn diffusive_position_variance(
    src: &SourceConfig,
    spec: &TurbulenceSpec,
    length: f64,
    steps: usize,
    count: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let q0 = src.q0();
    let d_f = force_diffusion_coefficient(turbulence_t(spec)?, q0)?;
    let mut rng = rng::stream(seed);
    let m: Moments = (0..count)
        .map(|_| {
            let tilt = sample_tilt(src.lambda_c, &mut rng);
            let p = sample_initial_photon(src, tilt, &mut rng);
            let s = propagate_diffusive(p, length, steps, d_f, q0, &mut rng);
            0.5 * (s.x * s.x + s.y * s.y)
        })
        .collect();
    Ok((m.mean(), m.std_error()))
}
