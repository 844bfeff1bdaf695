//! The oracle suite behind `photoscint validate`.
//!
//! Every check compares a library result against an independently computed
//! value with a fixed tolerance; statistical checks use three standard errors.

use std::f64::consts::PI;

use rand::Rng;

use photoscint::constants::C;
use photoscint::counting::{normalized_variance_fock, normalized_variance_poisson, CountStats, DetectionConfig};
use photoscint::montecarlo::{
    diffusive_position_variance, estimate_scintillation_index, simulate_count_statistics, synthetic_probabilities,
    with_workers, Experiment, ExperimentConfig, MediumConfig, TiltMode,
};
use photoscint::propagation::beam_radius_squared;
use photoscint::rng::{child_stream, derive_seed, Domain};
use photoscint::source::{reduced_radius_sq, sample_initial_photon, sample_tilt, PhotonStatistics, SourceConfig};
use photoscint::stats::Moments;
use photoscint::turbulence::{
    force_diffusion_coefficient, spectrum_psi, turbulence_t, LowFrequency, ScreenParams, ScreenSynthesizer,
    TurbulenceSpec,
};

use crate::CliError;

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    pub seed: u64,
    pub workers: usize,
    pub tolerance_scale: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED, workers: 0, tolerance_scale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Default)]
pub struct SuiteReport {
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{} {:<40} measured={:<14.6e} expected={:<14.6e} tolerance={:.3e}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.expected,
                c.tolerance
            ));
        }
        out.push_str(&format!("{} checks, {} failed\n", self.checks.len(), self.failures()));
        out
    }

    fn push(&mut self, scale: f64, name: &'static str, measured: f64, expected: f64, tolerance: f64) {
        let pass = (measured - expected).abs() <= tolerance * scale;
        self.checks.push(Check { name, measured, expected, tolerance: tolerance * scale, pass });
    }
}

fn lib(e: photoscint::Error) -> CliError {
    CliError::from(e)
}

const LAMBDA: f64 = 0.8e-6;
const R0: f64 = 0.01;

fn standard_turbulence() -> TurbulenceSpec {
    TurbulenceSpec::tatarskii(1e-14, 0.005).expect("valid")
}

fn source(lambda_c: f64) -> SourceConfig {
    SourceConfig {
        r0: R0,
        rz: 0.3,
        z0: 0.0,
        wavelength: LAMBDA,
        lambda_c,
        photon_stat: PhotonStatistics::Fock { n: 100 },
        pulses_per_interval: 100,
        t_p: 1e-3,
    }
}

/// Simpson's rule on `[a, b]` with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

pub fn run_suite(opts: &SuiteOptions) -> Result<SuiteReport, CliError> {
    with_workers(opts.workers, || suite(opts)).map_err(lib)?
}

fn suite(opts: &SuiteOptions) -> Result<SuiteReport, CliError> {
    let k = opts.tolerance_scale;
    let seed = opts.seed;
    let mut r = SuiteReport::default();
    let turb = standard_turbulence();
    let q0 = 2.0 * PI / LAMBDA;

    // Spectrum and bulk parameters.
    let l0 = turb.inner_scale;
    let t = turbulence_t(&turb).map_err(lib)?;
    // g = v³ removes the g^(-2/3) endpoint singularity.
    let slope_integral = PI * PI / 3.0
        * simpson(
            |v: f64| {
                if v == 0.0 {
                    3.0 * 0.033 * turb.cn2
                } else {
                    3.0 * v.powi(11) * spectrum_psi(&turb, v.powi(3)).unwrap()
                }
            },
            0.0,
            (40.0 * PI / l0).cbrt(),
            20_000,
        );
    r.push(k, "T_vs_spectral_slope_integral", t / slope_integral, 1.0, 2e-3);
    let by_hand = 0.033 * 1e-14 * (-(l0 / (2.0 * PI)).powi(2)).exp() / 1.0f64.powf(11.0 / 6.0);
    r.push(k, "spectrum_psi_at_1_per_m", spectrum_psi(&turb, 1.0).map_err(lib)? / by_hand, 1.0, 1e-12);
    let d_f = force_diffusion_coefficient(t, q0).map_err(lib)?;
    r.push(k, "diffusion_coefficient", d_f / (3.0 * C * q0 * q0 * t), 1.0, 1e-12);

    // Closed-form beam radius.
    let tz = |l: f64| l / C;
    let r2_diff = beam_radius_squared(tz(1e4), R0, R0, q0, 0.0).map_err(lib)?;
    r.push(k, "R2_diffraction_only_10km", r2_diff, 0.5 * R0 * R0 * (1.0 + (2e4 / (q0 * R0 * R0)).powi(2)), 1e-12);
    r.push(k, "R2_reference_diffraction_10km", r2_diff, 0.0325, 0.0325 * 5e-3);
    let r2 = beam_radius_squared(tz(1e4), R0, R0, q0, t).map_err(lib)?;
    r.push(k, "R2_reference_turbulent_10km", r2, 0.163, 0.163 * 5e-3);
    let far = 1e6;
    let lc = SourceConfig::lambda_c_for_ratio(R0, 0.5).map_err(lib)?;
    let r1 = reduced_radius_sq(R0, lc).map_err(lib)?.sqrt();
    let turb_far = beam_radius_squared(tz(far), R0, R0, q0, t).map_err(lib)?;
    let partial_far = beam_radius_squared(tz(far), R0, r1, q0, t).map_err(lib)?;
    r.push(k, "R2_coherence_insensitivity_long_path", partial_far / turb_far, 1.0, 0.01);

    // Source phase space.
    let src = source(lc);
    let mut rng = child_stream(seed, Domain::Photons, 0);
    let (mut xs, mut qs) = (Moments::default(), Moments::default());
    for _ in 0..100_000 {
        let tilt = sample_tilt(src.lambda_c, &mut rng);
        let p = sample_initial_photon(&src, tilt, &mut rng);
        xs.push(p.x);
        qs.push(p.qx);
    }
    let var_se = |m: &Moments| m.variance() * (2.0 / (m.count() - 1) as f64).sqrt();
    r.push(k, "source_position_variance", xs.variance(), R0 * R0 / 4.0, 3.0 * var_se(&xs));
    r.push(k, "source_momentum_variance", qs.variance(), 1.0 / (r1 * r1), 3.0 * var_se(&qs));

    // Diffusive beam spread against R²/2.
    for (name, l) in [("beam_spread_white_noise_1km", 1e3), ("beam_spread_white_noise_10km", 1e4)] {
        let (var, se) = diffusive_position_variance(
            &source(f64::INFINITY),
            &turb,
            l,
            50,
            20_000,
            derive_seed(seed, Domain::Realization, l as u64),
        )
        .map_err(lib)?;
        let half = 0.5 * beam_radius_squared(tz(l), R0, R0, q0, t).map_err(lib)?;
        r.push(k, name, var / half, 1.0, 3.0 * se / half);
    }

    // Screen kicks carry the diffusion-model momentum variance.
    let dz = 100.0;
    let params = ScreenParams {
        grid_n: 256,
        grid_spacing: l0 / 16.0,
        slab_thickness: dz,
        low_frequency: LowFrequency::Compensated { levels: 12 },
    };
    let synth = ScreenSynthesizer::new(&turb, params).map_err(lib)?;
    let expected_kick = 2.0 * d_f * dz / C;
    let per_screen: Moments = (0..100u64)
        .map(|i| {
            let screen = synth.synthesize(derive_seed(seed, Domain::Slab, i));
            let mut rng = child_stream(seed, Domain::Probes, i);
            let half = 0.5 * params.extent();
            (0..2000)
                .map(|_| {
                    let (x, y) = (rng.gen_range(-half..half), rng.gen_range(-half..half));
                    let kick = screen.kick(x, y, q0, true).unwrap();
                    0.5 * (kick.dq[0].powi(2) + kick.dq[1].powi(2))
                })
                .sum::<f64>()
                / 2000.0
                / expected_kick
        })
        .collect();
    r.push(k, "screen_kick_variance", per_screen.mean(), 1.0, 3.0 * per_screen.std_error());

    // Photocount statistics.
    let p = synthetic_probabilities(0.1, 0.5, 10_000, derive_seed(seed, Domain::Counts, 1)).map_err(lib)?;
    let fock = simulate_count_statistics(&PhotonStatistics::Fock { n: 100 }, &p, derive_seed(seed, Domain::Counts, 2))
        .map_err(lib)?;
    r.push(k, "mixture_sampling_fock", fock.normalized_variance, 0.585, 3.0 * fock.stderr);
    let poisson =
        simulate_count_statistics(&PhotonStatistics::Poisson { mean: 100.0 }, &p, derive_seed(seed, Domain::Counts, 3))
            .map_err(lib)?;
    r.push(k, "mixture_sampling_poisson", poisson.normalized_variance, 0.6, 3.0 * poisson.stderr);
    // Law of total variance on the realized ensemble.
    let pm: Moments = p.iter().copied().collect();
    let mean_pq = p.iter().map(|x| x * (1.0 - x)).sum::<f64>() / p.len() as f64;
    let fock_var = 100.0 * mean_pq + 1e4 * pm.variance();
    r.push(k, "total_variance_fock", fock.variance / fock_var, 1.0, 3.0 * fock.stderr / fock.normalized_variance);

    let single = CountStats::analytic(0.3, &PhotonStatistics::Fock { n: 1 }, 0.7).map_err(lib)?;
    r.push(k, "single_photon_scint_term", single.scint_term, 0.0, 0.0);
    let perfect = normalized_variance_fock(1.0, 50, 0.0).map_err(lib)?;
    r.push(k, "unit_efficiency_no_quantum_term", perfect.total(), 0.0, 0.0);
    let weak = normalized_variance_fock(1e-4, 1_000_000, 0.0).map_err(lib)?;
    r.push(k, "shot_noise_limit", weak.shot * 100.0, 1.0, 1e-3);
    let mut worst = 0.0f64;
    for &(alpha, n, s2) in &[(0.01, 10u64, 0.1), (0.1, 100, 0.5), (0.5, 1000, 2.0), (0.9, 3, 0.0)] {
        let f = normalized_variance_fock(alpha, n, s2).map_err(lib)?.total();
        let q = normalized_variance_poisson(alpha * n as f64, s2).map_err(lib)?.total();
        let gap = alpha / (alpha * n as f64) + s2 / n as f64;
        worst = worst.max(((q - f) / gap - 1.0).abs());
    }
    r.push(k, "poisson_minus_fock_gap", worst, 0.0, 1e-12);

    // A white-noise medium has no shared structure, hence no scintillation.
    let cfg = ExperimentConfig {
        turbulence: turb,
        source: source(f64::INFINITY),
        detector: DetectionConfig::on_axis(1.0, PI * 0.02f64.powi(2)),
        path_length: 5000.0,
        medium: MediumConfig::WhiteNoise { steps: 10 },
        realizations: 40,
        probes_per_realization: 4000,
        master_seed: seed,
        tilt_mode: TiltMode::PerPulse,
        wrap: true,
    };
    let est =
        estimate_scintillation_index(&Experiment::new(cfg).map_err(lib)?.run().map_err(lib)?, 1.0).map_err(lib)?;
    r.push(k, "null_scintillation_white_noise", est.sigma2, 0.0, 3.0 * est.stderr);

    Ok(r)
}
