//! The `beam`, `scint` and `count` experiments as row producers.

use serde::Serialize;

use photoscint::counting::alpha;
use photoscint::montecarlo::{
    estimate_scintillation_index, run_beam_spread_experiment, simulate_count_statistics, synthetic_probabilities,
    with_workers, Experiment, RealizationResult,
};
use photoscint::rng::{derive_seed, Domain};
use photoscint::source::PhotonStatistics;

use crate::config::Config;
use crate::CliError;

/// Command-line overrides shared by every experiment.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    /// Thread cap; `0` lets rayon decide.
    pub workers: usize,
    pub realizations: Option<usize>,
}

impl RunOptions {
    /// The configuration with overrides applied.
    pub fn apply(&self, cfg: &Config) -> Result<Config, CliError> {
        let mut out = cfg.clone();
        if let Some(seed) = self.seed {
            out.experiment.seed = seed;
        }
        if let Some(n) = self.realizations {
            out.experiment.realizations = n;
        }
        out.validate()?;
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeamRow {
    pub distance_m: f64,
    #[serde(rename = "R2_analytic_m2")]
    pub r2_analytic_m2: f64,
    pub var_x_mc_m2: f64,
    pub stderr: f64,
    pub ratio: f64,
    #[serde(rename = "R2_turbulence_m2")]
    pub r2_turbulence_m2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScintRow {
    pub cn2: f64,
    pub r1_over_r0_sq: f64,
    pub path_m: f64,
    pub sigma2: f64,
    pub stderr: f64,
    pub realizations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountRow {
    pub source_kind: String,
    pub alpha: f64,
    pub mean_n: f64,
    pub nvar_sampled: f64,
    pub nvar_analytic: f64,
    pub shot_term: f64,
    pub scint_term: f64,
    pub sigma2_used: f64,
    /// Closed-form `α` of the configured beam and detector.
    pub alpha_analytic: f64,
}

/// Rows plus everything the manifest should carry.
#[derive(Debug, Clone, Default)]
pub struct Report<R> {
    pub rows: Vec<R>,
    pub warnings: Vec<String>,
    /// Realizations flagged as degenerate, per grid point.
    pub degenerate: Vec<(String, usize, usize)>,
}

impl<R> Report<R> {
    fn new() -> Self {
        Self { rows: Vec::new(), warnings: Vec::new(), degenerate: Vec::new() }
    }

    /// Fails when any grid point has more degenerate realizations than allowed.
    pub fn check_degeneracy(&self, limit: f64) -> Result<(), CliError> {
        for (label, bad, total) in &self.degenerate {
            if *bad as f64 > limit * *total as f64 {
                return Err(CliError::Degenerate(format!(
                    "{label}: {bad} of {total} realizations recorded fewer than 10 hits (limit {:.0}%)",
                    100.0 * limit
                )));
            }
        }
        Ok(())
    }
}

fn lib(e: photoscint::Error) -> CliError {
    CliError::from(e)
}

fn run_ensemble(
    exp: &Experiment,
    report_warn: &mut Vec<String>,
    label: &str,
) -> Result<Vec<RealizationResult>, CliError> {
    if let (true, Some(extent)) = (exp.low_frequency_truncated(), exp.screen_extent()) {
        report_warn.push(format!(
            "{label}: screens represent scales up to {extent:.3e} m, short of the outer scale {} m",
            exp.config().turbulence.outer_scale
        ));
    }
    let results = exp.run().map_err(lib)?;
    let wraps: u64 = results.iter().map(|r| r.wrap_count).sum();
    if wraps > 0 {
        report_warn.push(format!("{label}: {wraps} screen wraps"));
    }
    Ok(results)
}

pub fn cmd_beam(cfg: &Config, opts: &RunOptions) -> Result<Report<BeamRow>, CliError> {
    let cfg = opts.apply(cfg)?;
    let exp = cfg.experiment(cfg.turbulence.cn2, cfg.coherence_ratios()?[0])?;
    let rows = with_workers(opts.workers, || run_beam_spread_experiment(&exp, &cfg.distances())).map_err(lib)?;
    let mut report = Report::new();
    report.rows = rows
        .map_err(lib)?
        .into_iter()
        .map(|r| BeamRow {
            distance_m: r.distance,
            r2_analytic_m2: r.r2_analytic,
            var_x_mc_m2: r.var_mc,
            stderr: r.stderr,
            ratio: r.ratio,
            r2_turbulence_m2: r.r2_turbulence,
        })
        .collect();
    Ok(report)
}

pub fn cmd_scint(cfg: &Config, opts: &RunOptions) -> Result<Report<ScintRow>, CliError> {
    let cfg = opts.apply(cfg)?;
    let eta = cfg.detector.eta_q;
    let mut report = Report::new();
    for cn2 in cfg.cn2_values() {
        for ratio in cfg.coherence_ratios()? {
            let exp = Experiment::new(cfg.experiment(cn2, ratio)?).map_err(lib)?;
            let label = format!("cn2={cn2:e} (r1/r0)^2={ratio}");
            let results =
                with_workers(opts.workers, || run_ensemble(&exp, &mut report.warnings, &label)).map_err(lib)??;
            let est = estimate_scintillation_index(&results, eta).map_err(lib)?;
            report.degenerate.push((label, est.degenerate, results.len()));
            report.rows.push(ScintRow {
                cn2,
                r1_over_r0_sq: ratio,
                path_m: cfg.path.length,
                sigma2: est.sigma2,
                stderr: est.stderr,
                realizations: est.realizations,
            });
        }
    }
    Ok(report)
}

pub fn cmd_count(cfg: &Config, opts: &RunOptions) -> Result<Report<CountRow>, CliError> {
    let cfg = opts.apply(cfg)?;
    let mut report = Report::new();
    let seed = cfg.experiment.seed;
    let exp_cfg = cfg.experiment(cfg.turbulence.cn2, cfg.coherence_ratios()?[0])?;
    let mut alpha_analytic =
        alpha(&exp_cfg.detector, exp_cfg.beam().radius_sq_at_distance(cfg.path.length)).map_err(lib)?;
    let probabilities = match (cfg.experiment.synthetic_alpha, cfg.experiment.synthetic_sigma2) {
        (Some(a), sigma2) => {
            alpha_analytic = a;
            synthetic_probabilities(a, sigma2.unwrap_or(0.0), cfg.experiment.realizations, seed).map_err(lib)?
        }
        (None, Some(_)) => return Err(CliError::Config("experiment.synthetic_sigma2 needs synthetic_alpha".into())),
        (None, None) => {
            let exp = Experiment::new(exp_cfg).map_err(lib)?;
            let results =
                with_workers(opts.workers, || run_ensemble(&exp, &mut report.warnings, "count")).map_err(lib)??;
            let flagged = results.iter().filter(|r| r.degenerate()).count();
            report.degenerate.push(("count".into(), flagged, results.len()));
            results.iter().map(|r| r.p_hat).collect()
        }
    };
    let n = cfg.source.photons;
    let sources = match cfg.photon_statistics()? {
        PhotonStatistics::Fock { n } => [PhotonStatistics::Fock { n }, PhotonStatistics::Poisson { mean: n as f64 }],
        PhotonStatistics::Poisson { .. } if n.fract() == 0.0 => {
            [PhotonStatistics::Fock { n: n as u64 }, PhotonStatistics::Poisson { mean: n }]
        }
        PhotonStatistics::Poisson { .. } => {
            return Err(CliError::Config("source.photons must be an integer to pair fock and poisson rows".into()))
        }
    };
    for source in sources {
        let counts_seed = derive_seed(seed, Domain::Counts, source.kind() as u64);
        let s = simulate_count_statistics(&source, &probabilities, counts_seed).map_err(lib)?;
        report.rows.push(CountRow {
            source_kind: source.kind().to_string(),
            alpha: s.analytic.alpha,
            mean_n: s.mean,
            nvar_sampled: s.normalized_variance,
            nvar_analytic: s.analytic.normalized_variance,
            shot_term: s.analytic.shot_term,
            scint_term: s.analytic.scint_term,
            sigma2_used: s.sigma2,
            alpha_analytic,
        });
    }
    Ok(report)
}

/// Serializes rows as CSV with a header row.
pub fn write_csv<R: Serialize, W: std::io::Write>(rows: &[R], out: W) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}
