//! Experiment runner: configures and executes the simulation campaigns,
//! aggregates their sojourn samples into uniformity reports, and writes
//! CSV/JSON/SVG outputs.
//!
//! Replications are data-parallel: each derives its own counter-based random
//! stream from `(seed, index)` and samples are stored by replication index,
//! so outputs are byte-identical for identical configurations regardless of
//! worker count or scheduling.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{
    gen_biased_field, gen_bridge_field, gen_kernel_field, gen_matrix_field,
};
use crate::group::{
    check_pushforward, check_pushforward_exact, standard_battery, Family, GroupSpec,
};
use crate::oracle::enumerate_orbit_law;
use crate::report::{
    OrbitReport, PushforwardValidationReport, Report, ReportMetadata, UniformityReport, Verdict,
};
use crate::sojourn::{sojourn_exact_discrete, sojourn_grid_circle, sojourn_mc};
use crate::space::{Point, Space};
use crate::stats::{chi_square_uniform, histogram, ks_uniform};
use crate::streams::{auxiliary_rng, replication_rng};
use crate::svg::histogram_svg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Kernel field on the sphere, anchored sojourn law estimated by
    /// Monte Carlo: the full-scale histogram experiment.
    Planet,
    /// Pinned Gaussian bridge on the circle grid, sojourn fraction below 0.
    Bridge,
    /// i.i.d. Gaussian matrix, exact sojourn at the first cell.
    Matrix,
    /// Pushforward identity validation for a transformation family.
    ValidateNu,
    /// Exhaustive orbit-law enumeration on a base matrix.
    Oracle,
    /// Planet with a deterministic bias bump: uniformity must be rejected.
    NegativeControl,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Planet => "planet",
            ExperimentKind::Bridge => "bridge",
            ExperimentKind::Matrix => "matrix",
            ExperimentKind::ValidateNu => "validate-nu",
            ExperimentKind::Oracle => "oracle",
            ExperimentKind::NegativeControl => "negative-control",
        }
    }
}

/// Explicit base matrix for the oracle experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<f64>,
}

/// Everything that determines an experiment's samples. Worker count and
/// output directory intentionally never reach the serialized form: two runs
/// of the same config must emit identical bytes whatever the parallelism.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub replications: usize,
    /// Ambient sphere dimension d.
    pub dim: usize,
    /// Kernel-field summit count.
    pub summits: usize,
    /// Kernel exponent beta.
    pub kernel_exponent: f64,
    /// Bias weight of the negative control.
    pub bump: f64,
    pub rows: usize,
    pub cols: usize,
    /// Monte Carlo evaluation points k.
    pub eval_points: usize,
    pub antithetic: bool,
    pub bins: usize,
    /// Bridge discretization grid size.
    pub bridge_grid: usize,
    /// Significance level for automated verdicts.
    pub alpha: f64,
    /// Transformation family validated by validate-nu.
    pub family: Family,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub base: Option<BaseMatrix>,
    /// Worker threads (0 = one per core); does not affect output bytes.
    #[serde(skip, default)]
    pub workers: usize,
    /// Output directory; `None` keeps everything in memory.
    #[serde(skip, default)]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Full-scale defaults for each experiment.
    pub fn new(experiment: ExperimentKind) -> ExperimentConfig {
        ExperimentConfig {
            experiment,
            seed: 1,
            replications: match experiment {
                ExperimentKind::Planet | ExperimentKind::Matrix => 100_000,
                ExperimentKind::ValidateNu => 100_000,
                ExperimentKind::Bridge | ExperimentKind::NegativeControl => 10_000,
                ExperimentKind::Oracle => 1,
            },
            dim: 3,
            summits: 20,
            kernel_exponent: 0.1,
            bump: match experiment {
                ExperimentKind::NegativeControl => 3.0,
                _ => 0.0,
            },
            rows: 4,
            cols: 5,
            eval_points: 100,
            antithetic: true,
            bins: 50,
            bridge_grid: 1000,
            alpha: 0.001,
            family: Family::SpecialOrthogonal,
            base: None,
            workers: 0,
            out_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications must be at least 1".into()));
        }
        if self.bins == 0 {
            return Err(Error::InvalidConfig("bins must be at least 1".into()));
        }
        if !(0.0 < self.alpha && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        match self.experiment {
            ExperimentKind::Planet | ExperimentKind::NegativeControl => {
                if self.dim < 2 {
                    return Err(Error::InvalidConfig("dim must be at least 2".into()));
                }
                if self.kernel_exponent <= 0.0 {
                    return Err(Error::InvalidConfig(
                        "kernel exponent must be positive".into(),
                    ));
                }
                if self.eval_points < 2 {
                    return Err(Error::InvalidConfig(
                        "eval-points must be at least 2".into(),
                    ));
                }
                if self.antithetic && self.eval_points % 2 != 0 {
                    return Err(Error::InvalidConfig(
                        "antithetic sampling needs an even eval-points".into(),
                    ));
                }
                if self.experiment == ExperimentKind::NegativeControl && self.bump == 0.0 {
                    return Err(Error::InvalidConfig(
                        "negative control needs a nonzero bump".into(),
                    ));
                }
            }
            ExperimentKind::Bridge => {
                if self.bridge_grid < 2 {
                    return Err(Error::InvalidConfig(
                        "bridge grid needs at least 2 points".into(),
                    ));
                }
            }
            ExperimentKind::Matrix | ExperimentKind::Oracle => {
                if self.rows == 0 || self.cols == 0 {
                    return Err(Error::InvalidConfig("rows and cols must be positive".into()));
                }
                if let Some(base) = &self.base {
                    if base.rows == 0 || base.cols == 0 {
                        return Err(Error::InvalidConfig("base matrix must be non-empty".into()));
                    }
                    if base.entries.len() != base.rows * base.cols {
                        return Err(Error::InvalidConfig(format!(
                            "base matrix needs {} entries, got {}",
                            base.rows * base.cols,
                            base.entries.len()
                        )));
                    }
                }
            }
            ExperimentKind::ValidateNu => match self.family {
                Family::SpecialOrthogonal => {
                    if self.dim < 2 {
                        return Err(Error::InvalidConfig("dim must be at least 2".into()));
                    }
                }
                Family::CyclicShifts => {
                    if self.rows == 0 || self.cols == 0 {
                        return Err(Error::InvalidConfig(
                            "rows and cols must be positive".into(),
                        ));
                    }
                }
                Family::CircleRotations => {}
            },
        }
        Ok(())
    }
}

/// Full document written to report.json: the resolved configuration echo
/// plus the report body.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportDocument {
    pub config: ExperimentConfig,
    pub report: Report,
}

/// Outcome of one run: the document, its serialized bytes, the ordered
/// samples (empty for enumeration-style experiments), and any files written.
#[derive(Debug)]
pub struct RunOutput {
    pub document: ReportDocument,
    pub report_json: String,
    pub samples: Vec<f64>,
    pub written: Vec<PathBuf>,
}

impl RunOutput {
    pub fn verdict(&self) -> Verdict {
        self.document.report.verdict()
    }
}

/// Map `f` over replication indices, preserving index order in the output.
#[cfg(feature = "parallel")]
pub fn map_replications<T, F>(count: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::WorkerPool(e.to_string()))?;
    pool.install(|| {
        (0..count as u64)
            .into_par_iter()
            .map(&f)
            .collect::<Result<Vec<T>>>()
    })
}

#[cfg(not(feature = "parallel"))]
pub fn map_replications<T, F>(count: usize, _workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    map_replications_serial(count, f)
}

/// Sequential reference path; always available for comparison and used as
/// the fallback when the `parallel` feature is disabled.
pub fn map_replications_serial<T, F>(count: usize, f: F) -> Result<Vec<T>>
where
    F: Fn(u64) -> Result<T>,
{
    (0..count as u64).map(f).collect()
}

/// One replication's sojourn sample plus its evaluated-value tie count.
type Draw = (f64, usize);

fn planet_replication(cfg: &ExperimentConfig, index: u64) -> Result<Draw> {
    let mut rng = replication_rng(cfg.seed, index);
    let anchor = Point::north_pole(cfg.dim)?;
    let field = if cfg.bump == 0.0 {
        gen_kernel_field(cfg.dim, cfg.summits, cfg.kernel_exponent, &mut rng)?
    } else {
        gen_biased_field(
            cfg.dim,
            cfg.summits,
            cfg.kernel_exponent,
            cfg.bump,
            &anchor,
            &mut rng,
        )?
    };
    let est = sojourn_mc(&field, &anchor, cfg.eval_points, cfg.antithetic, &mut rng)?;
    Ok((est.value, est.tie_count))
}

fn bridge_replication(cfg: &ExperimentConfig, index: u64) -> Result<Draw> {
    let mut rng = replication_rng(cfg.seed, index);
    let field = gen_bridge_field(cfg.bridge_grid, &mut rng)?;
    let est = sojourn_grid_circle(&field, 0.0)?;
    // The pinned start always ties with the zero level; only additional
    // ties would signal degeneracy.
    Ok((est.value, est.tie_count.saturating_sub(1)))
}

fn matrix_replication(cfg: &ExperimentConfig, index: u64) -> Result<Draw> {
    let mut rng = replication_rng(cfg.seed, index);
    let field = gen_matrix_field(cfg.rows, cfg.cols, &mut rng)?;
    let space = Space::grid(cfg.rows, cfg.cols)?;
    let anchor = Point::grid(&space, 1, 1)?;
    let est = sojourn_exact_discrete(&field, &anchor)?;
    Ok((est.value, 0))
}

/// Collect the ordered sample vector for a sampled experiment.
pub fn collect_samples(cfg: &ExperimentConfig) -> Result<Vec<Draw>> {
    let kind = cfg.experiment;
    map_replications(cfg.replications, cfg.workers, move |i| match kind {
        ExperimentKind::Planet | ExperimentKind::NegativeControl => planet_replication(cfg, i),
        ExperimentKind::Bridge => bridge_replication(cfg, i),
        ExperimentKind::Matrix => matrix_replication(cfg, i),
        _ => Err(Error::InvalidConfig(format!(
            "{} is not a sampled experiment",
            kind.name()
        ))),
    })
}

/// Sequential twin of [`collect_samples`], for benchmarks and determinism
/// checks.
pub fn collect_samples_serial(cfg: &ExperimentConfig) -> Result<Vec<Draw>> {
    let kind = cfg.experiment;
    map_replications_serial(cfg.replications, move |i| match kind {
        ExperimentKind::Planet | ExperimentKind::NegativeControl => planet_replication(cfg, i),
        ExperimentKind::Bridge => bridge_replication(cfg, i),
        ExperimentKind::Matrix => matrix_replication(cfg, i),
        _ => Err(Error::InvalidConfig(format!(
            "{} is not a sampled experiment",
            kind.name()
        ))),
    })
}

/// Histogram of the k+1 estimator atoms `{0, 1/k, ..., 1}` of a proportion
/// estimator with k evaluation points.
pub fn estimator_atom_counts(samples: &[f64], k: usize) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; k + 1];
    for &v in samples {
        let atom = (v * k as f64).round() as usize;
        if atom > k || ((v * k as f64) - atom as f64).abs() > 1e-9 {
            return Err(Error::SampleOutOfRange(v));
        }
        counts[atom] += 1;
    }
    Ok(counts)
}

/// Histogram of the N rank atoms `{1/N, ..., 1}` of an exact discrete
/// sojourn statistic.
pub fn rank_atom_counts(samples: &[f64], n_atoms: usize) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; n_atoms];
    for &v in samples {
        let scaled = v * n_atoms as f64;
        let rank = scaled.round() as usize;
        if rank == 0 || rank > n_atoms || (scaled - rank as f64).abs() > 1e-9 {
            return Err(Error::SampleOutOfRange(v));
        }
        counts[rank - 1] += 1;
    }
    Ok(counts)
}

fn uniformity_report(cfg: &ExperimentConfig, draws: &[Draw]) -> Result<UniformityReport> {
    let samples: Vec<f64> = draws.iter().map(|(v, _)| *v).collect();
    let ties: usize = draws.iter().map(|(_, t)| *t).sum();
    let hist = histogram(&samples, cfg.bins)?;
    let max_density_deviation = hist.max_density_deviation();

    let (ks_d, ks_p, chi2, verdict) = match cfg.experiment {
        ExperimentKind::Planet | ExperimentKind::NegativeControl => {
            // The estimator takes values on the k+1 atoms {j/k}; the exact
            // verifiable law is the atom law, so the verdict comes from the
            // atom-level chi-square. KS against U(0,1) is reported alongside
            // (its D carries an intrinsic 1/(k+1) discretization offset).
            let (d, p) = ks_uniform(&samples)?;
            let counts = estimator_atom_counts(&samples, cfg.eval_points)?;
            let (stat, df, chi2_p) = chi_square_uniform(&counts, None)?;
            let verdict = Verdict::from_bool(chi2_p >= cfg.alpha);
            (Some(d), Some(p), Some((stat, df, chi2_p)), verdict)
        }
        ExperimentKind::Bridge => {
            let (d, p) = ks_uniform(&samples)?;
            let verdict = Verdict::from_bool(p >= cfg.alpha);
            (Some(d), Some(p), None, verdict)
        }
        ExperimentKind::Matrix => {
            let counts = rank_atom_counts(&samples, cfg.rows * cfg.cols)?;
            let (stat, df, chi2_p) = chi_square_uniform(&counts, None)?;
            let verdict = Verdict::from_bool(chi2_p >= cfg.alpha);
            (None, None, Some((stat, df, chi2_p)), verdict)
        }
        _ => unreachable!("uniformity_report only serves sampled experiments"),
    };

    Ok(UniformityReport {
        sample_size: samples.len(),
        histogram: hist,
        max_density_deviation,
        ks_d,
        ks_p,
        chi2_stat: chi2.map(|c| c.0),
        chi2_df: chi2.map(|c| c.1),
        chi2_p: chi2.map(|c| c.2),
        verdict,
        metadata: ReportMetadata {
            experiment: cfg.experiment.name().into(),
            generator: match cfg.experiment {
                ExperimentKind::Planet | ExperimentKind::NegativeControl => {
                    if cfg.bump == 0.0 {
                        "kernel".into()
                    } else {
                        "kernel_biased".into()
                    }
                }
                ExperimentKind::Bridge => "bridge".into(),
                ExperimentKind::Matrix => "matrix".into(),
                _ => unreachable!(),
            },
            estimator_method: match cfg.experiment {
                ExperimentKind::Planet | ExperimentKind::NegativeControl => {
                    if cfg.antithetic {
                        "mc-antithetic".into()
                    } else {
                        "mc-plain".into()
                    }
                }
                ExperimentKind::Bridge => "grid".into(),
                ExperimentKind::Matrix => "exact".into(),
                _ => unreachable!(),
            },
            seed: cfg.seed,
            replications: cfg.replications,
            alpha: cfg.alpha,
            tie_count: ties,
        },
    })
}

fn oracle_report(cfg: &ExperimentConfig) -> Result<OrbitReport> {
    let (rows, cols, entries, generator) = match &cfg.base {
        Some(base) => (
            base.rows,
            base.cols,
            base.entries.clone(),
            "matrix_explicit".to_string(),
        ),
        None => {
            let mut rng = auxiliary_rng(cfg.seed, 1);
            let field = gen_matrix_field(cfg.rows, cfg.cols, &mut rng)?;
            (
                cfg.rows,
                cfg.cols,
                field.matrix_entries()?.to_vec(),
                "matrix".to_string(),
            )
        }
    };
    let law = enumerate_orbit_law(rows, cols, &entries, (1, 1))?;
    let counts: Vec<u64> = law
        .pmf
        .iter()
        .map(|p| (p * num_rational::Ratio::from_integer(law.atoms as u64)).to_integer())
        .collect();
    let (stat, df, p) = chi_square_uniform(&counts, None)?;
    let uniform = law.is_uniform();
    Ok(OrbitReport {
        rows,
        cols,
        anchor: (1, 1),
        base_entries: entries,
        pmf: law.fractions(),
        pmf_float: law.to_f64(),
        uniform,
        chi2_stat: stat,
        chi2_df: df,
        chi2_p: p,
        verdict: Verdict::from_bool(uniform),
        metadata: ReportMetadata {
            experiment: cfg.experiment.name().into(),
            generator,
            estimator_method: "exact".into(),
            seed: cfg.seed,
            replications: 1,
            alpha: cfg.alpha,
            tie_count: 0,
        },
    })
}

fn validate_nu_report(cfg: &ExperimentConfig) -> Result<PushforwardValidationReport> {
    let (group, anchor) = match cfg.family {
        Family::SpecialOrthogonal => (
            GroupSpec::special_orthogonal(cfg.dim)?,
            Point::north_pole(cfg.dim)?,
        ),
        Family::CircleRotations => (GroupSpec::circle_rotations(), Point::circle(0.0)),
        Family::CyclicShifts => {
            let group = GroupSpec::cyclic_shifts(cfg.rows, cfg.cols)?;
            let anchor = Point::grid(&group.space, 1, 1)?;
            (group, anchor)
        }
    };
    let battery = standard_battery(&group.space);
    let mut caps = Vec::new();
    if group.family == Family::CyclicShifts {
        caps.extend(check_pushforward_exact(&group, &anchor, &battery)?);
    }
    let mut rng = auxiliary_rng(cfg.seed, 2);
    caps.extend(check_pushforward(
        &group,
        &anchor,
        &battery,
        cfg.replications,
        &mut rng,
    )?);
    let verdict = Verdict::from_bool(caps.iter().all(|c| !c.flagged));
    Ok(PushforwardValidationReport {
        group: format!("{:?} on {}", group.family, group.space),
        anchor: format!("{anchor:?}"),
        caps,
        verdict,
        metadata: ReportMetadata {
            experiment: cfg.experiment.name().into(),
            generator: "pushforward".into(),
            estimator_method: "frequency".into(),
            seed: cfg.seed,
            replications: cfg.replications,
            alpha: cfg.alpha,
            tie_count: 0,
        },
    })
}

/// Execute an experiment end to end: validate, sample, test, serialize, and
/// (when an output directory is configured) write samples.csv, report.json
/// and histogram.svg.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let (report, samples) = match cfg.experiment {
        ExperimentKind::Planet
        | ExperimentKind::Bridge
        | ExperimentKind::Matrix
        | ExperimentKind::NegativeControl => {
            let draws = collect_samples(cfg)?;
            let report = uniformity_report(cfg, &draws)?;
            (
                Report::Uniformity(report),
                draws.into_iter().map(|(v, _)| v).collect(),
            )
        }
        ExperimentKind::Oracle => (Report::Orbit(oracle_report(cfg)?), Vec::new()),
        ExperimentKind::ValidateNu => {
            (Report::Pushforward(validate_nu_report(cfg)?), Vec::new())
        }
    };

    let document = ReportDocument {
        config: cfg.clone(),
        report,
    };
    let mut report_json = serde_json::to_string_pretty(&document)?;
    report_json.push('\n');

    let mut written = Vec::new();
    if let Some(dir) = &cfg.out_dir {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;

        let report_path = dir.join("report.json");
        fs::write(&report_path, &report_json).map_err(|e| io_err(&report_path, e))?;
        written.push(report_path);

        if !samples.is_empty() {
            let csv_path = dir.join("samples.csv");
            fs::write(&csv_path, samples_csv(&samples)).map_err(|e| io_err(&csv_path, e))?;
            written.push(csv_path);

            if let Report::Uniformity(u) = &document.report {
                let svg_path = dir.join("histogram.svg");
                let title = format!(
                    "{}: R={}, seed={}",
                    cfg.experiment.name(),
                    cfg.replications,
                    cfg.seed
                );
                fs::write(&svg_path, histogram_svg(&u.histogram, &title))
                    .map_err(|e| io_err(&svg_path, e))?;
                written.push(svg_path);
            }
        }
    }

    Ok(RunOutput {
        document,
        report_json,
        samples,
        written,
    })
}

/// One full-precision value per line under a `value` header. The shortest
/// round-trip decimal form is used: it parses back to the identical bits.
pub fn samples_csv(samples: &[f64]) -> String {
    let mut out = String::with_capacity(8 * samples.len() + 8);
    out.push_str("value\n");
    for v in samples {
        out.push_str(&format!("{v}\n"));
    }
    out
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}
