//! sojourn-lab: run the sojourn-law experiments from the command line.
//!
//! Exit codes: 0 verdict pass, 1 verdict fail, 2 usage or configuration
//! error, 3 i/o failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sojourn_core::error::Error;
use sojourn_core::experiment::{run, BaseMatrix, ExperimentConfig, ExperimentKind, RunOutput};
use sojourn_core::group::Family;
use sojourn_core::report::Report;

#[derive(Parser)]
#[command(
    name = "sojourn-lab",
    version,
    about = "Simulate group-invariant random fields and verify their uniform sojourn laws",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Kernel field on the sphere; Monte Carlo sojourn histogram at the
    /// North pole (the full-scale histogram experiment).
    Planet(RunArgs),
    /// Pinned Gaussian bridge on a circle grid; sojourn fraction below 0.
    Bridge(RunArgs),
    /// i.i.d. Gaussian matrix; exact sojourn rank at cell (1,1).
    Matrix(RunArgs),
    /// Validate the pushforward identity for a transformation family.
    ValidateNu(RunArgs),
    /// Enumerate the exact orbit law of a base matrix over all cyclic
    /// shifts.
    Oracle(RunArgs),
    /// Planet with a deterministic bias bump; uniformity must be rejected.
    NegativeControl(RunArgs),
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Command::Planet(_) => ExperimentKind::Planet,
            Command::Bridge(_) => ExperimentKind::Bridge,
            Command::Matrix(_) => ExperimentKind::Matrix,
            Command::ValidateNu(_) => ExperimentKind::ValidateNu,
            Command::Oracle(_) => ExperimentKind::Oracle,
            Command::NegativeControl(_) => ExperimentKind::NegativeControl,
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Planet(a)
            | Command::Bridge(a)
            | Command::Matrix(a)
            | Command::ValidateNu(a)
            | Command::Oracle(a)
            | Command::NegativeControl(a) => a,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Experiment seed; fully determines every output byte.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of replications R.
    #[arg(long)]
    replications: Option<usize>,
    /// Kernel-field summit count n.
    #[arg(long)]
    summits: Option<usize>,
    /// Sphere dimension d.
    #[arg(long)]
    dim: Option<usize>,
    /// Kernel exponent beta.
    #[arg(long = "kernel-exp")]
    kernel_exp: Option<f64>,
    /// Monte Carlo evaluation points k.
    #[arg(long = "eval-points")]
    eval_points: Option<usize>,
    /// Pair each evaluation point with its antipode.
    #[arg(long)]
    antithetic: Option<bool>,
    /// Histogram bin count.
    #[arg(long)]
    bins: Option<usize>,
    /// Grid rows m.
    #[arg(long)]
    rows: Option<usize>,
    /// Grid columns n.
    #[arg(long)]
    cols: Option<usize>,
    /// Bias weight of the negative control.
    #[arg(long)]
    bump: Option<f64>,
    /// Significance level for the automated verdict.
    #[arg(long)]
    alpha: Option<f64>,
    /// Bridge discretization grid size.
    #[arg(long)]
    grid: Option<usize>,
    /// Transformation family for validate-nu: so, circle, or shifts.
    #[arg(long)]
    family: Option<String>,
    /// Explicit base matrix for oracle, rows separated by ';'
    /// (e.g. "1,2;3,4").
    #[arg(long)]
    base: Option<String>,
    /// Output directory for samples.csv, report.json and histogram.svg.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core). Never changes output bytes.
    #[arg(long)]
    workers: Option<usize>,
}

fn build_config(kind: ExperimentKind, args: &RunArgs) -> Result<ExperimentConfig, String> {
    let mut cfg = ExperimentConfig::new(kind);
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.replications {
        cfg.replications = v;
    }
    if let Some(v) = args.summits {
        cfg.summits = v;
    }
    if let Some(v) = args.dim {
        cfg.dim = v;
    }
    if let Some(v) = args.kernel_exp {
        cfg.kernel_exponent = v;
    }
    if let Some(v) = args.eval_points {
        cfg.eval_points = v;
    }
    if let Some(v) = args.antithetic {
        cfg.antithetic = v;
    }
    if let Some(v) = args.bins {
        cfg.bins = v;
    }
    if let Some(v) = args.rows {
        cfg.rows = v;
    }
    if let Some(v) = args.cols {
        cfg.cols = v;
    }
    if let Some(v) = args.bump {
        cfg.bump = v;
    }
    if let Some(v) = args.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = args.grid {
        cfg.bridge_grid = v;
    }
    if let Some(v) = args.workers {
        cfg.workers = v;
    }
    if let Some(f) = &args.family {
        cfg.family = match f.as_str() {
            "so" | "special-orthogonal" => Family::SpecialOrthogonal,
            "circle" | "circle-rotations" => Family::CircleRotations,
            "shifts" | "cyclic-shifts" => Family::CyclicShifts,
            other => return Err(format!("unknown family '{other}' (so | circle | shifts)")),
        };
    }
    if let Some(spec) = &args.base {
        let base = parse_base_matrix(spec)?;
        cfg.rows = base.rows;
        cfg.cols = base.cols;
        cfg.base = Some(base);
    }
    cfg.out_dir = args.out.clone();
    Ok(cfg)
}

fn parse_base_matrix(spec: &str) -> Result<BaseMatrix, String> {
    let mut rows_vec: Vec<Vec<f64>> = Vec::new();
    for (i, row) in spec.split(';').enumerate() {
        let mut parsed = Vec::new();
        for cell in row.split(',') {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| format!("row {}: cannot parse '{}' as a number", i + 1, cell))?;
            parsed.push(v);
        }
        rows_vec.push(parsed);
    }
    let rows = rows_vec.len();
    let cols = rows_vec[0].len();
    if rows_vec.iter().any(|r| r.len() != cols) {
        return Err("base matrix rows have unequal lengths".into());
    }
    Ok(BaseMatrix {
        rows,
        cols,
        entries: rows_vec.into_iter().flatten().collect(),
    })
}

fn print_summary(out: &RunOutput) {
    let cfg = &out.document.config;
    println!("experiment : {}", cfg.experiment.name());
    println!("seed       : {}", cfg.seed);
    match &out.document.report {
        Report::Uniformity(r) => {
            println!("samples    : {}", r.sample_size);
            println!(
                "histogram  : {} bins, max |density - 1| = {:.4}",
                r.histogram.bins, r.max_density_deviation
            );
            if let (Some(d), Some(p)) = (r.ks_d, r.ks_p) {
                println!("ks         : D = {d:.6}, p = {p:.3e}");
            }
            if let (Some(stat), Some(df), Some(p)) = (r.chi2_stat, r.chi2_df, r.chi2_p) {
                println!("chi-square : stat = {stat:.3}, df = {df}, p = {p:.3e}");
            }
            if r.metadata.tie_count > 0 {
                println!("ties       : {}", r.metadata.tie_count);
            }
        }
        Report::Orbit(r) => {
            println!("base       : {}x{} at anchor {:?}", r.rows, r.cols, r.anchor);
            println!("atoms      : {}", r.pmf.len());
            println!("uniform    : {}", r.uniform);
            println!("chi-square : stat = {:.3}, p = {:.3}", r.chi2_stat, r.chi2_p);
            if r.pmf.len() <= 12 {
                println!("pmf        : {}", r.pmf.join(", "));
            }
        }
        Report::Pushforward(r) => {
            println!("group      : {}", r.group);
            for cap in &r.caps {
                println!(
                    "  {:<24} exact = {:.6}  empirical = {:.6}  sigma = {:.2}{}{}",
                    cap.set,
                    cap.exact_measure,
                    cap.empirical,
                    cap.deviation_sigmas,
                    if cap.exhaustive { "  [exhaustive]" } else { "" },
                    if cap.flagged { "  FLAGGED" } else { "" },
                );
            }
        }
    }
    println!(
        "verdict    : {}",
        if out.verdict().passed() { "pass" } else { "fail" }
    );
    for path in &out.written {
        println!("wrote      : {}", path.display());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let kind = cli.command.kind();
    let cfg = match build_config(kind, cli.command.args()) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(out) => {
            print_summary(&out);
            if out.verdict().passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Error::Io { path, source }) => {
            eprintln!("error: i/o failure at {path}: {source}");
            ExitCode::from(3)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
