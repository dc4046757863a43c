//! The `ras` command line tool.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ras_core::benchmarks::{self, Objective};
use ras_core::experiments::{self, HARTMANN6_BASIN_THRESHOLD, TABLE_DIMS, TABLE_RATIOS};
use ras_core::optimizer::run;
use ras_core::{RasConfig, Status, Variant};

use crate::config::{parse_list, ConfigFile};
use crate::error::{Error, Result};
use crate::io::{self, TraceFormat};
use crate::parallel;

#[derive(Debug, Parser)]
#[command(
    name = "ras",
    version,
    about = "Reactive Affine Shaker black-box optimizer"
)]
pub struct Cli {
    /// Diagnostic output on stderr.
    #[arg(long, value_enum, global = true, default_value_t = LogLevel::Warn)]
    pub log_level: LogLevel,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LogLevel {
    Error,
    Warn,
    Info,
    Debug,
    Trace,
}

impl From<LogLevel> for log::LevelFilter {
    fn from(l: LogLevel) -> Self {
        match l {
            LogLevel::Error => log::LevelFilter::Error,
            LogLevel::Warn => log::LevelFilter::Warn,
            LogLevel::Info => log::LevelFilter::Info,
            LogLevel::Debug => log::LevelFilter::Debug,
            LogLevel::Trace => log::LevelFilter::Trace,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One optimization run: trace file plus result.json.
    Run(RunArgs),
    /// Independent runs with consecutive seeds: per-run traces plus summary.csv.
    Campaign(CampaignArgs),
    /// Parameter grid over eta, rho-con and variant: grid.csv.
    Ablation(AblationArgs),
    /// Monte-Carlo geometry tables: angles.csv and success.csv.
    Appendix(AppendixArgs),
}

/// Flags shared by the optimization commands.
#[derive(Debug, Args)]
pub struct OptimizerFlags {
    /// Benchmark name (rosenbrock, paraboloid, branin2, hartmann6, rosenbrock2,
    /// paraboloid100, branin2-500, hartmann6-500r).
    #[arg(long)]
    pub function: Option<String>,
    /// Dimension of parametric functions, or ambient dimension of embedded ones.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Objective evaluations per run.
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Initial box edge as a fraction of the domain [default: 0.2].
    #[arg(long)]
    pub eta: Option<f64>,
    /// [default: 5]
    #[arg(long)]
    pub rho_dil: Option<f64>,
    /// [default: 0.2]
    #[arg(long)]
    pub rho_con: Option<f64>,
    /// full | isotropic | single-shot | isotropic-single-shot [default: full]
    #[arg(long)]
    pub variant: Option<String>,
    /// Stop after this many consecutive non-improving iterations.
    #[arg(long)]
    pub stagnation: Option<usize>,
    /// Stop when the longest box vector is below this fraction of the domain diagonal.
    #[arg(long)]
    pub min_box_ratio: Option<f64>,
    /// Trace format: csv | jsonl [default: csv]
    #[arg(long)]
    pub format: Option<String>,
    /// Output directory [default: ./out]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// key=value file with defaults for any flag.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub flags: OptimizerFlags,
}

#[derive(Debug, Args)]
pub struct CampaignArgs {
    #[command(flatten)]
    pub flags: OptimizerFlags,
    /// Number of runs; run i uses seed + i [default: 30].
    #[arg(long)]
    pub runs: Option<usize>,
    /// Worker threads [default: 1].
    #[arg(long)]
    pub parallel: Option<usize>,
    /// Also average only the runs ending at or below this value (defaults to
    /// the global-basin threshold for Hartmann6 problems).
    #[arg(long)]
    pub basin_threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AblationArgs {
    #[command(flatten)]
    pub flags: OptimizerFlags,
    /// Seeds per cell [default: 30].
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub parallel: Option<usize>,
    /// Comma-separated [default: 0.05,0.1,0.2,0.4].
    #[arg(long)]
    pub etas: Option<String>,
    /// Comma-separated; rho-dil is the reciprocal [default: 0.1,0.2,0.5].
    #[arg(long)]
    pub rho_cons: Option<String>,
    /// Comma-separated [default: all four].
    #[arg(long)]
    pub variants: Option<String>,
}

#[derive(Debug, Args)]
pub struct AppendixArgs {
    /// Average angle between random directions (angles.csv).
    #[arg(long)]
    pub angles: bool,
    /// Double-shot success probability (success.csv).
    #[arg(long)]
    pub success: bool,
    /// Comma-separated dimensions [default: 1,2,3,5,10,50,100,500,1000].
    #[arg(long)]
    pub dims: Option<String>,
    /// Comma-separated radius ratios [default: 1,0.5,0.1,0.05,0.01,0.005,0.001].
    #[arg(long)]
    pub ratios: Option<String>,
    /// Samples per dimension for the angle table [default: 10000].
    #[arg(long)]
    pub samples: Option<usize>,
    /// Samples per cell for the success table [default: 100000].
    #[arg(long)]
    pub success_samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub parallel: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

const OPTIMIZER_KEYS: &[&str] = &[
    "function",
    "dim",
    "budget",
    "seed",
    "eta",
    "rho-dil",
    "rho-con",
    "variant",
    "stagnation",
    "min-box-ratio",
    "format",
    "out",
    "runs",
    "parallel",
    "basin-threshold",
    "etas",
    "rho-cons",
    "variants",
];

const APPENDIX_KEYS: &[&str] = &[
    "angles",
    "success",
    "dims",
    "ratios",
    "samples",
    "success-samples",
    "seed",
    "parallel",
    "out",
];

fn load_config(path: Option<&Path>, keys: &[&str]) -> Result<ConfigFile> {
    match path {
        Some(p) => ConfigFile::load(p, keys),
        None => Ok(ConfigFile::default()),
    }
}

/// Fully resolved optimizer settings.
#[derive(Debug, Clone)]
struct Resolved {
    function: String,
    dim: Option<usize>,
    format: TraceFormat,
    out: PathBuf,
    config: RasConfig,
}

impl Resolved {
    fn from_flags(flags: OptimizerFlags, file: &ConfigFile) -> Result<Self> {
        let function = file.resolve(flags.function, "function")?.ok_or_else(|| {
            Error::Usage(format!(
                "--function is required; available: {}",
                benchmarks::FUNCTIONS.join(", ")
            ))
        })?;
        let variant: Variant = file
            .resolve(flags.variant, "variant")?
            .map(|v: String| v.parse())
            .transpose()?
            .unwrap_or_default();
        let defaults = RasConfig::default();
        let config = RasConfig {
            eta: file.resolve(flags.eta, "eta")?.unwrap_or(defaults.eta),
            rho_dil: file
                .resolve(flags.rho_dil, "rho-dil")?
                .unwrap_or(defaults.rho_dil),
            rho_con: file
                .resolve(flags.rho_con, "rho-con")?
                .unwrap_or(defaults.rho_con),
            variant,
            max_evaluations: file
                .resolve(flags.budget, "budget")?
                .unwrap_or(defaults.max_evaluations),
            stagnation_limit: file.resolve(flags.stagnation, "stagnation")?,
            min_box_ratio_stop: file.resolve(flags.min_box_ratio, "min-box-ratio")?,
            seed: file.resolve(flags.seed, "seed")?.unwrap_or(0),
        };
        config.validate()?;
        Ok(Self {
            function,
            dim: file.resolve(flags.dim, "dim")?,
            format: file
                .resolve(flags.format, "format")?
                .map(|f: String| f.parse())
                .transpose()?
                .unwrap_or_default(),
            out: file
                .resolve(flags.out, "out")?
                .unwrap_or_else(|| PathBuf::from("out")),
            config,
        })
    }

    fn objective(&self) -> Result<Box<dyn Objective>> {
        benchmarks::build(&self.function, self.dim).map_err(|e| match e {
            ras_core::Error::UnknownFunction(name) => Error::Usage(format!(
                "unknown function `{name}`; available: {}",
                benchmarks::FUNCTIONS.join(", ")
            )),
            other => other.into(),
        })
    }

    /// Canonical replay command (output location and worker count excluded).
    fn invocation(&self, command: &str, extra: &str) -> String {
        let c = &self.config;
        let mut s = format!("ras {command} --function {}", self.function);
        if let Some(d) = self.dim {
            let _ = write!(s, " --dim {d}");
        }
        let _ = write!(
            s,
            " --budget {} --seed {} --eta {} --rho-dil {} --rho-con {} --variant {}",
            c.max_evaluations, c.seed, c.eta, c.rho_dil, c.rho_con, c.variant
        );
        if let Some(n) = c.stagnation_limit {
            let _ = write!(s, " --stagnation {n}");
        }
        if let Some(r) = c.min_box_ratio_stop {
            let _ = write!(s, " --min-box-ratio {r}");
        }
        let _ = write!(s, " --format {}{extra}", self.format.extension());
        s
    }
}

/// Writes `path` with a leading `# <invocation>` comment line.
fn write_output(
    path: &Path,
    invocation: &str,
    body: impl FnOnce(&mut BufWriter<File>) -> Result<()>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "# {invocation}").map_err(|e| Error::io(path, e))?;
    body(&mut w)?;
    w.flush().map_err(|e| Error::io(path, e))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

#[derive(Serialize)]
struct RunReport<'a> {
    invocation: &'a str,
    function: &'a str,
    dim: usize,
    seed: u64,
    status: Status,
    best_f: f64,
    best_x: &'a [f64],
    evaluations_used: usize,
    iterations: usize,
    config: &'a RasConfig,
}

pub fn cmd_run(args: RunArgs) -> Result<()> {
    let file = load_config(args.flags.config.as_deref(), OPTIMIZER_KEYS)?;
    let settings = Resolved::from_flags(args.flags, &file)?;
    let objective = settings.objective()?;
    let result = run(&objective, &settings.config, None)?;
    let invocation = settings.invocation("run", "");

    create_dir(&settings.out)?;
    let trace_path = settings
        .out
        .join(format!("trace.{}", settings.format.extension()));
    write_output(&trace_path, &invocation, |w| {
        io::write_trace(&result.trace, settings.format, w)
    })?;

    let report = RunReport {
        invocation: &invocation,
        function: objective.name(),
        dim: objective.dim(),
        seed: result.seed,
        status: result.status,
        best_f: result.best_f,
        best_x: &result.best_x,
        evaluations_used: result.evaluations_used,
        iterations: result.iterations,
        config: &result.config,
    };
    let json_path = settings.out.join("result.json");
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    fs::write(&json_path, json).map_err(|e| Error::io(&json_path, e))?;

    println!(
        "{} (d={}) seed {}: best_f = {:e} after {} evaluations, {} iterations ({})",
        objective.name(),
        objective.dim(),
        result.seed,
        result.best_f,
        result.evaluations_used,
        result.iterations,
        result.status
    );
    Ok(())
}

pub fn cmd_campaign(args: CampaignArgs) -> Result<()> {
    let file = load_config(args.flags.config.as_deref(), OPTIMIZER_KEYS)?;
    let runs: usize = file.resolve(args.runs, "runs")?.unwrap_or(30);
    let workers: usize = file.resolve(args.parallel, "parallel")?.unwrap_or(1);
    let threshold: Option<f64> = file.resolve(args.basin_threshold, "basin-threshold")?;
    let settings = Resolved::from_flags(args.flags, &file)?;
    let objective = settings.objective()?;
    let threshold = threshold.or_else(|| {
        settings
            .function
            .starts_with("hartmann6")
            .then_some(HARTMANN6_BASIN_THRESHOLD)
    });

    let c = &settings.config;
    let campaign = parallel::run_campaign(&objective, c, runs, c.max_evaluations, c.seed, workers)?;
    let mut extra = format!(" --runs {runs}");
    if let Some(t) = threshold {
        let _ = write!(extra, " --basin-threshold {t}");
    }
    let invocation = settings.invocation("campaign", &extra);

    create_dir(&settings.out)?;
    let width = (runs - 1).to_string().len().max(3);
    for (i, r) in campaign.results.iter().enumerate() {
        let path = settings
            .out
            .join(format!("trace_{i:0width$}.{}", settings.format.extension()));
        let header = format!("{invocation} (run {i}, seed {})", r.seed);
        write_output(&path, &header, |w| {
            io::write_trace(&r.trace, settings.format, w)
        })?;
    }
    let summary = match threshold {
        Some(t) => campaign.filtered_summary(t)?,
        None => campaign.summary.clone(),
    };
    write_output(&settings.out.join("summary.csv"), &invocation, |w| {
        io::write_summary_csv(&summary, w)
    })?;
    write_output(&settings.out.join("runs.csv"), &invocation, |w| {
        writeln!(w, "run,seed,status,best_f,evaluations,iterations")?;
        for (i, r) in campaign.results.iter().enumerate() {
            writeln!(
                w,
                "{i},{},{},{},{},{}",
                r.seed,
                r.status,
                io::fmt_float(r.best_f),
                r.evaluations_used,
                r.iterations
            )?;
        }
        Ok(())
    })?;

    let last = summary.points.last().expect("non-empty grid");
    print!(
        "{} x{runs}: final median {:e}, mean {:e}",
        objective.name(),
        last.stats.median,
        last.stats.mean
    );
    if let (Some(m), Some(k)) = (last.filtered_mean, summary.filtered_runs) {
        print!(", basin-filtered mean {m:e} over {k} runs");
    }
    println!();
    Ok(())
}

pub fn cmd_ablation(args: AblationArgs) -> Result<()> {
    let file = load_config(args.flags.config.as_deref(), OPTIMIZER_KEYS)?;
    let runs: usize = file.resolve(args.runs, "runs")?.unwrap_or(30);
    let workers: usize = file.resolve(args.parallel, "parallel")?.unwrap_or(1);
    let etas: Vec<f64> = match file.resolve(args.etas, "etas")? {
        Some(raw) => parse_list(&raw, "eta")?,
        None => experiments::DEFAULT_ETAS.to_vec(),
    };
    let rho_cons: Vec<f64> = match file.resolve(args.rho_cons, "rho-cons")? {
        Some(raw) => parse_list(&raw, "rho-con")?,
        None => experiments::DEFAULT_RHO_CONS.to_vec(),
    };
    let variants: Vec<Variant> = match file.resolve::<String>(args.variants, "variants")? {
        Some(raw) => parse_list(&raw, "variant")?,
        None => Variant::ALL.to_vec(),
    };
    if runs == 0 {
        return Err(Error::Usage("--runs must be at least 1".into()));
    }
    let settings = Resolved::from_flags(args.flags, &file)?;
    let objective = settings.objective()?;
    let base = settings.config.seed;
    let seeds: Vec<u64> = (0..runs)
        .map(|i| experiments::campaign_seed(base, i))
        .collect();
    let cells = parallel::run_ablation_grid(
        &objective,
        &etas,
        &rho_cons,
        &variants,
        &seeds,
        settings.config.max_evaluations,
        workers,
    )?;

    let join = |v: Vec<String>| v.join(",");
    let extra = format!(
        " --runs {runs} --etas {} --rho-cons {} --variants {}",
        join(etas.iter().map(f64::to_string).collect()),
        join(rho_cons.iter().map(f64::to_string).collect()),
        join(variants.iter().map(Variant::to_string).collect())
    );
    let invocation = format!(
        "ras ablation --function {}{} --budget {} --seed {}{extra}",
        settings.function,
        settings
            .dim
            .map(|d| format!(" --dim {d}"))
            .unwrap_or_default(),
        settings.config.max_evaluations,
        base
    );
    create_dir(&settings.out)?;
    write_output(&settings.out.join("grid.csv"), &invocation, |w| {
        io::write_grid_csv(&cells, w)
    })?;

    let failed: usize = cells.iter().map(|c| c.failures.len()).sum();
    for c in &cells {
        println!(
            "eta={:<5} rho_con={:<5} {:<22} median {:e}  iqr [{:e}, {:e}]",
            c.eta, c.rho_con, c.variant, c.summary.median, c.summary.q1, c.summary.q3
        );
    }
    if failed > 0 {
        return Err(Error::Usage(format!(
            "{failed} runs failed; see grid.csv failure counts"
        )));
    }
    Ok(())
}

pub fn cmd_appendix(args: AppendixArgs) -> Result<()> {
    let file = load_config(args.config.as_deref(), APPENDIX_KEYS)?;
    let flag = |set: bool, key: &str| -> Result<bool> {
        Ok(set || file.resolve::<bool>(None, key)?.unwrap_or(false))
    };
    let (mut angles, mut success) = (flag(args.angles, "angles")?, flag(args.success, "success")?);
    if !angles && !success {
        angles = true;
        success = true;
    }
    let dims: Vec<usize> = match file.resolve(args.dims, "dims")? {
        Some(raw) => parse_list(&raw, "dimension")?,
        None => TABLE_DIMS.to_vec(),
    };
    let ratios: Vec<f64> = match file.resolve(args.ratios, "ratios")? {
        Some(raw) => parse_list(&raw, "ratio")?,
        None => TABLE_RATIOS.to_vec(),
    };
    let samples = file
        .resolve(args.samples, "samples")?
        .unwrap_or(experiments::ANGLE_SAMPLES);
    let success_samples = file
        .resolve(args.success_samples, "success-samples")?
        .unwrap_or(experiments::SUCCESS_SAMPLES);
    let seed: u64 = file.resolve(args.seed, "seed")?.unwrap_or(0);
    let workers: usize = file.resolve(args.parallel, "parallel")?.unwrap_or(1);
    let out: PathBuf = file
        .resolve(args.out, "out")?
        .unwrap_or_else(|| PathBuf::from("out"));
    if dims.is_empty() {
        return Err(Error::Usage(
            "--dims must list at least one dimension".into(),
        ));
    }

    let list = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
    create_dir(&out)?;
    if angles {
        let rows = parallel::angle_table(&dims, samples, seed, workers)?;
        let inv = format!(
            "ras appendix --angles --dims {} --samples {samples} --seed {seed}",
            list(&dims)
        );
        write_output(&out.join("angles.csv"), &inv, |w| {
            io::write_angles_csv(&rows, w)
        })?;
        println!("{:>6}  {:>9}  {:>8}", "d", "avg angle", "std err");
        for r in &rows {
            println!(
                "{:>6}  {:>9.2}  {:>8.3}",
                r.dim, r.avg_angle_deg, r.std_error_deg
            );
        }
    }
    if success {
        if ratios.is_empty() {
            return Err(Error::Usage("--ratios must list at least one ratio".into()));
        }
        let rows = parallel::success_table(&dims, &ratios, success_samples, seed, workers)?;
        let inv = format!(
            "ras appendix --success --dims {} --ratios {} --success-samples {success_samples} --seed {seed}",
            list(&dims),
            ratios.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
        );
        write_output(&out.join("success.csv"), &inv, |w| {
            io::write_success_table(&rows, w)
        })?;
        let mut text = Vec::new();
        io::write_success_table(&rows, &mut text)?;
        print!("{}", String::from_utf8_lossy(&text));
    }
    Ok(())
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Campaign(a) => cmd_campaign(a),
        Command::Ablation(a) => cmd_ablation(a),
        Command::Appendix(a) => cmd_appendix(a),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code: 0 on success, 2 for invalid input, 1 otherwise.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let _ = env_logger::Builder::new()
        .filter_level(cli.log_level.into())
        .try_init();
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                2
            } else {
                1
            }
        }
    }
}
