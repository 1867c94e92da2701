use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use epmodes::io::{
    emit_svg, format_f64, parse_config_with_overrides, read_mode_file, read_sweep_csv, render_sweep_csv, write_mode_file,
    write_sweep_csv, CsvOptions, IoError, ModeFile, PlotSpec, RunConfig,
};
use epmodes::models::Provenance;
use epmodes::selftest::run_selftest;
use epmodes::sweep::{
    default_lock_fields, detect_peaks, diagnose, locking_report, run_sweep, solve_point, AnalysisConfig, Field,
    SweepRecord,
};

const EXIT_CONFIG: u8 = 2;
const EXIT_ALL_FAILED: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "epmodes", version, about = "Phase statistics and entropy diagnostics of non-Hermitian eigenmodes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Configuration file
    #[arg(short, long)]
    config: PathBuf,
    /// Output directory, overriding `[output] dir`
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Override a configuration entry, as `section.key=value`
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep and write the diagnostics table
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Leave out the timestamp comment so reruns give identical files
        #[arg(long)]
        no_timestamp: bool,
    },
    /// Solve one parameter value and write a mode file per mode
    Solve {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Value of the swept parameter (delta or epsilon)
        #[arg(long, allow_hyphen_values = true)]
        param: f64,
    },
    /// Compute diagnostics of stored mode files
    Analyze {
        /// Mode files; consecutive files at the same parameter form one row group
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Configuration whose `[analysis]` section is used
        #[arg(short, long)]
        config: Option<PathBuf>,
        /// Write the table here instead of standard output
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Draw a sweep table as SVG
    Plot {
        /// Sweep table written by `sweep`
        csv: PathBuf,
        /// Output SVG file
        #[arg(short, long)]
        out: PathBuf,
        /// Fields on the left axis, comma separated
        #[arg(long, value_delimiter = ',', default_value = "petermann")]
        left: Vec<String>,
        /// Fields on the right axis, comma separated
        #[arg(long, value_delimiter = ',', default_value = "s_folded")]
        right: Vec<String>,
        /// Draw only these modes
        #[arg(long, value_delimiter = ',')]
        modes: Option<Vec<usize>>,
        /// Parameter value of a vertical reference line
        #[arg(long, allow_hyphen_values = true, conflicts_with = "marker_peak")]
        marker: Option<f64>,
        /// Place the reference line at the peak of this field (mode 0)
        #[arg(long)]
        marker_peak: Option<String>,
    },
    /// Run the built-in reference checks
    Selftest,
}

enum Failure {
    Config(String),
    AllFailed(String),
    Io(String),
    Check,
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        if e.is_config_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Io(e.to_string())
        }
    }
}

fn load_config(args: &ConfigArgs) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| Failure::Io(format!("{}: {e}", args.config.display())))?;
    let mut cfg = parse_config_with_overrides(&text, &args.overrides)
        .map_err(|e| Failure::Config(format!("{}: {e}", args.config.display())))?;
    if let Some(o) = &args.out {
        cfg.output.dir = o.clone();
    }
    Ok(cfg)
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))
}

fn parse_fields(names: &[String]) -> Result<Vec<Field>, Failure> {
    names
        .iter()
        .filter(|n| !n.is_empty())
        .map(|n| Field::parse(n).ok_or_else(|| Failure::Config(format!("unknown field {n}"))))
        .collect()
}

// Write errors (a closed pipe, say) end the listing quietly instead of panicking.
fn print_peaks(records: &[SweepRecord], cfg: &RunConfig) -> std::io::Result<()> {
    let mut out = std::io::stdout().lock();
    let fields = default_lock_fields(&cfg.sweep.analysis.entropy.alphas);
    for mode in 0..cfg.sweep.modes {
        for f in &fields {
            match detect_peaks(records, *f, mode) {
                Ok(p) => writeln!(
                    out,
                    "peak {} mode {mode}: {} (refined {}, height {})",
                    p.field,
                    format_f64(p.argmax),
                    format_f64(p.refined),
                    format_f64(p.height)
                )?,
                Err(e) => writeln!(out, "peak {f} mode {mode}: {e}")?,
            }
        }
        if let Ok(rep) = locking_report(records, &fields, mode) {
            writeln!(
                out,
                "mode {mode}: largest peak separation {} grid steps ({})",
                rep.max_separation_steps,
                if rep.locked() { "locked" } else { "not locked" }
            )?;
        }
    }
    Ok(())
}

fn cmd_sweep(args: &ConfigArgs, no_timestamp: bool) -> Result<(), Failure> {
    let cfg = load_config(args)?;
    let records = run_sweep(&cfg.sweep).map_err(|e| Failure::Config(e.to_string()))?;
    create_dir(&cfg.output.dir)?;
    let param_name = cfg.sweep.model.parameter_name();
    let opts = CsvOptions { param_name: param_name.into(), timestamp: cfg.output.timestamp && !no_timestamp };
    let csv_path = cfg.output.dir.join(&cfg.output.csv);
    write_sweep_csv(&records, &csv_path, &opts)?;
    println!("wrote {}", csv_path.display());
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    if failed == records.len() {
        let first = records[0].error.clone().unwrap_or_default();
        return Err(Failure::AllFailed(format!("solver failed at every point, first error: {first}")));
    }
    if failed > 0 {
        eprintln!("warning: {failed} of {} points failed", records.len());
    }
    if let Some(svg) = &cfg.output.svg {
        let mut spec = PlotSpec::new(cfg.output.plot_left.clone(), cfg.output.plot_right.clone(), param_name);
        spec.marker = detect_peaks(&records, Field::Petermann, 0).ok().map(|p| p.refined);
        let path = cfg.output.dir.join(svg);
        emit_svg(&records, &spec, &path)?;
        println!("wrote {}", path.display());
    }
    let _ = print_peaks(&records, &cfg);
    Ok(())
}

fn cmd_solve(args: &ConfigArgs, param: f64) -> Result<(), Failure> {
    let cfg = load_config(args)?;
    let modes = solve_point(&cfg.sweep, param).map_err(Failure::AllFailed)?;
    create_dir(&cfg.output.dir)?;
    for (i, mode) in modes.into_iter().enumerate() {
        let path = cfg.output.dir.join(format!("mode_{i}.epmode"));
        println!("mode {i}: eigenvalue {} {:+}i -> {}", mode.eigen_k.re, mode.eigen_k.im, path.display());
        write_mode_file(&ModeFile { parameter: param, mode }, &path)?;
    }
    Ok(())
}

fn cmd_analyze(files: &[PathBuf], config: Option<&Path>, out: Option<&Path>) -> Result<(), Failure> {
    let analysis = match config {
        None => AnalysisConfig::default(),
        Some(p) => {
            let args = ConfigArgs { config: p.to_path_buf(), out: None, overrides: Vec::new() };
            load_config(&args)?.sweep.analysis
        }
    };
    let mut records = Vec::new();
    let mut param_name = "delta";
    for f in files {
        let m = read_mode_file(f)?;
        if m.mode.provenance != Provenance::TwoLevel {
            param_name = "epsilon";
        }
        let same = records.last().is_some_and(|r: &SweepRecord| r.param.to_bits() == m.parameter.to_bits() && r.error.is_none());
        match diagnose(&m.mode, &analysis) {
            Ok(d) if same => records.last_mut().expect("checked above").modes.push(d),
            Ok(d) => records.push(SweepRecord { param: m.parameter, modes: vec![d], tracking_ambiguous: false, error: None }),
            Err(e) => records.push(SweepRecord {
                param: m.parameter,
                modes: Vec::new(),
                tracking_ambiguous: false,
                error: Some(format!("{}: {e}", f.display())),
            }),
        }
    }
    let opts = CsvOptions::new(param_name);
    match out {
        Some(p) => write_sweep_csv(&records, p, &opts)?,
        None => print!("{}", render_sweep_csv(&records, &opts)?),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_plot(
    csv: &Path,
    out: &Path,
    left: &[String],
    right: &[String],
    modes: Option<Vec<usize>>,
    marker: Option<f64>,
    marker_peak: Option<&str>,
) -> Result<(), Failure> {
    let (param_name, records) = read_sweep_csv(csv)?;
    let mut spec = PlotSpec::new(parse_fields(left)?, parse_fields(right)?, &param_name);
    spec.modes = modes;
    spec.marker = match marker_peak {
        Some(name) => {
            let f = Field::parse(name).ok_or_else(|| Failure::Config(format!("unknown field {name}")))?;
            Some(detect_peaks(&records, f, 0).map_err(|e| Failure::Config(e.to_string()))?.refined)
        }
        None => marker,
    };
    emit_svg(&records, &spec, out).map_err(|e| match e {
        IoError::MissingField(_) | IoError::Empty(_) => Failure::Config(e.to_string()),
        other => other.into(),
    })?;
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_selftest() -> Result<(), Failure> {
    let checks = run_selftest();
    for c in &checks {
        println!("{} {}{}", if c.passed { "PASS" } else { "FAIL" }, c.name, if c.detail.is_empty() { String::new() } else { format!(": {}", c.detail) });
    }
    if checks.iter().all(|c| c.passed) {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep { cfg, no_timestamp } => cmd_sweep(cfg, *no_timestamp),
        Command::Solve { cfg, param } => cmd_solve(cfg, *param),
        Command::Analyze { files, config, out } => cmd_analyze(files, config.as_deref(), out.as_deref()),
        Command::Plot { csv, out, left, right, modes, marker, marker_peak } => {
            cmd_plot(csv, out, left, right, modes.clone(), *marker, marker_peak.as_deref())
        }
        Command::Selftest => cmd_selftest(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("configuration error: {m}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::AllFailed(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_ALL_FAILED)
        }
        Err(Failure::Io(m)) => {
            eprintln!("I/O error: {m}");
            ExitCode::from(EXIT_IO)
        }
        Err(Failure::Check) => ExitCode::FAILURE,
    }
}
