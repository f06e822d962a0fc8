use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use phaselab::scenario::{
    compare_reports, emit_report, parse_scenario, preset, read_report, render_report, run_scenario, ReportFormat,
    ScenarioConfig, PRESETS,
};

/// Runs phase-space and quantum verification scenarios.
#[derive(Parser)]
#[command(name = "phaselab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or a built-in preset.
    Run {
        /// Path to a scenario file, or the name of a preset.
        config: String,
        /// Directory for the report and series tables.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the seed of the scenario.
        #[arg(long)]
        seed: Option<u64>,
        /// Format of the report on stdout and in the output directory.
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// List the built-in presets.
    List,
    /// Compare two CSV reports check by check.
    Compare { left: PathBuf, right: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Text,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ReportFormat::Csv,
            Format::Text => ReportFormat::Text,
        }
    }
}

const EXIT_FAIL: u8 = 1;
const EXIT_ERROR: u8 = 2;

fn load(config: &str) -> phaselab::Result<ScenarioConfig> {
    let path = Path::new(config);
    if path.exists() {
        return parse_scenario(path);
    }
    preset(config).unwrap_or_else(|| {
        Err(phaselab::Error::Io {
            path: config.to_string(),
            message: "no such file or preset".into(),
        })
    })
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("PHASELAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .map_err(|_| format!("PHASELAB_THREADS={v:?} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(config: &str, out: Option<PathBuf>, seed: Option<u64>, format: Format) -> Result<bool, String> {
    let mut cfg = load(config).map_err(|e| e.to_string())?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let report = run_scenario(&cfg);
    print!("{}", render_report(&report, format.into()).map_err(|e| e.to_string())?);
    if let Some(dir) = out.or(cfg.output.clone()) {
        for path in emit_report(&report, format.into(), &dir).map_err(|e| e.to_string())? {
            eprintln!("wrote {}", path.display());
        }
    }
    eprintln!("wall time {:.3} s", report.wall_time.as_secs_f64());
    Ok(report.all_pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_ERROR);
    }
    let outcome = match cli.command {
        Command::Run {
            config,
            out,
            seed,
            format,
        } => run(&config, out, seed, format),
        Command::List => {
            for (name, text) in PRESETS {
                let about = text.lines().next().unwrap_or("").trim_start_matches('#').trim();
                println!("{name:<24} {about}");
            }
            Ok(true)
        }
        Command::Compare { left, right } => (|| {
            let a = read_report(&left).map_err(|e| e.to_string())?;
            let b = read_report(&right).map_err(|e| e.to_string())?;
            let diff = compare_reports(&a, &b);
            print!("{}", diff.render());
            Ok(diff.is_clean())
        })(),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
