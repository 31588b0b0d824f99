use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use crowdpac_cli::report::{write_csv, write_json, write_summary_csv};
use crowdpac_cli::verify::{run_verify, Grid};
use crowdpac_cli::{run_experiment, sweep, AlgorithmChoice, CliError, ExperimentConfig, ReportRow, SummaryRow};

#[derive(Parser)]
#[command(name = "crowdpac", version, about = "Crowdsourced PAC learning of halfspaces: experiments and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured (algorithm, seed) trial.
    Run(RunArgs),
    /// Run the trials for each target error and summarize each cell.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated target errors, e.g. "0.1,0.05,0.025".
        #[arg(long, value_delimiter = ',', required = true)]
        epsilons: Vec<f64>,
    },
    /// Check the closed-form probability oracles against simulation.
    Verify {
        #[arg(long, value_enum, default_value = "small")]
        grid: Grid,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the effective configuration as TOML.
    ShowConfig {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, or a file ending in .csv or .json. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    algorithm: Option<AlgorithmChoice>,
    /// Use seeds 0..N.
    #[arg(long, conflicts_with = "seed_list")]
    seeds: Option<u64>,
    /// Comma-separated explicit seeds.
    #[arg(long, value_delimiter = ',')]
    seed_list: Option<Vec<u64>>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

impl RunArgs {
    fn effective_config(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = load_or_default(self.config.as_deref())?;
        if let Some(a) = self.algorithm {
            cfg.algorithm = a;
        }
        if let Some(n) = self.seeds {
            cfg.seeds = (0..n).collect();
        }
        if let Some(list) = &self.seed_list {
            cfg.seeds = list.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn load_or_default(path: Option<&Path>) -> Result<ExperimentConfig, CliError> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

enum Target {
    Stdout,
    Json(PathBuf),
    Csv(PathBuf),
    Dir(PathBuf),
}

impl Target {
    fn from(out: Option<&Path>) -> Target {
        match out {
            None => Target::Stdout,
            Some(p) => match p.extension().and_then(|e| e.to_str()) {
                Some("json") => Target::Json(p.to_path_buf()),
                Some("csv") => Target::Csv(p.to_path_buf()),
                _ => Target::Dir(p.to_path_buf()),
            },
        }
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn create(path: &Path) -> Result<fs::File, CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::File::create(path).map_err(|e| CliError::io(path, e))
}

fn write_config(path: &Path, cfg: &ExperimentConfig) -> Result<(), CliError> {
    create(path)?
        .write_all(cfg.to_toml().as_bytes())
        .map_err(|e| CliError::io(path, e))
}

fn emit(out: Option<&Path>, cfg: &ExperimentConfig, rows: &[ReportRow], summary: Option<&[SummaryRow]>) -> Result<(), CliError> {
    match Target::from(out) {
        Target::Stdout => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_csv(&mut lock, rows)?;
            if let Some(s) = summary {
                writeln!(lock).map_err(|e| CliError::Write(e.to_string()))?;
                write_summary_csv(&mut lock, s)?;
            }
        }
        Target::Json(path) => {
            write_json(create(&path)?, rows)?;
            if let Some(s) = summary {
                write_json(create(&sibling(&path, "summary.json"))?, s)?;
            }
            write_config(&sibling(&path, "config.toml"), cfg)?;
        }
        Target::Csv(path) => {
            write_csv(create(&path)?, rows)?;
            if let Some(s) = summary {
                write_summary_csv(create(&sibling(&path, "summary.csv"))?, s)?;
            }
            write_config(&sibling(&path, "config.toml"), cfg)?;
        }
        Target::Dir(dir) => {
            write_csv(create(&dir.join("results.csv"))?, rows)?;
            if let Some(s) = summary {
                write_summary_csv(create(&dir.join("summary.csv"))?, s)?;
            }
            write_config(&dir.join("config.toml"), cfg)?;
        }
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.effective_config()?;
            let rows = run_experiment(&cfg, args.jobs)?;
            emit(args.out.as_deref(), &cfg, &rows, None)?;
        }
        Command::Sweep { run, epsilons } => {
            let cfg = run.effective_config()?;
            let report = sweep(&cfg, &epsilons, run.jobs)?;
            emit(run.out.as_deref(), &cfg, &report.rows, Some(&report.summary))?;
        }
        Command::Verify { grid, seed } => {
            let checks = run_verify(grid, seed);
            for c in &checks {
                println!("{c}");
            }
            if checks.iter().any(|c| !c.passed) {
                return Ok(ExitCode::from(1));
            }
        }
        Command::ShowConfig { config } => {
            print!("{}", load_or_default(config.as_deref())?.to_toml());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
