use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use ineq_lab::config::{parse_scenario, ScenarioConfig};
use ineq_lab::figures::{cobweb_artifacts, figure, FigureName};
use ineq_lab::run::{
    apply_overrides, run_scenario, steady_state_text, write_artifacts, Format, Overrides,
};
use ineq_lab::sweep::run_sweep;
use ineq_lab::{LabError, Result};

#[derive(Debug, Parser)]
#[command(
    name = "ineq-lab",
    version,
    about = "Growth and inequality scenario lab"
)]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "INEQ_LAB_OUT", default_value = "out")]
    out: PathBuf,

    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// OLG stop tolerance or Ramsey terminal band.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// OLG generation cap or Ramsey bisection iteration cap.
    #[arg(long, global = true)]
    max_steps: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Svg,
    Both,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one or more scenarios and write their CSV/SVG/summary files.
    Simulate {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
    /// Print the steady state of a scenario's regime.
    SteadyState { config: PathBuf },
    /// Reproduce a figure's data and chart.
    Figure { name: String },
    /// Randomized check of the value-theory equivalences.
    FmtSweep {
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Cobweb diagram of an exogenous OLG scenario.
    Cobweb { config: PathBuf },
}

fn load(path: &Path, overrides: &Overrides) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| LabError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut config = parse_scenario(&text).map_err(|e| match e {
        LabError::Parse { line, message } => LabError::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })?;
    apply_overrides(&mut config, overrides)?;
    Ok(config)
}

fn report_written(paths: &[PathBuf]) {
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
}

fn run(cli: Cli) -> Result<()> {
    let overrides = Overrides {
        format: cli.format.map(|f| match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Svg => Format::Svg,
            FormatArg::Both => Format::Both,
        }),
        tol: cli.tol,
        max_steps: cli.max_steps,
    };
    match cli.command {
        Command::Simulate { configs } => {
            let configs = configs
                .iter()
                .map(|p| load(p, &overrides))
                .collect::<Result<Vec<_>>>()?;
            let bundles: Vec<Result<_>> = configs.par_iter().map(run_scenario).collect();
            let mut first_error = None;
            for bundle in bundles {
                match bundle {
                    Ok(b) => {
                        report_written(&write_artifacts(&cli.out, &b.artifacts())?);
                        print!("{}", b.summary);
                    }
                    Err(e) => {
                        eprintln!("error: {e}");
                        first_error.get_or_insert(e);
                    }
                }
            }
            first_error.map_or(Ok(()), Err)
        }
        Command::SteadyState { config } => {
            print!("{}", steady_state_text(&load(&config, &overrides)?)?);
            Ok(())
        }
        Command::Figure { name } => {
            let artifacts = figure(name.parse::<FigureName>()?)?;
            report_written(&write_artifacts(&cli.out, &artifacts)?);
            Ok(())
        }
        Command::FmtSweep { trials, size, seed } => {
            let report = run_sweep(trials, size, seed)?;
            print!("{}", report.text());
            match report.counterexamples() {
                0 => Ok(()),
                count => Err(LabError::Counterexamples { count, trials }),
            }
        }
        Command::Cobweb { config } => {
            let artifacts = cobweb_artifacts(&load(&config, &overrides)?)?;
            report_written(&write_artifacts(&cli.out, &artifacts)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
