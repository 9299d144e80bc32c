use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use geoprod_cli::commands::{self, DEFAULT_SEED};
use geoprod_cli::{tolerance_from_env, CliError, SpaceSpec, EXIT_CHECK, EXIT_OK};

#[derive(Parser)]
#[command(name = "geoprod", version, about = "Closed-form geodesics on homogeneous spaces with chain metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run every algebraic check on a space specification.
    Verify {
        spec: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        /// Also write the JSON report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Sample the closed-form geodesic to CSV.
    Geodesic {
        spec: PathBuf,
        /// m-coordinates, comma separated; a seeded random unit vector if omitted.
        #[arg(long, allow_hyphen_values = true)]
        velocity: Option<String>,
        #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
        t_max: f64,
        #[arg(long, default_value_t = 101)]
        samples: usize,
        /// CSV destination; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Generators JSON destination; defaults to `<out>.generators.json`.
        #[arg(long)]
        generators: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Compare the closed form against the RK4 oracle.
    Compare {
        spec: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        velocity: Option<String>,
        #[arg(long, default_value_t = 2.0)]
        t_max: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Time closed-form evaluation against RK4 integration.
    Bench {
        spec: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        velocity: Option<String>,
        #[arg(long, default_value_t = 2.0)]
        t_max: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long, default_value_t = 101)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// List supported groups, chain grammar and example specs.
    Catalog,
}

fn companion_path(out: &Path) -> PathBuf {
    let mut name = out.file_stem().unwrap_or_default().to_os_string();
    name.push(".generators.json");
    out.with_file_name(name)
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let stdout = io::stdout();
    let mut stdout = stdout.lock();
    match cli.command {
        Command::Verify { spec, seed, format, report } => {
            let tol = tolerance_from_env()?;
            let space = SpaceSpec::load(&spec)?.build()?;
            let r = commands::verify(&space, seed, tol);
            match format {
                Format::Table => stdout.write_all(r.to_table().as_bytes())?,
                Format::Json => stdout.write_all(r.to_json().as_bytes())?,
            }
            if let Some(path) = report {
                std::fs::write(path, r.to_json())?;
            }
            Ok(if r.passed { EXIT_OK } else { EXIT_CHECK })
        }
        Command::Geodesic { spec, velocity, t_max, samples, out, generators, seed } => {
            let space = SpaceSpec::load(&spec)?.build()?;
            let v = commands::velocity_or_random(velocity.as_deref(), &space, seed)?;
            let csv = commands::geodesic_csv(&space, &v, t_max, samples)?;
            let gens = commands::generators_json(&space, &v)?;
            match &out {
                Some(path) => std::fs::write(path, csv)?,
                None => stdout.write_all(csv.as_bytes())?,
            }
            if let Some(path) = generators.or_else(|| out.as_deref().map(companion_path)) {
                std::fs::write(path, gens)?;
            }
            Ok(EXIT_OK)
        }
        Command::Compare { spec, velocity, t_max, step, seed } => {
            let space = SpaceSpec::load(&spec)?.build()?;
            let v = commands::velocity_or_random(velocity.as_deref(), &space, seed)?;
            let dev = commands::compare(&space, &v, t_max, step, &mut stdout)?;
            if dev > commands::COMPARE_LIMIT {
                writeln!(stdout, "FAIL: deviation above {:e}", commands::COMPARE_LIMIT)?;
                return Ok(EXIT_CHECK);
            }
            Ok(EXIT_OK)
        }
        Command::Bench { spec, velocity, t_max, step, samples, seed } => {
            let space = SpaceSpec::load(&spec)?.build()?;
            let v = commands::velocity_or_random(velocity.as_deref(), &space, seed)?;
            commands::bench(&space, &v, t_max, step, samples, &mut stdout)?;
            Ok(EXIT_OK)
        }
        Command::Catalog => {
            stdout.write_all(commands::catalog().as_bytes())?;
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
