use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use helmholtz_lab::experiment::{list_presets, mesh_dump, preset, ExperimentConfig, Outcome};
use helmholtz_lab::mesh::DomainId;

const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(name = "helmholtz", version, about = "Helmholtz discretization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a config file.
    Run { config: PathBuf },
    /// Run a built-in preset.
    Preset {
        name: String,
        /// Directory for `<name>.csv`.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// List the built-in presets.
    ListPresets,
    /// Print a built-in mesh in text form.
    MeshDump {
        domain: String,
        h: f64,
        /// Geometric grading toward the corners as `sigma,L`.
        #[arg(long, value_name = "SIGMA,L")]
        grade: Option<String>,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config } => {
            let text = match fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => return fail(EXIT_CONFIG, &format!("cannot read {}: {e}", config.display())),
            };
            let stem = config.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
            run(&text, &PathBuf::from(format!("{stem}.csv")))
        }
        Command::Preset { name, out } => {
            if preset(&name).is_none() {
                return fail(EXIT_CONFIG, &format!("config key `preset`: unknown preset `{name}`"));
            }
            if let Err(e) = fs::create_dir_all(&out) {
                return fail(EXIT_CONFIG, &format!("cannot create {}: {e}", out.display()));
            }
            run(&format!("preset = {name}\n"), &out.join(format!("{name}.csv")))
        }
        Command::ListPresets => {
            print!("{}", list_presets());
            ExitCode::SUCCESS
        }
        Command::MeshDump { domain, h, grade } => {
            let domain: DomainId = match domain.parse() {
                Ok(d) => d,
                Err(e) => return fail(EXIT_CONFIG, &e.to_string()),
            };
            let grading = match grade.as_deref().map(parse_grade).transpose() {
                Ok(g) => g,
                Err(e) => return fail(EXIT_CONFIG, &e),
            };
            match mesh_dump(domain, h, grading) {
                Ok(text) => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
                Err(e) => fail(EXIT_CONFIG, &e.to_string()),
            }
        }
    }
}

fn parse_grade(s: &str) -> Result<(f64, usize), String> {
    let (sigma, layers) = s
        .split_once(',')
        .ok_or_else(|| format!("--grade expects `sigma,L`, got `{s}`"))?;
    let sigma = sigma.trim().parse::<f64>().map_err(|e| format!("--grade sigma: {e}"))?;
    let layers = layers.trim().parse::<usize>().map_err(|e| format!("--grade L: {e}"))?;
    Ok((sigma, layers))
}

fn fail(code: u8, message: &str) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(code)
}

fn run(text: &str, default_out: &Path) -> ExitCode {
    let config = match ExperimentConfig::parse(text) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, &e.to_string()),
    };
    let outcome = match config.run() {
        Ok(o) => o,
        Err(e) => return fail(EXIT_SOLVER, &e.to_string()),
    };
    let path = config.output.clone().unwrap_or_else(|| default_out.to_path_buf());
    if let Err(e) = fs::write(&path, outcome.to_csv()) {
        return fail(EXIT_SOLVER, &format!("cannot write {}: {e}", path.display()));
    }
    summarize(&outcome, &path);
    if outcome.failures() > 0 {
        ExitCode::from(EXIT_SOLVER)
    } else {
        ExitCode::SUCCESS
    }
}

fn summarize(outcome: &Outcome, path: &Path) {
    println!("wrote {} rows to {}", outcome.rows.len(), path.display());
    for s in outcome.slopes() {
        println!("slope vs {:<8} {:>8.3}  (r2 {:.4})  {}", s.axis, s.slope, s.r2, s.label);
    }
    for row in &outcome.rows {
        if let Some(note) = &row.note {
            println!("note: {note}");
        }
        if let Some(f) = &row.failure {
            eprintln!("failed: {} k={} p={}: {f}", row.method.name(), row.k, row.p);
        }
    }
}
