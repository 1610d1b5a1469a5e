//! Batch front-end: parses a run manifest from the command line, executes
//! one analysis subcommand, and emits records or SVG. Exit codes: 0 ok,
//! 2 usage, 3 validation, 4 resource cap.

mod commands;
mod report;
mod svg;

use clap::{Parser, Subcommand};
use commands::CliError;
use report::{Format, Report};
use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "kcm2d", version, about = "Bootstrap percolation and KCM analysis toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Output path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "lines")]
    format: Format,
    /// Drop the timestamp header for byte-reproducible output.
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// Master seed; per-task streams are derived from it.
    #[arg(long, global = true, env = "KCM2D_SEED", default_value_t = 1)]
    seed: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Universality class, difficulty and stable-set summary of a family.
    Classify {
        #[arg(long)]
        family: String,
    },
    /// The stable directions of a family, as arcs and isolated points.
    StableArcs {
        #[arg(long)]
        family: String,
    },
    /// Difficulty of one direction, or of the whole family.
    Difficulty {
        #[arg(long)]
        family: String,
        /// Direction as dx,dy; omit for the family difficulty.
        #[arg(long, allow_hyphen_values = true)]
        dir: Option<String>,
    },
    /// Bootstrap closure of a site list inside a window.
    Closure {
        #[arg(long)]
        family: String,
        #[arg(long)]
        sites: PathBuf,
        #[arg(long, default_value = "32")]
        window: String,
    },
    /// Droplets of a site list under the spanning algorithm.
    Droplets {
        #[arg(long)]
        family: String,
        #[arg(long)]
        sites: PathBuf,
        #[arg(long, default_value = "32")]
        window: String,
        /// Use the modified (boundary-aware) droplet shapes.
        #[arg(long)]
        modified: bool,
    },
    /// Spanning probability across a geometric droplet-size ladder.
    SpanProb {
        #[arg(long, default_value = "three-rule")]
        scenario: String,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long, default_value_t = 400)]
        trials: u64,
        #[arg(long, default_value_t = 4)]
        levels: u32,
        /// Reach of the smallest ladder droplet.
        #[arg(long, default_value_t = 2)]
        base: i64,
    },
    /// Minimal simultaneous empties to relax site M in the East model.
    EastBarrier {
        #[arg(long, default_value_t = 7)]
        max: u32,
    },
    /// Monte Carlo mean of the origin emptying time.
    KcmTau {
        #[arg(long)]
        family: String,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[arg(long, default_value = "2")]
        window: String,
        #[arg(long, default_value_t = 1e5)]
        horizon: f64,
    },
    /// Exact spectral gap of the generator on a small window.
    Gap {
        #[arg(long)]
        family: String,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value = "2")]
        window: String,
        /// State-space cap (log2 of the number of states).
        #[arg(long, default_value_t = 22)]
        cap: usize,
    },
    /// Up-arrow probability estimates on a renormalised scenario.
    Arrows {
        #[arg(long, default_value = "three-rule")]
        scenario: String,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 2)]
        n_report: usize,
    },
    /// Sampled dynamics on a scenario: chain-law and East-path verdicts.
    PathCheck {
        #[arg(long, default_value = "tiny-renorm")]
        scenario: String,
        #[arg(long, default_value_t = 20)]
        trials: u64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
    },
    /// SVG of a scenario domain, or of droplets over a site list.
    Render {
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        sites: Option<PathBuf>,
        #[arg(long)]
        window: Option<String>,
    },
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let seed = cli.seed;
    let output = match &cli.cmd {
        Cmd::Classify { family } => Output::Report(commands::cmd_classify(&commands::load_family(family)?)?),
        Cmd::StableArcs { family } => {
            Output::Report(commands::cmd_stable_arcs(&commands::load_family(family)?)?)
        }
        Cmd::Difficulty { family, dir } => {
            let fam = commands::load_family(family)?;
            let dir = dir.as_deref().map(commands::parse_dir).transpose()?;
            Output::Report(commands::cmd_difficulty(&fam, dir)?)
        }
        Cmd::Closure { family, sites, window } => {
            let fam = commands::load_family(family)?;
            let sites = commands::load_sites(sites)?;
            let window = commands::parse_window(window)?;
            Output::Report(commands::cmd_closure(&fam, sites, window)?)
        }
        Cmd::Droplets { family, sites, window, modified } => {
            let fam = commands::load_family(family)?;
            let sites = commands::load_sites(sites)?;
            let window = commands::parse_window(window)?;
            Output::Report(commands::cmd_droplets(&fam, sites, window, *modified)?)
        }
        Cmd::SpanProb { scenario, q, trials, levels, base } => {
            Output::Report(commands::cmd_span_prob(scenario, *q, *trials, *levels, *base, seed)?)
        }
        Cmd::EastBarrier { max } => Output::Report(commands::cmd_east_barrier(*max)?),
        Cmd::KcmTau { family, q, trials, window, horizon } => {
            let fam = commands::load_family(family)?;
            let window = commands::parse_window(window)?;
            Output::Report(commands::cmd_kcm_tau(&fam, *q, *trials, window, *horizon, seed)?)
        }
        Cmd::Gap { family, q, window, cap } => {
            let fam = commands::load_family(family)?;
            let window = commands::parse_window(window)?;
            Output::Report(commands::cmd_gap(&fam, *q, window, *cap)?)
        }
        Cmd::Arrows { scenario, q, trials, n_report } => {
            Output::Report(commands::cmd_arrows(scenario, *q, *trials, *n_report, seed)?)
        }
        Cmd::PathCheck { scenario, trials, steps } => {
            Output::Report(commands::cmd_path_check(scenario, *trials, *steps, seed)?)
        }
        Cmd::Render { scenario, family, sites, window } => {
            let sites = sites.as_deref().map(commands::load_sites).transpose()?;
            let window = window.as_deref().map(commands::parse_window).transpose()?;
            Output::Svg(commands::cmd_render(
                scenario.as_deref(),
                family.as_deref(),
                sites,
                window,
            )?)
        }
    };
    let io_err = |e: std::io::Error| CliError::Validation(format!("output: {e}"));
    let mut sink: Box<dyn Write> = match &cli.out {
        Some(path) => Box::new(File::create(path).map_err(io_err)?),
        None => Box::new(std::io::stdout()),
    };
    match output {
        Output::Report(rep) => rep
            .write(cli.format, !cli.no_timestamp, &mut sink)
            .map_err(io_err)?,
        Output::Svg(doc) => sink.write_all(doc.as_bytes()).map_err(io_err)?,
    }
    Ok(())
}

enum Output {
    Report(Report),
    Svg(String),
}

fn main() {
    // clap exits with code 2 on usage errors.
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.code());
    }
}
