use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qw1::commands::{self, Output, ScalingInput, SolverOpts, TciArgs, VerifyArgs};
use qw1::CliError;

#[derive(Parser)]
#[command(name = "qw1", version, about = "Quantum W1 distances, Lipschitz constants and lattice bounds")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Print the JSON record on stdout instead of the human summary.
    #[arg(long, global = true)]
    json: bool,
    /// Write the output to this file (CSV when the name ends in .csv and the
    /// command produces a table) plus a `.manifest.json` sidecar.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Relative duality-gap target.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long = "max-iter", global = true)]
    max_iter: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// W1 norm of a traceless operator, or W1 distance between two states.
    W1 {
        #[arg(required = true, num_args = 1..=2)]
        files: Vec<PathBuf>,
    },
    /// Site dependences and Lipschitz constant of an observable.
    Lipschitz {
        file: PathBuf,
        /// Single site, as comma-separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        site: Option<String>,
        #[arg(long = "all-sites")]
        all_sites: bool,
    },
    /// Local Gibbs state of an interaction on a box.
    Gibbs {
        interaction: PathBuf,
        /// Box half-width.
        #[arg(long = "box", default_value_t = 1)]
        half_width: usize,
    },
    /// Finite-volume pressures of an interaction.
    Pressure {
        interaction: PathBuf,
        /// Box half-widths.
        #[arg(long = "box", value_delimiter = ',')]
        boxes: Vec<usize>,
        /// Open-chain lengths (one-dimensional interactions).
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
    },
    /// Constants of the high-temperature transportation-cost inequality.
    Tci {
        interaction: Option<PathBuf>,
        #[arg(long)]
        r: Option<f64>,
        /// Use this r-norm instead of an interaction file.
        #[arg(long = "phi-r")]
        phi_r: Option<f64>,
        #[arg(long)]
        q: Option<usize>,
        /// Neighborhood size.
        #[arg(long = "N")]
        n: Option<usize>,
        /// Number of grid steps on [0, 50].
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Per-site Hamming transport between window marginals of two processes.
    Dbar {
        process_a: PathBuf,
        process_b: PathBuf,
        #[arg(long = "a-max", default_value_t = 3)]
        a_max: usize,
    },
    /// Per-site W1 along two families of box marginals.
    Scaling {
        /// Two family files, or two process files with --process.
        #[arg(required = true, num_args = 2)]
        files: Vec<PathBuf>,
        #[arg(long)]
        process: bool,
        #[arg(long = "a-max")]
        a_max: Option<usize>,
    },
    /// Seeded batch run of the inequality checkers.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        sizes: Vec<usize>,
    },
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    commands::apply_dim_cap_env()?;
    if let Some(t) = cli.common.threads {
        if t == 0 {
            return Err(CliError::input("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::input(e.to_string()))?;
    }
    let opts = SolverOpts {
        tol: cli.common.tol,
        max_iter: cli.common.max_iter,
    };
    match &cli.command {
        Command::W1 { files } => commands::w1(files, &opts),
        Command::Lipschitz { file, site, all_sites } => commands::lipschitz(file, site.as_deref(), *all_sites, &opts),
        Command::Gibbs { interaction, half_width } => commands::gibbs(interaction, *half_width),
        Command::Pressure { interaction, boxes, sizes } => commands::pressure(interaction, boxes, sizes),
        Command::Tci { interaction, r, phi_r, q, n, grid } => commands::tci(&TciArgs {
            interaction: interaction.clone(),
            r: *r,
            phi_r: *phi_r,
            q: *q,
            n: *n,
            grid: *grid,
        }),
        Command::Dbar { process_a, process_b, a_max } => commands::dbar(process_a, process_b, *a_max),
        Command::Scaling { files, process, a_max } => {
            let input = if *process {
                ScalingInput::Processes(&files[0], &files[1])
            } else {
                ScalingInput::Families(&files[0], &files[1])
            };
            commands::scaling(input, *a_max, &opts)
        }
        Command::Verify { suite, seed, samples, sizes } => commands::verify(
            &VerifyArgs {
                suite: suite.clone(),
                seed: *seed,
                samples: *samples,
                sizes: sizes.clone(),
            },
            &opts,
        ),
    }
}

fn write_output(out: &Output, path: &Path) -> Result<(), CliError> {
    let is_csv = path.extension().is_some_and(|e| e == "csv");
    let text = match (&out.csv, is_csv) {
        (Some(csv), true) => csv.clone(),
        (None, true) => return Err(CliError::input("this command has no table output; use a .json path")),
        _ => out.json_text(),
    };
    std::fs::write(path, text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    out.manifest.write_sidecar(path)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { qw1::EXIT_INPUT } else { qw1::EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let out = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(path) = &cli.common.out {
        if let Err(e) = write_output(&out, path) {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    }
    if cli.common.json {
        print!("{}", out.json_text());
    } else {
        println!("{}", out.human);
    }
    if out.exit == qw1::EXIT_NONCONVERGENCE {
        eprintln!("warning: solver did not reach the requested gap");
    }
    ExitCode::from(out.exit as u8)
}
