use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use quasispec_cli::config::{
    ExperimentConfig, Format, ModelConfig, OutputConfig, TaskConfig, DEFAULT_DEPTH,
};
use quasispec_cli::{emit_report, exit_code, run_experiment};

#[derive(Parser)]
#[command(
    name = "quasispec",
    version,
    about = "Sturmian and substitution Schrödinger operator experiments"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Named model: fibonacci, period-doubling, binary-non-pisot, thue-morse, rudin-shapiro.
    #[arg(long)]
    model: Option<String>,
    /// Custom substitution such as a:ab,b:a.
    #[arg(long)]
    substitution: Option<String>,
    /// Continued fraction coefficients, e.g. 1,1,1x40.
    #[arg(long)]
    alpha_cf: Option<String>,
    /// Period of an eventually periodic continued fraction.
    #[arg(long)]
    alpha_period: Option<String>,
    #[arg(long)]
    alpha_preperiod: Option<String>,
    /// Number of coefficients for --alpha-period and named models.
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    depth: usize,
    /// Interval length p/q (default: beta = alpha).
    #[arg(long)]
    beta: Option<String>,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    lambda: f64,
    /// Rational approximation factor: q_N > P * max_index.
    #[arg(long, default_value_t = quasispec::circlemap::DEFAULT_PRECISION_FACTOR)]
    precision: u64,
}

impl From<ModelArgs> for ModelConfig {
    fn from(a: ModelArgs) -> Self {
        ModelConfig {
            name: a.model,
            substitution: a.substitution,
            alpha_cf: a.alpha_cf,
            alpha_period: a.alpha_period,
            alpha_preperiod: a.alpha_preperiod,
            depth: a.depth,
            beta: a.beta,
            lambda: a.lambda,
            precision: a.precision,
        }
    }
}

#[derive(Args, Clone)]
struct OutputArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Record wall time in the report.
    #[arg(long)]
    timings: bool,
}

#[derive(clap::ValueEnum, Clone, Copy)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Prefix of the model's sequence.
    Word {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long)]
        length: usize,
        /// Also export the standard words up to this level.
        #[arg(long)]
        tower: Option<usize>,
    },
    /// Band spectra of periodic approximants.
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long)]
        levels: String,
    },
    /// Lyapunov exponent estimates.
    Lyapunov {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// sturmian, free or approximant:N
        #[arg(long, default_value = "sturmian")]
        potential: String,
        /// a:b:n, from-spectrum:L or a comma list.
        #[arg(long, allow_hyphen_values = true)]
        energies: String,
        #[arg(long)]
        steps: u64,
        #[arg(long, default_value = "0")]
        theta: String,
    },
    /// Two-block certificates on s_n^3 windows.
    Gordon {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, alias = "levels")]
        level: String,
        #[arg(long, allow_hyphen_values = true)]
        energies: String,
        #[arg(long, default_value_t = 100)]
        seeds: usize,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
        #[arg(long, default_value_t = 8)]
        trace_level_max: usize,
    },
    /// Factors of v_0 versus factors across a phase grid.
    HullCheck {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long = "L")]
        length: usize,
        #[arg(long)]
        grid: u64,
        #[arg(long)]
        prefix: usize,
    },
    /// Boundary-limit sequences and discontinuity sets.
    Appendix {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, default_value_t = 1000)]
        range: i64,
        #[arg(long, default_value_t = 20)]
        thetas: usize,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
    },
    /// Run an experiment from a JSON or TOML file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

fn experiment(
    model: ModelArgs,
    output: OutputArgs,
    task: TaskConfig,
    jobs: Option<usize>,
) -> ExperimentConfig {
    ExperimentConfig {
        model: model.into(),
        task,
        output: OutputConfig {
            path: output.out.map(|p| p.display().to_string()),
            format: match output.format {
                FormatArg::Json => Format::Json,
                FormatArg::Csv => Format::Csv,
            },
        },
        jobs,
        timings: output.timings,
    }
}

fn load(path: &PathBuf, jobs: Option<usize>) -> Result<ExperimentConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let toml_syntax = path.extension().is_some_and(|e| e == "toml");
    let mut config = ExperimentConfig::from_text(&text, toml_syntax).map_err(|e| e.to_string())?;
    if jobs.is_some() {
        config.jobs = jobs;
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli.jobs;
    let config = match cli.command {
        Command::Word {
            model,
            output,
            length,
            tower,
        } => experiment(model, output, TaskConfig::Word { length, tower }, jobs),
        Command::Spectrum {
            model,
            output,
            levels,
        } => experiment(model, output, TaskConfig::Spectrum { levels }, jobs),
        Command::Lyapunov {
            model,
            output,
            potential,
            energies,
            steps,
            theta,
        } => experiment(
            model,
            output,
            TaskConfig::Lyapunov {
                potential,
                energies,
                steps,
                theta,
            },
            jobs,
        ),
        Command::Gordon {
            model,
            output,
            level,
            energies,
            seeds,
            rng_seed,
            trace_level_max,
        } => experiment(
            model,
            output,
            TaskConfig::Gordon {
                levels: level,
                energies,
                seeds,
                rng_seed,
                trace_level_max,
            },
            jobs,
        ),
        Command::HullCheck {
            model,
            output,
            length,
            grid,
            prefix,
        } => experiment(
            model,
            output,
            TaskConfig::HullCheck {
                length,
                grid,
                prefix,
            },
            jobs,
        ),
        Command::Appendix {
            model,
            output,
            range,
            thetas,
            rng_seed,
        } => experiment(
            model,
            output,
            TaskConfig::Appendix {
                range,
                thetas,
                rng_seed,
            },
            jobs,
        ),
        Command::Run { config } => match load(&config, jobs) {
            Ok(c) => c,
            Err(msg) => {
                eprintln!("error: {msg}");
                return ExitCode::from(2);
            }
        },
    };

    if let Some(j) = config.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
        {
            eprintln!("error: cannot start {j} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    let bytes = match run_experiment(&config).and_then(|r| emit_report(&r, config.output.format)) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let written = match &config.output.path {
        Some(path) => std::fs::write(path, &bytes).map_err(|e| format!("cannot write {path}: {e}")),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(&bytes)
                .map_err(|e| e.to_string())
        }
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
