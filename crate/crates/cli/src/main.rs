use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use epsense_cli::config::Config;
use epsense_cli::params::{model_from_config, omega_from_config};
use epsense_cli::sweep::SweepSpec;
use epsense_cli::table::SweepResult;
use epsense_cli::{figures, report, CliError};

#[derive(Parser)]
#[command(name = "epsense", version, about = "Fisher-information limits of microring sensors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize one model at one frequency as JSON.
    Report {
        /// two-ring, three-ring, single-ring or mirror-ring
        model: String,
        #[command(flatten)]
        flags: ModelFlags,
        #[command(flatten)]
        output: OutputFlags,
    },
    /// Tabulate figures of merit over a parameter grid.
    Sweep {
        /// Settings file with `key = value` lines; flags override it.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        model: Option<String>,
        #[command(flatten)]
        flags: ModelFlags,
        /// Swept parameter: v, v1, v2, kappa, gamma, gamma-wg, rho, phi, epsilon, omega
        #[arg(long)]
        parameter: Option<String>,
        #[arg(long, allow_negative_numbers = true)]
        start: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        stop: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        /// Logarithmic grid spacing.
        #[arg(long)]
        log: bool,
        /// Comma-separated list, e.g. `i_max,i_mod`.
        #[arg(long)]
        outputs: Option<String>,
        /// Scale of QFI columns: none, gamma2 or kappa2.
        #[arg(long)]
        scale: Option<String>,
        #[command(flatten)]
        output: OutputFlags,
    },
    /// Write the data behind one figure.
    Figure {
        /// fig2, fig3, fig4a, fig4b, fig5 or fig6
        id: String,
        #[command(flatten)]
        output: OutputFlags,
    },
}

#[derive(Args, Default)]
struct ModelFlags {
    #[arg(long)]
    gamma: Option<f64>,
    /// Intercavity coupling, real or complex such as `0.2+0.1i`.
    #[arg(long, allow_hyphen_values = true)]
    v: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    v1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    v2: Option<String>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    phi: Option<f64>,
    #[arg(long = "gamma-wg")]
    gamma_wg: Option<f64>,
    /// Evaluation frequency relative to the ring resonance.
    #[arg(long, allow_negative_numbers = true)]
    omega: Option<f64>,
    /// Applied perturbation strength.
    #[arg(long, allow_negative_numbers = true)]
    epsilon: Option<f64>,
}

impl ModelFlags {
    fn apply(&self, cfg: &mut Config) {
        let reals = [
            ("gamma", self.gamma),
            ("kappa", self.kappa),
            ("rho", self.rho),
            ("phi", self.phi),
            ("gamma_wg", self.gamma_wg),
            ("omega", self.omega),
            ("epsilon", self.epsilon),
        ];
        for (k, v) in reals {
            if let Some(v) = v {
                cfg.set(k, format!("{v:e}"));
            }
        }
        for (k, v) in [("v", &self.v), ("v1", &self.v1), ("v2", &self.v2)] {
            if let Some(v) = v {
                cfg.set(k, v.clone());
            }
        }
    }
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Args)]
struct OutputFlags {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn open(out: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|source| {
            CliError::Io { path: path.clone(), source }
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn io_error(out: &Option<PathBuf>) -> impl Fn(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: out.clone().unwrap_or_else(|| PathBuf::from("<stdout>")),
        source,
    }
}

fn write_table(t: &SweepResult, output: &OutputFlags) -> Result<(), CliError> {
    let mut w = open(&output.out)?;
    match output.format.unwrap_or_default() {
        Format::Csv => t.write_csv(&mut w),
        Format::Json => t.write_json(&mut w),
    }
    .and_then(|_| w.flush())
    .map_err(io_error(&output.out))
}

fn read_config(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(Config::parse(&text)?)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Report { model, flags, output } => {
            let mut cfg = Config::default();
            cfg.set("model", model);
            flags.apply(&mut cfg);
            let sel = model_from_config(&cfg)?;
            let doc = report::report(&sel, omega_from_config(&cfg)?)?;
            let mut w = open(&output.out)?;
            let text = match output.format.unwrap_or(Format::Json) {
                Format::Json => serde_json::to_string_pretty(&doc).expect("serializable"),
                Format::Csv => {
                    let mut s = String::from("key,value\n");
                    for (k, v) in doc.as_object().expect("object") {
                        if v.is_number() || v.is_string() {
                            s.push_str(&format!("{k},{}\n", v.to_string().trim_matches('"')));
                        }
                    }
                    s
                }
            };
            writeln!(w, "{}", text.trim_end())
                .and_then(|_| w.flush())
                .map_err(io_error(&output.out))
        }
        Command::Sweep {
            spec,
            model,
            flags,
            parameter,
            start,
            stop,
            points,
            log,
            outputs,
            scale,
            output,
        } => {
            let mut cfg = match &spec {
                Some(path) => read_config(path)?,
                None => Config::default(),
            };
            if let Some(m) = model {
                cfg.set("model", m);
            }
            flags.apply(&mut cfg);
            let numbers = [("start", start), ("stop", stop)];
            for (k, v) in numbers {
                if let Some(v) = v {
                    cfg.set(k, format!("{v:e}"));
                }
            }
            if let Some(p) = points {
                cfg.set("points", p.to_string());
            }
            if log {
                cfg.set("grid", "log");
            }
            for (k, v) in [("parameter", parameter), ("outputs", outputs), ("scale", scale)] {
                if let Some(v) = v {
                    cfg.set(k, v);
                }
            }
            let result = SweepSpec::from_config(&cfg)?.run()?;
            write_table(&result, &output)
        }
        Command::Figure { id, output } => write_table(&figures::figure(&id)?, &output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(seed) = std::env::var("EPSENSE_SEED") {
        match seed.trim().parse::<u64>() {
            Ok(s) => epsense::numerics::set_restart_seed(s),
            Err(_) => {
                eprintln!("error: EPSENSE_SEED must be an unsigned integer");
                return ExitCode::from(2);
            }
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
