use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qwalk_eur::sweep::{
    self, parse_index_list, parse_spec_with_overrides, Format, ResultTable, SweepKind, VerifyGrid,
};
use qwalk_eur::walk::Coin;
use qwalk_eur::Error;

/// Overlap and key-rate sweeps for the coined quantum walk on a cycle.
#[derive(Parser)]
#[command(name = "qwalk-eur", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// delta0, delta1 and overlap c over a (P, T) grid.
    OverlapSweep {
        /// overlap-dim or overlap-time.
        #[arg(long)]
        kind: Option<String>,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Finite-size key lengths and rates over (Q, P, N).
    KeyrateSweep(SweepArgs),
    /// Runs the invariant suite; exits 3 if any property fails.
    Verify(VerifyArgs),
    /// Position distribution of W^T |coin, x0>.
    WalkDump(DumpArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// TOML file with sweep keys; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Positions: list `2,3,5` or range `2..101` / `1..100:9`.
    #[arg(long)]
    p: Option<String>,
    /// `equal-p`, an integer, or a list/range.
    #[arg(long)]
    time: Option<String>,
    /// Noise levels, e.g. `0,0.15,0.2`.
    #[arg(long)]
    noise: Option<String>,
    /// `start:stop:factor`, e.g. `1e3:1e7:10`.
    #[arg(long)]
    n_range: Option<String>,
    #[arg(long)]
    sample_frac: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    /// deterministic or montecarlo.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SweepArgs {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut pairs: Vec<(&'static str, String)> = [
            ("p", &self.p),
            ("time", &self.time),
            ("noise", &self.noise),
            ("n_range", &self.n_range),
            ("sample_frac", &self.sample_frac),
            ("epsilon", &self.epsilon),
            ("mode", &self.mode),
            ("seed", &self.seed),
            ("format", &self.format),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
        .collect();
        if let Some(out) = &self.out {
            pairs.push(("out", out.display().to_string()));
        }
        pairs
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Positions; the default grid is used when absent.
    #[arg(long)]
    p: Option<String>,
    /// `equal-p` (default) or a list/range of steps.
    #[arg(long)]
    time: Option<String>,
    /// Random matrices for the norm axioms.
    #[arg(long, default_value_t = 200)]
    matrices: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest P for the explicit block eigensolves.
    #[arg(long, default_value_t = 11)]
    gram_max_p: usize,
    /// Check nothing (the verdict is vacuous).
    #[arg(long)]
    empty: bool,
    /// Negative control: corrupt one POVM effect.
    #[arg(long, hide = true)]
    corrupt_effect: bool,
}

#[derive(Args)]
struct DumpArgs {
    #[arg(long)]
    p: usize,
    #[arg(long)]
    time: usize,
    #[arg(long, default_value_t = 0)]
    start_coin: u8,
    #[arg(long, default_value_t = 0)]
    start_position: usize,
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn config_error(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

fn read_config(path: Option<&Path>) -> Result<String, Error> {
    match path {
        None => Ok(String::new()),
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| config_error("config", format!("cannot read {}: {e}", p.display()))),
    }
}

fn write_table(table: &ResultTable, format: Format, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(path) => sweep::emit(table, format, path),
        None => {
            let text = sweep::render(table, format);
            std::io::stdout().write_all(text.as_bytes()).map_err(|source| Error::Emit {
                path: PathBuf::from("<stdout>"),
                source,
            })
        }
    }
}

fn run_sweep(args: &SweepArgs, kind: Option<String>, keyrate: bool) -> Result<(), Error> {
    let source = read_config(args.config.as_deref())?;
    let mut overrides = args.overrides();
    if let Some(k) = kind {
        overrides.push(("kind", k));
    }
    let default_kind = if keyrate { SweepKind::Keyrate } else { SweepKind::OverlapDim };
    let spec = parse_spec_with_overrides(&source, &overrides, Some(default_kind))?;
    let table = if keyrate {
        sweep::run_keyrate_sweep(&spec)?
    } else {
        sweep::run_overlap_sweep(&spec)?
    };
    write_table(&table, spec.format, spec.out.as_deref())
}

fn verify_grid(args: &VerifyArgs) -> Result<VerifyGrid, Error> {
    if args.empty {
        return Ok(VerifyGrid::empty());
    }
    let mut grid = VerifyGrid {
        random_matrices: args.matrices,
        seed: args.seed,
        gram_max_positions: args.gram_max_p,
        corrupt_effect: args.corrupt_effect,
        ..VerifyGrid::default()
    };
    if args.p.is_none() && args.time.is_none() {
        return Ok(grid);
    }
    let positions = match &args.p {
        Some(s) => parse_index_list(s).map_err(|m| config_error("p", m))?,
        None => grid.points.iter().map(|&(p, _)| p).collect(),
    };
    if let Some(p) = positions.iter().find(|&&p| p < 2) {
        return Err(config_error("p", format!("cycle needs P >= 2, got {p}")));
    }
    let steps = match args.time.as_deref() {
        None | Some("equal-p") => None,
        Some(s) => Some(parse_index_list(s).map_err(|m| config_error("time", m))?),
    };
    let mut points: Vec<(usize, usize)> = positions
        .iter()
        .flat_map(|&p| steps.clone().unwrap_or_else(|| vec![p]).into_iter().map(move |t| (p, t)))
        .collect();
    points.sort_unstable();
    points.dedup();
    grid.points = points;
    Ok(grid)
}

fn parse_format(s: &str) -> Result<Format, Error> {
    match s {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        other => Err(config_error("format", format!("expected csv or json, got `{other}`"))),
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::OverlapSweep { kind, sweep } => run_sweep(&sweep, kind, false)?,
        Command::KeyrateSweep(sweep) => run_sweep(&sweep, None, true)?,
        Command::Verify(args) => {
            let verdict = sweep::verify(&verify_grid(&args)?);
            print!("{}", verdict.summary());
            if !verdict.passed() {
                return Ok(ExitCode::from(3));
            }
        }
        Command::WalkDump(args) => {
            let coin = Coin::try_from(args.start_coin)
                .map_err(|_| config_error("start_coin", format!("expected 0 or 1, got {}", args.start_coin)))?;
            let format = parse_format(&args.format)?;
            if args.p < 2 {
                return Err(config_error("p", format!("cycle needs P >= 2, got {}", args.p)));
            }
            if args.start_position >= args.p {
                return Err(config_error("start_position", "must be below P"));
            }
            let table = sweep::walk_dump(coin, args.start_position, args.p, args.time)?;
            write_table(&table, format, args.out.as_deref())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
