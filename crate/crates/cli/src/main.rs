use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use skatelo::chance::WinProbEstimator;
use skatelo::ingest::{read_series, write_series, IngestReport};
use skatelo::report::{
    average_scores, average_scores_csv, mean_game_value, parse_grid, ranking, ranking_csv,
    seeger_csv, sweep, timeseries_export, TimeMode,
};
use skatelo::simulate::generate_tournament;
use skatelo::{ConfigFile, EloConfig, Error, PlayerId, SeriesRecord};

/// Seeger-Fabian scores and chance-corrected ELO ratings for Skat game logs.
#[derive(Parser)]
#[command(name = "skatelo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a log and print the final ranking.
    Rank {
        #[command(flatten)]
        io: InputArgs,
        #[command(flatten)]
        elo: EloArgs,
    },
    /// Print Seeger scores, per-player averages or mean game values.
    Seeger {
        #[command(flatten)]
        io: InputArgs,
        #[arg(long, value_enum, default_value_t = SeegerView::Series)]
        view: SeegerView,
    },
    /// Replay once per grid point and summarize the final ratings.
    Sweep {
        #[command(flatten)]
        io: InputArgs,
        #[command(flatten)]
        elo: EloArgs,
        /// `default` or `i1,i2,k;i1,i2,k;...`
        #[arg(long, default_value = "default")]
        grid: String,
    },
    /// Export rating histories as CSV or SVG.
    Timeseries {
        #[command(flatten)]
        io: InputArgs,
        #[command(flatten)]
        elo: EloArgs,
        /// Comma-separated player ids; all players when omitted.
        #[arg(long, value_delimiter = ',')]
        players: Vec<String>,
        #[arg(long, value_enum, default_value_t = Mode::Expanded)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Generate a synthetic tournament log.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        #[arg(long = "player-count")]
        player_count: Option<usize>,
        #[arg(long = "series")]
        series_count: Option<usize>,
        #[arg(long)]
        chance_share: Option<f64>,
        /// Also replay the generated log and print its ranking; the log then
        /// goes to --output.
        #[arg(long, requires = "output")]
        replay: bool,
        #[command(flatten)]
        elo: EloArgs,
    },
    /// Parse and group a log and print the ingest report.
    Validate {
        #[command(flatten)]
        io: InputArgs,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Game log path, or `-` for standard input.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Default)]
struct EloArgs {
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    start: Option<f64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    chance_hand: Option<bool>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    chance_flat: Option<bool>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    opponent_factor: Option<bool>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeegerView {
    Series,
    Averages,
    GameValues,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Contracted,
    Expanded,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Svg,
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Usage(e.to_string()),
            e => Failure::Data(e.to_string()),
        }
    }
}

type Run<T = ()> = Result<T, Failure>;

fn load_config(path: Option<&Path>) -> Run<ConfigFile> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let c = ConfigFile::load(path).map_err(|e| match e {
        Error::Io(io) => Failure::Usage(format!("{}: {io}", path.display())),
        e => e.into(),
    })?;
    c.estimator_table()?;
    Ok(c)
}

fn elo_config(file: &ConfigFile, flags: &EloArgs) -> Run<EloConfig> {
    let mut c: EloConfig = file.elo_config()?;
    if let Some(k) = flags.k {
        c = c.with_k(k);
    }
    if let Some(s) = flags.start {
        c = c.with_start(s);
    }
    if let Some(v) = flags.chance_hand {
        c.chance_hand = v;
    }
    if let Some(v) = flags.chance_flat {
        c.chance_flat = v;
    }
    if let Some(v) = flags.opponent_factor {
        c.opponent_factor = v;
    }
    c.validate()?;
    Ok(c)
}

fn open_input(path: &Path) -> Run<Box<dyn BufRead>> {
    if path == Path::new("-") {
        let mut buf = Vec::new();
        io::stdin()
            .read_to_end(&mut buf)
            .map_err(|e| Failure::Data(format!("stdin: {e}")))?;
        return Ok(Box::new(io::Cursor::new(buf)));
    }
    let f = File::open(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    Ok(Box::new(BufReader::new(f)))
}

fn read_input(path: &Path) -> Run<(Vec<SeriesRecord>, IngestReport)> {
    let name = path.display().to_string();
    read_series(open_input(path)?).map_err(|e| Failure::Data(format!("{name}: {e}")))
}

fn load_series(path: &Path) -> Run<Vec<SeriesRecord>> {
    let (series, report) = read_input(path)?;
    for s in &report.skipped {
        eprintln!("warning: {}:{}: skipped: {}", path.display(), s.line, s.reason);
    }
    Ok(series)
}

fn emit(output: Option<&Path>, text: &str) -> Run {
    let result = match output {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| format!("stdout: {e}")),
    };
    result.map_err(Failure::Data)
}

fn run(cli: Cli) -> Run {
    let no_estimator: Option<&dyn WinProbEstimator> = None;
    match cli.command {
        Command::Rank { io, elo } => {
            let cfg = elo_config(&load_config(io.config.as_deref())?, &elo)?;
            let series = load_series(&io.input)?;
            let ledger = skatelo::pipeline::replay(&series, &cfg, no_estimator)?;
            emit(io.output.as_deref(), &ranking_csv(&ranking(&ledger)))
        }
        Command::Seeger { io, view } => {
            load_config(io.config.as_deref())?;
            let series = load_series(&io.input)?;
            let text = match view {
                SeegerView::Series => seeger_csv(&series),
                SeegerView::Averages => average_scores_csv(&average_scores(&series)),
                SeegerView::GameValues => mean_game_value(&series)?.render(),
            };
            emit(io.output.as_deref(), &text)
        }
        Command::Sweep { io, elo, grid } => {
            let cfg = elo_config(&load_config(io.config.as_deref())?, &elo)?;
            let grid = parse_grid(&grid)?;
            let series = load_series(&io.input)?;
            let report = sweep(&series, &grid, &cfg, no_estimator)?;
            for (p, e) in &report.failures {
                eprintln!(
                    "error: grid point i1={} i2={} k={}: {e}",
                    u8::from(p.chance_hand),
                    u8::from(p.chance_flat),
                    p.k
                );
            }
            emit(io.output.as_deref(), &report.to_csv())?;
            if report.failures.is_empty() {
                Ok(())
            } else {
                Err(Failure::Data(format!("{} grid point(s) failed", report.failures.len())))
            }
        }
        Command::Timeseries { io, elo, players, mode, format } => {
            let cfg = elo_config(&load_config(io.config.as_deref())?, &elo)?;
            let series = load_series(&io.input)?;
            let ledger = skatelo::pipeline::replay(&series, &cfg, no_estimator)?;
            let ids: Vec<PlayerId> = if players.is_empty() {
                ledger.ratings().map(|(p, _)| p.clone()).collect()
            } else {
                players
                    .into_iter()
                    .map(PlayerId::new)
                    .collect::<Result<_, _>>()?
            };
            let mode = match mode {
                Mode::Contracted => TimeMode::Contracted,
                Mode::Expanded => TimeMode::Expanded,
            };
            let ts = timeseries_export(&ledger, &ids, mode)?;
            let text = match format {
                Format::Csv => ts.to_csv(),
                Format::Svg => ts.to_svg(),
            };
            emit(io.output.as_deref(), &text)
        }
        Command::Simulate {
            config,
            output,
            seed,
            player_count,
            series_count,
            chance_share,
            replay,
            elo,
        } => {
            let file = load_config(config.as_deref())?;
            let mut sim = file.sim.clone();
            sim.seed = seed;
            sim.player_count = player_count.unwrap_or(sim.player_count);
            sim.series_count = series_count.unwrap_or(sim.series_count);
            sim.chance_share = chance_share.unwrap_or(sim.chance_share);
            let cfg = elo_config(&file, &elo)?;
            let t = generate_tournament(&sim).map_err(|e| Failure::Usage(e.to_string()))?;
            let mut log = Vec::new();
            write_series(&mut log, &t.series)?;
            let log = String::from_utf8(log).expect("log is UTF-8");
            emit(output.as_deref(), &log)?;
            if replay {
                let ledger = skatelo::pipeline::replay(&t.series, &cfg, no_estimator)?;
                emit(None, &ranking_csv(&ranking(&ledger)))?;
            }
            Ok(())
        }
        Command::Validate { io } => {
            load_config(io.config.as_deref())?;
            let (_, report) = read_input(&io.input)?;
            emit(io.output.as_deref(), &report.render())
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
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
