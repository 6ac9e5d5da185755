//! Command-line front end. [`run`] takes argv and the standard streams so it
//! can be driven in-process by tests.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::dataset::{parse_dataset, InputFormat, LeagueDataset, SeasonLabel, Tier};
use crate::error::{Error, Result};
use crate::predict::{DrawRule, HomeAdvantageStrategy, PredictionOptions};
use crate::report::{self, ReportOptions, Section, SCHEMA_VERSION};
use crate::simulate::{simulate_league, FitnessRedraw, SecondTier, SimulationConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "league-stats",
    version,
    about = "Statistical analysis of round-robin league results"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Goal statistics, home advantage, histograms and per-season series.
    Describe(Common),
    /// Half-season correlation, match-day and seasonal autocorrelation.
    Fitness(Common),
    /// Persistent/stochastic variance decomposition and derived checks.
    Variance(Common),
    /// Rolling goal-difference prediction evaluated per match day.
    Predict(Common),
    /// Attack/defense slopes, split correlations, promoted teams.
    Structure(Common),
    /// Every analysis in one bundle.
    Report(Common),
    /// Generate a synthetic league as CSV on stdout.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DrawArg {
    /// Predicted |difference| < 0.5 calls a draw.
    Band,
    /// Always call a winner.
    Force,
}

#[derive(Args, Debug)]
struct Common {
    /// Match results CSV; stdin when absent or "-".
    #[arg(long)]
    input: Option<PathBuf>,
    /// Inclusive season range "A..B" (or a single season).
    #[arg(long)]
    seasons: Option<SeasonRange>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write the JSON report and plot CSVs into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use neutral goal differences in the match-day autocorrelation.
    #[arg(long)]
    neutralize: bool,
    #[arg(long, default_value_t = crate::structure::DEFAULT_ELITE_THRESHOLD, allow_negative_numbers = true)]
    elite_threshold: i64,
    /// Home-advantage term of the predictor: season | prior | constant:X.
    #[arg(long, default_value = "season")]
    home_adv: HomeAdvArg,
    #[arg(long, value_enum, default_value = "band")]
    draw_rule: DrawArg,
    /// Largest lag used in the exponential fit.
    #[arg(long, default_value_t = report::DEFAULT_FIT_MAX_LAG)]
    fit_max_lag: u32,
    /// Largest window length of the variance decomposition.
    #[arg(long)]
    t_max: Option<usize>,
    /// Accepted for uniformity; the analyses are deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, default_value_t = 18)]
    teams: usize,
    #[arg(long, default_value_t = 10)]
    n_seasons: usize,
    #[arg(long, default_value_t = 55)]
    attacks: u32,
    #[arg(long, default_value_t = 0.5)]
    efficiency: f64,
    /// Standard deviation of team fitness, goals per match.
    #[arg(long, default_value_t = 0.0)]
    fitness_sd: f64,
    /// persistent | per-season | ar1:RHO
    #[arg(long, default_value = "persistent")]
    redraw: RedrawArg,
    /// Home advantage in goals per match.
    #[arg(long, default_value_t = 0.0)]
    home: f64,
    /// Teams in a second tier (0 for none).
    #[arg(long, default_value_t = 0)]
    second_tier_teams: usize,
    /// Teams exchanged between tiers each season.
    #[arg(long, default_value_t = 2)]
    promoted: usize,
    /// Mean fitness gap of the second tier, goals per match.
    #[arg(long, default_value_t = 0.0)]
    tier_offset: f64,
    /// Clamp out-of-range efficiencies instead of failing.
    #[arg(long)]
    clamp: bool,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    first_season: i64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write league.csv and ground_truth.json into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Debug)]
struct SeasonRange(SeasonLabel, SeasonLabel);

impl FromStr for SeasonRange {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s.split_once("..").unwrap_or((s, s));
        let (a, b) = (a.trim(), b.trim().trim_start_matches('='));
        if a.is_empty() || b.is_empty() {
            return Err(format!("expected A..B, got {s:?}"));
        }
        Ok(SeasonRange(SeasonLabel::new(a), SeasonLabel::new(b)))
    }
}

#[derive(Clone, Copy, Debug)]
struct HomeAdvArg(HomeAdvantageStrategy);

impl FromStr for HomeAdvArg {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "season" => Ok(Self(HomeAdvantageStrategy::SeasonToDate)),
            "prior" => Ok(Self(HomeAdvantageStrategy::PriorSeason)),
            _ => match s.strip_prefix("constant:").map(str::parse::<f64>) {
                Some(Ok(x)) if x.is_finite() => Ok(Self(HomeAdvantageStrategy::Constant(x))),
                _ => Err(format!("expected season, prior or constant:X, got {s:?}")),
            },
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct RedrawArg(FitnessRedraw);

impl FromStr for RedrawArg {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "persistent" => Ok(Self(FitnessRedraw::Persistent)),
            "per-season" => Ok(Self(FitnessRedraw::PerSeason)),
            _ => match s.strip_prefix("ar1:").map(str::parse::<f64>) {
                Some(Ok(rho)) => Ok(Self(FitnessRedraw::Ar1 { rho })),
                _ => Err(format!("expected persistent, per-season or ar1:RHO, got {s:?}")),
            },
        }
    }
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_DATA
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code. Diagnostics go to `stderr`.
pub fn run<I, S>(argv: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            // --help and --version are reported as errors by clap but are not failures
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    let args: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(cli.command, &args, stdin, stdout) {
        Ok(()) => EXIT_OK,
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_numerical() {
                let _ = writeln!(
                    stderr,
                    "note: a numerical procedure failed; try fewer fit lags (--fit-max-lag) or more seasons"
                );
            }
            exit_code(&e)
        }
    }
}

fn execute(cmd: Command, args: &[String], stdin: &mut dyn Read, stdout: &mut dyn Write) -> Result<()> {
    let (name, common) = match cmd {
        Command::Simulate(s) => return simulate(s, stdout),
        Command::Describe(c) => ("describe", c),
        Command::Fitness(c) => ("fitness", c),
        Command::Variance(c) => ("variance", c),
        Command::Predict(c) => ("predict", c),
        Command::Structure(c) => ("structure", c),
        Command::Report(c) => ("report", c),
    };
    let (bytes, source) = read_input(common.input.as_deref(), stdin)?;
    let mut all = parse_dataset(bytes.as_slice(), InputFormat::Csv)?;
    if let Some(SeasonRange(a, b)) = &common.seasons {
        all = all.season_range(&(a.clone()..=b.clone()))?;
    }
    let opts = ReportOptions {
        neutralize: common.neutralize,
        fit_max_lag: common.fit_max_lag,
        t_max: common.t_max,
        prediction: PredictionOptions {
            home_advantage: common.home_adv.0,
            draw_rule: match common.draw_rule {
                DrawArg::Band => DrawRule::Band,
                DrawArg::Force => DrawRule::ForceDecision,
            },
        },
        elite_threshold: common.elite_threshold,
    };
    let section = analyse(name, &all, &opts)?;

    let metadata = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": name,
        "arguments": args,
        "input": {"source": source, "sha256": hex_digest(&bytes)},
    });
    emit(name, section, metadata, &common, stdout)
}

fn analyse(name: &str, all: &LeagueDataset, opts: &ReportOptions) -> Result<Section> {
    if name == "report" {
        return report::full_report(all, opts);
    }
    let top = all.tier(Tier::First)?;
    match name {
        "describe" => report::describe(&top),
        "fitness" => report::fitness(&top, opts.neutralize, opts.fit_max_lag),
        "variance" => report::variance(&top, opts.t_max),
        "predict" => report::predict(&top, opts.prediction),
        "structure" => report::structure(&top, all, opts.elite_threshold),
        _ => unreachable!("unknown analysis {name}"),
    }
}

fn read_input(path: Option<&Path>, stdin: &mut dyn Read) -> Result<(Vec<u8>, String)> {
    let mut bytes = Vec::new();
    match path {
        Some(p) if p != Path::new("-") => {
            bytes = fs::read(p)?;
            Ok((bytes, p.display().to_string()))
        }
        _ => {
            stdin.read_to_end(&mut bytes)?;
            Ok((bytes, "-".to_string()))
        }
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn emit(name: &str, section: Section, metadata: Value, common: &Common, stdout: &mut dyn Write) -> Result<()> {
    match &common.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            for t in &section.tables {
                fs::write(dir.join(t.file_name()), t.to_csv()?)?;
            }
            if common.format == Format::Json {
                let doc = document(&section, metadata);
                fs::write(dir.join(format!("{name}.json")), report::to_json_bytes(&doc)?)?;
            }
        }
        None => match common.format {
            Format::Json => stdout.write_all(&report::to_json_bytes(&document(&section, metadata))?)?,
            Format::Csv => {
                for (i, t) in section.tables.iter().enumerate() {
                    if i > 0 {
                        writeln!(stdout)?;
                    }
                    writeln!(stdout, "# {}", t.name)?;
                    stdout.write_all(t.to_csv()?.as_bytes())?;
                }
            }
        },
    }
    Ok(())
}

fn document(section: &Section, metadata: Value) -> Value {
    json!({
        "schema": SCHEMA_VERSION,
        "metadata": metadata,
        "results": section.json,
        "plot_data": section.tables.iter().map(|t| t.file_name()).collect::<Vec<_>>(),
    })
}

fn simulate(s: SimulateArgs, stdout: &mut dyn Write) -> Result<()> {
    let config = SimulationConfig {
        n_teams: s.teams,
        n_seasons: s.n_seasons,
        attacks_per_team: s.attacks,
        base_efficiency: s.efficiency,
        fitness_sd: s.fitness_sd,
        fitness_redraw: s.redraw.0,
        home_advantage: s.home,
        tier_offset: s.tier_offset,
        second_tier: (s.second_tier_teams > 0).then_some(SecondTier {
            n_teams: s.second_tier_teams,
            promoted: s.promoted,
        }),
        clamp_efficiency: s.clamp,
        first_season: s.first_season,
        seed: s.seed,
    };
    let (dataset, truth) = simulate_league(&config)?;
    let csv = dataset.to_csv()?;
    stdout.write_all(csv.as_bytes())?;
    if let Some(dir) = s.out {
        fs::create_dir_all(&dir)?;
        fs::write(dir.join("league.csv"), &csv)?;
        fs::write(dir.join("ground_truth.json"), report::to_json_bytes(&truth)?)?;
    }
    Ok(())
}
