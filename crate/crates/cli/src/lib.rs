//! The `stakewise` command line.
//!
//! [`run`] parses arguments, runs one command and writes its result to
//! `out` as JSON, CSV or a plain table. Exit codes: `0` success, `1` domain
//! error, `2` usage error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use stakewise_core::game::{self, Family, GameSpec, Strategy, StrategyFile};
use stakewise_core::horizon::{auto_mode, best_stake_dyn, best_strat_story, build_table_dyn, horizon_win_prob};
use stakewise_core::numeric::rational::{format_ratio, parse_rational};
use stakewise_core::report::{self, AnalyzeOptions, Measure};
use stakewise_core::search::{best_bk, kelly_contest, SearchOptions, SearchResult};
use stakewise_core::simulate::{monte_carlo, simulate_game, Policy, SimGame};
use stakewise_core::{Decimal, ModeChoice, Number, NumericMode, Rational, Scalar};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<stakewise_core::Error> for CliError {
    fn from(e: stakewise_core::Error) -> Self {
        match e {
            stakewise_core::Error::Parse(_) => CliError::Usage(e.to_string()),
            other => CliError::Domain(other.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn mode_arg(s: &str) -> Result<ModeChoice, String> {
    s.parse().map_err(|_| format!("invalid numeric mode `{s}` (auto, exact, decimal, float)"))
}

fn family_arg(s: &str) -> Result<Family, String> {
    s.parse().map_err(|_| format!("invalid strategy `{s}` (timid, bold, kelly:F, bk:F:C)"))
}

fn measure_arg(s: &str) -> Result<Measure, String> {
    s.parse().map_err(|_| format!("invalid measure `{s}` (winprob, ed, edw, pgf, pgfw)"))
}

fn case_arg(s: &str) -> Result<(Rational, usize, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [p, n, t] = parts.as_slice() else {
        return Err(format!("invalid case `{s}` (expected P:N:T)"));
    };
    let p = rational_arg(p)?;
    let n = n.parse().map_err(|_| format!("invalid N `{n}` in case `{s}`"))?;
    let t = t.parse().map_err(|_| format!("invalid T `{t}` in case `{s}`"))?;
    Ok((p, n, t))
}

#[derive(Parser, Debug)]
#[command(name = "stakewise", version, about = "Analyze and optimize integer-stake betting strategies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Numeric backend: auto, exact, decimal or float.
    #[arg(long, global = true, env = "HG_NUMERIC_MODE", default_value = "auto", value_parser = mode_arg)]
    mode: ModeChoice,
    /// Significant digits of decimal renderings.
    #[arg(long, global = true, default_value_t = report::DEFAULT_SIG_DIGITS, value_parser = clap::value_parser!(usize))]
    sig_digits: usize,
}

#[derive(Args, Debug)]
struct GameArgs {
    /// Round-win probability, as `a/b` or a decimal.
    #[arg(long, value_parser = rational_arg)]
    p: Rational,
    /// Exit capital N.
    #[arg(long)]
    goal: usize,
}

impl GameArgs {
    fn spec(&self) -> CliResult<GameSpec> {
        Ok(GameSpec::new(self.p.clone(), self.goal)?)
    }
}

#[derive(Args, Debug)]
struct StrategyArgs {
    /// Round-win probability; taken from the strategy file when omitted.
    #[arg(long, value_parser = rational_arg)]
    p: Option<Rational>,
    /// Exit capital; taken from the strategy file when omitted.
    #[arg(long)]
    goal: Option<usize>,
    /// timid, bold, kelly:F or bk:F:C.
    #[arg(long, value_parser = family_arg, conflicts_with = "strategy_file", required_unless_present = "strategy_file")]
    strategy: Option<Family>,
    /// JSON file {"N": .., "p": "a/b", "stakes": [..]}.
    #[arg(long)]
    strategy_file: Option<PathBuf>,
}

impl StrategyArgs {
    fn resolve(&self) -> CliResult<(GameSpec, Strategy)> {
        match (&self.strategy, &self.strategy_file) {
            (Some(family), _) => {
                let (Some(p), Some(goal)) = (&self.p, self.goal) else {
                    return Err(CliError::Usage("--p and --goal are required with --strategy".into()));
                };
                let spec = GameSpec::new(p.clone(), goal)?;
                let s = family.build(goal)?;
                game::require_valid(&spec, &s)?;
                Ok((spec, s))
            }
            (None, Some(path)) => {
                let (spec, s) = read_strategy_file(path)?;
                if self.p.as_ref().is_some_and(|p| p != spec.p()) || self.goal.is_some_and(|n| n != spec.goal()) {
                    return Err(CliError::Usage(format!(
                        "--p/--goal disagree with {}",
                        path.display()
                    )));
                }
                Ok((spec, s))
            }
            (None, None) => Err(CliError::Usage("one of --strategy or --strategy-file is required".into())),
        }
    }
}

fn read_strategy_file(path: &Path) -> CliResult<(GameSpec, Strategy)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let file: StrategyFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid strategy file {}: {e}", path.display())))?;
    Ok(file.into_parts()?)
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimal stake and survival probability at one capital.
    BestStake {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long)]
        capital: usize,
        #[arg(long)]
        horizon: usize,
    },
    /// Optimal stake table with the full horizon left.
    BestStrat {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long)]
        horizon: usize,
        /// Include every time step in JSON output.
        #[arg(long)]
        full: bool,
        /// Render table values as decimals instead of fractions.
        #[arg(long)]
        decimals: bool,
    },
    /// Optimal strategies for several P:N:T cases.
    BestStratStory {
        #[arg(long = "case", required = true, value_parser = case_arg)]
        cases: Vec<(Rational, usize, usize)>,
    },
    /// Win probability, durations or generating functions of a strategy.
    Analyze {
        #[command(flatten)]
        source: StrategyArgs,
        #[arg(long, value_parser = measure_arg)]
        measure: Measure,
        /// Series coefficients to print for generating functions.
        #[arg(long)]
        series: Option<usize>,
        /// Divide the win-restricted generating function by the win probability.
        #[arg(long)]
        normalized: bool,
        /// Write the analyzed strategy to this file.
        #[arg(long)]
        emit_strategy: Option<PathBuf>,
    },
    /// Probability of reaching the goal within a horizon under a fixed strategy.
    HorizonEval {
        #[command(flatten)]
        source: StrategyArgs,
        #[arg(long)]
        horizon: usize,
        #[arg(long)]
        capital: Option<usize>,
    },
    /// Best Breiman-Kelly pair (f, c) on a grid.
    SearchBk {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long)]
        capital: usize,
        /// Deadline in rounds; omit to maximize the unbounded win probability.
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, value_parser = rational_arg)]
        resolution: Rational,
        /// Write every grid point to this CSV file.
        #[arg(long)]
        grid: Option<PathBuf>,
    },
    /// Fastest Kelly fraction whose win probability reaches a confidence level.
    KellyContest {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long)]
        capital: usize,
        #[arg(long, value_parser = rational_arg)]
        resolution: Rational,
        #[arg(long, value_parser = rational_arg)]
        conf: Rational,
        /// Write every grid point to this CSV file.
        #[arg(long)]
        grid: Option<PathBuf>,
    },
    /// Seeded simulation of one game or a batch.
    Simulate {
        /// Round-win probability; 0 and 1 need --degenerate.
        #[arg(long, value_parser = rational_arg)]
        p: Rational,
        #[arg(long)]
        goal: usize,
        #[arg(long)]
        capital: usize,
        #[arg(long)]
        horizon: Option<usize>,
        /// timid, bold, kelly:F, bk:F:C or optimal.
        #[arg(long, conflicts_with = "strategy_file", required_unless_present = "strategy_file")]
        strategy: Option<String>,
        #[arg(long)]
        strategy_file: Option<PathBuf>,
        /// Number of games; prints a summary instead of a trajectory.
        #[arg(long)]
        games: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        degenerate: bool,
        /// Run the batch on one thread.
        #[arg(long)]
        serial: bool,
    },
    /// Start the HTTP advisor.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Persist sessions to this JSON file.
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
}

/// Rendered result of one command.
struct Output {
    json: Value,
    table: String,
    csv: String,
}

struct Ctx {
    mode: ModeChoice,
    sig: usize,
}

pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { out } else { err };
            let _ = sink.write_all(text.as_bytes());
            return if code == 0 { 0 } else { 2 };
        }
    };
    if cli.sig_digits == 0 {
        let _ = writeln!(err, "error: --sig-digits must be at least 1");
        return 2;
    }
    let ctx = Ctx {
        mode: cli.mode,
        sig: cli.sig_digits,
    };
    let result = match cli.command {
        Command::Serve { port, host, snapshot } => serve(&host, port, snapshot).map(|()| None),
        cmd => execute(cmd, &ctx).map(Some),
    };
    match result {
        Ok(None) => 0,
        Ok(Some(o)) => {
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&o.json).expect("json") + "\n",
                Format::Csv => o.csv,
                Format::Table => o.table,
            };
            match out.write_all(text.as_bytes()) {
                Ok(()) => 0,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    1
                }
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn serve(host: &str, port: u16, snapshot: Option<PathBuf>) -> CliResult<()> {
    let ip: std::net::IpAddr = host
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid host `{host}`")))?;
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(stakewise_service::serve((ip, port).into(), snapshot))?;
    Ok(())
}

fn execute(cmd: Command, ctx: &Ctx) -> CliResult<Output> {
    match cmd {
        Command::BestStake { game, capital, horizon } => best_stake(&game.spec()?, capital, horizon, ctx),
        Command::BestStrat {
            game,
            horizon,
            full,
            decimals,
        } => best_strat(&game.spec()?, horizon, full, decimals, ctx),
        Command::BestStratStory { cases } => story(&cases, ctx),
        Command::Analyze {
            source,
            measure,
            series,
            normalized,
            emit_strategy,
        } => {
            let (spec, s) = source.resolve()?;
            if let Some(path) = emit_strategy {
                let text = serde_json::to_string_pretty(&StrategyFile::new(&spec, &s)).expect("json");
                std::fs::write(&path, text + "\n")?;
            }
            analyze(&spec, &s, measure, series, normalized, ctx)
        }
        Command::HorizonEval { source, horizon, capital } => {
            let (spec, s) = source.resolve()?;
            horizon_eval(&spec, &s, horizon, capital, ctx)
        }
        Command::SearchBk {
            game,
            capital,
            horizon,
            resolution,
            grid,
        } => {
            let opts = search_options(ctx, grid.is_some());
            let r = best_bk(&game.spec()?, capital, horizon, &resolution, opts)?;
            search_output(&r, grid.as_deref(), ctx)
        }
        Command::KellyContest {
            game,
            capital,
            resolution,
            conf,
            grid,
        } => {
            let opts = search_options(ctx, grid.is_some());
            let r = kelly_contest(&game.spec()?, capital, &resolution, &conf, opts)?;
            search_output(&r, grid.as_deref(), ctx)
        }
        Command::Simulate {
            p,
            goal,
            capital,
            horizon,
            strategy,
            strategy_file,
            games,
            seed,
            degenerate,
            serial,
        } => {
            let sim = SimArgs {
                p,
                goal,
                capital,
                horizon,
                strategy,
                strategy_file,
                games,
                seed,
                degenerate,
                parallel: !serial,
            };
            simulate(sim, ctx)
        }
        Command::Serve { .. } => unreachable!("handled by run"),
    }
}

fn check_horizon(horizon: usize) -> CliResult<()> {
    if horizon < 1 {
        return Err(CliError::Domain("horizon must be at least 1".into()));
    }
    Ok(())
}

fn text_of(n: &Number, sig: usize) -> String {
    match n.exact() {
        Some(r) => {
            let exact = report::short_ratio(r);
            if exact.len() > 40 {
                format!("{} (exact)", n.decimal(sig))
            } else {
                format!("{exact} ({})", n.decimal(sig))
            }
        }
        None => n.decimal(sig),
    }
}

fn csv_line(fields: &[String]) -> String {
    let quoted: Vec<String> = fields
        .iter()
        .map(|f| {
            if f.contains([',', '"', '\n']) {
                format!("\"{}\"", f.replace('"', "\"\""))
            } else {
                f.clone()
            }
        })
        .collect();
    quoted.join(",") + "\n"
}

fn best_stake(spec: &GameSpec, capital: usize, horizon: usize, ctx: &Ctx) -> CliResult<Output> {
    let mode = ctx.mode.resolve(|| auto_mode(spec, horizon));
    let (stake, value) = best_stake_dyn(spec, capital, horizon, mode)?;
    let json = json!({
        "spec": report::spec(spec),
        "capital": capital,
        "horizon": horizon,
        "stake": stake,
        "value": report::number(&value, ctx.sig),
        "numeric": report::mode_meta(mode),
    });
    let table = format!("stake  {stake}\nvalue  {}\nmode   {}\n", text_of(&value, ctx.sig), mode.name());
    let csv = csv_line(&["stake".into(), "value".into(), "decimal".into()])
        + &csv_line(&[stake.to_string(), value.canonical(), value.decimal(ctx.sig)]);
    Ok(Output { json, table, csv })
}

fn best_strat(spec: &GameSpec, horizon: usize, full: bool, decimals: bool, ctx: &Ctx) -> CliResult<Output> {
    check_horizon(horizon)?;
    let mode = ctx.mode.resolve(|| auto_mode(spec, horizon));
    let t = build_table_dyn(spec, horizon, mode)?;
    let n = spec.goal();
    let render = |v: &Number| if decimals { json!(v.decimal(ctx.sig)) } else { report::number(v, ctx.sig) };
    let stakes: Vec<usize> = (1..n).map(|i| t.stake(i, horizon).expect("interior")).collect();
    let values: Vec<Value> = (1..n).map(|i| render(&t.value(i, horizon))).collect();
    let mut json = json!({
        "spec": report::spec(spec),
        "horizon": horizon,
        "numeric": report::mode_meta(mode),
        "stakes": stakes,
        "values": values,
    });
    if full {
        json["table"] = report::table(t.as_ref(), ctx.sig)["rows"].clone();
    }
    let mut table = format!("p = {}, N = {n}, T = {horizon}, mode {}\n", format_ratio(spec.p()), mode.name());
    let _ = writeln!(table, "{:>6} {:>6}  value", "i", "stake");
    for i in 1..n {
        let _ = writeln!(table, "{i:>6} {:>6}  {}", stakes[i - 1], text_of(&t.value(i, horizon), ctx.sig));
    }
    let mut buf = Vec::new();
    report::table_csv(t.as_ref(), decimals.then_some(ctx.sig), &mut buf)?;
    Ok(Output {
        json,
        table,
        csv: String::from_utf8(buf).expect("utf-8"),
    })
}

fn story(cases: &[(Rational, usize, usize)], ctx: &Ctx) -> CliResult<Output> {
    let items = best_strat_story(cases, ctx.mode);
    let json = report::story(&items, ctx.sig);
    let mut table = String::new();
    let mut csv = csv_line(&["p", "N", "horizon", "capital", "stake", "value"].map(String::from));
    for item in &items {
        let head = format!("p = {}, N = {}, T = {}", format_ratio(&item.p), item.goal, item.horizon);
        match &item.outcome {
            Ok(sec) => {
                let _ = writeln!(table, "{head}, mode {}", sec.mode.name());
                let _ = writeln!(table, "  stakes {:?}", sec.stakes);
                for (k, (x, v)) in sec.stakes.iter().zip(&sec.values).enumerate() {
                    csv += &csv_line(&[
                        format_ratio(&item.p),
                        item.goal.to_string(),
                        item.horizon.to_string(),
                        (k + 1).to_string(),
                        x.to_string(),
                        v.canonical(),
                    ]);
                }
            }
            Err(e) => {
                let _ = writeln!(table, "{head}: error: {e}");
            }
        }
    }
    Ok(Output { json, table, csv })
}

fn analyze(
    spec: &GameSpec,
    s: &Strategy,
    measure: Measure,
    series: Option<usize>,
    normalized: bool,
    ctx: &Ctx,
) -> CliResult<Output> {
    let mode = ctx.mode.resolve(|| NumericMode::Exact);
    let opts = AnalyzeOptions {
        mode,
        series,
        normalized,
        sig: ctx.sig,
    };
    let json = report::analyze(spec, s, measure, opts)?;
    let values = json["values"].as_array().expect("values");
    let is_pgf = matches!(measure, Measure::Pgf | Measure::PgfWin);
    let short = |v: &Value| -> String {
        let text = v.as_str().unwrap_or("undefined");
        match parse_rational(text) {
            Ok(r) if mode == NumericMode::Exact => report::short_ratio(&r),
            Ok(r) => stakewise_core::numeric::rational::to_decimal(&r, ctx.sig),
            Err(_) => text.to_string(),
        }
    };
    let mut table = String::new();
    let mut csv = String::new();
    if is_pgf {
        csv += &csv_line(&["capital".into(), "pgf".into(), "series".into()]);
        for (k, v) in values.iter().enumerate() {
            let capital = k + 1;
            if v.is_null() {
                let _ = writeln!(table, "capital {capital}: undefined");
                csv += &csv_line(&[capital.to_string(), String::new(), String::new()]);
                continue;
            }
            let series_text = v.get("series").and_then(Value::as_array).map(|c| {
                let items: Vec<String> = c.iter().map(&short).collect();
                format!("[{}]", items.join(", "))
            });
            match &series_text {
                Some(st) => {
                    let _ = writeln!(table, "capital {capital}: {st}");
                }
                None => {
                    let _ = writeln!(table, "capital {capital}: {}", v["text"].as_str().unwrap_or(""));
                }
            }
            csv += &csv_line(&[
                capital.to_string(),
                v["text"].as_str().unwrap_or("").to_string(),
                series_text.unwrap_or_default(),
            ]);
        }
    } else {
        let items: Vec<String> = json["list"].as_array().expect("list").iter().map(&short).collect();
        let _ = writeln!(table, "[{}]", items.join(", "));
        csv += &csv_line(&["capital".into(), "value".into(), "decimal".into()]);
        for (k, v) in values.iter().enumerate() {
            let (value, decimal) = if v.is_null() {
                (String::new(), String::new())
            } else {
                (
                    v["value"].as_str().unwrap_or("").to_string(),
                    v["decimal"].as_str().unwrap_or("").to_string(),
                )
            };
            csv += &csv_line(&[(k + 1).to_string(), value, decimal]);
        }
    }
    Ok(Output { json, table, csv })
}

fn fixed_horizon_values(spec: &GameSpec, s: &Strategy, horizon: usize, mode: NumericMode) -> CliResult<Vec<Number>> {
    fn go<S: Scalar>(spec: &GameSpec, s: &Strategy, horizon: usize) -> CliResult<Vec<Number>> {
        Ok(horizon_win_prob::<S>(spec, s, horizon)?.iter().map(Scalar::to_number).collect())
    }
    match mode {
        NumericMode::Exact => go::<Rational>(spec, s, horizon),
        NumericMode::Decimal => go::<Decimal>(spec, s, horizon),
        NumericMode::Float => go::<f64>(spec, s, horizon),
    }
}

fn horizon_eval(spec: &GameSpec, s: &Strategy, horizon: usize, capital: Option<usize>, ctx: &Ctx) -> CliResult<Output> {
    if let Some(c) = capital {
        spec.check_capital(c)?;
    }
    let mode = ctx.mode.resolve(|| auto_mode(spec, horizon));
    let values = fixed_horizon_values(spec, s, horizon, mode)?;
    let rows: Vec<(usize, &Number)> = match capital {
        Some(c) => vec![(c, &values[c - 1])],
        None => values.iter().enumerate().map(|(k, v)| (k + 1, v)).collect(),
    };
    let json = json!({
        "spec": report::spec(spec),
        "horizon": horizon,
        "stakes": s.stakes(),
        "numeric": report::mode_meta(mode),
        "values": rows.iter().map(|(c, v)| json!({"capital": c, "value": report::number(v, ctx.sig)})).collect::<Vec<_>>(),
    });
    let mut table = String::new();
    let mut csv = csv_line(&["capital".into(), "value".into(), "decimal".into()]);
    for (c, v) in &rows {
        let _ = writeln!(table, "{c:>6}  {}", text_of(v, ctx.sig));
        csv += &csv_line(&[c.to_string(), v.canonical(), v.decimal(ctx.sig)]);
    }
    Ok(Output { json, table, csv })
}

fn search_options(ctx: &Ctx, keep_grid: bool) -> SearchOptions {
    SearchOptions {
        mode: ctx.mode.resolve(|| NumericMode::Decimal),
        verify_exact: true,
        keep_grid,
    }
}

fn search_output(r: &SearchResult, grid: Option<&Path>, ctx: &Ctx) -> CliResult<Output> {
    if let Some(path) = grid {
        let file = std::fs::File::create(path)?;
        report::grid_csv(&r.grid, ctx.sig, file)?;
    }
    let json = report::search(r, ctx.sig);
    let b = &r.best;
    let mut table = String::new();
    let _ = writeln!(table, "f                       {}", format_ratio(&b.f));
    if let Some(c) = &b.c {
        let _ = writeln!(table, "c                       {}", format_ratio(c));
    }
    if let Some(v) = &b.horizon_win_prob {
        let _ = writeln!(table, "horizon_win_prob        {}", text_of(v, ctx.sig));
    }
    let _ = writeln!(table, "win_prob                {}", text_of(&b.win_prob, ctx.sig));
    let _ = writeln!(table, "exp_duration            {}", text_of(&b.exp_duration, ctx.sig));
    if let Some(d) = &b.exp_duration_given_win {
        let _ = writeln!(table, "exp_duration_given_win  {}", text_of(d, ctx.sig));
    }
    let _ = writeln!(table, "evaluations             {}", r.evaluations);
    if r.constraint_unmet {
        let _ = writeln!(table, "constraint unmet: no fraction reaches the confidence level");
    }
    let mut buf = Vec::new();
    let grid_points = if r.grid.is_empty() { std::slice::from_ref(&r.best) } else { &r.grid[..] };
    report::grid_csv(grid_points, ctx.sig, &mut buf)?;
    Ok(Output {
        json,
        table,
        csv: String::from_utf8(buf).expect("utf-8"),
    })
}

struct SimArgs {
    p: Rational,
    goal: usize,
    capital: usize,
    horizon: Option<usize>,
    strategy: Option<String>,
    strategy_file: Option<PathBuf>,
    games: Option<usize>,
    seed: Option<u64>,
    degenerate: bool,
    parallel: bool,
}

fn simulate(a: SimArgs, ctx: &Ctx) -> CliResult<Output> {
    if let Some(t) = a.horizon {
        check_horizon(t)?;
    }
    let game = if a.degenerate {
        SimGame::degenerate(a.p.clone(), a.goal)?
    } else {
        SimGame::new(&GameSpec::new(a.p.clone(), a.goal)?)
    };
    let policy = match (&a.strategy, &a.strategy_file) {
        (Some(name), _) if name == "optimal" => {
            let Some(t) = a.horizon else {
                return Err(CliError::Usage("--strategy optimal needs --horizon".into()));
            };
            let spec = GameSpec::new(a.p.clone(), a.goal)?;
            let mode = ctx.mode.resolve(|| auto_mode(&spec, t));
            Policy::Optimal(build_table_dyn(&spec, t, mode)?)
        }
        (Some(name), _) => Policy::Fixed(family_arg(name).map_err(CliError::Usage)?.build(a.goal)?),
        (None, Some(path)) => {
            let (spec, s) = read_strategy_file(path)?;
            if spec.goal() != a.goal || spec.p() != &a.p {
                return Err(CliError::Usage(format!("--p/--goal disagree with {}", path.display())));
            }
            Policy::Fixed(s)
        }
        (None, None) => return Err(CliError::Usage("one of --strategy or --strategy-file is required".into())),
    };
    match a.games {
        None => {
            let seed = a.seed.unwrap_or(0);
            let t = simulate_game(&game, &policy, a.capital, a.horizon, seed)?;
            let json = serde_json::to_value(&t).expect("json");
            let mut table = format!("rng {} seed {}\n", t.rng, t.seed);
            let mut csv = csv_line(&["round", "capital", "stake", "won"].map(String::from));
            for (k, r) in t.rounds.iter().enumerate() {
                let _ = writeln!(table, "{:>5}  capital {:>5}  stake {:>5}  {}", k + 1, r.capital, r.stake, if r.won { "win" } else { "lose" });
                csv += &csv_line(&[(k + 1).to_string(), r.capital.to_string(), r.stake.to_string(), r.won.to_string()]);
            }
            let _ = writeln!(table, "exit {:?} with {} after {} rounds", t.exit, t.final_capital, t.duration);
            Ok(Output { json, table, csv })
        }
        Some(n) => {
            let Some(seed) = a.seed else {
                return Err(CliError::Usage("--seed is required with --games".into()));
            };
            let s = monte_carlo(&game, &policy, a.capital, a.horizon, n, seed, a.parallel)?;
            let json = serde_json::to_value(&s).expect("json");
            let mut table = String::new();
            let _ = writeln!(table, "rng {} seed {}, {} games", s.rng, s.seed, s.games);
            let _ = writeln!(table, "win rate       {:.6} ± {:.6}", s.win_rate, s.win_rate_se);
            let _ = writeln!(table, "mean duration  {:.6} ± {:.6}", s.mean_duration, s.duration_se);
            let _ = writeln!(table, "wins {}  losses {}  expired {}", s.wins, s.losses, s.expired);
            let csv = csv_line(
                &["rng", "seed", "games", "wins", "losses", "expired", "win_rate", "win_rate_se", "mean_duration", "duration_se"]
                    .map(String::from),
            ) + &csv_line(&[
                s.rng.to_string(),
                s.seed.to_string(),
                s.games.to_string(),
                s.wins.to_string(),
                s.losses.to_string(),
                s.expired.to_string(),
                s.win_rate.to_string(),
                s.win_rate_se.to_string(),
                s.mean_duration.to_string(),
                s.duration_se.to_string(),
            ]);
            Ok(Output { json, table, csv })
        }
    }
}
