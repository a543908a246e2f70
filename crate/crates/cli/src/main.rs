//! `esgport`: calibration, allocation, trade-off, WEL, and Monte Carlo
//! verification for the green/brown/market portfolio model.
//!
//! Output is machine-first: JSON for point results, CSV (UTF-8, LF) for
//! sweeps. Exit codes: 0 success, 1 validation failure, 2 I/O failure.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use esg_portfolio::allocation::{
    green_dominance, optimal_weights, tradeoff_curve, value_coefficient,
};
use esg_portfolio::estimation::{estimate_params, load_panel, PanelTickers};
use esg_portfolio::market::ModelParams;
use esg_portfolio::mc::verify_optimal;
use esg_portfolio::preferences::{
    indifference_curve_level, kappa_map, utility_eval, EsgScoreTable, RiskAversionProfile,
};
use esg_portfolio::wel::{q_merton, q_no_green};
use esg_portfolio::{Error, Result};

#[derive(Parser)]
#[command(name = "esgport", version, about = "ESG portfolio analytics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Calibrate model parameters from price and rate CSV files.
    Estimate(EstimateArgs),
    /// Closed-form optimal weights and value coefficient for one profile.
    Allocate(AllocateArgs),
    /// Sweep the green-brown risk-aversion trade-off over an alpha_b grid.
    Tradeoff(TradeoffArgs),
    /// Premium ratio m and the green-dominance thresholds.
    Dominance(DominanceArgs),
    /// Wealth-equivalent-loss sweeps (Merton strategy or no-green strategy).
    Wel(WelArgs),
    /// Allocation sweeps over alpha_g, alpha_b, or kappa.
    Sweep(SweepArgs),
    /// Indifference-curve data between the green and brown indexes.
    Indifference(IndifferenceArgs),
    /// Monte Carlo verification of the closed-form value function.
    Verify(VerifyArgs),
    /// Canonical figure-data CSVs from a parameter file.
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct EstimateArgs {
    /// Prices CSV with columns date,ticker,adj_close.
    #[arg(long)]
    prices: PathBuf,
    /// Rates CSV with columns date,yield_annualized.
    #[arg(long)]
    rates: PathBuf,
    /// Where to write the calibrated parameter JSON.
    #[arg(long)]
    out: PathBuf,
    /// Ticker of the market index in the prices file.
    #[arg(long, default_value = "SPX")]
    index_ticker: String,
    /// Ticker of the green stock.
    #[arg(long, default_value = "IDT")]
    green_ticker: String,
    /// Ticker of the brown stock.
    #[arg(long, default_value = "WMT")]
    brown_ticker: String,
}

/// Risk-aversion profile flags shared by several subcommands: either the
/// green/brown exponents are given explicitly, or they are derived from
/// kappa and an ESG score file.
#[derive(Args)]
struct ProfileArgs {
    #[arg(long, allow_hyphen_values = true)]
    alpha_m: f64,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "kappa")]
    alpha_g: Option<f64>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "kappa")]
    alpha_b: Option<f64>,
    /// ESG sensitivity; requires --scores.
    #[arg(long, requires = "scores")]
    kappa: Option<f64>,
    /// ESG score table JSON ({"eMarket":..,"eGreen":..,"eBrown":..}).
    #[arg(long)]
    scores: Option<PathBuf>,
}

impl ProfileArgs {
    fn resolve(&self) -> Result<RiskAversionProfile<f64>> {
        if let Some(kappa) = self.kappa {
            let scores = read_scores(self.scores.as_ref().expect("enforced by clap"))?;
            return kappa_map(self.alpha_m, kappa, &scores);
        }
        match (self.alpha_g, self.alpha_b) {
            (Some(g), Some(b)) => Ok(RiskAversionProfile::new(self.alpha_m, g, b)),
            _ => Err(Error::Domain(
                "provide either --alpha-g and --alpha-b, or --kappa with --scores".into(),
            )),
        }
    }
}

#[derive(Args)]
struct AllocateArgs {
    #[arg(long)]
    params: PathBuf,
    #[command(flatten)]
    profile: ProfileArgs,
}

#[derive(Args)]
struct TradeoffArgs {
    #[arg(long)]
    params: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    alpha_m: f64,
    /// Grid LO:HI:STEP over alpha_b (inclusive of both ends when STEP
    /// divides the range).
    #[arg(long, allow_hyphen_values = true)]
    alpha_b_grid: String,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DominanceArgs {
    #[arg(long)]
    params: PathBuf,
    #[arg(long, allow_hyphen_values = true, default_value_t = -2.5)]
    alpha_m: f64,
    #[arg(long, allow_hyphen_values = true)]
    alpha_g: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha_b: Option<f64>,
}

#[derive(Args)]
struct WelArgs {
    #[arg(long)]
    params: PathBuf,
    #[arg(long, allow_hyphen_values = true, default_value_t = -3.0)]
    alpha_m: f64,
    /// Horizon in periods.
    #[arg(short = 'T', long, default_value_t = 12.0)]
    horizon: f64,
    /// Kappa grid LO:HI:STEP for the Merton-strategy GWEL sweep.
    #[arg(long, allow_hyphen_values = true, required_unless_present = "no_green")]
    kappa_grid: Option<String>,
    /// Score table JSON used by the kappa sweep.
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Sweep the no-green GWEL over alpha_g instead.
    #[arg(long, requires = "alpha_g_grid")]
    no_green: bool,
    /// Grid LO:HI:STEP over alpha_g for --no-green.
    #[arg(long, allow_hyphen_values = true)]
    alpha_g_grid: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SweepVariable {
    AlphaG,
    AlphaB,
    Kappa,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    params: PathBuf,
    /// Which quantity the grid runs over.
    #[arg(long, value_enum)]
    vary: SweepVariable,
    /// Grid LO:HI:STEP over the varied quantity.
    #[arg(long, allow_hyphen_values = true)]
    grid: String,
    #[arg(long, allow_hyphen_values = true)]
    alpha_m: f64,
    /// Fixed green exponent (required when varying alpha-b).
    #[arg(long, allow_hyphen_values = true)]
    alpha_g: Option<f64>,
    /// Fixed brown exponent (required when varying alpha-g).
    #[arg(long, allow_hyphen_values = true)]
    alpha_b: Option<f64>,
    /// Score table JSON (required when varying kappa).
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IndifferenceArgs {
    /// Comma-separated kappa values, one curve per value.
    #[arg(long, value_delimiter = ',')]
    kappa_list: Vec<f64>,
    /// Utility level of the curves (negative).
    #[arg(long, allow_hyphen_values = true)]
    level: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = -3.0)]
    alpha_m: f64,
    #[arg(long)]
    scores: PathBuf,
    /// Market index value the curves are conditioned on.
    #[arg(long, default_value_t = 1.0)]
    x_m: f64,
    /// Grid LO:HI:STEP over the green index.
    #[arg(long, allow_hyphen_values = true, default_value = "0.5:2.0:0.01")]
    x_g_grid: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    params: PathBuf,
    #[command(flatten)]
    profile: ProfileArgs,
    /// Monte Carlo paths.
    #[arg(long, default_value_t = 100_000)]
    paths: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(short = 'T', long, default_value_t = 12.0)]
    horizon: f64,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Figure number, 1 through 11.
    #[arg(long)]
    figure: u32,
    #[arg(long)]
    params: PathBuf,
    /// Score table JSON (figures 7-10).
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => 2,
        Error::Csv(csv_err) if matches!(csv_err.kind(), csv::ErrorKind::Io(_)) => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Estimate(args) => cmd_estimate(args),
        Command::Allocate(args) => cmd_allocate(args),
        Command::Tradeoff(args) => cmd_tradeoff(args),
        Command::Dominance(args) => cmd_dominance(args),
        Command::Wel(args) => cmd_wel(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Indifference(args) => cmd_indifference(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Reproduce(args) => cmd_reproduce(args),
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(Error::Io)
}

fn read_params(path: &Path) -> Result<ModelParams<f64>> {
    ModelParams::from_json_reader(open(path)?)
}

fn read_scores(path: &Path) -> Result<EsgScoreTable<f64>> {
    EsgScoreTable::from_json_reader(open(path)?)
}

/// Parses LO:HI:STEP into grid points, inclusive of both ends when STEP
/// divides the range exactly. Descending grids use a negative step.
fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, step] = parts.as_slice() else {
        return Err(Error::Domain(format!("grid `{spec}` is not LO:HI:STEP")));
    };
    let parse = |name: &str, raw: &str| -> Result<f64> {
        raw.trim()
            .parse()
            .map_err(|_| Error::Domain(format!("grid {name} `{raw}` is not a number")))
    };
    let lo = parse("LO", lo)?;
    let hi = parse("HI", hi)?;
    let step = parse("STEP", step)?;
    if step == 0.0 || !step.is_finite() {
        return Err(Error::Domain("grid STEP must be nonzero".into()));
    }
    let span = (hi - lo) / step;
    if span < 0.0 {
        return Err(Error::Domain(format!(
            "grid `{spec}`: STEP moves away from HI"
        )));
    }
    let count = (span + 1e-9).floor() as usize;
    Ok((0..=count)
        .map(|k| {
            let v = lo + step * k as f64;
            if k == count && (v - hi).abs() <= step.abs() * 1e-9 {
                hi
            } else {
                v
            }
        })
        .collect())
}

/// Writes lines to the given path or to stdout.
fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            let mut file = File::create(path).map_err(Error::Io)?;
            file.write_all(content.as_bytes()).map_err(Error::Io)?;
        }
        None => {
            std::io::stdout()
                .write_all(content.as_bytes())
                .map_err(Error::Io)?;
        }
    }
    Ok(())
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let rendered = serde_json::to_string_pretty(value)?;
    println!("{rendered}");
    Ok(())
}

fn cmd_estimate(args: EstimateArgs) -> Result<()> {
    let tickers = PanelTickers::new(&args.index_ticker, &args.green_ticker, &args.brown_ticker);
    let panel = load_panel::<f64>(open(&args.prices)?, open(&args.rates)?, &tickers)?;
    let estimated = estimate_params(&panel)?;
    let json = estimated.params.to_json_string()?;
    emit(Some(&args.out), &format!("{json}\n"))?;
    print_json(&estimated)
}

fn cmd_allocate(args: AllocateArgs) -> Result<()> {
    let params = read_params(&args.params)?;
    let profile = args.profile.resolve()?;
    let allocation = optimal_weights(&params, &profile)?;
    let b = value_coefficient(&params, &profile)?;
    print_json(&serde_json::json!({
        "profile": profile,
        "allocation": allocation,
        "b": b,
    }))
}

fn cmd_tradeoff(args: TradeoffArgs) -> Result<()> {
    let params = read_params(&args.params)?;
    let grid = parse_grid(&args.alpha_b_grid)?;
    let curve = tradeoff_curve(&params, args.alpha_m, &grid)?;
    let mut csv = String::from("alphaB,alphaG,pi1,pi2,pi3,b\n");
    for point in curve {
        match point.solution {
            Some(sol) => {
                let w = sol.allocation;
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    point.alpha_b, sol.alpha_g, w.pi1, w.pi2, w.pi3, sol.b
                ));
            }
            // No admissible alpha_g at this alpha_b: keep the row, leave the
            // solved fields empty.
            None => csv.push_str(&format!("{},,,,,\n", point.alpha_b)),
        }
    }
    emit(args.out.as_deref(), &csv)
}

fn cmd_dominance(args: DominanceArgs) -> Result<()> {
    let params = read_params(&args.params)?;
    let profile = RiskAversionProfile::new(
        args.alpha_m,
        args.alpha_g.unwrap_or(args.alpha_m),
        args.alpha_b.unwrap_or(args.alpha_m),
    );
    let dominance = green_dominance(&params, &profile)?;
    print_json(&dominance)
}

fn cmd_wel(args: WelArgs) -> Result<()> {
    let params = read_params(&args.params)?;
    if args.no_green {
        let grid = parse_grid(args.alpha_g_grid.as_deref().expect("enforced by clap"))?;
        let mut csv = String::from("alphaG,q\n");
        for alpha_g in grid {
            let q = q_no_green(&params, alpha_g, args.horizon)?;
            csv.push_str(&format!("{alpha_g},{q}\n"));
        }
        return emit(args.out.as_deref(), &csv);
    }
    let scores_path = args.scores.as_ref().ok_or_else(|| {
        Error::Domain("--scores is required for the kappa sweep".into())
    })?;
    let scores = read_scores(scores_path)?;
    let grid = parse_grid(args.kappa_grid.as_deref().expect("enforced by clap"))?;
    let mut csv = String::from("kappa,alphaG,alphaB,q\n");
    for kappa in grid {
        let profile = kappa_map(args.alpha_m, kappa, &scores)?;
        let report = q_merton(&params, &profile, args.horizon)?;
        csv.push_str(&format!(
            "{kappa},{},{},{}\n",
            profile.alpha_g, profile.alpha_b, report.q
        ));
    }
    emit(args.out.as_deref(), &csv)
}

fn allocation_row(
    params: &ModelParams<f64>,
    profile: &RiskAversionProfile<f64>,
) -> Result<String> {
    let allocation = optimal_weights(params, profile)?;
    let b = value_coefficient(params, profile)?;
    Ok(format!(
        "{},{},{},{}",
        allocation.pi1, allocation.pi2, allocation.pi3, b
    ))
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let params = read_params(&args.params)?;
    let grid = parse_grid(&args.grid)?;
    let csv = match args.vary {
        SweepVariable::AlphaG => {
            let alpha_b = args.alpha_b.ok_or_else(|| {
                Error::Domain("--alpha-b is required when varying alpha-g".into())
            })?;
            let mut csv = String::from("alphaB,alphaG,pi1,pi2,pi3,b\n");
            for alpha_g in grid {
                let profile = RiskAversionProfile::new(args.alpha_m, alpha_g, alpha_b);
                csv.push_str(&format!(
                    "{alpha_b},{alpha_g},{}\n",
                    allocation_row(&params, &profile)?
                ));
            }
            csv
        }
        SweepVariable::AlphaB => {
            let alpha_g = args.alpha_g.ok_or_else(|| {
                Error::Domain("--alpha-g is required when varying alpha-b".into())
            })?;
            let mut csv = String::from("alphaB,alphaG,pi1,pi2,pi3,b\n");
            for alpha_b in grid {
                let profile = RiskAversionProfile::new(args.alpha_m, alpha_g, alpha_b);
                csv.push_str(&format!(
                    "{alpha_b},{alpha_g},{}\n",
                    allocation_row(&params, &profile)?
                ));
            }
            csv
        }
        SweepVariable::Kappa => {
            let scores_path = args.scores.as_ref().ok_or_else(|| {
                Error::Domain("--scores is required when varying kappa".into())
            })?;
            let scores = read_scores(scores_path)?;
            let mut csv = String::from("kappa,alphaG,alphaB,pi1,pi2,pi3,b\n");
            for kappa in grid {
                let profile = kappa_map(args.alpha_m, kappa, &scores)?;
                csv.push_str(&format!(
                    "{kappa},{},{},{}\n",
                    profile.alpha_g,
                    profile.alpha_b,
                    allocation_row(&params, &profile)?
                ));
            }
            csv
        }
    };
    emit(args.out.as_deref(), &csv)
}

fn cmd_indifference(args: IndifferenceArgs) -> Result<()> {
    if args.kappa_list.is_empty() {
        return Err(Error::Domain("--kappa-list needs at least one value".into()));
    }
    let scores = read_scores(&args.scores)?;
    let grid = parse_grid(&args.x_g_grid)?;
    let mut csv = String::from("kappa,xg,xb\n");
    for &kappa in &args.kappa_list {
        let profile = kappa_map(args.alpha_m, kappa, &scores)?;
        let curve = indifference_curve_level(&profile, args.level, args.x_m)?;
        for &x_g in &grid {
            let x_b = curve.x_b_for_x_g(x_g)?;
            csv.push_str(&format!("{kappa},{x_g},{x_b}\n"));
        }
    }
    emit(args.out.as_deref(), &csv)
}

fn cmd_verify(args: VerifyArgs) -> Result<()> {
    let params = read_params(&args.params)?;
    let profile = args.profile.resolve()?;
    let report = verify_optimal(&params, &profile, args.horizon, args.paths, args.seed)?;
    print_json(&report)
}

fn cmd_reproduce(args: ReproduceArgs) -> Result<()> {
    let params = read_params(&args.params)?;
    let scores = |args: &ReproduceArgs| -> Result<EsgScoreTable<f64>> {
        let path = args.scores.as_ref().ok_or_else(|| {
            Error::Domain(format!("figure {} needs --scores", args.figure))
        })?;
        read_scores(path)
    };
    let csv = match args.figure {
        // Green-aversion sweeps at two brown levels.
        1 | 3 => {
            let mut csv = String::from("alphaB,alphaG,pi1,pi2,pi3,b\n");
            for alpha_b in [-5.0, -3.0] {
                for alpha_g in parse_grid("-2.0:-0.02:0.02")? {
                    let profile = RiskAversionProfile::new(-2.5, alpha_g, alpha_b);
                    csv.push_str(&format!(
                        "{alpha_b},{alpha_g},{}\n",
                        allocation_row(&params, &profile)?
                    ));
                }
            }
            csv
        }
        // Brown-aversion sweeps at two green levels.
        2 | 4 => {
            let mut csv = String::from("alphaB,alphaG,pi1,pi2,pi3,b\n");
            for alpha_g in [-2.0, -0.5] {
                for alpha_b in parse_grid("-2.5:-5.0:-0.025")? {
                    let profile = RiskAversionProfile::new(-2.5, alpha_g, alpha_b);
                    csv.push_str(&format!(
                        "{alpha_b},{alpha_g},{}\n",
                        allocation_row(&params, &profile)?
                    ));
                }
            }
            csv
        }
        // Trade-off curves per market exponent.
        5 => {
            let mut csv = String::from("alphaM,alphaB,alphaG,pi1,pi2,pi3,b\n");
            for alpha_m in [-2.0, -3.0, -4.0, -5.0] {
                let grid = parse_grid(&format!("{alpha_m}:-8.0:-0.05"))?;
                for point in tradeoff_curve(&params, alpha_m, &grid)? {
                    match point.solution {
                        Some(sol) => {
                            let w = sol.allocation;
                            csv.push_str(&format!(
                                "{alpha_m},{},{},{},{},{},{}\n",
                                point.alpha_b, sol.alpha_g, w.pi1, w.pi2, w.pi3, sol.b
                            ));
                        }
                        None => csv.push_str(&format!("{alpha_m},{},,,,,\n", point.alpha_b)),
                    }
                }
            }
            csv
        }
        // Allocations along the alpha_m = -4 trade-off curve.
        6 => {
            let grid = parse_grid("-4.0:-8.0:-0.05")?;
            let mut csv = String::from("alphaB,alphaG,pi1,pi2,pi3,b\n");
            for point in tradeoff_curve(&params, -4.0, &grid)? {
                match point.solution {
                    Some(sol) => {
                        let w = sol.allocation;
                        csv.push_str(&format!(
                            "{},{},{},{},{},{}\n",
                            point.alpha_b, sol.alpha_g, w.pi1, w.pi2, w.pi3, sol.b
                        ));
                    }
                    None => csv.push_str(&format!("{},,,,,\n", point.alpha_b)),
                }
            }
            csv
        }
        // Indifference curves at a fixed utility level.
        7 => {
            let scores = scores(&args)?;
            let level = utility_eval(&RiskAversionProfile::uniform(-3.0), 1.0, 1.0, 1.0)?;
            let mut csv = String::from("kappa,xg,xb\n");
            for kappa in [0.0, 0.5, 1.0, 2.0] {
                let profile = kappa_map(-3.0, kappa, &scores)?;
                let curve = indifference_curve_level(&profile, level, 1.0)?;
                for x_g in parse_grid("0.5:2.0:0.01")? {
                    csv.push_str(&format!("{kappa},{x_g},{}\n", curve.x_b_for_x_g(x_g)?));
                }
            }
            csv
        }
        // Allocations as kappa rises, two market exponents.
        8 => {
            let scores = scores(&args)?;
            let mut csv = String::from("alphaM,kappa,alphaG,alphaB,pi1,pi2,pi3,b\n");
            for alpha_m in [-3.0, -5.0] {
                for kappa in parse_grid("0.0:2.0:0.02")? {
                    let profile = kappa_map(alpha_m, kappa, &scores)?;
                    csv.push_str(&format!(
                        "{alpha_m},{kappa},{},{},{}\n",
                        profile.alpha_g,
                        profile.alpha_b,
                        allocation_row(&params, &profile)?
                    ));
                }
            }
            csv
        }
        // Merton-strategy GWEL as kappa rises.
        9 | 10 => {
            let scores = scores(&args)?;
            let mut csv = String::from("alphaM,kappa,alphaG,alphaB,q\n");
            for alpha_m in [-3.0, -5.0] {
                for kappa in parse_grid("0.0:2.0:0.02")? {
                    let profile = kappa_map(alpha_m, kappa, &scores)?;
                    let report = q_merton(&params, &profile, 12.0)?;
                    csv.push_str(&format!(
                        "{alpha_m},{kappa},{},{},{}\n",
                        profile.alpha_g, profile.alpha_b, report.q
                    ));
                }
            }
            csv
        }
        // No-green GWEL over the green exponent.
        11 => {
            let mut csv = String::from("alphaG,q\n");
            for alpha_g in parse_grid("-5.0:-0.01:0.01")? {
                csv.push_str(&format!(
                    "{alpha_g},{}\n",
                    q_no_green(&params, alpha_g, 12.0)?
                ));
            }
            csv
        }
        other => {
            return Err(Error::Domain(format!(
                "figure {other} is not one of 1..=11"
            )));
        }
    };
    emit(args.out.as_deref(), &csv)
}
