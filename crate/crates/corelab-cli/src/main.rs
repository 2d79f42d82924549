//! Command-line front end for the corelab market toolkit.
//!
//! Subcommands cover the ascending auction (with trace rendering), the
//! exact stable solver and its brute-force oracle, outcome checking and
//! certification, graph-gadget construction and verification, the bounded
//! tie checker, the budget misreport experiment, and seeded instance
//! generation.
//!
//! Exit codes: 0 success, 1 input or validation error, 2 resource cap
//! exceeded, 3 internal invariant breach.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use corelab::auction::{
    run_auction, run_auction_all_branches, StepThreePolicy, TraceRow, DEFAULT_BRANCH_CAP,
};
use corelab::gen::{random_market, random_market_rich_budgets, GenLimits};
use corelab::hardness::{verify_reduction, CubicGraph, GadgetMarket};
use corelab::market::{
    good_label, good_set_label, Assignment, Market, Outcome, OutcomeDoc, PriceVector,
};
use corelab::rational::{format_rational, parse_rational};
use corelab::solver::milp::{certify_outcome, default_epsilon};
use corelab::solver::{
    brute_force_oracle, solve_welfare_max_core, OracleOptions, SolveOptions, DEFAULT_MAX_NODES,
};
use corelab::strategy::{
    general_position_check, misreport_experiment, GenPosOptions, GenPosVerdict, MechanismKind,
};
use corelab::Error;

#[derive(Parser)]
#[command(
    name = "corelab",
    version,
    about = "Budget-aware assignment markets: auctions, stable outcomes, hardness gadgets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the ascending auction on a market file and print its trace.
    Auction(AuctionArgs),
    /// Find a welfare-maximizing stable outcome of a market file.
    Solve(SolveArgs),
    /// Check an outcome file against a market: stability, equilibrium,
    /// certification.
    Check(CheckArgs),
    /// Build or verify a market constructed from a cubic graph.
    #[command(subcommand)]
    Gadget(GadgetCommand),
    /// Bounded tie check over alternating walks of a market.
    Genpos(GenposArgs),
    /// Budget misreport experiment on a market with a left-out bidder.
    Ic(IcArgs),
    /// Generate a seeded random market as JSON on stdout.
    Gen(GenArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Tsv,
    Json,
}

#[derive(Args)]
struct AuctionArgs {
    /// Market JSON file.
    market: PathBuf,
    /// Conflict policy: `first`, `fixed:<comma-separated 1-based ids>`, or
    /// `branches` to enumerate every policy choice.
    #[arg(long, default_value = "first")]
    policy: String,
    /// Shorthand for `--policy branches`.
    #[arg(long)]
    branches: bool,
    /// Cap on enumerated policy paths in branches mode.
    #[arg(long, default_value_t = DEFAULT_BRANCH_CAP)]
    max_paths: usize,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct SolveArgs {
    /// Market JSON file.
    market: PathBuf,
    /// Use the exhaustive integer-price oracle instead of the solver.
    #[arg(long)]
    oracle: bool,
    /// Node cap for the solver (overrides CORELAB_MAX_NODES).
    #[arg(long)]
    max_nodes: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct CheckArgs {
    /// Market JSON file.
    market: PathBuf,
    /// Outcome JSON file (assignment plus prices).
    outcome: PathBuf,
    /// Strictness constant for the certification rows, in (0, 1).
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Subcommand)]
enum GadgetCommand {
    /// Emit the market for a cubic graph as JSON on stdout.
    Build(GadgetBuildArgs),
    /// Re-derive every numeric claim of the construction on a graph.
    Verify(GadgetVerifyArgs),
}

#[derive(Args)]
struct GadgetBuildArgs {
    /// Edge list file: one `u v` pair per line, `#` comments.
    edges: PathBuf,
    /// Independent-set size for the reported gains threshold.
    #[arg(long, default_value_t = 1)]
    k: i64,
}

#[derive(Args)]
struct GadgetVerifyArgs {
    /// Edge list file: one `u v` pair per line, `#` comments.
    edges: PathBuf,
    /// Independent-set size the threshold should single out.
    #[arg(long, default_value_t = 1)]
    k: i64,
}

#[derive(Args)]
struct GenposArgs {
    /// Market JSON file.
    market: PathBuf,
    /// Cap on edges per walk.
    #[arg(long, default_value_t = corelab::strategy::DEFAULT_MAX_WALK_EDGES)]
    max_walk_edges: usize,
    /// Cap on completed walks.
    #[arg(long, default_value_t = corelab::strategy::DEFAULT_MAX_WALKS)]
    max_walks: u64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MechanismArg {
    Both,
    Auction,
    Solver,
}

#[derive(Args)]
struct IcArgs {
    /// Market JSON file; defaults to the built-in squeeze-out market.
    market: Option<PathBuf>,
    /// Which mechanism to study.
    #[arg(long, value_enum, default_value_t = MechanismArg::Both)]
    mechanism: MechanismArg,
    /// Budget the left-out bidder reports in the second run.
    #[arg(long, default_value_t = 2)]
    budget: i64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum bidder count; 0 emits an empty market document.
    #[arg(long, default_value_t = 4)]
    bidders: usize,
    /// Maximum good count.
    #[arg(long, default_value_t = 3)]
    goods: usize,
    /// Values are drawn from 0..=this.
    #[arg(long, default_value_t = 6)]
    max_value: i64,
    /// Budgets are drawn from 1..=this.
    #[arg(long, default_value_t = 6)]
    max_budget: i64,
    /// Reserve prices are drawn from 0..=this.
    #[arg(long, default_value_t = 0)]
    reserves: i64,
    /// Force every budget above every value.
    #[arg(long)]
    rich: bool,
}

fn main() -> ExitCode {
    // Die quietly when stdout is a pipe that closes early (e.g. `| head`).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(match err.downcast_ref::<Error>() {
                Some(Error::ResourceLimit(_)) => 2,
                Some(Error::Internal(_)) | Some(Error::MechanismContract(_)) => 3,
                _ => 1,
            })
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Auction(args) => cmd_auction(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Check(args) => cmd_check(args),
        Command::Gadget(GadgetCommand::Build(args)) => cmd_gadget_build(args),
        Command::Gadget(GadgetCommand::Verify(args)) => cmd_gadget_verify(args),
        Command::Genpos(args) => cmd_genpos(args),
        Command::Ic(args) => cmd_ic(args),
        Command::Gen(args) => cmd_gen(args),
    }
}

fn load_market(path: &Path) -> anyhow::Result<Market> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading market file {}", path.display()))?;
    let market: Market = serde_json::from_str(&text)
        .map_err(|e| Error::invalid(format!("parsing {}: {e}", path.display())))?;
    Ok(market)
}

fn assignment_text(assignment: &Assignment) -> String {
    (0..assignment.slots().len())
        .map(|i| format!("{}->{}", i + 1, good_label(assignment.good_of(i))))
        .collect::<Vec<_>>()
        .join(" ")
}

fn price_text(prices: &PriceVector, m: usize) -> String {
    let inner: Vec<String> = (1..=m).map(|j| format_rational(&prices.get(j))).collect();
    format!("({})", inner.join(","))
}

fn integer_price_text(prices: &[i64]) -> String {
    let inner: Vec<String> = prices.iter().map(|p| p.to_string()).collect();
    format!("({})", inner.join(","))
}

fn price_strings(prices: &PriceVector, m: usize) -> Vec<String> {
    (1..=m).map(|j| format_rational(&prices.get(j))).collect()
}

fn parse_policy(args: &AuctionArgs) -> anyhow::Result<Option<StepThreePolicy>> {
    if args.branches || args.policy == "branches" {
        return Ok(None);
    }
    if args.policy == "first" {
        return Ok(Some(StepThreePolicy::FirstIndex));
    }
    if let Some(list) = args.policy.strip_prefix("fixed:") {
        let mut script = Vec::new();
        for field in list.split(',') {
            let id: usize = field
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad bidder id {field:?} in policy")))?;
            if id == 0 {
                return Err(Error::invalid("bidder ids in a policy script are 1-based").into());
            }
            script.push(id - 1);
        }
        if script.is_empty() {
            return Err(Error::invalid("empty policy script").into());
        }
        return Ok(Some(StepThreePolicy::FixedScript(script)));
    }
    Err(Error::invalid(format!(
        "unknown policy {:?}; expected first, fixed:<ids>, or branches",
        args.policy
    ))
    .into())
}

fn cmd_auction(args: AuctionArgs) -> anyhow::Result<ExitCode> {
    let market = load_market(&args.market)?;
    match parse_policy(&args)? {
        Some(policy) => {
            let run = run_auction(&market, &policy)?;
            let core = market.is_core(&run.outcome);
            match args.format {
                Format::Table => {
                    print!("{}", render_trace_table(&market, &run.trace.rows));
                    println!("assignment: {}", assignment_text(&run.outcome.assignment));
                    println!(
                        "prices: {}",
                        price_text(&run.outcome.prices, market.n_goods())
                    );
                    println!("welfare: {}", market.welfare(&run.outcome.assignment));
                    println!(
                        "gains from trade: {}",
                        market.gains_from_trade(&run.outcome.assignment)
                    );
                    println!(
                        "certificate: {}",
                        if run.certificate {
                            "clean (every conflict set a singleton)"
                        } else {
                            "branching occurred"
                        }
                    );
                    println!("core: {}", if core { "yes" } else { "no" });
                }
                Format::Tsv => {
                    print!("{}", render_trace_tsv(&market, &run.trace.rows));
                }
                Format::Json => {
                    let doc = json!({
                        "rows": trace_rows_json(&run.trace.rows),
                        "assignment": run.outcome.assignment.slots(),
                        "prices": price_strings(&run.outcome.prices, market.n_goods()),
                        "welfare": market.welfare(&run.outcome.assignment),
                        "gains_from_trade": market.gains_from_trade(&run.outcome.assignment),
                        "certificate": run.certificate,
                        "core": core,
                    });
                    println!("{}", serde_json::to_string_pretty(&doc)?);
                }
            }
        }
        None => {
            let branches = run_auction_all_branches(&market, args.max_paths)?;
            match args.format {
                Format::Json => {
                    let outcomes: Vec<_> = branches
                        .outcomes
                        .iter()
                        .map(|o| {
                            json!({
                                "assignment": o.assignment.slots(),
                                "prices": price_strings(&o.prices, market.n_goods()),
                                "welfare": market.welfare(&o.assignment),
                            })
                        })
                        .collect();
                    let doc = json!({
                        "outcomes": outcomes,
                        "paths_explored": branches.paths_explored,
                    });
                    println!("{}", serde_json::to_string_pretty(&doc)?);
                }
                _ => {
                    println!(
                        "{} distinct outcome(s) over {} path(s)",
                        branches.outcomes.len(),
                        branches.paths_explored
                    );
                    for outcome in &branches.outcomes {
                        println!(
                            "welfare {:>3}  prices {}  assignment {}",
                            market.welfare(&outcome.assignment),
                            price_text(&outcome.prices, market.n_goods()),
                            assignment_text(&outcome.assignment)
                        );
                    }
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn trace_cells(market: &Market, row: &TraceRow) -> Vec<String> {
    let full = market.full_good_set();
    let mut cells = vec![
        row.round.to_string(),
        row.step.label().to_string(),
        integer_price_text(&row.prices),
    ];
    for demand in &row.demands {
        cells.push(good_set_label(demand));
    }
    for restriction in &row.restrictions {
        cells.push(if *restriction == full {
            "S".to_string()
        } else {
            good_set_label(restriction)
        });
    }
    cells.push(good_set_label(&row.overdemanded));
    let conflict: Vec<String> = row.conflict.iter().map(|i| (i + 1).to_string()).collect();
    cells.push(format!("{{{}}}", conflict.join(",")));
    cells.push(match &row.rollback {
        Some(info) => format!("{}:{}", info.bidder + 1, good_set_label(&info.removed)),
        None => "-".to_string(),
    });
    cells
}

fn trace_header(market: &Market) -> Vec<String> {
    let mut header = vec!["t".to_string(), "step".to_string(), "p".to_string()];
    for i in 1..=market.n_bidders() {
        header.push(format!("D_{i}"));
    }
    for i in 1..=market.n_bidders() {
        header.push(format!("R_{i}"));
    }
    header.push("O".to_string());
    header.push("I".to_string());
    header.push("rollback".to_string());
    header
}

fn render_trace_table(market: &Market, rows: &[TraceRow]) -> String {
    let header = trace_header(market);
    let mut table: Vec<Vec<String>> = vec![header];
    for row in rows {
        table.push(trace_cells(market, row));
    }
    let columns = table[0].len();
    let mut widths = vec![0usize; columns];
    for row in &table {
        for (c, cell) in row.iter().enumerate() {
            widths[c] = widths[c].max(cell.len());
        }
    }
    let mut out = String::new();
    for row in &table {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cell)| format!("{cell:<width$}", width = widths[c]))
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

fn render_trace_tsv(market: &Market, rows: &[TraceRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", trace_header(market).join("\t"));
    for row in rows {
        let _ = writeln!(out, "{}", trace_cells(market, row).join("\t"));
    }
    out
}

fn trace_rows_json(rows: &[TraceRow]) -> serde_json::Value {
    let rendered: Vec<_> = rows
        .iter()
        .map(|row| {
            json!({
                "round": row.round,
                "step": row.step.label(),
                "prices": row.prices,
                "demands": row.demands.iter().map(|s| s.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>(),
                "restrictions": row.restrictions.iter().map(|s| s.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>(),
                "overdemanded": row.overdemanded.iter().copied().collect::<Vec<_>>(),
                "conflict": row.conflict.iter().copied().collect::<Vec<_>>(),
                "rollback": row.rollback.as_ref().map(|info| json!({
                    "bidder": info.bidder,
                    "removed": info.removed.iter().copied().collect::<Vec<_>>(),
                })),
            })
        })
        .collect();
    json!(rendered)
}

fn cmd_solve(args: SolveArgs) -> anyhow::Result<ExitCode> {
    let market = load_market(&args.market)?;
    if args.oracle {
        let report = brute_force_oracle(&market, &OracleOptions::default())?;
        let outcome = report.outcome.as_ref().ok_or_else(|| {
            Error::internal("a stable outcome always exists but the oracle found none")
        })?;
        print_solution(
            &market,
            outcome,
            report.welfare,
            &args.format,
            &[
                ("candidates checked", report.candidates_checked),
                ("stable outcomes found", report.core_outcomes_found),
            ],
        )?;
        return Ok(ExitCode::SUCCESS);
    }
    let max_nodes = args
        .max_nodes
        .or_else(|| {
            std::env::var("CORELAB_MAX_NODES")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or(DEFAULT_MAX_NODES);
    let report = solve_welfare_max_core(&market, &SolveOptions { max_nodes })?;
    print_solution(
        &market,
        &report.outcome,
        report.welfare,
        &args.format,
        &[
            ("assignments explored", report.assignments_explored),
            ("feasibility calls", report.lp_calls),
            ("nodes expanded", report.nodes_expanded),
        ],
    )?;
    Ok(ExitCode::SUCCESS)
}

fn print_solution(
    market: &Market,
    outcome: &Outcome,
    welfare: i64,
    format: &Format,
    stats: &[(&str, u64)],
) -> anyhow::Result<()> {
    let certificate = certify_outcome(market, outcome, &default_epsilon())?;
    match format {
        Format::Tsv => {
            return Err(Error::invalid("tsv output is only available for auction traces").into())
        }
        Format::Json => {
            let doc = json!({
                "assignment": outcome.assignment.slots(),
                "prices": price_strings(&outcome.prices, market.n_goods()),
                "welfare": welfare,
                "gains_from_trade": market.gains_from_trade(&outcome.assignment),
                "core": market.is_core(outcome),
                "competitive_equilibrium": market.is_competitive_equilibrium(outcome),
                "certified": certificate.satisfied,
                "stats": stats.iter().map(|(k, v)| json!({"name": k, "value": v})).collect::<Vec<_>>(),
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
        Format::Table => {
            println!("assignment: {}", assignment_text(&outcome.assignment));
            println!("prices: {}", price_text(&outcome.prices, market.n_goods()));
            println!("welfare: {welfare}");
            println!(
                "gains from trade: {}",
                market.gains_from_trade(&outcome.assignment)
            );
            println!(
                "core: {}",
                if market.is_core(outcome) { "yes" } else { "no" }
            );
            println!(
                "certified: {}",
                if certificate.satisfied { "yes" } else { "no" }
            );
            for (name, value) in stats {
                println!("{name}: {value}");
            }
        }
    }
    Ok(())
}

fn cmd_check(args: CheckArgs) -> anyhow::Result<ExitCode> {
    let market = load_market(&args.market)?;
    let text = fs::read_to_string(&args.outcome)
        .with_context(|| format!("reading outcome file {}", args.outcome.display()))?;
    let doc: OutcomeDoc = serde_json::from_str(&text)
        .map_err(|e| Error::invalid(format!("parsing {}: {e}", args.outcome.display())))?;
    let outcome = Outcome::from_doc(&market, &doc)?;
    let epsilon = match &args.epsilon {
        Some(text) => parse_rational(text)?,
        None => default_epsilon(),
    };
    let blocking = market.blocking_pairs(&outcome);
    let certificate = certify_outcome(&market, &outcome, &epsilon)?;
    let ce = market.is_competitive_equilibrium(&outcome);
    match args.format {
        Format::Tsv => {
            return Err(Error::invalid("tsv output is only available for auction traces").into())
        }
        Format::Json => {
            let doc = json!({
                "core": blocking.is_empty(),
                "blocking_pairs": blocking
                    .iter()
                    .map(|(i, j)| json!({"bidder": i, "good": j}))
                    .collect::<Vec<_>>(),
                "competitive_equilibrium": ce,
                "certified": certificate.satisfied,
                "violations": certificate.violations,
                "epsilon": format_rational(&certificate.epsilon),
                "big_m": certificate.big_m,
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
        Format::Table => {
            if blocking.is_empty() {
                println!("core: yes (no blocking pairs)");
            } else {
                println!("core: no");
                for (i, j) in &blocking {
                    println!("  blocking pair: bidder {} and good {}", i + 1, good_label(*j));
                }
            }
            println!("competitive equilibrium: {}", if ce { "yes" } else { "no" });
            println!(
                "certified (epsilon {}, M {}): {}",
                format_rational(&certificate.epsilon),
                certificate.big_m,
                if certificate.satisfied { "yes" } else { "no" }
            );
            for violation in &certificate.violations {
                println!("  violation: {violation}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn load_graph(path: &Path) -> anyhow::Result<CubicGraph> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading edge list {}", path.display()))?;
    Ok(CubicGraph::parse_edge_list(&text)?)
}

fn cmd_gadget_build(args: GadgetBuildArgs) -> anyhow::Result<ExitCode> {
    let graph = load_graph(&args.edges)?;
    let gm = GadgetMarket::new(graph);
    println!("{}", serde_json::to_string_pretty(gm.market())?);
    eprintln!(
        "graph: {} vertices, {} edges; market: {} buyers, {} goods; gains threshold for k={}: {}",
        gm.graph().n_vertices(),
        gm.graph().n_edges(),
        gm.market().n_bidders(),
        gm.market().n_goods(),
        args.k,
        gm.sw_threshold(args.k)
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_gadget_verify(args: GadgetVerifyArgs) -> anyhow::Result<ExitCode> {
    let graph = load_graph(&args.edges)?;
    let report = verify_reduction(&graph, args.k)?;
    println!(
        "graph: {} vertices, {} edges; k={}; gains threshold {}",
        report.n_vertices, report.n_edges, report.k, report.threshold
    );
    println!(
        "independent sets: {} ({} maximal, largest {})",
        report.independent_sets, report.maximal_independent_sets, report.max_independent_size
    );
    for check in &report.checks {
        println!(
            "{} {} ({})",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            check.detail
        );
    }
    if report.all_passed() {
        println!("all checks passed");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("verification failed");
        Ok(ExitCode::from(1))
    }
}

fn cmd_genpos(args: GenposArgs) -> anyhow::Result<ExitCode> {
    let market = load_market(&args.market)?;
    let options = GenPosOptions {
        max_walk_edges: args.max_walk_edges,
        max_walks: args.max_walks,
    };
    let report = general_position_check(&market, &options)?;
    let verdict = match report.verdict {
        GenPosVerdict::Confirmed => "confirmed",
        GenPosVerdict::Violated => "violated",
        GenPosVerdict::Inconclusive => "inconclusive",
    };
    match args.format {
        Format::Tsv => {
            return Err(Error::invalid("tsv output is only available for auction traces").into())
        }
        Format::Json => {
            let doc = json!({
                "verdict": verdict,
                "walks_enumerated": report.walks_enumerated,
                "frontier_exhausted": report.frontier_exhausted,
                "witness": report.witness.as_ref().map(|(a, b)| json!([a.to_string(), b.to_string()])),
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
        Format::Table => {
            println!("verdict: {verdict}");
            println!("walks enumerated: {}", report.walks_enumerated);
            println!(
                "frontier exhausted: {}",
                if report.frontier_exhausted { "yes" } else { "no" }
            );
            if let Some((first, second)) = &report.witness {
                println!("tied walks:");
                println!("  {first}");
                println!("  {second}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_ic(args: IcArgs) -> anyhow::Result<ExitCode> {
    let market = match &args.market {
        Some(path) => load_market(path)?,
        None => corelab::strategy::squeeze_out_market(),
    };
    let mechanisms: Vec<MechanismKind> = match args.mechanism {
        MechanismArg::Both => vec![MechanismKind::Auction, MechanismKind::Solver],
        MechanismArg::Auction => vec![MechanismKind::Auction],
        MechanismArg::Solver => vec![MechanismKind::Solver],
    };
    let mut docs = Vec::new();
    for mechanism in mechanisms {
        let report = misreport_experiment(&market, mechanism, args.budget)?;
        match args.format {
            Format::Json => {
                docs.push(json!({
                    "mechanism": mechanism.to_string(),
                    "truthful_assignment": report.truthful.assignment.slots(),
                    "truthful_prices": price_strings(&report.truthful.prices, market.n_goods()),
                    "loser": report.loser,
                    "truthful_utility": report.truthful_utility.to_string(),
                    "reported_budget": report.reported_budget,
                    "adjusted_assignment": report.adjusted.assignment.slots(),
                    "adjusted_prices": price_strings(&report.adjusted.prices, market.n_goods()),
                    "assigned_good": report.assigned_good,
                    "true_utility": report.true_utility.to_string(),
                }));
            }
            Format::Tsv => {
                return Err(
                    Error::invalid("tsv output is only available for auction traces").into(),
                )
            }
            Format::Table => {
                println!("mechanism: {mechanism}");
                println!(
                    "  truthful: {} at {}",
                    assignment_text(&report.truthful.assignment),
                    price_text(&report.truthful.prices, market.n_goods())
                );
                println!(
                    "  left-out bidder {} has utility {}",
                    report.loser + 1,
                    report.truthful_utility
                );
                println!("  reported budget: {}", report.reported_budget);
                println!(
                    "  adjusted: {} at {}",
                    assignment_text(&report.adjusted.assignment),
                    price_text(&report.adjusted.prices, market.n_goods())
                );
                println!(
                    "  bidder {} now holds {} with true utility {}",
                    report.loser + 1,
                    good_label(report.assigned_good),
                    report.true_utility
                );
            }
        }
    }
    if matches!(args.format, Format::Json) {
        println!("{}", serde_json::to_string_pretty(&json!(docs))?);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen(args: GenArgs) -> anyhow::Result<ExitCode> {
    if args.max_value < 0 || args.reserves < 0 {
        return Err(Error::invalid("value and reserve limits must be non-negative").into());
    }
    if args.max_budget < 1 {
        return Err(Error::invalid("budget limit must be at least 1").into());
    }
    if args.bidders == 0 {
        println!("{}", serde_json::to_string_pretty(&json!({"bidders": [], "reserves": []}))?);
        return Ok(ExitCode::SUCCESS);
    }
    if args.goods == 0 {
        return Err(Error::invalid("good limit must be at least 1 when bidders exist").into());
    }
    let limits = GenLimits {
        max_bidders: args.bidders,
        max_goods: args.goods,
        max_value: args.max_value,
        max_budget: args.max_budget,
        max_reserve: args.reserves,
    };
    let market = if args.rich {
        random_market_rich_budgets(args.seed, &limits)
    } else {
        random_market(args.seed, &limits)
    };
    println!("{}", serde_json::to_string_pretty(&market)?);
    Ok(ExitCode::SUCCESS)
}
