//! `settle`: command-line runner for the receivable-settlement engine.
//!
//! Subcommands: `solve` one instance, `simulate` a day range on synthetic
//! data, `verify` the randomized self-check suite, `generate` synthetic
//! data files.
//!
//! Exit codes: 0 success, 1 usage, 2 parse/input, 3 solver budget,
//! 4 verification failure.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use settle_core::exact::{SolveError, Visit};
use settle_core::graph::build_graph;
use settle_core::hybrid::HybridParams;
use settle_core::io;
use settle_core::settlement::check_feasible;
use settle_core::sim::{
    generate_synthetic, run_scenario_simulation, CapMode, GeneratorConfig, Scenario, ScenarioName,
    SimRunConfig,
};
use settle_core::solver::{run_solver, Algo};
use settle_core::verify::oracle_equivalence_suite;
use settle_core::Date;

use report::{DayReport, Parameters, Report};

#[derive(Parser)]
#[command(
    name = "settle",
    version,
    about = "Receivable-settlement optimization engine"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one instance and emit a report.
    Solve(SolveArgs),
    /// Simulate daily operation on seeded synthetic data.
    Simulate(SimulateArgs),
    /// Run the randomized exact-vs-oracle verification suite.
    Verify(VerifyArgs),
    /// Generate synthetic accounts and receivables.
    Generate(GenerateArgs),
}

#[derive(Args, Clone)]
struct AlgoArgs {
    /// Algorithm: bb | bb-lb | beam | path-g | path-s | h | h-path | rfb |
    /// redefine-floors | select-and-order
    #[arg(long, default_value = "h")]
    algo: String,

    /// Maximum cycle length.
    #[arg(long = "L", default_value_t = 15)]
    l: usize,

    /// Maximum path length for path augmentation.
    #[arg(long = "Lp", default_value_t = 15)]
    lp: usize,

    /// Largest component (in arcs) handed to the exact solver.
    #[arg(long = "H", default_value_t = 20)]
    h: usize,

    /// Beam width over cycles.
    #[arg(long = "K", default_value_t = 1000)]
    k: usize,

    /// Beam width over paths.
    #[arg(long = "Kp", default_value_t = 1000)]
    kp: usize,

    /// Branch-and-bound tree-node budget.
    #[arg(long, default_value_t = 10_000_000)]
    budget_nodes: u64,

    /// Cycle/path enumeration budget.
    #[arg(long, default_value_t = 1_000_000)]
    budget_cycles: usize,
}

impl AlgoArgs {
    fn algo(&self) -> Result<Algo, CliError> {
        Algo::parse(&self.algo)
            .ok_or_else(|| CliError::usage(format!("unknown algorithm {:?}", self.algo)))
    }

    fn params(&self) -> HybridParams {
        HybridParams {
            h: self.h,
            k: self.k,
            k_p: self.kp,
            max_cycle_len: self.l,
            max_path_len: self.lp,
            cycle_budget: self.budget_cycles,
            path_budget: self.budget_cycles,
            node_budget: self.budget_nodes,
            visit: Visit::Dfs,
            use_paths: false,
            path_variant: settle_core::pathsel::PathVariant::Greedy,
        }
    }

    fn parameters(
        &self,
        scenario: Option<String>,
        cap: Option<String>,
        seed: Option<u64>,
    ) -> Parameters {
        Parameters {
            algo: self.algo.clone(),
            l: self.l,
            lp: self.lp,
            h: self.h,
            k: self.k,
            kp: self.kp,
            budget_nodes: self.budget_nodes,
            budget_cycles: self.budget_cycles,
            scenario,
            cap,
            seed,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Whole instance as a JSON document.
    #[arg(long, conflicts_with_all = ["accounts", "receivables", "today"])]
    input: Option<PathBuf>,

    /// Accounts CSV (with --receivables and --today).
    #[arg(long, requires_all = ["receivables", "today"])]
    accounts: Option<PathBuf>,

    /// Receivables CSV.
    #[arg(long)]
    receivables: Option<PathBuf>,

    /// Valuation day for the CSV pair, ISO-8601.
    #[arg(long)]
    today: Option<String>,

    /// Report destination (stdout when absent).
    #[arg(long)]
    output: Option<PathBuf>,

    #[command(flatten)]
    algo: AlgoArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario: W | N | B.
    #[arg(long, default_value = "N")]
    scenario: String,

    /// Cap policy: finite | infinite.
    #[arg(long, default_value = "finite")]
    cap: String,

    /// Simulated days after the training prefix.
    #[arg(long, default_value_t = 30)]
    days: u32,

    /// Training prefix used for attribute initialization.
    #[arg(long, default_value_t = 10)]
    training_days: u32,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    #[arg(long, default_value_t = 200)]
    customers: usize,

    #[arg(long, default_value_t = 60)]
    recv_per_day: usize,

    /// Location of the log-normal amount distribution, minor units.
    #[arg(long, default_value_t = 5000)]
    amount_location: i64,

    #[arg(long, default_value_t = 1.0)]
    amount_sigma: f64,

    #[arg(long, default_value_t = 1.1)]
    powerlaw: f64,

    #[arg(long)]
    output: Option<PathBuf>,

    #[command(flatten)]
    algo: AlgoArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 14)]
    max_arcs: usize,

    #[arg(long, default_value_t = 7)]
    max_nodes: usize,

    #[arg(long, default_value_t = 200)]
    instances: usize,

    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 200)]
    customers: usize,

    #[arg(long, default_value_t = 30)]
    days: u32,

    #[arg(long, default_value_t = 60)]
    recv_per_day: usize,

    #[arg(long, default_value_t = 5000)]
    amount_location: i64,

    #[arg(long, default_value_t = 1.0)]
    amount_sigma: f64,

    #[arg(long, default_value_t = 1.1)]
    powerlaw: f64,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Output format: json (one instance file) or csv (two files).
    #[arg(long, default_value = "json")]
    format: String,

    /// Output file (json) or directory (csv).
    #[arg(long)]
    output: PathBuf,
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> CliError {
        CliError {
            code: 1,
            message: message.into(),
        }
    }

    fn parse(message: impl Into<String>) -> CliError {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    fn budget(message: impl Into<String>) -> CliError {
        CliError {
            code: 3,
            message: message.into(),
        }
    }

    fn verification(message: impl Into<String>) -> CliError {
        CliError {
            code: 4,
            message: message.into(),
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            std::fs::write(p, content).map_err(|e| CliError::parse(format!("{}: {e}", p.display())))
        }
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.cmd {
        Cmd::Solve(args) => cmd_solve(args),
        Cmd::Simulate(args) => cmd_simulate(args),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Generate(args) => cmd_generate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

type Instance = (settle_core::AccountBook, Vec<settle_core::Receivable>, Date);

fn load_instance(args: &SolveArgs) -> Result<Instance, CliError> {
    if let Some(path) = &args.input {
        let text = read_file(path)?;
        let instance = io::parse_instance_json(&text)
            .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
        let today = instance.today;
        let (book, recs) = instance
            .into_parts()
            .map_err(|e| CliError::parse(e.to_string()))?;
        return Ok((book, recs, today));
    }
    let (Some(accounts), Some(receivables), Some(today)) =
        (&args.accounts, &args.receivables, &args.today)
    else {
        return Err(CliError::usage(
            "provide either --input or --accounts/--receivables/--today",
        ));
    };
    let today: Date = today
        .parse()
        .map_err(|e| CliError::parse(format!("--today: {e}")))?;
    let account_rows = io::parse_accounts_csv(&read_file(accounts)?)
        .map_err(|e| CliError::parse(format!("{}: {e}", accounts.display())))?;
    let receivable_rows = io::parse_receivables_csv(&read_file(receivables)?)
        .map_err(|e| CliError::parse(format!("{}: {e}", receivables.display())))?;
    let book = settle_core::AccountBook::from_accounts(
        account_rows.iter().map(settle_core::CustomerAccount::from),
    )
    .map_err(|e| CliError::parse(e.to_string()))?;
    let recs = receivable_rows
        .iter()
        .map(settle_core::Receivable::from)
        .collect();
    Ok((book, recs, today))
}

fn cmd_solve(args: SolveArgs) -> Result<(), CliError> {
    let algo = args.algo.algo()?;
    let params = args.algo.params();
    let (book, recs, today) = load_instance(&args)?;
    let graph = build_graph(&book, &recs, today).map_err(|e| CliError::parse(e.to_string()))?;
    let started = Instant::now();
    let out = run_solver(&graph, algo, &params).map_err(|e| match e {
        SolveError::NodeBudgetExceeded { .. } => CliError::budget(e.to_string()),
        other => CliError::parse(other.to_string()),
    })?;
    let runtime_ms = started.elapsed().as_millis() as u64;
    debug_assert!(check_feasible(&graph, &out.settlement).is_ok() || algo == Algo::SelectAndOrder);

    let (arc_ids, timestamps) = match &out.ordered {
        Some(ordered) => {
            let mut ids = Vec::with_capacity(ordered.arcs.len());
            let mut ts = Vec::with_capacity(ordered.arcs.len());
            for &(a, t) in &ordered.arcs {
                ids.push(graph.arc_ext_id(a).to_string());
                ts.push(t);
            }
            (ids, Some(ts))
        }
        None => (
            out.settlement
                .arc_ids()
                .iter()
                .map(|&a| graph.arc_ext_id(a).to_string())
                .collect(),
            None,
        ),
    };
    let day = DayReport {
        date: today.to_string(),
        algorithm: algo.name().to_string(),
        arc_ids,
        timestamps,
        total_minor: out.settlement.total(),
        runtime_ms,
        truncated: out.truncated,
        error: None,
    };
    let report = Report::new(args.algo.parameters(None, None, None), vec![day]);
    write_output(args.output.as_deref(), &report.to_json())
}

fn parse_scenario(scenario: &str, cap: &str) -> Result<Scenario, CliError> {
    let name = ScenarioName::parse(scenario)
        .ok_or_else(|| CliError::usage(format!("unknown scenario {scenario:?} (use W, N or B)")))?;
    let cap_mode = match cap {
        "finite" => CapMode::Finite,
        "infinite" => CapMode::Infinite,
        other => return Err(CliError::usage(format!("unknown cap policy {other:?}"))),
    };
    Ok(Scenario { name, cap_mode })
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let algo = args.algo.algo()?;
    let scenario = parse_scenario(&args.scenario, &args.cap)?;
    let cfg = SimRunConfig {
        generator: GeneratorConfig {
            customers: args.customers,
            receivables_per_day: args.recv_per_day,
            amount_location_minor: args.amount_location,
            amount_sigma: args.amount_sigma,
            powerlaw_exponent: args.powerlaw,
            ..GeneratorConfig::default()
        },
        seed: args.seed,
        scenario,
        training_days: args.training_days,
        sim_days: args.days,
        algo,
        params: args.algo.params(),
    };
    let state = run_scenario_simulation(&cfg).map_err(|e| CliError::parse(e.to_string()))?;
    let days: Vec<DayReport> = state
        .ledger
        .iter()
        .map(|d| DayReport {
            date: d.date.to_string(),
            algorithm: algo.name().to_string(),
            arc_ids: d.settled_ids.clone(),
            timestamps: d.timestamps.clone(),
            total_minor: d.total,
            runtime_ms: d.runtime_ms,
            truncated: d.truncated,
            error: d.solver_error.clone(),
        })
        .collect();
    let report = Report::new(
        args.algo.parameters(
            Some(args.scenario.clone()),
            Some(args.cap.clone()),
            Some(args.seed),
        ),
        days,
    );
    write_output(args.output.as_deref(), &report.to_json())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    if args.max_arcs > 20 {
        return Err(CliError::usage("--max-arcs is capped at 20 (oracle guard)"));
    }
    let started = Instant::now();
    let report = oracle_equivalence_suite(args.seed, args.instances, args.max_nodes, args.max_arcs);
    println!(
        "verify: {} instances (max {} nodes, {} arcs, seed {}) in {:.2}s",
        report.instances,
        args.max_nodes,
        args.max_arcs,
        args.seed,
        started.elapsed().as_secs_f64(),
    );
    if report.all_passed() {
        println!("verify: PASS (exact solver matches the oracle everywhere)");
        Ok(())
    } else {
        for m in &report.mismatches {
            eprintln!(
                "instance {}: exact {} != oracle {}",
                m.instance, m.exact_total, m.oracle_total
            );
        }
        Err(CliError::verification(format!(
            "{} of {} instances mismatched",
            report.mismatches.len(),
            report.instances
        )))
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let cfg = GeneratorConfig {
        customers: args.customers,
        days: args.days,
        receivables_per_day: args.recv_per_day,
        amount_location_minor: args.amount_location,
        amount_sigma: args.amount_sigma,
        powerlaw_exponent: args.powerlaw,
        ..GeneratorConfig::default()
    };
    let (book, receivables) =
        generate_synthetic(&cfg, args.seed).map_err(|e| CliError::usage(e.to_string()))?;
    let account_rows: Vec<io::AccountRow> = book.iter().map(io::AccountRow::from).collect();
    let receivable_rows: Vec<io::ReceivableRow> =
        receivables.iter().map(io::ReceivableRow::from).collect();
    match args.format.as_str() {
        "json" => {
            let instance = io::InstanceFile {
                today: cfg.start,
                accounts: account_rows,
                receivables: receivable_rows,
            };
            write_output(Some(&args.output), &io::instance_to_json(&instance))
        }
        "csv" => {
            std::fs::create_dir_all(&args.output)
                .map_err(|e| CliError::parse(format!("{}: {e}", args.output.display())))?;
            write_output(
                Some(&args.output.join("accounts.csv")),
                &io::accounts_to_csv(&account_rows),
            )?;
            write_output(
                Some(&args.output.join("receivables.csv")),
                &io::receivables_to_csv(&receivable_rows),
            )
        }
        other => Err(CliError::usage(format!("unknown format {other:?}"))),
    }
}
