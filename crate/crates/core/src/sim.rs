//! Daily lifecycle simulation: build the day's graph from pending valid
//! receivables, solve, roll balances forward, expire what ran out of
//! window, repeat. Includes the attribute-initialization heuristics, the
//! scenario grid, and a seeded synthetic log generator.

use std::collections::{HashMap, HashSet};

use crate::date::Date;
use crate::graph::{build_graph, AccountBook, BuildError, CustomerAccount, Receivable};
use crate::hybrid::HybridParams;
use crate::money::{Cap, Money};
use crate::rng::Rng;
use crate::settlement::apply_settlement;
use crate::solver::{run_solver, Algo};

/// Cash ceiling applied to initialized actual balances (50K euros).
pub const INITIAL_BALANCE_CLAMP: Money = 5_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioName {
    Worst,
    Normal,
    Best,
}

impl ScenarioName {
    pub fn parse(s: &str) -> Option<ScenarioName> {
        Some(match s {
            "W" | "w" | "worst" => ScenarioName::Worst,
            "N" | "n" | "normal" => ScenarioName::Normal,
            "B" | "b" | "best" => ScenarioName::Best,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CapMode {
    Finite,
    Infinite,
}

/// One cell of the scenario grid: a receivable life and a cap policy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub name: ScenarioName,
    pub cap_mode: CapMode,
}

impl Scenario {
    pub fn life_days(&self) -> u32 {
        match self.name {
            ScenarioName::Worst => 5,
            ScenarioName::Normal => 10,
            ScenarioName::Best => 15,
        }
    }

    pub fn cap_multiplier(&self) -> Option<Money> {
        match self.cap_mode {
            CapMode::Infinite => None,
            CapMode::Finite => Some(match self.name {
                ScenarioName::Worst => 1,
                ScenarioName::Normal => 2,
                ScenarioName::Best => 3,
            }),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("degenerate generator config: {0}")]
    DegenerateConfig(String),
    #[error("training range is empty")]
    EmptyTrainingRange,
    #[error(transparent)]
    Build(#[from] BuildError),
}

#[derive(Clone, Debug)]
pub struct GeneratorConfig {
    pub customers: usize,
    pub days: u32,
    pub receivables_per_day: usize,
    /// Location of the log-normal amount distribution, in minor units.
    pub amount_location_minor: Money,
    pub amount_sigma: f64,
    /// Endpoint popularity decays as rank^-exponent.
    pub powerlaw_exponent: f64,
    pub due_offset_min: u32,
    pub due_offset_max: u32,
    pub life_days: u32,
    pub start: Date,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            customers: 200,
            days: 30,
            receivables_per_day: 60,
            amount_location_minor: 50_00,
            amount_sigma: 1.0,
            powerlaw_exponent: 1.1,
            due_offset_min: 5,
            due_offset_max: 45,
            life_days: 10,
            start: Date::from_ymd(2024, 1, 1).unwrap(),
        }
    }
}

/// Seed-reproducible synthetic log: power-law endpoints (debtor never
/// equals creditor), log-normal amounts, uniform due-date offsets. The
/// returned accounts are zeroed shells; attribute initialization fills
/// them in from a training prefix.
pub fn generate_synthetic(
    config: &GeneratorConfig,
    seed: u64,
) -> Result<(AccountBook, Vec<Receivable>), SimError> {
    if config.customers < 2 {
        return Err(SimError::DegenerateConfig(
            "need at least two customers".into(),
        ));
    }
    if config.due_offset_min > config.due_offset_max {
        return Err(SimError::DegenerateConfig(
            "due offset range inverted".into(),
        ));
    }
    if config.amount_location_minor <= 0 {
        return Err(SimError::DegenerateConfig(
            "amount location must be positive".into(),
        ));
    }
    let mut rng = Rng::new(seed);
    let n = config.customers;
    let ids: Vec<String> = (0..n).map(|i| format!("c{i:05}")).collect();
    // Cumulative power-law popularity for endpoint sampling.
    let mut cumulative = Vec::with_capacity(n);
    let mut acc = 0.0f64;
    for i in 0..n {
        acc += 1.0 / ((i + 1) as f64).powf(config.powerlaw_exponent);
        cumulative.push(acc);
    }
    let sample_endpoint = |rng: &mut Rng| -> usize {
        let x = rng.unit_f64() * acc;
        cumulative.partition_point(|&c| c < x).min(n - 1)
    };

    let mut receivables = Vec::with_capacity(config.days as usize * config.receivables_per_day);
    let mut serial = 0usize;
    for d in 0..config.days {
        let indate = config.start.add_days(d as i32);
        for _ in 0..config.receivables_per_day {
            let debtor = sample_endpoint(&mut rng);
            let creditor = loop {
                let c = sample_endpoint(&mut rng);
                if c != debtor {
                    break c;
                }
            };
            let amount = if config.amount_sigma == 0.0 {
                config.amount_location_minor
            } else {
                let z = rng.normal();
                let raw = (config.amount_location_minor as f64 * (config.amount_sigma * z).exp())
                    .round() as Money;
                raw.clamp(1, crate::money::MAX_ABS_MONEY)
            };
            let offset = rng.range_i64(config.due_offset_min as i64, config.due_offset_max as i64);
            receivables.push(Receivable {
                id: format!("r{serial:07}"),
                debtor: ids[debtor].clone(),
                creditor: ids[creditor].clone(),
                amount,
                indate,
                duedate: indate.add_days(offset as i32),
                life_days: config.life_days,
            });
            serial += 1;
        }
    }
    let book = AccountBook::from_accounts(ids.into_iter().map(|id| CustomerAccount {
        id,
        bl_r: 0,
        bl_a: 0,
        cap: Cap::Infinite,
        floor: 0,
    }))?;
    Ok((book, receivables))
}

/// Attribute initialization from a training window.
///
/// For each customer, the actual balance becomes the average magnitude of
/// the daily cash shortfall (days where outgoing receivable totals exceed
/// incoming ones), clamped to [`INITIAL_BALANCE_CLAMP`]. The base cap is
/// the average daily incoming amount; customers with no inflow get the
/// population mean. Receivable balances and floors start at zero.
///
/// Returns the book plus a warning flag set when the training log was
/// empty and everything defaulted.
pub fn init_attributes(
    customer_ids: &[String],
    training: &[Receivable],
    from: Date,
    to: Date,
) -> Result<(AccountBook, bool), SimError> {
    if from > to {
        return Err(SimError::EmptyTrainingRange);
    }
    let day_count = (to.0 - from.0 + 1) as Money;
    let index: HashMap<&str, usize> = customer_ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let n = customer_ids.len();
    // Per customer, per day: (incoming, outgoing).
    let mut daily: HashMap<(usize, i32), (Money, Money)> = HashMap::new();
    let mut inflow_total = vec![0 as Money; n];
    let mut used = false;
    for r in training {
        if r.indate < from || r.indate > to {
            continue;
        }
        let (Some(&d), Some(&c)) = (index.get(r.debtor.as_str()), index.get(r.creditor.as_str()))
        else {
            continue;
        };
        used = true;
        daily.entry((c, r.indate.0)).or_default().0 += r.amount;
        daily.entry((d, r.indate.0)).or_default().1 += r.amount;
        inflow_total[c] += r.amount;
    }

    let mut shortfall_sum = vec![0 as Money; n];
    let mut shortfall_days = vec![0 as Money; n];
    for (&(cust, _), &(incoming, outgoing)) in &daily {
        if incoming < outgoing {
            shortfall_sum[cust] += outgoing - incoming;
            shortfall_days[cust] += 1;
        }
    }
    let fcap: Vec<Money> = inflow_total.iter().map(|&t| t / day_count).collect();
    let with_inflow: Vec<Money> = fcap
        .iter()
        .zip(&inflow_total)
        .filter(|(_, &t)| t > 0)
        .map(|(&f, _)| f)
        .collect();
    let default_fcap = if with_inflow.is_empty() {
        0
    } else {
        with_inflow.iter().sum::<Money>() / with_inflow.len() as Money
    };

    let mut accounts = Vec::with_capacity(n);
    for i in 0..n {
        let bl_a = if shortfall_days[i] > 0 {
            (shortfall_sum[i] / shortfall_days[i]).min(INITIAL_BALANCE_CLAMP)
        } else {
            0
        };
        let base_cap = if inflow_total[i] > 0 {
            fcap[i]
        } else {
            default_fcap
        };
        accounts.push(CustomerAccount {
            id: customer_ids[i].clone(),
            bl_r: 0,
            bl_a,
            cap: Cap::Finite(base_cap),
            floor: 0,
        });
    }
    Ok((AccountBook::from_accounts(accounts)?, !used))
}

/// Applies a scenario to a freshly initialized book: caps become
/// `multiplier * base` or unbounded.
pub fn apply_scenario(book: &AccountBook, scenario: &Scenario) -> AccountBook {
    let accounts: Vec<CustomerAccount> = book
        .iter()
        .map(|a| {
            let cap = match (scenario.cap_multiplier(), a.cap) {
                (None, _) => Cap::Infinite,
                (Some(mult), Cap::Finite(base)) => Cap::Finite(base * mult),
                (Some(_), Cap::Infinite) => Cap::Infinite,
            };
            CustomerAccount { cap, ..a.clone() }
        })
        .collect();
    AccountBook::from_accounts(accounts).expect("scenario keeps accounts valid")
}

/// Per-day simulation record.
#[derive(Clone, Debug)]
pub struct DayRecord {
    pub date: Date,
    pub settled_ids: Vec<String>,
    /// Execution timestamps parallel to `settled_ids`, for ordered solvers.
    pub timestamps: Option<Vec<u32>>,
    pub total: Money,
    pub runtime_ms: u64,
    pub truncated: bool,
    pub solver_error: Option<String>,
}

/// A scripted external money movement: positive amounts are deposits,
/// negative ones withdrawals. These are the only operations that change
/// `bl_a - bl_r`.
#[derive(Clone, Debug)]
pub struct ExternalEvent {
    pub date: Date,
    pub account: String,
    pub amount: Money,
}

#[derive(Clone, Debug)]
pub struct SimState {
    pub day: Date,
    pub book: AccountBook,
    pub pending: Vec<Receivable>,
    pub expired: Vec<Receivable>,
    pub ledger: Vec<DayRecord>,
    /// Scripted deposits/withdrawals still to apply (default none).
    pub events: Vec<ExternalEvent>,
}

impl SimState {
    pub fn new(book: AccountBook, pending: Vec<Receivable>, day: Date) -> SimState {
        SimState {
            day,
            book,
            pending,
            expired: Vec::new(),
            ledger: Vec::new(),
            events: Vec::new(),
        }
    }

    pub fn with_events(mut self, events: Vec<ExternalEvent>) -> SimState {
        self.events = events;
        self
    }

    pub fn settled_count(&self) -> usize {
        self.ledger.iter().map(|d| d.settled_ids.len()).sum()
    }
}

/// One evening run: build the valid graph, solve, apply, expire, advance.
/// Solver errors are recorded in the day record and the simulation
/// continues with nothing settled that day.
pub fn step_day(state: &mut SimState, algo: Algo, params: &HybridParams) -> Result<(), SimError> {
    let today = state.day;
    apply_external_events(state, today)?;
    let graph = build_graph(&state.book, &state.pending, today)?;
    let mut record = DayRecord {
        date: today,
        settled_ids: Vec::new(),
        timestamps: None,
        total: 0,
        runtime_ms: 0,
        truncated: false,
        solver_error: None,
    };
    let solve_started = std::time::Instant::now();
    match run_solver(&graph, algo, params) {
        Ok(out) => {
            apply_settlement(&mut state.book, &graph, &out.settlement)
                .expect("solver settlements are feasible");
            record.total = out.settlement.total();
            record.truncated = out.truncated;
            match &out.ordered {
                Some(ordered) => {
                    let mut ids = Vec::with_capacity(ordered.arcs.len());
                    let mut stamps = Vec::with_capacity(ordered.arcs.len());
                    for &(a, t) in &ordered.arcs {
                        ids.push(graph.arc_ext_id(a).to_string());
                        stamps.push(t);
                    }
                    record.settled_ids = ids;
                    record.timestamps = Some(stamps);
                }
                None => {
                    record.settled_ids = out
                        .settlement
                        .arc_ids()
                        .iter()
                        .map(|&a| graph.arc_ext_id(a).to_string())
                        .collect();
                }
            }
        }
        Err(e) => record.solver_error = Some(e.to_string()),
    }
    record.runtime_ms = solve_started.elapsed().as_millis() as u64;
    let settled: HashSet<&str> = record.settled_ids.iter().map(String::as_str).collect();
    let mut still_pending = Vec::with_capacity(state.pending.len());
    for r in state.pending.drain(..) {
        if settled.contains(r.id.as_str()) {
            continue;
        }
        if r.window_end() <= today {
            state.expired.push(r);
        } else {
            still_pending.push(r);
        }
    }
    state.pending = still_pending;
    state.ledger.push(record);
    state.day = today.succ();
    Ok(())
}

/// Applies the day's scripted deposits/withdrawals to `bl_a` only. A
/// withdrawal that would breach the account floor is an error: the master
/// book must stay valid.
fn apply_external_events(state: &mut SimState, today: Date) -> Result<(), SimError> {
    let mut rest = Vec::with_capacity(state.events.len());
    for ev in state.events.drain(..) {
        if ev.date != today {
            rest.push(ev);
            continue;
        }
        let Some(acct) = state.book.get_mut(&ev.account) else {
            return Err(SimError::DegenerateConfig(format!(
                "external event for unknown account {}",
                ev.account
            )));
        };
        if acct.bl_a + ev.amount < acct.floor {
            return Err(SimError::DegenerateConfig(format!(
                "withdrawal would take {} below its floor",
                ev.account
            )));
        }
        acct.bl_a += ev.amount;
    }
    state.events = rest;
    Ok(())
}

#[derive(Clone, Debug)]
pub struct SimRunConfig {
    pub generator: GeneratorConfig,
    pub seed: u64,
    pub scenario: Scenario,
    /// Leading days of the log used only to initialize attributes.
    pub training_days: u32,
    pub sim_days: u32,
    pub algo: Algo,
    pub params: HybridParams,
}

impl Default for SimRunConfig {
    fn default() -> Self {
        SimRunConfig {
            generator: GeneratorConfig::default(),
            seed: 1,
            scenario: Scenario {
                name: ScenarioName::Normal,
                cap_mode: CapMode::Finite,
            },
            training_days: 10,
            sim_days: 20,
            algo: Algo::Hybrid,
            params: HybridParams::default(),
        }
    }
}

/// Full scenario run: generate a log, initialize attributes on the
/// training prefix, apply the scenario, then simulate day by day.
pub fn run_scenario_simulation(cfg: &SimRunConfig) -> Result<SimState, SimError> {
    let mut generator = cfg.generator.clone();
    generator.days = cfg.training_days + cfg.sim_days;
    let (shells, receivables) = generate_synthetic(&generator, cfg.seed)?;
    let ids: Vec<String> = shells.iter().map(|a| a.id.clone()).collect();
    let train_from = generator.start;
    let train_to = generator.start.add_days(cfg.training_days as i32 - 1);
    let (book, _warned) = if cfg.training_days == 0 {
        init_attributes(&ids, &[], train_from, train_from)?
    } else {
        init_attributes(&ids, &receivables, train_from, train_to)?
    };
    let book = apply_scenario(&book, &cfg.scenario);
    let life = cfg.scenario.life_days();
    let sim_receivables: Vec<Receivable> = receivables
        .into_iter()
        .filter(|r| r.indate > train_to)
        .map(|mut r| {
            r.life_days = life;
            r
        })
        .collect();
    let mut state = SimState::new(book, sim_receivables, train_to.succ());
    for _ in 0..cfg.sim_days {
        step_day(&mut state, cfg.algo, &cfg.params)?;
    }
    Ok(state)
}
