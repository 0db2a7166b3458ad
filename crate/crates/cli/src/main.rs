mod io;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use balex::characterize::{pareto_verdict, residual_cycle, trade_in_witness, ParetoVerdict};
use balex::concordant::{check_concordance, max_weight_pareto};
use balex::generate::{generate, GenConfig, WeightMode};
use balex::maxweight::{circulation_dual, solve_dual_reduced, solve_max_weight, verify_duality};
use balex::oracle::{report, EnumerationBudget};
use balex::recognize::{improve_to_pareto, relaxed_coalition};
use balex::ttc::run_ttc;
use balex::{validate, Error, Exchange, Instance};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::io::{load_exchange, load_instance, ExchangeFile, InstanceFile, Loaded};

const EXIT_PARSE: u8 = 1;
const EXIT_PRECONDITION: u8 = 2;
const EXIT_NEGATIVE: u8 = 3;
const EXIT_BUDGET: u8 = 4;
const EXIT_INTERNAL: u8 = 5;

#[derive(Parser, Debug)]
#[command(name = "balex", version, about = "Balanced exchanges on capacitated preference graphs")]
struct Cli {
    /// Print machine-readable JSON on one line.
    #[arg(long, global = true)]
    json: bool,
    /// Print indented JSON.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run top trading cycles.
    Ttc {
        instance: PathBuf,
        /// Include the round-by-round trace.
        #[arg(long)]
        trace: bool,
    },
    /// Test an exchange for Pareto optimality (exit 3 if it is not).
    Check { instance: PathBuf, exchange: PathBuf },
    /// Improve an exchange until it is Pareto optimal.
    Improve {
        instance: PathBuf,
        exchange: PathBuf,
        #[arg(long)]
        trace: bool,
    },
    /// Compute a max-weight fractional exchange.
    Maxweight {
        instance: PathBuf,
        /// Add dual solutions and duality reports.
        #[arg(long)]
        dual_cert: bool,
    },
    /// Check weight concordance and compute a max-weight Pareto-optimal exchange.
    Concordant { instance: PathBuf },
    /// Brute-force report for a small integral instance.
    Oracle {
        instance: PathBuf,
        #[arg(long, default_value_t = EnumerationBudget::default().max_agents)]
        max_agents: usize,
        #[arg(long, default_value_t = EnumerationBudget::default().max_total_capacity)]
        max_total_capacity: u64,
        #[arg(long, default_value_t = EnumerationBudget::default().max_cycles)]
        max_cycles: usize,
        #[arg(long, default_value_t = EnumerationBudget::default().max_exchanges)]
        max_exchanges: usize,
    },
    /// Generate a random instance.
    Gen {
        #[arg(long, default_value_t = 6)]
        agents: usize,
        #[arg(long, default_value_t = 0.4)]
        density: f64,
        #[arg(long, default_value_t = 2)]
        max_cap: u64,
        #[arg(long, value_enum, default_value_t = Weights::Unit)]
        weights: Weights,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fractional capacities and fractional-mode instance.
        #[arg(long)]
        fractional: bool,
    },
    /// Validate an exchange against an instance (exit 3 if invalid).
    Verify { instance: PathBuf, exchange: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Weights {
    Unit,
    Concordant,
    StrictConcordant,
    Random,
}

impl From<Weights> for WeightMode {
    fn from(w: Weights) -> Self {
        match w {
            Weights::Unit => WeightMode::Unit,
            Weights::Concordant => WeightMode::Concordant,
            Weights::StrictConcordant => WeightMode::StrictConcordant,
            Weights::Random => WeightMode::Random,
        }
    }
}

struct Outcome {
    json: Value,
    text: String,
    code: u8,
}

impl Outcome {
    fn ok(json: Value, text: String) -> Self {
        Outcome { json, text, code: 0 }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::InvalidInstance(_) | Error::UnknownAgent(_) | Error::UnknownArc(..) => EXIT_PARSE,
        Error::Precondition(_) | Error::InvalidFlow(_) | Error::NotConserved(_) | Error::InvalidWalk(_) => {
            EXIT_PRECONDITION
        }
        Error::BudgetExceeded(_) => EXIT_BUDGET,
        Error::IterationCap { .. } | Error::Invariant(_) => EXIT_INTERNAL,
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable output")
}

/// Exchange document fields at top level, followed by `extra`.
fn exchange_json(inst: &Instance, x: &Exchange, extra: Vec<(&str, Value)>) -> balex::Result<Value> {
    let Value::Object(mut map) = to_value(&ExchangeFile::from_exchange(inst, x)?) else { unreachable!() };
    for (k, v) in extra {
        map.insert(k.to_string(), v);
    }
    Ok(Value::Object(map))
}

fn exchange_text(inst: &Instance, x: &Exchange) -> balex::Result<String> {
    let mut s = String::new();
    if x.is_empty() {
        s.push_str("empty exchange\n");
    }
    for (c, f) in x.cycles() {
        writeln!(s, "cycle {c} flow {f}").unwrap();
    }
    writeln!(s, "weight {}", balex::weight(inst, x)?).unwrap();
    Ok(s)
}

/// Loads an exchange given on the original agents and maps it onto the working instance.
fn load_working_exchange(loaded: &Loaded, path: &std::path::Path) -> balex::Result<Exchange> {
    let x = load_exchange(path)?;
    validate(&loaded.original, &x).map_err(|v| Error::InvalidFlow(v.to_string()))?;
    loaded.to_working(&x)
}

fn run(cmd: Command) -> balex::Result<Outcome> {
    match cmd {
        Command::Ttc { instance, trace } => {
            let loaded = load_instance(&instance)?;
            let (x, t) = run_ttc(&loaded.working);
            let x = loaded.to_original(&x)?;
            let mut extra = Vec::new();
            if trace {
                extra.push(("trace", to_value(&t)));
            }
            let mut text = exchange_text(&loaded.original, &x)?;
            if trace {
                for (i, r) in t.rounds.iter().enumerate() {
                    let cycles: Vec<String> = r.cycles.iter().map(|(c, f)| format!("{c}:{f}")).collect();
                    writeln!(text, "round {}: {}", i + 1, cycles.join(" ")).unwrap();
                }
            }
            Ok(Outcome::ok(exchange_json(&loaded.original, &x, extra)?, text))
        }
        Command::Check { instance, exchange } => {
            let loaded = load_instance(&instance)?;
            let inst = &loaded.working;
            let x = load_working_exchange(&loaded, &exchange)?;
            let verdict = pareto_verdict(inst, &x)?;
            let optimal = verdict.is_optimal();
            let cycle = residual_cycle(inst, &x)?;
            let trade_in = trade_in_witness(inst, &x)?;
            // coalition found while tolerating trade-ins, only meaningful on maximal exchanges
            let coalition = if cycle.is_none() { relaxed_coalition(inst, &x)? } else { None };
            let json = json!({
                "pareto_optimal": optimal,
                "maximal": cycle.is_none(),
                "residual_cycle": cycle,
                "trade_in": trade_in,
                "coalition": coalition,
                "verdict": verdict,
            });
            let mut text = String::new();
            writeln!(text, "{}", if optimal { "Pareto optimal" } else { "NOT Pareto optimal" }).unwrap();
            if let Some(c) = &cycle {
                writeln!(text, "residual cycle {} (bottleneck {})", c.cycle, c.bottleneck).unwrap();
            }
            if let Some(t) = &trade_in {
                writeln!(text, "trade-in: {t}").unwrap();
            }
            if let Some(c) = &coalition {
                writeln!(text, "coalition: {c}").unwrap();
            }
            if let ParetoVerdict::Coalition { witness } = &verdict {
                writeln!(text, "coalition (trade-in-free exchange): {witness}").unwrap();
            }
            Ok(Outcome { json, text, code: if optimal { 0 } else { EXIT_NEGATIVE } })
        }
        Command::Improve { instance, exchange, trace } => {
            let loaded = load_instance(&instance)?;
            let x = load_working_exchange(&loaded, &exchange)?;
            let (y, t) = improve_to_pareto(&loaded.working, &x)?;
            let y = loaded.to_original(&y)?;
            let mut extra = vec![("steps", json!(t.steps.len()))];
            if trace {
                extra.push(("trace", to_value(&t)));
            }
            let mut text = exchange_text(&loaded.original, &y)?;
            writeln!(text, "{} improvement steps", t.steps.len()).unwrap();
            if trace {
                for s in &t.steps {
                    writeln!(text, "  {s}").unwrap();
                }
            }
            Ok(Outcome::ok(exchange_json(&loaded.original, &y, extra)?, text))
        }
        Command::Maxweight { instance, dual_cert } => {
            let loaded = load_instance(&instance)?;
            let p = solve_max_weight(&loaded.working)?;
            let x = loaded.to_original(&p.exchange)?;
            let mut extra = vec![("objective", to_value(&p.objective))];
            let mut text = exchange_text(&loaded.original, &x)?;
            writeln!(text, "objective {}", p.objective).unwrap();
            if dual_cert {
                let reduced = solve_dual_reduced(&loaded.working)?;
                let cert = circulation_dual(&loaded.working, &p)?;
                let reduced_report = verify_duality(&p, &reduced);
                let cert_report = verify_duality(&p, &cert);
                writeln!(text, "reduced dual objective {} ({:?})", reduced.objective, reduced_report).unwrap();
                writeln!(text, "circulation dual objective {} ({:?})", cert.objective, cert_report).unwrap();
                extra.push(("dual_reduced", to_value(&reduced)));
                extra.push(("duality_reduced", to_value(&reduced_report)));
                extra.push(("dual_certificate", to_value(&cert)));
                extra.push(("duality", to_value(&cert_report)));
            }
            Ok(Outcome::ok(exchange_json(&loaded.original, &x, extra)?, text))
        }
        Command::Concordant { instance } => {
            let loaded = load_instance(&instance)?;
            let report = check_concordance(&loaded.working);
            if !report.verdict.is_concordant() {
                let text = format!("weights are not concordant: {:?}\n", report.verdict);
                return Ok(Outcome { json: json!({ "concordance": report }), text, code: EXIT_PRECONDITION });
            }
            let out = max_weight_pareto(&loaded.working)?;
            let x = loaded.to_original(&out.exchange)?;
            let mut text = exchange_text(&loaded.original, &x)?;
            writeln!(text, "concordance {:?}; {} improvement steps", out.concordance, out.trace.steps.len()).unwrap();
            let extra = vec![
                ("concordance", to_value(&report)),
                ("optimum", to_value(&out.optimum)),
                ("steps", json!(out.trace.steps.len())),
            ];
            Ok(Outcome::ok(exchange_json(&loaded.original, &x, extra)?, text))
        }
        Command::Oracle { instance, max_agents, max_total_capacity, max_cycles, max_exchanges } => {
            let loaded = load_instance(&instance)?;
            let budget = EnumerationBudget { max_agents, max_total_capacity, max_cycles, max_exchanges };
            let r = report(&loaded.working, &budget)?;
            let optimal: Vec<Value> = r
                .pareto_optimal
                .iter()
                .map(|x| {
                    let x = loaded.to_original(x)?;
                    Ok(to_value(&ExchangeFile::from_exchange(&loaded.original, &x)?))
                })
                .collect::<balex::Result<_>>()?;
            let mut text = format!(
                "{} simple cycles, {} exchanges, {} Pareto optimal, max integral weight {}\n",
                r.cycles,
                r.exchanges,
                optimal.len(),
                r.max_weight
            );
            for x in &r.pareto_optimal {
                let cycles: Vec<String> = x.cycles().iter().map(|(c, f)| format!("{c}:{f}")).collect();
                writeln!(text, "  {}", if cycles.is_empty() { "empty".into() } else { cycles.join(" ") }).unwrap();
            }
            let json = json!({
                "cycles": r.cycles,
                "exchanges": r.exchanges,
                "pareto_optimal": optimal,
                "max_weight": r.max_weight,
            });
            Ok(Outcome::ok(json, text))
        }
        Command::Gen { agents, density, max_cap, weights, seed, fractional } => {
            let cfg = GenConfig { agents, density, max_cap, weights: weights.into(), seed, fractional };
            let g = generate(&cfg)?;
            if g.seed != seed {
                log::info!("generated with advanced seed {}", g.seed);
            }
            let file = InstanceFile::from_instance(&g.instance);
            let json = to_value(&file);
            let text = serde_json::to_string_pretty(&file).expect("serializable") + "\n";
            Ok(Outcome::ok(json, text))
        }
        Command::Verify { instance, exchange } => {
            let loaded = load_instance(&instance)?;
            let x = load_exchange(&exchange)?;
            match validate(&loaded.original, &x) {
                Ok(()) => Ok(Outcome::ok(json!({ "valid": true }), "valid\n".into())),
                Err(v) => Ok(Outcome {
                    json: json!({ "valid": false, "violation": v }),
                    text: format!("invalid: {v}\n"),
                    code: EXIT_NEGATIVE,
                }),
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let machine = cli.json || cli.pretty;
    match run(cli.command) {
        Ok(out) => {
            if cli.pretty {
                println!("{}", serde_json::to_string_pretty(&out.json).expect("json"));
            } else if machine {
                println!("{}", out.json);
            } else {
                print!("{}", out.text);
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            let code = exit_code(&e);
            if machine {
                let mut m = Map::new();
                m.insert("error".into(), Value::String(e.to_string()));
                m.insert("exit_code".into(), json!(code));
                println!("{}", Value::Object(m));
            }
            eprintln!("error: {e}");
            ExitCode::from(code)
        }
    }
}
