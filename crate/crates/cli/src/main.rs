//! Command-line harness: parse corpora, run comparisons under any strategy,
//! generate random benchmark families and emit machine-readable reports.
//!
//! Output files are byte-reproducible for fixed seeds and inputs: wall-clock
//! timings go to stderr and are only embedded in JSON/CSV with `--timings`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use anlmap_core::domain::Domain;
use anlmap_core::generator::{generate_domain, generate_pair, GeneratorSpec};
use anlmap_core::matcher::{EntityMode, PredicateRule, RuleSet};
use anlmap_core::parser::{parse_corpus, serialize, ParseOutcome, Severity};
use anlmap_core::report::{
    map_result, run_comparison, ComparisonOutcome, EngineCaps, EngineError, Strategy,
};
use anlmap_core::smap::MergeError;

const EXIT_PARSE: u8 = 2;
const EXIT_UNKNOWN_DOMAIN: u8 = 3;
const EXIT_CAP_EXCEEDED: u8 = 4;

#[derive(Parser)]
#[command(
    name = "anlmap",
    version,
    about = "Analogical structure mapping over typed predicate-calculus domains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    SmeGreedy,
    SmeOptimal,
    Gibson,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::SmeGreedy => Strategy::SmeGreedy,
            StrategyArg::SmeOptimal => Strategy::SmeOptimal,
            StrategyArg::Gibson => Strategy::Gibson,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PredRuleArg {
    Identical,
    Free,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EntityModeArg {
    Sanctioned,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args, Clone, Copy)]
struct RuleArgs {
    /// Predicate matching rule; defaults to the strategy's own rule set
    #[arg(long = "pred-rule", value_enum)]
    pred_rule: Option<PredRuleArg>,

    /// Entity matching mode; defaults to the strategy's own rule set
    #[arg(long = "entity-mode", value_enum)]
    entity_mode: Option<EntityModeArg>,

    /// Live-branch bound for tie forking
    #[arg(long = "fork-cap", default_value_t = anlmap_core::gibson::DEFAULT_FORK_CAP)]
    fork_cap: usize,

    /// Refusal budget for the exhaustive merge
    #[arg(long = "pmap-cap", default_value_t = anlmap_core::smap::DEFAULT_PMAP_CAP)]
    pmap_cap: usize,
}

impl RuleArgs {
    fn rules(&self, strategy: Strategy) -> RuleSet {
        let default = match strategy {
            Strategy::Gibson => RuleSet::gibson_default(),
            _ => RuleSet::sme_default(),
        };
        RuleSet {
            predicate_rule: match self.pred_rule {
                Some(PredRuleArg::Identical) => PredicateRule::Identical,
                Some(PredRuleArg::Free) => PredicateRule::FreeForAll,
                None => default.predicate_rule,
            },
            entity_mode: match self.entity_mode {
                Some(EntityModeArg::Sanctioned) => EntityMode::SanctionedOnly,
                Some(EntityModeArg::All) => EntityMode::AllPairs,
                None => default.entity_mode,
            },
        }
    }

    fn caps(&self) -> EngineCaps {
        EngineCaps {
            fork_cap: self.fork_cap,
            pmap_cap: self.pmap_cap,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse a corpus and summarize its domains
    Parse {
        corpus: PathBuf,
    },
    /// Map a base domain onto a target domain
    Map {
        corpus: PathBuf,
        base: String,
        target: String,
        #[arg(long, value_enum, default_value = "gibson")]
        strategy: StrategyArg,
        #[command(flatten)]
        rules: RuleArgs,
        /// Write the result here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// json carries the g-maps; csv is the one-row report
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
        /// Embed real wall-clock times (breaks byte-reproducibility)
        #[arg(long)]
        timings: bool,
    },
    /// Map a domain onto itself and report identity recovery
    Selfmap {
        corpus: PathBuf,
        domain: String,
        #[arg(long, value_enum, default_value = "gibson")]
        strategy: StrategyArg,
        #[command(flatten)]
        rules: RuleArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
        #[arg(long)]
        timings: bool,
    },
    /// Run strategies over generated instance families and emit CSV
    Bench {
        /// Comma-separated entity counts, one instance family per count
        #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
        entities: Vec<usize>,
        /// Facts per entity (structure density)
        #[arg(long = "facts-per-entity", default_value_t = 2.0)]
        facts_per_entity: f64,
        #[arg(long = "max-level", default_value_t = 3)]
        max_level: u32,
        /// Predicate pool size as a fraction of the entity count
        #[arg(long = "pool-frac", default_value_t = 0.5)]
        pool_frac: f64,
        #[arg(long, default_value_t = 0.25)]
        ambiguity: f64,
        /// Instances per entity count
        #[arg(long, default_value_t = 3)]
        instances: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "sme-greedy,sme-optimal,gibson")]
        strategies: Vec<StrategyArg>,
        /// Map each generated domain onto itself instead of onto its twin
        #[arg(long = "self-map")]
        self_map: bool,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[command(flatten)]
        rules: RuleArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        /// Embed median-of-5 wall-clock times (breaks byte-reproducibility)
        #[arg(long)]
        timings: bool,
    },
    /// Generate a random domain (or base/target pair) as corpus text
    Gen {
        #[arg(long, default_value_t = 8)]
        entities: usize,
        #[arg(long, default_value_t = 16)]
        facts: usize,
        #[arg(long = "max-level", default_value_t = 3)]
        max_level: u32,
        #[arg(long, default_value_t = 8)]
        pool: usize,
        #[arg(long, default_value_t = 0.25)]
        ambiguity: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Generate a structurally similar base/target pair
        #[arg(long)]
        pair: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_corpus(path: &Path) -> Result<ParseOutcome, ExitCode> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", path.display());
            return Err(ExitCode::FAILURE);
        }
    };
    let outcome = parse_corpus(&text);
    for d in &outcome.diagnostics {
        eprintln!("{}: {d}", path.display());
    }
    if outcome.has_errors() {
        return Err(ExitCode::from(EXIT_PARSE));
    }
    Ok(outcome)
}

fn find_domain<'a>(outcome: &'a ParseOutcome, name: &str) -> Result<&'a Domain, ExitCode> {
    match outcome.domain(name) {
        Some(d) => Ok(d),
        None => {
            let known: Vec<&str> = outcome.domains.iter().map(|d| d.name()).collect();
            eprintln!("unknown domain `{name}`; corpus defines: {}", known.join(", "));
            Err(ExitCode::from(EXIT_UNKNOWN_DOMAIN))
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> ExitCode {
    match out {
        Some(path) => {
            if let Err(e) = fs::write(path, text) {
                eprintln!("cannot write {}: {e}", path.display());
                return ExitCode::FAILURE;
            }
            ExitCode::SUCCESS
        }
        None => {
            print!("{text}");
            ExitCode::SUCCESS
        }
    }
}

fn report_csv(report: &anlmap_core::report::RunReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "strategy",
        "pred_rule",
        "entity_mode",
        "total_matches",
        "valid_matches",
        "pmap_count",
        "gmap_count",
        "best_gmap_size",
        "best_gmap_score",
        "cycles_to_best",
        "forks",
        "percent_correct",
        "wall_time_ms",
    ])
    .unwrap();
    w.write_record([
        report.strategy.to_string(),
        report.rules.predicate_rule.to_string(),
        report.rules.entity_mode.to_string(),
        report.total_matches.to_string(),
        report.valid_matches.to_string(),
        report.pmap_count.to_string(),
        report.gmap_count.to_string(),
        report.best_gmap_size.to_string(),
        report.best_gmap_score.to_string(),
        report
            .cycles_to_best
            .map(|c| c.to_string())
            .unwrap_or_default(),
        report.forks.map(|f| f.to_string()).unwrap_or_default(),
        report
            .percent_correct
            .map(|p| p.to_string())
            .unwrap_or_default(),
        report.wall_time_ms.to_string(),
    ])
    .unwrap();
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

#[allow(clippy::too_many_arguments)]
fn run_map(
    corpus: &Path,
    base: &str,
    target: &str,
    strategy: Strategy,
    rules: &RuleArgs,
    out: Option<&Path>,
    format: FormatArg,
    timings: bool,
) -> ExitCode {
    let outcome = match read_corpus(corpus) {
        Ok(o) => o,
        Err(code) => return code,
    };
    let (base, target_domain) = match (find_domain(&outcome, base), find_domain(&outcome, target))
    {
        (Ok(b), Ok(t)) => (b, t),
        (Err(code), _) | (_, Err(code)) => return code,
    };
    let self_comparison = base.name() == target_domain.name();
    let result = run_comparison(
        base,
        target_domain,
        strategy,
        rules.rules(strategy),
        rules.caps(),
        self_comparison,
    );
    let mut comparison: ComparisonOutcome = match result {
        Ok(c) => c,
        Err(EngineError::Merge(e @ MergeError::CapExceeded { .. })) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CAP_EXCEEDED);
        }
    };
    eprintln!(
        "{} vs {} [{}]: best score {}, {:.3} ms",
        base.name(),
        target_domain.name(),
        comparison.report.strategy,
        comparison.report.best_gmap_score,
        comparison.report.wall_time_ms
    );
    if !timings {
        comparison.report.wall_time_ms = 0.0;
    }
    let text = match format {
        FormatArg::Json => {
            let rendered = map_result(base, target_domain, &comparison);
            let json = serde_json::to_string_pretty(&rendered).expect("report serializes");
            format!("{json}\n")
        }
        FormatArg::Csv => report_csv(&comparison.report),
    };
    emit(&text, out)
}

struct BenchRow {
    instance: String,
    seed: u64,
    spec: GeneratorSpec,
    strategy: Strategy,
    rules: RuleSet,
    outcome: Option<anlmap_core::report::RunReport>,
    error: String,
}

struct BenchPlan {
    sizes: Vec<usize>,
    facts_per_entity: f64,
    max_level: u32,
    pool_frac: f64,
    ambiguity: f64,
    instances: usize,
    seed: u64,
    strategies: Vec<Strategy>,
    self_map: bool,
    rules: RuleArgs,
    timings: bool,
}

fn bench_rows(plan: &BenchPlan) -> Vec<BenchRow> {
    let mut jobs = Vec::new();
    for &n in &plan.sizes {
        for i in 0..plan.instances {
            let spec = GeneratorSpec {
                n_entities: n,
                n_facts: ((n as f64) * plan.facts_per_entity).ceil() as usize,
                max_level: plan.max_level,
                predicate_pool: (((n as f64) * plan.pool_frac).ceil() as usize).max(4),
                ambiguity: plan.ambiguity,
                seed: plan
                    .seed
                    .wrapping_mul(1_000_003)
                    .wrapping_add((n as u64) * 1_000)
                    .wrapping_add(i as u64),
            };
            for &strategy in &plan.strategies {
                jobs.push((format!("{n}-{i}"), spec.clone(), strategy));
            }
        }
    }
    jobs.into_par_iter()
        .map(|(instance, spec, strategy)| {
            let rules = plan.rules.rules(strategy);
            let caps = plan.rules.caps();
            let domains = if plan.self_map {
                generate_domain(&spec).map(|d| (d.clone(), d))
            } else {
                generate_pair(&spec)
            };
            let (base, target) = match domains {
                Ok(pair) => pair,
                Err(e) => {
                    return BenchRow {
                        instance,
                        seed: spec.seed,
                        spec,
                        strategy,
                        rules,
                        outcome: None,
                        error: e.to_string(),
                    }
                }
            };
            let repeats = if plan.timings { 5 } else { 1 };
            let mut report = None;
            let mut times = Vec::with_capacity(repeats);
            let mut error = String::new();
            for _ in 0..repeats {
                match run_comparison(&base, &target, strategy, rules, caps, plan.self_map) {
                    Ok(outcome) => {
                        times.push(outcome.report.wall_time_ms);
                        report = Some(outcome.report);
                    }
                    Err(EngineError::Merge(e)) => {
                        error = e.to_string();
                        break;
                    }
                }
            }
            if let Some(r) = report.as_mut() {
                times.sort_by(f64::total_cmp);
                r.wall_time_ms = if plan.timings { times[times.len() / 2] } else { 0.0 };
            }
            BenchRow {
                instance,
                seed: spec.seed,
                spec,
                strategy,
                rules,
                outcome: if error.is_empty() { report } else { None },
                error,
            }
        })
        .collect()
}

#[derive(serde::Serialize)]
struct BenchRowOut<'a> {
    instance: &'a str,
    seed: u64,
    n_entities: usize,
    n_facts: usize,
    max_level: u32,
    predicate_pool: usize,
    ambiguity: f64,
    strategy: String,
    pred_rule: String,
    entity_mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<&'a anlmap_core::report::RunReport>,
    #[serde(skip_serializing_if = "String::is_empty")]
    error: String,
}

fn write_bench_json(rows: &[BenchRow]) -> String {
    let out: Vec<BenchRowOut> = rows
        .iter()
        .map(|row| BenchRowOut {
            instance: &row.instance,
            seed: row.seed,
            n_entities: row.spec.n_entities,
            n_facts: row.spec.n_facts,
            max_level: row.spec.max_level,
            predicate_pool: row.spec.predicate_pool,
            ambiguity: row.spec.ambiguity,
            strategy: row.strategy.to_string(),
            pred_rule: row.rules.predicate_rule.to_string(),
            entity_mode: row.rules.entity_mode.to_string(),
            report: row.outcome.as_ref(),
            error: row.error.clone(),
        })
        .collect();
    let json = serde_json::to_string_pretty(&out).expect("rows serialize");
    format!("{json}\n")
}

fn write_bench_csv(rows: &[BenchRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "instance",
        "seed",
        "n_entities",
        "n_facts",
        "max_level",
        "predicate_pool",
        "ambiguity",
        "strategy",
        "pred_rule",
        "entity_mode",
        "total_matches",
        "valid_matches",
        "pmap_count",
        "gmap_count",
        "best_gmap_size",
        "best_gmap_score",
        "cycles_to_best",
        "forks",
        "percent_correct",
        "wall_time_ms",
        "error",
    ])
    .unwrap();
    let opt = |v: Option<String>| v.unwrap_or_default();
    for row in rows {
        let r = row.outcome.as_ref();
        w.write_record([
            row.instance.clone(),
            row.seed.to_string(),
            row.spec.n_entities.to_string(),
            row.spec.n_facts.to_string(),
            row.spec.max_level.to_string(),
            row.spec.predicate_pool.to_string(),
            row.spec.ambiguity.to_string(),
            row.strategy.to_string(),
            row.rules.predicate_rule.to_string(),
            row.rules.entity_mode.to_string(),
            opt(r.map(|r| r.total_matches.to_string())),
            opt(r.map(|r| r.valid_matches.to_string())),
            opt(r.map(|r| r.pmap_count.to_string())),
            opt(r.map(|r| r.gmap_count.to_string())),
            opt(r.map(|r| r.best_gmap_size.to_string())),
            opt(r.map(|r| r.best_gmap_score.to_string())),
            opt(r.and_then(|r| r.cycles_to_best.map(|c| c.to_string()))),
            opt(r.and_then(|r| r.forks.map(|f| f.to_string()))),
            opt(r.and_then(|r| r.percent_correct.map(|p| p.to_string()))),
            opt(r.map(|r| r.wall_time_ms.to_string())),
            row.error.clone(),
        ])
        .unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Parse { corpus } => {
            let outcome = match read_corpus(&corpus) {
                Ok(o) => o,
                Err(code) => return code,
            };
            for d in &outcome.domains {
                let max_level = d.elements().map(|e| e.level).max().unwrap_or(0);
                println!(
                    "domain {}: {} entities, {} elements, {} facts, {} roots, max level {}",
                    d.name(),
                    d.entities().len(),
                    d.element_count(),
                    d.facts().len(),
                    d.roots().len(),
                    max_level
                );
            }
            let warnings = outcome
                .diagnostics
                .iter()
                .filter(|d| d.severity == Severity::Warning)
                .count();
            if warnings > 0 {
                eprintln!("{warnings} warning(s)");
            }
            ExitCode::SUCCESS
        }
        Command::Map {
            corpus,
            base,
            target,
            strategy,
            rules,
            out,
            format,
            timings,
        } => run_map(
            &corpus,
            &base,
            &target,
            strategy.into(),
            &rules,
            out.as_deref(),
            format,
            timings,
        ),
        Command::Selfmap {
            corpus,
            domain,
            strategy,
            rules,
            out,
            format,
            timings,
        } => run_map(
            &corpus,
            &domain,
            &domain,
            strategy.into(),
            &rules,
            out.as_deref(),
            format,
            timings,
        ),
        Command::Bench {
            entities,
            facts_per_entity,
            max_level,
            pool_frac,
            ambiguity,
            instances,
            seed,
            strategies,
            self_map,
            workers,
            rules,
            out,
            format,
            timings,
        } => {
            let strategies: Vec<Strategy> = strategies.into_iter().map(Into::into).collect();
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers.max(1))
                .build()
                .expect("worker pool");
            let plan = BenchPlan {
                sizes: entities,
                facts_per_entity,
                max_level,
                pool_frac,
                ambiguity,
                instances,
                seed,
                strategies,
                self_map,
                rules,
                timings,
            };
            let mut rows = pool.install(|| bench_rows(&plan));
            rows.sort_by(|a, b| {
                (&a.instance, a.strategy.to_string()).cmp(&(&b.instance, b.strategy.to_string()))
            });
            let failed = rows.iter().filter(|r| !r.error.is_empty()).count();
            eprintln!("{} rows, {} with errors", rows.len(), failed);
            let text = match format {
                FormatArg::Csv => write_bench_csv(&rows),
                FormatArg::Json => write_bench_json(&rows),
            };
            emit(&text, out.as_deref())
        }
        Command::Gen {
            entities,
            facts,
            max_level,
            pool,
            ambiguity,
            seed,
            pair,
            out,
        } => {
            let spec = GeneratorSpec {
                n_entities: entities,
                n_facts: facts,
                max_level,
                predicate_pool: pool,
                ambiguity,
                seed,
            };
            let text = if pair {
                match generate_pair(&spec) {
                    Ok((a, b)) => format!("{}{}", serialize(&a), serialize(&b)),
                    Err(e) => {
                        eprintln!("{e}");
                        return ExitCode::FAILURE;
                    }
                }
            } else {
                match generate_domain(&spec) {
                    Ok(d) => serialize(&d),
                    Err(e) => {
                        eprintln!("{e}");
                        return ExitCode::FAILURE;
                    }
                }
            };
            emit(&text, out.as_deref())
        }
    }
}
