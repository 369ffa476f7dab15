//! Acceptance suite: one test per shipping criterion, each printing a
//! PASS line with its measured numbers (visible with `--nocapture`).
//!
//! Run with `cargo test -p anlmap-cli --test acceptance`.

#[path = "../../core/tests/support/oracle.rs"]
mod oracle;

use std::fs;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use anlmap_core::domain::Domain;
use anlmap_core::generator::{generate_domain, generate_pair, GeneratorSpec};
use anlmap_core::gibson::{gibson_map_on, gibson_map_traced, self_map, GibsonConfig};
use anlmap_core::matcher::{
    generate_matches, match_count_profile, EntityMode, PredicateRule, RuleSet,
};
use anlmap_core::parser::parse_corpus;
use anlmap_core::report::{map_result, run_comparison, EngineCaps, Strategy};
use anlmap_core::smap::{
    build_pmaps, greedy_merge, optimal_merge, validate_gmap, DEFAULT_PMAP_CAP,
};

use oracle::Oracle;

fn corpus_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus/classics.anl")
}

fn corpus() -> Vec<Domain> {
    let text = fs::read_to_string(corpus_path()).expect("bundled corpus readable");
    let out = parse_corpus(&text);
    assert!(!out.has_errors(), "{:?}", out.diagnostics);
    out.domains
}

fn pick<'a>(domains: &'a [Domain], name: &str) -> &'a Domain {
    domains.iter().find(|d| d.name() == name).unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_anlmap"))
}

const FLOW_CANON: &[(&str, &str)] = &[
    ("pressure", "temperature"),
    ("beaker", "coffee"),
    ("vial", "ice-cube"),
    ("pipe", "bar"),
    ("water", "heat"),
];

/// Criterion 1: every strategy's top g-map on the flow pair carries the five
/// canonical correspondences, the selection engine's rank-1 g-map equals the
/// exhaustive oracle's, and each comparison stays under one second.
#[test]
fn criterion_1_classic_analogy_correctness() {
    let domains = corpus();
    let base = pick(&domains, "water-flow");
    let target = pick(&domains, "heat-flow");
    let mut slowest_ms: f64 = 0.0;
    for strategy in [Strategy::SmeGreedy, Strategy::SmeOptimal, Strategy::Gibson] {
        // Cross-named functions (pressure/temperature) require the
        // free-for-all predicate rule; entity modes stay at each strategy
        // family's default.
        let rules = RuleSet {
            predicate_rule: PredicateRule::FreeForAll,
            entity_mode: match strategy {
                Strategy::Gibson => EntityMode::AllPairs,
                _ => EntityMode::SanctionedOnly,
            },
        };
        let started = Instant::now();
        let outcome =
            run_comparison(base, target, strategy, rules, EngineCaps::default(), false).unwrap();
        let elapsed_ms = started.elapsed().as_secs_f64() * 1000.0;
        slowest_ms = slowest_ms.max(elapsed_ms);
        assert!(
            elapsed_ms < 1000.0,
            "{strategy} took {elapsed_ms:.1} ms on the flow pair"
        );
        let rendered = map_result(base, target, &outcome);
        let top = &rendered.gmaps[0];
        for (b, t) in FLOW_CANON {
            let found = top.correspondences.iter().any(|c| {
                (c.base == *b && c.target == *t)
                    || (c.base.starts_with(&format!("{b}("))
                        && c.target.starts_with(&format!("{t}(")))
            });
            assert!(found, "{strategy}: missing {b}~{t} in the top g-map");
        }
    }
    let rules = RuleSet::gibson_default();
    let set = generate_matches(base, target, rules);
    let gibson = gibson_map_on(&set, base, rules, GibsonConfig::default(), None);
    let oracle_gmap = optimal_merge(&set, &build_pmaps(&set), DEFAULT_PMAP_CAP).unwrap();
    assert_eq!(gibson.gmaps[0].members, oracle_gmap.members);
    assert_eq!(gibson.gmaps[0].score, oracle_gmap.score);
    println!(
        "PASS criterion 1: five canonical correspondences under all strategies, \
         rank-1 equals oracle (score {}), slowest comparison {slowest_ms:.1} ms",
        oracle_gmap.score
    );
}

/// Criterion 2: (a) on 200 random pairs with at most 20 consistent p-maps the
/// greedy first g-map never outscores the oracle and violates no invariant,
/// with the equality rate reported; (b) the selection engine equals the
/// oracle exactly on both bundled classics.
#[test]
fn criterion_2_oracle_equivalence() {
    let mut qualifying = 0usize;
    let mut equal = 0usize;
    let mut seed = 0u64;
    while qualifying < 200 {
        seed += 1;
        assert!(seed < 10_000, "generator starved the sample");
        let shape = seed % 3;
        let spec = GeneratorSpec {
            n_entities: 4 + (shape as usize),
            n_facts: 3 + (shape as usize),
            max_level: 2 + (shape as u32 % 2),
            predicate_pool: 14,
            ambiguity: 0.5,
            seed,
        };
        let Ok((a, b)) = generate_pair(&spec) else {
            continue;
        };
        let set = generate_matches(&a, &b, RuleSet::sme_default());
        let pmaps = build_pmaps(&set);
        if pmaps.iter().filter(|p| p.internally_consistent).count() > DEFAULT_PMAP_CAP {
            continue;
        }
        qualifying += 1;
        let optimal = optimal_merge(&set, &pmaps, DEFAULT_PMAP_CAP).unwrap();
        validate_gmap(&set, &optimal).unwrap();
        let greedy = greedy_merge(&set, &pmaps);
        for g in &greedy {
            validate_gmap(&set, g).unwrap();
        }
        let greedy_score = greedy.first().map(|g| g.score).unwrap_or(0.0);
        assert!(
            greedy_score <= optimal.score,
            "seed {seed}: greedy {greedy_score} outscored the oracle {}",
            optimal.score
        );
        if greedy_score == optimal.score {
            equal += 1;
        }
    }

    let domains = corpus();
    for (bn, tn) in [("water-flow", "heat-flow"), ("solar-system", "atom")] {
        let base = pick(&domains, bn);
        let target = pick(&domains, tn);
        let rules = RuleSet::gibson_default();
        let set = generate_matches(base, target, rules);
        let gibson = gibson_map_on(&set, base, rules, GibsonConfig::default(), None);
        let oracle_gmap = optimal_merge(&set, &build_pmaps(&set), DEFAULT_PMAP_CAP).unwrap();
        assert_eq!(gibson.gmaps[0].score, oracle_gmap.score, "{bn}/{tn}");
        assert_eq!(gibson.gmaps[0].members, oracle_gmap.members, "{bn}/{tn}");
    }
    println!(
        "PASS criterion 2: greedy <= oracle on {qualifying} pairs \
         (equal on {equal}, rate {:.1}%), selection engine exact on both classics",
        100.0 * equal as f64 / qualifying as f64
    );
}

/// Criterion 3: optimal self-maps recover the identity exactly on every
/// bundled and generated domain; the selection engine does too on
/// ambiguity-free generated domains.
#[test]
fn criterion_3_self_map_identity() {
    let domains = corpus();
    let mut checked = 0usize;
    for d in &domains {
        let outcome = run_comparison(
            d,
            d,
            Strategy::SmeOptimal,
            RuleSet::sme_default(),
            EngineCaps::default(),
            true,
        )
        .unwrap();
        assert_eq!(outcome.report.percent_correct, Some(100.0), "{}", d.name());
        checked += 1;
    }
    for seed in 1..=10u64 {
        let spec = GeneratorSpec {
            n_entities: 6,
            n_facts: 6,
            max_level: 3,
            predicate_pool: 30,
            ambiguity: 0.3,
            seed,
        };
        let d = generate_domain(&spec).unwrap();
        let outcome = run_comparison(
            &d,
            &d,
            Strategy::SmeOptimal,
            RuleSet::sme_default(),
            EngineCaps {
                pmap_cap: 64,
                ..EngineCaps::default()
            },
            true,
        )
        .unwrap();
        assert_eq!(outcome.report.percent_correct, Some(100.0), "seed {seed}");
        checked += 1;
    }
    for seed in 1..=10u64 {
        let spec = GeneratorSpec {
            n_entities: 6,
            n_facts: 6,
            max_level: 3,
            predicate_pool: 40,
            ambiguity: 0.0,
            seed,
        };
        let d = generate_domain(&spec).unwrap();
        let result = self_map(&d, RuleSet::sme_default());
        assert_eq!(result.report.percent_correct, Some(100.0), "seed {seed}");
        checked += 1;
    }
    println!("PASS criterion 3: identity recovered exactly on {checked} self-maps");
}

/// Criterion 4: the fitted growth exponent of total matches against entity
/// count under all-pairs mode lies in [1.8, 2.2] over sizes 8 to 64, well
/// inside the two-minute budget.
#[test]
fn criterion_4_complexity_shape() {
    let started = Instant::now();
    let profile = match_count_profile(64, RuleSet::gibson_default(), 42);
    let points: Vec<(f64, f64)> = profile
        .iter()
        .map(|&(n, m)| ((n as f64).ln(), (m as f64).ln()))
        .collect();
    let n = points.len() as f64;
    let sum_x: f64 = points.iter().map(|p| p.0).sum();
    let sum_y: f64 = points.iter().map(|p| p.1).sum();
    let sum_xy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let sum_xx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let slope = (n * sum_xy - sum_x * sum_y) / (n * sum_xx - sum_x * sum_x);
    let elapsed = started.elapsed().as_secs_f64();
    assert!(
        (1.8..=2.2).contains(&slope),
        "fitted exponent {slope:.3} outside [1.8, 2.2] over {profile:?}"
    );
    assert!(elapsed < 120.0, "profile took {elapsed:.1} s");
    println!(
        "PASS criterion 4: growth exponent {slope:.3} over sizes 8..=64 in {elapsed:.2} s"
    );
}

/// Criterion 5: an independent feature extraction agrees with the engine's
/// score decomposition, exactly, term by term, on every candidate at every
/// cycle of traced runs over the bundled corpus.
#[test]
fn criterion_5_score_decomposition() {
    let domains = corpus();
    let mut checked = 0usize;
    for (bn, tn) in [("water-flow", "heat-flow"), ("solar-system", "atom")] {
        let base = pick(&domains, bn);
        let target = pick(&domains, tn);
        for rules in [RuleSet::gibson_default(), RuleSet::sme_default()] {
            let set = generate_matches(base, target, rules);
            let oracle = Oracle::new(base, target, &set, rules.predicate_rule);
            let (_, trace) = gibson_map_traced(base, target, rules, GibsonConfig::default());
            for cycle in &trace.cycles {
                for (id, engine_score) in &cycle.scores {
                    let m = set.get(*id);
                    let parts = oracle.score(m.base, m.target, &cycle.known_before);
                    parts.assert_matches(
                        engine_score,
                        &format!(
                            "{}~{} at cycle {} of {bn}/{tn}",
                            base.render(m.base),
                            target.render(m.target),
                            cycle.cycle
                        ),
                    );
                    checked += 1;
                }
            }
        }
    }
    println!("PASS criterion 5: {checked} scores decomposed identically, exact integers");
}

/// Criterion 6: fixed inputs and seeds give byte-identical JSON from `map`
/// and byte-identical CSV from `bench`.
#[test]
fn criterion_6_determinism() {
    let map_run = || {
        let out = bin()
            .arg("map")
            .arg(corpus_path())
            .args(["water-flow", "heat-flow", "--strategy", "gibson"])
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    let map_bytes = map_run();
    assert_eq!(map_bytes, map_run(), "map JSON differed between runs");

    let bench_run = || {
        let out = bin()
            .args([
                "bench",
                "--entities",
                "8,16",
                "--instances",
                "2",
                "--seed",
                "9",
                "--workers",
                "4",
            ])
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    let bench_bytes = bench_run();
    assert_eq!(bench_bytes, bench_run(), "bench CSV differed between runs");
    println!(
        "PASS criterion 6: byte-identical outputs ({} JSON bytes, {} CSV bytes)",
        map_bytes.len(),
        bench_bytes.len()
    );
}

/// Criterion 7: the selection engine finishes an instance with at least
/// 10,000 total matches within ten minutes.
#[test]
fn criterion_7_scale_smoke() {
    let spec = GeneratorSpec {
        n_entities: 80,
        n_facts: 160,
        max_level: 3,
        predicate_pool: 40,
        ambiguity: 0.25,
        seed: 5_080_015,
    };
    let (base, target) = generate_pair(&spec).unwrap();
    let rules = RuleSet::gibson_default();
    let set = generate_matches(&base, &target, rules);
    assert!(
        set.total() >= 10_000,
        "instance too small: {} matches",
        set.total()
    );
    let started = Instant::now();
    let result = gibson_map_on(&set, &base, rules, GibsonConfig::default(), None);
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 600.0, "took {elapsed:.1} s");
    assert!(!result.gmaps.is_empty());
    validate_gmap(&set, &result.gmaps[0]).unwrap();
    println!(
        "PASS criterion 7: {} matches, best g-map {} members (score {}) in {elapsed:.2} s",
        set.total(),
        result.gmaps[0].members.len(),
        result.gmaps[0].score
    );
}
