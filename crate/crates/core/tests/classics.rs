//! Behavior of the three strategies on the bundled classic analogies.

use std::fs;
use std::path::Path;

use anlmap_core::domain::Domain;
use anlmap_core::gibson::{gibson_map, DEFAULT_FORK_CAP};
use anlmap_core::matcher::{generate_matches, EntityMode, PredicateRule, RuleSet};
use anlmap_core::parser::parse_corpus;
use anlmap_core::report::{map_result, run_comparison, EngineCaps, Strategy};
use anlmap_core::smap::{build_pmaps, optimal_merge, validate_gmap, DEFAULT_PMAP_CAP};

fn corpus() -> Vec<Domain> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/classics.anl");
    let text = fs::read_to_string(path).expect("bundled corpus readable");
    let out = parse_corpus(&text);
    assert!(!out.has_errors(), "{:?}", out.diagnostics);
    out.domains
}

fn pick<'a>(domains: &'a [Domain], name: &str) -> &'a Domain {
    domains.iter().find(|d| d.name() == name).unwrap()
}

/// Cross-named predicates (pressure vs temperature) need the free-for-all
/// rule; entity modes stay at each strategy family's default.
fn free_rules(strategy: Strategy) -> RuleSet {
    RuleSet {
        predicate_rule: PredicateRule::FreeForAll,
        entity_mode: match strategy {
            Strategy::Gibson => EntityMode::AllPairs,
            _ => EntityMode::SanctionedOnly,
        },
    }
}

fn top_contains(
    base: &Domain,
    target: &Domain,
    strategy: Strategy,
    wanted: &[(&str, &str)],
) {
    let outcome = run_comparison(
        base,
        target,
        strategy,
        free_rules(strategy),
        EngineCaps::default(),
        false,
    )
    .unwrap();
    let rendered = map_result(base, target, &outcome);
    let top = &rendered.gmaps[0];
    for (b, t) in wanted {
        let found = top.correspondences.iter().any(|c| {
            (c.base == *b && c.target == *t)
                || (c.base.starts_with(&format!("{b}(")) && c.target.starts_with(&format!("{t}(")))
        });
        assert!(
            found,
            "{strategy}: expected {b}~{t} in the top g-map, got {:?}",
            top.correspondences
        );
    }
}

const FLOW_CANON: &[(&str, &str)] = &[
    ("pressure", "temperature"),
    ("beaker", "coffee"),
    ("vial", "ice-cube"),
    ("pipe", "bar"),
    ("water", "heat"),
];

#[test]
fn all_three_strategies_find_the_flow_interpretation() {
    let domains = corpus();
    let base = pick(&domains, "water-flow");
    let target = pick(&domains, "heat-flow");
    for strategy in [Strategy::SmeGreedy, Strategy::SmeOptimal, Strategy::Gibson] {
        top_contains(base, target, strategy, FLOW_CANON);
    }
}

#[test]
fn gibson_rank_one_equals_the_oracle_on_the_flow_pair() {
    let domains = corpus();
    let base = pick(&domains, "water-flow");
    let target = pick(&domains, "heat-flow");
    let rules = RuleSet::gibson_default();
    let result = gibson_map(base, target, rules, DEFAULT_FORK_CAP);
    let set = generate_matches(base, target, rules);
    let oracle = optimal_merge(&set, &build_pmaps(&set), DEFAULT_PMAP_CAP).unwrap();
    assert_eq!(result.gmaps[0].score, oracle.score);
    assert_eq!(result.gmaps[0].members, oracle.members);
    validate_gmap(&set, &result.gmaps[0]).unwrap();
}

#[test]
fn gibson_rank_one_equals_the_oracle_on_the_atom_pair() {
    let domains = corpus();
    let base = pick(&domains, "solar-system");
    let target = pick(&domains, "atom");
    let rules = RuleSet::gibson_default();
    let result = gibson_map(base, target, rules, DEFAULT_FORK_CAP);
    let set = generate_matches(base, target, rules);
    let oracle = optimal_merge(&set, &build_pmaps(&set), DEFAULT_PMAP_CAP).unwrap();
    assert_eq!(result.gmaps[0].score, oracle.score);
    assert_eq!(result.gmaps[0].members, oracle.members);
}

#[test]
fn atom_interpretation_is_the_standard_one() {
    let domains = corpus();
    let base = pick(&domains, "solar-system");
    let target = pick(&domains, "atom");
    for strategy in [Strategy::SmeGreedy, Strategy::SmeOptimal, Strategy::Gibson] {
        top_contains(
            base,
            target,
            strategy,
            &[
                ("sun", "nucleus"),
                ("planet", "electron"),
                ("mass", "charge"),
            ],
        );
    }
}

#[test]
fn gibson_needs_few_cycles_on_the_classics() {
    let domains = corpus();
    for (b, t) in [("water-flow", "heat-flow"), ("solar-system", "atom")] {
        let result = gibson_map(
            pick(&domains, b),
            pick(&domains, t),
            RuleSet::gibson_default(),
            DEFAULT_FORK_CAP,
        );
        assert!(
            result.cycles_to_best <= 4,
            "{b}/{t} took {} cycles",
            result.cycles_to_best
        );
    }
}

#[test]
fn every_strategy_self_maps_the_classics_perfectly() {
    let domains = corpus();
    for d in &domains {
        for strategy in [Strategy::SmeGreedy, Strategy::SmeOptimal, Strategy::Gibson] {
            let outcome = run_comparison(
                d,
                d,
                strategy,
                RuleSet::sme_default(),
                EngineCaps::default(),
                true,
            )
            .unwrap();
            assert_eq!(
                outcome.report.percent_correct,
                Some(100.0),
                "{strategy} on {}",
                d.name()
            );
        }
    }
}
