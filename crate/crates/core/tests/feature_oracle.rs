//! Term-by-term agreement between the engine's scores and an independent
//! feature extraction on the bundled corpus.

#[path = "support/oracle.rs"]
mod oracle;

use std::fs;
use std::path::Path;

use anlmap_core::domain::Domain;
use anlmap_core::gibson::{gibson_map_traced, GibsonConfig, GibsonScore};
use anlmap_core::matcher::{generate_matches, RuleSet};
use anlmap_core::parser::parse_corpus;

use oracle::Oracle;

fn corpus() -> Vec<Domain> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/classics.anl");
    let text = fs::read_to_string(path).expect("bundled corpus readable");
    let out = parse_corpus(&text);
    assert!(!out.has_errors(), "{:?}", out.diagnostics);
    out.domains
}

fn check_pair(base: &Domain, target: &Domain, rules: RuleSet) {
    let set = generate_matches(base, target, rules);
    let oracle = Oracle::new(base, target, &set, rules.predicate_rule);
    let (_, trace) = gibson_map_traced(base, target, rules, GibsonConfig::default());
    let mut checked = 0usize;
    for cycle in &trace.cycles {
        for (id, engine_score) in &cycle.scores {
            let m = set.get(*id);
            let parts = oracle.score(m.base, m.target, &cycle.known_before);
            let context = format!(
                "{}~{} at branch {} cycle {}",
                base.render(m.base),
                target.render(m.target),
                cycle.branch,
                cycle.cycle
            );
            parts.assert_matches(engine_score, &context);
            checked += 1;
        }
    }
    assert!(checked > 0, "trace exercised no candidates");
}

#[test]
fn every_term_agrees_on_the_flow_pair() {
    let domains = corpus();
    let base = domains.iter().find(|d| d.name() == "water-flow").unwrap();
    let target = domains.iter().find(|d| d.name() == "heat-flow").unwrap();
    check_pair(base, target, RuleSet::gibson_default());
    check_pair(base, target, RuleSet::sme_default());
}

#[test]
fn every_term_agrees_on_the_atom_pair() {
    let domains = corpus();
    let base = domains.iter().find(|d| d.name() == "solar-system").unwrap();
    let target = domains.iter().find(|d| d.name() == "atom").unwrap();
    check_pair(base, target, RuleSet::gibson_default());
    check_pair(base, target, RuleSet::sme_default());
}

#[test]
fn static_features_agree_for_every_valid_match() {
    let domains = corpus();
    let pairs = [("water-flow", "heat-flow"), ("solar-system", "atom")];
    for (bn, tn) in pairs {
        let base = domains.iter().find(|d| d.name() == bn).unwrap();
        let target = domains.iter().find(|d| d.name() == tn).unwrap();
        for rules in [RuleSet::gibson_default(), RuleSet::sme_default()] {
            let set = generate_matches(base, target, rules);
            let oracle = Oracle::new(base, target, &set, rules.predicate_rule);
            for m in set.iter().filter(|m| m.valid) {
                let parts = oracle.score(m.base, m.target, &[]);
                let engine = GibsonScore::compute(m, 0, 0);
                // With empty known the dynamic term vanishes on both sides.
                parts.assert_matches(
                    &engine,
                    &format!("{}~{}", base.render(m.base), target.render(m.target)),
                );
            }
        }
    }
}
