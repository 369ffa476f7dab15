//! Independent feature extraction used to cross-check engine scores.
//!
//! Everything is rederived from element payloads: no cached match features,
//! no engine closure tables. Shared between the core feature tests and the
//! acceptance suite via `#[path]` includes.

use std::collections::HashMap;

use anlmap_core::domain::{Domain, ElementId, Payload};
use anlmap_core::gibson::GibsonScore;
use anlmap_core::matcher::{MatchId, MatchSet, PredicateRule};

pub fn level_oracle(d: &Domain, id: ElementId) -> u64 {
    match &d.element(id).unwrap().payload {
        Payload::Entity(_) => 0,
        Payload::Expression { args, .. } => {
            1 + args.iter().map(|&a| level_oracle(d, a)).max().unwrap()
        }
    }
}

fn contains(d: &Domain, hay: ElementId, needle: ElementId) -> bool {
    if hay == needle {
        return true;
    }
    match &d.element(hay).unwrap().payload {
        Payload::Entity(_) => false,
        Payload::Expression { args, .. } => args.iter().any(|&a| contains(d, a, needle)),
    }
}

pub fn freq_oracle(d: &Domain, id: ElementId) -> u64 {
    d.facts().iter().filter(|&&f| contains(d, f, id)).count() as u64
}

pub fn root_oracle(d: &Domain, id: ElementId) -> bool {
    let is_fact = d.facts().contains(&id);
    let is_argument = d.elements().any(|e| match &e.payload {
        Payload::Expression { args, .. } => args.contains(&id),
        Payload::Entity(_) => false,
    });
    is_fact && !is_argument
}

/// Would the pair (b, t) be admitted as a valid match under the rule?
pub fn matchable_oracle(
    base: &Domain,
    target: &Domain,
    b: ElementId,
    t: ElementId,
    rule: PredicateRule,
) -> bool {
    match (
        &base.element(b).unwrap().payload,
        &target.element(t).unwrap().payload,
    ) {
        (Payload::Entity(_), Payload::Entity(_)) => true,
        (
            Payload::Expression {
                pred: bp,
                args: bargs,
            },
            Payload::Expression {
                pred: tp,
                args: targs,
            },
        ) => {
            let bd = base.decl(*bp);
            let td = target.decl(*tp);
            let heads_ok = bd.kind == td.kind
                && bd.arity == td.arity
                && (rule == PredicateRule::FreeForAll || bd.name == td.name);
            heads_ok
                && bargs
                    .iter()
                    .zip(targs)
                    .all(|(&ba, &ta)| matchable_oracle(base, target, ba, ta, rule))
        }
        _ => false,
    }
}

/// Element-pair closure of a match, derived from domain structure alone.
fn closure_pairs_oracle(
    base: &Domain,
    target: &Domain,
    b: ElementId,
    t: ElementId,
    acc: &mut Vec<(ElementId, ElementId)>,
) {
    if acc.contains(&(b, t)) {
        return;
    }
    acc.push((b, t));
    if let (
        Payload::Expression { args: bargs, .. },
        Payload::Expression { args: targs, .. },
    ) = (
        &base.element(b).unwrap().payload,
        &target.element(t).unwrap().payload,
    ) {
        for (&ba, &ta) in bargs.iter().zip(targs) {
            closure_pairs_oracle(base, target, ba, ta, acc);
        }
    }
}

pub struct Oracle<'a> {
    base: &'a Domain,
    target: &'a Domain,
    rule: PredicateRule,
    pair_to_id: HashMap<(ElementId, ElementId), MatchId>,
}

impl<'a> Oracle<'a> {
    pub fn new(base: &'a Domain, target: &'a Domain, set: &MatchSet, rule: PredicateRule) -> Self {
        let pair_to_id = set.iter().map(|m| ((m.base, m.target), m.id)).collect();
        Oracle {
            base,
            target,
            rule,
            pair_to_id,
        }
    }

    pub fn score(&self, b: ElementId, t: ElementId, known: &[MatchId]) -> GibsonScoreParts {
        let am = match (
            &self.base.element(b).unwrap().payload,
            &self.target.element(t).unwrap().payload,
        ) {
            (
                Payload::Expression { args: bargs, .. },
                Payload::Expression { args: targs, .. },
            ) => bargs
                .iter()
                .zip(targs)
                .filter(|(&ba, &ta)| matchable_oracle(self.base, self.target, ba, ta, self.rule))
                .count() as u64,
            _ => 0,
        };
        let min_level = level_oracle(self.base, b).min(level_oracle(self.target, t));
        let freq_base = freq_oracle(self.base, b);
        let freq_target = freq_oracle(self.target, t);
        let rootedness =
            u64::from(root_oracle(self.base, b)) + u64::from(root_oracle(self.target, t));
        let mut pairs = Vec::new();
        closure_pairs_oracle(self.base, self.target, b, t, &mut pairs);
        let nn = pairs
            .iter()
            .filter(|pair| {
                let id = self
                    .pair_to_id
                    .get(pair)
                    .expect("closure pair of a valid match exists in the space");
                !known.contains(id)
            })
            .count() as u64;
        let kn = known.len() as u64;
        GibsonScoreParts {
            am,
            min_level,
            freq_base,
            freq_target,
            rootedness,
            new_times_known: nn * kn,
        }
    }
}

pub struct GibsonScoreParts {
    pub am: u64,
    pub min_level: u64,
    pub freq_base: u64,
    pub freq_target: u64,
    pub rootedness: u64,
    pub new_times_known: u64,
}

impl GibsonScoreParts {
    pub fn total(&self) -> u64 {
        self.am
            + self.min_level
            + self.freq_base
            + self.freq_target
            + self.rootedness
            + self.new_times_known
    }

    pub fn assert_matches(&self, engine: &GibsonScore, context: &str) {
        assert_eq!(self.am, engine.am_size, "AM term diverges for {context}");
        assert_eq!(
            self.min_level, engine.min_level,
            "level term diverges for {context}"
        );
        assert_eq!(
            self.freq_base, engine.freq_base,
            "base frequency diverges for {context}"
        );
        assert_eq!(
            self.freq_target, engine.freq_target,
            "target frequency diverges for {context}"
        );
        assert_eq!(
            self.rootedness, engine.rootedness,
            "rootedness diverges for {context}"
        );
        assert_eq!(
            self.new_times_known, engine.new_times_known,
            "dynamic term diverges for {context}"
        );
        assert_eq!(self.total(), engine.total, "total diverges for {context}");
    }
}
