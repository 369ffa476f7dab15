//! Match-hypothesis generation between a base and a target domain.
//!
//! A match hypothesis pairs one base element with one target element of the
//! same kind. Expression pairs are admitted by the predicate rule (identical
//! names, or free-for-all: any predicate of equal kind and arity); entity
//! pairs are either sanctioned by the argument positions of valid expression
//! matches or, in all-pairs mode, enumerated exhaustively. Each hypothesis
//! carries the static features consumed by the scoring formulas: argument
//! matches, the minimum level of the pair, element frequencies and
//! rootedness.
//!
//! Expression pairs whose predicate rule holds but whose arguments cannot be
//! matched are kept with `valid = false`: the raw space size is part of the
//! instrumentation surface. Downstream consumers filter on `valid`.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::domain::{Domain, ElementId, Payload};
use crate::generator::{generate_pair, GeneratorSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredicateRule {
    Identical,
    FreeForAll,
}

impl fmt::Display for PredicateRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredicateRule::Identical => write!(f, "identical"),
            PredicateRule::FreeForAll => write!(f, "free-for-all"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntityMode {
    SanctionedOnly,
    AllPairs,
}

impl fmt::Display for EntityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntityMode::SanctionedOnly => write!(f, "sanctioned-only"),
            EntityMode::AllPairs => write!(f, "all-pairs"),
        }
    }
}

/// Which matches are admitted into the hypothesis space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RuleSet {
    pub predicate_rule: PredicateRule,
    pub entity_mode: EntityMode,
}

impl RuleSet {
    /// Identical predicates, entity matches only where sanctioned.
    pub fn sme_default() -> Self {
        RuleSet {
            predicate_rule: PredicateRule::Identical,
            entity_mode: EntityMode::SanctionedOnly,
        }
    }

    /// Free-for-all predicates, every entity pair entertained.
    pub fn gibson_default() -> Self {
        RuleSet {
            predicate_rule: PredicateRule::FreeForAll,
            entity_mode: EntityMode::AllPairs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct MatchId(pub usize);

impl fmt::Display for MatchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchKind {
    Entity,
    Expression,
}

/// A candidate pairing of one base element with one target element.
#[derive(Debug, Clone)]
pub struct MatchHypothesis {
    pub id: MatchId,
    pub base: ElementId,
    pub target: ElementId,
    pub kind: MatchKind,
    /// One slot per argument position; `None` where no hypothesis exists for
    /// that pair (only possible on invalid matches).
    pub arg_matches: Vec<Option<MatchId>>,
    /// The predicate rule holds and every argument pair is recursively
    /// matchable.
    pub valid: bool,
    pub level_base: u32,
    pub level_target: u32,
    pub freq_base: u32,
    pub freq_target: u32,
    /// 0, 1 or 2: how many of the two elements are roots in their domains.
    pub rootedness: u32,
}

impl MatchHypothesis {
    /// Number of argument matches the hypothesis carries.
    pub fn am_size(&self) -> usize {
        self.arg_matches.iter().flatten().count()
    }

    /// Min(L(base), L(target)).
    pub fn min_level(&self) -> u32 {
        self.level_base.min(self.level_target)
    }
}

/// The full hypothesis space for one comparison, with per-element indexes.
#[derive(Debug, Clone)]
pub struct MatchSet {
    matches: Vec<MatchHypothesis>,
    by_base: HashMap<ElementId, Vec<MatchId>>,
    by_target: HashMap<ElementId, Vec<MatchId>>,
}

impl MatchSet {
    fn new() -> Self {
        MatchSet {
            matches: Vec::new(),
            by_base: HashMap::new(),
            by_target: HashMap::new(),
        }
    }

    fn push(&mut self, mut hypothesis: MatchHypothesis) -> MatchId {
        let id = MatchId(self.matches.len());
        hypothesis.id = id;
        self.by_base
            .entry(hypothesis.base)
            .or_default()
            .push(id);
        self.by_target
            .entry(hypothesis.target)
            .or_default()
            .push(id);
        self.matches.push(hypothesis);
        id
    }

    pub fn total(&self) -> usize {
        self.matches.len()
    }

    pub fn valid_count(&self) -> usize {
        self.matches.iter().filter(|m| m.valid).count()
    }

    pub fn entity_match_count(&self) -> usize {
        self.matches
            .iter()
            .filter(|m| m.kind == MatchKind::Entity)
            .count()
    }

    pub fn get(&self, id: MatchId) -> &MatchHypothesis {
        &self.matches[id.0]
    }

    pub fn iter(&self) -> impl Iterator<Item = &MatchHypothesis> {
        self.matches.iter()
    }

    pub fn by_base(&self, id: ElementId) -> &[MatchId] {
        self.by_base.get(&id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn by_target(&self, id: ElementId) -> &[MatchId] {
        self.by_target.get(&id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// The downward closure of a match: itself plus, recursively, all its
    /// argument matches. Sorted by id.
    pub fn closure(&self, id: MatchId) -> Vec<MatchId> {
        let mut seen = Vec::new();
        let mut stack = vec![id];
        while let Some(m) = stack.pop() {
            if seen.contains(&m) {
                continue;
            }
            seen.push(m);
            stack.extend(self.matches[m.0].arg_matches.iter().flatten().copied());
        }
        seen.sort_unstable();
        seen
    }
}

fn rule_admits(base: &Domain, target: &Domain, b: ElementId, t: ElementId, rule: PredicateRule) -> bool {
    let (bp, tp) = match (
        &base.element(b).unwrap().payload,
        &target.element(t).unwrap().payload,
    ) {
        (Payload::Expression { pred: bp, .. }, Payload::Expression { pred: tp, .. }) => (bp, tp),
        _ => return false,
    };
    let bd = base.decl(*bp);
    let td = target.decl(*tp);
    if bd.kind != td.kind || bd.arity != td.arity {
        return false;
    }
    match rule {
        PredicateRule::Identical => bd.name == td.name,
        PredicateRule::FreeForAll => true,
    }
}

/// Generate the full match-hypothesis space between two domains.
///
/// Deterministic: identical inputs produce identical sets including id
/// assignment.
pub fn generate_matches(base: &Domain, target: &Domain, rules: RuleSet) -> MatchSet {
    let mut set = MatchSet::new();
    let mut entity_ids: HashMap<(ElementId, ElementId), MatchId> = HashMap::new();
    let mut expr_ids: HashMap<(ElementId, ElementId), MatchId> = HashMap::new();

    let make_entity = |set: &mut MatchSet,
                           entity_ids: &mut HashMap<(ElementId, ElementId), MatchId>,
                           b: ElementId,
                           t: ElementId| {
        if let Some(&id) = entity_ids.get(&(b, t)) {
            return id;
        }
        let hypothesis = MatchHypothesis {
            id: MatchId(0),
            base: b,
            target: t,
            kind: MatchKind::Entity,
            arg_matches: Vec::new(),
            valid: true,
            level_base: 0,
            level_target: 0,
            freq_base: base.freq_of(b).unwrap(),
            freq_target: target.freq_of(t).unwrap(),
            rootedness: 0,
        };
        let id = set.push(hypothesis);
        entity_ids.insert((b, t), id);
        id
    };

    if rules.entity_mode == EntityMode::AllPairs {
        for &b in base.entities() {
            for &t in target.entities() {
                make_entity(&mut set, &mut entity_ids, b, t);
            }
        }
    }

    // Expression pairs admitted by the predicate rule, processed arguments
    // before parents: the max level of a pair strictly dominates the max
    // level of each of its argument pairs.
    let mut pairs: Vec<(u32, ElementId, ElementId)> = Vec::new();
    for be in base.elements().filter(|e| e.is_expression()) {
        for te in target.elements().filter(|e| e.is_expression()) {
            if rule_admits(base, target, be.id, te.id, rules.predicate_rule) {
                pairs.push((be.level.max(te.level), be.id, te.id));
            }
        }
    }
    pairs.sort_unstable();

    for (_, b, t) in pairs {
        let bargs = match &base.element(b).unwrap().payload {
            Payload::Expression { args, .. } => args.clone(),
            Payload::Entity(_) => unreachable!(),
        };
        let targs = match &target.element(t).unwrap().payload {
            Payload::Expression { args, .. } => args.clone(),
            Payload::Entity(_) => unreachable!(),
        };
        let mut valid = true;
        for (&ba, &ta) in bargs.iter().zip(&targs) {
            let b_entity = base.element(ba).unwrap().is_entity();
            let t_entity = target.element(ta).unwrap().is_entity();
            match (b_entity, t_entity) {
                (true, true) => {}
                (false, false) => match expr_ids.get(&(ba, ta)) {
                    Some(&sub) if set.get(sub).valid => {}
                    _ => valid = false,
                },
                _ => valid = false,
            }
        }
        let mut arg_matches = Vec::with_capacity(bargs.len());
        for (&ba, &ta) in bargs.iter().zip(&targs) {
            let b_entity = base.element(ba).unwrap().is_entity();
            let t_entity = target.element(ta).unwrap().is_entity();
            let slot = match (b_entity, t_entity) {
                (true, true) => {
                    if valid || rules.entity_mode == EntityMode::AllPairs {
                        Some(make_entity(&mut set, &mut entity_ids, ba, ta))
                    } else {
                        entity_ids.get(&(ba, ta)).copied()
                    }
                }
                (false, false) => expr_ids.get(&(ba, ta)).copied(),
                _ => None,
            };
            arg_matches.push(slot);
        }
        let hypothesis = MatchHypothesis {
            id: MatchId(0),
            base: b,
            target: t,
            kind: MatchKind::Expression,
            arg_matches,
            valid,
            level_base: base.level_of(b).unwrap(),
            level_target: target.level_of(t).unwrap(),
            freq_base: base.freq_of(b).unwrap(),
            freq_target: target.freq_of(t).unwrap(),
            rootedness: u32::from(base.is_root(b).unwrap())
                + u32::from(target.is_root(t).unwrap()),
        };
        let id = set.push(hypothesis);
        expr_ids.insert((b, t), id);
    }
    set
}

/// Total match counts for randomly generated, structurally similar domain
/// pairs of doubling size (8, 16, ... up to `n_entities`), at fixed structure
/// density. Supports empirical growth checks on the match space.
pub fn match_count_profile(
    n_entities: usize,
    rules: RuleSet,
    seed: u64,
) -> Vec<(usize, usize)> {
    let mut sizes = Vec::new();
    if n_entities < 8 {
        sizes.push(n_entities.max(1));
    } else {
        let mut s = 8;
        while s <= n_entities {
            sizes.push(s);
            s *= 2;
        }
    }
    sizes
        .into_iter()
        .map(|size| {
            let spec = GeneratorSpec {
                n_entities: size,
                n_facts: 2 * size,
                max_level: 3,
                predicate_pool: (size / 2).max(4),
                ambiguity: 0.25,
                seed: seed.wrapping_add(size as u64),
            };
            let (a, b) = generate_pair(&spec).expect("profile spec is feasible");
            let matches = generate_matches(&a, &b, rules);
            (size, matches.total())
        })
        .collect()
}
