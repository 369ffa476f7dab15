//! Seeded random domain generation for benchmarks and property tests.
//!
//! Construction is deterministic in the seed. The predicate pool (names,
//! kinds, arities) is a pure function of the pool size, so two domains
//! generated from the same spec with different seeds share their
//! declarations and stay structurally comparable. The `ambiguity` knob is
//! the probability that an expression reuses an already-used predicate name;
//! at 0 every distinct expression gets a fresh name, so an identical-rule
//! self comparison has no cross matches at all.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::domain::{Domain, DomainBuilder, ElementId, PredId, PredicateKind};

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub n_entities: usize,
    pub n_facts: usize,
    pub max_level: u32,
    pub predicate_pool: usize,
    /// Probability in [0, 1] that an expression reuses an existing predicate.
    pub ambiguity: f64,
    pub seed: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeneratorError {
    #[error("infeasible generator spec: {0}")]
    Infeasible(String),
}

struct Pool {
    decls: Vec<(String, PredicateKind, usize)>,
}

/// Pool contents depend only on the pool size, never on the seed.
fn pool(n: usize) -> Pool {
    let mut decls = Vec::with_capacity(n);
    for i in 0..n {
        let (name, kind, arity) = match i % 4 {
            0 => (format!("rel{i}"), PredicateKind::Relation, 2),
            1 => (format!("att{i}"), PredicateKind::Attribute, 1),
            2 => (format!("fun{i}"), PredicateKind::Function, 1),
            _ => (format!("rel{i}"), PredicateKind::Relation, 3),
        };
        decls.push((name, kind, arity));
    }
    Pool { decls }
}

struct Builderland {
    builder: DomainBuilder,
    preds: Vec<PredId>,
    kinds: Vec<PredicateKind>,
    arities: Vec<usize>,
    used_pred: Vec<bool>,
    entity_ids: Vec<ElementId>,
    entity_uses: Vec<usize>,
}

impl Builderland {
    /// Fewest entities an expression of this level can consume, given the
    /// cheapest predicates in the pool.
    fn min_entity_need(&self, level: u32) -> usize {
        let min_leaf = self.arities.iter().copied().min().unwrap_or(1);
        let min_spine_extra = self
            .kinds
            .iter()
            .zip(&self.arities)
            .filter(|(k, _)| **k == PredicateKind::Relation)
            .map(|(_, a)| a - 1)
            .min()
            .unwrap_or(usize::MAX / 2);
        min_leaf + (level as usize - 1) * min_spine_extra
    }

    /// Pick a predicate index matching `filter`. With probability `ambiguity`
    /// reuse one already in play, otherwise take a fresh one; at ambiguity 0 a
    /// fresh predicate is mandatory.
    fn pick_pred(
        &mut self,
        rng: &mut ChaCha8Rng,
        ambiguity: f64,
        filter: impl Fn(PredicateKind, usize) -> bool,
    ) -> Result<usize, GeneratorError> {
        let used: Vec<usize> = (0..self.preds.len())
            .filter(|&i| self.used_pred[i] && filter(self.kinds[i], self.arities[i]))
            .collect();
        let unused: Vec<usize> = (0..self.preds.len())
            .filter(|&i| !self.used_pred[i] && filter(self.kinds[i], self.arities[i]))
            .collect();
        let reuse = !used.is_empty() && rng.random_bool(ambiguity);
        let idx = if reuse {
            used[rng.random_range(0..used.len())]
        } else if !unused.is_empty() {
            unused[rng.random_range(0..unused.len())]
        } else if ambiguity > 0.0 && !used.is_empty() {
            used[rng.random_range(0..used.len())]
        } else {
            return Err(GeneratorError::Infeasible(
                "no usable predicate: pool exhausted at ambiguity 0, or arities exceed \
                 the entity budget"
                    .to_string(),
            ));
        };
        self.used_pred[idx] = true;
        Ok(idx)
    }

    /// Least-used entity not already in this fact; ties broken by the rng.
    fn pick_entity(
        &mut self,
        rng: &mut ChaCha8Rng,
        in_fact: &mut Vec<ElementId>,
    ) -> Result<ElementId, GeneratorError> {
        let candidates: Vec<usize> = (0..self.entity_ids.len())
            .filter(|&i| !in_fact.contains(&self.entity_ids[i]))
            .collect();
        let min = candidates
            .iter()
            .map(|&i| self.entity_uses[i])
            .min()
            .ok_or_else(|| {
                GeneratorError::Infeasible(
                    "not enough entities for one fact; raise n_entities".to_string(),
                )
            })?;
        let least: Vec<usize> = candidates
            .into_iter()
            .filter(|&i| self.entity_uses[i] == min)
            .collect();
        let i = least[rng.random_range(0..least.len())];
        self.entity_uses[i] += 1;
        let id = self.entity_ids[i];
        in_fact.push(id);
        Ok(id)
    }

    /// Build one expression of exactly `level`. `reserved` counts entity
    /// slots ancestors still have to fill: entities are never reused within
    /// one fact, so every predicate choice must leave room for them.
    fn build_expr(
        &mut self,
        rng: &mut ChaCha8Rng,
        ambiguity: f64,
        level: u32,
        in_fact: &mut Vec<ElementId>,
        reserved: usize,
    ) -> Result<ElementId, GeneratorError> {
        let remaining = self.entity_ids.len() - in_fact.len();
        let available = remaining.saturating_sub(reserved);
        let idx = if level <= 1 {
            self.pick_pred(rng, ambiguity, |_, arity| arity <= available)?
        } else {
            // Only relations can carry an expression spine of any kind.
            let below = self.min_entity_need(level - 1);
            self.pick_pred(rng, ambiguity, |k, arity| {
                k == PredicateKind::Relation && (arity - 1) + below <= available
            })?
        };
        let arity = self.arities[idx];
        let mut args = vec![None; arity];
        if level > 1 {
            let spine = rng.random_range(0..arity);
            let child =
                self.build_expr(rng, ambiguity, level - 1, in_fact, reserved + arity - 1)?;
            args[spine] = Some(child);
        }
        for slot in args.iter_mut() {
            if slot.is_none() {
                *slot = Some(self.pick_entity(rng, in_fact)?);
            }
        }
        let args: Vec<ElementId> = args.into_iter().map(Option::unwrap).collect();
        self.builder
            .expr(self.preds[idx], args)
            .map_err(|e| GeneratorError::Infeasible(e.to_string()))
    }
}

fn validate(spec: &GeneratorSpec) -> Result<(), GeneratorError> {
    if spec.n_entities == 0 || spec.n_facts == 0 || spec.max_level == 0 || spec.predicate_pool == 0
    {
        return Err(GeneratorError::Infeasible(
            "all counts must be positive".to_string(),
        ));
    }
    if !(0.0..=1.0).contains(&spec.ambiguity) {
        return Err(GeneratorError::Infeasible(
            "ambiguity must lie in [0, 1]".to_string(),
        ));
    }
    Ok(())
}

fn generate_named(spec: &GeneratorSpec, name: String) -> Result<Domain, GeneratorError> {
    validate(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut builder = DomainBuilder::new(name);
    let pool = pool(spec.predicate_pool);
    let mut preds = Vec::new();
    let mut kinds = Vec::new();
    let mut arities = Vec::new();
    for (name, kind, arity) in &pool.decls {
        preds.push(
            builder
                .declare(name.clone(), *kind, *arity)
                .expect("pool names are unique"),
        );
        kinds.push(*kind);
        arities.push(*arity);
    }
    let entity_ids: Vec<ElementId> = (0..spec.n_entities)
        .map(|i| builder.entity(format!("e{i}")))
        .collect();
    let mut land = Builderland {
        builder,
        preds,
        kinds,
        arities,
        used_pred: vec![false; spec.predicate_pool],
        entity_uses: vec![0; entity_ids.len()],
        entity_ids,
    };
    for i in 0..spec.n_facts {
        let level = if i == 0 {
            spec.max_level
        } else {
            1 + ((i as u32 - 1) % spec.max_level)
        };
        let mut in_fact = Vec::new();
        let expr = land.build_expr(&mut rng, spec.ambiguity, level, &mut in_fact, 0)?;
        land.builder.fact(expr).expect("facts are expressions");
    }
    if land.entity_uses.contains(&0) {
        return Err(GeneratorError::Infeasible(
            "not every entity was placed in a fact; raise n_facts or lower n_entities".to_string(),
        ));
    }
    Ok(land.builder.build())
}

/// Generate one domain, deterministically in the seed.
pub fn generate_domain(spec: &GeneratorSpec) -> Result<Domain, GeneratorError> {
    generate_named(spec, format!("gen-{}", spec.seed))
}

/// Generate a structurally similar base/target pair: same spec, two derived
/// seeds, shared predicate declarations.
pub fn generate_pair(spec: &GeneratorSpec) -> Result<(Domain, Domain), GeneratorError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let seed_a = rng.next_u64();
    let seed_b = rng.next_u64();
    let a = generate_named(
        &GeneratorSpec {
            seed: seed_a,
            ..spec.clone()
        },
        format!("gen-{}-a", spec.seed),
    )?;
    let b = generate_named(
        &GeneratorSpec {
            seed: seed_b,
            ..spec.clone()
        },
        format!("gen-{}-b", spec.seed),
    )?;
    Ok((a, b))
}
