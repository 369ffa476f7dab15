//! Partial mappings (p-maps) and their merging into global mappings.
//!
//! A p-map is the downward closure of a root match: the root plus,
//! recursively, every argument match, down to terminal entity matches. Each
//! p-map carries a Structural Evaluation Score rewarding size and
//! connectivity: every member contributes 1 plus the level of its base
//! element. Two merge strategies turn p-maps into g-maps:
//!
//! - [`greedy_merge`] seeds from the highest-scoring p-map and folds in the
//!   rest in score order whenever the union stays one-to-one, restarting from
//!   the best unconsumed seed until every consistent p-map is covered;
//! - [`optimal_merge`] exhaustively searches consistent unions and returns
//!   the best, with a hard cap on the p-map count. It is the oracle the
//!   heuristic strategies are measured against.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::domain::ElementId;
use crate::matcher::{MatchId, MatchKind, MatchSet};

/// Refusal budget for the exhaustive merge.
pub const DEFAULT_PMAP_CAP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PMapId(pub usize);

impl fmt::Display for PMapId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

/// Downward closure of matches under one root match.
#[derive(Debug, Clone)]
pub struct PMap {
    pub id: PMapId,
    pub root_match: MatchId,
    /// All member matches, sorted by id.
    pub members: Vec<MatchId>,
    /// (base entity, target entity) pairs among the members.
    pub entity_correspondences: Vec<(ElementId, ElementId)>,
    pub ses: f64,
    /// False when the closure itself maps some element twice.
    pub internally_consistent: bool,
}

/// Where a g-map came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    /// P-maps merged into the g-map, in merge order.
    MergedPMaps(Vec<PMapId>),
    /// The match selected at each cycle of the selection loop.
    CycleSelections(Vec<MatchId>),
}

/// A global mapping: one-to-one, closed under parallel connectivity.
#[derive(Debug, Clone, PartialEq)]
pub struct GMap {
    /// Member matches, sorted by id.
    pub members: Vec<MatchId>,
    /// (base, target) element pairs of the members, sorted by base id.
    pub correspondences: Vec<(ElementId, ElementId)>,
    pub score: f64,
    pub provenance: Provenance,
}

impl GMap {
    pub fn empty(provenance: Provenance) -> Self {
        GMap {
            members: Vec::new(),
            correspondences: Vec::new(),
            score: 0.0,
            provenance,
        }
    }

    pub fn from_members(set: &MatchSet, mut members: Vec<MatchId>, provenance: Provenance) -> Self {
        members.sort_unstable();
        members.dedup();
        let mut correspondences: Vec<(ElementId, ElementId)> = members
            .iter()
            .map(|&m| {
                let h = set.get(m);
                (h.base, h.target)
            })
            .collect();
        correspondences.sort_unstable();
        let score = ses(set, &members);
        GMap {
            members,
            correspondences,
            score,
            provenance,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MergeError {
    #[error("{count} consistent p-maps exceed the exhaustive-merge cap of {cap}")]
    CapExceeded { count: usize, cap: usize },
}

fn contribution(set: &MatchSet, m: MatchId) -> f64 {
    1.0 + f64::from(set.get(m).level_base)
}

/// Structural Evaluation Score of a member set: the sum over members of
/// 1 + the level of the match's base element.
pub fn ses(set: &MatchSet, members: &[MatchId]) -> f64 {
    ses_with_trickle(set, members, 0.0)
}

/// SES with an optional trickle-down term: each parent-to-argument edge
/// inside the member set additionally feeds `trickle` times the parent's own
/// contribution. Zero reproduces the plain score.
pub fn ses_with_trickle(set: &MatchSet, members: &[MatchId], trickle: f64) -> f64 {
    let mut total: f64 = members.iter().map(|&m| contribution(set, m)).sum();
    if trickle != 0.0 {
        for &m in members {
            let parent = contribution(set, m);
            for arg in set.get(m).arg_matches.iter().flatten() {
                if members.contains(arg) {
                    total += trickle * parent;
                }
            }
        }
    }
    total
}

/// True when no base element and no target element occurs in two distinct
/// member matches.
pub fn one_to_one(set: &MatchSet, members: &[MatchId]) -> bool {
    let mut base_map: HashMap<ElementId, ElementId> = HashMap::new();
    let mut target_map: HashMap<ElementId, ElementId> = HashMap::new();
    for &m in members {
        let h = set.get(m);
        if *base_map.entry(h.base).or_insert(h.target) != h.target {
            return false;
        }
        if *target_map.entry(h.target).or_insert(h.base) != h.base {
            return false;
        }
    }
    true
}

/// One p-map per root match: a valid expression match that is not contained
/// in any other valid match's closure. Ordered by descending SES, ties by
/// root match id. Internally inconsistent p-maps are flagged, not dropped.
pub fn build_pmaps(set: &MatchSet) -> Vec<PMap> {
    let mut contained = vec![false; set.total()];
    for m in set.iter() {
        if m.valid {
            for arg in m.arg_matches.iter().flatten() {
                contained[arg.0] = true;
            }
        }
    }
    let mut pmaps: Vec<PMap> = set
        .iter()
        .filter(|m| m.valid && m.kind == MatchKind::Expression && !contained[m.id.0])
        .map(|root| {
            let members = set.closure(root.id);
            let mut entity_correspondences: Vec<(ElementId, ElementId)> = members
                .iter()
                .filter(|&&m| set.get(m).kind == MatchKind::Entity)
                .map(|&m| {
                    let h = set.get(m);
                    (h.base, h.target)
                })
                .collect();
            entity_correspondences.sort_unstable();
            let internally_consistent = one_to_one(set, &members);
            let ses = ses(set, &members);
            PMap {
                id: PMapId(0),
                root_match: root.id,
                members,
                entity_correspondences,
                ses,
                internally_consistent,
            }
        })
        .collect();
    pmaps.sort_by(|a, b| {
        b.ses
            .total_cmp(&a.ses)
            .then(a.root_match.cmp(&b.root_match))
    });
    for (i, p) in pmaps.iter_mut().enumerate() {
        p.id = PMapId(i);
    }
    pmaps
}

struct Union {
    members: Vec<MatchId>,
    base_map: HashMap<ElementId, ElementId>,
    target_map: HashMap<ElementId, ElementId>,
}

impl Union {
    fn new() -> Self {
        Union {
            members: Vec::new(),
            base_map: HashMap::new(),
            target_map: HashMap::new(),
        }
    }

    fn accepts(&self, set: &MatchSet, pmap: &PMap) -> bool {
        pmap.members.iter().all(|&m| {
            let h = set.get(m);
            self.base_map.get(&h.base).is_none_or(|&t| t == h.target)
                && self.target_map.get(&h.target).is_none_or(|&b| b == h.base)
        })
    }

    fn absorb(&mut self, set: &MatchSet, pmap: &PMap) {
        for &m in &pmap.members {
            if !self.members.contains(&m) {
                self.members.push(m);
                let h = set.get(m);
                self.base_map.insert(h.base, h.target);
                self.target_map.insert(h.target, h.base);
            }
        }
    }
}

/// Greedy merge into a ranked list of alternative g-maps. The first g-map is
/// the heuristic answer; later ones are alternative interpretations seeded
/// from the best p-map not already contained in a previous g-map.
pub fn greedy_merge(set: &MatchSet, pmaps: &[PMap]) -> Vec<GMap> {
    let mut order: Vec<&PMap> = pmaps.iter().filter(|p| p.internally_consistent).collect();
    order.sort_by(|a, b| {
        b.ses
            .total_cmp(&a.ses)
            .then(a.root_match.cmp(&b.root_match))
    });
    let mut gmaps: Vec<GMap> = Vec::new();
    let mut covered = vec![false; order.len()];
    loop {
        let seed = match (0..order.len()).find(|&i| !covered[i]) {
            Some(i) => i,
            None => break,
        };
        let mut union = Union::new();
        let mut merged = vec![order[seed].id];
        union.absorb(set, order[seed]);
        for (i, pmap) in order.iter().enumerate() {
            if i != seed && union.accepts(set, pmap) {
                if !pmap.members.iter().all(|m| union.members.contains(m)) {
                    merged.push(pmap.id);
                }
                union.absorb(set, pmap);
            }
        }
        for (i, pmap) in order.iter().enumerate() {
            if !covered[i] && pmap.members.iter().all(|m| union.members.contains(m)) {
                covered[i] = true;
            }
        }
        covered[seed] = true;
        gmaps.push(GMap::from_members(
            set,
            union.members,
            Provenance::MergedPMaps(merged),
        ));
    }
    gmaps
}

/// Exhaustive search for the best consistent union of p-maps. Ties are broken
/// by the smaller sorted member-id list. Refuses when more than `cap`
/// consistent p-maps exist.
pub fn optimal_merge(set: &MatchSet, pmaps: &[PMap], cap: usize) -> Result<GMap, MergeError> {
    let consistent: Vec<&PMap> = pmaps.iter().filter(|p| p.internally_consistent).collect();
    if consistent.len() > cap {
        return Err(MergeError::CapExceeded {
            count: consistent.len(),
            cap,
        });
    }
    let n = consistent.len();
    // Joint consistency of a union reduces to pairwise consistency: any
    // one-to-one violation is witnessed by two conflicting matches.
    let mut compatible = vec![vec![true; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let mut u = Union::new();
            u.absorb(set, consistent[i]);
            let ok = u.accepts(set, consistent[j]);
            compatible[i][j] = ok;
            compatible[j][i] = ok;
        }
    }
    // An upper bound on any completion: the current score plus each remaining
    // p-map's full SES (overlaps only shrink the true union score).
    let mut suffix_bound = vec![0.0f64; n + 1];
    for i in (0..n).rev() {
        suffix_bound[i] = suffix_bound[i + 1] + consistent[i].ses;
    }

    struct Search<'a> {
        set: &'a MatchSet,
        pmaps: &'a [&'a PMap],
        compatible: &'a [Vec<bool>],
        suffix_bound: &'a [f64],
        included: Vec<usize>,
        union: Union,
        score: f64,
        best_score: f64,
        best_members: Vec<MatchId>,
        best_included: Vec<usize>,
    }

    impl Search<'_> {
        fn consider_leaf(&mut self) {
            let mut members = self.union.members.clone();
            members.sort_unstable();
            let better = self.score > self.best_score
                || (self.score == self.best_score && members < self.best_members);
            if better || (self.best_members.is_empty() && self.best_included.is_empty()) {
                self.best_score = self.score;
                self.best_members = members;
                self.best_included = self.included.clone();
            }
        }

        fn dfs(&mut self, i: usize) {
            if self.score + self.suffix_bound[i] < self.best_score {
                return;
            }
            if i == self.pmaps.len() {
                self.consider_leaf();
                return;
            }
            let pmap = self.pmaps[i];
            let pairwise_ok = self.included.iter().all(|&j| self.compatible[j][i]);
            if pairwise_ok && self.union.accepts(self.set, pmap) {
                let added: Vec<MatchId> = pmap
                    .members
                    .iter()
                    .copied()
                    .filter(|m| !self.union.members.contains(m))
                    .collect();
                self.union.absorb(self.set, pmap);
                let gained: f64 = added.iter().map(|&m| contribution(self.set, m)).sum();
                self.score += gained;
                self.included.push(i);
                self.dfs(i + 1);
                self.included.pop();
                self.score -= gained;
                for m in &added {
                    let pos = self.union.members.iter().position(|x| x == m).unwrap();
                    self.union.members.swap_remove(pos);
                    let h = self.set.get(*m);
                    self.union.base_map.remove(&h.base);
                    self.union.target_map.remove(&h.target);
                }
            }
            self.dfs(i + 1);
        }
    }

    let mut search = Search {
        set,
        pmaps: &consistent,
        compatible: &compatible,
        suffix_bound: &suffix_bound,
        included: Vec::new(),
        union: Union::new(),
        score: 0.0,
        best_score: -1.0,
        best_members: Vec::new(),
        best_included: Vec::new(),
    };
    search.dfs(0);
    let provenance = Provenance::MergedPMaps(
        search
            .best_included
            .iter()
            .map(|&i| consistent[i].id)
            .collect(),
    );
    Ok(GMap::from_members(set, search.best_members, provenance))
}

/// Check the g-map invariants: members valid, one-to-one in both directions,
/// and closed under parallel connectivity.
pub fn validate_gmap(set: &MatchSet, gmap: &GMap) -> Result<(), String> {
    for &m in &gmap.members {
        let h = set.get(m);
        if !h.valid {
            return Err(format!("member {m} is not a valid match"));
        }
        if h.kind == MatchKind::Expression {
            for (i, arg) in h.arg_matches.iter().enumerate() {
                match arg {
                    Some(a) if gmap.members.contains(a) => {}
                    _ => return Err(format!("member {m} argument {i} escapes the g-map")),
                }
            }
        }
    }
    if !one_to_one(set, &gmap.members) {
        return Err("g-map is not one-to-one".to_string());
    }
    let expected = ses(set, &gmap.members);
    if (gmap.score - expected).abs() > 1e-9 {
        return Err(format!(
            "g-map score {} disagrees with recomputation {expected}",
            gmap.score
        ));
    }
    Ok(())
}
