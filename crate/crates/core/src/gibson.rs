//! Iterative best-first match selection.
//!
//! Instead of merging p-maps, this engine scores every match hypothesis for
//! its potential to belong to the best global mapping and selects the best
//! match one cycle at a time. The score of a match between base element `b`
//! and target element `t` is
//!
//! ```text
//! |AM(b,t)| + min(L(b), L(t)) + Freq(b) + Freq(t) + R(b,t) + |NN| * |KN|
//! ```
//!
//! with AM the argument matches, L the levels, Freq the number of containing
//! facts, R the rootedness (0..=2), NN the matches the selection would newly
//! force into the mapping (the match plus its not-yet-known argument
//! closure), and KN the matches already known. The dynamic product is zero on
//! the first cycle and steers later cycles towards matches that connect to
//! the mapping under construction.
//!
//! Selecting a match adds its whole closure to the known set; candidates that
//! conflict with the known set are excluded eagerly. A tie among top scorers
//! forks the branch, bounded by a live-branch cap; past the cap the smallest
//! match id wins. Each branch ends when no candidates remain or every base
//! element is mapped.

use std::collections::{HashMap, VecDeque};
use std::time::Instant;

use crate::domain::{Domain, ElementId};
use crate::matcher::{generate_matches, MatchHypothesis, MatchId, MatchSet, RuleSet};
use crate::report::{RunReport, Strategy};
use crate::smap::{build_pmaps, one_to_one, GMap, Provenance};

pub const DEFAULT_FORK_CAP: usize = 8;

#[derive(Debug, Clone, Copy)]
pub struct GibsonConfig {
    /// Maximum number of live branches; ties beyond it resolve by match id.
    pub fork_cap: usize,
    /// Terminate a branch once every base *entity* is mapped, instead of
    /// every base element.
    pub entities_only_termination: bool,
}

impl Default for GibsonConfig {
    fn default() -> Self {
        GibsonConfig {
            fork_cap: DEFAULT_FORK_CAP,
            entities_only_termination: false,
        }
    }
}

/// Term-by-term decomposition of one match's score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GibsonScore {
    pub am_size: u64,
    pub min_level: u64,
    pub freq_base: u64,
    pub freq_target: u64,
    pub rootedness: u64,
    pub new_times_known: u64,
    pub total: u64,
}

impl GibsonScore {
    pub fn compute(m: &MatchHypothesis, nn: u64, kn: u64) -> Self {
        let am_size = m.am_size() as u64;
        let min_level = u64::from(m.min_level());
        let freq_base = u64::from(m.freq_base);
        let freq_target = u64::from(m.freq_target);
        let rootedness = u64::from(m.rootedness);
        let new_times_known = nn * kn;
        GibsonScore {
            am_size,
            min_level,
            freq_base,
            freq_target,
            rootedness,
            new_times_known,
            total: am_size + min_level + freq_base + freq_target + rootedness + new_times_known,
        }
    }
}

/// Snapshot of one branch of the selection loop.
#[derive(Debug, Clone)]
pub struct GibsonState {
    /// Matches in the g-map under construction, sorted by id.
    pub known: Vec<MatchId>,
    /// Matches still selectable, sorted by id.
    pub candidates: Vec<MatchId>,
    pub fork_depth: u32,
    pub cycle: u32,
}

/// Score one candidate match against the current state. The static terms are
/// read from the match features; NN is the closure increment the selection
/// would add and KN the current known set.
pub fn best_map_potential(m: &MatchHypothesis, state: &GibsonState, set: &MatchSet) -> GibsonScore {
    let nn = set
        .closure(m.id)
        .iter()
        .filter(|id| !state.known.contains(id))
        .count() as u64;
    GibsonScore::compute(m, nn, state.known.len() as u64)
}

/// One rescoring step as seen by a trace consumer.
#[derive(Debug, Clone)]
pub struct CycleTrace {
    pub branch: usize,
    pub cycle: u32,
    pub known_before: Vec<MatchId>,
    pub scores: Vec<(MatchId, GibsonScore)>,
    /// The tied matches chosen this cycle: one entry normally, several on a
    /// fork.
    pub selected: Vec<MatchId>,
}

#[derive(Debug, Clone, Default)]
pub struct GibsonTrace {
    pub cycles: Vec<CycleTrace>,
}

#[derive(Debug, Clone)]
pub struct GibsonResult {
    /// Distinct g-maps ranked by descending score, ties by member ids.
    pub gmaps: Vec<GMap>,
    /// Selection cycles on the branch that produced the top g-map.
    pub cycles_to_best: u32,
    /// Extra branches spawned by tie forks.
    pub forks_taken: u32,
    pub report: RunReport,
}

#[derive(Clone)]
struct Branch {
    id: usize,
    known_bits: Vec<bool>,
    known: Vec<MatchId>,
    base_map: HashMap<ElementId, ElementId>,
    target_map: HashMap<ElementId, ElementId>,
    candidates: Vec<MatchId>,
    cycles: u32,
    fork_depth: u32,
    selections: Vec<MatchId>,
}

impl Branch {
    fn select(&mut self, m: MatchId, closures: &[Vec<MatchId>], set: &MatchSet) {
        for &member in &closures[m.0] {
            if !self.known_bits[member.0] {
                self.known_bits[member.0] = true;
                self.known.push(member);
                let h = set.get(member);
                self.base_map.insert(h.base, h.target);
                self.target_map.insert(h.target, h.base);
            }
        }
        self.cycles += 1;
        self.selections.push(m);
        let known_bits = &self.known_bits;
        let base_map = &self.base_map;
        let target_map = &self.target_map;
        self.candidates.retain(|&c| {
            !known_bits[c.0]
                && closures[c.0].iter().all(|&m| {
                    let h = set.get(m);
                    base_map.get(&h.base).is_none_or(|&t| t == h.target)
                        && target_map.get(&h.target).is_none_or(|&b| b == h.base)
                })
        });
    }
}

/// Run the selection loop on a prebuilt match set.
pub fn gibson_map_on(
    set: &MatchSet,
    base: &Domain,
    rules: RuleSet,
    config: GibsonConfig,
    mut trace: Option<&mut GibsonTrace>,
) -> GibsonResult {
    let start = Instant::now();
    let closures: Vec<Vec<MatchId>> = (0..set.total())
        .map(|i| {
            if set.get(MatchId(i)).valid {
                set.closure(MatchId(i))
            } else {
                Vec::new()
            }
        })
        .collect();
    let statics: Vec<u64> = (0..set.total())
        .map(|i| GibsonScore::compute(set.get(MatchId(i)), 0, 0).total)
        .collect();
    // A match whose own closure maps some element twice can never join any
    // g-map; exclude it up front.
    let candidates: Vec<MatchId> = (0..set.total())
        .map(MatchId)
        .filter(|&m| set.get(m).valid && one_to_one(set, &closures[m.0]))
        .collect();
    let base_total = if config.entities_only_termination {
        base.entities().len()
    } else {
        base.element_count()
    };

    let mut queue: VecDeque<Branch> = VecDeque::new();
    queue.push_back(Branch {
        id: 0,
        known_bits: vec![false; set.total()],
        known: Vec::new(),
        base_map: HashMap::new(),
        target_map: HashMap::new(),
        candidates,
        cycles: 0,
        fork_depth: 0,
        selections: Vec::new(),
    });
    let mut next_branch_id = 1usize;
    let mut forks_taken = 0u32;
    // members -> (gmap, cycles of the cheapest branch producing it)
    let mut produced: Vec<(GMap, u32)> = Vec::new();

    while let Some(mut branch) = queue.pop_front() {
        loop {
            let all_base_mapped = branch.base_map.len() >= base_total;
            if branch.candidates.is_empty() || all_base_mapped {
                let gmap = GMap::from_members(
                    set,
                    branch.known.clone(),
                    Provenance::CycleSelections(branch.selections.clone()),
                );
                match produced.iter_mut().find(|(g, _)| g.members == gmap.members) {
                    Some((_, cycles)) => *cycles = (*cycles).min(branch.cycles),
                    None => produced.push((gmap, branch.cycles)),
                }
                break;
            }
            let kn = branch.known.len() as u64;
            let mut best_total = 0u64;
            let mut tied: Vec<MatchId> = Vec::new();
            let mut scored: Vec<(MatchId, GibsonScore)> = Vec::new();
            for &c in &branch.candidates {
                let nn = closures[c.0]
                    .iter()
                    .filter(|m| !branch.known_bits[m.0])
                    .count() as u64;
                let total = statics[c.0] + nn * kn;
                if trace.is_some() {
                    scored.push((c, GibsonScore::compute(set.get(c), nn, kn)));
                }
                if tied.is_empty() || total > best_total {
                    best_total = total;
                    tied.clear();
                    tied.push(c);
                } else if total == best_total {
                    tied.push(c);
                }
            }
            let fork = tied.len() > 1 && queue.len() + tied.len() <= config.fork_cap;
            if let Some(t) = trace.as_deref_mut() {
                let mut known_before = branch.known.clone();
                known_before.sort_unstable();
                t.cycles.push(CycleTrace {
                    branch: branch.id,
                    cycle: branch.cycles + 1,
                    known_before,
                    scores: scored,
                    selected: if fork {
                        tied.clone()
                    } else {
                        vec![tied[0]]
                    },
                });
            }
            if fork {
                forks_taken += tied.len() as u32 - 1;
                for &m in &tied {
                    let mut child = branch.clone();
                    child.id = next_branch_id;
                    next_branch_id += 1;
                    child.fork_depth += 1;
                    child.select(m, &closures, set);
                    queue.push_back(child);
                }
                break;
            }
            branch.select(tied[0], &closures, set);
        }
    }

    produced.sort_by(|(a, ca), (b, cb)| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.members.cmp(&b.members))
            .then(ca.cmp(cb))
    });
    let cycles_to_best = produced.first().map(|(_, c)| *c).unwrap_or(0);
    let gmaps: Vec<GMap> = produced.into_iter().map(|(g, _)| g).collect();
    let report = RunReport {
        strategy: Strategy::Gibson,
        rules,
        total_matches: set.total(),
        valid_matches: set.valid_count(),
        pmap_count: build_pmaps(set).len(),
        gmap_count: gmaps.len(),
        best_gmap_size: gmaps.first().map(|g| g.members.len()).unwrap_or(0),
        best_gmap_score: gmaps.first().map(|g| g.score).unwrap_or(0.0),
        cycles_to_best: Some(cycles_to_best),
        forks: Some(forks_taken),
        percent_correct: None,
        wall_time_ms: start.elapsed().as_secs_f64() * 1000.0,
    };
    GibsonResult {
        gmaps,
        cycles_to_best,
        forks_taken,
        report,
    }
}

/// Compare two domains with the selection engine.
pub fn gibson_map(
    base: &Domain,
    target: &Domain,
    rules: RuleSet,
    fork_cap: usize,
) -> GibsonResult {
    let set = generate_matches(base, target, rules);
    gibson_map_on(
        &set,
        base,
        rules,
        GibsonConfig {
            fork_cap,
            ..GibsonConfig::default()
        },
        None,
    )
}

/// Like [`gibson_map`] but records every rescoring step.
pub fn gibson_map_traced(
    base: &Domain,
    target: &Domain,
    rules: RuleSet,
    config: GibsonConfig,
) -> (GibsonResult, GibsonTrace) {
    let set = generate_matches(base, target, rules);
    let mut trace = GibsonTrace::default();
    let result = gibson_map_on(&set, base, rules, config, Some(&mut trace));
    (result, trace)
}

/// Fraction of the identity correspondence a self comparison recovered, in
/// percent. Vacuously 100 for an empty domain.
pub fn percent_correct_identity(domain: &Domain, gmap: &GMap) -> f64 {
    let identity = domain.element_count();
    if identity == 0 {
        return 100.0;
    }
    let hits = gmap
        .correspondences
        .iter()
        .filter(|(b, t)| b == t)
        .count();
    100.0 * hits as f64 / identity as f64
}

/// Map a domain onto itself and report how much of the identity
/// correspondence the top g-map recovers.
pub fn self_map(domain: &Domain, rules: RuleSet) -> GibsonResult {
    let mut result = gibson_map(domain, domain, rules, DEFAULT_FORK_CAP);
    let percent = result
        .gmaps
        .first()
        .map(|g| percent_correct_identity(domain, g))
        .unwrap_or(100.0);
    result.report.percent_correct = Some(percent);
    result
}
