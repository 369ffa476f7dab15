//! Instrumentation records and the shared comparison driver.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::domain::Domain;
use crate::gibson::{gibson_map_on, percent_correct_identity, GibsonConfig, DEFAULT_FORK_CAP};
use crate::matcher::{generate_matches, RuleSet};
use crate::smap::{build_pmaps, greedy_merge, optimal_merge, GMap, MergeError, DEFAULT_PMAP_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    SmeGreedy,
    SmeOptimal,
    Gibson,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::SmeGreedy => write!(f, "sme-greedy"),
            Strategy::SmeOptimal => write!(f, "sme-optimal"),
            Strategy::Gibson => write!(f, "gibson"),
        }
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sme-greedy" => Ok(Strategy::SmeGreedy),
            "sme-optimal" => Ok(Strategy::SmeOptimal),
            "gibson" => Ok(Strategy::Gibson),
            other => Err(format!(
                "unknown strategy `{other}` (expected sme-greedy, sme-optimal or gibson)"
            )),
        }
    }
}

/// One comparison's instrumentation: space sizes, result shape, counters.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub strategy: Strategy,
    pub rules: RuleSet,
    pub total_matches: usize,
    pub valid_matches: usize,
    pub pmap_count: usize,
    pub gmap_count: usize,
    pub best_gmap_size: usize,
    pub best_gmap_score: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycles_to_best: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forks: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub percent_correct: Option<f64>,
    pub wall_time_ms: f64,
}

/// Engine budgets, overridable from the command line.
#[derive(Debug, Clone, Copy)]
pub struct EngineCaps {
    pub fork_cap: usize,
    pub pmap_cap: usize,
}

impl Default for EngineCaps {
    fn default() -> Self {
        EngineCaps {
            fork_cap: DEFAULT_FORK_CAP,
            pmap_cap: DEFAULT_PMAP_CAP,
        }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Merge(#[from] MergeError),
}

/// A comparison's full result: the report plus the ranked g-maps in the
/// strategy's own preference order.
#[derive(Debug, Clone)]
pub struct ComparisonOutcome {
    pub report: RunReport,
    pub gmaps: Vec<GMap>,
}

/// Run one strategy over a domain pair. When `self_comparison` is set, the
/// report carries the identity recovery percentage of the top g-map.
pub fn run_comparison(
    base: &Domain,
    target: &Domain,
    strategy: Strategy,
    rules: RuleSet,
    caps: EngineCaps,
    self_comparison: bool,
) -> Result<ComparisonOutcome, EngineError> {
    let start = Instant::now();
    let set = generate_matches(base, target, rules);
    let (mut report, gmaps) = match strategy {
        Strategy::Gibson => {
            let config = GibsonConfig {
                fork_cap: caps.fork_cap,
                ..GibsonConfig::default()
            };
            let result = gibson_map_on(&set, base, rules, config, None);
            (result.report, result.gmaps)
        }
        Strategy::SmeGreedy | Strategy::SmeOptimal => {
            let pmaps = build_pmaps(&set);
            let gmaps = match strategy {
                Strategy::SmeGreedy => greedy_merge(&set, &pmaps),
                Strategy::SmeOptimal => vec![optimal_merge(&set, &pmaps, caps.pmap_cap)?],
                Strategy::Gibson => unreachable!(),
            };
            let report = RunReport {
                strategy,
                rules,
                total_matches: set.total(),
                valid_matches: set.valid_count(),
                pmap_count: pmaps.len(),
                gmap_count: gmaps.len(),
                best_gmap_size: gmaps.first().map(|g| g.members.len()).unwrap_or(0),
                best_gmap_score: gmaps.first().map(|g| g.score).unwrap_or(0.0),
                cycles_to_best: None,
                forks: None,
                percent_correct: None,
                wall_time_ms: 0.0,
            };
            (report, gmaps)
        }
    };
    if self_comparison {
        report.percent_correct = Some(
            gmaps
                .first()
                .map(|g| percent_correct_identity(base, g))
                .unwrap_or(100.0),
        );
    }
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1000.0;
    debug_assert_eq!(check_report_invariants(&report), Ok(()));
    Ok(ComparisonOutcome { report, gmaps })
}

/// One element pairing in machine-readable form.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct CorrespondenceOut {
    pub base: String,
    pub target: String,
    pub kind: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct GMapOut {
    pub score: f64,
    pub correspondences: Vec<CorrespondenceOut>,
}

/// Render a g-map for output: entity pairs first, then expression pairs,
/// each sorted by the base element's text.
pub fn render_gmap(base: &Domain, target: &Domain, gmap: &GMap) -> GMapOut {
    let mut correspondences: Vec<CorrespondenceOut> = gmap
        .correspondences
        .iter()
        .map(|&(b, t)| {
            let kind = if base.element(b).unwrap().is_entity() {
                "entity"
            } else {
                "expression"
            };
            CorrespondenceOut {
                base: base.render(b),
                target: target.render(t),
                kind,
            }
        })
        .collect();
    correspondences.sort_by(|a, b| {
        let rank = |k: &str| usize::from(k != "entity");
        (rank(a.kind), &a.base, &a.target).cmp(&(rank(b.kind), &b.base, &b.target))
    });
    GMapOut {
        score: gmap.score,
        correspondences,
    }
}

/// Full JSON payload of a `map`/`selfmap` run.
#[derive(Debug, Clone, Serialize)]
pub struct MapResult {
    pub report: RunReport,
    pub gmaps: Vec<GMapOut>,
}

/// Assemble the serializable result: g-maps sorted by descending score, ties
/// by member ids.
pub fn map_result(
    base: &Domain,
    target: &Domain,
    outcome: &ComparisonOutcome,
) -> MapResult {
    let mut ranked: Vec<&GMap> = outcome.gmaps.iter().collect();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.members.cmp(&b.members)));
    MapResult {
        report: outcome.report.clone(),
        gmaps: ranked
            .into_iter()
            .map(|g| render_gmap(base, target, g))
            .collect(),
    }
}

/// Discard the kind marker mismatches a malformed correspondence table would
/// produce; used by tests to assert report invariants hold on every run.
pub fn check_report_invariants(report: &RunReport) -> Result<(), String> {
    if report.valid_matches > report.total_matches {
        return Err(format!(
            "valid_matches {} exceeds total_matches {}",
            report.valid_matches, report.total_matches
        ));
    }
    if report.best_gmap_size > report.valid_matches {
        return Err(format!(
            "best_gmap_size {} exceeds valid_matches {}",
            report.best_gmap_size, report.valid_matches
        ));
    }
    Ok(())
}
