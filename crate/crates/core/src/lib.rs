//! Analogical structure mapping between typed predicate-calculus domains.
//!
//! The library compares a *base* and a *target* domain description and
//! produces global mappings (g-maps): one-to-one, connectivity-respecting
//! correspondence sets between the elements of the two domains. Three
//! strategies are provided:
//!
//! - exhaustive optimal merge of partial mappings ([`smap::optimal_merge`]),
//!   the oracle the other strategies are measured against;
//! - greedy merge seeded from the highest-scoring partial mapping
//!   ([`smap::greedy_merge`]);
//! - an iterative best-first match selection loop that scores every match
//!   hypothesis for its potential to belong to the best mapping and forks on
//!   ties ([`gibson::gibson_map`]).
//!
//! Domains are written in a small declarative language (see [`parser`]), and
//! every stage exposes the instrumentation counters (match, p-map and g-map
//! space sizes) that the benchmark harness reports.

pub mod domain;
pub mod generator;
pub mod gibson;
pub mod matcher;
pub mod parser;
pub mod report;
pub mod smap;

pub use domain::{Domain, DomainBuilder, Element, ElementId, Payload, PredicateKind};
pub use matcher::{EntityMode, MatchId, MatchSet, PredicateRule, RuleSet};
pub use parser::{parse_corpus, serialize, ParseOutcome};
pub use report::{RunReport, Strategy};
