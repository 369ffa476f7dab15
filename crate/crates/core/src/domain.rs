//! Typed, structurally-deduplicated domain descriptions.
//!
//! A domain is a forest of entities and predicate expressions. Expressions
//! with the same predicate and the same argument list are a single element
//! (structural dedup), so the argument graph is a DAG. Every element carries
//! three derived properties used by the scoring formulas downstream: its
//! `level` (height above entities), its `freq` (number of top-level facts
//! whose closure contains it) and an `is_root` flag (a top-level fact that is
//! no other expression's argument).

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Identity of an element within its domain. Assigned in construction order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ElementId(pub usize);

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// Index of a predicate declaration within its domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PredicateKind {
    Attribute,
    Function,
    Relation,
}

impl fmt::Display for PredicateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredicateKind::Attribute => write!(f, "attribute"),
            PredicateKind::Function => write!(f, "function"),
            PredicateKind::Relation => write!(f, "relation"),
        }
    }
}

/// A named predicate with a fixed kind and arity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: String,
    pub kind: PredicateKind,
    pub arity: usize,
}

/// What an element is: a named entity or a predicate expression over
/// previously-constructed elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    Entity(String),
    Expression { pred: PredId, args: Vec<ElementId> },
}

/// One node of the domain forest, with its derived structural properties.
#[derive(Debug, Clone)]
pub struct Element {
    pub id: ElementId,
    pub payload: Payload,
    /// Entities are 0; an expression is 1 + the max level of its arguments.
    pub level: u32,
    /// Number of distinct top-level facts whose closure contains this element.
    pub freq: u32,
    /// True iff this is a top-level fact that is no expression's argument.
    pub is_root: bool,
}

impl Element {
    pub fn is_entity(&self) -> bool {
        matches!(self.payload, Payload::Entity(_))
    }

    pub fn is_expression(&self) -> bool {
        matches!(self.payload, Payload::Expression { .. })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DomainError {
    #[error("unknown element id {0} in domain `{1}`")]
    UnknownId(ElementId, String),
}

/// Errors raised while assembling a domain programmatically. The parser maps
/// these onto source-located diagnostics.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum BuildError {
    #[error("predicate `{0}` is already declared")]
    DuplicateDecl(String),
    #[error("attribute `{0}` must have arity 1, declared {1}")]
    AttributeArity(String, usize),
    #[error("declared arity of `{0}` must be positive")]
    ZeroArity(String),
    #[error("predicate `{0}` is not declared")]
    UnknownPredicate(String),
    #[error("`{name}` expects {expected} arguments, got {got}")]
    ArityMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("argument {position} of {kind} `{name}` {requirement}")]
    BadArgKind {
        name: String,
        kind: PredicateKind,
        position: usize,
        requirement: String,
    },
    #[error("unknown element id {0}")]
    UnknownElement(ElementId),
    #[error("a fact must be an expression, not an entity")]
    FactNotExpression,
}

/// Immutable domain description. Construct via [`DomainBuilder`] or the
/// parser; safe to share read-only across concurrent comparisons.
#[derive(Debug, Clone)]
pub struct Domain {
    name: String,
    declarations: Vec<PredicateDecl>,
    elements: Vec<Element>,
    entities: Vec<ElementId>,
    facts: Vec<ElementId>,
}

impl Domain {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn declarations(&self) -> &[PredicateDecl] {
        &self.declarations
    }

    pub fn decl(&self, id: PredId) -> &PredicateDecl {
        &self.declarations[id.0]
    }

    pub fn elements(&self) -> impl Iterator<Item = &Element> {
        self.elements.iter()
    }

    pub fn element(&self, id: ElementId) -> Option<&Element> {
        self.elements.get(id.0)
    }

    fn get(&self, id: ElementId) -> Result<&Element, DomainError> {
        self.elements
            .get(id.0)
            .ok_or_else(|| DomainError::UnknownId(id, self.name.clone()))
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    /// Entity ids in construction order.
    pub fn entities(&self) -> &[ElementId] {
        &self.entities
    }

    /// Top-level facts in declaration order (deduplicated).
    pub fn facts(&self) -> &[ElementId] {
        &self.facts
    }

    /// Height of the element above entities.
    pub fn level_of(&self, id: ElementId) -> Result<u32, DomainError> {
        Ok(self.get(id)?.level)
    }

    /// Number of distinct top-level facts whose closure contains the element.
    pub fn freq_of(&self, id: ElementId) -> Result<u32, DomainError> {
        Ok(self.get(id)?.freq)
    }

    pub fn is_root(&self, id: ElementId) -> Result<bool, DomainError> {
        Ok(self.get(id)?.is_root)
    }

    /// Facts that are no expression's argument, in declaration order.
    pub fn roots(&self) -> Vec<ElementId> {
        self.facts
            .iter()
            .copied()
            .filter(|&f| self.elements[f.0].is_root)
            .collect()
    }

    /// Kind of the element: entities have no predicate kind.
    pub fn kind_of(&self, id: ElementId) -> Option<PredicateKind> {
        match &self.element(id)?.payload {
            Payload::Entity(_) => None,
            Payload::Expression { pred, .. } => Some(self.declarations[pred.0].kind),
        }
    }

    /// Canonical text form of an element: the entity name, or the expression
    /// rendered as `pred(arg, ...)`.
    pub fn render(&self, id: ElementId) -> String {
        match &self.elements[id.0].payload {
            Payload::Entity(name) => name.clone(),
            Payload::Expression { pred, args } => {
                let inner: Vec<String> = args.iter().map(|&a| self.render(a)).collect();
                format!("{}({})", self.declarations[pred.0].name, inner.join(", "))
            }
        }
    }
}

/// Incremental domain constructor. Performs structural dedup, kind and arity
/// checking, and computes the derived element properties on `build`.
#[derive(Debug)]
pub struct DomainBuilder {
    name: String,
    declarations: Vec<PredicateDecl>,
    decl_by_name: HashMap<String, PredId>,
    elements: Vec<Element>,
    entity_by_name: HashMap<String, ElementId>,
    expr_by_shape: HashMap<(PredId, Vec<ElementId>), ElementId>,
    entities: Vec<ElementId>,
    facts: Vec<ElementId>,
}

impl DomainBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        DomainBuilder {
            name: name.into(),
            declarations: Vec::new(),
            decl_by_name: HashMap::new(),
            elements: Vec::new(),
            entity_by_name: HashMap::new(),
            expr_by_shape: HashMap::new(),
            entities: Vec::new(),
            facts: Vec::new(),
        }
    }

    pub fn declare(
        &mut self,
        name: impl Into<String>,
        kind: PredicateKind,
        arity: usize,
    ) -> Result<PredId, BuildError> {
        let name = name.into();
        if self.decl_by_name.contains_key(&name) {
            return Err(BuildError::DuplicateDecl(name));
        }
        if arity == 0 {
            return Err(BuildError::ZeroArity(name));
        }
        if kind == PredicateKind::Attribute && arity != 1 {
            return Err(BuildError::AttributeArity(name, arity));
        }
        let id = PredId(self.declarations.len());
        self.decl_by_name.insert(name.clone(), id);
        self.declarations.push(PredicateDecl { name, kind, arity });
        Ok(id)
    }

    pub fn lookup_decl(&self, name: &str) -> Option<PredId> {
        self.decl_by_name.get(name).copied()
    }

    pub fn lookup_entity(&self, name: &str) -> Option<ElementId> {
        self.entity_by_name.get(name).copied()
    }

    /// Get or create the entity with this name.
    pub fn entity(&mut self, name: impl Into<String>) -> ElementId {
        let name = name.into();
        if let Some(&id) = self.entity_by_name.get(&name) {
            return id;
        }
        let id = ElementId(self.elements.len());
        self.entity_by_name.insert(name.clone(), id);
        self.elements.push(Element {
            id,
            payload: Payload::Entity(name),
            level: 0,
            freq: 0,
            is_root: false,
        });
        self.entities.push(id);
        id
    }

    /// Get or create the expression `pred(args...)`, checking arity and
    /// argument kinds: attribute args must be entities, function args must be
    /// entities or function expressions, relation args are unrestricted.
    pub fn expr(&mut self, pred: PredId, args: Vec<ElementId>) -> Result<ElementId, BuildError> {
        let decl = self.declarations[pred.0].clone();
        if args.len() != decl.arity {
            return Err(BuildError::ArityMismatch {
                name: decl.name,
                expected: decl.arity,
                got: args.len(),
            });
        }
        for (i, &arg) in args.iter().enumerate() {
            let elem = self
                .elements
                .get(arg.0)
                .ok_or(BuildError::UnknownElement(arg))?;
            let arg_kind = match &elem.payload {
                Payload::Entity(_) => None,
                Payload::Expression { pred, .. } => Some(self.declarations[pred.0].kind),
            };
            let ok = match decl.kind {
                PredicateKind::Attribute => arg_kind.is_none(),
                PredicateKind::Function => {
                    matches!(arg_kind, None | Some(PredicateKind::Function))
                }
                PredicateKind::Relation => true,
            };
            if !ok {
                let requirement = match decl.kind {
                    PredicateKind::Attribute => "must be an entity".to_string(),
                    PredicateKind::Function => {
                        "must be an entity or a function expression".to_string()
                    }
                    PredicateKind::Relation => unreachable!(),
                };
                return Err(BuildError::BadArgKind {
                    name: decl.name,
                    kind: decl.kind,
                    position: i + 1,
                    requirement,
                });
            }
        }
        let shape = (pred, args.clone());
        if let Some(&id) = self.expr_by_shape.get(&shape) {
            return Ok(id);
        }
        let level = 1 + args
            .iter()
            .map(|&a| self.elements[a.0].level)
            .max()
            .unwrap_or(0);
        let id = ElementId(self.elements.len());
        self.expr_by_shape.insert(shape, id);
        self.elements.push(Element {
            id,
            payload: Payload::Expression { pred, args },
            level,
            freq: 0,
            is_root: false,
        });
        Ok(id)
    }

    /// Record an expression as a top-level fact. Duplicate facts collapse.
    pub fn fact(&mut self, id: ElementId) -> Result<(), BuildError> {
        let elem = self
            .elements
            .get(id.0)
            .ok_or(BuildError::UnknownElement(id))?;
        if elem.is_entity() {
            return Err(BuildError::FactNotExpression);
        }
        if !self.facts.contains(&id) {
            self.facts.push(id);
        }
        Ok(())
    }

    /// Finalize: compute freq and root flags.
    pub fn build(mut self) -> Domain {
        let mut is_arg = vec![false; self.elements.len()];
        for elem in &self.elements {
            if let Payload::Expression { args, .. } = &elem.payload {
                for a in args {
                    is_arg[a.0] = true;
                }
            }
        }
        for &fact in &self.facts {
            let mut seen = vec![false; self.elements.len()];
            let mut stack = vec![fact];
            while let Some(id) = stack.pop() {
                if seen[id.0] {
                    continue;
                }
                seen[id.0] = true;
                self.elements[id.0].freq += 1;
                if let Payload::Expression { args, .. } = &self.elements[id.0].payload {
                    stack.extend(args.iter().copied());
                }
            }
        }
        for &fact in &self.facts {
            self.elements[fact.0].is_root = !is_arg[fact.0];
        }
        Domain {
            name: self.name,
            declarations: self.declarations,
            elements: self.elements,
            entities: self.entities,
            facts: self.facts,
        }
    }
}
