//! Parser and serializer for the `.anl` domain description language.
//!
//! Grammar:
//!
//! ```text
//! file     := domain+
//! domain   := "domain" IDENT "{" section* "}"
//! section  := "entities:" IDENT ("," IDENT)* ";" | kinddecl | "facts:" fact+
//! kinddecl := ("attribute" | "function" | "relation") IDENT "/" INT ";"
//! fact     := expr ";"
//! expr     := IDENT "(" arg ("," arg)* ")"
//! arg      := IDENT | expr
//! IDENT    := [A-Za-z][A-Za-z0-9_-]*
//! ```
//!
//! `#` starts a comment running to end of line; whitespace is insignificant.
//! All predicates and entities must be declared before use. An error
//! diagnostic aborts the surrounding `domain` block; later blocks still
//! parse.

use std::fmt;

use crate::domain::{BuildError, Domain, DomainBuilder, ElementId, Payload, PredicateKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => write!(f, "error"),
            Severity::Warning => write!(f, "warning"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticCode {
    Syntax,
    UndeclaredPredicate,
    ArityMismatch,
    DuplicateName,
    AttributeNonentityArg,
    Cycle,
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DiagnosticCode::Syntax => "syntax",
            DiagnosticCode::UndeclaredPredicate => "undeclared-predicate",
            DiagnosticCode::ArityMismatch => "arity-mismatch",
            DiagnosticCode::DuplicateName => "duplicate-name",
            DiagnosticCode::AttributeNonentityArg => "attribute-nonentity-arg",
            DiagnosticCode::Cycle => "cycle",
        };
        write!(f, "{s}")
    }
}

/// A located parse problem. Line and column are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    pub line: usize,
    pub column: usize,
    pub code: DiagnosticCode,
    pub message: String,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at {}:{} [{}]: {}",
            self.severity, self.line, self.column, self.code, self.message
        )
    }
}

/// Result of parsing a corpus: the domains whose blocks were clean, plus all
/// diagnostics encountered. A block containing an error diagnostic is
/// dropped; other blocks still produce domains.
#[derive(Debug)]
pub struct ParseOutcome {
    pub domains: Vec<Domain>,
    pub diagnostics: Vec<ParseDiagnostic>,
}

impl ParseOutcome {
    pub fn has_errors(&self) -> bool {
        self.diagnostics
            .iter()
            .any(|d| d.severity == Severity::Error)
    }

    pub fn domain(&self, name: &str) -> Option<&Domain> {
        self.domains.iter().find(|d| d.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum TokKind {
    Ident(String),
    Int(usize),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Semi,
    Colon,
    Slash,
    Bad(char),
}

#[derive(Debug, Clone)]
struct Tok {
    kind: TokKind,
    line: usize,
    col: usize,
}

fn lex(source: &str) -> Vec<Tok> {
    let mut toks = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = source.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        match c {
            '#' => {
                while let Some(&c) = chars.peek() {
                    bump(&mut chars);
                    if c == '\n' {
                        break;
                    }
                }
                continue;
            }
            c if c.is_whitespace() => {
                bump(&mut chars);
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
                        word.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                toks.push(Tok {
                    kind: TokKind::Ident(word),
                    line: tl,
                    col: tc,
                });
                continue;
            }
            c if c.is_ascii_digit() => {
                let mut n = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        n.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                let kind = match n.parse::<usize>() {
                    Ok(v) => TokKind::Int(v),
                    Err(_) => TokKind::Bad('0'),
                };
                toks.push(Tok {
                    kind,
                    line: tl,
                    col: tc,
                });
                continue;
            }
            _ => {
                let c = bump(&mut chars);
                let kind = match c {
                    '{' => TokKind::LBrace,
                    '}' => TokKind::RBrace,
                    '(' => TokKind::LParen,
                    ')' => TokKind::RParen,
                    ',' => TokKind::Comma,
                    ';' => TokKind::Semi,
                    ':' => TokKind::Colon,
                    '/' => TokKind::Slash,
                    other => TokKind::Bad(other),
                };
                toks.push(Tok {
                    kind,
                    line: tl,
                    col: tc,
                });
            }
        }
    }
    toks
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    diagnostics: Vec<ParseDiagnostic>,
    last_line: usize,
    last_col: usize,
}

/// Signal that the current domain block must be abandoned. The diagnostic has
/// already been recorded.
struct BlockAbort;

type Progress<T> = Result<T, BlockAbort>;

impl Parser {
    fn new(source: &str) -> Self {
        let toks = lex(source);
        let (last_line, last_col) = toks
            .last()
            .map(|t| (t.line, t.col + 1))
            .unwrap_or((1, 1));
        Parser {
            toks,
            pos: 0,
            diagnostics: Vec::new(),
            last_line,
            last_col,
        }
    }

    fn peek(&self) -> Option<&TokKind> {
        self.toks.get(self.pos).map(|t| &t.kind)
    }

    fn peek2(&self) -> Option<&TokKind> {
        self.toks.get(self.pos + 1).map(|t| &t.kind)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|t| (t.line, t.col))
            .unwrap_or((self.last_line, self.last_col))
    }

    fn advance(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&mut self, line: usize, col: usize, code: DiagnosticCode, message: String) {
        self.diagnostics.push(ParseDiagnostic {
            severity: Severity::Error,
            line,
            column: col,
            code,
            message,
        });
    }

    fn error_here(&mut self, code: DiagnosticCode, message: String) -> BlockAbort {
        let (line, col) = self.here();
        self.error_at(line, col, code, message);
        BlockAbort
    }

    fn warn_at(&mut self, line: usize, col: usize, code: DiagnosticCode, message: String) {
        self.diagnostics.push(ParseDiagnostic {
            severity: Severity::Warning,
            line,
            column: col,
            code,
            message,
        });
    }

    fn expect_ident(&mut self, what: &str) -> Progress<(String, usize, usize)> {
        match self.peek() {
            Some(TokKind::Ident(_)) => {
                let tok = self.advance().unwrap();
                if let TokKind::Ident(name) = tok.kind {
                    Ok((name, tok.line, tok.col))
                } else {
                    unreachable!()
                }
            }
            _ => Err(self.error_here(DiagnosticCode::Syntax, format!("expected {what}"))),
        }
    }

    fn expect_punct(&mut self, kind: TokKind, what: &str) -> Progress<()> {
        if self.peek() == Some(&kind) {
            self.advance();
            Ok(())
        } else {
            Err(self.error_here(DiagnosticCode::Syntax, format!("expected `{what}`")))
        }
    }

    /// Skip to the end of the current domain block: the `}` closing it, or
    /// the next top-level `domain` keyword if the brace is missing.
    fn recover_block(&mut self) {
        let mut depth = 1i32;
        while let Some(kind) = self.peek() {
            match kind {
                TokKind::LBrace => depth += 1,
                TokKind::RBrace => {
                    depth -= 1;
                    if depth == 0 {
                        self.advance();
                        return;
                    }
                }
                TokKind::Ident(w) if w == "domain" && depth == 1 => return,
                _ => {}
            }
            self.advance();
        }
    }

    /// Skip to the next top-level `domain` keyword.
    fn recover_toplevel(&mut self) {
        while let Some(kind) = self.peek() {
            if matches!(kind, TokKind::Ident(w) if w == "domain") {
                return;
            }
            self.advance();
        }
    }

    fn parse_file(&mut self) -> Vec<Domain> {
        let mut domains: Vec<Domain> = Vec::new();
        if self.peek().is_none() {
            self.error_at(
                1,
                1,
                DiagnosticCode::Syntax,
                "expected at least one `domain` block".to_string(),
            );
            return domains;
        }
        while self.peek().is_some() {
            if let Ok(domain) = self.parse_domain() {
                if domains.iter().any(|d| d.name() == domain.name()) {
                    let (line, col) = (1, 1);
                    self.error_at(
                        line,
                        col,
                        DiagnosticCode::DuplicateName,
                        format!("domain `{}` is declared more than once", domain.name()),
                    );
                } else {
                    domains.push(domain);
                }
            }
        }
        domains
    }

    fn parse_domain(&mut self) -> Progress<Domain> {
        match self.peek() {
            Some(TokKind::Ident(w)) if w == "domain" => {
                self.advance();
            }
            _ => {
                let err = self.error_here(
                    DiagnosticCode::Syntax,
                    "expected `domain` keyword".to_string(),
                );
                self.recover_toplevel();
                return Err(err);
            }
        }
        let name = match self.expect_ident("domain name") {
            Ok((name, _, _)) => name,
            Err(e) => {
                self.recover_toplevel();
                return Err(e);
            }
        };
        if let Err(e) = self.expect_punct(TokKind::LBrace, "{") {
            self.recover_toplevel();
            return Err(e);
        }
        let mut builder = DomainBuilder::new(name);
        loop {
            match self.peek() {
                Some(TokKind::RBrace) => {
                    self.advance();
                    return Ok(builder.build());
                }
                Some(TokKind::Ident(w)) if w == "entities" && self.peek2() == Some(&TokKind::Colon) => {
                    if let Err(e) = self.parse_entities(&mut builder) {
                        self.recover_block();
                        return Err(e);
                    }
                }
                Some(TokKind::Ident(w)) if w == "facts" && self.peek2() == Some(&TokKind::Colon) => {
                    if let Err(e) = self.parse_facts(&mut builder) {
                        self.recover_block();
                        return Err(e);
                    }
                }
                Some(TokKind::Ident(w)) if kind_keyword(w).is_some() => {
                    if let Err(e) = self.parse_kinddecl(&mut builder) {
                        self.recover_block();
                        return Err(e);
                    }
                }
                _ => {
                    let err = self.error_here(
                        DiagnosticCode::Syntax,
                        "expected a section (`entities:`, `facts:`, a predicate declaration) or `}`"
                            .to_string(),
                    );
                    self.recover_block();
                    return Err(err);
                }
            }
        }
    }

    fn parse_entities(&mut self, builder: &mut DomainBuilder) -> Progress<()> {
        self.advance(); // entities
        self.advance(); // :
        loop {
            let (name, line, col) = self.expect_ident("entity name")?;
            if builder.lookup_entity(&name).is_some() {
                self.warn_at(
                    line,
                    col,
                    DiagnosticCode::DuplicateName,
                    format!("entity `{name}` is already declared"),
                );
            }
            builder.entity(name);
            match self.peek() {
                Some(TokKind::Comma) => {
                    self.advance();
                }
                Some(TokKind::Semi) => {
                    self.advance();
                    return Ok(());
                }
                _ => {
                    return Err(
                        self.error_here(DiagnosticCode::Syntax, "expected `,` or `;`".to_string())
                    )
                }
            }
        }
    }

    fn parse_kinddecl(&mut self, builder: &mut DomainBuilder) -> Progress<()> {
        let kw = self.advance().unwrap();
        let kind = match &kw.kind {
            TokKind::Ident(w) => kind_keyword(w).unwrap(),
            _ => unreachable!(),
        };
        let (name, nline, ncol) = self.expect_ident("predicate name")?;
        self.expect_punct(TokKind::Slash, "/")?;
        let arity = match self.peek() {
            Some(TokKind::Int(n)) => {
                let n = *n;
                self.advance();
                n
            }
            _ => {
                return Err(self.error_here(DiagnosticCode::Syntax, "expected arity".to_string()))
            }
        };
        self.expect_punct(TokKind::Semi, ";")?;
        match builder.declare(&name, kind, arity) {
            Ok(_) => Ok(()),
            Err(e) => {
                let code = build_error_code(&e);
                self.error_at(nline, ncol, code, e.to_string());
                Err(BlockAbort)
            }
        }
    }

    fn parse_facts(&mut self, builder: &mut DomainBuilder) -> Progress<()> {
        self.advance(); // facts
        self.advance(); // :
        let mut count = 0usize;
        while matches!(self.peek(), Some(TokKind::Ident(_)))
            && self.peek2() == Some(&TokKind::LParen)
        {
            let id = self.parse_expr(builder)?;
            self.expect_punct(TokKind::Semi, ";")?;
            builder.fact(id).expect("expressions are valid facts");
            count += 1;
        }
        if count == 0 {
            return Err(self.error_here(
                DiagnosticCode::Syntax,
                "expected at least one fact".to_string(),
            ));
        }
        Ok(())
    }

    fn parse_expr(&mut self, builder: &mut DomainBuilder) -> Progress<ElementId> {
        let (name, line, col) = self.expect_ident("predicate name")?;
        let pred = match builder.lookup_decl(&name) {
            Some(p) => p,
            None => {
                self.error_at(
                    line,
                    col,
                    DiagnosticCode::UndeclaredPredicate,
                    format!("predicate `{name}` is not declared"),
                );
                return Err(BlockAbort);
            }
        };
        self.expect_punct(TokKind::LParen, "(")?;
        let mut args: Vec<ElementId> = Vec::new();
        let mut arg_spans: Vec<(usize, usize)> = Vec::new();
        loop {
            let (aline, acol) = self.here();
            let arg = match (self.peek(), self.peek2()) {
                (Some(TokKind::Ident(_)), Some(TokKind::LParen)) => self.parse_expr(builder)?,
                (Some(TokKind::Ident(_)), _) => {
                    let (ename, eline, ecol) = self.expect_ident("argument")?;
                    match builder.lookup_entity(&ename) {
                        Some(id) => id,
                        None => {
                            self.error_at(
                                eline,
                                ecol,
                                DiagnosticCode::UndeclaredPredicate,
                                format!("`{ename}` is not a declared entity"),
                            );
                            return Err(BlockAbort);
                        }
                    }
                }
                _ => {
                    return Err(self.error_here(
                        DiagnosticCode::Syntax,
                        "expected an argument".to_string(),
                    ))
                }
            };
            args.push(arg);
            arg_spans.push((aline, acol));
            match self.peek() {
                Some(TokKind::Comma) => {
                    self.advance();
                }
                Some(TokKind::RParen) => {
                    self.advance();
                    break;
                }
                _ => {
                    return Err(
                        self.error_here(DiagnosticCode::Syntax, "expected `,` or `)`".to_string())
                    )
                }
            }
        }
        match builder.expr(pred, args) {
            Ok(id) => Ok(id),
            Err(e) => {
                let (eline, ecol) = match &e {
                    BuildError::BadArgKind { position, .. } => arg_spans[position - 1],
                    _ => (line, col),
                };
                let code = build_error_code(&e);
                self.error_at(eline, ecol, code, e.to_string());
                Err(BlockAbort)
            }
        }
    }
}

fn kind_keyword(word: &str) -> Option<PredicateKind> {
    match word {
        "attribute" => Some(PredicateKind::Attribute),
        "function" => Some(PredicateKind::Function),
        "relation" => Some(PredicateKind::Relation),
        _ => None,
    }
}

fn build_error_code(e: &BuildError) -> DiagnosticCode {
    match e {
        BuildError::DuplicateDecl(_) => DiagnosticCode::DuplicateName,
        BuildError::AttributeArity(..)
        | BuildError::ZeroArity(_)
        | BuildError::ArityMismatch { .. } => DiagnosticCode::ArityMismatch,
        BuildError::BadArgKind { .. } => DiagnosticCode::AttributeNonentityArg,
        BuildError::UnknownPredicate(_) => DiagnosticCode::UndeclaredPredicate,
        BuildError::UnknownElement(_) | BuildError::FactNotExpression => DiagnosticCode::Syntax,
    }
}

/// Parse a corpus of domain blocks. Blocks with error diagnostics are
/// dropped; the rest parse normally.
pub fn parse_corpus(source: &str) -> ParseOutcome {
    let mut parser = Parser::new(source);
    let domains = parser.parse_file();
    ParseOutcome {
        domains,
        diagnostics: parser.diagnostics,
    }
}

/// Canonical text form: entities and declarations sorted by name, facts in
/// original order. Re-parses to an isomorphic domain.
pub fn serialize(domain: &Domain) -> String {
    let mut out = format!("domain {} {{\n", domain.name());
    let mut entity_names: Vec<&str> = domain
        .entities()
        .iter()
        .map(|&id| match &domain.element(id).unwrap().payload {
            Payload::Entity(name) => name.as_str(),
            Payload::Expression { .. } => unreachable!(),
        })
        .collect();
    entity_names.sort_unstable();
    if !entity_names.is_empty() {
        out.push_str("  entities: ");
        out.push_str(&entity_names.join(", "));
        out.push_str(";\n");
    }
    let mut decls: Vec<_> = domain.declarations().iter().collect();
    decls.sort_unstable_by(|a, b| a.name.cmp(&b.name));
    for d in decls {
        out.push_str(&format!("  {} {}/{};\n", d.kind, d.name, d.arity));
    }
    if !domain.facts().is_empty() {
        out.push_str("  facts:\n");
        for &f in domain.facts() {
            out.push_str("    ");
            out.push_str(&domain.render(f));
            out.push_str(";\n");
        }
    }
    out.push_str("}\n");
    out
}

/// Structural equality up to element ids: equal canonical serializations.
pub fn isomorphic(a: &Domain, b: &Domain) -> bool {
    serialize(a) == serialize(b)
}
