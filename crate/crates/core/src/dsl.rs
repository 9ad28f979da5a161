//! The `.frules` text format.
//!
//! ```text
//! # comment
//! CLASSES A-1-a, A-1-b
//! RULE R1: p425 IS {VL, L} AND p075 IS {VVVL, VVL, VL} => A-1-a
//! RULE R2: p425 IS {VL, L, LM, M} => A-1-b
//! ```
//!
//! The `CLASSES` header is optional; without it classes are prioritized in
//! order of first mention. Keywords and labels are case-sensitive. Parsing
//! collects every diagnostic before failing.

use std::fmt;

use thiserror::Error;

use crate::fuzzy::Variables;
use crate::rules::{Antecedent, Rule, RuleBase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagnosticKind {
    Syntax,
    InvalidUtf8,
    UnknownVariable,
    UnknownDescriptor,
    DuplicateDescriptor,
    DuplicateAntecedent,
    DuplicateRuleId,
    DuplicateClass,
    UnknownClass,
    EmptyDescriptorSet,
    EmptyRuleBase,
}

/// One problem in a rule document. `line` and `column` are 1-based and
/// count characters; the offending token spans `len` characters from there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub line: usize,
    pub column: usize,
    pub len: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseErrors {
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for ParseErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Start of a rule in its source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

/// Parsed document with the source kept for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleDocument {
    pub source: String,
    pub rulebase: RuleBase,
    /// Position of each rule's `RULE` keyword, in rule order.
    pub spans: Vec<Span>,
}

impl RuleDocument {
    pub fn span_of(&self, rule_id: &str) -> Option<Span> {
        self.rulebase
            .rules()
            .iter()
            .position(|r| r.id == rule_id)
            .map(|i| self.spans[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    LBrace,
    RBrace,
    Comma,
    Colon,
    Arrow,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Arrow => "`=>`".into(),
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self, Tok::Word(s) if s == w)
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
    len: usize,
}

const KEYWORDS: [&str; 4] = ["RULE", "IS", "AND", "CLASSES"];

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '-' | '_' | '.' | '/')
}

fn lex(text: &str, diags: &mut Vec<Diagnostic>) -> Vec<Token> {
    let mut out = Vec::new();
    for (li, line) in text.split('\n').enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let (line, column) = (li + 1, i + 1);
            let single = |tok| Token { tok, line, column, len: 1 };
            match c {
                '#' => break,
                c if c.is_whitespace() => i += 1,
                '{' => {
                    out.push(single(Tok::LBrace));
                    i += 1;
                }
                '}' => {
                    out.push(single(Tok::RBrace));
                    i += 1;
                }
                ',' => {
                    out.push(single(Tok::Comma));
                    i += 1;
                }
                ':' => {
                    out.push(single(Tok::Colon));
                    i += 1;
                }
                '=' if chars.get(i + 1) == Some(&'>') => {
                    out.push(Token { tok: Tok::Arrow, line, column, len: 2 });
                    i += 2;
                }
                c if is_word_char(c) => {
                    let start = i;
                    while i < chars.len() && is_word_char(chars[i]) {
                        i += 1;
                    }
                    out.push(Token {
                        tok: Tok::Word(chars[start..i].iter().collect()),
                        line,
                        column,
                        len: i - start,
                    });
                }
                other => {
                    diags.push(Diagnostic {
                        kind: DiagnosticKind::Syntax,
                        line,
                        column,
                        len: 1,
                        message: format!("unexpected character {other:?}"),
                    });
                    i += 1;
                }
            }
        }
    }
    out
}

struct RawClause {
    variable: Token,
    labels: Vec<Token>,
    open: Token,
}

struct RawRule {
    keyword: Token,
    id: Token,
    clauses: Vec<RawClause>,
    consequent: Token,
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    eof: (usize, usize),
    diags: Vec<Diagnostic>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&mut self, expected: &str) {
        let (line, column, len, found) = match self.peek() {
            Some(t) => (t.line, t.column, t.len, t.tok.describe()),
            None => (self.eof.0, self.eof.1, 1, "end of input".to_string()),
        };
        self.diags.push(Diagnostic {
            kind: DiagnosticKind::Syntax,
            line,
            column,
            len,
            message: format!("expected {expected}, found {found}"),
        });
    }

    fn expect(&mut self, want: &Tok, expected: &str) -> Option<&'a Token> {
        match self.peek() {
            Some(t) if &t.tok == want => self.bump(),
            _ => {
                self.error_here(expected);
                None
            }
        }
    }

    /// A non-keyword word.
    fn label(&mut self, expected: &str) -> Option<&'a Token> {
        match self.peek() {
            Some(t) if matches!(&t.tok, Tok::Word(w) if !KEYWORDS.contains(&w.as_str())) => self.bump(),
            _ => {
                self.error_here(expected);
                None
            }
        }
    }

    fn skip_to_next_rule(&mut self) {
        while let Some(t) = self.peek() {
            if t.tok.is_word("RULE") {
                break;
            }
            self.pos += 1;
        }
    }

    fn header(&mut self) -> Option<Vec<&'a Token>> {
        if !self.peek()?.tok.is_word("CLASSES") {
            return None;
        }
        self.bump();
        let mut labels = Vec::new();
        loop {
            match self.label("a class label") {
                Some(t) => labels.push(t),
                None => {
                    self.skip_to_next_rule();
                    return Some(labels);
                }
            }
            if self.peek().map(|t| &t.tok) == Some(&Tok::Comma) {
                self.bump();
            } else {
                return Some(labels);
            }
        }
    }

    fn clause(&mut self) -> Option<RawClause> {
        let variable = self.label("a variable name")?;
        self.expect(&Tok::Word("IS".into()), "`IS`")?;
        let open = self.expect(&Tok::LBrace, "`{`")?;
        let mut labels = Vec::new();
        if self.peek().map(|t| &t.tok) == Some(&Tok::RBrace) {
            self.bump();
            return Some(RawClause { variable: variable.clone(), labels, open: open.clone() });
        }
        loop {
            labels.push(self.label("a descriptor label")?.clone());
            match self.peek().map(|t| &t.tok) {
                Some(Tok::Comma) => {
                    self.bump();
                }
                Some(Tok::RBrace) => {
                    self.bump();
                    break;
                }
                _ => {
                    self.error_here("`,` or `}`");
                    return None;
                }
            }
        }
        Some(RawClause { variable: variable.clone(), labels, open: open.clone() })
    }

    fn rule(&mut self) -> Option<RawRule> {
        let keyword = self.expect(&Tok::Word("RULE".into()), "`RULE`")?.clone();
        let id = self.label("a rule id")?.clone();
        self.expect(&Tok::Colon, "`:`")?;
        let mut clauses = vec![self.clause()?];
        while self.peek().is_some_and(|t| t.tok.is_word("AND")) {
            self.bump();
            clauses.push(self.clause()?);
        }
        self.expect(&Tok::Arrow, "`AND` or `=>`")?;
        let consequent = self.label("a class label")?.clone();
        Some(RawRule { keyword, id, clauses, consequent })
    }
}

fn diag(kind: DiagnosticKind, t: &Token, message: String) -> Diagnostic {
    Diagnostic { kind, line: t.line, column: t.column, len: t.len, message }
}

fn word(t: &Token) -> &str {
    match &t.tok {
        Tok::Word(w) => w,
        _ => "",
    }
}

/// Parses a rule document, checking every name against `vars`.
pub fn parse_document(text: &str, vars: &Variables) -> Result<RuleDocument, ParseErrors> {
    let mut diags = Vec::new();
    let toks = lex(text, &mut diags);
    let last_line = text.split('\n').count();
    let last_col = text.split('\n').next_back().map_or(0, |l| l.chars().count()) + 1;
    let mut p = Parser { toks: &toks, pos: 0, eof: (last_line, last_col), diags };

    let header = p.header();
    let mut raw = Vec::new();
    while p.peek().is_some() {
        match p.rule() {
            Some(r) => raw.push(r),
            None => {
                // a failed rule has consumed its own `RULE`, so stopping on one
                // means a fresh rule starts there
                if !p.peek().is_some_and(|t| t.tok.is_word("RULE")) {
                    p.bump();
                }
                p.skip_to_next_rule();
            }
        }
    }
    let mut diags = p.diags;

    let mut class_order: Vec<String> = Vec::new();
    if let Some(labels) = &header {
        for t in labels {
            let name = word(t).to_string();
            if class_order.contains(&name) {
                diags.push(diag(DiagnosticKind::DuplicateClass, t, format!("class `{name}` is listed twice")));
            } else {
                class_order.push(name);
            }
        }
    }

    let mut rules: Vec<Rule> = Vec::with_capacity(raw.len());
    let mut spans = Vec::with_capacity(raw.len());
    for r in &raw {
        let id = word(&r.id).to_string();
        if rules.iter().any(|x| x.id == id) {
            diags.push(diag(DiagnosticKind::DuplicateRuleId, &r.id, format!("rule id `{id}` is already used")));
        }
        let mut antecedents: Vec<Antecedent> = Vec::new();
        for c in &r.clauses {
            let vname = word(&c.variable);
            if antecedents.iter().any(|a| a.variable == vname) {
                diags.push(diag(
                    DiagnosticKind::DuplicateAntecedent,
                    &c.variable,
                    format!("rule {id}: variable `{vname}` already has an antecedent"),
                ));
            }
            if c.labels.is_empty() {
                diags.push(diag(
                    DiagnosticKind::EmptyDescriptorSet,
                    &c.open,
                    format!("rule {id}: descriptor set for `{vname}` is empty"),
                ));
            }
            match vars.get(vname) {
                None => diags.push(diag(
                    DiagnosticKind::UnknownVariable,
                    &c.variable,
                    format!("rule {id}: unknown variable `{vname}`"),
                )),
                Some(var) => {
                    for (i, l) in c.labels.iter().enumerate() {
                        let label = word(l);
                        if var.index_of(label).is_none() {
                            diags.push(diag(
                                DiagnosticKind::UnknownDescriptor,
                                l,
                                format!("rule {id}: `{label}` is not a descriptor of `{vname}`"),
                            ));
                        } else if c.labels[..i].iter().any(|p| word(p) == label) {
                            diags.push(diag(
                                DiagnosticKind::DuplicateDescriptor,
                                l,
                                format!("rule {id}: descriptor `{label}` is listed twice"),
                            ));
                        }
                    }
                }
            }
            antecedents.push(Antecedent::new(vname, c.labels.iter().map(|l| word(l).to_string())));
        }
        let class = word(&r.consequent).to_string();
        if header.is_some() {
            if !class_order.contains(&class) {
                diags.push(diag(
                    DiagnosticKind::UnknownClass,
                    &r.consequent,
                    format!("rule {id}: class `{class}` is not listed in CLASSES"),
                ));
            }
        } else if !class_order.contains(&class) {
            class_order.push(class.clone());
        }
        rules.push(Rule::new(id, antecedents, class));
        spans.push(Span { line: r.keyword.line, column: r.keyword.column });
    }

    if rules.is_empty() && diags.is_empty() {
        diags.push(Diagnostic {
            kind: DiagnosticKind::EmptyRuleBase,
            line: 1,
            column: 1,
            len: 1,
            message: "rule base has no rules".into(),
        });
    }
    if !diags.is_empty() {
        diags.sort_by_key(|d| (d.line, d.column));
        return Err(ParseErrors { diagnostics: diags });
    }
    let rulebase = RuleBase::new(rules, class_order, vars).map_err(|e| ParseErrors {
        diagnostics: vec![Diagnostic {
            kind: DiagnosticKind::Syntax,
            line: 1,
            column: 1,
            len: 1,
            message: e.to_string(),
        }],
    })?;
    Ok(RuleDocument { source: text.to_string(), rulebase, spans })
}

/// Parses `text` into a rule base.
///
/// ```
/// use soilfuzz::{dsl, hrb};
///
/// let vars = hrb::variables();
/// let rb = dsl::parse_rules(
///     "RULE R3: p425 IS {H,VH} AND p075 IS {VVVL,VVL} => A-3",
///     &vars,
/// )
/// .unwrap();
/// assert_eq!(rb.rules()[0].antecedents.len(), 2);
///
/// let err = dsl::parse_rules("RULE R1: p2mm IS {} => A-1-a", &vars).unwrap_err();
/// assert_eq!(err.diagnostics[0].column, 18);
/// ```
pub fn parse_rules(text: &str, vars: &Variables) -> Result<RuleBase, ParseErrors> {
    parse_document(text, vars).map(|d| d.rulebase)
}

/// Like [`parse_rules`] for raw bytes; invalid UTF-8 becomes a diagnostic.
pub fn parse_bytes(bytes: &[u8], vars: &Variables) -> Result<RuleBase, ParseErrors> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_rules(text, vars),
        Err(e) => {
            let valid = &bytes[..e.valid_up_to()];
            // valid prefix is UTF-8 by construction
            let prefix = std::str::from_utf8(valid).unwrap_or_default();
            let line = prefix.matches('\n').count() + 1;
            let column = prefix.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            Err(ParseErrors {
                diagnostics: vec![Diagnostic {
                    kind: DiagnosticKind::InvalidUtf8,
                    line,
                    column,
                    len: 1,
                    message: "input is not valid UTF-8".into(),
                }],
            })
        }
    }
}

/// Canonical text: a `CLASSES` header, then one rule per line with
/// descriptors in ladder order.
pub fn serialize(rb: &RuleBase) -> String {
    let mut out = format!("CLASSES {}\n", rb.class_order().join(", "));
    for rule in rb.rules() {
        out.push_str(&format_rule(rule));
        out.push('\n');
    }
    out
}

pub fn format_rule(rule: &Rule) -> String {
    let clauses: Vec<String> = rule
        .antecedents
        .iter()
        .map(|a| format!("{} IS {{{}}}", a.variable, a.labels.join(", ")))
        .collect();
    format!("RULE {}: {} => {}", rule.id, clauses.join(" AND "), rule.consequent)
}
