//! Concrete syntax: system specs (`.wcb`), formulas (`.wfl`), words and
//! alphabet files.
//!
//! ```text
//! system     := "wcb 1" "semiring" NAME component+ instances?
//! component  := "component" NAME "{" ("port" NAME ("=" weight)?)+ lts? "}"
//! lts        := "lts" "{" "states" NAME+ "initial" NAME (NAME "--" NAME "-->" NAME)* "}"
//! instances  := "instances" "{" NAME "=" INT ("," NAME "=" INT)* "}"
//!
//! formula    := or ("->" formula)?
//! or         := and (("|" | "(+)") and)*
//! and        := concat (("&" | "(x)") concat)*
//! concat     := shuffle (("*" | "(.)") shuffle)*
//! shuffle    := unary (("~" | "(~)") unary)*
//! unary      := "!" unary | quantified | primary
//! quantified := (QUANT VAR ":" TYPE)+ ("(" formula ")")? "." formula
//! primary    := "(" formula ")" | "true" | "false" | weight
//!             | ("hash" | "hashw") "(" port ("," port)* ")"
//!             | var ("=" | "!=") var | port
//! port       := (TYPE ".")? PORT "(" (VAR | INT) ")"
//! var        := VAR (":" TYPE)?
//! QUANT      := E | A | Ec | Ac | Es | As | Sum | Prod | SumC | ProdC | SumS | ProdS
//! ```
//!
//! Comments run from `//` to the end of the line. A constraint in front of
//! the dot guards the body of the innermost quantifier: as an implication
//! when that quantifier is universal, as a conjunction otherwise.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::logic::{
    free_variables, validate, DiagnosticKind, Epil, Foeil, Formula, InstRef, Layer, Op, Pil, PortRef, Quant, Var, Wfoeil,
};
use crate::semiring::{Semiring, Value};
use crate::system::{
    Alphabet, ComponentType, InstanceMap, Instantiation, Interaction, Lts, ParametricSystem, Port, PortInstance, Word,
};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Num(String),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub start: usize,
    pub end: usize,
}

const SYMBOLS: [&str; 21] = [
    "-->", "->", "!=", "--", "(", ")", "{", "}", "[", "]", ",", ".", ":", "=", "!", "&", "|", "*", "~", "+", ";",
];

pub(crate) fn lex(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if text[i..].starts_with("//") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let negative_number = c == b'-'
            && (bytes.get(i + 1).is_some_and(u8::is_ascii_digit) || text[i + 1..].starts_with("inf"));
        if c.is_ascii_digit() || negative_number {
            if text[i..].starts_with("-inf") {
                i += 4;
            } else {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                for sep in [b'.', b'/'] {
                    if i + 1 < bytes.len() && bytes[i] == sep && bytes[i + 1].is_ascii_digit() {
                        i += 1;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
            }
            out.push(Token { tok: Tok::Num(text[start..i].to_string()), start, end: i });
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(text[start..i].to_string()), start, end: i });
            continue;
        }
        match SYMBOLS.iter().find(|s| text[i..].starts_with(**s)) {
            Some(s) => {
                i += s.len();
                out.push(Token { tok: Tok::Sym(s), start, end: i });
            }
            None => {
                let ch = text[i..].chars().next().expect("in bounds");
                return Err(Error::syntax(text, i, i + ch.len_utf8(), format!("unexpected character `{ch}`")));
            }
        }
    }
    out.push(Token { tok: Tok::Eof, start: text.len(), end: text.len() });
    Ok(out)
}

/// Token cursor shared by all the formats.
pub(crate) struct Cursor<'t> {
    pub text: &'t str,
    pub toks: Vec<Token>,
    pub pos: usize,
}

impl<'t> Cursor<'t> {
    pub fn new(text: &'t str) -> Result<Cursor<'t>> {
        Ok(Cursor { text, toks: lex(text)?, pos: 0 })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    pub fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn error(&self, message: impl Into<String>) -> Error {
        let t = &self.toks[self.pos];
        let end = if t.end > t.start { t.end } else { (t.start + 1).min(self.text.len()) };
        Error::syntax(self.text, t.start, end, message)
    }

    pub fn error_at(&self, tok: &Token, message: impl Into<String>) -> Error {
        Error::syntax(self.text, tok.start, tok.end.max(tok.start + 1).min(self.text.len()), message)
    }

    pub fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    pub fn is_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    pub fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{s}`")))
        }
    }

    pub fn expect_keyword(&mut self, s: &str) -> Result<()> {
        if self.is_ident(s) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected `{s}`")))
        }
    }

    pub fn ident(&mut self, what: &str) -> Result<(String, Token)> {
        match self.peek().clone() {
            Tok::Ident(s) => Ok((s, self.bump())),
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    pub fn number(&mut self, what: &str) -> Result<(String, Token)> {
        match self.peek().clone() {
            Tok::Num(s) => Ok((s, self.bump())),
            Tok::Ident(s) if s == "inf" => Ok((s, self.bump())),
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    pub fn count(&mut self, what: &str) -> Result<usize> {
        let (s, tok) = self.number(what)?;
        s.parse().map_err(|_| self.error_at(&tok, format!("expected {what}")))
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    /// Consumes a `NAME VERSION` header line.
    pub fn header(&mut self, name: &str) -> Result<()> {
        if !self.is_ident(name) {
            return Err(self.error(format!("missing `{name} 1` header")));
        }
        self.bump();
        let (v, tok) = self.number("a format version")?;
        if v != "1" {
            return Err(self.error_at(&tok, format!("unsupported {name} version {v}")));
        }
        Ok(())
    }
}

/// A parsed `.wcb` file: the system and its optional instance map.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    pub system: ParametricSystem,
    pub instances: Option<InstanceMap>,
}

impl SystemSpec {
    pub fn instantiate(&self) -> Result<Instantiation> {
        let r = self.instances.clone().ok_or_else(|| Error::validation("the system spec has no instances block"))?;
        self.system.instantiate(&r)
    }
}

/// Parses a `.wcb` system spec.
pub fn parse_system_spec(text: &str) -> Result<SystemSpec> {
    let mut c = Cursor::new(text)?;
    c.header("wcb")?;
    c.expect_keyword("semiring")?;
    let (name, tok) = c.ident("a semiring name")?;
    let semiring: Semiring = name.parse().map_err(|e: Error| c.error_at(&tok, e.to_string()))?;
    let mut types = Vec::new();
    let mut instances = None;
    while !c.at_eof() {
        if c.is_ident("component") {
            c.bump();
            types.push(parse_component(&mut c, semiring)?);
        } else if c.is_ident("instances") {
            c.bump();
            if instances.is_some() {
                return Err(c.error("duplicate instances block"));
            }
            instances = Some(parse_instances(&mut c, &types)?);
        } else {
            return Err(c.error("expected `component` or `instances`"));
        }
    }
    let system = ParametricSystem::new(semiring, types)?;
    Ok(SystemSpec { system, instances })
}

/// Parses a `.wcb` system spec, ignoring its instances block.
pub fn parse_system(text: &str) -> Result<ParametricSystem> {
    parse_system_spec(text).map(|s| s.system)
}

pub(crate) fn parse_weight(c: &mut Cursor, semiring: Semiring) -> Result<Value> {
    let (lit, tok) = match c.peek().clone() {
        Tok::Ident(s) if s == "true" || s == "false" => (s, c.bump()),
        _ => c.number("a weight")?,
    };
    semiring.parse_value(&lit).map_err(|e| c.error_at(&tok, e.to_string()))
}

fn parse_component(c: &mut Cursor, semiring: Semiring) -> Result<ComponentType> {
    let (name, _) = c.ident("a component type name")?;
    c.expect_sym("{")?;
    let mut ports = Vec::new();
    let mut lts = None;
    loop {
        if c.eat_sym("}") {
            break;
        }
        if c.is_ident("port") {
            c.bump();
            let (pname, _) = c.ident("a port name")?;
            let weight = if c.eat_sym("=") { parse_weight(c, semiring)? } else { semiring.one() };
            ports.push(Port { name: pname, weight });
            c.eat_sym(";");
        } else if c.is_ident("lts") {
            c.bump();
            if lts.is_some() {
                return Err(c.error("duplicate lts block"));
            }
            lts = Some(parse_lts(c)?);
        } else {
            return Err(c.error("expected `port`, `lts` or `}`"));
        }
    }
    Ok(ComponentType { name, ports, lts })
}

fn parse_lts(c: &mut Cursor) -> Result<Lts> {
    c.expect_sym("{")?;
    c.expect_keyword("states")?;
    let mut states = Vec::new();
    while !c.is_ident("initial") {
        let (s, _) = c.ident("a state name or `initial`")?;
        states.push(s);
        c.eat_sym(",");
    }
    c.bump();
    let (initial, _) = c.ident("the initial state")?;
    let mut transitions = Vec::new();
    while !c.eat_sym("}") {
        let (q, _) = c.ident("a transition or `}`")?;
        c.expect_sym("--")?;
        let (p, _) = c.ident("a port name")?;
        c.expect_sym("-->")?;
        let (q2, _) = c.ident("a target state")?;
        transitions.push((q, p, q2));
    }
    Ok(Lts { states, initial, transitions })
}

fn parse_instances(c: &mut Cursor, types: &[ComponentType]) -> Result<InstanceMap> {
    c.expect_sym("{")?;
    let mut counts: Vec<Option<usize>> = vec![None; types.len()];
    loop {
        if c.eat_sym("}") {
            break;
        }
        let (name, tok) = c.ident("a component type name")?;
        let ty = types
            .iter()
            .position(|t| t.name == name)
            .ok_or_else(|| c.error_at(&tok, format!("unknown component type `{name}`")))?;
        c.expect_sym("=")?;
        let n = c.count("an instance count")?;
        if counts[ty].replace(n).is_some() {
            return Err(c.error_at(&tok, format!("`{name}` is given twice")));
        }
        if !c.eat_sym(",") && !c.is_sym("}") {
            return Err(c.error("expected `,` or `}`"));
        }
    }
    let mut r = Vec::new();
    for (t, n) in types.iter().zip(counts) {
        r.push(n.ok_or_else(|| Error::validation(format!("instances block misses `{}`", t.name)))?);
    }
    Ok(InstanceMap(r))
}

/// Renders a system spec in `.wcb` syntax.
pub fn render_system(system: &ParametricSystem, instances: Option<&InstanceMap>) -> String {
    let mut out = String::from("wcb 1\n");
    let _ = writeln!(out, "semiring {}", system.semiring.name());
    for t in &system.types {
        let _ = writeln!(out, "\ncomponent {} {{", t.name);
        for p in &t.ports {
            let _ = writeln!(out, "  port {} = {}", p.name, system.semiring.render(&p.weight));
        }
        if let Some(lts) = &t.lts {
            let _ = writeln!(out, "  lts {{");
            let _ = writeln!(out, "    states {}", lts.states.join(" "));
            let _ = writeln!(out, "    initial {}", lts.initial);
            for (q, p, q2) in &lts.transitions {
                let _ = writeln!(out, "    {q} --{p}--> {q2}");
            }
            let _ = writeln!(out, "  }}");
        }
        let _ = writeln!(out, "}}");
    }
    if let Some(r) = instances {
        let parts: Vec<String> =
            system.types.iter().zip(&r.0).map(|(t, n)| format!("{} = {n}", t.name)).collect();
        let _ = writeln!(out, "\ninstances {{ {} }}", parts.join(", "));
    }
    out
}

/// A partially classified formula: each node sits at the lowest layer that
/// can express it.
enum Term {
    Pil(Pil),
    Epil(Epil),
    Foeil(Foeil),
    W(Wfoeil),
}

impl Term {
    fn rank(&self) -> u8 {
        match self {
            Term::Pil(_) => 0,
            Term::Epil(_) => 1,
            Term::Foeil(_) => 2,
            Term::W(_) => 3,
        }
    }

    fn into_epil(self) -> Epil {
        match self {
            Term::Pil(p) => Epil::Pil(p),
            Term::Epil(e) => e,
            _ => unreachable!("rank checked"),
        }
    }

    fn into_foeil(self) -> Foeil {
        match self {
            Term::Pil(p) => Foeil::pil(p),
            Term::Epil(e) => Foeil::Epil(e),
            Term::Foeil(f) => f,
            Term::W(_) => unreachable!("rank checked"),
        }
    }

    fn into_w(self) -> Wfoeil {
        match self {
            Term::W(w) => w,
            other => Wfoeil::Foeil(other.into_foeil()),
        }
    }
}

struct FormulaParser<'t, 's> {
    c: Cursor<'t>,
    system: &'s ParametricSystem,
    scope: Vec<Var>,
}

impl FormulaParser<'_, '_> {
    fn weighted_op(&self) -> Option<Op> {
        let Tok::Sym("(") = self.c.peek() else { return None };
        if !matches!(self.c.peek_at(2), Tok::Sym(")")) {
            return None;
        }
        match self.c.peek_at(1) {
            Tok::Sym("+") => Some(Op::Or),
            Tok::Ident(x) if x == "x" => Some(Op::And),
            Tok::Sym(".") => Some(Op::Concat),
            Tok::Sym("~") => Some(Op::Shuffle),
            _ => None,
        }
    }

    fn binary_op(&self, level: Op) -> Option<bool> {
        let plain = match level {
            Op::Or => "|",
            Op::And => "&",
            Op::Concat => "*",
            Op::Shuffle => "~",
        };
        if self.c.is_sym(plain) {
            return Some(false);
        }
        (self.weighted_op() == Some(level)).then_some(true)
    }

    fn combine(&self, op: Op, weighted: bool, a: Term, b: Term, at: &Token) -> Result<Term> {
        if weighted {
            return Ok(Term::W(Wfoeil::bin(op, a.into_w(), b.into_w())));
        }
        let rank = a.rank().max(b.rank());
        Ok(match rank {
            0 if matches!(op, Op::Or | Op::And) => {
                let (Term::Pil(x), Term::Pil(y)) = (a, b) else { unreachable!() };
                Term::Pil(if op == Op::Or { Pil::or(x, y) } else { Pil::and(x, y) })
            }
            0 | 1 => Term::Epil(Epil::bin(op, a.into_epil(), b.into_epil())),
            2 => Term::Foeil(Foeil::bin(op, a.into_foeil(), b.into_foeil())),
            _ => {
                return Err(self.c.error_at(
                    at,
                    "unweighted operator applied to a weighted formula; use (+), (x), (.) or (~)",
                ))
            }
        })
    }

    fn negate(&self, t: Term, at: &Token) -> Result<Term> {
        let bad = || {
            self.c.error_at(at, "negation applies only to PIL formulas, concatenations of PIL formulas and equalities")
        };
        Ok(match t {
            Term::Pil(p) => Term::Pil(p.not()),
            Term::Epil(Epil::Not(inner)) => match *inner {
                Epil::Pil(p) => Term::Pil(p),
                e => Term::Epil(e),
            },
            Term::Epil(e) if e.is_zeta() => Term::Epil(Epil::Not(Box::new(e))),
            Term::Foeil(f) => Term::Foeil(f.negate_constraint().ok_or_else(bad)?),
            _ => return Err(bad()),
        })
    }

    fn formula(&mut self) -> Result<Term> {
        let lhs = self.level(Op::Or)?;
        if self.c.is_sym("->") {
            let tok = self.c.bump();
            let rhs = self.formula()?;
            let weighted = rhs.rank() == 3;
            let neg = self.negate(lhs, &tok)?;
            return self.combine(Op::Or, weighted, neg, rhs, &tok);
        }
        Ok(lhs)
    }

    fn level(&mut self, op: Op) -> Result<Term> {
        let next = |p: &mut Self| match op {
            Op::Or => p.level(Op::And),
            Op::And => p.level(Op::Concat),
            Op::Concat => p.level(Op::Shuffle),
            Op::Shuffle => p.unary(),
        };
        let mut lhs = next(self)?;
        while let Some(weighted) = self.binary_op(op) {
            let tok = self.c.bump();
            if weighted {
                self.c.bump();
                self.c.bump();
            }
            let rhs = next(self)?;
            lhs = self.combine(op, weighted, lhs, rhs, &tok)?;
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Term> {
        if self.c.is_sym("!") {
            let tok = self.c.bump();
            let inner = self.unary()?;
            return self.negate(inner, &tok);
        }
        if let Tok::Ident(word) = self.c.peek() {
            if Quant::from_keyword(word).is_some() && matches!(self.c.peek_at(1), Tok::Ident(_)) {
                return self.quantified();
            }
        }
        self.primary()
    }

    fn binder(&mut self) -> Result<(Quant, bool, Var)> {
        let (kw, _) = self.c.ident("a quantifier")?;
        let (q, weighted) = Quant::from_keyword(&kw).expect("checked by caller");
        let (name, _) = self.c.ident("a variable")?;
        self.c.expect_sym(":")?;
        let (ty_name, tok) = self.c.ident("a component type")?;
        let ty = self
            .system
            .type_index(&ty_name)
            .ok_or_else(|| self.c.error_at(&tok, format!("unknown component type `{ty_name}`")))?;
        Ok((q, weighted, Var { name, ty }))
    }

    fn quantified(&mut self) -> Result<Term> {
        let start = self.c.toks[self.c.pos].clone();
        let mut binders = vec![self.binder()?];
        while matches!(self.c.peek(), Tok::Ident(w) if Quant::from_keyword(w).is_some()) {
            binders.push(self.binder()?);
        }
        let depth = self.scope.len();
        self.scope.extend(binders.iter().map(|(_, _, v)| v.clone()));
        let constraint = if self.c.is_sym("(") {
            let tok = self.c.bump();
            let beta = self.formula()?;
            self.c.expect_sym(")")?;
            match beta {
                Term::Foeil(f) if f.is_constraint() => Some(f),
                _ => return Err(self.c.error_at(&tok, "a quantifier constraint must combine equalities")),
            }
        } else {
            None
        };
        self.c.expect_sym(".")?;
        let mut body = self.formula()?;
        self.scope.truncate(depth);
        if let Some(beta) = constraint {
            let (q, weighted, _) = binders.last().expect("nonempty");
            let weighted = *weighted || body.rank() == 3;
            body = if q.is_universal() {
                let guard = beta.negate_constraint().expect("constraint");
                self.combine(Op::Or, weighted, Term::Foeil(guard), body, &start)?
            } else {
                self.combine(Op::And, weighted, Term::Foeil(beta), body, &start)?
            };
        }
        for (q, weighted, v) in binders.into_iter().rev() {
            body = if weighted {
                Term::W(Wfoeil::quant(q, &v, body.into_w()))
            } else if body.rank() == 3 {
                return Err(self.c.error_at(&start, "unweighted quantifier over a weighted formula"));
            } else {
                Term::Foeil(Foeil::quant(q, &v, body.into_foeil()))
            };
        }
        Ok(body)
    }

    fn constant(&mut self) -> Result<Term> {
        let (lit, tok) = self.c.number("a constant")?;
        let v = self.system.semiring.parse_value(&lit).map_err(|e| self.c.error_at(&tok, e.to_string()))?;
        Ok(Term::W(Wfoeil::Const(v)))
    }

    fn primary(&mut self) -> Result<Term> {
        match self.c.peek().clone() {
            Tok::Sym("(") => {
                self.c.bump();
                let t = self.formula()?;
                self.c.expect_sym(")")?;
                Ok(t)
            }
            Tok::Num(_) => self.constant(),
            Tok::Ident(w) => match w.as_str() {
                "true" => {
                    self.c.bump();
                    Ok(Term::Pil(Pil::True))
                }
                "false" => {
                    self.c.bump();
                    Ok(Term::Pil(Pil::Not(Box::new(Pil::True))))
                }
                "inf" => self.constant(),
                "hash" | "hashw" if matches!(self.c.peek_at(1), Tok::Sym("(")) => {
                    self.c.bump();
                    self.c.bump();
                    let mut ports = vec![self.port()?];
                    while self.c.eat_sym(",") {
                        ports.push(self.port()?);
                    }
                    self.c.expect_sym(")")?;
                    Ok(if w == "hash" { Term::Pil(Pil::Hash(ports)) } else { Term::W(Wfoeil::HashW(ports)) })
                }
                _ => {
                    let eq_next = matches!(self.c.peek_at(1), Tok::Sym("=" | "!="))
                        || (matches!(self.c.peek_at(1), Tok::Sym(":"))
                            && matches!(self.c.peek_at(3), Tok::Sym("=" | "!=")));
                    if eq_next {
                        self.equality()
                    } else {
                        Ok(Term::Pil(Pil::Atom(self.port()?)))
                    }
                }
            },
            _ => Err(self.c.error("expected a formula")),
        }
    }

    fn var_ref(&mut self) -> Result<(String, Option<usize>, Token)> {
        let (name, tok) = self.c.ident("a variable")?;
        let ty = if self.c.eat_sym(":") {
            let (ty_name, t) = self.c.ident("a component type")?;
            Some(
                self.system
                    .type_index(&ty_name)
                    .ok_or_else(|| self.c.error_at(&t, format!("unknown component type `{ty_name}`")))?,
            )
        } else {
            None
        };
        Ok((name, ty, tok))
    }

    fn equality(&mut self) -> Result<Term> {
        let (x, tx, tok) = self.var_ref()?;
        let negated = self.c.is_sym("!=");
        self.c.bump();
        let (y, ty, _) = self.var_ref()?;
        let sorts = |name: &str, given: Option<usize>| -> BTreeSet<usize> {
            match given {
                Some(t) => [t].into(),
                None => self.scope.iter().filter(|v| v.name == name).map(|v| v.ty).collect(),
            }
        };
        let common: Vec<usize> = sorts(&x, tx).intersection(&sorts(&y, ty)).copied().collect();
        let sort = match common.as_slice() {
            [s] => *s,
            [] => {
                return Err(self.c.error_at(
                    &tok,
                    format!("cannot infer a common sort for `{x}` and `{y}`; annotate as `{x}:type`"),
                ))
            }
            _ => return Err(self.c.error_at(&tok, format!("ambiguous sort for `{x}` and `{y}`; annotate as `{x}:type`"))),
        };
        let (a, b) = (Var { name: x, ty: sort }, Var { name: y, ty: sort });
        Ok(Term::Foeil(if negated { Foeil::NotEq(a, b) } else { Foeil::Eq(a, b) }))
    }

    fn port(&mut self) -> Result<PortRef> {
        let (first, tok) = self.c.ident("a port")?;
        let (ty, port) = if self.c.is_sym(".") && matches!(self.c.peek_at(1), Tok::Ident(_)) {
            self.c.bump();
            let (pname, ptok) = self.c.ident("a port name")?;
            let ty = self
                .system
                .type_index(&first)
                .ok_or_else(|| self.c.error_at(&tok, format!("unknown component type `{first}`")))?;
            let port = self.system.types[ty]
                .port_index(&pname)
                .ok_or_else(|| self.c.error_at(&ptok, format!("type `{first}` has no port `{pname}`")))?;
            (ty, port)
        } else {
            match self.system.find_port(&first).as_slice() {
                [one] => *one,
                [] => return Err(self.c.error_at(&tok, format!("unknown port `{first}`"))),
                _ => return Err(self.c.error_at(&tok, format!("port `{first}` is ambiguous; qualify it as `type.{first}`"))),
            }
        };
        self.c.expect_sym("(")?;
        let inst = match self.c.peek().clone() {
            Tok::Num(_) => {
                let t = self.c.toks[self.c.pos].clone();
                let j = self.c.count("an instance number")?;
                if j == 0 {
                    return Err(self.c.error_at(&t, "instance numbers start at 1"));
                }
                InstRef::Index(j)
            }
            Tok::Ident(name) => {
                let vt = self.c.bump();
                if !self.scope.iter().any(|v| v.name == name && v.ty == ty)
                    && self.scope.iter().any(|v| v.name == name)
                {
                    let tname = &self.system.types[ty].name;
                    return Err(self.c.error_at(
                        &vt,
                        format!("sort mismatch: port of type `{tname}` used with variable `{name}` of another sort"),
                    ));
                }
                InstRef::Var(Var { name, ty })
            }
            _ => return Err(self.c.error("expected a variable or an instance number")),
        };
        self.c.expect_sym(")")?;
        Ok(PortRef { ty, port, inst })
    }
}

fn has_quantifier_or_equality(w: &Wfoeil) -> bool {
    fn f(x: &Foeil) -> bool {
        match x {
            Foeil::Epil(_) => false,
            Foeil::Eq(..) | Foeil::NotEq(..) | Foeil::Quant(..) => true,
            Foeil::Bin(_, a, b) => f(a) || f(b),
        }
    }
    match w {
        Wfoeil::Const(_) | Wfoeil::HashW(_) => false,
        Wfoeil::Foeil(x) => f(x),
        Wfoeil::Bin(_, a, b) => has_quantifier_or_equality(a) || has_quantifier_or_equality(b),
        Wfoeil::Quant(..) => true,
    }
}

/// Parses a formula of the requested layer and validates it.
pub fn parse_formula(text: &str, system: &ParametricSystem, layer: Layer) -> Result<Formula> {
    parse_formula_with(text, system, layer, false)
}

/// Like [`parse_formula`]; with `relaxed`, negations that break the proviso
/// of the existential concatenation and shuffle quantifiers are accepted.
pub fn parse_formula_with(text: &str, system: &ParametricSystem, layer: Layer, relaxed: bool) -> Result<Formula> {
    let mut p = FormulaParser { c: Cursor::new(text)?, system, scope: Vec::new() };
    let term = p.formula()?;
    if !p.c.at_eof() {
        return Err(p.c.error("unexpected input after the formula"));
    }
    let layer_error = |what: &str| Error::Validation(vec![format!("layer violation: {what}")]);
    let formula = match (layer, term) {
        (Layer::Pil, Term::Pil(x)) => Formula::Pil(x),
        (Layer::Pil, _) => return Err(layer_error("a PIL formula uses only true, ports, !, & and |")),
        (Layer::Epil, t @ (Term::Pil(_) | Term::Epil(_))) => Formula::Epil(t.into_epil()),
        (Layer::Epil, _) => return Err(layer_error("an EPIL formula has no weights, equalities or quantifiers")),
        (Layer::Foeil, Term::W(_)) => return Err(layer_error("a FOEIL formula has no weights")),
        (Layer::Foeil, t) => Formula::Foeil(t.into_foeil()),
        (Layer::Wepil, t) => {
            let w = t.into_w();
            if has_quantifier_or_equality(&w) {
                return Err(layer_error("a wEPIL formula has no quantifiers or equalities"));
            }
            Formula::Wepil(w)
        }
        (Layer::Wfoeil, t) => Formula::Wfoeil(t.into_w()),
    };
    if matches!(layer, Layer::Pil | Layer::Epil | Layer::Wepil) && !free_variables(&formula).is_empty() {
        return Err(layer_error("propositional formulas name ground ports such as `type.port(1)`"));
    }
    let mut diagnostics = validate(&formula, system);
    if relaxed {
        diagnostics.retain(|d| d.kind != DiagnosticKind::Proviso);
    }
    if !diagnostics.is_empty() {
        return Err(Error::Validation(diagnostics.into_iter().map(|d| d.message).collect()));
    }
    Ok(formula)
}

/// Parses a wFOEIL formula.
pub fn parse_wfoeil(text: &str, system: &ParametricSystem) -> Result<Wfoeil> {
    match parse_formula(text, system, Layer::Wfoeil)? {
        Formula::Wfoeil(w) => Ok(w),
        _ => unreachable!(),
    }
}

/// Parses a FOEIL formula.
pub fn parse_foeil(text: &str, system: &ParametricSystem) -> Result<Foeil> {
    match parse_formula(text, system, Layer::Foeil)? {
        Formula::Foeil(f) => Ok(f),
        _ => unreachable!(),
    }
}

/// Strips the `wfl 1` header of a formula file.
pub fn formula_file_body(text: &str) -> Result<&str> {
    let mut c = Cursor::new(text)?;
    c.header("wfl")?;
    let start = c.toks[c.pos].start;
    Ok(&text[start..])
}

/// Parses a `.wfl` file as a wFOEIL formula.
pub fn parse_formula_file(text: &str, system: &ParametricSystem) -> Result<Wfoeil> {
    parse_formula_file_with(text, system, false)
}

/// Parses a `.wfl` file, optionally accepting proviso violations.
pub fn parse_formula_file_with(text: &str, system: &ParametricSystem, relaxed: bool) -> Result<Wfoeil> {
    match parse_formula_with(formula_file_body(text)?, system, Layer::Wfoeil, relaxed)? {
        Formula::Wfoeil(w) => Ok(w),
        _ => unreachable!(),
    }
}

fn ground_port(c: &mut Cursor, view: &Instantiation) -> Result<PortInstance> {
    let system = &view.system;
    let (first, tok) = c.ident("a port instance")?;
    let (ty, port) = if c.eat_sym(".") {
        let (pname, ptok) = c.ident("a port name")?;
        let ty = system
            .type_index(&first)
            .ok_or_else(|| c.error_at(&tok, format!("unknown component type `{first}`")))?;
        let port = system.types[ty]
            .port_index(&pname)
            .ok_or_else(|| c.error_at(&ptok, format!("type `{first}` has no port `{pname}`")))?;
        (ty, port)
    } else {
        match system.find_port(&first).as_slice() {
            [one] => *one,
            [] => return Err(Error::Alphabet(format!("unknown port `{first}`"))),
            _ => return Err(c.error_at(&tok, format!("port `{first}` is ambiguous; qualify it"))),
        }
    };
    c.expect_sym("(")?;
    let instance = c.count("an instance number")?;
    c.expect_sym(")")?;
    let p = PortInstance { ty, instance, port };
    view.check_port(&p)?;
    Ok(p)
}

pub(crate) fn interaction(c: &mut Cursor, view: &Instantiation) -> Result<Interaction> {
    c.expect_sym("{")?;
    let mut ports = Vec::new();
    if !c.is_sym("}") {
        ports.push(ground_port(c, view)?);
        while c.eat_sym(",") {
            ports.push(ground_port(c, view)?);
        }
    }
    c.expect_sym("}")?;
    let a = Interaction::new(ports)?;
    view.check_interaction(&a)?;
    Ok(a)
}

/// Parses `{type.port(j), ...} {...} ...`, or `eps` for the empty word.
pub fn parse_word(text: &str, view: &Instantiation) -> Result<Word> {
    let mut c = Cursor::new(text)?;
    let mut word = Vec::new();
    if c.is_ident("eps") {
        c.bump();
    } else {
        while c.is_sym("{") {
            word.push(interaction(&mut c, view)?);
        }
    }
    if !c.at_eof() {
        return Err(c.error("expected `{` or the end of the word"));
    }
    Ok(word)
}

/// One word per nonblank line; `//` comments allowed.
pub fn parse_words(text: &str, view: &Instantiation) -> Result<Vec<Word>> {
    let mut out = Vec::new();
    for line in text.lines() {
        let body = line.split("//").next().unwrap_or("").trim();
        if !body.is_empty() {
            out.push(parse_word(body, view)?);
        }
    }
    Ok(out)
}

/// Parses an `alphabet 1` file: a header followed by interactions.
pub fn parse_alphabet(text: &str, view: &Instantiation) -> Result<Alphabet> {
    let mut c = Cursor::new(text)?;
    c.header("alphabet")?;
    let mut letters = Vec::new();
    while !c.at_eof() {
        letters.push(interaction(&mut c, view)?);
    }
    Alphabet::new(letters)
}

pub fn render_alphabet(alphabet: &Alphabet, view: &Instantiation) -> String {
    let mut out = String::from("alphabet 1\n");
    for a in alphabet.letters() {
        out.push_str(&view.render_interaction(a));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Printer;

    const MS: &str = "wcb 1\nsemiring natural\ncomponent master { port p_m = 2 }\ncomponent slave { port p_s = 3 }\ninstances { master = 2, slave = 2 }\n";

    fn ms() -> ParametricSystem {
        parse_system(MS).unwrap()
    }

    fn round_trip(text: &str, system: &ParametricSystem) {
        let f = parse_wfoeil(text, system).unwrap();
        let printed = Printer { system }.to_text(&f);
        let again = parse_wfoeil(&printed, system).unwrap_or_else(|e| panic!("{printed}: {e}"));
        assert_eq!(f, again, "{printed}");
    }

    #[test]
    fn system_spec_fields() {
        let spec = parse_system_spec(MS).unwrap();
        assert_eq!(spec.system.types.len(), 2);
        assert_eq!(spec.system.types[0].ports[0].weight, Value::nat(2));
        assert_eq!(spec.instances, Some(InstanceMap(vec![2, 2])));
        let back = parse_system_spec(&render_system(&spec.system, spec.instances.as_ref())).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn empty_system_rejected() {
        let err = parse_system("wcb 1\nsemiring natural\n").unwrap_err();
        assert!(err.to_string().contains("no component types"), "{err}");
    }

    #[test]
    fn fraction_weight() {
        let s = parse_system("wcb 1 semiring rational component a { port p = 2/3 }").unwrap();
        assert_eq!(s.types[0].ports[0].weight, Value::rat(2, 3));
    }

    #[test]
    fn syntax_errors_carry_spans() {
        let text = "wcb 1\nsemiring natural\ncomponent a { port p = x }";
        match parse_system(text).unwrap_err() {
            Error::Syntax { span, .. } => {
                assert_eq!(&text[span.start..span.end], "x");
                assert_eq!((span.line, span.column), (3, 24));
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn lts_block() {
        let text = "wcb 1 semiring natural component a { port p = 2 port q = 5 lts { states s0 s1 initial s0 s0 --p--> s1 } }";
        let s = parse_system(text).unwrap();
        assert_eq!(s.types[0].ports[1].weight, Value::nat(0));
        assert!(s.types[0].lts.is_some());
    }

    #[test]
    fn master_slave_sentence() {
        let s = ms();
        let f = parse_wfoeil("ProdC x:slave . Sum y:master . hashw(master.p_m(y), slave.p_s(x))", &s).unwrap();
        let x = Var::new("x", 1);
        let y = Var::new("y", 0);
        let expected = Wfoeil::quant(
            Quant::ForallC,
            &x,
            Wfoeil::quant(Quant::Exists, &y, Wfoeil::HashW(vec![PortRef::var(0, 0, &y), PortRef::var(1, 0, &x)])),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn true_at_every_layer() {
        let s = ms();
        assert_eq!(parse_formula("true", &s, Layer::Pil).unwrap(), Formula::Pil(Pil::True));
        assert_eq!(parse_formula("true", &s, Layer::Epil).unwrap(), Formula::Epil(Epil::Pil(Pil::True)));
        assert_eq!(parse_formula("true", &s, Layer::Foeil).unwrap(), Formula::Foeil(Foeil::truth()));
        assert_eq!(parse_formula("true", &s, Layer::Wepil).unwrap(), Formula::Wepil(Wfoeil::Foeil(Foeil::truth())));
        assert_eq!(parse_formula("true", &s, Layer::Wfoeil).unwrap(), Formula::Wfoeil(Wfoeil::Foeil(Foeil::truth())));
    }

    #[test]
    fn zeta_negation() {
        let s = ms();
        let f = parse_formula("!(p_m(1) * p_s(1))", &s, Layer::Epil).unwrap();
        assert!(matches!(f, Formula::Epil(Epil::Not(_))));
        assert!(parse_formula("!((p_m(1) | p_s(1)) * p_s(2))", &s, Layer::Epil).is_ok());
        assert!(parse_formula("!((p_m(1) * p_s(1)) | p_s(2))", &s, Layer::Epil).is_err());
        assert!(parse_formula("!(p_m(1) ~ p_s(1))", &s, Layer::Epil).is_err());
    }

    #[test]
    fn layer_violations() {
        let s = ms();
        assert!(parse_formula("p_m(1) * p_s(1)", &s, Layer::Pil).is_err());
        assert!(parse_formula("2 (.) p_m(1)", &s, Layer::Epil).is_err());
        assert!(parse_formula("2 (.) p_m(1)", &s, Layer::Wepil).is_ok());
        assert!(parse_formula("Sum x:master. p_m(x)", &s, Layer::Wepil).is_err());
        assert!(parse_formula("p_m(x)", &s, Layer::Pil).is_err());
        assert!(parse_formula("2 (x) E x:master. p_m(x)", &s, Layer::Foeil).is_err());
    }

    #[test]
    fn precedence() {
        let s = ms();
        let f = parse_formula("p_m(1) | p_s(1) & !p_m(2)", &s, Layer::Pil).unwrap();
        let a = |t, j| Pil::Atom(PortRef::ground(t, 0, j));
        assert_eq!(f, Formula::Pil(Pil::or(a(0, 1), Pil::and(a(1, 1), a(0, 2).not()))));
        let g = parse_formula("p_m(1) * p_s(1) ~ p_m(2)", &s, Layer::Epil).unwrap();
        let e = |t, j| Epil::Pil(a(t, j));
        assert_eq!(g, Formula::Epil(Epil::bin(Op::Concat, e(0, 1), Epil::bin(Op::Shuffle, e(1, 1), e(0, 2)))));
    }

    #[test]
    fn derived_forms() {
        let s = ms();
        let f = parse_formula("p_m(1) -> p_s(1)", &s, Layer::Pil).unwrap();
        let a = |t| Pil::Atom(PortRef::ground(t, 0, 1));
        assert_eq!(f, Formula::Pil(Pil::or(a(0).not(), a(1))));
        assert_eq!(parse_formula("!!p_m(1)", &s, Layer::Pil).unwrap(), Formula::Pil(a(0)));
        assert_eq!(parse_formula("false", &s, Layer::Pil).unwrap(), Formula::Pil(Pil::True.not()));
    }

    #[test]
    fn constraint_sugar() {
        let s = parse_system("wcb 1 semiring natural component node { port p }").unwrap();
        let f = parse_wfoeil("Sum x:node ProdC y:node (x != y). hashw(p(x), p(y))", &s).unwrap();
        let (x, y) = (Var::new("x", 0), Var::new("y", 0));
        match f {
            Wfoeil::Quant(Quant::Exists, _, inner) => match *inner {
                Wfoeil::Quant(Quant::ForallC, _, b) => match *b {
                    Wfoeil::Bin(Op::Or, g, _) => assert_eq!(*g, Wfoeil::Foeil(Foeil::Eq(x, y))),
                    other => panic!("{other:?}"),
                },
                other => panic!("{other:?}"),
            },
            other => panic!("{other:?}"),
        }
        let e = parse_foeil("E x:node E y:node (x != y). p(x) & p(y)", &s).unwrap();
        let Foeil::Quant(_, _, inner) = e else { panic!() };
        let Foeil::Quant(_, _, b) = *inner else { panic!() };
        assert!(matches!(*b, Foeil::Bin(Op::And, ref g, _) if matches!(**g, Foeil::NotEq(..))));
    }

    #[test]
    fn sorted_variables_share_names() {
        let s = ms();
        let f = parse_wfoeil("Sum x:master Sum x:slave. hashw(p_m(x), p_s(x))", &s).unwrap();
        assert!(free_variables(&Formula::Wfoeil(f)).is_empty());
        assert!(parse_wfoeil("Sum x:master. E y:master. x = y", &s).is_ok());
        let err = parse_wfoeil("Sum x:master. p_s(x)", &s).unwrap_err();
        assert!(err.to_string().contains("sort mismatch"), "{err}");
    }

    #[test]
    fn free_variable_sorts_follow_ports() {
        let s = ms();
        let f = parse_formula("A x:master. p_m(x) & p_s(y)", &s, Layer::Foeil).unwrap();
        assert_eq!(free_variables(&f), [Var::new("y", 1)].into());
    }

    #[test]
    fn proviso_violation_rejected() {
        let s = ms();
        let err = parse_wfoeil("SumC x:master. !(true * p_m(x))", &s).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
        assert!(parse_wfoeil("ProdC x:master. !(true * p_m(x))", &s).is_ok());
    }

    #[test]
    fn round_trips() {
        let s = ms();
        for text in [
            "ProdC x:slave . Sum y:master . hashw(master.p_m(y), slave.p_s(x))",
            "2 (.) 3 (+) p_m(1) (x) (p_s(2) (~) 1)",
            "(Sum x:master. p_m(x)) (.) (true * p_s(1))",
            "A x:master. E y:master (x != y). !(true * p_m(x)) | (x = y & false)",
            "Es x:master. !p_m(x) ~ hash(p_m(x), p_s(2))",
            "(p_m(1) | p_s(1)) & !(p_m(2) & p_s(2))",
            "p_m(1) * (p_s(1) * p_m(2))",
        ] {
            round_trip(text, &s);
        }
        let tropical = s.with_semiring(Semiring::MinPlus).unwrap();
        round_trip("0 (+) -inf (x) 2.5", &tropical.with_semiring(Semiring::MaxPlus).unwrap());
        round_trip("0 (+) inf (x) 2.5", &tropical);
    }

    #[test]
    fn words() {
        let view = parse_system_spec(MS).unwrap().instantiate().unwrap();
        let w = parse_word("{p_m(1), slave.p_s(1)} {p_m(2), p_s(2)}", &view).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(view.render_word(&w), "{master.p_m(1), slave.p_s(1)} {master.p_m(2), slave.p_s(2)}");
        assert_eq!(parse_word("eps", &view).unwrap(), Vec::<Interaction>::new());
        assert!(matches!(parse_word("{p_x(1)}", &view), Err(Error::Alphabet(_))));
        assert!(parse_word("{p_m(3)}", &view).is_err());
    }

    #[test]
    fn alphabet_file() {
        let view = parse_system_spec(MS).unwrap().instantiate().unwrap();
        let a = parse_alphabet("alphabet 1\n{p_m(1)}\n{p_m(1), p_s(2)}\n", &view).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(parse_alphabet(&render_alphabet(&a, &view), &view).unwrap(), a);
        assert!(parse_alphabet("alphabet 1 {p_m(1)} {p_m(1)}", &view).is_err());
    }
}
