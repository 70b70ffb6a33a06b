//! Abstract syntax for the interaction logics and their weighted extensions.
//!
//! The layers nest: [`Pil`] inside [`Epil`] inside [`Foeil`] inside
//! [`Wfoeil`]. Propositional (ground) formulas use [`InstRef::Index`] ports;
//! first-order formulas use sorted variables. A wEPIL formula is a
//! [`Wfoeil`] without quantifiers, equalities or variables.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::semiring::Value;
use crate::system::{InstanceMap, ParametricSystem, PortInstance};

/// A first-order variable of sort `ty` (a component type index).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: String,
    pub ty: usize,
}

impl Var {
    pub fn new(name: &str, ty: usize) -> Var {
        Var { name: name.to_string(), ty }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InstRef {
    Var(Var),
    /// A fixed instance number, 1-based.
    Index(usize),
}

/// Port `port` of type `ty` at an instance given by a variable or a number.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortRef {
    pub ty: usize,
    pub port: usize,
    pub inst: InstRef,
}

impl PortRef {
    pub fn var(ty: usize, port: usize, v: &Var) -> PortRef {
        PortRef { ty, port, inst: InstRef::Var(v.clone()) }
    }

    pub fn ground(ty: usize, port: usize, instance: usize) -> PortRef {
        PortRef { ty, port, inst: InstRef::Index(instance) }
    }

    pub fn resolve(&self, sigma: &Assignment) -> Result<PortInstance> {
        let instance = match &self.inst {
            InstRef::Index(j) => *j,
            InstRef::Var(v) => sigma.get(v).ok_or_else(|| Error::Eval(format!("unbound variable `{}`", v.name)))?,
        };
        Ok(PortInstance { ty: self.ty, instance, port: self.port })
    }
}

/// Binary connectives. Weighted formulas reuse them as `⊕ ⊗ ⊙ ϖ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Or,
    And,
    Concat,
    Shuffle,
}

/// Quantifiers. Weighted formulas reuse them as `Σ Π Σ^⊙ Π^⊙ Σ^ϖ Π^ϖ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quant {
    Exists,
    Forall,
    ExistsC,
    ForallC,
    ExistsS,
    ForallS,
}

impl Quant {
    pub fn is_universal(self) -> bool {
        matches!(self, Quant::Forall | Quant::ForallC | Quant::ForallS)
    }

    /// The existential concatenation and shuffle quantifiers, under which
    /// negation is restricted.
    pub fn restricts_negation(self) -> bool {
        matches!(self, Quant::ExistsC | Quant::ExistsS)
    }

    pub fn keyword(self, weighted: bool) -> &'static str {
        match (self, weighted) {
            (Quant::Exists, false) => "E",
            (Quant::Forall, false) => "A",
            (Quant::ExistsC, false) => "Ec",
            (Quant::ForallC, false) => "Ac",
            (Quant::ExistsS, false) => "Es",
            (Quant::ForallS, false) => "As",
            (Quant::Exists, true) => "Sum",
            (Quant::Forall, true) => "Prod",
            (Quant::ExistsC, true) => "SumC",
            (Quant::ForallC, true) => "ProdC",
            (Quant::ExistsS, true) => "SumS",
            (Quant::ForallS, true) => "ProdS",
        }
    }

    pub fn from_keyword(s: &str) -> Option<(Quant, bool)> {
        let all = [Quant::Exists, Quant::Forall, Quant::ExistsC, Quant::ForallC, Quant::ExistsS, Quant::ForallS];
        for q in all {
            for weighted in [false, true] {
                if q.keyword(weighted) == s {
                    return Some((q, weighted));
                }
            }
        }
        None
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Pil {
    True,
    Atom(PortRef),
    /// `#(p1 ∧ … ∧ pm)`: satisfied by exactly the interaction made of the
    /// named port instances.
    Hash(Vec<PortRef>),
    Not(Box<Pil>),
    Or(Box<Pil>, Box<Pil>),
    And(Box<Pil>, Box<Pil>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Epil {
    Pil(Pil),
    /// Negation of a ζ-formula (PIL formulas joined by concatenation).
    Not(Box<Epil>),
    Bin(Op, Box<Epil>, Box<Epil>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Foeil {
    Epil(Epil),
    Eq(Var, Var),
    NotEq(Var, Var),
    Bin(Op, Box<Foeil>, Box<Foeil>),
    Quant(Quant, Var, Box<Foeil>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Wfoeil {
    Const(Value),
    Foeil(Foeil),
    /// `#_w(p1 ⊗ … ⊗ pm)`: the product of the port weights times `#(…)`.
    HashW(Vec<PortRef>),
    Bin(Op, Box<Wfoeil>, Box<Wfoeil>),
    Quant(Quant, Var, Box<Wfoeil>),
}

impl Pil {
    pub fn not(self) -> Pil {
        match self {
            Pil::Not(inner) => *inner,
            other => Pil::Not(Box::new(other)),
        }
    }

    pub fn or(a: Pil, b: Pil) -> Pil {
        Pil::Or(Box::new(a), Box::new(b))
    }

    pub fn and(a: Pil, b: Pil) -> Pil {
        Pil::And(Box::new(a), Box::new(b))
    }
}

impl Epil {
    pub fn bin(op: Op, a: Epil, b: Epil) -> Epil {
        Epil::Bin(op, Box::new(a), Box::new(b))
    }

    /// Whether this is a ζ-formula: PIL formulas joined by concatenation.
    pub fn is_zeta(&self) -> bool {
        match self {
            Epil::Pil(_) => true,
            Epil::Bin(Op::Concat, a, b) => a.is_zeta() && b.is_zeta(),
            _ => false,
        }
    }

    /// Literal `true`, the only formula satisfied by the empty word.
    pub fn is_true(&self) -> bool {
        matches!(self, Epil::Pil(Pil::True))
    }
}

impl Foeil {
    pub fn bin(op: Op, a: Foeil, b: Foeil) -> Foeil {
        Foeil::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn quant(q: Quant, v: &Var, body: Foeil) -> Foeil {
        Foeil::Quant(q, v.clone(), Box::new(body))
    }

    pub fn pil(p: Pil) -> Foeil {
        Foeil::Epil(Epil::Pil(p))
    }

    pub fn truth() -> Foeil {
        Foeil::pil(Pil::True)
    }

    /// Whether the formula is a Boolean combination of equalities.
    pub fn is_constraint(&self) -> bool {
        match self {
            Foeil::Eq(..) | Foeil::NotEq(..) => true,
            Foeil::Bin(Op::Or | Op::And, a, b) => a.is_constraint() && b.is_constraint(),
            _ => false,
        }
    }

    /// Negation of a constraint, pushed to the equalities.
    pub fn negate_constraint(&self) -> Option<Foeil> {
        Some(match self {
            Foeil::Eq(x, y) => Foeil::NotEq(x.clone(), y.clone()),
            Foeil::NotEq(x, y) => Foeil::Eq(x.clone(), y.clone()),
            Foeil::Bin(Op::Or, a, b) => Foeil::bin(Op::And, a.negate_constraint()?, b.negate_constraint()?),
            Foeil::Bin(Op::And, a, b) => Foeil::bin(Op::Or, a.negate_constraint()?, b.negate_constraint()?),
            _ => return None,
        })
    }
}

impl Wfoeil {
    pub fn bin(op: Op, a: Wfoeil, b: Wfoeil) -> Wfoeil {
        Wfoeil::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn quant(q: Quant, v: &Var, body: Wfoeil) -> Wfoeil {
        Wfoeil::Quant(q, v.clone(), Box::new(body))
    }
}

/// A formula of a requested layer.
#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    Pil(Pil),
    Epil(Epil),
    Wepil(Wfoeil),
    Foeil(Foeil),
    Wfoeil(Wfoeil),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Layer {
    Pil,
    Epil,
    Wepil,
    Foeil,
    Wfoeil,
}

impl std::str::FromStr for Layer {
    type Err = Error;
    fn from_str(s: &str) -> Result<Layer> {
        Ok(match s {
            "pil" => Layer::Pil,
            "epil" => Layer::Epil,
            "wepil" => Layer::Wepil,
            "foeil" => Layer::Foeil,
            "wfoeil" => Layer::Wfoeil,
            _ => return Err(Error::Config(format!("unknown formula layer `{s}`"))),
        })
    }
}

impl Formula {
    /// The formula as a weighted formula; every layer embeds into wFOEIL.
    pub fn into_wfoeil(self) -> Wfoeil {
        match self {
            Formula::Pil(p) => Wfoeil::Foeil(Foeil::pil(p)),
            Formula::Epil(e) => Wfoeil::Foeil(Foeil::Epil(e)),
            Formula::Foeil(f) => Wfoeil::Foeil(f),
            Formula::Wepil(w) | Formula::Wfoeil(w) => w,
        }
    }
}

/// A partial map from sorted variables to instance numbers.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Assignment(Vec<(Var, usize)>);

impl Assignment {
    pub fn new() -> Assignment {
        Assignment(Vec::new())
    }

    pub fn get(&self, v: &Var) -> Option<usize> {
        self.0.iter().rev().find(|(w, _)| w == v).map(|(_, j)| *j)
    }

    /// `σ[v → j]`.
    pub fn with(&self, v: &Var, j: usize) -> Assignment {
        let mut out: Vec<(Var, usize)> = self.0.iter().filter(|(w, _)| w != v).cloned().collect();
        out.push((v.clone(), j));
        Assignment(out)
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.0.iter().map(|(v, _)| v)
    }

    /// Checks `σ(x^(i)) ∈ [r(i)]` for every bound variable.
    pub fn check(&self, r: &InstanceMap) -> Result<()> {
        for (v, j) in &self.0 {
            if v.ty >= r.0.len() || *j == 0 || *j > r.0[v.ty] {
                return Err(Error::Eval(format!("σ({}) = {j} is out of range for r={r}", v.name)));
            }
        }
        Ok(())
    }
}

fn port_vars(p: &PortRef, out: &mut BTreeSet<Var>) {
    if let InstRef::Var(v) = &p.inst {
        out.insert(v.clone());
    }
}

impl Pil {
    pub fn collect_free(&self, out: &mut BTreeSet<Var>) {
        match self {
            Pil::True => {}
            Pil::Atom(p) => port_vars(p, out),
            Pil::Hash(ps) => ps.iter().for_each(|p| port_vars(p, out)),
            Pil::Not(a) => a.collect_free(out),
            Pil::Or(a, b) | Pil::And(a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
        }
    }
}

impl Epil {
    pub fn collect_free(&self, out: &mut BTreeSet<Var>) {
        match self {
            Epil::Pil(p) => p.collect_free(out),
            Epil::Not(a) => a.collect_free(out),
            Epil::Bin(_, a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
        }
    }
}

impl Foeil {
    pub fn collect_free(&self, out: &mut BTreeSet<Var>) {
        match self {
            Foeil::Epil(e) => e.collect_free(out),
            Foeil::Eq(x, y) | Foeil::NotEq(x, y) => {
                out.insert(x.clone());
                out.insert(y.clone());
            }
            Foeil::Bin(_, a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
            Foeil::Quant(_, v, body) => {
                let mut inner = BTreeSet::new();
                body.collect_free(&mut inner);
                inner.remove(v);
                out.extend(inner);
            }
        }
    }
}

impl Wfoeil {
    pub fn collect_free(&self, out: &mut BTreeSet<Var>) {
        match self {
            Wfoeil::Const(_) => {}
            Wfoeil::Foeil(f) => f.collect_free(out),
            Wfoeil::HashW(ps) => ps.iter().for_each(|p| port_vars(p, out)),
            Wfoeil::Bin(_, a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
            Wfoeil::Quant(_, v, body) => {
                let mut inner = BTreeSet::new();
                body.collect_free(&mut inner);
                inner.remove(v);
                out.extend(inner);
            }
        }
    }
}

/// The free variables of a formula of any layer.
pub fn free_variables(f: &Formula) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    match f {
        Formula::Pil(p) => p.collect_free(&mut out),
        Formula::Epil(e) => e.collect_free(&mut out),
        Formula::Foeil(x) => x.collect_free(&mut out),
        Formula::Wepil(w) | Formula::Wfoeil(w) => w.collect_free(&mut out),
    }
    out
}

/// Kinds of well-formedness problems reported by [`validate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DiagnosticKind {
    Sort,
    UnknownPort,
    Negation,
    /// Negation of a non-PIL formula under `∃*`, `∃⧢`, `Σ^⊙` or `Σ^ϖ`.
    Proviso,
    Macro,
    Constant,
    Layer,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

struct Validator<'a> {
    system: &'a ParametricSystem,
    out: Vec<Diagnostic>,
}

impl Validator<'_> {
    fn report(&mut self, kind: DiagnosticKind, message: String) {
        self.out.push(Diagnostic { kind, message });
    }

    fn var(&mut self, v: &Var) {
        if v.ty >= self.system.types.len() {
            self.report(DiagnosticKind::Sort, format!("variable `{}` has unknown sort {}", v.name, v.ty));
        }
    }

    fn port(&mut self, p: &PortRef) {
        let Some(ty) = self.system.types.get(p.ty) else {
            self.report(DiagnosticKind::UnknownPort, format!("port refers to unknown component type {}", p.ty));
            return;
        };
        if p.port >= ty.ports.len() {
            self.report(DiagnosticKind::UnknownPort, format!("type `{}` has no port number {}", ty.name, p.port));
            return;
        }
        match &p.inst {
            InstRef::Var(v) if v.ty != p.ty => {
                let sort = self.system.types.get(v.ty).map_or("?", |t| t.name.as_str()).to_string();
                self.report(
                    DiagnosticKind::Sort,
                    format!(
                        "port `{}` belongs to type `{}` but variable `{}` ranges over `{sort}`",
                        ty.ports[p.port].name, ty.name, v.name
                    ),
                );
            }
            InstRef::Index(0) => {
                self.report(DiagnosticKind::Sort, "instance numbers start at 1".to_string());
            }
            _ => {}
        }
    }

    fn hash(&mut self, ps: &[PortRef]) {
        ps.iter().for_each(|p| self.port(p));
        if ps.is_empty() {
            self.report(DiagnosticKind::Macro, "hash macro needs at least one port".to_string());
        }
        if let Err(e) = check_hash_args(ps) {
            self.report(DiagnosticKind::Macro, e);
        }
    }

    fn pil(&mut self, p: &Pil) {
        match p {
            Pil::True => {}
            Pil::Atom(r) => self.port(r),
            Pil::Hash(ps) => self.hash(ps),
            Pil::Not(a) => self.pil(a),
            Pil::Or(a, b) | Pil::And(a, b) => {
                self.pil(a);
                self.pil(b);
            }
        }
    }

    fn epil(&mut self, e: &Epil, restricted: bool) {
        match e {
            Epil::Pil(p) => self.pil(p),
            Epil::Not(a) => {
                if !a.is_zeta() {
                    self.report(DiagnosticKind::Negation, "negation applies only to PIL or ζ-formulas".to_string());
                }
                if restricted {
                    self.report(
                        DiagnosticKind::Proviso,
                        "negation of a non-PIL formula under an existential concatenation or shuffle quantifier"
                            .to_string(),
                    );
                }
                self.epil(a, restricted);
            }
            Epil::Bin(_, a, b) => {
                self.epil(a, restricted);
                self.epil(b, restricted);
            }
        }
    }

    fn foeil(&mut self, f: &Foeil, restricted: bool) {
        match f {
            Foeil::Epil(e) => self.epil(e, restricted),
            Foeil::Eq(x, y) | Foeil::NotEq(x, y) => {
                self.var(x);
                self.var(y);
                if x.ty != y.ty {
                    self.report(
                        DiagnosticKind::Sort,
                        format!("equality between `{}` and `{}` of different sorts", x.name, y.name),
                    );
                }
            }
            Foeil::Bin(_, a, b) => {
                self.foeil(a, restricted);
                self.foeil(b, restricted);
            }
            Foeil::Quant(q, v, body) => {
                self.var(v);
                self.foeil(body, restricted || q.restricts_negation());
            }
        }
    }

    fn wfoeil(&mut self, w: &Wfoeil, restricted: bool) {
        match w {
            Wfoeil::Const(k) => {
                if !self.system.semiring.contains(k) {
                    self.report(DiagnosticKind::Constant, format!("constant {k:?} is not in {}", self.system.semiring));
                }
            }
            Wfoeil::Foeil(f) => self.foeil(f, restricted),
            Wfoeil::HashW(ps) => self.hash(ps),
            Wfoeil::Bin(_, a, b) => {
                self.wfoeil(a, restricted);
                self.wfoeil(b, restricted);
            }
            Wfoeil::Quant(q, v, body) => {
                self.var(v);
                self.wfoeil(body, restricted || q.restricts_negation());
            }
        }
    }
}

/// Macro arguments may not name the same instance twice: neither the same
/// port twice nor two ports of one instance. Ports of one type at distinct
/// variables are allowed; they denote one instance when the variables agree.
pub fn check_hash_args(ps: &[PortRef]) -> std::result::Result<(), String> {
    for (i, a) in ps.iter().enumerate() {
        for b in &ps[i + 1..] {
            if a.ty == b.ty && a.inst == b.inst {
                return Err(if a.port == b.port {
                    "hash macro lists the same port instance twice".to_string()
                } else {
                    "hash macro lists two ports of the same component instance".to_string()
                });
            }
        }
    }
    Ok(())
}

/// Checks sorts, port references, the negation restrictions and constants.
/// An empty result means the formula is well formed.
pub fn validate(f: &Formula, system: &ParametricSystem) -> Vec<Diagnostic> {
    let mut v = Validator { system, out: Vec::new() };
    match f {
        Formula::Pil(p) => v.pil(p),
        Formula::Epil(e) => v.epil(e, false),
        Formula::Foeil(x) => v.foeil(x, false),
        Formula::Wepil(w) | Formula::Wfoeil(w) => v.wfoeil(w, false),
    }
    v.out
}

/// Ground ports whose instance number exceeds `r`.
pub fn check_ranges(w: &Wfoeil, r: &InstanceMap) -> Result<()> {
    fn port(p: &PortRef, r: &InstanceMap) -> Result<()> {
        if let InstRef::Index(j) = p.inst {
            if j == 0 || j > r.get(p.ty) {
                return Err(Error::Eval(format!("instance {j} of type {} does not exist for r={r}", p.ty)));
            }
        }
        Ok(())
    }
    fn pil(x: &Pil, r: &InstanceMap) -> Result<()> {
        match x {
            Pil::True => Ok(()),
            Pil::Atom(p) => port(p, r),
            Pil::Hash(ps) => ps.iter().try_for_each(|p| port(p, r)),
            Pil::Not(a) => pil(a, r),
            Pil::Or(a, b) | Pil::And(a, b) => pil(a, r).and(pil(b, r)),
        }
    }
    fn epil(x: &Epil, r: &InstanceMap) -> Result<()> {
        match x {
            Epil::Pil(p) => pil(p, r),
            Epil::Not(a) => epil(a, r),
            Epil::Bin(_, a, b) => epil(a, r).and(epil(b, r)),
        }
    }
    fn foeil(x: &Foeil, r: &InstanceMap) -> Result<()> {
        match x {
            Foeil::Epil(e) => epil(e, r),
            Foeil::Eq(..) | Foeil::NotEq(..) => Ok(()),
            Foeil::Bin(_, a, b) => foeil(a, r).and(foeil(b, r)),
            Foeil::Quant(_, _, b) => foeil(b, r),
        }
    }
    match w {
        Wfoeil::Const(_) => Ok(()),
        Wfoeil::Foeil(f) => foeil(f, r),
        Wfoeil::HashW(ps) => ps.iter().try_for_each(|p| port(p, r)),
        Wfoeil::Bin(_, a, b) => check_ranges(a, r).and(check_ranges(b, r)),
        Wfoeil::Quant(_, _, b) => check_ranges(b, r),
    }
}

fn conj(parts: Vec<Foeil>) -> Option<Foeil> {
    parts.into_iter().reduce(|a, b| Foeil::bin(Op::And, a, b))
}

fn pil_conj(parts: Vec<Pil>) -> Option<Pil> {
    parts.into_iter().reduce(Pil::and)
}

fn fresh_var(base: &str, ty: usize, taken: &BTreeSet<Var>) -> Var {
    let mut n = 0;
    loop {
        let name = if n == 0 { format!("{base}_{ty}") } else { format!("{base}_{ty}_{n}") };
        let v = Var { name, ty };
        if !taken.contains(&v) {
            return v;
        }
        n += 1;
    }
}

/// Expands `#(…)` (or `#_w(…)` when `weighted`) into plain connectives.
///
/// Ground arguments expand propositionally over all port instances of the
/// instantiation `r`, which is then required. Variable arguments expand to
/// the first-order form: the named atoms, the other ports of each named
/// instance negated, every other instance of the named types disabled by a
/// constrained universal quantifier, and every port of the remaining types
/// disabled. Weighted expansion multiplies in the port weights.
pub fn expand_hash_macro(
    ports: &[PortRef],
    weighted: bool,
    system: &ParametricSystem,
    r: Option<&InstanceMap>,
) -> Result<Wfoeil> {
    if ports.is_empty() {
        return Err(Error::validation("hash macro needs at least one port"));
    }
    check_hash_args(ports).map_err(Error::validation)?;
    let all_ground = ports.iter().all(|p| matches!(p.inst, InstRef::Index(_)));
    let any_ground = ports.iter().any(|p| matches!(p.inst, InstRef::Index(_)));
    let atoms: Vec<Pil> = ports.iter().map(|p| Pil::Atom(p.clone())).collect();
    let logic = if all_ground {
        let r = r.ok_or_else(|| Error::validation("a ground hash macro needs an instance map"))?;
        let named: BTreeSet<(usize, usize, usize)> = ports
            .iter()
            .map(|p| match p.inst {
                InstRef::Index(j) => (p.ty, j, p.port),
                InstRef::Var(_) => unreachable!(),
            })
            .collect();
        let mut parts = if weighted { Vec::new() } else { atoms.clone() };
        for (ty, t) in system.types.iter().enumerate() {
            for j in 1..=r.get(ty) {
                for port in 0..t.ports.len() {
                    if !named.contains(&(ty, j, port)) {
                        parts.push(Pil::Atom(PortRef::ground(ty, port, j)).not());
                    }
                }
            }
        }
        pil_conj(parts).map(Foeil::pil)
    } else if any_ground {
        return Err(Error::validation("hash macro mixes ground ports with variables"));
    } else {
        let mut taken = BTreeSet::new();
        ports.iter().for_each(|p| port_vars(p, &mut taken));
        let mut parts: Vec<Foeil> = Vec::new();
        if !weighted {
            parts.extend(atoms.iter().cloned().map(Foeil::pil));
        }
        let mut negated = Vec::new();
        for p in ports {
            for q in 0..system.types[p.ty].ports.len() {
                let used = ports.iter().any(|o| o.ty == p.ty && o.inst == p.inst && o.port == q);
                if !used {
                    negated.push(Pil::Atom(PortRef { ty: p.ty, port: q, inst: p.inst.clone() }).not());
                }
            }
        }
        parts.extend(pil_conj(negated).map(Foeil::pil));
        let types: BTreeSet<usize> = ports.iter().map(|p| p.ty).collect();
        for &ty in &types {
            let y = fresh_var("y", ty, &taken);
            taken.insert(y.clone());
            let same: Vec<Foeil> = ports
                .iter()
                .filter(|p| p.ty == ty)
                .filter_map(|p| match &p.inst {
                    InstRef::Var(v) => Some(Foeil::Eq(y.clone(), v.clone())),
                    InstRef::Index(_) => None,
                })
                .collect::<Vec<_>>();
            let mut unique: Vec<Foeil> = Vec::new();
            for s in same {
                if !unique.contains(&s) {
                    unique.push(s);
                }
            }
            let guard = unique.into_iter().reduce(|a, b| Foeil::bin(Op::Or, a, b)).expect("type is named");
            let off = (0..system.types[ty].ports.len())
                .map(|q| Pil::Atom(PortRef::var(ty, q, &y)).not())
                .reduce(Pil::and)
                .expect("types have ports");
            parts.push(Foeil::quant(Quant::Forall, &y, Foeil::bin(Op::Or, guard, Foeil::pil(off))));
        }
        for (ty, t) in system.types.iter().enumerate() {
            if types.contains(&ty) {
                continue;
            }
            let x = fresh_var("x", ty, &taken);
            taken.insert(x.clone());
            for q in 0..t.ports.len() {
                parts.push(Foeil::quant(Quant::Forall, &x, Foeil::pil(Pil::Atom(PortRef::var(ty, q, &x)).not())));
            }
        }
        conj(parts)
    };
    if !weighted {
        return Ok(Wfoeil::Foeil(logic.expect("unweighted hash has atoms")));
    }
    let mut factors: Vec<Wfoeil> = ports
        .iter()
        .map(|p| {
            Wfoeil::bin(
                Op::And,
                Wfoeil::Const(system.port_weight(p.ty, p.port).clone()),
                Wfoeil::Foeil(Foeil::pil(Pil::Atom(p.clone()))),
            )
        })
        .collect();
    if let Some(l) = logic {
        factors.push(Wfoeil::Foeil(l));
    }
    Ok(factors.into_iter().reduce(|a, b| Wfoeil::bin(Op::And, a, b)).expect("nonempty"))
}

/// Over the Boolean semiring a weighted formula denotes a language; this is
/// the unweighted formula with the same meaning. Constants become `true` or
/// `false`; weighted macros become unweighted ones (nonzero weights assumed).
pub fn boolean_shadow(w: &Wfoeil, is_zero: &dyn Fn(&Value) -> bool) -> Foeil {
    match w {
        Wfoeil::Const(k) => {
            if is_zero(k) {
                Foeil::pil(Pil::Not(Box::new(Pil::True)))
            } else {
                Foeil::truth()
            }
        }
        Wfoeil::Foeil(f) => f.clone(),
        Wfoeil::HashW(ps) => Foeil::pil(Pil::Hash(ps.clone())),
        Wfoeil::Bin(op, a, b) => Foeil::bin(*op, boolean_shadow(a, is_zero), boolean_shadow(b, is_zero)),
        Wfoeil::Quant(q, v, body) => Foeil::quant(*q, v, boolean_shadow(body, is_zero)),
    }
}

const PREC_QUANT: u8 = 0;
const PREC_ATOM: u8 = 6;

fn op_prec(op: Op) -> u8 {
    match op {
        Op::Or => 1,
        Op::And => 2,
        Op::Concat => 3,
        Op::Shuffle => 4,
    }
}

fn op_token(op: Op, weighted: bool) -> &'static str {
    match (op, weighted) {
        (Op::Or, false) => "|",
        (Op::And, false) => "&",
        (Op::Concat, false) => "*",
        (Op::Shuffle, false) => "~",
        (Op::Or, true) => "(+)",
        (Op::And, true) => "(x)",
        (Op::Concat, true) => "(.)",
        (Op::Shuffle, true) => "(~)",
    }
}

/// Renders formulas in the concrete syntax read by the parser.
pub struct Printer<'a> {
    pub system: &'a ParametricSystem,
}

impl Printer<'_> {
    fn port(&self, p: &PortRef, out: &mut String) {
        let inst = match &p.inst {
            InstRef::Var(v) => v.name.clone(),
            InstRef::Index(j) => j.to_string(),
        };
        let _ = write!(out, "{}({inst})", self.system.port_name(p.ty, p.port));
    }

    fn ports(&self, ps: &[PortRef], out: &mut String) {
        for (i, p) in ps.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            self.port(p, out);
        }
    }

    fn var(&self, v: &Var) -> String {
        let ty = self.system.types.get(v.ty).map_or("?", |t| t.name.as_str());
        format!("{}:{ty}", v.name)
    }

    fn wrap(&self, out: &mut String, parens: bool, body: impl FnOnce(&mut String)) {
        if parens {
            out.push('(');
        }
        body(out);
        if parens {
            out.push(')');
        }
    }

    fn binary(&self, out: &mut String, op: Op, weighted: bool, left: (u8, &dyn Fn(&mut String)), right: (u8, &dyn Fn(&mut String))) {
        let p = op_prec(op);
        self.wrap(out, left.0 < p || left.0 == PREC_QUANT, left.1);
        let _ = write!(out, " {} ", op_token(op, weighted));
        self.wrap(out, right.0 <= p || right.0 == PREC_QUANT, right.1);
    }

    pub fn pil(&self, x: &Pil, out: &mut String) {
        match x {
            Pil::True => out.push_str("true"),
            Pil::Not(inner) if **inner == Pil::True => out.push_str("false"),
            Pil::Atom(p) => self.port(p, out),
            Pil::Hash(ps) => {
                out.push_str("hash(");
                self.ports(ps, out);
                out.push(')');
            }
            Pil::Not(a) => {
                out.push('!');
                self.wrap(out, pil_prec(a) < 5, |o| self.pil(a, o));
            }
            Pil::Or(a, b) | Pil::And(a, b) => {
                let op = if matches!(x, Pil::Or(..)) { Op::Or } else { Op::And };
                self.binary(out, op, false, (pil_prec(a), &|o| self.pil(a, o)), (pil_prec(b), &|o| self.pil(b, o)));
            }
        }
    }

    pub fn epil(&self, x: &Epil, out: &mut String) {
        match x {
            Epil::Pil(p) => self.pil(p, out),
            Epil::Not(a) => {
                out.push('!');
                self.wrap(out, epil_prec(a) < 5, |o| self.epil(a, o));
            }
            Epil::Bin(op, a, b) => {
                self.binary(out, *op, false, (epil_prec(a), &|o| self.epil(a, o)), (epil_prec(b), &|o| self.epil(b, o)))
            }
        }
    }

    pub fn foeil(&self, x: &Foeil, out: &mut String) {
        match x {
            Foeil::Epil(e) => self.epil(e, out),
            Foeil::Eq(a, b) => {
                let _ = write!(out, "{} = {}", self.var(a), self.var(b));
            }
            Foeil::NotEq(a, b) => {
                let _ = write!(out, "{} != {}", self.var(a), self.var(b));
            }
            Foeil::Bin(op, a, b) => self.binary(
                out,
                *op,
                false,
                (foeil_prec(a), &|o| self.foeil(a, o)),
                (foeil_prec(b), &|o| self.foeil(b, o)),
            ),
            Foeil::Quant(q, v, body) => {
                let _ = write!(out, "{} {}. ", q.keyword(false), self.var(v));
                self.foeil(body, out);
            }
        }
    }

    pub fn wfoeil(&self, x: &Wfoeil, out: &mut String) {
        match x {
            Wfoeil::Const(k) => out.push_str(&self.system.semiring.render(k)),
            Wfoeil::Foeil(f) => self.foeil(f, out),
            Wfoeil::HashW(ps) => {
                out.push_str("hashw(");
                self.ports(ps, out);
                out.push(')');
            }
            Wfoeil::Bin(op, a, b) => self.binary(
                out,
                *op,
                true,
                (wfoeil_prec(a), &|o| self.wfoeil(a, o)),
                (wfoeil_prec(b), &|o| self.wfoeil(b, o)),
            ),
            Wfoeil::Quant(q, v, body) => {
                let _ = write!(out, "{} {}. ", q.keyword(true), self.var(v));
                self.wfoeil(body, out);
            }
        }
    }

    pub fn formula(&self, f: &Formula) -> String {
        let mut out = String::new();
        match f {
            Formula::Pil(p) => self.pil(p, &mut out),
            Formula::Epil(e) => self.epil(e, &mut out),
            Formula::Foeil(x) => self.foeil(x, &mut out),
            Formula::Wepil(w) | Formula::Wfoeil(w) => self.wfoeil(w, &mut out),
        }
        out
    }

    pub fn to_text(&self, w: &Wfoeil) -> String {
        let mut out = String::new();
        self.wfoeil(w, &mut out);
        out
    }
}

fn pil_prec(x: &Pil) -> u8 {
    match x {
        Pil::Or(..) => 1,
        Pil::And(..) => 2,
        Pil::Not(inner) if **inner == Pil::True => PREC_ATOM,
        Pil::Not(_) => 5,
        _ => PREC_ATOM,
    }
}

fn epil_prec(x: &Epil) -> u8 {
    match x {
        Epil::Pil(p) => pil_prec(p),
        Epil::Not(_) => 5,
        Epil::Bin(op, ..) => op_prec(*op),
    }
}

fn foeil_prec(x: &Foeil) -> u8 {
    match x {
        Foeil::Epil(e) => epil_prec(e),
        // `x = y` binds looser than the connectives it appears under.
        Foeil::Eq(..) | Foeil::NotEq(..) => PREC_ATOM,
        Foeil::Bin(op, ..) => op_prec(*op),
        Foeil::Quant(..) => PREC_QUANT,
    }
}

fn wfoeil_prec(x: &Wfoeil) -> u8 {
    match x {
        Wfoeil::Const(_) | Wfoeil::HashW(_) => PREC_ATOM,
        Wfoeil::Foeil(f) => foeil_prec(f),
        Wfoeil::Bin(op, ..) => op_prec(*op),
        Wfoeil::Quant(..) => PREC_QUANT,
    }
}
