//! Direct inductive evaluation of satisfaction and of weighted semantics.
//!
//! Subwords are position masks over the input word, so a word may have at
//! most 64 letters. Results are memoized per evaluation on the node, the
//! mask and the values of the node's free variables.
//!
//! Only literal `true` is satisfied by the empty word at the EPIL level;
//! every other EPIL node needs a nonempty word. Equalities and quantifiers
//! are compositional: `x = y` holds on every word when `σ(x) = σ(y)`.

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::logic::{check_ranges, Assignment, Epil, Foeil, Op, Pil, Quant, Var, Wfoeil};
use crate::semiring::{Semiring, Value};
use crate::system::{InstanceMap, Instantiation, Interaction, PortInstance};

/// All interleavings of `w` and `u` with the number of position choices
/// producing each, sorted by word.
pub fn shuffle_words<T: Clone + Ord>(w: &[T], u: &[T]) -> Vec<(Vec<T>, usize)> {
    let n = w.len() + u.len();
    let mut out: BTreeMap<Vec<T>, usize> = BTreeMap::new();
    let mut choose = vec![false; n];
    fn rec<T: Clone + Ord>(
        pos: usize,
        left: usize,
        w: &[T],
        u: &[T],
        choose: &mut Vec<bool>,
        out: &mut BTreeMap<Vec<T>, usize>,
    ) {
        if pos == choose.len() {
            if left == 0 {
                let (mut i, mut k) = (0, 0);
                let word = choose
                    .iter()
                    .map(|&c| {
                        if c {
                            i += 1;
                            w[i - 1].clone()
                        } else {
                            k += 1;
                            u[k - 1].clone()
                        }
                    })
                    .collect();
                *out.entry(word).or_default() += 1;
            }
            return;
        }
        let remaining = choose.len() - pos;
        if left > 0 {
            choose[pos] = true;
            rec(pos + 1, left - 1, w, u, choose, out);
        }
        if remaining > left {
            choose[pos] = false;
            rec(pos + 1, left, w, u, choose, out);
        }
    }
    rec(0, w.len(), w, u, &mut choose, &mut out);
    out.into_iter().collect()
}

fn resolve_set(ports: &[crate::logic::PortRef], sigma: &Assignment) -> Result<Vec<PortInstance>> {
    let mut set = ports.iter().map(|p| p.resolve(sigma)).collect::<Result<Vec<_>>>()?;
    set.sort();
    set.dedup();
    Ok(set)
}

/// `a ⊨ φ` for a PIL formula under `σ`.
pub fn pil_satisfies_with(a: &Interaction, phi: &Pil, sigma: &Assignment) -> Result<bool> {
    Ok(match phi {
        Pil::True => true,
        Pil::Atom(p) => a.contains(&p.resolve(sigma)?),
        Pil::Hash(ps) => resolve_set(ps, sigma)? == a.ports(),
        Pil::Not(x) => !pil_satisfies_with(a, x, sigma)?,
        Pil::Or(x, y) => pil_satisfies_with(a, x, sigma)? || pil_satisfies_with(a, y, sigma)?,
        Pil::And(x, y) => pil_satisfies_with(a, x, sigma)? && pil_satisfies_with(a, y, sigma)?,
    })
}

/// `a ⊨ φ` for a ground PIL formula.
pub fn pil_satisfies(a: &Interaction, phi: &Pil) -> Result<bool> {
    pil_satisfies_with(a, phi, &Assignment::new())
}

trait Alg {
    type V: Clone;
    fn zero(&self) -> Self::V;
    fn one(&self) -> Self::V;
    fn add(&self, a: Self::V, b: &Self::V) -> Self::V;
    fn mul(&self, a: &Self::V, b: &Self::V) -> Self::V;
    fn is_zero(&self, v: &Self::V) -> bool;
    /// Whether further summands cannot change `v`.
    fn saturated(&self, _v: &Self::V) -> bool {
        false
    }
    fn unit(&self, b: bool) -> Self::V {
        if b {
            self.one()
        } else {
            self.zero()
        }
    }
}

struct BoolAlg;

impl Alg for BoolAlg {
    type V = bool;
    fn zero(&self) -> bool {
        false
    }
    fn one(&self) -> bool {
        true
    }
    fn add(&self, a: bool, b: &bool) -> bool {
        a || *b
    }
    fn mul(&self, a: &bool, b: &bool) -> bool {
        *a && *b
    }
    fn is_zero(&self, v: &bool) -> bool {
        !v
    }
    fn saturated(&self, v: &bool) -> bool {
        *v
    }
}

struct SemAlg(Semiring);

impl Alg for SemAlg {
    type V = Value;
    fn zero(&self) -> Value {
        self.0.zero()
    }
    fn one(&self) -> Value {
        self.0.one()
    }
    fn add(&self, a: Value, b: &Value) -> Value {
        self.0.add(&a, b)
    }
    fn mul(&self, a: &Value, b: &Value) -> Value {
        self.0.mul(a, b)
    }
    fn is_zero(&self, v: &Value) -> bool {
        self.0.is_zero(v)
    }
}

/// Candidate first parts of `m`: its prefixes for concatenation, its
/// submasks in increasing order for shuffle.
fn first_parts(m: u64, shuffle: bool) -> Vec<u64> {
    let mut out = Vec::new();
    if shuffle {
        let mut s = 0u64;
        loop {
            out.push(s);
            if s == m {
                break;
            }
            s = (s.wrapping_sub(m)) & m;
        }
    } else {
        let mut prefix = 0u64;
        out.push(0);
        let mut rest = m;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            prefix |= bit;
            rest ^= bit;
            out.push(prefix);
        }
    }
    out
}

type PartFn<'f, V> = dyn FnMut(usize, u64) -> Result<V> + 'f;

/// `Σ_{m = P_1 … P_r} Π_j f(j, P_j)`, with the parts consecutive or interleaved.
fn chain_all<A: Alg>(alg: &A, r: usize, m: u64, shuffle: bool, f: &mut PartFn<A::V>) -> Result<A::V> {
    fn rec<A: Alg>(
        alg: &A,
        j: usize,
        r: usize,
        m: u64,
        shuffle: bool,
        f: &mut PartFn<A::V>,
        memo: &mut HashMap<(usize, u64), A::V>,
    ) -> Result<A::V> {
        if j > r {
            return Ok(alg.unit(m == 0));
        }
        if let Some(v) = memo.get(&(j, m)) {
            return Ok(v.clone());
        }
        let mut acc = alg.zero();
        for p in first_parts(m, shuffle) {
            let fp = f(j, p)?;
            if alg.is_zero(&fp) {
                continue;
            }
            let rest = rec(alg, j + 1, r, m ^ p, shuffle, f, memo)?;
            acc = alg.add(acc, &alg.mul(&fp, &rest));
            if alg.saturated(&acc) {
                break;
            }
        }
        memo.insert((j, m), acc.clone());
        Ok(acc)
    }
    rec(alg, 1, r, m, shuffle, f, &mut HashMap::new())
}

/// The same sum taken over every nonempty set `J ⊆ [r]` of indices in
/// increasing order, splitting `m` into `|J|` parts.
fn chain_some<A: Alg>(alg: &A, r: usize, m: u64, shuffle: bool, f: &mut PartFn<A::V>) -> Result<A::V> {
    // n(j, m): nonempty index sets within j..=r; e(j, m) = [m = 0] + n(j, m).
    fn n<A: Alg>(
        alg: &A,
        j: usize,
        r: usize,
        m: u64,
        shuffle: bool,
        f: &mut PartFn<A::V>,
        memo: &mut HashMap<(usize, u64), A::V>,
    ) -> Result<A::V> {
        if j > r {
            return Ok(alg.zero());
        }
        if let Some(v) = memo.get(&(j, m)) {
            return Ok(v.clone());
        }
        let mut acc = n(alg, j + 1, r, m, shuffle, f, memo)?;
        if !alg.saturated(&acc) {
            for p in first_parts(m, shuffle) {
                let fp = f(j, p)?;
                if alg.is_zero(&fp) {
                    continue;
                }
                let rest = m ^ p;
                let tail = n(alg, j + 1, r, rest, shuffle, f, memo)?;
                let e = alg.add(alg.unit(rest == 0), &tail);
                acc = alg.add(acc, &alg.mul(&fp, &e));
                if alg.saturated(&acc) {
                    break;
                }
            }
        }
        memo.insert((j, m), acc.clone());
        Ok(acc)
    }
    n(alg, 1, r, m, shuffle, f, &mut HashMap::new())
}

type Key = (u8, usize, u64, Vec<usize>);

struct Ctx<'a> {
    view: &'a Instantiation,
    word: &'a [Interaction],
    r: &'a InstanceMap,
    semiring: Semiring,
    free: HashMap<(u8, usize), Rc<[Var]>>,
    bool_memo: HashMap<Key, bool>,
    value_memo: HashMap<Key, Value>,
}

const TAG_EPIL: u8 = 0;
const TAG_FOEIL: u8 = 1;
const TAG_WFOEIL: u8 = 2;

impl<'a> Ctx<'a> {
    fn new(view: &'a Instantiation, word: &'a [Interaction]) -> Result<Ctx<'a>> {
        if word.len() > 64 {
            return Err(Error::Resource(format!("words are limited to 64 letters, got {}", word.len())));
        }
        Ok(Ctx {
            view,
            word,
            r: &view.r,
            semiring: view.semiring(),
            free: HashMap::new(),
            bool_memo: HashMap::new(),
            value_memo: HashMap::new(),
        })
    }

    fn full(&self) -> u64 {
        if self.word.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.word.len()) - 1
        }
    }

    fn key(&mut self, tag: u8, ptr: usize, m: u64, sigma: &Assignment, collect: impl FnOnce() -> Vec<Var>) -> Key {
        let vars = self.free.entry((tag, ptr)).or_insert_with(|| collect().into()).clone();
        let values = vars.iter().map(|v| sigma.get(v).unwrap_or(0)).collect();
        (tag, ptr, m, values)
    }

    fn letter(&self, m: u64) -> Option<&'a Interaction> {
        (m.count_ones() == 1).then(|| &self.word[m.trailing_zeros() as usize])
    }

    fn epil(&mut self, e: &Epil, sigma: &Assignment, m: u64) -> Result<bool> {
        match e {
            Epil::Pil(Pil::True) => return Ok(true),
            Epil::Pil(p) => {
                return match self.letter(m) {
                    Some(a) => pil_satisfies_with(a, p, sigma),
                    None => Ok(false),
                }
            }
            _ if m == 0 => return Ok(false),
            _ => {}
        }
        let key = self.key(TAG_EPIL, e as *const Epil as usize, m, sigma, || {
            let mut s = Default::default();
            e.collect_free(&mut s);
            s.into_iter().collect()
        });
        if let Some(&v) = self.bool_memo.get(&key) {
            return Ok(v);
        }
        let v = match e {
            Epil::Pil(_) => unreachable!(),
            Epil::Not(z) => !self.epil(z, sigma, m)?,
            Epil::Bin(Op::Or, a, b) => self.epil(a, sigma, m)? || self.epil(b, sigma, m)?,
            Epil::Bin(Op::And, a, b) => self.epil(a, sigma, m)? && self.epil(b, sigma, m)?,
            Epil::Bin(op, a, b) => {
                let mut found = false;
                for p in first_parts(m, *op == Op::Shuffle) {
                    if self.epil(a, sigma, p)? && self.epil(b, sigma, m ^ p)? {
                        found = true;
                        break;
                    }
                }
                found
            }
        };
        self.bool_memo.insert(key, v);
        Ok(v)
    }

    fn var(&self, v: &Var, sigma: &Assignment) -> Result<usize> {
        sigma.get(v).ok_or_else(|| Error::Eval(format!("unbound variable `{}`", v.name)))
    }

    fn foeil(&mut self, f: &Foeil, sigma: &Assignment, m: u64) -> Result<bool> {
        match f {
            Foeil::Epil(e) => return self.epil(e, sigma, m),
            Foeil::Eq(x, y) => return Ok(self.var(x, sigma)? == self.var(y, sigma)?),
            Foeil::NotEq(x, y) => return Ok(self.var(x, sigma)? != self.var(y, sigma)?),
            _ => {}
        }
        let key = self.key(TAG_FOEIL, f as *const Foeil as usize, m, sigma, || {
            let mut s = Default::default();
            f.collect_free(&mut s);
            s.into_iter().collect()
        });
        if let Some(&v) = self.bool_memo.get(&key) {
            return Ok(v);
        }
        let v = match f {
            Foeil::Bin(Op::Or, a, b) => self.foeil(a, sigma, m)? || self.foeil(b, sigma, m)?,
            Foeil::Bin(Op::And, a, b) => self.foeil(a, sigma, m)? && self.foeil(b, sigma, m)?,
            Foeil::Bin(op, a, b) => {
                let mut found = false;
                for p in first_parts(m, *op == Op::Shuffle) {
                    if self.foeil(a, sigma, p)? && self.foeil(b, sigma, m ^ p)? {
                        found = true;
                        break;
                    }
                }
                found
            }
            Foeil::Quant(q, x, body) => {
                let r = self.r.get(x.ty);
                match q {
                    Quant::Exists => {
                        let mut any = false;
                        for j in 1..=r {
                            if self.foeil(body, &sigma.with(x, j), m)? {
                                any = true;
                                break;
                            }
                        }
                        any
                    }
                    Quant::Forall => {
                        let mut all = true;
                        for j in 1..=r {
                            if !self.foeil(body, &sigma.with(x, j), m)? {
                                all = false;
                                break;
                            }
                        }
                        all
                    }
                    _ => {
                        let shuffle = matches!(q, Quant::ExistsS | Quant::ForallS);
                        let mut part = |j: usize, p: u64| self.foeil(body, &sigma.with(x, j), p);
                        if q.is_universal() {
                            chain_all(&BoolAlg, r, m, shuffle, &mut part)?
                        } else {
                            chain_some(&BoolAlg, r, m, shuffle, &mut part)?
                        }
                    }
                }
            }
            _ => unreachable!(),
        };
        self.bool_memo.insert(key, v);
        Ok(v)
    }

    fn wfoeil(&mut self, w: &Wfoeil, sigma: &Assignment, m: u64) -> Result<Value> {
        let k = self.semiring;
        match w {
            Wfoeil::Const(c) => return Ok(c.clone()),
            Wfoeil::Foeil(f) => return Ok(if self.foeil(f, sigma, m)? { k.one() } else { k.zero() }),
            _ => {}
        }
        let key = self.key(TAG_WFOEIL, w as *const Wfoeil as usize, m, sigma, || {
            let mut s = Default::default();
            w.collect_free(&mut s);
            s.into_iter().collect()
        });
        if let Some(v) = self.value_memo.get(&key) {
            return Ok(v.clone());
        }
        let v = match w {
            Wfoeil::HashW(ps) => match self.letter(m) {
                Some(a) if resolve_set(ps, sigma)? == a.ports() => {
                    let mut v = k.one();
                    for p in ps {
                        let p = p.resolve(sigma)?;
                        v = k.mul(&v, &self.weight(p));
                    }
                    v
                }
                _ => k.zero(),
            },
            Wfoeil::Bin(Op::Or, a, b) => {
                let x = self.wfoeil(a, sigma, m)?;
                k.add(&x, &self.wfoeil(b, sigma, m)?)
            }
            Wfoeil::Bin(Op::And, a, b) => {
                let x = self.wfoeil(a, sigma, m)?;
                if k.is_zero(&x) {
                    x
                } else {
                    k.mul(&x, &self.wfoeil(b, sigma, m)?)
                }
            }
            Wfoeil::Bin(op, a, b) => {
                let mut acc = k.zero();
                for p in first_parts(m, *op == Op::Shuffle) {
                    let x = self.wfoeil(a, sigma, p)?;
                    if k.is_zero(&x) {
                        continue;
                    }
                    let y = self.wfoeil(b, sigma, m ^ p)?;
                    acc = k.add(&acc, &k.mul(&x, &y));
                }
                acc
            }
            Wfoeil::Quant(q, x, body) => {
                let r = self.r.get(x.ty);
                match q {
                    Quant::Exists => {
                        let mut acc = k.zero();
                        for j in 1..=r {
                            acc = k.add(&acc, &self.wfoeil(body, &sigma.with(x, j), m)?);
                        }
                        acc
                    }
                    Quant::Forall => {
                        let mut acc = k.one();
                        for j in 1..=r {
                            acc = k.mul(&acc, &self.wfoeil(body, &sigma.with(x, j), m)?);
                            if k.is_zero(&acc) {
                                break;
                            }
                        }
                        acc
                    }
                    _ => {
                        let shuffle = matches!(q, Quant::ExistsS | Quant::ForallS);
                        let alg = SemAlg(k);
                        let mut part = |j: usize, p: u64| self.wfoeil(body, &sigma.with(x, j), p);
                        if q.is_universal() {
                            chain_all(&alg, r, m, shuffle, &mut part)?
                        } else {
                            chain_some(&alg, r, m, shuffle, &mut part)?
                        }
                    }
                }
            }
            Wfoeil::Const(_) | Wfoeil::Foeil(_) => unreachable!(),
        };
        self.value_memo.insert(key, v.clone());
        Ok(v)
    }

    fn weight(&self, p: PortInstance) -> Value {
        self.view.system.port_weight(p.ty, p.port).clone()
    }
}

/// Checks the context of an evaluation: ranges, σ and the free variables.
pub(crate) fn prepare(view: &Instantiation, sigma: &Assignment, w: &Wfoeil) -> Result<()> {
    check_ranges(w, &view.r)?;
    sigma.check(&view.r)?;
    let mut free = Default::default();
    w.collect_free(&mut free);
    let missing: Vec<String> = free
        .iter()
        .filter(|v: &&Var| sigma.get(v).is_none())
        .map(|v| format!("{}:{}", v.name, view.system.types.get(v.ty).map_or("?", |t| t.name.as_str())))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Eval(format!("free variables without a value: {}", missing.join(", "))));
    }
    Ok(())
}

/// `(r, σ, w) ⊨ ψ`.
pub fn foeil_satisfies(view: &Instantiation, sigma: &Assignment, w: &[Interaction], psi: &Foeil) -> Result<bool> {
    let wrapped = Wfoeil::Foeil(psi.clone());
    prepare(view, sigma, &wrapped)?;
    let mut ctx = Ctx::new(view, w)?;
    let m = ctx.full();
    let Wfoeil::Foeil(f) = &wrapped else { unreachable!() };
    ctx.foeil(f, sigma, m)
}

/// `w ⊨ φ` for a ground EPIL formula.
pub fn epil_satisfies(view: &Instantiation, w: &[Interaction], phi: &Epil) -> Result<bool> {
    foeil_satisfies(view, &Assignment::new(), w, &Foeil::Epil(phi.clone()))
}

/// `‖ψ̃‖(r, σ, w)`.
pub fn wfoeil_eval(view: &Instantiation, sigma: &Assignment, w: &[Interaction], psi: &Wfoeil) -> Result<Value> {
    prepare(view, sigma, psi)?;
    let mut ctx = Ctx::new(view, w)?;
    let m = ctx.full();
    ctx.wfoeil(psi, sigma, m)
}

/// `‖φ̃‖(w)` for a ground wEPIL formula.
pub fn wepil_eval(view: &Instantiation, w: &[Interaction], phi: &Wfoeil) -> Result<Value> {
    wfoeil_eval(view, &Assignment::new(), w, phi)
}
