//! Translation of FOEIL formulas into finite automata and of wFOEIL
//! formulas into weighted automata, for a fixed instance map.
//!
//! Every subformula is translated under a concrete assignment of its free
//! variables, so bound variables never clash and no renaming is needed.
//! Results are memoized on the node and the values of its free variables.
//!
//! FOEIL automata read letter classes. The letters of one class agree on
//! every port instance that an atom of the formula can name, and each letter
//! that some `#` subformula could denote is a class of its own.
//! Weighted automata read letters and carry sparse transitions; a FOEIL
//! factor under `⊗` restricts its weighted co-factors through class lookup
//! instead of being expanded over the whole alphabet.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use rayon::prelude::*;

use crate::automata::{ClassMap, Dfa, Nfa};
use crate::error::{Error, Result};
use crate::logic::{Assignment, Epil, Foeil, Op, Pil, PortRef, Printer, Quant, Var, Wfoeil};
use crate::semantics::{pil_satisfies_with, prepare};
use crate::semiring::Semiring;
use crate::system::{Alphabet, Instantiation, Interaction, PortInstance};
use crate::wfa::Wfa;

/// Default cap on the states of any intermediate automaton.
pub const DEFAULT_BUDGET: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TranslateOptions {
    /// Largest number of states an intermediate automaton may have.
    pub budget: usize,
    /// Worker threads for the bodies of the outermost quantifier.
    pub jobs: usize,
}

impl Default for TranslateOptions {
    fn default() -> Self {
        TranslateOptions { budget: DEFAULT_BUDGET, jobs: 1 }
    }
}

type Key = (u8, usize, Vec<usize>);

const TAG_EPIL: u8 = 0;
const TAG_FOEIL: u8 = 1;
const TAG_WFOEIL: u8 = 2;

fn ptr<T>(x: &T) -> usize {
    x as *const T as usize
}

#[derive(Clone)]
struct Translator<'a> {
    view: &'a Instantiation,
    alphabet: &'a Alphabet,
    k: Semiring,
    opts: TranslateOptions,
    free: HashMap<(u8, usize), Arc<[Var]>>,
    classes: HashMap<usize, Arc<ClassMap>>,
    dfas: HashMap<Key, Arc<Dfa>>,
    wfas: HashMap<Key, Arc<Wfa>>,
}

/// Port types named by atoms and the argument types of each `#`.
#[derive(Default)]
struct Vocabulary {
    atoms: BTreeSet<(usize, usize)>,
    hashes: Vec<BTreeSet<(usize, usize)>>,
    hash_sizes: Vec<usize>,
}

impl Vocabulary {
    fn pil(&mut self, p: &Pil) {
        match p {
            Pil::True => {}
            Pil::Atom(r) => {
                self.atoms.insert((r.ty, r.port));
            }
            Pil::Hash(ps) => {
                self.hashes.push(ps.iter().map(|r| (r.ty, r.port)).collect());
                self.hash_sizes.push(ps.len());
            }
            Pil::Not(x) => self.pil(x),
            Pil::Or(a, b) | Pil::And(a, b) => {
                self.pil(a);
                self.pil(b);
            }
        }
    }

    fn epil(&mut self, e: &Epil) {
        match e {
            Epil::Pil(p) => self.pil(p),
            Epil::Not(x) => self.epil(x),
            Epil::Bin(_, a, b) => {
                self.epil(a);
                self.epil(b);
            }
        }
    }

    fn foeil(&mut self, f: &Foeil) {
        match f {
            Foeil::Epil(e) => self.epil(e),
            Foeil::Eq(..) | Foeil::NotEq(..) => {}
            Foeil::Bin(_, a, b) => {
                self.foeil(a);
                self.foeil(b);
            }
            Foeil::Quant(_, _, b) => self.foeil(b),
        }
    }
}

fn flatten_and<'w>(w: &'w Wfoeil, out: &mut Vec<&'w Wfoeil>) {
    match w {
        Wfoeil::Bin(Op::And, a, b) => {
            flatten_and(a, out);
            flatten_and(b, out);
        }
        _ => out.push(w),
    }
}

impl<'a> Translator<'a> {
    fn new(view: &'a Instantiation, alphabet: &'a Alphabet, opts: TranslateOptions) -> Translator<'a> {
        Translator {
            view,
            alphabet,
            k: view.semiring(),
            opts,
            free: HashMap::new(),
            classes: HashMap::new(),
            dfas: HashMap::new(),
            wfas: HashMap::new(),
        }
    }

    fn key(&mut self, tag: u8, p: usize, sigma: &Assignment, collect: impl FnOnce(&mut BTreeSet<Var>)) -> Key {
        let vars = self
            .free
            .entry((tag, p))
            .or_insert_with(|| {
                let mut s = BTreeSet::new();
                collect(&mut s);
                s.into_iter().collect::<Vec<_>>().into()
            })
            .clone();
        (tag, p, vars.iter().map(|v| sigma.get(v).unwrap_or(0)).collect())
    }

    fn locate(&self, err: Error, print: impl FnOnce(&Printer, &mut String)) -> Error {
        match err {
            Error::Resource(m) if !m.contains(" in subformula ") => {
                let mut s = String::new();
                print(&Printer { system: &self.view.system }, &mut s);
                Error::Resource(format!("{m} in subformula `{s}`"))
            }
            e => e,
        }
    }

    fn check(&self, a: Wfa) -> Result<Wfa> {
        if a.states() > self.opts.budget {
            return Err(Error::Resource(format!("weighted automaton needs more than {} states", self.opts.budget)));
        }
        Ok(a)
    }

    /// The class map shared by the FOEIL formulas `roots`, cached under `id`.
    fn class_map(&mut self, id: usize, roots: &[&Foeil]) -> Arc<ClassMap> {
        if let Some(c) = self.classes.get(&id) {
            return c.clone();
        }
        let mut voc = Vocabulary::default();
        roots.iter().for_each(|f| voc.foeil(f));
        let watched: Vec<PortInstance> = voc
            .atoms
            .iter()
            .flat_map(|&(ty, port)| (1..=self.view.r.get(ty)).map(move |instance| PortInstance { ty, instance, port }))
            .collect();
        let target = |a: &Interaction| {
            voc.hashes.iter().zip(&voc.hash_sizes).any(|(h, &n)| {
                a.ports().len() <= n && a.ports().iter().all(|p| h.contains(&(p.ty, p.port)))
            })
        };
        let map = ClassMap::from_signatures(self.alphabet.letters().iter().enumerate().map(|(i, a)| {
            let bits: Vec<bool> = watched.iter().map(|p| a.contains(p)).collect();
            (bits, target(a).then_some(i))
        }));
        let map = Arc::new(map);
        self.classes.insert(id, map.clone());
        map
    }

    fn pil_letters(&self, p: &Pil, sigma: &Assignment, c: &Arc<ClassMap>) -> Result<Dfa> {
        let marks = c
            .representatives()
            .iter()
            .map(|&a| pil_satisfies_with(self.alphabet.letter(a), p, sigma))
            .collect::<Result<Vec<bool>>>()?;
        Ok(Dfa::letters(c.clone(), &marks).minimize())
    }

    fn epil(&mut self, e: &Epil, sigma: &Assignment, c: &Arc<ClassMap>) -> Result<Arc<Dfa>> {
        let key = self.key(TAG_EPIL, ptr(e), sigma, |s| e.collect_free(s));
        if let Some(d) = self.dfas.get(&key) {
            return Ok(d.clone());
        }
        let d = self.epil_uncached(e, sigma, c).map_err(|err| self.locate(err, |p, s| p.epil(e, s)))?;
        let d = Arc::new(d);
        self.dfas.insert(key, d.clone());
        Ok(d)
    }

    fn epil_uncached(&mut self, e: &Epil, sigma: &Assignment, c: &Arc<ClassMap>) -> Result<Dfa> {
        let limit = self.opts.budget;
        Ok(match e {
            Epil::Pil(Pil::True) => Dfa::constant(c.clone(), true),
            Epil::Pil(p) => self.pil_letters(p, sigma, c)?,
            Epil::Not(z) => self.epil(z, sigma, c)?.complement().without_empty(limit)?,
            Epil::Bin(op, a, b) => {
                let a = self.epil(a, sigma, c)?;
                let b = self.epil(b, sigma, c)?;
                combine(*op, &a, &b, limit)?.without_empty(limit)?
            }
        })
    }

    fn foeil(&mut self, f: &Foeil, sigma: &Assignment, c: &Arc<ClassMap>) -> Result<Arc<Dfa>> {
        if let Foeil::Epil(e) = f {
            return self.epil(e, sigma, c);
        }
        let key = self.key(TAG_FOEIL, ptr(f), sigma, |s| f.collect_free(s));
        if let Some(d) = self.dfas.get(&key) {
            return Ok(d.clone());
        }
        let d = self.foeil_uncached(f, sigma, c).map_err(|err| self.locate(err, |p, s| p.foeil(f, s)))?;
        let d = Arc::new(d);
        self.dfas.insert(key, d.clone());
        Ok(d)
    }

    fn var(&self, v: &Var, sigma: &Assignment) -> Result<usize> {
        sigma.get(v).ok_or_else(|| Error::Eval(format!("unbound variable `{}`", v.name)))
    }

    fn foeil_uncached(&mut self, f: &Foeil, sigma: &Assignment, c: &Arc<ClassMap>) -> Result<Dfa> {
        let limit = self.opts.budget;
        Ok(match f {
            Foeil::Epil(_) => unreachable!(),
            Foeil::Eq(x, y) => Dfa::constant(c.clone(), self.var(x, sigma)? == self.var(y, sigma)?),
            Foeil::NotEq(x, y) => Dfa::constant(c.clone(), self.var(x, sigma)? != self.var(y, sigma)?),
            Foeil::Bin(op, a, b) => {
                let a = self.foeil(a, sigma, c)?;
                let b = self.foeil(b, sigma, c)?;
                combine(*op, &a, &b, limit)?
            }
            Foeil::Quant(q, x, body) => {
                let r = self.view.r.get(x.ty);
                let parts =
                    (1..=r).map(|j| self.foeil(body, &sigma.with(x, j), c)).collect::<Result<Vec<Arc<Dfa>>>>()?;
                let op = match q {
                    Quant::Exists => Op::Or,
                    Quant::Forall => Op::And,
                    Quant::ExistsC | Quant::ForallC => Op::Concat,
                    Quant::ExistsS | Quant::ForallS => Op::Shuffle,
                };
                if matches!(q, Quant::ExistsC | Quant::ExistsS) {
                    // T_j = L_j · (ε ∪ T_{j+1}) ∪ T_{j+1}
                    let mut t = (*parts[r - 1]).clone();
                    for l in parts[..r - 1].iter().rev() {
                        t = combine(op, l, &t.with_empty(limit)?, limit)?.union(&t, limit)?;
                    }
                    t
                } else {
                    let mut t = (*parts[0]).clone();
                    for l in &parts[1..] {
                        t = combine(op, &t, l, limit)?;
                    }
                    t
                }
            }
        })
    }

    fn wfoeil(&mut self, w: &Wfoeil, sigma: &Assignment) -> Result<Arc<Wfa>> {
        let key = self.key(TAG_WFOEIL, ptr(w), sigma, |s| w.collect_free(s));
        if let Some(a) = self.wfas.get(&key) {
            return Ok(a.clone());
        }
        let a = self.wfoeil_uncached(w, sigma).and_then(|a| self.check(a));
        let a = a.map_err(|err| self.locate(err, |p, s| p.wfoeil(w, s)))?;
        let a = Arc::new(a);
        self.wfas.insert(key, a.clone());
        Ok(a)
    }

    fn hash_letter(&self, ps: &[PortRef], sigma: &Assignment) -> Result<Wfa> {
        let k = self.k;
        let n = self.alphabet.len();
        let ports = ps.iter().map(|p| p.resolve(sigma)).collect::<Result<Vec<_>>>()?;
        let letter = Interaction::new(ports.clone()).ok().and_then(|a| self.alphabet.index_of(&a));
        let weight = k.product(ports.iter().map(|p| self.view.system.port_weight(p.ty, p.port).clone()).collect::<Vec<_>>().iter());
        let Some(l) = letter.filter(|_| !k.is_zero(&weight)) else {
            return Ok(Wfa::empty(k, n, 0));
        };
        let mut a = Wfa::empty(k, n, 2);
        a.initial[0] = k.one();
        a.terminal[1] = k.one();
        a.delta[0] = vec![(l, 1, weight)];
        Ok(a)
    }

    fn bodies(&mut self, body: &Wfoeil, x: &Var, sigma: &Assignment) -> Result<Vec<Arc<Wfa>>> {
        let r = self.view.r.get(x.ty);
        if self.opts.jobs > 1 && r > 1 {
            let mut child = self.clone();
            child.opts.jobs = 1;
            return (1..=r)
                .into_par_iter()
                .map(|j| child.clone().wfoeil(body, &sigma.with(x, j)))
                .collect::<Result<Vec<_>>>();
        }
        (1..=r).map(|j| self.wfoeil(body, &sigma.with(x, j))).collect()
    }

    fn weighted(&self, op: Op, a: &Wfa, b: &Wfa) -> Result<Wfa> {
        let limit = self.opts.budget;
        Ok(match op {
            Op::Or => a.sum(b)?,
            Op::And => a.hadamard_accessible(b, limit)?.trim(),
            Op::Concat => a.cauchy(b)?.trim(),
            Op::Shuffle => a.shuffle_accessible(b, limit)?.trim(),
        })
    }

    fn wfoeil_uncached(&mut self, w: &Wfoeil, sigma: &Assignment) -> Result<Wfa> {
        let k = self.k;
        let n = self.alphabet.len();
        match w {
            Wfoeil::Const(c) => Ok(Wfa::constant(k, n, c.clone())),
            Wfoeil::Foeil(f) => {
                let c = self.class_map(ptr(w), &[f]);
                let d = self.foeil(f, sigma, &c)?;
                self.check(Wfa::from_dfa(&d, k))
            }
            Wfoeil::HashW(ps) => self.hash_letter(ps, sigma),
            Wfoeil::Bin(Op::And, _, _) => self.tensor(w, sigma),
            Wfoeil::Bin(op, a, b) => {
                let a = self.wfoeil(a, sigma)?;
                let b = self.wfoeil(b, sigma)?;
                self.weighted(*op, &a, &b)
            }
            Wfoeil::Quant(q, x, body) => {
                let parts = self.bodies(body, x, sigma)?;
                let r = parts.len();
                let op = match q {
                    Quant::Exists => Op::Or,
                    Quant::Forall => Op::And,
                    Quant::ExistsC | Quant::ForallC => Op::Concat,
                    Quant::ExistsS | Quant::ForallS => Op::Shuffle,
                };
                if matches!(q, Quant::ExistsC | Quant::ExistsS) {
                    let mut eps = Wfa::empty(k, n, 1);
                    eps.initial[0] = k.one();
                    eps.terminal[0] = k.one();
                    let mut t = (*parts[r - 1]).clone();
                    for l in parts[..r - 1].iter().rev() {
                        let tail = self.check(eps.sum(&t)?)?;
                        let head = self.check(self.weighted(op, l, &tail)?)?;
                        t = self.check(head.sum(&t)?)?;
                    }
                    Ok(t)
                } else {
                    let mut t = (*parts[0]).clone();
                    for l in &parts[1..] {
                        t = self.check(self.weighted(op, &t, l)?)?;
                    }
                    Ok(t)
                }
            }
        }
    }

    /// A `⊗`-product: constants scale, FOEIL factors restrict, and the
    /// remaining factors are multiplied pointwise.
    fn tensor(&mut self, w: &Wfoeil, sigma: &Assignment) -> Result<Wfa> {
        let k = self.k;
        let n = self.alphabet.len();
        let mut factors = Vec::new();
        flatten_and(w, &mut factors);
        let mut scale = k.one();
        let mut logic: Vec<&Foeil> = Vec::new();
        let mut weighted: Vec<&Wfoeil> = Vec::new();
        for f in &factors {
            match f {
                Wfoeil::Const(c) => scale = k.mul(&scale, c),
                Wfoeil::Foeil(f) => logic.push(f),
                other => weighted.push(other),
            }
        }
        if k.is_zero(&scale) {
            return Ok(Wfa::empty(k, n, 0));
        }
        let dfa = if logic.is_empty() {
            None
        } else {
            let c = self.class_map(ptr(w), &logic);
            let mut d = (*self.foeil(logic[0], sigma, &c)?).clone();
            for f in &logic[1..] {
                d = d.intersect(&*self.foeil(f, sigma, &c)?, self.opts.budget)?;
            }
            Some(d)
        };
        let mut acc: Option<Wfa> = None;
        for f in weighted {
            let a = self.wfoeil(f, sigma)?;
            acc = Some(match acc {
                None => (*a).clone(),
                Some(b) => self.weighted(Op::And, &b, &a)?,
            });
            if acc.as_ref().is_some_and(|a| a.states() == 0) {
                return Ok(Wfa::empty(k, n, 0));
            }
        }
        let out = match (acc, dfa) {
            (Some(a), Some(d)) => a.restrict(&d, self.opts.budget)?.trim(),
            (Some(a), None) => a,
            (None, Some(d)) => Wfa::from_dfa(&d, k),
            (None, None) => Wfa::constant(k, n, k.one()),
        };
        Ok(out.scale(&scale))
    }
}

fn combine(op: Op, a: &Dfa, b: &Dfa, limit: usize) -> Result<Dfa> {
    match op {
        Op::Or => a.union(b, limit),
        Op::And => a.intersect(b, limit),
        Op::Concat => a.concat(b, limit),
        Op::Shuffle => a.shuffle(b, limit),
    }
}

/// A complete deterministic automaton over letter classes accepting
/// `{w : (r, σ, w) ⊨ ψ}`.
pub fn translate_foeil_dfa(
    view: &Instantiation,
    alphabet: &Alphabet,
    sigma: &Assignment,
    psi: &Foeil,
    budget: usize,
) -> Result<Dfa> {
    let wrapped = Wfoeil::Foeil(psi.clone());
    prepare(view, sigma, &wrapped)?;
    let Wfoeil::Foeil(f) = &wrapped else { unreachable!() };
    let mut t = Translator::new(view, alphabet, TranslateOptions { budget, jobs: 1 });
    let c = t.class_map(ptr(f), &[f]);
    Ok((*t.foeil(f, sigma, &c)?).clone())
}

/// An automaton accepting `{w : (r, σ, w) ⊨ ψ}`.
pub fn translate_foeil(
    view: &Instantiation,
    alphabet: &Alphabet,
    sigma: &Assignment,
    psi: &Foeil,
    budget: usize,
) -> Result<Nfa> {
    Ok(translate_foeil_dfa(view, alphabet, sigma, psi, budget)?.to_nfa())
}

/// A weighted automaton with `‖A‖(w) = ‖ψ̃‖(r, σ, w)` for every word over
/// `alphabet`.
pub fn translate_wfoeil(
    view: &Instantiation,
    alphabet: &Alphabet,
    sigma: &Assignment,
    psi: &Wfoeil,
    opts: &TranslateOptions,
) -> Result<Wfa> {
    prepare(view, sigma, psi)?;
    let run = || {
        let mut t = Translator::new(view, alphabet, *opts);
        t.wfoeil(psi, sigma).map(|a| a.trim())
    };
    if opts.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))?;
        pool.install(run)
    } else {
        run()
    }
}
