//! Weighted finite automata and the closure constructions on their series.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use crate::automata::{Dfa, Nfa};
use crate::error::{Error, Result};
use crate::parse::{interaction, parse_weight, Cursor, Tok};
use crate::semiring::{Semiring, Value};
use crate::system::{Alphabet, Instantiation};

/// A WFA over the letters `0..letters` of a shared alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct Wfa {
    pub semiring: Semiring,
    pub letters: usize,
    pub initial: Vec<Value>,
    pub terminal: Vec<Value>,
    /// Per state, `(letter, target, weight)` sorted by letter then target,
    /// with nonzero weights and no repeated `(letter, target)`.
    pub delta: Vec<Vec<(u32, u32, Value)>>,
}

impl Wfa {
    /// `states` states with no weights at all.
    pub fn empty(semiring: Semiring, letters: usize, states: usize) -> Wfa {
        Wfa {
            semiring,
            letters,
            initial: vec![semiring.zero(); states],
            terminal: vec![semiring.zero(); states],
            delta: vec![Vec::new(); states],
        }
    }

    pub fn states(&self) -> usize {
        self.initial.len()
    }

    pub fn transitions(&self) -> usize {
        self.delta.iter().map(Vec::len).sum()
    }

    /// Sorts rows, merges repeated edges and drops zero weights.
    pub fn normalize(&mut self) {
        let k = self.semiring;
        for row in &mut self.delta {
            row.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
            let mut merged: Vec<(u32, u32, Value)> = Vec::with_capacity(row.len());
            for (a, t, w) in row.drain(..) {
                match merged.last_mut() {
                    Some(last) if last.0 == a && last.1 == t => last.2 = k.add(&last.2, &w),
                    _ => merged.push((a, t, w)),
                }
            }
            merged.retain(|e| !k.is_zero(&e.2));
            *row = merged;
        }
    }

    /// The transitions of `q` reading `a`.
    pub fn edges(&self, q: usize, a: u32) -> &[(u32, u32, Value)] {
        let row = &self.delta[q];
        let lo = row.partition_point(|e| e.0 < a);
        let hi = row.partition_point(|e| e.0 <= a);
        &row[lo..hi]
    }

    /// `‖A‖(w) = in · M(w_1) ⋯ M(w_n) · ter`.
    pub fn behavior(&self, word: &[u32]) -> Result<Value> {
        let k = self.semiring;
        let mut v = self.initial.clone();
        for &a in word {
            if a as usize >= self.letters {
                return Err(Error::Alphabet(format!("letter {a} is outside the automaton's alphabet")));
            }
            let mut next = vec![k.zero(); self.states()];
            for (q, x) in v.iter().enumerate() {
                if k.is_zero(x) {
                    continue;
                }
                for (_, t, w) in self.edges(q, a) {
                    next[*t as usize] = k.add(&next[*t as usize], &k.mul(x, w));
                }
            }
            v = next;
        }
        Ok(k.sum(v.iter().zip(&self.terminal).map(|(x, t)| k.mul(x, t)).collect::<Vec<_>>().iter()))
    }

    /// One state, every letter a self-loop of weight one, `in = k`.
    pub fn constant(semiring: Semiring, letters: usize, k: Value) -> Wfa {
        let mut a = Wfa::empty(semiring, letters, 1);
        a.initial[0] = k;
        a.terminal[0] = semiring.one();
        a.delta[0] = (0..letters as u32).map(|x| (x, 0, semiring.one())).collect();
        a.normalize();
        a
    }

    /// The characteristic series of a complete deterministic automaton,
    /// restricted to its live states.
    pub fn from_dfa(dfa: &Dfa, semiring: Semiring) -> Wfa {
        let live = dfa.live_states();
        let mut id = vec![u32::MAX; dfa.states()];
        let mut n = 0;
        for q in 0..dfa.states() {
            if live[q] {
                id[q] = n;
                n += 1;
            }
        }
        let letters = dfa.classes.letters();
        let mut a = Wfa::empty(semiring, letters, n as usize);
        if !live[dfa.initial as usize] {
            return a;
        }
        a.initial[id[dfa.initial as usize] as usize] = semiring.one();
        for q in 0..dfa.states() {
            if !live[q] {
                continue;
            }
            let i = id[q] as usize;
            if dfa.accepting[q] {
                a.terminal[i] = semiring.one();
            }
            let row: Vec<(u32, u32, Value)> = (0..letters as u32)
                .filter_map(|x| {
                    let t = dfa.step(q as u32, dfa.classes.class(x));
                    live[t as usize].then(|| (x, id[t as usize], semiring.one()))
                })
                .collect();
            a.delta[i] = row;
        }
        a
    }

    /// Multiplies the initial weights by `k` on the left.
    pub fn scale(mut self, k: &Value) -> Wfa {
        let s = self.semiring;
        for x in &mut self.initial {
            *x = s.mul(k, x);
        }
        self
    }

    fn same_shape(&self, other: &Wfa) -> Result<()> {
        if self.semiring != other.semiring {
            return Err(Error::Alphabet(format!("semirings differ: {} and {}", self.semiring, other.semiring)));
        }
        if self.letters != other.letters {
            return Err(Error::Alphabet("automata over different alphabets".into()));
        }
        Ok(())
    }

    /// Disjoint union; `‖A₁‖ + ‖A₂‖`.
    pub fn sum(&self, other: &Wfa) -> Result<Wfa> {
        self.same_shape(other)?;
        let off = self.states() as u32;
        let mut out = self.clone();
        out.initial.extend(other.initial.iter().cloned());
        out.terminal.extend(other.terminal.iter().cloned());
        out.delta
            .extend(other.delta.iter().map(|row| row.iter().map(|(a, t, w)| (*a, t + off, w.clone())).collect()));
        Ok(out)
    }

    /// `‖A₁‖ ⊙ ‖A₂‖` on `|Q₁| + |Q₂|` states. Paths enter `Q₂` through
    /// bridge edges, so the empty word is counted once, through `ter(Q₁)`.
    pub fn cauchy(&self, other: &Wfa) -> Result<Wfa> {
        self.same_shape(other)?;
        let k = self.semiring;
        let off = self.states() as u32;
        let eps2 = k.sum(other.initial.iter().zip(&other.terminal).map(|(a, b)| k.mul(a, b)).collect::<Vec<_>>().iter());
        let mut out = self.clone();
        for (q, t) in out.terminal.iter_mut().enumerate() {
            *t = k.mul(&self.terminal[q], &eps2);
        }
        for q in 0..self.states() {
            if k.is_zero(&self.terminal[q]) {
                continue;
            }
            for (p, i2) in other.initial.iter().enumerate() {
                if k.is_zero(i2) {
                    continue;
                }
                let f = k.mul(&self.terminal[q], i2);
                for (a, t, w) in &other.delta[p] {
                    out.delta[q].push((*a, t + off, k.mul(&f, w)));
                }
            }
        }
        out.initial.extend(std::iter::repeat(k.zero()).take(other.states()));
        out.terminal.extend(other.terminal.iter().cloned());
        out.delta
            .extend(other.delta.iter().map(|row| row.iter().map(|(a, t, w)| (*a, t + off, w.clone())).collect()));
        out.normalize();
        Ok(out)
    }

    fn pair_product(&self, other: &Wfa, shuffle: bool, accessible: bool, limit: usize) -> Result<Wfa> {
        self.same_shape(other)?;
        let k = self.semiring;
        let n2 = other.states();
        let mut ids: HashMap<(u32, u32), u32> = HashMap::new();
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        let mut queue: VecDeque<u32> = VecDeque::new();
        let mut intern = |p: (u32, u32), pairs: &mut Vec<(u32, u32)>, queue: &mut VecDeque<u32>| -> Result<u32> {
            if !accessible {
                return Ok(p.0 * n2 as u32 + p.1);
            }
            if let Some(&id) = ids.get(&p) {
                return Ok(id);
            }
            let id = pairs.len() as u32;
            ids.insert(p, id);
            pairs.push(p);
            queue.push_back(id);
            if pairs.len() > limit {
                return Err(Error::Resource(format!("product automaton needs more than {limit} states")));
            }
            Ok(id)
        };
        if accessible {
            for (p, x) in self.initial.iter().enumerate() {
                for (q, y) in other.initial.iter().enumerate() {
                    if !k.is_zero(x) && !k.is_zero(y) {
                        intern((p as u32, q as u32), &mut pairs, &mut queue)?;
                    }
                }
            }
        } else {
            if self.states() * n2 > limit {
                return Err(Error::Resource(format!("product automaton needs more than {limit} states")));
            }
            for p in 0..self.states() as u32 {
                for q in 0..n2 as u32 {
                    pairs.push((p, q));
                    queue.push_back(p * n2 as u32 + q);
                }
            }
        }
        let mut rows: HashMap<u32, Vec<(u32, u32, Value)>> = HashMap::new();
        while let Some(id) = queue.pop_front() {
            let (p, q) = pairs[id as usize];
            let (a_row, b_row) = (&self.delta[p as usize], &other.delta[q as usize]);
            let mut row = Vec::new();
            if shuffle {
                for (a, t, w) in a_row {
                    row.push((*a, intern((*t, q), &mut pairs, &mut queue)?, w.clone()));
                }
                for (a, t, w) in b_row {
                    row.push((*a, intern((p, *t), &mut pairs, &mut queue)?, w.clone()));
                }
            } else {
                for (a, t, w) in a_row {
                    for (_, u, v) in other.edges(q as usize, *a) {
                        row.push((*a, intern((*t, *u), &mut pairs, &mut queue)?, k.mul(w, v)));
                    }
                }
            }
            rows.insert(id, row);
        }
        let n = pairs.len();
        let mut out = Wfa::empty(k, self.letters, n);
        for (id, &(p, q)) in pairs.iter().enumerate() {
            out.initial[id] = k.mul(&self.initial[p as usize], &other.initial[q as usize]);
            out.terminal[id] = k.mul(&self.terminal[p as usize], &other.terminal[q as usize]);
            out.delta[id] = rows.remove(&(id as u32)).unwrap_or_default();
        }
        out.normalize();
        Ok(out)
    }

    /// Pointwise product on all `|Q₁|·|Q₂|` state pairs.
    pub fn hadamard(&self, other: &Wfa) -> Result<Wfa> {
        self.pair_product(other, false, false, usize::MAX)
    }

    /// Shuffle product on all `|Q₁|·|Q₂|` state pairs; every interleaving
    /// decomposition contributes.
    pub fn shuffle(&self, other: &Wfa) -> Result<Wfa> {
        self.pair_product(other, true, false, usize::MAX)
    }

    /// Pointwise product on the pairs reachable from the initial pairs.
    pub fn hadamard_accessible(&self, other: &Wfa, limit: usize) -> Result<Wfa> {
        self.pair_product(other, false, true, limit)
    }

    /// Shuffle product on the pairs reachable from the initial pairs.
    pub fn shuffle_accessible(&self, other: &Wfa, limit: usize) -> Result<Wfa> {
        self.pair_product(other, true, true, limit)
    }

    /// `‖A‖ ⊗ 1_L` for the language of a complete DFA, on reachable pairs.
    pub fn restrict(&self, dfa: &Dfa, limit: usize) -> Result<Wfa> {
        if dfa.classes.letters() != self.letters {
            return Err(Error::Alphabet("automata over different alphabets".into()));
        }
        let k = self.semiring;
        let live = dfa.live_states();
        let mut ids: HashMap<(u32, u32), u32> = HashMap::new();
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        let mut queue: VecDeque<u32> = VecDeque::new();
        let mut intern = |p: (u32, u32), pairs: &mut Vec<(u32, u32)>, queue: &mut VecDeque<u32>| -> Result<u32> {
            if let Some(&id) = ids.get(&p) {
                return Ok(id);
            }
            let id = pairs.len() as u32;
            ids.insert(p, id);
            pairs.push(p);
            queue.push_back(id);
            if pairs.len() > limit {
                return Err(Error::Resource(format!("restricted automaton needs more than {limit} states")));
            }
            Ok(id)
        };
        if live[dfa.initial as usize] {
            for (q, x) in self.initial.iter().enumerate() {
                if !k.is_zero(x) {
                    intern((q as u32, dfa.initial), &mut pairs, &mut queue)?;
                }
            }
        }
        let mut rows: Vec<Vec<(u32, u32, Value)>> = Vec::new();
        while let Some(id) = queue.pop_front() {
            let (q, d) = pairs[id as usize];
            let mut row = Vec::new();
            for (a, t, w) in &self.delta[q as usize] {
                let e = dfa.step(d, dfa.classes.class(*a));
                if live[e as usize] {
                    row.push((*a, intern((*t, e), &mut pairs, &mut queue)?, w.clone()));
                }
            }
            if rows.len() <= id as usize {
                rows.resize(id as usize + 1, Vec::new());
            }
            rows[id as usize] = row;
        }
        rows.resize(pairs.len(), Vec::new());
        let mut out = Wfa::empty(k, self.letters, pairs.len());
        for (id, &(q, d)) in pairs.iter().enumerate() {
            out.initial[id] = self.initial[q as usize].clone();
            if dfa.accepting[d as usize] {
                out.terminal[id] = self.terminal[q as usize].clone();
            }
        }
        out.delta = rows;
        out.normalize();
        Ok(out)
    }

    /// Keeps the states that are both reachable and co-reachable, in their
    /// original order.
    pub fn trim(&self) -> Wfa {
        let k = self.semiring;
        let n = self.states();
        let mut fwd = vec![false; n];
        let mut stack: Vec<usize> = (0..n).filter(|&q| !k.is_zero(&self.initial[q])).collect();
        stack.iter().for_each(|&q| fwd[q] = true);
        while let Some(q) = stack.pop() {
            for (_, t, _) in &self.delta[q] {
                if !fwd[*t as usize] {
                    fwd[*t as usize] = true;
                    stack.push(*t as usize);
                }
            }
        }
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
        for q in 0..n {
            for (_, t, _) in &self.delta[q] {
                rev[*t as usize].push(q);
            }
        }
        let mut bwd = vec![false; n];
        let mut stack: Vec<usize> = (0..n).filter(|&q| !k.is_zero(&self.terminal[q])).collect();
        stack.iter().for_each(|&q| bwd[q] = true);
        while let Some(q) = stack.pop() {
            for &p in &rev[q] {
                if !bwd[p] {
                    bwd[p] = true;
                    stack.push(p);
                }
            }
        }
        let keep: Vec<bool> = (0..n).map(|q| fwd[q] && bwd[q]).collect();
        let mut id = vec![u32::MAX; n];
        let mut m = 0;
        for q in 0..n {
            if keep[q] {
                id[q] = m;
                m += 1;
            }
        }
        let mut out = Wfa::empty(k, self.letters, m as usize);
        for q in 0..n {
            if !keep[q] {
                continue;
            }
            let i = id[q] as usize;
            out.initial[i] = self.initial[q].clone();
            out.terminal[i] = self.terminal[q].clone();
            out.delta[i] = self.delta[q]
                .iter()
                .filter(|(_, t, _)| keep[*t as usize])
                .map(|(a, t, w)| (*a, id[*t as usize], w.clone()))
                .collect();
        }
        out
    }

    /// The same automaton over another semiring, converting every weight.
    pub fn convert(&self, target: Semiring, f: impl Fn(&Value) -> Option<Value>) -> Result<Wfa> {
        let conv = |v: &Value| {
            f(v).ok_or_else(|| Error::Capability(format!("weight {} has no image in {target}", self.semiring.render(v))))
        };
        let mut out = Wfa::empty(target, self.letters, self.states());
        for q in 0..self.states() {
            out.initial[q] = conv(&self.initial[q])?;
            out.terminal[q] = conv(&self.terminal[q])?;
            out.delta[q] = self.delta[q].iter().map(|(a, t, w)| Ok((*a, *t, conv(w)?))).collect::<Result<_>>()?;
        }
        out.normalize();
        Ok(out)
    }
}

/// Characteristic series of a complete deterministic automaton given as an
/// NFA; nondeterministic or incomplete input is rejected.
pub fn characteristic_wfa(a: &Nfa, semiring: Semiring) -> Result<Wfa> {
    if a.initial.len() != 1 {
        return Err(Error::validation("characteristic automaton needs exactly one initial state"));
    }
    let k = a.classes.count();
    let mut delta = Vec::with_capacity(a.states() * k);
    for (q, row) in a.delta.iter().enumerate() {
        if row.len() != k || row.iter().enumerate().any(|(c, &(d, _))| d as usize != c) {
            return Err(Error::validation(format!("state {q} is not deterministic and complete")));
        }
        delta.extend(row.iter().map(|&(_, t)| t));
    }
    let dfa = Dfa { classes: a.classes.clone(), initial: a.initial[0], accepting: a.accepting.clone(), delta };
    Ok(Wfa::from_dfa(&dfa, semiring))
}

pub fn wfa_sum(a: &Wfa, b: &Wfa) -> Result<Wfa> {
    a.sum(b)
}

pub fn wfa_hadamard(a: &Wfa, b: &Wfa) -> Result<Wfa> {
    a.hadamard(b)
}

pub fn wfa_cauchy(a: &Wfa, b: &Wfa) -> Result<Wfa> {
    a.cauchy(b)
}

pub fn wfa_shuffle(a: &Wfa, b: &Wfa) -> Result<Wfa> {
    a.shuffle(b)
}

/// `‖A‖(w)` for a word given as interactions of `alphabet`.
pub fn wfa_behavior(a: &Wfa, alphabet: &Alphabet, word: &[crate::system::Interaction]) -> Result<Value> {
    a.behavior(&alphabet.encode(word)?)
}

/// Text form: header, semiring, alphabet, nonzero `in`/`ter` entries and
/// one `q --{letter}[weight]--> q'` line per transition.
pub fn render_wfa(a: &Wfa, alphabet: &Alphabet, view: &Instantiation) -> String {
    let k = a.semiring;
    let mut out = String::from("wfa 1\n");
    let _ = writeln!(out, "semiring {}", k.name());
    let _ = writeln!(out, "letters {}", alphabet.len());
    for l in alphabet.letters() {
        let _ = writeln!(out, "{}", view.render_interaction(l));
    }
    let _ = writeln!(out, "states {}", a.states());
    for (q, x) in a.initial.iter().enumerate() {
        if !k.is_zero(x) {
            let _ = writeln!(out, "in {q} {}", k.render(x));
        }
    }
    for (q, x) in a.terminal.iter().enumerate() {
        if !k.is_zero(x) {
            let _ = writeln!(out, "ter {q} {}", k.render(x));
        }
    }
    for (q, row) in a.delta.iter().enumerate() {
        for (l, t, w) in row {
            let letter = view.render_interaction(alphabet.letter(*l));
            let _ = writeln!(out, "{q} --{letter}[{}]--> {t}", k.render(w));
        }
    }
    out
}

/// Reads the text form back; letters are checked against `view`.
pub fn parse_wfa(text: &str, view: &Instantiation) -> Result<(Wfa, Alphabet)> {
    let mut c = Cursor::new(text)?;
    c.header("wfa")?;
    c.expect_keyword("semiring")?;
    let (name, tok) = c.ident("a semiring name")?;
    let k: Semiring = name.parse().map_err(|e: Error| c.error_at(&tok, e.to_string()))?;
    c.expect_keyword("letters")?;
    let n = c.count("a letter count")?;
    let mut letters = Vec::with_capacity(n);
    for _ in 0..n {
        letters.push(interaction(&mut c, view)?);
    }
    let alphabet = Alphabet::new(letters)?;
    c.expect_keyword("states")?;
    let states = c.count("a state count")?;
    let mut a = Wfa::empty(k, alphabet.len(), states);
    let state = |c: &mut Cursor| -> Result<usize> {
        let t = c.toks[c.pos].clone();
        let q = c.count("a state number")?;
        if q >= states {
            return Err(c.error_at(&t, format!("state {q} is out of range")));
        }
        Ok(q)
    };
    while !c.at_eof() {
        if c.is_ident("in") || c.is_ident("ter") {
            let is_in = c.is_ident("in");
            c.bump();
            let q = state(&mut c)?;
            let w = parse_weight(&mut c, k)?;
            if is_in {
                a.initial[q] = w;
            } else {
                a.terminal[q] = w;
            }
        } else if matches!(c.peek(), Tok::Num(_)) {
            let q = state(&mut c)?;
            c.expect_sym("--")?;
            let start = c.toks[c.pos].clone();
            let letter = interaction(&mut c, view)?;
            let l = alphabet.index_of(&letter).ok_or_else(|| c.error_at(&start, "letter is not in the alphabet"))?;
            c.expect_sym("[")?;
            let w = parse_weight(&mut c, k)?;
            c.expect_sym("]")?;
            c.expect_sym("-->")?;
            let t = state(&mut c)?;
            a.delta[q].push((l, t as u32, w));
        } else {
            return Err(c.error("expected `in`, `ter` or a transition"));
        }
    }
    a.normalize();
    Ok((a, alphabet))
}
