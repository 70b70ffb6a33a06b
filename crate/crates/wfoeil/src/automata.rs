//! Finite automata over an interaction alphabet.
//!
//! Automata read letter classes rather than letters: a [`ClassMap`] sends
//! every letter of the shared alphabet to a class, and letters of one class
//! behave identically. With the identity map this is an ordinary automaton.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::hash::Hash;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A partition of the letters `0..len` into classes `0..count`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassMap {
    of_letter: Vec<u32>,
    count: u32,
}

impl ClassMap {
    /// Every letter in its own class.
    pub fn identity(letters: usize) -> ClassMap {
        ClassMap { of_letter: (0..letters as u32).collect(), count: letters as u32 }
    }

    /// Letters with equal signatures share a class; classes are numbered in
    /// order of first occurrence.
    pub fn from_signatures<S: Hash + Eq>(signatures: impl IntoIterator<Item = S>) -> ClassMap {
        let mut ids: HashMap<S, u32> = HashMap::new();
        let mut of_letter = Vec::new();
        for s in signatures {
            let next = ids.len() as u32;
            of_letter.push(*ids.entry(s).or_insert(next));
        }
        ClassMap { count: ids.len() as u32, of_letter }
    }

    pub fn letters(&self) -> usize {
        self.of_letter.len()
    }

    pub fn count(&self) -> usize {
        self.count as usize
    }

    pub fn class(&self, letter: u32) -> u32 {
        self.of_letter[letter as usize]
    }

    /// The smallest letter of each class.
    pub fn representatives(&self) -> Vec<u32> {
        let mut out = vec![u32::MAX; self.count()];
        for (a, &c) in self.of_letter.iter().enumerate().rev() {
            out[c as usize] = a as u32;
        }
        out
    }

    /// The coarsest common refinement, with the class maps from the new
    /// classes to the classes of `self` and of `other`.
    pub fn join(&self, other: &ClassMap) -> (ClassMap, Vec<u32>, Vec<u32>) {
        assert_eq!(self.letters(), other.letters(), "class maps over different alphabets");
        let joined = ClassMap::from_signatures(self.of_letter.iter().zip(&other.of_letter));
        let reps = joined.representatives();
        let left = reps.iter().map(|&a| self.class(a)).collect();
        let right = reps.iter().map(|&a| other.class(a)).collect();
        (joined, left, right)
    }
}

fn check_budget(states: usize, limit: usize, what: &str) -> Result<()> {
    if states > limit {
        return Err(Error::Resource(format!("{what} needs more than {limit} states")));
    }
    Ok(())
}

/// A nondeterministic automaton without ε-moves.
#[derive(Clone, Debug, PartialEq)]
pub struct Nfa {
    pub classes: Arc<ClassMap>,
    pub initial: Vec<u32>,
    pub accepting: Vec<bool>,
    /// Per state, `(class, target)` pairs sorted and deduplicated.
    pub delta: Vec<Vec<(u32, u32)>>,
}

/// A complete deterministic automaton.
#[derive(Clone, Debug, PartialEq)]
pub struct Dfa {
    pub classes: Arc<ClassMap>,
    pub initial: u32,
    pub accepting: Vec<bool>,
    /// `delta[state * classes + class]`.
    pub delta: Vec<u32>,
}

impl Nfa {
    pub fn states(&self) -> usize {
        self.accepting.len()
    }

    pub fn transitions(&self) -> usize {
        self.delta.iter().map(Vec::len).sum()
    }

    /// Builds an automaton over single letters; transitions are normalized.
    pub fn new(
        classes: Arc<ClassMap>,
        initial: Vec<u32>,
        accepting: Vec<bool>,
        mut delta: Vec<Vec<(u32, u32)>>,
    ) -> Nfa {
        for row in &mut delta {
            row.sort_unstable();
            row.dedup();
        }
        let mut initial = initial;
        initial.sort_unstable();
        initial.dedup();
        Nfa { classes, initial, accepting, delta }
    }

    pub fn accepts(&self, word: &[u32]) -> bool {
        let mut current: BTreeSet<u32> = self.initial.iter().copied().collect();
        for &a in word {
            let c = self.classes.class(a);
            current = current
                .iter()
                .flat_map(|&q| self.delta[q as usize].iter().filter(|(x, _)| *x == c).map(|&(_, t)| t))
                .collect();
        }
        current.iter().any(|&q| self.accepting[q as usize])
    }

    fn same_classes(&self, other: &Nfa) -> Result<()> {
        if self.classes != other.classes {
            return Err(Error::Alphabet("automata over different alphabets".into()));
        }
        Ok(())
    }

    /// Subset construction, completed with a sink when needed.
    pub fn determinize(&self, limit: usize) -> Result<Dfa> {
        let k = self.classes.count();
        let mut ids: HashMap<Vec<u32>, u32> = HashMap::new();
        let mut sets: Vec<Vec<u32>> = Vec::new();
        let mut delta: Vec<u32> = Vec::new();
        let start = self.initial.clone();
        ids.insert(start.clone(), 0);
        sets.push(start);
        let mut i = 0;
        let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); k];
        while i < sets.len() {
            for b in &mut buckets {
                b.clear();
            }
            for &q in &sets[i] {
                for &(c, t) in &self.delta[q as usize] {
                    buckets[c as usize].push(t);
                }
            }
            for b in buckets.iter_mut() {
                b.sort_unstable();
                b.dedup();
                let id = match ids.get(b.as_slice()) {
                    Some(&id) => id,
                    None => {
                        let id = sets.len() as u32;
                        ids.insert(b.clone(), id);
                        sets.push(b.clone());
                        check_budget(sets.len(), limit, "determinization")?;
                        id
                    }
                };
                delta.push(id);
            }
            i += 1;
        }
        let accepting = sets.iter().map(|s| s.iter().any(|&q| self.accepting[q as usize])).collect();
        Ok(Dfa { classes: self.classes.clone(), initial: 0, accepting, delta })
    }

    pub fn union(&self, other: &Nfa) -> Result<Nfa> {
        self.same_classes(other)?;
        let off = self.states() as u32;
        let mut delta = self.delta.clone();
        delta.extend(other.delta.iter().map(|row| row.iter().map(|&(c, t)| (c, t + off)).collect()));
        let mut initial = self.initial.clone();
        initial.extend(other.initial.iter().map(|q| q + off));
        let mut accepting = self.accepting.clone();
        accepting.extend(&other.accepting);
        Ok(Nfa::new(self.classes.clone(), initial, accepting, delta))
    }

    fn product(&self, other: &Nfa, shuffle: bool, limit: usize) -> Result<Nfa> {
        self.same_classes(other)?;
        let mut ids: HashMap<(u32, u32), u32> = HashMap::new();
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        let mut queue = VecDeque::new();
        let mut intern = |p: (u32, u32), pairs: &mut Vec<(u32, u32)>, queue: &mut VecDeque<u32>| -> Result<u32> {
            if let Some(&id) = ids.get(&p) {
                return Ok(id);
            }
            let id = pairs.len() as u32;
            ids.insert(p, id);
            pairs.push(p);
            queue.push_back(id);
            check_budget(pairs.len(), limit, "product automaton")?;
            Ok(id)
        };
        let mut initial = Vec::new();
        for &p in &self.initial {
            for &q in &other.initial {
                initial.push(intern((p, q), &mut pairs, &mut queue)?);
            }
        }
        let mut delta: Vec<Vec<(u32, u32)>> = Vec::new();
        while let Some(id) = queue.pop_front() {
            let (p, q) = pairs[id as usize];
            let mut row = Vec::new();
            if shuffle {
                for &(c, t) in &self.delta[p as usize] {
                    row.push((c, intern((t, q), &mut pairs, &mut queue)?));
                }
                for &(c, t) in &other.delta[q as usize] {
                    row.push((c, intern((p, t), &mut pairs, &mut queue)?));
                }
            } else {
                let (a, b) = (&self.delta[p as usize], &other.delta[q as usize]);
                for &(c, t) in a {
                    let lo = b.partition_point(|&(d, _)| d < c);
                    for &(d, u) in &b[lo..] {
                        if d != c {
                            break;
                        }
                        row.push((c, intern((t, u), &mut pairs, &mut queue)?));
                    }
                }
            }
            if delta.len() <= id as usize {
                delta.resize(id as usize + 1, Vec::new());
            }
            delta[id as usize] = row;
        }
        delta.resize(pairs.len(), Vec::new());
        let accepting = pairs.iter().map(|&(p, q)| self.accepting[p as usize] && other.accepting[q as usize]).collect();
        Ok(Nfa::new(self.classes.clone(), initial, accepting, delta))
    }

    pub fn intersect(&self, other: &Nfa, limit: usize) -> Result<Nfa> {
        self.product(other, false, limit)
    }

    pub fn shuffle(&self, other: &Nfa, limit: usize) -> Result<Nfa> {
        self.product(other, true, limit)
    }

    /// Concatenation without ε-moves: accepting states of `self` also take
    /// the first moves of `other`.
    pub fn concat(&self, other: &Nfa) -> Result<Nfa> {
        self.same_classes(other)?;
        let off = self.states() as u32;
        let other_eps = other.initial.iter().any(|&q| other.accepting[q as usize]);
        let first: Vec<(u32, u32)> = other
            .initial
            .iter()
            .flat_map(|&q| other.delta[q as usize].iter().map(move |&(c, t)| (c, t + off)))
            .collect();
        let mut delta = self.delta.clone();
        for (q, row) in delta.iter_mut().enumerate() {
            if self.accepting[q] {
                row.extend(&first);
            }
        }
        delta.extend(other.delta.iter().map(|row| row.iter().map(|&(c, t)| (c, t + off)).collect()));
        let mut accepting: Vec<bool> = self.accepting.iter().map(|&a| a && other_eps).collect();
        accepting.extend(&other.accepting);
        Ok(Nfa::new(self.classes.clone(), self.initial.clone(), accepting, delta))
    }

    pub fn complement(&self, limit: usize) -> Result<Nfa> {
        Ok(self.determinize(limit)?.complement().to_nfa())
    }
}

impl Dfa {
    pub fn states(&self) -> usize {
        self.accepting.len()
    }

    fn k(&self) -> usize {
        self.classes.count()
    }

    pub fn step(&self, q: u32, class: u32) -> u32 {
        self.delta[q as usize * self.k() + class as usize]
    }

    pub fn run(&self, word: &[u32]) -> u32 {
        word.iter().fold(self.initial, |q, &a| self.step(q, self.classes.class(a)))
    }

    pub fn accepts(&self, word: &[u32]) -> bool {
        self.accepting[self.run(word) as usize]
    }

    pub fn accepts_empty(&self) -> bool {
        self.accepting[self.initial as usize]
    }

    /// A single state with self-loops, accepting everything or nothing.
    pub fn constant(classes: Arc<ClassMap>, accept: bool) -> Dfa {
        let k = classes.count();
        Dfa { classes, initial: 0, accepting: vec![accept], delta: vec![0; k] }
    }

    /// The one-letter words whose class is marked in `letters`.
    pub fn letters(classes: Arc<ClassMap>, letters: &[bool]) -> Dfa {
        let k = classes.count();
        let mut delta = Vec::with_capacity(3 * k);
        delta.extend(letters.iter().map(|&b| if b { 1 } else { 2 }));
        delta.extend(std::iter::repeat(2).take(2 * k));
        Dfa { classes, initial: 0, accepting: vec![false, true, false], delta }
    }

    pub fn to_nfa(&self) -> Nfa {
        let k = self.k();
        let delta =
            (0..self.states()).map(|q| (0..k).map(|c| (c as u32, self.delta[q * k + c])).collect()).collect();
        Nfa::new(self.classes.clone(), vec![self.initial], self.accepting.clone(), delta)
    }

    pub fn complement(&self) -> Dfa {
        let mut out = self.clone();
        out.accepting.iter_mut().for_each(|a| *a = !*a);
        out
    }

    /// Product automaton accepting where `f` holds on both components.
    pub fn product(&self, other: &Dfa, f: impl Fn(bool, bool) -> bool, limit: usize) -> Result<Dfa> {
        if self.classes != other.classes {
            return Err(Error::Alphabet("automata over different alphabets".into()));
        }
        let k = self.k();
        let mut ids: HashMap<(u32, u32), u32> = HashMap::new();
        let mut pairs = vec![(self.initial, other.initial)];
        ids.insert(pairs[0], 0);
        let mut delta = Vec::new();
        let mut i = 0;
        while i < pairs.len() {
            let (p, q) = pairs[i];
            for c in 0..k as u32 {
                let t = (self.step(p, c), other.step(q, c));
                let id = match ids.get(&t) {
                    Some(&id) => id,
                    None => {
                        let id = pairs.len() as u32;
                        ids.insert(t, id);
                        pairs.push(t);
                        check_budget(pairs.len(), limit, "product automaton")?;
                        id
                    }
                };
                delta.push(id);
            }
            i += 1;
        }
        let accepting =
            pairs.iter().map(|&(p, q)| f(self.accepting[p as usize], other.accepting[q as usize])).collect();
        Ok(Dfa { classes: self.classes.clone(), initial: 0, accepting, delta }.minimize())
    }

    pub fn intersect(&self, other: &Dfa, limit: usize) -> Result<Dfa> {
        self.product(other, |a, b| a && b, limit)
    }

    pub fn union(&self, other: &Dfa, limit: usize) -> Result<Dfa> {
        self.product(other, |a, b| a || b, limit)
    }

    /// `L · L'` by a subset construction on the second component.
    pub fn concat(&self, other: &Dfa, limit: usize) -> Result<Dfa> {
        if self.classes != other.classes {
            return Err(Error::Alphabet("automata over different alphabets".into()));
        }
        let k = self.k();
        let close = |p: u32, mut set: Vec<u32>| {
            if self.accepting[p as usize] {
                set.push(other.initial);
            }
            set.sort_unstable();
            set.dedup();
            (p, set)
        };
        let start = close(self.initial, Vec::new());
        let mut ids: HashMap<(u32, Vec<u32>), u32> = HashMap::new();
        ids.insert(start.clone(), 0);
        let mut states = vec![start];
        let mut delta = Vec::new();
        let mut i = 0;
        while i < states.len() {
            for c in 0..k as u32 {
                let (p, set) = &states[i];
                let next = close(self.step(*p, c), set.iter().map(|&q| other.step(q, c)).collect());
                let id = match ids.get(&next) {
                    Some(&id) => id,
                    None => {
                        let id = states.len() as u32;
                        ids.insert(next.clone(), id);
                        states.push(next);
                        check_budget(states.len(), limit, "concatenation")?;
                        id
                    }
                };
                delta.push(id);
            }
            i += 1;
        }
        let accepting = states.iter().map(|(_, set)| set.iter().any(|&q| other.accepting[q as usize])).collect();
        Ok(Dfa { classes: self.classes.clone(), initial: 0, accepting, delta }.minimize())
    }

    /// `L ⧢ L'`.
    pub fn shuffle(&self, other: &Dfa, limit: usize) -> Result<Dfa> {
        Ok(self.to_nfa().shuffle(&other.to_nfa(), limit)?.determinize(limit)?.minimize())
    }

    /// `L ∪ {ε}`.
    pub fn with_empty(&self, limit: usize) -> Result<Dfa> {
        if self.accepts_empty() {
            return Ok(self.clone());
        }
        self.union(&Dfa::empty_word(self.classes.clone()), limit)
    }

    /// `L ∖ {ε}`.
    pub fn without_empty(&self, limit: usize) -> Result<Dfa> {
        if !self.accepts_empty() {
            return Ok(self.clone());
        }
        self.intersect(&Dfa::empty_word(self.classes.clone()).complement(), limit)
    }

    /// `{ε}`.
    pub fn empty_word(classes: Arc<ClassMap>) -> Dfa {
        let k = classes.count();
        let mut delta = vec![1; k];
        delta.extend(std::iter::repeat(1).take(k));
        Dfa { classes, initial: 0, accepting: vec![true, false], delta }
    }

    /// The same language over a finer class map; `to_old[c]` is the class of
    /// `self` containing new class `c`.
    pub fn refine(&self, classes: Arc<ClassMap>, to_old: &[u32]) -> Dfa {
        let k = classes.count();
        let mut delta = Vec::with_capacity(self.states() * k);
        for q in 0..self.states() as u32 {
            delta.extend(to_old.iter().map(|&c| self.step(q, c)));
        }
        Dfa { classes, initial: self.initial, accepting: self.accepting.clone(), delta }
    }

    /// Moore minimization of the accessible part; states are renumbered in
    /// breadth-first order so equal languages give equal automata.
    pub fn minimize(&self) -> Dfa {
        let k = self.k();
        let mut reach = vec![false; self.states()];
        let mut order = vec![self.initial];
        reach[self.initial as usize] = true;
        let mut i = 0;
        while i < order.len() {
            let q = order[i];
            for c in 0..k as u32 {
                let t = self.step(q, c);
                if !reach[t as usize] {
                    reach[t as usize] = true;
                    order.push(t);
                }
            }
            i += 1;
        }
        let mut block: Vec<u32> = self.accepting.iter().map(|&a| a as u32).collect();
        let mut blocks = 0;
        loop {
            let mut ids: HashMap<Vec<u32>, u32> = HashMap::new();
            let mut next = vec![0u32; self.states()];
            for &q in &order {
                let mut sig = Vec::with_capacity(k + 1);
                sig.push(block[q as usize]);
                sig.extend((0..k as u32).map(|c| block[self.step(q, c) as usize]));
                let n = ids.len() as u32;
                next[q as usize] = *ids.entry(sig).or_insert(n);
            }
            let count = ids.len();
            block = next;
            if count == blocks {
                break;
            }
            blocks = count;
        }
        let mut new_id: HashMap<u32, u32> = HashMap::new();
        let mut reps: Vec<u32> = Vec::new();
        let mut queue = VecDeque::from([self.initial]);
        new_id.insert(block[self.initial as usize], 0);
        reps.push(self.initial);
        while let Some(q) = queue.pop_front() {
            for c in 0..k as u32 {
                let t = self.step(q, c);
                let b = block[t as usize];
                if let std::collections::hash_map::Entry::Vacant(e) = new_id.entry(b) {
                    e.insert(reps.len() as u32);
                    reps.push(t);
                    queue.push_back(t);
                }
            }
        }
        let mut delta = Vec::with_capacity(reps.len() * k);
        for &q in &reps {
            delta.extend((0..k as u32).map(|c| new_id[&block[self.step(q, c) as usize]]));
        }
        let accepting = reps.iter().map(|&q| self.accepting[q as usize]).collect();
        Dfa { classes: self.classes.clone(), initial: 0, accepting, delta }
    }

    /// States from which an accepting state is reachable.
    pub fn live_states(&self) -> Vec<bool> {
        let k = self.k();
        let n = self.states();
        let mut rev: Vec<Vec<u32>> = vec![Vec::new(); n];
        for q in 0..n {
            for c in 0..k {
                rev[self.delta[q * k + c] as usize].push(q as u32);
            }
        }
        let mut live = self.accepting.clone();
        let mut stack: Vec<u32> = (0..n as u32).filter(|&q| live[q as usize]).collect();
        while let Some(q) = stack.pop() {
            for &p in &rev[q as usize] {
                if !live[p as usize] {
                    live[p as usize] = true;
                    stack.push(p);
                }
            }
        }
        live
    }

    pub fn is_empty(&self) -> bool {
        !self.live_states()[self.initial as usize]
    }
}

/// `L(A) ∪ L(B)`.
pub fn nfa_union(a: &Nfa, b: &Nfa) -> Result<Nfa> {
    a.union(b)
}

/// `L(A) · L(B)`.
pub fn nfa_concat(a: &Nfa, b: &Nfa) -> Result<Nfa> {
    a.concat(b)
}

/// `L(A) ⧢ L(B)`.
pub fn nfa_shuffle(a: &Nfa, b: &Nfa, limit: usize) -> Result<Nfa> {
    a.shuffle(b, limit)
}

/// `L(A) ∩ L(B)`.
pub fn nfa_intersect(a: &Nfa, b: &Nfa, limit: usize) -> Result<Nfa> {
    a.intersect(b, limit)
}

/// The complement of `L(A)` among all words.
pub fn nfa_complement(a: &Nfa, limit: usize) -> Result<Nfa> {
    a.complement(limit)
}

/// An equivalent complete deterministic automaton.
pub fn nfa_determinize_complete(a: &Nfa, limit: usize) -> Result<Dfa> {
    a.determinize(limit)
}
