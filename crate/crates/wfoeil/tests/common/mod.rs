//! Test support: an exhaustive reference evaluator and catalog helpers.
//!
//! The oracle follows the inductive definitions literally: it enumerates
//! every splitting, every interleaving and every index set, and shares no
//! code with the library's evaluator.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use wfoeil::logic::{InstRef, PortRef};
use wfoeil::system::{PortInstance, DEFAULT_ALPHABET_LIMIT};
use wfoeil::{
    generate, Alphabet, Architecture, Epil, Foeil, Instantiation, Interaction, Pil, Semiring, Value, Var, Wfoeil,
};

pub mod oracle {
    use super::*;
    use wfoeil::logic::{Op, Quant};

    type Sigma = BTreeMap<Var, usize>;

    fn port(p: &PortRef, s: &Sigma) -> PortInstance {
        let instance = match &p.inst {
            InstRef::Index(j) => *j,
            InstRef::Var(v) => s[v],
        };
        PortInstance { ty: p.ty, instance, port: p.port }
    }

    fn same_set(a: &Interaction, ports: &[PortRef], s: &Sigma) -> bool {
        let want: BTreeSet<PortInstance> = ports.iter().map(|p| port(p, s)).collect();
        let have: BTreeSet<PortInstance> = a.ports().iter().cloned().collect();
        want == have
    }

    fn pil(a: &Interaction, f: &Pil, s: &Sigma) -> bool {
        match f {
            Pil::True => true,
            Pil::Atom(p) => a.ports().contains(&port(p, s)),
            Pil::Hash(ps) => same_set(a, ps, s),
            Pil::Not(x) => !pil(a, x, s),
            Pil::Or(x, y) => pil(a, x, s) || pil(a, y, s),
            Pil::And(x, y) => pil(a, x, s) && pil(a, y, s),
        }
    }

    /// Every `(u, v)` with `u v = w`.
    fn splits(w: &[Interaction]) -> Vec<(Vec<Interaction>, Vec<Interaction>)> {
        (0..=w.len()).map(|i| (w[..i].to_vec(), w[i..].to_vec())).collect()
    }

    /// Every choice of positions for the left word, as a pair of subwords;
    /// equal pairs from different choices are listed separately.
    fn interleavings(w: &[Interaction]) -> Vec<(Vec<Interaction>, Vec<Interaction>)> {
        let mut out = Vec::new();
        for mask in 0u32..(1 << w.len()) {
            let (mut u, mut v) = (Vec::new(), Vec::new());
            for (i, a) in w.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    u.push(a.clone());
                } else {
                    v.push(a.clone());
                }
            }
            out.push((u, v));
        }
        out
    }

    /// Every decomposition of `w` into `k` parts, consecutive or interleaved.
    fn parts(w: &[Interaction], k: usize, shuffle: bool) -> Vec<Vec<Vec<Interaction>>> {
        if k == 0 {
            return if w.is_empty() { vec![vec![]] } else { vec![] };
        }
        let firsts = if shuffle { interleavings(w) } else { splits(w) };
        let mut out = Vec::new();
        for (u, v) in firsts {
            for mut rest in parts(&v, k - 1, shuffle) {
                rest.insert(0, u.clone());
                out.push(rest);
            }
        }
        out
    }

    /// Index sets `J ⊆ [r]` in increasing order; nonempty unless `all`.
    fn index_sets(r: usize, all: bool) -> Vec<Vec<usize>> {
        if all {
            return vec![(1..=r).collect()];
        }
        (1u32..(1 << r)).map(|m| (1..=r).filter(|j| m >> (j - 1) & 1 == 1).collect()).collect()
    }

    fn epil(w: &[Interaction], f: &Epil, s: &Sigma) -> bool {
        match f {
            Epil::Pil(Pil::True) => true,
            Epil::Pil(p) => w.len() == 1 && pil(&w[0], p, s),
            _ if w.is_empty() => false,
            Epil::Not(x) => !epil(w, x, s),
            Epil::Bin(Op::Or, a, b) => epil(w, a, s) || epil(w, b, s),
            Epil::Bin(Op::And, a, b) => epil(w, a, s) && epil(w, b, s),
            Epil::Bin(op, a, b) => {
                let pairs = if *op == Op::Shuffle { interleavings(w) } else { splits(w) };
                pairs.iter().any(|(u, v)| epil(u, a, s) && epil(v, b, s))
            }
        }
    }

    fn foeil(view: &Instantiation, w: &[Interaction], f: &Foeil, s: &Sigma) -> bool {
        match f {
            Foeil::Epil(e) => epil(w, e, s),
            Foeil::Eq(x, y) => s[x] == s[y],
            Foeil::NotEq(x, y) => s[x] != s[y],
            Foeil::Bin(Op::Or, a, b) => foeil(view, w, a, s) || foeil(view, w, b, s),
            Foeil::Bin(Op::And, a, b) => foeil(view, w, a, s) && foeil(view, w, b, s),
            Foeil::Bin(op, a, b) => {
                let pairs = if *op == Op::Shuffle { interleavings(w) } else { splits(w) };
                pairs.iter().any(|(u, v)| foeil(view, u, a, s) && foeil(view, v, b, s))
            }
            Foeil::Quant(q, x, body) => {
                let r = view.r.0[x.ty];
                let at = |j: usize| {
                    let mut s2 = s.clone();
                    s2.insert(x.clone(), j);
                    s2
                };
                match q {
                    Quant::Exists => (1..=r).any(|j| foeil(view, w, body, &at(j))),
                    Quant::Forall => (1..=r).all(|j| foeil(view, w, body, &at(j))),
                    _ => {
                        let shuffle = matches!(q, Quant::ExistsS | Quant::ForallS);
                        index_sets(r, q.is_universal()).iter().any(|js| {
                            parts(w, js.len(), shuffle)
                                .iter()
                                .any(|ps| js.iter().zip(ps).all(|(&j, u)| foeil(view, u, body, &at(j))))
                        })
                    }
                }
            }
        }
    }

    fn value(view: &Instantiation, w: &[Interaction], f: &Wfoeil, s: &Sigma) -> Value {
        let k = view.semiring();
        match f {
            Wfoeil::Const(c) => c.clone(),
            Wfoeil::Foeil(g) => {
                if foeil(view, w, g, s) {
                    k.one()
                } else {
                    k.zero()
                }
            }
            Wfoeil::HashW(ps) => {
                if w.len() == 1 && same_set(&w[0], ps, s) {
                    ps.iter().fold(k.one(), |acc, p| {
                        let q = port(p, s);
                        k.mul(&acc, view.system.port_weight(q.ty, q.port))
                    })
                } else {
                    k.zero()
                }
            }
            Wfoeil::Bin(Op::Or, a, b) => k.add(&value(view, w, a, s), &value(view, w, b, s)),
            Wfoeil::Bin(Op::And, a, b) => k.mul(&value(view, w, a, s), &value(view, w, b, s)),
            Wfoeil::Bin(op, a, b) => {
                let pairs = if *op == Op::Shuffle { interleavings(w) } else { splits(w) };
                pairs.iter().fold(k.zero(), |acc, (u, v)| k.add(&acc, &k.mul(&value(view, u, a, s), &value(view, v, b, s))))
            }
            Wfoeil::Quant(q, x, body) => {
                let r = view.r.0[x.ty];
                let at = |j: usize| {
                    let mut s2 = s.clone();
                    s2.insert(x.clone(), j);
                    s2
                };
                match q {
                    Quant::Exists => (1..=r).fold(k.zero(), |acc, j| k.add(&acc, &value(view, w, body, &at(j)))),
                    Quant::Forall => (1..=r).fold(k.one(), |acc, j| k.mul(&acc, &value(view, w, body, &at(j)))),
                    _ => {
                        let shuffle = matches!(q, Quant::ExistsS | Quant::ForallS);
                        let mut acc = k.zero();
                        for js in index_sets(r, q.is_universal()) {
                            for ps in parts(w, js.len(), shuffle) {
                                let term = js
                                    .iter()
                                    .zip(&ps)
                                    .fold(k.one(), |t, (&j, u)| k.mul(&t, &value(view, u, body, &at(j))));
                                acc = k.add(&acc, &term);
                            }
                        }
                        acc
                    }
                }
            }
        }
    }

    /// `‖ψ̃‖(r, w)` for a sentence.
    pub fn eval(view: &Instantiation, w: &[Interaction], f: &Wfoeil) -> Value {
        value(view, w, f, &Sigma::new())
    }

    /// `(r, w) ⊨ ψ` for a sentence.
    pub fn satisfies(view: &Instantiation, w: &[Interaction], f: &Foeil) -> bool {
        foeil(view, w, f, &Sigma::new())
    }

    /// Every interaction of `view`, by brute force over port-instance subsets.
    pub fn interactions(view: &Instantiation) -> Vec<BTreeSet<PortInstance>> {
        let ports = view.port_instances();
        let mut out = Vec::new();
        for mask in 1u64..(1 << ports.len()) {
            let set: Vec<&PortInstance> = (0..ports.len()).filter(|i| mask >> i & 1 == 1).map(|i| &ports[i]).collect();
            let clash = set.iter().enumerate().any(|(i, p)| {
                set[i + 1..].iter().any(|q| q.ty == p.ty && q.instance == p.instance)
            });
            if !clash {
                out.push(set.into_iter().cloned().collect());
            }
        }
        out
    }
}

/// A catalog entry at instances `r` over `semiring` with unit weights.
pub struct Case {
    pub view: Instantiation,
    pub alphabet: Alphabet,
    pub sentence: Wfoeil,
}

pub fn case(id: Architecture, semiring: Semiring, r: &[usize]) -> Case {
    case_with(id, semiring, r, &[])
}

pub fn case_with(id: Architecture, semiring: Semiring, r: &[usize], weights: &[(&str, Value)]) -> Case {
    let (system, sentence) = generate(id, semiring, weights).unwrap();
    let view = system.instantiate(&wfoeil::InstanceMap(r.to_vec())).unwrap();
    let alphabet = Alphabet::of(&view, DEFAULT_ALPHABET_LIMIT).unwrap();
    Case { view, alphabet, sentence }
}

/// A random word of length at most `max_len`: each letter is drawn from
/// `preferred` or, with probability one half, from the whole alphabet.
pub fn random_word(rng: &mut ChaCha8Rng, alphabet: &Alphabet, preferred: &[Interaction], max_len: usize) -> Vec<Interaction> {
    let len = rng.gen_range(0..=max_len);
    (0..len)
        .map(|_| {
            if !preferred.is_empty() && rng.gen_bool(0.5) {
                preferred[rng.gen_range(0..preferred.len())].clone()
            } else {
                alphabet.letter(rng.gen_range(0..alphabet.len() as u32)).clone()
            }
        })
        .collect()
}

/// All words of length at most `max_len` over `letters`, shortest first.
pub fn all_words(letters: &[Interaction], max_len: usize) -> Vec<Vec<Interaction>> {
    let mut out = vec![vec![]];
    let mut level = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &level {
            for a in letters {
                let mut w2: Vec<Interaction> = w.clone();
                w2.push(a.clone());
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned());
        level = next;
    }
    out
}

/// Distinct letters of the catalog words of `id`, in order of appearance.
pub fn catalog_letters(id: Architecture) -> Vec<Interaction> {
    let mut out: Vec<Interaction> = Vec::new();
    for (_, w) in wfoeil::catalog_words(id, &id.instances()).unwrap() {
        for a in w {
            if !out.contains(&a) {
                out.push(a);
            }
        }
    }
    out
}

/// A word read along a random path of `wfa` from an initial state, stopping
/// at a terminal state with probability one third or after `max_len` letters.
pub fn walk_word(rng: &mut ChaCha8Rng, wfa: &wfoeil::Wfa, alphabet: &Alphabet, max_len: usize) -> Vec<Interaction> {
    let k = wfa.semiring;
    let starts: Vec<usize> = (0..wfa.states()).filter(|&q| !k.is_zero(&wfa.initial[q])).collect();
    if starts.is_empty() {
        return Vec::new();
    }
    let mut q = starts[rng.gen_range(0..starts.len())];
    let mut word = Vec::new();
    while word.len() < max_len {
        let edges = &wfa.delta[q];
        if edges.is_empty() || (!k.is_zero(&wfa.terminal[q]) && rng.gen_bool(1.0 / 3.0)) {
            break;
        }
        let (l, t, _) = &edges[rng.gen_range(0..edges.len())];
        word.push(alphabet.letter(*l).clone());
        q = *t as usize;
    }
    word
}
