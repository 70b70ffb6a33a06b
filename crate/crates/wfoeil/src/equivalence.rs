//! Equivalence of weighted automata: an exact decision over ℚ and a
//! bounded comparison over any semiring.
//!
//! The exact procedure spans the forward vectors `in · M(w)` of the
//! difference automaton, exploring words in length-lexicographic order and
//! keeping a reduced echelon basis. The automata are equivalent exactly when
//! every basis word gets value zero; the first word that does not is a
//! shortest witness.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::logic::{Assignment, Wfoeil};
use crate::semiring::{Semiring, Value};
use crate::system::{Alphabet, Instantiation};
use crate::translate::{translate_wfoeil, TranslateOptions};
use crate::wfa::Wfa;

/// A word on which two automata differ, with both values.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub word: Vec<u32>,
    pub left: Value,
    pub right: Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivVerdict {
    pub equivalent: bool,
    pub witness: Option<Witness>,
    /// Dimension of the explored forward space (0 for bounded checks).
    pub basis_size: usize,
    /// `Some(n)` when only words of length at most `n` were compared.
    pub bound: Option<usize>,
}

type Sparse = BTreeMap<u32, BigRational>;

struct RatWfa {
    initial: Vec<BigRational>,
    terminal: Vec<BigRational>,
    delta: Vec<Vec<(u32, u32, BigRational)>>,
}

fn rational(a: &Wfa) -> Result<RatWfa> {
    if !matches!(a.semiring, Semiring::Rational | Semiring::Natural) {
        return Err(Error::Capability(format!(
            "exact equivalence needs an exact skew field such as rational; {} is not one, use a bounded check",
            a.semiring
        )));
    }
    let conv = |v: &Value| v.to_rational().ok_or_else(|| Error::Capability("weight is not rational".into()));
    Ok(RatWfa {
        initial: a.initial.iter().map(conv).collect::<Result<_>>()?,
        terminal: a.terminal.iter().map(conv).collect::<Result<_>>()?,
        delta: a
            .delta
            .iter()
            .map(|row| row.iter().map(|(l, t, w)| Ok((*l, *t, conv(w)?))).collect::<Result<_>>())
            .collect::<Result<_>>()?,
    })
}

fn check_pair(a: &Wfa, b: &Wfa) -> Result<()> {
    if a.letters != b.letters {
        return Err(Error::Alphabet(format!(
            "automata over different alphabets ({} and {} letters)",
            a.letters, b.letters
        )));
    }
    Ok(())
}

fn witness(a: &Wfa, b: &Wfa, word: Vec<u32>) -> Result<Witness> {
    Ok(Witness { left: a.behavior(&word)?, right: b.behavior(&word)?, word })
}

/// Eliminates the pivots of `basis` from `v`. Every row's pivot is its
/// smallest column, so one left-to-right pass suffices.
fn reduce(basis: &BTreeMap<u32, Sparse>, mut v: Sparse) -> Sparse {
    let mut from = 0u32;
    loop {
        let Some((&col, coeff)) = v.range(from..).find(|(c, _)| basis.contains_key(c)) else {
            return v;
        };
        let coeff = coeff.clone();
        for (c, x) in &basis[&col] {
            let e = v.entry(*c).or_insert_with(BigRational::zero);
            *e -= &coeff * x;
            if e.is_zero() {
                v.remove(c);
            }
        }
        from = col + 1;
    }
}

/// Decides `‖A₁‖ = ‖A₂‖` over ℚ; ℕ-weighted automata are read in ℚ.
pub fn decide_equiv(a: &Wfa, b: &Wfa) -> Result<EquivVerdict> {
    check_pair(a, b)?;
    let (x, y) = (rational(a)?, rational(b)?);
    let n1 = x.initial.len() as u32;
    let mut delta = x.delta;
    delta.extend(y.delta.into_iter().map(|row| row.into_iter().map(|(l, t, w)| (l, t + n1, w)).collect()));
    let terminal: Vec<BigRational> = x.terminal.into_iter().chain(y.terminal).collect();
    let start: Sparse = x
        .initial
        .into_iter()
        .chain(y.initial.into_iter().map(|v| -v))
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .map(|(i, v)| (i as u32, v))
        .collect();
    let dot = |v: &Sparse| v.iter().fold(BigRational::zero(), |acc, (i, x)| acc + x * &terminal[*i as usize]);

    let mut basis: BTreeMap<u32, Sparse> = BTreeMap::new();
    let mut queue: VecDeque<(Sparse, Vec<u32>)> = VecDeque::new();
    let add = |v: Sparse, word: Vec<u32>, basis: &mut BTreeMap<u32, Sparse>, queue: &mut VecDeque<(Sparse, Vec<u32>)>| {
        let r = reduce(basis, v.clone());
        let Some((&pivot, p)) = r.iter().next() else {
            return false;
        };
        let inv = BigRational::one() / p;
        let r: Sparse = r.into_iter().map(|(c, x)| (c, x * &inv)).collect();
        basis.insert(pivot, r);
        queue.push_back((v, word));
        true
    };
    if add(start, Vec::new(), &mut basis, &mut queue) && !dot(&queue[0].0).is_zero() {
        return Ok(EquivVerdict { equivalent: false, witness: Some(witness(a, b, Vec::new())?), basis_size: 1, bound: None });
    }
    while let Some((v, word)) = queue.pop_front() {
        let mut next: BTreeMap<u32, Sparse> = BTreeMap::new();
        for (q, c) in &v {
            for (l, t, w) in &delta[*q as usize] {
                let e = next.entry(*l).or_default().entry(*t).or_insert_with(BigRational::zero);
                *e += c * w;
            }
        }
        for (l, mut u) in next {
            u.retain(|_, x| !x.is_zero());
            if u.is_empty() {
                continue;
            }
            let mut w2 = word.clone();
            w2.push(l);
            let value = dot(&u);
            if add(u, w2.clone(), &mut basis, &mut queue) && !value.is_zero() {
                let size = basis.len();
                return Ok(EquivVerdict { equivalent: false, witness: Some(witness(a, b, w2)?), basis_size: size, bound: None });
            }
        }
    }
    Ok(EquivVerdict { equivalent: true, witness: None, basis_size: basis.len(), bound: None })
}

/// Default cap on the prefixes explored by [`bounded_equiv`].
pub const DEFAULT_NODE_LIMIT: usize = 2_000_000;

fn step(a: &Wfa, v: &HashMap<u32, Value>, letter_sets: &mut BTreeMap<u32, HashMap<u32, Value>>) {
    let k = a.semiring;
    for (q, x) in v {
        for (l, t, w) in &a.delta[*q as usize] {
            let e = letter_sets.entry(*l).or_default().entry(*t).or_insert_with(|| k.zero());
            *e = k.add(e, &k.mul(x, w));
        }
    }
}

fn value(a: &Wfa, v: &HashMap<u32, Value>) -> Value {
    let k = a.semiring;
    v.iter().fold(k.zero(), |acc, (q, x)| k.add(&acc, &k.mul(x, &a.terminal[*q as usize])))
}

/// Compares the behaviors on every word of length at most `max_len`, in
/// length-lexicographic order. Prefixes along which both automata have no
/// path are skipped, since every extension has value zero on both sides.
pub fn bounded_equiv(a: &Wfa, b: &Wfa, max_len: usize, node_limit: usize) -> Result<EquivVerdict> {
    check_pair(a, b)?;
    if a.semiring != b.semiring {
        return Err(Error::Alphabet(format!("semirings differ: {} and {}", a.semiring, b.semiring)));
    }
    let k = a.semiring;
    let support = |w: &Wfa| -> HashMap<u32, Value> {
        w.initial.iter().enumerate().filter(|(_, x)| !k.is_zero(x)).map(|(q, x)| (q as u32, x.clone())).collect()
    };
    let mut level: Vec<(Vec<u32>, HashMap<u32, Value>, HashMap<u32, Value>)> = vec![(Vec::new(), support(a), support(b))];
    let mut visited = 0usize;
    for len in 0..=max_len {
        let mut next_level = Vec::new();
        for (word, u, v) in &level {
            visited += 1;
            if visited > node_limit {
                return Err(Error::Resource(format!(
                    "bounded check visits more than {node_limit} words; lower the bound"
                )));
            }
            if !k.equal(&value(a, u), &value(b, v)) {
                return Ok(EquivVerdict {
                    equivalent: false,
                    witness: Some(witness(a, b, word.clone())?),
                    basis_size: 0,
                    bound: Some(max_len),
                });
            }
            if len == max_len {
                continue;
            }
            let mut left = BTreeMap::new();
            let mut right = BTreeMap::new();
            step(a, u, &mut left);
            step(b, v, &mut right);
            let mut letters: Vec<u32> = left.keys().chain(right.keys()).copied().collect();
            letters.sort_unstable();
            letters.dedup();
            for l in letters {
                let mut u2 = left.remove(&l).unwrap_or_default();
                let mut v2 = right.remove(&l).unwrap_or_default();
                u2.retain(|_, x| !k.is_zero(x));
                v2.retain(|_, x| !k.is_zero(x));
                if u2.is_empty() && v2.is_empty() {
                    continue;
                }
                let mut w2 = word.clone();
                w2.push(l);
                next_level.push((w2, u2, v2));
            }
        }
        level = next_level;
    }
    Ok(EquivVerdict { equivalent: true, witness: None, basis_size: 0, bound: Some(max_len) })
}

/// Translates two sentences and decides the equivalence of their series.
pub fn sentence_equiv(
    view: &Instantiation,
    alphabet: &Alphabet,
    left: &Wfoeil,
    right: &Wfoeil,
    opts: &TranslateOptions,
) -> Result<EquivVerdict> {
    let k = view.semiring();
    if !matches!(k, Semiring::Rational | Semiring::Natural) {
        return Err(Error::Capability(format!(
            "exact equivalence needs an exact skew field such as rational; {k} is not one, use a bounded check"
        )));
    }
    let sigma = Assignment::new();
    let a = translate_wfoeil(view, alphabet, &sigma, left, opts)?;
    let b = translate_wfoeil(view, alphabet, &sigma, right, opts)?;
    decide_equiv(&a, &b)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// One state with a loop of weight `k` on every letter, in = ter = 1.
    fn looped(semiring: Semiring, letters: usize, k: &str) -> Wfa {
        let mut a = Wfa::empty(semiring, letters, 1);
        a.initial[0] = semiring.one();
        a.terminal[0] = semiring.one();
        let w = semiring.parse_value(k).unwrap();
        a.delta[0] = (0..letters as u32).map(|l| (l, 0, w.clone())).collect();
        a
    }

    #[test]
    fn reflexive() {
        let a = looped(Semiring::Rational, 2, "1/2");
        let v = decide_equiv(&a, &a).unwrap();
        assert!(v.equivalent);
        assert_eq!(v.witness, None);
        assert_eq!(v.basis_size, 1);
    }

    #[test]
    fn perturbed_weight_gives_shortest_witness() {
        let a = looped(Semiring::Rational, 2, "1/2");
        let mut b = a.clone();
        b.delta[0][1].2 = Value::rat(1, 3);
        let v = decide_equiv(&a, &b).unwrap();
        assert!(!v.equivalent);
        let w = v.witness.unwrap();
        assert_eq!(w.word, vec![1]);
        assert_eq!(w.left, Value::rat(1, 2));
        assert_eq!(w.right, Value::rat(1, 3));
    }

    #[test]
    fn split_state_is_equivalent() {
        // two states splitting the initial weight 2 = 1 + 1
        let k = Semiring::Natural;
        let a = looped(k, 1, "3");
        let mut a2 = a.clone();
        a2.initial[0] = Value::nat(2);
        let mut b = Wfa::empty(k, 1, 2);
        for q in 0..2 {
            b.initial[q] = k.one();
            b.terminal[q] = k.one();
            b.delta[q] = vec![(0, q as u32, Value::nat(3))];
        }
        let v = decide_equiv(&a2, &b).unwrap();
        assert!(v.equivalent);
        assert_eq!(v.basis_size, 1);
        assert!(!decide_equiv(&a, &b).unwrap().equivalent);
    }

    #[test]
    fn tropical_needs_bounded_check() {
        let a = looped(Semiring::MinPlus, 1, "1");
        assert!(matches!(decide_equiv(&a, &a), Err(Error::Capability(_))));
        let mut b = a.clone();
        // differs only on words of length at least 3
        b.delta[0] = vec![(0, 1, Semiring::MinPlus.parse_value("1").unwrap())];
        b.initial.push(Semiring::MinPlus.zero());
        b.terminal.push(Semiring::MinPlus.one());
        b.delta.push(vec![(0, 2, Semiring::MinPlus.parse_value("1").unwrap())]);
        b.initial.push(Semiring::MinPlus.zero());
        b.terminal.push(Semiring::MinPlus.one());
        b.delta.push(Vec::new());
        let v = bounded_equiv(&a, &b, 5, DEFAULT_NODE_LIMIT).unwrap();
        assert!(!v.equivalent);
        assert_eq!(v.witness.unwrap().word, vec![0, 0, 0]);
        assert!(bounded_equiv(&a, &b, 2, DEFAULT_NODE_LIMIT).unwrap().equivalent);
    }

    #[test]
    fn bound_zero_compares_the_empty_word() {
        let a = looped(Semiring::Natural, 2, "1");
        let mut b = a.clone();
        b.delta[0].clear();
        let v = bounded_equiv(&a, &b, 0, DEFAULT_NODE_LIMIT).unwrap();
        assert!(v.equivalent);
        assert_eq!(v.bound, Some(0));
        assert!(!bounded_equiv(&a, &b, 1, DEFAULT_NODE_LIMIT).unwrap().equivalent);
    }

    #[test]
    fn node_limit_is_a_resource_error() {
        let a = looped(Semiring::Natural, 2, "1");
        assert!(matches!(bounded_equiv(&a, &a, 20, 100), Err(Error::Resource(_))));
    }

    #[test]
    fn alphabet_mismatch() {
        let a = looped(Semiring::Rational, 2, "1");
        let b = looped(Semiring::Rational, 3, "1");
        assert!(matches!(decide_equiv(&a, &b), Err(Error::Alphabet(_))));
    }
}
