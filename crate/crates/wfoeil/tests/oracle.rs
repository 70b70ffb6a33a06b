//! The library evaluator and compiled automata against the exhaustive oracle.

mod common;

use common::{all_words, case, case_with, catalog_letters, oracle, random_word, walk_word};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wfoeil::parse::parse_wfoeil;
use wfoeil::semiring::DEFAULT_SEED;
use wfoeil::{
    catalog_words, translate_wfoeil, wfoeil_eval, Architecture, Assignment, Semiring, TranslateOptions, Value,
};

/// Master/Slave over ℕ with k_m = 2 and k_s = 3, frozen from the oracle.
const MASTER_SLAVE_PER_WORD: u64 = 36;
const MASTER_SLAVE_TOTAL: u64 = 144;

#[test]
fn master_slave_fixture() {
    let weights = [("k_m", Value::nat(2)), ("k_s", Value::nat(3))];
    let c = case_with(Architecture::MasterSlave, Semiring::Natural, &[2, 2], &weights);
    let k = Semiring::Natural;
    let wfa = translate_wfoeil(&c.view, &c.alphabet, &Assignment::new(), &c.sentence, &TranslateOptions::default()).unwrap();
    let mut total = k.zero();
    let mut oracle_total = k.zero();
    for (label, w) in catalog_words(Architecture::MasterSlave, &c.view.r).unwrap() {
        let expected = oracle::eval(&c.view, &w, &c.sentence);
        assert_eq!(expected, Value::nat(MASTER_SLAVE_PER_WORD), "{label}");
        assert_eq!(wfoeil_eval(&c.view, &Assignment::new(), &w, &c.sentence).unwrap(), expected, "{label}");
        assert_eq!(wfa.behavior(&c.alphabet.encode(&w).unwrap()).unwrap(), expected, "{label}");
        total = k.add(&total, &wfoeil_eval(&c.view, &Assignment::new(), &w, &c.sentence).unwrap());
        oracle_total = k.add(&oracle_total, &expected);
    }
    assert_eq!(oracle_total, Value::nat(MASTER_SLAVE_TOTAL));
    assert_eq!(total, Value::nat(MASTER_SLAVE_TOTAL));
}

#[test]
fn blackboard_weight_product() {
    // distinct primes make the product identify every factor
    let names = ["k_d", "k_a", "k_r", "k_l", "k_e", "k_n", "k_t", "k_w"];
    let primes = [2u64, 3, 5, 7, 11, 13, 17, 19];
    let weights: Vec<(&str, Value)> = names.iter().zip(primes).map(|(n, p)| (*n, Value::nat(p))).collect();
    let c = case_with(Architecture::Blackboard, Semiring::Natural, &[1, 1, 3], &weights);
    let w1 = catalog_words(Architecture::Blackboard, &c.view.r).unwrap().remove(0).1;
    // k_d k_r · (k_d k_n)^3 · (k_l k_t)^2 · (k_e k_w k_a)^2
    let (d, a, r, l, e, n, t, w): (u64, u64, u64, u64, u64, u64, u64, u64) = (2, 3, 5, 7, 11, 13, 17, 19);
    let closed = d * r * (d * n).pow(3) * (l * t).pow(2) * (e * w * a).pow(2);
    assert_eq!(oracle::eval(&c.view, &w1, &c.sentence), Value::nat(closed));
    assert_eq!(wfoeil_eval(&c.view, &Assignment::new(), &w1, &c.sentence).unwrap(), Value::nat(closed));
}

#[test]
fn interaction_counts() {
    for (id, r, expected) in [
        (Architecture::MasterSlave, vec![2, 2], 15),
        (Architecture::Star, vec![5], 31),
        (Architecture::Repository, vec![1, 4], 31),
        (Architecture::PipesFilters, vec![4, 3], 2186),
    ] {
        let c = case(id, Semiring::Boolean, &r);
        assert_eq!(oracle::interactions(&c.view).len(), expected, "{id}");
        assert_eq!(c.alphabet.len(), expected, "{id}");
    }
}

#[test]
fn catalog_words_match_oracle() {
    for id in Architecture::ALL {
        if id == Architecture::PublishSubscribe {
            continue;
        }
        let c = case(id, Semiring::Natural, &id.instances().0);
        for (label, w) in catalog_words(id, &c.view.r).unwrap() {
            if w.len() > 9 {
                continue;
            }
            let expected = oracle::eval(&c.view, &w, &c.sentence);
            let got = wfoeil_eval(&c.view, &Assignment::new(), &w, &c.sentence).unwrap();
            assert_eq!(got, expected, "{id} {label}");
        }
    }
}

#[test]
fn random_words_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    for id in Architecture::ALL {
        let c = case(id, Semiring::Natural, &id.instances().0);
        let preferred = catalog_letters(id);
        for _ in 0..25 {
            let w = random_word(&mut rng, &c.alphabet, &preferred, 3);
            let expected = oracle::eval(&c.view, &w, &c.sentence);
            let got = wfoeil_eval(&c.view, &Assignment::new(), &w, &c.sentence).unwrap();
            assert_eq!(got, expected, "{id} {}", c.view.render_word(&w));
        }
    }
}

/// Sentences over Master/Slave exercising every connective and quantifier.
const SENTENCES: &[&str] = &[
    "3",
    "true",
    "hashw(p_m(1), p_s(1)) (.) 2",
    "2 (.) 3",
    "hashw(p_m(1), p_s(2)) (~) hashw(p_m(2), p_s(1))",
    "Sum x:master . Sum y:slave . hashw(p_m(x), p_s(y))",
    "Prod x:master . (true * p_m(x) * true)",
    "SumC x:slave . Sum y:master . hashw(p_m(y), p_s(x))",
    "ProdC x:slave . Sum y:master . hashw(p_m(y), p_s(x))",
    "SumS x:master . (hashw(p_m(x)) (+) hashw(p_m(x), p_s(1)))",
    "ProdS x:master . ProdS y:slave . hashw(p_m(x), p_s(y))",
    "Sum x:master . Sum y:master (x != y) . (hashw(p_m(x)) (.) hashw(p_m(y)))",
    "Sum x:master . Sum y:master . (x = y) (x) hashw(p_m(x), p_m(y))",
    "(E x:master . (p_m(x) * !p_s(1))) (x) 5",
    "(A x:slave . Ec y:master . (true * (p_m(y) & p_s(x)) * true)) (+) 1",
    "As x:master . !(p_m(x) * p_m(x))",
    "Es x:slave . (p_s(x) ~ true)",
    "Sum x:master . Sum y:master . hashw(p_m(x), p_m(y), p_s(1))",
];

#[test]
fn connectives_match_oracle() {
    for semiring in [Semiring::Natural, Semiring::MinPlus, Semiring::Rational] {
        let weights = [("k_m", semiring.parse_value("2").unwrap()), ("k_s", semiring.parse_value("3").unwrap())];
        let c = case_with(Architecture::MasterSlave, semiring, &[2, 2], &weights);
        let letters: Vec<_> = c.alphabet.letters().iter().take(6).cloned().chain(catalog_letters(Architecture::MasterSlave)).collect();
        let words = all_words(&letters, 3);
        for text in SENTENCES {
            let f = parse_wfoeil(text, &c.view.system).unwrap_or_else(|e| panic!("{text}: {e}"));
            let wfa = translate_wfoeil(&c.view, &c.alphabet, &Assignment::new(), &f, &TranslateOptions::default()).unwrap();
            for w in &words {
                let expected = oracle::eval(&c.view, w, &f);
                let got = wfoeil_eval(&c.view, &Assignment::new(), w, &f).unwrap();
                assert!(semiring.equal(&got, &expected), "{semiring} `{text}` on {}", c.view.render_word(w));
                let automaton = wfa.behavior(&c.alphabet.encode(w).unwrap()).unwrap();
                assert!(semiring.equal(&automaton, &expected), "{semiring} `{text}` compiled, on {}", c.view.render_word(w));
            }
        }
    }
}

#[test]
fn small_instantiations_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED ^ 1);
    for (id, r) in [
        (Architecture::Star, vec![3]),
        (Architecture::PipesFilters, vec![2, 1]),
        (Architecture::Blackboard, vec![1, 1, 2]),
        (Architecture::RequestResponse, vec![1, 1, 1, 1]),
        (Architecture::PublishSubscribe, vec![1, 1, 2]),
    ] {
        let c = case(id, Semiring::Rational, &r);
        let wfa = translate_wfoeil(&c.view, &c.alphabet, &Assignment::new(), &c.sentence, &TranslateOptions::default()).unwrap();
        let mut nonzero = 0;
        for _ in 0..60 {
            let w = if rng.gen_bool(0.5) {
                walk_word(&mut rng, &wfa, &c.alphabet, 7)
            } else {
                random_word(&mut rng, &c.alphabet, &[], 4)
            };
            let expected = oracle::eval(&c.view, &w, &c.sentence);
            assert_eq!(wfoeil_eval(&c.view, &Assignment::new(), &w, &c.sentence).unwrap(), expected, "{id}");
            assert_eq!(wfa.behavior(&c.alphabet.encode(&w).unwrap()).unwrap(), expected, "{id}");
            nonzero += usize::from(!Semiring::Rational.is_zero(&expected));
        }
        println!("{id} r={:?}: {nonzero} of 60 random words nonzero", r);
    }
}
