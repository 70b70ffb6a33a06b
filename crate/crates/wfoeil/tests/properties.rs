mod common;

use proptest::prelude::*;

use common::case_with;
use wfoeil::semiring::ALL_SEMIRINGS;
use wfoeil::{translate_wfoeil, wfoeil_eval, Architecture, Assignment, Semiring, TranslateOptions, Value};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rationals_round_trip(n in -1000i64..1000, d in 1i64..50) {
        let k = Semiring::Rational;
        let v = Value::rat(n, d);
        prop_assert_eq!(k.parse_value(&k.render(&v)).unwrap(), v);
    }

    #[test]
    fn rendered_values_parse_back(s in 0usize..7, a in 0u32..20, b in 1u32..20) {
        let k = ALL_SEMIRINGS[s];
        for text in [a.to_string(), format!("{a}/{b}"), format!("0.{a}")] {
            if let Ok(v) = k.parse_value(&text) {
                prop_assert!(k.equal(&k.parse_value(&k.render(&v)).unwrap(), &v), "{k} {text}");
            }
        }
    }

    #[test]
    fn master_slave_eval_matches_automaton(
        km in 1u64..6,
        ks in 1u64..6,
        letters in proptest::collection::vec(0u32..15, 0..5),
    ) {
        let weights = [("k_m", Value::nat(km)), ("k_s", Value::nat(ks))];
        let c = case_with(Architecture::MasterSlave, Semiring::Natural, &[2, 2], &weights);
        let wfa = translate_wfoeil(&c.view, &c.alphabet, &Assignment::new(), &c.sentence, &TranslateOptions::default())
            .unwrap();
        let w = c.alphabet.decode(&letters);
        let direct = wfoeil_eval(&c.view, &Assignment::new(), &w, &c.sentence).unwrap();
        prop_assert_eq!(wfa.behavior(&letters).unwrap(), direct);
    }
}
