//! Commutative semirings used as weight domains.
//!
//! A [`Semiring`] is a runtime handle selecting one of the seven built-in
//! carriers; all weights flow through [`Value`]. Exact carriers compare by
//! equality, floating carriers with an absolute tolerance of [`TOLERANCE`].

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Absolute tolerance used when comparing values of inexact carriers.
pub const TOLERANCE: f64 = 1e-9;

/// Extended nonnegative real used by the min-plus and max-plus carriers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ext {
    Finite(f64),
    PosInf,
    NegInf,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Bool(bool),
    Nat(BigUint),
    Rat(BigRational),
    Ext(Ext),
    /// Real in `[0, 1]` (Viterbi and fuzzy).
    Unit(f64),
}

impl Value {
    pub fn nat(n: u64) -> Value {
        Value::Nat(BigUint::from(n))
    }

    pub fn rat(num: i64, den: i64) -> Value {
        Value::Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// Exact rational view of `Nat` and `Rat` values.
    pub fn to_rational(&self) -> Option<BigRational> {
        match self {
            Value::Nat(n) => Some(BigRational::from_integer(BigInt::from(n.clone()))),
            Value::Rat(q) => Some(q.clone()),
            Value::Bool(b) => Some(if *b { BigRational::one() } else { BigRational::zero() }),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Semiring {
    Boolean,
    Natural,
    Rational,
    MinPlus,
    MaxPlus,
    Viterbi,
    Fuzzy,
}

pub const ALL_SEMIRINGS: [Semiring; 7] = [
    Semiring::Boolean,
    Semiring::Natural,
    Semiring::Rational,
    Semiring::MinPlus,
    Semiring::MaxPlus,
    Semiring::Viterbi,
    Semiring::Fuzzy,
];

/// Looks up a built-in semiring by name.
pub fn builtin(name: &str) -> Result<Semiring> {
    name.parse()
}

impl FromStr for Semiring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Semiring> {
        Ok(match s.trim() {
            "boolean" | "bool" => Semiring::Boolean,
            "natural" | "nat" => Semiring::Natural,
            "rational" | "rat" => Semiring::Rational,
            "min-plus" | "minplus" | "tropical" => Semiring::MinPlus,
            "max-plus" | "maxplus" | "arctic" => Semiring::MaxPlus,
            "viterbi" => Semiring::Viterbi,
            "fuzzy" => Semiring::Fuzzy,
            other => return Err(Error::Config(format!("unknown semiring `{other}`"))),
        })
    }
}

impl fmt::Display for Semiring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn ext_of(v: &Value) -> Ext {
    match v {
        Value::Ext(e) => *e,
        other => panic!("expected an extended real, got {other:?}"),
    }
}

fn unit_of(v: &Value) -> f64 {
    match v {
        Value::Unit(x) => *x,
        other => panic!("expected a unit-interval real, got {other:?}"),
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOLERANCE
}

impl Semiring {
    pub fn name(self) -> &'static str {
        match self {
            Semiring::Boolean => "boolean",
            Semiring::Natural => "natural",
            Semiring::Rational => "rational",
            Semiring::MinPlus => "min-plus",
            Semiring::MaxPlus => "max-plus",
            Semiring::Viterbi => "viterbi",
            Semiring::Fuzzy => "fuzzy",
        }
    }

    pub fn is_skew_field(self) -> bool {
        self == Semiring::Rational
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Semiring::Boolean | Semiring::Natural | Semiring::Rational)
    }

    pub fn zero(self) -> Value {
        match self {
            Semiring::Boolean => Value::Bool(false),
            Semiring::Natural => Value::Nat(BigUint::zero()),
            Semiring::Rational => Value::Rat(BigRational::zero()),
            Semiring::MinPlus => Value::Ext(Ext::PosInf),
            Semiring::MaxPlus => Value::Ext(Ext::NegInf),
            Semiring::Viterbi | Semiring::Fuzzy => Value::Unit(0.0),
        }
    }

    pub fn one(self) -> Value {
        match self {
            Semiring::Boolean => Value::Bool(true),
            Semiring::Natural => Value::Nat(BigUint::one()),
            Semiring::Rational => Value::Rat(BigRational::one()),
            Semiring::MinPlus | Semiring::MaxPlus => Value::Ext(Ext::Finite(0.0)),
            Semiring::Viterbi | Semiring::Fuzzy => Value::Unit(1.0),
        }
    }

    pub fn add(self, a: &Value, b: &Value) -> Value {
        match (self, a, b) {
            (Semiring::Boolean, Value::Bool(x), Value::Bool(y)) => Value::Bool(*x || *y),
            (Semiring::Natural, Value::Nat(x), Value::Nat(y)) => Value::Nat(x + y),
            (Semiring::Rational, Value::Rat(x), Value::Rat(y)) => Value::Rat(x + y),
            (Semiring::MinPlus, _, _) => Value::Ext(match (ext_of(a), ext_of(b)) {
                (Ext::PosInf, e) | (e, Ext::PosInf) => e,
                (Ext::Finite(x), Ext::Finite(y)) => Ext::Finite(x.min(y)),
                (e, _) => e,
            }),
            (Semiring::MaxPlus, _, _) => Value::Ext(match (ext_of(a), ext_of(b)) {
                (Ext::NegInf, e) | (e, Ext::NegInf) => e,
                (Ext::Finite(x), Ext::Finite(y)) => Ext::Finite(x.max(y)),
                (e, _) => e,
            }),
            (Semiring::Viterbi | Semiring::Fuzzy, _, _) => Value::Unit(unit_of(a).max(unit_of(b))),
            _ => panic!("values {a:?} and {b:?} do not belong to {self}"),
        }
    }

    pub fn mul(self, a: &Value, b: &Value) -> Value {
        match (self, a, b) {
            (Semiring::Boolean, Value::Bool(x), Value::Bool(y)) => Value::Bool(*x && *y),
            (Semiring::Natural, Value::Nat(x), Value::Nat(y)) => Value::Nat(x * y),
            (Semiring::Rational, Value::Rat(x), Value::Rat(y)) => Value::Rat(x * y),
            (Semiring::MinPlus, _, _) => Value::Ext(match (ext_of(a), ext_of(b)) {
                (Ext::Finite(x), Ext::Finite(y)) => Ext::Finite(x + y),
                _ => Ext::PosInf,
            }),
            (Semiring::MaxPlus, _, _) => Value::Ext(match (ext_of(a), ext_of(b)) {
                (Ext::Finite(x), Ext::Finite(y)) => Ext::Finite(x + y),
                _ => Ext::NegInf,
            }),
            (Semiring::Viterbi, _, _) => Value::Unit(unit_of(a) * unit_of(b)),
            (Semiring::Fuzzy, _, _) => Value::Unit(unit_of(a).min(unit_of(b))),
            _ => panic!("values {a:?} and {b:?} do not belong to {self}"),
        }
    }

    pub fn sum<'a>(self, values: impl IntoIterator<Item = &'a Value>) -> Value {
        values.into_iter().fold(self.zero(), |acc, v| self.add(&acc, v))
    }

    pub fn product<'a>(self, values: impl IntoIterator<Item = &'a Value>) -> Value {
        values.into_iter().fold(self.one(), |acc, v| self.mul(&acc, v))
    }

    /// Equality: exact for exact carriers, within [`TOLERANCE`] otherwise.
    pub fn equal(self, a: &Value, b: &Value) -> bool {
        match (a, b) {
            (Value::Ext(x), Value::Ext(y)) => match (x, y) {
                (Ext::Finite(p), Ext::Finite(q)) => close(*p, *q),
                _ => x == y,
            },
            (Value::Unit(x), Value::Unit(y)) => close(*x, *y),
            _ => a == b,
        }
    }

    pub fn is_zero(self, v: &Value) -> bool {
        match v {
            Value::Bool(b) => !b,
            Value::Nat(n) => n.is_zero(),
            Value::Rat(q) => q.is_zero(),
            Value::Ext(e) => matches!(
                (self, e),
                (Semiring::MinPlus, Ext::PosInf) | (Semiring::MaxPlus, Ext::NegInf)
            ),
            Value::Unit(x) => *x == 0.0,
        }
    }

    pub fn is_one(self, v: &Value) -> bool {
        *v == self.one()
    }

    /// Whether `v` belongs to this carrier.
    pub fn contains(self, v: &Value) -> bool {
        match (self, v) {
            (Semiring::Boolean, Value::Bool(_))
            | (Semiring::Natural, Value::Nat(_))
            | (Semiring::Rational, Value::Rat(_)) => true,
            (Semiring::MinPlus, Value::Ext(e)) => match e {
                Ext::Finite(x) => x.is_finite() && *x >= 0.0,
                Ext::PosInf => true,
                Ext::NegInf => false,
            },
            (Semiring::MaxPlus, Value::Ext(e)) => match e {
                Ext::Finite(x) => x.is_finite() && *x >= 0.0,
                Ext::NegInf => true,
                Ext::PosInf => false,
            },
            (Semiring::Viterbi | Semiring::Fuzzy, Value::Unit(x)) => (0.0..=1.0).contains(x),
            _ => false,
        }
    }

    /// Parses a weight literal: an integer, a decimal fraction, `a/b`,
    /// `inf` or `-inf`, interpreted in this carrier.
    pub fn parse_value(self, text: &str) -> Result<Value> {
        let text = text.trim();
        let bad = |why: &str| Error::Config(format!("bad {self} weight `{text}`: {why}"));
        if text == "inf" || text == "-inf" || text == "+inf" {
            let e = if text == "-inf" { Ext::NegInf } else { Ext::PosInf };
            let v = Value::Ext(e);
            return if self.contains(&v) { Ok(v) } else { Err(bad("infinity not in carrier")) };
        }
        if self == Semiring::Boolean {
            return match text {
                "0" | "false" => Ok(Value::Bool(false)),
                "1" | "true" => Ok(Value::Bool(true)),
                _ => Err(bad("expected 0 or 1")),
            };
        }
        let q = parse_rational(text).ok_or_else(|| bad("not a number"))?;
        let v = match self {
            Semiring::Natural => {
                if !q.is_integer() || q.is_negative() {
                    return Err(bad("expected a nonnegative integer"));
                }
                Value::Nat(q.to_integer().to_biguint().expect("nonnegative"))
            }
            Semiring::Rational => Value::Rat(q),
            Semiring::MinPlus | Semiring::MaxPlus => {
                Value::Ext(Ext::Finite(q.to_f64().ok_or_else(|| bad("out of range"))?))
            }
            Semiring::Viterbi | Semiring::Fuzzy => Value::Unit(q.to_f64().ok_or_else(|| bad("out of range"))?),
            Semiring::Boolean => unreachable!(),
        };
        if self.contains(&v) {
            Ok(v)
        } else {
            Err(bad("outside the carrier"))
        }
    }

    /// Canonical text of a value; [`Semiring::parse_value`] reads it back.
    pub fn render(self, v: &Value) -> String {
        match v {
            Value::Bool(b) => if *b { "1" } else { "0" }.to_string(),
            Value::Nat(n) => n.to_string(),
            Value::Rat(q) => {
                if q.is_integer() {
                    q.numer().to_string()
                } else {
                    format!("{}/{}", q.numer(), q.denom())
                }
            }
            Value::Ext(Ext::PosInf) => "inf".to_string(),
            Value::Ext(Ext::NegInf) => "-inf".to_string(),
            Value::Ext(Ext::Finite(x)) | Value::Unit(x) => render_float(*x),
        }
    }

    /// Converts an exact rational into this carrier when it fits.
    pub fn from_rational(self, q: &BigRational) -> Option<Value> {
        let v = match self {
            Semiring::Boolean => {
                if q.is_zero() {
                    Value::Bool(false)
                } else if q.is_one() {
                    Value::Bool(true)
                } else {
                    return None;
                }
            }
            Semiring::Natural => {
                if !q.is_integer() || q.is_negative() {
                    return None;
                }
                Value::Nat(q.to_integer().to_biguint()?)
            }
            Semiring::Rational => Value::Rat(q.clone()),
            Semiring::MinPlus | Semiring::MaxPlus => Value::Ext(Ext::Finite(q.to_f64()?)),
            Semiring::Viterbi | Semiring::Fuzzy => Value::Unit(q.to_f64()?),
        };
        self.contains(&v).then_some(v)
    }

    /// Draws a random carrier element; used by the law suite and tests.
    pub fn sample(self, rng: &mut impl Rng) -> Value {
        let special = rng.gen_range(0..8);
        match self {
            Semiring::Boolean => Value::Bool(rng.gen()),
            Semiring::Natural => match special {
                0 => self.zero(),
                1 => self.one(),
                _ => Value::nat(rng.gen_range(0..1_000_000)),
            },
            Semiring::Rational => match special {
                0 => self.zero(),
                1 => self.one(),
                _ => Value::rat(rng.gen_range(-1000..=1000), rng.gen_range(1..=97)),
            },
            Semiring::MinPlus => match special {
                0 => self.zero(),
                1 => self.one(),
                _ => Value::Ext(Ext::Finite(rng.gen_range(0.0..1000.0))),
            },
            Semiring::MaxPlus => match special {
                0 => self.zero(),
                1 => self.one(),
                _ => Value::Ext(Ext::Finite(rng.gen_range(0.0..1000.0))),
            },
            Semiring::Viterbi | Semiring::Fuzzy => match special {
                0 => self.zero(),
                1 => self.one(),
                _ => Value::Unit(rng.gen_range(0.0..=1.0)),
            },
        }
    }
}

fn render_float(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// Parses `12`, `-3`, `0.25`, `2/3` or `-1.5e2`-free decimals as an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    if body.is_empty() || !body.chars().all(|c| c.is_ascii_digit() || c == '.') {
        return None;
    }
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    let digits = format!("{int}{frac}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    let q = BigRational::new(numer, denom);
    Some(if neg { -q } else { q })
}

/// The operations a law check needs; implemented by [`Semiring`] and by
/// deliberately broken test doubles.
pub trait SemiringLaws {
    type Elem: Clone + fmt::Debug;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn equal(&self, a: &Self::Elem, b: &Self::Elem) -> bool;
    fn sample(&self, rng: &mut ChaCha8Rng) -> Self::Elem;
}

impl SemiringLaws for Semiring {
    type Elem = Value;
    fn zero(&self) -> Value {
        Semiring::zero(*self)
    }
    fn one(&self) -> Value {
        Semiring::one(*self)
    }
    fn add(&self, a: &Value, b: &Value) -> Value {
        Semiring::add(*self, a, b)
    }
    fn mul(&self, a: &Value, b: &Value) -> Value {
        Semiring::mul(*self, a, b)
    }
    fn equal(&self, a: &Value, b: &Value) -> bool {
        Semiring::equal(*self, a, b)
    }
    fn sample(&self, rng: &mut ChaCha8Rng) -> Value {
        Semiring::sample(*self, rng)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axiom {
    AddAssociative,
    AddCommutative,
    AddIdentity,
    MulAssociative,
    MulCommutative,
    MulIdentity,
    Distributive,
    ZeroAbsorbing,
}

impl Axiom {
    pub fn describe(self) -> &'static str {
        match self {
            Axiom::AddAssociative => "a+(b+c) = (a+b)+c",
            Axiom::AddCommutative => "a+b = b+a",
            Axiom::AddIdentity => "a+0 = a",
            Axiom::MulAssociative => "a*(b*c) = (a*b)*c",
            Axiom::MulCommutative => "a*b = b*a",
            Axiom::MulIdentity => "a*1 = a",
            Axiom::Distributive => "a*(b+c) = a*b+a*c",
            Axiom::ZeroAbsorbing => "a*0 = 0 = 0*a",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Violation<E> {
    pub axiom: Axiom,
    pub witness: (E, E, E),
}

/// Result of [`check_laws`]: the first witness found for each violated axiom.
#[derive(Clone, Debug)]
pub struct LawReport<E> {
    pub samples: usize,
    pub violations: Vec<Violation<E>>,
}

impl<E> LawReport<E> {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Default seed for randomized checks.
pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// Checks the commutative-semiring axioms on `samples` random triples.
pub fn check_laws<S: SemiringLaws>(spec: &S, samples: usize, seed: u64) -> LawReport<S::Elem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found: Vec<Violation<S::Elem>> = Vec::new();
    let zero = spec.zero();
    let one = spec.one();
    for _ in 0..samples.max(1) {
        let a = spec.sample(&mut rng);
        let b = spec.sample(&mut rng);
        let c = spec.sample(&mut rng);
        let checks = [
            (Axiom::AddAssociative, spec.equal(&spec.add(&a, &spec.add(&b, &c)), &spec.add(&spec.add(&a, &b), &c))),
            (Axiom::AddCommutative, spec.equal(&spec.add(&a, &b), &spec.add(&b, &a))),
            (Axiom::AddIdentity, spec.equal(&spec.add(&a, &zero), &a)),
            (Axiom::MulAssociative, spec.equal(&spec.mul(&a, &spec.mul(&b, &c)), &spec.mul(&spec.mul(&a, &b), &c))),
            (Axiom::MulCommutative, spec.equal(&spec.mul(&a, &b), &spec.mul(&b, &a))),
            (Axiom::MulIdentity, spec.equal(&spec.mul(&a, &one), &a)),
            (
                Axiom::Distributive,
                spec.equal(&spec.mul(&a, &spec.add(&b, &c)), &spec.add(&spec.mul(&a, &b), &spec.mul(&a, &c))),
            ),
            (
                Axiom::ZeroAbsorbing,
                spec.equal(&spec.mul(&a, &zero), &zero) && spec.equal(&spec.mul(&zero, &a), &zero),
            ),
        ];
        for (axiom, holds) in checks {
            if !holds && !found.iter().any(|v| v.axiom == axiom) {
                found.push(Violation { axiom, witness: (a.clone(), b.clone(), c.clone()) });
            }
        }
    }
    found.sort_by(|x, y| x.axiom.cmp(&y.axiom));
    LawReport { samples: samples.max(1), violations: found }
}

/// Total order on values of one carrier, used only for deterministic output.
pub fn compare(a: &Value, b: &Value) -> Ordering {
    match (a, b) {
        (Value::Bool(x), Value::Bool(y)) => x.cmp(y),
        (Value::Nat(x), Value::Nat(y)) => x.cmp(y),
        (Value::Rat(x), Value::Rat(y)) => x.cmp(y),
        (Value::Unit(x), Value::Unit(y)) => x.total_cmp(y),
        (Value::Ext(x), Value::Ext(y)) => {
            let key = |e: &Ext| match e {
                Ext::NegInf => (0, 0.0),
                Ext::Finite(v) => (1, *v),
                Ext::PosInf => (2, 0.0),
            };
            let (p, q) = (key(x), key(y));
            p.0.cmp(&q.0).then(p.1.total_cmp(&q.1))
        }
        _ => format!("{a:?}").cmp(&format!("{b:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_plus_add_is_min() {
        let k = builtin("min-plus").unwrap();
        let three = k.parse_value("3").unwrap();
        let five = k.parse_value("5").unwrap();
        assert!(k.equal(&k.add(&three, &five), &three));
        assert!(k.equal(&k.mul(&three, &k.zero()), &k.zero()));
    }

    #[test]
    fn viterbi_mul_is_product() {
        let k = builtin("viterbi").unwrap();
        let half = k.parse_value("0.5").unwrap();
        assert!(k.equal(&k.mul(&half, &half), &Value::Unit(0.25)));
    }

    #[test]
    fn natural_identity() {
        let k = Semiring::Natural;
        let x = Value::nat(17);
        assert_eq!(k.mul(&x, &k.one()), x);
    }

    #[test]
    fn flags() {
        for k in ALL_SEMIRINGS {
            assert_eq!(k.is_skew_field(), k == Semiring::Rational);
            assert_eq!(k.is_exact(), matches!(k, Semiring::Boolean | Semiring::Natural | Semiring::Rational));
            assert_eq!(builtin(k.name()).unwrap(), k);
        }
        assert!(matches!(builtin("reals"), Err(Error::Config(_))));
    }

    #[test]
    fn literals() {
        let q = Semiring::Rational;
        assert_eq!(q.parse_value("2/3").unwrap(), Value::rat(2, 3));
        assert_eq!(q.parse_value("0.25").unwrap(), Value::rat(1, 4));
        assert_eq!(q.parse_value("-4").unwrap(), Value::rat(-4, 1));
        assert!(Semiring::Natural.parse_value("2/3").is_err());
        assert!(Semiring::Natural.parse_value("-1").is_err());
        assert_eq!(Semiring::MinPlus.parse_value("inf").unwrap(), Value::Ext(Ext::PosInf));
        assert!(Semiring::MinPlus.parse_value("-inf").is_err());
        assert_eq!(Semiring::MaxPlus.parse_value("-inf").unwrap(), Value::Ext(Ext::NegInf));
        assert!(Semiring::Viterbi.parse_value("1.5").is_err());
        for k in ALL_SEMIRINGS {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            for _ in 0..50 {
                let v = k.sample(&mut rng);
                let back = k.parse_value(&k.render(&v)).unwrap();
                assert!(k.equal(&back, &v), "{k}: {v:?} -> {back:?}");
            }
        }
    }

    #[test]
    fn builtins_obey_laws() {
        for k in ALL_SEMIRINGS {
            let report = check_laws(&k, 1000, DEFAULT_SEED);
            assert!(report.is_clean(), "{k}: {:?}", report.violations);
        }
    }
}
