//! Weighted component types, parametric systems and their instantiations.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::semiring::{Semiring, Value};

/// Default cap on the number of enumerated interactions.
pub const DEFAULT_ALPHABET_LIMIT: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq)]
pub struct Lts {
    pub states: Vec<String>,
    pub initial: String,
    /// `(source, port, target)` triples.
    pub transitions: Vec<(String, String, String)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Port {
    pub name: String,
    pub weight: Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComponentType {
    pub name: String,
    pub ports: Vec<Port>,
    pub lts: Option<Lts>,
}

impl ComponentType {
    pub fn new(name: &str, ports: &[(&str, Value)]) -> ComponentType {
        ComponentType {
            name: name.to_string(),
            ports: ports.iter().map(|(n, w)| Port { name: n.to_string(), weight: w.clone() }).collect(),
            lts: None,
        }
    }

    pub fn port_index(&self, name: &str) -> Option<usize> {
        self.ports.iter().position(|p| p.name == name)
    }
}

/// A set of weighted component types over one semiring.
#[derive(Clone, Debug, PartialEq)]
pub struct ParametricSystem {
    pub semiring: Semiring,
    pub types: Vec<ComponentType>,
}

impl ParametricSystem {
    /// Validates names, weights and LTS bodies. A port that occurs in no
    /// transition of a given LTS has its weight set to zero.
    pub fn new(semiring: Semiring, mut types: Vec<ComponentType>) -> Result<ParametricSystem> {
        let mut problems = Vec::new();
        if types.is_empty() {
            problems.push("no component types".to_string());
        }
        let mut seen_types = BTreeSet::new();
        for ty in &mut types {
            if !seen_types.insert(ty.name.clone()) {
                problems.push(format!("duplicate component type `{}`", ty.name));
            }
            if ty.ports.is_empty() {
                problems.push(format!("component type `{}` has no ports", ty.name));
            }
            let mut seen_ports = BTreeSet::new();
            for p in &ty.ports {
                if !seen_ports.insert(p.name.clone()) {
                    problems.push(format!("duplicate port `{}` in `{}`", p.name, ty.name));
                }
                if !semiring.contains(&p.weight) {
                    problems.push(format!("weight of `{}.{}` is not in {semiring}", ty.name, p.name));
                }
            }
            if let Some(lts) = &ty.lts {
                let states: BTreeSet<&str> = lts.states.iter().map(String::as_str).collect();
                if !states.contains(lts.initial.as_str()) {
                    problems.push(format!("initial state `{}` of `{}` is undeclared", lts.initial, ty.name));
                }
                let mut used: HashMap<&str, usize> = HashMap::new();
                for (q, p, q2) in &lts.transitions {
                    for s in [q, q2] {
                        if !states.contains(s.as_str()) {
                            problems.push(format!("state `{s}` of `{}` is undeclared", ty.name));
                        }
                    }
                    if ty.port_index(p).is_none() {
                        problems.push(format!("transition label `{p}` is not a port of `{}`", ty.name));
                    }
                    *used.entry(p.as_str()).or_default() += 1;
                }
                for (p, n) in &used {
                    if *n > 1 {
                        problems.push(format!("port `{}.{p}` occurs in {n} transitions", ty.name));
                    }
                }
                let unused: Vec<usize> =
                    (0..ty.ports.len()).filter(|&i| !used.contains_key(ty.ports[i].name.as_str())).collect();
                for i in unused {
                    ty.ports[i].weight = semiring.zero();
                }
            }
        }
        if problems.is_empty() {
            Ok(ParametricSystem { semiring, types })
        } else {
            Err(Error::Validation(problems))
        }
    }

    pub fn type_index(&self, name: &str) -> Option<usize> {
        self.types.iter().position(|t| t.name == name)
    }

    /// All `(type, port)` pairs whose port is called `name`.
    pub fn find_port(&self, name: &str) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (ti, ty) in self.types.iter().enumerate() {
            if let Some(pi) = ty.port_index(name) {
                out.push((ti, pi));
            }
        }
        out
    }

    pub fn port_name(&self, ty: usize, port: usize) -> String {
        format!("{}.{}", self.types[ty].name, self.types[ty].ports[port].name)
    }

    pub fn port_weight(&self, ty: usize, port: usize) -> &Value {
        &self.types[ty].ports[port].weight
    }

    /// Same types with the semiring replaced and every weight re-read in it.
    pub fn with_semiring(&self, semiring: Semiring) -> Result<ParametricSystem> {
        let mut types = self.types.clone();
        for ty in &mut types {
            for p in &mut ty.ports {
                let text = self.semiring.render(&p.weight);
                p.weight = semiring.parse_value(&text)?;
            }
        }
        ParametricSystem::new(semiring, types)
    }

    pub fn instantiate(&self, r: &InstanceMap) -> Result<Instantiation> {
        Instantiation::new(self.clone(), r.clone())
    }
}

/// Number of instances per component type, indexed like the system's types.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InstanceMap(pub Vec<usize>);

impl InstanceMap {
    pub fn new(counts: &[usize]) -> InstanceMap {
        InstanceMap(counts.to_vec())
    }

    pub fn get(&self, ty: usize) -> usize {
        self.0[ty]
    }
}

impl fmt::Display for InstanceMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Port `port` of instance `instance` (1-based) of component type `ty`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortInstance {
    pub ty: usize,
    pub instance: usize,
    pub port: usize,
}

/// A nonempty set of port instances with at most one port per component instance.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interaction(Vec<PortInstance>);

impl Interaction {
    /// Sorts and checks the one-port-per-instance rule; range checks need an
    /// instantiation (see [`Instantiation::check_interaction`]).
    pub fn new(mut ports: Vec<PortInstance>) -> Result<Interaction> {
        ports.sort();
        ports.dedup();
        if ports.is_empty() {
            return Err(Error::Alphabet("an interaction must be nonempty".into()));
        }
        for w in ports.windows(2) {
            if w[0].ty == w[1].ty && w[0].instance == w[1].instance {
                return Err(Error::Alphabet(format!(
                    "two ports of the same component instance (type {}, instance {}) in one interaction",
                    w[0].ty, w[0].instance
                )));
            }
        }
        Ok(Interaction(ports))
    }

    pub fn ports(&self) -> &[PortInstance] {
        &self.0
    }

    pub fn contains(&self, p: &PortInstance) -> bool {
        self.0.binary_search(p).is_ok()
    }
}

pub type Word = Vec<Interaction>;

/// A system together with a concrete instance map.
#[derive(Clone, Debug, PartialEq)]
pub struct Instantiation {
    pub system: ParametricSystem,
    pub r: InstanceMap,
}

impl Instantiation {
    pub fn new(system: ParametricSystem, r: InstanceMap) -> Result<Instantiation> {
        if r.0.len() != system.types.len() {
            return Err(Error::validation(format!(
                "instance map gives {} counts for {} component types",
                r.0.len(),
                system.types.len()
            )));
        }
        for (i, &n) in r.0.iter().enumerate() {
            if n == 0 {
                return Err(Error::validation(format!(
                    "component type `{}` needs at least one instance",
                    system.types[i].name
                )));
            }
        }
        Ok(Instantiation { system, r })
    }

    pub fn semiring(&self) -> Semiring {
        self.system.semiring
    }

    /// All port instances ordered by type, instance, then port.
    pub fn port_instances(&self) -> Vec<PortInstance> {
        let mut out = Vec::new();
        for (ty, t) in self.system.types.iter().enumerate() {
            for instance in 1..=self.r.0[ty] {
                for port in 0..t.ports.len() {
                    out.push(PortInstance { ty, instance, port });
                }
            }
        }
        out
    }

    /// Component instances `(type, instance)` in enumeration order.
    fn instances(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for ty in 0..self.system.types.len() {
            for j in 1..=self.r.0[ty] {
                out.push((ty, j));
            }
        }
        out
    }

    /// Exact number of valid interactions: the product of `|P(i)| + 1` over
    /// all instances, minus the empty set.
    pub fn alphabet_size(&self) -> BigUint {
        let mut n = BigUint::one();
        for (ty, _) in self.instances() {
            n *= BigUint::from(self.system.types[ty].ports.len() + 1);
        }
        n - BigUint::one()
    }

    /// Every valid interaction exactly once, in mixed-radix order with the
    /// last instance varying fastest.
    pub fn enumerate_interactions(&self, limit: usize) -> Result<Vec<Interaction>> {
        let size = self.alphabet_size();
        let fits = size.to_usize().filter(|&n| n <= limit);
        let Some(count) = fits else {
            return Err(Error::Resource(format!(
                "the interaction alphabet for r={} has {size} letters, above the limit of {limit}; \
                 pass an explicit alphabet file instead",
                self.r
            )));
        };
        let instances = self.instances();
        let radix: Vec<usize> = instances.iter().map(|&(ty, _)| self.system.types[ty].ports.len() + 1).collect();
        let mut digits = vec![0usize; instances.len()];
        let mut out = Vec::with_capacity(count);
        loop {
            let mut k = digits.len();
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                digits[k] += 1;
                if digits[k] < radix[k] {
                    break;
                }
                digits[k] = 0;
            }
            let ports = instances
                .iter()
                .zip(&digits)
                .filter(|(_, &d)| d > 0)
                .map(|(&(ty, instance), &d)| PortInstance { ty, instance, port: d - 1 })
                .collect();
            out.push(Interaction(ports));
        }
    }

    pub fn check_port(&self, p: &PortInstance) -> Result<()> {
        let ok = p.ty < self.system.types.len()
            && p.port < self.system.types[p.ty].ports.len()
            && (1..=self.r.0[p.ty]).contains(&p.instance);
        if ok {
            Ok(())
        } else {
            Err(Error::Alphabet(format!("port instance {p:?} does not exist for r={}", self.r)))
        }
    }

    pub fn check_interaction(&self, a: &Interaction) -> Result<()> {
        a.0.iter().try_for_each(|p| self.check_port(p))
    }

    /// The type-level weight shared by all instances of the port's type.
    pub fn weight_of(&self, p: &PortInstance) -> Result<Value> {
        self.check_port(p)?;
        Ok(self.system.port_weight(p.ty, p.port).clone())
    }

    pub fn render_port(&self, p: &PortInstance) -> String {
        format!("{}({})", self.system.port_name(p.ty, p.port), p.instance)
    }

    pub fn render_interaction(&self, a: &Interaction) -> String {
        let parts: Vec<String> = a.0.iter().map(|p| self.render_port(p)).collect();
        format!("{{{}}}", parts.join(", "))
    }

    pub fn render_word(&self, w: &[Interaction]) -> String {
        if w.is_empty() {
            return "eps".to_string();
        }
        let parts: Vec<String> = w.iter().map(|a| self.render_interaction(a)).collect();
        parts.join(" ")
    }
}

/// An explicit finite alphabet of interactions with an index.
#[derive(Clone, Debug, PartialEq)]
pub struct Alphabet {
    letters: Vec<Interaction>,
    index: HashMap<Interaction, u32>,
}

impl Alphabet {
    pub fn new(letters: Vec<Interaction>) -> Result<Alphabet> {
        if letters.is_empty() {
            return Err(Error::Alphabet("an alphabet must be nonempty".into()));
        }
        let mut index = HashMap::with_capacity(letters.len());
        for (i, a) in letters.iter().enumerate() {
            if index.insert(a.clone(), i as u32).is_some() {
                return Err(Error::Alphabet(format!("letter {a:?} is listed twice")));
            }
        }
        Ok(Alphabet { letters, index })
    }

    /// The full interaction alphabet of an instantiation.
    pub fn of(view: &Instantiation, limit: usize) -> Result<Alphabet> {
        Alphabet::new(view.enumerate_interactions(limit)?)
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Interaction] {
        &self.letters
    }

    pub fn letter(&self, i: u32) -> &Interaction {
        &self.letters[i as usize]
    }

    pub fn index_of(&self, a: &Interaction) -> Option<u32> {
        self.index.get(a).copied()
    }

    pub fn encode(&self, w: &[Interaction]) -> Result<Vec<u32>> {
        w.iter()
            .map(|a| self.index_of(a).ok_or_else(|| Error::Alphabet(format!("letter {a:?} is not in the alphabet"))))
            .collect()
    }

    pub fn decode(&self, w: &[u32]) -> Word {
        w.iter().map(|&i| self.letters[i as usize].clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn master_slave() -> ParametricSystem {
        let k = Semiring::Natural;
        ParametricSystem::new(
            k,
            vec![
                ComponentType::new("master", &[("p_m", Value::nat(2))]),
                ComponentType::new("slave", &[("p_s", Value::nat(3))]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn master_slave_ports_and_weights() {
        let view = master_slave().instantiate(&InstanceMap::new(&[2, 2])).unwrap();
        assert_eq!(view.port_instances().len(), 4);
        let pm = |j| PortInstance { ty: 0, instance: j, port: 0 };
        assert_eq!(view.weight_of(&pm(1)).unwrap(), Value::nat(2));
        assert_eq!(view.weight_of(&pm(2)).unwrap(), Value::nat(2));
        assert!(view.weight_of(&pm(3)).is_err());
    }

    #[test]
    fn zero_instances_rejected() {
        assert!(master_slave().instantiate(&InstanceMap::new(&[2, 0])).is_err());
        assert!(master_slave().instantiate(&InstanceMap::new(&[2])).is_err());
    }

    #[test]
    fn single_port_single_instance() {
        let sys = ParametricSystem::new(Semiring::Boolean, vec![ComponentType::new("a", &[("p", Value::Bool(true))])])
            .unwrap();
        let view = sys.instantiate(&InstanceMap::new(&[1])).unwrap();
        assert_eq!(view.port_instances().len(), 1);
        assert_eq!(view.enumerate_interactions(10).unwrap().len(), 1);
    }

    #[test]
    fn same_instance_ports_exclude_each_other() {
        let sys = ParametricSystem::new(
            Semiring::Boolean,
            vec![ComponentType::new("a", &[("p", Value::Bool(true)), ("q", Value::Bool(true))])],
        )
        .unwrap();
        let view = sys.instantiate(&InstanceMap::new(&[1])).unwrap();
        assert_eq!(view.enumerate_interactions(10).unwrap().len(), 2);
        let distinct = sys.instantiate(&InstanceMap::new(&[2])).unwrap();
        assert_eq!(distinct.enumerate_interactions(100).unwrap().len(), 8);
    }

    #[test]
    fn limit_is_enforced() {
        let view = master_slave().instantiate(&InstanceMap::new(&[2, 2])).unwrap();
        assert!(matches!(view.enumerate_interactions(5), Err(Error::Resource(_))));
    }

    #[test]
    fn lts_unused_port_weighs_zero() {
        let mut ty = ComponentType::new("c", &[("go", Value::nat(4)), ("idle", Value::nat(5))]);
        ty.lts = Some(Lts {
            states: vec!["s".into(), "t".into()],
            initial: "s".into(),
            transitions: vec![("s".into(), "go".into(), "t".into())],
        });
        let sys = ParametricSystem::new(Semiring::Natural, vec![ty]).unwrap();
        assert_eq!(sys.port_weight(0, 0), &Value::nat(4));
        assert_eq!(sys.port_weight(0, 1), &Value::nat(0));
    }

    #[test]
    fn lts_port_in_two_transitions_rejected() {
        let mut ty = ComponentType::new("c", &[("go", Value::nat(4))]);
        ty.lts = Some(Lts {
            states: vec!["s".into()],
            initial: "s".into(),
            transitions: vec![("s".into(), "go".into(), "s".into()), ("s".into(), "go".into(), "s".into())],
        });
        assert!(ParametricSystem::new(Semiring::Natural, vec![ty]).is_err());
    }

    #[test]
    fn interaction_rules() {
        let p = |ty, instance, port| PortInstance { ty, instance, port };
        assert!(Interaction::new(vec![]).is_err());
        assert!(Interaction::new(vec![p(0, 1, 0), p(0, 1, 1)]).is_err());
        assert!(Interaction::new(vec![p(0, 1, 0), p(0, 2, 1)]).is_ok());
    }
}
