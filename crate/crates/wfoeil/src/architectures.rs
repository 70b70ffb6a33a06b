//! The catalog of parametric architectures: systems, sentences and words.
//!
//! Systems and sentences are stored as `.wcb`/`.wfl` source text and parsed
//! on demand. Port weights are named `k_` followed by the port name without
//! its `p_` prefix (`p_m` gives `k_m`, `f_e` gives `k_f_e`).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::logic::Wfoeil;
use crate::parse::{parse_formula_file_with, parse_system_spec, parse_word};
use crate::semiring::{Semiring, Value};
use crate::system::{InstanceMap, Instantiation, ParametricSystem, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Architecture {
    MasterSlave,
    Star,
    Repository,
    PipesFilters,
    Blackboard,
    RequestResponse,
    PublishSubscribe,
}

impl Architecture {
    pub const ALL: [Architecture; 7] = [
        Architecture::MasterSlave,
        Architecture::Star,
        Architecture::Repository,
        Architecture::PipesFilters,
        Architecture::Blackboard,
        Architecture::RequestResponse,
        Architecture::PublishSubscribe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Architecture::MasterSlave => "master_slave",
            Architecture::Star => "star",
            Architecture::Repository => "repository",
            Architecture::PipesFilters => "pipes_filters",
            Architecture::Blackboard => "blackboard",
            Architecture::RequestResponse => "request_response",
            Architecture::PublishSubscribe => "publish_subscribe",
        }
    }

    /// The `.wcb` text with unit weights over ℕ and the default instances.
    pub fn system_text(self) -> &'static str {
        match self {
            Architecture::MasterSlave => include_str!("../catalog/master_slave.wcb"),
            Architecture::Star => include_str!("../catalog/star.wcb"),
            Architecture::Repository => include_str!("../catalog/repository.wcb"),
            Architecture::PipesFilters => include_str!("../catalog/pipes_filters.wcb"),
            Architecture::Blackboard => include_str!("../catalog/blackboard.wcb"),
            Architecture::RequestResponse => include_str!("../catalog/request_response.wcb"),
            Architecture::PublishSubscribe => include_str!("../catalog/publish_subscribe.wcb"),
        }
    }

    /// The `.wfl` text of the sentence.
    pub fn formula_text(self) -> &'static str {
        match self {
            Architecture::MasterSlave => include_str!("../catalog/master_slave.wfl"),
            Architecture::Star => include_str!("../catalog/star.wfl"),
            Architecture::Repository => include_str!("../catalog/repository.wfl"),
            Architecture::PipesFilters => include_str!("../catalog/pipes_filters.wfl"),
            Architecture::Blackboard => include_str!("../catalog/blackboard.wfl"),
            Architecture::RequestResponse => include_str!("../catalog/request_response.wfl"),
            Architecture::PublishSubscribe => include_str!("../catalog/publish_subscribe.wfl"),
        }
    }

    /// Whether the sentence negates non-PIL formulas under an existential
    /// concatenation quantifier; such sentences load in relaxed mode.
    pub fn breaks_proviso(self) -> bool {
        self == Architecture::RequestResponse
    }

    /// The instance counts the catalog words are written for.
    pub fn instances(self) -> InstanceMap {
        InstanceMap(match self {
            Architecture::MasterSlave => vec![2, 2],
            Architecture::Star => vec![5],
            Architecture::Repository => vec![1, 4],
            Architecture::PipesFilters => vec![4, 3],
            Architecture::Blackboard => vec![1, 1, 3],
            Architecture::RequestResponse => vec![1, 2, 2, 2],
            Architecture::PublishSubscribe => vec![2, 2, 3],
        })
    }

    /// `w1_t` and `w2_t` repeat `w1` and `w2` of Request/Response with the
    /// lookup replies on `p_t`, the port the sentence connects `p_o` to.
    fn words(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Architecture::MasterSlave => &[
                ("w1", "{p_m(1), p_s(1)} {p_m(2), p_s(2)}"),
                ("w2", "{p_m(1), p_s(1)} {p_m(1), p_s(2)}"),
                ("w3", "{p_m(2), p_s(1)} {p_m(1), p_s(2)}"),
                ("w4", "{p_m(2), p_s(1)} {p_m(2), p_s(2)}"),
            ],
            Architecture::Star => &[("w", "{p(1), p(2)} {p(1), p(3)} {p(1), p(4)} {p(1), p(5)}")],
            Architecture::Repository => &[("w", "{p_r(1), p_d(1)} {p_r(1), p_d(2)} {p_r(1), p_d(3)} {p_r(1), p_d(4)}")],
            Architecture::PipesFilters => &[
                (
                    "w1",
                    "{f_e(1), p_o(2)} {f_o(1), p_e(1)} {f_e(2), p_o(3)} {f_o(2), p_e(2)} {f_e(3), p_o(4)} {f_o(3), p_e(2)}",
                ),
                (
                    "w2",
                    "{f_e(1), p_o(3)} {f_o(1), p_e(4)} {f_e(2), p_o(4)} {f_o(2), p_e(1)} {f_e(3), p_o(2)} {f_o(3), p_e(4)}",
                ),
            ],
            Architecture::Blackboard => &[
                (
                    "w1",
                    "{p_d(1), p_r(1)} {p_d(1), p_n(1)} {p_d(1), p_n(2)} {p_d(1), p_n(3)} {p_l(1), p_t(2)} \
                     {p_l(1), p_t(3)} {p_e(1), p_w(2), p_a(1)} {p_e(1), p_w(3), p_a(1)}",
                ),
                (
                    "w2",
                    "{p_d(1), p_r(1)} {p_d(1), p_n(3)} {p_d(1), p_n(1)} {p_d(1), p_n(2)} {p_l(1), p_t(3)} \
                     {p_e(1), p_w(3), p_a(1)}",
                ),
            ],
            Architecture::RequestResponse => &[
                (
                    "w1",
                    "{registry.p_e(1), service.p_r(1)} {registry.p_e(1), service.p_r(2)} \
                     {client.p_l(1), registry.p_u(1)} {client.p_l(2), registry.p_u(1)} \
                     {client.p_o(1), registry.p_u(1)} {client.p_o(2), registry.p_u(1)} \
                     {client.p_n(1), coordinator.p_m(2)} {client.p_q(1), coordinator.p_a(2), service.p_g(2)} \
                     {client.p_c(1), coordinator.p_d(2), service.p_s(2)} {client.p_n(2), coordinator.p_m(2)} \
                     {client.p_q(2), coordinator.p_a(2), service.p_g(2)} {client.p_c(2), coordinator.p_d(2), service.p_s(2)}",
                ),
                (
                    "w2",
                    "{registry.p_e(1), service.p_r(2)} {registry.p_e(1), service.p_r(1)} \
                     {client.p_l(1), registry.p_u(1)} {client.p_l(2), registry.p_u(1)} \
                     {client.p_o(2), registry.p_u(1)} {client.p_o(1), registry.p_u(1)} \
                     {client.p_n(2), coordinator.p_m(2)} {client.p_q(2), coordinator.p_a(2), service.p_g(2)} \
                     {client.p_c(2), coordinator.p_d(2), service.p_s(2)}",
                ),
                (
                    "w1_t",
                    "{registry.p_e(1), service.p_r(1)} {registry.p_e(1), service.p_r(2)} \
                     {client.p_l(1), registry.p_u(1)} {client.p_l(2), registry.p_u(1)} \
                     {client.p_o(1), registry.p_t(1)} {client.p_o(2), registry.p_t(1)} \
                     {client.p_n(1), coordinator.p_m(2)} {client.p_q(1), coordinator.p_a(2), service.p_g(2)} \
                     {client.p_c(1), coordinator.p_d(2), service.p_s(2)} {client.p_n(2), coordinator.p_m(2)} \
                     {client.p_q(2), coordinator.p_a(2), service.p_g(2)} {client.p_c(2), coordinator.p_d(2), service.p_s(2)}",
                ),
                (
                    "w2_t",
                    "{registry.p_e(1), service.p_r(2)} {registry.p_e(1), service.p_r(1)} \
                     {client.p_l(1), registry.p_u(1)} {client.p_l(2), registry.p_u(1)} \
                     {client.p_o(2), registry.p_t(1)} {client.p_o(1), registry.p_t(1)} \
                     {client.p_n(2), coordinator.p_m(2)} {client.p_q(2), coordinator.p_a(2), service.p_g(2)} \
                     {client.p_c(2), coordinator.p_d(2), service.p_s(2)}",
                ),
            ],
            Architecture::PublishSubscribe => &[
                (
                    "w1",
                    "{p_a(1), p_n(1)} {p_t(1), p_r(1)} {p_c(1), p_e(1)} {p_s(1), p_g(1)} {p_c(1), p_e(3)} \
                     {p_f(1), p_d(1)} {p_s(1), p_g(3)} {p_f(1), p_d(3)}",
                ),
                (
                    "w2",
                    "{p_a(1), p_n(1)} {p_t(1), p_r(1)} {p_c(1), p_e(3)} {p_c(1), p_e(1)} {p_s(1), p_g(1)} \
                     {p_c(1), p_e(2)} {p_s(1), p_g(2)} {p_s(1), p_g(3)} {p_f(1), p_d(3)} {p_f(1), p_d(1)} \
                     {p_f(1), p_d(2)}",
                ),
            ],
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Architecture> {
        Architecture::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Architecture::ALL.iter().map(|a| a.name()).collect();
            Error::Config(format!("unknown architecture `{s}`; expected one of {}", names.join(", ")))
        })
    }
}

/// `k_m` for port `p_m`, `k_f_e` for port `f_e`.
pub fn weight_name(port: &str) -> String {
    format!("k_{}", port.strip_prefix("p_").unwrap_or(port))
}

/// The weight names of an entry with their `(type, port)` positions.
pub fn weight_names(id: Architecture) -> Vec<(String, usize, usize)> {
    let system = base_system(id);
    let mut out = Vec::new();
    for (ty, t) in system.types.iter().enumerate() {
        for (port, p) in t.ports.iter().enumerate() {
            out.push((weight_name(&p.name), ty, port));
        }
    }
    out
}

fn base_system(id: Architecture) -> ParametricSystem {
    parse_system_spec(id.system_text()).expect("catalog system parses").system
}

/// The system over `semiring` with the given weights, every other weight
/// one, and the sentence. Unknown weight names are rejected.
pub fn generate(
    id: Architecture,
    semiring: Semiring,
    weights: &[(&str, Value)],
) -> Result<(ParametricSystem, Wfoeil)> {
    let names = weight_names(id);
    let mut system = base_system(id).with_semiring(semiring)?;
    for t in &mut system.types {
        for p in &mut t.ports {
            p.weight = semiring.one();
        }
    }
    let mut problems = Vec::new();
    for (name, value) in weights {
        match names.iter().find(|(n, _, _)| n == name) {
            Some((_, ty, port)) => {
                if !semiring.contains(value) {
                    problems.push(format!("weight `{name}` is not in {semiring}"));
                }
                system.types[*ty].ports[*port].weight = value.clone();
            }
            None => {
                let known: Vec<&str> = names.iter().map(|(n, _, _)| n.as_str()).collect();
                problems.push(format!("`{name}` is not a weight of {id}; expected one of {}", known.join(", ")));
            }
        }
    }
    if !problems.is_empty() {
        return Err(Error::Validation(problems));
    }
    let sentence = parse_formula_file_with(id.formula_text(), &system, id.breaks_proviso())?;
    Ok((system, sentence))
}

/// The named example words of an entry, for its default instances only.
pub fn catalog_words(id: Architecture, r: &InstanceMap) -> Result<Vec<(&'static str, Word)>> {
    if *r != id.instances() {
        return Err(Error::Config(format!("catalog words of {id} are written for r={}, not r={r}", id.instances())));
    }
    let view = Instantiation::new(base_system(id), r.clone())?;
    id.words().iter().map(|(label, text)| Ok((*label, parse_word(text, &view)?))).collect()
}
