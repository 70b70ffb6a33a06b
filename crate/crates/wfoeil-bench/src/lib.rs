//! Shared setup for the benchmarks.

use wfoeil::{generate, Alphabet, Architecture, Instantiation, Result, Semiring, Wfoeil};

/// A catalog entry instantiated at `r`, with its full alphabet.
pub struct Case {
    pub view: Instantiation,
    pub alphabet: Alphabet,
    pub sentence: Wfoeil,
}

pub fn case(id: Architecture, semiring: Semiring, r: &[usize]) -> Result<Case> {
    let (system, sentence) = generate(id, semiring, &[])?;
    let view = system.instantiate(&wfoeil::InstanceMap(r.to_vec()))?;
    let alphabet = Alphabet::of(&view, wfoeil::system::DEFAULT_ALPHABET_LIMIT)?;
    Ok(Case { view, alphabet, sentence })
}
