//! Weighted first-order extended interaction logic over commutative
//! semirings: parametric component systems, direct semantics, translation
//! of sentences to weighted automata, and equivalence of sentences.

pub mod error;
pub mod logic;
pub mod semiring;
pub mod system;
pub mod parse;
pub mod semantics;
pub mod automata;
pub mod wfa;
pub mod translate;
pub mod equivalence;
pub mod architectures;

pub use architectures::{catalog_words, generate, Architecture};
pub use automata::{Dfa, Nfa};
pub use equivalence::{bounded_equiv, decide_equiv, sentence_equiv, EquivVerdict, Witness};
pub use error::{Error, Result, SourceSpan};
pub use logic::{Assignment, Diagnostic, DiagnosticKind, Epil, Foeil, Formula, Layer, Pil, Printer, Var, Wfoeil};
pub use parse::{parse_formula_file, parse_system_spec, parse_word, parse_words, SystemSpec};
pub use semantics::{foeil_satisfies, wfoeil_eval};
pub use semiring::{Semiring, Value};
pub use system::{Alphabet, InstanceMap, Instantiation, Interaction, ParametricSystem, Word};
pub use translate::{translate_foeil, translate_wfoeil, TranslateOptions};
pub use wfa::Wfa;
