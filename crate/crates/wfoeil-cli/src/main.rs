//! `wfoeil`: check, evaluate, compile and compare weighted interaction
//! sentences over parametric component systems.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use wfoeil::equivalence::DEFAULT_NODE_LIMIT;
use wfoeil::logic::check_ranges;
use wfoeil::parse::{parse_alphabet, parse_formula_file_with};
use wfoeil::semiring::{check_laws, ALL_SEMIRINGS, DEFAULT_SEED};
use wfoeil::system::DEFAULT_ALPHABET_LIMIT;
use wfoeil::translate::DEFAULT_BUDGET;
use wfoeil::wfa::render_wfa;
use wfoeil::{
    bounded_equiv, catalog_words, decide_equiv, parse_system_spec, parse_word, parse_words, translate_wfoeil,
    wfoeil_eval, Alphabet, Architecture, Assignment, Error, InstanceMap, Instantiation, Semiring, TranslateOptions,
    Wfa, Wfoeil,
};

#[derive(Parser)]
#[command(name = "wfoeil", version, about = "Weighted interaction logic over parametric component systems")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value = "human")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Machine,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a system and a sentence.
    Check(Input),
    /// Evaluate a sentence on words.
    Eval {
        #[command(flatten)]
        input: Input,
        /// A word such as `{master.p_m(1), slave.p_s(1)}`; repeatable.
        #[arg(long)]
        word: Vec<String>,
        /// A file with one word per line.
        #[arg(long)]
        words: Option<PathBuf>,
    },
    /// Translate a sentence to a weighted automaton.
    Compile {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        translation: Translation,
        /// Write the automaton here instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decide whether two sentences define the same series.
    Equiv {
        #[command(flatten)]
        input: Input,
        /// The second sentence.
        right: PathBuf,
        /// System for the second sentence, if it differs from the first.
        #[arg(long)]
        right_system: Option<PathBuf>,
        #[command(flatten)]
        translation: Translation,
        /// Compare only words up to this length; works over every semiring.
        #[arg(long)]
        bounded: Option<usize>,
    },
    /// Write the system, sentence and words of a catalog architecture.
    Example {
        /// One of the catalog names, such as `master_slave`.
        id: String,
        /// Directory for `<id>.wcb`, `<id>.wfl` and `<id>.words`.
        #[arg(long, default_value = ".")]
        dir: PathBuf,
    },
    /// Run the randomized semiring axiom suite.
    Laws {
        /// A single semiring; all built-ins when absent.
        #[arg(long)]
        semiring: Option<String>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Args)]
struct Input {
    /// The `.wcb` system spec.
    system: PathBuf,
    /// The `.wfl` sentence.
    formula: PathBuf,
    /// Reinterpret every weight in this semiring.
    #[arg(long)]
    semiring: Option<String>,
    /// Instance counts such as `2,2`, overriding the spec's instances block.
    #[arg(long)]
    instances: Option<String>,
    /// Accept negations that break the proviso under Σ^⊙ and Σ^ϖ.
    #[arg(long)]
    relaxed: bool,
}

#[derive(Args)]
struct Translation {
    /// An `alphabet 1` file; the full interaction alphabet when absent.
    #[arg(long)]
    alphabet: Option<PathBuf>,
    /// Largest number of states of any intermediate automaton.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

impl Translation {
    fn options(&self) -> TranslateOptions {
        TranslateOptions { budget: self.budget, jobs: self.jobs.max(1) }
    }

    fn alphabet(&self, view: &Instantiation) -> Result<Alphabet, Error> {
        match &self.alphabet {
            Some(path) => parse_alphabet(&read(path)?, view),
            None => Alphabet::of(view, DEFAULT_ALPHABET_LIMIT),
        }
    }
}

struct Loaded {
    view: Instantiation,
    sentence: Wfoeil,
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn parse_instances(text: &str) -> Result<InstanceMap, Error> {
    let counts = text
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| Error::Config(format!("bad instance count `{s}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(InstanceMap(counts))
}

fn load_view(input: &Input, system: &Path) -> Result<Instantiation, Error> {
    let mut spec = parse_system_spec(&read(system)?)?;
    if let Some(name) = &input.semiring {
        spec.system = spec.system.with_semiring(name.parse::<Semiring>()?)?;
    }
    if let Some(text) = &input.instances {
        spec.instances = Some(parse_instances(text)?);
    }
    spec.instantiate()
}

fn load_sentence(view: &Instantiation, path: &Path, relaxed: bool) -> Result<Wfoeil, Error> {
    let sentence = parse_formula_file_with(&read(path)?, &view.system, relaxed)?;
    check_ranges(&sentence, &view.r)?;
    Ok(sentence)
}

fn load(input: &Input) -> Result<Loaded, Error> {
    let view = load_view(input, &input.system)?;
    let sentence = load_sentence(&view, &input.formula, input.relaxed)?;
    Ok(Loaded { view, sentence })
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Resource(_) => 2,
        Error::Capability(_) => 3,
        _ => 1,
    }
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::Config(_) => "config",
        Error::Syntax { .. } => "syntax",
        Error::Validation(_) => "validation",
        Error::Alphabet(_) => "alphabet",
        Error::Resource(_) => "resource",
        Error::Capability(_) => "capability",
        Error::Eval(_) => "eval",
    }
}

fn report_error(format: Format, e: &Error) {
    match format {
        Format::Human => match e {
            Error::Validation(items) if items.len() > 1 => {
                eprintln!("error: validation failed");
                for item in items {
                    eprintln!("  {item}");
                }
            }
            _ => eprintln!("error: {e}"),
        },
        Format::Machine => {
            let messages: Vec<String> = match e {
                Error::Validation(items) => items.clone(),
                other => vec![other.to_string()],
            };
            let out = json!({ "format": "wfoeil-error 1", "kind": kind(e), "messages": messages });
            eprintln!("{out}");
        }
    }
}

fn emit(format: Format, human: String, machine: Json) {
    match format {
        Format::Human => print!("{human}"),
        Format::Machine => println!("{machine}"),
    }
}

fn check(format: Format, input: &Input) -> Result<(), Error> {
    let loaded = load(input)?;
    let human = format!("ok: {} component types, r={}\n", loaded.view.system.types.len(), loaded.view.r);
    emit(
        format,
        human,
        json!({ "format": "wfoeil-check 1", "ok": true, "types": loaded.view.system.types.len(), "instances": loaded.view.r.0 }),
    );
    Ok(())
}

fn eval(format: Format, input: &Input, word: &[String], words: &Option<PathBuf>) -> Result<(), Error> {
    let loaded = load(input)?;
    let view = &loaded.view;
    let mut list = Vec::new();
    for text in word {
        list.push(parse_word(text, view)?);
    }
    if let Some(path) = words {
        list.extend(parse_words(&read(path)?, view)?);
    }
    if list.is_empty() {
        return Err(Error::Config("no words given; use --word or --words".into()));
    }
    let k = view.semiring();
    let mut human = String::new();
    let mut rows = Vec::new();
    for w in &list {
        let value = k.render(&wfoeil_eval(view, &Assignment::new(), w, &loaded.sentence)?);
        human.push_str(&value);
        human.push('\n');
        rows.push(json!({ "word": view.render_word(w), "value": value }));
    }
    emit(format, human, json!({ "format": "wfoeil-eval 1", "semiring": k.name(), "values": rows }));
    Ok(())
}

fn compile(format: Format, input: &Input, translation: &Translation, output: &Option<PathBuf>) -> Result<(), Error> {
    let loaded = load(input)?;
    let alphabet = translation.alphabet(&loaded.view)?;
    let start = Instant::now();
    let wfa = translate_wfoeil(&loaded.view, &alphabet, &Assignment::new(), &loaded.sentence, &translation.options())?;
    let millis = start.elapsed().as_secs_f64() * 1e3;
    let text = render_wfa(&wfa, &alphabet, &loaded.view);
    match output {
        Some(path) => fs::write(path, &text).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    let (states, transitions, letters) = (wfa.states(), wfa.transitions(), alphabet.len());
    match format {
        Format::Human => eprintln!("stats states={states} transitions={transitions} letters={letters} ms={millis:.3}"),
        Format::Machine => eprintln!(
            "{}",
            json!({ "format": "wfoeil-stats 1", "states": states, "transitions": transitions, "letters": letters, "ms": millis })
        ),
    }
    Ok(())
}

fn same_letters(a: &Alphabet, av: &Instantiation, b: &Alphabet, bv: &Instantiation) -> Result<(), Error> {
    let render = |x: &Alphabet, v: &Instantiation| -> Vec<String> { x.letters().iter().map(|l| v.render_interaction(l)).collect() };
    if render(a, av) != render(b, bv) {
        return Err(Error::Alphabet("the two systems have different interaction alphabets".into()));
    }
    Ok(())
}

fn equiv(
    format: Format,
    input: &Input,
    right: &Path,
    right_system: &Option<PathBuf>,
    translation: &Translation,
    bounded: Option<usize>,
) -> Result<(), Error> {
    let left = load(input)?;
    let right_view = match right_system {
        Some(path) => load_view(input, path)?,
        None => left.view.clone(),
    };
    let right_sentence = load_sentence(&right_view, right, input.relaxed)?;
    let k = left.view.semiring();
    if right_view.semiring() != k {
        return Err(Error::Config(format!("semirings differ: {k} and {}", right_view.semiring())));
    }
    if bounded.is_none() && !matches!(k, Semiring::Rational | Semiring::Natural) {
        return Err(Error::Capability(format!(
            "exact equivalence needs an exact skew field such as rational; {k} is not one, pass --bounded N"
        )));
    }
    let alphabet = translation.alphabet(&left.view)?;
    let right_alphabet = match (&translation.alphabet, right_system) {
        (None, Some(_)) => {
            let b = Alphabet::of(&right_view, DEFAULT_ALPHABET_LIMIT)?;
            same_letters(&alphabet, &left.view, &b, &right_view)?;
            b
        }
        (Some(path), Some(_)) => parse_alphabet(&read(path)?, &right_view)?,
        _ => alphabet.clone(),
    };
    let opts = translation.options();
    let a: Wfa = translate_wfoeil(&left.view, &alphabet, &Assignment::new(), &left.sentence, &opts)?;
    let b: Wfa = translate_wfoeil(&right_view, &right_alphabet, &Assignment::new(), &right_sentence, &opts)?;
    let verdict = match bounded {
        Some(n) => bounded_equiv(&a, &b, n, DEFAULT_NODE_LIMIT)?,
        None => decide_equiv(&a, &b)?,
    };
    let mut human = String::new();
    human.push_str(if verdict.equivalent { "equivalent\n" } else { "inequivalent\n" });
    let mut machine = json!({
        "format": "wfoeil-equiv 1",
        "equivalent": verdict.equivalent,
        "basis_size": verdict.basis_size,
        "bound": verdict.bound,
        "witness": Json::Null,
    });
    if let Some(w) = &verdict.witness {
        let word = left.view.render_word(&alphabet.decode(&w.word));
        let (l, r) = (k.render(&w.left), k.render(&w.right));
        human.push_str(&format!("witness: {word}\nleft: {l}\nright: {r}\n"));
        machine["witness"] = json!({ "word": word, "left": l, "right": r });
    }
    match verdict.bound {
        Some(n) => human.push_str(&format!("bound: {n}\n")),
        None => human.push_str(&format!("basis: {}\n", verdict.basis_size)),
    }
    emit(format, human, machine);
    Ok(())
}

fn example(format: Format, id: &str, dir: &Path) -> Result<(), Error> {
    let id: Architecture = id.parse()?;
    let view = Instantiation::new(parse_system_spec(id.system_text())?.system, id.instances())?;
    let mut words = String::from("// catalog words, one per line\n");
    for (label, w) in catalog_words(id, &id.instances())? {
        words.push_str(&format!("// {label}\n{}\n", view.render_word(&w)));
    }
    let files = [
        (format!("{id}.wcb"), id.system_text().to_string()),
        (format!("{id}.wfl"), id.formula_text().to_string()),
        (format!("{id}.words"), words),
    ];
    fs::create_dir_all(dir).map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for (name, text) in files {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
        written.push(path.display().to_string());
    }
    let human: String = written.iter().map(|p| format!("wrote {p}\n")).collect();
    emit(format, human, json!({ "format": "wfoeil-example 1", "id": id.name(), "files": written }));
    Ok(())
}

fn laws(format: Format, semiring: &Option<String>, samples: usize, seed: u64) -> Result<bool, Error> {
    let list: Vec<Semiring> = match semiring {
        Some(name) => vec![name.parse()?],
        None => ALL_SEMIRINGS.to_vec(),
    };
    let mut clean = true;
    let mut human = String::new();
    let mut rows = Vec::new();
    for k in list {
        let report = check_laws(&k, samples, seed);
        clean &= report.is_clean();
        let failed: Vec<&str> = report.violations.iter().map(|v| v.axiom.describe()).collect();
        if failed.is_empty() {
            human.push_str(&format!("{k}: ok ({samples} samples)\n"));
        } else {
            human.push_str(&format!("{k}: FAILED {}\n", failed.join(", ")));
        }
        rows.push(json!({ "semiring": k.name(), "samples": samples, "violations": failed }));
    }
    emit(format, human, json!({ "format": "wfoeil-laws 1", "seed": seed, "results": rows }));
    Ok(clean)
}

fn run(cli: &Cli) -> Result<bool, Error> {
    let format = cli.format;
    match &cli.command {
        Command::Check(input) => check(format, input).map(|_| true),
        Command::Eval { input, word, words } => eval(format, input, word, words).map(|_| true),
        Command::Compile { input, translation, output } => compile(format, input, translation, output).map(|_| true),
        Command::Equiv { input, right, right_system, translation, bounded } => {
            equiv(format, input, right, right_system, translation, *bounded).map(|_| true)
        }
        Command::Example { id, dir } => example(format, id, dir).map(|_| true),
        Command::Laws { semiring, samples, seed } => laws(format, semiring, *samples, *seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            report_error(cli.format, &e);
            ExitCode::from(exit_code(&e))
        }
    }
}
