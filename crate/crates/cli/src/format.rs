//! Problem and experiment files: TOML documents whose first line is the
//! versioned header `format = "qvarsched-v1"`.
//!
//! Problem file:
//!
//! ```toml
//! format = "qvarsched-v1"
//! variant = "EOHL"            # ECFL, EOFL, ECHL or EOHL
//!
//! [[processes]]               # one table per process
//! weight = 2                  # integer >= 1
//! values = [2, "1/2", 0.25]   # one exact value per node
//!
//! [[nodes]]                   # one table per edge node
//! capacity = 3                # integer >= 1
//! threshold = 2               # integer, high-load variants only, default 0
//! ```
//!
//! Values may be integers, decimals or `"p/q"` strings and are kept exact.
//!
//! Experiment file:
//!
//! ```toml
//! format = "qvarsched-v1"
//! problem = "eohl.toml"       # relative to this file
//! algorithm = "A4"            # A1..A4 or qaoa
//! reps = 3                    # qaoa only, default 1
//! runs = 20                   # default 1
//! seed = 7                    # master seed, default 0
//! mode = "sampled"            # exact (default) or sampled
//! shots = 4096                # default 4096
//! max_qubits = 24             # default 24
//! output = "eohl.csv"         # optional, relative to this file
//!
//! [optimizer]                 # every key optional
//! method = "cobyla"           # cobyla or nelder-mead
//! max_iterations = 1000
//! tolerance = 1e-8
//! rho_begin = 1.0
//! rho_end = 1e-4
//! restarts = 10
//! initial = "uniform"         # uniform in [0, pi) or zero
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qvarsched::rational::{format_rational, parse_decimal};
use qvarsched::vqa::{InitialPoint, Method, Mode};
use qvarsched::{
    AnsatzKind, AssignmentProblem, NodeSpec, OptimizerConfig, ProblemVariant, ProcessSpec, Rational,
};
use serde::Deserialize;

pub const FORMAT: &str = "qvarsched-v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub path: PathBuf,
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{line}: {}", self.path.display(), self.message),
            None => write!(f, "{}: {}", self.path.display(), self.message),
        }
    }
}

fn error(path: &Path, message: impl Into<String>) -> ParseError {
    ParseError { path: path.to_path_buf(), line: None, message: message.into() }
}

fn read(path: &Path) -> Result<String, ParseError> {
    std::fs::read_to_string(path).map_err(|e| error(path, format!("cannot read file: {e}")))
}

fn check_header(path: &Path, text: &str) -> Result<(), ParseError> {
    let first = text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#'));
    let ok = first.is_some_and(|l| {
        l.split_once('=')
            .is_some_and(|(k, v)| k.trim() == "format" && v.trim().trim_matches('"') == FORMAT)
    });
    if ok {
        Ok(())
    } else {
        Err(ParseError {
            path: path.to_path_buf(),
            line: Some(1),
            message: format!("first line must be `format = \"{FORMAT}\"`"),
        })
    }
}

fn parse_toml<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T, ParseError> {
    check_header(path, text)?;
    toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| text[..s.start].matches('\n').count() + 1);
        ParseError { path: path.to_path_buf(), line, message: e.message().to_string() }
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    #[allow(dead_code)]
    format: String,
    variant: String,
    processes: Vec<ProcessEntry>,
    nodes: Vec<NodeEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProcessEntry {
    weight: i64,
    values: Vec<toml::Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeEntry {
    capacity: i64,
    #[serde(default)]
    threshold: i64,
}

fn value_to_rational(value: &toml::Value) -> Option<Rational> {
    match value {
        toml::Value::Integer(i) => Some(Rational::from_integer(i128::from(*i))),
        // the shortest round-trip form is the decimal as written in the file
        toml::Value::Float(f) if f.is_finite() => parse_decimal(&f.to_string()),
        toml::Value::String(s) => parse_decimal(s),
        _ => None,
    }
}

fn unsigned(path: &Path, field: String, value: i64, min: i64) -> Result<u64, ParseError> {
    if value < min {
        Err(error(path, format!("{field} must be at least {min}, got {value}")))
    } else {
        Ok(value as u64)
    }
}

pub fn parse_problem(path: &Path, text: &str) -> Result<AssignmentProblem, ParseError> {
    let file: ProblemFile = parse_toml(path, text)?;
    let variant: ProblemVariant =
        file.variant.parse().map_err(|e: qvarsched::Error| error(path, format!("variant: {e}")))?;
    let mut processes = Vec::with_capacity(file.processes.len());
    for (i, p) in file.processes.iter().enumerate() {
        let weight = unsigned(path, format!("processes[{i}].weight"), p.weight, 1)?;
        let values = p
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| {
                value_to_rational(v).ok_or_else(|| {
                    error(path, format!("processes[{i}].values[{j}] is not an exact number: {v}"))
                })
            })
            .collect::<Result<_, _>>()?;
        processes.push(ProcessSpec::new(weight, values));
    }
    let mut nodes = Vec::with_capacity(file.nodes.len());
    for (j, n) in file.nodes.iter().enumerate() {
        let capacity = unsigned(path, format!("nodes[{j}].capacity"), n.capacity, 1)?;
        let threshold = unsigned(path, format!("nodes[{j}].threshold"), n.threshold, 0)?;
        nodes.push(NodeSpec::new(capacity, threshold));
    }
    AssignmentProblem::new(variant, processes, nodes).map_err(|e| error(path, e.to_string()))
}

pub fn load_problem(path: &Path) -> Result<AssignmentProblem, ParseError> {
    parse_problem(path, &read(path)?)
}

pub fn problem_to_toml(problem: &AssignmentProblem) -> String {
    let mut out = format!("format = \"{FORMAT}\"\nvariant = \"{}\"\n", problem.variant());
    for p in problem.processes() {
        let values: Vec<String> =
            p.values.iter().map(|v| format!("\"{}\"", format_rational(v))).collect();
        let _ = write!(
            out,
            "\n[[processes]]\nweight = {}\nvalues = [{}]\n",
            p.weight,
            values.join(", ")
        );
    }
    for n in problem.nodes() {
        let _ =
            write!(out, "\n[[nodes]]\ncapacity = {}\nthreshold = {}\n", n.capacity, n.threshold);
    }
    out
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    #[allow(dead_code)]
    format: String,
    problem: PathBuf,
    algorithm: String,
    reps: Option<usize>,
    runs: Option<usize>,
    seed: Option<u64>,
    mode: Option<String>,
    shots: Option<u64>,
    max_qubits: Option<usize>,
    output: Option<PathBuf>,
    #[serde(default)]
    optimizer: OptimizerSection,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct OptimizerSection {
    method: Option<String>,
    max_iterations: Option<usize>,
    tolerance: Option<f64>,
    rho_begin: Option<f64>,
    rho_end: Option<f64>,
    restarts: Option<usize>,
    initial: Option<String>,
}

/// An experiment file after path resolution; command-line flags are applied on top.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecDocument {
    pub problem_path: PathBuf,
    pub problem: AssignmentProblem,
    pub ansatz: AnsatzKind,
    pub optimizer: OptimizerConfig,
    pub sampled: bool,
    pub shots: u64,
    pub runs: usize,
    pub seed: u64,
    pub max_qubits: usize,
    pub output: Option<PathBuf>,
}

impl SpecDocument {
    pub fn mode(&self) -> Mode {
        if self.sampled {
            Mode::Sampled(self.shots)
        } else {
            Mode::Exact
        }
    }
}

pub fn parse_mode(path: &Path, text: &str) -> Result<bool, ParseError> {
    match text.trim().to_ascii_lowercase().as_str() {
        "exact" => Ok(false),
        "sampled" => Ok(true),
        other => Err(error(path, format!("mode must be `exact` or `sampled`, got `{other}`"))),
    }
}

pub fn parse_ansatz(
    path: &Path,
    algorithm: &str,
    reps: Option<usize>,
) -> Result<AnsatzKind, ParseError> {
    let kind: AnsatzKind =
        algorithm.parse().map_err(|e: qvarsched::Error| error(path, format!("algorithm: {e}")))?;
    match (kind, reps) {
        (AnsatzKind::Qaoa { .. }, Some(r)) => {
            AnsatzKind::qaoa(r).map_err(|e| error(path, format!("reps: {e}")))
        }
        (_, None) => Ok(kind),
        (_, Some(_)) => Err(error(path, "reps only applies to QAOA")),
    }
}

pub fn parse_spec(path: &Path, text: &str) -> Result<SpecDocument, ParseError> {
    let file: SpecFile = parse_toml(path, text)?;
    let base = path.parent().unwrap_or(Path::new(""));
    let problem_path = base.join(&file.problem);
    let problem = load_problem(&problem_path)?;
    let ansatz = parse_ansatz(path, &file.algorithm, file.reps)?;
    let mut optimizer = OptimizerConfig::default();
    let o = &file.optimizer;
    if let Some(m) = &o.method {
        optimizer.method =
            m.parse::<Method>().map_err(|e| error(path, format!("optimizer.method: {e}")))?;
    }
    optimizer.max_iterations = o.max_iterations.unwrap_or(optimizer.max_iterations);
    optimizer.tolerance = o.tolerance.unwrap_or(optimizer.tolerance);
    optimizer.rho_begin = o.rho_begin.unwrap_or(optimizer.rho_begin);
    optimizer.rho_end = o.rho_end.unwrap_or(optimizer.rho_end);
    optimizer.restarts = o.restarts.unwrap_or(optimizer.restarts);
    if let Some(init) = &o.initial {
        optimizer.initial = match init.as_str() {
            "uniform" => InitialPoint::default(),
            "zero" => InitialPoint::Zero,
            other => {
                return Err(error(
                    path,
                    format!("optimizer.initial must be `uniform` or `zero`, got `{other}`"),
                ))
            }
        };
    }
    optimizer.validate().map_err(|e| error(path, format!("optimizer: {e}")))?;
    let runs = file.runs.unwrap_or(1);
    if runs == 0 {
        return Err(error(path, "runs must be at least 1"));
    }
    let shots = file.shots.unwrap_or(qvarsched::vqa::FINAL_SHOTS);
    if shots == 0 {
        return Err(error(path, "shots must be at least 1"));
    }
    Ok(SpecDocument {
        problem_path,
        problem,
        ansatz,
        optimizer,
        sampled: file.mode.as_deref().map(|m| parse_mode(path, m)).transpose()?.unwrap_or(false),
        shots,
        runs,
        seed: file.seed.unwrap_or(0),
        max_qubits: file.max_qubits.unwrap_or(qvarsched::Simulator::default().max_qubits),
        output: file.output.map(|o| base.join(o)),
    })
}

pub fn load_spec(path: &Path) -> Result<SpecDocument, ParseError> {
    parse_spec(path, &read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qvarsched::instances::reference;

    const EOHL: &str = r#"format = "qvarsched-v1"
variant = "EOHL"

[[processes]]
weight = 2
values = [2, 1]

[[processes]]
weight = 1
values = ["3", 1.0]

[[processes]]
weight = 1
values = [2, "1"]

[[nodes]]
capacity = 3
threshold = 2

[[nodes]]
capacity = 2
threshold = 1
"#;

    #[test]
    fn parses_reference_problem() {
        let p = parse_problem(Path::new("eohl.toml"), EOHL).unwrap();
        assert_eq!(p, reference(ProblemVariant::EOHL));
    }

    #[test]
    fn writer_round_trips() {
        for v in ProblemVariant::ALL {
            let p = reference(v);
            assert_eq!(parse_problem(Path::new("x"), &problem_to_toml(&p)).unwrap(), p);
        }
    }

    #[test]
    fn decimals_stay_exact() {
        let text = EOHL.replace("values = [2, 1]", "values = [0.1, \"1/3\"]");
        let p = parse_problem(Path::new("x"), &text).unwrap();
        assert_eq!(p.processes()[0].values, vec![Rational::new(1, 10), Rational::new(1, 3)]);
    }

    #[test]
    fn errors_name_the_field() {
        let text = EOHL.replacen("weight = 2", "weight = -2", 1);
        let e = parse_problem(Path::new("x"), &text).unwrap_err();
        assert!(e.message.contains("processes[0].weight"), "{e}");
        let text = EOHL.replacen("threshold = 2", "threshold = 3", 1);
        let e = parse_problem(Path::new("x"), &text).unwrap_err();
        assert!(e.message.contains("nodes[0].threshold"), "{e}");
        let text = EOHL.replacen("capacity = 2", "capacty = 2", 1);
        let e = parse_problem(Path::new("x"), &text).unwrap_err();
        assert!(e.line.is_some() && e.message.contains("capacty"), "{e}");
    }

    #[test]
    fn header_is_required() {
        let e = parse_problem(Path::new("x"), &EOHL.replacen("qvarsched-v1", "v0", 1)).unwrap_err();
        assert_eq!(e.line, Some(1));
    }

    #[test]
    fn ansatz_names() {
        let p = Path::new("x");
        assert_eq!(parse_ansatz(p, "qaoa", Some(3)).unwrap(), AnsatzKind::Qaoa { reps: 3 });
        assert_eq!(parse_ansatz(p, "A2", None).unwrap(), AnsatzKind::A2);
        assert!(parse_ansatz(p, "A2", Some(2)).is_err());
        assert!(parse_ansatz(p, "qaoa", Some(0)).is_err());
    }
}
