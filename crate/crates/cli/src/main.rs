//! `qvarsched`: encode, enumerate, build circuits for and solve assignment problems.

mod format;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qvarsched::circuits::metrics;
use qvarsched::experiment::{scaling_sweep, sweep_csv};
use qvarsched::instances::ScalingFamily;
use qvarsched::oracle::enumerate_structured;
use qvarsched::rational::format_rational;
use qvarsched::simulator::DEFAULT_MAX_QUBITS;
use qvarsched::vqa::Method;
use qvarsched::{encode, run_experiment, Error, ExperimentSpec, ProblemVariant, Simulator};

use format::{load_problem, load_spec, parse_ansatz, parse_mode, problem_to_toml, ParseError};

#[derive(Parser)]
#[command(
    name = "qvarsched",
    version,
    about = "Variational solvers for edge/cloud process assignment"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the Ising model of a problem file.
    Encode {
        problem: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate every bitstring and report the feasible and optimal sets.
    Oracle {
        problem: PathBuf,
        /// List at most this many optimal bitstrings.
        #[arg(long, default_value_t = 32)]
        limit: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_QUBITS)]
        max_qubits: usize,
    },
    /// Report the resource counts of an ansatz, optionally with its gate list.
    Circuit {
        problem: PathBuf,
        #[arg(long, default_value = "A1")]
        ansatz: String,
        /// QAOA depth.
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        gates: bool,
    },
    /// Run the seeded experiment described by a spec file.
    Solve {
        spec: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Per-run CSV; defaults to the experiment file's `output`, else stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON summary with per-run parameters and aggregates.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Write wall_ms as 0 so repeated runs give identical bytes.
        #[arg(long)]
        omit_timings: bool,
    },
    /// Solve each member of the synthetic family from `--from` to `--to` processes.
    #[command(alias = "benchmark")]
    Sweep {
        #[arg(long, default_value = "ECHL")]
        variant: String,
        #[arg(long, default_value_t = 3)]
        from: usize,
        #[arg(long, default_value_t = 5)]
        to: usize,
        #[arg(long, default_value = "A4")]
        ansatz: String,
        #[arg(long)]
        reps: Option<usize>,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        omit_timings: bool,
    },
    /// Write a reference or scaling-family problem file.
    Instance {
        variant: String,
        #[arg(long, default_value_t = 3)]
        processes: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args, Default)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    shots: Option<u64>,
    /// `exact` or `sampled`.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    max_qubits: Option<usize>,
    /// `cobyla` or `nelder-mead`.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
}

enum Failure {
    Usage(String),
    Capability(String),
    Runtime(String),
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::QubitCountExceeded { .. } => Failure::Capability(e.to_string()),
            Error::InvalidProblem(_)
            | Error::InvalidConfig(_)
            | Error::MalformedTerms { .. }
            | Error::MalformedBitstring { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| io_error(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn usage(e: qvarsched::Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn apply(spec: &mut ExperimentSpec, o: &Overrides) -> Result<(), Failure> {
    let here = Path::new("command line");
    if let Some(seed) = o.seed {
        spec.seed = seed;
    }
    if let Some(runs) = o.runs {
        spec.runs = runs;
    }
    if let Some(max) = o.max_qubits {
        spec.max_qubits = max;
    }
    if let Some(method) = &o.method {
        spec.optimizer.method = method.parse::<Method>().map_err(usage)?;
    }
    if let Some(n) = o.max_iterations {
        spec.optimizer.max_iterations = n;
    }
    if let Some(n) = o.restarts {
        spec.optimizer.restarts = n;
    }
    let shots = o.shots.unwrap_or(spec.shots);
    if shots == 0 {
        return Err(Failure::Usage("shots must be at least 1".into()));
    }
    spec.shots = shots;
    let sampled = match &o.mode {
        Some(m) => parse_mode(here, m)?,
        None => matches!(spec.mode, qvarsched::Mode::Sampled(_)),
    };
    spec.mode = if sampled { qvarsched::Mode::Sampled(shots) } else { qvarsched::Mode::Exact };
    spec.optimizer.validate().map_err(usage)?;
    if spec.runs == 0 {
        return Err(Failure::Usage("runs must be at least 1".into()));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Encode { problem, out } => {
            let p = load_problem(&problem)?;
            let model = encode(&p, &p.layout());
            emit(out.as_deref(), &model.to_text())
        }
        Command::Oracle { problem, limit, max_qubits } => {
            let p = load_problem(&problem)?;
            Simulator::with_max_qubits(max_qubits).check_size(p.qubit_count())?;
            let report = enumerate_structured(&p, &p.layout())?;
            println!("variant {}", p.variant());
            println!("qubits {}", report.qubit_count);
            println!("total {}", report.total);
            println!("feasible {}", report.n_feas());
            println!("optimal {}", report.n_best());
            match &report.optimal_gain {
                Some(g) => println!("optimal_gain {}", format_rational(g)),
                None => println!("optimal_gain none"),
            }
            println!("infeasible_instance {}", report.infeasible_instance);
            for bits in report.optimal_bitstrings().into_iter().take(limit) {
                println!("{bits}");
            }
            Ok(())
        }
        Command::Circuit { problem, ansatz, reps, gates } => {
            let p = load_problem(&problem)?;
            let kind = parse_ansatz(Path::new("--ansatz"), &ansatz, reps)?;
            let layout = p.layout();
            let model = encode(&p, &layout);
            let circuit = kind.build(&p, &layout, &model)?;
            let m = metrics(&circuit);
            println!("ansatz {kind}");
            println!("qubits {}", circuit.qubit_count());
            println!("parameters {}", m.parameters);
            println!("two_qubit_gates {}", m.two_qubit_gates);
            println!("two_qubit_depth {}", m.two_qubit_depth);
            if gates {
                print!("{circuit}");
            }
            Ok(())
        }
        Command::Solve { spec, overrides, out, summary, omit_timings } => {
            let doc = load_spec(&spec)?;
            let name = doc
                .problem_path
                .file_stem()
                .map_or_else(|| "problem".to_string(), |s| s.to_string_lossy().into_owned());
            let mut exp = ExperimentSpec::new(name, doc.problem.clone(), doc.ansatz);
            exp.optimizer = doc.optimizer.clone();
            exp.mode = doc.mode();
            exp.shots = doc.shots;
            exp.runs = doc.runs;
            exp.seed = doc.seed;
            exp.max_qubits = doc.max_qubits;
            apply(&mut exp, &overrides)?;
            let report = run_experiment(&exp)?;
            let csv = report.to_csv(omit_timings)?;
            emit(out.as_deref().or(doc.output.as_deref()), &csv)?;
            if let Some(path) = summary {
                emit(Some(&path), &report.to_json(omit_timings)?)?;
            }
            let a = &report.aggregates;
            eprintln!(
                "{} {} on {} qubits: p_best {:.4} p_feas {:.4} over {} runs",
                report.instance,
                report.ansatz,
                report.qubits,
                a.p_best.mean,
                a.p_feas.mean,
                report.runs.len()
            );
            Ok(())
        }
        Command::Sweep { variant, from, to, ansatz, reps, overrides, out, omit_timings } => {
            let variant: ProblemVariant = variant.parse().map_err(usage)?;
            if from == 0 || from > to {
                return Err(Failure::Usage(format!("invalid process range {from}..={to}")));
            }
            let family = ScalingFamily::new(variant);
            let kind = parse_ansatz(Path::new("--ansatz"), &ansatz, reps)?;
            let mut template = ExperimentSpec::new("", family.instance(from)?, kind);
            apply(&mut template, &overrides)?;
            let largest = family.instance(to)?.qubit_count();
            if largest > template.max_qubits {
                return Err(Error::QubitCountExceeded {
                    required: largest,
                    max: template.max_qubits,
                }
                .into());
            }
            let reports = scaling_sweep(&family, from..=to, &template)?;
            emit(out.as_deref(), &sweep_csv(&reports, omit_timings)?)
        }
        Command::Instance { variant, processes, out } => {
            let variant: ProblemVariant = variant.parse().map_err(usage)?;
            if processes == 0 {
                return Err(Failure::Usage("processes must be at least 1".into()));
            }
            let p = ScalingFamily::new(variant).instance(processes)?;
            emit(out.as_deref(), &problem_to_toml(&p))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Capability(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(4)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;
    use qvarsched::AnsatzKind;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn qubit_limit_maps_to_capability() {
        let e: Failure = Error::QubitCountExceeded { required: 30, max: 26 }.into();
        assert!(matches!(e, Failure::Capability(_)));
        let e: Failure = Error::InvalidConfig("x".into()).into();
        assert!(matches!(e, Failure::Usage(_)));
    }

    #[test]
    fn overrides_switch_mode() {
        let p = qvarsched::instances::reference(ProblemVariant::ECFL);
        let mut spec = ExperimentSpec::new("x", p, AnsatzKind::A1);
        let o = Overrides { mode: Some("sampled".into()), shots: Some(100), ..Default::default() };
        assert!(apply(&mut spec, &o).is_ok());
        assert_eq!(spec.mode, qvarsched::Mode::Sampled(100));
        let o = Overrides { runs: Some(0), ..Default::default() };
        assert!(apply(&mut spec, &o).is_err());
    }
}
