//! Performance indices and seeded multi-run experiments.

use std::ops::RangeInclusive;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::circuits::AnsatzKind;
use crate::error::{Error, Result};
use crate::instances::ScalingFamily;
use crate::oracle::{enumerate_structured, OracleReport};
use crate::problem::AssignmentProblem;
use crate::rational::format_rational;
use crate::simulator::{Counts, Simulator};
use crate::vqa::{run_ansatz, Mode, OptimizerConfig, FINAL_SHOTS};

/// Shot-based success probabilities and their ratio to random guessing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Metrics {
    pub p_best: f64,
    pub p_feas: f64,
    pub c_best: f64,
    pub c_feas: f64,
}

/// `C = P · 2^Q / N`, zero when there is nothing to hit.
fn coefficient(p: f64, qubits: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        p * (qubits as f64).exp2() / n as f64
    }
}

/// Scores a histogram against the exact solution space; shots on any optimum count.
pub fn score(counts: &Counts, report: &OracleReport) -> Result<Metrics> {
    if counts.qubit_count() != report.qubit_count {
        return Err(Error::InstanceMismatch {
            expected: report.qubit_count,
            got: counts.qubit_count(),
        });
    }
    if counts.shots() == 0 {
        return Err(Error::InvalidConfig("counts hold no shots".into()));
    }
    let (mut best, mut feas) = (0u64, 0u64);
    for (idx, n) in counts.iter() {
        if report.is_feasible(idx) {
            feas += n;
            if report.is_optimal(idx) {
                best += n;
            }
        }
    }
    let shots = counts.shots() as f64;
    let (p_best, p_feas) = (best as f64 / shots, feas as f64 / shots);
    Ok(Metrics {
        p_best,
        p_feas,
        c_best: coefficient(p_best, report.qubit_count, report.n_best()),
        c_feas: coefficient(p_feas, report.qubit_count, report.n_feas()),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub instance: String,
    pub problem: AssignmentProblem,
    pub ansatz: AnsatzKind,
    pub optimizer: OptimizerConfig,
    pub mode: Mode,
    /// Shots in the final histogram of each run.
    pub shots: u64,
    pub runs: usize,
    /// Master seed; every run seed is derived from it.
    pub seed: u64,
    pub max_qubits: usize,
}

impl ExperimentSpec {
    pub fn new(
        instance: impl Into<String>,
        problem: AssignmentProblem,
        ansatz: AnsatzKind,
    ) -> Self {
        Self {
            instance: instance.into(),
            problem,
            ansatz,
            optimizer: OptimizerConfig::default(),
            mode: Mode::Exact,
            shots: FINAL_SHOTS,
            runs: 1,
            seed: 0,
            max_qubits: Simulator::default().max_qubits,
        }
    }

    pub fn run_seeds(&self) -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.runs).map(|_| rng.next_u64()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub seed: u64,
    #[serde(flatten)]
    pub metrics: Metrics,
    pub best_value: f64,
    pub best_params: Vec<f64>,
    /// Evaluations spent by the winning restart.
    pub iterations: usize,
    /// Evaluations across all restarts.
    pub evaluations: usize,
    pub wall_ms: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation; zero for a single run.
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // rounding can push the mean a hair outside the sample range
        Self { mean: mean.clamp(min, max), std, min, max }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregates {
    pub p_best: Summary,
    pub p_feas: Summary,
    pub c_best: Summary,
    pub c_feas: Summary,
    pub iterations: Summary,
    pub wall_ms: Summary,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub instance: String,
    pub variant: String,
    pub processes: usize,
    pub qubits: usize,
    pub ansatz: String,
    pub parameters: usize,
    pub optimizer: String,
    pub max_iterations: usize,
    pub restarts: usize,
    pub mode: String,
    pub shots: u64,
    pub seed: u64,
    pub n_best: usize,
    pub n_feas: usize,
    pub optimal_gain: Option<String>,
    pub runs: Vec<RunRecord>,
    pub aggregates: Aggregates,
}

pub const CSV_HEADER: [&str; 9] =
    ["instance", "ansatz", "seed", "p_best", "p_feas", "c_best", "c_feas", "iterations", "wall_ms"];

impl ExperimentReport {
    /// One row per run. With `omit_timings` the wall-clock column is zeroed so
    /// repeated runs produce identical bytes.
    pub fn to_csv(&self, omit_timings: bool) -> Result<String> {
        write_csv(std::slice::from_ref(self), omit_timings)
    }

    pub fn to_json(&self, omit_timings: bool) -> Result<String> {
        let mut copy = self.clone();
        if omit_timings {
            copy.strip_timings();
        }
        serde_json::to_string_pretty(&copy).map_err(|e| Error::Output(e.to_string()))
    }

    pub fn strip_timings(&mut self) {
        for run in &mut self.runs {
            run.wall_ms = 0.0;
        }
        self.aggregates.wall_ms = Summary::of(&vec![0.0; self.runs.len()]);
    }
}

/// Rows of several reports under a single header.
pub fn write_csv(reports: &[ExperimentReport], omit_timings: bool) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Output(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for report in reports {
        for run in &report.runs {
            let wall = if omit_timings { 0.0 } else { run.wall_ms };
            w.write_record([
                report.instance.clone(),
                report.ansatz.clone(),
                run.seed.to_string(),
                run.metrics.p_best.to_string(),
                run.metrics.p_feas.to_string(),
                run.metrics.c_best.to_string(),
                run.metrics.c_feas.to_string(),
                run.iterations.to_string(),
                wall.to_string(),
            ])
            .map_err(io)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Output(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Runs the experiment's seeded runs in parallel and scores each against the exact optima.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    if spec.runs == 0 {
        return Err(Error::InvalidConfig("runs must be at least 1".into()));
    }
    let simulator = Simulator::with_max_qubits(spec.max_qubits);
    let layout = spec.problem.layout();
    simulator.check_size(layout.qubit_count())?;
    let oracle = enumerate_structured(&spec.problem, &layout)?;
    let runs = spec
        .run_seeds()
        .into_par_iter()
        .map(|seed| {
            let start = Instant::now();
            let config = OptimizerConfig { seed, ..spec.optimizer.clone() };
            let result = run_ansatz(
                &spec.problem,
                &layout,
                spec.ansatz,
                &config,
                spec.mode,
                spec.shots,
                simulator,
            )?;
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            Ok(RunRecord {
                seed,
                metrics: score(&result.counts, &oracle)?,
                best_value: result.best_value,
                iterations: result.iterations,
                evaluations: result.total_evaluations(),
                best_params: result.best_params,
                wall_ms,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let column = |f: &dyn Fn(&RunRecord) -> f64| -> Summary {
        Summary::of(&runs.iter().map(f).collect::<Vec<_>>())
    };
    let aggregates = Aggregates {
        p_best: column(&|r| r.metrics.p_best),
        p_feas: column(&|r| r.metrics.p_feas),
        c_best: column(&|r| r.metrics.c_best),
        c_feas: column(&|r| r.metrics.c_feas),
        iterations: column(&|r| r.iterations as f64),
        wall_ms: column(&|r| r.wall_ms),
    };
    Ok(ExperimentReport {
        instance: spec.instance.clone(),
        variant: spec.problem.variant().to_string(),
        processes: spec.problem.process_count(),
        qubits: layout.qubit_count(),
        ansatz: spec.ansatz.to_string(),
        parameters: runs.first().map_or(0, |r| r.best_params.len()),
        optimizer: spec.optimizer.method.to_string(),
        max_iterations: spec.optimizer.max_iterations,
        restarts: spec.optimizer.restarts,
        mode: spec.mode.to_string(),
        shots: spec.shots,
        seed: spec.seed,
        n_best: oracle.n_best(),
        n_feas: oracle.n_feas(),
        optimal_gain: oracle.optimal_gain.map(|g| format_rational(&g)),
        runs,
        aggregates,
    })
}

/// One experiment per process count; `template` supplies everything except the instance.
pub fn scaling_sweep(
    family: &ScalingFamily,
    processes: RangeInclusive<usize>,
    template: &ExperimentSpec,
) -> Result<Vec<ExperimentReport>> {
    processes
        .map(|p| {
            let spec = ExperimentSpec {
                instance: family.name(p),
                problem: family.instance(p)?,
                ..template.clone()
            };
            run_experiment(&spec)
        })
        .collect()
}

pub const SWEEP_CSV_HEADER: [&str; 10] = [
    "instance",
    "processes",
    "qubits",
    "ansatz",
    "runs",
    "p_best_mean",
    "c_best_mean",
    "iterations_mean",
    "wall_ms_mean",
    "ms_per_evaluation",
];

/// One row per sweep point, for trend plots against the qubit count.
pub fn sweep_csv(reports: &[ExperimentReport], omit_timings: bool) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Output(e.to_string());
    w.write_record(SWEEP_CSV_HEADER).map_err(io)?;
    for r in reports {
        let (wall, per_eval) = if omit_timings {
            (0.0, 0.0)
        } else {
            (r.aggregates.wall_ms.mean, ms_per_evaluation(r))
        };
        w.write_record([
            r.instance.clone(),
            r.processes.to_string(),
            r.qubits.to_string(),
            r.ansatz.clone(),
            r.runs.len().to_string(),
            r.aggregates.p_best.mean.to_string(),
            r.aggregates.c_best.mean.to_string(),
            r.aggregates.iterations.mean.to_string(),
            wall.to_string(),
            per_eval.to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Output(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Total wall time over total objective evaluations.
pub fn ms_per_evaluation(report: &ExperimentReport) -> f64 {
    let evals: usize = report.runs.iter().map(|r| r.evaluations).sum();
    let wall: f64 = report.runs.iter().map(|r| r.wall_ms).sum();
    wall / evals.max(1) as f64
}
