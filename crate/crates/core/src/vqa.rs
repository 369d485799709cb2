//! Hybrid variational loop: derivative-free minimisation of a circuit's energy.

use std::cell::RefCell;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::circuits::AnsatzKind;
use crate::encoder::{encode, IsingModel};
use crate::error::{Error, Result};
use crate::problem::{AssignmentProblem, VariableLayout};
use crate::simulator::{sample_with, Circuit, Counts, DiagonalObservable, Simulator};

/// Shots drawn from the optimised state.
pub const FINAL_SHOTS: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Cobyla,
    NelderMead,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "cobyla" => Ok(Method::Cobyla),
            "neldermead" => Ok(Method::NelderMead),
            _ => Err(Error::InvalidConfig(format!("unknown optimizer `{s}`"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Cobyla => "cobyla",
            Method::NelderMead => "nelder-mead",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialPoint {
    /// Each coordinate drawn uniformly from `[low, high)`.
    Uniform {
        low: f64,
        high: f64,
    },
    Zero,
    Fixed(Vec<f64>),
}

impl Default for InitialPoint {
    fn default() -> Self {
        InitialPoint::Uniform { low: 0.0, high: std::f64::consts::PI }
    }
}

impl InitialPoint {
    pub fn draw<R: Rng>(&self, dim: usize, rng: &mut R) -> Result<Vec<f64>> {
        match self {
            InitialPoint::Uniform { low, high } => {
                Ok((0..dim).map(|_| rng.gen_range(*low..*high)).collect())
            }
            InitialPoint::Zero => Ok(vec![0.0; dim]),
            InitialPoint::Fixed(x) if x.len() == dim => Ok(x.clone()),
            InitialPoint::Fixed(x) => Err(Error::DimensionMismatch { expected: dim, got: x.len() }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub method: Method,
    /// Budget of objective evaluations per restart.
    pub max_iterations: usize,
    /// Stop once successive objective values differ by less than this.
    pub tolerance: f64,
    /// Initial trust radius (simplex edge for Nelder-Mead).
    pub rho_begin: f64,
    /// Final trust radius; the step-size stopping threshold.
    pub rho_end: f64,
    pub seed: u64,
    pub restarts: usize,
    pub initial: InitialPoint,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            method: Method::Cobyla,
            max_iterations: 1000,
            tolerance: 1e-8,
            rho_begin: 1.0,
            rho_end: 1e-4,
            seed: 0,
            restarts: 10,
            initial: InitialPoint::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1");
        }
        if !(self.tolerance > 0.0) {
            return bad("tolerance must be positive");
        }
        if !(self.rho_begin > 0.0 && self.rho_end > 0.0 && self.rho_end <= self.rho_begin) {
            return bad("trust radii must satisfy 0 < rho_end <= rho_begin");
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1");
        }
        if let InitialPoint::Uniform { low, high } = self.initial {
            if !(low < high) {
                return bad("initial range must be non-empty");
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub params: Vec<f64>,
    pub value: f64,
    /// Every objective value in evaluation order.
    pub trace: Vec<f64>,
}

impl Minimum {
    pub fn evaluations(&self) -> usize {
        self.trace.len()
    }
}

/// Records evaluations and the best point; refuses work past the budget.
struct Tracker<'a> {
    objective: &'a dyn Fn(&[f64]) -> f64,
    budget: usize,
    state: RefCell<TrackerState>,
}

struct TrackerState {
    trace: Vec<f64>,
    best: Option<(Vec<f64>, f64)>,
    failure: Option<f64>,
}

impl<'a> Tracker<'a> {
    fn new(objective: &'a dyn Fn(&[f64]) -> f64, budget: usize) -> Self {
        let state = TrackerState { trace: Vec::new(), best: None, failure: None };
        Self { objective, budget, state: RefCell::new(state) }
    }

    fn exhausted(&self) -> bool {
        let s = self.state.borrow();
        s.failure.is_some() || s.trace.len() >= self.budget
    }

    /// Once stopped, replays the best value so the optimiser sees a flat
    /// landscape and winds down; a NaN would stall it.
    fn eval(&self, x: &[f64]) -> f64 {
        if self.exhausted() {
            return self.state.borrow().best.as_ref().map_or(0.0, |b| b.1);
        }
        let value = (self.objective)(x);
        let mut s = self.state.borrow_mut();
        if !value.is_finite() {
            s.failure = Some(value);
            return s.best.as_ref().map_or(0.0, |b| b.1);
        }
        s.trace.push(value);
        if s.best.as_ref().is_none_or(|(_, b)| value < *b) {
            s.best = Some((x.to_vec(), value));
        }
        value
    }

    fn finish(self) -> Result<Minimum> {
        let s = self.state.into_inner();
        if let Some(value) = s.failure {
            return Err(Error::NonFiniteObjective { value, evaluation: s.trace.len() + 1 });
        }
        let (params, value) = s.best.ok_or_else(|| Error::Optimizer("no evaluations".into()))?;
        Ok(Minimum { params, value, trace: s.trace })
    }
}

/// Minimises `objective` from `x0`; the result is the best point evaluated.
pub fn minimize_from(
    objective: impl Fn(&[f64]) -> f64,
    x0: &[f64],
    config: &OptimizerConfig,
) -> Result<Minimum> {
    config.validate()?;
    let tracker = Tracker::new(&objective, config.max_iterations);
    if x0.is_empty() {
        tracker.eval(x0);
        return tracker.finish();
    }
    match config.method {
        Method::Cobyla => {
            let n = x0.len();
            let stop = cobyla::StopTols {
                ftol_abs: config.tolerance,
                xtol_abs: vec![config.rho_end; n],
                ..Default::default()
            };
            let no_constraints: &[fn(&[f64], &mut ()) -> f64] = &[];
            // Failures such as a forced stop still leave the best point in the tracker.
            let _ = cobyla::minimize(
                |x: &[f64], _: &mut ()| tracker.eval(x),
                x0,
                &vec![(f64::NEG_INFINITY, f64::INFINITY); n],
                no_constraints,
                (),
                config.max_iterations,
                cobyla::RhoBeg::All(config.rho_begin),
                Some(stop),
            );
        }
        Method::NelderMead => nelder_mead(&tracker, x0, config),
    }
    tracker.finish()
}

/// Draws the initial point from `config.initial` with `config.seed`, then minimises.
pub fn minimize(
    objective: impl Fn(&[f64]) -> f64,
    dim: usize,
    config: &OptimizerConfig,
) -> Result<Minimum> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let x0 = config.initial.draw(dim, &mut rng)?;
    minimize_from(objective, &x0, config)
}

fn nelder_mead(tracker: &Tracker<'_>, x0: &[f64], config: &OptimizerConfig) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), tracker.eval(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += config.rho_begin;
        let f = tracker.eval(&x);
        simplex.push((x, f));
    }
    let blend = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(a, b)| a + t * (b - a)).collect()
    };
    while !tracker.exhausted() {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        let size = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread <= config.tolerance && size <= config.rho_end {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let reflected = blend(&centroid, &worst.0, -1.0);
        let fr = tracker.eval(&reflected);
        if fr < simplex[0].1 {
            let expanded = blend(&centroid, &worst.0, -2.0);
            let fe = tracker.eval(&expanded);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let (toward, ft) = if fr < worst.1 { (&reflected, fr) } else { (&worst.0, worst.1) };
            let contracted = blend(&centroid, toward, 0.5);
            let fc = tracker.eval(&contracted);
            if fc < ft {
                simplex[n] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let x = blend(&best, &vertex.0, 0.5);
                    let f = tracker.eval(&x);
                    *vertex = (x, f);
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    /// Exact expectation from the state vector.
    #[default]
    Exact,
    /// Mean energy over this many shots per evaluation.
    Sampled(u64),
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => f.write_str("exact"),
            Mode::Sampled(shots) => write!(f, "sampled({shots})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RestartOutcome {
    pub initial: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VqaResult {
    pub ansatz: AnsatzKind,
    pub best_params: Vec<f64>,
    pub best_value: f64,
    /// Objective trace of the winning restart.
    pub trace: Vec<f64>,
    /// Evaluations spent by the winning restart.
    pub iterations: usize,
    pub counts: Counts,
    pub restarts: Vec<RestartOutcome>,
    pub wall_time: Duration,
}

impl VqaResult {
    pub fn total_evaluations(&self) -> usize {
        self.restarts.iter().map(|r| r.evaluations).sum()
    }

    /// Mean evaluations per restart.
    pub fn mean_iterations(&self) -> f64 {
        self.total_evaluations() as f64 / self.restarts.len() as f64
    }
}

/// Everything needed to evaluate one circuit's energy against one model.
pub struct EnergyLandscape {
    pub circuit: Circuit,
    observable: DiagonalObservable,
    simulator: Simulator,
}

impl EnergyLandscape {
    pub fn new(circuit: Circuit, model: &IsingModel, simulator: Simulator) -> Result<Self> {
        simulator.check_size(circuit.qubit_count())?;
        if circuit.qubit_count() != model.qubit_count {
            return Err(Error::DimensionMismatch {
                expected: model.qubit_count,
                got: circuit.qubit_count(),
            });
        }
        Ok(Self { circuit, observable: DiagonalObservable::new(model), simulator })
    }

    pub fn exact(&self, params: &[f64]) -> Result<f64> {
        self.observable.expectation(&self.simulator.run(&self.circuit, params)?)
    }

    pub fn sampled<R: Rng>(&self, params: &[f64], shots: u64, rng: &mut R) -> Result<f64> {
        let state = self.simulator.run(&self.circuit, params)?;
        self.observable.mean_energy(&sample_with(&state, shots, rng))
    }

    pub fn counts<R: Rng>(&self, params: &[f64], shots: u64, rng: &mut R) -> Result<Counts> {
        Ok(sample_with(&self.simulator.run(&self.circuit, params)?, shots, rng))
    }

    /// One optimiser run; errors raised inside the objective are surfaced.
    pub fn optimise(
        &self,
        x0: &[f64],
        config: &OptimizerConfig,
        mode: Mode,
        rng: &mut ChaCha8Rng,
    ) -> Result<Minimum> {
        let error = RefCell::new(None);
        let rng = RefCell::new(rng);
        let objective = |x: &[f64]| {
            let value = match mode {
                Mode::Exact => self.exact(x),
                Mode::Sampled(shots) => self.sampled(x, shots, &mut **rng.borrow_mut()),
            };
            value.unwrap_or_else(|e| {
                error.borrow_mut().get_or_insert(e);
                f64::NAN
            })
        };
        let result = minimize_from(objective, x0, config);
        match error.into_inner() {
            Some(e) => Err(e),
            None => result,
        }
    }
}

/// Generator for restart `stream` of a run seeded with `seed`.
pub fn restart_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Independent seeded restarts in parallel, best kept; the final `shots` counts
/// come from a generator stream after the restart streams.
pub fn optimise_landscape(
    landscape: &EnergyLandscape,
    ansatz: AnsatzKind,
    config: &OptimizerConfig,
    mode: Mode,
    shots: u64,
) -> Result<VqaResult> {
    config.validate()?;
    if mode == Mode::Sampled(0) || shots == 0 {
        return Err(Error::InvalidConfig("at least one shot is required".into()));
    }
    let start = Instant::now();
    let dim = landscape.circuit.parameter_count();
    let runs: Vec<(Vec<f64>, Minimum)> = (0..config.restarts as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = restart_rng(config.seed, r);
            let x0 = config.initial.draw(dim, &mut rng)?;
            let min = landscape.optimise(&x0, config, mode, &mut rng)?;
            Ok((x0, min))
        })
        .collect::<Result<_>>()?;
    let winner = runs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.value.total_cmp(&b.1 .1.value).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("at least one restart");
    let best = runs[winner].1.clone();
    let mut rng = restart_rng(config.seed, config.restarts as u64);
    let counts = landscape.counts(&best.params, shots, &mut rng)?;
    let restarts = runs
        .into_iter()
        .map(|(initial, m)| RestartOutcome {
            initial,
            value: m.value,
            evaluations: m.evaluations(),
        })
        .collect();
    Ok(VqaResult {
        ansatz,
        best_value: best.value,
        iterations: best.evaluations(),
        best_params: best.params,
        trace: best.trace,
        counts,
        restarts,
        wall_time: start.elapsed(),
    })
}

pub fn run_ansatz(
    problem: &AssignmentProblem,
    layout: &VariableLayout,
    ansatz: AnsatzKind,
    config: &OptimizerConfig,
    mode: Mode,
    shots: u64,
    simulator: Simulator,
) -> Result<VqaResult> {
    simulator.check_size(layout.qubit_count())?;
    let model = encode(problem, layout);
    let circuit = ansatz.build(problem, layout, &model)?;
    let landscape = EnergyLandscape::new(circuit, &model, simulator)?;
    optimise_landscape(&landscape, ansatz, config, mode, shots)
}

/// VQE with one of the structured ansatzes.
pub fn run_vqe(
    problem: &AssignmentProblem,
    ansatz: AnsatzKind,
    config: &OptimizerConfig,
    mode: Mode,
) -> Result<VqaResult> {
    if let AnsatzKind::Qaoa { .. } = ansatz {
        return Err(Error::InvalidConfig("use run_qaoa for QAOA circuits".into()));
    }
    run_ansatz(problem, &problem.layout(), ansatz, config, mode, FINAL_SHOTS, Simulator::default())
}

pub fn run_qaoa(
    problem: &AssignmentProblem,
    reps: usize,
    config: &OptimizerConfig,
    mode: Mode,
) -> Result<VqaResult> {
    let ansatz = AnsatzKind::qaoa(reps)?;
    run_ansatz(problem, &problem.layout(), ansatz, config, mode, FINAL_SHOTS, Simulator::default())
}
