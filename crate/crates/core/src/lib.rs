//! Quantum variational solvers for assigning processes to Edge nodes and the Cloud.
//!
//! A problem is encoded as an Ising Hamiltonian over assignment and slack qubits,
//! explored with state-vector simulation of structured ansatz circuits, and
//! scored against exhaustive classical enumeration.

pub mod bitstring;
pub mod circuits;
pub mod encoder;
pub mod error;
pub mod experiment;
pub mod instances;
pub mod oracle;
pub mod problem;
pub mod rational;
pub mod simulator;
pub mod vqa;

pub use bitstring::Bitstring;
pub use circuits::{metrics, AnsatzKind, CircuitMetrics};
pub use encoder::{encode, IsingModel, Term};
pub use error::{Error, Result};
pub use experiment::{
    run_experiment, scaling_sweep, score, ExperimentReport, ExperimentSpec, Metrics,
};
pub use oracle::{enumerate, OracleReport};
pub use problem::{AssignmentProblem, NodeSpec, ProblemVariant, ProcessSpec, VariableLayout};
pub use rational::Rational;
pub use simulator::{Circuit, Counts, Gate, Simulator, StateVector};
pub use vqa::{run_qaoa, run_vqe, Method, Mode, OptimizerConfig, VqaResult};
