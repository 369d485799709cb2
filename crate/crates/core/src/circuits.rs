//! Ansatz builders and circuit cost accounting.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;

use crate::bitstring::Bitstring;
use crate::encoder::IsingModel;
use crate::error::{Error, Result};
use crate::problem::{AssignmentProblem, VariableLayout};
use crate::rational::to_f64;
use crate::simulator::{Angle, Circuit, Gate};

/// Rotation/entangler repetitions in the slack two-local blocks.
pub const TWO_LOCAL_REPS: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AnsatzKind {
    A1,
    A2,
    A3,
    A4,
    Qaoa { reps: usize },
}

impl AnsatzKind {
    pub const VQE: [AnsatzKind; 4] =
        [AnsatzKind::A1, AnsatzKind::A2, AnsatzKind::A3, AnsatzKind::A4];

    pub fn qaoa(reps: usize) -> Result<Self> {
        if reps == 0 {
            return Err(Error::InvalidConfig("QAOA needs at least one repetition".into()));
        }
        Ok(AnsatzKind::Qaoa { reps })
    }

    pub fn build(
        self,
        problem: &AssignmentProblem,
        layout: &VariableLayout,
        model: &IsingModel,
    ) -> Result<Circuit> {
        Ok(match self {
            AnsatzKind::A1 => build_a1(problem, layout),
            AnsatzKind::A2 => build_a2(problem, layout),
            AnsatzKind::A3 => build_a3(problem, layout),
            AnsatzKind::A4 => build_a4(problem, layout),
            AnsatzKind::Qaoa { reps } => build_qaoa(model, reps)?,
        })
    }
}

impl fmt::Display for AnsatzKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnsatzKind::A1 => f.write_str("A1"),
            AnsatzKind::A2 => f.write_str("A2"),
            AnsatzKind::A3 => f.write_str("A3"),
            AnsatzKind::A4 => f.write_str("A4"),
            AnsatzKind::Qaoa { reps } => write!(f, "QAOA{reps}"),
        }
    }
}

impl FromStr for AnsatzKind {
    type Err = Error;

    /// Accepts `A1`..`A4`, `QAOA` (one repetition) and `QAOA<reps>`.
    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        match upper.as_str() {
            "A1" => Ok(AnsatzKind::A1),
            "A2" => Ok(AnsatzKind::A2),
            "A3" => Ok(AnsatzKind::A3),
            "A4" => Ok(AnsatzKind::A4),
            "QAOA" => Ok(AnsatzKind::Qaoa { reps: 1 }),
            _ => match upper.strip_prefix("QAOA").and_then(|r| r.parse().ok()) {
                Some(reps) => AnsatzKind::qaoa(reps),
                None => Err(Error::InvalidConfig(format!("unknown ansatz `{s}`"))),
            },
        }
    }
}

/// One-hot preparation over `qubits`: the first option is switched on, a CRY
/// chain spreads the excitation, and a CNOT chain clears the trailing ones.
fn one_hot_block(circuit: &mut Circuit, qubits: &[usize], process: usize) {
    circuit.x(qubits[0]);
    for k in 1..qubits.len() {
        let p = circuit.add_parameter(format!("theta_{}_{}", process + 1, k));
        circuit.cry(qubits[k - 1], qubits[k], Angle::param(p));
    }
    for k in 1..qubits.len() {
        circuit.cnot(qubits[k], qubits[k - 1]);
    }
}

fn assignment_blocks(problem: &AssignmentProblem, layout: &VariableLayout) -> Circuit {
    let mut circuit = Circuit::new(layout.qubit_count());
    for i in 0..problem.process_count() {
        one_hot_block(&mut circuit, &layout.process_block(i), i);
    }
    circuit
}

/// Cyclic nearest-neighbour CNOTs, even pairs before odd ones so that the layer
/// packs into two time steps.
fn circular_pairs(qubits: &[usize]) -> Vec<(usize, usize)> {
    let n = qubits.len();
    match n {
        0 | 1 => Vec::new(),
        2 => vec![(qubits[0], qubits[1])],
        _ => {
            let pair = |k: usize| (qubits[k], qubits[(k + 1) % n]);
            (0..n).step_by(2).chain((1..n).step_by(2)).map(pair).collect()
        }
    }
}

fn chain_pairs(qubits: &[usize]) -> Vec<(usize, usize)> {
    qubits.windows(2).map(|w| (w[0], w[1])).collect()
}

/// RY layer then entangler, repeated without a closing rotation layer.
fn two_local(circuit: &mut Circuit, qubits: &[usize], pairs: &[(usize, usize)], label: &str) {
    for rep in 0..TWO_LOCAL_REPS {
        for (k, &q) in qubits.iter().enumerate() {
            let p = circuit.add_parameter(format!("{label}_{}_{k}", rep + 1));
            circuit.ry(q, Angle::param(p));
        }
        for &(c, t) in pairs {
            circuit.cnot(c, t);
        }
    }
}

/// One-hot assignment blocks plus an independent RY on every slack qubit.
pub fn build_a1(problem: &AssignmentProblem, layout: &VariableLayout) -> Circuit {
    let mut circuit = assignment_blocks(problem, layout);
    for j in 0..problem.node_count() {
        for (k, &q) in layout.slack_qubits(j).iter().enumerate() {
            let p = circuit.add_parameter(format!("phi_{}_{k}", j + 1));
            circuit.ry(q, Angle::param(p));
        }
    }
    circuit
}

/// Assignment blocks plus one two-local circuit with cyclic entanglement
/// spanning every slack qubit.
pub fn build_a2(problem: &AssignmentProblem, layout: &VariableLayout) -> Circuit {
    let mut circuit = assignment_blocks(problem, layout);
    let slack = layout.all_slack_qubits();
    two_local(&mut circuit, &slack, &circular_pairs(&slack), "phi");
    circuit
}

/// Assignment blocks plus a separate two-local circuit with chain entanglement
/// on each node's slack register.
pub fn build_a3(problem: &AssignmentProblem, layout: &VariableLayout) -> Circuit {
    let mut circuit = assignment_blocks(problem, layout);
    for j in 0..problem.node_count() {
        let register = layout.slack_qubits(j);
        two_local(&mut circuit, register, &chain_pairs(register), &format!("phi{}", j + 1));
    }
    circuit
}

/// Assignment blocks whose choices drive the slack registers: each register
/// starts at its capacity and a controlled subtraction removes the weight of
/// every process placed on that node.
pub fn build_a4(problem: &AssignmentProblem, layout: &VariableLayout) -> Circuit {
    let mut circuit = assignment_blocks(problem, layout);
    for (j, node) in problem.nodes().iter().enumerate() {
        for (k, &q) in layout.slack_qubits(j).iter().enumerate() {
            if k < 64 && (node.capacity >> k) & 1 == 1 {
                circuit.x(q);
            }
        }
    }
    for (i, process) in problem.processes().iter().enumerate() {
        for j in 0..problem.node_count() {
            circuit.csub(
                layout.assign_qubit(i, j),
                layout.slack_qubits(j).to_vec(),
                process.weight,
            );
        }
    }
    circuit
}

/// Hadamards, then `reps` rounds of cost and mixer layers. Parameters are
/// ordered `gamma_1, beta_1, gamma_2, beta_2, …`.
pub fn build_qaoa(model: &IsingModel, reps: usize) -> Result<Circuit> {
    if reps == 0 {
        return Err(Error::InvalidConfig("QAOA needs at least one repetition".into()));
    }
    let n = model.qubit_count;
    let mut circuit = Circuit::new(n);
    for q in 0..n {
        circuit.h(q);
    }
    for r in 0..reps {
        let gamma = circuit.add_parameter(format!("gamma_{}", r + 1));
        let beta = circuit.add_parameter(format!("beta_{}", r + 1));
        for (q, h) in model.linear.iter().enumerate() {
            if !h.is_zero() {
                circuit.rz(q, Angle::scaled(gamma, 2.0 * to_f64(h)));
            }
        }
        for (&(a, b), j) in &model.pairwise {
            circuit.rzz(a, b, Angle::scaled(gamma, 2.0 * to_f64(j)));
        }
        for q in 0..n {
            circuit.rx(q, Angle::scaled(beta, 2.0));
        }
    }
    Ok(circuit)
}

/// Parameters under which A1 (and the shared assignment blocks of A2–A4)
/// outputs `bits` with certainty. Requires a one-hot string.
pub fn a1_parameters_for(
    problem: &AssignmentProblem,
    layout: &VariableLayout,
    bits: &Bitstring,
) -> Result<Vec<f64>> {
    use std::f64::consts::PI;
    bits.expect_len(layout.qubit_count())?;
    let mut params = Vec::new();
    for i in 0..problem.process_count() {
        let block = layout.process_block(i);
        let selected: Vec<usize> = (0..block.len()).filter(|&k| bits.get(block[k])).collect();
        let [choice] = selected[..] else {
            return Err(Error::InvalidConfig(format!(
                "process {} selects {} options; exactly one is required",
                i + 1,
                selected.len()
            )));
        };
        // amplitude of option k is sin(θ1/2)…sin(θk/2)·cos(θ(k+1)/2)
        params.extend((1..block.len()).map(|k| if k <= choice { PI } else { 0.0 }));
    }
    for j in 0..problem.node_count() {
        params.extend(layout.slack_qubits(j).iter().map(|&q| if bits.get(q) { PI } else { 0.0 }));
    }
    Ok(params)
}

/// Cost of an `MCX` with `controls` controls in two-qubit gates. One control is
/// a CNOT; otherwise a ladder of `2c - 3` Toffolis at six CNOTs each, in series.
pub fn mcx_cost(controls: usize) -> usize {
    match controls {
        0 => 0,
        1 => 1,
        c => 6 * (2 * c - 3),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct CircuitMetrics {
    pub parameters: usize,
    pub two_qubit_gates: usize,
    pub two_qubit_depth: usize,
}

impl fmt::Display for CircuitMetrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parameters={} two_qubit_gates={} two_qubit_depth={}",
            self.parameters, self.two_qubit_gates, self.two_qubit_depth
        )
    }
}

/// Θ, G₂ and D₂ of a circuit. Subtractors are expanded into `MCX` gates and
/// each multi-controlled gate is charged [`mcx_cost`] gates and as many time
/// steps. Depth schedules two-qubit work as soon as all its qubits are free.
pub fn metrics(circuit: &Circuit) -> CircuitMetrics {
    let mut ready = vec![0usize; circuit.qubit_count()];
    let mut gates = 0;
    for gate in circuit.gates().iter().flat_map(Gate::decompose) {
        let qubits = gate.qubits();
        let cost = match &gate {
            Gate::Mcx { controls, .. } => mcx_cost(controls.len()),
            _ if qubits.len() == 2 => 1,
            _ => 0,
        };
        if cost == 0 {
            continue;
        }
        gates += cost;
        let end = qubits.iter().map(|&q| ready[q]).max().unwrap_or(0) + cost;
        for q in qubits {
            ready[q] = end;
        }
    }
    CircuitMetrics {
        parameters: circuit.parameter_count(),
        two_qubit_gates: gates,
        two_qubit_depth: ready.into_iter().max().unwrap_or(0),
    }
}
