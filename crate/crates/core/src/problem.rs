//! The Edge/Cloud assignment problem: variants, instances, the canonical
//! variable-to-qubit layout, and decoding/scoring of bit strings.

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bitstring::Bitstring;
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Which of the four problem families an instance belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProblemVariant {
    /// Processes may be sent to the Cloud instead of an Edge node.
    pub cloud_allowed: bool,
    /// Every Edge node must carry at least its threshold load.
    pub high_load: bool,
}

impl ProblemVariant {
    pub const ECFL: Self = Self { cloud_allowed: true, high_load: false };
    pub const EOFL: Self = Self { cloud_allowed: false, high_load: false };
    pub const ECHL: Self = Self { cloud_allowed: true, high_load: true };
    pub const EOHL: Self = Self { cloud_allowed: false, high_load: true };

    pub const ALL: [Self; 4] = [Self::EOHL, Self::EOFL, Self::ECHL, Self::ECFL];

    pub fn acronym(self) -> &'static str {
        match (self.cloud_allowed, self.high_load) {
            (true, false) => "ECFL",
            (false, false) => "EOFL",
            (true, true) => "ECHL",
            (false, true) => "EOHL",
        }
    }

    /// 1 when the Cloud is an option, 0 otherwise.
    pub fn cloud_flag(self) -> usize {
        usize::from(self.cloud_allowed)
    }
}

impl fmt::Display for ProblemVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.acronym())
    }
}

impl FromStr for ProblemVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "ECFL" => Ok(Self::ECFL),
            "EOFL" => Ok(Self::EOFL),
            "ECHL" => Ok(Self::ECHL),
            "EOHL" => Ok(Self::EOHL),
            other => Err(Error::InvalidProblem(format!(
                "unknown variant `{other}` (expected ECFL, EOFL, ECHL or EOHL)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProcessSpec {
    /// Resource units consumed on whichever Edge node runs the process.
    pub weight: u64,
    /// Gain of running on Edge node `j`, relative to the Cloud.
    pub values: Vec<Rational>,
}

impl ProcessSpec {
    pub fn new(weight: u64, values: Vec<Rational>) -> Self {
        Self { weight, values }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeSpec {
    pub capacity: u64,
    /// Minimum load under high-load variants; zero otherwise.
    pub threshold: u64,
}

impl NodeSpec {
    pub fn new(capacity: u64, threshold: u64) -> Self {
        Self { capacity, threshold }
    }

    pub fn free(capacity: u64) -> Self {
        Self { capacity, threshold: 0 }
    }

    /// Range of the residual capacity: `B - T` under high load, `B` otherwise.
    pub fn effective_capacity(&self, variant: ProblemVariant) -> u64 {
        if variant.high_load {
            self.capacity - self.threshold
        } else {
            self.capacity
        }
    }
}

/// Number of binary slack variables needed to encode a node's residual capacity.
pub fn slack_bit_count(node: &NodeSpec, variant: ProblemVariant) -> usize {
    let range = node.effective_capacity(variant);
    // ceil(log2(range + 1)) == number of bits in the binary form of `range`
    (u64::BITS - range.leading_zeros()) as usize
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssignmentProblem {
    variant: ProblemVariant,
    processes: Vec<ProcessSpec>,
    nodes: Vec<NodeSpec>,
}

impl AssignmentProblem {
    pub fn new(
        variant: ProblemVariant,
        processes: Vec<ProcessSpec>,
        nodes: Vec<NodeSpec>,
    ) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidProblem(msg));
        if processes.is_empty() {
            return invalid("at least one process is required".into());
        }
        if nodes.is_empty() {
            return invalid("at least one Edge node is required".into());
        }
        for (i, p) in processes.iter().enumerate() {
            if p.weight == 0 {
                return invalid(format!("processes[{i}].weight must be at least 1"));
            }
            if p.values.len() != nodes.len() {
                return invalid(format!(
                    "processes[{i}].values has {} entries but there are {} nodes",
                    p.values.len(),
                    nodes.len()
                ));
            }
            if let Some(j) = p.values.iter().position(|v| v.is_negative()) {
                return invalid(format!("processes[{i}].values[{j}] must be non-negative"));
            }
        }
        for (j, n) in nodes.iter().enumerate() {
            if n.capacity == 0 {
                return invalid(format!("nodes[{j}].capacity must be at least 1"));
            }
            if variant.high_load {
                if n.threshold >= n.capacity {
                    return invalid(format!(
                        "nodes[{j}].threshold must be below the capacity under {variant}"
                    ));
                }
            } else if n.threshold != 0 {
                return invalid(format!(
                    "nodes[{j}].threshold must be 0 under free-load variant {variant}"
                ));
            }
        }
        Ok(Self { variant, processes, nodes })
    }

    pub fn variant(&self) -> ProblemVariant {
        self.variant
    }

    pub fn processes(&self) -> &[ProcessSpec] {
        &self.processes
    }

    pub fn nodes(&self) -> &[NodeSpec] {
        &self.nodes
    }

    pub fn process_count(&self) -> usize {
        self.processes.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Choices available to each process: the Edge nodes, plus the Cloud if allowed.
    pub fn options_per_process(&self) -> usize {
        self.nodes.len() + self.variant.cloud_flag()
    }

    pub fn slack_bits(&self, node: usize) -> usize {
        slack_bit_count(&self.nodes[node], self.variant)
    }

    pub fn total_slack_bits(&self) -> usize {
        (0..self.nodes.len()).map(|j| self.slack_bits(j)).sum()
    }

    pub fn qubit_count(&self) -> usize {
        qubit_count(self)
    }

    /// Sum of every `v_ij`; the largest gain any assignment could reach.
    pub fn total_value(&self) -> Rational {
        self.processes.iter().flat_map(|p| p.values.iter()).fold(Rational::zero(), |acc, v| acc + v)
    }

    pub fn layout(&self) -> VariableLayout {
        build_layout(self)
    }
}

pub fn qubit_count(problem: &AssignmentProblem) -> usize {
    problem.process_count() * problem.options_per_process() + problem.total_slack_bits()
}

/// One binary decision variable of the penalized model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variable {
    /// `x_ij`: process runs on Edge node `node`.
    Assign { process: usize, node: usize },
    /// `p_i`: process runs on the Cloud.
    Cloud { process: usize },
    /// `b_jk`: bit `bit` (weight `2^bit`) of node `node`'s residual capacity.
    Slack { node: usize, bit: usize },
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Variable::Assign { process, node } => write!(f, "x{}{}", process + 1, node + 1),
            Variable::Cloud { process } => write!(f, "p{}", process + 1),
            Variable::Slack { node, bit } => write!(f, "b{}{}", node + 1, bit + 1),
        }
    }
}

/// Canonical variable-to-qubit mapping.
///
/// Process blocks come first (`x_i1..x_iN` then `p_i` when the Cloud is
/// allowed), followed by one slack register per node, least significant bit
/// first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableLayout {
    variables: Vec<Variable>,
    assign: Vec<Vec<usize>>,
    cloud: Vec<Option<usize>>,
    slack: Vec<Vec<usize>>,
}

pub fn build_layout(problem: &AssignmentProblem) -> VariableLayout {
    let mut variables = Vec::with_capacity(problem.qubit_count());
    let mut assign = Vec::with_capacity(problem.process_count());
    let mut cloud = Vec::with_capacity(problem.process_count());
    for i in 0..problem.process_count() {
        let mut row = Vec::with_capacity(problem.node_count());
        for j in 0..problem.node_count() {
            row.push(variables.len());
            variables.push(Variable::Assign { process: i, node: j });
        }
        assign.push(row);
        if problem.variant().cloud_allowed {
            cloud.push(Some(variables.len()));
            variables.push(Variable::Cloud { process: i });
        } else {
            cloud.push(None);
        }
    }
    let mut slack = Vec::with_capacity(problem.node_count());
    for j in 0..problem.node_count() {
        let mut register = Vec::new();
        for k in 0..problem.slack_bits(j) {
            register.push(variables.len());
            variables.push(Variable::Slack { node: j, bit: k });
        }
        slack.push(register);
    }
    VariableLayout { variables, assign, cloud, slack }
}

impl VariableLayout {
    pub fn qubit_count(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, qubit: usize) -> Variable {
        self.variables[qubit]
    }

    pub fn assign_qubit(&self, process: usize, node: usize) -> usize {
        self.assign[process][node]
    }

    pub fn cloud_qubit(&self, process: usize) -> Option<usize> {
        self.cloud[process]
    }

    /// Slack register of `node`, least significant bit first.
    pub fn slack_qubits(&self, node: usize) -> &[usize] {
        &self.slack[node]
    }

    pub fn process_count(&self) -> usize {
        self.assign.len()
    }

    pub fn node_count(&self) -> usize {
        self.slack.len()
    }

    /// The one-hot block of a process: its Edge options followed by the Cloud option.
    pub fn process_block(&self, process: usize) -> Vec<usize> {
        let mut block = self.assign[process].clone();
        block.extend(self.cloud[process]);
        block
    }

    /// Every slack qubit, node by node.
    pub fn all_slack_qubits(&self) -> Vec<usize> {
        self.slack.iter().flatten().copied().collect()
    }
}

/// Where a decoded bit string places a process.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Target {
    Edge(usize),
    Cloud,
    /// No option selected.
    Unassigned,
    /// More than one option selected.
    Conflict,
}

impl Target {
    pub fn is_valid(self) -> bool {
        matches!(self, Target::Edge(_) | Target::Cloud)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub targets: Vec<Target>,
    /// `L_j = Σ w_i x_ij`, taken from the raw assignment bits.
    pub loads: Vec<u64>,
    /// `r_j = B_j - L_j`.
    pub residuals: Vec<i64>,
    /// Integer read from each node's slack register.
    pub slack_values: Vec<u64>,
}

impl Assignment {
    /// Every process picked exactly one option.
    pub fn is_consistent(&self) -> bool {
        self.targets.iter().all(|t| t.is_valid())
    }
}

fn register_value(bits: &Bitstring, register: &[usize]) -> u64 {
    register.iter().enumerate().map(|(k, &q)| u64::from(bits.get(q)) << k).sum()
}

pub fn decode(
    problem: &AssignmentProblem,
    layout: &VariableLayout,
    bits: &Bitstring,
) -> Result<Assignment> {
    bits.expect_len(layout.qubit_count())?;
    let mut loads = vec![0u64; problem.node_count()];
    let targets = (0..problem.process_count())
        .map(|i| {
            let mut chosen = Vec::new();
            for (j, load) in loads.iter_mut().enumerate() {
                if bits.get(layout.assign_qubit(i, j)) {
                    *load += problem.processes()[i].weight;
                    chosen.push(Target::Edge(j));
                }
            }
            if let Some(q) = layout.cloud_qubit(i) {
                if bits.get(q) {
                    chosen.push(Target::Cloud);
                }
            }
            match chosen.as_slice() {
                [] => Target::Unassigned,
                [only] => *only,
                _ => Target::Conflict,
            }
        })
        .collect();
    let residuals =
        problem.nodes().iter().zip(&loads).map(|(n, &l)| n.capacity as i64 - l as i64).collect();
    let slack_values =
        (0..problem.node_count()).map(|j| register_value(bits, layout.slack_qubits(j))).collect();
    Ok(Assignment { targets, loads, residuals, slack_values })
}

/// Builds the bit string of a structurally consistent assignment, with each
/// slack register holding `(B_j - L_j) mod 2^m_j`.
pub fn encode_assignment(
    problem: &AssignmentProblem,
    layout: &VariableLayout,
    targets: &[Target],
) -> Result<Bitstring> {
    if targets.len() != problem.process_count() {
        return Err(Error::DimensionMismatch {
            expected: problem.process_count(),
            got: targets.len(),
        });
    }
    let mut bits = Bitstring::zeros(layout.qubit_count());
    let mut loads = vec![0i64; problem.node_count()];
    for (i, target) in targets.iter().enumerate() {
        match *target {
            Target::Edge(j) if j < problem.node_count() => {
                bits.set(layout.assign_qubit(i, j), true);
                loads[j] += problem.processes()[i].weight as i64;
            }
            Target::Cloud if problem.variant().cloud_allowed => {
                bits.set(layout.cloud_qubit(i).expect("cloud qubit"), true);
            }
            other => {
                return Err(Error::InvalidConfig(format!(
                    "target {other:?} for process {i} is not a valid option"
                )))
            }
        }
    }
    for (j, node) in problem.nodes().iter().enumerate() {
        let register = layout.slack_qubits(j);
        let modulus = 1i64 << register.len();
        let value = (node.capacity as i64 - loads[j]).rem_euclid(modulus);
        for (k, &q) in register.iter().enumerate() {
            bits.set(q, (value >> k) & 1 == 1);
        }
    }
    Ok(bits)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Violation {
    /// `Σ_j x_ij (+ p_i) = 1` fails; `selected` is the left-hand side.
    ProcessChoice { process: usize, selected: usize },
    /// `Σ_i w_i x_ij + Σ_k 2^k b_jk = B_j` fails.
    NodeBalance { node: usize, load: u64, slack: u64, capacity: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Feasibility {
    pub violations: Vec<Violation>,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_feasible(
    problem: &AssignmentProblem,
    layout: &VariableLayout,
    bits: &Bitstring,
) -> Result<Feasibility> {
    bits.expect_len(layout.qubit_count())?;
    let mut violations = Vec::new();
    for i in 0..problem.process_count() {
        let selected = layout.process_block(i).iter().filter(|&&q| bits.get(q)).count();
        if selected != 1 {
            violations.push(Violation::ProcessChoice { process: i, selected });
        }
    }
    for (j, node) in problem.nodes().iter().enumerate() {
        let load: u64 = (0..problem.process_count())
            .filter(|&i| bits.get(layout.assign_qubit(i, j)))
            .map(|i| problem.processes()[i].weight)
            .sum();
        let slack = register_value(bits, layout.slack_qubits(j));
        if load + slack != node.capacity {
            violations.push(Violation::NodeBalance {
                node: j,
                load,
                slack,
                capacity: node.capacity,
            });
        }
    }
    Ok(Feasibility { violations })
}

/// Total gain of the Edge placements; Cloud and invalid targets contribute nothing.
pub fn gain(problem: &AssignmentProblem, assignment: &Assignment) -> Rational {
    assignment
        .targets
        .iter()
        .enumerate()
        .filter_map(|(i, t)| match *t {
            Target::Edge(j) => Some(problem.processes()[i].values[j]),
            _ => None,
        })
        .fold(Rational::zero(), |acc, v| acc + v)
}
