//! Classical ground truth: exhaustive enumeration of the solution space and
//! dense-matrix circuit evaluation for small registers.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;

use crate::bitstring::Bitstring;
use crate::error::{Error, Result};
use crate::problem::{AssignmentProblem, VariableLayout};
use crate::rational::Rational;
use crate::simulator::{Circuit, Gate, StateVector, DEFAULT_MAX_QUBITS};

pub const DENSE_MAX_QUBITS: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleReport {
    pub qubit_count: usize,
    /// `2^Q`.
    pub total: u64,
    pub optimal_gain: Option<Rational>,
    /// Basis indices of every feasible string attaining the optimal gain.
    pub optimal: BTreeSet<usize>,
    /// Basis index → gain for every feasible string.
    pub feasible: BTreeMap<usize, Rational>,
    pub infeasible_instance: bool,
}

impl OracleReport {
    fn from_feasible(qubit_count: usize, feasible: BTreeMap<usize, Rational>) -> Self {
        let optimal_gain = feasible.values().max().copied();
        let optimal =
            feasible.iter().filter(|(_, g)| Some(**g) == optimal_gain).map(|(&i, _)| i).collect();
        Self {
            qubit_count,
            total: 1u64 << qubit_count,
            optimal_gain,
            optimal,
            infeasible_instance: feasible.is_empty(),
            feasible,
        }
    }

    pub fn n_best(&self) -> usize {
        self.optimal.len()
    }

    pub fn n_feas(&self) -> usize {
        self.feasible.len()
    }

    pub fn optimal_bitstrings(&self) -> Vec<Bitstring> {
        self.optimal.iter().map(|&i| Bitstring::from_index(i, self.qubit_count)).collect()
    }

    pub fn is_feasible(&self, index: usize) -> bool {
        self.feasible.contains_key(&index)
    }

    pub fn is_optimal(&self, index: usize) -> bool {
        self.optimal.contains(&index)
    }
}

/// Bit masks over basis indices for the constraint sums.
struct ConstraintMasks {
    blocks: Vec<usize>,
    /// Per node: (mask, weight) for assignment bits and slack bits alike.
    nodes: Vec<(u64, Vec<(usize, u64)>)>,
    values: Vec<(usize, Rational)>,
}

impl ConstraintMasks {
    fn new(problem: &AssignmentProblem, layout: &VariableLayout) -> Self {
        let q = layout.qubit_count();
        let bit = |qubit: usize| 1usize << (q - 1 - qubit);
        let blocks = (0..problem.process_count())
            .map(|i| layout.process_block(i).into_iter().map(bit).sum())
            .collect();
        let nodes = problem
            .nodes()
            .iter()
            .enumerate()
            .map(|(j, node)| {
                let mut terms: Vec<(usize, u64)> = problem
                    .processes()
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (bit(layout.assign_qubit(i, j)), p.weight))
                    .collect();
                terms.extend(
                    layout.slack_qubits(j).iter().enumerate().map(|(k, &s)| (bit(s), 1u64 << k)),
                );
                (node.capacity, terms)
            })
            .collect();
        let values = problem
            .processes()
            .iter()
            .enumerate()
            .flat_map(|(i, p)| p.values.iter().enumerate().map(move |(j, v)| (i, j, *v)))
            .map(|(i, j, v)| (bit(layout.assign_qubit(i, j)), v))
            .collect();
        Self { blocks, nodes, values }
    }

    fn feasible(&self, index: usize) -> bool {
        self.blocks.iter().all(|&m| (index & m).count_ones() == 1)
            && self.nodes.iter().all(|(cap, terms)| {
                terms.iter().filter(|(m, _)| index & m != 0).map(|(_, w)| w).sum::<u64>() == *cap
            })
    }

    fn gain(&self, index: usize) -> Rational {
        self.values
            .iter()
            .filter(|(m, _)| index & m != 0)
            .fold(Rational::zero(), |acc, (_, v)| acc + v)
    }
}

/// Scans all `2^Q` bit strings.
pub fn enumerate(problem: &AssignmentProblem, layout: &VariableLayout) -> Result<OracleReport> {
    enumerate_with_limit(problem, layout, DEFAULT_MAX_QUBITS)
}

pub fn enumerate_with_limit(
    problem: &AssignmentProblem,
    layout: &VariableLayout,
    max_qubits: usize,
) -> Result<OracleReport> {
    let q = layout.qubit_count();
    if q > max_qubits {
        return Err(Error::QubitCountExceeded { required: q, max: max_qubits });
    }
    let masks = ConstraintMasks::new(problem, layout);
    let feasible: BTreeMap<usize, Rational> = (0..1usize << q)
        .into_par_iter()
        .filter(|&i| masks.feasible(i))
        .map(|i| (i, masks.gain(i)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect();
    Ok(OracleReport::from_feasible(q, feasible))
}

/// Walks the `(N + c)^P` assignments and derives each slack register from the
/// residual capacity; agrees with [`enumerate`] without touching `2^Q` strings.
pub fn enumerate_structured(
    problem: &AssignmentProblem,
    layout: &VariableLayout,
) -> Result<OracleReport> {
    let q = layout.qubit_count();
    if q >= usize::BITS as usize {
        return Err(Error::QubitCountExceeded { required: q, max: usize::BITS as usize - 1 });
    }
    let bit = |qubit: usize| 1usize << (q - 1 - qubit);
    let options = problem.options_per_process();
    let n = problem.node_count();
    let mut choice = vec![0usize; problem.process_count()];
    let mut feasible = BTreeMap::new();
    loop {
        let mut loads = vec![0u64; n];
        let mut index = 0usize;
        let mut value = Rational::zero();
        for (i, &c) in choice.iter().enumerate() {
            if c < n {
                loads[c] += problem.processes()[i].weight;
                index |= bit(layout.assign_qubit(i, c));
                value += problem.processes()[i].values[c];
            } else {
                index |= bit(layout.cloud_qubit(i).expect("cloud option"));
            }
        }
        let mut ok = true;
        for (j, node) in problem.nodes().iter().enumerate() {
            let register = layout.slack_qubits(j);
            let Some(residual) = node.capacity.checked_sub(loads[j]) else {
                ok = false;
                break;
            };
            if residual >> register.len() != 0 {
                ok = false;
                break;
            }
            for (k, &s) in register.iter().enumerate() {
                if (residual >> k) & 1 == 1 {
                    index |= bit(s);
                }
            }
        }
        if ok {
            feasible.insert(index, value);
        }
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == choice.len() {
                return Ok(OracleReport::from_feasible(q, feasible));
            }
            choice[pos] += 1;
            if choice[pos] < options {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

type Dense = DMatrix<Complex64>;

fn op(entries: [[f64; 2]; 2]) -> Dense {
    Dense::from_fn(2, 2, |r, c| Complex64::new(entries[r][c], 0.0))
}

fn op_c(entries: [[Complex64; 2]; 2]) -> Dense {
    Dense::from_fn(2, 2, |r, c| entries[r][c])
}

/// Tensor product over all qubits, with `factors[q]` on qubit `q` and identity elsewhere.
fn tensor(n: usize, factors: &[(usize, Dense)]) -> Dense {
    let mut out = Dense::identity(1, 1);
    for q in 0..n {
        let f = factors
            .iter()
            .find(|(fq, _)| *fq == q)
            .map(|(_, m)| m.clone())
            .unwrap_or_else(|| Dense::identity(2, 2));
        out = out.kronecker(&f);
    }
    out
}

fn gate_unitary(n: usize, gate: &Gate, params: &[f64]) -> Dense {
    let i = Complex64::i();
    let p0 = op([[1.0, 0.0], [0.0, 0.0]]);
    let p1 = op([[0.0, 0.0], [0.0, 1.0]]);
    let x = op([[0.0, 1.0], [1.0, 0.0]]);
    let z = op([[1.0, 0.0], [0.0, -1.0]]);
    let ry = |t: f64| op([[(t / 2.0).cos(), -(t / 2.0).sin()], [(t / 2.0).sin(), (t / 2.0).cos()]]);
    let dim = 1usize << n;
    match gate {
        Gate::X(q) => tensor(n, &[(*q, x)]),
        Gate::H(q) => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            tensor(n, &[(*q, op([[s, s], [s, -s]]))])
        }
        Gate::Rx(q, a) => {
            let t = a.resolve(params) / 2.0;
            let m = op_c([
                [Complex64::new(t.cos(), 0.0), -i * t.sin()],
                [-i * t.sin(), Complex64::new(t.cos(), 0.0)],
            ]);
            tensor(n, &[(*q, m)])
        }
        Gate::Ry(q, a) => tensor(n, &[(*q, ry(a.resolve(params)))]),
        Gate::Rz(q, a) => {
            let t = a.resolve(params) / 2.0;
            let m = op_c([[(-i * t).exp(), Complex64::zero()], [Complex64::zero(), (i * t).exp()]]);
            tensor(n, &[(*q, m)])
        }
        Gate::Cnot { control, target } => {
            tensor(n, &[(*control, p0)]) + tensor(n, &[(*control, p1), (*target, x)])
        }
        Gate::Cry { control, target, angle } => {
            tensor(n, &[(*control, p0)])
                + tensor(n, &[(*control, p1), (*target, ry(angle.resolve(params)))])
        }
        Gate::Rzz { a, b, angle } => {
            let t = angle.resolve(params) / 2.0;
            Dense::identity(dim, dim) * Complex64::new(t.cos(), 0.0)
                - tensor(n, &[(*a, z.clone()), (*b, z)]) * (i * t.sin())
        }
        Gate::Mcx { controls, target } => {
            let all_set: Vec<(usize, Dense)> = controls.iter().map(|&c| (c, p1.clone())).collect();
            let mut flipped = all_set.clone();
            flipped.push((*target, x));
            Dense::identity(dim, dim) - tensor(n, &all_set) + tensor(n, &flipped)
        }
        Gate::Csub { control, register, constant } => {
            let modulus = 1u64 << register.len();
            let mut m = Dense::zeros(dim, dim);
            for col in 0..dim {
                let b = Bitstring::from_index(col, n);
                let mut out = b.clone();
                if b.get(*control) {
                    let r: u64 =
                        register.iter().enumerate().map(|(k, &q)| u64::from(b.get(q)) << k).sum();
                    let shifted = (r + modulus - constant % modulus) % modulus;
                    for (k, &q) in register.iter().enumerate() {
                        out.set(q, (shifted >> k) & 1 == 1);
                    }
                }
                m[(out.to_index(), col)] = Complex64::new(1.0, 0.0);
            }
            m
        }
    }
}

/// Evolves `|0…0⟩` by explicit `2^n × 2^n` matrix products.
pub fn dense_state(circuit: &Circuit, params: &[f64]) -> Result<StateVector> {
    let n = circuit.qubit_count();
    if n > DENSE_MAX_QUBITS {
        return Err(Error::QubitCountExceeded { required: n, max: DENSE_MAX_QUBITS });
    }
    if params.len() != circuit.parameter_count() {
        return match circuit.parameters().get(params.len()) {
            Some(name) => Err(Error::UnboundParameter(name.clone())),
            None => Err(Error::DimensionMismatch {
                expected: circuit.parameter_count(),
                got: params.len(),
            }),
        };
    }
    let dim = 1usize << n;
    let mut unitary = Dense::identity(dim, dim);
    for gate in circuit.gates() {
        unitary = gate_unitary(n, gate, params) * unitary;
    }
    Ok(StateVector::from_amplitudes(unitary.column(0).iter().copied().collect()))
}
