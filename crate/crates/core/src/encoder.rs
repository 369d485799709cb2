//! Penalized objective and its Ising form.
//!
//! Constraints become squared penalties weighted by `A = 1 + Σ v_ij`, the
//! binary variables are replaced by spins via `x = (1 - z) / 2`, and the
//! resulting polynomial is kept with the signs it has after expansion: the
//! energy of a spin string is `constant + Σ linear_i z_i + Σ pairwise_ij z_i z_j`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{One, Zero};

use crate::bitstring::Bitstring;
use crate::error::{Error, Result};
use crate::problem::{AssignmentProblem, VariableLayout};
use crate::rational::{format_rational, int, parse_decimal, to_f64, Rational};

const TEXT_HEADER: &str = "# qvarsched-v1 ising";

pub fn penalty_weight(problem: &AssignmentProblem) -> Rational {
    Rational::one() + problem.total_value()
}

/// Quadratic pseudo-Boolean polynomial over `{0, 1}` variables with `x² = x` folded in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Qubo {
    pub qubit_count: usize,
    pub constant: Rational,
    pub linear: Vec<Rational>,
    pub quadratic: BTreeMap<(usize, usize), Rational>,
}

impl Qubo {
    pub fn new(qubit_count: usize) -> Self {
        Self {
            qubit_count,
            constant: Rational::zero(),
            linear: vec![Rational::zero(); qubit_count],
            quadratic: BTreeMap::new(),
        }
    }

    pub fn add_linear(&mut self, qubit: usize, coefficient: Rational) {
        self.linear[qubit] += coefficient;
    }

    pub fn add_quadratic(&mut self, a: usize, b: usize, coefficient: Rational) {
        if a == b {
            self.linear[a] += coefficient;
            return;
        }
        let key = (a.min(b), a.max(b));
        let entry = self.quadratic.entry(key).or_insert_with(Rational::zero);
        *entry += coefficient;
        if entry.is_zero() {
            self.quadratic.remove(&key);
        }
    }

    /// Adds `weight · (offset + Σ c_k x_k)²`.
    pub fn add_squared(&mut self, weight: Rational, offset: Rational, terms: &[(usize, Rational)]) {
        self.constant += weight * offset * offset;
        for (a, &(qa, ca)) in terms.iter().enumerate() {
            // x² = x for binaries
            self.add_linear(qa, weight * (int(2) * offset * ca + ca * ca));
            for &(qb, cb) in &terms[a + 1..] {
                self.add_quadratic(qa, qb, weight * int(2) * ca * cb);
            }
        }
    }

    pub fn evaluate(&self, bits: &Bitstring) -> Result<Rational> {
        bits.expect_len(self.qubit_count)?;
        let mut value = self.constant;
        for (q, c) in self.linear.iter().enumerate() {
            if bits.get(q) {
                value += c;
            }
        }
        for (&(a, b), c) in &self.quadratic {
            if bits.get(a) && bits.get(b) {
                value += c;
            }
        }
        Ok(value)
    }

    /// Substitutes `x = (1 - z) / 2` and collects spin terms.
    pub fn to_ising(&self, penalty: Option<Rational>) -> IsingModel {
        let half = Rational::new(1, 2);
        let quarter = Rational::new(1, 4);
        let mut constant = self.constant;
        let mut linear = vec![Rational::zero(); self.qubit_count];
        let mut pairwise = BTreeMap::new();
        for (q, c) in self.linear.iter().enumerate() {
            constant += c * half;
            linear[q] -= c * half;
        }
        for (&(a, b), c) in &self.quadratic {
            constant += c * quarter;
            linear[a] -= c * quarter;
            linear[b] -= c * quarter;
            pairwise.insert((a, b), c * quarter);
        }
        IsingModel { qubit_count: self.qubit_count, constant, linear, pairwise, penalty }
    }
}

/// The penalized extended objective as a QUBO over the layout's variables.
pub fn build_qubo(problem: &AssignmentProblem, layout: &VariableLayout) -> Qubo {
    let penalty = penalty_weight(problem);
    let mut qubo = Qubo::new(layout.qubit_count());
    for (i, process) in problem.processes().iter().enumerate() {
        for (j, v) in process.values.iter().enumerate() {
            qubo.add_linear(layout.assign_qubit(i, j), -*v);
        }
        // (1 - Σ_j x_ij - p_i)²
        let block: Vec<(usize, Rational)> =
            layout.process_block(i).into_iter().map(|q| (q, -Rational::one())).collect();
        qubo.add_squared(penalty, Rational::one(), &block);
    }
    for (j, node) in problem.nodes().iter().enumerate() {
        // (B_j - Σ_i w_i x_ij - Σ_k 2^k b_jk)²
        let mut terms: Vec<(usize, Rational)> = problem
            .processes()
            .iter()
            .enumerate()
            .map(|(i, p)| (layout.assign_qubit(i, j), int(-(p.weight as i128))))
            .collect();
        terms.extend(
            layout.slack_qubits(j).iter().enumerate().map(|(k, &q)| (q, int(-(1i128 << k)))),
        );
        qubo.add_squared(penalty, int(node.capacity as i128), &terms);
    }
    qubo
}

pub fn encode(problem: &AssignmentProblem, layout: &VariableLayout) -> IsingModel {
    build_qubo(problem, layout).to_ising(Some(penalty_weight(problem)))
}

/// Evaluates the penalized objective straight from the constraint sums,
/// without going through any polynomial expansion.
pub fn extended_objective(
    problem: &AssignmentProblem,
    layout: &VariableLayout,
    bits: &Bitstring,
) -> Result<Rational> {
    bits.expect_len(layout.qubit_count())?;
    let a = penalty_weight(problem);
    let bit = |q: usize| i128::from(bits.get(q));
    let mut value = Rational::zero();
    for (i, p) in problem.processes().iter().enumerate() {
        for (j, v) in p.values.iter().enumerate() {
            value -= v * int(bit(layout.assign_qubit(i, j)));
        }
        let chosen: i128 = layout.process_block(i).into_iter().map(bit).sum();
        value += a * int((1 - chosen) * (1 - chosen));
    }
    for (j, node) in problem.nodes().iter().enumerate() {
        let load: i128 = (0..problem.process_count())
            .map(|i| problem.processes()[i].weight as i128 * bit(layout.assign_qubit(i, j)))
            .sum();
        let slack: i128 =
            layout.slack_qubits(j).iter().enumerate().map(|(k, &q)| bit(q) << k).sum();
        let gap = node.capacity as i128 - load - slack;
        value += a * int(gap * gap);
    }
    Ok(value)
}

/// Diagonal Hamiltonian `constant + Σ h_i Z_i + Σ_{i<j} J_ij Z_i Z_j`, coefficients stored as expanded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsingModel {
    pub qubit_count: usize,
    pub constant: Rational,
    pub linear: Vec<Rational>,
    /// Keys satisfy `i < j`; zero coefficients are never stored.
    pub pairwise: BTreeMap<(usize, usize), Rational>,
    /// Constraint penalty used to build the model, when it came from a problem.
    pub penalty: Option<Rational>,
}

/// One Pauli-Z product term; an empty qubit list is the constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub qubits: Vec<usize>,
    pub coefficient: Rational,
}

impl Term {
    pub fn new(qubits: Vec<usize>, coefficient: Rational) -> Self {
        Self { qubits, coefficient }
    }
}

impl IsingModel {
    /// Spin energy of a bit string, with bit 0 ↦ z = +1 and bit 1 ↦ z = -1.
    pub fn energy(&self, bits: &Bitstring) -> Result<Rational> {
        bits.expect_len(self.qubit_count)?;
        let spin = |q: usize| if bits.get(q) { -Rational::one() } else { Rational::one() };
        let mut e = self.constant;
        for (q, h) in self.linear.iter().enumerate() {
            e += h * spin(q);
        }
        for (&(a, b), j) in &self.pairwise {
            e += j * spin(a) * spin(b);
        }
        Ok(e)
    }

    /// Constant first, then non-zero singleton terms, then pair terms.
    pub fn to_terms(&self) -> Vec<Term> {
        let mut terms = vec![Term::new(Vec::new(), self.constant)];
        terms.extend(
            self.linear
                .iter()
                .enumerate()
                .filter(|(_, h)| !h.is_zero())
                .map(|(q, h)| Term::new(vec![q], *h)),
        );
        terms.extend(self.pairwise.iter().map(|(&(a, b), j)| Term::new(vec![a, b], *j)));
        terms
    }

    /// Sums repeated terms; accepts at most two qubits per term.
    pub fn from_terms(
        qubit_count: usize,
        terms: &[Term],
        penalty: Option<Rational>,
    ) -> Result<Self> {
        let mut model = IsingModel {
            qubit_count,
            constant: Rational::zero(),
            linear: vec![Rational::zero(); qubit_count],
            pairwise: BTreeMap::new(),
            penalty,
        };
        for term in terms {
            if let Some(&q) = term.qubits.iter().find(|&&q| q >= qubit_count) {
                return Err(Error::DimensionMismatch { expected: qubit_count, got: q + 1 });
            }
            match term.qubits.as_slice() {
                [] => model.constant += term.coefficient,
                [q] => model.linear[*q] += term.coefficient,
                [a, b] if a == b => model.constant += term.coefficient,
                [a, b] => {
                    let key = ((*a).min(*b), (*a).max(*b));
                    let entry = model.pairwise.entry(key).or_insert_with(Rational::zero);
                    *entry += term.coefficient;
                    if entry.is_zero() {
                        model.pairwise.remove(&key);
                    }
                }
                _ => {
                    return Err(Error::InvalidConfig(format!(
                        "terms on {} qubits are not supported",
                        term.qubits.len()
                    )))
                }
            }
        }
        Ok(model)
    }

    /// Plain-text term list: one `term <indices...> <coefficient>` line per term.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{TEXT_HEADER}");
        let _ = writeln!(out, "qubits {}", self.qubit_count);
        if let Some(a) = &self.penalty {
            let _ = writeln!(out, "penalty {}", format_rational(a));
        }
        let _ = writeln!(out, "constant {}", format_rational(&self.constant));
        for term in self.to_terms().into_iter().skip(1) {
            let indices: Vec<String> = term.qubits.iter().map(|q| q.to_string()).collect();
            let _ =
                writeln!(out, "term {} {}", indices.join(" "), format_rational(&term.coefficient));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut qubits = None;
        let mut penalty = None;
        let mut terms = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let bad = |message: String| Error::MalformedTerms { line: line_no, message };
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let number = |s: &str| parse_decimal(s).ok_or_else(|| bad(format!("bad number `{s}`")));
            match fields.as_slice() {
                ["qubits", n] => {
                    qubits = Some(n.parse::<usize>().map_err(|_| bad(format!("bad count `{n}`")))?)
                }
                ["penalty", a] => penalty = Some(number(a)?),
                ["constant", c] => terms.push(Term::new(Vec::new(), number(c)?)),
                ["term", rest @ ..] if !rest.is_empty() => {
                    let (coefficient, indices) = rest.split_last().expect("non-empty");
                    let indices = indices
                        .iter()
                        .map(|s| s.parse::<usize>().map_err(|_| bad(format!("bad index `{s}`"))))
                        .collect::<Result<Vec<_>>>()?;
                    terms.push(Term::new(indices, number(coefficient)?));
                }
                _ => return Err(bad(format!("unrecognised line `{line}`"))),
            }
        }
        let qubits =
            qubits.ok_or(Error::MalformedTerms { line: 0, message: "missing `qubits`".into() })?;
        Self::from_terms(qubits, &terms, penalty)
    }

    /// Energies of all `2^n` basis states, indexed with qubit 0 as the most significant bit.
    pub fn diagonal(&self) -> Vec<f64> {
        let n = self.qubit_count;
        let linear: Vec<f64> = self.linear.iter().map(to_f64).collect();
        // couplings to lower-numbered qubits, grouped by the higher qubit
        let mut lower: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (&(a, b), j) in &self.pairwise {
            lower[b].push((a, to_f64(j)));
        }
        let mut energies = vec![to_f64(&self.constant)];
        for q in 0..n {
            let mut next = Vec::with_capacity(energies.len() * 2);
            for (prefix, &e) in energies.iter().enumerate() {
                // prefix holds qubits 0..q; qubit p sits at bit (q - 1 - p)
                let mut field = linear[q];
                for &(p, j) in &lower[q] {
                    let bit = (prefix >> (q - 1 - p)) & 1;
                    field += if bit == 0 { j } else { -j };
                }
                next.push(e + field);
                next.push(e - field);
            }
            energies = next;
        }
        energies
    }
}
