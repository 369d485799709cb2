use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// A rotation angle: a literal, or `scale · θ[index]` for a named parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Angle {
    Fixed(f64),
    Param { index: usize, scale: f64 },
}

impl Angle {
    pub fn param(index: usize) -> Self {
        Angle::Param { index, scale: 1.0 }
    }

    pub fn scaled(index: usize, scale: f64) -> Self {
        Angle::Param { index, scale }
    }

    pub fn resolve(&self, params: &[f64]) -> f64 {
        match *self {
            Angle::Fixed(v) => v,
            Angle::Param { index, scale } => scale * params[index],
        }
    }

    pub fn parameter(&self) -> Option<usize> {
        match *self {
            Angle::Fixed(_) => None,
            Angle::Param { index, .. } => Some(index),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    X(usize),
    H(usize),
    Rx(usize, Angle),
    Ry(usize, Angle),
    Rz(usize, Angle),
    Cnot {
        control: usize,
        target: usize,
    },
    Cry {
        control: usize,
        target: usize,
        angle: Angle,
    },
    /// `exp(-i θ/2 Z⊗Z)`.
    Rzz {
        a: usize,
        b: usize,
        angle: Angle,
    },
    /// NOT on `target` when every control is 1.
    Mcx {
        controls: Vec<usize>,
        target: usize,
    },
    /// When `control` is 1, maps the register value `r` to `(r - constant) mod 2^m`.
    /// `register` lists the qubits least significant first.
    Csub {
        control: usize,
        register: Vec<usize>,
        constant: u64,
    },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::X(q) | Gate::H(q) | Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _) => vec![*q],
            Gate::Cnot { control, target } | Gate::Cry { control, target, .. } => {
                vec![*control, *target]
            }
            Gate::Rzz { a, b, .. } => vec![*a, *b],
            Gate::Mcx { controls, target } => {
                let mut qs = controls.clone();
                qs.push(*target);
                qs
            }
            Gate::Csub { control, register, .. } => {
                let mut qs = vec![*control];
                qs.extend(register);
                qs
            }
        }
    }

    pub fn angle(&self) -> Option<&Angle> {
        match self {
            Gate::Rx(_, a) | Gate::Ry(_, a) | Gate::Rz(_, a) => Some(a),
            Gate::Cry { angle, .. } | Gate::Rzz { angle, .. } => Some(angle),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::X(_) => "x",
            Gate::H(_) => "h",
            Gate::Rx(..) => "rx",
            Gate::Ry(..) => "ry",
            Gate::Rz(..) => "rz",
            Gate::Cnot { .. } => "cx",
            Gate::Cry { .. } => "cry",
            Gate::Rzz { .. } => "rzz",
            Gate::Mcx { .. } => "mcx",
            Gate::Csub { .. } => "csub",
        }
    }

    /// Expands a `Csub` into X and multi-controlled-X gates: subtracting `2^s`
    /// is a ripple decrement of the register bits from `s` upward, where bit `t`
    /// flips iff every bit in `s..t` is 0. Other gates are returned unchanged.
    pub fn decompose(&self) -> Vec<Gate> {
        let Gate::Csub { control, register, constant } = self else {
            return vec![self.clone()];
        };
        let m = register.len();
        let k = if m >= 64 { *constant } else { constant % (1u64 << m) };
        let mut out = Vec::new();
        for s in (0..m).filter(|s| (k >> s) & 1 == 1) {
            for t in (s..m).rev() {
                let lower = &register[s..t];
                out.extend(lower.iter().map(|&q| Gate::X(q)));
                let mut controls = vec![*control];
                controls.extend(lower);
                out.push(Gate::Mcx { controls, target: register[t] });
                out.extend(lower.iter().map(|&q| Gate::X(q)));
            }
        }
        out
    }
}

fn fmt_angle(angle: &Angle, names: &[String]) -> String {
    match *angle {
        Angle::Fixed(v) => format!("{v}"),
        Angle::Param { index, scale: 1.0 } => names[index].clone(),
        Angle::Param { index, scale } => format!("{scale}*{}", names[index]),
    }
}

/// Ordered gate list over a fixed register, with named parameter slots.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Circuit {
    qubit_count: usize,
    gates: Vec<Gate>,
    parameters: Vec<String>,
}

impl Circuit {
    pub fn new(qubit_count: usize) -> Self {
        Self { qubit_count, gates: Vec::new(), parameters: Vec::new() }
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn parameters(&self) -> &[String] {
        &self.parameters
    }

    pub fn parameter_count(&self) -> usize {
        self.parameters.len()
    }

    /// Registers a new named parameter and returns its slot.
    pub fn add_parameter(&mut self, name: impl Into<String>) -> usize {
        self.parameters.push(name.into());
        self.parameters.len() - 1
    }

    pub fn push(&mut self, gate: Gate) -> &mut Self {
        debug_assert!(gate.qubits().iter().all(|&q| q < self.qubit_count), "{gate:?}");
        self.gates.push(gate);
        self
    }

    pub fn x(&mut self, q: usize) -> &mut Self {
        self.push(Gate::X(q))
    }

    pub fn h(&mut self, q: usize) -> &mut Self {
        self.push(Gate::H(q))
    }

    pub fn rx(&mut self, q: usize, angle: Angle) -> &mut Self {
        self.push(Gate::Rx(q, angle))
    }

    pub fn ry(&mut self, q: usize, angle: Angle) -> &mut Self {
        self.push(Gate::Ry(q, angle))
    }

    pub fn rz(&mut self, q: usize, angle: Angle) -> &mut Self {
        self.push(Gate::Rz(q, angle))
    }

    pub fn cnot(&mut self, control: usize, target: usize) -> &mut Self {
        self.push(Gate::Cnot { control, target })
    }

    pub fn cry(&mut self, control: usize, target: usize, angle: Angle) -> &mut Self {
        self.push(Gate::Cry { control, target, angle })
    }

    pub fn rzz(&mut self, a: usize, b: usize, angle: Angle) -> &mut Self {
        self.push(Gate::Rzz { a, b, angle })
    }

    pub fn mcx(&mut self, controls: Vec<usize>, target: usize) -> &mut Self {
        self.push(Gate::Mcx { controls, target })
    }

    pub fn csub(&mut self, control: usize, register: Vec<usize>, constant: u64) -> &mut Self {
        self.push(Gate::Csub { control, register, constant })
    }

    /// Resolves a name → value map into the positional binding `run` expects.
    pub fn bind(&self, values: &HashMap<String, f64>) -> Result<Vec<f64>> {
        self.parameters
            .iter()
            .map(|name| {
                values.get(name).copied().ok_or_else(|| Error::UnboundParameter(name.clone()))
            })
            .collect()
    }

    pub(crate) fn check_binding(&self, params: &[f64]) -> Result<()> {
        if params.len() < self.parameters.len() {
            return Err(Error::UnboundParameter(self.parameters[params.len()].clone()));
        }
        if params.len() > self.parameters.len() {
            return Err(Error::DimensionMismatch {
                expected: self.parameters.len(),
                got: params.len(),
            });
        }
        Ok(())
    }

    /// One gate per line, e.g. `cry 0 1 theta_0`.
    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {}\n", self.qubit_count);
        if !self.parameters.is_empty() {
            out.push_str(&format!("params {}\n", self.parameters.join(" ")));
        }
        for gate in &self.gates {
            out.push_str(&self.gate_line(gate));
            out.push('\n');
        }
        out
    }

    fn gate_line(&self, gate: &Gate) -> String {
        let qs = |v: &[usize]| v.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(" ");
        match gate {
            Gate::Mcx { controls, target } => format!("mcx [{}] {target}", qs(controls)),
            Gate::Csub { control, register, constant } => {
                format!("csub {control} [{}] {constant}", qs(register))
            }
            other => {
                let mut line = format!("{} {}", other.name(), qs(&other.qubits()));
                if let Some(a) = other.angle() {
                    line.push(' ');
                    line.push_str(&fmt_angle(a, &self.parameters));
                }
                line
            }
        }
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
