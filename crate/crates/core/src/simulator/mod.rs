//! Exact statevector simulation of gate-list circuits.

mod circuit;
mod state;

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use circuit::{Angle, Circuit, Gate};
pub use state::StateVector;

use crate::bitstring::Bitstring;
use crate::encoder::IsingModel;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_QUBITS: usize = 24;

#[derive(Clone, Copy, Debug)]
pub struct Simulator {
    pub max_qubits: usize,
}

impl Default for Simulator {
    fn default() -> Self {
        Self { max_qubits: DEFAULT_MAX_QUBITS }
    }
}

impl Simulator {
    pub fn with_max_qubits(max_qubits: usize) -> Self {
        Self { max_qubits }
    }

    pub fn check_size(&self, qubits: usize) -> Result<()> {
        if qubits > self.max_qubits {
            Err(Error::QubitCountExceeded { required: qubits, max: self.max_qubits })
        } else {
            Ok(())
        }
    }

    /// `U(θ)|0…0⟩`.
    pub fn run(&self, circuit: &Circuit, params: &[f64]) -> Result<StateVector> {
        self.check_size(circuit.qubit_count())?;
        circuit.check_binding(params)?;
        let mut state = StateVector::zero(circuit.qubit_count());
        for gate in circuit.gates() {
            apply_gate(&mut state, gate, params);
        }
        Ok(state)
    }
}

pub fn run(circuit: &Circuit, params: &[f64]) -> Result<StateVector> {
    Simulator::default().run(circuit, params)
}

type Matrix2 = [[Complex64; 2]; 2];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rx_matrix(theta: f64) -> Matrix2 {
    let (s, co) = (theta / 2.0).sin_cos();
    [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]
}

fn ry_matrix(theta: f64) -> Matrix2 {
    let (s, co) = (theta / 2.0).sin_cos();
    [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
}

fn rz_matrix(theta: f64) -> Matrix2 {
    let (s, co) = (theta / 2.0).sin_cos();
    [[c(co, -s), c(0.0, 0.0)], [c(0.0, 0.0), c(co, s)]]
}

fn h_matrix() -> Matrix2 {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    [[c(r, 0.0), c(r, 0.0)], [c(r, 0.0), c(-r, 0.0)]]
}

fn apply_single(state: &mut StateVector, target: usize, m: Matrix2, control: Option<usize>) {
    let mask = state.mask(target);
    let control_mask = control.map(|q| state.mask(q));
    state.for_each_pair(mask, |i, a, b| {
        if control_mask.is_some_and(|cm| i & cm == 0) {
            return;
        }
        let (x, y) = (*a, *b);
        *a = m[0][0] * x + m[0][1] * y;
        *b = m[1][0] * x + m[1][1] * y;
    });
}

fn apply_flip(state: &mut StateVector, target: usize, controls: &[usize]) {
    let mask = state.mask(target);
    let control_mask: usize = controls.iter().map(|&q| state.mask(q)).sum();
    state.for_each_pair(mask, |i, a, b| {
        if i & control_mask == control_mask {
            std::mem::swap(a, b);
        }
    });
}

pub(crate) fn apply_gate(state: &mut StateVector, gate: &Gate, params: &[f64]) {
    match gate {
        Gate::X(q) => apply_flip(state, *q, &[]),
        Gate::H(q) => apply_single(state, *q, h_matrix(), None),
        Gate::Rx(q, a) => apply_single(state, *q, rx_matrix(a.resolve(params)), None),
        Gate::Ry(q, a) => apply_single(state, *q, ry_matrix(a.resolve(params)), None),
        Gate::Rz(q, a) => apply_single(state, *q, rz_matrix(a.resolve(params)), None),
        Gate::Cnot { control, target } => apply_flip(state, *target, &[*control]),
        Gate::Cry { control, target, angle } => {
            apply_single(state, *target, ry_matrix(angle.resolve(params)), Some(*control))
        }
        Gate::Rzz { a, b, angle } => {
            let (s, co) = (angle.resolve(params) / 2.0).sin_cos();
            let (ma, mb) = (state.mask(*a), state.mask(*b));
            let even = c(co, -s);
            let odd = c(co, s);
            state.for_each_amplitude(|i, amp| {
                let parity = ((i & ma != 0) as u8) ^ ((i & mb != 0) as u8);
                *amp *= if parity == 0 { even } else { odd };
            });
        }
        Gate::Mcx { controls, target } => apply_flip(state, *target, controls),
        Gate::Csub { control, register, constant } => {
            let cm = state.mask(*control);
            let masks: Vec<usize> = register.iter().map(|&q| state.mask(q)).collect();
            let modulus = 1u64 << register.len();
            let k = constant % modulus;
            state.permute(|i| {
                if i & cm == 0 {
                    return i;
                }
                let value: u64 =
                    masks.iter().enumerate().map(|(b, &m)| u64::from(i & m != 0) << b).sum();
                let shifted = (value + modulus - k) % modulus;
                let cleared = masks.iter().fold(i, |acc, &m| acc & !m);
                masks.iter().enumerate().fold(cleared, |acc, (b, &m)| {
                    if (shifted >> b) & 1 == 1 {
                        acc | m
                    } else {
                        acc
                    }
                })
            });
        }
    }
}

/// Precomputed energies of a diagonal Hamiltonian over every basis state.
#[derive(Clone, Debug)]
pub struct DiagonalObservable {
    energies: Vec<f64>,
}

impl DiagonalObservable {
    pub fn new(model: &IsingModel) -> Self {
        Self { energies: model.diagonal() }
    }

    pub fn qubit_count(&self) -> usize {
        self.energies.len().trailing_zeros() as usize
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        if state.qubit_count() != self.qubit_count() {
            return Err(Error::DimensionMismatch {
                expected: self.qubit_count(),
                got: state.qubit_count(),
            });
        }
        let amps = state.amplitudes();
        let value = if amps.len() >= 1 << 14 {
            amps.par_iter().zip(self.energies.par_iter()).map(|(a, e)| a.norm_sqr() * e).sum()
        } else {
            amps.iter().zip(&self.energies).map(|(a, e)| a.norm_sqr() * e).sum()
        };
        Ok(value)
    }

    /// Shot-weighted mean energy.
    pub fn mean_energy(&self, counts: &Counts) -> Result<f64> {
        if counts.qubit_count() != self.qubit_count() {
            return Err(Error::DimensionMismatch {
                expected: self.qubit_count(),
                got: counts.qubit_count(),
            });
        }
        let total: f64 = counts.iter().map(|(i, n)| self.energies[i] * n as f64).sum();
        Ok(total / counts.shots() as f64)
    }
}

/// `Σ_z |⟨z|ψ⟩|² E(z)`.
pub fn expectation_diagonal(state: &StateVector, model: &IsingModel) -> Result<f64> {
    if state.qubit_count() != model.qubit_count {
        return Err(Error::DimensionMismatch {
            expected: model.qubit_count,
            got: state.qubit_count(),
        });
    }
    DiagonalObservable::new(model).expectation(state)
}

/// Measurement histogram keyed by basis index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counts {
    qubit_count: usize,
    shots: u64,
    counts: BTreeMap<usize, u64>,
}

impl Counts {
    pub fn from_map(qubit_count: usize, counts: BTreeMap<usize, u64>) -> Self {
        let shots = counts.values().sum();
        Self { qubit_count, shots, counts }
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn get(&self, bits: &Bitstring) -> u64 {
        self.counts.get(&bits.to_index()).copied().unwrap_or(0)
    }

    /// `(basis index, count)` in ascending index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts.iter().map(|(&i, &n)| (i, n))
    }

    pub fn bitstrings(&self) -> impl Iterator<Item = (Bitstring, u64)> + '_ {
        self.iter().map(|(i, n)| (Bitstring::from_index(i, self.qubit_count), n))
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }
}

/// Draws `shots` measurements from `|ψ|²`, deterministically for a given seed.
pub fn sample(state: &StateVector, shots: u64, seed: u64) -> Counts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with(state, shots, &mut rng)
}

pub fn sample_with<R: Rng>(state: &StateVector, shots: u64, rng: &mut R) -> Counts {
    let mut cumulative = Vec::with_capacity(state.amplitudes().len());
    let mut acc = 0.0;
    for a in state.amplitudes() {
        acc += a.norm_sqr();
        cumulative.push(acc);
    }
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        let u = rng.gen::<f64>() * acc;
        // first index whose cumulative mass exceeds u; zero-probability states are never selected
        let idx = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
        *counts.entry(idx).or_insert(0) += 1;
    }
    Counts { qubit_count: state.qubit_count(), shots, counts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn bits(s: &str) -> Bitstring {
        s.parse().unwrap()
    }

    #[test]
    fn x_flips_qubit_zero_to_leftmost() {
        let mut c = Circuit::new(2);
        c.x(0);
        let s = run(&c, &[]).unwrap();
        assert_relative_eq!(s.amplitude(&bits("10")).re, 1.0);
    }

    #[test]
    fn ry_convention() {
        let mut c = Circuit::new(1);
        c.ry(0, Angle::Fixed(0.7));
        let s = run(&c, &[]).unwrap();
        assert_relative_eq!(s.amplitudes()[0].re, (0.35f64).cos(), epsilon = 1e-12);
        assert_relative_eq!(s.amplitudes()[1].re, (0.35f64).sin(), epsilon = 1e-12);
    }

    #[test]
    fn one_hot_block_amplitudes() {
        let mut c = Circuit::new(3);
        let t1 = c.add_parameter("t1");
        let t2 = c.add_parameter("t2");
        c.x(0).cry(0, 1, Angle::param(t1)).cry(1, 2, Angle::param(t2)).cnot(1, 0).cnot(2, 1);
        let (a, b) = (1.1, 2.3);
        let s = run(&c, &[a, b]).unwrap();
        assert_relative_eq!(s.amplitude(&bits("100")).re, (a / 2.0).cos(), epsilon = 1e-12);
        assert_relative_eq!(
            s.amplitude(&bits("010")).re,
            (a / 2.0).sin() * (b / 2.0).cos(),
            epsilon = 1e-12
        );
        assert_relative_eq!(
            s.amplitude(&bits("001")).re,
            (a / 2.0).sin() * (b / 2.0).sin(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn binding_errors() {
        let mut c = Circuit::new(1);
        let t = c.add_parameter("theta");
        c.ry(0, Angle::param(t));
        assert_eq!(run(&c, &[]).unwrap_err(), Error::UnboundParameter("theta".into()));
        assert!(matches!(run(&c, &[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
        let named = c.bind(&[("theta".to_string(), 0.5)].into_iter().collect()).unwrap();
        assert_eq!(named, vec![0.5]);
        assert!(c.bind(&Default::default()).is_err());
    }

    #[test]
    fn qubit_limit() {
        let c = Circuit::new(5);
        let err = Simulator::with_max_qubits(4).run(&c, &[]).unwrap_err();
        assert_eq!(err, Error::QubitCountExceeded { required: 5, max: 4 });
    }

    #[test]
    fn csub_is_modular_subtraction() {
        for m in 1..=3usize {
            for k in 0..(1u64 << m) + 2 {
                for r in 0..(1u64 << m) {
                    for ctrl in [false, true] {
                        let n = m + 1;
                        let mut b = Bitstring::zeros(n);
                        b.set(0, ctrl);
                        // register qubits 1..=m, least significant first
                        for bit in 0..m {
                            b.set(1 + bit, (r >> bit) & 1 == 1);
                        }
                        let mut s = StateVector::basis(&b);
                        let register: Vec<usize> = (1..=m).collect();
                        apply_gate(&mut s, &Gate::Csub { control: 0, register, constant: k }, &[]);
                        let modulus = 1u64 << m;
                        let expect = if ctrl { (r + modulus - k % modulus) % modulus } else { r };
                        let mut e = Bitstring::zeros(n);
                        e.set(0, ctrl);
                        for bit in 0..m {
                            e.set(1 + bit, (expect >> bit) & 1 == 1);
                        }
                        assert_relative_eq!(s.amplitude(&e).re, 1.0);
                    }
                }
            }
        }
    }

    #[test]
    fn csub_decomposition_matches_primitive() {
        let register = vec![1, 2, 3];
        for k in 0..8u64 {
            let gate = Gate::Csub { control: 0, register: register.clone(), constant: k };
            let mut prep = Circuit::new(4);
            prep.h(0).h(1).ry(2, Angle::Fixed(0.4)).ry(3, Angle::Fixed(1.3));
            let base = run(&prep, &[]).unwrap();
            let mut direct = base.clone();
            apply_gate(&mut direct, &gate, &[]);
            let mut expanded = base.clone();
            for g in gate.decompose() {
                apply_gate(&mut expanded, &g, &[]);
            }
            for (a, b) in direct.amplitudes().iter().zip(expanded.amplitudes()) {
                assert!((a - b).norm() < 1e-12, "k = {k}");
            }
        }
    }

    #[test]
    fn uniform_superposition_expectation_is_constant() {
        use crate::encoder::encode;
        use crate::problem::{fixtures::reference, ProblemVariant};
        let p = reference(ProblemVariant::EOHL);
        let model = encode(&p, &p.layout());
        let mut c = Circuit::new(8);
        for q in 0..8 {
            c.h(q);
        }
        let s = run(&c, &[]).unwrap();
        assert_relative_eq!(expectation_diagonal(&s, &model).unwrap(), 55.5, epsilon = 1e-9);
        let basis = StateVector::basis(&bits("10100101"));
        assert_relative_eq!(expectation_diagonal(&basis, &model).unwrap(), -6.0, epsilon = 1e-9);
        let small = StateVector::zero(3);
        assert!(matches!(
            expectation_diagonal(&small, &model),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sampling() {
        let basis = StateVector::basis(&bits("0110"));
        let counts = sample(&basis, 500, 3);
        assert_eq!(counts.distinct(), 1);
        assert_eq!(counts.get(&bits("0110")), 500);

        let mut c = Circuit::new(2);
        c.h(0).h(1);
        let s = run(&c, &[]).unwrap();
        let counts = sample(&s, 4096, 11);
        assert_eq!(counts.shots(), 4096);
        let sigma = (4096.0f64 * 0.25 * 0.75).sqrt();
        for (_, n) in counts.iter() {
            assert!((n as f64 - 1024.0).abs() < 5.0 * sigma);
        }
        assert_eq!(sample(&s, 4096, 11), counts);
        assert_ne!(sample(&s, 4096, 12), counts);
    }

    #[test]
    fn norm_is_preserved_over_long_circuits() {
        let mut c = Circuit::new(5);
        let t = c.add_parameter("t");
        for k in 0..2000 {
            let q = k % 5;
            match k % 5 {
                0 => c.ry(q, Angle::scaled(t, 1.0 + k as f64 * 1e-3)),
                1 => c.cry(q, (q + 1) % 5, Angle::Fixed(PI / 3.0)),
                2 => c.rzz(q, (q + 2) % 5, Angle::param(t)),
                3 => c.h(q).rx(q, Angle::Fixed(0.2)),
                _ => c.csub(q, vec![(q + 1) % 5, (q + 2) % 5], 3),
            };
        }
        let s = run(&c, &[0.37]).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-9);
    }
}
