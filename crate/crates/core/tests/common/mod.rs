#![allow(dead_code)]

use proptest::prelude::*;
use qvarsched::{AssignmentProblem, NodeSpec, ProblemVariant, ProcessSpec, Rational};

/// Random valid instances with P ≤ 4, N ≤ 3, B ≤ 7 and values in quarter steps.
pub fn instance() -> impl Strategy<Value = AssignmentProblem> {
    (0usize..4, 1usize..=3, 1usize..=4).prop_flat_map(|(v, n, p)| {
        let variant = ProblemVariant::ALL[v];
        let nodes = prop::collection::vec((1u64..=7, 0u64..7), n);
        let processes = prop::collection::vec((1u64..=4, prop::collection::vec(0i128..=20, n)), p);
        (nodes, processes).prop_map(move |(nodes, processes)| {
            let nodes = nodes
                .into_iter()
                .map(|(b, t)| NodeSpec::new(b, if variant.high_load { t % b } else { 0 }))
                .collect();
            let processes = processes
                .into_iter()
                .map(|(w, vs)| {
                    ProcessSpec::new(w, vs.into_iter().map(|x| Rational::new(x, 4)).collect())
                })
                .collect();
            AssignmentProblem::new(variant, processes, nodes).unwrap()
        })
    })
}

pub fn small_instance(max_qubits: usize) -> impl Strategy<Value = AssignmentProblem> {
    instance().prop_filter("too many qubits", move |p| p.qubit_count() <= max_qubits)
}
