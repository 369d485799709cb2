//! Reference instances and the synthetic scaling family.

use crate::problem::{AssignmentProblem, NodeSpec, ProblemVariant, ProcessSpec};
use crate::rational::int;

/// Three processes on two nodes: `w = (2, 1, 1)`, values `(2,1), (3,1), (2,1)`,
/// `B = (3, 2)` and, under high load, `T = (2, 1)`.
pub fn reference(variant: ProblemVariant) -> AssignmentProblem {
    ScalingFamily::new(variant).instance(3).expect("reference instance is valid")
}

/// Instances with `P` processes sharing the reference nodes; weights and value
/// pairs cycle through the reference processes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalingFamily {
    pub variant: ProblemVariant,
    pub capacities: Vec<u64>,
    pub thresholds: Vec<u64>,
    pub weights: Vec<u64>,
    pub values: Vec<Vec<i128>>,
}

impl ScalingFamily {
    pub fn new(variant: ProblemVariant) -> Self {
        Self {
            variant,
            capacities: vec![3, 2],
            thresholds: if variant.high_load { vec![2, 1] } else { vec![0, 0] },
            weights: vec![2, 1, 1],
            values: vec![vec![2, 1], vec![3, 1], vec![2, 1]],
        }
    }

    pub fn instance(&self, processes: usize) -> crate::Result<AssignmentProblem> {
        let procs = (0..processes)
            .map(|i| {
                let values = self.values[i % self.values.len()].iter().copied().map(int).collect();
                ProcessSpec::new(self.weights[i % self.weights.len()], values)
            })
            .collect();
        let nodes = self
            .capacities
            .iter()
            .zip(&self.thresholds)
            .map(|(&b, &t)| NodeSpec::new(b, t))
            .collect();
        AssignmentProblem::new(self.variant, procs, nodes)
    }

    pub fn name(&self, processes: usize) -> String {
        format!("{}-P{processes}", self.variant)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_qubits_grow_linearly() {
        let family = ScalingFamily::new(ProblemVariant::ECHL);
        for p in 3..=7 {
            assert_eq!(family.instance(p).unwrap().qubit_count(), 3 * p + 2);
        }
        assert_eq!(family.name(4), "ECHL-P4");
    }

    #[test]
    fn reference_sizes() {
        let q: Vec<usize> =
            ProblemVariant::ALL.iter().map(|&v| reference(v).qubit_count()).collect();
        assert_eq!(q, vec![8, 10, 11, 13]);
    }
}
