//! Benchmark inputs shared by the criterion targets.

use qvarsched::instances::ScalingFamily;
use qvarsched::{AssignmentProblem, ProblemVariant};

/// Member of the high-load, cloud-enabled scaling family with `processes` processes.
pub fn family_instance(processes: usize) -> AssignmentProblem {
    ScalingFamily::new(ProblemVariant::ECHL).instance(processes).expect("family instance is valid")
}

/// Deterministic angles in `[0, π)` for a circuit with `count` parameters.
pub fn fixed_angles(count: usize) -> Vec<f64> {
    (0..count).map(|i| (i as f64 * 0.7).rem_euclid(std::f64::consts::PI)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inputs_have_expected_sizes() {
        assert_eq!(family_instance(4).qubit_count(), 14);
        assert!(fixed_angles(5).iter().all(|a| (0.0..std::f64::consts::PI).contains(a)));
    }
}
