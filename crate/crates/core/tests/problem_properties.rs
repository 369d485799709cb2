mod common;

use proptest::prelude::*;
use qvarsched::instances::reference;
use qvarsched::problem::{
    build_layout, check_feasible, decode, encode_assignment, qubit_count, Target,
};
use qvarsched::rational::int;
use qvarsched::{AssignmentProblem, Bitstring, NodeSpec, ProblemVariant, ProcessSpec};

fn targets(problem: &AssignmentProblem) -> impl Strategy<Value = Vec<Target>> {
    let n = problem.node_count();
    let cloud = problem.variant().cloud_allowed;
    let options = problem.options_per_process();
    prop::collection::vec(0..options, problem.process_count()).prop_map(move |choice| {
        choice
            .into_iter()
            .map(|c| if cloud && c == n { Target::Cloud } else { Target::Edge(c) })
            .collect()
    })
}

fn exact_range(problem: &AssignmentProblem) -> bool {
    (0..problem.node_count()).all(|j| {
        let range = problem.nodes()[j].effective_capacity(problem.variant());
        range + 1 == 1 << problem.slack_bits(j)
    })
}

proptest! {
    #[test]
    fn qubit_count_matches_layout(p in common::instance()) {
        let layout = build_layout(&p);
        let formula = p.process_count() * p.options_per_process() + p.total_slack_bits();
        prop_assert_eq!(qubit_count(&p), layout.qubit_count());
        prop_assert_eq!(qubit_count(&p), formula);
        let mut seen: Vec<usize> = (0..p.process_count()).flat_map(|i| layout.process_block(i)).collect();
        seen.extend(layout.all_slack_qubits());
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..layout.qubit_count()).collect::<Vec<_>>());
    }

    #[test]
    fn encode_then_decode_is_identity(
        (p, t) in common::instance().prop_flat_map(|p| { let t = targets(&p); (Just(p), t) })
    ) {
        let layout = p.layout();
        let bits = encode_assignment(&p, &layout, &t).unwrap();
        let a = decode(&p, &layout, &bits).unwrap();
        prop_assert_eq!(&a.targets, &t);
        prop_assert!(a.is_consistent());
        let again = encode_assignment(&p, &layout, &a.targets).unwrap();
        prop_assert_eq!(again, bits);
    }

    #[test]
    fn loads_in_range_are_feasible_and_back(
        (p, t) in common::instance().prop_flat_map(|p| { let t = targets(&p); (Just(p), t) })
    ) {
        let layout = p.layout();
        let bits = encode_assignment(&p, &layout, &t).unwrap();
        let a = decode(&p, &layout, &bits).unwrap();
        let in_range = p.nodes().iter().zip(&a.loads).all(|(n, &l)| n.threshold <= l && l <= n.capacity);
        let feasible = check_feasible(&p, &layout, &bits).unwrap().is_feasible();
        if in_range {
            prop_assert!(feasible);
        }
        if feasible && exact_range(&p) {
            prop_assert!(in_range);
        }
    }
}

#[test]
fn threshold_can_be_undercut_when_range_is_not_a_power_of_two() {
    // B = 5, T = 3 gives a 2-bit register, so slack 3 is representable and L = 2 < T passes
    let p = AssignmentProblem::new(
        ProblemVariant::EOHL,
        vec![ProcessSpec::new(2, vec![int(1)])],
        vec![NodeSpec::new(5, 3)],
    )
    .unwrap();
    let layout = p.layout();
    let bits = encode_assignment(&p, &layout, &[Target::Edge(0)]).unwrap();
    assert_eq!(bits.to_string(), "111");
    assert!(check_feasible(&p, &layout, &bits).unwrap().is_feasible());
    assert!(decode(&p, &layout, &bits).unwrap().loads[0] < p.nodes()[0].threshold);
}

#[test]
fn feasible_counts_of_reference_instances() {
    for (variant, want) in [
        (ProblemVariant::EOHL, (8, 4)),
        (ProblemVariant::EOFL, (10, 4)),
        (ProblemVariant::ECHL, (11, 6)),
        (ProblemVariant::ECFL, (13, 21)),
    ] {
        let p = reference(variant);
        let layout = p.layout();
        let q = layout.qubit_count();
        let feasible = (0..1usize << q)
            .filter(|&i| {
                check_feasible(&p, &layout, &Bitstring::from_index(i, q)).unwrap().is_feasible()
            })
            .count();
        assert_eq!((q, feasible), want, "{variant}");
    }
}
