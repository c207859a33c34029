use auditlab::audit::{AuditOptions, Auditor, ProblemScope};
use auditlab::characterize::*;
use auditlab::fixtures;
use auditlab::house::DictatorialStructure;
use auditlab::priority::TauKind;
use auditlab::vote::VoteTable;
use auditlab::{parse_mechanism, Outcome, Problem, Setting};

#[test]
fn cycle_fails_the_index_two_test_under_da() {
    let v = index_two_da_representable(&fixtures::cycle_problem(3).unwrap(), TauKind::Identity)
        .unwrap();
    assert_eq!(v.stable_outcomes, 2);
    assert!(!v.full);
    assert!(!v.fast);
    assert_eq!(v.failing_deviation, Some(fixtures::cycle_deviation(3)));
}

#[test]
fn immediate_acceptance_passes_everywhere_at_three() {
    let s = index_two_sweep(
        3,
        TauKind::IaRank,
        &ProblemScope::Exhaustive,
        AuditOptions::default(),
    )
    .unwrap();
    assert_eq!(
        (s.predicate_true, s.oracle_two, s.problems),
        (46656, 46656, 46656)
    );
    assert_eq!(s.oracle_disagreements + s.path_disagreements, 0);
}

/// Three stable outcomes where the individual-pessimal one has a swap
/// pair but the middle one does not: the pessimal-outcome shortcut says
/// index two, the full scan and the brute-force index say otherwise.
#[test]
fn pessimal_shortcut_misses_a_middle_stable_outcome() {
    let p = Problem::priority(
        &[&[0, 1, 2], &[0, 2, 1], &[1, 0, 2]],
        &[&[1, 1, 2], &[0, 2, 1], &[2, 0, 0]],
    )
    .unwrap();
    let v = index_two_da_representable(&p, TauKind::Identity).unwrap();
    assert_eq!(v.stable_outcomes, 3);
    assert!(v.fast);
    assert!(!v.full);
    assert_eq!(
        v.failing_deviation,
        Some(Outcome::Allocation([1, 2, 0].into_iter().collect()))
    );
    let a = Auditor::new(
        parse_mechanism("da", &Setting::priority(3)).unwrap(),
        AuditOptions::default(),
    )
    .unwrap();
    assert_eq!(a.audit_index(&p).unwrap().index, 3);
}

#[test]
fn serial_and_branching_structures_are_vice() {
    let opts = AuditOptions::default();
    let serial = DictatorialStructure::serial(3, vec![2, 0, 1]).unwrap();
    let v = check_vice_equals_index_two(
        "serial:order=2,0,1",
        serial,
        3,
        &ProblemScope::Exhaustive,
        opts,
    )
    .unwrap();
    assert!(v.vice.is_vice && v.agree && v.advisory && !v.sampled);
    let swap = fixtures::swap_structure(4).unwrap();
    let v = check_vice_equals_index_two(
        "fixture:swap:n=4",
        swap,
        4,
        &ProblemScope::Sample {
            count: 200,
            seed: 5,
        },
        opts,
    )
    .unwrap();
    assert!(!v.vice.is_vice);
    assert!(v.sampled);
}

#[test]
fn every_two_voter_table_is_dictatorial_iff_index_one() {
    for t in VoteTable::all(2).unwrap() {
        let v = check_dictatorial_iff_index_one(&t, AuditOptions::default()).unwrap();
        assert!(v.agree, "{:?}", t.bits());
    }
}

#[test]
fn majority_is_the_least_auditable_anonymous_rule() {
    for n in [3, 5] {
        let v = check_majority_minimal(
            &VoteTable::all_anonymous(n).unwrap(),
            AuditOptions::default(),
        )
        .unwrap();
        assert!(v.holds, "n = {n}");
        assert_eq!(v.bound, n.div_ceil(2));
        assert_eq!(v.constant_tables, 2);
    }
    let even = check_majority_minimal(
        &VoteTable::all_anonymous(4).unwrap(),
        AuditOptions::default(),
    );
    assert_eq!(even.unwrap_err().exit_code(), 2);
}

#[test]
fn tau_axioms_hold_for_every_kind() {
    for kind in [TauKind::Identity, TauKind::IaRank, TauKind::ArTier(2)] {
        for axiom in TauAxiom::ALL {
            let r = tau_axiom_check(kind, axiom, 500, 11).unwrap();
            assert_eq!(r.violations, 0, "{kind:?} {axiom:?}: {:?}", r.witness);
        }
    }
}

#[test]
fn sampling_probabilities() {
    let da = Auditor::new(
        parse_mechanism("da", &Setting::priority(3)).unwrap(),
        AuditOptions::default(),
    )
    .unwrap();
    let s = sample_audit_probability(
        &da,
        &fixtures::cycle_problem(3).unwrap(),
        &fixtures::cycle_deviation(3),
        2,
        1000,
        1,
    )
    .unwrap();
    assert_eq!((s.detecting_subsets, s.total_subsets), (0, 3));
    let full = sample_audit_probability(
        &da,
        &fixtures::cycle_problem(3).unwrap(),
        &fixtures::cycle_deviation(3),
        3,
        10,
        1,
    )
    .unwrap();
    assert_eq!((full.exact, full.empirical), (1.0, 1.0));
    assert!((full.asymptotic - 1.0).abs() < 1e-12);
}

#[test]
fn reserved_seats_first_is_the_unique_compatible_choice() {
    let u = reserves_compatibility_uniqueness(&fixtures::reserves_setting()).unwrap();
    assert_eq!(u.problems, 24);
    assert!(u.unique_everywhere);
}
