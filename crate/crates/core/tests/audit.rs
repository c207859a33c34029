use auditlab::audit::{AuditOptions, Auditor, ProblemScope, Route};
use auditlab::fixtures;
use auditlab::{parse_mechanism, Group, Outcome, Problem, Setting};

fn auditor(desc: &str, setting: Setting) -> Auditor {
    Auditor::new(
        parse_mechanism(desc, &setting).unwrap(),
        AuditOptions::default(),
    )
    .unwrap()
}

#[test]
fn cycle_identity_escapes_every_pair_under_da() {
    let a = auditor("da", Setting::priority(3));
    let p = fixtures::cycle_problem(3).unwrap();
    let dev = fixtures::cycle_deviation(3);
    assert_eq!(
        a.mechanism().evaluate(&p).unwrap(),
        Outcome::Allocation([1, 2, 0].into_iter().collect())
    );
    assert!(!a.detects(&p, &dev, Group::from_members([0, 1])).unwrap());
    assert!(a.detects(&p, &dev, Group::full(3)).unwrap());
    assert_eq!(a.min_detecting_size(&p, &dev).unwrap(), (3, Group::full(3)));
    assert_eq!(a.audit_index(&p).unwrap().index, 3);
}

#[test]
fn majority_pair_of_supporters_detects() {
    let a = auditor("majority:x=1", Setting::vote(3));
    let p = Problem::vote(&[1, 1, 0]).unwrap();
    let dev = Outcome::Vote(false);
    assert!(a.detects(&p, &dev, Group::from_members([0, 1])).unwrap());
    assert!(!a.detects(&p, &dev, Group::singleton(0)).unwrap());
    assert_eq!(
        a.min_detecting_size(&p, &dev).unwrap(),
        (2, Group::from_members([0, 1]))
    );
}

#[test]
fn second_price_between_payment_needs_everyone() {
    let a = auditor("spa", Setting::auction(3, 5));
    let (p, dev) = fixtures::spa_between_payment().unwrap();
    assert_eq!(a.min_detecting_size(&p, &dev).unwrap().0, 3);
}

#[test]
fn veto_with_a_zero_has_index_one() {
    let a = auditor("veto", Setting::vote(3));
    let r = a.audit_index(&Problem::vote(&[1, 0, 1]).unwrap()).unwrap();
    assert_eq!(r.index, 1);
    let r = a.audit_index(&Problem::vote(&[1, 1, 1]).unwrap()).unwrap();
    assert_eq!(r.index, 3);
}

#[test]
fn true_outcome_is_not_a_deviation() {
    let a = auditor("da", Setting::priority(3));
    let p = fixtures::cycle_problem(3).unwrap();
    let truth = a.mechanism().evaluate(&p).unwrap();
    assert_eq!(
        a.detects(&p, &truth, Group::full(3))
            .unwrap_err()
            .exit_code(),
        2
    );
}

#[test]
fn worst_cases_at_three() {
    assert_eq!(
        auditor("da", Setting::priority(3))
            .max_index_over(&ProblemScope::Exhaustive)
            .unwrap()
            .index,
        3
    );
    let ia = auditor("ia", Setting::priority(3))
        .max_index_over(&ProblemScope::Exhaustive)
        .unwrap();
    assert_eq!(ia.index, 2);
    assert!(ia.indices.iter().all(|&k| k == 2));
    assert!(!ia.lower_bound);
    let maj = auditor("majority:x=1", Setting::vote(3))
        .max_index_over(&ProblemScope::Exhaustive)
        .unwrap();
    assert_eq!((maj.index, maj.problems_evaluated), (2, 8));
}

#[test]
fn possible_objects_and_clinching_under_serial() {
    let a = auditor("serial:order=0,1,2", Setting::house(3));
    let p = Problem::house(&[&[2, 0, 1], &[1, 0, 2], &[0, 1, 2]]).unwrap();
    assert_eq!(a.possible_objects(&p, 0).unwrap(), 0b100);
    assert_eq!(a.possible_objects(&p, 1).unwrap(), 0b011);
    assert_eq!(a.clinches(&p, 0, 0b111).unwrap(), Some(2));
    assert_eq!(a.clinches(&p, 1, 0b101).unwrap(), Some(0));
    assert_eq!(a.clinches(&p, 1, 0b111).unwrap(), None);

    let chain = fixtures::chain_problem().unwrap();
    let order = a.sequential_clinching(&chain).unwrap().unwrap();
    assert_eq!(
        order.iter().map(|s| s.individual).collect::<Vec<_>>(),
        vec![0, 1, 2]
    );
    assert_eq!(
        a.sequential_clinching(&fixtures::non_chain_problem().unwrap())
            .unwrap(),
        None
    );
    assert!(!a.clinching_order_uniformity().unwrap().uniform);
    assert!(a.full_range().unwrap().full_range);
}

#[test]
fn da_possible_objects_at_two() {
    let a = auditor("da", Setting::priority(2));
    let p = Problem::priority(&[&[0, 1], &[0, 1]], &[&[1, 0], &[0, 1]]).unwrap();
    assert_eq!(a.possible_objects(&p, 0).unwrap(), 0b11);
    let a3 = auditor("da", Setting::priority(3));
    let cycle = fixtures::cycle_problem(3).unwrap();
    assert!((0..3).all(|i| a3.clinches(&cycle, i, 0b111).unwrap().is_none()));
    assert_eq!(a3.sequential_clinching(&cycle).unwrap(), None);
    assert!(a3.full_range().unwrap().full_range);
}

#[test]
fn constant_assignment_is_uniform_but_not_full_range() {
    let a = auditor("constant:assign=2,0,1", Setting::house(3));
    let u = a.clinching_order_uniformity().unwrap();
    assert!(u.uniform);
    assert!(u.depends_only_on_objects);
    let range = a.full_range().unwrap();
    assert!(!range.full_range);
    assert_eq!(range.achieved, 1);
}

#[test]
fn enumeration_agrees_with_structural_shortcut() {
    let setting = Setting::house(3);
    let mech = parse_mechanism("fixture:vice:n=3", &setting).unwrap();
    let fast = Auditor::new(mech.clone(), AuditOptions::default()).unwrap();
    let slow = Auditor::new(
        mech,
        AuditOptions {
            route: Route::Enumerate,
            ..AuditOptions::default()
        },
    )
    .unwrap();
    let a = fast.max_index_over(&ProblemScope::Exhaustive).unwrap();
    let b = slow.max_index_over(&ProblemScope::Exhaustive).unwrap();
    assert_eq!(a.indices, b.indices);
}

#[test]
fn grid_route_agrees_with_linear_extensions_on_pairs() {
    let setting = Setting::priority(3);
    let mech = parse_mechanism("ia", &setting).unwrap();
    let exact = Auditor::new(mech.clone(), AuditOptions::default()).unwrap();
    let grid = Auditor::new(
        mech,
        AuditOptions {
            route: Route::Grid,
            ..AuditOptions::default()
        },
    )
    .unwrap();
    let space = auditlab::model::ProblemSpace::new(setting).unwrap();
    for k in (0..space.len()).step_by(4663) {
        let p = space.get(k);
        let truth = exact.mechanism().evaluate(&p).unwrap();
        for dev in exact.universe().iter().filter(|d| **d != truth) {
            for g in Group::combinations(3, 2) {
                assert_eq!(
                    exact.detects(&p, dev, g).unwrap(),
                    grid.detects(&p, dev, g).unwrap()
                );
            }
        }
    }
}

#[test]
fn budget_refusal_names_the_search_size() {
    let a = Auditor::new(
        parse_mechanism("da", &Setting::priority(3)).unwrap(),
        AuditOptions {
            max_counterparts: 100,
            ..AuditOptions::default()
        },
    )
    .unwrap();
    let p = fixtures::cycle_problem(3).unwrap();
    let err = a
        .detects(&p, &fixtures::cycle_deviation(3), Group::singleton(0))
        .unwrap_err();
    assert_eq!(err.exit_code(), 4);
    let sweep = a
        .max_index_over(&ProblemScope::Sample { count: 3, seed: 1 })
        .unwrap();
    assert_eq!(sweep.problems_skipped, 3);
    assert!(sweep.lower_bound);
}

#[test]
fn worst_case_reports_are_identical_across_thread_counts() {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let a = auditor("ar:e=2", Setting::priority(3));
            let w = a
                .max_index_over(&ProblemScope::Sample {
                    count: 300,
                    seed: 9,
                })
                .unwrap();
            serde_json::to_string(&w.without_timing()).unwrap()
        })
    };
    assert_eq!(run(1), run(4));
}
