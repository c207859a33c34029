use proptest::prelude::*;

use auditlab::audit::{AuditOptions, Auditor};
use auditlab::io::{parse_problem, problem_to_json};
use auditlab::{parse_mechanism, Group, Problem, Setting};

fn permutation(n: usize) -> impl Strategy<Value = Vec<u8>> {
    Just((0..n as u8).collect::<Vec<_>>()).prop_shuffle()
}

fn house_problem(n: usize) -> impl Strategy<Value = Problem> {
    prop::collection::vec(permutation(n), n).prop_map(|prefs| {
        let refs: Vec<&[u8]> = prefs.iter().map(Vec::as_slice).collect();
        Problem::house(&refs).unwrap()
    })
}

fn priority_problem(n: usize) -> impl Strategy<Value = Problem> {
    (
        prop::collection::vec(permutation(n), n),
        prop::collection::vec(permutation(n), n),
    )
        .prop_map(move |(prefs, ranks)| {
            // ranks[o] orders the individuals at object o; scores[i][o] is i's position.
            let scores: Vec<Vec<u32>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|o| ranks[o].iter().position(|&x| x as usize == i).unwrap() as u32)
                        .collect()
                })
                .collect();
            let prefs: Vec<&[u8]> = prefs.iter().map(Vec::as_slice).collect();
            let scores: Vec<&[u32]> = scores.iter().map(Vec::as_slice).collect();
            Problem::priority(&prefs, &scores).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn problem_json_round_trips(p in priority_problem(4)) {
        let text = problem_to_json(&p);
        let back = parse_problem(&text).unwrap();
        prop_assert_eq!(problem_to_json(&back), text);
        prop_assert_eq!(back.hash64(), p.hash64());
    }

    #[test]
    fn serial_index_stays_in_range(p in house_problem(4)) {
        let a = Auditor::new(parse_mechanism("serial:order=3,1,0,2", &Setting::house(4)).unwrap(), AuditOptions::default()).unwrap();
        let ix = a.audit_index(&p).unwrap().index;
        prop_assert!((1..=2).contains(&ix));
    }

    #[test]
    fn detection_grows_with_the_group(p in priority_problem(3), dev_pick in 0usize..5, bits in 1u32..7, extra in 0u32..8) {
        let a = Auditor::new(parse_mechanism("ia", &Setting::priority(3)).unwrap(), AuditOptions::default()).unwrap();
        let truth = a.mechanism().evaluate(&p).unwrap();
        let devs: Vec<_> = a.universe().iter().filter(|o| **o != truth).cloned().collect();
        let dev = &devs[dev_pick % devs.len()];
        let small = Group::from_bits(bits);
        let big = small.union(Group::from_bits(extra));
        if a.detects(&p, dev, small).unwrap() {
            prop_assert!(a.detects(&p, dev, big).unwrap());
        }
    }
}
