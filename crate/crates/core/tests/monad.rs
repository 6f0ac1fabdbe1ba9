use coprod::complement::{complement_carrier, minimal_support};
use coprod::monad::{check_laws_seeded, parse_monad, preserves_injections, Powerset};
use coprod::{FinSet, Label, Monad};
use proptest::prelude::*;

const BUILTINS: [&str; 9] = [
    "maybe",
    "exception:1",
    "exception:3",
    "exception0:2",
    "powerset",
    "reader:2",
    "state:2",
    "terminal",
    "terminal0",
];

/// `|S̄ n|` by counting by hand.
fn complement_size(spec: &str, n: u32) -> u64 {
    match spec {
        "maybe" => 1,
        "exception:2" => 2,
        "exception0:2" => {
            if n == 0 {
                0
            } else {
                2
            }
        }
        "powerset" => 2u64.pow(n) - n as u64,
        "reader:2" => (n as u64).pow(2) - n as u64,
        "reader:3" => (n as u64).pow(3) - n as u64,
        // S × S -> S × X with two states: (2n)^2 functions, n of them units
        "state:2" => (2 * n as u64).pow(2) - n as u64,
        _ => unreachable!(),
    }
}

fn atoms_labels(idx: &[usize]) -> Label {
    Label::set(idx.iter().map(|i| Label::atom(format!("a{i}"))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn builtins_are_lawful_for_any_seed(i in 0..BUILTINS.len(), seed in any::<u64>()) {
        let m = parse_monad(BUILTINS[i]).unwrap();
        let probes: Vec<FinSet> = (0..=2).map(FinSet::atoms).collect();
        let report = check_laws_seeded(m.as_ref(), &probes, 100, seed);
        prop_assert!(report.passed(), "{:?}", report.failures().collect::<Vec<_>>());
    }
}

proptest! {
    #[test]
    fn powerset_multiplication_is_union(sets in prop::collection::vec(prop::collection::vec(0..5usize, 0..4), 0..4)) {
        let ss = Label::set(sets.iter().map(|s| atoms_labels(s)));
        let union: Vec<usize> = sets.iter().flatten().copied().collect();
        prop_assert_eq!(Powerset.mult(&ss), atoms_labels(&union));
    }

    #[test]
    fn powerset_support_is_the_set(members in prop::collection::btree_set(0..4usize, 2..5)) {
        let x = FinSet::atoms(4);
        let elem = Label::set(members.iter().map(|&i| x.elements()[i].clone()));
        let support = minimal_support(&Powerset, &x, &elem).unwrap();
        prop_assert_eq!(support.len(), members.len());
    }

    #[test]
    fn complements_match_hand_counts(
        spec in prop::sample::select(vec!["maybe", "exception:2", "exception0:2", "powerset", "reader:2", "reader:3", "state:2"]),
        n in 0..4u32,
    ) {
        let m = parse_monad(spec).unwrap();
        let got = complement_carrier(m.as_ref(), &FinSet::atoms(n as usize)).unwrap().len() as u64;
        prop_assert_eq!(got, complement_size(spec, n));
    }
}

#[test]
fn consistent_builtins_preserve_injections() {
    let probes: Vec<FinSet> = (0..=3).map(FinSet::atoms).collect();
    for spec in BUILTINS {
        let m = parse_monad(spec).unwrap();
        let check = preserves_injections(m.as_ref(), &probes);
        assert!(check.holds && check.checked > 0, "{}", m.name());
    }
}
