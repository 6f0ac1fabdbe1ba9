use coprod::coproduct::{CoproductMonad, Mode};
use coprod::monad::{check_laws_seeded, parse_monad};
use coprod::{FinSet, Functor, Monad};
use proptest::prelude::*;

const PAIRS: [(&str, &str); 6] = [
    ("maybe", "maybe"),
    ("powerset", "maybe"),
    ("powerset", "exception:2"),
    ("reader:2", "exception:1"),
    ("state:2", "maybe"),
    ("exception0:1", "maybe"),
];

fn cop(s: &str, t: &str) -> CoproductMonad {
    CoproductMonad::binary(
        parse_monad(s).unwrap(),
        parse_monad(t).unwrap(),
        Mode::Materialized { budget: 8 },
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coproducts_are_lawful_for_any_seed(i in 0..PAIRS.len(), seed in any::<u64>()) {
        let (s, t) = PAIRS[i];
        let c = cop(s, t);
        let probes: Vec<FinSet> = (0..=2).map(FinSet::atoms).collect();
        let report = check_laws_seeded(&c, &probes, 100, seed);
        prop_assert!(report.passed(), "{:?}", report.failures().collect::<Vec<_>>());
    }

    #[test]
    fn summand_order_does_not_matter(i in 0..PAIRS.len(), n in 0..3usize) {
        let (s, t) = PAIRS[i];
        let a = FinSet::atoms(n);
        prop_assert_eq!(cop(s, t).carrier(&a).unwrap().len(), cop(t, s).carrier(&a).unwrap().len());
    }

    #[test]
    fn multiplication_is_idempotent_on_units(i in 0..PAIRS.len(), n in 0..3usize) {
        let (s, t) = PAIRS[i];
        let c = cop(s, t);
        for z in &c.carrier(&FinSet::atoms(n)).unwrap() {
            prop_assert_eq!(c.mult(&c.unit(z)), z.clone());
        }
    }
}

#[test]
fn sizes_with_exceptions_follow_the_closed_form() {
    // (T ⊕ M_E) A ≅ T(A + E)
    for e in 1..=3usize {
        for n in 0..=3usize {
            let a = FinSet::atoms(n);
            let exc = format!("exception:{e}");
            assert_eq!(cop("powerset", &exc).carrier(&a).unwrap().len(), 1 << (n + e));
            assert_eq!(cop("maybe", &exc).carrier(&a).unwrap().len(), n + e + 1);
            assert_eq!(cop("reader:2", &exc).carrier(&a).unwrap().len(), (n + e).pow(2));
        }
    }
}
