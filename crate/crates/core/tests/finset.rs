use coprod::finset::{coproduct, equalizer, sum_map};
use coprod::{FinMap, FinSet, Label};
use proptest::prelude::*;

fn map_between(n: usize, m: usize) -> impl Strategy<Value = FinMap> {
    prop::collection::vec(0..m.max(1), n).prop_map(move |idx| {
        let cod = FinSet::atoms(m);
        let table = idx.iter().map(|&i| cod.elements()[i].clone()).collect();
        FinMap::new(FinSet::atoms(n), cod, table).unwrap()
    })
}

fn three_maps() -> impl Strategy<Value = (FinMap, FinMap, FinMap)> {
    (0..5usize, 1..5usize, 1..5usize, 1..5usize)
        .prop_flat_map(|(a, b, c, d)| (map_between(a, b), map_between(b, c), map_between(c, d)))
}

proptest! {
    #[test]
    fn composition_is_associative((f, g, h) in three_maps()) {
        let left = f.then(&g).unwrap().then(&h).unwrap();
        let right = f.then(&g.then(&h).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn identities_are_neutral(f in (0..5usize, 1..5usize).prop_flat_map(|(n, m)| map_between(n, m))) {
        prop_assert_eq!(&FinMap::identity(f.dom()).then(&f).unwrap(), &f);
        prop_assert_eq!(&f.then(&FinMap::identity(f.cod())).unwrap(), &f);
    }

    #[test]
    fn injectivity_matches_image_size(f in (0..5usize, 1..6usize).prop_flat_map(|(n, m)| map_between(n, m))) {
        prop_assert_eq!(f.is_injective(), f.image().len() == f.dom().len());
        prop_assert!(f.image().is_subset(f.cod()));
        prop_assert_eq!(f.collision().is_none(), f.is_injective());
    }

    #[test]
    fn permutations_invert(perm in (0..6usize).prop_flat_map(|n| Just((0..n).collect::<Vec<_>>()).prop_shuffle())) {
        let x = FinSet::atoms(perm.len());
        let f = FinMap::new(x.clone(), x.clone(), perm.iter().map(|&i| x.elements()[i].clone()).collect()).unwrap();
        prop_assert!(f.is_bijective());
        let g = f.inverse().unwrap();
        prop_assert_eq!(f.then(&g).unwrap(), FinMap::identity(&x));
    }

    #[test]
    fn equalizer_is_where_maps_agree(
        (f, g) in (0..5usize, 1..4usize).prop_flat_map(|(n, m)| (map_between(n, m), map_between(n, m)))
    ) {
        let (e, incl) = equalizer(&f, &g).unwrap();
        for x in f.dom() {
            prop_assert_eq!(e.contains(x), f.apply(x) == g.apply(x));
        }
        prop_assert_eq!(incl.then(&f).unwrap(), incl.then(&g).unwrap());
    }

    #[test]
    fn copairing_restricts_to_the_parts(
        (u, v) in (0..4usize, 0..4usize, 1..4usize).prop_flat_map(|(n, k, m)| (map_between(n, m), map_between(k, m)))
    ) {
        let c = coproduct(u.dom(), v.dom());
        prop_assert_eq!(c.sum.len(), u.dom().len() + v.dom().len());
        let w = c.copair(&u, &v).unwrap();
        prop_assert_eq!(c.inl.then(&w).unwrap(), u.clone());
        prop_assert_eq!(c.inr.then(&w).unwrap(), v.clone());
        let s = sum_map(&u, &v);
        for x in u.dom() {
            prop_assert_eq!(s.apply(&Label::left(x.clone())), Some(&Label::left(u.apply(x).unwrap().clone())));
        }
    }

    #[test]
    fn subsets_are_counted(n in 0..7usize) {
        let x = FinSet::atoms(n);
        prop_assert_eq!(x.subsets().count(), 1 << n);
        for k in 0..=n {
            let c = x.subsets_of_size(k).count();
            let binom = (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1));
            prop_assert_eq!(c, binom);
        }
    }
}
