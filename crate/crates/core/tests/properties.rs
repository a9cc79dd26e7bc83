mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use simgroup::checks::TransitionMatrix;
use simgroup::{BallAddress, RandomParams};

use common::{klein, split_randomly, structures};

fn params() -> impl Strategy<Value = RandomParams> {
    (1usize..=5, 1usize..=8).prop_map(|(max_depth, max_regions)| RandomParams { max_depth, max_regions })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn address_strings_round_trip(indices in proptest::collection::vec(0u8..36, 0..12)) {
        let a = BallAddress::from_indices(indices.clone());
        let back: BallAddress = a.to_string().parse().unwrap();
        prop_assert_eq!(back.indices(), &indices[..]);
    }

    #[test]
    fn ancestors_are_strict_prefixes(indices in proptest::collection::vec(0u8..4, 0..10)) {
        let a = BallAddress::from_indices(indices);
        let anc: Vec<BallAddress> = a.proper_ancestors().collect();
        prop_assert_eq!(anc.len(), a.len().saturating_sub(1));
        for b in anc {
            prop_assert!(!b.is_root() && b.strictly_contains(&a));
        }
    }

    #[test]
    fn reduction_is_canonical(seed in any::<u64>(), p in params(), splits in 0usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut all = structures();
        all.push(("klein", klein()));
        for (_, st) in all {
            let g = st.random_element(&mut rng, p);
            let noisy = split_randomly(&st, &g, &mut rng, splits);
            prop_assert_eq!(st.reduce(&noisy), g.clone());
            prop_assert!(st.equals(&noisy, &g));
        }
    }

    #[test]
    fn cocycle_laws(seed in any::<u64>(), p in params()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (_, st) in structures() {
            let g = st.random_element(&mut rng, p);
            let h = st.random_element(&mut rng, p);
            prop_assert!(st.verify_cocycle_identity(&g, &h));
            let v = st.cocycle_vector(&g);
            prop_assert_eq!(v.norm_sq(), st.cocycle_norm_sq(&g));
            prop_assert_eq!(st.cocycle_norm_sq(&st.inverse(&g)), st.cocycle_norm_sq(&g));
            prop_assert_eq!(st.pi_apply(&g, &st.cocycle_vector(&st.inverse(&g))), -v);
        }
    }

    #[test]
    fn matrix_validation(rows in proptest::collection::vec(proptest::collection::vec(0u8..3, 3), 3)) {
        let valid = rows.iter().all(|r| r.iter().all(|&x| x <= 1) && r.contains(&1));
        prop_assert_eq!(TransitionMatrix::new(rows).is_ok(), valid);
    }
}
