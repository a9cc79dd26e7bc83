//! Shared workloads for the benchmarks in `benches/`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use simgroup::{fixtures, Element, RandomParams, Structure};

/// The four fixture spaces with canonical similarity structures.
pub fn structures() -> Vec<(&'static str, Structure)> {
    fixtures::SPACE_NAMES
        .iter()
        .map(|&n| (n, Structure::canonical(fixtures::by_name(n).expect("built-in space"))))
        .collect()
}

/// `n` seeded random elements.
pub fn elements(st: &Structure, n: usize, seed: u64, params: RandomParams) -> Vec<Element> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| st.random_element(&mut rng, params)).collect()
}
