#![allow(dead_code)]

use linkhom::indexing::CanonicalForm;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn form(n: usize, blocks: &[&[i64]]) -> CanonicalForm {
    CanonicalForm::new(n, blocks.iter().map(|b| b.to_vec()).collect()).unwrap()
}

pub fn example1() -> (CanonicalForm, CanonicalForm) {
    let y1 = [1, 0, 0, 0, 0, 0, 0, 0, 0, 0];
    let y2 = [0; 10];
    let y3 = [1, 0, 0, 0, 0, 0, 0, 0, 0, 0];
    (
        form(5, &[&y1, &y2, &y3, &[0, 0, 1, 0, 0, 0]]),
        form(5, &[&y1, &y2, &y3, &[0; 6]]),
    )
}

pub fn example2() -> (CanonicalForm, CanonicalForm) {
    let y1 = [0; 10];
    let y2 = [1, 1, 0, 0, 0, 0, 0, 0, 0, 0];
    (
        form(5, &[&y1, &y2, &[0, 0, 0, 0, 1, 0, 0, 0, 0, 0], &[0; 6]]),
        form(5, &[&y1, &y2, &[0; 10], &[0; 6]]),
    )
}

pub fn example3() -> (CanonicalForm, CanonicalForm) {
    let ones = [1; 10];
    let y3 = [1, 1, 1, 1, 1, 1, 1, 1, 1, 0];
    (
        form(5, &[&ones, &ones, &y3, &[1; 6]]),
        form(5, &[&ones, &[1, 1, 1, 1, 1, 1, 1, 1, 1, 0], &y3, &[1; 6]]),
    )
}

pub fn figure4() -> CanonicalForm {
    CanonicalForm::from_flat(4, &[-2, 1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 1]).unwrap()
}

/// Deterministic generator, seeded from `LINKHOM_SEED` when set.
pub fn rng(stream: u64) -> ChaCha8Rng {
    let seed = std::env::var("LINKHOM_SEED")
        .ok()
        .and_then(|s| s.parse::<u64>().ok())
        .unwrap_or(0x5eed);
    ChaCha8Rng::seed_from_u64(seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

pub fn random_form<R: Rng>(rng: &mut R, n: usize, range: i64) -> CanonicalForm {
    let flat: Vec<i64> = (0..linkhom::indexing::coordinate_count(n))
        .map(|_| rng.gen_range(-range..=range))
        .collect();
    CanonicalForm::from_flat(n, &flat).unwrap()
}
