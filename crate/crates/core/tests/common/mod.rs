#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::RngSeed;

use killing_s3::corpus::{self, CorpusRng};

/// Proptest draws a seed; the corpus generators turn it into structured data.
pub fn seeded() -> impl Strategy<Value = CorpusRng> {
    any::<u64>().prop_map(corpus::rng)
}

/// Fixed generator seed so that every run explores the same cases.
pub fn cases(n: u32) -> ProptestConfig {
    ProptestConfig {
        cases: n,
        failure_persistence: None,
        rng_seed: RngSeed::Fixed(0x6b73_3300),
        ..ProptestConfig::default()
    }
}
