//! Fixed workloads shared by the benches.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rtorsion::bundle::QBundle;
use rtorsion::corpus::{corpus_get, random_flat_bundle, CorpusEntry};

/// A corpus entry with a reproducible random exact bundle.
pub fn workload(name: &str, rank: usize) -> (CorpusEntry, QBundle) {
    let e = corpus_get(name).expect("corpus entry");
    let mut rng = ChaCha8Rng::seed_from_u64(0xbe7c);
    let b = random_flat_bundle(&e, rank, &mut rng).expect("flat bundle");
    (e, b)
}
