//! Named random-number streams for common-random-numbers experiments.
//!
//! Every patient id and every arrival process owns a ChaCha stream keyed by
//! (seed, replication, entity). Paired policy runs therefore consume
//! identical stochastic inputs per patient by construction, regardless of
//! how system-level decisions reorder events.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const ARRIVAL_BASE: u64 = u64::MAX - (1 << 20);

fn stream(seed: u64, replication: u64, entity: u64) -> ChaCha8Rng {
    let mixed = seed ^ replication.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut rng = ChaCha8Rng::seed_from_u64(mixed);
    rng.set_stream(entity);
    rng
}

/// Stream driving the path noise (and travel noise) of one patient.
pub fn patient_stream(seed: u64, replication: u64, patient_id: u64) -> ChaCha8Rng {
    debug_assert!(patient_id < ARRIVAL_BASE);
    stream(seed, replication, patient_id)
}

/// Stream driving the inter-arrival times of one patient type.
pub fn arrival_stream(seed: u64, replication: u64, type_index: usize) -> ChaCha8Rng {
    stream(seed, replication, ARRIVAL_BASE + type_index as u64)
}
