//! Seeded random streams.
//!
//! Every chain owns a ChaCha8 stream selected by `(seed, stream)`. ChaCha is a
//! counter-based generator, so distinct stream ids give independent sequences
//! without any coordination between chains or threads.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type ChainRng = ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> ChainRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn fill_standard_normal<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
}

/// Uniform draw on `[0, 1)` mapped to log space; used for MH accept tests.
pub fn log_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>().ln()
}
