//! Per-trial random streams.
//!
//! A stream is a ChaCha8 generator keyed by `(master_seed, seed, purpose)`.
//! Streams never depend on how many other trials exist, so adding seeds to
//! an experiment leaves existing rows untouched.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::boost::Algorithm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    /// Ground-truth weight vector; shared by every algorithm for a seed.
    Truth,
    /// Holdout evaluation sample; shared by every algorithm for a seed.
    Holdout,
    /// Sampling, crowd responses and internal coin flips of one algorithm.
    Run(Algorithm),
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Truth => 1,
            Stream::Holdout => 2,
            Stream::Run(Algorithm::Boost) => 3,
            Stream::Run(Algorithm::Natural) => 4,
        }
    }
}

pub fn stream_rng(master_seed: u64, seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&seed.to_le_bytes());
    key[16..24].copy_from_slice(&stream.tag().to_le_bytes());
    key[24..].copy_from_slice(b"crowdpac");
    ChaCha8Rng::from_seed(key)
}
