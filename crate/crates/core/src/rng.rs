//! Counter-based random numbers for reproducible parallel sampling.
//!
//! Instead of a stateful generator, every draw is a pure function of
//! (seed, stream, replicate, counter): the four words are folded into a
//! key and passed through an avalanching 64-bit mixer. Replicates can
//! therefore be evaluated in any order by any number of workers and still
//! produce identical output, and samplers may skip draws they do not need
//! without shifting anyone else's stream.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const STREAM_SALT: u64 = 0xd1b5_4a32_d192_ed03;

/// SplitMix64 finalizer (Stafford mix 13).
#[inline]
fn mix(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent draw streams within one replicate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    GwNodes = 0,
    FloridaChildren = 1,
    FillerNodes = 2,
}

/// The per-replicate key. Draws are indexed by an arbitrary counter
/// (samplers use the node's level-order index).
#[derive(Clone, Copy, Debug)]
pub struct ReplicateRng {
    key: u64,
}

impl ReplicateRng {
    pub fn new(seed: u64, stream: Stream, replicate: u64) -> Self {
        let key = mix(
            mix(seed.wrapping_add(GOLDEN))
                ^ (stream as u64).wrapping_mul(STREAM_SALT)
                ^ replicate.wrapping_mul(GOLDEN),
        );
        ReplicateRng { key }
    }

    #[inline]
    pub fn raw(&self, counter: u64) -> u64 {
        mix(self.key ^ counter.wrapping_add(1).wrapping_mul(GOLDEN))
    }

    /// Uniform in [0, 1) with 53 random bits.
    #[inline]
    pub fn uniform(&self, counter: u64) -> f64 {
        (self.raw(counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn bernoulli(&self, counter: u64, prob: f64) -> bool {
        self.uniform(counter) < prob
    }
}
