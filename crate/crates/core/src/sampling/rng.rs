use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A reproducible random stream addressed by `(seed, stream_id)`.
///
/// The generator is ChaCha8 keyed by `seed` with `stream_id` as the stream
/// counter, so distinct ids never share keystream. Child streams for
/// per-draw or per-replication work are derived with [`RngStream::substream`],
/// which depends only on the parent address and the child index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Child stream number `index`. Children of distinct parents, and distinct
    /// children of one parent, get distinct keys.
    pub fn substream(&self, index: u64) -> RngStream {
        let key = splitmix64(splitmix64(self.seed ^ 0x6a09_e667_f3bc_c908) ^ self.stream_id);
        RngStream {
            seed: splitmix64(key ^ splitmix64(index.wrapping_add(0xbb67_ae85_84ca_a73b))),
            stream_id: index,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
