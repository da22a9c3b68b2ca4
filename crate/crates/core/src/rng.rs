use rand::SeedableRng;
use rand_xoshiro::SplitMix64;

/// Independent RNG streams derived from one user seed.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Stream {
    Ses = 1,
    Roll = 2,
    Shuffle = 3,
    IcpSample = 4,
    VertexNoise = 5,
    Decimate = 6,
    PoseNoise = 7,
}

/// SplitMix64 keyed on `seed` and a per-purpose stream tag, so that e.g. the
/// roll draws do not change when the shuffle consumes more numbers.
pub(crate) fn stream(seed: u64, stream: Stream) -> SplitMix64 {
    let tag = (stream as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    SplitMix64::seed_from_u64(seed ^ tag)
}
