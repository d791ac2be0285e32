//! Named random streams derived from one root seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent generator for component `name` under `root`.
pub fn substream(root: u64, name: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    // FNV-1a of the name selects the ChaCha stream.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    rng.set_stream(h);
    rng
}

/// Generator for item `index` of a named component.
pub fn indexed(root: u64, name: &str, index: u64) -> ChaCha8Rng {
    substream(root ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15), name)
}
