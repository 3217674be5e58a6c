//! Seeded randomness.
//!
//! Every random stream in the crate is a ChaCha8 generator seeded from a
//! 64-bit value. Independent streams (dataset sampling, splitting, optimizer
//! runs, experiment cells) get their own seed by hashing a parent seed with a
//! purpose tag: the first eight bytes of SHA-256 over the little-endian parent
//! seed followed by each tag part, length-prefixed. The construction is
//! platform independent, so datasets and runs reproduce bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives a child seed from `parent` and an ordered list of tag parts.
pub fn derive_seed(parent: u64, parts: &[&[u8]]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(parent.to_le_bytes());
    for part in parts {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part);
    }
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn derive_seed_str(parent: u64, tag: &str) -> u64 {
    derive_seed(parent, &[tag.as_bytes()])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivation_is_stable_and_tag_sensitive() {
        let a = derive_seed_str(7, "sample");
        assert_eq!(a, derive_seed_str(7, "sample"));
        assert_ne!(a, derive_seed_str(7, "split"));
        assert_ne!(a, derive_seed_str(8, "sample"));
        // length prefixes keep ("ab","c") and ("a","bc") apart
        assert_ne!(
            derive_seed(1, &[b"ab", b"c"]),
            derive_seed(1, &[b"a", b"bc"])
        );
    }
}
