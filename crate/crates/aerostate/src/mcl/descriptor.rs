use rand::Rng;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// 256-bit binary feature descriptor, matched by Hamming distance.
///
/// Serialized as a 64-character hex string in map files and flight logs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Descriptor(pub [u64; 4]);

pub const DESCRIPTOR_BITS: u32 = 256;

impl Descriptor {
    pub fn zero() -> Self {
        Descriptor([0; 4])
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Descriptor([rng.random(), rng.random(), rng.random(), rng.random()])
    }

    pub fn hamming(&self, other: &Descriptor) -> u32 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }

    /// Flip each bit independently with probability `p` (sensor noise model).
    pub fn with_bit_flips<R: Rng + ?Sized>(&self, p: f64, rng: &mut R) -> Self {
        if p <= 0.0 {
            return *self;
        }
        let mut words = self.0;
        for word in &mut words {
            let mut mask = 0u64;
            for bit in 0..64 {
                if rng.random_bool(p) {
                    mask |= 1 << bit;
                }
            }
            *word ^= mask;
        }
        Descriptor(words)
    }

    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(64);
        for word in &self.0 {
            s.push_str(&format!("{word:016x}"));
        }
        s
    }

    pub fn from_hex(hex: &str) -> Result<Self> {
        if hex.len() != 64 {
            return Err(Error::invalid(format!(
                "descriptor hex must be 64 chars, got {}",
                hex.len()
            )));
        }
        let mut words = [0u64; 4];
        for (i, word) in words.iter_mut().enumerate() {
            *word = u64::from_str_radix(&hex[i * 16..(i + 1) * 16], 16)
                .map_err(|e| Error::invalid(format!("bad descriptor hex: {e}")))?;
        }
        Ok(Descriptor(words))
    }
}

impl Serialize for Descriptor {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Descriptor {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Descriptor::from_hex(&s).map_err(de::Error::custom)
    }
}
