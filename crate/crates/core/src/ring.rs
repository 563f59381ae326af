//! Circular key space for key-based routing.

use num_bigint::BigUint;
use num_traits::One;
use rand::RngCore;

/// A key on the identifier circle modulo 2^bits. The usual width is 32 bits;
/// anything up to 160 works.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RingKey {
    value: BigUint,
    bits: u32,
}

impl RingKey {
    pub fn new(value: impl Into<BigUint>, bits: u32) -> Self {
        assert!(bits >= 1 && bits <= 160, "key width out of range");
        let value = value.into() % (BigUint::one() << bits);
        RingKey { value, bits }
    }

    pub fn from_u64(value: u64, bits: u32) -> Self {
        Self::new(BigUint::from(value), bits)
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// (self + 2^i) mod 2^bits — the i-th finger target of this key.
    pub fn add_pow2(&self, i: u32) -> RingKey {
        debug_assert!(i < self.bits);
        RingKey::new(&self.value + (BigUint::one() << i), self.bits)
    }

    /// Uniformly random key, consuming ceil(bits/64) words from the rng.
    pub fn random(rng: &mut impl RngCore, bits: u32) -> RingKey {
        let words = bits.div_ceil(64);
        let mut value = BigUint::ZERO;
        for _ in 0..words {
            value = (value << 64) | BigUint::from(rng.next_u64());
        }
        RingKey::new(value, bits)
    }
}

impl std::fmt::Display for RingKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// True iff `x` lies in the half-open arc (a, b] walking clockwise.
/// The degenerate arc (a, a] is the whole circle, so any `x` qualifies;
/// a single-node ring resolves every key locally.
pub fn in_half_open_interval(x: &RingKey, a: &RingKey, b: &RingKey) -> bool {
    debug_assert!(x.bits == a.bits && a.bits == b.bits, "mixed key widths");
    if a == b {
        true
    } else if a.value < b.value {
        a.value < x.value && x.value <= b.value
    } else {
        x.value > a.value || x.value <= b.value
    }
}
