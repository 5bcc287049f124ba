//! Compact difficulty bits, toy SHA-256 proof-of-work and the subsidy schedule.
//!
//! Hashing is a single SHA-256 over the header bytes and the digest is read
//! as a big-endian integer. This differs from mainnet Bitcoin (double SHA-256,
//! little-endian) on purpose; only uniformity of the digest matters here.

use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PowError {
    #[error("compact bits {0:#010x} decode to a target of 2^256 or more")]
    Overflow(u32),
    #[error("value does not fit in 256 bits")]
    TooLarge,
}

/// Bitcoin-style compact encoding: high byte is the exponent, low three
/// bytes the coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CompactBits(pub u32);

impl CompactBits {
    pub fn exponent(self) -> u8 {
        (self.0 >> 24) as u8
    }

    pub fn coefficient(self) -> u32 {
        self.0 & 0x00ff_ffff
    }
}

impl fmt::LowerHex for CompactBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::LowerHex::fmt(&self.0, f)
    }
}

/// Unsigned 256-bit target stored as big-endian bytes.
///
/// Lexicographic order on big-endian bytes is numeric order, so the derived
/// `Ord` compares targets and digests correctly.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Target([u8; 32]);

impl Target {
    pub const ZERO: Target = Target([0; 32]);
    pub const MAX: Target = Target([0xff; 32]);

    pub fn from_be_bytes(bytes: [u8; 32]) -> Self {
        Target(bytes)
    }

    pub fn to_be_bytes(self) -> [u8; 32] {
        self.0
    }

    /// `2^exp`, for `exp < 256`.
    pub fn power_of_two(exp: u32) -> Result<Self, PowError> {
        if exp >= 256 {
            return Err(PowError::TooLarge);
        }
        let mut bytes = [0u8; 32];
        bytes[31 - (exp / 8) as usize] = 1 << (exp % 8);
        Ok(Target(bytes))
    }

    pub fn from_biguint(value: &BigUint) -> Result<Self, PowError> {
        let raw = value.to_bytes_be();
        if raw.len() > 32 {
            return Err(PowError::TooLarge);
        }
        let mut bytes = [0u8; 32];
        bytes[32 - raw.len()..].copy_from_slice(&raw);
        Ok(Target(bytes))
    }

    pub fn to_biguint(self) -> BigUint {
        BigUint::from_bytes_be(&self.0)
    }

    /// Approximate magnitude, for display and statistics.
    pub fn to_f64(self) -> f64 {
        self.0.iter().fold(0.0, |acc, &b| acc * 256.0 + b as f64)
    }
}

impl fmt::Debug for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Target({:#x})", self)
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_biguint())
    }
}

impl fmt::LowerHex for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.to_biguint().to_str_radix(16);
        if f.alternate() {
            f.write_str("0x")?;
        }
        f.write_str(&s)
    }
}

/// Expands compact bits to `coefficient × 2^(8·(exponent − 3))`.
///
/// Exponents below 3 shift the coefficient right. The coefficient is treated
/// as unsigned; there is no sign bit.
pub fn decode_compact(bits: CompactBits) -> Result<Target, PowError> {
    let exponent = bits.exponent() as i32;
    let coefficient = bits.coefficient();
    let mut out = [0u8; 32];
    if exponent < 3 {
        let value = coefficient >> (8 * (3 - exponent));
        out[29..].copy_from_slice(&value.to_be_bytes()[1..]);
        return Ok(Target(out));
    }
    // Coefficient byte i (big-endian) has weight 256^(exponent - 1 - i), i.e.
    // lands at array index 32 - exponent + i.
    for (i, byte) in coefficient.to_be_bytes()[1..].iter().enumerate() {
        let index = 32 - exponent + i as i32;
        if index < 0 {
            if *byte != 0 {
                return Err(PowError::Overflow(bits.0));
            }
        } else {
            out[index as usize] = *byte;
        }
    }
    Ok(Target(out))
}

pub fn header_hash(header: &[u8]) -> [u8; 32] {
    Sha256::digest(header).into()
}

/// True iff SHA-256 of `header`, read big-endian, is strictly below `target`.
pub fn check_pow(header: &[u8], target: Target) -> bool {
    Target(header_hash(header)) < target
}

/// Smallest nonce in `[0, max_nonce)` whose header `template ‖ nonce_be32`
/// meets `target`, or `None` when the range is exhausted.
pub fn mine(template: &[u8], target: Target, max_nonce: u64) -> Option<u32> {
    let limit = max_nonce.min(1 << 32);
    let mut header = Vec::with_capacity(template.len() + 4);
    header.extend_from_slice(template);
    header.extend_from_slice(&[0; 4]);
    let tail = template.len();
    (0..limit).map(|n| n as u32).find(|&nonce| {
        header[tail..].copy_from_slice(&nonce.to_be_bytes());
        check_pow(&header, target)
    })
}

pub const ATOMIC_UNITS_PER_COIN: u64 = 100_000_000;

/// Geometric halving of the block reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsidySchedule {
    /// Reward of the first era, atomic units.
    pub initial_subsidy: u64,
    /// Blocks per era.
    pub halving_interval: u64,
    pub atomic_units_per_coin: u64,
}

impl Default for SubsidySchedule {
    fn default() -> Self {
        Self {
            initial_subsidy: 50 * ATOMIC_UNITS_PER_COIN,
            halving_interval: 210_000,
            atomic_units_per_coin: ATOMIC_UNITS_PER_COIN,
        }
    }
}

impl SubsidySchedule {
    /// Sum of every block reward ever paid, computed era by era.
    pub fn total_supply(&self) -> u128 {
        let mut total = 0u128;
        let mut subsidy = self.initial_subsidy;
        while subsidy > 0 {
            total += subsidy as u128 * self.halving_interval as u128;
            subsidy >>= 1;
        }
        total
    }

    /// Height of the first block that pays nothing.
    pub fn exhaustion_height(&self) -> u64 {
        let eras = 64 - self.initial_subsidy.leading_zeros() as u64;
        eras * self.halving_interval
    }
}

pub fn block_subsidy(height: u64, schedule: &SubsidySchedule) -> u64 {
    let era = height / schedule.halving_interval;
    if era >= 64 {
        0
    } else {
        schedule.initial_subsidy >> era
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn decode_examples() {
        let oracle = BigUint::from(238_348u32) << 176u32;
        let t = decode_compact(CompactBits(0x1903a30c)).unwrap();
        assert_eq!(t.to_biguint(), oracle);
        assert!((t.to_f64() / 2.2829e58 - 1.0).abs() < 1e-4);
        assert_eq!(decode_compact(CompactBits(0x03000042)).unwrap().to_biguint(), 66u32.into());
        assert_eq!(decode_compact(CompactBits(0x04000001)).unwrap().to_biguint(), 256u32.into());
    }

    #[test]
    fn decode_small_exponents_shift_right() {
        assert_eq!(decode_compact(CompactBits(0x02123456)).unwrap().to_biguint(), 0x1234u32.into());
        assert_eq!(decode_compact(CompactBits(0x01123456)).unwrap().to_biguint(), 0x12u32.into());
        assert_eq!(decode_compact(CompactBits(0x00123456)).unwrap(), Target::ZERO);
    }

    #[test]
    fn decode_overflow() {
        assert_eq!(decode_compact(CompactBits(0xff000001)), Err(PowError::Overflow(0xff000001)));
        // 0x0100 << 8·30 is 2^248; 0x010000 << 8·30 is 2^256.
        assert!(decode_compact(CompactBits(0x21000100)).is_ok());
        assert_eq!(decode_compact(CompactBits(0x21010000)), Err(PowError::Overflow(0x21010000)));
        // zero coefficient never overflows
        assert_eq!(decode_compact(CompactBits(0xff000000)).unwrap(), Target::ZERO);
    }

    #[test]
    fn decode_matches_bigint_oracle_on_boundary() {
        for exp in 0u32..=40 {
            for coeff in [0u32, 1, 0x80, 0xff, 0x100, 0xffff, 0x10000, 0xffffff] {
                let bits = CompactBits((exp << 24) | coeff);
                let expected = if exp >= 3 {
                    BigUint::from(coeff) << (8 * (exp - 3))
                } else {
                    BigUint::from(coeff >> (8 * (3 - exp)))
                };
                let fits = expected.bits() <= 256;
                match decode_compact(bits) {
                    Ok(t) => {
                        assert!(fits);
                        assert_eq!(t.to_biguint(), expected);
                    }
                    Err(_) => assert!(!fits, "{bits:x}"),
                }
            }
        }
    }

    #[test]
    fn check_pow_extremes() {
        assert!(check_pow(b"anything", Target::MAX));
        assert!(!check_pow(b"anything", Target::ZERO));
    }

    #[test]
    fn first_accepting_nonce_regression() {
        // Exhaustive search with an independent SHA-256 tool: nonce 8 is the
        // first whose digest starts with a zero nibble.
        let target = Target::power_of_two(252).unwrap();
        assert_eq!(mine(b"relaysim", target, 1 << 20), Some(8));
        for n in 0u32..8 {
            let mut h = b"relaysim".to_vec();
            h.extend_from_slice(&n.to_be_bytes());
            assert!(!check_pow(&h, target));
        }
    }

    #[test]
    fn mine_edges() {
        assert_eq!(mine(b"x", Target::MAX, 10), Some(0));
        assert_eq!(mine(b"x", Target::ZERO, 1000), None);
        assert_eq!(mine(b"x", Target::MAX, 0), None);
        let t = Target::power_of_two(248).unwrap();
        assert_eq!(mine(b"determinism", t, 1 << 16), mine(b"determinism", t, 1 << 16));
    }

    #[test]
    fn subsidy_schedule() {
        let s = SubsidySchedule::default();
        assert_eq!(block_subsidy(0, &s), 5_000_000_000);
        assert_eq!(block_subsidy(209_999, &s), 5_000_000_000);
        assert_eq!(block_subsidy(210_000, &s), 2_500_000_000);
        assert_eq!(block_subsidy(s.exhaustion_height(), &s), 0);
        assert_eq!(block_subsidy(u64::MAX, &s), 0);
        assert!(block_subsidy(s.exhaustion_height() - 1, &s) > 0);
    }

    #[test]
    fn total_supply_matches_brute_force() {
        let s = SubsidySchedule::default();
        let brute: u128 = (0..s.exhaustion_height())
            .map(|h| block_subsidy(h, &s) as u128)
            .sum();
        assert_eq!(s.total_supply(), brute);
        assert_eq!(brute, 2_099_999_997_690_000);
        assert!(brute < 21_000_000 * ATOMIC_UNITS_PER_COIN as u128);
    }

    proptest! {
        #[test]
        fn exponent_three_is_verbatim(coeff in 0u32..(1 << 24)) {
            let t = decode_compact(CompactBits(0x0300_0000 | coeff)).unwrap();
            prop_assert_eq!(t.to_biguint(), BigUint::from(coeff));
        }

        #[test]
        fn mined_nonce_verifies(template in proptest::collection::vec(any::<u8>(), 0..40)) {
            let target = Target::power_of_two(250).unwrap();
            if let Some(n) = mine(&template, target, 1 << 16) {
                let mut h = template.clone();
                h.extend_from_slice(&n.to_be_bytes());
                prop_assert!(check_pow(&h, target));
            }
        }

        #[test]
        fn halving_step(h in 0u64..10_000_000) {
            let s = SubsidySchedule::default();
            prop_assert_eq!(block_subsidy(h + s.halving_interval, &s), block_subsidy(h, &s) / 2);
        }
    }
}
