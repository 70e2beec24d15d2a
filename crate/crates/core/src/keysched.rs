//! Expansion of the pre-shared key into the check string and the CNOT
//! transform string.
//!
//! The extension function is deliberately simple and bit-exact: a 64-bit
//! FNV-1a hash over `key bytes ‖ tag` seeds one SplitMix64 stream per
//! sub-key. It is **not** a cryptographic key schedule.

use crate::error::{Error, Result};
use crate::qcore::{BasisSymbol, QubitCap};
use std::fmt;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Domain tag for the check sub-key, ASCII `Q`.
pub const TAG_CHECK: u8 = 0x51;
/// Domain tag for the transform sub-key, ASCII `T`.
pub const TAG_TRANSFORM: u8 = 0x54;

/// Pre-shared key of `bit_len` bits stored in `⌈bit_len / 8⌉` bytes.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Key {
    bytes: Vec<u8>,
    bit_len: usize,
}

impl Key {
    pub fn from_bytes(bytes: impl Into<Vec<u8>>) -> Result<Self> {
        let bytes = bytes.into();
        let bit_len = bytes.len() * 8;
        Self::with_bit_len(bytes, bit_len)
    }

    pub fn with_bit_len(bytes: impl Into<Vec<u8>>, bit_len: usize) -> Result<Self> {
        let bytes = bytes.into();
        if bytes.is_empty() || bit_len < 8 {
            return Err(Error::EmptyKey);
        }
        if bytes.len() != bit_len.div_ceil(8) {
            return Err(Error::InvalidKey(format!(
                "{} bytes cannot hold exactly {bit_len} bits",
                bytes.len()
            )));
        }
        Ok(Self { bytes, bit_len })
    }

    /// Parses a hex string, with optional `0x` prefix; whitespace anywhere is ignored.
    pub fn from_hex(text: &str) -> Result<Self> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let digits = compact
            .strip_prefix("0x")
            .or_else(|| compact.strip_prefix("0X"))
            .unwrap_or(&compact);
        if digits.is_empty() {
            return Err(Error::EmptyKey);
        }
        let bytes = hex::decode(digits).map_err(|e| Error::InvalidKey(e.to_string()))?;
        Self::from_bytes(bytes)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.bytes)
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn bit_len(&self) -> usize {
        self.bit_len
    }

    /// Copy with bit `bit` (0 = most significant bit of byte 0) inverted.
    pub fn with_flipped_bit(&self, bit: usize) -> Self {
        let mut bytes = self.bytes.clone();
        bytes[bit / 8] ^= 0x80 >> (bit % 8);
        Self {
            bytes,
            bit_len: self.bit_len,
        }
    }
}

impl fmt::Debug for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Key({} bits)", self.bit_len)
    }
}

impl serde::Serialize for Key {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> serde::Deserialize<'de> for Key {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Key::from_hex(&text).map_err(serde::de::Error::custom)
    }
}

/// 64-bit FNV-1a over `data` followed by a single `tag` byte.
pub fn fnv1a64_tagged(data: &[u8], tag: u8) -> u64 {
    data.iter()
        .chain(std::iter::once(&tag))
        .fold(FNV_OFFSET, |h, &b| {
            (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
        })
}

/// SplitMix64 output stream.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

impl Iterator for SplitMix64 {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        Some(self.next_u64())
    }
}

/// Seeds of the two sub-key streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SubKeys {
    pub kq_seed: u64,
    pub kt_seed: u64,
}

pub fn derive_subkeys(key: &Key) -> SubKeys {
    SubKeys {
        kq_seed: fnv1a64_tagged(key.bytes(), TAG_CHECK),
        kt_seed: fnv1a64_tagged(key.bytes(), TAG_TRANSFORM),
    }
}

/// Quaternary string selecting each check qubit's BB84 state.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CheckString(Vec<BasisSymbol>);

impl CheckString {
    pub fn new(symbols: Vec<BasisSymbol>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::InvalidParams(
                "check string must be non-empty".into(),
            ));
        }
        Ok(Self(symbols))
    }

    /// Parses digits `0`..`3`, e.g. `"012130"`.
    pub fn parse(digits: &str) -> Result<Self> {
        let symbols = digits
            .chars()
            .map(|c| match c.to_digit(10) {
                Some(d) if d < 4 => Ok(BasisSymbol::new(d as u8).expect("d < 4")),
                _ => Err(Error::InvalidParams(format!("bad check symbol {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(symbols)
    }

    pub fn symbols(&self) -> &[BasisSymbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Replaces X-basis symbols by their Z-basis counterpart (2 → 0, 3 → 1).
    pub fn to_classical(&self) -> Self {
        Self(
            self.0
                .iter()
                .map(|s| BasisSymbol::from_parts(crate::qcore::Basis::Z, s.outcome()))
                .collect(),
        )
    }
}

impl fmt::Display for CheckString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|s| write!(f, "{s}"))
    }
}

/// CNOT targets, one per codeword qubit: element `i` (1-based) is the target
/// of the CNOT controlled by qubit `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TransformString(Vec<usize>);

impl TransformString {
    pub fn new(targets: Vec<usize>) -> Result<Self> {
        let len = targets.len();
        if len == 0 {
            return Err(Error::InvalidParams(
                "transform string must be non-empty".into(),
            ));
        }
        if let Some(&bad) = targets.iter().find(|&&t| t == 0 || t > len) {
            return Err(Error::InvalidParams(format!(
                "transform target {bad} outside 1..={len}"
            )));
        }
        Ok(Self(targets))
    }

    /// `(1, 2, …, len)`: every CNOT is the identity.
    pub fn identity(len: usize) -> Result<Self> {
        Self::new((1..=len).collect())
    }

    pub fn targets(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True if every CNOT is the identity.
    pub fn is_degenerate(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &t)| t == i + 1)
    }

    /// `(control, target)` pairs in encoding order: ascending control.
    pub fn encode_schedule(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().enumerate().map(|(i, &t)| (i + 1, t))
    }

    /// `(control, target)` pairs in decoding order: descending control.
    pub fn decode_schedule(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().enumerate().rev().map(|(i, &t)| (i + 1, t))
    }
}

impl fmt::Display for TransformString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|t| t.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

pub fn derive_check_string(sub: &SubKeys, n: usize) -> Result<CheckString> {
    if n < 1 {
        return Err(Error::InvalidParams("n must be at least 1".into()));
    }
    let symbols = SplitMix64::new(sub.kq_seed)
        .take(n)
        .map(|z| BasisSymbol::new((z % 4) as u8).expect("reduced mod 4"))
        .collect();
    CheckString::new(symbols)
}

pub fn derive_transform_string(sub: &SubKeys, n: usize, m: usize) -> Result<TransformString> {
    derive_transform_string_capped(sub, n, m, QubitCap::DEFAULT)
}

pub fn derive_transform_string_capped(
    sub: &SubKeys,
    n: usize,
    m: usize,
    cap: QubitCap,
) -> Result<TransformString> {
    if n < 1 || m < 1 {
        return Err(Error::InvalidParams(format!(
            "need n >= 1 and m >= 1, got n={n} m={m}"
        )));
    }
    let total = n + m;
    cap.check(total)?;
    let targets = SplitMix64::new(sub.kt_seed)
        .take(total)
        .map(|z| (z % total as u64) as usize + 1)
        .collect();
    TransformString::new(targets)
}
