//! Dynamic values: the leaves (and branches) of decoded transaction trees.

use alloc::string::String;
use alloc::vec::Vec;
use num_bigint::BigUint;

/// Errors raised while constructing model values.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("unsigned integer exceeds 2^256-1")]
    UintOverflow,
    #[error("address must be exactly 20 bytes, got {0}")]
    BadAddressLength(usize),
    #[error("invalid hex: {0}")]
    BadHex(String),
    #[error("duplicate record key `{0}`")]
    DuplicateKey(String),
    #[error("timestamp must be > 0")]
    ZeroTimestamp,
}

/// Unsigned 256-bit integer. EVM word-sized; arithmetic that can exceed the
/// range (rule-4 cross multiplication, search-space sums) is done on the
/// inner [`BigUint`] instead.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct U256(BigUint);

impl U256 {
    pub fn zero() -> U256 {
        U256(BigUint::ZERO)
    }

    pub fn new(v: BigUint) -> Result<Self, ModelError> {
        if v.bits() > 256 {
            return Err(ModelError::UintOverflow);
        }
        Ok(U256(v))
    }

    pub fn from_u64(v: u64) -> Self {
        U256(BigUint::from(v))
    }

    pub fn from_u128(v: u128) -> Self {
        U256(BigUint::from(v))
    }

    /// Big-endian 32-byte word, as laid out in ABI encodings.
    pub fn to_be_word(&self) -> [u8; 32] {
        let bytes = self.0.to_bytes_be();
        let mut word = [0u8; 32];
        word[32 - bytes.len()..].copy_from_slice(&bytes);
        word
    }

    pub fn from_be_word(word: &[u8; 32]) -> Self {
        U256(BigUint::from_bytes_be(word))
    }

    pub fn from_decimal(s: &str) -> Result<Self, ModelError> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ModelError::BadHex(s.into()));
        }
        let v = BigUint::parse_bytes(s.as_bytes(), 10).ok_or(ModelError::UintOverflow)?;
        U256::new(v)
    }

    pub fn to_decimal(&self) -> String {
        use alloc::string::ToString;
        self.0.to_string()
    }

    pub fn as_biguint(&self) -> &BigUint {
        &self.0
    }

    pub fn to_u64(&self) -> Option<u64> {
        u64::try_from(&self.0).ok()
    }

    pub fn is_zero(&self) -> bool {
        self.0 == BigUint::ZERO
    }

    /// Number of significant bits.
    pub fn bits(&self) -> u64 {
        self.0.bits()
    }
}

impl core::fmt::Debug for U256 {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl core::fmt::Display for U256 {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for U256 {
    fn from(v: u64) -> Self {
        U256::from_u64(v)
    }
}

/// A 20-byte EVM account address. Canonical text form is lowercase hex with
/// a 0x prefix; checksum casing is cosmetic and never affects equality.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Address(pub [u8; 20]);

impl Address {
    pub const ZERO: Address = Address([0u8; 20]);

    pub fn from_slice(bytes: &[u8]) -> Result<Self, ModelError> {
        let arr: [u8; 20] = bytes
            .try_into()
            .map_err(|_| ModelError::BadAddressLength(bytes.len()))?;
        Ok(Address(arr))
    }

    /// Parses `0x`-prefixed hex of any casing.
    pub fn from_hex(s: &str) -> Result<Self, ModelError> {
        let body = s.strip_prefix("0x").unwrap_or(s);
        let bytes = hex::decode(body).map_err(|_| ModelError::BadHex(s.into()))?;
        Address::from_slice(&bytes)
    }

    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(42);
        s.push_str("0x");
        s.push_str(&hex::encode(self.0));
        s
    }
}

impl core::fmt::Debug for Address {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl core::fmt::Display for Address {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// An ordered name→value mapping. Insertion order is preserved and names are
/// unique within one record.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Record(Vec<(String, Value)>);

impl Record {
    pub fn new() -> Self {
        Record(Vec::new())
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Value) -> Result<(), ModelError> {
        let name = name.into();
        if self.0.iter().any(|(n, _)| *n == name) {
            return Err(ModelError::DuplicateKey(name));
        }
        self.0.push((name, value));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.0.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.0.iter().map(|(n, v)| (n.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Builds a record from pairs, failing on duplicate names.
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (S, Value)>,
        S: Into<String>,
    {
        let mut rec = Record::new();
        for (n, v) in pairs {
            rec.insert(n, v)?;
        }
        Ok(rec)
    }
}

/// A decoded dynamic value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    /// Unsigned integer below 2^256.
    Uint(U256),
    /// 20-byte account address.
    Address(Address),
    Bool(bool),
    /// Arbitrary octet string.
    Bytes(Vec<u8>),
    /// UTF-8 text.
    Text(String),
    /// Ordered list of values.
    List(Vec<Value>),
    /// Ordered name→value mapping.
    Record(Record),
}

impl Value {
    pub fn uint_u64(v: u64) -> Value {
        Value::Uint(U256::from_u64(v))
    }

    pub fn is_leaf(&self) -> bool {
        !matches!(self, Value::List(_) | Value::Record(_))
    }

    pub fn as_uint(&self) -> Option<&U256> {
        match self {
            Value::Uint(u) => Some(u),
            _ => None,
        }
    }

    pub fn as_address(&self) -> Option<&Address> {
        match self {
            Value::Address(a) => Some(a),
            _ => None,
        }
    }

    /// Canonical scalar form used by every value comparison in the pipeline:
    /// hex text that spells an address collapses onto the address itself, and
    /// decimal text collapses onto the integer, so cosmetic representation
    /// differences never defeat a match.
    pub fn canonical(&self) -> CanonicalValue {
        match self {
            Value::Uint(u) => CanonicalValue::Num(u.clone()),
            Value::Address(a) => CanonicalValue::Addr(*a),
            Value::Bool(b) => CanonicalValue::Bool(*b),
            Value::Bytes(b) => CanonicalValue::Bytes(b.clone()),
            Value::Text(t) => {
                if let Ok(a) = Address::from_hex(t) {
                    if t.starts_with("0x") || t.starts_with("0X") {
                        return CanonicalValue::Addr(a);
                    }
                }
                if let Ok(u) = U256::from_decimal(t) {
                    return CanonicalValue::Num(u);
                }
                CanonicalValue::Text(t.clone())
            }
            Value::List(_) | Value::Record(_) => CanonicalValue::Composite,
        }
    }
}

/// Scalar comparison key; see [`Value::canonical`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CanonicalValue {
    Num(U256),
    Addr(Address),
    Bool(bool),
    Bytes(Vec<u8>),
    Text(String),
    /// Lists and records never equal a scalar and never key a value set.
    Composite,
}
