//! Pairing parameters: tolerances and alias tables.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;

use super::value::{Address, Value};

/// Reserved token symbol marking wrapped/sentinel native-asset addresses in
/// the token alias table.
pub const NATIVE_SYMBOL: &str = "NATIVE";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParamsError {
    #[error("timewindow must be > 0")]
    ZeroTimewindow,
    #[error("fee_rate must be within [0,1]")]
    FeeRateRange,
}

/// Amount-discrepancy tolerance as an exact fraction (parts per million), so
/// rule 4 evaluates in integer arithmetic with an inclusive boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FeeRate(u32);

impl FeeRate {
    pub const DENOM: u64 = 1_000_000;

    pub fn from_ppm(ppm: u32) -> Result<Self, ParamsError> {
        if ppm as u64 > Self::DENOM {
            return Err(ParamsError::FeeRateRange);
        }
        Ok(FeeRate(ppm))
    }

    /// Converts a fraction in [0,1]; rounds to the nearest ppm.
    pub fn from_fraction(f: f64) -> Result<Self, ParamsError> {
        if !(0.0..=1.0).contains(&f) {
            return Err(ParamsError::FeeRateRange);
        }
        FeeRate::from_ppm((f * Self::DENOM as f64 + 0.5) as u32)
    }

    pub fn ppm(self) -> u32 {
        self.0
    }

    pub fn as_fraction(self) -> f64 {
        self.0 as f64 / Self::DENOM as f64
    }
}

/// Tolerances plus chain/token alias tables shared by the examiner and the
/// pairer. Defaults: timewindow 7200 s, fee_rate 20%.
#[derive(Debug, Clone, PartialEq)]
pub struct PairingParams {
    /// Settlement-delay tolerance in seconds.
    pub timewindow: u64,
    pub fee_rate: FeeRate,
    /// Bridge-internal chain id → canonical chain id.
    pub chain_alias: BTreeMap<u64, u64>,
    /// (canonical chain id, token address) → canonical token symbol.
    pub token_alias: BTreeMap<(u64, Address), String>,
}

impl Default for PairingParams {
    fn default() -> Self {
        PairingParams {
            timewindow: 7200,
            fee_rate: FeeRate::from_ppm(200_000).expect("static"),
            chain_alias: BTreeMap::new(),
            token_alias: BTreeMap::new(),
        }
    }
}

impl PairingParams {
    pub fn validate(&self) -> Result<(), ParamsError> {
        if self.timewindow == 0 {
            return Err(ParamsError::ZeroTimewindow);
        }
        Ok(())
    }

    /// Resolves a possibly bridge-internal chain id to its canonical id.
    /// Values not in the alias table pass through unchanged.
    pub fn resolve_chain(&self, raw: u64) -> u64 {
        *self.chain_alias.get(&raw).unwrap_or(&raw)
    }

    /// Canonical token identity for an address on a chain: the aliased symbol
    /// when known, otherwise `<chain>:<0x-address>` (which can never equal a
    /// token on another chain — cross-chain equivalence needs an alias).
    pub fn canonical_token_addr(&self, chain: u64, addr: &Address) -> String {
        match self.token_alias.get(&(chain, *addr)) {
            Some(sym) => sym.clone(),
            None => format!("{chain}:{}", addr.to_hex()),
        }
    }

    /// Canonical token identity for a token-typed field value: addresses go
    /// through the alias table, text is already a symbol.
    pub fn canonical_token_value(&self, chain: u64, value: &Value) -> Option<String> {
        match value {
            Value::Address(a) => Some(self.canonical_token_addr(chain, a)),
            Value::Text(t) => {
                if let Ok(a) = Address::from_hex(t) {
                    if t.starts_with("0x") || t.starts_with("0X") {
                        return Some(self.canonical_token_addr(chain, &a));
                    }
                }
                Some(t.clone())
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fee_rate_bounds() {
        assert!(FeeRate::from_fraction(0.2).is_ok());
        assert_eq!(FeeRate::from_fraction(0.2).unwrap().ppm(), 200_000);
        assert_eq!(FeeRate::from_fraction(1.5), Err(ParamsError::FeeRateRange));
        assert_eq!(FeeRate::from_fraction(-0.1), Err(ParamsError::FeeRateRange));
        assert_eq!(FeeRate::from_ppm(1_000_000).unwrap().as_fraction(), 1.0);
    }

    #[test]
    fn chain_alias_passthrough() {
        let mut p = PairingParams::default();
        p.chain_alias.insert(102, 56);
        assert_eq!(p.resolve_chain(102), 56);
        assert_eq!(p.resolve_chain(1), 1);
    }

    #[test]
    fn token_alias_and_fallback() {
        let mut p = PairingParams::default();
        let usdc = Address::from_hex("0xa0b86991c6218b36c1d19d4a2e9eb0ce3606eb48").unwrap();
        p.token_alias.insert((1, usdc), "USDC".into());
        assert_eq!(p.canonical_token_addr(1, &usdc), "USDC");
        let other = Address::ZERO;
        assert_eq!(
            p.canonical_token_addr(7, &other),
            "7:0x0000000000000000000000000000000000000000"
        );
        // Text forms: hex goes through the table, symbols pass through.
        assert_eq!(
            p.canonical_token_value(1, &Value::Text(usdc.to_hex())),
            Some("USDC".into())
        );
        assert_eq!(
            p.canonical_token_value(1, &Value::Text("WETH".into())),
            Some("WETH".into())
        );
        assert_eq!(p.canonical_token_value(1, &Value::Bool(true)), None);
    }
}
