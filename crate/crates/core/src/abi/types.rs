//! ABI type grammar, descriptors, canonical signatures and selectors.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use super::AbiError;

/// Supported ABI types: all elementary types, dynamic bytes/string,
/// fixed/dynamic arrays and nested tuples. Function-pointer and fixed-point
/// types are rejected at parse time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AbiType {
    /// `uintN`, N in 8..=256 step 8.
    Uint(u16),
    /// `intN`; values are carried as the raw 256-bit two's-complement
    /// pattern (the value model has no signed variant).
    Int(u16),
    Address,
    Bool,
    /// `bytesN`, N in 1..=32.
    FixedBytes(u8),
    Bytes,
    String,
    /// `T[]` when `len` is None, `T[k]` otherwise.
    Array(Box<AbiType>, Option<usize>),
    /// Named components; names unique.
    Tuple(Vec<(String, AbiType)>),
}

impl AbiType {
    /// Dynamic types are referenced through a head offset word.
    pub fn is_dynamic(&self) -> bool {
        match self {
            AbiType::Bytes | AbiType::String => true,
            AbiType::Array(_, None) => true,
            AbiType::Array(elem, Some(_)) => elem.is_dynamic(),
            AbiType::Tuple(comps) => comps.iter().any(|(_, t)| t.is_dynamic()),
            _ => false,
        }
    }

    /// In-place encoded size in bytes; only meaningful for static types.
    pub fn static_size(&self) -> usize {
        match self {
            AbiType::Array(elem, Some(n)) => n * elem.static_size(),
            AbiType::Tuple(comps) => comps.iter().map(|(_, t)| t.static_size()).sum(),
            _ => 32,
        }
    }

    /// Width of this type's slot in a head block.
    pub fn head_size(&self) -> usize {
        if self.is_dynamic() {
            32
        } else {
            self.static_size()
        }
    }

    /// Solidity-canonical type string, tuples expanded to parenthesized
    /// component types.
    pub fn canonical(&self) -> String {
        use core::fmt::Write;
        let mut s = String::new();
        match self {
            AbiType::Uint(n) => {
                let _ = write!(s, "uint{n}");
            }
            AbiType::Int(n) => {
                let _ = write!(s, "int{n}");
            }
            AbiType::Address => s.push_str("address"),
            AbiType::Bool => s.push_str("bool"),
            AbiType::FixedBytes(n) => {
                let _ = write!(s, "bytes{n}");
            }
            AbiType::Bytes => s.push_str("bytes"),
            AbiType::String => s.push_str("string"),
            AbiType::Array(elem, None) => {
                s.push_str(&elem.canonical());
                s.push_str("[]");
            }
            AbiType::Array(elem, Some(n)) => {
                let _ = write!(s, "{}[{n}]", elem.canonical());
            }
            AbiType::Tuple(comps) => {
                s.push('(');
                for (i, (_, t)) in comps.iter().enumerate() {
                    if i > 0 {
                        s.push(',');
                    }
                    s.push_str(&t.canonical());
                }
                s.push(')');
            }
        }
        s
    }

    /// Validates bit widths and component-name uniqueness.
    pub fn validate(&self) -> Result<(), AbiError> {
        match self {
            AbiType::Uint(n) | AbiType::Int(n) => {
                if *n == 0 || *n > 256 || n % 8 != 0 {
                    return Err(AbiError::UnsupportedType(self.canonical()));
                }
            }
            AbiType::FixedBytes(n) => {
                if *n == 0 || *n > 32 {
                    return Err(AbiError::UnsupportedType(self.canonical()));
                }
            }
            AbiType::Array(elem, len) => {
                if let Some(0) = len {
                    return Err(AbiError::UnsupportedType(self.canonical()));
                }
                elem.validate()?;
            }
            AbiType::Tuple(comps) => {
                if comps.is_empty() {
                    return Err(AbiError::UnsupportedType(self.canonical()));
                }
                for (i, (name, t)) in comps.iter().enumerate() {
                    check_identifier(name)?;
                    if comps[..i].iter().any(|(n, _)| n == name) {
                        return Err(AbiError::DuplicateComponent(name.clone()));
                    }
                    t.validate()?;
                }
            }
            _ => {}
        }
        Ok(())
    }
}

pub(crate) fn check_identifier(name: &str) -> Result<(), AbiError> {
    let mut chars = name.chars();
    let ok_first = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_' || c == '$');
    let ok_rest = chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$');
    if name.is_empty() || !ok_first || !ok_rest {
        return Err(AbiError::BadIdentifier(name.into()));
    }
    Ok(())
}

/// A named, typed input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: AbiType,
    /// Only meaningful on event inputs.
    pub indexed: bool,
}

impl Param {
    pub fn new(name: &str, ty: AbiType) -> Self {
        Param {
            name: name.into(),
            ty,
            indexed: false,
        }
    }

    pub fn indexed(name: &str, ty: AbiType) -> Self {
        Param {
            name: name.into(),
            ty,
            indexed: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionDescriptor {
    pub name: String,
    pub inputs: Vec<Param>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventDescriptor {
    pub name: String,
    pub inputs: Vec<Param>,
}

fn validate_inputs(name: &str, inputs: &[Param]) -> Result<(), AbiError> {
    check_identifier(name)?;
    for (i, p) in inputs.iter().enumerate() {
        check_identifier(&p.name)?;
        if inputs[..i].iter().any(|q| q.name == p.name) {
            return Err(AbiError::DuplicateComponent(p.name.clone()));
        }
        p.ty.validate()?;
    }
    Ok(())
}

impl FunctionDescriptor {
    pub fn new(name: &str, inputs: Vec<Param>) -> Result<Self, AbiError> {
        validate_inputs(name, &inputs)?;
        Ok(FunctionDescriptor {
            name: name.into(),
            inputs,
        })
    }
}

impl EventDescriptor {
    pub fn new(name: &str, inputs: Vec<Param>) -> Result<Self, AbiError> {
        validate_inputs(name, &inputs)?;
        Ok(EventDescriptor {
            name: name.into(),
            inputs,
        })
    }

    pub fn indexed_inputs(&self) -> impl Iterator<Item = &Param> {
        self.inputs.iter().filter(|p| p.indexed)
    }

    pub fn unindexed_inputs(&self) -> impl Iterator<Item = &Param> {
        self.inputs.iter().filter(|p| !p.indexed)
    }
}

/// Solidity-canonical signature text: `name(type1,type2)`, no spaces, tuples
/// expanded.
pub fn canonical_signature(name: &str, inputs: &[Param]) -> String {
    let mut s = String::from(name);
    s.push('(');
    for (i, p) in inputs.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&p.ty.canonical());
    }
    s.push(')');
    s
}

/// keccak-256 digest.
pub fn keccak256(data: &[u8]) -> [u8; 32] {
    use sha3::{Digest, Keccak256};
    let mut hasher = Keccak256::new();
    hasher.update(data);
    hasher.finalize().into()
}

/// First 4 bytes of the keccak-256 of the canonical signature.
pub fn selector(fd: &FunctionDescriptor) -> [u8; 4] {
    let sig = canonical_signature(&fd.name, &fd.inputs);
    let h = keccak256(sig.as_bytes());
    [h[0], h[1], h[2], h[3]]
}

/// Full keccak-256 of the canonical signature: topics[0] of a non-anonymous
/// event.
pub fn topic0(ed: &EventDescriptor) -> [u8; 32] {
    keccak256(canonical_signature(&ed.name, &ed.inputs).as_bytes())
}
