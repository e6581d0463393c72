//! The five-role semantic identifier and its candidate form.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::path::FieldPath;

/// The five roles of the semantic identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    /// Destination address on the other chain.
    Destination,
    /// The counterpart blockchain.
    Chain,
    /// Asset type moved.
    Token,
    /// Asset amount moved.
    Amount,
    /// When the transfer leg happened.
    Timestamp,
}

impl Role {
    pub const ALL: [Role; 5] = [
        Role::Destination,
        Role::Chain,
        Role::Token,
        Role::Amount,
        Role::Timestamp,
    ];

    /// Wire / file name of the role.
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Destination => "to",
            Role::Chain => "chain",
            Role::Token => "token",
            Role::Amount => "amount",
            Role::Timestamp => "timestamp",
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn from_str(s: &str) -> Option<Role> {
        match s {
            "to" => Some(Role::Destination),
            "chain" => Some(Role::Chain),
            "token" => Some(Role::Token),
            "amount" => Some(Role::Amount),
            "timestamp" => Some(Role::Timestamp),
            _ => None,
        }
    }
}

impl core::fmt::Display for Role {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A validated role→field mapping: all five roles present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quintuple {
    pub destination: FieldPath,
    pub chain: FieldPath,
    pub token: FieldPath,
    pub amount: FieldPath,
    pub timestamp: FieldPath,
}

impl Quintuple {
    pub fn get(&self, role: Role) -> &FieldPath {
        match role {
            Role::Destination => &self.destination,
            Role::Chain => &self.chain,
            Role::Token => &self.token,
            Role::Amount => &self.amount,
            Role::Timestamp => &self.timestamp,
        }
    }

    pub fn from_map(mut map: BTreeMap<Role, FieldPath>) -> Option<Quintuple> {
        Some(Quintuple {
            destination: map.remove(&Role::Destination)?,
            chain: map.remove(&Role::Chain)?,
            token: map.remove(&Role::Token)?,
            amount: map.remove(&Role::Amount)?,
            timestamp: map.remove(&Role::Timestamp)?,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (Role, &FieldPath)> {
        Role::ALL.into_iter().map(move |r| (r, self.get(r)))
    }
}

/// One proposed field for a role.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub path: FieldPath,
    /// Provider confidence in [0,1]. Recorded, never thresholded — the
    /// examiner decides truth.
    pub confidence: f64,
}

/// Per-role ordered candidate lists (confidence descending, ties by rendered
/// path). A category can proceed only when every role list is non-empty.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CandidateQuintuple {
    lists: BTreeMap<Role, Vec<Candidate>>,
}

impl CandidateQuintuple {
    pub fn new() -> Self {
        Self::default()
    }

    /// Installs a role list, normalizing to descending confidence with
    /// path-order tie-break.
    pub fn set(&mut self, role: Role, mut list: Vec<Candidate>) {
        list.sort_by(|a, b| {
            b.confidence
                .partial_cmp(&a.confidence)
                .unwrap_or(core::cmp::Ordering::Equal)
                .then_with(|| a.path.cmp(&b.path))
        });
        self.lists.insert(role, list);
    }

    pub fn get(&self, role: Role) -> &[Candidate] {
        self.lists.get(&role).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn paths(&self, role: Role) -> Vec<&FieldPath> {
        self.get(role).iter().map(|c| &c.path).collect()
    }

    /// True when every role has at least one candidate.
    pub fn is_complete(&self) -> bool {
        Role::ALL.iter().all(|r| !self.get(*r).is_empty())
    }

    /// Product of role list sizes: this category's term in the reduced
    /// search-space sum.
    pub fn combinations(&self) -> u128 {
        Role::ALL
            .iter()
            .map(|r| self.get(*r).len() as u128)
            .product()
    }
}
