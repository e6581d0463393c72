//! Field paths: root-to-leaf key concatenations identifying one value slot.
//!
//! Identity is the rendered string. List indices are carried on the segment
//! list for diagnostics but excluded from rendering and equality — field sets
//! group by static names, and per-index paths would shatter categories. At
//! resolve time the first matching occurrence wins.

use alloc::string::String;
use alloc::vec::Vec;

use super::instance::TransactionInstance;
use super::value::Value;

/// Rendered name of the timestamp pseudo-field carried by every instance.
pub const META_TIMESTAMP: &str = "transaction.timestamp";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PathError {
    #[error("empty name in path")]
    EmptyName,
    #[error("name `{0}` contains a reserved character")]
    ReservedChar(String),
    #[error("cannot parse `{0}` as a field path")]
    Parse(String),
}

/// Where a path is anchored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PathRoot {
    /// Decoded call of the named function: `transaction[<fn>]`.
    Transaction(String),
    /// Decoded log of the named event: `log[<Event>]`.
    Log(String),
    /// Instance-level pseudo-fields: `transaction.<name>`.
    Meta,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PathSegment {
    Key(String),
    /// Position inside a list; not part of the rendered identity.
    Index(u32),
}

/// A unique root-to-leaf key concatenation. Two paths are equal iff their
/// rendered forms are byte-equal.
#[derive(Clone)]
pub struct FieldPath {
    root: PathRoot,
    segments: Vec<PathSegment>,
    rendered: String,
}

fn check_name(name: &str) -> Result<(), PathError> {
    if name.is_empty() {
        return Err(PathError::EmptyName);
    }
    if name.bytes().any(|b| matches!(b, b'[' | b']' | b'.')) {
        return Err(PathError::ReservedChar(name.into()));
    }
    Ok(())
}

fn render(root: &PathRoot, segments: &[PathSegment]) -> String {
    let mut out = String::new();
    match root {
        PathRoot::Transaction(f) => {
            out.push_str("transaction[");
            out.push_str(f);
            out.push(']');
        }
        PathRoot::Log(e) => {
            out.push_str("log[");
            out.push_str(e);
            out.push(']');
        }
        PathRoot::Meta => out.push_str("transaction"),
    }
    for seg in segments {
        if let PathSegment::Key(k) = seg {
            out.push('.');
            out.push_str(k);
        }
    }
    out
}

impl FieldPath {
    pub fn new(root: PathRoot, segments: Vec<PathSegment>) -> Result<Self, PathError> {
        match &root {
            PathRoot::Transaction(n) | PathRoot::Log(n) => check_name(n)?,
            PathRoot::Meta => {
                // Meta paths must name something: `transaction` alone is not a field.
                if !segments.iter().any(|s| matches!(s, PathSegment::Key(_))) {
                    return Err(PathError::EmptyName);
                }
            }
        }
        for seg in &segments {
            if let PathSegment::Key(k) = seg {
                check_name(k)?;
            }
        }
        let rendered = render(&root, &segments);
        Ok(FieldPath {
            root,
            segments,
            rendered,
        })
    }

    /// The timestamp pseudo-field.
    pub fn meta_timestamp() -> Self {
        FieldPath::new(PathRoot::Meta, alloc::vec![PathSegment::Key("timestamp".into())])
            .expect("static path")
    }

    pub fn transaction(function: &str, keys: &[&str]) -> Result<Self, PathError> {
        FieldPath::new(
            PathRoot::Transaction(function.into()),
            keys.iter().map(|k| PathSegment::Key((*k).into())).collect(),
        )
    }

    pub fn log(event: &str, keys: &[&str]) -> Result<Self, PathError> {
        FieldPath::new(
            PathRoot::Log(event.into()),
            keys.iter().map(|k| PathSegment::Key((*k).into())).collect(),
        )
    }

    pub fn root(&self) -> &PathRoot {
        &self.root
    }

    pub fn segments(&self) -> &[PathSegment] {
        &self.segments
    }

    /// Canonical string form; injective over valid paths.
    pub fn rendered(&self) -> &str {
        &self.rendered
    }

    /// Parses a rendered form back into a path (indices are never rendered,
    /// so the result carries key segments only).
    pub fn parse(s: &str) -> Result<Self, PathError> {
        let err = || PathError::Parse(s.into());
        let (root, rest) = if let Some(rest) = s.strip_prefix("transaction[") {
            let close = rest.find(']').ok_or_else(err)?;
            (PathRoot::Transaction(rest[..close].into()), &rest[close + 1..])
        } else if let Some(rest) = s.strip_prefix("log[") {
            let close = rest.find(']').ok_or_else(err)?;
            (PathRoot::Log(rest[..close].into()), &rest[close + 1..])
        } else if let Some(rest) = s.strip_prefix("transaction.") {
            let mut segs = Vec::new();
            for part in rest.split('.') {
                segs.push(PathSegment::Key(part.into()));
            }
            return FieldPath::new(PathRoot::Meta, segs).map_err(|_| err());
        } else {
            return Err(err());
        };
        let mut segs = Vec::new();
        if !rest.is_empty() {
            let rest = rest.strip_prefix('.').ok_or_else(err)?;
            for part in rest.split('.') {
                segs.push(PathSegment::Key(part.into()));
            }
        }
        FieldPath::new(root, segs).map_err(|_| err())
    }

    /// Looks up the leaf value this path names within an instance. Absence is
    /// a normal outcome (it signals a category mismatch), not a failure.
    pub fn resolve(&self, tx: &TransactionInstance) -> Option<Value> {
        match &self.root {
            PathRoot::Meta => {
                if self.rendered == META_TIMESTAMP {
                    Some(Value::uint_u64(tx.timestamp))
                } else {
                    None
                }
            }
            PathRoot::Transaction(f) => {
                if tx.call.function != *f {
                    return None;
                }
                resolve_in(&Value::Record(tx.call.args.clone()), &self.segments)
            }
            PathRoot::Log(e) => tx
                .logs
                .iter()
                .filter(|log| log.event == *e)
                .find_map(|log| resolve_in(&Value::Record(log.record.clone()), &self.segments)),
        }
    }
}

fn resolve_in(value: &Value, segments: &[PathSegment]) -> Option<Value> {
    match segments.split_first() {
        None => {
            if value.is_leaf() {
                Some(value.clone())
            } else {
                None
            }
        }
        Some((PathSegment::Index(i), rest)) => match value {
            Value::List(items) => items.get(*i as usize).and_then(|v| resolve_in(v, rest)),
            _ => None,
        },
        Some((PathSegment::Key(k), rest)) => match value {
            Value::Record(rec) => rec.get(k).and_then(|v| resolve_in(v, rest)),
            // Key segments look through lists: first matching element wins.
            Value::List(items) => items.iter().find_map(|v| resolve_in(v, segments)),
            _ => {
                let _ = (k, rest);
                None
            }
        },
    }
}

impl PartialEq for FieldPath {
    fn eq(&self, other: &Self) -> bool {
        self.rendered == other.rendered
    }
}

impl Eq for FieldPath {}

impl PartialOrd for FieldPath {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FieldPath {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.rendered.cmp(&other.rendered)
    }
}

impl core::hash::Hash for FieldPath {
    fn hash<H: core::hash::Hasher>(&self, state: &mut H) {
        self.rendered.hash(state);
    }
}

impl core::fmt::Debug for FieldPath {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&self.rendered)
    }
}

impl core::fmt::Display for FieldPath {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&self.rendered)
    }
}
