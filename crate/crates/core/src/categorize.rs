//! Grouping decoded instances into categories by exact field-set equality,
//! plus the search-space counts before and after semantic inference.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigUint;

use crate::model::{CandidateQuintuple, CategoryKey, TransactionInstance};

/// An equivalence class of instances sharing an identical field set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Category {
    pub key: CategoryKey,
    /// Sorted, duplicate-free rendered field paths.
    pub fields: Vec<String>,
    /// Indices into the dataset this category was built from.
    pub members: Vec<usize>,
}

impl Category {
    /// A quintuple cannot exist below five fields; such categories are
    /// flagged un-pairable and skipped downstream.
    pub fn is_pairable(&self) -> bool {
        self.fields.len() >= 5
    }
}

/// The duplicate-free sorted list of every leaf path (fields are static:
/// same schema, different values, identical output).
pub fn fields_of(tx: &TransactionInstance) -> Vec<String> {
    let mut set: BTreeSet<String> = tx
        .leaf_paths()
        .into_iter()
        .map(|(p, _)| p.rendered().into())
        .collect();
    for marker in tx.marker_paths() {
        set.insert(marker.rendered().into());
    }
    set.into_iter().collect()
}

/// Partitions instances into categories. Two instances share a category iff
/// their field sets are equal. Output is ordered by member count descending,
/// ties by category key.
pub fn categorize(txs: &[TransactionInstance]) -> Vec<Category> {
    let mut by_key: BTreeMap<CategoryKey, Category> = BTreeMap::new();
    for (i, tx) in txs.iter().enumerate() {
        let fields = fields_of(tx);
        let key = CategoryKey::from_fields(&fields);
        by_key
            .entry(key)
            .or_insert_with(|| Category {
                key,
                fields,
                members: Vec::new(),
            })
            .members
            .push(i);
    }
    let mut cats: Vec<Category> = by_key.into_values().collect();
    cats.sort_by(|a, b| b.members.len().cmp(&a.members.len()).then(a.key.cmp(&b.key)));
    cats
}

/// C(n, k) as a big integer.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    let k = k.min(n - k);
    let mut num = BigUint::from(1u8);
    let mut den = BigUint::from(1u8);
    for i in 0..k {
        num *= BigUint::from(n - i);
        den *= BigUint::from(i + 1);
    }
    num / den
}

/// Total number of possible quintuple selections across categories:
/// the sum over categories of C(|S_i|, 5). Categories with fewer than five
/// fields contribute zero.
pub fn combination_count(categories: &[Category]) -> BigUint {
    categories
        .iter()
        .map(|c| binomial(c.fields.len() as u64, 5))
        .sum()
}

/// Search-space size after inference: the sum over categories of the product
/// of per-role candidate-list sizes. Categories missing a role contribute a
/// zero product.
pub fn candidate_space_size<'a, I>(candidates: I) -> BigUint
where
    I: IntoIterator<Item = &'a CandidateQuintuple>,
{
    candidates
        .into_iter()
        .map(|cq| BigUint::from(cq.combinations()))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        Address, Candidate, DecodedCall, FieldPath, LogEntry, Record, Role, Side, TxHash, Value,
        U256,
    };
    use alloc::vec;

    fn tx_with(function: &str, arg_names: &[&str], logs: Vec<(&str, &[&str])>) -> TransactionInstance {
        let mut args = Record::new();
        for n in arg_names {
            args.insert(*n, Value::uint_u64(1)).unwrap();
        }
        let logs = logs
            .into_iter()
            .map(|(ev, keys)| {
                let mut rec = Record::new();
                for k in keys {
                    rec.insert(*k, Value::uint_u64(2)).unwrap();
                }
                LogEntry {
                    event: ev.into(),
                    emitter: Address::ZERO,
                    record: rec,
                }
            })
            .collect();
        TransactionInstance::new(
            1,
            TxHash([7u8; 32]),
            1,
            100,
            Address::ZERO,
            Address::ZERO,
            U256::zero(),
            DecodedCall {
                function: function.into(),
                args,
            },
            logs,
            Side::Source,
        )
        .unwrap()
    }

    #[test]
    fn fields_are_sorted_and_schema_static() {
        let tx = tx_with("f", &["a", "b"], vec![("E", &["x"][..])]);
        assert_eq!(
            fields_of(&tx),
            vec![
                "log[E].x",
                "transaction.timestamp",
                "transaction[f].a",
                "transaction[f].b",
            ]
        );
        // Same schema, different values → identical output.
        let mut other = tx_with("f", &["a", "b"], vec![("E", &["x"][..])]);
        other.timestamp = 999_999;
        assert_eq!(fields_of(&tx), fields_of(&other));
    }

    #[test]
    fn native_vs_erc20_paths_make_distinct_sets() {
        let native = tx_with("swap", &["amt"], vec![("TransferNative", &["to", "value"][..])]);
        let erc20 = tx_with("swap", &["amt"], vec![("Transfer", &["to", "value"][..])]);
        let f_native = fields_of(&native);
        let f_erc20 = fields_of(&erc20);
        assert_ne!(f_native, f_erc20);
        assert!(f_native.iter().any(|f| f.starts_with("log[TransferNative]")));
        assert!(f_erc20.iter().any(|f| f.starts_with("log[Transfer]")));
    }

    #[test]
    fn categorize_partitions_by_field_set() {
        let txs = vec![
            tx_with("f", &["a"], vec![]),
            tx_with("f", &["a"], vec![]),
            tx_with("g", &["b"], vec![]),
        ];
        let cats = categorize(&txs);
        assert_eq!(cats.len(), 2);
        assert_eq!(cats[0].members.len(), 2);
        assert_eq!(cats[1].members.len(), 1);
        let total: usize = cats.iter().map(|c| c.members.len()).sum();
        assert_eq!(total, txs.len());
    }

    #[test]
    fn categorize_empty_input() {
        assert!(categorize(&[]).is_empty());
    }

    #[test]
    fn combination_count_motivating_example() {
        let cat = Category {
            key: CategoryKey([0u8; 32]),
            fields: (0..144).map(|i| alloc::format!("f{i}")).collect(),
            members: vec![0],
        };
        assert_eq!(
            combination_count(&[cat]),
            BigUint::from(481_008_528u64)
        );
    }

    #[test]
    fn combination_count_small_cases() {
        let mk = |n: usize| Category {
            key: CategoryKey([n as u8; 32]),
            fields: (0..n).map(|i| alloc::format!("f{i}")).collect(),
            members: vec![],
        };
        assert_eq!(combination_count(&[mk(5)]), BigUint::from(1u8));
        assert_eq!(combination_count(&[mk(6), mk(4)]), BigUint::from(6u8));
        assert_eq!(combination_count(&[]), BigUint::ZERO);
    }

    #[test]
    fn binomial_matches_enumeration_oracle() {
        // Independent oracle: count 5-subsets by brute-force enumeration.
        fn count_subsets(n: usize) -> u64 {
            let mut count = 0u64;
            // five nested index loops over 0..n
            for a in 0..n {
                for b in a + 1..n {
                    for c in b + 1..n {
                        for d in c + 1..n {
                            for e in d + 1..n {
                                let _ = e;
                                count += 1;
                            }
                        }
                    }
                }
            }
            count
        }
        for n in 0..=12u64 {
            assert_eq!(
                binomial(n, 5),
                BigUint::from(count_subsets(n as usize)),
                "n={n}"
            );
        }
    }

    #[test]
    fn candidate_space_examples() {
        let mut cq = CandidateQuintuple::new();
        for role in Role::ALL {
            cq.set(
                role,
                (0..3)
                    .map(|i| Candidate {
                        path: FieldPath::parse(&alloc::format!("log[E].f{i}")).unwrap(),
                        confidence: 1.0,
                    })
                    .collect(),
            );
        }
        assert_eq!(candidate_space_size([&cq]), BigUint::from(243u32));

        let mut singleton = CandidateQuintuple::new();
        for role in Role::ALL {
            singleton.set(
                role,
                vec![Candidate {
                    path: FieldPath::parse("log[E].x").unwrap(),
                    confidence: 1.0,
                }],
            );
        }
        // One candidate per role in every category → Y = M.
        let m = 7usize;
        let cats: Vec<_> = (0..m).map(|_| singleton.clone()).collect();
        assert_eq!(candidate_space_size(cats.iter()), BigUint::from(m));
    }
}
