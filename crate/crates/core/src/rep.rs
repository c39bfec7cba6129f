//! SO(3) tensor-power decomposition: multiplicities of each integer spin in
//! the n-th tensor power of the vector representation.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest supported tensor power; beyond this the dimension identity
/// `3^n` no longer fits comfortably in exact integer arithmetic here.
pub const MAX_TENSOR_POWER: u32 = 20;

/// Multiplicities `m_{n,j}` of spin `j` in the n-th tensor power of the
/// spin-1 representation. Only nonzero entries are stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MultiplicityTable {
    pub n: u32,
    entries: BTreeMap<u32, u64>,
}

impl MultiplicityTable {
    pub fn multiplicity(&self, j: u32) -> u64 {
        self.entries.get(&j).copied().unwrap_or(0)
    }

    pub fn entries(&self) -> &BTreeMap<u32, u64> {
        &self.entries
    }

    /// `sum_j (2j + 1) m_{n,j}`, which must equal `3^n`.
    pub fn dimension_sum(&self) -> u64 {
        self.entries
            .iter()
            .map(|(&j, &m)| (2 * j as u64 + 1) * m)
            .sum()
    }

    /// JSON object `{"n": n, "multiplicities": {"j": m}}`.
    pub fn to_json(&self) -> serde_json::Value {
        let mult: serde_json::Map<String, serde_json::Value> = self
            .entries
            .iter()
            .map(|(&j, &m)| (j.to_string(), serde_json::json!(m)))
            .collect();
        serde_json::json!({ "n": self.n, "multiplicities": mult })
    }
}

/// Decomposes the n-th tensor power of the SO(3) vector representation by
/// the Clebsch-Gordan rule: tensoring with spin 1 sends spin 0 to spin 1 and
/// spin `j >= 1` to `(j-1) + j + (j+1)`. Exact integer arithmetic.
pub fn so3_tensor_multiplicities(n: u32) -> Result<MultiplicityTable> {
    if n > MAX_TENSOR_POWER {
        return Err(Error::InvalidArgument(format!(
            "tensor power {n} exceeds the supported bound {MAX_TENSOR_POWER}"
        )));
    }
    let mut entries: BTreeMap<u32, u64> = BTreeMap::new();
    entries.insert(0, 1);
    for _ in 0..n {
        let mut next: BTreeMap<u32, u64> = BTreeMap::new();
        for (&j, &m) in &entries {
            if j == 0 {
                *next.entry(1).or_insert(0) += m;
            } else {
                *next.entry(j - 1).or_insert(0) += m;
                *next.entry(j).or_insert(0) += m;
                *next.entry(j + 1).or_insert(0) += m;
            }
        }
        entries = next;
    }
    entries.retain(|_, m| *m > 0);
    Ok(MultiplicityTable { n, entries })
}
