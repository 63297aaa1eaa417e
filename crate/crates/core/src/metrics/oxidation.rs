//! Charge-neutrality composition check.
//!
//! Each element takes one oxidation state from the embedded table (all atoms
//! of an element share it); a composition is valid when some choice sums to
//! zero charge. Compositions made only of metals are accepted outright, since
//! alloys need not balance formal charges.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::elements;
use crate::error::{Error, Result};

/// Above this many oxidation-state combinations the checker gives up.
pub const MAX_COMBINATIONS: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CompositionValidity {
    /// A neutral assignment exists; `assignment` maps Z to oxidation state.
    Neutral {
        assignment: BTreeMap<u8, i32>,
    },
    /// Every element is a metal.
    Alloy,
    Invalid,
    /// The search space exceeded [`MAX_COMBINATIONS`].
    Indeterminate {
        combinations: u64,
    },
}

impl CompositionValidity {
    /// Valid in the generation-metric sense; indeterminate counts as invalid.
    pub fn is_valid(&self) -> bool {
        matches!(self, Self::Neutral { .. } | Self::Alloy)
    }

    pub fn assignment(&self) -> Option<&BTreeMap<u8, i32>> {
        match self {
            Self::Neutral { assignment } => Some(assignment),
            _ => None,
        }
    }
}

/// Check whether integer element counts admit a charge-neutral assignment.
pub fn composition_validity(counts: &BTreeMap<u8, usize>) -> Result<CompositionValidity> {
    if counts.is_empty() {
        return Err(Error::InvalidComposition("empty composition".into()));
    }
    let table = elements::table();
    let mut entries = Vec::with_capacity(counts.len());
    for (&z, &n) in counts {
        if n == 0 {
            return Err(Error::InvalidComposition(format!("zero count for Z={z}")));
        }
        let el = table.element(z)?;
        entries.push((z, n as i64, el));
    }
    if entries.iter().all(|(_, _, el)| el.metal) {
        return Ok(CompositionValidity::Alloy);
    }
    let combinations = entries
        .iter()
        .try_fold(1u64, |acc, (_, _, el)| {
            acc.checked_mul(el.oxidation_states.len() as u64)
        })
        .unwrap_or(u64::MAX);
    if combinations == 0 {
        return Ok(CompositionValidity::Invalid);
    }
    if combinations > MAX_COMBINATIONS {
        return Ok(CompositionValidity::Indeterminate { combinations });
    }
    // odometer over one state per element
    let mut idx = vec![0usize; entries.len()];
    loop {
        let charge: i64 = entries
            .iter()
            .zip(&idx)
            .map(|((_, n, el), &k)| n * el.oxidation_states[k] as i64)
            .sum();
        if charge == 0 {
            let assignment = entries
                .iter()
                .zip(&idx)
                .map(|((z, _, el), &k)| (*z, el.oxidation_states[k]))
                .collect();
            return Ok(CompositionValidity::Neutral { assignment });
        }
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return Ok(CompositionValidity::Invalid);
            }
            idx[pos] += 1;
            if idx[pos] < entries[pos].2.oxidation_states.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}
