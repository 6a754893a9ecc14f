//! Index combinatorics of the coordinate strata of a polydisk.
//!
//! The divisor `x_1 ⋯ x_r = 0` in a polydisk of dimension `d` is stratified by
//! the coordinate subspaces `S_A = {x_k = 0 : k ∈ A}` for `A ⊆ {1,…,r}`. All
//! hypercube data is indexed by these subsets. Directions are 1-based in the
//! public API; internally a subset is a bitmask with bit `k - 1` set for `k ∈ A`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest divisor multiplicity accepted; the hypercube has `2^r` nodes.
pub const MAX_MULTIPLICITY: usize = 16;

/// Ambient dimension `d` and divisor multiplicity `r` of the local model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolydiskContext {
    #[serde(rename = "d")]
    ambient_dim: usize,
    #[serde(rename = "r")]
    divisor_multiplicity: usize,
}

impl PolydiskContext {
    pub fn new(ambient_dim: usize, divisor_multiplicity: usize) -> Result<Self> {
        let ctx = Self {
            ambient_dim,
            divisor_multiplicity,
        };
        ctx.check()?;
        Ok(ctx)
    }

    /// Context with `d = r`, the smallest ambient dimension carrying `r` branches.
    pub fn with_multiplicity(r: usize) -> Result<Self> {
        Self::new(r, r)
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.divisor_multiplicity > self.ambient_dim {
            return Err(Error::InvalidContext(format!(
                "divisor multiplicity r = {} exceeds ambient dimension d = {}",
                self.divisor_multiplicity, self.ambient_dim
            )));
        }
        if self.divisor_multiplicity > MAX_MULTIPLICITY {
            return Err(Error::InvalidContext(format!(
                "divisor multiplicity r = {} exceeds the supported maximum {MAX_MULTIPLICITY}",
                self.divisor_multiplicity
            )));
        }
        Ok(())
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn r(&self) -> usize {
        self.divisor_multiplicity
    }

    /// Number of hypercube nodes, `2^r`.
    pub fn node_count(&self) -> usize {
        1usize << self.divisor_multiplicity
    }

    /// The full subset `{1,…,r}`.
    pub fn full(&self) -> StratumIndex {
        StratumIndex::from_mask(((1u64 << self.divisor_multiplicity) - 1) as u32)
    }

    /// Directions `1..=r`.
    pub fn directions(&self) -> impl Iterator<Item = usize> {
        1..=self.divisor_multiplicity
    }

    pub fn contains_stratum(&self, a: StratumIndex) -> bool {
        (a.mask() as u64) < (1u64 << self.divisor_multiplicity)
    }
}

/// A subset `A ⊆ {1,…,r}` labelling the stratum `S_A` (codimension `|A|`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct StratumIndex(u32);

impl StratumIndex {
    pub const EMPTY: StratumIndex = StratumIndex(0);

    pub fn from_mask(mask: u32) -> Self {
        Self(mask)
    }

    /// Builds the subset from 1-based elements; duplicates and zero are rejected.
    pub fn from_elements(elements: &[usize]) -> Result<Self> {
        let mut mask = 0u32;
        for &k in elements {
            if k == 0 || k > MAX_MULTIPLICITY {
                return Err(Error::InvalidStratum(format!("element {k} out of range")));
            }
            let bit = 1u32 << (k - 1);
            if mask & bit != 0 {
                return Err(Error::InvalidStratum(format!("duplicate element {k}")));
            }
            mask |= bit;
        }
        Ok(Self(mask))
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    /// Position of this node in mask-indexed storage.
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn codim(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, k: usize) -> bool {
        k >= 1 && k <= 32 && self.0 & (1 << (k - 1)) != 0
    }

    pub fn without(self, k: usize) -> Self {
        debug_assert!(self.contains(k));
        Self(self.0 & !(1 << (k - 1)))
    }

    pub fn with(self, k: usize) -> Self {
        Self(self.0 | (1 << (k - 1)))
    }

    /// Sorted 1-based elements.
    pub fn elements(self) -> Vec<usize> {
        (0..32)
            .filter(|bit| self.0 & (1 << bit) != 0)
            .map(|bit| bit + 1)
            .collect()
    }

    /// Canonical label, e.g. `[1,3]`.
    pub fn label(self) -> String {
        let parts: Vec<String> = self.elements().iter().map(|k| k.to_string()).collect();
        format!("[{}]", parts.join(","))
    }

    /// Parses a label of the form `[1,3]`; elements must be strictly increasing.
    pub fn parse_label(label: &str) -> Result<Self> {
        let inner = label
            .trim()
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| Error::InvalidStratum(format!("malformed subset label {label:?}")))?;
        let mut elements = Vec::new();
        for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let k: usize = part
                .parse()
                .map_err(|_| Error::InvalidStratum(format!("malformed subset label {label:?}")))?;
            elements.push(k);
        }
        if elements.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidStratum(format!(
                "subset label {label:?} is not strictly increasing"
            )));
        }
        Self::from_elements(&elements)
    }
}

impl fmt::Debug for StratumIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl fmt::Display for StratumIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Cardinality first, then lexicographic on the sorted element lists.
impl Ord for StratumIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.codim()
            .cmp(&other.codim())
            .then_with(|| self.elements().cmp(&other.elements()))
    }
}

impl PartialOrd for StratumIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Serialize for StratumIndex {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.elements().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StratumIndex {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let mut elements = Vec::<usize>::deserialize(deserializer)?;
        elements.sort_unstable();
        StratumIndex::from_elements(&elements).map_err(serde::de::Error::custom)
    }
}

/// All `2^r` strata, sorted by codimension and then lexicographically.
pub fn enumerate_strata(ctx: &PolydiskContext) -> Vec<StratumIndex> {
    let mut all: Vec<StratumIndex> = (0..ctx.node_count() as u32).map(StratumIndex).collect();
    all.sort();
    all
}

/// Strata of the given codimension, in enumeration order.
pub fn strata_of_codim(ctx: &PolydiskContext, codim: usize) -> Vec<StratumIndex> {
    enumerate_strata(ctx)
        .into_iter()
        .filter(|a| a.codim() == codim)
        .collect()
}

fn check_codim(ctx: &PolydiskContext, codim: usize, min: usize) -> Result<()> {
    if codim < min || codim > ctx.r() {
        return Err(Error::CodimOutOfRange {
            codim,
            min,
            max: ctx.r(),
        });
    }
    Ok(())
}

/// The `|A|`-sheeted cover of each codimension-`codim` stratum: pairs `(A, k)` with `k ∈ A`.
pub fn cover_y_star(ctx: &PolydiskContext, codim: usize) -> Result<Vec<(StratumIndex, usize)>> {
    check_codim(ctx, codim, 1)?;
    Ok(strata_of_codim(ctx, codim)
        .into_iter()
        .flat_map(|a| a.elements().into_iter().map(move |k| (a, k)))
        .collect())
}

/// Unordered pairs `{k, ℓ} ⊆ A` (with `k < ℓ`) over every stratum of the given codimension.
pub fn cover_z(ctx: &PolydiskContext, codim: usize) -> Result<Vec<(StratumIndex, (usize, usize))>> {
    check_codim(ctx, codim, 2)?;
    let mut out = Vec::new();
    for a in strata_of_codim(ctx, codim) {
        let elems = a.elements();
        for (i, &k) in elems.iter().enumerate() {
            for &l in &elems[i + 1..] {
                out.push((a, (k, l)));
            }
        }
    }
    Ok(out)
}

/// Double cover of [`cover_z`]: each pair appears with both orderings.
///
/// The flag is `false` for the order `(k, ℓ)` with `k < ℓ` and `true` for the swapped order.
pub fn cover_z_star(ctx: &PolydiskContext, codim: usize) -> Result<Vec<(StratumIndex, (usize, usize), bool)>> {
    Ok(cover_z(ctx, codim)?
        .into_iter()
        .flat_map(|(a, (k, l))| [(a, (k, l), false), (a, (l, k), true)])
        .collect())
}
