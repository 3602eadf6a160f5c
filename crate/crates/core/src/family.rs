//! Ground-set parameters, k-sets, uniform families and the two extremal
//! constructions.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{EmcError, Result};
use crate::subsets::KSubsets;

/// Largest supported ground set; one k-set fits in a `u64`.
pub const MAX_N: u32 = 64;

/// Problem parameters `(n, k, s)`.
///
/// The fixed set `S = {1, …, s-1}` is always derived from `s` and never stored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Params {
    n: u32,
    k: u32,
    s: u32,
}

impl Params {
    pub fn new(n: u32, k: u32, s: u32) -> Result<Self> {
        if n == 0 || n > MAX_N {
            return Err(EmcError::Params(format!("n must lie in 1..={MAX_N}, got {n}")));
        }
        Self::with_ground(n, k, s)
    }

    /// Like [`Params::new`] but permits an empty ground set, which is where
    /// compaction of an empty family lands.
    pub(crate) fn with_ground(n: u32, k: u32, s: u32) -> Result<Self> {
        if n > MAX_N {
            return Err(EmcError::Params(format!("n must be at most {MAX_N}, got {n}")));
        }
        if k == 0 {
            return Err(EmcError::Params("k must be at least 1".into()));
        }
        if s == 0 {
            return Err(EmcError::Params("s must be at least 1".into()));
        }
        Ok(Params { n, k, s })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    /// `n >= s*k`, the range in which the bound is claimed.
    pub fn in_theorem_range(&self) -> bool {
        u64::from(self.n) >= u64::from(self.s) * u64::from(self.k)
    }

    pub fn require_theorem_range(&self) -> Result<()> {
        if self.in_theorem_range() {
            Ok(())
        } else {
            Err(EmcError::Params(format!(
                "need n >= s*k, got n={} s={} k={}",
                self.n, self.s, self.k
            )))
        }
    }

    /// Bit mask of the fixed set `S = {1, …, s-1}`.
    pub fn s_mask(&self) -> u64 {
        low_mask(self.s - 1)
    }

    /// Bit mask of the ground set `[n]`.
    pub fn ground_mask(&self) -> u64 {
        low_mask(self.n)
    }

    /// Elements of `S` in ascending order.
    pub fn fixed_set(&self) -> impl Iterator<Item = u32> {
        1..self.s.min(MAX_N + 1)
    }

    /// All k-subsets of `[n]` in ascending mask order.
    pub fn all_ksets(&self) -> impl Iterator<Item = KSet> {
        KSubsets::new(self.n, self.k).map(KSet)
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(n={}, k={}, s={})", self.n, self.k, self.s)
    }
}

fn low_mask(count: u32) -> u64 {
    if count >= 64 {
        u64::MAX
    } else {
        (1u64 << count) - 1
    }
}

/// A subset of `[64]` stored as a bit vector, element `x` at bit `x - 1`.
///
/// Ordering is the natural integer order of the bit vector.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct KSet(u64);

#[inline]
pub(crate) fn bit(x: u32) -> u64 {
    debug_assert!((1..=MAX_N).contains(&x));
    1u64 << (x - 1)
}

impl KSet {
    pub const EMPTY: KSet = KSet(0);

    pub const fn from_bits(bits: u64) -> Self {
        KSet(bits)
    }

    pub fn from_elements<I: IntoIterator<Item = u32>>(elements: I) -> Result<Self> {
        let mut bits = 0u64;
        for x in elements {
            if x == 0 || x > MAX_N {
                return Err(EmcError::Input(format!("element {x} outside 1..={MAX_N}")));
            }
            if bits & bit(x) != 0 {
                return Err(EmcError::Input(format!("element {x} repeated in a set")));
            }
            bits |= bit(x);
        }
        Ok(KSet(bits))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, x: u32) -> bool {
        (1..=MAX_N).contains(&x) && self.0 & bit(x) != 0
    }

    pub fn is_disjoint(self, other: KSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn meets_mask(self, mask: u64) -> bool {
        self.0 & mask != 0
    }

    pub fn intersection(self, other: KSet) -> KSet {
        KSet(self.0 & other.0)
    }

    pub fn difference(self, other: KSet) -> KSet {
        KSet(self.0 & !other.0)
    }

    /// `(self \ {out}) ∪ {incoming}`.
    pub fn replace(self, out: u32, incoming: u32) -> KSet {
        KSet((self.0 & !bit(out)) | bit(incoming))
    }

    /// Largest element, or 0 for the empty set.
    pub fn max_element(self) -> u32 {
        64 - self.0.leading_zeros()
    }

    pub fn elements(self) -> Elements {
        Elements(self.0)
    }
}

/// Ascending iterator over the elements of a [`KSet`].
#[derive(Clone, Debug)]
pub struct Elements(u64);

impl Iterator for Elements {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        if self.0 == 0 {
            return None;
        }
        let x = self.0.trailing_zeros() + 1;
        self.0 &= self.0 - 1;
        Some(x)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let c = self.0.count_ones() as usize;
        (c, Some(c))
    }
}

impl ExactSizeIterator for Elements {}

impl TryFrom<Vec<u32>> for KSet {
    type Error = EmcError;

    fn try_from(v: Vec<u32>) -> Result<Self> {
        KSet::from_elements(v)
    }
}

impl From<KSet> for Vec<u32> {
    fn from(s: KSet) -> Self {
        s.elements().collect()
    }
}

impl fmt::Display for KSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (idx, x) in self.elements().enumerate() {
            if idx > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for KSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A duplicate-free k-uniform family on `[n]`, kept sorted by mask value.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SetFamily {
    params: Params,
    sets: Vec<KSet>,
}

impl SetFamily {
    /// Builds a family, rejecting duplicates, wrong sizes and out-of-range
    /// elements.
    pub fn new<I: IntoIterator<Item = KSet>>(params: Params, sets: I) -> Result<Self> {
        let ground = params.ground_mask();
        let mut sets: Vec<KSet> = sets.into_iter().collect();
        for set in &sets {
            if set.len() != params.k {
                return Err(EmcError::Input(format!(
                    "set {set} has {} elements, expected k={}",
                    set.len(),
                    params.k
                )));
            }
            if set.0 & !ground != 0 {
                return Err(EmcError::Input(format!(
                    "set {set} has elements outside [{}]",
                    params.n
                )));
            }
        }
        sets.sort_unstable();
        if let Some(w) = sets.windows(2).find(|w| w[0] == w[1]) {
            return Err(EmcError::DuplicateSet(w[0]));
        }
        Ok(SetFamily { params, sets })
    }

    /// Convenience constructor from element lists.
    pub fn from_lists(params: Params, lists: &[&[u32]]) -> Result<Self> {
        let sets = lists
            .iter()
            .map(|l| KSet::from_elements(l.iter().copied()))
            .collect::<Result<Vec<_>>>()?;
        SetFamily::new(params, sets)
    }

    pub fn empty(params: Params) -> Self {
        SetFamily { params, sets: Vec::new() }
    }

    /// Caller guarantees `sets` is sorted, duplicate-free and uniform.
    pub(crate) fn from_sorted_unchecked(params: Params, sets: Vec<KSet>) -> Self {
        debug_assert!(sets.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(sets.iter().all(|s| s.len() == params.k));
        SetFamily { params, sets }
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn sets(&self) -> &[KSet] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn contains(&self, set: KSet) -> bool {
        self.sets.binary_search(&set).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = KSet> + '_ {
        self.sets.iter().copied()
    }

    pub(crate) fn masks(&self) -> Vec<u64> {
        self.sets.iter().map(|s| s.0).collect()
    }

    /// Union of all members.
    pub fn support(&self) -> u64 {
        self.sets.iter().fold(0, |acc, s| acc | s.0)
    }

    /// `|F^x|`, the number of members containing `x`.
    pub fn degree(&self, x: u32) -> usize {
        if !(1..=MAX_N).contains(&x) {
            return 0;
        }
        self.sets.iter().filter(|s| s.0 & bit(x) != 0).count()
    }
}

impl fmt::Debug for SetFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ", self.params)?;
        f.debug_list().entries(self.sets.iter()).finish()
    }
}

impl<'a> IntoIterator for &'a SetFamily {
    type Item = &'a KSet;
    type IntoIter = std::slice::Iter<'a, KSet>;

    fn into_iter(self) -> Self::IntoIter {
        self.sets.iter()
    }
}

/// Exact binomial coefficient `C(a, b)`; 0 when `b > a`.
pub fn binomial(a: u64, b: u64) -> Result<u64> {
    if b > a {
        return Ok(0);
    }
    let b = b.min(a - b);
    let mut acc: u128 = 1;
    for step in 0..b {
        // acc * (a - step) is divisible by (step + 1) at every step.
        acc = acc
            .checked_mul(u128::from(a - step))
            .ok_or_else(|| EmcError::Overflow(format!("C({a},{b})")))?
            / u128::from(step + 1);
    }
    u64::try_from(acc).map_err(|_| EmcError::Overflow(format!("C({a},{b})")))
}

/// `C(s*k - 1, k)`, the size of the clique construction.
pub fn clique_size(p: Params) -> Result<u64> {
    let ground = u64::from(p.s) * u64::from(p.k) - 1;
    binomial(ground, u64::from(p.k))
}

/// `C(n, k) - C(n - s + 1, k)`, the size of the star construction.
pub fn star_size(p: Params) -> Result<u64> {
    let n = u64::from(p.n);
    let k = u64::from(p.k);
    let rest = (n + 1).saturating_sub(u64::from(p.s));
    Ok(binomial(n, k)? - binomial(rest, k)?)
}

/// `max{C(sk-1, k), C(n, k) - C(n-s+1, k)}`; requires `n >= s*k`.
pub fn emc_bound(p: Params) -> Result<u64> {
    p.require_theorem_range()?;
    Ok(clique_size(p)?.max(star_size(p)?))
}

/// All k-sets meeting `S`.
pub fn make_f_star(p: Params) -> Result<SetFamily> {
    p.require_theorem_range()?;
    let mask = p.s_mask();
    let sets = p.all_ksets().filter(|s| s.meets_mask(mask)).collect();
    Ok(SetFamily::from_sorted_unchecked(p, sets))
}

/// All k-sets inside `{1, …, s*k - 1}`.
pub fn make_g_star(p: Params) -> Result<SetFamily> {
    let ground = u64::from(p.s) * u64::from(p.k) - 1;
    if ground > u64::from(p.n) {
        return Err(EmcError::Params(format!(
            "need s*k - 1 <= n, got s*k - 1 = {ground} and n = {}",
            p.n
        )));
    }
    let sets = KSubsets::new(ground as u32, p.k).map(KSet).collect();
    Ok(SetFamily::from_sorted_unchecked(p, sets))
}

/// Elements of `[n]` lying in no member.
pub fn uncovered_elements(f: &SetFamily) -> Vec<u32> {
    let missing = f.params.ground_mask() & !f.support();
    KSet(missing).elements().collect()
}

/// A family is trivial when some ground element is uncovered.
pub fn is_trivial(f: &SetFamily) -> bool {
    f.params.ground_mask() & !f.support() != 0
}

/// `Φ(f)`: number of members meeting `S`.
pub fn potential(f: &SetFamily) -> usize {
    let mask = f.params.s_mask();
    f.sets.iter().filter(|s| s.meets_mask(mask)).count()
}

/// `F^x`: members containing `x`.
pub fn subfamily_containing(f: &SetFamily, x: u32) -> Result<SetFamily> {
    if x == 0 || x > f.params.n {
        return Err(EmcError::Params(format!("element {x} outside [{}]", f.params.n)));
    }
    let sets = f.sets.iter().copied().filter(|s| s.contains(x)).collect();
    Ok(SetFamily::from_sorted_unchecked(f.params, sets))
}

/// Result of dropping uncovered elements and relabelling onto `[new_n]`.
#[derive(Clone, Debug, Serialize)]
pub struct CompactionResult {
    pub family: SetFamily,
    pub removed: Vec<u32>,
    pub new_n: u32,
    /// `(old, new)` pairs for every covered element, ascending in both.
    pub relabel_map: Vec<(u32, u32)>,
    /// Labels in `S` that were handed to elements outside the old `S`
    /// because some element of `S` was uncovered.
    pub s_slots_refilled: Vec<u32>,
    /// Labels in `S` with no element at all (fewer than `s - 1` covered elements).
    pub s_slots_unfilled: Vec<u32>,
}

impl CompactionResult {
    pub fn is_identity(&self) -> bool {
        self.removed.is_empty()
    }

    /// Whether the relabelling changed which elements play the role of `S`.
    pub fn moved_fixed_set(&self) -> bool {
        !self.s_slots_refilled.is_empty() || !self.s_slots_unfilled.is_empty()
    }
}

/// Removes all uncovered elements and relabels the rest onto `[new_n]`.
///
/// Covered elements of `S` take the slots `1, 2, …` in ascending order, then
/// any remaining slots of `S` go to the smallest covered elements outside `S`,
/// then everything else follows in order. Because every element of `S` is
/// smaller than every element outside it, this is the order-preserving rank
/// map on covered elements.
pub fn compact_ground(f: &SetFamily) -> Result<CompactionResult> {
    let p = f.params;
    let support = f.support();
    let removed = uncovered_elements(f);
    let survivors: Vec<u32> = KSet(support).elements().collect();
    let new_n = survivors.len() as u32;
    let new_params = Params::with_ground(new_n, p.k, p.s)?;

    if removed.is_empty() {
        let relabel_map = survivors.iter().map(|&x| (x, x)).collect();
        return Ok(CompactionResult {
            family: f.clone(),
            removed,
            new_n,
            relabel_map,
            s_slots_refilled: Vec::new(),
            s_slots_unfilled: Vec::new(),
        });
    }

    let mut table = [0u32; MAX_N as usize + 1];
    let mut relabel_map = Vec::with_capacity(survivors.len());
    for (rank, &old) in survivors.iter().enumerate() {
        let new = rank as u32 + 1;
        table[old as usize] = new;
        relabel_map.push((old, new));
    }

    let s_len = p.s - 1;
    let s_slots_refilled = relabel_map
        .iter()
        .filter(|&&(old, new)| new <= s_len && old > s_len)
        .map(|&(_, new)| new)
        .collect();
    let s_slots_unfilled = (new_n + 1..=s_len).collect();

    let sets = f
        .sets
        .iter()
        .map(|s| KSet(s.elements().fold(0u64, |acc, x| acc | bit(table[x as usize]))))
        .collect::<Vec<_>>();
    Ok(CompactionResult {
        family: SetFamily::new(new_params, sets)?,
        removed,
        new_n,
        relabel_map,
        s_slots_refilled,
        s_slots_unfilled,
    })
}
