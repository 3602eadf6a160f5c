//! Exact matching numbers, matching certificates, and the pullback of a
//! matching through a shift.

use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use serde_json::json;

use crate::error::{Claim, EmcError, Result};
use crate::family::{KSet, SetFamily};
use crate::shifting::{shift_family, ShiftStep};

/// Pairwise disjoint members of some family.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MatchingCertificate {
    sets: Vec<KSet>,
}

impl MatchingCertificate {
    /// Validates that `sets` are pairwise disjoint members of `family`.
    pub fn new(family: &SetFamily, sets: Vec<KSet>) -> Result<Self> {
        let cert = Self::disjoint(sets)?;
        if let Some(stray) = cert.sets.iter().find(|s| !family.contains(**s)) {
            return Err(EmcError::Input(format!("certificate set {stray} is not in the family")));
        }
        Ok(cert)
    }

    /// Checks disjointness only. Members are stored in ascending order.
    pub fn disjoint(mut sets: Vec<KSet>) -> Result<Self> {
        sets.sort_unstable();
        let mut used = 0u64;
        for s in &sets {
            if s.bits() & used != 0 {
                return Err(EmcError::Input(format!("certificate set {s} overlaps an earlier member")));
            }
            used |= s.bits();
        }
        Ok(MatchingCertificate { sets })
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

    /// Whether every member lies in `family`.
    pub fn is_within(&self, family: &SetFamily) -> bool {
        self.sets.iter().all(|s| family.contains(*s))
    }
}

impl fmt::Display for MatchingCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.sets.iter()).finish()
    }
}

impl fmt::Debug for MatchingCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for MatchingCertificate {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("MatchingCertificate", 2)?;
        st.serialize_field("size", &self.sets.len())?;
        st.serialize_field("sets", &self.sets)?;
        st.end()
    }
}

/// Depth-first branch and bound over include/exclude decisions, include first.
struct MaxSearch<'a> {
    sets: &'a [u64],
    ground: u64,
    k: u32,
    cap: usize,
    best: usize,
    best_pick: Vec<usize>,
    pick: Vec<usize>,
}

impl MaxSearch<'_> {
    fn go(&mut self, idx: usize, used: u64) {
        let depth = self.pick.len();
        if depth > self.best {
            self.best = depth;
            self.best_pick.clone_from(&self.pick);
        }
        if self.best >= self.cap || idx == self.sets.len() {
            return;
        }
        let by_count = self.sets.len() - idx;
        let by_room = ((self.ground & !used).count_ones() / self.k) as usize;
        if depth + by_count.min(by_room) <= self.best {
            return;
        }
        let set = self.sets[idx];
        if set & used == 0 {
            self.pick.push(idx);
            self.go(idx + 1, used | set);
            self.pick.pop();
        }
        self.go(idx + 1, used);
    }
}

/// Indices of a maximum matching among `sets` (all of size `k` in `ground`).
pub(crate) fn max_matching_indices(sets: &[u64], ground: u64, k: u32) -> Vec<usize> {
    let cap = (ground.count_ones() / k) as usize;
    let mut search = MaxSearch {
        sets,
        ground,
        k,
        cap,
        best: 0,
        best_pick: Vec::new(),
        pick: Vec::new(),
    };
    search.go(0, 0);
    search.best_pick
}

/// Indices of `size` pairwise disjoint sets that also avoid `avoid`, if any.
pub(crate) fn find_matching_of_size(sets: &[u64], size: usize, avoid: u64) -> Option<Vec<usize>> {
    fn go(sets: &[u64], idx: usize, used: u64, need: usize, pick: &mut Vec<usize>) -> bool {
        if need == 0 {
            return true;
        }
        if sets.len() - idx < need {
            return false;
        }
        for next in idx..=sets.len() - need {
            let set = sets[next];
            if set & used == 0 {
                pick.push(next);
                if go(sets, next + 1, used | set, need - 1, pick) {
                    return true;
                }
                pick.pop();
            }
        }
        false
    }
    let mut pick = Vec::with_capacity(size);
    go(sets, 0, avoid, size, &mut pick).then_some(pick)
}

/// `ν(f)`, computed exactly.
pub fn matching_number(f: &SetFamily) -> usize {
    max_matching(f).len()
}

/// A maximum matching; ties go to the lexicographically least index sequence.
pub fn max_matching(f: &SetFamily) -> MatchingCertificate {
    let p = f.params();
    let masks = f.masks();
    let picked = max_matching_indices(&masks, p.ground_mask(), p.k());
    MatchingCertificate {
        sets: picked.into_iter().map(|i| f.sets()[i]).collect(),
    }
}

/// Some matching of exactly `size` members, if one exists.
pub fn find_matching(f: &SetFamily, size: usize) -> Option<MatchingCertificate> {
    let masks = f.masks();
    find_matching_of_size(&masks, size, 0).map(|idx| MatchingCertificate {
        sets: idx.into_iter().map(|i| f.sets()[i]).collect(),
    })
}

/// Whether `f` contains `s` pairwise disjoint members, `s` taken from the
/// family's parameters. Stops at the first `s`-matching found.
pub fn has_s_matching(f: &SetFamily) -> bool {
    s_matching(f).is_some()
}

/// An `s`-matching inside `f`, if one exists.
pub fn s_matching(f: &SetFamily) -> Option<MatchingCertificate> {
    find_matching(f, f.params().s() as usize)
}

/// All-subsets matching number, for families of at most 20 members.
///
/// Walks every subset of the family once, extending the union of each subset
/// from the subset without its lowest member. Returns `None` above 20 members.
pub fn naive_matching_number(f: &SetFamily) -> Option<usize> {
    const NAIVE_LIMIT: usize = 20;
    let m = f.len();
    if m > NAIVE_LIMIT {
        return None;
    }
    let masks = f.masks();
    let mut union = vec![0u64; 1 << m];
    let mut valid = vec![false; 1 << m];
    valid[0] = true;
    let mut best = 0;
    for subset in 1usize..(1 << m) {
        let low = subset.trailing_zeros() as usize;
        let rest = subset & (subset - 1);
        if valid[rest] && union[rest] & masks[low] == 0 {
            valid[subset] = true;
            union[subset] = union[rest] | masks[low];
            best = best.max(subset.count_ones() as usize);
        }
    }
    Some(best)
}

/// Turns a matching of `shift_family(f, step)` into a matching of `f` of the
/// same size.
///
/// If no member of `m_prime` was moved by the shift it is returned as is.
/// Otherwise the unique moved member `B₁` is swapped for its preimage `A₁`;
/// if `A₁` then collides with the unique other member `B₂ ∋ j`, `B₂` is swapped
/// for `(B₂ \ {j}) ∪ {i}`, which must already lie in `f` since `B₂` was not
/// moved.
pub fn pullback_matching(
    f: &SetFamily,
    step: ShiftStep,
    m_prime: &MatchingCertificate,
) -> Result<MatchingCertificate> {
    let shifted = shift_family(f, step);
    if !m_prime.is_within(&shifted) {
        return Err(EmcError::Input(format!(
            "{m_prime} is not a matching in the shifted family"
        )));
    }
    let (i, j) = (step.incoming(), step.outgoing());

    let altered: Vec<usize> = m_prime
        .sets
        .iter()
        .enumerate()
        .filter(|(_, b)| b.contains(i) && !b.contains(j) && !f.contains(**b) && f.contains(b.replace(i, j)))
        .map(|(idx, _)| idx)
        .collect();

    let evidence = || {
        json!({
            "family": f,
            "step": step,
            "m_prime": m_prime,
            "shifted": shifted,
        })
    };

    // Every member outside `f` has to be an image of a moved set.
    if let Some(stray) = m_prime
        .sets
        .iter()
        .enumerate()
        .find(|(idx, b)| !f.contains(**b) && !altered.contains(idx))
    {
        return Err(EmcError::violation(
            Claim::ShiftPreservesFamilySize,
            format!("{} lies in the shifted family but has no preimage", stray.1),
            evidence(),
        ));
    }

    let result = match altered.as_slice() {
        [] => m_prime.sets.clone(),
        [moved] => {
            let moved = *moved;
            let preimage = m_prime.sets[moved].replace(i, j);
            let others: Vec<KSet> = m_prime
                .sets
                .iter()
                .enumerate()
                .filter(|(idx, _)| *idx != moved)
                .map(|(_, s)| *s)
                .collect();
            let clashing: Vec<usize> = others
                .iter()
                .enumerate()
                .filter(|(_, s)| !s.is_disjoint(preimage))
                .map(|(idx, _)| idx)
                .collect();
            match clashing.as_slice() {
                [] => std::iter::once(preimage).chain(others).collect(),
                [clash] => {
                    let blocked = others[*clash];
                    let swap = blocked.replace(j, i);
                    if !blocked.contains(j) || !f.contains(swap) {
                        return Err(EmcError::violation(
                            Claim::PullbackReplacementPresent,
                            format!("{blocked} meets the preimage {preimage} but {swap} is not in the family"),
                            evidence(),
                        ));
                    }
                    let mut sets = others;
                    sets[*clash] = swap;
                    sets.push(preimage);
                    sets
                }
                _ => {
                    return Err(EmcError::violation(
                        Claim::PullbackValid,
                        format!("preimage {preimage} meets {} members of the matching", clashing.len()),
                        evidence(),
                    ))
                }
            }
        }
        _ => {
            return Err(EmcError::violation(
                Claim::PullbackAtMostOneAltered,
                format!("{} members of the matching were moved by the shift", altered.len()),
                evidence(),
            ))
        }
    };

    MatchingCertificate::new(f, result).map_err(|e| {
        EmcError::violation(Claim::PullbackValid, e.to_string(), evidence())
    })
}
