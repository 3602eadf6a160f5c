//! Exact values of `f(n, k, s)` by two unrelated exhaustive searches, the
//! random family generator used for fuzzing, and a table of known values.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{EmcError, Result};
use crate::family::{binomial, KSet, Params, SetFamily};
use crate::matching::find_matching_of_size;

/// Default node budget for either search.
pub const DEFAULT_BUDGET: u64 = 200_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    /// Branch and bound over which k-sets to keep.
    Direct,
    /// `C(n,k)` minus a minimum transversal of all `s`-matchings.
    Covering,
}

impl std::fmt::Display for OracleMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OracleMethod::Direct => "direct",
            OracleMethod::Covering => "covering",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleResult {
    pub params: Params,
    pub value: u64,
    pub witness: SetFamily,
    pub method: OracleMethod,
    pub nodes: u64,
}

struct Budget {
    used: u64,
    limit: u64,
}

impl Budget {
    fn tick(&mut self) -> bool {
        self.used += 1;
        self.used <= self.limit
    }
}

struct DirectSearch<'a> {
    all: &'a [u64],
    s: usize,
    best: Vec<usize>,
    budget: Budget,
}

impl DirectSearch<'_> {
    /// `chosen` is s-matching-free; `open` holds indices (ascending, all past the
    /// last decision) whose addition keeps it so.
    fn go(&mut self, chosen: &mut Vec<usize>, open: &[usize]) -> bool {
        if !self.budget.tick() {
            return false;
        }
        if chosen.len() > self.best.len() {
            self.best.clone_from(chosen);
        }
        let Some((&next, rest)) = open.split_first() else {
            return true;
        };
        if chosen.len() + open.len() <= self.best.len() {
            return true;
        }

        // Include `next`: a remaining candidate now conflicts only through an
        // s-matching that uses `next`.
        let chosen_masks: Vec<u64> = chosen.iter().map(|&i| self.all[i]).collect();
        let with = self.all[next];
        let still_open: Vec<usize> = rest
            .iter()
            .copied()
            .filter(|&c| {
                let cand = self.all[c];
                cand & with != 0
                    || find_matching_of_size(&chosen_masks, self.s - 2, cand | with).is_none()
            })
            .collect();
        chosen.push(next);
        let ok = self.go(chosen, &still_open);
        chosen.pop();
        if !ok {
            return false;
        }

        self.go(chosen, rest)
    }
}

/// `f(n, k, s)` by branch and bound over inclusion of each k-set, pruning any
/// partial family that cannot beat the incumbent.
pub fn f_direct(p: Params, budget: u64) -> Result<OracleResult> {
    let all: Vec<u64> = p.all_ksets().map(KSet::bits).collect();
    let s = p.s() as usize;
    // With s = 1 every single set is already a forbidden matching.
    let open: Vec<usize> = if s == 1 { Vec::new() } else { (0..all.len()).collect() };
    let mut search = DirectSearch {
        all: &all,
        s,
        best: Vec::new(),
        budget: Budget { used: 0, limit: budget },
    };
    if !search.go(&mut Vec::new(), &open) {
        return Err(EmcError::Inconclusive { method: "direct", nodes: search.budget.used });
    }
    let witness = SetFamily::new(p, search.best.iter().map(|&i| KSet::from_bits(all[i])))?;
    Ok(OracleResult {
        params: p,
        value: witness.len() as u64,
        witness,
        method: OracleMethod::Direct,
        nodes: search.budget.used,
    })
}

/// Every `s`-matching among `all`, as a bit set over indices of `all`.
fn all_s_matchings(all: &[u64], s: usize) -> Vec<u128> {
    fn go(all: &[u64], start: usize, used: u64, need: usize, acc: u128, out: &mut Vec<u128>) {
        if need == 0 {
            out.push(acc);
            return;
        }
        for idx in start..all.len() {
            if all[idx] & used == 0 {
                go(all, idx + 1, used | all[idx], need - 1, acc | (1u128 << idx), out);
            }
        }
    }
    let mut out = Vec::new();
    go(all, 0, 0, s, 0, &mut out);
    out
}

struct CoverSearch<'a> {
    edges: &'a [u128],
    best: u128,
    best_len: u32,
    budget: Budget,
}

impl CoverSearch<'_> {
    /// `taken` hits some edges; `banned` k-sets may not be taken.
    fn go(&mut self, taken: u128, banned: u128) -> bool {
        if !self.budget.tick() {
            return false;
        }
        let depth = taken.count_ones();
        // Unhit edges restricted to allowed k-sets; greedy disjoint packing
        // gives a lower bound on what is still needed.
        let mut branch: Option<u128> = None;
        let mut packed = 0u128;
        let mut lower = 0u32;
        for &edge in self.edges {
            if edge & taken != 0 {
                continue;
            }
            let allowed = edge & !banned;
            if allowed == 0 {
                return true;
            }
            if branch.is_none_or(|b| allowed.count_ones() < b.count_ones()) {
                branch = Some(allowed);
            }
            if allowed & packed == 0 {
                packed |= allowed;
                lower += 1;
            }
        }
        let Some(mut choices) = branch else {
            if depth < self.best_len {
                self.best = taken;
                self.best_len = depth;
            }
            return true;
        };
        if depth + lower >= self.best_len {
            return true;
        }
        let mut banned = banned;
        while choices != 0 {
            let pick = choices & choices.wrapping_neg();
            choices &= choices - 1;
            if !self.go(taken | pick, banned) {
                return false;
            }
            banned |= pick;
        }
        true
    }
}

/// `f(n, k, s) = C(n, k) - τ`, with `τ` the minimum number of k-sets meeting
/// every `s`-matching. Needs `C(n, k) <= 128`.
pub fn f_covering(p: Params, budget: u64) -> Result<OracleResult> {
    let all: Vec<u64> = p.all_ksets().map(KSet::bits).collect();
    if all.len() > 128 {
        return Err(EmcError::Params(format!(
            "covering search needs C(n, k) <= 128, got {}",
            all.len()
        )));
    }
    let s = p.s() as usize;
    let edges = all_s_matchings(&all, s);
    let everything = if all.len() == 128 { u128::MAX } else { (1u128 << all.len()) - 1 };
    let mut search = CoverSearch {
        edges: &edges,
        best: everything,
        best_len: all.len() as u32 + 1,
        budget: Budget { used: 0, limit: budget },
    };
    if !search.go(0, 0) {
        return Err(EmcError::Inconclusive { method: "covering", nodes: search.budget.used });
    }
    let kept = everything & !search.best;
    let witness = SetFamily::new(
        p,
        (0..all.len()).filter(|i| kept >> i & 1 == 1).map(|i| KSet::from_bits(all[i])),
    )?;
    Ok(OracleResult {
        params: p,
        value: witness.len() as u64,
        witness,
        method: OracleMethod::Covering,
        nodes: search.budget.used,
    })
}

/// Greedy random `s`-matching-free family: shuffle all k-sets with a ChaCha8
/// stream seeded by `seed`, keep each one that does not complete an
/// `s`-matching, stop at `target_size`.
pub fn random_matching_free_family(p: Params, seed: u64, target_size: usize) -> SetFamily {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_matching_free_with(p, &mut rng, target_size)
}

pub(crate) fn random_matching_free_with(p: Params, rng: &mut ChaCha8Rng, target_size: usize) -> SetFamily {
    let mut pool: Vec<u64> = p.all_ksets().map(KSet::bits).collect();
    pool.shuffle(rng);
    let need = p.s() as usize - 1;
    let mut kept: Vec<u64> = Vec::new();
    for cand in pool {
        if kept.len() >= target_size {
            break;
        }
        if find_matching_of_size(&kept, need, cand).is_none() {
            kept.push(cand);
        }
    }
    SetFamily::new(p, kept.into_iter().map(KSet::from_bits)).expect("distinct uniform k-sets")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KnownSource {
    /// `s = 2`, `n >= 2k`: `C(n-1, k-1)`.
    ErdosKoRado,
    /// `n = s*k`: `C(sk-1, k)`.
    Kleitman,
    /// `k = 1`: `min(n, s-1)`.
    Singletons,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct KnownValue {
    pub params: Params,
    pub value: u64,
    pub source: KnownSource,
}

/// Classical values for small parameters.
pub fn known_values() -> Vec<KnownValue> {
    let mut out = Vec::new();
    let mut push = |n: u32, k: u32, s: u32, value: u64, source| {
        out.push(KnownValue { params: Params::new(n, k, s).unwrap(), value, source });
    };
    for k in 1..=3u32 {
        for n in 2 * k..=9 {
            let v = binomial(u64::from(n - 1), u64::from(k - 1)).unwrap();
            push(n, k, 2, v, KnownSource::ErdosKoRado);
        }
    }
    for (k, s) in [(2u32, 3u32), (2, 4), (3, 3), (4, 2)] {
        let v = binomial(u64::from(s * k - 1), u64::from(k)).unwrap();
        push(s * k, k, s, v, KnownSource::Kleitman);
    }
    for n in 1..=8u32 {
        for s in 1..=n {
            push(n, 1, s, u64::from(s - 1), KnownSource::Singletons);
        }
    }
    out
}

/// `(s-1) * C(n-1, k-1)`, a general upper bound used as a sanity check.
pub fn frankl_upper_bound(p: Params) -> Result<u64> {
    let base = binomial(u64::from(p.n()) - 1, u64::from(p.k()) - 1)?;
    base.checked_mul(u64::from(p.s()) - 1)
        .ok_or_else(|| EmcError::Overflow("(s-1)*C(n-1,k-1)".into()))
}
