//! The potential-function shifting procedure.
//!
//! Each iteration picks a member `A` avoiding the fixed set `S`, a non-member
//! `B` meeting it, builds a chain of single-element swaps from `A` towards `B`
//! that stops at the first target missing from the family, and applies the
//! corresponding shifts in reverse order. Every statement the progress
//! argument relies on is re-checked on the concrete families; a failure is
//! reported as [`EmcError::ClaimViolation`] with the full iteration trace.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Claim, EmcError, Result, Violation};
use crate::fault::Fault;
use crate::family::{
    binomial, clique_size, compact_ground, emc_bound, potential, star_size, CompactionResult, KSet,
    Params, SetFamily,
};
use crate::matching::{find_matching, matching_number, s_matching, MatchingCertificate};
use crate::shifting::{apply_shift_sequence, ShiftSequence, ShiftStep};

pub const SCHEMA_VERSION: u32 = 1;

/// How "pick any" choices are resolved.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChoiceRule {
    /// Least element / least bit vector everywhere.
    #[default]
    Least,
    /// Uniform choices drawn from a ChaCha8 stream with this seed.
    Seeded(u64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AlgorithmConfig {
    /// Recompute exact matching numbers on every iteration.
    pub paranoid: bool,
    pub choices: ChoiceRule,
    pub fault: Fault,
}

impl AlgorithmConfig {
    pub fn paranoid() -> Self {
        AlgorithmConfig { paranoid: true, ..Default::default() }
    }
}

struct Chooser(Option<ChaCha8Rng>);

impl Chooser {
    fn new(rule: ChoiceRule) -> Self {
        match rule {
            ChoiceRule::Least => Chooser(None),
            ChoiceRule::Seeded(seed) => Chooser(Some(ChaCha8Rng::seed_from_u64(seed))),
        }
    }

    /// First item in least mode, a uniform item otherwise.
    fn pick<T: Copy>(&mut self, items: &[T]) -> Option<T> {
        match &mut self.0 {
            None => items.first().copied(),
            Some(rng) => items.choose(rng).copied(),
        }
    }

    fn shuffle<T>(&mut self, items: &mut [T]) {
        if let Some(rng) = &mut self.0 {
            items.shuffle(rng);
        }
    }
}

fn a_candidates(f: &SetFamily) -> Vec<KSet> {
    let mask = f.params().s_mask();
    f.iter().filter(|s| !s.meets_mask(mask)).collect()
}

fn b_candidates(f: &SetFamily) -> impl Iterator<Item = KSet> + '_ {
    let mask = f.params().s_mask();
    f.params().all_ksets().filter(move |s| s.meets_mask(mask) && !f.contains(*s))
}

/// Least member disjoint from `S`; `None` when every member meets `S`.
pub fn find_a(f: &SetFamily) -> Option<KSet> {
    a_candidates(f).first().copied()
}

/// Least k-set over the current ground set that meets `S` and is missing
/// from `f`.
pub fn find_b(f: &SetFamily) -> Option<KSet> {
    b_candidates(f).next()
}

fn choose_a(f: &SetFamily, chooser: &mut Chooser) -> Option<KSet> {
    chooser.pick(&a_candidates(f))
}

fn choose_b(f: &SetFamily, chooser: &mut Chooser) -> Option<KSet> {
    if chooser.0.is_none() {
        return find_b(f);
    }
    let all: Vec<KSet> = b_candidates(f).collect();
    chooser.pick(&all)
}

/// The set pair chosen for one iteration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairSelection {
    /// `A`: a member avoiding `S`.
    pub source: KSet,
    /// `B`: a non-member meeting `S`.
    pub target: KSet,
    /// `A ∩ B`.
    pub common: KSet,
    /// `A \ B` in scan order.
    pub source_only: Vec<u32>,
    /// `B \ A` in scan order; the first entry (the pivot) lies in `S`.
    pub target_only: Vec<u32>,
    pub width: usize,
}

impl PairSelection {
    /// The pivot `b₁ ∈ S`, which gains degree in a successful iteration.
    pub fn pivot(&self) -> u32 {
        self.target_only[0]
    }
}

/// Splits `(a, b)` into common part and ordered differences, with the least
/// element of `(B \ A) ∩ S` first and everything else ascending.
pub fn select_pair(f: &SetFamily, a: KSet, b: KSet) -> Result<PairSelection> {
    select_pair_with(f, a, b, &mut Chooser(None))
}

fn select_pair_with(f: &SetFamily, a: KSet, b: KSet, chooser: &mut Chooser) -> Result<PairSelection> {
    let mask = f.params().s_mask();
    if !f.contains(a) {
        return Err(EmcError::Input(format!("{a} is not a member")));
    }
    if f.contains(b) {
        return Err(EmcError::Input(format!("{b} is already a member")));
    }
    if a.meets_mask(mask) {
        return Err(EmcError::Input(format!("{a} meets the fixed set")));
    }
    if !b.meets_mask(mask) || b.len() != a.len() {
        return Err(EmcError::Input(format!("{b} must be a k-set meeting the fixed set")));
    }
    let common = a.intersection(b);
    let mut source_only: Vec<u32> = a.difference(b).elements().collect();
    let rest = b.difference(a);
    let in_s: Vec<u32> = rest.elements().filter(|x| KSet::from_bits(mask).contains(*x)).collect();
    let pivot = chooser.pick(&in_s).expect("b meets S outside a");
    let mut others: Vec<u32> = rest.elements().filter(|&x| x != pivot).collect();
    chooser.shuffle(&mut source_only);
    chooser.shuffle(&mut others);
    let mut target_only = vec![pivot];
    target_only.extend(others);
    Ok(PairSelection {
        source: a,
        target: b,
        common,
        width: source_only.len(),
        source_only,
        target_only,
    })
}

/// The chain `A₁ → B₁ = A₂ → … → B_t` and its shift sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainResult {
    /// `A₁, …, A_t`.
    pub sources: Vec<KSet>,
    /// `B₁, …, B_t`.
    pub targets: Vec<KSet>,
    /// Position `p` holds `(I(p), J(p))`.
    pub seq: ShiftSequence,
    pub t: usize,
}

/// Builds the chain with least-element choices.
pub fn build_chain(f: &SetFamily, pair: &PairSelection) -> Result<ChainResult> {
    build_chain_with(f, pair, &mut Chooser(None), Fault::None)
}

fn build_chain_with(
    f: &SetFamily,
    pair: &PairSelection,
    chooser: &mut Chooser,
    fault: Fault,
) -> Result<ChainResult> {
    let n = f.params().n();
    let r = pair.width;
    let mut sources = Vec::with_capacity(r);
    let mut targets = Vec::with_capacity(r);
    let mut steps = Vec::with_capacity(r);
    let mut free_out = pair.source_only.clone();
    let mut free_in = pair.target_only.clone();

    let mut current = pair.source;
    for stage in 1..=r {
        sources.push(current);
        // Stage 1 fixes the incoming element to the pivot.
        let incoming: &[u32] = if stage == 1 { &free_in[..1] } else { &free_in };
        let candidates: Vec<(u32, u32)> = free_out
            .iter()
            .flat_map(|&j| incoming.iter().map(move |&i| (j, i)))
            .collect();
        let escape = candidates
            .iter()
            .copied()
            .find(|&(j, i)| !f.contains(current.replace(j, i)));
        let skip_stop = fault == Fault::NoEarlyStop && stage < r;
        let (j, i, done) = match escape {
            Some((j, i)) if !skip_stop => (j, i, true),
            _ => {
                let (j, i) = if chooser.0.is_none() {
                    candidates[0]
                } else {
                    let j = chooser.pick(&free_out).unwrap();
                    let i = chooser.pick(incoming).unwrap();
                    (j, i)
                };
                (j, i, fault == Fault::SkipChainStop)
            }
        };
        let next = current.replace(j, i);
        targets.push(next);
        steps.push(ShiftStep::new(i, j, n)?);
        free_out.retain(|&x| x != j);
        free_in.retain(|&x| x != i);
        if done {
            let t = steps.len();
            return Ok(ChainResult { sources, targets, seq: ShiftSequence { steps }, t });
        }
        current = next;
    }
    Err(EmcError::violation(
        Claim::ChainLength,
        format!("chain ran through all {r} stages without reaching a missing target"),
        json!({ "family": f, "pair": pair, "sources": sources, "targets": targets }),
    ))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub claim: Claim,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeChange {
    pub element: u32,
    pub before: usize,
    pub after: usize,
}

/// Everything observed during one iteration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IterationTrace {
    pub n: u32,
    pub family_size: usize,
    pub phi_before: usize,
    pub phi_after: usize,
    pub pair: PairSelection,
    pub chain: ChainResult,
    /// Degrees of the elements of `S` before and after.
    pub fixed_degrees: Vec<DegreeChange>,
    /// Pivot degree in `F_t, …, F_0`.
    pub pivot_degrees: Vec<usize>,
    /// Triviality of `F_t, …, F_0`.
    pub intermediate_trivial: Vec<bool>,
    pub matching_before: Option<usize>,
    pub matching_after: Option<usize>,
    pub checks: Vec<CheckOutcome>,
}

impl IterationTrace {
    pub fn failed(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// One iteration with least-element choices.
pub fn iterate_once(f: &SetFamily, config: &AlgorithmConfig) -> Result<(SetFamily, IterationTrace)> {
    let mut chooser = Chooser::new(config.choices);
    iterate_with(f, config, &mut chooser)
}

fn iterate_with(
    f: &SetFamily,
    config: &AlgorithmConfig,
    chooser: &mut Chooser,
) -> Result<(SetFamily, IterationTrace)> {
    let a = choose_a(f, chooser)
        .ok_or_else(|| EmcError::Input("every member meets the fixed set".into()))?;
    let b = choose_b(f, chooser)
        .ok_or_else(|| EmcError::Input("every k-set meeting the fixed set is present".into()))?;
    let pair = select_pair_with(f, a, b, chooser)?;
    let chain = build_chain_with(f, &pair, chooser, config.fault)?;
    let applied = apply_shift_sequence(f, &chain.seq);
    let new = applied.result().clone();
    let t = chain.t;
    let pivot = pair.pivot();

    let mut checks = Vec::new();
    let mut check = |claim: Claim, passed: bool, detail: String| {
        checks.push(CheckOutcome { claim, passed, detail });
    };

    let pivot_degrees: Vec<usize> = applied.families.iter().map(|g| g.degree(pivot)).collect();
    let start = pivot_degrees[0];
    // Entries 0..t are F_t..F_1.
    let drift = pivot_degrees[..t].iter().position(|&d| d != start);
    check(
        Claim::PivotDegreeInvariant,
        drift.is_none(),
        match drift {
            None => format!("|F_p^{pivot}| = {start} for p = {t}..1"),
            Some(idx) => format!("|F_{}^{pivot}| = {} differs from {start}", t - idx, pivot_degrees[idx]),
        },
    );

    let missing_source = (1..=t).find(|&p| !applied.family_at(p).contains(chain.sources[p - 1]));
    check(
        Claim::ChainSourcePresent,
        missing_source.is_none(),
        match missing_source {
            None => "A_p in F_p for every p".to_string(),
            Some(p) => format!("A_{p} = {} missing from F_{p}", chain.sources[p - 1]),
        },
    );

    let present_target = (1..=t).find(|&p| applied.family_at(p).contains(chain.targets[p - 1]));
    check(
        Claim::ChainTargetAbsent,
        present_target.is_none(),
        match present_target {
            None => "B_p not in F_p for every p".to_string(),
            Some(p) => format!("B_{p} = {} already in F_{p}", chain.targets[p - 1]),
        },
    );

    let end = pivot_degrees[t];
    check(
        Claim::PivotDegreeGain,
        end > start,
        format!("|F^{pivot}|: {start} -> {end}"),
    );

    let fixed_degrees: Vec<DegreeChange> = f
        .params()
        .fixed_set()
        .map(|x| DegreeChange { element: x, before: f.degree(x), after: new.degree(x) })
        .collect();
    let dropped: Vec<u32> = fixed_degrees.iter().filter(|d| d.after < d.before).map(|d| d.element).collect();
    check(
        Claim::FixedSetDegreesMonotone,
        dropped.is_empty(),
        if dropped.is_empty() {
            "no element of S lost degree".to_string()
        } else {
            format!("degree dropped for {dropped:?}")
        },
    );

    let phi_before = potential(f);
    let phi_after = potential(&new);
    check(
        Claim::PotentialIncrease,
        phi_after > phi_before,
        format!("potential {phi_before} -> {phi_after}"),
    );

    check(
        Claim::SizeConserved,
        new.len() == f.len(),
        format!("|F| {} -> {}", f.len(), new.len()),
    );

    let (matching_before, matching_after) = if config.paranoid {
        let before = matching_number(f);
        let after = matching_number(&new);
        check(
            Claim::MatchingMonotone,
            after <= before,
            format!("matching number {before} -> {after}"),
        );
        (Some(before), Some(after))
    } else {
        (None, None)
    };

    check(
        Claim::TrivialityPropagation,
        applied.triviality_propagates(),
        format!("triviality of F_{t}..F_0: {:?}", applied.trivial),
    );

    let trace = IterationTrace {
        n: f.params().n(),
        family_size: f.len(),
        phi_before,
        phi_after,
        pair,
        chain,
        fixed_degrees,
        pivot_degrees,
        intermediate_trivial: applied.trivial.clone(),
        matching_before,
        matching_after,
        checks,
    };

    if let Some(first) = trace.failed().next() {
        return Err(EmcError::violation(
            first.claim,
            first.detail.clone(),
            json!({ "family": f, "trace": trace }),
        ));
    }
    Ok((new, trace))
}

/// The `s`-matching `{A, B₁, …, B_{s-1}}` available when `f` holds every
/// k-set meeting `S` together with some `A` avoiding `S`.
///
/// `B_i` is `{i}` plus the next `k - 1` least elements outside `A ∪ S`.
pub fn condition3_certificate(f: &SetFamily, a: KSet) -> Result<MatchingCertificate> {
    let p = f.params();
    p.require_theorem_range()?;
    if !f.contains(a) || a.meets_mask(p.s_mask()) {
        return Err(EmcError::Input(format!("{a} must be a member avoiding the fixed set")));
    }
    let blocked = a.bits() | p.s_mask();
    let fillers: Vec<u32> = (1..=p.n()).filter(|&x| blocked & (1u64 << (x - 1)) == 0).collect();
    let per = (p.k() - 1) as usize;
    let mut sets = vec![a];
    for (slot, x) in p.fixed_set().enumerate() {
        let extra = &fillers[slot * per..(slot + 1) * per];
        let set = KSet::from_elements(std::iter::once(x).chain(extra.iter().copied()))?;
        if !f.contains(set) {
            return Err(EmcError::Input(format!(
                "{set} meets the fixed set but is not a member"
            )));
        }
        sets.push(set);
    }
    MatchingCertificate::new(f, sets)
}

/// How a run ended.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutcomeKind {
    /// The compacted ground set has at most `s*k - 1` elements.
    SubsetOfGStar,
    /// Every member meets `S`.
    SubsetOfFStar,
    /// Every k-set meeting `S` is present alongside a member avoiding it.
    ContradictionMatching { certificate: MatchingCertificate },
}

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub schema_version: u32,
    pub params: Params,
    #[serde(flatten)]
    pub kind: OutcomeKind,
    pub final_n: u32,
    pub family_size: usize,
    pub bound: u64,
    /// Potential at the start of every iteration and at termination.
    pub phi_history: Vec<usize>,
    pub final_family: SetFamily,
    pub iterations: Vec<IterationTrace>,
    pub compactions: Vec<CompactionResult>,
    pub violations: Vec<Violation>,
}

impl Outcome {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Runs the procedure to termination.
///
/// Requires `n >= s*k` and no `s`-matching in `f`. Termination by the
/// contradiction branch, an over-large terminal family or a final
/// `s`-matching are recorded in [`Outcome::violations`]; a failed check
/// inside an iteration aborts the run with [`EmcError::ClaimViolation`].
pub fn run(f: &SetFamily, config: &AlgorithmConfig) -> Result<Outcome> {
    let params = f.params();
    params.require_theorem_range()?;
    if let Some(certificate) = s_matching(f) {
        return Err(EmcError::ForbiddenMatching { certificate });
    }
    let bound = emc_bound(params)?;
    let cap = binomial(u64::from(params.n()), u64::from(params.k()))? + 1;
    let s = params.s();
    let k = params.k();
    let mut chooser = Chooser::new(config.choices);

    let mut current = f.clone();
    let mut iterations: Vec<IterationTrace> = Vec::new();
    let mut compactions = Vec::new();
    let mut phi_history = Vec::new();
    let mut violations = Vec::new();

    let kind = loop {
        let compacted = compact_ground(&current)?;
        if !compacted.is_identity() {
            current = compacted.family.clone();
            compactions.push(compacted);
        }
        phi_history.push(potential(&current));
        let n_now = current.params().n();
        if u64::from(n_now) < u64::from(s) * u64::from(k) {
            break OutcomeKind::SubsetOfGStar;
        }
        let Some(a) = find_a(&current) else {
            break OutcomeKind::SubsetOfFStar;
        };
        if find_b(&current).is_none() {
            let certificate = condition3_certificate(&current, a)?;
            violations.push(Violation {
                claim: Claim::ForbiddenMatchingReached,
                message: format!("every k-set meeting S is present; {certificate} is an {s}-matching"),
                evidence: json!({ "family": current, "certificate": certificate }),
            });
            break OutcomeKind::ContradictionMatching { certificate };
        }
        if iterations.len() as u64 >= cap {
            return Err(EmcError::violation(
                Claim::IterationCap,
                format!("more than {cap} iterations"),
                json!({ "input": f, "family": current, "phi_history": phi_history }),
            ));
        }
        let (next, trace) = iterate_with(&current, config, &mut chooser)?;
        if config.paranoid {
            if let Some(certificate) = find_matching(&next, s as usize) {
                return Err(EmcError::violation(
                    Claim::MatchingMonotone,
                    format!("iteration produced the {s}-matching {certificate}"),
                    json!({ "family": current, "next": next, "trace": trace }),
                ));
            }
        }
        iterations.push(trace);
        current = next;
    };

    let size = current.len() as u64;
    let local_bound = match &kind {
        OutcomeKind::SubsetOfGStar => Some(clique_size(params)?),
        OutcomeKind::SubsetOfFStar => Some(star_size(current.params())?),
        OutcomeKind::ContradictionMatching { .. } => None,
    };
    if let Some(limit) = local_bound {
        if size > limit || size > bound {
            violations.push(Violation {
                claim: Claim::TerminalBound,
                message: format!("terminal family has {size} sets; condition bound {limit}, overall bound {bound}"),
                evidence: json!({ "family": current }),
            });
        }
        if let Some(certificate) = s_matching(&current) {
            violations.push(Violation {
                claim: Claim::MatchingMonotone,
                message: format!("terminal family contains the {s}-matching {certificate}"),
                evidence: json!({ "family": current, "certificate": certificate }),
            });
        }
    }

    Ok(Outcome {
        schema_version: SCHEMA_VERSION,
        params,
        kind,
        final_n: current.params().n(),
        family_size: current.len(),
        bound,
        phi_history,
        final_family: current,
        iterations,
        compactions,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{make_f_star, make_g_star};

    fn params(n: u32, k: u32, s: u32) -> Params {
        Params::new(n, k, s).unwrap()
    }

    fn fam(p: Params, lists: &[&[u32]]) -> SetFamily {
        SetFamily::from_lists(p, lists).unwrap()
    }

    fn ks(v: &[u32]) -> KSet {
        KSet::from_elements(v.iter().copied()).unwrap()
    }

    fn star_at_2() -> SetFamily {
        fam(params(5, 2, 2), &[&[1, 2], &[2, 3], &[2, 4], &[2, 5]])
    }

    #[test]
    fn find_a_examples() {
        assert_eq!(find_a(&make_f_star(params(6, 2, 3)).unwrap()), None);
        assert_eq!(find_a(&fam(params(4, 2, 3), &[&[1, 2], &[3, 4]])), Some(ks(&[3, 4])));
        assert_eq!(find_a(&fam(params(5, 2, 3), &[&[3, 5], &[3, 4]])), Some(ks(&[3, 4])));
    }

    #[test]
    fn find_b_examples() {
        assert_eq!(find_b(&make_f_star(params(6, 2, 3)).unwrap()), None);
        assert_eq!(find_b(&SetFamily::empty(params(4, 2, 2))), Some(ks(&[1, 2])));
        let star = make_f_star(params(6, 2, 3)).unwrap();
        let minus = SetFamily::new(star.params(), star.iter().filter(|s| *s != ks(&[1, 6]))).unwrap();
        assert_eq!(find_b(&minus), Some(ks(&[1, 6])));
    }

    #[test]
    fn select_pair_examples() {
        let f = fam(params(4, 2, 3), &[&[3, 4]]);
        let pair = select_pair(&f, ks(&[3, 4]), ks(&[1, 3])).unwrap();
        assert_eq!(pair.common, ks(&[3]));
        assert_eq!(pair.source_only, vec![4]);
        assert_eq!(pair.target_only, vec![1]);
        assert_eq!(pair.width, 1);

        let f = star_at_2();
        let pair = select_pair(&f, ks(&[2, 3]), ks(&[1, 3])).unwrap();
        assert_eq!((pair.source_only.clone(), pair.target_only.clone()), (vec![2], vec![1]));

        let f = fam(params(6, 2, 2), &[&[3, 4]]);
        let pair = select_pair(&f, ks(&[3, 4]), ks(&[1, 5])).unwrap();
        assert_eq!(pair.width, 2);
        assert!(pair.common.is_empty());

        assert!(select_pair(&f, ks(&[1, 5]), ks(&[1, 6])).is_err());
        assert!(select_pair(&f, ks(&[3, 4]), ks(&[5, 6])).is_err());
    }

    #[test]
    fn chain_width_one() {
        let f = star_at_2();
        let pair = select_pair(&f, ks(&[2, 3]), ks(&[1, 3])).unwrap();
        let chain = build_chain(&f, &pair).unwrap();
        assert_eq!(chain.t, 1);
        assert_eq!(chain.seq.steps, vec![ShiftStep::new(1, 2, 5).unwrap()]);
        assert_eq!(chain.targets, vec![ks(&[1, 3])]);
    }

    #[test]
    fn chain_extends_when_stage_one_is_blocked() {
        // k=2, s=2, S={1}. A={4,5}; both {1,4} and {1,5} present; B={1,6}... is
        // blocked at width 2 only if B is missing, so the chain must reach it.
        let f = fam(params(6, 2, 2), &[&[1, 2], &[1, 3], &[1, 4], &[1, 5], &[4, 5]]);
        let pair = select_pair(&f, ks(&[4, 5]), ks(&[1, 6])).unwrap();
        let chain = build_chain(&f, &pair).unwrap();
        assert_eq!(chain.t, 2);
        assert_eq!(chain.sources, vec![ks(&[4, 5]), ks(&[1, 5])]);
        assert_eq!(chain.targets, vec![ks(&[1, 5]), ks(&[1, 6])]);
        assert!(f.contains(chain.targets[0]));
        assert!(!f.contains(chain.targets[1]));
    }

    #[test]
    fn star_iteration() {
        let f = star_at_2();
        let (new, trace) = iterate_once(&f, &AlgorithmConfig::paranoid()).unwrap();
        assert_eq!(new, fam(params(5, 2, 2), &[&[1, 2], &[1, 3], &[1, 4], &[1, 5]]));
        assert_eq!((trace.phi_before, trace.phi_after), (1, 4));
        assert!(trace.checks.iter().all(|c| c.passed));
        assert!(iterate_once(&make_f_star(params(5, 2, 2)).unwrap(), &AlgorithmConfig::default()).is_err());
    }

    #[test]
    fn run_star_at_2() {
        let out = run(&star_at_2(), &AlgorithmConfig::paranoid()).unwrap();
        assert_eq!(out.kind, OutcomeKind::SubsetOfFStar);
        assert_eq!(out.iterations.len(), 1);
        assert_eq!(out.phi_history, vec![1, 4]);
        assert_eq!(out.family_size, 4);
        assert_eq!(out.bound, 4);
        assert!(out.is_clean());
    }

    #[test]
    fn run_triangle_compacts_to_clique() {
        let f = fam(params(4, 2, 2), &[&[2, 3], &[2, 4], &[3, 4]]);
        let out = run(&f, &AlgorithmConfig::paranoid()).unwrap();
        assert_eq!(out.kind, OutcomeKind::SubsetOfGStar);
        assert_eq!(out.final_n, 3);
        assert_eq!(out.compactions.len(), 1);
        assert_eq!(out.bound, 3);
        assert!(out.iterations.is_empty());
    }

    #[test]
    fn run_padded_g_star() {
        let g = make_g_star(params(6, 2, 3)).unwrap();
        let out = run(&g, &AlgorithmConfig::paranoid()).unwrap();
        assert_eq!(out.kind, OutcomeKind::SubsetOfGStar);
        assert_eq!(out.final_n, 5);
        assert_eq!(out.family_size, 10);
        assert_eq!(out.bound, 10);
    }

    #[test]
    fn run_subfamily_of_star_needs_no_iterations() {
        let p = params(7, 2, 3);
        let star = make_f_star(p).unwrap();
        let sub = SetFamily::new(p, star.iter().step_by(2)).unwrap();
        let out = run(&sub, &AlgorithmConfig::default()).unwrap();
        assert!(out.iterations.is_empty());
        assert!(matches!(out.kind, OutcomeKind::SubsetOfFStar | OutcomeKind::SubsetOfGStar));
    }

    #[test]
    fn run_rejects_matching_and_small_n() {
        let f = fam(params(6, 2, 3), &[&[1, 2], &[3, 4], &[5, 6]]);
        assert!(matches!(run(&f, &AlgorithmConfig::default()), Err(EmcError::ForbiddenMatching { .. })));
        let f = fam(params(5, 2, 3), &[&[1, 2]]);
        assert!(matches!(run(&f, &AlgorithmConfig::default()), Err(EmcError::Params(_))));
    }

    #[test]
    fn condition3_examples() {
        let p = params(6, 2, 3);
        let mut sets: Vec<KSet> = make_f_star(p).unwrap().iter().collect();
        sets.push(ks(&[5, 6]));
        let f = SetFamily::new(p, sets).unwrap();
        let cert = condition3_certificate(&f, ks(&[5, 6])).unwrap();
        assert_eq!(cert.sets(), &[ks(&[1, 3]), ks(&[2, 4]), ks(&[5, 6])]);

        let f = fam(params(4, 2, 1), &[&[3, 4]]);
        let cert = condition3_certificate(&f, ks(&[3, 4])).unwrap();
        assert_eq!(cert.sets(), &[ks(&[3, 4])]);

        let f = fam(params(6, 2, 3), &[&[5, 6], &[1, 3]]);
        assert!(condition3_certificate(&f, ks(&[5, 6])).is_err());
    }

    #[test]
    fn skipping_the_stop_check_ends_on_a_member() {
        let f = fam(params(6, 3, 2), &[&[1, 2, 3], &[1, 3, 4], &[1, 4, 5], &[1, 4, 6], &[3, 4, 6]]);
        let pair = select_pair(&f, ks(&[3, 4, 6]), ks(&[1, 2, 4])).unwrap();
        let chain = build_chain_with(&f, &pair, &mut Chooser(None), Fault::SkipChainStop).unwrap();
        assert_eq!(chain.t, 1);
        assert!(f.contains(chain.targets[0]));
        let cfg = AlgorithmConfig { paranoid: true, fault: Fault::SkipChainStop, ..Default::default() };
        let err = run(&f, &cfg).unwrap_err();
        let v = err.as_violation().unwrap();
        let checks: Vec<CheckOutcome> = serde_json::from_value(v.evidence["trace"]["checks"].clone()).unwrap();
        assert!(checks.iter().any(|c| c.claim == Claim::ChainTargetAbsent && !c.passed));
    }

    #[test]
    fn ignoring_early_stops_runs_every_stage() {
        let f = fam(params(6, 2, 2), &[&[1, 4], &[4, 5], &[4, 6]]);
        let cfg = AlgorithmConfig { paranoid: true, fault: Fault::NoEarlyStop, ..Default::default() };
        let pair = select_pair(&f, ks(&[4, 5]), ks(&[1, 5])).unwrap();
        assert_eq!(pair.width, 1);
        // Width one leaves nothing to skip; force width two.
        let pair = select_pair(&f, ks(&[4, 5]), ks(&[1, 6])).unwrap();
        let chain = build_chain_with(&f, &pair, &mut Chooser(None), cfg.fault).unwrap();
        assert_eq!(chain.t, 2);
        assert!(!f.contains(chain.targets[0]));
    }

    #[test]
    fn seeded_choices_are_reproducible() {
        let f = fam(params(7, 2, 3), &[&[3, 4], &[3, 5], &[4, 5], &[1, 6], &[6, 7]]);
        assert!(!crate::matching::has_s_matching(&f));
        let cfg = AlgorithmConfig { paranoid: true, choices: ChoiceRule::Seeded(9), fault: Fault::None };
        let a = serde_json::to_string(&run(&f, &cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&run(&f, &cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
