//! Seeded property campaigns: the shift lemmas, the pullback construction,
//! triviality preservation, and the fuzzing hunt over the shifting procedure.
//!
//! Case `i` of a campaign with seed `s` draws from `ChaCha8Rng::seed_from_u64(s)`
//! switched to stream `i`, so any case replays on its own.

use std::collections::BTreeMap;

use rand::seq::{IteratorRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::algorithm::{run, AlgorithmConfig, CheckOutcome, ChoiceRule, OutcomeKind, SCHEMA_VERSION};
use crate::error::{Claim, EmcError, Violation};
use crate::exec::{map_indexed, Execution};
use crate::fault::Fault;
use crate::family::{binomial, emc_bound, uncovered_elements, KSet, Params, SetFamily};
use crate::matching::{matching_number, max_matching, naive_matching_number, pullback_matching};
use crate::oracle::random_matching_free_with;
use crate::shifting::{shift_family, shift_image, ShiftStep};

/// Findings kept in full per report; tallies still count all of them.
const MAX_FINDINGS: usize = 25;

pub fn case_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub checked: u64,
    pub failed: u64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Tallies(pub BTreeMap<Claim, Tally>);

impl Tallies {
    fn record(&mut self, claim: Claim, passed: bool) {
        let t = self.0.entry(claim).or_default();
        t.checked += 1;
        if !passed {
            t.failed += 1;
        }
    }

    fn merge(&mut self, other: &Tallies) {
        for (claim, t) in &other.0 {
            let mine = self.0.entry(*claim).or_default();
            mine.checked += t.checked;
            mine.failed += t.failed;
        }
    }

    pub fn failures(&self) -> u64 {
        self.0.values().map(|t| t.failed).sum()
    }

    pub fn get(&self, claim: Claim) -> Tally {
        self.0.get(&claim).copied().unwrap_or_default()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Finding {
    pub case: u64,
    pub violation: Violation,
}

#[derive(Clone, Debug)]
pub struct LemmaConfig {
    pub seed: u64,
    /// Random families for the shift/pullback suite.
    pub cases: u64,
    /// Random trivial families for the triviality suite.
    pub trivial_cases: u64,
    pub max_n: u32,
    pub max_k: u32,
    pub max_size: usize,
    /// Families up to this size are also checked with the all-subsets matcher.
    pub naive_limit: usize,
    pub fault: Fault,
    pub execution: Execution,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        LemmaConfig {
            seed: 0,
            cases: 5_000,
            trivial_cases: 5_000,
            max_n: 10,
            max_k: 3,
            max_size: 20,
            naive_limit: 15,
            fault: Fault::None,
            execution: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub schema_version: u32,
    pub seed: u64,
    pub cases: u64,
    pub trivial_cases: u64,
    pub shifts_checked: u64,
    pub naive_cross_checks: u64,
    /// Trivial-family cases by where the forced uncovered element sits.
    pub trivial_case_mix: BTreeMap<String, u64>,
    pub tallies: Tallies,
    pub findings: Vec<Finding>,
}

impl LemmaReport {
    pub fn is_clean(&self) -> bool {
        self.tallies.failures() == 0
    }

    pub fn no_cases_run(&self) -> bool {
        self.cases == 0 && self.trivial_cases == 0
    }
}

#[derive(Default)]
struct CaseResult {
    shifts: u64,
    naive: u64,
    tallies: Tallies,
    findings: Vec<Violation>,
    mix: Option<&'static str>,
}

impl CaseResult {
    fn check(&mut self, claim: Claim, passed: bool, message: impl FnOnce() -> String, evidence: impl FnOnce() -> serde_json::Value) {
        self.tallies.record(claim, passed);
        if !passed && self.findings.len() < MAX_FINDINGS {
            self.findings.push(Violation { claim, message: message(), evidence: evidence() });
        }
    }
}

fn random_shape(rng: &mut ChaCha8Rng, max_n: u32, max_k: u32, min_n: u32) -> (u32, u32) {
    let n = rng.gen_range(min_n.max(1)..=max_n.max(min_n.max(1)));
    let k = rng.gen_range(1..=max_k.min(n).max(1));
    (n, k)
}

fn random_family(rng: &mut ChaCha8Rng, p: Params, pool: Vec<KSet>, max_size: usize) -> SetFamily {
    let size = rng.gen_range(0..=max_size.min(pool.len()));
    let picked = pool.into_iter().choose_multiple(rng, size);
    SetFamily::new(p, picked).expect("distinct k-sets")
}

fn shift_case(cfg: &LemmaConfig, index: u64) -> CaseResult {
    let mut rng = case_rng(cfg.seed, index);
    let (n, k) = random_shape(&mut rng, cfg.max_n, cfg.max_k, 2);
    let p = Params::new(n, k, 2).expect("valid shape");
    let f = random_family(&mut rng, p, p.all_ksets().collect(), cfg.max_size);
    let mut out = CaseResult::default();

    let nu = matching_number(&f);
    if f.len() <= cfg.naive_limit {
        let naive = naive_matching_number(&f);
        out.naive += 1;
        out.check(
            Claim::MatcherAgreement,
            naive == Some(nu),
            || format!("branch and bound gives {nu}, all-subsets gives {naive:?}"),
            || json!({ "family": f }),
        );
    }

    for step in ShiftStep::all(n) {
        out.shifts += 1;
        let image = shift_image(&f, step, cfg.fault);
        let wrong_size = image.iter().find(|s| s.len() != k).copied();
        out.check(
            Claim::ShiftPreservesSetSize,
            wrong_size.is_none(),
            || format!("{step:?} produced {wrong_size:?}"),
            || json!({ "family": f, "step": step }),
        );
        let mut distinct = image.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let injective = distinct.len() == f.len();
        out.check(
            Claim::ShiftPreservesFamilySize,
            injective,
            || format!("{step:?} maps {} members onto {}", f.len(), distinct.len()),
            || json!({ "family": f, "step": step, "image": image }),
        );
        if !injective || wrong_size.is_some() {
            continue;
        }
        let shifted = SetFamily::new(p, distinct).expect("checked above");
        let nu_shifted = matching_number(&shifted);
        if shifted.len() <= cfg.naive_limit {
            out.naive += 1;
            let naive = naive_matching_number(&shifted);
            out.check(
                Claim::MatcherAgreement,
                naive == Some(nu_shifted),
                || format!("branch and bound gives {nu_shifted}, all-subsets gives {naive:?}"),
                || json!({ "family": shifted }),
            );
        }
        out.check(
            Claim::ShiftMatchingMonotone,
            nu_shifted <= nu,
            || format!("{step:?} raised the matching number {nu} -> {nu_shifted}"),
            || json!({ "family": f, "step": step, "shifted": shifted }),
        );

        if cfg.fault == Fault::None {
            let m_prime = max_matching(&shifted);
            match pullback_matching(&f, step, &m_prime) {
                Ok(m) => out.check(
                    Claim::PullbackValid,
                    m.len() == m_prime.len() && m.is_within(&f),
                    || format!("pullback {m} of {m_prime} is not a matching of the same size"),
                    || json!({ "family": f, "step": step, "m_prime": m_prime }),
                ),
                Err(e) => {
                    let (claim, message, evidence) = match e {
                        EmcError::ClaimViolation(v) => (v.claim, v.message, v.evidence),
                        other => (Claim::PullbackValid, other.to_string(), json!({ "family": f, "step": step })),
                    };
                    if claim != Claim::PullbackValid {
                        out.tallies.record(Claim::PullbackValid, false);
                    }
                    out.check(claim, false, || message, || evidence);
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy)]
enum Missing {
    Incoming,
    Outgoing,
    Elsewhere,
}

fn trivial_case(cfg: &LemmaConfig, index: u64) -> CaseResult {
    let mut rng = case_rng(cfg.seed ^ 0x7269_7669_616c, index);
    let (n, k) = random_shape(&mut rng, cfg.max_n, cfg.max_k.min(cfg.max_n.saturating_sub(1)).max(1), 3);
    let k = k.min(n - 1);
    let p = Params::new(n, k, 2).expect("valid shape");
    let mode = match index % 3 {
        0 => Missing::Incoming,
        1 => Missing::Outgoing,
        _ => Missing::Elsewhere,
    };
    let mut elems: Vec<u32> = (1..=n).collect();
    elems.shuffle(&mut rng);
    let (i, j, other) = (elems[0], elems[1], elems[2]);
    let x = match mode {
        Missing::Incoming => i,
        Missing::Outgoing => j,
        Missing::Elsewhere => other,
    };
    let pool: Vec<KSet> = p.all_ksets().filter(|s| !s.contains(x)).collect();
    let f = random_family(&mut rng, p, pool, cfg.max_size);
    let mut out = CaseResult {
        mix: Some(match mode {
            Missing::Incoming => "x_is_i",
            Missing::Outgoing => "x_is_j",
            Missing::Elsewhere => "x_elsewhere",
        }),
        ..Default::default()
    };

    let targeted = ShiftStep::new(i, j, n).expect("distinct elements");
    let steps = std::iter::once(targeted).chain(ShiftStep::all(n).filter(|s| *s != targeted));
    let missing_before = uncovered_elements(&f);
    for step in steps {
        out.shifts += 1;
        let shifted = shift_family(&f, step);
        let missing_after = uncovered_elements(&shifted);
        out.check(
            Claim::ShiftPreservesTriviality,
            !missing_after.is_empty(),
            || format!("{step:?} covered every element"),
            || json!({ "family": f, "step": step, "shifted": shifted }),
        );
        for &y in &missing_before {
            let (passed, expect) = if y == step.outgoing() {
                (shifted == f, "family unchanged")
            } else if y == step.incoming() {
                (missing_after.contains(&step.outgoing()), "outgoing element uncovered")
            } else {
                (missing_after.contains(&y), "same element still uncovered")
            };
            out.check(
                Claim::TrivialityWitness,
                passed,
                || format!("{step:?} with {y} uncovered: expected {expect}"),
                || json!({ "family": f, "step": step, "shifted": shifted, "uncovered": y }),
            );
        }
    }
    out
}

/// Runs the shift/pullback suite and the triviality suite.
pub fn lemma_suite(cfg: &LemmaConfig) -> LemmaReport {
    let shift_results = map_indexed(cfg.execution, cfg.cases, |i| shift_case(cfg, i));
    let trivial_results = map_indexed(cfg.execution, cfg.trivial_cases, |i| trivial_case(cfg, i));

    let mut report = LemmaReport {
        schema_version: SCHEMA_VERSION,
        seed: cfg.seed,
        cases: cfg.cases,
        trivial_cases: cfg.trivial_cases,
        shifts_checked: 0,
        naive_cross_checks: 0,
        trivial_case_mix: BTreeMap::new(),
        tallies: Tallies::default(),
        findings: Vec::new(),
    };
    let all = shift_results
        .into_iter()
        .enumerate()
        .chain(trivial_results.into_iter().enumerate());
    for (case, res) in all {
        report.shifts_checked += res.shifts;
        report.naive_cross_checks += res.naive;
        report.tallies.merge(&res.tallies);
        if let Some(mix) = res.mix {
            *report.trivial_case_mix.entry(mix.to_string()).or_default() += 1;
        }
        for violation in res.findings {
            if report.findings.len() < MAX_FINDINGS {
                report.findings.push(Finding { case: case as u64, violation });
            }
        }
    }
    report
}

#[derive(Clone, Debug)]
pub struct HuntConfig {
    pub seed: u64,
    pub runs: u64,
    pub max_n: u32,
    pub max_k: u32,
    pub max_s: u32,
    pub paranoid: bool,
    /// Draw the procedure's free choices at random instead of least-first.
    pub random_choices: bool,
    pub fault: Fault,
    pub execution: Execution,
}

impl Default for HuntConfig {
    fn default() -> Self {
        HuntConfig {
            seed: 0,
            runs: 10_000,
            max_n: 10,
            max_k: 3,
            max_s: 3,
            paranoid: true,
            random_choices: false,
            fault: Fault::None,
            execution: Execution::default(),
        }
    }
}

/// One fuzzed run, with enough to replay it.
#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub index: u64,
    pub params: Params,
    pub input_size: usize,
    /// `None` when the run aborted on a failed check.
    pub kind: Option<String>,
    pub iterations: usize,
    pub iteration_limit: u64,
    pub final_size: usize,
    pub bound: u64,
    pub phi_history: Vec<usize>,
    pub violations: Vec<Violation>,
    #[serde(skip)]
    pub input: Option<SetFamily>,
    #[serde(skip)]
    tallies: Tallies,
}

impl RunRecord {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn phi_strictly_increasing(&self) -> bool {
        self.phi_history.windows(2).all(|w| w[0] < w[1])
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HuntFinding {
    pub index: u64,
    pub seed: u64,
    pub params: Params,
    pub input: SetFamily,
    pub violation: Violation,
}

#[derive(Clone, Debug, Serialize)]
pub struct HuntReport {
    pub schema_version: u32,
    pub seed: u64,
    pub runs: u64,
    pub kinds: BTreeMap<String, u64>,
    pub aborted: u64,
    pub total_iterations: u64,
    pub max_iterations: usize,
    pub tallies: Tallies,
    pub findings: Vec<HuntFinding>,
    #[serde(skip)]
    pub records: Vec<RunRecord>,
}

impl HuntReport {
    pub fn is_clean(&self) -> bool {
        self.tallies.failures() == 0 && self.aborted == 0
    }
}

fn kind_name(kind: &OutcomeKind) -> &'static str {
    match kind {
        OutcomeKind::SubsetOfGStar => "subset_of_g_star",
        OutcomeKind::SubsetOfFStar => "subset_of_f_star",
        OutcomeKind::ContradictionMatching { .. } => "contradiction_matching",
    }
}

/// Parameters and input family for hunt run `index`.
pub fn hunt_input(cfg: &HuntConfig, index: u64) -> (SetFamily, Option<u64>) {
    let mut rng = case_rng(cfg.seed, index);
    let p = loop {
        let k = rng.gen_range(1..=cfg.max_k.max(1));
        let s = rng.gen_range(1..=cfg.max_s.max(1));
        if s * k > cfg.max_n {
            continue;
        }
        let n = rng.gen_range(s * k..=cfg.max_n);
        break Params::new(n, k, s).expect("valid hunt parameters");
    };
    let total = binomial(u64::from(p.n()), u64::from(p.k())).unwrap_or(u64::MAX) as usize;
    // Half the runs grow the family until no k-set can be added.
    let target = if rng.gen_bool(0.5) { usize::MAX } else { rng.gen_range(0..=total) };
    let family = random_matching_free_with(p, &mut rng, target);
    let choice_seed = cfg.random_choices.then(|| rng.gen());
    (family, choice_seed)
}

fn hunt_run(cfg: &HuntConfig, index: u64) -> RunRecord {
    let (family, choice_seed) = hunt_input(cfg, index);
    let p = family.params();
    let config = AlgorithmConfig {
        paranoid: cfg.paranoid,
        choices: choice_seed.map_or(ChoiceRule::Least, ChoiceRule::Seeded),
        fault: cfg.fault,
    };
    let limit = binomial(u64::from(p.n()), u64::from(p.k())).unwrap_or(u64::MAX);
    let mut record = RunRecord {
        index,
        params: p,
        input_size: family.len(),
        kind: None,
        iterations: 0,
        iteration_limit: limit,
        final_size: family.len(),
        bound: emc_bound(p).unwrap_or(0),
        phi_history: Vec::new(),
        violations: Vec::new(),
        input: None,
        tallies: Tallies::default(),
    };
    match run(&family, &config) {
        Ok(outcome) => {
            record.kind = Some(kind_name(&outcome.kind).to_string());
            record.iterations = outcome.iterations.len();
            record.final_size = outcome.family_size;
            record.phi_history = outcome.phi_history.clone();
            for trace in &outcome.iterations {
                for c in &trace.checks {
                    record.tallies.record(c.claim, c.passed);
                }
            }
            record.tallies.record(Claim::IterationCap, outcome.iterations.len() as u64 <= limit);
            record.tallies.record(Claim::ForbiddenMatchingReached, !matches!(outcome.kind, OutcomeKind::ContradictionMatching { .. }));
            record.tallies.record(Claim::TerminalBound, !outcome.violations.iter().any(|v| v.claim == Claim::TerminalBound));
            record.violations = outcome.violations;
        }
        Err(EmcError::ClaimViolation(v)) => {
            let checks: Option<Vec<CheckOutcome>> = v
                .evidence
                .pointer("/trace/checks")
                .and_then(|c| serde_json::from_value(c.clone()).ok());
            match checks {
                Some(checks) => {
                    for c in checks {
                        record.tallies.record(c.claim, c.passed);
                    }
                }
                None => record.tallies.record(v.claim, false),
            }
            record.violations.push(*v);
        }
        Err(other) => {
            record.violations.push(Violation {
                claim: Claim::IterationCap,
                message: format!("run failed: {other}"),
                evidence: serde_json::Value::Null,
            });
        }
    }
    if !record.is_clean() {
        record.input = Some(family);
    }
    record
}

/// Fuzzing campaign over random `s`-matching-free families.
pub fn hunt(cfg: &HuntConfig) -> HuntReport {
    let records = map_indexed(cfg.execution, cfg.runs, |i| hunt_run(cfg, i));
    let mut report = HuntReport {
        schema_version: SCHEMA_VERSION,
        seed: cfg.seed,
        runs: cfg.runs,
        kinds: BTreeMap::new(),
        aborted: 0,
        total_iterations: 0,
        max_iterations: 0,
        tallies: Tallies::default(),
        findings: Vec::new(),
        records: Vec::new(),
    };
    for rec in &records {
        match &rec.kind {
            Some(kind) => *report.kinds.entry(kind.clone()).or_default() += 1,
            None => report.aborted += 1,
        }
        report.total_iterations += rec.iterations as u64;
        report.max_iterations = report.max_iterations.max(rec.iterations);
        report.tallies.merge(&rec.tallies);
        if let (Some(first), Some(input)) = (rec.violations.first(), &rec.input) {
            if report.findings.len() < MAX_FINDINGS {
                report.findings.push(HuntFinding {
                    index: rec.index,
                    seed: cfg.seed,
                    params: rec.params,
                    input: input.clone(),
                    violation: first.clone(),
                });
            }
        }
    }
    report.records = records;
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::has_s_matching;

    #[test]
    fn small_lemma_suite_is_clean() {
        let cfg = LemmaConfig { seed: 3, cases: 150, trivial_cases: 150, ..Default::default() };
        let report = lemma_suite(&cfg);
        assert!(report.is_clean(), "{:#?}", report.findings);
        assert!(report.tallies.get(Claim::PullbackValid).checked > 0);
        assert_eq!(report.trivial_case_mix.values().sum::<u64>(), 150);
    }

    #[test]
    fn flipped_blocking_is_reported() {
        let cfg = LemmaConfig {
            seed: 3,
            cases: 100,
            trivial_cases: 0,
            fault: Fault::FlipShiftBlocking,
            ..Default::default()
        };
        let report = lemma_suite(&cfg);
        assert!(report.tallies.get(Claim::ShiftPreservesFamilySize).failed > 0);
    }

    #[test]
    fn zero_cases() {
        let cfg = LemmaConfig { cases: 0, trivial_cases: 0, ..Default::default() };
        let report = lemma_suite(&cfg);
        assert!(report.no_cases_run());
        assert!(report.is_clean());
    }

    #[test]
    fn hunt_inputs_are_valid_and_replayable() {
        let cfg = HuntConfig { seed: 11, runs: 40, ..Default::default() };
        for i in 0..cfg.runs {
            let (f, _) = hunt_input(&cfg, i);
            assert!(f.params().in_theorem_range());
            assert!(!has_s_matching(&f));
            assert_eq!(hunt_input(&cfg, i).0, f);
        }
    }

    #[test]
    fn hunt_modes_agree() {
        let base = HuntConfig { seed: 5, runs: 60, ..Default::default() };
        let seq = hunt(&HuntConfig { execution: Execution::Sequential, ..base.clone() });
        let par = hunt(&HuntConfig { execution: Execution::Parallel, ..base });
        assert_eq!(serde_json::to_string(&seq).unwrap(), serde_json::to_string(&par).unwrap());
    }
}
