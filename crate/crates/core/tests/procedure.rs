use emc_core::algorithm::{run, AlgorithmConfig, CheckOutcome, OutcomeKind};
use emc_core::campaign::{hunt, lemma_suite, HuntConfig, LemmaConfig};
use emc_core::fault::Fault;
use emc_core::family::{make_f_star, make_g_star, Params, SetFamily};
use emc_core::shifting::ShiftStep;
use emc_core::{Claim, EmcError};

fn params(n: u32, k: u32, s: u32) -> Params {
    Params::new(n, k, s).unwrap()
}

fn fam(p: Params, lists: &[&[u32]]) -> SetFamily {
    SetFamily::from_lists(p, lists).unwrap()
}

fn failed_checks(err: &EmcError) -> Vec<Claim> {
    let v = err.as_violation().expect("claim violation");
    let checks: Vec<CheckOutcome> = serde_json::from_value(v.evidence["trace"]["checks"].clone()).unwrap();
    checks.into_iter().filter(|c| !c.passed).map(|c| c.claim).collect()
}

#[test]
fn g_star_padded_ends_by_compaction() {
    let g = make_g_star(params(5, 2, 3)).unwrap();
    let padded = SetFamily::new(params(7, 2, 3), g.iter()).unwrap();
    let o = run(&padded, &AlgorithmConfig::paranoid()).unwrap();
    assert_eq!(o.kind, OutcomeKind::SubsetOfGStar);
    assert_eq!(o.final_n, 5);
    assert!(o.iterations.is_empty());
    assert_eq!(o.family_size, 10);
    assert!(o.is_clean());
}

#[test]
fn f_star_is_already_terminal() {
    let f = make_f_star(params(8, 2, 3)).unwrap();
    let o = run(&f, &AlgorithmConfig::paranoid()).unwrap();
    assert_eq!(o.kind, OutcomeKind::SubsetOfFStar);
    assert_eq!(o.phi_history, vec![13]);
    assert_eq!(o.family_size as u64, o.bound);
}

#[test]
fn input_with_forbidden_matching_is_rejected() {
    let f = fam(params(6, 2, 3), &[&[1, 2], &[3, 4], &[5, 6], &[1, 3]]);
    match run(&f, &AlgorithmConfig::default()) {
        Err(EmcError::ForbiddenMatching { certificate }) => {
            assert_eq!(certificate.len(), 3);
            assert!(certificate.is_within(&f));
        }
        other => panic!("{other:?}"),
    }
}

// Second iteration: A = {3,5}, B = {1,2}; both stage-one swaps towards 1 are
// members, the chain ends at {1,2} via (2,5), and C(2,5) moves {3,5} to
// {2,3} before C(1,3) is applied. The degree of 1 stays at 4.
#[test]
fn graph_family_where_the_first_source_is_shifted_away() {
    let f = fam(params(6, 2, 3), &[&[1, 3], &[3, 4], &[1, 5], &[2, 5], &[3, 5], &[3, 6], &[5, 6]]);
    let err = run(&f, &AlgorithmConfig::paranoid()).unwrap_err();
    let v = err.as_violation().unwrap();
    assert_eq!(v.claim, Claim::ChainSourcePresent);
    assert_eq!(v.message, "A_1 = {3,5} missing from F_1");
    let steps: Vec<ShiftStep> = serde_json::from_value(v.evidence["trace"]["chain"]["seq"]["steps"].clone()).unwrap();
    assert_eq!(steps, vec![ShiftStep::new(1, 3, 6).unwrap(), ShiftStep::new(2, 5, 6).unwrap()]);
    let failed = failed_checks(&err);
    assert!(failed.contains(&Claim::PivotDegreeGain));
    assert!(!failed.contains(&Claim::ChainTargetAbsent));
    assert!(!failed.contains(&Claim::PivotDegreeInvariant));
}

#[test]
fn intersecting_triples_where_the_first_source_is_shifted_away() {
    let f = fam(params(6, 3, 2), &[&[1, 2, 3], &[1, 3, 4], &[1, 4, 5], &[1, 4, 6], &[3, 4, 6]]);
    let err = run(&f, &AlgorithmConfig::paranoid()).unwrap_err();
    assert_eq!(err.as_violation().unwrap().message, "A_1 = {3,4,6} missing from F_1");
    let failed = failed_checks(&err);
    assert!(failed.contains(&Claim::PivotDegreeGain));
    assert!(failed.contains(&Claim::PotentialIncrease));
}

#[test]
fn graphs_with_no_two_disjoint_edges_are_handled() {
    let report = hunt(&HuntConfig { seed: 4, runs: 2_000, max_n: 10, max_k: 2, max_s: 2, ..Default::default() });
    assert!(report.is_clean(), "{:#?}", report.findings.first());
    assert!(report.records.iter().all(|r| r.phi_strictly_increasing()));
}

#[test]
fn singletons_are_handled() {
    let report = hunt(&HuntConfig { seed: 4, runs: 2_000, max_n: 10, max_k: 1, max_s: 10, ..Default::default() });
    assert!(report.is_clean(), "{:#?}", report.findings.first());
}

#[test]
fn skipped_stop_check_leaves_a_present_target() {
    let report = hunt(&HuntConfig {
        seed: 2,
        runs: 500,
        fault: Fault::SkipChainStop,
        ..Default::default()
    });
    assert!(report.tallies.get(Claim::ChainTargetAbsent).failed > 0);
}

#[test]
fn ignoring_early_stops_loses_the_next_source() {
    let report = hunt(&HuntConfig {
        seed: 2,
        runs: 500,
        max_k: 2,
        max_s: 3,
        fault: Fault::NoEarlyStop,
        ..Default::default()
    });
    assert!(report.tallies.get(Claim::ChainSourcePresent).failed > 0);
}

#[test]
fn flipped_shift_blocking_breaks_the_lemmas() {
    let report = lemma_suite(&LemmaConfig {
        seed: 8,
        cases: 300,
        trivial_cases: 300,
        fault: Fault::FlipShiftBlocking,
        ..Default::default()
    });
    assert!(report.tallies.get(Claim::ShiftPreservesFamilySize).failed > 0);
    assert!(!report.findings.is_empty());
}

#[test]
fn hunt_findings_replay_from_their_index() {
    let cfg = HuntConfig { seed: 17, runs: 300, ..Default::default() };
    let report = hunt(&cfg);
    let finding = report.findings.first().expect("k = 3 runs produce findings");
    let (input, _) = emc_core::campaign::hunt_input(&cfg, finding.index);
    assert_eq!(input, finding.input);
    let err = run(&input, &AlgorithmConfig::paranoid()).unwrap_err();
    assert_eq!(err.as_violation().unwrap().message, finding.violation.message);
}
