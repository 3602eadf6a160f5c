//! `emc-lab`: batch driver for the shift lemmas, the shifting procedure, the
//! exhaustive oracles and the fuzzing hunt.
//!
//! Exit status: 0 when everything checked out, 2 when a checked claim failed,
//! 1 for usage and input errors.

mod grid;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use emc_core::algorithm::{run, AlgorithmConfig, ChoiceRule, Outcome, OutcomeKind};
use emc_core::campaign::{hunt, hunt_input, lemma_suite, HuntConfig, LemmaConfig, Tallies};
use emc_core::exec::{configure_workers, map_indexed, Execution};
use emc_core::fault::Fault;
use emc_core::family::{binomial, clique_size, emc_bound, star_size, Params, SetFamily};
use emc_core::io::family_from_str;
use emc_core::oracle::{f_covering, f_direct, DEFAULT_BUDGET};
use emc_core::{EmcError, Violation};

const WORKERS_ENV: &str = "EMC_LAB_WORKERS";

#[derive(Parser)]
#[command(name = "emc-lab", version, about = "Checks the shifting argument for the Erdős matching bound on concrete families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Property suites for the (i, j) shift, the matching pullback and trivial families.
    Lemmas(LemmasArgs),
    /// Run the shifting procedure on a family file.
    Run(RunArgs),
    /// Exhaustive f(n, k, s) by both searches over a parameter grid, as CSV.
    Oracle(OracleArgs),
    /// Print the conjectured bound and its two constructions.
    Bound(BoundArgs),
    /// Fuzz the shifting procedure on random s-matching-free families.
    Hunt(HuntArgs),
}

#[derive(Args)]
struct LemmasArgs {
    #[arg(long)]
    seed: u64,
    /// Cases per suite.
    #[arg(long, visible_alias = "budget", default_value_t = 5_000)]
    count: u64,
    /// Largest ground set.
    #[arg(long, default_value_t = 10)]
    n: u32,
    /// Largest set size.
    #[arg(long, default_value_t = 3)]
    k: u32,
    /// Largest family size.
    #[arg(long, default_value_t = 20)]
    max_size: usize,
    /// Report JSON; violations are also written here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, hide = true, default_value = "none", value_parser = parse_fault)]
    fault: Fault,
}

#[derive(Args)]
struct RunArgs {
    /// Family file, text or JSON.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Recompute matching numbers on every iteration.
    #[arg(long)]
    paranoid: bool,
    /// Draw the procedure's free choices from this seed instead of least-first.
    #[arg(long)]
    seed: Option<u64>,
    /// Outcome JSON (or violation evidence).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, hide = true, default_value = "none", value_parser = parse_fault)]
    fault: Fault,
}

#[derive(Args)]
struct OracleArgs {
    /// Ground set sizes, e.g. `4..8` or `5,7`.
    #[arg(long)]
    n: String,
    #[arg(long)]
    k: String,
    #[arg(long)]
    s: String,
    /// Search nodes per oracle and row.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for the extremal family found on each row.
    #[arg(long)]
    witness_dir: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    s: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HuntArgs {
    #[arg(long)]
    seed: u64,
    /// Number of runs.
    #[arg(long, default_value_t = 10_000)]
    count: u64,
    /// Largest ground set.
    #[arg(long, default_value_t = 10)]
    n: u32,
    /// Largest set size.
    #[arg(long, default_value_t = 3)]
    k: u32,
    /// Largest forbidden matching size.
    #[arg(long, default_value_t = 3)]
    s: u32,
    /// Draw the procedure's free choices at random.
    #[arg(long)]
    random_choices: bool,
    /// Re-run a single run index in full instead of the campaign.
    #[arg(long, value_name = "INDEX")]
    replay: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, hide = true, default_value = "none", value_parser = parse_fault)]
    fault: Fault,
}

fn parse_fault(text: &str) -> Result<Fault, String> {
    text.parse()
}

#[derive(Debug, PartialEq, Eq)]
enum Status {
    Clean,
    Violation,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = setup_workers().and_then(|()| match cli.command {
        Command::Lemmas(a) => cmd_lemmas(a),
        Command::Run(a) => cmd_run(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Bound(a) => cmd_bound(a),
        Command::Hunt(a) => cmd_hunt(a),
    });
    match result {
        Ok(Status::Clean) => ExitCode::SUCCESS,
        Ok(Status::Violation) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn setup_workers() -> Result<()> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let workers: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&w| w > 0)
        .with_context(|| format!("{WORKERS_ENV} must be a positive integer, got '{raw}'"))?;
    configure_workers(workers).map_err(anyhow::Error::msg)
}

/// Fails early when the output location cannot be written.
fn check_out(path: &Option<PathBuf>) -> Result<()> {
    if let Some(path) = path {
        let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if !parent.is_dir() {
            bail!("output directory {} does not exist", parent.display());
        }
        if path.is_dir() {
            bail!("{} is a directory", path.display());
        }
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn print_tallies(tallies: &Tallies) {
    println!("{:<32} {:>9} {:>8}", "claim", "checked", "failed");
    for (claim, t) in &tallies.0 {
        println!("{:<32} {:>9} {:>8}", claim.to_string(), t.checked, t.failed);
    }
}

fn cmd_lemmas(a: LemmasArgs) -> Result<Status> {
    check_out(&a.out)?;
    if a.n < 2 || a.k < 1 || a.n > 64 {
        bail!("need 2 <= n <= 64 and k >= 1");
    }
    let cfg = LemmaConfig {
        seed: a.seed,
        cases: a.count,
        trivial_cases: a.count,
        max_n: a.n,
        max_k: a.k,
        max_size: a.max_size,
        fault: a.fault,
        ..Default::default()
    };
    let report = lemma_suite(&cfg);
    if report.no_cases_run() {
        println!("no cases run");
    } else {
        println!(
            "seed {}: {} shift cases ({} shifts, {} all-subsets cross-checks), {} trivial cases",
            report.seed, report.cases, report.shifts_checked, report.naive_cross_checks, report.trivial_cases
        );
        let mix: Vec<String> = report.trivial_case_mix.iter().map(|(k, v)| format!("{k} {v}")).collect();
        if !mix.is_empty() {
            println!("trivial families: {}", mix.join(", "));
        }
        print_tallies(&report.tallies);
    }
    let evidence = a.out.clone().unwrap_or_else(|| PathBuf::from("lemmas-evidence.json"));
    if a.out.is_some() || !report.is_clean() {
        write_json(&evidence, &report)?;
    }
    if report.is_clean() {
        return Ok(Status::Clean);
    }
    for f in report.findings.iter().take(5) {
        println!("case {}: {}", f.case, f.violation);
    }
    println!("{} violations; evidence written to {}", report.tallies.failures(), evidence.display());
    Ok(Status::Violation)
}

fn describe(kind: &OutcomeKind) -> &'static str {
    match kind {
        OutcomeKind::SubsetOfGStar => "subset_of_g_star (ground set shrank below sk)",
        OutcomeKind::SubsetOfFStar => "subset_of_f_star (every member meets S)",
        OutcomeKind::ContradictionMatching { .. } => "contradiction_matching (every k-set meeting S is present)",
    }
}

fn print_outcome(o: &Outcome) {
    println!("termination: {}", describe(&o.kind));
    println!("|F| = {}, bound = {}, final n = {}", o.family_size, o.bound, o.final_n);
    let phi: Vec<String> = o.phi_history.iter().map(usize::to_string).collect();
    println!("potential: {}", phi.join(" -> "));
    println!("iterations: {}, compactions: {}", o.iterations.len(), o.compactions.len());
    for v in &o.violations {
        println!("violation: {v}");
    }
}

/// Runs the procedure and reports; shared by `run` and `hunt --replay`.
fn run_and_report(family: &SetFamily, config: &AlgorithmConfig, out: &Option<PathBuf>) -> Result<Status> {
    match run(family, config) {
        Ok(outcome) => {
            print_outcome(&outcome);
            if let Some(path) = out {
                write_json(path, &outcome)?;
            }
            Ok(if outcome.is_clean() { Status::Clean } else { Status::Violation })
        }
        Err(EmcError::ClaimViolation(v)) => {
            report_violation(&v, out)?;
            Ok(Status::Violation)
        }
        Err(EmcError::ForbiddenMatching { certificate }) => {
            bail!(
                "input rejected: {} pairwise disjoint members {certificate}",
                certificate.len()
            )
        }
        Err(e) => Err(e.into()),
    }
}

fn report_violation(v: &Violation, out: &Option<PathBuf>) -> Result<()> {
    println!("claim violated: {v}");
    match out {
        Some(path) => {
            write_json(path, v)?;
            println!("evidence written to {}", path.display());
        }
        None => println!("rerun with --out FILE to save the evidence"),
    }
    Ok(())
}

fn cmd_run(a: RunArgs) -> Result<Status> {
    check_out(&a.out)?;
    let text = fs::read_to_string(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let family = family_from_str(&text).with_context(|| format!("parsing {}", a.input.display()))?;
    let config = AlgorithmConfig {
        paranoid: a.paranoid,
        choices: a.seed.map_or(ChoiceRule::Least, ChoiceRule::Seeded),
        fault: a.fault,
    };
    run_and_report(&family, &config, &a.out)
}

#[derive(Serialize)]
struct OracleRow {
    n: u32,
    k: u32,
    s: u32,
    f: String,
    method: &'static str,
    bound: String,
    /// Empty when the search did not conclude.
    #[serde(rename = "match")]
    matches: Option<bool>,
    witness_file: String,
}

/// One row per method for `p`.
fn oracle_rows(p: Params, budget: u64, witness_dir: Option<&Path>) -> Result<Vec<OracleRow>> {
    let (expected, bound) = if p.in_theorem_range() {
        let b = emc_bound(p)?;
        (b, b.to_string())
    } else {
        (binomial(u64::from(p.n()), u64::from(p.k()))?, "n<sk: out of theorem scope".to_string())
    };
    let mut rows = Vec::new();
    for (method, result) in [("direct", f_direct(p, budget)), ("covering", f_covering(p, budget))] {
        let (f, matches, witness_file) = match result {
            Ok(r) => {
                let mut witness_file = String::new();
                if let Some(dir) = witness_dir {
                    let path = dir.join(format!("f_{}_{}_{}_{method}.json", p.n(), p.k(), p.s()));
                    write_json(&path, &r.witness)?;
                    witness_file = path.display().to_string();
                }
                (r.value.to_string(), Some(r.value == expected), witness_file)
            }
            Err(EmcError::Inconclusive { .. }) => ("inconclusive".to_string(), None, String::new()),
            Err(_) => ("n/a".to_string(), None, String::new()),
        };
        rows.push(OracleRow { n: p.n(), k: p.k(), s: p.s(), f, method, bound: bound.clone(), matches, witness_file });
    }
    Ok(rows)
}

fn cmd_oracle(a: OracleArgs) -> Result<Status> {
    check_out(&a.out)?;
    let ns = grid::parse_list(&a.n).context("--n")?;
    let ks = grid::parse_list(&a.k).context("--k")?;
    let ss = grid::parse_list(&a.s).context("--s")?;
    let mut grid = Vec::new();
    for &k in &ks {
        for &s in &ss {
            for &n in &ns {
                if k <= n {
                    grid.push(Params::new(n, k, s)?);
                }
            }
        }
    }
    if let Some(dir) = &a.witness_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let witness_dir = a.witness_dir.as_deref();
    let rows = map_indexed(Execution::default(), grid.len() as u64, |i| {
        oracle_rows(grid[i as usize], a.budget, witness_dir)
    });
    let rows: Vec<OracleRow> = rows.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();

    let sink: Box<dyn std::io::Write> = match &a.out {
        Some(path) => Box::new(fs::File::create(path).with_context(|| format!("creating {}", path.display()))?),
        None => Box::new(std::io::stdout()),
    };
    let mut writer = csv::Writer::from_writer(sink);
    for row in &rows {
        writer.serialize(row)?;
    }
    writer.flush()?;

    let count = |m: Option<bool>| rows.iter().filter(|r| r.matches == m).count();
    let mismatches = count(Some(false));
    eprintln!(
        "{} rows: {} match, {} mismatch, {} inconclusive or not applicable",
        rows.len(),
        count(Some(true)),
        mismatches,
        count(None)
    );
    Ok(if mismatches > 0 { Status::Violation } else { Status::Clean })
}

fn cmd_bound(a: BoundArgs) -> Result<Status> {
    check_out(&a.out)?;
    let p = Params::new(a.n, a.k, a.s)?;
    let total = binomial(u64::from(p.n()), u64::from(p.k()))?;
    println!("{p}");
    let summary = if p.in_theorem_range() {
        let clique = clique_size(p)?;
        let star = star_size(p)?;
        let bound = emc_bound(p)?;
        println!("clique: C({}, {}) = {clique}", p.s() * p.k() - 1, p.k());
        println!("star: C({}, {}) - C({}, {}) = {star}", p.n(), p.k(), p.n() + 1 - p.s(), p.k());
        println!("bound = {bound}");
        json!({ "n": p.n(), "k": p.k(), "s": p.s(), "in_scope": true, "clique": clique, "star": star, "bound": bound })
    } else {
        println!("n < sk: out of theorem scope; all {total} k-sets together have no {}-matching", p.s());
        json!({ "n": p.n(), "k": p.k(), "s": p.s(), "in_scope": false, "all_ksets": total })
    };
    if let Some(path) = &a.out {
        write_json(path, &summary)?;
    }
    Ok(Status::Clean)
}

fn cmd_hunt(a: HuntArgs) -> Result<Status> {
    check_out(&a.out)?;
    if a.k < 1 || a.s < 1 || a.n > 64 || a.s * a.k > a.n {
        bail!("need k, s >= 1 and s * k <= n <= 64");
    }
    let cfg = HuntConfig {
        seed: a.seed,
        runs: a.count,
        max_n: a.n,
        max_k: a.k,
        max_s: a.s,
        paranoid: true,
        random_choices: a.random_choices,
        fault: a.fault,
        execution: Execution::default(),
    };
    if let Some(index) = a.replay {
        let (family, choice_seed) = hunt_input(&cfg, index);
        println!("run {index}: {} with {} sets", family.params(), family.len());
        let config = AlgorithmConfig {
            paranoid: true,
            choices: choice_seed.map_or(ChoiceRule::Least, ChoiceRule::Seeded),
            fault: cfg.fault,
        };
        return run_and_report(&family, &config, &a.out);
    }

    let report = hunt(&cfg);
    println!(
        "seed {}: {} runs (n <= {}, k <= {}, s <= {}), paranoid{}",
        cfg.seed,
        cfg.runs,
        cfg.max_n,
        cfg.max_k,
        cfg.max_s,
        if cfg.random_choices { ", random choices" } else { "" }
    );
    let kinds: Vec<String> = report.kinds.iter().map(|(k, v)| format!("{k} {v}")).collect();
    println!("terminated: {}; aborted on a failed check: {}", kinds.join(", "), report.aborted);
    println!("iterations: {} total, {} max", report.total_iterations, report.max_iterations);
    print_tallies(&report.tallies);
    for f in report.findings.iter().take(5) {
        println!("run {} {}: {}", f.index, f.params, f.violation);
        println!(
            "  replay: emc-lab hunt --seed {} --n {} --k {} --s {}{} --replay {}",
            cfg.seed,
            cfg.max_n,
            cfg.max_k,
            cfg.max_s,
            if cfg.random_choices { " --random-choices" } else { "" },
            f.index
        );
    }
    if let Some(path) = &a.out {
        write_json(path, &report)?;
    }
    Ok(if report.is_clean() { Status::Clean } else { Status::Violation })
}
