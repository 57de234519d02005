use std::collections::BTreeSet;
use std::path::Path;

use ltumatch::fuzz::{FuzzConfig, InstanceGenerator};
use ltumatch::model::ValidateOptions;
use ltumatch::oracle::OracleCaps;
use ltumatch::rational::{self, Rational};
use ltumatch::tu::Quadruple;
use ltumatch::{
    blocking_pairs, build_counterexample, check_tu, enumerate_equilibria, enumerate_stable,
    equilibrium_to_outcome, equilibrium_to_outcome_n, exchange_test, induced_pattern,
    is_equilibrium, lemke_howson_with, normalize_outputs, outcome_to_equilibrium, rescale_to_tu,
    to_game, to_game_n, verify_stable, verify_stable_m2o, BimatrixGame, EnumerationOptions,
    EquilibriumCertificate, Error, LemkeHowsonOptions, LtuProblem, ManyToOneOutcome,
    ManyToOneProblem, MixedProfile, Outcome, StabilityReport, TuWitness,
};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::args::{CapArgs, LabelArgs};

/// Why a command did not succeed. A negative verdict still carries its result.
#[derive(Debug)]
pub enum Failure {
    Negative(Value),
    /// Invariant breach found while checking; exits like an internal error.
    Breach(Value),
    Input(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        match err {
            Error::Internal(_) | Error::RayTermination { .. } | Error::IterationLimit(_) => {
                Failure::Internal(err.to_string())
            }
            other => Failure::Input(other.to_string()),
        }
    }
}

pub type CommandResult = Result<Value, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_problem(path: &Path, for_reduction: bool) -> Result<LtuProblem, Failure> {
    let options = if for_reduction {
        ValidateOptions::for_reduction()
    } else {
        ValidateOptions::default()
    };
    Ok(LtuProblem::from_json(&read(path)?, options)?)
}

fn load_m2o(path: &Path) -> Result<ManyToOneProblem, Failure> {
    Ok(ManyToOneProblem::from_json(&read(path)?)?)
}

fn to_value<T: serde::Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("library types serialize")
}

fn vec_value(values: &[Rational]) -> Value {
    values.iter().map(rational::format).collect()
}

fn matrix_value(rows: &[Vec<Rational>]) -> Value {
    rows.iter().map(|row| vec_value(row)).collect()
}

fn report_value(report: &StabilityReport) -> Value {
    let messages: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
    json!({
        "stable": report.stable,
        "violations": to_value(&report.violations),
        "messages": messages,
    })
}

fn labels_to_run(game: &BimatrixGame, labels: &LabelArgs) -> Result<Vec<usize>, Failure> {
    let total = game.num_rows() + game.num_cols();
    if labels.all_labels {
        return Ok((0..total).collect());
    }
    if labels.label >= total {
        return Err(Failure::Input(format!(
            "label {} out of range, the game has {total} labels",
            labels.label
        )));
    }
    Ok(vec![labels.label])
}

/// Runs Lemke-Howson from each label and groups labels by the equilibrium reached.
fn solve_game(
    game: &BimatrixGame,
    labels: &LabelArgs,
) -> Result<Vec<(Vec<usize>, EquilibriumCertificate)>, Failure> {
    let options = LemkeHowsonOptions {
        max_pivots: labels.max_pivots,
    };
    let mut found: Vec<(Vec<usize>, EquilibriumCertificate)> = Vec::new();
    for label in labels_to_run(game, labels)? {
        let cert = lemke_howson_with(game, label, options)?.certificate;
        match found.iter_mut().find(|(_, c)| c.profile == cert.profile) {
            Some((group, _)) => group.push(label),
            None => found.push((vec![label], cert)),
        }
    }
    Ok(found)
}

fn single_or_all(solutions: Vec<Value>, all_labels: bool) -> Value {
    if all_labels {
        json!({ "solutions": solutions })
    } else {
        solutions.into_iter().next().expect("one label was run")
    }
}

pub fn solve(path: &Path, labels: &LabelArgs) -> CommandResult {
    let problem = load_problem(path, true)?;
    let game = to_game(&problem)?;
    let mut solutions = Vec::new();
    for (group, cert) in solve_game(&game, labels)? {
        let outcome = equilibrium_to_outcome(&problem, &cert.profile)?;
        let report = verify_stable(&problem, &outcome)?;
        if !report.stable {
            return Err(Failure::Internal(format!(
                "solution from labels {group:?} failed verification"
            )));
        }
        solutions.push(json!({
            "labels": group,
            "outcome": to_value(&outcome),
            "certificate": to_value(&cert),
            "report": report_value(&report),
        }));
    }
    Ok(single_or_all(solutions, labels.all_labels))
}

pub fn verify(problem_path: &Path, outcome_path: &Path) -> CommandResult {
    let problem = load_problem(problem_path, false)?;
    let outcome: Outcome = read_json(outcome_path)?;
    let report = verify_stable(&problem, &outcome)?;
    let blocking = blocking_pairs(&problem, &outcome)?;
    let value = json!({
        "report": report_value(&report),
        "blocking_pairs": blocking
            .iter()
            .map(|b| json!({
                "x": problem.workers()[b.x],
                "y": problem.jobs()[b.y],
                "deficit": rational::format(&b.deficit),
            }))
            .collect::<Vec<_>>(),
    });
    if report.stable {
        Ok(value)
    } else {
        Err(Failure::Negative(value))
    }
}

pub fn to_game_cmd(path: &Path) -> CommandResult {
    let problem = load_problem(path, true)?;
    Ok(to_value(&to_game(&problem)?))
}

pub fn from_eq(problem_path: &Path, profile_path: &Path) -> CommandResult {
    let problem = load_problem(problem_path, true)?;
    let profile: MixedProfile = read_json(profile_path)?;
    match equilibrium_to_outcome(&problem, &profile) {
        Ok(outcome) => {
            let report = verify_stable(&problem, &outcome)?;
            Ok(json!({ "outcome": to_value(&outcome), "report": report_value(&report) }))
        }
        Err(Error::NotAnEquilibrium(dev)) => Err(Failure::Negative(json!({
            "equilibrium": false,
            "deviation": to_value(&*dev),
            "message": dev.to_string(),
        }))),
        Err(other) => Err(other.into()),
    }
}

fn quadruple_value(problem: &LtuProblem, q: Quadruple) -> Value {
    json!({
        "x": problem.workers()[q.x],
        "x2": problem.workers()[q.x2],
        "y": problem.jobs()[q.y],
        "y2": problem.jobs()[q.y2],
    })
}

fn witness_value(problem: &LtuProblem, witness: &TuWitness) -> Value {
    match witness {
        TuWitness::Tu { a, b, phi_tilde } => json!({
            "is_tu": true,
            "worker_scale": vec_value(a),
            "job_scale": vec_value(b),
            "phi_tilde": matrix_value(phi_tilde),
        }),
        TuWitness::NotTu { quadruple, rho } => json!({
            "is_tu": false,
            "rho": rational::format(rho),
            "quadruple": quadruple_value(problem, *quadruple),
        }),
    }
}

pub fn check_tu_cmd(path: &Path) -> CommandResult {
    let problem = load_problem(path, false)?;
    Ok(witness_value(&problem, &check_tu(&problem)))
}

pub fn rescale_tu(path: &Path) -> CommandResult {
    let problem = load_problem(path, false)?;
    let witness = check_tu(&problem);
    match rescale_to_tu(&problem, &witness) {
        Ok(rescaling) => Ok(to_value(&rescaling)),
        Err(Error::NotTu) => Err(Failure::Negative(witness_value(&problem, &witness))),
        Err(other) => Err(other.into()),
    }
}

pub fn exchange(problem_path: &Path, first: &Path, second: &Path) -> CommandResult {
    let problem = load_problem(problem_path, false)?;
    let first: Outcome = read_json(first)?;
    let second: Outcome = read_json(second)?;
    let report = exchange_test(&problem, &first, &second)?;
    let value = json!({
        "exchangeable": report.exchangeable(),
        "second_matching_first_utilities": report_value(&report.second_matching_first_utilities),
        "first_matching_second_utilities": report_value(&report.first_matching_second_utilities),
    });
    if report.exchangeable() {
        Ok(value)
    } else {
        Err(Failure::Negative(value))
    }
}

fn parse_quadruple(problem: &LtuProblem, ids: &[String]) -> Result<Quadruple, Failure> {
    let worker = |id: &str| {
        problem
            .worker_index(id)
            .ok_or_else(|| Failure::Input(format!("unknown worker id {id:?}")))
    };
    let job = |id: &str| {
        problem
            .job_index(id)
            .ok_or_else(|| Failure::Input(format!("unknown job id {id:?}")))
    };
    Ok(Quadruple::new(
        worker(&ids[0])?,
        worker(&ids[1])?,
        job(&ids[2])?,
        job(&ids[3])?,
    ))
}

pub fn counterexample(path: &Path, quadruple: Option<&[String]>) -> CommandResult {
    let problem = load_problem(path, false)?;
    let quadruple = match quadruple {
        Some(ids) => parse_quadruple(&problem, ids)?,
        None => match check_tu(&problem) {
            TuWitness::NotTu { quadruple, .. } => quadruple,
            witness @ TuWitness::Tu { .. } => {
                return Err(Failure::Negative(witness_value(&problem, &witness)))
            }
        },
    };
    let ce = match build_counterexample(&problem, quadruple) {
        Ok(ce) => ce,
        Err(Error::IsTu) => {
            return Err(Failure::Negative(json!({
                "rho": "1",
                "quadruple": quadruple_value(&problem, quadruple),
            })))
        }
        Err(other) => return Err(other.into()),
    };
    if !ce.black_report.stable || !ce.white_report.stable || ce.exchange.exchangeable() {
        return Err(Failure::Internal(
            "constructed outcomes do not form a counterexample".into(),
        ));
    }
    let spec = &ce.subproblem.spec;
    Ok(json!({
        "rho": rational::format(&ce.rho),
        "working_rho": rational::format(&ce.working_rho),
        "jobs_swapped": ce.jobs_swapped,
        "quadruple": quadruple_value(&problem, quadruple),
        "targets": vec_value(&ce.targets),
        "subproblem": {
            "workers": spec.workers.iter().map(|&x| problem.workers()[x].clone()).collect::<Vec<_>>(),
            "jobs": spec.jobs.iter().map(|&y| problem.jobs()[y].clone()).collect::<Vec<_>>(),
            "worker_reservation": vec_value(&spec.worker_reservation),
            "job_reservation": vec_value(&spec.job_reservation),
            "folded": to_value(&ce.subproblem.folded.to_file()),
        },
        "black": to_value(&ce.black),
        "white": to_value(&ce.white),
        "black_report": report_value(&ce.black_report),
        "white_report": report_value(&ce.white_report),
        "exchangeable": false,
    }))
}

fn oracle_caps(caps: &CapArgs) -> OracleCaps {
    OracleCaps {
        max_pairs: caps.max_pairs,
        max_types: caps.max_types,
    }
}

pub fn oracle(path: &Path, caps: &CapArgs) -> CommandResult {
    let problem = load_problem(path, false)?;
    let reps = enumerate_stable(&problem, oracle_caps(caps))?;
    Ok(json!({ "count": reps.len(), "representatives": to_value(&reps) }))
}

pub fn solve_m2o(path: &Path, labels: &LabelArgs) -> CommandResult {
    let problem = load_m2o(path)?;
    let (shifted, shift) = normalize_outputs(&problem);
    let game = to_game_n(&shifted)?;
    let mut solutions = Vec::new();
    for (group, cert) in solve_game(&game, labels)? {
        let moved = equilibrium_to_outcome_n(&shifted, &cert.profile)?;
        let outcome = ManyToOneOutcome {
            mu: moved.mu,
            u: moved.u.iter().map(|u| u - &shift).collect(),
        };
        let report = verify_stable_m2o(&problem, &outcome)?;
        if !report.stable {
            return Err(Failure::Internal(format!(
                "solution from labels {group:?} failed verification"
            )));
        }
        solutions.push(json!({
            "labels": group,
            "shift": rational::format(&shift),
            "outcome": to_value(&outcome),
            "certificate": to_value(&cert),
            "report": report_value(&report),
        }));
    }
    Ok(single_or_all(solutions, labels.all_labels))
}

pub fn verify_m2o(problem_path: &Path, outcome_path: &Path) -> CommandResult {
    let problem = load_m2o(problem_path)?;
    let outcome: ManyToOneOutcome = read_json(outcome_path)?;
    let report = verify_stable_m2o(&problem, &outcome)?;
    let value = json!({ "report": report_value(&report) });
    if report.stable {
        Ok(value)
    } else {
        Err(Failure::Negative(value))
    }
}

pub struct FuzzArgs {
    pub seed: u64,
    pub count: usize,
    pub config: FuzzConfig,
    pub budget: u128,
    pub caps: OracleCaps,
}

#[derive(Default)]
struct FuzzTally {
    lh_runs: usize,
    equilibria: usize,
    oracle_outcomes: usize,
    oracle_skipped: usize,
    enumeration_skipped: usize,
}

/// Full pipeline plus oracle cross-check on one instance; returns discrepancies.
fn fuzz_instance(
    problem: &LtuProblem,
    args: &FuzzArgs,
    tally: &mut FuzzTally,
) -> Result<Vec<String>, Error> {
    let mut issues = Vec::new();
    let game = to_game(problem)?;
    for label in 0..game.num_rows() + game.num_cols() {
        tally.lh_runs += 1;
        let cert = lemke_howson_with(&game, label, LemkeHowsonOptions::default())?.certificate;
        let outcome = equilibrium_to_outcome(problem, &cert.profile)?;
        if !verify_stable(problem, &outcome)?.stable {
            issues.push(format!("label {label}: outcome fails verification"));
        }
        if outcome_to_equilibrium(problem, &outcome)? != cert.profile {
            issues.push(format!("label {label}: round trip changes the profile"));
        }
    }

    let options = EnumerationOptions {
        budget: args.budget,
        ..EnumerationOptions::full(&game)
    };
    let mut enumerated = BTreeSet::new();
    match enumerate_equilibria(&game, options) {
        Ok(certs) => {
            for cert in certs {
                tally.equilibria += 1;
                let outcome = equilibrium_to_outcome(problem, &cert.profile)?;
                if !verify_stable(problem, &outcome)?.stable {
                    issues.push("enumerated equilibrium maps to an unstable outcome".into());
                }
                enumerated.insert(induced_pattern(&outcome));
            }
        }
        Err(Error::BudgetExceeded { .. }) => tally.enumeration_skipped += 1,
        Err(other) => return Err(other),
    }

    match enumerate_stable(problem, args.caps) {
        Ok(reps) => {
            let patterns: BTreeSet<_> = reps.iter().map(|r| r.pattern.clone()).collect();
            for rep in &reps {
                tally.oracle_outcomes += 1;
                let profile = outcome_to_equilibrium(problem, &rep.outcome)?;
                if !is_equilibrium(&game, &profile)?.is_accepted() {
                    issues.push(format!(
                        "oracle outcome with pattern {:?} is not an equilibrium",
                        rep.pattern
                    ));
                }
            }
            for pattern in enumerated.difference(&patterns) {
                issues.push(format!(
                    "oracle misses the pattern {pattern:?} of an enumerated equilibrium"
                ));
            }
        }
        Err(Error::CapExceeded { .. }) => tally.oracle_skipped += 1,
        Err(other) => return Err(other),
    }
    Ok(issues)
}

pub fn fuzz(args: &FuzzArgs) -> CommandResult {
    let mut generator = InstanceGenerator::new(args.seed, args.config);
    let mut tally = FuzzTally::default();
    let mut discrepancies = Vec::new();
    for index in 0..args.count {
        let problem = generator.ltu();
        log::info!(
            "instance {index}: {}x{}",
            problem.num_workers(),
            problem.num_jobs()
        );
        let issues =
            fuzz_instance(&problem, args, &mut tally).unwrap_or_else(|err| vec![err.to_string()]);
        for issue in issues {
            discrepancies.push(json!({
                "instance": index,
                "issue": issue,
                "problem": to_value(&problem.to_file()),
            }));
        }
    }
    let value = json!({
        "seed": args.seed,
        "instances": args.count,
        "lh_runs": tally.lh_runs,
        "equilibria": tally.equilibria,
        "oracle_outcomes": tally.oracle_outcomes,
        "enumeration_skipped": tally.enumeration_skipped,
        "oracle_skipped": tally.oracle_skipped,
        "discrepancies": discrepancies,
    });
    if value["discrepancies"]
        .as_array()
        .is_some_and(|d| d.is_empty())
    {
        Ok(value)
    } else {
        Err(Failure::Breach(value))
    }
}
