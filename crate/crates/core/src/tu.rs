//! Transferable-utility detection, subproblems with reservation utilities,
//! exchangeability, and explicit non-exchangeable constructions.
//!
//! With odds ratios `omega = lambda / (1 - lambda)`, a problem can be
//! rescaled to TU form exactly when every cross ratio
//! `omega[x][y] omega[x'][y'] / (omega[x'][y] omega[x][y'])` equals one.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{LtuProblem, Outcome, Population, SubproblemSpec};
use crate::rational::{self, serde_matrix, serde_scalar, serde_vec, Rational};
use crate::stability::{verify_stable, StabilityReport};

pub fn omega(problem: &LtuProblem) -> Vec<Vec<Rational>> {
    problem
        .lambda()
        .iter()
        .map(|row| row.iter().map(|l| l / (Rational::one() - l)).collect())
        .collect()
}

/// Two worker types and two job types, by index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Quadruple {
    pub x: usize,
    pub x2: usize,
    pub y: usize,
    pub y2: usize,
}

impl Quadruple {
    pub fn new(x: usize, x2: usize, y: usize, y2: usize) -> Self {
        Quadruple { x, x2, y, y2 }
    }

    fn check(&self, problem: &LtuProblem) -> Result<()> {
        for (what, index, len) in [
            ("workers", self.x, problem.num_workers()),
            ("workers", self.x2, problem.num_workers()),
            ("jobs", self.y, problem.num_jobs()),
            ("jobs", self.y2, problem.num_jobs()),
        ] {
            if index >= len {
                return Err(Error::IndexOutOfRange { what, index, len });
            }
        }
        Ok(())
    }
}

pub fn cross_ratio(omega: &[Vec<Rational>], q: Quadruple) -> Rational {
    &omega[q.x][q.y] * &omega[q.x2][q.y2] / (&omega[q.x2][q.y] * &omega[q.x][q.y2])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TuWitness {
    /// Scalings with `a_x / (a_x + b_y) = lambda_xy` and outputs `(a_x + b_y) phi / 2`.
    Tu {
        #[serde(with = "serde_vec")]
        a: Vec<Rational>,
        #[serde(with = "serde_vec")]
        b: Vec<Rational>,
        #[serde(with = "serde_matrix")]
        phi_tilde: Vec<Vec<Rational>>,
    },
    NotTu {
        quadruple: Quadruple,
        #[serde(with = "serde_scalar")]
        rho: Rational,
    },
}

impl TuWitness {
    pub fn is_tu(&self) -> bool {
        matches!(self, TuWitness::Tu { .. })
    }
}

/// Scans cross ratios anchored at the first worker and first job; the
/// anchored ratios all equal one exactly when every cross ratio does.
pub fn check_tu(problem: &LtuProblem) -> TuWitness {
    let w = omega(problem);
    for x in 1..problem.num_workers() {
        for y in 1..problem.num_jobs() {
            let quadruple = Quadruple::new(0, x, 0, y);
            let rho = cross_ratio(&w, quadruple);
            if !rho.is_one() {
                return TuWitness::NotTu { quadruple, rho };
            }
        }
    }
    let a: Vec<Rational> = (0..problem.num_workers())
        .map(|x| &w[x][0] / &w[0][0])
        .collect();
    let b: Vec<Rational> = (0..problem.num_jobs()).map(|y| w[0][y].recip()).collect();
    let phi_tilde = rescaled_outputs(problem, &a, &b);
    TuWitness::Tu { a, b, phi_tilde }
}

fn rescaled_outputs(problem: &LtuProblem, a: &[Rational], b: &[Rational]) -> Vec<Vec<Rational>> {
    let two = rational::int(2);
    (0..problem.num_workers())
        .map(|x| {
            (0..problem.num_jobs())
                .map(|y| (&a[x] + &b[y]) * &problem.phi()[x][y] / &two)
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TuRescaling {
    #[serde(with = "serde_vec")]
    pub a: Vec<Rational>,
    #[serde(with = "serde_vec")]
    pub b: Vec<Rational>,
    #[serde(with = "serde_matrix")]
    pub phi_tilde: Vec<Vec<Rational>>,
}

impl TuRescaling {
    /// `phi_tilde^T mu`, the total output in rescaled units.
    pub fn total_output(&self, mu: &[Vec<Rational>]) -> Rational {
        mu.iter()
            .zip(&self.phi_tilde)
            .fold(Rational::zero(), |acc, (m, p)| acc + rational::dot(m, p))
    }
}

/// Checks a TU witness against the problem and returns its scalings.
pub fn rescale_to_tu(problem: &LtuProblem, witness: &TuWitness) -> Result<TuRescaling> {
    let TuWitness::Tu { a, b, .. } = witness else {
        return Err(Error::NotTu);
    };
    if a.len() != problem.num_workers() || b.len() != problem.num_jobs() {
        return Err(Error::DimensionMismatch(
            "scalings do not match the problem".into(),
        ));
    }
    for x in 0..problem.num_workers() {
        for y in 0..problem.num_jobs() {
            if &a[x] / (&a[x] + &b[y]) != problem.lambda()[x][y] {
                return Err(Error::NotTu);
            }
        }
    }
    Ok(TuRescaling {
        a: a.clone(),
        b: b.clone(),
        phi_tilde: rescaled_outputs(problem, a, b),
    })
}

/// A subproblem and its zero-reservation equivalent. Folded utilities are
/// `u - reservation`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subproblem {
    pub spec: SubproblemSpec,
    pub folded: LtuProblem,
}

impl Subproblem {
    /// Utilities measured from zero, from folded ones.
    pub fn unfold(&self, outcome: &Outcome) -> Outcome {
        Outcome {
            mu: outcome.mu.clone(),
            u: outcome
                .u
                .iter()
                .zip(&self.spec.worker_reservation)
                .map(|(u, r)| u + r)
                .collect(),
            v: outcome
                .v
                .iter()
                .zip(&self.spec.job_reservation)
                .map(|(v, r)| v + r)
                .collect(),
        }
    }

    pub fn fold(&self, outcome: &Outcome) -> Outcome {
        Outcome {
            mu: outcome.mu.clone(),
            u: outcome
                .u
                .iter()
                .zip(&self.spec.worker_reservation)
                .map(|(u, r)| u - r)
                .collect(),
            v: outcome
                .v
                .iter()
                .zip(&self.spec.job_reservation)
                .map(|(v, r)| v - r)
                .collect(),
        }
    }
}

/// Restricts the parent and folds reservations into the outputs:
/// `phi' = phi - 2 (lambda ures + (1 - lambda) vres)`.
pub fn make_subproblem(spec: &SubproblemSpec) -> Result<Subproblem> {
    if spec.workers.is_empty() {
        return Err(Error::EmptyTypeSet("worker"));
    }
    if spec.jobs.is_empty() {
        return Err(Error::EmptyTypeSet("job"));
    }
    let parent = &spec.parent;
    for (what, list, len) in [
        ("workers", &spec.workers, parent.num_workers()),
        ("jobs", &spec.jobs, parent.num_jobs()),
    ] {
        if let Some(&index) = list.iter().find(|&&i| i >= len) {
            return Err(Error::IndexOutOfRange { what, index, len });
        }
    }
    if spec.worker_mass.len() != spec.workers.len()
        || spec.job_mass.len() != spec.jobs.len()
        || spec.worker_reservation.len() != spec.workers.len()
        || spec.job_reservation.len() != spec.jobs.len()
    {
        return Err(Error::DimensionMismatch(
            "subproblem masses and reservations must match its type lists".into(),
        ));
    }
    let population = Population::new(
        spec.workers
            .iter()
            .map(|&x| parent.workers()[x].clone())
            .collect(),
        spec.jobs
            .iter()
            .map(|&y| parent.jobs()[y].clone())
            .collect(),
        spec.worker_mass.clone(),
        spec.job_mass.clone(),
    )?;
    let two = rational::int(2);
    let mut lambda = Vec::with_capacity(spec.workers.len());
    let mut phi = Vec::with_capacity(spec.workers.len());
    for (i, &x) in spec.workers.iter().enumerate() {
        let mut lrow = Vec::with_capacity(spec.jobs.len());
        let mut prow = Vec::with_capacity(spec.jobs.len());
        for (j, &y) in spec.jobs.iter().enumerate() {
            let shift =
                parent.pair_value(x, y, &spec.worker_reservation[i], &spec.job_reservation[j]);
            lrow.push(parent.lambda()[x][y].clone());
            prow.push(&parent.phi()[x][y] - &two * shift);
        }
        lambda.push(lrow);
        phi.push(prow);
    }
    Ok(Subproblem {
        spec: spec.clone(),
        folded: LtuProblem::new(population, lambda, phi)?,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExchangeReport {
    /// Matching of the second outcome with utilities of the first.
    pub second_matching_first_utilities: StabilityReport,
    /// Matching of the first outcome with utilities of the second.
    pub first_matching_second_utilities: StabilityReport,
}

impl ExchangeReport {
    pub fn exchangeable(&self) -> bool {
        self.second_matching_first_utilities.stable && self.first_matching_second_utilities.stable
    }
}

pub fn exchange_test(
    problem: &LtuProblem,
    first: &Outcome,
    second: &Outcome,
) -> Result<ExchangeReport> {
    if !verify_stable(problem, first)?.stable {
        return Err(Error::InputNotStable("first"));
    }
    if !verify_stable(problem, second)?.stable {
        return Err(Error::InputNotStable("second"));
    }
    let swap = |mu: &Outcome, utilities: &Outcome| Outcome {
        mu: mu.mu.clone(),
        u: utilities.u.clone(),
        v: utilities.v.clone(),
    };
    Ok(ExchangeReport {
        second_matching_first_utilities: verify_stable(problem, &swap(second, first))?,
        first_matching_second_utilities: verify_stable(problem, &swap(first, second))?,
    })
}

/// A 2x2 subproblem with two stable outcomes that cannot be exchanged.
/// Outcomes are in folded (zero-reservation) coordinates of `subproblem.folded`.
#[derive(Clone, Debug)]
pub struct Counterexample {
    /// Cross ratio at the requested quadruple.
    pub rho: Rational,
    /// Cross ratio after orienting the job pair so it exceeds one.
    pub working_rho: Rational,
    pub jobs_swapped: bool,
    /// Effective rescaled outputs for pairs 11, 12, 21, 22 of the subproblem.
    pub targets: [Rational; 4],
    pub subproblem: Subproblem,
    pub black: Outcome,
    pub white: Outcome,
    pub black_report: StabilityReport,
    pub white_report: StabilityReport,
    pub exchange: ExchangeReport,
}

/// Effective rescaled outputs `(11, 12, 21, 22)` realizing
/// `0 < t12 < t22 < t21 = t11 < rho t12` for a cross ratio `rho > 1`.
pub fn counterexample_targets(rho: &Rational) -> [Rational; 4] {
    let one = Rational::one();
    let two = rational::int(2);
    if rho > &two {
        let high = &one + rho / &two;
        [
            high.clone(),
            one.clone(),
            high,
            &one + rho / rational::int(4),
        ]
    } else {
        let high = (&one + rho) / &two;
        [
            high.clone(),
            one,
            high,
            (rational::int(3) + rho) / rational::int(4),
        ]
    }
}

pub fn build_counterexample(problem: &LtuProblem, quadruple: Quadruple) -> Result<Counterexample> {
    quadruple.check(problem)?;
    let w = omega(problem);
    let rho = cross_ratio(&w, quadruple);
    if rho.is_one() || quadruple.x == quadruple.x2 || quadruple.y == quadruple.y2 {
        return Err(Error::IsTu);
    }
    let jobs_swapped = rho < Rational::one();
    let q = if jobs_swapped {
        Quadruple::new(quadruple.x, quadruple.x2, quadruple.y2, quadruple.y)
    } else {
        quadruple
    };
    let working_rho = cross_ratio(&w, q);
    let xs = [q.x, q.x2];
    let ys = [q.y, q.y2];
    let (w11, w21, w22) = (&w[q.x][q.y], &w[q.x2][q.y], &w[q.x2][q.y2]);

    // Divide pair constraints by (1 - lambda) and by the job-side scale so they
    // read u1~ + v1~, u1~ / rho + v2~, u2~ + v1~, u2~ + v2~.
    let job_scale = [w21.clone(), w22.clone()];
    let two = rational::int(2);
    let base = |i: usize, j: usize| {
        let (x, y) = (xs[i], ys[j]);
        &problem.phi()[x][y] / (&two * (Rational::one() - &problem.lambda()[x][y]) * &job_scale[j])
    };
    let targets = counterexample_targets(&working_rho);
    let inv_rho = working_rho.recip();
    let (z, o) = (Rational::zero(), Rational::one());
    // Unknowns: rescaled reservations (u1, u2, v1, v2).
    let system = vec![
        vec![o.clone(), z.clone(), o.clone(), z.clone()],
        vec![inv_rho, z.clone(), z.clone(), o.clone()],
        vec![z.clone(), o.clone(), o.clone(), z.clone()],
        vec![z.clone(), o.clone(), z.clone(), o.clone()],
    ];
    let rhs = vec![
        base(0, 0) - &targets[0],
        base(0, 1) - &targets[1],
        base(1, 0) - &targets[2],
        base(1, 1) - &targets[3],
    ];
    let res = linalg::solve(system, rhs)
        .ok_or_else(|| Error::Internal("reservation system is singular for rho != 1".into()))?;

    let worker_scale = [w21 / w11, Rational::one()];
    let spec = SubproblemSpec {
        parent: problem.clone(),
        workers: xs.to_vec(),
        jobs: ys.to_vec(),
        worker_mass: vec![Rational::one(); 2],
        job_mass: vec![Rational::one(); 2],
        worker_reservation: vec![&res[0] * &worker_scale[0], &res[1] * &worker_scale[1]],
        job_reservation: vec![&res[2] * &job_scale[0], &res[3] * &job_scale[1]],
    };
    let subproblem = make_subproblem(&spec)?;

    let to_original = |u: [Rational; 2], v: [Rational; 2], mu: [[i64; 2]; 2]| Outcome {
        mu: mu
            .iter()
            .map(|row| row.iter().map(|&m| rational::int(m)).collect())
            .collect(),
        u: vec![&u[0] * &worker_scale[0], &u[1] * &worker_scale[1]],
        v: vec![&v[0] * &job_scale[0], &v[1] * &job_scale[1]],
    };
    let black = to_original(
        [&working_rho * &targets[1], targets[2].clone()],
        [Rational::zero(), Rational::zero()],
        [[0, 1], [1, 0]],
    );
    let white = to_original(
        [Rational::zero(), Rational::zero()],
        [targets[2].clone(), targets[3].clone()],
        [[1, 0], [0, 1]],
    );

    let folded = &subproblem.folded;
    let black_report = verify_stable(folded, &black)?;
    let white_report = verify_stable(folded, &white)?;
    if !black_report.stable || !white_report.stable {
        return Err(Error::Internal("constructed outcome is not stable".into()));
    }
    let exchange = exchange_test(folded, &black, &white)?;
    if exchange.first_matching_second_utilities.stable {
        return Err(Error::Internal(
            "constructed outcomes are exchangeable".into(),
        ));
    }
    Ok(Counterexample {
        rho,
        working_rho,
        jobs_swapped,
        targets,
        subproblem,
        black,
        white,
        black_report,
        white_report,
        exchange,
    })
}
