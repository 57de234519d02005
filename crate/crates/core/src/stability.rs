//! Exact stability checks with per-violation diagnostics.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{LtuProblem, ManyToOneOutcome, ManyToOneProblem, Outcome};
use crate::rational::{self, serde_scalar, Rational};

/// Which stability condition a violation breaks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Condition {
    /// `lambda u + (1 - lambda) v >= phi / 2`.
    #[serde(rename = "1")]
    NoBlockingPair,
    /// Worker row sum at most its mass.
    #[serde(rename = "2")]
    WorkerCapacity,
    /// Job column sum at most its mass.
    #[serde(rename = "3")]
    JobCapacity,
    /// Matched pairs meet their constraint with equality.
    #[serde(rename = "4")]
    Binding,
    /// Workers with positive utility are fully matched.
    #[serde(rename = "5")]
    WorkerSaturation,
    /// Jobs with positive utility are fully matched.
    #[serde(rename = "6")]
    JobSaturation,
    #[serde(rename = "nonnegativity")]
    Nonnegativity,
    /// Many-to-one: each type's mass is used exactly.
    #[serde(rename = "feasibility")]
    Feasibility,
    /// Many-to-one: no arrangement blocks.
    #[serde(rename = "no-block")]
    NoBlock,
    /// Many-to-one: formed arrangements bind.
    #[serde(rename = "binding")]
    ArrangementBinding,
}

impl Condition {
    pub fn id(self) -> &'static str {
        match self {
            Condition::NoBlockingPair => "1",
            Condition::WorkerCapacity => "2",
            Condition::JobCapacity => "3",
            Condition::Binding => "4",
            Condition::WorkerSaturation => "5",
            Condition::JobSaturation => "6",
            Condition::Nonnegativity => "nonnegativity",
            Condition::Feasibility => "feasibility",
            Condition::NoBlock => "no-block",
            Condition::ArrangementBinding => "binding",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Location {
    Pair {
        x: usize,
        y: usize,
    },
    Worker {
        x: usize,
    },
    Job {
        y: usize,
    },
    Arrangement {
        a: usize,
    },
    Type {
        x: usize,
    },
    /// An entry of `mu` (one-to-one).
    Match {
        x: usize,
        y: usize,
    },
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Pair { x, y } => write!(f, "pair ({},{})", x + 1, y + 1),
            Location::Match { x, y } => write!(f, "mu ({},{})", x + 1, y + 1),
            Location::Worker { x } => write!(f, "worker {}", x + 1),
            Location::Job { y } => write!(f, "job {}", y + 1),
            Location::Arrangement { a } => write!(f, "arrangement {}", a + 1),
            Location::Type { x } => write!(f, "type {}", x + 1),
        }
    }
}

/// One failed condition with the two sides that were compared. For
/// implications (binding, saturation) `lhs`/`rhs` are the sides of the
/// consequent that failed to be equal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub condition: Condition,
    pub location: Location,
    #[serde(with = "serde_scalar")]
    pub lhs: Rational,
    #[serde(with = "serde_scalar")]
    pub rhs: Rational,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "condition {} at {}: lhs {} rhs {}",
            self.condition.id(),
            self.location,
            rational::format(&self.lhs),
            rational::format(&self.rhs)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub stable: bool,
    pub violations: Vec<Violation>,
}

impl StabilityReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        StabilityReport {
            stable: violations.is_empty(),
            violations,
        }
    }

    pub fn violates(&self, condition: Condition) -> bool {
        self.violations.iter().any(|v| v.condition == condition)
    }
}

pub fn verify_stable(problem: &LtuProblem, outcome: &Outcome) -> Result<StabilityReport> {
    outcome.check_dims(problem)?;
    let (nx, ny) = (problem.num_workers(), problem.num_jobs());
    let mut out = Vec::new();
    let mut push = |condition, location, lhs: Rational, rhs: Rational| {
        out.push(Violation {
            condition,
            location,
            lhs,
            rhs,
        })
    };
    let zero = Rational::zero();

    for x in 0..nx {
        for y in 0..ny {
            if outcome.mu[x][y].is_negative() {
                push(
                    Condition::Nonnegativity,
                    Location::Match { x, y },
                    outcome.mu[x][y].clone(),
                    zero.clone(),
                );
            }
        }
    }
    for x in 0..nx {
        if outcome.u[x].is_negative() {
            push(
                Condition::Nonnegativity,
                Location::Worker { x },
                outcome.u[x].clone(),
                zero.clone(),
            );
        }
    }
    for y in 0..ny {
        if outcome.v[y].is_negative() {
            push(
                Condition::Nonnegativity,
                Location::Job { y },
                outcome.v[y].clone(),
                zero.clone(),
            );
        }
    }

    for x in 0..nx {
        for y in 0..ny {
            let lhs = problem.pair_value(x, y, &outcome.u[x], &outcome.v[y]);
            let rhs = problem.half_output(x, y);
            if lhs < rhs {
                push(Condition::NoBlockingPair, Location::Pair { x, y }, lhs, rhs);
            } else if outcome.mu[x][y].is_positive() && lhs != rhs {
                push(Condition::Binding, Location::Pair { x, y }, lhs, rhs);
            }
        }
    }

    let row_sums: Vec<Rational> = outcome.mu.iter().map(rational::sum).collect();
    let col_sums: Vec<Rational> = (0..ny)
        .map(|y| rational::sum(outcome.mu.iter().map(|row| &row[y])))
        .collect();
    for x in 0..nx {
        let mass = &problem.worker_mass()[x];
        if &row_sums[x] > mass {
            push(
                Condition::WorkerCapacity,
                Location::Worker { x },
                row_sums[x].clone(),
                mass.clone(),
            );
        } else if outcome.u[x].is_positive() && &row_sums[x] != mass {
            push(
                Condition::WorkerSaturation,
                Location::Worker { x },
                row_sums[x].clone(),
                mass.clone(),
            );
        }
    }
    for y in 0..ny {
        let mass = &problem.job_mass()[y];
        if &col_sums[y] > mass {
            push(
                Condition::JobCapacity,
                Location::Job { y },
                col_sums[y].clone(),
                mass.clone(),
            );
        } else if outcome.v[y].is_positive() && &col_sums[y] != mass {
            push(
                Condition::JobSaturation,
                Location::Job { y },
                col_sums[y].clone(),
                mass.clone(),
            );
        }
    }
    out.sort_by_key(|v| (v.condition, v.location));
    Ok(StabilityReport::from_violations(out))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockingPair {
    pub x: usize,
    pub y: usize,
    #[serde(with = "serde_scalar")]
    pub deficit: Rational,
}

/// Pairs with `lambda u + (1 - lambda) v < phi / 2`, largest deficit first.
pub fn blocking_pairs(problem: &LtuProblem, outcome: &Outcome) -> Result<Vec<BlockingPair>> {
    outcome.check_dims(problem)?;
    let mut pairs = Vec::new();
    for x in 0..problem.num_workers() {
        for y in 0..problem.num_jobs() {
            let lhs = problem.pair_value(x, y, &outcome.u[x], &outcome.v[y]);
            let deficit = problem.half_output(x, y) - lhs;
            if deficit.is_positive() {
                pairs.push(BlockingPair { x, y, deficit });
            }
        }
    }
    pairs.sort_by(|a, b| b.deficit.cmp(&a.deficit).then((a.x, a.y).cmp(&(b.x, b.y))));
    Ok(pairs)
}

pub fn verify_stable_m2o(
    problem: &ManyToOneProblem,
    outcome: &ManyToOneOutcome,
) -> Result<StabilityReport> {
    outcome.check_dims(problem)?;
    let mut out = Vec::new();
    let zero = Rational::zero();
    for (a, mu) in outcome.mu.iter().enumerate() {
        if mu.is_negative() {
            out.push(Violation {
                condition: Condition::Nonnegativity,
                location: Location::Arrangement { a },
                lhs: mu.clone(),
                rhs: zero.clone(),
            });
        }
    }
    for x in 0..problem.num_types() {
        let used = problem
            .arrangements()
            .iter()
            .zip(&outcome.mu)
            .fold(Rational::zero(), |acc, (arr, mu)| {
                acc + Rational::from_integer(arr.occupancy(x).into()) * mu
            });
        if used != problem.mass()[x] {
            out.push(Violation {
                condition: Condition::Feasibility,
                location: Location::Type { x },
                lhs: used,
                rhs: problem.mass()[x].clone(),
            });
        }
    }
    for (a, arr) in problem.arrangements().iter().enumerate() {
        let lhs = arr.value(&outcome.u);
        if lhs < arr.phi {
            out.push(Violation {
                condition: Condition::NoBlock,
                location: Location::Arrangement { a },
                lhs,
                rhs: arr.phi.clone(),
            });
        } else if outcome.mu[a].is_positive() && lhs != arr.phi {
            out.push(Violation {
                condition: Condition::ArrangementBinding,
                location: Location::Arrangement { a },
                lhs,
                rhs: arr.phi.clone(),
            });
        }
    }
    out.sort_by_key(|v| (v.condition, v.location));
    Ok(StabilityReport::from_violations(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Arrangement, Population};
    use crate::rational::{int, ratio};

    fn figure1() -> LtuProblem {
        LtuProblem::new(
            Population::unit(2, 2),
            vec![
                vec![ratio(1, 3), ratio(2, 3)],
                vec![ratio(1, 2), ratio(1, 2)],
            ],
            vec![vec![ratio(2, 3), ratio(2, 3)], vec![int(1), int(1)]],
        )
        .unwrap()
    }

    fn black() -> Outcome {
        Outcome {
            mu: vec![vec![int(1), int(0)], vec![int(0), int(1)]],
            u: vec![int(1), int(1)],
            v: vec![int(0), int(0)],
        }
    }

    fn white() -> Outcome {
        Outcome {
            mu: vec![vec![int(0), int(1)], vec![int(1), int(0)]],
            u: vec![int(0), int(0)],
            v: vec![int(1), int(1)],
        }
    }

    #[test]
    fn both_figure1_outcomes_are_stable() {
        assert!(verify_stable(&figure1(), &black()).unwrap().stable);
        assert!(verify_stable(&figure1(), &white()).unwrap().stable);
    }

    #[test]
    fn mixed_outcome_fails_binding_at_12() {
        let mixed = Outcome {
            mu: white().mu,
            u: black().u,
            v: black().v,
        };
        let report = verify_stable(&figure1(), &mixed).unwrap();
        assert!(!report.stable);
        let v = report
            .violations
            .iter()
            .find(|v| v.location == Location::Pair { x: 0, y: 1 })
            .unwrap();
        assert_eq!(v.condition, Condition::Binding);
        assert_eq!((v.lhs.clone(), v.rhs.clone()), (ratio(2, 3), ratio(1, 3)));
    }

    #[test]
    fn zero_outcome_blocks_everywhere() {
        let p = figure1();
        let report = verify_stable(&p, &Outcome::zero(&p)).unwrap();
        assert_eq!(report.violations.len(), 4);
        assert!(report
            .violations
            .iter()
            .all(|v| v.condition == Condition::NoBlockingPair));
        let deficits: Vec<(usize, usize, Rational)> = blocking_pairs(&p, &Outcome::zero(&p))
            .unwrap()
            .into_iter()
            .map(|b| (b.x, b.y, b.deficit))
            .collect();
        assert_eq!(
            deficits,
            vec![
                (1, 0, ratio(1, 2)),
                (1, 1, ratio(1, 2)),
                (0, 0, ratio(1, 3)),
                (0, 1, ratio(1, 3)),
            ]
        );
    }

    #[test]
    fn lowered_utility_creates_one_blocking_pair() {
        let mut o = black();
        o.u[0] = ratio(1, 2);
        let pairs = blocking_pairs(&figure1(), &o).unwrap();
        assert_eq!(
            pairs,
            vec![BlockingPair {
                x: 0,
                y: 0,
                deficit: ratio(1, 6)
            }]
        );
        assert!(blocking_pairs(&figure1(), &black()).unwrap().is_empty());
    }

    #[test]
    fn capacity_and_saturation() {
        let p = figure1();
        let mut o = black();
        o.mu[0][1] = int(1);
        let report = verify_stable(&p, &o).unwrap();
        assert!(report.violates(Condition::WorkerCapacity));
        assert!(report.violates(Condition::JobCapacity));
        let mut o = black();
        o.mu[1][1] = ratio(1, 2);
        let report = verify_stable(&p, &o).unwrap();
        assert!(report.violates(Condition::WorkerSaturation));
        assert!(!report.violates(Condition::JobSaturation));
    }

    #[test]
    fn negative_entries_are_reported() {
        let p = figure1();
        let mut o = black();
        o.v[0] = int(-1);
        assert!(verify_stable(&p, &o)
            .unwrap()
            .violates(Condition::Nonnegativity));
    }

    #[test]
    fn condition_ids_serialize() {
        let v = Violation {
            condition: Condition::Binding,
            location: Location::Pair { x: 0, y: 1 },
            lhs: ratio(2, 3),
            rhs: ratio(1, 3),
        };
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(json["condition"], "4");
        assert_eq!(json["lhs"], "2/3");
        assert_eq!(json["location"]["kind"], "pair");
    }

    fn roommate() -> ManyToOneProblem {
        ManyToOneProblem::new(
            vec!["1".into()],
            vec![int(2)],
            2,
            vec![
                Arrangement {
                    slots: vec![Some(0), None],
                    lambda: vec![int(1), int(0)],
                    phi: ratio(1, 2),
                },
                Arrangement {
                    slots: vec![Some(0), Some(0)],
                    lambda: vec![ratio(1, 2), ratio(1, 2)],
                    phi: int(2),
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn roommate_stability() {
        let p = roommate();
        let stable = ManyToOneOutcome {
            mu: vec![int(0), int(1)],
            u: vec![int(2)],
        };
        assert!(verify_stable_m2o(&p, &stable).unwrap().stable);
        let singles = ManyToOneOutcome {
            mu: vec![int(2), int(0)],
            u: vec![ratio(1, 2)],
        };
        let report = verify_stable_m2o(&p, &singles).unwrap();
        assert_eq!(
            report.violations,
            vec![Violation {
                condition: Condition::NoBlock,
                location: Location::Arrangement { a: 1 },
                lhs: ratio(1, 2),
                rhs: int(2),
            }]
        );
        let short = ManyToOneOutcome {
            mu: vec![int(0), ratio(1, 2)],
            u: vec![int(2)],
        };
        assert!(verify_stable_m2o(&p, &short)
            .unwrap()
            .violates(Condition::Feasibility));
    }
}
