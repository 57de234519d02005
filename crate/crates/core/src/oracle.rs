//! Brute-force enumeration of stable outcomes on small problems.
//!
//! A pattern fixes the exact supports of `mu`, `u` and `v`. Given a pattern,
//! stability is a pair of independent linear systems, one in `mu` and one in
//! `(u, v)`; strict positivity on a support is handled by maximizing a
//! common lower bound `t` on the supported variables. Every stable outcome
//! induces exactly one pattern, so the feasible patterns cover the whole
//! stable set.

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{maximize, LinearSystem, LpOutcome, Relation};
use crate::model::{LtuProblem, Outcome};
use crate::rational::Rational;
use crate::stability::verify_stable;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleCaps {
    pub max_pairs: usize,
    pub max_types: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps {
            max_pairs: 9,
            max_types: 8,
        }
    }
}

/// Exact supports: `mu > 0` on `matched`, `u > 0` on `paid_workers`,
/// `v > 0` on `paid_jobs`, zero elsewhere.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ComplementarityPattern {
    pub matched: Vec<(usize, usize)>,
    pub paid_workers: Vec<usize>,
    pub paid_jobs: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StableRepresentative {
    pub pattern: ComplementarityPattern,
    pub outcome: Outcome,
    /// Pairs whose constraint holds with equality at the representative.
    pub binding: Vec<(usize, usize)>,
}

pub fn induced_pattern(outcome: &Outcome) -> ComplementarityPattern {
    let positive = |v: &[Rational]| (0..v.len()).filter(|&i| v[i].is_positive()).collect();
    ComplementarityPattern {
        matched: outcome
            .mu
            .iter()
            .enumerate()
            .flat_map(|(x, row)| {
                row.iter()
                    .enumerate()
                    .filter(|(_, m)| m.is_positive())
                    .map(move |(y, _)| (x, y))
            })
            .collect(),
        paid_workers: positive(&outcome.u),
        paid_jobs: positive(&outcome.v),
    }
}

/// Matched cells, paid workers and paid jobs as bitmasks.
type PatternKey = (u32, u32, u32);

fn bits(mask: u32, len: usize) -> impl Iterator<Item = usize> {
    (0..len).filter(move |i| mask >> i & 1 == 1)
}

/// Cheap necessary conditions; the linear systems decide the rest.
fn admissible(problem: &LtuProblem, s: u32, pu: u32, pv: u32) -> bool {
    let (nx, ny) = (problem.num_workers(), problem.num_jobs());
    for x in 0..nx {
        for y in 0..ny {
            let covered = pu >> x & 1 == 1 || pv >> y & 1 == 1;
            let phi = &problem.phi()[x][y];
            if !covered && (phi.is_positive() || (s >> (x * ny + y) & 1 == 1 && !phi.is_zero())) {
                return false;
            }
        }
    }
    let row_hit = |x: usize| (0..ny).any(|y| s >> (x * ny + y) & 1 == 1);
    let col_hit = |y: usize| (0..nx).any(|x| s >> (x * ny + y) & 1 == 1);
    bits(pu, nx).all(row_hit) && bits(pv, ny).all(col_hit)
}

/// Maximizes `t <= 1` with every support variable `>= t`; returns the point
/// when the optimum is positive. `t` is the last variable.
fn interior_point(mut system: LinearSystem, support: &[usize]) -> Result<Option<Vec<Rational>>> {
    let t = system.num_vars - 1;
    for &var in support {
        system.add_sparse(
            &[(var, Rational::one()), (t, -Rational::one())],
            Relation::Ge,
            Rational::zero(),
        );
    }
    system.add_sparse(&[(t, Rational::one())], Relation::Le, Rational::one());
    let mut objective = vec![Rational::zero(); system.num_vars];
    objective[t] = Rational::one();
    match maximize(&system, &objective)? {
        LpOutcome::Optimal { point, value } if value.is_positive() => Ok(Some(point)),
        LpOutcome::Optimal { .. } | LpOutcome::Infeasible(_) => Ok(None),
        LpOutcome::Unbounded => Err(Error::Internal(
            "bounded lower-bound program is unbounded".into(),
        )),
    }
}

/// A matching supported exactly on `s` that fills the paid types, if any.
fn matching_part(problem: &LtuProblem, s: u32, pu: u32, pv: u32) -> Result<Option<Vec<Rational>>> {
    let (nx, ny) = (problem.num_workers(), problem.num_jobs());
    let cells: Vec<(usize, usize)> = bits(s, nx * ny).map(|c| (c / ny, c % ny)).collect();

    // Matching: one variable per matched cell, then t.
    let mut system = LinearSystem::new(cells.len() + 1);
    (0..system.num_vars).for_each(|k| system.set_nonnegative(k));
    for x in 0..nx {
        let terms: Vec<(usize, Rational)> = cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.0 == x)
            .map(|(k, _)| (k, Rational::one()))
            .collect();
        let rel = if pu >> x & 1 == 1 {
            Relation::Eq
        } else {
            Relation::Le
        };
        system.add_sparse(&terms, rel, problem.worker_mass()[x].clone());
    }
    for y in 0..ny {
        let terms: Vec<(usize, Rational)> = cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.1 == y)
            .map(|(k, _)| (k, Rational::one()))
            .collect();
        let rel = if pv >> y & 1 == 1 {
            Relation::Eq
        } else {
            Relation::Le
        };
        system.add_sparse(&terms, rel, problem.job_mass()[y].clone());
    }
    let support: Vec<usize> = (0..cells.len()).collect();
    interior_point(system, &support)
}

/// Utilities positive exactly on the paid types, binding on `s`, if any.
fn utility_part(problem: &LtuProblem, s: u32, pu: u32, pv: u32) -> Result<Option<Vec<Rational>>> {
    let (nx, ny) = (problem.num_workers(), problem.num_jobs());
    // Utilities: paid workers, then paid jobs, then t.
    let workers: Vec<usize> = bits(pu, nx).collect();
    let jobs: Vec<usize> = bits(pv, ny).collect();
    let mut system = LinearSystem::new(workers.len() + jobs.len() + 1);
    (0..system.num_vars).for_each(|k| system.set_nonnegative(k));
    for x in 0..nx {
        for y in 0..ny {
            let lambda = &problem.lambda()[x][y];
            let mut terms = Vec::new();
            if let Some(k) = workers.iter().position(|&w| w == x) {
                terms.push((k, lambda.clone()));
            }
            if let Some(k) = jobs.iter().position(|&j| j == y) {
                terms.push((workers.len() + k, Rational::one() - lambda));
            }
            let rel = if s >> (x * ny + y) & 1 == 1 {
                Relation::Eq
            } else {
                Relation::Ge
            };
            system.add_sparse(&terms, rel, problem.half_output(x, y));
        }
    }
    let support: Vec<usize> = (0..workers.len() + jobs.len()).collect();
    interior_point(system, &support)
}

fn assemble(
    problem: &LtuProblem,
    (s, pu, pv): (u32, u32, u32),
    mu_point: &[Rational],
    uv_point: &[Rational],
) -> Result<StableRepresentative> {
    let (nx, ny) = (problem.num_workers(), problem.num_jobs());
    let cells: Vec<(usize, usize)> = bits(s, nx * ny).map(|c| (c / ny, c % ny)).collect();
    let workers: Vec<usize> = bits(pu, nx).collect();
    let jobs: Vec<usize> = bits(pv, ny).collect();
    let mut outcome = Outcome::zero(problem);
    for (k, &(x, y)) in cells.iter().enumerate() {
        outcome.mu[x][y] = mu_point[k].clone();
    }
    for (k, &x) in workers.iter().enumerate() {
        outcome.u[x] = uv_point[k].clone();
    }
    for (k, &y) in jobs.iter().enumerate() {
        outcome.v[y] = uv_point[workers.len() + k].clone();
    }
    if !verify_stable(problem, &outcome)?.stable {
        return Err(Error::Internal(format!(
            "oracle representative for pattern ({s:#b}, {pu:#b}, {pv:#b}) is not stable"
        )));
    }
    let pattern = induced_pattern(&outcome);
    let binding = (0..nx)
        .flat_map(|x| (0..ny).map(move |y| (x, y)))
        .filter(|&(x, y)| {
            problem.pair_value(x, y, &outcome.u[x], &outcome.v[y]) == problem.half_output(x, y)
        })
        .collect();
    Ok(StableRepresentative {
        pattern,
        outcome,
        binding,
    })
}

/// Feasible patterns sharing the paid sets `(pu, pv)`. Binding is monotone in
/// the matched cells, so supersets of a set with no valid utilities are skipped.
fn patterns_for_payments(
    problem: &LtuProblem,
    pu: u32,
    pv: u32,
) -> Result<Vec<(PatternKey, StableRepresentative)>> {
    let cells = problem.num_workers() * problem.num_jobs();
    let mut matched: Vec<u32> = (0..1u32 << cells).collect();
    matched.sort_by_key(|s| (s.count_ones(), *s));
    let mut dead: Vec<u32> = Vec::new();
    let mut out = Vec::new();
    for s in matched {
        if dead.iter().any(|&d| d & !s == 0) || !admissible(problem, s, pu, pv) {
            continue;
        }
        let Some(uv_point) = utility_part(problem, s, pu, pv)? else {
            dead.push(s);
            continue;
        };
        if let Some(mu_point) = matching_part(problem, s, pu, pv)? {
            out.push((
                (s, pu, pv),
                assemble(problem, (s, pu, pv), &mu_point, &uv_point)?,
            ));
        }
    }
    Ok(out)
}

/// One representative per feasible pattern, ordered by
/// (matched cells, paid workers, paid jobs) as bitmasks.
pub fn enumerate_stable(
    problem: &LtuProblem,
    caps: OracleCaps,
) -> Result<Vec<StableRepresentative>> {
    let (nx, ny) = (problem.num_workers(), problem.num_jobs());
    if nx * ny > caps.max_pairs || nx + ny > caps.max_types || nx * ny > 24 {
        return Err(Error::CapExceeded {
            workers: nx,
            jobs: ny,
        });
    }
    let payments: Vec<(u32, u32)> = (0..1u32 << nx)
        .flat_map(|pu| (0..1u32 << ny).map(move |pv| (pu, pv)))
        .collect();
    let groups: Vec<Vec<_>> = payments
        .par_iter()
        .map(|&(pu, pv)| patterns_for_payments(problem, pu, pv))
        .collect::<Result<_>>()?;
    let mut found: Vec<_> = groups.into_iter().flatten().collect();
    found.sort_by_key(|(key, _)| *key);
    Ok(found.into_iter().map(|(_, rep)| rep).collect())
}
