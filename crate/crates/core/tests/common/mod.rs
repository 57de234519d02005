//! Fixtures and independent reference checks shared by the integration tests.
//!
//! The reference checks recompute everything from the linear-constraint
//! expansion `a u + b v = c` of each pair rather than from `lambda`/`phi`.

#![allow(dead_code)]

use std::path::PathBuf;

use ltumatch::rational::{int, ratio};
use ltumatch::{BimatrixGame, LtuProblem, MixedProfile, Outcome, Rational, ValidateOptions};
use num_traits::{Signed, Zero};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

pub fn load_problem(name: &str) -> LtuProblem {
    let text = std::fs::read_to_string(data_path(name)).expect("fixture exists");
    LtuProblem::from_json(&text, ValidateOptions::for_reduction()).expect("fixture is valid")
}

pub fn load_outcome(name: &str) -> Outcome {
    let text = std::fs::read_to_string(data_path(name)).expect("fixture exists");
    serde_json::from_str(&text).expect("fixture is valid")
}

pub fn figure1() -> LtuProblem {
    load_problem("figure1.json")
}

pub fn black() -> Outcome {
    Outcome {
        mu: vec![vec![int(1), int(0)], vec![int(0), int(1)]],
        u: vec![int(1), int(1)],
        v: vec![int(0), int(0)],
    }
}

pub fn white() -> Outcome {
    Outcome {
        mu: vec![vec![int(0), int(1)], vec![int(1), int(0)]],
        u: vec![int(0), int(0)],
        v: vec![int(1), int(1)],
    }
}

pub fn mixed() -> Outcome {
    Outcome {
        mu: white().mu,
        u: black().u,
        v: black().v,
    }
}

pub fn half() -> Rational {
    ratio(1, 2)
}

/// Stability from scratch: `a u + b v >= c` on every pair with equality where
/// matched, capacities, and saturation of positively paid types.
pub fn reference_stable(problem: &LtuProblem, o: &Outcome) -> bool {
    let (a, b, c) = problem.linear_constraints();
    let (nx, ny) = (problem.num_workers(), problem.num_jobs());
    let nonneg =
        o.mu.iter()
            .flatten()
            .chain(&o.u)
            .chain(&o.v)
            .all(|v| !v.is_negative());
    if !nonneg {
        return false;
    }
    for x in 0..nx {
        for y in 0..ny {
            let lhs = &a[x][y] * &o.u[x] + &b[x][y] * &o.v[y];
            if lhs < c[x][y] || (o.mu[x][y].is_positive() && lhs != c[x][y]) {
                return false;
            }
        }
    }
    for x in 0..nx {
        let used: Rational = o.mu[x].iter().sum();
        let cap = &problem.worker_mass()[x];
        if &used > cap || (o.u[x].is_positive() && &used != cap) {
            return false;
        }
    }
    for y in 0..ny {
        let used: Rational = o.mu.iter().map(|row| &row[y]).sum();
        let cap = &problem.job_mass()[y];
        if &used > cap || (o.v[y].is_positive() && &used != cap) {
            return false;
        }
    }
    true
}

/// Hide-and-seek entries from the linear expansion: with `c = phi (a + b) / 2`,
/// `alpha = a / (2 n c)`, `beta = (a + b) / (4 n c)` and likewise for jobs.
pub fn reference_game(problem: &LtuProblem) -> (Vec<Vec<Rational>>, Vec<Vec<Rational>>) {
    let (a, b, c) = problem.linear_constraints();
    let (nx, ny) = (problem.num_workers(), problem.num_jobs());
    let mut loss = Vec::new();
    let mut payoff = Vec::new();
    for x in 0..nx {
        for y in 0..ny {
            let n = &problem.worker_mass()[x];
            let m = &problem.job_mass()[y];
            let s = &a[x][y] + &b[x][y];
            let mut lrow = vec![Rational::zero(); nx + ny];
            let mut prow = vec![Rational::zero(); nx + ny];
            lrow[x] = &a[x][y] / (int(2) * n * &c[x][y]);
            prow[x] = &s / (int(4) * n * &c[x][y]);
            lrow[nx + y] = &b[x][y] / (int(2) * m * &c[x][y]);
            prow[nx + y] = &s / (int(4) * m * &c[x][y]);
            loss.push(lrow);
            payoff.push(prow);
        }
    }
    (loss, payoff)
}

/// Equilibrium from scratch: no pure strategy of either player does strictly better.
pub fn reference_equilibrium(game: &BimatrixGame, s: &MixedProfile) -> bool {
    let (r, c) = (game.loss.len(), game.loss[0].len());
    let row_loss: Vec<Rational> = (0..r)
        .map(|i| (0..c).map(|j| &game.loss[i][j] * &s.q[j]).sum())
        .collect();
    let col_pay: Vec<Rational> = (0..c)
        .map(|j| (0..r).map(|i| &game.payoff[i][j] * &s.p[i]).sum())
        .collect();
    let ell: Rational = (0..r).map(|i| &s.p[i] * &row_loss[i]).sum();
    let pi: Rational = (0..c).map(|j| &s.q[j] * &col_pay[j]).sum();
    row_loss.iter().all(|l| l >= &ell) && col_pay.iter().all(|p| p <= &pi)
}
