//! Exact linear feasibility and optimization by two-phase simplex over
//! rationals, with Bland's rule against cycling.
//!
//! An infeasible system comes with a Farkas certificate `y`: sign-constrained
//! multipliers with `y^T A` vanishing on free variables, nonpositive on
//! nonnegative ones, and `y^T b > 0`.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{self, serde_vec, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    Eq,
    Ge,
    Le,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Constraint {
    #[serde(with = "serde_vec")]
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    #[serde(with = "rational::serde_scalar")]
    pub rhs: Rational,
}

/// Linear constraints over `num_vars` variables. Variables are free unless
/// marked nonnegative.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LinearSystem {
    pub num_vars: usize,
    pub nonnegative: Vec<bool>,
    pub constraints: Vec<Constraint>,
}

impl LinearSystem {
    pub fn new(num_vars: usize) -> Self {
        LinearSystem {
            num_vars,
            nonnegative: vec![false; num_vars],
            constraints: Vec::new(),
        }
    }

    pub fn set_nonnegative(&mut self, var: usize) {
        self.nonnegative[var] = true;
    }

    pub fn add(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    /// Adds `sum coeff * x_var (relation) rhs` from sparse terms.
    pub fn add_sparse(&mut self, terms: &[(usize, Rational)], relation: Relation, rhs: Rational) {
        let mut coeffs = vec![Rational::zero(); self.num_vars];
        for (var, c) in terms {
            coeffs[*var] += c;
        }
        self.add(coeffs, relation, rhs);
    }

    fn check(&self) -> Result<()> {
        if self.nonnegative.len() != self.num_vars {
            return Err(Error::DimensionMismatch("nonnegativity flags".into()));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != self.num_vars {
                return Err(Error::DimensionMismatch(format!(
                    "constraint {i} has {} coefficients for {} variables",
                    c.coeffs.len(),
                    self.num_vars
                )));
            }
        }
        Ok(())
    }

    /// Whether `point` satisfies every constraint and sign restriction.
    pub fn satisfied_by(&self, point: &[Rational]) -> bool {
        point.len() == self.num_vars
            && point
                .iter()
                .zip(&self.nonnegative)
                .all(|(x, &nonneg)| !nonneg || !x.is_negative())
            && self.constraints.iter().all(|c| {
                let lhs = rational::dot(&c.coeffs, point);
                match c.relation {
                    Relation::Eq => lhs == c.rhs,
                    Relation::Ge => lhs >= c.rhs,
                    Relation::Le => lhs <= c.rhs,
                }
            })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FarkasCertificate {
    /// One multiplier per constraint.
    #[serde(with = "serde_vec")]
    pub multipliers: Vec<Rational>,
}

impl FarkasCertificate {
    /// Checks that the multipliers prove `system` infeasible.
    pub fn verify(&self, system: &LinearSystem) -> bool {
        if self.multipliers.len() != system.constraints.len() {
            return false;
        }
        let signs_ok = self
            .multipliers
            .iter()
            .zip(&system.constraints)
            .all(|(y, c)| match c.relation {
                Relation::Eq => true,
                Relation::Ge => !y.is_negative(),
                Relation::Le => !y.is_positive(),
            });
        let columns_ok = (0..system.num_vars).all(|j| {
            let combo = self
                .multipliers
                .iter()
                .zip(&system.constraints)
                .fold(Rational::zero(), |acc, (y, c)| acc + y * &c.coeffs[j]);
            if system.nonnegative[j] {
                !combo.is_positive()
            } else {
                combo.is_zero()
            }
        });
        let rhs = self
            .multipliers
            .iter()
            .zip(&system.constraints)
            .fold(Rational::zero(), |acc, (y, c)| acc + y * &c.rhs);
        signs_ok && columns_ok && rhs.is_positive()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(Vec<Rational>),
    Infeasible(FarkasCertificate),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal {
        point: Vec<Rational>,
        value: Rational,
    },
    Infeasible(FarkasCertificate),
    Unbounded,
}

pub fn linear_feasibility(system: &LinearSystem) -> Result<Feasibility> {
    Ok(match solve(system, None)? {
        LpOutcome::Optimal { point, .. } => Feasibility::Feasible(point),
        LpOutcome::Infeasible(cert) => Feasibility::Infeasible(cert),
        LpOutcome::Unbounded => unreachable!("no objective in a feasibility problem"),
    })
}

/// Maximizes `objective . x` over the system.
pub fn maximize(system: &LinearSystem, objective: &[Rational]) -> Result<LpOutcome> {
    if objective.len() != system.num_vars {
        return Err(Error::DimensionMismatch("objective length".into()));
    }
    solve(system, Some(objective))
}

/// Standard-form column origin.
#[derive(Clone, Copy)]
enum Column {
    Plus(usize),
    Minus(usize),
    Slack,
    Artificial,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    /// Reduced costs of the minimization objective.
    cost: Vec<Rational>,
}

enum Phase {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.rows[row][col].recip();
        for v in self.rows[row].iter_mut() {
            *v *= &inv;
        }
        self.rhs[row] *= &inv;
        let pivot_row = self.rows[row].clone();
        let pivot_rhs = self.rhs[row].clone();
        for i in 0..self.rows.len() {
            if i == row || self.rows[i][col].is_zero() {
                continue;
            }
            let factor = self.rows[i][col].clone();
            for (v, p) in self.rows[i].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
            self.rhs[i] -= &factor * &pivot_rhs;
        }
        if !self.cost[col].is_zero() {
            let factor = self.cost[col].clone();
            for (v, p) in self.cost.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Minimizes with Bland's rule, entering only columns below `allowed`.
    fn run(&mut self, allowed: usize) -> Phase {
        loop {
            let Some(col) = (0..allowed).find(|&j| self.cost[j].is_negative()) else {
                return Phase::Optimal;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if !a.is_positive() {
                    continue;
                }
                let r = &self.rhs[i] / a;
                let better = match &best {
                    None => true,
                    Some((b, br)) => r < *br || (r == *br && self.basis[i] < self.basis[*b]),
                };
                if better {
                    best = Some((i, r));
                }
            }
            match best {
                Some((row, _)) => self.pivot(row, col),
                None => return Phase::Unbounded,
            }
        }
    }

    fn set_costs(&mut self, costs: &[Rational]) {
        self.cost = costs.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            if costs[b].is_zero() {
                continue;
            }
            let cb = costs[b].clone();
            for (v, a) in self.cost.iter_mut().zip(&self.rows[i]) {
                *v -= &cb * a;
            }
        }
    }
}

fn solve(system: &LinearSystem, objective: Option<&[Rational]>) -> Result<LpOutcome> {
    system.check()?;
    let m = system.constraints.len();

    let mut columns = Vec::new();
    for j in 0..system.num_vars {
        columns.push(Column::Plus(j));
        if !system.nonnegative[j] {
            columns.push(Column::Minus(j));
        }
    }
    let structural = columns.len();
    let slack_rows: Vec<usize> = (0..m)
        .filter(|&i| system.constraints[i].relation != Relation::Eq)
        .collect();
    columns.extend(slack_rows.iter().map(|_| Column::Slack));
    let real = columns.len();
    columns.extend((0..m).map(|_| Column::Artificial));
    let width = columns.len();

    let mut signs = Vec::with_capacity(m);
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for (i, c) in system.constraints.iter().enumerate() {
        let mut row = vec![Rational::zero(); width];
        for (k, col) in columns[..structural].iter().enumerate() {
            row[k] = match col {
                Column::Plus(j) => c.coeffs[*j].clone(),
                Column::Minus(j) => -c.coeffs[*j].clone(),
                _ => unreachable!(),
            };
        }
        if let Some(s) = slack_rows.iter().position(|&r| r == i) {
            row[structural + s] = match c.relation {
                Relation::Ge => -Rational::one(),
                _ => Rational::one(),
            };
        }
        let sign = if c.rhs.is_negative() {
            -Rational::one()
        } else {
            Rational::one()
        };
        for v in row.iter_mut() {
            *v *= &sign;
        }
        row[real + i] = Rational::one();
        rhs.push(&c.rhs * &sign);
        rows.push(row);
        signs.push(sign);
    }

    let mut tab = Tableau {
        rows,
        rhs,
        basis: (real..width).collect(),
        cost: Vec::new(),
    };
    let phase1: Vec<Rational> = (0..width)
        .map(|k| {
            if k >= real {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
        .collect();
    tab.set_costs(&phase1);
    match tab.run(width) {
        Phase::Optimal => {}
        Phase::Unbounded => {
            return Err(Error::Internal("phase one is bounded below by zero".into()))
        }
    }
    let infeasibility = rational::sum(
        tab.basis
            .iter()
            .zip(&tab.rhs)
            .filter(|(&b, _)| b >= real)
            .map(|(_, v)| v),
    );
    if infeasibility.is_positive() {
        let multipliers = (0..m)
            .map(|i| &signs[i] * (Rational::one() - &tab.cost[real + i]))
            .collect();
        let cert = FarkasCertificate { multipliers };
        if !cert.verify(system) {
            return Err(Error::Internal(
                "phase one produced an invalid certificate".into(),
            ));
        }
        return Ok(LpOutcome::Infeasible(cert));
    }

    // Drive zero-valued artificials out of the basis where possible.
    for i in 0..m {
        if tab.basis[i] < real {
            continue;
        }
        if let Some(col) = (0..real).find(|&k| !tab.rows[i][k].is_zero()) {
            tab.pivot(i, col);
        }
    }

    let mut value = Rational::zero();
    if let Some(objective) = objective {
        let costs: Vec<Rational> = columns
            .iter()
            .map(|col| match col {
                Column::Plus(j) => -objective[*j].clone(),
                Column::Minus(j) => objective[*j].clone(),
                _ => Rational::zero(),
            })
            .collect();
        tab.set_costs(&costs);
        if let Phase::Unbounded = tab.run(real) {
            return Ok(LpOutcome::Unbounded);
        }
    }

    let mut point = vec![Rational::zero(); system.num_vars];
    for (i, &b) in tab.basis.iter().enumerate() {
        match columns[b] {
            Column::Plus(j) => point[j] += &tab.rhs[i],
            Column::Minus(j) => point[j] -= &tab.rhs[i],
            _ => {}
        }
    }
    if let Some(objective) = objective {
        value = rational::dot(objective, &point);
    }
    if !system.satisfied_by(&point) {
        return Err(Error::Internal(
            "simplex returned an infeasible point".into(),
        ));
    }
    Ok(LpOutcome::Optimal { point, value })
}
