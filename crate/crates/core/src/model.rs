//! Problem and outcome types, canonicalization into LTU form, and file formats.
//!
//! A one-to-one problem stores, for every worker/job pair, the transfer rate
//! `lambda` and the output `phi` of the within-match constraint
//! `lambda * u + (1 - lambda) * v = phi / 2`. Reservation utilities are zero.

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, serde_matrix, serde_scalar, serde_vec, Rational};

type Matrix = Vec<Vec<Rational>>;

/// Type ids and masses for both sides of the market. Index order is file order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Population {
    pub workers: Vec<String>,
    pub jobs: Vec<String>,
    pub worker_mass: Vec<Rational>,
    pub job_mass: Vec<Rational>,
}

impl Population {
    pub fn new(
        workers: Vec<String>,
        jobs: Vec<String>,
        worker_mass: Vec<Rational>,
        job_mass: Vec<Rational>,
    ) -> Result<Self> {
        if workers.is_empty() || jobs.is_empty() {
            return Err(Error::DimensionMismatch(
                "need at least one worker type and one job type".into(),
            ));
        }
        if workers.len() != worker_mass.len() || jobs.len() != job_mass.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} worker ids with {} masses, {} job ids with {} masses",
                workers.len(),
                worker_mass.len(),
                jobs.len(),
                job_mass.len()
            )));
        }
        check_unique_ids(&workers)?;
        check_unique_ids(&jobs)?;
        for (id, mass) in workers
            .iter()
            .zip(&worker_mass)
            .chain(jobs.iter().zip(&job_mass))
        {
            if !mass.is_positive() {
                return Err(Error::NonpositiveMass {
                    id: id.clone(),
                    value: mass.clone(),
                });
            }
        }
        Ok(Population {
            workers,
            jobs,
            worker_mass,
            job_mass,
        })
    }

    /// Unit masses, ids `"1".."n"`.
    pub fn unit(num_workers: usize, num_jobs: usize) -> Self {
        let ids = |n: usize| (1..=n).map(|i| i.to_string()).collect();
        Population::new(
            ids(num_workers),
            ids(num_jobs),
            vec![Rational::one(); num_workers],
            vec![Rational::one(); num_jobs],
        )
        .expect("unit population is valid")
    }

    pub fn num_workers(&self) -> usize {
        self.workers.len()
    }

    pub fn num_jobs(&self) -> usize {
        self.jobs.len()
    }
}

fn check_unique_ids(ids: &[String]) -> Result<()> {
    let mut seen = HashMap::new();
    for (i, id) in ids.iter().enumerate() {
        if let Some(prev) = seen.insert(id.as_str(), i) {
            return Err(Error::Parse(format!(
                "duplicate type id {id:?} at positions {prev} and {i}"
            )));
        }
    }
    Ok(())
}

fn check_shape<T>(name: &str, matrix: &[Vec<T>], rows: usize, cols: usize) -> Result<()> {
    if matrix.len() != rows || matrix.iter().any(|row| row.len() != cols) {
        return Err(Error::DimensionMismatch(format!(
            "{name} must be {rows}x{cols}"
        )));
    }
    Ok(())
}

/// A one-to-one matching problem with linearly transferable utility.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LtuProblem {
    population: Population,
    lambda: Vec<Vec<Rational>>,
    phi: Vec<Vec<Rational>>,
}

impl LtuProblem {
    pub fn new(
        population: Population,
        lambda: Vec<Vec<Rational>>,
        phi: Vec<Vec<Rational>>,
    ) -> Result<Self> {
        let (rows, cols) = (population.num_workers(), population.num_jobs());
        check_shape("lambda", &lambda, rows, cols)?;
        check_shape("phi", &phi, rows, cols)?;
        for (x, row) in lambda.iter().enumerate() {
            for (y, value) in row.iter().enumerate() {
                if !value.is_positive() || value >= &Rational::one() {
                    return Err(Error::LambdaOutOfRange {
                        x: population.workers[x].clone(),
                        y: population.jobs[y].clone(),
                        value: value.clone(),
                    });
                }
            }
        }
        Ok(LtuProblem {
            population,
            lambda,
            phi,
        })
    }

    /// Canonicalizes `a * u + b * v = c` into LTU form by dividing through by `a + b`.
    pub fn from_linear_constraints(
        population: Population,
        a: &[Vec<Rational>],
        b: &[Vec<Rational>],
        c: &[Vec<Rational>],
    ) -> Result<Self> {
        let (rows, cols) = (population.num_workers(), population.num_jobs());
        check_shape("a", a, rows, cols)?;
        check_shape("b", b, rows, cols)?;
        check_shape("c", c, rows, cols)?;
        let mut lambda = vec![Vec::with_capacity(cols); rows];
        let mut phi = vec![Vec::with_capacity(cols); rows];
        for x in 0..rows {
            for y in 0..cols {
                for (name, value) in [("a", &a[x][y]), ("b", &b[x][y])] {
                    if !value.is_positive() {
                        return Err(Error::NonpositiveCoefficient {
                            name,
                            x: population.workers[x].clone(),
                            y: population.jobs[y].clone(),
                            value: value.clone(),
                        });
                    }
                }
                let total = &a[x][y] + &b[x][y];
                lambda[x].push(&a[x][y] / &total);
                phi[x].push(rational::int(2) * &c[x][y] / &total);
            }
        }
        LtuProblem::new(population, lambda, phi)
    }

    /// Wage taxation: the worker keeps `(1 - tau) w` of a gross wage `w`, the
    /// employer keeps `s - w`.
    pub fn from_tax_schedule(
        population: Population,
        s: &[Vec<Rational>],
        tau: &[Vec<Rational>],
    ) -> Result<Self> {
        let (rows, cols) = (population.num_workers(), population.num_jobs());
        check_shape("S", s, rows, cols)?;
        check_shape("tau", tau, rows, cols)?;
        let two = rational::int(2);
        let mut lambda = vec![Vec::with_capacity(cols); rows];
        let mut phi = vec![Vec::with_capacity(cols); rows];
        for x in 0..rows {
            for y in 0..cols {
                let t = &tau[x][y];
                if t.is_negative() || t >= &Rational::one() {
                    return Err(Error::TaxOutOfRange {
                        x: population.workers[x].clone(),
                        y: population.jobs[y].clone(),
                        value: t.clone(),
                    });
                }
                let denom = &two - t;
                lambda[x].push(denom.recip());
                phi[x].push(&two * (Rational::one() - t) * &s[x][y] / &denom);
            }
        }
        LtuProblem::new(population, lambda, phi)
    }

    /// The constraint coefficients `(lambda, 1 - lambda, phi / 2)` per pair.
    pub fn linear_constraints(&self) -> (Matrix, Matrix, Matrix) {
        let b = self
            .lambda
            .iter()
            .map(|row| row.iter().map(|l| Rational::one() - l).collect())
            .collect();
        let c = self
            .phi
            .iter()
            .map(|row| row.iter().map(|p| p / rational::int(2)).collect())
            .collect();
        (self.lambda.clone(), b, c)
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn workers(&self) -> &[String] {
        &self.population.workers
    }

    pub fn jobs(&self) -> &[String] {
        &self.population.jobs
    }

    pub fn num_workers(&self) -> usize {
        self.population.num_workers()
    }

    pub fn num_jobs(&self) -> usize {
        self.population.num_jobs()
    }

    pub fn worker_mass(&self) -> &[Rational] {
        &self.population.worker_mass
    }

    pub fn job_mass(&self) -> &[Rational] {
        &self.population.job_mass
    }

    pub fn lambda(&self) -> &[Vec<Rational>] {
        &self.lambda
    }

    pub fn phi(&self) -> &[Vec<Rational>] {
        &self.phi
    }

    /// Half output `phi / 2`, the right-hand side of the pair constraint.
    pub fn half_output(&self, x: usize, y: usize) -> Rational {
        &self.phi[x][y] / rational::int(2)
    }

    /// `lambda * u + (1 - lambda) * v` for the pair.
    pub fn pair_value(&self, x: usize, y: usize, u: &Rational, v: &Rational) -> Rational {
        let l = &self.lambda[x][y];
        l * u + (Rational::one() - l) * v
    }

    pub fn ensure_positive_outputs(&self) -> Result<()> {
        for (x, row) in self.phi.iter().enumerate() {
            for (y, value) in row.iter().enumerate() {
                if !value.is_positive() {
                    return Err(Error::NonpositiveOutput {
                        location: format!("pair ({}, {})", self.workers()[x], self.jobs()[y]),
                        value: value.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn worker_index(&self, id: &str) -> Option<usize> {
        self.workers().iter().position(|w| w == id)
    }

    pub fn job_index(&self, id: &str) -> Option<usize> {
        self.jobs().iter().position(|j| j == id)
    }

    pub fn from_json(text: &str, options: ValidateOptions) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(text)?;
        validate_problem(file, options)
    }

    pub fn to_file(&self) -> ProblemFile {
        let entries = |ids: &[String], masses: &[Rational]| {
            ids.iter()
                .zip(masses)
                .map(|(id, mass)| TypeEntry {
                    id: id.clone(),
                    mass: mass.clone(),
                })
                .collect()
        };
        let mut pairs = Vec::with_capacity(self.num_workers() * self.num_jobs());
        for (x, xid) in self.workers().iter().enumerate() {
            for (y, yid) in self.jobs().iter().enumerate() {
                pairs.push(PairEntry {
                    x: xid.clone(),
                    y: yid.clone(),
                    lambda: self.lambda[x][y].clone(),
                    phi: self.phi[x][y].clone(),
                });
            }
        }
        ProblemFile {
            workers: entries(self.workers(), self.worker_mass()),
            jobs: entries(self.jobs(), self.job_mass()),
            pairs: Some(pairs),
            linear_constraints: None,
            tax: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("problem serializes")
    }
}

/// A matching `mu` with utilities `u` (workers) and `v` (jobs).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    #[serde(with = "serde_matrix")]
    pub mu: Vec<Vec<Rational>>,
    #[serde(with = "serde_vec")]
    pub u: Vec<Rational>,
    #[serde(with = "serde_vec")]
    pub v: Vec<Rational>,
}

impl Outcome {
    pub fn zero(problem: &LtuProblem) -> Self {
        let (rows, cols) = (problem.num_workers(), problem.num_jobs());
        Outcome {
            mu: vec![vec![Rational::zero(); cols]; rows],
            u: vec![Rational::zero(); rows],
            v: vec![Rational::zero(); cols],
        }
    }

    pub fn check_dims(&self, problem: &LtuProblem) -> Result<()> {
        let (rows, cols) = (problem.num_workers(), problem.num_jobs());
        check_shape("mu", &self.mu, rows, cols)?;
        if self.u.len() != rows || self.v.len() != cols {
            return Err(Error::DimensionMismatch(format!(
                "outcome utilities have lengths {} and {}, problem is {rows}x{cols}",
                self.u.len(),
                self.v.len()
            )));
        }
        Ok(())
    }

    /// `phi^T mu`.
    pub fn total_output(&self, problem: &LtuProblem) -> Rational {
        self.mu
            .iter()
            .zip(problem.phi())
            .map(|(mu_row, phi_row)| rational::dot(mu_row, phi_row))
            .fold(Rational::zero(), |acc, v| acc + v)
    }

    /// `n^T u + m^T v`.
    pub fn total_utility(&self, problem: &LtuProblem) -> Rational {
        rational::dot(problem.worker_mass(), &self.u) + rational::dot(problem.job_mass(), &self.v)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ValidateOptions {
    /// Reject problems with a nonpositive output (needed for the game reduction).
    pub require_positive_outputs: bool,
}

impl ValidateOptions {
    pub fn for_reduction() -> Self {
        ValidateOptions {
            require_positive_outputs: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeEntry {
    pub id: String,
    #[serde(with = "serde_scalar")]
    pub mass: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairEntry {
    pub x: String,
    pub y: String,
    #[serde(with = "serde_scalar")]
    pub lambda: Rational,
    #[serde(with = "serde_scalar")]
    pub phi: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearEntry {
    pub x: String,
    pub y: String,
    #[serde(with = "serde_scalar")]
    pub a: Rational,
    #[serde(with = "serde_scalar")]
    pub b: Rational,
    #[serde(with = "serde_scalar")]
    pub c: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaxEntry {
    pub x: String,
    pub y: String,
    #[serde(rename = "S", alias = "s", with = "serde_scalar")]
    pub s: Rational,
    #[serde(with = "serde_scalar")]
    pub tau: Rational,
}

/// On-disk problem. Exactly one of `pairs`, `linear_constraints` or `tax` is present.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub workers: Vec<TypeEntry>,
    pub jobs: Vec<TypeEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<PairEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear_constraints: Option<Vec<LinearEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tax: Option<Vec<TaxEntry>>,
}

/// Places per-pair entries into dense matrices keyed by the population's index order.
fn pair_grid<E, const K: usize>(
    population: &Population,
    entries: &[E],
    key: impl Fn(&E) -> (&str, &str),
    values: impl Fn(&E) -> [Rational; K],
) -> Result<[Vec<Vec<Rational>>; K]> {
    let (rows, cols) = (population.num_workers(), population.num_jobs());
    let worker_of: HashMap<&str, usize> = population
        .workers
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let job_of: HashMap<&str, usize> = population
        .jobs
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let mut grid: Vec<Vec<Option<[Rational; K]>>> = vec![vec![None; cols]; rows];
    for entry in entries {
        let (xid, yid) = key(entry);
        let x = *worker_of
            .get(xid)
            .ok_or_else(|| Error::Parse(format!("unknown worker id {xid:?}")))?;
        let y = *job_of
            .get(yid)
            .ok_or_else(|| Error::Parse(format!("unknown job id {yid:?}")))?;
        if grid[x][y].replace(values(entry)).is_some() {
            return Err(Error::DimensionMismatch(format!(
                "pair ({xid}, {yid}) listed twice"
            )));
        }
    }
    let mut out: [Vec<Vec<Rational>>; K] = std::array::from_fn(|_| vec![Vec::new(); rows]);
    for (x, row) in grid.into_iter().enumerate() {
        for (y, cell) in row.into_iter().enumerate() {
            let cell = cell.ok_or_else(|| {
                Error::DimensionMismatch(format!(
                    "pair ({}, {}) is missing",
                    population.workers[x], population.jobs[y]
                ))
            })?;
            for (k, value) in cell.into_iter().enumerate() {
                out[k][x].push(value);
            }
        }
    }
    Ok(out)
}

fn split_types(entries: Vec<TypeEntry>) -> (Vec<String>, Vec<Rational>) {
    entries.into_iter().map(|e| (e.id, e.mass)).unzip()
}

/// Builds a validated problem from a parsed file, canonicalizing alternative blocks.
pub fn validate_problem(file: ProblemFile, options: ValidateOptions) -> Result<LtuProblem> {
    let (workers, worker_mass) = split_types(file.workers);
    let (jobs, job_mass) = split_types(file.jobs);
    let population = Population::new(workers, jobs, worker_mass, job_mass)?;
    let blocks = [
        file.pairs.is_some(),
        file.linear_constraints.is_some(),
        file.tax.is_some(),
    ];
    if blocks.iter().filter(|&&b| b).count() != 1 {
        return Err(Error::Parse(
            "expected exactly one of \"pairs\", \"linear_constraints\", \"tax\"".into(),
        ));
    }
    let problem = if let Some(pairs) = &file.pairs {
        let [lambda, phi] = pair_grid(
            &population,
            pairs,
            |e| (&e.x, &e.y),
            |e| [e.lambda.clone(), e.phi.clone()],
        )?;
        LtuProblem::new(population, lambda, phi)?
    } else if let Some(linear) = &file.linear_constraints {
        let [a, b, c] = pair_grid(
            &population,
            linear,
            |e| (&e.x, &e.y),
            |e| [e.a.clone(), e.b.clone(), e.c.clone()],
        )?;
        LtuProblem::from_linear_constraints(population, &a, &b, &c)?
    } else {
        let tax = file.tax.as_deref().unwrap_or_default();
        let [s, tau] = pair_grid(
            &population,
            tax,
            |e| (&e.x, &e.y),
            |e| [e.s.clone(), e.tau.clone()],
        )?;
        LtuProblem::from_tax_schedule(population, &s, &tau)?
    };
    if options.require_positive_outputs {
        problem.ensure_positive_outputs()?;
    }
    Ok(problem)
}

/// A group of up to `N` slots; `None` marks a vacant slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrangement {
    pub slots: Vec<Option<usize>>,
    pub lambda: Vec<Rational>,
    pub phi: Rational,
}

impl Arrangement {
    /// Number of members of type `x` (the occupancy count).
    pub fn occupancy(&self, x: usize) -> usize {
        self.slots.iter().filter(|s| **s == Some(x)).count()
    }

    /// Total weight carried by members of type `x`.
    pub fn weight(&self, x: usize) -> Rational {
        self.slots
            .iter()
            .zip(&self.lambda)
            .filter(|(s, _)| **s == Some(x))
            .fold(Rational::zero(), |acc, (_, l)| acc + l)
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.slots.iter().flatten().copied()
    }

    pub fn single_type(&self) -> Option<usize> {
        let mut members = self.members();
        match (members.next(), members.next()) {
            (Some(x), None) => Some(x),
            _ => None,
        }
    }

    /// `sum_i lambda_i u_{x_i}`.
    pub fn value(&self, u: &[Rational]) -> Rational {
        self.slots
            .iter()
            .zip(&self.lambda)
            .filter_map(|(s, l)| s.map(|x| l * &u[x]))
            .fold(Rational::zero(), |acc, v| acc + v)
    }
}

/// Many-to-one problem: individuals of types `X` form arrangements of up to `N` members.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManyToOneProblem {
    types: Vec<String>,
    mass: Vec<Rational>,
    size: usize,
    arrangements: Vec<Arrangement>,
}

impl ManyToOneProblem {
    pub fn new(
        types: Vec<String>,
        mass: Vec<Rational>,
        size: usize,
        arrangements: Vec<Arrangement>,
    ) -> Result<Self> {
        if types.is_empty() || types.len() != mass.len() {
            return Err(Error::DimensionMismatch(
                "need a nonempty list of types, each with a mass".into(),
            ));
        }
        check_unique_ids(&types)?;
        for (id, m) in types.iter().zip(&mass) {
            if !m.is_positive() {
                return Err(Error::NonpositiveMass {
                    id: id.clone(),
                    value: m.clone(),
                });
            }
        }
        if size == 0 {
            return Err(Error::DimensionMismatch(
                "arrangement size N must be positive".into(),
            ));
        }
        for (index, arr) in arrangements.iter().enumerate() {
            let bad = |reason: String| Error::InvalidArrangement { index, reason };
            if arr.slots.len() != size || arr.lambda.len() != size {
                return Err(bad(format!(
                    "expected {size} slots and weights, got {} and {}",
                    arr.slots.len(),
                    arr.lambda.len()
                )));
            }
            if arr.members().next().is_none() {
                return Err(bad("empty arrangement".into()));
            }
            for (slot, weight) in arr.slots.iter().zip(&arr.lambda) {
                match slot {
                    Some(x) if *x >= types.len() => {
                        return Err(bad(format!("type index {x} out of range")))
                    }
                    Some(_) if !weight.is_positive() => {
                        return Err(bad("occupied slot must carry a positive weight".into()))
                    }
                    None if !weight.is_zero() => {
                        return Err(bad("vacant slot must carry weight 0".into()))
                    }
                    _ => {}
                }
            }
            if !rational::sum(&arr.lambda).is_one() {
                return Err(bad("weights must sum to 1".into()));
            }
        }
        for (x, id) in types.iter().enumerate() {
            if !arrangements.iter().any(|a| a.single_type() == Some(x)) {
                return Err(Error::InvalidArrangement {
                    index: arrangements.len(),
                    reason: format!("type {id:?} has no arrangement where it is single"),
                });
            }
        }
        Ok(ManyToOneProblem {
            types,
            mass,
            size,
            arrangements,
        })
    }

    /// Encodes a one-to-one problem as pairs and singles of size 2. Worker ids are
    /// prefixed `x:` and job ids `y:`; pair outputs are `phi / 2` and singles output 0.
    pub fn from_one_to_one(problem: &LtuProblem) -> Self {
        let (rows, cols) = (problem.num_workers(), problem.num_jobs());
        let types = problem
            .workers()
            .iter()
            .map(|id| format!("x:{id}"))
            .chain(problem.jobs().iter().map(|id| format!("y:{id}")))
            .collect();
        let mass = problem
            .worker_mass()
            .iter()
            .chain(problem.job_mass())
            .cloned()
            .collect();
        let mut arrangements = Vec::with_capacity(rows * cols + rows + cols);
        for x in 0..rows {
            for y in 0..cols {
                let l = problem.lambda()[x][y].clone();
                arrangements.push(Arrangement {
                    slots: vec![Some(x), Some(rows + y)],
                    lambda: vec![l.clone(), Rational::one() - l],
                    phi: problem.half_output(x, y),
                });
            }
        }
        for t in 0..rows + cols {
            arrangements.push(Arrangement {
                slots: vec![Some(t), None],
                lambda: vec![Rational::one(), Rational::zero()],
                phi: Rational::zero(),
            });
        }
        ManyToOneProblem::new(types, mass, 2, arrangements).expect("embedding is valid")
    }

    pub fn types(&self) -> &[String] {
        &self.types
    }

    pub fn mass(&self) -> &[Rational] {
        &self.mass
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn arrangements(&self) -> &[Arrangement] {
        &self.arrangements
    }

    pub fn num_types(&self) -> usize {
        self.types.len()
    }

    pub fn arrangement_label(&self, a: usize) -> String {
        let slots: Vec<&str> = self.arrangements[a]
            .slots
            .iter()
            .map(|s| s.map_or("_", |x| self.types[x].as_str()))
            .collect();
        format!("[{}]", slots.join(","))
    }

    /// Adds `shift` to every output.
    pub fn with_shifted_outputs(&self, shift: &Rational) -> Self {
        let mut shifted = self.clone();
        for arr in &mut shifted.arrangements {
            arr.phi = &arr.phi + shift;
        }
        shifted
    }

    pub fn ensure_positive_outputs(&self) -> Result<()> {
        for (a, arr) in self.arrangements.iter().enumerate() {
            if !arr.phi.is_positive() {
                return Err(Error::NonpositiveOutput {
                    location: format!("arrangement {}", self.arrangement_label(a)),
                    value: arr.phi.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ManyToOneFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn to_file(&self) -> ManyToOneFile {
        ManyToOneFile {
            types: self
                .types
                .iter()
                .zip(&self.mass)
                .map(|(id, mass)| TypeEntry {
                    id: id.clone(),
                    mass: mass.clone(),
                })
                .collect(),
            size: self.size,
            arrangements: self
                .arrangements
                .iter()
                .map(|arr| ArrangementEntry {
                    slots: arr
                        .slots
                        .iter()
                        .map(|s| s.map(|x| self.types[x].clone()))
                        .collect(),
                    lambda: arr.lambda.clone(),
                    phi: arr.phi.clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("problem serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrangementEntry {
    pub slots: Vec<Option<String>>,
    #[serde(with = "serde_vec")]
    pub lambda: Vec<Rational>,
    #[serde(with = "serde_scalar")]
    pub phi: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManyToOneFile {
    #[serde(alias = "workers")]
    pub types: Vec<TypeEntry>,
    #[serde(rename = "N")]
    pub size: usize,
    pub arrangements: Vec<ArrangementEntry>,
}

impl TryFrom<ManyToOneFile> for ManyToOneProblem {
    type Error = Error;

    fn try_from(file: ManyToOneFile) -> Result<Self> {
        let (types, mass) = split_types(file.types);
        let index: HashMap<&str, usize> = types
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let arrangements = file
            .arrangements
            .into_iter()
            .map(|entry| {
                let slots = entry
                    .slots
                    .iter()
                    .map(|slot| match slot {
                        None => Ok(None),
                        Some(id) => index
                            .get(id.as_str())
                            .map(|&x| Some(x))
                            .ok_or_else(|| Error::Parse(format!("unknown type id {id:?}"))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Arrangement {
                    slots,
                    lambda: entry.lambda,
                    phi: entry.phi,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        ManyToOneProblem::new(types, mass, file.size, arrangements)
    }
}

/// Arrangement masses `mu` and type utilities `u` for a many-to-one problem.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManyToOneOutcome {
    #[serde(with = "serde_vec")]
    pub mu: Vec<Rational>,
    #[serde(with = "serde_vec")]
    pub u: Vec<Rational>,
}

impl ManyToOneOutcome {
    pub fn check_dims(&self, problem: &ManyToOneProblem) -> Result<()> {
        if self.mu.len() != problem.arrangements().len() || self.u.len() != problem.num_types() {
            return Err(Error::DimensionMismatch(format!(
                "outcome has {} arrangement masses and {} utilities, problem has {} and {}",
                self.mu.len(),
                self.u.len(),
                problem.arrangements().len(),
                problem.num_types()
            )));
        }
        Ok(())
    }

    /// Lifts a one-to-one outcome onto [`ManyToOneProblem::from_one_to_one`]:
    /// unmatched mass becomes singles.
    pub fn from_one_to_one(problem: &LtuProblem, outcome: &Outcome) -> Self {
        let (rows, cols) = (problem.num_workers(), problem.num_jobs());
        let mut mu: Vec<Rational> = outcome.mu.iter().flatten().cloned().collect();
        for x in 0..rows {
            mu.push(&problem.worker_mass()[x] - rational::sum(&outcome.mu[x]));
        }
        for y in 0..cols {
            let column = rational::sum(outcome.mu.iter().map(|row| &row[y]));
            mu.push(&problem.job_mass()[y] - column);
        }
        let u = outcome.u.iter().chain(&outcome.v).cloned().collect();
        ManyToOneOutcome { mu, u }
    }

    /// Inverse of [`ManyToOneOutcome::from_one_to_one`].
    pub fn to_one_to_one(&self, problem: &LtuProblem) -> Outcome {
        let (rows, cols) = (problem.num_workers(), problem.num_jobs());
        Outcome {
            mu: (0..rows)
                .map(|x| self.mu[x * cols..(x + 1) * cols].to_vec())
                .collect(),
            u: self.u[..rows].to_vec(),
            v: self.u[rows..rows + cols].to_vec(),
        }
    }
}

/// A restriction of a parent problem to type subsets with new masses and
/// (possibly nonzero) reservation utilities. Pair constraints are inherited.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubproblemSpec {
    pub parent: LtuProblem,
    pub workers: Vec<usize>,
    pub jobs: Vec<usize>,
    pub worker_mass: Vec<Rational>,
    pub job_mass: Vec<Rational>,
    pub worker_reservation: Vec<Rational>,
    pub job_reservation: Vec<Rational>,
}

impl SubproblemSpec {
    /// All types, parent masses, zero reservations.
    pub fn full(parent: &LtuProblem) -> Self {
        SubproblemSpec {
            parent: parent.clone(),
            workers: (0..parent.num_workers()).collect(),
            jobs: (0..parent.num_jobs()).collect(),
            worker_mass: parent.worker_mass().to_vec(),
            job_mass: parent.job_mass().to_vec(),
            worker_reservation: vec![Rational::zero(); parent.num_workers()],
            job_reservation: vec![Rational::zero(); parent.num_jobs()],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn q(v: &[(i64, i64)]) -> Vec<Rational> {
        v.iter().map(|&(n, d)| ratio(n, d)).collect()
    }

    fn figure1_linear() -> (Matrix, Matrix, Matrix) {
        // u1 + 2 v1 = 1, 2 u1 + v2 = 1, u2 + v1 = 1, u2 + v2 = 1
        let a = vec![vec![int(1), int(2)], vec![int(1), int(1)]];
        let b = vec![vec![int(2), int(1)], vec![int(1), int(1)]];
        let c = vec![vec![int(1), int(1)], vec![int(1), int(1)]];
        (a, b, c)
    }

    #[test]
    fn canonicalizes_linear_constraints() {
        let (a, b, c) = figure1_linear();
        let p = LtuProblem::from_linear_constraints(Population::unit(2, 2), &a, &b, &c).unwrap();
        assert_eq!(p.lambda()[0], q(&[(1, 3), (2, 3)]));
        assert_eq!(p.lambda()[1], q(&[(1, 2), (1, 2)]));
        assert_eq!(p.phi()[0], q(&[(2, 3), (2, 3)]));
        assert_eq!(p.phi()[1], q(&[(1, 1), (1, 1)]));
        // Re-expanding reproduces each input constraint up to the positive factor a + b.
        let (ea, eb, ec) = p.linear_constraints();
        for x in 0..2 {
            for y in 0..2 {
                let k = &a[x][y] / &ea[x][y];
                assert_eq!(&eb[x][y] * &k, b[x][y]);
                assert_eq!(&ec[x][y] * &k, c[x][y]);
            }
        }
    }

    #[test]
    fn symmetric_constraint_is_tu_form() {
        let p = LtuProblem::from_linear_constraints(
            Population::unit(1, 1),
            &[vec![int(1)]],
            &[vec![int(1)]],
            &[vec![int(7)]],
        )
        .unwrap();
        assert_eq!(p.lambda()[0][0], ratio(1, 2));
        assert_eq!(p.phi()[0][0], int(7));
    }

    #[test]
    fn rejects_nonpositive_coefficient() {
        let err = LtuProblem::from_linear_constraints(
            Population::unit(1, 1),
            &[vec![int(0)]],
            &[vec![int(1)]],
            &[vec![int(1)]],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::NonpositiveCoefficient { name: "a", .. }
        ));
    }

    #[test]
    fn tax_schedule_examples() {
        let p = LtuProblem::from_tax_schedule(
            Population::unit(1, 3),
            &[vec![int(3), int(4), int(5)]],
            &[vec![ratio(1, 2), int(0), ratio(3, 4)]],
        )
        .unwrap();
        assert_eq!(p.lambda()[0], q(&[(2, 3), (1, 2), (4, 5)]));
        assert_eq!(p.phi()[0], q(&[(2, 1), (4, 1), (2, 1)]));
        let err =
            LtuProblem::from_tax_schedule(Population::unit(1, 1), &[vec![int(1)]], &[vec![int(1)]])
                .unwrap_err();
        assert!(matches!(err, Error::TaxOutOfRange { .. }));
    }

    #[test]
    fn lambda_bounds_are_exclusive() {
        for bad in [int(1), int(0), ratio(3, 2)] {
            let err = LtuProblem::new(Population::unit(1, 1), vec![vec![bad]], vec![vec![int(1)]])
                .unwrap_err();
            assert!(matches!(err, Error::LambdaOutOfRange { .. }));
        }
    }

    const FIGURE1: &str = r#"{
        "workers": [{"id": "1", "mass": 1}, {"id": "2", "mass": "1"}],
        "jobs": [{"id": "1", "mass": 1}, {"id": "2", "mass": 1}],
        "pairs": [
            {"x": "1", "y": "1", "lambda": "1/3", "phi": "2/3"},
            {"x": "1", "y": "2", "lambda": "2/3", "phi": "2/3"},
            {"x": "2", "y": "2", "lambda": "1/2", "phi": 1},
            {"x": "2", "y": "1", "lambda": "1/2", "phi": "1"}
        ]
    }"#;

    #[test]
    fn parses_problem_file_and_round_trips() {
        let p = LtuProblem::from_json(FIGURE1, ValidateOptions::for_reduction()).unwrap();
        assert_eq!(p.phi()[1], q(&[(1, 1), (1, 1)]));
        let again = LtuProblem::from_json(&p.to_json(), ValidateOptions::default()).unwrap();
        assert_eq!(again, p);
    }

    #[test]
    fn zero_output_rejected_only_for_reduction() {
        let text = FIGURE1.replace(r#""phi": "2/3"}"#, r#""phi": 0}"#);
        assert!(LtuProblem::from_json(&text, ValidateOptions::default()).is_ok());
        let err = LtuProblem::from_json(&text, ValidateOptions::for_reduction()).unwrap_err();
        assert!(matches!(err, Error::NonpositiveOutput { .. }));
    }

    #[test]
    fn missing_or_duplicate_pairs_are_dimension_errors() {
        let missing = r#"{"workers": [{"id": "a", "mass": 1}], "jobs": [{"id": "b", "mass": 1}, {"id": "c", "mass": 1}],
            "pairs": [{"x": "a", "y": "b", "lambda": "1/2", "phi": 1}]}"#;
        assert!(matches!(
            LtuProblem::from_json(missing, ValidateOptions::default()),
            Err(Error::DimensionMismatch(_))
        ));
        let dup = r#"{"workers": [{"id": "a", "mass": 1}], "jobs": [{"id": "b", "mass": 1}],
            "pairs": [{"x": "a", "y": "b", "lambda": "1/2", "phi": 1}, {"x": "a", "y": "b", "lambda": "1/2", "phi": 1}]}"#;
        assert!(matches!(
            LtuProblem::from_json(dup, ValidateOptions::default()),
            Err(Error::DimensionMismatch(_))
        ));
        let mass = r#"{"workers": [{"id": "a", "mass": 0}], "jobs": [{"id": "b", "mass": 1}],
            "pairs": [{"x": "a", "y": "b", "lambda": "1/2", "phi": 1}]}"#;
        assert!(matches!(
            LtuProblem::from_json(mass, ValidateOptions::default()),
            Err(Error::NonpositiveMass { .. })
        ));
    }

    #[test]
    fn alternative_blocks_canonicalize_on_load() {
        let linear = r#"{"workers": [{"id": "1", "mass": 1}], "jobs": [{"id": "1", "mass": 1}],
            "linear_constraints": [{"x": "1", "y": "1", "a": 1, "b": 2, "c": 1}]}"#;
        let p = LtuProblem::from_json(linear, ValidateOptions::default()).unwrap();
        assert_eq!(
            (p.lambda()[0][0].clone(), p.phi()[0][0].clone()),
            (ratio(1, 3), ratio(2, 3))
        );
        let tax = r#"{"workers": [{"id": "1", "mass": 1}], "jobs": [{"id": "1", "mass": 1}],
            "tax": [{"x": "1", "y": "1", "S": 3, "tau": "1/2"}]}"#;
        let p = LtuProblem::from_json(tax, ValidateOptions::default()).unwrap();
        assert_eq!(
            (p.lambda()[0][0].clone(), p.phi()[0][0].clone()),
            (ratio(2, 3), int(2))
        );
        let both = linear.replace(
            "\"linear_constraints\"",
            "\"pairs\": [], \"linear_constraints\"",
        );
        assert!(LtuProblem::from_json(&both, ValidateOptions::default()).is_err());
    }

    const ROOMMATE: &str = r#"{
        "types": [{"id": "1", "mass": 2}],
        "N": 2,
        "arrangements": [
            {"slots": ["1", null], "lambda": [1, 0], "phi": "1/2"},
            {"slots": ["1", "1"], "lambda": ["1/2", "1/2"], "phi": 2}
        ]
    }"#;

    #[test]
    fn parses_many_to_one_file() {
        let p = ManyToOneProblem::from_json(ROOMMATE).unwrap();
        assert_eq!(p.arrangements()[1].occupancy(0), 2);
        assert_eq!(p.arrangements()[1].weight(0), int(1));
        assert_eq!(p.arrangement_label(0), "[1,_]");
        assert_eq!(ManyToOneProblem::from_json(&p.to_json()).unwrap(), p);
    }

    #[test]
    fn many_to_one_invariants() {
        let no_single = ROOMMATE.replace(
            r#"{"slots": ["1", null], "lambda": [1, 0], "phi": "1/2"},"#,
            "",
        );
        assert!(matches!(
            ManyToOneProblem::from_json(&no_single),
            Err(Error::InvalidArrangement { .. })
        ));
        let bad_sum = ROOMMATE.replace(r#"["1/2", "1/2"]"#, r#"["1/2", "1/3"]"#);
        assert!(ManyToOneProblem::from_json(&bad_sum).is_err());
        let vacant_weight = ROOMMATE.replace("[1, 0]", r#"["1/2", "1/2"]"#);
        assert!(ManyToOneProblem::from_json(&vacant_weight).is_err());
        let empty = ROOMMATE.replace(
            r#"["1", "1"], "lambda": ["1/2", "1/2"]"#,
            r#"[null, null], "lambda": [0, 0]"#,
        );
        assert!(ManyToOneProblem::from_json(&empty).is_err());
    }

    #[test]
    fn one_to_one_embedding_round_trips_outcomes() {
        let p = LtuProblem::from_json(FIGURE1, ValidateOptions::default()).unwrap();
        let m2o = ManyToOneProblem::from_one_to_one(&p);
        assert_eq!(m2o.arrangements().len(), 4 + 4);
        let outcome = Outcome {
            mu: vec![vec![int(1), int(0)], vec![int(0), ratio(1, 2)]],
            u: vec![int(1), int(1)],
            v: vec![int(0), int(0)],
        };
        let lifted = ManyToOneOutcome::from_one_to_one(&p, &outcome);
        assert_eq!(lifted.mu[4..], q(&[(0, 1), (1, 2), (0, 1), (1, 2)])[..]);
        assert_eq!(lifted.to_one_to_one(&p), outcome);
    }
}
