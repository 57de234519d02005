//! Seeded random instances on small rational grids.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{LtuProblem, Population};
use crate::rational::{ratio, Rational};

#[derive(Clone, Copy, Debug)]
pub struct FuzzConfig {
    pub max_workers: usize,
    pub max_jobs: usize,
    /// Largest denominator for transfer rates.
    pub lambda_denominator: i64,
    /// Largest denominator and largest value for outputs.
    pub phi_denominator: i64,
    pub phi_max: i64,
    /// Use unit masses instead of random ones.
    pub unit_masses: bool,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            max_workers: 3,
            max_jobs: 3,
            lambda_denominator: 20,
            phi_denominator: 10,
            phi_max: 10,
            unit_masses: false,
        }
    }
}

pub struct InstanceGenerator {
    rng: ChaCha8Rng,
    config: FuzzConfig,
}

impl InstanceGenerator {
    pub fn new(seed: u64, config: FuzzConfig) -> Self {
        InstanceGenerator {
            rng: ChaCha8Rng::seed_from_u64(seed),
            config,
        }
    }

    fn lambda(&mut self) -> Rational {
        let d = self.rng.random_range(2..=self.config.lambda_denominator);
        ratio(self.rng.random_range(1..d), d)
    }

    fn phi(&mut self) -> Rational {
        let d = self.rng.random_range(1..=self.config.phi_denominator);
        ratio(self.rng.random_range(1..=self.config.phi_max * d), d)
    }

    /// `k / d` with `d <= 4` and value at most 3.
    fn mass(&mut self) -> Rational {
        if self.config.unit_masses {
            return ratio(1, 1);
        }
        let d = self.rng.random_range(1..=4);
        ratio(self.rng.random_range(1..=3 * d), d)
    }

    fn population(&mut self) -> Population {
        let nx = self.rng.random_range(1..=self.config.max_workers);
        let ny = self.rng.random_range(1..=self.config.max_jobs);
        self.population_sized(nx, ny)
    }

    fn population_sized(&mut self, nx: usize, ny: usize) -> Population {
        let ids = |n: usize| (1..=n).map(|i| i.to_string()).collect();
        let worker_mass = (0..nx).map(|_| self.mass()).collect();
        let job_mass = (0..ny).map(|_| self.mass()).collect();
        Population::new(ids(nx), ids(ny), worker_mass, job_mass)
            .expect("generated masses are positive")
    }

    pub fn ltu(&mut self) -> LtuProblem {
        let pop = self.population();
        self.fill(pop)
    }

    /// A random problem of exactly the given size.
    pub fn ltu_sized(&mut self, num_workers: usize, num_jobs: usize) -> LtuProblem {
        let pop = self.population_sized(num_workers, num_jobs);
        self.fill(pop)
    }

    fn fill(&mut self, pop: Population) -> LtuProblem {
        let (nx, ny) = (pop.num_workers(), pop.num_jobs());
        let lambda = (0..nx)
            .map(|_| (0..ny).map(|_| self.lambda()).collect())
            .collect();
        let phi = (0..nx)
            .map(|_| (0..ny).map(|_| self.phi()).collect())
            .collect();
        LtuProblem::new(pop, lambda, phi).expect("generated problem is valid")
    }

    /// A TU instance: `lambda = a_x / (a_x + b_y)` for random positive integers.
    pub fn tu(&mut self) -> LtuProblem {
        let pop = self.population();
        let (nx, ny) = (pop.num_workers(), pop.num_jobs());
        let a: Vec<i64> = (0..nx).map(|_| self.rng.random_range(1..=5)).collect();
        let b: Vec<i64> = (0..ny).map(|_| self.rng.random_range(1..=5)).collect();
        let lambda = a
            .iter()
            .map(|&ax| b.iter().map(|&by| ratio(ax, ax + by)).collect())
            .collect();
        let phi = (0..nx)
            .map(|_| (0..ny).map(|_| self.phi()).collect())
            .collect();
        LtuProblem::new(pop, lambda, phi).expect("generated problem is valid")
    }
}
