//! Exhaustive equilibrium enumeration for small games.
//!
//! Each candidate fixes a support `I` for one player together with an equally
//! sized set `J` of opponent strategies forced to be indifferent, and solves
//! that square indifference system exactly on the positively shifted
//! matrices. The nonsingular, feasible solutions are exactly the vertices of
//! the two best-response polytopes, so degenerate games (whose equilibrium
//! sets contain continua) are reported through their extreme equilibria.
//! Completely labeled vertex pairs are the extreme equilibria.

use std::collections::BTreeSet;

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::game::{
    is_equilibrium, BimatrixGame, EquilibriumCertificate, EquilibriumCheck, MixedProfile,
};
use crate::rational::{self, Rational};

pub const DEFAULT_BUDGET: u128 = 1_000_000;

#[derive(Clone, Copy, Debug)]
pub struct EnumerationOptions {
    pub max_support: usize,
    /// Cap on the number of square systems solved across both players.
    pub budget: u128,
}

impl EnumerationOptions {
    pub fn full(game: &BimatrixGame) -> Self {
        EnumerationOptions {
            max_support: game.num_rows().max(game.num_cols()),
            budget: DEFAULT_BUDGET,
        }
    }
}

/// Number of `(support, indifference set)` systems for both players.
pub fn system_count(rows: usize, cols: usize, max_support: usize) -> u128 {
    let binom = |n: usize, k: usize| -> u128 {
        if k > n {
            return 0;
        }
        (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
    };
    let per_player: u128 = (1..=max_support.min(rows).min(cols))
        .map(|k| binom(rows, k).saturating_mul(binom(cols, k)))
        .fold(0u128, |acc, v| acc.saturating_add(v));
    per_player.saturating_mul(2)
}

struct Vertex {
    point: Vec<Rational>,
    support: Vec<usize>,
    labels: Labels,
}

/// Fixed-width label set.
#[derive(Clone, PartialEq, Eq)]
struct Labels(Vec<u64>);

impl Labels {
    fn new(count: usize) -> Self {
        Labels(vec![0; count.div_ceil(64)])
    }

    fn insert(&mut self, label: usize) {
        self.0[label / 64] |= 1 << (label % 64);
    }

    fn covers_all_with(&self, other: &Labels, count: usize) -> bool {
        (0..count.div_ceil(64)).all(|w| {
            let full = if (w + 1) * 64 <= count {
                u64::MAX
            } else {
                (1u64 << (count % 64)) - 1
            };
            (self.0[w] | other.0[w]) == full
        })
    }
}

/// Solves `a z = rhs` by fraction-free Gauss-Jordan elimination. Returns the
/// numerators and the common denominator, or `None` if `a` is singular.
fn solve_integer(mut a: Vec<Vec<BigInt>>) -> Option<(Vec<BigInt>, BigInt)> {
    let k = a.len();
    let mut prev = BigInt::one();
    for col in 0..k {
        let pivot = (col..k).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let pivot_row = a[col].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == col {
                continue;
            }
            let factor = row[col].clone();
            for (cell, p) in row.iter_mut().zip(&pivot_row) {
                *cell = (&*cell * &pivot_row[col] - &factor * p) / &prev;
            }
        }
        prev = pivot_row[col].clone();
    }
    Some((a.into_iter().map(|row| row[k].clone()).collect(), prev))
}

/// Vertices of `{z >= 0 : M^T z <= 1}` where `m` is `own x other`, integer and positive.
/// Labels: `own_label(i)` when `z_i = 0`, `other_label(j)` when constraint `j` binds.
fn vertices(
    m: &[Vec<BigInt>],
    max_support: usize,
    num_labels: usize,
    own_label: impl Fn(usize) -> usize,
    other_label: impl Fn(usize) -> usize,
) -> Vec<Vertex> {
    let own = m.len();
    let other = m[0].len();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for k in 1..=max_support.min(own).min(other) {
        for support in (0..own).combinations(k) {
            for tight in (0..other).combinations(k) {
                let system = tight
                    .iter()
                    .map(|&j| {
                        support
                            .iter()
                            .map(|&i| m[i][j].clone())
                            .chain(std::iter::once(BigInt::one()))
                            .collect()
                    })
                    .collect();
                let Some((mut numer, mut denom)) = solve_integer(system) else {
                    continue;
                };
                if denom.is_negative() {
                    denom = -denom;
                    numer.iter_mut().for_each(|v| *v = -&*v);
                }
                if !numer.iter().all(|v| v.is_positive()) {
                    continue;
                }
                let mut labels = Labels::new(num_labels);
                (0..own)
                    .filter(|i| !support.contains(i))
                    .for_each(|i| labels.insert(own_label(i)));
                let mut feasible = true;
                for j in 0..other {
                    let load = support
                        .iter()
                        .zip(&numer)
                        .fold(BigInt::zero(), |acc, (&i, z)| acc + &m[i][j] * z);
                    if load > denom {
                        feasible = false;
                        break;
                    }
                    if load == denom {
                        labels.insert(other_label(j));
                    }
                }
                if !feasible {
                    continue;
                }
                let mut point = vec![Rational::zero(); own];
                for (&i, z) in support.iter().zip(numer) {
                    point[i] = Rational::new(z, denom.clone());
                }
                if seen.insert(point.clone()) {
                    out.push(Vertex {
                        point,
                        support: support.clone(),
                        labels,
                    });
                }
            }
        }
    }
    out
}

/// All extreme equilibria whose supports have at most `max_support` strategies,
/// sorted by (hider support, seeker support, profile).
pub fn enumerate_equilibria(
    game: &BimatrixGame,
    options: EnumerationOptions,
) -> Result<Vec<EquilibriumCertificate>> {
    game.check()?;
    let (r, c) = (game.num_rows(), game.num_cols());
    let needed = system_count(r, c, options.max_support);
    if needed > options.budget {
        return Err(Error::BudgetExceeded {
            needed,
            budget: options.budget,
        });
    }
    let (hider, seeker) = positive_integer_utilities(game);
    let labels = r + c;
    // x over rows, constrained by the seeker's payoffs; y over columns, by the hider's.
    let xs = vertices(&seeker, options.max_support, labels, |i| i, |j| r + j);
    let ys = vertices(
        &transpose(&hider),
        options.max_support,
        labels,
        |j| r + j,
        |i| i,
    );

    let mut found = Vec::new();
    for x in &xs {
        for y in &ys {
            if !x.labels.covers_all_with(&y.labels, labels) {
                continue;
            }
            let profile = MixedProfile {
                p: normalize(&x.point),
                q: normalize(&y.point),
            };
            match is_equilibrium(game, &profile)? {
                EquilibriumCheck::Accepted(cert) => {
                    found.push(((x.support.clone(), y.support.clone()), cert))
                }
                EquilibriumCheck::Rejected(dev) => {
                    return Err(Error::Internal(format!(
                        "completely labeled vertex pair is not an equilibrium: {dev}"
                    )))
                }
            }
        }
    }
    found.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.profile.cmp(&b.1.profile)));
    Ok(found.into_iter().map(|(_, cert)| cert).collect())
}

/// Both utilities as rows x cols integer matrices, shifted to be strictly
/// positive and scaled by a common denominator.
fn positive_integer_utilities(game: &BimatrixGame) -> (Vec<Vec<BigInt>>, Vec<Vec<BigInt>>) {
    let one = rational::int(1);
    let max_loss = game
        .loss
        .iter()
        .flatten()
        .max()
        .expect("nonempty game")
        .clone();
    let min_payoff = game
        .payoff
        .iter()
        .flatten()
        .min()
        .expect("nonempty game")
        .clone();
    let hider: Vec<Vec<Rational>> = game
        .loss
        .iter()
        .map(|row| row.iter().map(|l| &max_loss + &one - l).collect())
        .collect();
    let seeker: Vec<Vec<Rational>> = game
        .payoff
        .iter()
        .map(|row| row.iter().map(|v| v - &min_payoff + &one).collect())
        .collect();
    (to_integers(&hider), to_integers(&seeker))
}

fn to_integers(m: &[Vec<Rational>]) -> Vec<Vec<BigInt>> {
    let scale = m
        .iter()
        .flatten()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    m.iter()
        .map(|row| {
            row.iter()
                .map(|v| v.numer() * (&scale / v.denom()))
                .collect()
        })
        .collect()
}

fn transpose(m: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    (0..m[0].len())
        .map(|j| m.iter().map(|row| row[j].clone()).collect())
        .collect()
}

fn normalize(v: &[Rational]) -> Vec<Rational> {
    let total = rational::sum(v);
    v.iter().map(|x| x / &total).collect()
}
