//! Lemke-Howson complementary pivoting in exact integer arithmetic.
//!
//! The hider's utility is `-loss`. Both utility matrices are shifted to be
//! strictly positive and scaled to integers, which leaves best responses
//! unchanged and makes both best-response polytopes bounded. Tableaux use
//! fraction-free pivoting with a common determinant, and the leaving variable
//! is chosen by the lexicographic minimum-ratio rule so degenerate games
//! (which hide-and-seek games usually are) still terminate.
//!
//! Labels `0..rows` belong to hider strategies, `rows..rows+cols` to seeker
//! strategies.

use std::cmp::Ordering;

use log::debug;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::game::{
    is_equilibrium, BimatrixGame, EquilibriumCertificate, EquilibriumCheck, MixedProfile,
};
use crate::rational::{self, Rational};

pub const DEFAULT_MAX_PIVOTS: usize = 1_000_000;

#[derive(Clone, Copy, Debug)]
pub struct LemkeHowsonOptions {
    pub max_pivots: usize,
}

impl Default for LemkeHowsonOptions {
    fn default() -> Self {
        LemkeHowsonOptions {
            max_pivots: DEFAULT_MAX_PIVOTS,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LemkeHowsonRun {
    pub certificate: EquilibriumCertificate,
    /// Labels that entered a basis, in pivot order.
    pub trace: Vec<usize>,
}

pub fn lemke_howson(game: &BimatrixGame, initial_label: usize) -> Result<EquilibriumCertificate> {
    lemke_howson_with(game, initial_label, LemkeHowsonOptions::default()).map(|run| run.certificate)
}

pub fn lemke_howson_with(
    game: &BimatrixGame,
    initial_label: usize,
    options: LemkeHowsonOptions,
) -> Result<LemkeHowsonRun> {
    game.check()?;
    let (r, c) = (game.num_rows(), game.num_cols());
    if initial_label >= r + c {
        return Err(Error::IndexOutOfRange {
            what: "labels",
            index: initial_label,
            len: r + c,
        });
    }

    let (hider, seeker) = positive_integer_utilities(game);
    // P: seeker's best-response constraints on the hider's x (x_i has label i).
    let mut tab_p = Tableau::new(c, r, |j, i| seeker[i][j].clone(), |i| i, |j| r + j);
    // Q: hider's best-response constraints on the seeker's y (y_j has label r + j).
    let mut tab_q = Tableau::new(r, c, |i, j| hider[i][j].clone(), |j| r + j, |i| i);

    let mut on_p = initial_label < r;
    let mut entering = initial_label;
    let mut trace = Vec::new();
    loop {
        if trace.len() >= options.max_pivots {
            return Err(Error::IterationLimit(options.max_pivots));
        }
        trace.push(entering);
        let tab = if on_p { &mut tab_p } else { &mut tab_q };
        let col = tab.var_with_label(entering);
        let Some(row) = tab.lexmin_ratio(col) else {
            return Err(Error::RayTermination { trace });
        };
        let leaving = tab.pivot(row, col);
        if leaving == initial_label {
            break;
        }
        entering = leaving;
        on_p = !on_p;
    }
    debug!(
        "lemke-howson from label {initial_label}: {} pivots",
        trace.len()
    );

    let x = tab_p.structural_values();
    let y = tab_q.structural_values();
    let profile = MixedProfile {
        p: normalize(x),
        q: normalize(y),
    };
    match is_equilibrium(game, &profile)? {
        EquilibriumCheck::Accepted(certificate) => Ok(LemkeHowsonRun { certificate, trace }),
        EquilibriumCheck::Rejected(dev) => Err(Error::Internal(format!(
            "lemke-howson endpoint failed the equilibrium check: {dev}"
        ))),
    }
}

/// Hider utility `max(loss) + 1 - loss` and seeker utility `payoff - min(payoff) + 1`,
/// each scaled by its common denominator.
fn positive_integer_utilities(game: &BimatrixGame) -> (Vec<Vec<BigInt>>, Vec<Vec<BigInt>>) {
    let one = rational::int(1);
    let max_loss = game.loss.iter().flatten().max().expect("nonempty game");
    let min_payoff = game.payoff.iter().flatten().min().expect("nonempty game");
    let hider: Vec<Vec<Rational>> = game
        .loss
        .iter()
        .map(|row| row.iter().map(|l| max_loss + &one - l).collect())
        .collect();
    let seeker: Vec<Vec<Rational>> = game
        .payoff
        .iter()
        .map(|row| row.iter().map(|v| v - min_payoff + &one).collect())
        .collect();
    (to_integers(&hider), to_integers(&seeker))
}

fn to_integers(matrix: &[Vec<Rational>]) -> Vec<Vec<BigInt>> {
    let scale = Rational::from_integer(rational::common_denominator(matrix.iter().flatten()));
    matrix
        .iter()
        .map(|row| row.iter().map(|v| (v * &scale).to_integer()).collect())
        .collect()
}

fn normalize(values: Vec<Rational>) -> Vec<Rational> {
    let total = rational::sum(&values);
    values.into_iter().map(|v| v / &total).collect()
}

/// Integer tableau for `M z + s = 1`, `z, s >= 0`. Columns `0..n` are the
/// structural variables, `n..n+m` the slacks, and the last column the rhs.
/// Every basic variable carries coefficient `det` in its own row.
struct Tableau {
    rows: Vec<Vec<BigInt>>,
    basis: Vec<usize>,
    det: BigInt,
    num_structural: usize,
    labels: Vec<usize>,
}

impl Tableau {
    fn new(
        num_rows: usize,
        num_structural: usize,
        entry: impl Fn(usize, usize) -> BigInt,
        structural_label: impl Fn(usize) -> usize,
        slack_label: impl Fn(usize) -> usize,
    ) -> Self {
        let width = num_structural + num_rows + 1;
        let rows = (0..num_rows)
            .map(|i| {
                let mut row = vec![BigInt::zero(); width];
                for (k, cell) in row.iter_mut().take(num_structural).enumerate() {
                    *cell = entry(i, k);
                }
                row[num_structural + i] = BigInt::from(1);
                row[width - 1] = BigInt::from(1);
                row
            })
            .collect();
        let labels = (0..num_structural)
            .map(structural_label)
            .chain((0..num_rows).map(slack_label))
            .collect();
        Tableau {
            rows,
            basis: (num_structural..num_structural + num_rows).collect(),
            det: BigInt::from(1),
            num_structural,
            labels,
        }
    }

    fn var_with_label(&self, label: usize) -> usize {
        self.labels
            .iter()
            .position(|&l| l == label)
            .expect("every label has a variable in each tableau")
    }

    fn rhs(&self, row: usize) -> &BigInt {
        self.rows[row].last().expect("rhs column")
    }

    /// Lexicographic minimum ratio over `(rhs, B^-1 row) / entering coefficient`.
    fn lexmin_ratio(&self, col: usize) -> Option<usize> {
        let rhs_col = self.rows.first()?.len() - 1;
        let keys: Vec<usize> = std::iter::once(rhs_col)
            .chain(self.num_structural..rhs_col)
            .collect();
        let compare = |a: usize, b: usize| {
            let (ra, rb) = (&self.rows[a], &self.rows[b]);
            for &k in &keys {
                let ord = (&ra[k] * &rb[col]).cmp(&(&rb[k] * &ra[col]));
                if ord != Ordering::Equal {
                    return ord;
                }
            }
            Ordering::Equal
        };
        (0..self.rows.len())
            .filter(|&i| self.rows[i][col].is_positive())
            .min_by(|&a, &b| compare(a, b))
    }

    /// Pivots `col` into the basis at `row`; returns the label that left.
    fn pivot(&mut self, row: usize, col: usize) -> usize {
        let pivot_row = self.rows[row].clone();
        let pe = pivot_row[col].clone();
        for (i, current) in self.rows.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let ie = current[col].clone();
            for (cell, pj) in current.iter_mut().zip(&pivot_row) {
                let value = &*cell * &pe - &ie * pj;
                *cell = value / &self.det;
            }
        }
        self.det = pe;
        let leaving = std::mem::replace(&mut self.basis[row], col);
        self.labels[leaving]
    }

    fn structural_values(&self) -> Vec<Rational> {
        let mut values = vec![Rational::zero(); self.num_structural];
        for (row, &var) in self.basis.iter().enumerate() {
            if var < self.num_structural {
                values[var] = Rational::new(self.rhs(row).clone(), self.det.clone());
            }
        }
        values
    }
}
