//! Bimatrix games between a hider (row player, minimizes `loss`) and a seeker
//! (column player, maximizes `payoff`), and exact equilibrium checks.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, serde_matrix, serde_scalar, serde_vec, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BimatrixGame {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    #[serde(with = "serde_matrix")]
    pub loss: Vec<Vec<Rational>>,
    #[serde(with = "serde_matrix")]
    pub payoff: Vec<Vec<Rational>>,
}

impl BimatrixGame {
    pub fn new(
        rows: Vec<String>,
        cols: Vec<String>,
        loss: Vec<Vec<Rational>>,
        payoff: Vec<Vec<Rational>>,
    ) -> Result<Self> {
        let game = BimatrixGame {
            rows,
            cols,
            loss,
            payoff,
        };
        game.check()?;
        Ok(game)
    }

    pub fn check(&self) -> Result<()> {
        let (r, c) = (self.rows.len(), self.cols.len());
        if r == 0 || c == 0 {
            return Err(Error::DimensionMismatch(
                "game needs at least one strategy per player".into(),
            ));
        }
        for (name, m) in [("loss", &self.loss), ("payoff", &self.payoff)] {
            if m.len() != r || m.iter().any(|row| row.len() != c) {
                return Err(Error::DimensionMismatch(format!("{name} must be {r}x{c}")));
            }
        }
        Ok(())
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols.len()
    }

    /// Hider's expected loss for each pure row against `q`.
    pub fn row_losses(&self, q: &[Rational]) -> Vec<Rational> {
        self.loss.iter().map(|row| rational::dot(row, q)).collect()
    }

    /// Seeker's expected payoff for each pure column against `p`.
    pub fn col_payoffs(&self, p: &[Rational]) -> Vec<Rational> {
        (0..self.num_cols())
            .map(|j| {
                p.iter()
                    .zip(&self.payoff)
                    .fold(Rational::zero(), |acc, (pi, row)| acc + pi * &row[j])
            })
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let game: BimatrixGame = serde_json::from_str(text)?;
        game.check()?;
        Ok(game)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("game serializes")
    }
}

/// Mixed strategies `p` (hider, over rows) and `q` (seeker, over columns).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MixedProfile {
    #[serde(with = "serde_vec")]
    pub p: Vec<Rational>,
    #[serde(with = "serde_vec")]
    pub q: Vec<Rational>,
}

impl MixedProfile {
    pub fn new(p: Vec<Rational>, q: Vec<Rational>) -> Result<Self> {
        let profile = MixedProfile { p, q };
        profile.check()?;
        Ok(profile)
    }

    pub fn check(&self) -> Result<()> {
        for (name, v) in [("p", &self.p), ("q", &self.q)] {
            if !rational::is_probability_vector(v) {
                return Err(Error::InvalidProfile(format!(
                    "{name} must be nonnegative and sum to 1"
                )));
            }
        }
        Ok(())
    }

    pub fn pure(rows: usize, row: usize, cols: usize, col: usize) -> Self {
        let delta = |n: usize, k: usize| {
            (0..n)
                .map(|i| {
                    if i == k {
                        rational::int(1)
                    } else {
                        Rational::zero()
                    }
                })
                .collect()
        };
        MixedProfile {
            p: delta(rows, row),
            q: delta(cols, col),
        }
    }

    pub fn uniform(rows: usize, cols: usize) -> Self {
        MixedProfile {
            p: vec![rational::ratio(1, rows as i64); rows],
            q: vec![rational::ratio(1, cols as i64); cols],
        }
    }

    pub fn hider_support(&self) -> Vec<usize> {
        support(&self.p)
    }

    pub fn seeker_support(&self) -> Vec<usize> {
        support(&self.q)
    }
}

pub(crate) fn support(v: &[Rational]) -> Vec<usize> {
    v.iter()
        .enumerate()
        .filter(|(_, x)| x.is_positive())
        .map(|(i, _)| i)
        .collect()
}

fn check_dims(game: &BimatrixGame, profile: &MixedProfile) -> Result<()> {
    if profile.p.len() != game.num_rows() || profile.q.len() != game.num_cols() {
        return Err(Error::DimensionMismatch(format!(
            "profile has {}+{} entries, game is {}x{}",
            profile.p.len(),
            profile.q.len(),
            game.num_rows(),
            game.num_cols()
        )));
    }
    Ok(())
}

/// Expected hider loss `p^T loss q` and seeker payoff `p^T payoff q`.
pub fn expected_values(
    game: &BimatrixGame,
    profile: &MixedProfile,
) -> Result<(Rational, Rational)> {
    check_dims(game, profile)?;
    let ell = rational::dot(&profile.p, &game.row_losses(&profile.q));
    let pi = rational::dot(&profile.q, &game.col_payoffs(&profile.p));
    Ok((ell, pi))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquilibriumCertificate {
    pub profile: MixedProfile,
    #[serde(with = "serde_scalar")]
    pub hider_loss: Rational,
    #[serde(with = "serde_scalar")]
    pub seeker_payoff: Rational,
    pub hider_support: Vec<usize>,
    pub seeker_support: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Hider,
    Seeker,
}

/// A pure strategy that strictly improves on the current profile for one player.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deviation {
    pub player: Player,
    pub strategy: usize,
    #[serde(with = "serde_scalar")]
    pub current: Rational,
    #[serde(with = "serde_scalar")]
    pub deviation: Rational,
}

impl fmt::Display for Deviation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.player {
            Player::Hider => "hider row",
            Player::Seeker => "seeker column",
        };
        write!(
            f,
            "{what} {} yields {} against the current {}",
            self.strategy, self.deviation, self.current
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EquilibriumCheck {
    Accepted(EquilibriumCertificate),
    Rejected(Deviation),
}

impl EquilibriumCheck {
    pub fn is_accepted(&self) -> bool {
        matches!(self, EquilibriumCheck::Accepted(_))
    }

    pub fn certificate(self) -> Result<EquilibriumCertificate> {
        match self {
            EquilibriumCheck::Accepted(cert) => Ok(cert),
            EquilibriumCheck::Rejected(dev) => Err(Error::NotAnEquilibrium(Box::new(dev))),
        }
    }
}

/// Checks every pure deviation of both players. By linearity this decides the
/// equilibrium property; the witness is the most improving pure strategy
/// (lowest index on ties).
pub fn is_equilibrium(game: &BimatrixGame, profile: &MixedProfile) -> Result<EquilibriumCheck> {
    check_dims(game, profile)?;
    profile.check()?;
    let losses = game.row_losses(&profile.q);
    let payoffs = game.col_payoffs(&profile.p);
    let ell = rational::dot(&profile.p, &losses);
    let pi = rational::dot(&profile.q, &payoffs);

    let best_row = (0..losses.len())
        .min_by(|&a, &b| losses[a].cmp(&losses[b]).then(a.cmp(&b)))
        .expect("game has rows");
    if losses[best_row] < ell {
        return Ok(EquilibriumCheck::Rejected(Deviation {
            player: Player::Hider,
            strategy: best_row,
            current: ell,
            deviation: losses[best_row].clone(),
        }));
    }
    let best_col = (0..payoffs.len())
        .min_by(|&a, &b| payoffs[b].cmp(&payoffs[a]).then(a.cmp(&b)))
        .expect("game has columns");
    if payoffs[best_col] > pi {
        return Ok(EquilibriumCheck::Rejected(Deviation {
            player: Player::Seeker,
            strategy: best_col,
            current: pi,
            deviation: payoffs[best_col].clone(),
        }));
    }
    Ok(EquilibriumCheck::Accepted(EquilibriumCertificate {
        hider_support: profile.hider_support(),
        seeker_support: profile.seeker_support(),
        profile: profile.clone(),
        hider_loss: ell,
        seeker_payoff: pi,
    }))
}
