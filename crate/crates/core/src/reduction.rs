//! Reductions between matching problems and generalized hide-and-seek games.
//!
//! One-to-one: the hider picks a cell `xy`, the seeker a row `x` or a column
//! `y`. Finding the hider through row `x` costs it `lambda / (n_x phi)` and
//! pays the seeker `1 / (2 n_x phi)`; through column `y` the amounts are
//! `(1 - lambda) / (m_y phi)` and `1 / (2 m_y phi)`.
//!
//! Many-to-one: the hider picks an arrangement, the seeker a type. The two
//! families of maps carry different factors of two and are kept separate.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::game::{expected_values, is_equilibrium, BimatrixGame, EquilibriumCheck, MixedProfile};
use crate::model::{LtuProblem, ManyToOneOutcome, ManyToOneProblem, Outcome};
use crate::rational::{self, Rational};

/// Index of the hider strategy for cell `(x, y)` (row-major).
pub fn cell_index(problem: &LtuProblem, x: usize, y: usize) -> usize {
    x * problem.num_jobs() + y
}

pub fn to_game(problem: &LtuProblem) -> Result<BimatrixGame> {
    problem.ensure_positive_outputs()?;
    let (nx, ny) = (problem.num_workers(), problem.num_jobs());
    let two = rational::int(2);
    let mut rows = Vec::with_capacity(nx * ny);
    let mut loss = Vec::with_capacity(nx * ny);
    let mut payoff = Vec::with_capacity(nx * ny);
    for x in 0..nx {
        for y in 0..ny {
            rows.push(format!("({},{})", problem.workers()[x], problem.jobs()[y]));
            let phi = &problem.phi()[x][y];
            let lambda = &problem.lambda()[x][y];
            let n = &problem.worker_mass()[x];
            let m = &problem.job_mass()[y];
            let mut loss_row = vec![Rational::zero(); nx + ny];
            let mut payoff_row = vec![Rational::zero(); nx + ny];
            loss_row[x] = lambda / (n * phi);
            payoff_row[x] = (&two * n * phi).recip();
            loss_row[nx + y] = (Rational::one() - lambda) / (m * phi);
            payoff_row[nx + y] = (&two * m * phi).recip();
            loss.push(loss_row);
            payoff.push(payoff_row);
        }
    }
    let cols = problem
        .workers()
        .iter()
        .map(|id| format!("x:{id}"))
        .chain(problem.jobs().iter().map(|id| format!("y:{id}")))
        .collect();
    BimatrixGame::new(rows, cols, loss, payoff)
}

pub fn outcome_to_equilibrium(problem: &LtuProblem, outcome: &Outcome) -> Result<MixedProfile> {
    outcome.check_dims(problem)?;
    let total_output = outcome.total_output(problem);
    let total_utility = outcome.total_utility(problem);
    if !total_output.is_positive() {
        return Err(Error::DegenerateOutcome(
            "total output phi^T mu is not positive",
        ));
    }
    if !total_utility.is_positive() {
        return Err(Error::DegenerateOutcome(
            "total utility n^T u + m^T v is not positive",
        ));
    }
    let p = outcome
        .mu
        .iter()
        .zip(problem.phi())
        .flat_map(|(mu_row, phi_row)| {
            mu_row
                .iter()
                .zip(phi_row)
                .map(|(mu, phi)| phi * mu / &total_output)
        })
        .collect();
    let q = outcome
        .u
        .iter()
        .zip(problem.worker_mass())
        .chain(outcome.v.iter().zip(problem.job_mass()))
        .map(|(util, mass)| mass * util / &total_utility)
        .collect();
    MixedProfile::new(p, q)
}

/// Maps an equilibrium of [`to_game`] back to a stable outcome. The profile is
/// re-checked first; a non-equilibrium is rejected with its deviation.
pub fn equilibrium_to_outcome(problem: &LtuProblem, profile: &MixedProfile) -> Result<Outcome> {
    let game = to_game(problem)?;
    let cert = match is_equilibrium(&game, profile)? {
        EquilibriumCheck::Accepted(cert) => cert,
        EquilibriumCheck::Rejected(dev) => return Err(Error::NotAnEquilibrium(Box::new(dev))),
    };
    if cert.seeker_payoff.is_zero() {
        return Err(Error::ZeroValue("seeker payoff"));
    }
    if cert.hider_loss.is_zero() {
        return Err(Error::ZeroValue("hider loss"));
    }
    let (nx, ny) = (problem.num_workers(), problem.num_jobs());
    let two = rational::int(2);
    let mu = (0..nx)
        .map(|x| {
            (0..ny)
                .map(|y| {
                    &profile.p[cell_index(problem, x, y)]
                        / (&two * &problem.phi()[x][y] * &cert.seeker_payoff)
                })
                .collect()
        })
        .collect();
    let u = (0..nx)
        .map(|x| &profile.q[x] / (&two * &problem.worker_mass()[x] * &cert.hider_loss))
        .collect();
    let v = (0..ny)
        .map(|y| &profile.q[nx + y] / (&two * &problem.job_mass()[y] * &cert.hider_loss))
        .collect();
    Ok(Outcome { mu, u, v })
}

/// Shifts every arrangement output by `K` so that all outputs are positive.
/// `K = 0` when they already are, otherwise `K = 1 - min phi`. Stable
/// utilities of the shifted problem are the original ones plus `K`.
pub fn normalize_outputs(problem: &ManyToOneProblem) -> (ManyToOneProblem, Rational) {
    let min = problem
        .arrangements()
        .iter()
        .map(|a| &a.phi)
        .min()
        .expect("validated problems have arrangements");
    if min.is_positive() {
        return (problem.clone(), Rational::zero());
    }
    let shift = Rational::one() - min;
    (problem.with_shifted_outputs(&shift), shift)
}

pub fn to_game_n(problem: &ManyToOneProblem) -> Result<BimatrixGame> {
    problem.ensure_positive_outputs()?;
    let types = problem.num_types();
    let mut loss = Vec::with_capacity(problem.arrangements().len());
    let mut payoff = Vec::with_capacity(problem.arrangements().len());
    for arr in problem.arrangements() {
        let mut loss_row = vec![Rational::zero(); types];
        let mut payoff_row = vec![Rational::zero(); types];
        for x in arr.members() {
            if !loss_row[x].is_zero() {
                continue;
            }
            let scale = &problem.mass()[x] * &arr.phi;
            loss_row[x] = arr.weight(x) / &scale;
            payoff_row[x] = Rational::from_integer(arr.occupancy(x).into()) / &scale;
        }
        loss.push(loss_row);
        payoff.push(payoff_row);
    }
    let rows = (0..problem.arrangements().len())
        .map(|a| problem.arrangement_label(a))
        .collect();
    BimatrixGame::new(rows, problem.types().to_vec(), loss, payoff)
}

pub fn outcome_to_equilibrium_n(
    problem: &ManyToOneProblem,
    outcome: &ManyToOneOutcome,
) -> Result<MixedProfile> {
    outcome.check_dims(problem)?;
    let total_output = problem
        .arrangements()
        .iter()
        .zip(&outcome.mu)
        .fold(Rational::zero(), |acc, (a, mu)| acc + &a.phi * mu);
    let total_utility = rational::dot(problem.mass(), &outcome.u);
    if !total_output.is_positive() {
        return Err(Error::DegenerateOutcome(
            "total output phi^T mu is not positive",
        ));
    }
    if !total_utility.is_positive() {
        return Err(Error::DegenerateOutcome(
            "total utility n^T u is not positive",
        ));
    }
    let p = problem
        .arrangements()
        .iter()
        .zip(&outcome.mu)
        .map(|(a, mu)| &a.phi * mu / &total_output)
        .collect();
    let q = outcome
        .u
        .iter()
        .zip(problem.mass())
        .map(|(u, n)| n * u / &total_utility)
        .collect();
    MixedProfile::new(p, q)
}

pub fn equilibrium_to_outcome_n(
    problem: &ManyToOneProblem,
    profile: &MixedProfile,
) -> Result<ManyToOneOutcome> {
    let game = to_game_n(problem)?;
    let cert = match is_equilibrium(&game, profile)? {
        EquilibriumCheck::Accepted(cert) => cert,
        EquilibriumCheck::Rejected(dev) => return Err(Error::NotAnEquilibrium(Box::new(dev))),
    };
    if cert.seeker_payoff.is_zero() {
        return Err(Error::ZeroValue("seeker payoff"));
    }
    if cert.hider_loss.is_zero() {
        return Err(Error::ZeroValue("hider loss"));
    }
    let mu = problem
        .arrangements()
        .iter()
        .zip(&profile.p)
        .map(|(a, p)| p / (&a.phi * &cert.seeker_payoff))
        .collect();
    let u = profile
        .q
        .iter()
        .zip(problem.mass())
        .map(|(q, n)| q / (n * &cert.hider_loss))
        .collect();
    Ok(ManyToOneOutcome { mu, u })
}

/// `(loss, payoff)` at a profile of [`to_game`], without the equilibrium check.
pub fn game_values(problem: &LtuProblem, profile: &MixedProfile) -> Result<(Rational, Rational)> {
    expected_values(&to_game(problem)?, profile)
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
    fn figure1_game_entries() {
        let g = to_game(&figure1()).unwrap();
        // Cell 11 is row 0; seeker columns are x1, x2, y1, y2.
        assert_eq!(g.loss[0], vec![ratio(1, 2), int(0), int(1), int(0)]);
        assert_eq!(g.payoff[0], vec![ratio(3, 4), int(0), ratio(3, 4), int(0)]);
        // Cell 12: alpha = 1, gamma = 1/2.
        assert_eq!(g.loss[1], vec![int(1), int(0), int(0), ratio(1, 2)]);
        assert_eq!(g.rows[1], "(1,2)");
        assert_eq!(g.cols, vec!["x:1", "x:2", "y:1", "y:2"]);
    }

    #[test]
    fn one_by_one_game_entries() {
        let p = LtuProblem::new(
            Population::unit(1, 1),
            vec![vec![ratio(1, 2)]],
            vec![vec![int(2)]],
        )
        .unwrap();
        let g = to_game(&p).unwrap();
        assert_eq!(g.loss[0], vec![ratio(1, 4), ratio(1, 4)]);
        assert_eq!(g.payoff[0], vec![ratio(1, 4), ratio(1, 4)]);
    }

    #[test]
    fn von_neumann_case() {
        let phi = vec![vec![int(2), int(1)], vec![int(3), ratio(1, 2)]];
        let p = LtuProblem::new(
            Population::unit(2, 2),
            vec![vec![ratio(1, 2); 2]; 2],
            phi.clone(),
        )
        .unwrap();
        let g = to_game(&p).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                let row = cell_index(&p, x, y);
                let expected = (int(2) * &phi[x][y]).recip();
                assert_eq!(g.loss[row][x], expected);
                assert_eq!(g.payoff[row][x], expected);
                assert_eq!(g.loss[row][2 + y], expected);
                assert_eq!(g.payoff[row][2 + y], expected);
            }
        }
    }

    #[test]
    fn zero_output_is_rejected() {
        let p = LtuProblem::new(
            Population::unit(1, 1),
            vec![vec![ratio(1, 2)]],
            vec![vec![int(0)]],
        )
        .unwrap();
        assert!(matches!(to_game(&p), Err(Error::NonpositiveOutput { .. })));
    }

    #[test]
    fn black_dot_maps_to_equilibrium() {
        let p = figure1();
        let profile = outcome_to_equilibrium(&p, &black()).unwrap();
        assert_eq!(profile.p, vec![ratio(2, 5), int(0), int(0), ratio(3, 5)]);
        assert_eq!(profile.q, vec![ratio(1, 2), ratio(1, 2), int(0), int(0)]);
        let (ell, pi) = game_values(&p, &profile).unwrap();
        assert_eq!((ell, pi), (ratio(1, 4), ratio(3, 10)));
        assert_eq!(equilibrium_to_outcome(&p, &profile).unwrap(), black());
    }

    #[test]
    fn white_dot_maps_to_equilibrium() {
        let p = figure1();
        let profile = outcome_to_equilibrium(&p, &white()).unwrap();
        assert_eq!(profile.p, vec![int(0), ratio(2, 5), ratio(3, 5), int(0)]);
        assert_eq!(profile.q, vec![int(0), int(0), ratio(1, 2), ratio(1, 2)]);
        assert!(is_equilibrium(&to_game(&p).unwrap(), &profile)
            .unwrap()
            .is_accepted());
        assert_eq!(equilibrium_to_outcome(&p, &profile).unwrap(), white());
    }

    #[test]
    fn uniform_profile_is_not_an_equilibrium() {
        let err = equilibrium_to_outcome(&figure1(), &MixedProfile::uniform(4, 4)).unwrap_err();
        assert!(matches!(err, Error::NotAnEquilibrium(_)));
    }

    #[test]
    fn degenerate_outcome_is_rejected() {
        let p = figure1();
        let zero = Outcome::zero(&p);
        assert!(matches!(
            outcome_to_equilibrium(&p, &zero),
            Err(Error::DegenerateOutcome(_))
        ));
    }

    #[test]
    fn single_cell_forces_hider() {
        let p = LtuProblem::new(
            Population::unit(1, 1),
            vec![vec![ratio(1, 2)]],
            vec![vec![int(2)]],
        )
        .unwrap();
        let o = Outcome {
            mu: vec![vec![int(1)]],
            u: vec![ratio(3, 2)],
            v: vec![ratio(1, 2)],
        };
        let profile = outcome_to_equilibrium(&p, &o).unwrap();
        assert_eq!(profile.p, vec![int(1)]);
        assert_eq!(profile.q, vec![ratio(3, 4), ratio(1, 4)]);
        assert_eq!(equilibrium_to_outcome(&p, &profile).unwrap(), o);
    }

    fn roommate(single_phi: Rational) -> ManyToOneProblem {
        ManyToOneProblem::new(
            vec!["1".into()],
            vec![int(2)],
            2,
            vec![
                Arrangement {
                    slots: vec![Some(0), None],
                    lambda: vec![int(1), int(0)],
                    phi: single_phi,
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
    fn roommate_game_entries_and_maps() {
        let p = roommate(ratio(1, 2));
        let g = to_game_n(&p).unwrap();
        assert_eq!(g.loss, vec![vec![int(1)], vec![ratio(1, 4)]]);
        assert_eq!(g.payoff, vec![vec![int(1)], vec![ratio(1, 2)]]);
        let stable = ManyToOneOutcome {
            mu: vec![int(0), int(1)],
            u: vec![int(2)],
        };
        let profile = outcome_to_equilibrium_n(&p, &stable).unwrap();
        assert_eq!(profile.p, vec![int(0), int(1)]);
        assert_eq!(profile.q, vec![int(1)]);
        assert_eq!(equilibrium_to_outcome_n(&p, &profile).unwrap(), stable);
    }

    #[test]
    fn normalize_outputs_rule() {
        let (same, k) = normalize_outputs(&roommate(ratio(1, 2)));
        assert_eq!(k, int(0));
        assert_eq!(same, roommate(ratio(1, 2)));
        let (shifted, k) = normalize_outputs(&roommate(int(-3)));
        assert_eq!(k, int(4));
        assert_eq!(shifted.arrangements()[0].phi, int(1));
        assert_eq!(shifted.arrangements()[1].phi, int(6));
        let (shifted, k) = normalize_outputs(&roommate(int(0)));
        assert_eq!(k, int(1));
        assert_eq!(shifted.arrangements()[0].phi, int(1));
        assert_eq!(shifted.arrangements()[1].phi, int(3));
    }
}
