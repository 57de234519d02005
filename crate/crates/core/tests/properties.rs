mod common;

use common::{reference_equilibrium, reference_game, reference_stable};
use ltumatch::fuzz::{FuzzConfig, InstanceGenerator};
use ltumatch::lp::{linear_feasibility, Feasibility, LinearSystem, Relation};
use ltumatch::model::{Population, SubproblemSpec, ValidateOptions};
use ltumatch::oracle::{enumerate_stable, induced_pattern, OracleCaps};
use ltumatch::rational::{int, ratio};
use ltumatch::reduction::game_values;
use ltumatch::tu::{cross_ratio, omega, rescale_to_tu};
use ltumatch::{
    blocking_pairs, build_counterexample, check_tu, enumerate_equilibria, equilibrium_to_outcome,
    equilibrium_to_outcome_n, exchange_test, lemke_howson, make_subproblem, normalize_outputs,
    outcome_to_equilibrium, outcome_to_equilibrium_n, to_game, to_game_n, verify_stable,
    verify_stable_m2o, Condition, EnumerationOptions, LtuProblem, ManyToOneOutcome,
    ManyToOneProblem, Outcome, Quadruple, Rational, TuWitness,
};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn small(seed: u64, max: usize) -> LtuProblem {
    let config = FuzzConfig {
        max_workers: max,
        max_jobs: max,
        ..FuzzConfig::default()
    };
    InstanceGenerator::new(seed, config).ltu()
}

fn small_tu(seed: u64) -> LtuProblem {
    InstanceGenerator::new(seed, FuzzConfig::default()).tu()
}

/// Stable outcomes from every extreme equilibrium.
fn equilibrium_outcomes(problem: &LtuProblem) -> Vec<Outcome> {
    let game = to_game(problem).unwrap();
    enumerate_equilibria(&game, EnumerationOptions::full(&game))
        .unwrap()
        .into_iter()
        .map(|cert| equilibrium_to_outcome(problem, &cert.profile).unwrap())
        .collect()
}

fn positive_rational() -> impl Strategy<Value = Rational> {
    (1i64..=30, 1i64..=6).prop_map(|(n, d)| ratio(n, d))
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<Rational>>> {
    prop::collection::vec(prop::collection::vec(positive_rational(), cols), rows)
}

fn linear_instance() -> impl Strategy<Value = (Population, [Vec<Vec<Rational>>; 3])> {
    (1usize..=3, 1usize..=3).prop_flat_map(|(nx, ny)| {
        (matrix(nx, ny), matrix(nx, ny), matrix(nx, ny))
            .prop_map(move |(a, b, c)| (Population::unit(nx, ny), [a, b, c]))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_is_idempotent_and_scale_free((pop, [a, b, c]) in linear_instance(), k in positive_rational()) {
        let p = LtuProblem::from_linear_constraints(pop.clone(), &a, &b, &c).unwrap();
        let (a2, b2, c2) = p.linear_constraints();
        prop_assert_eq!(&LtuProblem::from_linear_constraints(pop.clone(), &a2, &b2, &c2).unwrap(), &p);
        let scale = |m: &Vec<Vec<Rational>>| -> Vec<Vec<Rational>> {
            m.iter().map(|row| row.iter().map(|v| v * &k).collect()).collect()
        };
        prop_assert_eq!(LtuProblem::from_linear_constraints(pop, &scale(&a), &scale(&b), &scale(&c)).unwrap(), p);
    }

    #[test]
    fn tax_schedule_matches_net_wages(s in positive_rational(), t in 0i64..10, w in positive_rational()) {
        let tau = ratio(t, 10);
        let p = LtuProblem::from_tax_schedule(Population::unit(1, 1), &[vec![s.clone()]], &[vec![tau.clone()]]).unwrap();
        let net = (Rational::one() - &tau) * &w;
        let employer = &s - &w;
        prop_assert_eq!(p.pair_value(0, 0, &net, &employer), p.half_output(0, 0));
        let a = (Rational::one() - &tau).recip();
        let linear = LtuProblem::from_linear_constraints(Population::unit(1, 1), &[vec![a]], &[vec![int(1)]], &[vec![s]]).unwrap();
        prop_assert_eq!(linear, p);
    }

    #[test]
    fn problem_json_round_trips(seed in any::<u64>()) {
        let p = small(seed, 3);
        let back = LtuProblem::from_json(&p.to_json(), ValidateOptions::default()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn outcome_json_round_trips(seed in any::<u64>()) {
        let p = small(seed, 2);
        for o in equilibrium_outcomes(&p) {
            let back: Outcome = serde_json::from_str(&serde_json::to_string(&o).unwrap()).unwrap();
            prop_assert_eq!(back, o);
        }
    }

    #[test]
    fn game_entries_match_linear_expansion(seed in any::<u64>()) {
        let p = small(seed, 3);
        let game = to_game(&p).unwrap();
        let (loss, payoff) = reference_game(&p);
        prop_assert_eq!(game.loss, loss);
        prop_assert_eq!(game.payoff, payoff);
    }

    #[test]
    fn equilibria_and_stable_outcomes_correspond(seed in any::<u64>()) {
        let p = small(seed, 2);
        let game = to_game(&p).unwrap();
        for cert in enumerate_equilibria(&game, EnumerationOptions::full(&game)).unwrap() {
            prop_assert!(reference_equilibrium(&game, &cert.profile));
            let o = equilibrium_to_outcome(&p, &cert.profile).unwrap();
            prop_assert!(reference_stable(&p, &o));
            prop_assert_eq!(&outcome_to_equilibrium(&p, &o).unwrap(), &cert.profile);
            let (loss, payoff) = game_values(&p, &cert.profile).unwrap();
            let output: Rational = (0..p.num_workers())
                .flat_map(|x| (0..p.num_jobs()).map(move |y| (x, y)))
                .map(|(x, y)| &p.phi()[x][y] * &o.mu[x][y])
                .sum();
            let utility = ltumatch::rational::dot(p.worker_mass(), &o.u) + ltumatch::rational::dot(p.job_mass(), &o.v);
            prop_assert_eq!(payoff, (int(2) * output).recip());
            prop_assert_eq!(loss, (int(2) * utility).recip());
        }
    }

    #[test]
    fn lemke_howson_finds_an_enumerated_equilibrium(seed in any::<u64>()) {
        let p = small(seed, 2);
        let game = to_game(&p).unwrap();
        let all: Vec<_> = enumerate_equilibria(&game, EnumerationOptions::full(&game))
            .unwrap()
            .into_iter()
            .map(|c| c.profile)
            .collect();
        for label in 0..game.num_rows() + game.num_cols() {
            let found = lemke_howson(&game, label).unwrap().profile;
            prop_assert!(all.contains(&found));
        }
    }

    #[test]
    fn blocking_pairs_are_condition_one(seed in any::<u64>(), u in positive_rational(), v in positive_rational()) {
        let p = small(seed, 3);
        let mut o = Outcome::zero(&p);
        o.u.iter_mut().for_each(|x| *x = u.clone());
        o.v.iter_mut().for_each(|y| *y = v.clone());
        let report = verify_stable(&p, &o).unwrap();
        let pairs = blocking_pairs(&p, &o).unwrap();
        prop_assert_eq!(pairs.is_empty(), !report.violates(Condition::NoBlockingPair));
        for pair in &pairs {
            prop_assert!(p.pair_value(pair.x, pair.y, &o.u[pair.x], &o.v[pair.y]) < p.half_output(pair.x, pair.y));
        }
    }

    #[test]
    fn scaling_masses_scales_matchings(seed in any::<u64>(), k in positive_rational()) {
        let p = small(seed, 2);
        let pop = Population::new(
            p.workers().to_vec(),
            p.jobs().to_vec(),
            p.worker_mass().iter().map(|m| m * &k).collect(),
            p.job_mass().iter().map(|m| m * &k).collect(),
        ).unwrap();
        let scaled = LtuProblem::new(pop, p.lambda().to_vec(), p.phi().to_vec()).unwrap();
        for o in equilibrium_outcomes(&p) {
            let mut s = o.clone();
            s.mu.iter_mut().flatten().for_each(|m| *m = &*m * &k);
            prop_assert!(verify_stable(&scaled, &s).unwrap().stable);
        }
    }

    #[test]
    fn anchored_tu_scan_agrees_with_full_scan(seed in any::<u64>(), tu in any::<bool>()) {
        let p = if tu { small_tu(seed) } else { small(seed, 3) };
        let w = omega(&p);
        let (nx, ny) = (p.num_workers(), p.num_jobs());
        let mut all_one = true;
        for x in 0..nx { for x2 in 0..nx { for y in 0..ny { for y2 in 0..ny {
            all_one &= cross_ratio(&w, Quadruple::new(x, x2, y, y2)).is_one();
        }}}}
        prop_assert_eq!(check_tu(&p).is_tu(), all_one);
    }

    #[test]
    fn tu_rescaling_reproduces_weights(seed in any::<u64>()) {
        let p = small_tu(seed);
        let r = rescale_to_tu(&p, &check_tu(&p)).unwrap();
        for x in 0..p.num_workers() {
            for y in 0..p.num_jobs() {
                prop_assert_eq!(&r.a[x] / (&r.a[x] + &r.b[y]), p.lambda()[x][y].clone());
                prop_assert_eq!(
                    &r.phi_tilde[x][y],
                    &(&r.a[x] * p.lambda()[x][y].recip() * &p.phi()[x][y] / int(2))
                );
            }
        }
    }

    #[test]
    fn tu_stable_outcomes_exchange(seed in any::<u64>()) {
        let p = small_tu(seed);
        let r = rescale_to_tu(&p, &check_tu(&p)).unwrap();
        let outcomes = equilibrium_outcomes(&p);
        for first in &outcomes {
            for second in &outcomes {
                prop_assert!(exchange_test(&p, first, second).unwrap().exchangeable());
                prop_assert_eq!(r.total_output(&first.mu), r.total_output(&second.mu));
            }
        }
    }

    #[test]
    fn non_tu_instances_yield_counterexamples(seed in any::<u64>()) {
        let p = small(seed, 3);
        let TuWitness::NotTu { quadruple, .. } = check_tu(&p) else {
            return Ok(());
        };
        let ce = build_counterexample(&p, quadruple).unwrap();
        let folded = &ce.subproblem.folded;
        prop_assert!(reference_stable(folded, &ce.black));
        prop_assert!(reference_stable(folded, &ce.white));
        let swapped = Outcome { mu: ce.white.mu.clone(), u: ce.black.u.clone(), v: ce.black.v.clone() };
        let swapped_back = Outcome { mu: ce.black.mu.clone(), u: ce.white.u.clone(), v: ce.white.v.clone() };
        prop_assert!(!reference_stable(folded, &swapped) || !reference_stable(folded, &swapped_back));
        prop_assert!(!ce.exchange.exchangeable());
    }

    #[test]
    fn zero_reservation_subproblem_is_identity(seed in any::<u64>()) {
        let p = small(seed, 3);
        let sub = make_subproblem(&SubproblemSpec::full(&p)).unwrap();
        prop_assert_eq!(&sub.folded.phi().to_vec(), &p.phi().to_vec());
        prop_assert_eq!(&sub.folded.lambda().to_vec(), &p.lambda().to_vec());
    }

    #[test]
    fn one_to_one_embeds_as_pairs(seed in any::<u64>()) {
        let p = small(seed, 2);
        let m2o = ManyToOneProblem::from_one_to_one(&p);
        let (shifted, k) = normalize_outputs(&m2o);
        prop_assert_eq!(&k, &int(1));
        let game = to_game_n(&shifted).unwrap();
        for o in equilibrium_outcomes(&p) {
            let lifted = ManyToOneOutcome::from_one_to_one(&p, &o);
            prop_assert!(verify_stable_m2o(&m2o, &lifted).unwrap().stable);
            prop_assert_eq!(&lifted.to_one_to_one(&p), &o);
            let moved = ManyToOneOutcome { mu: lifted.mu.clone(), u: lifted.u.iter().map(|u| u + &k).collect() };
            prop_assert!(verify_stable_m2o(&shifted, &moved).unwrap().stable);
            let profile = outcome_to_equilibrium_n(&shifted, &moved).unwrap();
            prop_assert!(reference_equilibrium(&game, &profile));
            prop_assert_eq!(equilibrium_to_outcome_n(&shifted, &profile).unwrap(), moved);
        }
    }

    #[test]
    fn small_linear_systems_are_decided(
        rows in prop::collection::vec((prop::collection::vec(-3i64..=3, 3), 0usize..3, -4i64..=4), 1..5),
    ) {
        let mut system = LinearSystem::new(3);
        (0..3).for_each(|k| system.set_nonnegative(k));
        for (coeffs, rel, rhs) in rows {
            let relation = [Relation::Eq, Relation::Ge, Relation::Le][rel];
            system.add(coeffs.into_iter().map(int).collect(), relation, int(rhs));
        }
        match linear_feasibility(&system).unwrap() {
            Feasibility::Feasible(point) => prop_assert!(system.satisfied_by(&point)),
            Feasibility::Infeasible(cert) => prop_assert!(cert.verify(&system)),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oracle_is_sound_and_complete(seed in any::<u64>()) {
        let p = small(seed, 2);
        let reps = enumerate_stable(&p, OracleCaps::default()).unwrap();
        for rep in &reps {
            prop_assert!(reference_stable(&p, &rep.outcome));
            prop_assert_eq!(&induced_pattern(&rep.outcome), &rep.pattern);
        }
        let patterns: Vec<_> = reps.iter().map(|r| r.pattern.clone()).collect();
        for o in equilibrium_outcomes(&p) {
            prop_assert!(patterns.contains(&induced_pattern(&o)));
        }
    }
}

#[test]
fn white_pattern_has_a_feasibility_point_and_black_utilities_fail_it() {
    let p = common::figure1();
    let (a, b, c) = p.linear_constraints();
    // Variables u1, u2, v1, v2 >= 0; white matches (1,2) and (2,1).
    let mut system = LinearSystem::new(4);
    (0..4).for_each(|k| system.set_nonnegative(k));
    for x in 0..2 {
        for y in 0..2 {
            let mut coeffs = vec![Rational::zero(); 4];
            coeffs[x] = a[x][y].clone();
            coeffs[2 + y] = b[x][y].clone();
            let rel = if x != y { Relation::Eq } else { Relation::Ge };
            system.add(coeffs, rel, c[x][y].clone());
        }
    }
    match linear_feasibility(&system).unwrap() {
        Feasibility::Feasible(point) => assert!(system.satisfied_by(&point)),
        Feasibility::Infeasible(_) => panic!("white pattern must be feasible"),
    }
    let black = common::black();
    let utilities: Vec<Rational> = black.u.iter().chain(&black.v).cloned().collect();
    assert!(!system.satisfied_by(&utilities));
}
