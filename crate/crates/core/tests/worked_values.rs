//! Worked values for each module, checked through the public API.
//!
//! Constants quoted to many digits were evaluated once with 30-digit
//! arithmetic and frozen here; everything else is recomputed by a small
//! independent oracle in this file (grid search, bisection, finite
//! differences, direct summation).

use approx::{assert_abs_diff_eq, assert_relative_eq};
use imperfect_duel::algorithms::{
    schedule_dbgd, schedule_rosmid, Bgd, BgdParams, Dbgd, Doubler, Learner, RateMode, RoSmid, RoSmidParams, Sparring,
};
use imperfect_duel::corruption::{adversarial_signed_corruption, CorruptionSchedule, LearnabilityState};
use imperfect_duel::experiments::regret::{aggregate, RegretTrace};
use imperfect_duel::experiments::{fit_order, regret_increment};
use imperfect_duel::geometry::{sample_unit_sphere, Halfspace};
use imperfect_duel::mirror::{BallBarrier, MirrorState};
use imperfect_duel::preference::{duel, DuelOracle, DuelOutcome, LinkFunction, UtilityFunction};
use imperfect_duel::{rng_from_seed, ActionSpace, ActionVector};
use nalgebra::{dvector, DMatrix};
use rand::Rng;

fn triangle() -> ActionSpace {
    ActionSpace::polytope(vec![Halfspace::new(vec![0.5, 1.0], 0.25)], vec![true, true]).unwrap()
}

fn outcome(winner: usize, t: u64) -> DuelOutcome {
    DuelOutcome {
        winner,
        corrupted_prob: 0.5,
        clean_prob: 0.5,
        corruption_value: 0.0,
        forced: false,
        round: t,
    }
}

// geometry

#[test]
fn triangle_projection_matches_grid_search() {
    let x = dvector![1.0, 1.0];
    let p = triangle().project(&x).unwrap();

    // oracle: dense grid over the feasible triangle
    let n = 2000;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=n {
        let a1 = 0.5 * i as f64 / n as f64;
        let top = 0.25 - 0.5 * a1;
        for j in 0..=n {
            let a2 = top * j as f64 / n as f64;
            let d = (a1 - 1.0).powi(2) + (a2 - 1.0).powi(2);
            if d < best.0 {
                best = (d, a1, a2);
            }
        }
    }
    assert_abs_diff_eq!(p[0], best.1, epsilon = 1e-3);
    assert_abs_diff_eq!(p[1], best.2, epsilon = 1e-3);
    assert_abs_diff_eq!(p[0], 0.5, epsilon = 1e-12);
    assert_abs_diff_eq!(p[1], 0.0, epsilon = 1e-12);
}

#[test]
fn containment_on_the_boundary_and_just_outside() {
    assert!(triangle().contains(&dvector![0.5, 0.0], 1e-12).unwrap());
    let ball = ActionSpace::ball(2, 1.0).unwrap();
    assert!(!ball.contains(&dvector![1.0 + 1e-6, 0.0], 1e-9).unwrap());
}

#[test]
fn unit_sphere_coordinates_are_centred() {
    let mut rng = rng_from_seed(63);
    let n = 1_000_000;
    let mut sum = [0.0f64; 3];
    for _ in 0..n {
        let u = sample_unit_sphere(&mut rng, 3);
        assert_abs_diff_eq!(u.norm(), 1.0, epsilon = 1e-12);
        for k in 0..3 {
            sum[k] += u[k];
        }
    }
    // each coordinate has variance 1/d on the sphere
    let se = (1.0 / 3.0 / n as f64).sqrt();
    for s in sum {
        assert!((s / n as f64).abs() < 4.0 * se, "mean {} vs se {se}", s / n as f64);
    }
}

// preference

#[test]
fn utility_values() {
    let theta = dvector![6.0, 8.0, 0.0, 0.0, 0.0];
    let q = UtilityFunction::QuadraticConcave { theta: theta.clone() };
    assert_abs_diff_eq!(q.value(&theta).unwrap(), 50.0, epsilon = 1e-12);

    let lin = UtilityFunction::Linear {
        theta: dvector![0.5, 0.5],
    };
    assert_abs_diff_eq!(lin.value(&dvector![0.0, 0.75]).unwrap(), 0.375, epsilon = 1e-15);
}

#[test]
fn logistic_value() {
    let p = LinkFunction::Logistic.prob(0.15).unwrap();
    assert_abs_diff_eq!(p, 0.537_429_845_343_749_5, epsilon = 1e-15);
}

#[test]
fn flip_first_forces_the_worse_action() {
    let u = UtilityFunction::Linear { theta: dvector![1.0] };
    let mut schedule = CorruptionSchedule::FlipFirst { count: 10 };
    let mut rng = rng_from_seed(1);
    let out = duel(
        &u,
        LinkFunction::Logistic,
        &mut schedule,
        &dvector![1.0],
        &dvector![0.0],
        5,
        &mut rng,
    )
    .unwrap();
    assert_eq!(out.winner, 1);
    assert!(out.forced);
    assert_eq!(out.corrupted_prob, 0.0);
}

#[test]
fn rho_imperfect_duel_probability() {
    let u = UtilityFunction::Linear { theta: dvector![1.0] };
    let mut schedule = CorruptionSchedule::rho_imperfect(0.5, 0.1).unwrap();
    let mut rng = rng_from_seed(1);
    let out = duel(
        &u,
        LinkFunction::Logistic,
        &mut schedule,
        &dvector![0.2],
        &dvector![0.0],
        4,
        &mut rng,
    )
    .unwrap();
    assert_abs_diff_eq!(out.corruption_value, -0.05, epsilon = 1e-15);
    assert_abs_diff_eq!(out.corrupted_prob, 1.0 / (1.0 + (-0.15f64).exp()), epsilon = 1e-15);
    assert_abs_diff_eq!(out.clean_prob, 1.0 / (1.0 + (-0.2f64).exp()), epsilon = 1e-15);
}

// corruption

#[test]
fn adversarial_sign_rule() {
    assert_eq!(adversarial_signed_corruption(0.2, 0.05), -0.05);
    assert_eq!(adversarial_signed_corruption(-0.2, 0.05), 0.05);
}

#[test]
fn learnability_design_matrix_updates() {
    let mut s = LearnabilityState::new(2, 2.0).unwrap();
    let zero = dvector![0.0, 0.0];
    s.update(&dvector![1.0, 0.0], &zero).unwrap();
    assert_eq!(s.v_bar(), &DMatrix::from_diagonal(&dvector![3.0, 2.0]));
    s.update(&dvector![0.0, 1.0], &zero).unwrap();
    assert_eq!(s.v_bar(), &DMatrix::from_diagonal(&dvector![3.0, 3.0]));
}

#[test]
fn learnability_magnitude_first_round() {
    let s = CorruptionSchedule::generalized_learnability(2, 0.5, 2.0, 1.0).unwrap();
    let m = s.magnitude(1, &dvector![1.0, 0.0], &dvector![0.0, 0.0]).unwrap();
    assert_abs_diff_eq!(m, 0.5f64.sqrt(), epsilon = 1e-15);
}

#[test]
fn rho_imperfect_budget_matches_direct_sum() {
    let u = UtilityFunction::Linear { theta: dvector![1.0] };
    let schedule = CorruptionSchedule::rho_imperfect(0.5, 1.0).unwrap();
    let mut oracle = DuelOracle::new(u, LinkFunction::Logistic, schedule, rng_from_seed(2));
    let horizon = 10_000u64;
    for t in 1..=horizon {
        oracle.duel(&dvector![0.3], &dvector![0.1], t).unwrap();
    }
    let direct: f64 = (1..=horizon).map(|t| 1.0 / (t as f64).sqrt()).sum();
    assert_relative_eq!(oracle.ledger.total_budget(), direct, max_relative = 1e-12);
    assert_abs_diff_eq!(direct, 198.544_645_449_523_75, epsilon = 1e-9);
}

// mirror

fn fd_gradient(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

#[test]
fn barrier_hessian_at_origin() {
    for radius in [0.5, 1.0, 3.0] {
        let b = BallBarrier::new(radius).unwrap();
        let (g, h) = b.grad_hess(&dvector![0.0, 0.0]).unwrap();
        assert_eq!(g, dvector![0.0, 0.0]);
        // oracle: second differences of the value along each axis
        let h_step = 1e-5 * radius;
        let f = |x: f64| b.value(&dvector![x, 0.0]).unwrap();
        let second = (f(h_step) - 2.0 * f(0.0) + f(-h_step)) / (h_step * h_step);
        assert_relative_eq!(second, 2.0 / (radius * radius), max_relative = 1e-4);
        assert_relative_eq!(h[(0, 0)], 2.0 / (radius * radius), max_relative = 1e-14);
        assert_eq!(h[(0, 1)], 0.0);
    }
}

#[test]
fn barrier_gradient_in_one_dimension() {
    let b = BallBarrier::new(1.0).unwrap();
    let g = b.gradient(&dvector![0.5]).unwrap()[0];
    assert_abs_diff_eq!(g, 4.0 / 3.0, epsilon = 1e-15);
    let fd = fd_gradient(|x| b.value(&dvector![x]).unwrap(), 0.5, 1e-5);
    assert_abs_diff_eq!(g, fd, epsilon = 1e-8);
}

#[test]
fn accumulated_regularizer_adds_curvature() {
    let state = MirrorState::new(BallBarrier::new(2.0).unwrap(), 2, 1.0, 0.0, 1.0)
        .unwrap()
        .with_history(3, dvector![0.0, 0.0], 0.0)
        .unwrap();
    let (g, h) = state.grad_hess(&dvector![0.0, 0.0]).unwrap();
    assert_eq!(g, dvector![0.0, 0.0]);
    let expected = 2.0 / 4.0 + 3.0;
    assert_abs_diff_eq!(h[(0, 0)], expected, epsilon = 1e-15);
    assert_abs_diff_eq!(h[(1, 1)], expected, epsilon = 1e-15);
    assert_eq!(h[(0, 1)], 0.0);
}

#[test]
fn dikin_points_at_origin_in_one_dimension() {
    let state = MirrorState::new(BallBarrier::new(1.0).unwrap(), 1, 1.0, 0.0, 0.1).unwrap();
    for u in [1.0, -1.0] {
        let p = state.dikin_point(&dvector![u]).unwrap();
        assert_abs_diff_eq!(p[0], u / 2f64.sqrt(), epsilon = 1e-15);
    }
}

#[test]
fn mirror_solve_matches_bisection() {
    let state = MirrorState::new(BallBarrier::new(1.0).unwrap(), 1, 1.0, 0.0, 0.1).unwrap();
    let a = state.mirror_solve(&dvector![3.0]).unwrap()[0];
    // oracle: bisection on 2a/(1 − a²) = 3
    let (mut lo, mut hi) = (0.0f64, 1.0 - 1e-15);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if 2.0 * mid / (1.0 - mid * mid) < 3.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert_abs_diff_eq!(a, lo, epsilon = 1e-12);
    assert_abs_diff_eq!(a, 0.720_759_220_056_126_4, epsilon = 1e-12);
}

// algorithms

#[test]
fn rosmid_known_rho_rate() {
    let eta = schedule_rosmid(5, 100_000, RateMode::KnownRho(0.5)).unwrap();
    assert_relative_eq!(eta, 0.002_145_966_026_289_347, max_relative = 1e-13);
}

#[test]
fn dbgd_schedule_values() {
    let s = schedule_dbgd(10.0, 5, 100_000, 0.25, 0.25, 20.0).unwrap();
    assert_relative_eq!(s.delta, 0.069_749_857_018_528_7, max_relative = 1e-13);
    assert_relative_eq!(s.gamma, 0.031_622_776_601_683_79, max_relative = 1e-13);
    assert_relative_eq!(s.step, s.gamma * s.delta / 5.0, max_relative = 1e-15);
}

#[test]
fn first_pair_starts_at_the_origin() {
    let space = ActionSpace::ball(3, 1.0).unwrap();
    let sched = schedule_dbgd(1.0, 3, 1000, 0.25, 0.25, 2.0).unwrap();
    let mut dbgd = Dbgd::new(space, sched, rng_from_seed(1));
    assert_eq!(dbgd.propose(1).unwrap().0, ActionVector::zeros(3));

    let params = RoSmidParams {
        radius: 1.0,
        dim: 3,
        eta: 0.01,
        lambda: 0.01,
        phi: 0.0,
    };
    let mut rosmid = RoSmid::new(params, rng_from_seed(1)).unwrap();
    assert_eq!(rosmid.propose(1).unwrap().0, ActionVector::zeros(3));
}

#[test]
fn rosmid_moves_against_a_losing_exploration() {
    // d = 1, R = 1: after a_1 = 0 is folded in, ∇R_1(a) = 2a/(1 − a²) + λη a
    let (lambda, eta) = (1.0, 0.05);
    let params = RoSmidParams {
        radius: 1.0,
        dim: 1,
        eta,
        lambda,
        phi: 0.0,
    };
    let mut l = RoSmid::new(params, rng_from_seed(9)).unwrap();
    let (_, dikin) = l.propose(1).unwrap();
    let hess = 2.0 + lambda * eta;
    let u = dikin[0] * f64::sqrt(hess);
    l.observe(1, &outcome(0, 1)).unwrap();
    let a = l.current()[0];
    assert!(a * u < 0.0);

    let target = -eta * hess.sqrt() * u;
    let grad = |x: f64| 2.0 * x / (1.0 - x * x) + lambda * eta * x;
    let (mut lo, mut hi) = (-1.0 + 1e-15, 1.0 - 1e-15);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if grad(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert_abs_diff_eq!(a, lo, epsilon = 1e-12);
}

#[test]
fn bgd_plays_stay_inside_the_ball() {
    let radius = 2.0;
    let space = ActionSpace::ball(3, radius).unwrap();
    let params = BgdParams::default_for(radius, 3, 10_000);
    let mut bgd = Bgd::new(space, params, rng_from_seed(4)).unwrap();
    let mut rng = rng_from_seed(5);
    for _ in 0..10_000 {
        let y = bgd.play().unwrap();
        assert!(bgd.center().norm() <= bgd.shrink() * radius + 1e-12);
        assert!(y.norm() <= bgd.center().norm() + params.delta + 1e-12);
        assert!(y.norm() <= radius + 1e-9);
        bgd.update(if rng.random::<bool>() { 1.0 } else { 0.0 }).unwrap();
    }
}

#[test]
fn sparring_proposals_stay_feasible() {
    let space = ActionSpace::ball(2, 1.0).unwrap();
    let params = BgdParams { delta: 0.3, eta: 0.05 };
    let mut s = Sparring::new(
        Bgd::new(space.clone(), params, rng_from_seed(1)).unwrap(),
        Bgd::new(space.clone(), params, rng_from_seed(2)).unwrap(),
        true,
    );
    let mut rng = rng_from_seed(3);
    for t in 1..=5000 {
        let (a, b) = s.propose(t).unwrap();
        assert!(space.contains(&a, 1e-9).unwrap() && space.contains(&b, 1e-9).unwrap());
        s.observe(t, &outcome(rng.random_range(0..2), t)).unwrap();
    }
}

#[test]
fn doubler_replays_the_previous_epoch() {
    let space = ActionSpace::ball(2, 1.0).unwrap();
    let bandit = Bgd::new(space, BgdParams { delta: 0.2, eta: 0.05 }, rng_from_seed(3)).unwrap();
    let mut d = Doubler::new(bandit, rng_from_seed(4));
    let mut rights: Vec<Vec<ActionVector>> = vec![Vec::new(); 13];
    let mut rng = rng_from_seed(5);
    for t in 1..(1u64 << 12) {
        let (left, right) = d.propose(t).unwrap();
        let epoch = 63 - t.leading_zeros() as usize;
        if epoch == 0 {
            assert_eq!(left, ActionVector::zeros(2));
        } else {
            assert!(rights[epoch - 1].contains(&left), "round {t}");
        }
        rights[epoch].push(right);
        d.observe(t, &outcome(rng.random_range(0..2), t)).unwrap();
    }
}

// experiments

#[test]
fn dueling_regret_under_the_linear_link() {
    let u = UtilityFunction::Linear {
        theta: dvector![0.5, 0.5],
    };
    // gaps 0.25 and 0.375 from the best value 0.375
    let (d, f) = regret_increment(
        &u,
        LinkFunction::Linear,
        0.375,
        &dvector![0.25, 0.0],
        &dvector![0.0, 0.0],
    )
    .unwrap();
    assert_abs_diff_eq!(d, 0.625 + 0.6875 - 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(d, 0.3125, epsilon = 1e-15);
    assert_abs_diff_eq!(f, 0.625, epsilon = 1e-15);
}

#[test]
fn power_law_fit_recovers_exponent_and_scale() {
    let rounds: Vec<u64> = (1..=1000).map(|i| i * 100).collect();
    let values: Vec<f64> = rounds.iter().map(|&t| 3.0 * (t as f64).powf(0.6)).collect();
    let fit = fit_order(&rounds, &values, 0.01).unwrap();
    assert_abs_diff_eq!(fit.slope, 0.6, epsilon = 1e-9);
    assert_abs_diff_eq!(fit.intercept, 3f64.ln(), epsilon = 1e-7);
}

#[test]
fn aggregate_mean_tracks_the_generator() {
    use rand_distr::{Distribution, Normal};
    let rounds: Vec<u64> = (1..=100).map(|i| i * 10).collect();
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut rng = rng_from_seed(485);
    let n = 50;
    let sigma = |t: u64| 0.1 * (t as f64).powf(0.75);
    let traces: Vec<RegretTrace> = (0..n)
        .map(|_| {
            let cum: Vec<f64> = rounds
                .iter()
                .map(|&t| (t as f64).powf(0.75) + sigma(t) * noise.sample(&mut rng))
                .collect();
            RegretTrace {
                rounds: rounds.clone(),
                cum_dueling: cum.clone(),
                cum_functional: cum,
                budget: Default::default(),
            }
        })
        .collect();
    let refs: Vec<&RegretTrace> = traces.iter().collect();
    let agg = aggregate(&refs).unwrap();
    let mut outside = 0;
    for (i, &t) in rounds.iter().enumerate() {
        let se = sigma(t) / (n as f64).sqrt();
        if (agg.dueling_mean[i] - (t as f64).powf(0.75)).abs() > 3.0 * se {
            outside += 1;
        }
    }
    // a 3-SE band misses about 0.3% of points
    assert!(
        outside <= 3,
        "{outside} of {} grid points outside the band",
        rounds.len()
    );
}
