//! Property checks shared by the `properties` and `acceptance` targets. Each
//! returns `Err(description)` on the first violated instance.

#![allow(dead_code)]

use imperfect_duel::corruption::{rho_imperfect_budget_bound, CorruptionSchedule};
use imperfect_duel::experiments::corpus::{cluster_corpus, synthetic_mixture};
use imperfect_duel::experiments::regret::regret_bracket;
use imperfect_duel::experiments::runner::{prepare, run_seed};
use imperfect_duel::experiments::{fit_order, regret_increment, run_experiment, ExperimentConfig};
use imperfect_duel::geometry::{sample_unit_sphere, Halfspace};
use imperfect_duel::mirror::{inv_sqrt_psd, psd_roots, BallBarrier, MirrorState};
use imperfect_duel::preference::{duel, DuelOracle, LinkFunction, UtilityFunction};
use imperfect_duel::{rng_from_seed, ActionSpace, ActionVector, SimRng};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::Rng;

pub type Check = Result<(), String>;
pub type NamedCheck = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Deterministic proptest runner so both targets see the same cases.
fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn run_prop<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Check {
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

pub fn random_interior(rng: &mut SimRng, dim: usize, radius: f64, max_frac: f64) -> ActionVector {
    let r = radius * max_frac * rng.random::<f64>().powf(1.0 / dim as f64);
    sample_unit_sphere(rng, dim) * r
}

/// A mirror state with random parameters, random history and a random
/// interior iterate.
pub fn random_state(rng: &mut SimRng, dim: usize) -> MirrorState {
    let radius = 0.5 + 5.0 * rng.random::<f64>();
    let lambda = 10f64.powf(-3.0 + 3.0 * rng.random::<f64>());
    let eta = 10f64.powf(-3.0 + 2.0 * rng.random::<f64>());
    let phi = if rng.random::<bool>() { 0.0 } else { rng.random::<f64>() };
    let t = rng.random_range(0..5000u64);
    let mut sum = DVector::zeros(dim);
    let mut sum_sq = 0.0;
    for _ in 0..t.min(20) {
        let a = random_interior(rng, dim, radius, 0.95);
        sum_sq += a.norm_squared();
        sum += a;
    }
    let scale = if t == 0 { 0.0 } else { t as f64 / t.min(20) as f64 };
    let mut state = MirrorState::new(BallBarrier::new(radius).unwrap(), dim, lambda, phi, eta)
        .unwrap()
        .with_history(t, sum * scale, sum_sq * scale)
        .unwrap();
    state.set_current(random_interior(rng, dim, radius, 0.95)).unwrap();
    state
}

/// Distance from `x` to the nearest feasible point of an `n × n` grid on
/// `[0, extent]²` for the polytope `{a ≥ 0, n_i·a ≤ b_i}`.
fn grid_distance(cuts: &[(f64, f64, f64)], x: [f64; 2], extent: f64, n: usize) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..=n {
        let a1 = extent * i as f64 / n as f64;
        for j in 0..=n {
            let a2 = extent * j as f64 / n as f64;
            if cuts.iter().all(|&(n1, n2, b)| n1 * a1 + n2 * a2 <= b) {
                best = best.min(((a1 - x[0]).powi(2) + (a2 - x[1]).powi(2)).sqrt());
            }
        }
    }
    best
}

pub fn projection_matches_grid() -> Check {
    let cuts = prop::collection::vec((0.5f64..2.0, 0.5f64..2.0, 0.2f64..1.0), 1..4);
    run_prop(24, (cuts, -1.5f64..2.5, -1.5f64..2.5), |(cuts, x0, x1)| {
        let space = ActionSpace::polytope(
            cuts.iter()
                .map(|&(n1, n2, b)| Halfspace::new(vec![n1, n2], b))
                .collect(),
            vec![true, true],
        )
        .unwrap();
        let point = DVector::from_vec(vec![x0, x1]);
        let p = space.project(&point).unwrap();
        prop_assert!(space.contains(&p, 1e-9).unwrap());
        // every coordinate of a feasible point is at most b / n_i ≤ 2
        let grid = grid_distance(&cuts, [x0, x1], 2.0, 1000);
        let exact = (p - point).norm();
        prop_assert!(exact <= grid + 1e-12, "projection {exact} worse than grid {grid}");
        prop_assert!(grid - exact <= 2e-3, "projection {exact} vs grid {grid}");
        Ok(())
    })
}

pub fn mirror_solve_residual() -> Check {
    let mut rng = rng_from_seed(1001);
    for case in 0..1000 {
        let dim = rng.random_range(1..=6);
        let state = random_state(&mut rng, dim);
        let scale = 10f64.powf(-2.0 + 4.0 * rng.random::<f64>());
        let y = DVector::from_fn(dim, |_, _| scale * (2.0 * rng.random::<f64>() - 1.0));
        let a = state.mirror_solve(&y).map_err(|e| format!("case {case}: {e}"))?;
        let residual = (state.gradient(&a).unwrap() - &y).norm();
        ensure(residual <= 1e-8, || format!("case {case}: residual {residual}"))?;
    }
    Ok(())
}

pub fn inverse_sqrt_round_trip() -> Check {
    run_prop(
        200,
        (prop::collection::vec(-1.0f64..1.0, 25), 1e-3f64..1.0),
        |(entries, ridge)| {
            let a = DMatrix::from_vec(5, 5, entries);
            let m = &a * a.transpose() + DMatrix::identity(5, 5) * ridge;
            let s = inv_sqrt_psd(&m).unwrap();
            let err = (&s * &m * &s - DMatrix::<f64>::identity(5, 5)).norm();
            prop_assert!(err < 1e-8, "‖SMS − I‖_F = {err}");
            let roots = psd_roots(&m).unwrap();
            prop_assert!((&roots.sqrt * &roots.sqrt - &m).norm() < 1e-8 * m.norm().max(1.0));
            Ok(())
        },
    )
}

pub fn gradient_matches_finite_differences() -> Check {
    let mut rng = rng_from_seed(282);
    for case in 0..100 {
        let dim = rng.random_range(1..=5);
        let state = random_state(&mut rng, dim);
        let a = state.current().clone();
        let g = state.gradient(&a).unwrap();
        let h = 1e-6 * state.barrier().radius();
        for k in 0..dim {
            let mut plus = a.clone();
            let mut minus = a.clone();
            plus[k] += h;
            minus[k] -= h;
            let fd = (state.value(&plus).unwrap() - state.value(&minus).unwrap()) / (2.0 * h);
            let err = (fd - g[k]).abs() / (1.0 + g[k].abs());
            ensure(err <= 1e-6, || {
                format!("case {case}, coordinate {k}: analytic {} vs fd {fd}", g[k])
            })?;
        }
    }
    Ok(())
}

pub fn dikin_containment() -> Check {
    let mut rng = rng_from_seed(298);
    let mut state = random_state(&mut rng, 3);
    for draw in 0..100_000 {
        if draw % 100 == 0 {
            let dim = rng.random_range(1..=6);
            state = random_state(&mut rng, dim);
        }
        let u = sample_unit_sphere(&mut rng, state.dim());
        let p = state.dikin_point(&u).unwrap();
        ensure(p.norm() < state.barrier().radius(), || {
            format!("draw {draw}: norm {} escapes", p.norm())
        })?;
    }
    Ok(())
}

pub fn link_symmetry() -> Check {
    let mut rng = rng_from_seed(12);
    for _ in 0..10_000 {
        let x = 100.0 * (2.0 * rng.random::<f64>() - 1.0);
        for link in [LinkFunction::Logistic, LinkFunction::Linear] {
            let s = link.prob(x).unwrap() + link.prob(-x).unwrap();
            ensure((s - 1.0).abs() <= 1e-12, || format!("{link:?} at {x}: {s}"))?;
        }
    }
    Ok(())
}

pub fn duel_frequency() -> Check {
    let utility = UtilityFunction::QuadraticConcave {
        theta: DVector::from_vec(vec![0.4, -0.2]),
    };
    let a = DVector::from_vec(vec![0.1, 0.1]);
    let b = DVector::from_vec(vec![0.5, -0.3]);
    let mut schedule = CorruptionSchedule::rho_imperfect(0.5, 0.05).unwrap();
    let mut rng = rng_from_seed(624);
    let n = 1_000_000u64;
    let mut wins = 0u64;
    let mut p = 0.0;
    for _ in 0..n {
        let out = duel(&utility, LinkFunction::Logistic, &mut schedule, &a, &b, 7, &mut rng).unwrap();
        p = out.corrupted_prob;
        wins += (out.winner == 0) as u64;
    }
    let freq = wins as f64 / n as f64;
    let se = (p * (1.0 - p) / n as f64).sqrt();
    ensure((freq - p).abs() < 4.0 * se, || {
        format!("frequency {freq}, probability {p}, se {se}")
    })
}

pub fn budget_below_closed_form() -> Check {
    run_prop(
        32,
        (0.0f64..=1.0, 0.01f64..5.0, 1u64..3000),
        |(rho, c_kappa, horizon)| {
            let utility = UtilityFunction::Linear {
                theta: DVector::from_vec(vec![1.0]),
            };
            let schedule = CorruptionSchedule::rho_imperfect(rho, c_kappa).unwrap();
            let mut oracle = DuelOracle::new(utility, LinkFunction::Logistic, schedule, rng_from_seed(5));
            let (a, b) = (DVector::from_vec(vec![0.2]), DVector::from_vec(vec![-0.1]));
            for t in 1..=horizon {
                oracle.duel(&a, &b, t).unwrap();
            }
            let bound = rho_imperfect_budget_bound(c_kappa, rho, horizon);
            prop_assert!(oracle.ledger.total_budget() <= bound * (1.0 + 1e-12));
            prop_assert_eq!(oracle.ledger.flips(), 0);
            Ok(())
        },
    )
}

pub fn fit_exact_on_power_laws() -> Check {
    run_prop(
        64,
        (0.05f64..1.5, 0.01f64..100.0, 0.01f64..1.0),
        |(exponent, scale, fraction)| {
            let rounds: Vec<u64> = (1..=2000).map(|i| i * 50).collect();
            let values: Vec<f64> = rounds.iter().map(|&t| scale * (t as f64).powf(exponent)).collect();
            let fit = fit_order(&rounds, &values, fraction).unwrap();
            prop_assert!((fit.slope - exponent).abs() < 1e-8);
            prop_assert!((fit.intercept - scale.ln()).abs() < 1e-6);
            Ok(())
        },
    )
}

pub fn regret_bracket_holds() -> Check {
    let v3 = || prop::collection::vec(-1.0f64..1.0, 3);
    run_prop(256, (v3(), v3(), v3(), any::<bool>()), |(theta, a, b, quadratic)| {
        let theta = DVector::from_vec(theta);
        let utility = if quadratic {
            UtilityFunction::QuadraticConcave { theta }
        } else {
            UtilityFunction::Linear { theta }
        };
        let space = ActionSpace::ball(3, 2.0).unwrap();
        let (_, best) = utility.maximize(&space).unwrap();
        let worst = utility.minimum(&space).unwrap();
        let (a, b) = (DVector::from_vec(a), DVector::from_vec(b));
        for link in [LinkFunction::Logistic, LinkFunction::Linear] {
            let (l1, big_l1) = regret_bracket(link, best - worst);
            let (d, f) = regret_increment(&utility, link, best, &a, &b).unwrap();
            let slack = 1e-12 * (1.0 + f);
            prop_assert!(
                d >= l1 * f - slack && d <= big_l1 * f + slack,
                "{d} vs [{}, {}]",
                l1 * f,
                big_l1 * f
            );
        }
        Ok(())
    })
}

/// Small ball instance with the given algorithm and corruption JSON.
pub fn ball_config(algorithm: &str, corruption: &str) -> ExperimentConfig {
    let text = format!(
        r#"{{
            "name": "props",
            "space": {{"type": "ball", "dim": 3, "radius": 4.0}},
            "utility": {{"type": "quadratic", "theta": "random_surface"}},
            "link": "logistic",
            "corruption": {corruption},
            "algorithm": {algorithm},
            "horizon": 3000,
            "seeds": [11, 12, 13]
        }}"#
    );
    ExperimentConfig::from_json_str(&text, &[]).unwrap()
}

pub const ALL_ALGORITHMS: [&str; 5] = [
    r#"{"type": "dbgd"}"#,
    r#"{"type": "rosmid", "alpha": 0.5}"#,
    r#"{"type": "sparring"}"#,
    r#"{"type": "doubler"}"#,
    r#"{"type": "bgd"}"#,
];

pub fn replay_bit_identical() -> Check {
    let bits = |v: &[f64]| v.iter().map(|f| f.to_bits()).collect::<Vec<_>>();
    for algorithm in ALL_ALGORITHMS {
        let cfg = ball_config(algorithm, r#"{"type": "generalized_learnability", "rho": 0.5}"#);
        let first = run_experiment(&cfg).map_err(|e| e.to_string())?;
        let second = run_experiment(&cfg).map_err(|e| e.to_string())?;
        let prepared = prepare(&cfg).map_err(|e| e.to_string())?;
        for (x, y) in first.runs.iter().zip(&second.runs) {
            let (tx, ty) = (x.outcome.as_ref()?, y.outcome.as_ref()?);
            // a lone seed replays the same way as inside the parallel batch
            let alone = run_seed(&prepared, x.seed).map_err(|e| e.to_string())?;
            ensure(
                bits(&tx.cum_dueling) == bits(&ty.cum_dueling)
                    && bits(&tx.cum_functional) == bits(&ty.cum_functional)
                    && bits(&alone.cum_dueling) == bits(&tx.cum_dueling),
                || format!("{algorithm}, seed {}: traces differ", x.seed),
            )?;
        }
    }
    Ok(())
}

pub fn kmeans_purity() -> Check {
    let (k, n) = (5, 2000);
    let (raw, truth) = synthetic_mixture(n, 15, k, 511).map_err(|e| e.to_string())?;
    let corpus = cluster_corpus(&raw, k, 3).map_err(|e| e.to_string())?;
    // each found cluster takes its majority true label
    let mut counts = vec![vec![0usize; k]; k];
    for (found, &label) in corpus.assignments.iter().zip(&truth) {
        counts[*found][label] += 1;
    }
    let matched: usize = counts.iter().map(|row| row.iter().copied().max().unwrap_or(0)).sum();
    let purity = matched as f64 / n as f64;
    ensure(purity >= 0.95, || format!("purity {purity}"))
}

/// Every suite by name, in the order they are reported.
pub fn all_checks() -> Vec<NamedCheck> {
    vec![
        ("polytope projection vs grid oracle", projection_matches_grid),
        ("mirror_solve residual", mirror_solve_residual),
        ("inverse square root round trip", inverse_sqrt_round_trip),
        (
            "regularizer gradient vs finite differences",
            gradient_matches_finite_differences,
        ),
        ("Dikin containment", dikin_containment),
        ("link rotation symmetry", link_symmetry),
        ("duel Bernoulli frequency", duel_frequency),
        ("corruption budget closed form", budget_below_closed_form),
        ("fit_order exact on power laws", fit_exact_on_power_laws),
        ("per-round regret bracket", regret_bracket_holds),
        ("bit-identical replay", replay_bit_identical),
        ("k-means purity", kmeans_purity),
    ]
}
