use crate::corruption::BudgetLedger;
use crate::error::{Error, Result};
use crate::geometry::ActionVector;
use crate::preference::{LinkFunction, UtilityFunction};

/// Per-round regret of proposing `(a, b)` when the optimum has value `best`.
///
/// Returns `(dueling, functional)` with dueling `σ(g_a) + σ(g_b) − 1` and
/// functional `g_a + g_b`, where `g = best − μ(action)`. Gaps are evaluated
/// with the true utility; round-off below zero is clamped.
pub fn regret_increment(
    utility: &UtilityFunction,
    link: LinkFunction,
    best: f64,
    a: &ActionVector,
    b: &ActionVector,
) -> Result<(f64, f64)> {
    let ga = (best - utility.value(a)?).max(0.0);
    let gb = (best - utility.value(b)?).max(0.0);
    let dueling = (link.prob(ga)? + link.prob(gb)? - 1.0).max(0.0);
    Ok((dueling, ga + gb))
}

/// Slope bounds `(l₁, L₁)` relating the two regret notions on an instance
/// whose utility gaps never exceed `max_gap`.
///
/// Dueling increments are sums of `σ(g) − σ(0)`, so they lie between `l₁`
/// and `L₁` times the functional increment, with `l₁` the smallest slope of
/// `σ` on `[0, max_gap]` and `L₁` its largest.
pub fn regret_bracket(link: LinkFunction, max_gap: f64) -> (f64, f64) {
    (link.min_slope_on(max_gap), link.max_slope())
}

/// Cumulative regrets of a single run, stored on a thinned round grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub rounds: Vec<u64>,
    pub cum_dueling: Vec<f64>,
    pub cum_functional: Vec<f64>,
    pub budget: BudgetLedger,
}

impl RegretTrace {
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn final_dueling(&self) -> f64 {
        self.cum_dueling.last().copied().unwrap_or(0.0)
    }
}

/// Rounds at which traces are stored: multiples of `every`, plus `horizon`
/// when it is not itself a multiple.
pub fn record_grid(horizon: u64, every: u64) -> Vec<u64> {
    let every = every.max(1);
    let mut grid: Vec<u64> = (1..=horizon / every).map(|k| k * every).collect();
    if !horizon.is_multiple_of(every) {
        grid.push(horizon);
    }
    grid
}

/// Pointwise mean and population standard deviation across seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub rounds: Vec<u64>,
    pub dueling_mean: Vec<f64>,
    pub dueling_std: Vec<f64>,
    pub functional_mean: Vec<f64>,
    pub functional_std: Vec<f64>,
}

pub fn aggregate(traces: &[&RegretTrace]) -> Result<Aggregate> {
    let first = traces
        .first()
        .ok_or_else(|| Error::Aggregate("no traces to aggregate".into()))?;
    if let Some(bad) = traces.iter().position(|t| t.rounds != first.rounds) {
        return Err(Error::Aggregate(format!("trace {bad} has a different round grid")));
    }
    let (dueling_mean, dueling_std) = mean_std(traces.iter().map(|t| t.cum_dueling.as_slice()), first.len());
    let (functional_mean, functional_std) = mean_std(traces.iter().map(|t| t.cum_functional.as_slice()), first.len());
    Ok(Aggregate {
        rounds: first.rounds.clone(),
        dueling_mean,
        dueling_std,
        functional_mean,
        functional_std,
    })
}

fn mean_std<'a>(series: impl Iterator<Item = &'a [f64]> + Clone, len: usize) -> (Vec<f64>, Vec<f64>) {
    let n = series.clone().count() as f64;
    let mut mean = vec![0.0; len];
    for s in series.clone() {
        for (m, v) in mean.iter_mut().zip(s) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; len];
    for s in series {
        for ((acc, v), m) in var.iter_mut().zip(s).zip(&mean) {
            *acc += (v - m) * (v - m);
        }
    }
    let std = var.into_iter().map(|v| (v / n).sqrt()).collect();
    (mean, std)
}
