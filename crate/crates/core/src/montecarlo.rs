//! Exact-event simulation of the pure-birth chain.
//!
//! Each holding time is drawn as `−ln U / λ_k` with `U` uniform on the open
//! interval (0, 1), then the state jumps `k → k + 1`. Replicate `i` always
//! draws from its own ChaCha8 stream `(master_seed, i)`, so summaries do not
//! depend on how replicates are scheduled across threads.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::PowerLawRegime;
use crate::error::{out_of_range, Error, Result};
use crate::forward_solver::DistributionSnapshot;
use crate::rate_models::{RateKind, RateModel};
use crate::summation::{compensated_sum, CompensatedSum};

/// Independent random stream for one replicate.
pub fn replicate_stream(master_seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replicate);
    rng
}

/// How replicates are scheduled. Results are bit-identical either way.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

impl Execution {
    fn map_replicates<T, F>(self, replicates: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        match self {
            Execution::Serial => (0..replicates).map(f).collect(),
            Execution::Parallel => (0..replicates).into_par_iter().map(f).collect(),
        }
    }
}

#[inline]
fn holding_time<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    -u.ln() / rate
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub time: f64,
    pub state: u64,
}

/// One sample path, from `(0, start)` to absorption.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub events: Vec<Event>,
    pub absorbed: bool,
    pub terminal_time: f64,
}

impl Trajectory {
    /// Checks the pure-birth path invariants.
    pub fn validate(&self, absorbing_state: u64) -> std::result::Result<(), String> {
        let first = self.events.first().ok_or("empty trajectory")?;
        if first.time != 0.0 {
            return Err(format!("first event at t = {}", first.time));
        }
        for w in self.events.windows(2) {
            if !(w[1].time > w[0].time) {
                return Err(format!("times not increasing: {} then {}", w[0].time, w[1].time));
            }
            if w[1].state != w[0].state + 1 {
                return Err(format!("jump {} -> {}", w[0].state, w[1].state));
            }
        }
        let last = self.events.last().expect("nonempty");
        if self.absorbed && last.state != absorbing_state {
            return Err(format!("absorbed but ended in state {}", last.state));
        }
        if last.time != self.terminal_time {
            return Err(format!(
                "terminal time {} != last event {}",
                self.terminal_time, last.time
            ));
        }
        Ok(())
    }
}

/// Simulates one path to absorption, recording every event.
pub fn simulate_path<R: Rng + ?Sized>(
    model: &RateModel,
    start_state: u64,
    rng: &mut R,
) -> Result<Trajectory> {
    model.check_state(start_state)?;
    let rates = model.rates_from(start_state)?;
    Ok(path_from_rates(&rates, start_state, rng))
}

fn path_from_rates<R: Rng + ?Sized>(rates: &[f64], start_state: u64, rng: &mut R) -> Trajectory {
    let mut events = Vec::with_capacity(rates.len() + 1);
    events.push(Event {
        time: 0.0,
        state: start_state,
    });
    let mut clock = CompensatedSum::new();
    for (i, &rate) in rates.iter().enumerate() {
        clock.add(holding_time(rate, rng));
        events.push(Event {
            time: clock.value(),
            state: start_state + i as u64 + 1,
        });
    }
    Trajectory {
        events,
        absorbed: true,
        terminal_time: clock.value(),
    }
}

/// Absorption time of one path without storing events. Consumes the stream
/// exactly as [`simulate_path`] does.
fn absorption_time<R: Rng + ?Sized>(rates: &[f64], rng: &mut R) -> f64 {
    let mut clock = CompensatedSum::new();
    for &rate in rates {
        clock.add(holding_time(rate, rng));
    }
    clock.value()
}

/// State occupied at time `t`.
fn state_at<R: Rng + ?Sized>(rates: &[f64], start_state: u64, t: f64, rng: &mut R) -> u64 {
    let mut clock = CompensatedSum::new();
    for (i, &rate) in rates.iter().enumerate() {
        clock.add(holding_time(rate, rng));
        if clock.value() > t {
            return start_state + i as u64;
        }
    }
    start_state + rates.len() as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quantiles {
    pub q05: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub replicates: u64,
    pub master_seed: u64,
    pub mean: f64,
    /// Unbiased sample variance.
    pub sample_variance: f64,
    pub std_error: f64,
    pub quantiles: Quantiles,
    pub time_unit: String,
}

impl MonteCarloSummary {
    /// Summarizes samples given in replicate order.
    pub fn from_samples(samples: &[f64], master_seed: u64, time_unit: &str) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(out_of_range("replicates", n, "need at least 2 replicates"));
        }
        let nf = n as f64;
        let mean = compensated_sum(samples.iter().copied()) / nf;
        let sample_variance = compensated_sum(samples.iter().map(|x| (x - mean) * (x - mean))) / (nf - 1.0);
        let mut sorted = samples.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        Ok(Self {
            replicates: n as u64,
            master_seed,
            mean,
            sample_variance,
            std_error: (sample_variance / nf).sqrt(),
            quantiles: Quantiles {
                q05: quantile_sorted(&sorted, 0.05),
                q25: quantile_sorted(&sorted, 0.25),
                q50: quantile_sorted(&sorted, 0.50),
                q75: quantile_sorted(&sorted, 0.75),
                q95: quantile_sorted(&sorted, 0.95),
            },
            time_unit: time_unit.to_string(),
        })
    }
}

/// Linear interpolation between order statistics (Hyndman–Fan type 7).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Absorption times of `replicates` independent paths, in replicate order.
pub fn sample_absorption_times(
    model: &RateModel,
    start_state: u64,
    replicates: u64,
    master_seed: u64,
    execution: Execution,
) -> Result<Vec<f64>> {
    model.check_state(start_state)?;
    let rates = model.rates_from(start_state)?;
    Ok(execution.map_replicates(replicates, |i| {
        absorption_time(&rates, &mut replicate_stream(master_seed, i))
    }))
}

pub fn estimate_absorption_time(
    model: &RateModel,
    start_state: u64,
    replicates: u64,
    master_seed: u64,
) -> Result<MonteCarloSummary> {
    estimate_absorption_time_with(model, start_state, replicates, master_seed, Execution::default())
}

pub fn estimate_absorption_time_with(
    model: &RateModel,
    start_state: u64,
    replicates: u64,
    master_seed: u64,
    execution: Execution,
) -> Result<MonteCarloSummary> {
    if replicates < 2 {
        return Err(out_of_range(
            "replicates",
            replicates,
            "need at least 2 replicates",
        ));
    }
    let times = sample_absorption_times(model, start_state, replicates, master_seed, execution)?;
    MonteCarloSummary::from_samples(&times, master_seed, model.time_unit())
}

/// Full trajectories for replicates `0..replicates`, drawn from the same
/// streams as [`estimate_absorption_time`].
pub fn simulate_paths(
    model: &RateModel,
    start_state: u64,
    replicates: u64,
    master_seed: u64,
    execution: Execution,
) -> Result<Vec<Trajectory>> {
    model.check_state(start_state)?;
    let rates = model.rates_from(start_state)?;
    Ok(execution.map_replicates(replicates, |i| {
        path_from_rates(&rates, start_state, &mut replicate_stream(master_seed, i))
    }))
}

/// State counts at a fixed time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateHistogram {
    pub time: f64,
    pub start_state: u64,
    /// Entry `i` counts replicates in state `start_state + i`.
    pub counts: Vec<u64>,
    pub replicates: u64,
}

impl StateHistogram {
    pub fn frequency(&self, state: u64) -> f64 {
        if state < self.start_state {
            return 0.0;
        }
        self.counts
            .get((state - self.start_state) as usize)
            .map_or(0.0, |&c| c as f64 / self.replicates as f64)
    }

    /// Total-variation distance to a forward-equation snapshot.
    pub fn total_variation(&self, snapshot: &DistributionSnapshot) -> f64 {
        let lo = self.start_state.min(snapshot.start_state);
        let hi = (self.start_state + self.counts.len() as u64).max(snapshot.absorbing_state() + 1);
        0.5 * compensated_sum((lo..hi).map(|k| (self.frequency(k) - snapshot.probability(k)).abs()))
    }
}

pub fn empirical_distribution_at(
    model: &RateModel,
    start_state: u64,
    t: f64,
    replicates: u64,
    master_seed: u64,
) -> Result<StateHistogram> {
    empirical_distribution_at_with(
        model,
        start_state,
        t,
        replicates,
        master_seed,
        Execution::default(),
    )
}

pub fn empirical_distribution_at_with(
    model: &RateModel,
    start_state: u64,
    t: f64,
    replicates: u64,
    master_seed: u64,
    execution: Execution,
) -> Result<StateHistogram> {
    model.check_state(start_state)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(out_of_range("t", t, "must be finite and nonnegative"));
    }
    if replicates == 0 {
        return Err(out_of_range(
            "replicates",
            replicates,
            "need at least 1 replicate",
        ));
    }
    let rates = model.rates_from(start_state)?;
    let states = execution.map_replicates(replicates, |i| {
        state_at(&rates, start_state, t, &mut replicate_stream(master_seed, i))
    });
    let mut counts = vec![0u64; rates.len() + 1];
    for s in states {
        counts[(s - start_state) as usize] += 1;
    }
    Ok(StateHistogram {
        time: t,
        start_state,
        counts,
        replicates,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplosionSummary {
    pub cap: u64,
    pub coefficient: f64,
    pub start_state: u64,
    pub summary: MonteCarloSummary,
    /// (1/c)·Σ_{k=start}^{cap−1} 1/k².
    pub partial_sum: f64,
    /// π²/(6c).
    pub limit: f64,
    /// (1/c)·Σ_{k≥cap} 1/k² < 1/(c·(cap−1)).
    pub tail_bound: f64,
}

/// Time to reach the cap of a λ_k = c·k² chain.
pub fn explosion_study(
    model: &RateModel,
    start_state: u64,
    replicates: u64,
    master_seed: u64,
) -> Result<ExplosionSummary> {
    explosion_study_with(model, start_state, replicates, master_seed, Execution::default())
}

pub fn explosion_study_with(
    model: &RateModel,
    start_state: u64,
    replicates: u64,
    master_seed: u64,
    execution: Execution,
) -> Result<ExplosionSummary> {
    let RateKind::PowerLaw {
        coefficient,
        exponent,
        state_cap,
    } = *model.kind()
    else {
        return Err(Error::WrongFamily {
            expected: "powerlaw",
            found: model.family().name(),
        });
    };
    if PowerLawRegime::from_exponent(exponent)? != PowerLawRegime::Explosive {
        return Err(out_of_range(
            "exponent",
            exponent,
            "explosion study needs exponent +2",
        ));
    }
    if start_state >= state_cap {
        return Err(out_of_range("cap", state_cap, "need cap >= start + 1"));
    }
    let summary = estimate_absorption_time_with(model, start_state, replicates, master_seed, execution)?;
    let partial_sum = compensated_sum((start_state..state_cap).rev().map(|k| {
        let k = k as f64;
        1.0 / (k * k)
    })) / coefficient;
    Ok(ExplosionSummary {
        cap: state_cap,
        coefficient,
        start_state,
        summary,
        partial_sum,
        limit: std::f64::consts::PI.powi(2) / (6.0 * coefficient),
        tail_bound: 1.0 / (coefficient * (state_cap - 1) as f64),
    })
}
