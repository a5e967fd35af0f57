//! Kolmogorov forward equations for the pure-birth chain.
//!
//! With `p_k(t)` the probability of being in state `k` at time `t`,
//!
//! ```text
//! p'_k(t) = λ_{k-1} p_{k-1}(t) − λ_k p_k(t)
//! ```
//!
//! for `k` from the start state to the absorbing state, with no inflow into
//! the start state and `λ = 0` at the absorbing state. The generator is
//! bidiagonal so each derivative evaluation is O(states).

use serde::Serialize;

use crate::error::{out_of_range, Error, Result};
use crate::rate_models::RateModel;
use crate::summation::compensated_sum;

/// Probability-mass tolerance for accepted steps.
pub const MASS_TOLERANCE: f64 = 1e-8;
/// Negative entries smaller than this in magnitude are treated as roundoff.
pub const NEGATIVE_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Dormand–Prince 5(4) with per-step error control.
    Adaptive,
    /// Classical 4th-order Runge–Kutta with step `max_step` (shortened to
    /// land on each output time).
    FixedRk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    pub method: Method,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_step: f64,
    /// Adaptive step budget per integration.
    pub max_steps: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::Adaptive,
            abs_tol: 1e-13,
            rel_tol: 1e-8,
            max_step: f64::INFINITY,
            max_steps: 50_000_000,
        }
    }
}

impl SolverConfig {
    pub fn fixed_rk4(step: f64) -> Self {
        Self {
            method: Method::FixedRk4,
            max_step: step,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(out_of_range("abs_tol", self.abs_tol, "must be positive"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(out_of_range("rel_tol", self.rel_tol, "must be positive"));
        }
        if !(self.max_step > 0.0) {
            return Err(out_of_range("max_step", self.max_step, "must be positive"));
        }
        if self.method == Method::FixedRk4 && !self.max_step.is_finite() {
            return Err(out_of_range(
                "max_step",
                self.max_step,
                "fixed-step mode needs a finite step",
            ));
        }
        Ok(())
    }
}

/// State distribution at a fixed time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionSnapshot {
    pub time: f64,
    pub start_state: u64,
    /// Entry `i` is the probability of state `start_state + i`; the last
    /// entry is the absorbing (or cap) state.
    pub probabilities: Vec<f64>,
    pub mass_defect: f64,
    /// The last entry is a cap that collects all mass escaping a truncated
    /// state space.
    pub truncated: bool,
}

impl DistributionSnapshot {
    pub fn absorbing_state(&self) -> u64 {
        self.start_state + self.probabilities.len() as u64 - 1
    }

    /// Probability of `state`; zero outside the reachable range.
    pub fn probability(&self, state: u64) -> f64 {
        if state < self.start_state {
            return 0.0;
        }
        self.probabilities
            .get((state - self.start_state) as usize)
            .copied()
            .unwrap_or(0.0)
    }

    /// Mass at the absorbing or cap state.
    pub fn absorbed(&self) -> f64 {
        *self
            .probabilities
            .last()
            .expect("snapshot has at least one state")
    }

    /// `(state, probability)` pairs in ascending state order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.probabilities
            .iter()
            .enumerate()
            .map(move |(i, &p)| (self.start_state + i as u64, p))
    }
}

/// Σ k·p_k.
pub fn mean_state(snapshot: &DistributionSnapshot) -> f64 {
    compensated_sum(snapshot.iter().map(|(k, p)| k as f64 * p.clamp(0.0, 1.0)))
}

/// Distribution at time `t` starting from a point mass at `start_state`.
pub fn forward_probabilities(
    model: &RateModel,
    start_state: u64,
    t: f64,
    config: &SolverConfig,
) -> Result<DistributionSnapshot> {
    let mut snaps = forward_grid(model, start_state, &[t], config)?;
    Ok(snaps.pop().expect("one time requested"))
}

/// P(T ≤ t): the mass at the absorbing state at time `t`.
pub fn absorption_probability(
    model: &RateModel,
    start_state: u64,
    t: f64,
    config: &SolverConfig,
) -> Result<f64> {
    Ok(forward_probabilities(model, start_state, t, config)?.absorbed())
}

/// Snapshots at each of `times` (nondecreasing, nonnegative), integrating
/// once through the whole grid.
pub fn forward_grid(
    model: &RateModel,
    start_state: u64,
    times: &[f64],
    config: &SolverConfig,
) -> Result<Vec<DistributionSnapshot>> {
    config.validate()?;
    model.check_state(start_state)?;
    for w in times.windows(2) {
        if !(w[1] >= w[0]) {
            return Err(Error::InvalidConfig(format!(
                "output times must be nondecreasing ({} then {})",
                w[0], w[1]
            )));
        }
    }
    if let Some(&t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(out_of_range("t", t, "must be finite and nonnegative"));
    }

    let mut rates = model.rates_from(start_state)?;
    rates.push(0.0);
    let system = BirthSystem { rates };
    let mut y = vec![0.0; system.len()];
    y[0] = 1.0;

    let mut integrator = Integrator::new(&system, *config);
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        integrator.advance(&mut y, now, t)?;
        now = t;
        out.push(snapshot(&y, t, start_state, model.is_truncated())?);
    }
    Ok(out)
}

fn snapshot(y: &[f64], time: f64, start_state: u64, truncated: bool) -> Result<DistributionSnapshot> {
    let mut probabilities = Vec::with_capacity(y.len());
    for (i, &p) in y.iter().enumerate() {
        if p < -NEGATIVE_CLAMP {
            return Err(Error::ToleranceNotMet {
                time,
                reason: format!("probability of state {} is {p:e}", start_state + i as u64),
            });
        }
        probabilities.push(p.clamp(0.0, 1.0));
    }
    let mass_defect = (1.0 - compensated_sum(probabilities.iter().copied())).abs();
    if mass_defect > MASS_TOLERANCE {
        return Err(Error::ToleranceNotMet {
            time,
            reason: format!("mass defect {mass_defect:e}"),
        });
    }
    Ok(DistributionSnapshot {
        time,
        start_state,
        probabilities,
        mass_defect,
        truncated,
    })
}

struct BirthSystem {
    /// Outflow rate of each local state; the last entry is zero.
    rates: Vec<f64>,
}

impl BirthSystem {
    fn len(&self) -> usize {
        self.rates.len()
    }

    fn max_rate(&self) -> f64 {
        self.rates.iter().copied().fold(0.0, f64::max)
    }

    fn derivative(&self, y: &[f64], dy: &mut [f64]) {
        let r = &self.rates;
        dy[0] = -r[0] * y[0];
        for i in 1..y.len() {
            dy[i] = r[i - 1] * y[i - 1] - r[i] * y[i];
        }
    }
}

// Dormand–Prince 5(4) tableau; the system is autonomous so the nodes c_i are unused.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b*, the embedded error weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Integrator<'a> {
    system: &'a BirthSystem,
    config: SolverConfig,
    k: [Vec<f64>; 7],
    stage: Vec<f64>,
    next: Vec<f64>,
    /// Step size carried between calls to `advance`.
    step: f64,
    steps: u64,
    /// k[0] holds f(y) for the current y (first-same-as-last).
    fsal_valid: bool,
}

impl<'a> Integrator<'a> {
    fn new(system: &'a BirthSystem, config: SolverConfig) -> Self {
        let n = system.len();
        let max_rate = system.max_rate();
        let initial = if max_rate > 0.0 { 0.1 / max_rate } else { 1.0 };
        Self {
            system,
            config,
            k: std::array::from_fn(|_| vec![0.0; n]),
            stage: vec![0.0; n],
            next: vec![0.0; n],
            step: initial.min(config.max_step),
            steps: 0,
            fsal_valid: false,
        }
    }

    fn advance(&mut self, y: &mut [f64], from: f64, to: f64) -> Result<()> {
        if to <= from {
            return Ok(());
        }
        match self.config.method {
            Method::Adaptive => self.advance_adaptive(y, from, to),
            Method::FixedRk4 => {
                let span = to - from;
                let n = (span / self.config.max_step).ceil().max(1.0);
                let h = span / n;
                for i in 0..n as u64 {
                    self.rk4_step(y, h);
                    check_mass(y, from + (i + 1) as f64 * h)?;
                }
                Ok(())
            }
        }
    }

    fn rk4_step(&mut self, y: &mut [f64], h: f64) {
        let sys = self.system;
        let [k1, k2, k3, k4, ..] = &mut self.k;
        sys.derivative(y, k1);
        for i in 0..y.len() {
            self.stage[i] = y[i] + 0.5 * h * k1[i];
        }
        sys.derivative(&self.stage, k2);
        for i in 0..y.len() {
            self.stage[i] = y[i] + 0.5 * h * k2[i];
        }
        sys.derivative(&self.stage, k3);
        for i in 0..y.len() {
            self.stage[i] = y[i] + h * k3[i];
        }
        sys.derivative(&self.stage, k4);
        for i in 0..y.len() {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }

    fn advance_adaptive(&mut self, y: &mut [f64], from: f64, to: f64) -> Result<()> {
        let sys = self.system;
        let n = y.len();
        let mut t = from;
        if !self.fsal_valid {
            sys.derivative(y, &mut self.k[0]);
            self.fsal_valid = true;
        }
        while t < to {
            self.steps += 1;
            if self.steps > self.config.max_steps {
                return Err(Error::ToleranceNotMet {
                    time: t,
                    reason: format!("exceeded {} steps", self.config.max_steps),
                });
            }
            let remaining = to - t;
            let last = self.step >= remaining;
            let h = if last { remaining } else { self.step };
            if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) && !last {
                return Err(Error::ToleranceNotMet {
                    time: t,
                    reason: format!("step size underflow (h = {h:e})"),
                });
            }

            let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
            let stage = &mut self.stage;
            for i in 0..n {
                stage[i] = y[i] + h * A21 * k1[i];
            }
            sys.derivative(stage, k2);
            for i in 0..n {
                stage[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            sys.derivative(stage, k3);
            for i in 0..n {
                stage[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            sys.derivative(stage, k4);
            for i in 0..n {
                stage[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            sys.derivative(stage, k5);
            for i in 0..n {
                stage[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            sys.derivative(stage, k6);
            let next = &mut self.next;
            for i in 0..n {
                next[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
            }
            sys.derivative(next, k7);

            let mut err: f64 = 0.0;
            for i in 0..n {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let scale = self.config.abs_tol + self.config.rel_tol * y[i].abs().max(next[i].abs());
                err = err.max(e.abs() / scale);
            }
            if !err.is_finite() {
                return Err(Error::ToleranceNotMet {
                    time: t,
                    reason: "non-finite error estimate".into(),
                });
            }

            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                t = if last { to } else { t + h };
                y.copy_from_slice(next);
                std::mem::swap(k1, k7);
                check_mass(y, t)?;
                // keep the pre-truncation step when the last step was shortened
                if !last || factor < 1.0 {
                    self.step = (h * factor).min(self.config.max_step);
                }
            } else {
                self.step = (h * factor.min(1.0)).min(self.config.max_step);
            }
        }
        Ok(())
    }
}

fn check_mass(y: &[f64], t: f64) -> Result<()> {
    let defect = (1.0 - compensated_sum(y.iter().copied())).abs();
    if defect > MASS_TOLERANCE || !defect.is_finite() {
        return Err(Error::ToleranceNotMet {
            time: t,
            reason: format!("mass defect {defect:e}"),
        });
    }
    Ok(())
}
