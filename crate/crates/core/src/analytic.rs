//! Closed-form absorption-time results for the pure-birth chain.
//!
//! The absorption time from state `s` is a sum of independent exponential
//! holding times, one per transient state, so its mean and variance are
//! sums of `1/λ_k` and `1/λ_k²`. For distinct rates the law itself is
//! hypoexponential with a partial-fraction density.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rate_models::{RateKind, RateModel};
use crate::summation::{compensated_sum, CompensatedSum};

pub const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

/// Relative tolerance below which two rates count as repeated.
pub const DISTINCT_RATE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbsorptionTimeReport {
    /// Σ 1/λ_k over transient states from `start_state`.
    pub exact_mean: f64,
    /// `(N-1)/(pμN)·H_{N-1}` for Yule-scaled models started at 1.
    pub closed_form: Option<f64>,
    /// `ln N/(pμ)` for Yule-scaled models.
    pub approx_mean: Option<f64>,
    /// `(ln N + γ)/(pμ)`, reported next to `approx_mean` as a diagnostic.
    pub refined_approx: Option<f64>,
    /// Σ 1/λ_k².
    pub variance: f64,
    pub start_state: u64,
    pub time_unit: String,
    pub truncated: bool,
}

/// H_n by compensated summation in ascending order.
pub fn harmonic_number(n: u64) -> f64 {
    compensated_sum((1..=n).map(|k| 1.0 / k as f64))
}

/// Mean and variance of the absorption time from `start_state`.
pub fn expected_absorption_time(model: &RateModel, start_state: u64) -> Result<AbsorptionTimeReport> {
    model.check_state(start_state)?;
    if start_state == model.absorbing_state() {
        return Err(Error::StateOutOfRange {
            state: start_state,
            min: 1,
            max: model.absorbing_state() - 1,
        });
    }
    let mut mean = CompensatedSum::new();
    let mut variance = CompensatedSum::new();
    for k in start_state..model.absorbing_state() {
        let rate = model.rate_at(k)?;
        if rate <= 0.0 {
            return Err(Error::Divergent);
        }
        let inv = 1.0 / rate;
        mean.add(inv);
        variance.add(inv * inv);
    }
    let exact_mean = mean.value();
    if !exact_mean.is_finite() {
        return Err(Error::Divergent);
    }

    let (closed_form, approx_mean, refined_approx) = match *model.kind() {
        RateKind::YuleScaled {
            population,
            per_capita_rate,
            transmission_prob,
        } => {
            let n = population as f64;
            let closed = (start_state == 1).then(|| {
                (n - 1.0) / (transmission_prob * per_capita_rate * n) * harmonic_number(population - 1)
            });
            if let Some(closed) = closed {
                debug_assert!(
                    (closed - exact_mean).abs() <= 1e-10 * exact_mean,
                    "closed form {closed} disagrees with direct sum {exact_mean}"
                );
            }
            let scale = transmission_prob * per_capita_rate;
            (
                closed,
                Some(n.ln() / scale),
                Some((n.ln() + EULER_MASCHERONI) / scale),
            )
        }
        _ => (None, None, None),
    };

    Ok(AbsorptionTimeReport {
        exact_mean,
        closed_form,
        approx_mean,
        refined_approx,
        variance: variance.value(),
        start_state,
        time_unit: model.time_unit().to_string(),
        truncated: model.is_truncated(),
    })
}

/// Large-population approximation `ln N/(pμ)` for Yule-scaled models.
pub fn expected_absorption_time_approx(model: &RateModel) -> Result<f64> {
    match *model.kind() {
        RateKind::YuleScaled {
            population,
            per_capita_rate,
            transmission_prob,
        } => Ok((population as f64).ln() / (transmission_prob * per_capita_rate)),
        _ => Err(Error::WrongFamily {
            expected: "yule",
            found: model.family().name(),
        }),
    }
}

/// Hypoexponential law of a sum of independent exponentials with
/// pairwise-distinct rates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HittingTimeDistribution {
    pub rates: Vec<f64>,
    /// `C_k = Π_{j≠k} λ_j/(λ_j − λ_k)`.
    pub coefficients: Vec<f64>,
    pub distinct: bool,
}

impl HittingTimeDistribution {
    /// Fails with [`Error::RepeatedRates`] when any two rates agree to
    /// within [`DISTINCT_RATE_TOLERANCE`] relative.
    pub fn from_rates(rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::InvalidConfig(
                "hypoexponential law needs at least one rate".into(),
            ));
        }
        if let Some(&bad) = rates.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(crate::error::out_of_range(
                "rate",
                bad,
                "must be positive and finite",
            ));
        }
        let mut sorted = rates.clone();
        sorted.sort_by(f64::total_cmp);
        for w in sorted.windows(2) {
            if (w[1] - w[0]) <= DISTINCT_RATE_TOLERANCE * w[1] {
                return Err(Error::RepeatedRates {
                    first: w[0],
                    second: w[1],
                    tolerance: DISTINCT_RATE_TOLERANCE,
                });
            }
        }
        let coefficients = rates
            .iter()
            .enumerate()
            .map(|(k, &lk)| {
                rates
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != k)
                    .map(|(_, &lj)| lj / (lj - lk))
                    .product()
            })
            .collect();
        Ok(Self {
            rates,
            coefficients,
            distinct: true,
        })
    }

    /// Σ C_k λ_k e^{−λ_k t}; clamped at zero against cancellation.
    pub fn density(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        let d = compensated_sum(
            self.rates
                .iter()
                .zip(&self.coefficients)
                .map(|(&l, &c)| c * l * (-l * t).exp()),
        );
        d.max(0.0)
    }

    /// P(T > t) = Σ C_k e^{−λ_k t}.
    pub fn survival(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        compensated_sum(
            self.rates
                .iter()
                .zip(&self.coefficients)
                .map(|(&l, &c)| c * (-l * t).exp()),
        )
        .clamp(0.0, 1.0)
    }

    pub fn cdf(&self, t: f64) -> f64 {
        1.0 - self.survival(t)
    }

    /// Σ 1/λ_k.
    pub fn mean(&self) -> f64 {
        compensated_sum(self.rates.iter().map(|l| 1.0 / l))
    }

    /// ∫ density = Σ C_k, integrated termwise.
    pub fn total_mass(&self) -> f64 {
        compensated_sum(self.coefficients.iter().copied())
    }
}

/// Hypoexponential law of the absorption time from `start_state`.
pub fn hitting_time_distribution(model: &RateModel, start_state: u64) -> Result<HittingTimeDistribution> {
    model.check_state(start_state)?;
    if start_state == model.absorbing_state() {
        return Err(Error::StateOutOfRange {
            state: start_state,
            min: 1,
            max: model.absorbing_state() - 1,
        });
    }
    HittingTimeDistribution::from_rates(model.rates_from(start_state)?)
}

/// The two power-law regimes with closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerLawRegime {
    /// λ_k = c·k²: the mean converges to π²/(6c).
    Explosive,
    /// λ_k = c/k²: the mean grows like n³/(3c).
    Damped,
}

impl PowerLawRegime {
    pub fn from_exponent(exponent: f64) -> Result<Self> {
        if exponent == 2.0 {
            Ok(PowerLawRegime::Explosive)
        } else if exponent == -2.0 {
            Ok(PowerLawRegime::Damped)
        } else {
            Err(crate::error::out_of_range(
                "exponent",
                exponent,
                "closed forms exist for exponents +2 and -2 only",
            ))
        }
    }

    pub fn exponent(self) -> f64 {
        match self {
            PowerLawRegime::Explosive => 2.0,
            PowerLawRegime::Damped => -2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerLawReport {
    pub regime: PowerLawRegime,
    pub n: u64,
    /// Σ_{k=1}^{n} 1/λ_k with λ_k = c·k^{±2}.
    pub value: f64,
    /// π²/(6c), explosive regime only.
    pub limit: Option<f64>,
    /// Bound 1/(cn) on the neglected tail, explosive regime only.
    pub tail_bound: Option<f64>,
    /// Leading-order n³/(3c), damped regime only.
    pub growth: Option<f64>,
}

/// Expected absorption time of the power-law chain over states `1..=n`.
pub fn powerlaw_expected_time(c: f64, regime: PowerLawRegime, n: u64) -> Result<PowerLawReport> {
    if !(c.is_finite() && c > 0.0) {
        return Err(crate::error::out_of_range("c", c, "must be positive and finite"));
    }
    if n == 0 {
        return Err(crate::error::out_of_range("n", n, "need n >= 1"));
    }
    let nf = n as f64;
    Ok(match regime {
        PowerLawRegime::Explosive => {
            // descending order adds the small terms first
            let s = compensated_sum((1..=n).rev().map(|k| {
                let k = k as f64;
                1.0 / (k * k)
            }));
            PowerLawReport {
                regime,
                n,
                value: s / c,
                limit: Some(std::f64::consts::PI.powi(2) / (6.0 * c)),
                tail_bound: Some(1.0 / (c * nf)),
                growth: None,
            }
        }
        PowerLawRegime::Damped => {
            let direct = (1..=u128::from(n)).map(|k| k * k).sum::<u128>();
            let n128 = u128::from(n);
            let closed = n128 * (n128 + 1) * (2 * n128 + 1) / 6;
            assert_eq!(direct, closed, "sum of squares identity failed for n = {n}");
            PowerLawReport {
                regime,
                n,
                value: closed as f64 / c,
                limit: None,
                tail_bound: None,
                growth: Some(nf * nf * nf / (3.0 * c)),
            }
        }
    })
}
