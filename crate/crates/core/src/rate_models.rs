//! Per-state infection rate families for the pure-birth chain.
//!
//! State `k` is the number of infected individuals. Finite families live on
//! `1..=N` with `N` absorbing; power-law families live on `1..=cap` with the
//! cap absorbing all mass that would escape past it.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Random pair contacts at rate λ, each transmitting with probability p.
    HypergeometricMixing,
    /// Contact rate scaled with the population, λ = Nμ.
    YuleScaled,
    /// λ_k = c·k^exponent on a capped state space.
    PowerLaw,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::HypergeometricMixing => "hypergeometric",
            Family::YuleScaled => "yule",
            Family::PowerLaw => "powerlaw",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hypergeometric" | "hypergeometric-mixing" | "mixing" => Ok(Family::HypergeometricMixing),
            "yule" | "yule-scaled" => Ok(Family::YuleScaled),
            "powerlaw" | "power-law" => Ok(Family::PowerLaw),
            other => Err(Error::InvalidConfig(format!(
                "unknown family `{other}` (expected hypergeometric, yule or powerlaw)"
            ))),
        }
    }
}

/// Unvalidated parameter record, as read from flags or a config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Option<Family>,
    #[serde(rename = "N")]
    pub population: Option<u64>,
    #[serde(rename = "lambda")]
    pub contact_rate: Option<f64>,
    #[serde(rename = "mu")]
    pub per_capita_rate: Option<f64>,
    #[serde(rename = "p")]
    pub transmission_prob: Option<f64>,
    #[serde(rename = "c")]
    pub coefficient: Option<f64>,
    pub exponent: Option<f64>,
    #[serde(rename = "cap")]
    pub state_cap: Option<u64>,
    pub time_unit: Option<String>,
}

impl ModelSpec {
    pub fn hypergeometric(n: u64, lambda: f64, p: f64) -> Self {
        Self {
            family: Some(Family::HypergeometricMixing),
            population: Some(n),
            contact_rate: Some(lambda),
            transmission_prob: Some(p),
            ..Self::default()
        }
    }

    pub fn yule(n: u64, mu: f64, p: f64) -> Self {
        Self {
            family: Some(Family::YuleScaled),
            population: Some(n),
            per_capita_rate: Some(mu),
            transmission_prob: Some(p),
            ..Self::default()
        }
    }

    pub fn power_law(c: f64, exponent: f64, cap: Option<u64>) -> Self {
        Self {
            family: Some(Family::PowerLaw),
            coefficient: Some(c),
            exponent: Some(exponent),
            state_cap: cap,
            ..Self::default()
        }
    }

    pub fn with_unit(mut self, unit: impl Into<String>) -> Self {
        self.time_unit = Some(unit.into());
        self
    }

    pub fn build(&self) -> Result<RateModel> {
        build_rate_model(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum RateKind {
    HypergeometricMixing {
        population: u64,
        contact_rate: f64,
        transmission_prob: f64,
    },
    YuleScaled {
        population: u64,
        per_capita_rate: f64,
        transmission_prob: f64,
    },
    PowerLaw {
        coefficient: f64,
        exponent: f64,
        state_cap: u64,
    },
}

/// A validated, immutable rate family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateModel {
    #[serde(flatten)]
    kind: RateKind,
    time_unit: String,
}

pub const DEFAULT_TIME_UNIT: &str = "time";

fn positive(name: &'static str, value: Option<f64>) -> Result<f64> {
    let v = value.ok_or(Error::MissingParameter(name))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(out_of_range(name, v, "must be positive and finite"))
    }
}

fn probability(value: Option<f64>) -> Result<f64> {
    let p = value.ok_or(Error::MissingParameter("p"))?;
    if p > 0.0 && p <= 1.0 {
        Ok(p)
    } else {
        Err(out_of_range("p", p, "must lie in (0, 1]"))
    }
}

fn population(value: Option<u64>) -> Result<u64> {
    let n = value.ok_or(Error::MissingParameter("N"))?;
    if n < 2 {
        return Err(out_of_range("N", n, "need N >= 2"));
    }
    // k(N-k) is formed exactly in u128 and must stay exact in f64.
    if n > (1 << 26) {
        return Err(out_of_range("N", n, "need N <= 2^26"));
    }
    Ok(n)
}

/// Validates a parameter record into a [`RateModel`].
pub fn build_rate_model(spec: &ModelSpec) -> Result<RateModel> {
    let family = spec.family.ok_or(Error::MissingParameter("family"))?;
    let kind = match family {
        Family::HypergeometricMixing => RateKind::HypergeometricMixing {
            population: population(spec.population)?,
            contact_rate: positive("lambda", spec.contact_rate)?,
            transmission_prob: probability(spec.transmission_prob)?,
        },
        Family::YuleScaled => RateKind::YuleScaled {
            population: population(spec.population)?,
            per_capita_rate: positive("mu", spec.per_capita_rate)?,
            transmission_prob: probability(spec.transmission_prob)?,
        },
        Family::PowerLaw => {
            let coefficient = positive("c", spec.coefficient)?;
            let exponent = spec.exponent.ok_or(Error::MissingParameter("exponent"))?;
            if !exponent.is_finite() {
                return Err(out_of_range("exponent", exponent, "must be finite"));
            }
            let state_cap = spec.state_cap.ok_or(Error::CapRequired)?;
            if state_cap < 2 {
                return Err(out_of_range("cap", state_cap, "need cap >= 2"));
            }
            let kind = RateKind::PowerLaw {
                coefficient,
                exponent,
                state_cap,
            };
            // c·k^e can under- or overflow for extreme exponents.
            for k in [1, state_cap - 1] {
                let r = power_rate(coefficient, exponent, k);
                if !(r.is_finite() && r > 0.0) {
                    return Err(out_of_range(
                        "exponent",
                        exponent,
                        "rate c*k^exponent not representable",
                    ));
                }
            }
            kind
        }
    };
    let time_unit = spec
        .time_unit
        .clone()
        .unwrap_or_else(|| DEFAULT_TIME_UNIT.to_string());
    Ok(RateModel { kind, time_unit })
}

fn mixing_rate(n: u64, lambda: f64, p: f64, k: u64) -> f64 {
    let pairs = u128::from(k) * u128::from(n - k);
    let all_pairs = u128::from(n) * u128::from(n - 1);
    2.0 * pairs as f64 * lambda * p / all_pairs as f64
}

fn power_rate(c: f64, exponent: f64, k: u64) -> f64 {
    let k = k as f64;
    if exponent.fract() == 0.0 && exponent.abs() <= 64.0 {
        let e = exponent as i32;
        if e >= 0 {
            c * k.powi(e)
        } else {
            c / k.powi(-e)
        }
    } else {
        c * k.powf(exponent)
    }
}

impl RateModel {
    pub fn kind(&self) -> &RateKind {
        &self.kind
    }

    pub fn family(&self) -> Family {
        match self.kind {
            RateKind::HypergeometricMixing { .. } => Family::HypergeometricMixing,
            RateKind::YuleScaled { .. } => Family::YuleScaled,
            RateKind::PowerLaw { .. } => Family::PowerLaw,
        }
    }

    pub fn time_unit(&self) -> &str {
        &self.time_unit
    }

    /// Population size for finite families.
    pub fn population(&self) -> Option<u64> {
        match self.kind {
            RateKind::HypergeometricMixing { population, .. } | RateKind::YuleScaled { population, .. } => {
                Some(population)
            }
            RateKind::PowerLaw { .. } => None,
        }
    }

    /// True when the state space is an artificial truncation of an
    /// unbounded one.
    pub fn is_truncated(&self) -> bool {
        matches!(self.kind, RateKind::PowerLaw { .. })
    }

    /// The absorbing state: `N` for finite families, the cap for power laws.
    pub fn absorbing_state(&self) -> u64 {
        match self.kind {
            RateKind::HypergeometricMixing { population, .. } | RateKind::YuleScaled { population, .. } => {
                population
            }
            RateKind::PowerLaw { state_cap, .. } => state_cap,
        }
    }

    /// Transient states in ascending order.
    pub fn transient_states(&self) -> RangeInclusive<u64> {
        1..=self.absorbing_state() - 1
    }

    pub fn check_state(&self, k: u64) -> Result<()> {
        let max = self.absorbing_state();
        if (1..=max).contains(&k) {
            Ok(())
        } else {
            Err(Error::StateOutOfRange {
                state: k,
                min: 1,
                max,
            })
        }
    }

    /// Birth rate out of state `k`; zero at the absorbing state.
    pub fn rate_at(&self, k: u64) -> Result<f64> {
        self.check_state(k)?;
        if k == self.absorbing_state() {
            return Ok(0.0);
        }
        Ok(match self.kind {
            RateKind::HypergeometricMixing {
                population,
                contact_rate,
                transmission_prob,
            } => mixing_rate(population, contact_rate, transmission_prob, k),
            RateKind::YuleScaled {
                population,
                per_capita_rate,
                transmission_prob,
            } => mixing_rate(
                population,
                population as f64 * per_capita_rate,
                transmission_prob,
                k,
            ),
            RateKind::PowerLaw {
                coefficient,
                exponent,
                ..
            } => power_rate(coefficient, exponent, k),
        })
    }

    /// Rates for states `start..absorbing`, in ascending state order.
    pub fn rates_from(&self, start: u64) -> Result<Vec<f64>> {
        self.check_state(start)?;
        (start..self.absorbing_state()).map(|k| self.rate_at(k)).collect()
    }

    /// Same model with λ (or μ) and p multiplied by the given factors.
    /// Power-law models scale their coefficient by both factors.
    pub fn rescaled(&self, rate_factor: f64, prob_factor: f64) -> Result<RateModel> {
        let mut spec = self.to_spec();
        match self.kind {
            RateKind::HypergeometricMixing { .. } => {
                spec.contact_rate = spec.contact_rate.map(|v| v * rate_factor);
                spec.transmission_prob = spec.transmission_prob.map(|v| v * prob_factor);
            }
            RateKind::YuleScaled { .. } => {
                spec.per_capita_rate = spec.per_capita_rate.map(|v| v * rate_factor);
                spec.transmission_prob = spec.transmission_prob.map(|v| v * prob_factor);
            }
            RateKind::PowerLaw { .. } => {
                spec.coefficient = spec.coefficient.map(|v| v * rate_factor * prob_factor);
            }
        }
        build_rate_model(&spec)
    }

    /// Parameter record that rebuilds this model.
    pub fn to_spec(&self) -> ModelSpec {
        let spec = match self.kind {
            RateKind::HypergeometricMixing {
                population,
                contact_rate,
                transmission_prob,
            } => ModelSpec::hypergeometric(population, contact_rate, transmission_prob),
            RateKind::YuleScaled {
                population,
                per_capita_rate,
                transmission_prob,
            } => ModelSpec::yule(population, per_capita_rate, transmission_prob),
            RateKind::PowerLaw {
                coefficient,
                exponent,
                state_cap,
            } => ModelSpec::power_law(coefficient, exponent, Some(state_cap)),
        };
        spec.with_unit(self.time_unit.clone())
    }
}
