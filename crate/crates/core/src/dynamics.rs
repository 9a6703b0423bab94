//! Field lifetime under a decaying prior, and generational reliability dynamics.
//!
//! Follow-up hypotheses inherit their prior from the parent finding:
//! `π_{k+1} = PPV_k · π_c`. The progress ratio `π_c·Λ` decides the long-run
//! outcome: at or below one the programme degenerates to zero reliability,
//! above one it converges to `(π_cΛ − 1) / (π_c(Λ − 1))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, check_open, check_positive, OperatingPoint};
use crate::scalar::{in_closed_unit, Real};

/// Exponentially decaying field prior. `decay_rate` is the combined
/// exhaustion-plus-speculation rate per year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RawDecay<T>",
    bound(deserialize = "T: Real + Deserialize<'de>")
)]
pub struct FieldDecay<T> {
    pi0: T,
    decay_rate: T,
}

#[derive(Deserialize)]
struct RawDecay<T> {
    pi0: T,
    decay_rate: T,
}

impl<T: Real> TryFrom<RawDecay<T>> for FieldDecay<T> {
    type Error = Error;
    fn try_from(raw: RawDecay<T>) -> Result<Self> {
        FieldDecay::new(raw.pi0, raw.decay_rate)
    }
}

impl<T: Real> FieldDecay<T> {
    pub fn new(pi0: T, decay_rate: T) -> Result<Self> {
        check_open("initial prior", pi0)?;
        check_positive("decay rate", decay_rate)?;
        Ok(FieldDecay { pi0, decay_rate })
    }

    /// Separate exhaustion and speculation rates; only their sum matters.
    pub fn from_rates(pi0: T, exhaustion: T, speculation: T) -> Result<Self> {
        if exhaustion < T::zero() || speculation < T::zero() {
            return Err(Error::domain("decay components must be non-negative"));
        }
        Self::new(pi0, exhaustion + speculation)
    }

    pub fn pi0(&self) -> T {
        self.pi0
    }

    pub fn decay_rate(&self) -> T {
        self.decay_rate
    }
}

pub fn prior_at<T: Real>(fd: &FieldDecay<T>, t: T) -> Result<T> {
    if !(t >= T::zero() && t.is_finite()) {
        return Err(Error::domain(format!("time must be non-negative, got {t}")));
    }
    Ok(fd.pi0 * (-fd.decay_rate * t).exp())
}

/// Years until the prior falls to the critical prior; zero if it already has.
pub fn field_lifetime<T: Real>(fd: &FieldDecay<T>, tau: T, op: &OperatingPoint<T>) -> Result<T> {
    let crit = model::pi_crit(tau, op)?;
    if fd.pi0 <= crit {
        return Ok(T::zero());
    }
    Ok((fd.pi0 / crit).ln() / fd.decay_rate)
}

/// Follow-up prior `π_c`, leverage and generation-0 reliability of a research programme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RawState<T>",
    bound(deserialize = "T: Real + Deserialize<'de>")
)]
pub struct ProgrammeState<T> {
    pi_c: T,
    lambda: T,
    ppv0: T,
}

#[derive(Deserialize)]
struct RawState<T> {
    pi_c: T,
    lambda: T,
    ppv0: T,
}

impl<T: Real> TryFrom<RawState<T>> for ProgrammeState<T> {
    type Error = Error;
    fn try_from(raw: RawState<T>) -> Result<Self> {
        ProgrammeState::new(raw.pi_c, raw.lambda, raw.ppv0)
    }
}

impl<T: Real> ProgrammeState<T> {
    pub fn new(pi_c: T, lambda: T, ppv0: T) -> Result<Self> {
        check_open("follow-up prior pi_c", pi_c)?;
        check_positive("leverage", lambda)?;
        if !(ppv0 > T::zero() && ppv0 <= T::one()) {
            return Err(Error::domain(format!("ppv0 must lie in (0,1], got {ppv0}")));
        }
        Ok(ProgrammeState { pi_c, lambda, ppv0 })
    }

    /// Seeds generation 0 with the PPV of a study at prior `pi0`.
    pub fn seeded(pi_c: T, lambda: T, pi0: T) -> Result<Self> {
        Self::new(pi_c, lambda, model::ppv(pi0, lambda)?)
    }

    pub fn pi_c(&self) -> T {
        self.pi_c
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn ppv0(&self) -> T {
        self.ppv0
    }

    pub fn progress_ratio(&self) -> T {
        self.pi_c * self.lambda
    }
}

/// One generational update of PPV.
pub fn generational_step<T: Real>(state: &ProgrammeState<T>, ppv_k: T) -> Result<T> {
    if !in_closed_unit(ppv_k) {
        return Err(Error::domain(format!("PPV must lie in [0,1], got {ppv_k}")));
    }
    Ok(step(state.pi_c, state.lambda, ppv_k))
}

#[inline]
fn step<T: Real>(pi_c: T, lambda: T, x: T) -> T {
    let prior = x * pi_c;
    let num = prior * lambda;
    num / (num + T::one() - prior)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationRow<T> {
    pub generation: u32,
    pub prior: T,
    pub ppv: T,
    /// False positives per true positive.
    pub waste: T,
}

/// Rows `0..=k_max`. Row 0 carries the prior that yields `ppv0` at the programme's leverage.
pub fn generational_trajectory<T: Real>(
    state: &ProgrammeState<T>,
    k_max: u32,
) -> Vec<GenerationRow<T>> {
    let lambda = state.lambda;
    let ppv0 = state.ppv0;
    // invert PPV = πΛ/(πΛ + 1 − π) for the generation-0 prior
    let prior0 = ppv0 / (ppv0 + lambda * (T::one() - ppv0));
    let mut rows = Vec::with_capacity(k_max as usize + 1);
    rows.push(GenerationRow {
        generation: 0,
        prior: prior0,
        ppv: ppv0,
        waste: waste(prior0, lambda),
    });
    let mut x = ppv0;
    for k in 1..=k_max {
        let prior = x * state.pi_c;
        x = step(state.pi_c, lambda, x);
        rows.push(GenerationRow {
            generation: k,
            prior,
            ppv: x,
            waste: waste(prior, lambda),
        });
    }
    rows
}

/// `(1 − π)/(πΛ)`, the cost of discovery written in terms of leverage.
fn waste<T: Real>(prior: T, lambda: T) -> T {
    (T::one() - prior) / (prior * lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum FixedPoint<T> {
    Positive(T),
    Collapse,
}

impl<T: Real> FixedPoint<T> {
    pub fn value(self) -> T {
        match self {
            FixedPoint::Positive(x) => x,
            FixedPoint::Collapse => T::zero(),
        }
    }
}

/// Attracting fixed point of the generational map.
pub fn fixed_point<T: Real>(state: &ProgrammeState<T>) -> FixedPoint<T> {
    let r = state.progress_ratio();
    if r <= T::one() {
        FixedPoint::Collapse
    } else {
        FixedPoint::Positive((r - T::one()) / (state.pi_c * (state.lambda - T::one())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProgrammeClass {
    Progressive,
    Degenerative,
}

/// Degenerative exactly when the progress ratio is at most one.
pub fn classify_programme<T: Real>(state: &ProgrammeState<T>) -> ProgrammeClass {
    if state.progress_ratio() <= T::one() {
        ProgrammeClass::Degenerative
    } else {
        ProgrammeClass::Progressive
    }
}
