//! Replication bridge, all-significant pipelines and the replication sensitivity grid.
//!
//! Pipelines assume the `k` studies are independent conditional on the truth of
//! the hypothesis. Correlated replications and selective publication of
//! successful pipelines are not modelled.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, check_open, OperatingPoint};
use crate::scalar::{in_closed_unit, Real};

/// Level and power of a replication attempt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RawDesign<T>",
    bound(deserialize = "T: Real + Deserialize<'de>")
)]
pub struct ReplicationDesign<T> {
    alpha_r: T,
    power_r: T,
}

#[derive(Deserialize)]
struct RawDesign<T> {
    alpha_r: T,
    power_r: T,
}

impl<T: Real> TryFrom<RawDesign<T>> for ReplicationDesign<T> {
    type Error = Error;
    fn try_from(raw: RawDesign<T>) -> Result<Self> {
        ReplicationDesign::new(raw.alpha_r, raw.power_r)
    }
}

impl<T: Real> ReplicationDesign<T> {
    pub fn new(alpha_r: T, power_r: T) -> Result<Self> {
        check_open("alpha_r", alpha_r)?;
        if !(power_r > T::zero() && power_r <= T::one()) {
            return Err(Error::domain(format!(
                "power_r must lie in (0,1], got {power_r}"
            )));
        }
        Ok(ReplicationDesign { alpha_r, power_r })
    }

    pub fn alpha_r(&self) -> T {
        self.alpha_r
    }

    pub fn power_r(&self) -> T {
        self.power_r
    }

    pub fn discriminating(&self) -> bool {
        self.power_r > self.alpha_r
    }
}

/// Depth of an all-significant pipeline of identical studies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct PipelinePlan<T> {
    pub depth: u32,
    pub study: OperatingPoint<T>,
}

impl<T: Real> PipelinePlan<T> {
    pub fn new(depth: u32, study: OperatingPoint<T>) -> Result<Self> {
        if depth == 0 {
            return Err(Error::domain("pipeline depth must be at least 1"));
        }
        Ok(PipelinePlan { depth, study })
    }

    pub fn leverage(&self) -> T {
        pipeline_leverage(&self.study, self.depth)
    }
}

/// Probability that a replication of a significant original is significant.
pub fn bridge_forward<T: Real>(ppv_o: T, design: &ReplicationDesign<T>) -> Result<T> {
    if !in_closed_unit(ppv_o) {
        return Err(Error::domain(format!(
            "original PPV must lie in [0,1], got {ppv_o}"
        )));
    }
    Ok(ppv_o * design.power_r + (T::one() - ppv_o) * design.alpha_r)
}

/// PPV of the originals implied by an observed replication rate.
///
/// Rates outside `[alpha_r, power_r]` are reported as [`Error::OutOfModel`]
/// carrying the unclamped inversion.
pub fn bridge_invert<T: Real>(rate: T, design: &ReplicationDesign<T>) -> Result<T> {
    if !design.discriminating() {
        return Err(Error::NonDiscriminating {
            alpha: design.alpha_r.to_f64().unwrap_or(f64::NAN),
            power: design.power_r.to_f64().unwrap_or(f64::NAN),
        });
    }
    if !in_closed_unit(rate) {
        return Err(Error::domain(format!(
            "replication rate must lie in [0,1], got {rate}"
        )));
    }
    let implied = (rate - design.alpha_r) / (design.power_r - design.alpha_r);
    // a few ulps of slack so forward-then-invert never trips on rounding
    let slack = T::lit(4.0) * T::epsilon();
    if implied < -slack || implied > T::one() + slack {
        return Err(Error::OutOfModel {
            what: format!(
                "replication rate {rate} outside [{}, {}]",
                design.alpha_r, design.power_r
            ),
            value: implied.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(implied)
}

/// Combined leverage `Λ^k` of `k` independent all-significant studies.
pub fn pipeline_leverage<T: Real>(op: &OperatingPoint<T>, k: u32) -> T {
    let k = i32::try_from(k).unwrap_or(i32::MAX);
    op.leverage().powi(k)
}

/// PPV of a claim accepted only when all `k` studies are significant.
pub fn pipeline_ppv<T: Real>(pi: T, op: &OperatingPoint<T>, k: u32) -> Result<T> {
    if k == 0 {
        return Err(Error::domain("pipeline depth must be at least 1"));
    }
    check_open("prior", pi)?;
    // Λ^k overflows long before PPV stops moving; work in log-odds
    let log_odds = (pi / (T::one() - pi)).ln() + T::from_count(k as u64) * op.leverage().ln();
    Ok(logistic(log_odds))
}

fn logistic<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// Smallest `k` with `pipeline_ppv(pi, op, k) ≥ tau`.
pub fn min_pipeline_depth<T: Real>(tau: T, pi: T, op: &OperatingPoint<T>) -> Result<u32> {
    let required = model::lambda_required(tau, pi)?;
    let lambda = op.leverage();
    if lambda <= T::one() {
        return Err(Error::NoFiniteDepth {
            leverage: lambda.to_f64().unwrap_or(f64::NAN),
        });
    }
    let ratio = required.ln() / lambda.ln();
    let mut k = if ratio <= T::one() {
        1
    } else {
        ratio.ceil().to_u32().unwrap_or(u32::MAX)
    };
    // the ceiling of a rounded ratio can land one off an exact boundary
    while k > 1 && pipeline_ppv(pi, op, k - 1)? >= tau {
        k -= 1;
    }
    while pipeline_ppv(pi, op, k)? < tau {
        k = k
            .checked_add(1)
            .ok_or_else(|| Error::domain("pipeline depth overflow"))?;
    }
    Ok(k)
}

/// Replication rates over a grid of original powers (rows) and priors (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct SensitivityGrid<T> {
    pub priors: Vec<T>,
    pub powers: Vec<T>,
    pub alpha: T,
    pub design: ReplicationDesign<T>,
    /// `rates[i][j]` is the rate at `powers[i]`, `priors[j]`.
    pub rates: Vec<Vec<T>>,
}

impl<T: Real> SensitivityGrid<T> {
    pub fn cell(&self, power: T, prior: T) -> Option<T> {
        let i = self.powers.iter().position(|&p| p == power)?;
        let j = self.priors.iter().position(|&p| p == prior)?;
        Some(self.rates[i][j])
    }
}

pub fn sensitivity_grid<T: Real>(
    priors: &[T],
    powers: &[T],
    alpha: T,
    design: &ReplicationDesign<T>,
) -> Result<SensitivityGrid<T>> {
    let rates = powers
        .iter()
        .map(|&power| {
            let op = OperatingPoint::new(alpha, power)?;
            priors
                .iter()
                .map(|&pi| bridge_forward(model::ppv(pi, op.leverage())?, design))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SensitivityGrid {
        priors: priors.to_vec(),
        powers: powers.to_vec(),
        alpha,
        design: *design,
        rates,
    })
}
