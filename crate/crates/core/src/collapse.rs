//! Leverage collapse and the adaptive escape.
//!
//! Two mechanisms push effective leverage towards one:
//!
//! * **Specification search.** Up to `m` specifications are tried in turn. The
//!   search stops at the first significant result; after each non-significant
//!   one the null is published with probability `q`, otherwise the next
//!   specification is tried. With independent attempts the publication rates are
//!   geometric sums in `s₀ = (1−α)(1−q)` and `s₁ = β(1−q)`.
//! * **Persistent confounding.** Under the causal null the test statistic is
//!   shifted by `√n·b/σ`, so the effective false-positive rate tends to one as
//!   `n` grows. Under the alternative the shift is `√n(θ₁+b)/σ`, bias aligned with
//!   the true effect.
//!
//! The adaptive schedule `αₙ = 1 − Φ(c√n)` with `0 < c < θ₁/σ` drives leverage
//! to infinity, and the required sample size grows like `(2/c²)·ln Λ_req`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_open, check_positive, OperatingPoint};
use crate::numerics::{cdf_unchecked, upper_critical};
use crate::scalar::{in_closed_unit, Real};

/// Sequential specification search with `m` attempts and null-publication probability `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RawPolicy<T>",
    bound(deserialize = "T: Real + Deserialize<'de>")
)]
pub struct SpecSearchPolicy<T> {
    m: u32,
    q: T,
}

#[derive(Deserialize)]
struct RawPolicy<T> {
    m: u32,
    q: T,
}

impl<T: Real> TryFrom<RawPolicy<T>> for SpecSearchPolicy<T> {
    type Error = Error;
    fn try_from(raw: RawPolicy<T>) -> Result<Self> {
        SpecSearchPolicy::new(raw.m, raw.q)
    }
}

impl<T: Real> SpecSearchPolicy<T> {
    pub fn new(m: u32, q: T) -> Result<Self> {
        if m == 0 {
            return Err(Error::domain(
                "number of specifications m must be at least 1",
            ));
        }
        if !in_closed_unit(q) {
            return Err(Error::domain(format!(
                "null-publication probability q must lie in [0,1], got {q}"
            )));
        }
        Ok(SpecSearchPolicy { m, q })
    }

    /// Pre-registered single analysis.
    pub fn preregistered() -> Self {
        SpecSearchPolicy { m: 1, q: T::one() }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn q(&self) -> T {
        self.q
    }
}

/// `1 + s + … + s^(m−1)` for `s ∈ [0,1]`.
fn geometric<T: Real>(s: T, m: u32) -> T {
    if m == 1 || s == T::zero() {
        T::one()
    } else if s >= T::one() {
        T::from_count(m as u64)
    } else {
        -(T::from_count(m as u64) * s.ln()).exp_m1() / (T::one() - s)
    }
}

/// Probability that a search publishes a significant result when each attempt
/// is significant with probability `rate`.
fn published_rate<T: Real>(rate: T, policy: &SpecSearchPolicy<T>) -> T {
    if policy.m == 1 {
        return rate;
    }
    let carry_on = (T::one() - rate) * (T::one() - policy.q);
    rate * geometric(carry_on, policy.m)
}

/// Publication rates of a search whose single attempts have the given rates.
///
/// Inputs may sit on the closed unit interval, which the confounded rates reach numerically.
pub fn search_rates<T: Real>(alpha: T, power: T, policy: &SpecSearchPolicy<T>) -> (T, T) {
    (published_rate(alpha, policy), published_rate(power, policy))
}

/// Probability that a significant result is published under the null.
pub fn effective_alpha<T: Real>(alpha: T, policy: &SpecSearchPolicy<T>) -> Result<T> {
    check_open("alpha", alpha)?;
    Ok(published_rate(alpha, policy))
}

/// Probability that a significant result is published under the alternative.
pub fn effective_power<T: Real>(power: T, policy: &SpecSearchPolicy<T>) -> Result<T> {
    if !(power > T::zero() && power <= T::one()) {
        return Err(Error::domain(format!(
            "power must lie in (0,1], got {power}"
        )));
    }
    Ok(published_rate(power, policy))
}

/// Factor `D(q, m)` by which the search multiplies leverage.
pub fn discrimination_loss<T: Real>(
    op: &OperatingPoint<T>,
    policy: &SpecSearchPolicy<T>,
) -> Result<T> {
    if !op.discriminates() {
        return Err(Error::domain(format!(
            "discrimination loss requires power > alpha, got power {} and alpha {}",
            op.power(),
            op.alpha()
        )));
    }
    if policy.m == 1 {
        return Ok(T::one());
    }
    let keep_going = T::one() - policy.q;
    let s0 = (T::one() - op.alpha()) * keep_going;
    let s1 = op.beta() * keep_going;
    Ok(geometric(s1, policy.m) / geometric(s0, policy.m))
}

/// Leverage of the search as a whole, `Λ·D(q, m)`.
pub fn effective_leverage<T: Real>(
    op: &OperatingPoint<T>,
    policy: &SpecSearchPolicy<T>,
) -> Result<T> {
    Ok(op.leverage() * discrimination_loss(op, policy)?)
}

/// Limit of the effective leverage as `m → ∞` at fixed `q ∈ (0,1)`.
pub fn saturation_leverage<T: Real>(op: &OperatingPoint<T>, q: T) -> Result<T> {
    check_open("q", q)?;
    if !op.discriminates() {
        return Err(Error::domain("saturation requires power > alpha"));
    }
    let keep_going = T::one() - q;
    let s0 = (T::one() - op.alpha()) * keep_going;
    let s1 = op.beta() * keep_going;
    Ok(op.leverage() * (T::one() - s0) / (T::one() - s1))
}

/// PPV from raw true- and false-positive rates; tolerates rates of exactly 0 or 1.
pub fn ppv_from_rates<T: Real>(pi: T, alpha: T, power: T) -> Result<T> {
    check_open("prior", pi)?;
    rates_ok(alpha, power)?;
    let tp = pi * power;
    let fp = (T::one() - pi) * alpha;
    if tp + fp == T::zero() {
        return Err(Error::domain(
            "no significant results are produced at these rates",
        ));
    }
    Ok(tp / (tp + fp))
}

/// `power / alpha` from raw rates.
pub fn leverage_from_rates<T: Real>(alpha: T, power: T) -> Result<T> {
    rates_ok(alpha, power)?;
    if alpha == T::zero() {
        return Err(Error::domain(
            "leverage undefined at zero false-positive rate",
        ));
    }
    Ok(power / alpha)
}

fn rates_ok<T: Real>(alpha: T, power: T) -> Result<()> {
    if in_closed_unit(alpha) && in_closed_unit(power) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "rates must lie in [0,1], got alpha {alpha}, power {power}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    OneSidedPositive,
    TwoSided,
}

/// Bias of an observational estimate as a function of sample size.
pub trait BiasPath<T> {
    fn bias_at(&self, n: u64) -> T;
    fn sigma(&self) -> T;
    fn sidedness(&self) -> Sidedness;
}

/// Constant unmeasured-confounding bias `b` with noise scale `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RawConfounding<T>",
    bound(deserialize = "T: Real + Deserialize<'de>")
)]
pub struct ConfoundingModel<T> {
    bias: T,
    sigma: T,
    sidedness: Sidedness,
}

#[derive(Deserialize)]
struct RawConfounding<T> {
    bias: T,
    sigma: T,
    #[serde(default = "one_sided")]
    sidedness: Sidedness,
}

fn one_sided() -> Sidedness {
    Sidedness::OneSidedPositive
}

impl<T: Real> TryFrom<RawConfounding<T>> for ConfoundingModel<T> {
    type Error = Error;
    fn try_from(raw: RawConfounding<T>) -> Result<Self> {
        ConfoundingModel::new(raw.bias, raw.sigma, raw.sidedness)
    }
}

impl<T: Real> ConfoundingModel<T> {
    pub fn new(bias: T, sigma: T, sidedness: Sidedness) -> Result<Self> {
        check_positive("sigma", sigma)?;
        if !bias.is_finite() {
            return Err(Error::domain(format!("bias must be finite, got {bias}")));
        }
        Ok(ConfoundingModel {
            bias,
            sigma,
            sidedness,
        })
    }

    pub fn bias(&self) -> T {
        self.bias
    }
}

impl<T: Real> BiasPath<T> for ConfoundingModel<T> {
    fn bias_at(&self, _n: u64) -> T {
        self.bias
    }
    fn sigma(&self) -> T {
        self.sigma
    }
    fn sidedness(&self) -> Sidedness {
        self.sidedness
    }
}

/// Bias that varies with `n`, e.g. partial adjustment that shrinks the confounder.
pub struct PerNBias<T, F> {
    pub sigma: T,
    pub sidedness: Sidedness,
    pub bias: F,
}

impl<T: Real, F: Fn(u64) -> T> BiasPath<T> for PerNBias<T, F> {
    fn bias_at(&self, n: u64) -> T {
        (self.bias)(n)
    }
    fn sigma(&self) -> T {
        self.sigma
    }
    fn sidedness(&self) -> Sidedness {
        self.sidedness
    }
}

/// Rejection probability of a z-test whose statistic is `N(shift, 1)`.
fn rejection_rate<T: Real>(alpha: T, shift: T, sidedness: Sidedness) -> Result<T> {
    match sidedness {
        Sidedness::OneSidedPositive => {
            let z = upper_critical(alpha)?;
            Ok(cdf_unchecked(shift - z))
        }
        Sidedness::TwoSided => {
            let z = upper_critical(alpha / T::two())?;
            Ok(cdf_unchecked(shift - z) + cdf_unchecked(-z - shift))
        }
    }
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::domain("sample size n must be at least 1"))
    } else {
        Ok(())
    }
}

/// Effective false-positive rate at sample size `n` under confounding.
pub fn obs_effective_alpha<T: Real, B: BiasPath<T>>(n: u64, alpha: T, cm: &B) -> Result<T> {
    check_n(n)?;
    check_open("alpha", alpha)?;
    let shift = T::from_count(n).sqrt() * cm.bias_at(n) / cm.sigma();
    rejection_rate(alpha, shift, cm.sidedness())
}

/// Effective power at sample size `n` for true effect `theta1` under confounding.
pub fn obs_effective_power<T: Real, B: BiasPath<T>>(
    n: u64,
    alpha: T,
    cm: &B,
    theta1: T,
) -> Result<T> {
    check_n(n)?;
    check_open("alpha", alpha)?;
    if !theta1.is_finite() {
        return Err(Error::domain("theta1 must be finite"));
    }
    let shift = T::from_count(n).sqrt() * (theta1 + cm.bias_at(n)) / cm.sigma();
    rejection_rate(alpha, shift, cm.sidedness())
}

/// PPV of observational findings at each sample size in `ns`.
pub fn obs_ppv_curve<T: Real, B: BiasPath<T>>(
    pi: T,
    alpha: T,
    cm: &B,
    theta1: T,
    ns: &[u64],
) -> Result<Vec<T>> {
    check_open("prior", pi)?;
    ns.iter()
        .map(|&n| {
            let a = obs_effective_alpha(n, alpha, cm)?;
            let p = obs_effective_power(n, alpha, cm, theta1)?;
            ppv_from_rates(pi, a, p)
        })
        .collect()
}

/// Leverage when confounded attempts are fed through a specification search.
pub fn double_collapse_leverage<T: Real, B: BiasPath<T>>(
    n: u64,
    alpha: T,
    policy: &SpecSearchPolicy<T>,
    cm: &B,
    theta1: T,
) -> Result<T> {
    let a = obs_effective_alpha(n, alpha, cm)?;
    let p = obs_effective_power(n, alpha, cm, theta1)?;
    let (a_eff, p_eff) = search_rates(a, p, policy);
    leverage_from_rates(a_eff, p_eff)
}

/// Threshold slope `c` and standardized effect `θ₁/σ` of an adaptive design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RawSchedule<T>",
    bound(deserialize = "T: Real + Deserialize<'de>")
)]
pub struct AdaptiveSchedule<T> {
    c: T,
    theta1: T,
    sigma: T,
}

#[derive(Deserialize)]
struct RawSchedule<T> {
    c: T,
    theta1: T,
    sigma: T,
}

impl<T: Real> TryFrom<RawSchedule<T>> for AdaptiveSchedule<T> {
    type Error = Error;
    fn try_from(raw: RawSchedule<T>) -> Result<Self> {
        AdaptiveSchedule::new(raw.c, raw.theta1, raw.sigma)
    }
}

impl<T: Real> AdaptiveSchedule<T> {
    pub fn new(c: T, theta1: T, sigma: T) -> Result<Self> {
        check_positive("c", c)?;
        check_positive("theta1", theta1)?;
        check_positive("sigma", sigma)?;
        if c >= theta1 / sigma {
            return Err(Error::domain(format!(
                "threshold slope c = {c} must be below the standardized effect {}",
                theta1 / sigma
            )));
        }
        Ok(AdaptiveSchedule { c, theta1, sigma })
    }

    pub fn c(&self) -> T {
        self.c
    }

    pub fn effect(&self) -> T {
        self.theta1 / self.sigma
    }

    /// `(αₙ, powerₙ)` as raw rates; `αₙ` may underflow to zero for large `n`.
    fn rates(&self, n: u64) -> (T, T) {
        let root = T::from_count(n).sqrt();
        let alpha = cdf_unchecked(-self.c * root);
        let power = cdf_unchecked((self.effect() - self.c) * root);
        (alpha, power)
    }
}

/// Level and power of the adaptive design at sample size `n`.
pub fn adaptive_operating_point<T: Real>(
    n: u64,
    sched: &AdaptiveSchedule<T>,
) -> Result<OperatingPoint<T>> {
    check_n(n)?;
    let (alpha, power) = sched.rates(n);
    if alpha == T::zero() {
        return Err(Error::domain(format!("alpha underflows at n = {n}")));
    }
    OperatingPoint::new(alpha, power)
}

/// Asymptotic sample size `(2/c²)·ln Λ_req` that seeds [`adaptive_required_n`].
pub fn adaptive_seed_n<T: Real>(lambda_req: T, sched: &AdaptiveSchedule<T>) -> Result<T> {
    check_required(lambda_req)?;
    Ok(T::two() / (sched.c * sched.c) * lambda_req.ln())
}

fn check_required<T: Real>(lambda_req: T) -> Result<()> {
    if lambda_req > T::one() && lambda_req.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "required leverage must exceed 1, got {lambda_req}"
        )))
    }
}

const MAX_ADAPTIVE_N: u64 = 1 << 32;

/// Smallest `n` whose adaptive leverage reaches `lambda_req`.
pub fn adaptive_required_n<T: Real>(lambda_req: T, sched: &AdaptiveSchedule<T>) -> Result<u64> {
    let seed = adaptive_seed_n(lambda_req, sched)?;
    // leverage is increasing in n: alpha falls and power rises
    let reaches = |n: u64| {
        let (a, p) = sched.rates(n);
        a == T::zero() || p / a >= lambda_req
    };
    let mut n = seed.floor().to_u64().unwrap_or(1).clamp(1, MAX_ADAPTIVE_N);
    if reaches(n) {
        while n > 1 && reaches(n - 1) {
            n -= 1;
        }
    } else {
        while !reaches(n) {
            n += 1;
            if n > MAX_ADAPTIVE_N {
                return Err(Error::NonConvergence {
                    what: "adaptive sample-size search exceeded its range".into(),
                    estimate: seed.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
    }
    Ok(n)
}
