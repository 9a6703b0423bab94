//! Static reliability identities for a binary significance decision.
//!
//! A test at level `alpha` with power `power` multiplies the prior odds of a
//! hypothesis by its leverage `power / alpha` when it comes out significant.
//! Everything else here (ceiling, infeasibility index, critical priors, cost of
//! discovery, NPV, the threshold calibration) is a rearrangement of that update.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::replication;
use crate::scalar::{in_open_unit, Real};

pub(crate) fn check_open<T: Real>(name: &str, x: T) -> Result<T> {
    if in_open_unit(x) {
        Ok(x)
    } else {
        Err(Error::domain(format!("{name} must lie in (0,1), got {x}")))
    }
}

pub(crate) fn check_positive<T: Real>(name: &str, x: T) -> Result<T> {
    if x > T::zero() && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::domain(format!(
            "{name} must be positive and finite, got {x}"
        )))
    }
}

/// Nominal error profile of a significance test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RawOperatingPoint<T>",
    bound(deserialize = "T: Real + Deserialize<'de>")
)]
pub struct OperatingPoint<T> {
    alpha: T,
    power: T,
}

#[derive(Deserialize)]
struct RawOperatingPoint<T> {
    alpha: T,
    power: T,
}

impl<T: Real> TryFrom<RawOperatingPoint<T>> for OperatingPoint<T> {
    type Error = Error;
    fn try_from(raw: RawOperatingPoint<T>) -> Result<Self> {
        OperatingPoint::new(raw.alpha, raw.power)
    }
}

impl<T: Real> OperatingPoint<T> {
    /// `alpha ∈ (0,1)`, `power ∈ (0,1]`.
    pub fn new(alpha: T, power: T) -> Result<Self> {
        check_open("alpha", alpha)?;
        if !(power > T::zero() && power <= T::one()) {
            return Err(Error::domain(format!(
                "power must lie in (0,1], got {power}"
            )));
        }
        Ok(OperatingPoint { alpha, power })
    }

    #[inline]
    pub fn alpha(&self) -> T {
        self.alpha
    }

    #[inline]
    pub fn power(&self) -> T {
        self.power
    }

    /// Type II error rate `1 − power`.
    #[inline]
    pub fn beta(&self) -> T {
        T::one() - self.power
    }

    #[inline]
    pub fn leverage(&self) -> T {
        leverage(self)
    }

    /// Power exceeds the false-positive rate.
    pub fn discriminates(&self) -> bool {
        self.power > self.alpha
    }
}

/// Field-level inputs: the prior of tested hypotheses and the reliability target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RawStudyContext<T>",
    bound(deserialize = "T: Real + Deserialize<'de>")
)]
pub struct StudyContext<T> {
    prior: T,
    target: T,
}

#[derive(Deserialize)]
struct RawStudyContext<T> {
    prior: T,
    target: T,
}

impl<T: Real> TryFrom<RawStudyContext<T>> for StudyContext<T> {
    type Error = Error;
    fn try_from(raw: RawStudyContext<T>) -> Result<Self> {
        StudyContext::new(raw.prior, raw.target)
    }
}

impl<T: Real> StudyContext<T> {
    pub fn new(prior: T, target: T) -> Result<Self> {
        check_open("prior", prior)?;
        check_open("target", target)?;
        Ok(StudyContext { prior, target })
    }

    #[inline]
    pub fn prior(&self) -> T {
        self.prior
    }

    #[inline]
    pub fn target(&self) -> T {
        self.target
    }
}

/// Regime of a (prior, leverage) pair at a reliability target.
///
/// When both conditions hold, `MajorityFalse` wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Feasible,
    Infeasible,
    MajorityFalse,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Feasible => "feasible",
            Regime::Infeasible => "infeasible",
            Regime::MajorityFalse => "majority_false",
        }
    }

    /// Human label.
    pub fn describe(self) -> &'static str {
        match self {
            Regime::Feasible => "feasible",
            Regime::Infeasible => "infeasible",
            Regime::MajorityFalse => "majority-false",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Smallest all-significant pipeline reaching the target, if one exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PipelineDepth {
    Finite(u32),
    /// Leverage at or below one: no depth reaches the target.
    Unreachable,
}

impl PipelineDepth {
    pub const UNREACHABLE_MARKER: &'static str = "leverage<=1";

    pub fn finite(self) -> Option<u32> {
        match self {
            PipelineDepth::Finite(k) => Some(k),
            PipelineDepth::Unreachable => None,
        }
    }
}

impl Serialize for PipelineDepth {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PipelineDepth::Finite(k) => s.serialize_u32(*k),
            PipelineDepth::Unreachable => s.serialize_str(Self::UNREACHABLE_MARKER),
        }
    }
}

impl<'de> Deserialize<'de> for PipelineDepth {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            K(u32),
            Marker(String),
        }
        match Repr::deserialize(d)? {
            Repr::K(k) if k >= 1 => Ok(PipelineDepth::Finite(k)),
            Repr::Marker(m) if m == Self::UNREACHABLE_MARKER => Ok(PipelineDepth::Unreachable),
            _ => Err(serde::de::Error::custom(
                "expected positive depth or \"leverage<=1\"",
            )),
        }
    }
}

/// Design-stage report for one study context and operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnosis<T> {
    pub leverage: T,
    pub ppv: T,
    pub log_odds_posterior: T,
    pub ceiling: T,
    pub lambda_required: T,
    pub psi: T,
    pub pi_crit: T,
    pub pi_half: T,
    pub regime: Regime,
    pub waste_ratio: T,
    pub npv: T,
    pub misinfo_floor: T,
    pub alpha_max: T,
    pub min_pipeline_depth: PipelineDepth,
}

/// Bayes factor of a significant result, `power / alpha`.
pub fn leverage<T: Real>(op: &OperatingPoint<T>) -> T {
    op.power / op.alpha
}

/// Probability that a significant finding is true, `πΛ / (πΛ + 1 − π)`.
pub fn ppv<T: Real>(pi: T, lambda: T) -> Result<T> {
    check_open("prior", pi)?;
    check_positive("leverage", lambda)?;
    Ok(ppv_unchecked(pi, lambda))
}

#[inline]
pub(crate) fn ppv_unchecked<T: Real>(pi: T, lambda: T) -> T {
    let num = pi * lambda;
    num / (num + (T::one() - pi))
}

/// Posterior log-odds after a significant result.
pub fn posterior_log_odds<T: Real>(pi: T, lambda: T) -> Result<T> {
    check_open("prior", pi)?;
    check_positive("leverage", lambda)?;
    Ok((pi / (T::one() - pi)).ln() + lambda.ln())
}

/// Leverage needed for PPV to reach `tau` at prior `pi`.
pub fn lambda_required<T: Real>(tau: T, pi: T) -> Result<T> {
    check_open("target", tau)?;
    check_open("prior", pi)?;
    Ok(tau / (T::one() - tau) * ((T::one() - pi) / pi))
}

/// Supremum of PPV over power at fixed `alpha`.
pub fn ppv_ceiling<T: Real>(pi: T, alpha: T) -> Result<T> {
    check_open("prior", pi)?;
    check_open("alpha", alpha)?;
    Ok(pi / (pi + alpha * (T::one() - pi)))
}

/// Infeasibility index: required over available leverage. Above one the target is unreachable.
pub fn psi<T: Real>(tau: T, pi: T, op: &OperatingPoint<T>) -> Result<T> {
    Ok(lambda_required(tau, pi)? / op.leverage())
}

/// Lowest prior at which `tau` is reachable with a single study.
pub fn pi_crit<T: Real>(tau: T, op: &OperatingPoint<T>) -> Result<T> {
    check_open("target", tau)?;
    let ta = tau * op.alpha;
    Ok(ta / ((T::one() - tau) * op.power + ta))
}

/// Prior below which most significant findings are false, `1 / (1 + Λ)`.
pub fn pi_half<T: Real>(op: &OperatingPoint<T>) -> T {
    pi_half_for_leverage(op.leverage())
}

#[inline]
pub(crate) fn pi_half_for_leverage<T: Real>(lambda: T) -> T {
    T::one() / (T::one() + lambda)
}

/// Long-run false positives per true positive.
pub fn cost_of_discovery<T: Real>(pi: T, op: &OperatingPoint<T>) -> Result<T> {
    check_open("prior", pi)?;
    Ok((T::one() - pi) * op.alpha / (pi * op.power))
}

/// Probability that a non-significant result corresponds to a false hypothesis.
pub fn npv<T: Real>(pi: T, op: &OperatingPoint<T>) -> Result<T> {
    check_open("prior", pi)?;
    let true_neg = (T::one() - pi) * (T::one() - op.alpha);
    Ok(true_neg / (true_neg + pi * op.beta()))
}

/// Share of significant findings that are false even at unlimited power.
pub fn misinfo_floor<T: Real>(pi: T, alpha: T) -> Result<T> {
    check_open("prior", pi)?;
    check_open("alpha", alpha)?;
    let false_pos = alpha * (T::one() - pi);
    Ok(false_pos / (pi + false_pos))
}

/// Largest significance level meeting `tau` at prior `pi` and the given power.
///
/// Values at or above one mean every level works; the result is capped at one.
pub fn alpha_max<T: Real>(pi: T, power: T, tau: T) -> Result<T> {
    check_open("prior", pi)?;
    check_open("target", tau)?;
    if !(power > T::zero() && power <= T::one()) {
        return Err(Error::domain(format!(
            "power must lie in (0,1], got {power}"
        )));
    }
    let a = power * (T::one() - tau) * pi / (tau * (T::one() - pi));
    Ok(a.min(T::one()))
}

/// Regime classification from PPV and Ψ.
pub fn classify<T: Real>(ppv: T, psi: T) -> Regime {
    if ppv < T::half() {
        Regime::MajorityFalse
    } else if psi > T::one() {
        Regime::Infeasible
    } else {
        Regime::Feasible
    }
}

/// Full design-stage report.
pub fn diagnose<T: Real>(ctx: &StudyContext<T>, op: &OperatingPoint<T>) -> Result<Diagnosis<T>> {
    let (pi, tau) = (ctx.prior, ctx.target);
    let lambda = op.leverage();
    let ppv = ppv(pi, lambda)?;
    let psi = psi(tau, pi, op)?;
    let min_pipeline_depth = match replication::min_pipeline_depth(tau, pi, op) {
        Ok(k) => PipelineDepth::Finite(k),
        Err(Error::NoFiniteDepth { .. }) => PipelineDepth::Unreachable,
        Err(e) => return Err(e),
    };
    Ok(Diagnosis {
        leverage: lambda,
        ppv,
        log_odds_posterior: posterior_log_odds(pi, lambda)?,
        ceiling: ppv_ceiling(pi, op.alpha)?,
        lambda_required: lambda_required(tau, pi)?,
        psi,
        pi_crit: pi_crit(tau, op)?,
        pi_half: pi_half(op),
        regime: classify(ppv, psi),
        waste_ratio: cost_of_discovery(pi, op)?,
        npv: npv(pi, op)?,
        misinfo_floor: misinfo_floor(pi, op.alpha)?,
        alpha_max: alpha_max(pi, op.power, tau)?,
        min_pipeline_depth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn op(alpha: f64, power: f64) -> OperatingPoint<f64> {
        OperatingPoint::new(alpha, power).unwrap()
    }

    #[test]
    fn leverage_examples() {
        assert_abs_diff_eq!(leverage(&op(0.05, 0.80)), 16.0, epsilon = 1e-12);
        assert_abs_diff_eq!(leverage(&op(0.05, 0.35)), 7.0, epsilon = 1e-12);
        assert_eq!(leverage(&op(0.05, 0.05)), 1.0);
    }

    #[test]
    fn operating_point_bounds() {
        assert!(OperatingPoint::new(0.0, 0.5).is_err());
        assert!(OperatingPoint::new(1.0, 0.5).is_err());
        assert!(OperatingPoint::new(0.05, 0.0).is_err());
        assert!(OperatingPoint::new(0.05, 1.0001).is_err());
        assert!(OperatingPoint::new(0.05, 1.0).is_ok());
        assert!(OperatingPoint::new(f64::NAN, 0.5).is_err());
        assert!(StudyContext::new(0.0, 0.95).is_err());
        assert!(StudyContext::new(0.1, 1.0).is_err());
    }

    #[test]
    fn operating_point_deserialize_validates() {
        let ok: OperatingPoint<f64> =
            serde_json::from_str(r#"{"alpha":0.05,"power":0.8}"#).unwrap();
        assert_eq!(ok, op(0.05, 0.8));
        let bad = serde_json::from_str::<OperatingPoint<f64>>(r#"{"alpha":0.0,"power":0.8}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn ppv_examples() {
        assert_abs_diff_eq!(ppv(0.10, 7.0).unwrap(), 0.4375, epsilon = 1e-12);
        assert_abs_diff_eq!(ppv(0.37, 1.0).unwrap(), 0.37, epsilon = 1e-15);
        assert_abs_diff_eq!(ppv(0.10, 16.0).unwrap(), 0.64, epsilon = 1e-12);
        assert!(ppv(0.0, 2.0).is_err());
        assert!(ppv(0.5, 0.0).is_err());
        assert!(ppv(0.5, f64::INFINITY).is_err());
    }

    #[test]
    fn log_odds_examples() {
        assert_eq!(posterior_log_odds(0.5, 1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(
            posterior_log_odds(0.10, 7.0).unwrap(),
            (7.0f64 / 9.0).ln(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            posterior_log_odds(0.10, 7.0).unwrap(),
            -0.2513,
            epsilon = 1e-4
        );
        assert_abs_diff_eq!(
            posterior_log_odds(0.10, 16.0).unwrap(),
            0.5754,
            epsilon = 1e-4
        );
        // logistic map of the log odds recovers PPV
        let lo: f64 = posterior_log_odds(0.10, 7.0).unwrap();
        assert_abs_diff_eq!(1.0 / (1.0 + (-lo).exp()), 0.4375, epsilon = 1e-12);
    }

    #[test]
    fn lambda_required_examples() {
        assert_abs_diff_eq!(lambda_required(0.95, 0.10).unwrap(), 171.0, epsilon = 1e-9);
        assert_abs_diff_eq!(lambda_required(0.95, 0.01).unwrap(), 1881.0, epsilon = 1e-8);
        assert_abs_diff_eq!(lambda_required(0.5, 0.5).unwrap(), 1.0, epsilon = 1e-15);
        assert!(lambda_required(1.0, 0.5).is_err());
    }

    #[test]
    fn ceiling_examples() {
        assert_abs_diff_eq!(
            ppv_ceiling(0.10, 0.05).unwrap(),
            0.1 / 0.145,
            epsilon = 1e-15
        );
        // printed as 68.9%, truncated rather than rounded
        assert_abs_diff_eq!(ppv_ceiling(0.10, 0.05).unwrap(), 0.689, epsilon = 1e-3);
        assert_abs_diff_eq!(ppv_ceiling(0.50, 0.05).unwrap(), 0.952, epsilon = 5e-4);
        assert_abs_diff_eq!(ppv_ceiling(0.01, 0.05).unwrap(), 0.168, epsilon = 5e-4);
        assert_eq!(
            ppv_ceiling(0.3, 0.05).unwrap(),
            ppv(0.3, 1.0 / 0.05).unwrap()
        );
    }

    #[test]
    fn psi_examples() {
        assert_abs_diff_eq!(
            psi(0.95, 0.10, &op(0.05, 0.35)).unwrap(),
            24.4,
            epsilon = 0.05
        );
        assert_abs_diff_eq!(
            psi(0.95, 0.30, &op(0.05, 0.80)).unwrap(),
            2.77,
            epsilon = 0.005
        );
        let o = op(0.01, 0.6);
        let crit = pi_crit(0.95, &o).unwrap();
        assert_abs_diff_eq!(psi(0.95, crit, &o).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn pi_crit_examples() {
        assert_abs_diff_eq!(
            pi_crit(0.95, &op(0.05, 0.80)).unwrap(),
            0.543,
            epsilon = 5e-4
        );
        assert_abs_diff_eq!(
            pi_crit(0.95, &op(0.005, 0.80)).unwrap(),
            0.106,
            epsilon = 5e-4
        );
        assert_abs_diff_eq!(
            pi_crit(0.95, &op(5e-8, 0.80)).unwrap(),
            1.2e-6,
            epsilon = 5e-8
        );
    }

    #[test]
    fn pi_half_examples() {
        assert_abs_diff_eq!(pi_half(&op(0.05, 0.80)), 1.0 / 17.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pi_half(&op(0.05, 0.35)), 0.125, epsilon = 1e-12);
        assert_eq!(pi_half(&op(0.2, 0.2)), 0.5);
    }

    #[test]
    fn cost_of_discovery_examples() {
        assert_abs_diff_eq!(
            cost_of_discovery(0.02, &op(0.05, 0.50)).unwrap(),
            4.9,
            epsilon = 0.05
        );
        assert_abs_diff_eq!(
            cost_of_discovery(0.10, &op(0.05, 0.35)).unwrap(),
            1.29,
            epsilon = 0.005
        );
        assert_abs_diff_eq!(
            cost_of_discovery(0.30, &op(0.05, 0.80)).unwrap(),
            0.146,
            epsilon = 5e-4
        );
    }

    #[test]
    fn npv_examples() {
        assert_abs_diff_eq!(npv(0.10, &op(0.05, 0.35)).unwrap(), 0.929, epsilon = 5e-4);
        assert_abs_diff_eq!(npv(0.5, &op(0.05, 0.95)).unwrap(), 0.95, epsilon = 1e-12);
        assert_abs_diff_eq!(npv(0.001, &op(0.05, 0.8)).unwrap(), 0.99979, epsilon = 5e-6);
    }

    #[test]
    fn misinfo_floor_examples() {
        assert_abs_diff_eq!(
            misinfo_floor(0.10, 0.05).unwrap(),
            0.045 / 0.145,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(misinfo_floor(0.10, 0.05).unwrap(), 0.311, epsilon = 1e-3);
        assert_abs_diff_eq!(misinfo_floor(0.5, 0.05).unwrap(), 0.048, epsilon = 5e-4);
        assert!(misinfo_floor(0.3, 1e-12).unwrap() < 1e-11);
    }

    #[test]
    fn alpha_max_examples() {
        assert_abs_diff_eq!(alpha_max(0.10, 0.80, 0.95).unwrap(), 0.0047, epsilon = 5e-5);
        assert_eq!(alpha_max(0.5, 1.0, 0.5).unwrap(), 1.0);
        assert_abs_diff_eq!(
            alpha_max(0.05, 0.50, 0.95).unwrap(),
            0.5 * 0.05 * 0.05 / (0.95 * 0.95),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            alpha_max(0.05, 0.50, 0.95).unwrap(),
            0.00138,
            epsilon = 1e-5
        );
    }

    #[test]
    fn diagnose_examples() {
        let d = diagnose(&StudyContext::new(0.05, 0.95).unwrap(), &op(0.05, 0.50)).unwrap();
        assert_abs_diff_eq!(d.leverage, 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.ppv, 0.34, epsilon = 0.005);
        assert_abs_diff_eq!(d.psi, 36.0, epsilon = 0.5);
        assert_abs_diff_eq!(d.ceiling, 0.51, epsilon = 0.005);
        assert_eq!(d.regime, Regime::MajorityFalse);

        let d = diagnose(&StudyContext::new(0.10, 0.95).unwrap(), &op(0.05, 0.35)).unwrap();
        assert_abs_diff_eq!(d.ppv, 0.44, epsilon = 0.005);
        assert_abs_diff_eq!(d.ceiling, 0.689, epsilon = 1e-3);
        assert_eq!(d.regime, Regime::MajorityFalse);

        let d = diagnose(&StudyContext::new(1e-5, 0.95).unwrap(), &op(5e-8, 0.80)).unwrap();
        assert_abs_diff_eq!(d.leverage, 1.6e7, epsilon = 1e-3);
        assert_abs_diff_eq!(d.ppv, 0.994, epsilon = 5e-4);
        assert_eq!(d.regime, Regime::Feasible);
        assert_eq!(d.min_pipeline_depth, PipelineDepth::Finite(1));
    }

    #[test]
    fn diagnose_without_discrimination_has_no_depth() {
        let d = diagnose(&StudyContext::new(0.2, 0.9).unwrap(), &op(0.3, 0.2)).unwrap();
        assert_eq!(d.min_pipeline_depth, PipelineDepth::Unreachable);
        assert!(d.ppv < 0.2);
        let json = serde_json::to_string(&d.min_pipeline_depth).unwrap();
        assert_eq!(json, "\"leverage<=1\"");
    }

    #[test]
    fn regime_precedence_at_low_target() {
        // tau < 0.5 lets Ψ ≤ 1 while PPV < 0.5; majority-false is reported
        let o = op(0.05, 0.5);
        let pi = 0.06;
        let p = ppv(pi, o.leverage()).unwrap();
        let s = psi(0.3, pi, &o).unwrap();
        assert!(p < 0.5 && s <= 1.0);
        assert_eq!(classify(p, s), Regime::MajorityFalse);
    }

    #[test]
    fn generic_over_f32() {
        let o = OperatingPoint::new(0.05f32, 0.8f32).unwrap();
        let d = diagnose(&StudyContext::new(0.10f32, 0.95).unwrap(), &o).unwrap();
        assert!((d.ppv - 0.64).abs() < 1e-5);
        assert_eq!(d.regime, Regime::Infeasible);
    }

    proptest! {
        #[test]
        fn diagnosis_invariants(pi in 1e-6f64..0.999, tau in 0.01f64..0.99, alpha in 1e-6f64..0.5, power in 0.01f64..=1.0) {
            let o = op(alpha, power);
            let d = diagnose(&StudyContext::new(pi, tau).unwrap(), &o).unwrap();
            prop_assert!(d.ppv <= d.ceiling + 1e-15);
            if d.regime == Regime::MajorityFalse { prop_assert!(d.ppv < 0.5); }
            if d.regime == Regime::Feasible { prop_assert!(d.psi <= 1.0); }
            prop_assert!((d.waste_ratio - (1.0 - d.ppv) / d.ppv).abs() <= 1e-12 * d.waste_ratio.max(1.0));
            prop_assert!((d.misinfo_floor - (1.0 - d.ceiling)).abs() <= 1e-12);
        }
    }
}
