//! Evidential status report for a planned claim.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, check_open, OperatingPoint};
use crate::replication::pipeline_ppv;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentificationStatus {
    Randomized,
    QuasiExperimental,
    ObservationalAdjusted,
}

impl IdentificationStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            IdentificationStatus::Randomized => "randomized",
            IdentificationStatus::QuasiExperimental => "quasi_experimental",
            IdentificationStatus::ObservationalAdjusted => "observational_adjusted",
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportRequest<T> {
    pub tau: T,
    pub pi_low: T,
    pub pi_high: T,
    pub alpha: T,
    pub power: T,
    pub planned_depth: u32,
    pub identification_status: IdentificationStatus,
    /// Whether the claim is causal; only then does identification matter.
    #[serde(default = "yes")]
    pub causal_claim: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Flag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagReason {
    /// Ψ > 1 at the optimistic prior and the planned pipeline still misses τ.
    Infeasible,
    /// Causal claim resting on covariate adjustment alone.
    ObservationalCausalClaim,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidentialReport<T> {
    pub tau: T,
    pub pi_low: T,
    pub pi_high: T,
    pub alpha: T,
    pub power: T,
    pub leverage: T,
    pub psi_low: T,
    pub psi_high: T,
    pub ceiling_low: T,
    pub ceiling_high: T,
    pub planned_depth: u32,
    pub pipeline_leverage: T,
    pub pipeline_ppv_low: T,
    pub pipeline_ppv_high: T,
    pub identification_status: IdentificationStatus,
    pub causal_claim: bool,
    pub verdict: Verdict,
    pub reasons: Vec<FlagReason>,
}

pub fn report<T: Real>(req: &ReportRequest<T>) -> Result<EvidentialReport<T>> {
    check_open("target", req.tau)?;
    check_open("pi_low", req.pi_low)?;
    check_open("pi_high", req.pi_high)?;
    if req.pi_low > req.pi_high {
        return Err(Error::domain(format!(
            "pi_low must not exceed pi_high, got [{}, {}]",
            req.pi_low, req.pi_high
        )));
    }
    if req.planned_depth == 0 {
        return Err(Error::domain("planned depth must be at least 1"));
    }
    let op = OperatingPoint::new(req.alpha, req.power)?;
    let k = req.planned_depth;
    let psi_high = model::psi(req.tau, req.pi_high, &op)?;
    let pipeline_ppv_high = pipeline_ppv(req.pi_high, &op, k)?;

    let mut reasons = Vec::new();
    if psi_high > T::one() && pipeline_ppv_high < req.tau {
        reasons.push(FlagReason::Infeasible);
    }
    if req.causal_claim && req.identification_status == IdentificationStatus::ObservationalAdjusted
    {
        reasons.push(FlagReason::ObservationalCausalClaim);
    }
    Ok(EvidentialReport {
        tau: req.tau,
        pi_low: req.pi_low,
        pi_high: req.pi_high,
        alpha: req.alpha,
        power: req.power,
        leverage: op.leverage(),
        psi_low: model::psi(req.tau, req.pi_low, &op)?,
        psi_high,
        ceiling_low: model::ppv_ceiling(req.pi_low, req.alpha)?,
        ceiling_high: model::ppv_ceiling(req.pi_high, req.alpha)?,
        planned_depth: k,
        pipeline_leverage: crate::replication::pipeline_leverage(&op, k),
        pipeline_ppv_low: pipeline_ppv(req.pi_low, &op, k)?,
        pipeline_ppv_high,
        identification_status: req.identification_status,
        causal_claim: req.causal_claim,
        verdict: if reasons.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Flag
        },
        reasons,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn req(
        pi: (f64, f64),
        alpha: f64,
        power: f64,
        k: u32,
        id: IdentificationStatus,
    ) -> ReportRequest<f64> {
        ReportRequest {
            tau: 0.95,
            pi_low: pi.0,
            pi_high: pi.1,
            alpha,
            power,
            planned_depth: k,
            identification_status: id,
            causal_claim: true,
        }
    }

    #[test]
    fn alzheimers_flagged_then_repaired() {
        let r = report(&req(
            (0.05, 0.05),
            0.05,
            0.5,
            1,
            IdentificationStatus::Randomized,
        ))
        .unwrap();
        assert_eq!(r.verdict, Verdict::Flag);
        assert_eq!(r.reasons, vec![FlagReason::Infeasible]);
        assert_abs_diff_eq!(r.ceiling_high, 0.513, epsilon = 5e-4);
        assert_abs_diff_eq!(r.psi_high, 36.1, epsilon = 0.05);

        let r = report(&req(
            (0.05, 0.05),
            0.005,
            0.5,
            2,
            IdentificationStatus::Randomized,
        ))
        .unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_abs_diff_eq!(r.pipeline_leverage, 10_000.0, epsilon = 1e-6);
        assert!(r.pipeline_ppv_high > 0.99);
    }

    #[test]
    fn feasible_prior_range_passes() {
        let r = report(&req(
            (0.55, 0.6),
            0.05,
            0.8,
            1,
            IdentificationStatus::Randomized,
        ))
        .unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.psi_high <= 1.0);
    }

    #[test]
    fn observational_causal_claims_flagged() {
        let mut q = req(
            (0.55, 0.6),
            0.05,
            0.8,
            1,
            IdentificationStatus::ObservationalAdjusted,
        );
        let r = report(&q).unwrap();
        assert_eq!(r.reasons, vec![FlagReason::ObservationalCausalClaim]);
        q.causal_claim = false;
        assert_eq!(report(&q).unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn validation() {
        assert!(report(&req(
            (0.3, 0.2),
            0.05,
            0.8,
            1,
            IdentificationStatus::Randomized
        ))
        .is_err());
        assert!(report(&req(
            (0.1, 0.2),
            0.05,
            0.8,
            0,
            IdentificationStatus::Randomized
        ))
        .is_err());
    }
}
