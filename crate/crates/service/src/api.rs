//! Request and response bodies of every operation, and the functions that answer them.
//!
//! These are shared by the HTTP router and the command-line front end, so both
//! return exactly what the library computes.

use serde::{Deserialize, Serialize};

use cbound_core::collapse::{
    self, AdaptiveSchedule, ConfoundingModel, Sidedness, SpecSearchPolicy,
};
use cbound_core::dynamics::{
    self, FieldDecay, FixedPoint, GenerationRow, ProgrammeClass, ProgrammeState,
};
use cbound_core::heterogeneity::{self, PriorDensity, PriorMixture};
use cbound_core::landscape::{self, AxisSpacing, LandscapeGrid};
use cbound_core::model::{self, Diagnosis, OperatingPoint, Regime, StudyContext};
use cbound_core::montecarlo::{self, SimConfig, SimEstimate};
use cbound_core::replication::{self, ReplicationDesign};
use cbound_core::report::{self, EvidentialReport, ReportRequest};
use cbound_core::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseRequest {
    pub pi: f64,
    pub alpha: f64,
    pub power: f64,
    pub tau: f64,
}

pub fn diagnose(req: &DiagnoseRequest) -> Result<Diagnosis<f64>> {
    model::diagnose(
        &StudyContext::new(req.pi, req.tau)?,
        &OperatingPoint::new(req.alpha, req.power)?,
    )
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BridgePredictRequest {
    pub ppv: f64,
    pub alpha_r: f64,
    pub power_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgePredictResponse {
    pub replication_rate: f64,
}

pub fn bridge_predict(req: &BridgePredictRequest) -> Result<BridgePredictResponse> {
    let design = ReplicationDesign::new(req.alpha_r, req.power_r)?;
    Ok(BridgePredictResponse {
        replication_rate: replication::bridge_forward(req.ppv, &design)?,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BridgeInvertRequest {
    pub rate: f64,
    pub alpha_r: f64,
    pub power_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgeInvertResponse {
    pub ppv: f64,
}

pub fn bridge_invert(req: &BridgeInvertRequest) -> Result<BridgeInvertResponse> {
    let design = ReplicationDesign::new(req.alpha_r, req.power_r)?;
    Ok(BridgeInvertResponse {
        ppv: replication::bridge_invert(req.rate, &design)?,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineRequest {
    pub pi: f64,
    pub alpha: f64,
    pub power: f64,
    pub tau: f64,
    /// Planned depth to evaluate besides the minimum.
    #[serde(default)]
    pub depth: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineStage {
    pub depth: u32,
    pub pipeline_leverage: f64,
    pub pipeline_ppv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineResponse {
    pub leverage: f64,
    pub k_star: u32,
    pub minimum: PipelineStage,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub planned: Option<PipelineStage>,
}

fn stage(pi: f64, op: &OperatingPoint<f64>, depth: u32) -> Result<PipelineStage> {
    Ok(PipelineStage {
        depth,
        pipeline_leverage: replication::pipeline_leverage(op, depth),
        pipeline_ppv: replication::pipeline_ppv(pi, op, depth)?,
    })
}

pub fn pipeline(req: &PipelineRequest) -> Result<PipelineResponse> {
    let op = OperatingPoint::new(req.alpha, req.power)?;
    let planned = req.depth.map(|k| stage(req.pi, &op, k)).transpose()?;
    let k_star = replication::min_pipeline_depth(req.tau, req.pi, &op)?;
    Ok(PipelineResponse {
        leverage: op.leverage(),
        k_star,
        minimum: stage(req.pi, &op, k_star)?,
        planned,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchRequest {
    pub alpha: f64,
    pub power: f64,
    pub m: u32,
    pub q: f64,
    #[serde(default)]
    pub pi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResponse {
    pub alpha_eff: f64,
    pub power_eff: f64,
    pub discrimination_loss: f64,
    pub effective_leverage: f64,
    /// Limit as `m` grows; absent when `q` is 0 or 1.
    pub saturation_leverage: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ppv: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nominal_ppv: Option<f64>,
}

pub fn search(req: &SearchRequest) -> Result<SearchResponse> {
    let op = OperatingPoint::new(req.alpha, req.power)?;
    let policy = SpecSearchPolicy::new(req.m, req.q)?;
    let (alpha_eff, power_eff) = collapse::search_rates(req.alpha, req.power, &policy);
    let saturation_leverage = if req.q > 0.0 && req.q < 1.0 {
        Some(collapse::saturation_leverage(&op, req.q)?)
    } else {
        None
    };
    let (ppv, nominal_ppv) = match req.pi {
        Some(pi) => (
            Some(collapse::ppv_from_rates(pi, alpha_eff, power_eff)?),
            Some(model::ppv(pi, op.leverage())?),
        ),
        None => (None, None),
    };
    Ok(SearchResponse {
        alpha_eff,
        power_eff,
        discrimination_loss: collapse::discrimination_loss(&op, &policy)?,
        effective_leverage: collapse::effective_leverage(&op, &policy)?,
        saturation_leverage,
        ppv,
        nominal_ppv,
    })
}

fn one_sided() -> Sidedness {
    Sidedness::OneSidedPositive
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfoundRequest {
    pub pi: f64,
    pub alpha: f64,
    pub theta1: f64,
    pub bias: f64,
    pub sigma: f64,
    #[serde(default = "one_sided")]
    pub sidedness: Sidedness,
    pub ns: Vec<u64>,
    /// Specification search applied to every confounded attempt.
    #[serde(default)]
    pub search: Option<SpecSearchPolicy<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfoundRow {
    pub n: u64,
    pub alpha_eff: f64,
    pub power_eff: f64,
    pub ppv: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub double_collapse_leverage: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfoundResponse {
    pub rows: Vec<ConfoundRow>,
}

pub fn confound(req: &ConfoundRequest) -> Result<ConfoundResponse> {
    if req.ns.is_empty() {
        return Err(Error::Domain(
            "ns must list at least one sample size".into(),
        ));
    }
    let cm = ConfoundingModel::new(req.bias, req.sigma, req.sidedness)?;
    let ppvs = collapse::obs_ppv_curve(req.pi, req.alpha, &cm, req.theta1, &req.ns)?;
    let rows = req
        .ns
        .iter()
        .zip(ppvs)
        .map(|(&n, ppv)| {
            Ok(ConfoundRow {
                n,
                alpha_eff: collapse::obs_effective_alpha(n, req.alpha, &cm)?,
                power_eff: collapse::obs_effective_power(n, req.alpha, &cm, req.theta1)?,
                ppv,
                double_collapse_leverage: req
                    .search
                    .map(|p| collapse::double_collapse_leverage(n, req.alpha, &p, &cm, req.theta1))
                    .transpose()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConfoundResponse { rows })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveRequest {
    pub c: f64,
    pub theta1: f64,
    pub sigma: f64,
    pub pi: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveResponse {
    pub lambda_required: f64,
    pub seed_n: f64,
    pub required_n: u64,
    pub alpha: f64,
    pub power: f64,
    pub leverage: f64,
    pub ppv: f64,
}

pub fn adaptive(req: &AdaptiveRequest) -> Result<AdaptiveResponse> {
    let sched = AdaptiveSchedule::new(req.c, req.theta1, req.sigma)?;
    let lambda_required = model::lambda_required(req.tau, req.pi)?;
    let required_n = collapse::adaptive_required_n(lambda_required, &sched)?;
    let op = collapse::adaptive_operating_point(required_n, &sched)?;
    Ok(AdaptiveResponse {
        lambda_required,
        seed_n: collapse::adaptive_seed_n(lambda_required, &sched)?,
        required_n,
        alpha: op.alpha(),
        power: op.power(),
        leverage: op.leverage(),
        ppv: model::ppv(req.pi, op.leverage())?,
    })
}

/// Either the combined `decay_rate` or both of its components.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LifetimeRequest {
    pub pi0: f64,
    #[serde(default)]
    pub decay_rate: Option<f64>,
    #[serde(default)]
    pub exhaustion: Option<f64>,
    #[serde(default)]
    pub speculation: Option<f64>,
    pub tau: f64,
    pub alpha: f64,
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifetimeResponse {
    pub decay_rate: f64,
    pub pi_crit: f64,
    pub lifetime: f64,
}

pub fn lifetime(req: &LifetimeRequest) -> Result<LifetimeResponse> {
    let fd = match (req.decay_rate, req.exhaustion, req.speculation) {
        (Some(rate), None, None) => FieldDecay::new(req.pi0, rate)?,
        (None, Some(e), Some(s)) => FieldDecay::from_rates(req.pi0, e, s)?,
        _ => {
            return Err(Error::Domain(
                "give either decay_rate or both exhaustion and speculation".into(),
            ))
        }
    };
    let op = OperatingPoint::new(req.alpha, req.power)?;
    Ok(LifetimeResponse {
        decay_rate: fd.decay_rate(),
        pi_crit: model::pi_crit(req.tau, &op)?,
        lifetime: dynamics::field_lifetime(&fd, req.tau, &op)?,
    })
}

/// Generation 0 is given either by its PPV or by the prior that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationsRequest {
    pub pi_c: f64,
    pub lambda: f64,
    #[serde(default)]
    pub ppv0: Option<f64>,
    #[serde(default)]
    pub pi0: Option<f64>,
    pub k_max: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationsResponse {
    pub progress_ratio: f64,
    pub class: ProgrammeClass,
    pub fixed_point: FixedPoint<f64>,
    pub rows: Vec<GenerationRow<f64>>,
}

/// Largest trajectory served in one response.
pub const MAX_GENERATIONS: u32 = 10_000;

fn programme(
    pi_c: f64,
    lambda: f64,
    ppv0: Option<f64>,
    pi0: Option<f64>,
) -> Result<ProgrammeState<f64>> {
    match (ppv0, pi0) {
        (Some(p), None) => ProgrammeState::new(pi_c, lambda, p),
        (None, Some(pi)) => ProgrammeState::seeded(pi_c, lambda, pi),
        _ => Err(Error::Domain("give exactly one of ppv0 and pi0".into())),
    }
}

pub fn generations(req: &GenerationsRequest) -> Result<GenerationsResponse> {
    if req.k_max > MAX_GENERATIONS {
        return Err(Error::Domain(format!(
            "k_max must not exceed {MAX_GENERATIONS}"
        )));
    }
    let state = programme(req.pi_c, req.lambda, req.ppv0, req.pi0)?;
    Ok(GenerationsResponse {
        progress_ratio: state.progress_ratio(),
        class: dynamics::classify_programme(&state),
        fixed_point: dynamics::fixed_point(&state),
        rows: dynamics::generational_trajectory(&state, req.k_max),
    })
}

fn default_tol() -> f64 {
    1e-10
}

/// Exactly one of `mixture` (pairs of prior and weight) and `density`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeteroRequest {
    pub lambda: f64,
    #[serde(default)]
    pub mixture: Option<Vec<(f64, f64)>>,
    #[serde(default)]
    pub density: Option<PriorDensity<f64>>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeteroResponse {
    pub mean_prior: f64,
    pub prior_variance: f64,
    pub expected_ppv: f64,
    pub ppv_at_mean: f64,
    pub heterogeneity_tax: f64,
    pub jensen_gap_approx: f64,
}

pub fn hetero(req: &HeteroRequest) -> Result<HeteroResponse> {
    let (mean, variance, expected) = match (&req.mixture, &req.density) {
        (Some(components), None) => {
            let mix = PriorMixture::new(components.clone())?;
            (
                mix.mean(),
                mix.variance(),
                heterogeneity::expected_ppv(&mix, req.lambda)?,
            )
        }
        (None, Some(d)) => {
            let (a, b) = (d.shape_a(), d.shape_b());
            let variance = a * b / ((a + b) * (a + b) * (a + b + 1.0));
            (
                d.mean(),
                variance,
                heterogeneity::expected_ppv_density(d, req.lambda, req.tol)?,
            )
        }
        _ => {
            return Err(Error::Domain(
                "give exactly one of mixture and density".into(),
            ))
        }
    };
    let ppv_at_mean = model::ppv(mean, req.lambda)?;
    Ok(HeteroResponse {
        mean_prior: mean,
        prior_variance: variance,
        expected_ppv: expected,
        ppv_at_mean,
        heterogeneity_tax: ppv_at_mean - expected,
        jensen_gap_approx: heterogeneity::jensen_gap_approx(mean, variance, req.lambda)?,
    })
}

/// Largest landscape resolution served in one response.
pub const MAX_RESOLUTION: usize = 1_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandscapeRequest {
    pub tau: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub pi_min: f64,
    pub pi_max: f64,
    pub resolution: usize,
    #[serde(default)]
    pub spacing: AxisSpacing,
}

pub fn landscape(req: &LandscapeRequest) -> Result<LandscapeGrid<f64>> {
    if req.resolution > MAX_RESOLUTION {
        return Err(Error::Domain(format!(
            "resolution must not exceed {MAX_RESOLUTION}"
        )));
    }
    landscape::grid(
        req.tau,
        (req.lambda_min, req.lambda_max),
        (req.pi_min, req.pi_max),
        req.resolution,
        req.spacing,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresetView {
    pub name: String,
    pub alpha: f64,
    pub power: f64,
    pub pi: f64,
    pub leverage: f64,
    pub psi: f64,
    pub ppv: f64,
    pub ceiling: f64,
    pub regime: Regime,
}

/// Seven illustrative fields evaluated at τ = 0.95.
pub fn presets() -> Vec<PresetView> {
    landscape::field_presets()
        .into_iter()
        .map(|p| {
            let (psi, ppv, regime) = p.evaluate();
            let op = p.operating_point();
            PresetView {
                leverage: op.leverage(),
                ceiling: model::ppv_ceiling(p.pi, p.alpha)
                    .expect("preset parameters are in domain"),
                name: p.name,
                alpha: p.alpha,
                power: p.power,
                pi: p.pi,
                psi,
                ppv,
                regime,
            }
        })
        .collect()
}

/// Largest simulation served in one request.
pub const MAX_TRIALS: u64 = 50_000_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    Ppv {
        pi: f64,
        alpha: f64,
        power: f64,
    },
    Replication {
        pi: f64,
        alpha: f64,
        power: f64,
        alpha_r: f64,
        power_r: f64,
    },
    SpecSearch {
        alpha: f64,
        power: f64,
        m: u32,
        q: f64,
    },
    /// `trials` is the cohort tested in each generation.
    Generations {
        pi_c: f64,
        lambda: f64,
        #[serde(default)]
        ppv0: Option<f64>,
        #[serde(default)]
        pi0: Option<f64>,
        alpha: f64,
        k_max: u32,
    },
}

/// The seed is mandatory so results reproduce across calls.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulateRequest {
    pub seed: u64,
    pub trials: u64,
    pub experiment: Experiment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SimulateResponse {
    Ppv {
        simulated: SimEstimate,
        closed_form: f64,
    },
    Replication {
        simulated: SimEstimate,
        closed_form: f64,
    },
    SpecSearch {
        alpha_eff: SimEstimate,
        power_eff: SimEstimate,
        closed_alpha_eff: f64,
        closed_power_eff: f64,
    },
    Generations {
        simulated: Vec<SimEstimate>,
        extinct_at: Option<u32>,
        /// Deterministic recursion from the same generation-0 PPV.
        closed_form: Vec<f64>,
    },
}

pub fn simulate(req: &SimulateRequest) -> Result<SimulateResponse> {
    if req.trials > MAX_TRIALS {
        return Err(Error::Domain(format!(
            "trials must not exceed {MAX_TRIALS}"
        )));
    }
    let cfg = SimConfig::new(req.seed, req.trials)?;
    Ok(match req.experiment {
        Experiment::Ppv { pi, alpha, power } => {
            let op = OperatingPoint::new(alpha, power)?;
            SimulateResponse::Ppv {
                simulated: montecarlo::simulate_ppv(&cfg, pi, &op)?,
                closed_form: model::ppv(pi, op.leverage())?,
            }
        }
        Experiment::Replication {
            pi,
            alpha,
            power,
            alpha_r,
            power_r,
        } => {
            let op = OperatingPoint::new(alpha, power)?;
            let design = ReplicationDesign::new(alpha_r, power_r)?;
            SimulateResponse::Replication {
                simulated: montecarlo::simulate_replication(&cfg, pi, &op, &design)?,
                closed_form: replication::bridge_forward(model::ppv(pi, op.leverage())?, &design)?,
            }
        }
        Experiment::SpecSearch { alpha, power, m, q } => {
            let op = OperatingPoint::new(alpha, power)?;
            let policy = SpecSearchPolicy::new(m, q)?;
            let est = montecarlo::simulate_spec_search(&cfg, &op, &policy)?;
            let (closed_alpha_eff, closed_power_eff) =
                collapse::search_rates(alpha, power, &policy);
            SimulateResponse::SpecSearch {
                alpha_eff: est.alpha_eff,
                power_eff: est.power_eff,
                closed_alpha_eff,
                closed_power_eff,
            }
        }
        Experiment::Generations {
            pi_c,
            lambda,
            ppv0,
            pi0,
            alpha,
            k_max,
        } => {
            if k_max > MAX_GENERATIONS {
                return Err(Error::Domain(format!(
                    "k_max must not exceed {MAX_GENERATIONS}"
                )));
            }
            let state = programme(pi_c, lambda, ppv0, pi0)?;
            let sim = montecarlo::simulate_generations(&cfg, &state, alpha, k_max)?;
            SimulateResponse::Generations {
                simulated: sim.ppv,
                extinct_at: sim.extinct_at,
                closed_form: dynamics::generational_trajectory(&state, k_max)
                    .into_iter()
                    .map(|r| r.ppv)
                    .collect(),
            }
        }
    })
}

pub fn evidential_report(req: &ReportRequest<f64>) -> Result<EvidentialReport<f64>> {
    report::report(req)
}
