//! Plain-text rendering: three significant figures, regimes in words.

use std::fmt::Write;

use cbound_core::dynamics::FixedPoint;
use cbound_core::landscape::LandscapeGrid;
use cbound_core::model::PipelineDepth;
use cbound_core::montecarlo::SimEstimate;
use cbound_core::report::{EvidentialReport, FlagReason, Verdict};
use cbound_core::{Diagnosis, Regime};
use cbound_service::api::{
    AdaptiveResponse, ConfoundResponse, GenerationsResponse, HeteroResponse, PipelineResponse,
    SearchResponse, SimulateResponse,
};

/// Rounds to three significant figures; scientific notation outside [1e-4, 1e6).
pub fn sig3(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.2e}").parse().expect("formatted float parses");
    let exp = rounded.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        format!("{:.*}", (2 - exp).max(0) as usize, rounded)
    } else {
        format!("{x:.2e}")
    }
}

pub fn lines(rows: &[(&str, String)]) -> String {
    let width = rows
        .iter()
        .map(|(k, _)| k.chars().count())
        .max()
        .unwrap_or(0);
    rows.iter().fold(String::new(), |mut s, (k, v)| {
        let pad = width - k.chars().count();
        let _ = writeln!(s, "{k}{:pad$}  {v}", "");
        s
    })
}

fn regime(r: Regime) -> String {
    r.describe().to_string()
}

pub fn diagnosis(d: &Diagnosis<f64>) -> String {
    let depth = match d.min_pipeline_depth {
        PipelineDepth::Finite(k) => k.to_string(),
        PipelineDepth::Unreachable => "none (leverage at most 1)".into(),
    };
    lines(&[
        ("leverage Λ", sig3(d.leverage)),
        ("PPV", sig3(d.ppv)),
        ("log posterior odds", sig3(d.log_odds_posterior)),
        ("fixed-α ceiling", sig3(d.ceiling)),
        ("Λ required", sig3(d.lambda_required)),
        ("Ψ", sig3(d.psi)),
        ("π_crit", sig3(d.pi_crit)),
        ("π for PPV ½", sig3(d.pi_half)),
        ("false per true", sig3(d.waste_ratio)),
        ("NPV", sig3(d.npv)),
        ("misinformation floor", sig3(d.misinfo_floor)),
        ("α_max", sig3(d.alpha_max)),
        ("minimum pipeline depth", depth),
        ("regime", regime(d.regime)),
    ])
}

pub fn pipeline(r: &PipelineResponse) -> String {
    let mut rows = vec![
        ("leverage Λ", sig3(r.leverage)),
        ("k*", r.k_star.to_string()),
        ("Λ at k*", sig3(r.minimum.pipeline_leverage)),
        ("PPV at k*", sig3(r.minimum.pipeline_ppv)),
    ];
    if let Some(p) = &r.planned {
        rows.push(("planned depth", p.depth.to_string()));
        rows.push(("Λ at planned depth", sig3(p.pipeline_leverage)));
        rows.push(("PPV at planned depth", sig3(p.pipeline_ppv)));
    }
    lines(&rows)
}

pub fn search(r: &SearchResponse) -> String {
    let mut rows = vec![
        ("effective α", sig3(r.alpha_eff)),
        ("effective power", sig3(r.power_eff)),
        ("leverage factor D", sig3(r.discrimination_loss)),
        ("effective leverage", sig3(r.effective_leverage)),
    ];
    if let Some(s) = r.saturation_leverage {
        rows.push(("leverage as m grows", sig3(s)));
    }
    if let (Some(p), Some(n)) = (r.ppv, r.nominal_ppv) {
        rows.push(("PPV", sig3(p)));
        rows.push(("nominal PPV", sig3(n)));
    }
    lines(&rows)
}

pub fn confound(r: &ConfoundResponse) -> String {
    let mut s = String::from("n\teffective α\teffective power\tPPV");
    let double = r
        .rows
        .iter()
        .any(|row| row.double_collapse_leverage.is_some());
    if double {
        s.push_str("\tleverage with search");
    }
    s.push('\n');
    for row in &r.rows {
        let _ = write!(
            s,
            "{}\t{}\t{}\t{}",
            row.n,
            sig3(row.alpha_eff),
            sig3(row.power_eff),
            sig3(row.ppv)
        );
        if let Some(l) = row.double_collapse_leverage {
            let _ = write!(s, "\t{}", sig3(l));
        }
        s.push('\n');
    }
    s
}

pub fn adaptive(r: &AdaptiveResponse) -> String {
    lines(&[
        ("Λ required", sig3(r.lambda_required)),
        ("continuous n", sig3(r.seed_n)),
        ("required n", r.required_n.to_string()),
        ("α at n", sig3(r.alpha)),
        ("power at n", sig3(r.power)),
        ("leverage at n", sig3(r.leverage)),
        ("PPV at n", sig3(r.ppv)),
    ])
}

pub fn generations(r: &GenerationsResponse) -> String {
    let fixed = match r.fixed_point {
        FixedPoint::Positive(x) => sig3(x),
        FixedPoint::Collapse => "collapse to 0".into(),
    };
    let class = serde_json::to_value(r.class)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    let mut s = lines(&[
        ("progress ratio", sig3(r.progress_ratio)),
        ("programme", class),
        ("fixed point", fixed),
    ]);
    s.push_str("generation\tprior\tPPV\tfalse per true\n");
    for row in &r.rows {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}",
            row.generation,
            sig3(row.prior),
            sig3(row.ppv),
            sig3(row.waste)
        );
    }
    s
}

pub fn hetero(r: &HeteroResponse) -> String {
    lines(&[
        ("mean prior", sig3(r.mean_prior)),
        ("prior variance", sig3(r.prior_variance)),
        ("expected PPV", sig3(r.expected_ppv)),
        ("PPV at mean prior", sig3(r.ppv_at_mean)),
        ("heterogeneity tax", sig3(r.heterogeneity_tax)),
        ("second-order gap", sig3(r.jensen_gap_approx)),
    ])
}

pub fn landscape_summary(g: &LandscapeGrid<f64>, path: &str) -> String {
    let mut counts = [0usize; 3];
    for cell in g.cells.iter().flatten() {
        counts[match cell.regime {
            Regime::Feasible => 0,
            Regime::Infeasible => 1,
            Regime::MajorityFalse => 2,
        }] += 1;
    }
    let mut s = format!(
        "wrote {}×{} grid to {path}\n",
        g.lambda_axis.len(),
        g.pi_axis.len()
    );
    s.push_str(&lines(&[
        ("feasible", counts[0].to_string()),
        ("infeasible", counts[1].to_string()),
        ("majority-false", counts[2].to_string()),
    ]));
    s
}

fn estimate(e: &SimEstimate) -> String {
    format!(
        "{} ± {} ({} trials)",
        sig3(e.estimate),
        sig3(e.standard_error),
        e.trials
    )
}

pub fn simulation(r: &SimulateResponse) -> String {
    match r {
        SimulateResponse::Ppv {
            simulated,
            closed_form,
        }
        | SimulateResponse::Replication {
            simulated,
            closed_form,
        } => lines(&[
            ("simulated", estimate(simulated)),
            ("closed form", sig3(*closed_form)),
            ("z", sig3(simulated.z_distance(*closed_form))),
        ]),
        SimulateResponse::SpecSearch {
            alpha_eff,
            power_eff,
            closed_alpha_eff,
            closed_power_eff,
        } => lines(&[
            ("simulated α", estimate(alpha_eff)),
            ("closed-form α", sig3(*closed_alpha_eff)),
            ("simulated power", estimate(power_eff)),
            ("closed-form power", sig3(*closed_power_eff)),
        ]),
        SimulateResponse::Generations {
            simulated,
            extinct_at,
            closed_form,
        } => {
            let mut s = String::from("generation\tsimulated PPV\tclosed form\n");
            for (k, (e, c)) in simulated.iter().zip(closed_form).enumerate() {
                let _ = writeln!(s, "{k}\t{}\t{}", estimate(e), sig3(*c));
            }
            if let Some(k) = extinct_at {
                let _ = writeln!(s, "no significant findings from generation {k}");
            }
            s
        }
    }
}

pub fn report(r: &EvidentialReport<f64>) -> String {
    let verdict = match r.verdict {
        Verdict::Pass => "pass".to_string(),
        Verdict::Flag => {
            let why: Vec<&str> = r
                .reasons
                .iter()
                .map(|reason| match reason {
                    FlagReason::Infeasible => "Ψ > 1 and the planned pipeline misses τ",
                    FlagReason::ObservationalCausalClaim => {
                        "causal claim from covariate adjustment"
                    }
                })
                .collect();
            format!("FLAG ({})", why.join("; "))
        }
    };
    lines(&[
        ("τ", sig3(r.tau)),
        (
            "prior range",
            format!("{} to {}", sig3(r.pi_low), sig3(r.pi_high)),
        ),
        ("α", sig3(r.alpha)),
        ("power", sig3(r.power)),
        ("leverage Λ", sig3(r.leverage)),
        ("Ψ", format!("{} to {}", sig3(r.psi_low), sig3(r.psi_high))),
        (
            "fixed-α ceiling",
            format!("{} to {}", sig3(r.ceiling_low), sig3(r.ceiling_high)),
        ),
        ("planned depth", r.planned_depth.to_string()),
        ("pipeline leverage", sig3(r.pipeline_leverage)),
        (
            "pipeline PPV",
            format!(
                "{} to {}",
                sig3(r.pipeline_ppv_low),
                sig3(r.pipeline_ppv_high)
            ),
        ),
        (
            "identification",
            r.identification_status.as_str().replace('_', " "),
        ),
        (
            "causal claim",
            if r.causal_claim { "yes" } else { "no" }.into(),
        ),
        ("verdict", verdict),
    ])
}
