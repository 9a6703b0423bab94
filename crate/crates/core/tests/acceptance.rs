//! Acceptance criteria. Runs as a plain binary and prints one line per criterion.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use cbound_core::collapse::{
    discrimination_loss, double_collapse_leverage, leverage_from_rates, obs_effective_alpha,
    obs_ppv_curve, ppv_from_rates, search_rates, ConfoundingModel, Sidedness, SpecSearchPolicy,
};
use cbound_core::dynamics::{
    field_lifetime, generational_trajectory, FieldDecay, FixedPoint, ProgrammeState,
};
use cbound_core::heterogeneity::{expected_ppv, PriorMixture};
use cbound_core::landscape::{classify_point, feasibility_boundary_pi, field_presets};
use cbound_core::model::{self, cost_of_discovery, npv, pi_crit, ppv, ppv_ceiling};
use cbound_core::montecarlo::{
    simulate_generations, simulate_ppv, simulate_replication, simulate_spec_search, SimConfig,
    SimEstimate,
};
use cbound_core::replication::{
    bridge_forward, bridge_invert, min_pipeline_depth, pipeline_leverage, pipeline_ppv,
    sensitivity_grid, ReplicationDesign,
};
use cbound_core::{diagnose, OperatingPoint, Regime, StudyContext};

fn op(alpha: f64, power: f64) -> OperatingPoint<f64> {
    OperatingPoint::new(alpha, power).unwrap()
}

fn design(alpha_r: f64, power_r: f64) -> ReplicationDesign<f64> {
    ReplicationDesign::new(alpha_r, power_r).unwrap()
}

fn near(what: &str, got: f64, want: f64, tol: f64) {
    assert!(
        (got - want).abs() <= tol,
        "{what}: got {got}, want {want} ± {tol}"
    );
}

/// Printed values round to half a unit of their last digit.
fn printed(what: &str, got: f64, want: f64, last_digit: f64) {
    near(what, got, want, 0.5 * last_digit);
}

fn replication_retrodiction() {
    let started = Instant::now();
    let d = diagnose(&StudyContext::new(0.10, 0.95).unwrap(), &op(0.05, 0.35)).unwrap();
    // the published calculation carries the rounded PPV 0.44 into the bridge
    let r75 = bridge_forward(0.44, &design(0.05, 0.75)).unwrap();
    let r80 = bridge_forward(0.44, &design(0.05, 0.80)).unwrap();
    let exact75 = bridge_forward(d.ppv, &design(0.05, 0.75)).unwrap();
    let elapsed = started.elapsed();
    near("PPV", d.ppv, 0.4375, 1e-3);
    printed("PPV, two-figure rounding", d.ppv, 0.44, 0.01);
    near("replication at 0.75", r75, 0.358, 1e-3);
    near("replication at 0.80", r80, 0.380, 1e-3);
    near(
        "replication at 0.75 from the unrounded PPV",
        exact75,
        0.4375 * 0.75 + 0.5625 * 0.05,
        1e-15,
    );
    assert!(elapsed < Duration::from_millis(1), "took {elapsed:?}");
}

fn critical_priors() {
    let rows = [
        (0.05, 0.80, 0.543, 1e-3),
        (0.05, 0.50, 0.655, 1e-3),
        (0.05, 0.30, 0.760, 1e-3),
        (0.01, 0.80, 0.192, 1e-3),
        (0.005, 0.80, 0.106, 1e-3),
        (5e-8, 0.80, 1.2e-6, 0.1e-6),
    ];
    for (alpha, power, want, digit) in rows {
        let got = pi_crit(0.95, &op(alpha, power)).unwrap();
        printed(
            &format!("pi_crit at alpha {alpha}, power {power}"),
            got,
            want,
            digit,
        );
    }
}

fn fixed_alpha_ceilings() {
    for (pi, want) in [
        (0.5, 0.952),
        (0.3, 0.896),
        (0.1, 0.689),
        (0.05, 0.513),
        (0.01, 0.168),
    ] {
        near(
            &format!("ceiling at pi {pi}"),
            ppv_ceiling(pi, 0.05).unwrap(),
            want,
            1e-3,
        );
    }
}

fn replication_sensitivity() {
    let priors = [0.05, 0.10, 0.15, 0.20, 0.30];
    let powers = [0.25, 0.35, 0.50];
    let table = [
        [20.0, 30.0, 38.0, 44.0, 53.0],
        [24.0, 36.0, 44.0, 50.0, 58.0],
        [29.0, 42.0, 50.0, 55.0, 62.0],
    ];
    let g = sensitivity_grid(&priors, &powers, 0.05, &design(0.05, 0.75)).unwrap();
    for (i, &power) in powers.iter().enumerate() {
        for (j, &pi) in priors.iter().enumerate() {
            let got = 100.0 * g.cell(power, pi).unwrap();
            near(
                &format!("cell power {power}, pi {pi}"),
                got,
                table[i][j],
                1.0,
            );
        }
    }
    near("bold cell", 100.0 * g.cell(0.35, 0.10).unwrap(), 36.0, 0.5);
}

fn field_presets_regimes() {
    let presets = field_presets();
    assert_eq!(presets.len(), 7);
    for p in presets {
        let (psi, ppv, _) = p.evaluate();
        assert!(
            p.expected_psi.matches(psi),
            "{}: psi {psi} vs {:?}",
            p.name,
            p.expected_psi
        );
        assert!(
            p.expected_ppv.matches(ppv),
            "{}: ppv {ppv} vs {:?}",
            p.name,
            p.expected_ppv
        );
    }
}

fn example_cost_of_discovery() {
    let rows = [
        (0.05, 0.50, 0.02, 4.9, 0.1),
        (0.05, 0.35, 0.10, 1.3, 0.1),
        (0.05, 0.60, 0.08, 1.0, 0.1),
        (0.05, 0.80, 0.30, 0.15, 0.01),
        (5e-8, 0.80, 1e-5, 0.006, 0.001),
    ];
    for (alpha, power, pi, want, digit) in rows {
        let w = cost_of_discovery(pi, &op(alpha, power)).unwrap();
        printed(&format!("W at pi {pi}"), w, want, digit);
    }
}

fn example_generational_collapse() {
    let state = ProgrammeState::seeded(0.10, 7.0, 0.02).unwrap();
    let rows = generational_trajectory(&state, 3);
    let table = [
        (0.020, 0.125, 7.0),
        (0.013, 0.081, 11.3),
        (0.008, 0.054, 17.4),
        (0.005, 0.037, 26.2),
    ];
    for (row, (pi, ppv, w)) in rows.iter().zip(table) {
        let k = row.generation;
        printed(&format!("prior {k}"), row.prior, pi, 1e-3);
        printed(&format!("ppv {k}"), row.ppv, ppv, 1e-3);
        printed(&format!("waste {k}"), row.waste, w, 0.1);
    }
    let fd = FieldDecay::new(0.70, 0.05).unwrap();
    near(
        "lifetime at 0.05",
        field_lifetime(&fd, 0.95, &op(0.05, 0.80)).unwrap(),
        5.0,
        0.5,
    );
    near(
        "lifetime at 0.005",
        field_lifetime(&fd, 0.95, &op(0.005, 0.80)).unwrap(),
        38.0,
        0.5,
    );
}

fn double_collapse_fixture() {
    near(
        "leverage",
        leverage_from_rates(0.20, 0.80).unwrap(),
        4.0,
        1e-12,
    );
    let p = ppv_from_rates(0.10, 0.20, 0.80).unwrap();
    near("ppv", p, 0.3077, 1e-4);
    printed("printed ppv", p, 0.31, 0.01);
}

fn alzheimers_worked_example() {
    let d = diagnose(&StudyContext::new(0.05, 0.95).unwrap(), &op(0.05, 0.50)).unwrap();
    near("leverage", d.leverage, 10.0, 1e-12);
    printed("ppv", d.ppv, 0.34, 0.01);
    printed("psi", d.psi, 36.0, 1.0);
    printed("ceiling", d.ceiling, 0.51, 0.01);
    let repaired = op(0.005, 0.50);
    near(
        "pipeline leverage",
        pipeline_leverage(&repaired, 2),
        10_000.0,
        1e-6,
    );
    let p = pipeline_ppv(0.05, &repaired, 2).unwrap();
    assert!(p > 0.99, "pipeline ppv {p}");
}

fn heterogeneity_fixture() {
    let mix = PriorMixture::uniform(&[0.02, 0.18]).unwrap();
    let e = expected_ppv(&mix, 16.0).unwrap();
    printed("expected ppv", e, 0.512, 1e-3);
    printed("expected ppv, two-figure rounding", e, 0.51, 0.01);
    printed("ppv at mean", ppv(0.10, 16.0).unwrap(), 0.640, 1e-3);
}

fn npv_fixture() {
    let v = npv(0.10, &op(0.05, 0.35)).unwrap();
    printed("npv", v, 0.929, 1e-3);
    printed("npv, two-figure rounding", v, 0.93, 0.01);
}

const MC_TRIALS: u64 = 1_000_000;

fn within_3se(what: &str, est: &SimEstimate, closed: f64) {
    assert!(
        est.agrees_with(closed, 3.0),
        "{what}: simulated {} ± {} vs closed form {closed} ({:.2} SE)",
        est.estimate,
        est.standard_error,
        est.z_distance(closed)
    );
}

/// Checks each generation against the recursion applied to the previous empirical PPV.
fn generations_follow_recursion(
    what: &str,
    seed: u64,
    state: &ProgrammeState<f64>,
    alpha: f64,
    k_max: u32,
) -> Vec<SimEstimate> {
    let cfg = SimConfig::new(seed, MC_TRIALS).unwrap();
    let sim = simulate_generations(&cfg, state, alpha, k_max).unwrap();
    assert_eq!(sim.extinct_at, None, "{what}: extinct");
    assert_eq!(sim.ppv.len(), k_max as usize + 1);
    within_3se(&format!("{what} generation 0"), &sim.ppv[0], state.ppv0());
    for k in 1..sim.ppv.len() {
        let parent =
            ProgrammeState::new(state.pi_c(), state.lambda(), sim.ppv[k - 1].estimate).unwrap();
        let expected = generational_trajectory(&parent, 1)[1].ppv;
        within_3se(&format!("{what} generation {k}"), &sim.ppv[k], expected);
    }
    sim.ppv
}

fn oracle_equivalence() {
    let started = Instant::now();
    let mut sets = 0;

    for (seed, pi, alpha, power) in [
        (101, 0.10, 0.05, 0.35),
        (102, 0.50, 0.05, 0.05),
        (103, 0.10, 0.05, 0.80),
        (104, 0.30, 0.01, 0.90),
        (105, 0.02, 0.05, 0.50),
    ] {
        let o = op(alpha, power);
        let est = simulate_ppv(&SimConfig::new(seed, MC_TRIALS).unwrap(), pi, &o).unwrap();
        within_3se(
            &format!("ppv at pi {pi}, {alpha}/{power}"),
            &est,
            ppv(pi, o.leverage()).unwrap(),
        );
        sets += 1;
    }

    for (seed, pi, alpha, power, d) in [
        (201, 0.10, 0.05, 0.35, design(0.05, 0.75)),
        (202, 0.10, 0.05, 0.35, design(0.05, 0.80)),
        (203, 0.999, 0.05, 0.80, design(0.05, 0.90)),
        (204, 0.30, 0.01, 0.90, design(0.005, 0.95)),
    ] {
        let o = op(alpha, power);
        let est =
            simulate_replication(&SimConfig::new(seed, MC_TRIALS).unwrap(), pi, &o, &d).unwrap();
        let closed = bridge_forward(ppv(pi, o.leverage()).unwrap(), &d).unwrap();
        within_3se(&format!("replication at pi {pi}"), &est, closed);
        sets += 1;
    }
    let retro = simulate_replication(
        &SimConfig::new(201, MC_TRIALS).unwrap(),
        0.10,
        &op(0.05, 0.35),
        &design(0.05, 0.75),
    )
    .unwrap();
    within_3se("replication, printed", &retro, 0.358);

    for (seed, alpha, power, m, q) in [
        (301, 0.05, 0.80, 1, 0.4),
        (302, 0.05, 0.80, 2, 0.0),
        (303, 0.05, 0.80, 3, 0.5),
        (304, 0.01, 0.60, 10, 0.2),
    ] {
        let policy = SpecSearchPolicy::new(m, q).unwrap();
        let est = simulate_spec_search(
            &SimConfig::new(seed, MC_TRIALS).unwrap(),
            &op(alpha, power),
            &policy,
        )
        .unwrap();
        let (a_eff, p_eff) = search_rates(alpha, power, &policy);
        within_3se(&format!("alpha_eff m {m} q {q}"), &est.alpha_eff, a_eff);
        within_3se(&format!("power_eff m {m} q {q}"), &est.power_eff, p_eff);
        sets += 1;
    }

    let collapse = ProgrammeState::seeded(0.10, 7.0, 0.02).unwrap();
    let sim = generations_follow_recursion("collapse", 401, &collapse, 0.05, 3);
    within_3se("collapse generation 3, printed", &sim[3], 0.037);
    sets += 1;

    let recovery = ProgrammeState::new(0.5, 16.0, 0.5).unwrap();
    let sim = generations_follow_recursion("recovery", 402, &recovery, 0.05, 12);
    let FixedPoint::Positive(x_star) = cbound_core::dynamics::fixed_point(&recovery) else {
        panic!("recovery programme has no positive fixed point");
    };
    near("fixed point", x_star, 0.9333, 1e-4);
    let last = sim.last().unwrap();
    assert!(
        last.z_distance(x_star) <= 3.0,
        "settles at {} vs {x_star}",
        last.estimate
    );
    sets += 1;

    let boundary = ProgrammeState::new(0.5, 1.0, 0.5).unwrap();
    let sim = generations_follow_recursion("boundary", 403, &boundary, 0.05, 4);
    for (k, est) in sim.iter().enumerate() {
        within_3se(
            &format!("geometric decay {k}"),
            est,
            0.5f64.powi(k as i32) * 0.5,
        );
    }
    sets += 1;

    assert!(sets >= 12, "only {sets} parameter sets");
    let elapsed = started.elapsed();
    assert!(
        elapsed < Duration::from_secs(60),
        "oracle suite took {elapsed:?}"
    );
}

const PROPERTY_CASES: u32 = 10_000;

fn runner() -> TestRunner {
    TestRunner::new(Config {
        cases: PROPERTY_CASES,
        failure_persistence: None,
        ..Config::default()
    })
}

fn check<S: Strategy>(
    name: &str,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) {
    if let Err(e) = runner().run(&strategy, test) {
        panic!("{name}: {e}");
    }
}

fn prior() -> impl Strategy<Value = f64> {
    1e-6f64..(1.0 - 1e-6)
}

fn property_suites() {
    check(
        "ppv monotone and concave",
        (prior(), prior(), 1.0001f64..1e6),
        |(a, b, lambda)| {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let (plo, phi) = (ppv(lo, lambda).unwrap(), ppv(hi, lambda).unwrap());
            prop_assert!(plo <= phi);
            let mid = ppv(0.5 * (lo + hi), lambda).unwrap();
            prop_assert!(mid >= 0.5 * (plo + phi) - 1e-12);
            Ok(())
        },
    );

    check(
        "leverage one is uninformative",
        (prior(), 1e-9f64..1.0),
        |(pi, alpha)| {
            let o = op(alpha, alpha);
            prop_assert!((ppv(pi, o.leverage()).unwrap() - pi).abs() <= 1e-12);
            Ok(())
        },
    );

    check(
        "leverage below one is anti-evidence",
        (prior(), 1e-3f64..1.0, 0.01f64..0.99),
        |(pi, alpha, frac)| {
            let o = op(alpha, alpha * frac);
            prop_assert!(ppv(pi, o.leverage()).unwrap() < pi);
            Ok(())
        },
    );

    check(
        "ceiling dominates",
        (prior(), 1e-9f64..0.999, 1e-9f64..=1.0),
        |(pi, alpha, power)| {
            let o = op(alpha, power);
            prop_assert!(ppv(pi, o.leverage()).unwrap() <= ppv_ceiling(pi, alpha).unwrap() + 1e-15);
            Ok(())
        },
    );

    check(
        "bridge roundtrip",
        (0.0f64..=1.0, 1e-4f64..0.5, 0.01f64..0.5),
        |(p, alpha_r, gap)| {
            let d = design(alpha_r, (alpha_r + gap).min(1.0));
            let back = bridge_invert(bridge_forward(p, &d).unwrap(), &d).unwrap();
            prop_assert!((back - p).abs() <= 1e-12);
            Ok(())
        },
    );

    check(
        "pipeline depth minimal",
        (0.5f64..0.9999, 1e-4f64..0.99, 1e-4f64..0.2, 1.05f64..50.0),
        |(tau, pi, alpha, mult)| {
            let o = op(alpha, (alpha * mult).min(1.0));
            prop_assume!(o.leverage() > 1.0);
            let k = min_pipeline_depth(tau, pi, &o).unwrap();
            prop_assert!(pipeline_ppv(pi, &o, k).unwrap() >= tau);
            if k > 1 {
                prop_assert!(pipeline_ppv(pi, &o, k - 1).unwrap() < tau);
            }
            Ok(())
        },
    );

    check(
        "search discrimination loss below one",
        (1e-4f64..0.5, 0.01f64..0.5, 2u32..200, 0.0f64..0.999),
        |(alpha, gap, m, q)| {
            let o = op(alpha, (alpha + gap).min(1.0));
            let d = discrimination_loss(&o, &SpecSearchPolicy::new(m, q).unwrap()).unwrap();
            prop_assert!(d < 1.0 && d > 0.0, "D = {d}");
            Ok(())
        },
    );

    check(
        "collapse and recovery converge monotonically",
        (0.01f64..0.99, 1.0f64..200.0, 0.01f64..0.99),
        |(pi_c, lambda, ppv0)| {
            let state = ProgrammeState::new(pi_c, lambda, ppv0).unwrap();
            let target = cbound_core::dynamics::fixed_point(&state).value();
            let rows = generational_trajectory(&state, 60);
            for w in rows.windows(2) {
                let (a, b) = (w[0].ppv, w[1].ppv);
                // each step moves toward the fixed point without overshooting it
                prop_assert!((b - target).abs() <= (a - target).abs() + 1e-12);
                prop_assert!((a - target) * (b - target) >= -1e-18);
            }
            if pi_c * lambda <= 1.0 {
                prop_assert!(rows.windows(2).all(|w| w[1].ppv <= w[0].ppv));
            }
            Ok(())
        },
    );

    check(
        "landscape regime flips at the feasibility boundary",
        (0.5f64..0.999, 1.0f64..1e7, 1e-6f64..0.5),
        |(tau, lambda, rel)| {
            let boundary = feasibility_boundary_pi(lambda, tau).unwrap();
            let above = boundary + rel * (1.0 - boundary);
            let below = boundary * (1.0 - rel);
            prop_assume!(above < 1.0 && below > 0.0);
            let psi_at = model::lambda_required(tau, boundary).unwrap() / lambda;
            prop_assert!((psi_at - 1.0).abs() <= 1e-12, "psi at boundary {psi_at}");
            prop_assert_eq!(
                classify_point(tau, above, lambda).unwrap().1,
                Regime::Feasible
            );
            prop_assert_ne!(
                classify_point(tau, below, lambda).unwrap().1,
                Regime::Feasible
            );
            Ok(())
        },
    );
}

fn asymptotic_collapse() {
    let cm = ConfoundingModel::new(0.1, 1.0, Sidedness::OneSidedPositive).unwrap();
    let n = 1_000_000;
    let a = obs_effective_alpha(n, 0.05, &cm).unwrap();
    assert!(a >= 0.999, "alpha_eff {a}");
    let curve = obs_ppv_curve(0.10, 0.05, &cm, 0.3, &[n]).unwrap();
    near("ppv", curve[0], 0.10, 0.01);
    let policy = SpecSearchPolicy::new(3, 0.5).unwrap();
    let l = double_collapse_leverage(n, 0.05, &policy, &cm, 0.3).unwrap();
    near("double collapse leverage", l, 1.0, 0.05);
}

fn main() -> ExitCode {
    let criteria: [(&str, fn()); 14] = [
        ("Replication-rate retrodiction", replication_retrodiction),
        ("Critical priors", critical_priors),
        ("Fixed-alpha ceilings", fixed_alpha_ceilings),
        ("Replication sensitivity grid", replication_sensitivity),
        ("Field presets", field_presets_regimes),
        ("Cost of discovery examples", example_cost_of_discovery),
        (
            "Generational collapse table and field lifetimes",
            example_generational_collapse,
        ),
        (
            "Double-collapse forced-rate fixture",
            double_collapse_fixture,
        ),
        ("Alzheimer's worked example", alzheimers_worked_example),
        ("Heterogeneity two-point mixture", heterogeneity_fixture),
        ("NPV fixture", npv_fixture),
        ("Monte Carlo oracle equivalence", oracle_equivalence),
        ("Property suites", property_suites),
        ("Asymptotic collapse", asymptotic_collapse),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run));
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(()) => println!("PASS [{:>2}] {name} ({secs:.3}s)", i + 1),
            Err(e) => {
                failed += 1;
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("FAIL [{:>2}] {name} ({secs:.3}s): {msg}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
