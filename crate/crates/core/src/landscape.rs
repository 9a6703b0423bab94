//! The (Λ, π) plane: regime boundaries, PPV contours, regime grids and field presets.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, check_open, check_positive, OperatingPoint, Regime};
use crate::scalar::Real;

/// Prior at which `Ψ = 1` for leverage `lambda`.
pub fn feasibility_boundary_pi<T: Real>(lambda: T, tau: T) -> Result<T> {
    check_positive("leverage", lambda)?;
    check_open("target", tau)?;
    let r = tau / (T::one() - tau);
    Ok(r / (lambda + r))
}

/// Prior at which PPV is one half.
pub fn majority_false_boundary_pi<T: Real>(lambda: T) -> Result<T> {
    check_positive("leverage", lambda)?;
    Ok(model::pi_half_for_leverage(lambda))
}

/// Prior at which PPV equals `level`.
pub fn ppv_contour_pi<T: Real>(lambda: T, level: T) -> Result<T> {
    check_positive("leverage", lambda)?;
    check_open("contour level", level)?;
    let s = level / (T::one() - level);
    Ok(s / (lambda + s))
}

/// Regime and PPV at one point of the plane.
pub fn classify_point<T: Real>(tau: T, pi: T, lambda: T) -> Result<(T, Regime)> {
    check_positive("leverage", lambda)?;
    let ppv = model::ppv(pi, lambda)?;
    let psi = model::lambda_required(tau, pi)? / lambda;
    Ok((ppv, model::classify(ppv, psi)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisSpacing {
    #[default]
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell<T> {
    pub ppv: T,
    pub regime: Regime,
}

/// Regimes over a rectangle of the plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeGrid<T> {
    pub tau: T,
    pub lambda_axis: Vec<T>,
    pub pi_axis: Vec<T>,
    /// `cells[i][j]` sits at `lambda_axis[i]`, `pi_axis[j]`.
    pub cells: Vec<Vec<GridCell<T>>>,
}

fn axis<T: Real>(name: &str, (lo, hi): (T, T), n: usize, spacing: AxisSpacing) -> Result<Vec<T>> {
    if n < 2 {
        return Err(Error::domain(format!(
            "{name} resolution must be at least 2, got {n}"
        )));
    }
    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
        return Err(Error::domain(format!(
            "{name} range must be increasing, got [{lo}, {hi}]"
        )));
    }
    let last = T::from_count(n as u64 - 1);
    let points = (0..n).map(|i| {
        let t = T::from_count(i as u64) / last;
        match spacing {
            AxisSpacing::Log => (lo.ln() + t * (hi.ln() - lo.ln())).exp(),
            AxisSpacing::Linear => lo + t * (hi - lo),
        }
    });
    // pin the endpoints exactly; exp(ln x) can drift by an ulp
    let mut v: Vec<T> = points.collect();
    v[0] = lo;
    v[n - 1] = hi;
    if v.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain(format!(
            "{name} range too narrow for {n} distinct points"
        )));
    }
    Ok(v)
}

/// Evaluates the regime at every node of a `resolution × resolution` grid.
pub fn grid<T: Real>(
    tau: T,
    lambda_range: (T, T),
    pi_range: (T, T),
    resolution: usize,
    spacing: AxisSpacing,
) -> Result<LandscapeGrid<T>> {
    check_open("target", tau)?;
    check_positive("lambda_min", lambda_range.0)?;
    check_open("pi_min", pi_range.0)?;
    check_open("pi_max", pi_range.1)?;
    let lambda_axis = axis("lambda", lambda_range, resolution, spacing)?;
    let pi_axis = axis("pi", pi_range, resolution, spacing)?;
    let cells = lambda_axis
        .iter()
        .map(|&lambda| {
            pi_axis
                .iter()
                .map(|&pi| {
                    classify_point(tau, pi, lambda).map(|(ppv, regime)| GridCell { ppv, regime })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LandscapeGrid {
        tau,
        lambda_axis,
        pi_axis,
        cells,
    })
}

impl<T: Real> LandscapeGrid<T> {
    /// Long-format CSV, one row per cell, λ-major.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "lambda,pi,ppv,regime")?;
        for (row, &lambda) in self.cells.iter().zip(&self.lambda_axis) {
            for (cell, &pi) in row.iter().zip(&self.pi_axis) {
                writeln!(
                    out,
                    "{:e},{:e},{:e},{}",
                    lambda.to_f64().unwrap_or(f64::NAN),
                    pi.to_f64().unwrap_or(f64::NAN),
                    cell.ppv.to_f64().unwrap_or(f64::NAN),
                    cell.regime.as_str()
                )?;
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

/// A printed table value with the half-unit rounding of its last digit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Printed {
    pub value: f64,
    pub tolerance: f64,
}

impl Printed {
    const fn new(value: f64, tolerance: f64) -> Self {
        Printed { value, tolerance }
    }

    pub fn matches(&self, x: f64) -> bool {
        (x - self.value).abs() <= self.tolerance
    }
}

/// Calibrated operating parameters of a field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldPreset {
    pub name: String,
    pub alpha: f64,
    pub power: f64,
    pub pi: f64,
    pub expected_psi: Printed,
    pub expected_ppv: Printed,
}

impl FieldPreset {
    pub fn operating_point(&self) -> OperatingPoint<f64> {
        OperatingPoint::new(self.alpha, self.power).expect("preset parameters are in domain")
    }

    /// `(Ψ, PPV, regime)` at τ = 0.95.
    pub fn evaluate(&self) -> (f64, f64, Regime) {
        let op = self.operating_point();
        let psi = model::psi(0.95, self.pi, &op).expect("preset parameters are in domain");
        let ppv = model::ppv(self.pi, op.leverage()).expect("preset parameters are in domain");
        (psi, ppv, model::classify(ppv, psi))
    }
}

/// Seven illustrative fields; PPVs printed as whole percentages, "~100%" read as ≥ 99.5%.
pub fn field_presets() -> Vec<FieldPreset> {
    let row = |name: &str, alpha, power, pi, psi: Printed, ppv: Printed| FieldPreset {
        name: name.to_string(),
        alpha,
        power,
        pi,
        expected_psi: psi,
        expected_ppv: ppv,
    };
    let pct = |p: f64| Printed::new(p / 100.0, 0.005);
    vec![
        row(
            "Candidate genes",
            0.05,
            0.50,
            0.02,
            Printed::new(93.0, 0.5),
            pct(17.0),
        ),
        row(
            "Pre-reform psych",
            0.05,
            0.35,
            0.10,
            Printed::new(24.0, 0.5),
            pct(44.0),
        ),
        row(
            "Nutritional epi",
            0.05,
            0.60,
            0.08,
            Printed::new(18.0, 0.5),
            pct(51.0),
        ),
        row(
            "Well-powered RCT",
            0.05,
            0.80,
            0.30,
            Printed::new(2.8, 0.05),
            pct(87.0),
        ),
        row(
            "Pre-reg psych",
            0.05,
            0.90,
            0.25,
            Printed::new(3.2, 0.05),
            pct(86.0),
        ),
        row(
            "GWAS",
            5e-8,
            0.80,
            1e-5,
            Printed::new(0.12, 0.005),
            pct(99.0),
        ),
        row(
            "Particle physics",
            3e-7,
            0.9999,
            0.90,
            Printed::new(6e-7, 0.5e-7),
            pct(100.0),
        ),
    ]
}
