//! Reliability diagnostics for significance-filtered literatures.
//!
//! A field is described by the prior `π` that a tested hypothesis is true and
//! by the operating point `(α, power)` of its studies. Everything else follows
//! from the leverage `Λ = power/α`: the PPV of significant findings, whether a
//! target reliability `τ` is attainable, how replication, specification search
//! and confounding move `Λ`, and how priors evolve across generations.
//!
//! Closed forms are generic over [`Real`]; the `*64` aliases fix `f64`.
//! Simulations in [`montecarlo`] are `f64` only.
//!
//! ```
//! use cbound_core::{diagnose, OperatingPoint, Regime, StudyContext};
//!
//! let d = diagnose(&StudyContext::new(0.05_f64, 0.95)?, &OperatingPoint::new(0.05, 0.5)?)?;
//! assert_eq!(d.regime, Regime::MajorityFalse);
//! assert!((d.psi - 36.1).abs() < 0.05);
//! # Ok::<(), cbound_core::Error>(())
//! ```

pub mod collapse;
pub mod dynamics;
mod error;
pub mod heterogeneity;
pub mod landscape;
pub mod model;
pub mod montecarlo;
pub mod numerics;
pub mod replication;
pub mod report;
mod scalar;

pub use error::{Error, Result};
pub use model::{diagnose, Diagnosis, OperatingPoint, PipelineDepth, Regime, StudyContext};
pub use scalar::Real;

pub type OperatingPoint64 = model::OperatingPoint<f64>;
pub type StudyContext64 = model::StudyContext<f64>;
pub type Diagnosis64 = model::Diagnosis<f64>;
pub type ReplicationDesign64 = replication::ReplicationDesign<f64>;
pub type PipelinePlan64 = replication::PipelinePlan<f64>;
pub type SpecSearchPolicy64 = collapse::SpecSearchPolicy<f64>;
pub type ConfoundingModel64 = collapse::ConfoundingModel<f64>;
pub type AdaptiveSchedule64 = collapse::AdaptiveSchedule<f64>;
pub type FieldDecay64 = dynamics::FieldDecay<f64>;
pub type ProgrammeState64 = dynamics::ProgrammeState<f64>;
pub type PriorMixture64 = heterogeneity::PriorMixture<f64>;
pub type PriorDensity64 = heterogeneity::PriorDensity<f64>;
pub type LandscapeGrid64 = landscape::LandscapeGrid<f64>;
pub type ReportRequest64 = report::ReportRequest<f64>;
