//! Seeded brute-force simulations of the closed forms.
//!
//! # Generator
//!
//! Every stream is xoshiro256++ whose 256-bit state is filled by SplitMix64
//! from a 64-bit seed (`Xoshiro256PlusPlus::seed_from_u64`). A uniform draw is
//! `(next_u64() >> 11) · 2⁻⁵³` and a Bernoulli(p) draw is `uniform < p`.
//! Independent sub-streams of one configuration use the seed
//! `seed + (index + 1) · 0x9E37_79B9_7F4A_7C15 (mod 2⁶⁴)`, which SplitMix64
//! scrambles into unrelated states. The same recipe reproduces every estimate
//! bit for bit in any language.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::collapse::SpecSearchPolicy;
use crate::dynamics::ProgrammeState;
use crate::error::{Error, Result};
use crate::model::{check_open, OperatingPoint};
use crate::replication::ReplicationDesign;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed and number of trials of one simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub trials: u64,
}

impl SimConfig {
    pub fn new(seed: u64, trials: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::domain("trials must be at least 1"));
        }
        Ok(SimConfig { seed, trials })
    }

    fn validate(&self) -> Result<()> {
        Self::new(self.seed, self.trials).map(|_| ())
    }

    /// Configuration of sub-stream `index`.
    pub fn substream(&self, index: u64) -> SimConfig {
        SimConfig {
            seed: self
                .seed
                .wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)),
            trials: self.trials,
        }
    }

    fn rng(&self) -> Stream {
        Stream(Xoshiro256PlusPlus::seed_from_u64(self.seed))
    }
}

struct Stream(Xoshiro256PlusPlus);

impl Stream {
    #[inline]
    fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Uniform index in `0..n` by rejection on the top bits.
    fn below(&mut self, n: u64) -> u64 {
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let x = self.0.next_u64();
            if x < zone {
                return x % n;
            }
        }
    }
}

/// Proportion estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub estimate: f64,
    pub standard_error: f64,
    /// Size of the denominator the proportion is taken over.
    pub trials: u64,
}

impl SimEstimate {
    /// Is `value` within `k` standard errors? A zero standard error demands equality
    /// up to one part in `1e-12`.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        let tol = (k * self.standard_error).max(1e-12);
        (self.estimate - value).abs() <= tol
    }

    /// Distance from `value` in standard errors.
    pub fn z_distance(&self, value: f64) -> f64 {
        (self.estimate - value).abs() / self.standard_error
    }
}

/// Hit count over a denominator. Partial results pool by adding counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub hits: u64,
    pub total: u64,
}

impl Counts {
    pub fn pool(self, other: Counts) -> Counts {
        Counts {
            hits: self.hits + other.hits,
            total: self.total + other.total,
        }
    }

    pub fn estimate(&self, what: &str) -> Result<SimEstimate> {
        if self.total == 0 {
            return Err(Error::InsufficientSample(format!("no {what} drawn")));
        }
        let p = self.hits as f64 / self.total as f64;
        Ok(SimEstimate {
            estimate: p,
            standard_error: (p * (1.0 - p) / self.total as f64).sqrt(),
            trials: self.total,
        })
    }
}

fn ppv_counts(rng: &mut Stream, trials: u64, pi: f64, alpha: f64, power: f64) -> Counts {
    let mut c = Counts::default();
    for _ in 0..trials {
        let truth = rng.bernoulli(pi);
        let sig = rng.bernoulli(if truth { power } else { alpha });
        if sig {
            c.total += 1;
            c.hits += truth as u64;
        }
    }
    c
}

/// Share of true hypotheses among significant results.
pub fn simulate_ppv(cfg: &SimConfig, pi: f64, op: &OperatingPoint<f64>) -> Result<SimEstimate> {
    cfg.validate()?;
    check_open("prior", pi)?;
    ppv_counts(&mut cfg.rng(), cfg.trials, pi, op.alpha(), op.power())
        .estimate("significant results")
}

/// [`simulate_ppv`] split over `parts` sub-streams run on separate threads.
///
/// Deterministic for a given `(cfg, parts)`; differs from the single-stream run.
pub fn simulate_ppv_partitioned(
    cfg: &SimConfig,
    parts: u64,
    pi: f64,
    op: &OperatingPoint<f64>,
) -> Result<SimEstimate> {
    cfg.validate()?;
    check_open("prior", pi)?;
    if parts == 0 {
        return Err(Error::domain("parts must be at least 1"));
    }
    let (alpha, power) = (op.alpha(), op.power());
    let shares: Vec<u64> = (0..parts)
        .map(|i| cfg.trials / parts + u64::from(i < cfg.trials % parts))
        .collect();
    let pooled = std::thread::scope(|scope| {
        let handles: Vec<_> = shares
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let sub = cfg.substream(i as u64);
                scope.spawn(move || ppv_counts(&mut sub.rng(), n, pi, alpha, power))
            })
            .collect();
        // joined in index order so pooling is deterministic
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .fold(Counts::default(), Counts::pool)
    });
    pooled.estimate("significant results")
}

/// Share of significant replications among significant originals.
pub fn simulate_replication(
    cfg: &SimConfig,
    pi: f64,
    op: &OperatingPoint<f64>,
    design: &ReplicationDesign<f64>,
) -> Result<SimEstimate> {
    cfg.validate()?;
    check_open("prior", pi)?;
    let mut rng = cfg.rng();
    let mut c = Counts::default();
    for _ in 0..cfg.trials {
        let truth = rng.bernoulli(pi);
        if !rng.bernoulli(if truth { op.power() } else { op.alpha() }) {
            continue;
        }
        c.total += 1;
        let rep = rng.bernoulli(if truth {
            design.power_r()
        } else {
            design.alpha_r()
        });
        c.hits += rep as u64;
    }
    c.estimate("significant originals")
}

/// Runs the sequential search protocol once; true if a significant result is published.
fn search_once(rng: &mut Stream, rate: f64, policy: &SpecSearchPolicy<f64>) -> bool {
    for _ in 0..policy.m() {
        if rng.bernoulli(rate) {
            return true;
        }
        if rng.bernoulli(policy.q()) {
            return false;
        }
    }
    false
}

/// Publication rates of significant results under the null and the alternative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchEstimates {
    pub alpha_eff: SimEstimate,
    pub power_eff: SimEstimate,
}

/// Simulates `trials` searches under each hypothesis, on two independent sub-streams.
pub fn simulate_spec_search(
    cfg: &SimConfig,
    op: &OperatingPoint<f64>,
    policy: &SpecSearchPolicy<f64>,
) -> Result<SearchEstimates> {
    cfg.validate()?;
    let run = |sub: SimConfig, rate: f64| {
        let mut rng = sub.rng();
        let hits = (0..sub.trials)
            .filter(|_| search_once(&mut rng, rate, policy))
            .count() as u64;
        Counts {
            hits,
            total: sub.trials,
        }
    };
    Ok(SearchEstimates {
        alpha_eff: run(cfg.substream(0), op.alpha()).estimate("null searches")?,
        power_eff: run(cfg.substream(1), op.power()).estimate("alternative searches")?,
    })
}

/// Empirical PPV per generation of a simulated research programme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationSim {
    /// Generation `k` at index `k`.
    pub ppv: Vec<SimEstimate>,
    /// First generation that produced no significant result, if any.
    pub extinct_at: Option<u32>,
}

/// Population simulation of the generational dynamics.
///
/// Each generation tests `cfg.trials` hypotheses. Generation 0 draws truth at the
/// prior that yields `state.ppv0`; every later hypothesis is a follow-up of a
/// parent drawn uniformly from the previous generation's significant findings and
/// is true with probability `π_c` when that parent is true, never otherwise.
/// The study level is `alpha` and the power is `Λ·alpha`, which must not exceed one.
pub fn simulate_generations(
    cfg: &SimConfig,
    state: &ProgrammeState<f64>,
    alpha: f64,
    k_max: u32,
) -> Result<GenerationSim> {
    cfg.validate()?;
    check_open("alpha", alpha)?;
    let power = state.lambda() * alpha;
    let op = OperatingPoint::new(alpha, power).map_err(|_| {
        Error::domain(format!(
            "leverage {} with alpha {alpha} implies power above 1",
            state.lambda()
        ))
    })?;
    let ppv0 = state.ppv0();
    let prior0 = ppv0 / (ppv0 + state.lambda() * (1.0 - ppv0));

    let mut rng = cfg.rng();
    let mut out = Vec::with_capacity(k_max as usize + 1);
    // (true, total) significant findings of the previous generation
    let mut parents: Option<(u64, u64)> = None;
    for k in 0..=k_max {
        let mut c = Counts::default();
        for _ in 0..cfg.trials {
            let truth = match parents {
                None => rng.bernoulli(prior0),
                Some((true_parents, total)) => {
                    let parent_true = rng.below(total) < true_parents;
                    parent_true && rng.bernoulli(state.pi_c())
                }
            };
            if rng.bernoulli(if truth { op.power() } else { op.alpha() }) {
                c.total += 1;
                c.hits += truth as u64;
            }
        }
        if c.total == 0 {
            return Ok(GenerationSim {
                ppv: out,
                extinct_at: Some(k),
            });
        }
        out.push(c.estimate("significant results")?);
        parents = Some((c.hits, c.total));
    }
    Ok(GenerationSim {
        ppv: out,
        extinct_at: None,
    })
}
