//! `cbound`: design diagnostics and simulations from the command line.
//!
//! Each subcommand builds the matching [`cbound_service::api`] request, so the
//! numbers printed here are the ones the HTTP service returns. `--json` prints
//! the full-precision response; the default output rounds to three
//! significant figures.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage, 3 domain error, 4 model
//! violation.

mod config;
mod human;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{ArgAction, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cbound_core::collapse::{Sidedness, SpecSearchPolicy};
use cbound_core::heterogeneity::PriorDensity;
use cbound_core::landscape::AxisSpacing;
use cbound_core::report::{IdentificationStatus, ReportRequest};
use cbound_core::Error;
use cbound_service::api;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_MODEL: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "cbound",
    version,
    about = "Reliability diagnostics for significance-filtered research"
)]
struct Cli {
    /// Print the full-precision JSON response
    #[arg(long, global = true)]
    json: bool,
    /// Flat JSON object of flag values; flags on the command line win
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Leverage, PPV, Ψ, regime and limits for one design
    Diagnose {
        #[arg(long)]
        pi: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        power: f64,
        #[arg(long)]
        tau: f64,
    },
    /// Convert between PPV and replication rate
    #[command(subcommand)]
    Bridge(Bridge),
    /// Smallest all-significant replication pipeline reaching τ
    Pipeline {
        #[arg(long)]
        pi: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        power: f64,
        #[arg(long)]
        tau: f64,
        /// Also evaluate this planned depth
        #[arg(long)]
        depth: Option<u32>,
    },
    /// Effective rates under sequential specification search
    Search {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        power: f64,
        /// Attempts per study
        #[arg(long)]
        m: u32,
        /// Probability a null result gets published
        #[arg(long)]
        q: f64,
        #[arg(long)]
        pi: Option<f64>,
    },
    /// Observational collapse as sample size grows
    Confound {
        #[arg(long)]
        pi: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        theta1: f64,
        #[arg(long)]
        bias: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long, value_enum, default_value_t = Side::OneSidedPositive)]
        sidedness: Side,
        /// Comma-separated sample sizes
        #[arg(long = "n", value_delimiter = ',', action = ArgAction::Set, required = true)]
        ns: Vec<u64>,
        /// Attempts of a specification search layered on top
        #[arg(long)]
        search_m: Option<u32>,
        /// Null-publication probability of that search
        #[arg(long)]
        search_q: Option<f64>,
    },
    /// Sample size at which an n-dependent α reaches τ
    Adaptive {
        /// Threshold scale: α(n) = c / √n
        #[arg(long)]
        c: f64,
        #[arg(long)]
        theta1: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        pi: f64,
        #[arg(long)]
        tau: f64,
    },
    /// Time until a decaying prior drops below π_crit
    Lifetime {
        #[arg(long)]
        pi0: f64,
        /// Combined decay rate; or give --exhaustion and --speculation
        #[arg(long)]
        decay_rate: Option<f64>,
        #[arg(long)]
        exhaustion: Option<f64>,
        #[arg(long)]
        speculation: Option<f64>,
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        power: f64,
    },
    /// PPV across generations of a research programme
    Generations {
        /// Prior of a correct extension
        #[arg(long)]
        pi_c: f64,
        #[arg(long)]
        lambda: f64,
        /// Generation-0 PPV; or give --pi0
        #[arg(long)]
        ppv0: Option<f64>,
        /// Generation-0 prior
        #[arg(long)]
        pi0: Option<f64>,
        #[arg(long)]
        k_max: u32,
    },
    /// Expected PPV under a spread of priors
    Hetero {
        #[arg(long)]
        lambda: f64,
        /// Discrete priors as PI:WEIGHT pairs, comma separated
        #[arg(long, value_parser = parse_pair, value_delimiter = ',', action = ArgAction::Set)]
        mixture: Option<Vec<(f64, f64)>>,
        /// First Beta shape of a continuous prior density
        #[arg(long)]
        beta_a: Option<f64>,
        /// Second Beta shape
        #[arg(long)]
        beta_b: Option<f64>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Regime map over leverage and prior
    Landscape {
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        lambda_min: f64,
        #[arg(long)]
        lambda_max: f64,
        #[arg(long)]
        pi_min: f64,
        #[arg(long)]
        pi_max: f64,
        #[arg(long, default_value_t = 50)]
        resolution: usize,
        #[arg(long, value_enum, default_value_t = Spacing::Log)]
        spacing: Spacing,
        /// Write the grid as CSV to this file
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Seeded Monte Carlo check of a closed form
    #[command(subcommand)]
    Simulate(Simulate),
    /// Evidential status report for a planned study
    Report {
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        pi_low: f64,
        #[arg(long)]
        pi_high: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        power: f64,
        /// Planned replication depth
        #[arg(long)]
        depth: u32,
        #[arg(long, value_enum)]
        identification: Identification,
        /// The claim is associational, so identification is not flagged
        #[arg(long)]
        not_causal: bool,
    },
    /// Run the JSON service
    Serve {
        #[arg(long, default_value = cbound_service::DEFAULT_BIND)]
        bind: String,
        #[arg(long, default_value_t = cbound_service::DEFAULT_PORT)]
        port: u16,
    },
}

#[derive(Debug, Subcommand)]
enum Bridge {
    /// Replication rate expected from a PPV
    Predict {
        #[arg(long)]
        ppv: f64,
        #[arg(long)]
        alpha_r: f64,
        #[arg(long)]
        power_r: f64,
    },
    /// PPV implied by an observed replication rate
    Invert {
        #[arg(long)]
        rate: f64,
        #[arg(long)]
        alpha_r: f64,
        #[arg(long)]
        power_r: f64,
    },
}

#[derive(Debug, clap::Args)]
struct SimArgs {
    /// Required so every run reproduces
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
}

#[derive(Debug, Subcommand)]
enum Simulate {
    /// Share of significant findings that are true
    Ppv {
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        pi: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        power: f64,
    },
    /// Share of significant findings that replicate
    Replication {
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        pi: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        power: f64,
        #[arg(long)]
        alpha_r: f64,
        #[arg(long)]
        power_r: f64,
    },
    /// Effective α and power of a specification search
    SpecSearch {
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        power: f64,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        q: f64,
    },
    /// Programme generations; --trials is the cohort per generation
    Generations {
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        pi_c: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        ppv0: Option<f64>,
        #[arg(long)]
        pi0: Option<f64>,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        k_max: u32,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Side {
    OneSidedPositive,
    TwoSided,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Spacing {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Identification {
    Randomized,
    QuasiExperimental,
    ObservationalAdjusted,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (pi, w) = s
        .split_once(':')
        .ok_or_else(|| format!("expected PI:WEIGHT, got {s:?}"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok((num(pi)?, num(w)?))
}

enum Failure {
    Model(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Model(e)
    }
}

fn io_failure(what: &str) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{what}: {e}"))
}

/// Command tree with repeated flags overriding earlier ones at every level.
fn command() -> clap::Command {
    fn override_self(cmd: clap::Command) -> clap::Command {
        let names: Vec<String> = cmd
            .get_subcommands()
            .map(|s| s.get_name().to_string())
            .collect();
        names
            .into_iter()
            .fold(cmd.args_override_self(true), |c, n| {
                c.mut_subcommand(n, override_self)
            })
    }
    override_self(Cli::command())
}

/// Runs one invocation and returns its exit code.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let mut argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    if argv.is_empty() {
        argv.push("cbound".into());
    }
    let cmd = command();
    let argv = match config::expand(&cmd, argv) {
        Ok(a) => a,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    let cli = match cmd
        .try_get_matches_from(argv)
        .and_then(|m| Cli::from_arg_matches(&m))
    {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind::{DisplayHelp, DisplayVersion};
            let text = e.render().to_string();
            return if matches!(e.kind(), DisplayHelp | DisplayVersion) {
                let _ = write!(out, "{text}");
                EXIT_OK
            } else {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            };
        }
    };
    match execute(cli.command, cli.json, out) {
        Ok(()) => EXIT_OK,
        Err(Failure::Model(e)) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_model_violation() {
                EXIT_MODEL
            } else {
                EXIT_DOMAIN
            }
        }
        Err(Failure::Io(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_IO
        }
    }
}

fn emit<T: Serialize>(
    out: &mut dyn Write,
    json: bool,
    value: &T,
    human: impl FnOnce(&T) -> String,
) -> Result<(), Failure> {
    let text = if json {
        serde_json::to_string_pretty(value).map_err(|e| Failure::Io(e.to_string()))? + "\n"
    } else {
        human(value)
    };
    out.write_all(text.as_bytes()).map_err(io_failure("stdout"))
}

fn execute(cmd: Cmd, json: bool, out: &mut dyn Write) -> Result<(), Failure> {
    match cmd {
        Cmd::Diagnose {
            pi,
            alpha,
            power,
            tau,
        } => {
            let r = api::diagnose(&api::DiagnoseRequest {
                pi,
                alpha,
                power,
                tau,
            })?;
            emit(out, json, &r, human::diagnosis)
        }
        Cmd::Bridge(Bridge::Predict {
            ppv,
            alpha_r,
            power_r,
        }) => {
            let r = api::bridge_predict(&api::BridgePredictRequest {
                ppv,
                alpha_r,
                power_r,
            })?;
            emit(out, json, &r, |r| {
                human::lines(&[("replication rate", human::sig3(r.replication_rate))])
            })
        }
        Cmd::Bridge(Bridge::Invert {
            rate,
            alpha_r,
            power_r,
        }) => {
            let r = api::bridge_invert(&api::BridgeInvertRequest {
                rate,
                alpha_r,
                power_r,
            })?;
            emit(out, json, &r, |r| {
                human::lines(&[("implied PPV", human::sig3(r.ppv))])
            })
        }
        Cmd::Pipeline {
            pi,
            alpha,
            power,
            tau,
            depth,
        } => {
            let r = api::pipeline(&api::PipelineRequest {
                pi,
                alpha,
                power,
                tau,
                depth,
            })?;
            emit(out, json, &r, human::pipeline)
        }
        Cmd::Search {
            alpha,
            power,
            m,
            q,
            pi,
        } => {
            let r = api::search(&api::SearchRequest {
                alpha,
                power,
                m,
                q,
                pi,
            })?;
            emit(out, json, &r, human::search)
        }
        Cmd::Confound {
            pi,
            alpha,
            theta1,
            bias,
            sigma,
            sidedness,
            ns,
            search_m,
            search_q,
        } => {
            let search = match (search_m, search_q) {
                (Some(m), Some(q)) => Some(SpecSearchPolicy::new(m, q)?),
                (None, None) => None,
                _ => return Err(Error::Domain("give both --search-m and --search-q".into()).into()),
            };
            let sidedness = match sidedness {
                Side::OneSidedPositive => Sidedness::OneSidedPositive,
                Side::TwoSided => Sidedness::TwoSided,
            };
            let r = api::confound(&api::ConfoundRequest {
                pi,
                alpha,
                theta1,
                bias,
                sigma,
                sidedness,
                ns,
                search,
            })?;
            emit(out, json, &r, human::confound)
        }
        Cmd::Adaptive {
            c,
            theta1,
            sigma,
            pi,
            tau,
        } => {
            let r = api::adaptive(&api::AdaptiveRequest {
                c,
                theta1,
                sigma,
                pi,
                tau,
            })?;
            emit(out, json, &r, human::adaptive)
        }
        Cmd::Lifetime {
            pi0,
            decay_rate,
            exhaustion,
            speculation,
            tau,
            alpha,
            power,
        } => {
            let r = api::lifetime(&api::LifetimeRequest {
                pi0,
                decay_rate,
                exhaustion,
                speculation,
                tau,
                alpha,
                power,
            })?;
            emit(out, json, &r, |r| {
                human::lines(&[
                    ("decay rate", human::sig3(r.decay_rate)),
                    ("π_crit", human::sig3(r.pi_crit)),
                    ("lifetime", human::sig3(r.lifetime)),
                ])
            })
        }
        Cmd::Generations {
            pi_c,
            lambda,
            ppv0,
            pi0,
            k_max,
        } => {
            let r = api::generations(&api::GenerationsRequest {
                pi_c,
                lambda,
                ppv0,
                pi0,
                k_max,
            })?;
            emit(out, json, &r, human::generations)
        }
        Cmd::Hetero {
            lambda,
            mixture,
            beta_a,
            beta_b,
            tol,
        } => {
            let density = match (beta_a, beta_b) {
                (Some(a), Some(b)) => Some(PriorDensity::new(a, b)?),
                (None, None) => None,
                _ => return Err(Error::Domain("give both --beta-a and --beta-b".into()).into()),
            };
            let r = api::hetero(&api::HeteroRequest {
                lambda,
                mixture,
                density,
                tol,
            })?;
            emit(out, json, &r, human::hetero)
        }
        Cmd::Landscape {
            tau,
            lambda_min,
            lambda_max,
            pi_min,
            pi_max,
            resolution,
            spacing,
            csv,
        } => {
            let spacing = match spacing {
                Spacing::Log => AxisSpacing::Log,
                Spacing::Linear => AxisSpacing::Linear,
            };
            let grid = api::landscape(&api::LandscapeRequest {
                tau,
                lambda_min,
                lambda_max,
                pi_min,
                pi_max,
                resolution,
                spacing,
            })?;
            match &csv {
                Some(path) => {
                    let shown = path.display().to_string();
                    let file = File::create(path).map_err(io_failure(&shown))?;
                    let mut w = BufWriter::new(file);
                    grid.write_csv(&mut w).map_err(io_failure(&shown))?;
                    w.flush().map_err(io_failure(&shown))?;
                    emit(out, json, &grid, |g| human::landscape_summary(g, &shown))
                }
                None if json => emit(out, json, &grid, |_| String::new()),
                None => out
                    .write_all(grid.to_csv_string().as_bytes())
                    .map_err(io_failure("stdout")),
            }
        }
        Cmd::Simulate(sim) => {
            let req = simulate_request(sim);
            let r = api::simulate(&req)?;
            emit(out, json, &r, human::simulation)
        }
        Cmd::Report {
            tau,
            pi_low,
            pi_high,
            alpha,
            power,
            depth,
            identification,
            not_causal,
        } => {
            let identification_status = match identification {
                Identification::Randomized => IdentificationStatus::Randomized,
                Identification::QuasiExperimental => IdentificationStatus::QuasiExperimental,
                Identification::ObservationalAdjusted => {
                    IdentificationStatus::ObservationalAdjusted
                }
            };
            let r = api::evidential_report(&ReportRequest {
                tau,
                pi_low,
                pi_high,
                alpha,
                power,
                planned_depth: depth,
                identification_status,
                causal_claim: !not_causal,
            })?;
            emit(out, json, &r, human::report)
        }
        Cmd::Serve { bind, port } => {
            let rt = tokio::runtime::Runtime::new().map_err(io_failure("runtime"))?;
            let _ = writeln!(out, "listening on http://{bind}:{port}");
            let _ = out.flush();
            rt.block_on(cbound_service::serve(&bind, port))
                .map_err(io_failure("serve"))
        }
    }
}

fn simulate_request(sim: Simulate) -> api::SimulateRequest {
    let (s, experiment) = match sim {
        Simulate::Ppv {
            sim,
            pi,
            alpha,
            power,
        } => (sim, api::Experiment::Ppv { pi, alpha, power }),
        Simulate::Replication {
            sim,
            pi,
            alpha,
            power,
            alpha_r,
            power_r,
        } => (
            sim,
            api::Experiment::Replication {
                pi,
                alpha,
                power,
                alpha_r,
                power_r,
            },
        ),
        Simulate::SpecSearch {
            sim,
            alpha,
            power,
            m,
            q,
        } => (sim, api::Experiment::SpecSearch { alpha, power, m, q }),
        Simulate::Generations {
            sim,
            pi_c,
            lambda,
            ppv0,
            pi0,
            alpha,
            k_max,
        } => (
            sim,
            api::Experiment::Generations {
                pi_c,
                lambda,
                ppv0,
                pi0,
                alpha,
                k_max,
            },
        ),
    };
    api::SimulateRequest {
        seed: s.seed,
        trials: s.trials,
        experiment,
    }
}
