use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use svcauction_core::harness::{
    designated_buyer, deviation_probe, load_config, payoff_surface, run_band_sweep, to_csv_string,
    AgentSelector, GridSpec, ProbeGrid, DEFAULT_TRIALS,
};
use svcauction_core::mechanisms::{audit_outcome, Mechanism, ECONOMIC_TOLERANCE};
use svcauction_core::{
    check_feasibility, generate_instance, plan_throughput, solve_p1_exact, solve_p1_greedy, AllocationPlan,
    NetworkInstance, ScenarioConfig, SizeLimits,
};

/// Exit status for a run that completed but broke an invariant.
const VIOLATION: u8 = 2;

#[derive(Parser)]
#[command(
    name = "svcauction",
    version,
    about = "End-to-end service auctions over wireless mesh networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Gen {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the throughput-maximizing network problem.
    Solve {
        #[command(flatten)]
        source: InstanceArgs,
        #[arg(long, value_enum, default_value_t = Solver::Greedy)]
        solver: Solver,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Audit a plan against every network constraint.
    Check {
        #[command(flatten)]
        source: InstanceArgs,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one auction mechanism and audit its outcome.
    Auction {
        #[command(flatten)]
        source: InstanceArgs,
        #[arg(long, default_value = "double")]
        mechanism: Mechanism,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Throughput versus number of bands.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Band counts: `1..6`, `1,2,4` or a single number.
        #[arg(long, default_value = "1..6", value_parser = parse_bands)]
        bands: BandList,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        /// Per-trial rows as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-band-count means as CSV.
        #[arg(long)]
        means: Option<PathBuf>,
    },
    /// Buyer utility over a grid of bids for its two requests.
    Surface {
        #[command(flatten)]
        source: InstanceArgs,
        /// Buyer node id; defaults to the lowest-id buyer with two requests.
        #[arg(long)]
        buyer: Option<u32>,
        #[arg(long, default_value_t = 41)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Utility of one agent under unilateral misreports.
    Probe {
        #[command(flatten)]
        source: InstanceArgs,
        /// `buyer:<i>:<k>` or `seller:<j>:<i>:<k>`.
        #[arg(long)]
        agent: AgentSelector,
        #[arg(long, default_value = "double")]
        mechanism: Mechanism,
        /// Number of misreports over [0, 2 x truthful value].
        #[arg(long, default_value_t = 21)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-report utilities as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario config (JSON); the reference scenario when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut config = match &self.config {
            Some(path) => load_config(path).with_context(|| format!("reading {}", path.display()))?,
            None => ScenarioConfig::reference(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        Ok(config)
    }
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance file (JSON); otherwise one is generated from the scenario.
    #[arg(long, conflicts_with_all = ["config", "seed"])]
    instance: Option<PathBuf>,
    #[command(flatten)]
    scenario: ScenarioArgs,
}

impl InstanceArgs {
    fn load(&self) -> Result<NetworkInstance> {
        match &self.instance {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                NetworkInstance::from_json(&text).with_context(|| format!("parsing {}", path.display()))
            }
            None => Ok(generate_instance(&self.scenario.load()?)?),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Solver {
    Greedy,
    Exact,
}

#[derive(Clone, Debug, PartialEq)]
struct BandList(Vec<usize>);

fn parse_bands(s: &str) -> Result<BandList, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|e| format!("bad band count `{t}`: {e}"))
    };
    if let Some((lo, hi)) = s.split_once("..") {
        let (lo, hi) = (num(lo)?, num(hi.trim_start_matches('='))?);
        if lo > hi {
            return Err(format!("empty band range {s}"));
        }
        return Ok(BandList((lo..=hi).collect()));
    }
    s.split(',').map(num).collect::<Result<_, _>>().map(BandList)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(out, &text)
}

fn violation(problems: &[String]) -> ExitCode {
    for p in problems {
        eprintln!("invariant violated: {p}");
    }
    ExitCode::from(VIOLATION)
}

fn status(problems: Vec<String>) -> ExitCode {
    if problems.is_empty() {
        ExitCode::SUCCESS
    } else {
        violation(&problems)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen { scenario, out } => {
            let inst = generate_instance(&scenario.load()?)?;
            emit_json(out.as_deref(), &inst)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve { source, solver, out } => {
            let inst = source.load()?;
            let plan = match solver {
                Solver::Greedy => solve_p1_greedy(&inst),
                Solver::Exact => solve_p1_exact(&inst, SizeLimits::default())?,
            };
            emit_json(out.as_deref(), &plan)?;
            eprintln!("throughput {} Mbps", plan_throughput(&plan, &inst));
            let report = check_feasibility(&inst, &plan)?;
            Ok(status(if report.pass {
                vec![]
            } else {
                vec![report.to_string()]
            }))
        }
        Command::Check { source, plan, out } => {
            let inst = source.load()?;
            let text = fs::read_to_string(&plan).with_context(|| format!("reading {}", plan.display()))?;
            let plan = AllocationPlan::from_json(&text)?;
            let report = check_feasibility(&inst, &plan)?;
            emit_json(out.as_deref(), &report)?;
            Ok(status(if report.pass {
                vec![]
            } else {
                vec![report.to_string()]
            }))
        }
        Command::Auction {
            source,
            mechanism,
            out,
        } => {
            let inst = source.load()?;
            let outcome = mechanism.run(&inst)?;
            emit_json(out.as_deref(), &outcome)?;
            let audit = audit_outcome(&inst, &outcome)?;
            eprintln!(
                "{} trades, revenue {}, throughput {} Mbps",
                outcome.trades.len(),
                outcome.provider_revenue,
                outcome.throughput_mbps(&inst)
            );
            Ok(status(audit.problems))
        }
        Command::Sweep {
            scenario,
            bands,
            trials,
            out,
            means,
        } => {
            let result = run_band_sweep(&scenario.load()?, &bands.0, trials)?;
            emit(out.as_deref(), &to_csv_string(&result)?)?;
            if let Some(path) = means {
                fs::write(&path, to_csv_string(&result.means_table())?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            let problems = result
                .rows
                .iter()
                .filter(|r| r.auction_throughput_mbps > r.p1_throughput_mbps)
                .map(|r| {
                    format!(
                        "auction above P1 throughput at {} bands, seed {}",
                        r.band_count, r.trial_seed
                    )
                })
                .collect();
            Ok(status(problems))
        }
        Command::Surface {
            source,
            buyer,
            grid,
            out,
        } => {
            let inst = source.load()?;
            let Some(buyer) = buyer.or_else(|| designated_buyer(&inst)) else {
                bail!("no buyer with exactly two requests");
            };
            let surface = payoff_surface(&inst, buyer, GridSpec::with_points(grid))?;
            emit(out.as_deref(), &to_csv_string(&surface)?)?;
            let (truthful, best) = (surface.truthful_utility(), surface.max_utility());
            eprintln!("buyer {buyer}: truthful utility {truthful}, grid maximum {best}");
            let mut problems = vec![];
            if best > truthful + ECONOMIC_TOLERANCE {
                let at = surface.argmax();
                problems.push(format!(
                    "bids ({}, {}) beat truthful bidding by {}",
                    at.bid1,
                    at.bid2,
                    best - truthful
                ));
            }
            Ok(status(problems))
        }
        Command::Probe {
            source,
            agent,
            mechanism,
            grid,
            out,
            csv,
        } => {
            let inst = source.load()?;
            let report = deviation_probe(&inst, agent, &ProbeGrid::uniform(grid), mechanism)?;
            emit_json(out.as_deref(), &report)?;
            if let Some(path) = csv {
                fs::write(&path, to_csv_string(&report)?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            let mut problems = vec![];
            if report.max_gain > ECONOMIC_TOLERANCE {
                problems.push(format!(
                    "{agent} gains {} by reporting {} instead of {}",
                    report.max_gain, report.best_report, report.truthful_report
                ));
            }
            Ok(status(problems))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
