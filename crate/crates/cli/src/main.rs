//! `nimsa`: runs the self-test and the four benchmark experiments, writing CSV.
//!
//! Exit codes: 0 success, 1 a self-test property failed, 2 bad configuration.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use nimsa_core::harness::{
    self, AuthBenchParams, CsvRow, Fault, HandoverBenchParams, HarnessError, LatencyBenchParams, ThroughputBenchParams,
};
use nimsa_core::simnet::{metrics::mean, HandoverMode, LinkProfile, Scenario, Scheme};
use nimsa_core::SecurityLevel;

#[derive(Parser)]
#[command(name = "nimsa", version, about = "Identity-based multihoming authentication: self-test and benchmarks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check pairing, key agreement, PRF, wire format and endpoint behavior.
    Selftest(SelftestArgs),
    /// Authentication latency over a loss x delay grid.
    AuthBench(AuthArgs),
    /// Handover latency of both NIMSA modes and MOBIKE.
    HandoverBench(HandoverArgs),
    /// Probe one-way delay over multipath links.
    LatencyBench(LatencyArgs),
    /// Goodput after reordering at a fixed offered load.
    ThroughputBench(ThroughputArgs),
}

#[derive(Args)]
struct Common {
    /// Scenario JSON supplying links, costs and IKE timers.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base RNG seed; defaults to the scenario's seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn scenario(&self, fallback: Scenario) -> Result<(Scenario, u64), HarnessError> {
        let sc = match &self.config {
            Some(p) => Scenario::from_path(p)?,
            None => fallback,
        };
        let seed = self.seed.unwrap_or(sc.seed);
        Ok((sc, seed))
    }
}

#[derive(Args)]
struct SelftestArgs {
    /// Break something on purpose; the run must then fail.
    #[arg(long = "inject", value_parser = parse_fault)]
    faults: Vec<Fault>,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "standard", value_parser = parse_level)]
    security_level: SecurityLevel,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Nimsa,
    Ikev2,
    Both,
}

impl SchemeArg {
    fn schemes(self) -> Vec<Scheme> {
        match self {
            SchemeArg::Nimsa => vec![Scheme::Nimsa],
            SchemeArg::Ikev2 => vec![Scheme::Ikev2],
            SchemeArg::Both => vec![Scheme::Nimsa, Scheme::Ikev2],
        }
    }
}

#[derive(Args)]
struct AuthArgs {
    #[command(flatten)]
    common: Common,
    /// Loss percentages applied to every link.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 5.0, 10.0, 15.0])]
    loss: Vec<f64>,
    /// One-way delay sweep `start:end:step` in ms.
    #[arg(long, default_value = "10:100:10")]
    delay_sweep: String,
    #[arg(long, default_value_t = 100)]
    trials: u32,
    #[arg(long, value_enum, default_value_t = SchemeArg::Both)]
    scheme: SchemeArg,
    #[arg(long, default_value = "auth_bench.csv")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Transmission,
    Notification,
    Both,
}

#[derive(Args)]
struct HandoverArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = ModeArg::Both)]
    mode: ModeArg,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 5.0, 10.0, 15.0])]
    loss: Vec<f64>,
    /// One-way link delay in ms.
    #[arg(long, default_value_t = 50.0)]
    delay: f64,
    #[arg(long, default_value_t = 100)]
    trials: u32,
    /// Skip the MOBIKE baseline rows.
    #[arg(long)]
    no_mobike: bool,
    #[arg(long, default_value = "handover_bench.csv")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum LinksArg {
    /// The three heterogeneous links of the reference topology.
    Table1,
    /// Whatever `--config` lists.
    Config,
}

#[derive(Args)]
struct LatencyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = LinksArg::Table1)]
    links: LinksArg,
    /// Seconds of probing.
    #[arg(long, default_value_t = 60.0)]
    duration: f64,
    /// Milliseconds between probes.
    #[arg(long, default_value_t = 1000.0)]
    probe_interval: f64,
    #[arg(long, default_value = "latency.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct ThroughputArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = LinksArg::Table1)]
    links: LinksArg,
    /// Offered load, e.g. `10mbps`.
    #[arg(long, default_value = "10mbps")]
    offered: String,
    /// Seconds of traffic.
    #[arg(long, default_value_t = 30.0)]
    duration: f64,
    /// Include the unauthenticated control run.
    #[arg(long)]
    with_control: bool,
    #[arg(long, default_value = "throughput.csv")]
    out: PathBuf,
    #[arg(long, default_value = "throughput_summary.csv")]
    summary_out: PathBuf,
}

fn parse_fault(s: &str) -> Result<Fault, String> {
    s.parse()
}

fn parse_level(s: &str) -> Result<SecurityLevel, String> {
    s.parse().map_err(|e: nimsa_core::IdnikeError| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let config = e.downcast_ref::<HarnessError>().is_some_and(HarnessError::is_config);
            ExitCode::from(if config { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.cmd {
        Cmd::Selftest(a) => selftest(a),
        Cmd::AuthBench(a) => auth(a),
        Cmd::HandoverBench(a) => handover(a),
        Cmd::LatencyBench(a) => latency(a),
        Cmd::ThroughputBench(a) => throughput(a),
    }
}

fn selftest(a: SelftestArgs) -> anyhow::Result<ExitCode> {
    let results = harness::selftest(a.security_level, a.samples, a.seed, &a.faults);
    for r in &results {
        println!("{:<18} {}  {}", r.name, if r.passed { "PASS" } else { "FAIL" }, r.detail);
    }
    Ok(if results.iter().all(|r| r.passed) { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn write<T: CsvRow>(path: &Path, rows: &[T]) -> anyhow::Result<()> {
    harness::write_csv(path, rows).with_context(|| format!("writing {}", path.display()))?;
    eprintln!("wrote {} rows to {}", rows.len(), path.display());
    Ok(())
}

fn auth(a: AuthArgs) -> anyhow::Result<ExitCode> {
    let defaults = AuthBenchParams::default();
    let (base, seed) = a.common.scenario(defaults.base.clone())?;
    let p = AuthBenchParams {
        losses_pct: a.loss,
        delays_ms: harness::parse_sweep(&a.delay_sweep)?,
        trials: a.trials,
        schemes: a.scheme.schemes(),
        seed,
        base,
    };
    let rows = harness::auth_bench(&p)?;
    for s in &p.schemes {
        let m = mean(rows.iter().filter(|r| r.scheme == *s).filter_map(|r| r.auth_latency_ms));
        println!("{s}: mean auth latency {:.3} ms", m.unwrap_or(f64::NAN));
    }
    write(&a.out, &rows)?;
    Ok(ExitCode::SUCCESS)
}

fn handover(a: HandoverArgs) -> anyhow::Result<ExitCode> {
    let defaults = HandoverBenchParams::default();
    let (base, seed) = a.common.scenario(defaults.base.clone())?;
    let modes = match a.mode {
        ModeArg::Transmission => vec![HandoverMode::Transmission],
        ModeArg::Notification => vec![HandoverMode::Notification],
        ModeArg::Both => vec![HandoverMode::Transmission, HandoverMode::Notification],
    };
    let p = HandoverBenchParams {
        modes,
        include_mobike: !a.no_mobike,
        losses_pct: a.loss,
        delay_ms: a.delay,
        trials: a.trials,
        seed,
        base,
        ..defaults
    };
    let rows = harness::handover_bench(&p)?;
    let mut labels: Vec<&str> = rows.iter().map(|r| r.mode).collect();
    labels.dedup();
    for l in labels {
        let m = mean(rows.iter().filter(|r| r.mode == l).filter_map(|r| r.handover_latency_ms));
        println!("{l}: mean handover latency {:.3} ms", m.unwrap_or(f64::NAN));
    }
    write(&a.out, &rows)?;
    Ok(ExitCode::SUCCESS)
}

fn links_base(links: LinksArg, common: &Common) -> Result<(Scenario, u64), HarnessError> {
    let (mut base, seed) = common.scenario(Scenario::default())?;
    match links {
        LinksArg::Table1 => base.links = LinkProfile::table1(),
        LinksArg::Config if common.config.is_none() => {
            return Err(HarnessError::Config("--links config requires --config".into()));
        }
        LinksArg::Config => {}
    }
    Ok((base, seed))
}

fn latency(a: LatencyArgs) -> anyhow::Result<ExitCode> {
    let (base, seed) = links_base(a.links, &a.common)?;
    let p = LatencyBenchParams {
        duration_s: a.duration,
        probe_interval_ms: a.probe_interval,
        seed,
        base,
        ..Default::default()
    };
    let rows = harness::latency_bench(&p)?;
    for s in &p.schemes {
        let m = mean(rows.iter().filter(|r| r.scheme == *s).map(|r| r.owd_ms));
        println!("{s}: mean one-way delay {:.3} ms", m.unwrap_or(f64::NAN));
    }
    write(&a.out, &rows)?;
    Ok(ExitCode::SUCCESS)
}

fn throughput(a: ThroughputArgs) -> anyhow::Result<ExitCode> {
    let (base, seed) = links_base(a.links, &a.common)?;
    let mut schemes = vec![Scheme::Nimsa, Scheme::Ikev2];
    if a.with_control {
        schemes.push(Scheme::None);
    }
    let p = ThroughputBenchParams {
        schemes,
        offered_bps: harness::parse_rate_bps(&a.offered)?,
        duration_s: a.duration,
        seed,
        base,
        ..Default::default()
    };
    let report = harness::throughput_bench(&p)?;
    for s in &report.summary {
        println!(
            "{}: mean goodput {:.3} Mbps of {:.3} offered (efficiency {:.3})",
            s.scheme, s.mean_goodput_mbps, s.offered_mbps, s.efficiency
        );
    }
    write(&a.out, &report.rows)?;
    write(&a.summary_out, &report.summary)?;
    Ok(ExitCode::SUCCESS)
}
