//! `infoprop` command line.
//!
//! Exit codes: 0 success, 1 a claimed property failed, 2 usage or input error.

use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::generators::{fixture, gen_graph, GraphFamily, FIXTURES};
use crate::mechanisms::{
    ChildOrdering, FixedRewardConfig, MechanismConfig, SchemeConfig, SplitFn, StarterConfig, UniformConfig,
};
use crate::network::{validate_network, Network};
use crate::properties::{run_property_suite, SuiteOptions, TimeEfficiencyOptions, DEFAULT_ENUMERATION_CAP};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "infoprop",
    version,
    about = "Reward mechanisms for information propagation under a fixed budget"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a reward vector for one network.
    Run,
    /// Certify properties on every input network; writes JSON lines.
    Check,
    /// Write a fixture or a generated network.
    Gen(GenArgs),
    /// Write every fixture as <name>.json into the --output directory.
    Fixtures,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MechanismKind {
    Starter,
    Scheme,
    Fixed,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitKind {
    Identity,
    Shifted,
    Exp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrderingKind {
    Arrival,
    Id,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyKind {
    Chain,
    Star,
    LayeredRandom,
    SingleChainTail,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Network JSON file; `check` accepts it several times.
    #[arg(long, global = true, value_name = "PATH")]
    pub input: Vec<PathBuf>,
    /// Output file (directory for `fixtures`); stdout when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Mechanism to run; `check` accepts it several times. Defaults to scheme.
    #[arg(long, global = true, value_enum)]
    pub mechanism: Vec<MechanismKind>,
    /// Scheme: fraction of a payment taxed for propagation, in (0, 1).
    #[arg(long, global = true, default_value_t = 0.2)]
    pub alpha: f64,
    /// Share of a layer's budget kept by the layer, in (0, 1).
    #[arg(long, global = true, default_value_t = 0.2)]
    pub beta: f64,
    /// Sponsor budget, positive.
    #[arg(long, global = true, default_value_t = 30.0)]
    pub budget: f64,
    /// Starter: weight of an agent with n kept children.
    #[arg(long = "f", global = true, value_enum, default_value_t = SplitKind::Shifted)]
    pub split: SplitKind,
    /// Scheme: order in which a layer's children are processed.
    #[arg(long, global = true, value_enum, default_value_t = OrderingKind::Arrival)]
    pub ordering: OrderingKind,
    /// Seed for random ordering, generators and sampled delay checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// `check`: also require strict losses (strong PIC).
    #[arg(long, global = true)]
    pub strict: bool,
    /// `run`: include the ledger and the full transfer log.
    #[arg(long, global = true)]
    pub trace: bool,
    /// Fixed-reward baseline: payment per informed agent.
    #[arg(long, global = true)]
    pub reward: Option<f64>,
    /// `check`: number of sampled delay perturbations per network.
    #[arg(long, global = true, default_value_t = 32)]
    pub perturbations: usize,
    /// `check`: largest out-degree enumerated exhaustively.
    #[arg(long, global = true, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub enumeration_cap: usize,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Fixture name: example1, example2 or figure3.
    #[arg(long, conflicts_with = "family")]
    pub fixture: Option<String>,
    #[arg(long, value_enum, required_unless_present = "fixture")]
    pub family: Option<FamilyKind>,
    /// chain: number of chained agents.
    #[arg(long)]
    pub length: Option<usize>,
    /// star: leaves; single-chain-tail: parents of the tail head.
    #[arg(long)]
    pub width: Option<usize>,
    /// layered-random: comma separated layer widths.
    #[arg(long, value_delimiter = ',')]
    pub widths: Vec<usize>,
    /// single-chain-tail: agents after the tail head.
    #[arg(long, default_value_t = 2)]
    pub tail: usize,
    /// single-chain-tail: first-layer agents that inform nobody.
    #[arg(long, default_value_t = 0)]
    pub leaves: usize,
    /// layered-random: out-degree bound.
    #[arg(long, default_value_t = 3)]
    pub max_out_degree: usize,
    /// layered-random: probability of one extra edge per agent.
    #[arg(long, default_value_t = 0.3)]
    pub extra_edge_prob: f64,
}

struct Failure(i32, String);

fn usage(e: impl Display) -> Failure {
    Failure(EXIT_USAGE, e.to_string())
}

fn mechanism_config(kind: MechanismKind, g: &GlobalArgs) -> Result<MechanismConfig, Failure> {
    Ok(match kind {
        MechanismKind::Starter => {
            let f = match g.split {
                SplitKind::Identity => SplitFn::Identity,
                SplitKind::Shifted => SplitFn::Shifted,
                SplitKind::Exp => SplitFn::Exponential,
            };
            MechanismConfig::Starter(StarterConfig::new(g.beta, f, g.budget).map_err(usage)?)
        }
        MechanismKind::Scheme => {
            let ordering = match g.ordering {
                OrderingKind::Arrival => ChildOrdering::Arrival,
                OrderingKind::Id => ChildOrdering::Identifier,
                OrderingKind::Random => ChildOrdering::Random { seed: g.seed },
            };
            MechanismConfig::Scheme(
                SchemeConfig::new(g.alpha, g.beta, g.budget)
                    .map_err(usage)?
                    .with_ordering(ordering),
            )
        }
        MechanismKind::Fixed => {
            let reward = g.reward.ok_or_else(|| usage("--mechanism fixed requires --reward"))?;
            MechanismConfig::Fixed(FixedRewardConfig::new(reward, g.budget).map_err(usage)?)
        }
        MechanismKind::Uniform => MechanismConfig::Uniform(UniformConfig::new(g.budget).map_err(usage)?),
    })
}

fn mechanisms(g: &GlobalArgs) -> Result<Vec<MechanismConfig>, Failure> {
    if g.mechanism.is_empty() {
        return Ok(vec![mechanism_config(MechanismKind::Scheme, g)?]);
    }
    g.mechanism.iter().map(|&k| mechanism_config(k, g)).collect()
}

fn read_network(path: &Path) -> Result<Network, Failure> {
    Network::read_json(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display()))),
        None => out.write_all(text.as_bytes()).map_err(usage),
    }
}

fn cmd_run(g: &GlobalArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let path = match g.input.as_slice() {
        [path] => path,
        [] => return Err(usage("run requires --input")),
        _ => return Err(usage("run takes exactly one --input")),
    };
    let cfg = match g.mechanism.as_slice() {
        [] => mechanism_config(MechanismKind::Scheme, g)?,
        [kind] => mechanism_config(*kind, g)?,
        _ => return Err(usage("run takes exactly one --mechanism")),
    };
    let net = read_network(path)?;
    let report = validate_network(&net, &cfg).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    for w in &report.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    let rv = cfg.run(&net).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let rv = if g.trace { rv } else { rv.without_audit() };
    emit(g.output.as_deref(), &rv.to_json(), out)?;
    Ok(EXIT_OK)
}

fn network_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn cmd_check(g: &GlobalArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let mechs = mechanisms(g)?;
    let nets = g
        .input
        .iter()
        .map(|p| read_network(p).map(|n| (network_name(p), n)))
        .collect::<Result<Vec<_>, _>>()?;
    for (name, net) in &nets {
        for cfg in &mechs {
            validate_network(net, cfg).map_err(|e| usage(format!("{name}: {e}")))?;
        }
    }
    let opts = SuiteOptions {
        strict: g.strict,
        enumeration_cap: g.enumeration_cap,
        time: TimeEfficiencyOptions {
            perturbations: g.perturbations,
            seed: g.seed,
        },
    };
    let report = run_property_suite(&nets, &mechs, opts).map_err(usage)?;
    emit(g.output.as_deref(), &report.to_json_lines(), out)?;
    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_PROPERTY_FAILURE
    })
}

fn cmd_gen(g: &GlobalArgs, a: &GenArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let net = if let Some(name) = &a.fixture {
        fixture(name).map_err(usage)?
    } else {
        let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| usage(format!("this family requires --{flag}")));
        let family = match a.family.expect("clap enforces --family or --fixture") {
            FamilyKind::Chain => GraphFamily::Chain {
                length: need(a.length, "length")?,
            },
            FamilyKind::Star => GraphFamily::Star {
                width: need(a.width, "width")?,
            },
            FamilyKind::SingleChainTail => GraphFamily::SingleChainTail {
                width: need(a.width, "width")?,
                tail: a.tail,
                leaves: a.leaves,
            },
            FamilyKind::LayeredRandom => GraphFamily::LayeredRandom {
                widths: a.widths.clone(),
                max_out_degree: a.max_out_degree,
                extra_edge_prob: a.extra_edge_prob,
                seed: g.seed,
            },
        };
        gen_graph(&family).map_err(usage)?
    };
    emit(g.output.as_deref(), &net.to_json(), out)?;
    Ok(EXIT_OK)
}

fn cmd_fixtures(g: &GlobalArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let dir = g.output.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    for name in FIXTURES {
        let path = dir.join(format!("{name}.json"));
        let net = fixture(name).expect("built-in fixture");
        fs::write(&path, net.to_json()).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        writeln!(out, "{}", path.display()).map_err(usage)?;
    }
    Ok(EXIT_OK)
}

/// Parses `args` (program name first) and executes the command, writing
/// results to `out` and diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return if code == 0 { EXIT_OK } else { EXIT_USAGE };
        }
    };
    let g = &cli.global;
    let result = match &cli.command {
        Command::Run => cmd_run(g, out, err),
        Command::Check => cmd_check(g, out),
        Command::Gen(a) => cmd_gen(g, a, out),
        Command::Fixtures => cmd_fixtures(g, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}
