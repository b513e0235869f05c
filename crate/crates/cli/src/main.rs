//! `dip`: batch experiments on distributed interactive proofs.

mod report;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use dip_core::adversary::{
    exhaustive_prover, forge_sum_cheater, interpolation_cheater, optval_alphabet, triangle_restricted_alphabet,
    AdversaryError,
};
use dip_core::algebra::AlgebraError;
use dip_core::commprims::EqualityTest;
use dip_core::engine::{estimate, exact_acceptance, Acceptance, CertSpace, EngineError, ProtocolSpec};
use dip_core::netconfig::{generate, parse_graph_file, ConfigError, GraphKind};
use dip_core::pls::cycle::cycle_lcp_spec;
use dip_core::pls::dist2::dist2_spec;
use dip_core::pls::even_parity;
use dip_core::pls::regular::{regular_universal_spec, uniform_labels};
use dip_core::pls::tree::{tree_spec, TreeExchange};
use dip_core::protocols::coloring::greedy_coloring;
use dip_core::protocols::optval::OptError;
use dip_core::protocols::{
    coloring_spec, lucky_spec, optval_spec, triangle_spec, LuckyInstance, OptInstance, PositionExchange, Problem,
    TriangleInstance, TriangleVariant,
};
use dip_core::transforms::{
    boost, coin_spec, compile_dmam_to_dam, derandomize_shared, majority_success, toy_dmam, DerandMode,
};
use dip_core::{Bits, NetworkConfig};

use report::{to_csv, to_json, write_atomic, Report};

/// Largest list of certificate assignments the `oracle` command builds.
const ALPHABET_LIMIT: usize = 2_000_000;

#[derive(Parser)]
#[command(name = "dip", version, about = "Simulate distributed interactive proofs and measure their budgets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON report path (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write one CSV row per report.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    #[arg(long, global = true, env = "DIP_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 1000)]
    trials: u64,
}

#[derive(Args, Clone)]
struct GraphArgs {
    /// Graph file (edge list, optional labels).
    #[arg(long, conflicts_with = "gen")]
    graph: Option<PathBuf>,
    /// Generator: cycle:N, path:N, complete:N, regular:N:D[:SEED], er:N:P[:SEED].
    #[arg(long)]
    gen: Option<String>,
    /// Size of the default graph, a cycle, when neither --graph nor --gen is given.
    #[arg(long, default_value_t = 16)]
    n: usize,
    /// One 0/1 label per node, in node order.
    #[arg(long)]
    labels: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Cheat {
    Honest,
    Interp,
    Forge,
    Tampered,
}

#[derive(Clone, Copy, ValueEnum)]
enum Exchange {
    Plain,
    Fingerprint,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Tree,
    Dist2,
    Cycle,
    Regular,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleTarget {
    Toy,
    Cycle,
    Triangle,
    Optval,
}

#[derive(Subcommand)]
enum Command {
    /// Triangle-freeness by polynomial identity testing.
    Triangle {
        #[command(flatten)]
        graph: GraphArgs,
        /// Comma-separated list; one report per value.
        #[arg(long, default_value = "1")]
        alpha: String,
        #[arg(long, default_value_t = 12)]
        c: u64,
        #[arg(long, default_value = "shared")]
        variant: TriangleVariant,
        #[arg(long, value_enum, default_value = "honest")]
        cheat: Cheat,
    },
    /// Threshold certification of MDS, MIS or MVC.
    Optval {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value = "mds")]
        problem: Problem,
        #[arg(long)]
        k: u64,
        /// `unit` or a file of `id weight` lines.
        #[arg(long, default_value = "unit")]
        weights: String,
        #[arg(long)]
        weight_bound: Option<u64>,
        #[arg(long, value_enum, default_value = "honest")]
        cheat: Cheat,
        /// Offset added to the root's sum by the forging prover.
        #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
        delta: i64,
        /// Plain tree exchange and the reduced prime pool.
        #[arg(long)]
        tiny: bool,
        /// Also enumerate the randomness exactly.
        #[arg(long)]
        exact: bool,
    },
    /// Proper coloring with differing-bit certificates (greedy colors).
    Coloring {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        max_color: Option<u64>,
        #[arg(long, value_enum, default_value = "plain")]
        exchange: Exchange,
        #[arg(long, default_value_t = EqualityTest::DEFAULT_REPETITIONS)]
        repetitions: usize,
    },
    /// Lucky labelings.
    Lucky {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        lambda: Option<u64>,
        #[arg(long, value_enum, default_value = "fingerprint")]
        exchange: Exchange,
        #[arg(long, default_value_t = EqualityTest::DEFAULT_REPETITIONS)]
        repetitions: usize,
    },
    /// Deterministic proof labeling schemes.
    Pls {
        #[arg(value_enum)]
        scheme: Scheme,
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_enum, default_value = "plain")]
        exchange: Exchange,
        #[arg(long, default_value_t = EqualityTest::DEFAULT_REPETITIONS)]
        repetitions: usize,
        /// Degree of the regular graph.
        #[arg(long, default_value_t = 3)]
        d: usize,
        /// Repetition constant of the regular scheme.
        #[arg(long, default_value_t = 4)]
        c: usize,
    },
    /// Compile a protocol and measure the result.
    #[command(group(ArgGroup::new("compiler").required(true).args(["boost", "derand", "dmam2dam"])))]
    Compile {
        #[command(flatten)]
        graph: GraphArgs,
        /// Majority over this many parallel copies.
        #[arg(long)]
        boost: Option<usize>,
        /// Shared to distributed randomness.
        #[arg(long)]
        derand: bool,
        /// Merlin-Arthur-Merlin to Arthur-Merlin on the toy protocol.
        #[arg(long)]
        dmam2dam: bool,
        /// Base protocol: `coin:A:M` (accepts with probability A/M) or `triangle`.
        #[arg(long)]
        base: Option<String>,
        #[arg(long, default_value_t = 1)]
        alpha: u64,
        /// Repetitions of the dMAM compiler (default n·σ).
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum, default_value = "honest")]
        cheat: Cheat,
        #[arg(long)]
        exact: bool,
    },
    /// Exact optimal prover acceptance by exhaustive search.
    Oracle {
        #[arg(long, value_enum)]
        protocol: OracleTarget,
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 1)]
        alpha: u64,
        /// Candidate agreement points past the zero rows (triangle).
        #[arg(long, default_value_t = 6)]
        grid: u64,
        /// Threshold (optval).
        #[arg(long)]
        k: Option<u64>,
        #[arg(long, default_value = "mds")]
        problem: Problem,
        /// Compile the toy protocol with this many repetitions first.
        #[arg(long)]
        reps: Option<usize>,
    },
}

#[derive(Debug)]
enum CliError {
    Param(String),
    Guard(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Param(_) => 2,
            CliError::Guard(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Param(m) => write!(f, "parameter error: {m}"),
            CliError::Guard(m) => write!(f, "guard exceeded: {m}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::GuardExceeded { .. } => CliError::Guard(e.to_string()),
            _ => CliError::Param(e.to_string()),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::GuardExceeded { .. } => CliError::Guard(e.to_string()),
            _ => CliError::Param(e.to_string()),
        }
    }
}

impl From<AdversaryError> for CliError {
    fn from(e: AdversaryError) -> Self {
        match e {
            AdversaryError::Engine(e) => e.into(),
            AdversaryError::Opt(e) => e.into(),
            _ => CliError::Param(e.to_string()),
        }
    }
}

impl From<OptError> for CliError {
    fn from(e: OptError) -> Self {
        match e {
            OptError::TooLarge(_) => CliError::Guard(e.to_string()),
            _ => CliError::Param(e.to_string()),
        }
    }
}

impl From<AlgebraError> for CliError {
    fn from(e: AlgebraError) -> Self {
        CliError::Param(e.to_string())
    }
}

impl From<dip_core::netconfig::Violation> for CliError {
    fn from(e: dip_core::netconfig::Violation) -> Self {
        CliError::Param(e.to_string())
    }
}

fn param(msg: impl Into<String>) -> CliError {
    CliError::Param(msg.into())
}

fn load_graph(args: &GraphArgs) -> Result<NetworkConfig, CliError> {
    let config = match (&args.graph, &args.gen) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| param(format!("{}: {e}", path.display())))?;
            parse_graph_file(&text)?
        }
        (None, Some(kind)) => generate(&kind.parse::<GraphKind>()?)?,
        (None, None) => generate(&GraphKind::Cycle(args.n))?,
    };
    match &args.labels {
        None => Ok(config),
        Some(s) => {
            if s.len() != config.n() || !s.chars().all(|c| c == '0' || c == '1') {
                return Err(param(format!("--labels needs {} characters from 0/1", config.n())));
            }
            let labels = s.chars().map(|c| Bits::from_bools(vec![c == '1'])).collect();
            Ok(config.with_labels(labels)?)
        }
    }
}

fn graph_params(args: &GraphArgs, config: &NetworkConfig) -> BTreeMap<String, serde_json::Value> {
    let mut p = BTreeMap::new();
    let source = match (&args.graph, &args.gen) {
        (Some(path), _) => format!("file:{}", path.display()),
        (None, Some(kind)) => kind.clone(),
        (None, None) => format!("cycle:{}", args.n),
    };
    p.insert("graph".into(), json!(source));
    p.insert("n".into(), json!(config.n()));
    if let Some(l) = &args.labels {
        p.insert("labels".into(), json!(l));
    }
    p
}

/// `id weight` per line; `#` starts a comment. Every node needs a weight.
fn load_weights(spec: &str, config: &NetworkConfig) -> Result<Vec<u64>, CliError> {
    if spec == "unit" {
        return Ok(vec![1; config.n()]);
    }
    let text = std::fs::read_to_string(spec).map_err(|e| param(format!("{spec}: {e}")))?;
    let mut weights = vec![None; config.n()];
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = || param(format!("{spec} line {}: expected `id weight`", i + 1));
        let mut it = line.split_whitespace();
        let (Some(id), Some(w), None) = (it.next(), it.next(), it.next()) else { return Err(bad()) };
        let (id, w): (u64, u64) = (id.parse().map_err(|_| bad())?, w.parse().map_err(|_| bad())?);
        let v = config.index_of(id).ok_or_else(|| param(format!("{spec} line {}: unknown id {id}", i + 1)))?;
        weights[v] = Some(w);
    }
    weights
        .into_iter()
        .enumerate()
        .map(|(v, w)| w.ok_or_else(|| param(format!("{spec}: no weight for id {}", config.id(v)))))
        .collect()
}

fn exchange_tree(e: Exchange, repetitions: usize) -> TreeExchange {
    match e {
        Exchange::Plain => TreeExchange::Plain,
        Exchange::Fingerprint => TreeExchange::Fingerprint { repetitions },
    }
}

fn exchange_positions(e: Exchange, repetitions: usize) -> PositionExchange {
    match e {
        Exchange::Plain => PositionExchange::Plain,
        Exchange::Fingerprint => PositionExchange::Fingerprint { repetitions },
    }
}

struct Ctx {
    seed: u64,
    trials: u64,
}

impl Ctx {
    /// Runs the trials and fills in the measured fields.
    fn measure(
        &self,
        mut report: Report,
        spec: &ProtocolSpec,
        config: &NetworkConfig,
        exact: Option<Acceptance>,
        start: Instant,
    ) -> Result<Report, CliError> {
        let r = estimate(spec, config, self.trials, self.seed)?;
        report.absorb(&r, spec.interactions());
        report.exact = exact.map(Into::into);
        report.wallclock_ms = start.elapsed().as_secs_f64() * 1e3;
        Ok(report)
    }
}

fn run(cli: &Cli) -> Result<Vec<Report>, CliError> {
    let ctx = Ctx { seed: cli.seed, trials: cli.trials };
    let start = Instant::now();
    match &cli.command {
        Command::Triangle { graph, alpha, c, variant, cheat } => {
            let config = load_graph(graph)?;
            let alphas: Vec<u64> = alpha
                .split(',')
                .map(|a| a.trim().parse().map_err(|_| param(format!("bad alpha `{a}`"))))
                .collect::<Result<_, _>>()?;
            let mut out = Vec::new();
            for a in alphas {
                let start = Instant::now();
                let inst = Arc::new(TriangleInstance::new(config.clone(), a, *c)?);
                let mut spec = triangle_spec(inst.clone(), *variant)?;
                let mut exact = None;
                match cheat {
                    Cheat::Honest => {}
                    Cheat::Interp => {
                        let ch = interpolation_cheater(inst.clone(), *variant)?;
                        spec = spec.with_prover(ch.prover());
                        exact = ch.exact_acceptance().ok();
                    }
                    _ => return Err(param("triangle supports --cheat honest or interp")),
                }
                let mut p = graph_params(graph, &config);
                p.insert("alpha".into(), json!(a));
                p.insert("c".into(), json!(c));
                p.insert("q".into(), json!(inst.field.modulus()));
                p.insert("variant".into(), json!(variant.to_string()));
                p.insert("cheat".into(), json!(if matches!(cheat, Cheat::Interp) { "interp" } else { "honest" }));
                let mut r = Report::new("triangle", &spec.name, config.n(), p);
                r.soundness_bound = Some(inst.soundness_bound());
                out.push(ctx.measure(r, &spec, &config, exact, start)?);
            }
            Ok(out)
        }
        Command::Optval { graph, problem, k, weights, weight_bound, cheat, delta, tiny, exact } => {
            let config = load_graph(graph)?;
            let w = load_weights(weights, &config)?;
            let n = config.n() as u64;
            let bound = weight_bound.unwrap_or(n.pow(3).max(1));
            let mut inst = OptInstance::with_weight_bound(config.clone(), *problem, w, *k, bound)?;
            if *tiny {
                inst = inst.tiny();
            }
            let mut spec = optval_spec(&inst)?;
            let mut p = graph_params(graph, &config);
            p.insert("problem".into(), json!(problem.to_string()));
            p.insert("k".into(), json!(k));
            p.insert("weights".into(), json!(weights));
            p.insert("weight_bound".into(), json!(bound));
            p.insert("tiny".into(), json!(tiny));
            p.insert("pool_size".into(), json!(inst.sumzero.pool_size()));
            match cheat {
                Cheat::Honest => {}
                Cheat::Forge => {
                    let f = forge_sum_cheater(&inst, *delta)?;
                    p.insert("delta".into(), json!(delta));
                    p.insert("forged".into(), json!(f.forged));
                    spec = spec.with_prover(f.prover);
                }
                _ => return Err(param("optval supports --cheat honest or forge")),
            }
            p.insert("cheat".into(), json!(if matches!(cheat, Cheat::Forge) { "forge" } else { "honest" }));
            let exact = if *exact { Some(exact_acceptance(&spec, &config)?) } else { None };
            let mut r = Report::new("optval", &spec.name, config.n(), p);
            let eq = match inst.exchange {
                TreeExchange::Fingerprint { repetitions } => 0.5f64.powi(repetitions as i32),
                TreeExchange::Plain => 0.0,
            };
            r.soundness_bound = Some(inst.sumzero.false_accept_bound().max(eq));
            Ok(vec![ctx.measure(r, &spec, &config, exact, start)?])
        }
        Command::Coloring { graph, max_color, exchange, repetitions } => {
            let config = load_graph(graph)?;
            let colors = greedy_coloring(&config);
            let max = max_color.unwrap_or(config.max_degree() as u64 + 1);
            let spec = coloring_spec(&config, &colors, max, exchange_positions(*exchange, *repetitions))?;
            let mut p = graph_params(graph, &config);
            p.insert("max_color".into(), json!(max));
            p.insert("exchange".into(), json!(format!("{:?}", exchange_positions(*exchange, *repetitions))));
            let r = Report::new("coloring", &spec.name, config.n(), p);
            Ok(vec![ctx.measure(r, &spec, &config, None, start)?])
        }
        Command::Lucky { graph, lambda, exchange, repetitions } => {
            let config = load_graph(graph)?;
            let d = config.max_degree() as u64;
            let lambda = lambda.unwrap_or((d * d).saturating_sub(d) + 1);
            let inst = LuckyInstance::new(config.clone(), lambda, None)?
                .with_exchange(exchange_positions(*exchange, *repetitions));
            let spec = lucky_spec(&inst)?;
            let mut p = graph_params(graph, &config);
            p.insert("lambda".into(), json!(lambda));
            p.insert("lucky".into(), json!(dip_core::protocols::lucky::is_lucky(&config, &inst.labels)));
            let mut r = Report::new("lucky", &spec.name, config.n(), p);
            r.soundness_bound = Some(inst.sumzero.false_accept_bound());
            Ok(vec![ctx.measure(r, &spec, &config, None, start)?])
        }
        Command::Pls { scheme, graph, exchange, repetitions, d, c } => {
            let config = load_graph(graph)?;
            let mut p = graph_params(graph, &config);
            let spec = match scheme {
                Scheme::Tree => {
                    p.insert("exchange".into(), json!(format!("{:?}", exchange_tree(*exchange, *repetitions))));
                    tree_spec(&config, exchange_tree(*exchange, *repetitions))?
                }
                Scheme::Dist2 => dist2_spec(&config)?,
                Scheme::Cycle => cycle_lcp_spec(&config, even_parity())?,
                Scheme::Regular => {
                    p.insert("d".into(), json!(d));
                    p.insert("c".into(), json!(c));
                    regular_universal_spec(&config, *d, *c, uniform_labels(), ctx.seed)?
                }
            };
            let r = Report::new("pls", &spec.name, config.n(), p);
            Ok(vec![ctx.measure(r, &spec, &config, None, start)?])
        }
        Command::Compile { graph, boost: copies, derand, dmam2dam, base, alpha, k, cheat, exact } => {
            let config = load_graph(graph)?;
            let mut p = graph_params(graph, &config);
            let mut bound = None;
            let spec = if let Some(c) = copies {
                let base = base.clone().unwrap_or_else(|| "coin:2:5".into());
                let (a, m) = parse_coin(&base)?;
                p.insert("base".into(), json!(base));
                p.insert("boost".into(), json!(c));
                bound = Some(majority_success(a as f64 / m as f64, *c));
                boost(&coin_spec(a, m)?, &config, *c)?
            } else if *derand {
                let base = base.clone().unwrap_or_else(|| "triangle".into());
                p.insert("base".into(), json!(base));
                let d = if base == "triangle" {
                    let inst = Arc::new(TriangleInstance::with_defaults(config.clone(), *alpha)?);
                    p.insert("alpha".into(), json!(alpha));
                    derandomize_shared(&triangle_spec(inst, TriangleVariant::Shared)?, &config, DerandMode::Ma)?
                } else {
                    let (a, m) = parse_coin(&base)?;
                    derandomize_shared(&coin_spec(a, m)?, &config, DerandMode::Am)?
                };
                p.insert("overhead_bits".into(), json!(d.overhead_bits));
                match cheat {
                    Cheat::Honest => d.spec.clone(),
                    Cheat::Tampered => d.spec.with_prover(d.tampered_prover()),
                    _ => return Err(param("--derand supports --cheat honest or tampered")),
                }
            } else {
                debug_assert!(*dmam2dam);
                if config.labels().iter().any(|l| l.len() != 1) {
                    return Err(param("the toy protocol needs one 0/1 label per node (--labels)"));
                }
                let desc = toy_dmam();
                let reps = k.unwrap_or(config.n() * desc.sigma);
                p.insert("dmam2dam".into(), json!(true));
                p.insert("k".into(), json!(reps));
                compile_dmam_to_dam(&desc, config.n(), Some(reps))?
            };
            let exact = if *exact { Some(exact_acceptance(&spec, &config)?) } else { None };
            let mut r = Report::new("compile", &spec.name, config.n(), p);
            r.soundness_bound = bound;
            Ok(vec![ctx.measure(r, &spec, &config, exact, start)?])
        }
        Command::Oracle { protocol, graph, alpha, grid, k, problem, reps } => {
            let config = load_graph(graph)?;
            let n = config.n();
            let mut p = graph_params(graph, &config);
            let (spec, spaces) = match protocol {
                OracleTarget::Toy => {
                    let desc = toy_dmam();
                    match reps {
                        Some(r) => {
                            p.insert("reps".into(), json!(r));
                            (compile_dmam_to_dam(&desc, n, Some(*r))?, vec![CertSpace::all_strings(r + 1, n)])
                        }
                        None => (desc.to_spec()?, vec![CertSpace::all_strings(1, n); 2]),
                    }
                }
                OracleTarget::Cycle => (cycle_lcp_spec(&config, even_parity())?, vec![CertSpace::all_strings(n, n)]),
                OracleTarget::Triangle => {
                    let inst = TriangleInstance::with_defaults(config.clone(), *alpha)?;
                    let candidates: Vec<u64> = (inst.rows + 1..=inst.rows + grid).collect();
                    let space = triangle_restricted_alphabet(&inst, &candidates)?;
                    p.insert("alpha".into(), json!(alpha));
                    p.insert("grid".into(), json!(grid));
                    p.insert("q".into(), json!(inst.field.modulus()));
                    (triangle_spec(Arc::new(inst), TriangleVariant::Shared)?, vec![space])
                }
                OracleTarget::Optval => {
                    let k = k.ok_or_else(|| param("--k is required for the optval oracle"))?;
                    let inst = OptInstance::with_weight_bound(config.clone(), *problem, vec![1; n], k, 1)?.tiny();
                    let space = optval_alphabet(&inst, n as u64, ALPHABET_LIMIT)?;
                    p.insert("problem".into(), json!(problem.to_string()));
                    p.insert("k".into(), json!(k));
                    (optval_spec(&inst)?, vec![space])
                }
            };
            let best = exhaustive_prover(&spec, &config, &spaces)?;
            let mut r = Report::new("oracle", &spec.name, n, p);
            r.seed = ctx.seed;
            r.interactions = spec.interactions();
            r.rho_bits = spec.rho();
            r.accept_all_fraction = best.value();
            r.exact = Some(best.into());
            r.wallclock_ms = start.elapsed().as_secs_f64() * 1e3;
            Ok(vec![r])
        }
    }
}

fn parse_coin(s: &str) -> Result<(u64, u64), CliError> {
    let bad = || param(format!("base `{s}` is not coin:A:M with 0 <= A <= M, M >= 1"));
    let rest = s.strip_prefix("coin:").ok_or_else(bad)?;
    let (a, m) = rest.split_once(':').ok_or_else(bad)?;
    let (a, m): (u64, u64) = (a.parse().map_err(|_| bad())?, m.parse().map_err(|_| bad())?);
    if m == 0 || a > m {
        return Err(bad());
    }
    Ok((a, m))
}

fn emit(cli: &Cli, reports: &[Report]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    let json = to_json(reports).map_err(|e| CliError::Io(e.to_string()))?;
    match &cli.out {
        Some(path) => write_atomic(path, &json).map_err(io)?,
        None => print!("{json}"),
    }
    if let Some(path) = &cli.csv {
        let csv = to_csv(reports).map_err(|e| CliError::Io(e.to_string()))?;
        write_atomic(path, &csv).map_err(io)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).and_then(|r| emit(&cli, &r)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dip: {e}");
            ExitCode::from(e.code())
        }
    }
}
