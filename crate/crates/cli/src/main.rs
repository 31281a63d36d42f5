//! `bipsim`: generate modular bipartite networks, build coincidence-similarity
//! networks and projections, and score group recovery.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or domain error.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use bipartite_coincidence::evaluation::{self, threshold_grid, EvaluationError};
use bipartite_coincidence::generator::{self, LinkWeights, RewireScheme};
use bipartite_coincidence::io::{self as bio, GraphFormat, RunMetadata};
use bipartite_coincidence::{BipartiteNetwork, GeneratorConfig, IsolatedNodes, Orientation, Side};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "bipsim",
    version,
    about = "Coincidence-similarity analysis of bipartite networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a modular bipartite network with planted groups.
    Gen(GenArgs),
    /// Build the coincidence-similarity network of a bipartite network.
    Coincide(CoincideArgs),
    /// Project a bipartite network onto one node type.
    Project(ProjectArgs),
    /// Error rates of threshold-based group recovery over a threshold grid.
    Sweep(SweepArgs),
    /// Mean and spread of sweep errors over many generated realizations.
    Ensemble(EnsembleArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Number of groups.
    #[arg(long)]
    groups: Option<usize>,
    /// A-nodes per group.
    #[arg(long)]
    a_per_group: Option<usize>,
    /// B-nodes per group.
    #[arg(long)]
    b_per_group: Option<usize>,
    /// Rewiring probability.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = SchemeArg::SelectedPairs)]
    scheme: SchemeArg,
    /// Draw integer link weights uniformly from 1..=N instead of using 1.
    #[arg(long, value_name = "N")]
    weight_max: Option<u32>,
    /// Take the whole configuration from a metadata sidecar or config file.
    #[arg(long, value_name = "PATH", conflicts_with_all = ["groups", "a_per_group", "b_per_group", "p"])]
    from_metadata: Option<PathBuf>,
    /// Edge-list output (standard output when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Ground-truth CSV output.
    #[arg(long)]
    truth_out: Option<PathBuf>,
    /// Metadata sidecar; defaults to `<out>.meta` when `--out` is given.
    #[arg(long)]
    metadata_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Bipartite network: weight-matrix CSV or edge list.
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Input format; `auto` treats `.csv` files as weight matrices and
    /// anything else as an edge list.
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    input_format: InputFormat,
}

#[derive(Args, Debug)]
struct CoincideArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value_t = OrientationArg::Direct)]
    orientation: OrientationArg,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Leave out nodes without links instead of failing.
    #[arg(long)]
    drop_isolated: bool,
}

#[derive(Args, Debug)]
struct ProjectArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum)]
    side: SideArg,
    /// Weight shared neighbours by the smaller of the two link weights.
    #[arg(long)]
    weighted: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Bipartite network file (requires --truth).
    #[arg(
        long = "in",
        value_name = "PATH",
        conflicts_with = "gen_config",
        requires = "truth"
    )]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    input_format: InputFormat,
    /// Generate the network from this config instead of reading one.
    #[arg(long, value_name = "PATH")]
    gen_config: Option<PathBuf>,
    /// Ground-truth CSV (node_label,group_index).
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OrientationArg::Direct)]
    orientation: OrientationArg,
    #[arg(long, default_value_t = 0.01)]
    grid_step: f64,
    #[arg(long)]
    drop_isolated: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EnsembleArgs {
    /// Generator config (key=value lines; a `gen` metadata sidecar works).
    #[arg(long)]
    config: PathBuf,
    /// Number of realizations, seeds `seed .. seed+n-1`.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_enum)]
    orientation: Option<OrientationArg>,
    #[arg(long)]
    grid_step: Option<f64>,
    /// Summary CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-realization curves in long form.
    #[arg(long)]
    curves_out: Option<PathBuf>,
    /// Metadata sidecar for the run.
    #[arg(long)]
    metadata_out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum InputFormat {
    Auto,
    Csv,
    Edges,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum OrientationArg {
    Direct,
    Reverse,
}

impl From<OrientationArg> for Orientation {
    fn from(o: OrientationArg) -> Self {
        match o {
            OrientationArg::Direct => Orientation::Direct,
            OrientationArg::Reverse => Orientation::Reverse,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FormatArg {
    Csv,
    Graphml,
    Dot,
}

impl From<FormatArg> for GraphFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => GraphFormat::Csv,
            FormatArg::Graphml => GraphFormat::GraphMl,
            FormatArg::Dot => GraphFormat::Dot,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SideArg {
    A,
    B,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SchemeArg {
    SelectedPairs,
    AnyPartner,
}

impl From<SchemeArg> for RewireScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::SelectedPairs => RewireScheme::SelectedPairs,
            SchemeArg::AnyPartner => RewireScheme::AnyPartner,
        }
    }
}

/// Invalid combination of arguments; reported with exit code 1.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

/// Runs `f` against the file at `path`, or standard output when absent.
fn with_output<F>(path: Option<&Path>, f: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<(), bio::IoError>,
{
    match path {
        Some(path) => {
            let file =
                File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut out = BufWriter::new(file);
            f(&mut out)?;
            out.flush()
                .with_context(|| format!("writing {}", path.display()))?;
        }
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            f(&mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn read_network(path: &Path, format: InputFormat) -> Result<BipartiteNetwork> {
    let as_matrix = match format {
        InputFormat::Csv => true,
        InputFormat::Edges => false,
        InputFormat::Auto => path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("csv")),
    };
    let net = if as_matrix {
        bio::read_weight_matrix(path)
    } else {
        bio::read_edge_list(path)
    };
    net.with_context(|| format!("reading {}", path.display()))
}

fn isolated(drop: bool) -> IsolatedNodes {
    if drop {
        IsolatedNodes::Drop
    } else {
        IsolatedNodes::Reject
    }
}

fn gen_config(args: &GenArgs) -> Result<GeneratorConfig> {
    if let Some(path) = &args.from_metadata {
        let meta = RunMetadata::read(path)?;
        return meta
            .generator_config(&[])
            .with_context(|| format!("config in {}", path.display()));
    }
    let required =
        |v: Option<usize>, flag: &str| v.ok_or_else(|| usage(format!("missing --{flag}")));
    let mut cfg = GeneratorConfig::new(
        required(args.groups, "groups")?,
        required(args.a_per_group, "a-per-group")?,
        required(args.b_per_group, "b-per-group")?,
        args.p.ok_or_else(|| usage("missing --p"))?,
        args.seed,
    );
    cfg.scheme = args.scheme.into();
    if let Some(max) = args.weight_max {
        cfg.weights = LinkWeights::UniformInt { max };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_gen(args: GenArgs) -> Result<()> {
    let cfg = gen_config(&args)?;
    let (net, truth) = generator::generate(&cfg)?;
    with_output(args.out.as_deref(), |w| bio::write_edge_list(&net, w))?;
    if let Some(path) = &args.truth_out {
        with_output(Some(path), |w| bio::write_ground_truth(&truth, w))?;
    }
    let meta_path = args.metadata_out.clone().or_else(|| {
        args.out.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".meta");
            PathBuf::from(s)
        })
    });
    if let Some(path) = meta_path {
        let meta = RunMetadata::for_config("gen", &cfg);
        with_output(Some(&path), |w| meta.write(w))?;
    }
    Ok(())
}

fn run_coincide(args: CoincideArgs) -> Result<()> {
    let net = read_network(&args.input.input, args.input.input_format)?;
    let sim = net.coincidence_network(args.orientation.into(), isolated(args.drop_isolated))?;
    with_output(args.out.as_deref(), |w| {
        bio::write_similarity(&sim, args.format.into(), w)
    })
}

fn run_project(args: ProjectArgs) -> Result<()> {
    let net = read_network(&args.input.input, args.input.input_format)?;
    let side = match args.side {
        SideArg::A => Side::A,
        SideArg::B => Side::B,
    };
    let proj = net.project(side, args.weighted);
    with_output(args.out.as_deref(), |w| bio::write_projection(&proj, w))
}

fn run_sweep(args: SweepArgs) -> Result<()> {
    let orientation: Orientation = args.orientation.into();
    let grid = threshold_grid(args.grid_step).map_err(|e| usage(e.to_string()))?;
    let (net, truth, cfg) = match (&args.input, &args.gen_config) {
        (Some(path), None) => {
            let net = read_network(path, args.input_format)?;
            let truth_path = args
                .truth
                .as_ref()
                .ok_or_else(|| usage("--in requires --truth"))?;
            let truth = bio::read_ground_truth(truth_path)
                .with_context(|| format!("reading {}", truth_path.display()))?;
            (net, truth, None)
        }
        (None, Some(path)) => {
            let cfg = RunMetadata::read(path)?
                .generator_config(&[])
                .with_context(|| format!("config in {}", path.display()))?;
            let (net, truth) = generator::generate(&cfg)?;
            let all = bipartite_coincidence::Partition {
                labels: truth
                    .a
                    .labels
                    .iter()
                    .chain(&truth.b.labels)
                    .cloned()
                    .collect(),
                groups: truth
                    .a
                    .groups
                    .iter()
                    .chain(&truth.b.groups)
                    .copied()
                    .collect(),
            };
            (net, all, Some(cfg))
        }
        _ => return Err(usage("sweep needs exactly one of --in or --gen-config")),
    };
    let sim = net.coincidence_network(orientation, isolated(args.drop_isolated))?;
    let part = truth
        .restricted_to(&sim.labels)
        .map_err(EvaluationError::MissingNode)?;
    let mut curve = evaluation::error_sweep(&sim, &part, &grid)?;
    curve.config = cfg;
    with_output(args.out.as_deref(), |w| bio::write_error_curve(&curve, w))
}

fn run_ensemble(args: EnsembleArgs) -> Result<()> {
    let meta = RunMetadata::read(&args.config)?;
    let cfg = meta
        .generator_config(&["n", "orientation", "grid_step"])
        .with_context(|| format!("config in {}", args.config.display()))?;
    let n = match (args.n, meta.get("n")) {
        (Some(n), _) => n,
        (None, Some(raw)) => raw
            .parse()
            .map_err(|_| usage(format!("invalid n {raw:?} in config")))?,
        (None, None) => 100,
    };
    let orientation = match (args.orientation, meta.get("orientation")) {
        (Some(o), _) => o.into(),
        (None, Some(raw)) => raw.parse::<Orientation>().map_err(usage)?,
        (None, None) => Orientation::Direct,
    };
    let step = match (args.grid_step, meta.get("grid_step")) {
        (Some(s), _) => s,
        (None, Some(raw)) => raw
            .parse()
            .map_err(|_| usage(format!("invalid grid_step {raw:?} in config")))?,
        (None, None) => 0.01,
    };
    let grid = threshold_grid(step).map_err(|e| usage(e.to_string()))?;
    if n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let summary = evaluation::ensemble(&cfg, n, orientation, &grid)?;
    if !summary.skipped.is_empty() {
        eprintln!(
            "skipped {} realization(s) with isolated nodes: seeds {:?}",
            summary.skipped.len(),
            summary.skipped
        );
    }
    with_output(args.out.as_deref(), |w| {
        bio::write_ensemble_summary(&summary, w)
    })?;
    if let Some(path) = &args.curves_out {
        with_output(Some(path), |w| bio::write_realization_curves(&summary, w))?;
    }
    if let Some(path) = &args.metadata_out {
        let mut meta = RunMetadata::for_config("ensemble", &cfg);
        meta.set("n", n);
        meta.set("orientation", orientation);
        meta.set("grid_step", step);
        meta.set("seed_schedule", "seed+index");
        meta.set("skipped", summary.skipped.len());
        with_output(Some(path), |w| meta.write(w))?;
    }
    Ok(())
}

fn dispatch<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Gen(a) => run_gen(a),
        Command::Coincide(a) => run_coincide(a),
        Command::Project(a) => run_project(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Ensemble(a) => run_ensemble(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e}");
            eprintln!("Run `bipsim --help` for usage.");
            1
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(dispatch(std::env::args_os()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(dispatch(["bipsim", "gen", "--bogus"]), 1);
        assert_eq!(dispatch(["bipsim"]), 1);
        assert_eq!(dispatch(["bipsim", "gen", "--groups", "2"]), 1);
        assert_eq!(
            dispatch([
                "bipsim",
                "coincide",
                "--in",
                "x.csv",
                "--orientation",
                "sideways"
            ]),
            1
        );
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(dispatch(["bipsim", "--help"]), 0);
    }

    #[test]
    fn domain_errors_exit_two() {
        assert_eq!(
            dispatch([
                "bipsim",
                "gen",
                "--groups",
                "0",
                "--a-per-group",
                "1",
                "--b-per-group",
                "1",
                "--p",
                "0"
            ]),
            2
        );
        assert_eq!(
            dispatch(["bipsim", "coincide", "--in", "/nonexistent/net.csv"]),
            2
        );
    }
}
