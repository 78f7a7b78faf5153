//! The `holant` command line.
//!
//! Exit codes: 0 for PASS or EXPLORATORY, 1 for FAIL, 2 for usage, parse and
//! I/O errors, 3 for invariant violations.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::classical::{classical_transform_with, verify_classical_holant};
use crate::error::{Error, Result};
use crate::io::{
    self, BatchReportDocument, ClassicalTransformedDocument, Graph, GraphDocument, Kind,
    QuantumTransformedDocument, ReportDocument, SeedReport, TransformDocument, Transforms,
    VerdictCounts,
};
use crate::qholo::{
    gen_instance, quantum_transform, verify_quantum_holant_seeded, z_transformed, Family,
    SizeParams, DEFAULT_PROBE_SEED,
};
use crate::quantum::{find_odot_nondistributivity, max_star_distributivity_gap};
use crate::report::{HolantReport, Verdict};
use crate::tolerance::Tolerances;

/// Environment variable holding the worker count for batch verification.
pub const WORKERS_ENV: &str = "HOLANT_WORKERS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

const STAR_DIST_LIMIT: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "holant", version, about = "Holographic transformations of factor graphs")]
struct Cli {
    #[command(flatten)]
    tol: TolArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct TolArgs {
    /// Relative |Z - Ẑ| threshold (classical and quantum).
    #[arg(long, global = true)]
    tol_holant: Option<f64>,
    /// Residual threshold for per-edge inverse-pair conditions.
    #[arg(long, global = true)]
    tol_inverse: Option<f64>,
    /// Commutation residual threshold.
    #[arg(long, global = true)]
    tol_commute: Option<f64>,
    /// Relative eigenvalue floor for positivity checks.
    #[arg(long, global = true)]
    tol_psd: Option<f64>,
}

impl TolArgs {
    fn resolve(&self) -> Tolerances {
        let mut t = Tolerances::default();
        if let Some(x) = self.tol_holant {
            t.holant_classical = x;
            t.holant_quantum = x;
        }
        if let Some(x) = self.tol_inverse {
            t.inverse = x;
        }
        if let Some(x) = self.tol_commute {
            t.commute = x;
        }
        if let Some(x) = self.tol_psd {
            t.psd = x;
        }
        t
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the partition function of a graph.
    Z { graph: PathBuf },
    /// Apply a transform set and write the transformed graph.
    Transform {
        graph: PathBuf,
        transforms: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Check the Holant identity for a graph, or for a range of generated instances.
    Verify(VerifyArgs),
    /// Generate a random instance and write `<prefix>.graph.json` and `<prefix>.transforms.json`.
    Gen {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = SizeParams::default())]
        size: SizeParams,
        /// Write the underlying classical instance (DIAGONAL only).
        #[arg(long)]
        classical: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Numerical checks of the operator products.
    Check {
        #[command(subcommand)]
        which: CheckCommand,
    },
}

#[derive(Debug, Args)]
struct VerifyArgs {
    graph: Option<PathBuf>,
    transforms: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Seed for the edge-order probe.
    #[arg(long)]
    seed: Option<u64>,
    /// Batch mode: a seed range `a..b` (half-open) or `a..=b`.
    #[arg(long, requires = "family", conflicts_with_all = ["graph", "transforms", "seed"])]
    seeds: Option<SeedRange>,
    #[arg(long, requires = "seeds")]
    family: Option<Family>,
    #[arg(long, default_value_t = SizeParams::default())]
    size: SizeParams,
}

#[derive(Debug, Subcommand)]
enum CheckCommand {
    /// Largest ⋆ distributivity gap over random qubit-triple pairs.
    StarDist {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        trials: usize,
    },
    /// Search for a pair on which ⊙ fails to distribute over the partial trace.
    OdotWitness {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

/// A range of seeds parsed from `a..b` or `a..=b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedRange {
    pub start: u64,
    pub end: u64,
}

impl SeedRange {
    pub fn seeds(&self) -> std::ops::Range<u64> {
        self.start..self.end
    }
}

impl FromStr for SeedRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("seed range {s:?} is not of the form a..b or a..=b"));
        let (a, b, inclusive) = if let Some((a, b)) = s.split_once("..=") {
            (a, b, true)
        } else if let Some((a, b)) = s.split_once("..") {
            (a, b, false)
        } else {
            return Err(bad());
        };
        let start: u64 = a.trim().parse().map_err(|_| bad())?;
        let mut end: u64 = b.trim().parse().map_err(|_| bad())?;
        if inclusive {
            end = end.checked_add(1).ok_or_else(bad)?;
        }
        if end < start {
            return Err(bad());
        }
        Ok(Self { start, end })
    }
}

impl fmt::Display for SeedRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_invariant_violation() || matches!(e, Error::Inconsistent(_)) {
        EXIT_INVARIANT
    } else {
        EXIT_USAGE
    }
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Pass | Verdict::Exploratory => EXIT_OK,
        Verdict::Fail => EXIT_FAIL,
    }
}

/// Runs the command line against the process's stdout and stderr.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_cli_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let tol = cli.tol.resolve();
    match dispatch(cli.command, &tol, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn say(out: &mut dyn Write, line: impl fmt::Display) -> Result<()> {
    writeln!(out, "{line}").map_err(|e| Error::Io(e.to_string()))
}

fn dispatch(command: Command, tol: &Tolerances, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Z { graph } => {
            let z = match io::parse_graph(&graph, tol)? {
                Graph::Classical(g) => g.partition_function()?,
                Graph::Quantum(g) => g.partition_function_with(tol)?,
            };
            say(out, z)?;
            Ok(EXIT_OK)
        }
        Command::Transform {
            graph,
            transforms,
            output,
        } => {
            let (g, ts) = load_pair(&graph, &transforms, tol)?;
            match (g, ts) {
                (Graph::Classical(g), Transforms::Classical(ts)) => {
                    let t = classical_transform_with(&g, &ts, tol)?;
                    let z = t.partition_function()?;
                    io::write_json(&output, &ClassicalTransformedDocument::new(&t, z))?;
                    say(out, format!("Z_hat = {z}"))?;
                }
                (Graph::Quantum(g), Transforms::Quantum(ts)) => {
                    let t = quantum_transform(&g, &ts, tol)?;
                    let z = z_transformed(&t, tol)?.value;
                    io::write_json(&output, &QuantumTransformedDocument::new(&t, z))?;
                    say(out, format!("Z_hat = {}", fmt_complex(z)))?;
                }
                _ => unreachable!("load_pair checks the kinds"),
            }
            Ok(EXIT_OK)
        }
        Command::Verify(args) => match (args.seeds, args.family) {
            (Some(range), Some(family)) => verify_batch(family, &args.size, range, args.report.as_deref(), tol, out),
            _ => {
                let (Some(graph), Some(transforms)) = (args.graph, args.transforms) else {
                    return Err(Error::Parse(
                        "verify needs <GRAPH> <TRANSFORMS>, or --seeds with --family".into(),
                    ));
                };
                verify_files(&graph, &transforms, args.seed, args.report.as_deref(), tol, out)
            }
        },
        Command::Gen {
            family,
            seed,
            size,
            classical,
            output,
        } => {
            let inst = gen_instance(family, &size, seed)?;
            let (graph_doc, ts_doc) = if classical {
                let Some((g, ts)) = &inst.classical else {
                    return Err(Error::Parse(format!(
                        "--classical applies to the DIAGONAL family, not {family}"
                    )));
                };
                (GraphDocument::from_classical(g), TransformDocument::from_classical(ts))
            } else {
                (
                    GraphDocument::from_quantum(&inst.graph),
                    TransformDocument::from_quantum(&inst.transforms)?,
                )
            };
            let (gp, tp) = prefixed(&output);
            io::write_json(&gp, &graph_doc)?;
            io::write_json(&tp, &ts_doc)?;
            say(out, gp.display())?;
            say(out, tp.display())?;
            Ok(EXIT_OK)
        }
        Command::Check { which } => match which {
            CheckCommand::StarDist { seed, trials } => {
                let (gap, trial) = max_star_distributivity_gap(seed, trials)?;
                let ok = gap <= STAR_DIST_LIMIT;
                say(
                    out,
                    format!(
                        "{} max relative gap {gap:.3e} over {trials} pairs (worst at trial {trial}, limit {STAR_DIST_LIMIT:e})",
                        if ok { "PASS" } else { "FAIL" }
                    ),
                )?;
                Ok(if ok { EXIT_OK } else { EXIT_FAIL })
            }
            CheckCommand::OdotWitness { seed, trials } => match find_odot_nondistributivity(seed, trials)? {
                Some(w) => {
                    say(
                        out,
                        format!(
                            "witness at trial {}: lhs {} rhs {} relative gap {:.3e}",
                            w.trial,
                            fmt_complex(w.gap.lhs),
                            fmt_complex(w.gap.rhs),
                            w.gap.relative
                        ),
                    )?;
                    Ok(EXIT_OK)
                }
                None => {
                    say(out, format!("no witness in {trials} trials"))?;
                    Ok(EXIT_FAIL)
                }
            },
        },
    }
}

/// `<prefix>.graph.json` and `<prefix>.transforms.json`.
pub fn prefixed(prefix: &Path) -> (PathBuf, PathBuf) {
    let with = |suffix: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    (with(".graph.json"), with(".transforms.json"))
}

fn fmt_complex(z: num_complex::Complex64) -> String {
    if z.im.abs() <= 1e-12 * z.re.abs().max(1.0) {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

fn load_pair(graph: &Path, transforms: &Path, tol: &Tolerances) -> Result<(Graph, Transforms)> {
    let g = io::parse_graph(graph, tol)?;
    let ts = io::parse_transforms(transforms)?;
    let tk = match &ts {
        Transforms::Classical(_) => Kind::Classical,
        Transforms::Quantum(_) => Kind::Quantum,
    };
    if g.kind() != tk {
        return Err(Error::Parse(format!(
            "{} is a {:?} graph but {} holds {:?} transforms",
            graph.display(),
            g.kind(),
            transforms.display(),
            tk
        )));
    }
    Ok((g, ts))
}

fn summarize(r: &HolantReport) -> String {
    let mut s = format!(
        "{} Z = {} Z_hat = {} discrepancy = {:.3e} (tolerance {:e})",
        r.verdict,
        fmt_complex(r.z_original),
        fmt_complex(r.z_transformed),
        r.discrepancy,
        r.discrepancy_tolerance
    );
    for (v, a) in &r.failing_edges {
        s.push_str(&format!("\n  failing edge ({v}, {a})"));
    }
    for reason in &r.reasons {
        s.push_str(&format!("\n  {reason}"));
    }
    s
}

fn verify_files(
    graph: &Path,
    transforms: &Path,
    seed: Option<u64>,
    report: Option<&Path>,
    tol: &Tolerances,
    out: &mut dyn Write,
) -> Result<i32> {
    let start = Instant::now();
    let seed = seed.unwrap_or(DEFAULT_PROBE_SEED);
    let (g, ts) = load_pair(graph, transforms, tol)?;
    let kind = g.kind();
    let r = match (g, ts) {
        (Graph::Classical(g), Transforms::Classical(ts)) => verify_classical_holant(&g, &ts, tol)?,
        (Graph::Quantum(g), Transforms::Quantum(ts)) => verify_quantum_holant_seeded(&g, &ts, tol, seed)?,
        _ => unreachable!("load_pair checks the kinds"),
    };
    say(out, summarize(&r))?;
    let code = verdict_code(r.verdict);
    if let Some(path) = report {
        let doc = ReportDocument::new(kind, seed, start.elapsed().as_secs_f64(), *tol, r);
        io::write_json(path, &doc)?;
    }
    Ok(code)
}

/// Worker count from [`WORKERS_ENV`], or rayon's default when unset.
pub fn worker_count() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .map(Some)
            .ok_or_else(|| Error::Parse(format!("{WORKERS_ENV}={s:?} is not a positive integer"))),
        Err(_) => Ok(None),
    }
}

/// Generates and verifies every seed in the range; reports come back in
/// seed order whatever the worker count.
pub fn verify_seeds(
    family: Family,
    size: &SizeParams,
    range: SeedRange,
    tol: &Tolerances,
) -> Result<Vec<SeedReport>> {
    let run = || {
        range
            .seeds()
            .into_par_iter()
            .map(|seed| {
                let inst = gen_instance(family, size, seed)?;
                let report = verify_quantum_holant_seeded(&inst.graph, &inst.transforms, tol, DEFAULT_PROBE_SEED)?;
                Ok(SeedReport { seed, report })
            })
            .collect::<Result<Vec<_>>>()
    };
    match worker_count()? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Io(e.to_string()))?
            .install(run),
        None => run(),
    }
}

fn verify_batch(
    family: Family,
    size: &SizeParams,
    range: SeedRange,
    report: Option<&Path>,
    tol: &Tolerances,
    out: &mut dyn Write,
) -> Result<i32> {
    let start = Instant::now();
    let reports = verify_seeds(family, size, range, tol)?;
    let mut counts = VerdictCounts::default();
    for r in &reports {
        counts.add(r.report.verdict);
        if r.report.verdict == Verdict::Fail {
            say(out, format!("seed {}: {}", r.seed, summarize(&r.report)))?;
        }
    }
    say(
        out,
        format!(
            "{family} seeds {range} size {size}: {} PASS, {} FAIL, {} EXPLORATORY",
            counts.pass, counts.fail, counts.exploratory
        ),
    )?;
    if let Some(path) = report {
        let doc = BatchReportDocument {
            version: io::FORMAT_VERSION,
            tool_version: io::TOOL_VERSION.to_string(),
            family,
            size: *size,
            seeds: (range.start, range.end),
            wall_clock_seconds: start.elapsed().as_secs_f64(),
            tolerances: *tol,
            counts,
            reports,
        };
        io::write_json(path, &doc)?;
    }
    Ok(if counts.fail > 0 { EXIT_FAIL } else { EXIT_OK })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_ranges() {
        assert_eq!("3..7".parse::<SeedRange>().unwrap().seeds(), 3..7);
        assert_eq!("0..=4".parse::<SeedRange>().unwrap().seeds(), 0..5);
        assert!("7..3".parse::<SeedRange>().is_err());
        assert!("7".parse::<SeedRange>().is_err());
    }

    #[test]
    fn tolerance_flags_override_defaults() {
        let cli = Cli::try_parse_from(["holant", "--tol-holant", "1e-6", "z", "g.json", "--tol-psd", "1e-7"]).unwrap();
        let t = cli.tol.resolve();
        assert_eq!(t.holant_classical, 1e-6);
        assert_eq!(t.holant_quantum, 1e-6);
        assert_eq!(t.psd, 1e-7);
        assert_eq!(t.inverse, Tolerances::default().inverse);
    }

    #[test]
    fn usage_errors_exit_two() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        assert_eq!(run_cli_with(["holant", "frobnicate"], &mut out, &mut err), EXIT_USAGE);
        assert_eq!(run_cli_with(["holant", "verify"], &mut out, &mut err), EXIT_USAGE);
        assert_eq!(run_cli_with(["holant", "--help"], &mut out, &mut err), EXIT_OK);
    }

    #[test]
    fn prefix_paths() {
        let (g, t) = prefixed(Path::new("out/run1"));
        assert_eq!(g, PathBuf::from("out/run1.graph.json"));
        assert_eq!(t, PathBuf::from("out/run1.transforms.json"));
    }
}
