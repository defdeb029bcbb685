//! Thin command-line front end; all logic lives in the library.

use clap::{Args, Parser, Subcommand};
use path_tsp::driver::{cmd_batch, cmd_solve, cmd_verify, BatchItem, RunConfig};
use path_tsp::instance::{Instance, InstanceFormat, MetricKind, BRUTE_FORCE_CAP};
use path_tsp::lp::{solve_relaxation, ArithMode};
use path_tsp::ratio::{rat_from_str, rat_to_f64, rat_to_string};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "path-tsp",
    about = "Best-of-many Christofides solver for the metric s-t-path TSP with machine-checkable certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct InstanceArgs {
    /// Instance file (TSPLIB text or the native JSON format).
    #[arg(long, conflicts_with = "random")]
    file: Option<PathBuf>,

    /// Input format for --file.
    #[arg(long, value_parser = ["tsplib", "native-json"])]
    format: Option<String>,

    /// Generate a random instance with this many cities.
    #[arg(long)]
    random: Option<usize>,

    /// Random metric kind: euclidean, graph-metric or random-closure.
    #[arg(long, default_value = "euclidean")]
    kind: String,

    /// Seed for --random.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Override the start city (default: first node / file value).
    #[arg(long)]
    start: Option<usize>,

    /// Override the end city (default: last node / file value).
    #[arg(long)]
    end: Option<usize>,
}

impl InstanceArgs {
    fn load(&self) -> path_tsp::Result<Instance> {
        let st = match (self.start, self.end) {
            (Some(s), Some(t)) => Some((s, t)),
            (None, None) => None,
            _ => {
                return Err(path_tsp::Error::Config(
                    "--start and --end must be given together".into(),
                ))
            }
        };
        if let Some(n) = self.random {
            let kind: MetricKind = self.kind.parse()?;
            let inst = Instance::random(self.seed, n, kind)?;
            return match st {
                None => Ok(inst),
                Some((s, t)) => Instance::new(
                    inst.name().to_string(),
                    inst.n(),
                    s,
                    t,
                    inst.costs().to_vec(),
                ),
            };
        }
        let Some(path) = &self.file else {
            return Err(path_tsp::Error::Config(
                "either --file or --random is required".into(),
            ));
        };
        let text = std::fs::read_to_string(path)?;
        let format = match self.format.as_deref() {
            Some("tsplib") => InstanceFormat::Tsplib,
            Some("native-json") => InstanceFormat::NativeJson,
            Some(other) => {
                return Err(path_tsp::Error::Config(format!("unknown format {other}")))
            }
            None => {
                if path.extension().is_some_and(|e| e == "json") {
                    InstanceFormat::NativeJson
                } else {
                    InstanceFormat::Tsplib
                }
            }
        };
        Instance::parse(&text, format, st)
    }
}

#[derive(Args, Clone)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,

    /// Rounding parameter; 0 selects exact mode, omitted picks a desk-scale
    /// default. Accepts rationals ("1/2") and decimals ("0.0006").
    #[arg(long)]
    epsilon: Option<String>,

    /// Force exact rational LP pivoting even on float-cost instances.
    #[arg(long)]
    exact: bool,

    /// Cap for the exhaustive optimum oracle.
    #[arg(long, default_value_t = BRUTE_FORCE_CAP)]
    max_brute_n: usize,

    /// Skip the brute-force optimum even when n allows it.
    #[arg(long)]
    no_opt: bool,

    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,

    /// Write the re-verification artifact set into this directory
    /// (defaults to $PATH_TSP_CACHE_DIR/<instance> when the variable is set).
    #[arg(long)]
    artifacts: Option<PathBuf>,
}

impl SolveArgs {
    fn config(&self) -> path_tsp::Result<RunConfig> {
        let epsilon_request = match &self.epsilon {
            None => None,
            Some(text) => Some(
                rat_from_str(text)
                    .ok_or_else(|| path_tsp::Error::Config(format!("bad epsilon {text:?}")))?,
            ),
        };
        Ok(RunConfig {
            epsilon_request,
            force_exact_lp: self.exact,
            max_brute_n: self.max_brute_n,
            compute_opt: !self.no_opt,
            ..RunConfig::default()
        })
    }

    fn artifacts_dir(&self, inst: &Instance) -> Option<PathBuf> {
        if let Some(dir) = &self.artifacts {
            return Some(dir.clone());
        }
        std::env::var_os("PATH_TSP_CACHE_DIR").map(|base| PathBuf::from(base).join(inst.name()))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and print the certificate summary.
    Solve(SolveArgs),

    /// Re-verify a run from its artifacts directory.
    Verify {
        /// Directory written by `solve --artifacts`.
        dir: PathBuf,
    },

    /// Solve many random instances concurrently and aggregate ratios.
    Batch {
        /// Seeds, as `a..b` (half-open) or a comma list.
        #[arg(long, default_value = "0..20")]
        seeds: String,

        /// City count per instance.
        #[arg(long, default_value_t = 8)]
        n: usize,

        /// Comma list of metric kinds.
        #[arg(long, default_value = "euclidean,graph-metric,random-closure")]
        kinds: String,

        /// Rounding parameter (same syntax as solve).
        #[arg(long)]
        epsilon: Option<String>,

        /// Force exact LP pivoting.
        #[arg(long)]
        exact: bool,

        #[arg(long, default_value_t = BRUTE_FORCE_CAP)]
        max_brute_n: usize,
    },

    /// Exhaustive optimum by dynamic programming over subsets.
    Brute {
        #[command(flatten)]
        instance: InstanceArgs,

        #[arg(long, default_value_t = BRUTE_FORCE_CAP)]
        max_brute_n: usize,
    },

    /// Solve the path relaxation only and dump the optimum vector.
    Lp {
        #[command(flatten)]
        instance: InstanceArgs,

        /// Force exact rational pivoting.
        #[arg(long)]
        exact: bool,

        /// Write the solution JSON here (stdout otherwise).
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn parse_seeds(text: &str) -> path_tsp::Result<Vec<u64>> {
    let text = text.trim();
    if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a
            .parse()
            .map_err(|_| path_tsp::Error::Config(format!("bad seed range {text:?}")))?;
        let b: u64 = b
            .parse()
            .map_err(|_| path_tsp::Error::Config(format!("bad seed range {text:?}")))?;
        return Ok((a..b).collect());
    }
    if text.is_empty() {
        return Ok(vec![]);
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| path_tsp::Error::Config(format!("bad seed {s:?}")))
        })
        .collect()
}

fn run() -> path_tsp::Result<bool> {
    match Cli::parse().command {
        Command::Solve(args) => {
            let inst = args.instance.load()?;
            let cfg = args.config()?;
            let outcome = cmd_solve(&inst, &cfg)?;
            print!("{}", outcome.report.summary());
            if let Some(path) = &args.report {
                std::fs::write(path, outcome.report.to_json())?;
                println!("report written to {}", path.display());
            }
            if let Some(dir) = args.artifacts_dir(&inst) {
                outcome.save_artifacts(&dir, &inst)?;
                println!("artifacts written to {}", dir.display());
            }
            Ok(outcome.report.all_certificates_pass())
        }
        Command::Verify { dir } => {
            cmd_verify(&dir)?;
            println!("verify: pass ({})", dir.display());
            Ok(true)
        }
        Command::Batch {
            seeds,
            n,
            kinds,
            epsilon,
            exact,
            max_brute_n,
        } => {
            let seeds = parse_seeds(&seeds)?;
            let kinds: Vec<MetricKind> = kinds
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.trim().parse())
                .collect::<path_tsp::Result<_>>()?;
            let mut items = Vec::new();
            for &seed in &seeds {
                for &kind in &kinds {
                    items.push(BatchItem { seed, n, kind });
                }
            }
            let epsilon_request = match epsilon {
                None => None,
                Some(text) => Some(
                    rat_from_str(&text)
                        .ok_or_else(|| path_tsp::Error::Config(format!("bad epsilon {text:?}")))?,
                ),
            };
            let cfg = RunConfig {
                epsilon_request,
                force_exact_lp: exact,
                max_brute_n,
                ..RunConfig::default()
            };
            let stats = cmd_batch(&items, &cfg);
            println!("runs: {}", stats.runs);
            if let Some((exact_ratio, approx)) = &stats.max_ratio_lp {
                println!("max ratio vs lp: {exact_ratio} ({approx:.6})");
            }
            if let Some(mean) = stats.mean_ratio_lp {
                println!("mean ratio vs lp: {mean:.6}");
            }
            if let Some(margin) = stats.worst_cut_margin {
                println!("worst benefit slack: {margin:.6}");
            }
            for (label, err) in &stats.failures {
                println!("FAIL {label}: {err}");
            }
            Ok(stats.all_passed())
        }
        Command::Brute {
            instance,
            max_brute_n,
        } => {
            let inst = instance.load()?;
            let opt = inst.brute_force_opt(max_brute_n)?;
            println!(
                "optimum {} ({:.6}): {:?}",
                rat_to_string(&opt.cost),
                rat_to_f64(&opt.cost),
                opt.order
            );
            Ok(true)
        }
        Command::Lp {
            instance,
            exact,
            report,
        } => {
            let inst = instance.load()?;
            let mode = if exact || inst.integral() {
                ArithMode::Exact
            } else {
                ArithMode::Float
            };
            let sol = solve_relaxation(&inst, mode)?;
            println!(
                "lp value {} ({:.6}), {} support edges",
                rat_to_string(&sol.value),
                rat_to_f64(&sol.value),
                sol.support().len()
            );
            let json = sol.to_json(&inst);
            match report {
                Some(path) => std::fs::write(path, json)?,
                None => println!("{json}"),
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
