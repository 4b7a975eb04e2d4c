//! Command-line front end for the path inversion workbench: simulate and
//! replay trajectories, enumerate and count the path space, run the three
//! inversion solvers, produce the experiment CSVs, and certify graph
//! embeddings. Exit codes: 0 on success, 1 on usage or input errors, 2 when
//! a resource cap is exceeded.

mod instance;

use std::fmt;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use spip_core::dynamics::{replay_trajectory, sample_trajectory, SymbolicCode, Trajectory};
use spip_core::error::SpipError;
use spip_core::experiments::{
    default_suite, run_suite, sweep_csv, sweep_surface,
};
use spip_core::inversion::{invert_dfs, invert_mitm, invert_random, solution_to_json};
use spip_core::pathspace::{count_paths_to, enumerate_paths};
use spip_core::reductions::{dag_path_count_oracle, embed_and_certify, recommended_spacing, Dag};
use spip_core::scalar::{format_rat, parse_rat, rat, Rat};
use spip_core::SpipInstance;

use instance::load_instance;

const DEFAULT_CAP: u64 = 10_000_000;

#[derive(Parser)]
#[command(name = "spip", version, about = "Workbench for symbolic path inversion over noisy contractive lattice maps")]
struct Cli {
    /// Worker threads for parallel commands (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Algo {
    Dfs,
    Mitm,
    Random,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample trajectories, or replay one fixed noise realization.
    Simulate {
        #[arg(long)]
        instance: PathBuf,
        /// Fixed symbolic code "1,2,1"; omitted codes are drawn uniformly.
        #[arg(long)]
        code: Option<String>,
        /// Replay with this flat noise list "dx1,dy1,dx2,dy2,..." (needs --code).
        #[arg(long)]
        deltas: Option<String>,
        #[arg(long, default_value_t = 1)]
        trials: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate every (code, trajectory) pair and print the census JSON.
    Enumerate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the exact number of pairs that land on the instance target.
    Count {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover codes and trajectories that reach the instance target.
    Invert {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Algo::Dfs)]
        algo: Algo,
        /// Stop the dfs solver after this many solutions (default: all).
        #[arg(long)]
        max_solutions: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u64,
        /// Sample count for the random solver.
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the eight-experiment endpoint suite and print its CSV.
    Stats {
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the path-space size surface over a length × noise grid.
    Sweep {
        #[arg(long, default_value_t = 1)]
        n_min: u64,
        #[arg(long, default_value_t = 20)]
        n_max: u64,
        #[arg(long, default_value = "1/20")]
        eps_min: String,
        #[arg(long, default_value = "1")]
        eps_max: String,
        #[arg(long, default_value_t = 20)]
        eps_count: usize,
        #[arg(long, default_value_t = 10)]
        transforms: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Embed a DAG as path-counting instances and certify the embedding.
    Reduce {
        /// Graph file: "V E" header, "s t" endpoints, then one edge per line.
        #[arg(long)]
        dag: PathBuf,
        #[arg(long, default_value = "1/4")]
        epsilon: String,
        /// Vertex spacing; when omitted, derived from the longest path.
        #[arg(long)]
        spacing: Option<i64>,
        #[arg(long, default_value_t = 3)]
        rounds: u32,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum CliError {
    Spip(SpipError),
    Io(std::io::Error),
    Input(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Spip(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Input(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<SpipError> for CliError {
    fn from(e: SpipError) -> Self {
        CliError::Spip(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn exit_code(err: &CliError) -> i32 {
    match err {
        CliError::Spip(SpipError::CapExceeded { .. })
        | CliError::Spip(SpipError::WindowOverflow { .. }) => 2,
        _ => 1,
    }
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap exits 2 on usage errors by default; the contract here is 1.
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let threads = cli.threads;
    let run = || match dispatch(cli.cmd) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    match threads {
        Some(t) => {
            let pool = match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: {e}");
                    return 1;
                }
            };
            pool.install(run)
        }
        None => run(),
    }
}

/// Write to --out when given, stdout otherwise.
fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes())?;
            Ok(())
        }
    }
}

/// Seed precedence: command line, then the instance file, then fresh
/// entropy. A generated seed is echoed to stderr so the run can be replayed.
fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> u64 {
    if let Some(s) = flag.or(file) {
        return s;
    }
    let s: u64 = rand::random();
    eprintln!("seed: {s}");
    s
}

fn parse_code(text: &str, inst: &SpipInstance) -> Result<SymbolicCode, CliError> {
    let mut symbols = Vec::new();
    for part in text.split(',') {
        let sym: u32 = part
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("bad code symbol {:?}", part.trim())))?;
        symbols.push(sym);
    }
    if symbols.len() != inst.n {
        return Err(CliError::Input(format!(
            "code has {} symbols, instance length is {}",
            symbols.len(),
            inst.n
        )));
    }
    Ok(SymbolicCode::new(symbols, inst.alphabet_len())?)
}

fn parse_deltas(text: &str, n: usize) -> Result<Vec<[Rat; 2]>, CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 2 * n {
        return Err(CliError::Input(format!(
            "expected {} noise components (2 per step), got {}",
            2 * n,
            parts.len()
        )));
    }
    let mut deltas = Vec::with_capacity(n);
    for pair in parts.chunks(2) {
        let dx = parse_rat(pair[0])?;
        let dy = parse_rat(pair[1])?;
        deltas.push([dx, dy]);
    }
    Ok(deltas)
}

fn trajectory_json(code: &SymbolicCode, traj: &Trajectory) -> serde_json::Value {
    let mut v = solution_to_json(code, traj);
    if let Some(noises) = &traj.noises {
        let rows: Vec<serde_json::Value> = noises
            .iter()
            .map(|d| json!([format_rat(&d[0]), format_rat(&d[1])]))
            .collect();
        v["noises"] = json!(rows);
    }
    v
}

fn dispatch(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Simulate {
            instance,
            code,
            deltas,
            trials,
            seed,
            out,
        } => {
            let loaded = load_instance(&instance).map_err(CliError::Input)?;
            let inst = loaded.instance;
            if let Some(delta_text) = deltas {
                let code_text = code
                    .ok_or_else(|| CliError::Input("--deltas replay needs --code".into()))?;
                let code = parse_code(&code_text, &inst)?;
                let deltas = parse_deltas(&delta_text, inst.n)?;
                let mut traj = replay_trajectory(&inst.ts, &code, inst.x0, &inst.noise, &deltas)?;
                traj.noises = Some(deltas);
                let mut lines = trajectory_json(&code, &traj).to_string();
                lines.push('\n');
                return emit(&out, &lines);
            }
            let seed = resolve_seed(seed, loaded.seed);
            let fixed = code.map(|c| parse_code(&c, &inst)).transpose()?;
            let m = inst.alphabet_len();
            let mut lines = String::new();
            for trial in 0..trials {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(trial);
                let code = match &fixed {
                    Some(c) => c.clone(),
                    None => {
                        use rand::Rng as _;
                        let symbols: Vec<u32> =
                            (0..inst.n).map(|_| rng.random_range(1..=m)).collect();
                        SymbolicCode::new(symbols, m).expect("drawn from the alphabet")
                    }
                };
                let traj = sample_trajectory(&inst.ts, &code, inst.x0, &inst.noise, &mut rng);
                lines.push_str(&trajectory_json(&code, &traj).to_string());
                lines.push('\n');
            }
            emit(&out, &lines)
        }
        Cmd::Enumerate { instance, cap, out } => {
            let inst = load_instance(&instance).map_err(CliError::Input)?.instance;
            let census = enumerate_paths(&inst, cap)?;
            let mut text = census.to_json().to_string();
            text.push('\n');
            emit(&out, &text)
        }
        Cmd::Count { instance, cap, out } => {
            let inst = load_instance(&instance).map_err(CliError::Input)?.instance;
            if inst.target.is_none() {
                return Err(CliError::Input(
                    "instance file has no target to count paths to".into(),
                ));
            }
            let count = count_paths_to(&inst, cap)?;
            emit(&out, &format!("{count}\n"))
        }
        Cmd::Invert {
            instance,
            algo,
            max_solutions,
            cap,
            trials,
            seed,
            out,
        } => {
            let loaded = load_instance(&instance).map_err(CliError::Input)?;
            let inst = loaded.instance;
            if inst.target.is_none() {
                return Err(CliError::Input(
                    "instance file has no target to invert toward".into(),
                ));
            }
            let result = match algo {
                Algo::Dfs => invert_dfs(&inst, max_solutions.unwrap_or(u64::MAX), cap)?,
                Algo::Mitm => invert_mitm(&inst, cap)?,
                Algo::Random => {
                    let seed = resolve_seed(seed, loaded.seed);
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    invert_random(&inst, trials, &mut rng)?
                }
            };
            let mut lines = String::new();
            for (code, traj) in &result.solutions {
                lines.push_str(&solution_to_json(code, traj).to_string());
                lines.push('\n');
            }
            emit(&out, &lines)?;
            let mut summary = format!(
                "solutions={} exhausted={} nodes={} wall_s={:.6}",
                result.solutions.len(),
                result.exhausted,
                result.nodes_expanded,
                result.wall_time_s
            );
            if let Some(rate) = result.hit_rate {
                summary.push_str(&format!(" hit_rate={rate:.6}"));
            }
            eprintln!("{summary}");
            Ok(())
        }
        Cmd::Stats { trials, seed, out } => {
            if trials == 0 {
                return Err(CliError::Input("--trials must be positive".into()));
            }
            let seed = resolve_seed(seed, None);
            let (_, csv) = run_suite(&default_suite(trials, seed));
            emit(&out, &csv)
        }
        Cmd::Sweep {
            n_min,
            n_max,
            eps_min,
            eps_max,
            eps_count,
            transforms,
            out,
        } => {
            if n_min == 0 || n_min > n_max {
                return Err(CliError::Input("need 1 <= n-min <= n-max".into()));
            }
            if eps_count == 0 {
                return Err(CliError::Input("--eps-count must be positive".into()));
            }
            if transforms == 0 {
                return Err(CliError::Input("--transforms must be positive".into()));
            }
            let lo = parse_rat(&eps_min)?;
            let hi = parse_rat(&eps_max)?;
            if lo <= rat(0, 1) || hi < lo {
                return Err(CliError::Input(
                    "need 0 < eps-min <= eps-max".into(),
                ));
            }
            // Evenly spaced exact rationals, endpoints included.
            let epsilons: Vec<Rat> = if eps_count == 1 {
                vec![lo]
            } else {
                let step = (&hi - &lo) / rat(eps_count as i64 - 1, 1);
                (0..eps_count)
                    .map(|i| &lo + &step * rat(i as i64, 1))
                    .collect()
            };
            let cells = sweep_surface(n_min, n_max, &epsilons, transforms);
            emit(&out, &sweep_csv(&cells))
        }
        Cmd::Reduce {
            dag,
            epsilon,
            spacing,
            rounds,
            cap,
            out,
        } => {
            let text = std::fs::read_to_string(&dag)
                .map_err(|e| CliError::Input(format!("{}: {e}", dag.display())))?;
            let graph = Dag::parse(&text)?;
            let eps = parse_rat(&epsilon)?;
            let spacing = spacing.unwrap_or_else(|| {
                let longest = dag_path_count_oracle(&graph)
                    .keys()
                    .next_back()
                    .copied()
                    .unwrap_or(0);
                recommended_spacing(longest)
            });
            match embed_and_certify(&graph, &eps, spacing, rounds, cap) {
                Ok(cert) => {
                    println!("PASS total={}", cert.report.total_spip);
                    eprintln!(
                        "lengths={} rounds={} spacing={}",
                        cert.report.per_length.len(),
                        cert.rounds_used,
                        cert.embedding.spacing()
                    );
                    if let Some(path) = out {
                        let mut text = cert.report.to_json().to_string();
                        text.push('\n');
                        emit(&Some(path), &text)?;
                    }
                    Ok(())
                }
                Err(SpipError::SpacingTooSmall { spacing, reason }) => {
                    // A completed run with a negative verdict, not a usage error.
                    println!("FAIL spacing={spacing} {reason}");
                    Ok(())
                }
                Err(e) => Err(e.into()),
            }
        }
    }
}
