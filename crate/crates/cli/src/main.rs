//! `pom`: construct, score, scramble, and certify strategies for the n-bit
//! parity-oblivious multiplexing game.
//!
//! Subcommands: `generate`, `verify`, `bounds`, `scramble`, `extract`,
//! `geometry`. All file I/O is canonical JSON or CSV; re-runs with the same
//! inputs and seeds are byte-identical.
//!
//! Exit codes: 0 = pass, 1 = structural or parse error, 2 = certified-fail
//! (the inputs were well-formed but the checks did not pass).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pom_core::error::Error;
use pom_core::extract::certify;
use pom_core::json::{
    build_verify_report, certification_to_json, geometry_pairs_csv, geometry_vertices_csv,
    lp_result_to_json, read_strategy_file, write_json_file, write_strategy_file, BoundsJson,
    MatrixJson, ScrambleSidecarJson,
};
use pom_core::optimal::{optimal_strategy, scramble};
use pom_core::oracle::{build_lp_with_cap, solve_exact, ORACLE_MAX_N};
use pom_core::task::{classical_bound, quantum_bound, success_probability};
use pom_core::tol::Tolerances;

/// Hard ceiling for `bounds --lp --force`: the dense tableau needs about a
/// gigabyte at n = 6 and is hopeless beyond that.
const ORACLE_FORCE_MAX_N: u32 = 6;

#[derive(Parser)]
#[command(
    name = "pom",
    version,
    about = "Parity-oblivious multiplexing: strategies, bounds, and device-independent certification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    tols: TolArgs,
}

/// Per-name tolerance overrides. A JSON preset file named by the
/// `POM_TOL_PROFILE` environment variable is applied first, then these.
#[derive(Args)]
struct TolArgs {
    #[arg(long = "tol-hermiticity", global = true, value_name = "REAL")]
    hermiticity: Option<f64>,
    #[arg(long = "tol-dichotomy", global = true, value_name = "REAL")]
    dichotomy: Option<f64>,
    #[arg(long = "tol-state", global = true, value_name = "REAL")]
    state: Option<f64>,
    #[arg(long = "tol-parity", global = true, value_name = "REAL")]
    parity: Option<f64>,
    #[arg(long = "tol-anticommutation", global = true, value_name = "REAL")]
    anticommutation: Option<f64>,
    #[arg(long = "tol-certification", global = true, value_name = "REAL")]
    certification: Option<f64>,
    #[arg(long = "tol-eigen-classify", global = true, value_name = "REAL")]
    eigen_classify: Option<f64>,
    #[arg(long = "tol-score-margin", global = true, value_name = "REAL")]
    score_margin: Option<f64>,
}

impl TolArgs {
    fn resolve(&self) -> Result<Tolerances, Error> {
        let mut tols = Tolerances::default();
        if let Ok(path) = std::env::var("POM_TOL_PROFILE") {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Parse(format!("POM_TOL_PROFILE {path}: {e}")))?;
            tols.apply_profile_json(&text)?;
        }
        let overrides = [
            ("hermiticity", self.hermiticity),
            ("dichotomy", self.dichotomy),
            ("state", self.state),
            ("parity", self.parity),
            ("anticommutation", self.anticommutation),
            ("certification", self.certification),
            ("eigen_classify", self.eigen_classify),
            ("score_margin", self.score_margin),
        ];
        for (name, value) in overrides {
            if let Some(v) = value {
                tols.set(name, v)?;
            }
        }
        Ok(tols)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Construct the optimal strategy for n and write it as JSON.
    Generate {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value = "strategy.json")]
        out: PathBuf,
        /// Recorded in the output for provenance; generation is deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Score a strategy file and check the obliviousness constraint.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the classical and quantum bounds; --lp runs the exact oracle.
    Bounds {
        #[arg(long)]
        n: u32,
        /// Solve the exact-rational linear program as well.
        #[arg(long)]
        lp: bool,
        /// Raise the oracle cap past n = 5 (slow and memory-hungry).
        #[arg(long)]
        force: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Embed a strategy in a larger space and hide it with a seeded unitary.
    Scramble {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "J", default_value_t = 1)]
        junk: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "scrambled.json")]
        out: PathBuf,
        /// Where to put the hiding unitary; defaults to `<out>.unitary.json`
        /// next to the output.
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// Run the full certification pipeline on a strategy file.
    Extract {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the hypercube vertex and pair-distance tables as CSV.
    Geometry {
        #[arg(long)]
        n: u32,
        #[arg(long = "out-dir", default_value = ".")]
        out_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Error> {
    let tols = cli.tols.resolve()?;
    match &cli.command {
        Command::Generate { n, out, seed } => cmd_generate(*n, out, *seed, &tols),
        Command::Verify { input, out } => cmd_verify(input, out.as_deref(), &tols),
        Command::Bounds { n, lp, force, out } => cmd_bounds(*n, *lp, *force, out.as_deref()),
        Command::Scramble {
            input,
            junk,
            seed,
            out,
            sidecar,
        } => cmd_scramble(input, *junk, *seed, out, sidecar.as_deref(), &tols),
        Command::Extract { input, out } => cmd_extract(input, out.as_deref(), &tols),
        Command::Geometry { n, out_dir } => cmd_geometry(*n, out_dir),
    }
}

fn bound_line(n: u32) -> Result<(String, f64), Error> {
    let cb = classical_bound(n)?;
    let qb = quantum_bound(n)?;
    Ok((format!("{}/{}", cb.numer(), cb.denom()), qb))
}

fn cmd_generate(n: u32, out: &Path, seed: u64, tols: &Tolerances) -> Result<u8, Error> {
    let strategy = optimal_strategy(n, tols)?;
    write_strategy_file(out, &strategy, seed)?;
    let score = success_probability(&strategy);
    let (cb, qb) = bound_line(n)?;
    println!(
        "wrote {} (n = {n}, d = {}): success probability {score:.10}, classical {cb}, quantum {qb:.10}",
        out.display(),
        strategy.dim()
    );
    Ok(0)
}

fn cmd_verify(input: &Path, out: Option<&Path>, tols: &Tolerances) -> Result<u8, Error> {
    let (strategy, seed) = read_strategy_file(input, tols)?;
    let report = build_verify_report(&strategy, tols, seed)?;
    println!(
        "strategy `{}`: n = {}, d = {}",
        report.label, report.n, report.d
    );
    println!(
        "  success probability {:.10} (classical {}, quantum {:.10})",
        report.success_probability, report.classical_bound_exact, report.quantum_bound
    );
    println!(
        "  parity-obliviousness residual {:.3e}: {}",
        report.parity_residual,
        if report.pass_flags.parity {
            "pass"
        } else {
            "FAIL"
        }
    );
    println!(
        "  reaches quantum bound: {}",
        if report.pass_flags.success_meets_quantum_bound {
            "pass"
        } else {
            "FAIL"
        }
    );
    if let Some(path) = out {
        write_json_file(path, &report)?;
        println!("wrote {}", path.display());
    }
    Ok(if report.pass() { 0 } else { 2 })
}

fn cmd_bounds(n: u32, lp: bool, force: bool, out: Option<&Path>) -> Result<u8, Error> {
    let cb = classical_bound(n)?;
    let qb = quantum_bound(n)?;
    let classical = format!("{}/{}", cb.numer(), cb.denom());
    let mut lp_json = None;
    let line = if lp {
        let cap = if force {
            ORACLE_FORCE_MAX_N
        } else {
            ORACLE_MAX_N
        };
        if force && n > ORACLE_MAX_N {
            eprintln!(
                "warning: n = {n} is past the default oracle cap ({ORACLE_MAX_N}); \
                 this run may take minutes and substantial memory"
            );
        }
        let program = build_lp_with_cap(n, cap)?;
        let solution = solve_exact(&program)?;
        let result = lp_result_to_json(n, &solution)?;
        let verdict = if result.matches_formula {
            "match"
        } else {
            "MISMATCH"
        };
        let line = format!(
            "classical {classical} (LP: {}/{}, {verdict}), quantum {qb:.6}",
            result.value_numerator, result.value_denominator
        );
        lp_json = Some(result);
        line
    } else {
        format!("classical {classical}, quantum {qb:.6}")
    };
    println!("{line}");
    let mismatch = lp_json.as_ref().is_some_and(|r| !r.matches_formula);
    if let Some(path) = out {
        let doc = BoundsJson {
            classical_denominator: *cb.denom() as u64,
            classical_numerator: *cb.numer() as u64,
            lp: lp_json,
            n,
            quantum_bound: qb,
            seed: 0,
        };
        write_json_file(path, &doc)?;
        println!("wrote {}", path.display());
    }
    Ok(if mismatch { 2 } else { 0 })
}

fn default_sidecar(out: &Path) -> PathBuf {
    match out.extension().and_then(|e| e.to_str()) {
        Some("json") => out.with_extension("unitary.json"),
        _ => {
            let mut name = out.as_os_str().to_owned();
            name.push(".unitary.json");
            PathBuf::from(name)
        }
    }
}

fn cmd_scramble(
    input: &Path,
    junk: usize,
    seed: u64,
    out: &Path,
    sidecar: Option<&Path>,
    tols: &Tolerances,
) -> Result<u8, Error> {
    let (strategy, _) = read_strategy_file(input, tols)?;
    let (hidden, unitary) = scramble(&strategy, junk, seed, tols)?;
    write_strategy_file(out, &hidden, seed)?;
    let sidecar_path = sidecar
        .map(Path::to_path_buf)
        .unwrap_or_else(|| default_sidecar(out));
    write_json_file(
        &sidecar_path,
        &ScrambleSidecarJson {
            junk_dim: junk,
            seed,
            unitary: MatrixJson::from_matrix(&unitary),
        },
    )?;
    println!(
        "wrote {} (d = {}) and hiding unitary {}",
        out.display(),
        hidden.dim(),
        sidecar_path.display()
    );
    Ok(0)
}

fn cmd_extract(input: &Path, out: Option<&Path>, tols: &Tolerances) -> Result<u8, Error> {
    let (strategy, seed) = read_strategy_file(input, tols)?;
    let report = certify(&strategy, tols);
    println!("{}", report.summary());
    if let Some(path) = out {
        write_json_file(path, &certification_to_json(&report, seed))?;
        println!("wrote {}", path.display());
    }
    Ok(if report.pass { 0 } else { 2 })
}

fn cmd_geometry(n: u32, out_dir: &Path) -> Result<u8, Error> {
    std::fs::create_dir_all(out_dir)?;
    let vertices = geometry_vertices_csv(n)?;
    let pairs = geometry_pairs_csv(n)?;
    let vpath = out_dir.join(format!("vertices_n{n}.csv"));
    let ppath = out_dir.join(format!("pairs_n{n}.csv"));
    std::fs::write(&vpath, vertices)?;
    std::fs::write(&ppath, pairs)?;
    println!("wrote {} and {}", vpath.display(), ppath.display());
    Ok(0)
}
