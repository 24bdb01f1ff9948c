use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use grassop::io::{serialize_path, OperatorDoc};
use grassop::suite::{default_signatures, run_suite, SuiteConfig};
use grassop::{deserialize_operator, serialize_operator};
use grassop_core::adjacency::{is_adjacent, pseudo_adjacent_c3, pseudo_adjacent_general, random_hermitian_on};
use grassop_core::cliques::{classify_clique, Orientation};
use grassop_core::connectivity::connect;
use grassop_core::random::{random_subspace, random_subspace_in};
use grassop_core::spectral::random_operator;
use grassop_core::{orthonormalize, ClassSignature, SpectralOperator, Subspace, Tolerance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

#[derive(Parser)]
#[command(name = "grassop", version, about = "Adjacency, paths, cliques and symmetries of conjugacy classes of Hermitian operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SeedArg {
    /// Generator seed
    #[arg(long, env = "GRASSOP_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a random operator of the class (sigma, d)
    Sample {
        /// Eigenvalues, comma separated
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        sigma: Vec<f64>,
        /// Multiplicities, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        d: Vec<usize>,
        #[command(flatten)]
        seed: SeedArg,
        /// Output file (standard output when omitted)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Adjacency verdict for two operator files
    Adjacent { a: PathBuf, b: PathBuf },
    /// Connect two operator files by a path of adjacent operators
    Path {
        a: PathBuf,
        b: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Classify operator files that form a clique
    Clique {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Write a rank-2 pair to a.json and b.json in the output directory
    Counterexample {
        /// The explicit pair on C^3 (not adjacent)
        #[arg(long)]
        c3: bool,
        /// For the C + aP_X recipe: take X orthogonal to Im C, which makes the pair adjacent
        #[arg(long, conflicts_with = "c3")]
        orthogonal: bool,
        /// Ambient dimension for the recipe
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(4..=64), conflicts_with = "c3")]
        n: u64,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(short, long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Run the property suite
    Verify {
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u64).range(1..=64))]
        max_ambient: u64,
        /// Only run the named tests
        #[arg(long = "test")]
        tests: Vec<String>,
        /// Print the full report as JSON
        #[arg(long)]
        json: bool,
        /// Include per-test wall time in the report
        #[arg(long)]
        timing: bool,
    },
}

/// Failure that maps to exit status 1.
struct Failed(String);

impl<E: std::fmt::Display> From<E> for Failed {
    fn from(e: E) -> Self {
        Failed(e.to_string())
    }
}

type CliResult = Result<bool, Failed>;

fn read_operator(path: &Path) -> Result<SpectralOperator, Failed> {
    let text = fs::read_to_string(path).map_err(|e| Failed(format!("{}: {e}", path.display())))?;
    deserialize_operator(&text).map_err(|e| Failed(format!("{}: {e}", path.display())))
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Failed> {
    match output {
        Some(p) => fs::write(p, format!("{text}\n")).map_err(|e| Failed(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Sample { sigma, d, seed, output } => {
            let sig = ClassSignature::new(sigma, d)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed.seed);
            emit(&serialize_operator(&random_operator(&sig, &mut rng)), output.as_deref())?;
        }
        Command::Adjacent { a, b } => {
            let (a, b) = (read_operator(&a)?, read_operator(&b)?);
            let v = is_adjacent(&a, &b)?;
            let out = json!({
                "a1": v.a1,
                "a2": v.a2,
                "rank": v.diff_rank,
                "type": v.type_pair.map(|(i, j)| [i, j]),
                "adjacent": v.adjacent(),
            });
            println!("{out}");
        }
        Command::Path { a, b, output } => {
            let (a, b) = (read_operator(&a)?, read_operator(&b)?);
            let p = connect(&a, &b)?;
            p.validate()?;
            emit(&serialize_path(&p), output.as_deref())?;
        }
        Command::Clique { files } => {
            let ops = files.iter().map(|f| read_operator(f)).collect::<Result<Vec<_>, _>>()?;
            let (pair, orientation, d) = classify_clique(&ops)?;
            let (i, j) = d.pair();
            let out = json!({
                "pair": [pair.0, pair.1],
                "orientation": match orientation { Orientation::Star => "star", Orientation::Top => "top" },
                "moved": [i, j],
                "maximal": d.is_maximal(),
                "base": OperatorDoc::from_operator(d.base()),
            });
            println!("{out}");
        }
        Command::Counterexample { c3, orthogonal, n, seed, out_dir } => {
            let (a, b, info) = if c3 {
                let (a, b) = pseudo_adjacent_c3();
                (a, b, json!({"construction": "c3"}))
            } else {
                general_pair(n as usize, orthogonal, seed.seed)?
            };
            fs::create_dir_all(&out_dir).map_err(|e| Failed(format!("{}: {e}", out_dir.display())))?;
            for (name, op) in [("a.json", &a), ("b.json", &b)] {
                emit(&serialize_operator(op), Some(&out_dir.join(name)))?;
            }
            println!("{info}");
        }
        Command::Verify { seed, trials, max_ambient, tests, json, timing } => {
            let cfg = SuiteConfig {
                seed: seed.seed,
                trials: trials as usize,
                max_ambient: max_ambient as usize,
                signatures: default_signatures(),
                only: if tests.is_empty() { None } else { Some(tests) },
                timing,
                ..SuiteConfig::default()
            };
            let report = run_suite(&cfg)?;
            if json {
                println!("{}", report.to_json());
            } else {
                for t in &report.tests {
                    let status = if t.failures.is_empty() { "ok" } else { "FAILED" };
                    println!(
                        "{:<24} {:>6} passed {:>4} skipped {:>4} failed  {status}",
                        t.name,
                        t.passed,
                        t.skipped,
                        t.failures.len()
                    );
                }
            }
            if !report.passed() {
                eprintln!("{} property failures", report.total_failures);
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A fresh `C + aP_X` / `C + aP_Y` pair on `C^n`.
fn general_pair(
    n: usize,
    orthogonal: bool,
    seed: u64,
) -> Result<(SpectralOperator, SpectralOperator, serde_json::Value), Failed> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = Tolerance::DEFAULT;
    for _ in 0..20 {
        let r = rng.random_range(1..=n - 2);
        let c = random_hermitian_on(&Subspace::full(n, tol), r, &mut rng)?;
        let x = if orthogonal {
            random_subspace_in(&orthonormalize(&c, tol)?.complement(None)?, 1, &mut rng)?
        } else {
            random_subspace(n, 1, tol, &mut rng)?
        };
        let a = if rng.random_bool(0.5) { 2.5 } else { -3.5 };
        match pseudo_adjacent_general(&c, &x, a, &mut rng) {
            Ok(inst) => {
                let d = inst.diagnostics;
                let info = json!({
                    "construction": "general",
                    "rank_of_c": r,
                    "x_orthogonal_to_core": d.x_orthogonal_to_core,
                    "a1": d.a1,
                    "a2": d.a2,
                    "rank": d.diff_rank,
                });
                return Ok((inst.a, inst.b, info));
            }
            Err(grassop_core::Error::DegenerateInput(_) | grassop_core::Error::InvalidSignature(_)) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(Failed("no non-degenerate instance in 20 draws".into()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
