//! The `raggio-kit` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::FdAlgebra;
use crate::bell;
use crate::entanglement;
use crate::error::{Error, Result};
use crate::formats::{self, BornJson, Pair, PureJson};
use crate::harness::{self, HarnessConfig};
use crate::states::PureVector;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INCONSISTENT: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "raggio-kit", version, about = "States, entanglement and CHSH on finite-dimensional C*-algebras")]
struct Cli {
    /// Report format on standard output.
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads for per-sample work.
    #[arg(long, global = true, env = "RAGGIO_KIT_THREADS", default_value_t = 1,
          value_parser = clap::value_parser!(u32).range(1..))]
    threads: u32,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Born probabilities |ψ_i|² of a vector, or the diagonal of a density matrix.
    Born(BornArgs),
    /// Schmidt coefficients of a vector on M_n ⊗ M_m.
    Schmidt(SchmidtArgs),
    /// Decide whether a bipartite state is a mixture of product states.
    Separability(SeparabilityArgs),
    /// Maximize the CHSH functional over observables by see-saw.
    Chsh(ChshArgs),
    /// Check decomposability and the CHSH bound on sampled states of A ⊗ B.
    RaggioCheck(RaggioArgs),
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct VectorSource {
    /// Inline vector as JSON `[[re,im],...]`; rescaled to unit norm.
    #[arg(long)]
    psi: Option<String>,
    /// State file (vector or density matrix).
    #[arg(long)]
    state: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BornArgs {
    #[command(flatten)]
    source: VectorSource,
}

#[derive(Args, Debug)]
struct SchmidtArgs {
    #[command(flatten)]
    source: VectorSource,
    /// First factor, as shorthand (needed for an inline vector).
    #[arg(long, requires = "b")]
    a: Option<String>,
    /// Second factor, as shorthand.
    #[arg(long, requires = "a")]
    b: Option<String>,
}

#[derive(Args, Debug)]
struct SeparabilityArgs {
    /// State file on a tensor-product algebra.
    #[arg(long)]
    state: PathBuf,
    /// Iteration budget for the product-state search.
    #[arg(long, default_value_t = harness::DEFAULT_BUDGET)]
    budget: usize,
    #[arg(long)]
    seed: u64,
}

#[derive(Args, Debug)]
struct ChshArgs {
    /// State file on a tensor-product algebra.
    #[arg(long)]
    state: PathBuf,
    #[arg(long, default_value_t = bell::DEFAULT_RESTARTS)]
    restarts: usize,
    #[arg(long)]
    seed: u64,
}

#[derive(Args, Debug)]
struct RaggioArgs {
    /// First factor, as shorthand (e.g. `M2`, `D3`, `M2+D1`).
    #[arg(long)]
    a: String,
    /// Second factor, as shorthand.
    #[arg(long)]
    b: String,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = harness::DEFAULT_BUDGET)]
    budget: usize,
    #[arg(long, default_value_t = bell::DEFAULT_RESTARTS)]
    restarts: usize,
    /// Largest total dimension of A ⊗ B accepted.
    #[arg(long, default_value_t = harness::DEFAULT_DIM_CAP)]
    dim_cap: usize,
}

/// Runs the command line on `args` (program name first), writing the report
/// to `out` and diagnostics to `err`; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match dispatch(&cli) {
        Ok((report, code)) => {
            let text = match cli.format {
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
                    s.push('\n');
                    s
                }
                Format::Text => formats::render_text(&report),
            };
            if out.write_all(text.as_bytes()).is_err() {
                return EXIT_DOMAIN;
            }
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_DOMAIN
        }
    }
}

fn to_value<T: Serialize>(x: &T) -> serde_json::Value {
    serde_json::to_value(x).expect("report serializes")
}

fn dispatch(cli: &Cli) -> Result<(serde_json::Value, i32)> {
    match &cli.command {
        Command::Born(args) => {
            let probabilities = match &args.source.psi {
                Some(text) => inline_vector(text, None)?.restrict_to_diagonal(),
                None => {
                    let path = args.source.state.as_ref().expect("clap enforces a source");
                    formats::read_any_state(&read_file(path)?)?.diagonal_probabilities()
                }
            };
            Ok((to_value(&BornJson { probabilities }), EXIT_OK))
        }
        Command::Schmidt(args) => {
            let owner = match (&args.a, &args.b) {
                (Some(a), Some(b)) => Some(FdAlgebra::tensor(&a.parse()?, &b.parse()?)),
                _ => None,
            };
            let v = match &args.source.psi {
                Some(text) => inline_vector(text, owner.as_ref())?,
                None => {
                    let path = args.source.state.as_ref().expect("clap enforces a source");
                    file_vector(path, owner.as_ref())?
                }
            };
            let p = entanglement::is_entangled_pure(&v)?;
            Ok((to_value(&formats::schmidt_to_json(&p)), EXIT_OK))
        }
        Command::Separability(args) => {
            let s = formats::read_any_state(&read_file(&args.state)?)?;
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let v = entanglement::separability_test(&s, args.budget, &mut rng)?;
            Ok((to_value(&formats::verdict_to_json(&v)), EXIT_OK))
        }
        Command::Chsh(args) => {
            let s = formats::read_any_state(&read_file(&args.state)?)?;
            let r = bell::chsh_optimize(&s, args.restarts, args.seed)?;
            Ok((to_value(&formats::chsh_result_to_json(&r)), EXIT_OK))
        }
        Command::RaggioCheck(args) => {
            let a: FdAlgebra = args.a.parse()?;
            let b: FdAlgebra = args.b.parse()?;
            let config = HarnessConfig {
                dim_cap: args.dim_cap,
                budget: args.budget,
                restarts: args.restarts,
                threads: cli.threads as usize,
            };
            let report = harness::verify_equivalence(&a, &b, args.samples, args.seed, &config)?;
            let code = if report.is_consistent() { EXIT_OK } else { EXIT_INCONSISTENT };
            Ok((to_value(&report), code))
        }
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))
}

fn inline_vector(text: &str, owner: Option<&FdAlgebra>) -> Result<PureVector> {
    let psi: Vec<Pair> = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("--psi must be a JSON list of [re, im] pairs: {e}")))?;
    let j = PureJson {
        algebra: owner.map(formats::AlgebraJson::from_algebra),
        psi,
    };
    formats::pure_from_json(&j, true)
}

fn file_vector(path: &Path, owner: Option<&FdAlgebra>) -> Result<PureVector> {
    let mut j: PureJson = serde_json::from_str(&read_file(path)?)?;
    if let Some(o) = owner {
        if let Some(declared) = &j.algebra {
            declared.to_algebra()?.ensure_same(o)?;
        }
        j.algebra = Some(formats::AlgebraJson::from_algebra(o));
    }
    formats::pure_from_json(&j, false)
}
