use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pgroupgen::classify::{classify, verify, ClassifyOptions};
use pgroupgen::descend::{immediate_descendants, DescendOptions, DescendantJson, DescendantRecord};
use pgroupgen::matfp::{gl_generators, FpMatrix};
use pgroupgen::orbits::{partition, partition_parallel, Action, SubspaceAction, VectorAction};
use pgroupgen::pcpres::PresentationJson;
use pgroupgen::{build_cover, Error, PcPresentation, PrimeField};

#[derive(Parser, Debug)]
#[command(name = "pgroupgen", version, about = "Groups of order p^n, n <= 5, by p-group generation")]
struct Cli {
    /// Worker threads for orbit computations and parallel parents.
    #[arg(long, global = true, env = "PGROUPGEN_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify all groups of order p^n for n up to the bound.
    Classify(ClassifyArgs),
    /// Compute the p-cover of a presentation.
    Cover(IoArgs),
    /// Immediate descendants of a group given with automorphism generators.
    Descendants(DescendantsArgs),
    /// Orbit-size histogram of a matrix group on vectors or subspaces.
    Orbits(OrbitsArgs),
    /// Classify and check the catalog against the known counts.
    VerifyPaper(ClassifyArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    #[arg(long)]
    p: u32,
    #[arg(long, default_value_t = 5, alias = "max-order-exponent")]
    max_exponent: usize,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Allow orbit problems beyond the default point cap.
    #[arg(long)]
    heavy_ok: bool,
    /// Recompute every lifted automorphism group order.
    #[arg(long)]
    verify_aut_orders: bool,
}

#[derive(Args, Debug)]
struct IoArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DescendantsArgs {
    /// Presentation JSON, with `automorphisms` unless elementary abelian.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 5, alias = "max-order-exponent")]
    max_exponent: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    heavy_ok: bool,
}

#[derive(Args, Debug)]
struct OrbitsArgs {
    /// JSON `{"p", "dim", "matrices"}`; `dim` 0 means nonzero vectors.
    #[arg(long, conflicts_with = "gl")]
    input: Option<PathBuf>,
    /// Use generators of GL(m, p) instead of an input file.
    #[arg(long, requires = "p")]
    gl: Option<usize>,
    #[arg(long)]
    p: Option<u32>,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(serde::Deserialize)]
struct OrbitJob {
    p: u32,
    #[serde(default)]
    dim: usize,
    matrices: Vec<Vec<Vec<u32>>>,
}

/// Errors surfaced by a subcommand together with their exit status.
#[derive(Debug)]
enum Failure {
    Engine(Error),
    Input(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Engine(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Input(_) => 2,
            Failure::Engine(e) => match e {
                Error::ResourceCap(_) => 3,
                Error::InvalidPrime(_)
                | Error::PrimeTooLarge(..)
                | Error::Malformed(_)
                | Error::Json(_)
                | Error::Precondition(_)
                | Error::Inconsistent(_)
                | Error::NotAutomorphism(_)
                | Error::NotExtendable
                | Error::Singular => 2,
                Error::Internal(_) => 1,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Engine(e) => e.to_string(),
            Failure::Input(m) | Failure::Verification(m) => m.clone(),
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match output {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Input(e.to_string())),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value).map_err(|e| Failure::Engine(e.into()))
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        b = b.num_threads(t);
    }
    let pool = b.build().map_err(|e| Failure::Engine(Error::Internal(e.to_string())))?;
    Ok(pool.install(f))
}

fn options(args: &ClassifyArgs, threads: Option<usize>) -> ClassifyOptions {
    ClassifyOptions {
        max_exponent: args.max_exponent,
        threads,
        heavy_ok: args.heavy_ok,
        verify_aut_orders: args.verify_aut_orders,
    }
}

fn run_classify(args: &ClassifyArgs, threads: Option<usize>) -> Result<(), Failure> {
    let catalog = classify(args.p, &options(args, threads))?;
    let text = match args.format {
        Format::Json => to_json(&catalog.to_json())?,
        Format::Table => catalog.to_table(),
    };
    emit(args.output.as_deref(), &text)
}

fn run_verify(args: &ClassifyArgs, threads: Option<usize>) -> Result<(), Failure> {
    let catalog = classify(args.p, &options(args, threads))?;
    let report = verify(&catalog)?;
    let text = match args.format {
        Format::Json => to_json(&report)?,
        Format::Table => {
            let counts: Vec<String> = catalog.counts().iter().map(|c| c.to_string()).collect();
            format!("p = {}, groups per order: {}\n{}", args.p, counts.join(", "), report.to_text())
        }
    };
    emit(args.output.as_deref(), &text)?;
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("{} check(s) failed", report.failures().len())))
    }
}

fn run_cover(args: &IoArgs) -> Result<(), Failure> {
    let js: PresentationJson = read_json(&args.input)?;
    let g = PcPresentation::from_json(&js)?;
    let cd = build_cover(&g)?;
    emit(args.output.as_deref(), &to_json(&cd.to_json())?)
}

fn run_descendants(args: &DescendantsArgs, threads: Option<usize>) -> Result<(), Failure> {
    let js: DescendantJson = read_json(&args.input)?;
    let parent = DescendantRecord::from_json(&js)?;
    let opts = DescendOptions {
        max_exponent: args.max_exponent,
        always_lift: true,
        point_cap: if args.heavy_ok { u64::MAX } else { DescendOptions::default().point_cap },
        ..Default::default()
    };
    let kids = with_pool(threads, || immediate_descendants(&parent, None, &opts))??;
    let text = match args.format {
        Format::Json => to_json(&kids.iter().map(|k| k.to_json()).collect::<Vec<_>>())?,
        Format::Table => kids
            .iter()
            .enumerate()
            .map(|(i, k)| {
                format!("{:>3}  p^{}  class {}  {}\n", i + 1, k.order_exponent, k.p_class, k.presentation.relations_string())
            })
            .collect(),
    };
    emit(args.output.as_deref(), &text)
}

fn run_orbits(args: &OrbitsArgs, threads: Option<usize>) -> Result<(), Failure> {
    let (p, dim, mats) = match (&args.input, args.gl) {
        (Some(path), _) => {
            let job: OrbitJob = read_json(path)?;
            let m = job.matrices.first().map_or(0, |a| a.len());
            let mats: Vec<FpMatrix> = job
                .matrices
                .iter()
                .map(|rows| {
                    if rows.len() != m || rows.iter().any(|r| r.len() != m) {
                        return Err(Failure::Input("matrices must all be square of one size".into()));
                    }
                    Ok(FpMatrix::from_rows(job.p, m, rows))
                })
                .collect::<Result<_, _>>()?;
            (job.p, job.dim, mats)
        }
        (None, Some(m)) => {
            let p = args.p.expect("clap enforces --p with --gl");
            (p, args.dim, gl_generators(m, &PrimeField::new(p)?))
        }
        (None, None) => return Err(Failure::Input("either --input or --gl is required".into())),
    };
    PrimeField::new(p)?;
    let m = mats.first().map(|g| g.rows()).ok_or_else(|| Failure::Input("no matrices given".into()))?;
    let sizes: Vec<u64> = with_pool(threads, || -> Result<Vec<u64>, Failure> {
        if dim == 0 {
            let act = VectorAction::new(p, m, mats.clone())?;
            Ok(partition_parallel(&act, 1).into_iter().map(|(_, s)| s).collect())
        } else {
            let act = SubspaceAction::new(p, m, dim, mats.clone())?;
            Ok(if act.size() >= 1 << 20 {
                partition_parallel(&act, 0).into_iter().map(|(_, s)| s).collect()
            } else {
                partition(&act, 0, |_| false).into_iter().map(|o| o.size).collect()
            })
        }
    })??;
    let mut hist = std::collections::BTreeMap::new();
    for s in &sizes {
        *hist.entry(*s).or_insert(0u64) += 1;
    }
    let report = serde_json::json!({
        "p": p,
        "m": m,
        "dim": dim,
        "points": sizes.iter().sum::<u64>(),
        "orbits": sizes.len(),
        "histogram": hist.into_iter().map(|(s, c)| [s, c]).collect::<Vec<_>>(),
    });
    emit(args.output.as_deref(), &to_json(&report)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Classify(a) => run_classify(a, cli.threads),
        Command::Cover(a) => run_cover(a),
        Command::Descendants(a) => run_descendants(a, cli.threads),
        Command::Orbits(a) => run_orbits(a, cli.threads),
        Command::VerifyPaper(a) => run_verify(a, cli.threads),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
