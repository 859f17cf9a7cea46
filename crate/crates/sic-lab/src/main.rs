//! `siclab`: search for SIC-POVM fiducial vectors and analyze the results.
//!
//! Exit codes are a stable contract: 0 success, 1 usage or input error,
//! 2 negative analytic result (no convergence, failed verification, ...).

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

use sic_lab::analysis::{
    census, count_sics, orbit_contains_real, orbits_equivalent, realness_check, stabilizer,
    triple_fingerprint, verify_sic, zauner_class, OrbitVerdict, StabilizerStrategy,
    EXHAUSTIVE_CUTOFF,
};
use sic_lab::clifford::{group_orders, named_symmetry, zauner_dim, NamedSymmetry};
use sic_lab::error::SicError;
use sic_lab::schmidt::schmidt_coefficients;
use sic_lab::search::{restrict_to_symmetry, run_search, SearchConfig};
use sic_lab::store::{catalog_append, read_fiducial, write_fiducial, SolutionRecord};
use sic_lab::whgroup::{DimensionContext, FiducialVector};

#[derive(Parser)]
#[command(name = "siclab", version, about = "SIC-POVM fiducial search and classification")]
struct Cli {
    /// Worker threads for parallel restarts (default: all cores, or
    /// SIC_LAB_THREADS)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Report format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SymmetryName {
    Fz,
    Fa,
    Fb,
    Fc,
}

impl From<SymmetryName> for NamedSymmetry {
    fn from(s: SymmetryName) -> Self {
        match s {
            SymmetryName::Fz => NamedSymmetry::Fz,
            SymmetryName::Fa => NamedSymmetry::Fa,
            SymmetryName::Fb => NamedSymmetry::Fb,
            SymmetryName::Fc => NamedSymmetry::Fc,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Minimize the frame potential from random starts
    Search(SearchArgs),
    /// Check the equiangularity of a stored fiducial
    Verify(VerifyArgs),
    /// Stabilizer, Zauner class, realness, fingerprints, counting
    Analyze(AnalyzeArgs),
    /// Schmidt coefficients across a coprime bipartition
    Schmidt(SchmidtArgs),
    /// Clifford group orders and Zauner eigenspace dimensions
    Group(GroupArgs),
    /// Randomized orbit census with the 30(n+1) stopping rule
    Census(CensusArgs),
}

#[derive(Args)]
struct SearchArgs {
    #[arg(short = 'd', long)]
    dimension: usize,
    /// Restrict the search to an eigenspace of this named symmetry
    #[arg(long, value_enum)]
    symmetry: Option<SymmetryName>,
    /// Eigenvalue branch index within the chosen symmetry
    #[arg(long, default_value_t = 0)]
    eig: usize,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
    /// Cost-gap acceptance tolerance
    #[arg(long, default_value_t = 1e-12)]
    accept_tol: f64,
    /// Overlap-deviation tolerance for the post-search verification
    #[arg(long, default_value_t = 1e-9)]
    verify_tol: f64,
    /// RNG seed; generated and printed when absent
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for fiducial files of verified solutions
    #[arg(short = 'o', long)]
    out: Option<PathBuf>,
    /// Catalog file to append verified solution records to
    #[arg(long)]
    catalog: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    file: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Fiducial file(s); with two, an orbit-equivalence verdict is added
    files: Vec<PathBuf>,
    /// Stabilizer orders for the counting identity (requires -d)
    #[arg(long, value_delimiter = ',')]
    count: Option<Vec<u64>>,
    #[arg(short = 'd', long)]
    dimension: Option<usize>,
    #[arg(long, default_value_t = 2000)]
    fingerprint_size: usize,
}

#[derive(Args)]
struct SchmidtArgs {
    file: PathBuf,
    #[arg(long)]
    d1: usize,
    #[arg(long)]
    d2: usize,
}

#[derive(Args)]
struct GroupArgs {
    #[arg(short = 'd', long)]
    dimension: usize,
}

#[derive(Args)]
struct CensusArgs {
    #[arg(short = 'd', long)]
    dimension: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    restarts: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let threads = cli.threads.or_else(|| {
        std::env::var("SIC_LAB_THREADS")
            .ok()
            .and_then(|s| s.parse().ok())
    });
    if let Some(n) = threads {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .is_err()
        {
            eprintln!("warning: thread pool already initialized; --threads ignored");
        }
    }

    let format = cli.format;
    let result = match cli.command {
        Command::Search(args) => cmd_search(args, format),
        Command::Verify(args) => cmd_verify(args, format),
        Command::Analyze(args) => cmd_analyze(args, format),
        Command::Schmidt(args) => cmd_schmidt(args, format),
        Command::Group(args) => cmd_group(args, format),
        Command::Census(args) => cmd_census(args, format),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                SicError::NotFiducial { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn load_fiducial(path: &PathBuf) -> Result<(DimensionContext, FiducialVector), SicError> {
    let record = read_fiducial(path)?;
    let ctx = DimensionContext::new(record.d)?;
    let phi = FiducialVector::from_unnormalized(&record.vector())?;
    Ok((ctx, phi))
}

fn cmd_search(args: SearchArgs, format: Format) -> Result<u8, SicError> {
    let ctx = DimensionContext::new(args.dimension)?;
    let seed = args.seed.unwrap_or_else(rand::random);
    let mut config = SearchConfig::new(args.dimension);
    config.seed = seed;
    config.max_iterations = args.max_iter;
    config.accept_tol = args.accept_tol;
    if let Some(r) = args.restarts {
        config.restarts = r;
    }
    if let Some(name) = args.symmetry {
        let g = named_symmetry(&ctx, name.into())?;
        config.subspace = Some(restrict_to_symmetry(&ctx, &g, args.eig)?);
    }
    if format == Format::Text {
        println!("seed {seed}");
    }

    let outcomes = run_search(&ctx, &config)?;
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir).map_err(|e| SicError::Io {
            path: dir.clone(),
            source: e,
        })?;
    }
    let mut verified = 0usize;
    for outcome in &outcomes {
        if !outcome.converged {
            continue;
        }
        let report = verify_sic(&ctx, &outcome.fiducial, args.verify_tol);
        if !report.passed() {
            continue;
        }
        verified += 1;
        let record = SolutionRecord::new(
            args.dimension,
            outcome.fiducial.entries(),
            outcome.cost_gap,
            seed,
            outcome.trial_index,
        );
        if let Some(dir) = &args.out {
            let path = dir.join(format!(
                "d{}-seed{}-trial{}.fid",
                args.dimension, seed, outcome.trial_index
            ));
            write_fiducial(&record, &path)?;
        }
        if let Some(catalog) = &args.catalog {
            catalog_append(&record, catalog)?;
        }
        match format {
            Format::Text => println!(
                "trial {:>4}  cost_gap {:>10.3e}  max_dev {:>10.3e}  iters {}",
                outcome.trial_index,
                outcome.cost_gap,
                report.max_overlap_deviation,
                outcome.iterations
            ),
            Format::Json => println!(
                "{}",
                json!({
                    "trial": outcome.trial_index,
                    "cost_gap": outcome.cost_gap,
                    "max_overlap_deviation": report.max_overlap_deviation,
                    "iterations": outcome.iterations,
                    "seed": seed,
                })
            ),
        }
    }
    if verified == 0 {
        if format == Format::Text {
            println!(
                "no verified fiducial in {} restarts (best cost gap {:.3e})",
                outcomes.len(),
                outcomes
                    .iter()
                    .map(|o| o.cost_gap)
                    .fold(f64::INFINITY, f64::min)
            );
        }
        return Ok(2);
    }
    if format == Format::Text {
        println!("{verified} verified fiducial(s)");
    }
    Ok(0)
}

fn cmd_verify(args: VerifyArgs, format: Format) -> Result<u8, SicError> {
    let (ctx, phi) = load_fiducial(&args.file)?;
    let report = verify_sic(&ctx, &phi, args.tol);
    match format {
        Format::Text => {
            println!("d {}", ctx.d());
            println!("max_overlap_deviation {:.6e}", report.max_overlap_deviation);
            println!("cost_gap {:.6e}", report.cost_gap);
            println!("design_defect_t1 {:.6e}", report.design_defect_t1);
            println!("design_defect_t2 {:.6e}", report.design_defect_t2);
            println!("inversion_error {:.6e}", report.inversion_error);
            println!("verdict {}", if report.passed() { "pass" } else { "fail" });
        }
        Format::Json => println!(
            "{}",
            json!({
                "d": ctx.d(),
                "max_overlap_deviation": report.max_overlap_deviation,
                "cost_gap": report.cost_gap,
                "design_defect_t1": report.design_defect_t1,
                "design_defect_t2": report.design_defect_t2,
                "inversion_error": report.inversion_error,
                "pass": report.passed(),
            })
        ),
    }
    Ok(if report.passed() { 0 } else { 2 })
}

fn cmd_analyze(args: AnalyzeArgs, format: Format) -> Result<u8, SicError> {
    if let Some(orders) = &args.count {
        let d = args
            .dimension
            .ok_or_else(|| SicError::Internal("--count requires -d".into()))?;
        let n = count_sics(d, orders)?;
        match format {
            Format::Text => println!("count_sics({d}, {orders:?}) = {n}"),
            Format::Json => println!("{}", json!({"d": d, "orders": orders, "count": n})),
        }
        if args.files.is_empty() {
            return Ok(0);
        }
    }
    if args.files.is_empty() {
        return Err(SicError::Internal(
            "analyze needs a fiducial file or --count".into(),
        ));
    }

    let mut loaded = Vec::new();
    for file in &args.files {
        loaded.push((file.clone(), load_fiducial(file)?));
    }
    for (file, (ctx, phi)) in &loaded {
        let d = ctx.d();
        let strategy = if d <= EXHAUSTIVE_CUTOFF {
            StabilizerStrategy::Exhaustive
        } else {
            StabilizerStrategy::Targeted(vec![])
        };
        let stab = stabilizer(ctx, phi, strategy)?;
        let class = if d <= EXHAUSTIVE_CUTOFF {
            Some(zauner_class(ctx, phi)?)
        } else {
            None
        };
        let real = realness_check(ctx, phi);
        let orbit_real = if d <= 8 {
            Some(orbit_contains_real(ctx, phi)?)
        } else {
            None
        };
        let fp = triple_fingerprint(ctx, phi, args.fingerprint_size)?;
        match format {
            Format::Text => {
                println!("{}:", file.display());
                println!("  d {d}");
                println!(
                    "  stabilizer_order {} ({})",
                    stab.order,
                    match stab.strategy {
                        StabilizerStrategy::Exhaustive => "exhaustive",
                        StabilizerStrategy::Targeted(_) => "targeted",
                    }
                );
                match class {
                    Some(c) if c.stabilized => println!("  zauner_class {}", c.k.unwrap()),
                    Some(_) => println!("  zauner_class none"),
                    None => println!("  zauner_class skipped (d > {EXHAUSTIVE_CUTOFF})"),
                }
                println!("  real {real}");
                if let Some(r) = orbit_real {
                    println!("  orbit_contains_real {r}");
                }
                println!("  fingerprint {}", fp.digest());
            }
            Format::Json => println!(
                "{}",
                json!({
                    "file": file.display().to_string(),
                    "d": d,
                    "stabilizer_order": stab.order,
                    "zauner_class": class.and_then(|c| c.k),
                    "real": real,
                    "orbit_contains_real": orbit_real,
                    "fingerprint": fp.digest(),
                })
            ),
        }
    }
    if loaded.len() == 2 {
        let (_, (ctx, phi)) = &loaded[0];
        let (_, (ctx2, psi)) = &loaded[1];
        if ctx.d() != ctx2.d() {
            return Err(SicError::ModulusMismatch(ctx.d(), ctx2.d()));
        }
        let verdict = orbits_equivalent(ctx, phi, psi, 1e-8)?;
        let word = match verdict {
            OrbitVerdict::Same => "same",
            OrbitVerdict::Different => "different",
            OrbitVerdict::Inconclusive => "inconclusive",
        };
        match format {
            Format::Text => println!("orbits_equivalent {word}"),
            Format::Json => println!("{}", json!({"orbits_equivalent": word})),
        }
    }
    Ok(0)
}

fn cmd_schmidt(args: SchmidtArgs, format: Format) -> Result<u8, SicError> {
    let (ctx, phi) = load_fiducial(&args.file)?;
    let report = schmidt_coefficients(&ctx, &phi, args.d1, args.d2)?;
    match format {
        Format::Text => {
            println!("bipartition {} x {}", report.d1, report.d2);
            for l in &report.coefficients {
                println!("lambda {l}");
            }
            println!("sum_sq {}", report.sum_sq);
            println!("identity_residual {:.6e}", report.identity_residual);
        }
        Format::Json => println!(
            "{}",
            json!({
                "d1": report.d1,
                "d2": report.d2,
                "coefficients": report.coefficients,
                "sum_sq": report.sum_sq,
                "identity_residual": report.identity_residual,
            })
        ),
    }
    Ok(0)
}

fn cmd_group(args: GroupArgs, format: Format) -> Result<u8, SicError> {
    let d = args.dimension;
    let (pc, pec) = group_orders(d)?;
    let dims: Vec<usize> = (0..3).map(|k| zauner_dim(d, k)).collect();
    match format {
        Format::Text => {
            println!("d {d}");
            println!("|PC| {pc}");
            println!("|PEC| {pec}");
            println!("|PEC|/d^2 {}", pec / (d * d) as u128);
            println!("zauner_dims {} {} {}", dims[0], dims[1], dims[2]);
        }
        Format::Json => println!(
            "{}",
            json!({
                "d": d,
                "pc": pc,
                "pec": pec,
                "pec_over_d2": pec / (d * d) as u128,
                "zauner_dims": dims,
            })
        ),
    }
    Ok(0)
}

fn cmd_census(args: CensusArgs, format: Format) -> Result<u8, SicError> {
    let ctx = DimensionContext::new(args.dimension)?;
    let seed = args.seed.unwrap_or_else(rand::random);
    let mut config = SearchConfig::new(args.dimension);
    config.seed = seed;
    if let Some(r) = args.restarts {
        config.restarts = r;
    }
    if format == Format::Text {
        println!("seed {seed}");
    }
    let report = census(&ctx, &config)?;
    match format {
        Format::Text => {
            println!(
                "d {}: {} orbit(s) from {} solutions in {} trials",
                report.d,
                report.orbits.len(),
                report.solutions,
                report.trials
            );
            for (i, orbit) in report.orbits.iter().enumerate() {
                let real = if report.d <= 8 {
                    orbit_contains_real(&ctx, &orbit.representative)
                        .map(|r| if r { " real" } else { "" })
                        .unwrap_or("")
                } else {
                    ""
                };
                println!(
                    "orbit {}: stabilizer_order {} hits {}{real}",
                    (b'a' + i as u8) as char,
                    orbit.stabilizer_order,
                    orbit.hits
                );
            }
        }
        Format::Json => {
            let orbits: Vec<_> = report
                .orbits
                .iter()
                .map(|o| {
                    json!({
                        "stabilizer_order": o.stabilizer_order,
                        "hits": o.hits,
                        "representative": o
                            .representative
                            .entries()
                            .iter()
                            .map(|z: &C64| (z.re, z.im))
                            .collect::<Vec<_>>(),
                    })
                })
                .collect();
            println!(
                "{}",
                json!({
                    "d": report.d,
                    "seed": seed,
                    "trials": report.trials,
                    "solutions": report.solutions,
                    "orbits": orbits,
                })
            );
        }
    }
    Ok(0)
}
