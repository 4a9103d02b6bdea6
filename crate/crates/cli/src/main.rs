use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use isotropykit_cli::report::{render, ConfigurationEcho};
use isotropykit_cli::suites::{run, ShapeFlags, Suite, SuiteOptions};
use isotropykit_cli::system_file::SystemFile;
use isotropykit_cli::Failure;
use isotropykit::analysis::Status;
use isotropykit::classical_bases::{boehler_scalars, smith_sym_tensors, smith_vectors};
use isotropykit::lin3::DEFAULT_DEGENERACY_TOL;
use isotropykit::spectral_frame::{build_frame, build_svd_frame, extract_invariants, irreducible_count, CountFlags};
use isotropykit::Error;

/// Spectral invariants of isotropic functions: counts, frames and verification suites.
#[derive(Parser)]
#[command(name = "isotropykit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral versus classical counts for a configuration.
    Counts(ShapeArgs),
    /// Run a verification suite; exit 0 iff every claim passes.
    Verify(VerifyArgs),
    /// Print the spectral frame and labelled invariants of a system file.
    Frame {
        #[arg(long)]
        input: PathBuf,
        /// Use the singular-value frame of the first non-symmetric tensor.
        #[arg(long)]
        svd: bool,
    },
}

#[derive(Args, Clone, Copy)]
struct ShapeArgs {
    /// Number of symmetric tensors.
    #[arg(long)]
    n: Option<usize>,
    /// Number of non-symmetric tensors.
    #[arg(long)]
    m: Option<usize>,
    /// Number of vectors.
    #[arg(long)]
    p: Option<usize>,
    /// Non-symmetric tensors are skew.
    #[arg(long)]
    skew: bool,
    /// Vectors are unit vectors.
    #[arg(long)]
    unit_vectors: bool,
    /// Singular-value variant.
    #[arg(long)]
    svd: bool,
}

impl ShapeArgs {
    fn flags(self) -> ShapeFlags {
        ShapeFlags { n: self.n, m: self.m, p: self.p, skew: self.skew, unit_vectors: self.unit_vectors, svd: self.svd }
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    /// System file; built-in seeded systems are used when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, env = "ISOTROPYKIT_SEED", default_value_t = 0)]
    seed: u64,
    /// Trials per claim (suite default when omitted).
    #[arg(long)]
    trials: Option<usize>,
    /// Replaces every claim tolerance of the suite.
    #[arg(long)]
    tol: Option<f64>,
    /// Write the report as JSON to this path.
    #[arg(long)]
    json: Option<PathBuf>,
    #[command(flatten)]
    shape: ShapeArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Counts(s) => counts(s),
        Command::Verify(v) => verify(v),
        Command::Frame { input, svd } => frame(&input, svd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}

fn counts(s: ShapeArgs) -> Result<(), Failure> {
    let (n, m, p) = (s.n.unwrap_or(0), s.m.unwrap_or(0), s.p.unwrap_or(0));
    if s.unit_vectors && p == 0 {
        return Err(Failure::Input("--unit-vectors needs --p >= 1".into()));
    }
    let flags = CountFlags { skew_nonsym: s.skew, all_vectors_unit: s.unit_vectors, svd_variant: s.svd };
    let spectral = irreducible_count(n, m, p, flags).map_err(|e| Failure::Input(e.to_string()))?;
    println!("configuration: N={n} M={m} P={p}{}{}{}",
        if s.skew { " skew" } else { "" },
        if s.unit_vectors { " unit-vectors" } else { "" },
        if s.svd { " svd" } else { "" });
    println!("spectral scalar invariants: {spectral}");
    if m == 0 || s.skew {
        let classical = boehler_scalars(n, m, p).len();
        println!("classical scalar invariants: {classical}");
        if classical > 0 {
            println!("reduction ratio: {:.4}", spectral as f64 / classical as f64);
        }
        let tensors = if m > 0 && !s.skew { 9 } else { 6 };
        println!("spectral symmetric tensor generators: {tensors}; classical: {}", smith_sym_tensors(n, m, p).len());
        println!("spectral vector generators: 3; classical: {}", smith_vectors(n, m, p).len());
        if (n, m, p) == (2, 0, 2) && !s.unit_vectors && !s.svd {
            println!("note: reference counts for this configuration are 37 scalars and 36 tensors; the enumeration above differs");
        }
    } else {
        println!("classical scalar invariants: not enumerated for general non-symmetric tensors");
    }
    Ok(())
}

fn verify(v: VerifyArgs) -> Result<(), Failure> {
    let system = v.input.as_deref().map(SystemFile::load).transpose()?;
    if let Some(t) = v.tol {
        if !(t >= 0.0) {
            return Err(Failure::Input(format!("--tol must be non-negative, got {t}")));
        }
    }
    if system.is_some() && v.shape.flags().given() {
        return Err(Failure::Input("--input cannot be combined with --n/--m/--p".into()));
    }
    let opts = SuiteOptions { seed: v.seed, trials: v.trials, tol: v.tol, system, shape: v.shape.flags() };
    let out = run(v.suite, &opts)?;
    for c in &out.report.claims {
        let status = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        };
        println!("[{status}] {} {:.3e} {:.3e}", c.id, c.value, c.tolerance);
    }
    for note in &out.notes {
        println!("{note}");
    }
    if let Some(path) = &v.json {
        let echo = ConfigurationEcho {
            suite: v.suite.name().to_string(),
            trials: v.trials,
            tol: v.tol,
            input: v.input.as_ref().map(|p| p.display().to_string()),
            n: v.shape.n,
            m: v.shape.m,
            p: v.shape.p,
            skew: v.shape.skew,
            unit_vectors: v.shape.unit_vectors,
            svd: v.shape.svd,
        };
        std::fs::write(path, render(&out.report, v.seed, &echo))
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    let failing = out.report.failing_ids();
    let passed = out.report.claims.len() - failing.len();
    println!("{passed}/{} claims passed", out.report.claims.len());
    if failing.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("failing claims: {}", failing.join(", "))))
    }
}

fn frame(input: &std::path::Path, svd: bool) -> Result<(), Failure> {
    let system = SystemFile::load(input)?;
    let built = if svd { build_svd_frame(&system) } else { build_frame(&system, DEFAULT_DEGENERACY_TOL) };
    let frame = built.map_err(|e| match e {
        Error::Precondition(m) | Error::Usage(m) => Failure::Input(m),
        other => Failure::Numerical(other.to_string()),
    })?;
    let inv = extract_invariants(&system, &frame).map_err(|e| Failure::Numerical(e.to_string()))?;
    println!("kind: {:?}", frame.kind);
    println!("source: {:?}", frame.source);
    println!("lambdas: {} {} {}", frame.lambdas[0], frame.lambdas[1], frame.lambdas[2]);
    for (i, v) in frame.v.iter().enumerate() {
        println!("v{}: {} {} {}", i + 1, v.0[0], v.0[1], v.0[2]);
    }
    if let Some(u) = &frame.u {
        for (i, v) in u.iter().enumerate() {
            println!("u{}: {} {} {}", i + 1, v.0[0], v.0[1], v.0[2]);
        }
    }
    println!("degeneracy: {}", frame.degeneracy);
    if frame.degeneracy.is_degenerate() {
        println!("warning: repeated values; frame vectors in a repeated eigenspace are a gauge choice and individual components depend on it");
    }
    println!("invariants: {}", inv.len());
    for (label, value) in &inv.entries {
        println!("{label} = {value}");
    }
    Ok(())
}
