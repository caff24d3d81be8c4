use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use shannop::bands::{analyze, build_partition, BaseScheme};
use shannop::generate::{generate, FieldKind};
use shannop::precond::{implicit_laplacian_precond, rate_table, write_rate_table};
use shannop::solver::{helmholtz_decompose, richardson_solve, SolveConfig, SolveReport};
use shannop::spectral::{forward_transform, GridSpec};
use shannop::symbols::{parse_symbol_with, SymbolExpr};
use shannop::verify::{run_suite, Suite};
use shannop::{swf1, Error};

const EXIT_VERIFY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DIVERGED: u8 = 3;
const EXIT_REFUSED: u8 = 4;

#[derive(Parser)]
#[command(name = "shannop", version, about = "Shannon wavelet operator toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Tensorial,
    Mra,
}

impl From<SchemeArg> for BaseScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Tensorial => BaseScheme::Tensorial,
            SchemeArg::Mra => BaseScheme::Mra,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Random,
    Gradient,
    Solenoidal,
    CornerMode,
}

impl From<KindArg> for FieldKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Random => FieldKind::Random,
            KindArg::Gradient => FieldKind::Gradient,
            KindArg::Solenoidal => FieldKind::Solenoidal,
            KindArg::CornerMode => FieldKind::CornerMode,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Reconstruction,
    Oracle,
    Rates,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Reconstruction => Suite::Reconstruction,
            SuiteArg::Oracle => Suite::Oracle,
            SuiteArg::Rates => Suite::Rates,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(clap::Args)]
struct IterArgs {
    /// Relative residual tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    /// Sobolev order of the residual norm.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    norm: f64,
}

impl IterArgs {
    fn config(&self) -> SolveConfig {
        SolveConfig {
            max_iter: self.max_iter,
            tol: self.tol,
            norm: self.norm,
            ..SolveConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a deterministic test field.
    GenField {
        /// Grid sizes, e.g. 128x128 or 64x64x64.
        #[arg(long)]
        grid: String,
        #[arg(long, default_value_t = 1)]
        components: usize,
        #[arg(long, value_enum, default_value = "random")]
        kind: KindArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a field's band partition and per-band energies.
    Decompose {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "tensorial")]
        scheme: SchemeArg,
        #[arg(long, default_value_t = 0)]
        packet_depth: u32,
    },
    /// Solve (Id − αΔ)u = v by preconditioned Richardson iteration.
    SolveIlap {
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_enum, default_value = "tensorial")]
        scheme: SchemeArg,
        #[arg(long, default_value_t = 0)]
        packet_depth: u32,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        iter: IterArgs,
    },
    /// Split a vector field into divergence-free and gradient parts.
    Helmholtz {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out_div: PathBuf,
        #[arg(long)]
        out_curl: PathBuf,
        #[arg(long, default_value_t = 0)]
        packet_depth: u32,
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        iter: IterArgs,
    },
    /// Tabulate per-band contraction rates for an operator.
    Rates {
        /// Symbol expression, e.g. `leray`, `ilap(1e6)` or `id + 2*nlap`.
        #[arg(long)]
        operator: String,
        #[arg(long)]
        grid: String,
        #[arg(long, value_enum, default_value = "tensorial")]
        scheme: SchemeArg,
        #[arg(long, default_value_t = 0)]
        packet_depth: u32,
        /// Value for a bare `ilap`.
        #[arg(long)]
        alpha: Option<f64>,
        /// Output file; standard output when absent.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the built-in checks.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
    },
}

fn parse_grid(text: &str) -> shannop::Result<GridSpec> {
    let sizes = text
        .split('x')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidGrid(format!("bad size '{s}' in '{text}'")))
        })
        .collect::<shannop::Result<Vec<_>>>()?;
    GridSpec::new(&sizes)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Diverged { .. } => EXIT_DIVERGED,
        Error::Refused { .. } => EXIT_REFUSED,
        _ => EXIT_USAGE,
    }
}

fn write_report(path: Option<&Path>, report: &SolveReport) -> shannop::Result<()> {
    if let Some(path) = path {
        let mut f = BufWriter::new(File::create(path)?);
        f.write_all(report.to_json().as_bytes())?;
        f.write_all(b"\n")?;
        f.flush()?;
    }
    Ok(())
}

/// Reports a finished iteration; non-convergence within the budget counts
/// as divergence.
fn finish(report: &SolveReport) -> u8 {
    eprintln!(
        "iterations {}, converged {}, fitted rate {}, bound {:.4}",
        report.iterations,
        report.converged,
        report
            .fitted_rate
            .map_or_else(|| "n/a".to_string(), |r| format!("{r:.4}")),
        report.theoretical_rate
    );
    if report.converged {
        0
    } else {
        EXIT_DIVERGED
    }
}

fn run(cmd: Command) -> shannop::Result<u8> {
    match cmd {
        Command::GenField {
            grid,
            components,
            kind,
            seed,
            out,
        } => {
            let grid = parse_grid(&grid)?;
            swf1::save(&out, &generate(&grid, components, kind.into(), seed)?)?;
            Ok(0)
        }
        Command::Decompose {
            input,
            scheme,
            packet_depth,
        } => {
            let field = swf1::load(&input)?;
            let p = Arc::new(build_partition(field.grid(), scheme.into(), packet_depth)?);
            let banded = analyze(&forward_transform(&field), &p)?;
            let stdout = io::stdout();
            let mut out = stdout.lock();
            write!(out, "{}", p.dump())?;
            writeln!(out, "band,energy")?;
            writeln!(out, "DC,{:e}", banded.dc_energy())?;
            for (band, e) in p.bands().iter().zip(banded.band_energies()) {
                writeln!(out, "{},{e:e}", band.id())?;
            }
            Ok(0)
        }
        Command::SolveIlap {
            alpha,
            scheme,
            packet_depth,
            input,
            out,
            report,
            iter,
        } => {
            let cfg = iter.config();
            cfg.validate()?;
            let v = swf1::load(&input)?;
            let p = Arc::new(build_partition(v.grid(), scheme.into(), packet_depth)?);
            let pc = implicit_laplacian_precond(alpha, &p)?;
            match richardson_solve(&SymbolExpr::ImplicitLaplacian(alpha), &pc, &v, &cfg) {
                Ok((u, rep)) => {
                    swf1::save(&out, &u)?;
                    write_report(report.as_deref(), &rep)?;
                    Ok(finish(&rep))
                }
                Err(Error::Diverged { report: rep }) => {
                    write_report(report.as_deref(), &rep)?;
                    Err(Error::Diverged { report: rep })
                }
                Err(e) => Err(e),
            }
        }
        Command::Helmholtz {
            input,
            out_div,
            out_curl,
            packet_depth,
            report,
            iter,
        } => {
            let cfg = iter.config();
            cfg.validate()?;
            let u = swf1::load(&input)?;
            let p = Arc::new(build_partition(u.grid(), BaseScheme::Tensorial, packet_depth)?);
            match helmholtz_decompose(&u, &p, &cfg) {
                Ok((d, c, rep)) => {
                    swf1::save(&out_div, &d)?;
                    swf1::save(&out_curl, &c)?;
                    write_report(report.as_deref(), &rep)?;
                    Ok(finish(&rep))
                }
                Err(Error::Diverged { report: rep }) => {
                    write_report(report.as_deref(), &rep)?;
                    Err(Error::Diverged { report: rep })
                }
                Err(e) => Err(e),
            }
        }
        Command::Rates {
            operator,
            grid,
            scheme,
            packet_depth,
            alpha,
            csv,
        } => {
            let grid = parse_grid(&grid)?;
            let op = parse_symbol_with(&operator, grid.dim(), alpha)?;
            let p = Arc::new(build_partition(&grid, scheme.into(), packet_depth)?);
            let rows = rate_table(&op, &p)?;
            match csv {
                Some(path) => write_rate_table(&rows, BufWriter::new(File::create(path)?))?,
                None => write_rate_table(&rows, io::stdout().lock())?,
            }
            Ok(0)
        }
        Command::Verify { suite } => {
            let checks = run_suite(suite.into());
            for c in &checks {
                println!("{c}");
            }
            let failed = checks.iter().filter(|c| c.failed()).count();
            println!("{} checks, {failed} failed", checks.len());
            Ok(if failed == 0 { 0 } else { EXIT_VERIFY })
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(text) = std::env::var("SHANNOP_THREADS") else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .map_err(|_| format!("SHANNOP_THREADS must be a thread count, got '{text}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
