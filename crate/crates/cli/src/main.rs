mod cache;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dickman::analysis::{
    bm_constant, delta, extremum_after, figure_series, find_zeros, sum_rule, weight_distribution,
};
use dickman::dickman::{
    dickman_constants, guard_digits, omega_lenient, pk, rho_lenient, sigma_lenient, WeightTruncation,
};
use dickman::furry::{build_table, FurryTable};
use dickman::sieve::{bruteforce_census, census_with, CensusOptions, SieveRange, SieveReport};
use dickman::{BigReal, Precision};

use cache::{build_hint, Cache, Need};

/// Smallest accepted output precision.
const MIN_DIGITS: u32 = 30;
/// Table digits used by `analyze`.
const ANALYSIS_DIGITS: u32 = 60;
/// Censuses above this n2 need `--heavy`.
const HEAVY_N2: u128 = 1_000_000_000_000_000_000_000_000_000_000;
const FIGURE_DIGITS: usize = 25;

#[derive(Parser)]
#[command(name = "dickman", version, about = "Dickman and Buchstab densities, their weight components, and rough-number censuses")]
struct Cli {
    /// Table cache directory (default: $DICKMAN_CACHE_DIR, else ./.dickman-cache)
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Build and cache a table when no cached one fits
    #[arg(long, global = true)]
    build_missing: bool,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Constant tables
    #[command(subcommand)]
    Table(TableCmd),
    /// Evaluate a density at one point
    Eval(EvalArgs),
    /// Asymptotic and oscillation analysis
    #[command(subcommand)]
    Analyze(AnalyzeCmd),
    /// Sample a diagnostic curve to CSV
    Figures(FigureArgs),
    /// Rough-number censuses
    #[command(subcommand)]
    Sieve(SieveCmd),
}

#[derive(Subcommand)]
enum TableCmd {
    /// Build P_k(n) for n ≤ N, k ≤ K and store it in the cache
    Build {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        digits: u32,
    },
    /// List cached tables
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum Func {
    Rho,
    Sigma,
    Omega,
    Pk,
}

#[derive(Args)]
struct EvalArgs {
    func: Func,
    #[arg(long)]
    u: String,
    /// Weight, for pk
    #[arg(long)]
    k: Option<usize>,
    /// Significant digits of the result
    #[arg(long, default_value_t = MIN_DIGITS)]
    digits: u32,
}

#[derive(Subcommand)]
enum AnalyzeCmd {
    /// First zeros of Δ(u) and the extrema between them
    Zeros {
        #[arg(long, default_value_t = 6)]
        count: usize,
    },
    /// Δ(u) = (u+1)e^{−γ} − σ(u)
    Delta {
        #[arg(long)]
        u: String,
    },
    /// Σ_{n≤N} nρ(n) and its defect from e^γ
    Sumrule {
        #[arg(long)]
        n: usize,
    },
    /// Weight shares P_k(u)/σ(u)
    Weights {
        #[arg(long)]
        u: String,
    },
    /// Constants D_0..D_K of the large-u expansion
    Constants {
        #[arg(long)]
        k: usize,
    },
    /// The constant K = (2/3)(1 + log 2)
    Bm,
}

#[derive(Args)]
struct FigureArgs {
    #[arg(long)]
    id: u8,
    #[arg(long)]
    step: String,
    #[arg(long)]
    out: PathBuf,
    /// Stop before the end of the default range
    #[arg(long)]
    u_max: Option<f64>,
}

#[derive(Subcommand)]
enum SieveCmd {
    /// Sieve [n2 − width, n2] and count primes, semiprimes and triprimes
    Census(CensusArgs),
}

#[derive(Args)]
struct CensusArgs {
    /// Upper end, e.g. 1000000000000, 1e12 or 10^12
    #[arg(long)]
    n2: String,
    #[arg(long)]
    width: String,
    /// Sieve out primes below this (default: ⌈n2^{1/4}⌉)
    #[arg(long)]
    bound: Option<u64>,
    /// Use full trial division instead of the sieve
    #[arg(long)]
    brute: bool,
    /// Checkpoint file; completed segments in it are skipped
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Allow n2 above 10^30
    #[arg(long)]
    heavy: bool,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Settings shared by every command.
struct RunConfig {
    cache: Cache,
    workers: usize,
    build_missing: bool,
}

impl RunConfig {
    fn new(cli: &Cli) -> Result<Self> {
        let workers = match cli.workers {
            Some(0) => bail!("--workers must be at least 1"),
            Some(w) => w,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        Ok(RunConfig {
            cache: Cache::resolve(cli.cache_dir.clone()),
            workers,
            build_missing: cli.build_missing,
        })
    }

    fn table_for(&self, need: Need) -> Result<FurryTable> {
        match self.cache.find(need) {
            Some(e) => self.cache.load(e),
            None if self.build_missing => self.build(need),
            None => bail!(
                "no cached table in {} has N >= {} and DIGITS >= {}; {}",
                self.cache.dir().display(),
                need.n,
                need.digits,
                build_hint(need)
            ),
        }
    }

    /// A table with at least `n` rows and [`ANALYSIS_DIGITS`] digits.
    fn analysis_table(&self, n: usize) -> Result<FurryTable> {
        let n = n.max(2);
        self.table_for(Need {
            n,
            k: n - 1,
            digits: ANALYSIS_DIGITS,
        })
    }

    fn build(&self, need: Need) -> Result<FurryTable> {
        eprintln!("building table N={} K={} DIGITS={}", need.n, need.k, need.digits);
        let t = build_table(need.n, need.k, Precision::new(need.digits)?)?;
        let path = self.cache.store(&t)?;
        eprintln!("cached {}", path.display());
        Ok(t)
    }
}

fn parse_u(s: &str, table: &FurryTable) -> Result<BigReal> {
    BigReal::parse(s, table.bits()).with_context(|| format!("--u {s}"))
}

/// Accepts `123`, `1_000`, `1e12` and `10^12`.
fn parse_big(s: &str) -> Result<u128> {
    let t: String = s.trim().chars().filter(|&c| c != '_').collect();
    let parsed = if let Some((m, e)) = t.split_once(['e', 'E']) {
        let m: u128 = m.parse().ok().context("mantissa")?;
        let e: u32 = e.parse().ok().context("exponent")?;
        10u128.checked_pow(e).and_then(|p| p.checked_mul(m))
    } else if let Some((b, e)) = t.split_once('^') {
        let b: u128 = b.parse().ok().context("base")?;
        let e: u32 = e.parse().ok().context("exponent")?;
        b.checked_pow(e)
    } else {
        t.parse().ok()
    };
    parsed.with_context(|| format!("not an integer below 2^128: {s}"))
}

fn ceil_arg(s: &str) -> Result<usize> {
    let v: f64 = s.trim().parse().with_context(|| format!("not a number: {s}"))?;
    if !(v.is_finite() && v >= 0.0) {
        bail!("argument must be finite and non-negative: {s}");
    }
    Ok(v.ceil() as usize)
}

fn warn(t: &Option<WeightTruncation>) {
    if let Some(w) = t {
        eprintln!(
            "warning: weights above K = {} omitted at u = {}; their sum is at most {:.3e}",
            w.k_max, w.u, w.bound
        );
    }
}

fn table_cmd(cfg: &RunConfig, cmd: TableCmd) -> Result<()> {
    match cmd {
        TableCmd::Build { n, k, digits } => {
            let t = build_table(n, k, Precision::new(digits)?)?;
            let path = cfg.cache.store(&t)?;
            println!("{}", path.display());
        }
        TableCmd::List => {
            for e in cfg.cache.entries() {
                println!("N={} K={} DIGITS={}", e.n, e.k, e.digits);
            }
        }
    }
    Ok(())
}

fn eval_cmd(cfg: &RunConfig, a: EvalArgs) -> Result<()> {
    if a.digits < MIN_DIGITS {
        bail!("--digits must be at least {MIN_DIGITS}");
    }
    let u_f: f64 = a.u.trim().parse().with_context(|| format!("--u {}", a.u))?;
    if !u_f.is_finite() {
        bail!("--u must be finite");
    }
    let n = (u_f.ceil() as usize).max(2);
    let k = match a.func {
        Func::Pk => a.k.context("pk needs --k")?,
        _ => n - 1,
    };
    let need = Need {
        n,
        k: k.max(1).min(n - 1),
        digits: guard_digits(a.digits, u_f),
    };
    let table = cfg.table_for(need)?;
    let u = parse_u(&a.u, &table)?;
    let value = match a.func {
        Func::Rho => {
            let (v, t) = rho_lenient(&u, &table)?;
            warn(&t);
            v
        }
        Func::Sigma => {
            let (v, t) = sigma_lenient(&u, &table)?;
            warn(&t);
            v
        }
        Func::Omega => {
            let (v, t) = omega_lenient(&u, &table)?;
            warn(&t);
            v
        }
        Func::Pk => pk(k, &u, &table)?,
    };
    println!("{}", value.to_sci_string(a.digits as usize));
    Ok(())
}

fn analyze_cmd(cfg: &RunConfig, cmd: AnalyzeCmd) -> Result<()> {
    let out = io::stdout();
    let mut out = out.lock();
    match cmd {
        AnalyzeCmd::Bm => {
            writeln!(out, "{}", bm_constant(Precision::digits(MIN_DIGITS)).to_sci_string(MIN_DIGITS as usize))?;
        }
        AnalyzeCmd::Constants { k } => {
            let dc = dickman_constants(k, Precision::digits(MIN_DIGITS))?;
            writeln!(out, "k,D_k")?;
            for (i, d) in dc.d.iter().enumerate() {
                writeln!(out, "{i},{}", d.to_sci_string(MIN_DIGITS as usize))?;
            }
        }
        AnalyzeCmd::Zeros { count } => {
            let t = cfg.analysis_table(count + 10)?;
            let shown = shown_digits(&t);
            writeln!(out, "n,u_n,extremum_u,extremum_delta")?;
            for z in find_zeros(count, &t)? {
                let (eu, ev) = extremum_after(&z, &t)?;
                writeln!(
                    out,
                    "{},{},{},{}",
                    z.index,
                    z.u.to_sci_string(shown),
                    eu.to_sci_string(shown),
                    ev.to_sci_string(shown)
                )?;
            }
        }
        AnalyzeCmd::Delta { u } => {
            let t = cfg.analysis_table(ceil_arg(&u)? + 1)?;
            let v = delta(&parse_u(&u, &t)?, &t)?;
            writeln!(out, "{}", v.to_sci_string(shown_digits(&t)))?;
        }
        AnalyzeCmd::Sumrule { n } => {
            let t = cfg.analysis_table(n)?;
            let (partial, defect) = sum_rule(n, &t)?;
            writeln!(out, "partial,{}", partial.to_sci_string(shown_digits(&t)))?;
            writeln!(out, "defect,{}", defect.to_sci_string(shown_digits(&t)))?;
        }
        AnalyzeCmd::Weights { u } => {
            let t = cfg.analysis_table(ceil_arg(&u)?)?;
            let w = weight_distribution(&parse_u(&u, &t)?, &t)?;
            warn(&w.truncation);
            writeln!(out, "k,share,ppt")?;
            for (k, (s, p)) in w.shares.iter().zip(&w.ppt).enumerate() {
                writeln!(out, "{k},{},{p}", s.to_sci_string(12))?;
            }
            writeln!(out, "mean,{}", w.mean.to_sci_string(12))?;
            writeln!(out, "sd,{}", w.sd.to_sci_string(12))?;
        }
    }
    Ok(())
}

/// Digits worth printing from a table-based result.
fn shown_digits(t: &FurryTable) -> usize {
    (t.digits() as usize).saturating_sub(10).clamp(10, 40)
}

fn figures_cmd(cfg: &RunConfig, a: FigureArgs) -> Result<()> {
    let hi = a.u_max.unwrap_or(if a.id == 3 { 21.0 } else { 101.0 });
    if !(hi.is_finite() && hi > 0.0) {
        bail!("--u-max must be positive");
    }
    // ρ(u+3) for figure 3, the tail sum of b(u) for figure 2
    let extra = match a.id {
        1 => 1,
        2 => 30,
        _ => 4,
    };
    let n = hi.ceil() as usize + extra;
    let t = cfg.table_for(Need {
        n,
        k: n - 1,
        digits: guard_digits(FIGURE_DIGITS as u32, hi),
    })?;
    let step = parse_u(&a.step, &t).context("--step")?;
    let series = figure_series(a.id, &step, a.u_max, &t)?;
    let mut w = BufWriter::new(File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?);
    writeln!(w, "u,value")?;
    for (u, v) in &series.samples {
        writeln!(w, "{},{}", u.to_sci_string(FIGURE_DIGITS), v.to_sci_string(FIGURE_DIGITS))?;
    }
    w.flush()?;
    eprintln!("{} samples written to {}", series.samples.len(), a.out.display());
    Ok(())
}

fn sieve_cmd(cfg: &RunConfig, cmd: SieveCmd) -> Result<()> {
    let SieveCmd::Census(a) = cmd;
    let n2 = parse_big(&a.n2).context("--n2")?;
    let width = parse_big(&a.width).context("--width")?;
    if n2 > HEAVY_N2 && !a.heavy {
        bail!("n2 above 10^30 is a heavy run: pass --heavy, ideally with --resume FILE");
    }
    let range = match a.bound {
        Some(b) => SieveRange::new(n2.checked_sub(width).context("width exceeds n2")?, n2, b)?,
        None => SieveRange::ending_at(n2, width)?,
    };
    let report: SieveReport = if a.brute {
        if a.resume.is_some() {
            bail!("--resume applies to the sieve, not to --brute");
        }
        bruteforce_census(&range)?
    } else {
        let opts = CensusOptions {
            workers: cfg.workers,
            checkpoint: a.resume.clone(),
            ..Default::default()
        };
        census_with(&range, &opts)?
    };
    if report.c_higher > 0 {
        eprintln!("warning: {} survivors have four or more prime factors (B^4 < n2)", report.c_higher);
    }
    eprintln!(
        "mertens_estimate={} pnt_estimate={}",
        report.mertens_estimate.to_sci_string(10),
        report.pnt_estimate.to_sci_string(10)
    );
    match &a.out {
        Some(p) => std::fs::write(p, report.to_csv()).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{}", report.to_csv()),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let cfg = RunConfig::new(&cli)?;
    rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build_global().ok();
    match cli.cmd {
        Command::Table(c) => table_cmd(&cfg, c),
        Command::Eval(a) => eval_cmd(&cfg, a),
        Command::Analyze(c) => analyze_cmd(&cfg, c),
        Command::Figures(a) => figures_cmd(&cfg, a),
        Command::Sieve(c) => sieve_cmd(&cfg, c),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
