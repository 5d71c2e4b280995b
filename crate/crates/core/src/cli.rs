//! Command-line front end: CSV emission for plots, sampling, diagnostics,
//! the unboundedness probe, and the verification battery.
//!
//! Every command is a pure function of (flags, config file, seed) and its
//! outputs are byte-identical across runs. Exit codes: 0 success, 1
//! usage/parse, 2 I/O, 3 verification or budget failure.

use crate::copula::{CopulaModel, SampleMatrix};
use crate::generators::{self, Generator};
use crate::numerics::mod1;
use crate::pathology::{unboundedness_probe, EnumerationMode, WeightScheme};
use crate::stats;
use crate::verify::{run_battery, VerifyConfig};
use crate::Error;
use clap::{Args, Parser, Subcommand};
use std::collections::HashMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Parser)]
#[command(name = "modcop", version, about = "Copulas generated by mod-1 sums of uniforms")]
struct Cli {
    /// Key=value file mirroring the flags; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw n points from the copula and write them as CSV.
    Sample(SampleArgs),
    /// Emit `u1,u2,density` over a lattice (bivariate only).
    DensityGrid(GridArgs),
    /// Emit `x,f(x)` for the generator itself on a midpoint grid.
    GeneratorPlot(PlotArgs),
    /// Report closed-form and sample Spearman rho (bivariate).
    Rho(RhoArgs),
    /// Run the full invariant battery; exit 3 on any failure.
    Verify(VerifyArgs),
    /// Search for an unboundedness witness of the pathological family.
    Probe(ProbeArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// Generator spec, e.g. `uniform`, `beta:1.5,1.5`, `pathology:50`.
    #[arg(long)]
    gen: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Bit string, one per coordinate; 1 reflects that coordinate.
    #[arg(long)]
    signs: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    gen: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    signs: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    gen: Option<String>,
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RhoArgs {
    #[arg(long)]
    gen: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Only run checks whose name contains this substring.
    #[arg(long)]
    check: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Negate a mixture weight to confirm the battery catches it.
    #[arg(long)]
    inject_bug: bool,
}

#[derive(Args)]
struct ProbeArgs {
    /// Target interval `a,b` that must trap a singular point.
    #[arg(long)]
    interval: Option<String>,
    /// Density level the witness must exceed.
    #[arg(long)]
    threshold: Option<f64>,
    /// `evenly` or `diagonal`.
    #[arg(long)]
    mode: Option<String>,
    /// `zeta`, `geometric`, or `geom<ratio>`.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Parsed key=value config file; lookups are typed and flag values win.
struct Settings(HashMap<String, String>);

impl Settings {
    fn load(path: Option<&PathBuf>) -> Result<Self, CmdError> {
        let mut map = HashMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CmdError::io(format!("config {}: {e}", path.display())))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    CmdError::usage(format!("config line {}: expected key=value", lineno + 1))
                })?;
                map.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(Self(map))
    }

    fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CmdError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                CmdError::usage(format!("config key `{key}`: cannot parse `{raw}`"))
            }),
        }
    }

    fn require<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T, CmdError> {
        self.get(flag, key)?
            .ok_or_else(|| CmdError::usage(format!("missing required parameter `{key}`")))
    }

    /// Seed resolution: flag, then config file, then MODCOP_SEED, then 42.
    fn seed(&self, flag: Option<u64>) -> Result<u64, CmdError> {
        if let Some(s) = self.get(flag, "seed")? {
            return Ok(s);
        }
        match std::env::var("MODCOP_SEED") {
            Ok(raw) => raw
                .parse()
                .map_err(|_| CmdError::usage(format!("MODCOP_SEED: cannot parse `{raw}`"))),
            Err(_) => Ok(42),
        }
    }
}

#[derive(Debug)]
struct CmdError {
    code: i32,
    message: String,
}

impl CmdError {
    fn usage(message: String) -> Self {
        Self { code: EXIT_USAGE, message }
    }

    fn io(message: String) -> Self {
        Self { code: EXIT_IO, message }
    }
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Budget(_) | Error::Convergence { .. } => EXIT_VERIFY,
            _ => EXIT_USAGE,
        };
        Self { code, message: e.to_string() }
    }
}

/// 17-significant-digit decimal, `inf` for the extended reals; round-trips
/// through `str::parse::<f64>` losslessly.
pub fn fmt_f64(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:.16e}")
    }
}

fn write_out(path: &PathBuf, contents: &str) -> Result<(), CmdError> {
    std::fs::write(path, contents)
        .map_err(|e| CmdError::io(format!("cannot write {}: {e}", path.display())))
}

fn parse_signs(raw: Option<String>, dim: usize) -> Result<Vec<bool>, CmdError> {
    let Some(raw) = raw else {
        return Ok(vec![false; dim]);
    };
    if raw.len() != dim {
        return Err(CmdError::usage(format!(
            "signs `{raw}` must have exactly dim = {dim} bits"
        )));
    }
    raw.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(CmdError::usage(format!("signs: bad bit `{other}`"))),
        })
        .collect()
}

fn build_model(spec: &str, dim: usize, signs: Vec<bool>) -> Result<CopulaModel, CmdError> {
    let generator: Arc<dyn Generator> = Arc::from(generators::parse_spec(spec)?);
    Ok(CopulaModel::with_signs(dim, generator, signs)?)
}

fn cmd_sample(args: SampleArgs, cfg: &Settings) -> Result<(), CmdError> {
    let spec: String = cfg.require(args.gen, "gen")?;
    let dim = cfg.get(args.dim, "dim")?.unwrap_or(2);
    let n = cfg.get(args.n, "n")?.unwrap_or(1000);
    let seed = cfg.seed(args.seed)?;
    let out: PathBuf = cfg.require(args.out, "out")?;
    let signs = parse_signs(cfg.get(args.signs, "signs")?, dim)?;

    let model = build_model(&spec, dim, signs)?;
    let sample = model.sample(n, seed);
    write_out(&out, &sample_csv(&sample))
}

fn sample_csv(sample: &SampleMatrix) -> String {
    let mut csv = String::new();
    let header: Vec<String> = (1..=sample.dim()).map(|j| format!("u{j}")).collect();
    csv.push_str(&header.join(","));
    csv.push('\n');
    for row in sample.rows() {
        let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        csv.push_str(&cells.join(","));
        csv.push('\n');
    }
    csv
}

fn cmd_density_grid(args: GridArgs, cfg: &Settings) -> Result<(), CmdError> {
    let spec: String = cfg.require(args.gen, "gen")?;
    let dim = cfg.get(args.dim, "dim")?.unwrap_or(2);
    if dim != 2 {
        return Err(CmdError::usage(format!(
            "density-grid is bivariate; got dim = {dim}"
        )));
    }
    let resolution = cfg.get(args.resolution, "resolution")?.unwrap_or(101);
    if resolution < 2 {
        return Err(CmdError::usage(format!("resolution {resolution} < 2")));
    }
    let out: PathBuf = cfg.require(args.out, "out")?;
    let signs = parse_signs(cfg.get(args.signs, "signs")?, dim)?;
    let model = build_model(&spec, dim, signs)?;

    let mut csv = String::from("u1,u2,density\n");
    let step = 1.0 / (resolution - 1) as f64;
    for i in 0..resolution {
        for j in 0..resolution {
            let u = [i as f64 * step, j as f64 * step];
            let c = model.density(&u)?;
            let _ = writeln!(csv, "{},{},{}", fmt_f64(u[0]), fmt_f64(u[1]), fmt_f64(c));
        }
    }
    write_out(&out, &csv)
}

fn cmd_generator_plot(args: PlotArgs, cfg: &Settings) -> Result<(), CmdError> {
    let spec: String = cfg.require(args.gen, "gen")?;
    let resolution = cfg.get(args.resolution, "resolution")?.unwrap_or(512);
    if resolution < 2 {
        return Err(CmdError::usage(format!("resolution {resolution} < 2")));
    }
    let out: PathBuf = cfg.require(args.out, "out")?;
    let generator = generators::parse_spec(&spec)?;

    // midpoint grid: half-step offset dodges singular points sitting on
    // the lattice itself
    let mut csv = String::from("x,f(x)\n");
    for i in 0..resolution {
        let x = (i as f64 + 0.5) / resolution as f64;
        let _ = writeln!(csv, "{},{}", fmt_f64(x), fmt_f64(generator.density(x)));
    }
    write_out(&out, &csv)
}

fn cmd_rho(args: RhoArgs, cfg: &Settings) -> Result<(), CmdError> {
    let spec: String = cfg.require(args.gen, "gen")?;
    let n = cfg.get(args.n, "n")?.unwrap_or(100_000);
    let seed = cfg.seed(args.seed)?;

    let generator: Arc<dyn Generator> = Arc::from(generators::parse_spec(&spec)?);
    let closed = stats::spearman_rho_closed_form(generator.as_ref())?;
    let model = CopulaModel::new(2, generator)?;
    let sample = model.sample(n, seed);
    let sampled = stats::spearman_rho_sample(&sample, 0, 1)?;

    println!("closed-form rho: {closed:.6}");
    println!(
        "sample rho (n = {n}): {:.6} +- {:.6}",
        sampled.value, sampled.standard_error
    );
    println!("gap: {:.6}", (sampled.value - closed).abs());
    Ok(())
}

fn cmd_verify(args: VerifyArgs, cfg: &Settings) -> Result<(), CmdError> {
    let config = VerifyConfig {
        check_filter: cfg.get(args.check, "check")?,
        dim: cfg.get(args.dim, "dim")?.unwrap_or(2),
        n: cfg.get(args.n, "n")?.unwrap_or(20_000),
        seed: cfg.seed(args.seed)?,
        inject_bug: args.inject_bug,
    };
    let results = run_battery(&config);
    if results.is_empty() {
        return Err(CmdError::usage("no check matches the given filter".into()));
    }
    let mut all_pass = true;
    for r in &results {
        let tag = if r.passed { "PASS" } else { "FAIL" };
        println!("{tag} {}: {}", r.name, r.detail);
        all_pass &= r.passed;
    }
    if all_pass {
        println!("verify: {} checks passed", results.len());
        Ok(())
    } else {
        let failed: Vec<&str> = results
            .iter()
            .filter(|r| !r.passed)
            .map(|r| r.name.as_str())
            .collect();
        Err(CmdError {
            code: EXIT_VERIFY,
            message: format!("verify: failing checks: {}", failed.join(", ")),
        })
    }
}

fn parse_mode(raw: &str) -> Result<EnumerationMode, CmdError> {
    match raw {
        "evenly" | "evenly_spaced" => Ok(EnumerationMode::EvenlySpaced),
        "diagonal" => Ok(EnumerationMode::Diagonal),
        other => Err(CmdError::usage(format!("unknown enumeration mode `{other}`"))),
    }
}

fn parse_scheme(raw: &str) -> Result<WeightScheme, CmdError> {
    match raw {
        "zeta" => Ok(WeightScheme::Zeta),
        "geometric" => Ok(WeightScheme::Geometric),
        other => {
            let ratio: f64 = other
                .strip_prefix("geom")
                .and_then(|r| r.parse().ok())
                .ok_or_else(|| CmdError::usage(format!("unknown weight scheme `{other}`")))?;
            Ok(WeightScheme::PermutedGeometric { ratio })
        }
    }
}

fn cmd_probe(args: ProbeArgs, cfg: &Settings) -> Result<(), CmdError> {
    let interval: String = cfg.require(args.interval, "interval")?;
    let threshold: f64 = cfg.require(args.threshold, "threshold")?;
    let mode = parse_mode(&cfg.get(args.mode, "mode")?.unwrap_or_else(|| "evenly".into()))?;
    let scheme =
        parse_scheme(&cfg.get(args.scheme, "scheme")?.unwrap_or_else(|| "geom1.1".into()))?;
    let seed = cfg.seed(args.seed)?;

    let (a, b) = interval
        .split_once(',')
        .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
        .ok_or_else(|| CmdError::usage(format!("interval `{interval}`: expected `a,b`")))?;

    let (gen, w) = unboundedness_probe(mode, scheme, seed, (a, b), threshold)?;

    println!("generator: {}", gen.id());
    println!("witness: n = {}, component = {}", w.n, w.component);
    println!(
        "witness point: x = {} (singularity {} minus offset {})",
        fmt_f64(w.x),
        fmt_f64(w.singularity),
        fmt_f64(w.offset)
    );
    println!("witness value: f(x) = {}", fmt_f64(w.value));

    // lift to the copula: u = (x, 1) has mod-1 coordinate sum x, so the
    // copula density there is the witness value
    let u = [w.x, 1.0];
    let wrapped = mod1(u[0] + u[1])?.value();
    println!(
        "copula point: u = ({}, {}), mod-1 sum = {} (within {} of x)",
        fmt_f64(u[0]),
        fmt_f64(u[1]),
        fmt_f64(wrapped),
        fmt_f64((wrapped - w.x).abs())
    );
    println!("copula density: c(u) = {}", fmt_f64(w.value));
    Ok(())
}

/// Entry point shared by main and the integration tests; returns the
/// process exit code.
pub fn run_from<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are successful exits; everything else is usage
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match Settings::load(cli.config.as_ref()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {}", e.message);
            return e.code;
        }
    };
    let outcome = match cli.command {
        Command::Sample(args) => cmd_sample(args, &cfg),
        Command::DensityGrid(args) => cmd_density_grid(args, &cfg),
        Command::GeneratorPlot(args) => cmd_generator_plot(args, &cfg),
        Command::Rho(args) => cmd_rho(args, &cfg),
        Command::Verify(args) => cmd_verify(args, &cfg),
        Command::Probe(args) => cmd_probe(args, &cfg),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

pub fn run() -> i32 {
    run_from(std::env::args_os())
}
