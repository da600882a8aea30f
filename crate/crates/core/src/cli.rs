//! Command-line front end: `minimize`, `verify` and `profile`.
//!
//! Every subcommand accepts `--config FILE`, a text file of `key = value` lines whose
//! keys are the long flag names of that subcommand. Flags given on the command line
//! override the file. Outputs go to `--out`, else `$ANISO_EQ_OUT`, else `./out`, and
//! each file is written to a temporary name and renamed into place.
//!
//! Exit codes: 0 pass, 1 usage error, 2 failure, 3 I/O error, 4 inconclusive.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::analytic::candidate_axes;
use crate::geometry::{sample_ellipse_uniform, Ellipse, PlanePoint};
use crate::kernel::KernelParams;
use crate::numerics::{potential_on_ellipse_measure, QuadratureLevel};
use crate::solver::{empirical_stats, minimize, ParticleConfig, SolveParams};
use crate::verify::{run_check, CheckSettings, Status, VerificationReport, CHECK_NAMES};
use crate::Error;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAIL: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "ANISO_EQ_OUT";

#[derive(Debug, Parser)]
#[command(name = "aniso-eq", version, about = "Equilibrium measures of the anisotropic log-gas energy")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimise the discrete N-particle energy.
    Minimize(MinimizeArgs),
    /// Run verification checks on the candidate ellipse.
    Verify(VerifyArgs),
    /// Tabulate the potential of the candidate ellipse on a grid.
    Profile(ProfileArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Key-value configuration file; command-line flags take precedence.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory (default: $ANISO_EQ_OUT, else ./out).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StartKind {
    /// Uniform on the square `[-w, w]²`.
    Square,
    /// I.i.d. uniform sample of the candidate ellipse.
    Candidate,
}

#[derive(Debug, Args)]
pub struct MinimizeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = StartKind::Square)]
    pub start: StartKind,
    /// Half-width of the square start.
    #[arg(long, default_value_t = 2.0)]
    pub half_width: f64,
    #[arg(long, default_value_t = SolveParams::default().max_iters)]
    pub max_iters: usize,
    #[arg(long, default_value_t = SolveParams::default().grad_tol)]
    pub grad_tol: f64,
    #[arg(long, default_value_t = SolveParams::default().initial_step)]
    pub initial_step: f64,
    #[arg(long, default_value_t = SolveParams::default().backtrack_factor)]
    pub backtrack_factor: f64,
    #[arg(long, default_value_t = SolveParams::default().armijo_c)]
    pub armijo_c: f64,
    #[arg(long, default_value_t = SolveParams::default().min_sep_guard)]
    pub min_sep_guard: f64,
    /// Also write an SVG scatter plot.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Comma-separated subset of el1, el2, laplacian, minprinciple, semicircle, fourier, plemelj.
    #[arg(long, value_delimiter = ',', default_value = "el1,el2")]
    pub checks: Vec<String>,
    /// Agreement target between successive quadrature levels.
    #[arg(long, default_value_t = QuadratureLevel::default().target)]
    pub quad_target: f64,
    #[arg(long, default_value_t = 200)]
    pub el1_points: usize,
    #[arg(long, default_value_t = 2e-5)]
    pub el1_tol: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub el2_tol: f64,
    #[arg(long, default_value_t = 32)]
    pub lap_boundary: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.02, 0.01, 0.005])]
    pub lap_offsets: Vec<f64>,
    #[arg(long, default_value_t = 0.03)]
    pub lap_tol: f64,
    /// Exterior point `x,y` for the minimum-principle check.
    #[arg(long, value_delimiter = ',', num_args = 2, allow_negative_numbers = true)]
    pub a_ext: Option<Vec<f64>>,
    #[arg(long, default_value_t = 2048)]
    pub panels: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.7, 0.9, 0.95])]
    pub semicircle_alphas: Vec<f64>,
    #[arg(long, default_value_t = 2000)]
    pub semicircle_n: usize,
    #[arg(long, default_value_t = 0.05)]
    pub tol_ks: f64,
    #[arg(long, default_value_t = 10)]
    pub fourier_pairs: usize,
    #[arg(long, default_value_t = 32)]
    pub fourier_grid: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub x0: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub x1: f64,
    #[arg(long)]
    pub nx: usize,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub y0: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub y1: f64,
    #[arg(long, default_value_t = 1)]
    pub ny: usize,
    #[arg(long, default_value_t = QuadratureLevel::default().target)]
    pub quad_target: f64,
    /// Also write an SVG heatmap.
    #[arg(long)]
    pub svg: bool,
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Fail(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Fail(_) => EXIT_FAIL,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Fail(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(e) => CliError::Io(e.to_string()),
            Error::InvalidArgument(_) | Error::NonFinite(_) => CliError::Usage(e.to_string()),
            other => CliError::Fail(other.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses a `key = value` file. Blank lines and lines starting with `#` are ignored.
pub fn parse_config(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", k + 1)))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", k + 1)));
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

/// Splices the config file of the subcommand into the argument list, before the
/// command-line flags so that those take precedence.
fn expand_config(args: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let Some(sub_pos) = args.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')).map(|p| p + 1)
    else {
        return Ok(args);
    };
    let sub_name = args[sub_pos].to_string_lossy().to_string();
    let mut path = None;
    let mut rest = Vec::new();
    let mut it = args[sub_pos + 1..].iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            let v = it.next().ok_or_else(|| CliError::Usage("--config needs a file".into()))?;
            path = Some(PathBuf::from(v));
        } else if let Some(v) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(v));
        } else {
            rest.push(a.clone());
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let cmd = Cli::command();
    let sub = cmd
        .find_subcommand(&sub_name)
        .ok_or_else(|| CliError::Usage(format!("unknown command '{sub_name}'")))?;
    let mut tokens: Vec<OsString> = args[..=sub_pos].to_vec();
    for (key, value) in parse_config(&text)? {
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()) && key != "config")
            .ok_or_else(|| CliError::Usage(format!("unknown config key '{key}' for '{sub_name}'")))?;
        if arg.get_action().takes_values() {
            tokens.push(format!("--{key}={value}").into());
        } else {
            match value.as_str() {
                "true" => tokens.push(format!("--{key}").into()),
                "false" => {}
                _ => return Err(CliError::Usage(format!("config key '{key}' expects true or false"))),
            }
        }
    }
    tokens.extend(rest);
    Ok(tokens)
}

/// Entry point used by the binary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    let matches = match Cli::command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return EXIT_USAGE;
        }
    };
    let result = match &cli.command {
        Command::Minimize(a) => cmd_minimize(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Profile(a) => cmd_profile(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn out_dir(common: &CommonArgs) -> CliResult<PathBuf> {
    let dir = common
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

/// Writes through a temporary file in the same directory, then renames it into place.
pub fn write_atomic(path: &Path, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> io::Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    let res = (|| {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        body(&mut w)?;
        w.into_inner().map_err(|e| e.into_error())?.sync_all()
    })();
    match res {
        Ok(()) => fs::rename(&tmp, path),
        Err(e) => {
            let _ = fs::remove_file(&tmp);
            Err(e)
        }
    }
}

fn write_file(dir: &Path, name: &str, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> CliResult<PathBuf> {
    let path = dir.join(name);
    write_atomic(&path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

/// A CSV cell with 17 significant digits; non-finite values are rejected.
pub fn csv_num(v: f64) -> io::Result<String> {
    if !v.is_finite() {
        return Err(io::Error::new(io::ErrorKind::InvalidData, format!("non-finite value {v} in CSV output")));
    }
    Ok(format!("{v:.16e}"))
}

fn json_text(v: &impl serde::Serialize) -> CliResult<String> {
    serde_json::to_string_pretty(v).map_err(|e| CliError::Fail(e.to_string()))
}

fn cmd_minimize(a: &MinimizeArgs) -> CliResult<i32> {
    if a.n < 2 {
        return Err(CliError::Usage(format!("--n must be at least 2, got {}", a.n)));
    }
    let p = KernelParams::new(a.alpha)?;
    let sp = SolveParams {
        max_iters: a.max_iters,
        grad_tol: a.grad_tol,
        initial_step: a.initial_step,
        backtrack_factor: a.backtrack_factor,
        armijo_c: a.armijo_c,
        seed: a.seed,
        min_sep_guard: a.min_sep_guard,
    };
    sp.validate()?;
    let candidate = candidate_axes(&p).ok();
    let start = match a.start {
        StartKind::Square => ParticleConfig::uniform_square(a.n, a.half_width, a.seed)?,
        StartKind::Candidate => {
            let e = candidate
                .ok_or_else(|| CliError::Usage("a candidate start needs alpha in (-1, 1)".into()))?;
            sample_ellipse_uniform(&e, a.n, a.seed)?
        }
    };
    let dir = out_dir(&a.common)?;
    let res = minimize(&p, &start, &sp)?;
    let stats = empirical_stats(&res.final_config)?;

    write_file(&dir, "particles.csv", |w| {
        writeln!(w, "index,x,y")?;
        for (i, z) in res.final_config.points().iter().enumerate() {
            writeln!(w, "{i},{},{}", csv_num(z.re)?, csv_num(z.im)?)?;
        }
        Ok(())
    })?;
    write_file(&dir, "trace.csv", |w| {
        writeln!(w, "iteration,energy,grad_norm")?;
        for (i, (e, g)) in res.energy_trace.iter().zip(&res.grad_norm_trace).enumerate() {
            writeln!(w, "{i},{},{}", csv_num(*e)?, csv_num(*g)?)?;
        }
        Ok(())
    })?;
    let warnings: Vec<String> = p.range_warning().into_iter().collect();
    let doc = json!({
        "alpha": a.alpha,
        "n": a.n,
        "seed": a.seed,
        "start": format!("{:?}", a.start).to_lowercase(),
        "solve": sp,
        "converged": res.converged,
        "iterations": res.iterations,
        "diagnostic": res.diagnostic,
        "initial_energy": res.energy_trace.first(),
        "final_energy": res.energy_trace.last(),
        "final_grad_norm": res.grad_norm_trace.last(),
        "stats": stats,
        "candidate_axes": candidate.map(|e| [e.a(), e.b()]),
        "warnings": warnings,
    });
    let text = json_text(&doc)?;
    write_file(&dir, "stats.json", |w| writeln!(w, "{text}"))?;
    if a.svg {
        let svg = scatter_svg(res.final_config.points(), candidate.as_ref());
        write_file(&dir, "scatter.svg", |w| w.write_all(svg.as_bytes()))?;
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "minimize: converged={} iterations={} energy={:.12} output={}",
        res.converged,
        res.iterations,
        res.energy_trace.last().copied().unwrap_or(f64::NAN),
        dir.display()
    );
    Ok(if res.converged { EXIT_PASS } else { EXIT_FAIL })
}

fn check_settings(a: &VerifyArgs) -> CliResult<CheckSettings> {
    let mut s = CheckSettings::default();
    s.level = QuadratureLevel::with_target(a.quad_target);
    s.level.validate()?;
    s.el1_points = a.el1_points;
    s.el1_tol = a.el1_tol;
    s.el2_tol = a.el2_tol;
    s.laplacian.n_boundary = a.lap_boundary;
    s.laplacian.offsets = a.lap_offsets.clone();
    s.laplacian.rel_tol = a.lap_tol;
    s.a_ext = match a.a_ext.as_deref() {
        None => None,
        Some([x, y]) => Some((*x, *y)),
        Some(_) => return Err(CliError::Usage("--a-ext expects x,y".into())),
    };
    s.plemelj.panels = a.panels;
    s.semicircle.alphas = a.semicircle_alphas.clone();
    s.semicircle.n = a.semicircle_n;
    s.semicircle.tol_ks = a.tol_ks;
    s.semicircle.solve.seed = a.seed;
    s.fourier.pairs = a.fourier_pairs;
    s.fourier.grid = a.fourier_grid;
    s.fourier.seed = a.seed;
    Ok(s)
}

fn cmd_verify(a: &VerifyArgs) -> CliResult<i32> {
    let mut checks: Vec<&str> = Vec::new();
    for c in &a.checks {
        let c = c.trim();
        if !CHECK_NAMES.contains(&c) {
            return Err(CliError::Usage(format!(
                "unknown check '{c}', expected one of {}",
                CHECK_NAMES.join(", ")
            )));
        }
        if !checks.contains(&c) {
            checks.push(c);
        }
    }
    if checks.is_empty() {
        return Err(CliError::Usage("no checks requested".into()));
    }
    let p = KernelParams::new(a.alpha)?;
    if !p.in_theorem_range() {
        return Err(CliError::Usage(format!("alpha = {} is outside (-1, 1)", a.alpha)));
    }
    let settings = check_settings(a)?;
    let dir = out_dir(&a.common)?;

    let mut reports: Vec<VerificationReport> = Vec::new();
    let mut errors = Vec::new();
    for name in &checks {
        match run_check(name, &p, &settings) {
            Ok(r) => {
                let text = json_text(&r)?;
                write_file(&dir, &format!("report_{name}.json"), |w| writeln!(w, "{text}"))?;
                println!("{name}: {}{}", r.status.as_str(), reference_note(&r));
                reports.push(r);
            }
            Err(Error::InvalidArgument(m)) => return Err(CliError::Usage(m)),
            Err(e) => {
                println!("{name}: fail ({e})");
                errors.push((name.to_string(), e.to_string()));
            }
        }
    }
    write_file(&dir, "summary.csv", |w| {
        writeln!(w, "check,alpha,status,criteria_passed,criteria_total,criteria")?;
        for r in &reports {
            let passed = r.criteria.iter().filter(|c| c.passed).count();
            let detail = r
                .criteria
                .iter()
                .map(|c| Ok(format!("{}={}", c.name, csv_num(c.value)?)))
                .collect::<io::Result<Vec<_>>>()?
                .join(";");
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.check,
                csv_num(a.alpha)?,
                r.status.as_str(),
                passed,
                r.criteria.len(),
                detail
            )?;
        }
        for (name, _) in &errors {
            writeln!(w, "{name},{},error,0,0,", csv_num(a.alpha)?)?;
        }
        Ok(())
    })?;
    let any_fail = !errors.is_empty() || reports.iter().any(|r| r.status == Status::Fail);
    let any_inconclusive = reports.iter().any(|r| r.status == Status::Inconclusive);
    Ok(if any_fail {
        EXIT_FAIL
    } else if any_inconclusive {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_PASS
    })
}

fn reference_note(r: &VerificationReport) -> String {
    match (r.check.as_str(), r.reference) {
        ("el1" | "el2", Some(c0)) => format!(" (C0 = {c0:.12})"),
        _ => String::new(),
    }
}

fn cmd_profile(a: &ProfileArgs) -> CliResult<i32> {
    if a.nx == 0 || a.ny == 0 {
        return Err(CliError::Usage("profile grid is empty".into()));
    }
    for (name, v) in [("x0", a.x0), ("x1", a.x1), ("y0", a.y0), ("y1", a.y1)] {
        if !v.is_finite() {
            return Err(CliError::Usage(format!("--{name} must be finite")));
        }
    }
    let p = KernelParams::new(a.alpha)?;
    let e = candidate_axes(&p).map_err(|_| CliError::Usage(format!("alpha = {} is outside (-1, 1)", a.alpha)))?;
    let level = QuadratureLevel::with_target(a.quad_target);
    level.validate()?;
    let dir = out_dir(&a.common)?;
    let coord = |lo: f64, hi: f64, n: usize, k: usize| {
        if n == 1 {
            lo
        } else {
            lo + (hi - lo) * k as f64 / (n - 1) as f64
        }
    };
    let mut values = Vec::with_capacity(if a.svg { a.nx * a.ny } else { 0 });
    let mut failure = None;
    write_file(&dir, "profile.csv", |w| {
        writeln!(w, "x,y,P")?;
        for j in 0..a.ny {
            let y = coord(a.y0, a.y1, a.ny, j);
            for i in 0..a.nx {
                let x = coord(a.x0, a.x1, a.nx, i);
                let v = match potential_on_ellipse_measure(&p, &e, PlanePoint::new(x, y), &level) {
                    Ok(v) => v,
                    Err(err) => {
                        failure = Some(err.to_string());
                        return Err(io::Error::other(format!("at ({x}, {y})")));
                    }
                };
                if a.svg {
                    values.push(v);
                }
                writeln!(w, "{},{},{}", csv_num(x)?, csv_num(y)?, csv_num(v)?)?;
            }
        }
        Ok(())
    })
    .map_err(|e| match failure.take() {
        Some(f) => CliError::Fail(format!("{f} {e}")),
        None => e,
    })?;
    if a.svg {
        let svg = heatmap_svg(&values, a.nx, a.ny);
        write_file(&dir, "profile.svg", |w| w.write_all(svg.as_bytes()))?;
    }
    println!("profile: {} rows written to {}", a.nx * a.ny, dir.join("profile.csv").display());
    Ok(EXIT_PASS)
}

fn scatter_svg(points: &[PlanePoint], e: Option<&Ellipse>) -> String {
    let extent = points
        .iter()
        .map(|z| z.re.abs().max(z.im.abs()))
        .chain(e.map(|e| e.a().max(e.b())))
        .fold(1e-12, f64::max)
        * 1.1;
    let size = 600.0;
    let k = size / (2.0 * extent);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if let Some(e) = e {
        let _ = writeln!(
            s,
            r#"<ellipse cx="{c:.3}" cy="{c:.3}" rx="{:.3}" ry="{:.3}" fill="none" stroke="crimson" stroke-width="1.5"/>"#,
            e.a() * k,
            e.b() * k,
            c = size / 2.0
        );
    }
    for z in points {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.3}" cy="{:.3}" r="1.5" fill="black"/>"#,
            (z.re + extent) * k,
            (extent - z.im) * k
        );
    }
    s.push_str("</svg>\n");
    s
}

fn heatmap_svg(values: &[f64], nx: usize, ny: usize) -> String {
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let cell = (600.0 / nx.max(ny) as f64).max(1.0);
    let (w, h) = (cell * nx as f64, cell * ny as f64);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    for j in 0..ny {
        for i in 0..nx {
            let t = (values[i + nx * j] - lo) / span;
            let (r, b) = ((255.0 * t) as u8, (255.0 * (1.0 - t)) as u8);
            let _ = writeln!(
                s,
                r#"<rect x="{:.3}" y="{:.3}" width="{cell:.3}" height="{cell:.3}" fill="rgb({r},64,{b})"/>"#,
                i as f64 * cell,
                (ny - 1 - j) as f64 * cell
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let kv = parse_config("# comment\nalpha = 0.5\n\nmax_iters=10\n").unwrap();
        assert_eq!(kv, vec![("alpha".into(), "0.5".into()), ("max-iters".into(), "10".into())]);
        assert!(parse_config("alpha 0.5").is_err());
        assert!(parse_config("= 3").is_err());
    }

    #[test]
    fn csv_numbers_round_trip() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 12345.678901234567] {
            assert_eq!(csv_num(v).unwrap().parse::<f64>().unwrap(), v);
        }
        assert!(csv_num(f64::NAN).is_err());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.txt");
        write_atomic(&path, |w| w.write_all(b"one")).unwrap();
        write_atomic(&path, |w| w.write_all(b"two")).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "two");
        let failed = write_atomic(&path, |_| Err(io::Error::other("boom")));
        assert!(failed.is_err());
        assert_eq!(fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run(["aniso-eq", "bogus"]), EXIT_USAGE);
        assert_eq!(run(["aniso-eq", "minimize", "--alpha", "0.5"]), EXIT_USAGE);
        assert_eq!(run(["aniso-eq", "--help"]), EXIT_PASS);
    }
}
