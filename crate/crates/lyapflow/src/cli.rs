//! Command-line interface. One binary, eight subcommands: exact series
//! (`series`), transfer-operator eigenvalues (`spectrum`), elliptic closed
//! forms (`closed-form`), Monte Carlo (`simulate`), the rate function on a
//! grid (`rate`), operator stencils (`stencil`), the cross-validation suite
//! (`validate`) and plottable figure data (`figure`).
//!
//! Output is CSV or JSON on stdout (or `--out FILE`). Every CSV starts with
//! a `#`-prefixed manifest line and every JSON object carries a `manifest`
//! field recording the subcommand, its flags, a hash of the flag string, the
//! tool version and a timestamp. Decimals use 15 significant digits and
//! exact rationals are printed as `num/den`, so emitted files re-parse
//! losslessly with [`parse_csv`].
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure (branch
//! collision, non-convergence, overflow, failed validation).

use crate::elliptic::{elliptic_complete, gamma1_closed, gamma2_closed, EllipticError};
use crate::exact::{rational_to_f64, rational_to_string, PolyL};
use crate::flowsim::{
    estimate_cumulants, estimate_l, FlowConfig, FlowError,
};
use crate::polyrep::{casimir_matrix, monomial_basis, verify_casimir_identity, PolyrepError};
use crate::series::{
    cumulant_series, l_series, mu_series_2d, mu_series_3d, rate_series, SeriesError,
};
use crate::spectral2d::{leading_mu_2d, SpectralError};
use crate::spectral3d::leading_mu_3d;
use crate::stencil3d::{apply_a, Stencil3dError, StrainPair};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::fmt::Write as _;
use std::path::PathBuf;

/// Provenance header embedded in every output: subcommand, canonical flag
/// string, FNV-1a hash of that string, crate version, unix timestamp.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub subcommand: String,
    pub flags: String,
    pub config_hash: String,
    pub version: String,
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(subcommand: &str, flags: String) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        RunManifest {
            subcommand: subcommand.into(),
            config_hash: format!("{:016x}", fnv1a64(flags.as_bytes())),
            flags,
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp,
        }
    }

    /// Comment line prefixed to CSV output.
    pub fn comment_line(&self) -> String {
        format!(
            "# lyapflow {} | {} {} | hash {} | ts {}",
            self.version, self.subcommand, self.flags, self.config_hash, self.timestamp
        )
    }

    fn as_json(&self) -> serde_json::Value {
        json!({
            "subcommand": self.subcommand,
            "flags": self.flags,
            "config_hash": self.config_hash,
            "version": self.version,
            "timestamp": self.timestamp,
        })
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Format with 15 significant digits, plain decimal where reasonable and
/// scientific notation for extreme magnitudes.
pub fn fmt15(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-5..15).contains(&mag) {
        let decimals = (14 - mag).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let t = s.trim_end_matches('0').trim_end_matches('.');
        if t.is_empty() || t == "-" {
            "0".into()
        } else {
            t.into()
        }
    } else {
        let s = format!("{x:.14e}");
        match s.split_once('e') {
            Some((mant, exp)) => {
                let m = mant.trim_end_matches('0').trim_end_matches('.');
                format!("{m}e{exp}")
            }
            None => s,
        }
    }
}

/// Parse CSV produced by this tool: optional `#` manifest line, one header
/// row, then data rows. Cells stay strings, so rationals survive untouched.
pub fn parse_csv(text: &str) -> (Option<String>, Vec<String>, Vec<Vec<String>>) {
    let mut manifest = None;
    let mut header = Vec::new();
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if manifest.is_none() && header.is_empty() {
                manifest = Some(rest.trim().to_string());
            }
            continue;
        }
        let cells: Vec<String> = line.split(',').map(|c| c.trim().to_string()).collect();
        if header.is_empty() {
            header = cells;
        } else {
            rows.push(cells);
        }
    }
    (manifest, header, rows)
}

#[derive(Debug)]
struct CliError {
    code: i32,
    msg: String,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError { code: 1, msg: msg.into() }
}

fn numerical(msg: impl Into<String>) -> CliError {
    CliError { code: 2, msg: msg.into() }
}

fn from_spectral(e: SpectralError) -> CliError {
    match e {
        SpectralError::BranchCollision { .. } | SpectralError::NoConvergence { .. } => {
            numerical(e.to_string())
        }
        _ => usage(e.to_string()),
    }
}

fn from_series(e: SeriesError) -> CliError {
    match e {
        SeriesError::NoStationaryPoint { .. } | SeriesError::BadBracket { .. } => {
            numerical(e.to_string())
        }
        _ => usage(e.to_string()),
    }
}

fn from_flow(e: FlowError) -> CliError {
    match e {
        FlowError::Overflow(_) => numerical(e.to_string()),
        _ => usage(e.to_string()),
    }
}

fn from_polyrep(e: PolyrepError) -> CliError {
    usage(e.to_string())
}

fn from_stencil(e: Stencil3dError) -> CliError {
    match e {
        Stencil3dError::BadIndex { .. } => usage(e.to_string()),
        _ => numerical(e.to_string()),
    }
}

fn from_elliptic(e: EllipticError) -> CliError {
    usage(e.to_string())
}

#[derive(Parser)]
#[command(
    name = "lyapflow",
    version,
    about = "Generalized Lyapunov exponents of random SL(d,R) matrix products from renewing flows",
    disable_help_subcommand = true
)]
struct Cli {
    /// Write output to this file instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact perturbation series in k^2 (branch eigenvalue or cumulant table).
    Series(SeriesArgs),
    /// Leading transfer-operator eigenvalue at one (k^2, ell), as JSON.
    Spectrum(SpectrumArgs),
    /// d=2 isotropic closed forms from complete elliptic integrals, as CSV.
    ClosedForm(ClosedFormArgs),
    /// Monte Carlo estimates of cumulants or of L(ell), as CSV.
    Simulate(SimulateArgs),
    /// L and the rate function L* on a grid of ell, as CSV.
    Rate(RateArgs),
    /// Strain-operator stencil on one spherical-harmonic site, for debugging.
    Stencil(StencilArgs),
    /// Cross-validation: the full criterion suite or a single Casimir check.
    Validate(ValidateArgs),
    /// Plottable data behind the two standard figures, as CSV (d=3
    /// L-and-rate takes about a minute).
    Figure(FigureArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct SeriesArgs {
    /// Spatial dimension, 2 or 3.
    #[arg(long)]
    d: usize,
    /// Unperturbed branch label l (0 = leading; d=3 supports 0 and 1).
    #[arg(long, default_value_t = 0)]
    branch: u32,
    /// Truncation order in k^2.
    #[arg(long)]
    order: usize,
    /// Evaluate the polynomial coefficients at this moment index.
    #[arg(long, allow_negative_numbers = true)]
    ell: Option<f64>,
    /// Emit the table for gamma_j / j! instead of the branch eigenvalue.
    #[arg(long, value_name = "J")]
    cumulant: Option<usize>,
    /// json keeps exact rationals; csv prints decimals (needs --ell or --cumulant).
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Spatial dimension, 2 or 3.
    #[arg(long)]
    d: usize,
    /// Squared strain fraction.
    #[arg(long)]
    k2: f64,
    /// Moment index.
    #[arg(long, allow_negative_numbers = true)]
    ell: f64,
    /// Eigenvalue convergence tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args)]
struct ClosedFormArgs {
    /// Elliptic modulus k (the physical d=2 flow sits at k = 1/sqrt(2)).
    #[arg(long)]
    k: f64,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON flow configuration {d, tau, seed, profile?, strain_k2?, symmetric?}.
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Factors per product.
    #[arg(long)]
    n: usize,
    /// Independent products.
    #[arg(long)]
    trials: usize,
    /// Estimate L(ell) instead of cumulants.
    #[arg(long, conflicts_with = "cumulants", allow_negative_numbers = true)]
    ell: Option<f64>,
    /// Estimate gamma_1..gamma_J (default J = 2).
    #[arg(long, value_name = "J")]
    cumulants: Option<usize>,
    /// Worker threads for the trial loop (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct RateArgs {
    /// Spatial dimension, 2 or 3.
    #[arg(long)]
    d: usize,
    /// Squared strain fraction.
    #[arg(long)]
    k2: f64,
    /// Disorder strength per factor.
    #[arg(long)]
    tau: f64,
    /// Inclusive ell grid "a:b:n".
    #[arg(long, allow_hyphen_values = true)]
    grid: String,
    /// Series truncation order (default 5 for d=2, 3 for d=3).
    #[arg(long)]
    order: Option<usize>,
}

#[derive(Args)]
struct StencilArgs {
    /// Strain pair: 12, 13 or 23.
    #[arg(long)]
    which: String,
    /// Site degree index.
    #[arg(long)]
    l: u32,
    /// Site order index, 0 <= m <= l.
    #[arg(long)]
    m: u32,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(subcommand)]
    what: ValidateCmd,
}

#[derive(Subcommand)]
enum ValidateCmd {
    /// Run all twelve cross-validation criteria (several minutes).
    All,
    /// Check the Casimir identity on one polynomial module.
    Casimir {
        /// Spatial dimension.
        #[arg(long)]
        d: usize,
        /// Even polynomial degree.
        #[arg(long)]
        ell: u32,
        /// Include the Casimir matrix as rational strings.
        #[arg(long)]
        matrices: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FigureKind {
    /// L and L* against ell at k^2 = 1/d, tau = 1, with Gaussian approximations.
    #[value(name = "L-and-rate", alias = "l-and-rate")]
    LAndRate,
    /// gamma_1..gamma_4 against 1/d - k^2.
    #[value(name = "cumulants-vs-strain")]
    CumulantsVsStrain,
}

#[derive(Args)]
struct FigureArgs {
    #[arg(long, value_enum)]
    which: FigureKind,
    /// Spatial dimension, 2 or 3.
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Override the ell grid "a:b:n" (L-and-rate only).
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Number of strain points (cumulants-vs-strain only).
    #[arg(long, default_value_t = 26)]
    points: usize,
}

/// Entry point used by the binary: parses `argv` (without the program
/// name), runs the subcommand, and returns the process exit code.
pub fn run_cli<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let argv: Vec<String> = std::iter::once("lyapflow".to_string())
        .chain(args)
        .collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            e.code
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.cmd {
        Cmd::Series(a) => run_series(a, &cli.out),
        Cmd::Spectrum(a) => run_spectrum(a, &cli.out),
        Cmd::ClosedForm(a) => run_closed_form(a, &cli.out),
        Cmd::Simulate(a) => run_simulate(a, &cli.out),
        Cmd::Rate(a) => run_rate(a, &cli.out),
        Cmd::Stencil(a) => run_stencil(a, &cli.out),
        Cmd::Validate(a) => run_validate(a, &cli.out),
        Cmd::Figure(a) => run_figure(a, &cli.out),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn csv_text(man: &RunManifest, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}", man.comment_line());
    let _ = writeln!(s, "{}", header.join(","));
    for r in rows {
        let _ = writeln!(s, "{}", r.join(","));
    }
    s
}

fn json_text(value: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&value).expect("serializable");
    s.push('\n');
    s
}

fn check_dim(d: usize) -> Result<(), CliError> {
    if d == 2 || d == 3 {
        Ok(())
    } else {
        Err(usage(format!("--d must be 2 or 3, got {d}")))
    }
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(usage(format!("grid must be \"a:b:n\", got \"{spec}\"")));
    }
    let a: f64 = parts[0]
        .parse()
        .map_err(|_| usage(format!("bad grid start \"{}\"", parts[0])))?;
    let b: f64 = parts[1]
        .parse()
        .map_err(|_| usage(format!("bad grid end \"{}\"", parts[1])))?;
    let n: usize = parts[2]
        .parse()
        .map_err(|_| usage(format!("bad grid count \"{}\"", parts[2])))?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(usage(format!("grid \"{spec}\" is empty or not finite")));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    let step = (b - a) / (n - 1) as f64;
    Ok((0..n).map(|i| a + step * i as f64).collect())
}

fn poly_strings(p: &PolyL) -> Vec<String> {
    p.coeffs().iter().map(rational_to_string).collect()
}

fn run_series(a: &SeriesArgs, out: &Option<PathBuf>) -> Result<(), CliError> {
    check_dim(a.d)?;
    let mut flags = format!("--d {} --branch {} --order {}", a.d, a.branch, a.order);
    if let Some(j) = a.cumulant {
        let _ = write!(flags, " --cumulant {j}");
    }
    if let Some(x) = a.ell {
        let _ = write!(flags, " --ell {}", fmt15(x));
    }
    let man = RunManifest::new("series", flags);

    if let Some(j) = a.cumulant {
        if a.branch != 0 {
            return Err(usage("cumulant tables exist only on the leading branch (--branch 0)"));
        }
        if a.ell.is_some() {
            return Err(usage("--ell does not apply to cumulant tables"));
        }
        let series = cumulant_series(a.d, j, a.order).map_err(from_series)?;
        let coeffs = series.ell_coefficient(0);
        return match a.format {
            Format::Json => emit(
                out,
                &json_text(json!({
                    "manifest": man.as_json(),
                    "d": a.d,
                    "cumulant": j,
                    "order": a.order,
                    "quantity": format!("gamma_{j}/{j}! per k^2 order"),
                    "coefficients": coeffs.iter().map(rational_to_string).collect::<Vec<_>>(),
                })),
            ),
            Format::Csv => {
                let rows: Vec<Vec<String>> = coeffs
                    .iter()
                    .enumerate()
                    .map(|(n, c)| vec![n.to_string(), fmt15(rational_to_f64(c))])
                    .collect();
                emit(out, &csv_text(&man, &["k2_power", "value"], &rows))
            }
        };
    }

    let series = match a.d {
        2 => mu_series_2d(a.branch, a.order).series,
        _ => mu_series_3d(a.branch, a.order).map_err(from_series)?.series,
    };
    match (a.format, a.ell) {
        (Format::Json, None) => emit(
            out,
            &json_text(json!({
                "manifest": man.as_json(),
                "d": a.d,
                "branch": a.branch,
                "order": a.order,
                "quantity": "mu per k^2 order, polynomial in ell (ascending powers)",
                "coefficients": series.coeffs().iter().map(poly_strings).collect::<Vec<_>>(),
            })),
        ),
        (Format::Json, Some(x)) => {
            let vals: Vec<f64> = series.coeffs().iter().map(|p| p.eval_f64(x)).collect();
            emit(
                out,
                &json_text(json!({
                    "manifest": man.as_json(),
                    "d": a.d,
                    "branch": a.branch,
                    "order": a.order,
                    "ell": x,
                    "quantity": "mu per k^2 order at fixed ell",
                    "coefficients": vals,
                })),
            )
        }
        (Format::Csv, Some(x)) => {
            let rows: Vec<Vec<String>> = series
                .coeffs()
                .iter()
                .enumerate()
                .map(|(n, p)| vec![n.to_string(), fmt15(p.eval_f64(x))])
                .collect();
            emit(out, &csv_text(&man, &["k2_power", "value"], &rows))
        }
        (Format::Csv, None) => Err(usage(
            "csv needs --ell (or --cumulant) to reduce polynomial coefficients to decimals",
        )),
    }
}

fn run_spectrum(a: &SpectrumArgs, out: &Option<PathBuf>) -> Result<(), CliError> {
    check_dim(a.d)?;
    let man = RunManifest::new(
        "spectrum",
        format!("--d {} --k2 {} --ell {} --tol {}", a.d, fmt15(a.k2), fmt15(a.ell), fmt15(a.tol)),
    );
    let res = match a.d {
        2 => leading_mu_2d(a.k2, a.ell, a.tol).map_err(from_spectral)?,
        _ => leading_mu_3d(a.k2, a.ell, a.tol).map_err(from_spectral)?,
    };
    let df = a.d as f64;
    let l_over_tau2 = (df - 1.0) * a.ell + (df - 1.0) / df * a.ell * a.ell + res.mu;
    emit(
        out,
        &json_text(json!({
            "manifest": man.as_json(),
            "d": a.d,
            "k2": a.k2,
            "ell": a.ell,
            "mu": res.mu,
            "l_over_tau2": l_over_tau2,
            "n_used": res.n_used,
            "residual": res.residual,
        })),
    )
}

fn run_closed_form(a: &ClosedFormArgs, out: &Option<PathBuf>) -> Result<(), CliError> {
    let man = RunManifest::new("closed-form", format!("--k {}", fmt15(a.k)));
    let data = elliptic_complete(a.k).map_err(from_elliptic)?;
    let g1 = gamma1_closed(a.k).map_err(from_elliptic)?;
    let g2 = gamma2_closed(a.k).map_err(from_elliptic)?;
    let row = vec![
        fmt15(g1),
        fmt15(g2),
        fmt15(data.big_k),
        fmt15(data.big_e),
        fmt15(data.q),
    ];
    emit(
        out,
        &csv_text(
            &man,
            &["gamma1_over_tau2", "gamma2_over_2tau2", "K", "E", "q"],
            &[row],
        ),
    )
}

fn run_simulate(a: &SimulateArgs, out: &Option<PathBuf>) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&a.config)
        .map_err(|e| usage(format!("cannot read {}: {e}", a.config.display())))?;
    let mut cfg: FlowConfig = serde_json::from_str(&text)
        .map_err(|e| usage(format!("bad config {}: {e}", a.config.display())))?;
    if let Ok(s) = std::env::var("LYAPFLOW_SEED") {
        cfg.seed = s
            .parse()
            .map_err(|_| usage(format!("LYAPFLOW_SEED must be a u64, got \"{s}\"")))?;
    }
    let mut flags = format!(
        "--config {} --n {} --trials {} seed {}",
        a.config.display(),
        a.n,
        a.trials,
        cfg.seed
    );
    if let Some(x) = a.ell {
        let _ = write!(flags, " --ell {}", fmt15(x));
    }
    if let Some(j) = a.cumulants {
        let _ = write!(flags, " --cumulants {j}");
    }
    let man = RunManifest::new("simulate", flags);

    let work = || -> Result<Vec<Vec<String>>, CliError> {
        if let Some(x) = a.ell {
            let est = estimate_l(&cfg, x, a.n, a.trials).map_err(from_flow)?;
            Ok(vec![vec![
                format!("L(ell={})", fmt15(x)),
                fmt15(est.value),
                fmt15(est.stderr),
                est.trials.to_string(),
                est.n.to_string(),
            ]])
        } else {
            let jmax = a.cumulants.unwrap_or(2);
            let ests = estimate_cumulants(&cfg, a.n, a.trials, jmax).map_err(from_flow)?;
            Ok(ests
                .iter()
                .map(|e| {
                    vec![
                        format!("gamma{}", e.j),
                        fmt15(e.value),
                        fmt15(e.stderr),
                        e.trials.to_string(),
                        e.n.to_string(),
                    ]
                })
                .collect())
        }
    };
    let rows = match a.threads {
        None => work()?,
        Some(w) => {
            if w == 0 {
                return Err(usage("--threads must be at least 1"));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| usage(format!("cannot build thread pool: {e}")))?;
            pool.install(work)?
        }
    };
    emit(
        out,
        &csv_text(&man, &["quantity", "value", "stderr", "trials", "n"], &rows),
    )
}

fn run_rate(a: &RateArgs, out: &Option<PathBuf>) -> Result<(), CliError> {
    check_dim(a.d)?;
    if !(a.tau > 0.0 && a.tau.is_finite()) {
        return Err(usage(format!("--tau must be positive, got {}", a.tau)));
    }
    let order = a.order.unwrap_or(if a.d == 2 { 5 } else { 3 });
    let man = RunManifest::new(
        "rate",
        format!(
            "--d {} --k2 {} --tau {} --grid {} --order {order}",
            a.d,
            fmt15(a.k2),
            fmt15(a.tau),
            a.grid
        ),
    );
    let grid = parse_grid(&a.grid)?;
    let lser = l_series(a.d, order).map_err(from_series)?;
    let rser = rate_series(a.d, order).map_err(from_series)?;
    let t2 = a.tau * a.tau;
    let rows: Vec<Vec<String>> = grid
        .iter()
        .map(|&ell| {
            vec![
                fmt15(ell),
                fmt15(t2 * lser.eval_f64(a.k2, ell)),
                fmt15(rser.eval_physical(a.k2, ell, a.tau)),
            ]
        })
        .collect();
    emit(out, &csv_text(&man, &["ell", "L", "Lstar"], &rows))
}

fn run_stencil(a: &StencilArgs, out: &Option<PathBuf>) -> Result<(), CliError> {
    let which = match a.which.trim_start_matches(['a', 'A']) {
        "12" => StrainPair::A12,
        "13" => StrainPair::A13,
        "23" => StrainPair::A23,
        other => return Err(usage(format!("--which must be 12, 13 or 23, got \"{other}\""))),
    };
    let man = RunManifest::new(
        "stencil",
        format!("--which {} --l {} --m {}", a.which, a.l, a.m),
    );
    let terms = apply_a(which, a.l, a.m).map_err(from_stencil)?;
    match a.format {
        Format::Json => emit(
            out,
            &json_text(json!({
                "manifest": man.as_json(),
                "which": format!("{which:?}"),
                "l": a.l,
                "m": a.m,
                "terms": terms.iter().map(|(l, m, p)| json!({
                    "l": l,
                    "m": m,
                    "coeff_poly_ell": poly_strings(p),
                })).collect::<Vec<_>>(),
            })),
        ),
        Format::Csv => {
            let rows: Vec<Vec<String>> = terms
                .iter()
                .map(|(l, m, p)| vec![l.to_string(), m.to_string(), poly_strings(p).join(";")])
                .collect();
            emit(out, &csv_text(&man, &["l", "m", "coeff_poly_ell"], &rows))
        }
    }
}

fn run_validate(a: &ValidateArgs, out: &Option<PathBuf>) -> Result<(), CliError> {
    match &a.what {
        ValidateCmd::All => {
            let results = crate::validate::run_all();
            let mut text = String::new();
            for r in &results {
                let _ = writeln!(text, "{}", r.line());
            }
            let failed = results.iter().filter(|r| !r.pass).count();
            let _ = writeln!(
                text,
                "{} of {} criteria passed",
                results.len() - failed,
                results.len()
            );
            emit(out, &text)?;
            if failed > 0 {
                Err(numerical(format!("{failed} criterion(s) failed")))
            } else {
                Ok(())
            }
        }
        ValidateCmd::Casimir { d, ell, matrices } => {
            let man = RunManifest::new(
                "validate casimir",
                format!("--d {d} --ell {ell} --matrices {matrices}"),
            );
            let rep = verify_casimir_identity(*d, *ell).map_err(from_polyrep)?;
            let mut value = json!({
                "manifest": man.as_json(),
                "d": rep.d,
                "ell": rep.ell,
                "dim": rep.dim,
                "holds": rep.holds,
                "max_abs_defect": rational_to_string(&rep.max_abs_defect),
            });
            if *matrices {
                let basis = monomial_basis(*d, *ell).map_err(from_polyrep)?;
                let mat = casimir_matrix(&basis);
                value["casimir_matrix"] = json!(mat.to_string_rows());
            }
            emit(out, &json_text(value))?;
            if rep.holds {
                Ok(())
            } else {
                Err(numerical(format!(
                    "Casimir identity violated at (d, ell) = ({d}, {ell})"
                )))
            }
        }
    }
}

fn run_figure(a: &FigureArgs, out: &Option<PathBuf>) -> Result<(), CliError> {
    check_dim(a.d)?;
    match a.which {
        FigureKind::LAndRate => figure_l_and_rate(a, out),
        FigureKind::CumulantsVsStrain => figure_cumulants(a, out),
    }
}

/// Legendre transform of a convex function at `x` by damped Newton on
/// L'(p) = x from a warm start. At the stationary point the value is
/// insensitive to the remaining O(1e-8) error in p, so a handful of
/// evaluations per grid point suffices even when each one is expensive.
fn legendre_newton(
    l_num: &dyn Fn(f64) -> f64,
    x: f64,
    p_start: f64,
) -> Result<(f64, f64), CliError> {
    let h = 1e-4;
    let mut p = p_start;
    for _ in 0..60 {
        let (fm, f0, fp) = (l_num(p - h), l_num(p), l_num(p + h));
        if !(fm.is_finite() && f0.is_finite() && fp.is_finite()) {
            return Err(numerical(format!("spectral solve failed near p = {p}")));
        }
        let slope = (fp - fm) / (2.0 * h);
        let curv = (fp - 2.0 * f0 + fm) / (h * h);
        if curv <= 0.0 {
            return Err(numerical(format!("lost convexity at p = {p} (L'' = {curv:.3e})")));
        }
        let step = ((x - slope) / curv).clamp(-2.0, 2.0);
        p += step;
        if step.abs() < 1e-6 {
            return Ok((x * p - l_num(p), p));
        }
    }
    Err(numerical(format!("stationary point for x = {x} did not converge")))
}

fn figure_l_and_rate(a: &FigureArgs, out: &Option<PathBuf>) -> Result<(), CliError> {
    let d = a.d;
    let k2 = 1.0 / d as f64;
    let grid_spec = a.grid.clone().unwrap_or_else(|| {
        if d == 2 {
            "-3:1:41".into()
        } else {
            "-4.5:1.5:17".into()
        }
    });
    let man = RunManifest::new(
        "figure",
        format!("--which L-and-rate --d {d} --grid {grid_spec}"),
    );
    let mut grid = parse_grid(&grid_spec)?;

    // A looser eigenvalue tolerance than the spectrum default: the
    // truncation ladder is strongly converged well before 1e-7, and the
    // d=3 lattice grows fast enough that the extra confirming rung
    // dominates the whole figure's runtime.
    let df = d as f64;
    let l_num = |x: f64| -> f64 {
        let mu = if d == 2 {
            leading_mu_2d(k2, x, 1e-9).map(|r| r.mu)
        } else {
            leading_mu_3d(k2, x, 1e-7).map(|r| r.mu)
        };
        match mu {
            Ok(m) => (df - 1.0) * x + (df - 1.0) / df * x * x + m,
            Err(_) => f64::NAN,
        }
    };
    let h = 1e-4;
    let g1 = (l_num(h) - l_num(-h)) / (2.0 * h);
    let hh = 0.02;
    let g2 = (-l_num(2.0 * hh) + 16.0 * l_num(hh) - 30.0 * l_num(0.0) + 16.0 * l_num(-hh)
        - l_num(-2.0 * hh))
        / (12.0 * hh * hh);
    if !(g1.is_finite() && g2.is_finite() && g2 > 0.0) {
        return Err(numerical(format!(
            "cumulant extraction failed: gamma1 = {g1}, gamma2 = {g2}"
        )));
    }

    for anchor in [0.0, g1] {
        if !grid.iter().any(|&x| (x - anchor).abs() < 1e-12) {
            grid.push(anchor);
        }
    }
    grid.sort_by(|p, q| p.partial_cmp(q).unwrap());

    let mut rows = Vec::with_capacity(grid.len());
    let mut p_warm = (grid[0] - g1) / g2;
    for &x in &grid {
        let l_val = l_num(x);
        if !l_val.is_finite() {
            return Err(numerical(format!("spectral solve failed at ell = {x}")));
        }
        let (lstar, p_star) = legendre_newton(&l_num, x, p_warm)?;
        p_warm = p_star;
        rows.push(vec![
            fmt15(x),
            fmt15(l_val),
            fmt15(g1 * x + 0.5 * g2 * x * x),
            fmt15(lstar),
            fmt15((x - g1) * (x - g1) / (2.0 * g2)),
        ]);
    }
    emit(
        out,
        &csv_text(&man, &["ell", "L", "L_quad", "Lstar", "Lstar_quad"], &rows),
    )
}

fn figure_cumulants(a: &FigureArgs, out: &Option<PathBuf>) -> Result<(), CliError> {
    let d = a.d;
    if a.points < 2 {
        return Err(usage("--points must be at least 2"));
    }
    let man = RunManifest::new(
        "figure",
        format!("--which cumulants-vs-strain --d {d} --points {}", a.points),
    );
    let inv_d = 1.0 / d as f64;
    let order = 5;
    let c3 = cumulant_series(d, 3, order).map_err(from_series)?;
    let c4 = cumulant_series(d, 4, order).map_err(from_series)?;
    let (c1, c2) = if d == 3 {
        (
            Some(cumulant_series(3, 1, order).map_err(from_series)?),
            Some(cumulant_series(3, 2, order).map_err(from_series)?),
        )
    } else {
        (None, None)
    };
    let mut rows = Vec::with_capacity(a.points);
    for i in 0..a.points {
        let x = inv_d * i as f64 / (a.points - 1) as f64;
        let k2 = inv_d - x;
        let (g1, g2) = match (&c1, &c2) {
            (Some(s1), Some(s2)) => (s1.eval_f64(k2, 0.0), 2.0 * s2.eval_f64(k2, 0.0)),
            _ => (
                gamma1_closed(k2.sqrt()).map_err(from_elliptic)?,
                2.0 * gamma2_closed(k2.sqrt()).map_err(from_elliptic)?,
            ),
        };
        rows.push(vec![
            fmt15(x),
            fmt15(g1),
            fmt15(g2),
            fmt15(6.0 * c3.eval_f64(k2, 0.0)),
            fmt15(24.0 * c4.eval_f64(k2, 0.0)),
        ]);
    }
    emit(
        out,
        &csv_text(
            &man,
            &["one_over_d_minus_k2", "gamma1", "gamma2", "gamma3", "gamma4"],
            &rows,
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt15_shapes() {
        assert_eq!(fmt15(0.0), "0");
        assert_eq!(fmt15(1.0), "1");
        assert_eq!(fmt15(-2.5), "-2.5");
        assert_eq!(fmt15(0.456946581044464), "0.456946581044464");
        assert!(fmt15(1.23e-7).contains('.'));
        assert!(fmt15(1e20).contains('e'));
    }

    #[test]
    fn fmt15_round_trips() {
        for &x in &[
            0.4569465810444636,
            -0.2257817708634242,
            1.0 / 3.0,
            6.25e-3,
            -1.1920928955078125e-7,
        ] {
            let s = fmt15(x);
            let back: f64 = s.parse().unwrap();
            assert!(
                (back - x).abs() <= 1e-15 * x.abs().max(1.0),
                "{x} -> {s} -> {back}"
            );
        }
    }

    #[test]
    fn parse_csv_round_trip() {
        let man = RunManifest::new("series", "--d 3".into());
        let rows = vec![
            vec!["0".to_string(), "2".to_string()],
            vec!["1".to_string(), "-12/5".to_string()],
        ];
        let text = csv_text(&man, &["k2_power", "value"], &rows);
        let (m, header, parsed) = parse_csv(&text);
        assert!(m.unwrap().contains("series"));
        assert_eq!(header, vec!["k2_power", "value"]);
        assert_eq!(parsed, rows);
    }

    #[test]
    fn grid_parse() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("2:9:1").unwrap(), vec![2.0]);
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("x:1:3").is_err());
    }

    #[test]
    fn manifest_hash_is_stable() {
        let a = RunManifest::new("rate", "--d 2".into());
        let b = RunManifest::new("rate", "--d 2".into());
        assert_eq!(a.config_hash, b.config_hash);
        let c = RunManifest::new("rate", "--d 3".into());
        assert_ne!(a.config_hash, c.config_hash);
    }

    #[test]
    fn rate_out_file_round_trips() {
        let path = std::env::temp_dir().join(format!("lyapflow-rate-{}.csv", std::process::id()));
        let argv = [
            "rate", "--d", "2", "--k2", "0.5", "--tau", "1", "--grid", "-2:0:5", "--out",
        ]
        .iter()
        .map(|s| s.to_string())
        .chain([path.to_string_lossy().into_owned()])
        .collect::<Vec<_>>();
        assert_eq!(run_cli(argv), 0);
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::remove_file(&path).ok();
        let (man, header, rows) = parse_csv(&text);
        assert!(man.unwrap().contains("rate"));
        assert_eq!(header, vec!["ell", "L", "Lstar"]);
        assert_eq!(rows.len(), 5);
        let l_mid: f64 = rows[2][1].parse().unwrap();
        assert!((l_mid + 0.2261).abs() < 1e-3, "L(-1) = {l_mid}");
        let l0: f64 = rows[4][1].parse().unwrap();
        assert_eq!(l0, 0.0);
    }

    #[test]
    fn exit_codes() {
        let args = |s: &str| s.split_whitespace().map(String::from).collect::<Vec<_>>();
        assert_eq!(run_cli(args("closed-form --k 0.5")), 0);
        assert_eq!(run_cli(args("no-such-command")), 1);
        assert_eq!(run_cli(args("closed-form --k 1.5")), 1);
        assert_eq!(run_cli(args("series --d 5 --order 2")), 1);
        assert_eq!(run_cli(args("series --d 3 --branch 4 --order 2")), 1);
        assert_eq!(run_cli(args("--help")), 0);
    }
}
