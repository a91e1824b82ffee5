//! Command-line front end.
//!
//! Exit codes: 0 success, 1 tolerance failure, 2 invalid input, 3 numeric
//! overflow, 4 I/O failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fockcalc_core::approx::{ring, tail_bound, taylor_series, DiskDomain, FunctionKind, PolySeries};
use fockcalc_core::apps::{commutator_test, sweep_report};
use fockcalc_core::contour::{identity_quadrature, translated_identity_quadrature, QuadratureSpec};
use fockcalc_core::fock::{FockOperator, Truncation};
use fockcalc_core::synth::{eigen_residual, synth_direct, synth_dyad, synth_quadrature, Route, SynthResult};
use fockcalc_core::Error;
use num_complex::Complex64 as C64;

use crate::opmatrix::{self, format_f64};
use crate::polyseries;
use crate::report::CsvTable;

pub const DEFAULT_NODES: usize = 256;
pub const RING_COUNT: usize = 16;
// ring radius as a fraction of the domain radius
pub const RING_FRACTION: f64 = 0.8;

#[derive(Debug, Parser)]
#[command(name = "fockcalc", version, about = "Analytic functions of the annihilation operator in truncated Fock space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize f(a) and write it to a matrix file.
    Build(Flags),
    /// Check the circle and translated identity resolutions.
    VerifyIdentity(Flags),
    /// Eigen-relation residuals f(a)|α⟩ − f(α)|α⟩ on a ring of α.
    EigenTest(Flags),
    /// State-level residual of [N, −i ln a] = i on a ring of α.
    Commutator(Flags),
    /// Eigen and commutator residuals over degrees and dimensions.
    Convergence(Flags),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FunctionArg {
    Ln,
    Inv,
    Sqrt,
    Exp,
    Poly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    /// Closed-form dyads (origin or translated by center).
    Dyad,
    /// Trapezoid contour quadrature.
    Quadrature,
    /// Direct matrix powers of a − z0.
    Direct,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    #[value(name = "opmatrix-v1")]
    OpMatrixV1,
    Csv,
}

#[derive(Debug, Args)]
struct Flags {
    #[arg(long, value_enum, default_value = "ln")]
    function: FunctionArg,
    /// Monomial coefficients p_0;p_1;… of Σ p_j z^j, each `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    poly_coeffs: Option<String>,
    /// Domain center `re,im`. Default 1,0 for ln, inv and sqrt, else 0,0.
    #[arg(long, allow_hyphen_values = true)]
    center: Option<String>,
    /// Domain radius.
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    radius: f64,
    /// Series degree L.
    #[arg(long, default_value_t = 30)]
    degree: usize,
    /// Truncation dimension D.
    #[arg(long, default_value_t = 64)]
    dim: usize,
    /// Contour radius R. Default balances the node-term range for D.
    #[arg(long, allow_hyphen_values = true)]
    contour_radius: Option<f64>,
    /// Quadrature nodes M. Default max(256, 2D + L).
    #[arg(long)]
    nodes: Option<usize>,
    /// Sample ring `center;radius;count`, center as `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    ring: Option<String>,
    #[arg(long, value_enum, default_value = "dyad")]
    route: RouteArg,
    /// Degrees swept by `convergence`, comma separated.
    #[arg(long, default_value = "10,20,30")]
    degrees: String,
    /// Dimensions swept by `convergence`, comma separated. Default: --dim.
    #[arg(long)]
    dims: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// `build` also writes the series in `polyseries v1` form here.
    #[arg(long)]
    series_out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long, default_value_t = 1e-10)]
    tol_identity: f64,
    #[arg(long, default_value_t = 1e-9)]
    tol_eigen: f64,
    #[arg(long, default_value_t = 1e-3)]
    tol_commutator: f64,
}

/// Failure of one invocation, mapped onto the exit code.
#[derive(Debug, PartialEq)]
pub enum CliError {
    Invalid { field: &'static str, message: String },
    Overflow { row: usize, col: usize },
    Tolerance(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Tolerance(_) => 1,
            Self::Invalid { .. } => 2,
            Self::Overflow { .. } => 3,
            Self::Io(_) => 4,
        }
    }

    fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        Self::Invalid { field, message: message.into() }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Invalid { field, message } => write!(f, "invalid `{field}`: {message}"),
            Self::Overflow { row, col } => {
                write!(f, "numeric overflow at entry ({row}, {col}); reduce `center` or `dim`")
            }
            Self::Tolerance(m) => write!(f, "tolerance failure: {m}"),
            Self::Io(m) => write!(f, "i/o failure: {m}"),
        }
    }
}

/// Core errors arrive without the flag that caused them; `field` names the
/// flag for input errors that are not already tied to one.
fn from_core(e: Error, field: &'static str) -> CliError {
    let named = match &e {
        Error::Overflow { row, col } => return CliError::Overflow { row: *row, col: *col },
        Error::BadDimension(_) => "dim",
        Error::DegreeExceedsDim { .. } => "degree",
        Error::DomainContainsSingularity { .. } | Error::InvalidRadius(_) => "radius",
        Error::InsufficientNodes { .. } | Error::InvalidQuadrature("nodes") => "nodes",
        Error::InvalidQuadrature("radius") => "contour-radius",
        Error::TailTooLarge { .. } => "ring",
        _ => field,
    };
    CliError::invalid(named, e.to_string())
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn parse_complex(text: &str) -> Option<C64> {
    let text = text.trim();
    let (re, im) = match text.split_once(',') {
        Some((re, im)) => (re.trim().parse().ok()?, im.trim().parse().ok()?),
        None => (text.parse().ok()?, 0.0),
    };
    let z = C64::new(re, im);
    (z.re.is_finite() && z.im.is_finite()).then_some(z)
}

fn parse_list<T: std::str::FromStr>(text: &str, field: &'static str) -> Result<Vec<T>, CliError> {
    let items: Result<Vec<T>, _> = text.split(',').map(|s| s.trim().parse::<T>()).collect();
    match items {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(CliError::invalid(field, format!("expected a comma separated list, got `{text}`"))),
    }
}

/// Validated invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub kind: FunctionKind,
    pub domain: DiskDomain,
    pub degree: usize,
    pub cfg: Truncation,
    pub contour_radius: Option<f64>,
    pub nodes: usize,
    pub ring: Vec<C64>,
    pub route: RouteArg,
    pub degrees: Vec<usize>,
    pub dims: Vec<usize>,
    pub out: Option<PathBuf>,
    pub series_out: Option<PathBuf>,
    pub format: Option<FormatArg>,
    pub tol_identity: f64,
    pub tol_eigen: f64,
    pub tol_commutator: f64,
}

impl RunConfig {
    fn from_flags(f: &Flags) -> Result<Self, CliError> {
        let kind = match f.function {
            FunctionArg::Ln => FunctionKind::Log,
            FunctionArg::Inv => FunctionKind::Reciprocal,
            FunctionArg::Sqrt => FunctionKind::Sqrt,
            FunctionArg::Exp => FunctionKind::Exp,
            FunctionArg::Poly => {
                let text = f
                    .poly_coeffs
                    .as_deref()
                    .ok_or_else(|| CliError::invalid("poly-coeffs", "required for --function poly"))?;
                let coeffs: Option<Vec<C64>> = text.split(';').map(parse_complex).collect();
                let coeffs = coeffs
                    .filter(|c| !c.is_empty())
                    .ok_or_else(|| CliError::invalid("poly-coeffs", format!("cannot parse `{text}`")))?;
                FunctionKind::Polynomial(coeffs)
            }
        };
        if f.poly_coeffs.is_some() && f.function != FunctionArg::Poly {
            return Err(CliError::invalid("poly-coeffs", "only valid with --function poly"));
        }
        let center = match &f.center {
            Some(text) => {
                parse_complex(text).ok_or_else(|| CliError::invalid("center", format!("cannot parse `{text}`")))?
            }
            None if kind.singular_at_origin() => C64::new(1.0, 0.0),
            None => C64::new(0.0, 0.0),
        };
        let domain = DiskDomain::new(center, f.radius).map_err(|e| from_core(e, "radius"))?;
        let cfg = Truncation::new(f.dim).map_err(|e| from_core(e, "dim"))?;
        if let Some(r) = f.contour_radius {
            if !(r.is_finite() && r > 0.0) {
                return Err(CliError::invalid("contour-radius", format!("must be positive, got {r}")));
            }
        }
        let nodes = f.nodes.unwrap_or_else(|| DEFAULT_NODES.max(2 * f.dim + f.degree));
        if nodes < 2 {
            return Err(CliError::invalid("nodes", "need at least 2 nodes"));
        }
        let ring = match &f.ring {
            Some(text) => parse_ring(text)?,
            None => ring(center, RING_FRACTION * f.radius, RING_COUNT),
        };
        let degrees = parse_list(&f.degrees, "degrees")?;
        let dims = match &f.dims {
            Some(text) => parse_list(text, "dims")?,
            None => vec![f.dim],
        };
        for (name, tol) in [("tol-identity", f.tol_identity), ("tol-eigen", f.tol_eigen), ("tol-commutator", f.tol_commutator)]
        {
            if !(tol.is_finite() && tol >= 0.0) {
                return Err(CliError::invalid(name, format!("must be a non-negative number, got {tol}")));
            }
        }
        Ok(Self {
            kind,
            domain,
            degree: f.degree,
            cfg,
            contour_radius: f.contour_radius,
            nodes,
            ring,
            route: f.route,
            degrees,
            dims,
            out: f.out.clone(),
            series_out: f.series_out.clone(),
            format: f.format,
            tol_identity: f.tol_identity,
            tol_eigen: f.tol_eigen,
            tol_commutator: f.tol_commutator,
        })
    }

    fn series(&self) -> Result<PolySeries, CliError> {
        taylor_series(self.kind.clone(), self.domain, self.degree).map_err(|e| from_core(e, "function"))
    }

    fn quadrature(&self, shift: C64) -> Result<QuadratureSpec, CliError> {
        let spec = match self.contour_radius {
            Some(r) => QuadratureSpec::new(r, self.nodes),
            None => QuadratureSpec::balanced(shift, self.nodes, self.cfg),
        };
        spec.map_err(|e| from_core(e, "nodes"))
    }

    fn synthesize(&self) -> Result<(PolySeries, SynthResult), CliError> {
        let series = self.series()?;
        let result = match self.route {
            RouteArg::Dyad => synth_dyad(&series, self.cfg),
            RouteArg::Direct => synth_direct(&series, self.cfg),
            RouteArg::Quadrature => synth_quadrature(&series, &self.quadrature(series.center())?, self.cfg),
        }
        .map_err(|e| from_core(e, "function"))?;
        Ok((series, result))
    }

    fn csv_only(&self) -> Result<(), CliError> {
        match self.format {
            Some(FormatArg::OpMatrixV1) => Err(CliError::invalid("format", "this command writes csv reports")),
            _ => Ok(()),
        }
    }
}

fn parse_ring(text: &str) -> Result<Vec<C64>, CliError> {
    let bad = || CliError::invalid("ring", format!("expected `center;radius;count`, got `{text}`"));
    let parts: Vec<&str> = text.split(';').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let center = parse_complex(parts[0]).ok_or_else(bad)?;
    let radius: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(radius.is_finite() && radius >= 0.0) || count == 0 {
        return Err(bad());
    }
    Ok(ring(center, radius, count))
}

fn route_name(route: Route) -> &'static str {
    match route {
        Route::DyadOrigin => "dyad-origin",
        Route::DyadTranslated => "dyad-translated",
        Route::QuadratureOrigin => "quadrature-origin",
        Route::QuadratureTranslated => "quadrature-translated",
        Route::DirectPolynomial => "direct",
    }
}

fn complex_text(z: C64) -> String {
    format!("{},{}", format_f64(z.re), format_f64(z.im))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
}

// report to --out when given, else to stdout
fn write_report(cfg: &RunConfig, table: &CsvTable, stdout: &mut dyn Write) -> Result<(), CliError> {
    let text = table.to_string();
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|e| io_error(path, e)),
        None => emit(stdout, &text),
    }
}

fn matrix_csv(op: &FockOperator) -> CsvTable {
    let mut table = CsvTable::new(&["row", "col", "re", "im"]);
    for n in 0..op.dim() {
        for m in 0..op.dim() {
            let z = op.get(n, m);
            table.push(vec![n.to_string(), m.to_string(), format_f64(z.re), format_f64(z.im)]);
        }
    }
    table
}

fn cmd_build(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let path = cfg.out.as_ref().ok_or_else(|| CliError::invalid("out", "build needs an output path"))?;
    let (series, result) = cfg.synthesize()?;
    let bound = tail_bound(&series).map_err(|e| from_core(e, "function"))?;
    let mut meta = vec![("function".to_string(), cfg.kind.name().to_string())];
    if let FunctionKind::Polynomial(p) = &cfg.kind {
        let coeffs: Vec<String> = p.iter().map(|z| complex_text(*z)).collect();
        meta.push(("poly_coeffs".to_string(), coeffs.join(";")));
    }
    meta.extend([
        ("center".to_string(), complex_text(cfg.domain.center())),
        ("radius".to_string(), format_f64(cfg.domain.radius())),
        ("degree".to_string(), cfg.degree.to_string()),
        ("route".to_string(), route_name(result.route).to_string()),
        ("valid_rows".to_string(), result.valid_rows.to_string()),
        ("tail_bound".to_string(), format_f64(bound)),
    ]);
    match cfg.format.unwrap_or(FormatArg::OpMatrixV1) {
        FormatArg::OpMatrixV1 => opmatrix::write(path, &result.op, &meta).map_err(|e| io_error(path, e))?,
        FormatArg::Csv => std::fs::write(path, matrix_csv(&result.op).to_string()).map_err(|e| io_error(path, e))?,
    }
    if let Some(p) = &cfg.series_out {
        polyseries::write(p, &series).map_err(|e| io_error(p, e))?;
    }
    emit(
        stdout,
        &format!(
            "route {}\nvalid_rows {}\ntail_bound {}\n",
            route_name(result.route),
            result.valid_rows,
            format_f64(bound)
        ),
    )
}

fn cmd_verify_identity(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let d = cfg.cfg.dim();
    let required = 2 * d;
    if cfg.nodes < required {
        emit(
            stderr,
            &format!(
                "warning: aliasing: M = {} is below the exactness threshold 2D = {required}; \
                 angular frequencies at or above M fold back\n",
                cfg.nodes
            ),
        )?;
        return Err(CliError::Tolerance(format!("nodes {} < {required}", cfg.nodes)));
    }
    let z0 = cfg.domain.center();
    let eye = FockOperator::identity(cfg.cfg);
    let plain_spec = cfg.quadrature(C64::new(0.0, 0.0))?;
    let plain = identity_quadrature(&plain_spec, cfg.cfg).map_err(|e| from_core(e, "nodes"))?;
    let shifted_spec = cfg.quadrature(z0)?;
    let shifted = translated_identity_quadrature(z0, &shifted_spec, cfg.cfg).map_err(|e| from_core(e, "nodes"))?;
    let dev_plain = plain.max_deviation_rows(&eye, d);
    let dev_shifted = shifted.max_deviation_rows(&eye, d);
    let mut table = CsvTable::new(&["quadrature", "center_re", "center_im", "contour_radius", "nodes", "deviation"]);
    table.push(vec![
        "circle".into(),
        format_f64(0.0),
        format_f64(0.0),
        format_f64(plain_spec.radius()),
        cfg.nodes.to_string(),
        format_f64(dev_plain),
    ]);
    table.push(vec![
        "translated".into(),
        format_f64(z0.re),
        format_f64(z0.im),
        format_f64(shifted_spec.radius()),
        cfg.nodes.to_string(),
        format_f64(dev_shifted),
    ]);
    emit(
        stdout,
        &format!(
            "identity_deviation {} (R = {}, M = {})\ntranslated_identity_deviation {} (z0 = {}, R = {}, M = {})\n",
            format_f64(dev_plain),
            format_f64(plain_spec.radius()),
            cfg.nodes,
            format_f64(dev_shifted),
            complex_text(z0),
            format_f64(shifted_spec.radius()),
            cfg.nodes
        ),
    )?;
    if let Some(path) = &cfg.out {
        std::fs::write(path, table.to_string()).map_err(|e| io_error(path, e))?;
    }
    let worst = dev_plain.max(dev_shifted);
    if !(worst <= cfg.tol_identity) {
        return Err(CliError::Tolerance(format!("identity deviation {} > {}", format_f64(worst), cfg.tol_identity)));
    }
    Ok(())
}

fn cmd_eigen_test(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    cfg.csv_only()?;
    let (series, result) = cfg.synthesize()?;
    let bound = tail_bound(&series).map_err(|e| from_core(e, "function"))?;
    let limit = (10.0 * bound).max(cfg.tol_eigen);
    let mut table = CsvTable::new(&["alpha_re", "alpha_im", "residual", "tail_bound", "extrapolated"]);
    let mut failing = Vec::new();
    let mut extrapolated = 0;
    for &alpha in &cfg.ring {
        let value = cfg.kind.eval(alpha, cfg.domain.center());
        let e = eigen_residual(&result, alpha, value, cfg.cfg).map_err(|e| from_core(e, "ring"))?;
        if e.extrapolated {
            extrapolated += 1;
        } else if !(e.residual <= limit) {
            failing.push((alpha, e.residual));
        }
        table.push(vec![
            format_f64(alpha.re),
            format_f64(alpha.im),
            format_f64(e.residual),
            format_f64(bound),
            e.extrapolated.to_string(),
        ]);
    }
    write_report(cfg, &table, stdout)?;
    if extrapolated > 0 {
        emit(stderr, &format!("warning: {extrapolated} ring points lie outside the domain, rows flagged extrapolated\n"))?;
    }
    if !failing.is_empty() {
        for (alpha, r) in &failing {
            emit(stderr, &format!("fail alpha {} residual {} > {}\n", complex_text(*alpha), format_f64(*r), format_f64(limit)))?;
        }
        return Err(CliError::Tolerance(format!("{} eigen residuals above {}", failing.len(), format_f64(limit))));
    }
    Ok(())
}

fn cmd_commutator(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    cfg.csv_only()?;
    if cfg.kind != FunctionKind::Log {
        return Err(CliError::invalid("function", "the commutator test needs --function ln"));
    }
    let (_, result) = cfg.synthesize()?;
    let mut table =
        CsvTable::new(&["alpha_re", "alpha_im", "residual", "rows", "non_self_adjointness", "extrapolated"]);
    let mut failing = Vec::new();
    for &alpha in &cfg.ring {
        let r = commutator_test(&result, alpha, cfg.cfg).map_err(|e| from_core(e, "ring"))?;
        if !r.extrapolated && !(r.residual <= cfg.tol_commutator) {
            failing.push((alpha, r.residual));
        }
        table.push(vec![
            format_f64(alpha.re),
            format_f64(alpha.im),
            format_f64(r.residual),
            r.rows.to_string(),
            format_f64(r.non_self_adjointness),
            r.extrapolated.to_string(),
        ]);
    }
    write_report(cfg, &table, stdout)?;
    if !failing.is_empty() {
        for (alpha, r) in &failing {
            emit(stderr, &format!("fail alpha {} residual {}\n", complex_text(*alpha), format_f64(*r)))?;
        }
        return Err(CliError::Tolerance(format!("{} commutator residuals above {}", failing.len(), cfg.tol_commutator)));
    }
    Ok(())
}

fn cmd_convergence(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    cfg.csv_only()?;
    let cells = sweep_report(&cfg.kind, cfg.domain, &cfg.degrees, &cfg.dims, &cfg.ring);
    let opt = |x: Option<f64>| x.map(format_f64).unwrap_or_default();
    let mut table = CsvTable::new(&[
        "degree",
        "dim",
        "alpha_re",
        "alpha_im",
        "tail_bound",
        "eigen_residual",
        "commutator_residual",
        "extrapolated",
        "error",
    ]);
    for c in &cells {
        table.push(vec![
            c.degree.to_string(),
            c.dim.to_string(),
            format_f64(c.alpha.re),
            format_f64(c.alpha.im),
            opt(c.tail_bound),
            opt(c.eigen_residual),
            opt(c.commutator_residual),
            c.extrapolated.to_string(),
            c.error.as_ref().map(|e| e.to_string()).unwrap_or_default(),
        ]);
    }
    write_report(cfg, &table, stdout)
}

/// Parses `args` (program name first) and runs one command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Build(f)
        | Command::VerifyIdentity(f)
        | Command::EigenTest(f)
        | Command::Commutator(f)
        | Command::Convergence(f) => RunConfig::from_flags(f).and_then(|cfg| match &cli.command {
            Command::Build(_) => cmd_build(&cfg, stdout),
            Command::VerifyIdentity(_) => cmd_verify_identity(&cfg, stdout, stderr),
            Command::EigenTest(_) => cmd_eigen_test(&cfg, stdout, stderr),
            Command::Commutator(_) => cmd_commutator(&cfg, stdout, stderr),
            Command::Convergence(_) => cmd_convergence(&cfg, stdout),
        }),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
