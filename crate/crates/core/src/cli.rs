//! The `cayley-potts` command line.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure (including a
//! failed `verify`).

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::exec::Execution;
use crate::model::{
    check_consistency, propagate_fields, random_fields, FieldVector, ModelError, ModelParams, MAX_CONFIGURATIONS,
};
use crate::period2::{proposition_sign_check, theta_cr, Period2System, ZVector};
use crate::scan::{format_g17, scan_theta_with, write_csv, write_json, ScanError, ScanFlags, ScanRow};
use crate::solver::{find_h_roots, fixed_point_iterate, RootKind, RootReport, SolverError, DEFAULT_GRID};
use crate::tree::{ball_size, build_tree};

/// Largest accepted consistency violation for `verify`.
pub const VERIFY_TOLERANCE: f64 = 1e-10;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "cayley-potts",
    version,
    about = "Potts model on Cayley trees: period-2 solutions and consistency checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Roots of the period-2 equation at one temperature.
    Roots(RootsArgs),
    /// Root counts over a grid of theta values.
    Scan(ScanArgs),
    /// Exhaustive check that boundary fields give a consistent family of measures.
    Verify(VerifyArgs),
    /// Iterate the four-component period-2 map from a starting point.
    Orbit(OrbitArgs),
    /// Build a finite ball of the tree and check its level structure.
    TreeCheck(TreeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Coupling {
    /// theta = exp(J beta).
    #[arg(long, conflicts_with_all = ["coupling", "beta"], allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(
        long = "J",
        visible_alias = "coupling",
        id = "coupling",
        requires = "beta",
        allow_negative_numbers = true
    )]
    pub coupling: Option<f64>,
    #[arg(long, requires = "coupling", allow_negative_numbers = true)]
    pub beta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RootsArgs {
    #[arg(long, default_value_t = 3)]
    pub k: u32,
    #[arg(long, default_value_t = 3)]
    pub q: usize,
    #[command(flatten)]
    pub coupling: Coupling,
    /// Scan nodes for bracketing.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 3)]
    pub k: u32,
    #[arg(long, default_value_t = 3)]
    pub q: usize,
    /// Inclusive grid `lo:hi:steps`.
    #[arg(long)]
    pub theta: String,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
    /// Compute rows one at a time.
    #[arg(long)]
    pub sequential: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 3)]
    pub q: usize,
    /// Radius of the ball.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[command(flatten)]
    pub coupling: Coupling,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Leaf fields are drawn uniformly from [-amplitude, amplitude].
    #[arg(long, default_value_t = 2.0)]
    pub amplitude: f64,
    /// Shift the propagated field on the first vertex of W_{n-1} by this
    /// amount, breaking consistency on purpose.
    #[arg(long)]
    pub perturb: Option<f64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct OrbitArgs {
    #[arg(long, default_value_t = 3)]
    pub k: u32,
    #[arg(long, default_value_t = 3)]
    pub q: usize,
    #[command(flatten)]
    pub coupling: Coupling,
    /// Start point `z1,z2,z3,z4`, all positive.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "1,1,1,1",
        allow_negative_numbers = true
    )]
    pub z: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct TreeArgs {
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Invalid(m) | CliError::Numerical(m) => m,
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::ThetaOutOfRange(_) | SolverError::GridTooSmall { .. } | SolverError::Period2(_) => {
                invalid(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Domain(_) | ModelError::NonFiniteWeight => CliError::Numerical(e.to_string()),
            _ => invalid(e.to_string()),
        }
    }
}

/// What a command produced: the rendered output and its exit code.
struct Report {
    body: String,
    code: i32,
    warnings: Vec<String>,
}

impl Report {
    fn ok(body: String) -> Self {
        Report {
            body,
            code: EXIT_OK,
            warnings: Vec::new(),
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Results go to `out` (or `--out`), diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INVALID,
            };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if code == EXIT_OK { out } else { err };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };

    let (result, output) = match &cli.command {
        Command::Roots(a) => (cmd_roots(a), &a.output),
        Command::Scan(a) => (cmd_scan(a), &a.output),
        Command::Verify(a) => (cmd_verify(a), &a.output),
        Command::Orbit(a) => (cmd_orbit(a), &a.output),
        Command::TreeCheck(a) => (cmd_tree(a), &a.output),
    };
    match result {
        Ok(report) => {
            for w in &report.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            let written = match &output.out {
                Some(path) => {
                    std::fs::write(path, &report.body).map_err(|e| format!("writing {}: {e}", path.display()))
                }
                None => out
                    .write_all(report.body.as_bytes())
                    .map_err(|e| format!("writing standard output: {e}")),
            };
            match written {
                Ok(()) => report.code,
                Err(msg) => {
                    let _ = writeln!(err, "error: {msg}");
                    EXIT_INVALID
                }
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.exit_code()
        }
    }
}

fn require_q3(q: usize) -> Result<(), CliError> {
    if q == 3 {
        Ok(())
    } else {
        Err(invalid(format!(
            "q = {q} is only supported by `verify`; the period-2 system needs q = 3"
        )))
    }
}

fn period2_order(k: u32) -> Result<f64, CliError> {
    theta_cr(k).map_err(|_| invalid(format!("k must be >= 3 for the period-2 theory, got {k}")))
}

impl Coupling {
    fn theta(&self) -> Result<f64, CliError> {
        let theta = match (self.theta, self.coupling, self.beta) {
            (Some(t), None, None) => t,
            (None, Some(j), Some(b)) => {
                if !(b > 0.0 && b.is_finite() && j.is_finite()) {
                    return Err(invalid(format!("need finite J and beta > 0, got J = {j}, beta = {b}")));
                }
                (j * b).exp()
            }
            _ => return Err(invalid("give either --theta or both --J and --beta")),
        };
        if theta > 0.0 && theta.is_finite() {
            Ok(theta)
        } else {
            Err(invalid(format!("theta must be positive and finite, got {theta}")))
        }
    }
}

/// Parses `lo:hi:steps`.
pub fn parse_range(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, steps] = parts.as_slice() else {
        return Err(format!("invalid range {s:?}: expected lo:hi:steps"));
    };
    let num = |p: &str| {
        p.trim()
            .parse::<f64>()
            .map_err(|_| format!("invalid range {s:?}: {p:?} is not a number"))
    };
    let steps = steps
        .trim()
        .parse::<usize>()
        .map_err(|_| format!("invalid range {s:?}: steps must be a positive integer"))?;
    Ok((num(lo)?, num(hi)?, steps))
}

fn json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn csv_text(rows: &[ScanRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("ascii")
}

fn report_row(rep: &RootReport) -> ScanRow {
    ScanRow {
        k: rep.k,
        theta: rep.theta,
        theta_cr: rep.theta_cr,
        count: rep.count(),
        roots: rep.xs(),
        pairs: rep.pairs.clone(),
        flags: ScanFlags {
            near_degenerate: rep.flags.near_degenerate,
            domain_edge: rep.flags.domain_edge,
            unpaired: rep.flags.unpaired,
            error: None,
        },
    }
}

fn cmd_roots(a: &RootsArgs) -> Result<Report, CliError> {
    require_q3(a.q)?;
    period2_order(a.k)?;
    let theta = a.coupling.theta()?;
    if theta >= 1.0 {
        return Err(invalid(format!(
            "roots needs 0 < theta < 1 (antiferromagnetic), got {theta}"
        )));
    }
    let rep = find_h_roots(theta, a.k, a.grid)?;
    let body = match a.output.format {
        Format::Json => json(&rep),
        Format::Csv => csv_text(&[report_row(&rep)]),
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "k = {}, theta = {}, theta_cr = {}",
                rep.k,
                format_g17(theta),
                format_g17(rep.theta_cr)
            );
            let _ = writeln!(
                s,
                "domain of g: ({}, {})",
                format_g17(rep.domain.lower()),
                format_g17(rep.domain.upper())
            );
            for r in &rep.roots {
                let kind = match r.kind {
                    RootKind::TranslationInvariant => "translation-invariant",
                    RootKind::Period2 => "period-2",
                };
                let _ = writeln!(
                    s,
                    "  x = {:<22} {kind:<22} |h(x)| = {:.3e}",
                    format_g17(r.x),
                    r.residual
                );
            }
            for p in &rep.pairs {
                let _ = writeln!(
                    s,
                    "  orbit ({}, {}): |f(x0) - x2| = {:.3e}, |f(f(x0)) - x0| = {:.3e}",
                    format_g17(p.low),
                    format_g17(p.high),
                    p.image_gap,
                    p.closure
                );
            }
            for (set, name) in [
                (rep.flags.near_degenerate, "near-degenerate roots merged"),
                (rep.flags.domain_edge, "sign change at the domain edge"),
                (rep.flags.unpaired, "unpaired roots"),
            ] {
                if set {
                    let _ = writeln!(s, "  flag: {name}");
                }
            }
            let (ti, p2) = rep.classification();
            let _ = writeln!(s, "{ti} translation-invariant + {p2} period-2");
            s
        }
    };
    Ok(Report::ok(body))
}

fn cmd_scan(a: &ScanArgs) -> Result<Report, CliError> {
    require_q3(a.q)?;
    period2_order(a.k)?;
    let (lo, hi, steps) = parse_range(&a.theta).map_err(invalid)?;
    let exec = if a.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let rows = scan_theta_with(a.k, lo, hi, steps, a.grid, exec).map_err(|e| match e {
        ScanError::Order(_) => invalid(format!("k must be >= 3 for the period-2 theory, got {}", a.k)),
        e => invalid(e.to_string()),
    })?;
    let failed = rows.iter().filter(|r| r.flags.error.is_some()).count();
    let body = match a.output.format {
        Format::Csv => csv_text(&rows),
        Format::Json => {
            let mut buf = Vec::new();
            write_json(&rows, &mut buf).expect("in-memory write");
            String::from_utf8(buf).expect("utf-8")
        }
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "k = {}, theta_cr = {}", a.k, format_g17(rows[0].theta_cr));
            let _ = writeln!(
                s,
                "{:>22} {:>5} {:>22} {:>22} {:>22}  flags",
                "theta", "count", "x0", "x1", "x2"
            );
            for r in &rows {
                let root = |i: usize| r.roots.get(i).map(|&x| format_g17(x)).unwrap_or_default();
                let _ = writeln!(
                    s,
                    "{:>22} {:>5} {:>22} {:>22} {:>22}  {}",
                    format_g17(r.theta),
                    r.count,
                    root(0),
                    root(1),
                    root(2),
                    r.flag_tokens()
                );
            }
            s
        }
    };
    let mut report = Report::ok(body);
    if failed > 0 {
        report.code = EXIT_NUMERICAL;
        report.warnings.push(format!("{failed} of {} rows failed", rows.len()));
    }
    Ok(report)
}

#[derive(Debug, Serialize)]
struct VerifySummary {
    k: usize,
    q: usize,
    n: usize,
    theta: f64,
    seed: u64,
    perturb: Option<f64>,
    violations: Vec<f64>,
    max_violation: f64,
    tolerance: f64,
    pass: bool,
}

fn cmd_verify(a: &VerifyArgs) -> Result<Report, CliError> {
    let theta = a.coupling.theta()?;
    let params = ModelParams::from_theta(a.k, a.q, theta)?;
    if a.n == 0 {
        return Err(invalid("verify needs a ball of radius n >= 1"));
    }
    if a.trials == 0 {
        return Err(invalid("--trials must be at least 1"));
    }
    if !(a.amplitude >= 0.0 && a.amplitude.is_finite()) {
        return Err(invalid(format!(
            "--amplitude must be finite and >= 0, got {}",
            a.amplitude
        )));
    }
    // Check the enumeration guard before building anything large.
    let vertices = ball_size(a.k, a.n).unwrap_or(usize::MAX);
    let states = (a.q as f64).powf(vertices as f64);
    if states > MAX_CONFIGURATIONS as f64 {
        return Err(invalid(format!(
            "enumeration guard exceeded: {}^{vertices} states (limit {MAX_CONFIGURATIONS})",
            a.q
        )));
    }
    let tree = build_tree(a.k, a.n).map_err(|e| invalid(e.to_string()))?;
    let target = tree.level_range(a.n - 1).map_err(|e| invalid(e.to_string()))?.start;

    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut violations = Vec::with_capacity(a.trials);
    for _ in 0..a.trials {
        let leaf = random_fields(tree.leaves().len(), a.q, a.amplitude, &mut rng);
        let mut fields = propagate_fields(&tree, &leaf, &params)?;
        if let Some(delta) = a.perturb {
            let mut shifted = fields[target].components().to_vec();
            shifted[0] += delta;
            fields[target] = FieldVector::new(shifted)?;
        }
        violations.push(check_consistency(&tree, &fields, &params)?);
    }
    let max_violation = violations.iter().copied().fold(0.0, f64::max);
    let pass = max_violation <= VERIFY_TOLERANCE;
    let summary = VerifySummary {
        k: a.k,
        q: a.q,
        n: a.n,
        theta,
        seed: a.seed,
        perturb: a.perturb,
        violations,
        max_violation,
        tolerance: VERIFY_TOLERANCE,
        pass,
    };
    let body = match a.output.format {
        Format::Json => json(&summary),
        Format::Csv => {
            let mut s = String::from("trial,violation\n");
            for (i, v) in summary.violations.iter().enumerate() {
                let _ = writeln!(s, "{i},{}", format_g17(*v));
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "k = {}, q = {}, n = {}, theta = {}, trials = {}, seed = {}",
                a.k,
                a.q,
                a.n,
                format_g17(theta),
                a.trials,
                a.seed
            );
            if let Some(d) = a.perturb {
                let _ = writeln!(s, "perturbation: {d} on vertex {target}");
            }
            let verdict = if pass { "PASS" } else { "FAIL" };
            let _ = writeln!(
                s,
                "{verdict}: max violation {max_violation:.3e} (tolerance {VERIFY_TOLERANCE:.0e})"
            );
            s
        }
    };
    Ok(Report {
        body,
        code: if pass { EXIT_OK } else { EXIT_NUMERICAL },
        warnings: Vec::new(),
    })
}

#[derive(Debug, Serialize)]
struct OrbitSummary {
    k: u32,
    theta: f64,
    start: [f64; 4],
    point: [f64; 4],
    iterations: usize,
    converged: bool,
    two_cycle: bool,
    residual: f64,
    invariant_set_defect: f64,
    /// `None` when `theta >= 1`.
    sign_relations_hold: Option<bool>,
    trace: Vec<[f64; 4]>,
}

fn cmd_orbit(a: &OrbitArgs) -> Result<Report, CliError> {
    require_q3(a.q)?;
    if a.k < 1 {
        return Err(invalid("k must be at least 1"));
    }
    let theta = a.coupling.theta()?;
    let z: [f64; 4] =
        a.z.as_slice()
            .try_into()
            .map_err(|_| invalid(format!("--z needs 4 components, got {}", a.z.len())))?;
    let z0 = ZVector::new(z).map_err(|e| invalid(e.to_string()))?;
    if !(a.tol >= 0.0 && a.tol.is_finite()) {
        return Err(invalid(format!("--tol must be finite and >= 0, got {}", a.tol)));
    }
    let sys = Period2System::new(theta, a.k).map_err(|e| invalid(e.to_string()))?;
    let fp = fixed_point_iterate(|z| sys.apply(z), z0, a.tol, a.max_iter)?;

    let mut warnings = Vec::new();
    let sign_relations_hold = if theta < 1.0 {
        let mut all = true;
        for z in &fp.trace {
            let once = sys.apply(z).map_err(|e| CliError::Numerical(e.to_string()))?;
            let twice = sys.apply(&once).map_err(|e| CliError::Numerical(e.to_string()))?;
            let ok_first = proposition_sign_check(z, &once, theta)
                .map(|s| s.all())
                .unwrap_or(false);
            let ok_second = proposition_sign_check(&once, &twice, theta)
                .map(|s| s.all())
                .unwrap_or(false);
            all &= ok_first && ok_second;
        }
        Some(all)
    } else {
        warnings.push(format!(
            "theta = {theta} is outside the antiferromagnetic regime; sign checks skipped"
        ));
        None
    };

    let summary = OrbitSummary {
        k: a.k,
        theta,
        start: z,
        point: fp.point.components(),
        iterations: fp.iterations,
        converged: fp.converged,
        two_cycle: fp.two_cycle,
        residual: fp.residual,
        invariant_set_defect: fp.point.invariant_set_defect(),
        sign_relations_hold,
        trace: fp.trace.iter().map(ZVector::components).collect(),
    };
    let body = match a.output.format {
        Format::Json => json(&summary),
        Format::Csv => {
            let mut s = String::from("step,z1,z2,z3,z4\n");
            for (i, z) in summary.trace.iter().enumerate() {
                let zs: Vec<String> = z.iter().map(|&c| format_g17(c)).collect();
                let _ = writeln!(s, "{},{}", 2 * i, zs.join(","));
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            let status = if fp.converged {
                "converged"
            } else if fp.two_cycle {
                "2-cycle"
            } else {
                "not converged"
            };
            let _ = writeln!(s, "k = {}, theta = {}", a.k, format_g17(theta));
            let _ = writeln!(s, "{status} after {} double steps", fp.iterations);
            let pt: Vec<String> = summary.point.iter().map(|&c| format_g17(c)).collect();
            let _ = writeln!(s, "z = ({})", pt.join(", "));
            let _ = writeln!(s, "residual |F(z) - z| = {:.3e}", fp.residual);
            let on_set = if summary.invariant_set_defect == 0.0 {
                " (on the invariant set)"
            } else {
                ""
            };
            let _ = writeln!(s, "invariant-set defect = {:.3e}{on_set}", summary.invariant_set_defect);
            match sign_relations_hold {
                Some(true) => {
                    let _ = writeln!(s, "sign relations held at all {} steps", 2 * fp.trace.len());
                }
                Some(false) => {
                    let _ = writeln!(s, "sign relations VIOLATED");
                }
                None => {
                    let _ = writeln!(s, "sign relations not checked");
                }
            }
            s
        }
    };
    let failed = (!fp.converged && !fp.two_cycle) || sign_relations_hold == Some(false);
    Ok(Report {
        body,
        code: if failed { EXIT_NUMERICAL } else { EXIT_OK },
        warnings,
    })
}

#[derive(Debug, Serialize)]
struct TreeSummary {
    k: usize,
    n: usize,
    vertices: usize,
    edges: usize,
    level_sizes: Vec<usize>,
    consistent: bool,
}

fn cmd_tree(a: &TreeArgs) -> Result<Report, CliError> {
    let tree = build_tree(a.k, a.n).map_err(|e| invalid(e.to_string()))?;
    let level_sizes = tree.level_sizes();
    let expected: Vec<usize> = (0..=a.n)
        .map(|m| if m == 0 { 1 } else { (a.k + 1) * a.k.pow(m as u32 - 1) })
        .collect();
    let edges = tree.edges().count();
    let fan_out_ok = (0..tree.len()).all(|x| {
        let want = match tree.generation(x) {
            Ok(g) if g == a.n => 0,
            _ if x == tree.root() => a.k + 1,
            _ => a.k,
        };
        tree.children(x).map(|c| c.len() == want).unwrap_or(false)
    });
    let consistent = level_sizes == expected && edges + 1 == tree.len() && fan_out_ok;
    let summary = TreeSummary {
        k: a.k,
        n: a.n,
        vertices: tree.len(),
        edges,
        level_sizes,
        consistent,
    };
    let body = match a.output.format {
        Format::Json => json(&summary),
        Format::Csv => {
            let mut s = String::from("level,size\n");
            for (m, size) in summary.level_sizes.iter().enumerate() {
                let _ = writeln!(s, "{m},{size}");
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "k = {}, n = {}: {} vertices, {} edges",
                a.k, a.n, summary.vertices, edges
            );
            for (m, size) in summary.level_sizes.iter().enumerate() {
                let _ = writeln!(s, "  |W_{m}| = {size}");
            }
            let _ = writeln!(
                s,
                "{}",
                if consistent {
                    "structure OK"
                } else {
                    "structure MISMATCH"
                }
            );
            s
        }
    };
    Ok(Report {
        body,
        code: if consistent { EXIT_OK } else { EXIT_NUMERICAL },
        warnings: Vec::new(),
    })
}
