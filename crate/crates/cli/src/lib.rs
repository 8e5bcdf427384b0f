//! Command implementations behind the `ultrakernel` binary.

// `!(a < b)` is used on purpose so that NaN fails every check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use ultrakernel::dimwalk::{eval_mixture, lift, verify_lift, SchoenbergSeq};
use ultrakernel::identities::{sweep, ValidationReport, SWEEP_TOLERANCE};
use ultrakernel::kernel::{
    kernel_integral, kernel_integral_adaptive, kernel_series, poisson_closed_form,
    IntegralOptions, KernelEvaluation, KernelParams, Method, ProjectionOptions, Resolution,
};
use ultrakernel::{eval_w_index, weight_omega, Error as CoreError, Index};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "ULTRAKERNEL_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Numeric(#[from] CoreError),
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Every error is a rejected request (2) except failures to write output.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            _ => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "ultrakernel", version, about = "Ultraspherical projection kernels and dimension walks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate W_n^lambda(x), and omega_n^nu when --nu is given.
    Eval(EvalArgs),
    /// Evaluate the kernel m(x; y) at one point.
    Kernel(KernelArgs),
    /// Tabulate the kernel surface over a grid.
    Figure(FigureArgs),
    /// Compare truncated series against the double integral.
    Compare(CompareArgs),
    /// Run the randomized identity sweep.
    Validate(ValidateArgs),
    /// Raise the index of a Schoenberg sequence.
    Walk(WalkArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl Output {
    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    fn write(&self, text: &str) -> CliResult<()> {
        match &self.out {
            Some(path) => fs::write(path, text)?,
            None => io::stdout().lock().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub n: usize,
    /// Index of the polynomial: a number or `inf`.
    #[arg(long, value_parser = parse_index)]
    pub lambda: Index,
    #[arg(long, allow_hyphen_values = true)]
    pub x: f64,
    #[arg(long)]
    pub nu: Option<f64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelMethod {
    Integral,
    Adaptive,
    Series,
    ClosedForm,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long)]
    pub lambda: f64,
    #[arg(long)]
    pub nu: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub r: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub x: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub y: f64,
    /// `closed-form` evaluates the Poisson kernel at (nu, r, x) and ignores lambda and y.
    #[arg(long, value_enum, default_value = "integral")]
    pub method: KernelMethod,
    #[arg(long, default_value_t = 64)]
    pub qu: usize,
    #[arg(long, default_value_t = 64)]
    pub qv: usize,
    #[arg(long = "n-trunc", default_value_t = 600)]
    pub n_trunc: usize,
    /// Stopping tolerance of the adaptive method.
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[arg(long, default_value_t = 3.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.5)]
    pub nu: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    pub r: f64,
    /// `xmin:xmax:step[,ymin:ymax:step]`; the y axis repeats x when omitted.
    #[arg(long, allow_hyphen_values = true, default_value = "-0.95:0.95:0.05")]
    pub grid: String,
    #[arg(long, default_value_t = 64)]
    pub qu: usize,
    #[arg(long, default_value_t = 64)]
    pub qv: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub lambda: f64,
    #[arg(long)]
    pub nu: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub r: f64,
    /// Single point when no grid is given.
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.2)]
    pub x: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = -0.4)]
    pub y: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Largest series truncation; N/4 and N/2 are also reported.
    #[arg(long = "n-trunc", default_value_t = 600)]
    pub n_trunc: usize,
    /// Largest quadrature sizes; Q/4 and Q/2 are also reported.
    #[arg(long, default_value_t = 96)]
    pub qu: usize,
    #[arg(long, default_value_t = 96)]
    pub qv: usize,
    /// Leave out wall times so that repeated runs are byte-identical.
    #[arg(long)]
    pub omit_timings: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub count: usize,
    #[arg(long, default_value_t = SWEEP_TOLERANCE)]
    pub tolerance: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct WalkArgs {
    /// JSON file with `coefficients`, `index` and `epsilon`.
    #[arg(long, conflicts_with = "q")]
    pub input: Option<PathBuf>,
    /// Geometric spectrum a_n = (1-q) q^n instead of --input.
    #[arg(long)]
    pub q: Option<f64>,
    /// Index of the geometric spectrum.
    #[arg(long, value_parser = parse_index)]
    pub nu: Option<Index>,
    /// Declared tail mass of the geometric spectrum.
    #[arg(long, default_value_t = 1e-12)]
    pub tail: f64,
    /// Target index: a number or `inf`.
    #[arg(long, value_parser = parse_index)]
    pub lambda: Index,
    /// Points at which the lifted mixture is evaluated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Vec<f64>,
    /// Also integrate the original mixture against the kernel at each point.
    #[arg(long)]
    pub verify: bool,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    #[command(flatten)]
    pub output: Output,
}

fn parse_index(s: &str) -> std::result::Result<Index, String> {
    match s.to_ascii_lowercase().as_str() {
        "inf" | "infinity" => Ok(Index::Infinity),
        t => t
            .parse::<f64>()
            .map(Index::Finite)
            .map_err(|e| format!("expected a number or `inf`: {e}")),
    }
}

/// Seventeen significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// One axis `min:max:step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Axis {
    pub fn parse(s: &str) -> CliResult<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts.as_slice() else {
            return Err(CliError::Usage(format!("axis must be min:max:step, got {s:?}")));
        };
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Usage(format!("bad number {t:?} in axis {s:?}: {e}")))
        };
        let axis = Axis {
            min: num(a)?,
            max: num(b)?,
            step: num(c)?,
        };
        if !(axis.step > 0.0) || !(axis.min <= axis.max) || !axis.max.is_finite() || !axis.min.is_finite() {
            return Err(CliError::Usage(format!(
                "axis {s:?} needs min <= max and step > 0"
            )));
        }
        Ok(axis)
    }

    /// Points `min + k step` up to `max`, rounded to 12 decimals so that
    /// symmetric grids stay symmetric.
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|k| {
                let v = self.min + k as f64 * self.step;
                let v = (v * 1e12).round() / 1e12;
                if v == 0.0 {
                    0.0
                } else {
                    v
                }
            })
            .collect()
    }
}

/// `xmin:xmax:step[,ymin:ymax:step]`.
pub fn parse_grid(s: &str) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let mut axes = s.split(',');
    let x = Axis::parse(axes.next().unwrap_or_default())?;
    let y = match axes.next() {
        Some(t) => Axis::parse(t)?,
        None => x,
    };
    if axes.next().is_some() {
        return Err(CliError::Usage(format!("grid has more than two axes: {s:?}")));
    }
    Ok((x.points(), y.points()))
}

/// Builds the global thread pool from `ULTRAKERNEL_THREADS` if it is set.
pub fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure {n} threads: {e}")))
}

/// Runs a command and returns the process exit code.
pub fn run(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Eval(a) => cmd_eval(&a).map(|_| 0),
        Command::Kernel(a) => cmd_kernel(&a).map(|_| 0),
        Command::Figure(a) => cmd_figure(&a).map(|_| 0),
        Command::Compare(a) => cmd_compare(&a).map(|_| 0),
        Command::Validate(a) => cmd_validate(&a),
        Command::Walk(a) => cmd_walk(&a),
    }
}

#[derive(Serialize)]
struct EvalRecord {
    degree: usize,
    index: Index,
    argument: f64,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega_index: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega: Option<f64>,
}

pub fn cmd_eval(a: &EvalArgs) -> CliResult<()> {
    let value = eval_w_index(a.n, a.lambda, a.x)?;
    let omega = a.nu.map(|nu| weight_omega(a.n, nu)).transpose()?;
    let rec = EvalRecord {
        degree: a.n,
        index: a.lambda,
        argument: a.x,
        value,
        omega_index: a.nu,
        omega,
    };
    let text = match a.output.format_or(Format::Json) {
        Format::Json => serde_json::to_string(&rec)? + "\n",
        Format::Csv => {
            let mut s = String::from("degree,index,argument,value");
            if rec.omega.is_some() {
                s.push_str(",omega_index,omega");
            }
            let _ = write!(s, "\n{},{},{},{}", rec.degree, rec.index, fmt_f64(rec.argument), fmt_f64(rec.value));
            if let (Some(nu), Some(w)) = (rec.omega_index, rec.omega) {
                let _ = write!(s, ",{},{}", fmt_f64(nu), fmt_f64(w));
            }
            s + "\n"
        }
    };
    a.output.write(&text)
}

fn resolution_fields(r: &Resolution) -> (String, String) {
    match *r {
        Resolution::Terms(n) => (n.to_string(), String::new()),
        Resolution::Nodes { qu, qv, .. } => (qu.to_string(), qv.to_string()),
        Resolution::Exact => (String::new(), String::new()),
    }
}

fn evaluation_csv(rows: &[(f64, f64, KernelEvaluation)]) -> String {
    let mut s = String::from("x,y,value,method,n_or_qu,qv,est_error\n");
    for (x, y, e) in rows {
        let method = match e.method {
            Method::Series => "series",
            Method::Integral => "integral",
            Method::ClosedForm => "closed_form",
        };
        let (n, q) = resolution_fields(&e.resolution);
        let _ = writeln!(
            s,
            "{},{},{},{method},{n},{q},{}",
            fmt_f64(*x),
            fmt_f64(*y),
            fmt_f64(e.value),
            fmt_f64(e.est_error)
        );
    }
    s
}

pub fn cmd_kernel(a: &KernelArgs) -> CliResult<()> {
    let eval = match a.method {
        KernelMethod::ClosedForm => KernelEvaluation {
            value: poisson_closed_form(a.nu, a.r, a.x)?,
            method: Method::ClosedForm,
            resolution: Resolution::Exact,
            est_error: 0.0,
        },
        m => {
            let p = KernelParams::new(a.lambda, a.nu, a.r, a.x, a.y)?;
            match m {
                KernelMethod::Series => kernel_series(&p, a.n_trunc)?,
                KernelMethod::Adaptive => kernel_integral_adaptive(
                    &p,
                    &IntegralOptions::with_nodes(a.qu, a.qv),
                    a.tolerance,
                )?,
                _ => kernel_integral(&p, a.qu, a.qv)?,
            }
        }
    };
    let text = match a.output.format_or(Format::Json) {
        Format::Json => serde_json::to_string(&eval)? + "\n",
        Format::Csv => evaluation_csv(&[(a.x, a.y, eval)]),
    };
    a.output.write(&text)
}

/// Kernel integral on every `(x, y)` of the grid, in row-major order.
pub fn surface(
    lambda: f64,
    nu: f64,
    r: f64,
    xs: &[f64],
    ys: &[f64],
    qu: usize,
    qv: usize,
) -> CliResult<Vec<(f64, f64, KernelEvaluation)>> {
    let points: Vec<(f64, f64)> = xs
        .iter()
        .flat_map(|&x| ys.iter().map(move |&y| (x, y)))
        .collect();
    // reject the configuration once, before fanning out
    KernelParams::new(lambda, nu, r, points[0].0, points[0].1)
        .and_then(|p| {
            if p.in_singular_range() {
                Err(CoreError::SingularRange {
                    op: "figure",
                    lambda,
                    nu,
                })
            } else {
                Ok(p)
            }
        })?;
    points
        .par_iter()
        .map(|&(x, y)| {
            let p = KernelParams::new(lambda, nu, r, x, y)?;
            Ok((x, y, kernel_integral(&p, qu, qv)?))
        })
        .collect()
}

pub fn cmd_figure(a: &FigureArgs) -> CliResult<()> {
    let (xs, ys) = parse_grid(&a.grid)?;
    let rows = surface(a.lambda, a.nu, a.r, &xs, &ys, a.qu, a.qv)?;
    let text = match a.output.format_or(Format::Csv) {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["x", "y", "value", "est_error"])?;
            for (x, y, e) in &rows {
                w.write_record([fmt_f64(*x), fmt_f64(*y), fmt_f64(e.value), fmt_f64(e.est_error)])?;
            }
            String::from_utf8(w.into_inner().map_err(|e| e.into_error())?)
                .expect("csv output is ascii")
        }
        Format::Json => {
            let recs: Vec<_> = rows
                .iter()
                .map(|(x, y, e)| serde_json::json!({"x": x, "y": y, "value": e.value, "est_error": e.est_error}))
                .collect();
            serde_json::to_string(&recs)? + "\n"
        }
    };
    a.output.write(&text)
}

#[derive(Debug, Serialize)]
pub struct MethodRun {
    pub n_or_q: usize,
    pub value: f64,
    pub est_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct CompareRecord {
    pub x: f64,
    pub y: f64,
    pub series: Vec<MethodRun>,
    pub integral: Vec<MethodRun>,
    /// `|series(N) - integral(Q)|` at the largest `N` and `Q`.
    pub abs_difference: f64,
}

fn timed<T>(f: impl FnOnce() -> T, keep: bool) -> (T, Option<f64>) {
    let start = Instant::now();
    let out = f();
    // one nanosecond is the clock resolution; a call never takes zero time
    let secs = start.elapsed().as_secs_f64().max(1e-9);
    (out, keep.then_some(secs))
}

fn ladder(top: usize, floor: usize) -> Vec<usize> {
    let mut v: Vec<usize> = [top / 4, top / 2, top].iter().map(|&k| k.max(floor)).collect();
    v.dedup();
    v
}

pub fn compare_point(a: &CompareArgs, x: f64, y: f64) -> CliResult<CompareRecord> {
    let p = KernelParams::new(a.lambda, a.nu, a.r, x, y)?;
    let keep = !a.omit_timings;
    let mut series = Vec::new();
    for n in ladder(a.n_trunc, 1) {
        let (e, seconds) = timed(|| kernel_series(&p, n), keep);
        let e = e?;
        series.push(MethodRun {
            n_or_q: n,
            value: e.value,
            est_error: e.est_error,
            seconds,
        });
    }
    let mut integral = Vec::new();
    for (qu, qv) in ladder(a.qu, 2).into_iter().zip(ladder(a.qv, 2)) {
        let (e, seconds) = timed(|| kernel_integral(&p, qu, qv), keep);
        let e = e?;
        integral.push(MethodRun {
            n_or_q: qu,
            value: e.value,
            est_error: e.est_error,
            seconds,
        });
    }
    let abs_difference = (series.last().map_or(f64::NAN, |s| s.value)
        - integral.last().map_or(f64::NAN, |s| s.value))
    .abs();
    Ok(CompareRecord {
        x,
        y,
        series,
        integral,
        abs_difference,
    })
}

pub fn cmd_compare(a: &CompareArgs) -> CliResult<()> {
    let points: Vec<(f64, f64)> = match &a.grid {
        Some(g) => {
            let (xs, ys) = parse_grid(g)?;
            xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).collect()
        }
        None => vec![(a.x, a.y)],
    };
    // sequential so that wall times are not distorted by contention
    let records = points
        .iter()
        .map(|&(x, y)| compare_point(a, x, y))
        .collect::<CliResult<Vec<_>>>()?;
    let text = match a.output.format_or(Format::Json) {
        Format::Json => serde_json::to_string_pretty(&records)? + "\n",
        Format::Csv => {
            let mut s = String::from("x,y,method,n_or_q,value,est_error,seconds\n");
            for r in &records {
                for (name, runs) in [("series", &r.series), ("integral", &r.integral)] {
                    for m in runs.iter() {
                        let _ = writeln!(
                            s,
                            "{},{},{name},{},{},{},{}",
                            fmt_f64(r.x),
                            fmt_f64(r.y),
                            m.n_or_q,
                            fmt_f64(m.value),
                            fmt_f64(m.est_error),
                            m.seconds.map(fmt_f64).unwrap_or_default()
                        );
                    }
                }
            }
            s
        }
    };
    a.output.write(&text)
}

fn reports_text(reports: &[ValidationReport], format: Format) -> CliResult<String> {
    Ok(match format {
        Format::Json => {
            let mut s = String::new();
            for r in reports {
                s.push_str(&r.to_json());
                s.push('\n');
            }
            s
        }
        Format::Csv => {
            let mut s = String::from("identity,params,lhs,rhs,residual,tolerance,passed\n");
            for r in reports {
                let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    r.identity,
                    params.join(";"),
                    fmt_f64(r.lhs),
                    fmt_f64(r.rhs),
                    fmt_f64(r.residual),
                    fmt_f64(r.tolerance),
                    r.passed
                );
            }
            s
        }
    })
}

pub fn cmd_validate(a: &ValidateArgs) -> CliResult<i32> {
    if !(a.tolerance >= 0.0) {
        return Err(CliError::Usage(format!("tolerance must be >= 0, got {}", a.tolerance)));
    }
    let reports = sweep(a.seed, a.count, a.tolerance)?;
    a.output.write(&reports_text(&reports, a.output.format_or(Format::Json))?)?;
    let failed = reports.iter().filter(|r| !r.passed).count();
    eprintln!("{} reports, {failed} failed", reports.len());
    Ok(if failed == 0 { 0 } else { 1 })
}

#[derive(Debug, Serialize)]
struct WalkPoint {
    x: f64,
    value: f64,
    tail_mass: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    check: Option<ValidationReport>,
}

#[derive(Debug, Serialize)]
struct WalkOutput {
    sequence: SchoenbergSeq,
    points: Vec<WalkPoint>,
}

pub fn cmd_walk(a: &WalkArgs) -> CliResult<i32> {
    let seq = match (&a.input, a.q) {
        (Some(path), _) => SchoenbergSeq::from_json(&fs::read_to_string(path)?)?,
        (None, Some(q)) => {
            let nu = a
                .nu
                .ok_or_else(|| CliError::Usage("--q needs --nu for the index of the spectrum".into()))?;
            SchoenbergSeq::geometric(q, nu, a.tail)?
        }
        (None, None) => return Err(CliError::Usage("give either --input or --q".into())),
    };
    let lifted = lift(&seq, a.lambda)?;
    let points = a
        .x
        .iter()
        .map(|&x| {
            let check = if a.verify {
                let lambda = a
                    .lambda
                    .finite()
                    .ok_or_else(|| CliError::Usage("--verify needs a finite target index".into()))?;
                Some(verify_lift(&seq, lambda, x, &ProjectionOptions::default(), a.tolerance)?)
            } else {
                None
            };
            Ok(WalkPoint {
                x,
                value: eval_mixture(&lifted, x)?,
                tail_mass: lifted.tail_mass(),
                check,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let failed = points
        .iter()
        .filter(|p| p.check.as_ref().is_some_and(|c| !c.passed))
        .count();
    let text = match a.output.format_or(Format::Json) {
        Format::Json => {
            serde_json::to_string(&WalkOutput {
                sequence: lifted,
                points,
            })? + "\n"
        }
        Format::Csv => {
            let mut s = String::from("x,value,tail_mass,projected,residual,passed\n");
            for p in &points {
                let (proj, res, ok) = match &p.check {
                    Some(c) => (fmt_f64(c.rhs), fmt_f64(c.residual), c.passed.to_string()),
                    None => Default::default(),
                };
                let _ = writeln!(s, "{},{},{},{proj},{res},{ok}", fmt_f64(p.x), fmt_f64(p.value), fmt_f64(p.tail_mass));
            }
            s
        }
    };
    a.output.write(&text)?;
    Ok(if failed == 0 { 0 } else { 1 })
}
