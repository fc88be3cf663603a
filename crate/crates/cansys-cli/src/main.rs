//! Command-line front end for the canonical-system toolkit.
//!
//! Every computation of the library is reachable as a subcommand, with the
//! Hamiltonian supplied either as a JSON file or as a named builtin family.
//! Results go to stdout as a human-readable table, a single JSON document
//! with a `schema_version` field, or CSV rows for external plotters.
//!
//! Exit codes: 0 on success, 1 on a domain error (bad field, eigenvalue
//! hit, vanishing denominator, ...), 2 on a usage error.

use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use num_complex::Complex64;

use cansys::defaults;
use cansys::extension::{eigenvalues_in, SelfAdjointBvp};
use cansys::hamiltonian::{builtin, fmt_f64, trace_normalize, BuiltinParams, HamiltonianField};
use cansys::linalg::Vec2c;
use cansys::par::ExecMode;
use cansys::quadrature::GaussLegendre;
use cansys::relations::{
    analyze, extension_dimension_check, random_selfadjoint, random_symmetric, LinearRelation,
};
use cansys::resolvent::{apply_resolvent, hs_eigen_compare, hs_matrix, resolvent_residual, GreenKernel};
use cansys::weyl::{classify, m_function, BoundaryAngle, BuiltinFamily, Truncated, Verdict};
use cansys::{Error, Result};

#[derive(Parser)]
#[command(
    name = "cansys",
    version,
    about = "Spectral toolkit for 2x2 canonical systems J u' = z H u"
)]
struct Cli {
    /// Output format for results on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    output: Format,

    /// Run every scan sequentially instead of using the thread pool.
    #[arg(long, global = true)]
    sequential: bool,

    /// Print the table of default tolerances and parameters, then exit.
    #[arg(long)]
    show_defaults: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Check a Hamiltonian for shape, finiteness, and positive semi-definiteness.
    Validate {
        #[command(flatten)]
        source: FieldSource,
    },
    /// Rescale to unit trace per cell, dropping zero-trace cells.
    Normalize {
        #[command(flatten)]
        source: FieldSource,
        /// Write the normalized Hamiltonian to this file instead of stdout.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Limit-point/limit-circle classification along a truncation schedule.
    Classify {
        #[command(flatten)]
        source: FieldSource,
        /// Spectral point, written as a+bi.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z: Complex64,
        /// Truncation lengths, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = defaults::SCHEDULE)]
        schedule: Vec<f64>,
        /// Relative tolerance for declaring a norm sequence convergent.
        #[arg(long, default_value_t = defaults::REL_TOL)]
        rel_tol: f64,
    },
    /// Weyl m-function of the finite-interval problem.
    Mfunc {
        #[command(flatten)]
        source: FieldSource,
        /// Spectral point, written as a+bi.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z: Complex64,
        /// Boundary angle at the right endpoint: pi, pi/2, or a number.
        #[arg(long, value_parser = parse_angle, default_value = "pi")]
        beta: BoundaryAngle,
        /// Evaluate at this interval length; defaults to the full field.
        #[arg(long)]
        at: Option<f64>,
    },
    /// Eigenvalues of the self-adjoint problem in a window.
    Eigs {
        #[command(flatten)]
        source: FieldSource,
        /// Boundary angle at the left endpoint.
        #[arg(long, value_parser = parse_angle, default_value = "pi")]
        alpha: BoundaryAngle,
        /// Boundary angle at the right endpoint.
        #[arg(long, value_parser = parse_angle, default_value = "pi")]
        beta: BoundaryAngle,
        /// Search window, two numbers: low high.
        #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["LO", "HI"])]
        window: Vec<f64>,
        /// Sign-scan resolution across the window.
        #[arg(long, default_value_t = defaults::GRID_POINTS)]
        grid_points: usize,
        /// Bisection tolerance for each root.
        #[arg(long, default_value_t = defaults::ROOT_TOL)]
        tol: f64,
    },
    /// Apply the Green-kernel resolvent to a constant input and report the
    /// differential residual.
    ResolventCheck {
        #[command(flatten)]
        source: FieldSource,
        #[arg(long, value_parser = parse_angle, default_value = "pi")]
        alpha: BoundaryAngle,
        #[arg(long, value_parser = parse_angle, default_value = "pi")]
        beta: BoundaryAngle,
        /// Spectral point, written as a+bi; must avoid the spectrum.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z: Complex64,
        /// Components of the constant input, two numbers.
        #[arg(long, num_args = 2, allow_negative_numbers = true, default_values_t = [1.0, 0.0], value_names = ["H1", "H2"])]
        input: Vec<f64>,
        /// Gauss-Legendre order per cell.
        #[arg(long, default_value_t = defaults::QUAD_ORDER)]
        quad_order: usize,
        /// Cells in the finite-difference residual mesh.
        #[arg(long, default_value_t = defaults::RESIDUAL_MESH)]
        mesh: usize,
        /// Exchange the kernel branches (negative control; residual blows up).
        #[arg(long)]
        swapped: bool,
    },
    /// Cross-check shooting eigenvalues against the discretized kernel.
    HsCompare {
        #[command(flatten)]
        source: FieldSource,
        #[arg(long, value_parser = parse_angle, default_value = "pi")]
        alpha: BoundaryAngle,
        #[arg(long, value_parser = parse_angle, default_value = "pi")]
        beta: BoundaryAngle,
        /// Real spectral point off the spectrum.
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
        /// How many eigenvalue pairs to match.
        #[arg(long, default_value_t = 5)]
        count: usize,
        /// Nystrom nodes per cell.
        #[arg(long, default_value_t = 64)]
        nodes: usize,
    },
    /// Build an example linear relation and run the structural tests.
    RelationDemo {
        /// Which example: the defect-one span, the purely multivalued
        /// relation, or a seeded random (self-adjoint | symmetric) one.
        #[arg(long, value_enum, default_value_t = RelationKind::Span)]
        kind: RelationKind,
        /// Ambient dimension for the random kinds.
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Trials for the self-adjoint extension search.
        #[arg(long, default_value_t = defaults::EXTENSION_TRIALS)]
        trials: usize,
    },
    /// Emit a builtin Hamiltonian as JSON.
    Builtin {
        /// Family name: identity, half-identity, rank-one, exp-decay, random-psd.
        name: String,
        #[arg(long)]
        length: Option<f64>,
        #[arg(long)]
        cells: Option<usize>,
        #[arg(long)]
        rate: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write to this file instead of stdout.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RelationKind {
    Span,
    Multivalued,
    Selfadjoint,
    Symmetric,
}

/// Where the Hamiltonian comes from: a JSON file or a builtin family.
#[derive(Args, Clone)]
struct FieldSource {
    /// Hamiltonian JSON file.
    #[arg(long, value_name = "PATH", conflicts_with_all = ["builtin", "length", "cells", "rate", "seed"])]
    file: Option<PathBuf>,
    /// Builtin family: identity, half-identity, rank-one, exp-decay, random-psd.
    #[arg(long, value_name = "NAME")]
    builtin: Option<String>,
    /// Interval length for the builtin.
    #[arg(long)]
    length: Option<f64>,
    /// Cell count for the builtin.
    #[arg(long)]
    cells: Option<usize>,
    /// Decay rate for exp-decay.
    #[arg(long)]
    rate: Option<f64>,
    /// Seed for random-psd.
    #[arg(long)]
    seed: Option<u64>,
}

impl FieldSource {
    fn params(&self) -> BuiltinParams {
        BuiltinParams {
            length: self.length,
            cells: self.cells,
            rate: self.rate,
            seed: self.seed,
        }
    }

    fn resolve(&self) -> Result<HamiltonianField> {
        match (&self.file, &self.builtin) {
            (Some(path), None) => HamiltonianField::load(path),
            (None, Some(name)) => builtin(name, self.params()),
            _ => Err(Error::InvalidParams(
                "provide a Hamiltonian with --file or --builtin".into(),
            )),
        }
    }
}

// ---------------------------------------------------------------------
// Literal parsers
// ---------------------------------------------------------------------

/// Parses `a+bi` / `a-bi` with exponent-aware sign splitting, plus the
/// degenerate forms `a` (real) and `bi` (imaginary).
fn parse_complex(text: &str) -> std::result::Result<Complex64, String> {
    let t = text.trim();
    if t.is_empty() {
        return Err("empty complex literal".into());
    }
    let bytes = t.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        let c = bytes[i] as char;
        if (c == '+' || c == '-') && !matches!(bytes[i - 1] as char, 'e' | 'E') {
            split = Some(i);
            break;
        }
    }
    let parse_part = |s: &str, what: &str| -> std::result::Result<f64, String> {
        s.parse::<f64>()
            .map_err(|_| format!("cannot parse {what} part of complex literal '{t}'"))
    };
    let parse_imag = |s: &str| -> std::result::Result<f64, String> {
        let body = s
            .strip_suffix('i')
            .ok_or_else(|| format!("imaginary part must end with 'i' in '{t}'"))?;
        match body {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => parse_part(body, "imaginary"),
        }
    };
    match split {
        Some(i) => {
            let re = parse_part(&t[..i], "real")?;
            let im = parse_imag(&t[i..])?;
            Ok(Complex64::new(re, im))
        }
        None if t.ends_with('i') => Ok(Complex64::new(0.0, parse_imag(t)?)),
        None => Ok(Complex64::new(parse_part(t, "real")?, 0.0)),
    }
}

/// Parses a boundary angle: `pi`, `pi/k`, or a plain number in (0, pi].
fn parse_angle(text: &str) -> std::result::Result<BoundaryAngle, String> {
    let t = text.trim();
    let value = if let Some(rest) = t.strip_prefix("pi") {
        if rest.is_empty() {
            PI
        } else if let Some(den) = rest.strip_prefix('/') {
            let d: f64 = den
                .parse()
                .map_err(|_| format!("cannot parse angle divisor in '{t}'"))?;
            PI / d
        } else {
            return Err(format!("unrecognized angle '{t}'"));
        }
    } else {
        t.parse::<f64>()
            .map_err(|_| format!("unrecognized angle '{t}'"))?
    };
    BoundaryAngle::new(value).map_err(|e| e.to_string())
}

// ---------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------

fn json_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn json_complex(z: Complex64) -> String {
    format!("{{\"re\":{},\"im\":{}}}", fmt_f64(z.re), fmt_f64(z.im))
}

fn json_array<I: IntoIterator<Item = String>>(items: I) -> String {
    let body: Vec<String> = items.into_iter().collect();
    format!("[{}]", body.join(","))
}

/// One JSON document per invocation: schema_version, command, then the
/// command's own fields in a fixed order, so identical inputs give
/// byte-identical output.
fn json_document(command: &str, fields: Vec<(&str, String)>) -> String {
    let mut body = vec![
        ("schema_version".to_string(), "1".to_string()),
        ("command".to_string(), json_str(command)),
    ];
    body.extend(fields.into_iter().map(|(k, v)| (k.to_string(), v)));
    let rendered: Vec<String> = body
        .iter()
        .map(|(k, v)| format!("{}:{}", json_str(k), v))
        .collect();
    format!("{{{}}}", rendered.join(","))
}

fn csv_line(cells: &[String]) -> String {
    cells.join(",")
}

// ---------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------

fn main() {
    // Die quietly when the reader closes the pipe (`cansys ... | head`),
    // like every other line-oriented unix tool.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // Usage problems exit 2 with the message on stderr; help and
        // version are not errors and exit 0.
        Err(e) => e.exit(),
    };
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    if cli.show_defaults {
        print_defaults(cli.output);
        return Ok(());
    }
    let mode = if cli.sequential {
        ExecMode::Sequential
    } else {
        ExecMode::Parallel
    };
    let Some(command) = cli.command else {
        let mut usage = Cli::command();
        eprintln!("error: a subcommand is required\n");
        eprintln!("{}", usage.render_usage());
        std::process::exit(2);
    };
    match command {
        Command::Validate { source } => run_validate(&source, cli.output),
        Command::Normalize { source, out } => run_normalize(&source, out, cli.output),
        Command::Classify {
            source,
            z,
            schedule,
            rel_tol,
        } => run_classify(&source, z, &schedule, rel_tol, cli.output),
        Command::Mfunc { source, z, beta, at } => run_mfunc(&source, z, beta, at, cli.output),
        Command::Eigs {
            source,
            alpha,
            beta,
            window,
            grid_points,
            tol,
        } => run_eigs(&source, alpha, beta, &window, grid_points, tol, mode, cli.output),
        Command::ResolventCheck {
            source,
            alpha,
            beta,
            z,
            input,
            quad_order,
            mesh,
            swapped,
        } => run_resolvent_check(
            &source, alpha, beta, z, &input, quad_order, mesh, swapped, cli.output,
        ),
        Command::HsCompare {
            source,
            alpha,
            beta,
            z,
            count,
            nodes,
        } => run_hs_compare(&source, alpha, beta, z, count, nodes, mode, cli.output),
        Command::RelationDemo {
            kind,
            n,
            seed,
            trials,
        } => run_relation_demo(kind, n, seed, trials, cli.output),
        Command::Builtin {
            name,
            length,
            cells,
            rate,
            seed,
            out,
        } => run_builtin(&name, length, cells, rate, seed, out, cli.output),
    }
}

fn print_defaults(format: Format) {
    let table = defaults::table();
    match format {
        Format::Table => {
            for (key, value) in table {
                println!("{key} = {value}");
            }
        }
        Format::Json => {
            let fields: Vec<(&str, String)> =
                table.iter().map(|(k, v)| (*k, json_str(v))).collect();
            println!("{}", json_document("show-defaults", fields));
        }
        Format::Csv => {
            println!("key,value");
            for (key, value) in table {
                println!("{}", csv_line(&[key.to_string(), value]));
            }
        }
    }
}

fn run_validate(source: &FieldSource, format: Format) -> Result<()> {
    let field = source.resolve()?;
    let total = field.total_length();
    let trace = field.integral_trace(total)?;
    match format {
        Format::Table => {
            println!("valid Hamiltonian");
            println!("cells          {}", field.cells().len());
            println!("total length   {}", total);
            println!("trace integral {}", trace);
        }
        Format::Json => {
            println!(
                "{}",
                json_document(
                    "validate",
                    vec![
                        ("valid", "true".into()),
                        ("cells", field.cells().len().to_string()),
                        ("total_length", fmt_f64(total)),
                        ("trace_integral", fmt_f64(trace)),
                    ],
                )
            );
        }
        Format::Csv => {
            println!("valid,cells,total_length,trace_integral");
            println!(
                "{}",
                csv_line(&[
                    "true".into(),
                    field.cells().len().to_string(),
                    fmt_f64(total),
                    fmt_f64(trace),
                ])
            );
        }
    }
    Ok(())
}

/// CSV rows of a field: one line per cell.
fn field_csv(field: &HamiltonianField) -> String {
    let mut out = String::from("cell,length,h11,h12,h22\n");
    for (k, cell) in field.cells().iter().enumerate() {
        out.push_str(&csv_line(&[
            k.to_string(),
            fmt_f64(cell.length),
            fmt_f64(cell.matrix.h11),
            fmt_f64(cell.matrix.h12),
            fmt_f64(cell.matrix.h22),
        ]));
        out.push('\n');
    }
    out
}

fn run_normalize(source: &FieldSource, out: Option<PathBuf>, format: Format) -> Result<()> {
    let field = source.resolve()?;
    let normalized = trace_normalize(&field)?;
    let dropped = json_array(normalized.dropped_cells.iter().map(|k| k.to_string()));
    if let Some(path) = &out {
        normalized.field.save(path)?;
    }
    match format {
        Format::Table => {
            println!("cells          {}", normalized.field.cells().len());
            println!("total length   {}", normalized.field.total_length());
            println!("dropped cells  {dropped}");
            match &out {
                Some(path) => println!("written to     {}", path.display()),
                None => print!("{}", normalized.field.to_json()),
            }
        }
        Format::Json => {
            let mut fields = vec![
                ("cells", normalized.field.cells().len().to_string()),
                ("total_length", fmt_f64(normalized.field.total_length())),
                ("dropped_cells", dropped),
            ];
            if out.is_none() {
                fields.push(("field", normalized.field.to_json().trim().to_string()));
            }
            println!("{}", json_document("normalize", fields));
        }
        Format::Csv => print!("{}", field_csv(&normalized.field)),
    }
    Ok(())
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::LimitPoint => "limit-point",
        Verdict::LimitCircle => "limit-circle",
        Verdict::Undetermined => "undetermined",
    }
}

fn run_classify(
    source: &FieldSource,
    z: Complex64,
    schedule: &[f64],
    rel_tol: f64,
    format: Format,
) -> Result<()> {
    let report = match (&source.file, &source.builtin) {
        (Some(path), None) => {
            let field = HamiltonianField::load(path)?;
            classify(&Truncated(&field), z, schedule, rel_tol)?
        }
        (None, Some(name)) => {
            let family = BuiltinFamily {
                name: name.clone(),
                params: source.params(),
            };
            classify(&family, z, schedule, rel_tol)?
        }
        _ => {
            return Err(Error::InvalidParams(
                "provide a Hamiltonian with --file or --builtin".into(),
            ))
        }
    };
    match format {
        Format::Table => {
            println!("verdict        {}", verdict_name(report.verdict));
            println!("defect         {}", report.defect_estimate);
            println!("zero-norm      {}", report.zero_norm_classes);
            println!("    N        |u|^2            |v|^2");
            for ((n, u), v) in schedule.iter().zip(&report.norms_u).zip(&report.norms_v) {
                println!("{n:8} {u:16.9e} {v:16.9e}");
            }
        }
        Format::Json => {
            println!(
                "{}",
                json_document(
                    "classify",
                    vec![
                        ("z", json_complex(z)),
                        ("verdict", json_str(verdict_name(report.verdict))),
                        ("defect", report.defect_estimate.to_string()),
                        ("zero_norm_classes", report.zero_norm_classes.to_string()),
                        (
                            "schedule",
                            json_array(schedule.iter().map(|n| fmt_f64(*n))),
                        ),
                        (
                            "norms_u",
                            json_array(report.norms_u.iter().map(|x| fmt_f64(*x))),
                        ),
                        (
                            "norms_v",
                            json_array(report.norms_v.iter().map(|x| fmt_f64(*x))),
                        ),
                    ],
                )
            );
        }
        Format::Csv => {
            println!("n,norm_u,norm_v");
            for ((n, u), v) in schedule.iter().zip(&report.norms_u).zip(&report.norms_v) {
                println!("{}", csv_line(&[fmt_f64(*n), fmt_f64(*u), fmt_f64(*v)]));
            }
        }
    }
    Ok(())
}

fn run_mfunc(
    source: &FieldSource,
    z: Complex64,
    beta: BoundaryAngle,
    at: Option<f64>,
    format: Format,
) -> Result<()> {
    let field = source.resolve()?;
    let n = at.unwrap_or_else(|| field.total_length());
    let m = m_function(&field, z, beta, n)?;
    match format {
        Format::Table => {
            println!("m({}{:+}i) at N={n}", z.re, z.im);
            println!("{:.15e} {:+.15e}i", m.re, m.im);
        }
        Format::Json => {
            println!(
                "{}",
                json_document(
                    "mfunc",
                    vec![
                        ("z", json_complex(z)),
                        ("n", fmt_f64(n)),
                        ("beta", fmt_f64(beta.angle())),
                        ("m", json_complex(m)),
                    ],
                )
            );
        }
        Format::Csv => {
            println!("re,im");
            println!("{}", csv_line(&[fmt_f64(m.re), fmt_f64(m.im)]));
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_eigs(
    source: &FieldSource,
    alpha: BoundaryAngle,
    beta: BoundaryAngle,
    window: &[f64],
    grid_points: usize,
    tol: f64,
    mode: ExecMode,
    format: Format,
) -> Result<()> {
    let field = source.resolve()?;
    let bvp = SelfAdjointBvp::over_full_field(field, alpha, beta)?;
    let list = eigenvalues_in(&bvp, (window[0], window[1]), grid_points, tol, mode)?;
    match format {
        Format::Table => {
            println!("{} eigenvalues in [{}, {}]", list.len(), window[0], window[1]);
            for (value, residual) in list.values.iter().zip(&list.residuals) {
                println!("{value:22.15e}   residual {residual:9.2e}");
            }
        }
        Format::Json => {
            println!(
                "{}",
                json_document(
                    "eigs",
                    vec![
                        ("window", json_array(window.iter().map(|x| fmt_f64(*x)))),
                        (
                            "eigenvalues",
                            json_array(list.values.iter().map(|x| fmt_f64(*x))),
                        ),
                        (
                            "residuals",
                            json_array(list.residuals.iter().map(|x| fmt_f64(*x))),
                        ),
                    ],
                )
            );
        }
        Format::Csv => {
            println!("index,eigenvalue,residual");
            for (k, (value, residual)) in list.values.iter().zip(&list.residuals).enumerate() {
                println!(
                    "{}",
                    csv_line(&[k.to_string(), fmt_f64(*value), fmt_f64(*residual)])
                );
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_resolvent_check(
    source: &FieldSource,
    alpha: BoundaryAngle,
    beta: BoundaryAngle,
    z: Complex64,
    input: &[f64],
    quad_order: usize,
    mesh: usize,
    swapped: bool,
    format: Format,
) -> Result<()> {
    let field = source.resolve()?;
    let bvp = SelfAdjointBvp::over_full_field(field, alpha, beta)?;
    let kernel = if swapped {
        GreenKernel::swapped_for_negative_control(&bvp, z)?
    } else {
        GreenKernel::new(&bvp, z)?
    };
    let constant = Vec2c::from_real(input[0], input[1]);
    let h = move |_: f64| constant;
    let rule = GaussLegendre::new(quad_order);
    let y = apply_resolvent(&kernel, &h, &rule)?;
    let residual = resolvent_residual(&kernel, &h, &y, mesh)?;

    let total = bvp.interval_end();
    let samples: Vec<(f64, Vec2c)> = (1..=5)
        .map(|k| {
            let x = total * k as f64 / 6.0;
            y.eval(x).map(|v| (x, v))
        })
        .collect::<Result<_>>()?;
    match format {
        Format::Table => {
            println!("residual {residual:.3e}{}", if swapped { "  (branches swapped)" } else { "" });
            println!("       x                y1                              y2");
            for (x, v) in &samples {
                println!(
                    "{x:8.4}   {:13.6e} {:+13.6e}i   {:13.6e} {:+13.6e}i",
                    v.0[0].re, v.0[0].im, v.0[1].re, v.0[1].im
                );
            }
        }
        Format::Json => {
            println!(
                "{}",
                json_document(
                    "resolvent-check",
                    vec![
                        ("z", json_complex(z)),
                        ("swapped", swapped.to_string()),
                        ("residual", fmt_f64(residual)),
                        (
                            "samples",
                            json_array(samples.iter().map(|(x, v)| {
                                format!(
                                    "{{\"x\":{},\"y1\":{},\"y2\":{}}}",
                                    fmt_f64(*x),
                                    json_complex(v.0[0]),
                                    json_complex(v.0[1])
                                )
                            })),
                        ),
                    ],
                )
            );
        }
        Format::Csv => {
            println!("x,y1_re,y1_im,y2_re,y2_im");
            for (x, v) in &samples {
                println!(
                    "{}",
                    csv_line(&[
                        fmt_f64(*x),
                        fmt_f64(v.0[0].re),
                        fmt_f64(v.0[0].im),
                        fmt_f64(v.0[1].re),
                        fmt_f64(v.0[1].im),
                    ])
                );
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_hs_compare(
    source: &FieldSource,
    alpha: BoundaryAngle,
    beta: BoundaryAngle,
    z: f64,
    count: usize,
    nodes: usize,
    mode: ExecMode,
    format: Format,
) -> Result<()> {
    let field = source.resolve()?;
    let bvp = SelfAdjointBvp::over_full_field(field, alpha, beta)?;
    let rule = GaussLegendre::new(nodes);
    let hs = hs_matrix(&bvp, z, &rule, mode)?;
    let pairs = hs_eigen_compare(&bvp, z, count, &rule, mode)?;
    match format {
        Format::Table => {
            println!("hermitian deviation {:9.2e}", hs.hermitian_deviation);
            println!("      eigenvalue                 mu          1/(E-z)       gap");
            for p in &pairs {
                println!(
                    "{:18.12} {:18.12} {:16.12} {:9.2e}",
                    p.eigenvalue,
                    p.mu,
                    1.0 / (p.eigenvalue - z),
                    p.gap
                );
            }
        }
        Format::Json => {
            println!(
                "{}",
                json_document(
                    "hs-compare",
                    vec![
                        ("z", fmt_f64(z)),
                        ("nodes", nodes.to_string()),
                        ("hermitian_deviation", fmt_f64(hs.hermitian_deviation)),
                        (
                            "pairs",
                            json_array(pairs.iter().map(|p| {
                                format!(
                                    "{{\"eigenvalue\":{},\"mu\":{},\"gap\":{}}}",
                                    fmt_f64(p.eigenvalue),
                                    fmt_f64(p.mu),
                                    fmt_f64(p.gap)
                                )
                            })),
                        ),
                    ],
                )
            );
        }
        Format::Csv => {
            println!("eigenvalue,mu,gap");
            for p in &pairs {
                println!(
                    "{}",
                    csv_line(&[fmt_f64(p.eigenvalue), fmt_f64(p.mu), fmt_f64(p.gap)])
                );
            }
        }
    }
    Ok(())
}

fn demo_relation(kind: RelationKind, n: usize, seed: u64) -> Result<LinearRelation> {
    match kind {
        RelationKind::Span => {
            let e1 = DVector::from_iterator(2, [Complex64::ONE, Complex64::ZERO]);
            let e2 = DVector::from_iterator(2, [Complex64::ZERO, Complex64::ONE]);
            LinearRelation::new(2, &[(e1, e2)])
        }
        RelationKind::Multivalued => {
            let zero = DVector::zeros(1);
            let one = DVector::from_iterator(1, [Complex64::ONE]);
            LinearRelation::new(1, &[(zero, one)])
        }
        RelationKind::Selfadjoint => Ok(random_selfadjoint(n, seed)),
        RelationKind::Symmetric => Ok(random_symmetric(n, seed)),
    }
}

fn run_relation_demo(
    kind: RelationKind,
    n: usize,
    seed: u64,
    trials: usize,
    format: Format,
) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParams("ambient dimension must be positive".into()));
    }
    let relation = demo_relation(kind, n, seed)?;
    let report = analyze(&relation);
    let extension = if report.symmetric {
        Some(extension_dimension_check(&relation, trials, seed)?)
    } else {
        None
    };
    match format {
        Format::Table => {
            println!("ambient        C^{}", report.ambient_dim);
            println!("dim            {}", report.dim);
            println!("adjoint dim    {}", report.adjoint_dim);
            println!("symmetric      {}", report.symmetric);
            println!("self-adjoint   {}", report.selfadjoint);
            println!("defect at +i   {}", report.defect_upper);
            println!("defect at -i   {}", report.defect_lower);
            if report.selfadjoint {
                println!("spectrum       {:?}", report.spectrum);
                println!("spectral kern  {:?}", report.spectral_kernel);
            }
            if let Some(ext) = &extension {
                println!(
                    "extensions     {} found, defect {}, dimension law {}",
                    ext.extensions.len(),
                    ext.defect,
                    if ext.dimension_law_holds { "holds" } else { "VIOLATED" }
                );
            }
        }
        Format::Json => {
            let mut fields = vec![
                ("ambient_dim", report.ambient_dim.to_string()),
                ("dim", report.dim.to_string()),
                ("adjoint_dim", report.adjoint_dim.to_string()),
                ("symmetric", report.symmetric.to_string()),
                ("selfadjoint", report.selfadjoint.to_string()),
                ("defect_upper", report.defect_upper.to_string()),
                ("defect_lower", report.defect_lower.to_string()),
                (
                    "spectrum",
                    json_array(report.spectrum.iter().map(|x| fmt_f64(*x))),
                ),
                (
                    "spectral_kernel",
                    json_array(report.spectral_kernel.iter().map(|x| fmt_f64(*x))),
                ),
            ];
            if let Some(ext) = &extension {
                fields.push(("extension_defect", ext.defect.to_string()));
                fields.push(("extensions_found", ext.extensions.len().to_string()));
                fields.push(("dimension_law_holds", ext.dimension_law_holds.to_string()));
            }
            println!("{}", json_document("relation-demo", fields));
        }
        Format::Csv => {
            println!("property,value");
            println!("ambient_dim,{}", report.ambient_dim);
            println!("dim,{}", report.dim);
            println!("adjoint_dim,{}", report.adjoint_dim);
            println!("symmetric,{}", report.symmetric);
            println!("selfadjoint,{}", report.selfadjoint);
            println!("defect_upper,{}", report.defect_upper);
            println!("defect_lower,{}", report.defect_lower);
            if let Some(ext) = &extension {
                println!("extensions_found,{}", ext.extensions.len());
                println!("dimension_law_holds,{}", ext.dimension_law_holds);
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_builtin(
    name: &str,
    length: Option<f64>,
    cells: Option<usize>,
    rate: Option<f64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Format,
) -> Result<()> {
    let field = builtin(
        name,
        BuiltinParams {
            length,
            cells,
            rate,
            seed,
        },
    )?;
    if let Some(path) = &out {
        field.save(path)?;
        println!("written to {}", path.display());
        return Ok(());
    }
    match format {
        Format::Table => print!("{}", field.to_json()),
        Format::Json => {
            println!(
                "{}",
                json_document(
                    "builtin",
                    vec![
                        ("name", json_str(name)),
                        ("cells", field.cells().len().to_string()),
                        ("total_length", fmt_f64(field.total_length())),
                        ("field", field.to_json().trim().to_string()),
                    ],
                )
            );
        }
        Format::Csv => print!("{}", field_csv(&field)),
    }
    Ok(())
}
