//! Command-line front end. [`run`] parses arguments, dispatches to the library
//! and returns the process exit status: 0 on success, 1 on a domain error or a
//! failed check, 2 on a usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::freealg::{concat, shuffle, truncate, Series};
use crate::geoint::{self, RigidBody, Trajectory};
use crate::lbseries::{self, Method};
use crate::matpostlie::{self, CheckConfig, MatrixReport, ProjectionKind, DEFAULT_SEED};
use crate::postlie::{self, AxiomReport};
use crate::ptrees::{self, DegreeCap};

/// Environment variable overriding the maximum accepted degree.
pub const MAX_DEGREE_ENV: &str = "POSTLIE_MAX_DEGREE";

const DEFAULT_DEGREE: usize = 4;

#[derive(Debug, Parser)]
#[command(name = "postlie", version, about = "Post-Lie algebra and Lie-Butcher series toolkit")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProductKind {
    Concat,
    Shuffle,
    Gl,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExpKind {
    Concat,
    Gl,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum What {
    Trees,
    Forests,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Target {
    Free,
    Matrix,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    LieEuler,
    LieMidpoint,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::LieEuler => Method::LieEuler,
            MethodArg::LieMidpoint => Method::LieMidpoint,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Lu,
    Qr,
}

impl From<KindArg> for ProjectionKind {
    fn from(k: KindArg) -> ProjectionKind {
        match k {
            KindArg::Lu => ProjectionKind::Lu,
            KindArg::Qr => ProjectionKind::Qr,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Problem {
    RigidBody,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Post-Lie product A ▷ B of two forests.
    Graft {
        left: String,
        right: String,
        /// Truncate the result at this degree.
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Concatenation, shuffle or Grossman-Larson product.
    Product {
        #[arg(long, value_enum)]
        kind: ProductKind,
        /// Forest in bracket notation, or path to a series JSON file.
        left: String,
        right: String,
        #[arg(long, default_value_t = DEFAULT_DEGREE)]
        degree: usize,
    },
    /// Concatenation or Grossman-Larson exponential (default input h·[]).
    Exp {
        #[arg(long, value_enum)]
        kind: ExpKind,
        #[arg(long, default_value_t = DEFAULT_DEGREE)]
        degree: usize,
        series: Option<PathBuf>,
    },
    /// Post-Lie Magnus expansion χ(h·[]).
    Magnus {
        #[arg(long, default_value_t = DEFAULT_DEGREE)]
        degree: usize,
    },
    /// Order of a method's LB-series against the exact flow.
    Order {
        #[arg(long, value_enum)]
        method: MethodArg,
        #[arg(long, default_value_t = DEFAULT_DEGREE)]
        degree: usize,
    },
    /// List planar trees or ordered forests of one degree.
    Enumerate {
        #[arg(long, value_enum)]
        what: What,
        #[arg(long, default_value_t = DEFAULT_DEGREE)]
        degree: usize,
        #[arg(long)]
        count_only: bool,
    },
    /// Check post-Lie axioms in the free algebra or on matrices.
    Axioms {
        #[arg(long, value_enum)]
        target: Target,
        #[arg(long, default_value_t = DEFAULT_DEGREE)]
        degree: usize,
        #[arg(long, value_enum, default_value_t = KindArg::Lu)]
        kind: KindArg,
        #[arg(long = "n", default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Integrate a test problem on the sphere.
    Integrate {
        #[arg(long, value_enum)]
        method: MethodArg,
        #[arg(long = "h")]
        h: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = Problem::RigidBody)]
        problem: Problem,
        /// Also write the trajectory as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Empirical convergence order on the sphere.
    Converge {
        #[arg(long, value_enum)]
        method: MethodArg,
        #[arg(long, value_delimiter = ',', required = true)]
        hs: Vec<f64>,
        #[arg(long = "T", default_value_t = 1.0)]
        horizon: f64,
    },
}

/// Parses `args` (including the program name) and executes the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let cap = match degree_cap() {
        Ok(cap) => cap,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    match execute(&cli, cap) {
        Ok(Outcome { text, pass }) => {
            if out.write_all(text.as_bytes()).is_err() {
                return 1;
            }
            if pass {
                0
            } else {
                let _ = writeln!(err, "error: check failed");
                1
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn degree_cap() -> std::result::Result<DegreeCap, String> {
    match std::env::var(MAX_DEGREE_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(DegreeCap)
            .map_err(|_| format!("{MAX_DEGREE_ENV} must be a non-negative integer, got {v:?}")),
        Err(_) => Ok(DegreeCap::default()),
    }
}

struct Outcome {
    text: String,
    pass: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, pass: true }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("serializable");
    s.push('\n');
    s
}

fn series_out(s: &Series, format: Format) -> String {
    match format {
        Format::Json => format!("{}\n", s.to_json_string()),
        Format::Text => format!("{s}\n"),
    }
}

fn operand(text: &str) -> Result<Series> {
    let t = text.trim();
    if t.starts_with('[') || t == "1" {
        return Series::parse_forest(t);
    }
    let body = std::fs::read_to_string(t)
        .map_err(|e| Error::InvalidArgument(format!("cannot read series file {t}: {e}")))?;
    Series::from_json_str(&body)
}

fn execute(cli: &Cli, cap: DegreeCap) -> Result<Outcome> {
    let format = cli.format;
    match &cli.command {
        Command::Graft { left, right, degree } => {
            let a = Series::parse_forest(left)?;
            let b = Series::parse_forest(right)?;
            let mut r = postlie::triangleright(&a, &b);
            if let Some(n) = degree {
                cap.check(*n)?;
                r = truncate(&r, *n);
            }
            Ok(Outcome::ok(series_out(&r, format)))
        }
        Command::Product { kind, left, right, degree } => {
            cap.check(*degree)?;
            let a = truncate(&operand(left)?, *degree);
            let b = truncate(&operand(right)?, *degree);
            let r = match kind {
                ProductKind::Concat => concat(&a, &b),
                ProductKind::Shuffle => shuffle(&a, &b),
                ProductKind::Gl => postlie::gl_product(&a, &b),
            };
            Ok(Outcome::ok(series_out(&truncate(&r, *degree), format)))
        }
        Command::Exp { kind, degree, series } => {
            cap.check(*degree)?;
            let a = match series {
                Some(path) => operand(&path.to_string_lossy())?,
                None => Series::leaf(),
            };
            let r = match kind {
                ExpKind::Concat => lbseries::exp_concat(&a, *degree)?,
                ExpKind::Gl => lbseries::exp_gl(&a, *degree)?,
            };
            Ok(Outcome::ok(series_out(&r, format)))
        }
        Command::Magnus { degree } => {
            cap.check(*degree)?;
            let chi = lbseries::magnus_chi(&Series::leaf(), *degree)?;
            Ok(Outcome::ok(series_out(&chi, format)))
        }
        Command::Order { method, degree } => {
            cap.check(*degree)?;
            let report = lbseries::order_report((*method).into(), *degree)?;
            Ok(Outcome::ok(match format {
                Format::Json => to_json(&report),
                Format::Text => {
                    let mut s = format!("method: {}\norder: {}\n", report.method, report.order);
                    if let Some(d) = &report.first_defect {
                        s += &format!("first defect: {} (method {}, exact {})\n", d.forest, d.lhs, d.rhs);
                    }
                    s
                }
            }))
        }
        Command::Enumerate { what, degree, count_only } => {
            let items: Vec<String> = match what {
                What::Trees => ptrees::enumerate_trees(*degree, cap)?.iter().map(|t| t.to_string()).collect(),
                What::Forests => ptrees::enumerate_forests(*degree, cap)?.iter().map(|f| f.to_string()).collect(),
            };
            Ok(Outcome::ok(match (format, count_only) {
                (Format::Json, true) => to_json(&json!({ "degree": degree, "count": items.len() })),
                (Format::Json, false) => to_json(&json!({ "degree": degree, "count": items.len(), "items": items })),
                (Format::Text, true) => format!("{}\n", items.len()),
                (Format::Text, false) => items.iter().map(|s| format!("{s}\n")).collect(),
            }))
        }
        Command::Axioms { target: Target::Free, degree, .. } => {
            let report = postlie::check_postlie_axioms(*degree, cap)?;
            Ok(Outcome {
                pass: report.pass,
                text: match format {
                    Format::Json => to_json(&report),
                    Format::Text => axiom_text(&report),
                },
            })
        }
        Command::Axioms {
            target: Target::Matrix,
            kind,
            n,
            samples,
            tol,
            seed,
            ..
        } => {
            let cfg = CheckConfig {
                n: *n,
                samples: *samples,
                tol: *tol,
                seed: *seed,
            };
            let kind = ProjectionKind::from(*kind);
            let mut reports = vec![matpostlie::check_projection_identity(kind, &cfg)?];
            reports.extend(matpostlie::check_matrix_postlie_axioms(kind, &cfg)?);
            Ok(Outcome {
                pass: reports.iter().all(|r| r.pass),
                text: match format {
                    Format::Json => to_json(&reports),
                    Format::Text => reports.iter().map(matrix_text).collect(),
                },
            })
        }
        Command::Integrate {
            method,
            h,
            steps,
            problem: Problem::RigidBody,
            csv,
        } => {
            let method = Method::from(*method);
            let traj = geoint::integrate(method, &RigidBody::default(), &geoint::rigid_body_start(), *h, *steps)?;
            if let Some(path) = csv {
                let file = std::fs::File::create(path)
                    .map_err(|e| Error::InvalidArgument(format!("cannot create {}: {e}", path.display())))?;
                traj.write_csv(std::io::BufWriter::new(file))?;
            }
            Ok(Outcome::ok(trajectory_out(method, *h, &traj, format)))
        }
        Command::Converge { method, hs, horizon } => {
            let report = geoint::convergence_order(
                &RigidBody::default(),
                &geoint::rigid_body_start(),
                *horizon,
                (*method).into(),
                hs,
            )?;
            Ok(Outcome::ok(match format {
                Format::Json => to_json(&report),
                Format::Text => {
                    let mut s = format!("method: {}\n", report.method);
                    for (h, e) in report.h.iter().zip(&report.errors) {
                        s += &format!("h = {h:e}  error = {e:e}\n");
                    }
                    match report.slope {
                        Some(p) => s += &format!("slope: {p:.4}\n"),
                        None => s += "slope: undefined (all errors zero)\n",
                    }
                    s += &format!("max norm defect: {:e}\n", report.max_norm_defect);
                    s
                }
            }))
        }
    }
}

fn axiom_text(r: &AxiomReport) -> String {
    let mut s = format!(
        "degree <= {}: {} triples, {}\n",
        r.degree,
        r.triples,
        if r.pass { "pass" } else { "FAIL" }
    );
    if let Some(f) = &r.failure {
        s += &format!("{} fails at x = {}, y = {}, z = {}: residual {}\n", f.identity, f.x, f.y, f.z, f.residual);
    }
    s
}

fn matrix_text(r: &MatrixReport) -> String {
    format!(
        "{} {} n={} samples={} max_residual={:e} {}\n",
        r.kind.name(),
        r.check,
        r.n,
        r.samples,
        r.max_residual,
        if r.pass { "pass" } else { "FAIL" }
    )
}

fn trajectory_out(method: Method, h: f64, traj: &Trajectory, format: Format) -> String {
    match format {
        Format::Json => {
            let points: Vec<[f64; 3]> = traj.points.iter().map(|p| (*p.vector()).into()).collect();
            to_json(&json!({
                "method": method.name(),
                "h": h,
                "times": traj.times,
                "points": points,
                "max_norm_defect": traj.max_norm_defect(),
            }))
        }
        Format::Text => {
            let mut s = String::new();
            for (t, p) in traj.times.iter().zip(&traj.points) {
                let y = p.vector();
                s += &format!("{t:.6} {:.15} {:.15} {:.15}\n", y.x, y.y, y.z);
            }
            s += &format!("max norm defect: {:e}\n", traj.max_norm_defect());
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("postlie").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn magnus_json_has_minus_half() {
        let (code, out, _) = call(&["magnus", "--degree", "3", "--format", "json"]);
        assert_eq!(code, 0);
        assert!(out.contains(r#"{"forest":"[[]]","coeff":"-1/2"}"#), "{out}");
    }

    #[test]
    fn midpoint_order_json() {
        let (code, out, _) = call(&["order", "--method", "lie-midpoint", "--degree", "4", "--format", "json"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["order"], 2);
        assert!(v["first_defect"].is_object());
    }

    #[test]
    fn enumerate_count() {
        let (code, out, _) = call(&["enumerate", "--what", "trees", "--degree", "4", "--count-only"]);
        assert_eq!(code, 0);
        assert_eq!(out, "5\n");
    }

    #[test]
    fn graft_example() {
        let (code, out, _) = call(&["graft", "[[]]", "[[][]]"]);
        assert_eq!(code, 0);
        assert_eq!(out, "[[[[]]] []] + [[[]] [] []] + [[] [[[]]]]\n");
    }

    #[test]
    fn parse_error_is_domain_error() {
        let (code, _, err) = call(&["graft", "[[]", "[]"]);
        assert_eq!(code, 1);
        assert!(err.contains("byte"), "{err}");
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(call(&["frobnicate"]).0, 2);
        assert_eq!(call(&["magnus", "--bogus"]).0, 2);
        assert_eq!(call(&["order", "--method", "rk4"]).0, 2);
    }

    #[test]
    fn degree_cap_applies() {
        let (code, _, err) = call(&["magnus", "--degree", "40"]);
        assert_eq!(code, 1);
        assert!(err.contains("exceeds"), "{err}");
    }

    #[test]
    fn product_reads_series_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.json");
        std::fs::write(&path, r#"{"trunc":null,"terms":[{"forest":"[]","coeff":"2"}]}"#).unwrap();
        let (code, out, _) = call(&["product", "--kind", "shuffle", path.to_str().unwrap(), "[]"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.starts_with("4*([] [])"), "{out}");
    }

    #[test]
    fn matrix_axioms_pass_and_output_is_deterministic() {
        let args = ["axioms", "--target", "matrix", "--kind", "qr", "--samples", "10", "--format", "json"];
        let (code, a, _) = call(&args);
        assert_eq!(code, 0, "{a}");
        assert_eq!(a, call(&args).1);
    }

    #[test]
    fn integrate_writes_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let (code, _, err) = call(&[
            "integrate", "--method", "lie-euler", "--h", "0.1", "--steps", "3", "--csv", path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
        let csv = std::fs::read_to_string(&path).unwrap();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.starts_with("t,y1,y2,y3,norm_defect"));
    }

    #[test]
    fn converge_rejects_bad_steps() {
        let (code, _, _) = call(&["converge", "--method", "lie-euler", "--hs", "0.1,0.2,0.05"]);
        assert_eq!(code, 1);
    }
}
