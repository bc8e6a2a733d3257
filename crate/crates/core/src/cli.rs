//! The `shiftfunk` command line.
//!
//! Every command writes one document: JSON (canonical) or CSV. It goes to
//! `--out`, else to `$SHIFTFUNK_OUT_DIR/<command>.<ext>` when that variable
//! is set, else to stdout. `verify` also prints one pass/fail line per check.
//! Exit status: 0 success, 1 failed verification, 2 usage or input error.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::harmonics::{DegreeFilter, SphereFunction};
use crate::injectivity::{
    classify_shift_family, max_gap, noninjective_shifts, shift_root_table, spectral_forward, spectral_invert,
    InducedCoefficients, DEFAULT_INVERSION_FLOOR, DEFAULT_ZERO_TOL,
};
use crate::multipliers::MultiplierTable;
use crate::verify::{self, VerifyOptions};

pub const OUT_DIR_ENV: &str = "SHIFTFUNK_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "shiftfunk", version, about = "Shifted Funk transforms: multipliers, Jacobi zeros and injectivity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Output file; defaults to $SHIFTFUNK_OUT_DIR/<command>.<ext>, else stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct GeomArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
}

impl GeomArgs {
    fn geometry(&self, j_max: usize) -> Result<Geometry> {
        Geometry::with_cache(self.n, self.k, j_max)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Multiplier table m̂(j) for even j <= J_max.
    Multipliers {
        #[command(flatten)]
        geom: GeomArgs,
        #[arg(long, default_value_t = 32)]
        jmax: usize,
        /// Shifted multiplier at this τ ∈ [0, 1].
        #[arg(long, conflicts_with_all = ["funk", "alpha"])]
        tau: Option<f64>,
        /// Closed-form Funk-Radon multiplier.
        #[arg(long)]
        funk: bool,
        /// Cosine-transform multiplier of order α > 0.
        #[arg(long, conflicts_with = "funk")]
        alpha: Option<f64>,
    },
    /// Non-injective shifts t = ½ arccos x over the Jacobi roots, with the max gap.
    Zeros {
        #[command(flatten)]
        geom: GeomArgs,
        #[arg(long, default_value_t = 32)]
        jmax: usize,
    },
    /// Injectivity report for one shift or a family (repeat --t).
    Injectivity {
        #[command(flatten)]
        geom: GeomArgs,
        /// Shift in radians, or a multiple of pi such as "pi/6" or "3pi/8".
        #[arg(long = "t", required = true, num_args = 1)]
        shifts: Vec<String>,
        #[arg(long, default_value_t = 64)]
        jmax: usize,
        #[arg(long, default_value_t = DEFAULT_ZERO_TOL)]
        zero_tol: f64,
    },
    /// (t, j, margin) rows over a uniform t-grid, for plotting.
    Scan {
        #[command(flatten)]
        geom: GeomArgs,
        #[arg(long, default_value_t = 32)]
        jmax: usize,
        #[arg(long, default_value_t = 0.01)]
        t_min: f64,
        #[arg(long, default_value_t = FRAC_PI_2 - 0.01)]
        t_max: f64,
        #[arg(long, default_value_t = 200)]
        steps: usize,
    },
    /// Spectral R_t: SphereFunction JSON in, induced coefficients out (or back with --invert).
    Transform {
        #[command(flatten)]
        geom: GeomArgs,
        /// Input document; a SphereFunction, or induced coefficients with --invert.
        #[arg(long, conflicts_with = "random")]
        input: Option<PathBuf>,
        /// Use a random function of this band limit instead of --input.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long = "t")]
        shift: Option<String>,
        #[arg(long, conflicts_with = "shift")]
        tau: Option<f64>,
        #[arg(long)]
        invert: bool,
        #[arg(long, default_value_t = DEFAULT_INVERSION_FLOOR)]
        floor: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the invariant suite; one named PASS/FAIL line per check.
    Verify {
        #[command(flatten)]
        geom: GeomArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        #[arg(long, default_value_t = 4)]
        band: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Multipliers { .. } => "multipliers",
            Command::Zeros { .. } => "zeros",
            Command::Injectivity { .. } => "injectivity",
            Command::Scan { .. } => "scan",
            Command::Transform { .. } => "transform",
            Command::Verify { .. } => "verify",
        }
    }
}

/// A parsed shift and the precision its literal carries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftInput {
    pub t: f64,
    /// Half a unit in the last written decimal place; 0 for multiples of π.
    pub half_ulp: f64,
}

/// Parse `0.61548`, `pi`, `pi/6`, `3pi/8`, `3*pi/8` or `2/3*pi`.
pub fn parse_shift(s: &str) -> Result<ShiftInput> {
    let text: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    let bad = || Error::domain(format!("cannot parse shift {s:?}; use radians or a form like pi/6"));
    if let Some(pos) = text.find("pi") {
        let (head, tail) = (&text[..pos], &text[pos + 2..]);
        let mut factor = match head.trim_end_matches('*') {
            "" => 1.0,
            h => fraction(h).ok_or_else(bad)?,
        };
        if let Some(den) = tail.strip_prefix('/') {
            factor /= den.parse::<f64>().map_err(|_| bad())?;
        } else if !tail.is_empty() {
            return Err(bad());
        }
        return Ok(ShiftInput { t: factor * PI, half_ulp: 0.0 });
    }
    let t = text.parse::<f64>().map_err(|_| bad())?;
    let (mantissa, exponent) = match text.split_once('e') {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
        None => (text.as_str(), 0),
    };
    // An integer literal is taken as exact.
    let half_ulp = match mantissa.split_once('.') {
        Some((_, frac)) => 0.5 * 10f64.powi(exponent - frac.len() as i32),
        None => 0.0,
    };
    Ok(ShiftInput { t, half_ulp })
}

fn fraction(s: &str) -> Option<f64> {
    match s.split_once('/') {
        Some((a, b)) => Some(a.parse::<f64>().ok()? / b.parse::<f64>().ok()?),
        None => s.parse().ok(),
    }
}

/// `zero_tol` widened to the uncertainty of `cos 2t` implied by the literal.
pub fn effective_zero_tol(zero_tol: f64, shift: &ShiftInput) -> f64 {
    zero_tol.max(2.0 * (2.0 * shift.t).sin().abs() * shift.half_ulp)
}

/// Parse arguments and run; the binary's whole `main`.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Run a parsed command; `Ok(false)` means the verification suite failed.
pub fn run(cli: &Cli) -> Result<bool> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Error::domain("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::domain(e.to_string()))?
            .install(|| execute(cli))
    } else {
        execute(cli)
    }
}

struct Document {
    json: Value,
    csv: String,
}

fn execute(cli: &Cli) -> Result<bool> {
    let (doc, passed) = match &cli.command {
        Command::Multipliers { geom, jmax, tau, funk, alpha } => (multipliers(geom, *jmax, *tau, *funk, *alpha)?, true),
        Command::Zeros { geom, jmax } => (zeros(geom, *jmax)?, true),
        Command::Injectivity { geom, shifts, jmax, zero_tol } => (injectivity(geom, shifts, *jmax, *zero_tol)?, true),
        Command::Scan { geom, jmax, t_min, t_max, steps } => (scan(geom, *jmax, *t_min, *t_max, *steps)?, true),
        Command::Transform { geom, input, random, shift, tau, invert, floor, seed } => {
            (transform(geom, input.as_deref(), *random, shift.as_deref(), *tau, *invert, *floor, *seed)?, true)
        }
        Command::Verify { geom, seed, samples, band } => verify_cmd(geom, *seed, *samples, *band)?,
    };
    emit(cli, doc)?;
    Ok(passed)
}

fn stamp(mut json: Value, command: &str) -> Value {
    if let Some(obj) = json.as_object_mut() {
        obj.insert("command".into(), json!(command));
        obj.insert("generated_at".into(), json!(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)));
    }
    json
}

fn emit(cli: &Cli, doc: Document) -> Result<()> {
    let command = cli.command.name();
    let ext = match cli.format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    let body = match cli.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&stamp(doc.json, command))?;
            s.push('\n');
            s
        }
        Format::Csv => doc.csv,
    };
    let path = cli.out.clone().or_else(|| std::env::var_os(OUT_DIR_ENV).map(|d| Path::new(&d).join(format!("{command}.{ext}"))));
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(&p, body)?;
        }
        None if matches!(cli.command, Command::Verify { .. }) && cli.format == Format::Json => {}
        None => std::io::stdout().lock().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn check_j_max(j_max: usize) -> Result<()> {
    if j_max % 2 == 1 {
        Err(Error::OddDegree { what: "J_max", j: j_max })
    } else {
        Ok(())
    }
}

fn multipliers(g: &GeomArgs, j_max: usize, tau: Option<f64>, funk: bool, alpha: Option<f64>) -> Result<Document> {
    check_j_max(j_max)?;
    let geom = g.geometry(j_max)?;
    let table = match (tau, funk, alpha) {
        (_, true, _) => MultiplierTable::funk(&geom, j_max)?,
        (_, _, Some(a)) => MultiplierTable::cosine(&geom, j_max, a)?,
        (Some(t), _, _) => MultiplierTable::shifted(&geom, j_max, t)?,
        _ => return Err(Error::domain("multipliers needs one of --tau, --funk or --alpha")),
    };
    Ok(Document { json: table.to_json(), csv: table.to_csv() })
}

fn zeros(g: &GeomArgs, j_max: usize) -> Result<Document> {
    check_j_max(j_max)?;
    let geom = g.geometry(j_max)?;
    let shifts = noninjective_shifts(&geom, j_max)?;
    let mut csv = String::from("t,j,cos_2t\n");
    let rows: Vec<Value> = shifts
        .iter()
        .map(|&(t, j)| {
            let x = (2.0 * t).cos();
            csv.push_str(&format!("{t},{j},{x}\n"));
            json!({ "t": t, "j": j, "cos_2t": x })
        })
        .collect();
    let json = json!({
        "geom": geom,
        "j_max": j_max,
        "count": shifts.len(),
        "max_gap": max_gap(&shifts),
        "shifts": rows,
    });
    Ok(Document { json, csv })
}

fn injectivity(g: &GeomArgs, shifts: &[String], j_max: usize, zero_tol: f64) -> Result<Document> {
    check_j_max(j_max)?;
    if !(zero_tol > 0.0 && zero_tol.is_finite()) {
        return Err(Error::domain(format!("--zero-tol must be positive, got {zero_tol}")));
    }
    let geom = g.geometry(j_max)?;
    let inputs = shifts.iter().map(|s| parse_shift(s)).collect::<Result<Vec<_>>>()?;
    let effective = inputs.iter().map(|s| effective_zero_tol(zero_tol, s)).fold(zero_tol, f64::max);
    let ts: Vec<f64> = inputs.iter().map(|s| s.t).collect();
    let report = classify_shift_family(&geom, &ts, j_max, effective)?;
    let mut csv = String::from("j,shift,t,margin,nearest_root\n");
    for row in &report.margins {
        for (i, t) in ts.iter().enumerate() {
            csv.push_str(&format!("{},{i},{t},{},{}\n", row.j, row.margins[i], row.nearest_roots[i]));
        }
    }
    let mut json = report.to_json();
    json["inputs"] = json!(shifts);
    json["zero_tol_requested"] = json!(zero_tol);
    Ok(Document { json, csv })
}

fn scan(g: &GeomArgs, j_max: usize, t_min: f64, t_max: f64, steps: usize) -> Result<Document> {
    check_j_max(j_max)?;
    if !(0.0 < t_min && t_min <= t_max && t_max < FRAC_PI_2) || steps == 0 {
        return Err(Error::domain("scan needs 0 < t_min <= t_max < pi/2 and steps >= 1"));
    }
    let geom = g.geometry(j_max)?;
    let table = shift_root_table(&geom, j_max)?;
    let mut csv = String::from("t,j,margin\n");
    let mut rows = Vec::new();
    for i in 0..steps {
        let t = if steps == 1 { t_min } else { t_min + (t_max - t_min) * i as f64 / (steps - 1) as f64 };
        let x = (2.0 * t).cos();
        for (j, set) in &table {
            let margin = set.roots.iter().map(|r| (r - x).abs()).fold(f64::INFINITY, f64::min);
            csv.push_str(&format!("{t},{j},{margin}\n"));
            rows.push(json!([t, j, margin]));
        }
    }
    Ok(Document { json: json!({ "geom": geom, "j_max": j_max, "columns": ["t", "j", "margin"], "rows": rows }), csv })
}

fn coefficient_csv(coeffs: &std::collections::BTreeMap<crate::harmonics::BisphericalIndex, f64>) -> String {
    let mut csv = String::from("r,mu,s,nu,m,value\n");
    for (i, v) in coeffs {
        csv.push_str(&format!("{},{},{},{},{},{v}\n", i.r, i.mu, i.s, i.nu, i.m));
    }
    csv
}

fn read_json(path: &Path) -> Result<Value> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

#[allow(clippy::too_many_arguments)]
fn transform(
    g: &GeomArgs,
    input: Option<&Path>,
    random: Option<usize>,
    shift: Option<&str>,
    tau: Option<f64>,
    invert: bool,
    floor: f64,
    seed: u64,
) -> Result<Document> {
    let tau = match (shift, tau) {
        (Some(s), _) => {
            let t = parse_shift(s)?.t;
            if !(t > 0.0 && t < FRAC_PI_2) {
                return Err(Error::domain(format!("shift t = {t} must lie in (0, pi/2)")));
            }
            Some(t.sin())
        }
        (None, tau) => tau,
    };
    let geom = g.geometry(0)?;
    if invert {
        let path = input.ok_or_else(|| Error::domain("--invert needs --input with induced coefficients"))?;
        let mut coeffs = InducedCoefficients::from_json(read_json(path)?)?;
        check_same_geometry(&geom, &coeffs.geom)?;
        // The document's own τ unless overridden.
        if let Some(tau) = tau {
            coeffs.tau = tau;
        }
        let tau = coeffs.tau;
        let inv = spectral_invert(&coeffs, floor)?;
        let json = json!({ "function": inv.function.to_json(), "blocked": inv.blocked, "tau": tau, "floor": floor });
        return Ok(Document { csv: coefficient_csv(inv.function.coeffs()), json });
    }
    let f = match (input, random) {
        (Some(path), _) => SphereFunction::from_json(read_json(path)?)?,
        (None, Some(band)) => {
            SphereFunction::random(geom.clone(), band, DegreeFilter::All, &mut ChaCha8Rng::seed_from_u64(seed))
        }
        (None, None) => return Err(Error::domain("transform needs --input or --random")),
    };
    check_same_geometry(&geom, f.geom())?;
    let tau = tau.ok_or_else(|| Error::domain("transform needs --t or --tau"))?;
    let fwd = spectral_forward(&f, tau)?;
    Ok(Document { csv: coefficient_csv(&fwd.coeffs), json: json!({ "input": f.to_json(), "transform": fwd.to_json() }) })
}

fn check_same_geometry(expected: &Geometry, found: &Geometry) -> Result<()> {
    if (expected.n(), expected.k()) == (found.n(), found.k()) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "input is for (n, k) = ({}, {}) but --n {} --k {} was given",
            found.n(),
            found.k(),
            expected.n(),
            expected.k()
        )))
    }
}

fn verify_cmd(g: &GeomArgs, seed: u64, samples: usize, band: usize) -> Result<(Document, bool)> {
    if samples < 100 {
        return Err(Error::domain("--samples must be at least 100"));
    }
    let geom = g.geometry(0)?;
    let opts = VerifyOptions { seed, samples, band };
    let report = verify::run_with(&geom, &opts, |c| println!("{}", c.line()))?;
    println!("{} checks, {} failed", report.checks.len(), report.failures());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "status", "detail"]).map_err(|e| Error::domain(e.to_string()))?;
    for c in &report.checks {
        w.serialize((c.name, c.status, &c.detail)).map_err(|e| Error::domain(e.to_string()))?;
    }
    let csv = String::from_utf8(w.into_inner().map_err(|e| Error::domain(e.to_string()))?).expect("csv is utf-8");
    let passed = report.passed();
    let mut json = serde_json::to_value(&report)?;
    json["passed"] = json!(passed);
    Ok((Document { json, csv }, passed))
}
