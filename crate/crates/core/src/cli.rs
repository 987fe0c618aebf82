//! Command-line front end. Every subcommand maps onto one library operation
//! and writes a CSV or JSON artifact.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::acceptance;
use crate::dispersion::{h1_direct, h1_polynomial, hb_direct, hb_frank, phi_hat};
use crate::error::Error;
use crate::fieldquad::MomentOptions;
use crate::measure::{fmt17, AtomicMeasure};
use crate::periodic::{h1_periodic_decompose, rb_hat_atoms, regular_limit, regular_part_eps};
use crate::scatdata::{AtomicSpectrum, BumpProfile, NormMode, ScatteringDensity};
use crate::schrlimit::{
    coeff_alpha, hbper_freq_atoms, hbper_time_atoms, rescaled_cutoff, rescaled_rk_atoms, sobolev_distance,
    SobolevParams,
};
use crate::specfun::omega;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fracdisp", version, about = "Fractional dispersion of Helmholtz fields")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Write the artifact here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// The fractional constant omega_b
    Omega {
        #[arg(long)]
        b: f64,
    },
    /// h_1(y) from the closed-form quadratic (or the direct moment with --direct)
    H1 {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "0,2,5", value_parser = parse_range, allow_hyphen_values = true)]
        y: Range,
        #[arg(long)]
        direct: bool,
    },
    /// h_b(y) by the Frank route or the direct moment
    Hb {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        b: f64,
        #[arg(long, default_value = "0,2,5", value_parser = parse_range, allow_hyphen_values = true)]
        y: Range,
        #[arg(long, value_enum, default_value_t = Method::Frank)]
        method: Method,
    },
    /// Real part of the transform Phi_b(tau)
    Phi {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        b: f64,
        #[arg(long, default_value = "0.01,0.25,25", value_parser = parse_range, allow_hyphen_values = true)]
        tau: Range,
    },
    /// b = 1 decomposition of mollified comb data
    Decompose {
        #[command(flatten)]
        atoms: AtomArgs,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value = "1", value_parser = parse_range, allow_hyphen_values = true)]
        y: Range,
    },
    /// Regular part R_b at width eps and its eps -> 0 limit, or its Fourier atoms with --hat
    Regular {
        #[command(flatten)]
        atoms: AtomArgs,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value = "0,1,11", value_parser = parse_range, allow_hyphen_values = true)]
        y: Range,
        #[arg(long)]
        hat: bool,
    },
    /// Time atoms of h_{b,per}(2t) at rationals p/q
    Talbot {
        #[arg(long)]
        b: f64,
        #[arg(long)]
        qmax: u64,
        #[arg(long, default_value = "0,1", value_parser = parse_window, allow_hyphen_values = true)]
        window: (f64, f64),
    },
    /// The divisor-sum coefficient alpha_b(r)
    Alpha {
        #[arg(long)]
        b: f64,
        #[arg(long, allow_hyphen_values = true)]
        r: i64,
    },
    /// Sobolev distance between the rescaled R_k atoms and the frequency atoms of h_{b,per}
    LimitK {
        #[arg(long)]
        b: f64,
        #[arg(long)]
        k: f64,
        /// cutoff exponent: N = floor(k^(1/2 - eps))
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = -0.75, allow_hyphen_values = true)]
        s: f64,
        /// frequency cutoff of the target, default 2N^2
        #[arg(long)]
        rmax: Option<u64>,
        /// also write the rescaled atoms to this file
        #[arg(long)]
        atoms_out: Option<PathBuf>,
    },
    /// Run the acceptance suite
    Verify {
        /// comma-separated criterion numbers, default all
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Frank,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DataKind {
    Bump,
    Chirp,
    Parabola,
    Indicator,
}

/// A named smooth density and its parameters.
#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    #[arg(long, value_enum, default_value_t = DataKind::Bump)]
    pub data: DataKind,
    #[arg(long, default_value_t = 2.0)]
    pub k: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub center: f64,
    /// half width of the bump or indicator
    #[arg(long, default_value_t = 1.0)]
    pub width: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub chirp: f64,
}

impl DataArgs {
    pub fn density(&self) -> crate::Result<ScatteringDensity> {
        match self.data {
            DataKind::Bump => ScatteringDensity::bump(self.k, self.center, self.width),
            DataKind::Chirp => ScatteringDensity::chirped_bump(self.k, self.center, self.width, self.chirp),
            DataKind::Parabola => ScatteringDensity::parabola(self.k),
            DataKind::Indicator => {
                ScatteringDensity::indicator(self.k, self.center - self.width, self.center + self.width)
            }
        }
    }
}

/// Comb data: a JSON spectrum file, or F(n) = 1 for |n| <= nmax (default all |n| < k).
#[derive(Debug, Clone, Args)]
pub struct AtomArgs {
    #[arg(long, default_value_t = 2.5)]
    pub k: f64,
    #[arg(long)]
    pub nmax: Option<i64>,
    #[arg(long, conflicts_with_all = ["nmax"])]
    pub atoms: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Range {
    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        let h = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n)
            .map(|i| if i + 1 == self.n { self.hi } else { self.lo + i as f64 * h })
            .collect()
    }
}

fn parse_floats(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect()
}

/// "v" or "lo,hi,n"
fn parse_range(s: &str) -> Result<Range, String> {
    let v = parse_floats(s)?;
    let r = match v[..] {
        [x] => Range { lo: x, hi: x, n: 1 },
        [lo, hi, n] if n >= 1.0 && n.fract() == 0.0 => Range { lo, hi, n: n as usize },
        _ => return Err("expected a value or lo,hi,n with integer n >= 1".into()),
    };
    if !(r.lo.is_finite() && r.hi.is_finite()) || r.hi < r.lo {
        return Err("range needs finite lo <= hi".into());
    }
    Ok(r)
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    match parse_floats(s)?[..] {
        [lo, hi] if lo.is_finite() && hi.is_finite() && lo < hi => Ok((lo, hi)),
        _ => Err("expected lo,hi with lo < hi".into()),
    }
}

enum CliError {
    Lib(Error),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonConvergence { .. } | Error::TailTooLarge { .. } => EXIT_FAILED,
        _ => EXIT_VALIDATION,
    }
}

enum Artifact {
    Scalar { name: &'static str, value: f64 },
    Table { columns: Vec<&'static str>, rows: Vec<Vec<f64>>, meta: Map<String, Value> },
    Measure(AtomicMeasure),
    Text(String),
    Report { text: String, json: Value, pass: bool },
}

impl Artifact {
    fn render(&self, command: &str, format: Format, to_file: bool) -> String {
        match (self, format) {
            (Artifact::Scalar { value, .. }, Format::Csv) if !to_file => format!("{}\n", fmt17(*value)),
            (Artifact::Scalar { name, value }, Format::Csv) => format!("{name}\n{}\n", fmt17(*value)),
            (Artifact::Scalar { name, value }, Format::Json) => {
                pretty(&json!({ "schema": 1, "command": command, *name: value }))
            }
            (Artifact::Table { columns, rows, .. }, Format::Csv) => {
                let mut s = columns.join(",");
                s.push('\n');
                for row in rows {
                    s.push_str(&row.iter().map(|&v| fmt17(v)).collect::<Vec<_>>().join(","));
                    s.push('\n');
                }
                s
            }
            (Artifact::Table { columns, rows, meta }, Format::Json) => {
                let mut m = Map::new();
                m.insert("schema".into(), json!(1));
                m.insert("command".into(), json!(command));
                m.extend(meta.clone());
                m.insert("columns".into(), json!(columns));
                m.insert("rows".into(), json!(rows));
                pretty(&Value::Object(m))
            }
            (Artifact::Measure(mu), Format::Csv) => mu.to_csv(),
            (Artifact::Measure(mu), Format::Json) => mu.to_json() + "\n",
            (Artifact::Text(text), _) | (Artifact::Report { text, .. }, Format::Csv) => text.clone(),
            (Artifact::Report { json, .. }, Format::Json) => pretty(json),
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json value serializes") + "\n"
}

fn comb(a: &AtomArgs) -> Result<AtomicSpectrum, CliError> {
    if let Some(path) = &a.atoms {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        return Ok(AtomicSpectrum::from_json(&text)?);
    }
    Ok(match a.nmax {
        Some(n) => AtomicSpectrum::truncated_comb(a.k, n)?,
        None => AtomicSpectrum::comb(a.k)?,
    })
}

fn table(columns: Vec<&'static str>, rows: Vec<Vec<f64>>) -> Artifact {
    Artifact::Table { columns, rows, meta: Map::new() }
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn dispatch(cfg: &RunConfig) -> Result<Artifact, CliError> {
    Ok(match &cfg.command {
        Command::Omega { b } => Artifact::Scalar { name: "omega", value: omega(*b)? },
        Command::Alpha { b, r } => Artifact::Scalar { name: "alpha", value: coeff_alpha(*r, *b)? },
        Command::H1 { data, y, direct } => {
            let f = data.density()?;
            if *direct {
                let opts = MomentOptions::default();
                let rows = y
                    .points()
                    .into_iter()
                    .map(|y| Ok(vec![y, h1_direct(&f, y, &opts)?.value]))
                    .collect::<crate::Result<Vec<_>>>()?;
                table(vec!["y", "h1"], rows)
            } else {
                let p = h1_polynomial(&f)?;
                let rows = y.points().into_iter().map(|y| vec![y, p.eval(y)]).collect();
                let mut meta = Map::new();
                meta.insert("coefficients".into(), json!({ "c0": p.c0, "c1": p.c1, "c2": p.c2 }));
                Artifact::Table { columns: vec!["y", "h1"], rows, meta }
            }
        }
        Command::Hb { data, b, y, method } => {
            let f = data.density()?;
            let opts = MomentOptions::default();
            let rows = y
                .points()
                .into_iter()
                .map(|y| {
                    let v = match method {
                        Method::Frank => hb_frank(&f, *b, y)?,
                        Method::Direct => hb_direct(&f, *b, y, &opts)?.value,
                    };
                    Ok(vec![y, v])
                })
                .collect::<crate::Result<Vec<_>>>()?;
            table(vec!["y", "hb"], rows)
        }
        Command::Phi { data, b, tau } => {
            let f = data.density()?;
            let rows = tau
                .points()
                .into_iter()
                .map(|t| Ok(vec![t, phi_hat(&f, *b, t)?]))
                .collect::<crate::Result<Vec<_>>>()?;
            table(vec!["tau", "phi"], rows)
        }
        Command::Decompose { atoms, eps, y } => {
            let a = comb(atoms)?;
            let bump = BumpProfile::standard(NormMode::UnitL2);
            let rows = y
                .points()
                .into_iter()
                .map(|y| {
                    let d = h1_periodic_decompose(&a, &bump, *eps, y)?;
                    Ok(vec![y, d.total, d.singular_value, d.stable_value, d.remainder()])
                })
                .collect::<crate::Result<Vec<_>>>()?;
            table(vec!["y", "total", "singular", "stable", "remainder"], rows)
        }
        Command::Regular { atoms, b, eps, y, hat } => {
            let a = comb(atoms)?;
            if *hat {
                Artifact::Measure(rb_hat_atoms(&a, *b)?)
            } else {
                let bump = BumpProfile::standard(NormMode::UnitIntegral);
                let mut rows = Vec::new();
                for y in y.points() {
                    let lim = regular_limit(&a, *b, y)?;
                    rows.push(match eps {
                        Some(e) => vec![y, regular_part_eps(&a, &bump, *e, *b, y)?, lim],
                        None => vec![y, lim],
                    });
                }
                let columns = if eps.is_some() { vec!["y", "regular_eps", "regular_limit"] } else { vec!["y", "regular_limit"] };
                table(columns, rows)
            }
        }
        Command::Talbot { b, qmax, window } => {
            let set = hbper_time_atoms(*b, *qmax, *window)?;
            let rows = set.atoms.iter().map(|a| vec![a.t(), a.weight, a.p as f64, a.q as f64]).collect();
            let mut meta = Map::new();
            meta.insert("b".into(), json!(b));
            meta.insert("q_max".into(), json!(qmax));
            meta.insert("window".into(), json!([window.0, window.1]));
            match cfg.format {
                // plot-ready two-column table
                Format::Csv => Artifact::Text(set.to_csv()),
                Format::Json => Artifact::Table { columns: vec!["t", "weight", "p", "q"], rows, meta },
            }
        }
        Command::LimitK { b, k, eps, s, rmax, atoms_out } => {
            let params = SobolevParams::new(*s)?;
            let mu = rescaled_rk_atoms(*b, *k, *eps)?;
            let n = rescaled_cutoff(*k, *eps);
            let r_max = rmax.unwrap_or((2 * n * n) as u64);
            let target = hbper_freq_atoms(*b, r_max)?;
            let d = sobolev_distance(&mu, &target, params)?;
            if let Some(path) = atoms_out {
                let text = match cfg.format {
                    Format::Csv => mu.to_csv(),
                    Format::Json => mu.to_json() + "\n",
                };
                write_file(path, &text)?;
            }
            table(
                vec!["k", "cutoff", "r_max", "atoms", "distance"],
                vec![vec![*k, n as f64, r_max as f64, mu.len() as f64, d]],
            )
        }
        Command::Verify { only } => {
            let ids: Vec<u32> = if only.is_empty() { acceptance::ALL.to_vec() } else { only.clone() };
            let results: Vec<_> = ids.iter().map(|&id| acceptance::run(id)).collect();
            let pass = results.iter().all(|r| r.pass);
            let mut text = String::new();
            for r in &results {
                text.push_str(&r.line());
                text.push('\n');
            }
            text.push_str(&format!(
                "{} of {} criteria passed\n",
                results.iter().filter(|r| r.pass).count(),
                results.len()
            ));
            let json = json!({
                "schema": 1,
                "command": "verify",
                "pass": pass,
                "criteria": results.iter().map(|r| json!({
                    "id": r.id, "name": r.name, "pass": r.pass, "detail": r.detail,
                    "seconds": r.elapsed.as_secs_f64(),
                })).collect::<Vec<_>>(),
            });
            Artifact::Report { text, json, pass }
        }
    })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Omega { .. } => "omega",
        Command::H1 { .. } => "h1",
        Command::Hb { .. } => "hb",
        Command::Phi { .. } => "phi",
        Command::Decompose { .. } => "decompose",
        Command::Regular { .. } => "regular",
        Command::Talbot { .. } => "talbot",
        Command::Alpha { .. } => "alpha",
        Command::LimitK { .. } => "limit-k",
        Command::Verify { .. } => "verify",
    }
}

/// Runs one configuration, writing the artifact to `--out` or `stdout`.
/// Returns the process exit code.
pub fn run(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = dispatch(cfg).and_then(|art| {
        let text = art.render(command_name(&cfg.command), cfg.format, cfg.out.is_some());
        match &cfg.out {
            Some(path) => write_file(path, &text)?,
            None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?,
        }
        Ok(match art {
            Artifact::Report { pass: false, .. } => EXIT_FAILED,
            _ => EXIT_OK,
        })
    });
    match result {
        Ok(code) => code,
        Err(CliError::Lib(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
        Err(CliError::Io(msg)) => {
            let _ = writeln!(stderr, "I/O error: {msg}");
            EXIT_IO
        }
    }
}

/// Parses arguments and runs. Usage errors exit 2, help and version exit 0.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match RunConfig::try_parse_from(args) {
        Ok(cfg) => run(&cfg, stdout, stderr),
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(rendered.as_bytes()) } else { stderr.write_all(rendered.as_bytes()) };
            if code == 0 {
                EXIT_OK
            } else {
                EXIT_VALIDATION
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with_args(std::iter::once("fracdisp").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn omega_and_alpha_print_bare_values() {
        let (code, out, _) = call(&["omega", "--b", "0.5"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("0.05066059182"), "{out}");
        let (code, out, _) = call(&["alpha", "--b", "0.5", "--r", "3"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("2.2222222"), "{out}");
    }

    #[test]
    fn validation_errors_exit_two() {
        let (code, _, err) = call(&["omega", "--b", "1.5"]);
        assert_eq!(code, 2);
        assert!(err.contains("invalid parameter"), "{err}");
        assert_eq!(call(&["omega"]).0, 2);
        assert_eq!(call(&["talbot", "--b", "0.25", "--qmax", "4", "--window", "1,0"]).0, 2);
    }

    #[test]
    fn unwritable_output_exits_three() {
        let (code, _, err) = call(&["omega", "--b", "0.5", "--out", "/nonexistent-dir/x.csv"]);
        assert_eq!(code, 3, "{err}");
    }

    #[test]
    fn talbot_table_has_header_and_zero_atom() {
        let (code, out, _) = call(&["talbot", "--b", "0.25", "--qmax", "40", "--window", "0,1"]);
        assert_eq!(code, 0);
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some("t,weight"));
        assert!(out.lines().any(|l| l.starts_with("0,-0.1067521")), "{}", &out[..200]);
    }

    #[test]
    fn ranges_parse() {
        assert_eq!(parse_range("1").unwrap().points(), vec![1.0]);
        assert_eq!(parse_range("0,1,3").unwrap().points(), vec![0.0, 0.5, 1.0]);
        assert!(parse_range("0,1").is_err());
        assert!(parse_range("1,0,3").is_err());
    }
}
