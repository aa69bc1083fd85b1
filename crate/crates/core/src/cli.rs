//! Command-line front end: argument parsing, dispatch and report rendering.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::covering::{self, CoverageOptions, DEFAULT_BITMAP_CAP};
use crate::error::{Error, Result};
use crate::gf::{Elem, FieldCtx, FieldSpec};
use crate::laurent::{loneliness_direct, Witness};
use crate::poly::{count_irreducible, enumerate_monic, CoeffList, MonicSet, Poly};
use crate::sunflower::{max_sunflower_with, SunflowerOptions, DEFAULT_NODE_CAP};
use crate::verify::{self, MinCoverOptions, SuiteParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "ffrunner",
    version,
    about = "Lonely-runner computations over F_q[T]: coverage, minimum covers, sunflowers and verification suites"
)]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Loneliness exponent of a set of speeds, with a witness.
    Loneliness {
        #[command(flatten)]
        speeds: SpeedArgs,
        #[arg(long, value_enum, default_value_t = Method::Covering)]
        method: Method,
    },
    /// Whether the level-k kernels of the speeds cover F_q^{D+k}.
    Covers {
        #[command(flatten)]
        speeds: SpeedArgs,
        #[arg(long)]
        k: usize,
        /// Ambient degree bound; defaults to the largest degree.
        #[arg(long = "D")]
        d: Option<usize>,
    },
    /// Least number of monic speeds of degree at most D that cover at level k.
    MinCover {
        #[arg(long)]
        k: usize,
        #[arg(long = "max-deg", alias = "D")]
        max_deg: usize,
        /// Skip the irreducible-factor pruning rule.
        #[arg(long)]
        no_factor_pruning: bool,
    },
    /// Maximum codimension-4 sunflower at level 2 with its classification.
    Sunflowers {
        #[command(flatten)]
        speeds: SpeedArgs,
        #[arg(long = "D")]
        d: Option<usize>,
    },
    /// The extremal family: all monic polynomials of degree at most k.
    GenExtremal {
        #[arg(long)]
        k: usize,
    },
    /// Count (and optionally list) monic irreducibles of degree m.
    Irreducibles {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        list: bool,
    },
    /// Run a named verification suite.
    Verify {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(verify::SUITES))]
        suite: String,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Least level at which the kernels stop covering.
    Covering,
    /// Enumeration of truncated Laurent tails.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Field size (a prime power).
    #[arg(long, global = true, conflicts_with = "p")]
    pub q: Option<u32>,
    /// Field characteristic.
    #[arg(long, global = true)]
    pub p: Option<u32>,
    /// Extension degree, used with --p.
    #[arg(long, global = true, default_value_t = 1)]
    pub e: u32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Largest bitmap, in bits, for coverage.
    #[arg(long, global = true, env = "FFRUNNER_BITMAP_CAP", default_value_t = DEFAULT_BITMAP_CAP as u64,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub bitmap_cap: u64,
    /// Search-node budget for sunflower and minimum-cover searches.
    #[arg(long, global = true, env = "FFRUNNER_NODE_CAP", value_parser = clap::value_parser!(u64).range(1..))]
    pub node_cap: Option<u64>,
    /// Wall-clock budget for the minimum-cover search.
    #[arg(long, global = true, env = "FFRUNNER_TIME_LIMIT_MS", value_parser = clap::value_parser!(u64).range(1..))]
    pub time_limit_ms: Option<u64>,
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: u64,
}

#[derive(Debug, Args)]
pub struct SpeedArgs {
    /// Coefficient lists `[1],[0,1]` or human forms `1,T,T+1`.
    #[arg(
        long,
        conflicts_with = "speeds_file",
        required_unless_present = "speeds_file"
    )]
    pub speeds: Option<String>,
    /// JSON array of coefficient lists.
    #[arg(long)]
    pub speeds_file: Option<PathBuf>,
}

/// `loneliness` report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LonelinessReport {
    pub q: u32,
    pub exponent: usize,
    pub witness: Witness,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub modulus: Option<Vec<u32>>,
}

/// `gen-extremal` report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtremalReport {
    pub q: u32,
    pub k: usize,
    pub size: usize,
    pub family: Vec<Vec<Elem>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub modulus: Option<Vec<u32>>,
}

/// `irreducibles` report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrreduciblesReport {
    pub q: u32,
    pub m: u32,
    pub count: u128,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub polynomials: Option<Vec<Vec<Elem>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub modulus: Option<Vec<u32>>,
}

/// Wraps a library report with the field modulus for extension fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WithModulus<T> {
    #[serde(flatten)]
    pub report: T,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub modulus: Option<Vec<u32>>,
}

/// Parses argv, runs the command and writes the report to `out`. Returns the
/// process exit code. Diagnostics go to standard error.
pub fn run<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match CliConfig::try_parse_from(argv) {
        Ok(cfg) => cfg,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cfg) {
        Ok((report, code)) => {
            let text = match cfg.common.format {
                Format::Json => serde_json::to_string_pretty(&report).expect("reports serialize"),
                Format::Table => render_table(&report),
            };
            if writeln!(out, "{text}").is_err() {
                return EXIT_USAGE;
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_cap() {
                EXIT_CAP
            } else {
                EXIT_USAGE
            }
        }
    }
}

fn field_of(common: &CommonArgs) -> Result<FieldCtx> {
    let spec = match (common.q, common.p) {
        (Some(q), None) => FieldSpec::Size { q },
        (None, Some(p)) => FieldSpec::PowerOfPrime { p, e: common.e },
        _ => {
            return Err(Error::InvalidInput(
                "give the field as --q or as --p with --e".into(),
            ))
        }
    };
    spec.resolve()
}

fn modulus(field: &FieldCtx) -> Option<Vec<u32>> {
    field.modulus().map(<[u32]>::to_vec)
}

/// Parses the `--speeds` text. A leading `[` selects coefficient lists, either
/// bare (`[1],[0,1]`) or wrapped in an outer array; otherwise the text is a
/// comma-separated list of human forms.
pub fn parse_speeds(field: &FieldCtx, text: &str) -> Result<Vec<Poly>> {
    let trimmed = text.trim();
    if trimmed.starts_with('[') {
        let lists: Vec<CoeffList> = serde_json::from_str(trimmed)
            .or_else(|_| serde_json::from_str(&format!("[{trimmed}]")))
            .map_err(|e| Error::Parse(format!("coefficient lists: {e}")))?;
        lists.into_iter().map(|c| c.into_poly(field)).collect()
    } else {
        trimmed.split(',').map(|s| Poly::parse(field, s)).collect()
    }
}

fn read_speeds(field: &FieldCtx, args: &SpeedArgs) -> Result<Vec<Poly>> {
    match (&args.speeds, &args.speeds_file) {
        (Some(text), _) => parse_speeds(field, text),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
            let lists: Vec<CoeffList> = serde_json::from_str(&text)
                .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            lists.into_iter().map(|c| c.into_poly(field)).collect()
        }
        (None, None) => Err(Error::InvalidInput("give --speeds or --speeds-file".into())),
    }
}

fn to_value<T: Serialize>(report: &T) -> Value {
    serde_json::to_value(report).expect("reports serialize")
}

fn coeff_lists(polys: &[Poly]) -> Vec<Vec<Elem>> {
    polys.iter().map(|f| f.coeffs().to_vec()).collect()
}

fn execute(cfg: &CliConfig) -> Result<(Value, i32)> {
    let c = &cfg.common;
    let threads = c.threads as usize;
    let coverage = CoverageOptions {
        bitmap_cap: c.bitmap_cap as u128,
        threads,
    };
    match &cfg.command {
        Command::Loneliness { speeds, method } => {
            let field = field_of(c)?;
            let speeds = read_speeds(&field, speeds)?;
            let l = match method {
                Method::Covering => covering::loneliness_with(&speeds, None, &coverage)?,
                Method::Direct => loneliness_direct(&speeds)?,
            };
            let report = LonelinessReport {
                q: field.q(),
                exponent: l.exponent,
                witness: l.witness_json(),
                modulus: modulus(&field),
            };
            Ok((to_value(&report), EXIT_OK))
        }
        Command::Covers { speeds, k, d } => {
            let field = field_of(c)?;
            let speeds = read_speeds(&field, speeds)?;
            let r = covering::covers_with(&speeds, *k, *d, &coverage)?;
            Ok((to_value(&r), EXIT_OK))
        }
        Command::MinCover {
            k,
            max_deg,
            no_factor_pruning,
        } => {
            let field = field_of(c)?;
            let opts = MinCoverOptions {
                node_cap: c.node_cap.unwrap_or(MinCoverOptions::default().node_cap),
                time_limit: c.time_limit_ms.map(Duration::from_millis),
                bitmap_cap: c.bitmap_cap as u128,
                factor_pruning: !no_factor_pruning,
                ..Default::default()
            };
            let r = verify::min_cover_with(&field, *k, *max_deg, &opts)?.result;
            let code = if r.exact { EXIT_OK } else { EXIT_CAP };
            let report = WithModulus {
                report: r,
                modulus: modulus(&field),
            };
            Ok((to_value(&report), code))
        }
        Command::Sunflowers { speeds, d } => {
            let field = field_of(c)?;
            let speeds = read_speeds(&field, speeds)?;
            let opts = SunflowerOptions {
                threads,
                node_cap: c.node_cap.unwrap_or(DEFAULT_NODE_CAP),
            };
            let report = max_sunflower_with(&speeds, *d, &opts)?.map(|s| WithModulus {
                report: s.to_json(),
                modulus: modulus(&field),
            });
            Ok((to_value(&report), EXIT_OK))
        }
        Command::GenExtremal { k } => {
            let field = field_of(c)?;
            let family = verify::gen_extremal(&field, *k)?;
            let report = ExtremalReport {
                q: field.q(),
                k: *k,
                size: family.len(),
                family: coeff_lists(&family),
                modulus: modulus(&field),
            };
            Ok((to_value(&report), EXIT_OK))
        }
        Command::Irreducibles { m, list } => {
            let field = field_of(c)?;
            if *m == 0 {
                return Err(Error::InvalidInput("degree m must be at least 1".into()));
            }
            let polynomials = if *list {
                Some(coeff_lists(&enumerate_monic(
                    &field,
                    MonicSet::Irreducible(*m as usize),
                )?))
            } else {
                None
            };
            let report = IrreduciblesReport {
                q: field.q(),
                m: *m,
                count: count_irreducible(*m, field.q() as u64)?,
                polynomials,
                modulus: modulus(&field),
            };
            Ok((to_value(&report), EXIT_OK))
        }
        Command::Verify {
            suite,
            trials,
            seed,
        } => {
            let mut min_cover = MinCoverOptions {
                time_limit: c.time_limit_ms.map(Duration::from_millis),
                bitmap_cap: c.bitmap_cap as u128,
                ..Default::default()
            };
            if let Some(n) = c.node_cap {
                min_cover.node_cap = n;
            }
            let params = SuiteParams {
                trials: *trials,
                seed: *seed,
                threads,
                min_cover,
            };
            let r = verify::run_suite(suite, &params)?;
            let code = if r.pass { EXIT_OK } else { EXIT_CHECK_FAILED };
            Ok((to_value(&r), code))
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

/// Two-column `key  value` rendering; arrays of objects become indented
/// rows of their fields.
pub fn render_table(report: &Value) -> String {
    let Value::Object(map) = report else {
        return cell(report);
    };
    let width = map.keys().map(String::len).max().unwrap_or(0);
    let mut lines = Vec::new();
    for (key, value) in map {
        match value {
            Value::Array(items) if items.iter().all(Value::is_object) && !items.is_empty() => {
                lines.push(key.clone());
                for item in items {
                    let fields: Vec<String> = item
                        .as_object()
                        .expect("checked above")
                        .values()
                        .map(cell)
                        .collect();
                    lines.push(format!("  {}", fields.join("  ")));
                }
            }
            _ => lines.push(format!("{key:width$}  {}", cell(value))),
        }
    }
    lines.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String) {
        let mut out = Vec::new();
        let code = run(
            std::iter::once("ffrunner").chain(args.iter().copied()),
            &mut out,
        );
        (code, String::from_utf8(out).unwrap())
    }

    fn json(args: &[&str]) -> (i32, Value) {
        let (code, text) = run_capture(args);
        (code, serde_json::from_str(&text).unwrap())
    }

    #[test]
    fn speeds_in_both_forms() {
        let f2 = FieldCtx::of_size(2).unwrap();
        let a = parse_speeds(&f2, "[1],[0,1],[1,1]").unwrap();
        let b = parse_speeds(&f2, "[[1],[0,1],[1,1]]").unwrap();
        let c = parse_speeds(&f2, "1, T, T+1").unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert!(parse_speeds(&f2, "[2]").is_err());
        assert!(parse_speeds(&f2, "T^").is_err());
    }

    #[test]
    fn loneliness_command() {
        let (code, v) = json(&["loneliness", "--q", "2", "--speeds", "[1],[0,1],[1,1]"]);
        assert_eq!(code, 0);
        assert_eq!(v["exponent"], 2);
        assert_eq!(v["witness"]["exponent"], -2);
        let (_, d) = json(&[
            "loneliness",
            "--q",
            "2",
            "--speeds",
            "1,T,T+1",
            "--method",
            "direct",
        ]);
        assert_eq!(d["exponent"], 2);
    }

    #[test]
    fn covers_command() {
        let (code, v) = json(&["covers", "--q", "2", "--k", "1", "--speeds", "[1]"]);
        assert_eq!(code, 0);
        assert_eq!(v["covers_all"], false);
        assert_eq!(v["witness"], serde_json::json!([1]));
    }

    #[test]
    fn min_cover_command() {
        let (code, v) = json(&["min-cover", "--q", "2", "--k", "2", "--max-deg", "2"]);
        assert_eq!(code, 0);
        assert_eq!(v["min_size"], 7);
        let (code, v) = json(&[
            "min-cover",
            "--q",
            "3",
            "--k",
            "2",
            "--max-deg",
            "2",
            "--node-cap",
            "3",
        ]);
        assert_eq!(code, EXIT_CAP);
        assert_eq!(v["exact"], false);
    }

    #[test]
    fn extension_fields_echo_modulus() {
        let (_, v) = json(&["gen-extremal", "--p", "2", "--e", "2", "--k", "1"]);
        assert_eq!(v["modulus"], serde_json::json!([1, 1, 1]));
        assert_eq!(v["size"], 5);
        let (_, v) = json(&["irreducibles", "--q", "2", "--m", "3", "--list"]);
        assert_eq!(v["count"], 2);
        assert!(v.get("modulus").is_none());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(
            run_capture(&["loneliness", "--q", "6", "--speeds", "[1]"]).0,
            EXIT_USAGE
        );
        assert_eq!(
            run_capture(&["loneliness", "--speeds", "[1]"]).0,
            EXIT_USAGE
        );
        assert_eq!(run_capture(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["verify", "--suite", "nope"]).0, EXIT_USAGE);
        assert_eq!(
            run_capture(&[
                "covers",
                "--q",
                "2",
                "--k",
                "1",
                "--speeds",
                "[1,1]",
                "--bitmap-cap",
                "2"
            ])
            .0,
            EXIT_CAP
        );
        assert_eq!(
            run_capture(&["verify", "--suite", "extremal-family"]).0,
            EXIT_OK
        );
        assert_eq!(run_capture(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn sunflowers_without_codim4_pairs_is_null() {
        let (code, v) = json(&["sunflowers", "--q", "2", "--speeds", "[1],[0,1]"]);
        assert_eq!(code, 0);
        assert!(v.is_null());
    }

    #[test]
    fn table_format() {
        let (code, text) = run_capture(&[
            "covers", "--q", "2", "--k", "1", "--speeds", "[1]", "--format", "table",
        ]);
        assert_eq!(code, 0);
        assert!(text.contains("covers_all"));
        assert!(text
            .lines()
            .any(|l| l.starts_with("q ") && l.ends_with('2')));
    }
}
