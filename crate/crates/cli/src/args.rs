use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fdrlos::{Method, ModulationSpec};

use crate::Failure;

#[derive(Debug, Parser)]
#[command(name = "fdrlos-aber", version, about = "ABER of M-QAM / M-PSK over fdRLoS fading")]
pub struct Cli {
    /// JSON object with the same keys as the flags; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Write the result here instead of stdout.
    #[arg(long, short, global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// ABER at one channel point.
    Eval(EvalArgs),
    /// ABER along one parameter axis, as CSV or JSON.
    Sweep(SweepArgs),
    /// Relative truncation error of the fixed-order series at K = 5 dB, γ̄ = 20 dB.
    Table1(Table1Args),
    /// Cross-check series, quadrature and Monte Carlo over a parameter grid.
    Validate(ValidateArgs),
    /// Average SNR after distance-dependent path loss.
    Pathloss(PathlossArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Numerics {
    /// Relative tolerance of the adaptive series.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,

    /// Cap on the terms per series index.
    #[arg(long, default_value_t = 4000)]
    pub max_terms: usize,

    /// Monte Carlo seed.
    #[arg(long, env = "FDRLOS_SEED", default_value_t = 20_240_901)]
    pub seed: u64,

    /// Monte Carlo sample count; scientific notation accepted (1e6).
    #[arg(long, value_parser = parse_count, default_value = "1e5")]
    pub samples: u64,

    /// Report series breakdown as an error instead of falling back to quadrature.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    /// Fading severity of the line-of-sight component.
    #[arg(long, allow_negative_numbers = true)]
    pub m: Option<f64>,

    /// Rician factor in dB.
    #[arg(long, allow_negative_numbers = true)]
    pub k_db: Option<f64>,

    /// Average SNR in dB.
    #[arg(long, allow_negative_numbers = true)]
    pub snr_db: Option<f64>,

    /// qam-<M> or psk-<M>.
    #[arg(long = "mod", value_name = "MODULATION")]
    pub modulation: Option<ModulationSpec>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub point: PointArgs,

    #[arg(long, default_value = "series")]
    pub method: Method,

    /// Fixed row truncation (series only).
    #[arg(long = "L", value_name = "L")]
    pub rows: Option<usize>,

    /// Fixed column truncation (series only).
    #[arg(long = "N", value_name = "N")]
    pub cols: Option<usize>,

    #[command(flatten)]
    pub numerics: Numerics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Axis {
    SnrDb,
    KDb,
    M,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::SnrDb => "snr_db",
            Axis::KDb => "k_db",
            Axis::M => "m",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    /// Evenly spaced in dB (geometric for the m axis).
    LinearInDb,
    /// Evenly spaced in the linear quantity.
    Linear,
    /// Geometric in the linear quantity.
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub axis: Axis,

    #[arg(long, allow_negative_numbers = true)]
    pub from: f64,

    #[arg(long, allow_negative_numbers = true)]
    pub to: f64,

    #[arg(long)]
    pub points: usize,

    /// Defaults to linear-in-db for dB axes and linear for m.
    #[arg(long)]
    pub scale: Option<Scale>,

    /// Comma-separated method list.
    #[arg(long, value_delimiter = ',', default_value = "series")]
    pub methods: Vec<Method>,

    #[command(flatten)]
    pub point: PointArgs,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[command(flatten)]
    pub numerics: Numerics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct Table1Args {
    #[arg(long, value_enum, default_value_t = TableFormat::Table)]
    pub format: TableFormat,

    /// Exit 1 when a cell deviates from the reference by more than this fraction.
    #[arg(long, value_name = "REL")]
    pub check: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Grid {
    Small,
    Full,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value_t = Grid::Small)]
    pub grid: Grid,

    /// Deterministic-method relative tolerance.
    #[arg(long, default_value_t = 1e-4)]
    pub rel_tol: f64,

    /// Monte Carlo band in standard errors.
    #[arg(long, default_value_t = 3.0)]
    pub sigmas: f64,

    #[arg(long, hide = true)]
    pub inject_fault: bool,

    #[command(flatten)]
    pub numerics: Numerics,
}

#[derive(Debug, Clone, Args)]
pub struct PathlossArgs {
    /// SNR at the reference distance, dB.
    #[arg(long, allow_negative_numbers = true)]
    pub snr_tx_db: f64,

    /// Attenuation constant (linear).
    #[arg(long, default_value_t = 1.0)]
    pub chi: f64,

    /// Reference distance.
    #[arg(long, allow_negative_numbers = true)]
    pub d0: f64,

    /// Link distance.
    #[arg(long, allow_negative_numbers = true)]
    pub d: f64,

    /// Path-loss exponent.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,

    /// Evaluate the ABER at the resulting SNR (takes the eval flags).
    #[arg(long)]
    pub then_eval: bool,

    #[command(flatten)]
    pub point: PointArgs,

    #[arg(long, default_value = "series")]
    pub method: Method,

    #[command(flatten)]
    pub numerics: Numerics,
}

/// Accepts integers and scientific notation such as `1e4`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if !(v.is_finite() && v.fract() == 0.0 && (2.0..=9.007_199_254_740_992e15).contains(&v)) {
        return Err(format!("'{s}' must be a whole number ≥ 2"));
    }
    Ok(v as u64)
}

/// Applies `--config` by appending `--key=value` for every key that is not
/// already given on the command line.
pub fn merge_config(argv: Vec<String>) -> Result<Vec<String>, Failure> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| Failure::Usage(format!("cannot read config {path}: {e}")))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("config {path} is not valid JSON: {e}")))?;
    let serde_json::Value::Object(map) = value else {
        return Err(Failure::Usage(format!("config {path} must hold a JSON object")));
    };
    let mut out = argv;
    let given: Vec<String> = out.iter().filter_map(|a| a.strip_prefix("--")).map(|a| flag_key(a).to_string()).collect();
    for (key, v) in map {
        let flag = key.replace('_', "-");
        if flag == "config" || given.contains(&flag) {
            continue;
        }
        let text = match v {
            serde_json::Value::Null | serde_json::Value::Bool(false) => continue,
            serde_json::Value::Bool(true) => {
                out.push(format!("--{flag}"));
                continue;
            }
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            serde_json::Value::Array(items) => items
                .iter()
                .map(|i| match i {
                    serde_json::Value::String(s) => Ok(s.clone()),
                    serde_json::Value::Number(n) => Ok(n.to_string()),
                    _ => Err(Failure::Usage(format!("config key '{key}': arrays may hold strings or numbers only"))),
                })
                .collect::<Result<Vec<_>, _>>()?
                .join(","),
            serde_json::Value::Object(_) => {
                return Err(Failure::Usage(format!("config key '{key}' must not be an object")));
            }
        };
        out.push(format!("--{flag}={text}"));
    }
    Ok(out)
}

fn flag_key(arg: &str) -> &str {
    arg.split_once('=').map_or(arg, |(k, _)| k)
}

fn config_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--" {
            return None;
        }
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}
