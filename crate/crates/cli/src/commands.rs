use fdrlos::analytic::truncation_bound_continued;
use fdrlos::reference::{cross_agreement_grid, evaluate_method, small_grid, CompareOptions};
use fdrlos::{
    aber, aber_quadrature, aber_series_only, db_to_linear, linear_to_db, ChannelParams, ComparisonTable, Error,
    Method, ModulationSpec, SeriesControl, TruncationOrder,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{
    Axis, EvalArgs, Format, Grid, Numerics, PathlossArgs, PointArgs, Scale, SweepArgs, Table1Args, TableFormat,
    ValidateArgs,
};
use crate::record::{num, sweep_csv, with_version_line, EvalRecord, MethodRecord, PointEcho, SweepRecord};
use crate::Failure;

/// Printed relative truncation errors at K = 5 dB, γ̄ = 20 dB, N = 1..5.
const TABLE1_REFERENCE: [(f64, &str, [f64; 5]); 4] = [
    (0.5, "qam-64", [1.64742e-2, 5.87588e-4, 3.30798e-5, 2.37544e-6, 1.97965e-7]),
    (2.5, "qam-64", [1.55984e-1, 6.005e-2, 1.39152e-2, 4.83533e-3, 2.03268e-3]),
    (0.5, "qam-1024", [2.17328e-2, 1.01106e-3, 6.71084e-5, 5.80182e-6, 6.39829e-7]),
    (2.5, "qam-1024", [1.07278e-1, 2.3618e-2, 2.45898e-3, 6.02779e-4, 2.9732e-4]),
];

const TABLE1_K_DB: f64 = 5.0;
const TABLE1_SNR_DB: f64 = 20.0;

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

/// Parameter errors are usage errors; everything else is numerical.
fn classify(e: Error) -> Failure {
    match e {
        Error::InvalidParameter(_) => Failure::Usage(e.to_string()),
        _ => Failure::Numerical(e.to_string()),
    }
}

fn json<T: Serialize + ?Sized>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("records serialise");
    s.push('\n');
    s
}

fn control(n: &Numerics) -> Result<SeriesControl, Failure> {
    SeriesControl::new(n.tol, n.max_terms).map_err(usage)
}

fn require<T: Clone>(v: &Option<T>, flag: &str) -> Result<T, Failure> {
    v.clone().ok_or_else(|| Failure::Usage(format!("missing --{flag}")))
}

struct Point {
    echo: PointEcho,
    params: ChannelParams,
    modulation: ModulationSpec,
}

impl Point {
    /// The only place where dB inputs become linear.
    fn new(m: f64, k_db: f64, snr_db: f64, modulation: &ModulationSpec, n: &Numerics) -> Result<Self, Failure> {
        let params = ChannelParams::from_db(m, k_db, snr_db).map_err(usage)?;
        let echo = PointEcho { m, k_db, snr_db, modulation: modulation.name(), seed: n.seed, samples: n.samples };
        Ok(Point { echo, params, modulation: modulation.clone() })
    }
}

fn evaluate(
    method: Method,
    point: &Point,
    ctrl: &SeriesControl,
    order: Option<TruncationOrder>,
    n: &Numerics,
) -> Result<(fdrlos::AberResult, Option<f64>), Error> {
    match method {
        Method::Series if n.strict => aber_series_only(&point.params, &point.modulation, ctrl, order).map(|r| (r, None)),
        Method::Series => aber(&point.params, &point.modulation, ctrl, order).map(|r| (r, None)),
        other => evaluate_method(other, &point.params, &point.modulation, ctrl, n.samples, n.seed),
    }
}

fn fixed_order(rows: Option<usize>, cols: Option<usize>, method: Method) -> Result<Option<TruncationOrder>, Failure> {
    let order = match (rows, cols) {
        (None, None) => return Ok(None),
        (Some(l), None) | (None, Some(l)) => TruncationOrder::square(l),
        (Some(l), Some(n)) => TruncationOrder::new(l, n),
    };
    if method != Method::Series {
        return Err(Failure::Usage("--L/--N apply to --method series only".into()));
    }
    Ok(Some(order))
}

fn eval_point(
    point: &PointArgs,
    snr_db: f64,
    method: Method,
    order: Option<TruncationOrder>,
    n: &Numerics,
) -> Result<EvalRecord, Failure> {
    let modulation = require(&point.modulation, "mod")?;
    let p = Point::new(require(&point.m, "m")?, require(&point.k_db, "k-db")?, snr_db, &modulation, n)?;
    let ctrl = control(n)?;
    let result = evaluate(method, &p, &ctrl, order, n).map_err(classify)?;
    Ok(EvalRecord { point: p.echo, result: MethodRecord::from_outcome(method, Ok(result)) })
}

pub fn eval(a: &EvalArgs) -> Result<String, Failure> {
    let order = fixed_order(a.rows, a.cols, a.method)?;
    let snr_db = require(&a.point.snr_db, "snr-db")?;
    Ok(json(&eval_point(&a.point, snr_db, a.method, order, &a.numerics)?))
}

/// Grid values in axis units, endpoints included.
pub fn axis_values(axis: Axis, from: f64, to: f64, points: usize, scale: Option<Scale>) -> Result<Vec<f64>, Failure> {
    if !(from.is_finite() && to.is_finite() && from < to) {
        return Err(Failure::Usage(format!("sweep needs finite --from < --to, got {from} and {to}")));
    }
    if points < 2 {
        return Err(Failure::Usage(format!("sweep needs --points ≥ 2, got {points}")));
    }
    let db_axis = axis != Axis::M;
    let scale = scale.unwrap_or(if db_axis { Scale::LinearInDb } else { Scale::Linear });
    let frac = |i: usize| i as f64 / (points - 1) as f64;
    let lerp = |a: f64, b: f64, i: usize| if i == points - 1 { b } else { a + (b - a) * frac(i) };
    let geometric = |a: f64, b: f64| -> Result<Vec<f64>, Failure> {
        if !(a > 0.0) {
            return Err(Failure::Usage("a geometric m grid needs --from > 0".into()));
        }
        Ok((0..points).map(|i| if i == points - 1 { b } else { a * (b / a).powf(frac(i)) }).collect())
    };
    match (db_axis, scale) {
        (true, Scale::LinearInDb | Scale::Log) | (false, Scale::Linear) => Ok((0..points).map(|i| lerp(from, to, i)).collect()),
        (true, Scale::Linear) => {
            let (a, b) = (db_to_linear(from), db_to_linear(to));
            Ok((0..points).map(|i| if i == 0 { from } else if i == points - 1 { to } else { linear_to_db(lerp(a, b, i)) }).collect())
        }
        (false, Scale::LinearInDb | Scale::Log) => geometric(from, to),
    }
}

pub fn sweep(a: &SweepArgs) -> Result<String, Failure> {
    let values = axis_values(a.axis, a.from, a.to, a.points, a.scale)?;
    if a.methods.is_empty() {
        return Err(Failure::Usage("--methods must name at least one method".into()));
    }
    let modulation = require(&a.point.modulation, "mod")?;
    let fixed = |v: &Option<f64>, axis: Axis, flag: &str| if a.axis == axis { Ok(0.0) } else { require(v, flag) };
    let (m, k_db, snr_db) =
        (fixed(&a.point.m, Axis::M, "m")?, fixed(&a.point.k_db, Axis::KDb, "k-db")?, fixed(&a.point.snr_db, Axis::SnrDb, "snr-db")?);
    let ctrl = control(&a.numerics)?;
    let points = values
        .iter()
        .map(|&v| match a.axis {
            Axis::M => Point::new(v, k_db, snr_db, &modulation, &a.numerics),
            Axis::KDb => Point::new(m, v, snr_db, &modulation, &a.numerics),
            Axis::SnrDb => Point::new(m, k_db, v, &modulation, &a.numerics),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<SweepRecord> = points
        .into_par_iter()
        .zip(values.par_iter())
        .map(|(p, &v)| {
            let results = a
                .methods
                .iter()
                .map(|&method| {
                    let r = MethodRecord::from_outcome(method, evaluate(method, &p, &ctrl, None, &a.numerics));
                    if let Some(e) = &r.error {
                        log::warn!("{} = {v}: {method} failed: {e}", a.axis.name());
                    }
                    r
                })
                .collect();
            SweepRecord { axis: a.axis.name(), axis_value: v, point: p.echo, results }
        })
        .collect();
    match a.format {
        Format::Csv => sweep_csv(&a.methods, &rows).map_err(|e| Failure::Numerical(e.to_string())),
        Format::Json => Ok(json(&rows)),
    }
}

#[derive(Debug, Serialize)]
struct Table1Cell {
    m: f64,
    modulation: &'static str,
    n: usize,
    bound: f64,
    aber: f64,
    relative_error: f64,
    reference: f64,
    deviation: f64,
}

/// Returns the rendered table and whether every cell met `--check`.
pub fn table1(a: &Table1Args) -> Result<(String, bool), Failure> {
    let jobs: Vec<(f64, &'static str, usize, f64)> = TABLE1_REFERENCE
        .iter()
        .flat_map(|&(m, q, refs)| refs.into_iter().enumerate().map(move |(i, r)| (m, q, i + 1, r)))
        .collect();
    let cells = jobs
        .into_par_iter()
        .map(|(m, q, n, reference)| {
            let modulation: ModulationSpec = q.parse()?;
            let p = ChannelParams::from_db(m, TABLE1_K_DB, TABLE1_SNR_DB)?;
            let exact = aber_quadrature(&p, &modulation)?.value;
            let bound = truncation_bound_continued(&p, &modulation, TruncationOrder::square(n))?;
            let relative_error = bound / exact;
            Ok(Table1Cell {
                m,
                modulation: q,
                n,
                bound,
                aber: exact,
                relative_error,
                reference,
                deviation: (relative_error - reference) / reference,
            })
        })
        .collect::<Result<Vec<_>, Error>>()
        .map_err(classify)?;
    let pass = a.check.map_or(true, |tol| cells.iter().all(|c| c.deviation.abs() <= tol));
    let text = match a.format {
        TableFormat::Json => json(&cells),
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let csv_err = |e: csv::Error| Failure::Numerical(e.to_string());
            w.write_record(["m", "modulation", "N", "bound", "aber", "relative_error", "reference", "deviation"]).map_err(csv_err)?;
            for c in &cells {
                w.write_record([
                    c.m.to_string(),
                    c.modulation.to_string(),
                    c.n.to_string(),
                    num(c.bound),
                    num(c.aber),
                    num(c.relative_error),
                    num(c.reference),
                    num(c.deviation),
                ])
                .map_err(csv_err)?;
            }
            with_version_line(w)
        }
        TableFormat::Table => {
            let mut s = format!("Relative truncation error, K = {TABLE1_K_DB} dB, γ̄ = {TABLE1_SNR_DB} dB\n");
            s.push_str(&format!("{:>4} {:>9} {:>2} {:>13} {:>13} {:>10}\n", "m", "mod", "N", "computed", "reference", "deviation"));
            for c in &cells {
                s.push_str(&format!(
                    "{:>4} {:>9} {:>2} {:>13.5e} {:>13.5e} {:>9.2}%\n",
                    c.m,
                    c.modulation,
                    c.n,
                    c.relative_error,
                    c.reference,
                    100.0 * c.deviation
                ));
            }
            s
        }
    };
    Ok((text, pass))
}

#[derive(Debug, Serialize)]
struct ValidationReport {
    grid: &'static str,
    seed: u64,
    samples: u64,
    points: usize,
    failed_points: usize,
    all_pass: bool,
    results: Vec<ComparisonTable>,
}

/// Returns the JSON report and the exit status it implies.
pub fn validate(a: &ValidateArgs) -> Result<(String, Option<Failure>), Failure> {
    let ctrl = control(&a.numerics)?;
    let grid = match a.grid {
        Grid::Small => small_grid(),
        Grid::Full => cross_agreement_grid(),
    };
    let opts = CompareOptions {
        rel_tol: a.rel_tol,
        sigmas: a.sigmas,
        series_perturbation: if a.inject_fault { 1e-2 } else { 0.0 },
        ..CompareOptions::default()
    };
    let methods = [Method::Series, Method::Quadrature, Method::MonteCarlo];
    let n = &a.numerics;
    let results = grid
        .par_iter()
        .map(|(p, q)| {
            if n.strict && !fdrlos::reference::all_in_domain(p, q) {
                return Err(Error::Domain(format!("ψ₁ ≥ 1 for {q} at m = {}, K = {}, γ̄ = {}", p.m, p.k_factor, p.snr_avg)));
            }
            fdrlos::reference::compare_report_with(p, q, &methods, &ctrl, n.samples, n.seed, &opts)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(classify)?;
    let broken = results.iter().flat_map(|t| &t.outcomes).find_map(|o| o.error.clone());
    let failed_points = results.iter().filter(|t| !t.all_pass).count();
    let report = ValidationReport {
        grid: match a.grid {
            Grid::Small => "small",
            Grid::Full => "full",
        },
        seed: n.seed,
        samples: n.samples,
        points: results.len(),
        failed_points,
        all_pass: failed_points == 0,
        results,
    };
    let status = match (broken, failed_points) {
        (Some(e), _) => Some(Failure::Numerical(e)),
        (None, 0) => None,
        (None, k) => Some(Failure::Validation(format!("{k} of {} points failed", report.points))),
    };
    Ok((json(&report), status))
}

#[derive(Debug, Serialize)]
struct PathlossRecord {
    snr_tx_db: f64,
    chi: f64,
    d0: f64,
    d: f64,
    alpha: f64,
    snr_db: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    eval: Option<EvalRecord>,
}

pub fn pathloss(a: &PathlossArgs) -> Result<String, Failure> {
    let snr_db = fdrlos::channel::snr_from_distance(a.snr_tx_db, a.chi, a.d0, a.d, a.alpha).map_err(usage)?;
    let eval = if a.then_eval {
        Some(eval_point(&a.point, snr_db, a.method, None, &a.numerics)?)
    } else {
        None
    };
    Ok(json(&PathlossRecord { snr_tx_db: a.snr_tx_db, chi: a.chi, d0: a.d0, d: a.d, alpha: a.alpha, snr_db, eval }))
}
