use fdrlos::{AberResult, Error, Method, TruncationOrder};
use serde::Serialize;

pub const CSV_VERSION_LINE: &str = "# fdrlos-aber v1";

/// Channel point as the user gave it (dB where applicable).
#[derive(Debug, Clone, Serialize)]
pub struct PointEcho {
    pub m: f64,
    pub k_db: f64,
    pub snr_db: f64,
    pub modulation: String,
    pub seed: u64,
    pub samples: u64,
}

/// One method at one point. Failed evaluations carry `value = NaN` (null in
/// JSON) and the error text.
#[derive(Debug, Clone, Serialize)]
pub struct MethodRecord {
    pub requested: Method,
    /// Method that produced the value; differs from `requested` on fallback.
    pub method: Option<Method>,
    pub value: f64,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<TruncationOrder>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagonal: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub err_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_err: Option<f64>,
    pub terms_evaluated: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl MethodRecord {
    pub fn from_outcome(requested: Method, outcome: Result<(AberResult, Option<f64>), Error>) -> Self {
        match outcome {
            Ok((r, std_err)) => MethodRecord {
                requested,
                method: Some(r.method),
                value: r.value,
                status: "ok",
                order: r.order,
                diagonal: r.diagonal,
                err_bound: r.err_bound,
                std_err,
                terms_evaluated: r.terms_evaluated,
                error: None,
            },
            Err(e) => MethodRecord {
                requested,
                method: None,
                value: f64::NAN,
                status: status_of(&e),
                order: None,
                diagonal: None,
                err_bound: None,
                std_err: None,
                terms_evaluated: 0,
                error: Some(e.to_string()),
            },
        }
    }
}

pub fn status_of(e: &Error) -> &'static str {
    match e {
        Error::InvalidParameter(_) => "invalid",
        Error::Domain(_) => "domain",
        Error::NonConvergence { .. } => "non-convergence",
        Error::Quadrature { .. } => "quadrature-failure",
        Error::PrecisionLoss { .. } => "precision-loss",
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalRecord {
    #[serde(flatten)]
    pub point: PointEcho,
    #[serde(flatten)]
    pub result: MethodRecord,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub axis: &'static str,
    pub axis_value: f64,
    #[serde(flatten)]
    pub point: PointEcho,
    pub results: Vec<MethodRecord>,
}

/// Shortest decimal that parses back to the same binary64; `nan` for NaN.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:e}")
    }
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Wide CSV: one row per point, five columns per requested method.
pub fn sweep_csv(methods: &[Method], rows: &[SweepRecord]) -> csv::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> =
        ["axis", "axis_value", "m", "k_db", "snr_db", "modulation", "seed", "samples"].map(String::from).to_vec();
    for m in methods {
        let n = m.name();
        header.extend([n.to_string(), format!("{n}_status"), format!("{n}_method"), format!("{n}_err_bound"), format!("{n}_std_err")]);
    }
    w.write_record(&header)?;
    for r in rows {
        let p = &r.point;
        let mut rec = vec![
            r.axis.to_string(),
            r.axis_value.to_string(),
            p.m.to_string(),
            p.k_db.to_string(),
            p.snr_db.to_string(),
            p.modulation.clone(),
            p.seed.to_string(),
            p.samples.to_string(),
        ];
        for res in &r.results {
            rec.extend([
                num(res.value),
                res.status.to_string(),
                res.method.map(|m| m.name().to_string()).unwrap_or_default(),
                opt_num(res.err_bound),
                opt_num(res.std_err),
            ]);
        }
        w.write_record(&rec)?;
    }
    Ok(with_version_line(w))
}

pub fn with_version_line(w: csv::Writer<Vec<u8>>) -> String {
    let body = String::from_utf8(w.into_inner().expect("in-memory writer")).expect("CSV is UTF-8");
    format!("{CSV_VERSION_LINE}\n{body}")
}
