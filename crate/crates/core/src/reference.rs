//! Independent oracles: brute-force quadrature over the SNR density and a
//! semi-analytic Monte Carlo over channel draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    aber, aber_high_snr, aber_k_inf, aber_k_zero, aber_m_inf, psi_pair, AberResult, Method,
};
use crate::channel::{pdf, ChannelParams, EnvelopeSampler};
use crate::error::{invalid, Result};
use crate::modulation::{psk_coeffs, qam_coeffs, ModulationSpec};
use crate::quad::{integrate, integrate_to_inf, QuadTol};
use crate::specfun::{gauss_q, SeriesControl};

const QUAD_TOL: QuadTol = QuadTol::new(1e-12, 1e-8);
const MC_BLOCK: u64 = 1 << 16;

/// ABER by adaptive quadrature of E[Q(√(2δγ))] against the SNR density.
pub fn aber_quadrature(params: &ChannelParams, modulation: &ModulationSpec) -> Result<AberResult> {
    aber_quadrature_with(params, modulation, &QUAD_TOL)
}

/// [`aber_quadrature`] with explicit tolerances.
pub fn aber_quadrature_with(params: &ChannelParams, modulation: &ModulationSpec, tol: &QuadTol) -> Result<AberResult> {
    let parts: Vec<f64> = modulation
        .delta2
        .par_iter()
        .map(|&d| jq_quadrature_with(params, d, tol))
        .collect::<Result<_>>()?;
    let sum: f64 = parts.iter().sum();
    Ok(AberResult::plain(modulation.delta1 * sum, Method::Quadrature))
}

/// One term ∫₀^∞ Q(√(2δγ)) f_γ(γ) dγ, with γ = γ̄t split at t = 1.
pub fn jq_quadrature(params: &ChannelParams, delta2j: f64) -> Result<f64> {
    jq_quadrature_with(params, delta2j, &QUAD_TOL)
}

fn jq_quadrature_with(params: &ChannelParams, delta2j: f64, tol: &QuadTol) -> Result<f64> {
    if !(delta2j > 0.0 && delta2j.is_finite()) {
        return Err(invalid(format!("Q-term scaling must be finite and > 0, got {delta2j}")));
    }
    let g = params.snr_avg;
    let mut failure = None;
    let mut f = |t: f64| {
        if failure.is_some() {
            return 0.0;
        }
        let gamma = g * t;
        match pdf(params, gamma) {
            Ok(p) => gauss_q((2.0 * delta2j * gamma).sqrt()) * p * g,
            Err(e) => {
                failure = Some(e);
                0.0
            }
        }
    };
    let head = integrate(&mut f, 0.0, 1.0, tol);
    let tail = integrate_to_inf(&mut f, 1.0, 1.0, tol);
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(head.checked("ABER quadrature on [0, γ̄]")? + tail.checked("ABER quadrature on [γ̄, ∞)")?)
}

/// The 72-point cross-agreement grid m × K × γ̄ × {QPSK, QAM-64}, in axis
/// order. Points with ψ₁ ≥ 1 are included; filter with [`all_in_domain`].
pub fn cross_agreement_grid() -> Vec<(ChannelParams, ModulationSpec)> {
    let mut out = Vec::with_capacity(72);
    for m in [0.5, 1.0, 2.5, 3.5] {
        for k in [0.1, 1.0, 10.0] {
            for g in [10.0, 100.0, 1000.0] {
                for mod_ in [psk_coeffs(4), qam_coeffs(64)] {
                    let p = ChannelParams::new(m, k, g).expect("grid values are valid");
                    out.push((p, mod_.expect("grid modulations are valid")));
                }
            }
        }
    }
    out
}

/// Eight points, all with ψ₁ < 1: m ∈ {0.5, 3.5} × K ∈ {1, 10} ×
/// {QPSK at γ̄ = 100, QAM-64 at γ̄ = 1000}.
pub fn small_grid() -> Vec<(ChannelParams, ModulationSpec)> {
    let mut out = Vec::with_capacity(8);
    for m in [0.5, 3.5] {
        for k in [1.0, 10.0] {
            out.push((ChannelParams::new(m, k, 100.0).expect("valid"), psk_coeffs(4).expect("valid")));
            out.push((ChannelParams::new(m, k, 1000.0).expect("valid"), qam_coeffs(64).expect("valid")));
        }
    }
    out
}

/// Whether ψ₁ < 1 for every Q-term.
pub fn all_in_domain(params: &ChannelParams, modulation: &ModulationSpec) -> bool {
    modulation.delta2.iter().all(|&d| psi_pair(params, d).map(|p| p.in_domain()).unwrap_or(false))
}

/// Monte Carlo mean of δ₁ Σⱼ Q(√(2δ₂ⱼγ)) over channel draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    /// Sample mean, clipped to [0, 1].
    pub mean: f64,
    pub std_err: f64,
    pub n_samples: u64,
    pub seed: u64,
}

/// Draws are split into fixed blocks of 2¹⁶; block b uses stream b of a
/// ChaCha8 generator seeded with `seed`, and the blocks are merged in order,
/// so the estimate does not depend on the thread count.
pub fn aber_montecarlo(
    params: &ChannelParams,
    modulation: &ModulationSpec,
    n_samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    if n_samples < 2 {
        return Err(invalid(format!("Monte Carlo needs at least 2 samples, got {n_samples}")));
    }
    let sampler = EnvelopeSampler::new(params);
    let blocks = n_samples.div_ceil(MC_BLOCK);
    let parts: Vec<Moments> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = MC_BLOCK.min(n_samples - b * MC_BLOCK);
            let mut acc = Moments::default();
            for _ in 0..count {
                let gamma = sampler.sample(&mut rng).gamma;
                let v: f64 = modulation.delta2.iter().map(|&d| gauss_q((2.0 * d * gamma).sqrt())).sum();
                acc.push(modulation.delta1 * v);
            }
            acc
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    let var = total.m2 / (total.n - 1.0);
    Ok(McEstimate {
        mean: total.mean.clamp(0.0, 1.0),
        std_err: (var / total.n).sqrt(),
        n_samples,
        seed,
    })
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0.0 {
            return o;
        }
        if o.n == 0.0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments { n, mean: self.mean + d * o.n / n, m2: self.m2 + o.m2 + d * d * self.n * o.n / n }
    }
}

/// One method's ABER, with the Monte Carlo standard error when relevant.
pub fn evaluate_method(
    method: Method,
    params: &ChannelParams,
    modulation: &ModulationSpec,
    ctrl: &SeriesControl,
    n_samples: u64,
    seed: u64,
) -> Result<(AberResult, Option<f64>)> {
    let plain = |r: Result<AberResult>| r.map(|r| (r, None));
    match method {
        Method::Series => plain(aber(params, modulation, ctrl, None)),
        Method::Quadrature => plain(aber_quadrature(params, modulation)),
        Method::MonteCarlo => {
            let mc = aber_montecarlo(params, modulation, n_samples, seed)?;
            let mut r = AberResult::plain(mc.mean, Method::MonteCarlo);
            r.terms_evaluated = mc.n_samples as usize;
            Ok((r, Some(mc.std_err)))
        }
        Method::AsymptoticHighSnr => plain(aber_high_snr(params, modulation)),
        Method::AsymptoticKInf => plain(aber_k_inf(params, modulation)),
        Method::AsymptoticKZero => plain(aber_k_zero(params, modulation)),
        Method::AsymptoticMInf => plain(aber_m_inf(params, modulation)),
    }
}

/// Pass/fail thresholds for [`compare_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    /// Relative tolerance between deterministic methods.
    pub rel_tol: f64,
    /// Width of the Monte Carlo acceptance band in standard errors.
    pub sigmas: f64,
    /// Gap above which an asymptote is reported as not yet reached.
    pub asymptote_gap: f64,
    /// Relative offset added to the series value; exercises the failure path.
    pub series_perturbation: f64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-4, sigmas: 3.0, asymptote_gap: 0.10, series_perturbation: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    /// Method asked for; `result.method` records what actually ran.
    pub requested: Method,
    pub result: Option<AberResult>,
    pub std_err: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairComparison {
    pub first: Method,
    pub second: Method,
    pub abs_diff: Option<f64>,
    pub rel_diff: Option<f64>,
    pub pass: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub params: ChannelParams,
    pub modulation: String,
    pub outcomes: Vec<MethodOutcome>,
    pub pairs: Vec<PairComparison>,
    pub all_pass: bool,
}

/// Evaluates each method and compares every pair: deterministic methods to
/// a relative tolerance, Monte Carlo within a band of standard errors, and
/// asymptotes for information only. A failing method marks its cells.
pub fn compare_report(
    params: &ChannelParams,
    modulation: &ModulationSpec,
    methods: &[Method],
    ctrl: &SeriesControl,
    n_samples: u64,
    seed: u64,
) -> Result<ComparisonTable> {
    compare_report_with(params, modulation, methods, ctrl, n_samples, seed, &CompareOptions::default())
}

pub fn compare_report_with(
    params: &ChannelParams,
    modulation: &ModulationSpec,
    methods: &[Method],
    ctrl: &SeriesControl,
    n_samples: u64,
    seed: u64,
    opts: &CompareOptions,
) -> Result<ComparisonTable> {
    if methods.len() < 2 {
        return Err(invalid("comparison needs at least two methods"));
    }
    ctrl.validate()?;
    let outcomes: Vec<MethodOutcome> = methods
        .iter()
        .map(|&m| match evaluate_method(m, params, modulation, ctrl, n_samples, seed) {
            Ok((mut r, std_err)) => {
                if m == Method::Series {
                    r.value *= 1.0 + opts.series_perturbation;
                }
                MethodOutcome { requested: m, result: Some(r), std_err, error: None }
            }
            Err(e) => MethodOutcome { requested: m, result: None, std_err: None, error: Some(e.to_string()) },
        })
        .collect();
    let mut pairs = Vec::new();
    for i in 0..outcomes.len() {
        for j in i + 1..outcomes.len() {
            pairs.push(compare_pair(&outcomes[i], &outcomes[j], opts));
        }
    }
    let all_pass = pairs.iter().all(|p| p.pass);
    Ok(ComparisonTable { params: *params, modulation: modulation.name(), outcomes, pairs, all_pass })
}

fn compare_pair(a: &MethodOutcome, b: &MethodOutcome, opts: &CompareOptions) -> PairComparison {
    let (first, second) = (a.requested, b.requested);
    let (Some(ra), Some(rb)) = (&a.result, &b.result) else {
        return PairComparison { first, second, abs_diff: None, rel_diff: None, pass: false, note: Some("method failed".into()) };
    };
    let abs_diff = (ra.value - rb.value).abs();
    let reference = if first == Method::Quadrature || second != Method::Quadrature { rb.value } else { ra.value };
    let rel_diff = abs_diff / reference.abs();
    let (pass, note) = if first.is_asymptotic() || second.is_asymptotic() {
        let note = (rel_diff > opts.asymptote_gap).then(|| "asymptote regime not reached".to_string());
        (true, note)
    } else if a.std_err.is_some() || b.std_err.is_some() {
        let se = a.std_err.unwrap_or(0.0).hypot(b.std_err.unwrap_or(0.0));
        (abs_diff <= opts.sigmas * se, None)
    } else {
        (rel_diff < opts.rel_tol, None)
    };
    PairComparison { first, second, abs_diff: Some(abs_diff), rel_diff: Some(rel_diff), pass, note }
}
