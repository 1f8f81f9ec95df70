//! Series evaluation of the ABER, its truncation bound and the closed-form
//! asymptotes.

mod asymptotic;
mod bound;
mod series;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::error::{invalid, Error, Result};
use crate::modulation::ModulationSpec;
use crate::reference::aber_quadrature;
use crate::specfun::SeriesControl;

pub use asymptotic::{
    aber_high_snr, aber_k_inf, aber_k_zero, aber_m_inf, k_zero_term_bessel, k_zero_term_tricomi,
};
pub use bound::{auto_order, truncation_bound, truncation_bound_continued};
pub use series::{j1_integral, jq_series};

/// ψ₁ = (K+1)/(γ̄δ) and ψ₂ = ψ₁ + K/m for one Q-term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiPair {
    pub psi1: f64,
    pub psi2: f64,
}

impl PsiPair {
    /// Whether the double series converges geometrically (ψ₁ < 1).
    pub fn in_domain(&self) -> bool {
        self.psi1 < 1.0
    }
}

pub fn psi_pair(params: &ChannelParams, delta2j: f64) -> Result<PsiPair> {
    if !(delta2j > 0.0 && delta2j.is_finite()) {
        return Err(invalid(format!("Q-term scaling must be finite and > 0, got {delta2j}")));
    }
    let psi1 = (params.k_factor + 1.0) / (params.snr_avg * delta2j);
    Ok(PsiPair { psi1, psi2: psi1 + params.k_factor / params.m })
}

/// Truncation indices: rows l = 0..=L, columns n = 0..=N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationOrder {
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "N")]
    pub n: usize,
}

impl TruncationOrder {
    pub const fn new(l: usize, n: usize) -> Self {
        Self { l, n }
    }

    pub const fn square(n: usize) -> Self {
        Self { l: n, n }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Series,
    Quadrature,
    MonteCarlo,
    AsymptoticHighSnr,
    AsymptoticKInf,
    AsymptoticKZero,
    AsymptoticMInf,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte-carlo",
            Method::AsymptoticHighSnr => "asymptotic-high-snr",
            Method::AsymptoticKInf => "asymptotic-k-inf",
            Method::AsymptoticKZero => "asymptotic-k-zero",
            Method::AsymptoticMInf => "asymptotic-m-inf",
        }
    }

    pub fn is_asymptotic(self) -> bool {
        matches!(
            self,
            Method::AsymptoticHighSnr | Method::AsymptoticKInf | Method::AsymptoticKZero | Method::AsymptoticMInf
        )
    }

    pub const ALL: [Method; 7] = [
        Method::Series,
        Method::Quadrature,
        Method::MonteCarlo,
        Method::AsymptoticHighSnr,
        Method::AsymptoticKInf,
        Method::AsymptoticKZero,
        Method::AsymptoticMInf,
    ];
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| invalid(format!("unknown method '{s}'")))
    }
}

/// Result of one ABER evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AberResult {
    /// ABER, clipped to [0, 1].
    pub value: f64,
    pub method: Method,
    /// Fixed truncation order, when one was requested.
    pub order: Option<TruncationOrder>,
    /// Largest anti-diagonal l + n reached in adaptive mode.
    pub diagonal: Option<usize>,
    /// Truncation bound for the (largest square inside the) summed index set.
    pub err_bound: Option<f64>,
    pub terms_evaluated: usize,
}

impl AberResult {
    pub(crate) fn plain(value: f64, method: Method) -> Self {
        Self { value: value.clamp(0.0, 1.0), method, order: None, diagonal: None, err_bound: None, terms_evaluated: 0 }
    }
}

/// One J_Q term summed by the double series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JqSeries {
    pub value: f64,
    pub terms: usize,
    pub converged: bool,
    /// False when ψ₁ ≥ 1, where convergence is only algebraic.
    pub in_domain: bool,
    /// Largest anti-diagonal summed (adaptive mode).
    pub diagonal: Option<usize>,
    pub psi: PsiPair,
}

/// ABER by the double series.
///
/// With `order = None` each term is summed adaptively; if any ψ₁ ≥ 1 or the
/// series breaks down, the result silently comes from
/// [`aber_quadrature`] and is labelled accordingly. A fixed `order` always
/// uses the series, for any ψ₁.
pub fn aber(
    params: &ChannelParams,
    modulation: &ModulationSpec,
    ctrl: &SeriesControl,
    order: Option<TruncationOrder>,
) -> Result<AberResult> {
    ctrl.validate()?;
    if order.is_none() {
        let all_inside = modulation
            .delta2
            .iter()
            .map(|&d| psi_pair(params, d).map(|p| p.in_domain()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .all(|b| b);
        if !all_inside {
            log::info!("ψ₁ ≥ 1 for {modulation} at γ̄ = {}; using quadrature", params.snr_avg);
            return aber_quadrature(params, modulation);
        }
    }
    match series_aber(params, modulation, ctrl, order) {
        Ok(r) => Ok(r),
        Err(e @ Error::InvalidParameter(_)) => Err(e),
        Err(e) => {
            log::info!("series failed ({e}); using quadrature");
            aber_quadrature(params, modulation)
        }
    }
}

/// Like [`aber`] but never falls back: series breakdown or ψ₁ ≥ 1 in adaptive
/// mode is reported as an error.
pub fn aber_series_only(
    params: &ChannelParams,
    modulation: &ModulationSpec,
    ctrl: &SeriesControl,
    order: Option<TruncationOrder>,
) -> Result<AberResult> {
    ctrl.validate()?;
    if order.is_none() {
        for &d in &modulation.delta2 {
            let psi = psi_pair(params, d)?;
            if !psi.in_domain() {
                return Err(crate::error::domain(format!(
                    "ψ₁ = {} ≥ 1 for {modulation}; the series only converges algebraically",
                    psi.psi1
                )));
            }
        }
    }
    series_aber(params, modulation, ctrl, order)
}

fn series_aber(
    params: &ChannelParams,
    modulation: &ModulationSpec,
    ctrl: &SeriesControl,
    order: Option<TruncationOrder>,
) -> Result<AberResult> {
    let parts: Vec<JqSeries> = modulation
        .delta2
        .par_iter()
        .map(|&d| jq_series(params, d, ctrl, order))
        .collect::<Result<_>>()?;
    let sum: f64 = parts.iter().map(|p| p.value).sum();
    let terms = parts.iter().map(|p| p.terms).sum();
    let diagonal = parts.iter().filter_map(|p| p.diagonal).max();
    let bound_order = order.or(diagonal.map(|d| TruncationOrder::square(d / 2)));
    let err_bound = match bound_order {
        Some(o) if parts.iter().all(|p| p.psi.in_domain()) => {
            truncation_bound(params, modulation, o).ok().filter(|b| b.is_finite())
        }
        _ => None,
    };
    Ok(AberResult {
        value: (modulation.delta1 * sum).clamp(0.0, 1.0),
        method: Method::Series,
        order,
        diagonal,
        err_bound,
        terms_evaluated: terms,
    })
}

/// ABER at m = 1/2, by the same series.
pub fn aber_m_half(params: &ChannelParams, modulation: &ModulationSpec, ctrl: &SeriesControl) -> Result<AberResult> {
    aber(&params.with_m(0.5)?, modulation, ctrl, None)
}
