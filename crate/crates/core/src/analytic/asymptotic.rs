//! Closed-form limits of the ABER: high SNR, K → ∞, K → 0 and m → ∞.

use super::{psi_pair, AberResult, Method};
use crate::channel::ChannelParams;
use crate::error::{domain, Result};
use crate::modulation::ModulationSpec;
use crate::quad::{laguerre_adaptive, QuadTol};
use crate::specfun::{bessel_k0_scaled, bessel_k1_scaled, gamma_ratio, gamma_times_u, gauss_2f1, tricomi_u};

fn assemble(
    modulation: &ModulationSpec,
    method: Method,
    mut term: impl FnMut(f64) -> Result<f64>,
) -> Result<AberResult> {
    let mut sum = 0.0;
    for &d in &modulation.delta2 {
        sum += term(d)?;
    }
    Ok(AberResult::plain(modulation.delta1 * sum, method))
}

/// γ̄ → ∞: δ₁ Σⱼ (K+1)/(4γ̄δ₂ⱼ) Γ(m) U(m, 1, K/m). Undefined at K = 0,
/// where U(m, 1, 0) diverges.
pub fn aber_high_snr(params: &ChannelParams, modulation: &ModulationSpec) -> Result<AberResult> {
    let k = params.k_factor;
    if k == 0.0 {
        return Err(domain("high-SNR asymptote needs K > 0 (U(m, 1, 0) diverges)"));
    }
    let shape = gamma_times_u(params.m, 1.0, k / params.m)?;
    assemble(modulation, Method::AsymptoticHighSnr, |d| Ok((k + 1.0) / (4.0 * params.snr_avg * d) * shape))
}

/// K → ∞: δ₁ Σⱼ Γ(m+½)/(2√π Γ(m+1)) ₂F₁(½, m; m+1; m/(m+γ̄δ)) (1+γ̄δ/m)^(−m).
pub fn aber_k_inf(params: &ChannelParams, modulation: &ModulationSpec) -> Result<AberResult> {
    let m = params.m;
    let lead = gamma_ratio(&[m + 0.5], &[m + 1.0]) / (2.0 * std::f64::consts::PI.sqrt());
    assemble(modulation, Method::AsymptoticKInf, |d| {
        let g = params.snr_avg * d;
        let f = gauss_2f1(0.5, m, m + 1.0, m / (m + g))?;
        Ok(lead * f * (-m * (g / m).ln_1p()).exp())
    })
}

/// K → 0: δ₁ Σⱼ [½ − (√π/4) U(½, 0, 1/(γ̄δ₂ⱼ))].
pub fn aber_k_zero(params: &ChannelParams, modulation: &ModulationSpec) -> Result<AberResult> {
    assemble(modulation, Method::AsymptoticKZero, |d| k_zero_term_tricomi(params.snr_avg * d))
}

/// ½ − (√π/4) U(½, 0, 1/g) for g = γ̄δ.
pub fn k_zero_term_tricomi(g: f64) -> Result<f64> {
    Ok(0.5 - 0.25 * std::f64::consts::PI.sqrt() * tricomi_u(0.5, 0.0, 1.0 / g)?)
}

/// The same term through modified Bessel functions:
/// ½ − e^(1/(2g))/(4g) (K₁ − K₀)(1/(2g)).
pub fn k_zero_term_bessel(g: f64) -> Result<f64> {
    let x = 0.5 / g;
    Ok(0.5 - 0.25 / g * (bessel_k1_scaled(x)? - bessel_k0_scaled(x)?))
}

/// m → ∞: δ₁ Σⱼ ½∫₀^∞ e^(−K/(x+ψ₁)) (1 − √(ax/(1+ax))) e^(−x) dx with
/// a = γ̄δ/(K+1).
pub fn aber_m_inf(params: &ChannelParams, modulation: &ModulationSpec) -> Result<AberResult> {
    let k = params.k_factor;
    assemble(modulation, Method::AsymptoticMInf, |d| {
        let psi1 = psi_pair(params, d)?.psi1;
        let a = 1.0 / psi1;
        let v = laguerre_adaptive(
            |x| {
                let root = (1.0 + a * x).sqrt();
                // 1 − √(ax/(1+ax)) without cancellation
                Ok((-k / (x + psi1)).exp() / (root * (root + (a * x).sqrt())))
            },
            &QuadTol::new(1e-300, 1e-10),
            "m → ∞ asymptote",
        )?;
        Ok(0.5 * v)
    })
}
