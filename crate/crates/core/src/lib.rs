//! Average bit error rate of M-QAM and M-PSK over the fluctuating
//! double-Rayleigh with line-of-sight (fdRLoS) fading channel.
//!
//! The received field is S = ω₀√ξ e^{jφ} + ω₂G₂G₃ with ξ a unit-mean Gamma
//! variable and G₂, G₃ standard complex normal. The crate evaluates
//! ABER = δ₁ Σⱼ E[Q(√(2δ₂ⱼγ))] through a double series of one-dimensional
//! integrals, bounds its truncation error, provides closed-form asymptotes and
//! checks everything against brute-force quadrature and Monte Carlo.

pub mod analytic;
pub mod channel;
pub mod error;
pub mod modulation;
pub mod quad;
pub mod reference;
pub mod specfun;

pub use analytic::{
    aber, aber_high_snr, aber_k_inf, aber_k_zero, aber_m_half, aber_m_inf, aber_series_only,
    auto_order, jq_series, psi_pair, truncation_bound, AberResult, JqSeries, Method, PsiPair,
    TruncationOrder,
};
pub use channel::{ChannelParams, EnvelopeSample};
pub use error::{Error, Result};
pub use modulation::ModulationSpec;
pub use reference::{aber_montecarlo, aber_quadrature, compare_report, ComparisonTable, McEstimate};
pub use specfun::SeriesControl;

/// dB → linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Linear power ratio → dB.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
