//! fdRLoS channel: parameters, SNR densities, conditional MGF and the
//! physical-model sampler.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quad::{laguerre_adaptive, QuadTol};
use crate::specfun::ln_kummer_1f1_pos;

/// Shadowing shape m, Rician factor K (linear) and average SNR γ̄ (linear).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub m: f64,
    pub k_factor: f64,
    pub snr_avg: f64,
}

impl ChannelParams {
    pub fn new(m: f64, k_factor: f64, snr_avg: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(invalid(format!("m must be finite and > 0, got {m}")));
        }
        if !(k_factor >= 0.0 && k_factor.is_finite()) {
            return Err(invalid(format!("K must be finite and ≥ 0, got {k_factor}")));
        }
        if !(snr_avg > 0.0 && snr_avg.is_finite()) {
            return Err(invalid(format!("average SNR must be finite and > 0, got {snr_avg}")));
        }
        Ok(Self { m, k_factor, snr_avg })
    }

    /// K and γ̄ given in dB.
    pub fn from_db(m: f64, k_db: f64, snr_db: f64) -> Result<Self> {
        Self::new(m, crate::db_to_linear(k_db), crate::db_to_linear(snr_db))
    }

    pub fn with_m(self, m: f64) -> Result<Self> {
        Self::new(m, self.k_factor, self.snr_avg)
    }

    pub fn with_k(self, k_factor: f64) -> Result<Self> {
        Self::new(self.m, k_factor, self.snr_avg)
    }

    pub fn with_snr(self, snr_avg: f64) -> Result<Self> {
        Self::new(self.m, self.k_factor, snr_avg)
    }

    /// LoS power ω₀² = K/(K+1).
    pub fn omega0_sq(&self) -> f64 {
        self.k_factor / (self.k_factor + 1.0)
    }

    /// Diffuse power ω₂² = 1/(K+1).
    pub fn omega2_sq(&self) -> f64 {
        1.0 / (self.k_factor + 1.0)
    }

    pub fn conditional(&self, x: f64) -> Result<ConditionalContext> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(invalid(format!("conditioning variable x must be finite and > 0, got {x}")));
        }
        let k = self.k_factor;
        Ok(ConditionalContext { x, gamma_bar_x: (k + x) / (k + 1.0) * self.snr_avg, k_x: k / x })
    }
}

/// Quantities of the law of γ given |G₃|² = x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalContext {
    pub x: f64,
    pub gamma_bar_x: f64,
    pub k_x: f64,
}

/// One draw of the received field and its SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeSample {
    pub s_re: f64,
    pub s_im: f64,
    pub gamma: f64,
}

/// Density of γ conditioned on |G₃|² = x (a shadowed-Rician law).
pub fn conditional_pdf(params: &ChannelParams, x: f64, gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(invalid(format!("SNR must be ≥ 0, got {gamma}")));
    }
    let ctx = params.conditional(x)?;
    Ok(ln_conditional_pdf(params.m, &ctx, gamma)?.exp())
}

fn ln_conditional_pdf(m: f64, ctx: &ConditionalContext, gamma: f64) -> Result<f64> {
    let k = ctx.k_x;
    let g = ctx.gamma_bar_x;
    let head = m * (m / (m + k)).ln() + k.ln_1p() - g.ln();
    if gamma == 0.0 {
        return Ok(head);
    }
    let z = k * (1.0 + k) * gamma / ((k + m) * g);
    // e^(−(1+k)γ/γ̄ₓ)·₁F₁(m;1;z) = e^(−(1+k)mγ/((k+m)γ̄ₓ))·[₁F₁ e^(−z)]
    let damp = -(1.0 + k) * m * gamma / ((k + m) * g);
    let kummer = if z == 0.0 { 0.0 } else { ln_kummer_1f1_pos(m, 1.0, z)? - z };
    Ok(head + damp + kummer)
}

/// Unconditional SNR density f_γ(γ) = ∫₀^∞ f(γ | x) e^(−x) dx.
pub fn pdf(params: &ChannelParams, gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(invalid(format!("SNR must be finite and ≥ 0, got {gamma}")));
    }
    laguerre_adaptive(
        |x| {
            let ctx = params.conditional(x)?;
            Ok(ln_conditional_pdf(params.m, &ctx, gamma)?.exp())
        },
        // values far below 1/γ̄ never matter to an integral of the density
        &QuadTol::new(1e-30 / params.snr_avg, 1e-9),
        "SNR density",
    )
}

/// Conditional MGF E[e^(pγ) | x] for p < 0:
/// (1 − p·b)^(m−1) / (1 − p·b − p·Ω/m)^m with b = γ̄x/(K+1), Ω = γ̄K/(K+1).
pub fn conditional_mgf(params: &ChannelParams, x: f64, p: f64) -> Result<f64> {
    if !(p < 0.0) || !p.is_finite() {
        return Err(invalid(format!("MGF is evaluated for finite p < 0, got {p}")));
    }
    if !(x > 0.0 && x.is_finite()) {
        return Err(invalid(format!("conditioning variable x must be finite and > 0, got {x}")));
    }
    let m = params.m;
    let kp1 = params.k_factor + 1.0;
    let diffuse = params.snr_avg * x / kp1;
    let los = params.snr_avg * params.k_factor / kp1;
    let a = -p * diffuse;
    let ln = (m - 1.0) * a.ln_1p() - m * (a - p * los / m).ln_1p();
    Ok(ln.exp())
}

/// Draws envelopes S = ω₀√ξ e^{jφ} + ω₂G₂G₃.
#[derive(Debug, Clone)]
pub struct EnvelopeSampler {
    snr_avg: f64,
    omega0: f64,
    omega2: f64,
    shadow: Gamma<f64>,
}

impl EnvelopeSampler {
    pub fn new(params: &ChannelParams) -> Self {
        let shadow = Gamma::new(params.m, 1.0 / params.m).expect("validated shape and scale");
        Self {
            snr_avg: params.snr_avg,
            omega0: params.omega0_sq().sqrt(),
            omega2: params.omega2_sq().sqrt(),
            shadow,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> EnvelopeSample {
        let xi: f64 = self.shadow.sample(rng);
        let phi: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let g2 = (h * rng.sample::<f64, _>(StandardNormal), h * rng.sample::<f64, _>(StandardNormal));
        let g3 = (h * rng.sample::<f64, _>(StandardNormal), h * rng.sample::<f64, _>(StandardNormal));
        let amp = self.omega0 * xi.sqrt();
        let (sin, cos) = phi.sin_cos();
        let s_re = amp * cos + self.omega2 * (g2.0 * g3.0 - g2.1 * g3.1);
        let s_im = amp * sin + self.omega2 * (g2.0 * g3.1 + g2.1 * g3.0);
        EnvelopeSample { s_re, s_im, gamma: self.snr_avg * (s_re * s_re + s_im * s_im) }
    }
}

/// One envelope draw; see [`EnvelopeSampler`] for repeated sampling.
pub fn sample_envelope<R: Rng + ?Sized>(params: &ChannelParams, rng: &mut R) -> EnvelopeSample {
    EnvelopeSampler::new(params).sample(rng)
}

/// Average SNR in dB after path loss: γ̄_tr + 10·log₁₀(χ·(d₀/d)^α).
pub fn snr_from_distance(snr_tx_db: f64, chi: f64, d0: f64, d: f64, alpha: f64) -> Result<f64> {
    for (name, v) in [("chi", chi), ("d0", d0), ("d", d)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(format!("{name} must be finite and > 0, got {v}")));
        }
    }
    if !snr_tx_db.is_finite() || !alpha.is_finite() {
        return Err(invalid("transmit SNR and path-loss exponent must be finite"));
    }
    Ok(snr_tx_db + 10.0 * chi.log10() + 10.0 * alpha * (d0 / d).log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, integrate_to_inf};
    use crate::specfun::bessel_k0;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs()
    }

    fn moment(params: &ChannelParams, x: f64, power: i32) -> f64 {
        let ctx = params.conditional(x).unwrap();
        let tol = QuadTol::new(0.0, 1e-12);
        integrate_to_inf(
            |g| g.powi(power) * conditional_pdf(params, x, g).unwrap(),
            0.0,
            ctx.gamma_bar_x,
            &tol,
        )
        .value
    }

    #[test]
    fn params_validation() {
        assert!(ChannelParams::new(0.0, 1.0, 1.0).is_err());
        assert!(ChannelParams::new(1.0, -1.0, 1.0).is_err());
        assert!(ChannelParams::new(1.0, 1.0, 0.0).is_err());
        assert!(ChannelParams::new(1.0, f64::INFINITY, 1.0).is_err());
        let p = ChannelParams::new(0.5, 3.0, 10.0).unwrap();
        assert!(close(p.omega0_sq() + p.omega2_sq(), 1.0, 1e-15));
        let q = ChannelParams::from_db(2.0, 10.0, 20.0).unwrap();
        assert!(close(q.k_factor, 10.0, 1e-15) && close(q.snr_avg, 100.0, 1e-15));
    }

    #[test]
    fn conditional_collapses_without_los() {
        let p = ChannelParams::new(2.0, 0.0, 5.0).unwrap();
        let (x, g) = (1.3f64, 2.0f64);
        let want = (-g / (x * 5.0)).exp() / (x * 5.0);
        assert!(close(conditional_pdf(&p, x, g).unwrap(), want, 1e-14));
        assert!(conditional_pdf(&p, 0.0, g).is_err());
        assert!(conditional_pdf(&p, 1.0, -1.0).is_err());
    }

    #[test]
    fn conditional_normalized() {
        let p = ChannelParams::new(0.7, 3.16, 100.0).unwrap();
        assert!(close(moment(&p, 0.5, 0), 1.0, 1e-8));
    }

    #[test]
    fn conditional_mean() {
        // E[γ | x] = γ̄ₓ: LoS power K/(K+1)γ̄ plus diffuse xγ̄/(K+1).
        let p = ChannelParams::new(2.5, 1.0, 10.0).unwrap();
        let ctx = p.conditional(1.0).unwrap();
        assert!(close(moment(&p, 1.0, 1), ctx.gamma_bar_x, 1e-9));
    }

    #[test]
    fn double_rayleigh_closed_form() {
        let p = ChannelParams::new(1.3, 0.0, 10.0).unwrap();
        for &g in &[0.1, 1.0, 10.0] {
            let want = 2.0 / 10.0 * bessel_k0(2.0 * (g / 10.0f64).sqrt()).unwrap();
            let got = pdf(&p, g).unwrap();
            assert!(close(got, want, 1e-6), "γ={g}: {got} vs {want}");
        }
    }

    #[test]
    fn pdf_normalization_and_mean() {
        let p = ChannelParams::new(0.5, 1.0, 100.0).unwrap();
        let tol = QuadTol::new(1e-14, 1e-9);
        let f = |t: f64| pdf(&p, 100.0 * t).unwrap() * 100.0;
        let mass = integrate(f, 0.0, 1.0, &tol).value + integrate_to_inf(f, 1.0, 1.0, &tol).value;
        assert!((mass - 1.0).abs() < 1e-6, "mass {mass}");
        let g = |t: f64| t * pdf(&p, 100.0 * t).unwrap() * 100.0;
        let mean = integrate(g, 0.0, 1.0, &tol).value + integrate_to_inf(g, 1.0, 1.0, &tol).value;
        assert!((mean - 1.0).abs() < 1e-5, "mean {mean}");
    }

    #[test]
    fn mgf_matches_laplace_transform() {
        let p = ChannelParams::new(1.8, 2.0, 20.0).unwrap();
        let (x, s) = (0.7, -0.3);
        let ctx = p.conditional(x).unwrap();
        let lt = integrate_to_inf(
            |g| (s * g).exp() * conditional_pdf(&p, x, g).unwrap(),
            0.0,
            ctx.gamma_bar_x.min(1.0 / -s),
            &QuadTol::new(0.0, 1e-12),
        )
        .value;
        assert!(close(conditional_mgf(&p, x, s).unwrap(), lt, 1e-8));
    }

    #[test]
    fn mgf_exponential_limit_and_decay() {
        let p = ChannelParams::new(3.0, 0.0, 5.0).unwrap();
        assert!(close(conditional_mgf(&p, 2.0, -0.1).unwrap(), 0.5, 1e-15));
        let q = ChannelParams::new(0.8, 4.0, 30.0).unwrap();
        let mut last = 1.0;
        for i in 1..40 {
            let v = conditional_mgf(&q, 0.6, -(i as f64) * 0.25).unwrap();
            assert!(v < last && v > 0.0);
            last = v;
        }
        assert!(conditional_mgf(&q, 0.6, 0.0).is_err());
        assert!(conditional_mgf(&q, 0.6, 0.1).is_err());
    }

    #[test]
    fn sampler_is_deterministic() {
        let p = ChannelParams::new(0.5, 1.0, 10.0).unwrap();
        let s = EnvelopeSampler::new(&p);
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let (x, y) = (s.sample(&mut a), s.sample(&mut b));
            assert_eq!(x.s_re.to_bits(), y.s_re.to_bits());
            assert_eq!(x.s_im.to_bits(), y.s_im.to_bits());
            assert_eq!(x.gamma.to_bits(), y.gamma.to_bits());
        }
        let mut c = ChaCha8Rng::seed_from_u64(7);
        let one = sample_envelope(&p, &mut c);
        assert_eq!(one.gamma.to_bits(), s.sample(&mut ChaCha8Rng::seed_from_u64(7)).gamma.to_bits());
    }

    #[test]
    fn sampler_unit_power() {
        let p = ChannelParams::new(0.5, 1.0, 1.0).unwrap();
        let s = EnvelopeSampler::new(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let mean = (0..n).map(|_| s.sample(&mut rng).gamma).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.005, "mean {mean}");
    }

    #[test]
    fn sampler_strong_los_variance() {
        let p = ChannelParams::new(2.0, 1e6, 1.0).unwrap();
        let s = EnvelopeSampler::new(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 1_000_000;
        let draws: Vec<f64> = (0..n).map(|_| s.sample(&mut rng).gamma).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var - 0.5).abs() < 0.05 * 0.5, "var {var}");
    }

    #[test]
    fn path_loss() {
        assert_eq!(snr_from_distance(37.0, 1.0, 5.0, 5.0, 3.0).unwrap(), 37.0);
        assert!(close(snr_from_distance(50.0, 1.0, 1.0, 10.0, 2.0).unwrap(), 30.0, 1e-15));
        let v = snr_from_distance(40.0, 0.5, 1.0, 3.16228, 3.5).unwrap();
        assert!((v - 19.49).abs() < 0.01, "{v}");
        assert!(snr_from_distance(40.0, 0.5, 1.0, 0.0, 3.5).is_err());
        assert!(snr_from_distance(40.0, 0.0, 1.0, 1.0, 3.5).is_err());
        assert!(snr_from_distance(40.0, 1.0, -1.0, 1.0, 3.5).is_err());
    }
}
