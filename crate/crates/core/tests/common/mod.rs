#![allow(dead_code)]

use fdrlos::channel::{pdf, sample_envelope};
use fdrlos::quad::{gauss_legendre, integrate, integrate_to_inf, QuadTol};
use fdrlos::ChannelParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// ∫ f and ∫ γ f over (0, ∞), split at γ̄.
pub fn pdf_mass_and_mean(p: &ChannelParams) -> (f64, f64) {
    let tol = QuadTol::new(1e-13, 1e-10);
    let g = p.snr_avg;
    let density = |t: f64| pdf(p, g * t).unwrap() * g;
    let mass = integrate(density, 0.0, 1.0, &tol).value + integrate_to_inf(density, 1.0, 1.0, &tol).value;
    let first = |t: f64| t * density(t);
    let mean = g * (integrate(first, 0.0, 1.0, &tol).value + integrate_to_inf(first, 1.0, 1.0, &tol).value);
    (mass, mean)
}

/// Sorted SNR draws from the physical model.
pub fn sorted_draws(p: &ChannelParams, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| sample_envelope(p, &mut rng).gamma).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Upper bound on the Kolmogorov–Smirnov distance between the empirical law
/// of `sorted` and the density. The model CDF is evaluated at every
/// `stride`-th order statistic; between two such knots both CDFs are
/// monotone, so the gap is bounded by the cross differences at the knots.
pub fn ks_distance_bound(p: &ChannelParams, sorted: &[f64], stride: usize) -> f64 {
    let n = sorted.len();
    let knots: Vec<usize> = (stride - 1..n).step_by(stride).chain(std::iter::once(n - 1)).collect();
    let rule = gauss_legendre(10);
    let tol = QuadTol::new(1e-14, 1e-10);
    let mut cdf = Vec::with_capacity(knots.len());
    let mut acc = integrate(|g| pdf(p, g).unwrap(), 0.0, sorted[knots[0]], &tol).value;
    cdf.push(acc);
    for w in knots.windows(2) {
        let (a, b) = (sorted[w[0]], sorted[w[1]]);
        if b > a {
            let h = 0.5 * (b - a);
            acc += h * rule.apply(|u| pdf(p, a + h * (u + 1.0)).unwrap());
        }
        cdf.push(acc);
    }
    let ecdf = |i: usize| (i + 1) as f64 / n as f64;
    let mut d: f64 = ecdf(knots[0]).max(cdf[0]);
    for (j, w) in knots.windows(2).enumerate() {
        // on (x_a, x_b]: ECDF ∈ [ecdf(a), ecdf(b)], CDF ∈ [cdf_a, cdf_b]
        d = d.max(ecdf(w[1]) - cdf[j]).max(cdf[j + 1] - ecdf(w[0]));
    }
    d.max(1.0 - cdf[cdf.len() - 1])
}
