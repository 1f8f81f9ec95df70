use super::gamma::{gamma_ratio, is_nonpositive_integer, ln_gamma};
use super::gauss::gauss_2f1_with;
use super::SeriesControl;
use crate::error::{domain, invalid, Error, Result};
use crate::quad::{integrate, QuadTol};

const NEAR_BOUNDARY: f64 = 0.98;

/// Appell hypergeometric function F₁(a; b₁, b₂; c; z₁, z₂).
///
/// Reductions are applied for coinciding arguments, vanishing b's and
/// z₁ = 1 or z₂ = 1; otherwise the double series is summed for
/// max(|z₁|, |z₂|) ≤ 0.98 and the Euler integral (c > a > 0) is used closer
/// to the boundary.
///
/// ```
/// use fdrlos::specfun::{appell_f1, gauss_2f1};
/// let m = 1.7;
/// let f1 = appell_f1(0.5, 1.0 - m, m, 2.0, 0.3, 0.3).unwrap();
/// let f = gauss_2f1(0.5, 1.0, 2.0, 0.3).unwrap();
/// assert!((f1 - f).abs() < 1e-13);
/// ```
pub fn appell_f1(a: f64, b1: f64, b2: f64, c: f64, z1: f64, z2: f64) -> Result<f64> {
    let args = [a, b1, b2, c, z1, z2];
    if args.iter().any(|v| !v.is_finite()) {
        return Err(invalid("F₁ needs finite arguments"));
    }
    if is_nonpositive_integer(c) {
        return Err(invalid(format!("F₁ undefined for c = {c}")));
    }
    let ctrl = SeriesControl::PRECISE;
    if z1 == 0.0 && z2 == 0.0 {
        return Ok(1.0);
    }
    if b1 == 0.0 || z1 == 0.0 {
        return gauss_2f1_with(a, b2, c, z2, &ctrl);
    }
    if b2 == 0.0 || z2 == 0.0 {
        return gauss_2f1_with(a, b1, c, z1, &ctrl);
    }
    if z1 == z2 {
        return gauss_2f1_with(a, b1 + b2, c, z1, &ctrl);
    }
    if z1 == 1.0 {
        return unit_argument(a, b1, b2, c, z2);
    }
    if z2 == 1.0 {
        return unit_argument(a, b2, b1, c, z1);
    }
    if z1.abs() >= 1.0 || z2.abs() >= 1.0 {
        return Err(domain(format!("F₁ series needs |z₁|, |z₂| < 1, got ({z1}, {z2})")));
    }
    if z1.abs().max(z2.abs()) <= NEAR_BOUNDARY {
        return double_series(a, b1, b2, c, z1, z2, &ctrl);
    }
    euler_integral(a, b1, b2, c, z1, z2)
}

// F₁(a; b₁, b₂; c; 1, z) = Γ(c)Γ(c−a−b₁)/(Γ(c−a)Γ(c−b₁)) ₂F₁(a, b₂; c−b₁; z)
fn unit_argument(a: f64, b1: f64, b2: f64, c: f64, z: f64) -> Result<f64> {
    if !(c - a - b1 > 0.0) {
        return Err(domain(format!("F₁ at unit argument needs c − a − b₁ > 0, got {}", c - a - b1)));
    }
    let pre = gamma_ratio(&[c, c - a - b1], &[c - a, c - b1]);
    if pre == 0.0 {
        return Ok(0.0);
    }
    Ok(pre * gauss_2f1_with(a, b2, c - b1, z, &SeriesControl::PRECISE)?)
}

// Σᵢ (a)ᵢ(b₁)ᵢ/((c)ᵢ i!) z₁ⁱ ₂F₁(a+i, b₂; c+i; z₂)
pub(crate) fn double_series(
    a: f64,
    b1: f64,
    b2: f64,
    c: f64,
    z1: f64,
    z2: f64,
    ctrl: &SeriesControl,
) -> Result<f64> {
    let mut coef = 1.0;
    let mut sum = 0.0;
    let mut small = 0;
    for i in 0..ctrl.max_terms {
        let fi = i as f64;
        let inner = gauss_2f1_with(a + fi, b2, c + fi, z2, ctrl)?;
        let term = coef * inner;
        sum += term;
        coef *= (a + fi) * (b1 + fi) / ((c + fi) * (fi + 1.0)) * z1;
        if coef == 0.0 {
            return Ok(sum);
        }
        let ratio = ((a + fi + 1.0) * (b1 + fi + 1.0) / ((c + fi + 1.0) * (fi + 2.0)) * z1).abs();
        if ratio < 1.0 && term.abs() <= ctrl.rel_tol * sum.abs() * (1.0 - ratio) {
            small += 1;
            if small >= 2 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NonConvergence { what: "F₁ double series", terms: ctrl.max_terms })
}

// Γ(c)/(Γ(a)Γ(c−a)) ∫₀¹ t^(a−1)(1−t)^(c−a−1)(1−z₁t)^(−b₁)(1−z₂t)^(−b₂) dt with
// t = sin²θ to soften the endpoint powers.
pub(crate) fn euler_integral(a: f64, b1: f64, b2: f64, c: f64, z1: f64, z2: f64) -> Result<f64> {
    if !(c > a && a > 0.0) {
        return Err(domain(format!("F₁ near the boundary needs c > a > 0, got a = {a}, c = {c}")));
    }
    let pre = (ln_gamma(c) - ln_gamma(a) - ln_gamma(c - a)).exp();
    let est = integrate(
        |th: f64| {
            let (s, co) = th.sin_cos();
            let t = s * s;
            2.0 * s.powf(2.0 * a - 1.0)
                * co.powf(2.0 * (c - a) - 1.0)
                * (1.0 - z1 * t).powf(-b1)
                * (1.0 - z2 * t).powf(-b2)
        },
        0.0,
        std::f64::consts::FRAC_PI_2,
        &QuadTol::new(0.0, 1e-13).with_limit(4000),
    );
    Ok(pre * est.checked("F₁ Euler integral")?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{gamma, gauss_2f1};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs()
    }

    #[test]
    fn origin_is_one() {
        assert_eq!(appell_f1(0.5, 1.0 - 2.3, 2.3, 2.0, 0.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn unit_argument_reference() {
        let m = 2.5;
        let w = 0.4;
        let want = 2.0 / std::f64::consts::PI.sqrt() * gamma(m + 0.5) / gamma(m + 1.0)
            * gauss_2f1(0.5, m, m + 1.0, w).unwrap();
        assert!(close(want, 0.807_554_875_200_305_6, 1e-13));
        let got = appell_f1(0.5, 1.0 - m, m, 2.0, 1.0, w).unwrap();
        assert!(close(got, want, 1e-13));
        // approaching from inside: the offset 1e-6 moves the value by O(1e-6)
        let near = appell_f1(0.5, 1.0 - m, m, 2.0, 1.0 - 1e-6, w).unwrap();
        assert!(close(near, want, 1e-5));
    }

    #[test]
    fn reductions_on_grid() {
        let ctrl = SeriesControl { rel_tol: 1e-14, max_terms: 100_000 };
        for &m in &[0.6, 1.0, 2.5, 5.0] {
            for &z in &[0.1, 0.5, 0.9] {
                // equal arguments, summed as a genuine double series
                let series = double_series(0.5, 1.0 - m, m, 2.0, z, z, &ctrl).unwrap();
                let reduced = gauss_2f1(0.5, 1.0, 2.0, z).unwrap();
                assert!(close(series, reduced, 1e-8), "m={m} z={z}: {series} vs {reduced}");
                let integral = euler_integral(0.5, 1.0 - m, m, 2.0, z, z).unwrap();
                assert!(close(integral, reduced, 1e-8));
                // unit first argument against the integral just inside
                let unit = appell_f1(0.5, 1.0 - m, m, 2.0, 1.0, z).unwrap();
                let inside = euler_integral(0.5, 1.0 - m, m, 2.0, 1.0 - 1e-10, z).unwrap();
                assert!(close(unit, inside, 1e-8), "m={m} z={z}: {unit} vs {inside}");
            }
        }
    }

    #[test]
    fn series_matches_integral_inside() {
        let ctrl = SeriesControl { rel_tol: 1e-14, max_terms: 100_000 };
        for &(b1, b2, z1, z2) in &[(-0.7, 1.7, 0.3, 0.6), (0.4, 1.3, -0.5, 0.7), (-1.5, 2.5, 0.95, 0.5)] {
            let s = double_series(0.5, b1, b2, 2.0, z1, z2, &ctrl).unwrap();
            let q = euler_integral(0.5, b1, b2, 2.0, z1, z2).unwrap();
            assert!(close(s, q, 1e-10), "{s} vs {q}");
        }
    }

    #[test]
    fn domain_checks() {
        assert!(appell_f1(0.5, 0.3, 0.4, 2.0, 1.2, 0.1).is_err());
        assert!(appell_f1(0.5, 0.3, 0.4, 0.0, 0.1, 0.1).is_err());
        // near boundary without c > a > 0
        assert!(appell_f1(2.5, 0.3, 0.4, 2.0, 0.99, 0.1).is_err());
    }
}
