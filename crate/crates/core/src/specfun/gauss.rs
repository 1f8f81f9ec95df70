use super::gamma::{gamma_ratio, is_nonpositive_integer};
use super::SeriesControl;
use crate::error::{domain, invalid, Error, Result};

/// Gauss hypergeometric function ₂F₁(a, b; c; z) for real z < 1.
///
/// ```
/// use fdrlos::specfun::gauss_2f1;
/// // ₂F₁(1/2, 1; 2; z) = 2/z·(1 − √(1−z))
/// let v = gauss_2f1(0.5, 1.0, 2.0, 0.5).unwrap();
/// assert!((v - 4.0 * (1.0 - 0.5f64.sqrt())).abs() < 1e-14);
/// ```
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    gauss_2f1_with(a, b, c, z, &SeriesControl::PRECISE)
}

pub fn gauss_2f1_with(a: f64, b: f64, c: f64, z: f64, ctrl: &SeriesControl) -> Result<f64> {
    ctrl.validate()?;
    if !(a.is_finite() && b.is_finite() && c.is_finite() && z.is_finite()) {
        return Err(invalid("₂F₁ needs finite arguments"));
    }
    if is_nonpositive_integer(c) {
        return Err(invalid(format!("₂F₁ undefined for c = {c}")));
    }
    if z >= 1.0 {
        return Err(domain(format!("₂F₁ evaluated only for z < 1, got {z}")));
    }
    if z == 0.0 || a == 0.0 || b == 0.0 {
        return Ok(1.0);
    }
    if is_nonpositive_integer(a) || is_nonpositive_integer(b) || z.abs() <= 0.5 {
        return series(a, b, c, z, ctrl);
    }
    if z < -0.5 {
        // Pfaff: (1−z)^(−a) ₂F₁(a, c−b; c; z/(z−1)), argument now in (1/3, 1).
        let w = z / (z - 1.0);
        return Ok((1.0 - z).powf(-a) * gauss_2f1_with(a, c - b, c, w, ctrl)?);
    }
    if let Some(v) = one_minus_z(a, b, c, z, ctrl)? {
        return Ok(v);
    }
    series(a, b, c, z, ctrl)
}

// Connection to argument 1−z; None when c−a−b is (nearly) an integer or the
// two branches cancel badly.
fn one_minus_z(a: f64, b: f64, c: f64, z: f64, ctrl: &SeriesControl) -> Result<Option<f64>> {
    let s = c - a - b;
    if (s - s.round()).abs() < 1e-6 {
        return Ok(None);
    }
    let w = 1.0 - z;
    let g1 = gamma_ratio(&[c, s], &[c - a, c - b]);
    let g2 = gamma_ratio(&[c, -s], &[a, b]);
    let t1 = if g1 == 0.0 { 0.0 } else { g1 * series(a, b, 1.0 - s, w, ctrl)? };
    let t2 = if g2 == 0.0 { 0.0 } else { w.powf(s) * g2 * series(c - a, c - b, 1.0 + s, w, ctrl)? };
    let v = t1 + t2;
    if !v.is_finite() || t1.abs() + t2.abs() > 1e4 * v.abs() {
        return Ok(None);
    }
    Ok(Some(v))
}

fn series(a: f64, b: f64, c: f64, z: f64, ctrl: &SeriesControl) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut small = 0;
    for k in 0..ctrl.max_terms {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        let ratio = ((a + kf + 1.0) * (b + kf + 1.0) / ((c + kf + 1.0) * (kf + 2.0)) * z).abs();
        if ratio < 1.0 && term.abs() <= ctrl.rel_tol * sum.abs() * (1.0 - ratio) {
            small += 1;
            if small >= 2 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NonConvergence { what: "₂F₁ series", terms: ctrl.max_terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, QuadTol};
    use crate::specfun::ln_gamma;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs()
    }

    // 2/z·(1 − √(1−z)) with the cancellation removed
    fn half_one_two(z: f64) -> f64 {
        2.0 / (1.0 + (1.0 - z).sqrt())
    }

    #[test]
    fn closed_forms() {
        assert_eq!(gauss_2f1(0.3, 0.4, 1.5, 0.0).unwrap(), 1.0);
        assert!(close(gauss_2f1(0.5, 1.0, 2.0, 0.5).unwrap(), 1.171_572_875_253_809_9, 1e-14));
        let z = 3.0f64;
        let want = 2.0 / z * (1.0 - 1.0 / (1.0 + z).sqrt());
        assert!(close(gauss_2f1(1.5, 1.0, 2.0, -z).unwrap(), want, 1e-14));
        assert!(close(want, 1.0 / 3.0, 1e-15));
    }

    #[test]
    fn reference_values() {
        let cases = [
            (0.5, 1.0, 2.0, 0.3, 1.088_933_156_439_496_3),
            (0.7, 1.3, 2.2, 0.8, 1.757_081_869_774_693_2),
            (0.7, 1.3, 2.2, -3.0, 0.523_592_387_721_764_5),
            (0.5, 2.5, 3.5, 0.95, 2.108_739_718_722_299_8),
            (0.5, 1.0, 2.0, 0.999, 1.938_693_139_936_568_9),
            (-3.0, 1.5, 2.0, 0.7, 0.156_171_875),
        ];
        for (a, b, c, z, want) in cases {
            let got = gauss_2f1(a, b, c, z).unwrap();
            assert!(close(got, want, 1e-12), "2F1({a},{b};{c};{z}) = {got}, want {want}");
        }
    }

    #[test]
    fn large_parameter_falls_back_to_series() {
        // ₂F₁(1/2, m; m+1; w) with huge m: the 1−z connection cancels.
        let m = 1e4;
        let w = 0.95;
        let v = gauss_2f1(0.5, m, m + 1.0, w).unwrap();
        let direct = series(0.5, m, m + 1.0, w, &SeriesControl::PRECISE).unwrap();
        assert!(close(v, direct, 1e-13));
        assert!(v.is_finite() && v > 1.0);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(gauss_2f1(0.5, 1.0, 2.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(gauss_2f1(0.5, 1.0, 2.0, 1.5), Err(Error::Domain(_))));
        assert!(gauss_2f1(0.5, 1.0, -1.0, 0.2).is_err());
    }

    // Euler integral, c > b > 0.
    fn euler(a: f64, b: f64, c: f64, z: f64) -> f64 {
        let pre = (ln_gamma(c) - ln_gamma(b) - ln_gamma(c - b)).exp();
        let est = integrate(
            |th: f64| {
                let (s, co) = th.sin_cos();
                let t = s * s;
                2.0 * s.powf(2.0 * b - 1.0) * co.powf(2.0 * (c - b) - 1.0) * (1.0 - z * t).powf(-a)
            },
            0.0,
            std::f64::consts::FRAC_PI_2,
            &QuadTol::new(0.0, 1e-13),
        );
        pre * est.value
    }

    #[test]
    fn matches_integral_oracle() {
        let ctrl = SeriesControl { rel_tol: 1e-12, max_terms: 100_000 };
        for &(a, b, c) in &[(0.5, 1.0, 2.0), (0.7, 0.6, 2.2), (1.5, 0.5, 1.5), (0.5, 2.5, 3.5)] {
            for &z in &[-5.0, -0.8, -0.2, 0.3, 0.6, 0.9, 0.98] {
                let s = gauss_2f1_with(a, b, c, z, &ctrl).unwrap();
                let q = euler(a, b, c, z);
                assert!(close(s, q, 1e-9), "({a},{b},{c},{z}): {s} vs {q}");
            }
        }
    }

    proptest! {
        #[test]
        fn half_one_two_closed_form(z in -20.0f64..0.9999) {
            prop_assume!(z.abs() > 1e-9);
            let v = gauss_2f1(0.5, 1.0, 2.0, z).unwrap();
            prop_assert!(close(v, half_one_two(z), 1e-12), "z={z}: {v} vs {}", half_one_two(z));
        }
    }
}
