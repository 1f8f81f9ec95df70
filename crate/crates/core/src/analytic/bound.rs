use super::{aber, psi_pair, PsiPair, TruncationOrder};
use crate::channel::ChannelParams;
use crate::error::{domain, invalid, Error, Result};
use crate::modulation::ModulationSpec;
use crate::specfun::{ln_upper_inc_gamma, SeriesControl};

/// Upper bound on the ABER truncation error at `order`:
/// δ₁ Σⱼ ψ₁e^ψ₁/(4ψ₂^(m+N)) Γ(m−L, ψ₁) |₂F₁(½,1;2;ψ₁) − P_{L,N}(ψ₁)|,
/// where P is the matching partial sum of the coefficient series.
/// Requires ψ₁ < 1 for every term.
pub fn truncation_bound(params: &ChannelParams, modulation: &ModulationSpec, order: TruncationOrder) -> Result<f64> {
    bound_sum(params, modulation, order, false)
}

/// Same expression, continued to ψ₁ ≥ 1 by replacing ₂F₁(½,1;2;ψ₁) with
/// its principal branch 2(1 − i√(ψ₁−1))/ψ₁ and taking the modulus of the
/// difference. Identical to [`truncation_bound`] whenever that is defined.
pub fn truncation_bound_continued(
    params: &ChannelParams,
    modulation: &ModulationSpec,
    order: TruncationOrder,
) -> Result<f64> {
    bound_sum(params, modulation, order, true)
}

fn bound_sum(params: &ChannelParams, modulation: &ModulationSpec, order: TruncationOrder, continued: bool) -> Result<f64> {
    let mut total = 0.0;
    for &d in &modulation.delta2 {
        let psi = psi_pair(params, d)?;
        if !continued && !psi.in_domain() {
            return Err(domain(format!("truncation bound needs ψ₁ < 1, got {} for {modulation}", psi.psi1)));
        }
        total += term_bound(params.m, psi, order)?;
    }
    Ok(modulation.delta1 * total)
}

pub(crate) fn term_bound(m: f64, psi: PsiPair, order: TruncationOrder) -> Result<f64> {
    let gap = coefficient_gap(m, psi.psi1, order);
    if gap == 0.0 {
        return Ok(0.0);
    }
    let ln_pre = psi.psi1.ln() + psi.psi1 - 4f64.ln() - (m + order.n as f64) * psi.psi2.ln()
        + ln_upper_inc_gamma(m - order.l as f64, psi.psi1)?;
    Ok((ln_pre + gap.ln()).exp())
}

// |₂F₁(½,1;2;z) − Σ_{l≤L,n≤N} (½)_{l+n}(1−m)_l(m)_n/((2)_{l+n} l! n!) z^{l+n}|
fn coefficient_gap(m: f64, z: f64, order: TruncationOrder) -> f64 {
    // Closed form minus partial sum cancels to rounding noise once the tail
    // is far below one; sum the tail itself where it converges quickly.
    if z <= DIRECT_TAIL_MAX_Z {
        if let Some(t) = direct_tail(m, z, order) {
            return t.abs();
        }
    }
    let mut partial = 0.0;
    let mut row_head = 1.0;
    for l in 0..=order.l {
        let lf = l as f64;
        if l > 0 {
            let k = lf - 1.0;
            row_head *= (0.5 + k) * (1.0 - m + k) / ((2.0 + k) * lf) * z;
        }
        if row_head == 0.0 {
            break;
        }
        let mut c = row_head;
        for n in 0..=order.n {
            partial += c;
            let nf = n as f64;
            c *= (0.5 + lf + nf) * (m + nf) / ((2.0 + lf + nf) * (nf + 1.0)) * z;
        }
    }
    if z <= 1.0 {
        (2.0 / (1.0 + (1.0 - z).sqrt()) - partial).abs()
    } else {
        let re = 2.0 / z - partial;
        let im = 2.0 * (z - 1.0).sqrt() / z;
        re.hypot(im)
    }
}

/// Smallest square order L = N whose (continued) bound, relative to an ABER
/// estimate, meets `target`. The estimate comes from [`aber`].
pub fn auto_order(
    params: &ChannelParams,
    modulation: &ModulationSpec,
    target: f64,
    ctrl: &SeriesControl,
) -> Result<TruncationOrder> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(invalid(format!("target relative error must be finite and > 0, got {target}")));
    }
    let estimate = aber(params, modulation, ctrl, None)?.value;
    if !(estimate > 0.0) {
        return Err(domain("ABER estimate vanished; relative error undefined"));
    }
    for n in 0..=ctrl.max_terms {
        let order = TruncationOrder::square(n);
        let b = truncation_bound_continued(params, modulation, order)?;
        if b / estimate <= target {
            return Ok(order);
        }
    }
    Err(Error::NonConvergence { what: "order selection for the requested target", terms: ctrl.max_terms })
}

const DIRECT_TAIL_MAX_Z: f64 = 0.9;
const DIRECT_TAIL_CAP: usize = 20_000;

/// Σ over the coefficients outside the L × N rectangle, or `None` if the
/// sums do not settle within the cap.
fn direct_tail(m: f64, z: f64, order: TruncationOrder) -> Option<f64> {
    // Terms c_{l,n}; returns Σ_{n ≥ start} c_{l,n} given c_{l,0} = head.
    let row_from = |l: usize, head: f64, start: usize| -> Option<f64> {
        let lf = l as f64;
        let mut c = head;
        for n in 0..start {
            let nf = n as f64;
            c *= (0.5 + lf + nf) * (m + nf) / ((2.0 + lf + nf) * (nf + 1.0)) * z;
        }
        let mut sum = 0.0;
        for n in start..start + DIRECT_TAIL_CAP {
            sum += c;
            let nf = n as f64;
            let ratio = (0.5 + lf + nf) * (m + nf) / ((2.0 + lf + nf) * (nf + 1.0)) * z;
            c *= ratio;
            if ratio < 1.0 && c.abs() <= 1e-17 * sum.abs() {
                return Some(sum);
            }
            if c == 0.0 {
                return Some(sum);
            }
        }
        None
    };
    let mut tail = 0.0;
    let mut head = 1.0;
    for l in 0..order.l + DIRECT_TAIL_CAP {
        let lf = l as f64;
        if l > 0 {
            let k = lf - 1.0;
            head *= (0.5 + k) * (1.0 - m + k) / ((2.0 + k) * lf) * z;
        }
        if head == 0.0 {
            return Some(tail);
        }
        if l <= order.l {
            tail += row_from(l, head, order.n + 1)?;
        } else {
            let row = row_from(l, head, 0)?;
            tail += row;
            let k = lf;
            let head_ratio = ((0.5 + k) * (1.0 - m + k) / ((2.0 + k) * (k + 1.0)) * z).abs();
            if head_ratio < 1.0 && row.abs() <= 1e-17 * tail.abs() {
                return Some(tail);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::jq_series;
    use crate::modulation::{psk_coeffs, qam_coeffs};

    fn brute_gap(m: f64, z: f64, order: TruncationOrder) -> f64 {
        use crate::specfun::{gamma, pochhammer};
        let mut p = 0.0;
        for l in 0..=order.l {
            for n in 0..=order.n {
                p += pochhammer(0.5, l + n) * pochhammer(1.0 - m, l) * pochhammer(m, n)
                    / (pochhammer(2.0, l + n) * gamma(l as f64 + 1.0) * gamma(n as f64 + 1.0))
                    * z.powi((l + n) as i32);
            }
        }
        (2.0 / (1.0 + (1.0 - z).sqrt()) - p).abs()
    }

    #[test]
    fn gap_matches_direct_sum() {
        for &(m, z, l, n) in &[(0.5, 0.3, 2, 2), (2.5, 0.7, 4, 1), (3.5, 0.05, 0, 6)] {
            let o = TruncationOrder::new(l, n);
            let a = coefficient_gap(m, z, o);
            let b = brute_gap(m, z, o);
            assert!((a - b).abs() <= 1e-12 * b.max(1e-300), "{a} vs {b}");
        }
    }

    #[test]
    fn tiny_tail_is_resolved() {
        use crate::specfun::{gamma, pochhammer};
        // (l, n) = (11, 0) and (0, 11) lead the tail; the rest is O(z) smaller
        let (m, z) = (0.5, 1e-3_f64);
        let coeff = |l: usize, n: usize| {
            pochhammer(0.5, l + n) * pochhammer(1.0 - m, l) * pochhammer(m, n)
                / (pochhammer(2.0, l + n) * gamma(l as f64 + 1.0) * gamma(n as f64 + 1.0))
        };
        let lead = (coeff(11, 0) + coeff(0, 11)) * z.powi(11);
        let gap = coefficient_gap(m, z, TruncationOrder::square(10));
        assert!((gap / lead.abs() - 1.0).abs() < 1e-2, "{gap} vs {lead}");
    }

    #[test]
    fn bound_shrinks_with_order() {
        let p = ChannelParams::from_db(2.5, 5.0, 30.0).unwrap();
        let q = qam_coeffs(16).unwrap();
        let mut prev = f64::INFINITY;
        for n in 1..8 {
            let b = truncation_bound(&p, &q, TruncationOrder::square(n)).unwrap();
            assert!(b < prev && b >= 0.0);
            prev = b;
        }
    }

    #[test]
    fn continued_agrees_inside_domain() {
        let p = ChannelParams::from_db(1.5, 3.0, 25.0).unwrap();
        let q = psk_coeffs(8).unwrap();
        let o = TruncationOrder::new(2, 3);
        assert_eq!(truncation_bound(&p, &q, o).unwrap(), truncation_bound_continued(&p, &q, o).unwrap());
    }

    #[test]
    fn strict_bound_rejects_outside_domain() {
        let p = ChannelParams::from_db(0.5, 5.0, 20.0).unwrap();
        let q = qam_coeffs(64).unwrap();
        assert!(matches!(truncation_bound(&p, &q, TruncationOrder::square(1)), Err(Error::Domain(_))));
        assert!(truncation_bound_continued(&p, &q, TruncationOrder::square(1)).unwrap() > 0.0);
    }

    #[test]
    fn bound_dominates_for_m_above_one() {
        let p = ChannelParams::new(2.5, 2.0, 300.0).unwrap();
        let ctrl = SeriesControl::new(1e-11, 4000).unwrap();
        let exact = jq_series(&p, 1.0, &ctrl, None).unwrap().value;
        let psi = psi_pair(&p, 1.0).unwrap();
        for n in 1..6 {
            let o = TruncationOrder::square(n);
            let approx = jq_series(&p, 1.0, &ctrl, Some(o)).unwrap().value;
            let b = term_bound(2.5, psi, o).unwrap();
            assert!((exact - approx).abs() <= b, "N={n}: {} > {b}", (exact - approx).abs());
        }
    }

    #[test]
    fn auto_order_is_minimal() {
        let p = ChannelParams::from_db(2.5, 5.0, 20.0).unwrap();
        let q = qam_coeffs(64).unwrap();
        let ctrl = SeriesControl::default();
        let est = aber(&p, &q, &ctrl, None).unwrap().value;
        for target in [1e-2, 1e-3, 1e-5] {
            let o = auto_order(&p, &q, target, &ctrl).unwrap();
            assert_eq!(o.l, o.n);
            let rel = |n| truncation_bound_continued(&p, &q, TruncationOrder::square(n)).unwrap() / est;
            assert!(rel(o.n) <= target);
            assert!(o.n == 0 || rel(o.n - 1) > target);
        }
        assert!(auto_order(&p, &q, 0.5, &ctrl).unwrap().n <= 1);
        assert!(auto_order(&p, &q, -1.0, &ctrl).is_err());
    }
}
