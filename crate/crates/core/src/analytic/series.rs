//! The double series
//!   J_Q = Σ_l Σ_n (1/2)_{l+n}(1−m)_l(m)_n / ((2)_{l+n} l! n!) · ψ₁^{l+n+1} J₁(l, n) / 4.
//!
//! Terms are evaluated a row (fixed l) at a time: one vector quadrature
//! returns a whole run of n values. The adaptive sum walks anti-diagonals
//! l + n = d; for small K the rectangular partial sums diverge even though
//! the anti-diagonal ones converge.

use super::{psi_pair, JqSeries, PsiPair, TruncationOrder};
use crate::channel::ChannelParams;
use crate::error::{invalid, Error, Result};
use crate::quad::{integrate_vec, laguerre_adaptive, QuadTol};
use crate::specfun::SeriesControl;

const TERM_TOL: f64 = 1e-11;
const ROW_TOL: QuadTol = QuadTol::new(1e-17, TERM_TOL).with_limit(800);
const MIN_SEGMENT: usize = 16;
const J1_TOL: QuadTol = QuadTol::new(1e-300, 1e-10);
const MAX_FIXED_TERMS: usize = 50_000_000;

/// J₁(l, n) = ∫₀^∞ (ψ₁+x)^(m−l−1) (ψ₂+x)^(−m−n) e^(−x) dx.
///
/// ```
/// use fdrlos::analytic::{j1_integral, PsiPair};
/// // K = 0, l = n = 0: e^ψ E₁(ψ)
/// let v = j1_integral(1.3, 0, 0, PsiPair { psi1: 0.2, psi2: 0.2 }).unwrap();
/// assert!((v - 1.493_348_746_932_24).abs() < 1e-9);
/// ```
pub fn j1_integral(m: f64, l: usize, n: usize, psi: PsiPair) -> Result<f64> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(invalid(format!("m must be finite and > 0, got {m}")));
    }
    if !(psi.psi1 > 0.0 && psi.psi2 >= psi.psi1 && psi.psi2.is_finite()) {
        return Err(invalid(format!("need 0 < ψ₁ ≤ ψ₂, got {psi:?}")));
    }
    let a = m - l as f64 - 1.0;
    let b = m + n as f64;
    laguerre_adaptive(|x| Ok((a * (psi.psi1 + x).ln() - b * (psi.psi2 + x).ln()).exp()), &J1_TOL, "J₁ integral")
}

/// One J_Q term. `order = None` sums anti-diagonals until the estimated tail
/// falls below `ctrl.rel_tol`; a fixed order sums the rectangle l ≤ L, n ≤ N.
pub fn jq_series(
    params: &ChannelParams,
    delta2j: f64,
    ctrl: &SeriesControl,
    order: Option<TruncationOrder>,
) -> Result<JqSeries> {
    ctrl.validate()?;
    let psi = psi_pair(params, delta2j)?;
    let in_domain = psi.in_domain();
    match order {
        None => {
            if !in_domain {
                log::warn!("ψ₁ = {} ≥ 1: the series converges only algebraically", psi.psi1);
            }
            let mut engine = Rows::new(params.m, psi, true);
            let (value, terms, diagonal) = sum_anti_diagonals(&mut engine, ctrl)?;
            Ok(JqSeries { value, terms, converged: true, in_domain, diagonal: Some(diagonal), psi })
        }
        Some(o) => {
            if (o.l + 1).saturating_mul(o.n + 1) > MAX_FIXED_TERMS {
                return Err(invalid(format!("truncation order {}×{} is too large", o.l, o.n)));
            }
            let mut engine = Rows::new(params.m, psi, false);
            let (value, terms, edge) = sum_rectangle(&mut engine, o)?;
            let converged = in_domain && edge <= ctrl.rel_tol * value.abs();
            Ok(JqSeries { value, terms, converged, in_domain, diagonal: None, psi })
        }
    }
}

struct Row {
    sign: f64,
    ln_coef: f64,
    mags: Vec<f64>,
    closed: bool,
}

/// Lazily computed |terms| of the series, row by row.
struct Rows {
    m: f64,
    psi: PsiPair,
    v_max: f64,
    rows: Vec<Row>,
    zero_from: Option<usize>,
    prune: bool,
}

impl Rows {
    fn new(m: f64, psi: PsiPair, prune: bool) -> Self {
        // x = ψ₁(e^v − 1); beyond x ≈ 60 + 4m the e^(−x) factor has won.
        let v_max = ((60.0 + 4.0 * m) / psi.psi1).ln_1p();
        Self { m, psi, v_max, rows: Vec::new(), zero_from: None, prune }
    }

    /// Whether row l vanishes identically ((1−m)_l = 0).
    fn is_zero(&mut self, l: usize) -> bool {
        while self.rows.len() <= l && self.zero_from.is_none() {
            self.push_row();
        }
        self.zero_from.is_some_and(|z| l >= z)
    }

    fn push_row(&mut self) {
        let l = self.rows.len();
        let (sign, ln_coef) = match self.rows.last() {
            None => (1.0, 0.0),
            Some(prev) => {
                let k = (l - 1) as f64;
                let f = 1.0 - self.m + k;
                if f == 0.0 {
                    self.zero_from = Some(l);
                    return;
                }
                let step = ((0.5 + k) * f.abs() / ((2.0 + k) * l as f64)).ln();
                (prev.sign * f.signum(), prev.ln_coef + step)
            }
        };
        self.rows.push(Row { sign, ln_coef, mags: Vec::new(), closed: false });
    }

    /// Signed term (l, n); terms in a closed row beyond its length are 0.
    fn term(&mut self, l: usize, n: usize, floor: f64) -> Result<f64> {
        if self.is_zero(l) {
            return Ok(0.0);
        }
        loop {
            let row = &self.rows[l];
            if n < row.mags.len() {
                return Ok(row.sign * row.mags[n]);
            }
            if row.closed {
                return Ok(0.0);
            }
            let len = row.mags.len();
            self.extend(l, (2 * len).max(n + 1).max(MIN_SEGMENT))?;
            let m = self.m;
            let row = &mut self.rows[l];
            let k = row.mags.len();
            // far enough out that the ψ₁/(ψ₂+x) decay dominates the
            // coefficient growth, and already negligible
            if self.prune && (k as f64) > 2.0 * m + 8.0 && row.mags[k - 1] <= row.mags[k - 2] && row.mags[k - 1] < floor {
                row.closed = true;
            }
        }
    }

    fn extend(&mut self, l: usize, new_len: usize) -> Result<()> {
        let m = self.m;
        let PsiPair { psi1, psi2 } = self.psi;
        let row = &self.rows[l];
        let n0 = row.mags.len();
        if new_len <= n0 {
            return Ok(());
        }
        let lf = l as f64;
        let ratios: Vec<f64> = (0..new_len)
            .map(|n| {
                let nf = n as f64;
                (0.5 + lf + nf) * (m + nf) / ((2.0 + lf + nf) * (nf + 1.0))
            })
            .collect();
        let ln_pre = (m + 1.0) * psi1.ln() + row.ln_coef - 4f64.ln();
        let est = integrate_vec(
            |v: f64, out: &mut [f64]| {
                out.fill(0.0);
                let x = psi1 * v.exp_m1();
                let s = psi2 + x;
                let mut w = (ln_pre + (m - lf) * v - m * s.ln() - x).exp();
                let r = psi1 / s;
                for (n, ratio) in ratios.iter().enumerate() {
                    if n >= n0 {
                        out[n - n0] = w;
                    }
                    w *= ratio * r;
                    if w == 0.0 {
                        break;
                    }
                }
            },
            0.0,
            self.v_max,
            new_len - n0,
            &ROW_TOL,
        );
        if !est.converged {
            let (value, error) = est
                .values
                .iter()
                .zip(&est.errors)
                .map(|(&v, &e)| (v, e))
                .fold((0.0, 0.0), |acc, (v, e)| if e > acc.1 { (v, e) } else { acc });
            return Err(Error::Quadrature { what: "series row integral", value, error });
        }
        self.rows[l].mags.extend(est.values);
        Ok(())
    }
}

// Returns (value, terms, last diagonal).
//
// With integer m the rows run out and the blocks decay geometrically; the
// fitted tail decides. Otherwise the blocks end up algebraic,
// b_d ≈ C d^(−(m+5/2)), and the returned value adds that tail to the sum.
fn sum_anti_diagonals(rows: &mut Rows, ctrl: &SeriesControl) -> Result<(f64, usize, usize)> {
    let mut sum = 0.0_f64;
    let mut abs_sum = 0.0_f64;
    let mut scale = 0.0_f64;
    let mut blocks: Vec<f64> = Vec::new();
    let mut extrapolated: Vec<f64> = Vec::new();
    let mut terms = 0;
    let mut hits = 0;
    let noise = TERM_TOL + 4.0 * f64::EPSILON;
    let algebraic = rows.m + 2.5;
    for d in 0..=ctrl.max_terms {
        let floor = 1e-6 * ctrl.rel_tol * scale;
        let mut block = 0.0;
        for l in 0..=d {
            if rows.is_zero(l) {
                break;
            }
            let t = rows.term(l, d - l, floor)?;
            block += t;
            abs_sum += t.abs();
            terms += 1;
        }
        sum += block;
        scale = scale.max(sum.abs());
        blocks.push(block);
        extrapolated.push(sum + block * euler_maclaurin_tail(d, algebraic));
        if noise * abs_sum > 0.5 {
            return Err(Error::PrecisionLoss {
                what: "J_Q double series",
                detail: format!("term magnitudes reach {abs_sum:e} against a result below 1/2"),
            });
        }
        if d < 4 {
            continue;
        }
        let (tail, slope) = tail_estimate(&blocks);
        let (done, value) = if rows.zero_from.is_some() {
            (tail <= ctrl.rel_tol * sum.abs(), sum)
        } else {
            // Infinitely many rows: the blocks mix a transient with the
            // algebraic part, and either may hide the other. Accept only
            // when extrapolations with the asymptotic and the fitted
            // exponent agree and the former has stopped moving.
            let w = (d / 4).max(4);
            let e = extrapolated[d];
            let fitted = if slope > 1.05 && slope.is_finite() {
                sum + block * euler_maclaurin_tail(d, slope)
            } else {
                f64::INFINITY
            };
            let same_sign = blocks[d - w..].iter().all(|b| b.signum() == block.signum() && *b != 0.0);
            let ok = d >= 16
                && same_sign
                && !accelerating(&blocks)
                && (e - fitted).abs() <= ctrl.rel_tol * e.abs()
                && (e - extrapolated[d - w]).abs() <= ctrl.rel_tol * e.abs();
            (ok, e)
        };
        if done {
            hits += 1;
            if hits >= 2 {
                // flag only cancellation, not the inherent term accuracy
                if noise * abs_sum > ctrl.rel_tol.max(10.0 * noise) * value.abs() {
                    return Err(Error::PrecisionLoss {
                        what: "J_Q double series",
                        detail: format!("Σ|terms| = {abs_sum:e} swamps the sum {value:e} at the requested tolerance"),
                    });
                }
                return Ok((value, terms, d));
            }
        } else {
            hits = 0;
            if d >= 256 && !(slope > 1.05) {
                return Err(Error::NonConvergence { what: "J_Q double series", terms });
            }
        }
    }
    Err(Error::NonConvergence { what: "J_Q double series", terms })
}

// Σ_{j>d} (j/d)^(−p), to O(d^(−2)).
fn euler_maclaurin_tail(d: usize, p: f64) -> f64 {
    if d == 0 {
        return 0.0;
    }
    let df = d as f64;
    df / (p - 1.0) - 0.5 + p / (12.0 * df)
}

// Whether the step ratio |b_d/b_{d−1}| fell by over 10% in one of the
// last two steps.
fn accelerating(blocks: &[f64]) -> bool {
    let d = blocks.len() - 1;
    let r = |i: usize| (blocks[i] / blocks[i - 1]).abs();
    r(d) < 0.9 * r(d - 1) || r(d - 1) < 0.9 * r(d - 2)
}

// Tail of Σ |b_d| fitted to |b_d| ≈ C d^(−p) over the last five blocks; a
// geometric decay shows up as a large p and the estimate stays sensible.
// A sign change inside the window means the fit is meaningless.
fn tail_estimate(blocks: &[f64]) -> (f64, f64) {
    let d = blocks.len() - 1;
    let window = &blocks[d - 4..];
    let cur = blocks[d].abs() + blocks[d - 1].abs();
    let prev = blocks[d - 3].abs() + blocks[d - 4].abs();
    if cur == 0.0 {
        return (0.0, f64::INFINITY);
    }
    let s = window.iter().find(|b| **b != 0.0).map_or(0.0, |b| b.signum());
    if window.iter().any(|b| *b != 0.0 && b.signum() != s) || prev <= cur {
        return (f64::INFINITY, 0.0);
    }
    let df = d as f64;
    let p = (prev / cur).ln() / ((df - 0.5) / (df - 3.5)).ln();
    if p <= 1.05 {
        return (f64::INFINITY, p);
    }
    (cur * (df / (p - 1.0) + 1.0), p)
}

// Returns (sum, terms, |last row| + |last column|).
fn sum_rectangle(rows: &mut Rows, order: TruncationOrder) -> Result<(f64, usize, f64)> {
    let mut sum = 0.0;
    let mut terms = 0;
    let mut edge = 0.0;
    for l in 0..=order.l {
        if rows.is_zero(l) {
            break;
        }
        let mut row_sum = 0.0;
        for n in 0..=order.n {
            let t = rows.term(l, n, 0.0)?;
            row_sum += t;
            terms += 1;
            if l == order.l || n == order.n {
                edge += t.abs();
            }
        }
        sum += row_sum;
    }
    Ok((sum, terms, edge))
}
