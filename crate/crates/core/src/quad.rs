//! Quadrature rules: fixed Gauss–Legendre and Gauss–Laguerre, plus an
//! adaptive Gauss–Kronrod (7/15) integrator with scalar and vector forms.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Gauss weights for the odd Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Stopping rule for the adaptive integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadTol {
    pub abs: f64,
    pub rel: f64,
    pub max_subdivisions: usize,
}

impl QuadTol {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel, max_subdivisions: 2000 }
    }

    pub const fn with_limit(self, max_subdivisions: usize) -> Self {
        Self { max_subdivisions, ..self }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

impl Default for QuadTol {
    fn default() -> Self {
        Self::new(1e-14, 1e-10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl Estimate {
    /// Turns a non-converged estimate into a [`Error::Quadrature`].
    pub fn checked(self, what: &'static str) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::Quadrature { what, value: self.value, error: self.error })
        }
    }
}

/// A fixed rule: nodes and weights.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn apply<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1, "rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss–Laguerre rule for ∫₀^∞ f(x) e^(−x) dx.
pub fn gauss_laguerre(n: usize) -> Rule {
    assert!(n >= 1, "rule needs at least one node");
    let nf = n as f64;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut z = 0.0_f64;
    for i in 0..n {
        z = match i {
            0 => 3.0 / (1.0 + 2.4 * nf),
            1 => z + 15.0 / (1.0 + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                z + ((1.0 + 2.55 * ai) / (1.9 * ai)) * (z - nodes[i - 2])
            }
        };
        let mut pp = 0.0;
        let mut p2 = 0.0;
        for _ in 0..200 {
            let (p1, q2, d) = laguerre_eval(n, z);
            p2 = q2;
            pp = d;
            let dz = p1 / d;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        let (_, q2, d) = laguerre_eval(n, z);
        if d.is_finite() {
            pp = d;
            p2 = q2;
        }
        nodes.push(z);
        weights.push(-1.0 / (pp * nf * p2));
    }
    Rule { nodes, weights }
}

// Returns (L_n(z), L_{n-1}(z), L_n'(z)).
fn laguerre_eval(n: usize, z: f64) -> (f64, f64, f64) {
    let mut p1 = 1.0;
    let mut p2 = 0.0;
    for j in 1..=n {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = ((2.0 * jf - 1.0 - z) * p2 - (jf - 1.0) * p3) / jf;
    }
    let nf = n as f64;
    let d = (nf * p1 - nf * p2) / z;
    (p1, p2, d)
}

/// Cached 64- and 128-point Gauss–Laguerre rules.
pub fn laguerre_64() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| gauss_laguerre(64))
}

pub fn laguerre_128() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| gauss_laguerre(128))
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut err = err.abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let floor = f64::MIN_POSITIVE / (50.0 * f64::EPSILON);
    if resabs > floor {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    err
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let h = half.abs();
    let err = rescale_error((resk - resg) * half, resabs * h, resasc * h);
    (resk * half, err)
}

/// Adaptive Gauss–Kronrod integration of `f` over [a, b].
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: &QuadTol) -> Estimate {
    if a == b {
        return Estimate { value: 0.0, error: 0.0, evaluations: 0, converged: true };
    }
    let (value, error) = kronrod(&mut f, a, b);
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    let mut total = value;
    let mut total_err = error;
    // Segments too narrow to split further still count toward the total.
    let mut frozen_err = 0.0;
    heap.push(Segment { a, b, value, error });
    let mut converged = total_err <= tol.target(total);
    while !converged && heap.len() < tol.max_subdivisions {
        let Some(seg) = heap.pop() else { break };
        let mid = 0.5 * (seg.a + seg.b);
        if !(mid > seg.a.min(seg.b) && mid < seg.a.max(seg.b))
            || (seg.b - seg.a).abs() < 1e3 * f64::EPSILON * seg.a.abs().max(seg.b.abs())
        {
            frozen_err += seg.error;
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let (v1, e1) = kronrod(&mut f, seg.a, mid);
        let (v2, e2) = kronrod(&mut f, mid, seg.b);
        evaluations += 30;
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.error;
        heap.push(Segment { a: seg.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, error: e2 });
        if !total.is_finite() {
            break;
        }
        if heap.len() % 64 == 0 {
            // Re-sum to shed accumulated rounding in the running totals.
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum::<f64>() + frozen_err;
        }
        converged = total_err <= tol.target(total);
    }
    total = heap.iter().map(|s| s.value).sum();
    total_err = heap.iter().map(|s| s.error).sum::<f64>() + frozen_err;
    let converged = total.is_finite() && total_err <= tol.target(total);
    Estimate { value: total, error: total_err, evaluations, converged }
}

/// ∫_a^∞ f(x) dx via x = a + scale·t/(1−t).
pub fn integrate_to_inf<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    scale: f64,
    tol: &QuadTol,
) -> Estimate {
    integrate(
        |t| {
            let s = 1.0 - t;
            let x = a + scale * t / s;
            let v = f(x);
            if v == 0.0 {
                0.0
            } else {
                v * scale / (s * s)
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// ∫₀^∞ f(x) e^(−x) dx. The 64- and 128-point Gauss–Laguerre rules are tried
/// first; if they disagree beyond `tol` the integral is redone adaptively
/// in u with x = u², which tames sharp behaviour near the origin.
pub fn laguerre_adaptive<F>(mut f: F, tol: &QuadTol, what: &'static str) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let coarse = laguerre_64().nodes.iter().zip(&laguerre_64().weights).try_fold(0.0, |acc, (&x, &w)| {
        f(x).map(|v| acc + w * v)
    })?;
    let fine = laguerre_128().nodes.iter().zip(&laguerre_128().weights).try_fold(0.0, |acc, (&x, &w)| {
        f(x).map(|v| acc + w * v)
    })?;
    if (fine - coarse).abs() <= tol.target(fine) {
        return Ok(fine);
    }
    let mut failure = None;
    let est = integrate_to_inf(
        |u| {
            let x = u * u;
            if x == 0.0 || failure.is_some() {
                return 0.0;
            }
            match f(x) {
                Ok(v) => 2.0 * u * v * (-x).exp(),
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        },
        0.0,
        1.0,
        tol,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    est.checked(what)
}

/// Estimate for a vector-valued integrand.
#[derive(Debug, Clone, PartialEq)]
pub struct VecEstimate {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub evaluations: usize,
    pub converged: bool,
}

struct VecSegment {
    a: f64,
    b: f64,
    values: Vec<f64>,
    errors: Vec<f64>,
    score: f64,
}

impl PartialEq for VecSegment {
    fn eq(&self, other: &Self) -> bool {
        self.score.total_cmp(&other.score) == Ordering::Equal
    }
}
impl Eq for VecSegment {}
impl PartialOrd for VecSegment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for VecSegment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score.total_cmp(&other.score)
    }
}

struct VecKronrod {
    center: Vec<f64>,
    lo: Vec<Vec<f64>>,
    hi: Vec<Vec<f64>>,
}

impl VecKronrod {
    fn new(dim: usize) -> Self {
        Self { center: vec![0.0; dim], lo: vec![vec![0.0; dim]; 7], hi: vec![vec![0.0; dim]; 7] }
    }

    fn run<F: FnMut(f64, &mut [f64])>(&mut self, f: &mut F, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let dim = self.center.len();
        let center = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        f(center, &mut self.center);
        for j in 0..7 {
            let dx = half * XGK[j];
            f(center - dx, &mut self.lo[j]);
            f(center + dx, &mut self.hi[j]);
        }
        let h = half.abs();
        let mut values = vec![0.0; dim];
        let mut errors = vec![0.0; dim];
        for k in 0..dim {
            let fc = self.center[k];
            let mut resk = fc * WGK[7];
            let mut resg = fc * WG[3];
            let mut resabs = resk.abs();
            for j in 0..7 {
                let (f1, f2) = (self.lo[j][k], self.hi[j][k]);
                resk += WGK[j] * (f1 + f2);
                resabs += WGK[j] * (f1.abs() + f2.abs());
                if j % 2 == 1 {
                    resg += WG[j / 2] * (f1 + f2);
                }
            }
            let mean = resk * 0.5;
            let mut resasc = WGK[7] * (fc - mean).abs();
            for j in 0..7 {
                resasc += WGK[j] * ((self.lo[j][k] - mean).abs() + (self.hi[j][k] - mean).abs());
            }
            values[k] = resk * half;
            errors[k] = rescale_error((resk - resg) * half, resabs * h, resasc * h);
        }
        (values, errors)
    }
}

/// Adaptive integration of a vector-valued integrand. Every component must
/// meet `tol` on its own; `tol.abs` is measured against the largest
/// component so that negligible entries do not force endless refinement.
pub fn integrate_vec<F: FnMut(f64, &mut [f64])>(
    mut f: F,
    a: f64,
    b: f64,
    dim: usize,
    tol: &QuadTol,
) -> VecEstimate {
    if dim == 0 || a == b {
        return VecEstimate { values: vec![0.0; dim], errors: vec![0.0; dim], evaluations: 0, converged: true };
    }
    let mut kr = VecKronrod::new(dim);
    let (values, errors) = kr.run(&mut f, a, b);
    let mut evaluations = 15;
    let mut totals = values.clone();
    let mut total_errs = errors.clone();
    let targets = |totals: &[f64]| -> Vec<f64> {
        let scale = totals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        totals.iter().map(|v| (tol.rel * v.abs()).max(tol.abs * scale).max(f64::MIN_POSITIVE)).collect()
    };
    let score = |errs: &[f64], tgt: &[f64]| errs.iter().zip(tgt).fold(0.0_f64, |m, (e, t)| m.max(e / t));
    let done = |errs: &[f64], tgt: &[f64]| errs.iter().zip(tgt).all(|(e, t)| e <= t);

    let mut tgt = targets(&totals);
    let mut heap = BinaryHeap::new();
    let s = score(&errors, &tgt);
    heap.push(VecSegment { a, b, values, errors, score: s });
    let mut frozen: Vec<VecSegment> = Vec::new();
    while !done(&total_errs, &tgt) && heap.len() + frozen.len() < tol.max_subdivisions {
        let Some(seg) = heap.pop() else { break };
        let mid = 0.5 * (seg.a + seg.b);
        if (seg.b - seg.a).abs() < 1e3 * f64::EPSILON * seg.a.abs().max(seg.b.abs()) {
            frozen.push(seg);
            continue;
        }
        let (v1, e1) = kr.run(&mut f, seg.a, mid);
        let (v2, e2) = kr.run(&mut f, mid, seg.b);
        evaluations += 30;
        for k in 0..dim {
            totals[k] += v1[k] + v2[k] - seg.values[k];
            total_errs[k] += e1[k] + e2[k] - seg.errors[k];
        }
        if totals.iter().any(|v| !v.is_finite()) {
            break;
        }
        tgt = targets(&totals);
        let s1 = score(&e1, &tgt);
        let s2 = score(&e2, &tgt);
        heap.push(VecSegment { a: seg.a, b: mid, values: v1, errors: e1, score: s1 });
        heap.push(VecSegment { a: mid, b: seg.b, values: v2, errors: e2, score: s2 });
    }
    let mut values = vec![0.0; dim];
    let mut errors = vec![0.0; dim];
    for seg in heap.iter().chain(frozen.iter()) {
        for k in 0..dim {
            values[k] += seg.values[k];
            errors[k] += seg.errors[k];
        }
    }
    let tgt = targets(&values);
    let converged = values.iter().all(|v| v.is_finite()) && done(&errors, &tgt);
    VecEstimate { values, errors, evaluations, converged }
}
