mod common;

use common::rel;
use fdrlos::analytic::{aber_high_snr, aber_k_inf, aber_k_zero, aber_m_inf, truncation_bound};
use fdrlos::{aber, ChannelParams, ModulationSpec, SeriesControl, TruncationOrder};

fn qpsk() -> ModulationSpec {
    "psk-4".parse().unwrap()
}

#[test]
fn decreasing_in_average_snr() {
    let ctrl = SeriesControl::default();
    for (m, k, mod_) in [(0.5, 1.0_f64, "psk-4"), (2.5, 10.0, "qam-16"), (3.5, 0.1, "psk-8")] {
        let q: ModulationSpec = mod_.parse().unwrap();
        let vals: Vec<f64> = (0..=40)
            .map(|i| {
                let p = ChannelParams::from_db(m, 10.0 * k.log10(), i as f64 * 0.5).unwrap();
                aber(&p, &q, &ctrl, None).unwrap().value
            })
            .collect();
        for (i, w) in vals.windows(2).enumerate() {
            assert!(w[1] < w[0], "m={m} K={k} {mod_}: step {i}: {} !< {}", w[1], w[0]);
        }
    }
}

#[test]
fn continuous_across_integer_shape() {
    let ctrl = SeriesControl::new(1e-12, 4000).unwrap();
    let q: ModulationSpec = "qam-16".parse().unwrap();
    for (k, g) in [(1.0, 300.0), (5.0, 1000.0)] {
        let at = |m: f64| aber(&ChannelParams::new(m, k, g).unwrap(), &q, &ctrl, None).unwrap().value;
        let (lo, mid, hi) = (at(2.0 - 1e-6), at(2.0), at(2.0 + 1e-6));
        assert!(rel(lo, mid) < 1e-6 && rel(hi, mid) < 1e-6, "{lo} {mid} {hi}");
    }
}

#[test]
fn bound_dominates_truncation_error_above_unit_shape() {
    let ctrl = SeriesControl::new(1e-11, 4000).unwrap();
    let q: ModulationSpec = "qam-16".parse().unwrap();
    let p = ChannelParams::from_db(2.5, 5.0, 30.0).unwrap();
    let exact = aber(&p, &q, &ctrl, None).unwrap().value;
    for n in 1..=5 {
        let o = TruncationOrder::square(n);
        let approx = aber(&p, &q, &ctrl, Some(o)).unwrap().value;
        let b = truncation_bound(&p, &q, o).unwrap();
        assert!((exact - approx).abs() <= b, "N={n}: error {} > bound {b}", (exact - approx).abs());
    }
}

fn gaps(points: &[ChannelParams], asym: impl Fn(&ChannelParams) -> f64) -> Vec<f64> {
    let ctrl = SeriesControl::default();
    points.iter().map(|p| rel(asym(p), aber(p, &qpsk(), &ctrl, None).unwrap().value)).collect()
}

fn assert_shrinking(what: &str, g: &[f64]) {
    assert!(g.windows(2).all(|w| w[1] < w[0]), "{what}: gaps {g:?}");
}

#[test]
fn high_snr_gap_shrinks() {
    let pts: Vec<_> = [30.0, 40.0, 50.0, 60.0].iter().map(|&s| ChannelParams::from_db(3.5, 10.0, s).unwrap()).collect();
    assert_shrinking("high SNR", &gaps(&pts, |p| aber_high_snr(p, &qpsk()).unwrap().value));
}

#[test]
fn k_inf_gap_shrinks() {
    let pts: Vec<_> = [20.0, 30.0, 40.0].iter().map(|&k| ChannelParams::from_db(2.5, k, 30.0).unwrap()).collect();
    assert_shrinking("K → ∞", &gaps(&pts, |p| aber_k_inf(p, &qpsk()).unwrap().value));
}

#[test]
fn k_zero_gap_shrinks() {
    let pts: Vec<_> = [-20.0, -30.0, -40.0].iter().map(|&k| ChannelParams::from_db(0.5, k, 30.0).unwrap()).collect();
    assert_shrinking("K → 0", &gaps(&pts, |p| aber_k_zero(p, &qpsk()).unwrap().value));
}

#[test]
fn m_inf_gap_shrinks() {
    let pts: Vec<_> = [10.0, 50.0, 200.0].iter().map(|&m| ChannelParams::from_db(m, 10.0, 30.0).unwrap()).collect();
    assert_shrinking("m → ∞", &gaps(&pts, |p| aber_m_inf(p, &qpsk()).unwrap().value));
}
