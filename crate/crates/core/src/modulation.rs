//! Coefficients of the unified BER approximation
//! Pb(γ) ≈ δ₁ Σⱼ Q(√(2δ₂ⱼγ)) for square M-QAM and M-PSK.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Qam,
    Psk,
}

/// δ₁ and the per-term SNR scalings δ₂ⱼ; the number of terms is `delta2.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulationSpec {
    pub family: Family,
    pub order: u32,
    pub delta1: f64,
    pub delta2: Vec<f64>,
}

impl ModulationSpec {
    pub fn name(&self) -> String {
        match self.family {
            Family::Qam => format!("qam-{}", self.order),
            Family::Psk => format!("psk-{}", self.order),
        }
    }

    pub fn terms(&self) -> usize {
        self.delta2.len()
    }
}

impl fmt::Display for ModulationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Square M-QAM: δ₁ = 4(1 − 1/√M)/log₂M, δ₂ⱼ = 3(2j−1)²/(2(M−1)), j = 1..√M/2.
///
/// ```
/// use fdrlos::modulation::qam_coeffs;
/// let q = qam_coeffs(4).unwrap();
/// assert_eq!(q.delta1, 1.0);
/// assert_eq!(q.delta2, vec![0.5]);
/// ```
pub fn qam_coeffs(m: u32) -> Result<ModulationSpec> {
    let root = (m as f64).sqrt().round() as u32;
    if m < 4 || root * root != m || root % 2 != 0 {
        return Err(invalid(format!("QAM order must be an even square ≥ 4, got {m}")));
    }
    let mf = m as f64;
    let delta1 = 4.0 * (1.0 - 1.0 / root as f64) / mf.log2();
    let delta2 = (1..=root / 2)
        .map(|j| {
            let odd = (2 * j - 1) as f64;
            3.0 * odd * odd / (2.0 * (mf - 1.0))
        })
        .collect();
    Ok(ModulationSpec { family: Family::Qam, order: m, delta1, delta2 })
}

/// M-PSK: δ₁ = 1/max(2, log₂M), δ₂ⱼ = 2 sin²((2j−1)π/M), j = 1..max(1, M/4).
pub fn psk_coeffs(m: u32) -> Result<ModulationSpec> {
    if m < 2 || !m.is_power_of_two() {
        return Err(invalid(format!("PSK order must be a power of two ≥ 2, got {m}")));
    }
    let mf = m as f64;
    let delta1 = 1.0 / mf.log2().max(2.0);
    let delta2 = (1..=(m / 4).max(1))
        .map(|j| {
            let s = ((2 * j - 1) as f64 * std::f64::consts::PI / mf).sin();
            2.0 * s * s
        })
        .collect();
    Ok(ModulationSpec { family: Family::Psk, order: m, delta1, delta2 })
}

impl FromStr for ModulationSpec {
    type Err = Error;

    /// Parses `qam-<M>` or `psk-<M>`.
    fn from_str(s: &str) -> Result<Self> {
        let usage = || invalid(format!("unknown modulation '{s}': expected qam-<M> (M an even square) or psk-<M> (M a power of two)"));
        let lower = s.trim().to_ascii_lowercase();
        let (family, order) = lower.split_once('-').ok_or_else(usage)?;
        let order: u32 = order.parse().map_err(|_| usage())?;
        match family {
            "qam" => qam_coeffs(order).map_err(|_| usage()),
            "psk" => psk_coeffs(order).map_err(|_| usage()),
            _ => Err(usage()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn qam_examples() {
        let q = qam_coeffs(4).unwrap();
        assert_eq!((q.delta1, q.delta2.clone(), q.terms()), (1.0, vec![0.5], 1));
        let q = qam_coeffs(64).unwrap();
        assert!((q.delta1 - 7.0 / 12.0).abs() < 1e-15);
        let want = [1.0, 9.0, 25.0, 49.0].map(|v| v / 42.0);
        for (a, b) in q.delta2.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        let q = qam_coeffs(1024).unwrap();
        assert!((q.delta1 - 0.3875).abs() < 1e-15);
        assert_eq!(q.terms(), 16);
        assert!((q.delta2[15] - 3.0 * 31.0 * 31.0 / 2046.0).abs() < 1e-15);
    }

    #[test]
    fn psk_examples() {
        let p = psk_coeffs(2).unwrap();
        assert_eq!(p.delta1, 0.5);
        assert!((p.delta2[0] - 2.0).abs() < 1e-15);
        let p = psk_coeffs(4).unwrap();
        assert_eq!(p.delta1, 0.5);
        assert!((p.delta2[0] - 1.0).abs() < 1e-15);
        let p = psk_coeffs(8).unwrap();
        assert!((p.delta1 - 1.0 / 3.0).abs() < 1e-15);
        assert!((p.delta2[0] - 0.292_893_218_813_452_5).abs() < 1e-12);
        assert!((p.delta2[1] - 1.707_106_781_186_547_5).abs() < 1e-12);
    }

    #[test]
    fn rejects_invalid_orders() {
        for m in [0, 2, 5, 8, 9, 32, 63] {
            assert!(qam_coeffs(m).is_err(), "qam-{m}");
        }
        for m in [0, 1, 3, 6, 12] {
            assert!(psk_coeffs(m).is_err(), "psk-{m}");
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!("qam-64".parse::<ModulationSpec>().unwrap(), qam_coeffs(64).unwrap());
        assert_eq!("PSK-8".parse::<ModulationSpec>().unwrap(), psk_coeffs(8).unwrap());
        let err = "qam-5".parse::<ModulationSpec>().unwrap_err().to_string();
        assert!(err.contains("qam-<M>"), "{err}");
        assert!("fsk-4".parse::<ModulationSpec>().is_err());
        assert!("qam".parse::<ModulationSpec>().is_err());
        assert_eq!(qam_coeffs(256).unwrap().to_string(), "qam-256");
    }

    proptest! {
        #[test]
        fn qam_increasing(k in 1u32..7) {
            let q = qam_coeffs(4u32.pow(k)).unwrap();
            prop_assert!(q.delta1 > 0.0);
            prop_assert!(q.delta2.windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(q.terms() as u32, 2u32.pow(k) / 2);
            prop_assert_eq!(q.clone(), qam_coeffs(4u32.pow(k)).unwrap());
        }

        #[test]
        fn psk_increasing(k in 3u32..10) {
            let p = psk_coeffs(2u32.pow(k)).unwrap();
            prop_assert!(p.delta2.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(p.delta2.iter().all(|d| *d > 0.0));
            prop_assert_eq!(p.terms() as u32, (2u32.pow(k) / 4).max(1));
        }
    }
}
