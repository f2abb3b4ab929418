//! Fade margins for a required outage probability, and the reverse mapping.
//!
//! Both fading models are normalized to unit mean power, `E[|h|²] = 1`, so a
//! margin is the dB distance between the mean received power and the power
//! level that is undershot with probability `p_out`.

use std::fmt;

use crate::error::{check_probability_open, Error, Result};
use crate::special::rician_power_cdf;

/// Upper end of the bisection bracket on the normalized power threshold.
const RHO_MAX: f64 = 10.0;
const MAX_ITERATIONS: usize = 200;
/// Bracket width (in dB) at which the Rician inversion stops.
const MARGIN_TOLERANCE_DB: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FadingModel {
    None,
    Rayleigh,
    Rician { k_factor_db: f64 },
}

impl FadingModel {
    pub fn rician(k_factor_db: f64) -> Self {
        FadingModel::Rician { k_factor_db }
    }

    /// Margin needed to keep the outage at `p_out`. Zero for an unfaded link.
    pub fn fade_margin(&self, p_out: f64) -> Result<f64> {
        match *self {
            FadingModel::None => Ok(0.0),
            FadingModel::Rayleigh => rayleigh_fade_margin(p_out),
            FadingModel::Rician { k_factor_db } => rician_fade_margin(k_factor_db, p_out),
        }
    }

    /// Linear K-factor; zero for Rayleigh, `None` for an unfaded link.
    pub fn k_linear(&self) -> Option<f64> {
        match *self {
            FadingModel::None => None,
            FadingModel::Rayleigh => Some(0.0),
            FadingModel::Rician { k_factor_db } => Some(db_to_linear(k_factor_db)),
        }
    }

    /// `P(|h|² ≤ rho)`.
    pub fn power_cdf(&self, rho: f64) -> Result<f64> {
        match *self {
            FadingModel::None => Err(Error::Domain(
                "an unfaded link has no outage distribution".to_string(),
            )),
            FadingModel::Rayleigh => Ok(if rho <= 0.0 { 0.0 } else { -(-rho).exp_m1() }),
            FadingModel::Rician { k_factor_db } => {
                if k_factor_db.is_nan() || k_factor_db == f64::INFINITY {
                    return Err(Error::Domain("K-factor must be finite".to_string()));
                }
                Ok(rician_power_cdf(db_to_linear(k_factor_db), rho))
            }
        }
    }
}

impl fmt::Display for FadingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FadingModel::None => f.write_str("none"),
            FadingModel::Rayleigh => f.write_str("rayleigh"),
            FadingModel::Rician { k_factor_db } => write!(f, "rician(K={k_factor_db} dB)"),
        }
    }
}

/// A required link outage probability in `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct OutageSpec(f64);

impl OutageSpec {
    pub fn new(p_out: f64) -> Result<Self> {
        check_probability_open("outage probability", p_out)?;
        Ok(OutageSpec(p_out))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

pub(crate) fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `FM = -10 log10(-ln(1 - p_out))`. Negative above `p_out = 1 - 1/e`.
pub fn rayleigh_fade_margin(p_out: f64) -> Result<f64> {
    check_probability_open("outage probability", p_out)?;
    Ok(-10.0 * (-(-p_out).ln_1p()).log10())
}

/// Margin for a unit-mean-power Rician channel, found by bisection on the
/// normalized threshold `rho` in `(0, 10]` until the bracket is narrower than
/// 1e-9 dB.
pub fn rician_fade_margin(k_factor_db: f64, p_out: f64) -> Result<f64> {
    check_probability_open("outage probability", p_out)?;
    if !k_factor_db.is_finite() {
        return Err(Error::Domain(format!(
            "K-factor must be a finite dB value, got {k_factor_db}"
        )));
    }
    let k = db_to_linear(k_factor_db);
    if rician_power_cdf(k, RHO_MAX) < p_out {
        return Err(Error::Numeric(format!(
            "outage {p_out} needs a threshold above {RHO_MAX} times the mean power"
        )));
    }
    let (mut lo, mut hi) = (0.0_f64, RHO_MAX);
    for _ in 0..MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if rician_power_cdf(k, mid) < p_out {
            lo = mid;
        } else {
            hi = mid;
        }
        if lo > 0.0 && 10.0 * (hi / lo).log10() < MARGIN_TOLERANCE_DB {
            return Ok(-10.0 * (0.5 * (lo + hi)).log10());
        }
    }
    Err(Error::Numeric(format!(
        "Rician margin for K={k_factor_db} dB, p_out={p_out} did not converge in {MAX_ITERATIONS} steps"
    )))
}

/// Outage probability left by a fade margin: the fading CDF at `10^(-fm/10)`.
pub fn outage_from_margin(model: FadingModel, fade_margin_db: f64) -> Result<f64> {
    if fade_margin_db.is_nan() {
        return Err(Error::Domain("fade margin is NaN".to_string()));
    }
    model.power_cdf(db_to_linear(-fade_margin_db))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rayleigh_table_values() {
        for (p, fm) in [(0.10, 9.77), (0.05, 12.89), (0.20, 6.51), (0.40, 2.92)] {
            let got = rayleigh_fade_margin(p).unwrap();
            assert!((got - fm).abs() <= 0.01, "p={p}: {got}");
        }
        // The closed form gives 19.98 dB at 1 %.
        assert!((rayleigh_fade_margin(0.01).unwrap() - 19.98).abs() <= 0.01);
    }

    #[test]
    fn rayleigh_margin_goes_negative_past_one_minus_inv_e() {
        let edge = 1.0 - (-1.0f64).exp();
        assert!(rayleigh_fade_margin(edge).unwrap().abs() < 1e-12);
        assert!(rayleigh_fade_margin(0.9).unwrap() < 0.0);
    }

    #[test]
    fn domain_errors() {
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(rayleigh_fade_margin(p).is_err());
            assert!(rician_fade_margin(9.0, p).is_err());
        }
        assert!(rician_fade_margin(f64::INFINITY, 0.1).is_err());
        assert!(outage_from_margin(FadingModel::None, 3.0).is_err());
    }

    #[test]
    fn rician_degenerates_to_rayleigh() {
        let fm = rician_fade_margin(-100.0, 0.10).unwrap();
        assert!((fm - 9.77).abs() <= 0.01, "{fm}");
    }

    #[test]
    fn outage_examples() {
        let p = outage_from_margin(FadingModel::Rayleigh, 9.77).unwrap();
        assert!((p - 0.100).abs() <= 0.001);
        let p = outage_from_margin(FadingModel::Rayleigh, 0.0).unwrap();
        assert!((p - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn no_fading_means_no_margin() {
        assert_eq!(FadingModel::None.fade_margin(0.1).unwrap(), 0.0);
    }

    #[test]
    fn rician_margin_decreases_with_k() {
        let mut last = f64::INFINITY;
        for k_db in [-10.0, 0.0, 3.0, 6.0, 9.0, 12.0, 15.0] {
            let fm = rician_fade_margin(k_db, 0.05).unwrap();
            assert!(fm < last, "K={k_db}: {fm} !< {last}");
            last = fm;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn rayleigh_round_trip(p in 1e-6f64..0.999) {
            let fm = rayleigh_fade_margin(p).unwrap();
            let back = outage_from_margin(FadingModel::Rayleigh, fm).unwrap();
            prop_assert!((back - p).abs() < 1e-6);
        }

        #[test]
        fn rician_round_trip(p in 1e-4f64..0.9, k_db in -5.0f64..15.0) {
            let fm = rician_fade_margin(k_db, p).unwrap();
            let back = outage_from_margin(FadingModel::rician(k_db), fm).unwrap();
            prop_assert!((back - p).abs() < 1e-3);
        }

        #[test]
        fn margins_decrease_in_outage(p in 1e-3f64..0.8, dp in 1e-3f64..0.1, k_db in 0.0f64..12.0) {
            prop_assert!(rayleigh_fade_margin(p + dp).unwrap() < rayleigh_fade_margin(p).unwrap());
            prop_assert!(rician_fade_margin(k_db, p + dp).unwrap() < rician_fade_margin(k_db, p).unwrap());
        }

        #[test]
        fn line_of_sight_reduces_margin(p in 0.01f64..0.4, k_db in 3.0f64..15.0) {
            prop_assert!(rician_fade_margin(k_db, p).unwrap() < rayleigh_fade_margin(p).unwrap());
        }
    }
}
