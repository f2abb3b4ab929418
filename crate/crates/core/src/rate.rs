//! Achievable bit rate of a faded hop for a packet error target.
//!
//! The chain runs PER -> BER (independent bit errors), BER -> required
//! Eb/N0 for coherent BPSK, then solves the link budget for the rate at which
//! the received Eb/N0 exactly meets the requirement:
//!
//! ```text
//! R[dB-Hz] = P_tx + G_tx - PL(d) - FM + G_rx - (Eb/N0 - coding gain) - N0[dBm/Hz]
//! ```

use crate::error::{check_probability_open, Error, Result};
use crate::link::LinkSpec;
use crate::special::{q_function, q_inverse};

/// Boltzmann constant in J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Reference receiver temperature in kelvin.
pub const T0_KELVIN: f64 = 290.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateQuery {
    pub packet_length_bits: u32,
    pub target_per: f64,
    /// Reduction of the required Eb/N0 credited to channel coding.
    pub coding_gain_db: f64,
    pub temperature_k: f64,
}

impl RateQuery {
    pub fn new(packet_length_bits: u32, target_per: f64) -> Self {
        RateQuery {
            packet_length_bits,
            target_per,
            coding_gain_db: 0.0,
            temperature_k: T0_KELVIN,
        }
    }

    pub fn from_bytes(packet_bytes: u32, target_per: f64) -> Self {
        Self::new(packet_bytes * 8, target_per)
    }

    pub fn with_coding_gain(mut self, db: f64) -> Self {
        self.coding_gain_db = db;
        self
    }

    pub fn with_target_per(mut self, per: f64) -> Self {
        self.target_per = per;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.packet_length_bits == 0 {
            return Err(Error::Domain(
                "packet length must be at least one bit".to_string(),
            ));
        }
        check_probability_open("target PER", self.target_per)?;
        if !(self.coding_gain_db >= 0.0) || self.coding_gain_db.is_infinite() {
            return Err(Error::Domain(format!(
                "coding gain must be finite and >= 0 dB, got {}",
                self.coding_gain_db
            )));
        }
        if !(self.temperature_k > 0.0) || self.temperature_k.is_infinite() {
            return Err(Error::Domain(format!(
                "temperature must be positive, got {} K",
                self.temperature_k
            )));
        }
        Ok(())
    }

    /// Eb/N0 in dB the receiver must see, after the coding gain.
    pub fn required_ebn0_db(&self) -> Result<f64> {
        self.validate()?;
        let ber = ber_from_per(self.target_per, self.packet_length_bits)?;
        Ok(ebn0_for_ber_bpsk(ber)? - self.coding_gain_db)
    }
}

/// Thermal noise of a receiver: `N0 = k T0 F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub noise_figure_db: f64,
    pub temperature_k: f64,
}

impl NoiseModel {
    pub fn new(noise_figure_db: f64) -> Self {
        NoiseModel {
            noise_figure_db,
            temperature_k: T0_KELVIN,
        }
    }

    /// Noise spectral density in dBm/Hz (about -174 + F at 290 K).
    pub fn spectral_density_dbm_hz(&self) -> f64 {
        10.0 * (BOLTZMANN * self.temperature_k * 1e3).log10() + self.noise_figure_db
    }

    /// Noise power in dBm over `bandwidth_hz`.
    pub fn power_dbm(&self, bandwidth_hz: f64) -> f64 {
        self.spectral_density_dbm_hz() + 10.0 * bandwidth_hz.log10()
    }
}

/// Bit error rate giving packet error rate `per` on `packet_length_bits`-bit
/// packets with independent errors: `1 - (1 - PER)^(1/L)`.
pub fn ber_from_per(per: f64, packet_length_bits: u32) -> Result<f64> {
    check_probability_open("PER", per)?;
    if packet_length_bits == 0 {
        return Err(Error::Domain(
            "packet length must be at least one bit".to_string(),
        ));
    }
    Ok(-((-per).ln_1p() / f64::from(packet_length_bits)).exp_m1())
}

/// Packet error rate for a bit error rate: `1 - (1 - BER)^L`.
pub fn per_from_ber(ber: f64, packet_length_bits: u32) -> f64 {
    -(f64::from(packet_length_bits) * (-ber).ln_1p()).exp_m1()
}

/// Coherent BPSK in AWGN: `Q(sqrt(2 Eb/N0))`, Eb/N0 in dB.
pub fn ber_bpsk(ebn0_db: f64) -> f64 {
    q_function((2.0 * 10f64.powf(ebn0_db / 10.0)).sqrt())
}

/// Eb/N0 in dB at which coherent BPSK reaches `ber`.
pub fn ebn0_for_ber_bpsk(ber: f64) -> Result<f64> {
    if !(ber > 0.0 && ber < 0.5) {
        return Err(Error::Domain(format!(
            "BPSK BER must lie in (0, 0.5), got {ber}"
        )));
    }
    let x = q_inverse(ber);
    Ok(10.0 * (x * x / 2.0).log10())
}

/// Maximum rate in dB-Hz at `distance_m`.
pub fn rate_db_hz(link: &LinkSpec, distance_m: f64, query: &RateQuery) -> Result<f64> {
    let ebn0 = query.required_ebn0_db()?;
    let prx = link.received_power(distance_m)?;
    let n0 = NoiseModel {
        noise_figure_db: link.rx.noise_figure_db,
        temperature_k: query.temperature_k,
    }
    .spectral_density_dbm_hz();
    Ok(prx - ebn0 - n0)
}

/// Maximum achievable bit rate in bit/s at `distance_m`.
pub fn max_rate_at_distance(link: &LinkSpec, distance_m: f64, query: &RateQuery) -> Result<f64> {
    rate_db_hz(link, distance_m, query).map(|r| 10f64.powf(r / 10.0))
}

/// Distance at which the achievable rate falls to `target_bps`.
pub fn max_distance_at_rate(link: &LinkSpec, query: &RateQuery, target_bps: f64) -> Result<f64> {
    if !(target_bps > 0.0) || target_bps.is_infinite() {
        return Err(Error::Domain(format!(
            "target rate must be positive and finite, got {target_bps}"
        )));
    }
    let at_one_meter = rate_db_hz(link, 1.0, query)?;
    let target_db = 10.0 * target_bps.log10();
    if at_one_meter < target_db {
        return Err(Error::NoCoverage(format!(
            "{target_bps} b/s is out of reach even at 1 m (best {:.1} b/s)",
            10f64.powf(at_one_meter / 10.0)
        )));
    }
    // rate_db_hz is affine in PL(d), so the gap converts straight into path loss.
    let loss_at_one_meter = link.deployment.path_loss(1.0)?;
    Ok(link
        .deployment
        .distance_for_loss(loss_at_one_meter + at_one_meter - target_db))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fading::FadingModel;
    use crate::propagation::{DeploymentModel, DeviceProfile};
    use proptest::prelude::*;

    fn dl_direct(ap_dbm: f64, model: DeploymentModel) -> LinkSpec {
        LinkSpec::new(
            DeviceProfile::ap(ap_dbm),
            DeviceProfile::st(),
            model,
            FadingModel::Rayleigh,
            0.1,
        )
    }

    #[test]
    fn ber_from_per_examples() {
        let b = ber_from_per(0.1, 32768).unwrap();
        assert!((b / 3.215e-6 - 1.0).abs() < 2e-4, "{b}");
        let b = ber_from_per(0.05, 2048).unwrap();
        // Quoted to four digits, truncated rather than rounded.
        assert!((b / 2.504e-5 - 1.0).abs() < 4e-4, "{b}");
        assert!((ber_from_per(0.37, 1).unwrap() - 0.37).abs() < 1e-15);
        assert!(ber_from_per(0.0, 10).is_err());
        assert!(ber_from_per(0.1, 0).is_err());
    }

    #[test]
    fn per_ber_inverse() {
        let b = ber_from_per(0.1, 2048).unwrap();
        assert!((per_from_ber(b, 2048) - 0.1).abs() < 1e-14);
    }

    #[test]
    fn ebn0_examples() {
        // Values found by bisection on the forward function below.
        let e = ebn0_for_ber_bpsk(3.215e-6).unwrap();
        assert!((e - 10.08).abs() <= 0.02, "{e}");
        let e = ebn0_for_ber_bpsk(2.504e-5).unwrap();
        assert!((e - 9.15).abs() <= 0.02, "{e}");
        assert!((ber_bpsk(0.0) - 0.0786).abs() < 1e-4);
        assert!(ebn0_for_ber_bpsk(0.5).is_err());
        assert!(ebn0_for_ber_bpsk(0.0).is_err());
    }

    #[test]
    fn ebn0_matches_forward_bisection() {
        for ber in [1e-2, 1e-4, 3.215e-6, 1e-9] {
            let (mut lo, mut hi) = (-10.0, 30.0);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if ber_bpsk(mid) > ber {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            let e = ebn0_for_ber_bpsk(ber).unwrap();
            assert!((e - lo).abs() < 1e-9, "ber={ber}: {e} vs {lo}");
        }
    }

    #[test]
    fn noise_density_at_290k() {
        let n = NoiseModel::new(5.0).spectral_density_dbm_hz();
        assert!((n - (-174.0 + 5.0)).abs() < 0.05);
    }

    #[test]
    fn direct_downlink_rate_examples() {
        let q = RateQuery::new(32768, 0.1);
        let link = dl_direct(10.0, DeploymentModel::MACRO);
        let r = max_rate_at_distance(&link, 589.0, &q).unwrap();
        assert!((r / 1e5 - 1.0).abs() < 0.02, "{r}");

        let d = max_distance_at_rate(&link, &q, 1e5).unwrap();
        assert!((d - 589.0).abs() < 2.0, "{d}");

        let pico = dl_direct(10.0, DeploymentModel::PICO);
        let d = max_distance_at_rate(&pico, &q, 1e5).unwrap();
        assert!((d - 264.0).abs() < 2.0, "{d}");

        let us = dl_direct(30.0, DeploymentModel::MACRO);
        let d = max_distance_at_rate(&us, &q, 1e5).unwrap();
        assert!(d > 1000.0 && (d - 2000.0).abs() < 20.0, "{d}");
    }

    #[test]
    fn budget_point_is_fifty_db_hz() {
        // At PL = 112.15 dB the chain lands on 50 dB-Hz, up to the rounding
        // of the fade margin, Eb/N0 and N0 that produced 112.15.
        let link = dl_direct(10.0, DeploymentModel::MACRO);
        let q = RateQuery::new(32768, 0.1);
        let d = 10f64.powf((112.15 - 8.0) / 37.6);
        let r = rate_db_hz(&link, d, &q).unwrap();
        assert!((r - 50.0).abs() < 0.05, "{r}");
        let fm = link.fade_margin().unwrap();
        let ebn0 = q.required_ebn0_db().unwrap();
        let n0 = NoiseModel::new(5.0).spectral_density_dbm_hz();
        let exact_loss = 10.0 + 3.0 - fm - ebn0 - n0 - 50.0;
        let d_exact = DeploymentModel::MACRO.distance_for_loss(exact_loss);
        assert!((rate_db_hz(&link, d_exact, &q).unwrap() - 50.0).abs() < 1e-9);
    }

    #[test]
    fn direct_uplink_rates() {
        let q = RateQuery::new(32768, 0.1);
        let ul = |m| {
            LinkSpec::new(
                DeviceProfile::st(),
                DeviceProfile::ap(10.0),
                m,
                FadingModel::Rayleigh,
                0.1,
            )
        };
        let pico = max_distance_at_rate(&ul(DeploymentModel::PICO), &q, 1e5).unwrap();
        assert!((pico - 160.0).abs() < 2.0, "{pico}");
        let r = max_rate_at_distance(&ul(DeploymentModel::PICO), 160.0, &q).unwrap();
        assert!((r / 1e5 - 1.0).abs() < 0.03, "{r}");
        let macro_ = max_distance_at_rate(&ul(DeploymentModel::MACRO), &q, 1e5).unwrap();
        assert!((macro_ - 361.0).abs() < 2.0, "{macro_}");
    }

    #[test]
    fn unreachable_rate() {
        let link = dl_direct(10.0, DeploymentModel::MACRO);
        let q = RateQuery::new(32768, 0.1);
        assert!(matches!(
            max_distance_at_rate(&link, &q, 1e30),
            Err(Error::NoCoverage(_))
        ));
        assert!(max_distance_at_rate(&link, &q, 0.0).is_err());
    }

    #[test]
    fn distance_grows_without_bound_as_rate_vanishes() {
        let link = dl_direct(10.0, DeploymentModel::MACRO);
        let q = RateQuery::new(32768, 0.1);
        let mut last = 0.0;
        for target in [1e5, 1e3, 1e1, 1e-1, 1e-3] {
            let d = max_distance_at_rate(&link, &q, target).unwrap();
            assert!(d > last);
            last = d;
        }
        assert!(last > 5e4, "{last}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn rate_decreasing_in_distance(d in 1.0f64..5e4, step in 0.1f64..100.0) {
            let link = dl_direct(10.0, DeploymentModel::MACRO);
            let q = RateQuery::new(2048, 0.05);
            prop_assert!(max_rate_at_distance(&link, d + step, &q).unwrap() < max_rate_at_distance(&link, d, &q).unwrap());
        }

        #[test]
        fn coding_gain_scales_rate(cg in 0.0f64..12.0, d in 1.0f64..3e3) {
            let link = dl_direct(10.0, DeploymentModel::PICO);
            let q = RateQuery::new(2048, 0.1);
            let base = max_rate_at_distance(&link, d, &q).unwrap();
            let coded = max_rate_at_distance(&link, d, &q.with_coding_gain(cg)).unwrap();
            prop_assert!((coded / base / 10f64.powf(cg / 10.0) - 1.0).abs() < 1e-9);
        }

        #[test]
        fn rate_decreasing_in_margin(p in 0.01f64..0.5, dp in 0.001f64..0.2) {
            // Smaller outage -> larger margin -> lower rate.
            let q = RateQuery::new(2048, 0.1);
            let mut tight = dl_direct(10.0, DeploymentModel::MACRO);
            tight.p_out = p;
            let mut loose = tight;
            loose.p_out = (p + dp).min(0.99);
            prop_assert!(max_rate_at_distance(&tight, 300.0, &q).unwrap() < max_rate_at_distance(&loose, 300.0, &q).unwrap());
        }

        #[test]
        fn shorter_packets_never_lose_rate(l in 2u32..100_000, per in 0.001f64..0.5) {
            let link = dl_direct(10.0, DeploymentModel::MACRO);
            let long = max_rate_at_distance(&link, 400.0, &RateQuery::new(l, per)).unwrap();
            let short = max_rate_at_distance(&link, 400.0, &RateQuery::new(l / 2, per)).unwrap();
            prop_assert!(short >= long);
        }

        #[test]
        fn rate_distance_round_trip(target in 1e2f64..1e7, pico in any::<bool>()) {
            let model = if pico { DeploymentModel::PICO } else { DeploymentModel::MACRO };
            let link = dl_direct(30.0, model);
            let q = RateQuery::new(2048, 0.05);
            if let Ok(d) = max_distance_at_rate(&link, &q, target) {
                let r = max_rate_at_distance(&link, d, &q).unwrap();
                prop_assert!((r / target - 1.0).abs() < 1e-6);
            }
        }
    }
}
