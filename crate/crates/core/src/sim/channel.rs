//! Tapped-delay-line block fading and AWGN.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fading::db_to_linear;

const POWER_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    /// Delay in samples at 1 Msample/s.
    pub delay: usize,
    /// Mean power, linear.
    pub power: f64,
}

/// Taps with unit total power. An optional line-of-sight K-factor splits the
/// first tap into a fixed part and a Rayleigh part without changing its power.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerDelayProfile {
    taps: Vec<Tap>,
    los_k_db: Option<f64>,
}

impl PowerDelayProfile {
    /// Validates that powers sum to one, delays are strictly increasing and
    /// start at zero.
    pub fn new(taps: Vec<Tap>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::Config("power delay profile has no taps".to_string()));
        }
        if taps[0].delay != 0 {
            return Err(Error::Config(
                "the first tap must have zero delay".to_string(),
            ));
        }
        if taps.windows(2).any(|w| w[1].delay <= w[0].delay) {
            return Err(Error::Config(
                "tap delays must be strictly increasing".to_string(),
            ));
        }
        if taps
            .iter()
            .any(|t| !(t.power.is_finite() && t.power >= 0.0))
        {
            return Err(Error::Config(
                "tap powers must be finite and non-negative".to_string(),
            ));
        }
        let total: f64 = taps.iter().map(|t| t.power).sum();
        if (total - 1.0).abs() > POWER_SUM_TOLERANCE {
            return Err(Error::Config(format!(
                "tap powers sum to {total}, expected 1"
            )));
        }
        Ok(PowerDelayProfile {
            taps,
            los_k_db: None,
        })
    }

    /// Builds a profile from unnormalized `(delay, power)` pairs.
    pub fn normalized(pairs: &[(usize, f64)]) -> Result<Self> {
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::Config(
                "tap powers must have a positive finite sum".to_string(),
            ));
        }
        Self::new(
            pairs
                .iter()
                .map(|&(delay, power)| Tap {
                    delay,
                    power: power / total,
                })
                .collect(),
        )
    }

    /// One unit-power tap: flat Rayleigh fading.
    pub fn flat() -> Self {
        PowerDelayProfile {
            taps: vec![Tap {
                delay: 0,
                power: 1.0,
            }],
            los_k_db: None,
        }
    }

    /// A fixed unit channel (flat, infinite K-factor).
    pub fn identity() -> Self {
        Self::flat().with_los(f64::INFINITY)
    }

    /// Exponentially decaying taps at `delays` whose RMS delay spread is
    /// `rms_samples`, found by bisection on the decay constant.
    pub fn exponential_with_rms(delays: &[usize], rms_samples: f64) -> Result<Self> {
        let build = |tau: f64| {
            let pairs: Vec<(usize, f64)> = delays
                .iter()
                .map(|&d| (d, (-(d as f64) / tau).exp()))
                .collect();
            Self::normalized(&pairs)
        };
        let (mut lo, mut hi) = (1e-3_f64, 1e3_f64);
        let spread = |tau: f64| build(tau).map(|p| p.rms_delay_spread());
        if !(spread(lo)? <= rms_samples && rms_samples <= spread(hi)?) {
            return Err(Error::Config(format!(
                "no exponential profile on {delays:?} has an RMS spread of {rms_samples} samples"
            )));
        }
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if spread(mid)? < rms_samples {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        build((lo * hi).sqrt())
    }

    /// Six taps inside the guard interval with a 1 µs RMS delay spread,
    /// typical of urban macro cells.
    pub fn typical_urban() -> Self {
        Self::exponential_with_rms(&[0, 1, 2, 3, 5, 7], 1.0).expect("default profile is valid")
    }

    /// RMS delay spread in samples.
    pub fn rms_delay_spread(&self) -> f64 {
        let mean: f64 = self.taps.iter().map(|t| t.power * t.delay as f64).sum();
        let second: f64 = self
            .taps
            .iter()
            .map(|t| t.power * (t.delay as f64).powi(2))
            .sum();
        (second - mean * mean).max(0.0).sqrt()
    }

    /// Adds a line-of-sight component of `k_db` on the first tap.
    /// `f64::INFINITY` makes the first tap deterministic.
    pub fn with_los(mut self, k_db: f64) -> Self {
        self.los_k_db = Some(k_db);
        self
    }

    pub fn without_los(mut self) -> Self {
        self.los_k_db = None;
        self
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    pub fn los_k_db(&self) -> Option<f64> {
        self.los_k_db
    }

    pub fn max_delay(&self) -> usize {
        self.taps.last().map_or(0, |t| t.delay)
    }

    /// Errors when an echo would spill past the cyclic prefix.
    pub fn check_guard(&self, cp_len: usize) -> Result<()> {
        if self.max_delay() >= cp_len {
            return Err(Error::Config(format!(
                "tap delay {} does not fit in a {cp_len}-sample guard interval",
                self.max_delay()
            )));
        }
        if let Some(k) = self.los_k_db {
            if k.is_nan() {
                return Err(Error::Config("line-of-sight K-factor is NaN".to_string()));
            }
        }
        Ok(())
    }

    /// One independent block-fading realization.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelRealization {
        let mut impulse = vec![Complex64::new(0.0, 0.0); self.max_delay() + 1];
        for (i, tap) in self.taps.iter().enumerate() {
            let (los, diffuse) = match (i, self.los_k_db) {
                (0, Some(k_db)) => split_los(tap.power, k_db),
                _ => (0.0, tap.power),
            };
            impulse[tap.delay] = Complex64::new(los, 0.0) + complex_gaussian(rng, diffuse);
        }
        ChannelRealization { impulse }
    }
}

/// `(LOS amplitude, diffuse power)` for a tap of power `p` and K-factor `k_db`.
fn split_los(p: f64, k_db: f64) -> (f64, f64) {
    if k_db == f64::INFINITY {
        return (p.sqrt(), 0.0);
    }
    let k = db_to_linear(k_db);
    ((p * k / (k + 1.0)).sqrt(), p / (k + 1.0))
}

/// A `CN(0, variance)` sample. Always consumes two normals so that the
/// random stream does not depend on the variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * (0.5 * variance).sqrt()
}

/// A drawn channel impulse response.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub impulse: Vec<Complex64>,
}

impl ChannelRealization {
    pub fn energy(&self) -> f64 {
        self.impulse.iter().map(|h| h.norm_sqr()).sum()
    }

    /// Linear convolution truncated to the input length. With a cyclic
    /// prefix at least as long as the channel memory this is circular over
    /// each useful symbol.
    pub fn apply(&self, signal: &[Complex64]) -> Vec<Complex64> {
        (0..signal.len())
            .map(|n| {
                self.impulse
                    .iter()
                    .enumerate()
                    .take(n + 1)
                    .map(|(l, h)| h * signal[n - l])
                    .sum()
            })
            .collect()
    }

    /// `H[k] = sum_l h_l exp(-j 2 pi k l / N)` for every FFT bin.
    pub fn frequency_response(&self, fft_size: usize) -> Vec<Complex64> {
        let n = fft_size as f64;
        (0..fft_size)
            .map(|k| {
                self.impulse
                    .iter()
                    .enumerate()
                    .map(|(l, h)| {
                        h * Complex64::from_polar(
                            1.0,
                            -2.0 * std::f64::consts::PI * ((k * l) % fft_size) as f64 / n,
                        )
                    })
                    .sum()
            })
            .collect()
    }
}

/// Adds `CN(0, variance)` noise to every sample.
pub fn add_awgn<R: Rng + ?Sized>(rng: &mut R, signal: &mut [Complex64], variance: f64) {
    for s in signal {
        *s += complex_gaussian(rng, variance);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_channel_passes_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ch = PowerDelayProfile::identity().draw(&mut rng);
        let x: Vec<Complex64> = (0..40)
            .map(|i| Complex64::new(i as f64, -(i as f64)))
            .collect();
        assert_eq!(ch.apply(&x), x);
        assert!(ch
            .frequency_response(32)
            .iter()
            .all(|h| (h - Complex64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn default_profile_is_valid() {
        let pdp = PowerDelayProfile::typical_urban();
        assert_eq!(pdp.taps().len(), 6);
        assert!(pdp.check_guard(8).is_ok());
        let total: f64 = pdp.taps().iter().map(|t| t.power).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(pdp.taps().windows(2).all(|w| w[1].power < w[0].power));
        assert!((pdp.rms_delay_spread() - 1.0).abs() < 1e-9);
        assert!((pdp.taps()[0].power - 0.5752).abs() < 1e-4);
    }

    #[test]
    fn validation() {
        assert!(PowerDelayProfile::new(vec![]).is_err());
        assert!(PowerDelayProfile::new(vec![Tap {
            delay: 0,
            power: 0.5
        }])
        .is_err());
        assert!(PowerDelayProfile::new(vec![Tap {
            delay: 1,
            power: 1.0
        }])
        .is_err());
        assert!(PowerDelayProfile::normalized(&[(0, 1.0), (0, 1.0)]).is_err());
        assert!(PowerDelayProfile::normalized(&[(0, 1.0), (8, 1.0)])
            .unwrap()
            .check_guard(8)
            .is_err());
    }

    #[test]
    fn frequency_response_matches_convolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ch = PowerDelayProfile::typical_urban().draw(&mut rng);
        let h = ch.frequency_response(32);
        // A single complex exponential on bin k comes out scaled by H[k].
        let k = 5;
        let x: Vec<Complex64> = (0..64)
            .map(|t| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (k * t) as f64 / 32.0))
            .collect();
        let y = ch.apply(&x);
        for t in 8..64 {
            assert!((y[t] - h[k] * x[t]).norm() < 1e-12);
        }
    }
}
