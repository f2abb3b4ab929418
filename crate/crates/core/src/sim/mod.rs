//! Monte-Carlo simulator of the dual-hop decode-and-forward OFDM link.
//!
//! Every trial sends one OFDM symbol of random source bits through both hops
//! in turn. Each hop draws its own block-fading channel and noise; the relay
//! makes hard decisions, re-modulates and forwards. Errors are counted
//! against the source bits.
//!
//! Trials are seeded individually from `(master_seed, stream, trial)` and run
//! in fixed-size rounds. The stop rule is only checked between rounds, so the
//! tallies do not depend on how many worker threads execute a round.

pub mod channel;
pub mod ofdm;
pub mod receiver;

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::catalog::OfdmNumerology;
use crate::error::{Error, Result};
use crate::fading::FadingModel;
use crate::link::LinkSpec;
use crate::propagation;
use crate::relay::{RelayScenario, Segment};

pub use channel::{PowerDelayProfile, Tap};
pub use ofdm::OfdmModem;
pub use receiver::ZeroTone;

/// Thermal noise over the 750 kHz data band at 290 K, in dBW.
pub const DEFAULT_NOISE_DBW: f64 = -145.22;
pub const DEFAULT_MIN_ERRORS: u64 = 100;

const BATCH_TRIALS: u64 = 256;
const BATCHES_PER_ROUND: u64 = 16;

/// What one hop does to the bits it carries.
#[derive(Debug, Clone, PartialEq)]
pub enum HopChannel {
    /// OFDM over a faded, noisy channel. Powers are per data band: the data
    /// tones share `rx_power_dbm` and the noise over the same band is
    /// `noise_dbm`, so the mean per-tone SNR is their difference.
    Ofdm {
        rx_power_dbm: f64,
        noise_dbm: f64,
        pdp: PowerDelayProfile,
    },
    /// Independent bit flips with probability `p`.
    Bsc { p: f64 },
}

impl HopChannel {
    /// OFDM hop at a given mean per-tone SNR.
    pub fn ofdm_at_snr(snr_db: f64, pdp: PowerDelayProfile) -> Self {
        HopChannel::Ofdm {
            rx_power_dbm: snr_db,
            noise_dbm: 0.0,
            pdp,
        }
    }

    fn validate(&self, modem: &OfdmModem) -> Result<()> {
        match self {
            HopChannel::Ofdm {
                rx_power_dbm,
                noise_dbm,
                pdp,
            } => {
                if rx_power_dbm.is_nan() || noise_dbm.is_nan() || *rx_power_dbm == f64::INFINITY {
                    return Err(Error::Config("hop powers must be numbers".to_string()));
                }
                pdp.check_guard(modem.cp_len())
            }
            HopChannel::Bsc { p } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::Config(format!(
                        "bit flip probability {p} outside [0, 1]"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Stop after `min_errors` bit errors or `max_trials` trials, whichever
/// comes first (checked once per round).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialBudget {
    pub max_trials: u64,
    pub min_errors: u64,
}

impl TrialBudget {
    pub fn new(max_trials: u64) -> Self {
        TrialBudget {
            max_trials,
            min_errors: DEFAULT_MIN_ERRORS,
        }
    }

    /// Runs exactly `trials` trials.
    pub fn fixed(trials: u64) -> Self {
        TrialBudget {
            max_trials: trials,
            min_errors: u64::MAX,
        }
    }
}

/// Error counts accumulated over trials.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub trials: u64,
    pub bits: u64,
    pub errors: u64,
    /// Sum over trials of the squared per-trial error count.
    pub errors_sq: u64,
    /// Trials dropped because a data tone hit a spectral null.
    pub discarded: u64,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            trials: self.trials + o.trials,
            bits: self.bits + o.bits,
            errors: self.errors + o.errors,
            errors_sq: self.errors_sq + o.errors_sq,
            discarded: self.discarded + o.discarded,
        }
    }

    pub fn ber(&self) -> f64 {
        self.errors as f64 / self.bits as f64
    }

    /// Normal-approximation 95 % half-width.
    pub fn ci_halfwidth(&self) -> f64 {
        let p = self.ber();
        1.96 * (p * (1.0 - p) / self.bits as f64).sqrt()
    }

    /// Binomial standard deviation of a BER estimate around `p`, treating
    /// bits as independent.
    pub fn sigma_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.bits as f64).sqrt()
    }

    /// Standard error of the BER from the spread of per-trial error counts.
    /// Unlike [`Tally::sigma_at`] it accounts for errors clustering within a
    /// trial when the whole symbol sees one fade.
    pub fn std_error(&self) -> f64 {
        let n = (self.trials - self.discarded) as f64;
        let bits_per_trial = self.bits as f64 / n;
        let mean = self.errors as f64 / n;
        let var = (self.errors_sq as f64 / n - mean * mean).max(0.0);
        (var / n).sqrt() / bits_per_trial
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one trial. `stream` separates independent curves or grid points.
pub fn trial_seed(master_seed: u64, stream: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ stream) ^ trial)
}

/// A chain of hops with decode-and-forward between them.
#[derive(Debug, Clone)]
pub struct Chain {
    modem: OfdmModem,
    hops: Vec<HopChannel>,
    repetition: u8,
}

impl Chain {
    pub fn new(numerology: OfdmNumerology, hops: Vec<HopChannel>, repetition: u8) -> Result<Self> {
        let modem = OfdmModem::new(numerology)?;
        if hops.is_empty() {
            return Err(Error::Config("a chain needs at least one hop".to_string()));
        }
        if !(1..=2).contains(&repetition) {
            return Err(Error::Config(format!(
                "repetition factor {repetition} is not 1 or 2"
            )));
        }
        for h in &hops {
            h.validate(&modem)?;
        }
        Ok(Chain {
            modem,
            hops,
            repetition,
        })
    }

    pub fn single(hop: HopChannel, repetition: u8) -> Result<Self> {
        Self::new(OfdmNumerology::default(), vec![hop], repetition)
    }

    pub fn modem(&self) -> &OfdmModem {
        &self.modem
    }

    pub fn hops(&self) -> &[HopChannel] {
        &self.hops
    }

    /// Runs trials until the budget is met. `workers == 0` uses the global
    /// thread pool.
    pub fn run(
        &self,
        budget: TrialBudget,
        master_seed: u64,
        stream: u64,
        workers: usize,
    ) -> Result<Tally> {
        if budget.max_trials == 0 {
            return Err(Error::Config("trial cap must be at least 1".to_string()));
        }
        with_workers(workers, || Ok(self.run_rounds(budget, master_seed, stream)))
    }

    fn run_rounds(&self, budget: TrialBudget, master_seed: u64, stream: u64) -> Tally {
        let mut total = Tally::default();
        while total.trials < budget.max_trials && total.errors < budget.min_errors {
            let start = total.trials;
            let end = (start + BATCH_TRIALS * BATCHES_PER_ROUND).min(budget.max_trials);
            let round = (0..BATCHES_PER_ROUND)
                .into_par_iter()
                .map(|b| {
                    let lo = (start + b * BATCH_TRIALS).min(end);
                    let hi = (lo + BATCH_TRIALS).min(end);
                    (lo..hi).fold(Tally::default(), |acc, t| {
                        acc.merge(self.trial(trial_seed(master_seed, stream, t)))
                    })
                })
                .reduce(Tally::default, Tally::merge);
            total = total.merge(round);
        }
        total
    }

    /// One trial from its own seed.
    pub fn trial(&self, seed: u64) -> Tally {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.modem.bits_per_symbol();
        let word: u64 = rng.random();
        let source: Vec<u8> = (0..n).map(|i| ((word >> i) & 1) as u8).collect();
        let mut bits = source.clone();
        for hop in &self.hops {
            match self.transmit(hop, &bits, &mut rng) {
                Ok(out) => bits = out,
                Err(_) => {
                    return Tally {
                        trials: 1,
                        discarded: 1,
                        ..Tally::default()
                    }
                }
            }
        }
        let errors = source.iter().zip(&bits).filter(|(a, b)| a != b).count() as u64;
        Tally {
            trials: 1,
            bits: n as u64,
            errors,
            errors_sq: errors * errors,
            discarded: 0,
        }
    }

    /// Sends `bits` over one hop and returns the hard decisions at its end.
    pub fn transmit<R: Rng + ?Sized>(
        &self,
        hop: &HopChannel,
        bits: &[u8],
        rng: &mut R,
    ) -> std::result::Result<Vec<u8>, ZeroTone> {
        match hop {
            HopChannel::Bsc { p } => Ok(bits
                .iter()
                .map(|&b| if rng.random::<f64>() < *p { b ^ 1 } else { b })
                .collect()),
            HopChannel::Ofdm {
                rx_power_dbm,
                noise_dbm,
                pdp,
            } => {
                let per_tone = |dbm: f64| dbm_to_watts(dbm) / self.modem.bits_per_symbol() as f64;
                let amplitude = per_tone(*rx_power_dbm).sqrt();
                let noise_var = per_tone(*noise_dbm);
                let tx: Vec<Complex64> = self
                    .modem
                    .modulate(bits)
                    .expect("one symbol of bits")
                    .into_iter()
                    .map(|s| s * amplitude)
                    .collect();
                let ch = pdp.draw(rng);
                let h: Vec<Complex64> = ch
                    .frequency_response(self.modem.fft_size())
                    .into_iter()
                    .map(|v| v * amplitude)
                    .collect();
                let faded = ch.apply(&tx);
                let mut copies = Vec::with_capacity(self.repetition as usize);
                for _ in 0..self.repetition {
                    let mut y = faded.clone();
                    channel::add_awgn(rng, &mut y, noise_var);
                    copies.push(self.modem.demodulate(&y).expect("whole symbols").remove(0));
                }
                let tones = self.modem.tones();
                match copies.as_slice() {
                    [a] => receiver::equalize_and_decide(a, &h, tones),
                    [a, b] => receiver::repetition_combine(a, b, &h, &h, tones),
                    _ => unreachable!("repetition is 1 or 2"),
                }
            }
        }
    }
}

fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if workers == 0 {
        return f();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} worker threads: {e}")))?
        .install(f)
}

/// Simulation setup for a BER-versus-distance curve.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub numerology: OfdmNumerology,
    pub scenario: RelayScenario,
    /// 0 (single copy) or 10 (two copies combined).
    pub mcs: u8,
    /// Multipath profile of both hops, without line of sight. The Rician
    /// K-factor of a hop comes from its fading model in `scenario`.
    pub pdp: PowerDelayProfile,
    /// Trial cap per grid point.
    pub trials: u64,
    pub min_errors: u64,
    pub master_seed: u64,
    /// RS-ST distances in meters, strictly increasing.
    pub distance_grid: Vec<f64>,
    pub noise_power_dbw: f64,
    /// Worker threads; 0 uses every core. Does not change results.
    pub workers: usize,
}

impl SimConfig {
    pub fn new(scenario: RelayScenario, mcs: u8, distance_grid: Vec<f64>) -> Self {
        SimConfig {
            numerology: OfdmNumerology::default(),
            scenario,
            mcs,
            pdp: PowerDelayProfile::typical_urban(),
            trials: 200_000,
            min_errors: DEFAULT_MIN_ERRORS,
            master_seed: 1,
            distance_grid,
            noise_power_dbw: DEFAULT_NOISE_DBW,
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".to_string()));
        }
        if self.min_errors == 0 {
            return Err(Error::Config("min_errors must be at least 1".to_string()));
        }
        if self.mcs != 0 && self.mcs != 10 {
            return Err(Error::Config(format!(
                "the simulator runs MCS0 or MCS10 only, got MCS{}",
                self.mcs
            )));
        }
        if self.distance_grid.is_empty() {
            return Err(Error::Config("distance grid is empty".to_string()));
        }
        if self
            .distance_grid
            .iter()
            .any(|d| !(d.is_finite() && *d >= 1.0))
        {
            return Err(Error::Config(
                "grid distances must be finite and >= 1 m".to_string(),
            ));
        }
        if self.distance_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(
                "distance grid must be strictly increasing".to_string(),
            ));
        }
        if self.noise_power_dbw.is_nan() || self.noise_power_dbw == f64::INFINITY {
            return Err(Error::Config(
                "noise power must be a number below +inf".to_string(),
            ));
        }
        self.numerology.validate()?;
        self.pdp.check_guard(self.numerology.gi_samples())?;
        self.scenario.validate()
    }

    pub fn repetition(&self) -> u8 {
        if self.mcs == 10 {
            2
        } else {
            1
        }
    }

    /// The two hops, in transmission order, with the RS-ST hop at `access_m`.
    pub fn hop_channels(&self, access_m: f64) -> Result<[HopChannel; 2]> {
        let (l1, l2) = self.scenario.hop_links()?;
        let seg = [self.scenario.segment(1), self.scenario.segment(2)];
        let build = |link: &LinkSpec, segment: Segment| -> Result<HopChannel> {
            let d = match segment {
                Segment::Backhaul => self.scenario.fixed_distance_m,
                Segment::Access => access_m,
            };
            let rx_power_dbm =
                propagation::received_power(&link.tx, &link.rx, &link.deployment, d, 0.0)?;
            let pdp = match link.fading {
                FadingModel::None => PowerDelayProfile::identity(),
                FadingModel::Rayleigh => self.pdp.clone().without_los(),
                FadingModel::Rician { k_factor_db } => self.pdp.clone().with_los(k_factor_db),
            };
            Ok(HopChannel::Ofdm {
                rx_power_dbm,
                noise_dbm: self.noise_power_dbw + 30.0 + link.rx.noise_figure_db,
                pdp,
            })
        };
        Ok([build(&l1, seg[0])?, build(&l2, seg[1])?])
    }
}

/// BER at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerEstimate {
    pub distance_m: f64,
    pub ber: f64,
    pub bit_count: u64,
    pub error_count: u64,
    pub ci_halfwidth: f64,
    /// Standard error from per-trial error counts.
    pub std_error: f64,
    pub trials: u64,
    pub discarded: u64,
}

impl BerEstimate {
    fn from_tally(distance_m: f64, t: Tally) -> Self {
        BerEstimate {
            distance_m,
            ber: t.ber(),
            bit_count: t.bits,
            error_count: t.errors,
            ci_halfwidth: t.ci_halfwidth(),
            std_error: t.std_error(),
            trials: t.trials,
            discarded: t.discarded,
        }
    }
}

/// End-to-end BER at every grid distance.
pub fn simulate_relay(cfg: &SimConfig) -> Result<Vec<BerEstimate>> {
    cfg.validate()?;
    let budget = TrialBudget {
        max_trials: cfg.trials,
        min_errors: cfg.min_errors,
    };
    with_workers(cfg.workers, || {
        cfg.distance_grid
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let chain = Chain::new(
                    cfg.numerology,
                    cfg.hop_channels(d)?.to_vec(),
                    cfg.repetition(),
                )?;
                let tally = chain.run_rounds(budget, cfg.master_seed, i as u64);
                Ok(BerEstimate::from_tally(d, tally))
            })
            .collect()
    })
}

/// Writes `distance_m,ber,bits,ci95` rows.
pub fn write_ber_csv<W: Write>(out: W, rows: &[BerEstimate]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["distance_m", "ber", "bits", "ci95"])?;
    for r in rows {
        w.write_record([
            r.distance_m.to_string(),
            r.ber.to_string(),
            r.bit_count.to_string(),
            r.ci_halfwidth.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagation::DeploymentKind;
    use crate::relay::Direction;

    #[test]
    fn seeds_differ_per_coordinate() {
        let a = trial_seed(1, 0, 0);
        assert_ne!(a, trial_seed(2, 0, 0));
        assert_ne!(a, trial_seed(1, 1, 0));
        assert_ne!(a, trial_seed(1, 0, 1));
        assert_ne!(trial_seed(1, 0, 1), trial_seed(1, 1, 0));
    }

    #[test]
    fn noiseless_identity_chain_is_error_free() {
        let hop = HopChannel::Ofdm {
            rx_power_dbm: 0.0,
            noise_dbm: f64::NEG_INFINITY,
            pdp: PowerDelayProfile::identity(),
        };
        let chain = Chain::new(OfdmNumerology::default(), vec![hop.clone(), hop], 2).unwrap();
        let t = chain.run(TrialBudget::fixed(500), 9, 0, 2).unwrap();
        assert_eq!(t.trials, 500);
        assert_eq!(t.errors, 0);
        assert_eq!(t.bits, 500 * 24);
    }

    #[test]
    fn stop_rule_is_checked_per_round() {
        let chain = Chain::single(HopChannel::Bsc { p: 0.5 }, 1).unwrap();
        let t = chain.run(TrialBudget::new(1_000_000), 3, 0, 0).unwrap();
        assert_eq!(t.trials, BATCH_TRIALS * BATCHES_PER_ROUND);
        let t = chain.run(TrialBudget::new(10), 3, 0, 0).unwrap();
        assert_eq!(t.trials, 10);
    }

    #[test]
    fn config_validation() {
        let s = RelayScenario::new(Direction::Downlink, DeploymentKind::Macro, 400.0, 0.1);
        let ok = SimConfig::new(s, 10, vec![100.0, 200.0]);
        assert!(ok.validate().is_ok());
        for bad in [
            SimConfig {
                mcs: 3,
                ..ok.clone()
            },
            SimConfig {
                trials: 0,
                ..ok.clone()
            },
            SimConfig {
                distance_grid: vec![200.0, 100.0],
                ..ok.clone()
            },
            SimConfig {
                distance_grid: vec![],
                ..ok.clone()
            },
            SimConfig {
                distance_grid: vec![0.5],
                ..ok.clone()
            },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))), "{bad:?}");
        }
    }

    #[test]
    fn hop_powers_follow_the_budget() {
        let s = RelayScenario::new(Direction::Downlink, DeploymentKind::Macro, 400.0, 0.1);
        let cfg = SimConfig::new(s, 10, vec![250.0]);
        let [h1, h2] = cfg.hop_channels(250.0).unwrap();
        let HopChannel::Ofdm {
            rx_power_dbm,
            noise_dbm,
            pdp,
        } = h1
        else {
            panic!()
        };
        // AP 10 dBm + 3 dBi, RS 3 dBi, macro 400 m.
        let want = 16.0 - (8.0 + 37.6 * 400f64.log10());
        assert!((rx_power_dbm - want).abs() < 1e-9);
        assert!((noise_dbm - (-115.22 + 3.0)).abs() < 1e-9);
        assert_eq!(pdp.los_k_db(), Some(9.0));
        let HopChannel::Ofdm { noise_dbm, pdp, .. } = h2 else {
            panic!()
        };
        assert!((noise_dbm - (-115.22 + 5.0)).abs() < 1e-9);
        assert_eq!(pdp.los_k_db(), None);
    }

    #[test]
    fn csv_layout() {
        let rows = [BerEstimate::from_tally(
            250.0,
            Tally {
                trials: 10,
                bits: 240,
                errors: 3,
                errors_sq: 5,
                discarded: 0,
            },
        )];
        let mut buf = Vec::new();
        write_ber_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("distance_m,ber,bits,ci95"));
        assert!(lines.next().unwrap().starts_with("250,0.0125,240,"));
    }
}
