//! 1 MHz OFDM modem: 32-point transform, 24 BPSK data tones, 2 pilots and
//! an 8-sample cyclic prefix.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::catalog::OfdmNumerology;
use crate::error::{Error, Result};

/// Logical subcarrier of each pilot tone.
const PILOT_SUBCARRIERS: [i32; 2] = [-7, 7];
/// Occupied subcarriers are -13..=13 without DC.
const EDGE_SUBCARRIER: i32 = 13;

/// FFT bins carrying data and pilots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToneMap {
    pub data: Vec<usize>,
    pub pilots: Vec<usize>,
}

impl ToneMap {
    /// Layout of the 1 MHz mode; other numerologies are rejected.
    pub fn for_numerology(n: &OfdmNumerology) -> Result<Self> {
        if n.fft_size != 32 || n.data_tones != 24 || n.pilot_tones != 2 {
            return Err(Error::Config(format!(
                "the simulator supports the 1 MHz mode only (32-point FFT, 24 data + 2 pilot tones), got {} / {} / {}",
                n.fft_size, n.data_tones, n.pilot_tones
            )));
        }
        let bin = |k: i32| k.rem_euclid(n.fft_size as i32) as usize;
        let mut data = Vec::with_capacity(n.data_tones);
        let mut pilots = Vec::with_capacity(n.pilot_tones);
        for k in -EDGE_SUBCARRIER..=EDGE_SUBCARRIER {
            if k == 0 {
                continue;
            }
            if PILOT_SUBCARRIERS.contains(&k) {
                pilots.push(bin(k));
            } else {
                data.push(bin(k));
            }
        }
        Ok(ToneMap { data, pilots })
    }
}

/// BPSK mapping: bit 0 -> +1, bit 1 -> -1.
pub fn bpsk(bit: u8) -> f64 {
    if bit == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Modulator and demodulator sharing one FFT plan. Transforms are unitary so
/// energy is the same in both domains.
#[derive(Clone)]
pub struct OfdmModem {
    numerology: OfdmNumerology,
    tones: ToneMap,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl std::fmt::Debug for OfdmModem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OfdmModem")
            .field("numerology", &self.numerology)
            .field("tones", &self.tones)
            .finish()
    }
}

impl OfdmModem {
    pub fn new(numerology: OfdmNumerology) -> Result<Self> {
        let tones = ToneMap::for_numerology(&numerology)?;
        let mut planner = FftPlanner::new();
        let n = numerology.fft_size;
        Ok(OfdmModem {
            numerology,
            tones,
            fft: planner.plan_fft_forward(n),
            ifft: planner.plan_fft_inverse(n),
            scale: 1.0 / (n as f64).sqrt(),
        })
    }

    pub fn tones(&self) -> &ToneMap {
        &self.tones
    }

    pub fn fft_size(&self) -> usize {
        self.numerology.fft_size
    }

    pub fn cp_len(&self) -> usize {
        self.numerology.gi_samples()
    }

    /// Samples per OFDM symbol including the cyclic prefix.
    pub fn symbol_len(&self) -> usize {
        self.fft_size() + self.cp_len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.tones.data.len()
    }

    /// Tone-domain vector of one symbol: BPSK on data tones, +1 on pilots,
    /// zero elsewhere.
    pub fn map_tones(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        if bits.len() != self.bits_per_symbol() {
            return Err(Error::Domain(format!(
                "one symbol carries {} bits, got {}",
                self.bits_per_symbol(),
                bits.len()
            )));
        }
        let mut x = vec![Complex64::new(0.0, 0.0); self.fft_size()];
        for (&bin, &b) in self.tones.data.iter().zip(bits) {
            x[bin] = Complex64::new(bpsk(b), 0.0);
        }
        for &bin in &self.tones.pilots {
            x[bin] = Complex64::new(1.0, 0.0);
        }
        Ok(x)
    }

    /// Time-domain block: per symbol, the cyclic prefix then the useful part.
    pub fn modulate(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        let per = self.bits_per_symbol();
        if bits.is_empty() || !bits.len().is_multiple_of(per) {
            return Err(Error::Domain(format!(
                "bit count {} is not a positive multiple of {per}",
                bits.len()
            )));
        }
        let mut out = Vec::with_capacity(bits.len() / per * self.symbol_len());
        for chunk in bits.chunks(per) {
            let mut x = self.map_tones(chunk)?;
            self.ifft.process(&mut x);
            for v in &mut x {
                *v *= self.scale;
            }
            out.extend_from_slice(&x[self.fft_size() - self.cp_len()..]);
            out.extend_from_slice(&x);
        }
        Ok(out)
    }

    /// Strips the cyclic prefix of every symbol and returns each symbol's
    /// full tone vector.
    pub fn demodulate(&self, block: &[Complex64]) -> Result<Vec<Vec<Complex64>>> {
        let len = self.symbol_len();
        if block.is_empty() || !block.len().is_multiple_of(len) {
            return Err(Error::Domain(format!(
                "block length {} is not a positive multiple of {len}",
                block.len()
            )));
        }
        Ok(block
            .chunks(len)
            .map(|sym| {
                let mut y = sym[self.cp_len()..].to_vec();
                self.fft.process(&mut y);
                for v in &mut y {
                    *v *= self.scale;
                }
                y
            })
            .collect())
    }
}

/// Hard decisions on the data tones of an unfaded, noiseless symbol.
pub fn decide_direct(modem: &OfdmModem, tones: &[Complex64]) -> Vec<u8> {
    modem
        .tones()
        .data
        .iter()
        .map(|&bin| u8::from(tones[bin].re < 0.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn modem() -> OfdmModem {
        OfdmModem::new(OfdmNumerology::default()).unwrap()
    }

    #[test]
    fn tone_layout() {
        let m = modem();
        assert_eq!(m.tones().data.len(), 24);
        assert_eq!(m.tones().pilots, vec![25, 7]);
        assert!(!m.tones().data.contains(&0));
        assert_eq!(m.symbol_len(), 40);
    }

    #[test]
    fn all_zero_bits_give_plus_one_tones() {
        let m = modem();
        let x = m.map_tones(&[0; 24]).unwrap();
        for &bin in &m.tones().data {
            assert_eq!(x[bin], Complex64::new(1.0, 0.0));
        }
        let block = m.modulate(&[0; 24]).unwrap();
        // The useful part is the inverse transform of x.
        let n = 32.0_f64;
        for (t, v) in block[8..].iter().enumerate() {
            let want: Complex64 = x
                .iter()
                .enumerate()
                .map(|(k, xk)| {
                    xk * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (k * t) as f64 / n)
                })
                .sum::<Complex64>()
                / n.sqrt();
            assert!((v - want).norm() < 1e-12);
        }
    }

    #[test]
    fn cyclic_prefix_copies_the_tail() {
        let m = modem();
        let block = m
            .modulate(&[
                1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 1, 0, 0, 0, 1, 0, 1, 0, 1, 1, 0, 1, 0, 0,
            ])
            .unwrap();
        assert_eq!(&block[..8], &block[32..40]);
    }

    #[test]
    fn round_trip_on_identity_channel() {
        let m = modem();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let bits: Vec<u8> = (0..48).map(|_| rng.random_range(0..2)).collect();
            let block = m.modulate(&bits).unwrap();
            let syms = m.demodulate(&block).unwrap();
            let got: Vec<u8> = syms.iter().flat_map(|s| decide_direct(&m, s)).collect();
            assert_eq!(got, bits);
        }
    }

    #[test]
    fn parseval() {
        let m = modem();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let bits: Vec<u8> = (0..24).map(|_| rng.random_range(0..2)).collect();
        let x = m.map_tones(&bits).unwrap();
        let block = m.modulate(&bits).unwrap();
        let tone_energy: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let time_energy: f64 = block[8..].iter().map(|v| v.norm_sqr()).sum();
        assert!((time_energy / tone_energy - 1.0).abs() < 1e-9);
    }

    #[test]
    fn length_errors() {
        let m = modem();
        assert!(m.modulate(&[0; 23]).is_err());
        assert!(m.modulate(&[]).is_err());
        assert!(m.demodulate(&vec![Complex64::new(0.0, 0.0); 39]).is_err());
        let n = OfdmNumerology {
            fft_size: 64,
            ..OfdmNumerology::default()
        };
        assert!(OfdmModem::new(n).is_err());
    }
}
