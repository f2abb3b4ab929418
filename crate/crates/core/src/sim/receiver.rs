//! Perfect-CSI one-tap equalization and hard BPSK decisions.

use num_complex::Complex64;

use super::ofdm::ToneMap;

/// Squared magnitude below which a tone is treated as a spectral null.
const NULL_TONE: f64 = 1e-300;

/// A data tone whose channel response vanished; the trial cannot be decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZeroTone {
    pub bin: usize,
}

/// Divides each data tone by its known response and decides on the sign of
/// the real part.
pub fn equalize_and_decide(
    received: &[Complex64],
    response: &[Complex64],
    tones: &ToneMap,
) -> Result<Vec<u8>, ZeroTone> {
    tones
        .data
        .iter()
        .map(|&bin| {
            let h = response[bin];
            if h.norm_sqr() < NULL_TONE {
                return Err(ZeroTone { bin });
            }
            Ok(u8::from((received[bin] / h).re < 0.0))
        })
        .collect()
}

/// Maximal-ratio combination of two copies of one symbol.
///
/// Summing `conj(H) Y` over the copies weights each equalized copy by its
/// `|H|²`, so this is the MRC statistic before the hard decision.
pub fn repetition_combine(
    copy_a: &[Complex64],
    copy_b: &[Complex64],
    response_a: &[Complex64],
    response_b: &[Complex64],
    tones: &ToneMap,
) -> Result<Vec<u8>, ZeroTone> {
    tones
        .data
        .iter()
        .map(|&bin| {
            let (ha, hb) = (response_a[bin], response_b[bin]);
            if ha.norm_sqr() + hb.norm_sqr() < NULL_TONE {
                return Err(ZeroTone { bin });
            }
            let z = ha.conj() * copy_a[bin] + hb.conj() * copy_b[bin];
            Ok(u8::from(z.re < 0.0))
        })
        .collect()
}
