//! Static 802.11ah data: MCS table, receiver sensitivities, regulatory
//! domains, OFDM numerology and device presets.
//!
//! The data lives in a TOML file (`data/catalog.toml` is compiled in as the
//! default) so regulatory updates are an edit, not a rebuild. Once loaded a
//! [`Catalog`] is immutable and can be shared freely between threads.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::propagation::{DeviceProfile, Role};

/// Environment variable naming an alternative catalog file.
pub const CATALOG_ENV: &str = "AHLINK_CATALOG";

const BUILTIN: &str = include_str!("../data/catalog.toml");

/// Channel bandwidth in MHz.
pub type BandwidthMhz = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modulation {
    Bpsk,
    Qpsk,
    Qam16,
    Qam64,
    Qam256,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> u32 {
        match self {
            Modulation::Bpsk => 1,
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
            Modulation::Qam64 => 6,
            Modulation::Qam256 => 8,
        }
    }
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "BPSK" => Ok(Modulation::Bpsk),
            "QPSK" => Ok(Modulation::Qpsk),
            "16QAM" => Ok(Modulation::Qam16),
            "64QAM" => Ok(Modulation::Qam64),
            "256QAM" => Ok(Modulation::Qam256),
            _ => Err(Error::Config(format!("unknown modulation `{s}`"))),
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modulation::Bpsk => "BPSK",
            Modulation::Qpsk => "QPSK",
            Modulation::Qam16 => "16QAM",
            Modulation::Qam64 => "64QAM",
            Modulation::Qam256 => "256QAM",
        })
    }
}

/// Forward error correction code rate as a reduced fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeRate {
    pub num: u8,
    pub den: u8,
}

impl CodeRate {
    pub fn value(self) -> f64 {
        f64::from(self.num) / f64::from(self.den)
    }
}

impl FromStr for CodeRate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad code rate `{s}`"));
        let (n, d) = s.split_once('/').ok_or_else(bad)?;
        let num: u8 = n.trim().parse().map_err(|_| bad())?;
        let den: u8 = d.trim().parse().map_err(|_| bad())?;
        if num == 0 || den == 0 || num >= den {
            return Err(bad());
        }
        Ok(CodeRate { num, den })
    }
}

impl fmt::Display for CodeRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// One row of the MCS table.
#[derive(Debug, Clone, PartialEq)]
pub struct McsProfile {
    pub id: u8,
    pub modulation: Modulation,
    pub code_rate: CodeRate,
    pub repetition: u8,
    /// Data rate in Mb/s per bandwidth.
    pub rates_mbps: BTreeMap<BandwidthMhz, f64>,
    /// Minimum detectable signal in dBm per bandwidth.
    pub mds_dbm: BTreeMap<BandwidthMhz, f64>,
}

/// Result of [`Catalog::mcs_lookup`] for one (MCS, bandwidth) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McsView {
    pub id: u8,
    pub bandwidth_mhz: BandwidthMhz,
    pub modulation: Modulation,
    pub code_rate: CodeRate,
    pub repetition: u8,
    pub rate_mbps: f64,
    /// `None` where no sensitivity is published for the pair.
    pub mds_dbm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegulatoryDomain {
    pub region: String,
    /// Inclusive frequency ranges in MHz.
    pub bands_mhz: Vec<(f64, f64)>,
    pub erp_limits_mw: Vec<f64>,
    pub bandwidths_mhz: Vec<BandwidthMhz>,
}

impl RegulatoryDomain {
    /// Largest permitted ERP expressed in dBm.
    pub fn max_erp_dbm(&self) -> f64 {
        let mw = self.erp_limits_mw.iter().copied().fold(f64::MIN, f64::max);
        10.0 * mw.log10()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfdmNumerology {
    pub tone_spacing_khz: f64,
    pub fft_size: usize,
    pub data_tones: usize,
    pub pilot_tones: usize,
    pub gi_us: f64,
    pub symbol_us: f64,
}

impl OfdmNumerology {
    pub fn bandwidth_mhz(&self) -> f64 {
        self.fft_size as f64 * self.tone_spacing_khz / 1000.0
    }

    /// Guard interval length in samples at the critical sampling rate.
    pub fn gi_samples(&self) -> usize {
        (self.gi_us * self.bandwidth_mhz()).round() as usize
    }

    /// Bandwidth actually occupied by data tones, in Hz.
    pub fn data_band_hz(&self) -> f64 {
        self.data_tones as f64 * self.tone_spacing_khz * 1e3
    }

    pub fn validate(&self) -> Result<()> {
        let fft_us = self.fft_size as f64 / self.bandwidth_mhz();
        if (fft_us + self.gi_us - self.symbol_us).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "symbol duration {} us != FFT period {} us + GI {} us",
                self.symbol_us, fft_us, self.gi_us
            )));
        }
        if self.data_tones + self.pilot_tones >= self.fft_size {
            return Err(Error::Config(
                "data and pilot tones exceed the FFT size".to_string(),
            ));
        }
        Ok(())
    }
}

impl Default for OfdmNumerology {
    /// The 1 MHz mode.
    fn default() -> Self {
        OfdmNumerology {
            tone_spacing_khz: 31.25,
            fft_size: 32,
            data_tones: 24,
            pilot_tones: 2,
            gi_us: 8.0,
            symbol_us: 40.0,
        }
    }
}

/// A named device preset, possibly tied to a regulatory domain.
#[derive(Debug, Clone, PartialEq)]
pub struct DevicePreset {
    pub name: String,
    pub role: Role,
    pub region: Option<String>,
    pub tx_power_dbm: Option<f64>,
    pub antenna_gain_dbi: f64,
    pub noise_figure_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    pub version: u32,
    pub numerology: OfdmNumerology,
    mcs: Vec<McsProfile>,
    regions: Vec<RegulatoryDomain>,
    devices: Vec<DevicePreset>,
}

impl Catalog {
    /// The catalog compiled into the library.
    pub fn builtin() -> Self {
        Self::from_toml_str(BUILTIN).expect("builtin catalog is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_toml_str(&text)
    }

    /// Loads from `path` if given, else from `$AHLINK_CATALOG`, else the builtin.
    pub fn resolve(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::load(p),
            None => match std::env::var_os(CATALOG_ENV) {
                Some(p) if !p.is_empty() => Self::load(p),
                _ => Ok(Self::builtin()),
            },
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawCatalog = toml::from_str(text).map_err(|e| Error::from_toml(text, e))?;
        raw.try_into()
    }

    pub fn mcs_profiles(&self) -> &[McsProfile] {
        &self.mcs
    }

    pub fn regions(&self) -> &[RegulatoryDomain] {
        &self.regions
    }

    pub fn devices(&self) -> &[DevicePreset] {
        &self.devices
    }

    pub fn mcs(&self, id: u8) -> Result<&McsProfile> {
        self.mcs
            .iter()
            .find(|m| m.id == id)
            .ok_or(Error::UnknownMcs(id))
    }

    /// Rate and sensitivity of one MCS at one bandwidth.
    ///
    /// Fails with [`Error::NotDefined`] when the table has no rate for the
    /// pair (for instance MCS9 at 2 MHz).
    pub fn mcs_lookup(&self, id: u8, bandwidth_mhz: BandwidthMhz) -> Result<McsView> {
        let m = self.mcs(id)?;
        let rate = m.rates_mbps.get(&bandwidth_mhz).copied().ok_or_else(|| {
            Error::NotDefined(format!("MCS{id} has no rate at {bandwidth_mhz} MHz"))
        })?;
        Ok(McsView {
            id,
            bandwidth_mhz,
            modulation: m.modulation,
            code_rate: m.code_rate,
            repetition: m.repetition,
            rate_mbps: rate,
            mds_dbm: m.mds_dbm.get(&bandwidth_mhz).copied(),
        })
    }

    /// Minimum detectable signal; errors instead of interpolating missing entries.
    pub fn mds(&self, id: u8, bandwidth_mhz: BandwidthMhz) -> Result<f64> {
        let m = self.mcs(id)?;
        m.mds_dbm.get(&bandwidth_mhz).copied().ok_or_else(|| {
            Error::NotDefined(format!(
                "no minimum detectable signal published for MCS{id} at {bandwidth_mhz} MHz"
            ))
        })
    }

    /// Case-insensitive region lookup.
    pub fn regulatory_lookup(&self, region: &str) -> Result<&RegulatoryDomain> {
        self.regions
            .iter()
            .find(|r| r.region.eq_ignore_ascii_case(region.trim()))
            .ok_or_else(|| Error::UnknownRegion {
                name: region.to_string(),
                known: self.regions.iter().map(|r| r.region.clone()).collect(),
            })
    }

    /// Resolves a named preset into a device profile. Region-bound presets
    /// take the region's largest ERP as transmit power.
    pub fn device(&self, name: &str) -> Result<DeviceProfile> {
        let preset = self
            .devices
            .iter()
            .find(|d| d.name.eq_ignore_ascii_case(name.trim()))
            .ok_or_else(|| Error::UnknownDevice {
                name: name.to_string(),
                known: self.devices.iter().map(|d| d.name.clone()).collect(),
            })?;
        let tx_power_dbm = match (&preset.region, preset.tx_power_dbm) {
            (_, Some(p)) => p,
            (Some(region), None) => self.regulatory_lookup(region)?.max_erp_dbm(),
            (None, None) => unreachable!("validated at load"),
        };
        Ok(DeviceProfile {
            role: preset.role,
            tx_power_dbm,
            antenna_gain_dbi: preset.antenna_gain_dbi,
            noise_figure_db: preset.noise_figure_db,
        })
    }

    /// Serializes back into the row-per-entry TOML layout.
    pub fn to_toml_string(&self) -> String {
        let mut s = String::new();
        let n = &self.numerology;
        let _ = writeln!(s, "version = {}\n", self.version);
        let _ = writeln!(s, "mcs = [");
        for m in &self.mcs {
            let _ = writeln!(
                s,
                "  {{ id = {}, modulation = \"{}\", code_rate = \"{}\", repetition = {}, rate_mbps = {}, mds_dbm = {} }},",
                m.id,
                m.modulation,
                m.code_rate,
                m.repetition,
                inline_map(&m.rates_mbps),
                inline_map(&m.mds_dbm)
            );
        }
        let _ = writeln!(s, "]\n");

        let _ = writeln!(s, "regions = [");
        for r in &self.regions {
            let bands: Vec<String> = r
                .bands_mhz
                .iter()
                .map(|(lo, hi)| format!("[{}, {}]", float(*lo), float(*hi)))
                .collect();
            let erp: Vec<String> = r.erp_limits_mw.iter().map(|v| float(*v)).collect();
            let bw: Vec<String> = r.bandwidths_mhz.iter().map(|b| b.to_string()).collect();
            let _ = writeln!(
                s,
                "  {{ region = \"{}\", bands_mhz = [{}], erp_mw = [{}], bandwidths_mhz = [{}] }},",
                r.region,
                bands.join(", "),
                erp.join(", "),
                bw.join(", ")
            );
        }
        let _ = writeln!(s, "]\n");

        let _ = writeln!(s, "devices = [");
        for d in &self.devices {
            let mut fields = vec![
                format!("name = \"{}\"", d.name),
                format!("role = \"{}\"", d.role),
            ];
            if let Some(r) = &d.region {
                fields.push(format!("region = \"{r}\""));
            }
            if let Some(p) = d.tx_power_dbm {
                fields.push(format!("tx_power_dbm = {}", float(p)));
            }
            fields.push(format!("antenna_gain_dbi = {}", float(d.antenna_gain_dbi)));
            fields.push(format!("noise_figure_db = {}", float(d.noise_figure_db)));
            let _ = writeln!(s, "  {{ {} }},", fields.join(", "));
        }
        let _ = writeln!(s, "]");
        let _ = writeln!(s, "\n[numerology]");
        let _ = writeln!(s, "tone_spacing_khz = {}", float(n.tone_spacing_khz));
        let _ = writeln!(s, "fft_size = {}", n.fft_size);
        let _ = writeln!(s, "data_tones = {}", n.data_tones);
        let _ = writeln!(s, "pilot_tones = {}", n.pilot_tones);
        let _ = writeln!(s, "gi_us = {}", float(n.gi_us));
        let _ = writeln!(s, "symbol_us = {}", float(n.symbol_us));
        s
    }
}

/// Shortest round-trip float literal that TOML still reads as a float.
fn float(v: f64) -> String {
    let s = format!("{v:?}");
    if s.contains(['.', 'e', 'E']) || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

fn inline_map(m: &BTreeMap<BandwidthMhz, f64>) -> String {
    if m.is_empty() {
        return "{}".to_string();
    }
    let body: Vec<String> = m
        .iter()
        .map(|(k, v)| format!("{k} = {}", float(*v)))
        .collect();
    format!("{{ {} }}", body.join(", "))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCatalog {
    version: u32,
    numerology: RawNumerology,
    mcs: Vec<RawMcs>,
    regions: Vec<RawRegion>,
    #[serde(default)]
    devices: Vec<RawDevice>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNumerology {
    tone_spacing_khz: f64,
    fft_size: usize,
    data_tones: usize,
    pilot_tones: usize,
    gi_us: f64,
    symbol_us: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMcs {
    id: u8,
    modulation: String,
    code_rate: String,
    repetition: u8,
    rate_mbps: BTreeMap<String, f64>,
    #[serde(default)]
    mds_dbm: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegion {
    region: String,
    bands_mhz: Vec<(f64, f64)>,
    erp_mw: Vec<f64>,
    bandwidths_mhz: Vec<BandwidthMhz>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDevice {
    name: String,
    role: String,
    region: Option<String>,
    tx_power_dbm: Option<f64>,
    antenna_gain_dbi: f64,
    noise_figure_db: f64,
}

fn bandwidth_keys(
    id: u8,
    what: &str,
    raw: BTreeMap<String, f64>,
) -> Result<BTreeMap<BandwidthMhz, f64>> {
    raw.into_iter()
        .map(|(k, v)| {
            k.parse::<BandwidthMhz>().map(|bw| (bw, v)).map_err(|_| {
                Error::Config(format!(
                    "MCS{id} {what}: bandwidth key `{k}` is not an integer"
                ))
            })
        })
        .collect()
}

impl TryFrom<RawCatalog> for Catalog {
    type Error = Error;

    fn try_from(raw: RawCatalog) -> Result<Self> {
        let n = raw.numerology;
        let numerology = OfdmNumerology {
            tone_spacing_khz: n.tone_spacing_khz,
            fft_size: n.fft_size,
            data_tones: n.data_tones,
            pilot_tones: n.pilot_tones,
            gi_us: n.gi_us,
            symbol_us: n.symbol_us,
        };
        numerology.validate()?;

        let mut mcs = Vec::with_capacity(raw.mcs.len());
        for m in raw.mcs {
            let profile = McsProfile {
                id: m.id,
                modulation: m.modulation.parse()?,
                code_rate: m.code_rate.parse()?,
                repetition: m.repetition,
                rates_mbps: bandwidth_keys(m.id, "rate_mbps", m.rate_mbps)?,
                mds_dbm: bandwidth_keys(m.id, "mds_dbm", m.mds_dbm)?,
            };
            if profile.id > 10 {
                return Err(Error::Config(format!(
                    "MCS index {} outside 0..=10",
                    profile.id
                )));
            }
            if profile.repetition == 0 || (profile.repetition == 2) != (profile.id == 10) {
                return Err(Error::Config(format!(
                    "MCS{}: repetition {} (only MCS10 repeats, factor 2)",
                    profile.id, profile.repetition
                )));
            }
            if let Some((bw, v)) = profile.mds_dbm.iter().find(|(_, v)| !(**v < 0.0)) {
                return Err(Error::Config(format!(
                    "MCS{} mds at {bw} MHz must be negative dBm, got {v}",
                    profile.id
                )));
            }
            if mcs.iter().any(|p: &McsProfile| p.id == profile.id) {
                return Err(Error::Config(format!("duplicate MCS{}", profile.id)));
            }
            mcs.push(profile);
        }
        mcs.sort_by_key(|m| m.id);
        check_rate_ordering(&mcs)?;

        let mut regions = Vec::with_capacity(raw.regions.len());
        for r in raw.regions {
            if r.erp_mw.is_empty() || r.erp_mw.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::Config(format!(
                    "{}: ERP limits must be non-empty and positive",
                    r.region
                )));
            }
            for &(lo, hi) in &r.bands_mhz {
                if !(614.0..=960.0).contains(&lo) || !(614.0..=960.0).contains(&hi) || lo > hi {
                    return Err(Error::Config(format!(
                        "{}: band {lo}-{hi} MHz outside 614-960 MHz",
                        r.region
                    )));
                }
            }
            regions.push(RegulatoryDomain {
                region: r.region,
                bands_mhz: r.bands_mhz,
                erp_limits_mw: r.erp_mw,
                bandwidths_mhz: r.bandwidths_mhz,
            });
        }

        let mut devices = Vec::with_capacity(raw.devices.len());
        for d in raw.devices {
            if d.region.is_none() && d.tx_power_dbm.is_none() {
                return Err(Error::Config(format!(
                    "device `{}` needs tx_power_dbm or region",
                    d.name
                )));
            }
            if let Some(region) = &d.region {
                if !regions
                    .iter()
                    .any(|r| r.region.eq_ignore_ascii_case(region))
                {
                    return Err(Error::Config(format!(
                        "device `{}` refers to unknown region `{region}`",
                        d.name
                    )));
                }
            }
            devices.push(DevicePreset {
                name: d.name,
                role: d.role.parse()?,
                region: d.region,
                tx_power_dbm: d.tx_power_dbm,
                antenna_gain_dbi: d.antenna_gain_dbi,
                noise_figure_db: d.noise_figure_db,
            });
        }

        Ok(Catalog {
            version: raw.version,
            numerology,
            mcs,
            regions,
            devices,
        })
    }
}

/// Rates must not decrease over MCS0..=9 at a fixed bandwidth, and MCS10 runs
/// at half the MCS0 rate.
fn check_rate_ordering(mcs: &[McsProfile]) -> Result<()> {
    let bandwidths: std::collections::BTreeSet<BandwidthMhz> = mcs
        .iter()
        .flat_map(|m| m.rates_mbps.keys().copied())
        .collect();
    for bw in bandwidths {
        let mut last: Option<(u8, f64)> = None;
        for m in mcs.iter().filter(|m| m.id <= 9) {
            if let Some(&r) = m.rates_mbps.get(&bw) {
                if let Some((prev_id, prev)) = last {
                    if r < prev {
                        return Err(Error::Config(format!(
                            "rate of MCS{} ({r}) below MCS{prev_id} ({prev}) at {bw} MHz",
                            m.id
                        )));
                    }
                }
                last = Some((m.id, r));
            }
        }
    }
    let zero = mcs.iter().find(|m| m.id == 0);
    let ten = mcs.iter().find(|m| m.id == 10);
    if let (Some(zero), Some(ten)) = (zero, ten) {
        for (bw, r10) in &ten.rates_mbps {
            if let Some(r0) = zero.rates_mbps.get(bw) {
                if (r10 - r0 / 2.0).abs() > 1e-12 {
                    return Err(Error::Config(format!(
                        "MCS10 rate {r10} at {bw} MHz is not half of MCS0 ({r0})"
                    )));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mcs0_and_mcs10_at_1mhz() {
        let c = Catalog::builtin();
        let v = c.mcs_lookup(0, 1).unwrap();
        assert_eq!(v.rate_mbps, 0.30);
        assert_eq!(v.mds_dbm, Some(-95.0));
        let v = c.mcs_lookup(10, 1).unwrap();
        assert_eq!(v.rate_mbps, 0.15);
        assert_eq!(v.mds_dbm, Some(-98.0));
        assert_eq!(v.repetition, 2);
    }

    #[test]
    fn mcs9_at_2mhz_is_not_defined() {
        let c = Catalog::builtin();
        assert!(matches!(c.mcs_lookup(9, 2), Err(Error::NotDefined(_))));
        assert!(matches!(c.mcs_lookup(11, 1), Err(Error::UnknownMcs(11))));
        assert!(matches!(c.mcs_lookup(0, 4), Err(Error::NotDefined(_))));
    }

    #[test]
    fn missing_mds_errors_instead_of_interpolating() {
        let c = Catalog::builtin();
        assert!(matches!(c.mds(3, 1), Err(Error::NotDefined(_))));
        assert_eq!(c.mds(9, 16).unwrap(), -58.0);
        assert_eq!(c.mds(0, 2).unwrap(), -92.0);
        let mds10 = c.mds(10, 1).unwrap();
        let mds0_1 = c.mds(0, 1).unwrap();
        let mds0_2 = c.mds(0, 2).unwrap();
        assert!(mds10 < mds0_1 && mds0_1 < mds0_2);
    }

    #[test]
    fn regions() {
        let c = Catalog::builtin();
        let eu = c.regulatory_lookup("Europe").unwrap();
        assert_eq!(eu.bands_mhz, vec![(863.0, 868.6)]);
        assert_eq!(eu.erp_limits_mw, vec![10.0]);
        assert_eq!(eu.bandwidths_mhz, vec![1, 2]);
        let us = c.regulatory_lookup("united states").unwrap();
        assert_eq!(us.bands_mhz, vec![(902.0, 928.0)]);
        assert_eq!(us.erp_limits_mw, vec![1000.0]);
        assert_eq!(us.bandwidths_mhz.first(), Some(&1));
        assert_eq!(us.bandwidths_mhz.last(), Some(&16));
        match c.regulatory_lookup("Mars") {
            Err(Error::UnknownRegion { known, .. }) => assert_eq!(known.len(), 6),
            other => panic!("expected unknown region, got {other:?}"),
        }
    }

    #[test]
    fn sixteen_mhz_is_ten_times_two_mhz() {
        let c = Catalog::builtin();
        for id in 0..=8 {
            let m = c.mcs(id).unwrap();
            let r2 = m.rates_mbps[&2];
            let r16 = m.rates_mbps[&16];
            assert!((r16 - 10.0 * r2).abs() < 1e-9, "MCS{id}: {r16} vs {r2}");
        }
    }

    #[test]
    fn device_presets_follow_region_erp() {
        let c = Catalog::builtin();
        assert!((c.device("ap-eu").unwrap().tx_power_dbm - 10.0).abs() < 1e-12);
        assert!((c.device("ap-us").unwrap().tx_power_dbm - 30.0).abs() < 1e-12);
        let st = c.device("st").unwrap();
        assert_eq!(
            (st.tx_power_dbm, st.antenna_gain_dbi, st.noise_figure_db),
            (0.0, 0.0, 5.0)
        );
        assert!(c.device("nope").is_err());
    }

    #[test]
    fn numerology_consistency() {
        let n = Catalog::builtin().numerology;
        assert_eq!(n, OfdmNumerology::default());
        assert!((n.bandwidth_mhz() - 1.0).abs() < 1e-12);
        assert_eq!(n.gi_samples(), 8);
        assert!((n.data_band_hz() - 750e3).abs() < 1e-6);
    }

    #[test]
    fn rejects_repetition_on_wrong_mcs() {
        let bad = BUILTIN.replace(
            "{ id = 1, modulation = \"QPSK\", code_rate = \"1/2\", repetition = 1",
            "{ id = 1, modulation = \"QPSK\", code_rate = \"1/2\", repetition = 2",
        );
        assert!(matches!(
            Catalog::from_toml_str(&bad),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn parse_errors_carry_position() {
        match Catalog::from_toml_str("version = 1\nnumerology = [\n") {
            Err(Error::Parse { line, .. }) => assert!(line >= 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let c = Catalog::builtin();
        let text = c.to_toml_string();
        let again = Catalog::from_toml_str(&text).unwrap();
        assert_eq!(c, again);
        assert_eq!(text, again.to_toml_string());
    }
}
