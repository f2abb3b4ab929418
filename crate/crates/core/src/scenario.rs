//! Scenario files: a relay setup plus optional rate, sweep and simulator
//! sections, written in TOML.
//!
//! ```toml
//! direction = "dl"
//! fixed_distance_m = 850.0
//! p_out_total = 0.1
//! mcs = 10
//!
//! [access]
//! deployment = "macro"
//!
//! [devices.ap]
//! preset = "ap-eu"
//!
//! [rate]
//! packet_bytes = 256
//! target_per = 0.1
//! target_bps = 1e5
//!
//! [sweep]
//! start = 10.0
//! stop = 800.0
//! step = 10.0
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;
use toml::Spanned;

use crate::catalog::Catalog;
use crate::error::{Error, Result};
use crate::fading::FadingModel;
use crate::propagation::{DeploymentKind, DeploymentModel, DeviceProfile};
use crate::rate::RateQuery;
use crate::relay::{Direction, RelayScenario, BACKHAUL_K_FACTOR_DB};
use crate::sim::{PowerDelayProfile, SimConfig, DEFAULT_MIN_ERRORS, DEFAULT_NOISE_DBW};

/// Inclusive arithmetic grid `start, start + step, ..., <= stop`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        let g = Grid { start, stop, step };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.step.is_finite()) {
            return Err(Error::Config("grid bounds must be finite".to_string()));
        }
        if !(self.start < self.stop) {
            return Err(Error::Config(format!(
                "grid start {} must be below stop {}",
                self.start, self.stop
            )));
        }
        if !(self.step > 0.0) {
            return Err(Error::Config(format!(
                "grid step {} must be positive",
                self.step
            )));
        }
        Ok(())
    }

    /// The grid points; the last one is `stop` when the step divides the span.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

/// Parses `start:stop:step`.
impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts.as_slice() else {
            return Err(Error::Config(format!("grid `{s}` is not start:stop:step")));
        };
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("grid value `{t}` is not a number")))
        };
        Grid::new(num(a)?, num(b)?, num(c)?)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateSection {
    pub query: RateQuery,
    /// End-to-end rate target in bit/s, when given.
    pub target_bps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSection {
    pub trials: u64,
    pub min_errors: u64,
    pub seed: u64,
    pub mcs: Option<u8>,
    pub noise_dbw: f64,
    pub pdp: Option<PowerDelayProfile>,
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection {
            trials: 200_000,
            min_errors: DEFAULT_MIN_ERRORS,
            seed: 1,
            mcs: None,
            noise_dbw: DEFAULT_NOISE_DBW,
            pdp: None,
        }
    }
}

/// A parsed scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub relay: RelayScenario,
    pub bandwidth_mhz: u32,
    pub rate: Option<RateSection>,
    pub sweep: Option<Grid>,
    pub sim: Option<SimSection>,
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>, catalog: &Catalog) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_toml_str(&text, catalog)
    }

    pub fn from_toml_str(text: &str, catalog: &Catalog) -> Result<Self> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| Error::from_toml(text, e))?;
        raw.resolve(text, catalog)
    }

    /// Minimum detectable signal for the scenario's MCS and bandwidth.
    pub fn mds(&self, catalog: &Catalog) -> Result<f64> {
        catalog.mds(self.relay.mcs, self.bandwidth_mhz)
    }

    /// Simulator setup over `grid` (or the `[sweep]` grid).
    pub fn sim_config(&self, grid: Option<&Grid>) -> Result<SimConfig> {
        let sim = self.sim.clone().unwrap_or_default();
        let grid = grid.or(self.sweep.as_ref()).ok_or_else(|| {
            Error::Config("no distance grid: add [sweep] or pass a grid".to_string())
        })?;
        let mcs = sim.mcs.unwrap_or(self.relay.mcs);
        let mut cfg = SimConfig::new(self.relay.with_mcs(mcs), mcs, grid.points());
        cfg.trials = sim.trials;
        cfg.min_errors = sim.min_errors;
        cfg.master_seed = sim.seed;
        cfg.noise_power_dbw = sim.noise_dbw;
        if let Some(pdp) = sim.pdp {
            cfg.pdp = pdp;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    direction: Spanned<String>,
    fixed_distance_m: f64,
    p_out_total: f64,
    #[serde(default = "default_mcs")]
    mcs: u8,
    #[serde(default = "default_bandwidth")]
    bandwidth_mhz: u32,
    #[serde(default)]
    outage_split: Option<f64>,
    #[serde(default)]
    per_split: Option<f64>,
    #[serde(default)]
    backhaul: RawBackhaul,
    #[serde(default)]
    access: RawAccess,
    #[serde(default)]
    devices: RawDevices,
    rate: Option<RawRate>,
    sweep: Option<Grid>,
    sim: Option<RawSim>,
}

fn default_mcs() -> u8 {
    10
}

fn default_bandwidth() -> u32 {
    1
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBackhaul {
    fading: Option<Spanned<String>>,
    k_factor_db: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAccess {
    deployment: Option<Spanned<String>>,
    fading: Option<Spanned<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDevices {
    ap: Option<RawDevice>,
    rs: Option<RawDevice>,
    st: Option<RawDevice>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDevice {
    preset: Option<Spanned<String>>,
    tx_power_dbm: Option<f64>,
    antenna_gain_dbi: Option<f64>,
    noise_figure_db: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRate {
    packet_bytes: Option<u32>,
    packet_bits: Option<u32>,
    target_per: f64,
    #[serde(default)]
    coding_gain_db: f64,
    target_bps: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    trials: Option<u64>,
    min_errors: Option<u64>,
    seed: Option<u64>,
    mcs: Option<u8>,
    noise_dbw: Option<f64>,
    /// `[[delay_samples, power], ...]`
    pdp: Option<Spanned<Vec<(usize, f64)>>>,
}

/// Parse error pointing at a spanned value.
fn at<T>(text: &str, v: &Spanned<T>, message: String) -> Error {
    let before = &text[..v.span().start.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    Error::Parse {
        line,
        column,
        message,
    }
}

fn parse_spanned<T: FromStr>(text: &str, v: &Spanned<String>, what: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    v.get_ref()
        .parse()
        .map_err(|e: T::Err| at(text, v, format!("invalid {what}: {e}")))
}

impl RawScenario {
    fn resolve(self, text: &str, catalog: &Catalog) -> Result<Scenario> {
        let direction: Direction = parse_spanned(text, &self.direction, "direction")?;

        let access_kind = match &self.access.deployment {
            Some(d) => parse_spanned::<DeploymentKind>(text, d, "deployment")?,
            None => DeploymentKind::Macro,
        };
        let mut relay = RelayScenario::new(
            direction,
            access_kind,
            self.fixed_distance_m,
            self.p_out_total,
        )
        .with_mcs(self.mcs);
        catalog.mcs(self.mcs)?;

        relay.access_fading = match &self.access.fading {
            None => FadingModel::Rayleigh,
            Some(f) => match f.get_ref().to_ascii_lowercase().as_str() {
                "rayleigh" => FadingModel::Rayleigh,
                "none" => FadingModel::None,
                other => {
                    return Err(at(
                        text,
                        f,
                        format!("access fading `{other}` is not rayleigh | none"),
                    ))
                }
            },
        };
        let k = self.backhaul.k_factor_db.unwrap_or(BACKHAUL_K_FACTOR_DB);
        relay.backhaul_fading = match &self.backhaul.fading {
            None => FadingModel::rician(k),
            Some(f) => match f.get_ref().to_ascii_lowercase().as_str() {
                "rician" => FadingModel::rician(k),
                "none" => FadingModel::None,
                other => {
                    return Err(at(
                        text,
                        f,
                        format!("backhaul fading `{other}` is not rician | none"),
                    ))
                }
            },
        };
        relay.backhaul_deployment = DeploymentModel::MACRO;
        if let Some(s) = self.outage_split {
            relay.outage_split = s;
        }
        if let Some(s) = self.per_split {
            relay.per_split = s;
        }

        relay.ap = device(text, catalog, self.devices.ap.as_ref(), "ap-eu")?;
        relay.rs = device(text, catalog, self.devices.rs.as_ref(), "rs")?;
        relay.st = device(text, catalog, self.devices.st.as_ref(), "st")?;
        relay.validate()?;

        let rate = match self.rate {
            None => None,
            Some(r) => {
                let bits = match (r.packet_bits, r.packet_bytes) {
                    (Some(_), Some(_)) => {
                        return Err(Error::Config(
                            "[rate] takes packet_bits or packet_bytes, not both".to_string(),
                        ))
                    }
                    (Some(b), None) => b,
                    (None, Some(b)) => b
                        .checked_mul(8)
                        .ok_or_else(|| Error::Config(format!("packet of {b} bytes is too long")))?,
                    (None, None) => {
                        return Err(Error::Config(
                            "[rate] needs packet_bits or packet_bytes".to_string(),
                        ))
                    }
                };
                let query = RateQuery::new(bits, r.target_per).with_coding_gain(r.coding_gain_db);
                query.validate()?;
                if let Some(t) = r.target_bps {
                    if !(t > 0.0 && t.is_finite()) {
                        return Err(Error::Config(format!("target rate {t} must be positive")));
                    }
                }
                Some(RateSection {
                    query,
                    target_bps: r.target_bps,
                })
            }
        };

        if let Some(g) = &self.sweep {
            g.validate()?;
        }

        let sim = match self.sim {
            None => None,
            Some(s) => {
                let d = SimSection::default();
                let pdp = match &s.pdp {
                    None => None,
                    Some(taps) => Some(
                        PowerDelayProfile::new(
                            taps.get_ref()
                                .iter()
                                .map(|&(delay, power)| crate::sim::Tap { delay, power })
                                .collect(),
                        )
                        .map_err(|e| at(text, taps, e.to_string()))?,
                    ),
                };
                Some(SimSection {
                    trials: s.trials.unwrap_or(d.trials),
                    min_errors: s.min_errors.unwrap_or(d.min_errors),
                    seed: s.seed.unwrap_or(d.seed),
                    mcs: s.mcs,
                    noise_dbw: s.noise_dbw.unwrap_or(d.noise_dbw),
                    pdp,
                })
            }
        };

        Ok(Scenario {
            relay,
            bandwidth_mhz: self.bandwidth_mhz,
            rate,
            sweep: self.sweep,
            sim,
        })
    }
}

fn device(
    text: &str,
    catalog: &Catalog,
    raw: Option<&RawDevice>,
    default: &str,
) -> Result<DeviceProfile> {
    let mut d = match raw.and_then(|r| r.preset.as_ref()) {
        Some(p) => catalog
            .device(p.get_ref())
            .map_err(|e| at(text, p, e.to_string()))?,
        None => catalog.device(default)?,
    };
    if let Some(r) = raw {
        if let Some(v) = r.tx_power_dbm {
            d.tx_power_dbm = v;
        }
        if let Some(v) = r.antenna_gain_dbi {
            d.antenna_gain_dbi = v;
        }
        if let Some(v) = r.noise_figure_db {
            d.noise_figure_db = v;
        }
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    const DL: &str = r#"
direction = "dl"
fixed_distance_m = 850.0
p_out_total = 0.1

[access]
deployment = "macro"

[rate]
packet_bytes = 256
target_per = 0.1
target_bps = 1e5
"#;

    #[test]
    fn minimal_file_uses_reference_defaults() {
        let s = Scenario::from_toml_str(DL, &Catalog::builtin()).unwrap();
        let want = RelayScenario::new(Direction::Downlink, DeploymentKind::Macro, 850.0, 0.1);
        assert_eq!(s.relay, want);
        let r = s.rate.clone().unwrap();
        assert_eq!(r.query.packet_length_bits, 2048);
        assert_eq!(r.target_bps, Some(1e5));
        assert_eq!(s.mds(&Catalog::builtin()).unwrap(), -98.0);
    }

    #[test]
    fn device_overrides() {
        let text = format!("{DL}\n[devices.ap]\npreset = \"ap-us\"\nantenna_gain_dbi = 6.0\n");
        let s = Scenario::from_toml_str(&text, &Catalog::builtin()).unwrap();
        assert_eq!(s.relay.ap.tx_power_dbm, 30.0);
        assert_eq!(s.relay.ap.antenna_gain_dbi, 6.0);
    }

    #[test]
    fn errors_carry_positions() {
        let bad = DL.replace("\"macro\"", "\"macr\"");
        match Scenario::from_toml_str(&bad, &Catalog::builtin()) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (7, 14)),
            other => panic!("{other:?}"),
        }
        let bad = DL.replace("p_out_total", "p_out_totl");
        assert!(matches!(
            Scenario::from_toml_str(&bad, &Catalog::builtin()),
            Err(Error::Parse { line: 4, .. })
        ));
        let bad = format!("{DL}\n[devices.st]\npreset = \"phone\"\n");
        assert!(matches!(
            Scenario::from_toml_str(&bad, &Catalog::builtin()),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn role_mismatch_is_rejected() {
        let bad = format!("{DL}\n[devices.rs]\npreset = \"st\"\n");
        assert!(matches!(
            Scenario::from_toml_str(&bad, &Catalog::builtin()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn sim_section() {
        let text = format!(
            "{DL}\n[sweep]\nstart = 50.0\nstop = 300.0\nstep = 50.0\n\n[sim]\ntrials = 1000\nseed = 7\nmcs = 0\npdp = [[0, 0.75], [2, 0.25]]\n"
        );
        let s = Scenario::from_toml_str(&text, &Catalog::builtin()).unwrap();
        let cfg = s.sim_config(None).unwrap();
        assert_eq!(cfg.mcs, 0);
        assert_eq!(cfg.master_seed, 7);
        assert_eq!(
            cfg.distance_grid,
            vec![50.0, 100.0, 150.0, 200.0, 250.0, 300.0]
        );
        assert_eq!(cfg.pdp.taps().len(), 2);

        let bad = text.replace("0.25]]", "0.5]]");
        assert!(matches!(
            Scenario::from_toml_str(&bad, &Catalog::builtin()),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn grids() {
        let g: Grid = "10:50:10".parse().unwrap();
        assert_eq!(g.points(), vec![10.0, 20.0, 30.0, 40.0, 50.0]);
        let g: Grid = "0.1:0.4:0.1".parse().unwrap();
        assert_eq!(g.points().len(), 4);
        for bad in ["10:5:1", "1:5:0", "1:5", "a:b:c", "1:5:-1"] {
            assert!(bad.parse::<Grid>().is_err(), "{bad}");
        }
    }
}
