//! Outdoor path loss at 900 MHz, the link budget and its inversion for range.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeploymentKind {
    /// Access point antenna 15 m above rooftop.
    Macro,
    /// Antenna at rooftop level (pico / hot zone).
    Pico,
}

impl FromStr for DeploymentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "macro" => Ok(DeploymentKind::Macro),
            "pico" => Ok(DeploymentKind::Pico),
            _ => Err(Error::Config(format!(
                "unknown deployment `{s}` (macro | pico)"
            ))),
        }
    }
}

impl fmt::Display for DeploymentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeploymentKind::Macro => "macro",
            DeploymentKind::Pico => "pico",
        })
    }
}

/// Log-distance path loss `intercept + slope * log10(d)`, `d` in meters.
///
/// The 900 MHz carrier is folded into the intercepts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeploymentModel {
    pub kind: DeploymentKind,
    pub intercept_db: f64,
    pub slope_db_per_decade: f64,
}

impl DeploymentModel {
    pub const MACRO: DeploymentModel = DeploymentModel {
        kind: DeploymentKind::Macro,
        intercept_db: 8.0,
        slope_db_per_decade: 37.6,
    };

    pub const PICO: DeploymentModel = DeploymentModel {
        kind: DeploymentKind::Pico,
        intercept_db: 23.3,
        slope_db_per_decade: 36.7,
    };

    pub fn of(kind: DeploymentKind) -> Self {
        match kind {
            DeploymentKind::Macro => Self::MACRO,
            DeploymentKind::Pico => Self::PICO,
        }
    }

    /// Path loss in dB. The models are undefined below 1 m.
    pub fn path_loss(&self, distance_m: f64) -> Result<f64> {
        if !(distance_m >= 1.0) || distance_m.is_infinite() {
            return Err(Error::Domain(format!(
                "path loss needs a finite distance >= 1 m, got {distance_m}"
            )));
        }
        Ok(self.intercept_db + self.slope_db_per_decade * distance_m.log10())
    }

    /// Distance at which the path loss equals `loss_db`. May be below 1 m.
    pub fn distance_for_loss(&self, loss_db: f64) -> f64 {
        10f64.powf((loss_db - self.intercept_db) / self.slope_db_per_decade)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Ap,
    Rs,
    St,
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "AP" => Ok(Role::Ap),
            "RS" => Ok(Role::Rs),
            "ST" | "STA" => Ok(Role::St),
            _ => Err(Error::Config(format!("unknown role `{s}` (AP | RS | ST)"))),
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Ap => "AP",
            Role::Rs => "RS",
            Role::St => "ST",
        })
    }
}

/// RF parameters of one radio. The antenna gain applies on both transmit
/// and receive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceProfile {
    pub role: Role,
    pub tx_power_dbm: f64,
    pub antenna_gain_dbi: f64,
    pub noise_figure_db: f64,
}

impl DeviceProfile {
    /// Access point with the given transmit power (10 dBm in Europe, 30 dBm in the US).
    pub fn ap(tx_power_dbm: f64) -> Self {
        DeviceProfile {
            role: Role::Ap,
            tx_power_dbm,
            antenna_gain_dbi: 3.0,
            noise_figure_db: 3.0,
        }
    }

    /// Relay station: AP-like radio fixed at 10 dBm.
    pub fn rs() -> Self {
        DeviceProfile {
            role: Role::Rs,
            tx_power_dbm: 10.0,
            ..Self::ap(10.0)
        }
    }

    pub fn st() -> Self {
        DeviceProfile {
            role: Role::St,
            tx_power_dbm: 0.0,
            antenna_gain_dbi: 0.0,
            noise_figure_db: 5.0,
        }
    }

    pub fn with_tx_power(mut self, dbm: f64) -> Self {
        self.tx_power_dbm = dbm;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudgetResult {
    pub received_power_dbm: f64,
    pub path_loss_db: f64,
    pub fade_margin_db: f64,
}

/// Full link budget at `distance_m` with fade margin `fade_margin_db`.
pub fn link_budget(
    tx: &DeviceProfile,
    rx: &DeviceProfile,
    model: &DeploymentModel,
    distance_m: f64,
    fade_margin_db: f64,
) -> Result<LinkBudgetResult> {
    if !(fade_margin_db >= 0.0) {
        return Err(Error::Domain(format!(
            "fade margin must be >= 0 dB, got {fade_margin_db}"
        )));
    }
    let path_loss_db = model.path_loss(distance_m)?;
    Ok(LinkBudgetResult {
        received_power_dbm: tx.tx_power_dbm + tx.antenna_gain_dbi - path_loss_db
            + rx.antenna_gain_dbi
            - fade_margin_db,
        path_loss_db,
        fade_margin_db,
    })
}

/// Received power in dBm: `P_tx + G_tx - PL(d) + G_rx - FM`.
pub fn received_power(
    tx: &DeviceProfile,
    rx: &DeviceProfile,
    model: &DeploymentModel,
    distance_m: f64,
    fade_margin_db: f64,
) -> Result<f64> {
    link_budget(tx, rx, model, distance_m, fade_margin_db).map(|r| r.received_power_dbm)
}

/// Largest distance at which the received power still reaches `mds_dbm`.
pub fn max_range(
    tx: &DeviceProfile,
    rx: &DeviceProfile,
    model: &DeploymentModel,
    mds_dbm: f64,
    fade_margin_db: f64,
) -> Result<f64> {
    let at_one_meter = received_power(tx, rx, model, 1.0, fade_margin_db)?;
    if at_one_meter < mds_dbm {
        return Err(Error::NoCoverage(format!(
            "received power at 1 m is {at_one_meter:.2} dBm, below the {mds_dbm} dBm threshold"
        )));
    }
    let allowed_loss =
        tx.tx_power_dbm + tx.antenna_gain_dbi + rx.antenna_gain_dbi - fade_margin_db - mds_dbm;
    Ok(model.distance_for_loss(allowed_loss))
}
