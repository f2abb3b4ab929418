//! Dual-hop decode-and-forward composition.
//!
//! The relay station (RS) sits between the access point (AP) and the station
//! (ST). The AP-RS hop ("backhaul") has a fixed length, macro path loss and a
//! line-of-sight Rician channel; the RS-ST hop ("access") is Rayleigh faded
//! with macro or pico path loss and has variable length. In the downlink the
//! backhaul is hop 1; in the uplink it is hop 2.
//!
//! End-to-end outage and PER budgets are split between the hops (equally by
//! default). The end-to-end rate is half the weaker hop's rate because the
//! half-duplex relay needs two slots.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{check_probability_open, Error, Result};
use crate::fading::FadingModel;
use crate::link::LinkSpec;
use crate::propagation::{DeploymentKind, DeploymentModel, DeviceProfile, Role};
use crate::rate::{self, RateQuery};

/// Rician K-factor assumed on the AP-RS hop.
pub const BACKHAUL_K_FACTOR_DB: f64 = 9.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// AP -> RS -> ST
    Downlink,
    /// ST -> RS -> AP
    Uplink,
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dl" | "downlink" => Ok(Direction::Downlink),
            "ul" | "uplink" => Ok(Direction::Uplink),
            _ => Err(Error::Config(format!("unknown direction `{s}` (dl | ul)"))),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Downlink => "dl",
            Direction::Uplink => "ul",
        })
    }
}

/// Which physical hop of the relay chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Segment {
    /// AP-RS
    Backhaul,
    /// RS-ST
    Access,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayScenario {
    pub direction: Direction,
    pub ap: DeviceProfile,
    pub rs: DeviceProfile,
    pub st: DeviceProfile,
    pub backhaul_deployment: DeploymentModel,
    pub backhaul_fading: FadingModel,
    pub access_deployment: DeploymentModel,
    pub access_fading: FadingModel,
    /// AP-RS distance in meters.
    pub fixed_distance_m: f64,
    pub p_out_total: f64,
    /// Share of the end-to-end outage given to hop 1 (in transmission order).
    pub outage_split: f64,
    /// Share of the end-to-end PER given to hop 1.
    pub per_split: f64,
    pub mcs: u8,
}

impl RelayScenario {
    /// The reference scenario: 10 dBm AP and RS, Rician K = 9 dB macro
    /// backhaul, Rayleigh access hop, equal budget splits, MCS10.
    pub fn new(
        direction: Direction,
        access: DeploymentKind,
        fixed_distance_m: f64,
        p_out_total: f64,
    ) -> Self {
        RelayScenario {
            direction,
            ap: DeviceProfile::ap(10.0),
            rs: DeviceProfile::rs(),
            st: DeviceProfile::st(),
            backhaul_deployment: DeploymentModel::MACRO,
            backhaul_fading: FadingModel::rician(BACKHAUL_K_FACTOR_DB),
            access_deployment: DeploymentModel::of(access),
            access_fading: FadingModel::Rayleigh,
            fixed_distance_m,
            p_out_total,
            outage_split: 0.5,
            per_split: 0.5,
            mcs: 10,
        }
    }

    pub fn with_mcs(mut self, mcs: u8) -> Self {
        self.mcs = mcs;
        self
    }

    /// Drops fading on both hops (path loss only).
    pub fn without_fading(mut self) -> Self {
        self.backhaul_fading = FadingModel::None;
        self.access_fading = FadingModel::None;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fixed_distance_m >= 1.0) || self.fixed_distance_m.is_infinite() {
            return Err(Error::Config(format!(
                "AP-RS distance must be a finite value >= 1 m, got {}",
                self.fixed_distance_m
            )));
        }
        check_probability_open("end-to-end outage", self.p_out_total)
            .map_err(|e| Error::Config(e.to_string()))?;
        for (name, v) in [
            ("outage split", self.outage_split),
            ("PER split", self.per_split),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        if self.backhaul_deployment.kind != DeploymentKind::Macro {
            return Err(Error::Config(
                "the AP-RS hop always uses the macro path loss model".to_string(),
            ));
        }
        if matches!(self.backhaul_fading, FadingModel::Rayleigh) {
            return Err(Error::Config(
                "the AP-RS hop is Rician (or unfaded), not Rayleigh".to_string(),
            ));
        }
        if matches!(self.access_fading, FadingModel::Rician { .. }) {
            return Err(Error::Config(
                "the RS-ST hop is Rayleigh (or unfaded), not Rician".to_string(),
            ));
        }
        for (dev, role) in [
            (&self.ap, Role::Ap),
            (&self.rs, Role::Rs),
            (&self.st, Role::St),
        ] {
            if dev.role != role {
                return Err(Error::Config(format!(
                    "device in the {role} slot has role {}",
                    dev.role
                )));
            }
        }
        Ok(())
    }

    /// Hop 1 and hop 2 outage allocations, in transmission order.
    pub fn outage_allocation(&self) -> Result<(f64, f64)> {
        split_budget(self.p_out_total, self.outage_split)
    }

    /// Per-hop rate queries carrying the split PER target.
    pub fn hop_queries(&self, query: &RateQuery) -> Result<(RateQuery, RateQuery)> {
        let (p1, p2) = split_budget(query.target_per, self.per_split)?;
        Ok((query.with_target_per(p1), query.with_target_per(p2)))
    }

    /// Segment carried in time slot `hop` (1 or 2).
    pub fn segment(&self, hop: u8) -> Segment {
        match (self.direction, hop) {
            (Direction::Downlink, 1) | (Direction::Uplink, 2) => Segment::Backhaul,
            _ => Segment::Access,
        }
    }

    /// Time slot (1 or 2) in which `segment` is used.
    pub fn hop_index(&self, segment: Segment) -> u8 {
        if self.segment(1) == segment {
            1
        } else {
            2
        }
    }

    pub fn backhaul_link(&self) -> Result<LinkSpec> {
        self.segment_link(Segment::Backhaul)
    }

    pub fn access_link(&self) -> Result<LinkSpec> {
        self.segment_link(Segment::Access)
    }

    /// Both hops in transmission order.
    pub fn hop_links(&self) -> Result<(LinkSpec, LinkSpec)> {
        Ok((
            self.segment_link(self.segment(1))?,
            self.segment_link(self.segment(2))?,
        ))
    }

    fn segment_link(&self, segment: Segment) -> Result<LinkSpec> {
        let (p1, p2) = self.outage_allocation()?;
        let p_out = if self.hop_index(segment) == 1 { p1 } else { p2 };
        let (far, deployment, fading) = match segment {
            Segment::Backhaul => (self.ap, self.backhaul_deployment, self.backhaul_fading),
            Segment::Access => (self.st, self.access_deployment, self.access_fading),
        };
        let (tx, rx) = match self.direction {
            Direction::Downlink if segment == Segment::Backhaul => (far, self.rs),
            Direction::Downlink => (self.rs, far),
            Direction::Uplink if segment == Segment::Backhaul => (self.rs, far),
            Direction::Uplink => (far, self.rs),
        };
        Ok(LinkSpec::new(tx, rx, deployment, fading, p_out))
    }

    /// Name used in messages and summaries ("hop1 (AP-RS)").
    pub fn hop_label(&self, segment: Segment) -> String {
        let pair = match (segment, self.direction) {
            (Segment::Backhaul, Direction::Downlink) => "AP-RS",
            (Segment::Backhaul, Direction::Uplink) => "RS-AP",
            (Segment::Access, Direction::Downlink) => "RS-ST",
            (Segment::Access, Direction::Uplink) => "ST-RS",
        };
        format!("hop{} ({pair})", self.hop_index(segment))
    }
}

/// Equal split of an end-to-end outage budget across the two hops.
pub fn split_outage(p_out_total: f64) -> Result<(f64, f64)> {
    split_budget(p_out_total, 0.5)
}

/// Splits `total` into `(fraction * total, (1 - fraction) * total)`.
pub fn split_budget(total: f64, hop1_fraction: f64) -> Result<(f64, f64)> {
    check_probability_open("budget", total)?;
    if !(hop1_fraction > 0.0 && hop1_fraction < 1.0) {
        return Err(Error::Domain(format!(
            "hop 1 share must lie in (0, 1), got {hop1_fraction}"
        )));
    }
    let p1 = total * hop1_fraction;
    Ok((p1, total - p1))
}

/// End-to-end packet error rate of a decode-and-forward chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfPer {
    /// `PER1 + PER2 (1 - PER1)`
    pub exact: f64,
    /// `PER1 + PER2`
    pub approx: f64,
}

pub fn df_per(per1: f64, per2: f64) -> Result<DfPer> {
    for p in [per1, per2] {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::Domain(format!(
                "hop PER must lie in [0, 1), got {p}"
            )));
        }
    }
    Ok(DfPer {
        exact: per1 + per2 - per1 * per2,
        approx: per1 + per2,
    })
}

/// `0.5 * min(r1, r2)`: two half-duplex slots per delivered bit.
pub fn df_rate(r1: f64, r2: f64) -> f64 {
    debug_assert!(r1 >= 0.0 && r2 >= 0.0);
    0.5 * r1.min(r2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayRangeResult {
    /// Longest RS-ST distance.
    pub access_max_m: f64,
    pub fixed_distance_m: f64,
    /// `fixed_distance_m + access_max_m`
    pub total_max_m: f64,
    /// Hop (in transmission order) with the smaller headroom at the range limit.
    pub limiting_hop: u8,
    /// Fade margins of hop 1 and hop 2, in transmission order.
    pub per_hop_fm_db: (f64, f64),
    /// Received power above the threshold on the AP-RS hop.
    pub backhaul_headroom_db: f64,
}

/// Longest AP-ST distance at which both hops stay above `mds_dbm` after
/// their fade margins.
pub fn relay_max_range(s: &RelayScenario, mds_dbm: f64) -> Result<RelayRangeResult> {
    s.validate()?;
    let backhaul = s.backhaul_link()?;
    let access = s.access_link()?;
    let backhaul_power = backhaul.received_power(s.fixed_distance_m)?;
    let headroom = backhaul_power - mds_dbm;
    if headroom < 0.0 {
        return Err(Error::Infeasible {
            hop: s.hop_label(Segment::Backhaul),
            deficit_db: -headroom,
        });
    }
    let access_max_m = access.max_range(mds_dbm).map_err(|e| match e {
        Error::NoCoverage(_) => Error::Infeasible {
            hop: s.hop_label(Segment::Access),
            deficit_db: mds_dbm - access.received_power(1.0).unwrap_or(f64::NAN),
        },
        other => other,
    })?;
    let (h1, h2) = s.hop_links()?;
    let limiting_hop = if headroom <= 0.0 {
        s.hop_index(Segment::Backhaul)
    } else {
        s.hop_index(Segment::Access)
    };
    Ok(RelayRangeResult {
        access_max_m,
        fixed_distance_m: s.fixed_distance_m,
        total_max_m: s.fixed_distance_m + access_max_m,
        limiting_hop,
        per_hop_fm_db: (h1.fade_margin()?, h2.fade_margin()?),
        backhaul_headroom_db: headroom,
    })
}

/// Received powers at one RS-ST distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayPowerPoint {
    pub access_distance_m: f64,
    pub hop1_dbm: f64,
    pub hop2_dbm: f64,
    /// The weaker of the two.
    pub min_dbm: f64,
}

/// Per-hop received power (after fade margins) over a grid of RS-ST distances.
pub fn relay_power_sweep(s: &RelayScenario, distances_m: &[f64]) -> Result<Vec<RelayPowerPoint>> {
    s.validate()?;
    let backhaul = s.backhaul_link()?.received_power(s.fixed_distance_m)?;
    let access = s.access_link()?;
    let backhaul_first = s.hop_index(Segment::Backhaul) == 1;
    distances_m
        .par_iter()
        .map(|&d| {
            let a = access.received_power(d)?;
            let (hop1_dbm, hop2_dbm) = if backhaul_first {
                (backhaul, a)
            } else {
                (a, backhaul)
            };
            Ok(RelayPowerPoint {
                access_distance_m: d,
                hop1_dbm,
                hop2_dbm,
                min_dbm: hop1_dbm.min(hop2_dbm),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayRatePoint {
    pub access_distance_m: f64,
    pub hop1_bps: f64,
    pub hop2_bps: f64,
    pub df_bps: f64,
}

/// End-to-end decode-and-forward rate over a grid of RS-ST distances, with
/// the AP-RS hop held at the scenario's fixed distance.
pub fn relay_rate_sweep(
    s: &RelayScenario,
    query: &RateQuery,
    distances_m: &[f64],
) -> Result<Vec<RelayRatePoint>> {
    s.validate()?;
    let (q1, q2) = s.hop_queries(query)?;
    let backhaul_first = s.hop_index(Segment::Backhaul) == 1;
    let (q_backhaul, q_access) = if backhaul_first { (q1, q2) } else { (q2, q1) };
    let backhaul =
        rate::max_rate_at_distance(&s.backhaul_link()?, s.fixed_distance_m, &q_backhaul)?;
    let access = s.access_link()?;
    distances_m
        .par_iter()
        .map(|&d| {
            let a = rate::max_rate_at_distance(&access, d, &q_access)?;
            let (hop1_bps, hop2_bps) = if backhaul_first {
                (backhaul, a)
            } else {
                (a, backhaul)
            };
            Ok(RelayRatePoint {
                access_distance_m: d,
                hop1_bps,
                hop2_bps,
                df_bps: df_rate(hop1_bps, hop2_bps),
            })
        })
        .collect()
}

/// Longest RS-ST distance at which the end-to-end rate still reaches `target_bps`.
pub fn relay_max_access_distance_at_rate(
    s: &RelayScenario,
    query: &RateQuery,
    target_bps: f64,
) -> Result<f64> {
    s.validate()?;
    let (q1, q2) = s.hop_queries(query)?;
    let backhaul_first = s.hop_index(Segment::Backhaul) == 1;
    let (q_backhaul, q_access) = if backhaul_first { (q1, q2) } else { (q2, q1) };
    let per_hop_target = 2.0 * target_bps;
    let backhaul_db = rate::rate_db_hz(&s.backhaul_link()?, s.fixed_distance_m, &q_backhaul)?;
    let needed_db = 10.0 * per_hop_target.log10();
    if backhaul_db < needed_db {
        return Err(Error::Infeasible {
            hop: s.hop_label(Segment::Backhaul),
            deficit_db: needed_db - backhaul_db,
        });
    }
    let access = s.access_link()?;
    rate::max_distance_at_rate(&access, &q_access, per_hop_target).map_err(|e| match e {
        Error::NoCoverage(_) => Error::Infeasible {
            hop: s.hop_label(Segment::Access),
            deficit_db: needed_db - rate::rate_db_hz(&access, 1.0, &q_access).unwrap_or(f64::NAN),
        },
        other => other,
    })
}
