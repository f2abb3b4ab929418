//! Link budget, fade margin, rate and relay analysis for sub-GHz 802.11ah
//! style links, plus a Monte-Carlo OFDM physical layer simulator.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod error;
pub mod fading;
pub mod link;
pub mod propagation;
pub mod rate;
pub mod relay;
pub mod scenario;
pub mod sim;
pub mod special;

pub use catalog::{Catalog, McsProfile, OfdmNumerology, RegulatoryDomain};
pub use error::{Error, Result};
pub use fading::{outage_from_margin, rayleigh_fade_margin, rician_fade_margin, FadingModel};
pub use link::LinkSpec;
pub use propagation::{DeploymentKind, DeploymentModel, DeviceProfile, Role};
pub use rate::RateQuery;
pub use relay::{Direction, RelayScenario};
pub use scenario::{Grid, Scenario};
pub use sim::{simulate_relay, BerEstimate, SimConfig};
