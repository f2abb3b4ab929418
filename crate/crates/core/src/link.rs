use crate::error::{check_probability_open, Result};
use crate::fading::FadingModel;
use crate::propagation::{self, DeploymentModel, DeviceProfile};

/// One radio hop: who transmits, who receives, the propagation environment
/// and the outage probability allocated to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSpec {
    pub tx: DeviceProfile,
    pub rx: DeviceProfile,
    pub deployment: DeploymentModel,
    pub fading: FadingModel,
    /// Ignored when `fading` is [`FadingModel::None`].
    pub p_out: f64,
}

impl LinkSpec {
    pub fn new(
        tx: DeviceProfile,
        rx: DeviceProfile,
        deployment: DeploymentModel,
        fading: FadingModel,
        p_out: f64,
    ) -> Self {
        LinkSpec {
            tx,
            rx,
            deployment,
            fading,
            p_out,
        }
    }

    pub fn fade_margin(&self) -> Result<f64> {
        if self.fading == FadingModel::None {
            return Ok(0.0);
        }
        check_probability_open("outage probability", self.p_out)?;
        self.fading.fade_margin(self.p_out)
    }

    /// Received power after the fade margin, in dBm. A negative margin
    /// (outage above `1 - 1/e`) is credited back to the budget.
    pub fn received_power(&self, distance_m: f64) -> Result<f64> {
        let fm = self.fade_margin()?;
        let p = propagation::received_power(&self.tx, &self.rx, &self.deployment, distance_m, 0.0)?;
        Ok(p - fm)
    }

    pub fn max_range(&self, mds_dbm: f64) -> Result<f64> {
        let fm = self.fade_margin()?;
        propagation::max_range(&self.tx, &self.rx, &self.deployment, mds_dbm + fm, 0.0)
    }
}
