//! Python module `ahlink`.

use std::path::PathBuf;

use ahlink_core::catalog::Catalog as CoreCatalog;
use ahlink_core::fading::{self, FadingModel};
use ahlink_core::link::LinkSpec;
use ahlink_core::propagation::{DeploymentKind, DeploymentModel};
use ahlink_core::rate::{self, RateQuery};
use ahlink_core::relay::{self, Segment};
use ahlink_core::scenario::{Grid, Scenario as CoreScenario};
use ahlink_core::sim::simulate_relay;
use ahlink_core::Error;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(ahlink, AhlinkError, PyException);
create_exception!(ahlink, InfeasibleError, AhlinkError);

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Infeasible { .. } | Error::NoCoverage(_) => InfeasibleError::new_err(e.to_string()),
        _ => AhlinkError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for ahlink_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn fading_model(model: &str, k_db: f64) -> PyResult<FadingModel> {
    match model.to_ascii_lowercase().as_str() {
        "rayleigh" => Ok(FadingModel::Rayleigh),
        "rician" => Ok(FadingModel::rician(k_db)),
        "none" => Ok(FadingModel::None),
        _ => Err(AhlinkError::new_err(format!(
            "unknown fading model `{model}` (rayleigh | rician | none)"
        ))),
    }
}

fn deployment(name: &str) -> PyResult<DeploymentModel> {
    Ok(DeploymentModel::of(name.parse::<DeploymentKind>().py()?))
}

/// Rayleigh fade margin in dB for outage probability `p_out`.
#[pyfunction]
fn rayleigh_fade_margin(p_out: f64) -> PyResult<f64> {
    fading::rayleigh_fade_margin(p_out).py()
}

/// Rician fade margin in dB.
#[pyfunction]
fn rician_fade_margin(k_db: f64, p_out: f64) -> PyResult<f64> {
    fading::rician_fade_margin(k_db, p_out).py()
}

#[pyfunction]
#[pyo3(signature = (model, margin_db, k_db = 9.0))]
fn outage_from_margin(model: &str, margin_db: f64, k_db: f64) -> PyResult<f64> {
    fading::outage_from_margin(fading_model(model, k_db)?, margin_db).py()
}

#[pyfunction]
fn path_loss(deployment_name: &str, distance_m: f64) -> PyResult<f64> {
    deployment(deployment_name)?.path_loss(distance_m).py()
}

#[pyfunction]
fn ber_from_per(per: f64, packet_bits: u32) -> PyResult<f64> {
    rate::ber_from_per(per, packet_bits).py()
}

#[pyfunction]
fn ebn0_for_ber_bpsk(ber: f64) -> PyResult<f64> {
    rate::ebn0_for_ber_bpsk(ber).py()
}

/// `(exact, approx)` end-to-end PER of two decode-and-forward hops.
#[pyfunction]
fn df_per(per1: f64, per2: f64) -> PyResult<(f64, f64)> {
    let p = relay::df_per(per1, per2).py()?;
    Ok((p.exact, p.approx))
}

#[pyfunction]
fn df_rate(r1: f64, r2: f64) -> f64 {
    relay::df_rate(r1, r2)
}

/// MCS tables, regulatory domains and device presets.
#[pyclass(frozen)]
struct Catalog(CoreCatalog);

#[pymethods]
impl Catalog {
    /// Built-in catalog, or the TOML file at `path`.
    #[new]
    #[pyo3(signature = (path = None))]
    fn new(path: Option<PathBuf>) -> PyResult<Self> {
        match path {
            Some(p) => Ok(Catalog(CoreCatalog::load(p).py()?)),
            None => Ok(Catalog(CoreCatalog::builtin())),
        }
    }

    #[pyo3(signature = (mcs, bw_mhz = 1))]
    fn mds(&self, mcs: u8, bw_mhz: u32) -> PyResult<f64> {
        self.0.mds(mcs, bw_mhz).py()
    }

    #[pyo3(signature = (mcs, bw_mhz = 1))]
    fn mcs<'py>(&self, py: Python<'py>, mcs: u8, bw_mhz: u32) -> PyResult<Bound<'py, PyDict>> {
        let v = self.0.mcs_lookup(mcs, bw_mhz).py()?;
        let d = PyDict::new(py);
        d.set_item("id", v.id)?;
        d.set_item("bandwidth_mhz", v.bandwidth_mhz)?;
        d.set_item("modulation", v.modulation.to_string())?;
        d.set_item("code_rate", v.code_rate.to_string())?;
        d.set_item("repetition", v.repetition)?;
        d.set_item("rate_mbps", v.rate_mbps)?;
        d.set_item("mds_dbm", v.mds_dbm)?;
        Ok(d)
    }

    fn max_erp_dbm(&self, region: &str) -> PyResult<f64> {
        Ok(self.0.regulatory_lookup(region).py()?.max_erp_dbm())
    }

    fn to_toml(&self) -> String {
        self.0.to_toml_string()
    }
}

/// A single point-to-point link between two catalog devices.
#[pyclass(frozen)]
struct Link(LinkSpec);

#[pymethods]
impl Link {
    #[new]
    #[pyo3(signature = (tx = "ap-eu", rx = "st", deployment = "macro", fading = "rayleigh", k_db = 9.0, p_out = 0.1, catalog = None))]
    fn new(
        tx: &str,
        rx: &str,
        deployment: &str,
        fading: &str,
        k_db: f64,
        p_out: f64,
        catalog: Option<&Catalog>,
    ) -> PyResult<Self> {
        let builtin;
        let cat = match catalog {
            Some(c) => &c.0,
            None => {
                builtin = CoreCatalog::builtin();
                &builtin
            }
        };
        let model = if p_out == 0.0 {
            FadingModel::None
        } else {
            fading_model(fading, k_db)?
        };
        Ok(Link(LinkSpec::new(
            cat.device(tx).py()?,
            cat.device(rx).py()?,
            self::deployment(deployment)?,
            model,
            p_out,
        )))
    }

    fn fade_margin(&self) -> PyResult<f64> {
        self.0.fade_margin().py()
    }

    fn received_power(&self, distance_m: f64) -> PyResult<f64> {
        self.0.received_power(distance_m).py()
    }

    fn max_range(&self, mds_dbm: f64) -> PyResult<f64> {
        self.0.max_range(mds_dbm).py()
    }

    #[pyo3(signature = (distance_m, packet_bits = 32768, per = 0.1, coding_gain_db = 0.0))]
    fn rate_at(
        &self,
        distance_m: f64,
        packet_bits: u32,
        per: f64,
        coding_gain_db: f64,
    ) -> PyResult<f64> {
        let q = RateQuery::new(packet_bits, per).with_coding_gain(coding_gain_db);
        rate::max_rate_at_distance(&self.0, distance_m, &q).py()
    }

    #[pyo3(signature = (target_bps, packet_bits = 32768, per = 0.1, coding_gain_db = 0.0))]
    fn distance_at_rate(
        &self,
        target_bps: f64,
        packet_bits: u32,
        per: f64,
        coding_gain_db: f64,
    ) -> PyResult<f64> {
        let q = RateQuery::new(packet_bits, per).with_coding_gain(coding_gain_db);
        rate::max_distance_at_rate(&self.0, &q, target_bps).py()
    }
}

/// A two-hop relay scenario loaded from TOML.
#[pyclass(frozen)]
struct Scenario {
    inner: CoreScenario,
    catalog: CoreCatalog,
}

fn parse_grid(grid: Option<&str>) -> PyResult<Option<Grid>> {
    grid.map(|g| g.parse::<Grid>().py()).transpose()
}

#[pymethods]
impl Scenario {
    #[staticmethod]
    #[pyo3(signature = (path, catalog = None))]
    fn load(path: PathBuf, catalog: Option<&Catalog>) -> PyResult<Self> {
        let catalog = catalog.map_or_else(CoreCatalog::builtin, |c| c.0.clone());
        Ok(Scenario {
            inner: CoreScenario::load(path, &catalog).py()?,
            catalog,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (text, catalog = None))]
    fn from_toml(text: &str, catalog: Option<&Catalog>) -> PyResult<Self> {
        let catalog = catalog.map_or_else(CoreCatalog::builtin, |c| c.0.clone());
        Ok(Scenario {
            inner: CoreScenario::from_toml_str(text, &catalog).py()?,
            catalog,
        })
    }

    #[getter]
    fn access_hop(&self) -> u8 {
        self.inner.relay.hop_index(Segment::Access)
    }

    /// Range at the scenario's MCS sensitivity.
    fn max_range<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let mds = self.inner.mds(&self.catalog).py()?;
        let r = relay::relay_max_range(&self.inner.relay, mds).py()?;
        let d = PyDict::new(py);
        d.set_item("access_max_m", r.access_max_m)?;
        d.set_item("total_max_m", r.total_max_m)?;
        d.set_item("limiting_hop", r.limiting_hop)?;
        d.set_item("fm_db", r.per_hop_fm_db)?;
        d.set_item("backhaul_headroom_db", r.backhaul_headroom_db)?;
        Ok(d)
    }

    /// `(distance_m, hop1_bps, hop2_bps, df_bps)` rows.
    fn rate_sweep(&self, distances_m: Vec<f64>) -> PyResult<Vec<(f64, f64, f64, f64)>> {
        let q = self.query()?;
        let pts = relay::relay_rate_sweep(&self.inner.relay, &q, &distances_m).py()?;
        Ok(pts
            .iter()
            .map(|p| (p.access_distance_m, p.hop1_bps, p.hop2_bps, p.df_bps))
            .collect())
    }

    fn max_access_distance_at_rate(&self, target_bps: f64) -> PyResult<f64> {
        let q = self.query()?;
        relay::relay_max_access_distance_at_rate(&self.inner.relay, &q, target_bps).py()
    }

    /// Monte-Carlo BER rows `(distance_m, ber, bits, ci95)`. Releases the GIL.
    #[pyo3(signature = (grid = None, trials = None, seed = None, workers = 0))]
    fn simulate_ber(
        &self,
        py: Python<'_>,
        grid: Option<&str>,
        trials: Option<u64>,
        seed: Option<u64>,
        workers: usize,
    ) -> PyResult<Vec<(f64, f64, u64, f64)>> {
        let grid = parse_grid(grid)?;
        let mut cfg = self.inner.sim_config(grid.as_ref()).py()?;
        if let Some(t) = trials {
            cfg.trials = t;
        }
        if let Some(s) = seed {
            cfg.master_seed = s;
        }
        cfg.workers = workers;
        let rows = py.detach(|| simulate_relay(&cfg)).py()?;
        Ok(rows
            .iter()
            .map(|r| (r.distance_m, r.ber, r.bit_count, r.ci_halfwidth))
            .collect())
    }
}

impl Scenario {
    fn query(&self) -> PyResult<RateQuery> {
        self.inner
            .rate
            .as_ref()
            .map(|r| r.query)
            .ok_or_else(|| AhlinkError::new_err("scenario has no [rate] section"))
    }
}

#[pymodule]
fn ahlink(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("AhlinkError", m.py().get_type::<AhlinkError>())?;
    m.add("InfeasibleError", m.py().get_type::<InfeasibleError>())?;
    m.add_function(wrap_pyfunction!(rayleigh_fade_margin, m)?)?;
    m.add_function(wrap_pyfunction!(rician_fade_margin, m)?)?;
    m.add_function(wrap_pyfunction!(outage_from_margin, m)?)?;
    m.add_function(wrap_pyfunction!(path_loss, m)?)?;
    m.add_function(wrap_pyfunction!(ber_from_per, m)?)?;
    m.add_function(wrap_pyfunction!(ebn0_for_ber_bpsk, m)?)?;
    m.add_function(wrap_pyfunction!(df_per, m)?)?;
    m.add_function(wrap_pyfunction!(df_rate, m)?)?;
    m.add_class::<Catalog>()?;
    m.add_class::<Link>()?;
    m.add_class::<Scenario>()?;
    Ok(())
}
