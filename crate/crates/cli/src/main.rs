//! `ahlink`: link budget, rate, relay and BER sweeps from the command line.
//!
//! Rows go to `--output` (`-` for standard output); a one-line
//! `key=value` summary always goes to standard output. Failures print one
//! `error: kind=...` line on standard error and exit with 2 (configuration),
//! 3 (infeasible scenario) or 4 (numeric failure).

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ahlink_core::catalog::{Catalog, CATALOG_ENV};
use ahlink_core::fading::{outage_from_margin, FadingModel};
use ahlink_core::link::LinkSpec;
use ahlink_core::propagation::{DeploymentKind, DeploymentModel, DeviceProfile, Role};
use ahlink_core::rate::{max_distance_at_rate, max_rate_at_distance, RateQuery};
use ahlink_core::relay::{
    relay_max_access_distance_at_rate, relay_max_range, relay_power_sweep, relay_rate_sweep,
    Segment,
};
use ahlink_core::scenario::{Grid, Scenario};
use ahlink_core::sim::simulate_relay;
use ahlink_core::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use output::{Format, Sink, Table};

#[derive(Debug, Parser)]
#[command(
    name = "ahlink",
    version,
    about = "Sub-GHz link budget, relay and BER sweeps"
)]
struct Cli {
    /// Standards catalog to use instead of the built-in one.
    #[arg(long, global = true, env = CATALOG_ENV)]
    catalog: Option<PathBuf>,

    /// Row format.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,

    /// Write rows here; `-` for standard output.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    /// Also write a gnuplot script next to the CSV output.
    #[arg(long, global = true)]
    gnuplot_stub: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fade margin for an outage probability, or the outage left by a margin.
    FadeMargin(FadeMarginArgs),
    /// Maximum direct range at the MCS sensitivity.
    Range(RangeArgs),
    /// Achievable direct rate versus distance.
    Rate(RateArgs),
    /// Relay range and per-hop received power.
    RelayRange(RelayRangeArgs),
    /// End-to-end decode-and-forward rate versus RS-ST distance.
    RelayRate(RelayRateArgs),
    /// Monte-Carlo bit error rate of the relay chain.
    BerSim(BerSimArgs),
    /// Look up or dump the standards catalog.
    Catalog(CatalogArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Model {
    Rayleigh,
    Rician,
    None,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Deploy {
    Macro,
    Pico,
}

impl From<Deploy> for DeploymentModel {
    fn from(d: Deploy) -> Self {
        match d {
            Deploy::Macro => DeploymentModel::of(DeploymentKind::Macro),
            Deploy::Pico => DeploymentModel::of(DeploymentKind::Pico),
        }
    }
}

#[derive(Debug, Args)]
struct FadingArgs {
    /// Fading model of the link.
    #[arg(long = "fading", value_enum, default_value = "rayleigh")]
    model: Model,
    /// Rician K-factor in dB.
    #[arg(long, default_value_t = 9.0)]
    k_db: f64,
    /// Outage probability; 0 drops the fade margin.
    #[arg(long, default_value_t = 0.1)]
    pout: f64,
}

impl FadingArgs {
    fn fading(&self) -> FadingModel {
        if self.pout == 0.0 {
            return FadingModel::None;
        }
        to_fading(self.model, self.k_db)
    }
}

fn to_fading(model: Model, k_db: f64) -> FadingModel {
    match model {
        Model::Rayleigh => FadingModel::Rayleigh,
        Model::Rician => FadingModel::rician(k_db),
        Model::None => FadingModel::None,
    }
}

#[derive(Debug, Args)]
struct FadeMarginArgs {
    #[arg(long, value_enum, default_value = "rayleigh")]
    model: Model,
    #[arg(long, default_value_t = 9.0)]
    k_db: f64,
    /// Outage probability.
    #[arg(long)]
    pout: Option<f64>,
    /// Fade margin in dB; prints the outage it leaves.
    #[arg(long)]
    margin: Option<f64>,
    /// Outage grid `start:stop:step`.
    #[arg(long)]
    grid: Option<Grid>,
}

#[derive(Debug, Args)]
struct LinkArgs {
    /// Transmitting device preset.
    #[arg(long, default_value = "ap-eu")]
    tx: String,
    /// Receiving device preset; defaults to `st`, or `ap-eu` when the
    /// transmitter is a station.
    #[arg(long)]
    rx: Option<String>,
    /// Override the transmit power in dBm.
    #[arg(long)]
    tx_power: Option<f64>,
    #[arg(long, value_enum, default_value = "macro")]
    deploy: Deploy,
    #[command(flatten)]
    fading: FadingArgs,
}

impl LinkArgs {
    fn link(&self, cat: &Catalog) -> Result<LinkSpec> {
        let mut tx = cat.device(&self.tx)?;
        if let Some(p) = self.tx_power {
            tx = tx.with_tx_power(p);
        }
        let rx_name = match &self.rx {
            Some(r) => r.clone(),
            None if tx.role == Role::St => "ap-eu".to_string(),
            None => "st".to_string(),
        };
        let rx: DeviceProfile = cat.device(&rx_name)?;
        Ok(LinkSpec::new(
            tx,
            rx,
            self.deploy.into(),
            self.fading.fading(),
            self.fading.pout,
        ))
    }
}

#[derive(Debug, Args)]
struct RangeArgs {
    #[arg(long, default_value_t = 10)]
    mcs: u8,
    /// Channel bandwidth in MHz.
    #[arg(long, default_value_t = 1)]
    bw: u32,
    #[command(flatten)]
    link: LinkArgs,
    /// Distance grid `start:stop:step` for received power rows.
    #[arg(long)]
    grid: Option<Grid>,
}

#[derive(Debug, Args)]
struct RateQueryArgs {
    /// Packet length in bytes.
    #[arg(long, default_value_t = 4096, conflicts_with = "packet_bits")]
    packet_bytes: u32,
    /// Packet length in bits.
    #[arg(long)]
    packet_bits: Option<u32>,
    /// Target packet error rate.
    #[arg(long, default_value_t = 0.1)]
    per: f64,
    /// Coding gain in dB subtracted from the required Eb/N0.
    #[arg(long, default_value_t = 0.0)]
    coding_gain: f64,
}

impl RateQueryArgs {
    fn query(&self) -> Result<RateQuery> {
        let bits = match self.packet_bits {
            Some(b) => b,
            None => self
                .packet_bytes
                .checked_mul(8)
                .ok_or_else(|| Error::Config("packet is too long".to_string()))?,
        };
        let q = RateQuery::new(bits, self.per).with_coding_gain(self.coding_gain);
        q.validate()?;
        Ok(q)
    }
}

#[derive(Debug, Args)]
struct RateArgs {
    #[command(flatten)]
    link: LinkArgs,
    #[command(flatten)]
    query: RateQueryArgs,
    /// Target rate in bit/s; prints the distance that reaches it.
    #[arg(long)]
    target: Option<f64>,
    /// Single distance in meters; prints the rate there.
    #[arg(long)]
    distance: Option<f64>,
    /// Distance grid `start:stop:step`.
    #[arg(long)]
    grid: Option<Grid>,
    /// Cap rates at the catalog rate of this MCS.
    #[arg(long)]
    clamp_mcs: Option<u8>,
    /// Bandwidth in MHz for --clamp-mcs.
    #[arg(long, default_value_t = 1)]
    bw: u32,
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Distance grid `start:stop:step`, overriding the file's [sweep].
    #[arg(long)]
    grid: Option<Grid>,
    /// AP-RS distance in meters, overriding the file.
    #[arg(long)]
    fixed_distance: Option<f64>,
}

#[derive(Debug, Args)]
struct RelayRangeArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Override the end-to-end outage probability.
    #[arg(long)]
    pout: Option<f64>,
    /// Override the MCS.
    #[arg(long)]
    mcs: Option<u8>,
    /// Path loss only: drop fading on both hops.
    #[arg(long)]
    no_fading: bool,
}

#[derive(Debug, Args)]
struct RelayRateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// End-to-end target rate in bit/s, overriding the file.
    #[arg(long)]
    target: Option<f64>,
    /// Cap per-hop rates at the catalog rate of this MCS.
    #[arg(long)]
    clamp_mcs: Option<u8>,
    /// Packet length in bytes, overriding the file.
    #[arg(long)]
    packet_bytes: Option<u32>,
    /// Coding gain in dB, overriding the file.
    #[arg(long)]
    coding_gain: Option<f64>,
}

#[derive(Debug, Args)]
struct BerSimArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// MCS0 or MCS10, overriding the file.
    #[arg(long)]
    mcs: Option<u8>,
    /// Trial cap per distance.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Debug, Args)]
struct CatalogArgs {
    #[arg(long)]
    mcs: Option<u8>,
    #[arg(long, default_value_t = 1)]
    bw: u32,
    #[arg(long)]
    region: Option<String>,
    #[arg(long)]
    device: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_line(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Infeasible { .. } | Error::NoCoverage(_) => 3,
        Error::Numeric(_) => 4,
        _ => 2,
    }
}

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// One `key=value` line describing the failure.
fn error_line(e: &Error) -> String {
    let (kind, extra) = match e {
        Error::Parse { line, column, .. } => ("parse", format!(" line={line} column={column}")),
        Error::Infeasible { hop, deficit_db } => (
            "infeasible",
            format!(" hop={} deficit_db={deficit_db:.2}", quoted(hop)),
        ),
        Error::NoCoverage(_) => ("infeasible", String::new()),
        Error::Numeric(_) => ("numeric", String::new()),
        Error::Io(_) => ("io", String::new()),
        Error::Domain(_) => ("domain", String::new()),
        Error::NotDefined(_) => ("not-defined", String::new()),
        Error::UnknownMcs(_) | Error::UnknownRegion { .. } | Error::UnknownDevice { .. } => {
            ("unknown", String::new())
        }
        Error::Config(_) => ("config", String::new()),
    };
    format!(
        "error: kind={kind}{extra} message={}",
        quoted(&e.to_string())
    )
}

fn run(cli: Cli) -> Result<String> {
    let sink = Sink {
        path: cli.output.clone(),
        format: cli.format,
        gnuplot: cli.gnuplot_stub,
    };
    sink.check()?;
    let cat = Catalog::resolve(cli.catalog.as_deref())?;
    match cli.command {
        Command::FadeMargin(a) => fade_margin(&a, &sink),
        Command::Range(a) => range(&a, &cat, &sink),
        Command::Rate(a) => rate(&a, &cat, &sink),
        Command::RelayRange(a) => relay_range(&a, &cat, &sink),
        Command::RelayRate(a) => relay_rate(&a, &cat, &sink),
        Command::BerSim(a) => ber_sim(&a, &cat, &sink),
        Command::Catalog(a) => catalog(&a, &cat, &sink),
    }
}

fn fade_margin(a: &FadeMarginArgs, sink: &Sink) -> Result<String> {
    let model = to_fading(a.model, a.k_db);
    if matches!(model, FadingModel::None) {
        return Err(Error::Config(
            "choose --model rayleigh or rician".to_string(),
        ));
    }
    let mut parts = Vec::new();
    if let Some(g) = &a.grid {
        let mut t = Table::new(vec!["p_out", "fm_db"]);
        for p in g.points() {
            t.push(vec![p, model.fade_margin(p)?]);
        }
        sink.emit(&t)?;
        parts.push(format!("points={}", t.rows.len()));
    }
    if let Some(p) = a.pout {
        parts.push(format!("fm_db={:.2}", model.fade_margin(p)?));
    }
    if let Some(m) = a.margin {
        parts.push(format!("p_out={:.4}", outage_from_margin(model, m)?));
    }
    if parts.is_empty() {
        return Err(Error::Config("pass --pout, --margin or --grid".to_string()));
    }
    Ok(parts.join(" "))
}

fn range(a: &RangeArgs, cat: &Catalog, sink: &Sink) -> Result<String> {
    let link = a.link.link(cat)?;
    let mds = cat.mds(a.mcs, a.bw)?;
    let d = link.max_range(mds)?;
    if let Some(g) = &a.grid {
        let mut t = Table::new(vec!["distance_m", "rx_power_dbm", "mds_dbm"]);
        for x in g.points() {
            t.push(vec![x, link.received_power(x)?, mds]);
        }
        sink.emit(&t)?;
    }
    Ok(format!(
        "max_range_m={d:.1} fm_db={:.2} mds_dbm={mds}",
        link.fade_margin()?
    ))
}

fn clamp_bps(cat: &Catalog, mcs: Option<u8>, bw: u32) -> Result<f64> {
    match mcs {
        None => Ok(f64::INFINITY),
        Some(m) => Ok(cat.mcs_lookup(m, bw)?.rate_mbps * 1e6),
    }
}

fn rate(a: &RateArgs, cat: &Catalog, sink: &Sink) -> Result<String> {
    let link = a.link.link(cat)?;
    let q = a.query.query()?;
    let cap = clamp_bps(cat, a.clamp_mcs, a.bw)?;
    let mut parts = Vec::new();
    if let Some(g) = &a.grid {
        let mut t = Table::new(vec!["distance_m", "rate_bps"]);
        t.log_y = true;
        for x in g.points() {
            t.push(vec![x, max_rate_at_distance(&link, x, &q)?.min(cap)]);
        }
        sink.emit(&t)?;
        parts.push(format!("points={}", t.rows.len()));
    }
    if let Some(d) = a.distance {
        parts.push(format!(
            "rate_bps={:.6e}",
            max_rate_at_distance(&link, d, &q)?.min(cap)
        ));
    }
    if let Some(target) = a.target {
        if target > cap {
            return Err(Error::Infeasible {
                hop: "direct link".to_string(),
                deficit_db: 10.0 * (target / cap).log10(),
            });
        }
        parts.push(format!(
            "max_distance_m={:.1}",
            max_distance_at_rate(&link, &q, target)?
        ));
    }
    if parts.is_empty() {
        return Err(Error::Config(
            "pass --target, --distance or --grid".to_string(),
        ));
    }
    Ok(parts.join(" "))
}

fn load_scenario(a: &ScenarioArgs, cat: &Catalog) -> Result<Scenario> {
    let mut s = Scenario::load(&a.scenario, cat)?;
    if let Some(d) = a.fixed_distance {
        s.relay.fixed_distance_m = d;
        s.relay.validate()?;
    }
    Ok(s)
}

fn grid_of<'a>(a: &'a ScenarioArgs, s: &'a Scenario) -> Option<&'a Grid> {
    a.grid.as_ref().or(s.sweep.as_ref())
}

fn access_key(s: &Scenario) -> String {
    format!("hop{}_max_m", s.relay.hop_index(Segment::Access))
}

fn relay_range(a: &RelayRangeArgs, cat: &Catalog, sink: &Sink) -> Result<String> {
    let mut s = load_scenario(&a.scenario, cat)?;
    if let Some(p) = a.pout {
        s.relay.p_out_total = p;
    }
    if let Some(m) = a.mcs {
        s.relay.mcs = m;
    }
    if a.no_fading {
        s.relay = s.relay.without_fading();
    }
    s.relay.validate()?;
    let mds = s.mds(cat)?;
    let r = relay_max_range(&s.relay, mds)?;
    if let Some(g) = grid_of(&a.scenario, &s) {
        let mut t = Table::new(vec![
            "distance_m",
            "hop1_dbm",
            "hop2_dbm",
            "min_dbm",
            "mds_dbm",
        ]);
        for p in relay_power_sweep(&s.relay, &g.points())? {
            t.push(vec![
                p.access_distance_m,
                p.hop1_dbm,
                p.hop2_dbm,
                p.min_dbm,
                mds,
            ]);
        }
        sink.emit(&t)?;
    }
    Ok(format!(
        "{}={:.1} total_max_m={:.1} limiting_hop={} fm1_db={:.2} fm2_db={:.2}",
        access_key(&s),
        r.access_max_m,
        r.total_max_m,
        r.limiting_hop,
        r.per_hop_fm_db.0,
        r.per_hop_fm_db.1
    ))
}

fn relay_rate(a: &RelayRateArgs, cat: &Catalog, sink: &Sink) -> Result<String> {
    let s = load_scenario(&a.scenario, cat)?;
    let mut section = s
        .rate
        .clone()
        .ok_or_else(|| Error::Config("scenario has no [rate] section".to_string()))?;
    if let Some(b) = a.packet_bytes {
        section.query.packet_length_bits = b
            .checked_mul(8)
            .ok_or_else(|| Error::Config("packet is too long".to_string()))?;
    }
    if let Some(g) = a.coding_gain {
        section.query.coding_gain_db = g;
    }
    section.query.validate()?;
    let cap = clamp_bps(cat, a.clamp_mcs, s.bandwidth_mhz)?;
    let mut parts = Vec::new();
    if let Some(g) = grid_of(&a.scenario, &s) {
        let mut t = Table::new(vec!["distance_m", "hop1_bps", "hop2_bps", "df_bps"]);
        t.log_y = true;
        for p in relay_rate_sweep(&s.relay, &section.query, &g.points())? {
            let (r1, r2) = (p.hop1_bps.min(cap), p.hop2_bps.min(cap));
            t.push(vec![
                p.access_distance_m,
                r1,
                r2,
                ahlink_core::relay::df_rate(r1, r2),
            ]);
        }
        sink.emit(&t)?;
        parts.push(format!("points={}", t.rows.len()));
    }
    if let Some(target) = a.target.or(section.target_bps) {
        if 2.0 * target > cap {
            return Err(Error::Infeasible {
                hop: "both hops (MCS rate cap)".to_string(),
                deficit_db: 10.0 * (2.0 * target / cap).log10(),
            });
        }
        let d = relay_max_access_distance_at_rate(&s.relay, &section.query, target)?;
        parts.insert(0, format!("{}={d:.1}", access_key(&s)));
    }
    if parts.is_empty() {
        return Err(Error::Config(
            "pass --target or --grid, or add them to the scenario".to_string(),
        ));
    }
    Ok(parts.join(" "))
}

fn ber_sim(a: &BerSimArgs, cat: &Catalog, sink: &Sink) -> Result<String> {
    let s = load_scenario(&a.scenario, cat)?;
    let mut cfg = s.sim_config(a.scenario.grid.as_ref())?;
    if let Some(m) = a.mcs {
        cfg.mcs = m;
        cfg.scenario.mcs = m;
    }
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(seed) = a.seed {
        cfg.master_seed = seed;
    }
    cfg.workers = a.workers;
    let rows = simulate_relay(&cfg)?;
    let discarded: u64 = rows.iter().map(|r| r.discarded).sum();
    if discarded > 0 {
        eprintln!("warning: {discarded} trials discarded on spectral nulls");
    }
    let mut t = Table::new(vec!["distance_m", "ber", "bits", "ci95"]);
    t.log_y = true;
    t.error_bars = true;
    for r in &rows {
        t.push(vec![
            r.distance_m,
            r.ber,
            r.bit_count as f64,
            r.ci_halfwidth,
        ]);
    }
    sink.emit(&t)?;
    let trials: u64 = rows.iter().map(|r| r.trials).sum();
    Ok(format!(
        "points={} mcs={} trials={trials} discarded={discarded} seed={}",
        rows.len(),
        cfg.mcs,
        cfg.master_seed
    ))
}

fn catalog(a: &CatalogArgs, cat: &Catalog, sink: &Sink) -> Result<String> {
    let mut parts = Vec::new();
    if let Some(m) = a.mcs {
        let v = cat.mcs_lookup(m, a.bw)?;
        parts.push(format!(
            "mcs={} bw_mhz={} modulation={} code_rate={} repetition={} rate_mbps={} mds_dbm={}",
            v.id,
            v.bandwidth_mhz,
            v.modulation,
            v.code_rate,
            v.repetition,
            v.rate_mbps,
            v.mds_dbm.map_or("undefined".to_string(), |x| x.to_string())
        ));
    }
    if let Some(r) = &a.region {
        let d = cat.regulatory_lookup(r)?;
        let bands: Vec<String> = d
            .bands_mhz
            .iter()
            .map(|(lo, hi)| format!("{lo}-{hi}"))
            .collect();
        let bws: Vec<String> = d.bandwidths_mhz.iter().map(|b| b.to_string()).collect();
        parts.push(format!(
            "region={} max_erp_dbm={:.2} bands_mhz={} bandwidths_mhz={}",
            quoted(&d.region),
            d.max_erp_dbm(),
            bands.join(","),
            bws.join(",")
        ));
    }
    if let Some(name) = &a.device {
        let d = cat.device(name)?;
        parts.push(format!(
            "device={name} role={} tx_power_dbm={:.2} antenna_gain_dbi={} noise_figure_db={}",
            d.role, d.tx_power_dbm, d.antenna_gain_dbi, d.noise_figure_db
        ));
    }
    if parts.is_empty() {
        let text = cat.to_toml_string();
        match sink.path.as_deref() {
            Some(p) if p != Path::new("-") => {
                std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?
            }
            _ => print!("{text}"),
        }
        return Ok(format!(
            "mcs={} regions={} devices={}",
            cat.mcs_profiles().len(),
            cat.regions().len(),
            cat.devices().len()
        ));
    }
    Ok(parts.join("\n"))
}
