//! Seeded discrete-event simulation of LoRaWAN uplinks.
//!
//! Each end device transmits a fixed number of packets periodically with a
//! seeded random start offset, each packet on a uniformly drawn channel. A
//! packet is received at a gateway when its power clears the receiver
//! sensitivity, a demodulation path is free at packet start, and it beats
//! every time-overlapping same-channel transmission by the capture margin.
//! The network server deduplicates: a packet is delivered when at least one
//! selected gateway receives it.
//!
//! The event loop is single-threaded over a priority queue keyed by
//! (time, kind, sequence number); identical seeds yield bit-identical
//! reports.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coverage::GainMatrix;
use crate::error::{Error, Result};
use crate::placement::PlacementSolution;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum CodingRate {
    #[default]
    #[serde(rename = "4/5")]
    Cr4of5,
    #[serde(rename = "4/6")]
    Cr4of6,
    #[serde(rename = "4/7")]
    Cr4of7,
    #[serde(rename = "4/8")]
    Cr4of8,
}

impl CodingRate {
    /// Denominator of the rate fraction; the payload-symbol multiplier.
    pub fn denominator(&self) -> u32 {
        match self {
            CodingRate::Cr4of5 => 5,
            CodingRate::Cr4of6 => 6,
            CodingRate::Cr4of7 => 7,
            CodingRate::Cr4of8 => 8,
        }
    }
}

/// One receiver-sensitivity table entry; overrides replace the built-in
/// default for their exact (sf, bandwidth) pair only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityEntry {
    pub sf: u8,
    pub bandwidth_hz: f64,
    pub dbm: f64,
}

/// Gateway sensitivity for (sf, bandwidth). Defaults cover 125 kHz,
/// SF7 at -130 dBm stepping 2.5 dB down to SF12 at -142.5 dBm.
pub fn sensitivity_dbm(sf: u8, bandwidth_hz: f64, overrides: &[SensitivityEntry]) -> Result<f64> {
    if let Some(e) = overrides
        .iter()
        .find(|e| e.sf == sf && e.bandwidth_hz == bandwidth_hz)
    {
        return Ok(e.dbm);
    }
    if (7..=12).contains(&sf) && bandwidth_hz == 125_000.0 {
        return Ok(-130.0 - 2.5 * (sf - 7) as f64);
    }
    Err(Error::InvalidInput(format!(
        "no sensitivity entry for sf {sf} at {bandwidth_hz} Hz; add an override"
    )))
}

fn default_packets() -> u64 {
    1000
}
fn default_sf() -> u8 {
    7
}
fn default_bw() -> f64 {
    125_000.0
}
fn default_payload() -> u32 {
    23
}
fn default_preamble() -> u32 {
    8
}
fn default_duration() -> f64 {
    600.0
}
fn default_channels() -> u32 {
    1
}
fn default_capture() -> f64 {
    6.0
}
fn default_demod_paths() -> u32 {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficConfig {
    #[serde(default = "default_packets")]
    pub packets_per_ed: u64,
    #[serde(default = "default_sf")]
    pub sf: u8,
    #[serde(default = "default_bw")]
    pub bandwidth_hz: f64,
    #[serde(default)]
    pub coding_rate: CodingRate,
    #[serde(default = "default_payload")]
    pub payload_bytes: u32,
    #[serde(default = "default_preamble")]
    pub preamble_symbols: u32,
    #[serde(default = "default_duration")]
    pub duration_s: f64,
    #[serde(default = "default_channels")]
    pub n_channels: u32,
    #[serde(default = "default_capture")]
    pub capture_threshold_db: f64,
    #[serde(default = "default_demod_paths")]
    pub gw_demod_paths: u32,
    /// Per-device duty-cycle cap as a fraction (e.g. 0.01); transmissions
    /// arriving before the mandated off-time ends are deferred. Off by
    /// default: the reference workload deliberately exceeds 1%.
    #[serde(default)]
    pub duty_cycle_limit: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sensitivity_overrides: Vec<SensitivityEntry>,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        TrafficConfig {
            packets_per_ed: default_packets(),
            sf: default_sf(),
            bandwidth_hz: default_bw(),
            coding_rate: CodingRate::default(),
            payload_bytes: default_payload(),
            preamble_symbols: default_preamble(),
            duration_s: default_duration(),
            n_channels: default_channels(),
            capture_threshold_db: default_capture(),
            gw_demod_paths: default_demod_paths(),
            duty_cycle_limit: None,
            seed: 0,
            sensitivity_overrides: Vec::new(),
        }
    }
}

impl TrafficConfig {
    pub fn validate(&self) -> Result<()> {
        if self.packets_per_ed < 1 {
            return Err(Error::InvalidInput("packets_per_ed must be >= 1".into()));
        }
        if !(self.duration_s > 0.0) {
            return Err(Error::InvalidInput(format!(
                "duration_s must be > 0, got {}",
                self.duration_s
            )));
        }
        if !(7..=12).contains(&self.sf) {
            return Err(Error::InvalidInput(format!(
                "sf must be in 7..=12, got {}",
                self.sf
            )));
        }
        if ![125_000.0, 250_000.0, 500_000.0].contains(&self.bandwidth_hz) {
            return Err(Error::InvalidInput(format!(
                "bandwidth_hz must be 125000, 250000 or 500000, got {}",
                self.bandwidth_hz
            )));
        }
        if self.n_channels < 1 {
            return Err(Error::InvalidInput("n_channels must be >= 1".into()));
        }
        if self.gw_demod_paths < 1 {
            return Err(Error::InvalidInput("gw_demod_paths must be >= 1".into()));
        }
        if let Some(g) = self.duty_cycle_limit {
            if !(g > 0.0 && g <= 1.0) {
                return Err(Error::InvalidInput(format!(
                    "duty_cycle_limit must be in (0, 1], got {g}"
                )));
            }
        }
        Ok(())
    }
}

/// Uplink time on air in seconds: explicit header, CRC on, low-data-rate
/// optimization engaged automatically for symbol times above 16 ms
/// (SF11/SF12 at 125 kHz).
pub fn time_on_air_s(cfg: &TrafficConfig) -> Result<f64> {
    cfg.validate()?;
    let sf = cfg.sf as i64;
    let t_sym = (1u64 << cfg.sf) as f64 / cfg.bandwidth_hz;
    let de = if t_sym > 0.016 { 1i64 } else { 0 };
    let numerator = 8 * cfg.payload_bytes as i64 - 4 * sf + 28 + 16;
    let denominator = 4 * (sf - 2 * de);
    let ceil_term = numerator.div_euclid(denominator)
        + if numerator.rem_euclid(denominator) > 0 {
            1
        } else {
            0
        };
    let payload_symbols = 8 + (ceil_term * cfg.coding_rate.denominator() as i64).max(0);
    Ok((cfg.preamble_symbols as f64 + 4.25 + payload_symbols as f64) * t_sym)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdPacketStats {
    /// 1-based device index.
    pub ed: usize,
    pub sent: u64,
    pub delivered: u64,
}

/// Per-device and aggregate delivery outcome of one simulation run. Every
/// sent packet has exactly one terminal outcome: delivered, collided at all
/// gateways that could demodulate it, blocked from every demodulation path,
/// or below sensitivity everywhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdrReport {
    pub pdr_overall: f64,
    pub per_ed: Vec<EdPacketStats>,
    pub collisions: u64,
    pub below_sensitivity_drops: u64,
    pub demod_blocked_drops: u64,
    pub seed: u64,
}

impl PdrReport {
    pub fn pdr_per_ed(&self) -> Vec<f64> {
        self.per_ed
            .iter()
            .map(|e| e.delivered as f64 / e.sent as f64)
            .collect()
    }

    pub fn total_sent(&self) -> u64 {
        self.per_ed.iter().map(|e| e.sent).sum()
    }

    pub fn total_delivered(&self) -> u64 {
        self.per_ed.iter().map(|e| e.delivered).sum()
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidInput(format!("report not serializable: {e}")))?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, Some(e.line()), e.to_string()))
    }
}

/// Mean of the overall PDR across runs.
pub fn avg_pdr(reports: &[PdrReport]) -> Result<f64> {
    if reports.is_empty() {
        return Err(Error::InvalidInput(
            "avg_pdr needs at least one report".into(),
        ));
    }
    Ok(reports.iter().map(|r| r.pdr_overall).sum::<f64>() / reports.len() as f64)
}

// ---------------------------------------------------------------------------
// Event engine
// ---------------------------------------------------------------------------

const NS_PER_S: f64 = 1.0e9;

/// Progress a packet made at one gateway; the global outcome is the best
/// stage across gateways.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Stage {
    BelowSensitivity = 0,
    DemodBlocked = 1,
    Collided = 2,
    Received = 3,
}

struct Transmission {
    ed: usize,
    channel: u32,
    start_ns: u64,
    end_ns: u64,
}

#[derive(Clone, Copy)]
struct LinkState {
    max_interferer_dbm: f64,
    got_demod: bool,
}

fn traffic_rng(seed: u64, ed: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(ed as u64).to_le_bytes());
    key[24] = 2; // domain separation from channel-model draws
    ChaCha8Rng::from_seed(key)
}

/// Runs the uplink simulation for a feasible placement.
///
/// `alpha` supplies the link budget: the power of device `d` at gateway
/// candidate `p` for every packet. The placement must be feasible and match
/// the scenario/matrix dimensions.
pub fn run_sim(
    scenario: &Scenario,
    placement: &PlacementSolution,
    alpha: &GainMatrix,
    cfg: &TrafficConfig,
) -> Result<PdrReport> {
    cfg.validate()?;
    if !placement.status.is_feasible() {
        return Err(Error::InfeasiblePlacement(placement.uncovered.clone()));
    }
    if placement.selected.is_empty() {
        return Err(Error::InvalidInput("placement selects no gateways".into()));
    }
    if alpha.num_eds() != scenario.num_eds() || alpha.num_candidates() != scenario.num_candidates()
    {
        return Err(Error::InvalidInput(format!(
            "alpha is {}x{} but the scenario is {}x{}",
            alpha.num_eds(),
            alpha.num_candidates(),
            scenario.num_eds(),
            scenario.num_candidates()
        )));
    }
    if let Some(&p) = placement
        .selected
        .iter()
        .find(|&&p| p < 1 || p > alpha.num_candidates())
    {
        return Err(Error::InvalidInput(format!(
            "selected candidate {p} outside 1..={}",
            alpha.num_candidates()
        )));
    }

    let sensitivity = sensitivity_dbm(cfg.sf, cfg.bandwidth_hz, &cfg.sensitivity_overrides)?;
    let toa_ns = (time_on_air_s(cfg)? * NS_PER_S).round() as u64;
    let duration_ns = (cfg.duration_s * NS_PER_S).round() as u64;
    let period_ns = (duration_ns / cfg.packets_per_ed).max(1);

    let num_eds = scenario.num_eds();
    let gateways: Vec<usize> = placement.selected.iter().map(|&p| p - 1).collect();
    let num_gw = gateways.len();

    // Link budget per (ed, gateway), fixed for the whole run.
    let mut power = vec![f64::NEG_INFINITY; num_eds * num_gw];
    for d in 0..num_eds {
        for (g, &col) in gateways.iter().enumerate() {
            power[d * num_gw + g] = alpha.get(d, col);
        }
    }

    // Transmission schedule: periodic with a seeded offset, channel drawn
    // per packet. Duty-cycle enforcement (when on) defers starts until the
    // off-time mandated by the previous transmission has elapsed.
    let mut txs: Vec<Transmission> = Vec::with_capacity(num_eds * cfg.packets_per_ed as usize);
    for ed in 0..num_eds {
        let mut rng = traffic_rng(cfg.seed, ed);
        let offset = rng.random_range(0..period_ns);
        let mut next_allowed = 0u64;
        for k in 0..cfg.packets_per_ed {
            let channel = rng.random_range(0..cfg.n_channels);
            let mut start = offset + k * period_ns;
            if let Some(limit) = cfg.duty_cycle_limit {
                start = start.max(next_allowed);
                let off_time = (toa_ns as f64 * (1.0 / limit - 1.0)).round() as u64;
                next_allowed = start + toa_ns + off_time;
            }
            txs.push(Transmission {
                ed,
                channel,
                start_ns: start,
                end_ns: start + toa_ns,
            });
        }
    }

    // Priority queue keyed by (time, kind, sequence): ends sort before
    // starts at the same instant, so touching packets do not overlap.
    const KIND_END: u8 = 0;
    const KIND_START: u8 = 1;
    let mut events: BinaryHeap<Reverse<(u64, u8, usize)>> =
        BinaryHeap::with_capacity(txs.len() * 2);
    for (t, tx) in txs.iter().enumerate() {
        events.push(Reverse((tx.start_ns, KIND_START, t)));
        events.push(Reverse((tx.end_ns, KIND_END, t)));
    }

    let mut links = vec![
        LinkState {
            max_interferer_dbm: f64::NEG_INFINITY,
            got_demod: false,
        };
        txs.len() * num_gw
    ];
    let mut active: Vec<Vec<usize>> = vec![Vec::new(); num_gw];
    let mut demod_used = vec![0u32; num_gw];

    while let Some(Reverse((_, kind, t))) = events.pop() {
        let tx = &txs[t];
        match kind {
            KIND_START => {
                for g in 0..num_gw {
                    let pw = power[tx.ed * num_gw + g];
                    if pw == f64::NEG_INFINITY {
                        continue; // no signal reaches this gateway at all
                    }
                    for &u in &active[g] {
                        if txs[u].channel != tx.channel {
                            continue;
                        }
                        let pw_u = power[txs[u].ed * num_gw + g];
                        let lu = &mut links[u * num_gw + g];
                        lu.max_interferer_dbm = lu.max_interferer_dbm.max(pw);
                        let lt = &mut links[t * num_gw + g];
                        lt.max_interferer_dbm = lt.max_interferer_dbm.max(pw_u);
                    }
                    if pw >= sensitivity && demod_used[g] < cfg.gw_demod_paths {
                        demod_used[g] += 1;
                        links[t * num_gw + g].got_demod = true;
                    }
                    active[g].push(t);
                }
            }
            _ => {
                for g in 0..num_gw {
                    if power[tx.ed * num_gw + g] == f64::NEG_INFINITY {
                        continue;
                    }
                    if let Some(pos) = active[g].iter().position(|&u| u == t) {
                        active[g].swap_remove(pos);
                    }
                    if links[t * num_gw + g].got_demod {
                        demod_used[g] -= 1;
                    }
                }
            }
        }
    }

    // Terminal outcome per packet: best stage reached over all gateways.
    let mut per_ed: Vec<EdPacketStats> = (1..=num_eds)
        .map(|ed| EdPacketStats {
            ed,
            sent: 0,
            delivered: 0,
        })
        .collect();
    let mut collisions = 0u64;
    let mut below_sensitivity = 0u64;
    let mut demod_blocked = 0u64;
    for (t, tx) in txs.iter().enumerate() {
        let mut best = Stage::BelowSensitivity;
        for g in 0..num_gw {
            let pw = power[tx.ed * num_gw + g];
            let link = links[t * num_gw + g];
            let stage = if pw < sensitivity {
                Stage::BelowSensitivity
            } else if !link.got_demod {
                Stage::DemodBlocked
            } else if pw - link.max_interferer_dbm >= cfg.capture_threshold_db
                || link.max_interferer_dbm == f64::NEG_INFINITY
            {
                Stage::Received
            } else {
                Stage::Collided
            };
            best = best.max(stage);
        }
        per_ed[tx.ed].sent += 1;
        match best {
            Stage::Received => per_ed[tx.ed].delivered += 1,
            Stage::Collided => collisions += 1,
            Stage::DemodBlocked => demod_blocked += 1,
            Stage::BelowSensitivity => below_sensitivity += 1,
        }
    }

    let sent: u64 = per_ed.iter().map(|e| e.sent).sum();
    let delivered: u64 = per_ed.iter().map(|e| e.delivered).sum();
    Ok(PdrReport {
        pdr_overall: delivered as f64 / sent as f64,
        per_ed,
        collisions,
        below_sensitivity_drops: below_sensitivity,
        demod_blocked_drops: demod_blocked,
        seed: cfg.seed,
    })
}
