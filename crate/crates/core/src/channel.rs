//! Site-independent path-loss models and received-power computation.
//!
//! Four models are supported: log-distance, Okumura-Hata, COST-231 Hata and
//! the 3GPP urban-macro model. All return path loss in dB; received power is
//! `tx_dbm - pl_db + shadowing_db`. Shadowing and the probabilistic
//! line-of-sight state are derived per (device, candidate) pair from a
//! counter-based seed so evaluation order and parallelism cannot change
//! results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

/// Distance floor applied when evaluating frequency-based models at (near)
/// coincident transmitter/receiver positions. Keeps path loss finite without
/// ever rejecting a geometry.
pub const MIN_MODEL_DISTANCE_M: f64 = 1.0;

/// Mobile-station environment for the Hata family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Environment {
    #[default]
    UrbanSmallMedium,
    UrbanLarge,
    Suburban,
}

/// Line-of-sight handling for the urban-macro model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LosMode {
    AlwaysLos,
    /// Conservative planning default: every link is treated as obstructed.
    #[default]
    AlwaysNlos,
    /// Per-link Bernoulli draw of the urban-macro LOS probability, seeded.
    Probabilistic,
}

/// Resolved line-of-sight state of one link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LosState {
    Los,
    Nlos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    LogDistance,
    OkumuraHata,
    Cost231,
    Uma3gpp,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::LogDistance => "log_distance",
            ModelKind::OkumuraHata => "okumura_hata",
            ModelKind::Cost231 => "cost231",
            ModelKind::Uma3gpp => "uma_3gpp",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log_distance" => Ok(ModelKind::LogDistance),
            "okumura_hata" => Ok(ModelKind::OkumuraHata),
            "cost231" => Ok(ModelKind::Cost231),
            "uma_3gpp" => Ok(ModelKind::Uma3gpp),
            other => Err(Error::InvalidInput(format!(
                "unknown channel model '{other}' (expected log_distance, okumura_hata, cost231 or uma_3gpp)"
            ))),
        }
    }
}

fn default_fc_hz() -> f64 {
    1.0e9
}
fn default_exponent() -> f64 {
    3.76
}
fn default_d0_m() -> f64 {
    32.0
}

/// Full channel configuration. Defaults follow the common urban planning
/// setup: 1 GHz carrier, log-distance exponent 3.76 with a 32 m reference
/// distance, small/medium city corrections, shadowing off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub model: ModelKind,
    #[serde(default = "default_fc_hz")]
    pub fc_hz: f64,
    /// Log-distance path-loss exponent.
    #[serde(default = "default_exponent")]
    pub exponent: f64,
    /// Log-distance reference distance.
    #[serde(default = "default_d0_m")]
    pub d0_m: f64,
    /// Log-distance loss at `d0_m`; `None` uses the free-space loss at
    /// `d0_m` and `fc_hz`.
    #[serde(default)]
    pub ref_loss_db: Option<f64>,
    #[serde(default)]
    pub environment: Environment,
    /// COST-231 metropolitan-area constant C.
    #[serde(default)]
    pub city_correction_db: f64,
    #[serde(default)]
    pub los_mode: LosMode,
    /// Seed for the probabilistic LOS draw.
    #[serde(default)]
    pub los_seed: u64,
    #[serde(default)]
    pub shadowing_sigma_db: f64,
    #[serde(default)]
    pub shadowing_seed: u64,
}

impl ChannelConfig {
    pub fn new(model: ModelKind) -> Self {
        ChannelConfig {
            model,
            fc_hz: default_fc_hz(),
            exponent: default_exponent(),
            d0_m: default_d0_m(),
            ref_loss_db: None,
            environment: Environment::default(),
            city_correction_db: 0.0,
            los_mode: LosMode::default(),
            los_seed: 0,
            shadowing_sigma_db: 0.0,
            shadowing_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fc_hz > 0.0) {
            return Err(Error::InvalidInput(format!(
                "fc_hz must be > 0, got {}",
                self.fc_hz
            )));
        }
        if !(self.d0_m > 0.0) {
            return Err(Error::InvalidInput(format!(
                "d0_m must be > 0, got {}",
                self.d0_m
            )));
        }
        if !(self.exponent > 0.0) {
            return Err(Error::InvalidInput(format!(
                "exponent must be > 0, got {}",
                self.exponent
            )));
        }
        if self.shadowing_sigma_db < 0.0 {
            return Err(Error::InvalidInput(format!(
                "shadowing_sigma_db must be >= 0, got {}",
                self.shadowing_sigma_db
            )));
        }
        Ok(())
    }

    /// Reference loss actually used by the log-distance model.
    pub fn effective_ref_loss_db(&self) -> f64 {
        self.ref_loss_db
            .unwrap_or_else(|| free_space_pl_unchecked(self.d0_m, self.fc_hz))
    }
}

fn free_space_pl_unchecked(d_m: f64, fc_hz: f64) -> f64 {
    20.0 * (4.0 * std::f64::consts::PI * d_m * fc_hz / SPEED_OF_LIGHT_M_S).log10()
}

/// Friis free-space path loss.
pub fn free_space_pl(d_m: f64, fc_hz: f64) -> Result<f64> {
    if !(d_m > 0.0) {
        return Err(Error::Domain(format!(
            "free-space distance must be > 0, got {d_m}"
        )));
    }
    if !(fc_hz > 0.0) {
        return Err(Error::Domain(format!("frequency must be > 0, got {fc_hz}")));
    }
    Ok(free_space_pl_unchecked(d_m, fc_hz))
}

/// Log-distance path loss with reference clamp: distances below `d0_m`
/// return the reference loss unchanged.
pub fn log_distance_pl(d_m: f64, cfg: &ChannelConfig) -> Result<f64> {
    if !(d_m > 0.0) {
        return Err(Error::Domain(format!(
            "log-distance distance must be > 0, got {d_m}"
        )));
    }
    cfg.validate()?;
    let ref_loss = cfg.effective_ref_loss_db();
    if d_m < cfg.d0_m {
        return Ok(ref_loss);
    }
    Ok(ref_loss + 10.0 * cfg.exponent * (d_m / cfg.d0_m).log10())
}

/// Hata mobile-antenna correction a(hm) in dB.
fn hata_a_hm(f_mhz: f64, hm_m: f64, environment: Environment) -> f64 {
    match environment {
        Environment::UrbanSmallMedium | Environment::Suburban => {
            (1.1 * f_mhz.log10() - 0.7) * hm_m - (1.56 * f_mhz.log10() - 0.8)
        }
        Environment::UrbanLarge => {
            if f_mhz >= 300.0 {
                3.2 * (11.75 * hm_m).log10().powi(2) - 4.97
            } else {
                8.29 * (1.54 * hm_m).log10().powi(2) - 1.1
            }
        }
    }
}

fn okumura_hata_pl_unchecked(
    d2d_m: f64,
    fc_hz: f64,
    hb_m: f64,
    hm_m: f64,
    env: Environment,
) -> f64 {
    let f_mhz = fc_hz / 1.0e6;
    let d_km = d2d_m / 1000.0;
    let a_hm = hata_a_hm(f_mhz, hm_m, env);
    let urban = 69.55 + 26.16 * f_mhz.log10() - 13.82 * hb_m.log10() - a_hm
        + (44.9 - 6.55 * hb_m.log10()) * d_km.log10();
    match env {
        Environment::Suburban => urban - 2.0 * (f_mhz / 28.0).log10().powi(2) - 5.4,
        _ => urban,
    }
}

/// Okumura-Hata path loss. Inputs outside the model's stated validity
/// (150-1500 MHz, 1-20 km, base 30-200 m, mobile 1-10 m) are computed
/// anyway with a warning.
pub fn okumura_hata_pl(
    d2d_m: f64,
    fc_hz: f64,
    hb_m: f64,
    hm_m: f64,
    env: Environment,
) -> Result<f64> {
    if !(d2d_m > 0.0) {
        return Err(Error::Domain(format!(
            "Hata distance must be > 0, got {d2d_m}"
        )));
    }
    if let Some(msg) = hata_validity_note(d2d_m, d2d_m, fc_hz, hb_m, hm_m) {
        log::warn!("okumura_hata outside validity: {msg}");
    }
    Ok(okumura_hata_pl_unchecked(d2d_m, fc_hz, hb_m, hm_m, env))
}

pub(crate) fn hata_validity_note(
    dmin_m: f64,
    dmax_m: f64,
    fc_hz: f64,
    hb_m: f64,
    hm_m: f64,
) -> Option<String> {
    let f_mhz = fc_hz / 1.0e6;
    let mut notes = Vec::new();
    if !(150.0..=1500.0).contains(&f_mhz) {
        notes.push(format!("frequency {f_mhz} MHz outside 150-1500 MHz"));
    }
    if dmin_m < 1000.0 || dmax_m > 20_000.0 {
        notes.push(format!(
            "distance range {dmin_m}-{dmax_m} m outside 1-20 km"
        ));
    }
    if !(30.0..=200.0).contains(&hb_m) {
        notes.push(format!("base height {hb_m} m outside 30-200 m"));
    }
    if !(1.0..=10.0).contains(&hm_m) {
        notes.push(format!("mobile height {hm_m} m outside 1-10 m"));
    }
    if notes.is_empty() {
        None
    } else {
        Some(notes.join("; "))
    }
}

fn cost231_pl_unchecked(
    d2d_m: f64,
    fc_hz: f64,
    hb_m: f64,
    hm_m: f64,
    env: Environment,
    c_db: f64,
) -> f64 {
    let f_mhz = fc_hz / 1.0e6;
    let d_km = d2d_m / 1000.0;
    let a_hm = hata_a_hm(f_mhz, hm_m, env);
    46.3 + 33.9 * f_mhz.log10() - 13.82 * hb_m.log10() - a_hm
        + (44.9 - 6.55 * hb_m.log10()) * d_km.log10()
        + c_db
}

/// COST-231 Hata extension. Stated validity is 1500-2000 MHz; lower carrier
/// frequencies are computed anyway with a warning.
pub fn cost231_pl(
    d2d_m: f64,
    fc_hz: f64,
    hb_m: f64,
    hm_m: f64,
    env: Environment,
    c_db: f64,
) -> Result<f64> {
    if !(d2d_m > 0.0) {
        return Err(Error::Domain(format!(
            "COST-231 distance must be > 0, got {d2d_m}"
        )));
    }
    let f_mhz = fc_hz / 1.0e6;
    if !(1500.0..=2000.0).contains(&f_mhz) {
        log::warn!("cost231 outside validity: frequency {f_mhz} MHz outside 1500-2000 MHz");
    }
    Ok(cost231_pl_unchecked(d2d_m, fc_hz, hb_m, hm_m, env, c_db))
}

/// Urban-macro LOS probability for receiver heights up to 13 m.
pub fn uma_los_probability(d2d_m: f64) -> f64 {
    if d2d_m <= 18.0 {
        return 1.0;
    }
    18.0 / d2d_m + (-d2d_m / 63.0).exp() * (1.0 - 18.0 / d2d_m)
}

/// Breakpoint distance of the urban-macro LOS model, using a 1 m effective
/// environment height (receivers below 13 m).
pub fn uma_breakpoint_m(fc_hz: f64, h_bs_m: f64, h_ut_m: f64) -> f64 {
    4.0 * (h_bs_m - 1.0) * (h_ut_m - 1.0) * fc_hz / SPEED_OF_LIGHT_M_S
}

fn uma_los_pl_unchecked(d2d_m: f64, fc_hz: f64, h_bs_m: f64, h_ut_m: f64) -> f64 {
    let dz = h_bs_m - h_ut_m;
    let d3d = (d2d_m * d2d_m + dz * dz).sqrt().max(MIN_MODEL_DISTANCE_M);
    let fc_ghz = fc_hz / 1.0e9;
    let dbp = uma_breakpoint_m(fc_hz, h_bs_m, h_ut_m);
    if d2d_m <= dbp {
        28.0 + 22.0 * d3d.log10() + 20.0 * fc_ghz.log10()
    } else {
        28.0 + 40.0 * d3d.log10() + 20.0 * fc_ghz.log10() - 9.0 * (dbp * dbp + dz * dz).log10()
    }
}

fn uma_nlos_pl_unchecked(d2d_m: f64, fc_hz: f64, h_bs_m: f64, h_ut_m: f64) -> f64 {
    let dz = h_bs_m - h_ut_m;
    let d3d = (d2d_m * d2d_m + dz * dz).sqrt().max(MIN_MODEL_DISTANCE_M);
    let fc_ghz = fc_hz / 1.0e9;
    let los = uma_los_pl_unchecked(d2d_m, fc_hz, h_bs_m, h_ut_m);
    let nlos = 13.54 + 39.08 * d3d.log10() + 20.0 * fc_ghz.log10() - 0.6 * (h_ut_m - 1.5);
    los.max(nlos)
}

/// 3GPP urban-macro path loss for a resolved LOS state.
pub fn uma_3gpp_pl(d2d_m: f64, fc_hz: f64, h_bs_m: f64, h_ut_m: f64, los: LosState) -> Result<f64> {
    if d2d_m < 0.0 {
        return Err(Error::Domain(format!(
            "UMa distance must be >= 0, got {d2d_m}"
        )));
    }
    if h_ut_m < 1.5 {
        log::warn!("uma_3gpp outside validity: receiver height {h_ut_m} m below 1.5 m");
    }
    Ok(match los {
        LosState::Los => uma_los_pl_unchecked(d2d_m, fc_hz, h_bs_m, h_ut_m),
        LosState::Nlos => uma_nlos_pl_unchecked(d2d_m, fc_hz, h_bs_m, h_ut_m),
    })
}

/// Resolves the LOS state of link (ed, gw). Probabilistic mode draws the
/// urban-macro LOS probability exactly once per link from the given seed;
/// the draw depends only on (seed, ed_index, gw_index, d2d).
pub fn uma_los_state(
    mode: LosMode,
    seed: u64,
    ed_index: usize,
    gw_index: usize,
    d2d_m: f64,
) -> LosState {
    match mode {
        LosMode::AlwaysLos => LosState::Los,
        LosMode::AlwaysNlos => LosState::Nlos,
        LosMode::Probabilistic => {
            let mut rng = link_rng(seed, TAG_LOS, ed_index, gw_index);
            let u: f64 = rng.random();
            if u < uma_los_probability(d2d_m) {
                LosState::Los
            } else {
                LosState::Nlos
            }
        }
    }
}

/// Received power: transmit power minus path loss plus the shadowing draw.
pub fn received_power(tx_power_dbm: f64, pl_db: f64, shadowing_draw_db: f64) -> f64 {
    tx_power_dbm - pl_db + shadowing_draw_db
}

const TAG_SHADOWING: u8 = 0;
const TAG_LOS: u8 = 1;

fn link_rng(seed: u64, tag: u8, ed_index: usize, gw_index: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(ed_index as u64).to_le_bytes());
    key[16..24].copy_from_slice(&(gw_index as u64).to_le_bytes());
    key[24] = tag;
    ChaCha8Rng::from_seed(key)
}

/// Log-normal shadowing draw for link (ed, gw), in dB. Counter-based: the
/// same (seed, ed_index, gw_index) triple always yields the same draw, so
/// evaluation order and parallel partitioning cannot change results.
pub fn shadowing_draw_db(seed: u64, sigma_db: f64, ed_index: usize, gw_index: usize) -> f64 {
    if sigma_db == 0.0 {
        return 0.0;
    }
    let mut rng = link_rng(seed, TAG_SHADOWING, ed_index, gw_index);
    let z: f64 = rng.sample(StandardNormal);
    sigma_db * z
}

/// Path loss of one (ed, gw) link under `cfg`, applying each model's
/// distance convention (log-distance: 3D; Hata family: 2D; urban-macro:
/// both) and the distance floors that keep coincident positions finite.
/// Never fails for valid configs; shadowing is not included.
pub fn link_path_loss(
    cfg: &ChannelConfig,
    ed_index: usize,
    gw_index: usize,
    d2d_m: f64,
    d3d_m: f64,
    gw_height_m: f64,
    ed_height_m: f64,
) -> f64 {
    match cfg.model {
        ModelKind::LogDistance => {
            let ref_loss = cfg.effective_ref_loss_db();
            if d3d_m < cfg.d0_m {
                ref_loss
            } else {
                ref_loss + 10.0 * cfg.exponent * (d3d_m / cfg.d0_m).log10()
            }
        }
        ModelKind::OkumuraHata => okumura_hata_pl_unchecked(
            d2d_m.max(MIN_MODEL_DISTANCE_M),
            cfg.fc_hz,
            gw_height_m,
            ed_height_m,
            cfg.environment,
        ),
        ModelKind::Cost231 => cost231_pl_unchecked(
            d2d_m.max(MIN_MODEL_DISTANCE_M),
            cfg.fc_hz,
            gw_height_m,
            ed_height_m,
            cfg.environment,
            cfg.city_correction_db,
        ),
        ModelKind::Uma3gpp => {
            let los = uma_los_state(cfg.los_mode, cfg.los_seed, ed_index, gw_index, d2d_m);
            match los {
                LosState::Los => uma_los_pl_unchecked(d2d_m, cfg.fc_hz, gw_height_m, ed_height_m),
                LosState::Nlos => uma_nlos_pl_unchecked(d2d_m, cfg.fc_hz, gw_height_m, ed_height_m),
            }
        }
    }
}
