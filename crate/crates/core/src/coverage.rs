//! Received-power matrix construction and coverage thresholding.
//!
//! `build_alpha` evaluates the configured channel model for every
//! (end device, candidate) pair. The computation is pure per pair, so the
//! parallel and sequential paths produce bit-identical matrices.

use std::fs;
use std::path::Path;

use crate::channel::{self, ChannelConfig, ModelKind};
use crate::error::{Error, Result};
use crate::scenario::{distance_2d, distance_3d, Scenario};

/// Received power in dBm for every (ed, candidate) pair at the recorded
/// transmit power. Entries are finite or `-inf` ("no signal reaches this
/// device from this candidate").
#[derive(Debug, Clone, PartialEq)]
pub struct GainMatrix {
    alpha_dbm: Vec<f64>,
    num_eds: usize,
    num_candidates: usize,
    pub tx_power_dbm: f64,
    /// Provenance label: a model name, an ingested directory, or a file.
    pub source: String,
}

impl GainMatrix {
    pub fn from_rows(
        rows: Vec<f64>,
        num_eds: usize,
        num_candidates: usize,
        tx_power_dbm: f64,
        source: impl Into<String>,
    ) -> Result<Self> {
        if rows.len() != num_eds * num_candidates {
            return Err(Error::InvalidInput(format!(
                "alpha matrix length {} does not match {}x{}",
                rows.len(),
                num_eds,
                num_candidates
            )));
        }
        for (i, v) in rows.iter().enumerate() {
            if v.is_nan() || *v == f64::INFINITY {
                return Err(Error::InvalidInput(format!(
                    "alpha entry (ed {}, p {}) must be finite or -inf, got {v}",
                    i / num_candidates + 1,
                    i % num_candidates + 1
                )));
            }
        }
        Ok(GainMatrix {
            alpha_dbm: rows,
            num_eds,
            num_candidates,
            tx_power_dbm,
            source: source.into(),
        })
    }

    pub fn num_eds(&self) -> usize {
        self.num_eds
    }

    pub fn num_candidates(&self) -> usize {
        self.num_candidates
    }

    /// Received power at device `d` from candidate `p`, 0-based indices.
    pub fn get(&self, d: usize, p: usize) -> f64 {
        self.alpha_dbm[d * self.num_candidates + p]
    }

    pub fn row(&self, d: usize) -> &[f64] {
        &self.alpha_dbm[d * self.num_candidates..(d + 1) * self.num_candidates]
    }

    pub fn values(&self) -> &[f64] {
        &self.alpha_dbm
    }

    pub fn max_value(&self) -> f64 {
        self.alpha_dbm
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Writes the matrix as CSV: header `ed_index,p_1,...,p_P`, one row per
    /// device, `-inf` literal for the sentinel. Floats use the shortest
    /// round-trip representation, so export/import is bit-exact.
    pub fn to_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::from("ed_index");
        for p in 1..=self.num_candidates {
            out.push_str(&format!(",p_{p}"));
        }
        out.push('\n');
        for d in 0..self.num_eds {
            out.push_str(&(d + 1).to_string());
            for p in 0..self.num_candidates {
                out.push(',');
                out.push_str(&self.get(d, p).to_string());
            }
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Reads a matrix written by [`GainMatrix::to_csv`]. The transmit power
    /// is not part of the format (entries already embed it) and is recorded
    /// as 0.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(path, Some(1), "empty file"))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.first() != Some(&"ed_index") || cols.len() < 2 {
            return Err(Error::parse(
                path,
                Some(1),
                format!("expected header 'ed_index,p_1,...,p_P', got '{header}'"),
            ));
        }
        let num_candidates = cols.len() - 1;
        for (i, c) in cols[1..].iter().enumerate() {
            if *c != format!("p_{}", i + 1) {
                return Err(Error::parse(
                    path,
                    Some(1),
                    format!("expected column 'p_{}', got '{c}'", i + 1),
                ));
            }
        }
        let mut rows = Vec::new();
        let mut num_eds = 0usize;
        for (lineno, line) in lines {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != num_candidates + 1 {
                return Err(Error::parse(
                    path,
                    Some(lineno + 1),
                    format!(
                        "expected {} fields, got {}",
                        num_candidates + 1,
                        fields.len()
                    ),
                ));
            }
            let ed: usize = fields[0].parse().map_err(|_| {
                Error::parse(
                    path,
                    Some(lineno + 1),
                    format!("bad ed_index '{}'", fields[0]),
                )
            })?;
            if ed != num_eds + 1 {
                return Err(Error::parse(
                    path,
                    Some(lineno + 1),
                    format!("ed_index {} out of order (expected {})", ed, num_eds + 1),
                ));
            }
            for f in &fields[1..] {
                let v: f64 = f.parse().map_err(|_| {
                    Error::parse(path, Some(lineno + 1), format!("bad value '{f}'"))
                })?;
                if v.is_nan() || v == f64::INFINITY {
                    return Err(Error::parse(
                        path,
                        Some(lineno + 1),
                        format!("value '{f}' must be finite or -inf"),
                    ));
                }
                rows.push(v);
            }
            num_eds += 1;
        }
        if num_eds == 0 {
            return Err(Error::parse(path, None, "no data rows"));
        }
        GainMatrix::from_rows(
            rows,
            num_eds,
            num_candidates,
            0.0,
            path.display().to_string(),
        )
    }
}

/// Binary coverage indicators at a recorded threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageMatrix {
    beta: Vec<bool>,
    num_eds: usize,
    num_candidates: usize,
    pub rho_dbm: f64,
}

impl CoverageMatrix {
    pub fn from_rows(beta: Vec<bool>, num_eds: usize, num_candidates: usize, rho_dbm: f64) -> Self {
        assert_eq!(beta.len(), num_eds * num_candidates);
        CoverageMatrix {
            beta,
            num_eds,
            num_candidates,
            rho_dbm,
        }
    }

    pub fn num_eds(&self) -> usize {
        self.num_eds
    }

    pub fn num_candidates(&self) -> usize {
        self.num_candidates
    }

    /// Whether device `d` is covered by candidate `p`, 0-based indices.
    pub fn covered(&self, d: usize, p: usize) -> bool {
        self.beta[d * self.num_candidates + p]
    }
}

fn alpha_cell(
    scenario: &Scenario,
    cfg: &ChannelConfig,
    tx_power_dbm: f64,
    d: usize,
    p: usize,
) -> f64 {
    let ed = scenario.eds[d];
    let gw = scenario.gw_candidates[p];
    let d2d = distance_2d(ed, gw);
    let d3d = distance_3d(ed, gw);
    let pl = channel::link_path_loss(cfg, d, p, d2d, d3d, gw.z_m, ed.z_m);
    let shadow = channel::shadowing_draw_db(cfg.shadowing_seed, cfg.shadowing_sigma_db, d, p);
    channel::received_power(tx_power_dbm, pl, shadow)
}

fn warn_validity(scenario: &Scenario, cfg: &ChannelConfig) {
    if cfg.model != ModelKind::OkumuraHata && cfg.model != ModelKind::Cost231 {
        if cfg.model == ModelKind::Uma3gpp {
            if let Some(h) = scenario.eds.iter().map(|e| e.z_m).min_by(f64::total_cmp) {
                if h < 1.5 {
                    log::warn!(
                        "uma_3gpp: device heights down to {h} m are below the 1.5 m validity floor"
                    );
                }
            }
        }
        return;
    }
    let mut dmin = f64::INFINITY;
    let mut dmax = 0.0f64;
    for ed in &scenario.eds {
        for gw in &scenario.gw_candidates {
            let d = distance_2d(*ed, *gw);
            dmin = dmin.min(d);
            dmax = dmax.max(d);
        }
    }
    let hb = scenario.gw_candidates[0].z_m;
    let hm = scenario.eds[0].z_m;
    if let Some(msg) = channel::hata_validity_note(dmin, dmax, cfg.fc_hz, hb, hm) {
        log::warn!("{} outside validity: {msg}", cfg.model.name());
    }
}

/// Builds the received-power matrix for every (ed, candidate) pair.
///
/// Distance conventions follow each model; coincident positions are clamped
/// to the model's reference value rather than rejected. Runs in parallel
/// when the `parallel` feature is enabled; results do not depend on
/// partitioning.
pub fn build_alpha(
    scenario: &Scenario,
    cfg: &ChannelConfig,
    tx_power_dbm: f64,
) -> Result<GainMatrix> {
    scenario.validate()?;
    cfg.validate()?;
    warn_validity(scenario, cfg);
    let d = scenario.num_eds();
    let p = scenario.num_candidates();
    let rows = fill_cells(d * p, p, |di, pi| {
        alpha_cell(scenario, cfg, tx_power_dbm, di, pi)
    });
    GainMatrix::from_rows(rows, d, p, tx_power_dbm, cfg.model.name())
}

/// Sequential reference path of [`build_alpha`]; always available and used
/// by tests and benchmarks to pin down the parallel path.
pub fn build_alpha_sequential(
    scenario: &Scenario,
    cfg: &ChannelConfig,
    tx_power_dbm: f64,
) -> Result<GainMatrix> {
    scenario.validate()?;
    cfg.validate()?;
    warn_validity(scenario, cfg);
    let d = scenario.num_eds();
    let p = scenario.num_candidates();
    let rows = fill_cells_seq(d * p, p, |di, pi| {
        alpha_cell(scenario, cfg, tx_power_dbm, di, pi)
    });
    GainMatrix::from_rows(rows, d, p, tx_power_dbm, cfg.model.name())
}

fn fill_cells_seq(
    len: usize,
    stride: usize,
    cell: impl Fn(usize, usize) -> f64 + Sync,
) -> Vec<f64> {
    (0..len).map(|i| cell(i / stride, i % stride)).collect()
}

#[cfg(feature = "parallel")]
fn fill_cells(len: usize, stride: usize, cell: impl Fn(usize, usize) -> f64 + Sync) -> Vec<f64> {
    use rayon::prelude::*;
    (0..len)
        .into_par_iter()
        .map(|i| cell(i / stride, i % stride))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn fill_cells(len: usize, stride: usize, cell: impl Fn(usize, usize) -> f64 + Sync) -> Vec<f64> {
    fill_cells_seq(len, stride, cell)
}

/// Thresholds received power into binary coverage: covered iff alpha >= rho
/// (inclusive boundary).
pub fn threshold(alpha: &GainMatrix, rho_dbm: f64) -> CoverageMatrix {
    let beta = alpha.values().iter().map(|&a| a >= rho_dbm).collect();
    CoverageMatrix::from_rows(beta, alpha.num_eds(), alpha.num_candidates(), rho_dbm)
}

/// 1-based indices of devices no candidate covers; empty means the
/// placement problem is feasible.
pub fn uncovered_eds(beta: &CoverageMatrix) -> Vec<usize> {
    (0..beta.num_eds())
        .filter(|&d| (0..beta.num_candidates()).all(|p| !beta.covered(d, p)))
        .map(|d| d + 1)
        .collect()
}
