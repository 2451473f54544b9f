//! Ingestion of ray-tracer-exported path-gain coverage maps.
//!
//! One CSV raster per candidate (`gw_1.csv` .. `gw_P.csv`), sampled at the
//! end-device positions with nearest-cell lookup to build a site-specific
//! received-power matrix. A synthetic generator produces the same file set
//! from any closed-form channel model so the ingestion path can be exercised
//! (and tested) without a ray-tracing engine.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{self, ChannelConfig};
use crate::coverage::GainMatrix;
use crate::error::{Error, Result};
use crate::scenario::{Position, Scenario};

pub const MAP_CSV_HEADER: &str = "x_m,y_m,gain_db";

/// Raster of path gain (dB, typically <= 0) around one candidate position.
/// `origin` is the center of cell (0, 0); cell (ix, iy) is centered at
/// `origin + (ix, iy) * cell_size_m`. Cells no ray reached hold `-inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct GainMap {
    pub origin_x_m: f64,
    pub origin_y_m: f64,
    pub cell_size_m: f64,
    pub nx: usize,
    pub ny: usize,
    values: Vec<f64>,
    /// 1-based candidate index this map belongs to.
    pub gw_index: usize,
}

impl GainMap {
    pub fn new(
        origin_x_m: f64,
        origin_y_m: f64,
        cell_size_m: f64,
        nx: usize,
        ny: usize,
        values: Vec<f64>,
        gw_index: usize,
    ) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidInput("gain map needs nx, ny >= 1".into()));
        }
        if !(cell_size_m > 0.0) {
            return Err(Error::InvalidInput(format!(
                "cell_size_m must be > 0, got {cell_size_m}"
            )));
        }
        if values.len() != nx * ny {
            return Err(Error::InvalidInput(format!(
                "gain map has {} values, expected {}x{}",
                values.len(),
                nx,
                ny
            )));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidInput("gain map contains NaN".into()));
        }
        Ok(GainMap {
            origin_x_m,
            origin_y_m,
            cell_size_m,
            nx,
            ny,
            values,
            gw_index,
        })
    }

    pub fn value_at_cell(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }

    fn extent(&self) -> (f64, f64, f64, f64) {
        let half = self.cell_size_m / 2.0;
        (
            self.origin_x_m - half,
            self.origin_x_m + (self.nx - 1) as f64 * self.cell_size_m + half,
            self.origin_y_m - half,
            self.origin_y_m + (self.ny - 1) as f64 * self.cell_size_m + half,
        )
    }
}

/// Optional sidecar `meta.json` fixing the raster geometry when it cannot be
/// inferred (single-row or single-cell maps).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MapMeta {
    pub cell_size_m: f64,
    /// Center of cell (0, 0) as `[x_m, y_m]`.
    pub origin: [f64; 2],
}

/// Nearest cell index along one axis; exact half-cell ties resolve toward
/// the lower index.
fn nearest_index(coord: f64, origin: f64, cell: f64, n: usize) -> Option<usize> {
    let t = (coord - origin) / cell;
    let mut i = (t - 0.5).ceil();
    if i < 0.0 && t >= -0.5 {
        i = 0.0; // left edge of the expanded bounding box
    }
    if i < 0.0 || i > (n - 1) as f64 {
        return None;
    }
    Some(i as usize)
}

/// Path gain at `pos` by nearest-cell lookup. `pos` must lie within the
/// raster bounding box expanded by half a cell.
pub fn sample_gain(map: &GainMap, pos: Position) -> Result<f64> {
    let ix = nearest_index(pos.x_m, map.origin_x_m, map.cell_size_m, map.nx);
    let iy = nearest_index(pos.y_m, map.origin_y_m, map.cell_size_m, map.ny);
    match (ix, iy) {
        (Some(ix), Some(iy)) => Ok(map.value_at_cell(ix, iy)),
        _ => {
            let (x0, x1, y0, y1) = map.extent();
            Err(Error::OutOfBounds(format!(
                "position ({}, {}) outside gain map {} extent x [{x0}, {x1}], y [{y0}, {y1}]",
                pos.x_m, pos.y_m, map.gw_index
            )))
        }
    }
}

fn infer_lattice(coords: &[f64], axis: &str, path: &Path) -> Result<(f64, Option<f64>)> {
    let mut sorted: Vec<f64> = coords.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let min = sorted[0];
    let mut step = None;
    for w in sorted.windows(2) {
        let d = w[1] - w[0];
        if step.is_none_or(|s| d < s) {
            step = Some(d);
        }
    }
    if let Some(s) = step {
        if !(s > 0.0) {
            return Err(Error::parse(
                path,
                None,
                format!("degenerate {axis} spacing"),
            ));
        }
    }
    Ok((min, step))
}

fn lattice_index(coord: f64, origin: f64, cell: f64, path: &Path, line: usize) -> Result<usize> {
    let t = (coord - origin) / cell;
    let i = t.round();
    if (t - i).abs() > 1e-6 {
        return Err(Error::parse(
            path,
            Some(line),
            format!(
                "coordinate {coord} is not on the raster lattice (origin {origin}, cell {cell})"
            ),
        ));
    }
    if i < 0.0 {
        return Err(Error::parse(
            path,
            Some(line),
            format!("coordinate {coord} lies before raster origin {origin}"),
        ));
    }
    Ok(i as usize)
}

/// Parses one gain-map CSV. Raster geometry comes from `meta` when given,
/// otherwise it is inferred from the coordinates; cells absent from the file
/// become the `-inf` sentinel.
pub fn load_gain_map_with_meta(
    path: impl AsRef<Path>,
    gw_index: usize,
    meta: Option<&MapMeta>,
) -> Result<GainMap> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, Some(1), "empty file"))?;
    if header.trim() != MAP_CSV_HEADER {
        return Err(Error::parse(
            path,
            Some(1),
            format!("expected header '{MAP_CSV_HEADER}', got '{header}'"),
        ));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut cells = Vec::new(); // (x, y, gain, line)
    for (lineno, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                path,
                Some(lineno + 1),
                format!("expected 3 fields, got {}", fields.len()),
            ));
        }
        let parse = |s: &str, what: &str| -> Result<f64> {
            s.trim().parse().map_err(|_| {
                Error::parse(path, Some(lineno + 1), format!("bad {what} value '{s}'"))
            })
        };
        let x = parse(fields[0], "x_m")?;
        let y = parse(fields[1], "y_m")?;
        let g = parse(fields[2], "gain_db")?;
        if g.is_nan() {
            return Err(Error::parse(path, Some(lineno + 1), "gain_db is NaN"));
        }
        xs.push(x);
        ys.push(y);
        cells.push((x, y, g, lineno + 1));
    }
    if cells.is_empty() {
        return Err(Error::parse(path, None, "no raster cells"));
    }

    let (origin_x, origin_y, cell_size) = match meta {
        Some(m) => {
            if !(m.cell_size_m > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "meta cell_size_m must be > 0, got {}",
                    m.cell_size_m
                )));
            }
            (m.origin[0], m.origin[1], m.cell_size_m)
        }
        None => {
            let (ox, sx) = infer_lattice(&xs, "x", path)?;
            let (oy, sy) = infer_lattice(&ys, "y", path)?;
            let cell = match (sx, sy) {
                (Some(a), Some(b)) => a.min(b),
                (Some(a), None) => a,
                (None, Some(b)) => b,
                (None, None) => {
                    return Err(Error::parse(
                        path,
                        None,
                        "cannot infer cell size from a single cell; provide meta.json",
                    ))
                }
            };
            (ox, oy, cell)
        }
    };

    let mut nx = 0usize;
    let mut ny = 0usize;
    let mut indexed = Vec::with_capacity(cells.len());
    for &(x, y, g, line) in &cells {
        let ix = lattice_index(x, origin_x, cell_size, path, line)?;
        let iy = lattice_index(y, origin_y, cell_size, path, line)?;
        nx = nx.max(ix + 1);
        ny = ny.max(iy + 1);
        indexed.push((ix, iy, g, line));
    }
    let mut values = vec![f64::NEG_INFINITY; nx * ny];
    let mut seen = vec![false; nx * ny];
    for (ix, iy, g, line) in indexed {
        let idx = iy * nx + ix;
        if seen[idx] {
            return Err(Error::parse(
                path,
                Some(line),
                format!(
                    "duplicate cell at ({}, {})",
                    origin_x + ix as f64 * cell_size,
                    origin_y + iy as f64 * cell_size
                ),
            ));
        }
        seen[idx] = true;
        values[idx] = g;
    }
    GainMap::new(origin_x, origin_y, cell_size, nx, ny, values, gw_index)
}

/// Parses one gain-map CSV, inferring the raster geometry from coordinates.
pub fn load_gain_map(path: impl AsRef<Path>, gw_index: usize) -> Result<GainMap> {
    load_gain_map_with_meta(path, gw_index, None)
}

/// Writes a gain map in the ingestion CSV format. `-inf` cells are omitted,
/// matching the "no ray reached this cell" convention.
pub fn write_gain_map(map: &GainMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from(MAP_CSV_HEADER);
    out.push('\n');
    for iy in 0..map.ny {
        for ix in 0..map.nx {
            let g = map.value_at_cell(ix, iy);
            if g == f64::NEG_INFINITY {
                continue;
            }
            let x = map.origin_x_m + ix as f64 * map.cell_size_m;
            let y = map.origin_y_m + iy as f64 * map.cell_size_m;
            out.push_str(&format!("{x},{y},{g}\n"));
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn map_file_name(p: usize) -> String {
    format!("gw_{p}.csv")
}

fn read_dir_meta(dir: &Path) -> Result<Option<MapMeta>> {
    let meta_path = dir.join("meta.json");
    if !meta_path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: MapMeta = serde_json::from_str(&text)
        .map_err(|e| Error::parse(&meta_path, Some(e.line()), e.to_string()))?;
    Ok(Some(meta))
}

fn sample_column(
    map: &GainMap,
    scenario: &Scenario,
    tx_power_dbm: f64,
    p: usize,
) -> Result<Vec<f64>> {
    scenario
        .eds
        .iter()
        .enumerate()
        .map(|(d, ed)| {
            sample_gain(map, *ed)
                .map(|g| tx_power_dbm + g)
                .map_err(|e| {
                    Error::OutOfBounds(format!("ed {} vs candidate {}: {e}", d + 1, p + 1))
                })
        })
        .collect()
}

fn load_and_sample(
    dir: &Path,
    scenario: &Scenario,
    tx_power_dbm: f64,
    meta: Option<&MapMeta>,
    p: usize,
) -> Result<Vec<f64>> {
    let map = load_gain_map_with_meta(dir.join(map_file_name(p + 1)), p + 1, meta)?;
    sample_column(&map, scenario, tx_power_dbm, p)
}

/// Builds the received-power matrix from per-candidate gain maps:
/// `alpha[d][p] = tx_power_dbm + sample_gain(map_p, ed_d)`.
///
/// The directory must hold one map per candidate (`gw_1.csv` .. `gw_P.csv`);
/// maps load in parallel when the `parallel` feature is on, assembled by
/// index so read order never changes the result.
pub fn build_alpha_from_maps(
    dir: impl AsRef<Path>,
    scenario: &Scenario,
    tx_power_dbm: f64,
) -> Result<GainMatrix> {
    let dir = dir.as_ref();
    scenario.validate()?;
    let p_total = scenario.num_candidates();
    let missing: Vec<usize> = (1..=p_total)
        .filter(|p| !dir.join(map_file_name(*p)).exists())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingMaps(missing));
    }
    let meta = read_dir_meta(dir)?;
    let columns = load_columns(dir, scenario, tx_power_dbm, meta.as_ref(), p_total)?;
    assemble(columns, scenario, tx_power_dbm, dir)
}

/// Sequential reference path of [`build_alpha_from_maps`].
pub fn build_alpha_from_maps_sequential(
    dir: impl AsRef<Path>,
    scenario: &Scenario,
    tx_power_dbm: f64,
) -> Result<GainMatrix> {
    let dir = dir.as_ref();
    scenario.validate()?;
    let p_total = scenario.num_candidates();
    let missing: Vec<usize> = (1..=p_total)
        .filter(|p| !dir.join(map_file_name(*p)).exists())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingMaps(missing));
    }
    let meta = read_dir_meta(dir)?;
    let columns: Vec<Vec<f64>> = (0..p_total)
        .map(|p| load_and_sample(dir, scenario, tx_power_dbm, meta.as_ref(), p))
        .collect::<Result<_>>()?;
    assemble(columns, scenario, tx_power_dbm, dir)
}

#[cfg(feature = "parallel")]
fn load_columns(
    dir: &Path,
    scenario: &Scenario,
    tx_power_dbm: f64,
    meta: Option<&MapMeta>,
    p_total: usize,
) -> Result<Vec<Vec<f64>>> {
    use rayon::prelude::*;
    (0..p_total)
        .into_par_iter()
        .map(|p| load_and_sample(dir, scenario, tx_power_dbm, meta, p))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn load_columns(
    dir: &Path,
    scenario: &Scenario,
    tx_power_dbm: f64,
    meta: Option<&MapMeta>,
    p_total: usize,
) -> Result<Vec<Vec<f64>>> {
    (0..p_total)
        .map(|p| load_and_sample(dir, scenario, tx_power_dbm, meta, p))
        .collect()
}

fn assemble(
    columns: Vec<Vec<f64>>,
    scenario: &Scenario,
    tx_power_dbm: f64,
    dir: &Path,
) -> Result<GainMatrix> {
    let d_total = scenario.num_eds();
    let p_total = scenario.num_candidates();
    let mut rows = vec![0.0f64; d_total * p_total];
    for (p, col) in columns.iter().enumerate() {
        for (d, v) in col.iter().enumerate() {
            rows[d * p_total + p] = *v;
        }
    }
    GainMatrix::from_rows(
        rows,
        d_total,
        p_total,
        tx_power_dbm,
        format!("rt:{}", dir.display()),
    )
}

/// Raster geometry for the synthetic map generator.
#[derive(Debug, Clone, Copy)]
pub struct RasterSpec {
    pub origin_x_m: f64,
    pub origin_y_m: f64,
    pub cell_size_m: f64,
    pub nx: usize,
    pub ny: usize,
}

/// Generates one gain map per candidate by evaluating a channel model at
/// every cell center (receiver at `rx_height_m`), optionally adding a seeded
/// per-cell perturbation, and writes the `gw_<p>.csv` file set to `dir`.
///
/// With zero perturbation and a deterministic model config, ingesting the
/// generated maps reproduces the closed-form matrix at any device position
/// that coincides with a cell center.
pub fn synthesize_maps(
    dir: impl AsRef<Path>,
    scenario: &Scenario,
    cfg: &ChannelConfig,
    raster: RasterSpec,
    rx_height_m: f64,
    perturb_sigma_db: f64,
    perturb_seed: u64,
) -> Result<()> {
    let dir = dir.as_ref();
    scenario.validate()?;
    cfg.validate()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (p, gw) in scenario.gw_candidates.iter().enumerate() {
        let mut values = Vec::with_capacity(raster.nx * raster.ny);
        for iy in 0..raster.ny {
            for ix in 0..raster.nx {
                let cell_idx = iy * raster.nx + ix;
                let pos = Position::new(
                    raster.origin_x_m + ix as f64 * raster.cell_size_m,
                    raster.origin_y_m + iy as f64 * raster.cell_size_m,
                    rx_height_m,
                );
                let d2d = crate::scenario::distance_2d(pos, *gw);
                let d3d = crate::scenario::distance_3d(pos, *gw);
                let pl = channel::link_path_loss(cfg, cell_idx, p, d2d, d3d, gw.z_m, rx_height_m);
                let perturb =
                    channel::shadowing_draw_db(perturb_seed, perturb_sigma_db, cell_idx, p);
                values.push(-pl + perturb);
            }
        }
        let map = GainMap::new(
            raster.origin_x_m,
            raster.origin_y_m,
            raster.cell_size_m,
            raster.nx,
            raster.ny,
            values,
            p + 1,
        )?;
        write_gain_map(&map, dir.join(map_file_name(p + 1)))?;
    }
    Ok(())
}
