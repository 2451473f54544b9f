//! Network geometry: candidate gateway grid and end-device layout.
//!
//! Gateway candidates and end devices are ordered lists; the 1-based list
//! position is the stable identifier used in every file format and report.

use std::fs;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A cartesian coordinate in meters; `z_m` is height above ground.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Position {
    pub x_m: f64,
    pub y_m: f64,
    pub z_m: f64,
}

impl Position {
    pub fn new(x_m: f64, y_m: f64, z_m: f64) -> Self {
        Position { x_m, y_m, z_m }
    }
}

impl From<[f64; 3]> for Position {
    fn from(v: [f64; 3]) -> Self {
        Position::new(v[0], v[1], v[2])
    }
}

impl From<Position> for [f64; 3] {
    fn from(p: Position) -> Self {
        [p.x_m, p.y_m, p.z_m]
    }
}

/// Euclidean distance including the height difference.
pub fn distance_3d(a: Position, b: Position) -> f64 {
    let dx = a.x_m - b.x_m;
    let dy = a.y_m - b.y_m;
    let dz = a.z_m - b.z_m;
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Horizontal Euclidean distance; ignores `z_m`.
pub fn distance_2d(a: Position, b: Position) -> f64 {
    let dx = a.x_m - b.x_m;
    let dy = a.y_m - b.y_m;
    (dx * dx + dy * dy).sqrt()
}

/// Layout of a uniform candidate grid, kept for provenance when a scenario
/// was built with [`build_grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub origin: Position,
    pub nx: usize,
    pub ny: usize,
    pub spacing_m: f64,
}

/// Candidate gateway positions (length `P`) and end-device positions
/// (length `D`). Candidate `p` and device `d` are 1-based list indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub gw_candidates: Vec<Position>,
    pub eds: Vec<Position>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_meta: Option<GridMeta>,
}

impl Scenario {
    /// Number of candidate gateway positions.
    pub fn num_candidates(&self) -> usize {
        self.gw_candidates.len()
    }

    /// Number of end devices.
    pub fn num_eds(&self) -> usize {
        self.eds.len()
    }

    /// Checks every type invariant; called on load and before matrix builds.
    pub fn validate(&self) -> Result<()> {
        if self.gw_candidates.is_empty() {
            return Err(Error::InvalidInput(
                "gw_candidates must be non-empty".into(),
            ));
        }
        if self.eds.is_empty() {
            return Err(Error::InvalidInput("eds must be non-empty".into()));
        }
        for (i, p) in self.gw_candidates.iter().enumerate() {
            check_position("gw_candidates", i, p)?;
        }
        for (i, p) in self.eds.iter().enumerate() {
            check_position("eds", i, p)?;
        }
        // Candidate identity is its (x, y) point; duplicates would make two
        // indices refer to the same physical placement.
        for i in 0..self.gw_candidates.len() {
            for j in (i + 1)..self.gw_candidates.len() {
                let a = self.gw_candidates[i];
                let b = self.gw_candidates[j];
                if a.x_m == b.x_m && a.y_m == b.y_m {
                    return Err(Error::InvalidInput(format!(
                        "gw_candidates {} and {} share coordinates ({}, {})",
                        i + 1,
                        j + 1,
                        a.x_m,
                        a.y_m
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_position(field: &str, index: usize, p: &Position) -> Result<()> {
    if !(p.x_m.is_finite() && p.y_m.is_finite() && p.z_m.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "{}[{}] has a non-finite coordinate",
            field,
            index + 1
        )));
    }
    if p.z_m <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "{}[{}] height z_m must be > 0, got {}",
            field,
            index + 1,
            p.z_m
        )));
    }
    Ok(())
}

/// Builds a uniform row-major candidate grid.
///
/// Candidate 1 sits at `origin`, indices advance along x first, and every
/// candidate is placed at `gw_height_m`. The end-device list is copied
/// verbatim.
pub fn build_grid(
    origin: Position,
    nx: usize,
    ny: usize,
    spacing_m: f64,
    gw_height_m: f64,
    eds: Vec<Position>,
) -> Result<Scenario> {
    if nx * ny == 0 {
        return Err(Error::InvalidInput(
            "grid needs nx*ny >= 1 candidates".into(),
        ));
    }
    if !(spacing_m > 0.0) {
        return Err(Error::InvalidInput(format!(
            "spacing_m must be > 0, got {spacing_m}"
        )));
    }
    if !(gw_height_m > 0.0) {
        return Err(Error::InvalidInput(format!(
            "gw_height_m must be > 0, got {gw_height_m}"
        )));
    }
    let mut gw_candidates = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            gw_candidates.push(Position::new(
                origin.x_m + ix as f64 * spacing_m,
                origin.y_m + iy as f64 * spacing_m,
                gw_height_m,
            ));
        }
    }
    let scenario = Scenario {
        gw_candidates,
        eds,
        grid_meta: Some(GridMeta {
            origin,
            nx,
            ny,
            spacing_m,
        }),
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Loads a scenario JSON file and validates every invariant.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let scenario: Scenario = serde_json::from_str(&text)
        .map_err(|e| Error::parse(path, Some(e.line()), e.to_string()))?;
    scenario.validate().map_err(|e| match e {
        Error::InvalidInput(msg) => Error::parse(path, None, msg),
        other => other,
    })?;
    Ok(scenario)
}

/// Writes a scenario as pretty-printed JSON; a reload reproduces every field
/// bit-exactly.
pub fn save_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(scenario)
        .map_err(|e| Error::InvalidInput(format!("scenario not serializable: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Seed for the bundled sample end-device layout.
pub const SAMPLE_ED_SEED: u64 = 7;

/// Lattice pitch of the sample end-device layout. Devices snap to this
/// lattice so raster coverage maps with a matching cell size have cell
/// centers exactly on the device positions.
pub const SAMPLE_ED_LATTICE_M: f64 = 5.0;

/// Builds the bundled sample scenario: a 10x10 candidate grid with 50 m
/// spacing at 30 m height, plus 54 end devices at 1.4 m height drawn
/// deterministically (seed [`SAMPLE_ED_SEED`]) on a 5 m lattice inside the
/// 450x450 m grid hull.
pub fn sample_scenario() -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_ED_SEED);
    let cells_per_axis = (450.0 / SAMPLE_ED_LATTICE_M) as u64 + 1; // 0..=450 m
    let mut taken = std::collections::HashSet::new();
    let mut eds = Vec::with_capacity(54);
    while eds.len() < 54 {
        let ix = rng.random_range(0..cells_per_axis);
        let iy = rng.random_range(0..cells_per_axis);
        if taken.insert((ix, iy)) {
            eds.push(Position::new(
                ix as f64 * SAMPLE_ED_LATTICE_M,
                iy as f64 * SAMPLE_ED_LATTICE_M,
                1.4,
            ));
        }
    }
    build_grid(Position::new(0.0, 0.0, 30.0), 10, 10, 50.0, 30.0, eds)
        .expect("sample scenario parameters are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_10x10_spans_450m() {
        let s = build_grid(
            Position::new(0.0, 0.0, 30.0),
            10,
            10,
            50.0,
            30.0,
            vec![Position::new(1.0, 1.0, 1.4)],
        )
        .unwrap();
        assert_eq!(s.num_candidates(), 100);
        assert_eq!(s.gw_candidates[0], Position::new(0.0, 0.0, 30.0));
        assert_eq!(s.gw_candidates[99], Position::new(450.0, 450.0, 30.0));
    }

    #[test]
    fn degenerate_1x1_grid() {
        let s = build_grid(
            Position::new(3.0, 4.0, 1.0),
            1,
            1,
            10.0,
            15.0,
            vec![Position::new(0.0, 0.0, 1.4)],
        )
        .unwrap();
        assert_eq!(s.num_candidates(), 1);
        assert_eq!(s.gw_candidates[0], Position::new(3.0, 4.0, 15.0));
    }

    #[test]
    fn grid_2x3_row_major() {
        let s = build_grid(
            Position::new(0.0, 0.0, 30.0),
            2,
            3,
            10.0,
            30.0,
            vec![Position::new(0.0, 0.0, 1.4)],
        )
        .unwrap();
        assert_eq!(s.num_candidates(), 6);
        let max_x = s
            .gw_candidates
            .iter()
            .map(|p| p.x_m)
            .fold(f64::MIN, f64::max);
        let max_y = s
            .gw_candidates
            .iter()
            .map(|p| p.y_m)
            .fold(f64::MIN, f64::max);
        assert_eq!(max_x, 10.0);
        assert_eq!(max_y, 20.0);
        // index 2 (1-based 3) starts the second row
        assert_eq!(s.gw_candidates[2], Position::new(0.0, 10.0, 30.0));
    }

    #[test]
    fn grid_rejects_bad_spacing_and_height() {
        let eds = vec![Position::new(0.0, 0.0, 1.4)];
        assert!(build_grid(Position::new(0.0, 0.0, 30.0), 2, 2, 0.0, 30.0, eds.clone()).is_err());
        assert!(build_grid(Position::new(0.0, 0.0, 30.0), 2, 2, 50.0, -1.0, eds).is_err());
    }

    #[test]
    fn distances() {
        let a = Position::new(0.0, 0.0, 30.0);
        let b = Position::new(0.0, 0.0, 1.4);
        assert!((distance_3d(a, b) - 28.6).abs() < 1e-12);
        assert_eq!(distance_2d(a, b), 0.0);
        assert_eq!(distance_3d(a, a), 0.0);
        assert_eq!(
            distance_3d(Position::new(0.0, 0.0, 1.0), Position::new(3.0, 4.0, 1.0)),
            5.0
        );
    }

    #[test]
    fn validate_rejects_empty_eds() {
        let s = Scenario {
            gw_candidates: vec![Position::new(0.0, 0.0, 30.0)],
            eds: vec![],
            grid_meta: None,
        };
        let err = s.validate().unwrap_err().to_string();
        assert!(err.contains("eds must be non-empty"), "{err}");
    }

    #[test]
    fn validate_rejects_duplicate_candidate_xy() {
        let s = Scenario {
            gw_candidates: vec![
                Position::new(10.0, 20.0, 30.0),
                Position::new(10.0, 20.0, 25.0),
            ],
            eds: vec![Position::new(0.0, 0.0, 1.4)],
            grid_meta: None,
        };
        let err = s.validate().unwrap_err().to_string();
        assert!(err.contains("share coordinates"), "{err}");
    }

    #[test]
    fn sample_scenario_shape() {
        let s = sample_scenario();
        assert_eq!(s.num_candidates(), 100);
        assert_eq!(s.num_eds(), 54);
        for ed in &s.eds {
            assert_eq!(ed.z_m, 1.4);
            assert!((0.0..=450.0).contains(&ed.x_m));
            assert!((0.0..=450.0).contains(&ed.y_m));
            // on the 5 m lattice
            assert_eq!(ed.x_m % SAMPLE_ED_LATTICE_M, 0.0);
            assert_eq!(ed.y_m % SAMPLE_ED_LATTICE_M, 0.0);
        }
        // deterministic
        assert_eq!(s, sample_scenario());
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scenario.json");
        let s = sample_scenario();
        save_scenario(&s, &path).unwrap();
        let loaded = load_scenario(&path).unwrap();
        assert_eq!(s, loaded);
    }

    #[test]
    fn load_missing_file_is_io_error() {
        let err = load_scenario("/nonexistent/scenario.json").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
