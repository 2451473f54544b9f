//! Writes a synthetic per-candidate coverage-map set for the sample
//! scenario, standing in for a ray-tracer export so the ingestion pipeline
//! can be exercised end to end.
//!
//! Usage: synthesize_sample_maps <out_dir> [model] [perturb_sigma_db] [seed]

use loraplan_core::channel::{ChannelConfig, ModelKind};
use loraplan_core::rt_ingest::{synthesize_maps, RasterSpec};
use loraplan_core::scenario::{sample_scenario, SAMPLE_ED_LATTICE_M};
use std::str::FromStr;

fn main() {
    let mut args = std::env::args().skip(1);
    let out_dir = args.next().unwrap_or_else(|| "rt_maps".to_string());
    let model = args
        .next()
        .map(|m| ModelKind::from_str(&m).expect("valid model name"))
        .unwrap_or(ModelKind::Uma3gpp);
    let sigma: f64 = args
        .next()
        .map(|s| s.parse().expect("sigma"))
        .unwrap_or(6.0);
    let seed: u64 = args.next().map(|s| s.parse().expect("seed")).unwrap_or(1);

    let scenario = sample_scenario();
    let raster = RasterSpec {
        origin_x_m: 0.0,
        origin_y_m: 0.0,
        cell_size_m: SAMPLE_ED_LATTICE_M,
        nx: 91,
        ny: 91,
    };
    let cfg = ChannelConfig::new(model);
    synthesize_maps(&out_dir, &scenario, &cfg, raster, 1.4, sigma, seed).expect("write maps");
    println!("wrote {} maps to {out_dir}", scenario.num_candidates());
}
