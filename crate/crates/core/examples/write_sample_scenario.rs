//! Writes the bundled sample scenario (10x10 candidate grid, 54 devices)
//! to the given path, default `fixtures/sample_scenario.json`.

use loraplan_core::scenario::{sample_scenario, save_scenario};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "fixtures/sample_scenario.json".to_string());
    save_scenario(&sample_scenario(), &path).expect("write scenario");
    println!("wrote {path}");
}
