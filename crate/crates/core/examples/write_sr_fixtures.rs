//! Regenerates the bundled super-resolution fixtures under `fixtures/sr`.
//!
//! `cargo run -p road-core --example write_sr_fixtures [dir]`

use std::path::PathBuf;

use road_core::superres::{fixture_pair, write_pgm};

const SIZE: usize = 64;
const SCALE: usize = 2;
const SEEDS: [u64; 7] = [1, 2, 3, 4, 100, 101, 102];

fn main() -> road_core::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/sr"));
    std::fs::create_dir_all(&dir)?;
    for seed in SEEDS {
        let (low, high) = fixture_pair(SIZE, SCALE, seed)?;
        write_pgm(&low, dir.join(format!("scene{seed}_low.pgm")))?;
        write_pgm(&high, dir.join(format!("scene{seed}_high.pgm")))?;
    }
    println!("wrote {} pairs to {}", SEEDS.len(), dir.display());
    Ok(())
}
