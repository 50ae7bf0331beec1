#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mfscan_core::simulation::{
    generate_dataset, DataModel, NoiseBasis, NoiseDistribution, ShiftType,
};
use mfscan_core::{rng, TimeGrid};

/// A `side × side` lattice of sites with unit spacing.
pub fn lattice_sites(side: usize) -> Vec<(String, f64, f64)> {
    (0..side * side)
        .map(|k| (format!("s{k:03}"), (k % side) as f64, (k / side) as f64))
        .collect()
}

pub fn write_sites(dir: &Path, sites: &[(String, f64, f64)]) -> PathBuf {
    let mut s = String::from("site_id,x,y\n");
    for (id, x, y) in sites {
        writeln!(s, "{id},{x},{y}").unwrap();
    }
    let path = dir.join("sites.csv");
    std::fs::write(&path, s).unwrap();
    path
}

/// Simulated long-format panel on `t_len` points in `[0, 1]`; sites flagged
/// in `cluster` receive a `delta1` shift of intensity `alpha`.
pub fn write_panel(
    dir: &Path,
    sites: &[(String, f64, f64)],
    cluster: &[bool],
    alpha: f64,
    t_len: usize,
    seed: u64,
) -> PathBuf {
    let grid = TimeGrid::uniform(0.0, 1.0, t_len).unwrap();
    let basis = NoiseBasis::new(&grid, 20);
    let model = DataModel {
        distribution: NoiseDistribution::Normal,
        rho: 0.5,
        shift: ShiftType::Delta1,
        alpha,
    };
    let data = generate_dataset(&model, &grid, &basis, cluster, &mut rng::stream(seed, 0)).unwrap();
    let mut s = String::from("site_id,time,no2,o3\n");
    for (i, (id, _, _)) in sites.iter().enumerate() {
        for (t, time) in grid.points().iter().enumerate() {
            writeln!(
                s,
                "{id},{time},{},{}",
                data.value(i, t, 0),
                data.value(i, t, 1)
            )
            .unwrap();
        }
    }
    let path = dir.join("panel.csv");
    std::fs::write(&path, s).unwrap();
    path
}

/// Sites within distance 1.5 of the lattice point `(1, 1)`.
pub fn corner_cluster(sites: &[(String, f64, f64)]) -> Vec<bool> {
    sites
        .iter()
        .map(|(_, x, y)| (x - 1.0).hypot(y - 1.0) <= 1.5)
        .collect()
}
