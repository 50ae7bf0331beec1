//! Site locations, pairwise distances and circular scan windows.
//!
//! A window `w(i, j)` is the closed disc centred on site `i` whose boundary
//! passes through site `j`. Sites exactly on the boundary belong to the disc,
//! so distance ties can push a disc over the size bound, in which case it is
//! dropped rather than shrunk.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

/// Mean Earth radius used by the haversine distance, in kilometres.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum CoordinateMode {
    /// Euclidean coordinates in kilometres.
    #[default]
    Planar,
    /// Longitude/latitude in degrees; great-circle distance in kilometres.
    Geodetic,
}

/// Validated collection of site labels and coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteMap {
    ids: Vec<String>,
    coords: Vec<[f64; 2]>,
    mode: CoordinateMode,
}

impl SiteMap {
    /// Builds a site map, rejecting fewer than two sites, repeated ids and
    /// repeated coordinates.
    pub fn new(ids: Vec<String>, coords: Vec<[f64; 2]>, mode: CoordinateMode) -> Result<Self> {
        if ids.len() != coords.len() {
            return Err(Error::DimensionMismatch(alloc::format!(
                "{} ids but {} coordinates",
                ids.len(),
                coords.len()
            )));
        }
        if ids.len() < 2 {
            return Err(Error::TooFewSites(ids.len()));
        }
        for (id, c) in ids.iter().zip(&coords) {
            if !c[0].is_finite() || !c[1].is_finite() {
                return Err(Error::InvalidCoordinate(id.clone()));
            }
        }
        let mut by_id: Vec<usize> = (0..ids.len()).collect();
        by_id.sort_by(|&a, &b| ids[a].cmp(&ids[b]).then(a.cmp(&b)));
        for pair in by_id.windows(2) {
            if ids[pair[0]] == ids[pair[1]] {
                return Err(Error::DuplicateSiteId(ids[pair[0]].clone()));
            }
        }
        let mut by_coord: Vec<usize> = (0..ids.len()).collect();
        by_coord.sort_by(|&a, &b| {
            coords[a][0]
                .total_cmp(&coords[b][0])
                .then(coords[a][1].total_cmp(&coords[b][1]))
                .then(a.cmp(&b))
        });
        for pair in by_coord.windows(2) {
            if coords[pair[0]] == coords[pair[1]] {
                let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
                return Err(Error::DuplicateCoordinates {
                    first: ids[a].clone(),
                    second: ids[b].clone(),
                });
            }
        }
        Ok(Self { ids, coords, mode })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn mode(&self) -> CoordinateMode {
        self.mode
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|s| s == id)
    }

    /// Distance in kilometres between two coordinate pairs under `mode`.
    pub fn distance(mode: CoordinateMode, a: [f64; 2], b: [f64; 2]) -> f64 {
        match mode {
            CoordinateMode::Planar => (a[0] - b[0]).hypot(a[1] - b[1]),
            CoordinateMode::Geodetic => haversine_km(a, b),
        }
    }
}

/// Great-circle distance between two `(lon, lat)` points given in degrees.
pub fn haversine_km(a: [f64; 2], b: [f64; 2]) -> f64 {
    let (lon1, lat1) = (a[0].to_radians(), a[1].to_radians());
    let (lon2, lat2) = (b[0].to_radians(), b[1].to_radians());
    let dlat = lat2 - lat1;
    let dlon = lon2 - lon1;
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Dense symmetric distance matrix with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds a distance matrix from raw values; used by tests and callers with
    /// their own metric. Values must be finite, symmetric, nonnegative with a
    /// zero diagonal.
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::DimensionMismatch(alloc::format!(
                "expected {} distances, got {}",
                n * n,
                values.len()
            )));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::InvalidParameter(
                    "nonzero diagonal distance".to_string(),
                ));
            }
            for j in 0..n {
                let d = values[i * n + j];
                if !d.is_finite() || d < 0.0 || d != values[j * n + i] {
                    return Err(Error::InvalidParameter(alloc::format!(
                        "distance ({i}, {j}) is not a symmetric nonnegative value"
                    )));
                }
            }
        }
        Ok(Self { n, values })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

pub fn build_distance_matrix(sites: &SiteMap) -> DistanceMatrix {
    let n = sites.len();
    let mut values = alloc::vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = SiteMap::distance(sites.mode, sites.coords[i], sites.coords[j]);
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    DistanceMatrix { n, values }
}

/// A closed disc of sites around `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanWindow {
    pub center: usize,
    pub radius: f64,
    /// Ascending site indices.
    pub members: Vec<usize>,
}

impl ScanWindow {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.members.binary_search(&site).is_ok()
    }

    pub fn is_disjoint(&self, other: &ScanWindow) -> bool {
        let (mut a, mut b) = (0, 0);
        while a < self.members.len() && b < other.members.len() {
            match self.members[a].cmp(&other.members[b]) {
                Ordering::Less => a += 1,
                Ordering::Greater => b += 1,
                Ordering::Equal => return false,
            }
        }
        true
    }
}

/// Deduplicated windows ordered by center, then by radius.
///
/// For every center the sites are kept in distance order (ties broken by
/// ascending index), so each window is a prefix of its center's ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSet {
    n_sites: usize,
    windows: Vec<ScanWindow>,
    /// Distance-sorted site order per center, truncated to the largest window
    /// kept for that center.
    orders: Vec<Vec<usize>>,
    /// Windows grouped by center: `(center, first window, end window)`.
    groups: Vec<(usize, usize, usize)>,
}

impl WindowSet {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn windows(&self) -> &[ScanWindow] {
        &self.windows
    }

    pub fn get(&self, index: usize) -> &ScanWindow {
        &self.windows[index]
    }

    /// Distance-sorted prefix order used for `center`.
    pub fn order(&self, center: usize) -> &[usize] {
        &self.orders[center]
    }

    /// `(center, window range)` for every center that owns at least one
    /// window, in window order.
    pub fn center_groups(&self) -> impl Iterator<Item = (usize, core::ops::Range<usize>)> + '_ {
        self.groups.iter().map(|&(c, a, b)| (c, a..b))
    }

    /// Largest number of sites in any window.
    pub fn max_size(&self) -> usize {
        self.windows.iter().map(ScanWindow::size).max().unwrap_or(0)
    }
}

/// Enumerates every circular window `w(i, j)` with at most
/// `floor(n * max_fraction)` sites and, if given, radius at most `max_radius`.
pub fn enumerate_windows(
    dist: &DistanceMatrix,
    max_radius: Option<f64>,
    max_fraction: f64,
) -> Result<WindowSet> {
    let n = dist.len();
    if n < 2 {
        return Err(Error::TooFewSites(n));
    }
    if !(max_fraction > 0.0 && max_fraction <= 1.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "max_fraction must lie in (0, 1], got {max_fraction}"
        )));
    }
    if let Some(r) = max_radius {
        if r.is_nan() || r < 0.0 {
            return Err(Error::InvalidParameter(alloc::format!(
                "max_radius must be nonnegative, got {r}"
            )));
        }
    }
    let bound = ((n as f64) * max_fraction).floor() as usize;
    let radius_ok = |r: f64| max_radius.map_or(true, |m| r <= m);

    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut windows = Vec::new();
    let mut orders = Vec::with_capacity(n);
    let mut groups = Vec::new();

    for center in 0..n {
        let row = dist.row(center);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));

        let first = windows.len();
        let mut longest = 0;
        let mut k = 0;
        while k < n {
            let radius = row[order[k]];
            let mut end = k + 1;
            while end < n && row[order[end]] == radius {
                end += 1;
            }
            if end > bound || !radius_ok(radius) {
                break;
            }
            let mut members = order[..end].to_vec();
            members.sort_unstable();
            if seen.insert(members.clone()) {
                windows.push(ScanWindow {
                    center,
                    radius,
                    members,
                });
                longest = end;
            }
            k = end;
        }
        order.truncate(longest);
        if windows.len() > first {
            groups.push((center, first, windows.len()));
        }
        orders.push(order);
    }

    Ok(WindowSet {
        n_sites: n,
        windows,
        orders,
        groups,
    })
}

/// Smallest window of exactly `size` sites containing `seed`, preferring
/// windows centred on `seed`.
pub fn window_around(windows: &WindowSet, seed: usize, size: usize) -> Result<&ScanWindow> {
    let candidates = windows
        .windows()
        .iter()
        .filter(|w| w.size() == size && w.contains(seed));
    candidates
        .min_by(|a, b| {
            (a.center != seed)
                .cmp(&(b.center != seed))
                .then(a.radius.total_cmp(&b.radius))
                .then(a.center.cmp(&b.center))
        })
        .ok_or(Error::NoMatchingWindow { seed, size })
}
