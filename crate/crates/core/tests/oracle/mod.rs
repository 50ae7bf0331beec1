//! Naive reference implementations written straight from the textbook
//! formulas. Nothing here calls into the optimized code paths except the
//! sphericizing matrix, which is checked separately by its residual.
#![allow(dead_code)]

use mfscan_core::FunctionalDataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn trapezoid_weights(points: &[f64]) -> Vec<f64> {
    let t = points.len();
    let mut w = vec![0.0; t];
    for k in 0..t - 1 {
        let h = points[k + 1] - points[k];
        w[k] += h / 2.0;
        w[k + 1] += h / 2.0;
    }
    w
}

fn x(data: &FunctionalDataset, i: usize, t: usize) -> Vec<f64> {
    (0..data.n_vars()).map(|v| data.value(i, t, v)).collect()
}

fn group_mean(data: &FunctionalDataset, group: &[usize], t: usize) -> Vec<f64> {
    let p = data.n_vars();
    let mut m = vec![0.0; p];
    for &i in group {
        for v in 0..p {
            m[v] += data.value(i, t, v);
        }
    }
    m.iter().map(|s| s / group.len() as f64).collect()
}

pub fn complement(n: usize, members: &[usize]) -> Vec<usize> {
    (0..n).filter(|i| !members.contains(i)).collect()
}

/// Gauss–Jordan inverse with partial pivoting.
pub fn invert(a: &[f64], p: usize) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut inv = vec![0.0; p * p];
    for i in 0..p {
        inv[i * p + i] = 1.0;
    }
    for c in 0..p {
        let piv = (c..p).max_by(|&r, &s| m[r * p + c].abs().total_cmp(&m[s * p + c].abs()))?;
        if m[piv * p + c].abs() < 1e-300 {
            return None;
        }
        for k in 0..p {
            m.swap(c * p + k, piv * p + k);
            inv.swap(c * p + k, piv * p + k);
        }
        let d = m[c * p + c];
        for k in 0..p {
            m[c * p + k] /= d;
            inv[c * p + k] /= d;
        }
        for r in 0..p {
            if r != c {
                let f = m[r * p + c];
                for k in 0..p {
                    m[r * p + k] -= f * m[c * p + k];
                    inv[r * p + k] -= f * inv[c * p + k];
                }
            }
        }
    }
    Some(inv)
}

fn outer_add(acc: &mut [f64], u: &[f64], v: &[f64], scale: f64) {
    let p = u.len();
    for a in 0..p {
        for b in 0..p {
            acc[a * p + b] += scale * u[a] * v[b];
        }
    }
}

/// `Trace(H_w E_w⁻¹)` from the between/within scatter definitions.
pub fn lawley_hotelling(data: &FunctionalDataset, members: &[usize]) -> f64 {
    let (n, p) = (data.n_sites(), data.n_vars());
    let out = complement(n, members);
    let all: Vec<usize> = (0..n).collect();
    let w = trapezoid_weights(data.grid().points());
    let mut h = vec![0.0; p * p];
    let mut e = vec![0.0; p * p];
    for t in 0..data.n_times() {
        let mw = group_mean(data, members, t);
        let mc = group_mean(data, &out, t);
        let mg = group_mean(data, &all, t);
        let dw: Vec<f64> = mw.iter().zip(&mg).map(|(a, b)| a - b).collect();
        let dc: Vec<f64> = mc.iter().zip(&mg).map(|(a, b)| a - b).collect();
        outer_add(&mut h, &dw, &dw, w[t] * members.len() as f64);
        outer_add(&mut h, &dc, &dc, w[t] * out.len() as f64);
        for &j in members {
            let d: Vec<f64> = x(data, j, t).iter().zip(&mw).map(|(a, b)| a - b).collect();
            outer_add(&mut e, &d, &d, w[t]);
        }
        for &j in &out {
            let d: Vec<f64> = x(data, j, t).iter().zip(&mc).map(|(a, b)| a - b).collect();
            outer_add(&mut e, &d, &d, w[t]);
        }
    }
    let e_inv = invert(&e, p).expect("E_w invertible");
    let mut tr = 0.0;
    for a in 0..p {
        for b in 0..p {
            tr += h[a * p + b] * e_inv[b * p + a];
        }
    }
    tr
}

/// Pointwise two-sample Hotelling T² maximised over the grid.
pub fn hotelling_sup(data: &FunctionalDataset, members: &[usize]) -> f64 {
    let (n, p) = (data.n_sites(), data.n_vars());
    let out = complement(n, members);
    let mut best = f64::NEG_INFINITY;
    for t in 0..data.n_times() {
        let mw = group_mean(data, members, t);
        let mc = group_mean(data, &out, t);
        let mut s = vec![0.0; p * p];
        for (group, m) in [(members, &mw), (&out[..], &mc)] {
            for &i in group {
                let d: Vec<f64> = x(data, i, t).iter().zip(m).map(|(a, b)| a - b).collect();
                outer_add(&mut s, &d, &d, 1.0 / (n as f64 - 2.0));
            }
        }
        let s_inv = invert(&s, p).expect("pooled covariance invertible");
        let diff: Vec<f64> = mw.iter().zip(&mc).map(|(a, b)| a - b).collect();
        let mut q = 0.0;
        for a in 0..p {
            for b in 0..p {
                q += diff[a] * s_inv[a * p + b] * diff[b];
            }
        }
        let value = members.len() as f64 * out.len() as f64 / n as f64 * q;
        best = best.max(value);
    }
    best
}

fn spatial_sign(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm == 0.0 {
        vec![0.0; v.len()]
    } else {
        v.iter().map(|a| a / norm).collect()
    }
}

/// `R_i(t) = (1/n) Σ_j sgn(A (X_i − X_j))`, literally.
pub fn ranks_at(data: &FunctionalDataset, t: usize, a: &[f64]) -> Vec<Vec<f64>> {
    let (n, p) = (data.n_sites(), data.n_vars());
    (0..n)
        .map(|i| {
            let mut r = vec![0.0; p];
            for j in 0..n {
                let d: Vec<f64> = x(data, i, t)
                    .iter()
                    .zip(x(data, j, t))
                    .map(|(u, v)| u - v)
                    .collect();
                let ad: Vec<f64> = (0..p)
                    .map(|row| (0..p).map(|c| a[row * p + c] * d[c]).sum())
                    .collect();
                for (rv, s) in r.iter_mut().zip(spatial_sign(&ad)) {
                    *rv += s / n as f64;
                }
            }
            r
        })
        .collect()
}

/// `max_t W(t)` given the transform at each grid point.
pub fn wilcoxon_sup(data: &FunctionalDataset, transforms: &[Vec<f64>], members: &[usize]) -> f64 {
    let (n, p) = (data.n_sites(), data.n_vars());
    let out = complement(n, members);
    let mut best = f64::NEG_INFINITY;
    for t in 0..data.n_times() {
        let r = ranks_at(data, t, &transforms[t]);
        let norm: f64 = r
            .iter()
            .map(|ri| ri.iter().map(|v| v * v).sum::<f64>())
            .sum();
        let mean_sq = |g: &[usize]| {
            let mut m = vec![0.0; p];
            for &i in g {
                for v in 0..p {
                    m[v] += r[i][v] / g.len() as f64;
                }
            }
            m.iter().map(|v| v * v).sum::<f64>()
        };
        let value = (p * n) as f64 / norm
            * (members.len() as f64 * mean_sq(members) + out.len() as f64 * mean_sq(&out));
        best = best.max(value);
    }
    best
}

/// `‖Σ_{i∈w} Σ_{j∉w} sgn(X_j − X_i)‖ / √(|w||w^c|)` with the explicit double
/// loop.
pub fn npfss(data: &FunctionalDataset, members: &[usize]) -> f64 {
    let (n, p, tl) = (data.n_sites(), data.n_vars(), data.n_times());
    let out = complement(n, members);
    let w = trapezoid_weights(data.grid().points());
    let norm = |f: &[f64]| {
        (0..tl)
            .map(|t| w[t] * (0..p).map(|v| f[t * p + v].powi(2)).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    };
    let mut acc = vec![0.0; tl * p];
    for &i in members {
        for &j in &out {
            let d: Vec<f64> = (0..tl)
                .flat_map(|t| (0..p).map(move |v| (t, v)))
                .map(|(t, v)| data.value(j, t, v) - data.value(i, t, v))
                .collect();
            let nd = norm(&d);
            if nd > 0.0 {
                for (a, b) in acc.iter_mut().zip(&d) {
                    *a += b / nd;
                }
            }
        }
    }
    norm(&acc) / ((members.len() * out.len()) as f64).sqrt()
}

/// Disc membership recomputed from scratch.
pub fn disc(dist: &[Vec<f64>], center: usize, radius: f64) -> Vec<usize> {
    (0..dist.len())
        .filter(|&k| dist[center][k] <= radius)
        .collect()
}

/// Every distinct member set of `w(i, j)` passing the size and radius bounds.
pub fn brute_force_windows(
    dist: &[Vec<f64>],
    max_radius: Option<f64>,
    max_fraction: f64,
) -> Vec<Vec<usize>> {
    let n = dist.len();
    let bound = (n as f64 * max_fraction).floor() as usize;
    let mut sets: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let r = dist[i][j];
            if max_radius.is_some_and(|m| r > m) {
                continue;
            }
            let m = disc(dist, i, r);
            if m.len() <= bound && !sets.contains(&m) {
                sets.push(m);
            }
        }
    }
    sets.sort();
    sets
}

/// Gaussian dataset; the first quarter of the sites is shifted so window
/// values spread out.
pub fn random_dataset(n: usize, p: usize, t: usize, seed: u64) -> FunctionalDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = mfscan_core::TimeGrid::uniform(0.0, 1.0, t).unwrap();
    let values: Vec<f64> = (0..n * p * t)
        .map(|k| {
            let z: f64 = rng.sample(StandardNormal);
            z + if (k / (p * t)) < n / 4 { 0.7 } else { 0.0 } + 0.3 * (k % 3) as f64
        })
        .collect();
    FunctionalDataset::from_values(n, p, grid, values).unwrap()
}

pub fn random_planar_sites(n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| [rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)])
        .collect()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

pub fn planar_windows(n: usize, seed: u64, max_fraction: f64) -> mfscan_core::WindowSet {
    use mfscan_core::geometry::{build_distance_matrix, enumerate_windows};
    let ids = (0..n).map(|i| format!("s{i}")).collect();
    let sites = mfscan_core::SiteMap::new(
        ids,
        random_planar_sites(n, seed),
        mfscan_core::CoordinateMode::Planar,
    )
    .unwrap();
    enumerate_windows(&build_distance_matrix(&sites), None, max_fraction).unwrap()
}

/// Largest relative gap between the engine and the naive formulas over every
/// window of one random instance, per method.
pub fn oracle_gaps(seed: u64) -> [f64; 4] {
    use mfscan_core::stats::ScanEngine;
    use mfscan_core::Method;
    let n = 10 + (seed % 11) as usize;
    let p = 2 + (seed % 2) as usize;
    let t = 5 + (seed % 7) as usize;
    let data = random_dataset(n, p, t, seed);
    let windows = planar_windows(n, seed ^ 0x5eed, 0.5);
    let engine = ScanEngine::new(&data, &windows, &Method::ALL).unwrap();
    let field = engine.rank_field().unwrap();
    let transforms: Vec<Vec<f64>> = (0..t).map(|k| field.transform(k).matrix.clone()).collect();
    let mut gaps = [0.0f64; 4];
    for method in Method::ALL {
        let values = engine.statistics(method, None).unwrap();
        for v in &values {
            let members = &windows.get(v.window).members;
            let expected = match method {
                Method::Pmfss => lawley_hotelling(&data, members),
                Method::Mdffss => hotelling_sup(&data, members),
                Method::Mrbfss => wilcoxon_sup(&data, &transforms, members),
                Method::Npfss => npfss(&data, members),
            };
            let gap = (v.value - expected).abs() / expected.abs().max(1e-300);
            let slot = method as usize;
            gaps[slot] = if gap.is_nan() {
                f64::INFINITY
            } else {
                gaps[slot].max(gap)
            };
        }
    }
    gaps
}

pub const ORACLE_TOLERANCE: [f64; 4] = [1e-10, 1e-10, 1e-6, 1e-10];

/// Checks the rank field of one random dataset against the literal rank
/// formula, the sphericity condition and the centring of ranks.
pub fn check_ranks(seed: u64) -> Result<(), String> {
    use mfscan_core::stats::{compute_pointwise_ranks, TYLER_MAX_ITERATIONS, TYLER_TOLERANCE};
    let n = 15 + (seed % 20) as usize;
    let p = 2 + (seed % 2) as usize;
    let data = random_dataset(n, p, 3, 1000 + seed);
    let field = compute_pointwise_ranks(&data).map_err(|e| e.to_string())?;
    for t in 0..3 {
        let tr = field.transform(t);
        if tr.iterations > TYLER_MAX_ITERATIONS {
            return Err(format!("t={t}: {} iterations", tr.iterations));
        }
        let naive = ranks_at(&data, t, &tr.matrix);
        let mut outer = vec![0.0; p * p];
        let mut scale = 0.0;
        let mut total = vec![0.0; p];
        for (i, r) in naive.iter().enumerate() {
            let got = field.rank(i, t);
            for v in 0..p {
                if (got[v] - r[v]).abs() > 1e-12 {
                    return Err(format!("t={t} site {i}: rank {} vs {}", got[v], r[v]));
                }
                total[v] += r[v];
                scale += r[v] * r[v];
                for u in 0..p {
                    outer[v * p + u] += r[v] * r[u];
                }
            }
            if r.iter().map(|x| x * x).sum::<f64>() > 1.0 + 1e-12 {
                return Err(format!("t={t} site {i}: rank outside the unit ball"));
            }
        }
        if total.iter().any(|s| s.abs() > 1e-12) {
            return Err(format!("t={t}: ranks sum to {total:?}"));
        }
        let mut resid = 0.0;
        for a in 0..p {
            for b in 0..p {
                let d = p as f64 * outer[a * p + b] / scale - if a == b { 1.0 } else { 0.0 };
                resid += d * d;
            }
        }
        if resid.sqrt() > TYLER_TOLERANCE {
            return Err(format!("t={t}: sphericity residual {}", resid.sqrt()));
        }
    }
    Ok(())
}
