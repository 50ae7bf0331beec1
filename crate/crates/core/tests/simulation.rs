mod oracle;

use mfscan_core::rng;
use mfscan_core::simulation::*;
use mfscan_core::TimeGrid;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn moments(z: &[[f64; 2]]) -> ([f64; 2], [f64; 2], f64) {
    let n = z.len() as f64;
    let mean = [0, 1].map(|c| z.iter().map(|v| v[c]).sum::<f64>() / n);
    let var = [0, 1].map(|c| z.iter().map(|v| (v[c] - mean[c]).powi(2)).sum::<f64>() / n);
    let cov = z
        .iter()
        .map(|v| (v[0] - mean[0]) * (v[1] - mean[1]))
        .sum::<f64>()
        / n;
    (mean, var, cov / (var[0] * var[1]).sqrt())
}

#[test]
fn noise_coefficients_have_unit_variance_and_target_correlation() {
    for dist in NoiseDistribution::ALL {
        for rho in [0.2, 0.5, 0.8] {
            let mut r = ChaCha8Rng::seed_from_u64(7);
            let z = sample_noise_coefficients(dist, rho, 100_000, 1, &mut r).unwrap();
            let (mean, var, corr) = moments(&z);
            // Student-4 has no fourth moment, so its sample variance converges slowly.
            let var_tol = if dist == NoiseDistribution::Student4 {
                0.08
            } else {
                0.03
            };
            for c in 0..2 {
                assert!(mean[c].abs() < 0.02, "{dist:?} mean {}", mean[c]);
                assert!(
                    (var[c] - 1.0).abs() < var_tol,
                    "{dist:?} rho {rho} var {}",
                    var[c]
                );
            }
            assert!((corr - rho).abs() < 0.03, "{dist:?} rho {rho} corr {corr}");
        }
    }
}

#[test]
fn student_noise_shares_one_scale_across_terms() {
    // With a single chi-square draw per site, |Z_k| are positively dependent
    // across k, unlike the normal case.
    let mut r = ChaCha8Rng::seed_from_u64(9);
    let z = sample_noise_coefficients(NoiseDistribution::Student4, 0.0, 20_000, 2, &mut r).unwrap();
    let a: Vec<f64> = z.chunks(2).map(|c| c[0][0].abs()).collect();
    let b: Vec<f64> = z.chunks(2).map(|c| c[1][0].abs()).collect();
    let rho = spearman(&a, &b).unwrap();
    assert!(rho > 0.05, "spearman {rho}");
}

#[test]
fn pointwise_noise_variance_closed_form() {
    // Frozen from summing the geometric series by hand.
    let frozen = [(0.0, 0.325), (0.25, 0.421_153_846_153_846_2), (0.5, 0.325)];
    for (t, v) in frozen {
        assert!(
            (noise_variance(t, DEFAULT_EXPANSION_TERMS) - v).abs() < 1e-12,
            "t={t}"
        );
    }
    let grid = TimeGrid::uniform(0.0, 1.0, DEFAULT_GRID_POINTS).unwrap();
    let basis = NoiseBasis::new(&grid, DEFAULT_EXPANSION_TERMS);
    let model = DataModel {
        distribution: NoiseDistribution::Normal,
        rho: 0.5,
        shift: ShiftType::Delta1,
        alpha: 0.0,
    };
    let n = 20_000;
    let data = generate_dataset(
        &model,
        &grid,
        &basis,
        &vec![false; n],
        &mut ChaCha8Rng::seed_from_u64(3),
    )
    .unwrap();
    for (t, v) in frozen {
        let k = (t * 100.0f64).round() as usize;
        let mu = mean_curve(t);
        for c in 0..2 {
            let e: Vec<f64> = (0..n).map(|i| data.value(i, k, c) - mu[c]).collect();
            let m = e.iter().sum::<f64>() / n as f64;
            let var = e.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64;
            assert!(
                m.abs() < 0.02 && (var / v - 1.0).abs() < 0.05,
                "t={t} c={c}: mean {m} var {var}"
            );
        }
    }
}

#[test]
fn mean_curve_and_shifts() {
    assert_eq!(mean_curve(0.0), [0.0, 1.0]);
    let m = mean_curve(0.5);
    assert!((m[0] - 1.0).abs() < 1e-15 && (m[1] - 3.1875).abs() < 1e-15);
    assert_eq!(delta_shift(ShiftType::Delta1, 1.5, 1.0), [1.5, 1.5]);
    assert_eq!(delta_shift(ShiftType::Delta2, 4.0, 0.5), [1.0, 1.0]);
    let d3 = delta_shift(ShiftType::Delta3, 3.0, 0.5);
    assert!((d3[0] - 1.0).abs() < 1e-15);
    assert_eq!(basis_function(1, 0.3), 1.0);
    assert!((basis_function(2, 0.25) - std::f64::consts::SQRT_2).abs() < 1e-15);
    assert!((basis_function(3, 0.0) - std::f64::consts::SQRT_2).abs() < 1e-15);
}

#[test]
fn shift_is_applied_only_inside_the_cluster() {
    let grid = TimeGrid::uniform(0.0, 1.0, 11).unwrap();
    let basis = NoiseBasis::new(&grid, 5);
    let mask: Vec<bool> = (0..6).map(|i| i < 2).collect();
    let base = DataModel {
        distribution: NoiseDistribution::Chisq4,
        rho: 0.5,
        shift: ShiftType::Delta2,
        alpha: 0.0,
    };
    let shifted = DataModel { alpha: 4.0, ..base };
    let a = generate_dataset(&base, &grid, &basis, &mask, &mut rng::stream(5, 0)).unwrap();
    let b = generate_dataset(&shifted, &grid, &basis, &mask, &mut rng::stream(5, 0)).unwrap();
    for i in 0..6 {
        for (k, &t) in grid.points().iter().enumerate() {
            let expect = if i < 2 { 4.0 * t * (1.0 - t) } else { 0.0 };
            for c in 0..2 {
                assert!((b.value(i, k, c) - a.value(i, k, c) - expect).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn rank_machinery_on_random_datasets() {
    for seed in 0..8 {
        oracle::check_ranks(seed).unwrap();
    }
}

#[test]
fn replications_are_deterministic() {
    let design = StudyDesign::departements();
    let mut config =
        SimulationConfig::new(NoiseDistribution::Student4, 0.5, ShiftType::Delta1, 1.5, 42);
    config.replications = 2;
    config.permutations = 9;
    config.grid_points = 21;
    config.expansion_terms = 10;
    let a = run_study(
        &design,
        std::slice::from_ref(&config),
        &mfscan_core::Sequential,
    )
    .unwrap();
    let b = run_study(
        &design,
        std::slice::from_ref(&config),
        &mfscan_core::Sequential,
    )
    .unwrap();
    assert_eq!(a, b);
    config.seed = 43;
    let c = run_study(&design, &[config], &mfscan_core::Sequential).unwrap();
    assert_ne!(a.configs[0].replications, c.configs[0].replications);
}
