use std::f64::consts::FRAC_PI_2;

use gscm::experiment::{run_sweep, ExperimentConfig};
use gscm::metrics::{azimuth_distance, elevation_distance};
use gscm::scenario::{build_lsp_fields, lsps_at, ScenarioTable};
use gscm::smallscale::{build_ssf_bank, generate_paths};
use gscm::{SphericalAngle, Track, Vec3};
use proptest::prelude::*;

const MAX_STEP_JUMP_DEG: f64 = 5.0;

fn clamped(a: &SphericalAngle) -> bool {
    a.elevation().abs() >= FRAC_PI_2
}

/// Largest per-cluster angle change between consecutive track samples.
fn max_step_jump(d_lambda: f64, seed: u64) -> f64 {
    let table = ScenarioTable::uma_nlos().with_clusters(5).unwrap();
    let lsp_fields = build_lsp_fields(&table, 500, seed).unwrap();
    let bank = build_ssf_bank(5, d_lambda, 500, seed ^ 0x5eed).unwrap();
    let tx = Vec3::new(10.0, -100.0, 25.0);
    let track = Track::new(
        Vec3::new(0.0, 0.0, 1.5),
        Vec3::new(1.0, 0.0, 0.0),
        d_lambda / 50.0,
        51,
    )
    .unwrap();
    let sets: Vec<_> = track
        .positions()
        .into_iter()
        .map(|p| generate_paths(&bank, &lsps_at(&lsp_fields, &table, p), &table, tx, p).unwrap())
        .collect();
    let mut worst: f64 = 0.0;
    for w in sets.windows(2) {
        for (a, b) in w[0].paths.iter().zip(&w[1].paths) {
            for (x, y) in [(a.aoa, b.aoa), (a.aod, b.aod)] {
                worst = worst.max(azimuth_distance(x.azimuth(), y.azimuth()));
                if !clamped(&x) && !clamped(&y) {
                    worst = worst.max(elevation_distance(x.elevation(), y.elevation()).unwrap());
                }
            }
        }
    }
    worst.to_degrees()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, max_shrink_iters: 16, ..ProptestConfig::default() })]

    #[test]
    fn cluster_angles_move_continuously_along_track(
        seed in any::<u64>(),
        d_lambda in prop::sample::select(vec![5.0, 15.0, 50.0]),
    ) {
        let jump = max_step_jump(d_lambda, seed);
        prop_assert!(jump <= MAX_STEP_JUMP_DEG, "per-step jump {jump:.2} deg at d_lambda {d_lambda}");
    }
}

#[test]
fn decorrelation_cells_are_independent_of_each_other() {
    let base = ExperimentConfig {
        seeds: vec![4, 9],
        track: Track::new(
            Vec3::new(20.0, 0.0, 1.5),
            Vec3::new(-1.0, 0.0, 0.0),
            2.0,
            11,
        )
        .unwrap(),
        ..ExperimentConfig::default()
    };
    let all = run_sweep(&base).unwrap();
    let only = run_sweep(&ExperimentConfig {
        decorr_distances: vec![15.0],
        ..base.clone()
    })
    .unwrap();
    let subset: Vec<_> = all.into_iter().filter(|r| r.d_lambda == 15.0).collect();
    assert_eq!(subset, only);
}

#[test]
fn seed_changes_values_not_layout() {
    let small = |seeds: Vec<u64>| ExperimentConfig {
        seeds,
        decorr_distances: vec![0.0, 15.0],
        track: Track::new(Vec3::new(20.0, 0.0, 1.5), Vec3::new(-1.0, 0.0, 0.0), 4.0, 6).unwrap(),
        ..ExperimentConfig::default()
    };
    let a = run_sweep(&small(vec![1, 2, 3])).unwrap();
    let b = run_sweep(&small(vec![11, 12, 13])).unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!((x.d_lambda, x.separation), (y.d_lambda, y.separation));
    }
    assert!(a.iter().zip(&b).any(|(x, y)| x.cmd != y.cmd));
}
