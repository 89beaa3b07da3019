use std::sync::OnceLock;
use std::time::{Duration, Instant};

use gscm::coeff::ChannelMatrix;
use gscm::experiment::{run_sweep, seed_means, ExperimentConfig, MeanPoint, SweepRecord};
use gscm::metrics::{
    average_angular_distance, chordal_distance, cmd_similarity, covariance, Covariance,
};
use gscm::rng;
use gscm::smallscale::{Path, PathSet};
use gscm::sosfield::{AcfSpec, SosField, DEFAULT_SINUSOIDS};
use gscm::validation::{
    pearson, sos_selftest, spearman, uniform_positions, SELFTEST_ACF_PAIRS,
    SELFTEST_DECORR_DISTANCES, SELFTEST_MARGINAL_SAMPLES,
};
use gscm::{SphericalAngle, Vec3};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::report;

const ACF_RMSE_LIMIT: f64 = 0.05;
const KS_LIMIT: f64 = 0.02;
const SOS_RUNTIME_LIMIT: Duration = Duration::from_secs(60);
const RESEED_RHO_LIMIT: f64 = 0.05;
const IDENTITY_TOL: f64 = 1e-9;
const MIN_SEEDS: usize = 20;
const SPEARMAN_MIN: f64 = 0.9;
const FLAT_REL_LIMIT: f64 = 0.25;
const SWEEP_RUNTIME_LIMIT: Duration = Duration::from_secs(600);
const CHORDAL_RATIO_LIMIT: f64 = 0.01;
const CMD_AT_1M_MIN: f64 = 0.90;
const CMD_UNCORRELATED_RANGE: (f64, f64) = (0.4, 0.85);
const CMD_GAP_MIN: f64 = 0.1;
const ORACLE_REL_TOL: f64 = 1e-12;

struct Sweep {
    config: ExperimentConfig,
    records: Vec<SweepRecord>,
    means: Vec<MeanPoint>,
    elapsed: Duration,
}

fn sweep() -> &'static Sweep {
    static SWEEP: OnceLock<Sweep> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let config = ExperimentConfig::default();
        let started = Instant::now();
        let records = run_sweep(&config).expect("default sweep runs");
        let elapsed = started.elapsed();
        let means = seed_means(&records);
        Sweep {
            config,
            records,
            means,
            elapsed,
        }
    })
}

fn curve(d_lambda: f64) -> Vec<MeanPoint> {
    sweep()
        .means
        .iter()
        .filter(|m| m.d_lambda == d_lambda)
        .copied()
        .collect()
}

fn at(curve: &[MeanPoint], separation: f64) -> MeanPoint {
    *curve
        .iter()
        .find(|m| (m.separation - separation).abs() < 1e-6)
        .unwrap_or_else(|| panic!("no sample at separation {separation}"))
}

#[test]
fn criterion_1_sos_acf_fidelity() {
    let started = Instant::now();
    let checks = sos_selftest(500, 20240601).unwrap();
    let elapsed = started.elapsed();
    let mut passed = SELFTEST_ACF_PAIRS >= 100_000
        && SELFTEST_MARGINAL_SAMPLES >= 10_000
        && SELFTEST_DECORR_DISTANCES == [5.0, 15.0, 50.0]
        && elapsed <= SOS_RUNTIME_LIMIT;
    let mut detail = Vec::new();
    for c in &checks {
        let limit = if c.name.starts_with("ACF") {
            ACF_RMSE_LIMIT
        } else {
            KS_LIMIT
        };
        passed &= c.value <= limit;
        detail.push(format!("{} = {:.4}", c.name, c.value));
    }
    detail.push(format!("runtime {:.1} s", elapsed.as_secs_f64()));
    let detail = detail.join("; ");
    report("1", "SOS ACF fidelity", passed, &detail);
    assert!(passed, "{detail}");
}

#[test]
fn criterion_2_phase_reuse_independence() {
    let mut passed = true;
    let mut detail = Vec::new();
    for (i, d_lambda) in [5.0, 15.0, 50.0].into_iter().enumerate() {
        let f = SosField::generate(
            AcfSpec::standard(d_lambda).unwrap(),
            DEFAULT_SINUSOIDS,
            77 + i as u64,
        )
        .unwrap();
        let g = f.reseed_phases(rng::derive(77, i as u64));
        let bits = |x: &SosField| -> Vec<u64> {
            x.frequencies()
                .iter()
                .flatten()
                .chain(x.amplitudes())
                .map(|v| v.to_bits())
                .collect()
        };
        let identical = bits(&f) == bits(&g);
        let pts = uniform_positions(10_000, 200.0 * d_lambda, 900 + i as u64);
        let a: Vec<f64> = pts.iter().map(|&p| f.evaluate(p)).collect();
        let b: Vec<f64> = pts.iter().map(|&p| g.evaluate(p)).collect();
        let rho = pearson(&a, &b);
        passed &= identical && rho.abs() <= RESEED_RHO_LIMIT;
        detail.push(format!(
            "d_lambda {d_lambda}: rho = {rho:.4}, spectrum identical = {identical}"
        ));
    }
    let detail = detail.join("; ");
    report("2", "phase-reuse independence", passed, &detail);
    assert!(passed, "{detail}");
}

#[test]
fn criterion_3_colocation_identity() {
    let s = sweep();
    let colocated: Vec<&SweepRecord> = s.records.iter().filter(|r| r.separation == 0.0).collect();
    let expected = s.config.decorr_distances.len() * s.config.seeds.len();
    let worst = colocated
        .iter()
        .map(|r| {
            r.delta_aaoa
                .abs()
                .max(r.delta_eaoa.abs())
                .max(r.chordal.abs())
                .max((r.cmd - 1.0).abs())
        })
        .fold(0.0, f64::max);
    let covers_all = s
        .config
        .decorr_distances
        .iter()
        .all(|d| colocated.iter().filter(|r| r.d_lambda == *d).count() == s.config.seeds.len());
    let passed = colocated.len() == expected && covers_all && worst <= IDENTITY_TOL;
    let detail = format!(
        "{} co-located records (expected {expected}), worst deviation {worst:e}",
        colocated.len()
    );
    report("3", "co-location identity", passed, &detail);
    assert!(passed, "{detail}");
}

#[test]
fn criterion_4_angular_distance_trend() {
    let s = sweep();
    let mut passed = s.config.seeds.len() >= MIN_SEEDS && s.elapsed <= SWEEP_RUNTIME_LIMIT;
    let mut detail = vec![format!(
        "{} seeds, sweep runtime {:.1} s",
        s.config.seeds.len(),
        s.elapsed.as_secs_f64()
    )];
    for d_lambda in [5.0, 15.0, 50.0] {
        let c = curve(d_lambda);
        let sep: Vec<f64> = c.iter().map(|m| m.separation).collect();
        let az: Vec<f64> = c.iter().map(|m| m.delta_aaoa).collect();
        let rho = spearman(&sep, &az);
        passed &= rho >= SPEARMAN_MIN;
        detail.push(format!("Spearman(d_lambda {d_lambda}) = {rho:.3}"));
    }
    let at10: Vec<f64> = [5.0, 15.0, 50.0]
        .iter()
        .map(|&d| at(&curve(d), 10.0).delta_aaoa)
        .collect();
    let ordered = at10[2] < at10[1] && at10[1] < at10[0];
    passed &= ordered;
    detail.push(format!(
        "at 10 m: 5 m -> {:.3}, 15 m -> {:.3}, 50 m -> {:.3} rad",
        at10[0], at10[1], at10[2]
    ));

    let flat = curve(0.0);
    let (near, far) = (at(&flat, 0.1).delta_aaoa, at(&flat, 20.0).delta_aaoa);
    let rel = (near - far).abs() / far;
    passed &= rel < FLAT_REL_LIMIT;
    detail.push(format!(
        "d_lambda 0: 0.1 m vs 20 m differ by {:.1}%",
        100.0 * rel
    ));

    for &d_lambda in &s.config.decorr_distances {
        let c: Vec<MeanPoint> = curve(d_lambda)
            .into_iter()
            .filter(|m| m.separation > 0.0)
            .collect();
        let az = c.iter().map(|m| m.delta_aaoa).sum::<f64>() / c.len() as f64;
        let el = c.iter().map(|m| m.delta_eaoa).sum::<f64>() / c.len() as f64;
        passed &= el < az;
        detail.push(format!(
            "d_lambda {d_lambda}: mean elevation {el:.3} < azimuth {az:.3}"
        ));
    }
    let detail = detail.join("; ");
    report("4", "angular distance trend", passed, &detail);
    assert!(passed, "{detail}");
}

#[test]
fn criterion_5_chordal_distance_trend() {
    let mut passed = sweep().config.seeds.len() >= MIN_SEEDS;
    let mut detail = Vec::new();
    for d_lambda in [15.0, 50.0] {
        let c = curve(d_lambda);
        let ratio = at(&c, 0.1).chordal / at(&c, 20.0).chordal;
        passed &= ratio < CHORDAL_RATIO_LIMIT;
        detail.push(format!(
            "d_lambda {d_lambda}: d_C(0.1 m) / d_C(20 m) = {ratio:.4}"
        ));
    }
    let detail = detail.join("; ");
    report("5", "chordal distance trend", passed, &detail);
    assert!(passed, "{detail}");
}

#[test]
fn criterion_6_cmd_anchors() {
    let mut passed = sweep().config.seeds.len() >= MIN_SEEDS;
    let mut detail = Vec::new();
    for d_lambda in [15.0, 50.0] {
        let cmd = at(&curve(d_lambda), 1.0).cmd;
        passed &= cmd >= CMD_AT_1M_MIN;
        detail.push(format!("d_lambda {d_lambda}: CMD(1 m) = {cmd:.3}"));
    }
    let flat = curve(0.0);
    let near = at(&flat, 0.1).cmd;
    let far = at(&flat, 20.0).cmd;
    let in_range = (CMD_UNCORRELATED_RANGE.0..=CMD_UNCORRELATED_RANGE.1).contains(&near);
    passed &= in_range && near > far;
    detail.push(format!(
        "d_lambda 0: CMD(0.1 m) = {near:.3}, CMD(20 m) = {far:.3}"
    ));
    let gap = at(&curve(50.0), 0.1).cmd - near;
    passed &= gap >= CMD_GAP_MIN;
    detail.push(format!("gap to d_lambda 50 at 0.1 m = {gap:.3}"));
    let detail = detail.join("; ");
    report("6", "CMD anchors", passed, &detail);
    assert!(passed, "{detail}");
}

fn random_channel(r: &mut impl Rng, n_r: usize, n_t: usize, n_f: usize) -> ChannelMatrix {
    let slices = (0..n_f)
        .map(|_| {
            DMatrix::from_fn(n_r, n_t, |_, _| {
                Complex64::new(r.random::<f64>() * 2.0 - 1.0, r.random::<f64>() * 2.0 - 1.0)
            })
        })
        .collect();
    ChannelMatrix {
        slices,
        freqs: vec![0.0; n_f],
    }
}

type M = Vec<Vec<Complex64>>;

fn brute_covariance(h: &ChannelMatrix) -> M {
    let n_t = h.slices[0].ncols();
    let mut r = vec![vec![Complex64::new(0.0, 0.0); n_t]; n_t];
    for s in &h.slices {
        for (i, row) in r.iter_mut().enumerate() {
            for (j, z) in row.iter_mut().enumerate() {
                for k in 0..s.nrows() {
                    *z += s[(k, i)].conj() * s[(k, j)];
                }
            }
        }
    }
    let n = h.slices.len() as f64;
    r.iter()
        .map(|row| row.iter().map(|z| z / n).collect())
        .collect()
}

fn brute_product_adjoint(a: &M) -> M {
    let n = a.len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out[i][j] += a[i][k] * a[j][k].conj();
            }
        }
    }
    out
}

fn brute_chordal(a: &M, b: &M) -> f64 {
    let (pa, pb) = (brute_product_adjoint(a), brute_product_adjoint(b));
    let mut sum = 0.0;
    for i in 0..a.len() {
        for j in 0..a.len() {
            sum += (pa[i][j] - pb[i][j]).norm_sqr();
        }
    }
    sum
}

fn brute_frobenius(a: &M) -> f64 {
    a.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn brute_cmd(a: &M, b: &M) -> f64 {
    // Tr(AᴴB) as the sum of the diagonal of the explicit product.
    let n = a.len();
    let mut trace = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            trace += a[k][i].conj() * b[k][i];
        }
    }
    trace.re / (brute_frobenius(a) * brute_frobenius(b))
}

fn diag(v: &[f64]) -> Covariance {
    let n = v.len();
    Covariance(DMatrix::from_fn(n, n, |i, j| {
        Complex64::new(if i == j { v[i] } else { 0.0 }, 0.0)
    }))
}

#[test]
fn criterion_7_metric_oracles() {
    let mut r = rng::seeded(4242);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let h1 = random_channel(&mut r, 3, 4, 4);
        let h2 = random_channel(&mut r, 3, 4, 4);
        let (c1, c2) = (covariance(&h1), covariance(&h2));
        let (b1, b2) = (brute_covariance(&h1), brute_covariance(&h2));
        let scale = brute_frobenius(&b1);
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((c1.0[(i, j)] - b1[i][j]).norm() / scale);
            }
        }
        let (d, d_ref) = (chordal_distance(&c1, &c2).unwrap(), brute_chordal(&b1, &b2));
        worst = worst.max((d - d_ref).abs() / d_ref);
        let (m, m_ref) = (cmd_similarity(&c1, &c2).unwrap(), brute_cmd(&b1, &b2));
        worst = worst.max((m - m_ref).abs() / m_ref.abs());
    }

    let r2 = diag(&[2.0, 1.0]);
    let flat = |row: Vec<Complex64>, n_f: usize| ChannelMatrix {
        slices: vec![DMatrix::from_row_slice(1, row.len(), &row); n_f],
        freqs: vec![0.0; n_f],
    };
    let unit = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let (half_pi, pi) = (std::f64::consts::FRAC_PI_2, std::f64::consts::PI);
    let az = gscm::metrics::azimuth_distance;
    let el = |a, b| gscm::metrics::elevation_distance(a, b).unwrap();
    let path = |az: f64| Path {
        delay: 0.0,
        power: 0.5,
        aoa: SphericalAngle::new(az, 0.0).unwrap(),
        aod: SphericalAngle::new(0.0, 0.0).unwrap(),
        xpr: 1.0,
        pol_phases: [0.0; 4],
        length: 1.0,
    };
    let set = |azs: [f64; 2]| PathSet {
        paths: azs.map(path).to_vec(),
        user_pos: Vec3::ZERO,
    };
    let (p0, p1) = (set([0.0, 0.0]), set([0.2, 0.4]));
    let avg = |a, b| average_angular_distance(a, b).unwrap();
    // Expected values are the correctly rounded results of the stated
    // arithmetic, e.g. 0.1 + 0.2 for the 0.3 example.
    let trivial = [
        az(0.5, 0.5) == 0.0,
        az(3.0, -3.0) == 2.0 * pi - 6.0,
        az(half_pi, -half_pi) == pi,
        el(0.3, 0.3) == 0.0,
        el(half_pi, -half_pi) == pi,
        el(0.1, -0.2) == 0.1 + 0.2,
        (avg(&p1, &p1).azimuth, avg(&p1, &p1).elevation) == (0.0, 0.0),
        avg(&p0, &p1).azimuth == (0.2 + 0.4) / 2.0,
        avg(&p0, &p1) == avg(&p1, &p0),
        covariance(&flat(vec![unit], 100)).0 == DMatrix::from_element(1, 1, unit),
        covariance(&flat(vec![zero; 4], 100)).0 == DMatrix::from_element(4, 4, zero),
        chordal_distance(&r2, &r2).unwrap() == 0.0,
        chordal_distance(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0])).unwrap() == 2.0,
        cmd_similarity(&r2, &r2).unwrap() == 1.0,
        cmd_similarity(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0])).unwrap() == 0.0,
        cmd_similarity(&r2, &Covariance(r2.0.map(|z| z * 7.0))).unwrap() == 1.0,
        cmd_similarity(&r2, &diag(&[0.0, 0.0])).is_err(),
        chordal_distance(&r2, &diag(&[1.0])).is_err(),
    ];
    let trivial_ok = trivial.iter().filter(|&&b| b).count();
    let passed = worst <= ORACLE_REL_TOL && trivial_ok == trivial.len();
    let detail = format!(
        "1000 random cases, worst relative error {worst:.2e}; {trivial_ok}/{} exact examples",
        trivial.len()
    );
    report("7", "metric oracles", passed, &detail);
    assert!(passed, "{detail}");
}

#[test]
fn criterion_8_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "seeds = 1, 2\ntrack_samples = 51\n").unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_gscm"))
            .arg("run")
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap()
            .status;
        assert!(status.success());
        std::fs::read(out).unwrap()
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    let rows = a.iter().filter(|&&c| c == b'\n').count();
    let passed = a == b && rows == 1 + 51 * 4 * 2;
    let detail = format!("{} bytes, {rows} lines, identical = {}", a.len(), a == b);
    report("8", "determinism", passed, &detail);
    assert!(passed, "{detail}");
}
