//! Two-user drift experiment.
//!
//! User 1 stands still while user 2 walks along a straight track towards it.
//! At every track sample both users' channels are generated from the same
//! field banks and compared with the [`metrics`](crate::metrics).

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::antenna::{build_upa, Array, Pattern};
use crate::coeff::{synthesize, FrequencyGrid};
use crate::error::{Error, Result};
use crate::geometry::{Track, Vec3};
use crate::kv::KvFile;
use crate::metrics::{
    average_angular_distance, chordal_distance, cmd_similarity, covariance, Covariance,
};
use crate::rng;
use crate::scenario::{build_lsp_fields, lsps_at, LspFields, ScenarioTable};
use crate::smallscale::{build_ssf_bank, generate_paths, SsfFieldBank};
use crate::sosfield::DEFAULT_SINUSOIDS;
use crate::SPEED_OF_LIGHT;

pub const CSV_HEADER: &str = "d_lambda,separation_m,delta_aaoa_rad,delta_eaoa_rad,chordal,cmd,seed";

const LSP_SEED_TAG: u64 = 0x4c5350;
const SSF_SEED_TAG: u64 = 0x535346;

#[derive(Debug, Clone, PartialEq)]
pub struct BsArraySpec {
    pub rows: usize,
    pub cols: usize,
    /// Element spacing, wavelengths.
    pub spacing: f64,
    pub hpbw_deg: f64,
    pub max_attenuation_db: f64,
    /// Azimuth of the array broadside, degrees.
    pub orientation_deg: f64,
}

impl BsArraySpec {
    pub fn build(&self) -> Result<Array> {
        let pattern = Pattern::Sector {
            hpbw_az_deg: self.hpbw_deg,
            hpbw_el_deg: self.hpbw_deg,
            max_attenuation_db: self.max_attenuation_db,
        };
        Ok(build_upa(self.rows, self.cols, self.spacing, pattern)?
            .oriented(self.orientation_deg.to_radians()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub carrier_frequency_hz: f64,
    pub bandwidth_hz: f64,
    pub subcarriers: usize,
    pub clusters: usize,
    pub sinusoids: usize,
    pub bs_position: Vec3,
    pub bs_array: BsArraySpec,
    pub user1_position: Vec3,
    pub track: Track,
    pub decorr_distances: Vec<f64>,
    pub seeds: Vec<u64>,
    /// `None` selects the bundled UMa NLoS table.
    pub scenario_path: Option<PathBuf>,
    pub output_path: PathBuf,
    pub epsilon_chordal: Option<f64>,
    pub epsilon_cmd: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            carrier_frequency_hz: 2.0e9,
            bandwidth_hz: 18.0e6,
            subcarriers: 100,
            clusters: 5,
            sinusoids: DEFAULT_SINUSOIDS,
            bs_position: Vec3::new(10.0, -100.0, 25.0),
            bs_array: BsArraySpec {
                rows: 8,
                cols: 8,
                spacing: 0.5,
                hpbw_deg: 65.0,
                max_attenuation_db: 30.0,
                orientation_deg: 90.0,
            },
            user1_position: Vec3::new(0.0, 0.0, 1.5),
            track: Track::new(
                Vec3::new(20.0, 0.0, 1.5),
                Vec3::new(-1.0, 0.0, 0.0),
                0.1,
                201,
            )
            .expect("default track is valid"),
            decorr_distances: vec![0.0, 5.0, 15.0, 50.0],
            seeds: (1..=20).collect(),
            scenario_path: None,
            output_path: PathBuf::from("sweep.csv"),
            epsilon_chordal: None,
            epsilon_cmd: 0.95,
        }
    }
}

/// Keys accepted in a config file. Every key is optional.
pub const CONFIG_KEYS: &[&str] = &[
    "carrier_frequency_hz",
    "bandwidth_hz",
    "subcarriers",
    "clusters",
    "sinusoids",
    "bs_position_m",
    "bs_array_rows",
    "bs_array_cols",
    "bs_element_spacing_wavelengths",
    "bs_element_hpbw_deg",
    "bs_element_max_attenuation_db",
    "bs_orientation_deg",
    "user1_position_m",
    "track_start_m",
    "track_direction",
    "track_step_m",
    "track_samples",
    "decorr_distances_m",
    "seeds",
    "scenario_path",
    "output_path",
    "epsilon_chordal",
    "epsilon_cmd",
];

impl ExperimentConfig {
    /// Parses config text; unspecified keys keep their defaults. Relative
    /// paths are resolved against `base_dir`.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut kv = KvFile::parse(text)?;
        let mut c = ExperimentConfig::default();
        let resolve = |p: String| match base_dir {
            Some(dir) if Path::new(&p).is_relative() => dir.join(p),
            _ => PathBuf::from(p),
        };

        if let Some(v) = kv.f64("carrier_frequency_hz")? {
            c.carrier_frequency_hz = v;
        }
        if let Some(v) = kv.f64("bandwidth_hz")? {
            c.bandwidth_hz = v;
        }
        if let Some(v) = kv.usize("subcarriers")? {
            c.subcarriers = v;
        }
        if let Some(v) = kv.usize("clusters")? {
            c.clusters = v;
        }
        if let Some(v) = kv.usize("sinusoids")? {
            c.sinusoids = v;
        }
        if let Some(v) = kv.vec3("bs_position_m")? {
            c.bs_position = v;
        }
        let a = &mut c.bs_array;
        if let Some(v) = kv.usize("bs_array_rows")? {
            a.rows = v;
        }
        if let Some(v) = kv.usize("bs_array_cols")? {
            a.cols = v;
        }
        if let Some(v) = kv.f64("bs_element_spacing_wavelengths")? {
            a.spacing = v;
        }
        if let Some(v) = kv.f64("bs_element_hpbw_deg")? {
            a.hpbw_deg = v;
        }
        if let Some(v) = kv.f64("bs_element_max_attenuation_db")? {
            a.max_attenuation_db = v;
        }
        if let Some(v) = kv.f64("bs_orientation_deg")? {
            a.orientation_deg = v;
        }
        if let Some(v) = kv.vec3("user1_position_m")? {
            c.user1_position = v;
        }
        let start = kv.vec3("track_start_m")?.unwrap_or(c.track.start());
        let direction = kv.vec3("track_direction")?.unwrap_or(c.track.direction());
        let step = kv.f64("track_step_m")?.unwrap_or(c.track.step());
        let samples = kv.usize("track_samples")?.unwrap_or(c.track.count());
        if !(step > 0.0) {
            return Err(Error::ConfigValue(format!(
                "`track_step_m` must be positive, got {step}"
            )));
        }
        c.track = Track::new(start, direction, step, samples)
            .map_err(|e| Error::ConfigValue(format!("track: {e}")))?;
        if let Some(v) = kv.list_f64("decorr_distances_m")? {
            c.decorr_distances = v;
        }
        if let Some(v) = kv.list_u64("seeds")? {
            c.seeds = v;
        }
        if let Some(v) = kv.string("scenario_path") {
            c.scenario_path = Some(resolve(v));
        }
        if let Some(v) = kv.string("output_path") {
            c.output_path = resolve(v);
        }
        if let Some(v) = kv.f64("epsilon_chordal")? {
            c.epsilon_chordal = Some(v);
        }
        if let Some(v) = kv.f64("epsilon_cmd")? {
            c.epsilon_cmd = v;
        }
        kv.finish()?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ConfigValue(msg));
        if !(self.carrier_frequency_hz > 0.0) {
            return bad(format!(
                "`carrier_frequency_hz` must be positive, got {}",
                self.carrier_frequency_hz
            ));
        }
        if !(self.bandwidth_hz > 0.0) {
            return bad(format!(
                "`bandwidth_hz` must be positive, got {}",
                self.bandwidth_hz
            ));
        }
        if self.subcarriers < 2 {
            return bad(format!(
                "`subcarriers` must be at least 2, got {}",
                self.subcarriers
            ));
        }
        if self.clusters == 0 {
            return bad("`clusters` must be at least 1".into());
        }
        if self.sinusoids == 0 {
            return bad("`sinusoids` must be at least 1".into());
        }
        let a = &self.bs_array;
        if a.rows == 0 || a.cols == 0 {
            return bad(format!(
                "BS array must have at least one element, got {}x{}",
                a.rows, a.cols
            ));
        }
        if !(a.spacing > 0.0) {
            return bad(format!(
                "`bs_element_spacing_wavelengths` must be positive, got {}",
                a.spacing
            ));
        }
        if !(a.hpbw_deg > 0.0) {
            return bad(format!(
                "`bs_element_hpbw_deg` must be positive, got {}",
                a.hpbw_deg
            ));
        }
        if !(a.max_attenuation_db >= 0.0) {
            return bad(format!(
                "`bs_element_max_attenuation_db` must be >= 0, got {}",
                a.max_attenuation_db
            ));
        }
        if self.decorr_distances.is_empty() {
            return bad("`decorr_distances_m` is empty".into());
        }
        if let Some(d) = self.decorr_distances.iter().find(|d| !(**d >= 0.0)) {
            return bad(format!("decorrelation distances must be >= 0, got {d}"));
        }
        let mut sorted = self.decorr_distances.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return bad("`decorr_distances_m` lists a value twice".into());
        }
        if self.seeds.is_empty() {
            return bad("`seeds` is empty".into());
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        if seeds.windows(2).any(|w| w[0] == w[1]) {
            return bad("`seeds` lists a seed twice".into());
        }
        if let Some(e) = self.epsilon_chordal {
            if !(e > 0.0) {
                return bad(format!("`epsilon_chordal` must be positive, got {e}"));
            }
        }
        if !(self.epsilon_cmd > 0.0 && self.epsilon_cmd <= 1.0) {
            return bad(format!(
                "`epsilon_cmd` must lie in (0, 1], got {}",
                self.epsilon_cmd
            ));
        }
        if self.bs_position.distance(self.user1_position) == 0.0 {
            return bad("BS and user 1 coincide".into());
        }
        if self
            .track
            .positions()
            .iter()
            .any(|p| p.distance(self.bs_position) == 0.0)
        {
            return bad("track passes through the BS position".into());
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency_hz
    }

    pub fn scenario(&self) -> Result<ScenarioTable> {
        let table = match &self.scenario_path {
            Some(p) => ScenarioTable::load(p)?,
            None => ScenarioTable::uma_nlos(),
        };
        table.with_clusters(self.clusters)
    }

    /// Writes the config back in file form.
    pub fn to_text(&self) -> String {
        let v3 = |v: Vec3| format!("{}, {}, {}", v.x, v.y, v.z);
        let join = |xs: Vec<String>| xs.join(", ");
        let a = &self.bs_array;
        let mut s = String::new();
        let _ = writeln!(s, "carrier_frequency_hz = {}", self.carrier_frequency_hz);
        let _ = writeln!(s, "bandwidth_hz = {}", self.bandwidth_hz);
        let _ = writeln!(s, "subcarriers = {}", self.subcarriers);
        let _ = writeln!(s, "clusters = {}", self.clusters);
        let _ = writeln!(s, "sinusoids = {}", self.sinusoids);
        let _ = writeln!(s, "bs_position_m = {}", v3(self.bs_position));
        let _ = writeln!(s, "bs_array_rows = {}", a.rows);
        let _ = writeln!(s, "bs_array_cols = {}", a.cols);
        let _ = writeln!(s, "bs_element_spacing_wavelengths = {}", a.spacing);
        let _ = writeln!(s, "bs_element_hpbw_deg = {}", a.hpbw_deg);
        let _ = writeln!(
            s,
            "bs_element_max_attenuation_db = {}",
            a.max_attenuation_db
        );
        let _ = writeln!(s, "bs_orientation_deg = {}", a.orientation_deg);
        let _ = writeln!(s, "user1_position_m = {}", v3(self.user1_position));
        let _ = writeln!(s, "track_start_m = {}", v3(self.track.start()));
        let _ = writeln!(s, "track_direction = {}", v3(self.track.direction()));
        let _ = writeln!(s, "track_step_m = {}", self.track.step());
        let _ = writeln!(s, "track_samples = {}", self.track.count());
        let _ = writeln!(
            s,
            "decorr_distances_m = {}",
            join(self.decorr_distances.iter().map(f64::to_string).collect())
        );
        let _ = writeln!(
            s,
            "seeds = {}",
            join(self.seeds.iter().map(u64::to_string).collect())
        );
        if let Some(p) = &self.scenario_path {
            let _ = writeln!(s, "scenario_path = {}", p.display());
        }
        let _ = writeln!(s, "output_path = {}", self.output_path.display());
        if let Some(e) = self.epsilon_chordal {
            let _ = writeln!(s, "epsilon_chordal = {e}");
        }
        let _ = writeln!(s, "epsilon_cmd = {}", self.epsilon_cmd);
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub d_lambda: f64,
    pub separation: f64,
    pub delta_aaoa: f64,
    pub delta_eaoa: f64,
    pub chordal: f64,
    pub cmd: f64,
    pub seed: u64,
}

/// Everything fixed for one `(seed, d_λ)` cell.
struct Cell<'a> {
    config: &'a ExperimentConfig,
    table: &'a ScenarioTable,
    lsp_fields: &'a LspFields,
    bank: SsfFieldBank,
    tx_array: &'a Array,
    rx_array: &'a Array,
    grid: &'a FrequencyGrid,
}

impl Cell<'_> {
    fn user_state(&self, pos: Vec3) -> Result<(crate::smallscale::PathSet, Covariance)> {
        let lsps = lsps_at(self.lsp_fields, self.table, pos);
        let paths = generate_paths(&self.bank, &lsps, self.table, self.config.bs_position, pos)?;
        let h = synthesize(
            &paths,
            self.tx_array,
            self.rx_array,
            self.config.wavelength(),
            self.grid,
        )?;
        Ok((paths, covariance(&h)))
    }
}

/// Runs the full sweep. Records are ordered by `d_λ`, then separation, then
/// position of the seed in the config list, independent of thread
/// scheduling.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    let table = config.scenario()?;
    let tx_array = config.bs_array.build()?;
    let rx_array = Array::single(Pattern::Isotropic);
    let grid = FrequencyGrid::new(config.bandwidth_hz, config.subcarriers)?;
    let positions = config.track.positions();

    let mut records =
        Vec::with_capacity(config.seeds.len() * config.decorr_distances.len() * positions.len());
    let mut keys = Vec::with_capacity(records.capacity());
    for (seed_index, &seed) in config.seeds.iter().enumerate() {
        let lsp_fields =
            build_lsp_fields(&table, config.sinusoids, rng::derive(seed, LSP_SEED_TAG))?;
        for &d_lambda in &config.decorr_distances {
            let cell = Cell {
                config,
                table: &table,
                lsp_fields: &lsp_fields,
                bank: build_ssf_bank(
                    config.clusters,
                    d_lambda,
                    config.sinusoids,
                    rng::derive(seed, SSF_SEED_TAG),
                )?,
                tx_array: &tx_array,
                rx_array: &rx_array,
                grid: &grid,
            };
            let (paths1, r1) = cell.user_state(config.user1_position)?;
            let cell_records = positions
                .par_iter()
                .map(|&p| {
                    let (paths2, r2) = cell.user_state(p)?;
                    let angles = average_angular_distance(&paths1, &paths2)?;
                    Ok(SweepRecord {
                        d_lambda,
                        separation: p.distance(config.user1_position),
                        delta_aaoa: angles.azimuth,
                        delta_eaoa: angles.elevation,
                        chordal: chordal_distance(&r1, &r2)?,
                        cmd: cmd_similarity(&r1, &r2)?,
                        seed,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            for r in cell_records {
                keys.push(seed_index);
                records.push(r);
            }
        }
    }
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (&records[a], &records[b]);
        ra.d_lambda
            .total_cmp(&rb.d_lambda)
            .then(ra.separation.total_cmp(&rb.separation))
            .then(keys[a].cmp(&keys[b]))
    });
    Ok(order.into_iter().map(|i| records[i]).collect())
}

/// Seed-averaged curve point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanPoint {
    pub d_lambda: f64,
    pub separation: f64,
    pub delta_aaoa: f64,
    pub delta_eaoa: f64,
    pub chordal: f64,
    pub cmd: f64,
    pub seeds: usize,
}

/// Averages records sharing `(d_λ, separation)`. Input must be sorted as
/// [`run_sweep`] returns it.
pub fn seed_means(records: &[SweepRecord]) -> Vec<MeanPoint> {
    records
        .chunk_by(|a, b| a.d_lambda == b.d_lambda && a.separation == b.separation)
        .map(|group| {
            let n = group.len() as f64;
            let avg = |f: fn(&SweepRecord) -> f64| group.iter().map(f).sum::<f64>() / n;
            MeanPoint {
                d_lambda: group[0].d_lambda,
                separation: group[0].separation,
                delta_aaoa: avg(|r| r.delta_aaoa),
                delta_eaoa: avg(|r| r.delta_eaoa),
                chordal: avg(|r| r.chordal),
                cmd: avg(|r| r.cmd),
                seeds: group.len(),
            }
        })
        .collect()
}

/// Largest separation, per `d_λ`, up to which the seed-mean CMD similarity
/// stays at or above `epsilon` without interruption from separation 0.
pub fn cmd_threshold_distances(means: &[MeanPoint], epsilon: f64) -> Vec<(f64, Option<f64>)> {
    means
        .chunk_by(|a, b| a.d_lambda == b.d_lambda)
        .map(|curve| {
            let reach = curve
                .iter()
                .take_while(|m| m.cmd >= epsilon)
                .last()
                .map(|m| m.separation);
            (curve[0].d_lambda, reach)
        })
        .collect()
}

/// Same as [`cmd_threshold_distances`] for the chordal distance, which must
/// stay at or below `epsilon`.
pub fn chordal_threshold_distances(means: &[MeanPoint], epsilon: f64) -> Vec<(f64, Option<f64>)> {
    means
        .chunk_by(|a, b| a.d_lambda == b.d_lambda)
        .map(|curve| {
            let reach = curve
                .iter()
                .take_while(|m| m.chordal <= epsilon)
                .last()
                .map(|m| m.separation);
            (curve[0].d_lambda, reach)
        })
        .collect()
}

/// `%.12g`-style formatting: 12 significant digits, shortest form, `.` as
/// decimal point.
pub fn format_g12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn to_csv_string(records: &[SweepRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            format_g12(r.d_lambda),
            format_g12(r.separation),
            format_g12(r.delta_aaoa),
            format_g12(r.delta_eaoa),
            format_g12(r.chordal),
            format_g12(r.cmd),
            r.seed
        );
    }
    out
}

pub fn write_csv(records: &[SweepRecord], path: &Path) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(to_csv_string(records).as_bytes())
        .map_err(|e| Error::io(path, e))
}

/// Parses a file written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<Vec<SweepRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

pub fn parse_csv(text: &str) -> Result<Vec<SweepRecord>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::InvalidParameter(
            "missing or wrong CSV header".into(),
        ));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = || Error::InvalidParameter(format!("CSV row {}: `{line}`", i + 2));
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 7 {
                return Err(bad());
            }
            let f = |k: usize| cols[k].parse::<f64>().map_err(|_| bad());
            Ok(SweepRecord {
                d_lambda: f(0)?,
                separation: f(1)?,
                delta_aaoa: f(2)?,
                delta_eaoa: f(3)?,
                chordal: f(4)?,
                cmd: f(5)?,
                seed: cols[6].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}
