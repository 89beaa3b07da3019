//! Scenario parameter tables and spatially correlated large-scale parameters.
//!
//! Each LSP is driven by its own standard-Normal SOS field with the LSP's
//! decorrelation distance. Log-Normal parameters are `10^(μ + σ k(p))`;
//! shadow fading and K-factor are Normal in dB.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::kv::KvFile;
use crate::rng;
use crate::sosfield::{AcfSpec, SosField};

/// Bundled urban-macro NLoS table.
pub const UMA_NLOS: &str = include_str!("../data/uma_nlos.txt");

/// Largest rms azimuth spread, degrees.
const MAX_AZIMUTH_SPREAD_DEG: f64 = 104.0;
/// Largest rms elevation spread, degrees.
const MAX_ELEVATION_SPREAD_DEG: f64 = 52.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lsp {
    DelaySpread,
    AsDeparture,
    AsArrival,
    EsDeparture,
    EsArrival,
    ShadowFading,
    KFactor,
}

impl Lsp {
    pub const ALL: [Lsp; 7] = [
        Lsp::DelaySpread,
        Lsp::AsDeparture,
        Lsp::AsArrival,
        Lsp::EsDeparture,
        Lsp::EsArrival,
        Lsp::ShadowFading,
        Lsp::KFactor,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    fn prefix(self) -> &'static str {
        match self {
            Lsp::DelaySpread => "ds",
            Lsp::AsDeparture => "asd",
            Lsp::AsArrival => "asa",
            Lsp::EsDeparture => "esd",
            Lsp::EsArrival => "esa",
            Lsp::ShadowFading => "sf",
            Lsp::KFactor => "kf",
        }
    }

    /// True if the parameter is log-Normal (`lg` keys), false if Normal in dB.
    fn is_log_normal(self) -> bool {
        !matches!(self, Lsp::ShadowFading | Lsp::KFactor)
    }
}

/// Mean and standard deviation of one LSP in its generating domain
/// (log10 of the natural unit, or dB), plus its decorrelation distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LspStats {
    pub mean: f64,
    pub std: f64,
    pub decorr_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTable {
    pub lsp: [LspStats; 7],
    pub xpr_db_mean: f64,
    pub xpr_db_std: f64,
    /// Delay scaling factor r_τ.
    pub delay_scaling: f64,
    /// Per-cluster shadowing standard deviation ζ, dB.
    pub cluster_shadowing_db: f64,
    pub clusters: usize,
}

impl ScenarioTable {
    pub fn uma_nlos() -> Self {
        Self::parse(UMA_NLOS).expect("bundled scenario table is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = KvFile::parse(text)?;
        let mut lsp = [LspStats {
            mean: 0.0,
            std: 0.0,
            decorr_m: 0.0,
        }; 7];
        for which in Lsp::ALL {
            let p = which.prefix();
            let domain = if which.is_log_normal() { "lg" } else { "db" };
            lsp[which.index()] = LspStats {
                mean: kv.require_f64(&format!("{p}_{domain}_mean"))?,
                std: kv.require_f64(&format!("{p}_{domain}_std"))?,
                decorr_m: kv.require_f64(&format!("{p}_decorr_m"))?,
            };
        }
        let table = ScenarioTable {
            lsp,
            xpr_db_mean: kv.require_f64("xpr_db_mean")?,
            xpr_db_std: kv.require_f64("xpr_db_std")?,
            delay_scaling: kv.require_f64("delay_scaling")?,
            cluster_shadowing_db: kv.require_f64("cluster_shadowing_db")?,
            clusters: kv
                .usize("clusters")?
                .ok_or_else(|| Error::ConfigValue("missing required key `clusters`".into()))?,
        };
        kv.finish()?;
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        for which in Lsp::ALL {
            let s = self.lsp[which.index()];
            if !(s.std >= 0.0) || !(s.decorr_m >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{}: std and decorrelation distance must be >= 0",
                    which.prefix()
                )));
            }
        }
        if !(self.xpr_db_std >= 0.0) || !(self.cluster_shadowing_db >= 0.0) {
            return Err(Error::InvalidParameter(
                "scenario standard deviations must be >= 0".into(),
            ));
        }
        if !(self.delay_scaling > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delay scaling must exceed 1, got {}",
                self.delay_scaling
            )));
        }
        if self.clusters == 0 {
            return Err(Error::InvalidParameter("cluster count must be >= 1".into()));
        }
        Ok(())
    }

    pub fn with_clusters(mut self, clusters: usize) -> Result<Self> {
        self.clusters = clusters;
        self.validate()?;
        Ok(self)
    }

    pub fn stats(&self, which: Lsp) -> LspStats {
        self.lsp[which.index()]
    }
}

/// Large-scale parameters at one position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lsps {
    /// Delay spread, seconds.
    pub ds: f64,
    /// Rms angular spreads, radians.
    pub asa: f64,
    pub asd: f64,
    pub esa: f64,
    pub esd: f64,
    /// Shadow fading, dB.
    pub sf: f64,
    /// K-factor, dB.
    pub kf: f64,
}

/// One standard-Normal field per LSP, in [`Lsp::ALL`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct LspFields {
    fields: Vec<SosField>,
}

impl LspFields {
    pub fn field(&self, which: Lsp) -> &SosField {
        &self.fields[which.index()]
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &SosField> {
        self.fields.iter()
    }
}

pub fn build_lsp_fields(table: &ScenarioTable, sinusoids: usize, seed: u64) -> Result<LspFields> {
    let fields = Lsp::ALL
        .iter()
        .map(|&which| {
            let spec = AcfSpec::standard(table.stats(which).decorr_m)?;
            SosField::generate(
                spec,
                sinusoids,
                rng::derive(seed, 0x1500 + which.index() as u64),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LspFields { fields })
}

pub fn lsps_at(fields: &LspFields, table: &ScenarioTable, p: Vec3) -> Lsps {
    let value = |which: Lsp| {
        let s = table.stats(which);
        s.mean + s.std * fields.field(which).evaluate(p)
    };
    let spread = |which: Lsp, cap_deg: f64| 10f64.powf(value(which)).min(cap_deg).to_radians();
    Lsps {
        ds: 10f64.powf(value(Lsp::DelaySpread)),
        asa: spread(Lsp::AsArrival, MAX_AZIMUTH_SPREAD_DEG),
        asd: spread(Lsp::AsDeparture, MAX_AZIMUTH_SPREAD_DEG),
        esa: spread(Lsp::EsArrival, MAX_ELEVATION_SPREAD_DEG),
        esd: spread(Lsp::EsDeparture, MAX_ELEVATION_SPREAD_DEG),
        sf: value(Lsp::ShadowFading),
        kf: value(Lsp::KFactor),
    }
}
