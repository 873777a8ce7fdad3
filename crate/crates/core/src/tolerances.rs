//! Calibrated tolerance defaults, shipped as `data/tolerances.toml`.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::Deserialize;

use crate::{Error, Result};

const DEFAULTS: &str = include_str!("../data/tolerances.toml");

#[derive(Debug, Clone, Deserialize)]
pub struct PerDimension {
    pub n1: f64,
    pub n2: f64,
}

impl PerDimension {
    pub fn get(&self, n: usize) -> f64 {
        if n == 1 {
            self.n1
        } else {
            self.n2
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct FlowTolerances {
    pub c_h: f64,
    pub c_dt: f64,
    pub levelset_sphere: f64,
    pub levelset_other: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ToleranceTable {
    pub version: u32,
    pub floor: f64,
    pub checks: BTreeMap<String, PerDimension>,
    pub flow: FlowTolerances,
}

impl ToleranceTable {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Serialization(e.to_string()))
    }

    /// The table compiled into the crate.
    pub fn defaults() -> &'static ToleranceTable {
        static TABLE: OnceLock<ToleranceTable> = OnceLock::new();
        TABLE.get_or_init(|| Self::parse(DEFAULTS).expect("bundled tolerance table parses"))
    }

    /// Relative tolerance `max(c h², floor)` of a named check.
    pub fn relative(&self, check: &str, n: usize, h: f64) -> Result<f64> {
        let c = self
            .checks
            .get(check)
            .ok_or_else(|| Error::Domain(format!("no calibrated tolerance for check {check}")))?
            .get(n);
        Ok((c * h * h).max(self.floor))
    }
}

/// How a check's tolerance is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// Calibrated `max(c h², floor)` from the defaults table.
    Auto,
    /// Fixed relative tolerance.
    Relative(f64),
}

impl Tolerance {
    pub fn relative(&self, check: &str, n: usize, h: f64) -> Result<f64> {
        match *self {
            Tolerance::Auto => ToleranceTable::defaults().relative(check, n, h),
            Tolerance::Relative(t) => Ok(t),
        }
    }
}
