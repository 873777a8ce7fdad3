use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{RadialGraph, SphereGrid};
use crate::numeric::ser_vec_f17;
use crate::{Error, Result};

#[derive(Serialize)]
struct SurfaceOut<'a> {
    n: usize,
    grid: &'a SphereGrid,
    #[serde(serialize_with = "ser_vec_f17")]
    rho: &'a [f64],
    meta: &'a Map<String, Value>,
}

#[derive(Deserialize)]
struct SurfaceIn {
    n: usize,
    grid: SphereGrid,
    rho: Vec<f64>,
    #[serde(default)]
    meta: Map<String, Value>,
}

impl RadialGraph {
    /// Surface JSON: `{"n", "grid", "rho" (row-major), "meta"}`.
    pub fn to_json(&self) -> Result<String> {
        let out = SurfaceOut {
            n: self.n(),
            grid: &self.grid,
            rho: &self.rho,
            meta: &self.meta,
        };
        serde_json::to_string(&out).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: SurfaceIn =
            serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        if raw.grid.n() != raw.n {
            return Err(Error::Serialization(format!(
                "n = {} does not match the grid layout (n = {})",
                raw.n,
                raw.grid.n()
            )));
        }
        Ok(RadialGraph::new(raw.grid, raw.rho)?.with_meta(raw.meta))
    }
}
