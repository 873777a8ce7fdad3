//! Integral identities and inequalities on a discretised closed hypersurface.
//!
//! Every check returns a [`CheckResult`] whose tolerance is relative to
//! `max(|lhs|, |rhs|)`. Identities pass when `|lhs - rhs| <= tol`,
//! inequalities `lhs >= rhs` when `lhs - rhs >= -tol`.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::hypersurface::{weighted_volume, RadialGraph, SphereGrid, SurfaceGeometry, H_MARGIN};
use crate::numeric::ser_f17;
use crate::symfun::{cone_member, e_m, sigma_m};
use crate::tolerances::Tolerance;
use crate::{Error, Result};

pub const MINKOWSKI_SHIFTED: &str = "minkowski-shifted";
pub const MINKOWSKI_CLASSICAL: &str = "minkowski-classical";
pub const HK_BRENDLE: &str = "hk-brendle";
pub const HK_SHIFTED: &str = "hk-shifted";
pub const ALEXANDROV_CONSTANCY: &str = "alexandrov-constancy";
pub const ALEXANDROV_NM_SLACK: &str = "alexandrov-nm-slack";
pub const ALEXANDROV_UMBILICITY: &str = "alexandrov-umbilicity";

pub const CHECK_NAMES: [&str; 7] = [
    MINKOWSKI_SHIFTED,
    MINKOWSKI_CLASSICAL,
    HK_BRENDLE,
    HK_SHIFTED,
    ALEXANDROV_CONSTANCY,
    ALEXANDROV_NM_SLACK,
    ALEXANDROV_UMBILICITY,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Identity,
    Inequality,
    /// Diagnostic value only; always passes.
    Report,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckMetadata {
    pub grid: SphereGrid,
    pub h: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    pub kind: CheckKind,
    /// For inequalities and reports: whether `|lhs - rhs| <= tolerance`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equality: Option<bool>,
    #[serde(skip_serializing_if = "Map::is_empty")]
    pub extra: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    #[serde(serialize_with = "ser_f17")]
    pub lhs: f64,
    #[serde(serialize_with = "ser_f17")]
    pub rhs: f64,
    #[serde(serialize_with = "ser_f17")]
    pub residual: f64,
    #[serde(serialize_with = "ser_f17")]
    pub rel_residual: f64,
    #[serde(serialize_with = "ser_f17")]
    pub tolerance: f64,
    pub pass: bool,
    pub metadata: CheckMetadata,
}

impl CheckResult {
    fn new(
        name: &str,
        kind: CheckKind,
        lhs: f64,
        rhs: f64,
        rel_tol: f64,
        geom: &SurfaceGeometry,
    ) -> Self {
        let residual = lhs - rhs;
        let scale = lhs.abs().max(rhs.abs());
        let rel_residual = if scale > 0.0 { residual / scale } else { 0.0 };
        let tolerance = rel_tol * scale;
        let within = residual.abs() <= tolerance;
        let pass = match kind {
            CheckKind::Identity => within,
            CheckKind::Inequality => residual >= -tolerance,
            CheckKind::Report => true,
        };
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            residual,
            rel_residual,
            tolerance,
            pass,
            metadata: CheckMetadata {
                grid: *geom.grid(),
                h: geom.spacing(),
                k: None,
                eps: None,
                kind,
                equality: (kind != CheckKind::Identity).then_some(within),
                extra: Map::new(),
            },
        }
    }

    fn with_k(mut self, k: usize) -> Self {
        self.metadata.k = Some(k);
        self
    }

    fn with_eps(mut self, eps: f64) -> Self {
        self.metadata.eps = Some(eps);
        self
    }

    fn with_extra(mut self, key: &str, value: f64) -> Self {
        self.metadata.extra.insert(key.to_string(), value.into());
        self
    }

    /// `lhs - rhs` for inequalities.
    pub fn deficit(&self) -> f64 {
        self.residual
    }

    pub fn equality(&self) -> bool {
        self.metadata.equality.unwrap_or(self.pass)
    }
}

fn rel_tol(tol: Tolerance, name: &str, geom: &SurfaceGeometry) -> Result<f64> {
    tol.relative(name, geom.n(), geom.spacing())
}

fn check_k(k: usize, lo: usize, n: usize, check: &str) -> Result<()> {
    if k < lo || k > n {
        return Err(Error::Domain(format!(
            "{check}: k = {k} outside {lo}..={n}"
        )));
    }
    Ok(())
}

/// `∫(V - εV_ν) E_{k-1}(κ - ε) dμ = ∫ V_ν E_k(κ - ε) dμ`.
pub fn minkowski_shifted(
    geom: &SurfaceGeometry,
    eps: f64,
    k: usize,
    tol: Tolerance,
) -> Result<CheckResult> {
    check_k(k, 1, geom.n(), MINKOWSKI_SHIFTED)?;
    let lhs = geom.integrate(|g| (g.v - eps * g.v_nu) * e_m(&g.kappa.shifted(eps), k - 1));
    let rhs = geom.integrate(|g| g.v_nu * e_m(&g.kappa.shifted(eps), k));
    let t = rel_tol(tol, MINKOWSKI_SHIFTED, geom)?;
    Ok(
        CheckResult::new(MINKOWSKI_SHIFTED, CheckKind::Identity, lhs, rhs, t, geom)
            .with_k(k)
            .with_eps(eps),
    )
}

/// `∫ V_ν dμ = (n+1) ∫_Ω V dvol`.
pub fn minkowski_classical(
    geom: &SurfaceGeometry,
    s: &RadialGraph,
    tol: Tolerance,
) -> Result<CheckResult> {
    let lhs = geom.integrate(|g| g.v_nu);
    let rhs = (geom.n() + 1) as f64 * weighted_volume(s);
    let t = rel_tol(tol, MINKOWSKI_CLASSICAL, geom)?;
    Ok(CheckResult::new(
        MINKOWSKI_CLASSICAL,
        CheckKind::Identity,
        lhs,
        rhs,
        t,
        geom,
    ))
}

fn precondition(check: &str, node: usize, detail: String) -> Error {
    Error::Precondition {
        check: check.to_string(),
        node,
        detail,
    }
}

/// `∫ V/H dμ >= (n+1)/n ∫_Ω V dvol`, requires `H > 0`.
pub fn hk_brendle(geom: &SurfaceGeometry, s: &RadialGraph, tol: Tolerance) -> Result<CheckResult> {
    let (node, h) = geom.min_mean_curvature();
    if h <= 0.0 {
        return Err(precondition(
            HK_BRENDLE,
            node,
            format!("H = {h:e} is not positive"),
        ));
    }
    let n = geom.n() as f64;
    let lhs = geom.integrate(|g| g.v / g.mean_curvature());
    let rhs = (n + 1.0) / n * weighted_volume(s);
    let t = rel_tol(tol, HK_BRENDLE, geom)?;
    Ok(CheckResult::new(
        HK_BRENDLE,
        CheckKind::Inequality,
        lhs,
        rhs,
        t,
        geom,
    ))
}

/// `∫ (V - V_ν)/(H - n) dμ >= (n+1)/n ∫_Ω V dvol`, requires `H > n`.
pub fn hk_shifted(geom: &SurfaceGeometry, s: &RadialGraph, tol: Tolerance) -> Result<CheckResult> {
    let n = geom.n() as f64;
    let (node, h) = geom.min_mean_curvature();
    if h <= n + H_MARGIN {
        return Err(precondition(
            HK_SHIFTED,
            node,
            format!(
                "H - n = {:e} does not exceed the margin {H_MARGIN:e}",
                h - n
            ),
        ));
    }
    let lhs = geom.integrate(|g| (g.v - g.v_nu) / (g.mean_curvature() - n));
    let rhs = (n + 1.0) / n * weighted_volume(s);
    let t = rel_tol(tol, HK_SHIFTED, geom)?;
    Ok(CheckResult::new(
        HK_SHIFTED,
        CheckKind::Inequality,
        lhs,
        rhs,
        t,
        geom,
    ))
}

/// The chain behind constant shifted `k`-th mean curvature implying a
/// geodesic sphere:
///
/// 1. `alexandrov-constancy`: `∫(V - V_ν) E_{k-1}/E_k dμ` vs `∫ V_ν dμ`. An
///    identity when `E_k(κ̃)` is constant within tolerance, otherwise the
///    inequality `>=` that follows from the two steps below.
/// 2. `alexandrov-nm-slack`: `∫(V - V_ν) E_{k-1}/E_k dμ >= ∫(V - V_ν)/E_1 dμ`.
/// 3. `alexandrov-umbilicity`: `max κ - min κ` against zero (report).
///
/// Requires `2 <= k <= n` and `κ̃ ∈ Γ_k^+` at every node.
pub fn alexandrov_diagnostic(
    geom: &SurfaceGeometry,
    k: usize,
    tol: Tolerance,
) -> Result<Vec<CheckResult>> {
    check_k(k, 2, geom.n(), ALEXANDROV_CONSTANCY)?;
    for (node, g) in geom.nodes().iter().enumerate() {
        if !cone_member(&g.kappa_shifted, k)? {
            let sigmas: Vec<String> = (1..=k)
                .map(|i| format!("{:e}", sigma_m(&g.kappa_shifted, i)))
                .collect();
            return Err(precondition(
                ALEXANDROV_CONSTANCY,
                node,
                format!(
                    "shifted curvatures leave the cone, sigma_1..k = [{}]",
                    sigmas.join(", ")
                ),
            ));
        }
    }

    let ek: Vec<f64> = geom
        .nodes()
        .iter()
        .map(|g| e_m(&g.kappa_shifted, k))
        .collect();
    let ek_min = ek.iter().copied().fold(f64::INFINITY, f64::min);
    let ek_max = ek.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ek_mean = geom.integrate(|g| e_m(&g.kappa_shifted, k)) / geom.area();
    let t_const = rel_tol(tol, ALEXANDROV_CONSTANCY, geom)?;
    let constant = ek_max - ek_min <= t_const * ek_mean.abs();

    let ratio = |g: &crate::hypersurface::NodeGeometry| {
        (g.v - g.v_nu) * e_m(&g.kappa_shifted, k - 1) / e_m(&g.kappa_shifted, k)
    };
    let chained = geom.integrate(ratio);
    let support = geom.integrate(|g| g.v_nu);
    let kind = if constant {
        CheckKind::Identity
    } else {
        CheckKind::Inequality
    };
    let mut first = CheckResult::new(ALEXANDROV_CONSTANCY, kind, chained, support, t_const, geom)
        .with_k(k)
        .with_extra("ek_mean", ek_mean)
        .with_extra("ek_min", ek_min)
        .with_extra("ek_max", ek_max);
    first
        .metadata
        .extra
        .insert("constancy_applied".into(), constant.into());

    let nm_rhs = geom.integrate(|g| (g.v - g.v_nu) / e_m(&g.kappa_shifted, 1));
    let t_nm = rel_tol(tol, ALEXANDROV_NM_SLACK, geom)?;
    let second = CheckResult::new(
        ALEXANDROV_NM_SLACK,
        CheckKind::Inequality,
        chained,
        nm_rhs,
        t_nm,
        geom,
    )
    .with_k(k);

    let t_umb = rel_tol(tol, ALEXANDROV_UMBILICITY, geom)?;
    let spread = geom.umbilicity_spread();
    let mut third = CheckResult::new(
        ALEXANDROV_UMBILICITY,
        CheckKind::Report,
        spread,
        0.0,
        t_umb,
        geom,
    )
    .with_k(k);
    // relative to the curvature scale, not to the spread itself
    third.tolerance = t_umb * geom.max_kappa().abs();
    third.rel_residual = spread / geom.max_kappa().abs();
    third.metadata.equality = Some(spread <= third.tolerance);

    Ok(vec![first, second, third])
}

/// Which checks to run and with which parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRequest {
    pub checks: Vec<String>,
    pub eps: Vec<f64>,
    pub k: Vec<usize>,
    pub tol: Tolerance,
}

impl CheckRequest {
    /// Every check that applies in dimension `n`, `ε ∈ {0, ½, 1}`,
    /// `k ∈ 1..=n`.
    pub fn all(n: usize) -> Self {
        let mut checks: Vec<String> = [
            MINKOWSKI_SHIFTED,
            MINKOWSKI_CLASSICAL,
            HK_BRENDLE,
            HK_SHIFTED,
        ]
        .iter()
        .map(|c| c.to_string())
        .collect();
        if n >= 2 {
            checks.push("alexandrov".to_string());
        }
        Self {
            checks,
            eps: vec![0.0, 0.5, 1.0],
            k: (1..=n).collect(),
            tol: Tolerance::Auto,
        }
    }
}

/// Runs the requested checks in order. `alexandrov` (or any of its three
/// names) runs the whole chain once per `k >= 2`.
pub fn run_checks(
    s: &RadialGraph,
    geom: &SurfaceGeometry,
    req: &CheckRequest,
) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let mut chain_done = false;
    for name in &req.checks {
        match name.as_str() {
            MINKOWSKI_SHIFTED => {
                for &k in &req.k {
                    for &eps in &req.eps {
                        out.push(minkowski_shifted(geom, eps, k, req.tol)?);
                    }
                }
            }
            MINKOWSKI_CLASSICAL => out.push(minkowski_classical(geom, s, req.tol)?),
            HK_BRENDLE => out.push(hk_brendle(geom, s, req.tol)?),
            HK_SHIFTED => out.push(hk_shifted(geom, s, req.tol)?),
            "alexandrov" | ALEXANDROV_CONSTANCY | ALEXANDROV_NM_SLACK | ALEXANDROV_UMBILICITY => {
                if chain_done {
                    continue;
                }
                chain_done = true;
                let ks: Vec<usize> = req.k.iter().copied().filter(|&k| k >= 2).collect();
                if ks.is_empty() {
                    return Err(precondition(
                        ALEXANDROV_CONSTANCY,
                        0,
                        format!("needs some k with 2 <= k <= n = {}", geom.n()),
                    ));
                }
                for k in ks {
                    out.extend(alexandrov_diagnostic(geom, k, req.tol)?);
                }
            }
            other => return Err(Error::Domain(format!("unknown check {other}"))),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceDescriptor {
    pub n: usize,
    pub grid: SphereGrid,
    pub meta: Map<String, Value>,
}

impl SurfaceDescriptor {
    pub fn of(s: &RadialGraph) -> Self {
        Self {
            n: s.n(),
            grid: *s.grid(),
            meta: s.meta().clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub config_hash: String,
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub surface: SurfaceDescriptor,
    pub checks: Vec<CheckResult>,
    pub provenance: Provenance,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypersurface::{build_geometry, gen_sphere};

    #[test]
    fn sphere_closed_forms() {
        let r = 1.0f64;
        let s = gen_sphere(r, 0.0, SphereGrid::sphere(16, 32).unwrap()).unwrap();
        let geom = build_geometry(&s).unwrap();
        let area = geom.area();
        let c = minkowski_shifted(&geom, 1.0, 1, Tolerance::Auto).unwrap();
        assert!((c.lhs - (-r).exp() * area).abs() < 1e-12 * area);
        assert!((c.rhs - (r.cosh() - r.sinh()) * area).abs() < 1e-12 * area);
        assert!(c.pass);
        let hk = hk_shifted(&geom, &s, Tolerance::Auto).unwrap();
        assert!((hk.lhs - r.sinh() / 2.0 * area).abs() < 1e-12 * area);
        assert!(hk.pass && hk.equality());
    }

    #[test]
    fn shifted_precondition_names_the_check() {
        // coth 30 - 1 is far below the margin
        let s = gen_sphere(30.0, 0.0, SphereGrid::sphere(8, 16).unwrap()).unwrap();
        let geom = build_geometry(&s).unwrap();
        match hk_shifted(&geom, &s, Tolerance::Auto) {
            Err(Error::Precondition { check, .. }) => assert_eq!(check, HK_SHIFTED),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn alexandrov_requires_k_at_least_two() {
        let s = gen_sphere(1.0, 0.0, SphereGrid::circle(16).unwrap()).unwrap();
        let geom = build_geometry(&s).unwrap();
        assert!(alexandrov_diagnostic(&geom, 2, Tolerance::Auto).is_err());
    }
}
