//! Inward unit normal flow `X(y, t) = exp_y(-t ν(y))` followed particle by
//! particle.
//!
//! Along each normal geodesic the principal curvatures, the potentials
//! `V, V_ν` and the area Jacobian have closed forms, so the only numerical
//! error comes from the initial geometry. A particle is trusted until
//! `active_until`, a safety fraction of the earlier of the first focal time
//! and the first detected collision between non-neighbouring particles.

use std::io::Write;

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::hypersurface::{
    build_geometry, weighted_volume, RadialGraph, SurfaceGeometry, H_MARGIN,
};
use crate::hypgeo::{dist_unchecked, geodesic, minkowski, HyperPoint, TangentVector};
use crate::numeric::{fmt17, par_sum};
use crate::symfun::EigenTuple;
use crate::tolerances::ToleranceTable;
use crate::{Error, Result};

const FOCAL_DENOM_TOL: f64 = 1e-12;

/// Hyperboloid coordinates for `n <= 2`, zero-padded.
const MAX_COORDS: usize = 4;
type Coords = [f64; MAX_COORDS];

/// `κ(t)` solving `κ' = κ² - 1`: `(κ cosh t - sinh t) / (cosh t - κ sinh t)`.
pub fn evolve_curvature(kappa: f64, t: f64) -> Result<f64> {
    let (c, s) = (t.cosh(), t.sinh());
    let den = c - kappa * s;
    if den <= FOCAL_DENOM_TOL {
        return Err(Error::Focal {
            t,
            t_focal: focal_time_single(kappa),
        });
    }
    Ok((kappa * c - s) / den)
}

/// `(V(t), V_ν(t))` solving `V' = -V_ν`, `V_ν' = -V`.
pub fn evolve_potentials(v0: f64, vnu0: f64, t: f64) -> (f64, f64) {
    let (c, s) = (t.cosh(), t.sinh());
    (v0 * c - vnu0 * s, vnu0 * c - v0 * s)
}

fn focal_time_single(kappa: f64) -> f64 {
    if kappa > 1.0 {
        (1.0 / kappa).atanh()
    } else {
        f64::INFINITY
    }
}

/// First zero of `cosh t - κ_i sinh t` over all `i`; `+∞` if every `κ_i <= 1`.
pub fn focal_time(kappa0: &EigenTuple) -> f64 {
    kappa0
        .values()
        .iter()
        .map(|&k| focal_time_single(k))
        .fold(f64::INFINITY, f64::min)
}

/// `J(t) = Π_i (cosh t - κ_i sinh t)`, the ratio `dμ_t / dμ_0`.
pub fn area_jacobian(kappa0: &EigenTuple, t: f64) -> Result<f64> {
    let t_focal = focal_time(kappa0);
    if t >= t_focal {
        return Err(Error::Focal { t, t_focal });
    }
    let (c, s) = (t.cosh(), t.sinh());
    Ok(kappa0.values().iter().map(|k| c - k * s).product())
}

/// Coefficients `c_j` with `Π_i (a_i cosh τ + b_i sinh τ) = Σ_j c_j e^{(2j-m)τ}`.
///
/// Each factor is `e^{-τ} (A_i e^{2τ} + B_i) / 2` with `A = a + b`, `B = a - b`,
/// so the product expands into a short sum of exponentials.
fn exp_expansion(factors: &[(f64, f64)]) -> Vec<f64> {
    let mut poly = vec![1.0];
    for &(fa, fb) in factors {
        let (big_a, big_b) = (0.5 * (fa + fb), 0.5 * (fa - fb));
        let mut next = vec![0.0; poly.len() + 1];
        for (j, c) in poly.iter().enumerate() {
            next[j] += big_b * c;
            next[j + 1] += big_a * c;
        }
        poly = next;
    }
    poly
}

/// `∫_a^b Σ_j c_j e^{(2j-m)τ} dτ` for an expansion of `m` factors.
fn integrate_expansion(poly: &[f64], a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let m = poly.len() as f64 - 1.0;
    let len = b - a;
    poly.iter()
        .enumerate()
        .map(|(j, c)| {
            let k = (2 * j) as f64 - m;
            let part = if k == 0.0 {
                len
            } else {
                (k * a).exp() * (k * len).exp_m1() / k
            };
            c * part
        })
        .sum()
}

#[cfg(test)]
/// Exact `∫_a^b Π_i (a_i cosh τ + b_i sinh τ) dτ`.
fn integrate_cosh_sinh_product(factors: &[(f64, f64)], a: f64, b: f64) -> f64 {
    integrate_expansion(&exp_expansion(factors), a, b)
}

/// One Lagrangian sample of the flow.
#[derive(Debug, Clone)]
pub struct FlowParticle {
    pub y: HyperPoint,
    pub nu0: TangentVector,
    pub kappa0: EigenTuple,
    pub v0: f64,
    pub vnu0: f64,
    pub w0: f64,
    pub t_focal: f64,
    pub active_until: f64,
    /// Indices of the grid neighbours of the source node.
    pub neighbors: Vec<usize>,
    /// Collision radius used when the particle has no neighbours.
    pub spacing0: f64,
}

impl FlowParticle {
    pub fn new(
        y: HyperPoint,
        nu0: TangentVector,
        kappa0: EigenTuple,
        v0: f64,
        vnu0: f64,
        w0: f64,
    ) -> Self {
        let t_focal = focal_time(&kappa0);
        Self {
            y,
            nu0,
            kappa0,
            v0,
            vnu0,
            w0,
            t_focal,
            active_until: t_focal,
            neighbors: Vec::new(),
            spacing0: 0.0,
        }
    }

    pub fn position(&self, t: f64) -> HyperPoint {
        geodesic(&self.y, &self.nu0.scaled(-1.0), t)
    }

    /// Activity is inclusive: a particle still counts at `t = active_until`.
    pub fn is_active(&self, t: f64) -> bool {
        t <= self.active_until
    }

    pub fn mean_curvature(&self, t: f64) -> Result<f64> {
        let mut h = 0.0;
        for &k in self.kappa0.values() {
            h += evolve_curvature(k, t)?;
        }
        Ok(h)
    }

    pub fn potentials(&self, t: f64) -> (f64, f64) {
        evolve_potentials(self.v0, self.vnu0, t)
    }

    pub fn jacobian(&self, t: f64) -> Result<f64> {
        area_jacobian(&self.kappa0, t)
    }

    /// Exact `∫_a^b V(τ) J(τ) dτ`.
    pub fn integral_vj(&self, a: f64, b: f64) -> f64 {
        integrate_expansion(&self.vj_expansion(), a, b)
    }

    /// `V(τ) J(τ)` as a sum of exponentials (see [`exp_expansion`]).
    fn vj_expansion(&self) -> Vec<f64> {
        let mut factors = Vec::with_capacity(self.kappa0.len() + 1);
        factors.push((self.v0, -self.vnu0));
        factors.extend(self.kappa0.values().iter().map(|&k| (1.0, -k)));
        exp_expansion(&factors)
    }

    /// `(H, J, V, V_ν)` at the time with `cosh t = c`, `sinh t = s`.
    fn state(&self, t: f64, c: f64, s: f64) -> Result<(f64, f64, f64, f64)> {
        let (mut h, mut j) = (0.0, 1.0);
        for &k in self.kappa0.values() {
            let den = c - k * s;
            if den <= FOCAL_DENOM_TOL {
                return Err(Error::Focal {
                    t,
                    t_focal: self.t_focal,
                });
            }
            h += (k * c - s) / den;
            j *= den;
        }
        Ok((
            h,
            j,
            self.v0 * c - self.vnu0 * s,
            self.vnu0 * c - self.v0 * s,
        ))
    }

    /// Evolved position as padded coordinates.
    fn coords_at(&self, c: f64, s: f64) -> Coords {
        let mut x = [0.0; MAX_COORDS];
        for (slot, (a, v)) in x.iter_mut().zip(self.y.coords().iter().zip(self.nu0.dir())) {
            *slot = c * a - s * v;
        }
        let norm = (-minkowski(&x, &x)).sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
        x
    }
}

/// One particle per grid node, with the node's grid neighbours and its
/// distance to the nearest of them.
pub fn particles_from_geometry(geom: &SurfaceGeometry) -> Vec<FlowParticle> {
    let grid = geom.grid();
    (0..geom.len())
        .into_par_iter()
        .map(|k| {
            let g = &geom.nodes()[k];
            let mut p = FlowParticle::new(
                g.position.clone(),
                g.normal.clone(),
                g.kappa.clone(),
                g.v,
                g.v_nu,
                g.area_weight,
            );
            p.neighbors = grid.neighbors(k);
            p.spacing0 = p
                .neighbors
                .iter()
                .map(|&j| dist_unchecked(g.position.coords(), geom.nodes()[j].position.coords()))
                .fold(f64::INFINITY, f64::min);
            p
        })
        .collect()
}

/// Earliest sampled collision and the smallest focal time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutEstimate {
    /// `+∞` when no collision was seen before `focal_min`.
    pub collision: f64,
    pub focal_min: f64,
}

impl CutEstimate {
    pub fn effective(&self) -> f64 {
        self.collision.min(self.focal_min)
    }
}

/// Smallest `t` in `t_grid` (not beyond the smallest focal time) at which two
/// particles that are not grid neighbours come closer than the local grid
/// spacing, i.e. the distance from one of them to its nearest evolved grid
/// neighbour. Particles without neighbours use `spacing0`.
pub fn estimate_cut_time(particles: &[FlowParticle], t_grid: &[f64]) -> Result<CutEstimate> {
    if particles.len() < 2 {
        return Err(Error::Domain(
            "cut estimate needs at least two particles".into(),
        ));
    }
    let focal_min = particles
        .iter()
        .map(|p| p.t_focal)
        .fold(f64::INFINITY, f64::min);
    for &t in t_grid {
        if t > focal_min {
            break;
        }
        if collides_at(particles, t) {
            return Ok(CutEstimate {
                collision: t,
                focal_min,
            });
        }
    }
    Ok(CutEstimate {
        collision: f64::INFINITY,
        focal_min,
    })
}

fn collides_at(particles: &[FlowParticle], t: f64) -> bool {
    let (c, sh) = (t.cosh(), t.sinh());
    let pos: Vec<Coords> = particles.par_iter().map(|p| p.coords_at(c, sh)).collect();
    let spacing: Vec<f64> = particles
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            if p.neighbors.is_empty() {
                p.spacing0
            } else {
                p.neighbors
                    .iter()
                    .map(|&j| dist_unchecked(&pos[i], &pos[j]))
                    .fold(f64::INFINITY, f64::min)
            }
        })
        .collect();
    let s_max = spacing.iter().copied().fold(0.0, f64::max);
    if !(s_max > 0.0 && s_max.is_finite()) {
        return false;
    }
    // Hyperbolic distance is at least twice the Euclidean distance in the
    // Poincaré ball, so candidates lie within s_max / 2 in ball coordinates.
    let ball: Vec<[f64; 3]> = pos
        .iter()
        .map(|x| {
            [
                x[1] / (1.0 + x[0]),
                x[2] / (1.0 + x[0]),
                x[3] / (1.0 + x[0]),
            ]
        })
        .collect();
    let cell = 0.5 * s_max;
    let key = |x: &[f64; 3]| x.map(|v| (v / cell).floor() as i64);
    let mut order: Vec<([i64; 3], usize)> = ball.iter().map(|x| (key(x), 0)).collect();
    order.iter_mut().enumerate().for_each(|(i, e)| e.1 = i);
    order.sort_unstable();
    let mut cells: Vec<([i64; 3], usize, usize)> = Vec::new();
    let mut start = 0;
    for k in 1..=order.len() {
        if k == order.len() || order[k].0 != order[start].0 {
            cells.push((order[start].0, start, k));
            start = k;
        }
    }
    let table: FxHashMap<[i64; 3], usize> =
        cells.iter().enumerate().map(|(c, e)| (e.0, c)).collect();
    let close = |i: usize, j: usize| {
        let reach = spacing[i].max(spacing[j]);
        let e2: f64 = (0..3).map(|d| (ball[i][d] - ball[j][d]).powi(2)).sum();
        4.0 * e2 < reach * reach
            && !particles[i].neighbors.contains(&j)
            && !particles[j].neighbors.contains(&i)
            && dist_unchecked(&pos[i], &pos[j]) < reach
    };
    // each unordered pair of adjacent cells is visited once
    let forward: Vec<[i64; 3]> = (-1..=1)
        .flat_map(|x| (-1..=1).flat_map(move |y| (-1..=1).map(move |z| [x, y, z])))
        .filter(|o| *o > [0, 0, 0])
        .collect();
    cells.par_iter().any(|&(key, lo, hi)| {
        let members = &order[lo..hi];
        for (a, &(_, i)) in members.iter().enumerate() {
            if members[a + 1..].iter().any(|&(_, j)| close(i, j)) {
                return true;
            }
        }
        forward.iter().any(|o| {
            let Some(&c) = table.get(&[key[0] + o[0], key[1] + o[1], key[2] + o[2]]) else {
                return false;
            };
            let others = &order[cells[c].1..cells[c].2];
            members
                .iter()
                .any(|&(_, i)| others.iter().any(|&(_, j)| close(i, j)))
        })
    })
}

/// Sets `active_until = safety · cut.effective()` on every particle.
pub fn apply_activity(particles: &mut [FlowParticle], cut: &CutEstimate, safety: f64) {
    let until = safety * cut.effective();
    for p in particles {
        p.active_until = until.min(p.t_focal);
    }
}

/// Per-time sums over the active particles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSums {
    /// `Σ J w0`, the area of the level set.
    pub area: f64,
    /// `Σ V_ν J w0`.
    pub support: f64,
    /// `Σ (V - V_ν)/(H - n) J w0`.
    pub hk: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub n_active: usize,
}

/// Sums over particles active at `t`. Fails when an active particle has
/// `H(t) <= n + margin`.
pub fn level_sums(particles: &[FlowParticle], t: f64) -> Result<LevelSums> {
    let n = particles.first().map_or(1, |p| p.kappa0.len()) as f64;
    let (c, sh) = (t.cosh(), t.sinh());
    let per: Vec<Option<(f64, f64, f64, f64)>> = particles
        .par_iter()
        .enumerate()
        .map(|(i, p)| -> Result<Option<(f64, f64, f64, f64)>> {
            if !p.is_active(t) {
                return Ok(None);
            }
            let (h, j, v, vnu) = p.state(t, c, sh)?;
            if h <= n + H_MARGIN {
                return Err(Error::FlowAssumption {
                    t,
                    particle: i,
                    h_minus_n: h - n,
                });
            }
            let jw = j * p.w0;
            Ok(Some((h, jw, vnu * jw, (v - vnu) / (h - n) * jw)))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_>>()?;
    let pick = |f: fn(&(f64, f64, f64, f64)) -> f64| {
        par_sum(per.len(), |i| per[i].as_ref().map_or(0.0, f))
    };
    let (mut h_min, mut h_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for (h, ..) in per.iter().flatten() {
        h_min = h_min.min(*h);
        h_max = h_max.max(*h);
    }
    Ok(LevelSums {
        area: pick(|x| x.1),
        support: pick(|x| x.2),
        hk: pick(|x| x.3),
        h_min,
        h_max,
        n_active: per.iter().filter(|x| x.is_some()).count(),
    })
}

fn q_value(n: f64, t: f64, hk: f64, upper_volume: f64) -> f64 {
    ((n + 1.0) * t).exp() * (hk - (n + 1.0) / n * upper_volume)
}

/// `Q(t)` with `∫_{v>t} V dvol` taken as the coarea tail
/// `∫_t^{t_max} Σ_active V J w0 dτ`; each particle contributes until the
/// earliest of `t_max`, its `active_until` and its focal time.
pub fn q_of_t(particles: &[FlowParticle], t: f64, t_max: f64) -> Result<f64> {
    let n = particles.first().map_or(1, |p| p.kappa0.len()) as f64;
    let sums = level_sums(particles, t)?;
    let tail = par_sum(particles.len(), |i| {
        let p = &particles[i];
        let end = t_max.min(p.active_until).min(p.t_focal);
        p.w0 * p.integral_vj(t, end)
    });
    Ok(q_value(n, t, sums.hk, tail))
}

/// `Σ_particles w0 V J` as one sum of exponentials, so the swept weighted
/// volume `∫_0^t Σ V J w0 dτ` costs `O(n)` per time.
#[derive(Debug, Clone)]
pub struct SweptVolume {
    poly: Vec<f64>,
}

impl SweptVolume {
    pub fn new(particles: &[FlowParticle]) -> Self {
        let per: Vec<Vec<f64>> = particles.par_iter().map(|p| p.vj_expansion()).collect();
        let len = per.first().map_or(0, Vec::len);
        let poly = (0..len)
            .map(|j| par_sum(per.len(), |i| particles[i].w0 * per[i][j]))
            .collect();
        Self { poly }
    }

    /// `∫_0^t Σ V J w0 dτ`.
    pub fn swept(&self, t: f64) -> f64 {
        integrate_expansion(&self.poly, 0.0, t)
    }
}

/// `∫_{v>t} V dvol = ∫_Ω V dvol - ∫_0^t Σ V J w0 dτ`, exact while every
/// particle is still active on `[0, t]`.
pub fn upper_weighted_volume(particles: &[FlowParticle], t: f64, total: f64) -> f64 {
    total - SweptVolume::new(particles).swept(t)
}

/// `Q(t)` with `∫_{v>t} V dvol` from [`upper_weighted_volume`].
pub fn q_of_t_complement(particles: &[FlowParticle], t: f64, total: f64) -> Result<f64> {
    let n = particles.first().map_or(1, |p| p.kappa0.len()) as f64;
    let sums = level_sums(particles, t)?;
    Ok(q_value(
        n,
        t,
        sums.hk,
        upper_weighted_volume(particles, t, total),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    /// Number of time steps on `[0, t_safe]` (`samples + 1` sample times).
    pub samples: usize,
    /// Number of sample times for the collision search on `(0, focal_min]`.
    pub cut_samples: usize,
    /// `active_until = safety · min(collision, focal_min)`.
    pub safety: f64,
    /// Relative bound on the level-set residual.
    pub levelset_tol: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            samples: 400,
            cut_samples: 200,
            safety: 0.9,
            levelset_tol: ToleranceTable::defaults().flow.levelset_other,
        }
    }
}

impl FlowConfig {
    /// Defaults, with the tight level-set bound for centred geodesic spheres
    /// (both sides of the identity then have a closed form).
    pub fn for_surface(s: &RadialGraph) -> Self {
        let meta = s.meta();
        let centred_sphere = meta.get("shape").and_then(|v| v.as_str()) == Some("sphere")
            && meta.get("offset").and_then(|v| v.as_f64()) == Some(0.0);
        let mut cfg = Self::default();
        if centred_sphere {
            cfg.levelset_tol = ToleranceTable::defaults().flow.levelset_sphere;
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrace {
    pub times: Vec<f64>,
    pub q: Vec<f64>,
    pub h_min: Vec<f64>,
    pub h_max: Vec<f64>,
    pub area: Vec<f64>,
    /// `|Σ V_ν J w0 - (n+1) ∫_{v>t} V| / ((n+1) ∫_{v>t} V)`.
    pub levelset_residual: Vec<f64>,
    pub n_active: Vec<usize>,
    pub cut: CutEstimate,
    pub t_safe: f64,
    pub weighted_volume: f64,
    /// Relative gap between `∫_Ω V dvol` and the particle coarea integral up
    /// to the effective cut time, i.e. how much of `Ω` the particles miss.
    pub coarea_truncation: f64,
    /// Absolute slack allowed between consecutive `Q` samples.
    pub q_tolerance: f64,
    pub levelset_tol: f64,
}

impl FlowTrace {
    /// First index `j` with `Q(t_{j+1}) > Q(t_j) + q_tolerance`.
    pub fn first_q_increase(&self) -> Option<usize> {
        self.q
            .windows(2)
            .position(|w| w[1] > w[0] + self.q_tolerance)
    }

    pub fn q_monotone(&self) -> bool {
        self.first_q_increase().is_none()
    }

    pub fn area_decreasing(&self) -> bool {
        self.area.windows(2).all(|w| w[1] < w[0])
    }

    pub fn max_levelset_residual(&self) -> f64 {
        self.levelset_residual.iter().copied().fold(0.0, f64::max)
    }

    pub fn levelset_ok(&self) -> bool {
        self.max_levelset_residual() <= self.levelset_tol
    }

    pub fn passed(&self) -> bool {
        self.q_monotone() && self.levelset_ok() && self.area_decreasing()
    }

    /// CSV with header `t,Q,H_min,H_max,area,levelset_residual,n_active`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,Q,H_min,H_max,area,levelset_residual,n_active")?;
        for j in 0..self.times.len() {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                fmt17(self.times[j]),
                fmt17(self.q[j]),
                fmt17(self.h_min[j]),
                fmt17(self.h_max[j]),
                fmt17(self.area[j]),
                fmt17(self.levelset_residual[j]),
                self.n_active[j]
            )?;
        }
        Ok(())
    }
}

/// Runs the flow from `s` and records `Q`, curvature range, area and the
/// level-set residual on `samples + 1` uniform times in `[0, t_safe]`.
pub fn verify_flow(s: &RadialGraph, cfg: &FlowConfig) -> Result<FlowTrace> {
    let geom = build_geometry(s)?;
    let n = geom.n() as f64;
    let (node, h0) = geom.min_mean_curvature();
    if h0 <= n + H_MARGIN {
        return Err(Error::FlowAssumption {
            t: 0.0,
            particle: node,
            h_minus_n: h0 - n,
        });
    }
    if cfg.samples == 0 || cfg.cut_samples == 0 || !(cfg.safety > 0.0 && cfg.safety < 1.0) {
        return Err(Error::Domain(
            "flow sampling parameters out of range".into(),
        ));
    }
    let mut particles = particles_from_geometry(&geom);
    let focal_min = particles
        .iter()
        .map(|p| p.t_focal)
        .fold(f64::INFINITY, f64::min);
    if !focal_min.is_finite() {
        return Err(Error::Domain("no particle ever focuses".into()));
    }
    let t_grid: Vec<f64> = (1..=cfg.cut_samples)
        .map(|j| focal_min * j as f64 / cfg.cut_samples as f64)
        .collect();
    let cut = estimate_cut_time(&particles, &t_grid)?;
    apply_activity(&mut particles, &cut, cfg.safety);
    let t_safe = cfg.safety * cut.effective();

    let total = weighted_volume(s);
    let sweep = SweptVolume::new(&particles);
    let swept = sweep.swept(cut.effective());
    let coarea_truncation = (total - swept).abs() / total;

    let flow = &ToleranceTable::defaults().flow;
    let dt = t_safe / cfg.samples as f64;
    let h = geom.spacing();
    let q_tolerance = (flow.c_h * h * h + flow.c_dt * dt * dt) * (n + 1.0) / n * total;

    let mut trace = FlowTrace {
        times: Vec::with_capacity(cfg.samples + 1),
        q: Vec::new(),
        h_min: Vec::new(),
        h_max: Vec::new(),
        area: Vec::new(),
        levelset_residual: Vec::new(),
        n_active: Vec::new(),
        cut,
        t_safe,
        weighted_volume: total,
        coarea_truncation,
        q_tolerance,
        levelset_tol: cfg.levelset_tol,
    };
    for j in 0..=cfg.samples {
        let t = if j == cfg.samples {
            t_safe
        } else {
            dt * j as f64
        };
        let sums = level_sums(&particles, t)?;
        let upper = total - sweep.swept(t);
        trace.times.push(t);
        trace.q.push(q_value(n, t, sums.hk, upper));
        trace.h_min.push(sums.h_min);
        trace.h_max.push(sums.h_max);
        trace.area.push(sums.area);
        let rhs = (n + 1.0) * upper;
        trace
            .levelset_residual
            .push((sums.support - rhs).abs() / rhs.abs());
        trace.n_active.push(sums.n_active);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curvature_examples() {
        let r = 1.3f64;
        let k = evolve_curvature(1.0 / r.tanh(), 0.4).unwrap();
        assert!((k - 1.0 / (r - 0.4).tanh()).abs() < 1e-12);
        assert_eq!(evolve_curvature(1.0, 7.0).unwrap(), 1.0);
        assert!(matches!(
            evolve_curvature(2.0, 0.6),
            Err(Error::Focal { .. })
        ));
    }

    #[test]
    fn focal_examples() {
        let two = EigenTuple::new(vec![2.0, 2.0]).unwrap();
        assert!((focal_time(&two) - 0.5f64.atanh()).abs() < 1e-15);
        assert!(focal_time(&EigenTuple::constant(1.0, 2).unwrap()).is_infinite());
        let r = 0.7f64;
        let sph = EigenTuple::constant(1.0 / r.tanh(), 2).unwrap();
        assert!((focal_time(&sph) - r).abs() < 1e-12);
    }

    #[test]
    fn sphere_jacobian() {
        let r = 1.1f64;
        let k = EigenTuple::constant(1.0 / r.tanh(), 2).unwrap();
        for t in [0.0, 0.3, 1.0] {
            let j = area_jacobian(&k, t).unwrap();
            assert!((j - ((r - t).sinh() / r.sinh()).powi(2)).abs() < 1e-12);
        }
        assert!(area_jacobian(&k, r).is_err());
    }

    #[test]
    fn product_integral_matches_quadrature() {
        let factors = [(1.7, -0.9), (1.0, -1.4), (1.0, -0.6)];
        let f = |t: f64| {
            factors
                .iter()
                .map(|(a, b)| a * t.cosh() + b * t.sinh())
                .product::<f64>()
        };
        let (a, b) = (0.1, 0.55);
        let m = 2000;
        let h = (b - a) / m as f64;
        // composite Simpson
        let simpson: f64 = (0..=m)
            .map(|i| {
                let w = if i == 0 || i == m {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * f(a + h * i as f64)
            })
            .sum::<f64>()
            * h
            / 3.0;
        assert!((integrate_cosh_sinh_product(&factors, a, b) - simpson).abs() < 1e-12);
        // the k = 0 exponent (two factors)
        let two = [(1.0, -1.2), (2.0, 0.5)];
        let g = |t: f64| {
            two.iter()
                .map(|(a, b)| a * t.cosh() + b * t.sinh())
                .product::<f64>()
        };
        let simpson2: f64 = (0..=m)
            .map(|i| {
                let w = if i == 0 || i == m {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * g(a + h * i as f64)
            })
            .sum::<f64>()
            * h
            / 3.0;
        assert!((integrate_cosh_sinh_product(&two, a, b) - simpson2).abs() < 1e-12);
    }

    fn particle(y: Vec<f64>, nu: Vec<f64>, kappa: f64) -> FlowParticle {
        let y = HyperPoint::new(y).unwrap();
        let nu = TangentVector::new(y.clone(), nu).unwrap();
        let k = EigenTuple::constant(kappa, 2).unwrap();
        FlowParticle::new(y, nu, k, 1.0, 0.0, 1.0)
    }

    #[test]
    fn antipodal_pair_meets_at_the_centre() {
        let r = 0.8f64;
        let (c, s) = (r.cosh(), r.sinh());
        let mut ps = vec![
            particle(vec![c, s, 0.0, 0.0], vec![s, c, 0.0, 0.0], 1.0 / r.tanh()),
            particle(vec![c, -s, 0.0, 0.0], vec![s, -c, 0.0, 0.0], 1.0 / r.tanh()),
        ];
        ps.iter_mut().for_each(|p| p.spacing0 = 1e-3);
        let step = r / 50.0;
        let grid: Vec<f64> = (1..=50).map(|j| step * j as f64).collect();
        let cut = estimate_cut_time(&ps, &grid).unwrap();
        assert!((cut.collision - r).abs() <= step + 1e-12, "{cut:?}");
        assert!((cut.focal_min - r).abs() < 1e-12);
    }

    /// Two totally geodesic planes at distance `w` on either side of the
    /// origin never focus but run into each other at `t ≈ w`.
    #[test]
    fn facing_planes_collide_before_focusing() {
        let (w, delta, m) = (0.5f64, 0.05f64, 5i32);
        let side = (2 * m + 1) as usize;
        let mut ps = Vec::new();
        for sign in [1.0, -1.0] {
            let p = [w.cosh(), sign * w.sinh(), 0.0, 0.0];
            let nu = vec![w.sinh(), sign * w.cosh(), 0.0, 0.0];
            for a in -m..=m {
                for b in -m..=m {
                    let (ta, tb) = (delta * a as f64, delta * b as f64);
                    let len = ta.hypot(tb);
                    let (c, sh) = (len.cosh(), if len > 0.0 { len.sinh() / len } else { 1.0 });
                    let y = vec![c * p[0], c * p[1], sh * ta, sh * tb];
                    let mut q = particle(y, nu.clone(), 0.0);
                    q.kappa0 = EigenTuple::new(vec![0.0, 0.0]).unwrap();
                    q.t_focal = focal_time(&q.kappa0);
                    ps.push(q);
                }
            }
        }
        let count = ps.len();
        for (k, q) in ps.iter_mut().enumerate() {
            let (sheet, local) = (k / (side * side), k % (side * side));
            let (i, j) = (local / side, local % side);
            let at = |i: usize, j: usize| sheet * side * side + i * side + j;
            let mut nb = Vec::new();
            if i > 0 {
                nb.push(at(i - 1, j));
            }
            if i + 1 < side {
                nb.push(at(i + 1, j));
            }
            if j > 0 {
                nb.push(at(i, j - 1));
            }
            if j + 1 < side {
                nb.push(at(i, j + 1));
            }
            q.neighbors = nb;
        }
        assert_eq!(count, 2 * side * side);
        let step = 2.0 * w / 400.0;
        let grid: Vec<f64> = (1..=400).map(|j| step * j as f64).collect();
        let cut = estimate_cut_time(&ps, &grid).unwrap();
        assert!(cut.focal_min.is_infinite());
        assert!(
            cut.collision < w && cut.collision > w - delta * w.cosh(),
            "{cut:?}"
        );
        assert_eq!(cut.effective(), cut.collision);
    }

    #[test]
    fn centred_sphere_cut_is_the_radius() {
        let r = 1.0;
        let grid = crate::hypersurface::SphereGrid::sphere(16, 32).unwrap();
        let s = crate::hypersurface::gen_sphere(r, 0.0, grid).unwrap();
        let ps = particles_from_geometry(&build_geometry(&s).unwrap());
        let t_grid: Vec<f64> = (1..=100).map(|j| 1.2 * r * j as f64 / 100.0).collect();
        let cut = estimate_cut_time(&ps, &t_grid).unwrap();
        assert!((cut.effective() - r).abs() < 1e-8, "{cut:?}");
    }

    #[test]
    fn aggregated_sweep_matches_particle_sum() {
        let grid = crate::hypersurface::SphereGrid::sphere(12, 24).unwrap();
        let s = crate::hypersurface::gen_perturbed_sphere(1.0, 0.05, (2, 0), grid).unwrap();
        let ps = particles_from_geometry(&build_geometry(&s).unwrap());
        let sweep = SweptVolume::new(&ps);
        for t in [0.0, 0.2, 0.6] {
            let direct: f64 = ps.iter().map(|p| p.w0 * p.integral_vj(0.0, t)).sum();
            assert!((sweep.swept(t) - direct).abs() <= 1e-13 * direct.abs().max(1.0));
        }
    }
}
