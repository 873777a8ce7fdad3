//! Refinement studies: the same shape on a sequence of doubled grids.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use hk_core::hypersurface::build_geometry;
use hk_core::identities::{run_checks, CheckKind, CheckResult};
use hk_core::numeric::fmt17;
use hk_core::tolerances::ToleranceTable;

use crate::args::ConvergenceArgs;
use crate::error::{exit, CliError, CliResult};
use crate::output::write_atomic;

/// Fitted orders below this fail an identity check.
pub const MIN_ORDER: f64 = 1.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converging,
    /// Every level is already at the roundoff floor.
    Floor,
    NonMonotone,
    LowOrder,
    /// Not an identity at every level; orders are informational.
    Report,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Converging => "ok",
            Status::Floor => "floor",
            Status::NonMonotone => "non-monotone",
            Status::LowOrder => "low-order",
            Status::Report => "report",
        }
    }
}

/// One check (name, ε, k) across all levels.
#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub eps: Option<f64>,
    pub k: Option<usize>,
    pub kinds: Vec<CheckKind>,
    pub h: Vec<f64>,
    pub grids: Vec<String>,
    /// `|rel_residual|` per level.
    pub residual: Vec<f64>,
}

impl Series {
    /// `log(r_{l-1}/r_l) / log(h_{l-1}/h_l)` for `l >= 1`.
    pub fn pairwise_orders(&self) -> Vec<f64> {
        (1..self.h.len())
            .map(|l| {
                (self.residual[l - 1] / self.residual[l]).ln() / (self.h[l - 1] / self.h[l]).ln()
            })
            .collect()
    }

    /// Least-squares slope of `log r` against `log h`.
    pub fn fitted_order(&self) -> f64 {
        let xs: Vec<f64> = self.h.iter().map(|h| h.ln()).collect();
        let ys: Vec<f64> = self.residual.iter().map(|r| r.ln()).collect();
        let m = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        sxy / sxx
    }

    pub fn status(&self, floor: f64) -> Status {
        if self.kinds.iter().any(|k| *k != CheckKind::Identity) {
            return Status::Report;
        }
        if self.residual.iter().all(|r| *r <= floor) {
            return Status::Floor;
        }
        if self.residual.windows(2).any(|w| w[1] > w[0]) {
            return Status::NonMonotone;
        }
        if self.fitted_order() < MIN_ORDER {
            return Status::LowOrder;
        }
        Status::Converging
    }
}

type Key = (String, Option<u64>, Option<usize>);

fn key(r: &CheckResult) -> Key {
    (
        r.name.clone(),
        r.metadata.eps.map(f64::to_bits),
        r.metadata.k,
    )
}

/// Runs the checks on `levels` doubled grids and groups the results.
pub fn study(args: &ConvergenceArgs) -> CliResult<Vec<Series>> {
    if args.levels < 3 {
        return Err(CliError::Usage(format!(
            "a convergence study needs at least 3 levels, got {}",
            args.levels
        )));
    }
    let base = args.shape.grid(args.grid.as_deref(), (32, 64))?;
    let req = args.checks.request(args.shape.n)?;
    let mut order: Vec<Key> = Vec::new();
    let mut series: BTreeMap<Key, Series> = BTreeMap::new();
    for level in 0..args.levels {
        let grid = base.refined(1 << level)?;
        let s = args.shape.generate(grid)?;
        let geom = build_geometry(&s)?;
        let label = match grid {
            hk_core::hypersurface::SphereGrid::Sphere { n_phi, n_theta } => {
                format!("{n_phi}x{n_theta}")
            }
            hk_core::hypersurface::SphereGrid::Circle { n_theta } => n_theta.to_string(),
        };
        for r in run_checks(&s, &geom, &req)? {
            let entry = series.entry(key(&r)).or_insert_with(|| {
                order.push(key(&r));
                Series {
                    name: r.name.clone(),
                    eps: r.metadata.eps,
                    k: r.metadata.k,
                    kinds: Vec::new(),
                    h: Vec::new(),
                    grids: Vec::new(),
                    residual: Vec::new(),
                }
            });
            entry.kinds.push(r.metadata.kind);
            entry.h.push(r.metadata.h);
            entry.grids.push(label.clone());
            entry.residual.push(r.rel_residual.abs());
        }
    }
    Ok(order
        .into_iter()
        .filter_map(|k| series.remove(&k))
        .collect())
}

pub fn to_csv(series: &[Series], floor: f64) -> String {
    let mut out = String::from("check,eps,k,level,grid,h,rel_residual,order,fitted_order,status\n");
    for s in series {
        let orders = s.pairwise_orders();
        let status = s.status(floor);
        let shown = |p: f64| {
            if status == Status::Floor {
                String::new()
            } else {
                fmt17(p)
            }
        };
        let fitted = shown(s.fitted_order());
        let status = status.label();
        for l in 0..s.h.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                s.name,
                s.eps.map_or(String::new(), |e| e.to_string()),
                s.k.map_or(String::new(), |k| k.to_string()),
                l,
                s.grids[l],
                fmt17(s.h[l]),
                fmt17(s.residual[l]),
                if l == 0 {
                    String::new()
                } else {
                    shown(orders[l - 1])
                },
                fitted,
                status
            );
        }
    }
    out
}

pub fn convergence(args: &ConvergenceArgs) -> CliResult<u8> {
    let series = study(args)?;
    let floor = ToleranceTable::defaults().floor;
    if let Some(out) = &args.out {
        write_atomic(out, to_csv(&series, floor).as_bytes())?;
    }
    println!(
        "{:<22} {:>5} {:>2}  {:>11} {:>11} {:>11}  {:>6}  status",
        "check", "eps", "k", "coarsest", "middle", "finest", "order"
    );
    let mut code = exit::PASS;
    for s in &series {
        let status = s.status(floor);
        let last = s.residual.len() - 1;
        println!(
            "{:<22} {:>5} {:>2}  {:>11.4e} {:>11.4e} {:>11.4e}  {:>6}  {}",
            s.name,
            s.eps.map_or("-".to_string(), |e| e.to_string()),
            s.k.map_or("-".to_string(), |k| k.to_string()),
            s.residual[0],
            s.residual[last / 2],
            s.residual[last],
            if status == Status::Floor {
                "-".to_string()
            } else {
                format!("{:.2}", s.fitted_order())
            },
            status.label()
        );
        code = match (status, code) {
            (Status::NonMonotone, _) => exit::CONVERGENCE_ANOMALY,
            (Status::LowOrder, exit::PASS) => exit::CHECK_FAILED,
            (_, c) => c,
        };
    }
    Ok(code)
}
