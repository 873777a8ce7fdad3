use hk_core::hypersurface::build_geometry;
use hk_core::identities::{
    run_checks, CheckRequest, CheckResult, Provenance, SurfaceDescriptor, VerificationReport,
};
use hk_core::normalflow::{verify_flow, FlowConfig};
use hk_core::tolerances::Tolerance;
use serde_json::json;

use crate::args::{CheckArgs, FlowArgs, GenArgs, VerifyArgs};
use crate::error::{exit, CliError, CliResult};
use crate::output::{read_surface, sha256_hex, unix_timestamp, write_atomic};

pub fn gen(args: &GenArgs) -> CliResult<u8> {
    let grid = args.shape.grid(args.grid.as_deref(), (128, 256))?;
    let s = args.shape.generate(grid)?;
    let geom = build_geometry(&s)?;
    write_atomic(&args.out, s.to_json()?.as_bytes())?;
    let (_, h_min) = geom.min_mean_curvature();
    println!("wrote {} ({} nodes)", args.out.display(), s.rho().len());
    println!(
        "  kappa range       [{:.9e}, {:.9e}]",
        geom.min_kappa(),
        geom.max_kappa()
    );
    println!("  min H - n         {:.9e}", h_min - s.n() as f64);
    println!("  umbilicity spread {:.9e}", geom.umbilicity_spread());
    Ok(exit::PASS)
}

impl CheckArgs {
    pub fn request(&self, n: usize) -> CliResult<CheckRequest> {
        let mut req = CheckRequest::all(n);
        if let Some(checks) = &self.checks {
            req.checks = checks.iter().map(|c| c.trim().to_string()).collect();
        }
        if let Some(eps) = &self.eps {
            if let Some(e) = eps.iter().find(|e| !(0.0..=1.0).contains(*e)) {
                return Err(CliError::Usage(format!(
                    "--eps values lie in [0, 1], got {e}"
                )));
            }
            req.eps = eps.clone();
        }
        if let Some(k) = &self.k {
            if let Some(bad) = k.iter().find(|k| !(1..=n).contains(*k)) {
                return Err(CliError::Usage(format!(
                    "--k values lie in 1..={n}, got {bad}"
                )));
            }
            req.k = k.clone();
        }
        req.tol = self.tol;
        Ok(req)
    }
}

fn tol_label(tol: Tolerance) -> serde_json::Value {
    match tol {
        Tolerance::Auto => json!("auto"),
        Tolerance::Relative(t) => json!(t),
    }
}

pub fn print_table(results: &[CheckResult]) {
    println!(
        "{:<22} {:>5} {:>2} {:>10} {:>24} {:>24} {:>11} {:>11}  result",
        "check", "eps", "k", "kind", "lhs", "rhs", "rel_resid", "tol"
    );
    for r in results {
        let m = &r.metadata;
        let eps = m.eps.map_or("-".to_string(), |e| format!("{e}"));
        let k = m.k.map_or("-".to_string(), |k| k.to_string());
        let kind = serde_json::to_value(m.kind)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        let verdict = match (r.pass, m.equality) {
            (false, _) => "FAIL",
            (true, Some(false)) => "pass (strict)",
            (true, Some(true)) => "pass (equality)",
            (true, None) => "pass",
        };
        println!(
            "{:<22} {:>5} {:>2} {:>10} {:>24.16e} {:>24.16e} {:>11.4e} {:>11.4e}  {}",
            r.name, eps, k, kind, r.lhs, r.rhs, r.rel_residual, r.tolerance, verdict
        );
    }
}

pub fn verify(args: &VerifyArgs) -> CliResult<u8> {
    let (s, bytes) = read_surface(&args.surface)?;
    let req = args.checks.request(s.n())?;
    let geom = build_geometry(&s)?;
    let checks = run_checks(&s, &geom, &req)?;
    let config = json!({
        "command": "verify",
        "surface_sha256": sha256_hex(&bytes),
        "checks": req.checks,
        "eps": req.eps,
        "k": req.k,
        "tol": tol_label(req.tol),
    });
    let report = VerificationReport {
        surface: SurfaceDescriptor::of(&s),
        checks,
        provenance: Provenance {
            config_hash: sha256_hex(config.to_string().as_bytes()),
            timestamp: unix_timestamp(),
        },
    };
    print_table(&report.checks);
    if let Some(out) = &args.out {
        let mut text = serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::Usage(format!("report serialization: {e}")))?;
        text.push('\n');
        write_atomic(out, text.as_bytes())?;
    }
    let failed = report.checks.iter().filter(|c| !c.pass).count();
    if failed == 0 {
        println!("all {} checks passed", report.checks.len());
        Ok(exit::PASS)
    } else {
        println!("{failed} of {} checks failed", report.checks.len());
        Ok(exit::CHECK_FAILED)
    }
}

pub fn flow(args: &FlowArgs) -> CliResult<u8> {
    let (s, _) = read_surface(&args.surface)?;
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let mut cfg = FlowConfig::for_surface(&s);
    cfg.samples = args.samples;
    let trace = verify_flow(&s, &cfg)?;
    let mut csv = Vec::new();
    trace
        .write_csv(&mut csv)
        .map_err(|e| CliError::io(&args.out, e))?;
    write_atomic(&args.out, &csv)?;

    let max_q = trace.q.iter().map(|q| q.abs()).fold(0.0, f64::max);
    println!(
        "wrote {} ({} samples)",
        args.out.display(),
        trace.times.len()
    );
    println!("  focal min         {:.9e}", trace.cut.focal_min);
    println!("  collision         {:.9e}", trace.cut.collision);
    println!("  t_safe            {:.9e}", trace.t_safe);
    println!("  coarea truncation {:.3e}", trace.coarea_truncation);
    println!("  Q(0)              {:.9e}", trace.q[0]);
    println!("  max |Q|           {:.9e}", max_q);
    match trace.first_q_increase() {
        None => println!("  Q non-increasing  yes (slack {:.3e})", trace.q_tolerance),
        Some(j) => println!(
            "  Q non-increasing  NO: Q rises by {:.3e} after t = {:.6} (slack {:.3e})",
            trace.q[j + 1] - trace.q[j],
            trace.times[j],
            trace.q_tolerance
        ),
    }
    println!(
        "  level-set resid   {:.3e} (tol {:.1e}) {}",
        trace.max_levelset_residual(),
        trace.levelset_tol,
        if trace.levelset_ok() {
            "ok"
        } else {
            "EXCEEDED"
        }
    );
    println!(
        "  area decreasing   {}",
        if trace.area_decreasing() { "yes" } else { "NO" }
    );
    Ok(if trace.passed() {
        exit::PASS
    } else {
        exit::CHECK_FAILED
    })
}
