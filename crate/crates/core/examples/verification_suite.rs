//! A small randomized suite run, the shape of its report, and the negative
//! control that every sound harness must flag.
//!
//! Run with `cargo run --example verification_suite`.

use zonal_bm::inequalities::{negative_control_operator, run_suite, Family, SuiteConfig};
use zonal_bm::Result;

fn main() -> Result<()> {
    let config = SuiteConfig { trials: 4, grid_resolution: 16, ..SuiteConfig::default() };
    let outcome = run_suite(&config)?;
    let r = &outcome.report;
    println!("{} trials, {} checks, clean = {}", r.total_trials, r.total_checks, r.clean());
    for s in r.families.iter().filter(|s| s.checks > 0) {
        println!(
            "  {:28} {:12} checks {:3}  min margin {:+.2e}  worst equality deviation {:.1e}",
            s.family.name(),
            s.operator,
            s.checks,
            s.min_margin.unwrap_or(f64::NAN),
            s.max_equality_deviation.unwrap_or(0.0)
        );
    }
    println!("first CSV rows:");
    for line in outcome.to_csv()?.lines().take(3) {
        println!("  {line}");
    }

    // the odd profile ğ(t) = t, falsely declared even
    let control = SuiteConfig {
        trials: 2,
        grid_resolution: 12,
        families: vec![Family::MinkowskiType, Family::MeanWidthIdentity],
        bm_ops: vec![negative_control_operator()],
        radial_ops: vec![],
        ..SuiteConfig::default()
    };
    let r = run_suite(&control)?.report;
    println!("negative control: {} violations, {} errors, clean = {}", r.violations, r.errors, r.clean());
    if let Some(f) = r.failures.first() {
        println!("  e.g. {:?} in {}: {}\n  reproduce: {}", f.kind, f.family.name(), f.message, f.reproduce);
    }
    Ok(())
}
