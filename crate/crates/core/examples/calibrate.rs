//! Calibration probe behind the acceptance thresholds: prints the
//! level-by-level energies, hitting estimates and experiment estimates that
//! the committed floors and ceilings were read off from. Rerun with
//!
//! ```text
//! cargo run --release -p infobridge --example calibrate
//! ```

use infobridge::hitting::hitting_vs_level_report;
use infobridge::potential::capacity_estimate;
use infobridge::predict::predictability_experiment;
use infobridge::timelaw::Atom;
use infobridge::{DefaultLaw, SetDescriptor};

fn main() {
    let n_paths = 10_000;

    println!("== energies: cantor(2, 0.2) on [0.2, 0.8], s = 1/2, levels 2..8");
    let thin = SetDescriptor::cantor(0.2, 0.8, 2, 0.2).unwrap();
    for k in 2..=8 {
        let r = capacity_estimate(&thin, 0.5, k, 1e-9).unwrap();
        println!(
            "  k={k}: energy {:.6} capacity {:.6} iters {} converged {}",
            r.energy, r.capacity, r.iterations, r.converged
        );
    }

    println!("== energies: cantor(2, 0.45) on [0.2, 0.8], s = 1/2, levels 2..8");
    let fat = SetDescriptor::cantor(0.2, 0.8, 2, 0.45).unwrap();
    let mut prev = 0.0;
    for k in 2..=8 {
        let r = capacity_estimate(&fat, 0.5, k, 1e-9).unwrap();
        println!(
            "  k={k}: energy {:.6} rel-change {:.4} capacity {:.6}",
            r.energy,
            (r.energy - prev) / prev,
            r.capacity
        );
        prev = r.energy;
    }

    println!("== hitting: cantor(2, 0.2) in (0,1], r = 1, deep levels, {n_paths} paths");
    for est in
        hitting_vs_level_report(&thin, 1.0, &[2, 4, 6, 8, 12, 16, 20, 24, 28], n_paths, 1234)
            .unwrap()
    {
        println!(
            "  k={}: {:.4} ± {:.4} ({} intervals)",
            est.level, est.estimate, est.ci_halfwidth, est.n_intervals
        );
    }

    println!("== hitting: cantor(2, 0.45), r = 1, levels 2,4,6,8, {n_paths} paths");
    for est in hitting_vs_level_report(&fat, 1.0, &[2, 4, 6, 8], n_paths, 1234).unwrap() {
        println!(
            "  k={}: {:.4} ± {:.4} ({} intervals)",
            est.level, est.estimate, est.ci_halfwidth, est.n_intervals
        );
    }

    println!("== experiment: atomic {{1.0, 1.5, 2.0}}, levels 2,4,6,8, {n_paths} paths");
    let atomic = DefaultLaw::atomic(vec![
        Atom { time: 1.0, weight: 1.0 / 3.0 },
        Atom { time: 1.5, weight: 1.0 / 3.0 },
        Atom { time: 2.0, weight: 1.0 / 3.0 },
    ])
    .unwrap();
    let report = predictability_experiment(&atomic, &[2, 4, 6, 8], n_paths, 4242, 0.05).unwrap();
    for est in &report.estimates {
        println!("  k={}: {:.5} ± {:.5}", est.level, est.estimate, est.ci_halfwidth);
    }
    let mix = report.mixture.unwrap();
    println!(
        "  mixture: joint {:.5} vs mixed {:.5} (ci {:.5}, holds {})",
        mix.joint, mix.mixed, mix.combined_ci, mix.holds
    );

    println!("== experiment: cantor-singular(2, 0.2, [1,2]), deep levels, {n_paths} paths");
    let singular = DefaultLaw::cantor_singular(1.0, 2.0, 2, 0.2).unwrap();
    let report = predictability_experiment(
        &singular,
        &[2, 4, 6, 8, 12, 16, 20, 24, 28],
        n_paths,
        4242,
        0.05,
    )
    .unwrap();
    for est in &report.estimates {
        println!("  k={}: {:.5} ± {:.5}", est.level, est.estimate, est.ci_halfwidth);
    }
    println!(
        "  verdict: consistent {} positive {}",
        report.verdict.consistent_with_predictable, report.verdict.positive_hitting
    );

    println!("== experiment: uniform [1,2], levels 2,4,6,8, {n_paths} paths");
    let uniform = DefaultLaw::uniform(1.0, 2.0).unwrap();
    let report = predictability_experiment(&uniform, &[2, 4, 6, 8], n_paths, 4242, 0.05).unwrap();
    for est in &report.estimates {
        println!("  k={}: {:.5} ± {:.5}", est.level, est.estimate, est.ci_halfwidth);
    }
    println!(
        "  verdict: consistent {} positive {}",
        report.verdict.consistent_with_predictable, report.verdict.positive_hitting
    );
}
