// Scratch probe for check headroom; removed before finalizing.
use elicit_core::verify;

fn main() {
    let t = std::time::Instant::now();
    for seed in [1u64, 2, 3, 42, 99] {
        let fu = verify::fast_update_check(20, seed);
        println!("seed {seed}: fast_update max_tv = {:.5} passed={}", fu.max_tv, fu.passed);
    }
    println!("fast_update probes took {:?}", t.elapsed());

    let t = std::time::Instant::now();
    let mc = verify::analytic_vs_mc_check(100, 100_000, 42);
    println!(
        "analytic_vs_mc: within={}/100 passed={} took {:?}",
        mc.within,
        mc.passed,
        t.elapsed()
    );
    for tr in mc.trials.iter().take(8) {
        println!(
            "  k={} analytic={:+.6} mc={:+.6} se={:.6} ok={}",
            tr.k, tr.analytic, tr.mc_mean, tr.mc_stderr, tr.within_three_se
        );
    }

    let t = std::time::Instant::now();
    let dm = verify::dirichlet_moment_check(20, 200_000, 42);
    println!(
        "dirichlet_moment: max_mode_err={:.2e} passed={} took {:?}",
        dm.max_mode_err,
        dm.passed,
        t.elapsed()
    );
    let worst = dm.trials.iter().map(|t| t.elog_max_se).fold(0.0f64, f64::max);
    println!("  worst elog deviation = {worst:.2} se");
}
