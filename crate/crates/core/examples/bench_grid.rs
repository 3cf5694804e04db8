//! Run a small benchmark grid into a CSV and summarize it.
//!
//! ```text
//! cargo run --release --example bench_grid
//! ```

use fused_sage::bench::{render_table, report_speedups, run_grid, GridSpec};

fn main() -> fused_sage::Result<()> {
    let out = std::env::temp_dir().join("fused-sage-bench-grid.csv");
    let _ = std::fs::remove_file(&out);

    let mut grid = GridSpec::new(
        vec!["synth:powerlaw:N=20000,deg=15,exp=2.1,seed=42".parse()?],
        vec![(10, 10), (15, 10)],
        vec![512],
    );
    grid.steps = 10;
    grid.warmup = 2;
    grid.d_feat = 128;
    grid.hidden = 128;

    let outcome = run_grid(&grid, &out, |r| {
        println!("{} ({},{}) seed {}: {:.2} ms", r.variant, r.k1, r.k2, r.base_seed, r.step_ms_median);
    })?;
    println!("{} rows in {}\n", outcome.written.len(), out.display());
    print!("{}", render_table(&report_speedups(&out)?));
    Ok(())
}
