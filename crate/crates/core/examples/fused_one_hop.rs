//! One-hop fused sampling and mean aggregation on a hand-made graph.
//!
//! ```text
//! cargo run --example fused_one_hop
//! ```

use fused_sage::ops::fused_1hop_forward;
use fused_sage::{build_csr, FeatureMatrix, MemoryMeter, SeedBatch};

fn main() -> fused_sage::Result<()> {
    // 0 is a hub with four neighbors, 5 is isolated.
    let graph = build_csr(&[(0, 1), (0, 2), (0, 3), (0, 4), (1, 2)], 6, true)?;
    let x = FeatureMatrix::from_fn(6, 2, |v, d| (10 * v + d) as f32)?;
    let seeds = SeedBatch::new(vec![0, 1, 5], graph.num_nodes())?;
    let meter = MemoryMeter::new();

    let (out, idx) = fused_1hop_forward(&graph, &x, &seeds, 2, 7, true, &meter)?;
    let idx = idx.expect("saved");
    for (i, &s) in seeds.seeds().iter().enumerate() {
        println!(
            "seed {s}: sampled {:?} (take {}) -> mean {:?}",
            idx.row(i),
            idx.takes()[i],
            out.row(i)
        );
    }
    println!("sampled pairs: {}", idx.sampled_pairs());
    println!("peak transient bytes: {}", meter.peak());
    Ok(())
}
