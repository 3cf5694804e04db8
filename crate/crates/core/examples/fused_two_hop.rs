//! Two-hop fused aggregation, then replaying the saved indices to
//! reproduce the output exactly.
//!
//! ```text
//! cargo run --example fused_two_hop
//! ```

use fused_sage::data::synth_features;
use fused_sage::graph::gen_power_law;
use fused_sage::ops::fused_2hop_forward;
use fused_sage::sampler::PAD;
use fused_sage::{MemoryMeter, SeedBatch};

fn main() -> fused_sage::Result<()> {
    let graph = gen_power_law(5_000, 12.0, 2.1, 3)?;
    let x = synth_features::<f32>(graph.num_nodes(), 16, 4);
    let seeds = SeedBatch::new((0..256).collect(), graph.num_nodes())?;
    let (k1, k2) = (10, 5);
    let meter = MemoryMeter::new();

    let (out, idx) = fused_2hop_forward(&graph, &x, &seeds, k1, k2, 99, true, &meter)?;
    let idx = idx.expect("saved");

    let r = (0..seeds.len()).find(|&r| graph.degree(seeds.seeds()[r]) < k1).unwrap_or(0);
    println!("root {} (degree {}):", seeds.seeds()[r], graph.degree(seeds.seeds()[r]));
    for (j, &u) in idx.first_hop(r).iter().enumerate() {
        if u == PAD {
            println!("  slot {j}: padding");
        } else {
            println!("  slot {j}: {u} -> {:?}", idx.slot(r, j));
        }
    }

    let replayed = idx.aggregate(&x, &MemoryMeter::disabled())?;
    println!("replay bitwise equal: {}", replayed.bitwise_eq(&out));
    println!(
        "pairs {} of at most {}, peak transient {} bytes",
        idx.sampled_pairs(),
        seeds.len() * (k1 + k1 * k2),
        meter.peak()
    );
    Ok(())
}
