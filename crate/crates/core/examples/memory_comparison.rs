//! Peak transient memory of one training step, fused against the
//! materializing baseline, for a few fanouts.
//!
//! ```text
//! cargo run --release --example memory_comparison
//! ```

use fused_sage::data::{synth_features, synth_labels};
use fused_sage::graph::gen_power_law;
use fused_sage::train::{train_step, AdamWConfig, Fanout, StepOptions, TrainState, Variant};
use fused_sage::{MemoryMeter, SeedBatch};

fn main() -> fused_sage::Result<()> {
    let n = 30_000;
    let graph = gen_power_law(n, 20.0, 2.1, 42)?;
    let x = synth_features::<f32>(n, 256, 1);
    let labels = synth_labels(&x, 16, 2);
    let seeds: Vec<u32> = (0..1024).collect();
    let batch_labels = seeds.iter().map(|&s| labels[s as usize]).collect();
    let batch = SeedBatch::new(seeds, n)?.with_labels(batch_labels)?;

    println!("{:<10} {:>14} {:>14} {:>8}", "fanout", "baseline", "fused", "ratio");
    for (k1, k2) in [(10, 10), (15, 10), (25, 10)] {
        let mut peaks = [0u64; 2];
        for (i, variant) in [Variant::Baseline, Variant::Fused].into_iter().enumerate() {
            let mut state = TrainState::<f32>::new(256, 256, 16, 42, AdamWConfig::default());
            let meter = MemoryMeter::new();
            let opts = StepOptions {
                variant,
                fanout: Fanout::TwoHop(k1, k2),
                base_seed: 1,
                dedup: false,
                feature_grad: false,
            };
            train_step(&graph, &x, &batch, &opts, &mut state, &meter)?;
            peaks[i] = meter.peak();
        }
        println!(
            "({k1},{k2})    {:>14} {:>14} {:>7.1}x",
            peaks[0],
            peaks[1],
            peaks[0] as f64 / peaks[1] as f64
        );
    }
    Ok(())
}
