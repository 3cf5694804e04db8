//! A short training run with the fused two-hop operator.
//!
//! ```text
//! cargo run --release --example train_loop
//! ```

use fused_sage::bench::BatchSchedule;
use fused_sage::data::{synth_features, synth_labels};
use fused_sage::graph::gen_power_law;
use fused_sage::rng::step_seed;
use fused_sage::train::{train_step, AdamWConfig, Fanout, StepOptions, TrainState, Variant};
use fused_sage::{MemoryMeter, SeedBatch};

fn main() -> fused_sage::Result<()> {
    let graph = gen_power_law(10_000, 15.0, 2.1, 42)?;
    let n = graph.num_nodes();
    let x = synth_features::<f32>(n, 64, 1);
    let labels = synth_labels(&x, 8, 2);
    let mut state = TrainState::<f32>::new(64, 128, 8, 42, AdamWConfig::default());
    let mut schedule = BatchSchedule::new(n, 256, 42);
    let meter = MemoryMeter::disabled();

    for step in 0..200u64 {
        let seeds = schedule.next_seeds();
        let y = seeds.iter().map(|&s| labels[s as usize]).collect();
        let batch = SeedBatch::new(seeds, n)?.with_labels(y)?;
        let opts = StepOptions {
            variant: Variant::Fused,
            fanout: Fanout::TwoHop(15, 10),
            base_seed: step_seed(42, step),
            dedup: false,
            feature_grad: false,
        };
        let r = train_step(&graph, &x, &batch, &opts, &mut state, &meter)?;
        if step % 20 == 0 || step == 199 {
            println!("step {step:>3}  loss {:.4}  pairs {}", r.loss, r.sampled_pairs);
        }
    }
    Ok(())
}
