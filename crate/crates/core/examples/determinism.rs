//! The same sampling and training run on pools of 1, 4 and 8 workers
//! produces bitwise identical indices and parameters.
//!
//! ```text
//! cargo run --example determinism
//! ```

use fused_sage::data::{synth_features, synth_labels};
use fused_sage::graph::gen_power_law;
use fused_sage::ops::fused_2hop_forward;
use fused_sage::rng::step_seed;
use fused_sage::train::{train_step, AdamWConfig, Fanout, StepOptions, TrainState, Variant};
use fused_sage::{MemoryMeter, SeedBatch, Workers};

fn run(workers: usize) -> fused_sage::Result<(Vec<i32>, Vec<f64>)> {
    let graph = gen_power_law(3_000, 10.0, 2.1, 8)?;
    let x = synth_features::<f64>(3_000, 8, 1);
    let labels = synth_labels(&x, 4, 2);
    Workers::new(workers)?.install(|| {
        let seeds = SeedBatch::new((0..128).collect(), 3_000)?;
        let (_, idx) = fused_2hop_forward(&graph, &x, &seeds, 8, 4, 5, true, &MemoryMeter::disabled())?;
        let mut state = TrainState::<f64>::new(8, 16, 4, 1, AdamWConfig::default());
        for step in 0..10 {
            let ids: Vec<u32> = (step * 100..step * 100 + 100).collect();
            let y = ids.iter().map(|&s| labels[s as usize]).collect();
            let batch = SeedBatch::new(ids, 3_000)?.with_labels(y)?;
            let opts = StepOptions {
                variant: Variant::Fused,
                fanout: Fanout::TwoHop(8, 4),
                base_seed: step_seed(5, u64::from(step)),
                dedup: false,
                feature_grad: false,
            };
            train_step(&graph, &x, &batch, &opts, &mut state, &MemoryMeter::disabled())?;
        }
        Ok((idx.expect("saved").s2().to_vec(), state.params.flatten()))
    })
}

fn main() -> fused_sage::Result<()> {
    let (ids, params) = run(1)?;
    for w in [4, 8] {
        let (i, p) = run(w)?;
        let same_params = p.iter().zip(&params).all(|(a, b)| a.to_bits() == b.to_bits());
        println!("{w} workers: indices identical {}, parameters identical {same_params}", i == ids);
    }
    Ok(())
}
