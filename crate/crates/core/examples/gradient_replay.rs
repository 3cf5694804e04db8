//! Backward through saved indices, compared with a central difference on
//! a few feature entries.
//!
//! ```text
//! cargo run --example gradient_replay
//! ```

use fused_sage::data::synth_features;
use fused_sage::graph::gen_uniform;
use fused_sage::ops::{fused_2hop_backward, fused_2hop_forward, fused_2hop_forward_nosave};
use fused_sage::{MemoryMeter, SeedBatch};

fn main() -> fused_sage::Result<()> {
    let graph = gen_uniform(40, 3, 5)?;
    let mut x = synth_features::<f64>(40, 3, 6);
    let seeds = SeedBatch::new(vec![0, 7, 7, 21], 40)?;
    let (k1, k2, base) = (3, 2, 11);
    let m = MemoryMeter::disabled();
    let upstream: Vec<f64> = (0..seeds.len() * 3).map(|i| (i as f64 * 0.37).sin()).collect();

    let (_, idx) = fused_2hop_forward(&graph, &x, &seeds, k1, k2, base, true, &m)?;
    let grad = fused_2hop_backward(&upstream, idx.as_ref(), seeds.len(), 40, &m)?;

    let loss = |x: &fused_sage::FeatureMatrix<f64>| -> fused_sage::Result<f64> {
        let y = fused_2hop_forward_nosave(&graph, x, &seeds, k1, k2, base, &m)?;
        Ok(y.values().iter().zip(&upstream).map(|(a, b)| a * b).sum())
    };
    let eps = 1e-6;
    let touched: Vec<usize> = (0..40 * 3).filter(|&i| grad.values()[i] != 0.0).take(5).collect();
    for i in touched {
        let orig = x.values()[i];
        x.values_mut()[i] = orig + eps;
        let plus = loss(&x)?;
        x.values_mut()[i] = orig - eps;
        let minus = loss(&x)?;
        x.values_mut()[i] = orig;
        let fd = (plus - minus) / (2.0 * eps);
        println!(
            "node {} dim {}: analytic {:+.9} numeric {:+.9}",
            i / 3,
            i % 3,
            grad.values()[i],
            fd
        );
    }

    let (_, none) = fused_2hop_forward(&graph, &x, &seeds, k1, k2, base, false, &m)?;
    let zero = fused_2hop_backward(&upstream, none.as_ref(), seeds.len(), 40, &m)?;
    println!("without saved indices the gradient is zero: {}", zero.is_zero());
    Ok(())
}
