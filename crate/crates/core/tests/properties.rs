use fused_sage::bench::{read_records, BenchRecord, CSV_HEADER};
use fused_sage::data::{synth_features, synth_labels};
use fused_sage::graph::{gen_uniform, CsrGraph};
use fused_sage::ops::{fused_1hop_forward, fused_2hop_forward, fused_2hop_forward_nosave};
use fused_sage::sampler::{sample_neighbors_reservoir, PAD};
use fused_sage::train::{train_step, AdamWConfig, Fanout, StepOptions, TrainState, Variant};
use fused_sage::{build_csr, FeatureMatrix, MemoryMeter, RngStream, SeedBatch};
use proptest::prelude::*;

fn graph() -> impl Strategy<Value = CsrGraph> {
    (2usize..80).prop_flat_map(|n| {
        prop::collection::vec((0..n as u32, 0..n as u32), 0..n * 8)
            .prop_map(move |edges| build_csr(&edges, n, true).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn samples_are_distinct_neighbors(g in graph(), k in 1usize..12, seed in any::<u64>()) {
        for u in 0..g.num_nodes() as u32 {
            let mut s = RngStream::derive(seed, u as u64, 0, 0);
            let got = sample_neighbors_reservoir(&g, u, k, &mut s);
            prop_assert_eq!(got.len(), g.degree(u).min(k));
            let mut sorted = got.clone();
            sorted.sort_unstable();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), got.len());
            prop_assert!(got.iter().all(|&v| g.has_edge(u, v)));
        }
    }

    #[test]
    fn padding_is_a_suffix_and_takes_are_capped(g in graph(), k1 in 1usize..8, k2 in 1usize..8, seed in any::<u64>()) {
        let n = g.num_nodes();
        let x = FeatureMatrix::<f64>::zeros(n, 1);
        let batch = SeedBatch::new((0..n as u32).collect(), n).unwrap();
        let (_, idx) = fused_2hop_forward(&g, &x, &batch, k1, k2, seed, true, &MemoryMeter::disabled()).unwrap();
        let idx = idx.unwrap();
        for r in 0..n {
            let first = idx.first_hop(r);
            let valid = first.iter().take_while(|&&v| v != PAD).count();
            prop_assert!(first[valid..].iter().all(|&v| v == PAD));
            prop_assert_eq!(valid, g.degree(r as u32).min(k1));
            for j in 0..k1 {
                let slot = idx.slot(r, j);
                if first[j] == PAD {
                    prop_assert!(slot.iter().all(|&v| v == PAD));
                } else {
                    let deg = g.degree(first[j] as u32);
                    prop_assert_eq!(slot.iter().filter(|&&v| v != PAD).count(), deg.min(k2));
                }
            }
        }
    }

    #[test]
    fn forward_is_linear_in_features(g in graph(), a in -3.0f64..3.0, seed in any::<u64>()) {
        let n = g.num_nodes();
        let x = synth_features::<f64>(n, 3, seed);
        let y = synth_features::<f64>(n, 3, seed ^ 1);
        let z = FeatureMatrix::new(n, 3, x.values().iter().zip(y.values()).map(|(p, q)| a * p + q).collect()).unwrap();
        let batch = SeedBatch::new((0..n as u32).collect(), n).unwrap();
        let m = MemoryMeter::disabled();
        let fx = fused_2hop_forward_nosave(&g, &x, &batch, 4, 3, seed, &m).unwrap();
        let fy = fused_2hop_forward_nosave(&g, &y, &batch, 4, 3, seed, &m).unwrap();
        let fz = fused_2hop_forward_nosave(&g, &z, &batch, 4, 3, seed, &m).unwrap();
        for ((p, q), r) in fx.values().iter().zip(fy.values()).zip(fz.values()) {
            prop_assert!((a * p + q - r).abs() <= 1e-12);
        }
    }

    #[test]
    fn meter_balances_after_forward(g in graph(), k in 1usize..8, seed in any::<u64>()) {
        let n = g.num_nodes();
        let x = synth_features::<f32>(n, 4, seed);
        let batch = SeedBatch::new((0..n as u32).collect(), n).unwrap();
        let m = MemoryMeter::new();
        {
            let (out, idx) = fused_1hop_forward(&g, &x, &batch, k, seed, true, &m).unwrap();
            let held = out.values().len() * 4 + idx.as_ref().map_or(0, |i| (i.samples().len() + i.takes().len()) * 4);
            prop_assert!(m.current() >= held as u64);
        }
        prop_assert_eq!(m.current(), 0);
    }

    #[test]
    fn bench_rows_round_trip(ms in prop::collection::vec(0.001f64..1e4, 3), peak in any::<u64>(), dedup in any::<bool>()) {
        let mut sorted = ms.clone();
        sorted.sort_by(f64::total_cmp);
        let rec = BenchRecord {
            dataset: "synth:powerlaw:N=100,deg=4,exp=2.1,seed=1".into(),
            variant: Variant::Fused,
            k1: 15, k2: 10, batch: 1024, repeat: 2, base_seed: 44, steps: 30, warmup: 5,
            elem_bits: 32, dedup, d_feat: 256, hidden: 256, classes: 16,
            step_ms_median: sorted[1], step_ms_p10: sorted[0], step_ms_p90: sorted[2],
            sampled_pairs_per_s: 1e6 / sorted[1], peak_transient_bytes: peak,
            timestamp_iso8601: "2026-01-01T00:00:00.000Z".into(),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let mut w = csv::Writer::from_path(&path).unwrap();
        w.serialize(&rec).unwrap();
        drop(w);
        let text = std::fs::read_to_string(&path).unwrap();
        prop_assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        prop_assert_eq!(read_records(&path).unwrap(), vec![rec]);
    }
}

#[test]
fn train_step_is_deterministic_for_both_variants() {
    let g = gen_uniform(300, 6, 2).unwrap();
    let x = synth_features::<f64>(300, 6, 3);
    let labels = synth_labels(&x, 3, 4);
    for variant in [Variant::Fused, Variant::Baseline] {
        let run = || {
            let mut st = TrainState::<f64>::new(6, 12, 3, 9, AdamWConfig::default());
            let mut losses = Vec::new();
            for step in 0..5u32 {
                let seeds: Vec<u32> = (step * 40..step * 40 + 40).collect();
                let y = seeds.iter().map(|&s| labels[s as usize]).collect();
                let b = SeedBatch::new(seeds, 300).unwrap().with_labels(y).unwrap();
                let opts = StepOptions {
                    variant,
                    fanout: Fanout::TwoHop(4, 3),
                    base_seed: u64::from(step),
                    dedup: true,
                    feature_grad: false,
                };
                losses.push(train_step(&g, &x, &b, &opts, &mut st, &MemoryMeter::disabled()).unwrap().loss.to_bits());
            }
            (losses, st.params.flatten().iter().map(|v| v.to_bits()).collect::<Vec<_>>())
        };
        assert_eq!(run(), run());
    }
}
