//! The unfused comparator: sample, materialize id blocks and gathered
//! feature tensors, then aggregate from the gathered copy.
//!
//! Sampling reuses the fused operator's sampler and streams so the two
//! pipelines differ only in materialization. Every intermediate tensor is
//! registered with the meter.

use rayon::prelude::*;

use super::fused::{sample_one_hop, sample_two_hop};
use super::{check_inputs, grad_dim, AggregatedOutput, GradBuffer, SampledIndices1, SampledIndices2};
use crate::data::{FeatureMatrix, SeedBatch};
use crate::error::{Error, Result};
use crate::graph::CsrGraph;
use crate::meter::{MemoryMeter, TrackedVec};
use crate::sampler::PAD;
use crate::scalar::Scalar;

/// Gathered feature rows for the last hop.
#[derive(Debug)]
pub enum Gathered<T> {
    /// One row per sample slot; padded slots hold zero rows.
    PerSlot(TrackedVec<T>),
    /// Each distinct node gathered once, plus a slot -> unique-row map
    /// (`-1` for padded slots).
    Dedup {
        unique_ids: TrackedVec<u32>,
        slot_to_unique: TrackedVec<i32>,
        rows: TrackedVec<T>,
    },
}

impl<T> Gathered<T> {
    pub fn tracked_bytes(&self) -> u64 {
        match self {
            Gathered::PerSlot(rows) => rows.tracked_bytes(),
            Gathered::Dedup {
                unique_ids,
                slot_to_unique,
                rows,
            } => unique_ids.tracked_bytes() + slot_to_unique.tracked_bytes() + rows.tracked_bytes(),
        }
    }

    #[inline]
    fn row(&self, slot: usize, dim: usize) -> Option<&[T]> {
        match self {
            Gathered::PerSlot(rows) => Some(&rows[slot * dim..(slot + 1) * dim]),
            Gathered::Dedup {
                slot_to_unique, rows, ..
            } => {
                let u = slot_to_unique[slot];
                (u != PAD).then(|| &rows[u as usize * dim..(u as usize + 1) * dim])
            }
        }
    }
}

/// Block ids in the same layout as the fused operator's saved indices.
#[derive(Debug)]
pub enum BlockIds {
    OneHop(SampledIndices1),
    TwoHop(SampledIndices2),
}

/// Everything the baseline materializes between sampling and aggregation.
#[derive(Debug)]
pub struct MaterializedBlock<T> {
    ids: BlockIds,
    gathered: Option<Gathered<T>>,
}

impl<T> MaterializedBlock<T> {
    pub fn ids(&self) -> &BlockIds {
        &self.ids
    }

    pub fn one_hop_ids(&self) -> Option<&SampledIndices1> {
        match &self.ids {
            BlockIds::OneHop(idx) => Some(idx),
            BlockIds::TwoHop(_) => None,
        }
    }

    pub fn two_hop_ids(&self) -> Option<&SampledIndices2> {
        match &self.ids {
            BlockIds::TwoHop(idx) => Some(idx),
            BlockIds::OneHop(_) => None,
        }
    }

    pub fn gathered(&self) -> Option<&Gathered<T>> {
        self.gathered.as_ref()
    }

    /// Drop the gathered features; backward only needs the ids.
    pub fn release_features(&mut self) {
        self.gathered = None;
    }

    pub fn sampled_pairs(&self) -> u64 {
        match &self.ids {
            BlockIds::OneHop(idx) => idx.sampled_pairs(),
            BlockIds::TwoHop(idx) => idx.sampled_pairs(),
        }
    }
}

fn gather<T: Scalar>(x: &FeatureMatrix<T>, slots: &[i32], dedup: bool, meter: &MemoryMeter) -> Gathered<T> {
    let dim = x.dim();
    if !dedup {
        let mut rows = meter.filled(slots.len() * dim, T::zero());
        rows.par_chunks_mut(dim).zip(slots.par_iter()).for_each(|(row, &id)| {
            if id != PAD {
                row.copy_from_slice(x.row(id as u32));
            }
        });
        return Gathered::PerSlot(rows);
    }
    let mut ids: Vec<u32> = slots.iter().filter(|&&v| v != PAD).map(|&v| v as u32).collect();
    ids.par_sort_unstable();
    ids.dedup();
    let unique_ids = meter.track(ids);
    let mut slot_to_unique = meter.filled(slots.len(), PAD);
    slot_to_unique.par_iter_mut().zip(slots.par_iter()).for_each(|(m, &id)| {
        if id != PAD {
            *m = unique_ids.binary_search(&(id as u32)).expect("id collected above") as i32;
        }
    });
    let mut rows = meter.filled(unique_ids.len() * dim, T::zero());
    rows.par_chunks_mut(dim)
        .zip(unique_ids.par_iter())
        .for_each(|(row, &id)| row.copy_from_slice(x.row(id)));
    Gathered::Dedup {
        unique_ids,
        slot_to_unique,
        rows,
    }
}

/// Unfused 2-hop pipeline. The returned block keeps the gathered second-hop
/// features alive; call [`MaterializedBlock::release_features`] once they
/// are no longer needed.
#[allow(clippy::too_many_arguments)]
pub fn baseline_forward<T: Scalar>(
    graph: &CsrGraph,
    x: &FeatureMatrix<T>,
    roots: &SeedBatch,
    k1: usize,
    k2: usize,
    base_seed: u64,
    meter: &MemoryMeter,
    dedup: bool,
) -> Result<(AggregatedOutput<T>, MaterializedBlock<T>)> {
    check_inputs(graph, x, roots, &[k1, k2])?;
    let batch = roots.len();
    let dim = x.dim();
    let nodes = roots.seeds();

    // sample
    let mut hop1 = meter.filled(batch * k1, PAD);
    let mut hop2 = meter.filled(batch * k1 * k2, PAD);
    hop1.par_chunks_mut(k1)
        .zip(hop2.par_chunks_mut(k1 * k2))
        .enumerate()
        .for_each(|(pos, (s1, s2))| sample_two_hop(graph, nodes[pos], pos, base_seed, s1, s2));

    // materialize
    let gathered = gather(x, &hop2, dedup, meter);

    // aggregate
    let mut out = meter.filled(batch * dim, T::zero());
    let _scratch = meter.scope((rayon::current_num_threads() * dim * T::BYTES) as u64);
    out.par_chunks_mut(dim).enumerate().for_each_init(
        || vec![T::zero(); dim],
        |inner, (r, row)| {
            let first = &hop1[r * k1..(r + 1) * k1];
            let mut valid_u = 0usize;
            for (j, &u) in first.iter().enumerate() {
                if u == PAD {
                    continue;
                }
                valid_u += 1;
                inner.fill(T::zero());
                let mut valid_w = 0usize;
                for t in 0..k2 {
                    let slot = (r * k1 + j) * k2 + t;
                    if hop2[slot] == PAD {
                        continue;
                    }
                    let g = gathered.row(slot, dim).expect("valid slot has a gathered row");
                    for (a, &v) in inner.iter_mut().zip(g) {
                        *a = *a + v;
                    }
                    valid_w += 1;
                }
                let k2_eff = T::from_count(valid_w.max(1));
                for (o, &a) in row.iter_mut().zip(inner.iter()) {
                    *o = *o + a / k2_eff;
                }
            }
            let k1_eff = T::from_count(valid_u.max(1));
            row.iter_mut().for_each(|o| *o = *o / k1_eff);
        },
    );

    let ids = BlockIds::TwoHop(SampledIndices2::from_tracked(batch, k1, k2, hop1, hop2));
    Ok((
        AggregatedOutput::new(batch, dim, out),
        MaterializedBlock {
            ids,
            gathered: Some(gathered),
        },
    ))
}

/// Unfused 1-hop pipeline (per-slot gather).
pub fn baseline_1hop_forward<T: Scalar>(
    graph: &CsrGraph,
    x: &FeatureMatrix<T>,
    seeds: &SeedBatch,
    k: usize,
    base_seed: u64,
    meter: &MemoryMeter,
) -> Result<(AggregatedOutput<T>, MaterializedBlock<T>)> {
    check_inputs(graph, x, seeds, &[k])?;
    let batch = seeds.len();
    let dim = x.dim();
    let nodes = seeds.seeds();

    let mut samples = meter.filled(batch * k, PAD);
    let mut takes = meter.filled(batch, 0i32);
    samples
        .par_chunks_mut(k)
        .zip(takes.par_iter_mut())
        .enumerate()
        .for_each(|(pos, (slots, take))| *take = sample_one_hop(graph, nodes[pos], pos, base_seed, slots) as i32);

    let gathered = gather(x, &samples, false, meter);

    let mut out = meter.filled(batch * dim, T::zero());
    out.par_chunks_mut(dim).enumerate().for_each(|(i, row)| {
        let take = takes[i] as usize;
        for t in 0..take {
            let g = gathered.row(i * k + t, dim).expect("per-slot rows");
            for (o, &v) in row.iter_mut().zip(g) {
                *o = *o + v;
            }
        }
        let denom = T::from_count(take.max(1));
        row.iter_mut().for_each(|o| *o = *o / denom);
    });

    let ids = BlockIds::OneHop(SampledIndices1::from_tracked(batch, k, samples, takes));
    Ok((
        AggregatedOutput::new(batch, dim, out),
        MaterializedBlock {
            ids,
            gathered: Some(gathered),
        },
    ))
}

/// Adjoint of the materialized pipeline: build the gradient of the gathered
/// tensor slot by slot, then scatter it into the features in slot order.
pub fn baseline_backward<T: Scalar>(
    grad_out: &[T],
    block: &MaterializedBlock<T>,
    num_nodes: usize,
    meter: &MemoryMeter,
) -> Result<GradBuffer<T>> {
    // (slot id, grad_out row, denominator) for every gathered slot
    let (batch, ids, denoms): (usize, &[i32], Vec<(usize, usize)>) = match &block.ids {
        BlockIds::OneHop(idx) => {
            idx.check_nodes(num_nodes)?;
            let k = idx.fanout();
            let d = (0..idx.batch() * k)
                .map(|s| (s / k, (idx.takes()[s / k] as usize).max(1)))
                .collect();
            (idx.batch(), idx.samples(), d)
        }
        BlockIds::TwoHop(idx) => {
            idx.check_nodes(num_nodes)?;
            let (k1, k2) = idx.fanouts();
            let d = (0..idx.batch() * k1 * k2)
                .map(|s| {
                    let (r, j) = (s / (k1 * k2), s / k2 % k1);
                    (r, idx.k1_eff(r) * idx.k2_eff(r, j))
                })
                .collect();
            (idx.batch(), idx.s2(), d)
        }
    };
    let dim = grad_dim(grad_out, batch)?;
    if ids.len() != denoms.len() {
        return Err(Error::InvalidIndices("block shape mismatch".into()));
    }

    let mut grad_gathered = meter.filled(ids.len() * dim, T::zero());
    for (slot, row) in grad_gathered.chunks_mut(dim).enumerate() {
        if ids[slot] == PAD {
            continue;
        }
        let (r, denom) = denoms[slot];
        let denom = T::from_count(denom);
        for (g, &up) in row.iter_mut().zip(&grad_out[r * dim..(r + 1) * dim]) {
            *g = up / denom;
        }
    }

    let mut grad = GradBuffer::zeros(num_nodes, dim, meter);
    let values = grad.values_mut();
    for (slot, row) in grad_gathered.chunks(dim).enumerate() {
        let id = ids[slot];
        if id == PAD {
            continue;
        }
        let dst = &mut values[id as usize * dim..(id as usize + 1) * dim];
        for (g, &v) in dst.iter_mut().zip(row) {
            *g = *g + v;
        }
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth_features;
    use crate::graph::{build_csr, gen_power_law};
    use crate::ops::{fused_1hop_backward, fused_1hop_forward, fused_2hop_backward, fused_2hop_forward};

    #[test]
    fn one_hop_short_rows_are_exact_means() {
        let g = build_csr(&[(0, 1), (0, 2), (1, 2)], 3, true).unwrap();
        let x = FeatureMatrix::new(3, 1, vec![1.0f64, 2.0, 6.0]).unwrap();
        let seeds = SeedBatch::new(vec![0, 1, 2], 3).unwrap();
        let (out, _) = baseline_1hop_forward(&g, &x, &seeds, 4, 0, &MemoryMeter::disabled()).unwrap();
        assert_eq!(out.values(), &[4.0, 3.5, 1.5]);
    }

    #[test]
    fn unit_fanout_block_shapes() {
        let g = gen_power_law(50, 4.0, 2.1, 1).unwrap();
        let x = synth_features::<f32>(50, 3, 0);
        let roots = SeedBatch::new(vec![0], 50).unwrap();
        let (_, block) = baseline_forward(&g, &x, &roots, 1, 1, 0, &MemoryMeter::disabled(), false).unwrap();
        let ids = block.two_hop_ids().unwrap();
        assert_eq!(ids.s1().len(), 1);
        assert_eq!(ids.s2().len(), 1);
        match block.gathered().unwrap() {
            Gathered::PerSlot(rows) => assert_eq!(rows.len(), 3),
            Gathered::Dedup { .. } => panic!("expected per-slot gather"),
        }
    }

    #[test]
    fn matches_fused_both_hops() {
        let m = MemoryMeter::disabled();
        let g = gen_power_law(300, 9.0, 2.2, 3).unwrap();
        let x = synth_features::<f64>(300, 4, 2);
        let roots = SeedBatch::new((0..50).map(|i| (i * 13) % 300).collect(), 300).unwrap();
        for dedup in [false, true] {
            let (fo, fi) = fused_2hop_forward(&g, &x, &roots, 5, 3, 21, true, &m).unwrap();
            let (bo, block) = baseline_forward(&g, &x, &roots, 5, 3, 21, &m, dedup).unwrap();
            assert!(fo.bitwise_eq(&bo));
            assert_eq!(fi.as_ref(), block.two_hop_ids());
            let grad_out: Vec<f64> = (0..200).map(|i| (i as f64).cos()).collect();
            let fg = fused_2hop_backward(&grad_out, fi.as_ref(), 50, 300, &m).unwrap();
            let bg = baseline_backward(&grad_out, &block, 300, &m).unwrap();
            assert!(fg.bitwise_eq(&bg));
        }
        let (fo, fi) = fused_1hop_forward(&g, &x, &roots, 6, 4, true, &m).unwrap();
        let (bo, block) = baseline_1hop_forward(&g, &x, &roots, 6, 4, &m).unwrap();
        assert!(fo.bitwise_eq(&bo));
        let grad_out = vec![0.5f64; 200];
        let fg = fused_1hop_backward(&grad_out, fi.as_ref(), 50, 300, &m).unwrap();
        let bg = baseline_backward(&grad_out, &block, 300, &m).unwrap();
        assert!(fg.bitwise_eq(&bg));
    }

    #[test]
    fn zero_grad_out_gives_zero_grad() {
        let m = MemoryMeter::disabled();
        let g = gen_power_law(100, 5.0, 2.1, 3).unwrap();
        let x = synth_features::<f64>(100, 2, 2);
        let roots = SeedBatch::new((0..10).collect(), 100).unwrap();
        let (_, block) = baseline_forward(&g, &x, &roots, 3, 3, 0, &m, false).unwrap();
        let grad = baseline_backward(&[0.0f64; 20], &block, 100, &m).unwrap();
        assert!(grad.is_zero());
    }

    #[test]
    fn gathered_bytes_dominate_the_peak() {
        let g = gen_power_law(2000, 30.0, 2.1, 3).unwrap();
        let x = synth_features::<f32>(2000, 16, 2);
        let roots = SeedBatch::new((0..64).collect(), 2000).unwrap();
        let m = MemoryMeter::new();
        let (out, mut block) = baseline_forward(&g, &x, &roots, 5, 4, 0, &m, false).unwrap();
        assert!(m.peak() >= (64 * 5 * 4 * 16 * 4) as u64);
        block.release_features();
        assert!(block.gathered().is_none());
        drop((out, block));
        assert_eq!(m.current(), 0);

        let dm = MemoryMeter::new();
        let (_, block) = baseline_forward(&g, &x, &roots, 5, 4, 0, &dm, true).unwrap();
        let Some(Gathered::Dedup { unique_ids, .. }) = block.gathered() else {
            panic!("expected dedup gather")
        };
        assert!(unique_ids.len() <= 64 * 20);
        assert!(unique_ids.windows(2).all(|w| w[0] < w[1]));
    }
}
