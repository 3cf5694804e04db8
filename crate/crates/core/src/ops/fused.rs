//! Single-pass sampling and mean aggregation.
//!
//! Each seed (1-hop) or root (2-hop) samples its neighborhood into a small
//! buffer and immediately accumulates the corresponding feature rows into
//! its output row; no gathered feature tensor ever exists. Roots are
//! independent, so rows are computed in parallel with bitwise identical
//! results for any worker count.
//!
//! Backward replays the saved ids. Instead of atomic scatter, the
//! contributions are bucketed by destination node (stable in seed order)
//! and every destination row is reduced by one worker, which fixes the
//! summation order independently of the pool size.

use rayon::prelude::*;

use super::{check_inputs, grad_dim, valid_count, AggregatedOutput, GradBuffer, SampledIndices1, SampledIndices2};
use crate::data::{FeatureMatrix, SeedBatch};
use crate::error::Result;
use crate::graph::CsrGraph;
use crate::meter::MemoryMeter;
use crate::rng::RngStream;
use crate::sampler::{sample_into, PAD};
use crate::scalar::Scalar;

/// Hop tags used when deriving sampling streams.
pub(crate) const HOP_ONE_HOP: u32 = 0;
pub(crate) const HOP_FIRST: u32 = 1;
pub(crate) const HOP_SECOND: u32 = 2;

#[inline]
fn add_row<T: Scalar>(acc: &mut [T], row: &[T]) {
    for (a, &x) in acc.iter_mut().zip(row) {
        *a = *a + x;
    }
}

/// Sample one seed's neighborhood into `slots` and write its mean into `out`.
#[inline]
pub(crate) fn sample_one_hop(graph: &CsrGraph, node: u32, pos: usize, base_seed: u64, slots: &mut [i32]) -> usize {
    let mut stream = RngStream::derive(base_seed, pos as u64, HOP_ONE_HOP, 0);
    sample_into(graph, node, &mut stream, slots)
}

/// Sample a root's two-hop neighborhood into `s1` (`k1`) and `s2` (`k1 * k2`).
#[inline]
pub(crate) fn sample_two_hop(
    graph: &CsrGraph,
    node: u32,
    pos: usize,
    base_seed: u64,
    s1: &mut [i32],
    s2: &mut [i32],
) {
    let k2 = s2.len() / s1.len();
    let mut stream = RngStream::derive(base_seed, pos as u64, HOP_FIRST, 0);
    sample_into(graph, node, &mut stream, s1);
    for (j, (&u, slot)) in s1.iter().zip(s2.chunks_mut(k2)).enumerate() {
        if u == PAD {
            slot.fill(PAD);
        } else {
            let mut stream = RngStream::derive(base_seed, pos as u64, HOP_SECOND, j as u32);
            sample_into(graph, u as u32, &mut stream, slot);
        }
    }
}

fn one_hop_root<T: Scalar>(
    graph: &CsrGraph,
    x: &FeatureMatrix<T>,
    node: u32,
    pos: usize,
    base_seed: u64,
    slots: &mut [i32],
    out: &mut [T],
) -> usize {
    let take = sample_one_hop(graph, node, pos, base_seed, slots);
    for &v in &slots[..take] {
        add_row(out, x.row(v as u32));
    }
    let denom = T::from_count(take.max(1));
    out.iter_mut().for_each(|o| *o = *o / denom);
    take
}

#[allow(clippy::too_many_arguments)]
fn two_hop_root<T: Scalar>(
    graph: &CsrGraph,
    x: &FeatureMatrix<T>,
    node: u32,
    pos: usize,
    base_seed: u64,
    s1: &mut [i32],
    s2: &mut [i32],
    inner: &mut [T],
    out: &mut [T],
) {
    sample_two_hop(graph, node, pos, base_seed, s1, s2);
    let k2 = s2.len() / s1.len();
    let mut valid_u = 0;
    for (&u, slot) in s1.iter().zip(s2.chunks(k2)) {
        if u == PAD {
            continue;
        }
        valid_u += 1;
        inner.fill(T::zero());
        let mut valid_w = 0;
        for &w in slot.iter().filter(|&&w| w != PAD) {
            add_row(inner, x.row(w as u32));
            valid_w += 1;
        }
        let k2_eff = T::from_count(valid_w.max(1));
        for (o, &a) in out.iter_mut().zip(inner.iter()) {
            *o = *o + a / k2_eff;
        }
    }
    let k1_eff = T::from_count(valid_u.max(1));
    out.iter_mut().for_each(|o| *o = *o / k1_eff);
}

/// Fused 1-hop sampling + mean aggregation.
///
/// Seed at batch position `i` samples with the stream derived from
/// `(base_seed, i, 0, 0)`. Isolated seeds yield a zero row.
pub fn fused_1hop_forward<T: Scalar>(
    graph: &CsrGraph,
    x: &FeatureMatrix<T>,
    seeds: &SeedBatch,
    k: usize,
    base_seed: u64,
    save_indices: bool,
    meter: &MemoryMeter,
) -> Result<(AggregatedOutput<T>, Option<SampledIndices1>)> {
    check_inputs(graph, x, seeds, &[k])?;
    let batch = seeds.len();
    let dim = x.dim();
    let nodes = seeds.seeds();
    let mut out = meter.filled(batch * dim, T::zero());

    let indices = if save_indices {
        let mut samples = meter.filled(batch * k, PAD);
        let mut takes = meter.filled(batch, 0i32);
        out.par_chunks_mut(dim)
            .zip(samples.par_chunks_mut(k))
            .zip(takes.par_iter_mut())
            .enumerate()
            .for_each(|(pos, ((row, slots), take))| {
                *take = one_hop_root(graph, x, nodes[pos], pos, base_seed, slots, row) as i32;
            });
        Some(SampledIndices1::from_tracked(batch, k, samples, takes))
    } else {
        let _scratch = meter.scope((rayon::current_num_threads() * k * 4) as u64);
        out.par_chunks_mut(dim).enumerate().for_each_init(
            || vec![PAD; k],
            |slots, (pos, row)| {
                one_hop_root(graph, x, nodes[pos], pos, base_seed, slots, row);
            },
        );
        None
    };
    Ok((AggregatedOutput::new(batch, dim, out), indices))
}

/// Fused 2-hop sampling + nested mean aggregation.
///
/// Root at batch position `r` samples up to `k1` neighbors with stream
/// `(base_seed, r, 1, 0)`; first-hop slot `j` samples up to `k2` neighbors
/// with stream `(base_seed, r, 2, j)`. The output row is the mean over
/// valid first-hop slots of the mean over their valid second-hop samples,
/// each denominator clamped to at least one.
#[allow(clippy::too_many_arguments)]
pub fn fused_2hop_forward<T: Scalar>(
    graph: &CsrGraph,
    x: &FeatureMatrix<T>,
    roots: &SeedBatch,
    k1: usize,
    k2: usize,
    base_seed: u64,
    save_indices: bool,
    meter: &MemoryMeter,
) -> Result<(AggregatedOutput<T>, Option<SampledIndices2>)> {
    check_inputs(graph, x, roots, &[k1, k2])?;
    let batch = roots.len();
    let dim = x.dim();
    let nodes = roots.seeds();
    let mut out = meter.filled(batch * dim, T::zero());
    let workers = rayon::current_num_threads() as u64;

    let indices = if save_indices {
        let mut s1 = meter.filled(batch * k1, PAD);
        let mut s2 = meter.filled(batch * k1 * k2, PAD);
        let _scratch = meter.scope(workers * (dim * T::BYTES) as u64);
        out.par_chunks_mut(dim)
            .zip(s1.par_chunks_mut(k1))
            .zip(s2.par_chunks_mut(k1 * k2))
            .enumerate()
            .for_each_init(
                || vec![T::zero(); dim],
                |inner, (pos, ((row, s1_row), s2_row))| {
                    two_hop_root(graph, x, nodes[pos], pos, base_seed, s1_row, s2_row, inner, row);
                },
            );
        Some(SampledIndices2::from_tracked(batch, k1, k2, s1, s2))
    } else {
        let per_worker = (k1 + k1 * k2) * 4 + dim * T::BYTES;
        let _scratch = meter.scope(workers * per_worker as u64);
        out.par_chunks_mut(dim).enumerate().for_each_init(
            || (vec![PAD; k1], vec![PAD; k1 * k2], vec![T::zero(); dim]),
            |(s1, s2, inner), (pos, row)| {
                two_hop_root(graph, x, nodes[pos], pos, base_seed, s1, s2, inner, row);
            },
        );
        None
    };
    Ok((AggregatedOutput::new(batch, dim, out), indices))
}

/// Forward-only 2-hop variant: no index tensors are allocated, and any
/// backward through it yields a zero gradient.
#[allow(clippy::too_many_arguments)]
pub fn fused_2hop_forward_nosave<T: Scalar>(
    graph: &CsrGraph,
    x: &FeatureMatrix<T>,
    roots: &SeedBatch,
    k1: usize,
    k2: usize,
    base_seed: u64,
    meter: &MemoryMeter,
) -> Result<AggregatedOutput<T>> {
    fused_2hop_forward(graph, x, roots, k1, k2, base_seed, false, meter).map(|(out, _)| out)
}

/// A contribution `grad_out[src] / denom` to some destination row.
#[derive(Clone, Copy, Default)]
struct Contribution {
    src: u32,
    denom: u32,
}

/// Reduce contributions into a dense gradient, one destination row per task.
///
/// `emit` is called twice and must produce the same `(dest, contribution)`
/// sequence both times: once to count per destination, once to fill.
fn scatter_by_destination<T: Scalar>(
    num_nodes: usize,
    dim: usize,
    grad_out: &[T],
    emit: impl Fn(&mut dyn FnMut(usize, Contribution)),
    meter: &MemoryMeter,
) -> GradBuffer<T> {
    let mut offsets = meter.filled(num_nodes + 1, 0usize);
    emit(&mut |dest, _| offsets[dest + 1] += 1);
    for v in 0..num_nodes {
        offsets[v + 1] += offsets[v];
    }
    let mut entries = meter.filled(offsets[num_nodes], Contribution::default());
    let mut cursor = meter.track(offsets[..num_nodes].to_vec());
    emit(&mut |dest, c| {
        entries[cursor[dest]] = c;
        cursor[dest] += 1;
    });
    drop(cursor);

    let mut grad = GradBuffer::zeros(num_nodes, dim, meter);
    grad.values_mut()
        .par_chunks_mut(dim)
        .enumerate()
        .for_each(|(v, row)| {
            for c in &entries[offsets[v]..offsets[v + 1]] {
                let src = c.src as usize * dim;
                let denom = T::from_count(c.denom as usize);
                for (g, &up) in row.iter_mut().zip(&grad_out[src..src + dim]) {
                    *g = *g + up / denom;
                }
            }
        });
    grad
}

/// Replay saved 1-hop samples: `grad[v] += grad_out[i] / max(1, take_i)` for
/// every sampled `v` of seed `i`.
///
/// With `indices == None` (forward ran without saving) the gradient is zero.
pub fn fused_1hop_backward<T: Scalar>(
    grad_out: &[T],
    indices: Option<&SampledIndices1>,
    batch: usize,
    num_nodes: usize,
    meter: &MemoryMeter,
) -> Result<GradBuffer<T>> {
    let dim = grad_dim(grad_out, batch)?;
    let Some(idx) = indices else {
        return Ok(GradBuffer::zeros(num_nodes, dim, meter));
    };
    if idx.batch() != batch {
        return Err(crate::Error::DimensionMismatch {
            what: "indices batch",
            expected: batch,
            got: idx.batch(),
        });
    }
    idx.check_nodes(num_nodes)?;
    let emit = |f: &mut dyn FnMut(usize, Contribution)| {
        for (i, &take) in idx.takes().iter().enumerate() {
            let denom = (take as u32).max(1);
            for &v in idx.row(i).iter().take(take as usize) {
                f(v as usize, Contribution { src: i as u32, denom });
            }
        }
    };
    Ok(scatter_by_destination(num_nodes, dim, grad_out, emit, meter))
}

/// Replay saved 2-hop samples: for root `r`, valid slot `j` and valid
/// second-hop `w`, `grad[w] += grad_out[r] / (k1_eff(r) * k2_eff(r, j))`,
/// the exact adjoint of the forward's nested mean.
pub fn fused_2hop_backward<T: Scalar>(
    grad_out: &[T],
    indices: Option<&SampledIndices2>,
    batch: usize,
    num_nodes: usize,
    meter: &MemoryMeter,
) -> Result<GradBuffer<T>> {
    let dim = grad_dim(grad_out, batch)?;
    let Some(idx) = indices else {
        return Ok(GradBuffer::zeros(num_nodes, dim, meter));
    };
    if idx.batch() != batch {
        return Err(crate::Error::DimensionMismatch {
            what: "indices batch",
            expected: batch,
            got: idx.batch(),
        });
    }
    idx.check_nodes(num_nodes)?;
    let (k1, _) = idx.fanouts();
    let emit = |f: &mut dyn FnMut(usize, Contribution)| {
        for r in 0..batch {
            let k1_eff = idx.k1_eff(r);
            for j in 0..k1 {
                let slot = idx.slot(r, j);
                if idx.first_hop(r)[j] == PAD {
                    continue;
                }
                let denom = (k1_eff * valid_count(slot).max(1)) as u32;
                for &w in slot.iter().filter(|&&w| w != PAD) {
                    f(w as usize, Contribution { src: r as u32, denom });
                }
            }
        }
    };
    Ok(scatter_by_destination(num_nodes, dim, grad_out, emit, meter))
}
