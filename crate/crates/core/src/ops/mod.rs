//! Sampling + mean-aggregation operators: the fused single-pass kernels and
//! the materializing baseline they are checked against.

mod baseline;
mod fused;

pub use baseline::{baseline_1hop_forward, baseline_backward, baseline_forward, Gathered, MaterializedBlock};
pub use fused::{
    fused_1hop_backward, fused_1hop_forward, fused_2hop_backward, fused_2hop_forward, fused_2hop_forward_nosave,
};

use crate::error::{Error, Result};
use crate::meter::{MemoryMeter, TrackedVec};
use crate::sampler::PAD;
use crate::scalar::Scalar;
use crate::data::FeatureMatrix;

/// Saved 1-hop samples: `B x k` ids padded with `-1`, plus per-seed counts.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledIndices1 {
    batch: usize,
    fanout: usize,
    samples: TrackedVec<i32>,
    takes: TrackedVec<i32>,
}

impl SampledIndices1 {
    pub(crate) fn from_tracked(batch: usize, fanout: usize, samples: TrackedVec<i32>, takes: TrackedVec<i32>) -> Self {
        debug_assert_eq!(samples.len(), batch * fanout);
        debug_assert_eq!(takes.len(), batch);
        SampledIndices1 {
            batch,
            fanout,
            samples,
            takes,
        }
    }

    /// Assemble from raw arrays. Checks shapes and the padding pattern:
    /// row `i` holds `takes[i]` ids followed by `-1`.
    pub fn from_parts(fanout: usize, samples: Vec<i32>, takes: Vec<i32>, meter: &MemoryMeter) -> Result<Self> {
        let batch = takes.len();
        if fanout == 0 || samples.len() != batch * fanout {
            return Err(Error::DimensionMismatch {
                what: "samples",
                expected: batch * fanout,
                got: samples.len(),
            });
        }
        for (i, &t) in takes.iter().enumerate() {
            if t < 0 {
                return Err(Error::InvalidIndices(format!("negative take {t} for seed {i}")));
            }
            if t as usize > fanout {
                return Err(Error::InvalidIndices(format!("take {t} exceeds fanout {fanout}")));
            }
            let row = &samples[i * fanout..(i + 1) * fanout];
            let (head, tail) = row.split_at(t as usize);
            if head.iter().any(|&v| v < 0) || tail.iter().any(|&v| v != PAD) {
                return Err(Error::InvalidIndices(format!("row {i} does not match take {t}")));
            }
        }
        Ok(Self::from_tracked(batch, fanout, meter.track(samples), meter.track(takes)))
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn fanout(&self) -> usize {
        self.fanout
    }

    pub fn samples(&self) -> &[i32] {
        &self.samples
    }

    pub fn takes(&self) -> &[i32] {
        &self.takes
    }

    pub fn row(&self, i: usize) -> &[i32] {
        &self.samples[i * self.fanout..(i + 1) * self.fanout]
    }

    /// Sampled (seed, neighbor) pairs: the sum of takes.
    pub fn sampled_pairs(&self) -> u64 {
        self.takes.iter().map(|&t| t as u64).sum()
    }

    pub(crate) fn check_nodes(&self, num_nodes: usize) -> Result<()> {
        check_ids(&self.samples, num_nodes)?;
        if let Some(&t) = self.takes.iter().find(|&&t| t < 0) {
            return Err(Error::InvalidIndices(format!("negative take {t}")));
        }
        Ok(())
    }

    /// Recompute the per-seed means from the saved ids.
    pub fn aggregate<T: Scalar>(&self, x: &FeatureMatrix<T>, meter: &MemoryMeter) -> Result<AggregatedOutput<T>> {
        self.check_nodes(x.num_nodes())?;
        let dim = x.dim();
        let mut out = meter.filled(self.batch * dim, T::zero());
        for (i, row) in out.chunks_mut(dim).enumerate() {
            let take = self.takes[i] as usize;
            for &v in &self.row(i)[..take] {
                for (o, &xv) in row.iter_mut().zip(x.row(v as u32)) {
                    *o = *o + xv;
                }
            }
            let denom = T::from_count(take.max(1));
            row.iter_mut().for_each(|o| *o = *o / denom);
        }
        Ok(AggregatedOutput::new(self.batch, dim, out))
    }
}

/// Saved 2-hop samples: `s1` is `B x k1`, `s2` is `B x k1 x k2`, both
/// padded with `-1`. A padded `s1` slot has an all-padding `s2` row.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledIndices2 {
    batch: usize,
    k1: usize,
    k2: usize,
    s1: TrackedVec<i32>,
    s2: TrackedVec<i32>,
}

impl SampledIndices2 {
    pub(crate) fn from_tracked(batch: usize, k1: usize, k2: usize, s1: TrackedVec<i32>, s2: TrackedVec<i32>) -> Self {
        debug_assert_eq!(s1.len(), batch * k1);
        debug_assert_eq!(s2.len(), batch * k1 * k2);
        SampledIndices2 { batch, k1, k2, s1, s2 }
    }

    pub fn from_parts(k1: usize, k2: usize, s1: Vec<i32>, s2: Vec<i32>, meter: &MemoryMeter) -> Result<Self> {
        if k1 == 0 || k2 == 0 || !s1.len().is_multiple_of(k1) {
            return Err(Error::InvalidIndices(format!("bad s1 shape for k1={k1}, k2={k2}")));
        }
        let batch = s1.len() / k1;
        if s2.len() != batch * k1 * k2 {
            return Err(Error::DimensionMismatch {
                what: "s2",
                expected: batch * k1 * k2,
                got: s2.len(),
            });
        }
        let idx = Self::from_tracked(batch, k1, k2, meter.track(s1), meter.track(s2));
        idx.check_pattern()?;
        Ok(idx)
    }

    fn check_pattern(&self) -> Result<()> {
        for r in 0..self.batch {
            for j in 0..self.k1 {
                let u = self.s1[r * self.k1 + j];
                let slot = self.slot(r, j);
                if u < PAD || slot.iter().any(|&w| w < PAD) {
                    return Err(Error::InvalidIndices(format!("entry below -1 at root {r}")));
                }
                if u == PAD && slot.iter().any(|&w| w != PAD) {
                    return Err(Error::InvalidIndices(format!(
                        "root {r} slot {j} is padded but has second-hop samples"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn fanouts(&self) -> (usize, usize) {
        (self.k1, self.k2)
    }

    pub fn s1(&self) -> &[i32] {
        &self.s1
    }

    pub fn s2(&self) -> &[i32] {
        &self.s2
    }

    pub fn first_hop(&self, r: usize) -> &[i32] {
        &self.s1[r * self.k1..(r + 1) * self.k1]
    }

    /// Second-hop samples of root `r`, first-hop slot `j`.
    pub fn slot(&self, r: usize, j: usize) -> &[i32] {
        let start = (r * self.k1 + j) * self.k2;
        &self.s2[start..start + self.k2]
    }

    /// `max(1, valid first-hop samples)` for root `r`.
    pub fn k1_eff(&self, r: usize) -> usize {
        valid_count(self.first_hop(r)).max(1)
    }

    /// `max(1, valid second-hop samples)` for root `r`, slot `j`.
    pub fn k2_eff(&self, r: usize, j: usize) -> usize {
        valid_count(self.slot(r, j)).max(1)
    }

    /// Valid first-hop plus valid second-hop entries.
    pub fn sampled_pairs(&self) -> u64 {
        (valid_count(&self.s1) + valid_count(&self.s2)) as u64
    }

    pub(crate) fn check_nodes(&self, num_nodes: usize) -> Result<()> {
        check_ids(&self.s1, num_nodes)?;
        check_ids(&self.s2, num_nodes)
    }

    /// Recompute the nested means from the saved ids.
    pub fn aggregate<T: Scalar>(&self, x: &FeatureMatrix<T>, meter: &MemoryMeter) -> Result<AggregatedOutput<T>> {
        self.check_nodes(x.num_nodes())?;
        let dim = x.dim();
        let mut out = meter.filled(self.batch * dim, T::zero());
        let mut inner = vec![T::zero(); dim];
        for (r, row) in out.chunks_mut(dim).enumerate() {
            for (j, &u) in self.first_hop(r).iter().enumerate() {
                if u == PAD {
                    continue;
                }
                inner.fill(T::zero());
                for &w in self.slot(r, j).iter().filter(|&&w| w != PAD) {
                    for (a, &xv) in inner.iter_mut().zip(x.row(w as u32)) {
                        *a = *a + xv;
                    }
                }
                let k2_eff = T::from_count(self.k2_eff(r, j));
                for (o, &a) in row.iter_mut().zip(&inner) {
                    *o = *o + a / k2_eff;
                }
            }
            let k1_eff = T::from_count(self.k1_eff(r));
            row.iter_mut().for_each(|o| *o = *o / k1_eff);
        }
        Ok(AggregatedOutput::new(self.batch, dim, out))
    }
}

pub(crate) fn valid_count(ids: &[i32]) -> usize {
    ids.iter().filter(|&&v| v != PAD).count()
}

fn check_ids(ids: &[i32], num_nodes: usize) -> Result<()> {
    match ids.iter().find(|&&v| v < PAD || v as i64 >= num_nodes as i64) {
        Some(&v) if v < PAD => Err(Error::InvalidIndices(format!("entry {v} below -1"))),
        Some(&v) => Err(Error::NodeOutOfRange {
            node: i64::from(v),
            num_nodes,
        }),
        None => Ok(()),
    }
}

/// `B x D` aggregated features.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedOutput<T> {
    rows: usize,
    dim: usize,
    values: TrackedVec<T>,
}

impl<T: Scalar> AggregatedOutput<T> {
    pub(crate) fn new(rows: usize, dim: usize, values: TrackedVec<T>) -> Self {
        debug_assert_eq!(values.len(), rows * dim);
        AggregatedOutput { rows, dim, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn into_vec(self) -> Vec<T> {
        self.values.into_inner()
    }

    /// Bitwise comparison, distinguishing `0.0` from `-0.0`.
    pub fn bitwise_eq(&self, other: &Self) -> bool {
        self.dim == other.dim && bitwise_eq(&self.values, &other.values)
    }
}

/// Dense `N x D` gradient with respect to the features. Rows of nodes that
/// were never sampled are exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GradBuffer<T> {
    num_nodes: usize,
    dim: usize,
    values: TrackedVec<T>,
}

impl<T: Scalar> GradBuffer<T> {
    pub(crate) fn zeros(num_nodes: usize, dim: usize, meter: &MemoryMeter) -> Self {
        GradBuffer {
            num_nodes,
            dim,
            values: meter.filled(num_nodes * dim, T::zero()),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn row(&self, v: u32) -> &[T] {
        let start = v as usize * self.dim;
        &self.values[start..start + self.dim]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    pub fn bitwise_eq(&self, other: &Self) -> bool {
        self.num_nodes == other.num_nodes && self.dim == other.dim && bitwise_eq(&self.values, &other.values)
    }
}

pub(crate) fn bitwise_eq<T: Scalar>(a: &[T], b: &[T]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.as_f64().to_bits() == y.as_f64().to_bits())
}

fn check_inputs<T: Scalar>(
    graph: &crate::graph::CsrGraph,
    x: &FeatureMatrix<T>,
    seeds: &crate::data::SeedBatch,
    fanouts: &[usize],
) -> Result<()> {
    x.check_nodes(graph.num_nodes())?;
    seeds.check_nodes(graph.num_nodes())?;
    if x.dim() == 0 {
        return Err(Error::invalid("feature dimension must be >= 1"));
    }
    if fanouts.contains(&0) {
        return Err(Error::invalid("fanouts must be >= 1"));
    }
    Ok(())
}

/// Split `grad_out` into `batch` rows and return the row width.
fn grad_dim<T>(grad_out: &[T], batch: usize) -> Result<usize> {
    if batch == 0 || grad_out.is_empty() || !grad_out.len().is_multiple_of(batch) {
        return Err(Error::DimensionMismatch {
            what: "grad_out rows",
            expected: batch,
            got: grad_out.len(),
        });
    }
    Ok(grad_out.len() / batch)
}
