//! Uniform without-replacement neighbor sampling (Vitter's Algorithm R).

use crate::graph::CsrGraph;
use crate::rng::RngStream;

/// Sentinel for unused sample slots.
pub const PAD: i32 = -1;

/// Sample up to `out.len()` distinct neighbors of `u` into `out`, padding
/// unused slots with [`PAD`]. Returns the number taken.
///
/// When `deg(u) <= k` all neighbors are taken in CSR order and the stream is
/// not advanced. Otherwise the first `k` neighbors fill the reservoir and
/// neighbor `i >= k` replaces slot `j = uniform_index(i + 1)` when `j < k`;
/// output order is reservoir slot order.
#[inline]
pub fn sample_into(graph: &CsrGraph, u: u32, stream: &mut RngStream, out: &mut [i32]) -> usize {
    let k = out.len();
    let nbrs = graph.neighbors(u);
    let take = nbrs.len().min(k);
    for (slot, &v) in out.iter_mut().zip(&nbrs[..take]) {
        *slot = v as i32;
    }
    out[take..].fill(PAD);
    for (i, &v) in nbrs.iter().enumerate().skip(k) {
        let j = stream.uniform_index(i + 1);
        if j < k {
            out[j] = v as i32;
        }
    }
    take
}

/// Allocating form of [`sample_into`].
pub fn sample_neighbors_reservoir(graph: &CsrGraph, u: u32, k: usize, stream: &mut RngStream) -> Vec<u32> {
    let mut out = vec![PAD; k];
    let take = sample_into(graph, u, stream, &mut out);
    out[..take].iter().map(|&v| v as u32).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_csr;

    fn star(deg: u32) -> CsrGraph {
        let edges: Vec<_> = (1..=deg).map(|v| (0, v)).collect();
        build_csr(&edges, deg as usize + 1, true).unwrap()
    }

    /// Textbook Algorithm R over an explicit item list.
    fn reference_reservoir(items: &[u32], k: usize, stream: &mut RngStream) -> Vec<u32> {
        let mut reservoir: Vec<u32> = items.iter().take(k).copied().collect();
        for i in k..items.len() {
            let j = (stream.next_u64() % (i as u64 + 1)) as usize;
            if j < k {
                reservoir[j] = items[i];
            }
        }
        reservoir
    }

    #[test]
    fn short_rows_take_everything_in_order() {
        let g = star(2);
        let mut s = RngStream::derive(1, 0, 0, 0);
        let before = s;
        let mut out = [0i32; 5];
        assert_eq!(sample_into(&g, 0, &mut s, &mut out), 2);
        assert_eq!(out, [1, 2, PAD, PAD, PAD]);
        assert_eq!(s, before);
    }

    #[test]
    fn isolated_node_takes_nothing() {
        let g = build_csr(&[(0, 1)], 3, true).unwrap();
        let mut out = [7i32; 3];
        assert_eq!(sample_into(&g, 2, &mut RngStream::from_state(5), &mut out), 0);
        assert_eq!(out, [PAD; 3]);
    }

    #[test]
    fn draw_beyond_reservoir_keeps_prefix() {
        // find a seed whose first draw over 3 items lands on index 2
        let seed = (0u64..)
            .find(|&s| RngStream::derive(s, 0, 0, 0).uniform_index(3) == 2)
            .unwrap();
        let g = star(3);
        let mut out = [0i32; 2];
        sample_into(&g, 0, &mut RngStream::derive(seed, 0, 0, 0), &mut out);
        assert_eq!(out, [1, 2]);
    }

    #[test]
    fn matches_reference_sampler() {
        let g = star(100);
        for seed in 0..200 {
            let stream = RngStream::derive(seed, 3, 0, 0);
            let got = sample_neighbors_reservoir(&g, 0, 10, &mut stream.clone());
            let want = reference_reservoir(g.neighbors(0), 10, &mut stream.clone());
            assert_eq!(got, want);
        }
    }

    #[test]
    fn samples_are_distinct_neighbors() {
        let g = star(40);
        for seed in 0..100 {
            let got = sample_neighbors_reservoir(&g, 0, 7, &mut RngStream::derive(seed, 0, 0, 0));
            let mut sorted = got.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), 7);
            assert!(got.iter().all(|&v| g.has_edge(0, v)));
        }
    }

    #[test]
    fn selection_frequency_is_uniform() {
        let g = star(10);
        let trials = 100_000u64;
        let mut hits = [0u32; 11];
        for t in 0..trials {
            for v in sample_neighbors_reservoir(&g, 0, 5, &mut RngStream::derive(42, t, 0, 0)) {
                hits[v as usize] += 1;
            }
        }
        for v in 1..=10 {
            let freq = f64::from(hits[v]) / trials as f64;
            assert!((freq - 0.5).abs() <= 0.02, "neighbor {v}: {freq}");
        }
    }
}
