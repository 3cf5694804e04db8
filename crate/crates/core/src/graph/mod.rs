//! Compressed sparse row adjacency and its constructors.

mod generate;
mod io;

pub use generate::{gen_power_law, gen_uniform};
pub use io::{load_edge_list, read_csr_cache, write_csr_cache, write_edge_list, CACHE_MAGIC};

use crate::error::{Error, Result};

/// Largest node count representable with non-negative 32-bit ids.
pub const MAX_NODES: usize = i32::MAX as usize;

/// Adjacency in CSR form. Neighbor lists are sorted ascending and free of
/// duplicates; immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsrGraph {
    num_nodes: usize,
    rowptr: Vec<u32>,
    col: Vec<u32>,
}

/// Build a CSR graph from an edge list.
///
/// With `make_undirected` every edge is mirrored. Duplicate edges are
/// dropped and neighbor lists sorted. Self-loops in the input are kept.
pub fn build_csr(edges: &[(u32, u32)], num_nodes: usize, make_undirected: bool) -> Result<CsrGraph> {
    check_node_count(num_nodes)?;
    let mut keys = Vec::with_capacity(edges.len() * if make_undirected { 2 } else { 1 });
    for &(u, v) in edges {
        for x in [u, v] {
            if x as usize >= num_nodes {
                return Err(Error::NodeOutOfRange {
                    node: i64::from(x),
                    num_nodes,
                });
            }
        }
        keys.push(edge_key(u, v));
        if make_undirected && u != v {
            keys.push(edge_key(v, u));
        }
    }
    keys.sort_unstable();
    keys.dedup();
    if keys.len() > u32::MAX as usize {
        return Err(Error::InvalidCsr(format!("{} edges overflow 32-bit offsets", keys.len())));
    }

    let mut rowptr = vec![0u32; num_nodes + 1];
    for &k in &keys {
        rowptr[(k >> 32) as usize + 1] += 1;
    }
    for i in 0..num_nodes {
        rowptr[i + 1] += rowptr[i];
    }
    let col = keys.iter().map(|&k| k as u32).collect();
    Ok(CsrGraph {
        num_nodes,
        rowptr,
        col,
    })
}

#[inline]
fn edge_key(u: u32, v: u32) -> u64 {
    (u64::from(u) << 32) | u64::from(v)
}

fn check_node_count(num_nodes: usize) -> Result<()> {
    if num_nodes == 0 {
        return Err(Error::EmptyGraph);
    }
    if num_nodes > MAX_NODES {
        return Err(Error::TooManyNodes(num_nodes));
    }
    Ok(())
}

impl CsrGraph {
    /// Assemble from raw arrays, validating every invariant.
    pub fn from_parts(num_nodes: usize, rowptr: Vec<u32>, col: Vec<u32>) -> Result<Self> {
        let g = CsrGraph {
            num_nodes,
            rowptr,
            col,
        };
        g.validate()?;
        Ok(g)
    }

    /// O(N + E) check of the CSR invariants: offsets start at zero, never
    /// decrease and end at `col.len()`; ids in range; rows sorted and
    /// duplicate free.
    pub fn validate(&self) -> Result<()> {
        check_node_count(self.num_nodes)?;
        let n = self.num_nodes;
        if self.rowptr.len() != n + 1 {
            return Err(Error::InvalidCsr(format!(
                "rowptr has {} entries, expected {}",
                self.rowptr.len(),
                n + 1
            )));
        }
        if self.rowptr[0] != 0 {
            return Err(Error::InvalidCsr("rowptr[0] != 0".into()));
        }
        if self.rowptr[n] as usize != self.col.len() {
            return Err(Error::InvalidCsr(format!(
                "rowptr[N] = {} but col has {} entries",
                self.rowptr[n],
                self.col.len()
            )));
        }
        for u in 0..n {
            if self.rowptr[u] > self.rowptr[u + 1] {
                return Err(Error::InvalidCsr(format!("rowptr decreases at node {u}")));
            }
            let row = self.neighbors(u as u32);
            for (i, &v) in row.iter().enumerate() {
                if v as usize >= n {
                    return Err(Error::NodeOutOfRange {
                        node: i64::from(v),
                        num_nodes: n,
                    });
                }
                if i > 0 && row[i - 1] >= v {
                    return Err(Error::InvalidCsr(format!(
                        "neighbors of {u} not strictly ascending"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// Number of stored (directed) adjacency entries.
    pub fn num_entries(&self) -> usize {
        self.col.len()
    }

    pub fn rowptr(&self) -> &[u32] {
        &self.rowptr
    }

    pub fn col(&self) -> &[u32] {
        &self.col
    }

    #[inline]
    pub fn neighbors(&self, u: u32) -> &[u32] {
        let u = u as usize;
        &self.col[self.rowptr[u] as usize..self.rowptr[u + 1] as usize]
    }

    #[inline]
    pub fn degree(&self, u: u32) -> usize {
        let u = u as usize;
        (self.rowptr[u + 1] - self.rowptr[u]) as usize
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.rowptr.windows(2).map(|w| (w[1] - w[0]) as usize).collect()
    }

    pub fn mean_degree(&self) -> f64 {
        self.col.len() as f64 / self.num_nodes as f64
    }

    pub fn min_degree(&self) -> usize {
        self.degrees().into_iter().min().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// True when every stored edge has its reverse.
    pub fn is_symmetric(&self) -> bool {
        (0..self.num_nodes as u32).all(|u| self.neighbors(u).iter().all(|&v| self.has_edge(v, u)))
    }

    /// All stored entries as `(u, v)` pairs in CSR order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.num_nodes as u32).flat_map(move |u| self.neighbors(u).iter().map(move |&v| (u, v)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_edge_symmetrized() {
        let g = build_csr(&[(0, 1)], 2, true).unwrap();
        assert_eq!(g.rowptr(), &[0, 1, 2]);
        assert_eq!(g.col(), &[1, 0]);
    }

    #[test]
    fn reverse_pair_is_deduplicated() {
        let a = build_csr(&[(0, 1)], 2, true).unwrap();
        let b = build_csr(&[(0, 1), (1, 0)], 2, true).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn directed_rows() {
        let g = build_csr(&[(2, 0), (2, 1)], 3, false).unwrap();
        assert_eq!(g.rowptr(), &[0, 0, 0, 2]);
        assert_eq!(g.col(), &[0, 1]);
        assert!(!g.is_symmetric());
    }

    #[test]
    fn self_loops_are_kept_once() {
        let g = build_csr(&[(1, 1), (1, 1), (0, 1)], 2, true).unwrap();
        assert_eq!(g.neighbors(1), &[0, 1]);
        assert_eq!(g.neighbors(0), &[1]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(build_csr(&[], 0, true), Err(Error::EmptyGraph)));
        assert!(matches!(
            build_csr(&[(0, 3)], 3, true),
            Err(Error::NodeOutOfRange { node: 3, .. })
        ));
        assert!(matches!(
            build_csr(&[], MAX_NODES + 1, false),
            Err(Error::TooManyNodes(_))
        ));
    }

    #[test]
    fn from_parts_validates() {
        assert!(CsrGraph::from_parts(2, vec![0, 1, 2], vec![1, 0]).is_ok());
        assert!(CsrGraph::from_parts(2, vec![1, 1, 2], vec![1, 0]).is_err());
        assert!(CsrGraph::from_parts(2, vec![0, 2, 1], vec![1, 0]).is_err());
        assert!(CsrGraph::from_parts(2, vec![0, 1, 3], vec![1, 0]).is_err());
        assert!(CsrGraph::from_parts(2, vec![0, 1, 2], vec![1, 2]).is_err());
        assert!(CsrGraph::from_parts(3, vec![0, 2, 2, 2], vec![1, 1]).is_err());
    }

    fn edge_lists() -> impl Strategy<Value = (usize, Vec<(u32, u32)>)> {
        (1usize..40).prop_flat_map(|n| {
            let e = (0..n as u32, 0..n as u32);
            (Just(n), proptest::collection::vec(e, 0..120))
        })
    }

    proptest! {
        #[test]
        fn built_graphs_are_valid((n, edges) in edge_lists(), undirected: bool) {
            let g = build_csr(&edges, n, undirected).unwrap();
            g.validate().unwrap();
            if undirected {
                prop_assert!(g.is_symmetric());
            }
            for &(u, v) in &edges {
                prop_assert!(g.has_edge(u, v));
            }
        }

        #[test]
        fn symmetrization_is_idempotent((n, edges) in edge_lists()) {
            let g = build_csr(&edges, n, true).unwrap();
            let again: Vec<_> = g.edges().collect();
            prop_assert_eq!(build_csr(&again, n, true).unwrap(), g.clone());
            prop_assert_eq!(build_csr(&again, n, false).unwrap(), g);
        }
    }
}
