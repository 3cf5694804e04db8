//! Generate a power-law graph, inspect its degrees and round-trip it
//! through both on-disk formats.
//!
//! ```text
//! cargo run --example graph_io
//! ```

use fused_sage::graph::{gen_power_law, load_edge_list, read_csr_cache, write_csr_cache, write_edge_list};

fn main() -> fused_sage::Result<()> {
    let graph = gen_power_law(20_000, 20.0, 2.1, 42)?;
    println!(
        "N={} entries={} mean degree {:.2} (min {}, max {})",
        graph.num_nodes(),
        graph.num_entries(),
        graph.mean_degree(),
        graph.min_degree(),
        graph.max_degree()
    );

    let mut degrees = graph.degrees();
    degrees.sort_unstable();
    let q = |p: f64| degrees[((degrees.len() - 1) as f64 * p) as usize];
    println!("degree quantiles p50={} p90={} p99={}", q(0.5), q(0.9), q(0.99));

    let dir = std::env::temp_dir().join("fused-sage-graph-io");
    std::fs::create_dir_all(&dir)?;
    let txt = dir.join("graph.txt");
    let bin = dir.join("graph.csr");
    write_edge_list(&graph, &txt)?;
    write_csr_cache(&graph, &bin)?;
    assert_eq!(load_edge_list(&txt, true)?, graph);
    assert_eq!(read_csr_cache(&bin)?, graph);
    println!(
        "edge list {} bytes, csr cache {} bytes, both reload identically",
        std::fs::metadata(&txt)?.len(),
        std::fs::metadata(&bin)?.len()
    );
    Ok(())
}
