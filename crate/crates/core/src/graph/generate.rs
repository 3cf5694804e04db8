//! Seeded synthetic graph generators. Pure functions of their arguments.

use std::collections::HashSet;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{build_csr, check_node_count, CsrGraph};
use crate::error::{Error, Result};

/// Undirected Chung-Lu style graph with a truncated power-law degree profile.
///
/// Each node gets a Pareto weight `u^(-1/(exponent-1))` capped at
/// `sqrt(N * avg_degree)`; endpoints are drawn proportionally to weight
/// until `round(N * avg_degree / 2)` distinct non-loop edges exist, so the
/// mean degree lands on `avg_degree` unless the cap on attempts is hit.
pub fn gen_power_law(num_nodes: usize, avg_degree: f64, exponent: f64, rng_seed: u64) -> Result<CsrGraph> {
    check_node_count(num_nodes)?;
    if num_nodes < 2 {
        return Err(Error::invalid("power-law graph needs at least 2 nodes"));
    }
    if !(avg_degree >= 1.0 && avg_degree <= (num_nodes - 1) as f64) {
        return Err(Error::invalid(format!(
            "avg_degree {avg_degree} outside [1, {}]",
            num_nodes - 1
        )));
    }
    if !(exponent.is_finite() && exponent > 1.0) {
        return Err(Error::invalid(format!("exponent {exponent} must be > 1")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let cap = (num_nodes as f64 * avg_degree).sqrt();
    let tail = -1.0 / (exponent - 1.0);
    let weights: Vec<f64> = (0..num_nodes)
        .map(|_| {
            // (0, 1]
            let u = 1.0 - rng.random::<f64>();
            u.powf(tail).min(cap)
        })
        .collect();
    let pick = WeightedIndex::new(&weights).map_err(|e| Error::invalid(e.to_string()))?;

    let max_edges = num_nodes * (num_nodes - 1) / 2;
    let target = ((num_nodes as f64 * avg_degree / 2.0).round() as usize).clamp(1, max_edges);
    let max_attempts = target.saturating_mul(100);
    let mut seen = HashSet::with_capacity(target);
    let mut edges = Vec::with_capacity(target);
    let mut attempts = 0;
    while edges.len() < target && attempts < max_attempts {
        attempts += 1;
        let u = pick.sample(&mut rng) as u32;
        let v = pick.sample(&mut rng) as u32;
        if u == v {
            continue;
        }
        let key = (u.min(v), u.max(v));
        if seen.insert(key) {
            edges.push(key);
        }
    }
    build_csr(&edges, num_nodes, true)
}

/// Undirected graph where every node first picks `degree` distinct
/// non-self neighbors uniformly; symmetrization only adds edges.
pub fn gen_uniform(num_nodes: usize, degree: usize, rng_seed: u64) -> Result<CsrGraph> {
    check_node_count(num_nodes)?;
    if degree >= num_nodes {
        return Err(Error::invalid(format!(
            "degree {degree} must be < num_nodes {num_nodes}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut edges = Vec::with_capacity(num_nodes * degree);
    for u in 0..num_nodes {
        for idx in rand::seq::index::sample(&mut rng, num_nodes - 1, degree) {
            let v = if idx >= u { idx + 1 } else { idx };
            edges.push((u as u32, v as u32));
        }
    }
    build_csr(&edges, num_nodes, true)
}
