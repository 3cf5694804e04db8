//! Randomized verification suites behind `verify` and `grad-check`.
//!
//! Every trial builds a small random instance from its own seed, so a
//! failing trial can be rebuilt exactly from the printed counterexample.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{FeatureMatrix, SeedBatch};
use crate::error::Result;
use crate::graph::{build_csr, CsrGraph};
use crate::meter::MemoryMeter;
use crate::ops::{
    baseline_1hop_forward, baseline_backward, baseline_forward, fused_1hop_backward, fused_1hop_forward,
    fused_2hop_backward, fused_2hop_forward, fused_2hop_forward_nosave, AggregatedOutput, GradBuffer,
    SampledIndices1, SampledIndices2,
};
use crate::rng::splitmix64_mix;
use crate::sampler::PAD;
use crate::workers::Workers;

/// Worker counts the determinism check compares.
pub const DETERMINISM_WORKERS: [usize; 3] = [1, 4, 8];

/// Size limits for random instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceLimits {
    pub max_n: usize,
    pub max_d: usize,
    pub max_fanout: usize,
    pub max_batch: usize,
}

impl Default for InstanceLimits {
    fn default() -> Self {
        InstanceLimits {
            max_n: 200,
            max_d: 8,
            max_fanout: 8,
            max_batch: 32,
        }
    }
}

/// A small random problem: graph, 64-bit features, seed batch and fanouts.
#[derive(Debug, Clone)]
pub struct Instance {
    pub seed: u64,
    pub graph: CsrGraph,
    pub x: FeatureMatrix<f64>,
    pub batch: SeedBatch,
    pub k1: usize,
    pub k2: usize,
    pub base_seed: u64,
}

impl Instance {
    /// Build the instance determined by `seed`.
    ///
    /// Graph density varies per instance so that isolated nodes, low-degree
    /// nodes (degree below the fanout) and high-degree nodes all occur.
    /// Seeds may repeat within a batch.
    pub fn random(seed: u64, limits: &InstanceLimits) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(2..=limits.max_n.max(2));
        let density = [0.02, 0.1, 0.3, 0.7][rng.random_range(0..4)];
        let max_edges = n * (n - 1) / 2;
        let m = ((max_edges as f64 * density * rng.random::<f64>()) as usize).max(1);
        let edges: Vec<(u32, u32)> = (0..m)
            .map(|_| (rng.random_range(0..n as u32), rng.random_range(0..n as u32)))
            .collect();
        let graph = build_csr(&edges, n, true).expect("valid random edges");
        let d = rng.random_range(1..=limits.max_d.max(1));
        let x = FeatureMatrix::from_fn(n, d, |_, _| rng.random_range(-1.0..1.0)).expect("finite features");
        let b = rng.random_range(1..=limits.max_batch.max(1));
        let seeds = (0..b).map(|_| rng.random_range(0..n as u32)).collect();
        let batch = SeedBatch::new(seeds, n).expect("seeds in range");
        let k1 = rng.random_range(1..=limits.max_fanout.max(1));
        let k2 = rng.random_range(1..=limits.max_fanout.max(1));
        Instance {
            seed,
            graph,
            x,
            batch,
            k1,
            k2,
            base_seed: rng.random(),
        }
    }

    /// Random upstream gradient for the batch outputs.
    pub fn upstream(&self) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64_mix(self.seed ^ 0xA5A5));
        (0..self.batch.len() * self.x.dim())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect()
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "instance seed={:#x} N={} E={} D={} B={} k1={} k2={} base_seed={:#x} seeds={:?}",
            self.seed,
            self.graph.num_nodes(),
            self.graph.num_entries(),
            self.x.dim(),
            self.batch.len(),
            self.k1,
            self.k2,
            self.base_seed,
            self.batch.seeds()
        )
    }
}

/// Seed of trial `t` in a run started from `suite_seed`.
pub fn trial_seed(suite_seed: u64, trial: usize) -> u64 {
    splitmix64_mix(suite_seed ^ splitmix64_mix(trial as u64 + 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub trials: usize,
    pub limits: InstanceLimits,
    pub suite_seed: u64,
    /// Corrupt one fused sample per trial; the suite must catch it.
    pub inject_fault: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            trials: 100,
            limits: InstanceLimits::default(),
            suite_seed: 0x5AFE,
            inject_fault: false,
        }
    }
}

/// Outcome of one named property over all trials.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub trials: usize,
    pub failures: usize,
    /// First failing instance and what differed.
    pub counterexample: Option<String>,
}

impl CheckOutcome {
    fn new(name: &'static str) -> Self {
        CheckOutcome {
            name,
            trials: 0,
            failures: 0,
            counterexample: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn record(&mut self, inst: &Instance, result: std::result::Result<(), String>) {
        self.trials += 1;
        if let Err(what) = result {
            self.failures += 1;
            if self.counterexample.is_none() {
                self.counterexample = Some(format!("{inst}: {what}"));
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub trials: usize,
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckOutcome::passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = if c.passed() { "PASS" } else { "FAIL" };
            writeln!(f, "{status} {:<24} {}/{} trials", c.name, c.trials - c.failures, c.trials)?;
            if let Some(ce) = &c.counterexample {
                writeln!(f, "     counterexample: {ce}")?;
            }
        }
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{status} ({} trials)", self.trials)
    }
}

pub const CHECK_EQUIV_1HOP: &str = "oracle-equivalence-1hop";
pub const CHECK_EQUIV_2HOP: &str = "oracle-equivalence-2hop";
pub const CHECK_REPLAY: &str = "replay-exactness";
pub const CHECK_DISTINCT: &str = "distinct-neighbors";
pub const CHECK_DETERMINISM: &str = "determinism-workers";

fn first_diff(a: &[f64], b: &[f64]) -> Option<String> {
    if a.len() != b.len() {
        return Some(format!("length {} vs {}", a.len(), b.len()));
    }
    a.iter()
        .zip(b)
        .position(|(x, y)| x.to_bits() != y.to_bits())
        .map(|i| format!("element {i}: {:e} vs {:e}", a[i], b[i]))
}

fn same(what: &str, a: &[f64], b: &[f64]) -> std::result::Result<(), String> {
    match first_diff(a, b) {
        None => Ok(()),
        Some(d) => Err(format!("{what} differs at {d}")),
    }
}

/// Replace the first valid sample with a different node.
fn corrupt(ids: &mut [i32], num_nodes: usize) {
    if let Some(v) = ids.iter_mut().find(|v| **v != PAD) {
        *v = ((*v as usize + 1) % num_nodes) as i32;
    }
}

fn fused_one_hop(inst: &Instance, fault: bool, m: &MemoryMeter) -> Result<(AggregatedOutput<f64>, SampledIndices1)> {
    let (out, idx) = fused_1hop_forward(&inst.graph, &inst.x, &inst.batch, inst.k1, inst.base_seed, true, m)?;
    let idx = idx.expect("indices saved");
    if !fault {
        return Ok((out, idx));
    }
    let mut samples = idx.samples().to_vec();
    corrupt(&mut samples, inst.graph.num_nodes());
    let idx = SampledIndices1::from_parts(inst.k1, samples, idx.takes().to_vec(), m)?;
    Ok((idx.aggregate(&inst.x, m)?, idx))
}

fn fused_two_hop(inst: &Instance, fault: bool, m: &MemoryMeter) -> Result<(AggregatedOutput<f64>, SampledIndices2)> {
    let (out, idx) = fused_2hop_forward(&inst.graph, &inst.x, &inst.batch, inst.k1, inst.k2, inst.base_seed, true, m)?;
    let idx = idx.expect("indices saved");
    if !fault {
        return Ok((out, idx));
    }
    let mut s2 = idx.s2().to_vec();
    corrupt(&mut s2, inst.graph.num_nodes());
    let idx = SampledIndices2::from_parts(inst.k1, inst.k2, idx.s1().to_vec(), s2, m)?;
    Ok((idx.aggregate(&inst.x, m)?, idx))
}

fn rows_distinct(graph: &CsrGraph, owner: u32, row: &[i32]) -> std::result::Result<(), String> {
    let valid: Vec<i32> = row.iter().copied().filter(|&v| v != PAD).collect();
    if row[valid.len()..].iter().any(|&v| v != PAD) {
        return Err(format!("padding before a valid id in {row:?}"));
    }
    let mut sorted = valid.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != valid.len() {
        return Err(format!("duplicate id in sample row {row:?} of node {owner}"));
    }
    if let Some(v) = valid.iter().find(|&&v| !graph.has_edge(owner, v as u32)) {
        return Err(format!("{v} is not a neighbor of {owner}"));
    }
    if valid.len() != graph.degree(owner).min(row.len()) {
        return Err(format!("node {owner} took {} of {} neighbors", valid.len(), graph.degree(owner)));
    }
    Ok(())
}

fn check_distinct(inst: &Instance, i1: &SampledIndices1, i2: &SampledIndices2) -> std::result::Result<(), String> {
    for (r, &s) in inst.batch.seeds().iter().enumerate() {
        rows_distinct(&inst.graph, s, i1.row(r))?;
        rows_distinct(&inst.graph, s, i2.first_hop(r))?;
        for (j, &u) in i2.first_hop(r).iter().enumerate() {
            if u != PAD {
                rows_distinct(&inst.graph, u as u32, i2.slot(r, j))?;
            }
        }
    }
    Ok(())
}

type Snapshot = (Vec<i32>, Vec<i32>, Vec<f64>, Vec<f64>, Vec<i32>, Vec<i32>, Vec<f64>, Vec<f64>);

/// Everything the determinism check compares, computed on the current pool.
fn snapshot(inst: &Instance, up: &[f64], fault: bool) -> Result<Snapshot> {
    let m = MemoryMeter::disabled();
    let n = inst.graph.num_nodes();
    let b = inst.batch.len();
    let (o1, i1) = fused_one_hop(inst, fault, &m)?;
    let g1 = fused_1hop_backward(up, Some(&i1), b, n, &m)?;
    let (o2, i2) = fused_two_hop(inst, fault, &m)?;
    let g2 = fused_2hop_backward(up, Some(&i2), b, n, &m)?;
    Ok((
        i1.samples().to_vec(),
        i1.takes().to_vec(),
        o1.into_vec(),
        g1.values().to_vec(),
        i2.s1().to_vec(),
        i2.s2().to_vec(),
        o2.into_vec(),
        g2.values().to_vec(),
    ))
}

/// Run every property over `opts.trials` random instances.
///
/// `opts.trials == 0` yields a report with no trials, which passes.
pub fn run_verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    let pools: Vec<Workers> = DETERMINISM_WORKERS
        .iter()
        .map(|&w| Workers::new(w))
        .collect::<Result<_>>()?;
    let mut eq1 = CheckOutcome::new(CHECK_EQUIV_1HOP);
    let mut eq2 = CheckOutcome::new(CHECK_EQUIV_2HOP);
    let mut replay = CheckOutcome::new(CHECK_REPLAY);
    let mut distinct = CheckOutcome::new(CHECK_DISTINCT);
    let mut determinism = CheckOutcome::new(CHECK_DETERMINISM);
    let m = MemoryMeter::disabled();

    for t in 0..opts.trials {
        let inst = Instance::random(trial_seed(opts.suite_seed, t), &opts.limits);
        let up = inst.upstream();
        let n = inst.graph.num_nodes();
        let b = inst.batch.len();
        let fault = opts.inject_fault;

        let (f1, i1) = fused_one_hop(&inst, fault, &m)?;
        let (f2, i2) = fused_two_hop(&inst, fault, &m)?;

        let (b1, block1) = baseline_1hop_forward(&inst.graph, &inst.x, &inst.batch, inst.k1, inst.base_seed, &m)?;
        let fg1 = fused_1hop_backward(&up, Some(&i1), b, n, &m)?;
        let bg1 = baseline_backward(&up, &block1, n, &m)?;
        eq1.record(
            &inst,
            same("1-hop forward", f1.values(), b1.values()).and_then(|_| same("1-hop backward", fg1.values(), bg1.values())),
        );

        let dedup = t % 2 == 1;
        let (b2, block2) =
            baseline_forward(&inst.graph, &inst.x, &inst.batch, inst.k1, inst.k2, inst.base_seed, &m, dedup)?;
        let fg2 = fused_2hop_backward(&up, Some(&i2), b, n, &m)?;
        let bg2 = baseline_backward(&up, &block2, n, &m)?;
        eq2.record(
            &inst,
            same("2-hop forward", f2.values(), b2.values())
                .and_then(|_| same("2-hop backward", fg2.values(), bg2.values()))
                .map_err(|e| format!("{e} (dedup={dedup})")),
        );

        let fresh1 = fused_1hop_forward(&inst.graph, &inst.x, &inst.batch, inst.k1, inst.base_seed, false, &m)?.0;
        let fresh2 =
            fused_2hop_forward_nosave(&inst.graph, &inst.x, &inst.batch, inst.k1, inst.k2, inst.base_seed, &m)?;
        let replayed1 = i1.aggregate(&inst.x, &m)?;
        let replayed2 = i2.aggregate(&inst.x, &m)?;
        replay.record(
            &inst,
            same("1-hop replay", replayed1.values(), fresh1.values())
                .and_then(|_| same("2-hop replay", replayed2.values(), fresh2.values())),
        );

        distinct.record(&inst, check_distinct(&inst, &i1, &i2));

        let reference = snapshot(&inst, &up, false)?;
        let mut det = Ok(());
        for (pool, &w) in pools.iter().zip(&DETERMINISM_WORKERS) {
            // Only one pool sees the fault, as a nondeterministic kernel would.
            let faulty = fault && w == DETERMINISM_WORKERS[DETERMINISM_WORKERS.len() - 1];
            let snap = pool.install(|| snapshot(&inst, &up, faulty))?;
            if snap != reference {
                det = Err(format!("results with {w} workers differ from the default pool"));
                break;
            }
        }
        determinism.record(&inst, det);
    }

    Ok(VerifyReport {
        trials: opts.trials,
        checks: vec![eq1, eq2, replay, distinct, determinism],
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckOptions {
    pub trials: usize,
    pub eps: f64,
    /// Run forward without saving indices; backward must then be zero.
    pub nosave: bool,
    pub limits: InstanceLimits,
    pub suite_seed: u64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        GradCheckOptions {
            trials: 20,
            eps: 1e-6,
            nosave: false,
            limits: InstanceLimits {
                max_n: 50,
                max_d: 4,
                max_fanout: 8,
                max_batch: 16,
            },
            suite_seed: 0x6AAD,
        }
    }
}

pub const GRAD_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub trials: usize,
    pub nosave: bool,
    pub max_rel_err_1hop: f64,
    pub max_rel_err_2hop: f64,
    /// Largest gradient magnitude seen (nosave mode expects 0).
    pub max_abs_grad: f64,
    pub worst: Option<String>,
}

impl GradCheckReport {
    pub fn max_rel_err(&self) -> f64 {
        self.max_rel_err_1hop.max(self.max_rel_err_2hop)
    }

    pub fn passed(&self) -> bool {
        if self.nosave {
            self.max_abs_grad == 0.0
        } else {
            self.max_rel_err() < GRAD_TOLERANCE
        }
    }
}

impl fmt::Display for GradCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        if self.nosave {
            write!(
                f,
                "{status} nosave: max |grad| = {:e} over {} trials (indices not saved, gradient is zero by design)",
                self.max_abs_grad, self.trials
            )
        } else {
            write!(
                f,
                "{status} max rel err 1-hop {:.3e}, 2-hop {:.3e} over {} trials (tolerance {GRAD_TOLERANCE:e})",
                self.max_rel_err_1hop, self.max_rel_err_2hop, self.trials
            )?;
            if let (false, Some(w)) = (self.passed(), &self.worst) {
                write!(f, "\n     worst: {w}")?;
            }
            Ok(())
        }
    }
}

/// Relative error with 0/0 read as exact agreement.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    let diff = (analytic - numeric).abs();
    if diff == 0.0 {
        0.0
    } else {
        diff / analytic.abs().max(numeric.abs())
    }
}

/// Central differences of `L = <g, forward(X)>` with respect to every
/// feature entry. Rows untouched by the perturbation cancel exactly, so the
/// sum runs per output element.
fn finite_difference(
    inst: &Instance,
    up: &[f64],
    eps: f64,
    forward: impl Fn(&FeatureMatrix<f64>) -> Result<Vec<f64>>,
) -> Result<Vec<f64>> {
    let (n, d) = (inst.x.num_nodes(), inst.x.dim());
    let mut x = inst.x.clone();
    let mut grad = vec![0.0; n * d];
    for i in 0..n * d {
        let orig = x.values()[i];
        x.values_mut()[i] = orig + eps;
        let plus = forward(&x)?;
        x.values_mut()[i] = orig - eps;
        let minus = forward(&x)?;
        x.values_mut()[i] = orig;
        grad[i] = up
            .iter()
            .zip(plus.iter().zip(&minus))
            .map(|(g, (p, q))| g * (p - q) / (2.0 * eps))
            .sum();
    }
    Ok(grad)
}

fn compare(analytic: &GradBuffer<f64>, numeric: &[f64], worst: &mut (f64, Option<String>), inst: &Instance, hop: &str) -> f64 {
    let mut max = 0.0f64;
    for (i, (&a, &n)) in analytic.values().iter().zip(numeric).enumerate() {
        let e = rel_err(a, n);
        if e > max {
            max = e;
        }
        if e > worst.0 {
            *worst = (e, Some(format!("{inst} {hop} entry {i}: analytic {a:e} numeric {n:e}")));
        }
    }
    max
}

/// Finite-difference check of both backward passes at 64-bit width.
pub fn run_grad_check(opts: &GradCheckOptions) -> Result<GradCheckReport> {
    if !(opts.eps > 0.0 && opts.eps.is_finite()) {
        return Err(crate::error::Error::invalid(format!("eps must be positive, got {}", opts.eps)));
    }
    let m = MemoryMeter::disabled();
    let mut report = GradCheckReport {
        trials: opts.trials,
        nosave: opts.nosave,
        max_rel_err_1hop: 0.0,
        max_rel_err_2hop: 0.0,
        max_abs_grad: 0.0,
        worst: None,
    };
    let mut worst = (0.0, None);
    for t in 0..opts.trials {
        let inst = Instance::random(trial_seed(opts.suite_seed, t), &opts.limits);
        let up = inst.upstream();
        let (n, b) = (inst.graph.num_nodes(), inst.batch.len());
        let save = !opts.nosave;

        let (_, i1) = fused_1hop_forward(&inst.graph, &inst.x, &inst.batch, inst.k1, inst.base_seed, save, &m)?;
        let g1 = fused_1hop_backward(&up, i1.as_ref(), b, n, &m)?;
        let (_, i2) =
            fused_2hop_forward(&inst.graph, &inst.x, &inst.batch, inst.k1, inst.k2, inst.base_seed, save, &m)?;
        let g2 = fused_2hop_backward(&up, i2.as_ref(), b, n, &m)?;
        for g in [&g1, &g2] {
            for &v in g.values() {
                report.max_abs_grad = report.max_abs_grad.max(v.abs());
            }
        }
        if opts.nosave {
            continue;
        }

        let fd1 = finite_difference(&inst, &up, opts.eps, |x| {
            Ok(fused_1hop_forward(&inst.graph, x, &inst.batch, inst.k1, inst.base_seed, false, &m)?.0.into_vec())
        })?;
        let fd2 = finite_difference(&inst, &up, opts.eps, |x| {
            Ok(fused_2hop_forward_nosave(&inst.graph, x, &inst.batch, inst.k1, inst.k2, inst.base_seed, &m)?.into_vec())
        })?;
        let e1 = compare(&g1, &fd1, &mut worst, &inst, "1-hop");
        let e2 = compare(&g2, &fd2, &mut worst, &inst, "2-hop");
        report.max_rel_err_1hop = report.max_rel_err_1hop.max(e1);
        report.max_rel_err_2hop = report.max_rel_err_2hop.max(e2);
    }
    report.worst = worst.1;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_reproducible_and_bounded() {
        let lim = InstanceLimits {
            max_n: 30,
            max_d: 3,
            max_fanout: 4,
            max_batch: 5,
        };
        for s in 0..50 {
            let a = Instance::random(s, &lim);
            let b = Instance::random(s, &lim);
            assert_eq!(a.graph, b.graph);
            assert_eq!(a.x, b.x);
            assert_eq!(a.batch, b.batch);
            assert!(a.graph.num_nodes() <= 30 && a.x.dim() <= 3 && a.batch.len() <= 5);
            assert!(a.k1 <= 4 && a.k2 <= 4);
        }
    }

    #[test]
    fn small_suite_passes() {
        let opts = VerifyOptions {
            trials: 20,
            ..Default::default()
        };
        let r = run_verify(&opts).unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(r.checks.len(), 5);
        assert!(r.checks.iter().all(|c| c.trials == 20));
    }

    #[test]
    fn injected_fault_is_caught() {
        let opts = VerifyOptions {
            trials: 10,
            inject_fault: true,
            ..Default::default()
        };
        let r = run_verify(&opts).unwrap();
        assert!(!r.passed());
        let eq = r.check(CHECK_EQUIV_2HOP).unwrap();
        assert!(eq.failures > 0);
        assert!(eq.counterexample.as_ref().unwrap().contains("instance seed="));
        assert!(!r.check(CHECK_DETERMINISM).unwrap().passed());
    }

    #[test]
    fn zero_trials_pass_vacuously() {
        let r = run_verify(&VerifyOptions {
            trials: 0,
            ..Default::default()
        })
        .unwrap();
        assert!(r.passed());
        assert!(r.checks.iter().all(|c| c.trials == 0));
    }

    #[test]
    fn grad_check_passes_and_nosave_is_zero() {
        let opts = GradCheckOptions {
            trials: 5,
            ..Default::default()
        };
        let r = run_grad_check(&opts).unwrap();
        assert!(r.passed(), "{r}");
        assert!(r.max_abs_grad > 0.0);
        let r = run_grad_check(&GradCheckOptions { nosave: true, ..opts }).unwrap();
        assert!(r.passed());
        assert_eq!(r.max_abs_grad, 0.0);
    }

    #[test]
    fn rel_err_cases() {
        assert_eq!(rel_err(0.0, 0.0), 0.0);
        assert_eq!(rel_err(1.0, 1.0), 0.0);
        assert_eq!(rel_err(0.0, 1e-12), 1.0);
        assert!((rel_err(2.0, 1.0) - 0.5).abs() < 1e-15);
    }
}
