//! Independent reference implementations used by the integration tests.
//! Written directly from the operator semantics with plain loops and
//! dense buffers, sharing nothing with the library beyond the graph, the
//! features and the public RNG stream.
#![allow(dead_code)]

use fused_sage::{CsrGraph, FeatureMatrix, RngStream};

pub const PAD: i32 = -1;

/// Algorithm R over an explicit neighbor list.
pub fn reservoir(nbrs: &[u32], k: usize, stream: &mut RngStream) -> Vec<i32> {
    let mut out = vec![PAD; k];
    for (i, &v) in nbrs.iter().enumerate() {
        if i < k {
            out[i] = v as i32;
        } else {
            let j = stream.uniform_index(i + 1);
            if j < k {
                out[j] = v as i32;
            }
        }
    }
    out
}

fn valid(row: &[i32]) -> Vec<usize> {
    row.iter().filter(|&&v| v != PAD).map(|&v| v as usize).collect()
}

/// Mean of the given feature rows; zero for an empty set.
fn mean_rows(x: &FeatureMatrix<f64>, ids: &[usize]) -> Vec<f64> {
    let d = x.dim();
    let mut acc = vec![0.0; d];
    for &v in ids {
        for (a, &f) in acc.iter_mut().zip(x.row(v as u32)) {
            *a += f;
        }
    }
    let n = ids.len().max(1) as f64;
    acc.iter().map(|a| a / n).collect()
}

pub struct OneHop {
    pub out: Vec<f64>,
    pub rows: Vec<Vec<i32>>,
}

pub fn one_hop(graph: &CsrGraph, x: &FeatureMatrix<f64>, seeds: &[u32], k: usize, base: u64) -> OneHop {
    let mut out = Vec::new();
    let mut rows = Vec::new();
    for (pos, &s) in seeds.iter().enumerate() {
        let mut stream = RngStream::derive(base, pos as u64, 0, 0);
        let row = reservoir(graph.neighbors(s), k, &mut stream);
        out.extend(mean_rows(x, &valid(&row)));
        rows.push(row);
    }
    OneHop { out, rows }
}

pub struct TwoHop {
    pub out: Vec<f64>,
    pub s1: Vec<Vec<i32>>,
    /// `s2[r][j]` is the second-hop row of slot `j` of root `r`.
    pub s2: Vec<Vec<Vec<i32>>>,
}

pub fn two_hop(graph: &CsrGraph, x: &FeatureMatrix<f64>, seeds: &[u32], k1: usize, k2: usize, base: u64) -> TwoHop {
    let d = x.dim();
    let mut res = TwoHop {
        out: Vec::new(),
        s1: Vec::new(),
        s2: Vec::new(),
    };
    for (pos, &s) in seeds.iter().enumerate() {
        let mut stream = RngStream::derive(base, pos as u64, 1, 0);
        let first = reservoir(graph.neighbors(s), k1, &mut stream);
        let mut second = Vec::new();
        let mut acc = vec![0.0; d];
        let mut used = 0usize;
        for (j, &u) in first.iter().enumerate() {
            if u == PAD {
                second.push(vec![PAD; k2]);
                continue;
            }
            let mut stream = RngStream::derive(base, pos as u64, 2, j as u32);
            let row = reservoir(graph.neighbors(u as u32), k2, &mut stream);
            let inner = mean_rows(x, &valid(&row));
            for (a, v) in acc.iter_mut().zip(inner) {
                *a += v;
            }
            used += 1;
            second.push(row);
        }
        res.out.extend(acc.iter().map(|a| a / used.max(1) as f64));
        res.s1.push(first);
        res.s2.push(second);
    }
    res
}

/// Dense adjoint of [`one_hop`].
pub fn one_hop_backward(rows: &[Vec<i32>], up: &[f64], n: usize, d: usize) -> Vec<f64> {
    let mut g = vec![0.0; n * d];
    for (i, row) in rows.iter().enumerate() {
        let ids = valid(row);
        let c = ids.len().max(1) as f64;
        for v in ids {
            for t in 0..d {
                g[v * d + t] += up[i * d + t] / c;
            }
        }
    }
    g
}

/// Dense adjoint of [`two_hop`].
pub fn two_hop_backward(s1: &[Vec<i32>], s2: &[Vec<Vec<i32>>], up: &[f64], n: usize, d: usize) -> Vec<f64> {
    let mut g = vec![0.0; n * d];
    for (r, first) in s1.iter().enumerate() {
        let k1_eff = valid(first).len().max(1);
        for (j, &u) in first.iter().enumerate() {
            if u == PAD {
                continue;
            }
            let ids = valid(&s2[r][j]);
            let c = (k1_eff * ids.len().max(1)) as f64;
            for w in ids {
                for t in 0..d {
                    g[w * d + t] += up[r * d + t] / c;
                }
            }
        }
    }
    g
}

pub fn flatten(rows: &[Vec<i32>]) -> Vec<i32> {
    rows.concat()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn bitwise(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

/// Central differences of `<up, f(X)>` over every feature entry.
pub fn fd_gradient(x: &FeatureMatrix<f64>, up: &[f64], eps: f64, f: impl Fn(&FeatureMatrix<f64>) -> Vec<f64>) -> Vec<f64> {
    let mut x = x.clone();
    let len = x.values().len();
    let mut g = vec![0.0; len];
    for i in 0..len {
        let orig = x.values()[i];
        x.values_mut()[i] = orig + eps;
        let plus = f(&x);
        x.values_mut()[i] = orig - eps;
        let minus = f(&x);
        x.values_mut()[i] = orig;
        g[i] = up.iter().zip(plus.iter().zip(&minus)).map(|(u, (p, m))| u * (p - m)).sum::<f64>() / (2.0 * eps);
    }
    g
}

/// Relative error with exact agreement (including 0 vs 0) read as 0.
pub fn rel_err(a: f64, b: f64) -> f64 {
    let diff = (a - b).abs();
    if diff == 0.0 {
        0.0
    } else {
        diff / a.abs().max(b.abs())
    }
}

pub struct AdamW {
    pub lr: f64,
    pub wd: f64,
    pub b1: f64,
    pub b2: f64,
    pub eps: f64,
}

/// One decoupled-weight-decay Adam step on a scalar: `(p, m, v)`.
pub fn adamw_scalar(p: f64, g: f64, m: f64, v: f64, t: u64, c: &AdamW) -> (f64, f64, f64) {
    let m = c.b1 * m + (1.0 - c.b1) * g;
    let v = c.b2 * v + (1.0 - c.b2) * g * g;
    let m_hat = m / (1.0 - c.b1.powf(t as f64));
    let v_hat = v / (1.0 - c.b2.powf(t as f64));
    let p = p - c.lr * c.wd * p;
    (p - c.lr * m_hat / (v_hat.sqrt() + c.eps), m, v)
}
