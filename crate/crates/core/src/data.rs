//! Node features, seed batches and dataset resolution.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{gen_power_law, gen_uniform, load_edge_list, read_csr_cache, CsrGraph};
use crate::scalar::Scalar;

/// Dense row-major `N x D` node features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix<T> {
    num_nodes: usize,
    dim: usize,
    values: Vec<T>,
}

impl<T: Scalar> FeatureMatrix<T> {
    pub fn new(num_nodes: usize, dim: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != num_nodes * dim {
            return Err(Error::DimensionMismatch {
                what: "feature values",
                expected: num_nodes * dim,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("features"));
        }
        Ok(FeatureMatrix {
            num_nodes,
            dim,
            values,
        })
    }

    pub fn from_fn(num_nodes: usize, dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut values = Vec::with_capacity(num_nodes * dim);
        for v in 0..num_nodes {
            for d in 0..dim {
                values.push(f(v, d));
            }
        }
        Self::new(num_nodes, dim, values)
    }

    pub fn zeros(num_nodes: usize, dim: usize) -> Self {
        FeatureMatrix {
            num_nodes,
            dim,
            values: vec![T::zero(); num_nodes * dim],
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

    #[inline]
    pub fn row(&self, v: u32) -> &[T] {
        let start = v as usize * self.dim;
        &self.values[start..start + self.dim]
    }

    /// Mutable access for perturbation studies; values must stay finite.
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    /// Change the element width.
    pub fn convert<U: Scalar>(&self) -> FeatureMatrix<U> {
        FeatureMatrix {
            num_nodes: self.num_nodes,
            dim: self.dim,
            values: self.values.iter().map(|&v| U::from_f64_lossy(v.as_f64())).collect(),
        }
    }

    pub(crate) fn check_nodes(&self, num_nodes: usize) -> Result<()> {
        if self.num_nodes != num_nodes {
            return Err(Error::DimensionMismatch {
                what: "feature rows vs graph nodes",
                expected: num_nodes,
                got: self.num_nodes,
            });
        }
        Ok(())
    }
}

/// Seeds of one mini-batch with optional class labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedBatch {
    seeds: Vec<u32>,
    labels: Option<Vec<u32>>,
}

impl SeedBatch {
    pub fn new(seeds: Vec<u32>, num_nodes: usize) -> Result<Self> {
        if seeds.is_empty() {
            return Err(Error::invalid("seed batch must not be empty"));
        }
        if let Some(&bad) = seeds.iter().find(|&&s| s as usize >= num_nodes) {
            return Err(Error::NodeOutOfRange {
                node: i64::from(bad),
                num_nodes,
            });
        }
        Ok(SeedBatch { seeds, labels: None })
    }

    pub fn with_labels(mut self, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != self.seeds.len() {
            return Err(Error::DimensionMismatch {
                what: "labels vs seeds",
                expected: self.seeds.len(),
                got: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn seeds(&self) -> &[u32] {
        &self.seeds
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }

    pub(crate) fn check_nodes(&self, num_nodes: usize) -> Result<()> {
        match self.seeds.iter().find(|&&s| s as usize >= num_nodes) {
            Some(&bad) => Err(Error::NodeOutOfRange {
                node: i64::from(bad),
                num_nodes,
            }),
            None => Ok(()),
        }
    }
}

/// Uniform features in `[-1, 1)`, deterministic in `seed`.
pub fn synth_features<T: Scalar>(num_nodes: usize, dim: usize, seed: u64) -> FeatureMatrix<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..num_nodes * dim)
        .map(|_| T::from_f64_lossy(rng.random_range(-1.0..1.0)))
        .collect();
    FeatureMatrix {
        num_nodes,
        dim,
        values,
    }
}

/// Linearly separable labels: the argmax of a fixed random projection of
/// each node's own features.
pub fn synth_labels<T: Scalar>(features: &FeatureMatrix<T>, classes: usize, seed: u64) -> Vec<u32> {
    assert!(classes >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = features.dim();
    let proj: Vec<f64> = (0..classes * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    (0..features.num_nodes() as u32)
        .map(|v| {
            let row = features.row(v);
            let score = |c: usize| -> f64 {
                proj[c * dim..(c + 1) * dim]
                    .iter()
                    .zip(row)
                    .map(|(p, x)| p * x.as_f64())
                    .sum()
            };
            (0..classes)
                .map(|c| (c, score(c)))
                .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
                .0 as u32
        })
        .collect()
}

/// Reproducible dataset description, as written in benchmark CSVs.
///
/// ```text
/// synth:powerlaw:N=100000,deg=20,exp=2.1,seed=42
/// synth:uniform:N=5000,deg=25,seed=1
/// edgelist:/data/graph.txt
/// csr:/data/graph.csr
/// ```
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    PowerLaw {
        num_nodes: usize,
        avg_degree: f64,
        exponent: f64,
        seed: u64,
    },
    Uniform {
        num_nodes: usize,
        degree: usize,
        seed: u64,
    },
    EdgeList(PathBuf),
    CsrCache(PathBuf),
}

impl DatasetSpec {
    /// Materialize the graph. Edge lists are symmetrized.
    pub fn load(&self) -> Result<CsrGraph> {
        match self {
            DatasetSpec::PowerLaw {
                num_nodes,
                avg_degree,
                exponent,
                seed,
            } => gen_power_law(*num_nodes, *avg_degree, *exponent, *seed),
            DatasetSpec::Uniform {
                num_nodes,
                degree,
                seed,
            } => gen_uniform(*num_nodes, *degree, *seed),
            DatasetSpec::EdgeList(path) => load_edge_list(path, true),
            DatasetSpec::CsrCache(path) => read_csr_cache(path),
        }
    }
}

impl fmt::Display for DatasetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetSpec::PowerLaw {
                num_nodes,
                avg_degree,
                exponent,
                seed,
            } => write!(f, "synth:powerlaw:N={num_nodes},deg={avg_degree},exp={exponent},seed={seed}"),
            DatasetSpec::Uniform {
                num_nodes,
                degree,
                seed,
            } => write!(f, "synth:uniform:N={num_nodes},deg={degree},seed={seed}"),
            DatasetSpec::EdgeList(p) => write!(f, "edgelist:{}", p.display()),
            DatasetSpec::CsrCache(p) => write!(f, "csr:{}", p.display()),
        }
    }
}

impl FromStr for DatasetSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownDataset(s.to_string());
        if let Some(path) = s.strip_prefix("edgelist:") {
            return if path.is_empty() { Err(unknown()) } else { Ok(DatasetSpec::EdgeList(path.into())) };
        }
        if let Some(path) = s.strip_prefix("csr:") {
            return if path.is_empty() { Err(unknown()) } else { Ok(DatasetSpec::CsrCache(path.into())) };
        }
        let rest = s.strip_prefix("synth:").ok_or_else(unknown)?;
        let (kind, params) = rest.split_once(':').ok_or_else(unknown)?;
        let mut kv = std::collections::BTreeMap::new();
        for pair in params.split(',') {
            let (k, v) = pair.split_once('=').ok_or_else(unknown)?;
            kv.insert(k.trim(), v.trim());
        }
        fn take<V: FromStr>(
            kv: &mut std::collections::BTreeMap<&str, &str>,
            key: &str,
            spec: &str,
        ) -> Result<V> {
            let raw = kv
                .remove(key)
                .ok_or_else(|| Error::UnknownDataset(format!("{spec} (missing `{key}`)")))?;
            raw.parse()
                .map_err(|_| Error::UnknownDataset(format!("{spec} (bad `{key}`)")))
        }
        let spec = match kind {
            "powerlaw" => DatasetSpec::PowerLaw {
                num_nodes: take(&mut kv, "N", s)?,
                avg_degree: take(&mut kv, "deg", s)?,
                exponent: take(&mut kv, "exp", s)?,
                seed: take(&mut kv, "seed", s)?,
            },
            "uniform" => DatasetSpec::Uniform {
                num_nodes: take(&mut kv, "N", s)?,
                degree: take(&mut kv, "deg", s)?,
                seed: take(&mut kv, "seed", s)?,
            },
            _ => return Err(unknown()),
        };
        if let Some(extra) = kv.keys().next() {
            return Err(Error::UnknownDataset(format!("{s} (unexpected `{extra}`)")));
        }
        Ok(spec)
    }
}
