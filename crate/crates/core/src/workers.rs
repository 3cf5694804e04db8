//! Worker pools. Every parallel operator runs on the current rayon pool and
//! produces identical results for any pool size.

use crate::error::{Error, Result};

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "FSA_WORKERS";

pub struct Workers {
    pool: rayon::ThreadPool,
}

impl Workers {
    pub fn new(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::invalid("worker count must be >= 1"));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(count)
            .thread_name(|i| format!("fsa-worker-{i}"))
            .build()
            .map_err(|e| Error::invalid(e.to_string()))?;
        Ok(Workers { pool })
    }

    /// `FSA_WORKERS` if set, otherwise the available parallelism.
    pub fn from_env() -> Result<Self> {
        match std::env::var(WORKERS_ENV) {
            Ok(v) => {
                let n = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::invalid(format!("{WORKERS_ENV}={v} is not a count")))?;
                Workers::new(n)
            }
            Err(_) => Workers::new(std::thread::available_parallelism().map_or(1, |n| n.get())),
        }
    }

    pub fn count(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// Run `f` with this pool as the current rayon pool.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }
}

impl std::fmt::Debug for Workers {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Workers").field("count", &self.count()).finish()
    }
}
