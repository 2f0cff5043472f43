//! Worker pools for the data-parallel kernels.

use std::num::NonZeroUsize;

use crate::error::{Error, Result};

/// A fixed-size pool of workers that kernels run on via [`Env::install`].
pub struct Env {
    pool: rayon::ThreadPool,
    workers: usize,
}

impl Env {
    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::domain("worker count must be at least 1"));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .thread_name(|i| format!("ampsim-worker-{i}"))
            .build()
            .map_err(|e| Error::domain(format!("failed to start {workers} workers: {e}")))?;
        Ok(Env { pool, workers })
    }

    /// One worker per available hardware thread.
    pub fn with_default_workers() -> Result<Self> {
        Self::new(default_workers())
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Runs `f` with every kernel it calls scheduled on this pool.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }
}

impl std::fmt::Debug for Env {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Env").field("workers", &self.workers).finish()
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(NonZeroUsize::get)
        .unwrap_or(1)
}
