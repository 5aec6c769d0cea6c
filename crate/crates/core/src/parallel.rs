//! Data-parallel map with a sequential fallback.
//!
//! Batch workloads (classification batteries, parameter sweeps, per-λ
//! resolvent assemblies) funnel through [`par_map`]. With the default
//! `parallel` feature the closure runs on the rayon pool; without it the
//! same call is a plain sequential map, which keeps the crate usable on
//! targets where rayon is unwanted and gives the bench suite a baseline.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Sequential map with the same signature, for side-by-side benchmarks.
pub fn seq_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Limit the rayon pool for this process. No-op without the feature.
#[cfg(feature = "parallel")]
pub fn set_jobs(jobs: usize) {
    if jobs > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
}

#[cfg(not(feature = "parallel"))]
pub fn set_jobs(_jobs: usize) {}
