//! Execution strategy for the data-parallel estimator loops.
//!
//! All Monte Carlo work is expressed as an indexed task list reduced into a
//! `Vec` in index order, so the parallel and sequential paths produce
//! identical results. The `parallel` feature (on by default) backs
//! [`Exec::Parallel`] with rayon; without it only the sequential path is
//! compiled.

/// How to run a batch of independent tasks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

// The default depends on the feature set, so it cannot be derived.
#[allow(clippy::derivable_impls)]
impl Default for Exec {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Exec::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            Exec::Sequential
        }
    }
}

/// Runs `f` over task indices `0..count`, returning results in index order.
pub fn run_tasks<T, F>(exec: Exec, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        Exec::Sequential => (0..count).map(f).collect(),
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            (0..count).into_par_iter().map(f).collect()
        }
    }
}
