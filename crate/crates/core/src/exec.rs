//! Sequential / data-parallel execution of per-cell kernels.
//!
//! With the `parallel` feature (default) the elementwise kernels and batch
//! runs fan out over rayon's global pool. Without it every mode runs
//! sequentially. Only elementwise maps are parallelized; reductions stay
//! sequential so results are bit-identical in either mode.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this length the parallel mode still runs sequentially.
pub const PAR_MIN_LEN: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    Parallel,
}

impl Default for ExecMode {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }
}

impl ExecMode {
    /// True when this mode will actually use worker threads for `len` items.
    pub fn is_parallel_for(self, len: usize) -> bool {
        cfg!(feature = "parallel") && self == ExecMode::Parallel && len >= PAR_MIN_LEN
    }

    /// `(0..len).map(f).collect()`, possibly in parallel.
    pub fn map<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel_for(len) {
            return (0..len).into_par_iter().map(f).collect();
        }
        (0..len).map(f).collect()
    }

    /// Map over a slice of independent jobs regardless of their count.
    pub fn map_jobs<I, T, F>(self, items: &[I], f: F) -> Vec<T>
    where
        I: Sync,
        T: Send,
        F: Fn(&I) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == ExecMode::Parallel {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let n = PAR_MIN_LEN * 3 + 7;
        let f = |i: usize| (i as f64).sin() * 1.5 + i as f64;
        let a = ExecMode::Sequential.map(n, f);
        let b = ExecMode::Parallel.map(n, f);
        assert_eq!(a, b);
        let jobs: Vec<u64> = (0..33).collect();
        assert_eq!(
            ExecMode::Sequential.map_jobs(&jobs, |j| j * j),
            ExecMode::Parallel.map_jobs(&jobs, |j| j * j)
        );
    }
}
