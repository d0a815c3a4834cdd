//! Execution policy for the data-parallel loops (exact enumeration chunks,
//! Monte Carlo blocks, scenario sweeps).
//!
//! Work is always split into the same fixed set of pieces and merged in piece
//! order, so results do not depend on the policy or on the thread count.
//! Without the `parallel` feature every policy runs sequentially.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Sequential,
    #[default]
    Parallel,
}

impl Parallelism {
    /// The policy that will actually be used in this build.
    pub fn effective(self) -> Parallelism {
        if cfg!(feature = "parallel") {
            self
        } else {
            Parallelism::Sequential
        }
    }
}

/// Evaluates `f(0..n)` and returns the results in index order.
pub(crate) fn map_indexed<R, F>(policy: Parallelism, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match policy.effective() {
        Parallelism::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        Parallelism::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        #[cfg(not(feature = "parallel"))]
        Parallelism::Parallel => unreachable!(),
    }
}
