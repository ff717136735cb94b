//! Execution policy for sweep drivers.
//!
//! Every sweep in the crate goes through [`Exec`], so the same kernel can be
//! driven either by rayon or by a plain iterator. Results always come back in
//! input order, which keeps reports reproducible regardless of thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Data-parallel over rayon's global pool. Without the `parallel`
    /// feature this degrades to sequential execution.
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    /// Maps and then folds in input order; the fold is sequential so sums are
    /// bit-identical between policies.
    pub fn map_sum<T, F, R>(self, items: &[T], f: F) -> R
    where
        T: Sync,
        R: Send + std::iter::Sum<R>,
        F: Fn(&T) -> R + Sync + Send,
    {
        self.map(items, f).into_iter().sum()
    }
}
