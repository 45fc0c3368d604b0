//! Chunked map/reduce that runs on rayon when the `parallel` feature is
//! enabled and sequentially otherwise.
//!
//! Work is always split into the same fixed chunks and chunk results are
//! folded in chunk order, so both paths return bit-identical results.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this build can actually run work in parallel.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Evaluates `chunk` on each chunk index in `0..chunks` and folds the
/// results left to right with `combine`.
pub fn map_reduce<T, F, C>(exec: Execution, chunks: usize, chunk: F, combine: C) -> Option<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
    C: Fn(T, T) -> T + Sync + Send,
{
    let results: Vec<T> = match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..chunks).into_par_iter().map(&chunk).collect()
        }
        _ => (0..chunks).map(&chunk).collect(),
    };
    results.into_iter().reduce(combine)
}

/// Maps `f` over `items`, preserving order.
pub fn map_collect<I, T, F>(exec: Execution, items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_paths_agree() {
        let f = |i: usize| (i as f64).sqrt();
        let seq = map_reduce(Execution::Sequential, 1000, f, |a, b| a + b).unwrap();
        let par = map_reduce(Execution::Parallel, 1000, f, |a, b| a + b).unwrap();
        assert_eq!(seq.to_bits(), par.to_bits());
        assert!(map_reduce(Execution::Parallel, 0, f, |a, b| a + b).is_none());
    }

    #[test]
    fn map_collect_keeps_order() {
        let xs: Vec<usize> = (0..100).collect();
        let ys = map_collect(Execution::Parallel, &xs, |x| x * 2);
        assert_eq!(ys, xs.iter().map(|x| x * 2).collect::<Vec<_>>());
    }
}
