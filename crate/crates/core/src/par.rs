//! Trial fan-out. Every trial owns an RNG derived from `(seed, index)`, so
//! results do not depend on whether the batch ran on one thread or many.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// How a batch of independent trials is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is on, otherwise
    /// falls back to [`Execution::Sequential`].
    #[default]
    Parallel,
}

/// Deterministic per-trial stream.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs `f(0..n)` and returns the results in index order.
pub fn map_indexed<T, F>(exec: Execution, n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => (0..n).map(f).collect(),
        Execution::Parallel => parallel_map(n, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn sequential_and_parallel_agree() {
        let draw = |i: u64| trial_rng(7, i).gen::<u64>();
        let a = map_indexed(Execution::Sequential, 64, draw);
        let b = map_indexed(Execution::Parallel, 64, draw);
        assert_eq!(a, b);
        assert_ne!(a[0], a[1]);
    }
}
