//! Data-parallel helpers with a sequential fallback.
//!
//! Reductions always split the input into fixed-size chunks, fold each chunk
//! independently and combine the partial results in chunk order. The parallel
//! and sequential paths therefore produce bit-identical results regardless of
//! the thread schedule. Without the `parallel` feature every call runs
//! sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Items folded per partial result in [`chunked_reduce`].
pub const REDUCE_CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

impl Execution {
    /// True when work will actually be spread over the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// `items.iter().map(f).collect()`, in input order.
pub fn map_collect<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// `(0..len).map(f).collect()`, in index order.
pub fn map_range<R, F>(exec: Execution, len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..len).map(f).collect()
}

/// Folds fixed-size chunks independently, then combines the partials left to
/// right. `combine` is only ever called in chunk order.
pub fn chunked_reduce<T, A, I, F, C>(exec: Execution, items: &[T], init: I, fold: F, mut combine: C) -> A
where
    T: Sync,
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut A, &T) + Sync + Send,
    C: FnMut(&mut A, A),
{
    let fold_chunk = |chunk: &[T]| {
        let mut acc = init();
        for item in chunk {
            fold(&mut acc, item);
        }
        acc
    };

    #[cfg(feature = "parallel")]
    let partials: Vec<A> = if exec.is_parallel() {
        items.par_chunks(REDUCE_CHUNK).map(fold_chunk).collect()
    } else {
        items.chunks(REDUCE_CHUNK).map(fold_chunk).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<A> = {
        let _ = exec;
        items.chunks(REDUCE_CHUNK).map(fold_chunk).collect()
    };

    let mut total = init();
    for partial in partials {
        combine(&mut total, partial);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_is_schedule_independent() {
        let xs: Vec<f64> = (0..10_000).map(|i| ((i * 7919) % 1013) as f64 * 1e-3 + 1e10).collect();
        let sum = |exec| chunked_reduce(exec, &xs, || 0.0, |a, x| *a += x, |a, b| *a += b);
        let par = sum(Execution::Parallel);
        assert_eq!(par.to_bits(), sum(Execution::Sequential).to_bits());
        for _ in 0..8 {
            assert_eq!(par.to_bits(), sum(Execution::Parallel).to_bits());
        }
    }

    #[test]
    fn maps_preserve_order() {
        let xs: Vec<u64> = (0..1000).collect();
        let sq = map_collect(Execution::Parallel, &xs, |x| x * x);
        assert_eq!(sq, xs.iter().map(|x| x * x).collect::<Vec<_>>());
        assert_eq!(
            map_range(Execution::Parallel, 1000, |i| i as u64 * 3),
            map_range(Execution::Sequential, 1000, |i| i as u64 * 3)
        );
    }

    #[test]
    fn empty_input_reduces_to_init() {
        let xs: [f64; 0] = [];
        assert_eq!(chunked_reduce(Execution::Parallel, &xs, || 1.5, |a, x| *a += x, |a, b| *a += b - 1.5), 1.5);
    }
}
