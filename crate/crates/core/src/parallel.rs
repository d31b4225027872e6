//! Batch maps that run on the rayon pool when the `parallel` feature is on.
//!
//! Parameter sweeps, continuation ladders and criterion grids are all
//! embarrassingly parallel over independent jobs; both maps preserve input
//! order so outputs stay deterministic.

/// Applies `f` to every item in order on the current thread.
pub fn map_sequential<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Applies `f` to every item, in parallel when the `parallel` feature is
/// enabled. Results come back in input order.
#[cfg(feature = "parallel")]
pub fn map_parallel<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_parallel<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    map_sequential(items, f)
}

/// Sizes the global pool. Returns false if it was already initialised or
/// the crate was built without the `parallel` feature.
pub fn configure_threads(threads: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maps_agree_and_keep_order() {
        let xs: Vec<u64> = (0..257).collect();
        let a = map_sequential(&xs, |x| x * x + 1);
        let b = map_parallel(&xs, |x| x * x + 1);
        assert_eq!(a, b);
        assert_eq!(b[10], 101);
    }
}
