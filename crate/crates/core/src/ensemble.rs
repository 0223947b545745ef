//! Path-parallel map. Each path derives its own random stream from its
//! index, so the output order and values do not depend on scheduling.

/// `(0..paths).map(f)`, in parallel when the `parallel` feature is on.
pub fn map_paths<T, F>(paths: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..paths as u64).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..paths as u64).map(f).collect()
    }
}

/// Fallible variant; the first error by path index wins.
pub fn try_map_paths<T, E, F>(paths: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u64) -> Result<T, E> + Sync + Send,
{
    map_paths(paths, f).into_iter().collect()
}
