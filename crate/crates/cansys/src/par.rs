//! Execution-mode switch shared by the scan-style operations.
//!
//! With the `parallel` feature (on by default) [`ExecMode::Parallel`]
//! fans independent work items out over rayon's global pool. Without
//! the feature both modes run sequentially, so callers never need
//! feature gates of their own.

/// How a scan over independent work items executes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ExecMode {
    /// One item after another on the calling thread.
    Sequential,
    /// Work stealing across threads; falls back to sequential when the
    /// `parallel` feature is disabled.
    #[default]
    Parallel,
}

/// Maps `f` over `items`, preserving order in the result.
#[cfg(feature = "parallel")]
pub fn map_items<T, U, F>(mode: ExecMode, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    match mode {
        ExecMode::Sequential => items.iter().map(f).collect(),
        ExecMode::Parallel => items.par_iter().map(f).collect(),
    }
}

/// Maps `f` over `items`, preserving order in the result.
#[cfg(not(feature = "parallel"))]
pub fn map_items<T, U, F>(_mode: ExecMode, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Maps `f` over `0..n`, preserving order in the result.
#[cfg(feature = "parallel")]
pub fn map_range<U, F>(mode: ExecMode, n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    use rayon::prelude::*;
    match mode {
        ExecMode::Sequential => (0..n).map(f).collect(),
        ExecMode::Parallel => (0..n).into_par_iter().map(f).collect(),
    }
}

/// Maps `f` over `0..n`, preserving order in the result.
#[cfg(not(feature = "parallel"))]
pub fn map_range<U, F>(_mode: ExecMode, n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..n).map(f).collect()
}
