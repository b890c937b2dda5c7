//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (on by default) [`Exec::Parallel`] runs on the
//! rayon pool; without it every call runs sequentially. Each output slot is
//! produced by an independent pure call, so results are identical whatever
//! the worker count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Execution strategy for batch work.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

/// Whether [`Exec::Parallel`] actually uses worker threads in this build.
pub const fn parallel_available() -> bool {
    cfg!(feature = "parallel")
}

/// Computes `f(0), …, f(n-1)` in index order.
pub fn map_indexed<T, F>(n: usize, exec: Exec, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
        _ => (0..n).map(f).collect(),
    }
}

/// Maps a slice in order.
pub fn map_slice<S, T, F>(items: &[S], exec: Exec, f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

/// Fills `buf` row by row; `f(row, row_slice)` writes one row.
pub fn fill_rows<T, F>(buf: &mut [T], row_len: usize, exec: Exec, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    if row_len == 0 {
        return;
    }
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => buf
            .par_chunks_mut(row_len)
            .enumerate()
            .for_each(|(y, row)| f(y, row)),
        _ => buf
            .chunks_mut(row_len)
            .enumerate()
            .for_each(|(y, row)| f(y, row)),
    }
}

/// Caps the global worker pool. `0` leaves rayon's automatic choice.
/// Must run before the first parallel call; later calls fail.
pub fn configure_threads(threads: usize) -> Result<()> {
    #[cfg(feature = "parallel")]
    {
        if threads > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        }
        Ok(())
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        Ok::<(), Error>(())
    }
}

/// Runs `op` inside a dedicated pool of `threads` workers.
pub fn with_threads<R, OP>(threads: usize, op: OP) -> Result<R>
where
    R: Send,
    OP: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        Ok(pool.install(op))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        Ok(op())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_is_ordered() {
        for exec in [Exec::Sequential, Exec::Parallel] {
            let v = map_indexed(1000, exec, |i| i * i);
            assert!(v.iter().enumerate().all(|(i, &x)| x == i * i));
        }
    }

    #[test]
    fn rows_are_filled() {
        let mut buf = vec![0usize; 12];
        fill_rows(&mut buf, 4, Exec::Parallel, |y, row| {
            for (x, v) in row.iter_mut().enumerate() {
                *v = y * 10 + x;
            }
        });
        assert_eq!(buf[9], 21);
    }
}
