//! Execution strategy switch: data-parallel (rayon) or sequential.
//!
//! The parallel path is compiled in behind the `parallel` feature (on by
//! default) and selected at runtime with [`Exec::Par`]. Without the feature,
//! `Exec::Par` silently degrades to the sequential path so callers never need
//! to care. Results are bit-identical across modes: work is split by column
//! index and written to disjoint output slices, with no reductions whose
//! order could float.

/// Runtime choice of execution strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    /// Data-parallel over matrix columns when the `parallel` feature is on.
    #[default]
    Par,
    /// Single-threaded reference path.
    Seq,
}

impl Exec {
    /// Apply `f(j, column_j)` to every `len`-sized column of `buf`, which
    /// must hold `len * ncols` elements in column-major order.
    pub fn for_each_column<T, F>(self, buf: &mut [T], len: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync,
    {
        assert_eq!(buf.len() % len.max(1), 0, "buffer not a whole number of columns");
        match self {
            #[cfg(feature = "parallel")]
            Exec::Par => {
                use rayon::prelude::*;
                buf.par_chunks_mut(len)
                    .enumerate()
                    .for_each(|(j, col)| f(j, col));
            }
            #[cfg(not(feature = "parallel"))]
            Exec::Par => {
                for (j, col) in buf.chunks_mut(len).enumerate() {
                    f(j, col);
                }
            }
            Exec::Seq => {
                for (j, col) in buf.chunks_mut(len).enumerate() {
                    f(j, col);
                }
            }
        }
    }

    /// Fill `out[k]` with `f(k)` for `k` in `0..out.len()`, either in
    /// parallel or sequentially. Output order is fixed by index.
    pub fn map_indexed<T, F>(self, out: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Par => {
                use rayon::prelude::*;
                out.par_iter_mut().enumerate().for_each(|(k, slot)| *slot = f(k));
            }
            #[cfg(not(feature = "parallel"))]
            Exec::Par => {
                for (k, slot) in out.iter_mut().enumerate() {
                    *slot = f(k);
                }
            }
            Exec::Seq => {
                for (k, slot) in out.iter_mut().enumerate() {
                    *slot = f(k);
                }
            }
        }
    }
}
