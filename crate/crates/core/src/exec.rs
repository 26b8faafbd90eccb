//! Pluggable execution of independent jobs.
//!
//! The core never spawns threads; callers that have them pass an [`Executor`]
//! that runs jobs concurrently. Results always come back in input order, so
//! every reduction downstream is deterministic.

use alloc::vec::Vec;

pub trait Executor: Sync {
    /// Applies `f` to every item and returns the results in input order.
    fn map<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync;

    /// Number of jobs worth running at once.
    fn parallelism(&self) -> usize {
        1
    }
}

/// Runs every job on the calling thread.
#[derive(Clone, Copy, Debug, Default)]
pub struct Serial;

impl Executor for Serial {
    fn map<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync,
    {
        items.into_iter().map(f).collect()
    }
}

/// Splits `0..len` into at most `parts` contiguous, nearly equal ranges.
pub fn chunk_ranges(len: usize, parts: usize) -> Vec<core::ops::Range<usize>> {
    let parts = parts.clamp(1, len.max(1));
    let base = len / parts;
    let extra = len % parts;
    let mut out = Vec::with_capacity(parts);
    let mut start = 0;
    for i in 0..parts {
        let size = base + usize::from(i < extra);
        out.push(start..start + size);
        start += size;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn chunks_cover_range_in_order() {
        assert_eq!(chunk_ranges(10, 3), vec![0..4, 4..7, 7..10]);
        assert_eq!(chunk_ranges(2, 4), vec![0..1, 1..2]);
        assert_eq!(chunk_ranges(0, 4), vec![0..0]);
    }

    #[test]
    fn serial_preserves_order() {
        assert_eq!(Serial.map(vec![1, 2, 3], |x| x * 10), vec![10, 20, 30]);
    }
}
