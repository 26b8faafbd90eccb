//! Scoped worker threads implementing the core [`Executor`].

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use lion_core::exec::Executor;

/// Runs jobs on up to `workers` scoped threads; results keep input order.
#[derive(Clone, Copy, Debug)]
pub struct Threads {
    pub workers: usize,
}

impl Threads {
    pub fn new(workers: usize) -> Self {
        Self { workers: workers.max(1) }
    }

    /// One worker per available core.
    pub fn available() -> Self {
        Self::new(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
    }
}

impl Default for Threads {
    fn default() -> Self {
        Self::available()
    }
}

impl Executor for Threads {
    fn map<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync,
    {
        let n = items.len();
        let workers = self.workers.min(n);
        if workers <= 1 {
            return items.into_iter().map(f).collect();
        }
        let slots: Vec<Mutex<Option<T>>> = items.into_iter().map(|t| Mutex::new(Some(t))).collect();
        let results: Vec<Mutex<Option<R>>> = (0..n).map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= n {
                        break;
                    }
                    let item = slots[i].lock().unwrap().take().expect("each job taken once");
                    let r = f(item);
                    *results[i].lock().unwrap() = Some(r);
                });
            }
        });
        results
            .into_iter()
            .map(|m| m.into_inner().unwrap().expect("every job ran"))
            .collect()
    }

    fn parallelism(&self) -> usize {
        self.workers
    }
}
