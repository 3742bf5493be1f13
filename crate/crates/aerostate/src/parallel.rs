//! Particle-parallelism control.
//!
//! The `AEROSTATE_THREADS` environment variable caps how many threads the
//! particle filters may use (0 = fully serial). Per-particle RNG streams
//! make the serial and parallel paths produce identical bytes, so the knob
//! only trades wall-clock time.

use rayon::prelude::*;

/// How to evaluate independent per-particle work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    #[default]
    Serial,
    Threads(usize),
}

impl Parallelism {
    /// Read `AEROSTATE_THREADS`. Unset, unparsable, or `0` means serial.
    pub fn from_env() -> Self {
        match std::env::var("AEROSTATE_THREADS") {
            Ok(v) => match v.trim().parse::<usize>() {
                Ok(0) | Err(_) => Parallelism::Serial,
                Ok(n) => Parallelism::Threads(n),
            },
            Err(_) => Parallelism::Serial,
        }
    }

    /// Run `f` on every element. The parallel path partitions by index and
    /// never reorders results, so output is independent of thread count.
    pub fn for_each_indexed<T, F>(&self, items: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize, &mut T) + Sync,
    {
        match *self {
            Parallelism::Serial => {
                for (i, item) in items.iter_mut().enumerate() {
                    f(i, item);
                }
            }
            Parallelism::Threads(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .expect("thread pool construction");
                pool.install(|| {
                    items
                        .par_iter_mut()
                        .enumerate()
                        .for_each(|(i, item)| f(i, item));
                });
            }
        }
    }
}
