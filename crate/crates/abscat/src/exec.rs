//! Execution helpers: data-parallel maps with a sequential fallback.
//!
//! With the `parallel` feature enabled (default) the maps run on rayon using
//! fixed-size chunking so the floating-point accumulation order does not
//! depend on the number of worker threads. Compiled without the feature, or
//! after `set_serial(true)`, everything runs sequentially. The CLI's
//! `--threads 1` maps to serial mode, which is the bit-reproducible path.

use std::sync::atomic::{AtomicBool, Ordering};

static FORCE_SERIAL: AtomicBool = AtomicBool::new(false);

/// Force sequential execution at runtime even when built with `parallel`.
pub fn set_serial(serial: bool) {
    FORCE_SERIAL.store(serial, Ordering::SeqCst);
}

/// True when maps will run sequentially.
pub fn is_serial() -> bool {
    if cfg!(not(feature = "parallel")) {
        return true;
    }
    FORCE_SERIAL.load(Ordering::SeqCst)
}

/// Configure the global rayon pool. `threads == 1` selects serial mode.
/// Calling it more than once keeps the first pool (rayon limitation) but
/// still updates the serial flag.
pub fn set_threads(threads: usize) {
    set_serial(threads <= 1);
    #[cfg(feature = "parallel")]
    {
        if threads > 1 {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
        }
    }
}

const CHUNK: usize = 256;

/// Map `f` over `0..n`, collecting results in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    #[cfg(feature = "parallel")]
    {
        if !is_serial() {
            use rayon::prelude::*;
            let mut out: Vec<Option<T>> = (0..n).map(|_| None).collect();
            out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
                let base = c * CHUNK;
                for (j, slot) in chunk.iter_mut().enumerate() {
                    *slot = Some(f(base + j));
                }
            });
            return out.into_iter().map(|x| x.unwrap()).collect();
        }
    }
    (0..n).map(f).collect()
}

/// Apply `f` to fixed-size mutable row chunks of `data`, in parallel when
/// enabled. `f` receives the chunk index and the chunk.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    #[cfg(feature = "parallel")]
    {
        if !is_serial() {
            use rayon::prelude::*;
            data.par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(i, c)| f(i, c));
            return;
        }
    }
    for (i, c) in data.chunks_mut(chunk).enumerate() {
        f(i, c);
    }
}

/// Deterministic sum of `f(i)` over `0..n`: chunk partial sums are computed
/// (possibly in parallel) and combined in chunk order.
pub fn sum_indexed<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let partials = map_indexed(chunks, |c| {
        let lo = c * CHUNK;
        let hi = ((c + 1) * CHUNK).min(n);
        let mut s = 0.0;
        for i in lo..hi {
            s += f(i);
        }
        s
    });
    partials.into_iter().sum()
}
