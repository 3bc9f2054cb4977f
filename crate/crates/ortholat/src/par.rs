//! Data-parallel helpers. With the `parallel` feature the heavy inner loops
//! (coset frontier expansion, isometry searches, building edge tests) run on
//! rayon; without it everything is sequential. Results are identical either
//! way: parallel maps preserve input order and searches reduce to the
//! lowest-index hit.

use std::sync::atomic::{AtomicBool, Ordering};

static FORCE_SERIAL: AtomicBool = AtomicBool::new(false);

/// Force sequential execution even when the `parallel` feature is compiled
/// in. Used by the benchmark suite to compare both paths in one binary.
pub fn set_force_serial(v: bool) {
    FORCE_SERIAL.store(v, Ordering::SeqCst);
}

pub fn force_serial() -> bool {
    FORCE_SERIAL.load(Ordering::SeqCst)
}

#[cfg(feature = "parallel")]
pub fn map_vec<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    if force_serial() || items.len() < 2 {
        items.iter().map(f).collect()
    } else {
        items.par_iter().map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map_vec<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.iter().map(f).collect()
}

/// First item (by index) for which `f` returns Some. Deterministic.
#[cfg(feature = "parallel")]
pub fn find_map_first<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> Option<R> + Sync + Send) -> Option<R> {
    use rayon::prelude::*;
    if force_serial() || items.len() < 2 {
        items.iter().find_map(f)
    } else {
        items.par_iter().find_map_first(f)
    }
}

#[cfg(not(feature = "parallel"))]
pub fn find_map_first<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> Option<R> + Sync + Send) -> Option<R> {
    items.iter().find_map(f)
}

/// Configure the global thread pool size. Call at most once, before any
/// parallel work; later calls are ignored (rayon pins its global pool).
#[cfg(feature = "parallel")]
pub fn configure_threads(n: usize) {
    if n == 0 {
        return;
    }
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
}

#[cfg(not(feature = "parallel"))]
pub fn configure_threads(_n: usize) {}
