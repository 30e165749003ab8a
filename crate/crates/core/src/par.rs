//! Order-preserving map over independent work items.
//!
//! Results always come back in input order, so any reduction done by the
//! caller over the returned `Vec` is identical for both backends.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, in parallel when the `parallel` feature is on.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_par(items, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_seq(items, f)
    }
}

pub fn map_seq<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_par<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Sums equally sized gradient vectors left to right.
pub fn sum_in_order(parts: &[Vec<f64>], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for part in parts {
        for (o, p) in out.iter_mut().zip(part) {
            *o += p;
        }
    }
    out
}

/// Batch items per work unit in [`accumulate`]. Fixed so that the
/// floating-point summation order does not depend on the thread count.
pub const CHUNK: usize = 8;

/// Runs `f` over `items` in chunks of [`CHUNK`]. Each call returns a scalar
/// and adds into a gradient buffer of length `len`; scalars and buffers are
/// summed chunk by chunk in input order.
pub fn accumulate<T, E, F>(items: &[T], len: usize, f: F) -> Result<(f64, Vec<f64>), E>
where
    T: Sync,
    E: Send,
    F: Fn(&T, &mut [f64]) -> Result<f64, E> + Sync + Send,
{
    let chunks: Vec<&[T]> = items.chunks(CHUNK).collect();
    let parts = map(&chunks, |chunk| -> Result<(f64, Vec<f64>), E> {
        let mut grads = vec![0.0; len];
        let mut total = 0.0;
        for item in chunk.iter() {
            total += f(item, &mut grads)?;
        }
        Ok((total, grads))
    });
    let mut total = 0.0;
    let mut grads = vec![0.0; len];
    for part in parts {
        let (t, g) = part?;
        total += t;
        for (a, b) in grads.iter_mut().zip(&g) {
            *a += b;
        }
    }
    Ok((total, grads))
}
