//! Reproducible random streams.
//!
//! Every Monte Carlo loop is cut into fixed-size batches; batch `b` draws from
//! a ChaCha stream keyed by `(seed, b)`. Totals are sums over batches taken in
//! batch order, so a result depends only on the seed and the sample count,
//! never on how many threads ran the batches.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

pub const BATCH_SIZE: usize = 1 << 14;

pub fn stream(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Split `total` samples into `(stream id, batch length)` pairs.
pub fn batches(total: usize) -> Vec<(u64, usize)> {
    (0..total.div_ceil(BATCH_SIZE))
        .map(|b| (b as u64, BATCH_SIZE.min(total - b * BATCH_SIZE)))
        .collect()
}

/// Run `work(rng, len)` over every batch in parallel and return the
/// per-batch results in batch order.
pub fn map_batches<T, F>(seed: u64, total: usize, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    batches(total)
        .into_par_iter()
        .map(|(id, len)| work(&mut stream(seed, id), len))
        .collect()
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the signs
/// of `R`'s diagonal folded into `Q`.
pub fn random_rotation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..n {
        if r[(k, k)] < 0.0 {
            q.column_mut(k).neg_mut();
        }
    }
    q
}

/// Log-uniform draw from `[lo, hi]`.
pub fn log_uniform<R: Rng + ?Sized>(lo: f64, hi: f64, rng: &mut R) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batches_cover_total() {
        let b = batches(3 * BATCH_SIZE + 5);
        assert_eq!(b.len(), 4);
        assert_eq!(b.iter().map(|x| x.1).sum::<usize>(), 3 * BATCH_SIZE + 5);
        assert!(batches(0).is_empty());
    }

    #[test]
    fn independent_of_thread_count() {
        let run = || -> Vec<u64> {
            map_batches(7, 5 * BATCH_SIZE, |rng, len| {
                (0..len).map(|_| rng.random::<u64>() & 0xff).sum()
            })
        };
        let many = run();
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(run);
        assert_eq!(many, one);
        assert_ne!(stream(7, 0).random::<u64>(), stream(7, 1).random::<u64>());
    }

    #[test]
    fn rotation_is_orthogonal() {
        let q = random_rotation(4, &mut stream(3, 0));
        let err = (q.transpose() * &q - DMatrix::identity(4, 4)).abs().max();
        assert!(err < 1e-13);
    }
}
