//! Compensated and order-fixed summation.
//!
//! Every reduction in the crate goes through these helpers so that results do
//! not depend on the number of worker threads.

use num_complex::Complex64;
use rayon::prelude::*;

/// Items per leaf of a parallel reduction. Fixed so the reduction tree never
/// depends on the thread pool.
pub const CHUNK: usize = 1024;

/// Neumaier (improved Kahan) accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierComplex {
    re: Neumaier,
    im: Neumaier,
}

impl NeumaierComplex {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Compensated sum of a slice.
pub fn neumaier_sum(xs: &[f64]) -> f64 {
    let mut acc = Neumaier::new();
    for &x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Pairwise (tree) sum; the tree shape depends only on `xs.len()`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => neumaier_sum(xs),
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

pub fn pairwise_sum_complex(zs: &[Complex64]) -> Complex64 {
    match zs.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => zs[0],
        n if n <= 8 => {
            let mut acc = NeumaierComplex::new();
            zs.iter().for_each(|&z| acc.add(z));
            acc.value()
        }
        n => {
            let mid = n / 2;
            pairwise_sum_complex(&zs[..mid]) + pairwise_sum_complex(&zs[mid..])
        }
    }
}

/// Sums `f(i)` for `i in 0..n`: Neumaier within fixed chunks of [`CHUNK`]
/// indices, pairwise across chunks. Chunks run in parallel.
pub fn par_sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Neumaier::new();
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                acc.add(f(i));
            }
            acc.value()
        })
        .collect();
    pairwise_sum(&partial)
}

/// Like [`par_sum`] but each chunk is handed to `f` whole, for callers that
/// keep per-chunk scratch buffers. `f` receives an index range.
pub fn par_sum_chunks<F>(n: usize, chunk: usize, f: F) -> f64
where
    F: Fn(std::ops::Range<usize>) -> f64 + Sync,
{
    let chunk = chunk.max(1);
    let chunks = n.div_ceil(chunk);
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| f(c * chunk..((c + 1) * chunk).min(n)))
        .collect();
    pairwise_sum(&partial)
}
