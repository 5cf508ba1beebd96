//! Small matrix families used by the test suites and the benchmark.

use rand::Rng;

use crate::estimator::StreamRng;
use crate::matrix::Matrix;

/// All 81 2×2 matrices with entries in `{0, 1, 2}`, row-major base-3 order.
pub fn two_by_two() -> Vec<Matrix> {
    (0..81u32)
        .map(|k| {
            let e: Vec<f64> = (0..4).map(|b| f64::from(k / 3u32.pow(b) % 3)).collect();
            Matrix::from_rows(&[[e[0], e[1]], [e[2], e[3]]])
        })
        .collect()
}

/// All 3×3 0-1 matrices with at most `max_ones` nonzero entries.
pub fn binary_3x3(max_ones: u32) -> Vec<Matrix> {
    (0..512u32)
        .filter(|k| k.count_ones() <= max_ones)
        .map(|k| {
            let rows: Vec<Vec<f64>> = (0..3)
                .map(|i| (0..3).map(|j| f64::from(k >> (3 * i + j) & 1)).collect())
                .collect();
            Matrix::from_rows(&rows)
        })
        .collect()
}

/// Entries uniform in `[-1, 1)`.
pub fn random_real(n: usize, rng: &mut StreamRng) -> Matrix {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    Matrix::from_rows(&rows)
}

/// Each entry is 1 with probability `density`.
pub fn random_binary(n: usize, density: f64, rng: &mut StreamRng) -> Matrix {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| f64::from(u8::from(rng.random_bool(density))))
                .collect()
        })
        .collect();
    Matrix::from_rows(&rows)
}
