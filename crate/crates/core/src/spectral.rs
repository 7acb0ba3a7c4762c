//! FFT helpers: linear convolution and grid wavenumbers.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Angular wavenumbers in FFT order for `n` samples spaced `dx`.
pub fn wavenumbers(n: usize, dx: f64) -> Vec<f64> {
    let scale = 2.0 * std::f64::consts::PI / (n as f64 * dx);
    (0..n)
        .map(|j| {
            let j = j as i64;
            let signed = if j < (n as i64 + 1) / 2 { j } else { j - n as i64 };
            signed as f64 * scale
        })
        .collect()
}

pub fn forward(buffer: &mut [Complex64]) {
    FftPlanner::new().plan_fft_forward(buffer.len()).process(buffer);
}

/// Inverse FFT including the 1/n factor.
pub fn inverse(buffer: &mut [Complex64]) {
    FftPlanner::new().plan_fft_inverse(buffer.len()).process(buffer);
    let n = buffer.len() as f64;
    buffer.iter_mut().for_each(|z| *z /= n);
}

/// Full linear convolution (length a.len() + b.len() − 1) via zero-padded FFT.
pub fn linear_convolve(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let out_len = a.len() + b.len() - 1;
    let size = out_len.next_power_of_two();
    let mut fa = vec![Complex64::new(0.0, 0.0); size];
    let mut fb = fa.clone();
    fa[..a.len()].copy_from_slice(a);
    fb[..b.len()].copy_from_slice(b);
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(size);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    fa.iter_mut().zip(&fb).for_each(|(x, y)| *x *= y);
    planner.plan_fft_inverse(size).process(&mut fa);
    let inv = 1.0 / size as f64;
    fa.truncate(out_len);
    fa.iter_mut().for_each(|z| *z *= inv);
    fa
}
