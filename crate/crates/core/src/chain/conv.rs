//! Online convolution with the kernel `g(d) = 1/d`.
//!
//! Solves triangular systems `x[k] = f(k, s[k])` with `s[k] = sum_{j<k} x[j] / (k - j)`
//! in `O(K log^2 K)` by divide and conquer: once the left half of a block is final,
//! its contribution to the right half is a single FFT convolution.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

const DIRECT: usize = 64;

/// Returns `(x, s)`.
pub(crate) fn solve<F: FnMut(usize, f64) -> f64>(len: usize, mut f: F) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; len];
    let mut s = vec![0.0; len];
    let inv: Vec<f64> = (0..len.max(1)).map(|d| if d == 0 { 0.0 } else { 1.0 / d as f64 }).collect();
    let mut planner = FftPlanner::new();
    recurse(0, len, &mut x, &mut s, &inv, &mut f, &mut planner);
    (x, s)
}

fn recurse<F: FnMut(usize, f64) -> f64>(
    lo: usize,
    hi: usize,
    x: &mut [f64],
    s: &mut [f64],
    inv: &[f64],
    f: &mut F,
    planner: &mut FftPlanner<f64>,
) {
    if hi - lo <= DIRECT {
        for k in lo..hi {
            let mut acc = 0.0;
            for j in lo..k {
                acc += x[j] * inv[k - j];
            }
            s[k] += acc;
            x[k] = f(k, s[k]);
        }
        return;
    }
    let mid = lo + (hi - lo) / 2;
    recurse(lo, mid, x, s, inv, f, planner);
    // s[k] += sum_{j in [lo, mid)} x[j] inv[k - j] for k in [mid, hi)
    let a = &x[lo..mid];
    let b = &inv[..hi - lo];
    let size = (a.len() + b.len()).next_power_of_two();
    let mut fa: Vec<Complex<f64>> = a.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fa.resize(size, Complex::new(0.0, 0.0));
    let mut fb: Vec<Complex<f64>> = b.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fb.resize(size, Complex::new(0.0, 0.0));
    let fwd = planner.plan_fft_forward(size);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (p, q) in fa.iter_mut().zip(&fb) {
        *p *= q;
    }
    planner.plan_fft_inverse(size).process(&mut fa);
    let scale = 1.0 / size as f64;
    for k in mid..hi {
        s[k] += fa[k - lo].re * scale;
    }
    recurse(mid, hi, x, s, inv, f, planner);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_evaluation() {
        let len = 1000;
        let rule = |k: usize, s: f64| 1.0 / (1.0 + k as f64) + 0.5 * s / (1.0 + (k as f64).sqrt());
        let (x, s) = solve(len, rule);
        let mut xd = vec![0.0; len];
        for k in 0..len {
            let sd: f64 = (0..k).map(|j| xd[j] / (k - j) as f64).sum();
            xd[k] = rule(k, sd);
            assert!((s[k] - sd).abs() < 1e-12 * sd.abs().max(1.0));
        }
        for k in 0..len {
            assert!((x[k] - xd[k]).abs() < 1e-12 * xd[k].abs().max(1.0));
        }
    }
}
