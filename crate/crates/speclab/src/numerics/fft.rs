//! Discrete Fourier transforms for periodic grids.
//!
//! The workhorse is an iterative radix-2 Cooley–Tukey FFT on split re/im
//! buffers.  Lengths that are not powers of two fall back to direct
//! O(n²) summation — still exact to rounding, just slower — so callers never
//! have to special-case grid sizes.
//!
//! Conventions: `forward` computes `X[k] = Σ_j x[j]·exp(−2πi jk / n)` without
//! scaling; `inverse` applies the conjugate kernel and divides by `n`, so
//! `inverse(forward(x)) == x` to rounding.

use std::f64::consts::PI;

/// In-place forward DFT of the complex signal `(re, im)`.
///
/// # Panics
/// Panics if `re.len() != im.len()` or the length is zero.
pub fn forward(re: &mut [f64], im: &mut [f64]) {
    dft(re, im, -1.0);
}

/// In-place inverse DFT of the complex signal `(re, im)`, scaled by `1/n`.
pub fn inverse(re: &mut [f64], im: &mut [f64]) {
    dft(re, im, 1.0);
    let n = re.len() as f64;
    for v in re.iter_mut() {
        *v /= n;
    }
    for v in im.iter_mut() {
        *v /= n;
    }
}

fn dft(re: &mut [f64], im: &mut [f64], sign: f64) {
    assert_eq!(re.len(), im.len(), "re/im buffers must have equal length");
    let n = re.len();
    assert!(n > 0, "empty signal");
    if n & (n - 1) == 0 {
        radix2(re, im, sign);
    } else {
        direct(re, im, sign);
    }
}

/// Iterative radix-2 Cooley–Tukey with bit-reversal permutation.
fn radix2(re: &mut [f64], im: &mut [f64], sign: f64) {
    let n = re.len();
    // Bit-reversal reordering.
    let mut j = 0usize;
    for i in 0..n {
        if i < j {
            re.swap(i, j);
            im.swap(i, j);
        }
        let mut m = n >> 1;
        while m >= 1 && j & m != 0 {
            j ^= m;
            m >>= 1;
        }
        j |= m;
    }
    // Butterfly passes, stage length 2, 4, ..., n.
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * PI / len as f64;
        let (wr, wi) = (ang.cos(), ang.sin());
        let mut start = 0;
        while start < n {
            let (mut cr, mut ci) = (1.0f64, 0.0f64);
            for k in 0..len / 2 {
                let a = start + k;
                let b = a + len / 2;
                let tr = cr * re[b] - ci * im[b];
                let ti = cr * im[b] + ci * re[b];
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
                let ncr = cr * wr - ci * wi;
                ci = cr * wi + ci * wr;
                cr = ncr;
            }
            start += len;
        }
        len <<= 1;
    }
}

/// Direct O(n²) summation; correctness fallback for awkward lengths.
fn direct(re: &mut [f64], im: &mut [f64], sign: f64) {
    let n = re.len();
    let mut out_re = vec![0.0; n];
    let mut out_im = vec![0.0; n];
    for (k, (or, oi)) in out_re.iter_mut().zip(out_im.iter_mut()).enumerate() {
        let mut sr = 0.0;
        let mut si = 0.0;
        for j in 0..n {
            let ang = sign * 2.0 * PI * (j as f64) * (k as f64) / n as f64;
            let (c, s) = (ang.cos(), ang.sin());
            sr += re[j] * c - im[j] * s;
            si += re[j] * s + im[j] * c;
        }
        *or = sr;
        *oi = si;
    }
    re.copy_from_slice(&out_re);
    im.copy_from_slice(&out_im);
}

/// Signed integer frequency of DFT bin `k` for signal length `n`:
/// `0, 1, …, n/2, −(n/2−1), …, −1` (for even `n` the Nyquist bin `n/2` is
/// returned as `+n/2`; for derivative weights its sign is irrelevant because
/// only even powers of the frequency are used).
#[inline]
#[must_use]
pub fn bin_frequency(k: usize, n: usize) -> i64 {
    let k = k as i64;
    let n = n as i64;
    if k <= n / 2 {
        k
    } else {
        k - n
    }
}

/// Evaluate the trigonometric interpolant through the real samples `values`
/// on a grid `factor` times finer, by zero-padding the spectrum.
///
/// The Nyquist coefficient (even lengths) is split half-and-half between
/// `+n/2` and `−n/2` so the interpolant stays real and matches the usual
/// symmetric trigonometric interpolation convention.
///
/// # Panics
/// Panics if `values` is empty or `factor` is zero.
#[must_use]
pub fn upsample(values: &[f64], factor: usize) -> Vec<f64> {
    assert!(!values.is_empty(), "empty signal");
    assert!(factor > 0, "zero upsampling factor");
    let n = values.len();
    if factor == 1 {
        return values.to_vec();
    }
    let big = n * factor;
    let mut re = values.to_vec();
    let mut im = vec![0.0; n];
    forward(&mut re, &mut im);
    let mut fine_re = vec![0.0; big];
    let mut fine_im = vec![0.0; big];
    for k in 0..n {
        let f = bin_frequency(k, n);
        if 2 * k == n {
            // Nyquist: split between ±n/2 to keep the interpolant real.
            let (hr, hi) = (re[k] / 2.0, im[k] / 2.0);
            fine_re[k] = hr;
            fine_im[k] = hi;
            fine_re[big - k] = hr;
            fine_im[big - k] = -hi;
        } else {
            let dst = if f >= 0 { k } else { big - (n - k) };
            fine_re[dst] = re[k];
            fine_im[dst] = im[k];
        }
    }
    inverse(&mut fine_re, &mut fine_im);
    // Undo the 1/big scaling mismatch: the coarse spectrum carries 1/n mass.
    let scale = factor as f64;
    fine_re.iter_mut().for_each(|v| *v *= scale);
    fine_re
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn roundtrip_recovers_signal_radix2() {
        let n = 64;
        let orig: Vec<f64> = (0..n).map(|i| ((i * i + 3) % 17) as f64 - 8.0).collect();
        let mut re = orig.clone();
        let mut im = vec![0.0; n];
        forward(&mut re, &mut im);
        inverse(&mut re, &mut im);
        assert!(
            max_abs_diff(&re, &orig) < 1e-12,
            "radix-2 roundtrip drift {:.3e}",
            max_abs_diff(&re, &orig)
        );
        assert!(im.iter().all(|v| v.abs() < 1e-12), "imaginary leakage");
    }

    #[test]
    fn roundtrip_recovers_signal_direct_fallback() {
        let n = 48; // not a power of two -> direct path
        let orig: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut re = orig.clone();
        let mut im = vec![0.0; n];
        forward(&mut re, &mut im);
        inverse(&mut re, &mut im);
        assert!(max_abs_diff(&re, &orig) < 1e-11);
    }

    #[test]
    fn pure_cosine_lands_in_expected_bins() {
        let n = 32;
        let freq = 5usize;
        let mut re: Vec<f64> = (0..n)
            .map(|j| (2.0 * PI * freq as f64 * j as f64 / n as f64).cos())
            .collect();
        let mut im = vec![0.0; n];
        forward(&mut re, &mut im);
        // cos(5x) -> n/2 in bins 5 and n-5, zero elsewhere.
        for k in 0..n {
            let expect = if k == freq || k == n - freq {
                n as f64 / 2.0
            } else {
                0.0
            };
            assert!(
                (re[k] - expect).abs() < 1e-10 && im[k].abs() < 1e-10,
                "bin {k}: got ({:.3e},{:.3e}), want ({expect},0)",
                re[k],
                im[k]
            );
        }
    }

    #[test]
    fn radix2_and_direct_agree() {
        let n = 64;
        let sig: Vec<f64> = (0..n).map(|i| (i as f64 * 0.91).cos() * 1.7).collect();
        let mut r1 = sig.clone();
        let mut i1 = vec![0.0; n];
        radix2(&mut r1, &mut i1, -1.0);
        let mut r2 = sig.clone();
        let mut i2 = vec![0.0; n];
        direct(&mut r2, &mut i2, -1.0);
        assert!(max_abs_diff(&r1, &r2) < 1e-9 && max_abs_diff(&i1, &i2) < 1e-9);
    }

    #[test]
    fn bin_frequencies_cover_symmetric_range() {
        let n = 8;
        let freqs: Vec<i64> = (0..n).map(|k| bin_frequency(k, n)).collect();
        assert_eq!(freqs, vec![0, 1, 2, 3, 4, -3, -2, -1]);
    }

    #[test]
    fn upsample_reproduces_resolved_cosine_exactly() {
        let n = 32;
        let factor = 4;
        let f = |x: f64| 1.5 + (3.0 * x).cos() - 0.25 * (7.0 * x).sin();
        let coarse: Vec<f64> = (0..n)
            .map(|j| f(2.0 * PI * j as f64 / n as f64))
            .collect();
        let fine = upsample(&coarse, factor);
        let big = n * factor;
        for (j, got) in fine.iter().enumerate() {
            let want = f(2.0 * PI * j as f64 / big as f64);
            assert!(
                (got - want).abs() < 1e-12,
                "fine node {j}: got {got:.15e}, want {want:.15e}"
            );
        }
    }

    #[test]
    fn upsample_splits_nyquist_symmetrically() {
        // Samples of cos((n/2)·x) at the coarse nodes are (−1)^j; the split
        // convention must reproduce cos((n/2)·x) at the fine nodes, not a
        // one-sided complex exponential.
        let n = 16;
        let coarse: Vec<f64> = (0..n).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let fine = upsample(&coarse, 2);
        for (j, got) in fine.iter().enumerate() {
            let x = 2.0 * PI * j as f64 / (2 * n) as f64;
            let want = (n as f64 / 2.0 * x).cos();
            assert!((got - want).abs() < 1e-12, "node {j}: {got} vs {want}");
        }
    }

    #[test]
    fn upsample_factor_one_is_identity() {
        let sig = vec![1.0, -2.0, 3.5, 0.25];
        assert_eq!(upsample(&sig, 1), sig);
    }
}
