//! First-kind Bessel functions, their derivative zeros, and the Neumann
//! spectrum of the unit disk.
//!
//! `J_m` is evaluated from the ascending power series for small arguments
//! and by backward (Miller-style) recurrence with series normalization for
//! larger ones; the derivative comes from the two-sided recurrence
//! `2J′_m = J_{m−1} − J_{m+1}`.  Zeros of `J′_m` are certified by
//! sign-change scan plus bisection.  The squares of those zeros, with
//! multiplicity two for every nonzero angular order, are the disk's Neumann
//! eigenvalues — the reference the polygon spectra converge to.

use crate::numerics::bisect::{bisect, sign_change_brackets};
use crate::{Error, Result};

/// Crossover between the ascending series and backward recurrence.
const SERIES_LIMIT: f64 = 12.0;

/// `J_m(x)` for integer order `m ≥ 0`.
#[must_use]
pub fn bessel_j(m: u32, x: f64) -> f64 {
    if x < 0.0 {
        // J_m(−x) = (−1)^m J_m(x) for integer m.
        let v = bessel_j(m, -x);
        return if m % 2 == 0 { v } else { -v };
    }
    if x <= SERIES_LIMIT {
        series_j(m, x)
    } else {
        miller_j(m, x)
    }
}

/// `J′_m(x)`.
#[must_use]
pub fn bessel_j_prime(m: u32, x: f64) -> f64 {
    if m == 0 {
        -bessel_j(1, x)
    } else {
        0.5 * (bessel_j(m - 1, x) - bessel_j(m + 1, x))
    }
}

/// Ascending series `Σ_k (−1)^k (x/2)^{m+2k} / (k! (m+k)!)`.
fn series_j(m: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    // Leading coefficient (x/2)^m / m! built incrementally to dodge overflow.
    let mut term = 1.0;
    for k in 1..=m {
        term *= half / f64::from(k);
    }
    let mut sum = term;
    let q = half * half;
    for k in 1..200 {
        term *= -q / (f64::from(k) * f64::from(m + k));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-290) {
            break;
        }
    }
    sum
}

/// Backward recurrence from a high starting order, normalized by the
/// identity `J₀ + 2J₂ + 2J₄ + … = 1`.
fn miller_j(m: u32, x: f64) -> f64 {
    let mut start = (m as usize).max(x as usize) + 26;
    start += start % 2; // even
    let mut f_above = 0.0_f64; // f_{k+1}
    let mut f_k = 1e-280_f64; // f_k at k = start (arbitrary scale)
    let mut norm = 0.0_f64; // Σ over even k ≥ 2 of 2·f_k, so far
    let mut wanted = 0.0_f64;
    let mut k = start;
    while k > 0 {
        let f_below = (2.0 * k as f64 / x) * f_k - f_above;
        f_above = f_k;
        f_k = f_below;
        k -= 1;
        if k == m as usize {
            wanted = f_k;
        }
        if k >= 2 && k % 2 == 0 {
            norm += 2.0 * f_k;
        }
        // Rescale long before overflow; the final ratio is scale-free.
        if f_k.abs() > 1e250 {
            f_above /= 1e250;
            f_k /= 1e250;
            norm /= 1e250;
            wanted /= 1e250;
        }
    }
    norm += f_k; // f₀ enters once
    if m == 0 {
        wanted = f_k;
    }
    wanted / norm
}

/// The `count` smallest Neumann eigenvalues of the unit disk: squares of
/// the zeros of `J′_m`, each with multiplicity two for `m ≥ 1`.  The list
/// starts with the exact zero of the constant mode.
pub fn disk_neumann_reference(count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::invalid("empty reference request"));
    }
    let mut x_max = 6.0;
    for _ in 0..12 {
        let mut values = vec![0.0f64];
        let m_cap = x_max as u32 + 1;
        for m in 0..=m_cap {
            for z in derivative_zeros_below(m, x_max)? {
                let mult = if m == 0 { 1 } else { 2 };
                for _ in 0..mult {
                    values.push(z * z);
                }
            }
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // Only values certainly below x_max² are complete; zeros of higher
        // m or larger x would interleave above that.
        let complete = x_max * x_max;
        if values.len() >= count && values[count - 1] < 0.9 * complete {
            values.truncate(count);
            return Ok(values);
        }
        x_max *= 1.5;
    }
    Err(Error::NoConvergence(format!(
        "disk reference: zero search window maxed out before {count} values"
    )))
}

/// Positive zeros of `J′_m` up to `x_max`, ascending, certified by
/// bisection to 1e−13.
pub fn derivative_zeros_below(m: u32, x_max: f64) -> Result<Vec<f64>> {
    // First derivative zero sits above max(1, m·…): scan from just above 0,
    // where J′_m has a known sign and no roots.
    let lo = 0.05;
    if x_max <= lo {
        return Ok(Vec::new());
    }
    let f = |x: f64| bessel_j_prime(m, x);
    let steps = ((x_max - lo) / 0.02).ceil() as usize + 2;
    let mut zeros = Vec::new();
    for (a, b) in sign_change_brackets(&f, lo, x_max, steps) {
        let z = if a == b { a } else { bisect(&f, a, b, 1e-13)? };
        zeros.push(z);
    }
    Ok(zeros)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Reference zeros of J′_m computed independently with mpmath
    /// (`besseljzero(m, k, derivative=1)`, 30 significant digits).
    const JP_ZEROS: [(u32, usize, f64); 6] = [
        (0, 2, 3.8317059702075125),
        (1, 1, 1.8411837813406593),
        (1, 2, 5.3314427735250325),
        (2, 1, 3.0542369282271404),
        (3, 1, 4.2011889412105283),
        (4, 1, 5.3175531260839941),
    ];

    #[test]
    fn derivative_zeros_match_the_reference_table() {
        for &(m, k, want) in &JP_ZEROS {
            let zeros = derivative_zeros_below(m, want + 1.0).unwrap();
            let got = zeros[k - 1 - usize::from(m == 0)]; // m=0 skips the origin
            assert!(
                (got - want).abs() < 1e-11,
                "j'_{m},{k}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn series_and_recurrence_agree_on_the_crossover_band() {
        // The ascending series cancels to ~|largest term|·ε absolute error;
        // at x = 16 the largest J₀ term is ~2e5, so agreement below 5e−11
        // is as much as the series can certify.  (Zero searches only ever
        // evaluate x ≤ 7, where the series is good to ~1e−14.)
        for m in 0..=8u32 {
            for &x in &[8.0, 10.0, 11.5, 12.5, 14.0, 16.0] {
                let s = series_j(m, x);
                let r = miller_j(m, x);
                assert!(
                    (s - r).abs() < 5e-11,
                    "J_{m}({x}): series {s} vs recurrence {r}"
                );
            }
        }
    }

    #[test]
    fn small_argument_values_match_hand_series() {
        // J₀(0.2) and J₁(0.1) from the first few series terms.
        assert!((bessel_j(0, 0.2) - 0.990024972239576).abs() < 1e-14);
        assert!((bessel_j(1, 0.1) - 0.049937526036242).abs() < 1e-14);
        assert_eq!(bessel_j(3, 0.0), 0.0);
        assert_eq!(bessel_j(0, 0.0), 1.0);
    }

    #[test]
    fn disk_reference_matches_frozen_values() {
        // Sorted squares of the derivative zeros (mpmath, 30 digits).
        let want = [
            0.0,
            3.389957716671889,
            3.389957716671889,
            9.328363213746359,
            9.328363213746359,
            14.6819706421239,
            17.64998851974964,
            17.64998851974964,
            28.27637124872566,
            28.27637124872566,
            28.42428204737229,
            28.42428204737229,
            41.16013348015309,
        ];
        let got = disk_neumann_reference(13).unwrap();
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-9, "disk value {g} vs {w}");
        }
    }

    #[test]
    fn disk_ordering_has_the_doublet_pattern() {
        let v = disk_neumann_reference(8).unwrap();
        assert_eq!(v[0], 0.0);
        assert!(v[1] > 0.0 && (v[1] - v[2]).abs() < 1e-12);
        assert!(v[3] > v[2] && (v[3] - v[4]).abs() < 1e-12);
        assert!(v[5] > v[4], "the sixth value must be simple");
        assert!(v[6] > v[5] && (v[6] - v[7]).abs() < 1e-12);
    }

    #[test]
    fn negative_arguments_use_parity() {
        assert_eq!(bessel_j(2, -3.0), bessel_j(2, 3.0));
        assert_eq!(bessel_j(3, -3.0), -bessel_j(3, 3.0));
    }
}
