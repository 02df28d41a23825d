//! Dense symmetric eigensolver.
//!
//! Classic two-stage approach, implemented in full here so the spectral
//! pipelines depend on no external linear algebra:
//!
//! 1. **Householder tridiagonalization** (`tred2`-style): an orthogonal
//!    similarity `QᵀAQ = T` with `T` tridiagonal, accumulating `Q`.
//! 2. **Implicit-shift QL iteration** (`tql2`-style) on `T`, rotating the
//!    accumulated basis so its columns become eigenvectors of `A`.
//!
//! Cost is O(n³) with a small constant; the crate uses it for matrices up to
//! n ≈ 1024 (1-D spectral collocation operators and Lanczos Ritz problems).
//!
//! ────────────────────────────────────────────────────────────────────────────

use crate::{Error, Result};

/// Eigendecomposition of a real symmetric matrix.
///
/// `values` are ascending; `vectors` is row-major `n×n` with **column** `j`
/// holding the unit eigenvector of `values[j]`.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
    pub n: usize,
}

impl Eigh {
    /// Eigenvector for `values[j]` as a fresh vector.
    #[must_use]
    pub fn vector(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.vectors[i * self.n + j]).collect()
    }
}

/// Full eigendecomposition of the symmetric matrix `a` (row-major, `n×n`).
///
/// The symmetry defect `max|a_ij − a_ji|` must not exceed `1e−12·max|a_ij|`;
/// the matrix is explicitly symmetrized below that tolerance so the
/// orthogonal iteration sees exactly symmetric data.
pub fn eigh(a: &[f64], n: usize) -> Result<Eigh> {
    if a.len() != n * n {
        return Err(Error::invalid(format!(
            "eigh: buffer holds {} entries, expected {}",
            a.len(),
            n * n
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("symmetric matrix for eigh".into()));
    }
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            defect = defect.max((a[i * n + j] - a[j * n + i]).abs());
        }
    }
    if defect > 1e-12 * scale.max(1e-300) {
        return Err(Error::invalid(format!(
            "eigh: matrix asymmetry {defect:.3e} exceeds 1e-12·max|a| = {:.3e}",
            1e-12 * scale
        )));
    }

    let mut z = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            z[i * n + j] = 0.5 * (a[i * n + j] + a[j * n + i]);
        }
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut z, n, &mut d, &mut e);
    ql_implicit(&mut d, &mut e, Some(&mut z), n)?;
    sort_ascending(&mut d, Some(&mut z), n);
    Ok(Eigh {
        values: d,
        vectors: z,
        n,
    })
}

/// Eigendecomposition of a symmetric tridiagonal matrix given by its diagonal
/// and subdiagonal (`sub.len() == diag.len() − 1`).  Returns ascending values
/// and the row-major matrix whose column `j` is the `j`-th eigenvector.
pub fn eigh_tridiagonal(diag: &[f64], sub: &[f64]) -> Result<Eigh> {
    let n = diag.len();
    if n == 0 {
        return Err(Error::invalid("eigh_tridiagonal: empty matrix"));
    }
    if sub.len() + 1 != n {
        return Err(Error::invalid(format!(
            "eigh_tridiagonal: {} subdiagonal entries for n = {n}",
            sub.len()
        )));
    }
    let mut d = diag.to_vec();
    // The QL routine reads e[i] as the coupling *below* row i after an initial
    // shift; hand it the conventional layout e[1..n] = subdiagonal.
    let mut e = vec![0.0; n];
    e[1..n].copy_from_slice(sub);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    ql_implicit_conventional(&mut d, &mut e, Some(&mut z), n)?;
    sort_ascending(&mut d, Some(&mut z), n);
    Ok(Eigh {
        values: d,
        vectors: z,
        n,
    })
}

/// Householder reduction of the symmetric matrix in `z` to tridiagonal form.
///
/// On exit `d` holds the diagonal, `e[1..]` the subdiagonal, and `z` the
/// accumulated orthogonal transform (needed to recover eigenvectors).
fn tridiagonalize(z: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64]) {
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| z[i * n + k].abs()).sum();
            if scale == 0.0 {
                e[i] = z[i * n + l];
            } else {
                for k in 0..=l {
                    z[i * n + k] /= scale;
                    h += z[i * n + k] * z[i * n + k];
                }
                let mut f = z[i * n + l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                z[i * n + l] = f - g;
                f = 0.0;
                for j in 0..=l {
                    z[j * n + i] = z[i * n + j] / h;
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += z[j * n + k] * z[i * n + k];
                    }
                    for k in (j + 1)..=l {
                        g += z[k * n + j] * z[i * n + k];
                    }
                    e[j] = g / h;
                    f += e[j] * z[i * n + j];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let fj = z[i * n + j];
                    let gj = e[j] - hh * fj;
                    e[j] = gj;
                    for k in 0..=j {
                        z[j * n + k] -= fj * e[k] + gj * z[i * n + k];
                    }
                }
            }
        } else {
            e[i] = z[i * n + l];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        if d[i] != 0.0 {
            for j in 0..i {
                let mut g = 0.0;
                for k in 0..i {
                    g += z[i * n + k] * z[k * n + j];
                }
                for k in 0..i {
                    z[k * n + j] -= g * z[k * n + i];
                }
            }
        }
        d[i] = z[i * n + i];
        z[i * n + i] = 1.0;
        for j in 0..i {
            z[j * n + i] = 0.0;
            z[i * n + j] = 0.0;
        }
    }
}

/// Implicit-shift QL with the subdiagonal stored in `e[1..n]` (as produced by
/// [`tridiagonalize`]).  Rotations are applied to the columns of `z` if given.
fn ql_implicit(d: &mut [f64], e: &mut [f64], z: Option<&mut [f64]>, n: usize) -> Result<()> {
    ql_implicit_conventional(d, e, z, n)
}

fn ql_implicit_conventional(
    d: &mut [f64],
    e: &mut [f64],
    mut z: Option<&mut [f64]>,
    n: usize,
) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            // Locate a negligible subdiagonal element; the block [l, m] is
            // still coupled.
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::NoConvergence(format!(
                    "implicit-shift QL: eigenvalue {l} not isolated after 50 sweeps"
                )));
            }
            // Wilkinson-style shift from the 2×2 corner at l.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            let sign_r = if g >= 0.0 { r } else { -r };
            g = d[m] - d[l] + e[l] / (g + sign_r);
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    // Deflate without finishing this sweep.
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                let t = (d[i] - g) * s + 2.0 * c * b;
                p = s * t;
                d[i + 1] = g + p;
                g = c * t - b;
                if let Some(zz) = z.as_deref_mut() {
                    for k in 0..n {
                        let fz = zz[k * n + i + 1];
                        zz[k * n + i + 1] = s * zz[k * n + i] + c * fz;
                        zz[k * n + i] = c * zz[k * n + i] - s * fz;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Sort eigenvalues ascending, permuting eigenvector columns to match.
fn sort_ascending(d: &mut [f64], z: Option<&mut [f64]>, n: usize) {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).expect("finite eigenvalues"));
    let sorted: Vec<f64> = order.iter().map(|&j| d[j]).collect();
    d.copy_from_slice(&sorted);
    if let Some(z) = z {
        let mut buf = vec![0.0; n * n];
        for (new_col, &old_col) in order.iter().enumerate() {
            for row in 0..n {
                buf[row * n + new_col] = z[row * n + old_col];
            }
        }
        z.copy_from_slice(&buf);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::hash::unit_from_hash;
    use std::f64::consts::PI;

    #[test]
    fn two_by_two_has_known_spectrum() {
        // [[2,1],[1,2]] -> eigenvalues 1 and 3.
        let res = eigh(&[2.0, 1.0, 1.0, 2.0], 2).expect("solve");
        assert!((res.values[0] - 1.0).abs() < 1e-14);
        assert!((res.values[1] - 3.0).abs() < 1e-14);
        let v = res.vector(0);
        assert!(
            (v[0] + v[1]).abs() < 1e-12,
            "ground vector should be (1,-1)/sqrt2 up to sign: {v:?}"
        );
    }

    #[test]
    fn dirichlet_second_difference_matches_closed_form() {
        // Tridiagonal (2,-1) matrix: eigenvalues 2 − 2cos(kπ/(n+1)), k = 1..n.
        let n = 64;
        let diag = vec![2.0; n];
        let sub = vec![-1.0; n - 1];
        let res = eigh_tridiagonal(&diag, &sub).expect("solve");
        for k in 1..=n {
            let want = 2.0 - 2.0 * (k as f64 * PI / (n as f64 + 1.0)).cos();
            let got = res.values[k - 1];
            assert!(
                (got - want).abs() < 1e-12,
                "eigenvalue {k}: got {got:.15}, want {want:.15}"
            );
        }
    }

    #[test]
    fn random_symmetric_matrix_satisfies_residual_and_orthogonality() {
        let n = 40;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = unit_from_hash((i * n + j) as u64, 7);
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        let res = eigh(&a, n).expect("solve");
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // Residual ‖Av − λv‖∞ per pair.
        for j in 0..n {
            let v = res.vector(j);
            for i in 0..n {
                let av: f64 = (0..n).map(|k| a[i * n + k] * v[k]).sum();
                let r = (av - res.values[j] * v[i]).abs();
                assert!(
                    r < 1e-11 * scale.max(res.values[j].abs()),
                    "pair {j} residual {r:.3e}"
                );
            }
        }
        // Orthonormality of the eigenvector basis.
        for j in 0..n {
            for l in j..n {
                let dot: f64 = (0..n)
                    .map(|i| res.vectors[i * n + j] * res.vectors[i * n + l])
                    .sum();
                let want = if j == l { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-11, "V[{j}]·V[{l}] = {dot:.3e}");
            }
        }
        // Trace equals eigenvalue sum.
        let tr: f64 = (0..n).map(|i| a[i * n + i]).sum();
        let sum: f64 = res.values.iter().sum();
        assert!((tr - sum).abs() < 1e-10 * scale * n as f64);
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let a = vec![1.0, 2.0, 3.0, 4.0];
        assert!(eigh(&a, 2).is_err(), "visible asymmetry must be an error");
    }

    #[test]
    fn repeated_eigenvalues_are_handled() {
        // Identity; all eigenvalues 1, any orthonormal basis acceptable.
        let n = 8;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = 1.0;
        }
        let res = eigh(&a, n).expect("solve");
        assert!(res.values.iter().all(|&v| (v - 1.0).abs() < 1e-14));
    }
}
