//! Sparse symmetric matrices for the P1 finite-element pencil.
//!
//! Both the stiffness and the consistent mass matrix of a mesh share one
//! sparsity pattern (vertex adjacency plus diagonal), so they are assembled
//! together and combined entrywise.  The inner solver for shift-inverted
//! operators is conjugate gradients preconditioned with a zero-fill
//! incomplete Cholesky factor — no external linear algebra.

use rayon::prelude::*;

use super::mesh::Mesh2D;
use crate::{Error, Result};

/// Symmetric sparse matrix in CSR form, storing the full pattern (both
/// triangles) for cheap row-oriented products.
#[derive(Debug, Clone)]
pub struct SymmCsr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub vals: Vec<f64>,
}

impl SymmCsr {
    /// Build from unsorted (row, col, value) triplets, summing duplicates.
    ///
    /// The sort is stable so duplicates accumulate in push order (triangle
    /// order for an assembly).  That makes the summed values a function of
    /// the per-triangle contributions alone: two assemblies whose element
    /// matrices agree bitwise produce bitwise-identical matrices even when
    /// the per-triangle corner order differs.
    pub fn from_triplets(n: usize, triplets: &mut Vec<(u32, u32, f64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_counts = vec![0usize; n];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut vals = Vec::with_capacity(triplets.len());
        let mut last = None;
        for &(r, c, v) in triplets.iter() {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                col_idx.push(c as usize);
                vals.push(v);
                row_counts[r as usize] += 1;
                last = Some((r, c));
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for r in 0..n {
            row_ptr[r + 1] = row_ptr[r] + row_counts[r];
        }
        SymmCsr {
            n,
            row_ptr,
            col_idx,
            vals,
        }
    }

    /// `y = A·x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for r in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.col_idx[k]];
            }
            y[r] = acc;
        }
    }

    /// `A·x` into a fresh vector.
    #[must_use]
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    /// `self + alpha·other`; the two matrices must share their pattern
    /// (guaranteed for a stiffness/mass pair assembled together).
    pub fn add_scaled(&self, other: &SymmCsr, alpha: f64) -> Result<SymmCsr> {
        if self.row_ptr != other.row_ptr || self.col_idx != other.col_idx {
            return Err(Error::invalid(
                "matrix patterns differ; cannot combine entrywise",
            ));
        }
        let vals = self
            .vals
            .iter()
            .zip(&other.vals)
            .map(|(a, b)| a + alpha * b)
            .collect();
        Ok(SymmCsr {
            n: self.n,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            vals,
        })
    }

    /// Restrict to the index subset `keep` (ascending); used to eliminate
    /// boundary vertices for the Dirichlet pencil.
    #[must_use]
    pub fn restrict(&self, keep: &[usize]) -> SymmCsr {
        let mut new_index = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            new_index[old] = new;
        }
        let mut row_ptr = vec![0usize; keep.len() + 1];
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        for (new_r, &old_r) in keep.iter().enumerate() {
            for k in self.row_ptr[old_r]..self.row_ptr[old_r + 1] {
                let c = new_index[self.col_idx[k]];
                if c != usize::MAX {
                    col_idx.push(c);
                    vals.push(self.vals[k]);
                }
            }
            row_ptr[new_r + 1] = col_idx.len();
        }
        SymmCsr {
            n: keep.len(),
            row_ptr,
            col_idx,
            vals,
        }
    }
}

/// Assemble the P1 stiffness and consistent mass matrices of `mesh`.
///
/// Per triangle with corners `p0 p1 p2` and area `A`: the stiffness entries
/// are `(bᵢbⱼ + cᵢcⱼ)/(4A)` with `bᵢ, cᵢ` the opposite-edge components (the
/// cotangent formula), and the mass entries are `A/12` off-diagonal, `A/6`
/// on the diagonal.  Element matrices are computed in parallel but gathered
/// in mesh order, so the reduction is deterministic under any thread count.
pub fn assemble(mesh: &Mesh2D) -> Result<(SymmCsr, SymmCsr)> {
    let n = mesh.vertices.len();
    let elements: Result<Vec<([f64; 9], f64)>> = mesh
        .triangles
        .par_iter()
        .map(|tri| {
            let p: [(f64, f64); 3] = [
                mesh.vertices[tri[0]],
                mesh.vertices[tri[1]],
                mesh.vertices[tri[2]],
            ];
            let b = [p[1].1 - p[2].1, p[2].1 - p[0].1, p[0].1 - p[1].1];
            let c = [p[2].0 - p[1].0, p[0].0 - p[2].0, p[1].0 - p[0].0];
            let area2 =
                (p[1].0 - p[0].0) * (p[2].1 - p[0].1) - (p[1].1 - p[0].1) * (p[2].0 - p[0].0);
            if area2 <= 0.0 || !area2.is_finite() {
                return Err(Error::Degenerate(format!(
                    "triangle {tri:?} has nonpositive area"
                )));
            }
            let area = 0.5 * area2;
            let mut kel = [0.0; 9];
            for i in 0..3 {
                for j in 0..3 {
                    kel[3 * i + j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
                }
            }
            Ok((kel, area))
        })
        .collect();
    let elements = elements?;
    let mut kt: Vec<(u32, u32, f64)> = Vec::with_capacity(9 * mesh.triangles.len());
    let mut mt: Vec<(u32, u32, f64)> = Vec::with_capacity(9 * mesh.triangles.len());
    for (tri, (kel, area)) in mesh.triangles.iter().zip(&elements) {
        for i in 0..3 {
            for j in 0..3 {
                let mij = if i == j { area / 6.0 } else { area / 12.0 };
                kt.push((tri[i] as u32, tri[j] as u32, kel[3 * i + j]));
                mt.push((tri[i] as u32, tri[j] as u32, mij));
            }
        }
    }
    Ok((SymmCsr::from_triplets(n, &mut kt), SymmCsr::from_triplets(n, &mut mt)))
}

/// Zero-fill incomplete Cholesky factor `L` (lower triangle, CSR rows).
#[derive(Debug, Clone)]
pub struct IncompleteCholesky {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
}

/// Factor the SPD matrix `a` on its own lower-triangular pattern.  A
/// nonpositive pivot (possible since fill is discarded) is retried with the
/// diagonal lifted by growing multiples of its magnitude; the factor then
/// preconditions a slightly shifted matrix, which CG tolerates.
pub fn incomplete_cholesky(a: &SymmCsr) -> Result<IncompleteCholesky> {
    let max_diag = (0..a.n)
        .map(|r| {
            (a.row_ptr[r]..a.row_ptr[r + 1])
                .find(|&k| a.col_idx[k] == r)
                .map_or(0.0, |k| a.vals[k].abs())
        })
        .fold(0.0_f64, f64::max);
    let mut boost = 0.0;
    for _ in 0..30 {
        match try_ic0(a, boost) {
            Ok(f) => return Ok(f),
            Err(_) => {
                boost = if boost == 0.0 { 1e-12 * max_diag } else { boost * 10.0 };
            }
        }
    }
    Err(Error::NoConvergence(
        "incomplete Cholesky pivot stayed nonpositive under diagonal lifting".into(),
    ))
}

fn try_ic0(a: &SymmCsr, boost: f64) -> Result<IncompleteCholesky> {
    let n = a.n;
    // Lower-triangular pattern of `a` (column ≤ row), values copied.
    let mut row_ptr = vec![0usize; n + 1];
    let mut col_idx = Vec::new();
    let mut vals = Vec::new();
    for r in 0..n {
        for k in a.row_ptr[r]..a.row_ptr[r + 1] {
            let c = a.col_idx[k];
            if c < r {
                col_idx.push(c);
                vals.push(a.vals[k]);
            } else if c == r {
                col_idx.push(c);
                vals.push(a.vals[k] + boost);
            }
        }
        row_ptr[r + 1] = col_idx.len();
    }
    for r in 0..n {
        let (lo, hi) = (row_ptr[r], row_ptr[r + 1]);
        if hi == lo || col_idx[hi - 1] != r {
            return Err(Error::Degenerate(format!("row {r} lacks a diagonal entry")));
        }
        for k in lo..hi - 1 {
            let c = col_idx[k];
            // L[r][c] = (A[r][c] − Σ_j L[r][j]·L[c][j]) / L[c][c], j < c.
            let mut s = vals[k];
            let (mut i, mut j) = (lo, row_ptr[c]);
            let c_hi = row_ptr[c + 1] - 1; // exclude c's diagonal
            while i < k && j < c_hi {
                match col_idx[i].cmp(&col_idx[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        s -= vals[i] * vals[j];
                        i += 1;
                        j += 1;
                    }
                }
            }
            vals[k] = s / vals[c_hi];
        }
        let mut d = vals[hi - 1];
        for k in lo..hi - 1 {
            d -= vals[k] * vals[k];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::Degenerate(format!(
                "nonpositive pivot {d:.3e} at row {r}"
            )));
        }
        vals[hi - 1] = d.sqrt();
    }
    Ok(IncompleteCholesky {
        n,
        row_ptr,
        col_idx,
        vals,
    })
}

impl IncompleteCholesky {
    /// Apply the preconditioner: solve `L Lᵀ z = r`.
    pub fn solve(&self, r: &[f64], z: &mut [f64]) {
        debug_assert_eq!(r.len(), self.n);
        z.copy_from_slice(r);
        // Forward: L y = r (diagonal is the last entry of each row).
        for i in 0..self.n {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut s = z[i];
            for k in lo..hi - 1 {
                s -= self.vals[k] * z[self.col_idx[k]];
            }
            z[i] = s / self.vals[hi - 1];
        }
        // Backward: Lᵀ z = y, scattering row entries upward.
        for i in (0..self.n).rev() {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let xi = z[i] / self.vals[hi - 1];
            z[i] = xi;
            for k in lo..hi - 1 {
                z[self.col_idx[k]] -= self.vals[k] * xi;
            }
        }
    }
}

/// Preconditioned conjugate gradients for `A x = b`; returns the solution
/// and the iteration count.  Converges on `‖r‖ ≤ tol_rel·‖b‖`.
pub fn pcg(
    a: &SymmCsr,
    prec: &IncompleteCholesky,
    b: &[f64],
    tol_rel: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize)> {
    let n = a.n;
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok((vec![0.0; n], 0));
    }
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    prec.solve(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        a.matvec(&p, &mut ap);
        let denom = dot(&p, &ap);
        if denom <= 0.0 {
            return Err(Error::Degenerate(format!(
                "conjugate gradients met a nonpositive curvature {denom:.3e}; matrix not SPD"
            )));
        }
        let alpha = rz / denom;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm2(&r) <= tol_rel * b_norm {
            return Ok((x, it));
        }
        prec.solve(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NoConvergence(format!(
        "conjugate gradients: residual {:.3e} of {:.3e} after {max_iter} iterations",
        norm2(&r),
        tol_rel * b_norm
    )))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplet_compression_sums_duplicates() {
        let mut t = vec![(0u32, 1u32, 2.0), (1, 0, 2.0), (0, 1, 3.0), (0, 0, 1.0), (1, 1, 4.0)];
        let a = SymmCsr::from_triplets(2, &mut t);
        let y = a.apply(&[1.0, 1.0]);
        // Row 0: 1 + (2+3) = 6; row 1: 2 + 4 = 6.
        assert_eq!(y, vec![6.0, 6.0]);
    }

    #[test]
    fn stiffness_rows_sum_to_zero_and_mass_to_area() {
        let mesh = Mesh2D::triangle(0.5, 3).unwrap();
        let (k, m) = assemble(&mesh).unwrap();
        let ones = vec![1.0; k.n];
        let k1 = k.apply(&ones);
        // Constants lie in the stiffness null space.
        let worst = k1.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
        assert!(worst < 1e-12, "constant leak {worst}");
        let mass_total: f64 = m.apply(&ones).iter().sum();
        assert!((mass_total - mesh.area()).abs() < 1e-12);
    }

    #[test]
    fn pcg_solves_a_shifted_pencil() {
        let mesh = Mesh2D::unit_square(3);
        let (k, m) = assemble(&mesh).unwrap();
        let a = k.add_scaled(&m, 1.0).unwrap(); // K + M, SPD
        let prec = incomplete_cholesky(&a).unwrap();
        let b: Vec<f64> = (0..a.n).map(|i| (i as f64 * 0.37).sin()).collect();
        let (x, iters) = pcg(&a, &prec, &b, 1e-12, 1000).unwrap();
        let mut res = a.apply(&x);
        for i in 0..a.n {
            res[i] -= b[i];
        }
        assert!(norm2(&res) <= 1e-11 * norm2(&b), "residual too large");
        assert!(iters < 200, "IC(0) should keep the iteration count modest, got {iters}");
    }

    #[test]
    fn restriction_drops_rows_and_columns() {
        let mut t = vec![
            (0u32, 0u32, 2.0),
            (1, 1, 3.0),
            (2, 2, 4.0),
            (0, 2, 1.0),
            (2, 0, 1.0),
        ];
        let a = SymmCsr::from_triplets(3, &mut t);
        let r = a.restrict(&[0, 2]);
        assert_eq!(r.n, 2);
        let y = r.apply(&[1.0, 1.0]);
        assert_eq!(y, vec![3.0, 5.0]);
    }
}
