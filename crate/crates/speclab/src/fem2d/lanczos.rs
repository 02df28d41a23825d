//! Shift-invert Lanczos for the symmetric-definite pencil `K u = ν M u`.
//!
//! The iteration runs on the operator `(K − σM)⁻¹ M`, self-adjoint in the
//! M-inner product, with full reorthogonalization of the Krylov basis.  A
//! Ritz value θ of the operator maps back to a pencil eigenvalue
//! `ν = σ + 1/θ`, so the eigenvalues nearest the shift — here, the bottom
//! of the spectrum — converge first.  Full reorthogonalization also lets
//! multiple eigenvalues surface: once the first copy converges, rounding
//! reintroduces the orthogonal complement and the sibling follows within a
//! modest number of extra steps.
//!
//! Inner solves use incomplete-Cholesky-preconditioned conjugate gradients;
//! the start vector is a hash of the vertex indices, so runs are
//! bit-reproducible, and a (lucky or genuine) breakdown restarts with a
//! differently salted seed at most three times.

use super::sparse::{dot, incomplete_cholesky, norm2, pcg, SymmCsr};
use crate::numerics::eigen::eigh_tridiagonal;
use crate::numerics::hash::unit_from_hash;
use crate::{Error, Result};

/// Eigenpairs of the pencil, ascending; vectors are M-orthonormal.
#[derive(Debug, Clone)]
pub struct PencilEigen {
    pub values: Vec<f64>,
    /// Column `j` of the solution, one `Vec` per eigenpair.
    pub vectors: Vec<Vec<f64>>,
    /// Explicit relative residuals `‖Ku − νMu‖ / ‖Mu‖`.
    pub residuals: Vec<f64>,
    /// Lanczos steps taken on the final (successful) attempt.
    pub steps: usize,
    /// Restart attempts consumed (0 = first seed succeeded).
    pub restarts: u32,
}

/// Relative residual each returned pair must satisfy.
pub const RESIDUAL_TOL: f64 = 1e-7;

/// Compute the `count` smallest eigenpairs of `K u = ν M u`.
///
/// `shift` must keep `K − shift·M` positive definite (any negative value
/// for a Neumann stiffness, and zero or less for Dirichlet).
pub fn smallest_eigenpairs(
    k: &SymmCsr,
    m: &SymmCsr,
    count: usize,
    shift: f64,
) -> Result<PencilEigen> {
    if count == 0 || count >= k.n {
        return Err(Error::invalid(format!(
            "requested {count} eigenpairs of an n = {} pencil",
            k.n
        )));
    }
    let shifted = k.add_scaled(m, -shift)?;
    let prec = incomplete_cholesky(&shifted)?;
    let mut last_err = None;
    for attempt in 0..4u32 {
        match lanczos_attempt(k, m, &shifted, &prec, count, shift, attempt) {
            Ok(mut out) => {
                out.restarts = attempt;
                return Ok(out);
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::NoConvergence("eigensolver failed".into())))
}

fn lanczos_attempt(
    k: &SymmCsr,
    m: &SymmCsr,
    shifted: &SymmCsr,
    prec: &super::sparse::IncompleteCholesky,
    count: usize,
    shift: f64,
    salt: u32,
) -> Result<PencilEigen> {
    let n = k.n;
    let max_steps = (20 * count + 80).min(n - 1);
    let pcg_tol = 1e-11;
    let pcg_cap = 20_000;

    // Deterministic start vector, M-normalized.
    let mut v: Vec<f64> = (0..n)
        .map(|i| unit_from_hash(i as u64, u64::from(salt)))
        .collect();
    let mut mv = m.apply(&v);
    let nrm = dot(&v, &mv).sqrt();
    if !(nrm.is_finite() && nrm > 0.0) {
        return Err(Error::Degenerate("start vector has no mass".into()));
    }
    for i in 0..n {
        v[i] /= nrm;
        mv[i] /= nrm;
    }

    let mut basis: Vec<Vec<f64>> = vec![v.clone()];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut v_prev: Option<Vec<f64>> = None;

    for step in 0..max_steps {
        // w = (K − σM)⁻¹ (M v).
        let (mut w, _iters) = pcg(shifted, prec, &mv, pcg_tol, pcg_cap)?;
        let a = dot(&w, &mv);
        alpha.push(a);
        {
            let vj = &basis[step];
            if let Some(ref vp) = v_prev {
                let b = beta[step - 1];
                for i in 0..n {
                    w[i] -= a * vj[i] + b * vp[i];
                }
            } else {
                for i in 0..n {
                    w[i] -= a * vj[i];
                }
            }
        }
        // Full reorthogonalization, two passes of M-projections.
        for _ in 0..2 {
            let mw = m.apply(&w);
            for vj in &basis {
                let proj = dot(vj, &mw);
                for i in 0..n {
                    w[i] -= proj * vj[i];
                }
            }
        }
        let mw = m.apply(&w);
        let b = dot(&w, &mw).sqrt();

        // Try to harvest once enough directions exist (or on breakdown).
        let dim = alpha.len();
        let broke = !(b.is_finite()) || b < 1e-13;
        let ripe = dim >= (2 * count + 8).min(max_steps) && (dim % 8 == 0 || dim == max_steps);
        if broke || ripe || dim == max_steps {
            if let Some(out) = harvest(k, m, &basis, &alpha, &beta, count, shift)? {
                return Ok(out);
            }
            if broke {
                return Err(Error::NoConvergence(format!(
                    "Krylov space closed after {dim} steps before all {count} pairs converged"
                )));
            }
            if dim == max_steps {
                return Err(Error::NoConvergence(format!(
                    "{count} eigenpairs not converged within {max_steps} Lanczos steps"
                )));
            }
        }

        beta.push(b);
        let vnext: Vec<f64> = w.iter().map(|x| x / b).collect();
        mv = mw.iter().map(|x| x / b).collect();
        v_prev = Some(basis[step].clone());
        basis.push(vnext);
    }
    Err(Error::NoConvergence(format!(
        "{count} eigenpairs not converged within {max_steps} Lanczos steps"
    )))
}

/// Solve the projected tridiagonal problem and, if the leading `count`
/// Ritz pairs meet the explicit residual tolerance, assemble the result.
fn harvest(
    k: &SymmCsr,
    m: &SymmCsr,
    basis: &[Vec<f64>],
    alpha: &[f64],
    beta: &[f64],
    count: usize,
    shift: f64,
) -> Result<Option<PencilEigen>> {
    let dim = alpha.len();
    if dim < count {
        return Ok(None);
    }
    let n = k.n;
    let tri = eigh_tridiagonal(alpha, &beta[..dim - 1])?;
    // Largest θ ↔ eigenvalues nearest the shift; take the top `count`.
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| tri.values[j].partial_cmp(&tri.values[i]).unwrap());
    let mut values = Vec::with_capacity(count);
    let mut vectors = Vec::with_capacity(count);
    let mut residuals = Vec::with_capacity(count);
    for &j in order.iter().take(count) {
        let theta = tri.values[j];
        if theta <= 0.0 {
            return Ok(None); // not yet separated from the inverted tail
        }
        let y = tri.vector(j);
        let mut x = vec![0.0; n];
        for (c, vj) in basis.iter().take(dim).enumerate() {
            let w = y[c];
            for i in 0..n {
                x[i] += w * vj[i];
            }
        }
        // M-normalize and fix the sign at the largest-magnitude entry.
        let mx = m.apply(&x);
        let nrm = dot(&x, &mx).sqrt();
        if !(nrm.is_finite() && nrm > 0.0) {
            return Ok(None);
        }
        for xi in &mut x {
            *xi /= nrm;
        }
        let lead = x
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap_or(0);
        if x[lead] < 0.0 {
            for xi in &mut x {
                *xi = -*xi;
            }
        }
        let nu = shift + 1.0 / theta;
        let kx = k.apply(&x);
        let mx = m.apply(&x);
        let mut res = 0.0;
        for i in 0..n {
            let d = kx[i] - nu * mx[i];
            res += d * d;
        }
        let rel = res.sqrt() / norm2(&mx);
        if rel > RESIDUAL_TOL {
            return Ok(None);
        }
        values.push(nu);
        vectors.push(x);
        residuals.push(rel);
    }
    // Ascending eigenvalue order.
    let mut idx: Vec<usize> = (0..count).collect();
    idx.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
    let values = idx.iter().map(|&i| values[i]).collect();
    let vectors: Vec<Vec<f64>> = idx.iter().map(|&i| vectors[i].clone()).collect();
    let residuals = idx.iter().map(|&i| residuals[i]).collect();
    Ok(Some(PencilEigen {
        values,
        vectors,
        residuals,
        steps: dim,
        restarts: 0,
    }))
}

#[cfg(test)]
mod tests {
    use super::super::mesh::Mesh2D;
    use super::super::sparse::assemble;
    use super::*;

    #[test]
    fn square_neumann_spectrum_matches_the_separable_reference() {
        let mesh = Mesh2D::unit_square(5);
        let (k, m) = assemble(&mesh).unwrap();
        let eig = smallest_eigenpairs(&k, &m, 5, -2.0).unwrap();
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let want = [0.0, pi2, pi2, 2.0 * pi2, 4.0 * pi2];
        assert!(eig.values[0].abs() < 1e-8, "ground state {}", eig.values[0]);
        for (got, want) in eig.values.iter().zip(want).skip(1) {
            assert!(
                (got - want).abs() < 0.005 * want,
                "eigenvalue {got} vs separable {want}"
            );
        }
        for r in &eig.residuals {
            assert!(*r < RESIDUAL_TOL);
        }
    }

    #[test]
    fn degenerate_pairs_are_both_found() {
        // π² appears twice on the square; the solver must return two copies.
        let mesh = Mesh2D::unit_square(4);
        let (k, m) = assemble(&mesh).unwrap();
        let eig = smallest_eigenpairs(&k, &m, 3, -2.0).unwrap();
        let gap = (eig.values[2] - eig.values[1]).abs();
        assert!(
            gap < 1e-6 * eig.values[1],
            "the doublet split by {gap} (values {:?})",
            eig.values
        );
        // And the two vectors must be M-orthogonal.
        let mv = m.apply(&eig.vectors[2]);
        let overlap = dot(&eig.vectors[1], &mv).abs();
        assert!(overlap < 1e-7, "doublet vectors overlap by {overlap}");
    }

    #[test]
    fn ground_state_of_the_square_is_constant() {
        let mesh = Mesh2D::unit_square(4);
        let (k, m) = assemble(&mesh).unwrap();
        let eig = smallest_eigenpairs(&k, &m, 1, -1.0).unwrap();
        let u = &eig.vectors[0];
        let (lo, hi) = u.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
        assert!(
            (hi - lo).abs() < 1e-7 * hi.abs().max(lo.abs()),
            "constant mode varies: [{lo}, {hi}]"
        );
    }

    #[test]
    fn oversized_requests_are_rejected() {
        let mesh = Mesh2D::unit_square(1);
        let (k, m) = assemble(&mesh).unwrap();
        assert!(smallest_eigenpairs(&k, &m, 0, -1.0).is_err());
        assert!(smallest_eigenpairs(&k, &m, k.n, -1.0).is_err());
    }
}
