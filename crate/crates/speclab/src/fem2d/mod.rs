//! P1 finite elements on planar polygons, driving level-set counts of
//! Laplace eigenfunctions.
//!
//! The pipeline: build a [`Mesh2D`] (subequilateral triangle, regular
//! polygon, or the unit-square test geometry), assemble the stiffness/mass
//! pencil, extract the smallest eigenpairs by shift-inverted Lanczos, then
//! rasterize an eigenfunction onto a masked planar grid and count connected
//! components of its superlevel and sublevel sets.  Supporting machinery:
//! Richardson extrapolation across refinement levels, a spectral-gap
//! simplicity certificate, a structural audit of the second Neumann mode on
//! the triangle, and a positive-domain bound check for ground-state
//! mixtures under Dirichlet conditions.

pub mod bessel;
pub mod lanczos;
pub mod mesh;
pub mod sparse;

pub use bessel::{bessel_j, bessel_j_prime, derivative_zeros_below, disk_neumann_reference};
pub use lanczos::{smallest_eigenpairs, PencilEigen, RESIDUAL_TOL};
pub use mesh::Mesh2D;
pub use sparse::{assemble, SymmCsr};

use std::f64::consts::PI;

use serde::Serialize;

use crate::fields::{DomainTopology, ScalarField2D};
use crate::nodal::{count_level_components, CountOptions, LevelSetReport, Side};
use crate::{Error, Result};

/// Default raster resolution (cells per axis over the bounding box) for
/// level-set counting; a documented knob, not a hard limit.
pub const RASTER_RESOLUTION: usize = 1024;

/// Which homogeneous boundary condition an eigenpair satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundaryCondition {
    /// Natural condition: no constraint, ground state constant with ν₁ = 0.
    Neumann,
    /// Essential condition: boundary vertices eliminated, values zero there.
    Dirichlet,
}

/// How an eigenvector's scale was fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Normalization {
    /// Unit mass-matrix norm, sign fixed at the largest-magnitude entry.
    UnitMass,
    /// Interpolated value 1 at a marked point.
    PointValue { x: f64, y: f64 },
}

/// One solved eigenpair of the P1 pencil `K u = ν M u` on a mesh.
#[derive(Debug, Clone)]
pub struct FemEigenpair {
    /// 1-based position in the computed spectrum (ascending ν).
    pub index: usize,
    /// Eigenvalue.
    pub nu: f64,
    /// One value per mesh vertex; Dirichlet pairs carry zeros on the boundary.
    pub values: Vec<f64>,
    pub bc: BoundaryCondition,
    pub normalization: Normalization,
    /// Explicit relative residual `‖Ku − νMu‖ / ‖Mu‖` achieved by the solver
    /// (on the reduced pencil for Dirichlet).
    pub residual: f64,
}

impl FemEigenpair {
    /// Largest absolute vertex value.
    #[must_use]
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Rescaled copy whose interpolated value at `point` is exactly 1.
    ///
    /// Errors when the point lies outside the mesh or the eigenfunction
    /// nearly vanishes there (|u| < 1e−6·sup), which signals that the mode
    /// has unexpected structure rather than a normalization choice.
    pub fn normalized_at(&self, mesh: &Mesh2D, point: (f64, f64)) -> Result<FemEigenpair> {
        let u0 = interpolate(mesh, &self.values, point.0, point.1).ok_or_else(|| {
            Error::invalid(format!(
                "normalization point ({}, {}) lies outside the mesh",
                point.0, point.1
            ))
        })?;
        let sup = self.sup_norm();
        if u0.abs() < 1e-6 * sup {
            return Err(Error::Degenerate(format!(
                "mode {} nearly vanishes at the normalization point: |u| = {:.3e} against sup {:.3e}",
                self.index,
                u0.abs(),
                sup
            )));
        }
        let mut out = self.clone();
        for v in &mut out.values {
            *v /= u0;
        }
        out.normalization = Normalization::PointValue {
            x: point.0,
            y: point.1,
        };
        Ok(out)
    }
}

/// Smallest `count` Neumann eigenpairs of the mesh, ascending.
///
/// The shift-invert pole sits at `−(π/diam)²`, safely below the spectrum,
/// so the shifted stiffness stays positive definite while the inverted
/// spectrum still separates the low modes well.  Requires
/// `count ≤ vertex count / 10` — beyond that a desk-scale Krylov sweep is
/// the wrong tool.
pub fn solve_neumann(mesh: &Mesh2D, count: usize) -> Result<Vec<FemEigenpair>> {
    check_count(count, mesh.vertices.len())?;
    let (k, m) = assemble(mesh)?;
    let (x0, x1, y0, y1) = mesh.bounding_box();
    let diam = (x1 - x0).hypot(y1 - y0);
    let shift = -(PI / diam).powi(2);
    let eig = smallest_eigenpairs(&k, &m, count, shift)?;
    Ok(wrap_pairs(eig, BoundaryCondition::Neumann, None, mesh.vertices.len()))
}

/// Smallest `count` Dirichlet eigenpairs: boundary vertices are eliminated
/// from the pencil and restored as exact zeros in the returned vectors.
pub fn solve_dirichlet(mesh: &Mesh2D, count: usize) -> Result<Vec<FemEigenpair>> {
    check_count(count, mesh.vertices.len())?;
    let on_boundary = mesh.boundary_vertices();
    let keep: Vec<usize> = (0..mesh.vertices.len())
        .filter(|&i| !on_boundary[i])
        .collect();
    if count >= keep.len() {
        return Err(Error::invalid(format!(
            "{count} eigenpairs requested from only {} interior vertices",
            keep.len()
        )));
    }
    let (k, m) = assemble(mesh)?;
    let eig = smallest_eigenpairs(&k.restrict(&keep), &m.restrict(&keep), count, 0.0)?;
    Ok(wrap_pairs(
        eig,
        BoundaryCondition::Dirichlet,
        Some(&keep),
        mesh.vertices.len(),
    ))
}

fn check_count(count: usize, vertices: usize) -> Result<()> {
    if count == 0 || count > vertices / 10 {
        return Err(Error::invalid(format!(
            "eigenpair count {count} out of range: a {vertices}-vertex mesh supports 1..={}",
            vertices / 10
        )));
    }
    Ok(())
}

fn wrap_pairs(
    eig: PencilEigen,
    bc: BoundaryCondition,
    scatter: Option<&[usize]>,
    n_full: usize,
) -> Vec<FemEigenpair> {
    eig.values
        .iter()
        .enumerate()
        .map(|(j, &nu)| {
            let values = match scatter {
                None => eig.vectors[j].clone(),
                Some(keep) => {
                    let mut full = vec![0.0; n_full];
                    for (&dst, &v) in keep.iter().zip(&eig.vectors[j]) {
                        full[dst] = v;
                    }
                    full
                }
            };
            FemEigenpair {
                index: j + 1,
                nu,
                values,
                bc,
                normalization: Normalization::UnitMass,
                residual: eig.residuals[j],
            }
        })
        .collect()
}

/// Richardson extrapolation of eigenvalues across one uniform refinement.
///
/// P1 eigenvalues converge at second order in the mesh size, and midpoint
/// refinement halves it, so the leading error divides by 4 and the limit
/// estimate is `fine + (fine − coarse) / 3`.
pub fn richardson(coarse: &[f64], fine: &[f64]) -> Result<Vec<f64>> {
    if coarse.len() != fine.len() {
        return Err(Error::invalid(format!(
            "cannot extrapolate {} coarse against {} fine values",
            coarse.len(),
            fine.len()
        )));
    }
    Ok(coarse
        .iter()
        .zip(fine)
        .map(|(c, f)| f + (f - c) / 3.0)
        .collect())
}

/// Two-sided relative spectral gap evidence that one eigenvalue is simple.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GapCertificate {
    /// 1-based position of the examined eigenvalue.
    pub index: usize,
    pub value: f64,
    /// `(ν_j − ν_{j−1}) / ν_j`.
    pub rel_gap_below: f64,
    /// `(ν_{j+1} − ν_j) / ν_j`.
    pub rel_gap_above: f64,
    /// Gap floor both sides must clear.
    pub threshold: f64,
    pub simple: bool,
}

/// Check that `values[index−1]` (1-based, ascending list) is isolated from
/// both neighbors by a relative gap above `threshold`.
pub fn certify_simple(values: &[f64], index: usize, threshold: f64) -> Result<GapCertificate> {
    if index < 2 || index >= values.len() {
        return Err(Error::invalid(format!(
            "gap certificate needs neighbors on both sides: index {index} of {}",
            values.len()
        )));
    }
    let value = values[index - 1];
    if !(value > 0.0) {
        return Err(Error::invalid(format!(
            "relative gaps need a positive eigenvalue, got {value}"
        )));
    }
    let rel_gap_below = (value - values[index - 2]) / value;
    let rel_gap_above = (values[index] - value) / value;
    Ok(GapCertificate {
        index,
        value,
        rel_gap_below,
        rel_gap_above,
        threshold,
        simple: rel_gap_below > threshold && rel_gap_above > threshold,
    })
}

/// Barycentric coordinates of `(x, y)` in triangle `t`, or `None` when the
/// point lies outside it (tolerance one part in 10⁹ of the area, so shared
/// edges are claimed by whichever triangle is asked first).
fn barycentric(mesh: &Mesh2D, t: usize, x: f64, y: f64) -> Option<[f64; 3]> {
    let [a, b, c] = mesh.triangles[t];
    let (xa, ya) = mesh.vertices[a];
    let (xb, yb) = mesh.vertices[b];
    let (xc, yc) = mesh.vertices[c];
    let area2 = (xb - xa) * (yc - ya) - (yb - ya) * (xc - xa);
    let wa = ((xb - x) * (yc - y) - (yb - y) * (xc - x)) / area2;
    let wb = ((xc - x) * (ya - y) - (yc - y) * (xa - x)) / area2;
    let wc = 1.0 - wa - wb;
    let tol = -1e-9;
    if wa >= tol && wb >= tol && wc >= tol {
        Some([wa, wb, wc])
    } else {
        None
    }
}

/// P1 interpolation of per-vertex `values` at a point, `None` outside the
/// mesh.  Linear scan over triangles — meant for isolated points; rasters
/// use the bucketed locator instead.
pub fn interpolate(mesh: &Mesh2D, values: &[f64], x: f64, y: f64) -> Option<f64> {
    debug_assert_eq!(values.len(), mesh.vertices.len());
    for t in 0..mesh.triangles.len() {
        if let Some(w) = barycentric(mesh, t, x, y) {
            let [a, b, c] = mesh.triangles[t];
            return Some(w[0] * values[a] + w[1] * values[b] + w[2] * values[c]);
        }
    }
    None
}

/// Uniform-grid spatial index over triangle bounding boxes, sized so a
/// bucket holds O(1) triangles on a quasi-uniform mesh.
struct TriangleLocator {
    grid: usize,
    x0: f64,
    y0: f64,
    inv_dx: f64,
    inv_dy: f64,
    buckets: Vec<Vec<u32>>,
}

impl TriangleLocator {
    fn new(mesh: &Mesh2D) -> Self {
        let (x0, x1, y0, y1) = mesh.bounding_box();
        let grid = ((mesh.triangles.len() as f64).sqrt().ceil() as usize).clamp(1, 1024);
        let inv_dx = grid as f64 / (x1 - x0);
        let inv_dy = grid as f64 / (y1 - y0);
        let mut buckets = vec![Vec::new(); grid * grid];
        let clampg = |v: f64| (v.max(0.0) as usize).min(grid - 1);
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let xs = tri.map(|v| mesh.vertices[v].0);
            let ys = tri.map(|v| mesh.vertices[v].1);
            let (lo_i, hi_i) = (
                clampg((xs.iter().copied().fold(f64::INFINITY, f64::min) - x0) * inv_dx),
                clampg((xs.iter().copied().fold(f64::NEG_INFINITY, f64::max) - x0) * inv_dx),
            );
            let (lo_j, hi_j) = (
                clampg((ys.iter().copied().fold(f64::INFINITY, f64::min) - y0) * inv_dy),
                clampg((ys.iter().copied().fold(f64::NEG_INFINITY, f64::max) - y0) * inv_dy),
            );
            for i in lo_i..=hi_i {
                for j in lo_j..=hi_j {
                    buckets[i * grid + j].push(t as u32);
                }
            }
        }
        TriangleLocator {
            grid,
            x0,
            y0,
            inv_dx,
            inv_dy,
            buckets,
        }
    }

    fn locate(&self, mesh: &Mesh2D, x: f64, y: f64) -> Option<(usize, [f64; 3])> {
        let i = (((x - self.x0) * self.inv_dx).max(0.0) as usize).min(self.grid - 1);
        let j = (((y - self.y0) * self.inv_dy).max(0.0) as usize).min(self.grid - 1);
        for &t in &self.buckets[i * self.grid + j] {
            if let Some(w) = barycentric(mesh, t as usize, x, y) {
                return Some((t as usize, w));
            }
        }
        None
    }
}

/// Sample per-vertex data onto a `resolution × resolution` cell-centered
/// grid over the mesh bounding box.  Cells whose centers fall outside the
/// mesh are masked out; inside, values are P1-interpolated.
pub fn rasterize(
    mesh: &Mesh2D,
    values: &[f64],
    resolution: usize,
    label: impl Into<String>,
) -> Result<ScalarField2D> {
    if values.len() != mesh.vertices.len() {
        return Err(Error::invalid(format!(
            "{} values for a {}-vertex mesh",
            values.len(),
            mesh.vertices.len()
        )));
    }
    if !(8..=8192).contains(&resolution) {
        return Err(Error::invalid(format!(
            "raster resolution {resolution} outside 8..=8192"
        )));
    }
    let (x0, x1, y0, y1) = mesh.bounding_box();
    let locator = TriangleLocator::new(mesh);
    let mut vals = vec![0.0; resolution * resolution];
    let mut mask = vec![false; resolution * resolution];
    let dx = (x1 - x0) / resolution as f64;
    let dy = (y1 - y0) / resolution as f64;
    for row in 0..resolution {
        let x = x0 + (row as f64 + 0.5) * dx;
        for col in 0..resolution {
            let y = y0 + (col as f64 + 0.5) * dy;
            if let Some((t, w)) = locator.locate(mesh, x, y) {
                let [a, b, c] = mesh.triangles[t];
                let idx = row * resolution + col;
                vals[idx] = w[0] * values[a] + w[1] * values[b] + w[2] * values[c];
                mask[idx] = true;
            }
        }
    }
    ScalarField2D::new(
        DomainTopology::PlanarMasked {
            nx: resolution,
            ny: resolution,
            x0,
            x1,
            y0,
            y1,
            mask,
        },
        vals,
        label,
    )
}

/// Where a counting threshold sits relative to the normalized range: the
/// point value is pinned to 1, so thresholds split into "between min and 1"
/// and "at or above 1", with everything else outside the range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ThresholdBand {
    OutsideRange,
    BelowPointValue,
    AtOrAbovePointValue,
}

/// Component counts of `{u > a}` and `{u < a}` at one threshold.
#[derive(Debug, Clone, Serialize)]
pub struct LevelDomainReport {
    pub threshold: f64,
    pub band: ThresholdBand,
    pub above: LevelSetReport,
    pub below: LevelSetReport,
}

impl LevelDomainReport {
    /// Total component count across both sides.
    #[must_use]
    pub fn total(&self) -> usize {
        self.above.component_count + self.below.component_count
    }
}

/// Count level-set components of a Neumann eigenfunction at several
/// thresholds, after pinning its value at `normalize_at` to 1.
///
/// The eigenfunction is rasterized once at `resolution` cells per axis and
/// each threshold is counted on both sides.  The band classification uses
/// the vertex (not raster) range, which is the sharper of the two.
pub fn level_domain_scan(
    mesh: &Mesh2D,
    pair: &FemEigenpair,
    normalize_at: (f64, f64),
    thresholds: &[f64],
    resolution: usize,
) -> Result<Vec<LevelDomainReport>> {
    if pair.bc != BoundaryCondition::Neumann {
        return Err(Error::invalid(
            "level-domain scans expect a natural-boundary eigenfunction",
        ));
    }
    let normalized = pair.normalized_at(mesh, normalize_at)?;
    let (mut min_u, mut max_u) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in &normalized.values {
        min_u = min_u.min(v);
        max_u = max_u.max(v);
    }
    let field = rasterize(
        mesh,
        &normalized.values,
        resolution,
        format!("mode {} pinned to 1 at ({}, {})", pair.index, normalize_at.0, normalize_at.1),
    )?;
    let opts = CountOptions::default();
    thresholds
        .iter()
        .map(|&a| {
            let above = count_level_components(&field, a, Side::Above, &opts)?;
            let below = count_level_components(&field, a, Side::Below, &opts)?;
            let band = if a <= min_u || a >= max_u {
                ThresholdBand::OutsideRange
            } else if a < 1.0 {
                ThresholdBand::BelowPointValue
            } else {
                ThresholdBand::AtOrAbovePointValue
            };
            Ok(LevelDomainReport {
                threshold: a,
                band,
                above,
                below,
            })
        })
        .collect()
}

/// Structural audit of the second Neumann mode on the subequilateral
/// triangle; all findings are reported, none is an error, since FEM
/// artifacts can create spurious discrete features.
///
/// Checks, on the vertex values: evenness under the y-reflection (vertex
/// pairing is exact because the mesh maps onto itself bitwise); the sign
/// pattern `u(far) < 0 < u(origin) < u(short-side corners)` after fixing
/// `u(origin) > 0`; and that every discrete critical point of the vertex
/// graph sits within [`SecondModeAudit::match_radius`] of one of the four
/// corners.  Short-side corner values are reported as an ordered pair
/// `(min, max)`, which makes the report text invariant under mesh
/// reflection.
#[derive(Debug, Clone, Serialize)]
pub struct SecondModeAudit {
    pub sup_norm: f64,
    /// `max_i |u_i − u_{π(i)}|` over the y-reflection pairing π.
    pub even_max_dev: f64,
    /// Evenness within 1e−3·sup.
    pub even_ok: bool,
    /// Value at `(0,0)`, sign-fixed positive.
    pub value_origin: f64,
    /// Value at the far corner on the x-axis.
    pub value_far: f64,
    /// Smaller of the two short-side corner values.
    pub value_short_lo: f64,
    /// Larger of the two short-side corner values.
    pub value_short_hi: f64,
    pub sign_ok: bool,
    /// Critical vertex found near origin, far, upper and lower corner.
    pub corner_critical: [bool; 4],
    /// Critical vertices not near any corner, sorted by coordinates.
    pub stray_critical: Vec<(f64, f64)>,
    /// Corner-matching radius: twice the longest mesh edge.
    pub match_radius: f64,
}

impl SecondModeAudit {
    /// All structural checks passed.
    #[must_use]
    pub fn all_ok(&self) -> bool {
        self.even_ok
            && self.sign_ok
            && self.corner_critical.iter().all(|&b| b)
            && self.stray_critical.is_empty()
    }

    /// Deterministic plain-text summary (fixed float formatting).
    #[must_use]
    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        s.push_str("second-mode audit\n");
        s.push_str(&format!("  sup norm          = {:.6e}\n", self.sup_norm));
        s.push_str(&format!("  even max dev      = {:.6e}\n", self.even_max_dev));
        s.push_str(&format!("  even ok           = {}\n", self.even_ok));
        s.push_str(&format!("  u(origin)         = {:.6e}\n", self.value_origin));
        s.push_str(&format!("  u(far corner)     = {:.6e}\n", self.value_far));
        s.push_str(&format!("  u(short corners)  = {:.6e} {:.6e}\n", self.value_short_lo, self.value_short_hi));
        s.push_str(&format!("  sign pattern ok   = {}\n", self.sign_ok));
        s.push_str(&format!(
            "  corner critical   = origin:{} far:{} upper:{} lower:{}\n",
            self.corner_critical[0],
            self.corner_critical[1],
            self.corner_critical[2],
            self.corner_critical[3]
        ));
        s.push_str(&format!("  stray critical    = {}\n", self.stray_critical.len()));
        for &(x, y) in &self.stray_critical {
            s.push_str(&format!("    at ({x:.6e}, {y:.6e})\n"));
        }
        s.push_str(&format!("  match radius      = {:.6e}\n", self.match_radius));
        s.push_str(&format!("  all ok            = {}\n", self.all_ok()));
        s
    }
}

/// Run the second-mode structural audit.  The mesh must come from
/// [`Mesh2D::triangle`] (any refinement level); the pair is normally the
/// second Neumann eigenpair on that mesh.
pub fn second_mode_audit(mesh: &Mesh2D, pair: &FemEigenpair) -> Result<SecondModeAudit> {
    let n = mesh.vertices.len();
    if pair.values.len() != n {
        return Err(Error::invalid("eigenpair does not match the mesh"));
    }
    if mesh.vertices.len() < 4
        || mesh.vertices[0] != (0.0, 0.0)
        || mesh.vertices[1].1 != 0.0
        || mesh.vertices[1].0 <= 0.0
        || mesh.vertices[2].0 != 0.0
        || mesh.vertices[3].0 != 0.0
        || mesh.vertices[2].1 != -mesh.vertices[3].1
    {
        return Err(Error::invalid(
            "audit expects the triangle fan layout: origin, far corner, short-side corners",
        ));
    }
    // Pair vertices across the x-axis bitwise; negation is exact, and
    // midpoint refinement of bitwise-symmetric coordinates stays symmetric.
    // Adding +0.0 folds −0.0 onto +0.0 so axis vertices match themselves.
    let key = |x: f64, y: f64| (x.to_bits(), (y + 0.0).to_bits());
    let mut index_of = std::collections::HashMap::with_capacity(n);
    for (i, &(x, y)) in mesh.vertices.iter().enumerate() {
        index_of.insert(key(x, y), i);
    }
    let mut pairing = vec![usize::MAX; n];
    for (i, &(x, y)) in mesh.vertices.iter().enumerate() {
        match index_of.get(&key(x, -y)) {
            Some(&j) => pairing[i] = j,
            None => {
                return Err(Error::invalid(format!(
                    "mesh is not symmetric about the x-axis: vertex {i} has no mirror"
                )))
            }
        }
    }

    // Sign-fix: the audit convention is u > 0 at the origin.
    let sign = if pair.values[0] >= 0.0 { 1.0 } else { -1.0 };
    let u: Vec<f64> = pair.values.iter().map(|v| sign * v).collect();
    let sup_norm = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let even_max_dev = (0..n)
        .map(|i| (u[i] - u[pairing[i]]).abs())
        .fold(0.0f64, f64::max);
    let even_ok = even_max_dev < 1e-3 * sup_norm;

    let value_origin = u[0];
    let value_far = u[1];
    let (upper, lower) = if mesh.vertices[2].1 > 0.0 { (2, 3) } else { (3, 2) };
    let value_short_lo = u[2].min(u[3]);
    let value_short_hi = u[2].max(u[3]);
    let sign_ok = value_far < 0.0 && value_origin > 0.0 && value_origin < value_short_lo;

    // Discrete critical points of the vertex graph: a vertex is critical
    // when the sign of u(neighbor) − u(vertex), read around the vertex in
    // angular order, changes 0 times (extremum) or ≥ 4 times / ≥ 2 times on
    // an open boundary chain (saddle).  Regular points change sign exactly
    // twice (interior) or once (boundary).
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &[a, b, c] in &mesh.triangles {
        for (i, j) in [(a, b), (b, c), (c, a)] {
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
    }
    let on_boundary = mesh.boundary_vertices();
    let match_radius = 2.0 * mesh.max_edge_len();
    let corners = [
        mesh.vertices[0],
        mesh.vertices[1],
        mesh.vertices[upper],
        mesh.vertices[lower],
    ];
    let mut corner_critical = [false; 4];
    let mut stray_critical = Vec::new();
    for v in 0..n {
        let nbrs = &mut neighbors[v];
        nbrs.sort_unstable();
        nbrs.dedup();
        let (xv, yv) = mesh.vertices[v];
        let mut ordered: Vec<(f64, usize)> = nbrs
            .iter()
            .map(|&w| {
                let (xw, yw) = mesh.vertices[w];
                ((yw - yv).atan2(xw - xv), w)
            })
            .collect();
        ordered.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let m = ordered.len();
        // Treat exact ties as positive; they are measure-zero for a
        // genuine eigenfunction and harmless for the count parity.
        let rises = |w: usize| u[w] >= u[v];
        let critical = if on_boundary[v] {
            // Open chain.  Raw angular order can split the fan wherever it
            // crosses the ±π branch cut, so start the chain just after the
            // widest angular gap — the exterior wedge of the domain.
            let mut gap_at = 0;
            let mut widest = f64::NEG_INFINITY;
            for i in 0..m {
                let next = (i + 1) % m;
                let gap = ordered[next].0 - ordered[i].0
                    + if next == 0 { 2.0 * PI } else { 0.0 };
                if gap > widest {
                    widest = gap;
                    gap_at = i;
                }
            }
            let mut changes = 0usize;
            let mut prev = rises(ordered[(gap_at + 1) % m].1);
            for k in 2..=m {
                let cur = rises(ordered[(gap_at + k) % m].1);
                changes += usize::from(cur != prev);
                prev = cur;
            }
            changes != 1
        } else {
            // Closed cycle: rotation-invariant count, no branch-cut issue.
            let signs: Vec<bool> = ordered.iter().map(|&(_, w)| rises(w)).collect();
            let mut changes = usize::from(signs[0] != signs[m - 1]);
            for i in 1..m {
                changes += usize::from(signs[i] != signs[i - 1]);
            }
            changes != 2
        };
        if critical {
            let near = (0..4).find(|&k| {
                let (cx, cy) = corners[k];
                (xv - cx).hypot(yv - cy) <= match_radius
            });
            match near {
                Some(k) => corner_critical[k] = true,
                None => stray_critical.push((xv, yv)),
            }
        }
    }
    stray_critical.sort_by(|a, b| a.partial_cmp(b).unwrap());

    Ok(SecondModeAudit {
        sup_norm,
        even_max_dev,
        even_ok,
        value_origin,
        value_far,
        value_short_lo,
        value_short_hi,
        sign_ok,
        corner_critical,
        stray_critical,
        match_radius,
    })
}

/// Outcome of one ground-state mixture count.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MixCase {
    /// Mode index mixed with the ground state.
    pub n: usize,
    /// Mixing coefficient (positive).
    pub c: f64,
    /// Components of `{u_n + c·u₁ > 0}`.
    pub positive_components: usize,
    /// The bound `n − 1`.
    pub bound: usize,
    pub ok: bool,
}

/// Positive-domain bound check for Dirichlet mixtures `u_n + c·u₁`.
#[derive(Debug, Clone, Serialize)]
pub struct MixBoundReport {
    pub cases: Vec<MixCase>,
    /// Smallest interior vertex value of the sign-fixed ground state;
    /// materially negative values would invalidate the whole check.
    pub ground_state_min: f64,
    pub ground_state_positive: bool,
    pub all_ok: bool,
}

/// For every mode `2 ≤ n ≤ n_max` and coefficient `c` in `c_list`, count
/// the connected components of `{u_n + c·u₁ > 0}` and compare with the
/// bound `n − 1`.  The Dirichlet ground state `u₁` is sign-fixed positive;
/// coefficients must be positive (the mirrored statement follows by
/// negating `u_n`, so nothing is lost).
pub fn mix_positive_domains(
    mesh: &Mesh2D,
    n_max: usize,
    c_list: &[f64],
    resolution: usize,
) -> Result<MixBoundReport> {
    if n_max < 2 {
        return Err(Error::invalid("mixture check needs n_max ≥ 2"));
    }
    if c_list.is_empty() || c_list.iter().any(|&c| !(c > 0.0) || !c.is_finite()) {
        return Err(Error::invalid(
            "mixing coefficients must be finite and positive",
        ));
    }
    let pairs = solve_dirichlet(mesh, n_max)?;
    let mut u1 = pairs[0].values.clone();
    if u1.iter().sum::<f64>() < 0.0 {
        for v in &mut u1 {
            *v = -*v;
        }
    }
    let on_boundary = mesh.boundary_vertices();
    let ground_state_min = u1
        .iter()
        .zip(&on_boundary)
        .filter(|&(_, &b)| !b)
        .map(|(&v, _)| v)
        .fold(f64::INFINITY, f64::min);
    let sup1 = u1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let ground_state_positive = ground_state_min > -1e-8 * sup1;

    let opts = CountOptions::default();
    let mut cases = Vec::new();
    for n in 2..=n_max {
        let un = &pairs[n - 1].values;
        for &c in c_list {
            let v: Vec<f64> = un.iter().zip(&u1).map(|(a, b)| a + c * b).collect();
            let field = rasterize(mesh, &v, resolution, format!("mode {n} + {c}·ground"))?;
            let report = count_level_components(&field, 0.0, Side::Above, &opts)?;
            let bound = n - 1;
            cases.push(MixCase {
                n,
                c,
                positive_components: report.component_count,
                bound,
                ok: report.component_count <= bound,
            });
        }
    }
    let all_ok = ground_state_positive && cases.iter().all(|c| c.ok);
    Ok(MixBoundReport {
        cases,
        ground_state_min,
        ground_state_positive,
        all_ok,
    })
}
