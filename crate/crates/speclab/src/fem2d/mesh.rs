//! Triangulated planar domains with uniform midpoint refinement.
//!
//! Every geometry starts as a fan around a distinguished interior (or
//! boundary) point and is refined by splitting each triangle into four at
//! its edge midpoints.  Midpoint refinement reproduces the parent's angles
//! exactly — all four children are similar to the parent — so mesh quality
//! is decided once, at level 0, and never degrades.  Level-0 vertices keep
//! their indices through refinement, which downstream code relies on (the
//! normalization point `(0,0)` is always vertex 0).

use std::collections::HashMap;

use crate::{Error, Result};

/// Conforming triangle mesh of a polygonal domain.
///
/// Invariants established at construction and preserved by [`Mesh2D::refine`]:
/// every triangle is positively oriented, the boundary edge set forms closed
/// loops, and no angle falls below the geometry's quality floor.
#[derive(Debug, Clone)]
pub struct Mesh2D {
    /// Vertex coordinates; level-0 vertices first, in construction order.
    pub vertices: Vec<(f64, f64)>,
    /// Vertex index triples, counterclockwise.
    pub triangles: Vec<[usize; 3]>,
    /// Edges owned by exactly one triangle, each sorted `[lo, hi]`, the list
    /// sorted lexicographically.
    pub boundary_edges: Vec<[usize; 2]>,
    /// Number of midpoint refinements applied since the base fan.
    pub level: u32,
}

/// Smallest corner angle (degrees) any mesh is allowed to carry.  Geometries
/// whose own corners are sharper get a proportionally relaxed floor; see
/// [`Mesh2D::ngon`].
pub const QUALITY_FLOOR_DEG: f64 = 15.0;

impl Mesh2D {
    /// Subequilateral triangle with corners `(√3, 0)`, `(0, b)`, `(0, −b)`,
    /// fanned around the boundary point `(0, 0)` and refined `level` times.
    ///
    /// Vertex order: `(0,0)`, `(√3,0)`, `(0,b)`, `(0,−b)` — the midpoint of
    /// the short side first, then the far corner, then the short side's ends.
    /// Requires `0 < b ≤ 1` (`b = 1` is the equilateral limit); values of `b`
    /// so flat that the fan's smallest angle `atan(b/√3)` drops under the 15°
    /// quality floor (`b ≲ 0.464`) are rejected, since no refinement could
    /// repair them.
    pub fn triangle(b: f64, level: u32) -> Result<Self> {
        if !b.is_finite() || b <= 0.0 || b > 1.0 {
            return Err(Error::invalid(format!(
                "triangle half-height must lie in (0, 1], got {b}"
            )));
        }
        let vertices = vec![(0.0, 0.0), (3.0_f64.sqrt(), 0.0), (0.0, b), (0.0, -b)];
        let triangles = vec![[0, 1, 2], [0, 3, 1]];
        let mesh = Self::from_fan(vertices, triangles, QUALITY_FLOOR_DEG)?;
        Ok(mesh.refined_to(level))
    }

    /// Regular `n`-gon inscribed in the unit circle, vertices at angles
    /// `2πi/n` starting from `(1, 0)`, fanned around the center.
    ///
    /// Vertex order: center `(0,0)` first, then the polygon corners
    /// counterclockwise.  The fan's apex angle is `360°/n`, so for `n > 24`
    /// the quality floor relaxes to `0.9 · 360°/n` — the sharpest angle the
    /// geometry itself imposes, with 10% slack for roundoff.
    pub fn ngon(n: u32, level: u32) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid(format!(
                "polygon needs at least 3 sides, got {n}"
            )));
        }
        let mut vertices = vec![(0.0, 0.0)];
        for i in 0..n {
            let t = 2.0 * std::f64::consts::PI * f64::from(i) / f64::from(n);
            vertices.push((t.cos(), t.sin()));
        }
        let triangles: Vec<[usize; 3]> = (0..n as usize)
            .map(|i| [0, 1 + i, 1 + (i + 1) % n as usize])
            .collect();
        let floor = QUALITY_FLOOR_DEG.min(0.9 * 360.0 / f64::from(n));
        let mesh = Self::from_fan(vertices, triangles, floor)?;
        Ok(mesh.refined_to(level))
    }

    /// Unit square `[0,1]²` fanned around its center; a solver test geometry
    /// with a separable exact spectrum.
    pub fn unit_square(level: u32) -> Self {
        let vertices = vec![(0.5, 0.5), (0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        let triangles = vec![[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 1]];
        let mesh = Self::from_fan(vertices, triangles, QUALITY_FLOOR_DEG)
            .expect("unit square fan is well formed");
        mesh.refined_to(level)
    }

    /// Validate a base fan: orientation, closed boundary, quality floor.
    fn from_fan(
        vertices: Vec<(f64, f64)>,
        triangles: Vec<[usize; 3]>,
        floor_deg: f64,
    ) -> Result<Self> {
        let mut mesh = Mesh2D {
            vertices,
            triangles,
            boundary_edges: Vec::new(),
            level: 0,
        };
        for (t, tri) in mesh.triangles.iter().enumerate() {
            if signed_area(&mesh.vertices, tri) <= 0.0 {
                return Err(Error::invalid(format!(
                    "triangle {t} is not positively oriented"
                )));
            }
        }
        mesh.boundary_edges = boundary_of(&mesh.triangles);
        let mut degree = HashMap::new();
        for e in &mesh.boundary_edges {
            *degree.entry(e[0]).or_insert(0usize) += 1;
            *degree.entry(e[1]).or_insert(0usize) += 1;
        }
        if degree.values().any(|&d| d != 2) {
            return Err(Error::invalid(
                "boundary is not a closed loop: some boundary vertex has degree ≠ 2",
            ));
        }
        let min_angle = mesh.min_angle_deg();
        if min_angle < floor_deg {
            return Err(Error::Degenerate(format!(
                "mesh quality too low: smallest angle {min_angle:.2}° under the {floor_deg:.2}° floor"
            )));
        }
        Ok(mesh)
    }

    fn refined_to(self, level: u32) -> Self {
        let mut mesh = self;
        for _ in 0..level {
            mesh = mesh.refine();
        }
        mesh
    }

    /// One uniform midpoint refinement: each triangle `[a,b,c]` becomes the
    /// four similar children `[a,ab,ca]`, `[ab,b,bc]`, `[ca,bc,c]`,
    /// `[ab,bc,ca]`, with shared midpoints deduplicated.
    #[must_use]
    pub fn refine(&self) -> Self {
        let mut vertices = self.vertices.clone();
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<(f64, f64)>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoint.entry(key).or_insert_with(|| {
                let (xa, ya) = vertices[a];
                let (xb, yb) = vertices[b];
                vertices.push((0.5 * (xa + xb), 0.5 * (ya + yb)));
                vertices.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[a, b, c] in &self.triangles {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
        }
        let boundary_edges = boundary_of(&triangles);
        Mesh2D {
            vertices,
            triangles,
            boundary_edges,
            level: self.level + 1,
        }
    }

    /// Mirror image across the x-axis: vertex `i` maps to `(x_i, −y_i)` (the
    /// index order is unchanged), with two triangle indices swapped to keep
    /// positive orientation.  Negation is exact in floating point, so a mesh
    /// symmetric about the axis maps onto its own vertex set bitwise.
    #[must_use]
    pub fn reflect_y(&self) -> Self {
        let vertices = self.vertices.iter().map(|&(x, y)| (x, -y)).collect();
        let triangles: Vec<[usize; 3]> =
            self.triangles.iter().map(|&[a, b, c]| [a, c, b]).collect();
        let boundary_edges = boundary_of(&triangles);
        Mesh2D {
            vertices,
            triangles,
            boundary_edges,
            level: self.level,
        }
    }

    /// Total area by the shoelace sum over triangles.
    #[must_use]
    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| 0.5 * signed_area(&self.vertices, t))
            .sum()
    }

    /// Smallest corner angle over all triangles, in degrees.
    #[must_use]
    pub fn min_angle_deg(&self) -> f64 {
        let mut min = f64::INFINITY;
        for tri in &self.triangles {
            for k in 0..3 {
                let p = self.vertices[tri[k]];
                let q = self.vertices[tri[(k + 1) % 3]];
                let r = self.vertices[tri[(k + 2) % 3]];
                let u = (q.0 - p.0, q.1 - p.1);
                let v = (r.0 - p.0, r.1 - p.1);
                let cross = u.0 * v.1 - u.1 * v.0;
                let dot = u.0 * v.0 + u.1 * v.1;
                min = min.min(cross.atan2(dot).abs());
            }
        }
        min.to_degrees()
    }

    /// Longest edge over all triangles; the audit radius for matching
    /// discrete critical points to corners scales with this.
    #[must_use]
    pub fn max_edge_len(&self) -> f64 {
        let mut max = 0.0_f64;
        for &[a, b, c] in &self.triangles {
            for (i, j) in [(a, b), (b, c), (c, a)] {
                let (xi, yi) = self.vertices[i];
                let (xj, yj) = self.vertices[j];
                max = max.max((xi - xj).hypot(yi - yj));
            }
        }
        max
    }

    /// Axis-aligned bounding box `(x0, x1, y0, y1)`.
    #[must_use]
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        let mut x0 = f64::INFINITY;
        let mut x1 = f64::NEG_INFINITY;
        let mut y0 = f64::INFINITY;
        let mut y1 = f64::NEG_INFINITY;
        for &(x, y) in &self.vertices {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        (x0, x1, y0, y1)
    }

    /// Set of vertices that lie on the boundary.
    #[must_use]
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut on = vec![false; self.vertices.len()];
        for e in &self.boundary_edges {
            on[e[0]] = true;
            on[e[1]] = true;
        }
        on
    }
}

/// Twice the signed area of triangle `t` (positive = counterclockwise).
fn signed_area(vertices: &[(f64, f64)], t: &[usize; 3]) -> f64 {
    let (xa, ya) = vertices[t[0]];
    let (xb, yb) = vertices[t[1]];
    let (xc, yc) = vertices[t[2]];
    (xb - xa) * (yc - ya) - (yb - ya) * (xc - xa)
}

/// Edges referenced by exactly one triangle, deterministically ordered.
fn boundary_of(triangles: &[[usize; 3]]) -> Vec<[usize; 2]> {
    let mut count: HashMap<[usize; 2], usize> = HashMap::new();
    for &[a, b, c] in triangles {
        for (i, j) in [(a, b), (b, c), (c, a)] {
            *count.entry([i.min(j), i.max(j)]).or_insert(0) += 1;
        }
    }
    let mut edges: Vec<[usize; 2]> = count
        .into_iter()
        .filter_map(|(e, n)| (n == 1).then_some(e))
        .collect();
    edges.sort_unstable();
    edges
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilateral_base_fan_has_four_vertices() {
        let mesh = Mesh2D::triangle(1.0, 0).unwrap();
        assert_eq!(mesh.vertices.len(), 4);
        assert_eq!(mesh.triangles.len(), 2);
        assert_eq!(mesh.vertices[0], (0.0, 0.0));
        // b = 1: corners at distance 2 from each other, all angles 60°.
        assert!((mesh.area() - 3.0_f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn triangle_area_matches_closed_form() {
        // Base √3·(2b)/2 … with corners (√3,0), (0,±b): area = √3·b.
        let mesh = Mesh2D::triangle(0.5, 4).unwrap();
        let exact = 3.0_f64.sqrt() * 0.5;
        assert!(
            (mesh.area() - exact).abs() < 1e-14,
            "area {} vs {exact}",
            mesh.area()
        );
    }

    #[test]
    fn hexagon_vertices_sit_on_the_unit_circle_at_equal_angles() {
        let mesh = Mesh2D::ngon(6, 0).unwrap();
        assert_eq!(mesh.vertices.len(), 7);
        for (i, &(x, y)) in mesh.vertices.iter().skip(1).enumerate() {
            assert!((x.hypot(y) - 1.0).abs() < 1e-15);
            let want = 2.0 * std::f64::consts::PI * i as f64 / 6.0;
            let got = y.atan2(x).rem_euclid(2.0 * std::f64::consts::PI);
            assert!(
                (got - want).abs() < 1e-14,
                "vertex {i} at angle {got}, want {want}"
            );
        }
    }

    #[test]
    fn refinement_preserves_angles_and_area() {
        let coarse = Mesh2D::ngon(9, 0).unwrap();
        let fine = coarse.refine().refine();
        assert!((coarse.min_angle_deg() - fine.min_angle_deg()).abs() < 1e-9);
        assert!((coarse.area() - fine.area()).abs() < 1e-12);
        assert_eq!(fine.triangles.len(), 16 * coarse.triangles.len());
    }

    #[test]
    fn refinement_keeps_base_vertices_in_place() {
        let mesh = Mesh2D::triangle(0.5, 3).unwrap();
        assert_eq!(mesh.vertices[0], (0.0, 0.0));
        assert_eq!(mesh.vertices[1], (3.0_f64.sqrt(), 0.0));
        assert_eq!(mesh.vertices[2], (0.0, 0.5));
        assert_eq!(mesh.vertices[3], (0.0, -0.5));
    }

    #[test]
    fn vertex_count_follows_euler_formula() {
        // V = 1 + T/2 + B/2 for a disk-like mesh.
        let mesh = Mesh2D::triangle(0.5, 5).unwrap();
        let t = mesh.triangles.len();
        let b = mesh.boundary_edges.len();
        assert_eq!(mesh.vertices.len(), 1 + t / 2 + b / 2);
    }

    #[test]
    fn flat_triangles_and_tiny_polygons_are_rejected() {
        assert!(Mesh2D::triangle(0.2, 0).is_err(), "b=0.2 is under the quality floor");
        assert!(Mesh2D::triangle(0.0, 0).is_err());
        assert!(Mesh2D::triangle(1.1, 0).is_err());
        assert!(Mesh2D::triangle(f64::NAN, 0).is_err());
        assert!(Mesh2D::ngon(2, 0).is_err());
    }

    #[test]
    fn large_polygon_accepts_its_own_sharp_fan() {
        // 48 sides → 7.5° apex angles, legal under the relaxed floor.
        let mesh = Mesh2D::ngon(48, 0).unwrap();
        assert!((mesh.min_angle_deg() - 7.5).abs() < 1e-9);
    }

    #[test]
    fn reflection_is_exact_and_keeps_orientation() {
        let mesh = Mesh2D::triangle(0.5, 2).unwrap();
        let refl = mesh.reflect_y();
        for (&(x, y), &(rx, ry)) in mesh.vertices.iter().zip(&refl.vertices) {
            assert_eq!(x, rx);
            assert_eq!(y, -ry, "reflection must negate y bitwise");
        }
        for tri in &refl.triangles {
            assert!(signed_area(&refl.vertices, tri) > 0.0);
        }
        // The triangle is symmetric, so the reflected vertex SET equals the
        // original set bitwise (possibly reindexed); +0.0 folds the signed
        // zeros that negation creates on the axis.
        let bits = |&(x, y): &(f64, f64)| (x.to_bits(), (y + 0.0).to_bits());
        let mut orig: Vec<_> = mesh.vertices.iter().map(bits).collect();
        let mut refl_set: Vec<_> = refl.vertices.iter().map(bits).collect();
        orig.sort_unstable();
        refl_set.sort_unstable();
        assert_eq!(orig, refl_set);
    }

    #[test]
    fn boundary_of_square_has_expected_length() {
        let mesh = Mesh2D::unit_square(3);
        // Perimeter 4, boundary edges of length 1/2³ per side segment… at
        // level 3 each unit side is split into 2³ = 8 edges.
        assert_eq!(mesh.boundary_edges.len(), 4 * 8);
        assert!((mesh.area() - 1.0).abs() < 1e-14);
    }
}
