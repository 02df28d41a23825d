//! Nodal-domain counts for polynomial eigenfunction families, audited
//! against proved component bounds.
//!
//! Two experiment families live here.  In the plane, combinations of the
//! first `n` harmonic-oscillator eigenfunctions `e^{−(x²+y²)/2}·H_a(x)H_b(y)`
//! share a positive Gaussian factor, so their nodal portrait equals that of
//! the polynomial factor; the count must stay ≤ n, and products of k
//! pairwise non-parallel lines realize the extreme value k(k+1)/2 + 1.  On
//! the unit sphere, a degree-d polynomial restriction has at most 8d²
//! nodal domains (and 32d² from the general dimension-n bound).  All
//! random trials are seeded and reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::fields::{DomainTopology, PolePolicy, ScalarField2D};
use crate::nodal::{
    count_level_components, count_nodal_domains, CountOptions, LevelSetReport, Side,
};
use crate::numerics::hash::splitmix64;
use crate::{Error, Result};

/// Base seed for every pseudo-random trial in this module (date-stamped at
/// freeze time).  Each (context, parameter, trial) triple derives its own
/// stream, so trial t is reproducible in isolation.
pub const TRIAL_SEED: u64 = 20_260_825;

/// Largest Hermite index the evaluator accepts.
pub const HERMITE_MAX: u32 = 60;

/// Physicists' Hermite polynomial `H_k(x)` by the three-term recurrence
/// `H_{k+1} = 2x·H_k − 2k·H_{k−1}`.
pub fn hermite_eval(k: u32, x: f64) -> Result<f64> {
    if k > HERMITE_MAX {
        return Err(Error::invalid(format!(
            "Hermite index {k} above the supported {HERMITE_MAX}"
        )));
    }
    let (mut prev, mut cur) = (1.0_f64, 2.0 * x);
    if k == 0 {
        return Ok(prev);
    }
    for j in 1..k {
        let next = 2.0 * x * cur - 2.0 * j as f64 * prev;
        prev = cur;
        cur = next;
    }
    if !cur.is_finite() {
        return Err(Error::NonFinite(format!("H_{k}({x}) overflowed")));
    }
    Ok(cur)
}

/// Monomial coefficients of `H_k`, constant term first (length `k + 1`).
#[must_use]
pub fn hermite_coefficients(k: u32) -> Vec<f64> {
    let mut prev = vec![1.0];
    if k == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 2.0];
    for j in 1..k {
        let mut next = vec![0.0; j as usize + 2];
        for (i, &c) in cur.iter().enumerate() {
            next[i + 1] += 2.0 * c;
        }
        for (i, &c) in prev.iter().enumerate() {
            next[i] -= 2.0 * j as f64 * c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// One tensor-product oscillator eigenfunction `e^{−(x²+y²)/2}H_a(x)H_b(y)`,
/// identified by its Hermite indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HermiteBasisIndex {
    pub a: u32,
    pub b: u32,
}

impl HermiteBasisIndex {
    /// Energy level `a + b`; eigenvalue levels have multiplicity `level+1`.
    #[must_use]
    pub fn level(&self) -> u32 {
        self.a + self.b
    }

    /// Oscillator eigenvalue `2(a + b + 1)`.
    #[must_use]
    pub fn eigenvalue(&self) -> f64 {
        2.0 * (f64::from(self.a) + f64::from(self.b) + 1.0)
    }

    /// First `n` basis indices in the flat enumeration: sorted by level,
    /// then by `a` ascending within a level (the pinned intra-level order).
    #[must_use]
    pub fn enumerate(n: usize) -> Vec<HermiteBasisIndex> {
        let mut out = Vec::with_capacity(n);
        let mut level = 0u32;
        while out.len() < n {
            for a in 0..=level {
                if out.len() == n {
                    break;
                }
                out.push(HermiteBasisIndex { a, b: level - a });
            }
            level += 1;
        }
        out
    }
}

/// Dense bivariate polynomial, coefficients stored by total degree.
///
/// The coefficient of `x^{t−j} y^j` sits at index `t(t+1)/2 + j`, so the
/// full array length is `(d+1)(d+2)/2`.  The declared degree always has a
/// nonzero coefficient in its top block (see [`Poly2::from_dense`]).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Poly2 {
    pub degree: usize,
    pub coeffs: Vec<f64>,
}

#[inline]
fn idx2(t: usize, j: usize) -> usize {
    t * (t + 1) / 2 + j
}

impl Poly2 {
    /// Strict constructor: the top-degree block must contain a nonzero
    /// coefficient (unless the degree is 0).
    pub fn new(degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        let want = (degree + 1) * (degree + 2) / 2;
        if coeffs.len() != want {
            return Err(Error::invalid(format!(
                "degree-{degree} polynomial needs {want} coefficients, got {}",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("polynomial coefficient".into()));
        }
        if degree > 0 && (idx2(degree, 0)..want).all(|i| coeffs[i] == 0.0) {
            return Err(Error::invalid(
                "declared degree exceeds the highest nonzero block",
            ));
        }
        Ok(Poly2 { degree, coeffs })
    }

    /// Lenient constructor: trims top blocks whose coefficients are all
    /// negligible (below `1e−12` of the largest magnitude), as happens when
    /// leading terms of a combination cancel.  Errors on the zero
    /// polynomial.
    pub fn from_dense(degree: usize, mut coeffs: Vec<f64>) -> Result<Self> {
        let want = (degree + 1) * (degree + 2) / 2;
        if coeffs.len() != want {
            return Err(Error::invalid(format!(
                "degree-{degree} polynomial needs {want} coefficients, got {}",
                coeffs.len()
            )));
        }
        let max = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if !(max.is_finite() && max > 0.0) {
            return Err(Error::Degenerate(
                "zero (or non-finite) polynomial has no nodal portrait".into(),
            ));
        }
        let mut d = degree;
        while d > 0 && (idx2(d, 0)..idx2(d, d) + 1).all(|i| coeffs[i].abs() <= 1e-12 * max) {
            coeffs.truncate(idx2(d, 0));
            d -= 1;
        }
        Poly2::new(d, coeffs)
    }

    /// Coefficient of `x^{t−j} y^j`.
    #[must_use]
    pub fn coeff(&self, t: usize, j: usize) -> f64 {
        self.coeffs[idx2(t, j)]
    }

    /// Evaluate by grouped Horner sweeps (no allocation per call).
    #[must_use]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let d = self.degree;
        let mut acc = 0.0;
        let mut yj = 1.0;
        for j in 0..=d {
            let mut qx = 0.0;
            for t in (j..=d).rev() {
                qx = qx * x + self.coeff(t, j);
            }
            acc += yj * qx;
            yj *= y;
        }
        acc
    }

    /// Product polynomial (degrees add).
    #[must_use]
    pub fn mul(&self, other: &Poly2) -> Poly2 {
        let d = self.degree + other.degree;
        let mut coeffs = vec![0.0; (d + 1) * (d + 2) / 2];
        for t1 in 0..=self.degree {
            for j1 in 0..=t1 {
                let c1 = self.coeff(t1, j1);
                if c1 == 0.0 {
                    continue;
                }
                for t2 in 0..=other.degree {
                    for j2 in 0..=t2 {
                        coeffs[idx2(t1 + t2, j1 + j2)] += c1 * other.coeff(t2, j2);
                    }
                }
            }
        }
        Poly2 { degree: d, coeffs }
    }

    /// Restriction to the x-axis as univariate coefficients (constant
    /// first).
    #[must_use]
    pub fn on_x_axis(&self) -> Vec<f64> {
        (0..=self.degree).map(|t| self.coeff(t, 0)).collect()
    }

    /// Restriction to the y-axis.
    #[must_use]
    pub fn on_y_axis(&self) -> Vec<f64> {
        (0..=self.degree).map(|t| self.coeff(t, t)).collect()
    }

    /// Restriction to the diagonal `y = sign·x` as a univariate in `x`.
    #[must_use]
    pub fn on_diagonal(&self, sign: f64) -> Vec<f64> {
        (0..=self.degree)
            .map(|t| {
                let mut c = 0.0;
                let mut s = 1.0;
                for j in 0..=t {
                    c += s * self.coeff(t, j);
                    s *= sign;
                }
                c
            })
            .collect()
    }
}

/// Cauchy root bound `1 + max |a_i / a_m|` of a univariate coefficient
/// list, using the highest coefficient that is not negligible relative to
/// the largest.  `None` when the restriction is (numerically) constant or
/// zero — it then says nothing about root locations.
fn cauchy_bound(coeffs: &[f64]) -> Option<f64> {
    let max = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if max == 0.0 {
        return None;
    }
    let m = coeffs.iter().rposition(|c| c.abs() > 1e-12 * max)?;
    if m == 0 {
        return None;
    }
    let lead = coeffs[m].abs();
    let worst = coeffs[..m].iter().fold(0.0f64, |w, c| w.max(c.abs() / lead));
    Some(1.0 + worst)
}

/// Window radius for a polynomial's nodal portrait: one plus the largest
/// Cauchy root bound among the restrictions to the two axes and the two
/// diagonals.  Restrictions that vanish identically (axes can be nodal
/// lines, e.g. for `xy`) are skipped; if all four degenerate, a documented
/// fallback of `2 + degree` is used.
#[must_use]
pub fn window_radius(p: &Poly2) -> f64 {
    let bounds = [
        cauchy_bound(&p.on_x_axis()),
        cauchy_bound(&p.on_y_axis()),
        cauchy_bound(&p.on_diagonal(1.0)),
        cauchy_bound(&p.on_diagonal(-1.0)),
    ];
    let best = bounds.iter().flatten().fold(f64::NAN, |m, &b| m.max(b));
    if best.is_nan() {
        2.0 + p.degree as f64
    } else {
        1.0 + best
    }
}

/// Expand a combination of the first `n = coeffs.len()` oscillator
/// eigenfunctions into its polynomial factor and a counting window radius.
///
/// The shared Gaussian is positive, so dropping it leaves the nodal
/// portrait unchanged; the factor has degree at most the level `k` of the
/// last enumerated index — the minimal `k` with `n ≤ (k+1)(k+2)/2`.
pub fn qho_combination(coeffs: &[f64]) -> Result<(Poly2, f64)> {
    if coeffs.is_empty() {
        return Err(Error::invalid("empty combination"));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("combination coefficient".into()));
    }
    if coeffs.iter().all(|&c| c == 0.0) {
        return Err(Error::invalid("all-zero combination"));
    }
    let basis = HermiteBasisIndex::enumerate(coeffs.len());
    let k = basis.last().expect("nonempty").level() as usize;
    let mut dense = vec![0.0; (k + 1) * (k + 2) / 2];
    for (&c, idx) in coeffs.iter().zip(&basis) {
        if c == 0.0 {
            continue;
        }
        let ha = hermite_coefficients(idx.a);
        let hb = hermite_coefficients(idx.b);
        for (i, &ca) in ha.iter().enumerate() {
            if ca == 0.0 {
                continue;
            }
            for (j, &cb) in hb.iter().enumerate() {
                if cb != 0.0 {
                    dense[idx2(i + j, j)] += c * ca * cb;
                }
            }
        }
    }
    let p = Poly2::from_dense(k, dense)?;
    let radius = window_radius(&p);
    Ok((p, radius))
}

/// Product of `k` pairwise non-parallel lines (angles `πi/k`, offsets
/// `0.3 + 0.41·i`), plus a window radius containing every pairwise
/// intersection with margin.  The construction is validated: no two
/// intersection points closer than 0.2, so no three lines are concurrent
/// and a 2048² raster resolves all `k(k+1)/2 + 1` regions.
pub fn lines_product(k: usize) -> Result<(Poly2, f64)> {
    if !(1..=6).contains(&k) {
        return Err(Error::invalid(format!("line count {k} outside 1..=6")));
    }
    let dir: Vec<(f64, f64, f64)> = (0..k)
        .map(|i| {
            let th = std::f64::consts::PI * i as f64 / k as f64;
            (th.cos(), th.sin(), 0.3 + 0.41 * i as f64)
        })
        .collect();
    let mut p = Poly2::new(0, vec![1.0])?;
    for &(c, s, d) in &dir {
        let line = Poly2::new(1, vec![-d, c, s])?;
        p = p.mul(&line);
    }
    let mut points = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let (ci, si, di) = dir[i];
            let (cj, sj, dj) = dir[j];
            let det = ci * sj - si * cj;
            let x = (di * sj - dj * si) / det;
            let y = (ci * dj - cj * di) / det;
            points.push((x, y));
        }
    }
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            let sep = (points[a].0 - points[b].0).hypot(points[a].1 - points[b].1);
            if sep < 0.2 {
                return Err(Error::Degenerate(format!(
                    "line intersections {a} and {b} only {sep:.3} apart"
                )));
            }
        }
    }
    let reach = points
        .iter()
        .map(|&(x, y)| x.hypot(y))
        .fold(0.0f64, f64::max);
    Ok((p, 1.5 + 1.2 * reach))
}

/// Sample a function over the square `[−r, r]²` with a disk mask of radius
/// `r`; cells outside the disk are masked out.
pub fn disk_field<F: Fn(f64, f64) -> f64>(
    f: &F,
    radius: f64,
    resolution: usize,
    label: impl Into<String>,
) -> Result<ScalarField2D> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::invalid(format!("window radius {radius}")));
    }
    if !(32..=4096).contains(&resolution) {
        return Err(Error::invalid(format!(
            "window resolution {resolution} outside 32..=4096"
        )));
    }
    let n = resolution;
    let h = 2.0 * radius / n as f64;
    let r2 = radius * radius;
    let mut vals = vec![0.0; n * n];
    let mut mask = vec![false; n * n];
    for row in 0..n {
        let x = -radius + (row as f64 + 0.5) * h;
        for col in 0..n {
            let y = -radius + (col as f64 + 0.5) * h;
            if x * x + y * y <= r2 {
                let idx = row * n + col;
                vals[idx] = f(x, y);
                mask[idx] = true;
            }
        }
    }
    ScalarField2D::new(
        DomainTopology::PlanarMasked {
            nx: n,
            ny: n,
            x0: -radius,
            x1: radius,
            y0: -radius,
            y1: radius,
            mask,
        },
        vals,
        label,
    )
}

/// Nodal-domain count of a bivariate polynomial over a disk window.
#[derive(Debug, Clone, Serialize)]
pub struct PlaneCountReport {
    pub above: LevelSetReport,
    pub below: LevelSetReport,
    /// Maximal constant-sign arcs of the polynomial along the window
    /// circle; these partition the exterior, so every nodal domain leaving
    /// the window shows up as at least one arc.
    pub circle_sign_arcs: usize,
    pub radius: f64,
    pub resolution: usize,
}

impl PlaneCountReport {
    /// Total nodal domains seen in the window.
    #[must_use]
    pub fn total(&self) -> usize {
        self.above.component_count + self.below.component_count
    }
}

/// Count the nodal domains of `p` inside the disk of the given radius.
///
/// Domains are flood-fill components of `{p > 0}` and `{p < 0}` on a
/// masked raster.  Cells the zero set passes through are masked out
/// before counting: every cell within two cells of a center-sign flip
/// gets a 4×4 sign probe over its closed square, and one disagreeing
/// sample disqualifies it.  With the zero set excised, 8-neighbor
/// connectivity is sound — two countable diagonal neighbors share a
/// corner sample of their common sign, pinning them to the same domain —
/// and it keeps single-cell-wide staircases of thin domains in one piece.
/// Without the excision, a crossing in the zero set (a saddle of `p`) can
/// leak a component count in either direction at any finite resolution.
///
/// A domain reaching past the window keeps counting as one: its boundary
/// arcs stay connected through the in-window rim, and by construction the
/// window radius clears the root bounds, so no nodal structure re-enters
/// from outside.  The polynomial is also sampled densely along the circle
/// itself: vanishing there makes the exterior partition — hence the whole
/// count — inconclusive.
pub fn count_poly_nodal_plane(
    p: &Poly2,
    radius: f64,
    resolution: usize,
) -> Result<PlaneCountReport> {
    let field = masked_poly_window(p, radius, resolution)?;
    // Exterior partition: signs along the window circle.
    let samples = 4 * resolution;
    let mut ring = Vec::with_capacity(samples);
    let mut ring_max = 0.0f64;
    for s in 0..samples {
        let phi = 2.0 * std::f64::consts::PI * s as f64 / samples as f64;
        let v = p.eval(radius * phi.cos(), radius * phi.sin());
        ring_max = ring_max.max(v.abs());
        ring.push(v);
    }
    if !(ring_max.is_finite() && ring_max > 0.0) {
        return Err(Error::Degenerate(
            "polynomial vanishes along the window boundary; count inconclusive".into(),
        ));
    }
    let tol = 1e-9 * ring_max;
    let signs: Vec<i8> = ring
        .iter()
        .filter(|v| v.abs() > tol)
        .map(|&v| if v > 0.0 { 1 } else { -1 })
        .collect();
    if signs.is_empty() {
        return Err(Error::Degenerate(
            "polynomial vanishes along the window boundary; count inconclusive".into(),
        ));
    }
    let mut changes = 0usize;
    for i in 0..signs.len() {
        changes += usize::from(signs[i] != signs[(i + 1) % signs.len()]);
    }
    let circle_sign_arcs = changes.max(1);

    let report = count_nodal_domains(&field, &window_count_options())?;
    Ok(PlaneCountReport {
        above: report.above,
        below: report.below,
        circle_sign_arcs,
        radius,
        resolution,
    })
}

/// Counting options for polynomial windows: 8-neighbor connectivity over
/// the zero-set-excised mask built by [`masked_poly_window`].
#[must_use]
pub fn window_count_options() -> CountOptions {
    CountOptions {
        connectivity: crate::nodal::Connectivity::Eight,
        ..CountOptions::default()
    }
}

/// Rasterize `p` over the disk window with the zero-set-straddling cells
/// masked out (see [`count_poly_nodal_plane`] for why).
///
/// Evaluation is row-factored — `p(x, y) = Σ_j q_j(x)·y^j` with the `q_j`
/// computed once per row — so a cell costs one short Horner sweep.  Probe
/// work is confined to cells within Chebyshev distance 2 of a center-sign
/// flip; that radius catches the acute wedges at zero-set crossings whose
/// sign would otherwise never show at a neighboring center.
pub fn masked_poly_window(p: &Poly2, radius: f64, resolution: usize) -> Result<ScalarField2D> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::invalid(format!("window radius {radius}")));
    }
    if !(32..=4096).contains(&resolution) {
        return Err(Error::invalid(format!(
            "window resolution {resolution} outside 32..=4096"
        )));
    }
    let n = resolution;
    let h = 2.0 * radius / n as f64;
    let r2 = radius * radius;
    let d = p.degree;
    let centers: Vec<f64> = (0..n).map(|i| -radius + (i as f64 + 0.5) * h).collect();
    let mut vals = vec![0.0; n * n];
    let mut max_abs = 0.0f64;
    let mut q = vec![0.0f64; d + 1];
    for row in 0..n {
        let x = centers[row];
        for (j, slot) in q.iter_mut().enumerate() {
            let mut acc = 0.0;
            for t in (j..=d).rev() {
                acc = acc * x + p.coeff(t, j);
            }
            *slot = acc;
        }
        let base = row * n;
        for col in 0..n {
            let y = centers[col];
            let mut v = q[d];
            for j in (0..d).rev() {
                v = v * y + q[j];
            }
            vals[base + col] = v;
            max_abs = max_abs.max(v.abs());
        }
    }
    if !(max_abs.is_finite() && max_abs > 0.0) {
        return Err(Error::Degenerate(
            "polynomial is numerically zero on the window".into(),
        ));
    }

    // Frontier: both endpoints of every sign-flipping 4-neighbor edge.
    let mut frontier = vec![false; n * n];
    for row in 0..n {
        let base = row * n;
        for col in 0..n {
            let idx = base + col;
            let s = vals[idx] > 0.0;
            if col + 1 < n && (vals[idx + 1] > 0.0) != s {
                frontier[idx] = true;
                frontier[idx + 1] = true;
            }
            if row + 1 < n && (vals[idx + n] > 0.0) != s {
                frontier[idx] = true;
                frontier[idx + n] = true;
            }
        }
    }
    // Chebyshev-2 dilation of the frontier, separable passes.
    let mut horiz = vec![false; n * n];
    for row in 0..n {
        let base = row * n;
        for col in 0..n {
            let lo = col.saturating_sub(2);
            let hi = (col + 2).min(n - 1);
            horiz[base + col] = frontier[base + lo..=base + hi].iter().any(|&b| b);
        }
    }
    let mut probe = vec![false; n * n];
    for row in 0..n {
        let lo = row.saturating_sub(2);
        let hi = (row + 2).min(n - 1);
        let out = row * n;
        for src in lo..=hi {
            let base = src * n;
            for col in 0..n {
                probe[out + col] |= horiz[base + col];
            }
        }
    }

    // 4×4 probe offsets spanning the closed cell, corners included.
    let offs = [-0.5 * h, -h / 6.0, h / 6.0, 0.5 * h];
    let mut mask = vec![false; n * n];
    for row in 0..n {
        let x = centers[row];
        for col in 0..n {
            let idx = row * n + col;
            let y = centers[col];
            if x * x + y * y > r2 {
                continue;
            }
            let v = vals[idx];
            if v == 0.0 {
                continue;
            }
            let keep = if !probe[idx] {
                true
            } else {
                let want = v > 0.0;
                offs.iter().all(|&ox| {
                    offs.iter().all(|&oy| {
                        let s = p.eval(x + ox, y + oy);
                        s != 0.0 && (s > 0.0) == want
                    })
                })
            };
            mask[idx] = keep;
        }
    }
    ScalarField2D::new(
        DomainTopology::PlanarMasked {
            nx: n,
            ny: n,
            x0: -radius,
            x1: radius,
            y0: -radius,
            y1: radius,
            mask,
        },
        vals,
        format!("degree-{} polynomial window", p.degree),
    )
}

/// Bound audit for one oscillator combination.
#[derive(Debug, Clone, Serialize)]
pub struct QhoCountReport {
    /// Number of eigenfunctions combined.
    pub n: usize,
    /// Degree of the polynomial factor.
    pub degree: usize,
    pub plane: PlaneCountReport,
    /// The proved bound: at most `n` nodal domains.
    pub bound: usize,
    pub within_bound: bool,
}

/// Count the nodal domains of a combination of the first `n` oscillator
/// eigenfunctions and audit against the bound `≤ n`.
pub fn count_qho_combination(coeffs: &[f64], resolution: usize) -> Result<QhoCountReport> {
    let (p, radius) = qho_combination(coeffs)?;
    let plane = count_poly_nodal_plane(&p, radius, resolution)?;
    let bound = coeffs.len();
    let within_bound = plane.total() <= bound;
    Ok(QhoCountReport {
        n: coeffs.len(),
        degree: p.degree,
        plane,
        bound,
        within_bound,
    })
}

/// Seeded generator stream for trial `t` of a parametrized experiment.
/// `context` separates experiment families, `param` the size parameter.
#[must_use]
pub fn trial_rng(context: u64, param: u64, trial: u64) -> ChaCha8Rng {
    let stream = splitmix64(TRIAL_SEED ^ splitmix64((context << 48) ^ (param << 24) ^ trial));
    ChaCha8Rng::seed_from_u64(stream)
}

/// Deterministic pseudo-random combination coefficients for trial `t` at
/// size `n`: uniform in [−1, 1], redrawn (deterministically) in the
/// vanishingly unlikely case they come out negligible.
#[must_use]
pub fn random_qho_coeffs(n: usize, trial: u64) -> Vec<f64> {
    let mut rng = trial_rng(1, n as u64, trial);
    loop {
        let coeffs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        if coeffs.iter().any(|c| c.abs() > 0.05) {
            return coeffs;
        }
    }
}

/// Dense trivariate polynomial, coefficients stored by total degree.
///
/// Within degree `t`, the coefficient of `x^i y^j z^{t−i−j}` sits at
/// offset `a(a+1)/2 + (a − j)` with `a = t − i`, after the `t(t+1)(t+2)/6`
/// coefficients of lower degrees.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Poly3 {
    pub degree: usize,
    pub coeffs: Vec<f64>,
}

#[inline]
fn idx3(t: usize, i: usize, j: usize) -> usize {
    let a = t - i;
    t * (t + 1) * (t + 2) / 6 + a * (a + 1) / 2 + (a - j)
}

/// Number of trivariate monomials of degree ≤ d.
#[inline]
fn len3(d: usize) -> usize {
    (d + 1) * (d + 2) * (d + 3) / 6
}

impl Poly3 {
    pub fn new(degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != len3(degree) {
            return Err(Error::invalid(format!(
                "degree-{degree} polynomial needs {} coefficients, got {}",
                len3(degree),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("polynomial coefficient".into()));
        }
        if degree > 0 && coeffs[len3(degree - 1)..].iter().all(|&c| c == 0.0) {
            return Err(Error::invalid(
                "declared degree exceeds the highest nonzero block",
            ));
        }
        Ok(Poly3 { degree, coeffs })
    }

    /// Coefficient of `x^i y^j z^{t−i−j}`.
    #[must_use]
    pub fn coeff(&self, t: usize, i: usize, j: usize) -> f64 {
        self.coeffs[idx3(t, i, j)]
    }

    #[must_use]
    pub fn eval(&self, x: f64, y: f64, z: f64) -> f64 {
        let d = self.degree;
        let mut acc = 0.0;
        let mut xi = 1.0;
        for i in 0..=d {
            let mut yj = 1.0;
            for j in 0..=d - i {
                // Horner over the z-exponent for fixed (i, j).
                let mut qz = 0.0;
                for t in (i + j..=d).rev() {
                    qz = qz * z + self.coeff(t, i, j);
                }
                acc += xi * yj * qz;
                yj *= y;
            }
            xi *= x;
        }
        acc
    }

    /// Laplacian `∂²/∂x² + ∂²/∂y² + ∂²/∂z²` (degree drops by 2).
    #[must_use]
    pub fn laplacian(&self) -> Poly3 {
        let d = self.degree.saturating_sub(2);
        let mut coeffs = vec![0.0; len3(d)];
        for t in 2..=self.degree {
            for i in 0..=t {
                for j in 0..=t - i {
                    let c = self.coeff(t, i, j);
                    if c == 0.0 {
                        continue;
                    }
                    let k = t - i - j;
                    if i >= 2 {
                        coeffs[idx3(t - 2, i - 2, j)] += c * (i * (i - 1)) as f64;
                    }
                    if j >= 2 {
                        coeffs[idx3(t - 2, i, j - 2)] += c * (j * (j - 1)) as f64;
                    }
                    if k >= 2 {
                        coeffs[idx3(t - 2, i, j)] += c * (k * (k - 1)) as f64;
                    }
                }
            }
        }
        Poly3 { degree: d, coeffs }
    }

    /// `self + alpha·other` (degrees may differ).
    #[must_use]
    pub fn add_scaled(&self, other: &Poly3, alpha: f64) -> Poly3 {
        let d = self.degree.max(other.degree);
        let mut coeffs = vec![0.0; len3(d)];
        coeffs[..self.coeffs.len()].copy_from_slice(&self.coeffs);
        for (c, &o) in coeffs.iter_mut().zip(&other.coeffs) {
            *c += alpha * o;
        }
        Poly3 { degree: d, coeffs }
    }
}

/// Reduced row echelon form in place; returns the pivot column of each
/// nonzero row.  Partial pivoting with a fixed threshold — entries here
/// are small integers from differentiation, so conditioning is benign.
fn rref(mat: &mut [Vec<f64>], cols: usize) -> Vec<usize> {
    let rows = mat.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (imax, vmax) = (r..rows)
            .map(|i| (i, mat[i][c].abs()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if vmax < 1e-9 {
            continue;
        }
        mat.swap(r, imax);
        let inv = 1.0 / mat[r][c];
        for cc in c..cols {
            mat[r][cc] *= inv;
        }
        for i in 0..rows {
            if i != r && mat[i][c] != 0.0 {
                let f = mat[i][c];
                for cc in c..cols {
                    mat[i][cc] -= f * mat[r][cc];
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of homogeneous degree-`l` harmonic polynomials in three
/// variables: the kernel of the Laplacian on the degree-`l` monomial
/// space, extracted by row reduction.  Dimension `2l + 1`; deterministic
/// order (one basis vector per free monomial column); each element scaled
/// to unit max-coefficient with its first nonzero coefficient positive.
pub fn harmonic_basis(l: usize) -> Result<Vec<Poly3>> {
    if !(1..=8).contains(&l) {
        return Err(Error::invalid(format!("harmonic degree {l} outside 1..=8")));
    }
    // Columns: degree-l monomials (i, j) with k = l − i − j, in idx3 order.
    let mut columns = Vec::new();
    for i in (0..=l).rev() {
        for j in (0..=l - i).rev() {
            columns.push((i, j));
        }
    }
    // Order columns by their idx3 offset within the top block.
    columns.sort_by_key(|&(i, j)| idx3(l, i, j));
    // Rows: degree-(l−2) monomial constraints.  Degree 1 is
    // unconstrained — its Laplacian is identically zero.
    let mut rows = Vec::new();
    if l >= 2 {
        for i in 0..=l - 2 {
            for j in 0..=l - 2 - i {
                rows.push((i, j));
            }
        }
        rows.sort_by_key(|&(i, j)| idx3(l - 2, i, j));
    }
    let row_pos: std::collections::HashMap<(usize, usize), usize> =
        rows.iter().enumerate().map(|(p, &(i, j))| ((i, j), p)).collect();

    let mut mat = vec![vec![0.0f64; columns.len()]; rows.len()];
    for (cpos, &(i, j)) in columns.iter().enumerate() {
        let k = l - i - j;
        if i >= 2 {
            mat[row_pos[&(i - 2, j)]][cpos] += (i * (i - 1)) as f64;
        }
        if j >= 2 {
            mat[row_pos[&(i, j - 2)]][cpos] += (j * (j - 1)) as f64;
        }
        if k >= 2 {
            mat[row_pos[&(i, j)]][cpos] += (k * (k - 1)) as f64;
        }
    }
    let pivots = rref(&mut mat, columns.len());
    let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
    let mut basis = Vec::new();
    for free in 0..columns.len() {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut coeffs = vec![0.0; len3(l)];
        let (fi, fj) = columns[free];
        coeffs[idx3(l, fi, fj)] = 1.0;
        for (rpos, &pc) in pivots.iter().enumerate() {
            let (pi, pj) = columns[pc];
            coeffs[idx3(l, pi, pj)] = -mat[rpos][free];
        }
        // Unit max-coefficient, first nonzero positive.
        let max = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let lead = coeffs.iter().find(|c| c.abs() > 1e-12 * max);
        let scale = lead.map_or(1.0, |&v| v.signum()) / max;
        for c in &mut coeffs {
            *c *= scale;
        }
        let p = Poly3::new(l, coeffs)?;
        let residual = p
            .laplacian()
            .coeffs
            .iter()
            .fold(0.0f64, |m, c| m.max(c.abs()));
        if residual > 1e-9 {
            return Err(Error::Degenerate(format!(
                "harmonic kernel vector failed its Laplacian check: residual {residual:.3e}"
            )));
        }
        basis.push(p);
    }
    if basis.len() != 2 * l + 1 {
        return Err(Error::Degenerate(format!(
            "harmonic space of degree {l} came out {}-dimensional, expected {}",
            basis.len(),
            2 * l + 1
        )));
    }
    Ok(basis)
}

/// Deterministic pseudo-random combination of the degree-`l` harmonic
/// basis for one trial.
pub fn random_sphere_combination(l: usize, trial: u64) -> Result<Poly3> {
    let basis = harmonic_basis(l)?;
    let mut rng = trial_rng(2, l as u64, trial);
    let coeffs: Vec<f64> = (0..basis.len())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let mut p = Poly3 {
        degree: 0,
        coeffs: vec![0.0],
    };
    for (b, &c) in basis.iter().zip(&coeffs) {
        p = p.add_scaled(b, c);
    }
    if p.coeffs.iter().all(|&c| c.abs() < 1e-9) {
        // Deterministically perturb the vanishing draw by advancing trials.
        return random_sphere_combination(l, trial.wrapping_add(0x9e37));
    }
    Ok(p)
}

/// Nodal-domain count of a polynomial restricted to the unit sphere.
#[derive(Debug, Clone, Serialize)]
pub struct SphereCountReport {
    pub degree: usize,
    pub above: LevelSetReport,
    pub below: LevelSetReport,
    /// The sharp sphere bound `8d²`.
    pub bound_sharp: usize,
    /// The three-variable instance `32d²` of the general `2^{2n−1}d^{n−1}`.
    pub bound_general: usize,
    pub within_sharp: bool,
    pub within_general: bool,
}

impl SphereCountReport {
    #[must_use]
    pub fn total(&self) -> usize {
        self.above.component_count + self.below.component_count
    }
}

/// Sample `p` on a latitude/longitude grid (`resolution` colatitude rows,
/// twice as many longitudes, pole caps) and count its nodal domains,
/// auditing the `8d²` and `32d²` bounds.
pub fn count_poly_on_sphere(p: &Poly3, resolution: usize) -> Result<SphereCountReport> {
    if !(32..=2048).contains(&resolution) {
        return Err(Error::invalid(format!(
            "sphere resolution {resolution} outside 32..=2048"
        )));
    }
    let n_theta = resolution;
    let n_phi = 2 * resolution;
    let mut values = Vec::with_capacity(n_theta * n_phi + 2);
    let mut max_abs = 0.0f64;
    for i in 0..n_theta {
        let theta = (i as f64 + 0.5) * std::f64::consts::PI / n_theta as f64;
        let (st, ct) = theta.sin_cos();
        for j in 0..n_phi {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64;
            let v = p.eval(st * phi.cos(), st * phi.sin(), ct);
            max_abs = max_abs.max(v.abs());
            values.push(v);
        }
    }
    values.push(p.eval(0.0, 0.0, 1.0));
    values.push(p.eval(0.0, 0.0, -1.0));
    let coeff_scale = p.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if max_abs <= 1e-12 * coeff_scale {
        return Err(Error::Degenerate(
            "polynomial nearly vanishes on the unit sphere; count inconclusive".into(),
        ));
    }
    let field = ScalarField2D::new(
        DomainTopology::SphereLatLong {
            n_theta,
            n_phi,
            pole: PolePolicy::Cap,
        },
        values,
        format!("degree-{} restriction", p.degree),
    )?;
    let opts = CountOptions::default();
    let above = count_level_components(&field, 0.0, Side::Above, &opts)?;
    let below = count_level_components(&field, 0.0, Side::Below, &opts)?;
    let d = p.degree;
    let bound_sharp = 8 * d * d;
    let bound_general = 32 * d * d;
    let total = above.component_count + below.component_count;
    Ok(SphereCountReport {
        degree: d,
        above,
        below,
        bound_sharp,
        bound_general,
        within_sharp: total <= bound_sharp,
        within_general: total <= bound_general,
    })
}
