//! Sampled scalar fields on the grid topologies the laboratory counts on.
//!
//! Three 2-D topologies cover every experiment in the crate:
//!
//! * [`DomainTopology::TorusPeriodic`] — uniform nodes on a flat torus, both
//!   axes wrap.
//! * [`DomainTopology::SphereLatLong`] — latitude–longitude cells with
//!   cell-centered colatitudes `θ_i = (i+½)·π/nθ` (no node sits on a pole),
//!   longitude wraps, and an optional synthetic cap cell per pole so that
//!   connectivity across the poles is represented honestly.
//! * [`DomainTopology::PlanarMasked`] — cell-centered samples of an
//!   axis-aligned box, with a boolean mask selecting the domain (polygons,
//!   disks, zoom windows).  No wrapping.
//!
//! 1-D periodic fields ([`ScalarField1D`]) carry the profile curves used by
//! the torus and spectrum modules, and support exact-to-resolved-modes
//! spectral differentiation via the in-repo FFT.
//!
//! All constructors validate finiteness and shape; a field that exists is a
//! field the counters can trust.

pub mod io;

use crate::numerics::fft;
use crate::{Error, Result};

// ─────────────────────────────────────────────────────────────────────────────
// 1-D periodic grids and fields
// ─────────────────────────────────────────────────────────────────────────────

/// Uniform periodic grid with nodes `x_j = period·j/n`, `j = 0..n−1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1DPeriodic {
    pub n: usize,
    pub period: f64,
}

impl Grid1DPeriodic {
    pub fn new(n: usize, period: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("1-D grid needs n ≥ 2, got {n}")));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::invalid(format!("period must be positive, got {period}")));
        }
        Ok(Self { n, period })
    }

    /// Node coordinate `x_j`.
    #[inline]
    #[must_use]
    pub fn node(&self, j: usize) -> f64 {
        self.period * j as f64 / self.n as f64
    }

    /// Grid spacing `period/n`.
    #[inline]
    #[must_use]
    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }
}

/// Scalar samples on a [`Grid1DPeriodic`].
#[derive(Debug, Clone)]
pub struct ScalarField1D {
    pub grid: Grid1DPeriodic,
    pub values: Vec<f64>,
    pub label: String,
}

impl ScalarField1D {
    pub fn new(grid: Grid1DPeriodic, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::invalid(format!(
                "field length {} does not match grid n {}",
                values.len(),
                grid.n
            )));
        }
        let label = label.into();
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("1-D field '{label}' at node {bad}")));
        }
        Ok(Self { grid, values, label })
    }

    /// Spectral second derivative: transform, multiply by `−k̂²` with the
    /// integer frequencies of the grid (Nyquist handled as a cosine mode),
    /// transform back.  Exact for trigonometric polynomials resolved by the
    /// grid.  Requires `n ≥ 8` so that at least a few modes exist on each
    /// side of zero.
    pub fn second_derivative_periodic(&self) -> Result<ScalarField1D> {
        let n = self.grid.n;
        if n < 8 {
            return Err(Error::invalid(format!(
                "spectral second derivative needs n ≥ 8, got {n}"
            )));
        }
        let scale = 2.0 * std::f64::consts::PI / self.grid.period;
        let mut re = self.values.clone();
        let mut im = vec![0.0; n];
        fft::forward(&mut re, &mut im);
        for k in 0..n {
            let kappa = fft::bin_frequency(k, n) as f64 * scale;
            let w = -kappa * kappa;
            re[k] *= w;
            im[k] *= w;
        }
        fft::inverse(&mut re, &mut im);
        ScalarField1D::new(
            self.grid.clone(),
            re,
            format!("{}''", self.label),
        )
    }

    /// Extreme values `(min, max)`.
    #[must_use]
    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    /// Number of sign changes around the periodic cycle, ignoring samples
    /// with `|v| ≤ tol` (they belong to the nodal set, not to either side).
    #[must_use]
    pub fn sign_changes(&self, tol: f64) -> usize {
        let signs: Vec<i8> = self
            .values
            .iter()
            .filter(|v| v.abs() > tol)
            .map(|&v| if v > 0.0 { 1 } else { -1 })
            .collect();
        if signs.is_empty() {
            return 0;
        }
        let mut flips = 0;
        for w in signs.windows(2) {
            if w[0] != w[1] {
                flips += 1;
            }
        }
        if signs[signs.len() - 1] != signs[0] {
            flips += 1;
        }
        flips
    }
}

/// Sample the function `f` on a periodic grid.
pub fn sample1d<F: Fn(f64) -> f64>(
    f: F,
    grid: &Grid1DPeriodic,
    label: impl Into<String>,
) -> Result<ScalarField1D> {
    let values: Vec<f64> = (0..grid.n).map(|j| f(grid.node(j))).collect();
    ScalarField1D::new(grid.clone(), values, label)
}

// ─────────────────────────────────────────────────────────────────────────────
// 2-D topologies and fields
// ─────────────────────────────────────────────────────────────────────────────

/// What happens at the two poles of a latitude–longitude sphere grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolePolicy {
    /// Append one synthetic cell per pole, adjacent to the entire first
    /// (resp. last) latitude row.  Counting then sees the true sphere
    /// connectivity.
    Cap,
    /// No pole cells; the first and last rows simply have no neighbor beyond
    /// them.  Appropriate when the field is known to vanish near the poles.
    Open,
}

/// Grid topology of a 2-D scalar field.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainTopology {
    /// Flat torus `[0,lx) × [0,ly)`, nodes `x_i = i·lx/nx`, `y_j = j·ly/ny`,
    /// both axes periodic.
    TorusPeriodic { nx: usize, ny: usize, lx: f64, ly: f64 },
    /// Sphere in colatitude/longitude coordinates.  Interior cells are
    /// cell-centered in θ: `θ_i = (i+½)·π/nθ`; longitudes are `φ_j = 2πj/nφ`
    /// and wrap.
    SphereLatLong {
        n_theta: usize,
        n_phi: usize,
        pole: PolePolicy,
    },
    /// Axis-aligned box `[x0,x1] × [y0,y1]` sampled at cell centers, with a
    /// row-major boolean mask selecting in-domain cells.  No wrapping.
    PlanarMasked {
        nx: usize,
        ny: usize,
        x0: f64,
        x1: f64,
        y0: f64,
        y1: f64,
        mask: Vec<bool>,
    },
}

impl DomainTopology {
    /// Interior grid rows (x, θ or x index).
    #[must_use]
    pub fn nrows(&self) -> usize {
        match self {
            DomainTopology::TorusPeriodic { nx, .. } => *nx,
            DomainTopology::SphereLatLong { n_theta, .. } => *n_theta,
            DomainTopology::PlanarMasked { nx, .. } => *nx,
        }
    }

    /// Interior grid columns (y, φ or y index).
    #[must_use]
    pub fn ncols(&self) -> usize {
        match self {
            DomainTopology::TorusPeriodic { ny, .. } => *ny,
            DomainTopology::SphereLatLong { n_phi, .. } => *n_phi,
            DomainTopology::PlanarMasked { ny, .. } => *ny,
        }
    }

    /// Total number of cells carried by a field on this topology (the sphere
    /// cap policy appends two extra cells).
    #[must_use]
    pub fn cell_count(&self) -> usize {
        let base = self.nrows() * self.ncols();
        match self {
            DomainTopology::SphereLatLong {
                pole: PolePolicy::Cap,
                ..
            } => base + 2,
            _ => base,
        }
    }

    /// Parameter-space coordinates of the center of interior cell
    /// `(row, col)`.
    #[must_use]
    pub fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        match self {
            DomainTopology::TorusPeriodic { nx, ny, lx, ly } => (
                lx * row as f64 / *nx as f64,
                ly * col as f64 / *ny as f64,
            ),
            DomainTopology::SphereLatLong { n_theta, n_phi, .. } => (
                (row as f64 + 0.5) * std::f64::consts::PI / *n_theta as f64,
                col as f64 * 2.0 * std::f64::consts::PI / *n_phi as f64,
            ),
            DomainTopology::PlanarMasked {
                nx,
                ny,
                x0,
                x1,
                y0,
                y1,
                ..
            } => (
                x0 + (row as f64 + 0.5) * (x1 - x0) / *nx as f64,
                y0 + (col as f64 + 0.5) * (y1 - y0) / *ny as f64,
            ),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            DomainTopology::TorusPeriodic { nx, ny, lx, ly } => {
                if *nx < 2 || *ny < 2 {
                    return Err(Error::invalid(format!("torus grid {nx}×{ny} too small")));
                }
                if !(lx.is_finite() && *lx > 0.0 && ly.is_finite() && *ly > 0.0) {
                    return Err(Error::invalid("torus periods must be positive"));
                }
            }
            DomainTopology::SphereLatLong { n_theta, n_phi, .. } => {
                if *n_theta < 2 || *n_phi < 2 {
                    return Err(Error::invalid(format!(
                        "sphere grid {n_theta}×{n_phi} too small"
                    )));
                }
            }
            DomainTopology::PlanarMasked {
                nx,
                ny,
                x0,
                x1,
                y0,
                y1,
                mask,
            } => {
                if *nx < 1 || *ny < 1 {
                    return Err(Error::invalid(format!("planar grid {nx}×{ny} too small")));
                }
                if !(x0.is_finite() && x1.is_finite() && y0.is_finite() && y1.is_finite())
                    || x1 <= x0
                    || y1 <= y0
                {
                    return Err(Error::invalid("planar box must be finite and non-empty"));
                }
                if mask.len() != nx * ny {
                    return Err(Error::invalid(format!(
                        "mask has {} cells, grid has {}",
                        mask.len(),
                        nx * ny
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Scalar samples on a [`DomainTopology`].
///
/// Values are row-major over interior cells (`row·ncols + col`); on a sphere
/// with [`PolePolicy::Cap`] two cap values follow (north, then south).
#[derive(Debug, Clone)]
pub struct ScalarField2D {
    pub topology: DomainTopology,
    pub values: Vec<f64>,
    pub label: String,
}

impl ScalarField2D {
    pub fn new(
        topology: DomainTopology,
        values: Vec<f64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        topology.validate()?;
        let label = label.into();
        if values.len() != topology.cell_count() {
            return Err(Error::invalid(format!(
                "field '{label}' carries {} values, topology needs {}",
                values.len(),
                topology.cell_count()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("2-D field '{label}' at cell {bad}")));
        }
        Ok(Self {
            topology,
            values,
            label,
        })
    }

    /// Value at interior cell `(row, col)`.
    #[inline]
    #[must_use]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.topology.ncols() + col]
    }

    /// Largest absolute value over all cells (caps included).
    #[must_use]
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Extreme values `(min, max)` over all cells (caps included), counting
    /// only unmasked cells on planar topologies.
    #[must_use]
    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (idx, &v) in self.values.iter().enumerate() {
            if let DomainTopology::PlanarMasked { mask, .. } = &self.topology {
                if !mask[idx] {
                    continue;
                }
            }
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }
}

/// Sample `f(x, y)` on a flat torus.
pub fn sample_torus<F: Fn(f64, f64) -> f64>(
    f: F,
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    label: impl Into<String>,
) -> Result<ScalarField2D> {
    let topology = DomainTopology::TorusPeriodic { nx, ny, lx, ly };
    topology.validate()?;
    let mut values = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            let (x, y) = topology.cell_center(i, j);
            values.push(f(x, y));
        }
    }
    ScalarField2D::new(topology, values, label)
}

/// Sample `f(θ, φ)` on a latitude–longitude sphere grid.
///
/// With [`PolePolicy::Cap`] each pole contributes one synthetic cell whose
/// value is `f` at colatitude `π/(4nθ)` from the pole, averaged over the φ
/// samples — a stable stand-in for the value "at" the pole.
pub fn sample_sphere<F: Fn(f64, f64) -> f64>(
    f: F,
    n_theta: usize,
    n_phi: usize,
    pole: PolePolicy,
    label: impl Into<String>,
) -> Result<ScalarField2D> {
    let topology = DomainTopology::SphereLatLong {
        n_theta,
        n_phi,
        pole,
    };
    topology.validate()?;
    let mut values = Vec::with_capacity(topology.cell_count());
    for i in 0..n_theta {
        for j in 0..n_phi {
            let (theta, phi) = topology.cell_center(i, j);
            values.push(f(theta, phi));
        }
    }
    if pole == PolePolicy::Cap {
        let eps = std::f64::consts::PI / (4.0 * n_theta as f64);
        for &theta in &[eps, std::f64::consts::PI - eps] {
            let mut acc = 0.0;
            for j in 0..n_phi {
                let phi = j as f64 * 2.0 * std::f64::consts::PI / n_phi as f64;
                acc += f(theta, phi);
            }
            values.push(acc / n_phi as f64);
        }
    }
    ScalarField2D::new(topology, values, label)
}

/// Sample `f(x, y)` at the cell centers of a planar box, masking cells whose
/// center fails the `inside` predicate.  Masked cells carry value 0.
pub fn sample_planar<F: Fn(f64, f64) -> f64, P: Fn(f64, f64) -> bool>(
    f: F,
    inside: P,
    nx: usize,
    ny: usize,
    bbox: (f64, f64, f64, f64),
    label: impl Into<String>,
) -> Result<ScalarField2D> {
    let (x0, x1, y0, y1) = bbox;
    let mut mask = vec![false; nx * ny];
    let mut values = vec![0.0; nx * ny];
    let probe = DomainTopology::PlanarMasked {
        nx,
        ny,
        x0,
        x1,
        y0,
        y1,
        mask: mask.clone(),
    };
    probe.validate()?;
    for i in 0..nx {
        for j in 0..ny {
            let (x, y) = probe.cell_center(i, j);
            if inside(x, y) {
                mask[i * ny + j] = true;
                values[i * ny + j] = f(x, y);
            }
        }
    }
    let topology = DomainTopology::PlanarMasked {
        nx,
        ny,
        x0,
        x1,
        y0,
        y1,
        mask,
    };
    ScalarField2D::new(topology, values, label)
}
