//! Level-set and nodal-domain counting on grid topologies.
//!
//! Given a sampled field `u` and a level `a`, the counter partitions cells
//! into three classes using a *relative* equality tolerance
//! `tol = tolerance_factor · max|u|`:
//!
//! * in-set  — `u − a > tol` (side [`Side::Above`]) or `a − u > tol`
//!   ([`Side::Below`]),
//! * band    — `|u − a| ≤ tol`: too close to the level to classify; these
//!   cells separate components and are never traversed,
//! * opposite side.
//!
//! Connected components of the in-set cells are then counted with a union-find
//! flood fill under the field's own topology: both axes wrap on a torus, the
//! longitude wraps on a sphere (whose optional pole-cap cells are adjacent to
//! the entire first/last latitude row), and masked planar cells are simply
//! absent.  Connectivity is 4-neighbor by default; 8-neighbor is available as
//! an explicit knob because the diagonal convention is a modelling choice, not
//! a fact about the continuum field.
//!
//! If more than `band_fraction_limit` (default 5%) of the countable cells land
//! in the band, the level is declared degenerate and counting refuses to
//! answer: component counts at such levels would measure the tolerance, not
//! the field.
//!
//! [`oracle`] holds an independently coded breadth-first counter used by the
//! test suite to cross-check this module; the two share no traversal code.

pub mod oracle;

use serde::Serialize;

use crate::fields::{DomainTopology, PolePolicy, ScalarField2D};
use crate::{Error, Result};

/// Which side of the level defines the set being counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Above,
    Below,
}

/// Cell adjacency convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Connectivity {
    Four,
    Eight,
}

/// Tunable counting options; [`CountOptions::default`] matches the crate-wide
/// conventions (4-connectivity, `1e−12` relative tolerance, 5% band limit).
#[derive(Debug, Clone, Copy)]
pub struct CountOptions {
    pub connectivity: Connectivity,
    /// Equality tolerance as a fraction of `max|u|`.
    pub tolerance_factor: f64,
    /// Degeneracy threshold: maximum fraction of countable cells allowed in
    /// the equality band.
    pub band_fraction_limit: f64,
}

impl Default for CountOptions {
    fn default() -> Self {
        Self {
            connectivity: Connectivity::Four,
            tolerance_factor: 1e-12,
            band_fraction_limit: 0.05,
        }
    }
}

/// Axis-aligned box in parameter space, `(lo, hi)` per axis; used to restrict
/// counting to a subregion (cells qualify by their centers).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ParamBox {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl ParamBox {
    #[must_use]
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_lo && x <= self.x_hi && y >= self.y_lo && y <= self.y_hi
    }
}

/// Result of one level-set count.
#[derive(Debug, Clone, Serialize)]
pub struct LevelSetReport {
    pub level: f64,
    pub side: Side,
    /// Number of connected components of the in-set cells.
    pub component_count: usize,
    /// Cell count per component, ordered by each component's first cell in
    /// row-major scan order (deterministic).
    pub component_cells: Vec<usize>,
    /// Cells within the equality band `|u − a| ≤ tol`.
    pub cells_in_band: usize,
    /// Cells on the requested side.
    pub cells_in_set: usize,
    /// Cells eligible for counting (unmasked, inside the subregion if any).
    pub cells_countable: usize,
    /// Absolute equality tolerance used.
    pub tolerance: f64,
}

/// Both nodal half-counts of a field: components of `{u > 0}` and `{u < 0}`.
#[derive(Debug, Clone, Serialize)]
pub struct NodalDomainReport {
    pub above: LevelSetReport,
    pub below: LevelSetReport,
}

impl NodalDomainReport {
    /// Total number of nodal domains, `β₀({u>0}) + β₀({u<0})`.
    #[must_use]
    pub fn total(&self) -> usize {
        self.above.component_count + self.below.component_count
    }
}

// ─────────────────────────────────────────────────────────────────────────────
// Cell classification
// ─────────────────────────────────────────────────────────────────────────────

const CLASS_OUT: i8 = 2; // masked or outside the subregion
const CLASS_BAND: i8 = 0;
const CLASS_IN: i8 = 1;
const CLASS_OPPOSITE: i8 = -1;

/// Classify every cell and perform the degeneracy audit.  Returns the class
/// array, the absolute tolerance, and the (band, in-set, countable) tallies.
fn classify(
    field: &ScalarField2D,
    level: f64,
    side: Side,
    opts: &CountOptions,
    subregion: Option<&ParamBox>,
) -> Result<(Vec<i8>, f64, usize, usize, usize)> {
    if !level.is_finite() {
        return Err(Error::invalid(format!("level must be finite, got {level}")));
    }
    let topo = &field.topology;
    let nrows = topo.nrows();
    let ncols = topo.ncols();
    let mask = match topo {
        DomainTopology::PlanarMasked { mask, .. } => Some(mask),
        _ => None,
    };

    // Relative tolerance against the largest in-domain magnitude.
    let mut max_abs = 0.0f64;
    for idx in 0..field.values.len() {
        if let Some(m) = mask {
            if idx < m.len() && !m[idx] {
                continue;
            }
        }
        max_abs = max_abs.max(field.values[idx].abs());
    }
    let tol = opts.tolerance_factor * max_abs;

    let mut class = vec![CLASS_OUT; field.values.len()];
    let mut in_band = 0usize;
    let mut in_set = 0usize;
    let mut countable = 0usize;
    for idx in 0..field.values.len() {
        if let Some(m) = mask {
            if !m[idx] {
                continue;
            }
        }
        if let Some(bx) = subregion {
            if idx < nrows * ncols {
                let (x, y) = topo.cell_center(idx / ncols, idx % ncols);
                if !bx.contains(x, y) {
                    continue;
                }
            } else {
                // Pole caps sit at the poles; a subregion in (θ, φ) excludes
                // them unless it reaches the corresponding pole row.
                let north = idx == nrows * ncols;
                let pole_theta = if north { 0.0 } else { std::f64::consts::PI };
                if !(bx.x_lo <= pole_theta && pole_theta <= bx.x_hi) {
                    continue;
                }
            }
        }
        countable += 1;
        let d = field.values[idx] - level;
        class[idx] = if d.abs() <= tol {
            in_band += 1;
            CLASS_BAND
        } else {
            let above = d > 0.0;
            let wanted = matches!(side, Side::Above) == above;
            if wanted {
                in_set += 1;
                CLASS_IN
            } else {
                CLASS_OPPOSITE
            }
        };
    }

    if countable == 0 {
        return Err(Error::invalid("no countable cells (mask/subregion empty)"));
    }
    if in_band as f64 > opts.band_fraction_limit * countable as f64 {
        return Err(Error::DegenerateThreshold {
            level,
            in_band,
            total: countable,
        });
    }
    Ok((class, tol, in_band, in_set, countable))
}

// ─────────────────────────────────────────────────────────────────────────────
// Union-find counter (production path)
// ─────────────────────────────────────────────────────────────────────────────

struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        assert!(n < u32::MAX as usize, "grid too large for u32 indices");
        Self {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        // Path halving keeps trees flat without recursion.
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra as usize].cmp(&self.rank[rb as usize]) {
            std::cmp::Ordering::Less => self.parent[ra as usize] = rb,
            std::cmp::Ordering::Greater => self.parent[rb as usize] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb as usize] = ra;
                self.rank[ra as usize] += 1;
            }
        }
    }
}

/// Count connected components of the level set `{u ▷ a}` on the field's own
/// topology (▷ = strictly above/below the equality band).
pub fn count_level_components(
    field: &ScalarField2D,
    level: f64,
    side: Side,
    opts: &CountOptions,
) -> Result<LevelSetReport> {
    count_in_subregion(field, level, side, opts, None)
}

/// Count nodal domains: components of `{u > 0}` plus components of `{u < 0}`.
///
/// One classification and one union-find sweep serve both signs; the
/// reports are identical to two [`count_level_components`] calls at level
/// zero, at roughly half the cost.
pub fn count_nodal_domains(field: &ScalarField2D, opts: &CountOptions) -> Result<NodalDomainReport> {
    let (class, tol, in_band, in_set_above, countable) =
        classify(field, 0.0, Side::Above, opts, None)?;
    let mut tallies = sweep_components(
        &field.topology,
        &class,
        opts,
        &[CLASS_IN, CLASS_OPPOSITE],
    );
    let below_cells = tallies.pop().expect("below tally");
    let above_cells = tallies.pop().expect("above tally");
    let report = |side: Side, component_cells: Vec<usize>, in_set: usize| LevelSetReport {
        level: 0.0,
        side,
        component_count: component_cells.len(),
        component_cells,
        cells_in_band: in_band,
        cells_in_set: in_set,
        cells_countable: countable,
        tolerance: tol,
    };
    let in_set_below = countable - in_band - in_set_above;
    Ok(NodalDomainReport {
        above: report(Side::Above, above_cells, in_set_above),
        below: report(Side::Below, below_cells, in_set_below),
    })
}

/// Count components of the level set intersected with an axis-aligned
/// parameter-space box; components clipped by the box still count once.
pub fn component_count_in_band(
    field: &ScalarField2D,
    level: f64,
    side: Side,
    subregion: &ParamBox,
    opts: &CountOptions,
) -> Result<LevelSetReport> {
    count_in_subregion(field, level, side, opts, Some(subregion))
}

fn count_in_subregion(
    field: &ScalarField2D,
    level: f64,
    side: Side,
    opts: &CountOptions,
    subregion: Option<&ParamBox>,
) -> Result<LevelSetReport> {
    let (class, tol, in_band, in_set, countable) =
        classify(field, level, side, opts, subregion)?;
    let mut tallies = sweep_components(&field.topology, &class, opts, &[CLASS_IN]);
    let component_cells = tallies.pop().expect("tally");

    Ok(LevelSetReport {
        level,
        side,
        component_count: component_cells.len(),
        component_cells,
        cells_in_band: in_band,
        cells_in_set: in_set,
        cells_countable: countable,
        tolerance: tol,
    })
}

/// One union-find sweep joining neighbors of equal class, for every class
/// listed in `track`.  Returns the component cell-counts per tracked
/// class, each ordered by the component's first cell in row-major scan
/// order (deterministic).
fn sweep_components(
    topo: &DomainTopology,
    class: &[i8],
    opts: &CountOptions,
    track: &[i8],
) -> Vec<Vec<usize>> {
    let nrows = topo.nrows();
    let ncols = topo.ncols();
    let wrap_rows = matches!(topo, DomainTopology::TorusPeriodic { .. });
    let wrap_cols = !matches!(topo, DomainTopology::PlanarMasked { .. });
    let joinable = |c: i8| track.contains(&c);

    if !wrap_rows && !wrap_cols {
        // Planar grids take a run-length path: a row decomposes into maximal
        // equal-class runs, and only run pairs (not cell pairs) are unioned.
        return sweep_components_runs(nrows, ncols, class, opts, track);
    }

    let mut uf = UnionFind::new(class.len());
    let join = |uf: &mut UnionFind, a: usize, b: usize| {
        if class[a] == class[b] && joinable(class[a]) {
            uf.union(a as u32, b as u32);
        }
    };

    for r in 0..nrows {
        for c in 0..ncols {
            let idx = r * ncols + c;
            if !joinable(class[idx]) {
                continue;
            }
            // Right neighbor (column direction).
            if c + 1 < ncols {
                join(&mut uf, idx, idx + 1);
            } else if wrap_cols {
                join(&mut uf, idx, r * ncols);
            }
            // Down neighbor (row direction).
            if r + 1 < nrows {
                join(&mut uf, idx, idx + ncols);
            } else if wrap_rows {
                join(&mut uf, idx, c);
            }
            if opts.connectivity == Connectivity::Eight {
                // Down-right and down-left diagonals.
                let down_r = if r + 1 < nrows {
                    Some(r + 1)
                } else if wrap_rows {
                    Some(0)
                } else {
                    None
                };
                if let Some(dr) = down_r {
                    let right_c = if c + 1 < ncols {
                        Some(c + 1)
                    } else if wrap_cols {
                        Some(0)
                    } else {
                        None
                    };
                    if let Some(rc) = right_c {
                        join(&mut uf, idx, dr * ncols + rc);
                    }
                    let left_c = if c > 0 {
                        Some(c - 1)
                    } else if wrap_cols {
                        Some(ncols - 1)
                    } else {
                        None
                    };
                    if let Some(lc) = left_c {
                        join(&mut uf, idx, dr * ncols + lc);
                    }
                }
            }
        }
    }

    // Pole caps adjoin their entire boundary row.
    if let DomainTopology::SphereLatLong {
        pole: PolePolicy::Cap,
        ..
    } = topo
    {
        let north = nrows * ncols;
        let south = north + 1;
        for c in 0..ncols {
            join(&mut uf, north, c);
            join(&mut uf, south, (nrows - 1) * ncols + c);
        }
    }

    // Tally components in scan order for deterministic reporting.
    let mut root_slot: std::collections::HashMap<u32, (usize, usize)> =
        std::collections::HashMap::new();
    let mut out: Vec<Vec<usize>> = track.iter().map(|_| Vec::new()).collect();
    for idx in 0..class.len() {
        let Some(ti) = track.iter().position(|&t| t == class[idx]) else {
            continue;
        };
        let root = uf.find(idx as u32);
        match root_slot.get(&root) {
            Some(&(tpos, slot)) => out[tpos][slot] += 1,
            None => {
                root_slot.insert(root, (ti, out[ti].len()));
                out[ti].push(1);
            }
        }
    }
    out
}

/// Run-length variant of [`sweep_components`] for grids without wrap-around
/// edges or pole caps.  Produces identical tallies: runs inherit the scan
/// order of their first cell, so component ordering matches the cell walk.
fn sweep_components_runs(
    nrows: usize,
    ncols: usize,
    class: &[i8],
    opts: &CountOptions,
    track: &[i8],
) -> Vec<Vec<usize>> {
    struct Run {
        c0: usize,
        c1: usize, // inclusive
        class: i8,
    }
    let mut runs: Vec<Run> = Vec::new();
    // First run index of each row (sentinel row at the end).
    let mut row_start = Vec::with_capacity(nrows + 1);
    for r in 0..nrows {
        row_start.push(runs.len());
        let base = r * ncols;
        let mut c = 0;
        while c < ncols {
            let cl = class[base + c];
            if !track.contains(&cl) {
                c += 1;
                continue;
            }
            let c0 = c;
            while c < ncols && class[base + c] == cl {
                c += 1;
            }
            runs.push(Run {
                c0,
                c1: c - 1,
                class: cl,
            });
        }
    }
    row_start.push(runs.len());

    let mut uf = UnionFind::new(runs.len());
    // Under 8-connectivity a run also touches the previous row one column
    // past each end; under 4-connectivity the column spans must overlap.
    let reach = usize::from(opts.connectivity == Connectivity::Eight);
    for r in 1..nrows {
        let (lo, hi) = (row_start[r], row_start[r + 1]);
        let (plo, phi) = (row_start[r - 1], row_start[r]);
        let mut p = plo;
        for i in lo..hi {
            let (rc0, rc1) = (runs[i].c0.saturating_sub(reach), runs[i].c1 + reach);
            // Skip previous-row runs entirely left of this one.
            while p < phi && runs[p].c1 < rc0 {
                p += 1;
            }
            let mut q = p;
            while q < phi && runs[q].c0 <= rc1 {
                if runs[q].class == runs[i].class {
                    uf.union(i as u32, q as u32);
                }
                q += 1;
            }
            // The last overlapping run may also touch the next run of this
            // row, so `p` only advances past strictly-left runs.
        }
    }

    let mut root_slot: std::collections::HashMap<u32, (usize, usize)> =
        std::collections::HashMap::new();
    let mut out: Vec<Vec<usize>> = track.iter().map(|_| Vec::new()).collect();
    for (i, run) in runs.iter().enumerate() {
        let ti = track
            .iter()
            .position(|&t| t == run.class)
            .expect("runs only hold tracked classes");
        let cells = run.c1 - run.c0 + 1;
        let root = uf.find(i as u32);
        match root_slot.get(&root) {
            Some(&(tpos, slot)) => out[tpos][slot] += cells,
            None => {
                root_slot.insert(root, (ti, out[ti].len()));
                out[ti].push(cells);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{sample_planar, sample_sphere, sample_torus};
    use std::f64::consts::PI;

    const TAU: f64 = 2.0 * PI;

    fn opts() -> CountOptions {
        CountOptions::default()
    }

    #[test]
    fn constant_field_has_one_component_above_lower_level() {
        let f = sample_torus(|_, _| 1.0, 16, 16, TAU, TAU, "one").unwrap();
        let rep = count_level_components(&f, 0.0, Side::Above, &opts()).unwrap();
        assert_eq!(rep.component_count, 1);
        assert_eq!(rep.cells_in_set, 256);
        let rep_below = count_level_components(&f, 0.0, Side::Below, &opts()).unwrap();
        assert_eq!(rep_below.component_count, 0);
    }

    #[test]
    fn degenerate_level_is_refused() {
        let f = sample_torus(|_, _| 0.7, 16, 16, TAU, TAU, "c").unwrap();
        let err = count_level_components(&f, 0.7, Side::Above, &opts()).unwrap_err();
        assert!(
            matches!(err, Error::DegenerateThreshold { .. }),
            "expected degenerate-threshold error, got {err}"
        );
    }

    #[test]
    fn cos_x_cos_y_has_two_domains_per_sign_on_the_torus() {
        // The four sign quadrants of cos x·cos y merge pairwise across the
        // periodic boundary: 2 positive + 2 negative domains.  (62 nodes so
        // the nodal lines x,y = π/2, 3π/2 fall between grid nodes.)
        let f = sample_torus(|x, y| x.cos() * y.cos(), 62, 62, TAU, TAU, "cxcy").unwrap();
        let rep = count_nodal_domains(&f, &opts()).unwrap();
        assert_eq!(rep.above.component_count, 2, "positive domains");
        assert_eq!(rep.below.component_count, 2, "negative domains");
        assert_eq!(rep.total(), 4);
    }

    #[test]
    fn torus_wrap_joins_a_band_crossing_the_seam() {
        // cos x > 0 on a band centered at x = 0, crossing the x-seam.
        // (30 nodes so x = π/2, 3π/2 land between nodes.)
        let f = sample_torus(|x, _| x.cos(), 30, 8, TAU, TAU, "cx").unwrap();
        let rep = count_level_components(&f, 0.0, Side::Above, &opts()).unwrap();
        assert_eq!(rep.component_count, 1, "seam must not split the band");
    }

    #[test]
    fn checkerboard_distinguishes_connectivity_conventions() {
        let n = 8;
        let f = sample_torus(
            |x, y| {
                let i = (x / TAU * n as f64).round() as i64;
                let j = (y / TAU * n as f64).round() as i64;
                if (i + j) % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            },
            n,
            n,
            TAU,
            TAU,
            "checker",
        )
        .unwrap();
        let four = count_level_components(&f, 0.0, Side::Above, &opts()).unwrap();
        assert_eq!(four.component_count, n * n / 2, "4-conn: isolated cells");
        let mut o8 = opts();
        o8.connectivity = Connectivity::Eight;
        let eight = count_level_components(&f, 0.0, Side::Above, &o8).unwrap();
        assert_eq!(eight.component_count, 1, "8-conn: all diagonally joined");
    }

    #[test]
    fn pole_caps_connect_arcs_meeting_at_the_pole() {
        // cosθ·(cos²φ − ¼) is positive on two longitude wedges near the
        // north pole (|φ| or |φ−π| small) and on the two complementary
        // wedges near the south pole.  The north cap's sampled value is
        // cos ε · mean(cos²φ − ¼) > 0, so the cap joins the north pair; the
        // south cap's value is negative, so the south pair stays split.
        let build = |pole| {
            sample_sphere(
                |theta: f64, phi: f64| theta.cos() * (phi.cos() * phi.cos() - 0.25),
                64,
                128,
                pole,
                "wedges",
            )
            .unwrap()
        };
        let with_cap =
            count_level_components(&build(crate::fields::PolePolicy::Cap), 0.0, Side::Above, &opts())
                .unwrap();
        let without =
            count_level_components(&build(crate::fields::PolePolicy::Open), 0.0, Side::Above, &opts())
                .unwrap();
        assert_eq!(with_cap.component_count, 3, "north pair joins via the cap");
        assert_eq!(without.component_count, 4, "open poles leave 4 wedges");
    }

    #[test]
    fn planar_mask_blocks_connection() {
        // f = 1 on an annulus-masked box: the hole does not disconnect the
        // ring, but a slit mask does.
        let ring = sample_planar(
            |_, _| 1.0,
            |x, y| {
                let r2 = x * x + y * y;
                (0.3 * 0.3..1.0).contains(&r2)
            },
            64,
            64,
            (-1.0, 1.0, -1.0, 1.0),
            "ring",
        )
        .unwrap();
        let rep = count_level_components(&ring, 0.0, Side::Above, &opts()).unwrap();
        assert_eq!(rep.component_count, 1);

        let slit = sample_planar(
            |_, _| 1.0,
            |x, y| {
                let r2 = x * x + y * y;
                (0.09..1.0).contains(&r2) && !(y.abs() < 0.04 && x > 0.0)
            },
            64,
            64,
            (-1.0, 1.0, -1.0, 1.0),
            "slit-ring",
        )
        .unwrap();
        let rep = count_level_components(&slit, 0.0, Side::Above, &opts()).unwrap();
        assert_eq!(rep.component_count, 1, "slit ring is still one C-shape");
        // Cut the C in a second place: two arcs.
        let two_cuts = sample_planar(
            |_, _| 1.0,
            |x, y| {
                let r2 = x * x + y * y;
                (0.09..1.0).contains(&r2) && !(y.abs() < 0.04 && x > 0.0) && !(x.abs() < 0.04 && y > 0.0)
            },
            64,
            64,
            (-1.0, 1.0, -1.0, 1.0),
            "cut-ring",
        )
        .unwrap();
        let rep = count_level_components(&two_cuts, 0.0, Side::Above, &opts()).unwrap();
        assert_eq!(rep.component_count, 2);
    }

    #[test]
    fn subregion_counts_clipped_components_once() {
        // cos(3x): positive bands centered at x = 0, 2π/3, 4π/3.  The box
        // [0, 2π/3] sees two half-bands.
        let f = sample_torus(|x, _| (3.0 * x).cos(), 192, 8, TAU, TAU, "c3x").unwrap();
        let full = count_level_components(&f, 0.0, Side::Above, &opts()).unwrap();
        assert_eq!(full.component_count, 3);
        let boxed = component_count_in_band(
            &f,
            0.0,
            Side::Above,
            &ParamBox {
                x_lo: 0.0,
                x_hi: TAU / 3.0,
                y_lo: -1.0,
                y_hi: TAU + 1.0,
            },
            &opts(),
        )
        .unwrap();
        assert_eq!(boxed.component_count, 2, "two clipped half-bands");
    }

    #[test]
    fn component_sizes_are_consistent_and_deterministic() {
        let f = sample_torus(|x, y| x.cos() * y.cos(), 30, 30, TAU, TAU, "cc").unwrap();
        let rep = count_level_components(&f, 0.0, Side::Above, &opts()).unwrap();
        let total: usize = rep.component_cells.iter().sum();
        assert_eq!(total, rep.cells_in_set, "every in-set cell in one component");
        let rep2 = count_level_components(&f, 0.0, Side::Above, &opts()).unwrap();
        assert_eq!(rep.component_cells, rep2.component_cells);
    }

    #[test]
    fn tolerance_band_is_relative_to_field_scale() {
        // A tiny-amplitude field must keep its structure: scale-relative
        // tolerance, not absolute.
        let f = sample_torus(|x, _| 1e-300 * x.cos(), 64, 8, TAU, TAU, "tiny").unwrap();
        let rep = count_level_components(&f, 0.0, Side::Above, &opts()).unwrap();
        assert_eq!(rep.component_count, 1);
        assert!(rep.tolerance < 1e-310, "tolerance must scale down");
    }
}
