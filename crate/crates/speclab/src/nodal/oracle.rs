//! Reference counter: repeated breadth-first flood fill.
//!
//! This is the slow, obviously-correct mirror of the union-find counter in
//! the parent module, kept for cross-checking.  It shares *no* traversal code
//! with the production path: cell classification, adjacency and component
//! discovery are all re-derived here from the topology definition.  Tests
//! (and the acceptance suite) assert that both counters agree cell-for-cell.

use std::collections::VecDeque;

use super::{CountOptions, ParamBox, Side};
use crate::fields::{DomainTopology, ScalarField2D};
use crate::{Error, Result};

/// Count the components of `{u ▷ level}` by repeated BFS.  Semantics match
/// [`super::count_level_components`] / [`super::component_count_in_band`]
/// exactly (same tolerance rule, same degeneracy audit).
pub fn count_components_bfs(
    field: &ScalarField2D,
    level: f64,
    side: Side,
    opts: &CountOptions,
    subregion: Option<&ParamBox>,
) -> Result<usize> {
    if !level.is_finite() {
        return Err(Error::invalid("level must be finite"));
    }
    let topo = &field.topology;
    let nrows = topo.nrows();
    let ncols = topo.ncols();
    let n_cells = field.values.len();

    // Independent re-derivation of the eligibility / tolerance rules.
    let planar_mask: Option<&Vec<bool>> = match topo {
        DomainTopology::PlanarMasked { mask, .. } => Some(mask),
        _ => None,
    };
    let eligible = |idx: usize| -> bool {
        if let Some(m) = planar_mask {
            if !m[idx] {
                return false;
            }
        }
        match subregion {
            None => true,
            Some(bx) => {
                if idx < nrows * ncols {
                    let (x, y) = topo.cell_center(idx / ncols, idx % ncols);
                    bx.contains(x, y)
                } else {
                    let pole_theta = if idx == nrows * ncols {
                        0.0
                    } else {
                        std::f64::consts::PI
                    };
                    bx.x_lo <= pole_theta && pole_theta <= bx.x_hi
                }
            }
        }
    };

    let mut max_abs = 0.0f64;
    for idx in 0..n_cells {
        if planar_mask.map_or(true, |m| m[idx]) {
            max_abs = max_abs.max(field.values[idx].abs());
        }
    }
    let tol = opts.tolerance_factor * max_abs;

    let mut in_set = vec![false; n_cells];
    let mut band = 0usize;
    let mut countable = 0usize;
    for idx in 0..n_cells {
        if !eligible(idx) {
            continue;
        }
        countable += 1;
        let d = field.values[idx] - level;
        if d.abs() <= tol {
            band += 1;
        } else if (d > 0.0) == matches!(side, Side::Above) {
            in_set[idx] = true;
        }
    }
    if countable == 0 {
        return Err(Error::invalid("no countable cells"));
    }
    if band as f64 > opts.band_fraction_limit * countable as f64 {
        return Err(Error::DegenerateThreshold {
            level,
            in_band: band,
            total: countable,
        });
    }

    // Neighbor enumeration written from scratch against the topology spec.
    let eight = matches!(opts.connectivity, super::Connectivity::Eight);
    let neighbors = |idx: usize, out: &mut Vec<usize>| {
        out.clear();
        let caps = n_cells - nrows * ncols; // 0 or 2
        if idx >= nrows * ncols {
            // A pole cap touches every cell of its boundary row.
            let row = if idx == nrows * ncols { 0 } else { nrows - 1 };
            for c in 0..ncols {
                out.push(row * ncols + c);
            }
            return;
        }
        let r = idx / ncols;
        let c = idx % ncols;
        let (wrap_r, wrap_c) = match topo {
            DomainTopology::TorusPeriodic { .. } => (true, true),
            DomainTopology::SphereLatLong { .. } => (false, true),
            DomainTopology::PlanarMasked { .. } => (false, false),
        };
        let row_up = if r > 0 {
            Some(r - 1)
        } else if wrap_r {
            Some(nrows - 1)
        } else {
            None
        };
        let row_dn = if r + 1 < nrows {
            Some(r + 1)
        } else if wrap_r {
            Some(0)
        } else {
            None
        };
        let col_lf = if c > 0 {
            Some(c - 1)
        } else if wrap_c {
            Some(ncols - 1)
        } else {
            None
        };
        let col_rt = if c + 1 < ncols {
            Some(c + 1)
        } else if wrap_c {
            Some(0)
        } else {
            None
        };
        if let Some(rr) = row_up {
            out.push(rr * ncols + c);
        }
        if let Some(rr) = row_dn {
            out.push(rr * ncols + c);
        }
        if let Some(cc) = col_lf {
            out.push(r * ncols + cc);
        }
        if let Some(cc) = col_rt {
            out.push(r * ncols + cc);
        }
        if eight {
            for rr in [row_up, row_dn].into_iter().flatten() {
                for cc in [col_lf, col_rt].into_iter().flatten() {
                    out.push(rr * ncols + cc);
                }
            }
        }
        // Boundary rows of a capped sphere touch their pole cap.
        if caps == 2 {
            if r == 0 {
                out.push(nrows * ncols);
            }
            if r == nrows - 1 {
                out.push(nrows * ncols + 1);
            }
        }
    };

    let mut seen = vec![false; n_cells];
    let mut queue = VecDeque::new();
    let mut scratch = Vec::with_capacity(ncols.max(8));
    let mut components = 0usize;
    for start in 0..n_cells {
        if !in_set[start] || seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        queue.push_back(start);
        while let Some(cur) = queue.pop_front() {
            neighbors(cur, &mut scratch);
            for &nb in &scratch {
                if in_set[nb] && !seen[nb] {
                    seen[nb] = true;
                    queue.push_back(nb);
                }
            }
        }
    }
    Ok(components)
}

#[cfg(test)]
mod tests {
    use super::super::{count_level_components, CountOptions, Side};
    use super::*;
    use crate::fields::{sample_planar, sample_sphere, sample_torus};
    use crate::numerics::hash::unit_from_hash;
    use std::f64::consts::PI;

    const TAU: f64 = 2.0 * PI;

    /// Exhaustive agreement check between oracle and production counter.
    fn assert_agree(field: &ScalarField2D, level: f64) {
        for side in [Side::Above, Side::Below] {
            for conn in [super::super::Connectivity::Four, super::super::Connectivity::Eight] {
                let opts = CountOptions {
                    connectivity: conn,
                    ..CountOptions::default()
                };
                let a = count_level_components(field, level, side, &opts).map(|r| r.component_count);
                let b = count_components_bfs(field, level, side, &opts, None);
                match (a, b) {
                    (Ok(x), Ok(y)) => assert_eq!(
                        x, y,
                        "mismatch on '{}', side {side:?}, conn {conn:?}",
                        field.label
                    ),
                    (Err(_), Err(_)) => {}
                    (a, b) => panic!("error status mismatch: {a:?} vs {b:?}"),
                }
            }
        }
    }

    #[test]
    fn oracle_matches_union_find_on_structured_fields() {
        let fields = vec![
            sample_torus(|x, y| x.cos() * y.cos(), 24, 24, TAU, TAU, "cc").unwrap(),
            sample_torus(|x, y| (3.0 * x).cos() + (2.0 * y).sin(), 32, 16, TAU, TAU, "mix").unwrap(),
            sample_sphere(
                |t: f64, p: f64| t.cos() * (p.cos() * p.cos() - 0.25),
                24,
                48,
                crate::fields::PolePolicy::Cap,
                "wedges",
            )
            .unwrap(),
            sample_planar(
                |x, y| (3.0 * x).sin() * (2.0 * y).cos(),
                |x, y| x * x + y * y < 1.0,
                48,
                48,
                (-1.0, 1.0, -1.0, 1.0),
                "disk-waves",
            )
            .unwrap(),
        ];
        for f in &fields {
            assert_agree(f, 0.0);
            assert_agree(f, 0.4);
        }
    }

    #[test]
    fn oracle_matches_union_find_on_hash_noise() {
        // Deterministic rough fields exercise odd component shapes.
        for salt in 0..6u64 {
            let f = sample_torus(
                |x, y| {
                    let i = (x / TAU * 20.0) as u64;
                    let j = (y / TAU * 20.0) as u64;
                    unit_from_hash(i * 31 + j, salt)
                },
                20,
                20,
                TAU,
                TAU,
                "noise",
            )
            .unwrap();
            assert_agree(&f, 0.0);
            assert_agree(&f, 0.2);
        }
    }

    #[test]
    fn oracle_honors_subregions() {
        // 90 nodes so the zeros of cos 3x sit between grid nodes.
        let f = sample_torus(|x, _| (3.0 * x).cos(), 90, 8, TAU, TAU, "c3x").unwrap();
        let bx = ParamBox {
            x_lo: 0.0,
            x_hi: TAU / 3.0,
            y_lo: -1.0,
            y_hi: TAU + 1.0,
        };
        let got = count_components_bfs(&f, 0.0, Side::Above, &CountOptions::default(), Some(&bx))
            .unwrap();
        assert_eq!(got, 2);
    }
}
