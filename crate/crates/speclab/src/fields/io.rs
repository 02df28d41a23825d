//! On-disk field format: one JSON header line, then a CSV body.
//!
//! The format is deliberately binary-free and diff-friendly:
//!
//! ```text
//! {"schema":"speclab-field/1","label":"cos","topology":{...}}
//! 1.0000000000000000e0,6.1232339957367660e-17,-1.0000000000000000e0,...
//! ```
//!
//! * The header is a single JSON object carrying the topology, dimensions and
//!   label.  Planar masks are stored as alternating run lengths
//!   (`mask_rle`, starting with the length of the leading `false` run).
//! * The body holds the row-major values, one CSV line per grid row (one line
//!   total for 1-D fields; sphere pole caps append a final 2-value line).
//! * Every value is printed with 17 significant digits (`{:.16e}`), which
//!   round-trips every finite IEEE-754 double bit-identically.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DomainTopology, Grid1DPeriodic, PolePolicy, ScalarField1D, ScalarField2D};
use crate::{Error, Result};

const SCHEMA: &str = "speclab-field/1";

#[derive(Serialize, Deserialize)]
struct Header {
    schema: String,
    label: String,
    topology: TopoHeader,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type")]
enum TopoHeader {
    #[serde(rename = "periodic-1d")]
    Periodic1D { n: usize, period: f64 },
    #[serde(rename = "torus")]
    Torus { nx: usize, ny: usize, lx: f64, ly: f64 },
    #[serde(rename = "sphere")]
    Sphere {
        n_theta: usize,
        n_phi: usize,
        pole: String,
    },
    #[serde(rename = "planar")]
    Planar {
        nx: usize,
        ny: usize,
        x0: f64,
        x1: f64,
        y0: f64,
        y1: f64,
        mask_rle: Vec<usize>,
    },
}

/// Format one double with 17 significant digits; parse-exact for all finite
/// values.
#[inline]
fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn mask_to_rle(mask: &[bool]) -> Vec<usize> {
    let mut rle = Vec::new();
    let mut current = false;
    let mut run = 0usize;
    for &m in mask {
        if m == current {
            run += 1;
        } else {
            rle.push(run);
            current = m;
            run = 1;
        }
    }
    rle.push(run);
    rle
}

fn rle_to_mask(rle: &[usize], expected_len: usize) -> Result<Vec<bool>> {
    let mut mask = Vec::with_capacity(expected_len);
    let mut current = false;
    for &run in rle {
        mask.extend(std::iter::repeat(current).take(run));
        current = !current;
    }
    if mask.len() != expected_len {
        return Err(Error::Format(format!(
            "mask run lengths sum to {}, expected {}",
            mask.len(),
            expected_len
        )));
    }
    Ok(mask)
}

// ─────────────────────────────────────────────────────────────────────────────
// Writing
// ─────────────────────────────────────────────────────────────────────────────

/// Serialize a 2-D field to `w`.
pub fn write_field2d<W: Write>(field: &ScalarField2D, w: &mut W) -> Result<()> {
    let topology = match &field.topology {
        DomainTopology::TorusPeriodic { nx, ny, lx, ly } => TopoHeader::Torus {
            nx: *nx,
            ny: *ny,
            lx: *lx,
            ly: *ly,
        },
        DomainTopology::SphereLatLong {
            n_theta,
            n_phi,
            pole,
        } => TopoHeader::Sphere {
            n_theta: *n_theta,
            n_phi: *n_phi,
            pole: match pole {
                PolePolicy::Cap => "cap".into(),
                PolePolicy::Open => "open".into(),
            },
        },
        DomainTopology::PlanarMasked {
            nx,
            ny,
            x0,
            x1,
            y0,
            y1,
            mask,
        } => TopoHeader::Planar {
            nx: *nx,
            ny: *ny,
            x0: *x0,
            x1: *x1,
            y0: *y0,
            y1: *y1,
            mask_rle: mask_to_rle(mask),
        },
    };
    let header = Header {
        schema: SCHEMA.into(),
        label: field.label.clone(),
        topology,
    };
    let header_json =
        serde_json::to_string(&header).map_err(|e| Error::Format(format!("header: {e}")))?;
    writeln!(w, "{header_json}")?;

    let ncols = field.topology.ncols();
    let nrows = field.topology.nrows();
    for row in 0..nrows {
        let line: Vec<String> = (0..ncols)
            .map(|col| fmt_value(field.values[row * ncols + col]))
            .collect();
        writeln!(w, "{}", line.join(","))?;
    }
    if field.values.len() > nrows * ncols {
        // Sphere pole caps: final 2-value line.
        let caps: Vec<String> = field.values[nrows * ncols..]
            .iter()
            .map(|&v| fmt_value(v))
            .collect();
        writeln!(w, "{}", caps.join(","))?;
    }
    Ok(())
}

/// Serialize a 1-D field to `w`.
pub fn write_field1d<W: Write>(field: &ScalarField1D, w: &mut W) -> Result<()> {
    let header = Header {
        schema: SCHEMA.into(),
        label: field.label.clone(),
        topology: TopoHeader::Periodic1D {
            n: field.grid.n,
            period: field.grid.period,
        },
    };
    let header_json =
        serde_json::to_string(&header).map_err(|e| Error::Format(format!("header: {e}")))?;
    writeln!(w, "{header_json}")?;
    let line: Vec<String> = field.values.iter().map(|&v| fmt_value(v)).collect();
    writeln!(w, "{}", line.join(","))?;
    Ok(())
}

/// Write a 2-D field to a file path.
pub fn save_field2d<P: AsRef<Path>>(field: &ScalarField2D, path: P) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field2d(field, &mut w)
}

/// Write a 1-D field to a file path.
pub fn save_field1d<P: AsRef<Path>>(field: &ScalarField1D, path: P) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field1d(field, &mut w)
}

// ─────────────────────────────────────────────────────────────────────────────
// Reading
// ─────────────────────────────────────────────────────────────────────────────

fn parse_values(line: &str, expected: usize, what: &str) -> Result<Vec<f64>> {
    let vals: Result<Vec<f64>> = line
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("{what}: bad value '{tok}': {e}")))
        })
        .collect();
    let vals = vals?;
    if vals.len() != expected {
        return Err(Error::Format(format!(
            "{what}: {} values on line, expected {expected}",
            vals.len()
        )));
    }
    Ok(vals)
}

fn read_header<R: BufRead>(r: &mut R) -> Result<Header> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: Header = serde_json::from_str(line.trim())
        .map_err(|e| Error::Format(format!("field header: {e}")))?;
    if header.schema != SCHEMA {
        return Err(Error::Format(format!(
            "unknown schema '{}', expected '{SCHEMA}'",
            header.schema
        )));
    }
    Ok(header)
}

/// Deserialize a 2-D field from `r`.
pub fn read_field2d<R: Read>(r: R) -> Result<ScalarField2D> {
    let mut reader = BufReader::new(r);
    let header = read_header(&mut reader)?;
    let topology = match header.topology {
        TopoHeader::Torus { nx, ny, lx, ly } => DomainTopology::TorusPeriodic { nx, ny, lx, ly },
        TopoHeader::Sphere {
            n_theta,
            n_phi,
            pole,
        } => DomainTopology::SphereLatLong {
            n_theta,
            n_phi,
            pole: match pole.as_str() {
                "cap" => PolePolicy::Cap,
                "open" => PolePolicy::Open,
                other => {
                    return Err(Error::Format(format!("unknown pole policy '{other}'")));
                }
            },
        },
        TopoHeader::Planar {
            nx,
            ny,
            x0,
            x1,
            y0,
            y1,
            mask_rle,
        } => DomainTopology::PlanarMasked {
            nx,
            ny,
            x0,
            x1,
            y0,
            y1,
            mask: rle_to_mask(&mask_rle, nx * ny)?,
        },
        TopoHeader::Periodic1D { .. } => {
            return Err(Error::Format(
                "file holds a 1-D field; use the 1-D reader".into(),
            ));
        }
    };
    let nrows = topology.nrows();
    let ncols = topology.ncols();
    let mut values = Vec::with_capacity(topology.cell_count());
    let mut line = String::new();
    for row in 0..nrows {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            return Err(Error::Format(format!("body truncated at row {row}")));
        }
        values.extend(parse_values(line.trim_end(), ncols, &format!("row {row}"))?);
    }
    let caps = topology.cell_count() - nrows * ncols;
    if caps > 0 {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            return Err(Error::Format("body truncated before pole caps".into()));
        }
        values.extend(parse_values(line.trim_end(), caps, "pole caps")?);
    }
    ScalarField2D::new(topology, values, header.label)
}

/// Deserialize a 1-D field from `r`.
pub fn read_field1d<R: Read>(r: R) -> Result<ScalarField1D> {
    let mut reader = BufReader::new(r);
    let header = read_header(&mut reader)?;
    match header.topology {
        TopoHeader::Periodic1D { n, period } => {
            let grid = Grid1DPeriodic::new(n, period)?;
            let mut line = String::new();
            if reader.read_line(&mut line)? == 0 {
                return Err(Error::Format("missing 1-D body line".into()));
            }
            let values = parse_values(line.trim_end(), n, "1-D body")?;
            ScalarField1D::new(grid, values, header.label)
        }
        _ => Err(Error::Format(
            "file holds a 2-D field; use the 2-D reader".into(),
        )),
    }
}

/// Read a 2-D field from a file path.
pub fn load_field2d<P: AsRef<Path>>(path: P) -> Result<ScalarField2D> {
    read_field2d(File::open(path)?)
}

/// Read a 1-D field from a file path.
pub fn load_field1d<P: AsRef<Path>>(path: P) -> Result<ScalarField1D> {
    read_field1d(File::open(path)?)
}
