//! Orbits of `f` and per-pixel escape classification.

use std::io::{Read, Write};
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::DynError;
use crate::hfun::{eval_h, f_from_h, Regime};
use crate::logc::LogComplex;
use crate::params::ParamSeq;

/// Magic bytes opening a classification grid file.
pub const GRID_MAGIC: &[u8; 7] = b"BKGRID1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrbitStatus {
    Escaped {
        step: usize,
    },
    BoundedSoFar,
    /// Not escaped, but some step moved by roughly one unit near a zero of `h`.
    NearZeroTranslation {
        step: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitRecord {
    /// Iterates while they fit in cartesian form, starting with `z0`.
    pub points: Vec<Complex64>,
    /// The first iterate that only exists in log-polar form.
    pub tail: Option<LogComplex>,
    pub status: OrbitStatus,
    /// First step at which `|h| < ln 2`, whether or not the orbit later escaped.
    pub first_translation: Option<usize>,
    pub max_steps: usize,
    pub escape_radius: f64,
}

/// Default escape radius `4 r_K`. Heuristic: outside `r_K` the dominant factor
/// takes over and desk-scale orbits do not come back.
pub fn default_escape_radius(p: &ParamSeq) -> f64 {
    4.0 * p.r(p.len())
}

fn check_orbit_args(p: &ParamSeq, max_steps: usize, escape_radius: f64) -> Result<(), DynError> {
    if max_steps == 0 {
        return Err(DynError::NoSteps);
    }
    let r_k = p.r(p.len());
    if !(escape_radius > r_k) {
        return Err(DynError::EscapeRadiusTooSmall {
            radius: escape_radius,
            r_k,
        });
    }
    Ok(())
}

fn orbit(z0: Complex64, p: &ParamSeq, max_steps: usize, escape_radius: f64) -> OrbitRecord {
    let ln2 = std::f64::consts::LN_2;
    let mut points = vec![z0];
    let mut tail = None;
    let mut escaped = (z0.norm() > escape_radius).then_some(0);
    let mut first_translation = None;
    let mut z = z0;
    let mut step = 0;
    while escaped.is_none() && step < max_steps {
        let h = eval_h(z, p);
        if first_translation.is_none() && h.value.ln_abs() < ln2.ln() {
            // |h| < ln 2 forces |e^h| into (1/2, 2)
            first_translation = Some(step);
        }
        let f = f_from_h(z, &h);
        step += 1;
        match (f.regime, f.cartesian) {
            (Regime::Finite, Some(w)) => {
                points.push(w);
                z = w;
                if w.norm() > escape_radius {
                    escaped = Some(step);
                }
            }
            _ => {
                tail = f.value.nonzero();
                escaped = Some(step);
            }
        }
    }
    let status = match (escaped, first_translation) {
        (Some(step), _) => OrbitStatus::Escaped { step },
        (None, Some(step)) => OrbitStatus::NearZeroTranslation { step },
        (None, None) => OrbitStatus::BoundedSoFar,
    };
    OrbitRecord {
        points,
        tail,
        status,
        first_translation,
        max_steps,
        escape_radius,
    }
}

pub fn iterate(
    z0: Complex64,
    p: &ParamSeq,
    max_steps: usize,
    escape_radius: f64,
) -> Result<OrbitRecord, DynError> {
    check_orbit_args(p, max_steps, escape_radius)?;
    Ok(orbit(z0, p, max_steps, escape_radius))
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]` in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    /// Center of cell `(i, j)`, with row `j = 0` at the top (largest imaginary part).
    ///
    /// Offsets are built from the odd integer `2i + 1 - nx`, so a rectangle
    /// symmetric about the real axis yields rows that are exact conjugates.
    pub fn cell_center(&self, i: usize, j: usize, nx: usize, ny: usize) -> Complex64 {
        let along = |lo: f64, hi: f64, idx: usize, count: usize| {
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            let odd = (2 * idx + 1) as f64 - count as f64;
            mid + half * odd / count as f64
        };
        Complex64::new(
            along(self.x0, self.x1, i, nx),
            along(self.y1, self.y0, j, ny),
        )
    }
}

impl FromStr for Rect {
    type Err = DynError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v: Vec<f64> = s
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| DynError::BadRect(s.to_string()))?;
        match v[..] {
            [x0, y0, x1, y1] if v.iter().all(|x| x.is_finite()) => Ok(Rect::new(x0, y0, x1, y1)),
            _ => Err(DynError::BadRect(s.to_string())),
        }
    }
}

/// Cell status codes stored in grid files.
pub mod cell {
    pub const BOUNDED: u8 = 0;
    pub const ESCAPED: u8 = 1;
    pub const TRANSLATED: u8 = 2;
    /// Escaped after an earlier near-zero translation step.
    pub const ESCAPED_TRANSLATED: u8 = 3;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cell {
    pub status: u8,
    /// Escape step when escaped, else the first translation step, else 0.
    pub step: u32,
}

impl Cell {
    fn from_orbit(o: &OrbitRecord) -> Self {
        let translated = o.first_translation.is_some();
        match o.status {
            OrbitStatus::Escaped { step } => Cell {
                status: if translated {
                    cell::ESCAPED_TRANSLATED
                } else {
                    cell::ESCAPED
                },
                step: step as u32,
            },
            OrbitStatus::NearZeroTranslation { step } => Cell {
                status: cell::TRANSLATED,
                step: step as u32,
            },
            OrbitStatus::BoundedSoFar => Cell {
                status: cell::BOUNDED,
                step: 0,
            },
        }
    }

    pub fn escaped(&self) -> bool {
        self.status & 1 == 1
    }

    pub fn translated(&self) -> bool {
        self.status & 2 == 2
    }
}

/// Row-major classification grid, row 0 at the top.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub params_hash: [u8; 32],
    pub cells: Vec<Cell>,
}

impl Grid {
    pub fn get(&self, i: usize, j: usize) -> Cell {
        self.cells[j * self.nx + i]
    }

    /// Layout (little-endian): magic `BKGRID1`, `nx: u32`, `ny: u32`,
    /// 32-byte parameter hash, then `nx·ny` cells of `status: u8, step: u32`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(7 + 8 + 32 + 5 * self.cells.len());
        out.extend_from_slice(GRID_MAGIC);
        out.extend_from_slice(&(self.nx as u32).to_le_bytes());
        out.extend_from_slice(&(self.ny as u32).to_le_bytes());
        out.extend_from_slice(&self.params_hash);
        for c in &self.cells {
            out.push(c.status);
            out.extend_from_slice(&c.step.to_le_bytes());
        }
        out
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<(), DynError> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DynError> {
        let bad = |msg: &str| DynError::BadGrid(msg.to_string());
        let header = 7 + 8 + 32;
        if bytes.len() < header || &bytes[..7] != GRID_MAGIC {
            return Err(bad("missing BKGRID1 header"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let nx = u32_at(7) as usize;
        let ny = u32_at(11) as usize;
        if nx == 0 || ny == 0 {
            return Err(bad("zero dimension"));
        }
        let params_hash: [u8; 32] = bytes[15..47].try_into().unwrap();
        let expected = nx
            .checked_mul(ny)
            .and_then(|c| c.checked_mul(5))
            .ok_or_else(|| bad("dimensions overflow"))?;
        if bytes.len() - header != expected {
            return Err(bad(&format!(
                "expected {expected} cell bytes, found {}",
                bytes.len() - header
            )));
        }
        let cells = bytes[header..]
            .chunks_exact(5)
            .map(|c| {
                let status = c[0];
                if status > cell::ESCAPED_TRANSLATED {
                    return Err(bad(&format!("unknown status code {status}")));
                }
                Ok(Cell {
                    status,
                    step: u32::from_le_bytes(c[1..5].try_into().unwrap()),
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(Grid {
            nx,
            ny,
            params_hash,
            cells,
        })
    }

    pub fn read_from(mut r: impl Read) -> Result<Self, DynError> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        Self::from_bytes(&buf)
    }
}

/// Classifies the orbit of every cell center. Rows run in parallel on the
/// current rayon pool; the result does not depend on the thread count.
pub fn classify_grid(
    rect: Rect,
    nx: usize,
    ny: usize,
    p: &ParamSeq,
    max_steps: usize,
    escape_radius: f64,
) -> Result<Grid, DynError> {
    if nx == 0 || ny == 0 {
        return Err(DynError::EmptyGrid { nx, ny });
    }
    check_orbit_args(p, max_steps, escape_radius)?;
    let rows: Vec<Vec<Cell>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            (0..nx)
                .map(|i| {
                    let z = rect.cell_center(i, j, nx, ny);
                    Cell::from_orbit(&orbit(z, p, max_steps, escape_radius))
                })
                .collect()
        })
        .collect();
    Ok(Grid {
        nx,
        ny,
        params_hash: p.fingerprint(),
        cells: rows.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_toy;
    use std::f64::consts::E;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn translation_at_zero() {
        let p = make_toy("doubling").unwrap();
        let o = iterate(c(0.0, 2.0), &p, 1, 64.0).unwrap();
        assert_eq!(o.points[1], c(1.0, 2.0));
        assert_eq!(o.first_translation, Some(0));
        assert_eq!(o.status, OrbitStatus::NearZeroTranslation { step: 0 });
    }

    #[test]
    fn origin_escapes_at_step_3() {
        let p = make_toy("doubling").unwrap();
        let o = iterate(c(0.0, 0.0), &p, 50, 100.0).unwrap();
        assert_eq!(o.status, OrbitStatus::Escaped { step: 3 });
        assert_eq!(o.points.len(), 3);
        assert_eq!(o.points[1], c(E, 0.0));
        assert!((o.points[2].re - 34.380_536_700_334_92).abs() < 1e-9);
        let tail = o.tail.expect("log-form tail");
        assert!((tail.logmod() / 3.890_384_917_673_424e16 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bounded_so_far_with_one_step() {
        let p = make_toy("doubling").unwrap();
        let o = iterate(c(0.1, 0.0), &p, 1, 64.0).unwrap();
        assert_eq!(o.status, OrbitStatus::BoundedSoFar);
        assert_eq!(o.points.len(), 2);
    }

    #[test]
    fn start_outside_radius_escapes_at_0() {
        let p = make_toy("doubling").unwrap();
        let o = iterate(c(100.0, 0.0), &p, 5, 64.0).unwrap();
        assert_eq!(o.status, OrbitStatus::Escaped { step: 0 });
    }

    #[test]
    fn argument_errors() {
        let p = make_toy("doubling").unwrap();
        assert!(matches!(
            iterate(c(0.0, 0.0), &p, 0, 64.0),
            Err(DynError::NoSteps)
        ));
        assert!(matches!(
            iterate(c(0.0, 0.0), &p, 5, 16.0),
            Err(DynError::EscapeRadiusTooSmall { .. })
        ));
        assert!(matches!(
            classify_grid(Rect::new(0.0, 0.0, 1.0, 1.0), 0, 3, &p, 5, 64.0),
            Err(DynError::EmptyGrid { .. })
        ));
    }

    #[test]
    fn one_by_one_grid_at_origin() {
        let p = make_toy("doubling").unwrap();
        let g = classify_grid(Rect::new(-1.0, -1.0, 1.0, 1.0), 1, 1, &p, 50, 100.0).unwrap();
        assert_eq!(
            g.cells,
            vec![Cell {
                status: cell::ESCAPED,
                step: 3
            }]
        );
        let g = classify_grid(Rect::new(0.0, 0.0, 0.0, 0.0), 1, 1, &p, 50, 100.0).unwrap();
        assert_eq!(g.cells[0].step, 3);
    }

    #[test]
    fn degenerate_rect_gives_same_point() {
        let r = Rect::new(0.0, 2.0, 0.0, 2.0);
        assert_eq!(r.cell_center(0, 0, 1, 1), c(0.0, 2.0));
        let p = make_toy("doubling").unwrap();
        let g = classify_grid(r, 1, 1, &p, 50, 64.0).unwrap();
        assert!(g.cells[0].translated());
    }

    #[test]
    fn cell_centers_mirror_exactly() {
        let r = Rect::new(-3.0, -1.7, 2.0, 1.7);
        for (nx, ny) in [(7, 9), (10, 10), (3, 64)] {
            for j in 0..ny {
                for i in 0..nx {
                    let a = r.cell_center(i, j, nx, ny);
                    let b = r.cell_center(i, ny - 1 - j, nx, ny);
                    assert_eq!(a, b.conj());
                }
            }
        }
        assert_eq!(r.cell_center(0, 0, 1, 1), c(-0.5, 0.0));
    }

    #[test]
    fn rect_parsing() {
        assert_eq!(
            "-1,-2,3,4".parse::<Rect>().unwrap(),
            Rect::new(-1.0, -2.0, 3.0, 4.0)
        );
        assert!("1,2,3".parse::<Rect>().is_err());
        assert!("a,b,c,d".parse::<Rect>().is_err());
        assert!("1,2,3,inf".parse::<Rect>().is_err());
    }

    #[test]
    fn grid_bytes_round_trip_and_errors() {
        let p = make_toy("doubling").unwrap();
        let g = classify_grid(Rect::new(-3.0, -3.0, 3.0, 3.0), 5, 4, &p, 20, 64.0).unwrap();
        let bytes = g.to_bytes();
        assert_eq!(&bytes[..7], b"BKGRID1");
        assert_eq!(bytes.len(), 7 + 8 + 32 + 5 * 20);
        assert_eq!(Grid::from_bytes(&bytes).unwrap(), g);
        assert!(Grid::from_bytes(&bytes[..30]).is_err());
        assert!(Grid::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(Grid::from_bytes(&bad).is_err());
        let mut bad = bytes;
        bad[47] = 9;
        assert!(Grid::from_bytes(&bad).is_err());
    }
}
