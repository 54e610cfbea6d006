//! PPM (P6) rendering of classification grids and phase portraits of `h`.

use std::f64::consts::PI;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::dynamics::{Grid, Rect};
use crate::error::DynError;
use crate::hfun::eval_h_lc;
use crate::logc::MaybeZeroLC;
use crate::params::ParamSeq;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("unknown palette `{0}` (expected classic, fire or gray)")]
    UnknownPalette(String),
    #[error(transparent)]
    Grid(#[from] DynError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Rgb = [u8; 3];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<Rgb>,
}

impl Image {
    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.reserve(self.pixels.len() * 3);
        for px in &self.pixels {
            out.extend_from_slice(px);
        }
        out
    }

    pub fn save_ppm(&self, path: impl AsRef<Path>) -> Result<(), RenderError> {
        std::fs::write(path, self.to_ppm())?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Palette {
    Classic,
    Fire,
    Gray,
}

const CLASSIC: [Rgb; 16] = [
    [66, 30, 15],
    [25, 7, 26],
    [9, 1, 47],
    [4, 4, 73],
    [0, 7, 100],
    [12, 44, 138],
    [24, 82, 177],
    [57, 125, 209],
    [134, 181, 229],
    [211, 236, 248],
    [241, 233, 191],
    [248, 201, 95],
    [255, 170, 0],
    [204, 128, 0],
    [153, 87, 0],
    [106, 52, 3],
];

const FIRE: [Rgb; 8] = [
    [32, 0, 0],
    [96, 0, 0],
    [160, 16, 0],
    [224, 64, 0],
    [255, 128, 0],
    [255, 192, 32],
    [255, 240, 128],
    [255, 255, 224],
];

const GRAY: [Rgb; 8] = [
    [48, 48, 48],
    [80, 80, 80],
    [112, 112, 112],
    [144, 144, 144],
    [176, 176, 176],
    [208, 208, 208],
    [232, 232, 232],
    [248, 248, 248],
];

impl Palette {
    pub fn colors(&self) -> &'static [Rgb] {
        match self {
            Palette::Classic => &CLASSIC,
            Palette::Fire => &FIRE,
            Palette::Gray => &GRAY,
        }
    }

    /// Cyclic lookup by escape step.
    pub fn color(&self, step: u32) -> Rgb {
        let c = self.colors();
        c[step as usize % c.len()]
    }
}

impl FromStr for Palette {
    type Err = RenderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "classic" => Ok(Palette::Classic),
            "fire" => Ok(Palette::Fire),
            "gray" | "grey" => Ok(Palette::Gray),
            _ => Err(RenderError::UnknownPalette(s.to_string())),
        }
    }
}

pub const BLACK: Rgb = [0, 0, 0];
pub const WHITE: Rgb = [255, 255, 255];

pub fn render_escape(grid: &Grid, palette: Palette) -> Image {
    let pixels = grid
        .cells
        .iter()
        .map(|c| {
            if c.translated() {
                WHITE
            } else if c.escaped() {
                palette.color(c.step)
            } else {
                BLACK
            }
        })
        .collect();
    Image {
        width: grid.nx,
        height: grid.ny,
        pixels,
    }
}

pub fn render_escape_file(path: impl AsRef<Path>, palette: Palette) -> Result<Image, RenderError> {
    let bytes = std::fs::read(path)?;
    Ok(render_escape(&Grid::from_bytes(&bytes)?, palette))
}

/// Maps `ln|h|` monotonically into `(0, 1)`; exact zeros map to 0.
pub fn brightness(logmod: f64) -> f64 {
    0.5 + (logmod / 40.0).atan() / PI
}

fn to_byte(x: f64) -> u8 {
    (x.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Full-saturation HSV with `hue` in turns.
fn hsv(hue: f64, value: f64) -> Rgb {
    let h6 = hue.rem_euclid(1.0) * 6.0;
    let sector = (h6.floor() as usize).min(5);
    let f = h6 - sector as f64;
    let (p, q, t) = (0.0, value * (1.0 - f), value * f);
    let (r, g, b) = match sector {
        0 => (value, t, p),
        1 => (q, value, p),
        2 => (p, value, t),
        3 => (p, q, value),
        4 => (t, p, value),
        _ => (value, p, q),
    };
    [to_byte(r), to_byte(g), to_byte(b)]
}

/// Hue from `arg h`, brightness from `ln|h|`.
pub fn phase_color(v: MaybeZeroLC) -> Rgb {
    match v {
        MaybeZeroLC::Zero => BLACK,
        MaybeZeroLC::NonZero(w) => hsv(w.arg() / (2.0 * PI), brightness(w.logmod())),
    }
}

/// Phase portrait of `h` over `rect`, one pixel per cell center.
pub fn render_phase(rect: Rect, nx: usize, ny: usize, p: &ParamSeq) -> Result<Image, RenderError> {
    if nx == 0 || ny == 0 {
        return Err(DynError::EmptyGrid { nx, ny }.into());
    }
    let rows: Vec<Vec<Rgb>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            (0..nx)
                .map(|i| phase_color(eval_h_lc(rect.cell_center(i, j, nx, ny), p)))
                .collect()
        })
        .collect();
    Ok(Image {
        width: nx,
        height: ny,
        pixels: rows.into_iter().flatten().collect(),
    })
}

fn ring_point(radius: f64, j: usize, samples: usize) -> Complex64 {
    Complex64::from_polar(radius, 2.0 * PI * (j as f64 / samples as f64))
}

/// One-row strip of the phase portrait along the circle `|z| = radius`,
/// starting at angle 0 and going counterclockwise.
pub fn render_phase_ring(radius: f64, samples: usize, p: &ParamSeq) -> Image {
    let pixels = (0..samples)
        .into_par_iter()
        .map(|j| phase_color(eval_h_lc(ring_point(radius, j, samples), p)))
        .collect();
    Image {
        width: samples,
        height: 1,
        pixels,
    }
}

/// Unquantized brightness along the same circle; a byte per channel is too
/// coarse to resolve the lobes of a ring.
pub fn ring_brightness(radius: f64, samples: usize, p: &ParamSeq) -> Vec<f64> {
    (0..samples)
        .into_par_iter()
        .map(|j| match eval_h_lc(ring_point(radius, j, samples), p) {
            MaybeZeroLC::Zero => 0.0,
            MaybeZeroLC::NonZero(w) => brightness(w.logmod()),
        })
        .collect()
}

/// Number of strict local maxima of a periodic sequence.
pub fn count_cyclic_maxima(v: &[f64]) -> usize {
    let n = v.len();
    (0..n)
        .filter(|&i| {
            let (prev, next) = (v[(i + n - 1) % n], v[(i + 1) % n]);
            v[i] > prev && v[i] >= next
        })
        .count()
}
