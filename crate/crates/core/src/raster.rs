//! Binary PGM (P5) and PPM (P6) output for basin renders.

use std::io::{self, Write};

use crate::dynamics::{GrayImage, SHADE_INDETERMINATE, SHADE_MEMBER_MIN};

/// Writes `img` as binary PGM with maxval 255.
pub fn write_pgm<W: Write>(img: &GrayImage, mut out: W) -> io::Result<()> {
    write!(out, "P5\n{} {}\n255\n", img.width, img.height)?;
    out.write_all(&img.pixels)?;
    out.flush()
}

/// Fixed 256-entry colormap used for PPM output.
///
/// * `0` (NonMember): black
/// * `64` (Indeterminate): mid gray `(128, 128, 128)`
/// * `128..=255` (Member): a ramp from deep blue at 128 (slow convergence)
///   to white at 255 (immediate convergence)
/// * any other level: a dim red ramp, unused by the renderer
pub fn palette(level: u8) -> [u8; 3] {
    match level {
        0 => [0, 0, 0],
        SHADE_INDETERMINATE => [128, 128, 128],
        l if l >= SHADE_MEMBER_MIN => {
            let t = u32::from(l - SHADE_MEMBER_MIN);
            let rg = (t * 2) as u8;
            let b = (128 + t) as u8;
            [rg, rg, b]
        }
        l => [l, 0, 0],
    }
}

/// Writes `img` as binary PPM through [`palette`].
pub fn write_ppm<W: Write>(img: &GrayImage, mut out: W) -> io::Result<()> {
    write!(out, "P6\n{} {}\n255\n", img.width, img.height)?;
    let rgb: Vec<u8> = img.pixels.iter().flat_map(|&p| palette(p)).collect();
    out.write_all(&rgb)?;
    out.flush()
}
