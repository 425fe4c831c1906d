//! Expected focal-plane image of a pattern as a 16-bit PGM.

use crate::compiler::{check_resolution, Pattern};
use crate::device::{positive, DeviceSpec};
use crate::error::Result;

/// Measured spot 1/e² radii, m.
pub const DEFAULT_SPOT_WX: f64 = 15e-6;
pub const DEFAULT_SPOT_WY: f64 = 11.3e-6;

pub const EDGE_ROW_NOTE: &str =
    "top and bottom rows: expect ~10% lower fast-axis resolution (annotation only; geometry unchanged)";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    pub spot_wx: f64,
    pub spot_wy: f64,
    /// Cell spacing along columns (x) and rows (y), m.
    pub pitch_x: f64,
    pub pitch_y: f64,
    /// Image sample spacing, m.
    pub pixel: f64,
    pub annotate_edge_rows: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            spot_wx: DEFAULT_SPOT_WX,
            spot_wy: DEFAULT_SPOT_WY,
            pitch_x: 30e-6,
            pitch_y: 30e-6,
            pixel: 2e-6,
            annotate_edge_rows: false,
        }
    }
}

impl RenderOptions {
    fn validate(&self) -> Result<()> {
        positive("spot_wx", self.spot_wx)?;
        positive("spot_wy", self.spot_wy)?;
        positive("pitch_x", self.pitch_x)?;
        positive("pitch_y", self.pitch_y)?;
        positive("pixel", self.pixel)?;
        Ok(())
    }
}

/// Linear intensity image, row-major, `width` × `height`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<f64>,
    pub notes: Vec<String>,
}

impl Image {
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    pub fn max(&self) -> f64 {
        self.pixels.iter().cloned().fold(0.0, f64::max)
    }

    /// Binary PGM (P5), 16-bit big-endian, scaled so the brightest pixel is 65535.
    /// Notes become header comments.
    pub fn to_pgm(&self) -> Vec<u8> {
        let scale = 65535.0 / self.max().max(f64::MIN_POSITIVE);
        let mut out = b"P5\n".to_vec();
        for note in &self.notes {
            out.extend_from_slice(format!("# {note}\n").as_bytes());
        }
        out.extend_from_slice(format!("{} {}\n65535\n", self.width, self.height).as_bytes());
        out.reserve(self.pixels.len() * 2);
        for &p in &self.pixels {
            let v = (p * scale).round().clamp(0.0, 65535.0) as u16;
            out.extend_from_slice(&v.to_be_bytes());
        }
        out
    }
}

/// Pixel coordinates of cell `(col, row)`'s spot center. Cell (0, 0) sits on
/// a whole pixel at least three spot radii from the image edge.
pub fn cell_center(col: usize, row: usize, options: &RenderOptions) -> (f64, f64) {
    let margin_x = (3.0 * options.spot_wx / options.pixel).ceil();
    let margin_y = (3.0 * options.spot_wy / options.pixel).ceil();
    (
        margin_x + col as f64 * options.pitch_x / options.pixel,
        margin_y + row as f64 * options.pitch_y / options.pixel,
    )
}

/// Sum of elliptical Gaussian spots `w·exp(-2x²/wx² - 2y²/wy²)`, one per lit cell.
/// Rows run down the image, columns across.
pub fn render(pattern: &Pattern, device: &DeviceSpec, options: &RenderOptions) -> Result<Image> {
    options.validate()?;
    check_resolution(pattern, device, device.raster_period)?;

    let (last_x, last_y) = cell_center(pattern.n_cols() - 1, pattern.n_rows() - 1, options);
    let (first_x, first_y) = cell_center(0, 0, options);
    let width = (last_x + first_x).ceil() as usize + 1;
    let height = (last_y + first_y).ceil() as usize + 1;
    let mut pixels = vec![0.0; width * height];

    let sx = options.spot_wx / options.pixel;
    let sy = options.spot_wy / options.pixel;
    // exp(-2·16) is far below 16-bit quantization.
    let reach_x = (4.0 * sx).ceil() as isize;
    let reach_y = (4.0 * sy).ceil() as isize;
    for (c, r, w) in pattern.lit_cells() {
        let (cx, cy) = cell_center(c, r, options);
        let (ix, iy) = (cx.round() as isize, cy.round() as isize);
        for y in (iy - reach_y).max(0)..=(iy + reach_y).min(height as isize - 1) {
            let dy = (y as f64 - cy) / sy;
            for x in (ix - reach_x).max(0)..=(ix + reach_x).min(width as isize - 1) {
                let dx = (x as f64 - cx) / sx;
                pixels[y as usize * width + x as usize] += w * (-2.0 * (dx * dx + dy * dy)).exp();
            }
        }
    }

    let mut notes = vec![format!(
        "{}x{} cells, spot {:.1}x{:.1} um, pitch {:.1}x{:.1} um, pixel {:.2} um",
        pattern.n_cols(),
        pattern.n_rows(),
        options.spot_wx * 1e6,
        options.spot_wy * 1e6,
        options.pitch_x * 1e6,
        options.pitch_y * 1e6,
        options.pixel * 1e6
    )];
    if options.annotate_edge_rows {
        notes.push(EDGE_ROW_NOTE.to_string());
    }
    Ok(Image {
        width,
        height,
        pixels,
        notes,
    })
}
