//! Raster and text renderings of trials.

pub mod ascii;
pub mod raster;

pub use ascii::{parse_director_ascii, render_director_ascii, AsciiError, AsciiGrid};
pub use raster::{render_director_image, render_rft_image, Canvas, RasterImage, RenderError, INK};
