//! PNG and binary PPM (P6) files to and from [`RgbImage`].

use std::path::Path;

use image::{ImageFormat, RgbImage as Buffer};

use crate::error::{Error, Result};
use crate::raster::RgbImage;

fn format_for(path: &Path) -> ImageFormat {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .as_deref()
    {
        Some("ppm") | Some("pnm") => ImageFormat::Pnm,
        _ => ImageFormat::Png,
    }
}

pub fn read_image(path: &Path) -> Result<RgbImage> {
    let img = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::Io(io),
        other => Error::Image(other.to_string()),
    })?;
    let rgb = img.to_rgb8();
    RgbImage::from_interleaved(rgb.width() as usize, rgb.height() as usize, rgb.as_raw())
}

/// Writes PNG, or PPM (P6) when the extension is `.ppm`/`.pnm`.
pub fn write_image(img: &RgbImage, path: &Path) -> Result<()> {
    let buf = Buffer::from_raw(img.width as u32, img.height as u32, img.to_interleaved())
        .ok_or_else(|| Error::Image("buffer size mismatch".into()))?;
    match format_for(path) {
        ImageFormat::Pnm => {
            let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
            out.extend_from_slice(buf.as_raw());
            std::fs::write(path, out)?;
            Ok(())
        }
        fmt => buf
            .save_with_format(path, fmt)
            .map_err(|e| Error::Image(e.to_string())),
    }
}
