//! Binary PPM (P6, 8-bit RGB) images as `H × W × 3` tensors.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use image::codecs::pnm::{PnmDecoder, PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ColorType, ExtendedColorType, ImageDecoder, ImageEncoder};

use crate::error::{GtdError, Result};
use crate::tensor::DenseTensor;

fn format_err(e: impl std::fmt::Display) -> GtdError {
    GtdError::Format(e.to_string())
}

/// Reads a binary pixmap into an `H × W × 3` tensor with values in `[0, 255]`.
/// Graymaps, bitmaps and ASCII pixmaps are rejected.
pub fn load_image_ppm(path: impl AsRef<Path>) -> Result<DenseTensor> {
    let reader = BufReader::new(File::open(path)?);
    let decoder = PnmDecoder::new(reader).map_err(format_err)?;
    if decoder.subtype() != PnmSubtype::Pixmap(SampleEncoding::Binary) {
        return Err(GtdError::Format(format!(
            "expected a binary pixmap (P6), found {:?}",
            decoder.subtype()
        )));
    }
    if decoder.color_type() != ColorType::Rgb8 {
        return Err(GtdError::Format(format!(
            "expected 8-bit RGB samples, found {:?}",
            decoder.color_type()
        )));
    }
    let (w, h) = decoder.dimensions();
    let (w, h) = (w as usize, h as usize);
    let mut buf = vec![0u8; decoder.total_bytes() as usize];
    decoder.read_image(&mut buf).map_err(format_err)?;
    let mut data = vec![0.0; h * w * 3];
    for y in 0..h {
        for x in 0..w {
            for c in 0..3 {
                data[y + h * (x + w * c)] = f64::from(buf[3 * (y * w + x) + c]);
            }
        }
    }
    DenseTensor::new(vec![h, w, 3], data)
}

/// Writes an `H × W × 3` tensor as a binary pixmap, clamping to `[0, 255]`
/// and rounding.
pub fn write_image_ppm(t: &DenseTensor, path: impl AsRef<Path>) -> Result<()> {
    let (h, w) = match *t.shape() {
        [h, w, 3] => (h, w),
        _ => {
            return Err(GtdError::shape(format!(
                "PPM output needs an H x W x 3 tensor, got {:?}",
                t.shape()
            )))
        }
    };
    let d = t.data();
    let mut buf = vec![0u8; h * w * 3];
    for y in 0..h {
        for x in 0..w {
            for c in 0..3 {
                buf[3 * (y * w + x) + c] = d[y + h * (x + w * c)].clamp(0.0, 255.0).round() as u8;
            }
        }
    }
    let out = BufWriter::new(File::create(path)?);
    PnmEncoder::new(out)
        .with_subtype(PnmSubtype::Pixmap(SampleEncoding::Binary))
        .write_image(&buf, w as u32, h as u32, ExtendedColorType::Rgb8)
        .map_err(format_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_pixel() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("white.ppm");
        std::fs::write(&p, b"P6\n1 1\n255\n\xff\xff\xff").unwrap();
        let t = load_image_ppm(&p).unwrap();
        assert_eq!(t.shape(), &[1, 1, 3]);
        assert_eq!(t.data(), &[255.0, 255.0, 255.0]);
    }

    #[test]
    fn graymap_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("gray.pgm");
        std::fs::write(&p, b"P5\n1 1\n255\n\x80").unwrap();
        assert!(matches!(load_image_ppm(&p), Err(GtdError::Format(_))));
    }

    #[test]
    fn malformed_and_truncated() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.ppm");
        std::fs::write(&p, b"P6\nx y\n255\n").unwrap();
        assert!(load_image_ppm(&p).is_err());
        std::fs::write(&p, b"P6\n2 2\n255\n\x00\x01\x02").unwrap();
        assert!(load_image_ppm(&p).is_err());
    }

    #[test]
    fn write_clamps_and_rounds() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.ppm");
        let t = DenseTensor::new(vec![1, 2, 3], vec![-5.0, 300.0, 12.4, 12.6, 0.0, 255.0]).unwrap();
        write_image_ppm(&t, &p).unwrap();
        let back = load_image_ppm(&p).unwrap();
        assert_eq!(back.data(), &[0.0, 255.0, 12.0, 13.0, 0.0, 255.0]);
        assert!(write_image_ppm(&DenseTensor::zeros(vec![2, 2]).unwrap(), &p).is_err());
    }
}
