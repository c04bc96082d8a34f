//! PNG and PGM/PPM decoding and encoding (8-bit only).

use std::io::Cursor;
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageFormat, ImageReader};

use super::plane::{ColorImage, ImagePlane};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub fn load_image<T: Real>(path: impl AsRef<Path>) -> Result<ColorImage<T>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes, path)
}

/// Decode an in-memory PNG or PNM file; `path` is used for messages and as
/// a format hint.
pub fn decode_image<T: Real>(bytes: &[u8], path: &Path) -> Result<ColorImage<T>> {
    let mut reader = ImageReader::new(Cursor::new(bytes));
    match ImageFormat::from_path(path) {
        Ok(fmt) => reader.set_format(fmt),
        Err(_) => {
            reader = reader
                .with_guessed_format()
                .map_err(|e| Error::io(path, e))?;
        }
    }
    if !matches!(reader.format(), Some(ImageFormat::Png | ImageFormat::Pnm)) {
        return Err(Error::Decode {
            path: path.into(),
            reason: "not a PNG or PNM file".into(),
        });
    }
    let img = reader.decode().map_err(|e| Error::Decode {
        path: path.into(),
        reason: e.to_string(),
    })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(buf) => Ok(ColorImage::from_gray(ImagePlane::from_u8(
            w,
            h,
            buf.as_raw(),
        )?)),
        DynamicImage::ImageRgb8(buf) => ColorImage::from_rgb8(w, h, buf.as_raw()),
        other => Err(Error::UnsupportedBitDepth {
            path: path.into(),
            format: format!("{:?}", other.color()),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Container {
    Png,
    Pgm,
    Ppm,
}

fn container_for(path: &Path) -> Result<Container> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("png") => Ok(Container::Png),
        Some("pgm") => Ok(Container::Pgm),
        Some("ppm" | "pnm") => Ok(Container::Ppm),
        _ => Err(Error::Encode {
            path: path.into(),
            reason: "output extension must be .png, .pgm or .ppm".into(),
        }),
    }
}

fn encode_raw(
    path: &Path,
    container: Container,
    w: usize,
    h: usize,
    data: &[u8],
    color: ExtendedColorType,
) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let res = match container {
        Container::Png => image::codecs::png::PngEncoder::new(&mut out)
            .write_image(data, w as u32, h as u32, color),
        Container::Pgm | Container::Ppm => {
            let sub = if color == ExtendedColorType::L8 {
                PnmSubtype::Graymap(SampleEncoding::Binary)
            } else {
                PnmSubtype::Pixmap(SampleEncoding::Binary)
            };
            PnmEncoder::new(&mut out)
                .with_subtype(sub)
                .write_image(data, w as u32, h as u32, color)
        }
    };
    res.map_err(|e| Error::Encode {
        path: path.into(),
        reason: e.to_string(),
    })?;
    Ok(out)
}

/// Encode a plane as an 8-bit grayscale file (format chosen by extension).
pub fn encode_plane<T: Real>(plane: &ImagePlane<T>, path: &Path) -> Result<Vec<u8>> {
    let container = match container_for(path)? {
        Container::Ppm => Container::Pgm,
        c => c,
    };
    encode_raw(
        path,
        container,
        plane.width(),
        plane.height(),
        &plane.to_u8(),
        ExtendedColorType::L8,
    )
}

/// Encode an image by extension. Achromatic images and `.pgm` targets are
/// written as grayscale (luma only); everything else as RGB.
pub fn encode_image<T: Real>(img: &ColorImage<T>, path: &Path) -> Result<Vec<u8>> {
    let container = container_for(path)?;
    let (w, h) = img.dims();
    if container == Container::Pgm || (container == Container::Png && img.is_gray()) {
        let c = if container == Container::Pgm {
            Container::Pgm
        } else {
            Container::Png
        };
        return encode_raw(path, c, w, h, &img.y.to_u8(), ExtendedColorType::L8);
    }
    encode_raw(
        path,
        container,
        w,
        h,
        &img.to_rgb8(),
        ExtendedColorType::Rgb8,
    )
}

pub fn save_image<T: Real>(img: &ColorImage<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_image(img, path)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn save_plane<T: Real>(plane: &ImagePlane<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_plane(plane, path)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pgm(w: usize, h: usize, maxval: u32, body: &[u8]) -> Vec<u8> {
        let mut v = format!("P5\n{w} {h}\n{maxval}\n").into_bytes();
        v.extend_from_slice(body);
        v
    }

    #[test]
    fn pgm_scaled_to_unit_interval() {
        let bytes = pgm(2, 2, 255, &[0, 255, 128, 64]);
        let img: ColorImage<f64> = decode_image(&bytes, Path::new("a.pgm")).unwrap();
        assert_eq!(img.y.as_slice(), &[0.0, 1.0, 128.0 / 255.0, 64.0 / 255.0]);
        assert!(img.cb.as_slice().iter().all(|&v| v == 0.5));
        assert!(img.cr.as_slice().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn truncated_file_is_decode_error() {
        let bytes = pgm(4, 4, 255, &[1, 2, 3]);
        let err = decode_image::<f64>(&bytes, Path::new("t.pgm")).unwrap_err();
        assert!(matches!(err, Error::Decode { .. }), "{err:?}");
    }

    #[test]
    fn sixteen_bit_rejected_distinctly() {
        let bytes = pgm(1, 1, 65535, &[0x12, 0x34]);
        let err = decode_image::<f64>(&bytes, Path::new("d.pgm")).unwrap_err();
        assert!(matches!(err, Error::UnsupportedBitDepth { .. }), "{err:?}");
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_image::<f64>("/nonexistent/nowhere.png").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn png_gray_round_trip() {
        let plane = ImagePlane::<f64>::from_fn(5, 3, |x, y| (x * 40 + y * 7) as f64 / 255.0);
        let img = ColorImage::from_gray(plane);
        let path = Path::new("x.png");
        let bytes = encode_image(&img, path).unwrap();
        let back: ColorImage<f64> = decode_image(&bytes, path).unwrap();
        for (a, b) in img.y.as_slice().iter().zip(back.y.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rgb_ppm_round_trip_stable() {
        let rgb: Vec<u8> = (0..4 * 4 * 3).map(|i| (i * 17 % 256) as u8).collect();
        let img = ColorImage::<f64>::from_rgb8(4, 4, &rgb).unwrap();
        let path = Path::new("c.ppm");
        let back: ColorImage<f64> = decode_image(&encode_image(&img, path).unwrap(), path).unwrap();
        assert_eq!(back.to_rgb8(), rgb);
    }
}
