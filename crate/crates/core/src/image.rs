//! Grayscale images: PGM (P2/P5) codec and square pixel grids.

use std::fs;
use std::path::Path;

use ndarray::Array1;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmFormat {
    /// P2
    Ascii,
    /// P5
    Binary,
}

/// Decoded PGM with intensities scaled to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    /// Row-major.
    pub pixels: Vec<f64>,
}

fn pgm_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Pgm {
        offset,
        message: message.into(),
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(pgm_err(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| pgm_err(start, format!("{what} out of range")))
    }
}

pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let format = match bytes.get(..2) {
        Some(b"P2") => PgmFormat::Ascii,
        Some(b"P5") => PgmFormat::Binary,
        _ => return Err(pgm_err(0, "expected magic P2 or P5")),
    };
    let mut c = Cursor { bytes, pos: 2 };
    let width = c.number("width")? as usize;
    let height = c.number("height")? as usize;
    c.skip_space_and_comments();
    let maxval_at = c.pos;
    let maxval = c.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(pgm_err(maxval_at, "zero image dimension"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(pgm_err(
            maxval_at,
            format!("maxval {maxval} outside 1..=65535"),
        ));
    }
    let count = width * height;
    let scale = maxval as f64;
    let mut pixels = Vec::with_capacity(count);
    match format {
        PgmFormat::Ascii => {
            for _ in 0..count {
                c.skip_space_and_comments();
                let at = c.pos;
                let v = c.number("pixel value")?;
                if v > maxval {
                    return Err(pgm_err(at, format!("pixel {v} exceeds maxval {maxval}")));
                }
                pixels.push(v as f64 / scale);
            }
        }
        PgmFormat::Binary => {
            match bytes.get(c.pos) {
                Some(b) if b.is_ascii_whitespace() => c.pos += 1,
                _ => return Err(pgm_err(c.pos, "expected single whitespace before raster")),
            }
            let wide = maxval > 255;
            let need = count * if wide { 2 } else { 1 };
            let raster = bytes.get(c.pos..c.pos + need).ok_or_else(|| {
                pgm_err(bytes.len(), format!("raster truncated, need {need} bytes"))
            })?;
            for k in 0..count {
                let v = if wide {
                    u16::from_be_bytes([raster[2 * k], raster[2 * k + 1]]) as u32
                } else {
                    raster[k] as u32
                };
                if v > maxval {
                    let at = c.pos + if wide { 2 * k } else { k };
                    return Err(pgm_err(at, format!("pixel {v} exceeds maxval {maxval}")));
                }
                pixels.push(v as f64 / scale);
            }
        }
    }
    Ok(GrayImage {
        width,
        height,
        maxval: maxval as u16,
        pixels,
    })
}

pub fn read_pgm(path: &Path) -> Result<GrayImage> {
    parse_pgm(&fs::read(path)?)
}

/// Encodes with values clamped to `[0, 1]` and rounded to `maxval` levels.
pub fn encode_pgm(img: &GrayImage, format: PgmFormat) -> Vec<u8> {
    let m = img.maxval.max(1);
    let level = |v: f64| (v.clamp(0.0, 1.0) * m as f64).round() as u16;
    let magic = match format {
        PgmFormat::Ascii => "P2",
        PgmFormat::Binary => "P5",
    };
    let mut out = format!("{magic}\n{} {}\n{m}\n", img.width, img.height).into_bytes();
    match format {
        PgmFormat::Ascii => {
            for row in img.pixels.chunks(img.width) {
                let line: Vec<String> = row.iter().map(|&v| level(v).to_string()).collect();
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
        }
        PgmFormat::Binary => {
            for &v in &img.pixels {
                let l = level(v);
                if m > 255 {
                    out.extend_from_slice(&l.to_be_bytes());
                } else {
                    out.push(l as u8);
                }
            }
        }
    }
    out
}

pub fn write_pgm(path: &Path, img: &GrayImage, format: PgmFormat) -> Result<()> {
    fs::write(path, encode_pgm(img, format))?;
    Ok(())
}

/// Square image of side `n`, pixel `(i, j)` at index `i * n + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    pub n: usize,
    pub pixels: Array1<f64>,
}

impl ImageGrid {
    pub fn new(n: usize, pixels: Array1<f64>) -> Result<Self> {
        if n == 0 || pixels.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "image of side {n} needs {} pixels, got {}",
                n * n,
                pixels.len()
            )));
        }
        if pixels.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("image has non-finite pixels".into()));
        }
        Ok(ImageGrid { n, pixels })
    }

    pub fn to_gray(&self, maxval: u16) -> GrayImage {
        GrayImage {
            width: self.n,
            height: self.n,
            maxval,
            pixels: self.pixels.to_vec(),
        }
    }
}

impl TryFrom<&GrayImage> for ImageGrid {
    type Error = Error;
    fn try_from(img: &GrayImage) -> Result<Self> {
        if img.width != img.height {
            return Err(Error::InvalidArgument(format!(
                "image must be square, got {}x{}",
                img.width, img.height
            )));
        }
        ImageGrid::new(img.width, Array1::from(img.pixels.clone()))
    }
}

/// Piecewise-constant test image: a background, a bright square, a
/// mid-gray disk and a thin dark bar.
pub fn phantom(n: usize) -> Result<ImageGrid> {
    let nf = n as f64;
    let pixels = Array1::from_shape_fn(n * n, |k| {
        let (i, j) = ((k / n) as f64 + 0.5, (k % n) as f64 + 0.5);
        let (u, v) = (i / nf, j / nf);
        if (u - 0.62).hypot(v - 0.64) < 0.22 {
            0.55
        } else if (0.12..0.45).contains(&u) && (0.15..0.48).contains(&v) {
            0.9
        } else if (0.78..0.86).contains(&u) && (0.1..0.4).contains(&v) {
            0.0
        } else {
            0.25
        }
    });
    ImageGrid::new(n, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_with_comments() {
        let img = parse_pgm(b"P2\n# hi\n2 1\n# there\n10\n0 10\n").unwrap();
        assert_eq!((img.width, img.height, img.maxval), (2, 1, 10));
        assert_eq!(img.pixels, vec![0.0, 1.0]);
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let g = phantom(16).unwrap().to_gray(255);
        let bytes = encode_pgm(&g, PgmFormat::Binary);
        let back = parse_pgm(&bytes).unwrap();
        assert_eq!(encode_pgm(&back, PgmFormat::Binary), bytes);
        let g16 = GrayImage { maxval: 1000, ..g };
        let bytes = encode_pgm(&g16, PgmFormat::Binary);
        assert_eq!(
            encode_pgm(&parse_pgm(&bytes).unwrap(), PgmFormat::Binary),
            bytes
        );
    }

    #[test]
    fn errors_carry_offsets() {
        match parse_pgm(b"P7\n") {
            Err(Error::Pgm { offset: 0, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_pgm(b"P2\n2 2\n255\n0 1 x") {
            Err(Error::Pgm { offset, .. }) => assert_eq!(offset, 15),
            other => panic!("{other:?}"),
        }
        match parse_pgm(b"P5\n2 2\n255\n\x00\x01") {
            Err(Error::Pgm { offset, .. }) => assert_eq!(offset, 13),
            other => panic!("{other:?}"),
        }
        let r = parse_pgm(b"P2 1 1 3 4");
        assert!(matches!(r, Err(Error::Pgm { offset: 9, .. })), "{r:?}");
    }

    #[test]
    fn non_square_rejected() {
        let img = parse_pgm(b"P2 2 1 1 0 1").unwrap();
        assert!(ImageGrid::try_from(&img).is_err());
    }

    #[test]
    fn phantom_is_piecewise_constant() {
        let p = phantom(64).unwrap();
        let mut levels: Vec<f64> = p.pixels.to_vec();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        assert_eq!(levels, vec![0.0, 0.25, 0.55, 0.9]);
    }
}
