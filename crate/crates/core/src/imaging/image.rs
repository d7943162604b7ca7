use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Three-channel image with unit-range intensities.
///
/// Each plane is stored column-major (pixel `(i, j)` at `i + j * height`),
/// matching the column-stacking `vec` used by the blur model.
#[derive(Clone, Debug, PartialEq)]
pub struct RgbImage {
    height: usize,
    width: usize,
    planes: [Vec<f64>; 3],
}

impl RgbImage {
    /// Validates plane sizes and that every intensity lies in `[0, 1]`.
    pub fn from_planes(height: usize, width: usize, planes: [Vec<f64>; 3]) -> Result<Self> {
        let n = height * width;
        if n == 0 {
            return Err(Error::Invalid("image must have at least one pixel".into()));
        }
        for (c, plane) in planes.iter().enumerate() {
            if plane.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "plane {c} has {} values, expected {n}",
                    plane.len()
                )));
            }
            if let Some(idx) = plane.iter().position(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::Invalid(format!(
                    "intensity {} at pixel ({}, {}) of plane {c} is outside [0, 1]",
                    plane[idx],
                    idx % height,
                    idx / height
                )));
            }
        }
        Ok(Self { height, width, planes })
    }

    /// Builds an image from `f(channel, row, col)`, clamping to `[0, 1]`.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        let mut planes: [Vec<f64>; 3] = Default::default();
        for (c, plane) in planes.iter_mut().enumerate() {
            plane.reserve(height * width);
            for j in 0..width {
                for i in 0..height {
                    plane.push(f(c, i, j).clamp(0.0, 1.0));
                }
            }
        }
        Self::from_planes(height, width, planes)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Column-major plane `c` (0 = red, 1 = green, 2 = blue).
    pub fn plane(&self, c: usize) -> &[f64] {
        &self.planes[c]
    }

    pub fn get(&self, c: usize, i: usize, j: usize) -> f64 {
        self.planes[c][i + j * self.height]
    }

    /// Writes a binary 8-bit PPM (P6).
    pub fn write_ppm(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_ppm_bytes())?;
        Ok(())
    }

    pub fn to_ppm_bytes(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.reserve(3 * self.height * self.width);
        for i in 0..self.height {
            for j in 0..self.width {
                for c in 0..3 {
                    out.push(to_byte(self.get(c, i, j)));
                }
            }
        }
        out
    }

    pub fn read_ppm(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_ppm_bytes(&fs::read(path)?)
    }

    pub fn from_ppm_bytes(bytes: &[u8]) -> Result<Self> {
        let (w, h, data) = parse_netpbm(bytes, b"P6", 3)?;
        let mut planes: [Vec<f64>; 3] = [vec![0.0; w * h], vec![0.0; w * h], vec![0.0; w * h]];
        for i in 0..h {
            for j in 0..w {
                for (c, plane) in planes.iter_mut().enumerate() {
                    plane[i + j * h] = f64::from(data[3 * (i * w + j) + c]) / 255.0;
                }
            }
        }
        Self::from_planes(h, w, planes)
    }

    /// Writes channel `c` as a binary 8-bit PGM (P5).
    pub fn write_pgm(&self, path: impl AsRef<Path>, c: usize) -> Result<()> {
        if c > 2 {
            return Err(Error::Invalid(format!("channel {c} does not exist")));
        }
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        for i in 0..self.height {
            for j in 0..self.width {
                out.push(to_byte(self.get(c, i, j)));
            }
        }
        fs::write(path, out)?;
        Ok(())
    }

    /// Reads a P5 file into an image whose three channels are equal.
    pub fn read_pgm(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = fs::read(path)?;
        let (w, h, data) = parse_netpbm(&bytes, b"P5", 1)?;
        let mut plane = vec![0.0; w * h];
        for i in 0..h {
            for j in 0..w {
                plane[i + j * h] = f64::from(data[i * w + j]) / 255.0;
            }
        }
        Self::from_planes(h, w, [plane.clone(), plane.clone(), plane])
    }
}

/// Unit-range value to an 8-bit level, rounding half away from zero.
pub fn to_byte(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn parse_netpbm<'a>(bytes: &'a [u8], magic: &[u8], channels: usize) -> Result<(usize, usize, &'a [u8])> {
    let bad = |msg: &str| Error::Parse {
        line: 1,
        msg: msg.to_string(),
    };
    if bytes.len() < 2 || &bytes[..2] != magic {
        return Err(bad(&format!("expected magic {}", String::from_utf8_lossy(magic))));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err(bad("truncated header")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("invalid header number"))?;
    }
    let [w, h, maxval] = fields;
    if maxval != 255 {
        return Err(bad("only 8-bit files with maxval 255 are supported"));
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(bad("missing whitespace after maxval"));
    }
    pos += 1;
    let need = w * h * channels;
    let data = &bytes[pos..];
    if data.len() < need {
        return Err(bad(&format!("expected {need} bytes of pixel data, found {}", data.len())));
    }
    Ok((w, h, &data[..need]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_is_half_away_from_zero() {
        assert_eq!(to_byte(0.5 / 255.0), 1);
        assert_eq!(to_byte(1.5 / 255.0), 2);
        assert_eq!(to_byte(-0.2), 0);
        assert_eq!(to_byte(1.7), 255);
    }

    #[test]
    fn ppm_round_trip_is_byte_exact() {
        let img = RgbImage::from_fn(3, 5, |c, i, j| ((c * 31 + i * 17 + j * 7) % 256) as f64 / 255.0).unwrap();
        let bytes = img.to_ppm_bytes();
        let back = RgbImage::from_ppm_bytes(&bytes).unwrap();
        assert_eq!(back.to_ppm_bytes(), bytes);
        assert_eq!(back, img);
    }

    #[test]
    fn header_comments_are_skipped() {
        let mut bytes = b"P6\n# made by hand\n1 1\n255\n".to_vec();
        bytes.extend_from_slice(&[255, 0, 51]);
        let img = RgbImage::from_ppm_bytes(&bytes).unwrap();
        assert_eq!(img.get(0, 0, 0), 1.0);
        assert_eq!(img.get(2, 0, 0), 0.2);
        assert!(RgbImage::from_ppm_bytes(b"P3\n1 1\n255\n").is_err());
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(RgbImage::from_planes(1, 1, [vec![1.2], vec![0.0], vec![0.0]]).is_err());
    }
}
