//! Minimal binary PGM/PPM codecs.
//!
//! Depth maps are 16-bit P5 files (maxval 65535, big-endian sample order),
//! label masks are 8-bit P5 files (maxval 255, byte 255 = ignore), and
//! color images are 8-bit P6 files.

use std::fs;
use std::path::Path;

use crate::class_table::ClassTable;
use crate::error::{Error, Result};
use crate::raster::{ColorImage, DepthMap, LabelMask};

struct PnmHeader {
    magic: [u8; 2],
    width: u32,
    height: u32,
    maxval: u32,
    data_offset: usize,
}

/// Parses a PNM header: magic, then width/height/maxval tokens separated by
/// whitespace, with `#` comments allowed, then a single whitespace byte.
fn parse_header(bytes: &[u8], path: &Path) -> Result<PnmHeader> {
    let bad = |detail: &str| Error::format("pnm file", Some(path.to_path_buf()), detail.to_string());
    if bytes.len() < 2 {
        return Err(bad("file shorter than magic"));
    }
    let magic = [bytes[0], bytes[1]];
    if magic != *b"P5" && magic != *b"P6" {
        return Err(bad("magic must be P5 or P6"));
    }
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in fields.iter_mut() {
        // skip whitespace and comments
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).expect("digits are utf-8");
        *field = text
            .parse::<u32>()
            .map_err(|_| bad("header field does not fit in u32"))?;
    }
    // exactly one whitespace byte before the raster
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(bad("missing whitespace before raster data"));
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(bad("zero image dimension"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(bad("maxval must be in 1..=65535"));
    }
    Ok(PnmHeader { magic, width, height, maxval, data_offset: pos })
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Reads a 16-bit depth PGM (millimeters). 8-bit files are accepted and
/// widened.
pub fn read_depth_pgm(path: impl AsRef<Path>) -> Result<DepthMap> {
    let path = path.as_ref();
    let bytes = read_file(path)?;
    let h = parse_header(&bytes, path)?;
    if h.magic != *b"P5" {
        return Err(Error::format("pnm file", Some(path.into()), "depth map must be P5"));
    }
    let n = (h.width as usize) * (h.height as usize);
    let raster = &bytes[h.data_offset..];
    let values = if h.maxval > 255 {
        if raster.len() < n * 2 {
            return Err(Error::format("pnm file", Some(path.into()), "truncated raster"));
        }
        raster[..n * 2]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    } else {
        if raster.len() < n {
            return Err(Error::format("pnm file", Some(path.into()), "truncated raster"));
        }
        raster[..n].iter().map(|&b| b as u16).collect()
    };
    DepthMap::new(h.width, h.height, values)
}

pub fn write_depth_pgm(path: impl AsRef<Path>, depth: &DepthMap) -> Result<()> {
    let path = path.as_ref();
    let mut out = format!("P5\n{} {}\n65535\n", depth.width(), depth.height()).into_bytes();
    out.reserve(depth.values().len() * 2);
    for &v in depth.values() {
        out.extend_from_slice(&v.to_be_bytes());
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads an 8-bit label PGM; byte 255 maps to the table's ignore id.
pub fn read_mask_pgm(path: impl AsRef<Path>, ct: &ClassTable) -> Result<LabelMask> {
    let path = path.as_ref();
    let bytes = read_file(path)?;
    let h = parse_header(&bytes, path)?;
    if h.magic != *b"P5" {
        return Err(Error::format("pnm file", Some(path.into()), "label mask must be P5"));
    }
    if h.maxval != 255 {
        return Err(Error::format("pnm file", Some(path.into()), "label mask must be 8-bit (maxval 255)"));
    }
    let n = (h.width as usize) * (h.height as usize);
    let raster = &bytes[h.data_offset..];
    if raster.len() < n {
        return Err(Error::format("pnm file", Some(path.into()), "truncated raster"));
    }
    let mut values = Vec::with_capacity(n);
    for &b in &raster[..n] {
        values.push(ct.label_from_byte(b)?);
    }
    LabelMask::new(h.width, h.height, values, ct)
}

pub fn write_mask_pgm(path: impl AsRef<Path>, mask: &LabelMask, ct: &ClassTable) -> Result<()> {
    let path = path.as_ref();
    let mut out = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    out.reserve(mask.values().len());
    for &v in mask.values() {
        out.push(ct.label_to_byte(v)?);
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads an 8-bit PGM as a binary mask: any nonzero byte is a member.
pub fn read_binary_mask_pgm(path: impl AsRef<Path>) -> Result<crate::mask::BinaryMask> {
    let path = path.as_ref();
    let bytes = read_file(path)?;
    let h = parse_header(&bytes, path)?;
    if h.magic != *b"P5" || h.maxval > 255 {
        return Err(Error::format("pnm file", Some(path.into()), "binary mask must be an 8-bit P5"));
    }
    let n = (h.width as usize) * (h.height as usize);
    let raster = &bytes[h.data_offset..];
    if raster.len() < n {
        return Err(Error::format("pnm file", Some(path.into()), "truncated raster"));
    }
    let mut mask = crate::mask::BinaryMask::empty(h.width, h.height);
    for (i, &b) in raster[..n].iter().enumerate() {
        if b != 0 {
            mask.insert(i as u32 % h.width, i as u32 / h.width);
        }
    }
    Ok(mask)
}

/// Writes a binary mask as an 8-bit PGM: members 255, the rest 0.
pub fn write_binary_mask_pgm(path: impl AsRef<Path>, mask: &crate::mask::BinaryMask) -> Result<()> {
    let path = path.as_ref();
    let mut out = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    for v in 0..mask.height() {
        for u in 0..mask.width() {
            out.push(if mask.contains(u, v) { 255 } else { 0 });
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads an 8-bit RGB PPM.
pub fn read_ppm(path: impl AsRef<Path>) -> Result<ColorImage> {
    let path = path.as_ref();
    let bytes = read_file(path)?;
    let h = parse_header(&bytes, path)?;
    if h.magic != *b"P6" {
        return Err(Error::format("pnm file", Some(path.into()), "color image must be P6"));
    }
    if h.maxval != 255 {
        return Err(Error::format("pnm file", Some(path.into()), "color image must be 8-bit (maxval 255)"));
    }
    let n = (h.width as usize) * (h.height as usize) * 3;
    let raster = &bytes[h.data_offset..];
    if raster.len() < n {
        return Err(Error::format("pnm file", Some(path.into()), "truncated raster"));
    }
    ColorImage::new(h.width, h.height, raster[..n].to_vec())
}

pub fn write_ppm(path: impl AsRef<Path>, image: &ColorImage) -> Result<()> {
    let path = path.as_ref();
    let mut out = format!("P6\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.data());
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
