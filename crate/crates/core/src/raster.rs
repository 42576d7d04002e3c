use crate::class_table::ClassTable;
use crate::error::{Error, Result};

/// Row-major 16-bit depth image. Values are millimeters; 0 marks an
/// invalid measurement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthMap {
    width: u32,
    height: u32,
    values: Vec<u16>,
}

impl DepthMap {
    pub fn new(width: u32, height: u32, values: Vec<u16>) -> Result<Self> {
        check_len("depth map", width, height, values.len())?;
        Ok(Self { width, height, values })
    }

    pub fn zeros(width: u32, height: u32) -> Self {
        Self { width, height, values: vec![0; (width * height) as usize] }
    }

    pub fn width(&self) -> u32 {
        self.width
    }
    pub fn height(&self) -> u32 {
        self.height
    }
    pub fn values(&self) -> &[u16] {
        &self.values
    }

    #[inline]
    pub fn get(&self, u: u32, v: u32) -> u16 {
        self.values[(v * self.width + u) as usize]
    }

    #[inline]
    pub fn set(&mut self, u: u32, v: u32, mm: u16) {
        self.values[(v * self.width + u) as usize] = mm;
    }

    pub fn valid_count(&self) -> usize {
        self.values.iter().filter(|&&d| d > 0).count()
    }
}

/// Row-major per-pixel class ids; unlabeled pixels carry the table's
/// ignore id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMask {
    width: u32,
    height: u32,
    values: Vec<u32>,
}

impl LabelMask {
    pub fn new(width: u32, height: u32, values: Vec<u32>, ct: &ClassTable) -> Result<Self> {
        check_len("label mask", width, height, values.len())?;
        for &v in &values {
            ct.check_label(v)?;
        }
        Ok(Self { width, height, values })
    }

    /// An all-ignore mask.
    pub fn ignore(width: u32, height: u32, ct: &ClassTable) -> Self {
        Self {
            width,
            height,
            values: vec![ct.ignore_id(); (width * height) as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }
    pub fn height(&self) -> u32 {
        self.height
    }
    pub fn values(&self) -> &[u32] {
        &self.values
    }

    #[inline]
    pub fn get(&self, u: u32, v: u32) -> u32 {
        self.values[(v * self.width + u) as usize]
    }

    #[inline]
    pub fn set(&mut self, u: u32, v: u32, label: u32) {
        self.values[(v * self.width + u) as usize] = label;
    }

    /// Ascending class ids present, not counting `ignore_id`.
    pub fn present_classes(&self, ct: &ClassTable) -> Vec<u32> {
        let mut seen = vec![false; ct.len()];
        for &v in &self.values {
            if v != ct.ignore_id() {
                seen[v as usize] = true;
            }
        }
        (0..ct.len() as u32).filter(|&c| seen[c as usize]).collect()
    }
}

/// Row-major 8-bit RGB image (interleaved triplets).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl ColorImage {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        let expected = (width as usize) * (height as usize) * 3;
        if data.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "color image {width}x{height} needs {expected} bytes, got {}",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        let mut data = Vec::with_capacity((width * height) as usize * 3);
        for _ in 0..width * height {
            data.extend_from_slice(&rgb);
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> u32 {
        self.width
    }
    pub fn height(&self) -> u32 {
        self.height
    }
    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, u: u32, v: u32) -> [u8; 3] {
        let i = ((v * self.width + u) * 3) as usize;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set(&mut self, u: u32, v: u32, rgb: [u8; 3]) {
        let i = ((v * self.width + u) * 3) as usize;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }
}

fn check_len(what: &str, width: u32, height: u32, len: usize) -> Result<()> {
    let expected = (width as usize) * (height as usize);
    if len != expected {
        return Err(Error::DimensionMismatch(format!(
            "{what} {width}x{height} needs {expected} values, got {len}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_checks() {
        assert!(DepthMap::new(2, 2, vec![0; 4]).is_ok());
        assert!(DepthMap::new(2, 2, vec![0; 3]).is_err());
        let ct = ClassTable::scannet20();
        assert!(LabelMask::new(2, 2, vec![0, 1, 20, 19], &ct).is_ok());
        assert!(LabelMask::new(2, 2, vec![0, 1, 21, 19], &ct).is_err());
        assert!(ColorImage::new(2, 1, vec![0; 6]).is_ok());
        assert!(ColorImage::new(2, 1, vec![0; 5]).is_err());
    }

    #[test]
    fn present_classes_sorted() {
        let ct = ClassTable::scannet20();
        let mask = LabelMask::new(2, 2, vec![7, 20, 1, 7], &ct).unwrap();
        assert_eq!(mask.present_classes(&ct), vec![1, 7]);
    }
}
