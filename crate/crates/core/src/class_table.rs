use std::path::Path;

use crate::error::{Error, Result};

/// Reserved byte for unlabeled pixels in 8-bit mask files.
pub const IGNORE_BYTE: u8 = 255;

/// Ordered class taxonomy. Class ids are `0..len()`; the reserved ignore id
/// is `len()` (one past the last class), encoded as 255 in 8-bit files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassTable {
    names: Vec<String>,
}

impl ClassTable {
    pub fn new(names: Vec<String>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::InvalidData("class table must not be empty".into()));
        }
        // ids must be representable as non-ignore bytes in mask files
        if names.len() >= IGNORE_BYTE as usize {
            return Err(Error::InvalidData(format!(
                "class table holds {} names; at most {} are supported",
                names.len(),
                IGNORE_BYTE - 1
            )));
        }
        for (i, a) in names.iter().enumerate() {
            if a.is_empty() {
                return Err(Error::InvalidData(format!("class {i} has an empty name")));
            }
            if names[..i].contains(a) {
                return Err(Error::InvalidData(format!("duplicate class name '{a}'")));
            }
        }
        Ok(Self { names })
    }

    /// The 20 ScanNet benchmark categories, in benchmark order.
    pub fn scannet20() -> Self {
        let names = [
            "wall",
            "floor",
            "cabinet",
            "bed",
            "chair",
            "sofa",
            "table",
            "door",
            "window",
            "bookshelf",
            "picture",
            "counter",
            "desk",
            "curtain",
            "refrigerator",
            "shower curtain",
            "toilet",
            "sink",
            "bathtub",
            "otherfurniture",
        ];
        Self::new(names.iter().map(|s| s.to_string()).collect()).expect("static table is valid")
    }

    /// Loads a table from a text file with one class name per line.
    /// Blank lines and `#` comments are skipped.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let names: Vec<String> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect();
        Self::new(names)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Reserved id for "no label": one past the last class.
    pub fn ignore_id(&self) -> u32 {
        self.names.len() as u32
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, id: u32) -> Option<&str> {
        self.names.get(id as usize).map(String::as_str)
    }

    pub fn index_of(&self, name: &str) -> Option<u32> {
        self.names.iter().position(|n| n == name).map(|i| i as u32)
    }

    /// True for class ids and for the ignore id.
    pub fn is_valid_label(&self, value: u32) -> bool {
        value <= self.ignore_id()
    }

    /// Checks a label and reports the offending value otherwise.
    pub fn check_label(&self, value: u32) -> Result<u32> {
        if self.is_valid_label(value) {
            Ok(value)
        } else {
            Err(Error::LabelOutOfRange {
                value,
                limit: self.len() as u32,
                ignore: self.ignore_id(),
            })
        }
    }

    /// Checks a strict class id (the ignore id is not accepted).
    pub fn check_class(&self, value: u32) -> Result<u32> {
        if value < self.len() as u32 {
            Ok(value)
        } else {
            Err(Error::LabelOutOfRange {
                value,
                limit: self.len() as u32,
                ignore: self.ignore_id(),
            })
        }
    }

    /// Maps a byte from an 8-bit mask or PLY label property to an internal
    /// id. Only 255 spells "ignore" in files; any other byte must be a
    /// class id.
    pub fn label_from_byte(&self, byte: u8) -> Result<u32> {
        if byte == IGNORE_BYTE {
            Ok(self.ignore_id())
        } else {
            self.check_class(byte as u32)
        }
    }

    /// Maps an internal id to its 8-bit file encoding.
    pub fn label_to_byte(&self, label: u32) -> Result<u8> {
        if label == self.ignore_id() {
            Ok(IGNORE_BYTE)
        } else {
            self.check_label(label).map(|v| v as u8)
        }
    }
}
