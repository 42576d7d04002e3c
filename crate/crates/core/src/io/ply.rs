//! PLY point-cloud I/O.
//!
//! Supports ASCII and binary little-endian vertex clouds with float `x y z`,
//! optional uchar `red green blue`, and an optional integer `label` property
//! (255 = ignore, matching the 8-bit mask convention). Unknown scalar
//! properties are skipped; anything that cannot be sized is an error.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::class_table::{ClassTable, IGNORE_BYTE};
use crate::cloud::ScenePointCloud;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScalarType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl ScalarType {
    fn parse(token: &str) -> Option<Self> {
        Some(match token {
            "char" | "int8" => ScalarType::I8,
            "uchar" | "uint8" => ScalarType::U8,
            "short" | "int16" => ScalarType::I16,
            "ushort" | "uint16" => ScalarType::U16,
            "int" | "int32" => ScalarType::I32,
            "uint" | "uint32" => ScalarType::U32,
            "float" | "float32" => ScalarType::F32,
            "double" | "float64" => ScalarType::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            ScalarType::I8 | ScalarType::U8 => 1,
            ScalarType::I16 | ScalarType::U16 => 2,
            ScalarType::I32 | ScalarType::U32 | ScalarType::F32 => 4,
            ScalarType::F64 => 8,
        }
    }

    fn is_integer(self) -> bool {
        !matches!(self, ScalarType::F32 | ScalarType::F64)
    }
}

struct Property {
    name: String,
    ty: ScalarType,
}

struct Header {
    format: PlyFormat,
    vertex_count: usize,
    properties: Vec<Property>,
    data_offset: usize,
}

fn fail(path: &Path, detail: impl Into<String>) -> Error {
    Error::format("ply file", Some(path.to_path_buf()), detail)
}

fn parse_header(bytes: &[u8], path: &Path) -> Result<Header> {
    let mut pos = 0usize;
    let mut lines = Vec::new();
    // header is ASCII lines up to and including end_header
    loop {
        let start = pos;
        while pos < bytes.len() && bytes[pos] != b'\n' {
            pos += 1;
        }
        if pos >= bytes.len() {
            return Err(fail(path, "missing end_header"));
        }
        let line = std::str::from_utf8(&bytes[start..pos])
            .map_err(|_| fail(path, "header is not ASCII"))?
            .trim_end_matches('\r')
            .trim()
            .to_string();
        pos += 1;
        let done = line == "end_header";
        lines.push(line);
        if done {
            break;
        }
        if lines.len() > 1000 {
            return Err(fail(path, "header too long"));
        }
    }

    if lines.first().map(String::as_str) != Some("ply") {
        return Err(fail(path, "missing ply magic"));
    }

    let mut format = None;
    let mut vertex_count = None;
    let mut properties = Vec::new();
    // element currently being declared; only "vertex" properties are kept
    let mut in_vertex = false;
    let mut past_vertex = false;

    for line in &lines[1..lines.len() - 1] {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.first().copied() {
            None | Some("comment") | Some("obj_info") => {}
            Some("format") => {
                format = Some(match tokens.get(1).copied() {
                    Some("ascii") => PlyFormat::Ascii,
                    Some("binary_little_endian") => PlyFormat::BinaryLittleEndian,
                    Some(other) => return Err(fail(path, format!("unsupported format '{other}'"))),
                    None => return Err(fail(path, "format line missing kind")),
                });
            }
            Some("element") => {
                let name = tokens.get(1).copied().unwrap_or("");
                let count: usize = tokens
                    .get(2)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| fail(path, "element line missing count"))?;
                if name == "vertex" {
                    if vertex_count.is_some() {
                        return Err(fail(path, "duplicate vertex element"));
                    }
                    vertex_count = Some(count);
                    in_vertex = true;
                } else {
                    if vertex_count.is_none() && count > 0 {
                        // data for this element would precede the vertices
                        return Err(fail(path, format!("element '{name}' precedes vertex data")));
                    }
                    in_vertex = false;
                    past_vertex = vertex_count.is_some();
                }
            }
            Some("property") => {
                if !in_vertex {
                    if past_vertex {
                        continue; // trailing elements are never read
                    }
                    continue; // properties of empty leading elements
                }
                if tokens.get(1).copied() == Some("list") {
                    return Err(fail(path, "list property on vertex element is unsupported"));
                }
                let ty_token = tokens.get(1).copied().unwrap_or("");
                let ty = ScalarType::parse(ty_token)
                    .ok_or_else(|| fail(path, format!("unknown property type '{ty_token}'")))?;
                let name = tokens
                    .get(2)
                    .copied()
                    .ok_or_else(|| fail(path, "property line missing name"))?;
                properties.push(Property { name: name.to_string(), ty });
            }
            Some(other) => return Err(fail(path, format!("unknown header keyword '{other}'"))),
        }
    }

    let format = format.ok_or_else(|| fail(path, "missing format line"))?;
    let vertex_count = vertex_count.ok_or_else(|| fail(path, "missing vertex element"))?;
    Ok(Header { format, vertex_count, properties, data_offset: pos })
}

fn scalar_as_f32(ty: ScalarType, raw: &[u8]) -> f32 {
    match ty {
        ScalarType::F32 => f32::from_le_bytes(raw.try_into().unwrap()),
        ScalarType::F64 => f64::from_le_bytes(raw.try_into().unwrap()) as f32,
        _ => unreachable!("coordinate properties are float"),
    }
}

fn scalar_as_u32(ty: ScalarType, raw: &[u8], path: &Path) -> Result<u32> {
    let v: i64 = match ty {
        ScalarType::I8 => raw[0] as i8 as i64,
        ScalarType::U8 => raw[0] as i64,
        ScalarType::I16 => i16::from_le_bytes(raw.try_into().unwrap()) as i64,
        ScalarType::U16 => u16::from_le_bytes(raw.try_into().unwrap()) as i64,
        ScalarType::I32 => i32::from_le_bytes(raw.try_into().unwrap()) as i64,
        ScalarType::U32 => u32::from_le_bytes(raw.try_into().unwrap()) as i64,
        _ => return Err(fail(path, "label property must be an integer type")),
    };
    u32::try_from(v).map_err(|_| fail(path, format!("negative label value {v}")))
}

/// Loads a point cloud. Label values are mapped through `ct` (255 = ignore);
/// out-of-range labels are an error.
pub fn load_scene(path: impl AsRef<Path>, ct: &ClassTable) -> Result<ScenePointCloud> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let header = parse_header(&bytes, path)?;

    let find = |name: &str| header.properties.iter().position(|p| p.name == name);
    let (ix, iy, iz) = match (find("x"), find("y"), find("z")) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(fail(path, "vertex element lacks x/y/z properties")),
    };
    for &i in &[ix, iy, iz] {
        let p = &header.properties[i];
        if p.ty.is_integer() {
            return Err(fail(path, format!("coordinate property '{}' must be float", p.name)));
        }
    }
    let color_idx = match (find("red"), find("green"), find("blue")) {
        (Some(r), Some(g), Some(b)) => {
            for &i in &[r, g, b] {
                if header.properties[i].ty != ScalarType::U8 {
                    return Err(fail(path, "color properties must be uchar"));
                }
            }
            Some((r, g, b))
        }
        (None, None, None) => None,
        _ => return Err(fail(path, "partial red/green/blue property set")),
    };
    let label_idx = find("label");
    if let Some(i) = label_idx {
        if !header.properties[i].ty.is_integer() {
            return Err(fail(path, "label property must be an integer type"));
        }
    }

    let n = header.vertex_count;
    let mut positions = Vec::with_capacity(n);
    let mut colors = color_idx.map(|_| Vec::with_capacity(n));
    let mut labels: Option<Vec<u32>> = label_idx.map(|_| Vec::with_capacity(n));

    let map_label = |raw: u32| -> Result<u32> {
        if raw == IGNORE_BYTE as u32 {
            Ok(ct.ignore_id())
        } else {
            ct.check_class(raw)
        }
    };

    match header.format {
        PlyFormat::BinaryLittleEndian => {
            let stride: usize = header.properties.iter().map(|p| p.ty.size()).sum();
            let data = &bytes[header.data_offset..];
            if data.len() < stride * n {
                return Err(fail(path, "truncated vertex data"));
            }
            let mut offsets = Vec::with_capacity(header.properties.len());
            let mut off = 0usize;
            for p in &header.properties {
                offsets.push(off);
                off += p.ty.size();
            }
            fn field<'a>(rec: &'a [u8], i: usize, offsets: &[usize], props: &[Property]) -> &'a [u8] {
                &rec[offsets[i]..offsets[i] + props[i].ty.size()]
            }
            for rec in data[..stride * n].chunks_exact(stride) {
                positions.push([
                    scalar_as_f32(header.properties[ix].ty, field(rec, ix, &offsets, &header.properties)),
                    scalar_as_f32(header.properties[iy].ty, field(rec, iy, &offsets, &header.properties)),
                    scalar_as_f32(header.properties[iz].ty, field(rec, iz, &offsets, &header.properties)),
                ]);
                if let (Some((r, g, b)), Some(cs)) = (color_idx, colors.as_mut()) {
                    cs.push([field(rec, r, &offsets, &header.properties)[0], field(rec, g, &offsets, &header.properties)[0], field(rec, b, &offsets, &header.properties)[0]]);
                }
                if let (Some(i), Some(ls)) = (label_idx, labels.as_mut()) {
                    let raw = scalar_as_u32(header.properties[i].ty, field(rec, i, &offsets, &header.properties), path)?;
                    ls.push(map_label(raw)?);
                }
            }
        }
        PlyFormat::Ascii => {
            let text = std::str::from_utf8(&bytes[header.data_offset..])
                .map_err(|_| fail(path, "ascii body is not utf-8"))?;
            let mut tokens = text.split_whitespace();
            for _ in 0..n {
                let mut fields = Vec::with_capacity(header.properties.len());
                for _ in &header.properties {
                    fields.push(tokens.next().ok_or_else(|| fail(path, "truncated vertex data"))?);
                }
                let coord = |i: usize| -> Result<f32> {
                    fields[i]
                        .parse::<f32>()
                        .map_err(|_| fail(path, format!("bad float '{}'", fields[i])))
                };
                positions.push([coord(ix)?, coord(iy)?, coord(iz)?]);
                if let (Some((r, g, b)), Some(cs)) = (color_idx, colors.as_mut()) {
                    let byte = |i: usize| -> Result<u8> {
                        fields[i]
                            .parse::<u8>()
                            .map_err(|_| fail(path, format!("bad color '{}'", fields[i])))
                    };
                    cs.push([byte(r)?, byte(g)?, byte(b)?]);
                }
                if let (Some(i), Some(ls)) = (label_idx, labels.as_mut()) {
                    let raw = fields[i]
                        .parse::<i64>()
                        .map_err(|_| fail(path, format!("bad label '{}'", fields[i])))?;
                    let raw = u32::try_from(raw)
                        .map_err(|_| fail(path, format!("negative label value {raw}")))?;
                    ls.push(map_label(raw)?);
                }
            }
        }
    }

    ScenePointCloud::new(positions, colors, labels, ct)
}

/// Writes a binary little-endian PLY. `labels`, when given, overrides the
/// cloud's own labels; the ignore id is encoded as byte 255.
pub fn save_scene(
    cloud: &ScenePointCloud,
    labels: Option<&[u32]>,
    path: impl AsRef<Path>,
    ct: &ClassTable,
) -> Result<()> {
    save_scene_with_format(cloud, labels, path, ct, PlyFormat::BinaryLittleEndian)
}

pub fn save_scene_with_format(
    cloud: &ScenePointCloud,
    labels: Option<&[u32]>,
    path: impl AsRef<Path>,
    ct: &ClassTable,
    format: PlyFormat,
) -> Result<()> {
    let path = path.as_ref();
    let labels = match labels {
        Some(l) => {
            if l.len() != cloud.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} labels for {} points",
                    l.len(),
                    cloud.len()
                )));
            }
            Some(l)
        }
        None => cloud.gt_labels(),
    };

    let mut out = Vec::new();
    out.extend_from_slice(b"ply\n");
    match format {
        PlyFormat::Ascii => out.extend_from_slice(b"format ascii 1.0\n"),
        PlyFormat::BinaryLittleEndian => out.extend_from_slice(b"format binary_little_endian 1.0\n"),
    }
    let _ = writeln!(out, "element vertex {}", cloud.len());
    out.extend_from_slice(b"property float x\nproperty float y\nproperty float z\n");
    if cloud.colors().is_some() {
        out.extend_from_slice(b"property uchar red\nproperty uchar green\nproperty uchar blue\n");
    }
    if labels.is_some() {
        out.extend_from_slice(b"property uchar label\n");
    }
    out.extend_from_slice(b"end_header\n");

    for i in 0..cloud.len() {
        let p = cloud.positions()[i];
        let color = cloud.colors().map(|c| c[i]);
        let label_byte = match labels {
            Some(l) => Some(ct.label_to_byte(l[i])?),
            None => None,
        };
        match format {
            PlyFormat::BinaryLittleEndian => {
                for c in p {
                    out.extend_from_slice(&c.to_le_bytes());
                }
                if let Some(c) = color {
                    out.extend_from_slice(&c);
                }
                if let Some(b) = label_byte {
                    out.push(b);
                }
            }
            PlyFormat::Ascii => {
                let _ = write!(out, "{} {} {}", p[0], p[1], p[2]);
                if let Some(c) = color {
                    let _ = write!(out, " {} {} {}", c[0], c[1], c[2]);
                }
                if let Some(b) = label_byte {
                    let _ = write!(out, " {b}");
                }
                out.push(b'\n');
            }
        }
    }

    fs::write(path, out).map_err(|e| Error::io(path, e))
}
