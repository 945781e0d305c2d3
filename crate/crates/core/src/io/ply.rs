//! PLY point-cloud reading (ASCII and binary little-endian) and writing.

use std::path::Path;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geometry::{Point3, PointCloud};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar(String, Scalar),
    List(Scalar, Scalar),
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Format {
    Ascii,
    BinaryLe,
}

struct Header {
    format: Format,
    elements: Vec<Element>,
    body_offset: usize,
}

fn parse_header(bytes: &[u8], path: &Path) -> Result<Header> {
    let err = |m: &str| Error::parse(path, m.to_string());
    let end = find_subslice(bytes, b"end_header")
        .ok_or_else(|| err("missing end_header"))?;
    let mut body_offset = end + "end_header".len();
    if bytes.get(body_offset) == Some(&b'\r') {
        body_offset += 1;
    }
    if bytes.get(body_offset) == Some(&b'\n') {
        body_offset += 1;
    }
    let text = std::str::from_utf8(&bytes[..end]).map_err(|_| err("non-UTF8 header"))?;
    let mut lines = text.lines().map(str::trim);
    if lines.next() != Some("ply") {
        return Err(err("missing ply magic"));
    }
    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    for line in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            [] | ["comment", ..] | ["obj_info", ..] => {}
            ["format", "ascii", _] => format = Some(Format::Ascii),
            ["format", "binary_little_endian", _] => format = Some(Format::BinaryLe),
            ["format", other, _] => return Err(err(&format!("unsupported format {other}"))),
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count.parse().map_err(|_| err("bad element count"))?,
                props: Vec::new(),
            }),
            ["property", "list", c, i, _name] => {
                let el = elements.last_mut().ok_or_else(|| err("property before element"))?;
                let c = Scalar::parse(c).ok_or_else(|| err("bad list count type"))?;
                let i = Scalar::parse(i).ok_or_else(|| err("bad list item type"))?;
                el.props.push(Property::List(c, i));
            }
            ["property", ty, name] => {
                let el = elements.last_mut().ok_or_else(|| err("property before element"))?;
                let ty = Scalar::parse(ty).ok_or_else(|| err(&format!("bad type {ty}")))?;
                el.props.push(Property::Scalar(name.to_string(), ty));
            }
            _ => return Err(err(&format!("unrecognised header line {line:?}"))),
        }
    }
    Ok(Header {
        format: format.ok_or_else(|| err("missing format line"))?,
        elements,
        body_offset,
    })
}

fn find_subslice(hay: &[u8], needle: &[u8]) -> Option<usize> {
    hay.windows(needle.len()).position(|w| w == needle)
}

/// Reads the `vertex` element of a PLY file: `x,y,z` required;
/// `red,green,blue` and `nx,ny,nz` optional. Intensities are derived from
/// colors when present.
pub fn read_ply(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_ply(&bytes, path)
}

pub fn parse_ply(bytes: &[u8], path: &Path) -> Result<PointCloud> {
    let err = |m: String| Error::parse(path, m);
    let header = parse_header(bytes, path)?;
    let body = &bytes[header.body_offset..];
    let mut rows: Option<(Vec<String>, Vec<Vec<f64>>)> = None;

    match header.format {
        Format::Ascii => {
            let text = std::str::from_utf8(body).map_err(|_| err("non-UTF8 body".into()))?;
            let mut lines = text.lines().filter(|l| !l.trim().is_empty());
            for el in &header.elements {
                let mut vals = Vec::with_capacity(el.count);
                for r in 0..el.count {
                    let line = lines
                        .next()
                        .ok_or_else(|| err(format!("truncated {} element at row {r}", el.name)))?;
                    if el.name == "vertex" {
                        let row: Vec<f64> = line
                            .split_whitespace()
                            .map(|t| t.parse::<f64>())
                            .collect::<std::result::Result<_, _>>()
                            .map_err(|e| err(format!("vertex row {r}: {e}")))?;
                        if row.len() != el.props.len() {
                            return Err(err(format!("vertex row {r} has {} values", row.len())));
                        }
                        vals.push(row);
                    }
                }
                if el.name == "vertex" {
                    rows = Some((scalar_names(el), vals));
                }
            }
        }
        Format::BinaryLe => {
            let mut pos = 0usize;
            let take = |pos: &mut usize, n: usize| -> Result<&[u8]> {
                let s = body
                    .get(*pos..*pos + n)
                    .ok_or_else(|| Error::parse(path, "truncated binary body"))?;
                *pos += n;
                Ok(s)
            };
            for el in &header.elements {
                let mut vals = Vec::new();
                for _ in 0..el.count {
                    let mut row = Vec::with_capacity(el.props.len());
                    for p in &el.props {
                        match p {
                            Property::Scalar(_, ty) => row.push(ty.read_le(take(&mut pos, ty.size())?)),
                            Property::List(c, i) => {
                                let n = c.read_le(take(&mut pos, c.size())?) as usize;
                                take(&mut pos, n * i.size())?;
                            }
                        }
                    }
                    if el.name == "vertex" {
                        vals.push(row);
                    }
                }
                if el.name == "vertex" {
                    rows = Some((scalar_names(el), vals));
                }
            }
        }
    }

    let (names, rows) = rows.ok_or_else(|| err("no vertex element".into()))?;
    let col = |n: &str| names.iter().position(|x| x == n);
    let (x, y, z) = match (col("x"), col("y"), col("z")) {
        (Some(x), Some(y), Some(z)) => (x, y, z),
        _ => return Err(err("vertex element lacks x/y/z".into())),
    };
    let points = rows.iter().map(|r| Point3::new(r[x], r[y], r[z])).collect();
    let mut cloud = PointCloud::new(points).map_err(|e| err(e.to_string()))?;
    if let (Some(r), Some(g), Some(b)) = (col("red"), col("green"), col("blue")) {
        let colors = rows
            .iter()
            .map(|row| [row[r] as u8, row[g] as u8, row[b] as u8])
            .collect();
        cloud = cloud.with_colors(colors)?.with_intensity_from_colors();
    }
    if let (Some(a), Some(b), Some(c)) = (col("nx"), col("ny"), col("nz")) {
        let normals = rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let n = Vector3::new(row[a], row[b], row[c]);
                n.try_normalize(1e-12)
                    .ok_or_else(|| err(format!("zero normal at vertex {i}")))
            })
            .collect::<Result<_>>()?;
        cloud = cloud.with_normals(normals)?;
    }
    Ok(cloud)
}

fn scalar_names(el: &Element) -> Vec<String> {
    el.props
        .iter()
        .filter_map(|p| match p {
            Property::Scalar(n, _) => Some(n.clone()),
            Property::List(..) => None,
        })
        .collect()
}

/// Writes a binary little-endian PLY with doubles for positions, floats for
/// normals and uchar colors.
pub fn write_ply(path: impl AsRef<Path>, cloud: &PointCloud) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    let mut header = format!(
        "ply\nformat binary_little_endian 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\n",
        cloud.len()
    );
    if cloud.normals().is_some() {
        header += "property float nx\nproperty float ny\nproperty float nz\n";
    }
    if cloud.colors().is_some() {
        header += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    }
    header += "end_header\n";
    buf.extend_from_slice(header.as_bytes());
    for (i, p) in cloud.points().iter().enumerate() {
        for v in [p.x, p.y, p.z] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        if let Some(ns) = cloud.normals() {
            for v in ns[i].iter() {
                buf.extend_from_slice(&(*v as f32).to_le_bytes());
            }
        }
        if let Some(cs) = cloud.colors() {
            buf.extend_from_slice(&cs[i]);
        }
    }
    super::write_atomic(path, &buf)
}
