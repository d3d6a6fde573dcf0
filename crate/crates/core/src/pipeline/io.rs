//! OBJ and PLY triangle meshes.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::mesh::TriangleMesh;
use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl MeshFormat {
    /// Format from the file extension, case-insensitively.
    pub fn from_path(path: &Path) -> Option<MeshFormat> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "obj" => Some(MeshFormat::Obj),
            "ply" => Some(MeshFormat::Ply),
            _ => None,
        }
    }
}

/// Reads a mesh, taking the format from the extension when not given.
/// Polygonal faces are fan-triangulated.
pub fn load_mesh(path: &Path, format: Option<MeshFormat>) -> Result<TriangleMesh> {
    let format = format
        .or_else(|| MeshFormat::from_path(path))
        .ok_or_else(|| Error::InvalidInput(format!("cannot tell the mesh format of {}", path.display())))?;
    let file = std::fs::File::open(path)?;
    let mesh = match format {
        MeshFormat::Obj => read_obj(BufReader::new(file))?,
        MeshFormat::Ply => read_ply(BufReader::new(file))?,
    };
    mesh.validate()?;
    Ok(mesh)
}

fn fan(poly: &[usize], faces: &mut Vec<[usize; 3]>) {
    for k in 1..poly.len() - 1 {
        faces.push([poly[0], poly[k], poly[k + 1]]);
    }
}

pub fn read_obj<R: BufRead>(input: R) -> Result<TriangleMesh> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line_no = k + 1;
        let err = |msg: String| Error::Parse { line: line_no, msg };
        let line = line?;
        let line = line.split('#').next().unwrap_or("");
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let coords: Vec<f64> = tokens
                    .take(3)
                    .map(|t| t.parse::<f64>().map_err(|_| err(format!("bad coordinate {t:?}"))))
                    .collect::<Result<_>>()?;
                if coords.len() < 3 {
                    return Err(err("vertex needs three coordinates".into()));
                }
                vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let poly: Vec<usize> = tokens
                    .map(|t| {
                        let first = t.split('/').next().unwrap_or("");
                        let i: i64 = first.parse().map_err(|_| err(format!("bad vertex reference {t:?}")))?;
                        let n = vertices.len() as i64;
                        let idx = if i > 0 { i - 1 } else { n + i };
                        if i == 0 || idx < 0 || idx >= n {
                            return Err(err(format!("vertex reference {i} out of range (have {n} vertices)")));
                        }
                        Ok(idx as usize)
                    })
                    .collect::<Result<_>>()?;
                if poly.len() < 3 {
                    return Err(err(format!("face with {} vertices cannot be triangulated", poly.len())));
                }
                fan(&poly, &mut faces);
            }
            _ => {}
        }
    }
    Ok(TriangleMesh::new(vertices, faces))
}

pub fn write_obj<W: Write>(mesh: &TriangleMesh, mut out: W) -> Result<()> {
    for p in &mesh.vertices {
        writeln!(out, "v {} {} {}", p.x, p.y, p.z)?;
    }
    for f in &mesh.faces {
        writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
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
    fn parse(name: &str) -> Option<Scalar> {
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

    fn decode(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { name: String, count: Scalar, item: Scalar },
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlyEncoding {
    Ascii,
    BinaryLittleEndian,
}

struct Header {
    encoding: PlyEncoding,
    elements: Vec<Element>,
    /// Lines consumed, including `end_header`.
    lines: usize,
}

fn parse_header(text: &str) -> Result<Header> {
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line_no = k + 1;
        let err = |msg: String| Error::Parse { line: line_no, msg };
        let t: Vec<&str> = line.split_whitespace().collect();
        match t.first().copied() {
            _ if k == 0 => {
                if line.trim_end() != "ply" {
                    return Err(err("missing 'ply' magic".into()));
                }
            }
            Some("format") => {
                encoding = Some(match t.get(1).copied() {
                    Some("ascii") => PlyEncoding::Ascii,
                    Some("binary_little_endian") => PlyEncoding::BinaryLittleEndian,
                    other => return Err(err(format!("unsupported format {other:?}"))),
                });
            }
            Some("element") => {
                let (Some(name), Some(count)) = (t.get(1), t.get(2)) else {
                    return Err(err("element needs a name and a count".into()));
                };
                let count = count.parse().map_err(|_| err(format!("bad element count {count:?}")))?;
                elements.push(Element { name: name.to_string(), count, props: Vec::new() });
            }
            Some("property") => {
                let el = elements.last_mut().ok_or_else(|| err("property before any element".into()))?;
                let ty = |s: Option<&&str>| s.and_then(|s| Scalar::parse(s)).ok_or_else(|| err(format!("unknown property type in {line:?}")));
                let prop = if t.get(1) == Some(&"list") {
                    Property::List { count: ty(t.get(2))?, item: ty(t.get(3))?, name: t.get(4).ok_or_else(|| err("list property needs a name".into()))?.to_string() }
                } else {
                    Property::Scalar { ty: ty(t.get(1))?, name: t.get(2).ok_or_else(|| err("property needs a name".into()))?.to_string() }
                };
                el.props.push(prop);
            }
            Some("end_header") => {
                let encoding = encoding.ok_or_else(|| err("no format line".into()))?;
                return Ok(Header { encoding, elements, lines: line_no });
            }
            Some("comment") | Some("obj_info") | None => {}
            Some(other) => return Err(err(format!("unexpected header keyword {other:?}"))),
        }
    }
    Err(Error::Parse { line: text.lines().count(), msg: "missing end_header".into() })
}

/// Values of one element instance: scalars as one-element vectors.
type Record = Vec<Vec<f64>>;

pub fn read_ply<R: Read>(mut input: R) -> Result<TriangleMesh> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let end = find_header_end(&bytes).ok_or_else(|| Error::Parse { line: 1, msg: "missing end_header".into() })?;
    let header_text = std::str::from_utf8(&bytes[..end]).map_err(|_| Error::ParseBinary { offset: 0, msg: "header is not text".into() })?;
    let header = parse_header(header_text)?;
    let body = &bytes[end..];
    let mut records: Vec<(String, Vec<Property>, Vec<Record>)> = Vec::new();
    match header.encoding {
        PlyEncoding::Ascii => {
            let text = std::str::from_utf8(body).map_err(|_| Error::ParseBinary { offset: end, msg: "ascii body is not text".into() })?;
            let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
            for el in &header.elements {
                let mut recs = Vec::with_capacity(el.count);
                for _ in 0..el.count {
                    let Some((k, line)) = lines.next() else {
                        return Err(Error::Parse { line: header.lines + text.lines().count() + 1, msg: format!("unexpected end of file in element {}", el.name) });
                    };
                    let line_no = header.lines + k + 1;
                    let err = |msg: String| Error::Parse { line: line_no, msg };
                    let mut tokens = line.split_whitespace();
                    let mut next = || -> Result<f64> {
                        let t = tokens.next().ok_or_else(|| err(format!("too few values for element {}", el.name)))?;
                        t.parse::<f64>().map_err(|_| err(format!("bad number {t:?}")))
                    };
                    let mut rec = Vec::with_capacity(el.props.len());
                    for p in &el.props {
                        match p {
                            Property::Scalar { .. } => rec.push(vec![next()?]),
                            Property::List { .. } => {
                                let n = next()?;
                                if n < 0.0 || n.fract() != 0.0 {
                                    return Err(err(format!("bad list length {n}")));
                                }
                                rec.push((0..n as usize).map(|_| next()).collect::<Result<_>>()?);
                            }
                        }
                    }
                    recs.push(rec);
                }
                records.push((el.name.clone(), el.props.clone(), recs));
            }
        }
        PlyEncoding::BinaryLittleEndian => {
            let mut pos = 0usize;
            let mut take = |n: usize, what: &str| -> Result<&[u8]> {
                if pos + n > body.len() {
                    return Err(Error::ParseBinary { offset: end + pos, msg: format!("unexpected end of file reading {what}") });
                }
                let s = &body[pos..pos + n];
                pos += n;
                Ok(s)
            };
            for el in &header.elements {
                let mut recs = Vec::with_capacity(el.count.min(1 << 24));
                for _ in 0..el.count {
                    let mut rec = Vec::with_capacity(el.props.len());
                    for p in &el.props {
                        match *p {
                            Property::Scalar { ty, .. } => rec.push(vec![ty.decode(take(ty.size(), &el.name)?)]),
                            Property::List { count, item, .. } => {
                                let n = count.decode(take(count.size(), &el.name)?);
                                if n < 0.0 {
                                    return Err(Error::ParseBinary { offset: end + pos, msg: format!("negative list length {n}") });
                                }
                                let mut items = Vec::with_capacity(n as usize);
                                for _ in 0..n as usize {
                                    items.push(item.decode(take(item.size(), &el.name)?));
                                }
                                rec.push(items);
                            }
                        }
                    }
                    recs.push(rec);
                }
                records.push((el.name.clone(), el.props.clone(), recs));
            }
        }
    }
    assemble_ply(records)
}

fn find_header_end(bytes: &[u8]) -> Option<usize> {
    let key = b"end_header";
    let at = bytes.windows(key.len()).position(|w| w == key)?;
    let nl = bytes[at..].iter().position(|&b| b == b'\n')?;
    Some(at + nl + 1)
}

fn prop_name(p: &Property) -> &str {
    match p {
        Property::Scalar { name, .. } | Property::List { name, .. } => name,
    }
}

fn assemble_ply(records: Vec<(String, Vec<Property>, Vec<Record>)>) -> Result<TriangleMesh> {
    let missing = |what: &str| Error::Parse { line: 0, msg: format!("no {what} in header") };
    let (_, vprops, vrecs) = records.iter().find(|(n, ..)| n == "vertex").ok_or_else(|| missing("vertex element"))?;
    let col = |name: &str| vprops.iter().position(|p| prop_name(p) == name).ok_or_else(|| missing(&format!("vertex property {name}")));
    let (x, y, z) = (col("x")?, col("y")?, col("z")?);
    let vertices: Vec<Vec3> = vrecs.iter().map(|r| Vec3::new(r[x][0], r[y][0], r[z][0])).collect();
    let mut faces = Vec::new();
    if let Some((_, fprops, frecs)) = records.iter().find(|(n, ..)| n == "face") {
        let c = fprops
            .iter()
            .position(|p| matches!(p, Property::List { name, .. } if name == "vertex_indices" || name == "vertex_index"))
            .ok_or_else(|| missing("face vertex_indices list"))?;
        for (k, r) in frecs.iter().enumerate() {
            let poly: Vec<usize> = r[c]
                .iter()
                .map(|&i| {
                    if i < 0.0 || i as usize >= vertices.len() {
                        Err(Error::InvalidInput(format!("face {k} references vertex {i} of {}", vertices.len())))
                    } else {
                        Ok(i as usize)
                    }
                })
                .collect::<Result<_>>()?;
            if poly.len() < 3 {
                return Err(Error::InvalidInput(format!("face {k} with {} vertices cannot be triangulated", poly.len())));
            }
            fan(&poly, &mut faces);
        }
    }
    Ok(TriangleMesh::new(vertices, faces))
}

pub fn write_ply<W: Write>(mesh: &TriangleMesh, mut out: W, encoding: PlyEncoding) -> Result<()> {
    let format = match encoding {
        PlyEncoding::Ascii => "ascii",
        PlyEncoding::BinaryLittleEndian => "binary_little_endian",
    };
    write!(
        out,
        "ply\nformat {format} 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\nelement face {}\nproperty list uchar int vertex_indices\nend_header\n",
        mesh.vertices.len(),
        mesh.faces.len()
    )?;
    match encoding {
        PlyEncoding::Ascii => {
            for p in &mesh.vertices {
                writeln!(out, "{} {} {}", p.x, p.y, p.z)?;
            }
            for f in &mesh.faces {
                writeln!(out, "3 {} {} {}", f[0], f[1], f[2])?;
            }
        }
        PlyEncoding::BinaryLittleEndian => {
            for p in &mesh.vertices {
                for c in [p.x, p.y, p.z] {
                    out.write_all(&c.to_le_bytes())?;
                }
            }
            for f in &mesh.faces {
                out.write_all(&[3u8])?;
                for &i in f {
                    out.write_all(&(i as i32).to_le_bytes())?;
                }
            }
        }
    }
    Ok(())
}
