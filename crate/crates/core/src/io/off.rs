//! OFF mesh reading (ModelNet flavour).

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::synth::TriangleMesh;

/// Reads an OFF mesh, fan-triangulating polygonal faces.
///
/// Accepts the ModelNet quirk where counts follow the `OFF` magic on the
/// same line (`OFF490 518 0`).
pub fn read_off(path: impl AsRef<Path>) -> Result<TriangleMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_off(&text, path)
}

pub fn parse_off(text: &str, path: &Path) -> Result<TriangleMesh> {
    let err = |m: String| Error::parse(path, m);
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .flat_map(str::split_whitespace);
    let magic = tokens.next().ok_or_else(|| err("empty file".into()))?;
    let rest = magic
        .strip_prefix("OFF")
        .ok_or_else(|| err(format!("bad magic {magic:?}")))?;
    let mut tokens: Box<dyn Iterator<Item = &str>> = if rest.is_empty() {
        Box::new(tokens)
    } else {
        Box::new(std::iter::once(rest).chain(tokens))
    };
    let mut next_num = |what: &str| -> Result<f64> {
        let t = tokens
            .next()
            .ok_or_else(|| err(format!("unexpected end of file reading {what}")))?;
        t.parse::<f64>()
            .map_err(|_| err(format!("bad number {t:?} reading {what}")))
    };
    let nv = next_num("vertex count")? as usize;
    let nf = next_num("face count")? as usize;
    let _edges = next_num("edge count")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let x = next_num("vertex")?;
        let y = next_num("vertex")?;
        let z = next_num("vertex")?;
        vertices.push(Point3::new(x, y, z));
    }
    let mut faces = Vec::with_capacity(nf);
    for f in 0..nf {
        let n = next_num("face arity")? as usize;
        if n < 3 {
            return Err(err(format!("face {f} has {n} vertices")));
        }
        let idx: Vec<usize> = (0..n)
            .map(|_| next_num("face index").map(|v| v as usize))
            .collect::<Result<_>>()?;
        for k in 1..n - 1 {
            faces.push([idx[0], idx[k], idx[k + 1]]);
        }
    }
    TriangleMesh::new(vertices, faces).map_err(|e| err(e.to_string()))
}

pub fn write_off(path: impl AsRef<Path>, mesh: &TriangleMesh) -> Result<()> {
    let path = path.as_ref();
    let mut s = format!("OFF\n{} {} 0\n", mesh.vertices().len(), mesh.faces().len());
    for v in mesh.vertices() {
        s += &format!("{} {} {}\n", v.x, v.y, v.z);
    }
    for f in mesh.faces() {
        s += &format!("3 {} {} {}\n", f[0], f[1], f[2]);
    }
    super::write_atomic(path, s.as_bytes())
}
