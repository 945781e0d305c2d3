use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geometry::Point3;

/// Triangle soup with shared vertices. Zero-area faces are dropped on
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Point3>,
    faces: Vec<[usize; 3]>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Point3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        if let Some(f) = faces.iter().find(|f| f.iter().any(|&i| i >= vertices.len())) {
            return Err(Error::InvalidValue(format!(
                "face {f:?} references a vertex beyond {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|v| !v.coords.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidValue("non-finite vertex".into()));
        }
        let mut mesh = Self { vertices, faces };
        let scale = mesh.bounding_sphere().map(|(_, r)| r).unwrap_or(0.0);
        let min_area = 1e-14 * scale * scale;
        mesh.faces.retain(|f| {
            let [a, b, c] = f.map(|i| mesh.vertices[i]);
            tri_area(&a, &b, &c) > min_area
        });
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn triangle(&self, f: usize) -> [Point3; 3] {
        self.faces[f].map(|i| self.vertices[i])
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.triangle(f);
        tri_area(&a, &b, &c)
    }

    pub fn face_normal(&self, f: usize) -> Vector3<f64> {
        let [a, b, c] = self.triangle(f);
        (b - a).cross(&(c - a)).normalize()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Center of the vertex bounding box and the largest vertex distance from it.
    pub fn bounding_sphere(&self) -> Option<(Point3, f64)> {
        let first = *self.vertices.first()?;
        let (lo, hi) = self
            .vertices
            .iter()
            .fold((first, first), |(lo, hi), p| (lo.inf(p), hi.sup(p)));
        let center = nalgebra::center(&lo, &hi);
        let r = self
            .vertices
            .iter()
            .map(|v| (v - center).norm())
            .fold(0.0, f64::max);
        Some((center, r))
    }

    /// Axis-aligned box `[-h, h]³` offset by `center`.
    pub fn cube(center: Point3, half: f64) -> Self {
        Self::cuboid(center, Vector3::new(half, half, half))
    }

    /// Axis-aligned box with per-axis half extents.
    pub fn cuboid(center: Point3, half: Vector3<f64>) -> Self {
        let mut v = Vec::with_capacity(8);
        for i in 0..8 {
            let s = |bit: usize, h: f64| if i & bit != 0 { h } else { -h };
            v.push(center + Vector3::new(s(1, half.x), s(2, half.y), s(4, half.z)));
        }
        let quads = [
            [0, 2, 3, 1], // -z
            [4, 5, 7, 6], // +z
            [0, 1, 5, 4], // -y
            [2, 6, 7, 3], // +y
            [0, 4, 6, 2], // -x
            [1, 3, 7, 5], // +x
        ];
        let faces = quads
            .iter()
            .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
            .collect();
        Self::new(v, faces).expect("cube indices are valid")
    }

    /// Closed cylinder along +z, `segments` facets around, centered on `center`.
    pub fn cylinder(center: Point3, radius: f64, height: f64, segments: usize) -> Self {
        let segments = segments.max(3);
        let h = height / 2.0;
        let mut v = vec![center - Vector3::z() * h, center + Vector3::z() * h];
        for k in 0..segments {
            let a = std::f64::consts::TAU * k as f64 / segments as f64;
            let r = Vector3::new(a.cos(), a.sin(), 0.0) * radius;
            v.push(center + r - Vector3::z() * h);
            v.push(center + r + Vector3::z() * h);
        }
        let mut faces = Vec::with_capacity(4 * segments);
        for k in 0..segments {
            let (b0, t0) = (2 + 2 * k, 3 + 2 * k);
            let (b1, t1) = (2 + 2 * ((k + 1) % segments), 3 + 2 * ((k + 1) % segments));
            faces.push([0, b1, b0]);
            faces.push([1, t0, t1]);
            faces.push([b0, b1, t1]);
            faces.push([b0, t1, t0]);
        }
        Self::new(v, faces).expect("cylinder indices are valid")
    }

    /// Unit-square `[0,1]² × {0}` as two triangles.
    pub fn unit_square() -> Self {
        let v = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(1.0, 1.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        Self::new(v, vec![[0, 1, 2], [0, 2, 3]]).expect("valid indices")
    }

    /// Icosphere by repeated midpoint subdivision of an icosahedron.
    pub fn icosphere(center: Point3, radius: f64, subdivisions: usize) -> Self {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let mut verts: Vec<Vector3<f64>> = [
            (-1.0, t, 0.0),
            (1.0, t, 0.0),
            (-1.0, -t, 0.0),
            (1.0, -t, 0.0),
            (0.0, -1.0, t),
            (0.0, 1.0, t),
            (0.0, -1.0, -t),
            (0.0, 1.0, -t),
            (t, 0.0, -1.0),
            (t, 0.0, 1.0),
            (-t, 0.0, -1.0),
            (-t, 0.0, 1.0),
        ]
        .iter()
        .map(|&(x, y, z)| Vector3::new(x, y, z).normalize())
        .collect();
        let mut faces: Vec<[usize; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        for _ in 0..subdivisions {
            let mut cache = std::collections::HashMap::new();
            let mut mid = |a: usize, b: usize, verts: &mut Vec<Vector3<f64>>| {
                *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    verts.push(((verts[a] + verts[b]) / 2.0).normalize());
                    verts.len() - 1
                })
            };
            let mut next = Vec::with_capacity(faces.len() * 4);
            for [a, b, c] in faces {
                let ab = mid(a, b, &mut verts);
                let bc = mid(b, c, &mut verts);
                let ca = mid(c, a, &mut verts);
                next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            faces = next;
        }
        let verts = verts.into_iter().map(|v| center + v * radius).collect();
        Self::new(verts, faces).expect("icosphere indices are valid")
    }
}

pub(crate) fn tri_area(a: &Point3, b: &Point3, c: &Point3) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_faces_are_dropped() {
        let v = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        let m = TriangleMesh::new(v, vec![[0, 1, 2], [0, 1, 3]]).unwrap();
        assert_eq!(m.faces().len(), 1);
    }

    #[test]
    fn bad_index_is_rejected() {
        assert!(TriangleMesh::new(vec![Point3::origin()], vec![[0, 0, 1]]).is_err());
    }

    #[test]
    fn primitive_areas() {
        assert!((TriangleMesh::unit_square().surface_area() - 1.0).abs() < 1e-12);
        assert!((TriangleMesh::cube(Point3::origin(), 0.5).surface_area() - 6.0).abs() < 1e-12);
        let s = TriangleMesh::icosphere(Point3::origin(), 1.0, 3);
        let a = s.surface_area();
        assert!(a < 4.0 * std::f64::consts::PI && a > 0.98 * 4.0 * std::f64::consts::PI);
    }

    #[test]
    fn cube_faces_point_outward() {
        let m = TriangleMesh::cube(Point3::origin(), 1.0);
        for f in 0..m.faces().len() {
            let [a, b, c] = m.triangle(f);
            let centroid = (a.coords + b.coords + c.coords) / 3.0;
            assert!(m.face_normal(f).dot(&centroid) > 0.0);
        }
    }

    #[test]
    fn cylinder_is_closed_and_outward() {
        let m = TriangleMesh::cylinder(Point3::origin(), 1.0, 2.0, 64);
        let exact = 2.0 * std::f64::consts::PI * 2.0 + 2.0 * std::f64::consts::PI;
        assert!((m.surface_area() - exact).abs() / exact < 0.01);
        for f in 0..m.faces().len() {
            let [a, b, c] = m.triangle(f);
            let centroid = (a.coords + b.coords + c.coords) / 3.0;
            assert!(m.face_normal(f).dot(&centroid) > 0.0);
        }
    }
}
