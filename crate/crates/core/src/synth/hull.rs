//! Quickhull in three dimensions, returning only the hull's vertex set.

use std::collections::HashMap;

use nalgebra::Vector3;

type V3 = Vector3<f64>;

#[derive(Debug, Clone)]
struct Face {
    v: [usize; 3],
    normal: V3,
    /// Across edge `(v[i], v[(i + 1) % 3])`.
    nbr: [usize; 3],
    outside: Vec<usize>,
    alive: bool,
}

struct Hull<'a> {
    pts: &'a [V3],
    faces: Vec<Face>,
    eps: f64,
}

impl<'a> Hull<'a> {
    fn dist(&self, f: usize, p: usize) -> f64 {
        let face = &self.faces[f];
        face.normal.dot(&(self.pts[p] - self.pts[face.v[0]]))
    }

    fn new_face(&mut self, v: [usize; 3]) -> usize {
        let [a, b, c] = v.map(|i| self.pts[i]);
        let normal = (b - a).cross(&(c - a));
        let normal = normal.try_normalize(0.0).unwrap_or_else(V3::zeros);
        self.faces.push(Face {
            v,
            normal,
            nbr: [usize::MAX; 3],
            outside: Vec::new(),
            alive: true,
        });
        self.faces.len() - 1
    }

    fn assign(&mut self, candidates: impl IntoIterator<Item = usize>, faces: &[usize]) {
        for p in candidates {
            let mut best: Option<(usize, f64)> = None;
            for &f in faces {
                let d = self.dist(f, p);
                if d > self.eps && best.is_none_or(|(_, bd)| d > bd) {
                    best = Some((f, d));
                }
            }
            if let Some((f, _)) = best {
                self.faces[f].outside.push(p);
            }
        }
    }

    fn run(&mut self) {
        let mut stack: Vec<usize> = (0..self.faces.len()).collect();
        while let Some(f) = stack.pop() {
            if !self.faces[f].alive || self.faces[f].outside.is_empty() {
                continue;
            }
            let eye = *self.faces[f]
                .outside
                .iter()
                .max_by(|&&a, &&b| self.dist(f, a).total_cmp(&self.dist(f, b)).then(b.cmp(&a)))
                .expect("non-empty");

            // Flood the faces that can see the eye point.
            let mut visible = vec![f];
            let mut is_visible: HashMap<usize, bool> = HashMap::from([(f, true)]);
            let mut horizon: Vec<(usize, usize, usize)> = Vec::new();
            let mut i = 0;
            while i < visible.len() {
                let cur = visible[i];
                i += 1;
                for e in 0..3 {
                    let nb = self.faces[cur].nbr[e];
                    let vis = match is_visible.get(&nb) {
                        Some(&v) => v,
                        None => {
                            let v = self.dist(nb, eye) > self.eps;
                            is_visible.insert(nb, v);
                            if v {
                                visible.push(nb);
                            }
                            v
                        }
                    };
                    if !vis {
                        let fv = self.faces[cur].v;
                        horizon.push((fv[e], fv[(e + 1) % 3], nb));
                    }
                }
            }

            let mut orphans: Vec<usize> = Vec::new();
            for &vf in &visible {
                self.faces[vf].alive = false;
                orphans.append(&mut self.faces[vf].outside);
            }

            let mut edge_owner: HashMap<(usize, usize), usize> = HashMap::new();
            let mut created = Vec::with_capacity(horizon.len());
            for &(a, b, across) in &horizon {
                let nf = self.new_face([a, b, eye]);
                self.faces[nf].nbr[0] = across;
                let back = self.faces[across]
                    .v
                    .iter()
                    .enumerate()
                    .position(|(k, &x)| x == b && self.faces[across].v[(k + 1) % 3] == a)
                    .expect("horizon edge shared with neighbour");
                self.faces[across].nbr[back] = nf;
                edge_owner.insert((b, eye), nf);
                edge_owner.insert((eye, a), nf);
                created.push(nf);
            }
            for &nf in &created {
                let [a, b, _] = self.faces[nf].v;
                self.faces[nf].nbr[1] = edge_owner[&(eye, b)];
                self.faces[nf].nbr[2] = edge_owner[&(a, eye)];
            }
            self.assign(orphans.into_iter().filter(|&p| p != eye), &created);
            stack.extend(created);
        }
    }
}

/// Indices of the points that are vertices of the convex hull, ascending.
///
/// Coplanar inputs fall back to a planar hull; collinear inputs return the
/// two extreme points; a single distinct location returns its first index.
pub fn hull_vertices(pts: &[V3]) -> Vec<usize> {
    if pts.is_empty() {
        return Vec::new();
    }
    let scale = pts
        .iter()
        .flat_map(|p| p.iter().map(|c| c.abs()))
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let eps = 1e-11 * scale;

    // Initial simplex from extreme points.
    let (mut lo, mut hi) = (0usize, 0usize);
    let mut best_span = -1.0;
    for axis in 0..3 {
        let imin = (0..pts.len()).min_by(|&a, &b| pts[a][axis].total_cmp(&pts[b][axis])).unwrap();
        let imax = (0..pts.len()).max_by(|&a, &b| pts[a][axis].total_cmp(&pts[b][axis])).unwrap();
        let span = (pts[imax] - pts[imin]).norm();
        if span > best_span {
            best_span = span;
            (lo, hi) = (imin, imax);
        }
    }
    if best_span <= eps {
        return vec![0];
    }
    let dir = (pts[hi] - pts[lo]).normalize();
    let line_dist = |p: &V3| {
        let d = p - pts[lo];
        (d - dir * d.dot(&dir)).norm()
    };
    let third = (0..pts.len())
        .max_by(|&a, &b| line_dist(&pts[a]).total_cmp(&line_dist(&pts[b])))
        .unwrap();
    if line_dist(&pts[third]) <= eps {
        let mut v = vec![lo, hi];
        v.sort_unstable();
        return v;
    }
    let plane_n = (pts[hi] - pts[lo]).cross(&(pts[third] - pts[lo])).normalize();
    let plane_dist = |p: &V3| plane_n.dot(&(p - pts[lo]));
    let fourth = (0..pts.len())
        .max_by(|&a, &b| plane_dist(&pts[a]).abs().total_cmp(&plane_dist(&pts[b]).abs()))
        .unwrap();
    if plane_dist(&pts[fourth]).abs() <= eps {
        return planar_hull(pts, lo, &plane_n, eps);
    }

    let mut simplex = [lo, hi, third, fourth];
    if plane_dist(&pts[fourth]) > 0.0 {
        simplex.swap(0, 1);
    }
    let [a, b, c, d] = simplex;
    let mut hull = Hull {
        pts,
        faces: Vec::new(),
        eps,
    };
    // Outward-facing with `d` below [a, b, c].
    let f0 = hull.new_face([a, b, c]);
    let f1 = hull.new_face([a, d, b]);
    let f2 = hull.new_face([b, d, c]);
    let f3 = hull.new_face([c, d, a]);
    hull.faces[f0].nbr = [f1, f2, f3];
    hull.faces[f1].nbr = [f3, f2, f0];
    hull.faces[f2].nbr = [f1, f3, f0];
    hull.faces[f3].nbr = [f2, f1, f0];
    let others = (0..pts.len()).filter(|p| !simplex.contains(p));
    hull.assign(others, &[f0, f1, f2, f3]);
    hull.run();

    let mut verts: Vec<usize> = hull
        .faces
        .iter()
        .filter(|f| f.alive)
        .flat_map(|f| f.v)
        .collect();
    verts.sort_unstable();
    verts.dedup();
    verts
}

fn planar_hull(pts: &[V3], origin: usize, normal: &V3, eps: f64) -> Vec<usize> {
    let u = normal.cross(&if normal.x.abs() < 0.9 { V3::x() } else { V3::y() }).normalize();
    let w = normal.cross(&u);
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    let coord = |i: usize| {
        let d = pts[i] - pts[origin];
        (d.dot(&u), d.dot(&w))
    };
    idx.sort_by(|&a, &b| {
        let (pa, pb) = (coord(a), coord(b));
        pa.0.total_cmp(&pb.0).then(pa.1.total_cmp(&pb.1))
    });
    let cross = |o: usize, a: usize, b: usize| {
        let (o, a, b) = (coord(o), coord(a), coord(b));
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut chain: Vec<usize> = Vec::new();
    for pass in 0..2 {
        let start = chain.len();
        let iter: Box<dyn Iterator<Item = &usize>> = if pass == 0 {
            Box::new(idx.iter())
        } else {
            Box::new(idx.iter().rev())
        };
        for &p in iter {
            while chain.len() >= start + 2
                && cross(chain[chain.len() - 2], chain[chain.len() - 1], p) <= eps * eps
            {
                chain.pop();
            }
            chain.push(p);
        }
        chain.pop();
    }
    chain.sort_unstable();
    chain.dedup();
    chain
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// A point is a hull vertex iff some supporting plane through it and two
    /// other points has every point on one side.
    fn brute_force(pts: &[V3]) -> Vec<usize> {
        let n = pts.len();
        let mut on_hull = vec![false; n];
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let nrm = (pts[j] - pts[i]).cross(&(pts[k] - pts[i]));
                    let side: Vec<f64> = pts.iter().map(|p| nrm.dot(&(p - pts[i]))).collect();
                    if side.iter().all(|s| *s <= 1e-12) || side.iter().all(|s| *s >= -1e-12) {
                        on_hull[i] = true;
                        on_hull[j] = true;
                        on_hull[k] = true;
                    }
                }
            }
        }
        (0..n).filter(|&i| on_hull[i]).collect()
    }

    #[test]
    fn matches_brute_force_on_random_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..40 {
            let n = 5 + trial % 25;
            let pts: Vec<V3> = (0..n)
                .map(|_| V3::new(rng.random(), rng.random(), rng.random()))
                .collect();
            assert_eq!(hull_vertices(&pts), brute_force(&pts), "trial {trial}");
        }
    }

    #[test]
    fn cube_with_interior_points() {
        let mut pts: Vec<V3> = (0..8)
            .map(|i| V3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            pts.push(V3::new(
                rng.random_range(0.1..0.9),
                rng.random_range(0.1..0.9),
                rng.random_range(0.1..0.9),
            ));
        }
        assert_eq!(hull_vertices(&pts), (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn sphere_points_are_all_vertices() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts: Vec<V3> = (0..3000)
            .map(|_| {
                V3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                )
                .normalize()
                    * 1000.0
            })
            .collect();
        assert_eq!(hull_vertices(&pts).len(), 3000);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(hull_vertices(&[V3::zeros(), V3::zeros()]), vec![0]);
        let line: Vec<V3> = (0..5).map(|i| V3::new(i as f64, 0.0, 0.0)).collect();
        assert_eq!(hull_vertices(&line), vec![0, 4]);
        let square = vec![
            V3::new(0.0, 0.0, 0.0),
            V3::new(1.0, 0.0, 0.0),
            V3::new(0.5, 0.5, 0.0),
            V3::new(1.0, 1.0, 0.0),
            V3::new(0.0, 1.0, 0.0),
        ];
        assert_eq!(hull_vertices(&square), vec![0, 1, 3, 4]);
    }
}
