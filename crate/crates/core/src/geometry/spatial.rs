use std::collections::HashMap;

use super::Point3;

type Cell = (i64, i64, i64);

/// Uniform-grid spatial hash for k-nearest-neighbour and radius queries.
#[derive(Debug, Clone)]
pub struct GridIndex<'a> {
    points: &'a [Point3],
    cell: f64,
    cells: HashMap<Cell, Vec<usize>>,
    lo: Cell,
    hi: Cell,
}

impl<'a> GridIndex<'a> {
    /// Builds an index with roughly `target_per_cell` points per occupied cell.
    pub fn new(points: &'a [Point3], target_per_cell: usize) -> Self {
        let cell = Self::estimate_cell(points, target_per_cell.max(1));
        Self::with_cell_size(points, cell)
    }

    pub fn with_cell_size(points: &'a [Point3], cell: f64) -> Self {
        let cell = if cell.is_finite() && cell > 0.0 { cell } else { 1.0 };
        let mut cells: HashMap<Cell, Vec<usize>> = HashMap::new();
        let mut lo = (i64::MAX, i64::MAX, i64::MAX);
        let mut hi = (i64::MIN, i64::MIN, i64::MIN);
        for (i, p) in points.iter().enumerate() {
            let c = key(p, cell);
            lo = (lo.0.min(c.0), lo.1.min(c.1), lo.2.min(c.2));
            hi = (hi.0.max(c.0), hi.1.max(c.1), hi.2.max(c.2));
            cells.entry(c).or_default().push(i);
        }
        Self {
            points,
            cell,
            cells,
            lo,
            hi,
        }
    }

    fn estimate_cell(points: &[Point3], per_cell: usize) -> f64 {
        let Some(first) = points.first() else {
            return 1.0;
        };
        let (lo, hi) = points
            .iter()
            .fold((*first, *first), |(lo, hi), p| (lo.inf(p), hi.sup(p)));
        let ext = hi - lo;
        let mut dims: Vec<f64> = ext.iter().copied().filter(|e| *e > 1e-12).collect();
        if dims.is_empty() {
            return 1.0;
        }
        // Clouds are usually surfaces, so treat the two largest extents as the
        // occupied area.
        dims.sort_by(|a, b| b.total_cmp(a));
        let cells_wanted = (points.len() as f64 / per_cell as f64).max(1.0);
        match dims.len() {
            1 => dims[0] / cells_wanted,
            _ => (dims[0] * dims[1] / cells_wanted).sqrt(),
        }
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    fn shell(&self, center: Cell, ring: i64, mut f: impl FnMut(usize)) {
        for dx in -ring..=ring {
            for dy in -ring..=ring {
                for dz in -ring..=ring {
                    if dx.abs().max(dy.abs()).max(dz.abs()) != ring {
                        continue;
                    }
                    let c = (center.0 + dx, center.1 + dy, center.2 + dz);
                    if let Some(ids) = self.cells.get(&c) {
                        ids.iter().copied().for_each(&mut f);
                    }
                }
            }
        }
    }

    /// The `k` nearest points to `query` as `(index, squared distance)`,
    /// sorted by distance then index.
    pub fn knn(&self, query: &Point3, k: usize) -> Vec<(usize, f64)> {
        if k == 0 || self.points.is_empty() {
            return Vec::new();
        }
        let center = key(query, self.cell);
        // Ring beyond which no occupied cell exists.
        let last_ring = [
            (center.0 - self.lo.0).abs(),
            (center.0 - self.hi.0).abs(),
            (center.1 - self.lo.1).abs(),
            (center.1 - self.hi.1).abs(),
            (center.2 - self.lo.2).abs(),
            (center.2 - self.hi.2).abs(),
        ]
        .into_iter()
        .max()
        .unwrap_or(0);
        let mut found: Vec<(usize, f64)> = Vec::new();
        let mut ring = 0;
        loop {
            self.shell(center, ring, |i| {
                found.push((i, (self.points[i] - query).norm_squared()));
            });
            found.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            found.truncate(k);
            let covered = ring as f64 * self.cell;
            let done = found.len() == k && found[k - 1].1 <= covered * covered;
            if done || ring >= last_ring {
                return found;
            }
            ring += 1;
        }
    }

    /// Indices of all points within `radius` of `query`, ascending.
    pub fn within(&self, query: &Point3, radius: f64) -> Vec<usize> {
        let center = key(query, self.cell);
        let rings = (radius / self.cell).ceil() as i64;
        let r2 = radius * radius;
        let mut out = Vec::new();
        for ring in 0..=rings {
            self.shell(center, ring, |i| {
                if (self.points[i] - query).norm_squared() <= r2 {
                    out.push(i);
                }
            });
        }
        out.sort_unstable();
        out
    }
}

fn key(p: &Point3, cell: f64) -> Cell {
    (
        (p.x / cell).floor() as i64,
        (p.y / cell).floor() as i64,
        (p.z / cell).floor() as i64,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_knn(points: &[Point3], q: &Point3, k: usize) -> Vec<usize> {
        let mut d: Vec<(usize, f64)> = points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, (p - q).norm_squared()))
            .collect();
        d.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        d.into_iter().take(k).map(|(i, _)| i).collect()
    }

    #[test]
    fn knn_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<Point3> = (0..800)
            .map(|_| Point3::new(rng.random(), rng.random::<f64>() * 3.0, rng.random::<f64>() * 0.01))
            .collect();
        let idx = GridIndex::new(&pts, 4);
        for q in pts.iter().step_by(37) {
            let got: Vec<usize> = idx.knn(q, 11).into_iter().map(|(i, _)| i).collect();
            assert_eq!(got, brute_knn(&pts, q, 11));
        }
        let far = Point3::new(10.0, 10.0, 10.0);
        let got: Vec<usize> = idx.knn(&far, 3).into_iter().map(|(i, _)| i).collect();
        assert_eq!(got, brute_knn(&pts, &far, 3));
    }

    #[test]
    fn radius_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Point3> = (0..500)
            .map(|_| Point3::new(rng.random(), rng.random(), rng.random()))
            .collect();
        let idx = GridIndex::new(&pts, 8);
        let q = Point3::new(0.5, 0.5, 0.5);
        let expected: Vec<usize> = (0..pts.len())
            .filter(|&i| (pts[i] - q).norm() <= 0.2)
            .collect();
        assert_eq!(idx.within(&q, 0.2), expected);
    }

    #[test]
    fn knn_with_fewer_points_than_k() {
        let pts = vec![Point3::origin(), Point3::new(1.0, 0.0, 0.0)];
        assert_eq!(GridIndex::new(&pts, 1).knn(&Point3::origin(), 5).len(), 2);
    }
}
