//! Uniform bucket grid for radius and nearest-neighbor queries on flat point arrays.

const MAX_CELLS: usize = 1 << 23;

#[derive(Clone, Debug)]
pub struct SpatialGrid {
    dim: usize,
    pts: Vec<f64>,
    origin: Vec<f64>,
    cell: f64,
    shape: Vec<usize>,
    starts: Vec<u32>,
    items: Vec<u32>,
}

impl SpatialGrid {
    /// `pts` is row-major with stride `dim`. `cell` is a target bucket side; it is
    /// enlarged if the bounding box would need too many buckets.
    pub fn new(dim: usize, pts: &[f64], cell: f64) -> Self {
        assert!(dim > 0 && pts.len().is_multiple_of(dim));
        let count = pts.len() / dim;
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for p in pts.chunks_exact(dim) {
            for k in 0..dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if count == 0 {
            lo = vec![0.0; dim];
            hi = vec![0.0; dim];
        }
        let mut cell = if cell.is_finite() && cell > 0.0 {
            cell
        } else {
            1.0
        };
        let shape = loop {
            let shape: Vec<usize> = (0..dim)
                .map(|k| ((hi[k] - lo[k]) / cell).floor() as usize + 1)
                .collect();
            let total = shape.iter().try_fold(1usize, |acc, s| acc.checked_mul(*s));
            match total {
                Some(t) if t <= MAX_CELLS.max(4 * count) => break shape,
                _ => cell *= 2.0,
            }
        };
        let ncells: usize = shape.iter().product();
        let mut counts = vec![0u32; ncells + 1];
        let mut cell_of = Vec::with_capacity(count);
        for p in pts.chunks_exact(dim) {
            let mut flat = 0usize;
            for k in 0..dim {
                let c = (((p[k] - lo[k]) / cell).floor() as usize).min(shape[k] - 1);
                flat = flat * shape[k] + c;
            }
            counts[flat + 1] += 1;
            cell_of.push(flat);
        }
        for i in 0..ncells {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut items = vec![0u32; count];
        for (i, &c) in cell_of.iter().enumerate() {
            items[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        SpatialGrid {
            dim,
            pts: pts.to_vec(),
            origin: lo,
            cell,
            shape,
            starts: counts,
            items,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.pts[i * self.dim..(i + 1) * self.dim]
    }

    /// Calls `f(index, squared_distance)` for every point with squared distance `<= r2`.
    pub fn for_each_within(&self, p: &[f64], r2: f64, mut f: impl FnMut(usize, f64)) {
        if self.items.is_empty() {
            return;
        }
        let r = r2.max(0.0).sqrt();
        let mut lo = vec![0usize; self.dim];
        let mut hi = vec![0usize; self.dim];
        for k in 0..self.dim {
            let a = ((p[k] - r - self.origin[k]) / self.cell).floor();
            let b = ((p[k] + r - self.origin[k]) / self.cell).floor();
            if b < 0.0 || a > (self.shape[k] - 1) as f64 {
                return;
            }
            lo[k] = a.max(0.0) as usize;
            hi[k] = (b as usize).min(self.shape[k] - 1);
        }
        let mut idx = lo.clone();
        loop {
            let flat = idx
                .iter()
                .zip(&self.shape)
                .fold(0usize, |acc, (i, s)| acc * s + i);
            let (s, e) = (self.starts[flat] as usize, self.starts[flat + 1] as usize);
            for &it in &self.items[s..e] {
                let q = self.point(it as usize);
                let d2: f64 = p.iter().zip(q).map(|(x, y)| (x - y) * (x - y)).sum();
                if d2 <= r2 {
                    f(it as usize, d2);
                }
            }
            // odometer over the cell range
            let mut k = self.dim;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                if idx[k] < hi[k] {
                    idx[k] += 1;
                    break;
                }
                idx[k] = lo[k];
            }
        }
    }

    /// Nearest point within `max_r`, as `(index, distance)`. Among points at the same
    /// distance (within `1e-12`) the one ranked least by `tie` wins.
    pub fn nearest_by(
        &self,
        p: &[f64],
        max_r: f64,
        tie: impl Fn(usize, usize) -> std::cmp::Ordering,
    ) -> Option<(usize, f64)> {
        if self.items.is_empty() {
            return None;
        }
        let mut r = self.cell.min(max_r);
        loop {
            let mut best: Option<(usize, f64)> = None;
            self.for_each_within(p, r * r, |i, d2| {
                best = match best {
                    None => Some((i, d2)),
                    Some((j, e2)) => {
                        let (d, e) = (d2.sqrt(), e2.sqrt());
                        if d < e - 1e-12 || ((d - e).abs() <= 1e-12 && tie(i, j).is_lt()) {
                            Some((i, d2))
                        } else {
                            Some((j, e2))
                        }
                    }
                };
            });
            if let Some((i, d2)) = best {
                if d2.sqrt() + 1e-12 <= r || r >= max_r {
                    return Some((i, d2.sqrt()));
                }
            } else if r >= max_r {
                return None;
            }
            r = (r * 2.0).min(max_r);
        }
    }

    pub fn nearest(&self, p: &[f64], max_r: f64) -> Option<(usize, f64)> {
        self.nearest_by(p, max_r, |a, b| a.cmp(&b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_query_matches_brute_force() {
        let pts: Vec<f64> = (0..200)
            .flat_map(|i| [(i % 17) as f64 * 0.7, (i / 17) as f64 * 1.3])
            .collect();
        let g = SpatialGrid::new(2, &pts, 1.0);
        let q = [3.1, 4.4];
        let mut got = vec![];
        g.for_each_within(&q, 4.0, |i, _| got.push(i));
        got.sort();
        let want: Vec<usize> = (0..200)
            .filter(|&i| {
                let p = &pts[2 * i..2 * i + 2];
                (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) <= 4.0
            })
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn nearest_expands_and_breaks_ties() {
        let pts = vec![-2.0, 2.0, 10.0];
        let g = SpatialGrid::new(1, &pts, 0.5);
        assert_eq!(g.nearest(&[0.0], 100.0), Some((0, 2.0)));
        let (i, _) = g.nearest_by(&[0.0], 100.0, |a, b| b.cmp(&a)).unwrap();
        assert_eq!(i, 1);
        assert_eq!(g.nearest(&[6.5], 3.0), None);
        assert_eq!(g.nearest(&[6.5], 4.0), Some((2, 3.5)));
    }
}
