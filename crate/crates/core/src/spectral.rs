//! Finite-window autocorrelation and its cosine transform on a wave-vector grid.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::pointset::{ExactPointSet, PointCloud};
use crate::region::unit_ball_volume;

/// Largest imaginary part tolerated before it is discarded.
pub const IMAGINARY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Atom {
    /// Exact address difference.
    pub address: Vec<i64>,
    pub vector: Vec<f64>,
    pub weight: f64,
}

/// `(1 / (kappa_n T^n)) sum delta_{x1 - x2}` over pairs with `|x_i - c| < T`.
#[derive(Clone, Debug, Serialize)]
pub struct Autocorrelation {
    pub t: f64,
    pub center: Vec<f64>,
    pub normalization: f64,
    /// Points strictly inside the ball.
    pub points: usize,
    /// Sorted by address.
    pub atoms: Vec<Atom>,
}

impl Autocorrelation {
    pub fn weight_at(&self, address: &[i64]) -> Option<f64> {
        self.atoms
            .binary_search_by(|a| a.address.as_slice().cmp(address))
            .ok()
            .map(|i| self.atoms[i].weight)
    }

    pub fn dimension(&self) -> usize {
        self.center.len()
    }
}

/// Pair sum over the points with `|x - center| < T` (strict). `center`
/// defaults to the origin; `max_difference` drops longer difference vectors.
pub fn autocorrelation(
    set: &ExactPointSet,
    t: f64,
    center: Option<&[f64]>,
    max_difference: Option<f64>,
) -> Result<Autocorrelation> {
    let n = set.dimension();
    if !(t > 0.0) {
        return Err(invalid("T must be positive"));
    }
    let c: Vec<f64> = center.map(|c| c.to_vec()).unwrap_or_else(|| vec![0.0; n]);
    if c.len() != n {
        return Err(invalid("center has the wrong dimension"));
    }
    if !set.region().contains_ball(&c, t) {
        return Err(Error::WindowTooSmall(format!(
            "B(center; {t}) is not inside the window"
        )));
    }
    let inside: Vec<usize> = (0..set.len())
        .filter(|&i| crate::region::dist2(set.position(i), &c) < t * t)
        .collect();
    let cut2 = max_difference.map(|m| m * m);
    let s = set.rank();
    let counts: HashMap<Vec<i64>, u64> = inside
        .par_chunks(64)
        .map(|chunk| {
            let mut local: HashMap<Vec<i64>, u64> = HashMap::new();
            for &i in chunk {
                for &j in &inside {
                    if let Some(c2) = cut2 {
                        if crate::region::dist2(set.position(i), set.position(j)) > c2 {
                            continue;
                        }
                    }
                    let d: Vec<i64> = (0..s)
                        .map(|k| set.address(i)[k] - set.address(j)[k])
                        .collect();
                    *local.entry(d).or_insert(0) += 1;
                }
            }
            local
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    let norm = unit_ball_volume(n) * t.powi(n as i32);
    let mut atoms: Vec<Atom> = counts
        .into_iter()
        .map(|(address, count)| Atom {
            vector: set.projection().apply(&address),
            address,
            weight: count as f64 / norm,
        })
        .collect();
    atoms.sort_by(|a, b| a.address.cmp(&b.address));
    Ok(Autocorrelation {
        t,
        center: c,
        normalization: norm,
        points: inside.len(),
        atoms,
    })
}

/// Uniform wave-vector grid: `lo + i * pitch` per axis, `shape[k]` points on axis `k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WaveGrid {
    pub lo: Vec<f64>,
    pub pitch: f64,
    pub shape: Vec<usize>,
}

impl WaveGrid {
    /// Grid covering `[lo, hi]` per axis.
    pub fn covering(lo: Vec<f64>, hi: &[f64], pitch: f64) -> Result<Self> {
        if !(pitch > 0.0) || lo.len() != hi.len() || lo.is_empty() {
            return Err(invalid(
                "wave grid needs a positive pitch and matching bounds",
            ));
        }
        let shape = lo
            .iter()
            .zip(hi)
            .map(|(a, b)| {
                if b < a {
                    Err(invalid("wave grid bounds reversed"))
                } else {
                    Ok(((b - a) / pitch + 1e-9).floor() as usize + 1)
                }
            })
            .collect::<Result<_>>()?;
        Ok(WaveGrid { lo, pitch, shape })
    }

    pub fn dimension(&self) -> usize {
        self.lo.len()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, flat: usize) -> Vec<usize> {
        let mut rem = flat;
        let mut idx = vec![0; self.shape.len()];
        for k in (0..self.shape.len()).rev() {
            idx[k] = rem % self.shape[k];
            rem /= self.shape[k];
        }
        idx
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.index(flat)
            .iter()
            .zip(&self.lo)
            .map(|(&i, a)| a + i as f64 * self.pitch)
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumEstimate {
    pub grid: WaveGrid,
    pub intensity: Vec<f64>,
    pub t: f64,
    /// Largest discarded imaginary part.
    pub max_imaginary: f64,
}

impl SpectrumEstimate {
    pub fn wave_vector(&self, flat: usize) -> Vec<f64> {
        self.grid.point(flat)
    }
}

/// `sum_v w(v) cos(2 pi k.v)` at every grid point: an estimate at finite `T`,
/// not the diffraction measure itself.
pub fn diffraction_estimate(ac: &Autocorrelation, grid: &WaveGrid) -> Result<SpectrumEstimate> {
    if grid.dimension() != ac.dimension() {
        return Err(invalid(
            "wave grid dimension differs from the autocorrelation's",
        ));
    }
    let tau = 2.0 * std::f64::consts::PI;
    let vals: Vec<(f64, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|f| {
            let k = grid.point(f);
            ac.atoms.iter().fold((0.0, 0.0), |(re, im), a| {
                let ph = tau * k.iter().zip(&a.vector).map(|(x, y)| x * y).sum::<f64>();
                (re + a.weight * ph.cos(), im + a.weight * ph.sin())
            })
        })
        .collect();
    let max_imaginary = vals.iter().map(|v| v.1.abs()).fold(0.0, f64::max);
    if max_imaginary >= IMAGINARY_TOLERANCE {
        return Err(Error::DegenerateGeometry(format!(
            "imaginary residue {max_imaginary:e} exceeds {IMAGINARY_TOLERANCE:e}; autocorrelation is not symmetric"
        )));
    }
    Ok(SpectrumEstimate {
        grid: grid.clone(),
        intensity: vals.into_iter().map(|v| v.0).collect(),
        t: ac.t,
        max_imaginary,
    })
}

/// Grid local maxima with intensity `>= threshold_ratio * max`. A point must be
/// `>=` all grid neighbours and strictly above the neighbours that precede it
/// in lexicographic order, so a plateau reports its first point.
pub fn detect_peaks(est: &SpectrumEstimate, threshold_ratio: f64) -> Vec<Vec<f64>> {
    let g = &est.grid;
    let n = g.dimension();
    let max = est
        .intensity
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let cut = threshold_ratio * max;
    let strides: Vec<usize> = (0..n).map(|k| g.shape[k + 1..].iter().product()).collect();
    let mut out = Vec::new();
    for f in 0..g.len() {
        let v = est.intensity[f];
        if v < cut {
            continue;
        }
        let idx = g.index(f);
        if is_peak(est, &idx, &strides, f, v) {
            out.push(g.point(f));
        }
    }
    out
}

fn is_peak(est: &SpectrumEstimate, idx: &[usize], strides: &[usize], f: usize, v: f64) -> bool {
    let n = idx.len();
    let shape = &est.grid.shape;
    // 1-D: walk the plateau so that only its first point can qualify
    if n == 1 {
        if f > 0 && est.intensity[f - 1] >= v {
            return false;
        }
        let mut j = f + 1;
        while j < est.intensity.len() && est.intensity[j] == v {
            j += 1;
        }
        return j == est.intensity.len() || est.intensity[j] < v;
    }
    for code in 0..3usize.pow(n as u32) {
        let mut rem = code;
        let mut off = 0isize;
        let mut earlier = None;
        let mut valid = true;
        for k in 0..n {
            let d = (rem % 3) as isize - 1;
            rem /= 3;
            let c = idx[k] as isize + d;
            if c < 0 || c >= shape[k] as isize {
                valid = false;
                break;
            }
            off += d * strides[k] as isize;
            if earlier.is_none() && d != 0 {
                earlier = Some(d < 0);
            }
        }
        let Some(before) = earlier else { continue };
        if !valid {
            continue;
        }
        let w = est.intensity[(f as isize + off) as usize];
        if w > v || (before && w == v) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::PointSetSource;
    use crate::region::Region;

    fn z_ac() -> Autocorrelation {
        let set = PointSetSource::integer_lattice(1, vec![])
            .unwrap()
            .materialize(&Region::interval(-15.0, 15.0).unwrap())
            .unwrap();
        autocorrelation(&set, 10.0, None, None).unwrap()
    }

    #[test]
    fn integer_atoms() {
        let ac = z_ac();
        assert_eq!(ac.points, 19);
        assert_eq!(ac.weight_at(&[0]), Some(0.95));
        for m in -18i64..=18 {
            assert_eq!(ac.weight_at(&[m]).unwrap(), (19 - m.abs()) as f64 / 20.0);
            assert_eq!(ac.weight_at(&[m]), ac.weight_at(&[-m]));
        }
        assert_eq!(ac.weight_at(&[19]), None);
    }

    #[test]
    fn integer_diffraction() {
        let ac = z_ac();
        let g = WaveGrid {
            lo: vec![0.0],
            pitch: 0.5,
            shape: vec![3],
        };
        let s = diffraction_estimate(&ac, &g).unwrap();
        assert!((s.intensity[0] - 18.05).abs() < 1e-9);
        assert!((s.intensity[1] - 0.05).abs() < 1e-9);
        assert!((s.intensity[2] - 18.05).abs() < 1e-9);
        let sym = diffraction_estimate(
            &ac,
            &WaveGrid {
                lo: vec![-0.37],
                pitch: 0.74,
                shape: vec![2],
            },
        )
        .unwrap();
        assert!((sym.intensity[0] - sym.intensity[1]).abs() < 1e-12);
    }

    #[test]
    fn integer_peaks() {
        let ac = z_ac();
        let g = WaveGrid::covering(vec![0.0], &[3.0], 0.01).unwrap();
        let s = diffraction_estimate(&ac, &g).unwrap();
        let peaks = detect_peaks(&s, 0.5);
        assert_eq!(peaks.len(), 4);
        for (p, want) in peaks.iter().zip([0.0, 1.0, 2.0, 3.0]) {
            assert!((p[0] - want).abs() <= 0.01);
        }
    }

    #[test]
    fn plateau_convention() {
        let g = WaveGrid {
            lo: vec![0.0],
            pitch: 1.0,
            shape: vec![5],
        };
        let flat = SpectrumEstimate {
            grid: g.clone(),
            intensity: vec![1.0; 5],
            t: 1.0,
            max_imaginary: 0.0,
        };
        assert_eq!(detect_peaks(&flat, 0.5), vec![vec![0.0]]);
        let two = SpectrumEstimate {
            grid: WaveGrid {
                lo: vec![0.0, 0.0],
                pitch: 1.0,
                shape: vec![3, 3],
            },
            intensity: vec![1.0; 9],
            t: 1.0,
            max_imaginary: 0.0,
        };
        assert_eq!(detect_peaks(&two, 0.5), vec![vec![0.0, 0.0]]);
    }

    #[test]
    fn single_point_and_window_checks() {
        let set = PointSetSource::integer_lattice(1, vec![])
            .unwrap()
            .materialize(&Region::interval(-5.0, 5.0).unwrap())
            .unwrap();
        let ac = autocorrelation(&set, 0.5, None, None).unwrap();
        assert_eq!(ac.atoms.len(), 1);
        assert!(autocorrelation(&set, 6.0, None, None).is_err());
        let off = autocorrelation(&set, 2.0, Some(&[0.5]), None).unwrap();
        assert_eq!(off.points, 4);
    }

    #[test]
    fn fibonacci_support_and_peaks() {
        let src = PointSetSource::fibonacci();
        let peaks_at = |t: f64| {
            let set = src
                .materialize(&Region::interval(-t - 1.0, t + 1.0).unwrap())
                .unwrap();
            let ac = autocorrelation(&set, t, None, None).unwrap();
            for a in &ac.atoms {
                assert_eq!(
                    ac.weight_at(&a.address.iter().map(|x| -x).collect::<Vec<_>>()),
                    Some(a.weight)
                );
            }
            let s =
                diffraction_estimate(&ac, &WaveGrid::covering(vec![0.0], &[2.0], 0.01).unwrap())
                    .unwrap();
            detect_peaks(&s, 0.3)
        };
        let a = peaks_at(100.0);
        let b = peaks_at(200.0);
        assert_eq!(a.len(), b.len());
        for (p, q) in a.iter().zip(&b) {
            assert!((p[0] - q[0]).abs() <= 0.02 + 1e-12, "{a:?} {b:?}");
        }
    }
}
