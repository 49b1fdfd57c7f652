//! Local weight distributions, sampled upper/lower/median densities, and
//! patch-frequency estimates.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::atlas::{patch_key_at, PatchShape};
use crate::error::{invalid, Error, Result};
use crate::generators::{rho_sequence, Construction, PointSetSource, TwoColoring};
use crate::pointset::{ExactPointSet, PatchKey, PointCloud};
use crate::region::{BoxRegion, Region};

/// Minimum number of lattice placements of a side-`U` box required at every `U`.
pub const MIN_BOXES: usize = 30;
/// Random boxes added per `U`.
pub const RANDOM_BOXES: usize = 200;

/// Declared constants of the three error bounds of a weight distribution:
/// `|w(B)| <= volume vol(B)`, translation defect `<= translation sigma(B)`,
/// additivity defect `<= additivity sigma(B)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeightConstants {
    pub volume: f64,
    pub translation: f64,
    pub additivity: f64,
}

/// A box function `w(B)` in `R^k`.
pub trait WeightDistribution: Sync {
    fn dimension(&self) -> usize;
    /// Number of components of `w(B)`.
    fn components(&self) -> usize {
        1
    }
    /// Boxes must be wider than this.
    fn u0(&self) -> f64;
    fn constants(&self) -> WeightConstants;
    fn evaluate(&self, b: &BoxRegion) -> Result<Vec<f64>>;
}

/// `w(B) = vol(B)`.
#[derive(Clone, Debug)]
pub struct VolumeWeight {
    pub n: usize,
}

impl WeightDistribution for VolumeWeight {
    fn dimension(&self) -> usize {
        self.n
    }
    fn u0(&self) -> f64 {
        0.0
    }
    fn constants(&self) -> WeightConstants {
        WeightConstants {
            volume: 1.0,
            translation: 0.0,
            additivity: 0.0,
        }
    }
    fn evaluate(&self, b: &BoxRegion) -> Result<Vec<f64>> {
        Ok(vec![b.volume()])
    }
}

/// Number of set points in the closed box; the box must lie in the set's window.
#[derive(Clone, Debug)]
pub struct PointCountWeight {
    set: ExactPointSet,
    sorted: Vec<f64>,
    grid: crate::grid::SpatialGrid,
    window: BoxRegion,
}

impl PointCountWeight {
    pub fn new(set: ExactPointSet) -> Result<Self> {
        let window = set
            .region()
            .as_box()
            .cloned()
            .ok_or_else(|| invalid("point-count weight needs a box window"))?;
        let mut sorted = Vec::new();
        if set.dimension() == 1 {
            sorted = set.flat_positions().to_vec();
            sorted.sort_by(f64::total_cmp);
        }
        let grid = set.grid(1.0);
        Ok(PointCountWeight {
            set,
            sorted,
            grid,
            window,
        })
    }
}

fn check_inside(window: &BoxRegion, b: &BoxRegion) -> Result<()> {
    if window.contains_box(b) {
        Ok(())
    } else {
        Err(Error::WindowIncomplete(format!(
            "box {:?}..{:?} leaves the materialized window",
            b.lo(),
            b.hi()
        )))
    }
}

impl WeightDistribution for PointCountWeight {
    fn dimension(&self) -> usize {
        self.set.dimension()
    }
    fn u0(&self) -> f64 {
        0.0
    }
    fn constants(&self) -> WeightConstants {
        // one point per r-ball bounds the count by vol / vol(B(r)); take r >= 1/2 sets
        WeightConstants {
            volume: 1.0 / crate::region::unit_ball_volume(self.dimension())
                * 2f64.powi(self.dimension() as i32),
            translation: 1.0,
            additivity: 1.0,
        }
    }
    fn evaluate(&self, b: &BoxRegion) -> Result<Vec<f64>> {
        check_inside(&self.window, b)?;
        if self.set.dimension() == 1 {
            let lo = self.sorted.partition_point(|x| *x < b.lo()[0]);
            let hi = self.sorted.partition_point(|x| *x <= b.hi()[0]);
            return Ok(vec![(hi - lo) as f64]);
        }
        let center: Vec<f64> = b
            .lo()
            .iter()
            .zip(b.hi())
            .map(|(a, c)| 0.5 * (a + c))
            .collect();
        let r2: f64 = b
            .lo()
            .iter()
            .zip(b.hi())
            .map(|(a, c)| 0.25 * (c - a) * (c - a))
            .sum();
        let mut count = 0usize;
        self.grid
            .for_each_within(&center, r2 * (1.0 + 1e-12), |i, _| {
                if b.contains(self.grid.point(i)) {
                    count += 1;
                }
            });
        Ok(vec![count as f64])
    }
}

/// Number of white lattice points of the two-colored lattice in the closed box.
#[derive(Clone, Debug)]
pub struct WhiteCountWeight {
    pub coloring: TwoColoring,
}

impl WeightDistribution for WhiteCountWeight {
    fn dimension(&self) -> usize {
        self.coloring.dimension()
    }
    fn u0(&self) -> f64 {
        0.0
    }
    fn constants(&self) -> WeightConstants {
        WeightConstants {
            volume: 2f64.powi(self.dimension() as i32),
            translation: 1.0,
            additivity: 1.0,
        }
    }
    fn evaluate(&self, b: &BoxRegion) -> Result<Vec<f64>> {
        let lo: Vec<i64> = b.lo().iter().map(|x| x.ceil() as i64).collect();
        let hi: Vec<i64> = b.hi().iter().map(|x| x.floor() as i64 + 1).collect();
        Ok(vec![self.coloring.white_count(&lo, &hi)? as f64])
    }
}

/// Sampled densities at one box scale.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityRow {
    pub u: f64,
    pub f_plus: Vec<f64>,
    pub f_minus: Vec<f64>,
    /// Median of the sampled box densities.
    pub f_zero: Vec<f64>,
    pub delta: Vec<f64>,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityProfile {
    pub rows: Vec<DensityRow>,
    pub seed: u64,
}

/// Boxes with every side in `[U, 2U]` inside `window`: side-`U` and side-`2U`
/// cubes on a lattice of pitch `U/2`, plus seeded random boxes.
pub fn sample_boxes(window: &BoxRegion, u: f64, seed: u64, stream: u64) -> Result<Vec<BoxRegion>> {
    let n = window.dimension();
    let placements = |side: f64| -> Vec<usize> {
        (0..n)
            .map(|k| {
                let w = window.side(k) - side;
                if w < 0.0 {
                    0
                } else {
                    (w / (u / 2.0)).floor() as usize + 1
                }
            })
            .collect()
    };
    let base = placements(u);
    let admitted: usize = base.iter().product();
    if admitted < MIN_BOXES {
        return Err(Error::InsufficientWindow(format!(
            "window admits {admitted} boxes of side {u}, need {MIN_BOXES}"
        )));
    }
    let mut boxes = Vec::new();
    for side in [u, 2.0 * u] {
        let shape = placements(side);
        let total: usize = shape.iter().product();
        // keep the lattice part bounded; thin it evenly
        let stride = total.div_ceil(4000).max(1);
        for flat in (0..total).step_by(stride) {
            let mut rem = flat;
            let mut lo = vec![0.0; n];
            for k in (0..n).rev() {
                let i = rem % shape[k];
                rem /= shape[k];
                lo[k] = window.lo()[k] + i as f64 * u / 2.0;
            }
            let hi: Vec<f64> = lo.iter().map(|x| x + side).collect();
            boxes.push(BoxRegion::new(lo, hi)?);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    for _ in 0..RANDOM_BOXES {
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        for k in 0..n {
            let s = rng.gen_range(u..=2.0 * u).min(window.side(k));
            let a = window.lo()[k] + rng.gen::<f64>() * (window.side(k) - s);
            lo[k] = a;
            hi[k] = (a + s).min(window.hi()[k]);
        }
        boxes.push(BoxRegion::new(lo, hi)?);
    }
    Ok(boxes)
}

pub fn density_profile(
    w: &dyn WeightDistribution,
    window: &Region,
    us: &[f64],
    seed: u64,
) -> Result<DensityProfile> {
    let window = window
        .as_box()
        .ok_or_else(|| invalid("density profiles need a box window"))?;
    if window.dimension() != w.dimension() {
        return Err(invalid(
            "window dimension differs from the weight distribution's",
        ));
    }
    let mut rows = Vec::with_capacity(us.len());
    for (idx, &u) in us.iter().enumerate() {
        if !(u > w.u0()) {
            return Err(invalid(format!("U = {u} must exceed U0 = {}", w.u0())));
        }
        let boxes = sample_boxes(window, u, seed, idx as u64)?;
        let dens: Vec<Vec<f64>> = boxes
            .par_iter()
            .map(|b| Ok(w.evaluate(b)?.into_iter().map(|x| x / b.volume()).collect()))
            .collect::<Result<_>>()?;
        let k = w.components();
        let mut row = DensityRow {
            u,
            f_plus: vec![],
            f_minus: vec![],
            f_zero: vec![],
            delta: vec![],
            samples: dens.len(),
        };
        for c in 0..k {
            let mut col: Vec<f64> = dens.iter().map(|d| d[c]).collect();
            col.sort_by(f64::total_cmp);
            let (lo, hi) = (col[0], col[col.len() - 1]);
            row.f_plus.push(hi);
            row.f_minus.push(lo);
            row.f_zero.push(col[(col.len() - 1) / 2]);
            row.delta.push(hi - lo);
        }
        rows.push(row);
    }
    Ok(DensityProfile { rows, seed })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrequencyRow {
    pub region: Region,
    /// Points in the region whose patch has the requested key.
    pub n_p: usize,
    /// All points in the region.
    pub points: usize,
    pub volume: f64,
    pub freq: f64,
}

fn check_certified(set: &ExactPointSet, t: f64, d: &Region) -> Result<()> {
    let cert = set
        .region()
        .eroded(t)
        .ok_or_else(|| Error::WindowTooSmall("window does not survive erosion by T".into()))?;
    let (lo, hi) = d.bounds();
    let ok = match &cert {
        Region::Box(b) => b.contains(&lo) && b.contains(&hi),
        Region::Ball { .. } => cert.contains_ball(
            &lo.iter()
                .zip(&hi)
                .map(|(a, b)| 0.5 * (a + b))
                .collect::<Vec<_>>(),
            0.5 * crate::region::dist2(&lo, &hi).sqrt(),
        ),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::WindowTooSmall(
            "region is not inside the T-eroded window".into(),
        ))
    }
}

/// Count of `key` among the T-patches of points in each region.
pub fn patch_frequency(
    set: &ExactPointSet,
    key: &PatchKey,
    t: f64,
    regions: &[Region],
) -> Result<Vec<FrequencyRow>> {
    let grid = set.grid(t.max(0.5));
    regions
        .iter()
        .map(|d| {
            check_certified(set, t, d)?;
            let inside: Vec<usize> = (0..set.len())
                .filter(|&i| d.contains(set.position(i)))
                .collect();
            let n_p = inside
                .par_iter()
                .filter(|&&i| &patch_key_at(set, &grid, i, t, PatchShape::Ball).0 == key)
                .count();
            let volume = d.volume();
            Ok(FrequencyRow {
                region: d.clone(),
                n_p,
                points: inside.len(),
                volume,
                freq: n_p as f64 / volume,
            })
        })
        .collect()
}

/// Every key occurring in `region`, with its count, sorted by key.
pub fn patch_census(
    set: &ExactPointSet,
    t: f64,
    region: &Region,
) -> Result<Vec<(PatchKey, usize)>> {
    check_certified(set, t, region)?;
    let grid = set.grid(t.max(0.5));
    let keys: Vec<PatchKey> = (0..set.len())
        .into_par_iter()
        .filter(|&i| region.contains(set.position(i)))
        .map(|i| patch_key_at(set, &grid, i, t, PatchShape::Ball).0)
        .collect();
    let mut map = std::collections::BTreeMap::new();
    for k in keys {
        *map.entry(k).or_insert(0usize) += 1;
    }
    Ok(map.into_iter().collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct OscillationRow {
    /// Side of the centered cube.
    pub scale: f64,
    pub n_p: usize,
    pub freq: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TwoColorReference {
    /// `rho_1, rho_2, ...` for the listed levels.
    pub rho: Vec<f64>,
    /// Counted white proportion of the centered cube at each scale, as an exact fraction.
    pub white_proportions: Vec<(f64, String, f64)>,
    /// `prod (1 - N / a_j)` over the listed levels.
    pub floor: f64,
    pub white_oscillation: f64,
    pub exceeds_floor: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OscillationReport {
    pub rows: Vec<OscillationRow>,
    /// `max - min` of the frequency over the upper half of the scales.
    pub oscillation: f64,
    pub two_color: Option<TwoColorReference>,
}

/// Frequency of `key` in centered cubes of the given sides.
pub fn oscillation_probe(
    source: &PointSetSource,
    key: &PatchKey,
    t: f64,
    scales: &[f64],
) -> Result<OscillationReport> {
    if scales.is_empty() || scales.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("scales must be nonempty and increasing"));
    }
    let n = source.dimension();
    let last = *scales.last().unwrap();
    let set = source.materialize(&Region::centered_cube(n, last / 2.0 + t + 1.0)?)?;
    let regions: Vec<Region> = scales
        .iter()
        .map(|s| Region::centered_cube(n, s / 2.0))
        .collect::<Result<_>>()?;
    let freqs = patch_frequency(&set, key, t, &regions)?;
    let rows: Vec<OscillationRow> = scales
        .iter()
        .zip(&freqs)
        .map(|(s, f)| OscillationRow {
            scale: *s,
            n_p: f.n_p,
            freq: f.freq,
        })
        .collect();
    let upper = &rows[rows.len() / 2..];
    let (mn, mx) = upper
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| {
            (a.min(r.freq), b.max(r.freq))
        });
    let two_color = match source.construction() {
        Construction::TwoColor(p) => Some(two_color_reference(p, scales)?),
        _ => None,
    };
    Ok(OscillationReport {
        rows,
        oscillation: mx - mn,
        two_color,
    })
}

fn two_color_reference(
    p: &crate::generators::TwoColorParams,
    scales: &[f64],
) -> Result<TwoColorReference> {
    let coloring = TwoColoring::new(p)?;
    let rho = rho_sequence(p, p.a.len())?;
    let floor = rho
        .products()
        .last()
        .and_then(|x| x.to_f64())
        .unwrap_or(0.0);
    let mut white = Vec::new();
    for &s in scales {
        let h = (s / 2.0).round() as i64;
        let q: BigRational = coloring.centered_proportion(h)?;
        white.push((s, q.to_string(), q.to_f64().unwrap_or(f64::NAN)));
    }
    let (mn, mx) = white
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), w| {
            (a.min(w.2), b.max(w.2))
        });
    let osc = mx - mn;
    Ok(TwoColorReference {
        rho: rho.values_f64()[1..].to_vec(),
        white_proportions: white,
        floor,
        white_oscillation: osc,
        exceeds_floor: osc >= floor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::compute_atlas;
    use crate::generators::TwoColorParams;

    #[test]
    fn volume_weight_is_flat() {
        let w = VolumeWeight { n: 2 };
        let p = density_profile(
            &w,
            &Region::centered_cube(2, 50.0).unwrap(),
            &[2.0, 5.0, 10.0],
            0,
        )
        .unwrap();
        for r in &p.rows {
            assert_eq!(r.delta, vec![0.0]);
            assert!((r.f_plus[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn integer_count_bracket() {
        let set = PointSetSource::integer_lattice(1, vec![])
            .unwrap()
            .materialize(&Region::interval(-400.0, 400.0).unwrap())
            .unwrap();
        let w = PointCountWeight::new(set).unwrap();
        let us = [2.0, 4.0, 8.0, 16.0, 32.0];
        let p = density_profile(&w, &Region::interval(-400.0, 400.0).unwrap(), &us, 7).unwrap();
        for r in &p.rows {
            assert!(r.delta[0] <= 2.0 / r.u + 1e-12, "{r:?}");
            assert!(r.f_minus[0] <= r.f_zero[0] && r.f_zero[0] <= r.f_plus[0]);
        }
        // deterministic under the seed
        let q = density_profile(&w, &Region::interval(-400.0, 400.0).unwrap(), &us, 7).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn too_small_window() {
        let w = VolumeWeight { n: 1 };
        let e = density_profile(&w, &Region::interval(0.0, 10.0).unwrap(), &[5.0], 0);
        assert!(matches!(e, Err(Error::InsufficientWindow(_))));
    }

    #[test]
    fn box_incomplete() {
        let set = PointSetSource::integer_lattice(1, vec![])
            .unwrap()
            .materialize(&Region::interval(0.0, 10.0).unwrap())
            .unwrap();
        let w = PointCountWeight::new(set).unwrap();
        assert!(matches!(
            w.evaluate(&BoxRegion::new(vec![5.0], vec![12.0]).unwrap()),
            Err(Error::WindowIncomplete(_))
        ));
    }

    #[test]
    fn integer_frequencies() {
        let set = PointSetSource::integer_lattice(1, vec![])
            .unwrap()
            .materialize(&Region::interval(-30.0, 30.0).unwrap())
            .unwrap();
        let key = compute_atlas(&set, 1.5).unwrap().classes[0].key.clone();
        let rows = patch_frequency(
            &set,
            &key,
            1.5,
            &[
                Region::new_ball(vec![0.0], 10.0).unwrap(),
                Region::new_ball(vec![0.5], 10.0).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!((rows[0].n_p, rows[1].n_p), (21, 20));
        assert_eq!(rows[0].volume, 20.0);
    }

    #[test]
    fn census_partitions_points() {
        let set = PointSetSource::fibonacci()
            .materialize(&Region::interval(-100.0, 100.0).unwrap())
            .unwrap();
        let d = Region::interval(-50.0, 60.0).unwrap();
        let census = patch_census(&set, 3.3, &d).unwrap();
        let total: usize = census.iter().map(|c| c.1).sum();
        assert_eq!(total, set.restrict(&d).len());
        let rows = patch_frequency(&set, &census[0].0, 3.3, &[d]).unwrap();
        assert_eq!(rows[0].n_p, census[0].1);
    }

    #[test]
    fn fibonacci_frequencies_settle() {
        let src = PointSetSource::fibonacci();
        let set = src
            .materialize(&Region::interval(-10.0, 10.0).unwrap())
            .unwrap();
        let key = compute_atlas(&set, 1.2).unwrap().classes[0].key.clone();
        let r =
            oscillation_probe(&src, &key, 1.2, &[500.0, 1000.0, 2000.0, 4000.0, 8000.0]).unwrap();
        assert!(r.oscillation < 1e-2, "{r:?}");
        assert!(r.two_color.is_none());
    }

    #[test]
    fn two_color_white_density_oscillates() {
        let mut p = TwoColorParams::new(1, vec![16, 32, 64]);
        // the probe window reaches one level past the listed ones
        p.extend_side_factor = Some(2);
        let c = TwoColoring::new(&p).unwrap();
        let w = WhiteCountWeight {
            coloring: c.clone(),
        };
        let ctr = density_profile(
            &w,
            &Region::interval(0.0, 16.0 * 32.0 * 64.0 - 1.0).unwrap(),
            &[16.0, 64.0, 256.0, 1024.0],
            1,
        )
        .unwrap();
        let floor = 0.5 * 0.75 * 0.875;
        assert!(ctr.rows.iter().all(|r| r.delta[0] >= floor), "{ctr:?}");

        let src = PointSetSource::two_color(p).unwrap();
        let probe_set = src
            .materialize(&Region::interval(-6.0, 6.0).unwrap())
            .unwrap();
        let key = compute_atlas(&probe_set, 1.0 + 1e-6).unwrap().classes[0]
            .key
            .clone();
        let r = oscillation_probe(&src, &key, 1.0 + 1e-6, &[32.0, 1024.0, 65536.0]).unwrap();
        let tc = r.two_color.unwrap();
        assert_eq!(
            tc.white_proportions
                .iter()
                .map(|w| w.1.clone())
                .collect::<Vec<_>>(),
            vec!["1/4", "11/16", "43/128"]
        );
        assert!(tc.exceeds_floor);
    }
}
