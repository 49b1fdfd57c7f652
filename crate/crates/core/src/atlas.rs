//! T-patches, exact translation classes and the patch-counting function.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::PointSetSource;
use crate::pointset::{delone_constants, ExactPointSet, PatchKey, PointCloud};
use crate::region::Region;

/// Squared-norm band around `T^2` in which a difference vector is flagged.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

/// Closed ball of radius `T`, or closed axis-parallel cube of side `T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatchShape {
    Ball,
    Cube,
}

impl PatchShape {
    /// Euclidean reach of the patch around its center.
    fn reach(self, t: f64, n: usize) -> f64 {
        match self {
            PatchShape::Ball => t,
            PatchShape::Cube => t * (n as f64).sqrt() / 2.0,
        }
    }

    /// `(inside, flagged)` for a projected difference vector.
    fn classify(self, v: &[f64], t: f64) -> (bool, bool) {
        match self {
            PatchShape::Ball => {
                let d2: f64 = v.iter().map(|x| x * x).sum();
                let t2 = t * t;
                (
                    d2 <= t2 + BOUNDARY_TOLERANCE,
                    (d2 - t2).abs() < BOUNDARY_TOLERANCE,
                )
            }
            PatchShape::Cube => {
                let h = t / 2.0;
                let inside = v.iter().all(|x| x.abs() <= h + BOUNDARY_TOLERANCE);
                let flagged = inside && v.iter().any(|x| (x.abs() - h).abs() < BOUNDARY_TOLERANCE);
                (inside, flagged)
            }
        }
    }
}

/// One translation class of T-patches.
#[derive(Clone, Debug, Serialize)]
pub struct PatchClass {
    pub key: PatchKey,
    /// Indices (into the analysed set) of the points whose patch has this key.
    pub centers: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryFlag {
    pub center: usize,
    pub distance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AtlasResult {
    pub t: f64,
    pub shape: PatchShape,
    /// Sorted by key.
    pub classes: Vec<PatchClass>,
    /// Window eroded by the patch reach; every point in it was classified.
    pub certified_region: Region,
    pub boundary_flags: Vec<BoundaryFlag>,
}

impl AtlasResult {
    /// Number of classes: a lower bound for the patch count of the whole set.
    pub fn count(&self) -> usize {
        self.classes.len()
    }

    pub fn is_flagged(&self) -> bool {
        !self.boundary_flags.is_empty()
    }

    pub fn center_count(&self) -> usize {
        self.classes.iter().map(|c| c.centers.len()).sum()
    }

    pub fn class_of(&self, key: &PatchKey) -> Option<&PatchClass> {
        self.classes
            .binary_search_by(|c| c.key.cmp(key))
            .ok()
            .map(|i| &self.classes[i])
    }
}

pub fn compute_atlas(set: &ExactPointSet, t: f64) -> Result<AtlasResult> {
    atlas_with_shape(set, t, PatchShape::Ball)
}

/// Patches cut out by the closed cube of side `T` centered at each point.
pub fn cubical_atlas(set: &ExactPointSet, t: f64) -> Result<AtlasResult> {
    atlas_with_shape(set, t, PatchShape::Cube)
}

/// Patch key of point `i`, using a grid built over the set. Returns the key and
/// the smallest flagged distance, if any.
pub(crate) fn patch_key_at(
    set: &ExactPointSet,
    grid: &crate::grid::SpatialGrid,
    i: usize,
    t: f64,
    shape: PatchShape,
) -> (PatchKey, Option<f64>) {
    let s = set.rank();
    let n = set.dimension();
    let reach = shape.reach(t, n);
    let search = reach + 1e-6;
    let center = set.address(i);
    let proj = set.projection();
    let mut diffs: Vec<Vec<i64>> = Vec::new();
    let mut flag: Option<f64> = None;
    let mut v = vec![0.0; n];
    let mut d = vec![0i64; s];
    grid.for_each_within(set.position(i), search * search, |j, _| {
        for (k, x) in d.iter_mut().enumerate() {
            *x = set.address(j)[k] - center[k];
        }
        // decide on the projection of the integer difference, so translates agree exactly
        proj.apply_into(&d, &mut v);
        let (inside, flagged) = shape.classify(&v, t);
        if inside {
            diffs.push(d.clone());
        }
        if flagged {
            let dist = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            flag = Some(flag.map_or(dist, |f: f64| f.min(dist)));
        }
    });
    diffs.sort_unstable();
    (PatchKey::from_sorted_flat(s, diffs.concat()), flag)
}

fn atlas_with_shape(set: &ExactPointSet, t: f64, shape: PatchShape) -> Result<AtlasResult> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(crate::error::invalid(format!(
            "T must be positive, got {t}"
        )));
    }
    let n = set.dimension();
    let reach = shape.reach(t, n);
    let certified = set.region().eroded(reach).ok_or_else(|| {
        Error::WindowTooSmall(format!("window does not survive erosion by {reach}"))
    })?;
    let grid = set.grid(reach.max(0.5));
    let inner: Vec<usize> = (0..set.len())
        .filter(|&i| certified.contains(set.position(i)))
        .collect();
    let keyed: Vec<(PatchKey, usize, Option<f64>)> = inner
        .par_iter()
        .map(|&i| {
            let (k, f) = patch_key_at(set, &grid, i, t, shape);
            (k, i, f)
        })
        .collect();
    let mut groups: BTreeMap<PatchKey, Vec<usize>> = BTreeMap::new();
    let mut flags = Vec::new();
    for (k, i, f) in keyed {
        if let Some(distance) = f {
            flags.push(BoundaryFlag {
                center: i,
                distance,
            });
        }
        groups.entry(k).or_default().push(i);
    }
    let classes = groups
        .into_iter()
        .map(|(key, centers)| PatchClass { key, centers })
        .collect();
    Ok(AtlasResult {
        t,
        shape,
        classes,
        certified_region: certified,
        boundary_flags: flags,
    })
}

/// How the window grows while searching for a stable class count.
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct WindowPolicy {
    /// Initial half-side of the centered window; `None` means `50 R`.
    pub initial: Option<f64>,
    pub growth: f64,
    /// Maximum number of growth steps.
    pub budget: u32,
    /// Maximum number of points materialized in one window.
    pub max_points: usize,
}

impl Default for WindowPolicy {
    fn default() -> Self {
        WindowPolicy {
            initial: None,
            growth: 2.0,
            budget: 4,
            max_points: 4_000_000,
        }
    }
}

impl WindowPolicy {
    /// Initial half-side, estimating `R` on a probe window when unset.
    pub fn initial_half(&self, source: &PointSetSource) -> Result<f64> {
        if let Some(h) = self.initial {
            return Ok(h);
        }
        let n = source.dimension();
        let mut h = 8.0;
        loop {
            let probe = source.materialize(&Region::centered_cube(n, h)?)?;
            if let Ok(c) = delone_constants(&probe) {
                if c.certified_region.is_some() && c.big_r < h / 2.0 {
                    return Ok(50.0 * c.big_r);
                }
            }
            h *= 2.0;
            if h > 1e4 {
                return Err(Error::BudgetExhausted(
                    "could not estimate R for the window policy".into(),
                ));
            }
        }
    }

    pub(crate) fn check_points(&self, n: usize, half: f64, density_hint: f64) -> Result<()> {
        let est = (2.0 * half).powi(n as i32) * density_hint;
        if est > self.max_points as f64 {
            return Err(Error::BudgetExhausted(format!(
                "window of half-side {half} would hold about {est:.0} points"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileEntry {
    pub t: f64,
    pub n_lower: usize,
    pub stabilized: bool,
    /// Half-side of the last window used.
    pub half_side: f64,
    pub flagged: bool,
}

/// Class counts for each `T`, growing a centered window until the count
/// survives one growth step unchanged.
pub fn patch_count_profile(
    source: &PointSetSource,
    ts: &[f64],
    policy: &WindowPolicy,
) -> Result<Vec<ProfileEntry>> {
    if ts.iter().any(|t| !(*t > 0.0)) || ts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(crate::error::invalid(
            "T values must be positive and increasing",
        ));
    }
    if !(policy.growth > 1.0) {
        return Err(crate::error::invalid("window growth factor must exceed 1"));
    }
    let n = source.dimension();
    let h0 = policy.initial_half(source)?;
    let mut out = Vec::with_capacity(ts.len());
    for &t in ts {
        let mut half = h0.max(2.0 * t);
        let mut prev: Option<usize> = None;
        let mut entry = None;
        let mut density = 0.0;
        for step in 0..=policy.budget {
            if density > 0.0 && policy.check_points(n, half, density).is_err() {
                break;
            }
            let set = source.materialize(&Region::centered_cube(n, half + t)?)?;
            density = set.len() as f64 / (2.0 * (half + t)).powi(n as i32);
            let atlas = compute_atlas(&set, t)?;
            let c = atlas.count();
            let stable = prev == Some(c);
            entry = Some(ProfileEntry {
                t,
                n_lower: c,
                stabilized: stable,
                half_side: half,
                flagged: atlas.is_flagged(),
            });
            if stable || step == policy.budget {
                break;
            }
            prev = Some(c);
            half *= policy.growth;
        }
        out.push(entry.expect("at least one window"));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyProbe {
    /// `(T, log N / T^n)` over stabilized entries.
    pub values: Vec<(f64, f64)>,
    /// Smallest `c0` with `log N <= c0 T^n` on the profile.
    pub c0: f64,
}

pub fn entropy_probe(profile: &[ProfileEntry], n: usize) -> EntropyProbe {
    let values: Vec<(f64, f64)> = profile
        .iter()
        .filter(|e| e.stabilized)
        .map(|e| (e.t, (e.n_lower as f64).ln() / e.t.powi(n as i32)))
        .collect();
    let c0 = values.iter().map(|v| v.1).fold(0.0, f64::max);
    EntropyProbe { values, c0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointset::Projection;
    use std::collections::BTreeSet;

    fn window(src: &PointSetSource, half: f64) -> ExactPointSet {
        src.materialize(&Region::centered_cube(src.dimension(), half).unwrap())
            .unwrap()
    }

    /// Independent brute force: all pairs, Euclidean distances from positions.
    fn oracle_count(set: &ExactPointSet, t: f64, cube: bool) -> usize {
        let n = set.dimension();
        let reach = if cube { t * (n as f64).sqrt() / 2.0 } else { t };
        let cert = set.region().eroded(reach).unwrap();
        let mut keys = BTreeSet::new();
        for i in 0..set.len() {
            if !cert.contains(set.position(i)) {
                continue;
            }
            let mut k: Vec<Vec<i64>> = Vec::new();
            for j in 0..set.len() {
                let d: Vec<f64> = set
                    .position(j)
                    .iter()
                    .zip(set.position(i))
                    .map(|(a, b)| a - b)
                    .collect();
                let inside = if cube {
                    d.iter().all(|x| x.abs() <= t / 2.0 + 1e-9)
                } else {
                    d.iter().map(|x| x * x).sum::<f64>() <= t * t + 1e-9
                };
                if inside {
                    k.push(
                        set.address(j)
                            .iter()
                            .zip(set.address(i))
                            .map(|(a, b)| a - b)
                            .collect(),
                    );
                }
            }
            k.sort();
            keys.insert(k);
        }
        keys.len()
    }

    #[test]
    fn integers_have_one_class() {
        let z = PointSetSource::integer_lattice(1, vec![]).unwrap();
        let set = window(&z, 20.0);
        for t in [0.5, 1.0 + 1e-6, 3.7, 7.0] {
            assert_eq!(compute_atlas(&set, t).unwrap().count(), 1);
        }
        assert_eq!(cubical_atlas(&set, 2.5).unwrap().count(), 1);
    }

    #[test]
    fn fibonacci_three_words() {
        let set = window(&PointSetSource::fibonacci(), 60.0);
        let a = compute_atlas(&set, 1.2).unwrap();
        assert_eq!(a.count(), 3);
        assert!(!a.is_flagged());
        assert_eq!(
            a.center_count(),
            (0..set.len())
                .filter(|&i| a.certified_region.contains(set.position(i)))
                .count()
        );
    }

    #[test]
    fn punctured_plane_matches_oracle() {
        let src = PointSetSource::integer_lattice(2, vec![vec![0, 0]]).unwrap();
        let set = window(&src, 10.0);
        let a = compute_atlas(&set, 1.0).unwrap();
        assert_eq!(a.count(), oracle_count(&set, 1.0, false));
        assert_eq!(a.count(), 5);
        assert!(a.is_flagged());
        let c = cubical_atlas(&set, 2.0).unwrap();
        assert_eq!(c.count(), oracle_count(&set, 2.0, true));
    }

    #[test]
    fn cube_is_half_ball_in_one_dimension() {
        let set = window(&PointSetSource::fibonacci(), 80.0);
        for t in [1.3, 2.9, 4.1, 7.7] {
            assert_eq!(
                cubical_atlas(&set, t).unwrap().count(),
                compute_atlas(&set, t / 2.0).unwrap().count()
            );
        }
    }

    #[test]
    fn translation_invariant_keys() {
        let set = window(&PointSetSource::fibonacci(), 40.0);
        let moved = set.translated(&[3, 5]).unwrap();
        let a = compute_atlas(&set, 2.3).unwrap();
        let b = compute_atlas(&moved, 2.3).unwrap();
        let ka: Vec<_> = a
            .classes
            .iter()
            .map(|c| (&c.key, c.centers.len()))
            .collect();
        let kb: Vec<_> = b
            .classes
            .iter()
            .map(|c| (&c.key, c.centers.len()))
            .collect();
        assert_eq!(ka, kb);
    }

    #[test]
    fn window_too_small() {
        let set = ExactPointSet::new(
            Projection::identity(1),
            vec![vec![0], vec![1]],
            Region::interval(-1.0, 1.0).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            compute_atlas(&set, 1.5),
            Err(Error::WindowTooSmall(_))
        ));
    }

    #[test]
    fn profiles() {
        let z2 = PointSetSource::integer_lattice(2, vec![]).unwrap();
        let p = patch_count_profile(
            &z2,
            &[1.5, 2.5],
            &WindowPolicy {
                initial: Some(6.0),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(p.iter().all(|e| e.n_lower == 1 && e.stabilized));
        assert!(entropy_probe(&p, 2).values.iter().all(|v| v.1 == 0.0));

        let fib = PointSetSource::fibonacci();
        let ts: Vec<f64> = (2..12).map(|k| k as f64 * 0.9 + 1e-6).collect();
        let p = patch_count_profile(&fib, &ts, &WindowPolicy::default()).unwrap();
        assert!(p.windows(2).all(|w| w[0].n_lower <= w[1].n_lower));
        assert!(p.iter().all(|e| e.stabilized));
        let e = entropy_probe(&p, 1);
        assert!(e.values.iter().all(|v| v.1 <= e.c0));
        assert!(e.values.last().unwrap().1 < e.values[0].1);
    }

    #[test]
    fn deleted_lines_bound_at_two() {
        let src = PointSetSource::deleted_lines(vec![4]).unwrap();
        let p = patch_count_profile(
            &src,
            &[2.0 + 1e-6],
            &WindowPolicy {
                initial: Some(10.0),
                budget: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(p[0].n_lower <= 48, "{:?}", p);
    }
}
