//! Finite windows of Delone sets.
//!
//! [`ExactPointSet`] carries integer addresses in `Z^s` together with a linear
//! projection `Z^s -> R^n`, so translation equivalence of patches can be decided
//! on integers. [`FloatPointSet`] holds bare coordinates for imported data.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::SpatialGrid;
use crate::region::{dist2, Region};

/// Image of each address basis vector: `rows[i]` is `pi(e_i)` in R^n.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    dim: usize,
    rows: Vec<Vec<f64>>,
}

impl Projection {
    pub fn new(dim: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be >= 1"));
        }
        if rows.len() < dim {
            return Err(invalid(format!(
                "rank {} is below dimension {dim}",
                rows.len()
            )));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return Err(invalid(format!(
                "projection row has {} entries, expected {dim}",
                r.len()
            )));
        }
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(invalid("projection entries must be finite"));
        }
        Ok(Projection { dim, rows })
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Projection { dim: n, rows }
    }

    /// Block-diagonal combination, used for direct products.
    pub fn block_diagonal(parts: &[&Projection]) -> Self {
        let dim: usize = parts.iter().map(|p| p.dim).sum();
        let mut rows = Vec::new();
        let mut offset = 0;
        for p in parts {
            for r in &p.rows {
                let mut row = vec![0.0; dim];
                row[offset..offset + p.dim].copy_from_slice(r);
                rows.push(row);
            }
            offset += p.dim;
        }
        Projection { dim, rows }
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn apply_into(&self, address: &[i64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (a, row) in address.iter().zip(&self.rows) {
            if *a != 0 {
                let a = *a as f64;
                for (o, r) in out.iter_mut().zip(row) {
                    *o += a * r;
                }
            }
        }
    }

    pub fn apply(&self, address: &[i64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.apply_into(address, &mut out);
        out
    }

    /// `pi(address)`; the address length must equal the rank.
    pub fn project(&self, address: &[i64]) -> Result<Vec<f64>> {
        if address.len() != self.rank() {
            return Err(invalid(format!(
                "address has length {}, projection rank is {}",
                address.len(),
                self.rank()
            )));
        }
        Ok(self.apply(address))
    }
}

/// A translation class representative of a patch: address differences from the
/// patch center, sorted lexicographically, zero vector included.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PatchKey {
    rank: usize,
    entries: Vec<i64>,
}

impl PatchKey {
    /// Builds a key from difference vectors in any order. Fails on duplicates,
    /// wrong lengths, or a missing zero vector.
    pub fn from_differences(rank: usize, mut diffs: Vec<Vec<i64>>) -> Result<Self> {
        if diffs.iter().any(|d| d.len() != rank) {
            return Err(invalid("patch difference vector has the wrong length"));
        }
        diffs.sort();
        if diffs.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("patch key has duplicate difference vectors"));
        }
        if !diffs.iter().any(|d| d.iter().all(|x| *x == 0)) {
            return Err(invalid("patch key must contain the zero vector"));
        }
        Ok(PatchKey {
            rank,
            entries: diffs.concat(),
        })
    }

    /// `flat` holds already-sorted, duplicate-free vectors of stride `rank`.
    pub(crate) fn from_sorted_flat(rank: usize, entries: Vec<i64>) -> Self {
        PatchKey { rank, entries }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Number of points in the patch.
    pub fn len(&self) -> usize {
        if self.rank == 0 {
            0
        } else {
            self.entries.len() / self.rank
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn vectors(&self) -> impl Iterator<Item = &[i64]> {
        self.entries.chunks_exact(self.rank.max(1))
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.vectors().any(|w| w == v)
    }
}

/// Common read access for both point-set representations.
pub trait PointCloud {
    fn dimension(&self) -> usize;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    /// Row-major coordinates with stride `dimension()`.
    fn flat_positions(&self) -> &[f64];
    fn region(&self) -> &Region;
    fn position(&self, i: usize) -> &[f64] {
        let n = self.dimension();
        &self.flat_positions()[i * n..(i + 1) * n]
    }
}

/// A finite window of a Delone set with integer addresses.
///
/// Points are kept sorted by address, which makes set equality a plain
/// comparison of address lists.
#[derive(Clone, Debug)]
pub struct ExactPointSet {
    projection: Projection,
    addresses: Vec<i64>,
    positions: Vec<f64>,
    region: Region,
}

impl ExactPointSet {
    pub fn new(projection: Projection, addresses: Vec<Vec<i64>>, region: Region) -> Result<Self> {
        let s = projection.rank();
        let n = projection.dimension();
        if region.dimension() != n {
            return Err(invalid(format!(
                "region dimension {} differs from set dimension {n}",
                region.dimension()
            )));
        }
        if let Some(a) = addresses.iter().find(|a| a.len() != s) {
            return Err(invalid(format!("address {a:?} does not have length {s}")));
        }
        let mut addresses = addresses;
        addresses.sort_unstable();
        if let Some(w) = addresses.windows(2).find(|w| w[0] == w[1]) {
            return Err(invalid(format!("duplicate address {:?}", w[0])));
        }
        let flat: Vec<i64> = addresses.concat();
        Self::from_sorted_flat(projection, flat, region, true)
    }

    /// Internal constructor: `flat` sorted and duplicate-free with stride `rank`.
    pub(crate) fn from_sorted_flat(
        projection: Projection,
        addresses: Vec<i64>,
        region: Region,
        check_region: bool,
    ) -> Result<Self> {
        let s = projection.rank();
        let n = projection.dimension();
        let count = addresses.len() / s;
        let mut positions = vec![0.0; count * n];
        for (a, p) in addresses.chunks_exact(s).zip(positions.chunks_exact_mut(n)) {
            projection.apply_into(a, p);
        }
        if check_region {
            let slack = 1e-9;
            for (a, p) in addresses.chunks_exact(s).zip(positions.chunks_exact(n)) {
                if !region.contains(p) && !within_slack(&region, p, slack) {
                    return Err(invalid(format!(
                        "point {a:?} projects to {p:?}, outside the region"
                    )));
                }
            }
        }
        Ok(ExactPointSet {
            projection,
            addresses,
            positions,
            region,
        })
    }

    /// Builds from unsorted candidate addresses, keeping those whose projection lies in `region`.
    pub fn from_candidates(
        projection: Projection,
        mut addresses: Vec<Vec<i64>>,
        region: Region,
    ) -> Result<Self> {
        let s = projection.rank();
        if let Some(a) = addresses.iter().find(|a| a.len() != s) {
            return Err(invalid(format!("address {a:?} does not have length {s}")));
        }
        addresses.retain(|a| region.contains(&projection.apply(a)));
        addresses.sort_unstable();
        addresses.dedup();
        Self::from_sorted_flat(projection, addresses.concat(), region, false)
    }

    pub fn rank(&self) -> usize {
        self.projection.rank()
    }

    pub fn projection(&self) -> &Projection {
        &self.projection
    }

    pub fn address(&self, i: usize) -> &[i64] {
        let s = self.rank();
        &self.addresses[i * s..(i + 1) * s]
    }

    pub fn addresses(&self) -> impl Iterator<Item = &[i64]> {
        self.addresses.chunks_exact(self.rank())
    }

    pub fn flat_addresses(&self) -> &[i64] {
        &self.addresses
    }

    pub fn project(&self, address: &[i64]) -> Result<Vec<f64>> {
        self.projection.project(address)
    }

    /// Index of a point by address (binary search).
    pub fn index_of(&self, address: &[i64]) -> Option<usize> {
        let s = self.rank();
        let count = self.len();
        let (mut lo, mut hi) = (0usize, count);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.addresses[mid * s..(mid + 1) * s].cmp(address) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    pub fn contains_address(&self, address: &[i64]) -> bool {
        self.index_of(address).is_some()
    }

    /// Points of this window that lie in `region` (which should sit inside the window).
    pub fn restrict(&self, region: &Region) -> ExactPointSet {
        let s = self.rank();
        let mut kept = Vec::new();
        for i in 0..self.len() {
            if region.contains(self.position(i)) {
                kept.extend_from_slice(&self.addresses[i * s..(i + 1) * s]);
            }
        }
        ExactPointSet::from_sorted_flat(self.projection.clone(), kept, region.clone(), false)
            .expect("restriction of a valid set is valid")
    }

    /// Same set translated by an integer address vector (the window moves along).
    pub fn translated(&self, shift: &[i64]) -> Result<ExactPointSet> {
        if shift.len() != self.rank() {
            return Err(invalid("shift must have the rank's length"));
        }
        let t = self.projection.apply(shift);
        let region = match &self.region {
            Region::Box(b) => Region::Box(b.translated(&t)),
            Region::Ball { center, radius } => Region::Ball {
                center: center.iter().zip(&t).map(|(c, s)| c + s).collect(),
                radius: *radius,
            },
        };
        let s = self.rank();
        let mut flat = self.addresses.clone();
        for a in flat.chunks_exact_mut(s) {
            for (x, d) in a.iter_mut().zip(shift) {
                *x += d;
            }
        }
        ExactPointSet::from_sorted_flat(self.projection.clone(), flat, region, false)
    }

    pub fn grid(&self, cell: f64) -> SpatialGrid {
        SpatialGrid::new(self.dimension(), &self.positions, cell)
    }

    pub fn to_float(&self, tolerance: f64) -> Result<FloatPointSet> {
        FloatPointSet::new(
            self.dimension(),
            self.positions.clone(),
            self.region.clone(),
            tolerance,
        )
    }

    pub fn to_document(&self) -> PointSetDocument {
        PointSetDocument::Exact(ExactDoc {
            dimension: self.dimension(),
            rank: self.rank(),
            projection: self.projection.rows.clone(),
            addresses: self.addresses().map(|a| a.to_vec()).collect(),
            region: self.region.clone(),
            meta: None,
        })
    }
}

fn within_slack(region: &Region, p: &[f64], slack: f64) -> bool {
    match region {
        Region::Box(b) => p
            .iter()
            .zip(b.lo().iter().zip(b.hi()))
            .all(|(x, (a, c))| *a - slack <= *x && *x <= *c + slack),
        Region::Ball { center, radius } => dist2(p, center).sqrt() <= radius + slack,
    }
}

impl PointCloud for ExactPointSet {
    fn dimension(&self) -> usize {
        self.projection.dimension()
    }
    fn len(&self) -> usize {
        self.addresses.len() / self.rank()
    }
    fn flat_positions(&self) -> &[f64] {
        &self.positions
    }
    fn region(&self) -> &Region {
        &self.region
    }
}

impl PartialEq for ExactPointSet {
    fn eq(&self, other: &Self) -> bool {
        self.projection == other.projection
            && self.addresses == other.addresses
            && self.region == other.region
    }
}

/// Imported coordinates with a coincidence tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatPointSet {
    dim: usize,
    points: Vec<f64>,
    region: Region,
    tolerance: f64,
}

impl FloatPointSet {
    /// Rejects points outside `region` and pairs closer than `tolerance`
    /// (the error lists the offending pairs).
    pub fn new(dim: usize, points: Vec<f64>, region: Region, tolerance: f64) -> Result<Self> {
        if dim == 0 || !points.len().is_multiple_of(dim) {
            return Err(invalid("point coordinates do not match the dimension"));
        }
        if region.dimension() != dim {
            return Err(invalid("region dimension differs from set dimension"));
        }
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(invalid(format!("tolerance must be > 0, got {tolerance}")));
        }
        for p in points.chunks_exact(dim) {
            if !within_slack(&region, p, 1e-9) {
                return Err(invalid(format!("point {p:?} lies outside the region")));
            }
        }
        let grid = SpatialGrid::new(dim, &points, tolerance.max(1e-9) * 4.0);
        let mut offenders = Vec::new();
        for (i, p) in points.chunks_exact(dim).enumerate() {
            grid.for_each_within(p, tolerance * tolerance, |j, _| {
                if j > i {
                    offenders.push((i, j));
                }
            });
        }
        if !offenders.is_empty() {
            offenders.sort();
            let listed: Vec<String> = offenders
                .iter()
                .take(20)
                .map(|(i, j)| format!("({i},{j})"))
                .collect();
            return Err(invalid(format!(
                "{} point pair(s) closer than tolerance {tolerance}: {}",
                offenders.len(),
                listed.join(", ")
            )));
        }
        Ok(FloatPointSet {
            dim,
            points,
            region,
            tolerance,
        })
    }

    pub fn from_points(points: &[Vec<f64>], region: Region, tolerance: f64) -> Result<Self> {
        let dim = region.dimension();
        if points.iter().any(|p| p.len() != dim) {
            return Err(invalid(format!(
                "point row length differs from dimension {dim}"
            )));
        }
        Self::new(dim, points.concat(), region, tolerance)
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn to_document(&self) -> PointSetDocument {
        PointSetDocument::Float(FloatDoc {
            dimension: self.dim,
            points: self
                .points
                .chunks_exact(self.dim)
                .map(|p| p.to_vec())
                .collect(),
            region: self.region.clone(),
            tolerance: self.tolerance,
            meta: None,
        })
    }
}

impl PointCloud for FloatPointSet {
    fn dimension(&self) -> usize {
        self.dim
    }
    fn len(&self) -> usize {
        self.points.len() / self.dim
    }
    fn flat_positions(&self) -> &[f64] {
        &self.points
    }
    fn region(&self) -> &Region {
        &self.region
    }
}

/// Delone constants `(r, R)` estimated on a window.
///
/// `r` is half the minimum pairwise distance. `R` is the covering radius of the
/// points over the region eroded by the running estimate, iterated to a fixed
/// point; it is only certified on that eroded region.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeloneConstants {
    pub r: f64,
    pub big_r: f64,
    /// Lower end of the covering-radius bracket (equal to `big_r` in dimension 1).
    pub big_r_lower: f64,
    pub certified_region: Option<Region>,
}

pub fn delone_constants(set: &impl PointCloud) -> Result<DeloneConstants> {
    let n = set.dimension();
    let count = set.len();
    if count < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 points, have {count}"
        )));
    }
    let pts = set.flat_positions();
    let min_d = min_pair_distance(n, pts);
    let r = min_d / 2.0;
    let resolution = r / 4.0;
    let region = set.region().clone();
    let mut est = crate::repetitivity::covering_radius(pts, n, &region, resolution);
    let mut certified = Some(region.clone());
    for _ in 0..8 {
        let Some(eroded) = region.eroded(est.upper) else {
            break;
        };
        let next = crate::repetitivity::covering_radius(pts, n, &eroded, resolution);
        certified = Some(eroded);
        let done = (next.upper - est.upper).abs() <= 1e-12;
        est = next;
        if done {
            break;
        }
    }
    if !(r > 0.0) || !est.upper.is_finite() {
        return Err(Error::InsufficientData(
            "degenerate window for Delone constants".into(),
        ));
    }
    Ok(DeloneConstants {
        r,
        big_r: est.upper,
        big_r_lower: est.lower,
        certified_region: certified,
    })
}

pub(crate) fn min_pair_distance(n: usize, pts: &[f64]) -> f64 {
    let count = pts.len() / n;
    if count < 2 {
        return f64::INFINITY;
    }
    if n == 1 {
        let mut xs = pts.to_vec();
        xs.sort_by(f64::total_cmp);
        return xs
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
    }
    // typical spacing from the bounding box, then a local search with doubling radius
    let (lo, hi) = pts.chunks_exact(n).fold(
        (vec![f64::INFINITY; n], vec![f64::NEG_INFINITY; n]),
        |(mut lo, mut hi), p| {
            for k in 0..n {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
            (lo, hi)
        },
    );
    let vol: f64 = lo.iter().zip(&hi).map(|(a, b)| (b - a).max(1e-9)).product();
    let spacing = (vol / count as f64).powf(1.0 / n as f64).max(1e-9);
    let grid = SpatialGrid::new(n, pts, spacing);
    let mut best = f64::INFINITY;
    for (i, p) in pts.chunks_exact(n).enumerate() {
        let mut r = spacing;
        loop {
            let mut local = f64::INFINITY;
            grid.for_each_within(p, r * r, |j, d2| {
                if j != i {
                    local = local.min(d2);
                }
            });
            if local.is_finite() {
                best = best.min(local.sqrt());
                break;
            }
            r *= 2.0;
        }
    }
    best
}

/// The cut-off distance `d_k` between two closed sets seen through `B(0; k)`.
///
/// Returns the larger one-sided distance from `F1 ∩ B(0;k)` to `F2` and from
/// `F2 ∩ B(0;k)` to `F1`, capped at 1. An empty intersection imposes no
/// condition, so two sets with nothing inside the ball are at distance 0.
/// This is not a metric: the triangle inequality can fail.
pub fn natural_distance(f1: &FloatPointSet, f2: &FloatPointSet, k: f64) -> Result<f64> {
    if f1.dimension() != f2.dimension() {
        return Err(invalid("natural_distance: dimension mismatch"));
    }
    if !(k > 0.0) {
        return Err(invalid("natural_distance: k must be > 0"));
    }
    let one_sided = |a: &FloatPointSet, b: &FloatPointSet| -> f64 {
        let origin = vec![0.0; a.dimension()];
        let mut worst: f64 = 0.0;
        for i in 0..a.len() {
            let p = a.position(i);
            if dist2(p, &origin) > k * k {
                continue;
            }
            let nearest = (0..b.len())
                .map(|j| dist2(p, b.position(j)))
                .fold(f64::INFINITY, f64::min)
                .sqrt();
            worst = worst.max(nearest);
            if worst >= 1.0 {
                break;
            }
        }
        worst
    };
    Ok(one_sided(f1, f2).max(one_sided(f2, f1)).min(1.0))
}

/// JSON body of an exact point-set file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactDoc {
    pub dimension: usize,
    pub rank: usize,
    pub projection: Vec<Vec<f64>>,
    pub addresses: Vec<Vec<i64>>,
    pub region: Region,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloatDoc {
    pub dimension: usize,
    pub points: Vec<Vec<f64>>,
    pub region: Region,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

/// Point-set file: the exact variant carries addresses, the float variant points.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointSetDocument {
    Exact(ExactDoc),
    Float(FloatDoc),
}

/// A decoded point-set file.
#[derive(Clone, Debug)]
pub enum AnyPointSet {
    Exact(ExactPointSet),
    Float(FloatPointSet),
}

impl PointSetDocument {
    pub fn with_meta(mut self, meta: serde_json::Value) -> Self {
        match &mut self {
            PointSetDocument::Exact(d) => d.meta = Some(meta),
            PointSetDocument::Float(d) => d.meta = Some(meta),
        }
        self
    }

    pub fn into_set(self) -> Result<AnyPointSet> {
        match self {
            PointSetDocument::Exact(d) => {
                if d.projection.len() != d.rank {
                    return Err(Error::Schema(format!(
                        "projection has {} rows, header rank is {}",
                        d.projection.len(),
                        d.rank
                    )));
                }
                if let Some((i, _)) = d
                    .projection
                    .iter()
                    .enumerate()
                    .find(|(_, r)| r.len() != d.dimension)
                {
                    return Err(Error::Schema(format!(
                        "projection row {i} has wrong length for dimension {}",
                        d.dimension
                    )));
                }
                if let Some((i, a)) = d
                    .addresses
                    .iter()
                    .enumerate()
                    .find(|(_, a)| a.len() != d.rank)
                {
                    return Err(Error::Schema(format!(
                        "address row {i} has {} entries, rank is {}",
                        a.len(),
                        d.rank
                    )));
                }
                if d.region.dimension() != d.dimension {
                    return Err(Error::Schema(
                        "region dimension differs from header dimension".into(),
                    ));
                }
                let proj = Projection::new(d.dimension, d.projection)?;
                Ok(AnyPointSet::Exact(ExactPointSet::new(
                    proj,
                    d.addresses,
                    d.region,
                )?))
            }
            PointSetDocument::Float(d) => {
                if let Some((i, p)) = d
                    .points
                    .iter()
                    .enumerate()
                    .find(|(_, p)| p.len() != d.dimension)
                {
                    return Err(Error::Schema(format!(
                        "point row {i} has {} coordinates, header dimension is {}",
                        p.len(),
                        d.dimension
                    )));
                }
                if d.region.dimension() != d.dimension {
                    return Err(Error::Schema(
                        "region dimension differs from header dimension".into(),
                    ));
                }
                Ok(AnyPointSet::Float(FloatPointSet::from_points(
                    &d.points,
                    d.region,
                    d.tolerance,
                )?))
            }
        }
    }
}

/// Parses a point-set file and validates it.
pub fn read_point_set(text: &str) -> Result<AnyPointSet> {
    let doc: PointSetDocument = serde_json::from_str(text)?;
    doc.into_set()
}

/// Reads a float-format file; exact files are converted with the given default tolerance.
pub fn import_float_set(path: &std::path::Path) -> Result<FloatPointSet> {
    let text = std::fs::read_to_string(path)?;
    match read_point_set(&text)? {
        AnyPointSet::Float(f) => Ok(f),
        AnyPointSet::Exact(e) => e.to_float(1e-9),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> f64 {
        (1.0 + 5f64.sqrt()) / 2.0
    }

    #[test]
    fn project_examples() {
        let id = Projection::identity(1);
        assert_eq!(id.project(&[5]).unwrap(), vec![5.0]);
        let fib = Projection::new(1, vec![vec![1.0], vec![golden()]]).unwrap();
        assert!((fib.project(&[1, 1]).unwrap()[0] - 2.6180339887).abs() < 1e-10);
        assert_eq!(fib.project(&[0, 0]).unwrap(), vec![0.0]);
        assert!(matches!(fib.project(&[1]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn delone_constants_of_integers() {
        let region = Region::interval(-10.0, 10.0).unwrap();
        let set = ExactPointSet::new(
            Projection::identity(1),
            (-10..=10).map(|i| vec![i]).collect(),
            region,
        )
        .unwrap();
        let c = delone_constants(&set).unwrap();
        assert_eq!(c.r, 0.5);
        assert_eq!(c.big_r, 0.5);
    }

    #[test]
    fn delone_constants_single_point() {
        let region = Region::interval(-1.0, 1.0).unwrap();
        let set = ExactPointSet::new(Projection::identity(1), vec![vec![0]], region).unwrap();
        assert!(matches!(
            delone_constants(&set),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn natural_distance_examples() {
        let region = Region::interval(-10.0, 10.0).unwrap();
        let f = |x: f64| FloatPointSet::from_points(&[vec![x]], region.clone(), 1e-9).unwrap();
        assert_eq!(natural_distance(&f(0.0), &f(0.0), 1.0).unwrap(), 0.0);
        assert!((natural_distance(&f(0.0), &f(0.3), 1.0).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(natural_distance(&f(0.0), &f(5.0), 1.0).unwrap(), 1.0);
    }

    #[test]
    fn rejects_duplicates_and_outside_points() {
        let region = Region::interval(0.0, 3.0).unwrap();
        assert!(ExactPointSet::new(
            Projection::identity(1),
            vec![vec![1], vec![1]],
            region.clone()
        )
        .is_err());
        assert!(
            ExactPointSet::new(Projection::identity(1), vec![vec![4]], region.clone()).is_err()
        );
        let e =
            FloatPointSet::from_points(&[vec![1.0], vec![1.0 + 1e-12]], region, 1e-9).unwrap_err();
        assert!(e.to_string().contains("(0,1)"));
    }

    #[test]
    fn patch_key_invariants() {
        assert!(PatchKey::from_differences(1, vec![vec![1]]).is_err());
        assert!(PatchKey::from_differences(1, vec![vec![0], vec![0]]).is_err());
        let k = PatchKey::from_differences(2, vec![vec![1, 0], vec![0, 0], vec![-1, 1]]).unwrap();
        let v: Vec<&[i64]> = k.vectors().collect();
        assert_eq!(v, vec![&[-1, 1][..], &[0, 0][..], &[1, 0][..]]);
        assert_eq!(k.len(), 3);
    }

    #[test]
    fn document_round_trip_and_schema_errors() {
        let region = Region::centered_cube(2, 1.0).unwrap();
        let set = ExactPointSet::new(
            Projection::identity(2),
            vec![vec![0, 0], vec![1, -1]],
            region,
        )
        .unwrap();
        let text = serde_json::to_string(&set.to_document()).unwrap();
        match read_point_set(&text).unwrap() {
            AnyPointSet::Exact(back) => assert_eq!(back, set),
            AnyPointSet::Float(_) => panic!("wrong variant"),
        }
        let bad = r#"{"dimension":2,"points":[[0.0,0.0],[1.0]],"region":{"kind":"box","intervals":[[-1,1],[-1,1]]},"tolerance":1e-9}"#;
        assert!(matches!(read_point_set(bad), Err(Error::Schema(_))));
    }
}
