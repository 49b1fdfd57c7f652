//! Repetitivity function from covering radii of patch-class centers, growth
//! classification, crystal probes and the symbolic recurrence oracle.

use std::collections::HashMap;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::atlas::{compute_atlas, WindowPolicy};
use crate::contfrac::ContinuedFraction;
use crate::error::{invalid, Error, Result};
use crate::generators::PointSetSource;
use crate::grid::SpatialGrid;
use crate::pointset::{min_pair_distance, DeloneConstants, ExactPointSet, PatchKey, PointCloud};
use crate::region::Region;

/// Cap on grid samples per covering-radius evaluation; the pitch is coarsened beyond it.
pub const MAX_SAMPLES: usize = 1 << 22;

/// Bracket on a covering radius. Exact in dimension 1 (`lower == upper`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoveringRadius {
    pub lower: f64,
    pub upper: f64,
    /// Grid pitch actually used (0 for the exact one-dimensional case).
    pub resolution: f64,
}

impl CoveringRadius {
    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }
}

/// Supremum over `region` of the distance to the nearest of `centers` (row-major, stride `n`).
///
/// In dimension 1 the supremum is attained at a region end or at a midpoint
/// between consecutive centers, so it is computed exactly. Otherwise a grid of
/// pitch `resolution` gives `lower` from samples inside the region and
/// `upper = max over samples + resolution * sqrt(n) / 2`. No centers gives an
/// infinite bracket.
pub fn covering_radius(
    centers: &[f64],
    n: usize,
    region: &Region,
    resolution: f64,
) -> CoveringRadius {
    if centers.is_empty() {
        return CoveringRadius {
            lower: f64::INFINITY,
            upper: f64::INFINITY,
            resolution: 0.0,
        };
    }
    if n == 1 {
        let (lo, hi) = region.bounds();
        let (a, b) = (lo[0], hi[0]);
        let mut xs = centers.to_vec();
        xs.sort_by(f64::total_cmp);
        let dist = |t: f64| -> f64 {
            let i = xs.partition_point(|x| *x < t);
            let mut d = f64::INFINITY;
            if i < xs.len() {
                d = d.min(xs[i] - t);
            }
            if i > 0 {
                d = d.min(t - xs[i - 1]);
            }
            d
        };
        let mut m = dist(a).max(dist(b));
        for w in xs.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            if mid >= a && mid <= b {
                m = m.max(0.5 * (w[1] - w[0]));
            }
        }
        return CoveringRadius {
            lower: m,
            upper: m,
            resolution: 0.0,
        };
    }
    let (lo, hi) = region.bounds();
    let mut res = if resolution > 0.0 { resolution } else { 0.05 };
    let shape = loop {
        let shape: Vec<usize> = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| ((b - a) / res).ceil() as usize + 1)
            .collect();
        let total = shape.iter().try_fold(1usize, |acc, s| acc.checked_mul(*s));
        match total {
            Some(t) if t <= MAX_SAMPLES => break shape,
            _ => res *= 1.25,
        }
    };
    let slack = res * (n as f64).sqrt() / 2.0;
    let total: usize = shape.iter().product();
    let grid = SpatialGrid::new(n, centers, res.max(0.25));
    let (lower, outer) = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut rem = flat;
            let mut p = vec![0.0; n];
            for k in (0..n).rev() {
                let i = rem % shape[k];
                rem /= shape[k];
                p[k] = (lo[k] + i as f64 * res).min(hi[k]);
            }
            let inside = region.contains(&p);
            if !inside && !near_region(region, &p, slack) {
                return (0.0, 0.0);
            }
            let d = grid
                .nearest(&p, f64::INFINITY)
                .map(|x| x.1)
                .unwrap_or(f64::INFINITY);
            (if inside { d } else { 0.0 }, d)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    CoveringRadius {
        lower,
        upper: outer.max(lower) + slack,
        resolution: res,
    }
}

fn near_region(region: &Region, p: &[f64], slack: f64) -> bool {
    match region {
        Region::Box(_) => true,
        Region::Ball { center, radius } => crate::region::dist2(p, center).sqrt() <= radius + slack,
    }
}

/// Certified bracket on the repetitivity function at one `T`.
#[derive(Clone, Debug, Serialize)]
pub struct RepetitivityResult {
    pub t: f64,
    pub m_lower: f64,
    pub m_upper: f64,
    /// Number of patch classes found (lower bound on the patch count).
    pub n_lower: usize,
    pub per_class: Vec<(PatchKey, CoveringRadius)>,
    pub evaluation_region: Region,
    pub resolution: f64,
    /// The atlas had distances within the boundary tolerance of `T`.
    pub flagged: bool,
}

impl RepetitivityResult {
    pub fn is_exact(&self) -> bool {
        self.m_lower == self.m_upper
    }
}

/// Covering radii of every class's center set over the window eroded by `2T`.
/// `resolution` defaults to `min(r / 4, T / 100)`.
pub fn repetitivity_function(
    set: &ExactPointSet,
    t: f64,
    resolution: Option<f64>,
) -> Result<RepetitivityResult> {
    let n = set.dimension();
    let atlas = compute_atlas(set, t)?;
    let eval = set.region().eroded(2.0 * t).ok_or_else(|| {
        Error::WindowTooSmall(format!(
            "window does not survive erosion by 2T = {}",
            2.0 * t
        ))
    })?;
    let res = match resolution {
        Some(r) if r > 0.0 => r,
        Some(r) => return Err(invalid(format!("resolution must be positive, got {r}"))),
        None => (min_pair_distance(n, set.flat_positions()) / 8.0).min(t / 100.0),
    };
    let per_class: Vec<(PatchKey, CoveringRadius)> = atlas
        .classes
        .par_iter()
        .map(|c| {
            let pts: Vec<f64> = c
                .centers
                .iter()
                .flat_map(|&i| set.position(i).iter().copied())
                .collect();
            (c.key.clone(), covering_radius(&pts, n, &eval, res))
        })
        .collect();
    let m_lower = per_class.iter().map(|c| c.1.lower).fold(0.0, f64::max);
    let m_upper = per_class.iter().map(|c| c.1.upper).fold(0.0, f64::max);
    let used = per_class.iter().map(|c| c.1.resolution).fold(0.0, f64::max);
    Ok(RepetitivityResult {
        t,
        m_lower,
        m_upper,
        n_lower: atlas.count(),
        per_class,
        evaluation_region: eval,
        resolution: used,
        flagged: atlas.is_flagged(),
    })
}

/// `M'(T) = M(T) + T` as a bracket.
pub fn repetitivity_prime(result: &RepetitivityResult) -> (f64, f64) {
    (result.m_lower + result.t, result.m_upper + result.t)
}

/// `M_upper >= r (N^(1/n) - 1)`: the lower bound every Delone set obeys.
pub fn count_bound_holds(result: &RepetitivityResult, r: f64, n: usize) -> bool {
    result.m_upper >= r * ((result.n_lower as f64).powf(1.0 / n as f64) - 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrystalVerdict {
    pub t: f64,
    /// `M_upper < T / 3`: the window certifies an ideal crystal.
    pub repetitivity_trigger: bool,
    /// `N_lower < floor(T / R)`.
    pub count_trigger: bool,
    pub third_of_t: f64,
    pub count_threshold: f64,
}

pub fn crystal_gap_probe(
    result: &RepetitivityResult,
    constants: &DeloneConstants,
) -> CrystalVerdict {
    let third = result.t / 3.0;
    let threshold = (result.t / constants.big_r).floor();
    CrystalVerdict {
        t: result.t,
        repetitivity_trigger: result.m_upper < third,
        count_trigger: (result.n_lower as f64) < threshold,
        third_of_t: third,
        count_threshold: threshold,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthVerdict {
    IdealCrystalLike,
    EmpiricallyLinear,
    NotLinear,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthPoint {
    pub t: f64,
    pub m_lower: f64,
    pub m_upper: f64,
    pub n_lower: usize,
    pub half_side: f64,
    /// Whether the bracket was unchanged by the last window growth.
    pub stabilized: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub points: Vec<GrowthPoint>,
    /// Least-squares slope of `log M` against `log T`.
    pub slope_t: f64,
    /// Least-squares slope of `log M` against `(1/n) log N`; absent when `N` is constant.
    pub slope_n: Option<f64>,
    /// Largest `M/T` over the upper half of the sweep divided by the largest over the lower half.
    pub ratio_growth: f64,
    pub verdict: GrowthVerdict,
    pub empirically_dense: Option<bool>,
    pub caveat: &'static str,
}

const CAVEAT: &str = "finite-window evidence only; no asymptotic claim";

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let k = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx <= 1e-12 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Some(sxy / sxx)
}

/// Classifies the growth of `M` from `(T, M_upper, N)` samples.
pub fn classify_growth(
    ts: &[f64],
    ms: &[f64],
    ns: &[usize],
    n: usize,
) -> Result<(f64, Option<f64>, f64, GrowthVerdict, Option<bool>)> {
    if ts.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "need at least 4 values of T, have {}",
            ts.len()
        )));
    }
    if ts.last().unwrap() / ts[0] < 8.0 - 1e-9 {
        return Err(Error::InsufficientData(
            "T values must span a factor of at least 8".into(),
        ));
    }
    let lt: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let lm: Vec<f64> = ms.iter().map(|m| m.ln()).collect();
    let ln: Vec<f64> = ns.iter().map(|&c| (c as f64).ln() / n as f64).collect();
    let slope_t = ls_slope(&lt, &lm).expect("distinct T");
    let slope_n = ls_slope(&ln, &lm);
    let half = ts.len() / 2;
    let ratio = |lo: usize, hi: usize, den: &dyn Fn(usize) -> f64| {
        (lo..hi).map(|i| ms[i] / den(i)).fold(0.0, f64::max)
    };
    let by_t = |i: usize| ts[i];
    let ratio_growth = ratio(half, ts.len(), &by_t) / ratio(0, half, &by_t);
    let (m_min, m_max) = ms
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), m| (a.min(*m), b.max(*m)));
    let verdict = if slope_t.abs() <= 0.15 && m_max <= 1.05 * m_min {
        GrowthVerdict::IdealCrystalLike
    } else if slope_t <= 1.15 && ratio_growth <= 1.5 {
        GrowthVerdict::EmpiricallyLinear
    } else {
        GrowthVerdict::NotLinear
    };
    let dense = slope_n.map(|s| {
        let by_n = |i: usize| (ns[i] as f64).powf(1.0 / n as f64);
        s <= 1.15 && ratio(half, ts.len(), &by_n) / ratio(0, half, &by_n) <= 1.5
    });
    Ok((slope_t, slope_n, ratio_growth, verdict, dense))
}

/// Repetitivity brackets over a `T` sweep, each on a centered window grown until
/// the bracket survives one growth step, then classified.
pub fn growth_classification(
    source: &PointSetSource,
    ts: &[f64],
    policy: &WindowPolicy,
) -> Result<GrowthReport> {
    let n = source.dimension();
    let base = policy.initial_half(source)?;
    let mut points = Vec::with_capacity(ts.len());
    for &t in ts {
        let mut half = base.max(10.0 * t);
        let mut prev: Option<(f64, usize)> = None;
        let mut point = None;
        for step in 0..=policy.budget {
            let set = source.materialize(&Region::centered_cube(n, half + 2.0 * t)?)?;
            let res = repetitivity_function(&set, t, None)?;
            let stable = prev.is_some_and(|(m, c)| {
                c == res.n_lower && (res.m_upper - m).abs() <= 1e-9 * m.max(1.0)
            });
            point = Some(GrowthPoint {
                t,
                m_lower: res.m_lower,
                m_upper: res.m_upper,
                n_lower: res.n_lower,
                half_side: half,
                stabilized: stable,
            });
            if stable || step == policy.budget {
                break;
            }
            let density = set.len() as f64 / (2.0 * (half + 2.0 * t)).powi(n as i32);
            half *= policy.growth;
            if policy.check_points(n, half + 2.0 * t, density).is_err() {
                break;
            }
            prev = Some((res.m_upper, res.n_lower));
        }
        points.push(point.expect("one window"));
    }
    let ms: Vec<f64> = points.iter().map(|p| p.m_upper).collect();
    let ns: Vec<usize> = points.iter().map(|p| p.n_lower).collect();
    let (slope_t, slope_n, ratio_growth, verdict, empirically_dense) =
        classify_growth(ts, &ms, &ns, n)?;
    Ok(GrowthReport {
        points,
        slope_t,
        slope_n,
        ratio_growth,
        verdict,
        empirically_dense,
        caveat: CAVEAT,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SymbolicGrowth {
    /// `(l, q_k + q_{k+1})`.
    pub values: Vec<(u64, f64)>,
    pub slope: f64,
    pub ratio_growth: f64,
    pub verdict: GrowthVerdict,
    pub caveat: &'static str,
}

/// Growth of the word recurrence function of a Beatty word, from the
/// continued fraction alone (the geometry of gap lengths does not matter).
pub fn symbolic_growth(alpha: &ContinuedFraction, ls: &[u64]) -> Result<SymbolicGrowth> {
    let values: Vec<(u64, f64)> = ls
        .iter()
        .map(|&l| {
            Ok((
                l,
                alpha
                    .recurrence_formula(l)?
                    .to_f64()
                    .unwrap_or(f64::INFINITY),
            ))
        })
        .collect::<Result<_>>()?;
    let ts: Vec<f64> = values.iter().map(|v| v.0 as f64).collect();
    let ms: Vec<f64> = values.iter().map(|v| v.1).collect();
    let ns = vec![1; ts.len()];
    let (slope, _, ratio_growth, verdict, _) = classify_growth(&ts, &ms, &ns, 1)?;
    Ok(SymbolicGrowth {
        values,
        slope,
        ratio_growth,
        verdict,
        caveat: CAVEAT,
    })
}

/// Result of the brute-force recurrence scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Recurrence {
    Finite(u64),
    /// Some factor occurs only once in the available word.
    Unbounded,
}

/// Largest gap between consecutive occurrences of any length-`l` factor of `word`.
pub fn symbolic_recurrence_oracle(word: &[u8], l: usize) -> Recurrence {
    if l == 0 || word.len() < l {
        return Recurrence::Unbounded;
    }
    let mut last: HashMap<&[u8], usize> = HashMap::new();
    let mut gap: HashMap<&[u8], usize> = HashMap::new();
    for i in 0..=word.len() - l {
        let f = &word[i..i + l];
        if let Some(prev) = last.insert(f, i) {
            let g = gap.entry(f).or_insert(0);
            *g = (*g).max(i - prev);
        }
    }
    if last.keys().any(|f| !gap.contains_key(f)) {
        return Recurrence::Unbounded;
    }
    Recurrence::Finite(gap.values().copied().max().unwrap_or(0) as u64)
}

/// Number of distinct length-`k` factors of `word`.
pub fn factor_complexity(word: &[u8], k: usize) -> usize {
    if k == 0 {
        return 1;
    }
    if word.len() < k {
        return 0;
    }
    let mut seen: std::collections::HashSet<&[u8]> = std::collections::HashSet::new();
    for w in word.windows(k) {
        seen.insert(w);
    }
    seen.len()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComplexityPoint {
    pub k: usize,
    pub count: usize,
    pub stabilized: bool,
    pub word_length: usize,
}

/// Factor complexity of the gap word of a one-dimensional rank-2 source,
/// doubling the window until every count survives one doubling.
pub fn sturmian_complexity(
    source: &PointSetSource,
    k_max: usize,
    budget: u32,
) -> Result<Vec<ComplexityPoint>> {
    if source.dimension() != 1 || source.rank() != 2 {
        return Err(invalid("complexity needs a one-dimensional two-gap source"));
    }
    let mut half = (20 * k_max).max(64) as f64;
    let word_at = |h: f64| -> Result<Vec<u8>> {
        let set = source.materialize(&Region::interval(-h, h)?)?;
        crate::generators::gap_word(&set)
    };
    let mut prev_word = word_at(half)?;
    let mut prev: Vec<usize> = (1..=k_max)
        .map(|k| factor_complexity(&prev_word, k))
        .collect();
    for _ in 0..budget {
        half *= 2.0;
        let w = word_at(half)?;
        let cur: Vec<usize> = (1..=k_max).map(|k| factor_complexity(&w, k)).collect();
        if cur == prev {
            return Ok(cur
                .into_iter()
                .enumerate()
                .map(|(i, count)| ComplexityPoint {
                    k: i + 1,
                    count,
                    stabilized: true,
                    word_length: w.len(),
                })
                .collect());
        }
        prev = cur;
        prev_word = w;
    }
    Ok(prev
        .into_iter()
        .enumerate()
        .map(|(i, count)| ComplexityPoint {
            k: i + 1,
            count,
            stabilized: false,
            word_length: prev_word.len(),
        })
        .collect())
}
