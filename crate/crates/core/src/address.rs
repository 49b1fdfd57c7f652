//! Address maps onto the difference lattice, Lipschitz and Meyer diagnostics,
//! least-squares linear fits and path-displacement weight distributions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ergodic::{WeightConstants, WeightDistribution};
use crate::error::{invalid, Error, Result};
use crate::grid::SpatialGrid;
use crate::pointset::{delone_constants, ExactPointSet, PointCloud};
use crate::region::{BoxRegion, Region};

/// Sets at or below this size get an exhaustive pair scan.
pub const LIPSCHITZ_ALL_PAIRS: usize = 10_000;
/// Random pairs drawn above that size.
pub const LIPSCHITZ_SAMPLES: usize = 1_000_000;
/// Minimum points for an annulus to enter the residual statistics.
pub const ANNULUS_MIN_POINTS: usize = 10;

/// Integer row-echelon basis built by unimodular row operations.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct Hnf {
    rows: Vec<Vec<i128>>,
    width: usize,
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        return if a < 0 { (-a, -1, 0) } else { (a, 1, 0) };
    }
    let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
    (g, y, x - a.div_euclid(b) * y)
}

fn overflow() -> Error {
    Error::ResourceLimit("integer overflow in lattice reduction".into())
}

fn lead(v: &[i128]) -> Option<usize> {
    v.iter().position(|x| *x != 0)
}

impl Hnf {
    pub(crate) fn new(width: usize) -> Self {
        Hnf {
            rows: Vec::new(),
            width,
        }
    }

    pub(crate) fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds a generator; returns whether the lattice grew.
    pub(crate) fn insert(&mut self, v: &[i64]) -> Result<bool> {
        let mut v: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        let mut k = 0;
        let mut grew = false;
        while let Some(l) = lead(&v) {
            if k == self.rows.len() {
                self.rows.push(v);
                grew = true;
                break;
            }
            let p = lead(&self.rows[k]).expect("basis rows are nonzero");
            if l < p {
                self.rows.insert(k, v);
                grew = true;
                break;
            }
            if l == p {
                let (a, b) = (self.rows[k][p], v[p]);
                if b % a == 0 {
                    let q = b / a;
                    for c in 0..self.width {
                        let s = q.checked_mul(self.rows[k][c]).ok_or_else(overflow)?;
                        v[c] = v[c].checked_sub(s).ok_or_else(overflow)?;
                    }
                    k += 1;
                    continue;
                }
                grew = true;
                let (g, x, y) = ext_gcd(a, b);
                let (ag, bg) = (a / g, b / g);
                let row = &self.rows[k];
                let mut new_row = vec![0i128; self.width];
                let mut rest = vec![0i128; self.width];
                for c in 0..self.width {
                    new_row[c] = x
                        .checked_mul(row[c])
                        .and_then(|s| y.checked_mul(v[c]).and_then(|t| s.checked_add(t)))
                        .ok_or_else(overflow)?;
                    rest[c] = bg
                        .checked_mul(row[c])
                        .and_then(|s| ag.checked_mul(v[c]).and_then(|t| s.checked_sub(t)))
                        .ok_or_else(overflow)?;
                }
                self.rows[k] = new_row;
                v = rest;
            }
            k += 1;
        }
        if grew {
            self.reduce()?;
        }
        Ok(grew)
    }

    /// Positive pivots, entries above each pivot reduced into `[0, pivot)`.
    fn reduce(&mut self) -> Result<()> {
        for k in 0..self.rows.len() {
            let p = lead(&self.rows[k]).expect("nonzero row");
            if self.rows[k][p] < 0 {
                self.rows[k].iter_mut().for_each(|x| *x = -*x);
            }
            let piv = self.rows[k][p];
            for j in 0..k {
                let q = self.rows[j][p].div_euclid(piv);
                if q != 0 {
                    for c in 0..self.width {
                        let s = q.checked_mul(self.rows[k][c]).ok_or_else(overflow)?;
                        self.rows[j][c] = self.rows[j][c].checked_sub(s).ok_or_else(overflow)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Integer coordinates of `v` in the basis, `None` if `v` is off the lattice.
    pub(crate) fn coordinates(&self, v: &[i64]) -> Option<Vec<i64>> {
        let mut r: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        let mut out = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            let p = lead(row)?;
            if r[p] % row[p] != 0 {
                return None;
            }
            let c = r[p] / row[p];
            for (x, y) in r.iter_mut().zip(row) {
                *x -= c * y;
            }
            out.push(i64::try_from(c).ok()?);
        }
        r.iter().all(|x| *x == 0).then_some(out)
    }

    pub(crate) fn basis(&self) -> Vec<Vec<i64>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&x| x as i64).collect())
            .collect()
    }
}

/// `phi(x) = ` coordinates of `address(x) - address(x0)` in a basis of the
/// lattice generated by address differences; `x0` is the point nearest the
/// origin (lexicographically least address on ties).
#[derive(Clone, Debug, Serialize)]
pub struct AddressMap {
    /// Rank of the difference lattice.
    pub rank: usize,
    /// Rank of the lattice generated by the addresses themselves.
    pub point_rank: usize,
    /// Basis rows in Hermite normal form, as address vectors.
    pub basis: Vec<Vec<i64>>,
    pub origin_address: Vec<i64>,
    pub origin_position: Vec<f64>,
    /// Images of the basis rows under the projection.
    pub projected_basis: Vec<Vec<f64>>,
    /// Set when a small integer relation among `projected_basis` was found.
    pub degeneracy: Option<String>,
    #[serde(skip)]
    hnf: Hnf,
}

impl AddressMap {
    /// Address-space coordinates of a set point.
    pub fn phi(&self, set: &ExactPointSet, i: usize) -> Result<Vec<i64>> {
        self.phi_address(set.address(i))
    }

    pub fn phi_address(&self, address: &[i64]) -> Result<Vec<i64>> {
        let d: Vec<i64> = address
            .iter()
            .zip(&self.origin_address)
            .map(|(a, b)| a - b)
            .collect();
        self.hnf.coordinates(&d).ok_or_else(|| {
            invalid(format!(
                "address {address:?} is not in the difference lattice of the map"
            ))
        })
    }

    /// `pi` applied to address-space coordinates.
    pub fn project(&self, coords: &[f64]) -> Vec<f64> {
        let n = self.origin_position.len();
        let mut out = vec![0.0; n];
        for (c, row) in coords.iter().zip(&self.projected_basis) {
            for k in 0..n {
                out[k] += c * row[k];
            }
        }
        out
    }
}

/// Nearest point to the origin, least address on ties.
fn base_point(set: &ExactPointSet) -> usize {
    let zero = vec![0.0; set.dimension()];
    let mut best = 0;
    let mut bd = f64::INFINITY;
    for i in 0..set.len() {
        let d = crate::region::dist2(set.position(i), &zero).sqrt();
        if d < bd - 1e-12 || ((d - bd).abs() <= 1e-12 && set.address(i) < set.address(best)) {
            best = i;
            bd = d;
        }
    }
    best
}

pub fn build_address_map(set: &ExactPointSet) -> Result<AddressMap> {
    if set.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "address map needs at least 2 points, have {}",
            set.len()
        )));
    }
    let s = set.rank();
    let o = base_point(set);
    let origin = set.address(o).to_vec();
    let mut diff = Hnf::new(s);
    let mut points = Hnf::new(s);
    for a in set.addresses() {
        let d: Vec<i64> = a.iter().zip(&origin).map(|(x, y)| x - y).collect();
        diff.insert(&d)?;
        points.insert(a)?;
    }
    let rank = diff.rank();
    if rank < set.dimension() {
        return Err(Error::InsufficientData(format!(
            "difference lattice has rank {rank} on this window, below the dimension {}",
            set.dimension()
        )));
    }
    let basis = diff.basis();
    let projected_basis: Vec<Vec<f64>> = basis.iter().map(|b| set.projection().apply(b)).collect();
    let degeneracy = integer_relation(&projected_basis).map(|c| {
        format!("projected basis satisfies the integer relation {c:?}; the projected rank is below {rank}")
    });
    Ok(AddressMap {
        rank,
        point_rank: points.rank(),
        basis,
        origin_address: origin,
        origin_position: set.position(o).to_vec(),
        projected_basis,
        degeneracy,
        hnf: diff,
    })
}

/// Small nonzero `c` with `sum c_k v_k = 0`, searched with `|c_k| <= B` where
/// `(2B + 1)^s` stays near `2 * 10^5`.
fn integer_relation(v: &[Vec<f64>]) -> Option<Vec<i64>> {
    let s = v.len();
    if s == 0 {
        return None;
    }
    let n = v[0].len();
    let scale = v
        .iter()
        .flatten()
        .fold(0.0f64, |m, x| m.max(x.abs()))
        .max(1.0);
    let mut b = 1i64;
    while b < 8 && ((2 * (b + 1) + 1) as f64).powi(s as i32) <= 2e5 {
        b += 1;
    }
    let side = (2 * b + 1) as usize;
    let total = side.checked_pow(s as u32)?;
    for code in 1..total {
        let mut rem = code;
        let mut c = vec![0i64; s];
        for k in 0..s {
            c[k] = (rem % side) as i64 - b;
            rem /= side;
        }
        // one representative per sign pair
        match c.iter().find(|x| **x != 0) {
            Some(x) if *x > 0 => {}
            _ => continue,
        }
        let norm: f64 = (0..n)
            .map(|j| {
                let t: f64 = c.iter().zip(v).map(|(ci, row)| *ci as f64 * row[j]).sum();
                t * t
            })
            .sum::<f64>()
            .sqrt();
        if norm < 1e-9 * scale {
            return Some(c);
        }
    }
    None
}

fn norm_i(v: &[i64]) -> f64 {
    v.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt()
}

#[derive(Clone, Debug, Serialize)]
pub struct LipschitzEstimate {
    /// Largest observed `|phi(x1) - phi(x2)| / |x1 - x2|`; a lower bound on the constant.
    pub value: f64,
    pub pairs: u64,
    pub exhaustive: bool,
}

/// Sampled Lipschitz ratio. Large sets get every pair within `4R` plus
/// `LIPSCHITZ_SAMPLES` random pairs drawn with `seed`.
pub fn lipschitz_constant(
    set: &ExactPointSet,
    map: &AddressMap,
    seed: u64,
) -> Result<LipschitzEstimate> {
    let m = set.len();
    if m < 2 {
        return Err(Error::InsufficientData(
            "Lipschitz ratio needs 2 points".into(),
        ));
    }
    let phis: Vec<Vec<i64>> = (0..m).map(|i| map.phi(set, i)).collect::<Result<_>>()?;
    let ratio = |i: usize, j: usize| -> f64 {
        let d: Vec<i64> = phis[i].iter().zip(&phis[j]).map(|(a, b)| a - b).collect();
        norm_i(&d) / crate::region::dist2(set.position(i), set.position(j)).sqrt()
    };
    if m <= LIPSCHITZ_ALL_PAIRS {
        let value = (0..m)
            .into_par_iter()
            .map(|i| (i + 1..m).map(|j| ratio(i, j)).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max);
        return Ok(LipschitzEstimate {
            value,
            pairs: (m * (m - 1) / 2) as u64,
            exhaustive: true,
        });
    }
    let c = delone_constants(set)?;
    let reach = 4.0 * c.big_r;
    let grid = SpatialGrid::new(set.dimension(), set.flat_positions(), reach);
    let (local, local_pairs) = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut best = 0.0f64;
            let mut cnt = 0u64;
            grid.for_each_within(set.position(i), reach * reach, |j, _| {
                if j > i {
                    best = best.max(ratio(i, j));
                    cnt += 1;
                }
            });
            (best, cnt)
        })
        .reduce(|| (0.0, 0), |a, b| (a.0.max(b.0), a.1 + b.1));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut value = local;
    let mut drawn = 0u64;
    while drawn < LIPSCHITZ_SAMPLES as u64 {
        let i = rng.gen_range(0..m);
        let j = rng.gen_range(0..m);
        if i != j {
            value = value.max(ratio(i, j));
            drawn += 1;
        }
    }
    Ok(LipschitzEstimate {
        value,
        pairs: local_pairs + drawn,
        exhaustive: false,
    })
}

/// Maximum residual over points with `inner <= |x| < outer`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Annulus {
    pub inner: f64,
    pub outer: f64,
    pub count: usize,
    pub max_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LinearFit {
    /// `rank x n` matrix.
    pub l: Vec<Vec<f64>>,
    /// `(|x|, |phi(x) - L x|)` per point, with `x` measured from the base point.
    pub residuals: Vec<(f64, f64)>,
    pub annuli: Vec<Annulus>,
    /// Slope of log max-residual against log radius; `None` when residuals vanish
    /// or fewer than two annuli qualify.
    pub exponent: Option<f64>,
    pub exponent_stderr: Option<f64>,
    pub identically_zero: bool,
    /// `max |pi(L e_k) - e_k|`.
    pub pi_l_error: f64,
}

impl LinearFit {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.l
            .iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Solves `a z = b` for symmetric positive-definite `a` by Gaussian elimination
/// with partial pivoting; rejects pivots below `1e-12` of the largest diagonal.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>> {
    let n = a.len();
    let scale = (0..n).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    for col in 0..n {
        let p = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if !(a[p][col].abs() > 1e-12 * scale) {
            return Err(Error::DegenerateGeometry(
                "ill-conditioned normal equations in the linear fit".into(),
            ));
        }
        a.swap(col, p);
        b.swap(col, p);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..n {
                        a[r][c] -= f * a[col][c];
                    }
                    for c in 0..b[r].len() {
                        b[r][c] -= f * b[col][c];
                    }
                }
            }
        }
    }
    Ok((0..n)
        .map(|r| b[r].iter().map(|x| x / a[r][r]).collect())
        .collect())
}

/// Least-squares `L` with `phi(x) ~ L x` over all window points.
pub fn linear_fit(set: &ExactPointSet, map: &AddressMap) -> Result<LinearFit> {
    let n = set.dimension();
    let s = map.rank;
    let m = set.len();
    if m < 2 * s {
        return Err(Error::InsufficientData(format!(
            "linear fit needs {} points, have {m}",
            2 * s
        )));
    }
    let xs: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            set.position(i)
                .iter()
                .zip(&map.origin_position)
                .map(|(a, b)| a - b)
                .collect()
        })
        .collect();
    let phis: Vec<Vec<i64>> = (0..m).map(|i| map.phi(set, i)).collect::<Result<_>>()?;
    // normal equations: (X^T X) L^T = X^T Phi
    let mut xtx = vec![vec![0.0; n]; n];
    let mut xtp = vec![vec![0.0; s]; n];
    for (x, p) in xs.iter().zip(&phis) {
        for a in 0..n {
            for b in 0..n {
                xtx[a][b] += x[a] * x[b];
            }
            for c in 0..s {
                xtp[a][c] += x[a] * p[c] as f64;
            }
        }
    }
    let lt = solve(xtx, xtp)?;
    let l: Vec<Vec<f64>> = (0..s).map(|c| (0..n).map(|a| lt[a][c]).collect()).collect();
    let mut fit = LinearFit {
        l,
        residuals: Vec::with_capacity(m),
        annuli: vec![],
        exponent: None,
        exponent_stderr: None,
        identically_zero: false,
        pi_l_error: 0.0,
    };
    for (x, p) in xs.iter().zip(&phis) {
        let lx = fit.apply(x);
        let r = p
            .iter()
            .zip(&lx)
            .map(|(a, b)| (*a as f64 - b).powi(2))
            .sum::<f64>()
            .sqrt();
        fit.residuals
            .push((x.iter().map(|v| v * v).sum::<f64>().sqrt(), r));
    }
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        let img = map.project(&fit.apply(&e));
        for (j, v) in img.iter().enumerate() {
            let want = if j == k { 1.0 } else { 0.0 };
            fit.pi_l_error = fit.pi_l_error.max((v - want).abs());
        }
    }
    fit.identically_zero = fit.residuals.iter().all(|r| r.1 < 1e-9);
    let rmax = fit.residuals.iter().map(|r| r.0).fold(0.0, f64::max);
    let mut inner = 1.0;
    while inner <= rmax {
        let outer = 2.0 * inner;
        let sel: Vec<f64> = fit
            .residuals
            .iter()
            .filter(|r| r.0 >= inner && r.0 < outer)
            .map(|r| r.1)
            .collect();
        fit.annuli.push(Annulus {
            inner,
            outer,
            count: sel.len(),
            max_residual: sel.iter().copied().fold(0.0, f64::max),
        });
        inner = outer;
    }
    if !fit.identically_zero {
        let pts: Vec<(f64, f64)> = fit
            .annuli
            .iter()
            .filter(|a| a.count >= ANNULUS_MIN_POINTS && a.max_residual > 1e-9)
            .map(|a| {
                (
                    (a.inner * std::f64::consts::SQRT_2).ln(),
                    a.max_residual.ln(),
                )
            })
            .collect();
        if pts.len() >= 2 {
            let (slope, se) = regress(&pts);
            fit.exponent = Some(slope);
            fit.exponent_stderr = se;
        }
    }
    Ok(fit)
}

fn regress(pts: &[(f64, f64)]) -> (f64, Option<f64>) {
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    if pts.len() < 3 {
        return (slope, None);
    }
    let sse: f64 = pts
        .iter()
        .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
        .sum();
    (slope, Some((sse / (k - 2.0) / sxx).sqrt()))
}

#[derive(Clone, Debug, Serialize)]
pub struct MeyerVerdict {
    /// Max residual of each qualifying annulus, innermost first.
    pub per_annulus: Vec<f64>,
    /// `(max - min) / max` over the outer half of the qualifying annuli.
    pub variation: f64,
    pub bounded: bool,
}

/// Empirically bounded when the outer half of the annuli vary by less than 20%.
pub fn meyer_residual(fit: &LinearFit) -> Result<MeyerVerdict> {
    let per: Vec<f64> = fit
        .annuli
        .iter()
        .filter(|a| a.count >= ANNULUS_MIN_POINTS)
        .map(|a| a.max_residual)
        .collect();
    if per.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "need 4 annuli with {ANNULUS_MIN_POINTS} points, have {}",
            per.len()
        )));
    }
    let tail = &per[per.len() / 2..];
    let hi = tail.iter().copied().fold(0.0, f64::max);
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let variation = if hi < 1e-9 { 0.0 } else { (hi - lo) / hi };
    Ok(MeyerVerdict {
        per_annulus: per,
        variation,
        bounded: variation < 0.2,
    })
}

/// `B -> P_i(B)`: for each integer point `g` of the cross-section of `B`
/// orthogonal to `axis`, weighted `2^-(faces g lies on)`, the address
/// displacement `phi(x[(n_i, g)]) - phi(x[(m_i, g)])` with `m_i, n_i` the
/// integer parts of the box ends along `axis`, and `x[t]` the nearest point
/// within `R` (least address on ties).
pub struct PathDisplacement {
    set: ExactPointSet,
    phis: Vec<Vec<i64>>,
    grid: SpatialGrid,
    axis: usize,
    reach: f64,
    rank: usize,
}

pub fn path_displacement_distribution(
    set: &ExactPointSet,
    map: &AddressMap,
    axis: usize,
) -> Result<PathDisplacement> {
    let n = set.dimension();
    if axis >= n {
        return Err(invalid(format!(
            "axis {axis} out of range for dimension {n}"
        )));
    }
    let c = delone_constants(set)?;
    let phis = (0..set.len())
        .map(|i| map.phi(set, i))
        .collect::<Result<_>>()?;
    let reach = c.big_r * (1.0 + 1e-9) + 1e-9;
    Ok(PathDisplacement {
        grid: set.grid(reach.max(0.5)),
        set: set.clone(),
        phis,
        axis,
        reach,
        rank: map.rank,
    })
}

impl PathDisplacement {
    pub fn reach(&self) -> f64 {
        self.reach
    }

    /// Box window on which every evaluation is complete.
    pub fn safe_window(&self) -> Option<Region> {
        self.set.region().eroded(self.reach + 1.0)
    }

    fn nearest(&self, t: &[f64]) -> Result<usize> {
        if !self.set.region().contains_ball(t, self.reach) {
            return Err(Error::WindowIncomplete(format!(
                "B({t:?}; R) leaves the materialized window"
            )));
        }
        self.grid
            .nearest_by(t, self.reach, |i, j| {
                self.set.address(i).cmp(self.set.address(j))
            })
            .map(|(i, _)| i)
            .ok_or_else(|| Error::WindowIncomplete(format!("no set point within R of {t:?}")))
    }
}

impl WeightDistribution for PathDisplacement {
    fn dimension(&self) -> usize {
        self.set.dimension()
    }
    fn components(&self) -> usize {
        self.rank
    }
    fn u0(&self) -> f64 {
        1.0
    }
    fn constants(&self) -> WeightConstants {
        let r = self.reach;
        WeightConstants {
            volume: 1.0 + 2.0 * r,
            translation: 2.0 * r,
            additivity: 2.0 * r,
        }
    }
    fn evaluate(&self, b: &BoxRegion) -> Result<Vec<f64>> {
        let n = self.set.dimension();
        let i = self.axis;
        let others: Vec<usize> = (0..n).filter(|&k| k != i).collect();
        let ranges: Vec<(i64, i64)> = others
            .iter()
            .map(|&k| (b.lo()[k].ceil() as i64, b.hi()[k].floor() as i64))
            .collect();
        let (mi, ni) = (b.lo()[i].floor(), b.hi()[i].floor());
        let mut total = vec![0.0; self.rank];
        if ranges.iter().any(|(a, c)| a > c) {
            return Ok(total);
        }
        let mut g: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        loop {
            let faces = others
                .iter()
                .zip(&g)
                .filter(|(&k, &v)| v as f64 == b.lo()[k] || v as f64 == b.hi()[k])
                .count();
            let w = 0.5f64.powi(faces as i32);
            let mut t = vec![0.0; n];
            for (&k, &v) in others.iter().zip(&g) {
                t[k] = v as f64;
            }
            t[i] = mi;
            let x1 = self.nearest(&t)?;
            t[i] = ni;
            let x2 = self.nearest(&t)?;
            for c in 0..self.rank {
                total[c] += w * (self.phis[x2][c] - self.phis[x1][c]) as f64;
            }
            // odometer over the cross-section
            let mut k = 0;
            loop {
                if k == g.len() {
                    return Ok(total);
                }
                if g[k] < ranges[k].1 {
                    g[k] += 1;
                    break;
                }
                g[k] = ranges[k].0;
                k += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contfrac::ContinuedFraction;
    use crate::ergodic::density_profile;
    use crate::generators::PointSetSource;
    use proptest::prelude::*;

    fn fib(half: f64) -> ExactPointSet {
        PointSetSource::fibonacci()
            .materialize(&Region::interval(-half, half).unwrap())
            .unwrap()
    }

    #[test]
    fn lattice_map_is_identity() {
        let set = PointSetSource::integer_lattice(2, vec![])
            .unwrap()
            .materialize(&Region::centered_cube(2, 4.0).unwrap())
            .unwrap();
        let map = build_address_map(&set).unwrap();
        assert_eq!(map.rank, 2);
        assert_eq!(map.basis, vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(map.phi_address(&[3, -2]).unwrap(), vec![3, -2]);
        assert!(map.degeneracy.is_none());
        let z = PointSetSource::integer_lattice(1, vec![])
            .unwrap()
            .materialize(&Region::interval(-200.0, 200.0).unwrap())
            .unwrap();
        let zm = build_address_map(&z).unwrap();
        assert_eq!(lipschitz_constant(&z, &zm, 0).unwrap().value, 1.0);
        let fit = linear_fit(&z, &zm).unwrap();
        assert!(fit.identically_zero);
        assert!(fit.exponent.is_none());
        assert!((fit.l[0][0] - 1.0).abs() < 1e-12);
        assert!(meyer_residual(&fit).unwrap().bounded);
    }

    #[test]
    fn fibonacci_rank_and_fit() {
        let set = fib(800.0);
        let map = build_address_map(&set).unwrap();
        assert_eq!(map.rank, 2);
        assert!(map.degeneracy.is_none());
        let fit = linear_fit(&set, &map).unwrap();
        assert!(fit.pi_l_error < 1e-9);
        assert!(fit.exponent.unwrap().abs() <= 0.1, "{:?}", fit.exponent);
        assert!(meyer_residual(&fit).unwrap().bounded);
    }

    #[test]
    fn rational_beatty_is_flagged() {
        let alpha = ContinuedFraction::rational(1, 2).unwrap();
        let set = PointSetSource::beatty(alpha, 2.0)
            .unwrap()
            .materialize(&Region::interval(-30.0, 30.0).unwrap())
            .unwrap();
        let map = build_address_map(&set).unwrap();
        assert_eq!(map.rank, 2);
        assert!(map.degeneracy.is_some());
    }

    #[test]
    fn cut_project_is_meyer() {
        let src = PointSetSource::cut_project(ContinuedFraction::silver()).unwrap();
        let set = src
            .materialize(&Region::interval(-2000.0, 2000.0).unwrap())
            .unwrap();
        let map = build_address_map(&set).unwrap();
        let fit = linear_fit(&set, &map).unwrap();
        assert!(fit.pi_l_error < 1e-9);
        assert!(meyer_residual(&fit).unwrap().bounded);
    }

    #[test]
    fn lipschitz_stable_under_doubling() {
        let a = fib(1000.0);
        let b = fib(2000.0);
        let la = lipschitz_constant(&a, &build_address_map(&a).unwrap(), 0).unwrap();
        let lb = lipschitz_constant(&b, &build_address_map(&b).unwrap(), 0).unwrap();
        assert!(la.value.is_finite());
        assert!((la.value - lb.value).abs() <= 0.05 * la.value);
    }

    #[test]
    fn lattice_path_displacement_is_length() {
        let set = PointSetSource::integer_lattice(2, vec![])
            .unwrap()
            .materialize(&Region::centered_cube(2, 12.0).unwrap())
            .unwrap();
        let map = build_address_map(&set).unwrap();
        let p = path_displacement_distribution(&set, &map, 0).unwrap();
        let b = BoxRegion::new(vec![-3.0, -2.0], vec![5.0, 2.0]).unwrap();
        // rows y = -2..2 with the two boundary rows at weight 1/2
        assert_eq!(p.evaluate(&b).unwrap(), vec![8.0 * 4.0, 0.0]);
        let q = path_displacement_distribution(&set, &map, 1).unwrap();
        let c = BoxRegion::new(vec![-3.5, 0.0], vec![3.5, 6.0]).unwrap();
        assert_eq!(q.evaluate(&c).unwrap(), vec![0.0, 6.0 * 7.0]);
        let far = BoxRegion::new(vec![0.0, 0.0], vec![12.0, 2.0]).unwrap();
        assert!(matches!(p.evaluate(&far), Err(Error::WindowIncomplete(_))));
    }

    #[test]
    fn fibonacci_path_displacement_matches_fit() {
        let set = fib(4000.0);
        let map = build_address_map(&set).unwrap();
        let fit = linear_fit(&set, &map).unwrap();
        let p = path_displacement_distribution(&set, &map, 0).unwrap();
        let prof = density_profile(&p, &p.safe_window().unwrap(), &[400.0], 0).unwrap();
        for c in 0..2 {
            let est = prof.rows[0].f_zero[c];
            assert!(
                (est - fit.l[c][0]).abs() <= 0.02 * fit.l[c][0],
                "{est} vs {}",
                fit.l[c][0]
            );
        }
    }

    proptest! {
        #[test]
        fn phi_is_additive(a in -40i64..40, b in -40i64..40, c in -40i64..40, d in -40i64..40) {
            let set = fib(60.0);
            let map = build_address_map(&set).unwrap();
            let o = map.origin_address.clone();
            let u = [a + o[0], b + o[1]];
            let v = [c + o[0], d + o[1]];
            let w = [a + c + o[0], b + d + o[1]];
            let (pu, pv, pw) = (map.phi_address(&u).unwrap(), map.phi_address(&v).unwrap(), map.phi_address(&w).unwrap());
            prop_assert_eq!(pw, vec![pu[0] + pv[0], pu[1] + pv[1]]);
        }

        #[test]
        fn hnf_coordinates_roundtrip(gens in prop::collection::vec(prop::collection::vec(-9i64..9, 3), 1..6)) {
            let mut h = Hnf::new(3);
            for g in &gens {
                h.insert(g).unwrap();
            }
            for g in &gens {
                let c = h.coordinates(g).unwrap();
                let back: Vec<i64> = (0..3).map(|j| c.iter().zip(h.basis()).map(|(x, row)| x * row[j]).sum()).collect();
                prop_assert_eq!(&back, g);
            }
        }
    }
}
