use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::pointset::{ExactPointSet, Projection};
use crate::region::Region;

/// Largest dimension accepted: the number of vertex types `2^(2^n)` must fit the block index.
const MAX_DIMENSION: usize = 5;
/// Cap on the number of cells visited by the brute-force counters.
pub const COUNT_BUDGET: u128 = 1 << 28;

fn default_floor() -> f64 {
    0.1
}

/// Parameters of the hierarchical two-coloring of `Z^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoColorParams {
    pub n: usize,
    /// Level sizes `a_k`; level cube `C_k` has side `(a_1 ... a_k)^(1/n)`.
    pub a: Vec<u64>,
    /// When set, regions beyond the listed levels get extra levels whose side is
    /// the previous side times this factor; otherwise such regions are an error.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extend_side_factor: Option<u64>,
    /// Lower bound required of the partial products `prod (1 - N / a_j)`.
    #[serde(default = "default_floor")]
    pub product_floor: f64,
}

impl TwoColorParams {
    pub fn new(n: usize, a: Vec<u64>) -> Self {
        TwoColorParams {
            n,
            a,
            extend_side_factor: None,
            product_floor: default_floor(),
        }
    }

    /// `N = 2^(2^n + n)`.
    pub fn big_n(&self) -> u64 {
        1u64 << ((1usize << self.n) + self.n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_DIMENSION {
            return Err(invalid(format!(
                "two-color dimension must be in 1..={MAX_DIMENSION}"
            )));
        }
        if self.a.is_empty() {
            return Err(invalid("two-color construction needs at least one level"));
        }
        if !(self.product_floor > 0.0 && self.product_floor < 1.0) {
            return Err(invalid("product floor must lie in (0, 1)"));
        }
        if let Some(f) = self.extend_side_factor {
            if f < 2 {
                return Err(invalid("extension side factor must be >= 2"));
            }
        }
        let big_n = self.big_n();
        let mut prod = 1.0;
        for (k, &ak) in self.a.iter().enumerate() {
            if ak <= big_n {
                return Err(invalid(format!(
                    "a_{} = {ak} must exceed N = {big_n}",
                    k + 1
                )));
            }
            match nth_root_exact(ak, self.n) {
                Some(m) if m % 2 == 0 => {}
                _ => {
                    return Err(invalid(format!(
                        "a_{} = {ak} is not an even {}-th power",
                        k + 1,
                        self.n
                    )))
                }
            }
            prod *= 1.0 - big_n as f64 / ak as f64;
            if prod <= self.product_floor {
                return Err(invalid(format!(
                    "partial product {prod} at level {} falls to the floor {}",
                    k + 1,
                    self.product_floor
                )));
            }
        }
        Ok(())
    }
}

fn nth_root_exact(a: u64, n: usize) -> Option<u64> {
    let guess = (a as f64).powf(1.0 / n as f64).round() as u64;
    (guess.saturating_sub(1)..=guess + 1).find(|&m| m.checked_pow(n as u32) == Some(a))
}

/// Color lookup for the two-colored lattice. Cell `c` is the unit cube with
/// lower corner `c` in the positive sector; negative coordinates are folded by
/// the reflection `c -> -c - 1`.
#[derive(Clone, Debug)]
pub struct TwoColoring {
    n: usize,
    /// Per-level sides `m_k = a_k^(1/n)`.
    sides: Vec<u64>,
    extend: Option<u64>,
    types: u64,
}

impl TwoColoring {
    pub fn new(params: &TwoColorParams) -> Result<Self> {
        params.validate()?;
        let sides = params
            .a
            .iter()
            .map(|&a| nth_root_exact(a, params.n).expect("validated"))
            .collect();
        Ok(TwoColoring {
            n: params.n,
            sides,
            extend: params.extend_side_factor,
            types: 1u64 << (1usize << params.n),
        })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn listed_levels(&self) -> usize {
        self.sides.len()
    }

    fn side_of_level(&self, j: usize) -> Result<u64> {
        if let Some(&m) = self.sides.get(j) {
            return Ok(m);
        }
        let f = self.extend.ok_or_else(|| {
            Error::ResourceLimit(format!(
                "region needs two-color level {} but only {} levels are listed",
                j + 1,
                self.sides.len()
            ))
        })?;
        let mut m = *self.sides.last().expect("nonempty");
        for _ in self.sides.len()..=j {
            m = m
                .checked_mul(f)
                .filter(|m| m.checked_pow(self.n as u32).is_some())
                .ok_or_else(|| Error::ResourceLimit("two-color level size overflows".into()))?;
        }
        Ok(m)
    }

    /// Side `s_k` of the level cube `C_k`.
    pub fn level_side(&self, k: usize) -> Result<u128> {
        let mut s: u128 = 1;
        for j in 0..k {
            s = s
                .checked_mul(self.side_of_level(j)? as u128)
                .ok_or_else(|| Error::ResourceLimit("level side overflows".into()))?;
        }
        Ok(s)
    }

    /// Whether slot `digits` of a level pattern with side `m` is white.
    fn slot_white(&self, m: u64, digits: &[u64]) -> bool {
        let half = m / 2;
        let mut t: u64 = 0;
        let mut bit = 0u32;
        for (i, &d) in digits.iter().enumerate() {
            t = t.saturating_mul(half).saturating_add(d / 2);
            bit |= ((d % 2) as u32) << i;
        }
        if t >= self.types {
            return false;
        }
        let v = self.types - 1 - t;
        (v >> bit) & 1 == 1
    }

    pub fn is_white(&self, cell: &[i64]) -> Result<bool> {
        if cell.len() != self.n {
            return Err(invalid("cell has the wrong dimension"));
        }
        let mut c: Vec<u64> = cell
            .iter()
            .map(|&x| if x < 0 { (-(x + 1)) as u64 } else { x as u64 })
            .collect();
        let mut digits = vec![0u64; self.n];
        let mut black = 0u32;
        let mut j = 0;
        while c.iter().any(|&x| x != 0) {
            let m = self.side_of_level(j)?;
            for (d, x) in digits.iter_mut().zip(c.iter_mut()) {
                *d = *x % m;
                *x /= m;
            }
            if !self.slot_white(m, &digits) {
                black += 1;
            }
            j += 1;
        }
        Ok(black.is_multiple_of(2))
    }

    /// Direct count of white cells with index in the box `[lo, hi)`.
    pub fn white_count(&self, lo: &[i64], hi: &[i64]) -> Result<u128> {
        if lo.len() != self.n || hi.len() != self.n {
            return Err(invalid("box has the wrong dimension"));
        }
        let total: u128 = lo
            .iter()
            .zip(hi)
            .map(|(a, b)| (b - a).max(0) as u128)
            .product();
        if total > COUNT_BUDGET {
            return Err(Error::ResourceLimit(format!(
                "{total} cells exceed the counting budget"
            )));
        }
        if total == 0 {
            return Ok(0);
        }
        let mut cur = lo.to_vec();
        let mut count = 0u128;
        loop {
            if self.is_white(&cur)? {
                count += 1;
            }
            let mut k = self.n;
            loop {
                if k == 0 {
                    return Ok(count);
                }
                k -= 1;
                cur[k] += 1;
                if cur[k] < hi[k] {
                    break;
                }
                cur[k] = lo[k];
            }
        }
    }

    /// Exactly counted white proportion of the corner cube `C_k`.
    pub fn level_cube_proportion(&self, k: usize) -> Result<BigRational> {
        let s = self.level_side(k)?;
        let s =
            i64::try_from(s).map_err(|_| Error::ResourceLimit("level side too large".into()))?;
        let w = self.white_count(&vec![0; self.n], &vec![s; self.n])?;
        let total = BigInt::from(s).pow(self.n as u32);
        Ok(BigRational::new(BigInt::from(w), total))
    }

    /// Exactly counted white proportion of the centered cube of cells `[-h, h)^n`.
    pub fn centered_proportion(&self, h: i64) -> Result<BigRational> {
        if h <= 0 {
            return Err(invalid("half side must be positive"));
        }
        let w = self.white_count(&vec![-h; self.n], &vec![h; self.n])?;
        Ok(BigRational::new(
            BigInt::from(w),
            BigInt::from(2 * h).pow(self.n as u32),
        ))
    }
}

/// `rho_0..rho_K` by the recursion, with the closed form alongside.
#[derive(Clone, Debug, PartialEq)]
pub struct RhoSequence {
    pub recursion: Vec<BigRational>,
    pub closed_form: Vec<BigRational>,
}

impl RhoSequence {
    pub fn values_f64(&self) -> Vec<f64> {
        self.recursion
            .iter()
            .map(|r| r.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    /// `prod_{j <= k} (1 - N / a_j)` for each `k`, read back from the closed form.
    pub fn products(&self) -> Vec<BigRational> {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        self.closed_form
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let d = (r - &half) * BigInt::from(2);
                if k % 2 == 0 {
                    d
                } else {
                    -d
                }
            })
            .collect()
    }
}

pub fn rho_sequence(params: &TwoColorParams, k: usize) -> Result<RhoSequence> {
    if k > params.a.len() {
        return Err(invalid(format!(
            "rho_{k} needs {k} level sizes, only {} given",
            params.a.len()
        )));
    }
    let big_n = BigInt::from(params.big_n());
    let one = BigRational::one();
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut rec = vec![one.clone()];
    let mut closed = vec![one.clone()];
    let mut prod = one.clone();
    for j in 0..k {
        let a = BigInt::from(params.a[j]);
        let w = BigRational::new(big_n.clone(), &a * 2);
        let prev = rec[j].clone();
        rec.push(&w * &prev + (&one - &w) * (&one - &prev));
        prod *= &one - BigRational::new(big_n.clone(), a);
        let sign = if (j + 1) % 2 == 0 {
            one.clone()
        } else {
            -one.clone()
        };
        closed.push(&half + &half * sign * &prod);
    }
    Ok(RhoSequence {
        recursion: rec,
        closed_form: closed,
    })
}

/// White cells stay single points `(x, 0)`; black cells become `(x, +1)` and `(x, -1)`,
/// the last address coordinate projecting to `(1, ..., 1) / 3`.
pub(super) fn materialize(params: &TwoColorParams, region: &Region) -> Result<ExactPointSet> {
    let coloring = TwoColoring::new(params)?;
    let n = params.n;
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    rows.push(vec![1.0 / 3.0; n]);
    let proj = Projection::new(n, rows)?;
    let (lo, hi) = region.bounds();
    let lo: Vec<f64> = lo.iter().map(|x| x - 1.0).collect();
    let hi: Vec<f64> = hi.iter().map(|x| x + 1.0).collect();
    let mut cand = Vec::new();
    for x in super::integer_points(&lo, &hi) {
        let white = coloring.is_white(&x)?;
        let offsets: &[i64] = if white { &[0] } else { &[-1, 1] };
        for &o in offsets {
            let mut a = x.clone();
            a.push(o);
            cand.push(a);
        }
    }
    ExactPointSet::from_candidates(proj, cand, region.clone())
}
