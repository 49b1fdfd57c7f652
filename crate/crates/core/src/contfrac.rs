//! Regular continued fractions `alpha = [0; a_1, a_2, ...]` with exact convergents.
//!
//! Anything that needs `floor(k * alpha)` goes through [`FloorEvaluator`], which
//! brackets `alpha` between a convergent and the adjacent mediant and only
//! answers when the bracket pins the floor down.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// How the listed partial quotients continue.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tail {
    /// The expansion ends: `alpha` is exactly the rational value of the listed terms.
    Terminates,
    /// The block repeats forever after the listed terms (a quadratic irrational).
    Periodic(Vec<u64>),
    /// `alpha` is irrational but only the listed terms are known.
    Truncated,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuedFraction {
    quotients: Vec<BigUint>,
    tail: Tail,
}

/// `p_k / q_k` for `k >= 0`, with `p_0 / q_0 = 0 / 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convergent {
    pub p: BigInt,
    pub q: BigInt,
}

/// Cutoff on the remainder when expanding a decimal.
pub const DECIMAL_CUTOFF: f64 = 1e-12;

impl ContinuedFraction {
    pub fn new(quotients: Vec<u64>, tail: Tail) -> Result<Self> {
        Self::from_big(quotients.into_iter().map(BigUint::from).collect(), tail)
    }

    pub fn from_big(quotients: Vec<BigUint>, tail: Tail) -> Result<Self> {
        if quotients.iter().any(|a| a.is_zero()) {
            return Err(invalid("partial quotients must be >= 1"));
        }
        if let Tail::Periodic(block) = &tail {
            if block.is_empty() || block.contains(&0) {
                return Err(invalid(
                    "periodic block must be nonempty with quotients >= 1",
                ));
            }
        }
        let (mut quotients, mut tail) = (quotients, tail);
        if let Tail::Periodic(block) = &mut tail {
            // canonical form: shortest period, then absorb matching prefix terms
            let p = (1..=block.len())
                .find(|&p| {
                    block.len() % p == 0 && (p..block.len()).all(|i| block[i] == block[i - p])
                })
                .unwrap_or(block.len());
            block.truncate(p);
            while quotients
                .last()
                .is_some_and(|a| *a == BigUint::from(*block.last().unwrap()))
            {
                quotients.pop();
                block.rotate_right(1);
            }
        }
        Ok(ContinuedFraction { quotients, tail })
    }

    /// `(sqrt 5 - 1) / 2 = [0; 1, 1, 1, ...]`.
    pub fn golden() -> Self {
        ContinuedFraction {
            quotients: vec![],
            tail: Tail::Periodic(vec![1]),
        }
    }

    /// `sqrt 2 - 1 = [0; 2, 2, 2, ...]`.
    pub fn silver() -> Self {
        ContinuedFraction {
            quotients: vec![],
            tail: Tail::Periodic(vec![2]),
        }
    }

    pub fn periodic(prefix: Vec<u64>, block: Vec<u64>) -> Result<Self> {
        Self::new(prefix, Tail::Periodic(block))
    }

    /// Exact expansion of `p / q` with `0 <= p <= q`, `q > 0`.
    pub fn rational(p: u64, q: u64) -> Result<Self> {
        if q == 0 || p > q {
            return Err(invalid(format!("rational {p}/{q} is not in [0, 1]")));
        }
        let (mut num, mut den) = (q, p);
        let mut quotients = Vec::new();
        while den != 0 {
            quotients.push(num / den);
            let r = num % den;
            num = den;
            den = r;
        }
        Self::new(quotients, Tail::Terminates)
    }

    /// Expansion of a decimal in `[0, 1]`, stopped once the remainder falls below
    /// [`DECIMAL_CUTOFF`]. An exactly terminating expansion yields a rational; a cut
    /// one is treated as an irrational known to the computed terms.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) {
            return Err(invalid(format!("alpha = {x} is not in [0, 1]")));
        }
        let mut quotients = Vec::new();
        let mut rem = x;
        loop {
            if rem == 0.0 {
                return Self::new(quotients, Tail::Terminates);
            }
            if rem < DECIMAL_CUTOFF || quotients.len() >= 60 {
                return Self::new(quotients, Tail::Truncated);
            }
            let inv = 1.0 / rem;
            let a = inv.floor();
            if a > 1e15 {
                return Self::new(quotients, Tail::Truncated);
            }
            quotients.push(a as u64);
            rem = inv - a;
        }
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn listed_quotients(&self) -> &[BigUint] {
        &self.quotients
    }

    pub fn is_rational(&self) -> bool {
        self.tail == Tail::Terminates
    }

    /// Number of available partial quotients; `None` when unbounded.
    pub fn available_terms(&self) -> Option<usize> {
        match self.tail {
            Tail::Periodic(_) => None,
            _ => Some(self.quotients.len()),
        }
    }

    /// Partial quotient `a_k` for `k >= 1`.
    pub fn term(&self, k: usize) -> Option<BigUint> {
        if k == 0 {
            return None;
        }
        if let Some(a) = self.quotients.get(k - 1) {
            return Some(a.clone());
        }
        match &self.tail {
            Tail::Periodic(block) => {
                let i = (k - 1 - self.quotients.len()) % block.len();
                Some(BigUint::from(block[i]))
            }
            _ => None,
        }
    }

    fn need(&self, k: usize) -> Result<BigUint> {
        self.term(k).ok_or_else(|| {
            Error::NeedsMoreTerms(format!(
                "partial quotient a_{k} is not available ({} listed)",
                self.quotients.len()
            ))
        })
    }

    /// Convergents `p_k / q_k` for `k = 0..=max_k`.
    pub fn convergents(&self, max_k: usize) -> Result<Vec<Convergent>> {
        let mut out = Vec::with_capacity(max_k + 1);
        let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
        let (mut p, mut q) = (BigInt::zero(), BigInt::one());
        out.push(Convergent {
            p: p.clone(),
            q: q.clone(),
        });
        for k in 1..=max_k {
            let a = BigInt::from(self.need(k)?);
            let p_next = &a * &p + &p_prev;
            let q_next = &a * &q + &q_prev;
            p_prev = std::mem::replace(&mut p, p_next);
            q_prev = std::mem::replace(&mut q, q_next);
            out.push(Convergent {
                p: p.clone(),
                q: q.clone(),
            });
        }
        Ok(out)
    }

    /// Nearest double, from a convergent with large denominator.
    pub fn to_f64(&self) -> f64 {
        let max_k = match self.available_terms() {
            Some(n) => n,
            None => self.quotients.len() + 80,
        };
        let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
        let (mut p, mut q) = (BigInt::zero(), BigInt::one());
        for k in 1..=max_k {
            let a = BigInt::from(self.term(k).expect("term within range"));
            let p_next = &a * &p + &p_prev;
            let q_next = &a * &q + &q_prev;
            p_prev = std::mem::replace(&mut p, p_next);
            q_prev = std::mem::replace(&mut q, q_next);
            if q.bits() > 120 {
                break;
            }
        }
        ratio_to_f64(&p, &q)
    }

    /// Morse–Hedlund recurrence value `q_k + q_{k+1}` with `q_k <= l < q_{k+1}`.
    /// For `l < 1` the smallest index `k = 0` is used.
    pub fn recurrence_formula(&self, l: u64) -> Result<BigUint> {
        if self.is_rational() {
            return Err(Error::NeedsMoreTerms(
                "recurrence formula requires an irrational alpha; this expansion terminates".into(),
            ));
        }
        let l = BigUint::from(l);
        let (mut q_prev, mut q) = (BigUint::zero(), BigUint::one());
        let mut k = 0usize;
        loop {
            let a = self.need(k + 1)?;
            let q_next = &a * &q + &q_prev;
            if q_next > l {
                return Ok(q + q_next);
            }
            q_prev = std::mem::replace(&mut q, q_next);
            k += 1;
        }
    }

    /// Whether `a_1..a_K` are all `<= bound`. This only inspects K terms; it is a
    /// finite proxy for bounded partial quotients, not a verdict on `alpha`.
    pub fn is_badly_approximable(&self, terms: usize, bound: u64) -> Result<bool> {
        let bound = BigUint::from(bound);
        for k in 1..=terms {
            if self.need(k)? > bound {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Evaluator for `floor(k * alpha)` with `|k| <= max_abs_k`.
    pub fn floor_evaluator(&self, max_abs_k: u64) -> FloorEvaluator {
        FloorEvaluator::new(self, max_abs_k)
    }

    /// Beatty symbols `b_k = floor((k+1) alpha) - floor(k alpha)` for `k` in `from..to`.
    pub fn beatty_symbols(&self, from: i64, to: i64) -> Result<Vec<u8>> {
        let bound = from.unsigned_abs().max(to.unsigned_abs()) + 1;
        let ev = self.floor_evaluator(bound);
        let mut prev = ev.floor_mul(from)?;
        let mut out = Vec::with_capacity((to - from).max(0) as usize);
        for k in from..to {
            let next = ev.floor_mul(k + 1)?;
            out.push((next - prev) as u8);
            prev = next;
        }
        Ok(out)
    }
}

fn ratio_to_f64(p: &BigInt, q: &BigInt) -> f64 {
    let shift = (q.bits().max(p.bits()) as i64 - 60).max(0) as usize;
    let ps = (p >> shift).to_f64().unwrap_or(0.0);
    let qs = (q >> shift).to_f64().unwrap_or(1.0);
    ps / qs
}

impl fmt::Display for ContinuedFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cf:")?;
        let listed: Vec<String> = self.quotients.iter().map(|a| a.to_string()).collect();
        write!(f, "{}", listed.join(","))?;
        match &self.tail {
            Tail::Terminates => Ok(()),
            Tail::Truncated => write!(f, "{}?", if listed.is_empty() { "" } else { "," }),
            Tail::Periodic(block) => {
                let b: Vec<String> = block.iter().map(|a| a.to_string()).collect();
                write!(
                    f,
                    "{}[{}]",
                    if listed.is_empty() { "" } else { "," },
                    b.join(",")
                )
            }
        }
    }
}

impl Serialize for ContinuedFraction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ContinuedFraction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Accepts `golden`, `silver`, `cf:a1,a2,...` (terminating), `cf:a1,...,ak,...`
/// (last quotient repeats), `cf:a1,...,[b1,...,bm]` (periodic block),
/// `cf:a1,...,ak,?` (irrational, truncated) or a decimal in `[0, 1]`.
impl FromStr for ContinuedFraction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "golden" => return Ok(Self::golden()),
            "silver" => return Ok(Self::silver()),
            _ => {}
        }
        if let Some(body) = s.strip_prefix("cf:") {
            let body = body.trim();
            let parse_list = |t: &str| -> Result<Vec<BigUint>> {
                t.split(',')
                    .map(str::trim)
                    .filter(|x| !x.is_empty())
                    .map(|x| {
                        x.parse::<BigUint>()
                            .map_err(|_| invalid(format!("bad partial quotient '{x}'")))
                    })
                    .collect()
            };
            let small = |v: Vec<BigUint>| -> Result<Vec<u64>> {
                v.iter()
                    .map(|a| {
                        a.to_u64()
                            .ok_or_else(|| invalid("periodic quotients must fit in 64 bits"))
                    })
                    .collect()
            };
            if let Some(open) = body.find('[') {
                let close = body
                    .rfind(']')
                    .ok_or_else(|| invalid("unclosed '[' in continued fraction"))?;
                let prefix = parse_list(&body[..open])?;
                let block = small(parse_list(&body[open + 1..close])?)?;
                return Self::from_big(prefix, Tail::Periodic(block));
            }
            if let Some(head) = body.strip_suffix("...") {
                let mut list = parse_list(head)?;
                let last = list
                    .pop()
                    .ok_or_else(|| invalid("'...' needs at least one quotient"))?;
                return Self::from_big(list, Tail::Periodic(small(vec![last])?));
            }
            if let Some(head) = body.strip_suffix('?') {
                return Self::from_big(parse_list(head)?, Tail::Truncated);
            }
            return Self::from_big(parse_list(body)?, Tail::Terminates);
        }
        let x: f64 = s
            .parse()
            .map_err(|_| invalid(format!("cannot parse alpha '{s}'")))?;
        Self::from_f64(x)
    }
}

/// Certified `floor(k * alpha)`.
#[derive(Clone, Debug)]
pub struct FloorEvaluator {
    /// Exact value when the expansion terminates.
    exact: Option<(BigInt, BigInt)>,
    /// `(p_j, q_j)` for `j = -1, 0, 1, ..., J`.
    conv: Vec<(BigInt, BigInt)>,
    small: Vec<(i128, i128)>,
}

impl FloorEvaluator {
    fn new(cf: &ContinuedFraction, max_abs_k: u64) -> Self {
        let mut conv = vec![
            (BigInt::one(), BigInt::zero()),
            (BigInt::zero(), BigInt::one()),
        ];
        let target = BigInt::from(max_abs_k) * BigInt::from(max_abs_k) * 4 + 16;
        let mut k = 1;
        loop {
            let Some(a) = cf.term(k) else { break };
            let a = BigInt::from(a);
            let n = conv.len();
            let p = &a * &conv[n - 1].0 + &conv[n - 2].0;
            let q = &a * &conv[n - 1].1 + &conv[n - 2].1;
            conv.push((p, q));
            k += 1;
            if cf.available_terms().is_none() && conv.last().unwrap().1 > target && k > 4 {
                break;
            }
        }
        let exact = if cf.is_rational() {
            conv.last().cloned()
        } else {
            None
        };
        let small = conv
            .iter()
            .map_while(|(p, q)| match (p.to_i128(), q.to_i128()) {
                (Some(p), Some(q)) if q < (1i128 << 60) && p < (1i128 << 60) => Some((p, q)),
                _ => None,
            })
            .collect();
        FloorEvaluator { exact, conv, small }
    }

    pub fn floor_mul(&self, k: i64) -> Result<i64> {
        if k == 0 {
            return Ok(0);
        }
        if let Some((p, q)) = &self.exact {
            let v = (BigInt::from(k) * p).div_floor(q);
            return v
                .to_i64()
                .ok_or_else(|| Error::ResourceLimit("floor out of i64 range".into()));
        }
        // bracket alpha strictly between p_j/q_j and (p_j + p_{j-1})/(q_j + q_{j-1})
        let start = self.start_index(k);
        for j in start..self.conv.len() {
            if j < self.small.len() && k.unsigned_abs() < (1u64 << 62) {
                if let Some(f) = certify_small(k as i128, self.small[j], self.small[j - 1]) {
                    return Ok(f as i64);
                }
                continue;
            }
            if let Some(f) = certify_big(k, &self.conv[j], &self.conv[j - 1]) {
                return f
                    .to_i64()
                    .ok_or_else(|| Error::ResourceLimit("floor out of i64 range".into()));
            }
        }
        Err(Error::NeedsMoreTerms(format!(
            "cannot certify floor({k} * alpha) with {} partial quotients",
            self.conv.len() - 2
        )))
    }

    fn start_index(&self, k: i64) -> usize {
        let ak = k.unsigned_abs() as i128;
        // first j >= 1 whose denominator reaches |k|, backed off by one
        let mut j = 1;
        while j + 1 < self.small.len() && self.small[j].1 < ak {
            j += 1;
        }
        j.saturating_sub(1).max(1)
    }
}

fn certify_small(k: i128, cj: (i128, i128), cprev: (i128, i128)) -> Option<i128> {
    let (p1, q1) = cj;
    let (p2, q2) = (cj.0 + cprev.0, cj.1 + cprev.1);
    // order the endpoints: p1/q1 < p2/q2 ?
    let (lo, hi) = if p1 * q2 < p2 * q1 {
        ((p1, q1), (p2, q2))
    } else {
        ((p2, q2), (p1, q1))
    };
    let (a, b) = if k > 0 { (lo, hi) } else { (hi, lo) };
    // k*alpha lies strictly between k*a and k*b
    let f = (k * a.0).div_euclid(a.1);
    if k * b.0 <= (f + 1) * b.1 {
        Some(f)
    } else {
        None
    }
}

fn certify_big(k: i64, cj: &(BigInt, BigInt), cprev: &(BigInt, BigInt)) -> Option<BigInt> {
    let (p1, q1) = (cj.0.clone(), cj.1.clone());
    let (p2, q2) = (&cj.0 + &cprev.0, &cj.1 + &cprev.1);
    let (lo, hi) = if &p1 * &q2 < &p2 * &q1 {
        ((p1, q1), (p2, q2))
    } else {
        ((p2, q2), (p1, q1))
    };
    let k = BigInt::from(k);
    let (a, b) = if k.is_positive() { (lo, hi) } else { (hi, lo) };
    let f = (&k * &a.0).div_floor(&a.1);
    if &k * &b.0 <= (&f + 1) * &b.1 {
        Some(f)
    } else {
        None
    }
}

/// A growth function evaluated on integers, returning `ceil(g(t))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Growth {
    Constant {
        value: u64,
    },
    /// `g(t) = t^exponent`.
    Power {
        exponent: u32,
    },
    /// `g(t) = factor * t`.
    Linear {
        factor: u64,
    },
}

impl Growth {
    pub fn ceil_at(&self, t: &BigUint) -> BigUint {
        match self {
            Growth::Constant { value } => BigUint::from(*value),
            Growth::Power { exponent } => t.pow(*exponent),
            Growth::Linear { factor } => t * BigUint::from(*factor),
        }
    }
}

/// One verification row of the growth construction at index `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthCheck {
    pub k: usize,
    pub q_k: BigUint,
    pub g_at_q_k: BigUint,
    /// `q_k + q_{k+1}`.
    pub recurrence: BigUint,
}

impl GrowthCheck {
    pub fn holds(&self) -> bool {
        self.recurrence > self.g_at_q_k
    }
}

#[derive(Clone, Debug)]
pub struct GrowthConstruction {
    pub cf: ContinuedFraction,
    pub checks: Vec<GrowthCheck>,
}

/// Default ceiling on the size of `q_k` in the growth construction.
pub const GROWTH_BIT_BUDGET: u64 = 1 << 16;

/// Chooses `a_{k+1} = max(1, ceil(g(q_k)))` for `k = 0..terms`, which forces the
/// recurrence value at `l = q_k` above `g(q_k)`.
pub fn construct_alpha_for_growth(
    g: impl Fn(&BigUint) -> BigUint,
    terms: usize,
    bit_budget: u64,
) -> Result<GrowthConstruction> {
    if terms == 0 {
        return Err(invalid("need at least one partial quotient"));
    }
    let mut quotients = Vec::with_capacity(terms);
    let (mut q_prev, mut q) = (BigUint::zero(), BigUint::one());
    let mut checks = Vec::with_capacity(terms);
    for k in 0..terms {
        let g_q = g(&q);
        let a = if g_q.is_zero() {
            BigUint::one()
        } else {
            g_q.clone()
        };
        let q_next = &a * &q + &q_prev;
        if q_next.bits() > bit_budget {
            return Err(Error::ResourceLimit(format!(
                "q_{} needs {} bits, budget is {bit_budget}",
                k + 1,
                q_next.bits()
            )));
        }
        checks.push(GrowthCheck {
            k,
            q_k: q.clone(),
            g_at_q_k: g_q,
            recurrence: &q + &q_next,
        });
        quotients.push(a);
        q_prev = std::mem::replace(&mut q, q_next);
    }
    Ok(GrowthConstruction {
        cf: ContinuedFraction::from_big(quotients, Tail::Truncated)?,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q_list(cf: &ContinuedFraction, k: usize) -> Vec<u64> {
        cf.convergents(k)
            .unwrap()
            .iter()
            .map(|c| c.q.to_u64().unwrap())
            .collect()
    }

    #[test]
    fn golden_denominators() {
        assert_eq!(q_list(&ContinuedFraction::golden(), 4), vec![1, 1, 2, 3, 5]);
    }

    #[test]
    fn single_quotient() {
        let cf: ContinuedFraction = "cf:2".parse().unwrap();
        let c = cf.convergents(1).unwrap();
        assert_eq!((c[1].p.to_i64().unwrap(), c[1].q.to_i64().unwrap()), (1, 2));
    }

    #[test]
    fn determinant_identity() {
        for cf in [
            ContinuedFraction::golden(),
            "cf:[1,2,3,4,5]".parse().unwrap(),
        ] {
            let c = cf.convergents(20).unwrap();
            for k in 1..=20 {
                let det = &c[k].p * &c[k - 1].q - &c[k - 1].p * &c[k].q;
                let sign = if (k - 1) % 2 == 0 { 1 } else { -1 };
                assert_eq!(det, BigInt::from(sign), "k = {k}");
            }
        }
    }

    #[test]
    fn recurrence_examples() {
        let g = ContinuedFraction::golden();
        assert_eq!(g.recurrence_formula(1).unwrap(), BigUint::from(3u32));
        assert_eq!(g.recurrence_formula(3).unwrap(), BigUint::from(8u32));
        // l = q_3 = 3 exactly sits in [q_3, q_4)
        assert_eq!(g.recurrence_formula(2).unwrap(), BigUint::from(5u32));
        assert_eq!(g.recurrence_formula(4).unwrap(), BigUint::from(8u32));
        assert_eq!(g.recurrence_formula(5).unwrap(), BigUint::from(13u32));
        let r = ContinuedFraction::rational(1, 2).unwrap();
        assert!(matches!(
            r.recurrence_formula(1),
            Err(Error::NeedsMoreTerms(_))
        ));
        let t = ContinuedFraction::new(vec![1, 1], Tail::Truncated).unwrap();
        assert!(matches!(
            t.recurrence_formula(10),
            Err(Error::NeedsMoreTerms(_))
        ));
    }

    #[test]
    fn badly_approximable_proxy() {
        assert!(ContinuedFraction::golden()
            .is_badly_approximable(50, 1)
            .unwrap());
        let cf: ContinuedFraction = "cf:1,2,50".parse().unwrap();
        assert!(!cf.is_badly_approximable(3, 10).unwrap());
        assert!(cf.is_badly_approximable(2, 10).unwrap());
        assert!(matches!(
            cf.is_badly_approximable(4, 100),
            Err(Error::NeedsMoreTerms(_))
        ));
    }

    #[test]
    fn growth_construction_linear() {
        let c = construct_alpha_for_growth(|t| t.clone(), 11, GROWTH_BIT_BUDGET).unwrap();
        for (k, row) in c.checks.iter().enumerate() {
            assert!(row.holds(), "k = {k}");
            assert_eq!(c.cf.term(k + 1).unwrap(), row.q_k);
        }
    }

    #[test]
    fn growth_construction_constant_is_golden() {
        let c = construct_alpha_for_growth(|_| BigUint::one(), 20, GROWTH_BIT_BUDGET).unwrap();
        assert!(c.cf.listed_quotients().iter().all(|a| a.is_one()));
    }

    #[test]
    fn growth_construction_square() {
        let g = Growth::Power { exponent: 2 };
        let c = construct_alpha_for_growth(|t| g.ceil_at(t), 6, GROWTH_BIT_BUDGET).unwrap();
        let q2 = &c.checks[2].q_k;
        assert!(c.checks[2].recurrence > q2 * q2);
        let a2 = c.cf.term(2).unwrap().to_u64().unwrap();
        let a3 = c.cf.term(3).unwrap().to_u64().unwrap();
        assert!(a3 > 1);
        // bound between a_2 and a_3 rejects
        assert!(!c.cf.is_badly_approximable(6, a2.max(a3 - 1)).unwrap());
        assert!(c.checks.iter().all(GrowthCheck::holds));
    }

    #[test]
    fn growth_budget_is_enforced() {
        let g = Growth::Power { exponent: 2 };
        let e = construct_alpha_for_growth(|t| g.ceil_at(t), 40, 256).unwrap_err();
        assert!(matches!(e, Error::ResourceLimit(_)));
    }

    #[test]
    fn golden_beatty_symbols() {
        let b = ContinuedFraction::golden().beatty_symbols(1, 11).unwrap();
        assert_eq!(b, vec![1, 0, 1, 1, 0, 1, 0, 1, 1, 0]);
    }

    #[test]
    fn floor_matches_float_away_from_integers() {
        let cf: ContinuedFraction = "cf:[1,2,3]".parse().unwrap();
        let alpha = cf.to_f64();
        let ev = cf.floor_evaluator(100_000);
        for k in (-100_000i64..=100_000).step_by(997) {
            let x = k as f64 * alpha;
            if (x - x.round()).abs() > 1e-6 {
                assert_eq!(ev.floor_mul(k).unwrap(), x.floor() as i64, "k = {k}");
            }
        }
    }

    #[test]
    fn rational_floor_is_exact() {
        let cf = ContinuedFraction::rational(1, 2).unwrap();
        let ev = cf.floor_evaluator(10);
        assert_eq!(ev.floor_mul(4).unwrap(), 2);
        assert_eq!(ev.floor_mul(-3).unwrap(), -2);
    }

    #[test]
    fn parsing() {
        let cf: ContinuedFraction = "cf:1,1,1,...".parse().unwrap();
        assert_eq!(cf, ContinuedFraction::golden());
        let d: ContinuedFraction = "0.5".parse().unwrap();
        assert!(d.is_rational());
        let g: ContinuedFraction = "0.6180339887498949".parse().unwrap();
        assert_eq!(g.tail(), &Tail::Truncated);
        assert!(g.listed_quotients().iter().take(10).all(|a| a.is_one()));
        assert!("cf:1,0".parse::<ContinuedFraction>().is_err());
        assert!("banana".parse::<ContinuedFraction>().is_err());
        assert_eq!(ContinuedFraction::golden().to_string(), "cf:[1]");
        assert!((ContinuedFraction::golden().to_f64() - 0.6180339887498949).abs() < 1e-15);
    }
}
