//! Axis-aligned boxes and closed balls in R^n.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Closed box `[lo_1, hi_1] x ... x [lo_n, hi_n]` with `lo_i < hi_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxRegion {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(invalid(format!(
                "box bounds have mismatched dimensions {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        for (i, (a, b)) in lo.iter().zip(&hi).enumerate() {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(invalid(format!("box axis {i}: need a < b, got [{a}, {b}]")));
            }
        }
        Ok(BoxRegion { lo, hi })
    }

    /// The cube `[-half, half]^n`.
    pub fn centered_cube(n: usize, half: f64) -> Result<Self> {
        Self::new(vec![-half; n], vec![half; n])
    }

    /// The cube of side `side` centered at `center`.
    pub fn cube(center: &[f64], side: f64) -> Result<Self> {
        let h = side / 2.0;
        Self::new(
            center.iter().map(|c| c - h).collect(),
            center.iter().map(|c| c + h).collect(),
        )
    }

    pub fn dimension(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (a, b))| *a <= *x && *x <= *b)
    }

    pub fn volume(&self) -> f64 {
        (0..self.dimension()).map(|i| self.side(i)).product()
    }

    pub fn surface_area(&self) -> f64 {
        2.0 * self.volume()
            * (0..self.dimension())
                .map(|i| 1.0 / self.side(i))
                .sum::<f64>()
    }

    pub fn width(&self) -> f64 {
        (0..self.dimension())
            .map(|i| self.side(i))
            .fold(f64::INFINITY, f64::min)
    }

    /// Shrinks every face inward by `d`; `None` once some axis becomes empty.
    pub fn eroded(&self, d: f64) -> Option<BoxRegion> {
        let lo: Vec<f64> = self.lo.iter().map(|a| a + d).collect();
        let hi: Vec<f64> = self.hi.iter().map(|b| b - d).collect();
        BoxRegion::new(lo, hi).ok()
    }

    pub fn translated(&self, t: &[f64]) -> BoxRegion {
        BoxRegion {
            lo: self.lo.iter().zip(t).map(|(a, s)| a + s).collect(),
            hi: self.hi.iter().zip(t).map(|(b, s)| b + s).collect(),
        }
    }

    pub fn contains_box(&self, other: &BoxRegion) -> bool {
        self.lo.iter().zip(&other.lo).all(|(a, c)| a <= c)
            && self.hi.iter().zip(&other.hi).all(|(b, d)| d <= b)
    }
}

/// A point-set window: closed box or closed ball.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    Box(BoxRegion),
    Ball { center: Vec<f64>, radius: f64 },
}

impl Region {
    pub fn new_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        BoxRegion::new(lo, hi).map(Region::Box)
    }

    pub fn new_ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(invalid("ball center must have dimension >= 1"));
        }
        if !(radius >= 0.0 && radius.is_finite()) || center.iter().any(|c| !c.is_finite()) {
            return Err(invalid(format!(
                "ball radius must be finite and >= 0, got {radius}"
            )));
        }
        Ok(Region::Ball { center, radius })
    }

    /// `[-half, half]^n`.
    pub fn centered_cube(n: usize, half: f64) -> Result<Self> {
        BoxRegion::centered_cube(n, half).map(Region::Box)
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new_box(vec![a], vec![b])
    }

    pub fn dimension(&self) -> usize {
        match self {
            Region::Box(b) => b.dimension(),
            Region::Ball { center, .. } => center.len(),
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        match self {
            Region::Box(b) => b.contains(p),
            Region::Ball { center, radius } => dist2(p, center) <= radius * radius,
        }
    }

    /// Smallest enclosing box, as `(lo, hi)`; a zero-radius ball gives a degenerate pair.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Region::Box(b) => (b.lo.clone(), b.hi.clone()),
            Region::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
        }
    }

    /// Points of the region whose closed `d`-ball also lies in the region.
    pub fn eroded(&self, d: f64) -> Option<Region> {
        match self {
            Region::Box(b) => b.eroded(d).map(Region::Box),
            Region::Ball { center, radius } => {
                if *radius > d {
                    Some(Region::Ball {
                        center: center.clone(),
                        radius: radius - d,
                    })
                } else {
                    None
                }
            }
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Region::Box(b) => b.volume(),
            Region::Ball { center, radius } => {
                unit_ball_volume(center.len()) * radius.powi(center.len() as i32)
            }
        }
    }

    pub fn as_box(&self) -> Option<&BoxRegion> {
        match self {
            Region::Box(b) => Some(b),
            Region::Ball { .. } => None,
        }
    }

    /// True if the closed ball `B(p; r)` lies inside the region.
    pub fn contains_ball(&self, p: &[f64], r: f64) -> bool {
        match self {
            Region::Box(b) => p
                .iter()
                .zip(b.lo.iter().zip(&b.hi))
                .all(|(x, (a, c))| *x - r >= *a && *x + r <= *c),
            Region::Ball { center, radius } => dist2(p, center).sqrt() + r <= *radius,
        }
    }
}

/// Volume of the unit ball in R^n.
pub fn unit_ball_volume(n: usize) -> f64 {
    let mut k = [1.0, 2.0];
    if n < 2 {
        return k[n];
    }
    let mut v = 0.0;
    for m in 2..=n {
        v = k[m % 2] * 2.0 * std::f64::consts::PI / m as f64;
        k[m % 2] = v;
    }
    v
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RegionDoc {
    Box { intervals: Vec<[f64; 2]> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl Serialize for Region {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let doc = match self {
            Region::Box(b) => RegionDoc::Box {
                intervals: b.lo.iter().zip(&b.hi).map(|(a, c)| [*a, *c]).collect(),
            },
            Region::Ball { center, radius } => RegionDoc::Ball {
                center: center.clone(),
                radius: *radius,
            },
        };
        doc.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Region {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match RegionDoc::deserialize(d)? {
            RegionDoc::Box { intervals } => Region::new_box(
                intervals.iter().map(|i| i[0]).collect(),
                intervals.iter().map(|i| i[1]).collect(),
            ),
            RegionDoc::Ball { center, radius } => Region::new_ball(center, radius),
        }
        .map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_measures() {
        let b = BoxRegion::new(vec![0.0, 0.0], vec![2.0, 3.0]).unwrap();
        assert_eq!(b.volume(), 6.0);
        assert_eq!(b.surface_area(), 2.0 * 6.0 * (0.5 + 1.0 / 3.0));
        assert_eq!(b.width(), 2.0);
    }

    #[test]
    fn rejects_bad_boxes_and_balls() {
        assert!(BoxRegion::new(vec![1.0], vec![1.0]).is_err());
        assert!(BoxRegion::new(vec![0.0, 0.0], vec![1.0]).is_err());
        assert!(Region::new_ball(vec![0.0], -1.0).is_err());
        assert!(Region::new_ball(vec![0.0], 0.0).is_ok());
    }

    #[test]
    fn erosion() {
        let r = Region::centered_cube(2, 5.0).unwrap();
        let e = r.eroded(2.0).unwrap();
        assert_eq!(e.bounds(), (vec![-3.0, -3.0], vec![3.0, 3.0]));
        assert!(r.eroded(5.0).is_none());
        let ball = Region::new_ball(vec![0.0], 3.0).unwrap();
        assert_eq!(
            ball.eroded(1.0).unwrap(),
            Region::new_ball(vec![0.0], 2.0).unwrap()
        );
    }

    #[test]
    fn unit_ball_volumes() {
        assert_eq!(unit_ball_volume(1), 2.0);
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn json_shape() {
        let r = Region::interval(-1.0, 2.0).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, r#"{"kind":"box","intervals":[[-1.0,2.0]]}"#);
        let back: Region = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
        assert!(
            serde_json::from_str::<Region>(r#"{"kind":"box","intervals":[[2.0,1.0]]}"#).is_err()
        );
    }
}
