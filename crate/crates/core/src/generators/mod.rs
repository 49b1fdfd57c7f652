//! Point-set constructions, each materializable on any requested region.

mod beatty;
mod cut_project;
mod deleted_lines;
mod lattice;
mod product;
mod two_color;

pub use beatty::{beatty_word, gap_word};
pub use deleted_lines::{deleted_line_level, validate_deleted_lines};
pub use two_color::{rho_sequence, RhoSequence, TwoColorParams, TwoColoring};

use serde::{Deserialize, Serialize};

use crate::contfrac::ContinuedFraction;
use crate::error::{invalid, Result};
use crate::pointset::ExactPointSet;
use crate::region::Region;

/// Parameters of one construction; the serialized form is the generator descriptor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "construction", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Construction {
    /// `Z^n` with finitely many points removed.
    IntegerLattice {
        n: usize,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        deletions: Vec<Vec<i64>>,
    },
    /// Gaps of length 1 or `tau` following the Beatty word of `alpha`.
    Beatty {
        alpha: ContinuedFraction,
        tau: f64,
    },
    /// Lattice points of `Z^2` with `p - alpha m` in `[0, 1)`, projected onto the line of slope `alpha`.
    CutProject {
        alpha: ContinuedFraction,
    },
    Product {
        factors: Vec<PointSetSource>,
    },
    /// Three systems of axis-parallel lattice lines removed from `Z^3`, toggled level by level.
    DeletedLines {
        a: Vec<u64>,
    },
    /// The hierarchical two-colored lattice, black points split into `x ± (1,...,1)/3`.
    TwoColor(TwoColorParams),
}

/// A construction that can produce the complete set inside any region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointSetSource {
    construction: Construction,
}

impl PointSetSource {
    pub fn new(construction: Construction) -> Result<Self> {
        let s = PointSetSource { construction };
        s.validate()?;
        Ok(s)
    }

    pub fn integer_lattice(n: usize, deletions: Vec<Vec<i64>>) -> Result<Self> {
        Self::new(Construction::IntegerLattice { n, deletions })
    }

    pub fn beatty(alpha: ContinuedFraction, tau: f64) -> Result<Self> {
        Self::new(Construction::Beatty { alpha, tau })
    }

    /// Golden-ratio Beatty set with long gap equal to the golden ratio.
    pub fn fibonacci() -> Self {
        Self::beatty(ContinuedFraction::golden(), (1.0 + 5f64.sqrt()) / 2.0)
            .expect("valid parameters")
    }

    pub fn cut_project(alpha: ContinuedFraction) -> Result<Self> {
        Self::new(Construction::CutProject { alpha })
    }

    pub fn product(factors: Vec<PointSetSource>) -> Result<Self> {
        Self::new(Construction::Product { factors })
    }

    pub fn deleted_lines(a: Vec<u64>) -> Result<Self> {
        Self::new(Construction::DeletedLines { a })
    }

    pub fn two_color(params: TwoColorParams) -> Result<Self> {
        Self::new(Construction::TwoColor(params))
    }

    pub fn construction(&self) -> &Construction {
        &self.construction
    }

    pub fn name(&self) -> &'static str {
        match &self.construction {
            Construction::IntegerLattice { .. } => "integer-lattice",
            Construction::Beatty { .. } => "beatty",
            Construction::CutProject { .. } => "cut-project",
            Construction::Product { .. } => "product",
            Construction::DeletedLines { .. } => "deleted-lines",
            Construction::TwoColor(_) => "two-color",
        }
    }

    pub fn descriptor(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("descriptor serializes")
    }

    pub fn dimension(&self) -> usize {
        match &self.construction {
            Construction::IntegerLattice { n, .. } => *n,
            Construction::Beatty { .. } | Construction::CutProject { .. } => 1,
            Construction::Product { factors } => factors.iter().map(|f| f.dimension()).sum(),
            Construction::DeletedLines { .. } => 3,
            Construction::TwoColor(p) => p.n,
        }
    }

    pub fn rank(&self) -> usize {
        match &self.construction {
            Construction::IntegerLattice { n, .. } => *n,
            Construction::Beatty { .. } | Construction::CutProject { .. } => 2,
            Construction::Product { factors } => factors.iter().map(|f| f.rank()).sum(),
            Construction::DeletedLines { .. } => 3,
            Construction::TwoColor(p) => p.n + 1,
        }
    }

    fn validate(&self) -> Result<()> {
        match &self.construction {
            Construction::IntegerLattice { n, deletions } => {
                if *n == 0 {
                    return Err(invalid("lattice dimension must be >= 1"));
                }
                if deletions.iter().any(|d| d.len() != *n) {
                    return Err(invalid("deleted point has the wrong dimension"));
                }
                Ok(())
            }
            Construction::Beatty { tau, .. } => {
                if !(*tau > 1.0 && tau.is_finite()) {
                    return Err(invalid(format!("tau must be > 1, got {tau}")));
                }
                Ok(())
            }
            Construction::CutProject { alpha } => {
                if alpha.is_rational() {
                    return Err(invalid("cut-and-project slope must be irrational"));
                }
                let x = alpha.to_f64();
                if !(x > 0.0 && x < 1.0) {
                    return Err(invalid("cut-and-project slope must lie in (0, 1)"));
                }
                Ok(())
            }
            Construction::Product { factors } => {
                if factors.len() < 2 {
                    return Err(invalid("a product needs at least two factors"));
                }
                factors.iter().try_for_each(|f| f.validate())
            }
            Construction::DeletedLines { a } => validate_deleted_lines(a),
            Construction::TwoColor(p) => p.validate(),
        }
    }

    /// All points of the set inside `region`.
    pub fn materialize(&self, region: &Region) -> Result<ExactPointSet> {
        if region.dimension() != self.dimension() {
            return Err(invalid(format!(
                "region dimension {} differs from construction dimension {}",
                region.dimension(),
                self.dimension()
            )));
        }
        match &self.construction {
            Construction::IntegerLattice { n, deletions } => {
                lattice::materialize(*n, deletions, region)
            }
            Construction::Beatty { alpha, tau } => beatty::materialize(alpha, *tau, region),
            Construction::CutProject { alpha } => cut_project::materialize(alpha, region),
            Construction::Product { factors } => product::materialize(factors, region),
            Construction::DeletedLines { a } => deleted_lines::materialize(a, region),
            Construction::TwoColor(p) => two_color::materialize(p, region),
        }
    }
}

/// Integer points of the box `[lo, hi]` (inclusive, after rounding inward), in lexicographic order.
pub(crate) fn integer_points(lo: &[f64], hi: &[f64]) -> Vec<Vec<i64>> {
    let a: Vec<i64> = lo.iter().map(|x| x.ceil() as i64).collect();
    let b: Vec<i64> = hi.iter().map(|x| x.floor() as i64).collect();
    if a.iter().zip(&b).any(|(x, y)| x > y) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur = a.clone();
    loop {
        out.push(cur.clone());
        let mut k = cur.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if cur[k] < b[k] {
                cur[k] += 1;
                break;
            }
            cur[k] = a[k];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointset::PointCloud;
    use proptest::prelude::*;

    fn sources() -> Vec<PointSetSource> {
        vec![
            PointSetSource::integer_lattice(2, vec![vec![0, 0]]).unwrap(),
            PointSetSource::fibonacci(),
            PointSetSource::beatty("cf:[1,2]".parse().unwrap(), 1.5).unwrap(),
            PointSetSource::cut_project(ContinuedFraction::golden()).unwrap(),
            PointSetSource::product(vec![
                PointSetSource::fibonacci(),
                PointSetSource::fibonacci(),
            ])
            .unwrap(),
            PointSetSource::deleted_lines(vec![1, 5]).unwrap(),
            PointSetSource::two_color(TwoColorParams::new(1, vec![16, 32, 64])).unwrap(),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn nested_regions_restrict_exactly(which in 0usize..7, c in -20.0f64..20.0, w1 in 1.0f64..6.0, extra in 0.5f64..6.0) {
            let src = &sources()[which];
            let n = src.dimension();
            let small = Region::new_box(vec![c - w1; n], vec![c + w1; n]).unwrap();
            let big = Region::new_box(vec![c - w1 - extra; n], vec![c + w1 + extra; n]).unwrap();
            let a = src.materialize(&small).unwrap();
            let b = src.materialize(&big).unwrap().restrict(&small);
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn descriptors_round_trip() {
        for s in sources() {
            let v = s.descriptor();
            let back: PointSetSource = serde_json::from_value(v.clone()).unwrap();
            assert_eq!(back, s, "{v}");
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let src = PointSetSource::fibonacci();
        assert!(src
            .materialize(&Region::centered_cube(2, 3.0).unwrap())
            .is_err());
    }

    #[test]
    fn ball_regions_materialize() {
        let src = PointSetSource::integer_lattice(2, vec![]).unwrap();
        let set = src
            .materialize(&Region::new_ball(vec![0.0, 0.0], 1.0).unwrap())
            .unwrap();
        assert_eq!(set.len(), 5);
    }
}
