use crate::contfrac::ContinuedFraction;
use crate::error::{invalid, Result};
use crate::pointset::{ExactPointSet, Projection};
use crate::region::Region;

/// The strip `0 <= p - alpha m < 1` selects exactly `p = ceil(alpha m)` per column `m`.
pub(super) fn materialize(alpha: &ContinuedFraction, region: &Region) -> Result<ExactPointSet> {
    let af = alpha.to_f64();
    let norm = (1.0 + af * af).sqrt();
    let proj = Projection::new(1, vec![vec![1.0 / norm], vec![af / norm]])?;
    let (lo, hi) = region.bounds();
    let m_lo = (lo[0] / norm).floor() as i64 - 3;
    let m_hi = (hi[0] / norm).ceil() as i64 + 3;
    let bound = m_lo.unsigned_abs().max(m_hi.unsigned_abs()) + 8;
    let ev = alpha.floor_evaluator(bound);
    let mut addrs = Vec::with_capacity((m_hi - m_lo + 1) as usize);
    for m in m_lo..=m_hi {
        let p = -ev.floor_mul(-m)?;
        addrs.push(vec![m, p]);
    }
    if addrs.is_empty() {
        return Err(invalid("empty cut-and-project search range"));
    }
    ExactPointSet::from_candidates(proj, addrs, region.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{beatty_word, gap_word, PointSetSource};
    use crate::pointset::PointCloud;

    fn gaps(set: &ExactPointSet) -> Vec<f64> {
        let xs: Vec<f64> = (0..set.len()).map(|i| set.position(i)[0]).collect();
        xs.windows(2).map(|w| w[1] - w[0]).collect()
    }

    #[test]
    fn golden_gap_lengths() {
        let src = PointSetSource::cut_project(ContinuedFraction::golden()).unwrap();
        let set = src
            .materialize(&Region::interval(-120.0, 120.0).unwrap())
            .unwrap();
        let g = gaps(&set);
        let (s2, l2) = (1.0 / 2f64.sqrt(), 2f64.sqrt());
        assert!(g.iter().all(|x| *x > s2 && *x < l2));
        let mut distinct: Vec<f64> = vec![];
        for x in g {
            if !distinct.iter().any(|d| (d - x).abs() < 1e-9) {
                distinct.push(x);
            }
        }
        assert_eq!(distinct.len(), 2);
        let a = ContinuedFraction::golden().to_f64();
        let short = 1.0 / (1.0 + a * a).sqrt();
        distinct.sort_by(f64::total_cmp);
        assert!((distinct[0] - short).abs() < 1e-12);
        assert!((distinct[1] - (1.0 + a) * short).abs() < 1e-12);
    }

    #[test]
    fn origin_selected() {
        let src = PointSetSource::cut_project("cf:[1,3]".parse().unwrap()).unwrap();
        let set = src
            .materialize(&Region::interval(-1.0, 1.0).unwrap())
            .unwrap();
        assert!(set.contains_address(&[0, 0]));
    }

    #[test]
    fn rational_slope_rejected() {
        assert!(PointSetSource::cut_project(ContinuedFraction::rational(1, 3).unwrap()).is_err());
    }

    #[test]
    fn gap_word_is_mirrored_beatty_word() {
        let alpha = ContinuedFraction::golden();
        let src = PointSetSource::cut_project(alpha.clone()).unwrap();
        let set = src
            .materialize(&Region::interval(-0.1, 150.0).unwrap())
            .unwrap();
        let w = gap_word(&set).unwrap();
        // step m -> m+1 has p-increment b_{-m-1}
        let len = w.len() as i64;
        let mut b = beatty_word(&alpha, -len, 0).unwrap();
        b.reverse();
        assert_eq!(w, b);
    }
}
