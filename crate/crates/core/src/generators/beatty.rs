use crate::contfrac::ContinuedFraction;
use crate::error::{invalid, Result};
use crate::pointset::{ExactPointSet, PointCloud, Projection};
use crate::region::Region;

// Point i sits after i gaps from the origin; the number of long gaps among
// b_0..b_{i-1} telescopes to floor(i * alpha), for negative i as well.
pub(super) fn materialize(
    alpha: &ContinuedFraction,
    tau: f64,
    region: &Region,
) -> Result<ExactPointSet> {
    let (lo, hi) = region.bounds();
    let (a, b) = (lo[0], hi[0]);
    let af = alpha.to_f64();
    let mean = 1.0 + (tau - 1.0) * af;
    let mut i_lo = (a / mean).floor() as i64 - 2;
    let mut i_hi = (b / mean).ceil() as i64 + 2;
    let bound = i_lo.unsigned_abs().max(i_hi.unsigned_abs()) * 2 + 64;
    let ev = alpha.floor_evaluator(bound);
    let pos = |i: i64| -> Result<f64> {
        let f = ev.floor_mul(i)?;
        Ok((i - f) as f64 + tau * f as f64)
    };
    while pos(i_lo)? >= a {
        i_lo -= 4;
    }
    while pos(i_hi)? <= b {
        i_hi += 4;
    }
    if i_lo.unsigned_abs().max(i_hi.unsigned_abs()) > bound {
        return Err(invalid("Beatty window search left the evaluator range"));
    }
    let mut addrs = Vec::with_capacity((i_hi - i_lo + 1) as usize);
    for i in i_lo..=i_hi {
        let f = ev.floor_mul(i)?;
        addrs.push(vec![i - f, f]);
    }
    let proj = Projection::new(1, vec![vec![1.0], vec![tau]])?;
    ExactPointSet::from_candidates(proj, addrs, region.clone())
}

/// Beatty symbols `b_k` for `k` in `from..to`.
pub fn beatty_word(alpha: &ContinuedFraction, from: i64, to: i64) -> Result<Vec<u8>> {
    alpha.beatty_symbols(from, to)
}

/// Reads the gap word off a one-dimensional rank-2 set in left-to-right order:
/// symbol 1 where the second address coordinate steps, 0 otherwise.
pub fn gap_word(set: &ExactPointSet) -> Result<Vec<u8>> {
    if set.dimension() != 1 || set.rank() != 2 {
        return Err(invalid("gap word needs a one-dimensional set of rank 2"));
    }
    let mut order: Vec<usize> = (0..set.len()).collect();
    order.sort_by(|&i, &j| set.position(i)[0].total_cmp(&set.position(j)[0]));
    order
        .windows(2)
        .map(|w| {
            let (p, q) = (set.address(w[0]), set.address(w[1]));
            match q[1] - p[1] {
                0 => Ok(0),
                1 => Ok(1),
                d => Err(invalid(format!("unexpected address step {d} in gap word"))),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::PointSetSource;
    use crate::pointset::delone_constants;

    #[test]
    fn rational_alpha_gives_periodic_gaps() {
        let src = PointSetSource::beatty(ContinuedFraction::rational(1, 2).unwrap(), 2.0).unwrap();
        let set = src
            .materialize(&Region::interval(0.0, 30.0).unwrap())
            .unwrap();
        let xs: Vec<f64> = (0..set.len()).map(|i| set.position(i)[0]).collect();
        let gaps: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        assert_eq!(&gaps[..6], &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
    }

    #[test]
    fn rational_period() {
        // alpha = 2/5: gap word has period 5
        let alpha = ContinuedFraction::rational(2, 5).unwrap();
        let w = beatty_word(&alpha, -40, 40).unwrap();
        assert!(w.windows(6).all(|x| x[0] == x[5]));
    }

    #[test]
    fn address_bookkeeping() {
        let src = PointSetSource::fibonacci();
        let set = src
            .materialize(&Region::interval(-0.5, 3.0).unwrap())
            .unwrap();
        // x_0 = 0, first gap is b_0 = floor(alpha) - 0 = 0 (unit), then b_1 = 1 (tau)
        let i = set
            .index_of(&[1, 1])
            .expect("point after one unit and one tau gap");
        let tau = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((set.position(i)[0] - (1.0 + tau)).abs() < 1e-12);
    }

    #[test]
    fn fibonacci_delone_constants() {
        let src = PointSetSource::fibonacci();
        let tau = (1.0 + 5f64.sqrt()) / 2.0;
        // about 50 tiles
        let set = src
            .materialize(&Region::interval(0.0, 50.0 * 1.447).unwrap())
            .unwrap();
        let c = delone_constants(&set).unwrap();
        assert_eq!(c.r, 0.5);
        assert!((c.big_r - tau / 2.0).abs() < 1e-12, "{}", c.big_r);
    }

    #[test]
    fn gap_word_matches_beatty_word() {
        let alpha: ContinuedFraction = "cf:[2,1,3]".parse().unwrap();
        let src = PointSetSource::beatty(alpha.clone(), 1.7).unwrap();
        let set = src
            .materialize(&Region::interval(-0.1, 300.0).unwrap())
            .unwrap();
        let w = gap_word(&set).unwrap();
        assert_eq!(w, beatty_word(&alpha, 0, w.len() as i64).unwrap());
    }

    #[test]
    fn tau_must_exceed_one() {
        assert!(PointSetSource::beatty(ContinuedFraction::golden(), 1.0).is_err());
    }
}
