use crate::error::{invalid, Result};
use crate::pointset::{ExactPointSet, Projection};
use crate::region::Region;

/// Checks `a_1 >= 1` and `a_j = (4 b_j + 1) a_{j-1}` with `b_j >= 1`.
pub fn validate_deleted_lines(a: &[u64]) -> Result<()> {
    if a.is_empty() {
        return Err(invalid(
            "deleted-lines construction needs at least one level",
        ));
    }
    if a[0] == 0 {
        return Err(invalid("a_1 must be >= 1"));
    }
    for (j, w) in a.windows(2).enumerate() {
        let (prev, cur) = (w[0], w[1]);
        let ok = cur % prev == 0 && cur / prev >= 5 && (cur / prev) % 4 == 1;
        if !ok {
            return Err(invalid(format!(
                "a_{} = {cur} is not (4b + 1) * a_{} = (4b + 1) * {prev} with b >= 1",
                j + 2,
                j + 1
            )));
        }
    }
    if a.iter().any(|&x| x > (i64::MAX as u64) / 8) {
        return Err(invalid("level sizes too large"));
    }
    Ok(())
}

/// The deepest level whose line system contains `p`, with the system index
/// (0 = lines parallel to x, 1 = y, 2 = z). Nested congruences make the
/// satisfied levels an initial run, so "deepest" is well defined.
pub fn deleted_line_level(p: [i64; 3], a: &[u64]) -> Option<(usize, usize)> {
    for axis in 0..3 {
        // lines parallel to `axis`: next coordinate = a, the one after = -a (mod 4a)
        let u = p[(axis + 1) % 3];
        let v = p[(axis + 2) % 3];
        let mut depth = 0;
        for (j, &aj) in a.iter().enumerate() {
            let aj = aj as i64;
            let m = 4 * aj;
            if (u - aj).rem_euclid(m) == 0 && (v + aj).rem_euclid(m) == 0 {
                depth = j + 1;
            } else {
                break;
            }
        }
        if depth > 0 {
            return Some((axis, depth));
        }
    }
    None
}

/// Removed at odd levels, restored at even ones.
pub(crate) fn is_deleted(p: [i64; 3], a: &[u64]) -> bool {
    matches!(deleted_line_level(p, a), Some((_, d)) if d % 2 == 1)
}

pub(super) fn materialize(a: &[u64], region: &Region) -> Result<ExactPointSet> {
    let (lo, hi) = region.bounds();
    let pts: Vec<Vec<i64>> = super::integer_points(&lo, &hi)
        .into_iter()
        .filter(|p| !is_deleted([p[0], p[1], p[2]], a))
        .collect();
    ExactPointSet::from_candidates(Projection::identity(3), pts, region.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::PointSetSource;
    use crate::pointset::{delone_constants, PointCloud};

    #[test]
    fn level_one_removes_four_per_direction() {
        let src = PointSetSource::deleted_lines(vec![1]).unwrap();
        let set = src
            .materialize(&Region::new_box(vec![0.0; 3], vec![3.0; 3]).unwrap())
            .unwrap();
        assert_eq!(set.len(), 64 - 12);
        let mut per_axis = [0; 3];
        for p in crate::generators::integer_points(&[0.0; 3], &[3.0; 3]) {
            if let Some((axis, 1)) = deleted_line_level([p[0], p[1], p[2]], &[1]) {
                per_axis[axis] += 1;
            }
        }
        assert_eq!(per_axis, [4, 4, 4]);
        assert!(!set.contains_address(&[0, 1, 3]));
    }

    #[test]
    fn level_two_restores() {
        let a = [1, 5];
        assert_eq!(deleted_line_level([0, 5, -5], &a), Some((0, 2)));
        assert!(!is_deleted([0, 5, -5], &a));
        assert!(is_deleted([0, 1, -1], &a));
        let src = PointSetSource::deleted_lines(a.to_vec()).unwrap();
        let set = src
            .materialize(&Region::centered_cube(3, 6.0).unwrap())
            .unwrap();
        assert!(set.contains_address(&[0, 5, -5]));
        assert!(!set.contains_address(&[0, 1, -1]));
    }

    #[test]
    fn malformed_sequences() {
        assert!(validate_deleted_lines(&[]).is_err());
        assert!(validate_deleted_lines(&[0]).is_err());
        assert!(validate_deleted_lines(&[2, 6]).is_err());
        assert!(validate_deleted_lines(&[2, 2]).is_err());
        assert!(validate_deleted_lines(&[2, 10, 90]).is_ok());
    }

    #[test]
    fn uniformly_discrete() {
        let src = PointSetSource::deleted_lines(vec![2]).unwrap();
        let set = src
            .materialize(&Region::centered_cube(3, 6.0).unwrap())
            .unwrap();
        assert_eq!(delone_constants(&set).unwrap().r, 0.5);
    }
}
