use std::collections::HashSet;

use super::integer_points;
use crate::error::Result;
use crate::pointset::{ExactPointSet, Projection};
use crate::region::Region;

pub(super) fn materialize(
    n: usize,
    deletions: &[Vec<i64>],
    region: &Region,
) -> Result<ExactPointSet> {
    let removed: HashSet<&[i64]> = deletions.iter().map(Vec::as_slice).collect();
    let (lo, hi) = region.bounds();
    let pts: Vec<Vec<i64>> = integer_points(&lo, &hi)
        .into_iter()
        .filter(|p| !removed.contains(p.as_slice()))
        .collect();
    ExactPointSet::from_candidates(Projection::identity(n), pts, region.clone())
}

#[cfg(test)]
mod tests {
    use crate::generators::PointSetSource;
    use crate::pointset::PointCloud;
    use crate::region::Region;

    #[test]
    fn examples() {
        let z = PointSetSource::integer_lattice(1, vec![]).unwrap();
        let s = z
            .materialize(&Region::interval(-3.0, 3.0).unwrap())
            .unwrap();
        let got: Vec<i64> = s.addresses().map(|a| a[0]).collect();
        assert_eq!(got, vec![-3, -2, -1, 0, 1, 2, 3]);

        let z2 = PointSetSource::integer_lattice(2, vec![vec![0, 0]]).unwrap();
        assert_eq!(
            z2.materialize(&Region::centered_cube(2, 1.0).unwrap())
                .unwrap()
                .len(),
            8
        );

        let z3 = PointSetSource::integer_lattice(3, vec![]).unwrap();
        let r = Region::new_box(vec![0.0; 3], vec![1.0; 3]).unwrap();
        assert_eq!(z3.materialize(&r).unwrap().len(), 8);
    }
}
