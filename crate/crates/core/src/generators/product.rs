use super::PointSetSource;
use crate::error::Result;
use crate::pointset::{ExactPointSet, PointCloud, Projection};
use crate::region::Region;

pub(super) fn materialize(factors: &[PointSetSource], region: &Region) -> Result<ExactPointSet> {
    let (lo, hi) = region.bounds();
    let mut parts = Vec::with_capacity(factors.len());
    let mut off = 0;
    for f in factors {
        let d = f.dimension();
        let sub = Region::new_box(lo[off..off + d].to_vec(), hi[off..off + d].to_vec())?;
        parts.push(f.materialize(&sub)?);
        off += d;
    }
    let projs: Vec<&Projection> = parts.iter().map(|p| p.projection()).collect();
    let proj = Projection::block_diagonal(&projs);
    let mut addrs: Vec<Vec<i64>> = vec![Vec::new()];
    for p in &parts {
        let mut next = Vec::with_capacity(addrs.len() * p.len());
        for a in &addrs {
            for b in p.addresses() {
                let mut c = a.clone();
                c.extend_from_slice(b);
                next.push(c);
            }
        }
        addrs = next;
    }
    ExactPointSet::from_candidates(proj, addrs, region.clone())
}

#[cfg(test)]
mod tests {
    use crate::generators::PointSetSource;
    use crate::pointset::PointCloud;
    use crate::region::Region;

    #[test]
    fn z_times_z_is_z2() {
        let z = PointSetSource::integer_lattice(1, vec![]).unwrap();
        let zz = PointSetSource::product(vec![z.clone(), z]).unwrap();
        let r = Region::centered_cube(2, 3.0).unwrap();
        let a = zz.materialize(&r).unwrap();
        let b = PointSetSource::integer_lattice(2, vec![])
            .unwrap()
            .materialize(&r)
            .unwrap();
        assert_eq!(a.flat_addresses(), b.flat_addresses());
        assert_eq!(a.flat_positions(), b.flat_positions());
    }

    #[test]
    fn fibonacci_square_counts() {
        let f = PointSetSource::fibonacci();
        let ff = PointSetSource::product(vec![f.clone(), f.clone()]).unwrap();
        let l = 40.0;
        let one = f
            .materialize(&Region::interval(0.0, l).unwrap())
            .unwrap()
            .len();
        let two = ff
            .materialize(&Region::new_box(vec![0.0, 0.0], vec![l, l]).unwrap())
            .unwrap();
        assert_eq!(two.len(), one * one);
        assert_eq!(two.rank(), 4);
        // symmetric under coordinate swap
        for i in 0..two.len() {
            let p = two.position(i);
            let a = two.address(i);
            let swapped = [a[2], a[3], a[0], a[1]];
            let j = two.index_of(&swapped).expect("swap image present");
            assert_eq!(two.position(j), &[p[1], p[0]][..]);
        }
    }
}
