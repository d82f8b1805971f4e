//! Exact `sup_x ν(x + [-r, r]^d)` on ℤ^d.

use crate::error::{Error, Result};
use crate::group::unrank;
use crate::scalar::Scalar;
use crate::setrep::measure::GridMeasure;

/// Most centers a single scan may evaluate.
pub const MAX_GRID_CANDIDATES: u128 = 1 << 20;

/// Supremum of the cube mass and the lexicographically least center
/// attaining it.
pub fn cube_sup<T: Scalar>(m: &GridMeasure<T>, r: i64) -> Result<(T, Vec<i64>)> {
    let d = m.dimension;
    match (&m.periodic, m.finite.is_empty()) {
        (Some(_), false) => Err(Error::precondition(
            "window scans in ℤ^d need a purely periodic or purely finite measure",
        )),
        (Some((period, _)), true) => {
            let moduli: Vec<u64> = period.iter().map(|&p| p as u64).collect();
            let cells: u128 = moduli.iter().map(|&p| p as u128).product();
            if cells > MAX_GRID_CANDIDATES {
                return Err(Error::CapExceeded { size: cells, cap: MAX_GRID_CANDIDATES });
            }
            let mut best: Option<(T, Vec<i64>)> = None;
            for i in 0..cells as usize {
                let x = unrank(&moduli, i);
                let v = m.cube_mass(&x, r);
                if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
                    best = Some((v, x));
                }
            }
            Ok(best.expect("nonempty box"))
        }
        (None, true) => Ok((T::zero(), vec![0; d])),
        (None, false) => {
            // per coordinate the count only changes where an atom enters the
            // cube, at x_i = q_i - r
            let axes: Vec<Vec<i64>> = (0..d)
                .map(|i| {
                    let mut v: Vec<i64> = m.finite.keys().map(|q| q[i] - r).collect();
                    v.sort();
                    v.dedup();
                    v
                })
                .collect();
            let total: u128 = axes.iter().map(|a| a.len() as u128).product();
            if total > MAX_GRID_CANDIDATES {
                return Err(Error::CapExceeded { size: total, cap: MAX_GRID_CANDIDATES });
            }
            let sizes: Vec<u64> = axes.iter().map(|a| a.len() as u64).collect();
            let mut best: Option<(T, Vec<i64>)> = None;
            for i in 0..total as usize {
                let idx = unrank(&sizes, i);
                let x: Vec<i64> = idx.iter().zip(&axes).map(|(&k, a)| a[k as usize]).collect();
                let v = m.cube_mass(&x, r);
                if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
                    best = Some((v, x));
                }
            }
            Ok(best.expect("at least one atom"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setrep::measure::MeasureSpec;
    use crate::setrep::{DiscreteSet, FiniteSet, PeriodicSet};
    use crate::{GroupSpec, Rational};

    #[test]
    fn periodic_and_finite_scans() {
        let z = GroupSpec::ZLattice { dimension: 1 };
        let nu = MeasureSpec::<Rational>::counting(DiscreteSet::from(
            PeriodicSet::arithmetic(10, [0, 1, 4]).unwrap(),
        ));
        let m = GridMeasure::from_spec(&nu, &z).unwrap();
        // window of 5 integers: {0,1,4} fits once per period plus neighbours
        let (v, x) = cube_sup(&m, 2).unwrap();
        let brute = (-20..20)
            .map(|c| ((c - 2)..=(c + 2)).filter(|k: &i64| [0, 1, 4].contains(&k.rem_euclid(10))).count())
            .max()
            .unwrap();
        assert_eq!(v, Rational::from_int(brute as i64));
        assert_eq!(m.cube_mass(&x, 2), v);

        let f = MeasureSpec::<Rational>::counting(DiscreteSet::from(FiniteSet::from_ints([0, 3, 4, 9])));
        let m = GridMeasure::from_spec(&f, &z).unwrap();
        let (v, x) = cube_sup(&m, 1).unwrap();
        assert_eq!(v, Rational::from_int(2));
        assert_eq!(x, vec![3]);
    }

    #[test]
    fn two_dimensional_finite_scan() {
        let g = GroupSpec::ZLattice { dimension: 2 };
        let pts = FiniteSet::new(vec![vec![0, 0], vec![1, 1], vec![5, 5], vec![2, 0]]).unwrap();
        let m = GridMeasure::from_spec(&MeasureSpec::<Rational>::counting(DiscreteSet::from(pts)), &g).unwrap();
        let (v, x) = cube_sup(&m, 1).unwrap();
        assert_eq!(v, Rational::from_int(3));
        assert_eq!(m.cube_mass(&x, 1), v);
    }
}
