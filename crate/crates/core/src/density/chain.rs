//! Counting densities along the chain H_1 ⊂ H_2 ⊂ … of a σ-finite group.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::scalar::Scalar;
use crate::setrep::discrete::ChainSet;

/// `#(A ∩ H_n)` for the chain's moduli, computed from the set's shape
/// rather than by enumeration.
pub fn count_in_level<T: Scalar>(a: &ChainSet, moduli: &[u64], n: usize) -> T {
    let m = |i: usize| moduli[i % moduli.len()] as i64;
    match a {
        ChainSet::Whole => (0..n).fold(T::one(), |acc, i| acc * T::from_int(m(i))),
        ChainSet::Subgroup { level } => {
            (0..n.min(*level)).fold(T::one(), |acc, i| acc * T::from_int(m(i)))
        }
        ChainSet::Cylinder { allowed } => {
            let mut count = T::one();
            for i in 0..n {
                let factor = match allowed.get(&i) {
                    Some(vals) => {
                        let valid: BTreeSet<i64> =
                            vals.iter().copied().filter(|v| (0..m(i)).contains(v)).collect();
                        valid.len() as i64
                    }
                    None => m(i),
                };
                count = count * T::from_int(factor);
            }
            // coordinates past n vanish on H_n
            if allowed.range(n..).all(|(_, vals)| vals.contains(&0)) {
                count
            } else {
                T::zero()
            }
        }
        ChainSet::Finite { elements } => {
            let mut seen = BTreeSet::new();
            for e in elements {
                let mut v = e.clone();
                while v.last() == Some(&0) {
                    v.pop();
                }
                let inside = v.len() <= n
                    && v.iter().enumerate().all(|(i, &x)| (0..m(i)).contains(&x));
                if inside {
                    seen.insert(v);
                }
            }
            T::from_int(seen.len() as i64)
        }
    }
}

/// Exact limit of `#(A ∩ H_n)/#H_n` as `n → ∞`.
pub fn limit<T: Scalar>(a: &ChainSet, moduli: &[u64]) -> T {
    let m = |i: usize| moduli[i % moduli.len()] as i64;
    match a {
        ChainSet::Whole => T::one(),
        ChainSet::Subgroup { .. } | ChainSet::Finite { .. } => T::zero(),
        ChainSet::Cylinder { allowed } => {
            allowed.iter().fold(T::one(), |acc, (&i, vals)| {
                let valid: BTreeSet<i64> =
                    vals.iter().copied().filter(|v| (0..m(i)).contains(v)).collect();
                acc * T::from_ratio(valid.len() as i64, m(i))
            })
        }
    }
}

/// `(n, #(A ∩ H_n)/#H_n)` for `n = 1..=depth`.
pub fn schedule<T: Scalar>(a: &ChainSet, group: &GroupSpec) -> Result<Vec<(usize, T)>> {
    let GroupSpec::SigmaFiniteChain { moduli, depth } = group else {
        return Err(Error::Shape("chain densities need a σ-finite chain".into()));
    };
    Ok((1..=*depth)
        .map(|n| {
            let order = (0..n).fold(T::one(), |acc, i| {
                acc * T::from_int(moduli[i % moduli.len()] as i64)
            });
            (n, count_in_level::<T>(a, moduli, n) / order)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use std::collections::BTreeMap;

    #[test]
    fn counts_match_materialization() {
        let shapes = vec![
            ChainSet::Cylinder { allowed: BTreeMap::from([(0, vec![0]), (2, vec![1, 2])]) },
            ChainSet::Cylinder { allowed: BTreeMap::from([(5, vec![1])]) },
            ChainSet::Subgroup { level: 2 },
            ChainSet::Finite { elements: vec![vec![1], vec![1, 0, 0], vec![0, 2, 1], vec![7]] },
            ChainSet::Whole,
        ];
        for depth in 1..=4 {
            let g = GroupSpec::SigmaFiniteChain { moduli: vec![2, 3], depth };
            for s in &shapes {
                let direct = s.materialize(&g, 1 << 12).unwrap().len() as i64;
                assert_eq!(count_in_level::<Rational>(s, &[2, 3], depth), Rational::from_int(direct));
            }
        }
    }

    #[test]
    fn limits() {
        let half = ChainSet::Cylinder { allowed: BTreeMap::from([(0, vec![0])]) };
        assert_eq!(limit::<Rational>(&half, &[2]), Rational::from_ratio(1, 2));
        let g = GroupSpec::SigmaFiniteChain { moduli: vec![2], depth: 5 };
        let s = schedule::<Rational>(&ChainSet::Subgroup { level: 1 }, &g).unwrap();
        assert_eq!(s[4], (5, Rational::from_ratio(2, 32)));
    }
}
