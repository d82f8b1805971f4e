//! The four supported group families, their elements, and canonical
//! enumeration order.

use serde::{Deserialize, Serialize};
use serde_with::serde_as;

use crate::error::{Error, Result};
use crate::scalar::{Exact, Scalar};

/// Default bound on how many elements [`GroupSpec::enumerate`] will list.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupSpec {
    /// ℤ^d with counting measure.
    ZLattice { dimension: usize },
    /// ℤ_{m_1} × … × ℤ_{m_k}; an empty modulus list is the trivial group.
    FiniteAbelian { moduli: Vec<u64> },
    /// ℝ with Lebesgue measure; elements are exact rationals.
    RealLine,
    /// ⊕_i ℤ_{m_i}, with `moduli` repeated cyclically, materialized to the
    /// first `depth` coordinates. H_n is the subgroup of the first n coordinates.
    SigmaFiniteChain { moduli: Vec<u64>, depth: usize },
}

#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged, bound = "T: Scalar")]
pub enum GroupElement<T> {
    Int(Vec<i64>),
    Real(#[serde_as(as = "Exact")] T),
}

impl<T: Scalar> GroupElement<T> {
    pub fn int(coords: impl Into<Vec<i64>>) -> Self {
        GroupElement::Int(coords.into())
    }

    pub fn as_int(&self) -> Option<&[i64]> {
        match self {
            GroupElement::Int(v) => Some(v),
            GroupElement::Real(_) => None,
        }
    }

    pub fn as_real(&self) -> Option<&T> {
        match self {
            GroupElement::Real(x) => Some(x),
            GroupElement::Int(_) => None,
        }
    }
}

impl<T: Scalar> std::fmt::Display for GroupElement<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GroupElement::Real(x) => write!(f, "{x}"),
            GroupElement::Int(v) if v.len() == 1 => write!(f, "{}", v[0]),
            GroupElement::Int(v) => {
                let parts: Vec<String> = v.iter().map(i64::to_string).collect();
                write!(f, "({})", parts.join(","))
            }
        }
    }
}

impl GroupSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            GroupSpec::ZLattice { dimension } if *dimension == 0 => {
                Err(Error::Shape("lattice dimension must be at least 1".into()))
            }
            GroupSpec::FiniteAbelian { moduli } if moduli.iter().any(|&m| m < 2) => {
                Err(Error::Shape("all moduli must be at least 2".into()))
            }
            GroupSpec::SigmaFiniteChain { moduli, .. } if moduli.is_empty() => {
                Err(Error::Shape("a chain needs at least one modulus".into()))
            }
            GroupSpec::SigmaFiniteChain { moduli, .. } if moduli.iter().any(|&m| m < 2) => {
                Err(Error::Shape("all moduli must be at least 2".into()))
            }
            _ => Ok(()),
        }
    }

    /// Number of integer coordinates of an element (`None` on the real line).
    pub fn rank(&self) -> Option<usize> {
        match self {
            GroupSpec::ZLattice { dimension } => Some(*dimension),
            GroupSpec::FiniteAbelian { moduli } => Some(moduli.len()),
            GroupSpec::SigmaFiniteChain { depth, .. } => Some(*depth),
            GroupSpec::RealLine => None,
        }
    }

    /// Per-coordinate moduli for the torsion families: the finite group's
    /// moduli, or the chain's first `depth` moduli.
    pub fn moduli(&self) -> Option<Vec<u64>> {
        match self {
            GroupSpec::FiniteAbelian { moduli } => Some(moduli.clone()),
            GroupSpec::SigmaFiniteChain { moduli, depth } => {
                Some((0..*depth).map(|i| moduli[i % moduli.len()]).collect())
            }
            _ => None,
        }
    }

    pub fn is_discrete(&self) -> bool {
        !matches!(self, GroupSpec::RealLine)
    }

    /// Group order: finite for `FiniteAbelian`; for a chain, the order of the
    /// materialized subgroup H_depth.
    pub fn order(&self) -> Option<u128> {
        self.moduli()
            .map(|m| m.iter().fold(1u128, |acc, &x| acc.saturating_mul(x as u128)))
    }

    pub fn zero<T: Scalar>(&self) -> GroupElement<T> {
        match self.rank() {
            Some(k) => GroupElement::Int(vec![0; k]),
            None => GroupElement::Real(T::zero()),
        }
    }

    /// Checks that `g` has this group's shape and is reduced.
    pub fn check<T: Scalar>(&self, g: &GroupElement<T>) -> Result<()> {
        match (self, g) {
            (GroupSpec::RealLine, GroupElement::Real(_)) => Ok(()),
            (GroupSpec::ZLattice { dimension }, GroupElement::Int(v)) if v.len() == *dimension => {
                Ok(())
            }
            (_, GroupElement::Int(v)) if self.rank() == Some(v.len()) => {
                let moduli = self.moduli().expect("torsion family");
                if v.iter().zip(&moduli).all(|(&x, &m)| (0..m as i64).contains(&x)) {
                    Ok(())
                } else {
                    Err(Error::Shape(format!("element {g} is not reduced")))
                }
            }
            _ => Err(Error::Shape(format!("element {g} does not belong to {self:?}"))),
        }
    }

    /// Reduces integer coordinates into `[0, m_i)` where the family has moduli.
    pub fn reduce(&self, coords: &mut [i64]) {
        if let Some(moduli) = self.moduli() {
            for (x, &m) in coords.iter_mut().zip(&moduli) {
                *x = x.rem_euclid(m as i64);
            }
        }
    }

    pub fn add<T: Scalar>(&self, g: &GroupElement<T>, h: &GroupElement<T>) -> Result<GroupElement<T>> {
        self.check(g)?;
        self.check(h)?;
        Ok(match (g, h) {
            (GroupElement::Real(a), GroupElement::Real(b)) => GroupElement::Real(a.clone() + b.clone()),
            (GroupElement::Int(a), GroupElement::Int(b)) => {
                let mut sum: Vec<i64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                self.reduce(&mut sum);
                GroupElement::Int(sum)
            }
            _ => unreachable!("shapes checked"),
        })
    }

    pub fn negate<T: Scalar>(&self, g: &GroupElement<T>) -> Result<GroupElement<T>> {
        self.check(g)?;
        Ok(match g {
            GroupElement::Real(a) => GroupElement::Real(-a.clone()),
            GroupElement::Int(a) => {
                let mut neg: Vec<i64> = a.iter().map(|x| -x).collect();
                self.reduce(&mut neg);
                GroupElement::Int(neg)
            }
        })
    }

    pub fn sub<T: Scalar>(&self, g: &GroupElement<T>, h: &GroupElement<T>) -> Result<GroupElement<T>> {
        self.add(g, &self.negate(h)?)
    }

    /// All elements of a finite group (or of H_depth for a chain), in
    /// lexicographic order with the first coordinate most significant. This
    /// is the canonical order every greedy routine scans in.
    pub fn enumerate(&self, cap: u128) -> Result<Vec<Vec<i64>>> {
        let moduli = self
            .moduli()
            .ok_or_else(|| Error::Shape(format!("{self:?} is not finite")))?;
        let order = self.order().unwrap_or(u128::MAX);
        if order > cap {
            return Err(Error::CapExceeded { size: order, cap });
        }
        Ok((0..order as usize).map(|i| unrank(&moduli, i)).collect())
    }
}

/// Position of `coords` in the lexicographic enumeration of ∏ ℤ_{m_i}.
pub fn rank_of(moduli: &[u64], coords: &[i64]) -> usize {
    coords
        .iter()
        .zip(moduli)
        .fold(0usize, |acc, (&x, &m)| acc * m as usize + x.rem_euclid(m as i64) as usize)
}

/// Inverse of [`rank_of`].
pub fn unrank(moduli: &[u64], mut index: usize) -> Vec<i64> {
    let mut out = vec![0i64; moduli.len()];
    for (slot, &m) in out.iter_mut().zip(moduli).rev() {
        *slot = (index % m as usize) as i64;
        index /= m as usize;
    }
    out
}

/// A diagonal period lattice in ℤ^d, or a positive rational period on ℝ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Period<T> {
    Lattice(Vec<i64>),
    Real(T),
}

/// One representative of every coset of a period lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FundamentalDomain<T> {
    /// The box [0,m_1)×…×[0,m_d).
    Box(Vec<i64>),
    /// The half-open interval [0,p).
    Interval(T),
}

pub fn fundamental_domain<T: Scalar>(period: &Period<T>) -> Result<FundamentalDomain<T>> {
    match period {
        Period::Lattice(m) => {
            if m.is_empty() || m.iter().any(|&x| x <= 0) {
                return Err(Error::NonPositivePeriod);
            }
            Ok(FundamentalDomain::Box(m.clone()))
        }
        Period::Real(p) => {
            if !p.is_positive() {
                return Err(Error::NonPositivePeriod);
            }
            Ok(FundamentalDomain::Interval(p.clone()))
        }
    }
}

impl<T: Scalar> FundamentalDomain<T> {
    /// Number of cells for a box domain.
    pub fn cell_count(&self) -> Option<u128> {
        match self {
            FundamentalDomain::Box(m) => Some(m.iter().map(|&x| x as u128).product()),
            FundamentalDomain::Interval(_) => None,
        }
    }

    /// Cells of a box domain in canonical order.
    pub fn cells(&self) -> Vec<Vec<i64>> {
        match self {
            FundamentalDomain::Box(m) => {
                let moduli: Vec<u64> = m.iter().map(|&x| x as u64).collect();
                let n = self.cell_count().unwrap_or(0) as usize;
                (0..n).map(|i| unrank(&moduli, i)).collect()
            }
            FundamentalDomain::Interval(_) => Vec::new(),
        }
    }

    /// The unique representative of `g` in this domain.
    pub fn representative(&self, g: &GroupElement<T>) -> Result<GroupElement<T>> {
        match (self, g) {
            (FundamentalDomain::Box(m), GroupElement::Int(v)) if v.len() == m.len() => Ok(
                GroupElement::Int(v.iter().zip(m).map(|(x, p)| x.rem_euclid(*p)).collect()),
            ),
            (FundamentalDomain::Interval(p), GroupElement::Real(x)) => {
                Ok(GroupElement::Real(reduce_mod(x, p)))
            }
            _ => Err(Error::Shape(format!("{g} does not match the domain"))),
        }
    }
}

/// `x mod p` into `[0, p)`.
pub fn reduce_mod<T: Scalar>(x: &T, p: &T) -> T {
    let k = (x.clone() / p.clone()).floor();
    x.clone() - k * p.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use proptest::prelude::*;

    type E = GroupElement<Rational>;

    fn fin(m: &[u64]) -> GroupSpec {
        GroupSpec::FiniteAbelian { moduli: m.to_vec() }
    }

    #[test]
    fn modular_addition() {
        let g = fin(&[3, 6]);
        assert_eq!(g.add(&E::int([1, 2]), &E::int([2, 5])).unwrap(), E::int([0, 1]));
        assert_eq!(g.negate(&E::int([1, 2])).unwrap(), E::int([2, 4]));
        assert_eq!(g.negate(&E::int([0, 0])).unwrap(), E::int([0, 0]));
    }

    #[test]
    fn rational_line_arithmetic() {
        let g = GroupSpec::RealLine;
        let a = E::Real(Rational::from_ratio(1, 3));
        let b = E::Real(Rational::from_ratio(1, 6));
        assert_eq!(g.add(&a, &b).unwrap(), E::Real(Rational::from_ratio(1, 2)));
        let c = E::Real(Rational::from_ratio(-5, 7));
        assert_eq!(g.negate(&c).unwrap(), E::Real(Rational::from_ratio(5, 7)));
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let g = fin(&[3, 6]);
        assert!(g.add(&E::int([1]), &E::int([2, 5])).is_err());
        assert!(g.add(&E::int([3, 0]), &E::int([0, 0])).is_err());
        assert!(GroupSpec::RealLine.add(&E::int([1]), &E::Real(Rational::from_int(1))).is_err());
        assert!(fin(&[1]).validate().is_err());
        assert!(GroupSpec::ZLattice { dimension: 0 }.validate().is_err());
    }

    #[test]
    fn enumeration_is_lexicographic() {
        assert_eq!(
            fin(&[2, 2]).enumerate(100).unwrap(),
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        );
        assert_eq!(
            fin(&[5]).enumerate(100).unwrap(),
            (0..5).map(|i| vec![i]).collect::<Vec<_>>()
        );
        let six = fin(&[2, 3]).enumerate(100).unwrap();
        assert_eq!(six.len(), 6);
        assert_eq!(six[0], vec![0, 0]);
        assert_eq!(six[5], vec![1, 2]);
        assert_eq!(fin(&[]).enumerate(10).unwrap(), vec![Vec::<i64>::new()]);
        assert!(matches!(fin(&[4, 4]).enumerate(10), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn fundamental_domains() {
        let d = fundamental_domain::<Rational>(&Period::Lattice(vec![6])).unwrap();
        assert_eq!(d.cells(), (0..6).map(|i| vec![i]).collect::<Vec<_>>());
        let d = fundamental_domain(&Period::Real(Rational::from_int(1))).unwrap();
        assert_eq!(d, FundamentalDomain::Interval(Rational::from_int(1)));
        assert_eq!(
            d.representative(&E::Real(Rational::from_ratio(-1, 4))).unwrap(),
            E::Real(Rational::from_ratio(3, 4))
        );
        let d = fundamental_domain::<Rational>(&Period::Lattice(vec![2, 3])).unwrap();
        assert_eq!(d.cell_count(), Some(6));
        assert!(fundamental_domain::<Rational>(&Period::Lattice(vec![0])).is_err());
        assert!(fundamental_domain(&Period::Real(Rational::from_int(-1))).is_err());
    }

    fn family_element(family: usize) -> impl Strategy<Value = (GroupSpec, E)> {
        match family {
            0 => prop::collection::vec(-50i64..50, 2)
                .prop_map(|v| (GroupSpec::ZLattice { dimension: 2 }, E::Int(v)))
                .boxed(),
            1 => (0i64..4, 0i64..6)
                .prop_map(|(a, b)| (fin(&[4, 6]), E::int([a, b])))
                .boxed(),
            2 => (-100i64..100, 1i64..30)
                .prop_map(|(n, d)| (GroupSpec::RealLine, E::Real(Rational::from_ratio(n, d))))
                .boxed(),
            _ => prop::collection::vec(0i64..2, 5)
                .prop_map(|v| (GroupSpec::SigmaFiniteChain { moduli: vec![2], depth: 5 }, E::Int(v)))
                .boxed(),
        }
    }

    fn triple() -> impl Strategy<Value = (GroupSpec, E, E, E)> {
        (0usize..4).prop_flat_map(|f| {
            (family_element(f), family_element(f), family_element(f))
                .prop_map(|((g, a), (_, b), (_, c))| (g, a, b, c))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn group_axioms((g, a, b, c) in triple()) {
            let ab_c = g.add(&g.add(&a, &b).unwrap(), &c).unwrap();
            let a_bc = g.add(&a, &g.add(&b, &c).unwrap()).unwrap();
            prop_assert_eq!(ab_c, a_bc);
            prop_assert_eq!(g.add(&a, &b).unwrap(), g.add(&b, &a).unwrap());
            prop_assert_eq!(g.add(&a, &g.zero()).unwrap(), a.clone());
            prop_assert_eq!(g.add(&a, &g.negate(&a).unwrap()).unwrap(), g.zero());
        }
    }

    #[test]
    fn enumeration_is_a_bijection() {
        for moduli in [vec![2, 2, 2], vec![3, 4], vec![7]] {
            let elems = fin(&moduli).enumerate(1000).unwrap();
            assert_eq!(elems.len() as u64, moduli.iter().product::<u64>());
            for (i, e) in elems.iter().enumerate() {
                assert_eq!(rank_of(&moduli, e), i);
            }
        }
    }
}
