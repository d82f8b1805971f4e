//! Greedy maximal translate sets `B` with `(A - A) ∩ (B - B) = {0}`.

use serde::Serialize;
use serde_with::serde_as;

use crate::additive::{discrete_periodic, real_periodic};
use crate::error::{Error, Result};
use crate::group::{reduce_mod, GroupElement, GroupSpec};
use crate::scalar::{Exact, Scalar};
use crate::setrep::intervals::{IntervalUnion, PeriodicPattern};
use crate::setrep::measure::SetSpec;
use crate::torus::{members, Torus};

/// A candidate the greedy scan rejected, with the nonzero difference
/// `candidate - against ∈ A - A` that blocked it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Blocked {
    pub candidate: Vec<i64>,
    pub against: Vec<i64>,
    pub difference: Vec<i64>,
}

/// Evidence that no further translate fits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case", bound = "T: Scalar")]
pub enum Maximality<T> {
    /// Every cell of the search domain outside `B`, with its blocker.
    Blocked { entries: Vec<Blocked> },
    /// `B + (A - A)` over one period; it covers the circle, so every `b'`
    /// differs from some `b ∈ B` by an element of `A - A`.
    Covering { sum: PeriodicPattern<T> },
}

#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct CoverResult<T> {
    pub b: Vec<GroupElement<T>>,
    /// `Δ̄(A)`; on ℝ the exact `D̄(A)` of the pattern.
    #[serde_as(as = "Exact")]
    pub density: T,
    /// `⌊1/density⌋`.
    pub size_bound: u64,
    pub verified_cover: bool,
    pub verified_packing: bool,
    pub search_domain: String,
    pub maximality: Maximality<T>,
}

/// Greedy translates for a set in a finite group, a chain (on `H_depth`),
/// a periodic set in ℤ^d, or a periodic pattern on ℝ. Candidates are
/// scanned in canonical order; on ℝ each new translate is the midpoint of
/// the first uncovered arc, starting at 0.
pub fn greedy_translates<T: Scalar>(a: &SetSpec<T>, group: &GroupSpec) -> Result<CoverResult<T>> {
    a.check_in(group)?;
    match group {
        GroupSpec::RealLine => greedy_real(a),
        _ => greedy_discrete(a, group),
    }
}

fn greedy_discrete<T: Scalar>(a: &SetSpec<T>, group: &GroupSpec) -> Result<CoverResult<T>> {
    let p = discrete_periodic(a, group)?;
    if p.residues().is_empty() {
        return Err(Error::precondition("Δ̄(A) = 0: A is empty"));
    }
    let torus = Torus::from_period(p.period())?;
    let n = torus.len();
    let diff = torus.difference_indicator(&members(&p.indicator()));
    let mut b: Vec<usize> = Vec::new();
    let mut blocked = Vec::new();
    for c in 0..n {
        match b.iter().find(|&&x| diff[torus.sub(c, x)]) {
            Some(&x) => blocked.push(Blocked {
                candidate: torus.coords(c),
                against: torus.coords(x),
                difference: torus.coords(torus.sub(c, x)),
            }),
            None => b.push(c),
        }
    }
    let verified_packing = b
        .iter()
        .all(|&x| b.iter().all(|&y| x == y || !diff[torus.sub(x, y)]));
    let verified_cover = (0..n).all(|g| b.iter().any(|&x| diff[torus.sub(g, x)]));
    let density = T::from_ratio(p.residues().len() as i64, n as i64);
    let size_bound = (n / p.residues().len()) as u64;
    let result = CoverResult {
        b: b.iter().map(|&x| GroupElement::Int(torus.coords(x))).collect(),
        density,
        size_bound,
        verified_cover,
        verified_packing,
        search_domain: match group {
            GroupSpec::ZLattice { .. } => format!("fundamental box of the period {:?}", p.period()),
            GroupSpec::SigmaFiniteChain { depth, .. } => format!("H_{depth}"),
            _ => "the whole group".into(),
        },
        maximality: Maximality::Blocked { entries: blocked },
    };
    check(result)
}

fn greedy_real<T: Scalar>(a: &SetSpec<T>) -> Result<CoverResult<T>> {
    if let SetSpec::Points(c) = a {
        if !c.is_empty() {
            return Err(Error::InfiniteDensity(
                "Δ̄ of a point set on ℝ is infinite (shrink V around a point)".into(),
            ));
        }
    }
    let pattern = real_periodic(a)?;
    let density = pattern.density();
    if !density.is_positive() {
        return Err(Error::precondition("Δ̄(A) = 0: the pattern has measure zero"));
    }
    let diff = pattern.difference_set();
    let period = pattern.period().clone();
    let mut b: Vec<T> = Vec::new();
    let mut covered = PeriodicPattern::new(period.clone(), IntervalUnion::empty())?;
    let limit = (T::one() / density.clone()).floor();
    loop {
        let (arcs, zero_uncovered) = covered.uncovered_arcs();
        let Some((lo, hi)) = arcs.first() else { break };
        let x = if zero_uncovered { T::zero() } else { reduce_mod(&(lo.clone() + hi.clone()).half(), &period) };
        b.push(x.clone());
        if T::from_int(b.len() as i64) > limit {
            return Err(Error::verification(
                "greedy translates",
                format!("more than ⌊1/D̄(A)⌋ = {limit} translates"),
            ));
        }
        let piece = diff.translate(&x);
        covered = PeriodicPattern::new(period.clone(), covered.pattern().union(piece.pattern()))?;
    }
    // from scratch: pairwise differences avoid A - A, and B + (A - A) is everything
    let verified_packing = b
        .iter()
        .all(|x| b.iter().all(|y| x == y || !diff.contains(&(x.clone() - y.clone()))));
    let sum = diff.minkowski_sum(&IntervalUnion::points(b.iter().cloned()));
    let verified_cover = sum.covers_everything();
    let result = CoverResult {
        b: b.into_iter().map(GroupElement::Real).collect(),
        size_bound: limit.to_i64().expect("bounded") as u64,
        density,
        verified_cover,
        verified_packing,
        search_domain: format!("the circle ℝ/{}ℤ", crate::scalar::render(&period)),
        maximality: Maximality::Covering { sum },
    };
    check(result)
}

fn check<T: Scalar>(r: CoverResult<T>) -> Result<CoverResult<T>> {
    if !r.verified_packing {
        return Err(Error::verification("greedy translates", "(A-A) ∩ (B-B) ≠ {0}"));
    }
    if !r.verified_cover {
        return Err(Error::verification("greedy translates", "A - A + B misses a cell"));
    }
    if r.b.len() as u64 > r.size_bound {
        return Err(Error::verification(
            "greedy translates",
            format!("#B = {} exceeds ⌊1/Δ̄(A)⌋ = {}", r.b.len(), r.size_bound),
        ));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setrep::{DiscreteSet, PeriodicSet};
    use crate::Rational;
    use std::collections::BTreeMap;

    #[test]
    fn multiples_of_three() {
        let a = SetSpec::<Rational>::from(DiscreteSet::from(PeriodicSet::arithmetic(3, [0]).unwrap()));
        let r = greedy_translates(&a, &GroupSpec::ZLattice { dimension: 1 }).unwrap();
        let b: Vec<_> = r.b.iter().map(|g| g.as_int().unwrap()[0]).collect();
        assert_eq!(b, vec![0, 1, 2]);
        assert_eq!(r.size_bound, 3);
    }

    #[test]
    fn chain_half() {
        let g = GroupSpec::SigmaFiniteChain { moduli: vec![2], depth: 3 };
        let a = SetSpec::<Rational>::Chain(crate::setrep::ChainSet::Cylinder {
            allowed: BTreeMap::from([(0, vec![0])]),
        });
        let r = greedy_translates(&a, &g).unwrap();
        assert_eq!(r.b, vec![GroupElement::int(vec![0, 0, 0]), GroupElement::int(vec![1, 0, 0])]);
    }

    #[test]
    fn real_pattern() {
        let q = |a, b| Rational::from_ratio(a, b);
        let a = SetSpec::PeriodicPattern(
            PeriodicPattern::new(q(2, 1), IntervalUnion::interval(q(0, 1), q(2, 3)).unwrap()).unwrap(),
        );
        let r = greedy_translates(&a, &GroupSpec::RealLine).unwrap();
        assert_eq!(r.b, vec![GroupElement::Real(q(0, 1)), GroupElement::Real(q(1, 1))]);
        assert_eq!(r.size_bound, 3);
    }
}
