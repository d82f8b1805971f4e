//! The packing bound `μ(H) ≤ 1/D̄^#(S)` and fattening `S ↦ S + H`.

use serde::Serialize;
use serde_with::serde_as;

use crate::density::{kahane_density, ScanOptions};
use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::scalar::{Exact, Scalar};
use crate::setrep::discrete::FiniteSet;
use crate::setrep::intervals::{IntervalUnion, PeriodicPattern};
use crate::setrep::measure::{MeasureSpec, SetSpec};
use crate::setrep::points::PointConfig;

/// The window set `H`: an interval union on ℝ, a finite set in ℤ^d.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case", bound = "T: Scalar")]
pub enum HSet<T> {
    Real { intervals: IntervalUnion<T> },
    Finite { elements: FiniteSet },
}

impl<T: Scalar> HSet<T> {
    pub fn measure(&self) -> T {
        match self {
            HSet::Real { intervals } => intervals.length(),
            HSet::Finite { elements } => T::from_int(elements.len() as i64),
        }
    }

    fn group(&self) -> GroupSpec {
        match self {
            HSet::Real { .. } => GroupSpec::RealLine,
            HSet::Finite { elements } => GroupSpec::ZLattice {
                dimension: elements.elements().first().map_or(1, |e| e.len()),
            },
        }
    }

    /// Nonzero elements of `H - H` (for `Finite`), or `H - H` itself.
    fn differences(&self) -> Diffs<T> {
        match self {
            HSet::Real { intervals } => Diffs::Real(intervals.difference_set()),
            HSet::Finite { elements } => {
                let mut out: Vec<Vec<i64>> = Vec::new();
                for a in elements.elements() {
                    for b in elements.elements() {
                        let d: Vec<i64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                        if d.iter().any(|&x| x != 0) {
                            out.push(d);
                        }
                    }
                }
                out.sort();
                out.dedup();
                Diffs::Finite(out)
            }
        }
    }
}

enum Diffs<T> {
    Real(IntervalUnion<T>),
    Finite(Vec<Vec<i64>>),
}

/// Least positive (lexicographically, for ℤ^d) nonzero element of
/// `(H - H) ∩ (S - S)`, if any.
pub fn packing_violation<T: Scalar>(s: &SetSpec<T>, h: &HSet<T>) -> Result<Option<String>> {
    match (s, h.differences()) {
        (SetSpec::Points(c), Diffs::Real(hh)) => {
            let Some((lo, hi)) = hh.hull() else { return Ok(None) };
            let diffs = c.difference_set_within((&lo, &hi))?;
            Ok(diffs
                .into_iter()
                .find(|d| d.is_positive() && hh.contains(d))
                .map(|d| d.to_string()))
        }
        (_, Diffs::Finite(hh)) => {
            let group = h.group();
            let d = s
                .as_discrete()
                .ok_or_else(|| Error::Shape("S must be a discrete set when H is finite".into()))?;
            let (ss, _) = d.difference_set(&group)?;
            let positive = |v: &Vec<i64>| v.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0);
            Ok(hh
                .iter()
                .filter(|v| positive(v))
                .find(|v| ss.contains(v))
                .map(|v| format!("{v:?}")))
        }
        _ => Err(Error::Shape("S and H live in different groups".into())),
    }
}

#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct PackingVerdict<T> {
    /// `D̄^#(S)`.
    #[serde_as(as = "Exact")]
    pub rho: T,
    #[serde_as(as = "Exact")]
    pub measure_h: T,
    /// `1/ρ`.
    #[serde_as(as = "Exact")]
    pub bound: T,
    /// `1/ρ - μ(H)`, nonnegative.
    #[serde_as(as = "Exact")]
    pub slack: T,
}

/// Exact counting density of `S`, required to be finite and exact.
pub(crate) fn exact_counting_density<T: Scalar>(s: &SetSpec<T>, group: &GroupSpec) -> Result<T> {
    if let SetSpec::Points(c) = s {
        if c.has_accumulation() {
            return Err(Error::InfiniteDensity(
                "S has an accumulation point, so bounded windows hold infinitely many points".into(),
            ));
        }
    }
    let rep = kahane_density(&MeasureSpec::counting(s.clone()), group, &ScanOptions::default())?;
    if rep.is_infinite() {
        return Err(Error::InfiniteDensity("D̄^#(S) is infinite".into()));
    }
    rep.exact_value()
        .cloned()
        .ok_or_else(|| Error::precondition("D̄^#(S) has no exact value (S is not periodic)"))
}

/// Checks `(H - H) ∩ (S - S) = {0}` exactly, then `μ(H) ≤ 1/D̄^#(S)`.
pub fn packing_bound_check<T: Scalar>(s: &SetSpec<T>, h: &HSet<T>) -> Result<PackingVerdict<T>> {
    let group = h.group();
    s.check_in(&group)?;
    if let Some(d) = packing_violation(s, h)? {
        return Err(Error::PackingViolated(d));
    }
    let rho = exact_counting_density(s, &group)?;
    if !rho.is_positive() {
        return Err(Error::precondition("D̄^#(S) = 0"));
    }
    let measure_h = h.measure();
    let bound = T::one() / rho.clone();
    if measure_h > bound {
        return Err(Error::verification(
            "packing bound",
            format!("μ(H) = {measure_h} > 1/ρ = {bound}"),
        ));
    }
    Ok(PackingVerdict { slack: bound.clone() - measure_h.clone(), rho, measure_h, bound })
}

#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct FattenResult<T> {
    pub set: PeriodicPattern<T>,
    /// `ρ·μ(H)`.
    #[serde_as(as = "Exact")]
    pub lower_bound: T,
    /// Exact `D̄` of the Haar trace of `S + H`.
    #[serde_as(as = "Exact")]
    pub measured: T,
}

/// `A = S + H` for a periodic configuration `S` on ℝ with the packing
/// condition, and the check `D̄(A) ≥ ρ·μ(H)`.
pub fn fatten<T: Scalar>(s: &PointConfig<T>, h: &IntervalUnion<T>) -> Result<FattenResult<T>> {
    let spec = SetSpec::Points(s.clone());
    let hs = HSet::Real { intervals: h.clone() };
    if let Some(d) = packing_violation(&spec, &hs)? {
        return Err(Error::PackingViolated(d));
    }
    let (p, res) = s
        .as_periodic()
        .ok_or_else(|| Error::precondition("fattening needs a periodic configuration"))?;
    let rho = T::from_ratio(res.len() as i64, 1) / p.clone();
    let set = PeriodicPattern::new(p.clone(), IntervalUnion::points(res.iter().cloned()).minkowski_sum(h))?;
    let measured = set.density();
    let lower_bound = rho * h.length();
    if measured < lower_bound {
        return Err(Error::verification(
            "fatten",
            format!("D̄(S + H) = {measured} < ρ·μ(H) = {lower_bound}"),
        ));
    }
    Ok(FattenResult { set, lower_bound, measured })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(a: i64, b: i64) -> Rational {
        Rational::from_ratio(a, b)
    }

    fn h(a: Rational, b: Rational) -> HSet<Rational> {
        HSet::Real { intervals: IntervalUnion::interval(a, b).unwrap() }
    }

    #[test]
    fn even_integers() {
        let s = SetSpec::Points(PointConfig::periodic(q(2, 1), vec![q(0, 1)]).unwrap());
        let v = packing_bound_check(&s, &h(q(0, 1), q(3, 2))).unwrap();
        assert_eq!(v.slack, q(1, 2));
        assert!(matches!(
            packing_bound_check(&s, &h(q(0, 1), q(2, 1))),
            Err(Error::PackingViolated(d)) if d == "2"
        ));
        let edge = q(2, 1) - q(1, 1_000_000);
        assert!(packing_bound_check(&s, &h(q(0, 1), edge)).is_ok());
    }

    #[test]
    fn integers_and_thirds() {
        let s = SetSpec::Points(PointConfig::periodic(q(1, 1), vec![q(0, 1), q(1, 3)]).unwrap());
        let v = packing_bound_check(&s, &h(q(0, 1), q(1, 4))).unwrap();
        assert_eq!((v.rho, v.slack), (q(2, 1), q(1, 4)));
    }

    #[test]
    fn fattening() {
        let two = PointConfig::periodic(q(2, 1), vec![q(0, 1)]).unwrap();
        let r = fatten(&two, &IntervalUnion::interval(q(0, 1), q(1, 1)).unwrap()).unwrap();
        assert_eq!((r.measured.clone(), r.lower_bound), (q(1, 2), q(1, 2)));
        let r = fatten(&two, &IntervalUnion::point(q(0, 1))).unwrap();
        assert_eq!(r.lower_bound, q(0, 1));
        let z = PointConfig::periodic(q(1, 1), vec![q(0, 1)]).unwrap();
        let r = fatten(&z, &IntervalUnion::interval(q(0, 1), q(1, 3)).unwrap()).unwrap();
        assert_eq!(r.measured, q(1, 3));
    }

    #[test]
    fn integer_version() {
        use crate::setrep::{DiscreteSet, PeriodicSet};
        let s = SetSpec::<Rational>::from(DiscreteSet::from(PeriodicSet::arithmetic(3, [0]).unwrap()));
        let ok = HSet::Finite { elements: FiniteSet::from_ints([0, 1, 2]) };
        assert_eq!(packing_bound_check(&s, &ok).unwrap().slack, q(0, 1));
        let bad = HSet::Finite { elements: FiniteSet::from_ints([0, 3]) };
        assert!(matches!(packing_bound_check(&s, &bad), Err(Error::PackingViolated(_))));
    }
}
