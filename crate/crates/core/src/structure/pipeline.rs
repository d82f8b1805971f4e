//! Subadditivity of `D̄` and the end-to-end construction of a compact
//! translate set `T` with `(S - S) + T = ℝ`.

use serde::Serialize;
use serde_with::serde_as;

use crate::density::{kahane_density, DensityReport, ScanOptions};
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupSpec};
use crate::scalar::{Exact, Scalar};
use crate::setrep::intervals::{IntervalUnion, PeriodicPattern};
use crate::setrep::measure::{MeasureSpec, SetSpec};
use crate::setrep::points::PointConfig;
use crate::structure::greedy::{greedy_translates, CoverResult};
use crate::structure::packing::{fatten, FattenResult, HSet};
use crate::structure::partition::{auto_h, partition_by_coloring, AutoH, PartitionResult};

#[serde_as]
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct SubadditivityVerdict<T> {
    pub parts: Vec<DensityReport<T>>,
    pub total: DensityReport<T>,
    /// `Σ D̄(ν_j) - D̄(Σ ν_j)`; absent when a part is infinite.
    #[serde_as(as = "Option<Exact>")]
    pub slack: Option<T>,
}

/// Checks `D̄(ν_1 + … + ν_n) ≤ D̄(ν_1) + … + D̄(ν_n)` with exact values.
pub fn subadditivity_check<T: Scalar>(
    measures: &[MeasureSpec<T>],
    group: &GroupSpec,
    opts: &ScanOptions,
) -> Result<SubadditivityVerdict<T>> {
    if measures.is_empty() {
        return Err(Error::precondition("no measures given"));
    }
    for m in measures {
        m.check_in(group).map_err(|e| Error::Shape(format!("measures on mixed groups: {e}")))?;
    }
    let parts = measures
        .iter()
        .map(|m| kahane_density(m, group, opts))
        .collect::<Result<Vec<_>>>()?;
    let total = kahane_density(&MeasureSpec::Sum { terms: measures.to_vec() }, group, opts)?;
    if parts.iter().any(|p| p.is_infinite()) {
        return Ok(SubadditivityVerdict { parts, total, slack: None });
    }
    let exact = |r: &DensityReport<T>| {
        r.exact_value()
            .cloned()
            .ok_or_else(|| Error::precondition("subadditivity needs exact densities"))
    };
    let sum = parts.iter().map(exact).try_fold(T::zero(), |acc, v| v.map(|v| acc + v))?;
    if total.is_infinite() {
        return Err(Error::verification("subadditivity", "sum is infinite, parts are finite"));
    }
    let lhs = exact(&total)?;
    if lhs > sum {
        return Err(Error::verification("subadditivity", format!("{lhs} > {sum}")));
    }
    Ok(SubadditivityVerdict { slack: Some(sum - lhs), parts, total })
}

#[serde_as]
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct PipelineResult<T> {
    pub h: IntervalUnion<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub auto: Option<AutoH<T>>,
    #[serde_as(as = "Exact")]
    pub rho: T,
    pub partition: PartitionResult<T>,
    pub selected: usize,
    #[serde_as(as = "Exact")]
    pub rho_selected: T,
    pub fattened: FattenResult<T>,
    pub cover: CoverResult<T>,
    /// `T = B + (H - H)`.
    pub translates: IntervalUnion<T>,
    #[serde_as(as = "Exact")]
    pub measure_t: T,
    /// `(S_j - S_j) + T` over one period.
    pub covered: PeriodicPattern<T>,
    /// `(1+ε)·μ(H - H)/μ(H)`.
    #[serde_as(as = "Exact")]
    pub remark_bound: T,
    pub remark_holds: bool,
    /// `⌊1/(ρ_j μ(H))⌋·μ(H - H)`, which `μ(T)` never exceeds.
    #[serde_as(as = "Exact")]
    pub proven_bound: T,
}

/// Partition, class selection, fattening, greedy translates and the final
/// covering check for a periodic point configuration on ℝ.
pub fn syndetic_pipeline<T: Scalar>(
    s: &PointConfig<T>,
    eps: &T,
    h: Option<&IntervalUnion<T>>,
) -> Result<PipelineResult<T>> {
    if s.has_accumulation() {
        return Err(Error::InfiniteDensity(
            "S has an accumulation point, so D̄^#(S) is infinite and no B + S - S with B compact \
             can be guaranteed to cover"
                .into(),
        ));
    }
    let (p, res) = s
        .as_periodic()
        .ok_or_else(|| Error::precondition("the pipeline needs a periodic configuration"))?;
    let rho = T::from_int(res.len() as i64) / p.clone();
    let spec = SetSpec::Points(s.clone());
    let auto = match h {
        Some(_) => None,
        None => Some(auto_h(&spec, eps)?),
    };
    let h = match (h, &auto) {
        (Some(h), _) => h.clone(),
        (None, Some(AutoH { h: HSet::Real { intervals }, .. })) => intervals.clone(),
        _ => unreachable!("auto_H on ℝ returns intervals"),
    };
    let mu_h = h.length();
    if !mu_h.is_positive() {
        return Err(Error::precondition("μ(H) must be positive"));
    }
    let hs = HSet::Real { intervals: h.clone() };
    let mut partition = partition_by_coloring(&spec, Some(&hs), eps)?;
    partition.auto = auto.clone();
    let n = partition.n;
    let densities: Vec<T> = partition
        .class_densities
        .iter()
        .map(|r| r.exact_value().cloned().ok_or_else(|| Error::precondition("class density not exact")))
        .collect::<Result<_>>()?;
    let mut selected = 0;
    for (i, d) in densities.iter().enumerate() {
        if d > &densities[selected] {
            selected = i;
        }
    }
    let rho_selected = densities[selected].clone();
    if rho_selected.clone() * T::from_int(n as i64) < rho {
        return Err(Error::verification(
            "class selection",
            format!("ρ_j = {rho_selected} < ρ/n = {}/{n}", rho),
        ));
    }
    let SetSpec::Points(class) = &partition.classes[selected] else {
        unreachable!("classes on ℝ are point configurations")
    };
    let fattened = fatten(class, &h)?;
    let cover = greedy_translates(&SetSpec::PeriodicPattern(fattened.set.clone()), &GroupSpec::RealLine)?;
    let hh = h.difference_set();
    let b: Vec<T> = cover.b.iter().filter_map(GroupElement::as_real).cloned().collect();
    let translates = IntervalUnion::points(b.iter().cloned()).minkowski_sum(&hh);
    let measure_t = translates.length();
    // (S_j - S_j) + T ⊇ ℝ, from scratch
    let (cp, cres) = class.as_periodic().expect("periodic class");
    let diffs = PointConfig::periodic(
        cp.clone(),
        cres.iter().flat_map(|a| cres.iter().map(move |b| a.clone() - b.clone())).collect(),
    )?;
    let (dp, dres) = diffs.as_periodic().expect("periodic");
    let covered =
        PeriodicPattern::new(dp.clone(), IntervalUnion::points(dres.iter().cloned()))?.minkowski_sum(&translates);
    let (arcs, _) = covered.uncovered_arcs();
    if let Some((a, b)) = arcs.first() {
        return Err(Error::verification(
            "final cover",
            format!("(S_j - S_j) + T misses the open arc ({a}, {b})"),
        ));
    }
    let mu_hh = hh.length();
    let remark_bound = (T::one() + eps.clone()) * mu_hh.clone() / mu_h.clone();
    let proven_bound = (T::one() / (rho_selected.clone() * mu_h)).floor() * mu_hh;
    if measure_t > proven_bound {
        return Err(Error::verification(
            "translate measure",
            format!("μ(T) = {measure_t} > #B·μ(H-H) bound {proven_bound}"),
        ));
    }
    Ok(PipelineResult {
        h,
        auto,
        rho,
        partition,
        selected,
        rho_selected,
        fattened,
        cover,
        remark_holds: measure_t <= remark_bound,
        translates,
        measure_t,
        covered,
        remark_bound,
        proven_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setrep::{DiscreteSet, FiniteSet};
    use crate::Rational;

    fn q(a: i64, b: i64) -> Rational {
        Rational::from_ratio(a, b)
    }

    #[test]
    fn subadditivity_examples() {
        let g = GroupSpec::FiniteAbelian { moduli: vec![6] };
        let m = |xs: &[i64]| MeasureSpec::<Rational>::counting(DiscreteSet::from(FiniteSet::from_ints(xs.iter().copied())));
        let v = subadditivity_check(&[m(&[0, 1]), m(&[3])], &g, &ScanOptions::default()).unwrap();
        assert_eq!(v.total.exact_value(), Some(&q(1, 2)));
        assert_eq!(v.slack, Some(q(0, 1)));
    }

    #[test]
    fn even_integers() {
        let s = PointConfig::periodic(q(2, 1), vec![q(0, 1)]).unwrap();
        let r = syndetic_pipeline(&s, &q(1, 2), Some(&IntervalUnion::interval(q(0, 1), q(1, 1)).unwrap())).unwrap();
        assert_eq!(r.partition.n, 1);
        assert_eq!(r.fattened.measured, q(1, 2));
        let r = syndetic_pipeline(&s, &q(1, 2), None).unwrap();
        assert_eq!(r.h, IntervalUnion::interval(q(0, 1), q(2, 3)).unwrap());
        assert_eq!(r.measure_t, q(7, 3));
        assert!(r.remark_holds);
    }

    #[test]
    fn thirds_pick_the_integers() {
        let s = PointConfig::periodic(q(1, 1), vec![q(0, 1), q(1, 3)]).unwrap();
        let r = syndetic_pipeline(&s, &q(1, 2), Some(&IntervalUnion::interval(q(0, 1), q(2, 5)).unwrap())).unwrap();
        assert_eq!(r.partition.n, 2);
        assert_eq!(r.rho_selected, q(1, 1));
        assert_eq!(r.selected, 0);
    }

    #[test]
    fn accumulation_is_rejected() {
        let s = PointConfig::reciprocal_tail(q(0, 1), q(1, 1), 1);
        let e = syndetic_pipeline(&s, &q(1, 2), None).unwrap_err();
        assert_eq!(e.exit_code(), 3);
    }
}
