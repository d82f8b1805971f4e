//! Difference-set structure: gaps of `D ∩ ℕ`, syndetic covering checks and
//! smallest translate sets.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{reduce_mod, GroupElement, GroupSpec};
use crate::scalar::Scalar;
use crate::setrep::discrete::{DiscreteSet, FiniteSet, PeriodicSet};
use crate::setrep::intervals::{IntervalUnion, PeriodicPattern};
use crate::setrep::measure::SetSpec;
use crate::torus::Torus;

/// Gaps between consecutive positive elements of a set of integers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GapReport {
    /// Positive elements over the scanned range: one period `(0, m]` for
    /// periodic input.
    pub elements: Vec<i64>,
    /// `d_{n+1} - d_n`; for periodic input one full cycle, starting at the
    /// least positive element.
    pub gaps: Vec<i64>,
    pub max_gap: i64,
    pub bounded: bool,
    /// Period certifying boundedness.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period: Option<i64>,
}

/// Gap structure of `D ⊂ ℤ`. Periodic sets are handled exactly from one
/// period; finite sets are scanned over `(0, range]` and never bounded.
pub fn gap_analysis(d: &DiscreteSet, range: i64) -> Result<GapReport> {
    d.check_in(&GroupSpec::ZLattice { dimension: 1 })?;
    match d {
        DiscreteSet::PeriodicDiscrete(p) => {
            let m = p.period()[0];
            let res: Vec<i64> = p.residues().iter().map(|r| r[0]).collect();
            if res.is_empty() {
                return Err(Error::Empty("no positive elements".into()));
            }
            // one period of positives, (0, m]
            let mut elements: Vec<i64> = res.iter().map(|&r| if r == 0 { m } else { r }).collect();
            elements.sort();
            let gaps: Vec<i64> = elements
                .windows(2)
                .map(|w| w[1] - w[0])
                .chain(std::iter::once(elements[0] + m - elements[elements.len() - 1]))
                .collect();
            let max_gap = *gaps.iter().max().expect("nonempty");
            Ok(GapReport { elements, gaps, max_gap, bounded: true, period: Some(m) })
        }
        DiscreteSet::ExplicitFinite(f) => {
            let elements: Vec<i64> =
                f.elements().iter().map(|e| e[0]).filter(|&x| 0 < x && x <= range).collect();
            if elements.is_empty() {
                return Err(Error::Empty("no positive elements in the scanned range".into()));
            }
            let gaps: Vec<i64> = elements.windows(2).map(|w| w[1] - w[0]).collect();
            let max_gap = gaps.iter().copied().max().unwrap_or(0);
            Ok(GapReport { elements, gaps, max_gap, bounded: false, period: None })
        }
    }
}

/// A set of translates: finite in discrete groups, an interval union on ℝ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case", bound = "T: Scalar")]
pub enum Translates<T> {
    Finite { elements: FiniteSet },
    Real { intervals: IntervalUnion<T> },
}

/// Which translate covers a cell of the fundamental domain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellCover {
    pub cell: Vec<i64>,
    pub by: Vec<i64>,
}

/// Outcome of a covering test `S + K = G`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct SyndeticCertificate<T> {
    pub translates: Translates<T>,
    pub verified: bool,
    /// Least uncovered point on failure. On ℝ uncovered regions are open
    /// arcs, so this is 0 when uncovered, else the midpoint of the first arc.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<GroupElement<T>>,
    /// Per cell evidence in discrete groups (omitted above 4096 cells).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub cells: Vec<CellCover>,
    /// `S + K` over one period on ℝ.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sum: Option<PeriodicPattern<T>>,
}

const CELL_EVIDENCE_LIMIT: usize = 4096;

/// The set as a periodic subset of ℤ^d or of a finite group.
pub(crate) fn discrete_periodic<T: Scalar>(s: &SetSpec<T>, group: &GroupSpec) -> Result<PeriodicSet> {
    match group {
        GroupSpec::ZLattice { .. } => s
            .as_discrete()
            .ok_or_else(|| Error::Shape("not a discrete set".into()))?
            .as_periodic_in(group),
        GroupSpec::FiniteAbelian { .. } | GroupSpec::SigmaFiniteChain { .. } => s.to_finite_group(group),
        GroupSpec::RealLine => Err(Error::Shape("ℝ is not discrete".into())),
    }
}

/// The set as a periodic closed subset of ℝ.
pub(crate) fn real_periodic<T: Scalar>(s: &SetSpec<T>) -> Result<PeriodicPattern<T>> {
    match s {
        SetSpec::PeriodicPattern(p) => Ok(p.clone()),
        SetSpec::Points(c) => {
            let (p, res) = c
                .as_periodic()
                .ok_or_else(|| Error::precondition("point configuration is not purely periodic"))?;
            PeriodicPattern::new(p.clone(), IntervalUnion::points(res.iter().cloned()))
        }
        _ => Err(Error::precondition("a bounded set has no bounded translate cover of ℝ")),
    }
}

/// Exact test of `S + K = G` over one fundamental domain.
pub fn syndetic_check<T: Scalar>(
    s: &SetSpec<T>,
    k: &Translates<T>,
    group: &GroupSpec,
) -> Result<SyndeticCertificate<T>> {
    s.check_in(group)?;
    match (group, k) {
        (GroupSpec::RealLine, Translates::Real { intervals }) => {
            let p = real_periodic(s)?;
            let sum = p.minkowski_sum(intervals);
            let (arcs, zero_uncovered) = sum.uncovered_arcs();
            let witness = match arcs.first() {
                None => None,
                Some(_) if zero_uncovered => Some(T::zero()),
                Some((a, b)) => Some(reduce_mod(&(a.clone() + b.clone()).half(), sum.period())),
            };
            Ok(SyndeticCertificate {
                translates: k.clone(),
                verified: witness.is_none(),
                witness: witness.map(GroupElement::Real),
                cells: Vec::new(),
                sum: Some(sum),
            })
        }
        (GroupSpec::RealLine, _) => Err(Error::Shape("translates on ℝ are interval unions".into())),
        (_, Translates::Finite { elements }) => {
            DiscreteSet::from(elements.clone()).check_in(group)?;
            let p = discrete_periodic(s, group)?;
            let torus = Torus::from_period(p.period())?;
            let ind = p.indicator();
            let ks: Vec<usize> = elements.elements().iter().map(|x| torus.rank(x)).collect();
            let mut cells = Vec::new();
            let mut witness = None;
            for i in 0..torus.len() {
                // x ∈ S + k  ⇔  x - k ∈ S
                match ks.iter().position(|&kk| ind[torus.sub(i, kk)]) {
                    Some(j) => {
                        if torus.len() <= CELL_EVIDENCE_LIMIT {
                            cells.push(CellCover {
                                cell: torus.coords(i),
                                by: elements.elements()[j].clone(),
                            });
                        }
                    }
                    None => {
                        witness = Some(GroupElement::Int(torus.coords(i)));
                        break;
                    }
                }
            }
            if witness.is_some() {
                cells.clear();
            }
            Ok(SyndeticCertificate {
                translates: k.clone(),
                verified: witness.is_none(),
                witness,
                cells,
                sum: None,
            })
        }
        _ => Err(Error::Shape("translates in a discrete group are finite sets".into())),
    }
}

/// Largest fundamental domain searched exhaustively.
pub const EXACT_COVER_CAP: usize = 20;
/// Largest fundamental domain for the greedy fallback.
pub const GREEDY_COVER_CAP: usize = 1 << 14;

/// Smallest `K` with `S + K = G`, as representatives in the fundamental
/// domain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MinimalCover {
    pub translates: Vec<Vec<i64>>,
    /// False when the greedy set cover was used.
    pub exact: bool,
    pub cells: usize,
}

/// Exhaustive search (the lexicographically least optimum containing 0)
/// up to [`EXACT_COVER_CAP`] cells, greedy set cover above.
pub fn minimal_translates<T: Scalar>(s: &SetSpec<T>, group: &GroupSpec) -> Result<MinimalCover> {
    s.check_in(group)?;
    let p = discrete_periodic(s, group)?;
    if p.residues().is_empty() {
        return Err(Error::Empty("S is empty".into()));
    }
    let torus = Torus::from_period(p.period())?;
    let n = torus.len();
    let ind = p.indicator();
    let members = crate::torus::members(&ind);
    // shifted[k] = cells of S + k
    let shifted = |k: usize| -> Vec<usize> { members.iter().map(|&a| torus.add(a, k)).collect() };
    if n <= EXACT_COVER_CAP {
        let masks: Vec<u32> = (0..n)
            .map(|k| shifted(k).into_iter().fold(0u32, |m, c| m | 1 << c))
            .collect();
        let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        // S + K = G implies S + (K - k) = G, so some optimum contains 0
        for size in 1..=n {
            let mut combo: Vec<usize> = (0..size).collect();
            loop {
                let cover = combo.iter().fold(0u32, |m, &k| m | masks[k]);
                if cover == full {
                    return Ok(MinimalCover {
                        translates: combo.iter().map(|&k| torus.coords(k)).collect(),
                        exact: true,
                        cells: n,
                    });
                }
                if !next_combination(&mut combo, n) {
                    break;
                }
            }
        }
        unreachable!("K = G always covers");
    }
    if n > GREEDY_COVER_CAP {
        return Err(Error::CapExceeded { size: n as u128, cap: GREEDY_COVER_CAP as u128 });
    }
    let mut covered = vec![false; n];
    let mut left = n;
    let mut chosen = Vec::new();
    while left > 0 {
        let (best, _) = (0..n)
            .map(|k| (k, shifted(k).iter().filter(|&&c| !covered[c]).count()))
            .fold((0, 0), |acc, x| if x.1 > acc.1 { x } else { acc });
        for c in shifted(best) {
            if !covered[c] {
                covered[c] = true;
                left -= 1;
            }
        }
        chosen.push(best);
    }
    chosen.sort();
    Ok(MinimalCover {
        translates: chosen.iter().map(|&k| torus.coords(k)).collect(),
        exact: false,
        cells: n,
    })
}

/// Next combination that keeps `combo[0] = 0`, in lexicographic order.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 1 {
        i -= 1;
        if combo[i] < n - (k - i) {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use proptest::prelude::*;

    fn z() -> GroupSpec {
        GroupSpec::ZLattice { dimension: 1 }
    }

    fn per(m: i64, r: &[i64]) -> SetSpec<Rational> {
        SetSpec::from(DiscreteSet::from(PeriodicSet::arithmetic(m, r.iter().copied()).unwrap()))
    }

    fn fin(xs: &[i64]) -> Translates<Rational> {
        Translates::Finite { elements: FiniteSet::from_ints(xs.iter().copied()) }
    }

    #[test]
    fn gaps() {
        let two = DiscreteSet::from(PeriodicSet::arithmetic(2, [0]).unwrap());
        let r = gap_analysis(&two, 0).unwrap();
        assert_eq!((r.max_gap, r.bounded), (2, true));
        assert!(r.gaps.iter().all(|&g| g == 2));

        let a = DiscreteSet::from(PeriodicSet::arithmetic(5, [0, 1]).unwrap());
        let (d, _) = a.difference_set(&z()).unwrap();
        let r = gap_analysis(&d, 0).unwrap();
        assert_eq!(r.elements, vec![1, 4, 5]);
        assert_eq!(r.max_gap, 3);

        let empty = DiscreteSet::from(FiniteSet::from_ints([-3, 0]));
        assert!(matches!(gap_analysis(&empty, 10), Err(Error::Empty(_))));
    }

    #[test]
    fn syndetic_examples() {
        let c = syndetic_check(&per(3, &[0]), &fin(&[0, 1, 2]), &z()).unwrap();
        assert!(c.verified);
        assert_eq!(c.cells.len(), 3);
        let c = syndetic_check(&per(3, &[0]), &fin(&[0, 1]), &z()).unwrap();
        assert!(!c.verified);
        assert_eq!(c.witness, Some(GroupElement::Int(vec![2])));

        let q = |a, b| Rational::from_ratio(a, b);
        let half = PeriodicPattern::new(q(1, 1), IntervalUnion::interval(q(0, 1), q(1, 2)).unwrap()).unwrap();
        let s = SetSpec::PeriodicPattern(half);
        let k = Translates::Real { intervals: IntervalUnion::interval(q(0, 1), q(1, 2)).unwrap() };
        assert!(syndetic_check(&s, &k, &GroupSpec::RealLine).unwrap().verified);
        let k = Translates::Real { intervals: IntervalUnion::interval(q(0, 1), q(1, 4)).unwrap() };
        let c = syndetic_check(&s, &k, &GroupSpec::RealLine).unwrap();
        assert_eq!(c.witness, Some(GroupElement::Real(q(7, 8))));
    }

    #[test]
    fn minimal_examples() {
        let m = minimal_translates(&per(3, &[0]), &z()).unwrap();
        assert_eq!(m.translates, vec![vec![0], vec![1], vec![2]]);
        let g = GroupSpec::FiniteAbelian { moduli: vec![4] };
        let whole = SetSpec::<Rational>::from(DiscreteSet::from(FiniteSet::from_ints(0..4)));
        assert_eq!(minimal_translates(&whole, &g).unwrap().translates, vec![vec![0]]);
        let zero = SetSpec::<Rational>::from(DiscreteSet::from(FiniteSet::from_ints([0])));
        assert_eq!(minimal_translates(&zero, &g).unwrap().translates.len(), 4);
    }

    proptest! {
        #[test]
        fn difference_gaps_bounded_by_period(m in 1i64..30, bits in proptest::collection::vec(any::<bool>(), 30)) {
            let res: Vec<i64> = (0..m).filter(|&i| bits[i as usize]).collect();
            prop_assume!(!res.is_empty());
            let a = DiscreteSet::from(PeriodicSet::arithmetic(m, res).unwrap());
            let (d, _) = a.difference_set(&z()).unwrap();
            prop_assert!(gap_analysis(&d, 0).unwrap().max_gap <= m);
        }

        #[test]
        fn covering_is_monotone(m in 1i64..16, bits in proptest::collection::vec(any::<bool>(), 16),
                                k in proptest::collection::vec(0i64..16, 1..5), extra in 0i64..16) {
            let res: Vec<i64> = (0..m).filter(|&i| bits[i as usize]).collect();
            prop_assume!(!res.is_empty());
            let s = per(m, &res);
            let c = syndetic_check(&s, &fin(&k), &z()).unwrap();
            let mut bigger = k.clone();
            bigger.push(extra);
            let c2 = syndetic_check(&s, &fin(&bigger), &z()).unwrap();
            prop_assert!(!c.verified || c2.verified);
            // the optimum is no larger than any verified cover
            let opt = minimal_translates(&s, &z()).unwrap();
            if c.verified {
                let distinct: std::collections::BTreeSet<i64> = k.iter().map(|x| x.rem_euclid(m)).collect();
                prop_assert!(opt.translates.len() <= distinct.len());
            }
            let cover = Translates::Finite {
                elements: FiniteSet::new(opt.translates.clone()).unwrap(),
            };
            prop_assert!(syndetic_check(&s, &cover, &z()).unwrap().verified);
        }
    }
}
