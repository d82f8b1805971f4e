//! Splitting `S` into classes with `(S_j - S_j) ∩ (H - H) = {0}` by
//! first-fit coloring of the conflict graph, and the choice of `H`.

use serde::Serialize;
use serde_with::serde_as;

use crate::density::{kahane_density, DensityReport, ScanOptions};
use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::scalar::{Exact, Scalar};
use crate::setrep::discrete::{DiscreteSet, FiniteSet, PeriodicSet};
use crate::setrep::intervals::IntervalUnion;
use crate::setrep::measure::{count_residue, MeasureSpec, SetSpec};
use crate::setrep::points::{Lattice, PointConfig};
use crate::structure::packing::HSet;

/// Most vertices of a materialized conflict graph.
pub const MAX_PARTITION_POINTS: usize = 1 << 16;

/// A one-dimensional point set: periodic residues or finitely many points.
struct LineSet<T> {
    period: Option<T>,
    points: Vec<T>,
    integer: bool,
}

fn line_set<T: Scalar>(s: &SetSpec<T>) -> Result<LineSet<T>> {
    match s {
        SetSpec::Points(c) => {
            if c.has_accumulation() {
                return Err(Error::InfiniteDensity(
                    "a window s + (H - H) around the accumulation point holds infinitely many points"
                        .into(),
                ));
            }
            if let Some((p, res)) = c.as_periodic() {
                Ok(LineSet { period: Some(p.clone()), points: res.to_vec(), integer: false })
            } else if c.is_finite() {
                Ok(LineSet { period: None, points: c.points().to_vec(), integer: false })
            } else {
                Err(Error::precondition("point configuration must be periodic or finite"))
            }
        }
        _ => match s.as_discrete() {
            Some(DiscreteSet::PeriodicDiscrete(p)) if p.period().len() == 1 => Ok(LineSet {
                period: Some(T::from_int(p.period()[0])),
                points: p.residues().iter().map(|r| T::from_int(r[0])).collect(),
                integer: true,
            }),
            Some(DiscreteSet::ExplicitFinite(f)) if f.elements().iter().all(|e| e.len() == 1) => {
                Ok(LineSet {
                    period: None,
                    points: f.elements().iter().map(|e| T::from_int(e[0])).collect(),
                    integer: true,
                })
            }
            _ => Err(Error::precondition("partitions need a point set on ℝ or a set in ℤ")),
        },
    }
}

fn h_intervals<T: Scalar>(h: &HSet<T>, integer: bool) -> Result<IntervalUnion<T>> {
    match (h, integer) {
        (HSet::Real { intervals }, false) => Ok(intervals.clone()),
        (HSet::Finite { elements }, true) if elements.elements().iter().all(|e| e.len() == 1) => {
            Ok(IntervalUnion::points(elements.elements().iter().map(|e| T::from_int(e[0]))))
        }
        _ => Err(Error::Shape("H does not live in the group of S".into())),
    }
}

#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct AutoH<T> {
    pub h: HSet<T>,
    #[serde_as(as = "Exact")]
    pub rho: T,
    #[serde_as(as = "Exact")]
    pub eps: T,
    /// Largest number of points of `S` in a window `s + (H - H)`.
    pub window_count: i64,
    #[serde_as(as = "Exact")]
    pub measure_hh: T,
    /// `(1+ε)·ρ·μ(H - H)`, at least `window_count`.
    #[serde_as(as = "Exact")]
    pub bound: T,
}

/// Smallest `H = [0, h]` (`{0,…,L}` in ℤ) with
/// `max_s #(S ∩ (s + H - H)) ≤ (1+ε)·ρ·μ(H - H)` for periodic `S`.
pub fn auto_h<T: Scalar>(s: &SetSpec<T>, eps: &T) -> Result<AutoH<T>> {
    if !eps.is_positive() {
        return Err(Error::precondition("ε must be positive"));
    }
    let ls = line_set(s)?;
    let Some(p) = ls.period.clone() else {
        return Err(Error::precondition(
            "auto_H needs a periodic set: the density estimate of a finite set is not exact",
        ));
    };
    if ls.points.is_empty() {
        return Err(Error::precondition("D̄^#(S) = 0"));
    }
    let rho = T::from_int(ls.points.len() as i64) / p.clone();
    let factor = (T::one() + eps.clone()) * rho.clone();
    if ls.integer {
        let m = p.to_i64().expect("integer period");
        let res: Vec<i64> = ls.points.iter().map(|x| x.to_i64().expect("integer")).collect();
        let count = |l: i64| {
            res.iter()
                .map(|&s| res.iter().map(|&r| count_residue(r, m, s - l, s + l)).sum::<i64>())
                .max()
                .expect("nonempty")
        };
        // the inequality holds once p ≤ ε(2L+1)
        let last = (p.clone() / eps.clone()).ceil().to_i64().expect("bounded") + m;
        for l in 0..=last {
            let k = count(l);
            let measure_hh = T::from_int(2 * l + 1);
            if T::from_int(k) <= factor.clone() * measure_hh.clone() {
                return Ok(AutoH {
                    h: HSet::Finite { elements: FiniteSet::from_ints(0..=l) },
                    rho,
                    eps: eps.clone(),
                    window_count: k,
                    bound: factor * measure_hh.clone(),
                    measure_hh,
                });
            }
        }
        unreachable!("the window bound holds for large L");
    }
    let lattice = Lattice::new(p.clone(), ls.points.clone())?;
    let count = |h: &T| {
        ls.points
            .iter()
            .map(|s| lattice.count_in(&(s.clone() - h.clone()), &(s.clone() + h.clone())))
            .max()
            .expect("nonempty")
    };
    // k(h) is a step function jumping at the positive differences of S
    let reach = p.clone() / eps.clone() + p.clone();
    let cfg = PointConfig::periodic(p.clone(), ls.points.clone())?;
    let mut jumps: Vec<T> = cfg
        .difference_set_within((&T::zero(), &reach))?
        .into_iter()
        .filter(|d| d.is_positive())
        .collect();
    jumps.insert(0, T::zero());
    let two = T::from_int(2);
    for (i, d) in jumps.iter().enumerate() {
        let k = count(d);
        let h = std::cmp::max(d.clone(), k.clone() / (two.clone() * factor.clone()));
        if jumps.get(i + 1).is_none_or(|next| &h < next) {
            let k = count(&h);
            let measure_hh = two.clone() * h.clone();
            let bound = factor.clone() * measure_hh.clone();
            if k > bound {
                return Err(Error::verification("auto_H", format!("window count {k} > {bound}")));
            }
            return Ok(AutoH {
                h: HSet::Real { intervals: IntervalUnion::interval(T::zero(), h)? },
                rho,
                eps: eps.clone(),
                window_count: k.to_i64().expect("count"),
                measure_hh,
                bound,
            });
        }
    }
    Err(Error::verification("auto_H", "no admissible h below p/ε + p"))
}

#[serde_as]
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct PartitionResult<T> {
    pub classes: Vec<SetSpec<T>>,
    pub h: HSet<T>,
    pub n: usize,
    /// `max_s #(S ∩ (s + H - H))`.
    pub k_bound: usize,
    /// Period of the classes (the period of `S`, lifted so that `H - H`
    /// sees at most one copy of every point).
    #[serde_as(as = "Option<Exact>")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period: Option<T>,
    pub class_densities: Vec<DensityReport<T>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub auto: Option<AutoH<T>>,
}

/// First-fit coloring of the conflict graph (`s ~ t` iff `t - s ∈ H - H`)
/// in increasing point order. With `h = None`, `H` comes from [`auto_h`]
/// with the given `ε` and the class count is checked against its bound.
pub fn partition_by_coloring<T: Scalar>(
    s: &SetSpec<T>,
    h: Option<&HSet<T>>,
    eps: &T,
) -> Result<PartitionResult<T>> {
    let ls = line_set(s)?;
    let auto = match h {
        Some(_) => None,
        None => Some(auto_h(s, eps)?),
    };
    let h = h.cloned().unwrap_or_else(|| auto.as_ref().expect("auto").h.clone());
    let hh = h_intervals(&h, ls.integer)?.difference_set();
    let Some((_, reach)) = hh.hull() else {
        return Err(Error::precondition("H is empty"));
    };
    // materialize one (lifted) period, or the finite set
    let (period, points) = match &ls.period {
        Some(p) => {
            let lift = (T::from_int(2) * reach.clone() / p.clone()).floor() + T::one();
            let m = lift.to_i64().ok_or_else(|| Error::precondition("H is too wide"))?;
            let total = m as u128 * ls.points.len() as u128;
            if total > MAX_PARTITION_POINTS as u128 {
                return Err(Error::CapExceeded { size: total, cap: MAX_PARTITION_POINTS as u128 });
            }
            let mut pts = Vec::with_capacity(total as usize);
            for k in 0..m {
                for r in &ls.points {
                    pts.push(r.clone() + T::from_int(k) * p.clone());
                }
            }
            pts.sort();
            (Some(p.clone() * lift), pts)
        }
        None => {
            if ls.points.len() > MAX_PARTITION_POINTS {
                return Err(Error::CapExceeded {
                    size: ls.points.len() as u128,
                    cap: MAX_PARTITION_POINTS as u128,
                });
            }
            let mut pts = ls.points.clone();
            pts.sort();
            pts.dedup();
            (None, pts)
        }
    };
    let n_pts = points.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n_pts];
    for i in 0..n_pts {
        for j in i + 1..n_pts {
            let d = points[j].clone() - points[i].clone();
            if d > reach {
                break;
            }
            if hh.contains(&d) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        if let Some(big) = &period {
            // pairs across the period boundary
            for j in 0..i {
                let d = points[j].clone() + big.clone() - points[i].clone();
                if d > reach {
                    break;
                }
                if hh.contains(&d) {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
    }
    let k_bound = adj.iter().map(|a| a.len() + 1).max().unwrap_or(0);
    let mut color = vec![usize::MAX; n_pts];
    for i in 0..n_pts {
        let used: std::collections::BTreeSet<usize> =
            adj[i].iter().map(|&j| color[j]).filter(|&c| c != usize::MAX).collect();
        color[i] = (0..).find(|c| !used.contains(c)).expect("some color is free");
    }
    let n = color.iter().map(|&c| c + 1).max().unwrap_or(0);
    let mut groups: Vec<Vec<T>> = vec![Vec::new(); n];
    for (x, &c) in points.iter().zip(&color) {
        groups[c].push(x.clone());
    }
    // re-verification from the classes alone
    let mut union: Vec<T> = groups.concat();
    union.sort();
    if union != points {
        return Err(Error::verification("partition", "classes do not partition S"));
    }
    let mut classes = Vec::with_capacity(n);
    for g in &groups {
        let cfg = match &period {
            Some(big) => PointConfig::periodic(big.clone(), g.clone())?,
            None => PointConfig::finite(g.clone()),
        };
        let lo = -reach.clone();
        if let Some(d) = cfg
            .difference_set_within((&lo, &reach))?
            .into_iter()
            .find(|d| !d.is_zero() && hh.contains(d))
        {
            return Err(Error::verification(
                "partition",
                format!("class has difference {d} in H - H"),
            ));
        }
        classes.push(class_spec(cfg, ls.integer)?);
    }
    if n > k_bound {
        return Err(Error::verification("partition", format!("{n} classes > k = {k_bound}")));
    }
    if let Some(a) = &auto {
        if T::from_int(n as i64) > a.bound {
            return Err(Error::verification(
                "partition",
                format!("{n} classes > (1+ε)ρμ(H-H) = {}", a.bound),
            ));
        }
    }
    let group = if ls.integer { GroupSpec::ZLattice { dimension: 1 } } else { GroupSpec::RealLine };
    let opts = ScanOptions::default();
    let class_densities = classes
        .iter()
        .map(|c| kahane_density(&MeasureSpec::counting(c.clone()), &group, &opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(PartitionResult { classes, h, n, k_bound, period, class_densities, auto })
}

fn class_spec<T: Scalar>(cfg: PointConfig<T>, integer: bool) -> Result<SetSpec<T>> {
    if !integer {
        return Ok(SetSpec::Points(cfg));
    }
    let int = |x: &T| x.to_i64().expect("integer point");
    Ok(SetSpec::from(match cfg.as_periodic() {
        Some((p, res)) => DiscreteSet::from(PeriodicSet::arithmetic(int(p), res.iter().map(int))?),
        None => DiscreteSet::from(FiniteSet::from_ints(cfg.points().iter().map(int))),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(a: i64, b: i64) -> Rational {
        Rational::from_ratio(a, b)
    }

    fn thirds() -> SetSpec<Rational> {
        SetSpec::Points(PointConfig::periodic(q(1, 1), vec![q(0, 1), q(1, 3)]).unwrap())
    }

    fn h(b: Rational) -> HSet<Rational> {
        HSet::Real { intervals: IntervalUnion::interval(q(0, 1), b).unwrap() }
    }

    #[test]
    fn lattice_with_thirds() {
        let r = partition_by_coloring(&thirds(), Some(&h(q(1, 5))), &q(1, 2)).unwrap();
        assert_eq!(r.n, 1);
        let r = partition_by_coloring(&thirds(), Some(&h(q(2, 5))), &q(1, 2)).unwrap();
        assert_eq!(r.n, 2);
        assert_eq!(r.class_densities[0].exact_value(), Some(&q(1, 1)));
    }

    #[test]
    fn reciprocal_shifts() {
        let s = SetSpec::Points(PointConfig::reciprocal_perturbation(q(1, 1), 2, 50));
        let r = partition_by_coloring(&s, Some(&h(q(1, 4))), &q(1, 2)).unwrap();
        assert_eq!(r.n, 2);
    }

    #[test]
    fn automatic_window() {
        let two = SetSpec::Points(PointConfig::periodic(q(2, 1), vec![q(0, 1)]).unwrap());
        let a = auto_h(&two, &q(1, 1)).unwrap();
        assert_eq!(a.h, h(q(1, 2)));
        assert!(Rational::from_int(a.window_count) <= a.bound);
        let a = auto_h(&two, &q(1, 2)).unwrap();
        assert_eq!(a.h, h(q(2, 3)));
        let z = SetSpec::<Rational>::from(DiscreteSet::from(PeriodicSet::arithmetic(1, [0]).unwrap()));
        let a = auto_h(&z, &q(1, 2)).unwrap();
        assert!(Rational::from_int(a.window_count) <= q(3, 2) * a.measure_hh);
        let r = partition_by_coloring(&z, None, &q(1, 2)).unwrap();
        assert_eq!(r.n, 1);
        let finite = SetSpec::Points(PointConfig::finite(vec![q(0, 1)]));
        assert!(matches!(auto_h(&finite, &q(1, 2)), Err(Error::Precondition(_))));
    }
}
