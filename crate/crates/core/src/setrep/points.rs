//! Locally finite point configurations on ℝ: a periodic lattice part, a
//! finite list of extra points, and optional accumulating tails.

use serde::{Deserialize, Serialize};
use serde_with::serde_as;

use crate::error::{Error, Result};
use crate::group::reduce_mod;
use crate::scalar::{Exact, Scalar};
use crate::setrep::intervals::IntervalUnion;
use crate::setrep::measure::Mass;

/// `residues + period·ℤ`.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct Lattice<T> {
    #[serde_as(as = "Exact")]
    pub period: T,
    #[serde_as(as = "Vec<Exact>")]
    pub residues: Vec<T>,
}

impl<T: Scalar> Lattice<T> {
    pub fn new(period: T, residues: Vec<T>) -> Result<Self> {
        if !period.is_positive() {
            return Err(Error::NonPositivePeriod);
        }
        let mut residues: Vec<T> = residues.iter().map(|r| reduce_mod(r, &period)).collect();
        residues.sort();
        residues.dedup();
        Ok(Lattice { period, residues })
    }

    pub fn contains(&self, x: &T) -> bool {
        self.residues.binary_search(&reduce_mod(x, &self.period)).is_ok()
    }

    /// Number of lattice points in `[a, b]`.
    pub fn count_in(&self, a: &T, b: &T) -> T {
        if b < a {
            return T::zero();
        }
        let p = &self.period;
        self.residues.iter().fold(T::zero(), |acc, r| {
            let hi = ((b.clone() - r.clone()) / p.clone()).floor();
            let lo = ((a.clone() - r.clone()) / p.clone()).ceil();
            let n = hi - lo + T::one();
            if n.is_positive() {
                acc + n
            } else {
                acc
            }
        })
    }

    /// Lattice points in `[a, b]`, increasing.
    pub fn points_in(&self, a: &T, b: &T) -> Vec<T> {
        let p = &self.period;
        let mut out = Vec::new();
        if b < a {
            return out;
        }
        let start = (a.clone() / p.clone()).floor() * p.clone();
        let mut base = start;
        while &base <= b {
            for r in &self.residues {
                let x = base.clone() + r.clone();
                if &x >= a && &x <= b {
                    out.push(x);
                }
            }
            base = base + p.clone();
        }
        out
    }
}

/// The points `center + scale/n` for every integer `n ≥ start`; they
/// accumulate at `center`.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct Tail<T> {
    #[serde_as(as = "Exact")]
    pub center: T,
    #[serde_as(as = "Exact")]
    pub scale: T,
    pub start: u64,
}

impl<T: Scalar> Tail<T> {
    /// Range of indices `n` whose points lie in `[a, b]`; `None` when there
    /// are infinitely many (the window contains the center together with
    /// the side the points approach from).
    fn indices_in(&self, a: &T, b: &T) -> Option<(T, T)> {
        let empty = Some((T::one(), T::zero()));
        if b < a || self.scale.is_zero() {
            return empty;
        }
        let c = &self.center;
        let (near, far) = if self.scale.is_positive() {
            (a.clone() - c.clone(), b.clone() - c.clone())
        } else {
            (c.clone() - b.clone(), c.clone() - a.clone())
        };
        let s = self.scale.abs();
        // the points sit at distance s/n on one side of the center
        if !far.is_positive() {
            return empty;
        }
        if !near.is_positive() {
            return None;
        }
        let lo = (s.clone() / far).ceil().max(T::from_int(self.start.max(1) as i64));
        let hi = (s / near).floor();
        Some((lo, hi))
    }

    pub(crate) fn count_in(&self, a: &T, b: &T) -> Mass<T> {
        match self.indices_in(a, b) {
            None => Mass::Infinite,
            Some((lo, hi)) => Mass::Finite((hi - lo + T::one()).max(T::zero())),
        }
    }

    fn point(&self, n: i64) -> T {
        self.center.clone() + self.scale.clone() / T::from_int(n)
    }
}

/// A locally finite configuration of points on ℝ, possibly with
/// accumulation points.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawConfig<T>", into = "RawConfig<T>", bound = "T: Scalar")]
pub struct PointConfig<T> {
    lattice: Option<Lattice<T>>,
    points: Vec<T>,
    tails: Vec<Tail<T>>,
    has_accumulation: bool,
}

#[serde_as]
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
struct RawConfig<T> {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lattice: Option<Lattice<T>>,
    #[serde_as(as = "Vec<Exact>")]
    #[serde(default)]
    points: Vec<T>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    tails: Vec<Tail<T>>,
    #[serde(default)]
    has_accumulation: bool,
}

impl<T: Scalar> TryFrom<RawConfig<T>> for PointConfig<T> {
    type Error = Error;
    fn try_from(raw: RawConfig<T>) -> Result<Self> {
        let lattice = raw
            .lattice
            .map(|l| Lattice::new(l.period, l.residues))
            .transpose()?;
        let mut c = PointConfig::new(lattice, raw.points, raw.tails);
        c.has_accumulation |= raw.has_accumulation;
        Ok(c)
    }
}

impl<T: Scalar> From<PointConfig<T>> for RawConfig<T> {
    fn from(c: PointConfig<T>) -> Self {
        RawConfig {
            lattice: c.lattice,
            points: c.points,
            tails: c.tails,
            has_accumulation: c.has_accumulation,
        }
    }
}

impl<T: Scalar> PointConfig<T> {
    pub fn new(lattice: Option<Lattice<T>>, mut points: Vec<T>, tails: Vec<Tail<T>>) -> Self {
        points.sort();
        points.dedup();
        if let Some(l) = &lattice {
            points.retain(|x| !l.contains(x));
        }
        let lattice = lattice.filter(|l| !l.residues.is_empty());
        let has_accumulation = !tails.is_empty();
        PointConfig { lattice, points, tails, has_accumulation }
    }

    pub fn finite(points: Vec<T>) -> Self {
        Self::new(None, points, Vec::new())
    }

    pub fn periodic(period: T, residues: Vec<T>) -> Result<Self> {
        Ok(Self::new(Some(Lattice::new(period, residues)?), Vec::new(), Vec::new()))
    }

    /// `{αn : lo ≤ n ≤ hi} ∪ {α(n + 1/n) : lo ≤ n ≤ hi}`, the truncated
    /// integers-with-reciprocal-shifts configuration.
    pub fn reciprocal_perturbation(alpha: T, lo: i64, hi: i64) -> Self {
        let mut pts = Vec::new();
        for n in lo..=hi {
            pts.push(alpha.clone() * T::from_int(n));
            pts.push(alpha.clone() * (T::from_int(n) + T::from_ratio(1, n)));
        }
        Self::finite(pts)
    }

    /// `{center + scale/n : n ≥ start}`.
    pub fn reciprocal_tail(center: T, scale: T, start: u64) -> Self {
        Self::new(None, Vec::new(), vec![Tail { center, scale, start }])
    }

    pub fn lattice(&self) -> Option<&Lattice<T>> {
        self.lattice.as_ref()
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn tails(&self) -> &[Tail<T>] {
        &self.tails
    }

    pub fn has_accumulation(&self) -> bool {
        self.has_accumulation
    }

    pub fn is_empty(&self) -> bool {
        self.lattice.is_none() && self.points.is_empty() && self.tails.is_empty()
    }

    /// Purely periodic configurations: `(period, residues)`.
    pub fn as_periodic(&self) -> Option<(&T, &[T])> {
        match &self.lattice {
            Some(l) if self.points.is_empty() && self.tails.is_empty() => {
                Some((&l.period, &l.residues))
            }
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.lattice.is_none() && self.tails.is_empty()
    }

    pub fn translate(&self, x: &T) -> Self {
        let lattice = self.lattice.as_ref().map(|l| {
            Lattice::new(
                l.period.clone(),
                l.residues.iter().map(|r| r.clone() + x.clone()).collect(),
            )
            .expect("period stays positive")
        });
        let points = self.points.iter().map(|p| p.clone() + x.clone()).collect();
        let tails = self
            .tails
            .iter()
            .map(|t| Tail { center: t.center.clone() + x.clone(), ..t.clone() })
            .collect();
        let mut c = Self::new(lattice, points, tails);
        c.has_accumulation = self.has_accumulation;
        c
    }

    /// Exact number of points in the closed window `[a, b]`.
    pub fn count_in(&self, a: &T, b: &T) -> Mass<T> {
        let mut total = T::zero();
        for t in &self.tails {
            match t.count_in(a, b) {
                Mass::Infinite => return Mass::Infinite,
                Mass::Finite(n) => total = total + n,
            }
        }
        if let Some(l) = &self.lattice {
            total = total + l.count_in(a, b);
        }
        let lo = self.points.partition_point(|p| p < a);
        let hi = self.points.partition_point(|p| p <= b);
        total = total + T::from_int(hi.saturating_sub(lo) as i64);
        Mass::Finite(total)
    }

    /// Every point in `[a, b]`, increasing. Fails when the window holds
    /// infinitely many.
    pub fn points_in(&self, a: &T, b: &T) -> Result<Vec<T>> {
        let mut out: Vec<T> = self
            .points
            .iter()
            .filter(|p| *p >= a && *p <= b)
            .cloned()
            .collect();
        if let Some(l) = &self.lattice {
            out.extend(l.points_in(a, b));
        }
        for t in &self.tails {
            let (lo, hi) = t.indices_in(a, b).ok_or_else(|| {
                Error::InfiniteDensity(format!(
                    "window [{a}, {b}] contains the accumulation point {}",
                    t.center
                ))
            })?;
            if lo <= hi {
                let lo = lo.to_i64().expect("index fits i64");
                let hi = hi.to_i64().expect("index fits i64");
                out.extend((lo..=hi).map(|n| t.point(n)));
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// `(S - S) ∩ window`, exact. Configurations with accumulation points
    /// are rejected: their difference sets accumulate as well.
    pub fn difference_set_within(&self, window: (&T, &T)) -> Result<Vec<T>> {
        if self.has_accumulation {
            return Err(Error::InfiniteDensity(
                "difference set of a configuration with accumulation points".into(),
            ));
        }
        let (u, v) = window;
        let mut out = Vec::new();
        if let Some(l) = &self.lattice {
            let diffs = Lattice::new(
                l.period.clone(),
                l.residues
                    .iter()
                    .flat_map(|a| l.residues.iter().map(move |b| a.clone() - b.clone()))
                    .collect(),
            )?;
            out.extend(diffs.points_in(u, v));
            if !self.points.is_empty() {
                let cross = Lattice::new(
                    l.period.clone(),
                    l.residues
                        .iter()
                        .flat_map(|r| {
                            self.points.iter().flat_map(move |x| {
                                [r.clone() - x.clone(), x.clone() - r.clone()]
                            })
                        })
                        .collect(),
                )?;
                out.extend(cross.points_in(u, v));
            }
        }
        for x in &self.points {
            for y in &self.points {
                let d = x.clone() - y.clone();
                if &d >= u && &d <= v {
                    out.push(d);
                }
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// The points as a union of degenerate intervals (finite configurations).
    pub fn to_intervals(&self) -> Option<IntervalUnion<T>> {
        self.is_finite().then(|| IntervalUnion::points(self.points.iter().cloned()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use num_traits::Signed;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn lattice_counts_match_enumeration() {
        let s = PointConfig::periodic(q(2, 1), vec![q(0, 1)]).unwrap();
        assert_eq!(s.count_in(&q(-5, 1), &q(5, 1)), Mass::Finite(q(5, 1)));
        let l = Lattice::new(q(1, 1), vec![q(0, 1), q(1, 3)]).unwrap();
        for (a, b) in [(q(-3, 2), q(7, 3)), (q(0, 1), q(0, 1)), (q(1, 2), q(1, 3))] {
            let n = l.points_in(&a, &b).len() as i64;
            assert_eq!(l.count_in(&a, &b), q(n, 1));
        }
    }

    #[test]
    fn tails_are_infinite_only_around_their_center() {
        let s = PointConfig::reciprocal_tail(q(0, 1), q(1, 1), 1);
        assert!(s.has_accumulation());
        let eps = q(1, 100);
        assert_eq!(s.count_in(&-eps.clone(), &eps), Mass::Infinite);
        // 1/n in [1/10, 1] for n = 1..=10
        assert_eq!(s.count_in(&q(1, 10), &q(1, 1)), Mass::Finite(q(10, 1)));
        // the points approach from above, so a window ending at 0 is empty
        assert_eq!(s.count_in(&q(-1, 1), &q(0, 1)), Mass::Finite(q(0, 1)));
        assert_eq!(s.points_in(&q(1, 10), &q(1, 1)).unwrap().len(), 10);
        assert!(s.difference_set_within((&q(-1, 2), &q(1, 2))).is_err());
    }

    #[test]
    fn truncated_difference_set_shows_reciprocals() {
        let s = PointConfig::reciprocal_perturbation(q(1, 1), 2, 6);
        let d = s.difference_set_within((&q(-1, 2), &q(1, 2))).unwrap();
        assert!(d.contains(&q(0, 1)));
        for n in 2..=6 {
            assert!(d.contains(&q(1, n)) && d.contains(&q(-1, n)));
        }
        // oracle: all pairwise differences
        let pts = s.points();
        let mut expect: Vec<Rational> = pts
            .iter()
            .flat_map(|x| pts.iter().map(move |y| x - y))
            .filter(|d| d.abs() <= q(1, 2))
            .collect();
        expect.sort();
        expect.dedup();
        assert_eq!(d, expect);
    }

    #[test]
    fn periodic_difference_set_with_extra_points() {
        let s = PointConfig::new(
            Some(Lattice::new(q(1, 1), vec![q(0, 1)]).unwrap()),
            vec![q(1, 2)],
            vec![],
        );
        let d = s.difference_set_within((&q(-1, 1), &q(1, 1))).unwrap();
        assert_eq!(d, vec![q(-1, 1), q(-1, 2), q(0, 1), q(1, 2), q(1, 1)]);
        let pts = s.points_in(&q(-3, 1), &q(3, 1)).unwrap();
        assert_eq!(pts.len(), 8);
    }

    #[test]
    fn serde_round_trip() {
        let s = PointConfig::new(
            Some(Lattice::new(q(1, 1), vec![q(1, 3), q(0, 1)]).unwrap()),
            vec![q(5, 2)],
            vec![],
        );
        let json = serde_json::to_string(&s).unwrap();
        let back: PointConfig<Rational> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        let flagged: PointConfig<Rational> =
            serde_json::from_str(r#"{"points": ["1", "1/2"], "has_accumulation": true}"#).unwrap();
        assert!(flagged.has_accumulation());
    }
}
