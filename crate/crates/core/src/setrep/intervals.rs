//! Finite unions of closed intervals with exact endpoints, and periodic
//! patterns built from them.

use serde::{Deserialize, Serialize};
use serde_with::serde_as;

use crate::error::{Error, Result};
use crate::group::reduce_mod;
use crate::scalar::{Exact, Scalar};

/// A finite union of closed intervals, kept sorted with touching or
/// overlapping pieces merged, so consecutive pieces have a positive gap.
/// Degenerate pieces `[a, a]` are allowed and stand for single points.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawIntervals<T>", into = "RawIntervals<T>", bound = "T: Scalar")]
pub struct IntervalUnion<T> {
    pieces: Vec<(T, T)>,
}

#[serde_as]
#[derive(Serialize, Deserialize)]
#[serde(transparent, bound = "T: Scalar")]
struct RawIntervals<T>(#[serde_as(as = "Vec<(Exact, Exact)>")] Vec<(T, T)>);

impl<T: Scalar> TryFrom<RawIntervals<T>> for IntervalUnion<T> {
    type Error = Error;
    fn try_from(raw: RawIntervals<T>) -> Result<Self> {
        IntervalUnion::new(raw.0)
    }
}

impl<T: Scalar> From<IntervalUnion<T>> for RawIntervals<T> {
    fn from(u: IntervalUnion<T>) -> Self {
        RawIntervals(u.pieces)
    }
}

impl<T: Scalar> Default for IntervalUnion<T> {
    fn default() -> Self {
        Self::empty()
    }
}

impl<T: Scalar> IntervalUnion<T> {
    pub fn new(pieces: Vec<(T, T)>) -> Result<Self> {
        if let Some((a, b)) = pieces.iter().find(|(a, b)| a > b) {
            return Err(Error::Shape(format!("interval [{a}, {b}] has a > b")));
        }
        Ok(Self::from_valid(pieces))
    }

    fn from_valid(mut pieces: Vec<(T, T)>) -> Self {
        pieces.sort();
        let mut merged: Vec<(T, T)> = Vec::with_capacity(pieces.len());
        for (a, b) in pieces {
            match merged.last_mut() {
                Some(last) if a <= last.1 => {
                    if b > last.1 {
                        last.1 = b;
                    }
                }
                _ => merged.push((a, b)),
            }
        }
        IntervalUnion { pieces: merged }
    }

    pub fn empty() -> Self {
        IntervalUnion { pieces: Vec::new() }
    }

    pub fn interval(a: T, b: T) -> Result<Self> {
        Self::new(vec![(a, b)])
    }

    pub fn point(x: T) -> Self {
        IntervalUnion { pieces: vec![(x.clone(), x)] }
    }

    pub fn points(xs: impl IntoIterator<Item = T>) -> Self {
        Self::from_valid(xs.into_iter().map(|x| (x.clone(), x)).collect())
    }

    pub fn pieces(&self) -> &[(T, T)] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Total length (Lebesgue measure).
    pub fn length(&self) -> T {
        self.pieces
            .iter()
            .fold(T::zero(), |acc, (a, b)| acc + b.clone() - a.clone())
    }

    pub fn hull(&self) -> Option<(T, T)> {
        Some((self.pieces.first()?.0.clone(), self.pieces.last()?.1.clone()))
    }

    /// `sup |x - y|` over the set; zero for the empty set.
    pub fn diameter(&self) -> T {
        self.hull().map(|(a, b)| b - a).unwrap_or_else(T::zero)
    }

    /// Every endpoint, in order.
    pub fn endpoints(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(2 * self.pieces.len());
        for (a, b) in &self.pieces {
            out.push(a.clone());
            if b != a {
                out.push(b.clone());
            }
        }
        out
    }

    pub fn contains(&self, x: &T) -> bool {
        let idx = self.pieces.partition_point(|(a, _)| a <= x);
        idx > 0 && &self.pieces[idx - 1].1 >= x
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut all = self.pieces.clone();
        all.extend(other.pieces.iter().cloned());
        Self::from_valid(all)
    }

    pub fn translate(&self, x: &T) -> Self {
        IntervalUnion {
            pieces: self
                .pieces
                .iter()
                .map(|(a, b)| (a.clone() + x.clone(), b.clone() + x.clone()))
                .collect(),
        }
    }

    /// Dilation by a nonnegative factor.
    pub fn scale(&self, r: &T) -> Self {
        assert!(!r.is_negative(), "dilation factor must be nonnegative");
        Self::from_valid(
            self.pieces
                .iter()
                .map(|(a, b)| (a.clone() * r.clone(), b.clone() * r.clone()))
                .collect(),
        )
    }

    pub fn neg(&self) -> Self {
        IntervalUnion {
            pieces: self
                .pieces
                .iter()
                .rev()
                .map(|(a, b)| (-b.clone(), -a.clone()))
                .collect(),
        }
    }

    /// Exact Minkowski sum.
    pub fn minkowski_sum(&self, other: &Self) -> Self {
        let mut all = Vec::with_capacity(self.pieces.len() * other.pieces.len());
        for (a, b) in &self.pieces {
            for (c, d) in &other.pieces {
                all.push((a.clone() + c.clone(), b.clone() + d.clone()));
            }
        }
        Self::from_valid(all)
    }

    /// `S - S`; symmetric, and contains 0 whenever `S` is nonempty.
    pub fn difference_set(&self) -> Self {
        self.minkowski_sum(&self.neg())
    }

    /// Length of the part of the set inside the closed interval `[u, v]`.
    pub fn length_within(&self, u: &T, v: &T) -> T {
        let mut total = T::zero();
        let start = self.pieces.partition_point(|(_, b)| b < u);
        for (a, b) in &self.pieces[start..] {
            if a > v {
                break;
            }
            let lo = if a > u { a } else { u };
            let hi = if b < v { b } else { v };
            if hi > lo {
                total = total + hi.clone() - lo.clone();
            }
        }
        total
    }

    /// Length of the intersection with another union.
    pub fn intersection_length(&self, other: &Self) -> T {
        other
            .pieces
            .iter()
            .fold(T::zero(), |acc, (u, v)| acc + self.length_within(u, v))
    }
}

/// A subset of ℝ invariant under translation by `period`, described by its
/// trace on one period. Stored canonically with every piece inside
/// `[0, period]`.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawPattern<T>", into = "RawPattern<T>", bound = "T: Scalar")]
pub struct PeriodicPattern<T> {
    period: T,
    pattern: IntervalUnion<T>,
}

#[serde_as]
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
struct RawPattern<T> {
    #[serde_as(as = "Exact")]
    period: T,
    pattern: IntervalUnion<T>,
}

impl<T: Scalar> TryFrom<RawPattern<T>> for PeriodicPattern<T> {
    type Error = Error;
    fn try_from(raw: RawPattern<T>) -> Result<Self> {
        PeriodicPattern::new(raw.period, raw.pattern)
    }
}

impl<T: Scalar> From<PeriodicPattern<T>> for RawPattern<T> {
    fn from(p: PeriodicPattern<T>) -> Self {
        RawPattern { period: p.period, pattern: p.pattern }
    }
}

impl<T: Scalar> PeriodicPattern<T> {
    /// Wraps `pattern` around the circle of length `period`.
    pub fn new(period: T, pattern: IntervalUnion<T>) -> Result<Self> {
        if !period.is_positive() {
            return Err(Error::NonPositivePeriod);
        }
        let mut pieces = Vec::new();
        for (a, b) in pattern.pieces() {
            let len = b.clone() - a.clone();
            if len >= period {
                pieces.push((T::zero(), period.clone()));
                continue;
            }
            let start = reduce_mod(a, &period);
            let end = start.clone() + len;
            if end <= period {
                pieces.push((start, end));
            } else {
                pieces.push((start, period.clone()));
                pieces.push((T::zero(), end - period.clone()));
            }
        }
        Ok(PeriodicPattern {
            period,
            pattern: IntervalUnion::from_valid(pieces),
        })
    }

    pub fn period(&self) -> &T {
        &self.period
    }

    pub fn pattern(&self) -> &IntervalUnion<T> {
        &self.pattern
    }

    /// Measure per period.
    pub fn mass_per_period(&self) -> T {
        self.pattern.length()
    }

    /// Exact density `length(pattern) / period`.
    pub fn density(&self) -> T {
        self.pattern.length() / self.period.clone()
    }

    /// Signed measure of the set between 0 and `t`.
    pub fn cumulative(&self, t: &T) -> T {
        let k = (t.clone() / self.period.clone()).floor();
        let rest = t.clone() - k.clone() * self.period.clone();
        k * self.pattern.length() + self.pattern.length_within(&T::zero(), &rest)
    }

    /// Measure of the set inside `[u, v]`.
    pub fn length_within(&self, u: &T, v: &T) -> T {
        if v <= u {
            return T::zero();
        }
        self.cumulative(v) - self.cumulative(u)
    }

    pub fn contains(&self, x: &T) -> bool {
        let r = reduce_mod(x, &self.period);
        self.pattern.contains(&r) || (r.is_zero() && self.pattern.contains(&self.period))
    }

    /// The same set described with a period `factor` times longer.
    pub fn lift(&self, factor: u64) -> Self {
        let mut pieces = Vec::with_capacity(self.pattern.pieces().len() * factor as usize);
        for k in 0..factor as i64 {
            let shift = self.period.clone() * T::from_int(k);
            for (a, b) in self.pattern.pieces() {
                pieces.push((a.clone() + shift.clone(), b.clone() + shift.clone()));
            }
        }
        PeriodicPattern {
            period: self.period.clone() * T::from_int(factor as i64),
            pattern: IntervalUnion::from_valid(pieces),
        }
    }

    /// Periodic set plus a bounded set.
    pub fn minkowski_sum(&self, k: &IntervalUnion<T>) -> Self {
        Self::new(self.period.clone(), self.pattern.minkowski_sum(k)).expect("period is positive")
    }

    /// Sum of two periodic sets with commensurable periods.
    pub fn minkowski_sum_periodic(&self, other: &Self, max_factor: i64) -> Result<Self> {
        let (a, b) = align_periods(self, other, max_factor)?;
        Ok(a.minkowski_sum(&b.pattern))
    }

    pub fn difference_set(&self) -> Self {
        self.minkowski_sum(&self.pattern.neg())
    }

    pub fn translate(&self, x: &T) -> Self {
        self.minkowski_sum(&IntervalUnion::point(x.clone()))
    }

    /// Open arcs of the circle ℝ/period not covered by the set, in
    /// increasing order of their left end. An arc may run past `period`
    /// when it wraps around 0; the whole circle is reported as `(0, period)`
    /// together with `true` for "0 itself uncovered".
    pub fn uncovered_arcs(&self) -> (Vec<(T, T)>, bool) {
        let pieces = self.pattern.pieces();
        let p = &self.period;
        if pieces.is_empty() {
            return (vec![(T::zero(), p.clone())], true);
        }
        let mut arcs = Vec::new();
        for w in pieces.windows(2) {
            arcs.push((w[0].1.clone(), w[1].0.clone()));
        }
        let first = &pieces[0].0;
        let last = &pieces[pieces.len() - 1].1;
        let zero_uncovered = first.is_positive() && last < p;
        if zero_uncovered {
            arcs.push((last.clone(), first.clone() + p.clone()));
        } else if first.is_positive() {
            arcs.insert(0, (T::zero(), first.clone()));
        } else if last < p {
            arcs.push((last.clone(), p.clone()));
        }
        (arcs, zero_uncovered)
    }

    pub fn covers_everything(&self) -> bool {
        self.uncovered_arcs().0.is_empty()
    }
}

/// Lifts two patterns to a common period.
pub fn align_periods<T: Scalar>(
    a: &PeriodicPattern<T>,
    b: &PeriodicPattern<T>,
    max_factor: i64,
) -> Result<(PeriodicPattern<T>, PeriodicPattern<T>)> {
    let common = crate::scalar::rational_lcm(&a.period, &b.period, max_factor).ok_or_else(|| {
        Error::Incommensurable(a.period.to_string(), b.period.to_string())
    })?;
    let fa = (common.clone() / a.period.clone()).to_i64().expect("integral factor") as u64;
    let fb = (common / b.period.clone()).to_i64().expect("integral factor") as u64;
    Ok((a.lift(fa), b.lift(fb)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn iv(pairs: &[(i64, i64, i64, i64)]) -> IntervalUnion<Rational> {
        IntervalUnion::new(pairs.iter().map(|&(a, b, c, d)| (q(a, b), q(c, d))).collect()).unwrap()
    }

    #[test]
    fn canonical_merging() {
        let u = iv(&[(2, 1, 3, 1), (0, 1, 1, 1), (1, 1, 3, 2)]);
        assert_eq!(u.pieces(), &[(q(0, 1), q(3, 2)), (q(2, 1), q(3, 1))]);
        assert!(IntervalUnion::new(vec![(q(1, 1), q(0, 1))]).is_err());
        assert_eq!(iv(&[(0, 1, 1, 1), (2, 1, 5, 2)]).length(), q(3, 2));
    }

    #[test]
    fn sums_of_intervals() {
        let unit = iv(&[(0, 1, 1, 1)]);
        let s = unit.minkowski_sum(&unit);
        assert_eq!(s, iv(&[(0, 1, 2, 1)]));
        assert_eq!(s.length(), q(2, 1));
        let sym = iv(&[(-1, 1, 1, 1)]);
        assert_eq!(sym.minkowski_sum(&IntervalUnion::point(q(0, 1))), sym);
        let d = iv(&[(0, 1, 1, 1), (3, 1, 4, 1)]).difference_set();
        assert_eq!(d, iv(&[(-4, 1, -2, 1), (-1, 1, 1, 1), (2, 1, 4, 1)]));
    }

    #[test]
    fn pattern_wraps_and_measures() {
        let p = PeriodicPattern::new(q(1, 1), iv(&[(3, 4, 5, 4)])).unwrap();
        assert_eq!(p.pattern(), &iv(&[(0, 1, 1, 4), (3, 4, 1, 1)]));
        assert_eq!(p.density(), q(1, 2));
        let half = PeriodicPattern::new(q(1, 1), iv(&[(0, 1, 1, 2)])).unwrap();
        // integrate [0,1/2) mod 1 over [-3/4, 5/4]
        assert_eq!(half.length_within(&q(-3, 4), &q(5, 4)), q(1, 1));
        assert!(half.contains(&q(-3, 4)));
        assert!(!half.contains(&q(-1, 4)));
    }

    #[test]
    fn covering_arcs() {
        let half = PeriodicPattern::new(q(1, 1), iv(&[(0, 1, 1, 2)])).unwrap();
        assert_eq!(half.uncovered_arcs(), (vec![(q(1, 2), q(1, 1))], false));
        let covered = half.minkowski_sum(&iv(&[(0, 1, 1, 2)]));
        assert!(covered.covers_everything());
        let mid = PeriodicPattern::new(q(1, 1), iv(&[(1, 4, 1, 2)])).unwrap();
        assert_eq!(mid.uncovered_arcs(), (vec![(q(1, 2), q(5, 4))], true));
    }

    fn small_union() -> impl Strategy<Value = IntervalUnion<Rational>> {
        prop::collection::vec((-20i64..20, 0i64..10, 1i64..4), 1..4).prop_map(|v| {
            IntervalUnion::new(
                v.into_iter()
                    .map(|(a, len, d)| (q(a, d), q(a, d) + q(len, d)))
                    .collect(),
            )
            .unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn minkowski_sum_laws(a in small_union(), b in small_union(), c in small_union()) {
            prop_assert_eq!(a.minkowski_sum(&b), b.minkowski_sum(&a));
            prop_assert_eq!(
                a.minkowski_sum(&b).minkowski_sum(&c),
                a.minkowski_sum(&b.minkowski_sum(&c))
            );
            let s = a.minkowski_sum(&b).length();
            prop_assert!(s >= a.length() && s >= b.length());
        }

        #[test]
        fn canonical_form_is_idempotent(a in small_union()) {
            let again = IntervalUnion::new(a.pieces().to_vec()).unwrap();
            prop_assert_eq!(again, a);
        }

        #[test]
        fn difference_set_symmetric_with_zero(a in small_union()) {
            let d = a.difference_set();
            prop_assert_eq!(d.neg(), d.clone());
            prop_assert!(d.contains(&Rational::from_int(0)));
        }
    }
}
