//! Set and measure specifications, and their normalized forms per group
//! family.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize, Serializer};
use serde_with::serde_as;

use crate::error::{Error, Result};
use crate::group::{rank_of, reduce_mod, unrank, GroupElement, GroupSpec, DEFAULT_ENUMERATION_CAP};
use crate::scalar::{rational_lcm, Exact, Scalar};
use crate::setrep::discrete::{lcm_period, ChainSet, DiscreteSet, FiniteSet, PeriodicSet};
use crate::setrep::intervals::{IntervalUnion, PeriodicPattern};
use crate::setrep::points::{PointConfig, Tail};

/// Largest multiplier allowed when lifting real periods to a common one.
pub const MAX_PERIOD_FACTOR: i64 = 1 << 16;

/// A nonnegative extended value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Mass<T> {
    Finite(T),
    Infinite,
}

impl<T: Scalar> Mass<T> {
    pub fn finite(&self) -> Option<&T> {
        match self {
            Mass::Finite(v) => Some(v),
            Mass::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Mass::Infinite)
    }

    pub fn add(self, other: Self) -> Self {
        match (self, other) {
            (Mass::Finite(a), Mass::Finite(b)) => Mass::Finite(a + b),
            _ => Mass::Infinite,
        }
    }
}

impl<T: Scalar> PartialOrd for Mass<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Mass<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        match (self, other) {
            (Mass::Finite(a), Mass::Finite(b)) => a.cmp(b),
            (Mass::Finite(_), Mass::Infinite) => Less,
            (Mass::Infinite, Mass::Finite(_)) => Greater,
            (Mass::Infinite, Mass::Infinite) => Equal,
        }
    }
}

impl<T: Scalar> std::fmt::Display for Mass<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mass::Finite(v) => write!(f, "{v}"),
            Mass::Infinite => f.write_str("infinite"),
        }
    }
}

impl<T: Scalar> Serialize for Mass<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Haar measure of a set: total mass, and for periodic sets the mass of
/// one period.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct HaarValue<T> {
    pub mass: Mass<T>,
    #[serde_as(as = "Option<Exact>")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_period: Option<T>,
}

/// Any of the supported set representations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Scalar")]
pub enum SetSpec<T> {
    ExplicitFinite(FiniteSet),
    PeriodicDiscrete(PeriodicSet),
    Intervals { intervals: IntervalUnion<T> },
    PeriodicPattern(PeriodicPattern<T>),
    Points(PointConfig<T>),
    Chain(ChainSet),
}

impl<T: Scalar> From<DiscreteSet> for SetSpec<T> {
    fn from(s: DiscreteSet) -> Self {
        match s {
            DiscreteSet::ExplicitFinite(f) => SetSpec::ExplicitFinite(f),
            DiscreteSet::PeriodicDiscrete(p) => SetSpec::PeriodicDiscrete(p),
        }
    }
}

impl<T: Scalar> SetSpec<T> {
    pub fn as_discrete(&self) -> Option<DiscreteSet> {
        match self {
            SetSpec::ExplicitFinite(f) => Some(f.clone().into()),
            SetSpec::PeriodicDiscrete(p) => Some(p.clone().into()),
            _ => None,
        }
    }

    /// Checks that the representation fits the group.
    pub fn check_in(&self, group: &GroupSpec) -> Result<()> {
        match (self, group) {
            (SetSpec::ExplicitFinite(_) | SetSpec::PeriodicDiscrete(_), GroupSpec::RealLine) => {
                Err(Error::Shape("integer set on the real line".into()))
            }
            (SetSpec::ExplicitFinite(_) | SetSpec::PeriodicDiscrete(_), _) => {
                self.as_discrete().expect("discrete").check_in(group)
            }
            (
                SetSpec::Intervals { .. } | SetSpec::PeriodicPattern(_) | SetSpec::Points(_),
                GroupSpec::RealLine,
            ) => Ok(()),
            (SetSpec::Chain(_), GroupSpec::SigmaFiniteChain { .. }) => Ok(()),
            _ => Err(Error::Shape(format!("set representation does not fit {group:?}"))),
        }
    }

    /// The set as a subset of the finite group (or of H_depth for a chain),
    /// in canonical form.
    pub fn to_finite_group(&self, group: &GroupSpec) -> Result<PeriodicSet> {
        self.check_in(group)?;
        match self {
            SetSpec::Chain(c) => {
                let f = c.materialize(group, DEFAULT_ENUMERATION_CAP)?;
                DiscreteSet::from(f).as_periodic_in(group)
            }
            _ => self
                .as_discrete()
                .ok_or_else(|| Error::Shape("not a discrete set".into()))?
                .as_periodic_in(group),
        }
    }

    pub fn haar(&self, group: &GroupSpec) -> Result<HaarValue<T>> {
        self.check_in(group)?;
        let finite = |v: T| HaarValue { mass: Mass::Finite(v), per_period: None };
        Ok(match self {
            SetSpec::Intervals { intervals } => finite(intervals.length()),
            SetSpec::PeriodicPattern(p) => {
                let m = p.mass_per_period();
                HaarValue {
                    mass: if m.is_zero() { Mass::Finite(m.clone()) } else { Mass::Infinite },
                    per_period: Some(m),
                }
            }
            SetSpec::Points(_) => finite(T::zero()),
            SetSpec::Chain(_) => {
                finite(T::from_int(self.to_finite_group(group)?.residues().len() as i64))
            }
            SetSpec::ExplicitFinite(_) | SetSpec::PeriodicDiscrete(_) => {
                let d = self.as_discrete().expect("discrete");
                match d.cardinality(group)? {
                    Some(n) => finite(T::from_int(n as i64)),
                    None => {
                        let per = match &d {
                            DiscreteSet::PeriodicDiscrete(p) => p.residues().len(),
                            DiscreteSet::ExplicitFinite(_) => unreachable!("finite"),
                        };
                        HaarValue {
                            mass: Mass::Infinite,
                            per_period: Some(T::from_int(per as i64)),
                        }
                    }
                }
            }
        })
    }
}

#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct Atom<T> {
    pub at: GroupElement<T>,
    #[serde_as(as = "Exact")]
    pub weight: T,
}

/// The measure ν under study.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Scalar")]
pub enum MeasureSpec<T> {
    /// One unit of mass at every point of a discrete set or point configuration.
    Counting { of: SetSpec<T> },
    /// Haar measure restricted to a set.
    HaarTrace { of: SetSpec<T> },
    DiracAtZero,
    WeightedDiracs { atoms: Vec<Atom<T>> },
    Sum { terms: Vec<MeasureSpec<T>> },
}

impl<T: Scalar> MeasureSpec<T> {
    pub fn counting(of: impl Into<SetSpec<T>>) -> Self {
        MeasureSpec::Counting { of: of.into() }
    }

    pub fn haar_trace(of: impl Into<SetSpec<T>>) -> Self {
        MeasureSpec::HaarTrace { of: of.into() }
    }

    /// True when some part is a counting measure of a configuration with
    /// accumulation points.
    pub fn has_accumulation(&self) -> bool {
        match self {
            MeasureSpec::Counting { of: SetSpec::Points(p) } => p.has_accumulation(),
            MeasureSpec::Sum { terms } => terms.iter().any(Self::has_accumulation),
            _ => false,
        }
    }

    pub fn check_in(&self, group: &GroupSpec) -> Result<()> {
        group.validate()?;
        match self {
            MeasureSpec::Counting { of } | MeasureSpec::HaarTrace { of } => {
                of.check_in(group)?;
                if matches!(self, MeasureSpec::Counting { .. })
                    && matches!(of, SetSpec::Intervals { .. } | SetSpec::PeriodicPattern(_))
                {
                    return Err(Error::precondition(
                        "counting measure of an interval set is not locally finite",
                    ));
                }
                Ok(())
            }
            MeasureSpec::DiracAtZero => Ok(()),
            MeasureSpec::WeightedDiracs { atoms } => {
                for a in atoms {
                    if !a.weight.is_positive() {
                        return Err(Error::precondition("atom weights must be positive"));
                    }
                    match (&a.at, group) {
                        (GroupElement::Real(_), GroupSpec::RealLine) => {}
                        (GroupElement::Int(v), g) if g.rank() == Some(v.len()) => {}
                        _ => return Err(Error::Shape(format!("atom at {} does not fit", a.at))),
                    }
                }
                Ok(())
            }
            MeasureSpec::Sum { terms } => terms.iter().try_for_each(|t| t.check_in(group)),
        }
    }

    /// The same measure shifted by `g` (ν(· − g)).
    pub fn translate(&self, g: &GroupElement<T>, group: &GroupSpec) -> Result<Self> {
        let shift_set = |s: &SetSpec<T>| -> Result<SetSpec<T>> {
            Ok(match (s, g) {
                (SetSpec::Intervals { intervals }, GroupElement::Real(x)) => {
                    SetSpec::Intervals { intervals: intervals.translate(x) }
                }
                (SetSpec::PeriodicPattern(p), GroupElement::Real(x)) => {
                    SetSpec::PeriodicPattern(p.translate(x))
                }
                (SetSpec::Points(p), GroupElement::Real(x)) => SetSpec::Points(p.translate(x)),
                (SetSpec::ExplicitFinite(f), GroupElement::Int(v)) => {
                    let moved = f
                        .elements()
                        .iter()
                        .map(|e| {
                            let mut s: Vec<i64> = e.iter().zip(v).map(|(a, b)| a + b).collect();
                            group.reduce(&mut s);
                            s
                        })
                        .collect();
                    SetSpec::ExplicitFinite(FiniteSet::new(moved)?)
                }
                (SetSpec::PeriodicDiscrete(p), GroupElement::Int(v)) => {
                    let moved = p
                        .residues()
                        .iter()
                        .map(|e| e.iter().zip(v).map(|(a, b)| a + b).collect())
                        .collect();
                    SetSpec::PeriodicDiscrete(PeriodicSet::new(p.period().to_vec(), moved)?)
                }
                _ => return Err(Error::Shape("cannot translate this set by that element".into())),
            })
        };
        Ok(match self {
            MeasureSpec::Counting { of } => MeasureSpec::Counting { of: shift_set(of)? },
            MeasureSpec::HaarTrace { of } => MeasureSpec::HaarTrace { of: shift_set(of)? },
            MeasureSpec::DiracAtZero => MeasureSpec::WeightedDiracs {
                atoms: vec![Atom { at: g.clone(), weight: T::one() }],
            },
            MeasureSpec::WeightedDiracs { atoms } => MeasureSpec::WeightedDiracs {
                atoms: atoms
                    .iter()
                    .map(|a| {
                        Ok(Atom {
                            at: match (&a.at, g) {
                                (GroupElement::Int(x), GroupElement::Int(y)) => {
                                    let mut s: Vec<i64> = x.iter().zip(y).map(|(p, q)| p + q).collect();
                                    group.reduce(&mut s);
                                    GroupElement::Int(s)
                                }
                                (GroupElement::Real(x), GroupElement::Real(y)) => {
                                    GroupElement::Real(x.clone() + y.clone())
                                }
                                _ => return Err(Error::Shape("atom shape mismatch".into())),
                            },
                            weight: a.weight.clone(),
                        })
                    })
                    .collect::<Result<_>>()?,
            },
            MeasureSpec::Sum { terms } => MeasureSpec::Sum {
                terms: terms.iter().map(|t| t.translate(g, group)).collect::<Result<_>>()?,
            },
        })
    }
}

/// A window to measure: an integer cube of given radius (ℤ^d), a finite
/// set of offsets (discrete groups), or an interval union (ℝ).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Window<T> {
    Cube(u64),
    Set(FiniteSet),
    Intervals(IntervalUnion<T>),
}

/// `ν(x + window)`, exact.
pub fn window_mass<T: Scalar>(
    nu: &MeasureSpec<T>,
    group: &GroupSpec,
    x: &GroupElement<T>,
    window: &Window<T>,
) -> Result<Mass<T>> {
    nu.check_in(group)?;
    match (group, x, window) {
        (GroupSpec::RealLine, GroupElement::Real(x), Window::Intervals(w)) => {
            let m = LineMeasure::from_spec(nu)?;
            Ok(m.window_mass(&w.translate(x)))
        }
        (GroupSpec::ZLattice { .. }, GroupElement::Int(x), Window::Cube(r)) => {
            let m = GridMeasure::from_spec(nu, group)?;
            Ok(Mass::Finite(m.cube_mass(x, *r as i64)))
        }
        (GroupSpec::ZLattice { .. }, GroupElement::Int(x), Window::Set(w)) => {
            let m = GridMeasure::from_spec(nu, group)?;
            let mut total = T::zero();
            for e in w.elements() {
                let p: Vec<i64> = e.iter().zip(x).map(|(a, b)| a + b).collect();
                total = total + m.point_mass(&p);
            }
            Ok(Mass::Finite(total))
        }
        (_, GroupElement::Int(x), Window::Set(w)) if group.moduli().is_some() => {
            let m = FiniteMeasure::from_spec(nu, group)?;
            let mut seen = std::collections::BTreeSet::new();
            let mut total = T::zero();
            for e in w.elements() {
                let mut p: Vec<i64> = e.iter().zip(x).map(|(a, b)| a + b).collect();
                group.reduce(&mut p);
                if seen.insert(p.clone()) {
                    total = total + m.weights[rank_of(&m.moduli, &p)].clone();
                }
            }
            Ok(Mass::Finite(total))
        }
        _ => Err(Error::Shape("window does not fit the group".into())),
    }
}

/// Normal form of a measure on ℝ: periodic and finitely supported parts,
/// each split into absolutely continuous (piecewise constant density) and
/// atomic pieces, plus accumulating tails.
#[derive(Clone, Debug, Default)]
pub struct LineMeasure<T> {
    pub period: Option<T>,
    /// `(a, b, w)`: density `w` on `[a, b] ⊂ [0, period]`, repeated.
    pub periodic_density: Vec<(T, T, T)>,
    /// `(residue, w)` with residue in `[0, period)`.
    pub periodic_atoms: Vec<(T, T)>,
    pub finite_density: Vec<(T, T, T)>,
    /// Sorted by position, positions distinct.
    pub finite_atoms: Vec<(T, T)>,
    pub tails: Vec<Tail<T>>,
    /// Prefix sums of `finite_atoms` weights.
    prefix: Vec<T>,
}

impl<T: Scalar> LineMeasure<T> {
    pub fn from_spec(nu: &MeasureSpec<T>) -> Result<Self> {
        let mut periodic: Vec<(T, Vec<(T, T, T)>, Vec<(T, T)>)> = Vec::new();
        let mut m = LineMeasure {
            period: None,
            periodic_density: Vec::new(),
            periodic_atoms: Vec::new(),
            finite_density: Vec::new(),
            finite_atoms: Vec::new(),
            tails: Vec::new(),
            prefix: Vec::new(),
        };
        m.collect(nu, &mut periodic)?;
        if let Some(first) = periodic.first() {
            let mut p = first.0.clone();
            for (q, _, _) in &periodic[1..] {
                p = rational_lcm(&p, q, MAX_PERIOD_FACTOR)
                    .ok_or_else(|| Error::Incommensurable(p.to_string(), q.to_string()))?;
            }
            for (q, dens, atoms) in periodic {
                let copies = (p.clone() / q.clone()).to_i64().expect("integral factor");
                for k in 0..copies {
                    let s = q.clone() * T::from_int(k);
                    for (a, b, w) in &dens {
                        m.periodic_density
                            .push((a.clone() + s.clone(), b.clone() + s.clone(), w.clone()));
                    }
                    for (r, w) in &atoms {
                        m.periodic_atoms.push((r.clone() + s.clone(), w.clone()));
                    }
                }
            }
            m.periodic_atoms = merge_atoms(std::mem::take(&mut m.periodic_atoms));
            m.period = Some(p);
        }
        m.finite_atoms = merge_atoms(std::mem::take(&mut m.finite_atoms));
        let mut acc = T::zero();
        m.prefix = std::iter::once(T::zero())
            .chain(m.finite_atoms.iter().map(|(_, w)| {
                acc = acc.clone() + w.clone();
                acc.clone()
            }))
            .collect();
        Ok(m)
    }

    #[allow(clippy::type_complexity)]
    fn collect(
        &mut self,
        nu: &MeasureSpec<T>,
        periodic: &mut Vec<(T, Vec<(T, T, T)>, Vec<(T, T)>)>,
    ) -> Result<()> {
        match nu {
            MeasureSpec::Counting { of: SetSpec::Points(p) } => {
                if let Some(l) = p.lattice() {
                    periodic.push((
                        l.period.clone(),
                        vec![],
                        l.residues.iter().map(|r| (r.clone(), T::one())).collect(),
                    ));
                }
                self.finite_atoms
                    .extend(p.points().iter().map(|x| (x.clone(), T::one())));
                self.tails.extend(p.tails().iter().cloned());
            }
            MeasureSpec::Counting { .. } => {
                return Err(Error::Shape("counting measure on ℝ needs a point configuration".into()))
            }
            MeasureSpec::HaarTrace { of } => match of {
                SetSpec::Intervals { intervals } => self.finite_density.extend(
                    intervals.pieces().iter().map(|(a, b)| (a.clone(), b.clone(), T::one())),
                ),
                SetSpec::PeriodicPattern(p) => periodic.push((
                    p.period().clone(),
                    p.pattern()
                        .pieces()
                        .iter()
                        .map(|(a, b)| (a.clone(), b.clone(), T::one()))
                        .collect(),
                    vec![],
                )),
                // Lebesgue measure of a countable set
                SetSpec::Points(_) => {}
                _ => return Err(Error::Shape("integer set on the real line".into())),
            },
            MeasureSpec::DiracAtZero => self.finite_atoms.push((T::zero(), T::one())),
            MeasureSpec::WeightedDiracs { atoms } => {
                for a in atoms {
                    let x = a
                        .at
                        .as_real()
                        .ok_or_else(|| Error::Shape("integer atom on the real line".into()))?;
                    self.finite_atoms.push((x.clone(), a.weight.clone()));
                }
            }
            MeasureSpec::Sum { terms } => {
                for t in terms {
                    self.collect(t, periodic)?;
                }
            }
        }
        Ok(())
    }

    pub fn is_periodic(&self) -> bool {
        self.finite_density.is_empty() && self.finite_atoms.is_empty() && self.tails.is_empty()
    }

    pub fn has_finite_part(&self) -> bool {
        !self.finite_density.is_empty() || !self.finite_atoms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.period.is_none() && !self.has_finite_part() && self.tails.is_empty()
    }

    /// Mass of one period of the periodic part.
    pub fn mass_per_period(&self) -> T {
        let d = self
            .periodic_density
            .iter()
            .fold(T::zero(), |acc, (a, b, w)| acc + (b.clone() - a.clone()) * w.clone());
        self.periodic_atoms.iter().fold(d, |acc, (_, w)| acc + w.clone())
    }

    /// Exact density of the periodic part.
    pub fn periodic_density_value(&self) -> T {
        match &self.period {
            Some(p) => self.mass_per_period() / p.clone(),
            None => T::zero(),
        }
    }

    /// Total mass of the finitely supported part.
    pub fn finite_mass(&self) -> T {
        let d = self
            .finite_density
            .iter()
            .fold(T::zero(), |acc, (a, b, w)| acc + (b.clone() - a.clone()) * w.clone());
        d + self.prefix.last().cloned().unwrap_or_else(T::zero)
    }

    /// Hull of the finitely supported part.
    pub fn finite_hull(&self) -> Option<(T, T)> {
        let lo = self
            .finite_density
            .iter()
            .map(|(a, _, _)| a)
            .chain(self.finite_atoms.first().map(|(x, _)| x))
            .min()?
            .clone();
        let hi = self
            .finite_density
            .iter()
            .map(|(_, b, _)| b)
            .chain(self.finite_atoms.last().map(|(x, _)| x))
            .max()?
            .clone();
        Some((lo, hi))
    }

    /// Breakpoints of the periodic part, in `[0, period)`.
    pub fn periodic_breakpoints(&self) -> Vec<T> {
        let Some(p) = &self.period else { return Vec::new() };
        let mut out: Vec<T> = self
            .periodic_density
            .iter()
            .flat_map(|(a, b, _)| [reduce_mod(a, p), reduce_mod(b, p)])
            .chain(self.periodic_atoms.iter().map(|(r, _)| r.clone()))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn finite_breakpoints(&self) -> Vec<T> {
        let mut out: Vec<T> = self
            .finite_density
            .iter()
            .flat_map(|(a, b, _)| [a.clone(), b.clone()])
            .chain(self.finite_atoms.iter().map(|(x, _)| x.clone()))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Mass of the periodic part in `[u, v]`.
    pub fn periodic_mass(&self, u: &T, v: &T) -> T {
        let Some(p) = &self.period else { return T::zero() };
        if v < u {
            return T::zero();
        }
        let cum = |t: &T, a: &T, b: &T| -> T {
            // measure of [a,b]+pℤ within [0,t] (signed in t)
            let k = (t.clone() / p.clone()).floor();
            let rest = t.clone() - k.clone() * p.clone();
            let inside = if &rest <= a {
                T::zero()
            } else if &rest >= b {
                b.clone() - a.clone()
            } else {
                rest - a.clone()
            };
            k * (b.clone() - a.clone()) + inside
        };
        let mut total = T::zero();
        for (a, b, w) in &self.periodic_density {
            total = total + (cum(v, a, b) - cum(u, a, b)) * w.clone();
        }
        for (r, w) in &self.periodic_atoms {
            let hi = ((v.clone() - r.clone()) / p.clone()).floor();
            let lo = ((u.clone() - r.clone()) / p.clone()).ceil();
            let n = hi - lo + T::one();
            if n.is_positive() {
                total = total + n * w.clone();
            }
        }
        total
    }

    /// Mass of the finitely supported part in `[u, v]`.
    pub fn finite_part_mass(&self, u: &T, v: &T) -> T {
        if v < u {
            return T::zero();
        }
        let mut total = T::zero();
        for (a, b, w) in &self.finite_density {
            let lo = if a > u { a } else { u };
            let hi = if b < v { b } else { v };
            if hi > lo {
                total = total + (hi.clone() - lo.clone()) * w.clone();
            }
        }
        let i = self.finite_atoms.partition_point(|(x, _)| x < u);
        let j = self.finite_atoms.partition_point(|(x, _)| x <= v);
        if j > i {
            total = total + self.prefix[j].clone() - self.prefix[i].clone();
        }
        total
    }

    /// Mass of the closed interval `[u, v]`.
    pub fn mass(&self, u: &T, v: &T) -> Mass<T> {
        let mut total = Mass::Finite(self.periodic_mass(u, v) + self.finite_part_mass(u, v));
        for t in &self.tails {
            total = total.add(t.count_in(u, v));
        }
        total
    }

    /// Mass of a union of disjoint closed intervals.
    pub fn window_mass(&self, w: &IntervalUnion<T>) -> Mass<T> {
        w.pieces()
            .iter()
            .fold(Mass::Finite(T::zero()), |acc, (a, b)| acc.add(self.mass(a, b)))
    }
}

fn merge_atoms<T: Scalar>(mut atoms: Vec<(T, T)>) -> Vec<(T, T)> {
    atoms.sort();
    let mut out: Vec<(T, T)> = Vec::with_capacity(atoms.len());
    for (x, w) in atoms {
        match out.last_mut() {
            Some((y, v)) if *y == x => *v = v.clone() + w,
            _ => out.push((x, w)),
        }
    }
    out
}

/// Normal form of a measure on ℤ^d: a periodic weight table over a box and
/// finitely many weighted points.
#[derive(Clone, Debug)]
pub struct GridMeasure<T> {
    pub dimension: usize,
    /// Period box and weights indexed by canonical rank within it.
    pub periodic: Option<(Vec<i64>, Vec<T>)>,
    pub finite: BTreeMap<Vec<i64>, T>,
}

impl<T: Scalar> GridMeasure<T> {
    pub fn from_spec(nu: &MeasureSpec<T>, group: &GroupSpec) -> Result<Self> {
        let GroupSpec::ZLattice { dimension } = group else {
            return Err(Error::Shape("grid measures live on ℤ^d".into()));
        };
        let mut m = GridMeasure { dimension: *dimension, periodic: None, finite: BTreeMap::new() };
        m.collect(nu)?;
        Ok(m)
    }

    fn add_periodic(&mut self, period: &[i64], residues: &[(Vec<i64>, T)]) -> Result<()> {
        let target = match &self.periodic {
            Some((p, _)) => lcm_period(p, period)?,
            None => period.to_vec(),
        };
        let moduli: Vec<u64> = target.iter().map(|&m| m as u64).collect();
        let cells: usize = moduli.iter().product::<u64>() as usize;
        let mut weights = vec![T::zero(); cells];
        if let Some((p, old)) = self.periodic.take() {
            let pm: Vec<u64> = p.iter().map(|&m| m as u64).collect();
            for (i, w) in weights.iter_mut().enumerate() {
                let c = unrank(&moduli, i);
                *w = old[rank_of(&pm, &c)].clone();
            }
        }
        let pm: Vec<u64> = period.iter().map(|&m| m as u64).collect();
        let lookup: BTreeMap<usize, T> = residues
            .iter()
            .map(|(r, w)| (rank_of(&pm, r), w.clone()))
            .collect();
        for (i, w) in weights.iter_mut().enumerate() {
            let c = unrank(&moduli, i);
            if let Some(v) = lookup.get(&rank_of(&pm, &c)) {
                *w = w.clone() + v.clone();
            }
        }
        self.periodic = Some((target, weights));
        Ok(())
    }

    fn collect(&mut self, nu: &MeasureSpec<T>) -> Result<()> {
        match nu {
            MeasureSpec::Counting { of } | MeasureSpec::HaarTrace { of } => match of {
                SetSpec::PeriodicDiscrete(p) => {
                    let res: Vec<(Vec<i64>, T)> =
                        p.residues().iter().map(|r| (r.clone(), T::one())).collect();
                    self.add_periodic(p.period(), &res)?;
                }
                SetSpec::ExplicitFinite(f) => {
                    for e in f.elements() {
                        let w = self.finite.entry(e.clone()).or_insert_with(T::zero);
                        *w = w.clone() + T::one();
                    }
                }
                _ => return Err(Error::Shape("set does not live in ℤ^d".into())),
            },
            MeasureSpec::DiracAtZero => {
                let w = self.finite.entry(vec![0; self.dimension]).or_insert_with(T::zero);
                *w = w.clone() + T::one();
            }
            MeasureSpec::WeightedDiracs { atoms } => {
                for a in atoms {
                    let at = a
                        .at
                        .as_int()
                        .ok_or_else(|| Error::Shape("real atom in ℤ^d".into()))?
                        .to_vec();
                    let w = self.finite.entry(at).or_insert_with(T::zero);
                    *w = w.clone() + a.weight.clone();
                }
            }
            MeasureSpec::Sum { terms } => {
                for t in terms {
                    self.collect(t)?;
                }
            }
        }
        self.finite.retain(|_, w| !w.is_zero());
        Ok(())
    }

    pub fn point_mass(&self, x: &[i64]) -> T {
        let mut w = self.finite.get(x).cloned().unwrap_or_else(T::zero);
        if let Some((p, weights)) = &self.periodic {
            let moduli: Vec<u64> = p.iter().map(|&m| m as u64).collect();
            w = w + weights[rank_of(&moduli, x)].clone();
        }
        w
    }

    /// Mass of the cube `x + [-r, r]^d`.
    pub fn cube_mass(&self, x: &[i64], r: i64) -> T {
        let mut total = T::zero();
        for (p, w) in &self.finite {
            if p.iter().zip(x).all(|(a, c)| (a - c).abs() <= r) {
                total = total + w.clone();
            }
        }
        if let Some((period, weights)) = &self.periodic {
            let moduli: Vec<u64> = period.iter().map(|&m| m as u64).collect();
            for (i, w) in weights.iter().enumerate() {
                if w.is_zero() {
                    continue;
                }
                let res = unrank(&moduli, i);
                let mut n: i64 = 1;
                for ((ri, m), c) in res.iter().zip(period).zip(x) {
                    n *= count_residue(*ri, *m, c - r, c + r);
                    if n == 0 {
                        break;
                    }
                }
                if n > 0 {
                    total = total + w.clone() * T::from_int(n);
                }
            }
        }
        total
    }

    pub fn mass_per_period(&self) -> T {
        match &self.periodic {
            Some((_, w)) => w.iter().fold(T::zero(), |a, b| a + b.clone()),
            None => T::zero(),
        }
    }
}

/// Integers `≡ r (mod m)` in `[a, b]`.
pub(crate) fn count_residue(r: i64, m: i64, a: i64, b: i64) -> i64 {
    if b < a {
        return 0;
    }
    let hi = (b - r).div_euclid(m);
    let lo = (a - r + m - 1).div_euclid(m);
    (hi - lo + 1).max(0)
}

/// A measure on a finite group (or on H_depth of a chain) as a weight per
/// element, indexed by canonical rank.
#[derive(Clone, Debug)]
pub struct FiniteMeasure<T> {
    pub moduli: Vec<u64>,
    pub weights: Vec<T>,
}

impl<T: Scalar> FiniteMeasure<T> {
    pub fn from_spec(nu: &MeasureSpec<T>, group: &GroupSpec) -> Result<Self> {
        let moduli = group
            .moduli()
            .ok_or_else(|| Error::Shape(format!("{group:?} is not finite")))?;
        let order = group.order().unwrap_or(u128::MAX);
        if order > DEFAULT_ENUMERATION_CAP {
            return Err(Error::CapExceeded { size: order, cap: DEFAULT_ENUMERATION_CAP });
        }
        let mut m = FiniteMeasure { moduli, weights: vec![T::zero(); order as usize] };
        m.collect(nu, group)?;
        Ok(m)
    }

    pub fn from_set(set: &PeriodicSet) -> Self {
        let moduli: Vec<u64> = set.period().iter().map(|&m| m as u64).collect();
        let weights = set
            .indicator()
            .into_iter()
            .map(|b| if b { T::one() } else { T::zero() })
            .collect();
        FiniteMeasure { moduli, weights }
    }

    fn collect(&mut self, nu: &MeasureSpec<T>, group: &GroupSpec) -> Result<()> {
        match nu {
            MeasureSpec::Counting { of } | MeasureSpec::HaarTrace { of } => {
                let set = of.to_finite_group(group)?;
                for r in set.residues() {
                    let i = rank_of(&self.moduli, r);
                    self.weights[i] = self.weights[i].clone() + T::one();
                }
            }
            MeasureSpec::DiracAtZero => self.weights[0] = self.weights[0].clone() + T::one(),
            MeasureSpec::WeightedDiracs { atoms } => {
                for a in atoms {
                    let at = a
                        .at
                        .as_int()
                        .ok_or_else(|| Error::Shape("real atom in a finite group".into()))?;
                    let i = rank_of(&self.moduli, at);
                    self.weights[i] = self.weights[i].clone() + a.weight.clone();
                }
            }
            MeasureSpec::Sum { terms } => {
                for t in terms {
                    self.collect(t, group)?;
                }
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.weights.len()
    }

    pub fn total(&self) -> T {
        self.weights.iter().fold(T::zero(), |a, b| a + b.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn real(x: Rational) -> GroupElement<Rational> {
        GroupElement::Real(x)
    }

    #[test]
    fn spec_window_examples() {
        let z = GroupSpec::ZLattice { dimension: 1 };
        let two_z = MeasureSpec::<Rational>::counting(DiscreteSet::from(
            PeriodicSet::arithmetic(2, [0]).unwrap(),
        ));
        assert_eq!(
            window_mass(&two_z, &z, &GroupElement::int([0]), &Window::Cube(5)).unwrap(),
            Mass::Finite(q(5, 1))
        );
        let half = MeasureSpec::HaarTrace {
            of: SetSpec::PeriodicPattern(
                PeriodicPattern::new(q(1, 1), IntervalUnion::interval(q(0, 1), q(1, 2)).unwrap())
                    .unwrap(),
            ),
        };
        let w = Window::Intervals(IntervalUnion::interval(q(-1, 1), q(1, 1)).unwrap());
        assert_eq!(
            window_mass(&half, &GroupSpec::RealLine, &real(q(1, 4)), &w).unwrap(),
            Mass::Finite(q(1, 1))
        );
        let tail = MeasureSpec::Counting {
            of: SetSpec::Points(PointConfig::reciprocal_tail(q(0, 1), q(1, 1), 1)),
        };
        let eps = Window::Intervals(IntervalUnion::interval(q(-1, 100), q(1, 100)).unwrap());
        assert_eq!(
            window_mass(&tail, &GroupSpec::RealLine, &real(q(0, 1)), &eps).unwrap(),
            Mass::Infinite
        );
    }

    #[test]
    fn haar_examples() {
        let g = GroupSpec::FiniteAbelian { moduli: vec![7] };
        let s: SetSpec<Rational> = SetSpec::ExplicitFinite(FiniteSet::from_ints([0, 1, 3]));
        assert_eq!(s.haar(&g).unwrap().mass, Mass::Finite(q(3, 1)));
        let iv: SetSpec<Rational> = SetSpec::Intervals {
            intervals: IntervalUnion::new(vec![(q(0, 1), q(1, 1)), (q(2, 1), q(5, 2))]).unwrap(),
        };
        assert_eq!(iv.haar(&GroupSpec::RealLine).unwrap().mass, Mass::Finite(q(3, 2)));
        let pat: SetSpec<Rational> = SetSpec::PeriodicPattern(
            PeriodicPattern::new(q(1, 1), IntervalUnion::interval(q(0, 1), q(1, 3)).unwrap())
                .unwrap(),
        );
        let h = pat.haar(&GroupSpec::RealLine).unwrap();
        assert_eq!(h.mass, Mass::Infinite);
        assert_eq!(h.per_period, Some(q(1, 3)));
    }

    #[test]
    fn line_measure_matches_direct_counts() {
        let nu = MeasureSpec::Sum {
            terms: vec![
                MeasureSpec::Counting {
                    of: SetSpec::Points(PointConfig::periodic(q(1, 2), vec![q(0, 1)]).unwrap()),
                },
                MeasureSpec::Counting {
                    of: SetSpec::Points(PointConfig::periodic(q(1, 3), vec![q(0, 1)]).unwrap()),
                },
                MeasureSpec::DiracAtZero,
            ],
        };
        let m = LineMeasure::from_spec(&nu).unwrap();
        assert_eq!(m.period, Some(q(1, 1)));
        // oracle: enumerate multiples of 1/6 in [-1, 1]
        let mut expect = 1;
        for k in -6..=6 {
            if k % 3 == 0 {
                expect += 1;
            }
            if k % 2 == 0 {
                expect += 1;
            }
        }
        assert_eq!(m.mass(&q(-1, 1), &q(1, 1)), Mass::Finite(q(expect, 1)));
    }

    #[test]
    fn translation_covariance_on_the_line() {
        let pat = PeriodicPattern::new(
            q(3, 2),
            IntervalUnion::new(vec![(q(0, 1), q(1, 4)), (q(1, 2), q(2, 3))]).unwrap(),
        )
        .unwrap();
        let nu = MeasureSpec::Sum {
            terms: vec![
                MeasureSpec::haar_trace(SetSpec::PeriodicPattern(pat)),
                MeasureSpec::WeightedDiracs {
                    atoms: vec![Atom { at: real(q(1, 5)), weight: q(2, 1) }],
                },
            ],
        };
        let g = real(q(7, 3));
        let shifted = nu.translate(&g, &GroupSpec::RealLine).unwrap();
        let w = Window::Intervals(IntervalUnion::interval(q(-2, 1), q(1, 1)).unwrap());
        for x in [q(0, 1), q(1, 7), q(-5, 3)] {
            let a = window_mass(&nu, &GroupSpec::RealLine, &real(x.clone()), &w).unwrap();
            let b = window_mass(&shifted, &GroupSpec::RealLine, &real(x + q(7, 3)), &w).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn grid_cube_mass_matches_enumeration() {
        let g = GroupSpec::ZLattice { dimension: 2 };
        let set = PeriodicSet::new(vec![2, 3], vec![vec![0, 0], vec![1, 2]]).unwrap();
        let nu = MeasureSpec::<Rational>::counting(DiscreteSet::from(set.clone()));
        let m = GridMeasure::from_spec(&nu, &g).unwrap();
        let x = [1, -2];
        let mut n = 0;
        for a in -1..=3 {
            for b in -4..=0 {
                if set.contains(&[a, b]) {
                    n += 1;
                }
            }
        }
        assert_eq!(m.cube_mass(&x, 2), q(n, 1));
    }

    #[test]
    fn serde_instances_round_trip() {
        let json = r#"{"kind":"sum","terms":[
            {"kind":"counting","of":{"kind":"periodic_discrete","period":6,"residues":[0,2]}},
            {"kind":"dirac_at_zero"},
            {"kind":"haar_trace","of":{"kind":"intervals","intervals":[["0","1/2"]]}},
            {"kind":"weighted_diracs","atoms":[{"at":"1/3","weight":"2"}]}
        ]}"#;
        let m: MeasureSpec<Rational> = serde_json::from_str(json).unwrap();
        let out = serde_json::to_string(&m).unwrap();
        let back: MeasureSpec<Rational> = serde_json::from_str(&out).unwrap();
        assert_eq!(back, m);
        assert_eq!(serde_json::to_string(&back).unwrap(), out);
        let bad = r#"{"kind":"counting","of":{"kind":"explicit_finite","elements":[1],"extra":1}}"#;
        assert!(serde_json::from_str::<MeasureSpec<Rational>>(bad).is_err());
    }
}
