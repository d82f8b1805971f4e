//! Subsets of ℤ^d, of finite abelian groups, and of σ-finite chains.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{rank_of, unrank, GroupSpec};

/// Bound on the number of cells of a common fundamental domain produced by
/// lifting two periodic sets to the lcm of their periods.
pub const MAX_PERIOD_CELLS: u128 = 1 << 22;

/// A finite set of integer points, sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawFinite", into = "RawFinite")]
pub struct FiniteSet {
    elements: Vec<Vec<i64>>,
}

/// Integer tuple on input; a bare integer is accepted for one-dimensional
/// groups.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Coords {
    One(i64),
    Many(Vec<i64>),
}

impl From<Coords> for Vec<i64> {
    fn from(c: Coords) -> Self {
        match c {
            Coords::One(x) => vec![x],
            Coords::Many(v) => v,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFinite {
    elements: Vec<Coords>,
}

impl TryFrom<RawFinite> for FiniteSet {
    type Error = Error;
    fn try_from(raw: RawFinite) -> Result<Self> {
        FiniteSet::new(raw.elements.into_iter().map(Vec::from).collect())
    }
}

impl From<FiniteSet> for RawFinite {
    fn from(s: FiniteSet) -> Self {
        RawFinite { elements: s.elements.into_iter().map(Coords::Many).collect() }
    }
}

impl FiniteSet {
    pub fn new(mut elements: Vec<Vec<i64>>) -> Result<Self> {
        if let Some(first) = elements.first() {
            let d = first.len();
            if elements.iter().any(|e| e.len() != d) {
                return Err(Error::Shape("elements have different dimensions".into()));
            }
        }
        elements.sort();
        elements.dedup();
        Ok(FiniteSet { elements })
    }

    /// One-dimensional convenience constructor.
    pub fn from_ints(xs: impl IntoIterator<Item = i64>) -> Self {
        FiniteSet::new(xs.into_iter().map(|x| vec![x]).collect()).expect("uniform dimension")
    }

    pub fn elements(&self) -> &[Vec<i64>] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        self.elements.binary_search_by(|e| e.as_slice().cmp(x)).is_ok()
    }
}

/// A periodic set: residues in the box [0,m_1)×…×[0,m_d), repeated along
/// the diagonal lattice m_1ℤ×…×m_dℤ.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawPeriodic", into = "RawPeriodic")]
pub struct PeriodicSet {
    period: Vec<i64>,
    residues: Vec<Vec<i64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPeriodic {
    period: Coords,
    residues: Vec<Coords>,
}

impl TryFrom<RawPeriodic> for PeriodicSet {
    type Error = Error;
    fn try_from(raw: RawPeriodic) -> Result<Self> {
        PeriodicSet::new(raw.period.into(), raw.residues.into_iter().map(Vec::from).collect())
    }
}

impl From<PeriodicSet> for RawPeriodic {
    fn from(s: PeriodicSet) -> Self {
        RawPeriodic {
            period: Coords::Many(s.period),
            residues: s.residues.into_iter().map(Coords::Many).collect(),
        }
    }
}

impl PeriodicSet {
    pub fn new(period: Vec<i64>, residues: Vec<Vec<i64>>) -> Result<Self> {
        if period.is_empty() || period.iter().any(|&m| m <= 0) {
            return Err(Error::NonPositivePeriod);
        }
        let mut reduced = Vec::with_capacity(residues.len());
        for r in residues {
            if r.len() != period.len() {
                return Err(Error::Shape("residue dimension differs from period".into()));
            }
            reduced.push(r.iter().zip(&period).map(|(x, m)| x.rem_euclid(*m)).collect());
        }
        reduced.sort();
        reduced.dedup();
        Ok(PeriodicSet { period, residues: reduced })
    }

    /// `residues + period·ℤ` in one dimension.
    pub fn arithmetic(period: i64, residues: impl IntoIterator<Item = i64>) -> Result<Self> {
        PeriodicSet::new(vec![period], residues.into_iter().map(|r| vec![r]).collect())
    }

    pub fn period(&self) -> &[i64] {
        &self.period
    }

    pub fn residues(&self) -> &[Vec<i64>] {
        &self.residues
    }

    pub fn cells(&self) -> u128 {
        self.period.iter().map(|&m| m as u128).product()
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        let r: Vec<i64> = x.iter().zip(&self.period).map(|(a, m)| a.rem_euclid(*m)).collect();
        self.residues.binary_search(&r).is_ok()
    }

    /// Same set over the (componentwise multiple) period `new_period`.
    pub fn lift(&self, new_period: &[i64]) -> Result<Self> {
        if new_period.len() != self.period.len()
            || new_period.iter().zip(&self.period).any(|(n, m)| n % m != 0)
        {
            return Err(Error::Shape("new period is not a multiple".into()));
        }
        let factors: Vec<u64> = new_period
            .iter()
            .zip(&self.period)
            .map(|(n, m)| (n / m) as u64)
            .collect();
        let copies: u128 = factors.iter().map(|&f| f as u128).product();
        let mut residues = Vec::with_capacity(self.residues.len() * copies as usize);
        for k in 0..copies as usize {
            let shift = unrank(&factors, k);
            for r in &self.residues {
                residues.push(
                    r.iter()
                        .zip(&shift)
                        .zip(&self.period)
                        .map(|((x, s), m)| x + s * m)
                        .collect(),
                );
            }
        }
        PeriodicSet::new(new_period.to_vec(), residues)
    }

    /// Residue bitmap over the fundamental domain, indexed by canonical rank.
    pub fn indicator(&self) -> Vec<bool> {
        let moduli: Vec<u64> = self.period.iter().map(|&m| m as u64).collect();
        let mut bits = vec![false; self.cells() as usize];
        for r in &self.residues {
            bits[rank_of(&moduli, r)] = true;
        }
        bits
    }
}

pub(crate) fn lcm_period(a: &[i64], b: &[i64]) -> Result<Vec<i64>> {
    if a.len() != b.len() {
        return Err(Error::Shape("periods of different dimension".into()));
    }
    let l: Vec<i64> = a.iter().zip(b).map(|(x, y)| x.lcm(y)).collect();
    let cells: u128 = l.iter().map(|&m| m as u128).product();
    if cells > MAX_PERIOD_CELLS {
        return Err(Error::Incommensurable(format!("{a:?}"), format!("{b:?}")));
    }
    Ok(l)
}

/// A subset of a discrete group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiscreteSet {
    ExplicitFinite(FiniteSet),
    PeriodicDiscrete(PeriodicSet),
}

impl From<FiniteSet> for DiscreteSet {
    fn from(s: FiniteSet) -> Self {
        DiscreteSet::ExplicitFinite(s)
    }
}

impl From<PeriodicSet> for DiscreteSet {
    fn from(s: PeriodicSet) -> Self {
        DiscreteSet::PeriodicDiscrete(s)
    }
}

impl DiscreteSet {
    pub fn dimension(&self) -> Option<usize> {
        match self {
            DiscreteSet::ExplicitFinite(s) => s.elements.first().map(Vec::len),
            DiscreteSet::PeriodicDiscrete(p) => Some(p.period.len()),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            DiscreteSet::ExplicitFinite(s) => s.is_empty(),
            DiscreteSet::PeriodicDiscrete(p) => p.residues.is_empty(),
        }
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        match self {
            DiscreteSet::ExplicitFinite(s) => s.contains(x),
            DiscreteSet::PeriodicDiscrete(p) => p.contains(x),
        }
    }

    /// Checks the set against the group's shape.
    pub fn check_in(&self, group: &GroupSpec) -> Result<()> {
        let rank = group
            .rank()
            .ok_or_else(|| Error::Shape("discrete set on the real line".into()))?;
        if let Some(d) = self.dimension() {
            if d != rank {
                return Err(Error::Shape(format!("set of dimension {d} in a group of rank {rank}")));
            }
        }
        Ok(())
    }

    /// In a finite group (or H_depth of a chain) every subset is a
    /// periodic set whose period is the moduli vector; this returns that form.
    pub fn as_periodic_in(&self, group: &GroupSpec) -> Result<PeriodicSet> {
        self.check_in(group)?;
        match (self, group.moduli()) {
            (DiscreteSet::PeriodicDiscrete(p), None) => Ok(p.clone()),
            (DiscreteSet::ExplicitFinite(_), None) => {
                Err(Error::precondition("explicit finite set in ℤ^d is not periodic"))
            }
            (_, Some(moduli)) => {
                let period: Vec<i64> = moduli.iter().map(|&m| m as i64).collect();
                if period.is_empty() {
                    // trivial group
                    let residues = if self.is_empty() { vec![] } else { vec![vec![]] };
                    return Ok(PeriodicSet { period, residues });
                }
                match self {
                    DiscreteSet::ExplicitFinite(s) => PeriodicSet::new(period, s.elements.clone()),
                    DiscreteSet::PeriodicDiscrete(p) => {
                        if p.period.iter().zip(&period).any(|(a, m)| m % a != 0) {
                            return Err(Error::Shape("period does not divide the group moduli".into()));
                        }
                        p.lift(&period)
                    }
                }
            }
        }
    }

    /// Exact Minkowski sum in `group`.
    pub fn minkowski_sum(&self, other: &Self, group: &GroupSpec) -> Result<Self> {
        self.check_in(group)?;
        other.check_in(group)?;
        if group.moduli().is_some() {
            let a = self.as_periodic_in(group)?;
            let b = other.as_periodic_in(group)?;
            return Ok(periodic_sum(&a, &b)?.into());
        }
        Ok(match (self, other) {
            (DiscreteSet::ExplicitFinite(a), DiscreteSet::ExplicitFinite(b)) => {
                let mut out = Vec::with_capacity(a.len() * b.len());
                for x in &a.elements {
                    for y in &b.elements {
                        out.push(x.iter().zip(y).map(|(u, v)| u + v).collect());
                    }
                }
                FiniteSet::new(out)?.into()
            }
            (DiscreteSet::PeriodicDiscrete(a), DiscreteSet::PeriodicDiscrete(b)) => {
                periodic_sum(a, b)?.into()
            }
            (DiscreteSet::PeriodicDiscrete(p), DiscreteSet::ExplicitFinite(f))
            | (DiscreteSet::ExplicitFinite(f), DiscreteSet::PeriodicDiscrete(p)) => {
                let mut out = Vec::new();
                for r in &p.residues {
                    for x in &f.elements {
                        out.push(r.iter().zip(x).map(|(u, v)| u + v).collect());
                    }
                }
                PeriodicSet::new(p.period.clone(), out)?.into()
            }
        })
    }

    pub fn neg(&self, group: &GroupSpec) -> Self {
        let flip = |e: &Vec<i64>| {
            let mut v: Vec<i64> = e.iter().map(|x| -x).collect();
            group.reduce(&mut v);
            v
        };
        match self {
            DiscreteSet::ExplicitFinite(s) => {
                FiniteSet::new(s.elements.iter().map(flip).collect()).expect("same dimension").into()
            }
            DiscreteSet::PeriodicDiscrete(p) => {
                PeriodicSet::new(p.period.clone(), p.residues.iter().map(|e| e.iter().map(|x| -x).collect()).collect())
                    .expect("valid period")
                    .into()
            }
        }
    }

    /// `S - S`. The second component is `true` when `S` was empty (and so
    /// the result is empty and does not contain 0).
    pub fn difference_set(&self, group: &GroupSpec) -> Result<(Self, bool)> {
        let empty = self.is_empty();
        Ok((self.minkowski_sum(&self.neg(group), group)?, empty))
    }

    /// Cardinality for finite sets; `None` for infinite periodic sets.
    pub fn cardinality(&self, group: &GroupSpec) -> Result<Option<u128>> {
        if group.moduli().is_some() {
            return Ok(Some(self.as_periodic_in(group)?.residues.len() as u128));
        }
        Ok(match self {
            DiscreteSet::ExplicitFinite(s) => Some(s.len() as u128),
            DiscreteSet::PeriodicDiscrete(p) if p.residues.is_empty() => Some(0),
            DiscreteSet::PeriodicDiscrete(_) => None,
        })
    }
}

fn periodic_sum(a: &PeriodicSet, b: &PeriodicSet) -> Result<PeriodicSet> {
    if a.period.is_empty() {
        return Ok(PeriodicSet {
            period: vec![],
            residues: if a.residues.is_empty() || b.residues.is_empty() { vec![] } else { vec![vec![]] },
        });
    }
    let l = lcm_period(&a.period, &b.period)?;
    let a = a.lift(&l)?;
    let b = b.lift(&l)?;
    let mut seen = BTreeSet::new();
    for x in &a.residues {
        for y in &b.residues {
            let s: Vec<i64> = x.iter().zip(y).zip(&l).map(|((u, v), m)| (u + v).rem_euclid(*m)).collect();
            seen.insert(s);
        }
    }
    Ok(PeriodicSet { period: l, residues: seen.into_iter().collect() })
}

/// A subset of a σ-finite chain ⊕ℤ_{m_i} described by a membership rule
/// that is decidable coordinate by coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChainSet {
    /// Elements whose coordinate `i` lies in `allowed[i]` for every listed `i`.
    Cylinder { allowed: BTreeMap<usize, Vec<i64>> },
    /// An explicit finite set; missing trailing coordinates are zero.
    Finite { elements: Vec<Vec<i64>> },
    /// The finite subgroup H_level (coordinates past `level` vanish).
    Subgroup { level: usize },
    Whole,
}

impl ChainSet {
    pub fn contains(&self, x: &[i64]) -> bool {
        match self {
            ChainSet::Cylinder { allowed } => allowed
                .iter()
                .all(|(&i, vals)| vals.contains(x.get(i).unwrap_or(&0))),
            ChainSet::Finite { elements } => elements.iter().any(|e| {
                let n = e.len().max(x.len());
                (0..n).all(|i| e.get(i).unwrap_or(&0) == x.get(i).unwrap_or(&0))
            }),
            ChainSet::Subgroup { level } => x.iter().skip(*level).all(|&c| c == 0),
            ChainSet::Whole => true,
        }
    }

    /// Materializes `A ∩ H_n` as an explicit subset of H_n.
    pub fn materialize(&self, group: &GroupSpec, cap: u128) -> Result<FiniteSet> {
        let elems = group.enumerate(cap)?;
        FiniteSet::new(elems.into_iter().filter(|e| self.contains(e)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> GroupSpec {
        GroupSpec::ZLattice { dimension: 1 }
    }

    #[test]
    fn periodic_sums_enumerate_residue_pairs() {
        let a: DiscreteSet = PeriodicSet::arithmetic(6, [0, 1]).unwrap().into();
        let b: DiscreteSet = PeriodicSet::arithmetic(6, [0, 3]).unwrap().into();
        let s = a.minkowski_sum(&b, &z()).unwrap();
        // oracle: all residue pairs
        let mut expect = BTreeSet::new();
        for x in [0, 1] {
            for y in [0, 3] {
                expect.insert((x + y) % 6);
            }
        }
        let expect = PeriodicSet::arithmetic(6, expect).unwrap().into();
        assert_eq!(s, expect);
        assert_eq!(s, PeriodicSet::arithmetic(6, [0, 1, 3, 4]).unwrap().into());
    }

    #[test]
    fn sums_with_different_periods_use_lcm() {
        let a: DiscreteSet = PeriodicSet::arithmetic(2, [0]).unwrap().into();
        let b: DiscreteSet = PeriodicSet::arithmetic(3, [0]).unwrap().into();
        let s = a.minkowski_sum(&b, &z()).unwrap();
        assert_eq!(s, PeriodicSet::arithmetic(6, 0..6).unwrap().into());
    }

    #[test]
    fn difference_sets() {
        let three: DiscreteSet = PeriodicSet::arithmetic(3, [0]).unwrap().into();
        assert_eq!(three.difference_set(&z()).unwrap().0, three);
        let g = GroupSpec::FiniteAbelian { moduli: vec![7] };
        let s: DiscreteSet = FiniteSet::from_ints([0, 1, 3]).into();
        let (d, empty) = s.difference_set(&g).unwrap();
        assert!(!empty);
        // oracle: all nine pairwise differences mod 7
        let mut expect = BTreeSet::new();
        for a in [0i64, 1, 3] {
            for b in [0i64, 1, 3] {
                expect.insert((a - b).rem_euclid(7));
            }
        }
        assert_eq!(expect.len(), 7);
        assert_eq!(d.cardinality(&g).unwrap(), Some(7));
        let empty_set: DiscreteSet = FiniteSet::new(vec![]).unwrap().into();
        let (d, flag) = empty_set.difference_set(&z()).unwrap();
        assert!(flag);
        assert!(d.is_empty());
    }

    #[test]
    fn explicit_sets_in_finite_groups_are_reduced() {
        let g = GroupSpec::FiniteAbelian { moduli: vec![3, 6] };
        let s: DiscreteSet = FiniteSet::new(vec![vec![1, 2]]).unwrap().into();
        let t: DiscreteSet = FiniteSet::new(vec![vec![2, 5]]).unwrap().into();
        let sum = s.minkowski_sum(&t, &g).unwrap();
        assert_eq!(sum.as_periodic_in(&g).unwrap().residues(), &[vec![0, 1]]);
    }

    #[test]
    fn chain_membership() {
        let a = ChainSet::Cylinder { allowed: BTreeMap::from([(0, vec![0])]) };
        assert!(a.contains(&[0, 1, 1]));
        assert!(!a.contains(&[1, 0, 0]));
        assert!(ChainSet::Subgroup { level: 1 }.contains(&[1, 0, 0]));
        assert!(!ChainSet::Subgroup { level: 1 }.contains(&[1, 1, 0]));
        let f = ChainSet::Finite { elements: vec![vec![1]] };
        assert!(f.contains(&[1, 0, 0]));
    }
}
