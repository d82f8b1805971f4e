//! Upper density functionals: the classical upper density on ℕ, window
//! densities, the Kahane-type density `D̄` (infimum over compact test sets),
//! its finite-test-set variant `Δ̄`, and chain densities.
//!
//! On ℤ^d and ℝ, `D̄` is computed through window densities, which give the
//! same value for any bounded window shape of positive measure. Periodic
//! instances get exact closed forms; finitely supported counting data is
//! treated as a truncation and estimated by an exact window scan over a
//! geometric radius schedule.

pub mod chain;
pub mod grid;
pub mod line;
pub mod oracle;

use serde::Serialize;
use serde_with::serde_as;

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupSpec};
use crate::scalar::{Exact, Scalar};
use crate::setrep::discrete::{ChainSet, DiscreteSet, FiniteSet};
use crate::setrep::intervals::IntervalUnion;
use crate::setrep::measure::{
    FiniteMeasure, GridMeasure, LineMeasure, Mass, MeasureSpec, SetSpec, Window,
};

pub use oracle::{Oracle, OracleResult, DEFAULT_ORACLE_CAP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Notion {
    Classical,
    Window,
    Kahane,
    Delta,
    Hegyvari,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    WindowScan,
    BruteForce,
    CertifiedLowerBound,
}

/// Settings of the radius schedule and the oracle. Every report carries
/// the settings it was computed with.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanOptions {
    /// Relative tolerance between the last two ratios for convergence.
    pub tol: f64,
    /// First radius; radii are `r0·2^k`.
    pub r0: i64,
    pub k_max: u32,
    /// Largest radius scanned, if smaller than `r0·2^k_max`.
    pub r_max: Option<i64>,
    /// Scan windows even when a closed form is available.
    pub force_scan: bool,
    /// Largest group order handed to the brute-force oracle.
    pub oracle_cap: usize,
    /// Exponents `k` of the `η = 10^-k` schedule used for atoms on ℝ.
    pub eta_exponents: u32,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            tol: 1e-3,
            r0: 8,
            k_max: 12,
            r_max: None,
            force_scan: false,
            oracle_cap: DEFAULT_ORACLE_CAP,
            eta_exponents: 9,
        }
    }
}

impl ScanOptions {
    pub fn radii(&self) -> Vec<i64> {
        (0..=self.k_max)
            .map(|k| self.r0.saturating_mul(1i64 << k.min(40)))
            .take_while(|r| self.r_max.is_none_or(|m| *r <= m))
            .collect()
    }
}

/// The basic window `K`: windows are `x + rK`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WindowShape<T> {
    /// `x + [-r, r]^d`; on ℤ^d it has `(2r+1)^d` points.
    CenteredCube,
    /// `[x - r, x + r]` on ℝ.
    Interval,
    /// A union of intervals of total length 1.
    CustomK(IntervalUnion<T>),
}

impl<T: Scalar> WindowShape<T> {
    pub fn custom(k: IntervalUnion<T>) -> Result<Self> {
        if k.length() != T::one() {
            return Err(Error::precondition(format!(
                "custom window must have length 1, got {}",
                k.length()
            )));
        }
        Ok(WindowShape::CustomK(k))
    }

    fn basic_set(&self) -> IntervalUnion<T> {
        match self {
            WindowShape::CustomK(k) => k.clone(),
            _ => IntervalUnion::interval(-T::one(), T::one()).expect("ordered"),
        }
    }
}

#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct ScheduleEntry<T> {
    #[serde_as(as = "Exact")]
    pub r: T,
    /// `sup_x ν(x + rK) / |rK|`.
    pub ratio: Mass<T>,
    /// Least event point attaining the supremum.
    pub argmax: GroupElement<T>,
}

#[serde_as]
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case", bound = "T: Scalar")]
pub enum DensityValue<T> {
    Exact {
        #[serde_as(as = "Exact")]
        value: T,
    },
    Estimated {
        schedule: Vec<ScheduleEntry<T>>,
        extrapolated: f64,
        converged: bool,
    },
    Infinite,
}

#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct EtaEntry<T> {
    #[serde_as(as = "Exact")]
    pub eta: T,
    /// `ν(V)` for `V = a + [-η/2, η/2]`.
    #[serde_as(as = "Exact")]
    pub mass: T,
    /// `μ(F + V) = #F·η`.
    #[serde_as(as = "Exact")]
    pub measure: T,
    #[serde_as(as = "Exact")]
    pub bound: T,
}

/// Evidence attached to a density value.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case", bound = "T: Scalar")]
pub enum Witness<T> {
    /// `ν(center + radius·K) = mass` and `|radius·K| = measure`.
    Window {
        center: GroupElement<T>,
        #[serde_as(as = "Exact")]
        radius: T,
        #[serde_as(as = "Exact")]
        mass: T,
        #[serde_as(as = "Exact")]
        measure: T,
    },
    /// Minimizing `C` and maximizing `V` of the brute-force search, with
    /// `ν(V)` and `|C + V|`.
    Oracle {
        c: Vec<Vec<i64>>,
        v: Vec<Vec<i64>>,
        #[serde_as(as = "Exact")]
        mass: T,
        sumset_size: u32,
    },
    /// A bounded window with infinitely many points around `point`.
    Accumulation {
        #[serde_as(as = "Exact")]
        point: T,
        #[serde_as(as = "(Exact, Exact)")]
        window: (T, T),
    },
    /// Lower bounds `ν(V)/μ(F+V)` for `F = {0}` and shrinking `V` around an atom.
    EtaSchedule {
        #[serde_as(as = "Exact")]
        atom: T,
        entries: Vec<EtaEntry<T>>,
    },
    /// `#(A ∩ H_n)/#H_n` by depth.
    Depths {
        #[serde_as(as = "Vec<(_, Exact)>")]
        entries: Vec<(usize, T)>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct DensityReport<T> {
    pub notion: Notion,
    pub value: DensityValue<T>,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness<T>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub settings: ScanOptions,
}

impl<T: Scalar> DensityReport<T> {
    fn exact(notion: Notion, value: T, method: Method, opts: &ScanOptions) -> Self {
        DensityReport {
            notion,
            value: DensityValue::Exact { value },
            method,
            witness: None,
            notes: Vec::new(),
            settings: opts.clone(),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// The exact value, if the report has one.
    pub fn exact_value(&self) -> Option<&T> {
        match &self.value {
            DensityValue::Exact { value } => Some(value),
            _ => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self.value, DensityValue::Infinite)
    }

    /// Best available decimal value (`inf` for infinite densities).
    pub fn approx(&self) -> f64 {
        match &self.value {
            DensityValue::Exact { value } => value.to_f64(),
            DensityValue::Estimated { extrapolated, .. } => *extrapolated,
            DensityValue::Infinite => f64::INFINITY,
        }
    }

    /// Human readable one-line summary.
    pub fn summary(&self) -> String {
        let method = match self.method {
            Method::ClosedForm => "exact, closed-form",
            Method::WindowScan => "window scan",
            Method::BruteForce => "exact, brute-force",
            Method::CertifiedLowerBound => "certified lower bound",
        };
        match &self.value {
            DensityValue::Exact { value } if value.is_integer() => format!("{value} ({method})"),
            DensityValue::Exact { value } => {
                format!("{value} ({method}; decimal ≈ {})", crate::scalar::sig6(value.to_f64()))
            }
            DensityValue::Estimated { extrapolated, converged, schedule } => format!(
                "≈ {} ({method}, {} radii, {})",
                crate::scalar::sig6(*extrapolated),
                schedule.len(),
                if *converged { "converged" } else { "not converged" }
            ),
            DensityValue::Infinite => match &self.witness {
                Some(Witness::EtaSchedule { .. }) => "Infinite (certified: η schedule)".into(),
                Some(Witness::Accumulation { .. }) => {
                    "Infinite (certified: accumulation window)".into()
                }
                _ => "Infinite".into(),
            },
        }
    }
}

fn has_truncated_part<T: Scalar>(nu: &MeasureSpec<T>) -> bool {
    match nu {
        MeasureSpec::Counting { of } | MeasureSpec::HaarTrace { of } => match of {
            SetSpec::Points(p) => !p.points().is_empty() && matches!(nu, MeasureSpec::Counting { .. }),
            SetSpec::Intervals { intervals } => !intervals.is_empty(),
            SetSpec::ExplicitFinite(f) => !f.is_empty(),
            _ => false,
        },
        MeasureSpec::Sum { terms } => terms.iter().any(has_truncated_part),
        _ => false,
    }
}

fn ratio_f64<T: Scalar>(m: &Mass<T>) -> f64 {
    match m {
        Mass::Finite(v) => v.to_f64(),
        Mass::Infinite => f64::INFINITY,
    }
}

fn converged(prev: f64, last: f64, tol: f64) -> bool {
    if last == prev {
        return true;
    }
    let scale = last.abs().max(prev.abs());
    scale > 0.0 && (last - prev).abs() / scale < tol
}

/// Classical upper density `lim sup A(n)/n` of `A ⊂ ℤ`, with
/// `A(n) = #{a ∈ A : 1 ≤ a ≤ n}`.
pub fn classical_upper_density<T: Scalar>(
    a: &DiscreteSet,
    r_max: i64,
    opts: &ScanOptions,
) -> Result<DensityReport<T>> {
    a.check_in(&GroupSpec::ZLattice { dimension: 1 })?;
    match a {
        DiscreteSet::PeriodicDiscrete(p) => Ok(DensityReport::exact(
            Notion::Classical,
            T::from_ratio(p.residues().len() as i64, p.period()[0]),
            Method::ClosedForm,
            opts,
        )
        .with_note("periodic set: residues per period")),
        DiscreteSet::ExplicitFinite(f) if f.is_empty() => {
            Ok(DensityReport::exact(Notion::Classical, T::zero(), Method::ClosedForm, opts))
        }
        DiscreteSet::ExplicitFinite(f) => {
            let xs: Vec<i64> = f.elements().iter().map(|e| e[0]).collect();
            let mut schedule = Vec::new();
            let mut n = opts.r0.max(1);
            for _ in 0..=opts.k_max {
                if n > r_max {
                    break;
                }
                let count = xs.iter().filter(|&&x| 1 <= x && x <= n).count() as i64;
                schedule.push(ScheduleEntry {
                    r: T::from_int(n),
                    ratio: Mass::Finite(T::from_ratio(count, n)),
                    argmax: GroupElement::Int(vec![0]),
                });
                n = n.saturating_mul(2);
            }
            Ok(estimated(Notion::Classical, schedule, opts)
                .with_note("finite set treated as a truncation: A(n)/n along the schedule"))
        }
    }
}

fn estimated<T: Scalar>(
    notion: Notion,
    schedule: Vec<ScheduleEntry<T>>,
    opts: &ScanOptions,
) -> DensityReport<T> {
    let last = schedule.last().map(|e| ratio_f64(&e.ratio)).unwrap_or(0.0);
    let conv = settled(&schedule, opts.tol);
    DensityReport {
        notion,
        value: DensityValue::Estimated { schedule, extrapolated: last, converged: conv },
        method: Method::WindowScan,
        witness: None,
        notes: Vec::new(),
        settings: opts.clone(),
    }
}

/// One profile entry per radius: the exact `sup_x ν(x + rK)/|rK|` and the
/// least event point attaining it.
pub fn window_density_profile<T: Scalar>(
    nu: &MeasureSpec<T>,
    group: &GroupSpec,
    shape: &WindowShape<T>,
    radii: &[T],
) -> Result<Vec<ScheduleEntry<T>>> {
    nu.check_in(group)?;
    match group {
        GroupSpec::RealLine => {
            let m = LineMeasure::from_spec(nu)?;
            let k = shape.basic_set();
            Ok(radii.iter().map(|r| line_entry(&m, &k, r)).collect())
        }
        GroupSpec::ZLattice { dimension } => {
            if let WindowShape::CustomK(_) = shape {
                return Err(Error::precondition("custom windows are only supported on ℝ"));
            }
            let m = GridMeasure::from_spec(nu, group)?;
            radii
                .iter()
                .map(|r| {
                    let ri = r
                        .to_i64()
                        .filter(|v| *v >= 0)
                        .ok_or_else(|| Error::precondition("radii on ℤ^d must be nonnegative integers"))?;
                    let (v, x) = grid::cube_sup(&m, ri)?;
                    let size = T::from_int(2 * ri + 1);
                    let measure = (0..*dimension).fold(T::one(), |acc, _| acc * size.clone());
                    Ok(ScheduleEntry {
                        r: r.clone(),
                        ratio: Mass::Finite(v / measure),
                        argmax: GroupElement::Int(x),
                    })
                })
                .collect()
        }
        _ => Err(Error::precondition("window profiles need ℤ^d or ℝ")),
    }
}

fn line_entry<T: Scalar>(m: &LineMeasure<T>, k: &IntervalUnion<T>, r: &T) -> ScheduleEntry<T> {
    let w = k.scale(r);
    let s = line::window_sup(m, &w);
    let ratio = match s.sup {
        Mass::Finite(v) => Mass::Finite(v / w.length()),
        Mass::Infinite => Mass::Infinite,
    };
    ScheduleEntry { r: r.clone(), ratio, argmax: GroupElement::Real(s.argmax) }
}

/// Window density `lim_r sup_x ν(x + rK)/|rK|`.
pub fn auud_window<T: Scalar>(
    nu: &MeasureSpec<T>,
    group: &GroupSpec,
    shape: &WindowShape<T>,
    opts: &ScanOptions,
) -> Result<DensityReport<T>> {
    nu.check_in(group)?;
    match group {
        GroupSpec::FiniteAbelian { .. } | GroupSpec::SigmaFiniteChain { .. } => {
            let mut rep = kahane_density_finite_group(nu, group, false, opts)?;
            rep.notion = Notion::Window;
            Ok(rep.with_note("compact group: every window density is ν(G)/|G|"))
        }
        GroupSpec::RealLine => {
            let m = LineMeasure::from_spec(nu)?;
            let k = shape.basic_set();
            if let Some(t) = m.tails.first() {
                let r = T::from_int(opts.r0);
                let e = line_entry(&m, &k, &r);
                let GroupElement::Real(x) = &e.argmax else { unreachable!("real") };
                let w = k.scale(&r).translate(x);
                let piece = w
                    .pieces()
                    .iter()
                    .find(|(a, b)| a <= &t.center && &t.center <= b)
                    .cloned()
                    .expect("window covers the accumulation point");
                return Ok(DensityReport {
                    notion: Notion::Window,
                    value: DensityValue::Infinite,
                    method: Method::WindowScan,
                    witness: Some(Witness::Accumulation { point: t.center.clone(), window: piece }),
                    notes: vec!["a bounded window holds infinitely many points".into()],
                    settings: opts.clone(),
                });
            }
            if !opts.force_scan && !has_truncated_part(nu) {
                let mut rep = DensityReport::exact(
                    Notion::Window,
                    m.periodic_density_value(),
                    Method::ClosedForm,
                    opts,
                );
                if m.period.is_some() {
                    rep = rep.with_note("periodic instance: mass per period over the period");
                }
                if m.has_finite_part() {
                    rep = rep.with_note("finitely many atoms do not contribute on a non-compact group");
                }
                return Ok(rep);
            }
            // a periodic measure has ρ ≤ ratio(r) ≤ ρ + n_K·ν(period)/|rK|, which
            // certifies convergence where comparing radii can be fooled
            let excess = match &m.period {
                Some(_) if m.is_periodic() => {
                    Some(T::from_int(k.pieces().len() as i64) * m.mass_per_period() / k.length())
                }
                _ => None,
            };
            let certified = |e: &ScheduleEntry<T>, c: &T| {
                (c.clone() / e.r.clone()).to_f64() <= opts.tol * ratio_f64(&e.ratio)
            };
            let mut schedule: Vec<ScheduleEntry<T>> = Vec::new();
            for r in opts.radii() {
                schedule.push(line_entry(&m, &k, &T::from_int(r)));
                let done = match &excess {
                    Some(c) => certified(schedule.last().expect("pushed"), c),
                    None => stop_early(&schedule, opts),
                };
                if done {
                    break;
                }
            }
            let mut rep = estimated(Notion::Window, schedule, opts);
            if let (Some(c), DensityValue::Estimated { schedule, converged, .. }) = (&excess, &mut rep.value) {
                *converged = schedule.last().is_some_and(|e| certified(e, c));
                let slack = schedule.last().map(|e| c.clone() / e.r.clone()).unwrap_or_else(T::zero);
                rep.notes.push(format!(
                    "periodic measure: the density lies in [ratio - {}, ratio] at the last radius",
                    crate::scalar::render(&slack)
                ));
            }
            rep.witness = last_window_witness(&rep, &k, &m);
            Ok(rep)
        }
        GroupSpec::ZLattice { dimension } => {
            let m = GridMeasure::from_spec(nu, group)?;
            if let WindowShape::CustomK(_) = shape {
                return Err(Error::precondition("custom windows are only supported on ℝ"));
            }
            if !opts.force_scan && !has_truncated_part(nu) {
                let value = match &m.periodic {
                    Some((p, _)) => {
                        let cells = p.iter().fold(T::one(), |acc, &x| acc * T::from_int(x));
                        m.mass_per_period() / cells
                    }
                    None => T::zero(),
                };
                let mut rep = DensityReport::exact(Notion::Window, value, Method::ClosedForm, opts);
                if m.periodic.is_some() {
                    rep = rep.with_note("periodic instance: mass per period over the period");
                }
                if !m.finite.is_empty() {
                    rep = rep.with_note("finitely many atoms do not contribute on a non-compact group");
                }
                return Ok(rep);
            }
            let mut schedule: Vec<ScheduleEntry<T>> = Vec::new();
            for r in opts.radii() {
                let entry = window_density_profile(nu, group, shape, &[T::from_int(r)])?
                    .pop()
                    .expect("one radius");
                schedule.push(entry);
                if stop_early(&schedule, opts) {
                    break;
                }
            }
            let mut rep = estimated(Notion::Window, schedule, opts);
            if let DensityValue::Estimated { schedule, .. } = &rep.value {
                if let Some(e) = schedule.last() {
                    if let GroupElement::Int(x) = &e.argmax {
                        let r = e.r.to_i64().expect("integer radius");
                        let size = T::from_int(2 * r + 1);
                        rep.witness = Some(Witness::Window {
                            center: e.argmax.clone(),
                            radius: e.r.clone(),
                            mass: m.cube_mass(x, r),
                            measure: (0..*dimension).fold(T::one(), |acc, _| acc * size.clone()),
                        });
                    }
                }
            }
            Ok(rep)
        }
    }
}

fn stop_early<T: Scalar>(schedule: &[ScheduleEntry<T>], opts: &ScanOptions) -> bool {
    settled(schedule, opts.tol)
}

/// Last three ratios agree within `tol`. Two equal neighbours are not
/// enough: for periodic data the sup ratio at `r` and `2r` can coincide.
fn settled<T: Scalar>(schedule: &[ScheduleEntry<T>], tol: f64) -> bool {
    let n = schedule.len();
    n >= 3
        && (n - 3..n - 1).all(|i| {
            converged(ratio_f64(&schedule[i].ratio), ratio_f64(&schedule[i + 1].ratio), tol)
        })
}

fn last_window_witness<T: Scalar>(
    rep: &DensityReport<T>,
    k: &IntervalUnion<T>,
    m: &LineMeasure<T>,
) -> Option<Witness<T>> {
    let DensityValue::Estimated { schedule, .. } = &rep.value else { return None };
    let e = schedule.last()?;
    let GroupElement::Real(x) = &e.argmax else { return None };
    let w = k.scale(&e.r);
    let mass = m.window_mass(&w.translate(x)).finite()?.clone();
    Some(Witness::Window {
        center: e.argmax.clone(),
        radius: e.r.clone(),
        mass,
        measure: w.length(),
    })
}

/// `D̄(ν)` on a finite group (or on H_depth of a chain): the closed form
/// `ν(G)/|G|`, or with `brute_force` the exhaustive search over all
/// nonempty `C` and `V`.
pub fn kahane_density_finite_group<T: Scalar>(
    nu: &MeasureSpec<T>,
    group: &GroupSpec,
    brute_force: bool,
    opts: &ScanOptions,
) -> Result<DensityReport<T>> {
    nu.check_in(group)?;
    let m = FiniteMeasure::from_spec(nu, group)?;
    if brute_force {
        if opts.oracle_cap > 10 {
            eprintln!(
                "warning: brute-force cap {} is above 10; the search grows like 4^|G|",
                opts.oracle_cap
            );
        }
        let o = Oracle::new(&m.moduli, opts.oracle_cap)?;
        let r = o.evaluate(&m.weights)?;
        let mass = (0..o.order())
            .filter(|i| r.v >> i & 1 == 1)
            .fold(T::zero(), |acc, i| acc + m.weights[i].clone());
        let mut rep = DensityReport::exact(Notion::Kahane, r.value, Method::BruteForce, opts);
        rep.witness = Some(Witness::Oracle {
            c: o.members(r.c),
            v: o.members(r.v),
            mass,
            sumset_size: o.sumset_size(r.c, r.v),
        });
        return Ok(rep);
    }
    let order = T::from_int(m.order() as i64);
    let rep = DensityReport::exact(Notion::Kahane, m.total() / order, Method::ClosedForm, opts)
        .with_note("C = G forces every ratio to ν(G)/|G|, and V = G attains it");
    Ok(if matches!(group, GroupSpec::SigmaFiniteChain { .. }) {
        rep.with_note("evaluated on the materialized subgroup H_depth")
    } else {
        rep
    })
}

/// `D̄(ν)`. Finite groups use the closed form; ℤ^d and ℝ go through window
/// densities with the default window shape.
pub fn kahane_density<T: Scalar>(
    nu: &MeasureSpec<T>,
    group: &GroupSpec,
    opts: &ScanOptions,
) -> Result<DensityReport<T>> {
    match group {
        GroupSpec::FiniteAbelian { .. } | GroupSpec::SigmaFiniteChain { .. } => {
            kahane_density_finite_group(nu, group, false, opts)
        }
        _ => {
            let shape = if group.is_discrete() { WindowShape::CenteredCube } else { WindowShape::Interval };
            let mut rep = auud_window(nu, group, &shape, opts)?;
            rep.notion = Notion::Kahane;
            Ok(rep.with_note("computed as a window density (equal to D̄ for bounded windows)"))
        }
    }
}

/// `Δ̄(ν)`, the variant with finite test sets `F`.
pub fn delta_density<T: Scalar>(
    nu: &MeasureSpec<T>,
    group: &GroupSpec,
    opts: &ScanOptions,
) -> Result<DensityReport<T>> {
    nu.check_in(group)?;
    let equal_note = "discrete group: finite and compact test sets coincide, so Δ̄ = D̄";
    match group {
        GroupSpec::FiniteAbelian { .. } | GroupSpec::SigmaFiniteChain { .. } => {
            let small = group.order().is_some_and(|n| n <= opts.oracle_cap as u128);
            let mut rep = kahane_density_finite_group(nu, group, small, opts)?;
            rep.notion = Notion::Delta;
            Ok(rep.with_note(equal_note))
        }
        GroupSpec::ZLattice { .. } => {
            let m = GridMeasure::from_spec(nu, group)?;
            let quotient: Option<Vec<u64>> = match &m.periodic {
                Some((p, _)) if m.finite.is_empty() => {
                    Some(p.iter().map(|&x| x as u64).collect())
                }
                _ => None,
            };
            let small = quotient
                .as_ref()
                .is_some_and(|q| q.iter().map(|&x| x as u128).product::<u128>() <= opts.oracle_cap as u128);
            let mut rep = if small && !opts.force_scan {
                // a periodic measure has the same density as its image on
                // the finite quotient, where the search is exhaustive
                let moduli = quotient.expect("periodic");
                let (_, weights) = m.periodic.as_ref().expect("periodic");
                let o = Oracle::new(&moduli, opts.oracle_cap)?;
                let r = o.evaluate(weights)?;
                let mut rep = DensityReport::exact(Notion::Delta, r.value, Method::BruteForce, opts);
                let mass = (0..o.order())
                    .filter(|i| r.v >> i & 1 == 1)
                    .fold(T::zero(), |acc, i| acc + weights[i].clone());
                rep.witness = Some(Witness::Oracle {
                    c: o.members(r.c),
                    v: o.members(r.v),
                    mass,
                    sumset_size: o.sumset_size(r.c, r.v),
                });
                rep.with_note("exhaustive search on the finite quotient by the period lattice")
            } else {
                let mut rep = kahane_density(nu, group, opts)?;
                rep.notion = Notion::Delta;
                rep
            };
            rep.notes.push(equal_note.into());
            Ok(rep)
        }
        GroupSpec::RealLine => {
            let m = LineMeasure::from_spec(nu)?;
            let heaviest = m
                .finite_atoms
                .iter()
                .chain(m.periodic_atoms.iter())
                .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
                .map(|(x, _)| x.clone())
                .or_else(|| m.tails.first().map(|t| t.center.clone() + t.scale.clone()));
            if let Some(a) = heaviest {
                let mut entries = Vec::new();
                let ten = T::from_int(10);
                let mut eta = T::one();
                for _ in 0..=opts.eta_exponents {
                    let half = eta.half();
                    let mass = match m.mass(&(a.clone() - half.clone()), &(a.clone() + half)) {
                        Mass::Finite(v) => v,
                        Mass::Infinite => {
                            return Err(Error::precondition(
                                "atom window unexpectedly holds an accumulation point",
                            ))
                        }
                    };
                    entries.push(EtaEntry {
                        eta: eta.clone(),
                        bound: mass.clone() / eta.clone(),
                        mass,
                        measure: eta.clone(),
                    });
                    eta = eta / ten.clone();
                }
                return Ok(DensityReport {
                    notion: Notion::Delta,
                    value: DensityValue::Infinite,
                    method: Method::CertifiedLowerBound,
                    witness: Some(Witness::EtaSchedule { atom: a, entries }),
                    notes: vec![
                        "for any finite F, V = a + [-η/2, η/2] gives ν(V)/μ(F+V) ≥ w/(#F·η) → ∞"
                            .into(),
                    ],
                    settings: opts.clone(),
                });
            }
            let mut rep = kahane_density(nu, group, opts)?;
            rep.notion = Notion::Delta;
            rep.method = Method::CertifiedLowerBound;
            Ok(rep.with_note("non-atomic measure on ℝ: Δ̄ ≥ D̄, reported value is the lower bound D̄"))
        }
    }
}

/// Chain density `lim sup #(A ∩ H_n)/#H_n`, with the per-depth schedule.
pub fn hegyvari_density<T: Scalar>(
    a: &ChainSet,
    group: &GroupSpec,
    opts: &ScanOptions,
) -> Result<DensityReport<T>> {
    group.validate()?;
    let entries = chain::schedule::<T>(a, group)?;
    let GroupSpec::SigmaFiniteChain { moduli, .. } = group else { unreachable!("checked") };
    let mut rep =
        DensityReport::exact(Notion::Hegyvari, chain::limit::<T>(a, moduli), Method::ClosedForm, opts);
    rep.witness = Some(Witness::Depths { entries });
    Ok(rep.with_note(match a {
        ChainSet::Cylinder { .. } => "cylinder set: determined by finitely many coordinates",
        ChainSet::Whole => "whole group",
        _ => "contained in a finite subgroup: ratios tend to 0",
    }))
}

/// Outcome of [`translation_witness`].
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case", bound = "T: Scalar")]
pub enum TranslationOutcome<T> {
    Found {
        x: GroupElement<T>,
        mass: Mass<T>,
        #[serde_as(as = "Exact")]
        threshold: T,
    },
    NotFound {
        sup: Mass<T>,
        #[serde_as(as = "Exact")]
        threshold: T,
    },
}

/// Finds `x` with `ν(W + x) ≥ γ·μ(W)`, scanning `x = 0` first and then the
/// event points in increasing order.
pub fn translation_witness<T: Scalar>(
    nu: &MeasureSpec<T>,
    group: &GroupSpec,
    w: &Window<T>,
    gamma: &T,
) -> Result<TranslationOutcome<T>> {
    nu.check_in(group)?;
    let zero = group.zero::<T>();
    match (group, w) {
        (GroupSpec::RealLine, Window::Intervals(w)) => {
            let m = LineMeasure::from_spec(nu)?;
            let threshold = gamma.clone() * w.length();
            let found = |x: T, mass: Mass<T>| TranslationOutcome::Found {
                x: GroupElement::Real(x),
                mass,
                threshold: threshold.clone(),
            };
            let at_zero = m.window_mass(w);
            if at_zero >= Mass::Finite(threshold.clone()) {
                return Ok(found(T::zero(), at_zero));
            }
            let sup = line::window_sup(&m, w);
            if sup.sup.is_infinite() {
                return Ok(found(sup.argmax, Mass::Infinite));
            }
            let (periodic, local) = line::event_points(&m, w);
            for x in periodic.into_iter().chain(local) {
                let mass = m.window_mass(&w.translate(&x));
                if mass >= Mass::Finite(threshold.clone()) {
                    return Ok(found(x, mass));
                }
            }
            Ok(TranslationOutcome::NotFound { sup: sup.sup, threshold })
        }
        (GroupSpec::ZLattice { .. }, Window::Set(_) | Window::Cube(_)) => {
            let m = GridMeasure::from_spec(nu, group)?;
            let d = m.dimension;
            let offsets: Vec<Vec<i64>> = match w {
                Window::Set(f) => f.elements().to_vec(),
                Window::Cube(r) => {
                    let side = 2 * *r + 1;
                    let sizes = vec![side; d];
                    (0..side.pow(d as u32) as usize)
                        .map(|i| crate::group::unrank(&sizes, i).iter().map(|c| c - *r as i64).collect())
                        .collect()
                }
                Window::Intervals(_) => unreachable!("matched"),
            };
            let threshold = gamma.clone() * T::from_int(offsets.len() as i64);
            let mass_at = |x: &[i64]| {
                offsets.iter().fold(T::zero(), |acc, o| {
                    let p: Vec<i64> = o.iter().zip(x).map(|(a, b)| a + b).collect();
                    acc + m.point_mass(&p)
                })
            };
            let mut candidates: Vec<Vec<i64>> = vec![vec![0; d]];
            if let Some((p, _)) = &m.periodic {
                let moduli: Vec<u64> = p.iter().map(|&x| x as u64).collect();
                let cells: u64 = moduli.iter().product();
                candidates.extend((0..cells as usize).map(|i| crate::group::unrank(&moduli, i)));
            }
            let mut local: Vec<Vec<i64>> = m
                .finite
                .keys()
                .flat_map(|q| offsets.iter().map(move |o| q.iter().zip(o).map(|(a, b)| a - b).collect()))
                .collect();
            local.sort();
            local.dedup();
            candidates.extend(local);
            let mut sup = T::zero();
            for x in candidates {
                let mass = mass_at(&x);
                if mass >= threshold {
                    return Ok(TranslationOutcome::Found {
                        x: GroupElement::Int(x),
                        mass: Mass::Finite(mass),
                        threshold,
                    });
                }
                if mass > sup {
                    sup = mass;
                }
            }
            Ok(TranslationOutcome::NotFound { sup: Mass::Finite(sup), threshold })
        }
        (_, Window::Set(f)) if group.moduli().is_some() => {
            let elems = group.enumerate(crate::group::DEFAULT_ENUMERATION_CAP)?;
            let mut distinct = f.elements().to_vec();
            for e in &mut distinct {
                group.reduce(e);
            }
            distinct.sort();
            distinct.dedup();
            let threshold = gamma.clone() * T::from_int(distinct.len() as i64);
            let win = Window::Set(FiniteSet::new(distinct)?);
            let mut sup = Mass::Finite(T::zero());
            for x in std::iter::once(zero.as_int().expect("int").to_vec()).chain(elems) {
                let xe = GroupElement::Int(x);
                let mass = crate::setrep::measure::window_mass(nu, group, &xe, &win)?;
                if mass >= Mass::Finite(threshold.clone()) {
                    return Ok(TranslationOutcome::Found { x: xe, mass, threshold });
                }
                sup = sup.max(mass);
            }
            Ok(TranslationOutcome::NotFound { sup, threshold })
        }
        _ => Err(Error::Shape("window does not fit the group".into())),
    }
}

/// The set `C` of a window construction: an interval union on ℝ or a
/// finite set of integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RudinSet<T> {
    Real(IntervalUnion<T>),
    Integers(Vec<i64>),
}

/// A symmetric window `V = W - W = [-L, L]` (`W = [0, L]`, or `{0,…,L}` in ℤ)
/// with the verified inequality `μ(C + V) < (1+ε)μ(V)`.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct RudinWindow<T> {
    pub half_width: i64,
    #[serde_as(as = "Exact")]
    pub measure_sum: T,
    #[serde_as(as = "Exact")]
    pub measure_v: T,
    #[serde_as(as = "Exact")]
    pub bound: T,
}

impl<T: Scalar> RudinSet<T> {
    /// `(μ(C + [-L, L]), μ([-L, L]))`.
    pub fn measures(&self, l: i64) -> (T, T) {
        match self {
            RudinSet::Real(c) => {
                let v = IntervalUnion::interval(T::from_int(-l), T::from_int(l)).expect("ordered");
                (c.minkowski_sum(&v).length(), T::from_int(2 * l))
            }
            RudinSet::Integers(c) => {
                let mut xs = c.clone();
                xs.sort();
                xs.dedup();
                let mut count = 0i64;
                let mut reach = i64::MIN;
                for x in xs {
                    let (a, b) = (x - l, x + l);
                    let start = a.max(reach.saturating_add(1));
                    if b >= start {
                        count += b - start + 1;
                        reach = b;
                    }
                }
                (T::from_int(count), T::from_int(2 * l + 1))
            }
        }
    }
}

/// Least `L ≥ 1` with `μ(C + [-L, L]) < (1+ε)·μ([-L, L])`, by doubling and
/// then bisection (the inequality is monotone in `L`).
pub fn rudin_window<T: Scalar>(c: &RudinSet<T>, eps: &T) -> Result<RudinWindow<T>> {
    if !eps.is_positive() {
        return Err(Error::precondition("ε must be positive"));
    }
    let holds = |l: i64| {
        let (s, v) = c.measures(l);
        s < (T::one() + eps.clone()) * v
    };
    let mut hi = 1i64;
    while !holds(hi) {
        hi = hi
            .checked_mul(2)
            .filter(|h| *h < 1 << 48)
            .ok_or_else(|| Error::precondition("window search did not terminate"))?;
    }
    let mut lo = hi / 2; // fails (or is 0)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (s, v) = c.measures(hi);
    Ok(RudinWindow {
        half_width: hi,
        bound: (T::one() + eps.clone()) * v.clone(),
        measure_sum: s,
        measure_v: v,
    })
}

/// Applies [`kahane_density`] to the Haar trace (counting measure in
/// discrete groups) of a set.
pub fn set_density<T: Scalar>(
    set: &SetSpec<T>,
    group: &GroupSpec,
    opts: &ScanOptions,
) -> Result<DensityReport<T>> {
    let nu = match set {
        SetSpec::Points(_) => MeasureSpec::Counting { of: set.clone() },
        _ => MeasureSpec::HaarTrace { of: set.clone() },
    };
    kahane_density(&nu, group, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setrep::{PeriodicPattern, PeriodicSet, PointConfig};
    use crate::Rational;

    fn q(a: i64, b: i64) -> Rational {
        Rational::from_ratio(a, b)
    }

    fn z() -> GroupSpec {
        GroupSpec::ZLattice { dimension: 1 }
    }

    #[test]
    fn multiples_of_three() {
        let nu = MeasureSpec::counting(DiscreteSet::from(PeriodicSet::arithmetic(3, [0]).unwrap()));
        let opts = ScanOptions::default();
        let r = kahane_density::<Rational>(&nu, &z(), &opts).unwrap();
        assert_eq!(r.exact_value(), Some(&q(1, 3)));
        assert!(r.summary().starts_with("1/3 (exact, closed-form"));
        let d = delta_density::<Rational>(&nu, &z(), &opts).unwrap();
        assert_eq!((d.exact_value(), d.method), (Some(&q(1, 3)), Method::BruteForce));
        let forced = ScanOptions { force_scan: true, ..ScanOptions::default() };
        let s = kahane_density::<Rational>(&nu, &z(), &forced).unwrap();
        assert!((s.approx() - 1.0 / 3.0).abs() < 1e-2);
    }

    #[test]
    fn dirac_at_zero() {
        let opts = ScanOptions::default();
        let nu = MeasureSpec::<Rational>::DiracAtZero;
        let d = kahane_density(&nu, &GroupSpec::RealLine, &opts).unwrap();
        assert_eq!(d.exact_value(), Some(&q(0, 1)));
        let delta = delta_density(&nu, &GroupSpec::RealLine, &opts).unwrap();
        assert!(delta.is_infinite());
        let Some(Witness::EtaSchedule { entries, .. }) = &delta.witness else { panic!("schedule") };
        assert_eq!(entries[6].bound, Rational::from_int(1_000_000));
        let prof = window_density_profile(&nu, &GroupSpec::RealLine, &WindowShape::Interval, &[q(1_000_000, 1)])
            .unwrap();
        assert_eq!(prof[0].ratio, Mass::Finite(q(1, 2_000_000)));
    }

    #[test]
    fn pattern_with_custom_window() {
        let pat = PeriodicPattern::new(q(1, 1), IntervalUnion::interval(q(0, 1), q(1, 2)).unwrap()).unwrap();
        let nu = MeasureSpec::haar_trace(SetSpec::PeriodicPattern(pat));
        let k = WindowShape::custom(
            IntervalUnion::new(vec![(q(0, 1), q(1, 3)), (q(2, 1), q(8, 3))]).unwrap(),
        )
        .unwrap();
        let opts = ScanOptions { force_scan: true, ..ScanOptions::default() };
        let r = auud_window(&nu, &GroupSpec::RealLine, &k, &opts).unwrap();
        let DensityValue::Estimated { converged, extrapolated, .. } = &r.value else { panic!("scan") };
        assert!(*converged);
        assert!((extrapolated - 0.5).abs() < 1e-2);
        assert!(matches!(r.witness, Some(Witness::Window { .. })));
    }

    #[test]
    fn accumulation_is_infinite() {
        let nu = MeasureSpec::counting(SetSpec::Points(PointConfig::reciprocal_tail(q(0, 1), q(1, 1), 1)));
        let r = kahane_density::<Rational>(&nu, &GroupSpec::RealLine, &ScanOptions::default()).unwrap();
        assert!(r.is_infinite());
        assert!(matches!(r.witness, Some(Witness::Accumulation { .. })));
    }

    #[test]
    fn finite_groups_and_chains() {
        let g = GroupSpec::FiniteAbelian { moduli: vec![2, 3] };
        let nu = MeasureSpec::counting(DiscreteSet::from(crate::setrep::FiniteSet::new(vec![vec![0, 0], vec![1, 2]]).unwrap()));
        let opts = ScanOptions::default();
        let c = kahane_density_finite_group::<Rational>(&nu, &g, false, &opts).unwrap();
        let b = kahane_density_finite_group::<Rational>(&nu, &g, true, &opts).unwrap();
        assert_eq!(c.exact_value(), Some(&q(1, 3)));
        assert_eq!(b.exact_value(), c.exact_value());
        let chain = GroupSpec::SigmaFiniteChain { moduli: vec![2], depth: 6 };
        let a = ChainSet::Cylinder { allowed: [(0, vec![0])].into_iter().collect() };
        let h = hegyvari_density::<Rational>(&a, &chain, &opts).unwrap();
        assert_eq!(h.exact_value(), Some(&q(1, 2)));
    }

    #[test]
    fn classical_and_truncations() {
        let opts = ScanOptions::default();
        let evens = DiscreteSet::from(PeriodicSet::arithmetic(2, [0]).unwrap());
        let r = classical_upper_density::<Rational>(&evens, 1 << 20, &opts).unwrap();
        assert_eq!(r.exact_value(), Some(&q(1, 2)));
        let f = DiscreteSet::from(crate::setrep::FiniteSet::from_ints(1..=100));
        let r = classical_upper_density::<Rational>(&f, 1 << 12, &opts).unwrap();
        let DensityValue::Estimated { schedule, .. } = &r.value else { panic!("scan") };
        assert_eq!(schedule[0].ratio, Mass::Finite(q(1, 1)));
        assert_eq!(schedule.last().unwrap().ratio, Mass::Finite(q(100, 4096)));
    }

    #[test]
    fn windows_for_rudin() {
        let c = RudinSet::Real(IntervalUnion::interval(q(-1, 1), q(1, 1)).unwrap());
        let w = rudin_window(&c, &q(1, 10)).unwrap();
        assert_eq!(w.half_width, 11);
        assert!(w.measure_sum < w.bound);
        let (s, v) = c.measures(10);
        assert!(s >= q(11, 10) * v);
        let ints = RudinSet::<Rational>::Integers(vec![0, 5]);
        let w = rudin_window(&ints, &q(1, 2)).unwrap();
        let (s, v) = ints.measures(w.half_width - 1);
        assert!(s >= q(3, 2) * v);
    }

    #[test]
    fn translation_witnesses() {
        let nu = MeasureSpec::counting(DiscreteSet::from(PeriodicSet::arithmetic(5, [3]).unwrap()));
        let out = translation_witness::<Rational>(
            &nu,
            &z(),
            &Window::Set(crate::setrep::FiniteSet::from_ints([0, 1])),
            &q(1, 2),
        )
        .unwrap();
        assert_eq!(
            out,
            TranslationOutcome::Found { x: GroupElement::int(vec![2]), mass: Mass::Finite(q(1, 1)), threshold: q(1, 1) }
        );
        let out = translation_witness::<Rational>(&nu, &z(), &Window::Cube(0), &q(2, 1)).unwrap();
        assert!(matches!(out, TranslationOutcome::NotFound { .. }));
        let pat = PeriodicPattern::new(q(1, 1), IntervalUnion::interval(q(1, 2), q(3, 4)).unwrap()).unwrap();
        let nu = MeasureSpec::haar_trace(SetSpec::PeriodicPattern(pat));
        let w = IntervalUnion::interval(q(0, 1), q(1, 4)).unwrap();
        let out = translation_witness(&nu, &GroupSpec::RealLine, &Window::Intervals(w), &q(1, 1)).unwrap();
        let TranslationOutcome::Found { x, .. } = out else { panic!("found") };
        assert_eq!(x, GroupElement::Real(q(1, 2)));
    }
}
