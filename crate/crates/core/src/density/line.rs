//! Exact `sup_x ν(x + W)` on the real line for a bounded window `W`.
//!
//! `x ↦ ν(x + W)` is piecewise linear between the event points
//! `q - e` (`q` a breakpoint of ν, `e` an endpoint of `W`) and upper
//! semicontinuous at them, so the supremum is a maximum over event points.

use crate::group::reduce_mod;
use crate::scalar::Scalar;
use crate::setrep::intervals::IntervalUnion;
use crate::setrep::measure::{LineMeasure, Mass};

/// Result of one scan: the supremum of `ν(x + W)` and the least event
/// point attaining it. For an infinite supremum `argmax` puts an
/// accumulation point inside the window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineSup<T> {
    pub sup: Mass<T>,
    pub argmax: T,
}

/// Event points for the window, sorted. Periodic event points are reduced
/// into `[0, period)`; when a finite part is present the periodic ones are
/// also listed individually over the range where the finite part can
/// enter the window.
pub fn event_points<T: Scalar>(m: &LineMeasure<T>, w: &IntervalUnion<T>) -> (Vec<T>, Vec<T>) {
    let ends = w.endpoints();
    let mut periodic = Vec::new();
    if let Some(p) = &m.period {
        for q in m.periodic_breakpoints() {
            for e in &ends {
                periodic.push(reduce_mod(&(q.clone() - e.clone()), p));
            }
        }
        if periodic.is_empty() {
            periodic.push(T::zero());
        }
    }
    periodic.sort();
    periodic.dedup();
    let mut local = Vec::new();
    if let (Some((h0, h1)), Some((k0, k1))) = (m.finite_hull(), w.hull()) {
        let lo = h0 - k1;
        let hi = h1 - k0;
        for q in m.finite_breakpoints() {
            for e in &ends {
                local.push(q.clone() - e.clone());
            }
        }
        if let Some(p) = &m.period {
            for q in m.periodic_breakpoints() {
                for e in &ends {
                    let base = q.clone() - e.clone();
                    let first = ((lo.clone() - base.clone()) / p.clone()).ceil();
                    let last = ((hi.clone() - base.clone()) / p.clone()).floor();
                    let mut n = first;
                    while n <= last {
                        local.push(base.clone() + n.clone() * p.clone());
                        n = n + T::one();
                    }
                }
            }
        }
        local.retain(|x| x >= &lo && x <= &hi);
    }
    local.sort();
    local.dedup();
    (periodic, local)
}

/// `ν(x + W)` for the periodic part only.
fn periodic_window<T: Scalar>(m: &LineMeasure<T>, w: &IntervalUnion<T>, x: &T) -> T {
    w.pieces().iter().fold(T::zero(), |acc, (a, b)| {
        acc + m.periodic_mass(&(x.clone() + a.clone()), &(x.clone() + b.clone()))
    })
}

/// `sup_x ν(x + W)` with its least maximizing event point.
pub fn window_sup<T: Scalar>(m: &LineMeasure<T>, w: &IntervalUnion<T>) -> LineSup<T> {
    if let Some(t) = m.tails.first() {
        if let Some((a, b)) = w.pieces().iter().find(|(a, b)| a < b) {
            // put the accumulation point at the middle of a nondegenerate piece
            let mid = (a.clone() + b.clone()).half();
            return LineSup { sup: Mass::Infinite, argmax: t.center.clone() - mid };
        }
    }
    let (periodic, local) = event_points(m, w);
    let mut best: Option<(T, T)> = None;
    let consider = |best: &mut Option<(T, T)>, x: T, v: T| {
        let better = match best {
            None => true,
            Some((bx, bv)) => v > *bv || (v == *bv && x < *bx),
        };
        if better {
            *best = Some((x, v));
        }
    };
    for x in periodic {
        let v = periodic_window(m, w, &x);
        consider(&mut best, x, v);
    }
    for x in local {
        let v = match m.window_mass(&w.translate(&x)) {
            Mass::Finite(v) => v,
            Mass::Infinite => return LineSup { sup: Mass::Infinite, argmax: x },
        };
        consider(&mut best, x, v);
    }
    match best {
        Some((x, v)) => LineSup { sup: Mass::Finite(v), argmax: x },
        None => LineSup { sup: Mass::Finite(T::zero()), argmax: T::zero() },
    }
}
