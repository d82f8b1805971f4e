//! Index arithmetic on a finite box ∏ ℤ_{m_i}, shared by the covering
//! and translate searches.

use crate::error::{Error, Result};
use crate::group::{rank_of, unrank};
use crate::setrep::discrete::MAX_PERIOD_CELLS;

#[derive(Clone, Debug)]
pub(crate) struct Torus {
    moduli: Vec<u64>,
    n: usize,
}

impl Torus {
    pub fn new(moduli: &[u64]) -> Result<Self> {
        let n: u128 = moduli.iter().map(|&m| m as u128).product();
        if n > MAX_PERIOD_CELLS {
            return Err(Error::CapExceeded { size: n, cap: MAX_PERIOD_CELLS });
        }
        Ok(Torus { moduli: moduli.to_vec(), n: n as usize })
    }

    pub fn from_period(period: &[i64]) -> Result<Self> {
        Self::new(&period.iter().map(|&m| m as u64).collect::<Vec<_>>())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn coords(&self, i: usize) -> Vec<i64> {
        unrank(&self.moduli, i)
    }

    pub fn rank(&self, x: &[i64]) -> usize {
        rank_of(&self.moduli, x)
    }

    pub fn add(&self, i: usize, j: usize) -> usize {
        let (a, b) = (self.coords(i), self.coords(j));
        self.rank(&a.iter().zip(&b).map(|(x, y)| x + y).collect::<Vec<_>>())
    }

    pub fn sub(&self, i: usize, j: usize) -> usize {
        let (a, b) = (self.coords(i), self.coords(j));
        self.rank(&a.iter().zip(&b).map(|(x, y)| x - y).collect::<Vec<_>>())
    }

    /// Indicator of `{a - b : a, b ∈ set}`.
    pub fn difference_indicator(&self, members: &[usize]) -> Vec<bool> {
        let mut out = vec![false; self.n];
        for &a in members {
            for &b in members {
                out[self.sub(a, b)] = true;
            }
        }
        out
    }
}

pub(crate) fn members(bits: &[bool]) -> Vec<usize> {
    bits.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i).collect()
}
