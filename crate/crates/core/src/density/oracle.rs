//! Brute-force evaluation of `inf_C sup_V ν(V)/|C+V|` over all nonempty
//! subsets `C`, `V` of a small finite abelian group.

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::unrank;
use crate::scalar::Scalar;

/// Default largest group order the oracle accepts.
pub const DEFAULT_ORACLE_CAP: usize = 8;
/// Hard limit; the sumset table has `4^n` entries.
pub const MAX_ORACLE_ORDER: usize = 12;

/// Precomputed `|C + V|` for every pair of nonempty subsets of one group.
/// Subsets are bitmasks over the canonical enumeration.
pub struct Oracle {
    moduli: Vec<u64>,
    n: usize,
    sumset_size: Vec<u8>,
}

/// Exact inf-sup value with the canonical (least mask) minimizing `C` and
/// maximizing `V`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult<T> {
    pub value: T,
    pub c: u32,
    pub v: u32,
}

impl Oracle {
    pub fn new(moduli: &[u64], cap: usize) -> Result<Self> {
        let n: u128 = moduli.iter().map(|&m| m as u128).product();
        let limit = cap.min(MAX_ORACLE_ORDER) as u128;
        if n > limit {
            return Err(Error::CapExceeded { size: n, cap: limit });
        }
        let n = n as usize;
        let full = 1usize << n;
        let elems: Vec<Vec<i64>> = (0..n).map(|i| unrank(moduli, i)).collect();
        let index = |coords: &[i64]| -> usize {
            crate::group::rank_of(moduli, coords)
        };
        // add[g][h] = rank of g + h
        let add: Vec<Vec<usize>> = elems
            .iter()
            .map(|g| {
                elems
                    .iter()
                    .map(|h| index(&g.iter().zip(h).map(|(a, b)| a + b).collect::<Vec<_>>()))
                    .collect()
            })
            .collect();
        // shift[g][V] = mask of g + V
        let mut shift = vec![vec![0u32; full]; n];
        for (g, row) in shift.iter_mut().enumerate() {
            for v in 1..full {
                let low = v.trailing_zeros() as usize;
                row[v] = row[v & (v - 1)] | (1u32 << add[g][low]);
            }
        }
        // C+V built from (C minus its lowest element)+V
        let mut table = vec![0u32; full * full];
        let mut sumset_size = vec![0u8; full * full];
        for c in 1..full {
            let low = c.trailing_zeros() as usize;
            let prev = c & (c - 1);
            for v in 1..full {
                let rest = if prev == 0 { 0 } else { table[prev * full + v] };
                let m = rest | shift[low][v];
                table[c * full + v] = m;
                sumset_size[c * full + v] = m.count_ones() as u8;
            }
        }
        Ok(Oracle { moduli: moduli.to_vec(), n, sumset_size })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    /// `|C + V|` for nonzero masks.
    pub fn sumset_size(&self, c: u32, v: u32) -> u32 {
        self.sumset_size[(c as usize) << self.n | v as usize] as u32
    }

    /// Evaluates the inf-sup for the measure with the given per-element
    /// weights (canonical order).
    pub fn evaluate<T: Scalar>(&self, weights: &[T]) -> Result<OracleResult<T>> {
        assert_eq!(weights.len(), self.n, "one weight per element");
        // scale to integers
        let mut scale = T::one();
        for w in weights {
            scale = scale.clone() * (w.clone() * scale.clone()).denom();
        }
        let ints: Vec<i128> = weights
            .iter()
            .map(|w| {
                (w.clone() * scale.clone())
                    .to_i64()
                    .map(i128::from)
                    .ok_or_else(|| Error::precondition("oracle weights too large"))
            })
            .collect::<Result<_>>()?;
        let full = 1usize << self.n;
        let mut mass = vec![0i128; full];
        for v in 1..full {
            let low = v.trailing_zeros() as usize;
            mass[v] = mass[v & (v - 1)] + ints[low];
        }
        // best (num, den) so far for the infimum
        let mut best: Option<(i128, i128, usize, usize)> = None;
        for c in 1..full {
            let row = &self.sumset_size[c * full..(c + 1) * full];
            let mut top: (i128, i128, usize) = (-1, 1, 0);
            let mut pruned = false;
            for v in 1..full {
                let den = row[v] as i128;
                // mass[v]/den > top.0/top.1
                if mass[v] * top.1 > top.0 * den {
                    top = (mass[v], den, v);
                    if let Some((bn, bd, _, _)) = best {
                        if top.0 * bd >= bn * top.1 {
                            pruned = true;
                            break;
                        }
                    }
                }
            }
            if pruned {
                continue;
            }
            match best {
                Some((bn, bd, _, _)) if top.0 * bd >= bn * top.1 => {}
                _ => best = Some((top.0, top.1, c, top.2)),
            }
        }
        let (num, den, c, v) = best.expect("group is nonempty");
        let value = T::from_int(num as i64) / (T::from_int(den as i64) * scale);
        Ok(OracleResult { value, c: c as u32, v: v as u32 })
    }

    /// Elements of a mask, in canonical order.
    pub fn members(&self, mask: u32) -> Vec<Vec<i64>> {
        (0..self.n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| unrank(&self.moduli, i))
            .collect()
    }
}

/// Every list of moduli `2 ≤ m_1 ≤ … ≤ m_k` with product `n`; the trivial
/// group is the empty list.
pub fn factorizations(n: u64) -> Vec<Vec<u64>> {
    fn go(n: u64, min: u64, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if n == 1 {
            out.push(prefix.clone());
            return;
        }
        for m in min..=n {
            if n.is_multiple_of(m) {
                prefix.push(m);
                go(n / m, m, prefix, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(n, 2, &mut Vec::new(), &mut out);
    out
}

/// One group of the equivalence suite.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteGroup {
    pub moduli: Vec<u64>,
    pub subsets: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub cap: usize,
    pub groups: Vec<SuiteGroup>,
    pub subsets: u64,
}

/// For every abelian group of order at most `cap` (every factorization
/// into cyclic factors) and every subset `A`, checks that the brute-force
/// inf-sup equals `|A|/|G|`. A mismatch is a verification error naming
/// `G`, `A`, `C` and `V`.
pub fn equivalence_suite(cap: usize) -> Result<SuiteReport> {
    if cap > MAX_ORACLE_ORDER {
        return Err(Error::precondition(format!(
            "selftest cap {cap} is above the oracle limit {MAX_ORACLE_ORDER}"
        )));
    }
    let mut groups = Vec::new();
    let mut total = 0;
    for n in 1..=cap as u64 {
        for moduli in factorizations(n) {
            let o = Oracle::new(&moduli, cap)?;
            let order = o.order();
            for a in 0u32..1 << order {
                let weights: Vec<Ratio<i64>> =
                    (0..order).map(|i| Ratio::from_integer((a >> i & 1) as i64)).collect();
                let r = o.evaluate(&weights)?;
                let expect = Ratio::new(a.count_ones() as i64, order as i64);
                if r.value != expect {
                    return Err(Error::verification(
                        "oracle equivalence",
                        format!(
                            "G = {moduli:?}, A = {:?}: inf-sup {} ≠ |A|/|G| = {expect} (C = {:?}, V = {:?})",
                            o.members(a),
                            r.value,
                            o.members(r.c),
                            o.members(r.v)
                        ),
                    ));
                }
            }
            total += 1u64 << order;
            groups.push(SuiteGroup { moduli, subsets: 1 << order });
        }
    }
    Ok(SuiteReport { cap, groups, subsets: total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn two_of_six() {
        let o = Oracle::new(&[6], 8).unwrap();
        let w: Vec<Rational> = (0..6)
            .map(|i| Rational::from_int(if i == 0 || i == 2 { 1 } else { 0 }))
            .collect();
        let r = o.evaluate(&w).unwrap();
        assert_eq!(r.value, Rational::from_ratio(1, 3));
        // the witness re-evaluates
        let mass: i64 = (0..6).filter(|i| r.v >> i & 1 == 1 && (*i == 0 || *i == 2)).count() as i64;
        assert_eq!(
            Rational::from_ratio(mass, o.sumset_size(r.c, r.v) as i64),
            r.value
        );
    }

    #[test]
    fn sumset_sizes_match_direct_enumeration() {
        let moduli = [2u64, 3];
        let o = Oracle::new(&moduli, 8).unwrap();
        for c in 1u32..64 {
            for v in 1u32..64 {
                let mut seen = std::collections::BTreeSet::new();
                for a in o.members(c) {
                    for b in o.members(v) {
                        seen.insert(((a[0] + b[0]) % 2, (a[1] + b[1]) % 3));
                    }
                }
                assert_eq!(o.sumset_size(c, v) as usize, seen.len());
            }
        }
    }

    #[test]
    fn group_lists() {
        assert_eq!(factorizations(8), vec![vec![2, 2, 2], vec![2, 4], vec![8]]);
        assert_eq!(factorizations(1), vec![Vec::<u64>::new()]);
        let r = equivalence_suite(4).unwrap();
        assert_eq!(r.groups.len(), 5);
        assert_eq!(r.subsets, 2 + 4 + 8 + 16 + 16);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(Oracle::new(&[3, 3], 8), Err(Error::CapExceeded { .. })));
    }
}
