//! Integer partitions: conjugation, doubly-even structure, enumeration and
//! exact counting.
//!
//! Canonical order everywhere is reverse-lexicographic, so `(3)` comes before
//! `(2, 1)` comes before `(1, 1, 1)`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of partitions an enumeration may return.
pub const DEFAULT_ENUM_CAP: usize = 1_000_000;

/// A non-increasing finite sequence of positive integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub struct Partition(Vec<u32>);

impl Partition {
    /// The empty partition, the unique partition of 0.
    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    /// Builds a partition, rejecting zero parts and increasing sequences.
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.iter().any(|&p| p == 0) {
            return Err(Error::InvalidParameter(format!("partition {parts:?} has a zero part")));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(format!("partition {parts:?} is not non-increasing")));
        }
        Ok(Partition(parts))
    }

    /// Sorts arbitrary positive parts into canonical order.
    pub fn from_parts_unsorted(mut parts: Vec<u32>) -> Result<Self> {
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Self::new(parts)
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn weight(&self) -> u64 {
        self.0.iter().map(|&p| p as u64).sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest part, or 0 for the empty partition.
    pub fn largest(&self) -> u32 {
        self.0.first().copied().unwrap_or(0)
    }

    /// The i-th part (0-based), padded with zeros past the length.
    pub fn part(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn conjugate(&self) -> Partition {
        conjugate(self)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// Reflects the Young diagram: the j-th part of the result counts the parts
/// of `lambda` that are at least j.
pub fn conjugate(lambda: &Partition) -> Partition {
    let parts = lambda.parts();
    let width = lambda.largest() as usize;
    let mut out = Vec::with_capacity(width);
    // parts are sorted, so the count of parts >= j only shrinks as j grows
    let mut rows = parts.len();
    for j in 1..=width as u32 {
        while rows > 0 && parts[rows - 1] < j {
            rows -= 1;
        }
        out.push(rows as u32);
    }
    Partition(out)
}

/// True iff every part of `lambda` and of its conjugate is even.
pub fn is_doubly_even(lambda: &Partition) -> bool {
    lambda.parts().iter().all(|p| p % 2 == 0) && conjugate(lambda).parts().iter().all(|p| p % 2 == 0)
}

/// Exact partition counts p(k, at most `max_parts` parts) for every k in 0..=k_max.
///
/// Uses the bounded-largest-part recurrence: partitions into at most m parts
/// are conjugate to partitions with every part at most m.
pub fn partition_counts(k_max: usize, max_parts: Option<usize>) -> Vec<BigUint> {
    let m = max_parts.unwrap_or(k_max).min(k_max);
    let mut table = vec![BigUint::zero(); k_max + 1];
    table[0] = BigUint::one();
    for part in 1..=m {
        for n in part..=k_max {
            let (lo, hi) = table.split_at_mut(n);
            hi[0] += &lo[n - part];
        }
    }
    table
}

/// Exact p(k), or p(k, at most `max_parts` parts) when a bound is given.
pub fn partition_count(k: usize, max_parts: Option<usize>) -> BigUint {
    partition_counts(k, max_parts).pop().expect("table is never empty")
}

/// Natural log of a big unsigned integer (for comparisons in log space).
pub fn big_ln(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        // exactly representable range of f64 exponents
        let f: f64 = x.to_string().parse().unwrap_or(f64::INFINITY);
        if f.is_finite() {
            return f.ln();
        }
    }
    let shift = bits - 64;
    let top: BigUint = x >> shift;
    let top = top.to_u64_digits().first().copied().unwrap_or(0) as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Calls `visit` for every partition of `k` with at most `max_len` parts and
/// every part at most `max_part`, in reverse-lexicographic order.
pub fn visit_partitions_in_box(k: usize, max_part: usize, max_len: usize, visit: &mut dyn FnMut(&[u32])) {
    fn rec(rem: usize, cap: usize, len_left: usize, cur: &mut Vec<u32>, visit: &mut dyn FnMut(&[u32])) {
        if rem == 0 {
            visit(cur);
            return;
        }
        if len_left == 0 {
            return;
        }
        // the remaining parts cannot cover rem if every one is at most cap
        if cap.saturating_mul(len_left) < rem {
            return;
        }
        for p in (1..=cap.min(rem)).rev() {
            cur.push(p as u32);
            rec(rem - p, p, len_left - 1, cur, visit);
            cur.pop();
        }
    }
    let mut cur = Vec::new();
    rec(k, max_part, max_len, &mut cur, visit);
}

/// All partitions of `k` (at most `max_parts` parts when given), reverse-lex.
pub fn enumerate_partitions(k: usize, max_parts: Option<usize>) -> Result<Vec<Partition>> {
    enumerate_partitions_capped(k, max_parts, DEFAULT_ENUM_CAP)
}

pub fn enumerate_partitions_capped(k: usize, max_parts: Option<usize>, cap: usize) -> Result<Vec<Partition>> {
    let count = partition_count(k, max_parts);
    if count > BigUint::from(cap) {
        return Err(Error::BudgetExceeded { what: "enumerate_partitions", cap });
    }
    let mut out = Vec::new();
    visit_partitions_in_box(k, k, max_parts.unwrap_or(k), &mut |p| out.push(Partition(p.to_vec())));
    Ok(out)
}

/// The doubling map mu -> (2mu_1, 2mu_1, 2mu_2, 2mu_2, ...).
pub fn doubly_even_expand(mu: &Partition) -> Partition {
    Partition(mu.parts().iter().flat_map(|&p| [2 * p, 2 * p]).collect())
}

/// Inverse of [`doubly_even_expand`]; `None` if `lambda` is not doubly even.
pub fn doubly_even_contract(lambda: &Partition) -> Option<Partition> {
    if !is_doubly_even(lambda) {
        return None;
    }
    Some(Partition(lambda.parts().chunks(2).map(|c| c[0] / 2).collect()))
}

/// All doubly-even partitions of weight at most `max_weight` and length at
/// most `max_length`, ordered by weight and then reverse-lex.
pub fn enumerate_doubly_even(max_weight: usize, max_length: usize) -> Result<Vec<Partition>> {
    enumerate_doubly_even_capped(max_weight, max_length, DEFAULT_ENUM_CAP)
}

pub fn enumerate_doubly_even_capped(max_weight: usize, max_length: usize, cap: usize) -> Result<Vec<Partition>> {
    let half = max_length / 2;
    let mut out = Vec::new();
    for k in 0..=max_weight / 4 {
        let count = partition_count(k, Some(half));
        if BigUint::from(out.len()) + count > BigUint::from(cap) {
            return Err(Error::BudgetExceeded { what: "enumerate_doubly_even", cap });
        }
        visit_partitions_in_box(k, k, half, &mut |mu| {
            out.push(Partition(mu.iter().flat_map(|&p| [2 * p, 2 * p]).collect()));
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(parts: &[u32]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    /// Column counts read straight off the Young diagram.
    fn conjugate_by_diagram(lambda: &Partition) -> Partition {
        let mut cols = vec![0u32; lambda.largest() as usize];
        for &row in lambda.parts() {
            for c in cols.iter_mut().take(row as usize) {
                *c += 1;
            }
        }
        Partition(cols)
    }

    #[test]
    fn conjugate_examples() {
        assert_eq!(conjugate(&p(&[5, 4, 1])), p(&[3, 2, 2, 2, 1]));
        assert_eq!(conjugate(&Partition::empty()), Partition::empty());
        assert_eq!(conjugate(&p(&[4, 4, 2, 2])), conjugate_by_diagram(&p(&[4, 4, 2, 2])));
        assert_eq!(conjugate(&p(&[4, 4, 2, 2])), p(&[4, 4, 2, 2]));
    }

    #[test]
    fn conjugate_matches_diagram_and_is_involution_to_weight_20() {
        for k in 0..=20 {
            for lambda in enumerate_partitions(k, None).unwrap() {
                let c = conjugate(&lambda);
                assert_eq!(c, conjugate_by_diagram(&lambda));
                assert_eq!(c.weight(), lambda.weight());
                assert_eq!(conjugate(&c), lambda);
            }
        }
    }

    #[test]
    fn doubly_even_examples() {
        assert!(is_doubly_even(&p(&[4, 4, 2, 2])));
        assert!(!is_doubly_even(&p(&[5, 4, 1])));
        assert!(!is_doubly_even(&p(&[4, 2])));
        assert!(is_doubly_even(&Partition::empty()));
    }

    #[test]
    fn rejects_malformed() {
        assert!(Partition::new(vec![1, 2]).is_err());
        assert!(Partition::new(vec![2, 0]).is_err());
        assert_eq!(Partition::from_parts_unsorted(vec![1, 3, 2]).unwrap(), p(&[3, 2, 1]));
    }

    #[test]
    fn count_examples() {
        assert_eq!(partition_count(0, None), BigUint::from(1u32));
        assert_eq!(partition_count(4, None), BigUint::from(5u32));
        assert_eq!(partition_count(3, Some(2)), BigUint::from(2u32));
        assert_eq!(partition_count(100, None), "190569292".parse::<BigUint>().unwrap());
    }

    #[test]
    fn count_matches_enumeration_to_30() {
        for k in 0..=30 {
            let n = enumerate_partitions(k, None).unwrap().len();
            assert_eq!(partition_count(k, None), BigUint::from(n), "k = {k}");
            for m in 1..=4 {
                let n = enumerate_partitions(k, Some(m)).unwrap().len();
                assert_eq!(partition_count(k, Some(m)), BigUint::from(n));
            }
        }
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate_partitions(0, None).unwrap(), vec![Partition::empty()]);
        assert_eq!(enumerate_partitions(3, None).unwrap(), vec![p(&[3]), p(&[2, 1]), p(&[1, 1, 1])]);
        assert_eq!(enumerate_partitions(4, Some(2)).unwrap(), vec![p(&[4]), p(&[3, 1]), p(&[2, 2])]);
    }

    #[test]
    fn enumeration_respects_cap() {
        let err = enumerate_partitions_capped(30, None, 100).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn enumeration_is_reverse_lex_without_duplicates() {
        let all = enumerate_partitions(12, None).unwrap();
        for w in all.windows(2) {
            assert!(w[0].parts() > w[1].parts());
        }
    }

    #[test]
    fn expand_examples() {
        assert_eq!(doubly_even_expand(&p(&[1])), p(&[2, 2]));
        assert_eq!(doubly_even_expand(&p(&[2, 1])), p(&[4, 4, 2, 2]));
        assert_eq!(doubly_even_expand(&Partition::empty()), Partition::empty());
        let lam = doubly_even_expand(&p(&[2, 1]));
        assert!(is_doubly_even(&lam));
        assert!(conjugate(&lam).parts().iter().all(|x| x % 2 == 0));
        assert_eq!(doubly_even_contract(&lam), Some(p(&[2, 1])));
    }

    #[test]
    fn doubly_even_enumeration_examples() {
        assert_eq!(enumerate_doubly_even(8, 2).unwrap(), vec![Partition::empty(), p(&[2, 2]), p(&[4, 4])]);
        assert_eq!(enumerate_doubly_even(3, 10).unwrap(), vec![Partition::empty()]);
        assert_eq!(
            enumerate_doubly_even(8, 4).unwrap(),
            vec![Partition::empty(), p(&[2, 2]), p(&[4, 4]), p(&[2, 2, 2, 2])]
        );
    }

    #[test]
    fn doubly_even_enumeration_matches_filter_oracle() {
        for max_len in [2usize, 4, 6] {
            let got = enumerate_doubly_even(24, max_len).unwrap();
            let mut want = Vec::new();
            for w in 0..=24 {
                for lam in enumerate_partitions(w, Some(max_len)).unwrap() {
                    if is_doubly_even(&lam) {
                        want.push(lam);
                    }
                }
            }
            assert_eq!(got, want);
            assert!(got.iter().all(|l| l.weight() % 4 == 0));
        }
    }

    #[test]
    fn doubling_is_a_bijection_onto_doubly_even() {
        for k in 0..=12 {
            let mut images: Vec<Partition> =
                enumerate_partitions(k, None).unwrap().iter().map(doubly_even_expand).collect();
            images.sort();
            let mut direct: Vec<Partition> =
                enumerate_partitions(4 * k, None).unwrap().into_iter().filter(is_doubly_even).collect();
            direct.sort();
            assert_eq!(images, direct, "k = {k}");
            assert_eq!(BigUint::from(direct.len()), partition_count(k, None));
        }
    }

    #[test]
    fn length_restricted_doubly_even_count() {
        for k in 0..=12 {
            for n in [2usize, 4, 6] {
                let direct = enumerate_partitions(4 * k, Some(n))
                    .unwrap()
                    .into_iter()
                    .filter(is_doubly_even)
                    .count();
                assert_eq!(BigUint::from(direct), partition_count(k, Some(n / 2)), "k={k} n={n}");
            }
        }
    }

    #[test]
    fn big_ln_agrees_with_f64() {
        let x = partition_count(200, None);
        let f: f64 = x.to_string().parse().unwrap();
        assert!((big_ln(&x) - f.ln()).abs() < 1e-12);
        let huge = BigUint::from(3u32).pow(2000);
        assert!((big_ln(&huge) - 2000.0 * 3f64.ln()).abs() < 1e-9);
    }
}
