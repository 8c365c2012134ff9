//! Weight quantization: milestone sets and rounding up to the next milestone.
//!
//! The base set for `k = 0` is the powers of two `1, 2, 4, ..., L` where `L`
//! is the smallest power of two `>= n`. Each step up inserts the midpoint of
//! every interval that contains an integer; each step down drops every other
//! milestone but always keeps `L`. All arithmetic is on integers.

use std::cmp::Ordering;

use num_rational::Ratio;
use serde::Serialize;
use thiserror::Error;

use crate::graph::Weight;

pub type Bound = Ratio<u64>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuantError {
    #[error("trade-off parameter k = {k} outside [{lo}, {hi}] for n = {n}")]
    KOutOfRange { k: i32, n: u64, lo: i32, hi: i32 },
    #[error("n must be at least 2, got {0}")]
    TooSmall(u64),
    #[error("weight {w} outside [1, {top}]")]
    WeightOutOfRange { w: Weight, top: Weight },
    #[error("{0} is not a milestone")]
    NotAMilestone(Weight),
    #[error("milestone index {index} out of range (set has {len})")]
    IndexOutOfRange { index: usize, len: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MilestoneSet {
    n: u64,
    k: i32,
    top: Weight,
    milestones: Vec<Weight>,
}

/// `log2` of the smallest power of two `>= n`.
pub fn log2_top(n: u64) -> u32 {
    n.max(1).next_power_of_two().trailing_zeros()
}

/// Valid range of the trade-off parameter for `n`.
pub fn k_range(n: u64) -> (i32, i32) {
    let p = log2_top(n);
    // floor(log2 p); p >= 1 whenever n >= 2
    let lo = if p <= 1 { 0 } else { (31 - p.leading_zeros()) as i32 };
    (-lo, p as i32 - 1)
}

fn check_k(n: u64, k: i32) -> Result<(), QuantError> {
    if n < 2 {
        return Err(QuantError::TooSmall(n));
    }
    let (lo, hi) = k_range(n);
    if k < lo || k > hi {
        return Err(QuantError::KOutOfRange { k, n, lo, hi });
    }
    Ok(())
}

impl MilestoneSet {
    pub fn new(n: u64, k: i32) -> Result<Self, QuantError> {
        check_k(n, k)?;
        let p = log2_top(n);
        let top: Weight = 1 << p;
        let mut set: Vec<Weight> = (0..=p).map(|i| 1 << i).collect();
        match k.cmp(&0) {
            Ordering::Greater => {
                for _ in 0..k {
                    let mut next = Vec::with_capacity(set.len() * 2);
                    for pair in set.windows(2) {
                        next.push(pair[0]);
                        if pair[1] - pair[0] >= 2 {
                            next.push((pair[0] + pair[1]) / 2);
                        }
                    }
                    next.push(top);
                    set = next;
                }
            }
            Ordering::Less => {
                for _ in 0..-k {
                    let last = set.len() - 1;
                    set = set
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i % 2 == 0 || i == last)
                        .map(|(_, &m)| m)
                        .collect();
                }
            }
            Ordering::Equal => {}
        }
        Ok(MilestoneSet { n, k, top, milestones: set })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> i32 {
        self.k
    }

    /// The largest milestone, `L`.
    pub fn top(&self) -> Weight {
        self.top
    }

    pub fn milestones(&self) -> &[Weight] {
        &self.milestones
    }

    pub fn len(&self) -> usize {
        self.milestones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.milestones.is_empty()
    }

    /// Smallest milestone `>= w`.
    pub fn transform(&self, w: Weight) -> Result<Weight, QuantError> {
        self.transform_index(w).map(|i| self.milestones[i])
    }

    /// Index of the smallest milestone `>= w`.
    pub fn transform_index(&self, w: Weight) -> Result<usize, QuantError> {
        if w == 0 || w > self.top {
            return Err(QuantError::WeightOutOfRange { w, top: self.top });
        }
        Ok(self.milestones.partition_point(|&m| m < w))
    }

    pub fn index_of(&self, w: Weight) -> Result<usize, QuantError> {
        self.milestones.binary_search(&w).map_err(|_| QuantError::NotAMilestone(w))
    }

    pub fn milestone_at(&self, index: usize) -> Result<Weight, QuantError> {
        self.milestones
            .get(index)
            .copied()
            .ok_or(QuantError::IndexOutOfRange { index, len: self.milestones.len() })
    }

    /// Bits needed for one milestone index: `ceil(log2 |milestones|)`.
    pub fn code_length(&self) -> u32 {
        ceil_log2(self.milestones.len() as u64)
    }

    pub fn approximation_bound(&self) -> Bound {
        approximation_bound(self.k, self.n).expect("k validated at construction")
    }
}

/// Guaranteed rounding factor for parameter `k`:
/// `1 + 2^-k` for `k` in `[0, log L - 2]`, `2^(2^-k)` below zero, and `1`
/// for the exact regime `k = log L - 1`.
pub fn approximation_bound(k: i32, n: u64) -> Result<Bound, QuantError> {
    check_k(n, k)?;
    let p = log2_top(n) as i32;
    Ok(if k == p - 1 {
        Ratio::from_integer(1)
    } else if k >= 0 {
        let d = 1u64 << k;
        Ratio::new(d + 1, d)
    } else {
        Ratio::from_integer(1u64 << (1u32 << (-k)))
    })
}

pub fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ms(n: u64, k: i32) -> MilestoneSet {
        MilestoneSet::new(n, k).unwrap()
    }

    #[test]
    fn literal_sets_for_sixteen() {
        assert_eq!(ms(16, 0).milestones(), &[1, 2, 4, 8, 16]);
        assert_eq!(ms(16, 1).milestones(), &[1, 2, 3, 4, 6, 8, 12, 16]);
        assert_eq!(ms(16, -1).milestones(), &[1, 4, 16]);
        assert_eq!(ms(16, 3).milestones(), (1..=16).collect::<Vec<_>>().as_slice());
        assert_eq!(ms(16, 2).milestones(), &[1, 2, 3, 4, 5, 6, 7, 8, 10, 12, 14, 16]);
    }

    #[test]
    fn transform_examples() {
        assert_eq!(ms(16, 0).transform(3), Ok(4));
        assert_eq!(ms(16, 0).transform(2), Ok(2));
        assert_eq!(ms(16, 1).transform(5), Ok(6));
        for k in -2..=3 {
            assert_eq!(ms(16, k).transform(1), Ok(1));
        }
        assert!(ms(16, 0).transform(0).is_err());
        assert!(ms(16, 0).transform(17).is_err());
    }

    #[test]
    fn bounds() {
        assert_eq!(approximation_bound(0, 16), Ok(Ratio::from_integer(2)));
        assert_eq!(approximation_bound(2, 16), Ok(Ratio::new(5, 4)));
        assert_eq!(approximation_bound(-1, 16), Ok(Ratio::from_integer(4)));
        assert_eq!(approximation_bound(3, 16), Ok(Ratio::from_integer(1)));
        assert!(approximation_bound(4, 16).is_err());
        assert!(approximation_bound(-3, 16).is_err());
    }

    #[test]
    fn code_lengths() {
        assert_eq!(ms(16, 0).code_length(), 3);
        assert_eq!(ms(16, 3).code_length(), 4);
        assert_eq!(ms(1024, 0).code_length(), 4);
        assert_eq!(ms(1024, 9).code_length(), 10);
    }

    #[test]
    fn index_codec() {
        let m = ms(16, 0);
        assert_eq!(m.index_of(8), Ok(3));
        assert_eq!(m.milestone_at(0), Ok(1));
        assert_eq!(m.index_of(3), Err(QuantError::NotAMilestone(3)));
        assert!(m.milestone_at(5).is_err());
        for (i, &w) in m.milestones().iter().enumerate() {
            assert_eq!(m.index_of(w), Ok(i));
            assert!((i as u64) < (1u64 << m.code_length()));
        }
    }

    #[test]
    fn non_power_of_two_extends_to_next_power() {
        let m = ms(12, 0);
        assert_eq!(m.top(), 16);
        assert_eq!(m.milestones(), &[1, 2, 4, 8, 16]);
        assert_eq!(k_range(12), (-2, 3));
        assert_eq!(k_range(2), (0, 0));
        assert_eq!(k_range(1024), (-3, 9));
    }
}
