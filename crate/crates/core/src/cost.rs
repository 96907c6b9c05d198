//! Fixed-point edit costs.
//!
//! Every primitive cost is quantized once to an integer number of
//! nano-units. Sums are then exact and associative, so the DP value, the
//! cost of a replayed script and the brute-force oracles agree bit for bit.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Sub};

use serde::{Deserialize, Serialize};

/// Number of integer units per 1.0 of cost.
pub const SCALE: i64 = 1_000_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Cost(pub i64);

impl Cost {
    pub const ZERO: Cost = Cost(0);
    pub const ONE: Cost = Cost(SCALE);
    /// Sentinel used for unreachable DP cells. Never added to anything.
    pub const INFINITY: Cost = Cost(i64::MAX / 4);

    /// Quantizes a real cost. Negative inputs are kept so that validity
    /// checks can report them.
    pub fn from_f64(value: f64) -> Cost {
        Cost((value * SCALE as f64).round() as i64)
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / SCALE as f64
    }

    pub fn units(self) -> i64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self < Cost::INFINITY
    }
}

impl Add for Cost {
    type Output = Cost;
    fn add(self, rhs: Cost) -> Cost {
        Cost(self.0 + rhs.0)
    }
}

impl AddAssign for Cost {
    fn add_assign(&mut self, rhs: Cost) {
        self.0 += rhs.0;
    }
}

impl Sub for Cost {
    type Output = Cost;
    fn sub(self, rhs: Cost) -> Cost {
        Cost(self.0 - rhs.0)
    }
}

impl Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::ZERO, |a, b| a + b)
    }
}

impl<'a> Sum<&'a Cost> for Cost {
    fn sum<I: Iterator<Item = &'a Cost>>(iter: I) -> Cost {
        iter.fold(Cost::ZERO, |a, b| a + *b)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantization_roundtrip() {
        assert_eq!(Cost::from_f64(0.2).units(), 200_000_000);
        assert_eq!(Cost::from_f64(1.0), Cost::ONE);
        assert_eq!(Cost::from_f64(0.1) + Cost::from_f64(0.2), Cost::from_f64(0.3));
        assert_eq!(format!("{}", Cost::from_f64(0.05)), "0.05");
    }

    #[test]
    fn sums_are_order_independent() {
        let xs: Vec<Cost> = [0.1, 1.0 / 3.0, 0.7, 2.0 / 7.0]
            .iter()
            .map(|&x| Cost::from_f64(x))
            .collect();
        let forward: Cost = xs.iter().sum();
        let backward: Cost = xs.iter().rev().sum();
        assert_eq!(forward, backward);
    }
}
