//! Weights of axioms and assertions, and extended costs of interpretations.

use std::fmt;
use std::iter::Sum;
use std::ops::Add;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

/// Weight attached to an axiom or assertion: a positive integer or infinity.
///
/// Zero is representable so that parsers stay total; [`crate::kb::validate_kb`]
/// flags it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Weight {
    Finite(BigUint),
    Infinite,
}

impl Weight {
    pub fn finite(n: u64) -> Weight {
        Weight::Finite(BigUint::from(n))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Weight::Infinite)
    }

    /// The finite value as `u128`, if it fits.
    pub fn to_u128(&self) -> Option<u128> {
        match self {
            Weight::Finite(n) => n.to_u128(),
            Weight::Infinite => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Weight::Finite(n) if n.is_zero())
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Finite(n) => write!(f, "{n}"),
            Weight::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Weight {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "inf" {
            return Ok(Weight::Infinite);
        }
        BigUint::from_str(s)
            .map(Weight::Finite)
            .map_err(|_| format!("invalid weight `{s}`"))
    }
}

/// Cost of an interpretation: a non-negative integer or infinity.
/// Addition saturates at infinity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cost {
    Finite(BigUint),
    Infinite,
}

impl Cost {
    pub fn zero() -> Cost {
        Cost::Finite(BigUint::zero())
    }

    pub fn finite(n: u64) -> Cost {
        Cost::Finite(BigUint::from(n))
    }

    pub fn from_u128(n: u128) -> Cost {
        Cost::Finite(BigUint::from(n))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Cost::Infinite)
    }

    pub fn to_u128(&self) -> Option<u128> {
        match self {
            Cost::Finite(n) => n.to_u128(),
            Cost::Infinite => None,
        }
    }

    /// `weight × count`, with any non-zero count of an infinite weight giving
    /// infinity.
    pub fn scaled(weight: &Weight, count: usize) -> Cost {
        if count == 0 {
            return Cost::zero();
        }
        match weight {
            Weight::Finite(n) => Cost::Finite(n * BigUint::from(count)),
            Weight::Infinite => Cost::Infinite,
        }
    }

    /// Whether this cost is at most the finite bound `k`.
    pub fn at_most(&self, k: u64) -> bool {
        match self {
            Cost::Finite(n) => *n <= BigUint::from(k),
            Cost::Infinite => false,
        }
    }
}

impl From<&Weight> for Cost {
    fn from(w: &Weight) -> Cost {
        match w {
            Weight::Finite(n) => Cost::Finite(n.clone()),
            Weight::Infinite => Cost::Infinite,
        }
    }
}

impl Add for Cost {
    type Output = Cost;

    fn add(self, rhs: Cost) -> Cost {
        match (self, rhs) {
            (Cost::Finite(a), Cost::Finite(b)) => Cost::Finite(a + b),
            _ => Cost::Infinite,
        }
    }
}

impl Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::zero(), |a, b| a + b)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(n) => write!(f, "{n}"),
            Cost::Infinite => write!(f, "inf"),
        }
    }
}
