//! Natural numbers with a machine-word fast path.
//!
//! Stream values and program codes share this type. Codes are large
//! (serialized programs), everything else is almost always tiny, so the
//! common case stays on `u64` and only overflow promotes to a shared
//! `BigUint`.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

#[derive(Clone)]
pub enum Nat {
    Small(u64),
    // Invariant: the value does not fit in a u64.
    Big(Arc<BigUint>),
}

impl Nat {
    pub const ZERO: Nat = Nat::Small(0);
    pub const ONE: Nat = Nat::Small(1);

    pub fn from_big(b: BigUint) -> Nat {
        match b.to_u64() {
            Some(v) => Nat::Small(v),
            None => Nat::Big(Arc::new(b)),
        }
    }

    pub fn to_big(&self) -> BigUint {
        match self {
            Nat::Small(v) => BigUint::from(*v),
            Nat::Big(b) => (**b).clone(),
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        match self {
            Nat::Small(v) => Some(*v),
            Nat::Big(_) => None,
        }
    }

    pub fn to_usize(&self) -> Option<usize> {
        self.to_u64().and_then(|v| usize::try_from(v).ok())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Nat::Small(0))
    }

    /// Big-endian magnitude bytes, no leading zeros (empty for zero).
    pub fn to_bytes_be(&self) -> Vec<u8> {
        if self.is_zero() {
            return Vec::new();
        }
        match self {
            Nat::Small(v) => {
                let bytes = v.to_be_bytes();
                let skip = bytes.iter().take_while(|b| **b == 0).count();
                bytes[skip..].to_vec()
            }
            Nat::Big(b) => b.to_bytes_be(),
        }
    }

    pub fn from_bytes_be(bytes: &[u8]) -> Nat {
        Nat::from_big(BigUint::from_bytes_be(bytes))
    }

    pub fn add(&self, other: &Nat) -> Nat {
        if let (Nat::Small(a), Nat::Small(b)) = (self, other) {
            if let Some(v) = a.checked_add(*b) {
                return Nat::Small(v);
            }
        }
        Nat::from_big(self.to_big() + other.to_big())
    }

    /// Truncated subtraction (monus): `a - b` is zero when `b > a`.
    pub fn monus(&self, other: &Nat) -> Nat {
        if let (Nat::Small(a), Nat::Small(b)) = (self, other) {
            return Nat::Small(a.saturating_sub(*b));
        }
        if self <= other {
            Nat::ZERO
        } else {
            Nat::from_big(self.to_big() - other.to_big())
        }
    }

    pub fn mul(&self, other: &Nat) -> Nat {
        if let (Nat::Small(a), Nat::Small(b)) = (self, other) {
            if let Some(v) = a.checked_mul(*b) {
                return Nat::Small(v);
            }
        }
        Nat::from_big(self.to_big() * other.to_big())
    }

    /// Division by zero yields zero so that arithmetic stays total.
    pub fn div(&self, other: &Nat) -> Nat {
        if other.is_zero() {
            return Nat::ZERO;
        }
        if let (Nat::Small(a), Nat::Small(b)) = (self, other) {
            return Nat::Small(a / b);
        }
        Nat::from_big(self.to_big() / other.to_big())
    }

    /// Remainder by zero yields the dividend.
    pub fn rem(&self, other: &Nat) -> Nat {
        if other.is_zero() {
            return self.clone();
        }
        if let (Nat::Small(a), Nat::Small(b)) = (self, other) {
            return Nat::Small(a % b);
        }
        Nat::from_big(self.to_big() % other.to_big())
    }
}

impl Default for Nat {
    fn default() -> Self {
        Nat::ZERO
    }
}

impl From<u64> for Nat {
    fn from(v: u64) -> Self {
        Nat::Small(v)
    }
}

impl From<usize> for Nat {
    fn from(v: usize) -> Self {
        Nat::Small(v as u64)
    }
}

impl From<u32> for Nat {
    fn from(v: u32) -> Self {
        Nat::Small(u64::from(v))
    }
}

impl From<BigUint> for Nat {
    fn from(b: BigUint) -> Self {
        Nat::from_big(b)
    }
}

impl PartialEq for Nat {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Nat::Small(a), Nat::Small(b)) => a == b,
            (Nat::Big(a), Nat::Big(b)) => Arc::ptr_eq(a, b) || a == b,
            _ => false,
        }
    }
}

impl Eq for Nat {}

impl PartialEq<u64> for Nat {
    fn eq(&self, other: &u64) -> bool {
        matches!(self, Nat::Small(v) if v == other)
    }
}

impl Ord for Nat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Nat::Small(a), Nat::Small(b)) => a.cmp(b),
            (Nat::Small(_), Nat::Big(_)) => Ordering::Less,
            (Nat::Big(_), Nat::Small(_)) => Ordering::Greater,
            (Nat::Big(a), Nat::Big(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Nat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Hash for Nat {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Nat::Small(v) => {
                0u8.hash(state);
                v.hash(state);
            }
            Nat::Big(b) => {
                1u8.hash(state);
                b.hash(state);
            }
        }
    }
}

impl fmt::Display for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nat::Small(v) => write!(f, "{v}"),
            Nat::Big(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Debug for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Nat {
    type Err = num_bigint::ParseBigIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(v) = s.parse::<u64>() {
            return Ok(Nat::Small(v));
        }
        let b: BigUint = s.parse()?;
        Ok(if b.is_zero() { Nat::ZERO } else { Nat::from_big(b) })
    }
}
