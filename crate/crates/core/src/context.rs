use crate::error::{Error, Result};

/// The cyclic group `Z/p^n` with a fixed generator `σ`.
///
/// Every polynomial, operator and instance carries one of these; mixing
/// values from different contexts is rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupContext {
    p: u32,
    n: u32,
    order: u32,
}

pub(crate) fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// `p^e` or `None` on overflow of `u32`.
pub(crate) fn checked_pow(p: u32, e: u32) -> Option<u32> {
    let mut acc: u32 = 1;
    for _ in 0..e {
        acc = acc.checked_mul(p)?;
    }
    Some(acc)
}

impl GroupContext {
    pub fn new(p: u32, n: u32) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if n == 0 {
            return Err(Error::param("n must be at least 1"));
        }
        let order = checked_pow(p, n)
            .filter(|&o| usize::try_from(o).is_ok())
            .ok_or_else(|| Error::param(format!("group order {p}^{n} does not fit in an index")))?;
        Ok(GroupContext { p, n, order })
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    /// `p^n`, the number of group elements and of generators `x[j]`.
    #[inline]
    pub fn order(&self) -> u32 {
        self.order
    }

    /// `p^e` for `e ≤ n`.
    #[inline]
    pub fn pow(&self, e: u32) -> u32 {
        assert!(e <= self.n, "exponent {e} exceeds n = {}", self.n);
        self.p.pow(e)
    }

    /// Reduces a possibly negative exponent of `σ` into `[0, p^n)`.
    #[inline]
    pub fn reduce(&self, e: i64) -> u32 {
        e.rem_euclid(self.order as i64) as u32
    }

    pub(crate) fn ensure_same(&self, other: &GroupContext) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ContextMismatch(self.p, self.n, other.p, other.n))
        }
    }
}
